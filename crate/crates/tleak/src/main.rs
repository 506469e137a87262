fn main() {
    std::process::exit(tleak::cli::main_with_args(std::env::args_os()));
}
