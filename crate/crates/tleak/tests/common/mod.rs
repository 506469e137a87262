#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn tleak(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tleak")).args(args).output().expect("spawn tleak")
}

pub fn tleak_ok(args: &[&str]) -> Output {
    let out = tleak(args);
    assert!(
        out.status.success(),
        "tleak {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}
