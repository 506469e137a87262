//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{fixture, s};
use tleak::parallel;
use tleak_core::clustering::{clustering_accuracy, hungarian, KMeansConfig};
use tleak_core::kernels::{BandwidthPolicy, KernelFamily, KernelSpec};
use tleak_core::leakage::{transfer_leakage, BootstrapConfig};
use tleak_core::mmd::{mmd2_brute_oracle, mmd2_unbiased, SampleGroup};
use tleak_core::rng::{index_below, stream, uniform, Normals, Stream};
use tleak_core::splits::SplitManifest;
use tleak_core::synth::{gen_mixture, MixtureSpec};
use tleak_core::{EmbeddingSet, LabelVector};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed <= limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn uniform_matrix(rng: &mut Stream, rows: usize, dim: usize, lo: f64, hi: f64) -> EmbeddingSet {
    let v = (0..rows * dim).map(|_| lo + (hi - lo) * uniform(rng)).collect();
    EmbeddingSet::new(rows, dim, v).unwrap()
}

fn mmd_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = stream(0xA11CE);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let na = 2 + index_below(&mut rng, 49);
        let nb = 2 + index_below(&mut rng, 49);
        let d = 1 + index_below(&mut rng, 16);
        let data = uniform_matrix(&mut rng, na + nb, d, -3.0, 3.0);
        let spec = match i % 3 {
            0 => KernelSpec::fixed(KernelFamily::Gaussian, 0.2 + 4.8 * uniform(&mut rng)).unwrap(),
            1 => KernelSpec::fixed(KernelFamily::Laplacian, 0.2 + 4.8 * uniform(&mut rng)).unwrap(),
            _ => KernelSpec::linear(),
        };
        let a = SampleGroup::new(&data, (0..na).collect()).unwrap();
        let b = SampleGroup::new(&data, (na..na + nb).collect()).unwrap();
        let diff = (mmd2_unbiased(&a, &b, &spec).unwrap() - mmd2_brute_oracle(&a, &b, &spec).unwrap()).abs();
        worst = worst.max(diff);
    }
    within(Duration::from_secs(10), start.elapsed())?;
    check(worst < 1e-10, format!("200 instances, max |diff| = {worst:.3e}"))
}

fn independence() -> Outcome {
    let start = Instant::now();
    let (m, d, classes) = (2000, 8, 4);
    let mut total = 0.0;
    for seed in 0..10u64 {
        let mut g = Normals::new(1000 + seed);
        let data = EmbeddingSet::new(m, d, (0..m * d).map(|_| g.sample()).collect()).unwrap();
        let mut rng = stream(5000 + seed);
        let labels = LabelVector::truth((0..m).map(|_| index_below(&mut rng, classes)).collect()).unwrap();
        total += transfer_leakage(&data, &labels, &KernelSpec::gaussian_median(seed)).unwrap().value.abs();
    }
    within(Duration::from_secs(60), start.elapsed())?;
    let mean = total / 10.0;
    check(mean < 0.02, format!("mean |T-Leak| over 10 seeds = {mean:.5}"))
}

fn bound_instance(rng: &mut Stream, i: usize) -> (EmbeddingSet, LabelVector) {
    let classes = 2 + index_below(rng, 6);
    let per = 2 + index_below(rng, 20);
    let d = 1 + index_below(rng, 8);
    let m = classes * per;
    let labels: Vec<usize> = (0..m).map(|r| r % classes).collect();
    let data = match i % 4 {
        // Far-apart, nearly collapsed classes: cross terms vanish.
        0 => {
            let v = (0..m * d).map(|k| 1e3 * labels[k / d] as f64 + 1e-6 * uniform(rng)).collect();
            EmbeddingSet::new(m, d, v).unwrap()
        }
        // Exact duplicates inside each class.
        1 => {
            let v = (0..m * d).map(|k| 50.0 * (labels[k / d] as f64) * ((k % d) as f64 + 1.0)).collect();
            EmbeddingSet::new(m, d, v).unwrap()
        }
        _ => uniform_matrix(rng, m, d, -10.0, 10.0),
    };
    (data, LabelVector::truth(labels).unwrap())
}

fn kernel_bound() -> Outcome {
    let mut rng = stream(0xB0_0D);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let (data, labels) = bound_instance(&mut rng, i);
        let family = if i % 2 == 0 { KernelFamily::Gaussian } else { KernelFamily::Laplacian };
        let bandwidth = if i % 3 == 0 {
            BandwidthPolicy::Fixed { value: 10f64.powf(-3.0 + 6.0 * uniform(&mut rng)) }
        } else {
            BandwidthPolicy::Median { seed: i as u64 }
        };
        let v = match transfer_leakage(&data, &labels, &KernelSpec::new(family, bandwidth)) {
            Ok(r) => r.value,
            Err(e) => return Err(format!("instance {i}: {e}")),
        };
        worst = worst.max(v);
    }
    check(worst <= 4.0 + 1e-9, format!("100 inputs, max T-Leak = {worst:.6}"))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

fn monotonicity() -> Outcome {
    let start = Instant::now();
    let seps = [0.0, 0.5, 1.0, 2.0, 4.0];
    let (mut leak, mut acc) = (Vec::new(), Vec::new());
    for &sep in &seps {
        let mix = MixtureSpec { num_classes: 5, dim: 16, separation: sep, per_class: 400, sigma: 1.0, seed: 0 };
        let (data, y) = gen_mixture(&mix).unwrap();
        leak.push(transfer_leakage(&data, &y, &KernelSpec::gaussian_median(0)).unwrap().value);
        let clusters = parallel::kmeans(&data, &KMeansConfig::new(5)).unwrap();
        acc.push(clustering_accuracy(&y, &clusters.assignment).unwrap().accuracy);
    }
    within(Duration::from_secs(120), start.elapsed())?;
    let leak_up = leak.windows(2).all(|w| w[1] > w[0]);
    let acc_up = acc.windows(2).all(|w| w[1] >= w[0]);
    let rho = spearman(&leak, &acc);
    let detail = format!(
        "leakage {leak:.4?} ({}), accuracy {acc:.4?} ({}), spearman {rho:.3}",
        if leak_up { "increasing" } else { "NOT increasing" },
        if acc_up { "non-decreasing" } else { "NOT non-decreasing" },
    );
    check(leak_up && acc_up && rho >= 0.9, detail)
}

fn row_sum(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, |a, c| a + c)
}

fn brute_min(cost: &[Vec<f64>]) -> f64 {
    fn go(cost: &[Vec<f64>], perm: &mut Vec<usize>, used: &mut [bool], best: &mut f64) {
        if perm.len() == cost.len() {
            *best = best.min(row_sum(cost, perm));
            return;
        }
        for c in 0..cost.len() {
            if !used[c] {
                used[c] = true;
                perm.push(c);
                go(cost, perm, used, best);
                perm.pop();
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, &mut Vec::new(), &mut vec![false; cost.len()], &mut best);
    best
}

fn hungarian_optimality() -> Outcome {
    let mut rng = stream(0x4A11);
    for i in 0..500 {
        let n = 1 + index_below(&mut rng, 6);
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if i % 2 == 0 { index_below(&mut rng, 5) as f64 } else { 100.0 * uniform(&mut rng) - 50.0 })
                    .collect()
            })
            .collect();
        let a = hungarian(&cost).unwrap();
        let best = brute_min(&cost);
        if row_sum(&cost, &a.permutation) != best || a.total_cost != best {
            return Err(format!("instance {i}: got {} expected {best}", a.total_cost));
        }
    }
    Ok("500 instances (C <= 6) equal to exhaustive enumeration".into())
}

fn accuracy_properties() -> Outcome {
    let mut rng = stream(0xACC);
    for i in 0..200 {
        let n = 1 + index_below(&mut rng, 200);
        let k = 1 + index_below(&mut rng, 8);
        let y: Vec<usize> = (0..n).map(|_| index_below(&mut rng, k)).collect();
        let p: Vec<usize> = (0..n).map(|_| index_below(&mut rng, k)).collect();
        let mut perm: Vec<usize> = (0..k).collect();
        for j in (1..k).rev() {
            perm.swap(j, index_below(&mut rng, j + 1));
        }
        let yv = LabelVector::new(y.clone(), k, tleak_core::LabelKind::Truth).unwrap();
        let pv = LabelVector::new(p.clone(), k, tleak_core::LabelKind::Pseudo).unwrap();
        let permuted = LabelVector::new(p.iter().map(|&c| perm[c]).collect(), k, tleak_core::LabelKind::Pseudo).unwrap();
        let self_acc = clustering_accuracy(&yv, &yv).unwrap().accuracy;
        let base = clustering_accuracy(&yv, &pv).unwrap().accuracy;
        let moved = clustering_accuracy(&yv, &permuted).unwrap().accuracy;
        if self_acc != 1.0 || base != moved {
            return Err(format!("vector {i}: Acc(y,y) = {self_acc}, {base} vs permuted {moved}"));
        }
    }
    Ok("200 label vectors: Acc(y,y) = 1 and permutation invariant".into())
}

fn run_bin(args: &[&str], threads: &str) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_tleak")).args(args).env("TLEAK_THREADS", threads).output().unwrap();
    assert!(out.status.success(), "tleak {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn manifest(hierarchy: &str, half: &str, labeled: &str, unlabeled: &str) -> Result<(SplitManifest, Vec<u8>), String> {
    let path = fixture(hierarchy);
    let args = ["splits", "--hierarchy", s(&path), "--half", half, "--labeled", labeled, "--unlabeled", unlabeled, "--mixed"];
    let first = run_bin(&args, "1").stdout;
    let second = run_bin(&args, "4").stdout;
    if first != second {
        return Err(format!("{hierarchy}: manifest bytes differ between runs"));
    }
    Ok((serde_json::from_slice(&first).map_err(|e| e.to_string())?, first))
}

fn split_counts() -> Outcome {
    let (e, _) = manifest("entity30_hierarchy.json", "15", "6", "2")?;
    let (c, _) = manifest("cifar100_hierarchy.json", "10", "4", "1")?;
    let len = |m: &SplitManifest, l: bool, name: &str| if l { m.labeled(name) } else { m.unlabeled(name) }.map_or(0, <[String]>::len);
    let mixed = e.labeled("L1.5").unwrap_or(&[]);
    let l1 = e.labeled("L1").unwrap_or(&[]);
    let l2 = e.labeled("L2").unwrap_or(&[]);
    let from_l1 = mixed.iter().filter(|c| l1.contains(c)).count();
    let from_l2 = mixed.iter().filter(|c| l2.contains(c)).count();
    let counts = [
        len(&e, true, "L1"),
        len(&e, true, "L2"),
        len(&e, false, "U1"),
        len(&e, false, "U2"),
        mixed.len(),
        from_l1,
        from_l2,
        len(&c, true, "L1"),
        len(&c, true, "L2"),
        len(&c, false, "U1"),
        len(&c, false, "U2"),
    ];
    check(
        counts == [90, 90, 30, 30, 90, 45, 45, 40, 40, 10, 10],
        format!(
            "Entity30 L {}/{} U {}/{} L1.5 {} ({}+{}); CIFAR100 L {}/{} U {}/{}; byte-stable",
            counts[0], counts[1], counts[2], counts[3], counts[4], counts[5], counts[6], counts[7], counts[8], counts[9],
            counts[10]
        ),
    )
}

fn bootstrap_stability() -> Outcome {
    let mix = MixtureSpec { num_classes: 5, dim: 16, separation: 4.0, per_class: 400, sigma: 1.0, seed: 11 };
    let (data, y) = gen_mixture(&mix).unwrap();
    let cfg = BootstrapConfig::new(10, 0);
    let r = parallel::bootstrap_leakage(&data, &y, &KernelSpec::gaussian_median(0), &cfg).unwrap();
    let b = r.bootstrap.unwrap();
    let ratio = b.std / b.mean;

    let flat = EmbeddingSet::new(200, 3, vec![0.25; 600]).unwrap();
    let fy = LabelVector::truth((0..200).map(|i| i % 4).collect()).unwrap();
    let spec = KernelSpec::fixed(KernelFamily::Gaussian, 1.0).unwrap();
    let c = parallel::bootstrap_leakage(&flat, &fy, &spec, &cfg).unwrap().bootstrap.unwrap();
    check(
        ratio < 0.05 && c.std == 0.0,
        format!("m = 2000, B = 10: std/mean = {ratio:.4}; constant data std = {:e}", c.std),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let (data, truth, pred, labels_out, acc_out, km_out, report_out) =
        (p("mix.tlk"), p("truth.csv"), p("pred.csv"), p("k.csv"), p("acc.json"), p("km.json"), p("r.json"));
    let synth = |out: &Path, threads: &str| {
        run_bin(&["synth", "--classes", "4", "--dim", "6", "--sep", "2", "--per-class", "60", "--seed", "3", "--out", s(out)], threads);
        std::fs::read(out).unwrap()
    };
    if synth(&data, "1") != synth(&data, "4") {
        return Err("synth: output differs".into());
    }
    let loaded = tleak::format::load_embeddings(&data).unwrap();
    let y = loaded.labels.unwrap();
    std::fs::write(&truth, tleak::format::encode_label_csv(&y)).unwrap();
    let shifted = LabelVector::truth(y.labels().iter().map(|&c| (c + 1) % 4).collect()).unwrap();
    std::fs::write(&pred, tleak::format::encode_label_csv(&shifted)).unwrap();

    let hierarchy = fixture("cifar100_hierarchy.json");
    let runs: Vec<(&str, Vec<&str>, Option<&Path>)> = vec![
        ("compute", vec!["compute", "--data", s(&data), "--no-timestamp"], None),
        ("compute --out", vec!["compute", "--data", s(&data), "--mode", "self", "--no-timestamp", "--out", s(&report_out)], Some(&report_out)),
        ("pseudo", vec!["pseudo", "--data", s(&data), "--k", "4", "--no-timestamp"], None),
        ("bootstrap", vec!["bootstrap", "--data", s(&data), "--replicates", "6", "--seed", "2", "--no-timestamp"], None),
        ("acc", vec!["acc", "--true", s(&truth), "--pred", s(&pred), "--out", s(&acc_out)], Some(&acc_out)),
        ("kmeans", vec!["kmeans", "--data", s(&data), "--k", "4", "--out", s(&km_out), "--labels-out", s(&labels_out)], Some(&km_out)),
        ("kmeans labels", vec!["kmeans", "--data", s(&data), "--k", "4", "--labels-out", s(&labels_out)], Some(&labels_out)),
        ("splits", vec!["splits", "--hierarchy", s(&hierarchy), "--half", "10", "--labeled", "4", "--unlabeled", "1", "--selection", "seeded", "--seed", "9", "--mixed"], None),
        ("sweep", vec!["sweep", "--seps", "0,1,3", "--classes", "3", "--dim", "4", "--per-class", "50"], None),
    ];
    for (name, args, file) in &runs {
        let grab = |threads: &str| {
            let out = run_bin(args, threads);
            let mut bytes = out.stdout;
            if let Some(f) = file {
                bytes.extend(std::fs::read(f).unwrap());
            }
            bytes
        };
        if grab("1") != grab("4") {
            return Err(format!("{name}: output differs between runs"));
        }
    }
    Ok(format!("{} subcommand runs byte-identical (1 vs 4 threads)", runs.len() + 1))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("mmd oracle equivalence", mmd_oracle),
        ("independent labels give near-zero leakage", independence),
        ("leakage bounded by 4 for unit kernels", kernel_bound),
        ("leakage and k-means accuracy monotone in separation", monotonicity),
        ("hungarian optimality", hungarian_optimality),
        ("clustering accuracy properties", accuracy_properties),
        ("split counts", split_counts),
        ("bootstrap stability", bootstrap_stability),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
