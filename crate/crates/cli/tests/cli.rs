use std::path::Path;
use std::process::{Command, Output};

fn noma_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noma-lab"))
        .current_dir(dir)
        .args(args)
        .env_remove("NOMA_WORKERS")
        .output()
        .unwrap()
}

fn field(stdout: &str, key: &str) -> Vec<f64> {
    let line = stdout
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{stdout}"));
    line.split_whitespace()
        .filter_map(|v| v.parse().ok())
        .collect()
}

#[test]
fn allocates_equal_rate_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = noma_lab(
        dir.path(),
        &["allocate", "--phi-a", "0.6", "--phi-b", "0.4", "--mu", "0"],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("order: B, A\n"), "{stdout}");
    let beta = field(&stdout, "beta")[0];
    assert!((beta - 0.632426).abs() < 1e-6, "{beta}");
    let want = 1.2205441169852742f64.log2();
    for r in field(&stdout, "rate") {
        assert!((r - want).abs() < 1e-12, "{r}");
    }
    assert!(stdout.contains("direct: noma"));
    assert!(out.stderr.is_empty());
}

#[test]
fn missing_mu_falls_back_with_a_notice() {
    let dir = tempfile::tempdir().unwrap();
    let out = noma_lab(
        dir.path(),
        &["allocate", "--phi-a", "0.6", "--phi-b", "0.4"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu not given, using 0.1"));
    assert_eq!(
        field(&String::from_utf8_lossy(&out.stdout), "mu"),
        vec![0.1]
    );
}

#[test]
fn tied_pair_at_full_residual_gives_all_power_to_one_user() {
    let dir = tempfile::tempdir().unwrap();
    let out = noma_lab(
        dir.path(),
        &[
            "allocate",
            "--phi-a",
            "0.5",
            "--phi-b",
            "0.5",
            "--mu",
            "1",
            "--objective",
            "max-sum-rate",
        ],
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(field(&stdout, "beta"), vec![1.0]);
    assert!(stdout.contains("(tie)"));
}

#[test]
fn allocates_from_link_geometry() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("pair.toml"),
        "[allocate]\nmu = 0.1\n\
         [allocate.link_a]\nserving_distance = 30.0\ninterferer_distances = [90.0, 120.0, 200.0]\nepsilon = 0.01\nalpha = 4.0\n\
         [allocate.link_b]\nserving_distance = 50.0\ninterferer_distances = [80.0, 150.0]\nepsilon = 0.01\nalpha = 4.0\n",
    )
    .unwrap();
    let out = noma_lab(
        dir.path(),
        &["--config", "pair.toml", "allocate", "--out", "res"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("res/allocation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(dir.path().join("res/manifest.toml").exists());
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        noma_lab(dir.path(), &["figure", "--figure", "11"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(noma_lab(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        noma_lab(dir.path(), &["allocate", "--phi-a", "0.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(noma_lab(dir.path(), &["--help"]).status.code(), Some(0));
    std::fs::write(dir.path().join("bad.toml"), "[sweep]\nrunz = 3\n").unwrap();
    assert_eq!(
        noma_lab(dir.path(), &["--config", "bad.toml", "sweep"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn manifest_reproduces_sweep_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.toml"),
        "[sweep]\nmu_grid = [0.0, 0.5]\nlambda_grid = [1e-4, 2e-4]\n",
    )
    .unwrap();
    let first = noma_lab(
        dir.path(),
        &[
            "--config",
            "sweep.toml",
            "--runs",
            "150",
            "--seed",
            "9",
            "sweep",
            "--out",
            "a",
        ],
    );
    assert!(first.status.success());
    let again = noma_lab(
        dir.path(),
        &["--config", "a/manifest.toml", "sweep", "--out", "b"],
    );
    assert!(again.status.success());
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/sweep.csv"), read("b/sweep.csv"));
    assert_eq!(read("a/manifest.toml"), read("b/manifest.toml"));
    let manifest = String::from_utf8(read("a/manifest.toml")).unwrap();
    assert!(manifest.contains("runs = 150") && manifest.contains("seed = 9"));
    // 2 lambda x 2 mu x 2 objectives x 4 schemes
    assert_eq!(
        String::from_utf8(read("a/sweep.csv"))
            .unwrap()
            .lines()
            .count(),
        2 + 32
    );
}

#[test]
fn figures_are_deterministic_and_worker_count_free() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, workers: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_noma-lab"))
            .current_dir(dir.path())
            .env("NOMA_WORKERS", workers)
            .args([
                "--runs", "200", "-q", "figure", "--figure", "2b,6", "--out", out,
            ])
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("one", "1");
    run("four", "4");
    for name in ["fig-2b.csv", "fig-6.csv"] {
        let a = std::fs::read(dir.path().join("one").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("four").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn figure_2b_has_both_analytic_columns_and_a_sampled_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = noma_lab(
        dir.path(),
        &[
            "--runs", "100", "figure", "--figure", "fig-2b", "--out", "f",
        ],
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("f/fig-2b.csv")).unwrap();
    let mut lines = csv.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,theta_db,F_analytic,F_closed,F_mc,ci"
    );
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(
            (0.0..=1.0).contains(&v[2])
                && (0.0..=1.0).contains(&v[3])
                && (0.0..=1.0).contains(&v[4])
        );
        // the closed form never exceeds the exact value
        assert!(v[3] <= v[2] + 1e-6, "{line}");
    }
}

#[test]
fn cdf_without_sampling_leaves_sampled_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[cdf]\nbeta = 0.8\nuser = 1\nruns = 0\npoints = 11\n",
    )
    .unwrap();
    let out = noma_lab(dir.path(), &["--config", "c.toml", "cdf", "--out", "c"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("c/cdf.csv")).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.ends_with(",,")));
    // theta = 10 dB is beyond P2 / residual for the second user
    assert!(rows[10].contains("unreachable"));
}
