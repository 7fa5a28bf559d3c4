use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use diffusense::config::ScenarioFile;
use diffusense::covariance::estimate_covariance;
use diffusense::estimators::{profile, Estimator};
use diffusense::field_sim::synthesize;
use diffusense::io::read_signal_file;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diffusense"));
    cmd.env_remove("DIFFUSENSE_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SINGLE: &str = r#"
order = 3
beta = 0.5
samples = 4096
seed = 3

[[sources]]
azimuth_deg = 30.0
elevation_deg = 20.0
"#;

/// Parses analysis CSV rows into (header, rows of numbers).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn simulate_writes_block_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "order = 2\nbeta = 0.0\nsamples = 300\n[[sources]]\nazimuth_deg = 0.0\nelevation_deg = 0.0\n");
    let out = dir.path().join("block.raw");
    let o = run(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let signal = read_signal_file(&out).unwrap();
    assert_eq!((signal.channels, signal.samples), (9, 300));
    let c = estimate_covariance(&signal.into_block(2).unwrap());
    let values = diffusense::covariance::eigenvalues(&c).unwrap();
    assert!(
        values.values()[1] <= 1e-12 * values.values()[0],
        "rank-1 content"
    );

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("block.raw.json")).unwrap())
            .unwrap();
    assert_eq!(meta["order"], 2);
    assert_eq!(meta["channel_order"], "ACN");
    assert_eq!(meta["normalization"], "N3D");
    assert_eq!(meta["noise_power"], 0.0);
    assert!(meta["generator"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn simulate_rejects_out_of_range_beta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        &SINGLE.replace("beta = 0.5", "beta = 1.2"),
    );
    let o = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("x.raw")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("beta"), "{}", stderr(&o));
    assert!(!dir.path().join("x.raw").exists());
}

#[test]
fn simulate_reports_unknown_keys_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "order = 1\nbeta = 0.0\nsamples = 8\nsamplez = 3\n",
    );
    let o = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("x.raw")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("samplez") && err.contains("line 4"), "{err}");
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SINGLE);
    let (a, b) = (dir.path().join("a.raw"), dir.path().join("b.raw"));
    for out in [&a, &b] {
        assert!(run(&["simulate", "--config", s(&cfg), "--out", s(out)])
            .status
            .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = dir.path().join("c.raw");
    assert!(run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&c),
        "--seed",
        "4"
    ])
    .status
    .success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn io_failures_have_their_own_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SINGLE);
    let missing = dir.path().join("nope.toml");
    let o = run(&[
        "simulate",
        "--config",
        s(&missing),
        "--out",
        s(&dir.path().join("x.raw")),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("no/such/dir/x.raw")),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["analyze", s(&missing)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--config", "a.toml"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--config", "a", "--out", "b", "--format", "flac"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["analyze", "x.raw", "--estimators", "music"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn default_sweep_writes_nine_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.toml", "experiment = \"sweep\"\n");
    let out = dir.path().join("out");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for est in ["comedie", "dirac", "thiele_gover"] {
        for l in 1..=3 {
            let text = std::fs::read_to_string(out.join(format!("{est}_L{l}.csv"))).unwrap();
            let lines: Vec<&str> = text.lines().collect();
            assert_eq!(lines.len(), 22, "{est} L{l}: header plus 21 beta rows");
            assert_eq!(lines[0].split(',').count(), 37);
        }
    }
    let long = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(long.lines().count(), 1 + 3 * 3 * 36 * 21);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seeds"], 10);
    assert_eq!(meta["base_seed"], 0);
}

#[test]
fn sweep_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "experiment = \"sweep\"\norders = [1, 2]\nq_values = [1, 3, 6]\nbeta_values = [0.0, 0.5]\nseeds = 2\nsamples = 128\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&["sweep", "--config", s(&cfg), "--out", s(&a)])
        .status
        .success());
    let o = bin()
        .args(["sweep", "--config", s(&cfg), "--out", s(&b)])
        .env("DIFFUSENSE_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(
        std::fs::read(a.join("sweep.csv")).unwrap(),
        std::fs::read(b.join("sweep.csv")).unwrap()
    );
    let o = bin()
        .args(["sweep", "--config", s(&cfg), "--out", s(&b)])
        .env("DIFFUSENSE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transition_sweep_writes_l_by_q_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.toml",
        "experiment = \"transition\"\norders = [1, 2, 3]\nq_values = [1, 4, 16, 36]\nseeds = 2\n",
    );
    let out = dir.path().join("t");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(out.join("transition_matrix.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "L,1,4,16,36");
    assert_eq!(lines.len(), 4);
    assert!(out.join("transition.csv").exists());
    assert!(out.join("metadata.json").exists());
}

#[test]
fn empty_axis_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "experiment = \"sweep\"\nq_values = []\n",
    );
    let o = run(&[
        "sweep",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("q_values"));
}

#[test]
fn analyze_single_source_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SINGLE);
    let raw = dir.path().join("a.raw");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&raw)])
        .status
        .success());
    let o = run(&["analyze", s(&raw), "--order", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = parse_csv(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(
        &header[..5],
        ["frame", "time_s", "comedie_d1", "comedie_d2", "comedie_d3"]
    );
    assert_eq!(header.len(), 5 + 16);
    assert_eq!(rows.len(), 1);
    for d in &rows[0][2..5] {
        assert!((d - 0.5).abs() <= 0.05, "{d}");
    }
}

#[test]
fn analyze_pure_noise_is_diffuse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "n.toml",
        "order = 3\nbeta = 1.0\nsamples = 1024\ndiffuse_only = true\n",
    );
    let raw = dir.path().join("n.raw");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&raw)])
        .status
        .success());
    let csv_path = dir.path().join("n.csv");
    let o = run(&[
        "analyze",
        s(&raw),
        "--estimators",
        "comedie,dirac,thiele_gover",
        "--out",
        s(&csv_path),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = parse_csv(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(header.len(), 2 + 3 * 3 + 16);
    for v in &rows[0][2..11] {
        assert!(*v >= 0.9, "{header:?} {:?}", rows[0]);
    }
}

#[test]
fn analyze_frames_tile_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        &SINGLE.replace("samples = 4096", "samples = 1000"),
    );
    let raw = dir.path().join("a.raw");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&raw)])
        .status
        .success());
    let o = run(&["analyze", s(&raw), "--frame-len", "256", "--hop", "128"]);
    let (_, rows) = parse_csv(&String::from_utf8(o.stdout).unwrap());
    // starts 0, 128, ..., 640 (the last frame ending at or before sample 1000)
    assert_eq!(rows.len(), 6);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], k as f64);
        assert!((row[1] - (128 * k) as f64 / 48_000.0).abs() < 1e-12);
    }
    let o = run(&["analyze", s(&raw), "--frame-len", "5000"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("exceeds"), "{}", stderr(&o));
    let (_, rows) = parse_csv(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 1);
}

#[test]
fn analyze_rejects_channel_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        &SINGLE.replace("order = 3", "order = 1"),
    );
    let raw = dir.path().join("four.raw");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&raw)])
        .status
        .success());
    let o = run(&["analyze", s(&raw), "--order", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("16"), "{}", stderr(&o));
}

fn round_trip(ext: &str, tolerance: f64) {
    let dir = tempfile::tempdir().unwrap();
    let text = SINGLE.replace("beta = 0.5", "beta = 0.3");
    let cfg = write(dir.path(), "s.toml", &text);
    let file = dir.path().join(format!("rt.{ext}"));
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&file)])
        .status
        .success());
    let o = run(&[
        "analyze",
        s(&file),
        "--estimators",
        "comedie,dirac,thiele_gover",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = parse_csv(&String::from_utf8(o.stdout).unwrap());

    let scenario = ScenarioFile::parse(&text).unwrap().to_scenario().unwrap();
    let c = estimate_covariance(&synthesize(&scenario).unwrap());
    let direct: Vec<f64> = Estimator::ALL
        .iter()
        .flat_map(|&e| profile(&c, e).unwrap().values)
        .collect();
    for (a, b) in rows[0][2..11].iter().zip(&direct) {
        assert!((a - b).abs() <= tolerance, "{ext}: {a} vs {b}");
    }
}

#[test]
fn raw_round_trip_matches_in_process() {
    round_trip("raw", 1e-9);
}

#[test]
fn wav_round_trip_within_float_precision() {
    round_trip("wav", 1e-6);
}
