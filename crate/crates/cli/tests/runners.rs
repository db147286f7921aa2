mod common;

use std::collections::BTreeMap;
use std::process::Command;

use common::{config, record_diff};
use gaplab::bounds::KAWASAKI;
use gaplab_cli::output::{read_records, CACHE_DIR, RECORDS_FILE, SUMMARY_FILE};
use gaplab_cli::{run_gap_and_bounds, run_point, run_scaling, run_sweep, run_verify, ExperimentConfig, RunOptions, Task};

const KAWASAKI_6_3: &str = r#"
tasks = ["verify", "gap", "bounds"]
seed = 3

[model]
kind = "kawasaki-complete"
geometry = { kind = "complete", sites = 6 }
potential = "nn"
beta = 0.1
particles = 3

[potentials.nn]
kind = "nearest-neighbour"
coupling = 0.1
geometry = { kind = "segment", length = 6 }
"#;

fn quiet() -> RunOptions {
    RunOptions {
        out_dir: None,
        workers: 2,
    }
}

fn with(text: &str, edit: impl FnOnce(&mut ExperimentConfig)) -> ExperimentConfig {
    let mut c = config(text);
    edit(&mut c);
    c
}

#[test]
fn parse_errors_name_line_and_field() {
    let err = ExperimentConfig::from_toml_str("tasks = [\"gap\"]\n[model]\nkind = \"kawasaki-complete\"\nbeta = \"hot\"\n")
        .unwrap_err()
        .to_string();
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("beta"), "{err}");
    let err = ExperimentConfig::from_toml_str(&KAWASAKI_6_3.replace("beta = 0.1", "betta = 0.1"))
        .unwrap_err()
        .to_string();
    assert!(err.contains("betta"), "{err}");
}

#[test]
fn validation_errors() {
    let c = with(KAWASAKI_6_3, |c| c.tasks.clear());
    assert!(c.validate().unwrap_err().to_string().starts_with("tasks"));
    assert!(run_verify(&c, &quiet()).is_err());

    let c = with(KAWASAKI_6_3, |c| c.model.potential = Some("missing".into()));
    assert!(c.validate().unwrap_err().to_string().contains("'missing'"));

    let c = with(KAWASAKI_6_3, |c| c.seed = None);
    assert!(c.validate().unwrap_err().to_string().starts_with("seed"));

    let c = with(KAWASAKI_6_3, |c| c.sweep.beta = Some(vec![]));
    assert!(c.validate().unwrap_err().to_string().contains("sweep.beta"));

    let c = with(KAWASAKI_6_3, |c| {
        c.sweep.mode = gaplab_cli::config::GridMode::Zip;
        c.sweep.beta = Some(vec![0.0, 0.1]);
        c.sweep.particles = Some(vec![2]);
    });
    assert!(c.validate().unwrap_err().to_string().contains("equal lengths"));

    let c = with(KAWASAKI_6_3, |c| c.tasks = vec![Task::Sweep]);
    assert!(c.validate().unwrap_err().to_string().starts_with("sweep"));

    let c = with(KAWASAKI_6_3, |c| c.tasks = vec![Task::Gap]);
    assert!(run_verify(&c, &quiet()).unwrap_err().to_string().contains("verify task"));
}

#[test]
fn verify_kawasaki_residuals() {
    let r = run_verify(&config(KAWASAKI_6_3), &quiet()).unwrap();
    assert!(r.passed, "{:?}", r.checks);
    let res = &r.residuals;
    for v in [res.a2, res.a3, res.a4, res.bochner_identity, res.corollary1, res.detailed_balance] {
        assert!(v.unwrap() <= 1e-10);
    }
    assert!(res.bakry_emery_violation.unwrap() <= 1e-8);
}

/// A move with positive rate from the first state to another one.
fn live_label() -> usize {
    let base = config(KAWASAKI_6_3);
    let gen = gaplab_cli::model::build(&base.resolve(&BTreeMap::new(), &[Task::Verify]).unwrap()).unwrap();
    (0..gen.n_labels()).find(|&l| gen.rate(0, l) > 0.0 && gen.target(0, l).is_some_and(|t| t != 0))
        .unwrap()
}

#[test]
fn corrupted_rate_fails_verification() {
    let label = live_label();
    let c = with(KAWASAKI_6_3, |c| {
        c.model.fault = Some(gaplab_cli::config::Fault {
            state: 0,
            label,
            factor: 1.5,
        })
    });
    let r = run_verify(&c, &quiet()).unwrap();
    assert!(!r.passed);
    assert!(r.residuals.detailed_balance.unwrap() > 0.1, "{:?} {:?}", r.residuals, r.notes);
    assert!(r.failed_checks().any(|c| c.name == "detailed-balance"));
}

#[test]
fn infinite_temperature_kawasaki_is_tight() {
    let c = with(KAWASAKI_6_3, |c| c.model.beta = 0.0);
    let r = run_gap_and_bounds(&c, &quiet()).unwrap();
    assert!(r.passed);
    assert!((r.gap_value().unwrap() - 1.0).abs() < 1e-10);
    assert!((r.certified.as_ref().unwrap().bound - 1.0).abs() < 1e-8);
    assert!((r.bound(KAWASAKI).unwrap().value - 1.0).abs() < 1e-15);
}

#[test]
fn vacuous_bound_is_flagged_not_asserted() {
    let c = with(&KAWASAKI_6_3.replace("coupling = 0.1", "coupling = 2.0"), |c| c.model.beta = 1.0);
    let r = run_gap_and_bounds(&c, &quiet()).unwrap();
    let k = r.bound(KAWASAKI).unwrap();
    assert!(k.vacuous && k.value < 0.0);
    assert!(!r.checks.iter().any(|c| c.name.starts_with(KAWASAKI)));
    assert!(r.passed);
}

#[test]
fn zero_range_ordering_holds() {
    let text = r#"
tasks = ["gap", "bounds"]
[model]
kind = "zero-range"
geometry = { kind = "torus", length = 4, dimension = 1 }
potential = "q"
particles = 4
[potentials.q]
kind = "quadratic"
diagonal = 0.5
off_diagonal = 0.05
"#;
    let r = run_gap_and_bounds(&config(text), &quiet()).unwrap();
    assert!(r.passed, "{:?}", r.checks);
    for name in ["zr-uniform <= zr-pointwise", "zr-pointwise <= cobound", "cobound <= teom", "teom <= gap"] {
        assert!(r.checks.iter().any(|c| c.name == name), "missing {name}");
    }
}

#[test]
fn beta_sweep_bound_monotone_and_below_gap() {
    let c = with(KAWASAKI_6_3, |c| {
        c.tasks = vec![Task::Sweep];
        c.sweep.beta = Some((0..=10).map(|k| 0.02 * k as f64).collect());
    });
    let records = run_sweep(&c, &quiet()).unwrap();
    assert_eq!(records.len(), 11);
    let bounds: Vec<f64> = records.iter().map(|r| r.bound(KAWASAKI).unwrap().value).collect();
    assert!(bounds.windows(2).all(|w| w[1] <= w[0]));
    for r in &records {
        assert!(r.passed);
        assert!(r.gap_value().unwrap() >= r.bound(KAWASAKI).unwrap().value - 1e-12);
    }
}

#[test]
fn truncation_sweep_converges() {
    let text = r#"
tasks = ["sweep"]
[model]
kind = "glauber"
geometry = { kind = "complete", sites = 1 }
lambda = 1.0
[sweep]
cap = [4, 8, 12, 16]
"#;
    let gaps: Vec<f64> = run_sweep(&config(text), &quiet())
        .unwrap()
        .iter()
        .map(|r| r.gap_value().unwrap())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
    assert!((gaps[3] - 1.0).abs() < 1e-6);
}

#[test]
fn budget_refusal_reports_estimate() {
    let c = with(KAWASAKI_6_3, |c| {
        c.tasks = vec![Task::Sweep];
        c.sweep.particles = Some(vec![1, 2, 3]);
        c.sweep.max_total_states = 30;
    });
    let err = run_sweep(&c, &quiet()).unwrap_err().to_string();
    assert!(err.contains("estimated 41 states"), "{err}");
}

#[test]
fn single_length_scaling_is_degenerate() {
    let text = r#"
tasks = ["scaling"]
[model]
kind = "kawasaki-nn"
geometry = { kind = "segment", length = 4 }
particle_fraction = 0.5
[sweep]
size = [6]
"#;
    let (records, s) = run_scaling(&config(text), &quiet()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(s.min_gap_diam2, s.max_gap_diam2);
    assert_eq!(s.ratio, 1.0);
    let sc = records[0].scaling.as_ref().unwrap();
    assert_eq!((sc.length, sc.diameter), (6, 5.0));
}

#[test]
fn hash_identifies_inputs() {
    let c = config(KAWASAKI_6_3);
    let a = c.resolve(&BTreeMap::new(), &[Task::Gap]).unwrap();
    assert_eq!(a.hash(), c.resolve(&BTreeMap::new(), &[Task::Gap]).unwrap().hash());
    let other = with(KAWASAKI_6_3, |c| c.seed = Some(4));
    assert_ne!(a.hash(), other.resolve(&BTreeMap::new(), &[Task::Gap]).unwrap().hash());
}

#[test]
fn cache_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        workers: 3,
    };
    let c = with(KAWASAKI_6_3, |c| {
        c.tasks = vec![Task::Sweep, Task::Gap, Task::Bounds];
        c.sweep.beta = Some(vec![0.0, 0.05, 0.1]);
    });
    let first = run_sweep(&c, &opts).unwrap();
    assert_eq!(std::fs::read_dir(dir.path().join(CACHE_DIR)).unwrap().count(), 3);
    let second = run_sweep(&c, &opts).unwrap();
    // cache hits are returned verbatim, timings included
    assert_eq!(first, second);
    let stream = read_records(&dir.path().join(RECORDS_FILE)).unwrap();
    assert_eq!(stream.len(), 6);
    assert_eq!(stream[..3], first[..]);

    let tasks = c.point_tasks();
    for (pt, cached) in c.points().iter().zip(&first) {
        let fresh = run_point(&c.resolve(pt, &tasks).unwrap()).unwrap();
        assert!(record_diff(&fresh, cached).unwrap() <= 1e-12);
    }

    let mut rd = csv::Reader::from_path(dir.path().join(SUMMARY_FILE)).unwrap();
    let header = rd.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "gap").unwrap();
    for (row, r) in rd.records().zip(&first) {
        let v: f64 = row.unwrap()[col].parse().unwrap();
        assert_eq!(v.to_bits(), r.gap_value().unwrap().to_bits());
    }
}

#[test]
fn binary_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(&good, KAWASAKI_6_3).unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        format!("{KAWASAKI_6_3}\n[model.fault]\nstate = 0\nlabel = {}\nfactor = 2.0\n", live_label()),
    )
    .unwrap();
    let empty = dir.path().join("empty.toml");
    std::fs::write(&empty, KAWASAKI_6_3.replace("tasks = [\"verify\", \"gap\", \"bounds\"]", "tasks = []")).unwrap();
    let run = |sub: &str, cfg: &std::path::Path, extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_gaplab"))
            .arg(sub)
            .arg("--config")
            .arg(cfg)
            .arg("--out")
            .arg(dir.path().join("out"))
            .args(extra)
            .output()
            .unwrap()
    };
    let ok = run("verify", &good, &["--workers", "2", "--seed", "11"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("PASS"));
    assert_eq!(run("gap", &good, &[]).status.code(), Some(0));
    assert_eq!(run("verify", &bad, &[]).status.code(), Some(1));
    let e = run("verify", &empty, &[]);
    assert_eq!(e.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&e.stderr).contains("tasks"));
    assert_eq!(run("sweep", &good, &[]).status.code(), Some(2));
}
