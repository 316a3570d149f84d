use std::fs;

use augtest::harness::{run_sweep, write_summary_csv, write_trials_csv, Algorithm, SweepConfig};
use augtest::io::{load_dist, save_dist};
use augtest::Distribution;

fn halves(n: usize, first: bool) -> Distribution {
    let h = n / 2;
    Distribution::new(
        (0..n)
            .map(|i| {
                if (i < h) == first {
                    1.0 / h as f64
                } else {
                    0.0
                }
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn sweep_from_relative_file_paths() {
    let dir = tempfile::tempdir().unwrap();
    save_dist(&halves(200, true), dir.path().join("p.dist")).unwrap();
    save_dist(&halves(200, false), dir.path().join("q.dist")).unwrap();
    assert_eq!(
        load_dist(dir.path().join("p.dist")).unwrap(),
        halves(200, true)
    );
    let cfg_path = dir.path().join("sweep.json");
    fs::write(
        &cfg_path,
        r#"{
            "instance": {"kind": "files", "p": "p.dist", "q": "q.dist"},
            "budgets": [50, 400],
            "trials": 20,
            "eps": 0.5,
            "alpha": 0.01,
            "seed": 3
        }"#,
    )
    .unwrap();

    let cfg = SweepConfig::load(&cfg_path).unwrap();
    let out = run_sweep(&cfg).unwrap();
    assert_eq!(out.trials.len(), 2 * 3 * 2 * 20);
    assert_eq!(out.summary.len(), 2 * 3);
    assert_eq!(run_sweep(&cfg).unwrap().trials, out.trials);

    // Disjoint supports are trivially separated by every `T`-based tester.
    for row in &out.summary {
        if row.algorithm != Algorithm::Crs15 && row.budget == 400 {
            assert_eq!(row.error, Some(0.0), "{row:?}");
        }
    }

    let mut buf = Vec::new();
    write_summary_csv(&out.summary, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("budget,algorithm,threshold,error,inaccurate_rate\n"));
    let mut buf = Vec::new();
    write_trials_csv(&out.trials, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 241);
}

#[test]
fn config_errors() {
    assert!(SweepConfig::from_json(r#"{"instance": {"kind": "hard_closeness", "n": 100}, "budgets": [10], "eps": 0.5, "alpha": 0.1, "seed": 1, "extra": 1}"#).is_err());
    assert!(SweepConfig::from_json(
        r#"{"instance": {"kind": "hard_closeness", "n": 100}, "budgets": [20, 10], "eps": 0.5, "alpha": 0.1, "seed": 1}"#,
    )
    .is_err());
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("sweep.json");
    fs::write(
        &missing,
        r#"{"instance": {"kind": "files", "p": "nope.dist", "q": "nope.dist"}, "budgets": [10], "eps": 0.5, "alpha": 0.1, "seed": 1}"#,
    )
    .unwrap();
    assert!(run_sweep(&SweepConfig::load(&missing).unwrap()).is_err());
}
