//! The `longtail-lab` binary end to end: exit codes, emitted files and
//! configuration round trips.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use longtail_lab::cli::{config_from_table, Mode, RunConfig, TABLE_HEADER};
use longtail_lab::datamodel::{read_dataset, ModelParams};
use longtail_lab::evaluator::sample_trial;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longtail-lab"))
        .args(args)
        .env_remove("LONGTAIL_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, cfg: &RunConfig) -> String {
    let path = dir.join("run.json");
    fs::write(&path, cfg.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bound_mode_reports_headline() {
    let o = lab(&["bound"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("ell = 7, error >= 0.98465"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(lab(&["nonsense"]).status.code(), Some(2));
    assert_eq!(lab(&["bound", "--ell", "10"]).status.code(), Some(2));
    assert_eq!(lab(&["bound", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(lab(&["experiment", "--features", "svm"]).status.code(), Some(2));
    assert_eq!(lab(&["bound", "--config", "/nonexistent/run.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"mode": "bound", "unknown": 1}"#).unwrap();
    assert_eq!(lab(&["bound", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    assert_eq!(lab(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing-dir").join("t.csv");
    let o = lab(&["bound", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn threads_env_is_a_fallback() {
    let o = Command::new(env!("CARGO_BIN_EXE_longtail-lab"))
        .args(["bound", "--dump-config"])
        .env("LONGTAIL_LAB_THREADS", "3")
        .output()
        .unwrap();
    let cfg = RunConfig::from_json(&stdout(&o)).unwrap();
    assert_eq!(cfg.threads, Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_longtail-lab"))
        .args(["bound", "--dump-config", "--threads", "2"])
        .env("LONGTAIL_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(RunConfig::from_json(&stdout(&o)).unwrap().threads, Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_longtail-lab"))
        .args(["bound"])
        .env("LONGTAIL_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dump_config_reparses_identically() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["experiment", "--seed", "17", "--n-star", "3", "--trials", "2", "--dump-config"]);
    assert_eq!(o.status.code(), Some(0));
    let dumped = stdout(&o);
    let cfg = RunConfig::from_json(&dumped).unwrap();
    assert_eq!((cfg.mode, cfg.seed, cfg.trials), (Mode::Experiment, 17, 2));
    let path = write_config(dir.path(), &cfg);
    let again = lab(&["experiment", "--config", &path, "--dump-config"]);
    assert_eq!(stdout(&again), dumped);
}

#[test]
fn experiment_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_mode(Mode::Experiment);
    cfg.params = ModelParams::new(5, 20, 4, 40, 4, 1).unwrap();
    cfg.features = "one-hot,optimal-perturbed,concept"
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    cfg.n_star = vec![1, 2];
    cfg.trials = 3;
    cfg.tests_per_category = 10;
    cfg.seed = 5;
    let path = write_config(dir.path(), &cfg);
    let csv = dir.path().join("table.csv");
    let o = lab(&["experiment", "--config", &path, "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], TABLE_HEADER);
    assert_eq!(rows.len(), 1 + 2 * 3);
    // tests counts every trial: 3 x 40 categories x 10
    assert!(rows[1].starts_with("nn-one-hot,1,4,3,1200,"));
    assert!(rows[4].starts_with("nn-one-hot,2,5,3,1200,"));
    assert!(rows[3].starts_with("nn-concept,1,4,3,1200,"));
    let rate = |row: &str| row.split(',').nth(5).unwrap().parse::<f64>().unwrap();
    assert!(rate(rows[3]) > rate(rows[2]) && rate(rows[2]) > rate(rows[1]));

    // the embedded config regenerates the same numbers
    let embedded = config_from_table(&text).unwrap();
    let path2 = write_config(dir.path(), &embedded);
    let csv2 = dir.path().join("again.csv");
    let o = lab(&["experiment", "--config", &path2, "--out", csv2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let strip = |t: &str| -> Vec<String> {
        t.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let text2 = fs::read_to_string(&csv2).unwrap();
    assert_eq!(strip(&text), strip(&text2));
}

#[test]
fn gen_data_matches_experiment_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_mode(Mode::GenData);
    cfg.params = ModelParams::new(4, 12, 3, 6, 3, 1).unwrap();
    cfg.trials = 2;
    cfg.tests_per_category = 2;
    cfg.seed = 8;
    let path = write_config(dir.path(), &cfg);
    let data = dir.path().join("data");
    let o = lab(&["gen-data", "--config", &path, "--out", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for t in 0..2 {
        let text = fs::read_to_string(data.join(format!("train-{t}.txt"))).unwrap();
        assert!(text.starts_with("# config: "));
        let (_, train, tests) = sample_trial(&cfg.params, 2, 8, t);
        assert_eq!(read_dataset(text.as_bytes()).unwrap(), train);
        let text = fs::read_to_string(data.join(format!("tests-{t}.txt"))).unwrap();
        let back = read_dataset(text.as_bytes()).unwrap();
        assert_eq!(back.len(), tests.len());
        for (row, test) in back.rows.iter().zip(&tests) {
            assert_eq!((row.category, &row.sentence), (test.category, &test.sentence));
        }
    }
}

#[test]
fn oracle_mode_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::for_mode(Mode::Oracle);
    cfg.oracle_trials = 20_000;
    let path = write_config(dir.path(), &cfg);
    let report = dir.path().join("oracle.json");
    let o = lab(&["oracle", "--config", &path, "--out", report.to_str().unwrap()]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.contains("PASS kstar-vs-direct"));
    assert!(fs::read_to_string(&report).unwrap().contains("\"passed\": true"));
}
