use rotopump::cli::{csv, execute, load_params, plot_data, resolve_threads, verify_table, Command, Manifest, RunConfig};
use rotopump::Error;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

const SMALL_SIMULATE: &str = "\
# short ensembles for the harness
seed = 3
gamma_d_hz = 5e5
gamma_o_hz = 1e6
gamma_l_values_hz = 0, 5e5
rotor_constant_rad_s = 10
dt_s = 1.6e-8
t_total_s = 4e-6
snapshot_stride = 25
trajectories = 4
init_sigma = 1
fit_start_s = 1e-6
fit_end_s = 4e-6
";

fn params_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../params")
}

fn write_params(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.params");
    std::fs::write(&p, text).unwrap();
    p
}

fn config(command: Command, params: PathBuf, out: PathBuf) -> RunConfig {
    RunConfig { command, params, out, seed: None, threads: Some(1), overrides: Vec::new() }
}

fn hashes(m: &Manifest) -> BTreeMap<String, String> {
    m.outputs.iter().map(|o| (o.name.clone(), o.sha256.clone())).collect()
}

#[test]
fn every_command_runs_on_shipped_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    for (cmd, file) in [
        (Command::Rates, "rates.params"),
        (Command::Phonon, "phonon.params"),
        (Command::Sweep, "sweep.params"),
        (Command::Design, "design.params"),
        (Command::Verify, "verify.params"),
    ] {
        let out = tmp.path().join(cmd.to_string());
        let m = execute(&config(cmd, params_dir().join(file), out.clone())).unwrap();
        assert_eq!(m.command, cmd);
        assert!(out.join("manifest.json").exists());
        for o in &m.outputs {
            assert!(out.join(&o.name).exists(), "{}", o.name);
        }
    }
    let table = verify_table(&tmp.path().join("verify")).unwrap();
    assert!(table.lines().count() >= 10);
    assert!(!table.contains("FAIL"));
}

#[test]
fn simulate_writes_series_and_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_params(tmp.path(), SMALL_SIMULATE);
    let out = tmp.path().join("sim");
    let m = execute(&config(Command::Simulate, p, out.clone())).unwrap();
    let names: Vec<&str> = m.outputs.iter().map(|o| o.name.as_str()).collect();
    for expected in ["series_0.csv", "series_1.csv", "simulate.json", "lz_gamma_l_0.dat"] {
        assert!(names.contains(&expected), "{names:?}");
    }
    let series = std::fs::read_to_string(out.join("series_0.csv")).unwrap();
    assert!(series.starts_with("t_s,mean_lz_hbar,var_lz_hbar2,e_rot_J"));
    assert_eq!(series.lines().count(), 1 + 250 / 25 + 1);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    assert!(report.is_object());
}

#[test]
fn outputs_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_params(tmp.path(), SMALL_SIMULATE);
    let one = execute(&RunConfig { threads: Some(1), ..config(Command::Simulate, p.clone(), tmp.path().join("t1")) }).unwrap();
    let three = execute(&RunConfig { threads: Some(3), ..config(Command::Simulate, p, tmp.path().join("t3")) }).unwrap();
    assert_eq!(hashes(&one), hashes(&three));
    assert_eq!(one.threads, 1);
    assert_eq!(three.threads, 3);
    let a = std::fs::read(tmp.path().join("t1/series_1.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("t3/series_1.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn seed_changes_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_params(tmp.path(), SMALL_SIMULATE);
    let a = execute(&config(Command::Simulate, p.clone(), tmp.path().join("a"))).unwrap();
    let b = execute(&RunConfig { seed: Some(99), ..config(Command::Simulate, p, tmp.path().join("b")) }).unwrap();
    assert_eq!(b.seed, 99);
    assert_ne!(hashes(&a)["series_0.csv"], hashes(&b)["series_0.csv"]);
}

#[test]
fn manifest_text_replays_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_params(tmp.path(), SMALL_SIMULATE);
    let first = execute(&RunConfig {
        seed: Some(21),
        overrides: vec!["trajectories=2".into()],
        ..config(Command::Simulate, p, tmp.path().join("first"))
    })
    .unwrap();
    let replay_file = tmp.path().join("replay.params");
    std::fs::write(&replay_file, &first.config_text).unwrap();
    let second = execute(&config(Command::Simulate, replay_file, tmp.path().join("second"))).unwrap();
    assert_eq!(first.config_sha256, second.config_sha256);
    assert_eq!(hashes(&first), hashes(&second));
    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("first/manifest.json")).unwrap()).unwrap();
    assert_eq!(on_disk["config_sha256"], first.config_sha256);
    assert_eq!(on_disk["seed"], 21);
}

#[test]
fn overrides_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_params(tmp.path(), SMALL_SIMULATE);
    let cfg = RunConfig { overrides: vec!["gamma_o_hz=2e6".into()], ..config(Command::Simulate, p.clone(), tmp.path().into()) };
    assert_eq!(load_params(&cfg).unwrap().f64_or("gamma_o_hz", 0.0).unwrap(), 2e6);
    let bad = RunConfig { overrides: vec!["no_such_key=1".into()], ..cfg.clone() };
    assert!(matches!(execute(&bad), Err(Error::Config(_))));
    let bad = RunConfig { overrides: vec!["gamma_o_hz".into()], ..cfg.clone() };
    assert!(matches!(execute(&bad), Err(Error::Parse(_))));
    assert!(matches!(resolve_threads(Some(0)), Err(Error::Config(_))));
    assert_eq!(resolve_threads(Some(2)).unwrap(), 2);
}

#[test]
fn manifest_written_on_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write_params(tmp.path(), "rotor_constant_rad_s = 10\ndt_s = 1\ntrajectories = 2\n");
    let out = tmp.path().join("fail");
    assert!(execute(&config(Command::Simulate, p, out.clone())).is_err());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn text_helpers() {
    assert_eq!(csv(&["a", "b"], vec![vec![1.0, 2.5e-3]]), "a,b\n1e0,2.5e-3\n");
    let dat = plot_data(&["torque versus pump".to_string()], vec![(1.0, 2.0)]);
    assert!(dat.starts_with("# torque versus pump\n"));
    assert_eq!(dat.lines().count(), 2);
}

fn binary(args: &[&str]) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_rotopump")).args(args).env_remove("ROTOPUMP_THREADS").output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    let verify = params_dir().join("verify.params");
    let ok = binary(&["verify", "--params", verify.to_str().unwrap(), "--out", out, "--threads", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));

    let unknown = tmp.path().join("unknown.params");
    std::fs::write(&unknown, "bogus_key = 1\n").unwrap();
    let r = binary(&["rates", "--params", unknown.to_str().unwrap(), "--out", out]);
    assert_eq!(r.status.code(), Some(3));

    let malformed = tmp.path().join("malformed.params");
    std::fs::write(&malformed, "gamma_o_hz 1e5\n").unwrap();
    let r = binary(&["rates", "--params", malformed.to_str().unwrap(), "--out", out]);
    assert_eq!(r.status.code(), Some(2));

    let missing = tmp.path().join("absent.params");
    let r = binary(&["rates", "--params", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(r.status.code(), Some(8));

    let r = binary(&["rates", "--params", verify.to_str().unwrap(), "--out", out, "--threads", "0"]);
    assert_eq!(r.status.code(), Some(3));
}
