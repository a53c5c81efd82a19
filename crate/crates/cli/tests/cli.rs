use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ks-blowup")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_config(text: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.cfg"), text).unwrap();
    dir
}

const SMALL_EVOLVE: &str = "n = 512\nr_max = 200\nt_end = 1500\nsnapshot_every = 4\n";

#[test]
fn exact_mass_literal_is_accepted_and_echoed() {
    let dir = with_config("# critical mass\nmass = 25.132741228718345\nt0 = 1000\nt_end = 100\n");
    let o = run(dir.path(), &["evolve", "--config", "run.cfg"]);
    // The mass parses; the run is then refused because t_end < t0.
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("t_end"));
}

#[test]
fn range_violation_names_the_line() {
    let dir = with_config("\n# comment\neta0 = -1\n");
    let o = run(dir.path(), &["reduced-ode", "--config", "run.cfg"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3") && stderr(&o).contains("eta0"), "{}", stderr(&o));
}

#[test]
fn unknown_key_and_type_mismatch_are_config_errors() {
    let dir = with_config("l_max = 8\nwibble = 3\n");
    let o = run(dir.path(), &["spectrum", "--config", "run.cfg"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 2") && stderr(&o).contains("wibble"));

    let dir = with_config("n = many\n");
    let o = run(dir.path(), &["moments", "--config", "run.cfg"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 1") && stderr(&o).contains("integer"));
}

#[test]
fn empty_config_runs_on_echoed_defaults() {
    let dir = with_config("");
    let o = run(dir.path(), &["reduced-ode", "--config", "run.cfg", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("# t0 = 1.0000000000000000e3  (default)"));
    let report = fs::read_to_string(dir.path().join("o/report.txt")).unwrap();
    assert!(report.starts_with(&stdout));
    let csv = fs::read_to_string(dir.path().join("o/reduced.csv")).unwrap();
    assert!(csv.starts_with("t,alpha,eta,lambda,xi1,xi2,eta_logt\n"));
}

#[test]
fn unslaved_reduced_system_is_a_numerical_failure() {
    let dir = with_config("slaving = false\n");
    let o = run(dir.path(), &["reduced-ode", "--config", "run.cfg"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn evolve_writes_trajectory_and_snapshots_deterministically() {
    let dir = with_config(SMALL_EVOLVE);
    for out in ["a", "b"] {
        let o = run(dir.path(), &["evolve", "--config", "run.cfg", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    let traj = String::from_utf8(read("a/trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,lambda_est,alpha_est,second_moment,u_center\n"));
    let snap = String::from_utf8(read("a/snapshot_0000.csv")).unwrap();
    assert!(snap.starts_with("r,u,m\n"));
    // 17 significant digits in every field.
    let row = snap.lines().nth(2).unwrap();
    assert!(row.split(',').all(|f| f.split('e').next().unwrap().trim_start_matches('-').len() == 18), "{row}");
    for f in ["trajectory.csv", "snapshot_0000.csv", "snapshot_final.csv", "report.txt"] {
        assert_eq!(read(&format!("a/{f}")), read(&format!("b/{f}")), "{f} differs");
    }
}

#[test]
fn fit_rate_refuses_short_trajectories() {
    let dir = with_config(SMALL_EVOLVE);
    assert_eq!(code(&run(dir.path(), &["evolve", "--config", "run.cfg"])), 0);
    let full = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let short: Vec<&str> = full.lines().take(6).collect();
    fs::write(dir.path().join("short.csv"), short.join("\n") + "\n").unwrap();
    let o = run(dir.path(), &["fit-rate", "short.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("too few samples"), "{}", stderr(&o));
}

#[test]
fn ansatz_dump_tables() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["ansatz", "dump", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let head = |f: &str| fs::read_to_string(dir.path().join("o").join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(head("selfsim.csv"), "zeta,g0,zbar,g,h");
    assert_eq!(head("profile.csv"), "r,u1,u2,phi1");
}

#[test]
fn random_spectrum_follows_the_seed() {
    let dir = with_config("test = random\n");
    for (out, seed) in [("a", "3"), ("b", "3"), ("c", "4")] {
        let o = run(dir.path(), &["spectrum", "--config", "run.cfg", "--seed", seed, "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let read = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap();
    assert!(read("a/coefficients.csv").starts_with("l,k,coeff\n"));
    assert_eq!(read("a/coefficients.csv"), read("b/coefficients.csv"));
    assert_ne!(read("a/coefficients.csv"), read("c/coefficients.csv"));
    assert!(
        read("a/report.txt").contains("quadratic_form.planar")
            && read("a/report.txt").contains("quadratic_form.spectral")
    );
}

#[test]
fn inner_solve_outputs() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["inner-solve", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("o/inner.csv")).unwrap();
    assert!(csv.starts_with("y,phi,g,psi,residual\n"));
    let rep = fs::read_to_string(dir.path().join("o/inner_report.txt")).unwrap();
    for key in ["\"d_j\"", "\"fitted_decay\"", "\"phi_envelope\"", "\"h_envelope\""] {
        assert!(rep.contains(key), "{key}");
    }
}

#[test]
fn verify_all_report_is_ordered_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let one = run(dir.path(), &["verify-all", "--threads", "1", "--out", "one", "--seed", "11"]);
    let four = run(dir.path(), &["verify-all", "--threads", "4", "--out", "four", "--seed", "11"]);
    // The quadratic-form criterion fails against the literal constant.
    assert_eq!((code(&one), code(&four)), (3, 3));
    let a = fs::read_to_string(dir.path().join("one/report.txt")).unwrap();
    assert_eq!(a, fs::read_to_string(dir.path().join("four/report.txt")).unwrap());
    let summaries: Vec<&str> = a.lines().filter(|l| l.starts_with("# criterion")).collect();
    let ids: Vec<&str> = summaries.iter().map(|l| l[11..14].trim()).collect();
    assert_eq!(ids, ["1", "2", "3", "4", "5", "9", "10"]);
    for l in &summaries {
        assert_eq!(l.contains("FAIL"), l.contains("criterion  9"), "{l}");
    }
    for l in a.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<&str> = l.split(',').collect();
        assert_eq!(fields.len(), 5, "{l}");
        assert!(["PASS", "FAIL", "INFO"].contains(&fields[4]));
        assert_eq!(fields[4] == "FAIL", fields[0].starts_with("quadratic_form."), "{l}");
    }
    assert!(a.contains("quadratic_form.random_seed11,"));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["no-such-command"])), 1);
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}
