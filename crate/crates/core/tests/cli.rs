use std::path::Path;
use std::process::{Command, Output};

fn nlvoter(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlvoter")).args(args).arg("--out").arg(out).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvoter(&["sweep", "--topology", "lattice:L=10", "--alpha", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn pattern_needs_a_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvoter(&["pattern", "--topology", "ba:N=1000,m=2", "--alpha", "1.1", "--seed", "1"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("lattice"));
}

#[test]
fn unknown_flag_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvoter(&["sweep", "--topology", "lattice:L=10", "--alpha", "1.5", "--seed", "1", "--bogus"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn sweep_writes_table_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvoter(
        &["sweep", "--topology", "lattice:L=8", "--alpha", "1.0:2.0:0.5", "--runs", "6", "--seed", "42"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("# config: {"));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,mean_Tc,se_Tc,censored_frac,runs");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1.00000000,"));
    assert!(lines[3].ends_with(",6"));
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = nlvoter(
        &[
            "series",
            "--topology",
            "lattice:L=10",
            "--alpha",
            "1.1,2",
            "--runs",
            "5",
            "--seed",
            "3",
            "--record-every",
            "4",
        ],
        a.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let header = stderr(&o);
    let json = header.lines().next().unwrap().strip_prefix("# config: ").unwrap();
    let cfg = b.path().join("cfg.json");
    std::fs::write(&cfg, json).unwrap();
    let o = nlvoter(&["series", "--config", cfg.to_str().unwrap()], b.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["series_alpha_1.1.csv", "series_alpha_2.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn pattern_snapshot_is_a_centred_block() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvoter(
        &[
            "pattern",
            "--topology",
            "lattice:L=6",
            "--alpha",
            "2",
            "--block",
            "2",
            "--snapshots",
            "0",
            "--runs",
            "2",
            "--max-steps",
            "3",
            "--seed",
            "9",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let pbm = std::fs::read_to_string(dir.path().join("pattern_alpha_2_t0.pbm")).unwrap();
    let expected = "P1\n6 6\n111111\n111111\n110011\n110011\n111111\n111111\n";
    assert_eq!(pbm, expected);
    let csv = std::fs::read_to_string(dir.path().join("pattern_alpha_2.csv")).unwrap();
    assert!(csv.starts_with("t,rho_plus_mean,rho_plus_se\n0,"));
}

#[test]
fn graphinfo_reports_lattice_degrees() {
    let o = Command::new(env!("CARGO_BIN_EXE_nlvoter"))
        .args(["graphinfo", "--topology", "lattice:L=5", "--seed", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("nodes=25") && text.contains("edges=50"), "{text}");
}

#[test]
fn meanfield_classifies_fixed_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = nlvoter(&["meanfield", "--alpha", "0.5,2", "--seed", "1", "--t-max", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("meanfield_stability.csv")).unwrap();
    assert!(table.lines().count() >= 3, "{table}");
    let traj = std::fs::read_to_string(dir.path().join("meanfield_alpha_2.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,rho_plus"));
    assert_eq!(traj.lines().count(), 102);
}
