use std::path::Path;
use std::process::{Command, Output};

fn hbsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbsim"))
        .args(args)
        .output()
        .expect("spawn hbsim")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr)
}

#[test]
fn run_succeeds() {
    let o = hbsim(&[
        "run",
        "--n",
        "60",
        "--protocol",
        "simple-p2p",
        "--rate",
        "10",
        "--runs",
        "2",
        "--horizon",
        "30",
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    assert!(text(&o).contains("inconsistency mean"));
}

#[test]
fn configuration_errors_exit_one() {
    for args in [
        &["run", "--rate", "-1"][..],
        &["run", "--n", "100", "--k", "100"],
        &["run", "--topology", "torus"],
        &["run", "--n", "10000"],
        &["run", "--no-such-flag"],
        &["graph", "--topology", "small-world", "--n", "50", "--k", "5"],
        &["plot-data", "x.csv", "--grouping", "sideways"],
    ] {
        let o = hbsim(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", text(&o));
    }
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "n = 50\ncolour = blue\n").unwrap();
    let o = hbsim(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", text(&o));
    assert!(text(&o).contains("colour"));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let o = hbsim(&["plot-data", missing.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", text(&o));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "protocol,topology,n\nx,y,1\n").unwrap();
    let o = hbsim(&[
        "plot-data",
        bad.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", text(&o));
    assert!(text(&o).contains("missing column"));
}

#[test]
fn graph_writes_edge_list() {
    let o = hbsim(&["graph", "--topology", "lattice", "--n", "9", "--k", "4", "--seed", "0"]);
    assert_eq!(code(&o), 0);
    let golden =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/lattice_9_4.tsv"))
            .unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden);
}

#[test]
fn sweep_then_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let spec = dir.path().join("spec.conf");
    std::fs::write(
        &spec,
        format!(
            "# small grid\nn = 50, 80\nrate = 0.1, 1, 10, 100\nprotocol = simple-p2p\nruns = 2\nhorizon = 20\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = hbsim(&["sweep", spec.to_str().unwrap(), "--workers", "2"]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let summary = out.join("summary.csv");
    assert_eq!(std::fs::read_to_string(&summary).unwrap().lines().count(), 1 + 8);
    assert_eq!(
        std::fs::read_to_string(out.join("runs.csv")).unwrap().lines().count(),
        1 + 16
    );

    let plots = dir.path().join("plots");
    let o = hbsim(&[
        "plot-data",
        summary.to_str().unwrap(),
        "--scale",
        "log",
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let files: Vec<_> = std::fs::read_dir(&plots).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn acceptance_reports_selected_criteria() {
    let o = hbsim(&["acceptance", "--only", "11"]);
    assert_eq!(code(&o), 0, "{}", text(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.lines().any(|l| l.starts_with("[PASS] 11")), "{out}");
}
