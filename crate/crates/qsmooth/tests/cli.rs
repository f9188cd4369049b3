use std::path::Path;
use std::process::{Command, Output};

use qsmooth::formats::{format_truth_table, load_graphs};
use qsmooth::run::RESULT_HEADER;
use qsmooth_core::TruthTable;

fn qsmooth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsmooth"))
        .args(args)
        .output()
        .expect("spawn qsmooth")
}

fn write_table(dir: &Path, table: &TruthTable) -> String {
    let path = dir.join("table.txt");
    std::fs::write(&path, format_truth_table(table)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn constant_table_prints_unit_smooth_value_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_table(dir.path(), &TruthTable::constant(4, true).unwrap());
    let args = [
        "single",
        "--experiment",
        "truth_table",
        "--truth-table",
        &table,
        "--x",
        "0110",
        "--seed",
        "5",
        "--counting-qubits",
        "4",
    ];
    let first = qsmooth(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let report = String::from_utf8(first.stdout.clone()).unwrap();
    assert!(report.contains("g_exact = 1\n"), "{report}");
    assert_eq!(first.stdout, qsmooth(&args).stdout);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    // missing seed
    assert_eq!(qsmooth(&["heatmap", "--out", &out]).status.code(), Some(2));
    // invalid probability
    assert_eq!(
        qsmooth(&["heatmap", "--seed", "1", "--p-plus", "1.5", "--out", &out])
            .status
            .code(),
        Some(2)
    );
    // zero instances
    let empty = qsmooth(&["heatmap", "--seed", "1", "--instances", "0", "--out", &out]);
    assert_eq!(empty.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("empty instance set"));
    // 16 work qubits + 12 counting qubits exceed the simulator
    let budget = qsmooth(&[
        "heatmap",
        "--seed",
        "1",
        "--instances",
        "1",
        "--counting-qubits",
        "12",
        "--out",
        &out,
    ]);
    assert_eq!(budget.status.code(), Some(3));
    // unreadable config file
    assert_eq!(
        qsmooth(&["heatmap", "--config", "/nonexistent/q.cfg"]).status.code(),
        Some(1)
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "# tiny sentiment run\nexperiment = sentiment\nseed = 3\ninstance_count = 2\ncounting_qubits = 3\noutput_dir = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_string_lossy().into_owned();
    let run = qsmooth(&["certified-ratio", "--config", &cfg, "--counting-qubits", "3,4"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(out.join("certified_ratio.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), RESULT_HEADER.join(","));
    let budgets: Vec<&str> = lines.map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(budgets, ["0", "3", "4", "0", "3", "4"]);
    assert!(!text.contains('\r'));
}

#[test]
fn figures_regenerate_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy().into_owned();
    let run = qsmooth(&[
        "heatmap",
        "--experiment",
        "graph_clique",
        "--seed",
        "9",
        "--instances",
        "4",
        "--counting-qubits",
        "3",
        "--out",
        &out_s,
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let regenerated = dir.path().join("again.svg");
    let plot = qsmooth(&[
        "plot",
        &out.join("heatmap_cells.csv").to_string_lossy(),
        "--out",
        &regenerated.to_string_lossy(),
    ]);
    assert!(plot.status.success());
    assert_eq!(
        std::fs::read(out.join("heatmap.svg")).unwrap(),
        std::fs::read(regenerated).unwrap()
    );
}

#[test]
fn graphs_command_writes_a_loadable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let run = qsmooth(&["graphs", "--seed", "4", "--instances", "12", "--out", &out]);
    assert!(run.status.success());
    let graphs = load_graphs(&dir.path().join("graphs.txt")).unwrap();
    assert_eq!(graphs.len(), 12);
    assert!(graphs.iter().all(|g| g.len() == 15));

    // the file drives the graph experiment and reproduces the generated set
    let from_file = dir.path().join("a");
    let generated = dir.path().join("b");
    let common = [
        "single",
        "--experiment",
        "graph_clique",
        "--seed",
        "4",
        "--instances",
        "12",
        "--instance-id",
        "7",
        "--counting-qubits",
        "3",
    ];
    let graphs_txt = dir.path().join("graphs.txt").to_string_lossy().into_owned();
    let a = qsmooth(
        &[
            &common[..],
            &["--graph-file", &graphs_txt, "--out", &from_file.to_string_lossy()],
        ]
        .concat(),
    );
    let b = qsmooth(&[&common[..], &["--out", &generated.to_string_lossy()]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}
