use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn delphic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delphic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn solve_toy_finds_peek() {
    let o = delphic(&["solve", "--sem", "delphic", "--task", "cb_toy"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "plan: peek_a");
    let o = delphic(&[
        "solve",
        "--sem",
        "kripke",
        "--task",
        "cb_toy",
        "--dedup",
        "--contract",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "plan: peek_a");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&delphic(&["solve", "--task", "missing.task"])), 3);
    assert_eq!(
        code(&delphic(&["solve", "--max-bound", "0", "--task", "cb_toy"])),
        1
    );
    assert_eq!(
        code(&delphic(&["solve", "--task", "cb_toy", "--sem", "godel"])),
        3
    );
    assert_eq!(code(&delphic(&["solve", "--task", "cb_toy", "--bogus"])), 3);
    assert_eq!(code(&delphic(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.task");
    fs::write(&bad, "agent(a).\natom(h).\nw_init(w1).\ndw_init(w9).\n").unwrap();
    let o = delphic(&["solve", "--task", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(!o.stderr.is_empty());
}

#[test]
fn timeout_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let task = dir.path().join("gr.task");
    let o = delphic(&[
        "gen",
        "--domain",
        "gr",
        "--agents",
        "4",
        "--goal",
        "3",
        "--out",
        task.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = delphic(&[
        "solve",
        "--task",
        task.to_str().unwrap(),
        "--sem",
        "kripke",
        "--timeout",
        "0.01",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).starts_with("t.o."));
}

#[test]
fn stats_formats() {
    let o = delphic(&["solve", "--task", "cb_toy", "--stats", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("plan: peek_a"));
    assert!(lines.next().unwrap().starts_with("domain,params,semantics"));
    assert!(lines.next().unwrap().contains(",delphic,1,"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = delphic(&[
        "solve",
        "--task",
        "cb_toy",
        "--stats",
        "json",
        "--stats-out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = delphic::taskio::read_stats_json(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].plan_length, Some(1));
}

#[test]
fn compare_pairs_rows() {
    let o = delphic(&["compare", "--task", "cb_toy"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("kripke: plan: peek_a"));
    assert!(text.contains("delphic: plan: peek_a"));
    assert!(text.contains("node ratio: 0.6000"));

    let o = delphic(&["compare", "--task", "cb_toy", "--plan", "peek_a"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("total nodes: kripke 5 delphic 3"));
    assert_eq!(
        code(&delphic(&["compare", "--task", "cb_toy", "--plan", "nope"])),
        3
    );
}

#[test]
fn verify_modes() {
    let o = delphic(&["verify", "--task", "cb_toy", "--plan", "peek_a"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "kripke: valid\ndelphic: valid\n");
    // The empty plan is applicable but does not reach the goal.
    assert_eq!(
        code(&delphic(&["verify", "--task", "cb_toy", "--plan", ""])),
        1
    );

    let o = delphic(&["verify", "--task", "cb_toy"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"verdict\": \"agree\""));

    let o = delphic(&["verify", "--oracle", "all", "--trials", "20", "--seed", "9"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);
}

fn dot_nodes(text: &str) -> usize {
    text.lines()
        .filter(|l| l.contains("[label=\"v") || l.contains("[label=\"w"))
        .count()
}

#[test]
fn viz_toy_states() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = delphic(&[
        "viz",
        "--task",
        "cb_toy",
        "--plan",
        "peek_a",
        "--dot-out",
        d,
    ]);
    assert_eq!(code(&o), 0);
    let s1 = fs::read_to_string(dir.path().join("state_01.dot")).unwrap();
    assert_eq!(dot_nodes(&s1), 3);
    let designated = "\"u1_0_0\"";
    for w in ["\"i0_0\"", "\"i0_1\""] {
        assert!(
            s1.contains(&format!("{designated} -> {w} [label=\"b\"]")),
            "{s1}"
        );
    }
    assert!(s1.contains(&format!("{designated} -> {designated} [label=\"a\"]")));
    let trace = fs::read_to_string(dir.path().join("trace.dot")).unwrap();
    assert_eq!(dot_nodes(&trace), 3);
    assert!(trace.contains("\"i0_0\" -> \"u1_0_0\" [style=dashed"));

    let kdir = tempfile::tempdir().unwrap();
    let o = delphic(&[
        "viz",
        "--task",
        "cb_toy",
        "--sem",
        "kripke",
        "--dot-out",
        kdir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let k1 = fs::read_to_string(kdir.path().join("state_01.dot")).unwrap();
    assert_eq!(dot_nodes(&k1), 3);
    assert!(!kdir.path().join("trace.dot").exists());
}

/// Each graph shows exactly the nodes the store counts for its state, and
/// file names are stable between runs.
#[test]
fn viz_node_counts_match_store() {
    let plan = "distract_a_b,signal_a_c,open_a,peek_a,peek_c";
    let dir = tempfile::tempdir().unwrap();
    let task = dir.path().join("cb.task");
    delphic(&[
        "gen",
        "--domain",
        "cb",
        "--goal",
        "4",
        "--out",
        task.to_str().unwrap(),
    ]);
    let parsed = delphic::taskio::parse_task(&fs::read_to_string(&task).unwrap()).unwrap();
    let names: Vec<&str> = plan.split(',').collect();
    let trace = delphic::planner::trace_delphic(&parsed, &names).unwrap();

    let render = |out: &Path| {
        let o = delphic(&[
            "viz",
            "--task",
            task.to_str().unwrap(),
            "--plan",
            plan,
            "--dot-out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    };
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    render(&a);
    render(&b);
    for (t, s) in trace.states.iter().enumerate() {
        let name = format!("state_{t:02}.dot");
        let text = fs::read_to_string(a.join(&name)).unwrap();
        assert_eq!(dot_nodes(&text), trace.store.count_nodes(s).0, "{name}");
        assert_eq!(text, fs::read_to_string(b.join(&name)).unwrap());
    }
}

#[test]
fn gen_round_trips() {
    let o = delphic(&[
        "gen", "--domain", "sc", "--agents", "3", "--rooms", "4", "--goal", "1",
    ]);
    assert_eq!(code(&o), 0);
    delphic::taskio::parse_task(&stdout(&o)).unwrap();
    let o = delphic(&["gen", "--random", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    delphic::taskio::parse_task(&stdout(&o)).unwrap();
    assert_eq!(
        code(&delphic(&["gen", "--domain", "gr", "--agents", "1"])),
        3
    );
    assert_eq!(code(&delphic(&["gen", "--domain", "nope"])), 3);
}

/// Everything except the time column is identical between runs.
fn without_time(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(5);
            cols.join(",")
        })
        .collect()
}

#[test]
fn bench_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cb.toml");
    fs::write(
        &cfg,
        "max_bound = 6\n[[grid]]\ndomain = \"cb\"\ngoals = [0, 1]\n",
    )
    .unwrap();
    let run = || {
        let o = delphic(&["bench", "--config", cfg.to_str().unwrap(), "--stats", "csv"]);
        assert_eq!(code(&o), 0);
        stdout(&o)
    };
    let first = run();
    assert_eq!(first.lines().count(), 5);
    assert_eq!(without_time(&first), without_time(&run()));

    fs::write(
        &cfg,
        "timeout = 0.001\n[[grid]]\ndomain = \"gr\"\nagents = [5]\ngoals = [3]\nsemantics = 1\n",
    )
    .unwrap();
    assert_eq!(
        code(&delphic(&["bench", "--config", cfg.to_str().unwrap()])),
        3
    );

    fs::write(&cfg, "timeout = 0.001\nsemantics = [\"kripke\"]\n[[grid]]\ndomain = \"gr\"\nagents = [5]\ngoals = [3]\n").unwrap();
    let o = delphic(&["bench", "--config", cfg.to_str().unwrap(), "--stats", "csv"]);
    assert_eq!(code(&o), 0);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(row.contains(",t.o.,"), "{row}");
    assert!(row.ends_with(",timeout"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        assert!(
            toml::from_str::<toml::Value>(&text).is_ok(),
            "{}",
            path.display()
        );
    }
}

#[test]
fn grapevine_grid_completes() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/gr3.toml");
    let o = delphic(&["bench", "--config", cfg.to_str().unwrap(), "--stats", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.ends_with(",plan")), "{text}");
}
