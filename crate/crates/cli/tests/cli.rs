use std::process::{Command, Output};

use serde_json::Value;

use minimodels::ca1d::{self, Configuration, WorksheetKind};
use minimodels::mapgraph;
use minimodels::minesweeper::{self as mines, BoardDims, ClueBoard, GenSpec};
use minimodels::render;
use minimodels::truck::{self, TaskKind};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minimodels"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = cli(&all);
    let v: Value = serde_json::from_str(&stdout(&o)).expect("json output");
    assert_eq!(v["schema"], 1);
    v
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}

#[test]
fn evolve_example() {
    let o = cli(&["ca", "evolve", "--config", "cyc:1000", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "cyc:0101\n");
}

#[test]
fn non_coprime_worksheet_is_a_domain_error() {
    let o = cli(&["mines", "gen", "--rows", "2", "--cols", "2", "--prob", "0.5", "--seed", "1", "--worksheet"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("NonCoprimeDims"));
    assert!(o.stdout.is_empty());
}

#[test]
fn transfer_example() {
    let o = cli(&["tm", "run", "--program", "transfer.tm", "--tape", "0:1", "--max-steps", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Halted after"));
    assert!(out.ends_with("final: station 4 | 4:1\n"), "{out}");
}

#[test]
fn program_file_on_disk() {
    let dir = std::env::temp_dir().join(format!("minimodels-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("loop.tm");
    std::fs::write(&path, "at 1 -> keep go:left\nat * -> keep go:right\n").unwrap();
    let o = cli(&["tm", "run", "--program", path.to_str().unwrap(), "--max-steps", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("StepLimit"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn stuck_run_exits_one() {
    let dir = std::env::temp_dir().join(format!("minimodels-stuck-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("stuck.tm");
    std::fs::write(&path, "at 0 -> keep go:right\n").unwrap();
    let o = cli(&["tm", "run", "--program", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("Stuck at step 1"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_two_and_name_the_token() {
    let o = cli(&["ca", "evolve", "--config", "cyc:1", "--stepz", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--stepz"));
    assert!(stderr(&o).contains("Usage"));

    let o = cli(&["mines", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frobnicate"));

    let o = cli(&["ca", "fixed", "--lattice", "ring:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ring:5"));

    let o = cli(&["tm", "verify", "--task", "juggling"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("juggling"));
}

#[test]
fn generators_need_a_seed() {
    let o = cli(&["mines", "gen", "--rows", "2", "--cols", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cli(&["ca", "worksheet", "--kind", "ancestor", "--size", "6"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_is_a_domain_error() {
    let o = cli(&["ca", "step", "--config", "cyc:10x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Parse"));
}

#[test]
fn ca_json_matches_library() {
    let c: Configuration = "cyc:1101000".parse().unwrap();
    let v = json(&["ca", "evolve", "--config", "cyc:1101000", "--steps", "5"]);
    let lib: Vec<String> = ca1d::evolve(&c, 5).iter().map(ToString::to_string).collect();
    assert_eq!(strings(&v["history"]), lib);
    assert_eq!(v["final"], lib[4].as_str());

    let v = json(&["ca", "step", "--config", "fin:1011@-2"]);
    let back: Configuration = v["config"].as_str().unwrap().parse().unwrap();
    assert_eq!(back, ca1d::step(&"fin:1011@-2".parse().unwrap()));

    let v = json(&["ca", "pred", "--config", "cyc:0110"]);
    let lib: Vec<Configuration> = ca1d::predecessors(&"cyc:0110".parse().unwrap()).unwrap().into_iter().collect();
    let got: Vec<Configuration> = strings(&v["predecessors"]).iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(got, lib);

    let v = json(&["ca", "fixed", "--lattice", "per:3"]);
    let lib: Vec<String> = ca1d::fixed_points(ca1d::Boundary::Periodic(3))
        .unwrap()
        .iter()
        .map(ToString::to_string)
        .collect();
    assert_eq!(strings(&v["fixed_points"]), lib);
    assert!(lib.contains(&"per:110".to_string()));
}

#[test]
fn pred_on_zero_padded_window_is_rejected() {
    let o = cli(&["ca", "pred", "--config", "fin:101"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnsupportedBoundary"));
}

#[test]
fn worksheet_json_renders_back_to_the_same_text() {
    let text = cli(&["ca", "worksheet", "--kind", "ancestor", "--size", "10", "--seed", "7"]);
    assert_eq!(text.status.code(), Some(0));
    let v = json(&["ca", "worksheet", "--kind", "ancestor", "--size", "10", "--seed", "7"]);
    let doc: render::WorksheetDoc = serde_json::from_value(v["document"].clone()).unwrap();
    assert_eq!(doc, ca1d::ca_worksheet(7, WorksheetKind::Ancestor, 10).unwrap());
    assert_eq!(stdout(&text), render::to_text(&doc));

    let dir = std::env::temp_dir().join(format!("minimodels-render-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("doc.json");
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let svg = cli(&["render", path.to_str().unwrap(), "--format", "svg"]);
    assert_eq!(svg.status.code(), Some(0));
    assert_eq!(stdout(&svg), render::to_svg(&doc).unwrap());

    // the full `--format json` output is accepted too
    let whole = dir.join("whole.json");
    std::fs::write(&whole, v.to_string()).unwrap();
    let again = cli(&["render", whole.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout(&again), stdout(&text));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("minimodels-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sheet.svg");
    let args = ["mines", "worksheet", "--rows", "4", "--cols", "5", "--seed", "3", "--format", "svg", "--out"];
    let mut a = args.to_vec();
    a.push(path.to_str().unwrap());
    let o = cli(&a);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let spec = GenSpec { dims: BoardDims::new(4, 5).unwrap(), p: 0.5, seed: 3 };
    let lib = render::to_svg(&mines::mines_worksheet(&spec).unwrap().sheet).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), lib);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_argv_gives_identical_bytes() {
    for args in [
        &["mines", "worksheet", "--rows", "5", "--cols", "6", "--seed", "11", "--format", "svg"][..],
        &["ca", "worksheet", "--kind", "descendants", "--size", "12", "--seed", "4", "--format", "svg"],
        &["tm", "sheet", "--program", "adding.tm", "--format", "svg"],
        &["map", "query", "nearest", "--country", "PT", "--format", "json"],
    ] {
        let a = cli(args);
        let b = cli(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn svg_for_plain_results_is_a_usage_error() {
    let o = cli(&["mines", "rank", "--rows", "3", "--cols", "3", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mines_json_matches_library() {
    let v = json(&["mines", "gen", "--rows", "3", "--cols", "4", "--prob", "0.4", "--seed", "9"]);
    let spec = GenSpec { dims: BoardDims::new(3, 4).unwrap(), p: 0.4, seed: 9 };
    let (layout, clues) = mines::generate(&spec).unwrap();
    assert_eq!(strings(&v["mines"]).join("\n"), layout.to_board_string().trim_end());
    assert_eq!(strings(&v["clues"]).join("\n"), clues.to_board_string().trim_end());
    assert_eq!(v["unique_guaranteed"], true);

    let v = json(&["mines", "rank", "--rows", "5", "--cols", "5"]);
    let (rank, k) = mines::clue_map_rank(BoardDims::new(5, 5).unwrap());
    assert_eq!(v["rank"], rank);
    assert_eq!(v["unknowns"], k);
    assert_eq!(v["coprime"], false);
}

#[test]
fn solve_and_unique_read_boards() {
    let dir = std::env::temp_dir().join(format!("minimodels-board-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (clues, a, b) = mines::ambiguity_witness(BoardDims::new(2, 2).unwrap(), 1, 200).unwrap();
    let path = dir.join("amb.txt");
    std::fs::write(&path, clues.to_board_string()).unwrap();
    let p = path.to_str().unwrap();

    let v = json(&["mines", "unique", "--board", p]);
    assert_eq!(v["unique"], false);
    let w: Vec<Vec<String>> = v["witnesses"].as_array().unwrap().iter().map(strings).collect();
    assert_eq!(w.len(), 2);
    for sol in &w {
        let layout = mines::MineLayout::parse_board(&sol.join("\n")).unwrap();
        assert_eq!(mines::clues_of(&layout), clues);
    }
    assert_ne!(a, b);

    let v = json(&["mines", "solve", "--board", p]);
    assert_eq!(v["count"], mines::solve(&clues, 16).len());

    let bad: ClueBoard = "#2\n0#".parse().unwrap();
    std::fs::write(&path, bad.to_board_string()).unwrap();
    let o = cli(&["mines", "solve", "--board", p]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "no solution\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tm_verify_and_tasks() {
    let v = json(&["tm", "verify", "--task", "adding"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["cases"].as_array().unwrap().len(), 121);

    let v = json(&["tm", "verify", "--task", "invert", "--params", "3", "--params", "8"]);
    assert_eq!(v["cases"].as_array().unwrap().len(), 2);

    let o = cli(&["tm", "verify", "--task", "adding", "--program", "transfer.tm", "--params", "2,2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    let v = json(&["tm", "tasks"]);
    let slugs: Vec<&str> = v["tasks"].as_array().unwrap().iter().map(|t| t["slug"].as_str().unwrap()).collect();
    let lib: Vec<&str> = TaskKind::ALL.iter().map(|k| k.slug()).collect();
    assert_eq!(slugs, lib);
}

#[test]
fn tm_trace_json_matches_library() {
    let v = json(&["tm", "trace", "--program", "adding.tm", "--tape", "0:2 4:1"]);
    let p = truck::reference_program(TaskKind::Adding);
    let tape = truck::Tape::parse("0:2 4:1", p.tape_len).unwrap();
    let report = truck::run(&tape, &p.initial_truck(), &p, truck::DEFAULT_MAX_STEPS);
    assert_eq!(v["trace"], truck::trace_json(&report));
}

#[test]
fn map_json_matches_library() {
    let eu = mapgraph::europe();
    let v = json(&["map", "query", "monogamous"]);
    let lib: Vec<String> = mapgraph::monogamous(&eu).into_iter().collect();
    assert_eq!(strings(&v["monogamous"]), lib);

    let v = json(&["map", "query", "degree", "--country", "DE"]);
    assert_eq!(v["degree"], mapgraph::degree(&eu, "DE").unwrap());

    let v = json(&["map", "query", "nearest", "--country", "PT", "--k", "2"]);
    let lib = mapgraph::nearest_attractive_points(&eu, "PT", 2).unwrap();
    assert_eq!(v["points"], serde_json::to_value(&lib).unwrap());

    let v = json(&["map", "color"]);
    let lib = mapgraph::four_color(&eu).unwrap();
    assert_eq!(v["colors"], serde_json::to_value(&lib).unwrap());

    let v = json(&["map", "query", "theorem1"]);
    assert_eq!(v["holds"], true);
}

#[test]
fn map_errors() {
    let o = cli(&["map", "query", "degree", "--country", "XX"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("UnknownCountry"));

    let o = cli(&["map", "query", "degree"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = std::env::temp_dir().join(format!("minimodels-map-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.json");
    std::fs::write(
        &path,
        r#"{"countries":[{"id":"A","name":"A","lat":0,"lon":0}],"borders":[["A","B"]]}"#,
    )
    .unwrap();
    let o = cli(&["map", "validate", "--data", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains('B'));
    let o = cli(&["map", "validate"]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}
