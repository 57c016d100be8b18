//! `minimodels` command line.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use minimodels::ca1d::{self, Boundary, Configuration, WorksheetKind};
use minimodels::mapgraph::{self, MapDataset};
use minimodels::minesweeper::{self as mines, BoardDims, ClueBoard, GenSpec};
use minimodels::render::{self, WorksheetDoc};
use minimodels::truck::{self, Program, Tape, TaskKind};

#[derive(Parser)]
#[command(name = "minimodels", version, about = "Small discrete models and printable worksheets")]
struct Cli {
    /// Seed for every random choice; generators require it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Svg,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// One-dimensional XOR automaton.
    #[command(subcommand)]
    Ca(CaCmd),
    /// Truck machine.
    #[command(subcommand)]
    Tm(TmCmd),
    /// Paper minesweeper.
    #[command(subcommand)]
    Mines(MinesCmd),
    /// Map graph questions.
    #[command(subcommand)]
    Map(MapCmd),
    /// Render a worksheet document given as JSON.
    Render {
        /// JSON file, or `-` for stdin.
        input: String,
    },
}

#[derive(Subcommand)]
enum CaCmd {
    Step {
        #[arg(long)]
        config: String,
    },
    Evolve {
        #[arg(long)]
        config: String,
        #[arg(long)]
        steps: usize,
        /// Print every generation, not just the last.
        #[arg(long)]
        history: bool,
    },
    /// All predecessors of a cyclic or periodic configuration.
    Pred {
        #[arg(long)]
        config: String,
    },
    /// Fixed points on a lattice such as `cyc:6` or `per:4`.
    Fixed {
        #[arg(long)]
        lattice: String,
    },
    Worksheet {
        #[arg(long, default_value = "descendants")]
        kind: String,
        #[arg(long, default_value_t = 8)]
        size: usize,
    },
}

#[derive(Args)]
struct ProgramArgs {
    /// Program file. Bundled programs are found by name too, e.g. `adding.tm`.
    #[arg(long)]
    program: String,
    /// Initial tape such as `0:3 4:2` or `0:[a,b]`.
    #[arg(long, default_value = "")]
    tape: String,
    #[arg(long, default_value_t = truck::DEFAULT_MAX_STEPS)]
    max_steps: usize,
}

#[derive(Subcommand)]
enum TmCmd {
    /// Run a program and show the trace.
    Run(ProgramArgs),
    /// Export the trace only.
    Trace(ProgramArgs),
    /// Check a program against a task.
    Verify {
        #[arg(long)]
        task: String,
        /// Defaults to the bundled program for the task.
        #[arg(long)]
        program: Option<String>,
        /// Parameter values such as `3,4`; repeatable. Defaults to the task's domain.
        #[arg(long = "params")]
        params: Vec<String>,
        #[arg(long, default_value_t = truck::DEFAULT_MAX_STEPS)]
        max_steps: usize,
    },
    Tasks,
    /// The rule table of a program as a worksheet.
    Sheet {
        #[arg(long)]
        program: String,
    },
}

#[derive(Args)]
struct BoardArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value_t = mines::DEFAULT_PROBABILITY)]
    prob: f64,
}

#[derive(Subcommand)]
enum MinesCmd {
    /// Draw a mine layout and its clues.
    Gen {
        #[command(flatten)]
        board: BoardArgs,
        /// Produce a worksheet; needs coprime rows+1 and cols+1.
        #[arg(long)]
        worksheet: bool,
        #[arg(long)]
        solution: bool,
    },
    Solve {
        /// Clue board file, or `-` for stdin.
        #[arg(long)]
        board: String,
        #[arg(long, default_value_t = 16)]
        cap: usize,
    },
    Unique {
        #[arg(long)]
        board: String,
    },
    /// Rank of the clue map for a board size.
    Rank {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
    },
    Worksheet {
        #[command(flatten)]
        board: BoardArgs,
        #[arg(long)]
        solution: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Predicate {
    Degree,
    Neighbours,
    Monogamous,
    HappyMonogamous,
    Attractive,
    Theorem1,
    Friendly,
    MaxFriendlyRank,
    Tailed,
    Nearest,
}

#[derive(Subcommand)]
enum MapCmd {
    Query {
        #[arg(value_enum)]
        predicate: Predicate,
        #[arg(long)]
        country: Option<String>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Dataset JSON; defaults to the bundled Europe map.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    Color {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    Validate {
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

enum Failure {
    Domain(String),
    Usage(String),
}

/// Library errors are reported with their variant name first.
macro_rules! named_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                let debug = format!("{e:?}");
                let name: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
                Failure::Domain(format!("{name}: {e}"))
            }
        }
    )*};
}

named_errors!(ca1d::CaError, truck::TruckError, mines::MinesError, mapgraph::MapError, render::RenderError);

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Domain(format!("invalid JSON: {e}"))
    }
}

fn need_seed(seed: Option<u64>) -> Res<u64> {
    seed.ok_or_else(|| Failure::Usage("generators need --seed <SEED>".into()))
}

type Res<T> = Result<T, Failure>;

/// A result before formatting: a plain text/JSON pair or a document.
enum Output {
    Plain { text: String, json: Value },
    Doc(WorksheetDoc),
}

/// Sent as output but still exits with 1.
struct Rejected(Output);

fn plain(text: String, json: Value) -> Output {
    Output::Plain { text, json }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(&cli.command, cli.seed);
    let (output, code) = match result {
        Ok(Ok(o)) => (o, ExitCode::SUCCESS),
        Ok(Err(Rejected(o))) => (o, ExitCode::from(1)),
        Err(f) => return fail(f),
    };
    let text = match format(output, cli.format) {
        Ok(t) => t,
        Err(f) => return fail(f),
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &text),
        None => io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    code
}

fn fail(f: Failure) -> ExitCode {
    let (msg, code) = match f {
        Failure::Domain(m) => (m, 1),
        Failure::Usage(m) => (m, 2),
    };
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn format(output: Output, fmt: Format) -> Res<String> {
    match (output, fmt) {
        (Output::Plain { text, .. }, Format::Text) => Ok(text),
        (Output::Plain { json, .. }, Format::Json) => Ok(with_schema(json)),
        (Output::Plain { .. }, Format::Svg) => {
            Err(Failure::Usage("--format svg is only available for worksheets".into()))
        }
        (Output::Doc(doc), Format::Text) => Ok(render::to_text(&doc)),
        (Output::Doc(doc), Format::Svg) => Ok(render::to_svg(&doc)?),
        (Output::Doc(doc), Format::Json) => Ok(with_schema(json!({ "document": doc }))),
    }
}

fn with_schema(value: Value) -> String {
    let mut obj = serde_json::Map::new();
    obj.insert("schema".into(), json!(1));
    match value {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("result".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
    s.push('\n');
    s
}

fn dispatch(cmd: &Command, seed: Option<u64>) -> Res<Result<Output, Rejected>> {
    match cmd {
        Command::Ca(c) => ca(c, seed).map(Ok),
        Command::Tm(c) => tm(c),
        Command::Mines(c) => mines_cmd(c, seed),
        Command::Map(c) => map(c),
        Command::Render { input } => {
            let text = read_input(input)?;
            // accept our own `--format json` output as well as a bare document
            let mut v: Value = serde_json::from_str(&text)?;
            if let Some(inner) = v.get_mut("document") {
                v = inner.take();
            }
            let doc: WorksheetDoc = serde_json::from_value(v)?;
            doc.validate()?;
            Ok(Ok(Output::Doc(doc)))
        }
    }
}

fn read_input(arg: &str) -> Res<String> {
    if arg == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(arg).map_err(|e| Failure::Domain(format!("cannot read {arg}: {e}")))
}

fn lines<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let mut s: String = items.into_iter().map(|i| i.to_string() + "\n").collect();
    if s.is_empty() {
        s.push_str("none\n");
    }
    s
}

fn parse_config(s: &str) -> Res<Configuration> {
    Ok(s.parse::<Configuration>()?)
}

fn parse_lattice(s: &str) -> Res<Boundary> {
    let bad = || Failure::Usage(format!("invalid lattice {s:?}: expected cyc:N or per:N"));
    let (tag, n) = s.split_once(':').ok_or_else(bad)?;
    let n: usize = n.parse().map_err(|_| bad())?;
    match tag {
        "cyc" => Ok(Boundary::Cyclic(n)),
        "per" => Ok(Boundary::Periodic(n)),
        _ => Err(bad()),
    }
}

fn ca(cmd: &CaCmd, seed: Option<u64>) -> Res<Output> {
    Ok(match cmd {
        CaCmd::Step { config } => {
            let next = ca1d::step(&parse_config(config)?).to_string();
            plain(format!("{next}\n"), json!({ "config": next }))
        }
        CaCmd::Evolve { config, steps, history } => {
            let start = parse_config(config)?;
            let all: Vec<String> = ca1d::evolve(&start, *steps).iter().map(ToString::to_string).collect();
            let last = all.last().cloned().unwrap_or_else(|| start.to_string());
            let text = if *history { lines(&all) } else { format!("{last}\n") };
            plain(text, json!({ "steps": steps, "history": all, "final": last }))
        }
        CaCmd::Pred { config } => {
            let preds: Vec<String> = ca1d::predecessors(&parse_config(config)?)?
                .iter()
                .map(ToString::to_string)
                .collect();
            plain(lines(&preds), json!({ "count": preds.len(), "predecessors": preds }))
        }
        CaCmd::Fixed { lattice } => {
            let fixed: Vec<String> = ca1d::fixed_points(parse_lattice(lattice)?)?
                .iter()
                .map(ToString::to_string)
                .collect();
            plain(lines(&fixed), json!({ "count": fixed.len(), "fixed_points": fixed }))
        }
        CaCmd::Worksheet { kind, size } => {
            let kind: WorksheetKind = kind.parse().map_err(Failure::Usage)?;
            Output::Doc(ca1d::ca_worksheet(need_seed(seed)?, kind, *size)?)
        }
    })
}

fn load_program(arg: &str) -> Res<Program> {
    let path = Path::new(arg);
    let source = if path.exists() {
        read_input(arg)?
    } else {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        match TaskKind::from_slug(stem) {
            Some(kind) if path.parent().is_none_or(|p| p.as_os_str().is_empty()) => {
                truck::reference_source(kind).to_string()
            }
            _ => return Err(Failure::Domain(format!("cannot read {arg}: no such file"))),
        }
    };
    Ok(truck::parse_program(&source)?)
}

fn task_of(slug: &str) -> Res<TaskKind> {
    TaskKind::from_slug(slug).ok_or_else(|| {
        let known: Vec<&str> = TaskKind::ALL.iter().map(|k| k.slug()).collect();
        Failure::Usage(format!("unknown task {slug:?} (expected one of {})", known.join(", ")))
    })
}

fn tm(cmd: &TmCmd) -> Res<Result<Output, Rejected>> {
    match cmd {
        TmCmd::Run(a) | TmCmd::Trace(a) => {
            let program = load_program(&a.program)?;
            let tape = Tape::parse(&a.tape, program.tape_len)?;
            let report = truck::run(&tape, &program.initial_truck(), &program, a.max_steps);
            let last = report.final_entry();
            let out = if matches!(cmd, TmCmd::Run(_)) {
                let mut text = truck::trace_text(&report);
                text.push_str(&format!("final: station {} | {}\n", last.truck.position, last.tape));
                plain(
                    text,
                    json!({
                        "outcome": report.outcome,
                        "final": { "position": last.truck.position, "tape": last.tape.to_string() },
                        "trace": truck::trace_json(&report),
                    }),
                )
            } else {
                plain(truck::trace_text(&report), json!({ "trace": truck::trace_json(&report) }))
            };
            Ok(if report.outcome.is_halted() { Ok(out) } else { Err(Rejected(out)) })
        }
        TmCmd::Verify { task, program, params, max_steps } => {
            let kind = task_of(task)?;
            let spec = truck::builtin_task(kind);
            let program = match program {
                Some(p) => load_program(p)?,
                None => truck::reference_program(kind),
            };
            let assignments = if params.is_empty() {
                spec.domain.clone()
            } else {
                params.iter().map(|p| parse_params(p, spec.parameters.len())).collect::<Res<_>>()?
            };
            let report = truck::verify_task(&program, &spec, &assignments, *max_steps);
            let mut text = String::new();
            let mut cases = Vec::new();
            for c in &report.cases {
                let p: Vec<String> = c.params.iter().map(ToString::to_string).collect();
                let verdict = if c.passed { "ok" } else { "FAIL" };
                text.push_str(&format!("{}({}): {verdict}", kind.slug(), p.join(",")));
                if let Some(r) = &c.reason {
                    text.push_str(&format!(" - {r}"));
                }
                text.push('\n');
                cases.push(json!({ "params": c.params, "passed": c.passed, "outcome": c.outcome, "reason": c.reason }));
            }
            let failed = report.failures().count();
            text.push_str(&format!("{} of {} cases passed\n", report.cases.len() - failed, report.cases.len()));
            let out = plain(text, json!({ "task": kind.slug(), "passed": failed == 0, "cases": cases }));
            Ok(if failed == 0 { Ok(out) } else { Err(Rejected(out)) })
        }
        TmCmd::Tasks => {
            let mut text = String::new();
            let mut list = Vec::new();
            for t in truck::builtin_tasks() {
                text.push_str(&format!("{:<17} ({}) {}\n", t.kind.slug(), t.parameters.join(", "), t.description));
                list.push(json!({
                    "slug": t.kind.slug(),
                    "name": t.name,
                    "parameters": t.parameters,
                    "description": t.description,
                    "conservation": t.conservation,
                }));
            }
            Ok(Ok(plain(text, json!({ "tasks": list }))))
        }
        TmCmd::Sheet { program } => Ok(Ok(Output::Doc(truck::program_sheet(&load_program(program)?)))),
    }
}

fn parse_params(s: &str, want: usize) -> Res<Vec<usize>> {
    let values: Vec<usize> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("invalid parameter list {s:?}")))?;
    if values.len() != want {
        return Err(Failure::Usage(format!("expected {want} parameters, got {s:?}")));
    }
    Ok(values)
}

fn gen_spec(b: &BoardArgs, seed: Option<u64>) -> Res<GenSpec> {
    Ok(GenSpec { dims: BoardDims::new(b.rows, b.cols)?, p: b.prob, seed: need_seed(seed)? })
}

fn layout_json(layout: &mines::MineLayout) -> Value {
    json!(layout.to_board_string().lines().collect::<Vec<_>>())
}

fn clues_json(clues: &ClueBoard) -> Value {
    json!(clues.to_board_string().lines().collect::<Vec<_>>())
}

fn mines_cmd(cmd: &MinesCmd, seed: Option<u64>) -> Res<Result<Output, Rejected>> {
    let out = match cmd {
        MinesCmd::Gen { board, worksheet: false, solution } => {
            let (layout, clues) = mines::generate(&gen_spec(board, seed)?)?;
            let mut text = clues.to_board_string();
            if *solution {
                text.push('\n');
                text.push_str(&layout.to_board_string());
            }
            plain(
                text,
                json!({
                    "rows": board.rows,
                    "cols": board.cols,
                    "unique_guaranteed": mines::coprime_dims(clues.dims()),
                    "clues": clues_json(&clues),
                    "mines": layout_json(&layout),
                }),
            )
        }
        MinesCmd::Gen { board, worksheet: true, solution } | MinesCmd::Worksheet { board, solution } => {
            let sheet = mines::mines_worksheet(&gen_spec(board, seed)?)?;
            Output::Doc(if *solution { sheet.solution } else { sheet.sheet })
        }
        MinesCmd::Solve { board, cap } => {
            let clues: ClueBoard = read_input(board)?.parse()?;
            let sols = mines::solve(&clues, *cap);
            let text = if sols.is_empty() {
                "no solution\n".to_string()
            } else {
                let boards: Vec<String> = sols.iter().map(|s| s.to_board_string()).collect();
                format!("{} solution(s)\n\n{}", sols.len(), boards.join("\n"))
            };
            let out = plain(
                text,
                json!({ "count": sols.len(), "capped": sols.len() == *cap, "solutions": sols.iter().map(layout_json).collect::<Vec<_>>() }),
            );
            return Ok(if sols.is_empty() { Err(Rejected(out)) } else { Ok(out) });
        }
        MinesCmd::Unique { board } => {
            let clues: ClueBoard = read_input(board)?.parse()?;
            let (unique, _) = mines::is_unique(&clues)?;
            let sols = mines::solve(&clues, 2);
            let mut text = if unique { "unique\n".to_string() } else { "ambiguous\n".to_string() };
            for s in &sols {
                text.push('\n');
                text.push_str(&s.to_board_string());
            }
            let boards: Vec<Value> = sols.iter().map(layout_json).collect();
            plain(
                text,
                if unique {
                    json!({ "unique": true, "solution": boards[0] })
                } else {
                    json!({ "unique": false, "witnesses": boards })
                },
            )
        }
        MinesCmd::Rank { rows, cols } => {
            let dims = BoardDims::new(*rows, *cols)?;
            let (rank, k) = mines::clue_map_rank(dims);
            let coprime = mines::coprime_dims(dims);
            let kind = if rank == k { "full" } else { "deficient" };
            plain(
                format!("rank {rank} of {k} ({kind}); gcd condition {}\n", if coprime { "holds" } else { "fails" }),
                json!({ "rows": rows, "cols": cols, "rank": rank, "unknowns": k, "full_rank": rank == k, "coprime": coprime }),
            )
        }
    };
    Ok(Ok(out))
}

fn dataset(path: &Option<PathBuf>) -> Res<MapDataset> {
    match path {
        None => Ok(mapgraph::europe()),
        Some(p) => Ok(MapDataset::from_json(&read_input(&p.to_string_lossy())?)?),
    }
}

fn map(cmd: &MapCmd) -> Res<Result<Output, Rejected>> {
    let out = match cmd {
        MapCmd::Query { predicate, country, k, data } => {
            let ds = dataset(data)?;
            let need = || {
                country
                    .as_deref()
                    .ok_or_else(|| Failure::Usage("this predicate needs --country".into()))
            };
            match predicate {
                Predicate::Degree => {
                    let c = need()?;
                    let d = mapgraph::degree(&ds, c)?;
                    plain(format!("{d}\n"), json!({ "country": c, "degree": d }))
                }
                Predicate::Neighbours => {
                    let c = need()?;
                    let n = ds.neighbours(c)?;
                    plain(lines(n), json!({ "country": c, "neighbours": n }))
                }
                Predicate::Monogamous => {
                    let m = mapgraph::monogamous(&ds);
                    plain(lines(&m), json!({ "monogamous": m }))
                }
                Predicate::HappyMonogamous => {
                    let pairs: Vec<[String; 2]> =
                        mapgraph::happy_monogamous(&ds).into_iter().map(|(a, b)| [a, b]).collect();
                    plain(
                        lines(pairs.iter().map(|[a, b]| format!("{a} {b}"))),
                        json!({ "pairs": pairs }),
                    )
                }
                Predicate::Attractive => {
                    let pts = mapgraph::attractive_points(&ds);
                    let text = lines(pts.iter().map(|(i, j)| {
                        format!("{i}: {} ({:.4}, {:.4})", join(&j.incident), j.lat, j.lon)
                    }));
                    let arr: Vec<Value> = pts
                        .iter()
                        .map(|(i, j)| json!({ "junction": i, "lat": j.lat, "lon": j.lon, "incident": j.incident }))
                        .collect();
                    plain(text, json!({ "points": arr }))
                }
                Predicate::Theorem1 => {
                    let v = mapgraph::check_theorem1(&ds);
                    let text = if v.is_empty() {
                        "holds: no monogamous country touches an attractive point\n".to_string()
                    } else {
                        lines(v.iter().map(|x| format!("{} touches junction {}", x.country, x.junction)))
                    };
                    plain(text, json!({ "holds": v.is_empty(), "violations": v }))
                }
                Predicate::Friendly => {
                    let f = mapgraph::friendly(&ds);
                    plain(lines(f.iter().map(|(c, r)| format!("{c} {r}"))), json!({ "friendly": f }))
                }
                Predicate::MaxFriendlyRank => {
                    let r = mapgraph::max_friendly_rank(&ds);
                    plain(format!("{r}\n"), json!({ "max_rank": r }))
                }
                Predicate::Tailed => {
                    let (tailed, rest) = mapgraph::tailed_partition(&ds);
                    plain(
                        format!("tailed ({}): {}\nuntailed ({}): {}\n", tailed.len(), join(&tailed), rest.len(), join(&rest)),
                        json!({ "tailed": tailed, "untailed": rest }),
                    )
                }
                Predicate::Nearest => {
                    let c = need()?;
                    let pts = mapgraph::nearest_attractive_points(&ds, c, *k)?;
                    let text = lines(pts.iter().map(|p| {
                        format!("{:.1} km  junction {}: {}", p.distance_km, p.junction, join(&p.incident))
                    }));
                    plain(text, json!({ "country": c, "points": pts }))
                }
            }
        }
        MapCmd::Color { data } => {
            let colors = mapgraph::four_color(&dataset(data)?)?;
            plain(lines(colors.iter().map(|(c, k)| format!("{c} {k}"))), json!({ "colors": colors }))
        }
        MapCmd::Validate { data } => {
            let raw = match data {
                None => None,
                Some(p) => Some(serde_json::from_str::<mapgraph::RawDataset>(&read_input(&p.to_string_lossy())?)?),
            };
            let problems = raw.as_ref().map(mapgraph::validate).unwrap_or_default();
            let out = plain(
                if problems.is_empty() { "valid\n".into() } else { lines(&problems) },
                json!({ "valid": problems.is_empty(), "problems": problems }),
            );
            return Ok(if problems.is_empty() { Ok(out) } else { Err(Rejected(out)) });
        }
    };
    Ok(Ok(out))
}

fn join<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    items.into_iter().map(String::as_str).collect::<Vec<_>>().join(" ")
}
