//! Command-line front end.
//!
//! Exit codes: 0 for yes or valid, 1 for no, invalid or unreadable input,
//! 2 for inconclusive or timed out, 64 for usage errors. Documents go to
//! stdout (or `--output`), diagnostics to stderr. A path of `-` means stdin
//! or stdout.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::{json, Value};

use crate::dp::{solve_bounded_dtw, BigVertexSpec, DpOptions, DtwAnswer};
use crate::dtw::{
    check_decomposition, check_nice, compute_decomposition, decompose_with_root, parse_decomposition,
    serialize_decomposition, width, DecompOutcome,
};
use crate::format::{parse_instance, serialize_instance, SolutionDoc, Status};
use crate::generators::{gen_cyl_grid, gen_cyl_wall, gen_random, gen_sep_fixture, rng, AttachSpec};
use crate::graph::{denormalize_linkage, normalize, prune_useless, verify_linkage, DiGraph, Instance, Linkage, Vertex};
use crate::hardness::{
    construct_witness, extract_assignment, reduce_sat, verify_switch_lemma, CnfFormula, SwitchSetup,
};
use crate::oracle::{brute_force_solve, OracleAnswer, SearchBudget};
use crate::pipeline::{reduce, serialize_reduction, solve_3hi, PipelineAnswer, PipelineConfig};
use crate::separation::{Separation, Side};
use crate::special::{solve_special, KstcInstance, SpecialAnswer};
use crate::uncross::{check_uncrossed, crosses, quadrants, uncross, MajorityTags, Uncrossed};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "dirlink", version, about = "Directed disjoint paths with vertex congestion")]
struct Cli {
    /// Emit a single JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide an instance.
    Solve(SolveArgs),
    /// Generate a graph or instance.
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Directed tree decompositions.
    Dtw {
        #[command(subcommand)]
        what: DtwCmd,
    },
    /// Compile a 3-CNF formula into a routing instance.
    ReduceSat(ReduceArgs),
    /// Check the reduction on a formula through witnesses or the oracle.
    VerifyReduction(VerifyReductionArgs),
    /// Enumerate all routings of one switch gadget.
    VerifySwitch(SwitchArgs),
    /// Replace terminals by fresh degree-one terminals.
    Normalize(IoArgs),
    /// Show how two separations of an instance are uncrossed.
    UncrossDebug(UncrossArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Brute,
    Dtw,
    Pipeline,
    Special,
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input file, `-` for stdin.
    #[arg(default_value = "-")]
    input: String,
    /// Output file, `-` for stdout.
    #[arg(short, long, default_value = "-")]
    output: String,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Largest bag size tried by `dtw` and `pipeline`.
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    /// Smallest far interior of a contracted separation.
    #[arg(long, default_value_t = 1)]
    min_far: usize,
    /// Write the reduced graph and routing tables to this file.
    #[arg(long)]
    emit_reduction: Option<String>,
    /// Node budget of the exhaustive search.
    #[arg(long, default_value_t = 50_000_000)]
    max_nodes: u64,
    /// Time budget of the exhaustive search in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Largest vertex count `auto` hands to the exhaustive search.
    #[arg(long, default_value_t = 60)]
    brute_cap: usize,
    /// Largest dynamic-programming table before giving up.
    #[arg(long, default_value_t = 1_000_000)]
    max_states: usize,
}

#[derive(Subcommand, Debug)]
enum GenCmd {
    /// Cylindrical grid of order k.
    Grid(GridArgs),
    /// Cylindrical wall of order k.
    Wall(GridArgs),
    /// Random digraph with random terminal pairs.
    Random(RandomArgs),
    /// Wall attached to a random terminal head through two vertices.
    SepFixture(FixtureArgs),
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    k: usize,
    #[arg(short, long, default_value = "-")]
    output: String,
}

#[derive(Args, Debug)]
struct RandomArgs {
    #[arg(long)]
    n: usize,
    /// Arc probability.
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    #[arg(long, default_value_t = 2)]
    pairs: usize,
    #[arg(long, default_value_t = 2)]
    c: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, default_value = "-")]
    output: String,
}

#[derive(Args, Debug)]
struct FixtureArgs {
    /// Wall order.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, default_value = "-")]
    output: String,
}

#[derive(Subcommand, Debug)]
enum DtwCmd {
    /// Search for a decomposition with small bags.
    Compute {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
    },
    /// Check a decomposition against the graph of an instance.
    Check {
        instance: String,
        decomposition: String,
    },
    /// Report the width of a decomposition.
    Width { decomposition: String },
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = 2)]
    c: usize,
    /// Reject one-sided variables instead of adding tautologies.
    #[arg(long)]
    strict: bool,
    /// Write one `<vertex> <label>` line per vertex to this file.
    #[arg(long)]
    map: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyReductionArgs {
    #[arg(default_value = "-")]
    input: String,
    #[arg(long, default_value_t = 2)]
    c: usize,
    #[arg(long)]
    strict: bool,
    /// Seconds the exhaustive search may spend on an unsatisfiable formula.
    #[arg(long, default_value_t = 0.0)]
    oracle_secs: f64,
}

#[derive(Args, Debug)]
struct SwitchArgs {
    #[arg(long, default_value_t = 2)]
    c: usize,
    /// Blue paths entering at b (default c).
    #[arg(long)]
    b_paths: Option<usize>,
    /// Blue paths entering at x (default c - 1).
    #[arg(long)]
    x_paths: Option<usize>,
    /// Vertex label no path may use; repeatable.
    #[arg(long)]
    ban: Vec<String>,
    /// Only enumerate shortcut-free paths.
    #[arg(long)]
    minimal: bool,
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(Args, Debug)]
struct UncrossArgs {
    #[arg(default_value = "-")]
    input: String,
    /// A side of the first separation, 1-based comma list.
    #[arg(long, value_delimiter = ',')]
    a1: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    b1: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    a2: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    b2: Vec<usize>,
    /// Far-side markers of the two separations (default: chosen automatically).
    #[arg(long, value_delimiter = ',')]
    markers: Vec<usize>,
}

/// Standard streams, replaceable in tests.
pub struct Io<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// A finished command: its document in both renderings and the exit code.
struct Report {
    text: String,
    json: Value,
    code: i32,
}

enum Fail {
    Usage(String),
    Input(String),
}

type Res<T> = Result<T, Fail>;

fn input_err(e: impl std::fmt::Display) -> Fail {
    Fail::Input(e.to_string())
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_YES };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    if let Some(j) = cli.jobs {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match dispatch(&cli, io) {
        Ok((report, output)) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&report.json).unwrap() + "\n"
            } else {
                report.text
            };
            match write_output(&output, &body, io) {
                Ok(()) => report.code,
                Err(Fail::Input(m)) | Err(Fail::Usage(m)) => {
                    let _ = writeln!(io.stderr, "error: {m}");
                    EXIT_NO
                }
            }
        }
        Err(Fail::Usage(m)) => {
            let _ = writeln!(io.stderr, "usage error: {m}");
            EXIT_USAGE
        }
        Err(Fail::Input(m)) => {
            let _ = writeln!(io.stderr, "error: {m}");
            EXIT_NO
        }
    }
}

fn read_input(path: &str, io: &mut Io) -> Res<String> {
    if path == "-" {
        let mut s = String::new();
        io.stdin.read_to_string(&mut s).map_err(|e| Fail::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| Fail::Input(format!("{path}: {e}")))
    }
}

fn write_output(path: &str, body: &str, io: &mut Io) -> Res<()> {
    if path == "-" {
        io.stdout.write_all(body.as_bytes()).map_err(input_err)
    } else {
        fs::write(path, body).map_err(|e| Fail::Input(format!("{path}: {e}")))
    }
}

fn read_instance(path: &str, io: &mut Io) -> Res<Instance> {
    parse_instance(&read_input(path, io)?).map_err(|e| Fail::Input(format!("{path}: {e}")))
}

fn dispatch(cli: &Cli, io: &mut Io) -> Res<(Report, String)> {
    let stdout = "-".to_string();
    match &cli.cmd {
        Cmd::Solve(a) => Ok((solve(a, io)?, a.io.output.clone())),
        Cmd::Gen { what } => gen(what),
        Cmd::Dtw { what } => dtw(what, io),
        Cmd::ReduceSat(a) => Ok((reduce_cmd(a, io)?, a.io.output.clone())),
        Cmd::VerifyReduction(a) => Ok((verify_reduction(a, io)?, stdout)),
        Cmd::VerifySwitch(a) => Ok((verify_switch(a)?, stdout)),
        Cmd::Normalize(a) => {
            let inst = read_instance(&a.input, io)?;
            let text = serialize_instance(&normalize(&inst));
            Ok((instance_report(text), a.output.clone()))
        }
        Cmd::UncrossDebug(a) => Ok((uncross_debug(a, io)?, stdout)),
    }
}

fn instance_report(text: String) -> Report {
    Report {
        json: json!({ "instance": text }),
        text,
        code: EXIT_YES,
    }
}

fn status_code(s: Status) -> i32 {
    match s {
        Status::Yes => EXIT_YES,
        Status::No | Status::Infeasible => EXIT_NO,
        Status::Inconclusive | Status::Timeout => EXIT_INCONCLUSIVE,
    }
}

struct Decided {
    status: Status,
    method: &'static str,
    linkage: Option<Linkage>,
    nodes: u64,
}

impl Decided {
    fn yes(method: &'static str, l: Linkage, nodes: u64) -> Self {
        Decided { status: Status::Yes, method, linkage: Some(l), nodes }
    }

    fn other(method: &'static str, status: Status, nodes: u64) -> Self {
        Decided { status, method, linkage: None, nodes }
    }
}

fn solve(a: &SolveArgs, io: &mut Io) -> Res<Report> {
    let inst = read_instance(&a.io.input, io)?;
    let start = Instant::now();
    let cfg = PipelineConfig {
        kmax: a.kmax,
        min_far: a.min_far,
        dp: DpOptions { c: 2, max_states: a.max_states },
    };
    if let Some(path) = &a.emit_reduction {
        emit_reduction(&inst, &cfg, path)?;
    }
    let d = match a.method {
        Method::Brute => run_brute(&inst, a),
        Method::Dtw => run_dtw(&inst, a, io)?,
        Method::Special => {
            run_special(&inst).ok_or_else(|| Fail::Usage("instance does not have a supported special shape".into()))?
        }
        Method::Pipeline => run_pipeline(&inst, &cfg, io)?,
        Method::Auto => {
            let mut d = run_special(&inst);
            if d.is_none() && inst.c == 2 && inst.k() <= 3 {
                d = Some(run_pipeline(&inst, &cfg, io)?).filter(|d| d.status != Status::Inconclusive);
            }
            match d {
                Some(d) => d,
                None if inst.g.n() <= a.brute_cap => run_brute(&inst, a),
                None => Decided::other("auto", Status::Inconclusive, 0),
            }
        }
    };
    let doc = SolutionDoc::new(d.status, d.method, d.linkage.as_ref(), d.nodes, start.elapsed());
    Ok(Report {
        text: doc.to_text(),
        json: serde_json::to_value(&doc).unwrap(),
        code: status_code(d.status),
    })
}

fn run_brute(inst: &Instance, a: &SolveArgs) -> Decided {
    let budget = SearchBudget {
        max_nodes: a.max_nodes,
        time_limit: a.time_limit.map(Duration::from_secs_f64),
    };
    let out = brute_force_solve(inst, budget);
    match out.answer {
        OracleAnswer::Yes(l) => Decided::yes("brute", l, out.nodes),
        OracleAnswer::No => Decided::other("brute", Status::No, out.nodes),
        OracleAnswer::Timeout => Decided::other("brute", Status::Timeout, out.nodes),
    }
}

fn run_special(inst: &Instance) -> Option<Decided> {
    let kstc = KstcInstance::from_instance(inst).ok()?;
    let out = solve_special(&kstc)?;
    Some(match out.answer {
        SpecialAnswer::Yes(l) => Decided::yes("special", l, out.rounds as u64),
        SpecialAnswer::No => Decided::other("special", Status::No, out.rounds as u64),
    })
}

fn run_dtw(inst: &Instance, a: &SolveArgs, io: &mut Io) -> Res<Decided> {
    let norm = normalize(inst);
    let Some(pruned) = prune_useless(&norm) else {
        return Ok(Decided::other("dtw", Status::No, 0));
    };
    let p = &pruned.inst;
    let d = match decompose_with_root(&p.g, &p.terminals(), a.kmax) {
        DecompOutcome::Decomposition(d) => d,
        DecompOutcome::Certificate(c) => {
            let _ = writeln!(io.stderr, "no decomposition with bags of at most {} vertices", c.kmax);
            return Ok(Decided::other("dtw", Status::Inconclusive, 0));
        }
    };
    let opts = DpOptions { c: inst.c, max_states: a.max_states };
    match solve_bounded_dtw(p, &BigVertexSpec::none(4), &d, opts) {
        Ok(DtwAnswer::Yes(l)) => {
            let l = denormalize_linkage(&pruned.lift(&l));
            verify_linkage(inst, &l).map_err(input_err)?;
            Ok(Decided::yes("dtw", l, 0))
        }
        Ok(DtwAnswer::No) => Ok(Decided::other("dtw", Status::No, 0)),
        Err(crate::dp::DpError::StateBudget(b)) => {
            let _ = writeln!(io.stderr, "a table exceeded {b} entries");
            Ok(Decided::other("dtw", Status::Inconclusive, 0))
        }
        Err(e) => Err(input_err(e)),
    }
}

fn run_pipeline(inst: &Instance, cfg: &PipelineConfig, io: &mut Io) -> Res<Decided> {
    let rep = solve_3hi(inst, cfg).map_err(|e| match e {
        crate::pipeline::PipelineError::Shape { .. } => Fail::Usage(e.to_string()),
        other => Fail::Input(other.to_string()),
    })?;
    let _ = writeln!(
        io.stderr,
        "pipeline: {} order-1 contractions, {} separations, reduced to {} vertices, width {}",
        rep.one_seps,
        rep.separations,
        rep.reduced_n,
        rep.width.map_or("-".to_string(), |w| w.to_string())
    );
    Ok(match rep.answer {
        PipelineAnswer::Yes(l) => Decided::yes("pipeline", l, 0),
        PipelineAnswer::No => Decided::other("pipeline", Status::No, 0),
        PipelineAnswer::Inconclusive(why) => {
            let _ = writeln!(io.stderr, "pipeline inconclusive: {why}");
            Decided::other("pipeline", Status::Inconclusive, 0)
        }
    })
}

fn emit_reduction(inst: &Instance, cfg: &PipelineConfig, path: &str) -> Res<()> {
    let text = match prune_useless(&normalize(inst)) {
        None => "# no vertex lies on a source-sink walk\n".to_string(),
        Some(p) => {
            let r = reduce(&p.inst, cfg).map_err(input_err)?;
            serialize_reduction(&r.red, &r.tables)
        }
    };
    fs::write(path, text).map_err(|e| Fail::Input(format!("{path}: {e}")))
}

fn graph_instance(g: DiGraph) -> Instance {
    Instance::new(g, Vec::new(), 1)
}

fn gen(what: &GenCmd) -> Res<(Report, String)> {
    let (inst, output) = match what {
        GenCmd::Grid(a) | GenCmd::Wall(a) if a.k == 0 => return Err(Fail::Usage("--k must be positive".into())),
        GenCmd::Grid(a) => (graph_instance(gen_cyl_grid(a.k).g), &a.output),
        GenCmd::Wall(a) => (graph_instance(gen_cyl_wall(a.k).g), &a.output),
        GenCmd::Random(a) => {
            if !(0.0..=1.0).contains(&a.p) || a.n < 2 || a.c == 0 {
                return Err(Fail::Usage("need --n >= 2, --p in [0, 1] and --c >= 1".into()));
            }
            let g = gen_random(a.n, a.p, a.seed);
            let mut r = rng(a.seed ^ 0x7e57);
            let pairs = (0..a.pairs)
                .map(|_| {
                    let s = r.gen_range(0..a.n);
                    let t = (s + r.gen_range(1..a.n)) % a.n;
                    (s, t)
                })
                .collect();
            (Instance::new(g, pairs, a.c), &a.output)
        }
        GenCmd::SepFixture(a) => {
            if a.k < 2 || a.pairs == 0 {
                return Err(Fail::Usage("need --k >= 2 and --pairs >= 1".into()));
            }
            let spec = AttachSpec::random(a.k, a.pairs, a.seed);
            (gen_sep_fixture(a.k, &spec).map_err(input_err)?, &a.output)
        }
    };
    Ok((instance_report(serialize_instance(&inst)), output.clone()))
}

fn dtw(what: &DtwCmd, io: &mut Io) -> Res<(Report, String)> {
    match what {
        DtwCmd::Compute { io: files, kmax } => {
            if *kmax == 0 {
                return Err(Fail::Usage("--kmax must be positive".into()));
            }
            let inst = read_instance(&files.input, io)?;
            let rep = match compute_decomposition(&inst.g, *kmax) {
                DecompOutcome::Decomposition(d) => {
                    let text = serialize_decomposition(&d);
                    let w = width(&d).width;
                    Report {
                        json: json!({ "status": "decomposition", "width": w, "decomposition": text }),
                        text,
                        code: EXIT_YES,
                    }
                }
                DecompOutcome::Certificate(c) => {
                    let list = |v: &[Vertex]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
                    Report {
                        text: format!(
                            "status no-decomposition\nkmax {}\nregion {}\nguard {}\n",
                            c.kmax,
                            list(&c.region),
                            list(&c.guard)
                        ),
                        json: json!({
                            "status": "no-decomposition",
                            "kmax": c.kmax,
                            "region": c.region.iter().map(|v| v + 1).collect::<Vec<_>>(),
                            "guard": c.guard.iter().map(|v| v + 1).collect::<Vec<_>>(),
                        }),
                        code: EXIT_INCONCLUSIVE,
                    }
                }
            };
            Ok((rep, files.output.clone()))
        }
        DtwCmd::Check { instance, decomposition } => {
            let inst = read_instance(instance, io)?;
            let d = parse_decomposition(&read_input(decomposition, io)?).map_err(input_err)?;
            let verdict = check_decomposition(&inst.g, &d)
                .map_err(|e| e.to_string())
                .and_then(|()| check_nice(&inst.g, &d).map_err(|e| format!("not nice: {e}")));
            let rep = match verdict {
                Ok(()) => Report {
                    text: format!("valid\nwidth {}\n", width(&d).width),
                    json: json!({ "valid": true, "width": width(&d).width }),
                    code: EXIT_YES,
                },
                Err(why) => Report {
                    text: format!("invalid: {why}\n"),
                    json: json!({ "valid": false, "reason": why }),
                    code: EXIT_NO,
                },
            };
            Ok((rep, "-".into()))
        }
        DtwCmd::Width { decomposition } => {
            let d = parse_decomposition(&read_input(decomposition, io)?).map_err(input_err)?;
            let w = width(&d);
            Ok((
                Report {
                    text: format!("width {}\nnode {}\n", w.width, w.node),
                    json: json!({ "width": w.width, "node": w.node }),
                    code: EXIT_YES,
                },
                "-".into(),
            ))
        }
    }
}

fn read_formula(path: &str, strict: bool, io: &mut Io) -> Res<CnfFormula> {
    let phi = CnfFormula::parse_dimacs(&read_input(path, io)?).map_err(|e| Fail::Input(format!("{path}: {e}")))?;
    if strict {
        Ok(phi)
    } else {
        Ok(phi.balance_polarities())
    }
}

fn reduce_cmd(a: &ReduceArgs, io: &mut Io) -> Res<Report> {
    let phi = read_formula(&a.io.input, a.strict, io)?;
    let (inst, rmap) = reduce_sat(&phi, a.c).map_err(|e| Fail::Usage(e.to_string()))?;
    if let Some(path) = &a.map {
        let mut text = String::new();
        for (v, label) in rmap.labels.iter().enumerate() {
            writeln!(text, "{} {label}", v + 1).unwrap();
        }
        fs::write(path, text).map_err(|e| Fail::Input(format!("{path}: {e}")))?;
    }
    Ok(instance_report(serialize_instance(&inst)))
}

fn verify_reduction(a: &VerifyReductionArgs, io: &mut Io) -> Res<Report> {
    let phi = read_formula(&a.input, a.strict, io)?;
    let (inst, rmap) = reduce_sat(&phi, a.c).map_err(|e| Fail::Usage(e.to_string()))?;
    if phi.n > 20 {
        return Err(Fail::Usage(format!("{} variables is too many to enumerate assignments", phi.n)));
    }
    let satisfying: Vec<Vec<bool>> = (0u32..1 << phi.n)
        .map(|mask| (0..phi.n).map(|i| mask >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|b| phi.satisfied_by(b))
        .collect();
    let size = json!({ "vertices": inst.g.n(), "arcs": inst.g.m(), "pairs": inst.k(), "c": inst.c });
    if !satisfying.is_empty() {
        let mut failures = Vec::new();
        for beta in &satisfying {
            let checked = construct_witness(&inst, &phi, beta, &rmap)
                .map_err(|e| e.to_string())
                .and_then(|l| verify_linkage(&inst, &l).map(|()| l).map_err(|e| e.to_string()))
                .and_then(|l| extract_assignment(&l, &phi, &rmap).map_err(|e| e.to_string()))
                .and_then(|back| if phi.satisfied_by(&back) { Ok(()) } else { Err("extracted assignment falsifies the formula".into()) });
            if let Err(e) = checked {
                failures.push(e);
            }
        }
        let ok = failures.is_empty();
        return Ok(Report {
            text: format!(
                "satisfiable\nassignments {}\nwitness failures {}\n{}",
                satisfying.len(),
                failures.len(),
                failures.iter().map(|f| format!("failure {f}\n")).collect::<String>()
            ),
            json: json!({ "satisfiable": true, "assignments": satisfying.len(), "failures": failures, "instance": size }),
            code: if ok { EXIT_YES } else { EXIT_NO },
        });
    }
    if a.oracle_secs <= 0.0 {
        return Ok(Report {
            text: "unsatisfiable\noracle skipped\n".into(),
            json: json!({ "satisfiable": false, "oracle": "skipped", "instance": size }),
            code: EXIT_INCONCLUSIVE,
        });
    }
    let budget = SearchBudget {
        max_nodes: u64::MAX,
        time_limit: Some(Duration::from_secs_f64(a.oracle_secs)),
    };
    let out = brute_force_solve(&inst, budget);
    let (verdict, code) = match out.answer {
        OracleAnswer::No => ("no", EXIT_YES),
        OracleAnswer::Yes(_) => ("yes", EXIT_NO),
        OracleAnswer::Timeout => ("timeout", EXIT_INCONCLUSIVE),
    };
    Ok(Report {
        text: format!("unsatisfiable\noracle {verdict}\nnodes {}\n", out.nodes),
        json: json!({ "satisfiable": false, "oracle": verdict, "nodes": out.nodes, "instance": size }),
        code,
    })
}

fn verify_switch(a: &SwitchArgs) -> Res<Report> {
    if a.c < 2 {
        return Err(Fail::Usage("--c must be at least 2".into()));
    }
    let mut setup = SwitchSetup::standard(a.c);
    setup.b_paths = a.b_paths.unwrap_or(setup.b_paths);
    setup.x_paths = a.x_paths.unwrap_or(setup.x_paths);
    setup.banned = a.ban.clone();
    setup.minimal = a.minimal;
    setup.max_nodes = a.max_nodes.unwrap_or(setup.max_nodes);
    let r = verify_switch_lemma(&setup).map_err(|e| Fail::Usage(e.to_string()))?;
    let mut text = format!(
        "routings {}\n{} violations\nmixed {}\nunprimed {}\nprimed {}\nnodes {}\ncomplete {}\n",
        r.routings, r.violations, r.mixed, r.unprimed, r.primed, r.nodes, r.complete
    );
    if let Some(paths) = &r.counterexample {
        for f in &r.failed {
            writeln!(text, "failed {f}").unwrap();
        }
        for (i, p) in paths.iter().enumerate() {
            let vs: Vec<String> = p.vertices.iter().map(|v| (v + 1).to_string()).collect();
            writeln!(text, "path {}: {}", i + 1, vs.join(" ")).unwrap();
        }
    }
    let code = if r.violations > 0 {
        EXIT_NO
    } else if !r.complete {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_YES
    };
    Ok(Report {
        json: json!({
            "c": r.c, "routings": r.routings, "violations": r.violations, "mixed": r.mixed,
            "unprimed": r.unprimed, "primed": r.primed, "nodes": r.nodes, "complete": r.complete,
            "failed": r.failed,
        }),
        text,
        code,
    })
}

fn one_based(v: &[usize], n: usize) -> Res<Vec<Vertex>> {
    v.iter()
        .map(|&x| {
            if x == 0 || x > n {
                Err(Fail::Usage(format!("vertex {x} out of range 1..={n}")))
            } else {
                Ok(x - 1)
            }
        })
        .collect()
}

fn uncross_debug(a: &UncrossArgs, io: &mut Io) -> Res<Report> {
    let inst = read_instance(&a.input, io)?;
    let g = &inst.g;
    let n = g.n();
    let sep = |a: &[usize], b: &[usize]| -> Res<Separation> {
        Separation::new(g, &one_based(a, n)?, &one_based(b, n)?, Side::A).map_err(|e| Fail::Usage(e.to_string()))
    };
    let s1 = sep(&a.a1, &a.b1)?;
    let s2 = sep(&a.a2, &a.b2)?;
    let terminals = inst.terminals();
    let tags = match one_based(&a.markers, n)?.as_slice() {
        [] => {
            let pick = |s: &Separation, o: &Separation| {
                let far = s.far_interior();
                far.iter().copied().find(|v| o.b.binary_search(v).is_err()).or(far.first().copied())
            };
            match (pick(&s1, &s2), pick(&s2, &s1)) {
                (Some(first), Some(second)) => MajorityTags { first, second },
                _ => return Err(Fail::Usage("a separation has an empty far interior".into())),
            }
        }
        &[first, second] => MajorityTags { first, second },
        _ => return Err(Fail::Usage("--markers takes exactly two vertices".into())),
    };
    let list = |v: &[Vertex]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
    let show = |s: &Separation| format!("A [{}] B [{}] plus {:?} order {}", list(&s.a), list(&s.b), s.plus, s.order());
    let q = quadrants(&s1, &s2);
    let mut text = String::new();
    writeln!(text, "first {}", show(&s1)).unwrap();
    writeln!(text, "second {}", show(&s2)).unwrap();
    writeln!(text, "crossing {}", crosses(&s1, &s2)).unwrap();
    for (name, part) in ["top", "left", "right", "bottom"].iter().zip(q.quadrants()) {
        writeln!(text, "quadrant {name} [{}]", list(part)).unwrap();
    }
    writeln!(text, "markers {} {}", tags.first + 1, tags.second + 1).unwrap();
    let (result, code) = match uncross(g, &s1, &s2, &terminals, tags) {
        Ok(out) => {
            let post = check_uncrossed(g, &s1, &s2, &terminals, tags, &out);
            match &out {
                Uncrossed::Single(s) => writeln!(text, "single {}", show(s)).unwrap(),
                Uncrossed::Pair(x, y) => {
                    writeln!(text, "pair {}", show(x)).unwrap();
                    writeln!(text, "pair {}", show(y)).unwrap();
                }
            }
            match post {
                Ok(()) => {
                    writeln!(text, "postconditions ok").unwrap();
                    ("ok".to_string(), EXIT_YES)
                }
                Err(e) => {
                    writeln!(text, "postconditions violated: {e}").unwrap();
                    (e.to_string(), EXIT_NO)
                }
            }
        }
        Err(e) => {
            writeln!(text, "error {e}").unwrap();
            (e.to_string(), EXIT_NO)
        }
    };
    Ok(Report {
        json: json!({ "crossing": crosses(&s1, &s2), "result": result, "report": text }),
        text,
        code,
    })
}
