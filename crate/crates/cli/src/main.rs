use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fo2inv::dendroid::{class_invariance_experiment, deep_dendroid_similarity, make_dendroid};
use fo2inv::eval::{assignment, EvalError, Evaluator};
use fo2inv::games::{
    counting_game_winner, fo2_game_winner, fo_game_winner_capped, interactive_play, replay, GameError, HumanRole,
    Winner, DEFAULT_GAME_CAP,
};
use fo2inv::locality::{
    build_orders, census, classify_frequent, LocalityError, LocalityParams, Outcome,
};
use fo2inv::solver::{
    check_invariance, check_invariance_brute_force, find_model, normal_form_of_sentence, parse_normal_form,
    scott_normal_form, shrink_model, validity_via_invariance, InvarianceVerdict, NormalForm, SolverError,
};
use fo2inv::{parse_formula_file, parse_structure, print_structure, Formula, Fragment, LinearOrder, Structure};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "fo2inv", version, about = "Order-invariance workbench for two-variable logic")]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, global = true, default_value_t = Format::Tsv)]
    format: Format,
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FragmentArg {
    Fo2,
    Fo,
    C2,
}

impl From<FragmentArg> for Fragment {
    fn from(f: FragmentArg) -> Self {
        match f {
            FragmentArg::Fo2 => Fragment::Fo2,
            FragmentArg::Fo => Fragment::Fo,
            FragmentArg::C2 => Fragment::C2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GameArg {
    Fo,
    Fo2,
    C2,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Spoiler,
    Duplicator,
}

#[derive(Args)]
struct FormulaArgs {
    /// Formula file, one formula per line.
    formula: PathBuf,
    #[arg(long, value_enum, default_value_t = FragmentArg::Fo2)]
    fragment: FragmentArg,
}

#[derive(Args)]
struct LocalityArgs {
    /// Neighbourhood radius.
    #[arg(short = 'k')]
    k: usize,
    /// Degree bound; defaults to the largest degree of the input.
    #[arg(short = 'd')]
    d: Option<usize>,
    /// Explicit constants `m=..,delta=..` instead of the theoretical ones.
    #[arg(long)]
    scaled: Option<String>,
    /// Copies of every pin (use the round count for counting games).
    #[arg(long, default_value_t = 1)]
    count_multiplier: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Parse formulas and report their fragment.
    Parse(FormulaArgs),
    /// Evaluate formulas on a structure.
    Eval {
        structure: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
        /// Values of free variables, e.g. `x=0,y=2`.
        #[arg(long)]
        assign: Option<String>,
    },
    /// Search for a structure on which a sentence depends on the order.
    Invariance {
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long)]
        max_size: usize,
        /// Enumerate all structures and orders instead of using the model search.
        #[arg(long)]
        brute_force: bool,
    },
    /// Decide validity through the reduction to order invariance.
    Validity {
        #[command(flatten)]
        formula: FormulaArgs,
        #[arg(long)]
        max_size: usize,
    },
    /// Print the two-sided normal form used by the invariance check.
    Nf {
        #[command(flatten)]
        formula: FormulaArgs,
        /// Print the one-sided normal form of the sentence itself instead.
        #[arg(long)]
        sentence: bool,
    },
    /// Search for a model of a sentence or of a normal-form file.
    Sat {
        input: PathBuf,
        #[arg(long)]
        max_size: usize,
    },
    /// Shrink a model of a normal form.
    Shrink { nf: PathBuf, model: PathBuf },
    /// Count neighbourhood types.
    Census {
        structure: PathBuf,
        #[arg(short = 'k')]
        k: usize,
    },
    /// Split neighbourhood types into rare and frequent.
    Classify {
        structure: PathBuf,
        #[command(flatten)]
        params: LocalityArgs,
    },
    /// Build the two linear orders and check the transfer properties.
    BuildOrders {
        s0: PathBuf,
        s1: PathBuf,
        #[command(flatten)]
        params: LocalityArgs,
    },
    /// Solve a game between two structures.
    Game {
        #[arg(value_enum)]
        kind: GameArg,
        s0: PathBuf,
        s1: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        /// Play one side interactively on standard input (fo2 only).
        #[arg(long, value_enum)]
        human: Option<RoleArg>,
        /// Write the transcript of an fo2 play to this file.
        #[arg(long)]
        transcript: Option<PathBuf>,
        /// Check that a transcript file replays exactly (fo2 only).
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Bound on the work of the fo game solver.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Dendroid generator and experiments.
    Dendroid {
        #[command(subcommand)]
        command: DendroidCommand,
    },
}

#[derive(Subcommand)]
enum DendroidCommand {
    /// Write the dendroid of depth `n` as a structure file.
    Emit {
        n: usize,
        /// Install the dictionary order of words as `<`.
        #[arg(long)]
        lex: bool,
    },
    /// Evaluate the even zig-zag sentence on many depths and orders.
    Experiment {
        /// Depth range `a..b` (inclusive).
        #[arg(long, default_value = "1..6")]
        depths: String,
        /// Random orders per depth beyond the exhaustive range.
        #[arg(long, default_value_t = 50)]
        orders: usize,
        /// Also search structures up to this size for a non-invariance witness.
        #[arg(long, default_value_t = 0)]
        witness_size: usize,
    },
    /// Quantifier-rank games between deep dendroids.
    Similarity {
        #[arg(short = 'q', default_value_t = 1)]
        q: usize,
        #[arg(long)]
        cap: Option<u64>,
    },
}

/// Exit codes: 0 success, 1 negative verdict, 2 usage or input error, 3 cap exceeded.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Cap(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Cap(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Cap(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            _ => usage(e),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Eval(inner) => inner.into(),
            _ => usage(e),
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::CapExceeded { .. } => CliError::Cap(e.to_string()),
            GameError::Locality(inner) => inner.into(),
            _ => usage(e),
        }
    }
}

impl From<LocalityError> for CliError {
    fn from(e: LocalityError) -> Self {
        match e {
            LocalityError::CapExceeded(_) => CliError::Cap(e.to_string()),
            _ => usage(e),
        }
    }
}

/// Report text and whether the verdict was positive.
struct Report {
    text: String,
    json: Value,
    ok: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_structure(path: &Path) -> Result<Structure, CliError> {
    parse_structure(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_formulas(args: &FormulaArgs) -> Result<Vec<Formula>, CliError> {
    let text = read(&args.formula)?;
    let fs = parse_formula_file(&text, args.fragment.into(), None)
        .map_err(|e| usage(format!("{}: {e}", args.formula.display())))?;
    if fs.is_empty() {
        return Err(usage(format!("{}: no formulas", args.formula.display())));
    }
    Ok(fs)
}

fn order_text(o: &LinearOrder) -> String {
    o.sequence().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_scaled(text: &str) -> Result<(u64, usize), CliError> {
    let mut m = None;
    let mut delta = None;
    for part in text.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("--scaled expects m=..,delta=.., found `{part}`")))?;
        let bad = |_| usage(format!("--scaled: bad value `{value}` for {key}"));
        match key.trim() {
            "m" => m = Some(value.trim().parse::<u64>().map_err(bad)?),
            "delta" => delta = Some(value.trim().parse::<usize>().map_err(bad)?),
            other => return Err(usage(format!("--scaled: unknown key `{other}`"))),
        }
    }
    match (m, delta) {
        (Some(m), Some(delta)) => Ok((m, delta)),
        _ => Err(usage("--scaled needs both m and delta")),
    }
}

fn locality_params(args: &LocalityArgs, structures: &[&Structure]) -> Result<LocalityParams, CliError> {
    let d = args
        .d
        .unwrap_or_else(|| structures.iter().map(|s| s.without_orders().degree()).max().unwrap_or(0));
    let params = match &args.scaled {
        Some(text) => {
            let (m, delta) = parse_scaled(text)?;
            LocalityParams::scaled(args.k, d, m, delta)
        }
        None => LocalityParams::paper(args.k, d),
    };
    Ok(params.with_count_multiplier(args.count_multiplier))
}

fn parse_assignment(text: &str, n: usize) -> Result<Vec<(fo2inv::Var, usize)>, CliError> {
    let mut pairs = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| usage(format!("--assign expects var=element, found `{part}`")))?;
        let e: usize = value
            .trim()
            .parse()
            .map_err(|_| usage(format!("--assign: `{value}` is not an element")))?;
        if e >= n {
            return Err(usage(format!("--assign: element {e} out of range 0..{n}")));
        }
        pairs.push((name.trim().to_string(), e));
    }
    let refs: Vec<(&str, usize)> = pairs.iter().map(|(n, e)| (n.as_str(), *e)).collect();
    Ok(assignment(&refs))
}

fn verdict_report(phi: &Formula, v: &InvarianceVerdict) -> (String, Value, bool) {
    match v {
        InvarianceVerdict::NotInvariant {
            structure,
            order0,
            order1,
        } => {
            let mut text = format!("not-invariant\t{phi}\n");
            text.push_str(&print_structure(structure));
            let _ = writeln!(text, "order0 : {}", order_text(order0));
            let _ = writeln!(text, "order1 : {}", order_text(order1));
            let json = json!({
                "formula": phi.to_string(),
                "verdict": "not-invariant",
                "structure": print_structure(structure),
                "order0": order0.sequence(),
                "order1": order1.sequence(),
            });
            (text, json, false)
        }
        InvarianceVerdict::InvariantUpTo {
            max_size,
            completeness_bound,
        } => (
            format!("invariant-up-to\t{max_size}\t{phi}\n"),
            json!({
                "formula": phi.to_string(),
                "verdict": "invariant-up-to",
                "max_size": max_size,
                "completeness_bound": completeness_bound.to_string(),
            }),
            true,
        ),
    }
}

fn run_game(
    kind: GameArg,
    a0: &Structure,
    a1: &Structure,
    k: usize,
    human: Option<RoleArg>,
    transcript: Option<&Path>,
    replay_path: Option<&Path>,
    cap: Option<u64>,
) -> Result<Report, CliError> {
    if let Some(path) = replay_path {
        if !matches!(kind, GameArg::Fo2) {
            return Err(usage("--replay is only available for fo2 games"));
        }
        let t = replay(a0, a1, k, &read(path)?)?;
        return Ok(Report {
            text: format!("replay ok\twinner {}\n", t.winner),
            json: json!({ "replay": "ok", "winner": t.winner.to_string() }),
            ok: t.winner == Winner::Duplicator,
        });
    }
    if human.is_some() || transcript.is_some() {
        if !matches!(kind, GameArg::Fo2) {
            return Err(usage("interactive play is only available for fo2 games"));
        }
        let role = match human {
            Some(RoleArg::Spoiler) => HumanRole::Spoiler,
            Some(RoleArg::Duplicator) => HumanRole::Duplicator,
            None => HumanRole::Nobody,
        };
        let stdin = io::stdin();
        let mut input = stdin.lock();
        let mut output = io::stderr();
        let t = interactive_play(a0, a1, k, role, &mut input as &mut dyn BufRead, &mut output)?;
        if let Some(path) = transcript {
            std::fs::write(path, t.to_text()).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        }
        return Ok(Report {
            text: t.to_text(),
            json: json!({ "transcript": t.lines, "winner": t.winner.to_string() }),
            ok: t.winner == Winner::Duplicator,
        });
    }
    let w = match kind {
        GameArg::Fo => fo_game_winner_capped(a0, a1, k, cap.unwrap_or(DEFAULT_GAME_CAP))?,
        GameArg::Fo2 => fo2_game_winner(a0, a1, k)?,
        GameArg::C2 => counting_game_winner(a0, a1, k)?,
    };
    Ok(Report {
        text: format!("{w}\n"),
        json: json!({ "winner": w.to_string(), "rounds": k }),
        ok: w == Winner::Duplicator,
    })
}

fn parse_depths(text: &str) -> Result<std::ops::RangeInclusive<usize>, CliError> {
    let bad = || usage(format!("--depths expects a..b, found `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.trim_start_matches('=');
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(usage(format!("--depths needs 1 <= a <= b, found `{text}`")));
    }
    Ok(a..=b)
}

fn run_dendroid(cmd: DendroidCommand, seed: u64) -> Result<Report, CliError> {
    match cmd {
        DendroidCommand::Emit { n, lex } => {
            let d = make_dendroid(n).map_err(usage)?;
            let s = if lex {
                d.ordered(&d.lex_order()).map_err(usage)?
            } else {
                d.structure.clone()
            };
            let text = print_structure(&s);
            Ok(Report {
                json: json!({ "depth": n, "structure": text }),
                text,
                ok: true,
            })
        }
        DendroidCommand::Experiment {
            depths,
            orders,
            witness_size,
        } => {
            let range = parse_depths(&depths)?;
            let report = class_invariance_experiment(range, orders, seed, witness_size).map_err(usage)?;
            let mut text = report.to_tsv();
            let mut witness_json = Value::Null;
            let mut ok = report.consistent();
            if let Some(v) = &report.witness {
                let (wt, wj, found) = verdict_report(&fo2inv::dendroid::phi_even_zigzag(), v);
                text.push_str("# witness\n");
                for line in wt.lines() {
                    let _ = writeln!(text, "# {line}");
                }
                witness_json = wj;
                ok &= !found;
            }
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "depth": r.depth,
                        "order": r.order_id,
                        "truth": r.truth,
                        "parity": r.parity.to_string(),
                    })
                })
                .collect();
            Ok(Report {
                text,
                json: json!({ "rows": rows, "consistent": report.consistent(), "witness": witness_json }),
                ok,
            })
        }
        DendroidCommand::Similarity { q, cap } => {
            let report = deep_dendroid_similarity(q, cap).map_err(|e| match e {
                fo2inv::dendroid::DendroidError::Game(g) => CliError::from(g),
                other => usage(other),
            })?;
            if report.rows.iter().any(|r| r.expected.is_some() && r.winner.is_none()) {
                return Err(CliError::Cap(format!(
                    "game search exceeded its cap\n{}",
                    report.to_tsv().trim_end()
                )));
            }
            let rows: Vec<Value> = report
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "depths": [r.depths.0, r.depths.1],
                        "rounds": r.rounds,
                        "winner": r.winner.map(|w| w.to_string()),
                        "expected": r.expected.map(|w| w.to_string()),
                    })
                })
                .collect();
            Ok(Report {
                text: report.to_tsv(),
                json: json!({ "rows": rows, "passed": report.passed() }),
                ok: report.passed(),
            })
        }
    }
}

fn load_nf_or_sentence(text: &str) -> Result<NormalForm, CliError> {
    if let Ok(nf) = parse_normal_form(text) {
        return Ok(nf);
    }
    let fs = parse_formula_file(text, Fragment::Fo2, None).map_err(usage)?;
    let [phi] = &fs[..] else {
        return Err(usage("expected a normal form or exactly one sentence"));
    };
    Ok(normal_form_of_sentence(phi)?)
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Parse(args) => {
            let fs = load_formulas(&args)?;
            let mut text = String::from("formula\tquantifier_rank\tcounting\torders\n");
            let mut items = Vec::new();
            for f in &fs {
                let r = f.analyze();
                let orders: Vec<&str> = r.order_symbols_used.iter().map(String::as_str).collect();
                let _ = writeln!(
                    text,
                    "{f}\t{}\t{}\t{}",
                    r.quantifier_rank,
                    r.uses_counting,
                    orders.join(",")
                );
                items.push(json!({ "formula": f.to_string(), "analysis": r }));
            }
            Ok(Report {
                text,
                json: Value::Array(items),
                ok: true,
            })
        }
        Command::Eval {
            structure,
            formula,
            assign,
        } => {
            let s = load_structure(&structure)?;
            let fs = load_formulas(&formula)?;
            let env = parse_assignment(assign.as_deref().unwrap_or(""), s.size())?;
            let mut text = String::new();
            let mut items = Vec::new();
            let mut all = true;
            for f in &fs {
                let v = Evaluator::new(f).eval(&s, &[], &env)?;
                all &= v;
                let _ = writeln!(text, "{v}\t{f}");
                items.push(json!({ "formula": f.to_string(), "value": v }));
            }
            Ok(Report {
                text,
                json: Value::Array(items),
                ok: all,
            })
        }
        Command::Invariance {
            formula,
            max_size,
            brute_force,
        } => {
            let fs = load_formulas(&formula)?;
            let mut text = String::new();
            let mut items = Vec::new();
            let mut ok = true;
            for f in &fs {
                let v = if brute_force {
                    check_invariance_brute_force(f, max_size)?
                } else {
                    check_invariance(f, max_size)?
                };
                let (t, j, good) = verdict_report(f, &v);
                text.push_str(&t);
                items.push(j);
                ok &= good;
            }
            Ok(Report {
                text,
                json: Value::Array(items),
                ok,
            })
        }
        Command::Validity { formula, max_size } => {
            let fs = load_formulas(&formula)?;
            let mut text = String::new();
            let mut items = Vec::new();
            let mut ok = true;
            for f in &fs {
                let valid = validity_via_invariance(f, max_size)?;
                ok &= valid;
                let word = if valid { "valid" } else { "not-valid" };
                let _ = writeln!(text, "{word}\t{f}");
                items.push(json!({ "formula": f.to_string(), "valid": valid }));
            }
            Ok(Report {
                text,
                json: Value::Array(items),
                ok,
            })
        }
        Command::Nf { formula, sentence } => {
            let fs = load_formulas(&formula)?;
            let mut text = String::new();
            let mut items = Vec::new();
            for f in &fs {
                let nf = if sentence {
                    normal_form_of_sentence(f)?
                } else {
                    scott_normal_form(f)?
                };
                text.push_str(&nf.to_text());
                items.push(json!({ "formula": f.to_string(), "normal_form": nf.to_text(), "size": nf.size() }));
            }
            Ok(Report {
                text,
                json: Value::Array(items),
                ok: true,
            })
        }
        Command::Sat { input, max_size } => {
            let nf = load_nf_or_sentence(&read(&input)?)?;
            let search = find_model(&nf, max_size)?;
            Ok(match search.model {
                Some(model) => {
                    let text = format!("sat\n{}", print_structure(&model));
                    Report {
                        json: json!({ "sat": true, "model": print_structure(&model) }),
                        text,
                        ok: true,
                    }
                }
                None => Report {
                    text: format!("unsat-up-to\t{max_size}\n"),
                    json: json!({ "sat": false, "max_size": max_size, "complete": search.complete }),
                    ok: false,
                },
            })
        }
        Command::Shrink { nf, model } => {
            let nf = parse_normal_form(&read(&nf)?)?;
            let model = load_structure(&model)?;
            let (small, trace) = shrink_model(&nf, &model)?;
            let mut text = trace.to_text(model.signature());
            text.push_str(&print_structure(&small));
            Ok(Report {
                json: json!({
                    "input_size": model.size(),
                    "output_size": small.size(),
                    "kept": trace.kept,
                    "repairs": trace.repairs.len(),
                    "structure": print_structure(&small),
                }),
                text,
                ok: true,
            })
        }
        Command::Census { structure, k } => {
            let s = load_structure(&structure)?;
            let c = census(&s, k);
            let counts: Vec<Value> = c
                .counts
                .iter()
                .map(|(key, n)| json!({ "type": key.to_string(), "count": n }))
                .collect();
            Ok(Report {
                text: c.to_text(),
                json: json!({ "k": k, "types": counts }),
                ok: true,
            })
        }
        Command::Classify { structure, params } => {
            let s = load_structure(&structure)?;
            let p = locality_params(&params, &[&s])?;
            let c = census(&s, p.k);
            let cl = classify_frequent(&c, &p);
            let mut text = format!("threshold\t{}\nrare_occurrences\t{}\n", cl.threshold, cl.rare_occurrences);
            for (key, n) in &c.counts {
                let kind = if cl.frequent.contains(key) { "frequent" } else { "rare" };
                let _ = writeln!(text, "{kind}\t{key}\t{n}");
            }
            Ok(Report {
                json: json!({
                    "threshold": cl.threshold.to_string(),
                    "rare_occurrences": cl.rare_occurrences,
                    "frequent": cl.frequent.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
                    "rare": cl.rare.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
                }),
                text,
                ok: true,
            })
        }
        Command::BuildOrders { s0, s1, params } => {
            let a0 = load_structure(&s0)?;
            let a1 = load_structure(&s1)?;
            let p = locality_params(&params, &[&a0, &a1])?;
            Ok(match build_orders(&a0, &a1, &p)? {
                Outcome::Built(c) => Report {
                    json: json!({
                        "outcome": "built",
                        "order0": c.order0.sequence(),
                        "order1": c.order1.sequence(),
                        "passed": c.report.passed(),
                        "report": c.report.to_text(),
                    }),
                    text: c.to_text(),
                    ok: c.report.passed(),
                },
                Outcome::Isomorphic {
                    order0,
                    order1,
                    isomorphism,
                } => Report {
                    text: format!(
                        "isomorphic\norder 0 : {}\norder 1 : {}\n",
                        order_text(&order0),
                        order_text(&order1)
                    ),
                    json: json!({
                        "outcome": "isomorphic",
                        "order0": order0.sequence(),
                        "order1": order1.sequence(),
                        "isomorphism": isomorphism,
                    }),
                    ok: true,
                },
            })
        }
        Command::Game {
            kind,
            s0,
            s1,
            k,
            human,
            transcript,
            replay,
            cap,
        } => {
            let a0 = load_structure(&s0)?;
            let a1 = load_structure(&s1)?;
            run_game(kind, &a0, &a1, k, human, transcript.as_deref(), replay.as_deref(), cap)
        }
        Command::Dendroid { command } => run_dendroid(command, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(report) => {
            let mut out = io::stdout().lock();
            let _ = match format {
                Format::Tsv => out.write_all(report.text.as_bytes()),
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report.json).unwrap_or_default()),
            };
            ExitCode::from(if report.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
