use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use gameacp::game::{
    enumerate_strategies, game_tree_from_term_with, play_term, strategy_to_term, Assoc, GameError, PlaySet, TreeOptions,
};
use gameacp::parser::{parse_game_decl, parse_term, print_term, print_term_unicode, ParseError};
use gameacp::rewrite::{Mode, RewriteError, RewriteTrace, Rewriter, RuleId, DEFAULT_STEP_CAP};
use gameacp::selftest::{run_selftest, SelftestConfig};
use gameacp::sos::{bisimilar_capped, build_lts_capped, export_dot, LtsError, Node, DEFAULT_STATE_CAP};
use gameacp::term::{ac_equal, validate_ownership, GameDeclaration, OwnershipWarning, ProcessTerm, Role};

const EXIT_NOT_BISIMILAR: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_ORACLE: u8 = 4;
const EXIT_STRICT: u8 = 5;
const EXIT_SELFTEST: u8 = 6;

#[derive(Parser)]
#[command(name = "gameacp", version, about = "Rewriting, bisimulation and strategy play for game process terms")]
struct Cli {
    /// Rule set: `full`, or `p-view` which keeps `$` outside `&`.
    #[arg(long, global = true, default_value = "full")]
    mode: Mode,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    #[arg(long, global = true, default_value_t = DEFAULT_STEP_CAP, value_parser = positive)]
    step_cap: usize,
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_CAP, value_parser = positive)]
    state_cap: usize,
    /// Print terms with the mathematical glyphs instead of ASCII.
    #[arg(long, global = true)]
    unicode: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Rewrite a term to normal form.
    Normalize {
        file: PathBuf,
        /// Print every rewrite step with its rule.
        #[arg(long)]
        trace: bool,
    },
    /// Decide strong bisimilarity of two terms.
    Bisim { left: PathBuf, right: PathBuf },
    /// Play strategy terms against each other.
    Play {
        decl: PathBuf,
        #[arg(num_args = 2.., required = true)]
        strategies: Vec<PathBuf>,
        /// Check the result against the common traces of the strategy terms.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        trace: bool,
    },
    /// List the strategies of a role in the game tree of a term.
    Strategies {
        decl: PathBuf,
        file: PathBuf,
        #[arg(long)]
        role: String,
        /// Role whose encoding the term is written in; inferred from the
        /// declaration when omitted.
        #[arg(long)]
        viewer: Option<String>,
        /// Fail on any ownership inconsistency instead of warning.
        #[arg(long)]
        strict: bool,
    },
    /// Print the transition system of a term.
    Lts { file: PathBuf },
    /// Run the randomized property suites.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Switch off a rewrite rule (mutation check).
        #[arg(long = "disable-rule")]
        disable_rule: Vec<RuleId>,
        #[arg(long, default_value = "selftest-counterexample.json")]
        counterexample: PathBuf,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("{0}")]
    Oracle(String),
    #[error("{0}")]
    Strict(String),
    #[error("{0}")]
    Selftest(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Input(_) | CliError::Io(_) => EXIT_INPUT,
            CliError::Rewrite(_) | CliError::Lts(_) => EXIT_CAP,
            CliError::Oracle(_) => EXIT_ORACLE,
            CliError::Strict(_) => EXIT_STRICT,
            CliError::Selftest(_) => EXIT_SELFTEST,
        }
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Rewrite(e) => CliError::Rewrite(e),
            GameError::Lts(e) => CliError::Lts(e),
            GameError::ViewerOwnsOpponentChoice { .. } => CliError::Strict(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn show(&self, t: &ProcessTerm) -> String {
        if self.cli.unicode {
            print_term_unicode(t)
        } else {
            print_term(t)
        }
    }

    fn rewriter(&self) -> Rewriter {
        Rewriter::new(self.cli.mode).with_step_cap(self.cli.step_cap)
    }

    fn json(&mut self, v: serde_json::Value) -> Result<(), CliError> {
        writeln!(self.out, "{}", serde_json::to_string_pretty(&v).expect("json values serialize"))?;
        Ok(())
    }

    fn no_dot(&self, command: &str) -> Result<(), CliError> {
        if self.cli.output == Output::Dot {
            return Err(CliError::Input(format!("{command} has no DOT output")));
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.display().to_string(), source })
}

fn load_term(path: &Path) -> Result<ProcessTerm, CliError> {
    parse_term(&read(path)?).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn load_decl(path: &Path) -> Result<GameDeclaration, CliError> {
    parse_game_decl(&read(path)?).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn parse_role(name: &str) -> Result<Role, CliError> {
    Role::new(name).map_err(|e| CliError::Input(format!("role `{name}`: {e}")))
}

fn write_trace(ctx: &mut Ctx<'_>, trace: &RewriteTrace) -> Result<(), CliError> {
    let start = trace.steps.first().map(|s| &s.before).unwrap_or(&trace.final_term);
    writeln!(ctx.out, "{:>5}  {}", "", ctx.show(start))?;
    for step in &trace.steps {
        let line = format!("{:>5}= {}", step.rule.to_string(), ctx.show(&step.after));
        writeln!(ctx.out, "{line}")?;
    }
    Ok(())
}

fn cmd_normalize(ctx: &mut Ctx<'_>, file: &Path, trace: bool) -> Result<u8, CliError> {
    ctx.no_dot("normalize")?;
    let t = load_term(file)?;
    let result = ctx.rewriter().normalize(&t)?;
    if ctx.cli.output == Output::Json {
        ctx.json(json!({
            "mode": ctx.cli.mode.to_string(),
            "input": print_term(&t),
            "normal_form": print_term(&result.final_term),
            "steps": result.steps_json(),
        }))?;
    } else {
        if trace {
            write_trace(ctx, &result)?;
        }
        writeln!(ctx.out, "{}", ctx.show(&result.final_term))?;
    }
    Ok(0)
}

fn cmd_bisim(ctx: &mut Ctx<'_>, left: &Path, right: &Path) -> Result<u8, CliError> {
    ctx.no_dot("bisim")?;
    let t = load_term(left)?;
    let u = load_term(right)?;
    let res = bisimilar_capped(&t, &u, ctx.cli.state_cap)?;
    let node = |n: Node, side: &gameacp::sos::Lts| match n {
        Node::Terminated => "terminated".to_string(),
        Node::State(s) => print_term(side.state(s)),
    };
    if ctx.cli.output == Output::Json {
        let witness = res.witness.as_ref().map(|w| {
            json!({
                "trace": w.trace.iter().map(|a| a.as_str()).collect::<Vec<_>>(),
                "left": node(w.left, &res.left),
                "right": node(w.right, &res.right),
                "reason": w.reason,
            })
        });
        ctx.json(json!({ "bisimilar": res.equivalent, "witness": witness }))?;
    } else if res.equivalent {
        writeln!(ctx.out, "bisimilar")?;
    } else {
        writeln!(ctx.out, "not bisimilar")?;
        if let Some(w) = &res.witness {
            let trace: Vec<&str> = w.trace.iter().map(|a| a.as_str()).collect();
            let shown = if trace.is_empty() { "(empty)".to_string() } else { trace.join(" . ") };
            writeln!(ctx.out, "witness trace: {shown}")?;
            writeln!(ctx.out, "left reaches: {}", node(w.left, &res.left))?;
            writeln!(ctx.out, "right reaches: {}", node(w.right, &res.right))?;
            writeln!(ctx.out, "reason: {}", w.reason)?;
        }
    }
    Ok(if res.equivalent { 0 } else { EXIT_NOT_BISIMILAR })
}

fn cmd_play(ctx: &mut Ctx<'_>, decl: &Path, files: &[PathBuf], oracle: bool, trace: bool) -> Result<u8, CliError> {
    ctx.no_dot("play")?;
    let g = load_decl(decl)?;
    let terms = files.iter().map(|f| load_term(f)).collect::<Result<Vec<_>, _>>()?;
    if terms.len() != g.players().len() {
        eprintln!("warning: {} strategy terms for {} declared players", terms.len(), g.players().len());
    }
    let mut undeclared: Vec<String> =
        terms.iter().flat_map(|t| t.labels()).filter(|l| g.owner(l).is_none()).map(|l| l.to_string()).collect();
    undeclared.sort();
    undeclared.dedup();
    if !undeclared.is_empty() {
        eprintln!("warning: labels without an owner: {}", undeclared.join(", "));
    }

    let play = play_term(&terms, Assoc::Left);
    let result = ctx.rewriter().normalize(&play)?;
    let nf = &result.final_term;

    let verdict = if oracle {
        let mut common: Option<PlaySet> = None;
        for t in &terms {
            let set = PlaySet::of_term(t, ctx.cli.state_cap)?;
            common = Some(match common {
                None => set,
                Some(acc) => acc.intersect(&set),
            });
        }
        let common = common.expect("at least two terms");
        Some(match &common.maximal {
            Some(m) => {
                let expected = ProcessTerm::seq_chain(m);
                (ac_equal(nf, &expected), Some(expected))
            }
            None => (false, None),
        })
    } else {
        None
    };

    if ctx.cli.output == Output::Json {
        let mut v = json!({
            "play_term": print_term(&play),
            "result": print_term(nf),
            "deadlock": *nf == ProcessTerm::Deadlock,
            "steps": result.steps_json(),
        });
        if let Some((pass, expected)) = &verdict {
            v["pass"] = json!(pass);
            v["maximal_trace"] = json!(expected.as_ref().map(print_term));
        }
        ctx.json(v)?;
    } else {
        if trace {
            write_trace(ctx, &result)?;
        }
        writeln!(ctx.out, "{}", ctx.show(nf))?;
        if *nf == ProcessTerm::Deadlock {
            writeln!(ctx.out, "deadlock: no common execution")?;
        }
        if let Some((pass, expected)) = &verdict {
            let expected = match expected {
                Some(ProcessTerm::Deadlock) => "(empty)".to_string(),
                Some(e) => ctx.show(e),
                None => "none".to_string(),
            };
            writeln!(ctx.out, "oracle: {} (maximal common trace: {expected})", if *pass { "PASS" } else { "FAIL" })?;
        }
    }
    match verdict {
        Some((false, None)) => {
            Err(CliError::Oracle("oracle: the strategy terms have no unique maximal common trace".into()))
        }
        Some((false, Some(_))) => Err(CliError::Oracle("oracle: result differs from the maximal common trace".into())),
        _ => Ok(0),
    }
}

fn cmd_strategies(
    ctx: &mut Ctx<'_>,
    decl: &Path,
    file: &Path,
    role_name: &str,
    viewer: Option<&str>,
    strict: bool,
) -> Result<u8, CliError> {
    let g = load_decl(decl)?;
    let t = load_term(file)?;
    let role = parse_role(role_name)?;
    let viewer = match viewer {
        Some(v) => parse_role(v)?,
        None => infer_viewer(&t, &g, &role),
    };
    for r in [&role, &viewer] {
        if !g.has_player(r) {
            return Err(CliError::Input(format!("role `{r}` is not a declared player")));
        }
    }
    let ownership = validate_ownership(&t, &g, &viewer);
    if strict && !ownership.is_empty() {
        let msgs: Vec<String> = ownership.iter().map(|w| w.to_string()).collect();
        return Err(CliError::Strict(format!("ownership validation failed: {}", msgs.join("; "))));
    }
    for w in &ownership {
        eprintln!("warning: {w}");
    }
    let extracted = game_tree_from_term_with(&t, &g, &viewer, TreeOptions { strict })?;
    if strict && !extracted.warnings.is_empty() {
        let msgs: Vec<String> = extracted.warnings.iter().map(|w| w.to_string()).collect();
        return Err(CliError::Strict(format!("ownership validation failed: {}", msgs.join("; "))));
    }
    for w in &extracted.warnings {
        eprintln!("warning: {w}");
    }
    let strategies = enumerate_strategies(&extracted.tree, &role);
    match ctx.cli.output {
        Output::Text => {
            for s in &strategies {
                writeln!(ctx.out, "{}", ctx.show(&strategy_to_term(s)))?;
            }
        }
        Output::Json => {
            let list: Vec<serde_json::Value> = strategies
                .iter()
                .map(|s| {
                    let mut v = s.to_json();
                    v["term"] = json!(print_term(&strategy_to_term(s)));
                    v
                })
                .collect();
            ctx.json(
                json!({ "role": role.as_str(), "viewer": viewer.as_str(), "count": list.len(), "strategies": list }),
            )?;
        }
        Output::Dot => {
            write!(ctx.out, "{}", extracted.tree.to_dot())?;
            for (i, s) in strategies.iter().enumerate() {
                write!(ctx.out, "{}", s.tree.to_dot_named(&format!("strategy_{}", i + 1)))?;
            }
        }
    }
    Ok(0)
}

/// The encoding a term is written in: `role` itself if its `$` choices are
/// all made by others, otherwise the only player for whom that holds.
fn infer_viewer(t: &ProcessTerm, g: &GameDeclaration, role: &Role) -> Role {
    let consistent = |p: &Role| {
        validate_ownership(t, g, p).iter().all(|w| matches!(w, OwnershipWarning::MissingOwner { .. }))
            && game_tree_from_term_with(t, g, p, TreeOptions::default()).is_ok_and(|e| e.warnings.is_empty())
    };
    if consistent(role) {
        return role.clone();
    }
    let candidates: Vec<&Role> = g.players().iter().filter(|p| consistent(p)).collect();
    match candidates.as_slice() {
        [only] => {
            eprintln!("note: reading the term in the encoding of `{only}`");
            (*only).clone()
        }
        _ => role.clone(),
    }
}

fn cmd_lts(ctx: &mut Ctx<'_>, file: &Path) -> Result<u8, CliError> {
    let t = load_term(file)?;
    let lts = build_lts_capped(&t, ctx.cli.state_cap)?;
    match ctx.cli.output {
        Output::Dot => write!(ctx.out, "{}", export_dot(&lts))?,
        Output::Json => ctx.json(lts.to_json())?,
        Output::Text => {
            for (i, s) in lts.states().iter().enumerate() {
                writeln!(ctx.out, "s{i}: {}", ctx.show(s))?;
            }
            for (from, a, to) in lts.transitions() {
                writeln!(ctx.out, "s{} --{a}--> s{}", from.0, to.0)?;
            }
            for (from, a) in lts.terminating() {
                writeln!(ctx.out, "s{} --{a}--> done", from.0)?;
            }
        }
    }
    Ok(0)
}

fn cmd_selftest(
    ctx: &mut Ctx<'_>,
    seed: u64,
    count: usize,
    disabled: &[RuleId],
    counterexample: &Path,
) -> Result<u8, CliError> {
    ctx.no_dot("selftest")?;
    if ctx.cli.mode != Mode::Full {
        eprintln!("warning: selftest checks the full rule set; --mode is ignored");
    }
    if count == 0 {
        eprintln!("warning: --count 0 runs no cases; the pass is vacuous");
    }
    let mut cfg = SelftestConfig::new(seed, count);
    cfg.state_cap = ctx.cli.state_cap;
    cfg.rewriter = disabled
        .iter()
        .fold(Rewriter::new(Mode::Full).with_step_cap(ctx.cli.step_cap), |r, &rule| r.without_rule(rule));
    let report = run_selftest(&cfg);
    if ctx.cli.output == Output::Json {
        ctx.json(report.to_json())?;
    } else {
        writeln!(ctx.out, "seed {seed}, {count} cases per suite")?;
        write!(ctx.out, "{}", report.table())?;
    }
    if let Some(cx) = report.first_failure() {
        let text = serde_json::to_string_pretty(&cx.to_json()).expect("json values serialize");
        fs::write(counterexample, text + "\n")?;
        return Err(CliError::Selftest(format!(
            "{} failed at case {}: {}; counterexample written to {}",
            cx.suite,
            cx.case,
            cx.message,
            counterexample.display()
        )));
    }
    Ok(0)
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    let mut ctx = Ctx { cli, out };
    match &cli.command {
        Command::Normalize { file, trace } => cmd_normalize(&mut ctx, file, *trace),
        Command::Bisim { left, right } => cmd_bisim(&mut ctx, left, right),
        Command::Play { decl, strategies, oracle, trace } => cmd_play(&mut ctx, decl, strategies, *oracle, *trace),
        Command::Strategies { decl, file, role, viewer, strict } => {
            cmd_strategies(&mut ctx, decl, file, role, viewer.as_deref(), *strict)
        }
        Command::Lts { file } => cmd_lts(&mut ctx, file),
        Command::Selftest { seed, count, disable_rule, counterexample } => {
            cmd_selftest(&mut ctx, *seed, *count, disable_rule, counterexample)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code)
}
