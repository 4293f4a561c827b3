//! Command-line front end: play single games, sweep grids, print bounds,
//! run the exact solver, and run the self-verification suite.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use exsearch_core::bounds::bounds_for;
use exsearch_core::harness::{
    make_adversary, make_questioner, play, sweep, verdict_label, verify, SweepFormat, SweepSpec,
    VerifyLevel,
};
use exsearch_core::model::GameConfig;
use exsearch_core::solver::{solve, strategy_tree, SolverConfig};

#[derive(Parser)]
#[command(
    name = "exsearch",
    version,
    about = "Round-limited search games: strategies, adversaries, bounds, exact solver"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play one game between a questioner and an adversary.
    Play(PlayArgs),
    /// Play a grid of games and stream result rows (CSV or JSON).
    Sweep(SweepArgs),
    /// Print the closed-form bounds for one configuration.
    Bounds(BoundsArgs),
    /// Exact game value by exhaustive search (tiny configurations only).
    Solve(SolveArgs),
    /// Run the built-in verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct PlayArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long)]
    r: u32,
    /// katona | katona-parallel | singletons | solver | random:<seed>
    #[arg(long)]
    questioner: String,
    /// lemma | good-family | endgame-auto | solver | fixed:<ids> | random:<p>
    #[arg(long)]
    adversary: String,
    /// Seed for the adversary's randomness, if it has any.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the full result as JSON instead of a text summary.
    #[arg(long)]
    json: bool,
    /// Also write the round-by-round transcript as JSON to this path.
    #[arg(long, value_name = "PATH")]
    emit_transcript: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// List syntax: "10,20,100..105" (ranges are inclusive).
    #[arg(long)]
    ns: String,
    #[arg(long, default_value = "1")]
    ds: String,
    #[arg(long)]
    rs: String,
    /// Repeatable; one strategy name per flag.
    #[arg(long = "questioner", value_name = "NAME", required = true)]
    questioners: Vec<String>,
    /// Repeatable; one strategy name per flag.
    #[arg(long = "adversary", value_name = "NAME", required = true)]
    adversaries: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    d: u64,
    #[arg(long)]
    r: u32,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long)]
    r: u32,
    /// Write an optimal strategy tree as JSON to this path.
    #[arg(long, value_name = "PATH")]
    emit_strategy: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

/// "1,5,10..20" (and "10..=20") into an explicit list; ranges inclusive.
fn parse_list(s: &str) -> anyhow::Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().with_context(|| format!("bad range '{part}'"))?;
            let b: u32 = b
                .trim()
                .trim_start_matches('=')
                .trim()
                .parse()
                .with_context(|| format!("bad range '{part}'"))?;
            anyhow::ensure!(a <= b, "empty range '{part}'");
            out.extend(a..=b);
        } else {
            out.push(part.parse().with_context(|| format!("bad number '{part}'"))?);
        }
    }
    anyhow::ensure!(!out.is_empty(), "empty list '{s}'");
    Ok(out)
}

fn cmd_play(args: PlayArgs) -> anyhow::Result<u8> {
    let cfg = GameConfig::new(args.n, args.d, args.r)?;
    let mut q = make_questioner(&args.questioner, cfg)?;
    let mut a = make_adversary(&args.adversary, cfg, args.seed)?;
    let keep = args.emit_transcript.is_some();
    let result = play(cfg, q.as_mut(), a.as_mut(), keep)?;
    if let Some(path) = &args.emit_transcript {
        let transcript = result.transcript.as_ref().expect("kept by request");
        let file = File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(file), transcript)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!(
            "n={} d={} r={} questioner={} adversary={}",
            cfg.n, cfg.d, cfg.r, result.questioner, result.adversary
        );
        println!(
            "queries: total={} per-round={:?}",
            result.total_queries, result.per_round
        );
        println!(
            "verdict: {} ({})",
            verdict_label(&result.verdict),
            if result.verdict_valid { "valid" } else { "INVALID" }
        );
        println!(
            "bounds: lower={:.3} upper_alg={}",
            result.bounds.lower, result.bounds.upper_algorithmic
        );
        let failed = result
            .ledger_checks
            .iter()
            .filter(|c| !c.pass && !c.skipped)
            .count();
        let skipped = result.ledger_checks.iter().filter(|c| c.skipped).count();
        println!(
            "ledger: {} checks, {failed} failed, {skipped} skipped",
            result.ledger_checks.len()
        );
        for check in result.ledger_checks.iter().filter(|c| !c.pass && !c.skipped) {
            println!("  round {} {}: {}", check.round, check.kind, check.detail);
        }
    }
    let ledger_ok = result.ledger_checks.iter().all(|c| c.pass || c.skipped);
    Ok(if ledger_ok { 0 } else { 1 })
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<u8> {
    let spec = SweepSpec {
        ns: parse_list(&args.ns)?,
        ds: parse_list(&args.ds)?,
        rs: parse_list(&args.rs)?,
        questioners: args.questioners,
        adversaries: args.adversaries,
        seed: args.seed,
        format: match args.format {
            FormatArg::Csv => SweepFormat::Csv,
            FormatArg::Json => SweepFormat::Json,
        },
    };
    let summary = match &args.out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            let summary = sweep(&spec, &mut w)?;
            w.flush()?;
            eprintln!(
                "wrote {} rows to {} ({} bound violations)",
                summary.rows,
                path.display(),
                summary.bound_violations
            );
            summary
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let summary = sweep(&spec, &mut lock)?;
            lock.flush()?;
            summary
        }
    };
    Ok(if summary.bound_violations == 0 { 0 } else { 1 })
}

fn cmd_bounds(args: BoundsArgs) -> anyhow::Result<u8> {
    let report = bounds_for(args.n, args.d, args.r)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("n={} d={} r={}", report.n, report.d, report.r);
        println!(
            "lower={:.3} upper={:.3} upper_algorithmic={}",
            report.lower, report.upper, report.upper_algorithmic
        );
        if let Some((lo, hi)) = report.two_round_window {
            println!("two-round window: [{lo}, {hi}]");
        }
        if !report.notes.is_empty() {
            println!("notes: {}", report.notes.join("; "));
        }
    }
    Ok(0)
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<u8> {
    let scfg = SolverConfig::from_env();
    let value = if let Some(path) = &args.emit_strategy {
        let (value, tree) = strategy_tree(args.n, args.d, args.r, &scfg)?;
        #[derive(serde::Serialize)]
        struct Emitted<'a> {
            n: u32,
            d: u32,
            r: u32,
            value: u32,
            root: &'a exsearch_core::solver::StrategyNode,
        }
        let file = File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        serde_json::to_writer_pretty(
            BufWriter::new(file),
            &Emitted {
                n: args.n,
                d: args.d,
                r: args.r,
                value,
                root: &tree,
            },
        )?;
        value
    } else {
        solve(args.n, args.d, args.r, &scfg)?
    };
    if args.json {
        println!(
            "{}",
            serde_json::json!({ "n": args.n, "d": args.d, "r": args.r, "value": value })
        );
    } else {
        println!("value={value} (n={} d={} r={})", args.n, args.d, args.r);
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<u8> {
    let level = match args.level {
        LevelArg::Quick => VerifyLevel::Quick,
        LevelArg::Full => VerifyLevel::Full,
    };
    let report = verify(level);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        for row in &report.rows {
            println!(
                "{} {:<24} {}",
                if row.pass { "PASS" } else { "FAIL" },
                row.invariant,
                row.detail
            );
        }
        println!("{}", if report.pass { "all invariants hold" } else { "FAILED" });
    }
    Ok(if report.pass { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Play(args) => cmd_play(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Bounds(args) => cmd_bounds(args),
        Cmd::Solve(args) => cmd_solve(args),
        Cmd::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
