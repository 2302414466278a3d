//! `lincode`: evolve, verify and compare binary linear codes.
//!
//! Machine-readable results go to stdout as `key=value` lines; human-readable
//! summaries go to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lincode_es::code::{fitness, min_distance_anf, min_distance_bruteforce, optimal_fitness};
use lincode_es::equivalence::{is_equivalent, EquivalenceReport, DEFAULT_EFFORT_CAP};
use lincode_es::es::{run, EsConfig, Replacement, TieBreak, Variant};
use lincode_es::experiments::{mann_whitney_u, run_campaign, write_outputs, Campaign};
use lincode_es::experiments::{summary_json, Summary};
use lincode_es::gf2::{parse_generator, parse_matrix, write_matrix};
use lincode_es::ProblemInstance;

/// Exit status when an equivalence search runs out of budget.
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(name = "lincode", version, about = "Evolutionary search for binary linear codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one evolution strategy.
    Evolve(EvolveArgs),
    /// Report rank and minimum distance of a generator matrix.
    Verify(VerifyArgs),
    /// Test two codes for permutation equivalence.
    Equiv(EquivArgs),
    /// Run a campaign described by a JSON config.
    Campaign(CampaignArgs),
    /// Mann-Whitney U test on one column of two CSV files.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ReplacementArg {
    Comma,
    Plus,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    Random,
    PreferParents,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum)]
    variant: ReplacementArg,
    #[arg(long)]
    crossover: bool,
    /// Population size (default n).
    #[arg(long)]
    lambda: Option<usize>,
    /// Parent pool size (default floor(n/3)).
    #[arg(long)]
    mu: Option<usize>,
    /// Per-row mutation probability (default 1/n).
    #[arg(long)]
    pmut: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    max_gens: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TieBreakArg::PreferParents)]
    tie_break: TieBreakArg,
    /// Write the best generator matrix here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a diversity trace CSV here; the run then uses its whole budget.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    trace_every: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Also score the code against target distance D.
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct EquivArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Search node budget.
    #[arg(long, default_value_t = DEFAULT_EFFORT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    column: String,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn evolve(args: EvolveArgs) -> Result<ExitCode> {
    let instance = ProblemInstance::new(args.n, args.k, args.d)?;
    let replacement = match args.variant {
        ReplacementArg::Comma => Replacement::Comma,
        ReplacementArg::Plus => Replacement::Plus,
    };
    let variant = Variant::new(replacement, args.crossover);
    let defaults = EsConfig::with_defaults(instance, variant, args.seed);
    let cfg = EsConfig {
        lambda: args.lambda.unwrap_or(defaults.lambda),
        mu: args.mu.unwrap_or(defaults.mu),
        p_mut: args.pmut.unwrap_or(defaults.p_mut),
        max_generations: args.max_gens,
        tie_break: match args.tie_break {
            TieBreakArg::Random => TieBreak::Random,
            TieBreakArg::PreferParents => TieBreak::PreferParents,
        },
        diversity_every: args.trace.as_ref().map(|_| args.trace_every),
        ..defaults
    };
    let result = run(&cfg)?;

    if let Some(path) = &args.out {
        fs::write(path, write_matrix(result.best.genotype.matrix()))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &args.trace {
        let csv = lincode_es::experiments::trace_csv(&result.trace);
        fs::write(path, csv).with_context(|| format!("cannot write {}", path.display()))?;
    }

    println!("instance={instance}");
    println!("variant={variant}");
    println!("lambda={}", cfg.lambda);
    println!("mu={}", cfg.mu);
    println!("p_mut={}", cfg.p_mut);
    println!("success={}", result.success);
    println!("best_fitness={}", result.best.fitness);
    println!("optimal_fitness={}", optimal_fitness(&instance));
    println!("evaluations={}", result.evaluations);
    match result.evaluations_to_success {
        Some(e) => println!("evaluations_to_success={e}"),
        None => println!("evaluations_to_success="),
    }
    println!("generations={}", result.generations_used);
    eprintln!(
        "{instance} {variant}: {} after {} generations ({} evaluations), best fitness {}/{}",
        if result.success { "optimal code found" } else { "no optimal code" },
        result.generations_used,
        result.evaluations,
        result.best.fitness,
        optimal_fitness(&instance),
    );
    eprint!("{}", write_matrix(result.best.genotype.matrix()));
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let matrix = parse_matrix(&read(&args.matrix)?)
        .with_context(|| format!("malformed matrix {}", args.matrix.display()))?;
    let rank = matrix.rank();
    println!("n={}", matrix.n());
    println!("k={}", matrix.k());
    println!("rank={rank}");
    if rank != matrix.k() {
        bail!("matrix has rank {rank} < k = {}", matrix.k());
    }
    let g = lincode_es::GeneratorMatrix::new(matrix)?;
    let code = g.span();
    let by_anf = min_distance_anf(&code)?;
    let by_scan = min_distance_bruteforce(&code)?;
    let agree = by_anf == by_scan;
    println!("d_anf={by_anf}");
    println!("d_bruteforce={by_scan}");
    println!("agree={agree}");
    if let Some(d) = args.d {
        let inst = ProblemInstance::new(g.n(), g.k(), d)?;
        println!("fitness={}", fitness(&g, &inst)?);
        println!("optimal_fitness={}", optimal_fitness(&inst));
        println!("meets_target={}", by_scan >= d);
    }
    eprintln!(
        "d={by_anf} (ANF) / d={by_scan} (brute force) - {}",
        if agree { "agree" } else { "DISAGREE" }
    );
    Ok(ExitCode::SUCCESS)
}

fn equiv(args: EquivArgs) -> Result<ExitCode> {
    let a = parse_generator(&read(&args.a)?)
        .with_context(|| format!("malformed matrix {}", args.a.display()))?;
    let b = parse_generator(&read(&args.b)?)
        .with_context(|| format!("malformed matrix {}", args.b.display()))?;
    let report = is_equivalent(&a.span(), &b.span(), args.cap)?;
    println!("nodes={}", report.nodes());
    match &report {
        EquivalenceReport::Equivalent { witness, .. } => {
            println!("result=equivalent");
            println!("witness={witness}");
            eprintln!("equivalent; coordinate i of A maps to position witness[i] of B");
            Ok(ExitCode::SUCCESS)
        }
        EquivalenceReport::NotEquivalent { pruned_by, .. } => {
            println!("result=not-equivalent");
            println!("pruned_by={pruned_by}");
            eprintln!("not equivalent ({pruned_by})");
            Ok(ExitCode::SUCCESS)
        }
        EquivalenceReport::Undecided { .. } => {
            println!("result=undecided");
            println!("pruned_by=search-exhausted");
            eprintln!("undecided: search cap of {} nodes exhausted", args.cap);
            Ok(ExitCode::from(EXIT_UNDECIDED))
        }
    }
}

fn campaign(args: CampaignArgs) -> Result<ExitCode> {
    let mut c = Campaign::from_json(&read(&args.config)?)
        .with_context(|| format!("invalid campaign config {}", args.config.display()))?;
    if args.threads.is_some() {
        c.threads = args.threads;
    }
    let batch = run_campaign(&c)?;
    write_outputs(&batch, &args.out)
        .with_context(|| format!("cannot write outputs to {}", args.out.display()))?;
    let summary: Summary = serde_json::from_str(&summary_json(&batch))?;
    for cell in &summary.cells {
        println!(
            "cell=({},{},{}) variant={} successes={} runs={} verified={}",
            cell.n, cell.k, cell.d, cell.variant, cell.successes, cell.runs, cell.verified_successes
        );
    }
    println!("summary={}", args.out.join("summary.json").display());
    eprintln!("{} cells written to {}", summary.cells.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let idx = reader
        .headers()?
        .iter()
        .position(|h| h == column)
        .with_context(|| format!("{} has no column {column:?}", path.display()))?;
    let mut values = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = rec.get(idx).unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        let v: f64 = field.parse().with_context(|| {
            format!("{}: row {}: {field:?} is not a number", path.display(), line + 2)
        })?;
        values.push(v);
    }
    Ok(values)
}

fn stats(args: StatsArgs) -> Result<ExitCode> {
    let a = read_column(&args.a, &args.column)?;
    let b = read_column(&args.b, &args.column)?;
    let r = mann_whitney_u(&a, &b)?;
    println!("n_a={}", a.len());
    println!("n_b={}", b.len());
    println!("u={}", r.u);
    println!("p={}", r.p_value);
    println!("method={}", serde_json::to_value(r.method)?.as_str().unwrap_or(""));
    println!("degenerate={}", r.degenerate);
    eprintln!("U = {}, two-sided p = {:.4}", r.u, r.p_value);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Evolve(a) => evolve(a),
        Command::Verify(a) => verify(a),
        Command::Equiv(a) => equiv(a),
        Command::Campaign(a) => campaign(a),
        Command::Stats(a) => stats(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
