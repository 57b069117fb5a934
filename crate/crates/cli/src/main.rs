use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrep_core::blocks::{
    block_dimension_of_surface, equivalent_exponents, verlinde_dimension, BlockError, ColorSystem,
};
use qrep_core::burau::{primitive_exponents, BraidWord, BurauError, BurauParams};
use qrep_core::cyclo::{residue_contexts, GaloisEmbedding, ResidueError};
use qrep_core::profile::{self, ProfileError, RepresentationTag};
use qrep_core::quasi::{self, IndefiniteModel, QuasiError};
use qrep_core::quotients::{self, QuotientError, ReducedGenSet};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "qrep", version, about = "Exact computations with Burau and quantum representations")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for randomized numerics.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Write records to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Signature of the invariant form at every embedding class.
    Signatures(SignaturesArgs),
    /// Conformal-block dimension against the Verlinde count.
    Blocks(BlocksArgs),
    /// Pairwise equivalence table over all primitive 2p-th roots.
    Equiv(EquivArgs),
    /// Closure of the Burau image modulo a prime power.
    Reduce(ReduceArgs),
    /// Closure plus Cayley-graph spectral gap.
    Gap(GapArgs),
    /// Rotation number of a braid word at the indefinite classes.
    Quasi(QuasiArgs),
}

#[derive(Args, Debug)]
struct SignaturesArgs {
    #[arg(long)]
    p: u32,
    /// `A = ζ_{2p}^k`; defaults to the standard root.
    #[arg(long)]
    root_exponent: Option<u32>,
    /// Initial decimal digits for certified signs.
    #[arg(long, default_value_t = profile::DEFAULT_PRECISION)]
    precision: u32,
}

#[derive(Args, Debug)]
struct BlocksArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 0)]
    genus: usize,
    /// Boundary colors, comma separated.
    #[arg(long, value_delimiter = ',')]
    labels: Vec<u32>,
}

#[derive(Args, Debug)]
struct EquivArgs {
    #[arg(long)]
    p: u32,
}

#[derive(Args, Debug, Clone)]
struct ReduceArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 3)]
    strands: usize,
    #[arg(long)]
    root_exponent: Option<u32>,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long)]
    projective: bool,
    /// Use the pure-braid generators instead of the Artin generators.
    #[arg(long)]
    pure: bool,
    /// Index of the factor of the cyclotomic polynomial mod q.
    #[arg(long, default_value_t = 0)]
    context: usize,
    #[arg(long, default_value_t = 20_000_000)]
    state_budget: u64,
}

#[derive(Args, Debug)]
struct GapArgs {
    #[command(flatten)]
    reduce: ReduceArgs,
    #[arg(long, default_value_t = 200_000)]
    spectral_budget: u64,
}

#[derive(Args, Debug)]
struct QuasiArgs {
    #[arg(long)]
    p: u32,
    #[arg(long)]
    root_exponent: Option<u32>,
    /// Braid word such as `1.2.-1.2`; `e` is the identity.
    #[arg(long)]
    word: String,
    /// Embedding exponent; defaults to every indefinite class.
    #[arg(long)]
    class: Option<u32>,
    #[arg(long, default_value_t = 1 << 16)]
    n_max: usize,
    #[arg(long, default_value_t = quasi::DEFAULT_KAPPA)]
    kappa: f64,
}

enum Failure {
    /// Bad input or a computation that does not apply: exit code 2.
    Validation(String),
    /// Budget or precision ran out: exit code 3.
    Exhausted(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Exhausted(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Exhausted(m) => m,
        }
    }
}

fn validation(e: impl std::fmt::Display) -> Failure {
    Failure::Validation(e.to_string())
}

impl From<ProfileError> for Failure {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::PrecisionExhausted { .. } => Failure::Exhausted(e.to_string()),
            _ => validation(e),
        }
    }
}

impl From<QuotientError> for Failure {
    fn from(e: QuotientError) -> Self {
        match e {
            QuotientError::SpectralBudgetExceeded { .. } | QuotientError::IncompleteClosure => {
                Failure::Exhausted(e.to_string())
            }
            _ => validation(e),
        }
    }
}

impl From<QuasiError> for Failure {
    fn from(e: QuasiError) -> Self {
        match e {
            QuasiError::NonConvergent(_) => Failure::Exhausted(e.to_string()),
            QuasiError::Profile(p) => p.into(),
            _ => validation(e),
        }
    }
}

macro_rules! impl_validation {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                validation(e)
            }
        }
    )*};
}

impl_validation!(BurauError, BlockError, ResidueError);

/// Records produced so far, and the failure that stopped the command, if any.
struct Outcome {
    records: Vec<Value>,
    failure: Option<Failure>,
}

impl Outcome {
    fn done(records: Vec<Value>) -> Self {
        Outcome { records, failure: None }
    }
}

fn record(command: &str, params: impl Serialize, result: impl Serialize) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "result": result,
    })
}

fn root_exponent(p: u32, given: Option<u32>) -> Result<u32, Failure> {
    match given {
        Some(k) => Ok(k),
        None => Ok(qrep_core::burau::standard_root_of_unity(p)?.exponent),
    }
}

fn signatures(a: &SignaturesArgs) -> Result<Outcome, Failure> {
    profile::check_supported(a.p)?;
    let k = root_exponent(a.p, a.root_exponent)?;
    let prof = profile::group_profile_at(a.p, k, RepresentationTag::BurauPb4, a.precision)?;
    let params = json!({ "p": a.p, "root_exponent": k, "precision": a.precision });
    Ok(Outcome::done(vec![record("signatures", params, prof)]))
}

fn blocks(a: &BlocksArgs) -> Result<Outcome, Failure> {
    let sys = ColorSystem::new(a.p)?;
    let dim = block_dimension_of_surface(a.genus, &a.labels, &sys)?;
    let oracle = verlinde_dimension(a.genus, &a.labels, &sys)?;
    let params = json!({ "p": a.p, "genus": a.genus, "labels": a.labels });
    let result = json!({
        "block_dimension": dim,
        "verlinde_dimension": oracle,
        "agree": dim as u128 == oracle,
    });
    Ok(Outcome::done(vec![record("blocks", params, result)]))
}

fn equiv(a: &EquivArgs) -> Result<Outcome, Failure> {
    let sys = ColorSystem::new(a.p)?;
    let roots = primitive_exponents(a.p);
    let pairs: Vec<(u32, u32)> = roots.iter().flat_map(|&x| roots.iter().map(move |&y| (x, y))).collect();
    let records = pairs
        .par_iter()
        .map(|&(ka, kb)| {
            let rel = equivalent_exponents(&sys, ka, kb)?;
            Ok(record(
                "equiv",
                json!({ "p": a.p }),
                json!({ "a_exponent": ka, "b_exponent": kb, "relation": rel }),
            ))
        })
        .collect::<Result<Vec<_>, BlockError>>()?;
    Ok(Outcome::done(records))
}

fn reduced_set(a: &ReduceArgs, k: u32) -> Result<(ReducedGenSet, Value), Failure> {
    let root = root_exponent(a.p, a.root_exponent)?;
    let params = BurauParams::new(a.p, root, a.strands)?;
    let gens = if a.pure { params.pure_generators() } else { params.generators() };
    let order = gens[0].order();
    let contexts = residue_contexts(order, a.q)?;
    let ctx = contexts
        .get(a.context)
        .ok_or_else(|| Failure::Validation(format!("context {} out of range (have {})", a.context, contexts.len())))?;
    let rgs = quotients::reduce_generator_set(&gens, ctx, k, a.projective)?;
    let info = json!({
        "p": a.p,
        "strands": a.strands,
        "root_exponent": root,
        "generators": if a.pure { "pure" } else { "artin" },
        "q": a.q,
        "k": k,
        "projective": a.projective,
        "context": a.context,
        "state_budget": a.state_budget,
        "field_order": order,
        "residue_degree": ctx.degree,
        "field_size": ctx.field_size,
        "family": rgs.family(),
    });
    Ok((rgs, info))
}

fn truncated(report: &quotients::ClosureReport) -> Option<Failure> {
    report
        .truncated
        .then(|| Failure::Exhausted(format!("closure truncated at {} states", report.state_count)))
}

fn reduce(a: &ReduceArgs) -> Result<Outcome, Failure> {
    let (rgs, params) = reduced_set(a, a.k)?;
    let closure = quotients::group_closure(&rgs, a.state_budget)?;
    let mut result = json!({ "closure": closure.report });
    if a.k >= 2 {
        let (low, _) = reduced_set(a, a.k - 1)?;
        let low_closure = quotients::group_closure(&low, a.state_budget)?;
        let lift = quotients::lift_check(&low, &low_closure.report, &rgs, &closure.report)?;
        result["lift"] = json!(lift);
    }
    let failure = truncated(&closure.report);
    Ok(Outcome { records: vec![record("reduce", params, result)], failure })
}

fn gap(a: &GapArgs, seed: u64) -> Result<Outcome, Failure> {
    let (rgs, mut params) = reduced_set(&a.reduce, a.reduce.k)?;
    params["spectral_budget"] = json!(a.spectral_budget);
    params["seed"] = json!(seed);
    let closure = quotients::group_closure(&rgs, a.reduce.state_budget)?;
    if let Some(f) = truncated(&closure.report) {
        let result = json!({ "closure": closure.report });
        return Ok(Outcome { records: vec![record("gap", params, result)], failure: Some(f) });
    }
    let report = quotients::cayley_gap(&rgs, &closure, a.spectral_budget, seed)?;
    let result = json!({ "closure": closure.report, "gap": report });
    Ok(Outcome::done(vec![record("gap", params, result)]))
}

fn quasi_cmd(a: &QuasiArgs) -> Result<Outcome, Failure> {
    profile::check_supported(a.p)?;
    let k = root_exponent(a.p, a.root_exponent)?;
    let word: BraidWord = a.word.parse()?;
    let classes = match a.class {
        Some(c) => {
            let order = BurauParams::new(a.p, k, 4)?.q.order();
            vec![GaloisEmbedding::new(order, c as i64).map_err(validation)?]
        }
        None => quasi::indefinite_classes(a.p, k)?,
    };
    let records = classes
        .par_iter()
        .map(|&sigma| {
            let model = IndefiniteModel::new(a.p, k, sigma, a.kappa)?;
            let r = quasi::rotation_number(&word, &model, a.n_max)?;
            let r2 = quasi::rotation_number(&word.concat(&word), &model, a.n_max)?;
            let params = json!({
                "p": a.p,
                "root_exponent": k,
                "word": word.to_string(),
                "embedding": sigma,
                "n_max": a.n_max,
                "kappa": a.kappa,
            });
            let result = json!({
                "rotation": r,
                "rotation_squared": r2.value,
                "homogeneity_defect": (r2.value - 2.0 * r.value).abs(),
                "cocycle_bound": model.cocycle_bound(),
            });
            Ok(record("quasi", params, result))
        })
        .collect::<Result<Vec<_>, QuasiError>>()?;
    Ok(Outcome::done(records))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Signatures(a) => signatures(a),
        Command::Blocks(a) => blocks(a),
        Command::Equiv(a) => equiv(a),
        Command::Reduce(a) => reduce(a),
        Command::Gap(a) => gap(a, cli.seed),
        Command::Quasi(a) => quasi_cmd(a),
    }
}

fn write_records(out: &Option<PathBuf>, records: &[Value]) -> io::Result<()> {
    let mut w: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(f) => Outcome { records: vec![], failure: Some(f) },
    };
    if let Err(e) = write_records(&cli.out, &outcome.records) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match outcome.failure {
        Some(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
        None => ExitCode::SUCCESS,
    }
}
