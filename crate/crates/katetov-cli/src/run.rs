//! Command implementations. Every subcommand reads JSON documents, calls
//! the core, and emits one JSON artifact (to stdout or `--out`); rationals
//! never pass through floating point. Exit codes: 0 success, 1 malformed
//! input or structural mismatch, 2 semantic validation failure, 3 budget or
//! resource exhaustion.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use katetov_core::apx::{self, ApproximateIsometry, PerturbationOutcome};
use katetov_core::category::{FinGraphCat, RatMetricCat};
use katetov_core::engine::{
    back_and_forth, build_generic_chain, check_limit_criteria, dk_upper, saturated_frontier,
    BafOptions, ChainBudget, DkStrategy, EngineError,
};
use katetov_core::rat::{fmt_rat, parse_rat, rat_int, Rat};
use katetov_core::uhf::{
    self, check_uhf_limit, eps_schedule, hall_match, hilbert_map, identity_chain, nap_construct,
    normalize_trace, pushforward_density, subdivision_chain, SupernaturalNumber, UhfError,
};

use crate::json::{
    ApxDoc, BafDoc, ChainDoc, DocError, MapDoc, MorphismDoc, PointedDoc, WitnessDoc,
};
use crate::matrix::margin_sweep;

/// Exit status of one command run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok = 0,
    Malformed = 1,
    Invalid = 2,
    Exhausted = 3,
}

#[derive(Parser, Debug)]
#[command(
    name = "katetov",
    about = "Exact-arithmetic toolkit for approximate isometries, generic chains, and interval matrix algebras",
    version
)]
pub struct Cli {
    /// Write the JSON artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output rendering.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
    Summary,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Approximate-isometry operations.
    #[command(subcommand)]
    Apx(ApxCmd),
    /// Category and chain operations.
    #[command(subcommand)]
    Cat(CatCmd),
    /// Interval matrix algebra operations.
    #[command(subcommand)]
    Uhf(UhfCmd),
    /// Floating-point matrix verification.
    #[command(subcommand)]
    Matrix(MatrixCmd),
}

#[derive(Subcommand, Debug)]
pub enum ApxCmd {
    /// Check the separately-Katetov inequalities of a table.
    Validate { file: PathBuf },
    /// Min-plus composition of two tables (right applied first).
    Compose { psi: PathBuf, phi: PathBuf },
    /// Realize a finite table exactly inside a quotient amalgam.
    Amalgamate { file: PathBuf },
    /// Totality and surjectivity defects, with optional threshold tests.
    Totality {
        file: PathBuf,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Rational strict interpolant between a dominated pair.
    Strictify { phi: PathBuf, psi: PathBuf },
    /// Restriction-set perturbation inequality on a bundled instance.
    PerturbCheck { file: PathBuf },
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    #[arg(long, value_enum)]
    pub category: CategoryName,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = 512)]
    pub max_points: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CategoryName {
    Graphs,
    Ratmetric,
}

#[derive(Subcommand, Debug)]
pub enum CatCmd {
    /// Upper bound for the pseudo-metric between two pointed objects.
    Dk {
        #[arg(long, value_enum)]
        category: CategoryName,
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build a generic chain over the dense request schedule.
    Chain {
        #[command(flatten)]
        args: ChainArgs,
    },
    /// Back-and-forth refinement between two seeded chains.
    Baf {
        #[arg(long, value_enum)]
        category: CategoryName,
        #[arg(long)]
        seed_m: u64,
        #[arg(long)]
        seed_n: u64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 512)]
        max_points: usize,
    },
    /// Sampled universality and homogeneity criteria for a seeded chain.
    LimitCheck {
        #[command(flatten)]
        args: ChainArgs,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum UhfCmd {
    /// Pushforward density and trace preservation of a diagonal morphism.
    CheckTrace { file: PathBuf },
    /// Hall matching of two map tuples within a tolerance.
    HallMatch { file: PathBuf },
    /// Near amalgamation of two morphisms with a common source.
    Nap {
        i1: PathBuf,
        i2: PathBuf,
        #[arg(long)]
        nu: String,
        #[arg(long)]
        eps: String,
        #[arg(long, default_value = "1")]
        lipschitz: String,
        #[arg(long, default_value_t = 1 << 20)]
        m_cap: u64,
    },
    /// Limit criteria for a preset or supplied chain of morphisms.
    LimitCheck {
        #[arg(long)]
        nu: String,
        #[arg(long, value_enum, default_value_t = ChainPreset::Canonical)]
        preset: ChainPreset,
        #[arg(long, default_value_t = 2)]
        base: u64,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 256)]
        divisor_bound: u64,
        #[arg(long, default_value_t = 6)]
        eps_levels: u32,
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// The dyadic square-filling approximant at a level.
    Hilbert {
        #[arg(long)]
        level: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ChainPreset {
    Canonical,
    Identity,
}

#[derive(Subcommand, Debug)]
pub enum MatrixCmd {
    /// Sweep random matrices through the almost-commuting bound.
    VerifyLemma {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
}

/// A run error with its exit classification.
#[derive(Debug)]
pub struct RunError {
    pub outcome: Outcome,
    pub message: String,
}

impl RunError {
    fn malformed(msg: impl Into<String>) -> Self {
        RunError { outcome: Outcome::Malformed, message: msg.into() }
    }

    fn invalid(msg: impl Into<String>) -> Self {
        RunError { outcome: Outcome::Invalid, message: msg.into() }
    }

    fn exhausted(msg: impl Into<String>) -> Self {
        RunError { outcome: Outcome::Exhausted, message: msg.into() }
    }
}

impl From<DocError> for RunError {
    fn from(e: DocError) -> Self {
        RunError::malformed(e.to_string())
    }
}

impl From<UhfError> for RunError {
    fn from(e: UhfError) -> Self {
        match e {
            UhfError::Resource { .. } => RunError::exhausted(e.to_string()),
            UhfError::NonAbsolutelyContinuous | UhfError::NoPerfectMatching => {
                RunError::invalid(e.to_string())
            }
            _ => RunError::malformed(e.to_string()),
        }
    }
}

impl From<EngineError> for RunError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Budget { .. } => RunError::exhausted(e.to_string()),
            EngineError::NotStrict | EngineError::RequestFailed { .. } => {
                RunError::invalid(e.to_string())
            }
            _ => RunError::malformed(e.to_string()),
        }
    }
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::malformed(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        RunError::malformed(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn parse_rat_arg(s: &str) -> Result<Rat, RunError> {
    parse_rat(s).map_err(|e| RunError::malformed(e.to_string()))
}

/// Runs a parsed command, returning the JSON artifact.
pub fn execute(cmd: &Command) -> Result<serde_json::Value, RunError> {
    match cmd {
        Command::Apx(apx_cmd) => run_apx(apx_cmd),
        Command::Cat(cat_cmd) => run_cat(cat_cmd),
        Command::Uhf(uhf_cmd) => run_uhf(uhf_cmd),
        Command::Matrix(matrix_cmd) => run_matrix(matrix_cmd),
    }
}

fn run_apx(cmd: &ApxCmd) -> Result<serde_json::Value, RunError> {
    match cmd {
        ApxCmd::Validate { file } => {
            let phi = read_doc::<ApxDoc>(file)?.to_apx()?;
            let valid = phi.is_valid();
            let artifact = json!({
                "valid": valid,
                "finite": phi.is_finite_valued(),
                "strict": apx::is_strict(&phi),
            });
            if valid {
                Ok(artifact)
            } else {
                Err(RunError::invalid("table is not separately Katetov"))
            }
        }
        ApxCmd::Compose { psi, phi } => {
            let psi_t = read_doc::<ApxDoc>(psi)?.to_apx()?;
            let phi_t = read_doc::<ApxDoc>(phi)?.to_apx()?;
            let comp = apx::compose(&psi_t, &phi_t).map_err(|_| {
                RunError::malformed(format!(
                    "middle spaces differ: right target has points {:?}, left source has points {:?}",
                    phi_t.target().points(),
                    psi_t.source().points()
                ))
            })?;
            Ok(serde_json::to_value(ApxDoc::from_apx(&comp)).unwrap())
        }
        ApxCmd::Amalgamate { file } => {
            let phi = read_doc::<ApxDoc>(file)?.to_apx()?;
            let w = apx::amalgamate(&phi).map_err(|e| RunError::invalid(e.to_string()))?;
            Ok(serde_json::to_value(WitnessDoc::from_witness(&w)).unwrap())
        }
        ApxCmd::Totality { file, eps } => {
            let phi = read_doc::<ApxDoc>(file)?.to_apx()?;
            if !phi.is_valid() {
                return Err(RunError::invalid("table is not separately Katetov"));
            }
            let total = apx::totality_defect(&phi);
            let surj = apx::surjectivity_defect(&phi);
            let mut artifact = json!({
                "totality_defect": total.to_text(),
                "surjectivity_defect": surj.to_text(),
            });
            if let Some(eps) = eps {
                let eps = parse_rat_arg(eps)?;
                artifact["epsilon"] = json!(fmt_rat(&eps));
                artifact["epsilon_total"] = json!(apx::is_epsilon_total(&phi, &eps));
                artifact["epsilon_surjective"] = json!(apx::is_epsilon_surjective(&phi, &eps));
                artifact["epsilon_bijective"] = json!(apx::is_epsilon_bijective(&phi, &eps));
            }
            Ok(artifact)
        }
        ApxCmd::Strictify { phi, psi } => {
            let phi_t = read_doc::<ApxDoc>(phi)?.to_apx()?;
            let psi_t = read_doc::<ApxDoc>(psi)?.to_apx()?;
            let rho = apx::strict_interpolant(&phi_t, &psi_t)
                .map_err(|e| RunError::invalid(e.to_string()))?;
            Ok(serde_json::to_value(ApxDoc::from_apx(&rho)).unwrap())
        }
        ApxCmd::PerturbCheck { file } => {
            #[derive(serde::Deserialize)]
            struct Instance {
                phi: ApxDoc,
                x0: Vec<String>,
                y0: Vec<String>,
                x0_moved: Vec<String>,
                y0_moved: Vec<String>,
                eps: String,
            }
            let inst: Instance = read_doc(file)?;
            let phi = inst.phi.to_apx()?;
            let resolve = |names: &[String], space: &katetov_core::FiniteMetricSpace| {
                names
                    .iter()
                    .map(|n| {
                        space
                            .index_of(n)
                            .ok_or_else(|| RunError::malformed(format!("unknown point `{n}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            };
            let x0 = resolve(&inst.x0, phi.source())?;
            let y0 = resolve(&inst.y0, phi.target())?;
            let x0p = resolve(&inst.x0_moved, phi.source())?;
            let y0p = resolve(&inst.y0_moved, phi.target())?;
            let eps = parse_rat_arg(&inst.eps)?;
            let out = apx::verify_perturbation(&phi, &x0, &y0, &x0p, &y0p, &eps)
                .map_err(|e| RunError::malformed(e.to_string()))?;
            let verdict = match out {
                PerturbationOutcome::Holds => "holds",
                PerturbationOutcome::Fails => "fails",
                PerturbationOutcome::PreconditionFailed => "precondition-failed",
            };
            let artifact = json!({ "verdict": verdict });
            if out == PerturbationOutcome::Fails {
                return Err(RunError::invalid("perturbation inequality fails"));
            }
            Ok(artifact)
        }
    }
}

fn chain_for(
    category: CategoryName,
    seed: u64,
    steps: usize,
    max_points: usize,
) -> Result<katetov_core::engine::Chain, RunError> {
    let budget = ChainBudget { max_points };
    match category {
        CategoryName::Graphs => Ok(build_generic_chain(&FinGraphCat, seed, steps, budget)?),
        CategoryName::Ratmetric => {
            Ok(build_generic_chain(&RatMetricCat::default(), seed, steps, budget)?)
        }
    }
}

fn run_cat(cmd: &CatCmd) -> Result<serde_json::Value, RunError> {
    match cmd {
        CatCmd::Dk { category, a, b, budget, seed } => {
            let a = read_doc::<PointedDoc>(a)?.to_pointed()?;
            let b = read_doc::<PointedDoc>(b)?.to_pointed()?;
            let strategy = match category {
                CategoryName::Graphs => {
                    DkStrategy::ExhaustiveOverlap { values: vec![rat_int(1), rat_int(2)] }
                }
                CategoryName::Ratmetric => DkStrategy::Sampled { denominator: 16 },
            };
            let out = dk_upper(&strategy, &a, &b, *budget, *seed)?;
            Ok(json!({
                "bound": out.bound.to_text(),
                "exhaustive": out.exhaustive,
                "witnesses_tried": out.witnesses_tried,
                "note": out.note,
            }))
        }
        CatCmd::Chain { args } => {
            let chain = chain_for(args.category, args.seed, args.steps, args.max_points)?;
            Ok(serde_json::to_value(ChainDoc::from_chain(&chain)).unwrap())
        }
        CatCmd::Baf { category, seed_m, seed_n, steps, levels, max_points } => {
            let m = chain_for(*category, *seed_m, *steps, *max_points)?;
            let n = chain_for(*category, *seed_n, *steps, *max_points)?;
            // Permissive strict start: a constant above both diameters.
            let mut c = rat_int(1);
            for s in [&m, &n] {
                let d = s.top().domain.diameter() + rat_int(1);
                if d > c {
                    c = d;
                }
            }
            let phi0 = ApproximateIsometry::constant(
                m.stages[0].domain.clone(),
                n.stages[0].domain.clone(),
                katetov_core::ExtQ::fin(c),
            );
            let res = back_and_forth(&m, &n, &phi0, BafOptions { levels: *levels, ..Default::default() })?;
            Ok(serde_json::to_value(BafDoc::from_result(&res)).unwrap())
        }
        CatCmd::LimitCheck { args, samples } => {
            let chain = chain_for(args.category, args.seed, args.steps, args.max_points)?;
            let report = match args.category {
                CategoryName::Graphs => check_limit_criteria(&FinGraphCat, &chain, *samples, args.seed),
                CategoryName::Ratmetric => {
                    check_limit_criteria(&RatMetricCat::default(), &chain, *samples, args.seed)
                }
            };
            let frontier = match args.category {
                CategoryName::Graphs => saturated_frontier(&FinGraphCat, &chain),
                CategoryName::Ratmetric => saturated_frontier(&RatMetricCat::default(), &chain),
            };
            Ok(json!({
                "universal": report.all_universal(),
                "homogeneous": report.all_homogeneous(),
                "saturated_frontier": frontier,
                "universality": report.universality.iter().map(|s| json!({
                    "points": s.object_points,
                    "stage": s.stage,
                    "image": s.image,
                })).collect::<Vec<_>>(),
                "homogeneity": report.homogeneity.iter().map(|s| json!({
                    "stage_i": s.stage_i,
                    "stage_j": s.stage_j,
                    "eps": fmt_rat(&s.eps),
                    "twist_nontrivial": s.twist_nontrivial,
                    "aligned_at": s.aligned_at,
                })).collect::<Vec<_>>(),
            }))
        }
    }
}

fn run_uhf(cmd: &UhfCmd) -> Result<serde_json::Value, RunError> {
    match cmd {
        UhfCmd::CheckTrace { file } => {
            let dm = read_doc::<MorphismDoc>(file)?.to_morphism()?;
            // Normalize non-Lebesgue endpoints before the density check.
            let (_, conj_src) = normalize_trace(&dm.source)?;
            let (_, conj_tgt) = normalize_trace(&dm.target)?;
            let inner = uhf::compose_diagonal(&dm, &invert_normalization(&conj_src)?)?;
            let normalized = uhf::compose_diagonal(&conj_tgt, &inner)?;
            let density = pushforward_density(&normalized)?;
            Ok(json!({
                "trace_preserving": density.is_identically_one(),
                "density": density.cells.iter().map(|(lo, hi, v)| json!({
                    "lo": fmt_rat(lo),
                    "hi": fmt_rat(hi),
                    "value": fmt_rat(v),
                })).collect::<Vec<_>>(),
            }))
        }
        UhfCmd::HallMatch { file } => {
            #[derive(serde::Deserialize)]
            struct Instance {
                tuple1: Vec<MapDoc>,
                tuple2: Vec<MapDoc>,
                delta: String,
            }
            let inst: Instance = read_doc(file)?;
            let t1 = inst.tuple1.iter().map(|m| m.to_map()).collect::<Result<Vec<_>, _>>()?;
            let t2 = inst.tuple2.iter().map(|m| m.to_map()).collect::<Result<Vec<_>, _>>()?;
            let delta = parse_rat_arg(&inst.delta)?;
            let sigma = hall_match(&t1, &t2, &delta)?;
            let worst = sigma
                .iter()
                .enumerate()
                .map(|(l, &s)| t1[l].sup_distance(&t2[s]).unwrap())
                .max()
                .unwrap_or_else(|| rat_int(0));
            Ok(json!({
                "sigma": sigma,
                "sup_bound": fmt_rat(&worst),
                "two_delta": fmt_rat(&(&delta * rat_int(2))),
            }))
        }
        UhfCmd::Nap { i1, i2, nu, eps, lipschitz, m_cap } => {
            let i1 = read_doc::<MorphismDoc>(i1)?.to_morphism()?;
            let i2 = read_doc::<MorphismDoc>(i2)?.to_morphism()?;
            let nu = SupernaturalNumber::parse(nu).map_err(|e| RunError::malformed(e.to_string()))?;
            let eps = parse_rat_arg(eps)?;
            let lipschitz = parse_rat_arg(lipschitz)?;
            let out = nap_construct(&i1, &i2, &nu, &lipschitz, &eps, *m_cap)?;
            Ok(json!({
                "eta1": MorphismDoc::from_morphism(&out.eta1),
                "eta2": MorphismDoc::from_morphism(&out.eta2),
                "comp1": MorphismDoc::from_morphism(&out.comp1),
                "comp2": MorphismDoc::from_morphism(&out.comp2),
                "aligned": fmt_rat(&out.aligned),
                "hall_delta": fmt_rat(&out.hall_delta),
                "fineness": out.fineness,
            }))
        }
        UhfCmd::LimitCheck { nu, preset, base, depth, divisor_bound, eps_levels, chain } => {
            let nu = SupernaturalNumber::parse(nu).map_err(|e| RunError::malformed(e.to_string()))?;
            let chain = match chain {
                Some(path) => {
                    let docs: Vec<MorphismDoc> = read_doc(path)?;
                    let morphisms =
                        docs.iter().map(|d| d.to_morphism()).collect::<Result<Vec<_>, _>>()?;
                    uhf::UhfChain::new(morphisms)?
                }
                None => match preset {
                    ChainPreset::Canonical => subdivision_chain(*base, *depth)?,
                    ChainPreset::Identity => identity_chain(*base, *depth)?,
                },
            };
            let report = check_uhf_limit(&chain, &nu, *divisor_bound, &eps_schedule(*eps_levels))?;
            let artifact = json!({
                "passes": report.passes(),
                "cube_dims_positive": report.cube_dims_positive,
                "missing_divisors": report.missing_divisors,
                "fineness": report.fineness.iter().map(|s| json!({
                    "eps": fmt_rat(&s.eps),
                    "witness": s.witness,
                })).collect::<Vec<_>>(),
            });
            if report.passes() {
                Ok(artifact)
            } else {
                Err(RunError::invalid(format!(
                    "limit criteria fail: {}",
                    serde_json::to_string(&artifact).unwrap()
                )))
            }
        }
        UhfCmd::Hilbert { level } => {
            let h = hilbert_map(*level)?;
            Ok(json!({
                "level": h.level,
                "cells": h.cells,
                "cell_mass": fmt_rat(&h.cell_mass()),
                "uniform": h.masses_are_uniform(),
                "map": MapDoc::from_map(&h.map),
            }))
        }
    }
}

/// Inverts a trace-normalization conjugation (a single increasing
/// piecewise-affine homeomorphism) by inverting each affine piece.
fn invert_normalization(
    conj: &katetov_core::uhf::DiagonalMorphism,
) -> Result<katetov_core::uhf::DiagonalMorphism, UhfError> {
    use katetov_core::uhf::{AffinePiece, PiecewiseAffineMap};
    if conj.maps.len() != 1 {
        return Err(UhfError::Other("normalization must be a single map".into()));
    }
    let fwd = &conj.maps[0];
    let mut pieces = Vec::new();
    for p in fwd.pieces() {
        let (a, b) = (&p.coeffs[0].0, &p.coeffs[0].1);
        if *a <= rat_int(0) {
            return Err(UhfError::Other("homeomorphism must be increasing".into()));
        }
        let inv_a = a.recip();
        let inv_b = -(b * &inv_a);
        pieces.push(AffinePiece {
            lo: a * &p.lo + b,
            hi: a * &p.hi + b,
            coeffs: vec![(inv_a, inv_b)],
        });
    }
    let map = PiecewiseAffineMap::new(1, pieces)?;
    Ok(katetov_core::uhf::DiagonalMorphism {
        source: conj.target.clone(),
        target: conj.source.clone(),
        maps: vec![map],
        perm: vec![0],
    })
}

fn run_matrix(cmd: &MatrixCmd) -> Result<serde_json::Value, RunError> {
    match cmd {
        MatrixCmd::VerifyLemma { m, n, trials, seed } => {
            if *m == 0 || *n == 0 || *trials == 0 {
                return Err(RunError::malformed("m, n, trials must be positive"));
            }
            if m * n > 64 {
                return Err(RunError::exhausted("dimension above the bundled-solver cap 64"));
            }
            let hist = margin_sweep(*m, *n, *trials, *seed);
            let artifact = serde_json::to_value(&hist).unwrap();
            if hist.all_hold {
                Ok(artifact)
            } else {
                Err(RunError::invalid("almost-commuting bound violated"))
            }
        }
    }
}

/// Renders the artifact per the format flag and writes it out.
pub fn emit(
    artifact: &serde_json::Value,
    format: Format,
    out: Option<&Path>,
) -> std::io::Result<()> {
    let text = match format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(artifact).expect("serializable");
            t.push('\n');
            t
        }
        Format::Summary => {
            let mut s = String::new();
            summarize(artifact, "", &mut s);
            s
        }
    };
    match out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(v: &serde_json::Value, prefix: &str, out: &mut String) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                summarize(val, &key, out);
            }
        }
        serde_json::Value::Array(items) if items.len() > 8 => {
            let _ = writeln!(out, "{prefix}: [{} entries]", items.len());
        }
        other => {
            let _ = writeln!(out, "{prefix}: {other}");
        }
    }
}

/// Helper for tests and the acceptance suite: serialize a value to a file.
pub fn write_doc<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text)
}
