//! Command-line front end.
//!
//! Exit codes: 0 holds or complete, 1 violation found (or a report failed
//! recheck), 2 inconclusive, 3 usage or configuration error, 4 the
//! admissible set is empty and `--force` was not given, 5 stopped by
//! `--halt-after` before a verdict.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::codes::{
    check_weight_axioms, code_from_system, dual_code, family_weight_bounds, generalized_weights,
    predicted_direct_sum_profile, system_from_code, WeightMode, WeightOptions,
};
use crate::construction::{
    build_line, build_pseudoregulus, build_v, census, direct_sum_baseline, is_in_a, is_in_b, is_nonvacuous,
    k_invariant, ConstructionParams, QSystem, SystemKind,
};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::job::RunOptions;
use crate::linear::SubspaceQn;
use crate::report::{encode_elem, encode_vec, ProfileRecord, Report, SystemRecord, Timing, VerdictRecord};
use crate::verify::{max_dim_bound, recheck_witness, subspace_weight, verify_evasive, Mode, Status, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_VACUOUS: i32 = 4;
pub const EXIT_INTERRUPTED: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "rankscatter", version, about = "Scattered subspaces and rank-metric codes over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a system and report its dimensions and membership tests
    Construct(ConstructArgs),
    /// Check h-scatteredness
    VerifyScattered(VerifyArgs),
    /// Check (dim, r)-evasiveness
    VerifyEvasive(VerifyArgs),
    /// Generalized rank weights of the associated code
    Weights(WeightsArgs),
    /// Family weight bounds against the direct-sum profile
    Compare(CompareArgs),
    /// Count alpha tuples in the admissible sets
    Search(SearchArgs),
    /// Re-verify a report using only its contents
    Recheck(RecheckArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FieldArgs {
    /// Order q of the base field (a prime power)
    #[arg(long, default_value_t = 2, conflicts_with = "field")]
    pub q: u64,
    /// Extension degree n of F_{q^n} over F_q
    #[arg(long, required_unless_present = "field", conflicts_with = "field")]
    #[serde(default)]
    pub n: Option<u32>,
    /// Modulus coefficients over F_p, constant term first
    #[arg(long, conflicts_with = "field")]
    #[serde(default)]
    pub modulus: Option<String>,
    /// The whole field at once: p,s,n followed by optional modulus coefficients
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SystemChoice {
    /// V_{A,h}; needs --m, --h, --alphas
    Family,
    /// {(x, x^q, ..., x^{q^h})}; needs --h
    Pseudoregulus,
    /// --copies copies of the pseudoregulus; needs --h
    DirectSum,
    /// F_q-expansion of an F_{q^n}-line in dimension --k
    Line,
    /// generators from --generators
    Generators,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value = "family")]
    pub system: SystemChoice,
    #[arg(long)]
    #[serde(default)]
    pub m: Option<u32>,
    #[arg(long)]
    #[serde(default)]
    pub h: Option<u32>,
    /// Comma-separated elements: an index in field-element order, g, or g^j
    #[arg(long)]
    #[serde(default)]
    pub alphas: Option<String>,
    #[arg(long)]
    #[serde(default)]
    pub copies: Option<usize>,
    #[arg(long)]
    #[serde(default)]
    pub k: Option<usize>,
    /// A report or system record holding generators
    #[arg(long)]
    #[serde(default)]
    pub generators: Option<PathBuf>,
}

/// Options that affect how a job runs but not its result.
#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Worker threads (default: RANKSCATTER_WORKERS, else all CPUs)
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Append-only checkpoint file; an existing one is resumed
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many chunks (for testing interruption)
    #[arg(long)]
    pub halt_after: Option<u64>,
    /// Report path (default: standard output)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run even when the admissible set is empty
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Dimension of the F_{q^n}-subspaces checked (default: the system's h)
    #[arg(long)]
    #[serde(default)]
    pub dim: Option<usize>,
    /// Weight bound (evasiveness only)
    #[arg(long)]
    #[serde(default)]
    pub r: Option<usize>,
    /// exhaustive, witness-span, sampled or sampled-tuples
    #[arg(long, default_value = "witness-span")]
    pub mode: Mode,
    /// Positions to check; required by sampled modes, a cap otherwise
    #[arg(long)]
    #[serde(default)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WeightsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated indices (default: all)
    #[arg(long)]
    #[serde(default)]
    pub rho: Option<String>,
    /// exhaustive or sampled
    #[arg(long, default_value = "exhaustive", value_parser = parse_weight_mode)]
    pub mode: WeightMode,
    #[arg(long)]
    #[serde(default)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Also profile the dual code and check Wei-type duality
    #[arg(long)]
    #[serde(default)]
    pub dual: bool,
    /// Write the profile as CSV
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated values of s for the bounds at s(h+1); needs B
    #[arg(long)]
    #[serde(default)]
    pub s: Option<String>,
    /// Sample this many subspaces per bounded index and test the bounds
    #[arg(long)]
    #[serde(default)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FieldArgs,
    #[arg(long)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub h: u32,
    /// Also test membership in B
    #[arg(long)]
    #[serde(default)]
    pub with_b: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub run: RunArgs,
}

fn one() -> u32 {
    1
}

#[derive(Args, Debug, Clone)]
pub struct RecheckArgs {
    /// Report to re-verify
    pub report: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

fn parse_weight_mode(s: &str) -> std::result::Result<WeightMode, String> {
    match s {
        "exhaustive" => Ok(WeightMode::Exhaustive),
        "sampled" => Ok(WeightMode::Sampled),
        other => Err(format!("unknown weight mode {other:?}")),
    }
}

/// A finished command: its report and exit code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit: i32,
    pub summary: String,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

pub fn tower(a: &FieldArgs) -> Result<FieldTower> {
    if let Some(spec) = &a.field {
        let parts = parse_list::<u32>(spec)?;
        let [p, s, n, modulus @ ..] = parts.as_slice() else {
            return Err(usage(format!("--field needs p,s,n[,modulus], got {spec:?}")));
        };
        let modulus = (!modulus.is_empty()).then_some(modulus);
        return FieldTower::new(*p, *s, *n, modulus);
    }
    let n = a.n.ok_or_else(|| usage("--n is required"))?;
    if a.q < 2 {
        return Err(usage(format!("q = {} is not a prime power", a.q)));
    }
    let p = (2..=a.q).find(|d| a.q % d == 0).expect("q >= 2 has a prime factor");
    let (mut rest, mut s) = (a.q, 0u32);
    while rest % p == 0 {
        rest /= p;
        s += 1;
    }
    if rest != 1 {
        return Err(usage(format!("q = {} is not a prime power", a.q)));
    }
    let modulus = a.modulus.as_deref().map(parse_list::<u32>).transpose()?;
    FieldTower::new(p as u32, s, n, modulus.as_deref())
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Parse(format!("bad list entry {t:?}"))))
        .collect()
}

/// `5`, `g` or `g^8`.
pub fn parse_element(f: &FieldTower, token: &str) -> Result<Fe> {
    let t = token.trim();
    if let Some(rest) = t.strip_prefix('g') {
        let e = match rest.strip_prefix('^') {
            Some(e) => e.parse::<u128>().map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?,
            None if rest.is_empty() => 1,
            None => return Err(Error::Parse(format!("bad element {t:?}"))),
        };
        return Ok(f.pow(f.generator(), e));
    }
    let idx = t.parse::<u64>().map_err(|_| Error::Parse(format!("bad element {t:?}")))?;
    f.from_index(idx)
}

fn family_params(f: &FieldTower, a: &SystemArgs) -> Result<ConstructionParams> {
    let m = a.m.ok_or_else(|| usage("--m is required"))?;
    let h = a.h.ok_or_else(|| usage("--h is required"))?;
    let alphas = a.alphas.as_deref().ok_or_else(|| usage("--alphas is required"))?;
    let alphas = alphas.split(',').map(|t| parse_element(f, t)).collect::<Result<Vec<_>>>()?;
    ConstructionParams::new(f, m, h, alphas)
}

pub fn build_system(f: &FieldTower, a: &SystemArgs) -> Result<QSystem> {
    match a.system {
        SystemChoice::Family => Ok(build_v(f, &family_params(f, a)?)),
        SystemChoice::Pseudoregulus => build_pseudoregulus(f, a.h.ok_or_else(|| usage("--h is required"))?),
        SystemChoice::DirectSum => {
            direct_sum_baseline(f, a.h.ok_or_else(|| usage("--h is required"))?, a.copies.unwrap_or(2))
        }
        SystemChoice::Line => build_line(f, a.k.unwrap_or(2)),
        SystemChoice::Generators => {
            let path = a.generators.as_ref().ok_or_else(|| usage("--generators is required"))?;
            let text = std::fs::read_to_string(path)?;
            let record = match Report::parse(&text) {
                Ok(r) => {
                    if r.tower()?.descriptor() != f.descriptor() {
                        return Err(Error::TowerMismatch);
                    }
                    r.system.ok_or_else(|| usage("report has no system"))?
                }
                Err(_) => serde_json::from_str::<SystemRecord>(&text)?,
            };
            Ok(QSystem { kind: SystemKind::Generators, space: record.space(f)? })
        }
    }
}

/// The h a system was built with, if any.
fn system_h(s: &QSystem) -> Option<usize> {
    match &s.kind {
        SystemKind::Family(p) => Some(p.h() as usize),
        SystemKind::Pseudoregulus { h } => Some(*h as usize),
        SystemKind::DirectSum(parts) => match parts.first() {
            Some(SystemKind::Pseudoregulus { h }) => Some(*h as usize),
            _ => None,
        },
        _ => None,
    }
}

/// Set when the admissible set for this m is empty.
fn vacuity(f: &FieldTower, m: u32) -> Option<String> {
    (!is_nonvacuous(f, m)).then(|| {
        format!(
            "the admissible set is empty: gcd(1 + q + ... + q^{}, q^{} - 1) = 1",
            m - 1,
            f.n()
        )
    })
}

fn family_vacuity(f: &FieldTower, s: &QSystem) -> Option<String> {
    match &s.kind {
        SystemKind::Family(p) => vacuity(f, p.m()),
        _ => None,
    }
}

fn run_options(r: &RunArgs) -> RunOptions {
    RunOptions { workers: r.workers, checkpoint: r.checkpoint.clone(), fingerprint: String::new(), halt_after: r.halt_after }
}

fn family_info(f: &FieldTower, p: &ConstructionParams) -> Value {
    json!({
        "m": p.m(),
        "h": p.h(),
        "k_invariant": encode_elem(f, k_invariant(f, p)),
        "nonvacuous": is_nonvacuous(f, p.m()),
        "in_a": is_in_a(f, p),
        "in_b": is_in_b(f, p),
    })
}

pub fn construct_result(f: &FieldTower, s: &QSystem, h: Option<usize>) -> Value {
    let mut v = json!({
        "k": s.k(),
        "t": s.t(),
        "spans_ambient": s.spans_ambient(f),
    });
    if let Some(h) = h {
        let bound = max_dim_bound(s.k(), f.n() as usize, h);
        v["h"] = json!(h);
        v["max_dim_bound"] = json!(bound);
        v["is_maximum_size"] = json!(s.t() == bound);
    }
    if let SystemKind::Family(p) = &s.kind {
        v["family"] = family_info(f, p);
    }
    v
}

fn construct(a: &ConstructArgs) -> Result<Outcome> {
    let f = tower(&a.field)?;
    let s = build_system(&f, &a.system)?;
    let result = construct_result(&f, &s, system_h(&s));
    let summary = format!("system k = {}, t = {}, spans = {}", s.k(), s.t(), s.spans_ambient(&f));
    let report = Report::new("construct", serde_json::to_value(a)?, f.descriptor(), Some(SystemRecord::from_system(&f, &s)), result);
    Ok(Outcome { report, exit: EXIT_OK, summary })
}

/// Runs a verification. `scattered` selects h-scatteredness, which also
/// fails for a system that does not span the ambient space.
pub fn verify_record(
    f: &FieldTower,
    s: &QSystem,
    scattered: bool,
    dim: usize,
    r: usize,
    opts: &VerifyOptions,
) -> Result<(VerdictRecord, Timing)> {
    let spans = s.spans_ambient(f);
    let verdict = verify_evasive(f, &s.space, dim, r, opts)?;
    let timing = Timing { elapsed_ms: 0, workers: verdict.workers, resumed_chunks: verdict.resumed_chunks };
    let mut rec = VerdictRecord::from_verdict(f, &verdict, spans);
    if scattered && !spans && rec.finished && rec.status != Status::Violated {
        // no heavy subspace, but a non-spanning system is not scattered
        rec.status = Status::Violated;
    }
    Ok((rec, timing))
}

fn verify(a: &VerifyArgs, scattered: bool) -> Result<Outcome> {
    let f = tower(&a.field)?;
    let s = build_system(&f, &a.system)?;
    if let Some(msg) = family_vacuity(&f, &s) {
        if !a.run.force {
            return Err(Error::OutsideFamily(msg));
        }
    }
    let dim = a.dim.or_else(|| system_h(&s)).ok_or_else(|| usage("--dim is required for this system"))?;
    let r = if scattered { dim } else { a.r.ok_or_else(|| usage("--r is required"))? };
    if scattered && a.r.is_some_and(|r| r != dim) {
        return Err(usage("--r does not apply to verify-scattered"));
    }
    let opts = VerifyOptions { mode: a.mode, budget: a.budget, seed: a.seed, run: run_options(&a.run) };
    let (rec, timing) = verify_record(&f, &s, scattered, dim, r, &opts)?;
    let exit = if !rec.finished {
        EXIT_INTERRUPTED
    } else {
        match rec.status {
            Status::Holds => EXIT_OK,
            Status::Violated => EXIT_VIOLATED,
            Status::Inconclusive => EXIT_INCONCLUSIVE,
        }
    };
    let what = if scattered { format!("{dim}-scattered") } else { format!("({dim}, {r})-evasive") };
    let summary = match (rec.finished, rec.status, &rec.witness) {
        (false, _, _) => format!("{what}: interrupted after {} chunks", a.run.halt_after.unwrap_or(0)),
        (_, Status::Violated, Some(w)) => format!("{what}: violated, witness of weight {} > {}", w.weight, w.bound),
        (_, Status::Violated, None) => format!("{what}: violated, the system does not span the ambient space"),
        (_, st, _) => format!("{what}: {} after {} of {} positions", json!(st).as_str().unwrap_or(""), rec.subspaces_checked, rec.total),
    };
    let command = if scattered { "verify-scattered" } else { "verify-evasive" };
    let mut report = Report::new(command, serde_json::to_value(a)?, f.descriptor(), Some(SystemRecord::from_system(&f, &s)), serde_json::to_value(&rec)?);
    report.timing = timing;
    Ok(Outcome { report, exit, summary })
}

fn weight_options(mode: WeightMode, budget: Option<u64>, seed: u64, workers: usize) -> WeightOptions {
    WeightOptions { mode, budget, seed, workers }
}

fn weights(a: &WeightsArgs) -> Result<Outcome> {
    let f = tower(&a.field)?;
    let s = build_system(&f, &a.system)?;
    if let Some(msg) = family_vacuity(&f, &s) {
        if !a.run.force {
            return Err(Error::OutsideFamily(msg));
        }
    }
    let k = s.k();
    let rhos: Vec<usize> = match &a.rho {
        Some(list) => parse_list(list)?,
        None => (1..=k).collect(),
    };
    let opts = weight_options(a.mode, a.budget, a.seed, a.run.workers);
    let profile = generalized_weights(&f, &s.space, &rhos, &opts)?;
    let exact = profile.entries.iter().all(|e| e.is_exact());
    let mut result = json!({
        "profile": ProfileRecord::from_profile(&f, &profile),
        "exact": exact,
    });
    let mut exit = if exact { EXIT_OK } else { EXIT_INCONCLUSIVE };
    let mut notes = Vec::new();
    if a.dual {
        let code = code_from_system(&f, &s.space)?;
        let du = system_from_code(&f, &dual_code(&f, &code)?)?;
        let dual_rhos: Vec<usize> = (1..=du.ambient()).collect();
        let dual = generalized_weights(&f, &du, &dual_rhos, &opts)?;
        result["dual_profile"] = serde_json::to_value(ProfileRecord::from_profile(&f, &dual))?;
        match check_weight_axioms(&profile, &dual, s.t()) {
            Ok(ok) => {
                result["axioms_hold"] = json!(ok);
                notes.push(format!("duality {}", if ok { "holds" } else { "FAILS" }));
                if !ok {
                    exit = EXIT_VIOLATED;
                }
            }
            Err(Error::IncompleteProfile(_)) => result["axioms_hold"] = Value::Null,
            Err(e) => return Err(e),
        }
    }
    if let SystemKind::DirectSum(parts) = &s.kind {
        if let (Some(h), true) = (system_h(&s), parts.len() >= 2) {
            let predicted = predicted_direct_sum_profile(parts.len(), f.n() as usize, h)?;
            let consistent = profile.entries.iter().all(|e| {
                let p = predicted.entry(e.rho).expect("same dimension");
                e.upper >= p.lower && e.lower <= p.upper
            });
            result["predicted"] = serde_json::to_value(ProfileRecord::from_profile(&f, &predicted))?;
            result["consistent_with_prediction"] = json!(consistent);
            if !consistent {
                exit = EXIT_VIOLATED;
            }
        }
    }
    if let Some(path) = &a.csv {
        std::fs::write(path, profile.to_csv())?;
    }
    let values: Vec<String> = profile.entries.iter().map(|e| e.value.map_or("?".into(), |v| v.to_string())).collect();
    let summary = format!(
        "weights ({}): {}{}{}",
        if exact { "exact" } else { "bounds" },
        values.join(", "),
        if notes.is_empty() { "" } else { "; " },
        notes.join("; ")
    );
    let report = Report::new("weights", serde_json::to_value(a)?, f.descriptor(), Some(SystemRecord::from_system(&f, &s)), result);
    Ok(Outcome { report, exit, summary })
}

fn compare(a: &CompareArgs) -> Result<Outcome> {
    let f = tower(&a.field)?;
    if a.system.system != SystemChoice::Family {
        return Err(usage("compare needs --system family"));
    }
    let params = family_params(&f, &a.system)?;
    if let Some(msg) = vacuity(&f, params.m()) {
        if !a.run.force {
            return Err(Error::OutsideFamily(msg));
        }
    }
    let s_list: Vec<usize> = a.s.as_deref().map(parse_list).transpose()?.unwrap_or_default();
    let bounds = family_weight_bounds(&f, &params, &s_list)?;
    let predicted = predicted_direct_sum_profile(params.m() as usize, f.n() as usize, params.h() as usize)?;
    let mut result = json!({
        "family": family_info(&f, &params),
        "bounds": bounds,
        "direct_sum": predicted,
    });
    let mut exit = EXIT_OK;
    let exceeds = bounds.comparisons.iter().filter(|c| c.exceeds).count();
    let mut summary = format!("{exceeds} of {} bounds exceed the direct-sum values", bounds.comparisons.len());
    let mut system = None;
    if let Some(budget) = a.budget {
        let s = build_v(&f, &params);
        let rhos: Vec<usize> = bounds.profile.entries.iter().map(|e| e.rho).collect();
        let sampled = generalized_weights(&f, &s.space, &rhos, &weight_options(WeightMode::Sampled, Some(budget), a.seed, a.run.workers))?;
        let contradictions: Vec<usize> = sampled
            .entries
            .iter()
            .zip(&bounds.profile.entries)
            .filter(|(sm, b)| sm.upper < b.lower)
            .map(|(sm, _)| sm.rho)
            .collect();
        if !contradictions.is_empty() {
            exit = EXIT_VIOLATED;
            summary.push_str(&format!("; sampling CONTRADICTS the bounds at rho = {contradictions:?}"));
        } else {
            summary.push_str("; sampling agrees with the bounds");
        }
        result["sampled"] = serde_json::to_value(ProfileRecord::from_profile(&f, &sampled))?;
        result["contradictions"] = json!(contradictions);
        system = Some(SystemRecord::from_system(&f, &s));
    }
    let report = Report::new("compare", serde_json::to_value(a)?, f.descriptor(), system, result);
    Ok(Outcome { report, exit, summary })
}

fn search(a: &SearchArgs) -> Result<Outcome> {
    let f = tower(&a.field)?;
    if let Some(msg) = vacuity(&f, a.m) {
        if !a.run.force {
            return Err(Error::OutsideFamily(msg));
        }
    }
    let c = census(&f, a.m, a.h, a.with_b)?;
    let mut result = json!({
        "tuples": c.tuples,
        "in_a": c.in_a,
        "nonvacuous": is_nonvacuous(&f, a.m),
        "first_in_a": c.first_in_a.as_ref().map(|v| encode_vec(&f, v)),
    });
    if a.with_b {
        result["in_b"] = json!(c.in_b);
        result["first_in_b"] = json!(c.first_in_b.as_ref().map(|v| encode_vec(&f, v)));
    }
    let summary = format!("{} of {} tuples lie in A", c.in_a, c.tuples);
    let report = Report::new("search", serde_json::to_value(a)?, f.descriptor(), None, result);
    Ok(Outcome { report, exit: EXIT_OK, summary })
}

/// What `recheck` found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecheckOutcome {
    pub command: String,
    pub checks: usize,
    pub issues: Vec<String>,
}

impl RecheckOutcome {
    pub fn confirmed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Re-verifies a report from its own contents. Witnesses are checked
/// directly; verdicts without a witness and derived tables are recomputed.
pub fn recheck(report: &Report, workers: usize) -> Result<RecheckOutcome> {
    let f = report.tower()?;
    let mut out = RecheckOutcome { command: report.command.clone(), checks: 0, issues: Vec::new() };
    let system = match &report.system {
        Some(rec) => {
            let space = rec.space(&f)?;
            let kind = match rec.params(&f)? {
                Some(p) => {
                    let rebuilt = build_v(&f, &p);
                    out.checks += 1;
                    if rebuilt.space.expansion() != space.expansion() {
                        out.issues.push("recorded generators do not span the recorded family's system".into());
                    }
                    SystemKind::Family(p)
                }
                None => {
                    // named constructions are rebuilt from the recorded config
                    if let Ok(args) = serde_json::from_value::<SystemArgs>(report.config.clone()) {
                        if !matches!(args.system, SystemChoice::Family | SystemChoice::Generators) {
                            let rebuilt = build_system(&f, &args)?;
                            out.checks += 1;
                            if rec.kind != SystemRecord::from_system(&f, &rebuilt).kind
                                || rebuilt.space.expansion() != space.expansion()
                            {
                                out.issues.push(format!("recorded generators do not span the {} system", rec.kind));
                            }
                        }
                    }
                    SystemKind::Generators
                }
            };
            let s = QSystem { kind, space };
            out.checks += 1;
            if (s.k(), s.t(), s.spans_ambient(&f)) != (rec.k, rec.t, rec.spans_ambient) {
                out.issues.push("recorded k, t or spanning flag disagree with the generators".into());
            }
            Some(s)
        }
        None => None,
    };
    let need_system = || system.clone().ok_or_else(|| Error::Parse("report has no system".into()));
    match report.command.as_str() {
        "construct" => {
            let s = need_system()?;
            // the record keeps generators only, so h is taken from the result
            let h = report.result.get("h").and_then(Value::as_u64).map(|h| h as usize);
            let expected = construct_result(&f, &s, h);
            out.checks += 1;
            if expected != report.result {
                out.issues.push("construction summary does not match a recomputation".into());
            }
        }
        "verify-scattered" | "verify-evasive" => {
            let s = need_system()?;
            let rec: VerdictRecord = serde_json::from_value(report.result.clone())?;
            if !rec.finished {
                out.issues.push("report is from an interrupted run".into());
            }
            match &rec.witness {
                Some(w) => {
                    let witness = w.to_witness(&f)?;
                    let check = recheck_witness(&f, &s.space, &witness, rec.hdim)?;
                    out.checks += 1;
                    out.issues.extend(check.issues);
                    if rec.status != Status::Violated {
                        out.issues.push("witness present but status is not violated".into());
                    }
                    if witness.bound != rec.bound {
                        out.issues.push("witness bound differs from the verdict bound".into());
                    }
                }
                None => {
                    let scattered = report.command == "verify-scattered";
                    let args: VerifyArgs = serde_json::from_value(report.config.clone())?;
                    let opts = VerifyOptions { mode: args.mode, budget: args.budget, seed: args.seed, run: RunOptions { workers, ..RunOptions::default() } };
                    let (again, _) = verify_record(&f, &s, scattered, rec.hdim, rec.bound, &opts)?;
                    out.checks += 1;
                    if again != rec {
                        out.issues.push(format!(
                            "re-running the sweep gives {:?} after {} of {} subspaces, report says {:?} after {} of {}",
                            again.status, again.subspaces_checked, again.total, rec.status, rec.subspaces_checked, rec.total
                        ));
                    }
                }
            }
        }
        "weights" => {
            let s = need_system()?;
            let profile: ProfileRecord = serde_json::from_value(report.result["profile"].clone())?;
            let profile = profile.to_profile(&f)?;
            if profile.t != s.t() || profile.k != s.k() {
                out.issues.push("profile dimensions differ from the system".into());
            }
            for e in &profile.entries {
                let Some(w) = &e.witness else { continue };
                let h = SubspaceQn::span(&f, s.k(), w)?;
                out.checks += 1;
                if h.dim() != s.k() - e.rho {
                    out.issues.push(format!("rho = {}: witness has dimension {}", e.rho, h.dim()));
                    continue;
                }
                let weight = subspace_weight(&f, &s.space, &h)?;
                if Some(s.t() - weight) != e.value {
                    out.issues.push(format!("rho = {}: witness gives {} but the report says {:?}", e.rho, s.t() - weight, e.value));
                }
            }
            let exact: Vec<usize> = profile.entries.iter().filter(|e| e.is_exact()).filter_map(|e| e.value).collect();
            out.checks += 1;
            if exact.windows(2).any(|w| w[0] >= w[1]) {
                out.issues.push("exact entries are not strictly increasing".into());
            }
        }
        "compare" | "search" => {
            let again = match report.command.as_str() {
                "compare" => {
                    let mut args: CompareArgs = serde_json::from_value(report.config.clone())?;
                    args.run.workers = workers;
                    args.run.force = true;
                    compare(&args)?
                }
                _ => {
                    let mut args: SearchArgs = serde_json::from_value(report.config.clone())?;
                    args.run.force = true;
                    search(&args)?
                }
            };
            out.checks += 1;
            if again.report.result != report.result {
                out.issues.push("result does not match a recomputation".into());
            }
        }
        other => return Err(Error::Parse(format!("unknown report command {other:?}"))),
    }
    Ok(out)
}

fn emit(outcome: &Outcome, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => outcome.report.write(path)?,
        None => print!("{}", outcome.report.to_json()),
    }
    eprintln!("{}", outcome.summary);
    Ok(())
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::OutsideFamily(msg) if msg.starts_with("the admissible set is empty") => EXIT_VACUOUS,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    let started = Instant::now();
    let (mut outcome, out) = match cmd {
        Command::Construct(a) => (construct(&a)?, a.run.out.clone()),
        Command::VerifyScattered(a) => (verify(&a, true)?, a.run.out.clone()),
        Command::VerifyEvasive(a) => (verify(&a, false)?, a.run.out.clone()),
        Command::Weights(a) => (weights(&a)?, a.run.out.clone()),
        Command::Compare(a) => (compare(&a)?, a.run.out.clone()),
        Command::Search(a) => (search(&a)?, a.run.out.clone()),
        Command::Recheck(a) => {
            let report = Report::read(&a.report)?;
            let r = recheck(&report, a.workers)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            if r.confirmed() {
                eprintln!("{}: confirmed ({} checks)", r.command, r.checks);
                return Ok(EXIT_OK);
            }
            for issue in &r.issues {
                eprintln!("corrupt: {issue}");
            }
            return Ok(EXIT_VIOLATED);
        }
    };
    outcome.report.timing.elapsed_ms = started.elapsed().as_millis() as u64;
    if outcome.report.timing.workers == 0 {
        outcome.report.timing.workers = crate::job::resolve_workers(0);
    }
    emit(&outcome, out.as_ref())?;
    Ok(outcome.exit)
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_for(&e);
            if code == EXIT_VACUOUS {
                eprintln!("warning: {e}; pass --force to run anyway");
            } else {
                eprintln!("error: {e}");
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64, n: u32) -> FieldArgs {
        FieldArgs { q, n: Some(n), modulus: None, field: None }
    }

    #[test]
    fn prime_power_parsing() {
        let f = tower(&field(4, 3)).unwrap();
        assert_eq!((f.p(), f.s(), f.n()), (2, 2, 3));
        assert!(tower(&field(6, 3)).is_err());
        assert!(tower(&field(1, 3)).is_err());
        let f = tower(&FieldArgs { q: 2, n: Some(4), modulus: Some("1,0,0,1,1".into()), field: None }).unwrap();
        assert_eq!(f.modulus(), &[1, 0, 0, 1, 1]);
        let spec = |s: &str| FieldArgs { q: 2, n: None, modulus: None, field: Some(s.into()) };
        let f = tower(&spec("3,1,2")).unwrap();
        assert_eq!((f.p(), f.s(), f.n()), (3, 1, 2));
        assert_eq!(tower(&spec("2,1,4,1,0,0,1,1")).unwrap().modulus(), &[1, 0, 0, 1, 1]);
        assert!(tower(&spec("2,1")).is_err());
    }

    #[test]
    fn element_tokens() {
        let f = tower(&field(2, 4)).unwrap();
        let g = f.generator();
        assert_eq!(parse_element(&f, "g").unwrap(), g);
        assert_eq!(parse_element(&f, "g^8").unwrap(), f.pow(g, 8));
        assert_eq!(parse_element(&f, "1").unwrap(), Fe::ONE);
        assert!(parse_element(&f, "16").is_err());
        assert!(parse_element(&f, "h").is_err());
    }

    #[test]
    fn usage_errors_exit_3() {
        assert_eq!(run(["rankscatter", "verify-scattered", "--n", "4", "--system", "family"]), EXIT_USAGE);
        assert_eq!(run(["rankscatter", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["rankscatter", "verify-evasive", "--n", "4", "--system", "pseudoregulus", "--h", "1", "--dim", "1"]), EXIT_USAGE);
    }

    #[test]
    fn vacuous_family_needs_force() {
        // 1 + 2 + 4 = 7 is prime to 15
        let args = ["rankscatter", "search", "--n", "4", "--m", "3", "--out", "/dev/null"];
        assert_eq!(run(args), EXIT_VACUOUS);
        let forced = ["rankscatter", "search", "--n", "4", "--m", "3", "--force", "--out", "/dev/null"];
        assert_eq!(run(forced), EXIT_OK);
    }

    #[test]
    fn config_round_trip() {
        let cli = Cli::try_parse_from([
            "rankscatter", "verify-scattered", "--n", "4", "--m", "4", "--h", "2", "--alphas", "g,1,1,1",
            "--mode", "sampled-tuples", "--budget", "10", "--workers", "3",
        ])
        .unwrap();
        let Command::VerifyScattered(a) = cli.command else { panic!("wrong command") };
        let v = serde_json::to_value(&a).unwrap();
        assert!(v.get("workers").is_none());
        let back: VerifyArgs = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(serde_json::to_value(&back).unwrap(), v);
        assert_eq!(back.mode, Mode::SampledTuples);
    }
}
