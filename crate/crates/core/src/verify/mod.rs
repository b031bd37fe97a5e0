//! Scatteredness and evasiveness of F_q-subspaces.
//!
//! U is (hdim, r)-evasive when every hdim-dimensional F_{q^n}-subspace H
//! meets U in F_q-dimension at most r, and h-scattered when it spans the
//! ambient space and is (h, h)-evasive.
//!
//! Witness-span mode rests on one observation: if H violates the bound then
//! so does H' = <U ∩ H>, a subspace of dimension at most hdim spanned by
//! vectors of U. Sweeping spans of d-tuples of U for d <= hdim therefore
//! finds a violation whenever one exists; a violating H' is padded with unit
//! vectors to dimension hdim, which can only raise its weight. The first
//! vector of a tuple is taken up to F_q-scalars; nothing else is quotiented.

mod projector;
mod sweeps;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::fp::RowKind;
use crate::job::{self, RunOptions};
use crate::linear::{fq_intersection_basis, fq_intersection_dim, FqSubspace, Grassmannian, SubspaceQn};
use crate::with_row_kind;

pub(crate) use projector::Projector;
pub(crate) use sweeps::{chunk_rng, proof_chunk_len, SAMPLE_CHUNK};
use sweeps::{ExhaustiveSweep, SampledSweep, SampledTuplesSweep, SpanTables, WitnessSource, WitnessSpanSweep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// every hdim-dimensional subspace
    Exhaustive,
    /// spans of tuples of U
    WitnessSpan,
    /// seeded random hdim-dimensional subspaces
    Sampled,
    /// seeded random hdim-tuples of U
    SampledTuples,
}

impl Mode {
    pub fn is_sampled(self) -> bool {
        matches!(self, Mode::Sampled | Mode::SampledTuples)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exhaustive => "exhaustive",
            Mode::WitnessSpan => "witness-span",
            Mode::Sampled => "sampled",
            Mode::SampledTuples => "sampled-tuples",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s.replace('_', "-").as_str() {
            "exhaustive" => Ok(Mode::Exhaustive),
            "witness-span" => Ok(Mode::WitnessSpan),
            "sampled" => Ok(Mode::Sampled),
            "sampled-tuples" => Ok(Mode::SampledTuples),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Violated,
    Inconclusive,
}

/// A subspace H of dimension hdim whose intersection with U is too large.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub mode: Mode,
    pub bound: usize,
    pub weight: usize,
    /// RREF basis of H
    pub h_basis: Vec<Vec<Fe>>,
    /// F_q-basis of U ∩ H
    pub intersection_basis: Vec<Vec<Fe>>,
    /// sweep position at which H was found
    pub tuple_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    pub mode: Mode,
    pub hdim: usize,
    pub bound: usize,
    pub witness: Option<Witness>,
    /// sweep positions consumed up to the verdict
    pub subspaces_checked: u64,
    /// positions of the complete sweep
    pub total: u64,
    pub seed: Option<u64>,
    /// false when the run stopped early; the checkpoint holds the progress
    pub finished: bool,
    pub resumed_chunks: u64,
    pub workers: usize,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub mode: Mode,
    /// positions to check; required for sampled modes, a cap otherwise
    pub budget: Option<u64>,
    pub seed: u64,
    pub run: RunOptions,
}

impl VerifyOptions {
    pub fn new(mode: Mode) -> VerifyOptions {
        VerifyOptions { mode, budget: None, seed: 0, run: RunOptions::default() }
    }

    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.run.workers = workers;
        self
    }
}

/// floor(r n / (h + 1)), the largest F_q-dimension of an h-scattered
/// subspace of F_{q^n}^r.
pub fn max_dim_bound(r: usize, n: usize, h: usize) -> usize {
    r * n / (h + 1)
}

/// dim_Fq(U ∩ H), computed directly from both F_p-expansions.
pub fn subspace_weight(f: &FieldTower, u: &FqSubspace, h: &SubspaceQn) -> Result<usize> {
    if u.ambient() != h.ambient() {
        return Err(Error::DimensionMismatch { expected: u.ambient(), got: h.ambient() });
    }
    fq_intersection_dim(f, u, &h.as_fq(f))
}

/// h-scatteredness: U spans the ambient space and is (h, h)-evasive.
///
/// A non-spanning U is still swept; a weight violation is reported as
/// usual, otherwise the result is `Error::Degenerate`.
pub fn verify_h_scattered(f: &FieldTower, u: &FqSubspace, h: usize, opts: &VerifyOptions) -> Result<Verdict> {
    let v = verify_evasive(f, u, h, h, opts)?;
    if v.status != Status::Violated && v.finished && !u.spans_ambient(f) {
        return Err(Error::Degenerate);
    }
    Ok(v)
}

/// (hdim, r)-evasiveness.
pub fn verify_evasive(f: &FieldTower, u: &FqSubspace, hdim: usize, r: usize, opts: &VerifyOptions) -> Result<Verdict> {
    let k = u.ambient();
    if hdim == 0 || hdim >= k {
        return Err(Error::InvalidParams(format!("subspace dimension {hdim} must satisfy 1 <= hdim < k = {k}")));
    }
    if r < hdim {
        return Err(Error::InvalidParams(format!("bound r = {r} is below hdim = {hdim}")));
    }
    let budget = match (opts.mode.is_sampled(), opts.budget) {
        (true, None | Some(0)) => return Err(Error::InvalidParams("sampled modes need a positive budget".into())),
        (_, b) => b,
    };
    let mut run = opts.run.clone();
    run.fingerprint = fingerprint(f, u, hdim, r, opts);
    match opts.mode {
        Mode::Exhaustive => {
            let grass = Grassmannian::new(k, hdim, f.order())?;
            let limit = budget.map_or(grass.count(), |b| b.min(grass.count()));
            let kind = RowKind::choose(f.p(), k * f.degree() - u.expansion().len());
            with_row_kind!(kind, R => {
                let sweep = ExhaustiveSweep::<R> { f, proj: Projector::new(f, u), grass, bound: r, limit };
                let full = sweep.grass.count();
                finish(f, u, &sweep, full, hdim, r, opts, &run)
            })
        }
        Mode::Sampled => {
            let kind = RowKind::choose(f.p(), k * f.degree() - u.expansion().len());
            with_row_kind!(kind, R => {
                let sweep = SampledSweep::<R> {
                    f,
                    proj: Projector::new(f, u),
                    k,
                    hdim,
                    bound: r,
                    budget: budget.unwrap_or(0),
                    seed: opts.seed,
                };
                finish(f, u, &sweep, sweep.budget, hdim, r, opts, &run)
            })
        }
        Mode::WitnessSpan | Mode::SampledTuples => {
            let width = 2 * k * f.degree() - u.expansion().len();
            let kind = RowKind::choose(f.p(), width);
            with_row_kind!(kind, R => {
                let tables = SpanTables::<R>::new(f, u)?;
                if opts.mode == Mode::WitnessSpan {
                    let sweep = WitnessSpanSweep::new(f, tables, hdim, r, budget)?;
                    let full = sweep.full_total();
                    finish(f, u, &sweep, full, hdim, r, opts, &run)
                } else {
                    let sweep = SampledTuplesSweep { f, tables, hdim, bound: r, budget: budget.unwrap_or(0), seed: opts.seed };
                    finish(f, u, &sweep, sweep.budget, hdim, r, opts, &run)
                }
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish<S: WitnessSource>(
    f: &FieldTower,
    u: &FqSubspace,
    sweep: &S,
    full_total: u64,
    hdim: usize,
    bound: usize,
    opts: &VerifyOptions,
    run: &RunOptions,
) -> Result<Verdict> {
    let out = job::run(sweep, run)?;
    let mut verdict = Verdict {
        status: Status::Inconclusive,
        mode: opts.mode,
        hdim,
        bound,
        witness: None,
        subspaces_checked: out.positions_checked,
        total: full_total,
        seed: opts.mode.is_sampled().then_some(opts.seed),
        finished: out.finished,
        resumed_chunks: out.resumed_chunks,
        workers: out.workers,
    };
    if !out.finished {
        return Ok(verdict);
    }
    match out.hit {
        Some(pos) => {
            let h = SubspaceQn::span(f, u.ambient(), &sweep.rows_at(pos))?.extend_to(f, hdim);
            verdict.witness = Some(build_witness(f, u, &h, opts.mode, bound, pos)?);
            verdict.status = Status::Violated;
        }
        None if !opts.mode.is_sampled() && sweep.total() == full_total => verdict.status = Status::Holds,
        None => {}
    }
    Ok(verdict)
}

pub(crate) fn build_witness(f: &FieldTower, u: &FqSubspace, h: &SubspaceQn, mode: Mode, bound: usize, pos: u64) -> Result<Witness> {
    let hq = h.as_fq(f);
    let intersection_basis = fq_intersection_basis(f, u, &hq)?;
    Ok(Witness {
        mode,
        bound,
        weight: intersection_basis.len(),
        h_basis: h.basis().to_vec(),
        intersection_basis,
        tuple_index: pos,
    })
}

/// Problems found when re-verifying a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecheckReport {
    pub weight: usize,
    pub issues: Vec<String>,
}

impl RecheckReport {
    pub fn confirmed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Recomputes everything a witness claims from its own data.
pub fn recheck_witness(f: &FieldTower, u: &FqSubspace, w: &Witness, hdim: usize) -> Result<RecheckReport> {
    let mut issues = Vec::new();
    if let Some(bad) = w.h_basis.iter().chain(&w.intersection_basis).find(|v| v.len() != u.ambient()) {
        return Err(Error::DimensionMismatch { expected: u.ambient(), got: bad.len() });
    }
    let h = SubspaceQn::span(f, u.ambient(), &w.h_basis)?;
    if h.dim() != hdim {
        issues.push(format!("H has dimension {} instead of {hdim}", h.dim()));
    }
    if h.basis() != w.h_basis.as_slice() {
        issues.push("H basis is not in reduced row-echelon form".into());
    }
    let weight = subspace_weight(f, u, &h)?;
    if weight != w.weight {
        issues.push(format!("recorded weight {} but dim(U ∩ H) = {weight}", w.weight));
    }
    if weight <= w.bound {
        issues.push(format!("weight {weight} does not exceed the bound {}", w.bound));
    }
    let basis = FqSubspace::new(f, u.ambient(), w.intersection_basis.clone())?;
    if basis.dim() != w.intersection_basis.len() {
        issues.push("intersection basis is F_q-dependent".into());
    }
    if basis.dim() != weight {
        issues.push(format!("intersection basis has {} vectors, expected {weight}", basis.dim()));
    }
    for v in &w.intersection_basis {
        if !u.contains(f, v) || !h.contains(f, v) {
            issues.push("intersection vector outside U ∩ H".into());
            break;
        }
    }
    Ok(RecheckReport { weight, issues })
}

fn fingerprint(f: &FieldTower, u: &FqSubspace, hdim: usize, r: usize, opts: &VerifyOptions) -> String {
    let d = f.descriptor();
    let head = format!(
        "verify|{}|{}|{}|{:?}|{}|{}|{}|{:?}|{}",
        d.p, d.s, d.n, d.modulus, hdim, r, opts.mode, opts.budget, opts.seed
    );
    let body: Vec<u8> = u
        .expansion()
        .iter()
        .flat_map(|row| row.iter().flat_map(|c| c.to_le_bytes()))
        .collect();
    job::fingerprint(&[head.as_bytes(), &body])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{build_line, build_pseudoregulus};

    fn f16() -> FieldTower {
        FieldTower::new(2, 1, 4, None).unwrap()
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(max_dim_bound(9, 4, 2), 12);
        assert_eq!(max_dim_bound(2, 4, 1), 4);
        assert_eq!(max_dim_bound(12, 4, 2), 16);
    }

    #[test]
    fn weight_extremes() {
        let f = f16();
        let u = build_pseudoregulus(&f, 1).unwrap().space;
        assert_eq!(subspace_weight(&f, &u, &SubspaceQn::full(2)).unwrap(), 4);
        assert_eq!(subspace_weight(&f, &u, &SubspaceQn::zero(2)).unwrap(), 0);
        let diag = SubspaceQn::span(&f, 2, &[vec![Fe::ONE, Fe::ONE]]).unwrap();
        assert_eq!(subspace_weight(&f, &u, &diag).unwrap(), 1);
    }

    #[test]
    fn projector_matches_dense_weight() {
        let f = FieldTower::new(3, 1, 3, None).unwrap();
        let u = build_pseudoregulus(&f, 2).unwrap().space;
        let proj: Projector<crate::fp::DenseRow> = Projector::new(&f, &u);
        let g = Grassmannian::new(3, 2, 27).unwrap();
        for s in g.iter().step_by(7) {
            assert_eq!(proj.fp_weight(&f, s.basis()), subspace_weight(&f, &u, &s).unwrap());
        }
    }

    #[test]
    fn line_is_not_scattered() {
        let f = f16();
        let u = build_line(&f, 2).unwrap().space;
        for mode in [Mode::Exhaustive, Mode::WitnessSpan] {
            let v = verify_h_scattered(&f, &u, 1, &VerifyOptions::new(mode).workers(1)).unwrap();
            assert_eq!(v.status, Status::Violated);
            let w = v.witness.unwrap();
            assert_eq!(w.weight, 4);
            assert!(recheck_witness(&f, &u, &w, 1).unwrap().confirmed());
        }
    }

    #[test]
    fn pseudoregulus_is_scattered() {
        let f = f16();
        for h in 1..=2 {
            let u = build_pseudoregulus(&f, h as u32).unwrap().space;
            for mode in [Mode::Exhaustive, Mode::WitnessSpan] {
                let v = verify_h_scattered(&f, &u, h, &VerifyOptions::new(mode).workers(1)).unwrap();
                assert_eq!(v.status, Status::Holds, "h={h} {mode}");
            }
            let v = verify_h_scattered(&f, &u, h, &VerifyOptions::new(Mode::Sampled).budget(200).workers(1)).unwrap();
            assert_eq!(v.status, Status::Inconclusive);
            assert_eq!(v.subspaces_checked, 200);
        }
    }

    #[test]
    fn preconditions() {
        let f = f16();
        let u = build_pseudoregulus(&f, 2).unwrap().space;
        let o = VerifyOptions::new(Mode::Exhaustive);
        assert!(verify_evasive(&f, &u, 0, 1, &o).is_err());
        assert!(verify_evasive(&f, &u, 3, 3, &o).is_err());
        assert!(verify_evasive(&f, &u, 2, 1, &o).is_err());
        assert!(verify_evasive(&f, &u, 2, 2, &VerifyOptions::new(Mode::Sampled)).is_err());
        // non-spanning but otherwise fine
        let narrow = FqSubspace::new(&f, 3, vec![vec![Fe::ONE, Fe::ZERO, Fe::ZERO]]).unwrap();
        assert_eq!(verify_h_scattered(&f, &narrow, 1, &o).unwrap_err(), Error::Degenerate);
        assert_eq!(verify_evasive(&f, &narrow, 1, 1, &o).unwrap().status, Status::Holds);
    }

    #[test]
    fn tampered_witness_is_flagged() {
        let f = f16();
        let u = build_line(&f, 2).unwrap().space;
        let v = verify_h_scattered(&f, &u, 1, &VerifyOptions::new(Mode::Exhaustive).workers(1)).unwrap();
        let mut w = v.witness.unwrap();
        w.weight = 3;
        assert!(!recheck_witness(&f, &u, &w, 1).unwrap().confirmed());
        let mut w2 = w.clone();
        w2.weight = 4;
        w2.h_basis = vec![vec![Fe::ZERO, Fe::ONE]];
        assert!(!recheck_witness(&f, &u, &w2, 1).unwrap().confirmed());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]
        #[test]
        fn proof_modes_agree(
            rows in proptest::collection::vec(proptest::collection::vec(0u64..8, 3), 1..6),
            hdim in 1usize..3,
            slack in 0usize..3,
        ) {
            let f = FieldTower::new(2, 1, 3, None).unwrap();
            let rows: Vec<Vec<Fe>> = rows.iter().map(|r| r.iter().map(|&x| Fe(x)).collect()).collect();
            let u = FqSubspace::new(&f, 3, rows).unwrap();
            let r = hdim + slack;
            let o = |m| VerifyOptions::new(m).workers(1);
            let a = verify_evasive(&f, &u, hdim, r, &o(Mode::Exhaustive)).unwrap();
            let b = verify_evasive(&f, &u, hdim, r, &o(Mode::WitnessSpan)).unwrap();
            proptest::prop_assert_eq!(a.status, b.status);
            for v in [&a, &b] {
                if let Some(w) = &v.witness {
                    proptest::prop_assert!(w.weight > r);
                    proptest::prop_assert!(recheck_witness(&f, &u, w, hdim).unwrap().confirmed());
                }
            }
            // scattered implies (h, h)-evasive
            if let Ok(sc) = verify_h_scattered(&f, &u, hdim, &o(Mode::Exhaustive)) {
                if sc.status == Status::Holds {
                    let ev = verify_evasive(&f, &u, hdim, hdim, &o(Mode::WitnessSpan)).unwrap();
                    proptest::prop_assert_eq!(ev.status, Status::Holds);
                }
            }
        }
    }
}
