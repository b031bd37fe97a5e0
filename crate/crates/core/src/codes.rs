//! Rank-metric codes and their q-systems.
//!
//! A nondegenerate [t, k]_{q^n/q} code with generator matrix G corresponds
//! to the F_q-span of the columns of G in F_{q^n}^k. Generalized rank
//! weights are computed on that side:
//! d_rho = t - max { dim_Fq(U ∩ H) : dim H = k - rho }.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{is_in_a, is_in_b, ConstructionParams};
use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::fp::{Echelon, FpRow, RowKind};
use crate::job::map_ranges;
use crate::linear::{rref_rows, sample_subspace_with, FqSubspace, GrassCursor, Grassmannian, MatrixQn};
use crate::verify::{chunk_rng, proof_chunk_len, Projector, SAMPLE_CHUNK};
use crate::with_row_kind;

/// A linear code given by a full-rank generator matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankCode {
    g: MatrixQn,
}

impl RankCode {
    pub fn new(f: &FieldTower, g: MatrixQn) -> Result<RankCode> {
        let rows = g.to_rows();
        let (_, pivots) = rref_rows(f, rows, g.cols());
        if pivots.len() != g.rows() {
            return Err(Error::InvalidParams(format!("generator matrix has rank {} < {}", pivots.len(), g.rows())));
        }
        Ok(RankCode { g })
    }

    pub fn k(&self) -> usize {
        self.g.rows()
    }

    pub fn t(&self) -> usize {
        self.g.cols()
    }

    pub fn generator(&self) -> &MatrixQn {
        &self.g
    }

    /// m G for a message of length k.
    pub fn encode(&self, f: &FieldTower, msg: &[Fe]) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; self.t()];
        for (i, &m) in msg.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            for (o, &g) in out.iter_mut().zip(self.g.row(i)) {
                *o = f.add(*o, f.mul(m, g));
            }
        }
        out
    }

    /// Same row space.
    pub fn equivalent_rows(&self, f: &FieldTower, other: &RankCode) -> bool {
        self.t() == other.t()
            && rref_rows(f, self.g.to_rows(), self.t()).0 == rref_rows(f, other.g.to_rows(), other.t()).0
    }
}

/// The code whose columns are the F_q-basis of `u`.
pub fn code_from_system(f: &FieldTower, u: &FqSubspace) -> Result<RankCode> {
    if !u.spans_ambient(f) {
        return Err(Error::Degenerate);
    }
    let basis = u.basis();
    let mut g = MatrixQn::zeros(u.ambient(), basis.len());
    for (j, col) in basis.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            g.set(i, j, x);
        }
    }
    Ok(RankCode { g })
}

/// The F_q-span of the columns of G.
pub fn system_from_code(f: &FieldTower, c: &RankCode) -> Result<FqSubspace> {
    FqSubspace::new(f, c.k(), c.g.transpose().to_rows())
}

/// dim_Fq of the span of the coordinates of `v`.
pub fn rank_weight(f: &FieldTower, v: &[Fe]) -> usize {
    with_row_kind!(RowKind::choose(f.p(), f.degree()), R => {
        let mut ech: Echelon<R> = Echelon::new(f.p());
        fp_rank_weight(f, v, &mut ech)
    })
}

fn fp_rank_weight<R: FpRow>(f: &FieldTower, v: &[Fe], ech: &mut Echelon<R>) -> usize {
    ech.truncate(0);
    let deg = f.degree();
    let mut coeffs = vec![0u32; deg];
    for &x in v {
        if x.is_zero() {
            continue;
        }
        for &w in f.subfield_basis() {
            f.write_coeffs(f.mul(w, x), &mut coeffs);
            ech.insert(R::from_coeffs(&coeffs));
        }
        if ech.rank() == deg {
            break;
        }
    }
    ech.rank() / f.s() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// every nonzero message
    Exhaustive,
    /// one message per F_{q^n}-scalar class
    Projective,
    /// seeded random messages; gives an upper bound
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distance {
    pub value: usize,
    pub exact: bool,
    pub codewords_checked: u64,
    /// first message reaching `value`
    pub message: Vec<Fe>,
}

#[derive(Clone, Debug)]
pub struct DistanceOptions {
    pub mode: DistanceMode,
    pub budget: Option<u64>,
    pub seed: u64,
    pub workers: usize,
}

impl DistanceOptions {
    pub fn new(mode: DistanceMode) -> DistanceOptions {
        DistanceOptions { mode, budget: None, seed: 0, workers: 0 }
    }
}

fn message_count(q: u64, k: usize) -> Result<u64> {
    (0..k)
        .try_fold(1u64, |acc, _| acc.checked_mul(q))
        .ok_or_else(|| Error::TooLarge(format!("{q}^{k} messages")))
}

fn digits_into(mut idx: u64, q: u64, out: &mut [Fe]) {
    for x in out.iter_mut().rev() {
        *x = Fe(idx % q);
        idx /= q;
    }
}

/// Message number `idx` of a sweep in the given mode.
fn message_at(k: usize, q: u64, mode: DistanceMode, idx: u64) -> Vec<Fe> {
    let mut m = vec![Fe::ZERO; k];
    match mode {
        DistanceMode::Exhaustive | DistanceMode::Sampled => digits_into(idx + 1, q, &mut m),
        DistanceMode::Projective => {
            // leading 1 in position l, block of q^(k-1-l) messages
            let mut rest = idx;
            for l in 0..k {
                let block = q.pow((k - 1 - l) as u32);
                if rest < block {
                    m[l] = Fe::ONE;
                    digits_into(rest, q, &mut m[l + 1..]);
                    break;
                }
                rest -= block;
            }
        }
    }
    m
}

/// Minimum rank distance.
pub fn min_distance(f: &FieldTower, c: &RankCode, opts: &DistanceOptions) -> Result<Distance> {
    let k = c.k();
    if k == 0 {
        return Err(Error::InvalidParams("code dimension must be positive".into()));
    }
    let q = f.order();
    let all = message_count(q, k)? - 1;
    let full = match opts.mode {
        DistanceMode::Exhaustive => all,
        DistanceMode::Projective => all / (q - 1),
        DistanceMode::Sampled => match opts.budget {
            Some(b) if b > 0 => b,
            _ => return Err(Error::InvalidParams("sampled modes need a positive budget".into())),
        },
    };
    let total = match opts.mode {
        DistanceMode::Sampled => full,
        _ => opts.budget.map_or(full, |b| b.min(full)),
    };
    let chunk_len = if opts.mode == DistanceMode::Sampled { SAMPLE_CHUNK } else { proof_chunk_len(total) };
    let parts = with_row_kind!(RowKind::choose(f.p(), f.degree()), R => {
        map_ranges(opts.workers, total, chunk_len, |chunk, start, end| {
            let mut ech: Echelon<R> = Echelon::new(f.p());
            let mut best: Option<(usize, Vec<Fe>)> = None;
            let mut rng = chunk_rng(opts.seed, chunk);
            for idx in start..end {
                let msg = match opts.mode {
                    DistanceMode::Sampled => message_at(k, q, opts.mode, rng.gen_range(0..all)),
                    mode => message_at(k, q, mode, idx),
                };
                let w = fp_rank_weight(f, &c.encode(f, &msg), &mut ech);
                if best.as_ref().map_or(true, |(b, _)| w < *b) {
                    best = Some((w, msg));
                }
            }
            best
        })?
    });
    let (value, message) = parts
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| Error::InvalidParams("no codewords to check".into()))?;
    Ok(Distance { value, exact: opts.mode != DistanceMode::Sampled && total == full, codewords_checked: total, message })
}

/// The [t, t - k] code orthogonal to `c` under the standard inner product.
pub fn dual_code(f: &FieldTower, c: &RankCode) -> Result<RankCode> {
    let t = c.t();
    let (rref, pivots) = rref_rows(f, c.g.to_rows(), t);
    let free: Vec<usize> = (0..t).filter(|j| !pivots.contains(j)).collect();
    if free.is_empty() {
        return Err(Error::InvalidParams("the dual of a full-length code is zero".into()));
    }
    let mut g = MatrixQn::zeros(free.len(), t);
    for (r, &j) in free.iter().enumerate() {
        g.set(r, j, Fe::ONE);
        for (i, &pc) in pivots.iter().enumerate() {
            g.set(r, pc, f.neg(rref[i][j]));
        }
    }
    Ok(RankCode { g })
}

/// Equality in the Singleton-like bound nk <= min(n(t-d+1), t(n-d+1)).
pub fn is_mrd(f: &FieldTower, c: &RankCode, d: &Distance) -> Result<bool> {
    if !d.exact {
        return Err(Error::InexactDistance);
    }
    let n = f.n() as i64;
    let (t, k, d) = (c.t() as i64, c.k() as i64, d.value as i64);
    Ok(n * k == (n * (t - d + 1)).min(t * (n - d + 1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    LowerBound,
    UpperBound,
    /// lower and upper bound both known
    Range,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub rho: usize,
    /// the exact value, or the bound named by `provenance`
    pub value: Option<usize>,
    pub provenance: Provenance,
    pub lower: usize,
    pub upper: usize,
    pub subspaces_checked: u64,
    /// basis of a subspace of dimension k - rho reaching the weight
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vec<Fe>>>,
}

impl ProfileEntry {
    fn exact(rho: usize, value: usize) -> ProfileEntry {
        ProfileEntry {
            rho,
            value: Some(value),
            provenance: Provenance::Exact,
            lower: value,
            upper: value,
            subspaces_checked: 0,
            witness: None,
        }
    }

    fn range(rho: usize, lower: usize, upper: usize) -> ProfileEntry {
        ProfileEntry { rho, value: None, provenance: Provenance::Range, lower, upper, subspaces_checked: 0, witness: None }
    }

    pub fn is_exact(&self) -> bool {
        self.provenance == Provenance::Exact
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub k: usize,
    pub t: usize,
    pub entries: Vec<ProfileEntry>,
}

impl WeightProfile {
    pub fn entry(&self, rho: usize) -> Option<&ProfileEntry> {
        self.entries.iter().find(|e| e.rho == rho)
    }

    /// d_1..d_k when every entry is present and exact.
    pub fn exact_values(&self) -> Option<Vec<usize>> {
        (1..=self.k).map(|r| self.entry(r).filter(|e| e.is_exact()).and_then(|e| e.value)).collect()
    }

    /// `rho,value,provenance,lower,upper,subspaces_checked` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rho,value,provenance,lower,upper,subspaces_checked\n");
        for e in &self.entries {
            let value = e.value.map(|v| v.to_string()).unwrap_or_default();
            let prov = serde_json::to_value(e.provenance).expect("enum serializes");
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.rho,
                value,
                prov.as_str().unwrap_or_default(),
                e.lower,
                e.upper,
                e.subspaces_checked
            ));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug)]
pub struct WeightOptions {
    pub mode: WeightMode,
    /// cap on subspaces per entry; required when sampling
    pub budget: Option<u64>,
    pub seed: u64,
    pub workers: usize,
}

impl WeightOptions {
    pub fn new(mode: WeightMode) -> WeightOptions {
        WeightOptions { mode, budget: None, seed: 0, workers: 0 }
    }
}

/// Generalized rank weights d_rho of the code of `u`, for each rho in `rhos`.
///
/// Exhaustive entries are exact. A sampled or budget-capped sweep sees only
/// some subspaces, so its maximum weight is too small and t - max is an
/// upper bound on d_rho.
pub fn generalized_weights(f: &FieldTower, u: &FqSubspace, rhos: &[usize], opts: &WeightOptions) -> Result<WeightProfile> {
    let k = u.ambient();
    let t = u.dim();
    if opts.mode == WeightMode::Sampled && opts.budget.map_or(true, |b| b == 0) {
        return Err(Error::InvalidParams("sampled modes need a positive budget".into()));
    }
    let mut entries = Vec::with_capacity(rhos.len());
    let kind = RowKind::choose(f.p(), k * f.degree() - u.expansion().len());
    with_row_kind!(kind, R => {
        let proj: Projector<R> = Projector::new(f, u);
        for &rho in rhos {
            if rho == 0 || rho > k {
                return Err(Error::InvalidParams(format!("rho = {rho} must satisfy 1 <= rho <= k = {k}")));
            }
            entries.push(weight_entry(f, &proj, u, rho, opts)?);
        }
    });
    Ok(WeightProfile { k, t, entries })
}

fn weight_entry<R: FpRow>(
    f: &FieldTower,
    proj: &Projector<R>,
    u: &FqSubspace,
    rho: usize,
    opts: &WeightOptions,
) -> Result<ProfileEntry> {
    let k = u.ambient();
    let t = u.dim();
    let d = k - rho;
    let s = f.s() as usize;
    let (checked, complete, best) = match opts.mode {
        WeightMode::Exhaustive => {
            let grass = Grassmannian::new(k, d, f.order())?;
            let total = opts.budget.map_or(grass.count(), |b| b.min(grass.count()));
            let parts = map_ranges(opts.workers, total, proof_chunk_len(total), |_, start, end| {
                let mut ech: Echelon<R> = Echelon::new(f.p());
                let mut cur = GrassCursor::new(&grass, start);
                let mut best = (0usize, start);
                // rank after each row; rows that did not change are not reinserted
                let mut ranks = vec![0usize; d];
                let mut prev: Vec<Fe> = Vec::new();
                for idx in start..end {
                    let rows = cur.rows();
                    let first = if prev.is_empty() {
                        0
                    } else {
                        (0..d).find(|&r| rows[r * k..(r + 1) * k] != prev[r * k..(r + 1) * k]).unwrap_or(d)
                    };
                    ech.truncate(if first == 0 { 0 } else { ranks[first - 1] });
                    for r in first..d {
                        proj.insert_row(f, &rows[r * k..(r + 1) * k], &mut ech);
                        ranks[r] = ech.rank();
                    }
                    prev.clear();
                    prev.extend_from_slice(rows);
                    let w = d * f.degree() - ech.rank();
                    if w > best.0 {
                        best = (w, idx);
                    }
                    cur.advance();
                }
                best
            })?;
            let (w, idx) = parts.into_iter().reduce(|a, b| if b.0 > a.0 { b } else { a }).unwrap_or((0, 0));
            (total, total == grass.count(), (w, grass.basis_at(idx)))
        }
        WeightMode::Sampled => {
            let total = opts.budget.unwrap_or(0);
            let seed = opts.seed ^ (rho as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let parts = map_ranges(opts.workers, total, SAMPLE_CHUNK, |chunk, start, end| {
                let mut ech: Echelon<R> = Echelon::new(f.p());
                let mut rng = chunk_rng(seed, chunk);
                let mut best: Option<(usize, Vec<Vec<Fe>>)> = None;
                for _ in start..end {
                    let h = sample_subspace_with(f, k, d, &mut rng);
                    let flat: Vec<Fe> = h.basis().concat();
                    let w = proj.fp_weight_flat(f, &flat, &mut ech);
                    if best.as_ref().map_or(true, |(b, _)| w > *b) {
                        best = Some((w, h.basis().to_vec()));
                    }
                }
                best
            })?;
            let best = parts
                .into_iter()
                .flatten()
                .reduce(|a, b| if b.0 > a.0 { b } else { a })
                .unwrap_or((0, Vec::new()));
            (total, false, best)
        }
    };
    let value = t - best.0 / s;
    let lower = rho.max(t.saturating_sub(d * f.n() as usize));
    Ok(ProfileEntry {
        rho,
        value: Some(value),
        provenance: if complete { Provenance::Exact } else { Provenance::UpperBound },
        lower: if complete { value } else { lower },
        upper: value,
        subspaces_checked: checked,
        witness: Some(best.1),
    })
}

/// Strict monotonicity of both profiles and Wei-type duality:
/// {d_i} and {t + 1 - d_j^⊥} partition {1, ..., t}.
pub fn check_weight_axioms(p: &WeightProfile, dual: &WeightProfile, t: usize) -> Result<bool> {
    let incomplete = |w: &WeightProfile| Error::IncompleteProfile(format!("profile of dimension {} is not exact and complete", w.k));
    let d = p.exact_values().ok_or_else(|| incomplete(p))?;
    let e = dual.exact_values().ok_or_else(|| incomplete(dual))?;
    let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]) && v.first().map_or(true, |&x| x >= 1) && v.last().map_or(true, |&x| x <= t);
    if !increasing(&d) || !increasing(&e) || d.len() + e.len() != t {
        return Ok(false);
    }
    let mut all: Vec<usize> = d.iter().copied().chain(e.iter().map(|&x| t + 1 - x)).collect();
    all.sort_unstable();
    Ok(all.iter().copied().eq(1..=t))
}

/// What is known about the weights of a direct sum of m maximum h-scattered
/// systems in F_{q^n}^{h+1}.
pub fn predicted_direct_sum_profile(m: usize, n: usize, h: usize) -> Result<WeightProfile> {
    if m < 2 || h < 1 || h >= n {
        return Err(Error::InvalidParams(format!("need m >= 2 and 1 <= h <= n - 1, got m = {m}, n = {n}, h = {h}")));
    }
    let b = h + 1;
    let k = m * b;
    let t = m * n;
    let mut pinned: Vec<Option<usize>> = vec![None; k + 1];
    for i in 1..=b {
        pinned[i] = Some(n - h - 1 + i);
    }
    for i in 0..=h {
        pinned[k - i] = Some(t - i);
    }
    pinned[(m - 1) * b] = Some((m - 1) * n);

    let mut lower: Vec<usize> = (0..=k).collect();
    let mut upper: Vec<usize> = (0..=k).map(|i| t - (k - i)).collect();
    for i in 1..=k {
        if let Some(v) = pinned[i] {
            lower[i] = v;
            upper[i] = v;
        }
        if i % b == 0 {
            upper[i] = upper[i].min(i / b * n);
        }
    }
    for i in 2..=k {
        lower[i] = lower[i].max(lower[i - 1] + 1);
    }
    for i in (1..k).rev() {
        upper[i] = upper[i].min(upper[i + 1] - 1);
    }
    let entries = (1..=k)
        .map(|i| match pinned[i] {
            Some(v) => ProfileEntry::exact(i, v),
            None => ProfileEntry::range(i, lower[i], upper[i]),
        })
        .collect();
    Ok(WeightProfile { k, t, entries })
}

/// A family lower bound set against the direct-sum upper bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub rho: usize,
    pub family_lower: usize,
    pub direct_sum_upper: usize,
    /// family_lower > direct_sum_upper
    pub exceeds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyBounds {
    pub profile: WeightProfile,
    pub comparisons: Vec<Comparison>,
}

/// Lower bounds on the weights of the code of V_{A,h} that follow from its
/// evasiveness, compared with the direct-sum profile:
/// d_{h+1} >= 2n - 2h - 2, d_{(m-1)(h+1)} >= mn - h - 2, and for A in B
/// d_{s(h+1)} >= (s+1)(n - h - 1) for each s in `s_list`.
pub fn family_weight_bounds(f: &FieldTower, params: &ConstructionParams, s_list: &[usize]) -> Result<FamilyBounds> {
    let (m, h, n) = (params.m() as usize, params.h() as usize, f.n() as usize);
    if h < 2 {
        return Err(Error::OutsideFamily(format!("the bounds need h >= 2, got h = {h}")));
    }
    if !is_in_a(f, params) {
        return Err(Error::OutsideFamily("alphas are not in A".into()));
    }
    let b = h + 1;
    let mut bounds: Vec<(usize, usize)> = vec![(b, (2 * n).saturating_sub(2 * h + 2)), ((m - 1) * b, m * n - h - 2)];
    if !s_list.is_empty() {
        if let Some(&bad) = s_list.iter().find(|&&s| s < 2 || s + 2 > m) {
            return Err(Error::InvalidParams(format!("s = {bad} must satisfy 2 <= s <= m - 2")));
        }
        if !is_in_b(f, params) {
            return Err(Error::OutsideFamily("alphas are not in B".into()));
        }
        bounds.extend(s_list.iter().map(|&s| (s * b, (s + 1) * (n - h - 1))));
    }
    bounds.sort_unstable();
    bounds.dedup_by(|a, b| {
        // keep the larger bound for a repeated index
        if a.0 == b.0 {
            b.1 = b.1.max(a.1);
            true
        } else {
            false
        }
    });
    let predicted = predicted_direct_sum_profile(m, n, h)?;
    let t = m * n;
    let k = m * b;
    let entries = bounds
        .iter()
        .map(|&(rho, lo)| ProfileEntry {
            rho,
            value: Some(lo),
            provenance: Provenance::LowerBound,
            lower: lo,
            upper: t - (k - rho),
            subspaces_checked: 0,
            witness: None,
        })
        .collect();
    let comparisons = bounds
        .iter()
        .map(|&(rho, lo)| {
            let up = predicted.entry(rho).expect("index within k").upper;
            Comparison { rho, family_lower: lo, direct_sum_upper: up, exceeds: lo > up }
        })
        .collect();
    Ok(FamilyBounds { profile: WeightProfile { k, t, entries }, comparisons })
}
