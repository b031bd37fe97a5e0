//! The four sweeps behind the verifiers.
//!
//! Positions are enumerated in a fixed order so that the first witness is
//! reproducible:
//!
//! * exhaustive: Grassmannian index;
//! * witness-span: phase d = 1..=hdim, then the normalized first vector
//!   (slowest), then the remaining d - 1 vectors of U by element index;
//! * sampled: draw number, chunk c drawing from ChaCha8 stream c;
//! * sampled-tuples: as sampled, each draw an hdim-tuple of U.
//!
//! Elements of U are indexed by their digits on the F_p-basis
//! {w^a g_j}, digit j*s + a having weight p^{j*s+a}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::projector::Projector;
use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::fp::{DenseRow, Echelon, FpRow};
use crate::job::Sweep;
use crate::linear::{fp_coords, sample_subspace_with, FqSubspace, GrassCursor, Grassmannian};

pub(crate) const SAMPLE_CHUNK: u64 = 1 << 14;

/// Largest precomputed element table, in prime-field entries.
const SPAN_TABLE_LIMIT: u64 = 1 << 31;

pub(crate) fn proof_chunk_len(total: u64) -> u64 {
    (1u64 << 12).max(total.div_ceil(1 << 14))
}

pub(crate) fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// A sweep whose hit positions can be turned back into F_{q^n}-spanning rows.
pub(crate) trait WitnessSource: Sweep {
    fn rows_at(&self, pos: u64) -> Vec<Vec<Fe>>;
}

pub(crate) struct ExhaustiveSweep<'a, R> {
    pub f: &'a FieldTower,
    pub proj: Projector<R>,
    pub grass: Grassmannian,
    pub bound: usize,
    pub limit: u64,
}

impl<R: FpRow> Sweep for ExhaustiveSweep<'_, R> {
    fn total(&self) -> u64 {
        self.limit
    }
    fn chunk_len(&self) -> u64 {
        proof_chunk_len(self.limit)
    }
    fn scan(&self, _chunk: u64, start: u64, end: u64) -> Option<u64> {
        if start >= end {
            return None;
        }
        let s = self.f.s() as usize;
        let mut ech = Echelon::with_capacity(self.f.p(), self.grass.dim() * self.f.degree());
        let mut cur = GrassCursor::new(&self.grass, start);
        loop {
            if self.proj.fp_weight_flat(self.f, cur.rows(), &mut ech) / s > self.bound {
                return Some(cur.index());
            }
            if cur.index() + 1 >= end || !cur.advance() {
                return None;
            }
        }
    }
}

impl<R: FpRow> WitnessSource for ExhaustiveSweep<'_, R> {
    fn rows_at(&self, pos: u64) -> Vec<Vec<Fe>> {
        self.grass.basis_at(pos)
    }
}

pub(crate) struct SampledSweep<'a, R> {
    pub f: &'a FieldTower,
    pub proj: Projector<R>,
    pub k: usize,
    pub hdim: usize,
    pub bound: usize,
    pub budget: u64,
    pub seed: u64,
}

impl<R: FpRow> Sweep for SampledSweep<'_, R> {
    fn total(&self) -> u64 {
        self.budget
    }
    fn chunk_len(&self) -> u64 {
        SAMPLE_CHUNK
    }
    fn scan(&self, chunk: u64, start: u64, end: u64) -> Option<u64> {
        let s = self.f.s() as usize;
        let mut rng = chunk_rng(self.seed, chunk);
        (start..end).find(|_| {
            let h = sample_subspace_with(self.f, self.k, self.hdim, &mut rng);
            self.proj.fp_weight(self.f, h.basis()) / s > self.bound
        })
    }
}

impl<R: FpRow> WitnessSource for SampledSweep<'_, R> {
    fn rows_at(&self, pos: u64) -> Vec<Vec<Fe>> {
        let chunk = pos / SAMPLE_CHUNK;
        let mut rng = chunk_rng(self.seed, chunk);
        let mut h = None;
        for _ in chunk * SAMPLE_CHUNK..=pos {
            h = Some(sample_subspace_with(self.f, self.k, self.hdim, &mut rng));
        }
        h.expect("at least one draw").basis().to_vec()
    }
}

/// Rows (pi(z^i u), coordinates of z^i u) for every element u of U.
///
/// The quotient part occupies the low coordinates, so in an echelon form the
/// rows pivoting below `proj_len` count the rank of the quotient images while
/// the total rank counts the F_p-rank of the rows themselves.
pub(crate) struct SpanTables<R> {
    p: u32,
    s: usize,
    deg: usize,
    proj_len: usize,
    /// |U|
    size: u64,
    /// element indices whose lowest nonzero F_q-digit block is 1
    normalized: Vec<u64>,
    rows: Vec<R>,
    fp_basis: Vec<Vec<Fe>>,
}

impl<R: FpRow> SpanTables<R> {
    pub fn new(f: &FieldTower, u: &FqSubspace) -> Result<SpanTables<R>> {
        let p = f.p();
        let s = f.s() as usize;
        let deg = f.degree();
        let k = u.ambient();
        let fp_basis = u.fp_basis(f);
        let dim = fp_basis.len();
        let size = (0..dim)
            .try_fold(1u64, |acc, _| acc.checked_mul(p as u64))
            .ok_or_else(|| Error::TooLarge(format!("|U| = {p}^{dim}")))?;
        let proj: Projector<DenseRow> = Projector::new(f, u);
        let proj_len = proj.out_len();
        let row_len = proj_len + k * deg;
        if size.saturating_mul(deg as u64).saturating_mul(row_len as u64) > SPAN_TABLE_LIMIT {
            return Err(Error::TooLarge(format!("element table for |U| = {p}^{dim}")));
        }
        let basis_rows: Vec<Vec<R>> = fp_basis
            .iter()
            .map(|b| {
                let images = proj.project_multiples(f, b);
                proj.z_powers()
                    .iter()
                    .zip(images)
                    .map(|(&zi, img)| {
                        let full: Vec<Fe> = b.iter().map(|&x| f.mul(zi, x)).collect();
                        let mut coeffs = img.to_coeffs(proj_len);
                        coeffs.extend(fp_coords(f, &full));
                        R::from_coeffs(&coeffs)
                    })
                    .collect()
            })
            .collect();
        let mut rows: Vec<R> = Vec::with_capacity((size as usize) * deg);
        rows.extend((0..deg).map(|_| R::zeros(row_len)));
        let pw: Vec<u64> = (0..dim).map(|j| (p as u64).pow(j as u32)).collect();
        for idx in 1..size {
            // subtract one from the lowest nonzero digit
            let b = lowest_digit(idx, p);
            let prev = (idx - pw[b]) as usize;
            for i in 0..deg {
                let mut r = rows[prev * deg + i].clone();
                r.add_scaled(1, &basis_rows[b][i], p);
                rows.push(r);
            }
        }
        let q = (p as u64).pow(s as u32);
        let normalized = (1..size)
            .filter(|&idx| {
                let mut v = idx;
                while v % q == 0 {
                    v /= q;
                }
                v % q == 1
            })
            .collect();
        Ok(SpanTables { p, s, deg, proj_len, size, normalized, rows, fp_basis })
    }

    pub fn element(&self, f: &FieldTower, idx: u64) -> Vec<Fe> {
        let k = self.fp_basis.first().map_or(0, |b| b.len());
        let mut v = vec![Fe::ZERO; k];
        let mut rest = idx;
        for b in &self.fp_basis {
            let d = (rest % self.p as u64) as u32;
            rest /= self.p as u64;
            if d != 0 {
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = f.add(*x, f.scale(d, y));
                }
            }
        }
        v
    }

    /// Inserts z^i u for all i; false when u depends on what is already there.
    #[inline]
    fn push(&self, ech: &mut Echelon<R>, idx: u64) -> bool {
        let before = ech.rank();
        let base = idx as usize * self.deg;
        for r in &self.rows[base..base + self.deg] {
            ech.insert(r.clone());
        }
        ech.rank() - before == self.deg
    }

    #[inline]
    fn weight(&self, ech: &Echelon<R>) -> usize {
        let proj_rank = ech.pivots().iter().filter(|&&pv| pv < self.proj_len).count();
        (ech.rank() - proj_rank) / self.s
    }
}

fn lowest_digit(mut idx: u64, p: u32) -> usize {
    if p == 2 {
        return idx.trailing_zeros() as usize;
    }
    let mut b = 0;
    while idx % p as u64 == 0 {
        idx /= p as u64;
        b += 1;
    }
    b
}

pub(crate) struct WitnessSpanSweep<'a, R> {
    pub f: &'a FieldTower,
    pub tables: SpanTables<R>,
    pub hdim: usize,
    pub bound: usize,
    /// first position of each phase, plus the end
    offsets: Vec<u64>,
    limit: u64,
}

/// Position within the witness-span order.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Tuple {
    d: usize,
    first: u64,
    rest: Vec<u64>,
}

impl<'a, R: FpRow> WitnessSpanSweep<'a, R> {
    pub fn new(f: &'a FieldTower, tables: SpanTables<R>, hdim: usize, bound: usize, budget: Option<u64>) -> Result<Self> {
        let n1 = tables.normalized.len() as u64;
        let mut offsets = vec![0u64];
        let mut phase = n1;
        for d in 1..=hdim {
            let last = *offsets.last().unwrap();
            offsets.push(last.checked_add(phase).ok_or_else(|| Error::TooLarge("witness-span tuple count".into()))?);
            if d < hdim {
                phase = phase.checked_mul(tables.size).ok_or_else(|| Error::TooLarge("witness-span tuple count".into()))?;
            }
        }
        let total = *offsets.last().unwrap();
        let limit = budget.map_or(total, |b| b.min(total));
        Ok(WitnessSpanSweep { f, tables, hdim, bound, offsets, limit })
    }

    pub fn full_total(&self) -> u64 {
        *self.offsets.last().unwrap()
    }

    fn decode(&self, pos: u64) -> Tuple {
        let d = self.offsets.partition_point(|&o| o <= pos);
        let mut local = pos - self.offsets[d - 1];
        let mut rest = vec![0u64; d - 1];
        for r in rest.iter_mut().rev() {
            *r = local % self.tables.size;
            local /= self.tables.size;
        }
        Tuple { d, first: local, rest }
    }

    /// Moves to the next tuple; returns the lowest level that changed.
    fn advance(&self, t: &mut Tuple) -> usize {
        for l in (0..t.rest.len()).rev() {
            t.rest[l] += 1;
            if t.rest[l] < self.tables.size {
                return l + 1;
            }
            t.rest[l] = 0;
        }
        t.first += 1;
        if t.first == self.tables.normalized.len() as u64 {
            t.d += 1;
            t.first = 0;
            t.rest = vec![0; t.d - 1];
        }
        0
    }

    fn level(&self, t: &Tuple, l: usize) -> u64 {
        if l == 0 {
            self.tables.normalized[t.first as usize]
        } else {
            t.rest[l - 1]
        }
    }
}

impl<R: FpRow> Sweep for WitnessSpanSweep<'_, R> {
    fn total(&self) -> u64 {
        self.limit
    }
    fn chunk_len(&self) -> u64 {
        proof_chunk_len(self.full_total())
    }
    fn scan(&self, _chunk: u64, start: u64, end: u64) -> Option<u64> {
        if start >= end {
            return None;
        }
        let tb = &self.tables;
        let mut t = self.decode(start);
        let mut ech: Echelon<R> = Echelon::with_capacity(tb.p, self.hdim * tb.deg);
        let mut level_rank = vec![0usize; self.hdim];
        let mut valid = 0usize;
        let mut from = 0usize;
        for pos in start..end {
            let lo = from.min(valid);
            ech.truncate(if lo == 0 { 0 } else { level_rank[lo - 1] });
            valid = lo;
            let mut independent = true;
            for l in lo..t.d {
                if !tb.push(&mut ech, self.level(&t, l)) {
                    independent = false;
                    break;
                }
                level_rank[l] = ech.rank();
                valid = l + 1;
            }
            if independent && tb.weight(&ech) > self.bound {
                return Some(pos);
            }
            if pos + 1 < end {
                from = self.advance(&mut t);
            }
        }
        None
    }
}

impl<R: FpRow> WitnessSource for WitnessSpanSweep<'_, R> {
    fn rows_at(&self, pos: u64) -> Vec<Vec<Fe>> {
        let t = self.decode(pos);
        (0..t.d).map(|l| self.tables.element(self.f, self.level(&t, l))).collect()
    }
}

pub(crate) struct SampledTuplesSweep<'a, R> {
    pub f: &'a FieldTower,
    pub tables: SpanTables<R>,
    pub hdim: usize,
    pub bound: usize,
    pub budget: u64,
    pub seed: u64,
}

impl<R: FpRow> SampledTuplesSweep<'_, R> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<u64> {
        let tb = &self.tables;
        let mut tuple = Vec::with_capacity(self.hdim);
        tuple.push(tb.normalized[rng.gen_range(0..tb.normalized.len())]);
        for _ in 1..self.hdim {
            tuple.push(rng.gen_range(0..tb.size));
        }
        tuple
    }
}

impl<R: FpRow> Sweep for SampledTuplesSweep<'_, R> {
    fn total(&self) -> u64 {
        self.budget
    }
    fn chunk_len(&self) -> u64 {
        SAMPLE_CHUNK
    }
    fn scan(&self, chunk: u64, start: u64, end: u64) -> Option<u64> {
        let tb = &self.tables;
        let mut rng = chunk_rng(self.seed, chunk);
        let mut ech: Echelon<R> = Echelon::with_capacity(tb.p, self.hdim * tb.deg);
        (start..end).find(|_| {
            let tuple = self.draw(&mut rng);
            ech.truncate(0);
            tuple.iter().all(|&idx| tb.push(&mut ech, idx)) && tb.weight(&ech) > self.bound
        })
    }
}

impl<R: FpRow> WitnessSource for SampledTuplesSweep<'_, R> {
    fn rows_at(&self, pos: u64) -> Vec<Vec<Fe>> {
        let chunk = pos / SAMPLE_CHUNK;
        let mut rng = chunk_rng(self.seed, chunk);
        let mut tuple = Vec::new();
        for _ in chunk * SAMPLE_CHUNK..=pos {
            tuple = self.draw(&mut rng);
        }
        tuple.into_iter().map(|idx| self.tables.element(self.f, idx)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_pseudoregulus;

    #[test]
    fn decode_and_advance_agree() {
        let f = FieldTower::new(2, 1, 3, None).unwrap();
        let u = build_pseudoregulus(&f, 1).unwrap().space;
        let tables: SpanTables<u64> = SpanTables::new(&f, &u).unwrap();
        assert_eq!(tables.normalized.len(), 7);
        let sweep = WitnessSpanSweep::new(&f, tables, 2, 1, None).unwrap();
        assert_eq!(sweep.full_total(), 7 + 7 * 8);
        let mut t = sweep.decode(0);
        for pos in 0..sweep.full_total() {
            assert_eq!(t, sweep.decode(pos), "pos {pos}");
            sweep.advance(&mut t);
        }
    }

    #[test]
    fn element_table_matches_projection() {
        let f = FieldTower::new(3, 1, 3, None).unwrap();
        let u = build_pseudoregulus(&f, 1).unwrap().space;
        let tables: SpanTables<DenseRow> = SpanTables::new(&f, &u).unwrap();
        let proj: Projector<DenseRow> = Projector::new(&f, &u);
        for idx in [0u64, 1, 5, 13, 26] {
            let v = tables.element(&f, idx);
            assert!(u.contains(&f, &v));
            let images = proj.project_multiples(&f, &v);
            for (i, img) in images.iter().enumerate() {
                let row = &tables.rows[idx as usize * tables.deg + i];
                assert_eq!(row.to_coeffs(tables.proj_len), img.to_coeffs(tables.proj_len));
            }
        }
    }
}
