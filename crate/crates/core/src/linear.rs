//! Linear algebra over F_{q^n} and over F_q, and Grassmannian enumeration.
//!
//! An F_q-subspace U of F_{q^n}^k is handled through its F_p-coordinates:
//! a vector v becomes the concatenation of the coefficient vectors of its
//! entries, length k*s*n, and F_q-dimensions are F_p-ranks divided by s.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Fe, FieldTower};
use crate::fp::{self, DenseRow, Echelon};

/// Dense matrix over F_{q^n}, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixQn {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl MatrixQn {
    pub fn zeros(rows: usize, cols: usize) -> MatrixQn {
        MatrixQn { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(k: usize) -> MatrixQn {
        let mut m = MatrixQn::zeros(k, k);
        for i in 0..k {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> Result<MatrixQn> {
        let cols = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        Ok(MatrixQn { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Fe) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> MatrixQn {
        let mut t = MatrixQn::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, f: &FieldTower, other: &MatrixQn) -> Result<MatrixQn> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = MatrixQn::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Fe::ZERO;
                for l in 0..self.cols {
                    acc = f.add(acc, f.mul(self.get(i, l), other.get(l, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }
}

/// Reduced row-echelon form over F_{q^n}, zero rows kept at the bottom.
///
/// Pivots are taken in the leftmost column that still has a nonzero entry,
/// on the first such row.
pub fn rref_qn(f: &FieldTower, m: &MatrixQn) -> (MatrixQn, usize) {
    let (rows, _) = rref_rows(f, m.to_rows(), m.cols);
    let rank = rows.len();
    let mut out = MatrixQn::zeros(m.rows, m.cols);
    for (i, r) in rows.iter().enumerate() {
        for (j, &x) in r.iter().enumerate() {
            out.set(i, j, x);
        }
    }
    (out, rank)
}

/// RREF of a list of rows; returns only the nonzero rows and their pivots.
pub fn rref_rows(f: &FieldTower, mut rows: Vec<Vec<Fe>>, cols: usize) -> (Vec<Vec<Fe>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = f.inv(rows[r][c]).expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c];
            for j in 0..cols {
                let t = f.mul(factor, rows[r][j]);
                rows[i][j] = f.sub(rows[i][j], t);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Rank over F_{q^n}.
pub fn rank_qn(f: &FieldTower, rows: &[Vec<Fe>], cols: usize) -> usize {
    rref_rows(f, rows.to_vec(), cols).0.len()
}

/// F_{q^n}-subspace of F_{q^n}^k, stored by its canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubspaceQn {
    k: usize,
    basis: Vec<Vec<Fe>>,
    pivots: Vec<usize>,
}

impl SubspaceQn {
    pub fn span(f: &FieldTower, k: usize, rows: &[Vec<Fe>]) -> Result<SubspaceQn> {
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(Error::DimensionMismatch { expected: k, got: bad.len() });
        }
        let (basis, pivots) = rref_rows(f, rows.to_vec(), k);
        Ok(SubspaceQn { k, basis, pivots })
    }

    pub fn zero(k: usize) -> SubspaceQn {
        SubspaceQn { k, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(k: usize) -> SubspaceQn {
        let basis = (0..k).map(|i| unit(k, i)).collect();
        SubspaceQn { k, basis, pivots: (0..k).collect() }
    }

    pub fn ambient(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Fe>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, f: &FieldTower, v: &[Fe]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank_qn(f, &rows, self.k) == self.dim()
    }

    /// Enlarges to dimension `d` by adding unit vectors on the lowest free columns.
    pub fn extend_to(&self, f: &FieldTower, d: usize) -> SubspaceQn {
        let mut rows = self.basis.clone();
        let mut c = 0;
        while rows.len() < d.min(self.k) {
            if !self.pivots.contains(&c) {
                rows.push(unit(self.k, c));
            }
            c += 1;
        }
        SubspaceQn::span(f, self.k, &rows).expect("rows have ambient length")
    }

    /// F_q-generators of this subspace viewed as an F_q-space: b_j times each basis row.
    pub fn as_fq(&self, f: &FieldTower) -> FqSubspace {
        let gens: Vec<Vec<Fe>> = self
            .basis
            .iter()
            .flat_map(|row| f.q_basis().iter().map(move |&b| row.iter().map(|&x| f.mul(b, x)).collect()))
            .collect();
        FqSubspace::new(f, self.k, gens).expect("rows have ambient length")
    }
}

pub(crate) fn unit(k: usize, i: usize) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; k];
    v[i] = Fe::ONE;
    v
}

/// Concatenated prime-field coordinates of a vector.
pub fn fp_coords(f: &FieldTower, v: &[Fe]) -> Vec<u32> {
    let deg = f.degree();
    let mut out = vec![0u32; v.len() * deg];
    for (chunk, &x) in out.chunks_mut(deg).zip(v) {
        f.write_coeffs(x, chunk);
    }
    out
}

/// Inverse of `fp_coords`.
pub fn from_fp_coords(f: &FieldTower, c: &[u32]) -> Vec<Fe> {
    c.chunks(f.degree()).map(|ch| f.element(ch).expect("digit in range")).collect()
}

/// Coordinates of `v` on the F_q-basis `q_basis` of each entry; length k*n.
pub fn expand_to_fq(f: &FieldTower, v: &[Fe]) -> Vec<Fe> {
    v.iter().flat_map(|&x| f.expand_to_fq(x)).collect()
}

/// An F_q-subspace of F_{q^n}^k given by generators.
#[derive(Clone, Debug)]
pub struct FqSubspace {
    k: usize,
    generators: Vec<Vec<Fe>>,
    /// generators that enlarge the F_q-span, in order
    basis: Vec<Vec<Fe>>,
    /// F_p-RREF of the F_q-span
    expansion: Vec<Vec<u32>>,
}

impl FqSubspace {
    pub fn new(f: &FieldTower, k: usize, generators: Vec<Vec<Fe>>) -> Result<FqSubspace> {
        if let Some(bad) = generators.iter().find(|g| g.len() != k) {
            return Err(Error::DimensionMismatch { expected: k, got: bad.len() });
        }
        let mut ech: Echelon<DenseRow> = Echelon::new(f.p());
        let mut basis = Vec::new();
        for g in &generators {
            let mut grew = false;
            for &w in f.subfield_basis() {
                let wg: Vec<Fe> = g.iter().map(|&x| f.mul(w, x)).collect();
                grew |= ech.insert(DenseRow(fp_coords(f, &wg)));
            }
            if grew {
                basis.push(g.clone());
            }
        }
        let expansion = ech.to_rref().into_iter().map(|r| r.0).collect();
        Ok(FqSubspace { k, generators, basis, expansion })
    }

    pub fn ambient(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[Vec<Fe>] {
        &self.generators
    }

    /// F_q-independent generators spanning the space.
    pub fn basis(&self) -> &[Vec<Fe>] {
        &self.basis
    }

    /// F_p-RREF of the space in `fp_coords` coordinates.
    pub fn expansion(&self) -> &[Vec<u32>] {
        &self.expansion
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// F_p-basis {w^a g_j}, ordered by generator then power of w.
    pub fn fp_basis(&self, f: &FieldTower) -> Vec<Vec<Fe>> {
        self.basis
            .iter()
            .flat_map(|g| f.subfield_basis().iter().map(move |&w| g.iter().map(|&x| f.mul(w, x)).collect()))
            .collect()
    }

    pub fn contains(&self, f: &FieldTower, v: &[Fe]) -> bool {
        let mut ech: Echelon<DenseRow> = Echelon::new(f.p());
        for r in &self.expansion {
            ech.insert(DenseRow(r.clone()));
        }
        ech.contains(&DenseRow(fp_coords(f, v)))
    }

    /// Rank of the F_{q^n}-span of the space.
    pub fn span_rank(&self, f: &FieldTower) -> usize {
        rank_qn(f, &self.basis, self.k)
    }

    pub fn spans_ambient(&self, f: &FieldTower) -> bool {
        self.span_rank(f) == self.k
    }
}

pub fn fq_dim(s: &FqSubspace) -> usize {
    s.dim()
}

/// dim S + dim T - dim (S + T), all over F_q.
pub fn fq_intersection_dim(f: &FieldTower, s: &FqSubspace, t: &FqSubspace) -> Result<usize> {
    if s.k != t.k {
        return Err(Error::DimensionMismatch { expected: s.k, got: t.k });
    }
    let sum = fp::rank(s.expansion.iter().chain(&t.expansion).map(|r| DenseRow(r.clone())), f.p());
    Ok((s.expansion.len() + t.expansion.len() - sum) / f.s() as usize)
}

/// An F_q-basis of S ∩ T.
pub fn fq_intersection_basis(f: &FieldTower, s: &FqSubspace, t: &FqSubspace) -> Result<Vec<Vec<Fe>>> {
    if s.k != t.k {
        return Err(Error::DimensionMismatch { expected: s.k, got: t.k });
    }
    let width = s.k * f.degree();
    let rows: Vec<Vec<u32>> = s.expansion.iter().chain(&t.expansion).cloned().collect();
    let kernel = fp::left_kernel(&rows, width, f.p());
    // a kernel vector (a, b) gives the common vector sum a_i s_i
    let p = f.p() as u64;
    let common: Vec<Vec<Fe>> = kernel
        .iter()
        .map(|kv| {
            let mut acc = vec![0u64; width];
            for (c, r) in kv.iter().zip(&s.expansion) {
                for (a, &x) in acc.iter_mut().zip(r) {
                    *a = (*a + *c as u64 * x as u64) % p;
                }
            }
            let digits: Vec<u32> = acc.into_iter().map(|a| a as u32).collect();
            from_fp_coords(f, &digits)
        })
        .collect();
    Ok(FqSubspace::new(f, s.k, common)?.basis().to_vec())
}

/// Number of d-dimensional subspaces of a k-dimensional space over a field of order `q_order`.
pub fn gaussian_binomial(k: usize, d: usize, q_order: u64) -> BigUint {
    if d > k {
        return BigUint::from(0u32);
    }
    let q = BigUint::from(q_order);
    let one = BigUint::from(1u32);
    let mut num = one.clone();
    let mut den = one.clone();
    for i in 0..d {
        num *= q.pow((k - i) as u32) - &one;
        den *= q.pow((i + 1) as u32) - &one;
    }
    num / den
}

/// The d-dimensional subspaces of F_{q^n}^k in a fixed order.
///
/// Pivot sets come in lexicographic order. Within a pivot set the free
/// entries (row-major) run through the field in element order, last entry
/// fastest. Subspace number `i` is recovered without enumerating its
/// predecessors.
#[derive(Clone, Debug)]
pub struct Grassmannian {
    k: usize,
    d: usize,
    q_order: u64,
    pivot_sets: Vec<Vec<usize>>,
    /// free (row, col) positions per pivot set, row-major
    free: Vec<Vec<(usize, usize)>>,
    /// first index of each pivot set
    offsets: Vec<u64>,
    total: u64,
}

impl Grassmannian {
    pub fn new(k: usize, d: usize, q_order: u64) -> Result<Grassmannian> {
        if d > k {
            return Err(Error::InvalidParams(format!("subspace dimension {d} exceeds ambient {k}")));
        }
        let pivot_sets = combinations(k, d);
        let mut free = Vec::with_capacity(pivot_sets.len());
        let mut offsets = Vec::with_capacity(pivot_sets.len());
        let mut total: u64 = 0;
        let too_large = || Error::TooLarge(format!("[{k},{d}]_{q_order} subspaces"));
        for ps in &pivot_sets {
            let mut fr = Vec::new();
            for (r, &pc) in ps.iter().enumerate() {
                for c in pc + 1..k {
                    if !ps.contains(&c) {
                        fr.push((r, c));
                    }
                }
            }
            let count = (0..fr.len()).try_fold(1u64, |acc, _| acc.checked_mul(q_order)).ok_or_else(too_large)?;
            offsets.push(total);
            total = total.checked_add(count).ok_or_else(too_large)?;
            free.push(fr);
        }
        Ok(Grassmannian { k, d, q_order, pivot_sets, free, offsets, total })
    }

    pub fn count(&self) -> u64 {
        self.total
    }

    pub fn ambient(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// RREF basis rows of subspace number `index`.
    pub fn basis_at(&self, index: u64) -> Vec<Vec<Fe>> {
        assert!(index < self.total, "index out of range");
        let set = self.offsets.partition_point(|&o| o <= index) - 1;
        let mut rest = index - self.offsets[set];
        let mut rows = vec![vec![Fe::ZERO; self.k]; self.d];
        for (r, &c) in self.pivot_sets[set].iter().enumerate() {
            rows[r][c] = Fe::ONE;
        }
        for &(r, c) in self.free[set].iter().rev() {
            rows[r][c] = Fe(rest % self.q_order);
            rest /= self.q_order;
        }
        rows
    }

    pub fn subspace_at(&self, index: u64) -> SubspaceQn {
        SubspaceQn { k: self.k, basis: self.basis_at(index), pivots: self.pivot_sets[self.set_of(index)].clone() }
    }

    fn set_of(&self, index: u64) -> usize {
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    /// Subspaces with index in `start..end`.
    pub fn range(&self, start: u64, end: u64) -> impl Iterator<Item = SubspaceQn> + '_ {
        (start..end.min(self.total)).map(move |i| self.subspace_at(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = SubspaceQn> + '_ {
        self.range(0, self.total)
    }
}

/// Walks a Grassmannian in index order, keeping the basis in a flat
/// row-major d x k buffer.
pub struct GrassCursor<'g> {
    g: &'g Grassmannian,
    index: u64,
    set: usize,
    digits: Vec<u64>,
    rows: Vec<Fe>,
}

impl<'g> GrassCursor<'g> {
    pub fn new(g: &'g Grassmannian, index: u64) -> GrassCursor<'g> {
        let mut c = GrassCursor { g, index, set: 0, digits: Vec::new(), rows: vec![Fe::ZERO; g.d * g.k] };
        if index < g.total {
            c.seek(index);
        }
        c
    }

    fn seek(&mut self, index: u64) {
        let g = self.g;
        self.index = index;
        self.set = g.set_of(index);
        let mut rest = index - g.offsets[self.set];
        self.digits = vec![0; g.free[self.set].len()];
        for d in self.digits.iter_mut().rev() {
            *d = rest % g.q_order;
            rest /= g.q_order;
        }
        self.load_set();
    }

    fn load_set(&mut self) {
        let g = self.g;
        self.rows.iter_mut().for_each(|x| *x = Fe::ZERO);
        for (r, &c) in g.pivot_sets[self.set].iter().enumerate() {
            self.rows[r * g.k + c] = Fe::ONE;
        }
        for (&(r, c), &v) in g.free[self.set].iter().zip(&self.digits) {
            self.rows[r * g.k + c] = Fe(v);
        }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Flat row-major basis of the current subspace.
    pub fn rows(&self) -> &[Fe] {
        &self.rows
    }

    /// Moves to the next index; false at the end.
    pub fn advance(&mut self) -> bool {
        let g = self.g;
        self.index += 1;
        if self.index >= g.total {
            return false;
        }
        let free = &g.free[self.set];
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            let (r, c) = free[i];
            if self.digits[i] < g.q_order {
                self.rows[r * g.k + c] = Fe(self.digits[i]);
                return true;
            }
            self.digits[i] = 0;
            self.rows[r * g.k + c] = Fe::ZERO;
        }
        self.set += 1;
        self.digits = vec![0; g.free[self.set].len()];
        self.load_set();
        true
    }
}

/// d-subsets of 0..k in lexicographic order.
fn combinations(k: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..d).rev().find(|&i| cur[i] < k - d + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Uniform d-dimensional subspace, deterministic in `seed`.
pub fn sample_subspace(f: &FieldTower, k: usize, d: usize, seed: u64) -> SubspaceQn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_subspace_with(f, k, d, &mut rng)
}

/// Draws random d x k matrices until one has full rank, then takes its RREF.
pub fn sample_subspace_with<R: Rng>(f: &FieldTower, k: usize, d: usize, rng: &mut R) -> SubspaceQn {
    assert!(d <= k, "subspace dimension exceeds ambient");
    loop {
        let rows: Vec<Vec<Fe>> = (0..d).map(|_| (0..k).map(|_| Fe(rng.gen_range(0..f.order()))).collect()).collect();
        let s = SubspaceQn::span(f, k, &rows).expect("rows have ambient length");
        if s.dim() == d {
            return s;
        }
    }
}
