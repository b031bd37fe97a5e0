//! Prime-field row kernel.
//!
//! Every F_q-dimension in the crate is computed as an F_p-rank of coefficient
//! rows (an F_q-space of F_q-dimension d has F_p-dimension s*d). Rows are
//! packed into a single machine word when p = 2 and the row fits, which is
//! the case for all of the sweeps that run billions of ranks.

use std::fmt::Debug;

use crate::field::poly::inv_mod;

/// A vector over F_p of fixed length.
///
/// Coordinate 0 is the lowest bit for the packed types. `lead` returns the
/// smallest index holding a nonzero entry; echelon forms pivot on it.
pub trait FpRow: Clone + Send + Sync + Debug + PartialEq {
    fn zeros(len: usize) -> Self;
    fn from_coeffs(coeffs: &[u32]) -> Self;
    fn get(&self, i: usize) -> u32;
    fn is_zero(&self) -> bool;
    fn lead(&self) -> Option<usize>;
    /// `self += c * other`
    fn add_scaled(&mut self, c: u32, other: &Self, p: u32);
    /// `self *= c` for nonzero `c`
    fn scale(&mut self, c: u32, p: u32);
    fn to_coeffs(&self, len: usize) -> Vec<u32> {
        (0..len).map(|i| self.get(i)).collect()
    }
}

macro_rules! packed_row {
    ($t:ty, $bits:expr) => {
        impl FpRow for $t {
            #[inline(always)]
            fn zeros(len: usize) -> Self {
                debug_assert!(len <= $bits);
                0
            }
            fn from_coeffs(coeffs: &[u32]) -> Self {
                assert!(coeffs.len() <= $bits, "row of {} entries does not fit", coeffs.len());
                coeffs
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (i, &c)| acc | (((c & 1) as $t) << i))
            }
            #[inline(always)]
            fn get(&self, i: usize) -> u32 {
                ((*self >> i) & 1) as u32
            }
            #[inline(always)]
            fn is_zero(&self) -> bool {
                *self == 0
            }
            #[inline(always)]
            fn lead(&self) -> Option<usize> {
                if *self == 0 {
                    None
                } else {
                    Some(self.trailing_zeros() as usize)
                }
            }
            #[inline(always)]
            fn add_scaled(&mut self, c: u32, other: &Self, _p: u32) {
                if c & 1 == 1 {
                    *self ^= *other;
                }
            }
            #[inline(always)]
            fn scale(&mut self, _c: u32, _p: u32) {}
        }
    };
}

packed_row!(u64, 64);
packed_row!(u128, 128);

/// Unpacked row for odd characteristic or rows longer than 128 entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseRow(pub Vec<u32>);

impl FpRow for DenseRow {
    fn zeros(len: usize) -> Self {
        DenseRow(vec![0; len])
    }
    fn from_coeffs(coeffs: &[u32]) -> Self {
        DenseRow(coeffs.to_vec())
    }
    #[inline]
    fn get(&self, i: usize) -> u32 {
        self.0[i]
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
    fn lead(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }
    fn add_scaled(&mut self, c: u32, other: &Self, p: u32) {
        if c == 0 {
            return;
        }
        let (c, p) = (c as u64, p as u64);
        for (a, &b) in self.0.iter_mut().zip(other.0.iter()) {
            if b != 0 {
                *a = ((*a as u64 + c * b as u64) % p) as u32;
            }
        }
    }
    fn scale(&mut self, c: u32, p: u32) {
        let (c, p) = (c as u64, p as u64);
        for a in self.0.iter_mut() {
            *a = (*a as u64 * c % p) as u32;
        }
    }
}

/// Semi-echelon basis: each stored row has a 1 at its pivot and zeros at
/// the pivots of all earlier rows. Rows are never modified after insertion,
/// so `truncate` restores any earlier state.
#[derive(Clone, Debug)]
pub struct Echelon<R> {
    p: u32,
    rows: Vec<R>,
    pivots: Vec<usize>,
}

impl<R: FpRow> Echelon<R> {
    pub fn new(p: u32) -> Self {
        Echelon { p, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn with_capacity(p: u32, cap: usize) -> Self {
        Echelon { p, rows: Vec::with_capacity(cap), pivots: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[R] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    #[inline]
    pub fn reduce(&self, v: &mut R) {
        let p = self.p;
        for (row, &piv) in self.rows.iter().zip(self.pivots.iter()) {
            let c = v.get(piv);
            if c != 0 {
                v.add_scaled(p - c, row, p);
            }
        }
    }

    /// Adds `v` to the span; returns false when it was already there.
    #[inline]
    pub fn insert(&mut self, mut v: R) -> bool {
        self.reduce(&mut v);
        match v.lead() {
            None => false,
            Some(l) => {
                let c = v.get(l);
                if c != 1 {
                    v.scale(inv_mod(c, self.p), self.p);
                }
                self.rows.push(v);
                self.pivots.push(l);
                true
            }
        }
    }

    pub fn contains(&self, v: &R) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    #[inline]
    pub fn truncate(&mut self, len: usize) {
        self.rows.truncate(len);
        self.pivots.truncate(len);
    }

    /// Canonical reduced row-echelon form, rows sorted by pivot.
    pub fn to_rref(&self) -> Vec<R> {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.pivots[i]);
        let mut rows: Vec<R> = order.iter().map(|&i| self.rows[i].clone()).collect();
        let pivots: Vec<usize> = order.iter().map(|&i| self.pivots[i]).collect();
        let p = self.p;
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                if i == j {
                    continue;
                }
                let c = rows[j].get(pivots[i]);
                if c != 0 {
                    let src = rows[i].clone();
                    rows[j].add_scaled(p - c, &src, p);
                }
            }
        }
        rows
    }
}

/// Rank of a list of rows.
pub fn rank<R: FpRow>(rows: impl IntoIterator<Item = R>, p: u32) -> usize {
    let mut e = Echelon::new(p);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Which row representation a computation over F_p^len should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Bits64,
    Bits128,
    Dense,
}

impl RowKind {
    pub fn choose(p: u32, len: usize) -> RowKind {
        if p == 2 && len <= 64 {
            RowKind::Bits64
        } else if p == 2 && len <= 128 {
            RowKind::Bits128
        } else {
            RowKind::Dense
        }
    }
}

/// Runs a generic expression with `$R` bound to the row type for `$kind`.
#[macro_export]
#[doc(hidden)]
macro_rules! with_row_kind {
    ($kind:expr, $R:ident => $body:expr) => {
        match $kind {
            $crate::fp::RowKind::Bits64 => {
                type $R = u64;
                $body
            }
            $crate::fp::RowKind::Bits128 => {
                type $R = u128;
                $body
            }
            $crate::fp::RowKind::Dense => {
                type $R = $crate::fp::DenseRow;
                $body
            }
        }
    };
}

/// Basis of `{x : sum_i x_i rows[i] = 0}`.
pub fn left_kernel(rows: &[Vec<u32>], width: usize, p: u32) -> Vec<Vec<u32>> {
    let n = rows.len();
    let mut e: Echelon<DenseRow> = Echelon::new(p);
    let mut kernel = Vec::new();
    // Augment with the identity; rows whose left block vanishes are kernel vectors.
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        v.resize(width, 0);
        v.extend((0..n).map(|j| u32::from(i == j)));
        let mut v = DenseRow(v);
        e.reduce(&mut v);
        match v.lead() {
            Some(l) if l < width => {
                e.insert(v);
            }
            _ => kernel.push(v),
        }
    }
    let mut k: Echelon<DenseRow> = Echelon::new(p);
    for v in kernel {
        k.insert(DenseRow(v.0[width..].to_vec()));
    }
    k.to_rref().into_iter().map(|r| r.0).collect()
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(rows: &[Vec<u32>], p: u32) -> Option<Vec<Vec<u32>>> {
    let n = rows.len();
    let mut e: Echelon<DenseRow> = Echelon::new(p);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), n);
        let mut v = r.clone();
        v.extend((0..n).map(|j| u32::from(i == j)));
        e.insert(DenseRow(v));
    }
    let rref = e.to_rref();
    if rref.len() != n || rref.iter().enumerate().any(|(i, r)| r.lead() != Some(i)) {
        return None;
    }
    Some(rref.into_iter().map(|r| r.0[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_rank(mut m: Vec<Vec<u32>>, p: u32) -> usize {
        let cols = m.first().map_or(0, |r| r.len());
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, piv);
            let inv = inv_mod(m[r][c], p) as u64;
            for x in m[r].iter_mut() {
                *x = (*x as u64 * inv % p as u64) as u32;
            }
            for i in 0..m.len() {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c] as u64;
                    for j in 0..cols {
                        let sub = f * m[r][j] as u64 % p as u64;
                        m[i][j] = ((m[i][j] as u64 + p as u64 - sub) % p as u64) as u32;
                    }
                }
            }
            r += 1;
        }
        r
    }

    proptest! {
        #[test]
        fn packed_matches_dense(rows in prop::collection::vec(prop::collection::vec(0u32..2, 50), 0..40)) {
            let dense = rank(rows.iter().map(|r| DenseRow(r.clone())), 2);
            let b64 = rank(rows.iter().map(|r| u64::from_coeffs(r)), 2);
            let b128 = rank(rows.iter().map(|r| u128::from_coeffs(r)), 2);
            prop_assert_eq!(dense, b64);
            prop_assert_eq!(dense, b128);
            prop_assert_eq!(dense, naive_rank(rows, 2));
        }

        #[test]
        fn dense_rank_mod5(rows in prop::collection::vec(prop::collection::vec(0u32..5, 7), 0..10)) {
            let r = rank(rows.iter().map(|r| DenseRow(r.clone())), 5);
            prop_assert_eq!(r, naive_rank(rows, 5));
        }

        #[test]
        fn rref_is_canonical(rows in prop::collection::vec(prop::collection::vec(0u32..3, 6), 1..8), seed in 0usize..100) {
            // any reordering of the same rows yields the same RREF
            let mut e1: Echelon<DenseRow> = Echelon::new(3);
            for r in &rows { e1.insert(DenseRow(r.clone())); }
            let mut shuffled = rows.clone();
            let len = shuffled.len();
            shuffled.rotate_left(seed % len);
            let mut e2: Echelon<DenseRow> = Echelon::new(3);
            for r in &shuffled { e2.insert(DenseRow(r.clone())); }
            prop_assert_eq!(e1.to_rref(), e2.to_rref());
        }
    }

    #[test]
    fn truncate_restores_state() {
        let mut e: Echelon<u64> = Echelon::new(2);
        e.insert(0b0011);
        e.insert(0b0110);
        let before = e.rank();
        e.insert(0b1000);
        e.insert(0b0101); // dependent
        assert_eq!(e.rank(), 3);
        e.truncate(before);
        assert_eq!(e.rank(), 2);
        assert!(!e.contains(&0b1000));
        assert!(e.contains(&0b0101));
    }

    #[test]
    fn kernel_and_inverse() {
        // rows over F_3: r0 + r1 = r2
        let rows = vec![vec![1, 2, 0], vec![0, 1, 1], vec![1, 0, 1]];
        let k = left_kernel(&rows, 3, 3);
        assert_eq!(k, vec![vec![1, 1, 2]]);
        let m = vec![vec![1, 1], vec![0, 1]];
        assert_eq!(invert(&m, 2).unwrap(), vec![vec![1, 1], vec![0, 1]]);
        assert!(invert(&rows, 3).is_none());
    }
}
