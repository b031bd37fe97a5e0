//! The quotient map F_{q^n}^k -> F_{q^n}^k / U in prime-field coordinates.
//!
//! With R the F_p-RREF of U, a vector x maps to the non-pivot entries of
//! x reduced by R. For any F_{q^n}-subspace H with F_p-basis B,
//! dim_Fp(U ∩ H) = |B| - rank(pi(B)), which is how every sweep computes a
//! weight.

use crate::field::{Fe, FieldTower};
use crate::fp::{Echelon, FpRow};
use crate::linear::FqSubspace;

/// Above this many entries the per-element table is not built.
const TABLE_LIMIT: u64 = 1 << 22;

pub(crate) struct Projector<R> {
    p: u32,
    deg: usize,
    k: usize,
    out_len: usize,
    /// pi(e_pos) for every prime-field coordinate
    units: Vec<R>,
    /// pi(y e_c) at index c * Q + y
    table: Option<Vec<R>>,
    order: u64,
    /// z^i, i < deg
    z_powers: Vec<Fe>,
    /// z^i y at index i * Q + y
    zmul: Option<Vec<Fe>>,
}

impl<R: FpRow> Projector<R> {
    pub fn new(f: &FieldTower, u: &FqSubspace) -> Projector<R> {
        let deg = f.degree();
        let k = u.ambient();
        let width = k * deg;
        let rref = u.expansion();
        let pivots: Vec<usize> = rref.iter().map(|r| r.iter().position(|&c| c != 0).expect("nonzero row")).collect();
        let mut slot = vec![usize::MAX; width];
        let mut next = 0;
        for (c, s) in slot.iter_mut().enumerate() {
            if !pivots.contains(&c) {
                *s = next;
                next += 1;
            }
        }
        let out_len = next;
        let p = f.p();
        let units = (0..width)
            .map(|pos| {
                let mut coeffs = vec![0u32; out_len];
                match pivots.iter().position(|&pc| pc == pos) {
                    // e_pos - row; only the non-pivot entries survive
                    Some(r) => {
                        for (c, &x) in rref[r].iter().enumerate() {
                            if slot[c] != usize::MAX && x != 0 {
                                coeffs[slot[c]] = (p - x) % p;
                            }
                        }
                    }
                    None => coeffs[slot[pos]] = 1,
                }
                R::from_coeffs(&coeffs)
            })
            .collect();
        let z = f.generator();
        let z_powers = (0..deg).map(|i| f.pow(z, i as u128)).collect();
        let mut proj = Projector { p, deg, k, out_len, units, table: None, order: f.order(), z_powers, zmul: None };
        if (k as u64).saturating_mul(f.order()) <= TABLE_LIMIT {
            let mut table = Vec::with_capacity(k * f.order() as usize);
            for c in 0..k {
                for y in f.elements() {
                    table.push(proj.entry_direct(f, c, y));
                }
            }
            proj.table = Some(table);
            let zmul = proj.z_powers.iter().flat_map(|&zi| f.elements().map(move |y| f.mul(zi, y))).collect();
            proj.zmul = Some(zmul);
        }
        proj
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    fn entry_direct(&self, f: &FieldTower, c: usize, y: Fe) -> R {
        let mut acc = R::zeros(self.out_len);
        let mut coeffs = vec![0u32; self.deg];
        f.write_coeffs(y, &mut coeffs);
        for (j, &x) in coeffs.iter().enumerate() {
            if x != 0 {
                acc.add_scaled(x, &self.units[c * self.deg + j], self.p);
            }
        }
        acc
    }

    /// pi(y e_c).
    #[inline]
    pub fn entry(&self, f: &FieldTower, c: usize, y: Fe) -> R {
        match &self.table {
            Some(t) => t[c * self.order as usize + y.index() as usize].clone(),
            None => self.entry_direct(f, c, y),
        }
    }

    /// pi(z^i v) for i < deg.
    pub fn project_multiples(&self, f: &FieldTower, v: &[Fe]) -> Vec<R> {
        self.z_powers
            .iter()
            .map(|&zi| {
                let mut acc = R::zeros(self.out_len);
                for (c, &y) in v.iter().enumerate() {
                    if !y.is_zero() {
                        acc.add_scaled(1, &self.entry(f, c, f.mul(zi, y)), self.p);
                    }
                }
                acc
            })
            .collect()
    }

    /// dim_Fp(U ∩ <rows>) for F_{q^n}-independent rows.
    pub fn fp_weight(&self, f: &FieldTower, rows: &[Vec<Fe>]) -> usize {
        debug_assert!(rows.iter().all(|r| r.len() == self.k));
        let mut ech: Echelon<R> = Echelon::with_capacity(self.p, rows.len() * self.deg);
        for r in rows {
            for img in self.project_multiples(f, r) {
                ech.insert(img);
            }
        }
        rows.len() * self.deg - ech.rank()
    }

    /// As `fp_weight`, for rows stored flat and row-major, reusing `ech`.
    pub fn fp_weight_flat(&self, f: &FieldTower, rows: &[Fe], ech: &mut Echelon<R>) -> usize {
        ech.truncate(0);
        let d = rows.len() / self.k.max(1);
        for row in rows.chunks_exact(self.k) {
            self.insert_row(f, row, ech);
        }
        d * self.deg - ech.rank()
    }

    /// Inserts pi(z^i row) for every i < deg.
    pub fn insert_row(&self, f: &FieldTower, row: &[Fe], ech: &mut Echelon<R>) {
        match (&self.table, &self.zmul) {
            (Some(table), Some(zmul)) => {
                let q = self.order as usize;
                for i in 0..self.deg {
                    let mut acc = R::zeros(self.out_len);
                    for (c, &y) in row.iter().enumerate() {
                        if !y.is_zero() {
                            let zy = zmul[i * q + y.index() as usize];
                            acc.add_scaled(1, &table[c * q + zy.index() as usize], self.p);
                        }
                    }
                    ech.insert(acc);
                }
            }
            _ => {
                for img in self.project_multiples(f, row) {
                    ech.insert(img);
                }
            }
        }
    }

    pub fn z_powers(&self) -> &[Fe] {
        &self.z_powers
    }
}
