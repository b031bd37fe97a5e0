//! Exact arithmetic in F_{q^n} with a distinguished subfield F_q, q = p^s.
//!
//! The extension is stored flat as F_p[z]/(f) with deg f = s*n. An element is
//! the integer sum c_i p^i of its coefficient vector, which doubles as the
//! "field-element order" used by enumerations. The subfield F_q is the
//! fixed field of x -> x^q.

pub(crate) mod poly;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp;

/// Fields up to this order get log/antilog tables.
const TABLE_LIMIT: u64 = 1 << 20;
/// Largest supported field order.
const ORDER_LIMIT: u64 = 1 << 62;

/// An element of F_{q^n}, packed as sum c_i p^i over its coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// JSON form of a tower: `{p, s, n, modulus: [c_0, ..., c_{sn}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub s: u32,
    pub n: u32,
    pub modulus: Vec<u32>,
}

#[derive(Debug)]
struct Tables {
    exp: Vec<u64>,
    log: Vec<u64>,
}

#[derive(Debug)]
pub struct FieldTower {
    p: u32,
    s: u32,
    n: u32,
    degree: u32,
    modulus: Vec<u32>,
    order: u64,
    q: u64,
    /// p^i for i < degree
    place: Vec<u64>,
    tables: Option<Tables>,
    /// 1, w, ..., w^{s-1}: an F_p-basis of F_q
    subfield_basis: Vec<Fe>,
    /// 1, z, ..., z^{n-1}: an F_q-basis of F_{q^n}
    q_basis: Vec<Fe>,
    /// rows: coefficient vector of z^i -> coordinates on {w^a z^j}, index j*s + a
    to_q_coords: Vec<Vec<u32>>,
}

impl PartialEq for FieldTower {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.s == other.s && self.n == other.n && self.modulus == other.modulus
    }
}

impl Eq for FieldTower {}

impl FieldTower {
    /// F_{q^n} with q = p^s. Without a modulus the smallest monic irreducible
    /// polynomial of degree s*n is used (candidates ordered by sum c_i p^i).
    pub fn new(p: u32, s: u32, n: u32, modulus: Option<&[u32]>) -> Result<FieldTower> {
        if !poly::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if s == 0 {
            return Err(Error::ZeroSubfieldDegree);
        }
        if n < 2 {
            return Err(Error::DegreeTooSmall(n));
        }
        let degree = s.checked_mul(n).ok_or(Error::FieldTooLarge { p, degree: u32::MAX })?;
        let order = (0..degree)
            .try_fold(1u64, |acc, _| acc.checked_mul(p as u64).filter(|&v| v <= ORDER_LIMIT))
            .ok_or(Error::FieldTooLarge { p, degree })?;
        let modulus = match modulus {
            Some(m) => {
                let m = poly::trim(m.iter().map(|&c| c % p).collect());
                let got = poly::degree(&m).unwrap_or(0);
                if m.is_empty() || got != degree as usize {
                    return Err(Error::WrongModulusDegree { expected: degree as usize, got });
                }
                let inv = poly::inv_mod(m[got], p) as u64;
                let m: Vec<u32> = m.iter().map(|&c| (c as u64 * inv % p as u64) as u32).collect();
                if !poly::is_irreducible(&m, p) {
                    return Err(Error::ReducibleModulus);
                }
                m
            }
            None => poly::default_modulus(p, degree as usize),
        };
        let place = (0..degree).map(|i| (p as u64).pow(i)).collect();
        let q = (p as u64).pow(s);
        let mut tower = FieldTower {
            p,
            s,
            n,
            degree,
            modulus,
            order,
            q,
            place,
            tables: None,
            subfield_basis: Vec::new(),
            q_basis: Vec::new(),
            to_q_coords: Vec::new(),
        };
        if order <= TABLE_LIMIT {
            tower.tables = Some(tower.build_tables());
        }
        tower.subfield_basis = tower.find_subfield_basis();
        let z = if degree == 1 { Fe(0) } else { Fe(p as u64) };
        tower.q_basis = (0..n).map(|j| tower.pow(z, j as u128)).collect();
        tower.to_q_coords = tower.build_q_coords();
        Ok(tower)
    }

    pub fn from_descriptor(d: &FieldDescriptor) -> Result<FieldTower> {
        FieldTower::new(d.p, d.s, d.n, Some(&d.modulus))
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { p: self.p, s: self.s, n: self.n, modulus: self.modulus.clone() }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn s(&self) -> u32 {
        self.s
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    /// Degree s*n of F_{q^n} over the prime field.
    pub fn degree(&self) -> usize {
        self.degree as usize
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Q = q^n.
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn q_basis(&self) -> &[Fe] {
        &self.q_basis
    }
    pub fn subfield_basis(&self) -> &[Fe] {
        &self.subfield_basis
    }

    /// The class of z.
    pub fn generator(&self) -> Fe {
        Fe(self.p as u64)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order).map(Fe)
    }

    pub fn element(&self, coeffs: &[u32]) -> Result<Fe> {
        if coeffs.len() > self.degree as usize {
            return Err(Error::DimensionMismatch { expected: self.degree as usize, got: coeffs.len() });
        }
        let mut v = 0u64;
        for (i, &c) in coeffs.iter().enumerate() {
            if c >= self.p {
                return Err(Error::Parse(format!("coefficient {c} out of range for p = {}", self.p)));
            }
            v += c as u64 * self.place[i];
        }
        Ok(Fe(v))
    }

    pub fn from_index(&self, index: u64) -> Result<Fe> {
        if index >= self.order {
            return Err(Error::Parse(format!("element index {index} >= field order {}", self.order)));
        }
        Ok(Fe(index))
    }

    pub fn coeffs(&self, x: Fe) -> Vec<u32> {
        let mut out = vec![0u32; self.degree as usize];
        self.write_coeffs(x, &mut out);
        out
    }

    #[inline]
    pub fn write_coeffs(&self, x: Fe, out: &mut [u32]) {
        if self.p == 2 {
            for (i, o) in out.iter_mut().enumerate() {
                *o = ((x.0 >> i) & 1) as u32;
            }
        } else {
            let mut v = x.0;
            for o in out.iter_mut() {
                *o = (v % self.p as u64) as u32;
                v /= self.p as u64;
            }
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        let p = self.p as u64;
        let (mut x, mut y, mut out) = (a.0, b.0, 0u64);
        for &pl in &self.place {
            out += (x % p + y % p) % p * pl;
            x /= p;
            y /= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 {
            return a;
        }
        let p = self.p as u64;
        let (mut x, mut out) = (a.0, 0u64);
        for &pl in &self.place {
            out += (p - x % p) % p * pl;
            x /= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    /// Multiplication by an element of the prime field.
    pub fn scale(&self, c: u32, a: Fe) -> Fe {
        let c = (c % self.p) as u64;
        let p = self.p as u64;
        let (mut x, mut out) = (a.0, 0u64);
        for &pl in &self.place {
            out += (x % p) * c % p * pl;
            x /= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let m = self.order - 1;
                let mut e = t.log[a.0 as usize] + t.log[b.0 as usize];
                if e >= m {
                    e -= m;
                }
                Fe(t.exp[e as usize])
            }
            None => self.mul_poly(a, b),
        }
    }

    fn mul_poly(&self, a: Fe, b: Fe) -> Fe {
        let prod = poly::mul(&self.coeffs(a), &self.coeffs(b), self.p);
        let r = poly::rem(&prod, &self.modulus, self.p);
        self.element(&r).expect("reduced polynomial fits")
    }

    pub fn pow(&self, a: Fe, e: u128) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let m = (self.order - 1) as u128;
        if let Some(t) = &self.tables {
            let l = t.log[a.0 as usize] as u128 * (e % m) % m;
            return Fe(t.exp[l as usize]);
        }
        let mut e = e % m;
        if e == 0 {
            return Fe::ONE;
        }
        let (mut acc, mut base) = (Fe::ONE, a);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_poly(acc, base);
            }
            base = self.mul_poly(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::ZeroElement("inverse"));
        }
        Ok(self.pow(a, (self.order - 2) as u128))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// q^j mod (Q - 1) for j reduced mod n.
    fn q_power_exponent(&self, j: i64) -> u128 {
        let j = j.rem_euclid(self.n as i64) as u32;
        (self.q as u128).pow(j)
    }

    /// x^{q^j}; j is taken mod n, so negative j gives the inverse automorphism.
    #[inline]
    pub fn frobenius(&self, x: Fe, j: i64) -> Fe {
        if x.0 == 0 {
            return x;
        }
        let jj = j.rem_euclid(self.n as i64);
        if jj == 0 {
            return x;
        }
        match &self.tables {
            Some(t) => {
                let m = (self.order - 1) as u128;
                let e = self.q_power_exponent(jj) % m;
                let l = t.log[x.0 as usize] as u128 * e % m;
                Fe(t.exp[l as usize])
            }
            None => {
                let mut y = x;
                for _ in 0..jj {
                    y = self.pow(y, self.q as u128);
                }
                y
            }
        }
    }

    pub fn in_subfield(&self, x: Fe) -> bool {
        self.frobenius(x, 1) == x
    }

    /// True iff `x = y^e` for some nonzero y.
    pub fn is_power_residue(&self, x: Fe, e: u128) -> Result<bool> {
        if x.is_zero() {
            return Err(Error::ZeroElement("power-residue class"));
        }
        let m = (self.order - 1) as u128;
        let g = gcd_u128(e % m, m);
        Ok(self.pow(x, m / g) == Fe::ONE)
    }

    /// `e mod (Q-1)` for e = 1 + q + ... + q^{m-1}.
    pub fn geometric_exponent(&self, m: u32) -> u128 {
        let modulus = (self.order - 1) as u128;
        let mut term = 1u128 % modulus;
        let mut acc = 0u128;
        for _ in 0..m {
            acc = (acc + term) % modulus;
            term = term * self.q as u128 % modulus;
        }
        acc
    }

    /// `(q^m - 1) mod (Q-1)`.
    pub fn q_power_minus_one(&self, m: u32) -> u128 {
        let modulus = (self.order - 1) as u128;
        let mut t = 1u128 % modulus;
        for _ in 0..m {
            t = t * self.q as u128 % modulus;
        }
        (t + modulus - 1) % modulus
    }

    /// Coordinates of `x` on `q_basis`, each an element of F_q.
    pub fn expand_to_fq(&self, x: Fe) -> Vec<Fe> {
        let c = self.coeffs(x);
        let s = self.s as usize;
        let mut digits = vec![0u64; self.degree as usize];
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            for (d, &t) in digits.iter_mut().zip(self.to_q_coords[i].iter()) {
                *d = (*d + ci as u64 * t as u64) % self.p as u64;
            }
        }
        (0..self.n as usize)
            .map(|j| {
                (0..s).fold(Fe::ZERO, |acc, a| {
                    let d = digits[j * s + a] as u32;
                    self.add(acc, self.scale(d, self.subfield_basis[a]))
                })
            })
            .collect()
    }

    fn build_tables(&self) -> Tables {
        let m = (self.order - 1) as usize;
        let mut exp = vec![0u64; m];
        let mut log = vec![0u64; self.order as usize];
        // smallest primitive element by index
        for cand in 2..self.order.max(3) {
            let g = Fe(cand);
            let mut x = Fe::ONE;
            let mut ok = true;
            for (i, slot) in exp.iter_mut().enumerate() {
                if i > 0 && x == Fe::ONE {
                    ok = false;
                    break;
                }
                *slot = x.0;
                x = self.mul_poly(x, g);
            }
            if ok && x == Fe::ONE {
                for (i, &v) in exp.iter().enumerate() {
                    log[v as usize] = i as u64;
                }
                return Tables { exp, log };
            }
        }
        // F_2 has no element >= 2; not reachable because n >= 2
        unreachable!("no primitive element")
    }

    /// F_p-basis 1, w, ..., w^{s-1} of the fixed field of x -> x^q.
    fn find_subfield_basis(&self) -> Vec<Fe> {
        if self.s == 1 {
            return vec![Fe::ONE];
        }
        let deg = self.degree as usize;
        // rows: image of z^i under x -> x^q - x
        let rows: Vec<Vec<u32>> = (0..deg)
            .map(|i| {
                let zi = Fe(self.place[i]);
                self.coeffs(self.sub(self.frobenius(zi, 1), zi))
            })
            .collect();
        let kernel = fp::left_kernel(&rows, deg, self.p);
        debug_assert_eq!(kernel.len(), self.s as usize);
        let kernel: Vec<Fe> = kernel.iter().map(|k| self.element(k).expect("kernel vector")).collect();
        let s = self.s as usize;
        let proper_divisors: Vec<u32> = (1..self.s).filter(|r| self.s % r == 0).collect();
        let total = (self.p as u64).pow(self.s);
        for idx in 1..total {
            let mut w = Fe::ZERO;
            let mut rest = idx;
            for k in &kernel {
                let d = (rest % self.p as u64) as u32;
                rest /= self.p as u64;
                w = self.add(w, self.scale(d, *k));
            }
            let generates = proper_divisors
                .iter()
                .all(|&r| self.pow(w, (self.p as u128).pow(r)) != w);
            if generates {
                return (0..s).map(|a| self.pow(w, a as u128)).collect();
            }
        }
        unreachable!("F_q always has an element of full degree")
    }

    fn build_q_coords(&self) -> Vec<Vec<u32>> {
        let s = self.s as usize;
        let n = self.n as usize;
        let mut basis_rows = vec![Vec::new(); s * n];
        for j in 0..n {
            for a in 0..s {
                basis_rows[j * s + a] = self.coeffs(self.mul(self.subfield_basis[a], self.q_basis[j]));
            }
        }
        fp::invert(&basis_rows, self.p).expect("{w^a z^j} is an F_p-basis")
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd_u128(a as u128, b as u128) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f16() -> FieldTower {
        FieldTower::new(2, 1, 4, Some(&[1, 1, 0, 0, 1])).unwrap()
    }

    #[test]
    fn creation_errors() {
        assert_eq!(FieldTower::new(4, 1, 2, None).unwrap_err(), Error::NotPrime(4));
        assert_eq!(FieldTower::new(2, 1, 1, Some(&[1, 1])).unwrap_err(), Error::DegreeTooSmall(1));
        assert!(matches!(
            FieldTower::new(2, 1, 4, Some(&[1, 1, 1])).unwrap_err(),
            Error::WrongModulusDegree { expected: 4, got: 2 }
        ));
        // (z^2+z+1)^2 = z^4+z^2+1
        assert_eq!(FieldTower::new(2, 1, 4, Some(&[1, 0, 1, 0, 1])).unwrap_err(), Error::ReducibleModulus);
    }

    #[test]
    fn default_modulus_matches_conventional() {
        assert_eq!(FieldTower::new(2, 1, 4, None).unwrap().modulus(), &[1, 1, 0, 0, 1]);
        assert_eq!(FieldTower::new(2, 1, 3, None).unwrap().modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn frobenius_of_generator_is_square() {
        let f = f16();
        let g = f.generator();
        assert_eq!(f.frobenius(g, 1), f.mul(g, g));
        // z^2 under z^4 = z + 1 is just the coefficient vector (0,0,1,0)
        assert_eq!(f.coeffs(f.frobenius(g, 1)), vec![0, 0, 1, 0]);
        for x in f.elements() {
            assert_eq!(f.frobenius(x, 4), x);
            assert_eq!(f.frobenius(x, -1), f.frobenius(x, 3));
        }
        assert_eq!(f.frobenius(Fe::ZERO, 3), Fe::ZERO);
    }

    #[test]
    fn fifteenth_powers_in_f16() {
        let f = f16();
        let g = f.generator();
        assert!(!f.is_power_residue(g, 15).unwrap());
        assert!(f.is_power_residue(Fe::ONE, 15).unwrap());
        // gcd(7, 15) = 1: every element is a 7th power
        assert!(f.elements().skip(1).all(|x| f.is_power_residue(x, 7).unwrap()));
        assert!(f.is_power_residue(Fe::ZERO, 3).is_err());
    }

    #[test]
    fn subfield_f4_inside_f64() {
        let f = FieldTower::new(2, 2, 3, None).unwrap();
        assert_eq!(f.order(), 64);
        let fixed: Vec<Fe> = f.elements().filter(|&x| f.in_subfield(x)).collect();
        assert_eq!(fixed.len(), 4);
        // closed under + and *
        for &a in &fixed {
            for &b in &fixed {
                assert!(f.in_subfield(f.add(a, b)));
                assert!(f.in_subfield(f.mul(a, b)));
            }
        }
        assert_eq!(f.subfield_basis()[0], Fe::ONE);
        assert!(f.subfield_basis().iter().all(|&w| f.in_subfield(w)));
    }

    #[test]
    fn expansion_reconstructs() {
        for (p, s, n) in [(2, 1, 4), (2, 2, 3), (3, 1, 3), (3, 2, 2)] {
            let f = FieldTower::new(p, s, n, None).unwrap();
            for x in f.elements() {
                let c = f.expand_to_fq(x);
                assert!(c.iter().all(|&ci| f.in_subfield(ci)));
                let back = c
                    .iter()
                    .zip(f.q_basis())
                    .fold(Fe::ZERO, |acc, (&ci, &b)| f.add(acc, f.mul(ci, b)));
                assert_eq!(back, x);
            }
        }
    }

    #[test]
    fn table_free_path_agrees() {
        // force the polynomial path by comparing against mul_poly directly
        let f = FieldTower::new(3, 1, 3, None).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                let expect = if a.is_zero() || b.is_zero() { Fe::ZERO } else { f.mul_poly(a, b) };
                assert_eq!(f.mul(a, b), expect);
            }
        }
    }

    #[test]
    fn large_field_without_tables() {
        let f = FieldTower::new(2, 1, 24, None).unwrap();
        assert!(f.tables.is_none());
        let g = f.generator();
        let inv = f.inv(g).unwrap();
        assert_eq!(f.mul(g, inv), Fe::ONE);
        assert_eq!(f.frobenius(g, 24), g);
        assert_eq!(f.frobenius(g, 1), f.mul(g, g));
    }

    proptest! {
        #[test]
        fn frobenius_is_ring_hom(a in 0u64..729, b in 0u64..729, j in 0i64..6) {
            let f = FieldTower::new(3, 2, 3, None).unwrap();
            let (a, b) = (Fe(a), Fe(b));
            prop_assert_eq!(f.frobenius(f.add(a, b), j), f.add(f.frobenius(a, j), f.frobenius(b, j)));
            prop_assert_eq!(f.frobenius(f.mul(a, b), j), f.mul(f.frobenius(a, j), f.frobenius(b, j)));
        }

        #[test]
        fn power_residue_matches_enumeration(e in 1u128..200) {
            let f = FieldTower::new(2, 2, 3, None).unwrap();
            let powers: std::collections::HashSet<Fe> =
                f.elements().skip(1).map(|y| {
                    (0..e).fold(Fe::ONE, |acc, _| f.mul(acc, y))
                }).collect();
            for x in f.elements().skip(1) {
                prop_assert_eq!(f.is_power_residue(x, e).unwrap(), powers.contains(&x));
            }
        }
    }
}
