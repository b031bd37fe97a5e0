//! The family V_{A,h}, its admissibility invariants, and baseline systems.
//!
//! V_{A,h} is the image of F_{q^n}^m under
//!
//! ```text
//! Phi(x) = (x, x^q, ..., x^{q^{h-1}}, f_1(x), ..., f_m(x))
//! f_i(x) = x_i^{q^h} + a_{i+1} x_{i+1}^{q^{h+1}},   f_m(x) = x_m^{q^h} + a_1 x_1^{q^{h+1}}
//! ```
//!
//! inside F_{q^n}^{m(h+1)}; block l occupies coordinates l*m .. l*m + m - 1.

use crate::error::{Error, Result};
use crate::field::{gcd_u64, Fe, FieldTower};
use crate::linear::{unit, FqSubspace};

/// (m, h, a_1..a_m) for V_{A,h}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionParams {
    m: u32,
    h: u32,
    alphas: Vec<Fe>,
}

impl ConstructionParams {
    pub fn new(f: &FieldTower, m: u32, h: u32, alphas: Vec<Fe>) -> Result<ConstructionParams> {
        if m < 3 {
            return Err(Error::InvalidParams(format!("m = {m}, need m >= 3")));
        }
        if h < 1 || h + 2 > f.n() {
            return Err(Error::InvalidParams(format!("h = {h}, need 1 <= h <= n - 2 = {}", f.n() as i64 - 2)));
        }
        if alphas.len() != m as usize {
            return Err(Error::DimensionMismatch { expected: m as usize, got: alphas.len() });
        }
        if alphas.iter().any(|a| a.is_zero()) {
            return Err(Error::InvalidParams("every alpha must be nonzero".into()));
        }
        if alphas.iter().any(|a| a.index() >= f.order()) {
            return Err(Error::InvalidParams("alpha outside the field".into()));
        }
        Ok(ConstructionParams { m, h, alphas })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn alphas(&self) -> &[Fe] {
        &self.alphas
    }

    /// a_i with the index read mod m in 1..=m.
    fn alpha(&self, i: i64) -> Fe {
        self.alphas[(i - 1).rem_euclid(self.m as i64) as usize]
    }

    pub fn ambient(&self) -> usize {
        (self.m * (self.h + 1)) as usize
    }
}

/// K_A = a_1^{q^{m-1}} a_2 a_3^q ... a_m^{q^{m-2}}.
pub fn k_invariant(f: &FieldTower, params: &ConstructionParams) -> Fe {
    let m = params.m as i64;
    let mut k = f.frobenius(params.alpha(1), m - 1);
    for i in 2..=m {
        k = f.mul(k, f.frobenius(params.alpha(i), i - 2));
    }
    k
}

/// True iff K_A is not a (1 + q + ... + q^{m-1})-th power.
pub fn is_in_a(f: &FieldTower, params: &ConstructionParams) -> bool {
    let e = f.geometric_exponent(params.m);
    !f.is_power_residue(k_invariant(f, params), e).expect("K_A is a product of nonzero elements")
}

/// True iff gcd(1 + q + ... + q^{m-1}, q^n - 1) > 1, the condition for the
/// admissible set to be nonempty.
pub fn is_nonvacuous(f: &FieldTower, m: u32) -> bool {
    let order = f.order() - 1;
    let e = f.geometric_exponent(m) as u64;
    gcd_u64(e, order) > 1
}

/// Pi_i = a_i^{q^{m-1}} a_{i-1}^{q^{m-2}} ... a_{i+2}^q a_{i+1}, indices mod m.
pub fn pi_invariant(f: &FieldTower, params: &ConstructionParams, i: u32) -> Fe {
    let m = params.m as i64;
    (0..m).fold(Fe::ONE, |acc, j| f.mul(acc, f.frobenius(params.alpha(i as i64 - j), m - 1 - j)))
}

/// Membership in the admissible set and, for every delta = 1..m-1,
/// Pi_{delta+2} / Pi_2 not a (q^m - 1)-th power.
pub fn is_in_b(f: &FieldTower, params: &ConstructionParams) -> bool {
    if !is_in_a(f, params) {
        return false;
    }
    let e = f.q_power_minus_one(params.m);
    let pi2 = pi_invariant(f, params, 2);
    (1..params.m).all(|delta| {
        let ratio = f.div(pi_invariant(f, params, delta + 2), pi2).expect("Pi_2 is nonzero");
        !f.is_power_residue(ratio, e).expect("ratio is nonzero")
    })
}

/// What a system was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Family(ConstructionParams),
    Pseudoregulus { h: u32 },
    DirectSum(Vec<SystemKind>),
    /// F_{q^n}-span of e_1 in F_{q^n}^k
    Line { k: usize },
    Generators,
}

/// An F_q-subspace of F_{q^n}^k together with its origin.
#[derive(Clone, Debug)]
pub struct QSystem {
    pub kind: SystemKind,
    pub space: FqSubspace,
}

impl QSystem {
    pub fn from_generators(f: &FieldTower, k: usize, gens: Vec<Vec<Fe>>) -> Result<QSystem> {
        Ok(QSystem { kind: SystemKind::Generators, space: FqSubspace::new(f, k, gens)? })
    }

    /// Ambient dimension k.
    pub fn k(&self) -> usize {
        self.space.ambient()
    }

    /// F_q-dimension t.
    pub fn t(&self) -> usize {
        self.space.dim()
    }

    pub fn spans_ambient(&self, f: &FieldTower) -> bool {
        self.space.spans_ambient(f)
    }
}

/// Phi(x) for x in F_{q^n}^m.
pub fn phi(f: &FieldTower, params: &ConstructionParams, x: &[Fe]) -> Vec<Fe> {
    let m = params.m as usize;
    let h = params.h as i64;
    let mut out = Vec::with_capacity(params.ambient());
    for l in 0..h {
        out.extend(x.iter().map(|&xi| f.frobenius(xi, l)));
    }
    for i in 0..m {
        let next = (i + 1) % m;
        let a = params.alphas[next];
        out.push(f.add(f.frobenius(x[i], h), f.mul(a, f.frobenius(x[next], h + 1))));
    }
    out
}

/// V_{A,h} with generators Phi(b_j e_i), i outer, j inner.
pub fn build_v(f: &FieldTower, params: &ConstructionParams) -> QSystem {
    let m = params.m as usize;
    let mut gens = Vec::with_capacity(m * f.n() as usize);
    for i in 0..m {
        for &b in f.q_basis() {
            let mut x = vec![Fe::ZERO; m];
            x[i] = b;
            gens.push(phi(f, params, &x));
        }
    }
    let space = FqSubspace::new(f, params.ambient(), gens).expect("generators have ambient length");
    QSystem { kind: SystemKind::Family(params.clone()), space }
}

/// {(x, x^q, ..., x^{q^h})} in F_{q^n}^{h+1}.
pub fn build_pseudoregulus(f: &FieldTower, h: u32) -> Result<QSystem> {
    if h < 1 || h >= f.n() {
        return Err(Error::InvalidParams(format!("h = {h}, need 1 <= h <= n - 1")));
    }
    let gens = f
        .q_basis()
        .iter()
        .map(|&b| (0..=h as i64).map(|l| f.frobenius(b, l)).collect())
        .collect();
    let space = FqSubspace::new(f, h as usize + 1, gens)?;
    Ok(QSystem { kind: SystemKind::Pseudoregulus { h }, space })
}

/// F_q-expansion of the F_{q^n}-line through e_1 in F_{q^n}^k.
pub fn build_line(f: &FieldTower, k: usize) -> Result<QSystem> {
    if k < 1 {
        return Err(Error::InvalidParams("ambient dimension must be positive".into()));
    }
    let e1 = unit(k, 0);
    let gens = f.q_basis().iter().map(|&b| e1.iter().map(|&x| f.mul(b, x)).collect()).collect();
    Ok(QSystem { kind: SystemKind::Line { k }, space: FqSubspace::new(f, k, gens)? })
}

/// Block-diagonal embedding of the given systems.
pub fn direct_sum(f: &FieldTower, systems: &[QSystem]) -> Result<QSystem> {
    if systems.len() == 1 {
        return Ok(systems[0].clone());
    }
    let k: usize = systems.iter().map(QSystem::k).sum();
    let mut gens = Vec::new();
    let mut offset = 0;
    for s in systems {
        for g in s.space.basis() {
            let mut v = vec![Fe::ZERO; k];
            v[offset..offset + g.len()].copy_from_slice(g);
            gens.push(v);
        }
        offset += s.k();
    }
    let kind = SystemKind::DirectSum(systems.iter().map(|s| s.kind.clone()).collect());
    Ok(QSystem { kind, space: FqSubspace::new(f, k, gens)? })
}

/// `copies` copies of the pseudoregulus system of index h.
pub fn direct_sum_baseline(f: &FieldTower, h: u32, copies: usize) -> Result<QSystem> {
    if copies == 0 {
        return Err(Error::InvalidParams("direct sum needs at least one summand".into()));
    }
    let base = build_pseudoregulus(f, h)?;
    direct_sum(f, &vec![base; copies])
}

/// Counts over all tuples in (F_{q^n}^*)^m.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub tuples: u64,
    pub in_a: u64,
    pub in_b: u64,
    pub first_in_a: Option<Vec<Fe>>,
    pub first_in_b: Option<Vec<Fe>>,
}

/// Scans every alpha tuple, first entry slowest, each in element order.
pub fn census(f: &FieldTower, m: u32, h: u32, with_b: bool) -> Result<Census> {
    let units = f.order() - 1;
    let tuples = (0..m)
        .try_fold(1u64, |acc, _| acc.checked_mul(units))
        .filter(|&t| t <= 1 << 32)
        .ok_or_else(|| Error::TooLarge(format!("{units}^{m} alpha tuples")))?;
    let mut out = Census { tuples, ..Census::default() };
    let mut digits = vec![0u64; m as usize];
    for _ in 0..tuples {
        let alphas: Vec<Fe> = digits.iter().map(|&d| Fe(d + 1)).collect();
        let params = ConstructionParams::new(f, m, h, alphas)?;
        if is_in_a(f, &params) {
            out.in_a += 1;
            if out.first_in_a.is_none() {
                out.first_in_a = Some(params.alphas.clone());
            }
            if with_b && is_in_b(f, &params) {
                out.in_b += 1;
                if out.first_in_b.is_none() {
                    out.first_in_b = Some(params.alphas.clone());
                }
            }
        }
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < units {
                break;
            }
            *d = 0;
        }
    }
    Ok(out)
}
