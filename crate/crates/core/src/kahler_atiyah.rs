//! Exterior algebra of a diagonal quadratic space with the geometric product.
//!
//! Basis blades are bitmasks: bit `i` set means the covector `e^i` appears, and
//! factors are always stored in increasing index order. A multivector is a
//! dense array of `2^d` coefficients indexed by blade.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// Diagonal metric `eta` in a fixed orthonormal basis, with positive orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticSpace {
    dim: usize,
    neg_mask: u32,
}

impl QuadraticSpace {
    /// Space with the given diagonal entries, each `+1` or `-1`.
    pub fn from_eta(eta: &[i8]) -> Result<Self> {
        if eta.is_empty() || eta.len() > MAX_DIM {
            return Err(Error::InvalidSpace(format!(
                "dimension {} outside 1..={MAX_DIM}",
                eta.len()
            )));
        }
        let mut neg_mask = 0u32;
        for (i, &e) in eta.iter().enumerate() {
            match e {
                1 => {}
                -1 => neg_mask |= 1 << i,
                _ => return Err(Error::InvalidSpace(format!("eta[{i}] = {e} is not ±1"))),
            }
        }
        Ok(Self {
            dim: eta.len(),
            neg_mask,
        })
    }

    /// Signature `(p, q)` with the `p` positive directions first.
    pub fn signature(p: usize, q: usize) -> Result<Self> {
        let mut eta = vec![1i8; p];
        eta.extend(std::iter::repeat_n(-1i8, q));
        Self::from_eta(&eta)
    }

    pub fn euclidean(d: usize) -> Result<Self> {
        Self::signature(d, 0)
    }

    /// Mostly-plus Minkowski space, `eta = diag(-1, 1, 1, 1)`.
    pub fn minkowski() -> Self {
        Self::from_eta(&[-1, 1, 1, 1]).expect("valid signature")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> usize {
        self.dim - self.q()
    }

    pub fn q(&self) -> usize {
        self.neg_mask.count_ones() as usize
    }

    pub fn eta(&self, i: usize) -> f64 {
        if self.neg_mask >> i & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn eta_vec(&self) -> Vec<i8> {
        (0..self.dim).map(|i| self.eta(i) as i8).collect()
    }

    pub fn num_blades(&self) -> usize {
        1 << self.dim
    }

    /// Bitmask of the volume blade `e^0 ∧ … ∧ e^{d-1}`.
    pub fn volume_blade(&self) -> usize {
        self.num_blades() - 1
    }

    /// Product of the metric entries over the indices of `blade`.
    pub fn blade_metric(&self, blade: usize) -> f64 {
        if (blade as u32 & self.neg_mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// True when an irreducible real Clifford module of real type exists.
    pub fn has_real_module(&self) -> bool {
        let r = (self.p() as i64 - self.q() as i64).rem_euclid(8);
        self.dim.is_multiple_of(2) && (r == 0 || r == 2)
    }

    /// Blades of a given grade in increasing bitmask order.
    pub fn blades_of_grade(&self, k: usize) -> Vec<usize> {
        (0..self.num_blades())
            .filter(|b| b.count_ones() as usize == k)
            .collect()
    }
}

/// Sign of reordering `e^a ∧ e^b` into increasing index order.
pub fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0u32;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Geometric product of two basis blades: `e^a ⋄ e^b = sign · e^{a xor b}`.
pub fn blade_product(space: &QuadraticSpace, a: usize, b: usize) -> (f64, usize) {
    (reorder_sign(a, b) * space.blade_metric(a & b), a ^ b)
}

pub fn grade(blade: usize) -> usize {
    blade.count_ones() as usize
}

/// Dense polyform over a quadratic space.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    space: QuadraticSpace,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(space: QuadraticSpace) -> Self {
        Self {
            space,
            coeffs: vec![0.0; space.num_blades()],
        }
    }

    pub fn scalar(space: QuadraticSpace, c: f64) -> Self {
        Self::blade(space, 0, c)
    }

    pub fn blade(space: QuadraticSpace, bits: usize, c: f64) -> Self {
        let mut m = Self::zero(space);
        m.coeffs[bits] = c;
        m
    }

    /// The covector `e^i`.
    pub fn basis(space: QuadraticSpace, i: usize) -> Self {
        Self::blade(space, 1 << i, 1.0)
    }

    /// One-form with the given components.
    pub fn covector(space: QuadraticSpace, comps: &[f64]) -> Self {
        let mut m = Self::zero(space);
        for (i, &c) in comps.iter().enumerate().take(space.dim()) {
            m.coeffs[1 << i] = c;
        }
        m
    }

    /// The oriented volume form `ν = e^0 ∧ … ∧ e^{d-1}`.
    pub fn volume(space: QuadraticSpace) -> Self {
        Self::blade(space, space.volume_blade(), 1.0)
    }

    pub fn from_coeffs(space: QuadraticSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.num_blades() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                space.num_blades(),
                coeffs.len()
            )));
        }
        Ok(Self { space, coeffs })
    }

    /// Homogeneous form from coefficients listed in `blades_of_grade(k)` order.
    pub fn from_grade(space: QuadraticSpace, k: usize, comps: &[f64]) -> Self {
        let mut m = Self::zero(space);
        for (b, &c) in space.blades_of_grade(k).into_iter().zip(comps) {
            m.coeffs[b] = c;
        }
        m
    }

    /// Coefficients of the grade-`k` part in `blades_of_grade(k)` order.
    pub fn grade_coeffs(&self, k: usize) -> Vec<f64> {
        self.space
            .blades_of_grade(k)
            .into_iter()
            .map(|b| self.coeffs[b])
            .collect()
    }

    pub fn space(&self) -> QuadraticSpace {
        self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, bits: usize) -> f64 {
        self.coeffs[bits]
    }

    pub fn set(&mut self, bits: usize, c: f64) {
        self.coeffs[bits] = c;
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    /// Component of `e^i` in a one-form.
    pub fn component(&self, i: usize) -> f64 {
        self.coeffs[1 << i]
    }

    /// The one-form part as a component vector.
    pub fn components(&self) -> Vec<f64> {
        (0..self.space.dim()).map(|i| self.component(i)).collect()
    }

    pub fn grade_part(&self, k: usize) -> Self {
        self.map_blades(|b, c| if grade(b) == k { c } else { 0.0 })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_blades(|_, c| s * c)
    }

    fn map_blades(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        Self {
            space: self.space,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(b, &c)| f(b, c))
                .collect(),
        }
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::MismatchedSpaces)
        }
    }

    fn bilinear(&self, other: &Self, rule: impl Fn(usize, usize) -> Option<(f64, usize)>) -> Self {
        let mut out = vec![0.0; self.coeffs.len()];
        for (a, &x) in self.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in other.coeffs.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                if let Some((s, c)) = rule(a, b) {
                    out[c] += s * x * y;
                }
            }
        }
        Self {
            space: self.space,
            coeffs: out,
        }
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        self.try_wedge(other).expect("wedge of multivectors on different spaces")
    }

    pub fn try_wedge(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(self.bilinear(other, |a, b| {
            (a & b == 0).then(|| (reorder_sign(a, b), a | b))
        }))
    }

    /// Geometric (Kähler–Atiyah) product `⋄`.
    pub fn gp(&self, other: &Self) -> Self {
        self.try_gp(other).expect("geometric product of multivectors on different spaces")
    }

    pub fn try_gp(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let space = self.space;
        Ok(self.bilinear(other, |a, b| Some(blade_product(&space, a, b))))
    }

    /// Interior product `ι_{θ♯} a` with the metric dual of the one-form `θ`.
    pub fn contract(theta: &Self, a: &Self) -> Result<Self> {
        theta.check_space(a)?;
        if !theta.is_homogeneous(1) {
            return Err(Error::NotGradeOne);
        }
        let space = a.space;
        let mut out = Self::zero(space);
        for i in 0..space.dim() {
            let t = theta.component(i) * space.eta(i);
            if t != 0.0 {
                out += &a.interior(i).scale(t);
            }
        }
        Ok(out)
    }

    /// Interior product with the coordinate vector `e_i` (metric independent).
    pub fn interior(&self, i: usize) -> Self {
        let bit = 1usize << i;
        let below = bit - 1;
        let mut out = Self::zero(self.space);
        for (b, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 && b & bit != 0 {
                let s = if (b & below).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                out.coeffs[b ^ bit] += s * c;
            }
        }
        out
    }

    /// Grade involution `π`: multiplies the degree-`k` part by `(-1)^k`.
    pub fn pi(&self) -> Self {
        self.map_blades(|b, c| if grade(b).is_multiple_of(2) { c } else { -c })
    }

    /// Reversion `τ`: multiplies the degree-`k` part by `(-1)^{k(k-1)/2}`.
    pub fn tau(&self) -> Self {
        self.map_blades(|b, c| reversion_sign(grade(b)) * c)
    }

    pub fn tau_hat(&self) -> Self {
        self.tau().pi()
    }

    /// Hodge star with `α ∧ ∗β = ⟨α, β⟩ ν`.
    pub fn hodge(&self) -> Self {
        let space = self.space;
        let full = space.volume_blade();
        let mut out = Self::zero(space);
        for (b, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                let comp = full ^ b;
                out.coeffs[comp] += space.blade_metric(b) * reorder_sign(b, comp) * c;
            }
        }
        out
    }

    /// Kähler–Atiyah trace `2^{d/2} α^(0)`.
    pub fn ka_trace(&self) -> f64 {
        2f64.powf(self.space.dim() as f64 / 2.0) * self.coeffs[0]
    }

    /// Determinant inner product, blade-orthonormal up to metric signs.
    pub fn det_inner(&self, other: &Self) -> f64 {
        self.try_det_inner(other).expect("inner product of multivectors on different spaces")
    }

    pub fn try_det_inner(&self, other: &Self) -> Result<f64> {
        self.check_space(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(b, (x, y))| self.space.blade_metric(b) * x * y)
            .sum())
    }

    /// Euclidean norm of the coefficient array.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest coefficient difference.
    pub fn dist(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// True when every coefficient outside degree `k` is exactly zero.
    pub fn is_homogeneous(&self, k: usize) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(b, &c)| c == 0.0 || grade(b) == k)
    }

    /// Largest absolute coefficient in degree `k`.
    pub fn grade_max_abs(&self, k: usize) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(b, _)| grade(*b) == k)
            .fold(0.0, |m, (_, c)| m.max(c.abs()))
    }
}

pub fn reversion_sign(k: usize) -> f64 {
    if (k * k.saturating_sub(1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.space, rhs.space, "sum of multivectors on different spaces");
        self.map_blades(|b, c| c + rhs.coeffs[b])
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.space, rhs.space, "difference of multivectors on different spaces");
        self.map_blades(|b, c| c - rhs.coeffs[b])
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(self, rhs: Multivector) -> Multivector {
        &self + &rhs
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(self, rhs: Multivector) -> Multivector {
        &self - &rhs
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.space, rhs.space, "sum of multivectors on different spaces");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl SubAssign<&Multivector> for Multivector {
    fn sub_assign(&mut self, rhs: &Multivector) {
        assert_eq!(self.space, rhs.space, "difference of multivectors on different spaces");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        self.scale(s)
    }
}

impl Mul<&Multivector> for &Multivector {
    type Output = Multivector;
    /// Geometric product.
    fn mul(self, rhs: &Multivector) -> Multivector {
        self.gp(rhs)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (b, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if b == 0 {
                write!(f, "{c}")?;
            } else {
                let idx: Vec<String> = (0..self.space.dim())
                    .filter(|i| b >> i & 1 == 1)
                    .map(|i| i.to_string())
                    .collect();
                write!(f, "{c} e^{}", idx.join(""))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MultivectorJson {
    signature: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta: Option<Vec<i8>>,
    coeffs: BTreeMap<String, f64>,
}

impl Serialize for Multivector {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let sp = self.space;
        let canonical = QuadraticSpace::signature(sp.p(), sp.q()).ok() == Some(sp);
        let mut coeffs: Vec<(usize, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(b, c)| (b, *c))
            .collect();
        coeffs.sort_by_key(|(b, _)| *b);
        MultivectorJson {
            signature: [sp.p(), sp.q()],
            eta: (!canonical).then(|| sp.eta_vec()),
            coeffs: coeffs.into_iter().map(|(b, c)| (b.to_string(), c)).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Multivector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MultivectorJson::deserialize(de)?;
        let [p, q] = raw.signature;
        let space = match raw.eta {
            Some(eta) => {
                let sp = QuadraticSpace::from_eta(&eta).map_err(D::Error::custom)?;
                if sp.p() != p || sp.q() != q {
                    return Err(D::Error::custom("eta disagrees with signature"));
                }
                sp
            }
            None => QuadraticSpace::signature(p, q).map_err(D::Error::custom)?,
        };
        let mut m = Multivector::zero(space);
        for (k, c) in raw.coeffs {
            let b: usize = k.parse().map_err(D::Error::custom)?;
            if b >= space.num_blades() {
                return Err(D::Error::custom(format!("blade {b} out of range")));
            }
            m.coeffs[b] = c;
        }
        Ok(m)
    }
}
