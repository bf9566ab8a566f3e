//! Left-invariant parallel spinor flows on simply connected three-dimensional
//! Lie groups.
//!
//! Indices `0, 1, 2` stand for `u, l, n`. Structure constants follow
//! `d e^a = -½ c^a_{bc} e^b ∧ e^c`, equivalently `[X_b, X_c] = c^a_{bc} X_a`
//! for the dual frame. Left-invariant forms are multivectors over Euclidean
//! three-space, so the Hodge star of a coframe is the Euclidean one in that
//! coframe with orientation `e_u ∧ e_l ∧ e_n`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahler_atiyah::{Multivector, QuadraticSpace};

pub type Structure = [[[f64; 3]; 3]; 3];

const U: usize = 0;
const L: usize = 1;
const N: usize = 2;

/// Relative threshold below which `λ`, `T`, `Δ` and off-diagonal entries count as zero.
pub const ZERO_TOL: f64 = 1e-12;

pub fn space3() -> QuadraticSpace {
    QuadraticSpace::euclidean(3).expect("three-dimensional Euclidean space")
}

fn one_form(x: &Vector3<f64>) -> Multivector {
    Multivector::covector(space3(), x.as_slice())
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

/// Isomorphism type of a group admitting left-invariant Cauchy pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum GroupTag {
    R3,
    E11,
    Tau2R,
    Tau3 { mu: f64 },
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupTag::R3 => write!(f, "R^3"),
            GroupTag::E11 => write!(f, "E(1,1)"),
            GroupTag::Tau2R => write!(f, "tau_2+R"),
            GroupTag::Tau3 { mu } => write!(f, "tau_3,mu (mu = {mu})"),
        }
    }
}

impl GroupTag {
    /// Same family, with `μ` compared to the given tolerance.
    pub fn matches(&self, other: &GroupTag, tol: f64) -> bool {
        match (self, other) {
            (GroupTag::Tau3 { mu: a }, GroupTag::Tau3 { mu: b }) => (a - b).abs() <= tol,
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

/// Three-dimensional Lie algebra given by its structure constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieGroup3 {
    /// `c[a][b][c] = c^a_{bc}`.
    pub c: Structure,
    #[serde(default)]
    pub tag: Option<GroupTag>,
}

impl LieGroup3 {
    /// Checks antisymmetry and the Jacobi identity to `1e-12` relative.
    pub fn new(c: Structure, tag: Option<GroupTag>) -> Result<Self> {
        let g = Self { c, tag };
        let scale = 1.0 + g.scale() * g.scale();
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    if (c[a][b][d] + c[a][d][b]).abs() > 1e-12 * scale.sqrt() {
                        return Err(Error::InvalidInput("structure constants are not antisymmetric".into()));
                    }
                }
            }
        }
        let j = g.jacobi_defect();
        if j > 1e-12 * scale {
            return Err(Error::InvalidInput(format!("Jacobi identity fails by {j:e}")));
        }
        Ok(g)
    }

    pub fn abelian() -> Self {
        Self {
            c: [[[0.0; 3]; 3]; 3],
            tag: Some(GroupTag::R3),
        }
    }

    /// Standard basis of each family: `τ₂⊕ℝ` has `[F_1, F_2] = F_2`; `E(1,1)` and `τ_{3,μ}`
    /// have `[F_3, F_1] = F_1`, `[F_3, F_2] = μ F_2` with `μ = -1` for `E(1,1)`.
    pub fn catalog(tag: GroupTag) -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        let mut set = |a: usize, b: usize, d: usize, v: f64| {
            c[a][b][d] = v;
            c[a][d][b] = -v;
        };
        match tag {
            GroupTag::R3 => {}
            GroupTag::Tau2R => set(1, 0, 1, 1.0),
            GroupTag::E11 => {
                set(0, 2, 0, 1.0);
                set(1, 2, 1, -1.0);
            }
            GroupTag::Tau3 { mu } => {
                set(0, 2, 0, 1.0);
                set(1, 2, 1, mu);
            }
        }
        Self { c, tag: Some(tag) }
    }

    /// Algebra in which the identity coframe solves `d e_a = Θ_{ab} e_b ∧ e_u`.
    pub fn cauchy_algebra(theta: &Matrix3<f64>) -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            c[a][U][L] = theta[(a, L)];
            c[a][L][U] = -theta[(a, L)];
            c[a][U][N] = theta[(a, N)];
            c[a][N][U] = -theta[(a, N)];
        }
        Self { c, tag: None }
    }

    pub fn scale(&self) -> f64 {
        self.c.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn jacobi_defect(&self) -> f64 {
        let c = &self.c;
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    for e in 0..3 {
                        let mut s = 0.0;
                        for m in 0..3 {
                            s += c[m][a][b] * c[e][m][d] + c[m][b][d] * c[e][m][a] + c[m][d][a] * c[e][m][b];
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Structure constants of the frame dual to the coframe `e_a = Σ_i E_{ai} f^i`.
    pub fn in_coframe(&self, e: &Matrix3<f64>) -> Result<Self> {
        let einv = e
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("coframe matrix is singular".into()))?;
        let mut out = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                for d in 0..3 {
                    let mut s = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            for k in 0..3 {
                                s += e[(a, i)] * einv[(j, b)] * einv[(k, d)] * self.c[i][j][k];
                            }
                        }
                    }
                    out[a][b][d] = s;
                }
            }
        }
        Ok(Self { c: out, tag: self.tag })
    }

    /// `[x, y]` for vectors in the frame basis.
    pub fn bracket(&self, x: &Vector3<f64>, y: &Vector3<f64>) -> Vector3<f64> {
        Vector3::from_fn(|a, _| {
            let mut s = 0.0;
            for b in 0..3 {
                for d in 0..3 {
                    s += self.c[a][b][d] * x[b] * y[d];
                }
            }
            s
        })
    }

    /// Basis `F_i = Σ_a P_{ai} X_a` in which the brackets take the catalog form of `tag`.
    pub fn catalog_basis(&self, tag: GroupTag) -> Result<Matrix3<f64>> {
        let p = match tag {
            GroupTag::R3 => Matrix3::identity(),
            GroupTag::Tau2R => self.tau2_basis()?,
            GroupTag::E11 | GroupTag::Tau3 { .. } => self.tau3_basis()?,
        };
        let target = Self::catalog(tag);
        let got = self.in_frame(&p)?;
        let diff = got
            .c
            .iter()
            .flatten()
            .flatten()
            .zip(target.c.iter().flatten().flatten())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff > 1e-8 * (1.0 + self.scale()) {
            return Err(Error::InvalidInput(format!("algebra is not isomorphic to {tag} (defect {diff:e})")));
        }
        Ok(p)
    }

    fn in_frame(&self, p: &Matrix3<f64>) -> Result<Self> {
        // the coframe dual to F_i = Σ_a P_{ai} X_a is f^i = Σ_a (P^{-1})_{ia} e^a
        let pinv = p
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("frame matrix is singular".into()))?;
        self.in_coframe(&pinv)
    }

    fn derived(&self) -> (usize, Matrix3<f64>) {
        let cols: Vec<Vector3<f64>> = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(b, d)| Vector3::from_fn(|a, _| self.c[a][b][d]))
            .collect();
        let m = Matrix3::from_columns(&cols);
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors");
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * smax.max(1e-300))
            .count();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let sorted = Matrix3::from_columns(&[u.column(order[0]), u.column(order[1]), u.column(order[2])]);
        (rank, sorted)
    }

    fn tau2_basis(&self) -> Result<Matrix3<f64>> {
        let (rank, d) = self.derived();
        if rank != 1 {
            return Err(Error::InvalidInput("derived algebra is not one-dimensional".into()));
        }
        let y: Vector3<f64> = d.column(0).into();
        // centre: kernel of x ↦ ad_x
        let mut rows = nalgebra::DMatrix::<f64>::zeros(9, 3);
        for b in 0..3 {
            let eb = Vector3::ith(b, 1.0);
            for x in 0..3 {
                let v = self.bracket(&Vector3::ith(x, 1.0), &eb);
                for a in 0..3 {
                    rows[(3 * b + a, x)] = v[a];
                }
            }
        }
        let svd = rows.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors");
        let kmin = (0..3)
            .min_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]))
            .expect("three singular values");
        let z = Vector3::from_fn(|i, _| vt[(kmin, i)]);
        let (mut best, mut kbest) = (Vector3::zeros(), 0.0f64);
        for i in 0..3 {
            let x = Vector3::ith(i, 1.0);
            let k = self.bracket(&x, &y).dot(&y) / y.dot(&y);
            if k.abs() > kbest.abs() {
                best = x;
                kbest = k;
            }
        }
        if kbest.abs() < 1e-300 {
            return Err(Error::InvalidInput("no element acts on the derived algebra".into()));
        }
        let x = best / kbest;
        let mut p = Matrix3::from_columns(&[x, y, z]);
        if p.determinant() < 0.0 {
            p.set_column(2, &(-z));
        }
        Ok(p)
    }

    fn tau3_basis(&self) -> Result<Matrix3<f64>> {
        let (rank, d) = self.derived();
        if rank != 2 {
            return Err(Error::InvalidInput("derived algebra is not two-dimensional".into()));
        }
        let (d1, d2): (Vector3<f64>, Vector3<f64>) = (d.column(0).into(), d.column(1).into());
        let x: Vector3<f64> = d.column(2).into();
        let basis = Matrix3::from_columns(&[d1, d2, x]);
        let binv = basis.try_inverse().expect("orthonormal basis");
        let img1 = binv * self.bracket(&x, &d1);
        let img2 = binv * self.bracket(&x, &d2);
        let a = Matrix2::new(img1[0], img2[0], img1[1], img2[1]);
        let tr = a.trace();
        let det = a.determinant();
        let disc = tr * tr - 4.0 * det;
        if disc < -1e-12 * (1.0 + tr * tr) {
            return Err(Error::InvalidInput("ad action has complex eigenvalues".into()));
        }
        let sq = disc.max(0.0).sqrt();
        let (r1, r2) = ((tr + sq) / 2.0, (tr - sq) / 2.0);
        let (big, small) = if r1.abs() >= r2.abs() { (r1, r2) } else { (r2, r1) };
        if big.abs() < 1e-300 {
            return Err(Error::InvalidInput("ad action is nilpotent".into()));
        }
        let eigvec = |r: f64, other: f64| -> Vector3<f64> {
            // columns of (A - other·I) span the r-eigenspace when r ≠ other
            let m = a - Matrix2::identity() * other;
            let c0 = m.column(0);
            let c1 = m.column(1);
            let v = if (r - other).abs() < 1e-12 * (1.0 + r.abs()) {
                nalgebra::Vector2::new(1.0, 0.0)
            } else if c0.norm() >= c1.norm() {
                c0.into_owned()
            } else {
                c1.into_owned()
            };
            let v = v / v.norm();
            d1 * v[0] + d2 * v[1]
        };
        let f1 = eigvec(big, small);
        let mut f2 = eigvec(small, big);
        if (big - small).abs() < 1e-12 * (1.0 + big.abs()) {
            f2 = d2;
        }
        let f3 = x / big;
        let mut p = Matrix3::from_columns(&[f1, f2, f3]);
        if p.determinant() < 0.0 {
            f2 = -f2;
            p.set_column(1, &f2);
        }
        Ok(p)
    }
}

/// Exterior derivative of a left-invariant form with coefficients in the Maurer–Cartan basis.
pub fn d_leftinv(group: &LieGroup3, omega: &Multivector) -> Multivector {
    let sp = omega.space();
    let de: Vec<Multivector> = (0..3)
        .map(|a| {
            let mut m = Multivector::zero(sp);
            for (b, d) in [(0usize, 1usize), (0, 2), (1, 2)] {
                m.set((1 << b) | (1 << d), -group.c[a][b][d]);
            }
            m
        })
        .collect();
    let mut out = Multivector::zero(sp);
    for (bits, &coef) in omega.coeffs().iter().enumerate() {
        if coef == 0.0 {
            continue;
        }
        let idx: Vec<usize> = (0..3).filter(|i| bits >> i & 1 == 1).collect();
        for (j, &i) in idx.iter().enumerate() {
            let mut term = Multivector::scalar(sp, if j % 2 == 0 { coef } else { -coef });
            for (k, &m) in idx.iter().enumerate() {
                term = if k == j {
                    term.wedge(&de[i])
                } else {
                    term.wedge(&Multivector::basis(sp, m))
                };
            }
            out += &term;
        }
    }
    out
}

/// Left-invariant coframe `𝔢` on a group together with a shape operator `Θ` written in `𝔢`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyPair {
    pub group: LieGroup3,
    /// Rows `e_u, e_l, e_n` in the Maurer–Cartan basis of `group`.
    pub e: [[f64; 3]; 3],
    /// Symmetric `Θ_{ab}` in the `𝔢` basis.
    pub theta: [[f64; 3]; 3],
}

/// Invariants `(λ, T, Δ)` of a shape operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaInvariants {
    pub lambda: f64,
    pub trace: f64,
    pub det: f64,
}

pub fn invariants(theta: &Matrix3<f64>) -> ThetaInvariants {
    ThetaInvariants {
        lambda: theta[(U, L)].hypot(theta[(U, N)]),
        trace: theta[(L, L)] + theta[(N, N)],
        det: theta[(L, L)] * theta[(N, N)] - theta[(L, N)] * theta[(L, N)],
    }
}

fn theta_scale(theta: &Matrix3<f64>) -> f64 {
    theta.amax().max(1e-300)
}

impl CauchyPair {
    pub fn new(group: LieGroup3, e: Matrix3<f64>, theta: Matrix3<f64>) -> Result<Self> {
        if e.determinant().abs() < 1e-14 {
            return Err(Error::Degenerate("coframe matrix is singular".into()));
        }
        if (theta - theta.transpose()).amax() > 1e-12 * (1.0 + theta.amax()) {
            return Err(Error::InvalidInput("Θ is not symmetric".into()));
        }
        Ok(Self {
            group,
            e: to_rows(&e),
            theta: to_rows(&theta),
        })
    }

    /// Places `Θ` on the catalog group of its class with the coframe that makes it a Cauchy pair.
    pub fn on_catalog(theta: &Matrix3<f64>) -> Result<Self> {
        let tag = classify_group(theta)?.tag;
        let algebra = LieGroup3::cauchy_algebra(theta);
        let p = algebra.catalog_basis(tag)?;
        Self::new(LieGroup3::catalog(tag), p, *theta)
    }

    pub fn e_matrix(&self) -> Matrix3<f64> {
        from_rows(&self.e)
    }

    pub fn theta_matrix(&self) -> Matrix3<f64> {
        from_rows(&self.theta)
    }

    /// Structure constants in the frame dual to `𝔢`.
    pub fn frame_algebra(&self) -> Result<LieGroup3> {
        self.group.in_coframe(&self.e_matrix())
    }

    /// Coframe `U(𝔢)` with the same group and a new shape operator.
    pub fn evolved(&self, u: &Matrix3<f64>, theta: &Matrix3<f64>) -> Self {
        Self {
            group: self.group.clone(),
            e: to_rows(&(u * self.e_matrix())),
            theta: to_rows(theta),
        }
    }
}

/// Residual norms of the left-invariant Cauchy constraints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyResidual {
    /// `‖d e_a - Θ_{ab} e_b ∧ e_u‖` for `a = u, l, n`.
    pub structure: [f64; 3],
    /// `‖d Θ(e_u)‖`.
    pub closed: f64,
}

impl CauchyResidual {
    pub fn max(&self) -> f64 {
        self.structure.iter().fold(self.closed, |m, &x| m.max(x))
    }
}

/// The coframe one-forms `e_a` in the Maurer–Cartan basis.
fn coframe_forms(pair: &CauchyPair) -> [Multivector; 3] {
    let e = pair.e_matrix();
    std::array::from_fn(|a| one_form(&e.row(a).transpose()))
}

fn theta_of(theta: &Matrix3<f64>, forms: &[Multivector; 3], a: usize) -> Multivector {
    let mut m = Multivector::zero(space3());
    for b in 0..3 {
        m += &forms[b].scale(theta[(a, b)]);
    }
    m
}

/// Residuals of `d e_a = Θ(e_a) ∧ e_u` and `d Θ(e_u) = 0`, with `d` from the group structure.
pub fn cauchy_residual(pair: &CauchyPair) -> CauchyResidual {
    let forms = coframe_forms(pair);
    let theta = pair.theta_matrix();
    let structure = std::array::from_fn(|a| {
        let lhs = d_leftinv(&pair.group, &forms[a]);
        let rhs = theta_of(&theta, &forms, a).wedge(&forms[U]);
        lhs.dist(&rhs)
    });
    let closed = d_leftinv(&pair.group, &theta_of(&theta, &forms, U)).coeff_norm();
    CauchyResidual { structure, closed }
}

/// Result of `classify_group`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: GroupTag,
    pub invariants: ThetaInvariants,
}

/// Isomorphism type prescribed by `(T, Δ, λ)`.
pub fn classify_group(theta: &Matrix3<f64>) -> Result<Classification> {
    classify_group_tol(theta, 1e-10)
}

pub fn classify_group_tol(theta: &Matrix3<f64>, tol: f64) -> Result<Classification> {
    let inv = invariants(theta);
    let s = theta_scale(theta);
    let lam0 = inv.lambda <= tol * s;
    let t0 = inv.trace.abs() <= tol * s;
    let d0 = inv.det.abs() <= tol * s * s;
    let tag = if !lam0 && !d0 {
        return Err(Error::Inadmissible(format!(
            "λ = {:e} and Δ = {:e} are both nonzero",
            inv.lambda, inv.det
        )));
    } else if t0 && d0 && lam0 {
        GroupTag::R3
    } else if t0 && lam0 {
        GroupTag::E11
    } else if d0 {
        GroupTag::Tau2R
    } else {
        GroupTag::Tau3 { mu: mu_rule(theta, tol) }
    };
    Ok(Classification { tag, invariants: inv })
}

/// The three-case rule for `μ` of `τ_{3,μ}`.
pub fn mu_rule(theta: &Matrix3<f64>, tol: f64) -> f64 {
    let inv = invariants(theta);
    let (ll, nn, ln) = (theta[(L, L)], theta[(N, N)], theta[(L, N)]);
    if ln.abs() > tol * theta_scale(theta) {
        let t = inv.trace;
        let root = (t * t - 4.0 * inv.det).max(0.0).sqrt();
        let sg = t.signum();
        (t - sg * root) / (t + sg * root)
    } else if ll.abs() >= nn.abs() {
        nn / ll
    } else {
        ll / nn
    }
}

/// Lapse function `λ_t`: a nonzero constant or a piecewise-linear table extended by constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lapse {
    Constant { value: f64 },
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl Lapse {
    pub fn constant(value: f64) -> Self {
        Lapse::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Lapse::Constant { value } => {
                if *value == 0.0 || !value.is_finite() {
                    return Err(Error::InvalidInput("lapse must be a nonzero finite constant".into()));
                }
            }
            Lapse::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return Err(Error::InvalidInput("tabulated lapse needs matching arrays of length ≥ 2".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidInput("lapse times must increase strictly".into()));
                }
                let s = values[0].signum();
                if values.iter().any(|v| *v == 0.0 || v.signum() != s || !v.is_finite()) {
                    return Err(Error::InvalidInput("lapse values must be nonzero with a fixed sign".into()));
                }
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Lapse::Constant { value } => *value,
            Lapse::Tabulated { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let i = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        }
    }

    /// Primitive measured from `times[0]`.
    fn primitive(&self, t: f64) -> f64 {
        match self {
            Lapse::Constant { value } => value * t,
            Lapse::Tabulated { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return (t - times[0]) * values[0];
                }
                let mut acc = 0.0;
                for i in 0..n - 1 {
                    if t <= times[i + 1] {
                        return acc + 0.5 * (t - times[i]) * (values[i] + self.value(t));
                    }
                    acc += 0.5 * (times[i + 1] - times[i]) * (values[i] + values[i + 1]);
                }
                acc + (t - times[n - 1]) * values[n - 1]
            }
        }
    }

    /// `ℬ_t = ∫_0^t λ_τ dτ`.
    pub fn b(&self, t: f64) -> f64 {
        self.primitive(t) - self.primitive(0.0)
    }

    /// The unique `t` with `ℬ_t = target`.
    pub fn b_inverse(&self, target: f64) -> f64 {
        match self {
            Lapse::Constant { value } => target / value,
            Lapse::Tabulated { times, values } => {
                let p = self.primitive(0.0) + target;
                let n = times.len();
                let sign = values[0].signum();
                if sign * p <= 0.0 {
                    return times[0] + p / values[0];
                }
                let mut acc = 0.0;
                for i in 0..n - 1 {
                    let seg = 0.5 * (times[i + 1] - times[i]) * (values[i] + values[i + 1]);
                    if sign * (acc + seg) >= sign * p {
                        let r = p - acc;
                        let v = values[i];
                        let k = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
                        let disc = (v * v + 2.0 * k * r).max(0.0).sqrt();
                        return times[i] + 2.0 * r / (v + v.signum() * disc);
                    }
                    acc += seg;
                }
                times[n - 1] + (p - acc) / values[n - 1]
            }
        }
    }
}

/// Violations of the four algebraic admissibility equations.
pub fn algebraic_defects(theta: &Matrix3<f64>) -> [f64; 4] {
    let t = |a: usize, b: usize| theta[(a, b)];
    [
        t(L, N) * t(U, L) - t(L, L) * t(U, N),
        t(N, N) * t(U, L) - t(L, N) * t(U, N),
        t(L, N) * t(U, N) + t(U, L) * (t(L, L) + t(U, U)),
        t(L, N) * t(U, L) + t(U, N) * (t(N, N) + t(U, U)),
    ]
}

fn is_quasi_diagonal(theta: &Matrix3<f64>) -> bool {
    invariants(theta).lambda <= ZERO_TOL * theta_scale(theta)
}

/// Checks the algebraic Cauchy equations on `Θ`; the error names every violated equation.
pub fn check_admissible(theta: &Matrix3<f64>) -> Result<()> {
    if is_quasi_diagonal(theta) {
        return Ok(());
    }
    let s = theta_scale(theta);
    let names = [
        "Θ_ln Θ_ul = Θ_ll Θ_un",
        "Θ_nn Θ_ul = Θ_ln Θ_un",
        "Θ_ln Θ_un + Θ_ul (Θ_ll + Θ_uu) = 0",
        "Θ_ln Θ_ul + Θ_un (Θ_nn + Θ_uu) = 0",
    ];
    let failed: Vec<&str> = algebraic_defects(theta)
        .iter()
        .zip(names)
        .filter(|(d, _)| d.abs() > 1e-9 * s * s)
        .map(|(_, n)| n)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Inadmissible(format!("violated: {}", failed.join("; "))))
    }
}

/// Maximal interval `(t_-, t_+)` of the flow; infinite ends are `±∞`.
pub fn maximal_interval(theta: &Matrix3<f64>, lapse: &Lapse) -> (f64, f64) {
    let tuu = theta[(U, U)];
    if is_quasi_diagonal(theta) {
        if tuu == 0.0 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let t0 = lapse.b_inverse(1.0 / tuu);
        if t0 > 0.0 {
            (f64::NEG_INFINITY, t0)
        } else {
            (t0, f64::INFINITY)
        }
    } else {
        let lam = invariants(theta).lambda;
        let y0 = (tuu / lam).atan();
        let a = lapse.b_inverse((FRAC_PI_2 - y0) / lam);
        let b = lapse.b_inverse((-FRAC_PI_2 - y0) / lam);
        (a.min(b), a.max(b))
    }
}

fn check_interval(theta: &Matrix3<f64>, lapse: &Lapse, t: f64) -> Result<()> {
    let (lo, hi) = maximal_interval(theta, lapse);
    if t <= lo || t >= hi {
        return Err(Error::OutsideMaximalInterval { t, lo, hi });
    }
    Ok(())
}

/// `Θ^t` in the `𝔢^t` basis, as a function of `ℬ_t` only.
pub fn theta_at_b(theta: &Matrix3<f64>, b: f64) -> Matrix3<f64> {
    let t = |i: usize, j: usize| theta[(i, j)];
    if is_quasi_diagonal(theta) {
        let f = 1.0 - t(U, U) * b;
        let mut out = theta / f;
        out[(U, L)] = 0.0;
        out[(L, U)] = 0.0;
        out[(U, N)] = 0.0;
        out[(N, U)] = 0.0;
        return out;
    }
    let lam = invariants(theta).lambda;
    let y = lam * b + (t(U, U) / lam).atan();
    let (tan, sec) = (y.tan(), 1.0 / y.cos());
    let root = lam * (lam * lam + t(U, U) * t(U, U)).sqrt();
    let c = |ab: f64, ua: f64, ub: f64| (ab * lam * lam + ua * ub * t(U, U)) / root;
    let (ul, un) = (t(U, L), t(U, N));
    let ll = c(t(L, L), ul, ul) * sec - ul * ul / lam * tan;
    let nn = c(t(N, N), un, un) * sec - un * un / lam * tan;
    let ln = c(t(L, N), ul, un) * sec - ul * un / lam * tan;
    Matrix3::new(lam * tan, ul, un, ul, ll, ln, un, ln, nn)
}

/// Closed-form `Θ^t`.
pub fn theta_closed_form(theta: &Matrix3<f64>, lapse: &Lapse, t: f64) -> Result<Matrix3<f64>> {
    lapse.validate()?;
    check_admissible(theta)?;
    check_interval(theta, lapse, t)?;
    Ok(theta_at_b(theta, lapse.b(t)))
}

/// Closed-form `U^t` as a function of `ℬ_t`.
pub fn u_at_b(theta: &Matrix3<f64>, b: f64) -> Matrix3<f64> {
    let t = |i: usize, j: usize| theta[(i, j)];
    let tuu = t(U, U);
    let mut u = Matrix3::zeros();
    if is_quasi_diagonal(theta) {
        u[(U, U)] = 1.0 - tuu * b;
        // exp(φ θ) with φ = log(1 - Θ_uu ℬ)/Θ_uu, whose limit at Θ_uu = 0 is -ℬ
        let phi = if tuu == 0.0 { -b } else { (-tuu * b).ln_1p() / tuu };
        let th = Matrix2::new(t(L, L), t(L, N), t(L, N), t(N, N));
        let eig = SymmetricEigen::new(th);
        let q = eig.eigenvectors;
        let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|r| (phi * r).exp()));
        let blk = q * d * q.transpose();
        u[(L, L)] = blk[(0, 0)];
        u[(L, N)] = blk[(0, 1)];
        u[(N, L)] = blk[(1, 0)];
        u[(N, N)] = blk[(1, 1)];
        return u;
    }
    let lam = invariants(theta).lambda;
    let y = lam * b + (tuu / lam).atan();
    let tan = y.tan();
    let (ul, un) = (t(U, L), t(U, N));
    let s = theta_scale(theta);
    u[(U, U)] = 1.0 - tuu * b;
    u[(U, L)] = -ul * b;
    u[(U, N)] = -un * b;
    let side = |x: f64| x / lam * (tuu / lam - (1.0 - tuu * b) * tan);
    if ul.abs() <= ZERO_TOL * s {
        u[(L, L)] = 1.0;
        u[(N, N)] = 1.0 + lam * b * tan;
        u[(N, U)] = tuu / un - lam / un * (1.0 - tuu * b) * tan;
    } else if un.abs() <= ZERO_TOL * s {
        u[(N, N)] = 1.0;
        u[(L, L)] = 1.0 + lam * b * tan;
        u[(L, U)] = tuu / ul - lam / ul * (1.0 - tuu * b) * tan;
    } else {
        u[(L, U)] = side(ul);
        u[(N, U)] = side(un);
        u[(L, L)] = 1.0 + ul * ul * b / lam * tan;
        u[(N, N)] = 1.0 + un * un * b / lam * tan;
        u[(L, N)] = ul * un * b / lam * tan;
        u[(N, L)] = u[(L, N)];
    }
    u
}

/// Closed-form coframe matrix `𝔢^t = U^t 𝔢` in the Maurer–Cartan basis.
pub fn flow_closed_form(pair: &CauchyPair, lapse: &Lapse, t: f64) -> Result<FlowState> {
    let theta = pair.theta_matrix();
    let theta_t = theta_closed_form(&theta, lapse, t)?;
    let b = lapse.b(t);
    let u = u_at_b(&theta, b);
    Ok(FlowState {
        t,
        b,
        u: to_rows(&u),
        theta: to_rows(&theta_t),
        e: to_rows(&(u * pair.e_matrix())),
    })
}

/// Sample of a left-invariant flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    /// `ℬ_t`.
    pub b: f64,
    pub u: [[f64; 3]; 3],
    pub theta: [[f64; 3]; 3],
    /// Coframe rows in the Maurer–Cartan basis.
    pub e: [[f64; 3]; 3],
}

impl FlowState {
    pub fn u_matrix(&self) -> Matrix3<f64> {
        from_rows(&self.u)
    }

    pub fn theta_matrix(&self) -> Matrix3<f64> {
        from_rows(&self.theta)
    }

    pub fn e_matrix(&self) -> Matrix3<f64> {
        from_rows(&self.e)
    }

    pub fn pair(&self, group: &LieGroup3) -> CauchyPair {
        CauchyPair {
            group: group.clone(),
            e: self.e,
            theta: self.theta,
        }
    }
}

/// Classical fourth-order Runge–Kutta integration of `∂_t U = -λ_t Θ^t U` from `t = 0` to `t_end`.
pub fn flow_numeric(pair: &CauchyPair, lapse: &Lapse, t_end: f64, step: f64) -> Result<Vec<FlowState>> {
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    lapse.validate()?;
    let theta0 = pair.theta_matrix();
    check_admissible(&theta0)?;
    check_interval(&theta0, lapse, t_end)?;
    let e0 = pair.e_matrix();
    let n = (t_end.abs() / step).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let rhs = |t: f64, u: &Matrix3<f64>| -> Matrix3<f64> {
        -(theta_at_b(&theta0, lapse.b(t)) * u) * lapse.value(t)
    };
    let state = |t: f64, u: Matrix3<f64>| {
        let b = lapse.b(t);
        FlowState {
            t,
            b,
            u: to_rows(&u),
            theta: to_rows(&theta_at_b(&theta0, b)),
            e: to_rows(&(u * e0)),
        }
    };
    let mut u = Matrix3::identity();
    let mut out = Vec::with_capacity(n + 1);
    out.push(state(0.0, u));
    for k in 0..n {
        let t = k as f64 * h;
        let k1 = rhs(t, &u);
        let k2 = rhs(t + h / 2.0, &(u + k1 * (h / 2.0)));
        let k3 = rhs(t + h / 2.0, &(u + k2 * (h / 2.0)));
        let k4 = rhs(t + h, &(u + k3 * h));
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(state((k + 1) as f64 * h, u));
    }
    Ok(out)
}

/// Residuals of the integrability conditions along a sampled `Θ` path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityResidual {
    /// Largest central-difference defect of the six evolution equations.
    pub ode: f64,
    /// Largest defect of the four algebraic equations.
    pub algebraic: f64,
    /// Largest drift of `Θ_ul` and `Θ_un` from their initial values.
    pub drift: f64,
}

pub fn integrability_residual(lapse: &Lapse, times: &[f64], thetas: &[Matrix3<f64>]) -> Result<IntegrabilityResidual> {
    if times.len() != thetas.len() || times.len() < 3 {
        return Err(Error::InvalidInput("need at least three matching samples".into()));
    }
    let h = times[1] - times[0];
    if h <= 0.0 || times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::InvalidInput("samples must be uniformly spaced".into()));
    }
    let rate = |th: &Matrix3<f64>, lam: f64| -> [f64; 6] {
        let t = |a: usize, b: usize| th[(a, b)];
        [
            lam * (t(U, U) * t(U, U) + t(U, L) * t(U, L) + t(U, N) * t(U, N)),
            0.0,
            0.0,
            lam * (t(L, L) * t(U, U) - t(U, L) * t(U, L)),
            lam * (t(L, N) * t(U, U) - t(U, N) * t(U, L)),
            lam * (t(N, N) * t(U, U) - t(U, N) * t(U, N)),
        ]
    };
    let comps = |th: &Matrix3<f64>| [th[(U, U)], th[(U, L)], th[(U, N)], th[(L, L)], th[(L, N)], th[(N, N)]];
    let mut ode: f64 = 0.0;
    for k in 1..times.len() - 1 {
        let (a, b) = (comps(&thetas[k - 1]), comps(&thetas[k + 1]));
        let r = rate(&thetas[k], lapse.value(times[k]));
        for i in 0..6 {
            ode = ode.max(((b[i] - a[i]) / (2.0 * h) - r[i]).abs());
        }
    }
    let algebraic = thetas
        .iter()
        .flat_map(algebraic_defects)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let first = comps(&thetas[0]);
    let drift = thetas
        .iter()
        .map(|th| {
            let c = comps(th);
            (c[1] - first[1]).abs().max((c[2] - first[2]).abs())
        })
        .fold(0.0f64, f64::max);
    Ok(IntegrabilityResidual { ode, algebraic, drift })
}

/// Levi-Civita symbols `g(∇_{X_a} X_b, X_c)` of an orthonormal left-invariant frame.
fn christoffel(frame: &LieGroup3) -> [[[f64; 3]; 3]; 3] {
    let c = |a: usize, b: usize, d: usize| frame.c[d][a][b];
    std::array::from_fn(|a| {
        std::array::from_fn(|b| std::array::from_fn(|d| 0.5 * (c(a, b, d) - c(a, d, b) - c(b, d, a))))
    })
}

/// Ricci tensor of `h = Σ e_a ⊗ e_a` in the `𝔢` basis.
pub fn ricci_leftinv(group: &LieGroup3, e: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let frame = group.in_coframe(e)?;
    let g = christoffel(&frame);
    let c = &frame.c;
    // R(X_a, X_b) X_d, component along X_e
    let riem = |a: usize, b: usize, d: usize, e: usize| -> f64 {
        let mut s = 0.0;
        for m in 0..3 {
            s += g[b][d][m] * g[a][m][e] - g[a][d][m] * g[b][m][e] - c[m][a][b] * g[m][d][e];
        }
        s
    };
    Ok(Matrix3::from_fn(|b, d| (0..3).map(|a| riem(a, b, d, a)).sum()))
}

pub fn scalar_curvature_leftinv(group: &LieGroup3, e: &Matrix3<f64>) -> Result<f64> {
    Ok(ricci_leftinv(group, e)?.trace())
}

/// `ℋ = s^h + Tr(Θ)² - |Θ|²`.
pub fn hamiltonian_constraint(pair: &CauchyPair) -> Result<f64> {
    let s = scalar_curvature_leftinv(&pair.group, &pair.e_matrix())?;
    let th = pair.theta_matrix();
    Ok(s + th.trace().powi(2) - th.norm_squared())
}

/// `ℋ_t` from the closed-form evolution laws.
pub fn hamiltonian_evolution(pair: &CauchyPair, lapse: &Lapse, t: f64) -> Result<f64> {
    lapse.validate()?;
    let theta = pair.theta_matrix();
    check_admissible(&theta)?;
    check_interval(&theta, lapse, t)?;
    let h0 = hamiltonian_constraint(pair)?;
    let b = lapse.b(t);
    let tuu = theta[(U, U)];
    if is_quasi_diagonal(&theta) {
        return Ok(h0 / (1.0 - tuu * b).powi(2));
    }
    let lam = invariants(&theta).lambda;
    let y = lam * b + (tuu / lam).atan();
    Ok(lam * lam * h0 / (lam * lam + tuu * tuu) / y.cos().powi(2))
}

/// Relation checked by the Ricci anchors: returns `(‖Ric - lhs‖, ‖Ric - rhs‖)` for the case formula.
pub fn ricci_anchor_defects(pair: &CauchyPair) -> Result<(f64, f64)> {
    let ric = ricci_leftinv(&pair.group, &pair.e_matrix())?;
    let th = pair.theta_matrix();
    let h = hamiltonian_constraint(pair)?;
    if is_quasi_diagonal(&th) {
        let t = th[(L, L)] + th[(N, N)];
        let mut expected = -th * t;
        expected[(U, U)] += h / 2.0;
        let d = (ric - expected).amax();
        return Ok((d, d));
    }
    let inv = invariants(&th);
    let eta = Vector3::new(0.0, th[(U, N)], -th[(U, L)]) / inv.lambda;
    let lhs = -(th * th);
    let rhs = (Matrix3::identity() - eta * eta.transpose()) * (h / 4.0);
    Ok(((ric - lhs).amax(), (ric - rhs).amax()))
}

/// Initial data for the skew-torsion Cauchy constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewCauchyData {
    pub pair: CauchyPair,
    /// `α^o`.
    pub alpha0: f64,
    /// `α^⊥` in the `𝔢` basis.
    pub alpha_perp: [f64; 3],
}

/// Residuals of the skew-torsion constraint equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewCauchyResidual {
    pub structure: [f64; 3],
    /// `‖d(Θ(e_u) + ½ ∗(α^⊥ ∧ e_u))‖`.
    pub closed: f64,
}

impl SkewCauchyResidual {
    pub fn max(&self) -> f64 {
        self.structure.iter().fold(self.closed, |m, &x| m.max(x))
    }
}

struct FrameForms {
    frame: LieGroup3,
    e: [Multivector; 3],
    theta: Matrix3<f64>,
    alpha: Multivector,
}

impl FrameForms {
    fn new(data: &SkewCauchyData) -> Result<Self> {
        let frame = data.pair.frame_algebra()?;
        let sp = space3();
        Ok(Self {
            frame,
            e: std::array::from_fn(|a| Multivector::basis(sp, a)),
            theta: data.pair.theta_matrix(),
            alpha: Multivector::covector(sp, &data.alpha_perp),
        })
    }

    fn theta_of(&self, a: usize) -> Multivector {
        theta_of(&self.theta, &self.e, a)
    }
}

/// Residuals of the constraint equations of the skew-torsion Cauchy flow in the `𝔢` basis.
pub fn skew_cauchy_residual(data: &SkewCauchyData) -> Result<SkewCauchyResidual> {
    let f = FrameForms::new(data)?;
    let (e, a, a0) = (&f.e, &f.alpha, data.alpha0);
    let d = |x: &Multivector| d_leftinv(&f.frame, x);
    let rhs_u = &(&f.theta_of(U).wedge(&e[U]) + &(a - &e[U].scale(a0)).hodge())
        + &a.wedge(&e[U]).hodge().scale(0.5).wedge(&e[U]);
    let coef = 0.5 * data.alpha_perp[U] - a0;
    let rhs_i = |i: usize| &f.theta_of(i).wedge(&e[U]) + &e[i].hodge().scale(coef);
    let structure = [
        d(&e[U]).dist(&rhs_u),
        d(&e[L]).dist(&rhs_i(L)),
        d(&e[N]).dist(&rhs_i(N)),
    ];
    let witness = &f.theta_of(U) + &a.wedge(&e[U]).hodge().scale(0.5);
    Ok(SkewCauchyResidual {
        structure,
        closed: d(&witness).coeff_norm(),
    })
}

/// `‖dβ_l‖`, `‖dβ_n‖` for `β_i = ∗(α^⊥ ∧ e_i) - ∂_t e_i` with `∂_t e_i = -Θ(e_i) + ½ ∗(α^⊥ ∧ e_i)`.
pub fn torsion_flat_witness(data: &SkewCauchyData) -> Result<[f64; 2]> {
    let f = FrameForms::new(data)?;
    let beta = |i: usize| {
        let star = f.alpha.wedge(&f.e[i]).hodge();
        let dt = &star.scale(0.5) - &f.theta_of(i);
        &star - &dt
    };
    Ok([L, N].map(|i| d_leftinv(&f.frame, &beta(i)).coeff_norm()))
}

/// Rows of the classification table of left-invariant Cauchy pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    /// `ℝ³`: `Θ = Θ_uu e_u ⊗ e_u`.
    Abelian,
    /// `E(1,1)`: quasi-diagonal with `Θ_ll = -Θ_nn`.
    E11,
    /// `τ₂⊕ℝ`: `Θ = (Θ_ul e_l + Θ_un e_n) ⊙ e_u`.
    Tau2Mixed,
    /// `τ₂⊕ℝ`: quasi-diagonal with `T ≠ 0`, `Δ = 0`.
    Tau2Diagonal,
    /// `τ₂⊕ℝ`: `-T e_u⊗e_u + Θ_ul e_u⊙e_l + Θ_ll e_l⊗e_l`.
    Tau2L,
    /// `τ₂⊕ℝ`: `-T e_u⊗e_u + Θ_un e_u⊙e_n + Θ_nn e_n⊗e_n`.
    Tau2N,
    /// `τ₂⊕ℝ`: both `Θ_ul`, `Θ_un` nonzero.
    Tau2General,
    /// `τ_{3,μ}`: quasi-diagonal with `T, Δ ≠ 0`.
    Tau3,
}

impl TableRow {
    pub const ALL: [TableRow; 8] = [
        TableRow::Abelian,
        TableRow::E11,
        TableRow::Tau2Mixed,
        TableRow::Tau2Diagonal,
        TableRow::Tau2L,
        TableRow::Tau2N,
        TableRow::Tau2General,
        TableRow::Tau3,
    ];

    /// Number of free parameters taken by `instantiate`.
    pub fn arity(&self) -> usize {
        match self {
            TableRow::Abelian => 1,
            TableRow::Tau2Mixed | TableRow::Tau2L | TableRow::Tau2N => 2,
            TableRow::E11 | TableRow::Tau2Diagonal | TableRow::Tau2General => 3,
            TableRow::Tau3 => 4,
        }
    }

    /// Shape operator of the row from free parameters; generic parameters satisfy the row's conditions.
    pub fn instantiate(&self, p: &[f64]) -> Result<Matrix3<f64>> {
        if p.len() < self.arity() {
            return Err(Error::InvalidInput(format!("row needs {} parameters", self.arity())));
        }
        let sym = |uu: f64, ul: f64, un: f64, ll: f64, ln: f64, nn: f64| Matrix3::new(uu, ul, un, ul, ll, ln, un, ln, nn);
        Ok(match self {
            TableRow::Abelian => sym(p[0], 0.0, 0.0, 0.0, 0.0, 0.0),
            TableRow::E11 => sym(p[0], 0.0, 0.0, p[1], p[2], -p[1]),
            TableRow::Tau2Mixed => sym(0.0, p[0], p[1], 0.0, 0.0, 0.0),
            TableRow::Tau2Diagonal => {
                let (c, s) = (p[2].cos(), p[2].sin());
                sym(p[0], 0.0, 0.0, p[1] * c * c, p[1] * c * s, p[1] * s * s)
            }
            TableRow::Tau2L => sym(-p[0], p[1], 0.0, p[0], 0.0, 0.0),
            TableRow::Tau2N => sym(-p[0], 0.0, p[1], 0.0, 0.0, p[0]),
            TableRow::Tau2General => {
                let (ul, un, ln) = (p[0], p[1], p[2]);
                let nn = un / ul * ln;
                let ll = ul / un * ln;
                sym(-(ll + nn), ul, un, ll, ln, nn)
            }
            TableRow::Tau3 => sym(p[0], 0.0, 0.0, p[1], p[2], p[3]),
        })
    }

    pub fn expected_family(&self) -> GroupTag {
        match self {
            TableRow::Abelian => GroupTag::R3,
            TableRow::E11 => GroupTag::E11,
            TableRow::Tau3 => GroupTag::Tau3 { mu: f64::NAN },
            _ => GroupTag::Tau2R,
        }
    }
}

/// Group of a scenario: a catalog tag or raw structure constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Catalog(GroupTag),
    Structure(LieGroup3),
}

/// Optional skew-torsion data of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionSpec {
    pub alpha0: f64,
    pub alpha_perp: [f64; 3],
}

/// Input for a flow run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Omitted means the catalog group of `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    pub theta: [[f64; 3]; 3],
    /// Coframe rows; omitted means the coframe found on the catalog group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<[[f64; 3]; 3]>,
    pub lapse: Lapse,
    #[serde(default)]
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion: Option<TorsionSpec>,
}

impl Scenario {
    pub fn new(theta: [[f64; 3]; 3], lapse: Lapse, t_max: f64, step: f64) -> Self {
        Self {
            group: None,
            theta,
            e: None,
            lapse,
            t_min: 0.0,
            t_max,
            step,
            torsion: None,
        }
    }

    pub fn pair(&self) -> Result<CauchyPair> {
        let theta = from_rows(&self.theta);
        let group = match &self.group {
            None => None,
            Some(GroupSpec::Catalog(tag)) => Some(LieGroup3::catalog(*tag)),
            Some(GroupSpec::Structure(g)) => Some(LieGroup3::new(g.c, g.tag)?),
        };
        match (group, &self.e) {
            (Some(g), Some(e)) => CauchyPair::new(g, from_rows(e), theta),
            (Some(g), None) => {
                let tag = g.tag.ok_or_else(|| Error::InvalidInput("untagged group needs an explicit coframe".into()))?;
                if !LieGroup3::catalog(tag).c.iter().flatten().flatten().zip(g.c.iter().flatten().flatten()).all(|(a, b)| (a - b).abs() <= ZERO_TOL) {
                    return Err(Error::InvalidInput("structure constants differ from the catalog basis of the tag; give a coframe".into()));
                }
                check_admissible(&theta)?;
                let p = LieGroup3::cauchy_algebra(&theta).catalog_basis(tag)?;
                CauchyPair::new(g, p, theta)
            }
            (None, Some(_)) => Err(Error::InvalidInput("a coframe needs a group".into())),
            (None, None) => {
                check_admissible(&theta)?;
                CauchyPair::on_catalog(&theta)
            }
        }
    }

    pub fn skew_data(&self) -> Result<Option<SkewCauchyData>> {
        Ok(match self.torsion {
            None => None,
            Some(t) => Some(SkewCauchyData {
                pair: self.pair()?,
                alpha0: t.alpha0,
                alpha_perp: t.alpha_perp,
            }),
        })
    }
}
