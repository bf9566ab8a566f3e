//! Parabolic pairs and null coframes on four-dimensional Minkowski space.
//!
//! Covectors are component vectors in the orthonormal basis `e^0, …, e^3`
//! with `h* = diag(-1, 1, 1, 1)` and orientation `ν = e^0 ∧ e^1 ∧ e^2 ∧ e^3`.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahler_atiyah::{Multivector, QuadraticSpace};

pub type Covector = Vector4<f64>;

/// Default absolute tolerance for the algebraic invariants.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Degree-two blades in increasing bitmask order.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)];

fn eta(i: usize) -> f64 {
    if i == 0 {
        -1.0
    } else {
        1.0
    }
}

/// The inverse metric `h*(a, b)` on covectors.
pub fn inner(a: &Covector, b: &Covector) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Metric dual vector components `η^{ab} β_b`.
pub fn sharp(b: &Covector) -> Vector4<f64> {
    Vector4::new(-b[0], b[1], b[2], b[3])
}

pub fn space() -> QuadraticSpace {
    QuadraticSpace::minkowski()
}

pub fn form(x: &Covector) -> Multivector {
    Multivector::covector(space(), x.as_slice())
}

fn covector_of(m: &Multivector) -> Covector {
    Covector::from_fn(|i, _| m.component(i))
}

fn check_minkowski(m: &Multivector) -> Result<()> {
    if m.space() != space() {
        return Err(Error::MismatchedSpaces);
    }
    Ok(())
}

/// Interior product `ι_{β♯} ω`.
pub fn interior_sharp(beta: &Covector, omega: &Multivector) -> Multivector {
    let x = sharp(beta);
    let mut out = Multivector::zero(omega.space());
    for a in 0..4 {
        if x[a] != 0.0 {
            out += &omega.interior(a).scale(x[a]);
        }
    }
    out
}

/// Time-oriented Minkowski space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiSpace {
    /// Time-orientation covector `𝔱`, normalized to `h*(𝔱, 𝔱) = -1`.
    pub time: [f64; 4],
}

impl Default for MinkowskiSpace {
    fn default() -> Self {
        Self::standard()
    }
}

impl MinkowskiSpace {
    pub fn standard() -> Self {
        Self {
            time: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn new(time: Covector) -> Result<Self> {
        let n = inner(&time, &time);
        if n >= -DEFAULT_TOL {
            return Err(Error::InvalidInput("time orientation is not timelike".into()));
        }
        let t = time / (-n).sqrt();
        Ok(Self {
            time: [t[0], t[1], t[2], t[3]],
        })
    }

    pub fn quadratic_space(&self) -> QuadraticSpace {
        space()
    }

    pub fn time(&self) -> Covector {
        Covector::from_column_slice(&self.time)
    }

    /// Representative `l + c u` with `P_𝔱(l + c u) = 0`.
    pub fn gauge_fix(&self, u: &Covector, l: &Covector) -> Result<Covector> {
        let t = self.time();
        let ut = inner(u, &t);
        if ut.abs() < 1e-300 {
            return Err(Error::Degenerate("u is orthogonal to the time orientation".into()));
        }
        Ok(l - u * (inner(l, &t) / ut))
    }

    /// The null covector `v` with `h*(u, v) = 1` lying in the span of `u` and `𝔱`.
    pub fn conjugate_null(&self, u: &Covector) -> Result<Covector> {
        let t = self.time();
        let ut = inner(u, &t);
        if ut.abs() < 1e-300 {
            return Err(Error::Degenerate("u is orthogonal to the time orientation".into()));
        }
        Ok(t / ut + u / (2.0 * ut * ut))
    }

    /// Parabolic pair of a spinor square, with the gauge-fixed representative of `[l]_u`.
    pub fn square_to_pair(&self, alpha: &Multivector, tol: f64) -> Result<ParabolicPair> {
        check_minkowski(alpha)?;
        let scale = alpha.max_abs();
        if scale == 0.0 {
            return Err(Error::Degenerate("zero polyform".into()));
        }
        let a = alpha.scale(1.0 / scale);
        for k in [0, 3, 4] {
            if a.grade_max_abs(k) > tol {
                return Err(Error::NotASquare(format!("degree {k} part does not vanish")));
            }
        }
        let u = covector_of(&a);
        let unorm = u.amax();
        if unorm <= tol {
            return Err(Error::NotASquare("one-form part vanishes".into()));
        }
        let sq = a.gp(&a);
        if sq.max_abs() > tol {
            return Err(Error::NotASquare("α ⋄ α ≠ 0".into()));
        }
        let v = self.conjugate_null(&u)?;
        let vf = form(&v);
        let lhs = a.gp(&vf).gp(&a);
        let rhs = a.scale(4.0 * vf.gp(&a).scalar_part());
        if lhs.dist(&rhs) > tol * (1.0 + v.amax()) {
            return Err(Error::NotASquare("α ⋄ v ⋄ α ≠ 4 (v ⋄ α)^(0) α".into()));
        }
        let omega = a.grade_part(2);
        let l = covector_of(&interior_sharp(&v, &omega));
        let l = self.gauge_fix(&u, &l)?;
        let ul = form(&u).wedge(&form(&l));
        if ul.dist(&omega) > tol * (1.0 + l.amax()) {
            return Err(Error::NotASquare("degree two part is not u ∧ l".into()));
        }
        let d = ParabolicPair::from_arrays(u, l).defects();
        let bound = tol * (1.0 + l.amax() * l.amax());
        if d.ll > bound || d.ul > bound {
            return Err(Error::NotASquare(format!(
                "l is not a unit covector orthogonal to u (|h*(l,l)-1| = {:e}, |h*(u,l)| = {:e})",
                d.ll, d.ul
            )));
        }
        Ok(ParabolicPair::from_arrays(u * scale, l))
    }
}

/// Parabolic pair `(u, [l]_u)`, stored through a representative `l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicPair {
    pub u: [f64; 4],
    pub l: [f64; 4],
}

/// Absolute violations of the parabolic pair conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDefects {
    pub uu: f64,
    pub ul: f64,
    pub ll: f64,
}

impl ParabolicPair {
    fn from_arrays(u: Covector, l: Covector) -> Self {
        Self {
            u: [u[0], u[1], u[2], u[3]],
            l: [l[0], l[1], l[2], l[3]],
        }
    }

    pub fn new(u: Covector, l: Covector, tol: f64) -> Result<Self> {
        let p = Self {
            u: [u[0], u[1], u[2], u[3]],
            l: [l[0], l[1], l[2], l[3]],
        };
        if u.amax() == 0.0 {
            return Err(Error::Degenerate("u = 0".into()));
        }
        let d = p.defects();
        if d.uu > tol * u.norm_squared() || d.ul > tol * u.norm() * l.norm() || d.ll > tol {
            return Err(Error::InvalidInput(format!(
                "not a parabolic pair (|u|² = {:e}, h*(u,l) = {:e}, |l|² - 1 = {:e})",
                d.uu, d.ul, d.ll
            )));
        }
        Ok(p)
    }

    pub fn u(&self) -> Covector {
        Covector::from_column_slice(&self.u)
    }

    pub fn l(&self) -> Covector {
        Covector::from_column_slice(&self.l)
    }

    pub fn defects(&self) -> PairDefects {
        let (u, l) = (self.u(), self.l());
        PairDefects {
            uu: inner(&u, &u).abs(),
            ul: inner(&u, &l).abs(),
            ll: (inner(&l, &l) - 1.0).abs(),
        }
    }

    /// The polyform `u + u ∧ l`.
    pub fn to_square(&self) -> Multivector {
        let u = form(&self.u());
        &u + &u.wedge(&form(&self.l()))
    }

    /// Same pair with the representative `l + c u`.
    pub fn shifted(&self, c: f64) -> Self {
        let l = self.l() + self.u() * c;
        Self {
            u: self.u,
            l: [l[0], l[1], l[2], l[3]],
        }
    }

    pub fn gauge_fixed(&self, ms: &MinkowskiSpace) -> Result<Self> {
        let l = ms.gauge_fix(&self.u(), &self.l())?;
        Ok(Self {
            u: self.u,
            l: [l[0], l[1], l[2], l[3]],
        })
    }

    /// True when both pairs define the same `(u, [l]_u)`.
    pub fn same_class(&self, other: &Self, tol: f64) -> bool {
        let (u, l) = (self.u(), self.l());
        if (u - other.u()).amax() > tol {
            return false;
        }
        let a = form(&u).wedge(&form(&l));
        let b = form(&u).wedge(&form(&other.l()));
        a.dist(&b) <= tol
    }
}

/// `α ↦ (u, [l]_u)` with the representative fixed by `P_𝔱(l) = 0` for `𝔱 = e^0`.
pub fn square_to_pair(alpha: &Multivector) -> Result<ParabolicPair> {
    MinkowskiSpace::standard().square_to_pair(alpha, 1e-8)
}

pub fn pair_to_square(pair: &ParabolicPair) -> Multivector {
    pair.to_square()
}

/// Positively oriented null coframe `(u, v, l, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullCoframe {
    /// Rows `u, v, l, n`, each in the ambient basis.
    pub components: [[f64; 4]; 4],
}

impl NullCoframe {
    pub fn from_unchecked(u: Covector, v: Covector, l: Covector, n: Covector) -> Self {
        let row = |x: Covector| [x[0], x[1], x[2], x[3]];
        Self {
            components: [row(u), row(v), row(l), row(n)],
        }
    }

    pub fn new(u: Covector, v: Covector, l: Covector, n: Covector, tol: f64) -> Result<Self> {
        let cf = Self::from_unchecked(u, v, l, n);
        let d = cf.defect();
        if d > tol {
            return Err(Error::InvalidInput(format!("not a null coframe (defect {d:e})")));
        }
        Ok(cf)
    }

    /// `u = e^0 + e^1`, `v = (e^1 - e^0)/2`, `l = e^2`, `n = e^3`.
    pub fn standard() -> Self {
        Self::from_unchecked(
            Covector::new(1.0, 1.0, 0.0, 0.0),
            Covector::new(-0.5, 0.5, 0.0, 0.0),
            Covector::new(0.0, 0.0, 1.0, 0.0),
            Covector::new(0.0, 0.0, 0.0, 1.0),
        )
    }

    fn row(&self, i: usize) -> Covector {
        Covector::from_column_slice(&self.components[i])
    }

    pub fn u(&self) -> Covector {
        self.row(0)
    }

    pub fn v(&self) -> Covector {
        self.row(1)
    }

    pub fn l(&self) -> Covector {
        self.row(2)
    }

    pub fn n(&self) -> Covector {
        self.row(3)
    }

    pub fn covectors(&self) -> [Covector; 4] {
        [self.u(), self.v(), self.l(), self.n()]
    }

    pub fn forms(&self) -> [Multivector; 4] {
        self.covectors().map(|x| form(&x))
    }

    /// Matrix whose columns are `u, v, l, n`.
    pub fn frame_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_columns(&self.covectors())
    }

    pub fn pair(&self) -> ParabolicPair {
        let (u, l) = (self.u(), self.l());
        ParabolicPair {
            u: [u[0], u[1], u[2], u[3]],
            l: [l[0], l[1], l[2], l[3]],
        }
    }

    /// Largest violation of the null coframe conditions.
    pub fn defect(&self) -> f64 {
        let c = self.covectors();
        let gram = Matrix4::from_fn(|i, j| inner(&c[i], &c[j]));
        let mut target = Matrix4::identity();
        target[(0, 0)] = 0.0;
        target[(1, 1)] = 0.0;
        target[(0, 1)] = 1.0;
        target[(1, 0)] = 1.0;
        let n_expected = -&form(&c[0]).wedge(&form(&c[1])).wedge(&form(&c[2])).hodge();
        let n_defect = n_expected.dist(&form(&c[3]));
        (gram - target).amax().max(n_defect)
    }
}

/// Completes a parabolic pair with a conjugate null covector `v`.
pub fn complete_coframe(pair: &ParabolicPair, v: &Covector) -> Result<NullCoframe> {
    complete_coframe_tol(pair, v, DEFAULT_TOL)
}

pub fn complete_coframe_tol(pair: &ParabolicPair, v: &Covector, tol: f64) -> Result<NullCoframe> {
    let (u, l) = (pair.u(), pair.l());
    let d = pair.defects();
    if d.uu > tol || d.ul > tol || d.ll > tol {
        return Err(Error::InvalidInput("not a parabolic pair".into()));
    }
    if inner(v, v).abs() > tol {
        return Err(Error::InvalidInput("v is not null".into()));
    }
    if (inner(&u, v) - 1.0).abs() > tol {
        return Err(Error::InvalidInput("h*(u, v) ≠ 1".into()));
    }
    let l = l - u * inner(&l, v);
    let n = -&form(&u).wedge(&form(v)).wedge(&form(&l)).hodge();
    Ok(NullCoframe::from_unchecked(u, *v, l, covector_of(&n)))
}

/// Gauge action `(u, v - ½|w|² u + w, l - w(l) u, n - w(n) u)` for `w ⟂ u, v`.
pub fn gauge_act(w: &Covector, cf: &NullCoframe) -> Result<NullCoframe> {
    let (u, v, l, n) = (cf.u(), cf.v(), cf.l(), cf.n());
    let scale = 1.0 + w.amax();
    if inner(w, &u).abs() > DEFAULT_TOL * scale || inner(w, &v).abs() > DEFAULT_TOL * scale {
        return Err(Error::InvalidInput("w is not orthogonal to span(u, v)".into()));
    }
    let w2 = inner(w, w);
    Ok(NullCoframe::from_unchecked(
        u,
        v - u * (0.5 * w2) + w,
        l - u * inner(w, &l),
        n - u * inner(w, &n),
    ))
}

/// Gauge action by `w = a l + b n`, with screen coordinates taken in `cf`.
pub fn gauge_act_screen(a: f64, b: f64, cf: &NullCoframe) -> NullCoframe {
    let w = cf.l() * a + cf.n() * b;
    gauge_act(&w, cf).expect("screen vectors are orthogonal to u and v")
}

/// Metric `g = u ⊙ v + l ⊗ l + n ⊗ n` in the ambient basis.
pub fn metric_of(cf: &NullCoframe) -> Matrix4<f64> {
    let (u, v, l, n) = (cf.u(), cf.v(), cf.l(), cf.n());
    u * v.transpose() + v * u.transpose() + l * l.transpose() + n * n.transpose()
}

/// Stabilizer element in the basis `(u, v, l, n)`; column `j` is the pullback of the `j`-th covector.
pub fn stabilizer_matrix(c1: f64, c2: f64) -> Matrix4<f64> {
    Matrix4::new(
        1.0,
        -0.5 * (c1 * c1 + c2 * c2),
        -c1,
        -c2,
        0.0,
        1.0,
        0.0,
        0.0,
        0.0,
        c1,
        1.0,
        0.0,
        0.0,
        c2,
        0.0,
        1.0,
    )
}

/// Stabilizer element acting on covector components in the ambient basis.
pub fn stabilizer_element(c1: f64, c2: f64, cf: &NullCoframe) -> Matrix4<f64> {
    let f = cf.frame_matrix();
    let finv = f.try_inverse().expect("coframe is a basis");
    f * stabilizer_matrix(c1, c2) * finv
}

/// Induced action of a linear map on covectors on the exterior algebra.
pub fn act_on_form(t: &Matrix4<f64>, alpha: &Multivector) -> Multivector {
    let sp = alpha.space();
    let images: Vec<Multivector> = (0..4)
        .map(|i| Multivector::covector(sp, t.column(i).as_slice()))
        .collect();
    let mut out = Multivector::zero(sp);
    for (b, &c) in alpha.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut img = Multivector::scalar(sp, c);
        for (i, im) in images.iter().enumerate() {
            if b >> i & 1 == 1 {
                img = img.wedge(im);
            }
        }
        out += &img;
    }
    out
}

/// Contorsion data `ξ ⊕ τ ⊕ H` together with the stabilizer one-forms `κ, ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionData {
    pub xi: [f64; 4],
    /// `tau[a][k]` is `τ(e_a, e_b, e_c)` for the `k`-th pair `b < c`
    /// in the order 01, 02, 12, 03, 13, 23.
    pub tau: [[f64; 6]; 4],
    /// Components of `H` on `e^{012}, e^{013}, e^{023}, e^{123}`.
    pub h: [f64; 4],
    pub kappa: [f64; 4],
    pub rho: [f64; 4],
}

type Tensor3 = [[[f64; 4]; 4]; 4];

fn tau_to_full(tau: &[[f64; 6]; 4]) -> Tensor3 {
    let mut t = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for (k, &(b, c)) in PAIRS.iter().enumerate() {
            t[a][b][c] = tau[a][k];
            t[a][c][b] = -tau[a][k];
        }
    }
    t
}

fn tau_from_full(t: &Tensor3) -> [[f64; 6]; 4] {
    let mut tau = [[0.0; 6]; 4];
    for a in 0..4 {
        for (k, &(b, c)) in PAIRS.iter().enumerate() {
            tau[a][k] = 0.5 * (t[a][b][c] - t[a][c][b]);
        }
    }
    tau
}

/// Orthogonal projection of `T* ⊗ ∧²` onto the cyclic, trace-free summand.
pub fn project_tau(tau: &[[f64; 6]; 4]) -> [[f64; 6]; 4] {
    let mut t = tau_to_full(tau);
    let mut alt = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                alt[a][b][c] = (t[a][b][c] + t[b][c][a] + t[c][a][b]) / 3.0;
            }
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                t[a][b][c] -= alt[a][b][c];
            }
        }
    }
    let mut zeta = [0.0; 4];
    for (c, z) in zeta.iter_mut().enumerate() {
        *z = (0..4).map(|m| eta(m) * t[m][m][c]).sum::<f64>() / 3.0;
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let gab = if a == b { eta(a) } else { 0.0 };
                let gac = if a == c { eta(a) } else { 0.0 };
                t[a][b][c] -= gab * zeta[c] - gac * zeta[b];
            }
        }
    }
    tau_from_full(&t)
}

/// Basis of the sixteen-dimensional space of admissible `τ`.
pub fn tau_basis() -> Vec<[[f64; 6]; 4]> {
    let mut p = DMatrix::<f64>::zeros(24, 24);
    for j in 0..24 {
        let mut e = [[0.0; 6]; 4];
        e[j / 6][j % 6] = 1.0;
        let pe = project_tau(&e);
        for i in 0..24 {
            p[(i, j)] = pe[i / 6][i % 6];
        }
    }
    let svd = p.svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let mut out = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > 0.5 {
            let col = u.column(k);
            let mut t = [[0.0; 6]; 4];
            for i in 0..24 {
                t[i / 6][i % 6] = col[i];
            }
            out.push(t);
        }
    }
    out
}

impl TorsionData {
    pub fn zero() -> Self {
        Self {
            xi: [0.0; 4],
            tau: [[0.0; 6]; 4],
            h: [0.0; 4],
            kappa: [0.0; 4],
            rho: [0.0; 4],
        }
    }

    /// Builds torsion data, projecting `tau` onto the admissible summand.
    pub fn new(
        xi: Covector,
        tau: [[f64; 6]; 4],
        h: &Multivector,
        kappa: Covector,
        rho: Covector,
    ) -> Result<Self> {
        check_minkowski(h)?;
        let hc = h.grade_coeffs(3);
        let arr = |x: Covector| [x[0], x[1], x[2], x[3]];
        Ok(Self {
            xi: arr(xi),
            tau: project_tau(&tau),
            h: [hc[0], hc[1], hc[2], hc[3]],
            kappa: arr(kappa),
            rho: arr(rho),
        })
    }

    pub fn xi(&self) -> Covector {
        Covector::from_column_slice(&self.xi)
    }

    pub fn kappa(&self) -> Covector {
        Covector::from_column_slice(&self.kappa)
    }

    pub fn rho(&self) -> Covector {
        Covector::from_column_slice(&self.rho)
    }

    pub fn h_form(&self) -> Multivector {
        Multivector::from_grade(space(), 3, &self.h)
    }

    /// `τ(w_1, w_2, w_3)` on ambient basis vectors.
    pub fn tau_tensor(&self) -> Tensor3 {
        tau_to_full(&self.tau)
    }

    /// Largest cyclic-sum and trace violations of `τ`.
    pub fn tau_defects(&self) -> (f64, f64) {
        let t = self.tau_tensor();
        let mut cyc: f64 = 0.0;
        let mut tr: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    cyc = cyc.max((t[a][b][c] + t[c][a][b] + t[b][c][a]).abs());
                }
            }
            let s: f64 = (0..4).map(|m| eta(m) * t[m][m][a]).sum();
            tr = tr.max(s.abs());
        }
        (cyc, tr)
    }

    /// The two-form `τ_β = τ(β♯, ·, ·)`.
    pub fn tau_of(&self, beta: &Covector) -> Multivector {
        let x = sharp(beta);
        let mut comps = [0.0; 6];
        for a in 0..4 {
            for k in 0..6 {
                comps[k] += x[a] * self.tau[a][k];
            }
        }
        let mut m = Multivector::zero(space());
        for (k, &(b, c)) in PAIRS.iter().enumerate() {
            m.set((1 << b) | (1 << c), comps[k]);
        }
        m
    }

    /// The two-form `H_β = ι_{β♯} H`.
    pub fn h_of(&self, beta: &Covector) -> Multivector {
        interior_sharp(beta, &self.h_form())
    }
}

fn check_dcf(dcf: &[Multivector; 4]) -> Result<()> {
    for d in dcf {
        check_minkowski(d)?;
        for k in [0, 1, 3, 4] {
            if d.grade_max_abs(k) != 0.0 {
                return Err(Error::WrongGrade(2));
            }
        }
    }
    Ok(())
}

/// Right-hand sides of the torsion system for `(du, dv, dl, dn)`.
pub fn torsion_rhs(cf: &NullCoframe, td: &TorsionData) -> [Multivector; 4] {
    let xi = form(&td.xi());
    let kappa = form(&td.kappa());
    let rho = form(&td.rho());
    let c = cf.covectors();
    let f = cf.forms();
    let base = |i: usize| &(&td.h_of(&c[i]) + &xi.wedge(&f[i])) - &td.tau_of(&c[i]);
    [
        base(0),
        &(&base(1) - &kappa.wedge(&f[2])) - &rho.wedge(&f[3]),
        &base(2) + &kappa.wedge(&f[0]),
        &base(3) + &rho.wedge(&f[0]),
    ]
}

/// Norms of `du - (H_u + ξ∧u - τ_u)` and the companion residuals for `v`, `l`, `n`.
pub fn torsion_system_residual(
    cf: &NullCoframe,
    dcf: &[Multivector; 4],
    td: &TorsionData,
) -> Result<[f64; 4]> {
    check_dcf(dcf)?;
    let rhs = torsion_rhs(cf, td);
    Ok(std::array::from_fn(|i| dcf[i].dist(&rhs[i])))
}

/// Residuals of `du = ∗(α∧u)`, `dv = -κ∧l - ρ∧n + ∗(α∧v)`, `dl = κ∧u + ∗(α∧l)`, `dn = ρ∧u + ∗(α∧n)`.
pub fn skew_torsion_residual(
    cf: &NullCoframe,
    dcf: &[Multivector; 4],
    alpha: &Covector,
    kappa: &Covector,
    rho: &Covector,
) -> Result<[f64; 4]> {
    check_dcf(dcf)?;
    let a = form(alpha);
    let (k, r) = (form(kappa), form(rho));
    let f = cf.forms();
    let star = |i: usize| a.wedge(&f[i]).hodge();
    let rhs = [
        star(0),
        &(&star(1) - &k.wedge(&f[2])) - &r.wedge(&f[3]),
        &star(2) + &k.wedge(&f[0]),
        &star(3) + &r.wedge(&f[0]),
    ];
    Ok(std::array::from_fn(|i| dcf[i].dist(&rhs[i])))
}

/// Solves the torsion system for `ξ, τ, H` given `dcf`, `κ` and `ρ`.
pub fn torsion_from_differentials(
    cf: &NullCoframe,
    dcf: &[Multivector; 4],
    kappa: &Covector,
    rho: &Covector,
) -> Result<TorsionData> {
    check_dcf(dcf)?;
    let basis = tau_basis();
    let flatten = |forms: &[Multivector; 4]| {
        let mut v = DVector::zeros(24);
        for (i, f) in forms.iter().enumerate() {
            for (k, c) in f.grade_coeffs(2).into_iter().enumerate() {
                v[6 * i + k] = c;
            }
        }
        v
    };
    let mut data = TorsionData::zero();
    data.kappa = [kappa[0], kappa[1], kappa[2], kappa[3]];
    data.rho = [rho[0], rho[1], rho[2], rho[3]];
    let offset = flatten(&torsion_rhs(cf, &data));
    let rhs = flatten(dcf) - &offset;

    let mut unknowns = Vec::with_capacity(24);
    for i in 0..4 {
        let mut d = TorsionData::zero();
        d.xi[i] = 1.0;
        unknowns.push(d);
    }
    for t in &basis {
        let mut d = TorsionData::zero();
        d.tau = *t;
        unknowns.push(d);
    }
    for i in 0..4 {
        let mut d = TorsionData::zero();
        d.h[i] = 1.0;
        unknowns.push(d);
    }
    let mut m = DMatrix::zeros(24, unknowns.len());
    for (j, d) in unknowns.iter().enumerate() {
        m.set_column(j, &flatten(&torsion_rhs(cf, d)));
    }
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("torsion system is singular".into()))?;
    for (j, d) in unknowns.iter().enumerate() {
        for i in 0..4 {
            data.xi[i] += x[j] * d.xi[i];
            data.h[i] += x[j] * d.h[i];
            for k in 0..6 {
                data.tau[i][k] += x[j] * d.tau[i][k];
            }
        }
    }
    Ok(data)
}
