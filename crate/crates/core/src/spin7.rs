//! Self-dual four-forms on ℝ⁸: the Cayley form, the `Δ₂` product, the algebraic
//! Spin(7) criterion, the cubic potential `W` and a descent-based Spin(7) finder.
//!
//! Fast kernels work in the 35-dimensional orthonormal basis `(e^b + ∗e^b)/√2`
//! of `∧⁴₊`, indexed by the four-blades `b` that contain `e^1`. A non-identity
//! metric `h` is handled by moving to an orthonormal coframe first.
//!
//! Sign convention: `ΦΔ₂ω = −½ Σ h^{ai} h^{bj} (ι_a ι_b Φ) ∧ (ι_i ι_j ω)`, so that the
//! Cayley form below satisfies `Φ₀Δ₂Φ₀ = −12 Φ₀` and the geometric square reads
//! `Φ⋄Φ = |Φ|² + ΦΔ₂Φ + Φ∧Φ`.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::clifford_rep::{CliffordModule, Spinor};
use crate::error::{Error, Result};
use crate::kahler_atiyah::{grade, reorder_sign, Multivector, QuadraticSpace};

pub const DIM: usize = 8;
pub const N_SD: usize = 35;
pub const N_FOUR: usize = 70;

pub type Vec35 = SVector<f64, N_SD>;
pub type Mat35 = SMatrix<f64, N_SD, N_SD>;

fn sqrt14() -> f64 {
    14f64.sqrt()
}

fn space8() -> QuadraticSpace {
    QuadraticSpace::euclidean(DIM).expect("d = 8")
}

/// Oriented Euclidean ℝ⁸ with metric `h` on vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Euclidean8 {
    h: DMatrix<f64>,
    /// `Lᵀ` for `h = L Lᵀ`; rows express the orthonormal coframe in the given one.
    to_coframe: DMatrix<f64>,
    from_coframe: DMatrix<f64>,
    identity: bool,
}

impl Default for Euclidean8 {
    fn default() -> Self {
        Self::standard()
    }
}

impl Euclidean8 {
    pub fn standard() -> Self {
        let id = DMatrix::identity(DIM, DIM);
        Self {
            h: id.clone(),
            to_coframe: id.clone(),
            from_coframe: id,
            identity: true,
        }
    }

    pub fn new(h: DMatrix<f64>) -> Result<Self> {
        if h.shape() != (DIM, DIM) || (&h - h.transpose()).abs().max() > 1e-12 * h.abs().max() {
            return Err(Error::InvalidInput("metric must be a symmetric 8×8 matrix".into()));
        }
        let chol = Cholesky::<f64, Dyn>::new(h.clone())
            .ok_or_else(|| Error::InvalidInput("metric is not positive definite".into()))?;
        let lt = chol.l().transpose();
        let lt_inv = lt.clone().try_inverse().expect("triangular with positive diagonal");
        let identity = (&h - DMatrix::<f64>::identity(DIM, DIM)).abs().max() == 0.0;
        Ok(Self {
            h,
            to_coframe: lt,
            from_coframe: lt_inv,
            identity,
        })
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Components of a form in an `h`-orthonormal, positively oriented coframe.
    pub fn to_orthonormal(&self, phi: &Multivector) -> Multivector {
        if self.identity {
            phi.clone()
        } else {
            substitute(phi, &self.from_coframe)
        }
    }

    pub fn from_orthonormal(&self, phi: &Multivector) -> Multivector {
        if self.identity {
            phi.clone()
        } else {
            substitute(phi, &self.to_coframe)
        }
    }
}

/// Replaces each `v^i` by `Σ_a P[i][a] e^a` and expands.
pub fn substitute(phi: &Multivector, p: &DMatrix<f64>) -> Multivector {
    let sp = phi.space();
    let d = sp.dim();
    let covs: Vec<Multivector> = (0..d)
        .map(|i| Multivector::covector(sp, &p.row(i).iter().copied().collect::<Vec<_>>()))
        .collect();
    let mut out = Multivector::zero(sp);
    for (b, &c) in phi.coeffs().iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut acc = Multivector::scalar(sp, c);
        for (i, cov) in covs.iter().enumerate() {
            if b >> i & 1 == 1 {
                acc = acc.wedge(cov);
            }
        }
        out += &acc;
    }
    out
}

struct Tables {
    four: Vec<usize>,
    /// Pairs `(A, B)` with `|A ∩ B| = 2`: `Δ₂(e^A, e^B) = sign · e^{A △ B}`.
    delta_blades: Vec<Vec<(usize, f64, usize)>>,
    /// `∧⁴₊` basis: for each element, the two blade indices and their coefficients.
    sd_basis: Vec<[(usize, f64); 2]>,
    /// `T[c][(a, b)] = ⟨f_a Δ₂ f_b, f_c⟩`.
    cubic: Vec<Mat35>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let sp = space8();
        let four = sp.blades_of_grade(4);
        let mut four_index = vec![usize::MAX; sp.num_blades()];
        for (i, &b) in four.iter().enumerate() {
            four_index[b] = i;
        }
        let mut delta_blades = vec![Vec::new(); N_FOUR];
        for (ia, &a) in four.iter().enumerate() {
            for &b in &four {
                let common = a & b;
                if grade(common) != 2 {
                    continue;
                }
                let lo = common.trailing_zeros() as usize;
                let hi = (usize::BITS - 1 - common.leading_zeros()) as usize;
                let x = Multivector::blade(sp, a, 1.0).interior(hi).interior(lo);
                let y = Multivector::blade(sp, b, 1.0).interior(hi).interior(lo);
                let w = x.wedge(&y);
                let target = a ^ b;
                delta_blades[ia].push((four_index[b], -w.coeff(target), four_index[target]));
            }
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sd_basis: Vec<[(usize, f64); 2]> = four
            .iter()
            .filter(|&&b| b & 1 == 1)
            .map(|&b| {
                let c = sp.volume_blade() ^ b;
                [(four_index[b], r), (four_index[c], r * reorder_sign(b, c))]
            })
            .collect();
        let mut cubic = vec![Mat35::zeros(); N_SD];
        let embed = |x: &[(usize, f64); 2]| {
            let mut v = [0.0; N_FOUR];
            for &(i, c) in x {
                v[i] = c;
            }
            v
        };
        for a in 0..N_SD {
            for b in a..N_SD {
                let prod = delta_raw(&delta_blades, &embed(&sd_basis[a]), &embed(&sd_basis[b]));
                for (c, basis) in sd_basis.iter().enumerate() {
                    let val: f64 = basis.iter().map(|&(i, w)| w * prod[i]).sum();
                    cubic[c][(a, b)] = val;
                    cubic[c][(b, a)] = val;
                }
            }
        }
        Tables {
            four,
            delta_blades,
            sd_basis,
            cubic,
        }
    })
}

fn delta_raw(table: &[Vec<(usize, f64, usize)>], x: &[f64; N_FOUR], y: &[f64; N_FOUR]) -> [f64; N_FOUR] {
    let mut out = [0.0; N_FOUR];
    for (ia, row) in table.iter().enumerate() {
        if x[ia] == 0.0 {
            continue;
        }
        for &(ib, s, ic) in row {
            out[ic] += x[ia] * y[ib] * s;
        }
    }
    out
}

fn to_four(phi: &Multivector) -> [f64; N_FOUR] {
    let t = tables();
    let mut v = [0.0; N_FOUR];
    for (i, &b) in t.four.iter().enumerate() {
        v[i] = phi.coeff(b);
    }
    v
}

fn from_four(v: &[f64; N_FOUR]) -> Multivector {
    let t = tables();
    let mut m = Multivector::zero(space8());
    for (i, &b) in t.four.iter().enumerate() {
        m.set(b, v[i]);
    }
    m
}

/// Coordinates of the self-dual part of a four-form (orthonormal frame) in the 35-basis.
pub fn sd_coords(phi: &Multivector) -> Vec35 {
    let v = to_four(phi);
    let t = tables();
    Vec35::from_fn(|a, _| t.sd_basis[a].iter().map(|&(i, w)| w * v[i]).sum())
}

/// Four-form with the given 35-basis coordinates.
pub fn from_sd_coords(x: &Vec35) -> Multivector {
    let t = tables();
    let mut v = [0.0; N_FOUR];
    for (a, basis) in t.sd_basis.iter().enumerate() {
        for &(i, w) in basis {
            v[i] += w * x[a];
        }
    }
    from_four(&v)
}

/// Blade labels of the 35-basis, written as the four-blade containing `e^1`.
pub fn sd_basis_legend() -> Vec<String> {
    let t = tables();
    t.sd_basis
        .iter()
        .map(|basis| {
            let b = t.four[basis[0].0];
            let idx: Vec<String> = (0..DIM).filter(|i| b >> i & 1 == 1).map(|i| (i + 1).to_string()).collect();
            format!("e{}+*", idx.join(""))
        })
        .collect()
}

/// `Δ₂` in an orthonormal coframe, returned as a grade-4 multivector.
fn delta2_orthonormal(phi: &Multivector, omega: &Multivector) -> Multivector {
    from_four(&delta_raw(&tables().delta_blades, &to_four(phi), &to_four(omega)))
}

/// `ΦΔ₂ω = −½ Σ h^{ai} h^{bj} (ι_a ι_b Φ) ∧ (ι_i ι_j ω)`.
pub fn delta2(space: &Euclidean8, phi: &Multivector, omega: &Multivector) -> Result<Multivector> {
    check_four(phi)?;
    check_four(omega)?;
    Ok(space.from_orthonormal(&delta2_orthonormal(&space.to_orthonormal(phi), &space.to_orthonormal(omega))))
}

/// `Λ_Φ(ω) = 2 ΦΔ₂ω`.
pub fn lambda_op(space: &Euclidean8, phi: &Multivector, omega: &Multivector) -> Result<Multivector> {
    Ok(delta2(space, phi, omega)?.scale(2.0))
}

fn check_four(phi: &Multivector) -> Result<()> {
    let sp = phi.space();
    if sp.dim() != DIM || sp.q() != 0 || !phi.is_homogeneous(4) {
        return Err(Error::WrongGrade(4));
    }
    Ok(())
}

/// Self-dual four-form on an oriented Euclidean ℝ⁸.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfDual4Form {
    pub space: Euclidean8,
    pub phi: Multivector,
}

impl SelfDual4Form {
    /// Checks `∗_h φ = φ` to `tol` relative to `|φ|`.
    pub fn new(space: Euclidean8, phi: Multivector, tol: f64) -> Result<Self> {
        check_four(&phi)?;
        let frame = space.to_orthonormal(&phi);
        let defect = frame.hodge().dist(&frame);
        if defect > tol * frame.coeff_norm().max(1.0) {
            return Err(Error::InvalidInput(format!("form is not self-dual (defect {defect:.3e})")));
        }
        Ok(Self { space, phi })
    }

    /// Standard metric form from 35-basis coordinates.
    pub fn from_coords(x: &Vec35) -> Self {
        Self {
            space: Euclidean8::standard(),
            phi: from_sd_coords(x),
        }
    }

    /// 35-basis coordinates in an orthonormal coframe.
    pub fn coords(&self) -> Vec35 {
        sd_coords(&self.space.to_orthonormal(&self.phi))
    }

    pub fn with_coords(&self, x: &Vec35) -> Self {
        Self {
            space: self.space.clone(),
            phi: self.space.from_orthonormal(&from_sd_coords(x)),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords().norm()
    }
}

/// JSON layout of a form: coordinates in the 35-basis of `∧⁴₊` with its legend,
/// and an optional metric (identity when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormRecord {
    pub basis: Vec<String>,
    pub coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<f64>>>,
}

impl FormRecord {
    pub fn from_form(form: &SelfDual4Form) -> Self {
        let id = DMatrix::<f64>::identity(DIM, DIM);
        let h = form.space.metric();
        Self {
            basis: sd_basis_legend(),
            coords: form.coords().iter().copied().collect(),
            metric: (h != &id).then(|| (0..DIM).map(|i| h.row(i).iter().copied().collect()).collect()),
        }
    }

    /// Coordinates are taken in the orthonormal coframe of the metric.
    pub fn to_form(&self) -> Result<SelfDual4Form> {
        if self.coords.len() != N_SD {
            return Err(Error::InvalidInput(format!("expected {N_SD} coordinates, got {}", self.coords.len())));
        }
        if !self.basis.is_empty() && self.basis != sd_basis_legend() {
            return Err(Error::InvalidInput("basis legend does not match the 35-basis".into()));
        }
        let x = Vec35::from_iterator(self.coords.iter().copied());
        let space = match &self.metric {
            None => Euclidean8::standard(),
            Some(rows) => {
                if rows.len() != DIM || rows.iter().any(|r| r.len() != DIM) {
                    return Err(Error::InvalidInput("metric must be 8×8".into()));
                }
                Euclidean8::new(DMatrix::from_fn(DIM, DIM, |i, j| rows[i][j]))?
            }
        };
        Ok(SelfDual4Form {
            phi: space.from_orthonormal(&from_sd_coords(&x)),
            space,
        })
    }
}

/// The canonical Cayley form.
pub fn cayley_form() -> SelfDual4Form {
    const TERMS: [(i8, [usize; 4]); 14] = [
        (1, [1, 2, 3, 4]),
        (1, [1, 2, 5, 6]),
        (1, [1, 2, 7, 8]),
        (1, [1, 3, 5, 7]),
        (-1, [1, 3, 6, 8]),
        (-1, [1, 4, 5, 8]),
        (-1, [1, 4, 6, 7]),
        (1, [5, 6, 7, 8]),
        (1, [3, 4, 7, 8]),
        (1, [3, 4, 5, 6]),
        (1, [2, 4, 6, 8]),
        (-1, [2, 4, 5, 7]),
        (-1, [2, 3, 5, 8]),
        (-1, [2, 3, 6, 7]),
    ];
    let mut phi = Multivector::zero(space8());
    for (s, idx) in TERMS {
        let bits = idx.iter().fold(0usize, |acc, i| acc | 1 << (i - 1));
        phi.set(bits, f64::from(s));
    }
    SelfDual4Form {
        space: Euclidean8::standard(),
        phi,
    }
}

/// `⟨f_a Δ₂ f_b, x⟩` as a 35×35 matrix.
fn contract_cubic(x: &Vec35) -> Mat35 {
    let t = tables();
    let mut m = Mat35::zeros();
    for (c, tc) in t.cubic.iter().enumerate() {
        if x[c] != 0.0 {
            m += tc * x[c];
        }
    }
    m
}

/// `ΦΔ₂Φ` projected onto `∧⁴₊`, in 35-coordinates.
fn cubic_grad(x: &Vec35) -> Vec35 {
    let t = tables();
    Vec35::from_fn(|c, _| x.dot(&(t.cubic[c] * x)))
}

/// `√14 ΦΔ₂Φ + 12|Φ|Φ` in 35-coordinates.
pub fn grad_coords(x: &Vec35) -> Vec35 {
    cubic_grad(x) * sqrt14() + x * (12.0 * x.norm())
}

/// Euclidean Hessian of `W` in 35-coordinates.
pub fn hess_coords(x: &Vec35) -> Mat35 {
    let n = x.norm();
    let mut h = contract_cubic(x) * (2.0 * sqrt14()) + Mat35::identity() * (12.0 * n);
    if n > 0.0 {
        h += x * x.transpose() * (12.0 / n);
    }
    h
}

pub fn potential_coords(x: &Vec35) -> f64 {
    sqrt14() / 3.0 * x.dot(&cubic_grad(x)) + 4.0 * x.norm().powi(3)
}

/// `W_h(Φ) = (√14/3)⟨ΦΔ₂Φ, Φ⟩ + 4|Φ|³`.
pub fn potential_w(phi: &SelfDual4Form) -> f64 {
    potential_coords(&phi.coords())
}

/// The same potential through the geometric product: `(√14/3)⟨Φ⋄Φ, Φ⟩ + 4|Φ|³`.
pub fn potential_w_clifford(phi: &SelfDual4Form) -> f64 {
    let f = phi.space.to_orthonormal(&phi.phi);
    let sq = f.gp(&f);
    sqrt14() / 3.0 * sq.det_inner(&f) + 4.0 * f.det_inner(&f).powf(1.5)
}

/// Gradient of `W` on `∧⁴₊`, i.e. the self-dual part of `√14 ΦΔ₂Φ + 12|Φ|Φ`.
pub fn grad_w(phi: &SelfDual4Form) -> SelfDual4Form {
    phi.with_coords(&grad_coords(&phi.coords()))
}

/// Second differential of `W` at `Φ` evaluated on `(q1, q2)`.
pub fn hess_w(phi: &SelfDual4Form, q1: &SelfDual4Form, q2: &SelfDual4Form) -> Result<f64> {
    let x = phi.coords();
    if x.norm() == 0.0 {
        return Err(Error::Degenerate("Hessian at Φ = 0".into()));
    }
    Ok(q1.coords().dot(&(hess_coords(&x) * q2.coords())))
}

/// Hessian matrix of `W` in the 35-basis.
pub fn hess_matrix(phi: &SelfDual4Form) -> Result<Mat35> {
    let x = phi.coords();
    if x.norm() == 0.0 {
        return Err(Error::Degenerate("Hessian at Φ = 0".into()));
    }
    Ok(hess_coords(&x))
}

/// Outcome of the algebraic conformal Spin(7) test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spin7Certificate {
    pub residual: f64,
    pub selfdual_defect: f64,
    pub norm: f64,
    pub conformal_constant: f64,
    pub is_conformal: bool,
    pub is_metric: bool,
}

/// Evaluates `√14 ΦΔ₂Φ + 12|Φ|Φ = 0` and `∗Φ = Φ` with respect to `h`.
pub fn is_conformal_spin7(space: &Euclidean8, phi: &Multivector, tol: f64) -> Result<Spin7Certificate> {
    check_four(phi)?;
    let f = space.to_orthonormal(phi);
    let norm = f.coeff_norm();
    if norm == 0.0 {
        return Err(Error::Degenerate("Φ = 0 solves the criterion trivially".into()));
    }
    let lhs = &delta2_orthonormal(&f, &f).scale(sqrt14()) + &f.scale(12.0 * norm);
    let residual = lhs.coeff_norm();
    let selfdual_defect = f.hodge().dist(&f);
    let is_conformal = residual <= tol * norm.max(1.0).powi(2) && selfdual_defect <= tol * norm.max(1.0);
    let is_metric = is_conformal && (norm - sqrt14()).abs() <= tol * sqrt14();
    Ok(Spin7Certificate {
        residual,
        selfdual_defect,
        norm,
        conformal_constant: 14f64.powf(-0.25) * norm.sqrt(),
        is_conformal,
        is_metric,
    })
}

/// Orthogonal projectors on `∧⁴` (70×70, blade order of `grade 4`) onto the
/// `Λ_Φ` eigenspaces of dimensions 1, 7, 27 and the anti-self-dual 35.
#[derive(Clone, Debug)]
pub struct EigenspaceSplit {
    pub p1: DMatrix<f64>,
    pub p7: DMatrix<f64>,
    pub p27: DMatrix<f64>,
    pub p35: DMatrix<f64>,
    /// Eigenvalues of `ω ↦ ΦΔ₂ω` on `∧⁴₊`, sorted ascending.
    pub eigenvalues: Vec<f64>,
}

impl EigenspaceSplit {
    pub fn ranks(&self) -> [usize; 4] {
        let r = |m: &DMatrix<f64>| m.trace().round() as usize;
        [r(&self.p1), r(&self.p7), r(&self.p27), r(&self.p35)]
    }
}

/// The `Δ₂`-operator `ω ↦ ΦΔ₂ω` on `∧⁴₊` as a symmetric 35×35 matrix.
pub fn delta2_operator(phi: &SelfDual4Form) -> Mat35 {
    contract_cubic(&phi.coords())
}

/// 70×35 embedding of the 35-basis into blade coordinates.
pub fn sd_embedding() -> DMatrix<f64> {
    let t = tables();
    let mut f = DMatrix::zeros(N_FOUR, N_SD);
    for (a, basis) in t.sd_basis.iter().enumerate() {
        for &(i, w) in basis {
            f[(i, a)] = w;
        }
    }
    f
}

/// Splits `∧⁴` under the stabilizer of a certified conformal Spin(7) form.
pub fn eigenspace_split(phi: &SelfDual4Form, tol: f64) -> Result<EigenspaceSplit> {
    let cert = is_conformal_spin7(&phi.space, &phi.phi, tol)?;
    if !cert.is_conformal {
        return Err(Error::InvalidInput(format!(
            "form is not conformal Spin(7) (residual {:.3e})",
            cert.residual
        )));
    }
    let scale = cert.norm / sqrt14();
    let eig = delta2_operator(phi).symmetric_eigen();
    let f = sd_embedding();
    let mut blocks = [
        DMatrix::<f64>::zeros(N_FOUR, N_FOUR),
        DMatrix::zeros(N_FOUR, N_FOUR),
        DMatrix::zeros(N_FOUR, N_FOUR),
    ];
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let slot = [-12.0, -6.0, 2.0]
            .iter()
            .map(|c| (lam - c * scale).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .expect("three targets");
        let v = &f * DVector::from_iterator(N_SD, eig.eigenvectors.column(k).iter().copied());
        blocks[slot] += &v * v.transpose();
    }
    let p35 = DMatrix::identity(N_FOUR, N_FOUR) - &f * f.transpose();
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let [p1, p7, p27] = blocks;
    Ok(EigenspaceSplit {
        p1,
        p7,
        p27,
        p35,
        eigenvalues,
    })
}

/// Fully antisymmetric component array `Φ_{ijkl}` of a four-form.
pub fn four_tensor(phi: &Multivector) -> Vec<f64> {
    let mut t = vec![0.0; DIM.pow(4)];
    for &b in &tables().four {
        let c = phi.coeff(b);
        if c == 0.0 {
            continue;
        }
        let idx: Vec<usize> = (0..DIM).filter(|i| b >> i & 1 == 1).collect();
        for perm in PERMS4.iter() {
            let sign = perm_sign(perm);
            let [i, j, k, l] = perm.map(|p| idx[p]);
            t[((i * DIM + j) * DIM + k) * DIM + l] = sign * c;
        }
    }
    t
}

const PERMS4: [[usize; 4]; 24] = {
    let mut out = [[0; 4]; 24];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                if a != b && a != c && b != c {
                    out[n] = [a, b, c, 6 - a - b - c];
                    n += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

fn perm_sign(p: &[usize; 4]) -> f64 {
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Raises the four slots of `t` with the given symmetric matrices.
fn raise(t: &[f64], mats: [&DMatrix<f64>; 4]) -> Vec<f64> {
    let mut cur = t.to_vec();
    for (slot, m) in mats.iter().enumerate() {
        let stride = DIM.pow(3 - slot as u32);
        let mut next = vec![0.0; cur.len()];
        for (pos, val) in next.iter_mut().enumerate() {
            let digit = pos / stride % DIM;
            let base = pos - digit * stride;
            *val = (0..DIM).map(|a| m[(digit, a)] * cur[base + a * stride]).sum();
        }
        cur = next;
    }
    cur
}

/// Reshapes an `8⁴` array into a 64×64 matrix over index pairs.
fn pair_matrix(t: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(DIM * DIM, DIM * DIM, t)
}

/// `−(1/8) Φ_{ijmn} ω^{mn}_{kl} v^i∧v^j∧v^k∧v^l` in the given basis.
pub fn delta2_index(h: &DMatrix<f64>, phi: &Multivector, omega: &Multivector) -> Result<Multivector> {
    check_four(phi)?;
    check_four(omega)?;
    let hinv = h.clone().try_inverse().ok_or(Error::InvalidInput("singular metric".into()))?;
    let id = DMatrix::identity(DIM, DIM);
    let p = pair_matrix(&four_tensor(phi));
    let q = pair_matrix(&raise(&four_tensor(omega), [&hinv, &hinv, &id, &id]));
    let t = p * q / -8.0;
    let mut out = Multivector::zero(phi.space());
    for &b in &tables().four {
        let idx: Vec<usize> = (0..DIM).filter(|i| b >> i & 1 == 1).collect();
        let mut c = 0.0;
        for perm in PERMS4.iter() {
            let [i, j, k, l] = perm.map(|x| idx[x]);
            c += perm_sign(perm) * t[(i * DIM + j, k * DIM + l)];
        }
        out.set(b, c);
    }
    Ok(out)
}

/// `W(h, Φ) = −(√14/24) Φ_{ijkl} Φ^{ij}_{mn} Φ^{mnkl} + 4 (Φ_{ijkl}Φ^{ijkl}/24)^{3/2}`
/// for an arbitrary four-form.
pub fn metric_potential(h: &DMatrix<f64>, phi: &Multivector) -> Result<f64> {
    check_four(phi)?;
    let hinv = h.clone().try_inverse().ok_or(Error::InvalidInput("singular metric".into()))?;
    let id = DMatrix::identity(DIM, DIM);
    let t = four_tensor(phi);
    let lower = pair_matrix(&t);
    let half = pair_matrix(&raise(&t, [&hinv, &hinv, &id, &id]));
    let full = pair_matrix(&raise(&t, [&hinv, &hinv, &hinv, &hinv]));
    let cubic = (lower.transpose() * half).component_mul(&full).sum();
    let quad = lower.component_mul(&full).sum() / 24.0;
    Ok(-sqrt14() / 24.0 * cubic + 4.0 * quad.max(0.0).powf(1.5))
}

/// `(d_{(h,Φ)} W)(k, 0)` from the explicit index expansion.
pub fn metric_differential(h: &DMatrix<f64>, phi: &Multivector, k: &DMatrix<f64>) -> Result<f64> {
    check_four(phi)?;
    let hinv = h.clone().try_inverse().ok_or(Error::InvalidInput("singular metric".into()))?;
    let kup = &hinv * k * &hinv;
    let t = four_tensor(phi);
    let lower = pair_matrix(&t);
    let full = pair_matrix(&raise(&t, [&hinv, &hinv, &hinv, &hinv]));
    let mixed = pair_matrix(&raise(&t, [&kup, &hinv, &hinv, &hinv]));
    let first = pair_matrix(&raise(&t, [&kup, &hinv, &DMatrix::identity(DIM, DIM), &DMatrix::identity(DIM, DIM)]));
    // Φ_{i1i2i3i4} Φ^{i3i4k3k4} Φ_{k1k2k3k4} k^{i1k1} h^{i2k2}
    let cubic = (&lower * &full).component_mul(&first).sum();
    let norm = (lower.component_mul(&full).sum() / 24.0).max(0.0).sqrt();
    let quad = lower.component_mul(&mixed).sum();
    Ok(sqrt14() / 4.0 * cubic - norm * quad)
}

/// Five-point central difference of [`metric_potential`] along `h + εk`, halving `ε`
/// while `h ± 2εk` leaves the positive cone.
pub fn metric_differential_fd(h: &DMatrix<f64>, phi: &Multivector, k: &DMatrix<f64>, eps: f64) -> Result<f64> {
    let mut e = eps;
    for _ in 0..40 {
        let at = |s: f64| h + k * (s * e);
        if Cholesky::new(at(2.0)).is_some() && Cholesky::new(at(-2.0)).is_some() {
            let w = |s: f64| metric_potential(&at(s), phi);
            return Ok((w(-2.0)? - 8.0 * w(-1.0)? + 8.0 * w(1.0)? - w(2.0)?) / (12.0 * e));
        }
        e *= 0.5;
    }
    Err(Error::Degenerate("no admissible difference step".into()))
}

/// Four-form `Φ = −Σ ℬ(γ_A ξ, ξ) e^A` of a chiral spinor on Euclidean ℝ⁸, so that the
/// positive square of `ξ` is `(|Φ|/√14 − Φ + μ|Φ|ν/√14)/16`.
pub fn spin7_from_spinor(module: &CliffordModule, xi: &Spinor) -> Result<SelfDual4Form> {
    if module.space() != space8() {
        return Err(Error::MismatchedSpaces);
    }
    if xi.amax() == 0.0 {
        return Err(Error::Degenerate("zero spinor".into()));
    }
    if module.chirality(xi, 1e-10)?.is_none() {
        return Err(Error::NotChiral);
    }
    let mut phi = Multivector::zero(space8());
    for &b in &tables().four {
        let g = module.blade_matrix(b) * xi;
        phi.set(b, -module.pair(&g, xi));
    }
    Ok(SelfDual4Form {
        space: Euclidean8::standard(),
        phi,
    })
}

/// Settings for [`find_spin7`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinderConfig {
    /// Stop once `‖grad W‖ ≤ tol · max(1, |Φ|³)`.
    pub tol: f64,
    pub max_iterations: usize,
    pub armijo: f64,
    pub shrink: f64,
    /// Restart from the renormalized iterate once `|Φ|` falls below this
    /// fraction of the seed norm.
    pub norm_floor: f64,
}

impl Default for FinderConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: 100_000,
            armijo: 1e-4,
            shrink: 0.5,
            norm_floor: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FinderOutcome {
    pub form: SelfDual4Form,
    pub certificate: Spin7Certificate,
    pub iterations: usize,
    pub restarts: usize,
}

/// Steepest descent with Armijo backtracking on `R(Φ) = ‖grad W(Φ)‖²` in `∧⁴₊`.
pub fn find_spin7(seed: &SelfDual4Form, cfg: &FinderConfig) -> Result<FinderOutcome> {
    find_spin7_logged(seed, cfg, &mut Vec::new())
}

/// One accepted descent step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub grad_norm: f64,
    pub form_norm: f64,
    pub step: f64,
    pub restarts: usize,
}

/// [`find_spin7`] that appends every accepted step to `log`, including on failure.
pub fn find_spin7_logged(seed: &SelfDual4Form, cfg: &FinderConfig, log: &mut Vec<IterationRecord>) -> Result<FinderOutcome> {
    let mut x = seed.coords();
    let seed_norm = x.norm();
    if seed_norm == 0.0 {
        return Err(Error::Degenerate("zero seed".into()));
    }
    let objective = |x: &Vec35| grad_coords(x).norm_squared();
    let mut step = 1.0 / (seed_norm * seed_norm);
    let mut restarts = 0;
    let mut iterations = 0;
    loop {
        let g = grad_coords(&x);
        let n = x.norm();
        if g.norm() <= cfg.tol * n.powi(3).max(1.0) {
            break;
        }
        if iterations >= cfg.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                residual: g.norm(),
            });
        }
        iterations += 1;
        let r = g.norm_squared();
        let hess = hess_coords(&x);
        let dir = hess * g * 2.0;
        let slope = dir.norm_squared();
        // first trial: minimizer of the linearized residual |g - t H dir|² along dir
        let hd = hess * dir;
        let model = g.dot(&hd) / hd.norm_squared();
        let mut t = if model.is_finite() && model > 0.0 { model } else { step * 2.0 };
        let mut next = x - dir * t;
        while objective(&next) > r - cfg.armijo * t * slope {
            t *= cfg.shrink;
            if t < 1e-300 {
                return Err(Error::NonConvergence {
                    iterations,
                    residual: g.norm(),
                });
            }
            next = x - dir * t;
        }
        step = t;
        x = next;
        if x.norm() < cfg.norm_floor * seed_norm {
            x *= seed_norm / x.norm();
            step = 1.0 / (seed_norm * seed_norm);
            restarts += 1;
        }
        log.push(IterationRecord {
            iteration: iterations,
            grad_norm: grad_coords(&x).norm(),
            form_norm: x.norm(),
            step: t,
            restarts,
        });
    }
    let form = if iterations == 0 { seed.clone() } else { seed.with_coords(&x) };
    let certificate = is_conformal_spin7(&form.space, &form.phi, cfg.tol.max(1e-12) * 10.0)?;
    Ok(FinderOutcome {
        form,
        certificate,
        iterations,
        restarts,
    })
}

/// Action of an orthogonal map on a form: `v^i ↦ Σ_a R_{ia} e^a`.
pub fn rotate(phi: &SelfDual4Form, r: &DMatrix<f64>) -> SelfDual4Form {
    SelfDual4Form {
        space: phi.space.clone(),
        phi: substitute(&phi.phi, r),
    }
}
