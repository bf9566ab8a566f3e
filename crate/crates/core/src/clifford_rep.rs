//! Irreducible real Clifford modules, admissible pairings and spinor squares.
//!
//! Gamma matrices satisfy `γ_i γ_j + γ_j γ_i = 2 η_ij Id`. Quantization sends the
//! blade `e^{i_1} ∧ … ∧ e^{i_k}` (increasing indices) to `γ_{i_1} ⋯ γ_{i_k}`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kahler_atiyah::{blade_product, grade, reorder_sign, Multivector, QuadraticSpace};

pub type Spinor = DVector<f64>;
pub type Endomorphism = DMatrix<f64>;

/// Relative singular-value threshold below which an endomorphism counts as rank one.
pub const RANK_TOL: f64 = 1e-8;

/// Irreducible real Clifford module with a chosen admissible pairing.
#[derive(Clone, Debug)]
pub struct CliffordModule {
    space: QuadraticSpace,
    n: usize,
    gammas: Vec<DMatrix<f64>>,
    blades: Vec<DMatrix<f64>>,
    pairing: DMatrix<f64>,
    pairing_inv: DMatrix<f64>,
    sigma: i8,
    s: i8,
}

/// Row-major dump of a module for cross-implementation diffing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleDump {
    pub signature: [usize; 2],
    pub eta: Vec<i8>,
    pub n: usize,
    pub gammas: Vec<Vec<f64>>,
    pub pairing: Vec<f64>,
    pub sigma: i8,
    pub s: i8,
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn mat2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

fn product(mats: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    mats.iter()
        .fold(DMatrix::identity(n, n), |acc, m| acc * m)
}

/// Generators `a_i ⊗ Id` followed by `ω_A ⊗ b_j`.
fn tensor(a: &[DMatrix<f64>], b: &[DMatrix<f64>], nb: usize) -> Vec<DMatrix<f64>> {
    let na = a[0].nrows();
    let omega = product(a, na);
    let id_b = DMatrix::identity(nb, nb);
    let mut out: Vec<DMatrix<f64>> = a.iter().map(|g| kron(g, &id_b)).collect();
    out.extend(b.iter().map(|g| kron(&omega, g)));
    out
}

/// Multiplication table of the octonions via Cayley–Dickson doubling.
fn cayley_dickson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &t)| if i == 0 { t } else { -t })
            .collect()
    };
    let ac = cayley_dickson(a, c);
    let dbar_b = cayley_dickson(&conj(d), b);
    let da = cayley_dickson(d, a);
    let b_cbar = cayley_dickson(b, &conj(c));
    let mut out: Vec<f64> = ac.iter().zip(&dbar_b).map(|(p, q)| p - q).collect();
    out.extend(da.iter().zip(&b_cbar).map(|(p, q)| p + q));
    out
}

/// Left multiplication by the imaginary octonion units `e_1..e_7`.
fn octonion_left_mults() -> Vec<DMatrix<f64>> {
    let unit = |i: usize| {
        let mut v = vec![0.0; 8];
        v[i] = 1.0;
        v
    };
    (1..8)
        .map(|i| {
            let mut m = DMatrix::zeros(8, 8);
            for j in 0..8 {
                let col = cayley_dickson(&unit(i), &unit(j));
                for k in 0..8 {
                    m[(k, j)] = col[k];
                }
            }
            m
        })
        .collect()
}

/// Euclidean eight-dimensional generators from octonion left multiplication.
fn euclidean8() -> Vec<DMatrix<f64>> {
    let id = DMatrix::<f64>::identity(8, 8);
    let block = |upper: &DMatrix<f64>, lower: &DMatrix<f64>| {
        let mut g = DMatrix::zeros(16, 16);
        g.view_mut((0, 8), (8, 8)).copy_from(upper);
        g.view_mut((8, 0), (8, 8)).copy_from(lower);
        g
    };
    let mut out: Vec<DMatrix<f64>> = octonion_left_mults()
        .iter()
        .map(|a| block(a, &a.transpose()))
        .collect();
    out.push(block(&id, &id));
    out
}

/// Generators for signature `(p, q)`, positive squares first.
fn sorted_generators(p: usize, q: usize, memo: &mut HashMap<(usize, usize), Option<Vec<DMatrix<f64>>>>) -> Option<Vec<DMatrix<f64>>> {
    if let Some(hit) = memo.get(&(p, q)) {
        return hit.clone();
    }
    let built = match (p, q) {
        (0, 0) => Some(Vec::new()),
        (1, 1) => Some(vec![mat2(0.0, 1.0, 1.0, 0.0), mat2(0.0, 1.0, -1.0, 0.0)]),
        (2, 0) => Some(vec![mat2(0.0, 1.0, 1.0, 0.0), mat2(1.0, 0.0, 0.0, -1.0)]),
        (8, 0) => Some(euclidean8()),
        (0, 8) => {
            // ω² = 1 in (8,0), so γ_i ω squares to −1 and the set still anticommutes.
            let g = euclidean8();
            let omega = product(&g, 16);
            Some(g.iter().map(|x| x * &omega).collect())
        }
        _ => {
            let mut found = None;
            if p >= 1 && q >= 1 {
                if let Some(b) = sorted_generators(p - 1, q - 1, memo) {
                    let a = sorted_generators(1, 1, memo).expect("base case");
                    let nb = b.first().map_or(1, |m| m.nrows());
                    found = Some(tensor(&a, &b, nb));
                }
            }
            if found.is_none() && p >= 2 {
                if let Some(b) = sorted_generators(q, p - 2, memo) {
                    let a = sorted_generators(2, 0, memo).expect("base case");
                    let nb = b.first().map_or(1, |m| m.nrows());
                    found = Some(tensor(&a, &b, nb));
                }
            }
            found
        }
    };
    let built = built.map(|gens| {
        let n = gens.first().map_or(1, |m| m.nrows());
        let id = DMatrix::<f64>::identity(n, n);
        let (pos, neg): (Vec<_>, Vec<_>) = gens
            .into_iter()
            .partition(|g| (g * g - &id).abs().max() < 1e-12);
        pos.into_iter().chain(neg).collect()
    });
    memo.insert((p, q), built.clone());
    built
}

/// Gamma matrices for the space, ordered to match its metric entries.
pub fn build_gammas(space: &QuadraticSpace) -> Result<Vec<DMatrix<f64>>> {
    let (p, q) = (space.p(), space.q());
    let unsupported = Error::UnsupportedSignature { p, q };
    if !space.has_real_module() {
        return Err(unsupported);
    }
    let sorted = sorted_generators(p, q, &mut HashMap::new()).ok_or(unsupported)?;
    let (mut pos, mut neg) = (sorted[..p].iter(), sorted[p..].iter());
    let gammas: Vec<DMatrix<f64>> = (0..space.dim())
        .map(|i| {
            if space.eta(i) > 0.0 {
                pos.next().expect("positive generator").clone()
            } else {
                neg.next().expect("negative generator").clone()
            }
        })
        .collect();
    let n = gammas[0].nrows();
    if n != 1 << (space.dim() / 2) {
        return Err(Error::UnsupportedSignature { p, q });
    }
    let worst = clifford_relation_defect(space, &gammas);
    if worst > 1e-12 {
        return Err(Error::UnsupportedSignature { p, q });
    }
    Ok(gammas)
}

/// Largest entry of `γ_i γ_j + γ_j γ_i − 2 η_ij Id` over all pairs.
pub fn clifford_relation_defect(space: &QuadraticSpace, gammas: &[DMatrix<f64>]) -> f64 {
    let n = gammas[0].nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut worst: f64 = 0.0;
    for i in 0..gammas.len() {
        for j in 0..gammas.len() {
            let mut ac = &gammas[i] * &gammas[j] + &gammas[j] * &gammas[i];
            if i == j {
                ac -= &id * (2.0 * space.eta(i));
            }
            worst = worst.max(ac.abs().max());
        }
    }
    worst
}

/// Expected symmetry type of the pairing with adjoint type `sigma` in dimension `d`.
pub fn expected_symmetry(d: usize, sigma: i8) -> i8 {
    match ((d / 2) % 4, sigma > 0) {
        (0, _) => 1,
        (1, true) => 1,
        (1, false) => -1,
        (2, _) => -1,
        (3, true) => -1,
        (3, false) => 1,
        _ => unreachable!(),
    }
}

/// Sign factor of `(π^{(1−σ)/2} ∘ τ)` on degree `k`.
pub fn adjoint_transport_sign(k: usize, sigma: i8) -> f64 {
    let pi = if sigma < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
    pi * crate::kahler_atiyah::reversion_sign(k)
}

/// Degrees forced to vanish in every square for the given adjoint and symmetry types.
pub fn vanishing_grades(d: usize, sigma: i8, s: i8) -> Vec<usize> {
    (0..=d)
        .filter(|&k| adjoint_transport_sign(k, sigma) == -(s as f64))
        .collect()
}

/// `(π^{(1−σ)/2} ∘ τ)(α)`.
pub fn adjoint_transport(a: &Multivector, sigma: i8) -> Multivector {
    if sigma > 0 {
        a.tau()
    } else {
        a.tau().pi()
    }
}

impl CliffordModule {
    /// Module with the pairing of adjoint type `sigma`.
    pub fn new(space: QuadraticSpace, sigma: i8) -> Result<Self> {
        let gammas = build_gammas(&space)?;
        let n = gammas[0].nrows();
        let mut blades = Vec::with_capacity(space.num_blades());
        for b in 0..space.num_blades() {
            let mut m = DMatrix::<f64>::identity(n, n);
            for (i, g) in gammas.iter().enumerate() {
                if b >> i & 1 == 1 {
                    m *= g;
                }
            }
            blades.push(m);
        }
        let mut module = Self {
            space,
            n,
            gammas,
            blades,
            pairing: DMatrix::identity(n, n),
            pairing_inv: DMatrix::identity(n, n),
            sigma: 1,
            s: 1,
        };
        let (b, s) = module.build_pairing(sigma)?;
        module.pairing_inv = b.clone().try_inverse().ok_or(Error::DegeneratePairing)?;
        module.pairing = b;
        module.sigma = if sigma > 0 { 1 } else { -1 };
        module.s = s;
        Ok(module)
    }

    /// Module with the conventional pairing: negative adjoint type in signature
    /// (3,1), positive otherwise.
    pub fn standard(space: QuadraticSpace) -> Result<Self> {
        let sigma = if (space.p(), space.q()) == (3, 1) { -1 } else { 1 };
        Self::new(space, sigma)
    }

    /// Averaged invariant inner product twisted by a partial volume element.
    ///
    /// Returns the pairing normalized to `max |B_ij| = 1` and its symmetry type.
    pub fn build_pairing(&self, sigma: i8) -> Result<(DMatrix<f64>, i8)> {
        let n = self.n;
        let mut avg = DMatrix::<f64>::zeros(n, n);
        for g in &self.blades {
            avg += g.transpose() * g;
        }
        let (pos, neg) = self.partial_volumes();
        let p_odd = self.space.p() % 2 == 1;
        let twist = match (p_odd, sigma > 0) {
            (true, true) | (false, false) => pos,
            _ => neg,
        };
        let twist_mat = self.quantize(&twist);
        let mut b = twist_mat.transpose() * avg;
        let scale = b.abs().max();
        if scale == 0.0 || b.clone().try_inverse().is_none() {
            return Err(Error::DegeneratePairing);
        }
        b /= scale;
        let sym = (b.transpose() - &b).abs().max();
        let skew = (b.transpose() + &b).abs().max();
        let s = if sym < 1e-12 {
            1
        } else if skew < 1e-12 {
            -1
        } else {
            return Err(Error::DegeneratePairing);
        };
        Ok((b, s))
    }

    /// `(ν_+, ν_−)`: products of the positive and of the negative generators,
    /// signed so that `ν_+ ∧ ν_− = ν`.
    pub fn partial_volumes(&self) -> (Multivector, Multivector) {
        let sp = self.space;
        let mut pmask = 0usize;
        for i in 0..sp.dim() {
            if sp.eta(i) > 0.0 {
                pmask |= 1 << i;
            }
        }
        let mmask = sp.volume_blade() ^ pmask;
        (
            Multivector::blade(sp, pmask, reorder_sign(pmask, mmask)),
            Multivector::blade(sp, mmask, 1.0),
        )
    }

    pub fn space(&self) -> QuadraticSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gammas(&self) -> &[DMatrix<f64>] {
        &self.gammas
    }

    pub fn pairing(&self) -> &DMatrix<f64> {
        &self.pairing
    }

    pub fn sigma(&self) -> i8 {
        self.sigma
    }

    pub fn symmetry(&self) -> i8 {
        self.s
    }

    /// `Γ(ν)`, the action of the volume form.
    pub fn volume_action(&self) -> &DMatrix<f64> {
        &self.blades[self.space.volume_blade()]
    }

    /// Matrix of the quantized basis blade.
    pub fn blade_matrix(&self, bits: usize) -> &DMatrix<f64> {
        &self.blades[bits]
    }

    /// `ℬ(x, y) = xᵀ B y`.
    pub fn pair(&self, x: &Spinor, y: &Spinor) -> f64 {
        (x.transpose() * &self.pairing * y)[(0, 0)]
    }

    /// Adjoint with respect to the pairing, `B⁻¹ Aᵀ B`.
    pub fn adjoint(&self, a: &Endomorphism) -> Endomorphism {
        &self.pairing_inv * a.transpose() * &self.pairing
    }

    pub fn quantize(&self, a: &Multivector) -> Endomorphism {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (b, &c) in a.coeffs().iter().enumerate() {
            if c != 0.0 {
                out += &self.blades[b] * c;
            }
        }
        out
    }

    /// Inverse of [`quantize`](Self::quantize) through trace orthogonality.
    pub fn dequantize(&self, e: &Endomorphism) -> Multivector {
        let sp = self.space;
        let mut out = Multivector::zero(sp);
        let n = self.n as f64;
        for (b, g) in self.blades.iter().enumerate() {
            let inv_sign = blade_product(&sp, b, b).0;
            let tr = g.component_mul(&e.transpose()).sum();
            out.set(b, inv_sign * tr / n);
        }
        out
    }

    /// `ℰ_κ(ξ) = κ ξ ⊗ ℬ(−, ξ)`.
    pub fn square_endo(&self, xi: &Spinor, kappa: i8) -> Endomorphism {
        let bx = &self.pairing * xi;
        xi * bx.transpose() * f64::from(kappa)
    }

    pub fn square_polyform(&self, xi: &Spinor, kappa: i8) -> Multivector {
        self.dequantize(&self.square_endo(xi, kappa))
    }

    /// Defects of `E∘E = tr(E) E` and `Eᵗ = s E`.
    pub fn admissibility_defect(&self, e: &Endomorphism) -> (f64, f64) {
        let quad = (e * e - e * e.trace()).abs().max();
        let sym = (self.adjoint(e) - e * f64::from(self.s)).abs().max();
        (quad, sym)
    }

    pub fn is_admissible(&self, e: &Endomorphism, tol: f64) -> bool {
        let scale = e.abs().max().max(1.0);
        let (quad, sym) = self.admissibility_defect(e);
        quad <= tol * scale * scale && sym <= tol * scale
    }

    /// Rank at most one, judged by singular values.
    pub fn is_tame(&self, e: &Endomorphism) -> bool {
        let sv = e.clone().singular_values();
        let mut v: Vec<f64> = sv.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v[0] == 0.0 || v.get(1).is_none_or(|s| *s < RANK_TOL * v[0])
    }

    /// Witness `A` with `tr(E∘A) ≠ 0` and `E∘A∘E = tr(E∘A) E`, searched in the
    /// order `Id`, `γ_i`, `γ_i γ_j`.
    pub fn tame_certificate(&self, e: &Endomorphism, tol: f64) -> Option<Endomorphism> {
        let norm = e.norm();
        if norm == 0.0 {
            return None;
        }
        let d = self.space.dim();
        let mut candidates = vec![0usize];
        candidates.extend((0..d).map(|i| 1 << i));
        for i in 0..d {
            for j in i + 1..d {
                candidates.push(1 << i | 1 << j);
            }
        }
        candidates.into_iter().find_map(|b| {
            let a = &self.blades[b];
            let tr = (e * a).trace();
            if tr.abs() <= RANK_TOL * norm {
                return None;
            }
            let defect = (e * a * e - e * tr).abs().max();
            (defect <= tol * norm * norm.max(1.0) * a.abs().max()).then(|| a.clone())
        })
    }

    /// Spinor `ξ` and sign `κ` with `square_polyform(ξ, κ) = α`; `ξ` is unique up to sign.
    pub fn reconstruct_spinor(&self, alpha: &Multivector, tol: f64) -> Result<(Spinor, i8)> {
        if alpha.space() != self.space {
            return Err(Error::MismatchedSpaces);
        }
        let e = self.quantize(alpha);
        let scale = e.abs().max();
        if scale == 0.0 {
            return Ok((DVector::zeros(self.n), 1));
        }
        let rel = tol * scale;
        if !self.is_admissible(&(&e / scale), tol) {
            let (quad, sym) = self.admissibility_defect(&(&e / scale));
            return Err(Error::NotASquare(format!(
                "admissibility defects {quad:.3e} (E∘E = tr(E)E), {sym:.3e} (adjoint symmetry)"
            )));
        }
        if !self.is_tame(&e) {
            return Err(Error::NotASquare("rank exceeds one".into()));
        }
        let col = (0..self.n)
            .max_by(|&a, &b| e.column(a).norm().total_cmp(&e.column(b).norm()))
            .expect("nonempty");
        let v: Spinor = e.column(col).into_owned();
        let m = self.square_endo(&v, 1);
        let r = e.component_mul(&m).sum() / m.norm_squared();
        let kappa: i8 = if r >= 0.0 { 1 } else { -1 };
        let xi = v * r.abs().sqrt();
        let back = self.square_endo(&xi, kappa);
        let defect = (back - &e).abs().max();
        if defect > rel.max(1e-300) * 10.0 {
            return Err(Error::NotASquare(format!("rank-one fit defect {defect:.3e}")));
        }
        Ok((xi, kappa))
    }

    /// Evaluates `Q(ξ) = 0`, `Q∘ℰ(ξ) = 0` and `q ⋄ α_ξ = 0` separately.
    pub fn kernel_check(&self, q: &Endomorphism, xi: &Spinor, kappa: i8, tol: f64) -> KernelCheck {
        let scale = q.abs().max().max(1.0) * xi.norm_squared().max(1.0);
        let direct = (q * xi).amax() <= tol * scale;
        let e = self.square_endo(xi, kappa);
        let endo = (q * &e).abs().max() <= tol * scale;
        let alpha = self.dequantize(&e);
        let poly = self.dequantize(q).gp(&alpha).max_abs() <= tol * scale;
        KernelCheck { direct, endo, poly }
    }

    /// Chirality `μ` with `Γ(ν) ξ = μ ξ`, or `None` for a non-eigenvector.
    pub fn chirality(&self, xi: &Spinor, tol: f64) -> Result<Option<i8>> {
        let sp = self.space;
        if (sp.p() as i64 - sp.q() as i64).rem_euclid(8) != 0 {
            return Err(Error::NoChirality {
                p: sp.p(),
                q: sp.q(),
            });
        }
        let scale = xi.amax();
        if scale == 0.0 {
            return Ok(None);
        }
        let g = self.volume_action() * xi;
        for mu in [1i8, -1] {
            if (&g - xi * f64::from(mu)).amax() <= tol * scale {
                return Ok(Some(mu));
            }
        }
        Ok(None)
    }

    /// Projection `½(Id + μ Γ(ν)) ξ` onto the chirality-`μ` subspace.
    pub fn chiral_projection(&self, xi: &Spinor, mu: i8) -> Spinor {
        (xi + self.volume_action() * xi * f64::from(mu)) * 0.5
    }

    /// Constant `C` with `B₊ = C γ(ν)ᵀ B₋`, measured from the two pairings.
    pub fn pairing_relation_constant(&self) -> Result<f64> {
        let (bp, _) = self.build_pairing(1)?;
        let (bm, _) = self.build_pairing(-1)?;
        let rhs = self.volume_action().transpose() * bm;
        let c = bp.component_mul(&rhs).sum() / rhs.norm_squared();
        if (&bp - &rhs * c).abs().max() > 1e-10 {
            return Err(Error::DegeneratePairing);
        }
        Ok(c)
    }

    pub fn dump(&self) -> ModuleDump {
        let rows = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows())
                .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)])
                .collect()
        };
        ModuleDump {
            signature: [self.space.p(), self.space.q()],
            eta: self.space.eta_vec(),
            n: self.n,
            gammas: self.gammas.iter().map(rows).collect(),
            pairing: rows(&self.pairing),
            sigma: self.sigma,
            s: self.s,
        }
    }
}

/// Measured against expected pairing symmetry for one adjoint type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryRow {
    pub sigma: i8,
    pub measured: i8,
    pub expected: i8,
}

/// Largest relative residuals of the module invariants over a batch of samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfCheck {
    pub signature: [usize; 2],
    pub draws: usize,
    pub clifford_relation: f64,
    pub homomorphism: f64,
    pub adjoint_transport: f64,
    pub trace: f64,
    pub fierz: f64,
    pub symmetry: Vec<SymmetryRow>,
    /// `4 h*(α¹, α¹) = ℬ(ξ, ξ)²` in signature (1,1).
    pub null_dirac: Option<f64>,
}

impl SelfCheck {
    pub fn worst(&self) -> f64 {
        [
            self.clifford_relation,
            self.homomorphism,
            self.adjoint_transport,
            self.trace,
            self.fierz,
            self.null_dirac.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn symmetry_ok(&self) -> bool {
        self.symmetry.iter().all(|r| r.measured == r.expected)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.worst() < tol && self.symmetry_ok()
    }
}

/// Runs the invariant checks on both adjoint types; each sample is `(a, b, ξ)`.
pub fn selfcheck(space: QuadraticSpace, samples: &[(Multivector, Multivector, Spinor)]) -> Result<SelfCheck> {
    let modules = [CliffordModule::new(space, 1)?, CliffordModule::new(space, -1)?];
    let rel = |num: f64, scale: f64| num / scale.max(1.0);
    let mut out = SelfCheck {
        signature: [space.p(), space.q()],
        draws: samples.len(),
        clifford_relation: clifford_relation_defect(&space, modules[0].gammas()),
        homomorphism: 0.0,
        adjoint_transport: 0.0,
        trace: 0.0,
        fierz: 0.0,
        symmetry: modules
            .iter()
            .map(|m| SymmetryRow {
                sigma: m.sigma(),
                measured: m.symmetry(),
                expected: expected_symmetry(space.dim(), m.sigma()),
            })
            .collect(),
        null_dirac: None,
    };
    let n = modules[0].dim() as f64;
    let lorentz_plane = (space.p(), space.q()) == (1, 1);
    for (a, b, xi) in samples {
        if a.space() != space || b.space() != space || xi.len() != modules[0].dim() {
            return Err(Error::MismatchedSpaces);
        }
        let m = &modules[0];
        let qa = m.quantize(a);
        let lhs = m.quantize(&a.gp(b));
        let rhs = &qa * m.quantize(b);
        out.homomorphism = out.homomorphism.max(rel((&lhs - &rhs).abs().max(), rhs.abs().max()));
        out.trace = out.trace.max(rel((qa.trace() - a.ka_trace()).abs(), a.ka_trace().abs()));
        for m in &modules {
            let lhs = m.adjoint(&m.quantize(a));
            let rhs = m.quantize(&adjoint_transport(a, m.sigma()));
            out.adjoint_transport = out.adjoint_transport.max(rel((&lhs - &rhs).abs().max(), rhs.abs().max()));
            for kappa in [1i8, -1] {
                let alpha = m.square_polyform(xi, kappa);
                let ab = alpha.gp(b);
                let lhs = ab.gp(&alpha);
                let rhs = alpha.scale(n * ab.scalar_part());
                let scale = alpha.max_abs().powi(2) * b.max_abs() * n;
                out.fierz = out.fierz.max(rel(lhs.dist(&rhs), scale));
            }
        }
        if lorentz_plane {
            let alpha = m.square_polyform(xi, 1);
            let a1 = alpha.grade_part(1);
            let bxx = m.pair(xi, xi);
            let d = rel((4.0 * a1.det_inner(&a1) - bxx * bxx).abs(), bxx * bxx);
            out.null_dirac = Some(out.null_dirac.unwrap_or(0.0).max(d));
        }
    }
    Ok(out)
}

/// Outcome of the three equivalent kernel conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelCheck {
    pub direct: bool,
    pub endo: bool,
    pub poly: bool,
}

impl KernelCheck {
    pub fn consistent(&self) -> bool {
        self.direct == self.endo && self.endo == self.poly
    }
}

/// Largest grade present in a multivector, ignoring coefficients below `tol`.
pub fn grade_support(a: &Multivector, tol: f64) -> Vec<usize> {
    let d = a.space().dim();
    (0..=d)
        .filter(|&k| {
            a.coeffs()
                .iter()
                .enumerate()
                .any(|(b, c)| grade(b) == k && c.abs() > tol)
        })
        .collect()
}
