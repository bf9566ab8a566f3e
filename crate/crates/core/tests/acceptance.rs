mod common;

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3};
use rand::Rng;
use spinform::clifford_rep::{selfcheck, CliffordModule};
use spinform::lorentz4::{inner, square_to_pair};
use spinform::spin7::*;
use spinform::spinor_flow::*;
use spinform::{Multivector, QuadraticSpace};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("[{}] {id:>2}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn sq14() -> f64 {
    14f64.sqrt()
}

fn cayley() -> Report1 {
    let t0 = Instant::now();
    let phi = cayley_form();
    let norm2 = phi.phi.det_inner(&phi.phi);
    let dual = phi.phi.hodge().dist(&phi.phi);
    let d2 = delta2(&phi.space, &phi.phi, &phi.phi).unwrap();
    let res = (&d2 + &phi.phi.scale(12.0)).coeff_norm();
    let secs = t0.elapsed().as_secs_f64();
    let worst = (norm2 - 14.0).abs().max(dual).max(res);
    Report1 {
        pass: worst < 1e-10 && secs < 1.0,
        detail: format!("| |Φ|²-14 |, |∗Φ-Φ|, |ΦΔ₂Φ+12Φ| ≤ {worst:.2e} in {secs:.3} s"),
    }
}

struct Report1 {
    pass: bool,
    detail: String,
}

fn random_coords<R: Rng>(r: &mut R) -> Vec35 {
    Vec35::from_iterator(common::gaussian_vec(r, N_SD).iter().copied())
}

fn potential_anchors() -> Report1 {
    let phi = cayley_form();
    let w = potential_w(&phi).abs();
    let g = grad_w(&phi).norm();
    let mut r = common::rng(2);
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for _ in 0..50 {
        let x = random_coords(&mut r);
        let an = grad_coords(&x);
        let fd = Vec35::from_fn(|i, _| {
            let mut e = Vec35::zeros();
            e[i] = h;
            (potential_coords(&(x + e)) - potential_coords(&(x - e))) / (2.0 * h)
        });
        worst = worst.max((fd - an).norm() / an.norm());
    }
    Report1 {
        pass: w < 1e-9 && g < 1e-9 && worst < 1e-5,
        detail: format!("|W(Φ₀)| = {w:.2e}, |grad W(Φ₀)| = {g:.2e}, worst FD relative error {worst:.2e} over 50 forms"),
    }
}

fn hessian_spectrum() -> Report1 {
    let phi = cayley_form();
    let mut ev: Vec<f64> = hess_matrix(&phi).unwrap().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let zero = ev[..8].iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let top = ev[8..].iter().fold(0.0f64, |m, l| m.max((l - 16.0 * sq14()).abs()));
    let mut lam: Vec<f64> = delta2_operator(&phi).symmetric_eigen().eigenvalues.iter().copied().collect();
    lam.sort_by(f64::total_cmp);
    let count = |v: f64| lam.iter().filter(|l| (*l - v).abs() < 1e-8).count();
    let ranks = (count(-12.0), count(-6.0), count(2.0));
    Report1 {
        pass: zero < 1e-6 && top < 1e-6 && ranks == (1, 7, 27),
        detail: format!(
            "8 zero modes within {zero:.2e}, 27 at 16√14 within {top:.2e}; Λ ranks {ranks:?} at (-12, -6, 2)"
        ),
    }
}

fn metric_flatness() -> Report1 {
    let phi = cayley_form().phi;
    let id = DMatrix::identity(8, 8);
    let mut r = common::rng(4);
    let (mut a, mut b): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let k = common::random_symmetric(&mut r, 8);
        a = a.max(metric_differential(&id, &phi, &k).unwrap().abs());
        b = b.max(metric_differential_fd(&id, &phi, &k, 3e-4).unwrap().abs());
    }
    Report1 {
        pass: a < 1e-6 && b < 1e-6,
        detail: format!("max |dW(k,0)| index formula {a:.2e}, finite differences {b:.2e} over 100 k"),
    }
}

fn optimizer() -> Report1 {
    let t0 = Instant::now();
    let phi = cayley_form();
    let split = eigenspace_split(&phi, 1e-10).unwrap();
    let f = sd_embedding();
    let p27 = f.transpose() * &split.p27 * &f;
    let cfg = FinderConfig {
        tol: 1e-10,
        max_iterations: 9_999,
        ..FinderConfig::default()
    };
    let mut r = common::rng(5);
    let mut ok = 0;
    let mut iters = Vec::new();
    for _ in 0..100 {
        let raw = DVector::from_iterator(N_SD, common::gaussian_vec(&mut r, N_SD).iter().copied());
        let q = &p27 * raw;
        let q = Vec35::from_iterator(q.iter().copied()) / q.norm();
        let eps = r.random_range(0.01..=0.3);
        let seed = SelfDual4Form::from_coords(&(phi.coords() + q * eps));
        if let Ok(out) = find_spin7(&seed, &cfg) {
            if out.certificate.is_conformal && out.certificate.residual < 1e-8 && out.iterations < 10_000 {
                ok += 1;
                iters.push(out.iterations);
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let max_it = iters.iter().max().copied().unwrap_or(0);
    Report1 {
        pass: ok >= 95 && secs < 60.0,
        detail: format!("{ok}/100 certified (max {max_it} iterations) in {secs:.1} s"),
    }
}

fn clifford_suite() -> Report1 {
    let mut r = common::rng(6);
    let mut worst: f64 = 0.0;
    let mut table = Vec::new();
    let mut sym_ok = true;
    for (p, q) in [(2, 0), (1, 1), (2, 2), (3, 1), (8, 0)] {
        let sp = QuadraticSpace::signature(p, q).unwrap();
        let n = CliffordModule::new(sp, 1).unwrap().dim();
        let samples: Vec<_> = (0..100)
            .map(|_| {
                let mut form = || {
                    Multivector::from_coeffs(sp, common::gaussian_vec(&mut r, sp.num_blades()).iter().copied().collect())
                        .unwrap()
                };
                let (a, b) = (form(), form());
                (a, b, common::gaussian_vec(&mut r, n))
            })
            .collect();
        let rep = selfcheck(sp, &samples).unwrap();
        worst = worst.max(rep.worst());
        sym_ok &= rep.symmetry_ok();
        let s: Vec<String> = rep.symmetry.iter().map(|x| format!("σ={:+}→s={:+}", x.sigma, x.measured)).collect();
        table.push(format!("({p},{q}) {}", s.join(" ")));
    }
    Report1 {
        pass: worst < 1e-9 && sym_ok,
        detail: format!("worst residual {worst:.2e}; symmetry table {} [{}]", if sym_ok { "matches" } else { "MISMATCH" }, table.join("; ")),
    }
}

fn minkowski_squares() -> Report1 {
    let m = CliffordModule::standard(QuadraticSpace::minkowski()).unwrap();
    let mut r = common::rng(7);
    let (mut pair_d, mut grade_d, mut round): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut errors = 0;
    for _ in 0..1000 {
        let xi = common::gaussian_vec(&mut r, 4);
        if xi.norm() == 0.0 {
            continue;
        }
        let alpha = m.square_polyform(&xi, 1);
        for k in [0, 3, 4] {
            grade_d = grade_d.max(alpha.grade_max_abs(k));
        }
        match square_to_pair(&alpha) {
            Ok(pair) => {
                let (u, l) = (pair.u(), pair.l());
                pair_d = pair_d
                    .max(inner(&u, &u).abs())
                    .max(inner(&u, &l).abs())
                    .max((inner(&l, &l) - 1.0).abs());
                round = round.max(pair.to_square().dist(&alpha) / alpha.max_abs());
            }
            Err(_) => errors += 1,
        }
        match m.reconstruct_spinor(&alpha, 1e-9) {
            Ok((back, 1)) => round = round.max((&back - &xi).amax().min((&back + &xi).amax()) / xi.amax()),
            _ => errors += 1,
        }
    }
    Report1 {
        pass: errors == 0 && pair_d < 1e-9 && grade_d < 1e-12 && round < 1e-9,
        detail: format!(
            "pair defects ≤ {pair_d:.2e}, grades 0/3/4 ≤ {grade_d:.2e}, round trips ≤ {round:.2e}, {errors} failures"
        ),
    }
}

fn chiral_cases() -> Report1 {
    let mut r = common::rng(8);
    let mut worst: f64 = 0.0;
    let m = CliffordModule::new(QuadraticSpace::signature(1, 1).unwrap(), 1).unwrap();
    for _ in 0..20 {
        for mu in [1i8, -1] {
            let xi = m.chiral_projection(&common::gaussian_vec(&mut r, 2), mu);
            let a = m.square_polyform(&xi, 1);
            let a1 = a.grade_part(1);
            worst = worst
                .max(a.scalar_part().abs())
                .max(a.grade_max_abs(2))
                .max(a1.det_inner(&a1).abs())
                .max(a1.hodge().dist(&a1.scale(-f64::from(mu))));
        }
    }
    let sp = QuadraticSpace::from_eta(&[-1, -1, 1, 1]).unwrap();
    let m = CliffordModule::new(sp, 1).unwrap();
    let nu = Multivector::blade(sp, 0b0011, 1.0);
    for _ in 0..20 {
        for mu in [1i8, -1] {
            let xi = m.chiral_projection(&common::gaussian_vec(&mut r, 4), mu);
            let a = m.square_polyform(&xi, 1);
            for k in [0, 1, 3, 4] {
                worst = worst.max(a.grade_max_abs(k));
            }
            let w = a.grade_part(2);
            let witness = nu.gp(&w).scalar_part();
            worst = worst
                .max(w.hodge().dist(&w.scale(-f64::from(mu))))
                .max(w.det_inner(&w).abs())
                .max(w.gp(&w).max_abs())
                .max(w.gp(&nu).gp(&w).dist(&w.scale(4.0 * witness)));
        }
    }
    Report1 {
        pass: worst < 1e-10,
        detail: format!("(1,1) and (2,2) chiral null/duality residuals ≤ {worst:.2e}"),
    }
}

fn row_theta<R: Rng>(r: &mut R, row: TableRow) -> Matrix3<f64> {
    loop {
        let p: Vec<f64> = (0..row.arity()).map(|_| common::signed_uniform(r, 0.3, 1.5)).collect();
        let th = row.instantiate(&p).unwrap();
        let inv = invariants(&th);
        let ok = match row {
            TableRow::Tau3 => inv.trace.abs() > 0.2 && inv.det.abs() > 0.05,
            TableRow::Tau2General => th.amax() < 6.0,
            _ => true,
        };
        if ok {
            return th;
        }
    }
}

/// Half the maximal interval on each side of `t = 0`, capped at `±2`.
fn half_interval(theta: &Matrix3<f64>, lapse: &Lapse) -> [f64; 2] {
    let (lo, hi) = maximal_interval(theta, lapse);
    [if lo.is_finite() { lo / 2.0 } else { -2.0 }, if hi.is_finite() { hi / 2.0 } else { 2.0 }]
}

struct FlowRun {
    row: TableRow,
    pair: CauchyPair,
    lapse: Lapse,
    paths: Vec<Vec<FlowState>>,
}

fn row_runs() -> Vec<FlowRun> {
    let mut r = common::rng(9);
    TableRow::ALL
        .iter()
        .map(|&row| {
            let th = row_theta(&mut r, row);
            let pair = CauchyPair::on_catalog(&th).unwrap();
            let lapse = Lapse::constant(1.0);
            let paths = half_interval(&th, &lapse)
                .iter()
                .map(|&end| flow_numeric(&pair, &lapse, end, 1e-3).unwrap())
                .collect();
            FlowRun { row, pair, lapse, paths }
        })
        .collect()
}

fn flow_closed_vs_numeric(runs: &[FlowRun]) -> Report1 {
    let (mut dev, mut cauchy, mut drift): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut worst_row = None;
    for run in runs {
        let th0 = run.pair.theta_matrix();
        for path in &run.paths {
            for (k, st) in path.iter().enumerate() {
                let exact = flow_closed_form(&run.pair, &run.lapse, st.t).unwrap();
                let d = (st.e_matrix() - exact.e_matrix()).norm() / exact.e_matrix().norm();
                if d > dev {
                    dev = d;
                    worst_row = Some(run.row);
                }
                if k % 25 == 0 || k + 1 == path.len() {
                    cauchy = cauchy.max(cauchy_residual(&st.pair(&run.pair.group)).max());
                }
                let th = st.theta_matrix();
                drift = drift.max((th[(0, 1)] - th0[(0, 1)]).abs()).max((th[(0, 2)] - th0[(0, 2)]).abs());
            }
        }
    }
    Report1 {
        pass: dev < 1e-6 && cauchy < 1e-7 && drift < 1e-9,
        detail: format!(
            "8 rows: RK4 vs closed form ≤ {dev:.2e} (worst {worst_row:?}), cauchy residual ≤ {cauchy:.2e}, Θ_ul/Θ_un drift ≤ {drift:.2e}"
        ),
    }
}

fn hamiltonian_laws(runs: &[FlowRun]) -> Report1 {
    let mut law_dev: f64 = 0.0;
    let mut anchor: f64 = 0.0;
    let mut disagreement = Vec::new();
    for run in runs {
        for path in &run.paths {
            for st in path.iter().step_by(50) {
                let pair = st.pair(&run.pair.group);
                let direct = hamiltonian_constraint(&pair).unwrap();
                let law = hamiltonian_evolution(&run.pair, &run.lapse, st.t).unwrap();
                law_dev = law_dev.max((direct - law).abs() / law.abs().max(1e-300));
                let (a, b) = ricci_anchor_defects(&pair).unwrap();
                let scale = pair.theta_matrix().amax().powi(2).max(1.0);
                let d = a.max(b) / scale;
                anchor = anchor.max(d);
                if d > 1e-8 {
                    disagreement.push(format!("{:?} at t = {:.3}", run.row, st.t));
                }
            }
        }
    }
    // constrained Ricci-flat data: ℋ₀ = 0
    let (t, d): (f64, f64) = (1.3, -0.4);
    let ll = 0.9;
    let nn = t - ll;
    let ln = (ll * nn - d).sqrt();
    let sym = |uu: f64, ll: f64, ln: f64, nn: f64| Matrix3::new(uu, 0.0, 0.0, 0.0, ll, ln, 0.0, ln, nn);
    let zero_cases = [
        sym(0.8, 0.0, 0.0, 0.0),
        sym(-0.5, 0.0, 0.0, 0.0),
        sym(1.1, 1.1, 0.0, 0.0),
        sym(-0.7, -0.35, 0.35, -0.35),
        sym((t * t - 2.0 * d) / t, ll, ln, nn),
    ];
    let mut zero_dev: f64 = 0.0;
    let lapse = Lapse::constant(1.0);
    for th in zero_cases {
        let pair = CauchyPair::on_catalog(&th).unwrap();
        zero_dev = zero_dev.max(hamiltonian_constraint(&pair).unwrap().abs());
        for end in half_interval(&th, &lapse) {
            for st in flow_numeric(&pair, &lapse, end, 1e-3).unwrap().iter().step_by(50) {
                zero_dev = zero_dev.max(hamiltonian_constraint(&st.pair(&pair.group)).unwrap().abs());
            }
        }
    }
    Report1 {
        pass: law_dev < 1e-6 && zero_dev < 1e-9 && disagreement.is_empty(),
        detail: format!(
            "law deviation ≤ {law_dev:.2e} (relative), |ℋ_t| ≤ {zero_dev:.2e} on the zero set, Ricci anchors ≤ {anchor:.2e}{}",
            if disagreement.is_empty() {
                String::new()
            } else {
                format!("; anchors disagree: {}", disagreement.join(", "))
            }
        ),
    }
}

fn eigen_mu(th: &Matrix3<f64>) -> f64 {
    let m = Matrix2::new(th[(1, 1)], th[(1, 2)], th[(2, 1)], th[(2, 2)]);
    let ev = m.symmetric_eigenvalues();
    let (big, small) = if ev[0].abs() >= ev[1].abs() { (ev[0], ev[1]) } else { (ev[1], ev[0]) };
    small / big
}

fn classification(runs: &[FlowRun]) -> Report1 {
    let mut wrong = Vec::new();
    for run in runs {
        let th = run.pair.theta_matrix();
        let tag = classify_group(&th).unwrap().tag;
        let expected = match run.row.expected_family() {
            GroupTag::Tau3 { .. } => GroupTag::Tau3 { mu: eigen_mu(&th) },
            other => other,
        };
        if !tag.matches(&expected, 1e-10) || run.pair.group.tag != Some(tag) {
            wrong.push(format!("{:?}", run.row));
        }
    }
    let mut r = common::rng(11);
    let mut mu_dev: f64 = 0.0;
    for _ in 0..20 {
        let th = row_theta(&mut r, TableRow::Tau3);
        match classify_group(&th).unwrap().tag {
            GroupTag::Tau3 { mu } => mu_dev = mu_dev.max((mu - eigen_mu(&th)).abs()),
            _ => mu_dev = f64::INFINITY,
        }
    }
    Report1 {
        pass: wrong.is_empty() && mu_dev < 1e-10,
        detail: format!(
            "{}/8 rows classified, μ deviation ≤ {mu_dev:.2e} on 20 τ_3,μ instances{}",
            8 - wrong.len(),
            if wrong.is_empty() { String::new() } else { format!("; wrong: {}", wrong.join(", ")) }
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut rep = Report { failures: 0 };
    let runs = row_runs();
    let checks: Vec<(&str, Box<dyn Fn() -> Report1 + '_>)> = vec![
        ("Cayley verification", Box::new(cayley)),
        ("Potential anchors", Box::new(potential_anchors)),
        ("Hessian spectrum", Box::new(hessian_spectrum)),
        ("Metric-deformation flatness", Box::new(metric_flatness)),
        ("Optimizer", Box::new(optimizer)),
        ("Clifford suite", Box::new(clifford_suite)),
        ("Minkowski square", Box::new(minkowski_squares)),
        ("Chiral worked cases", Box::new(chiral_cases)),
        ("Flow closed vs numeric", Box::new(|| flow_closed_vs_numeric(&runs))),
        ("Hamiltonian laws", Box::new(|| hamiltonian_laws(&runs))),
        ("Classification", Box::new(|| classification(&runs))),
    ];
    for (i, (name, f)) in checks.iter().enumerate() {
        let out = f();
        rep.line(i + 1, name, out.pass, out.detail);
    }
    let secs = start.elapsed().as_secs_f64();
    let within = secs < 300.0;
    println!("[{}] total runtime {secs:.1} s (target < 300 s)", if within { "PASS" } else { "FAIL" });
    if rep.failures == 0 && within {
        println!("acceptance: 11/11 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", rep.failures);
        ExitCode::FAILURE
    }
}
