mod common;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use spinform::clifford_rep::CliffordModule;
use spinform::lorentz4::*;
use spinform::{Error, Multivector, QuadraticSpace};

fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

fn cv(a: f64, b: f64, c: f64, d: f64) -> Covector {
    Covector::new(a, b, c, d)
}

fn expm4(x: &Matrix4<f64>) -> Matrix4<f64> {
    let mut term = Matrix4::identity();
    let mut acc = term;
    for k in 1..40 {
        term = term * x / k as f64;
        acc += term;
    }
    acc
}

/// Element of SO_0(3,1) acting on covector components.
fn random_lorentz<R: Rng>(r: &mut R, scale: f64) -> Matrix4<f64> {
    let mut a = Matrix4::zeros();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let x = scale * common::gaussian(r);
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    expm4(&(eta() * a))
}

fn transform(t: &Matrix4<f64>, cf: &NullCoframe) -> NullCoframe {
    let [u, v, l, n] = cf.covectors();
    NullCoframe::from_unchecked(t * u, t * v, t * l, t * n)
}

fn random_coframe<R: Rng>(r: &mut R) -> NullCoframe {
    let t = random_lorentz(r, 0.6);
    transform(&t, &NullCoframe::standard())
}

fn random_covector<R: Rng>(r: &mut R) -> Covector {
    Covector::from_fn(|_, _| common::gaussian(r))
}

fn check_hodge_identities(cf: &NullCoframe) {
    let [u, v, l, n] = cf.forms();
    let close = |a: &Multivector, b: &Multivector| {
        let d = a.dist(b);
        assert!(d < 1e-10 * (1.0 + a.max_abs()), "identity violated by {d:e}");
    };
    close(&u.hodge(), &-&u.wedge(&l).wedge(&n));
    close(&v.hodge(), &v.wedge(&l).wedge(&n));
    close(&l.hodge(), &u.wedge(&v).wedge(&n));
    close(&n.hodge(), &-&u.wedge(&v).wedge(&l));
    close(&u.wedge(&v).hodge(), &-&l.wedge(&n));
    close(&u.wedge(&l).hodge(), &u.wedge(&n));
    close(&v.wedge(&l).hodge(), &-&v.wedge(&n));
    let nu = u.wedge(&v).wedge(&l).wedge(&n);
    close(&nu.hodge(), &Multivector::scalar(space(), -1.0));
    for x in [&u, &v, &l, &n] {
        close(&x.hodge().hodge(), x);
    }
    for (a, b) in [(&u, &v), (&u, &l), (&v, &n), (&l, &n)] {
        let w = a.wedge(b);
        close(&w.hodge().hodge(), &-&w);
    }
    for (w, wc) in [(&u, cf.u()), (&l, cf.l()), (&n, cf.n())] {
        let beta = v.wedge(&l) + u.clone();
        close(&interior_sharp(&wc, &beta.hodge()), &beta.wedge(w).hodge());
    }
}

#[test]
fn hodge_identities_on_standard_coframe() {
    check_hodge_identities(&NullCoframe::standard());
}

#[test]
fn hodge_identities_on_random_coframes() {
    let mut r = common::rng(41);
    for _ in 0..50 {
        let cf = random_coframe(&mut r);
        assert!(cf.defect() < 1e-10);
        check_hodge_identities(&cf);
    }
}

#[test]
fn canonical_pair_is_recovered() {
    let u = cv(1.0, 1.0, 0.0, 0.0);
    let l = cv(0.0, 0.0, 1.0, 0.0);
    let pair = ParabolicPair::new(u, l, 1e-12).unwrap();
    let got = square_to_pair(&pair.to_square()).unwrap();
    assert!((got.u() - u).amax() < 1e-14);
    assert!((got.l() - l).amax() < 1e-14);
}

#[test]
fn gauge_shifted_representative_is_fixed() {
    let u = cv(1.0, 1.0, 0.0, 0.0);
    let l = cv(0.0, 0.0, 1.0, 0.0);
    let alpha = ParabolicPair::new(u, l + u * 3.0, 1e-12).unwrap().to_square();
    let got = square_to_pair(&alpha).unwrap();
    assert!((got.l() - l).amax() < 1e-14);
    assert!(got.l()[0].abs() < 1e-14);
}

#[test]
fn nonzero_scalar_part_is_rejected() {
    let u = cv(1.0, 1.0, 0.0, 0.0);
    let l = cv(0.0, 0.0, 1.0, 0.0);
    let mut alpha = ParabolicPair::new(u, l, 1e-12).unwrap().to_square();
    alpha.set(0, 0.5);
    assert!(matches!(square_to_pair(&alpha), Err(Error::NotASquare(_))));
    assert!(matches!(square_to_pair(&Multivector::zero(space())), Err(Error::Degenerate(_))));
}

#[test]
fn non_unit_or_non_orthogonal_l_is_rejected() {
    let u = form(&cv(1.0, 1.0, 0.0, 0.0));
    let twice = &u + &u.wedge(&form(&cv(0.0, 0.0, 2.0, 0.0)));
    assert!(matches!(square_to_pair(&twice), Err(Error::NotASquare(_))));
    let timelike = form(&cv(1.0, 0.0, 0.0, 0.0));
    let t = &timelike + &timelike.wedge(&form(&cv(0.0, 0.0, 1.0, 0.0)));
    assert!(matches!(square_to_pair(&t), Err(Error::NotASquare(_))));
}

#[test]
fn spinor_squares_round_trip_through_pairs() {
    let m = CliffordModule::standard(QuadraticSpace::minkowski()).unwrap();
    let mut r = common::rng(7);
    for _ in 0..100 {
        let xi = common::gaussian_vec(&mut r, 4);
        let alpha = m.square_polyform(&xi, 1);
        let pair = square_to_pair(&alpha).unwrap();
        let d = pair.defects();
        assert!(d.uu < 1e-9 * (1.0 + pair.u().amax().powi(2)));
        assert!(d.ul < 1e-9 * (1.0 + pair.u().amax()));
        assert!(d.ll < 1e-9);
        assert!(pair.l()[0].abs() < 1e-12);
        assert!(pair.to_square().dist(&alpha) < 1e-10 * alpha.max_abs());
    }
}

#[test]
fn gauge_fix_respects_general_time_orientation() {
    let ms = MinkowskiSpace::new(cv(2.0, 0.5, -0.3, 0.1)).unwrap();
    let t = ms.time();
    assert!((inner(&t, &t) + 1.0).abs() < 1e-14);
    let mut r = common::rng(3);
    let cf = random_coframe(&mut r);
    let alpha = cf.pair().to_square();
    let pair = ms.square_to_pair(&alpha, 1e-8).unwrap();
    assert!(inner(&pair.l(), &t).abs() < 1e-12);
    assert!(pair.same_class(&cf.pair(), 1e-10));
    assert!(MinkowskiSpace::new(cv(0.0, 1.0, 0.0, 0.0)).is_err());
}

#[test]
fn standard_completion_gives_e3() {
    let pair = ParabolicPair::new(cv(1.0, 1.0, 0.0, 0.0), cv(0.0, 0.0, 1.0, 0.0), 1e-12).unwrap();
    let cf = complete_coframe(&pair, &cv(-0.5, 0.5, 0.0, 0.0)).unwrap();
    assert!((cf.n() - cv(0.0, 0.0, 0.0, 1.0)).amax() < 1e-14);
    assert!(cf.defect() < 1e-14);
}

#[test]
fn completion_rejects_bad_conjugates() {
    let pair = ParabolicPair::new(cv(1.0, 1.0, 0.0, 0.0), cv(0.0, 0.0, 1.0, 0.0), 1e-12).unwrap();
    assert!(complete_coframe(&pair, &cv(-0.5, 0.6, 0.0, 0.0)).is_err());
    assert!(complete_coframe(&pair, &cv(-1.0, 1.0, 0.0, 0.0)).is_err());
}

#[test]
fn shifted_conjugate_forces_new_representative() {
    let u = cv(1.0, 1.0, 0.0, 0.0);
    let v = cv(-0.5, 0.5, 0.0, 0.0);
    let w = cv(0.0, 0.0, 1.0, 0.0);
    let v2 = v - u * (0.5 * inner(&w, &w)) + w;
    let pair = ParabolicPair::new(u, cv(0.0, 0.0, 1.0, 0.0), 1e-12).unwrap();
    let cf = complete_coframe(&pair, &v2).unwrap();
    assert!(inner(&cf.l(), &v2).abs() < 1e-14);
    assert!((cf.l() - (w - u)).amax() < 1e-14);
    assert!(cf.defect() < 1e-14);
    let direct = gauge_act(&w, &NullCoframe::standard()).unwrap();
    assert!((direct.l() - cf.l()).amax() < 1e-14);
    assert!((direct.n() - cf.n()).amax() < 1e-14);
}

#[test]
fn zero_gauge_is_identity() {
    let cf = NullCoframe::standard();
    assert_eq!(gauge_act(&Covector::zeros(), &cf).unwrap(), cf);
}

#[test]
fn gauge_along_l_shifts_v_and_l() {
    let cf = NullCoframe::standard();
    let a = 1.7;
    let g = gauge_act(&(cf.l() * a), &cf).unwrap();
    assert!((g.v() - (cf.v() - cf.u() * (a * a / 2.0) + cf.l() * a)).amax() < 1e-14);
    assert!((g.l() - (cf.l() - cf.u() * a)).amax() < 1e-14);
    assert!((g.n() - cf.n()).amax() < 1e-14);
}

#[test]
fn gauge_rejects_non_screen_vectors() {
    let cf = NullCoframe::standard();
    assert!(gauge_act(&cf.u(), &cf).is_err());
    assert!(gauge_act(&cf.v(), &cf).is_err());
}

#[test]
fn metric_of_standard_coframe_is_eta() {
    assert!((metric_of(&NullCoframe::standard()) - eta()).amax() < 1e-15);
}

#[test]
fn metric_is_lorentzian_and_gauge_invariant() {
    let mut r = common::rng(11);
    for _ in 0..30 {
        let cf = random_coframe(&mut r);
        let g = metric_of(&cf);
        let eig = SymmetricEigen::new(g).eigenvalues;
        assert_eq!(eig.iter().filter(|&&x| x < 0.0).count(), 1);
        assert_eq!(eig.iter().filter(|&&x| x > 0.0).count(), 3);
        let (a, b) = (common::gaussian(&mut r), common::gaussian(&mut r));
        let g2 = metric_of(&gauge_act_screen(a, b, &cf));
        assert!((g2 - g).amax() < 1e-10 * (1.0 + g.amax()));
        assert!(gauge_act_screen(a, b, &cf).defect() < 1e-10 * (1.0 + a * a + b * b));
    }
}

#[test]
fn gauge_action_is_a_torsor() {
    let mut r = common::rng(12);
    for _ in 0..30 {
        let cf = random_coframe(&mut r);
        let w: Vec<f64> = (0..4).map(|_| common::gaussian(&mut r)).collect();
        let twice = gauge_act_screen(w[2], w[3], &gauge_act_screen(w[0], w[1], &cf));
        let once = gauge_act_screen(w[0] + w[2], w[1] + w[3], &cf);
        for (a, b) in twice.covectors().iter().zip(once.covectors().iter()) {
            assert!((a - b).amax() < 1e-10 * (1.0 + a.amax()));
        }
        // the same composition with the screen vector written in ambient components
        let w1 = cf.l() * w[0] + cf.n() * w[1];
        let step = gauge_act(&w1, &cf).unwrap();
        let w2 = step.l() * w[2] + step.n() * w[3];
        let via = gauge_act(&w2, &step).unwrap();
        assert!((via.v() - once.v()).amax() < 1e-10 * (1.0 + once.v().amax()));
    }
}

#[test]
fn stabilizer_identity_and_group_law() {
    let cf = NullCoframe::standard();
    assert!((stabilizer_element(0.0, 0.0, &cf) - Matrix4::identity()).amax() < 1e-15);
    let lhs = stabilizer_element(1.0, 2.0, &cf) * stabilizer_element(3.0, -1.0, &cf);
    assert!((lhs - stabilizer_element(4.0, 1.0, &cf)).amax() < 1e-12);
}

#[test]
fn stabilizer_pulls_l_back_along_u() {
    let cf = NullCoframe::standard();
    let t = stabilizer_element(1.0, 0.0, &cf);
    assert!((t * cf.u() - cf.u()).amax() < 1e-14);
    assert!((t * cf.l() - (cf.l() - cf.u())).amax() < 1e-14);
    assert!((t * cf.v() - (cf.v() - cf.u() * 0.5 + cf.l())).amax() < 1e-14);
}

#[test]
fn stabilizer_lies_in_identity_component_and_fixes_square() {
    let mut r = common::rng(13);
    for _ in 0..30 {
        let cf = random_coframe(&mut r);
        let (c1, c2) = (common::gaussian(&mut r), common::gaussian(&mut r));
        let t = stabilizer_element(c1, c2, &cf);
        let scale = 1.0 + t.amax().powi(2);
        assert!((t.transpose() * eta() * t - eta()).amax() < 1e-10 * scale);
        assert!((t.determinant() - 1.0).abs() < 1e-9 * scale);
        assert!(t[(0, 0)] >= 1.0 - 1e-9);
        let alpha = cf.pair().to_square();
        assert!(act_on_form(&t, &alpha).dist(&alpha) < 1e-10 * scale);
    }
}

/// Basis of so(3,1) acting on covectors.
fn lorentz_algebra() -> Vec<Matrix4<f64>> {
    let mut out = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut a = Matrix4::zeros();
            a[(i, j)] = 1.0;
            a[(j, i)] = -1.0;
            out.push(eta() * a);
        }
    }
    out
}

#[test]
fn infinitesimal_stabilizer_is_the_two_parameter_family() {
    let cf = random_coframe(&mut common::rng(14));
    let alpha = cf.pair().to_square();
    let gens = lorentz_algebra();
    let eps = 1e-6;
    // derivative of T ↦ T(α) at the identity, by central differences
    let mut m = DMatrix::zeros(16, 6);
    for (k, x) in gens.iter().enumerate() {
        let plus = act_on_form(&expm4(&(x * eps)), &alpha);
        let minus = act_on_form(&expm4(&(x * -eps)), &alpha);
        let d = (&plus - &minus).scale(0.5 / eps);
        for b in 0..16 {
            m[(b, k)] = d.coeff(b);
        }
    }
    let svd = m.clone().svd(false, true);
    let tiny = svd.singular_values.iter().filter(|&&s| s < 1e-6).count();
    assert_eq!(tiny, 2);
    // the generators of the family lie in the kernel
    for (c1, c2) in [(1.0, 0.0), (0.0, 1.0)] {
        let x = (stabilizer_element(c1 * eps, c2 * eps, &cf) - stabilizer_element(-c1 * eps, -c2 * eps, &cf))
            / (2.0 * eps);
        let coords: Vec<f64> = (0..6)
            .map(|k| {
                let g = &gens[k];
                let (i, j) = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)][k];
                x[(i, j)] / g[(i, j)]
            })
            .collect();
        let mut rebuilt = Matrix4::zeros();
        for (k, c) in coords.iter().enumerate() {
            rebuilt += gens[k] * *c;
        }
        assert!((rebuilt - x).amax() < 1e-6);
        let image = &m * nalgebra::DVector::from_vec(coords);
        assert!(image.amax() < 1e-6);
    }
}

#[test]
fn generic_one_parameter_subgroups_move_the_square() {
    let cf = NullCoframe::standard();
    let alpha = cf.pair().to_square();
    for x in lorentz_algebra() {
        let t = expm4(&(x * 0.3));
        assert!(act_on_form(&t, &alpha).dist(&alpha) > 1e-3);
    }
}

fn zero_dcf() -> [Multivector; 4] {
    std::array::from_fn(|_| Multivector::zero(space()))
}

fn random_torsion<R: Rng>(r: &mut R) -> TorsionData {
    let mut tau = [[0.0; 6]; 4];
    for row in tau.iter_mut() {
        for x in row.iter_mut() {
            *x = common::gaussian(r);
        }
    }
    let h = Multivector::from_grade(space(), 3, &(0..4).map(|_| common::gaussian(r)).collect::<Vec<_>>());
    TorsionData::new(random_covector(r), tau, &h, random_covector(r), random_covector(r)).unwrap()
}

#[test]
fn flat_coframe_solves_trivial_system() {
    let res = torsion_system_residual(&NullCoframe::standard(), &zero_dcf(), &TorsionData::zero()).unwrap();
    assert_eq!(res, [0.0; 4]);
}

#[test]
fn locally_conformally_parallel_coframe() {
    let mut r = common::rng(21);
    let cf = random_coframe(&mut r);
    let xi = random_covector(&mut r);
    let dcf = cf.forms().map(|f| form(&xi).wedge(&f));
    let mut td = TorsionData::zero();
    td.xi = [xi[0], xi[1], xi[2], xi[3]];
    let res = torsion_system_residual(&cf, &dcf, &td).unwrap();
    assert!(res.iter().all(|&x| x < 1e-12), "{res:?}");
    td.xi[2] += 0.1;
    let res = torsion_system_residual(&cf, &dcf, &td).unwrap();
    assert!(res.iter().all(|&x| x > 1e-3), "{res:?}");
}

#[test]
fn residual_rejects_wrong_degree() {
    let mut dcf = zero_dcf();
    dcf[1] = form(&cv(1.0, 0.0, 0.0, 0.0));
    assert!(matches!(
        torsion_system_residual(&NullCoframe::standard(), &dcf, &TorsionData::zero()),
        Err(Error::WrongGrade(2))
    ));
    let mut dcf = zero_dcf();
    dcf[0] = Multivector::zero(QuadraticSpace::euclidean(4).unwrap());
    assert!(torsion_system_residual(&NullCoframe::standard(), &dcf, &TorsionData::zero()).is_err());
}

#[test]
fn tau_projection_lands_in_admissible_summand() {
    let mut r = common::rng(22);
    let td = random_torsion(&mut r);
    let (cyc, tr) = td.tau_defects();
    assert!(cyc < 1e-12 && tr < 1e-12);
    let again = project_tau(&td.tau);
    for a in 0..4 {
        for k in 0..6 {
            assert!((again[a][k] - td.tau[a][k]).abs() < 1e-14);
        }
    }
    let basis = tau_basis();
    assert_eq!(basis.len(), 16);
    for t in &basis {
        let p = project_tau(t);
        let diff: f64 = (0..4).flat_map(|a| (0..6).map(move |k| (a, k))).map(|(a, k)| (p[a][k] - t[a][k]).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }
}

#[test]
fn torsion_data_json_round_trip() {
    let td = random_torsion(&mut common::rng(23));
    let s = serde_json::to_string(&td).unwrap();
    let back: TorsionData = serde_json::from_str(&s).unwrap();
    assert_eq!(back, td);
    let cf = random_coframe(&mut common::rng(24));
    let back: NullCoframe = serde_json::from_str(&serde_json::to_string(&cf).unwrap()).unwrap();
    assert_eq!(back, cf);
}

#[test]
fn solved_torsion_reproduces_differentials() {
    let mut r = common::rng(25);
    for _ in 0..20 {
        let cf = random_coframe(&mut r);
        let td = random_torsion(&mut r);
        let dcf = torsion_rhs(&cf, &td);
        let solved = torsion_from_differentials(&cf, &dcf, &td.kappa(), &td.rho()).unwrap();
        let res = torsion_system_residual(&cf, &dcf, &solved).unwrap();
        assert!(res.iter().all(|&x| x < 1e-9), "{res:?}");
        for i in 0..4 {
            assert!((solved.xi[i] - td.xi[i]).abs() < 1e-9);
            assert!((solved.h[i] - td.h[i]).abs() < 1e-9);
            for k in 0..6 {
                assert!((solved.tau[i][k] - td.tau[i][k]).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn skew_system_trivial_and_killing_cases() {
    let cf = NullCoframe::standard();
    let z = Covector::zeros();
    assert_eq!(skew_torsion_residual(&cf, &zero_dcf(), &z, &z, &z).unwrap(), [0.0; 4]);

    let mut r = common::rng(26);
    let cf = random_coframe(&mut r);
    let c = 0.7;
    let [u, v, l, n] = cf.forms();
    let (kappa, rho) = (random_covector(&mut r), random_covector(&mut r));
    let alpha = cf.n() * (2.0 * c);
    let a = form(&alpha);
    let (k, p) = (form(&kappa), form(&rho));
    let dcf = [
        u.wedge(&l).scale(2.0 * c),
        &(&a.wedge(&v).hodge() - &k.wedge(&l)) - &p.wedge(&n),
        &a.wedge(&l).hodge() + &k.wedge(&u),
        &a.wedge(&n).hodge() + &p.wedge(&u),
    ];
    let res = skew_torsion_residual(&cf, &dcf, &alpha, &kappa, &rho).unwrap();
    assert!(res.iter().all(|&x| x < 1e-12), "{res:?}");

    let along_u = kappa + cf.u() * 0.5;
    let res = skew_torsion_residual(&cf, &dcf, &alpha, &along_u, &rho).unwrap();
    assert!(res[1] > 0.1 && res[0] < 1e-12 && res[2] < 1e-12 && res[3] < 1e-12, "{res:?}");
    let generic = kappa + cf.n() * 0.5;
    let res = skew_torsion_residual(&cf, &dcf, &alpha, &generic, &rho).unwrap();
    assert!(res[1] > 0.1 && res[2] > 0.1 && res[0] < 1e-12 && res[3] < 1e-12, "{res:?}");
}

#[test]
fn skew_system_is_the_totally_skew_specialization() {
    let mut r = common::rng(27);
    let cf = random_coframe(&mut r);
    let (alpha, kappa, rho) = (random_covector(&mut r), random_covector(&mut r), random_covector(&mut r));
    let dcf: [Multivector; 4] = std::array::from_fn(|_| {
        Multivector::from_grade(space(), 2, &(0..6).map(|_| common::gaussian(&mut r)).collect::<Vec<_>>())
    });
    let td = TorsionData::new(Covector::zeros(), [[0.0; 6]; 4], &form(&alpha).hodge(), kappa, rho).unwrap();
    let a = skew_torsion_residual(&cf, &dcf, &alpha, &kappa, &rho).unwrap();
    let b = torsion_system_residual(&cf, &dcf, &td).unwrap();
    for i in 0..4 {
        assert!((a[i] - b[i]).abs() < 1e-12);
    }
}

/// Structure constants `c[a][b][c]` with `[E_b, E_c] = c^a_{bc} E_a` of `ℝ ⋉_A ℝ³` in a random basis.
fn random_lie_algebra<R: Rng>(r: &mut R) -> [[[f64; 4]; 4]; 4] {
    let mut c0 = [[[0.0; 4]; 4]; 4];
    for i in 1..4 {
        for j in 1..4 {
            let x = common::gaussian(r);
            c0[j][0][i] = x;
            c0[j][i][0] = -x;
        }
    }
    let p = DMatrix::from_fn(4, 4, |i, j| common::gaussian(r) + if i == j { 3.0 } else { 0.0 });
    let pinv = p.clone().try_inverse().unwrap();
    let mut c = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                let mut s = 0.0;
                for j in 0..4 {
                    for k in 0..4 {
                        for m in 0..4 {
                            s += p[(j, b)] * p[(k, cc)] * c0[m][j][k] * pinv[(a, m)];
                        }
                    }
                }
                c[a][b][cc] = s;
            }
        }
    }
    c
}

fn jacobi_defect(c: &[[[f64; 4]; 4]; 4]) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for d in 0..4 {
                for e in 0..4 {
                    let mut s = 0.0;
                    for m in 0..4 {
                        s += c[m][a][b] * c[e][m][d] + c[m][b][d] * c[e][m][a] + c[m][d][a] * c[e][m][b];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// `d e^a = -Σ_{b<c} c^a_{bc} e^{bc}` pulled back along the coframe.
fn coframe_differentials(cf: &NullCoframe, c: &[[[f64; 4]; 4]; 4]) -> [Multivector; 4] {
    let de: Vec<Multivector> = (0..4)
        .map(|a| {
            let mut m = Multivector::zero(space());
            for b in 0..4 {
                for cc in (b + 1)..4 {
                    m.set((1 << b) | (1 << cc), -c[a][b][cc]);
                }
            }
            m
        })
        .collect();
    cf.covectors().map(|x| {
        let mut m = Multivector::zero(space());
        for a in 0..4 {
            m += &de[a].scale(x[a]);
        }
        m
    })
}

/// `(ℒ_X g)(E_b, E_c) = -g([X, E_b], E_c) - g(E_b, [X, E_c])`.
fn lie_derivative_metric(c: &[[[f64; 4]; 4]; 4], g: &Matrix4<f64>, x: &nalgebra::Vector4<f64>) -> Matrix4<f64> {
    let bracket = |b: usize| nalgebra::Vector4::from_fn(|a, _| (0..4).map(|d| x[d] * c[a][d][b]).sum::<f64>());
    Matrix4::from_fn(|b, cc| {
        let xb = bracket(b);
        let xc = bracket(cc);
        -(xb.transpose() * g.column(cc))[0] - (g.row(b) * xc)[0]
    })
}

fn sym(a: &Covector, b: &Covector) -> Matrix4<f64> {
    a * b.transpose() + b * a.transpose()
}

/// `τ^s_β(w_1, w_2) = τ(w_1, β, w_2) + τ(w_2, β, w_1)`.
fn tau_sym(td: &TorsionData, beta: &Covector) -> Matrix4<f64> {
    let t = td.tau_tensor();
    let x = sharp(beta);
    Matrix4::from_fn(|i, j| (0..4).map(|m| x[m] * (t[i][m][j] + t[j][m][i])).sum())
}

fn check_metric_compatibility(seed: u64) {
    let mut r = common::rng(seed);
    let c = random_lie_algebra(&mut r);
    assert!(jacobi_defect(&c) < 1e-9);
    let cf = random_coframe(&mut r);
    let dcf = coframe_differentials(&cf, &c);
    let (kappa, rho) = (random_covector(&mut r), random_covector(&mut r));
    let td = torsion_from_differentials(&cf, &dcf, &kappa, &rho).unwrap();
    let res = torsion_system_residual(&cf, &dcf, &td).unwrap();
    let scale = 1.0 + dcf.iter().map(|d| d.max_abs()).fold(0.0, f64::max);
    assert!(res.iter().all(|&x| x < 1e-9 * scale), "{res:?}");

    let g = metric_of(&cf);
    let xi = td.xi();
    let [u, v, l, n] = cf.covectors();
    let lhs = |b: &Covector| lie_derivative_metric(&c, &g, &sharp(b));
    let base = |b: &Covector| g * (2.0 * inner(&xi, b)) - sym(b, &xi) - tau_sym(&td, b);
    let expected = [
        base(&u),
        base(&v) - sym(&kappa, &l) - sym(&rho, &n),
        base(&l) + sym(&kappa, &u),
        base(&n) + sym(&rho, &u),
    ];
    for (b, e) in [u, v, l, n].iter().zip(expected.iter()) {
        let d = (lhs(b) - e).amax();
        assert!(d < 1e-8 * scale, "symmetrized identity off by {d:e}");
    }
}

#[test]
fn torsion_solutions_are_metric_compatible_on_lie_algebras() {
    for seed in 100..120 {
        check_metric_compatibility(seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_square_round_trip(seed in any::<u64>()) {
        let cf = random_coframe(&mut common::rng(seed));
        let mut r = common::rng(seed ^ 0x5a5a);
        let shift = common::gaussian(&mut r);
        let alpha = cf.pair().shifted(shift).to_square();
        let pair = square_to_pair(&alpha).unwrap();
        prop_assert!(pair.same_class(&cf.pair(), 1e-9));
        prop_assert!(pair.to_square().dist(&alpha) < 1e-10 * (1.0 + alpha.max_abs()));
        let again = square_to_pair(&pair.to_square()).unwrap();
        prop_assert!((again.l() - pair.l()).amax() < 1e-10 * (1.0 + pair.l().amax()));
    }

    #[test]
    fn prop_completion_is_valid(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let cf = random_coframe(&mut r);
        let (a, b) = (common::gaussian(&mut r), common::gaussian(&mut r));
        let v = gauge_act_screen(a, b, &cf).v();
        let done = complete_coframe(&cf.pair(), &v).unwrap();
        prop_assert!(done.defect() < 1e-9 * (1.0 + a * a + b * b));
        prop_assert!(done.pair().same_class(&cf.pair(), 1e-9 * (1.0 + a.abs() + b.abs())));
    }

    #[test]
    fn prop_metric_compatibility(seed in any::<u64>()) {
        check_metric_compatibility(seed);
    }

    #[test]
    fn prop_stabilizer_group_law(c in proptest::array::uniform4(-3.0f64..3.0)) {
        let cf = NullCoframe::standard();
        let lhs = stabilizer_element(c[0], c[1], &cf) * stabilizer_element(c[2], c[3], &cf);
        let rhs = stabilizer_element(c[0] + c[2], c[1] + c[3], &cf);
        prop_assert!((lhs - rhs).amax() < 1e-10 * (1.0 + rhs.amax()));
    }
}
