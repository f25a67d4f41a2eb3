use qnorm_sld::cgf::{cgf_eval, grad_lambda_direct, lambda_p, lambda_p_direct, Tilt};
use qnorm_sld::gengauss::{m_pq, moment_mp};
use qnorm_sld::geometry::{implicit_curvature, llambda_jet, weingarten_ld, weingarten_llambda};
use qnorm_sld::legendre::{conjugate_at, rate_norm, solve_tau, solve_tau_from, MAX_NEWTON};
use qnorm_sld::sld::{gamma_assembly, kappa_closed_form, Prefactors};
use qnorm_sld::{PqParams, SldError};

fn pq(p: f64, q: f64) -> PqParams {
    PqParams::new(p, q).unwrap()
}

const PAIRS: [(f64, f64); 5] = [(2.0, 1.0), (3.0, 1.0), (3.0, 2.0), (1.5, 1.0), (4.0, 2.5)];

#[test]
fn reduced_and_direct_routes_agree_on_grid() {
    for (i, &(p, q)) in PAIRS.iter().enumerate() {
        let par = pq(p, q);
        for j in 0..4 {
            let t1 = -2.0 + 1.3 * j as f64 + 0.1 * i as f64;
            let t2 = 1.0 / p - 0.05 - 0.7 * j as f64;
            let tau = Tilt::new(t1, t2, &par).unwrap();
            let a = lambda_p(&tau, &par).unwrap();
            let b = lambda_p_direct(&tau, &par).unwrap();
            assert!((a - b).abs() <= 1e-8 * a.abs(), "({p},{q}) at ({t1},{t2}): {a} vs {b}");
        }
    }
}

#[test]
fn hessian_positive_definite_on_domain_grid() {
    let par = pq(3.0, 1.5);
    for i in 0..10 {
        for j in 0..5 {
            let t1 = -4.0 + 0.9 * i as f64;
            let t2 = 1.0 / 3.0 - 0.01 - 0.8 * j as f64;
            let h = cgf_eval(&Tilt::new(t1, t2, &par).unwrap(), &par).unwrap().hess;
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            assert!(det > 0.0 && h[0][0] + h[1][1] > 0.0);
        }
    }
}

#[test]
fn derivative_rewrite_identity_on_random_tilts() {
    // deterministic pseudo-random tilts
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for k in 0..50 {
        let (p, q) = PAIRS[k % PAIRS.len()];
        let par = pq(p, q);
        let s1 = -3.0 + 6.0 * next();
        let s2 = -3.0 + (3.0 + 1.0 / p - 0.05) * next();
        let tau = Tilt::new(s1, s2, &par).unwrap();
        let g = grad_lambda_direct(&tau, &par).unwrap();
        let b = 1.0 - p * s2;
        let rhs = 1.0 / b + q * s1 / b * g[0];
        assert!((g[1] / rhs - 1.0).abs() <= 1e-8, "({p},{q}) at ({s1},{s2})");
    }
}

#[test]
fn origin_is_the_mean() {
    for &(p, q) in &PAIRS {
        let par = pq(p, q);
        let rp = rate_norm(m_pq(&par), &par).unwrap();
        assert!(rp.rate.abs() < 1e-14);
        assert!(rp.tau.tau1.abs() < 1e-8 && rp.tau.tau2.abs() < 1e-8);
        assert!((moment_mp(p, q).unwrap() - rp.x[0]).abs() < 1e-15);
    }
}

#[test]
fn newton_converges_from_cold_start_on_acceptance_levels() {
    for &(p, q) in &PAIRS {
        let par = pq(p, q);
        let m = m_pq(&par);
        for k in 1..=5 {
            let z = m + (0.985 - m) * k as f64 / 5.0;
            let rp = rate_norm(z, &par).unwrap();
            assert!(rp.iterations <= MAX_NEWTON);
        }
    }
}

#[test]
fn inadmissible_levels_are_reported() {
    let par = pq(3.0, 2.0);
    let e = rate_norm(1.0133, &par).unwrap_err();
    assert!(matches!(e, SldError::NotAdmissible(_)));
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn warm_start_matches_cold_start() {
    let par = pq(4.0, 2.5);
    let x = [0.93f64.powf(2.5), 1.0];
    let cold = solve_tau(x, &par).unwrap();
    let warm = solve_tau_from(x, &par, Tilt::new(1.0, -0.2, &par).unwrap()).unwrap();
    assert!((cold.rate - warm.rate).abs() < 1e-13);
    assert!((cold.tau.tau1 - warm.tau.tau1).abs() < 1e-7);
}

#[test]
fn llambda_two_code_paths() {
    for &(p, q) in &PAIRS {
        let par = pq(p, q);
        let z = 0.5 * (m_pq(&par) + 1.0);
        let rp = rate_norm(z, &par).unwrap();
        let a = weingarten_llambda(&rp).unwrap();
        let b = implicit_curvature(&llambda_jet(&rp)).unwrap().abs();
        assert!((a - b).abs() <= 1e-12 * a);
        assert!(a > weingarten_ld(z, &par).unwrap());
    }
}

/// Trace the level set `{Lambda* = Lambda*(z*)}` around `z*` in the frame
/// (tangent, normal) and differentiate the traced curve twice.
#[test]
fn llambda_matches_traced_level_set() {
    let par = pq(2.0, 1.0);
    let z = 0.9;
    let rp = rate_norm(z, &par).unwrap();
    let c = rp.rate;
    let [t1, t2] = rp.tau.as_array();
    let nt = t1.hypot(t2);
    let nrm = [t1 / nt, t2 / nt];
    let tan = [-nrm[1], nrm[0]];
    let h = 1e-2;
    let offset = |s: f64| {
        let mut u = 0.0;
        let mut tau = rp.tau;
        for _ in 0..30 {
            let x = [rp.x[0] + s * tan[0] + u * nrm[0], rp.x[1] + s * tan[1] + u * nrm[1]];
            let r = solve_tau_from(x, &par, tau).unwrap();
            tau = r.tau;
            let g = r.rate - c;
            let dg = r.tau.tau1 * nrm[0] + r.tau.tau2 * nrm[1];
            let du = g / dg;
            u -= du;
            if du.abs() < 1e-15 {
                break;
            }
        }
        u
    };
    let (um, up) = (offset(-h), offset(h));
    let d1 = (up - um) / (2.0 * h);
    let d2 = (up + um) / (h * h);
    let traced = d2.abs() / (1.0 + d1 * d1).powf(1.5);
    let l = weingarten_llambda(&rp).unwrap();
    assert!((traced / l - 1.0).abs() < 1e-3, "{traced} vs {l}");
}

#[test]
fn conjugate_is_maximised_at_saddle() {
    let par = pq(3.0, 1.0);
    let rp = rate_norm(0.8, &par).unwrap();
    for d in [[1e-3, 0.0], [0.0, 1e-3], [-1e-3, 5e-4]] {
        let t = Tilt::new(rp.tau.tau1 + d[0], rp.tau.tau2 + d[1], &par).unwrap();
        assert!(conjugate_at(rp.x, &t, &par).unwrap() < rp.rate);
    }
}

#[test]
fn prefactor_identities_and_ranges() {
    for &(p, q) in &PAIRS {
        let par = pq(p, q);
        let m = m_pq(&par);
        for k in 1..=5 {
            let z = m + (0.98 - m) * k as f64 / 5.0;
            let pf = Prefactors::compute(z, &par).unwrap();
            let kc = kappa_closed_form(z, &pf.point, &par).unwrap().sqrt();
            assert!((pf.kappa / kc - 1.0).abs() <= 1e-8);
            let ga = gamma_assembly(z, &pf.point, &par).unwrap();
            assert!((pf.gamma / ga - 1.0).abs() <= 1e-10);
            assert!(pf.kappa > 0.0 && pf.kappa < 1.0);
            // xi^2 from the raw definition
            let h = cgf_eval(&pf.point.tau, &par).unwrap().hess;
            let [a, b] = pf.point.tau.as_array();
            let raw = h[0][0] * a * a + 2.0 * h[0][1] * a * b + h[1][1] * b * b;
            assert!((pf.xi * pf.xi / raw - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn prefactors_vanish_towards_the_mean() {
    let par = pq(2.0, 1.0);
    let m = m_pq(&par);
    let near = Prefactors::compute(m * (1.0 + 1e-4), &par).unwrap();
    let far = Prefactors::compute(m * 1.05, &par).unwrap();
    assert!(near.xi < 1e-2 * far.xi);
    assert!(near.gamma < 1e-2 * far.gamma);
}

#[test]
fn prefactors_bit_identical_on_rerun() {
    let par = pq(3.0, 2.0);
    let z = 0.5 * (m_pq(&par) + 1.0);
    let a = Prefactors::compute(z, &par).unwrap();
    let b = Prefactors::compute(z, &par).unwrap();
    assert_eq!(a.kappa.to_bits(), b.kappa.to_bits());
    assert_eq!(a, b);
}
