//! Prefactors and leading-order sharp tail estimates for the rescaled q-norm
//! `n^{1/p - 1/q} ||Z||_q`, plus the ball-intersection and projection
//! applications.

use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result, SldError};
use crate::gengauss::m_pq;
use crate::geometry::{weingarten_ld, weingarten_llambda};
use crate::legendre::{rate_norm, RatePoint};
use crate::montecarlo::Exec;
use crate::params::PqParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Cone,
    Uniform,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Cone => "cone",
            Measure::Uniform => "uniform",
        }
    }
}

/// Whether the leading-order value can be read as a probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ValidAsymptotic,
    InvalidAsymptotic,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::ValidAsymptotic => "valid-asymptotic",
            Regime::InvalidAsymptotic => "invalid-asymptotic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SldEstimate {
    pub n: usize,
    pub z: f64,
    pub rate: f64,
    pub prefactor: f64,
    pub log_probability: f64,
    pub probability: f64,
    pub measure: Measure,
    pub regime: Regime,
}

/// Everything the tail formulas need at one deviation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prefactors {
    pub z: f64,
    pub point: RatePoint,
    pub xi: f64,
    pub kappa: f64,
    pub kappa_closed: f64,
    pub gamma: f64,
    pub gamma_assembly: f64,
    pub l_d: f64,
    pub l_lambda: f64,
}

impl Prefactors {
    pub fn compute(z: f64, params: &PqParams) -> Result<Self> {
        let m = m_pq(params);
        if !(z > m) {
            return Err(invalid(format!("deviation level {z} must exceed m_pq = {m}")));
        }
        let point = rate_norm(z, params)?;
        if point.tau.tau1 == 0.0 && point.tau.tau2 == 0.0 {
            return Err(SldError::DegenerateTilt);
        }
        let l_d = weingarten_ld(z, params)?;
        let l_lambda = weingarten_llambda(&point)?;
        let k2 = 1.0 - l_d / l_lambda;
        if !(k2 > 0.0) {
            return Err(SldError::ComplexKappa(k2));
        }
        Ok(Self {
            z,
            point,
            xi: xi_from(&point),
            kappa: k2.sqrt(),
            kappa_closed: kappa_closed_form(z, &point, params)?.sqrt(),
            gamma: gamma_from(z, &point, params)?,
            gamma_assembly: gamma_assembly(z, &point, params)?,
            l_d,
            l_lambda,
        })
    }

    pub fn tail(&self, n: usize, measure: Measure) -> Result<SldEstimate> {
        if n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        let nf = n as f64;
        let denom = match measure {
            Measure::Cone => self.kappa * self.xi,
            Measure::Uniform => self.gamma,
        };
        let log_prefactor = -0.5 * (2.0 * std::f64::consts::PI * nf).ln() - denom.ln();
        let log_probability = log_prefactor - nf * self.point.rate;
        let probability = log_probability.exp();
        Ok(SldEstimate {
            n,
            z: self.z,
            rate: self.point.rate,
            prefactor: log_prefactor.exp(),
            log_probability,
            probability,
            measure,
            regime: if probability >= 1.0 {
                Regime::InvalidAsymptotic
            } else {
                Regime::ValidAsymptotic
            },
        })
    }
}

/// `sqrt(<H tau, tau>)`.
fn xi_from(rp: &RatePoint) -> f64 {
    let [t1, t2] = rp.tau.as_array();
    let h = &rp.hess;
    (h[0][0] * t1 * t1 + 2.0 * h[0][1] * t1 * t2 + h[1][1] * t2 * t2).sqrt()
}

/// `kappa^2` written as one closed-form fraction in `tau`, `H^{-1}` and `z`.
pub fn kappa_closed_form(z: f64, rp: &RatePoint, params: &PqParams) -> Result<f64> {
    let (p, q) = (params.p(), params.q());
    let [t1, t2] = rp.tau.as_array();
    let hi = &rp.hess_inv;
    let zq = z.powf(q);
    let quad = (t2 * t2 * hi[0][0] - 2.0 * t1 * t2 * hi[0][1] + t1 * t1 * hi[1][1]).abs();
    if quad == 0.0 {
        return Err(SldError::DegenerateTilt);
    }
    let num = (t1 * t1 + t2 * t2).powf(1.5) * p * (p - q) * zq;
    let den = quad * q * q * (zq * zq + p * p / (q * q)).powf(1.5);
    let k2 = 1.0 - num / den;
    if !(k2 > 0.0) {
        return Err(SldError::ComplexKappa(k2));
    }
    Ok(k2)
}

/// Bracketed second derivative entering `gamma`.
fn gamma_bracket(z: f64, rp: &RatePoint, params: &PqParams) -> Result<f64> {
    let (p, q) = (params.p(), params.q());
    let t1 = rp.tau.tau1;
    let hi = &rp.hess_inv;
    let zq = z.powf(q);
    let b = zq * zq * q * q / (p * p) * hi[0][0]
        + 2.0 * zq * q / p * hi[0][1]
        + hi[1][1]
        + t1 * zq * q * (q - p) / (p * p);
    if !(b > 0.0) {
        return Err(SldError::NegativeBracket(b));
    }
    Ok(b)
}

fn gamma_from(z: f64, rp: &RatePoint, params: &PqParams) -> Result<f64> {
    let q = params.q();
    let t1 = rp.tau.tau1;
    let f010 = q * z.powf(q) * t1 + 1.0;
    let g2 = rp.det_hess() * t1 * t1 * f010 * f010 * gamma_bracket(z, rp, params)?;
    Ok(g2.sqrt())
}

/// `gamma` rebuilt from the transformed-coordinate derivatives:
/// `1/gamma = g(0) / (f100 f010 sqrt(f002))` with `g(0) = det(H)^{-1/2}`.
pub fn gamma_assembly(z: f64, rp: &RatePoint, params: &PqParams) -> Result<f64> {
    let q = params.q();
    let g0 = rp.det_hess().powf(-0.5);
    let f100 = rp.tau.tau1;
    let f010 = q * z.powf(q) * rp.tau.tau1 + 1.0;
    let f002 = gamma_bracket(z, rp, params)?;
    let inv = g0 / (f100 * f010 * f002.sqrt());
    Ok(1.0 / inv)
}

pub fn xi(z: f64, params: &PqParams) -> Result<f64> {
    Ok(Prefactors::compute(z, params)?.xi)
}

pub fn kappa(z: f64, params: &PqParams) -> Result<f64> {
    Ok(Prefactors::compute(z, params)?.kappa)
}

pub fn gamma(z: f64, params: &PqParams) -> Result<f64> {
    Ok(Prefactors::compute(z, params)?.gamma)
}

/// `P(n^{1/p-1/q} ||Z||_q > z)`, Z uniform on the cone measure of the l_p^n sphere.
pub fn tail_cone(n: usize, z: f64, params: &PqParams) -> Result<SldEstimate> {
    Prefactors::compute(z, params)?.tail(n, Measure::Cone)
}

/// Same tail for Z uniform in the l_p^n ball.
pub fn tail_ball(n: usize, z: f64, params: &PqParams) -> Result<SldEstimate> {
    Prefactors::compute(z, params)?.tail(n, Measure::Uniform)
}

/// `log vol_n(B_p^n)`.
pub fn log_ball_volume(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    nf * (std::f64::consts::LN_2 + ln_gamma(1.0 + 1.0 / p)) - ln_gamma(1.0 + nf / p)
}

/// `n^{1/p} vol_n(B_p^n)^{1/n}`.
pub fn c_np(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    (nf.ln() / p + log_ball_volume(n, p) / nf).exp()
}

/// `lim c_{n,p} = 2 e^{1/p} p^{1/p} Gamma(1 + 1/p)`.
pub fn c_p(p: f64) -> f64 {
    2.0 * (1.0 / p + p.ln() / p + ln_gamma(1.0 + 1.0 / p)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallConstants {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub log_vol: f64,
    pub c_np: f64,
    pub c_p: f64,
    pub c_npq: f64,
    pub a_npq: f64,
    pub a_pq: f64,
}

pub fn ball_constants(n: usize, params: &PqParams) -> Result<BallConstants> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let (p, q) = (params.p(), params.q());
    let m = m_pq(params);
    let cnp = c_np(n, p);
    let cnq = c_np(n, q);
    Ok(BallConstants {
        n,
        p,
        q,
        log_vol: log_ball_volume(n, p),
        c_np: cnp,
        c_p: c_p(p),
        c_npq: cnp / cnq,
        a_npq: cnp / (m * cnq),
        a_pq: a_pq(params),
    })
}

/// `lim A_{n,p,q} = c_p / (m_pq c_q)`.
pub fn a_pq(params: &PqParams) -> f64 {
    c_p(params.p()) / (m_pq(params) * c_p(params.q()))
}

/// Gamma-function form of `A_{p,q}`.
pub fn a_pq_closed_form(params: &PqParams) -> f64 {
    let (p, q) = (params.p(), params.q());
    let lg = (1.0 + 1.0 / q) * ln_gamma(1.0 + 1.0 / p)
        - ln_gamma(1.0 + 1.0 / q)
        - ln_gamma((q + 1.0) / p) / q
        + (p / q).ln() / q
        + 1.0 / p
        - 1.0 / q;
    lg.exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeRegime {
    /// `1 - tail_ball` at the effective level.
    Asymptotic,
    /// Effective level at or above the Hoelder bound 1: the intersection is the whole ball.
    FullContainment,
}

impl VolumeRegime {
    pub fn as_str(&self) -> &'static str {
        match self {
            VolumeRegime::Asymptotic => "asymptotic",
            VolumeRegime::FullContainment => "full-containment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionVolume {
    pub n: usize,
    pub t: f64,
    pub a_t: f64,
    pub z_eff: f64,
    pub volume: f64,
    pub tail: Option<SldEstimate>,
    pub regime: VolumeRegime,
}

/// `vol_n(D_p^n cap t D_q^n)` for volume-normalised balls in the limit-1 regime.
pub fn intersection_volume(n: usize, t: f64, params: &PqParams) -> Result<IntersectionVolume> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be positive and finite, got {t}")));
    }
    let bc = ball_constants(n, params)?;
    let a_t = bc.a_pq * t;
    if !(a_t > 1.0) {
        return Err(SldError::RegimeViolation(format!(
            "A_pq * t = {a_t} <= 1; only the limit-1 regime has a sharp estimate"
        )));
    }
    let z_eff = t * bc.c_npq;
    let m = m_pq(params);
    if !(z_eff > m) {
        return Err(SldError::RegimeViolation(format!(
            "effective level t c_npq = {z_eff} does not exceed m_pq = {m} at n = {n}"
        )));
    }
    // n^{1/p-1/q} ||x||_q <= ||x||_p <= 1 on the ball
    if z_eff >= 1.0 {
        return Ok(IntersectionVolume {
            n,
            t,
            a_t,
            z_eff,
            volume: 1.0,
            tail: None,
            regime: VolumeRegime::FullContainment,
        });
    }
    let tail = tail_ball(n, z_eff, params)?;
    Ok(IntersectionVolume {
        n,
        t,
        a_t,
        z_eff,
        volume: 1.0 - tail.probability,
        tail: Some(tail),
        regime: VolumeRegime::Asymptotic,
    })
}

/// Hoelder conjugate, with `inf -> 1`.
pub fn conjugate_exponent(q: f64) -> Result<f64> {
    if q == f64::INFINITY {
        return Ok(1.0);
    }
    if !(q > 1.0) || q.is_nan() {
        return Err(invalid(format!("exponent must exceed 1, got {q}")));
    }
    Ok(q / (q - 1.0))
}

/// Exponent pair `(2, q*)` used for projections of `B_q^n`.
pub fn projection_params(q_proj: f64) -> Result<PqParams> {
    if !(q_proj > 2.0) {
        return Err(invalid(format!("projection exponent must exceed 2, got {q_proj}")));
    }
    PqParams::new(2.0, conjugate_exponent(q_proj)?)
}

/// Tail of the rescaled projection length `n^{1/2-1/q*} vol_1(P_theta B_q^n) > z`,
/// theta from the cone measure of the Euclidean sphere.
pub fn projection_tail(n: usize, q_proj: f64, z: f64) -> Result<SldEstimate> {
    let params = projection_params(q_proj)?;
    let m = m_pq(&params);
    if !(z > 2.0 * m) {
        return Err(invalid(format!("z must exceed 2 m_(2,q*) = {}", 2.0 * m)));
    }
    tail_cone(n, 0.5 * z, &params)
}

/// Prefactors over a grid of levels, in grid order.
pub fn prefactor_grid(zs: &[f64], params: &PqParams, exec: Exec) -> Vec<Result<Prefactors>> {
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            zs.par_iter().map(|&z| Prefactors::compute(z, params)).collect()
        }
        _ => zs.iter().map(|&z| Prefactors::compute(z, params)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pq(p: f64, q: f64) -> PqParams {
        PqParams::new(p, q).unwrap()
    }

    #[test]
    fn dual_paths_agree() {
        for (p, q, z) in [(2.0, 1.0, 0.9), (3.0, 2.0, 0.95), (4.0, 2.5, 0.96), (1.5, 1.0, 0.9)] {
            let par = pq(p, q);
            let pf = Prefactors::compute(z, &par).unwrap();
            assert!((pf.kappa / pf.kappa_closed - 1.0).abs() < 1e-8);
            assert!((pf.gamma / pf.gamma_assembly - 1.0).abs() < 1e-10);
            assert!(pf.kappa > 0.0 && pf.kappa < 1.0);
            assert!(pf.l_lambda > pf.l_d);
        }
    }

    #[test]
    fn reference_values_21() {
        let par = pq(2.0, 1.0);
        let pf = Prefactors::compute(0.9, &par).unwrap();
        assert!((pf.point.rate - 0.16246).abs() < 2e-5);
        assert!((pf.xi - 0.48700).abs() < 1e-4);
        assert!((pf.kappa - 0.60387).abs() < 1e-4);
        assert!((pf.gamma - 1.31883).abs() < 1e-4);
        // stationarity on the deviation boundary
        let t = pf.point.tau;
        assert!((t.tau2 + 0.5 * 0.9 * t.tau1).abs() < 1e-8);
    }

    #[test]
    fn tails_share_rate() {
        let par = pq(2.0, 1.0);
        let pf = Prefactors::compute(1.0 - 0.1, &par).unwrap();
        let mut diffs = vec![];
        for n in [50, 100, 400] {
            let c = pf.tail(n, Measure::Cone).unwrap();
            let b = pf.tail(n, Measure::Uniform).unwrap();
            assert_eq!(c.rate, b.rate);
            diffs.push(c.log_probability - b.log_probability);
        }
        let want = pf.gamma.ln() - (pf.kappa * pf.xi).ln();
        for d in diffs {
            assert!((d - want).abs() < 1e-12);
        }
        assert_ne!(pf.gamma, pf.kappa * pf.xi);
    }

    #[test]
    fn invalid_regime_near_mean() {
        let par = pq(2.0, 1.0);
        let z = m_pq(&par) * (1.0 + 1e-3);
        let e = tail_cone(10, z, &par).unwrap();
        assert_eq!(e.regime, Regime::InvalidAsymptotic);
        assert!(matches!(tail_cone(10, m_pq(&par), &par), Err(SldError::InvalidParameter(_))));
    }

    #[test]
    fn constants() {
        let v = log_ball_volume(2, 2.0).exp();
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
        let mut fact = 1.0;
        for n in 1..=6usize {
            fact *= n as f64;
            let v = log_ball_volume(n, 1.0).exp();
            assert!((v - 2f64.powi(n as i32) / fact).abs() < 1e-12);
        }
        let mut prev = f64::INFINITY;
        for n in [10, 100, 1000, 10000] {
            let d = (c_np(n, 2.0) - c_p(2.0)).abs();
            assert!(d < prev);
            prev = d;
        }
        for (p, q) in [(2.0, 1.0), (3.0, 1.5), (4.0, 2.5)] {
            let par = pq(p, q);
            assert!((a_pq(&par) / a_pq_closed_form(&par) - 1.0).abs() < 1e-12);
            let bc = ball_constants(200_000, &par).unwrap();
            assert!((bc.a_npq / bc.a_pq - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn intersection_regimes() {
        let par = pq(2.0, 1.0);
        let a = a_pq(&par);
        assert!(matches!(
            intersection_volume(100, 1.0 / a, &par),
            Err(SldError::RegimeViolation(_))
        ));
        let full = intersection_volume(100, 1.3 / a, &par).unwrap();
        assert_eq!(full.regime, VolumeRegime::FullContainment);
        assert_eq!(full.volume, 1.0);
        let mut prev = 0.0;
        for k in 0..6 {
            let t = (1.15 + 0.02 * k as f64) / a;
            let iv = intersection_volume(100, t, &par).unwrap();
            assert!(iv.volume >= prev);
            prev = iv.volume;
        }
    }

    #[test]
    fn projection_mapping() {
        assert_eq!(conjugate_exponent(f64::INFINITY).unwrap(), 1.0);
        assert!((conjugate_exponent(4.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let par = pq(2.0, 1.0);
        let a = projection_tail(100, f64::INFINITY, 1.8).unwrap();
        let b = tail_cone(100, 0.9, &par).unwrap();
        assert_eq!(a, b);
        assert!(projection_tail(100, 2.0, 1.8).is_err());
        let p43 = projection_params(4.0).unwrap();
        let e = projection_tail(100, 4.0, 2.2 * m_pq(&p43)).unwrap();
        assert!(e.probability.is_finite() && e.probability > 0.0);
    }
}
