//! Joint cumulant generating function of `(|Y|^q, |Y|^p)`, Y ~ N_p.
//!
//! Every quantity reduces to one-sided integrals of
//! `x^k exp(a x^q - c x^p)` over `[0, inf)`. The main route rescales
//! `x = (1 - p tau2)^{1/p} y` so only a q-tilt remains (`c = 1/p`); the direct
//! route keeps both exponents (`c = (1 - p tau2)/p`).

use crate::error::{Result, SldError};
use crate::gengauss::log_norm_const;
use crate::params::PqParams;
use crate::quad::integrate;

/// Relative accuracy requested from the quadrature.
const QUAD_TOL: f64 = 1e-13;
/// Relative error above which an integral is reported as failed.
const QUAD_FAIL: f64 = 1e-10;
const MAX_INTERVALS: usize = 3000;
/// Log-integrand drop at which the upper tail is cut (e^-40 ~ 4e-18).
const TAIL_DROP: f64 = 40.0;
/// Margin below `1/p` treated as outside the domain.
pub const BOUNDARY_GUARD: f64 = 1e-8;

/// A point of the effective domain `R x (-inf, 1/p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tilt {
    pub tau1: f64,
    pub tau2: f64,
}

impl Tilt {
    pub fn new(tau1: f64, tau2: f64, params: &PqParams) -> Result<Self> {
        if !tau1.is_finite() || !tau2.is_finite() {
            return Err(SldError::InvalidParameter(format!(
                "tilt must be finite, got ({tau1}, {tau2})"
            )));
        }
        let bound = params.tau2_bound() - BOUNDARY_GUARD;
        if tau2 >= bound {
            return Err(SldError::DomainViolation { tau2, bound });
        }
        Ok(Self { tau1, tau2 })
    }

    pub fn origin() -> Self {
        Self { tau1: 0.0, tau2: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.tau1, self.tau2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfEval {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

/// Log-integrand `a x^q - c x^p + k ln x` and its support on `[0, inf)`.
#[derive(Debug, Clone, Copy)]
struct Family {
    a: f64,
    c: f64,
    p: f64,
    q: f64,
}

impl Family {
    #[inline]
    fn g(&self, x: f64) -> f64 {
        self.a * x.powf(self.q) - self.c * x.powf(self.p)
    }

    fn ell(&self, x: f64, k: f64) -> f64 {
        if k == 0.0 {
            self.g(x)
        } else {
            self.g(x) + k * x.ln()
        }
    }

    /// Unique maximiser of `ell(., k)`; `x * d/dx ell` is positive left of it.
    fn peak(&self, k: f64) -> f64 {
        if k == 0.0 && self.a <= 0.0 {
            return 0.0;
        }
        if k == 0.0 {
            return (self.a * self.q / (self.c * self.p)).powf(1.0 / (self.p - self.q));
        }
        let h = |x: f64| self.a * self.q * x.powf(self.q) - self.c * self.p * x.powf(self.p) + k;
        let mut hi = 1.0;
        while h(hi) > 0.0 {
            hi *= 2.0;
        }
        let mut lo = hi * 0.5;
        while h(lo) <= 0.0 {
            lo *= 0.5;
        }
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Point right of the `k`-peak where `ell` has dropped by `TAIL_DROP`.
    fn cutoff(&self, k: f64) -> f64 {
        let pk = self.peak(k);
        let top = if pk > 0.0 { self.ell(pk, k) } else { 0.0 };
        let target = top - TAIL_DROP;
        let mut lo = pk;
        let mut hi = if pk > 0.0 { 2.0 * pk } else { 1.0 };
        while self.ell(hi, k) > target {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.ell(mid, k) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn breaks(&self, kmax: f64) -> (Vec<f64>, f64) {
        let x0 = self.peak(0.0);
        let xk = self.peak(kmax);
        let end = self.cutoff(kmax).max(self.cutoff(0.0));
        let mut b = vec![0.0];
        for x in [x0, xk] {
            if x > 0.0 && x < end && b.iter().all(|&v| (v - x).abs() > 1e-9 * end) {
                b.push(x);
            }
        }
        b.push(end);
        b.sort_by(|u, v| u.partial_cmp(v).unwrap());
        let gref = if x0 > 0.0 { self.g(x0) } else { 0.0 };
        (b, gref)
    }

    fn check(&self, r: f64) -> Result<()> {
        if r > QUAD_FAIL || !r.is_finite() {
            return Err(SldError::QuadratureFailure {
                achieved: r,
                target: QUAD_FAIL,
            });
        }
        Ok(())
    }

    /// `(gref, ln I0)` with `I0 = int_0^inf exp(g) dx = exp(gref) * exp(ln I0 scaled)`.
    fn log_mass(&self) -> Result<f64> {
        let (b, gref) = self.breaks(0.0);
        let r = integrate(|x| [(self.g(x) - gref).exp()], &b, QUAD_TOL, MAX_INTERVALS);
        self.check(r.rel_error())?;
        Ok(gref + r.value[0].ln())
    }

    /// `(ln I0, E x^q, E x^p)` under the normalised density `exp(g)/I0`.
    fn first_moments(&self) -> Result<(f64, f64, f64)> {
        let (b, gref) = self.breaks(self.p);
        let (p, q) = (self.p, self.q);
        let r = integrate(
            |x| {
                let w = (self.g(x) - gref).exp();
                [w, w * x.powf(q), w * x.powf(p)]
            },
            &b,
            QUAD_TOL,
            MAX_INTERVALS,
        );
        self.check(r.rel_error())?;
        let i0 = r.value[0];
        Ok((gref + i0.ln(), r.value[1] / i0, r.value[2] / i0))
    }

    /// Central second moments `(Var x^q, Cov(x^q, x^p), Var x^p)`, two-pass.
    fn second_moments(&self, mq: f64, mp: f64) -> Result<[f64; 3]> {
        let (b, gref) = self.breaks(2.0 * self.p);
        let (p, q) = (self.p, self.q);
        let r = integrate(
            |x| {
                let w = (self.g(x) - gref).exp();
                let dq = x.powf(q) - mq;
                let dp = x.powf(p) - mp;
                [w, w * dq * dq, w * dq * dp, w * dp * dp]
            },
            &b,
            QUAD_TOL,
            MAX_INTERVALS,
        );
        self.check(r.rel_error())?;
        let i0 = r.value[0];
        Ok([r.value[1] / i0, r.value[2] / i0, r.value[3] / i0])
    }
}

fn check_tilt(tau: &Tilt, params: &PqParams) -> Result<()> {
    Tilt::new(tau.tau1, tau.tau2, params).map(|_| ())
}

/// `(b, s)` with `b = 1 - p tau2` and `s = tau1 b^{-q/p}`.
fn reduce(tau: &Tilt, params: &PqParams) -> (f64, f64) {
    let (p, q) = (params.p(), params.q());
    let b = 1.0 - p * tau.tau2;
    (b, tau.tau1 * b.powf(-q / p))
}

fn reduced_family(s: f64, params: &PqParams) -> Family {
    Family {
        a: s,
        c: 1.0 / params.p(),
        p: params.p(),
        q: params.q(),
    }
}

/// `log E exp(t |X|^q)`, X ~ N_p.
pub fn log_phi_absq(t: f64, params: &PqParams) -> Result<f64> {
    if !t.is_finite() {
        return Err(SldError::InvalidParameter("mgf argument must be finite".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let half_norm = log_norm_const(params.p()) - std::f64::consts::LN_2;
    Ok(reduced_family(t, params).log_mass()? - half_norm)
}

/// `E exp(t |X|^q)`, X ~ N_p.
pub fn phi_absq(t: f64, params: &PqParams) -> Result<f64> {
    Ok(log_phi_absq(t, params)?.exp())
}

/// `Lambda_p(tau)` through the one-exponent reduction.
pub fn lambda_p(tau: &Tilt, params: &PqParams) -> Result<f64> {
    check_tilt(tau, params)?;
    let (b, s) = reduce(tau, params);
    Ok(-b.ln() / params.p() + log_phi_absq(s, params)?)
}

/// `Lambda_p(tau)` by quadrature of the two-exponent integrand, no rescaling.
pub fn lambda_p_direct(tau: &Tilt, params: &PqParams) -> Result<f64> {
    check_tilt(tau, params)?;
    let fam = direct_family(tau, params);
    let half_norm = log_norm_const(params.p()) - std::f64::consts::LN_2;
    Ok(fam.log_mass()? - half_norm)
}

fn direct_family(tau: &Tilt, params: &PqParams) -> Family {
    let p = params.p();
    Family {
        a: tau.tau1,
        c: (1.0 - p * tau.tau2) / p,
        p,
        q: params.q(),
    }
}

/// Tilted means `(E_tau |Y|^q, E_tau |Y|^p)`.
pub fn grad_lambda(tau: &Tilt, params: &PqParams) -> Result<[f64; 2]> {
    check_tilt(tau, params)?;
    let (b, s) = reduce(tau, params);
    let (_, mq, mp) = reduced_family(s, params).first_moments()?;
    Ok([b.powf(-params.q() / params.p()) * mq, mp / b])
}

/// Tilted means computed on the two-exponent integrand.
pub fn grad_lambda_direct(tau: &Tilt, params: &PqParams) -> Result<[f64; 2]> {
    check_tilt(tau, params)?;
    let (_, mq, mp) = direct_family(tau, params).first_moments()?;
    Ok([mq, mp])
}

/// Tilted covariance matrix of `(|Y|^q, |Y|^p)`.
pub fn hess_lambda(tau: &Tilt, params: &PqParams) -> Result<[[f64; 2]; 2]> {
    Ok(cgf_eval(tau, params)?.hess)
}

/// Value, gradient and Hessian at one tilt.
pub fn cgf_eval(tau: &Tilt, params: &PqParams) -> Result<CgfEval> {
    check_tilt(tau, params)?;
    let (p, q) = (params.p(), params.q());
    let (b, s) = reduce(tau, params);
    let fam = reduced_family(s, params);
    let (log_mass, mq, mp) = fam.first_moments()?;
    let [vqq, vqp, vpp] = fam.second_moments(mq, mp)?;
    let half_norm = log_norm_const(p) - std::f64::consts::LN_2;
    let sq = b.powf(-q / p);
    let hess = [
        [sq * sq * vqq, sq / b * vqp],
        [sq / b * vqp, vpp / (b * b)],
    ];
    let det = hess[0][0] * hess[1][1] - hess[0][1] * hess[1][0];
    if !(hess[0][0] > 0.0 && hess[1][1] > 0.0 && det > 0.0) {
        return Err(SldError::NumericalBreakdown(format!(
            "tilted covariance not positive definite at ({}, {}): det = {det:e}",
            tau.tau1, tau.tau2
        )));
    }
    Ok(CgfEval {
        value: -b.ln() / p + log_mass - half_norm,
        grad: [sq * mq, mp / b],
        hess,
    })
}
