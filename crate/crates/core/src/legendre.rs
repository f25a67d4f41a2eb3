//! Saddle-point solver for `grad Lambda_p(tau) = x`, the Legendre transform
//! `Lambda_p^*`, rate functions and the leading-order local densities.

use crate::cgf::{cgf_eval, grad_lambda, lambda_p, CgfEval, Tilt, BOUNDARY_GUARD};
use crate::error::{invalid, Result, SldError};
use crate::gengauss::m_pq;
use crate::params::PqParams;

pub const MAX_NEWTON: usize = 50;
const NEWTON_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub x: [f64; 2],
    pub tau: Tilt,
    pub rate: f64,
    pub hess: [[f64; 2]; 2],
    pub hess_inv: [[f64; 2]; 2],
    pub iterations: usize,
}

impl RatePoint {
    pub fn det_hess(&self) -> f64 {
        det2(&self.hess)
    }
}

pub(crate) fn det2(m: &[[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub(crate) fn inv2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

fn residual(g: &[f64; 2], x: &[f64; 2]) -> [f64; 2] {
    [g[0] - x[0], g[1] - x[1]]
}

fn inf_norm(v: &[f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Solve for `tau(x)` by damped Newton from the origin.
pub fn solve_tau(x: [f64; 2], params: &PqParams) -> Result<RatePoint> {
    solve_tau_from(x, params, Tilt::origin())
}

/// As [`solve_tau`] with a caller-supplied starting tilt.
pub fn solve_tau_from(x: [f64; 2], params: &PqParams, start: Tilt) -> Result<RatePoint> {
    if !(x[0] > 0.0 && x[1] > 0.0 && x[0].is_finite() && x[1].is_finite()) {
        return Err(invalid(format!(
            "deviation point must have positive finite coordinates, got ({}, {})",
            x[0], x[1]
        )));
    }
    let (p, q) = (params.p(), params.q());
    // Tilted laws obey Jensen: (E|Y|^q)^{1/q} < (E|Y|^p)^{1/p}.
    if x[0].ln() / q >= x[1].ln() / p {
        return Err(SldError::NotAdmissible(format!(
            "x = ({}, {}) violates x1^(1/q) < x2^(1/p)",
            x[0], x[1]
        )));
    }
    let scale = 1.0f64.max(inf_norm(&x));
    let bound = params.tau2_bound() - BOUNDARY_GUARD;
    let mut tau = Tilt::new(start.tau1, start.tau2, params)?;
    let mut eval: CgfEval = cgf_eval(&tau, params)?;
    let mut r = residual(&eval.grad, &x);
    let mut polished = false;
    for it in 0..=MAX_NEWTON {
        let rn = inf_norm(&r) / scale;
        if rn <= NEWTON_TOL {
            if polished || rn == 0.0 {
                return Ok(finish(x, tau, eval, it));
            }
            polished = true;
        } else {
            polished = false;
        }
        if it == MAX_NEWTON {
            return Err(SldError::MaxIterations {
                iterations: it,
                residual: rn,
            });
        }
        let hi = inv2(&eval.hess);
        let step = [
            -(hi[0][0] * r[0] + hi[0][1] * r[1]),
            -(hi[1][0] * r[0] + hi[1][1] * r[1]),
        ];
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = [tau.tau1 + t * step[0], tau.tau2 + t * step[1]];
            if cand[1] < bound {
                let tc = Tilt {
                    tau1: cand[0],
                    tau2: cand[1],
                };
                if let Ok(g) = grad_lambda(&tc, params) {
                    let rc = residual(&g, &x);
                    let better = (rc[0].hypot(rc[1])) < (r[0].hypot(r[1])) || polished;
                    if better {
                        accepted = Some(tc);
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some(tc) = accepted else {
            let near_edge = tau.tau2 > bound - 1e-3 * (1.0 + bound.abs());
            return Err(SldError::NotAdmissible(format!(
                "Newton stagnated at tau = ({}, {}) with residual {:e}{}",
                tau.tau1,
                tau.tau2,
                inf_norm(&r) / scale,
                if near_edge { " against the tau2 boundary" } else { "" }
            )));
        };
        tau = tc;
        eval = cgf_eval(&tau, params)?;
        r = residual(&eval.grad, &x);
    }
    unreachable!()
}

fn finish(x: [f64; 2], tau: Tilt, eval: CgfEval, iterations: usize) -> RatePoint {
    let rate = (x[0] * tau.tau1 + x[1] * tau.tau2 - eval.value).max(0.0);
    RatePoint {
        x,
        tau,
        rate,
        hess: eval.hess,
        hess_inv: inv2(&eval.hess),
        iterations,
    }
}

/// `Lambda_p^*(x)` evaluated at a supplied tilt; exact when `tau = tau(x)`.
pub fn conjugate_at(x: [f64; 2], tau: &Tilt, params: &PqParams) -> Result<f64> {
    Ok(x[0] * tau.tau1 + x[1] * tau.tau2 - lambda_p(tau, params)?)
}

fn check_level(z: f64, params: &PqParams) -> Result<()> {
    if !z.is_finite() || z <= 0.0 {
        return Err(invalid(format!("deviation level must be positive and finite, got {z}")));
    }
    let m = m_pq(params);
    if z < m {
        return Err(invalid(format!("deviation level {z} is below the mean level m_pq = {m}")));
    }
    Ok(())
}

/// Rate-point at `z* = (z^q, 1)`; its rate is the rate of the rescaled q-norm.
pub fn rate_norm(z: f64, params: &PqParams) -> Result<RatePoint> {
    check_level(z, params)?;
    solve_tau([z.powf(params.q()), 1.0], params)
}

/// Rate of the rescaled q-norm under the uniform ball measure; the minimum
/// over the deviation boundary sits at `(z^q, 1, 1)`, so it equals the cone rate.
pub fn rate_uniform(z: f64, params: &PqParams) -> Result<f64> {
    Ok(rate_norm(z, params)?.rate)
}

/// Leading-order Lebesgue density of the empirical moment pair under the cone measure.
pub fn density_cone(x: [f64; 2], n: usize, params: &PqParams) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let rp = solve_tau(x, params)?;
    Ok(density_cone_at(&rp, n))
}

pub fn density_cone_at(rp: &RatePoint, n: usize) -> f64 {
    let nf = n as f64;
    nf / (2.0 * std::f64::consts::PI) * rp.det_hess().powf(-0.5) * (-nf * rp.rate).exp()
}

/// Leading-order density of (moment pair, radial factor) under the uniform measure.
pub fn density_ball(x: [f64; 2], y: f64, n: usize, params: &PqParams) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(invalid(format!("radial coordinate must lie in (0, 1], got {y}")));
    }
    let rp = solve_tau(x, params)?;
    Ok(density_ball_at(&rp, y, n))
}

pub fn density_ball_at(rp: &RatePoint, y: f64, n: usize) -> f64 {
    let nf = n as f64;
    nf * nf / (2.0 * std::f64::consts::PI) / y
        * rp.det_hess().powf(-0.5)
        * (-nf * (rp.rate - y.ln())).exp()
}
