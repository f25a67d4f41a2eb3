//! Curvature of planar curves and the two curvatures compared at the rate
//! minimiser: the deviation boundary `L_D` and the rate level set `L_Lambda`.

use crate::error::{invalid, Result, SldError};
use crate::legendre::RatePoint;
use crate::params::PqParams;

/// First and second partials of `F` at a point of the curve `F = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveJet2 {
    pub f10: f64,
    pub f01: f64,
    pub f20: f64,
    pub f11: f64,
    pub f02: f64,
}

impl CurveJet2 {
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            f10: c * self.f10,
            f01: c * self.f01,
            f20: c * self.f20,
            f11: c * self.f11,
            f02: c * self.f02,
        }
    }
}

/// Signed curvature of the implicit curve.
pub fn implicit_curvature(jet: &CurveJet2) -> Result<f64> {
    let CurveJet2 { f10, f01, f20, f11, f02 } = *jet;
    let g2 = f10 * f10 + f01 * f01;
    if g2 == 0.0 {
        return Err(SldError::ZeroGradient);
    }
    Ok((f01 * f01 * f20 - 2.0 * f01 * f10 * f11 + f10 * f10 * f02) / g2.powf(1.5))
}

/// Absolute curvature of the graph of a function.
pub fn graph_curvature(fprime: f64, fsecond: f64) -> f64 {
    fsecond.abs() / (1.0 + fprime * fprime).powf(1.5)
}

/// Curvature of the deviation boundary `t2 = z^{-p} t1^{p/q}` at `(z^q, 1)`.
pub fn weingarten_ld(z: f64, params: &PqParams) -> Result<f64> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid(format!("z must be positive and finite, got {z}")));
    }
    let (p, q) = (params.p(), params.q());
    let zq = z.powf(q);
    let r = p / q;
    Ok(p * (p - q) / (q * q) * zq / (zq * zq + r * r).powf(1.5))
}

/// Implicit-curve jet of `Lambda_p^*(x) - const` at the rate point.
pub fn llambda_jet(rp: &RatePoint) -> CurveJet2 {
    CurveJet2 {
        f10: rp.tau.tau1,
        f01: rp.tau.tau2,
        f20: rp.hess_inv[0][0],
        f11: rp.hess_inv[0][1],
        f02: rp.hess_inv[1][1],
    }
}

/// Curvature of the level set of `Lambda_p^*` through the rate point.
pub fn weingarten_llambda(rp: &RatePoint) -> Result<f64> {
    let (t1, t2) = (rp.tau.tau1, rp.tau.tau2);
    if t1 == 0.0 && t2 == 0.0 {
        return Err(SldError::DegenerateTilt);
    }
    let h = &rp.hess_inv;
    let num = t2 * t2 * h[0][0] - 2.0 * t1 * t2 * h[0][1] + t1 * t1 * h[1][1];
    Ok(num.abs() / (t1 * t1 + t2 * t2).powf(1.5))
}
