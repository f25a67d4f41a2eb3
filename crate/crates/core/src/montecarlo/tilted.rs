//! Exact sampler for the exponentially tilted law of `|Y|`, density on
//! `[0, inf)` proportional to `exp(a y^q - c y^p)` with `c > 0`.
//!
//! Rejection from a piecewise-constant envelope on the bulk plus an
//! exponential envelope on the log-concave right tail.

use rand::Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution, Exp1};

use crate::error::{Result, SldError};

const PIECES: usize = 1024;
const DROP: f64 = 30.0;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Pow {
    One,
    Two,
    Gen(f64),
}

impl Pow {
    pub(crate) fn new(e: f64) -> Self {
        if e == 1.0 {
            Pow::One
        } else if e == 2.0 {
            Pow::Two
        } else {
            Pow::Gen(e)
        }
    }

    #[inline(always)]
    pub(crate) fn apply(&self, y: f64) -> f64 {
        match *self {
            Pow::One => y,
            Pow::Two => y * y,
            Pow::Gen(e) => y.powf(e),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TiltedAbs {
    a: f64,
    c: f64,
    pq: Pow,
    pp: Pow,
    lo: Vec<f64>,
    width: Vec<f64>,
    hat: Vec<f64>,
    squeeze: Vec<f64>,
    right: f64,
    right_log: f64,
    right_slope: f64,
    alias: WeightedAliasIndex<f64>,
}

impl TiltedAbs {
    /// Law of `|Y|` under the tilt `(tau1, tau2)` of `N_p` with q-exponent `q`.
    pub fn from_tilt(tau1: f64, tau2: f64, p: f64, q: f64) -> Result<Self> {
        Self::new(tau1, (1.0 - p * tau2) / p, p, q)
    }

    pub fn new(a: f64, c: f64, p: f64, q: f64) -> Result<Self> {
        if !(c > 0.0) || !a.is_finite() || !c.is_finite() || !(p > q) || !(q >= 1.0) {
            return Err(SldError::InvalidParameter(format!(
                "tilted sampler needs c > 0 and 1 <= q < p, got a={a}, c={c}, p={p}, q={q}"
            )));
        }
        let (pq, pp) = (Pow::new(q), Pow::new(p));
        let ell = |y: f64| a * pq.apply(y) - c * pp.apply(y);
        let dell = |y: f64| a * q * y.powf(q - 1.0) - c * p * y.powf(p - 1.0);
        let mode = if a > 0.0 {
            (a * q / (c * p)).powf(1.0 / (p - q))
        } else {
            0.0
        };
        let top = ell(mode);
        // beyond `concave_from` the log-density is concave
        let concave_from = if q > 1.0 && a > 0.0 {
            (a * q * (q - 1.0) / (c * p * (p - 1.0))).powf(1.0 / (p - q))
        } else {
            0.0
        };
        let start = mode.max(concave_from);
        let mut lo_r = start;
        let mut hi_r = if start > 0.0 { 2.0 * start } else { 1.0 };
        while ell(hi_r) > top - DROP {
            lo_r = hi_r;
            hi_r *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo_r + hi_r);
            if ell(mid) > top - DROP {
                lo_r = mid;
            } else {
                hi_r = mid;
            }
        }
        let right = hi_r.max(start * (1.0 + 1e-12) + f64::MIN_POSITIVE);
        let left = if mode > 0.0 && ell(0.0) < top - DROP {
            let (mut l, mut h) = (0.0, mode);
            for _ in 0..60 {
                let mid = 0.5 * (l + h);
                if ell(mid) < top - DROP {
                    l = mid;
                } else {
                    h = mid;
                }
            }
            l
        } else {
            0.0
        };

        let mut lo = Vec::with_capacity(PIECES + 2);
        let mut width = Vec::with_capacity(PIECES + 2);
        let mut hat = Vec::with_capacity(PIECES + 2);
        let mut squeeze = Vec::with_capacity(PIECES + 2);
        let mut mass = Vec::with_capacity(PIECES + 2);
        let mut push = |x0: f64, x1: f64| {
            let h = ell(mode.clamp(x0, x1));
            let s = ell(x0).min(ell(x1));
            lo.push(x0);
            width.push(x1 - x0);
            hat.push(h);
            squeeze.push((s - h).exp());
            mass.push((x1 - x0) * (h - top).exp());
        };
        if left > 0.0 {
            push(0.0, left);
        }
        let step = (right - left) / PIECES as f64;
        for i in 0..PIECES {
            let x0 = left + step * i as f64;
            let x1 = if i + 1 == PIECES { right } else { left + step * (i + 1) as f64 };
            push(x0, x1);
        }
        let right_log = ell(right);
        let right_slope = dell(right);
        if !(right_slope < 0.0) {
            return Err(SldError::NumericalBreakdown(format!(
                "tail envelope slope {right_slope} is not negative"
            )));
        }
        mass.push((right_log - top).exp() / -right_slope);
        let alias = WeightedAliasIndex::new(mass)
            .map_err(|e| SldError::NumericalBreakdown(format!("envelope weights: {e}")))?;
        Ok(Self {
            a,
            c,
            pq,
            pp,
            lo,
            width,
            hat,
            squeeze,
            right,
            right_log,
            right_slope,
            alias,
        })
    }

    #[inline(always)]
    fn ell(&self, y: f64) -> f64 {
        self.a * self.pq.apply(y) - self.c * self.pp.apply(y)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let tail = self.lo.len();
        loop {
            let i = self.alias.sample(rng);
            if i == tail {
                let e: f64 = Exp1.sample(rng);
                let y = self.right + e / -self.right_slope;
                let env = self.right_log + self.right_slope * (y - self.right);
                let v: f64 = rng.random();
                if v.ln() <= self.ell(y) - env {
                    return y;
                }
                continue;
            }
            let y = self.lo[i] + self.width[i] * rng.random::<f64>();
            let v: f64 = rng.random();
            if v <= self.squeeze[i] || v <= (self.ell(y) - self.hat[i]).exp() {
                return y;
            }
        }
    }
}
