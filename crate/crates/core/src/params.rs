use crate::error::{invalid, Result};

/// Exponent pair with `1 <= q < p < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqParams {
    p: f64,
    q: f64,
}

impl PqParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(invalid(format!("exponents must be finite, got p={p}, q={q}")));
        }
        if q < 1.0 {
            return Err(invalid(format!("q must be >= 1, got {q}")));
        }
        if q >= p {
            return Err(invalid(format!("need q < p, got p={p}, q={q}")));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Upper end of the effective domain in the second tilt coordinate.
    pub fn tau2_bound(&self) -> f64 {
        1.0 / self.p
    }
}
