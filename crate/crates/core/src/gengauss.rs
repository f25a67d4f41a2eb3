//! Generalized Gaussian law N_p with density proportional to `exp(-|y|^p / p)`,
//! its absolute moments, and samplers for the cone and uniform measures on
//! l_p^n spheres and balls.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::params::PqParams;

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(invalid(format!("exponent p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

/// `log(2 p^{1/p} Gamma(1 + 1/p))`, the log normalising constant of f_p.
pub fn log_norm_const(p: f64) -> f64 {
    std::f64::consts::LN_2 + p.ln() / p + ln_gamma(1.0 + 1.0 / p)
}

pub fn density_fp(y: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if !y.is_finite() {
        return Err(invalid("density argument must be finite"));
    }
    Ok((-y.abs().powf(p) / p - log_norm_const(p)).exp())
}

/// `log M_p(r)`.
pub fn log_moment_mp(p: f64, r: f64) -> Result<f64> {
    check_p(p)?;
    if !(r > -1.0) || !r.is_finite() {
        return Err(invalid(format!("moment order must be > -1, got {r}")));
    }
    Ok(r / p * p.ln() + ln_gamma(1.0 + (r + 1.0) / p) - (r + 1.0).ln() - ln_gamma(1.0 + 1.0 / p))
}

/// Absolute moment `E|X|^r`, X ~ N_p.
pub fn moment_mp(p: f64, r: f64) -> Result<f64> {
    Ok(log_moment_mp(p, r)?.exp())
}

/// Law-of-large-numbers limit `m_{p,q} = M_p(q)^{1/q}` of the rescaled q-norm.
pub fn m_pq(params: &PqParams) -> f64 {
    let q = params.q();
    (log_moment_mp(params.p(), q).expect("validated params") / q).exp()
}

/// Sampler for N_p. `p = 2` draws standard normals directly.
#[derive(Debug, Clone)]
pub struct NpSampler {
    p: f64,
    gamma: Option<Gamma<f64>>,
}

impl NpSampler {
    pub fn new(p: f64) -> Result<Self> {
        check_p(p)?;
        let gamma = if p == 2.0 {
            None
        } else {
            Some(Gamma::new(1.0 / p, p).map_err(|e| invalid(e.to_string()))?)
        };
        Ok(Self { p, gamma })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Draw `|X|`.
    #[inline]
    pub fn sample_abs<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.gamma {
            None => {
                let z: f64 = StandardNormal.sample(rng);
                z.abs()
            }
            Some(g) => {
                let v = g.sample(rng);
                if self.p == 1.0 {
                    v
                } else {
                    v.powf(1.0 / self.p)
                }
            }
        }
    }

    /// Draw signed `X`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.gamma {
            None => StandardNormal.sample(rng),
            Some(_) => {
                let a = self.sample_abs(rng);
                if rng.random::<bool>() {
                    a
                } else {
                    -a
                }
            }
        }
    }
}

pub fn sample_np<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<f64> {
    Ok(NpSampler::new(p)?.sample(rng))
}

/// Point of R^n tagged with the exponent of the sphere/ball it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct LpVector {
    pub coords: Vec<f64>,
    pub p: f64,
}

impl LpVector {
    pub fn norm(&self, r: f64) -> Result<f64> {
        lp_norm(&self.coords, r)
    }
}

/// `(sum |x_i|^p)^{1/p}`, or `max |x_i|` for `p = inf`. Coordinates are
/// rescaled by the largest magnitude first, and the sum is compensated.
pub fn lp_norm(x: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid(format!("norm exponent must be >= 1, got {p}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("coordinates must be finite"));
    }
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if p == f64::INFINITY || m == 0.0 {
        return Ok(m);
    }
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for v in x {
        let t = (v.abs() / m).powf(p);
        let y = s + t;
        if s.abs() >= t {
            c += (s - y) + t;
        } else {
            c += (t - y) + s;
        }
        s = y;
    }
    Ok(m * (s + c).powf(1.0 / p))
}

fn normalized_draw<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("dimension n must be >= 1"));
    }
    let s = NpSampler::new(p)?;
    let y: Vec<f64> = (0..n).map(|_| s.sample(rng)).collect();
    let norm = lp_norm(&y, p)?;
    Ok(y.into_iter().map(|v| v / norm).collect())
}

/// Cone measure on the unit l_p^n sphere, `Y / ||Y||_p`.
pub fn sample_cone<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<LpVector> {
    Ok(LpVector {
        coords: normalized_draw(n, p, rng)?,
        p,
    })
}

/// Uniform measure on the unit l_p^n ball, `U^{1/n} Y / ||Y||_p`.
pub fn sample_ball<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<LpVector> {
    let mut coords = normalized_draw(n, p, rng)?;
    let u: f64 = rng.random();
    let r = u.powf(1.0 / n as f64);
    coords.iter_mut().for_each(|c| *c *= r);
    Ok(LpVector { coords, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate1;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn density_values() {
        assert!((density_fp(0.0, 2.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((density_fp(0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(density_fp(1.0, 0.5).is_err());
        assert_eq!(density_fp(1.3, 3.0).unwrap(), density_fp(-1.3, 3.0).unwrap());
    }

    #[test]
    fn density_integrates_to_one() {
        for &p in &[1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0] {
            let (v, _) = integrate1(|y| 2.0 * density_fp(y, p).unwrap(), 0.0, 60.0, 1e-13);
            assert!((v - 1.0).abs() < 1e-10, "p={p} v={v}");
        }
    }

    #[test]
    fn moments() {
        for &p in &[1.0, 1.5, 2.0, 3.0, 4.7] {
            assert!((moment_mp(p, 0.0).unwrap() - 1.0).abs() < 1e-14);
            assert!((moment_mp(p, p).unwrap() - 1.0).abs() < 1e-12);
        }
        let m21 = moment_mp(2.0, 1.0).unwrap();
        assert!((m21 - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        for &(p, r) in &[(2.0, 1.0), (3.0, 1.5), (1.5, 2.5)] {
            let (v, _) =
                integrate1(|y| 2.0 * y.powf(r) * density_fp(y, p).unwrap(), 0.0, 80.0, 1e-13);
            assert!((v / moment_mp(p, r).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(moment_mp(2.0, -1.0).is_err());
    }

    #[test]
    fn lp_norms() {
        assert_eq!(lp_norm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&[1.0, 1.0, 1.0], 1.0).unwrap(), 3.0);
        assert_eq!(lp_norm(&[1.0, -2.0, 0.5], f64::INFINITY).unwrap(), 2.0);
        assert!(lp_norm(&[1.0], 0.5).is_err());
    }

    #[test]
    fn sampler_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let s2 = NpSampler::new(2.0).unwrap();
        let (mut sum, mut sum_abs, mut sum_abs2) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = s2.sample(&mut rng);
            sum += x;
            sum_abs += x.abs();
            sum_abs2 += x * x;
        }
        let nf = n as f64;
        assert!((sum / nf).abs() < 4e-3);
        let mean_abs = sum_abs / nf;
        let se = ((sum_abs2 / nf - mean_abs * mean_abs) / nf).sqrt();
        assert!((mean_abs - moment_mp(2.0, 1.0).unwrap()).abs() < 3.0 * se);

        let s3 = NpSampler::new(3.0).unwrap();
        let v: Vec<f64> = (0..n).map(|_| s3.sample(&mut rng).abs().powi(3)).collect();
        let m = v.iter().sum::<f64>() / nf;
        let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / nf;
        assert!((m - 1.0).abs() < 3.0 * (var / nf).sqrt());
    }

    #[test]
    fn cone_and_ball_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &p in &[1.0, 1.5, 2.0, 3.0] {
            for &n in &[1usize, 2, 17, 400] {
                let x = sample_cone(n, p, &mut rng).unwrap();
                assert!((x.norm(p).unwrap() - 1.0).abs() < 1e-12);
                if n == 1 {
                    assert_eq!(x.coords[0].abs(), 1.0);
                }
                let b = sample_ball(n, p, &mut rng).unwrap();
                assert!(b.norm(p).unwrap() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn ball_radial_law_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 100_000;
        let mut below = [0usize; 2];
        let mut quadrant = 0usize;
        for _ in 0..m {
            let x = sample_ball(10, 2.0, &mut rng).unwrap();
            let r = x.norm(2.0).unwrap();
            if r <= 0.5 {
                below[0] += 1;
            }
            if r <= 0.9 {
                below[1] += 1;
            }
            let y = sample_ball(2, 2.0, &mut rng).unwrap();
            if y.coords[0] > 0.0 && y.coords[1] > 0.0 {
                quadrant += 1;
            }
        }
        let mf = m as f64;
        for (i, &r) in [0.5f64, 0.9].iter().enumerate() {
            let target = r.powi(10);
            let se = (target * (1.0 - target) / mf).sqrt().max(1.0 / mf);
            assert!((below[i] as f64 / mf - target).abs() < 3.0 * se);
        }
        let se = (0.25f64 * 0.75 / mf).sqrt();
        assert!((quadrant as f64 / mf - 0.25).abs() < 3.0 * se);
    }

    #[test]
    fn cone_lln() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = PqParams::new(2.0, 1.0).unwrap();
        let n = 200;
        let m = 10_000;
        let scale = (n as f64).powf(1.0 / 2.0 - 1.0);
        let v: Vec<f64> = (0..m)
            .map(|_| scale * sample_cone(n, 2.0, &mut rng).unwrap().norm(1.0).unwrap())
            .collect();
        let mean = v.iter().sum::<f64>() / m as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
        // the finite-n mean sits O(1/n) below the limit
        let bias = m_pq(&params) - mean;
        assert!(bias.abs() < 3.0 * (var / m as f64).sqrt() + 2.0 / n as f64);
    }
}
