//! Seeded Monte Carlo oracles built on the i.i.d. representation
//!
//! `n^{1/p-1/q} ||Z||_q = (mean |Y_i|^q)^{1/q} / (mean |Y_i|^p)^{1/p}`
//!
//! with an extra `U^{1/n}` factor for the uniform ball measure.
//!
//! Samples are split into fixed-size chunks; chunk `k` always draws from
//! substream `k` of the master seed and partial sums are reduced in chunk
//! order, so results do not depend on the scheduler or on the thread count.
//! Every sample draws its `n` coordinates and then `U`, whatever the event,
//! so cone, ball and z-grid estimates at one seed share random numbers.

pub mod tilted;

use rand::Rng;

use crate::cgf::{lambda_p, Tilt};
use crate::error::{invalid, Result};
use crate::gengauss::NpSampler;
use crate::legendre::{rate_norm, solve_tau};
use crate::params::PqParams;
use crate::rng::{substream, SldRng};
use crate::sld::{ball_constants, conjugate_exponent, projection_params, Prefactors, SldEstimate};
use tilted::{Pow, TiltedAbs};

pub const CHUNK: usize = 4096;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    /// Direct frequency count.
    #[default]
    Plain,
    /// Coordinates drawn from the exponentially tilted law at the rate
    /// minimiser, reweighted by the exact likelihood ratio.
    Tilted,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Plain => "plain",
            Estimator::Tilted => "tilted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McOptions {
    pub estimator: Estimator,
    pub exec: Exec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub seed: u64,
    pub hits: u64,
    pub estimator: Estimator,
}

impl McEstimate {
    fn from_accum(acc: &Accum, n_samples: usize, seed: u64, estimator: Estimator) -> Self {
        let nf = n_samples as f64;
        let (p_hat, stderr) = match estimator {
            Estimator::Plain => {
                let p = acc.hits as f64 / nf;
                (p, (p * (1.0 - p) / nf).sqrt())
            }
            Estimator::Tilted => {
                let p = acc.sw / nf;
                let var = (acc.sw2 / nf - p * p).max(0.0);
                (p, (var / nf).sqrt())
            }
        };
        Self {
            p_hat,
            stderr,
            n_samples,
            ci95_lo: (p_hat - 1.96 * stderr).clamp(0.0, 1.0),
            ci95_hi: (p_hat + 1.96 * stderr).clamp(0.0, 1.0),
            seed,
            hits: acc.hits,
            estimator,
        }
    }

    /// Relative standard error (infinite when nothing was hit).
    pub fn rel_stderr(&self) -> f64 {
        if self.p_hat > 0.0 {
            self.stderr / self.p_hat
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Accum {
    hits: u64,
    sw: f64,
    sw2: f64,
}

impl Accum {
    #[inline]
    fn add(&mut self, w: f64) {
        self.hits += 1;
        self.sw += w;
        self.sw2 += w * w;
    }

    fn merge(&mut self, o: &Accum) {
        self.hits += o.hits;
        self.sw += o.sw;
        self.sw2 += o.sw2;
    }
}

/// Per-sample summary handed to event predicates.
#[derive(Debug, Clone, Copy)]
pub struct Draw {
    /// `(mean |Y_i|^q, mean |Y_i|^p)`.
    pub s: [f64; 2],
    /// Cone statistic `n^{1/p-1/q} ||Y||_q / ||Y||_p`.
    pub cone: f64,
    /// Ball statistic `U^{1/n}` times the cone statistic.
    pub ball: f64,
}

enum Coord {
    Plain(NpSampler),
    Tilted(TiltedAbs),
}

struct Engine {
    n: usize,
    pq: Pow,
    pp: Pow,
    inv_q: f64,
    inv_p: f64,
    coord: Coord,
    /// Likelihood-ratio data `(tau1, tau2, Lambda(tau))`.
    tilt: Option<(f64, f64, f64)>,
}

impl Engine {
    fn plain(n: usize, params: &PqParams) -> Result<Self> {
        Self::build(n, params, None)
    }

    fn tilted(n: usize, params: &PqParams, tau: Tilt) -> Result<Self> {
        Self::build(n, params, Some(tau))
    }

    fn build(n: usize, params: &PqParams, tau: Option<Tilt>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        let (p, q) = (params.p(), params.q());
        let (coord, tilt) = match tau {
            None => (Coord::Plain(NpSampler::new(p)?), None),
            Some(t) => (
                Coord::Tilted(TiltedAbs::from_tilt(t.tau1, t.tau2, p, q)?),
                Some((t.tau1, t.tau2, lambda_p(&t, params)?)),
            ),
        };
        Ok(Self {
            n,
            pq: Pow::new(q),
            pp: Pow::new(p),
            inv_q: 1.0 / q,
            inv_p: 1.0 / p,
            coord,
            tilt,
        })
    }

    #[inline]
    fn draw(&self, rng: &mut SldRng) -> (Draw, f64) {
        let (mut sq, mut sp) = (0.0, 0.0);
        match &self.coord {
            Coord::Plain(s) => {
                for _ in 0..self.n {
                    let y = s.sample_abs(rng);
                    sq += self.pq.apply(y);
                    sp += self.pp.apply(y);
                }
            }
            Coord::Tilted(s) => {
                for _ in 0..self.n {
                    let y = s.sample(rng);
                    sq += self.pq.apply(y);
                    sp += self.pp.apply(y);
                }
            }
        }
        let u: f64 = rng.random();
        let nf = self.n as f64;
        let s = [sq / nf, sp / nf];
        let cone = s[0].powf(self.inv_q) / s[1].powf(self.inv_p);
        let ball = u.powf(1.0 / nf) * cone;
        let w = match self.tilt {
            None => 1.0,
            Some((t1, t2, lam)) => (-nf * (t1 * s[0] + t2 * s[1] - lam)).exp(),
        };
        (Draw { s, cone, ball }, w)
    }

    fn run<const K: usize, F>(&self, n_samples: usize, seed: u64, exec: Exec, events: F) -> [Accum; K]
    where
        F: Fn(&Draw) -> [bool; K] + Sync,
    {
        let chunks = n_samples.div_ceil(CHUNK);
        let one = |k: usize| {
            let mut rng = substream(seed, k as u64);
            let count = CHUNK.min(n_samples - k * CHUNK);
            let mut acc = [Accum::default(); K];
            for _ in 0..count {
                let (d, w) = self.draw(&mut rng);
                let hit = events(&d);
                for j in 0..K {
                    if hit[j] {
                        acc[j].add(w);
                    }
                }
            }
            acc
        };
        let parts: Vec<[Accum; K]> = match exec {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..chunks).into_par_iter().map(one).collect()
            }
            _ => (0..chunks).map(one).collect(),
        };
        let mut total = [Accum::default(); K];
        for part in &parts {
            for j in 0..K {
                total[j].merge(&part[j]);
            }
        }
        total
    }
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < MIN_SAMPLES {
        return Err(invalid(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    Ok(())
}

fn tilt_for_level(z: f64, params: &PqParams) -> Result<Tilt> {
    Ok(rate_norm(z, params)?.tau)
}

/// Cone and ball tail estimates at one level from the same draws.
pub fn mc_tail_pair(
    n: usize,
    z: f64,
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<(McEstimate, McEstimate)> {
    check_samples(n_samples)?;
    if !z.is_finite() {
        return Err(invalid("z must be finite"));
    }
    let engine = match opts.estimator {
        Estimator::Plain => Engine::plain(n, params)?,
        Estimator::Tilted => Engine::tilted(n, params, tilt_for_level(z, params)?)?,
    };
    let [c, b] = engine.run(n_samples, seed, opts.exec, |d| [d.cone > z, d.ball > z]);
    Ok((
        McEstimate::from_accum(&c, n_samples, seed, opts.estimator),
        McEstimate::from_accum(&b, n_samples, seed, opts.estimator),
    ))
}

pub fn mc_tail_cone(n: usize, z: f64, params: &PqParams, n_samples: usize, seed: u64) -> Result<McEstimate> {
    mc_tail_cone_with(n, z, params, n_samples, seed, McOptions::default())
}

pub fn mc_tail_cone_with(
    n: usize,
    z: f64,
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    Ok(mc_tail_pair(n, z, params, n_samples, seed, opts)?.0)
}

pub fn mc_tail_ball(n: usize, z: f64, params: &PqParams, n_samples: usize, seed: u64) -> Result<McEstimate> {
    mc_tail_ball_with(n, z, params, n_samples, seed, McOptions::default())
}

pub fn mc_tail_ball_with(
    n: usize,
    z: f64,
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    Ok(mc_tail_pair(n, z, params, n_samples, seed, opts)?.1)
}

/// Plain cone-tail estimates over a grid of levels, one shared sample.
pub fn mc_tail_cone_grid(
    n: usize,
    zs: &[f64],
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<McEstimate>> {
    check_samples(n_samples)?;
    let engine = Engine::plain(n, params)?;
    // one pass recording the statistic is enough: count per level afterwards
    let chunks = n_samples.div_ceil(CHUNK);
    let one = |k: usize| {
        let mut rng = substream(seed, k as u64);
        let count = CHUNK.min(n_samples - k * CHUNK);
        let mut hits = vec![0u64; zs.len()];
        for _ in 0..count {
            let (d, _) = engine.draw(&mut rng);
            for (h, &z) in hits.iter_mut().zip(zs) {
                if d.cone > z {
                    *h += 1;
                }
            }
        }
        hits
    };
    let parts: Vec<Vec<u64>> = match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(one).collect()
        }
        _ => (0..chunks).map(one).collect(),
    };
    Ok((0..zs.len())
        .map(|j| {
            let acc = Accum {
                hits: parts.iter().map(|h| h[j]).sum(),
                sw: 0.0,
                sw2: 0.0,
            };
            McEstimate::from_accum(&acc, n_samples, seed, Estimator::Plain)
        })
        .collect())
}

/// Fraction of uniform `B_p^n` samples inside `t D_q^n` after volume
/// normalisation, i.e. `P(ball statistic <= t c_{n,p,q})`.
pub fn mc_intersection(n: usize, t: f64, params: &PqParams, n_samples: usize, seed: u64) -> Result<McEstimate> {
    mc_intersection_with(n, t, params, n_samples, seed, McOptions::default())
}

/// With the tilted estimator the complement (the tail) is the sampled event;
/// the returned `p_hat` is still the volume.
pub fn mc_intersection_with(
    n: usize,
    t: f64,
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    check_samples(n_samples)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("t must be positive and finite, got {t}")));
    }
    let z_eff = t * ball_constants(n, params)?.c_npq;
    match opts.estimator {
        Estimator::Plain => {
            let engine = Engine::plain(n, params)?;
            let [a] = engine.run(n_samples, seed, opts.exec, |d| [d.ball <= z_eff]);
            Ok(McEstimate::from_accum(&a, n_samples, seed, Estimator::Plain))
        }
        Estimator::Tilted => {
            let engine = Engine::tilted(n, params, tilt_for_level(z_eff, params)?)?;
            let [a] = engine.run(n_samples, seed, opts.exec, |d| [d.ball > z_eff]);
            let tail = McEstimate::from_accum(&a, n_samples, seed, Estimator::Tilted);
            Ok(McEstimate {
                p_hat: 1.0 - tail.p_hat,
                ci95_lo: (1.0 - tail.ci95_hi).clamp(0.0, 1.0),
                ci95_hi: (1.0 - tail.ci95_lo).clamp(0.0, 1.0),
                ..tail
            })
        }
    }
}

/// `P(n^{1/2-1/q*} vol_1(P_theta B_q^n) > z)`, theta ~ cone measure on the
/// Euclidean sphere, through `vol_1(P_theta B_q^n) = 2 ||theta||_{q*}`.
pub fn mc_projection(n: usize, q_proj: f64, z: f64, n_samples: usize, seed: u64) -> Result<McEstimate> {
    mc_projection_with(n, q_proj, z, n_samples, seed, McOptions::default())
}

pub fn mc_projection_with(
    n: usize,
    q_proj: f64,
    z: f64,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    check_samples(n_samples)?;
    let params = projection_params(q_proj)?;
    let engine = match opts.estimator {
        Estimator::Plain => Engine::plain(n, &params)?,
        Estimator::Tilted => Engine::tilted(n, &params, tilt_for_level(0.5 * z, &params)?)?,
    };
    let [a] = engine.run(n_samples, seed, opts.exec, |d| [2.0 * d.cone > z]);
    Ok(McEstimate::from_accum(&a, n_samples, seed, opts.estimator))
}

/// `P(S in [x1lo, x1hi] x [x2lo, x2hi])` for the empirical moment pair under
/// the cone measure. The tilted variant centres the draws at the box centre.
pub fn mc_box_probability(
    n: usize,
    bounds: [[f64; 2]; 2],
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    check_samples(n_samples)?;
    let [[a0, a1], [b0, b1]] = bounds;
    if !(a0 < a1 && b0 < b1) {
        return Err(invalid("box bounds must be increasing"));
    }
    let engine = match opts.estimator {
        Estimator::Plain => Engine::plain(n, params)?,
        Estimator::Tilted => {
            let centre = [0.5 * (a0 + a1), 0.5 * (b0 + b1)];
            Engine::tilted(n, params, solve_tau(centre, params)?.tau)?
        }
    };
    let [acc] = engine.run(n_samples, seed, opts.exec, |d| {
        [d.s[0] >= a0 && d.s[0] < a1 && d.s[1] >= b0 && d.s[1] < b1]
    });
    Ok(McEstimate::from_accum(&acc, n_samples, seed, opts.estimator))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub n: usize,
    pub z: f64,
    pub sld_cone: SldEstimate,
    pub sld_ball: SldEstimate,
    pub mc_cone: McEstimate,
    pub mc_ball: McEstimate,
    pub ratio_cone: f64,
    pub ratio_ball: f64,
    pub xi: f64,
    pub kappa: f64,
    pub gamma: f64,
}

/// Analytic estimates next to Monte Carlo at one `(n, z)`; ratios are analytic / MC.
pub fn compare(
    n: usize,
    z: f64,
    params: &PqParams,
    n_samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<Comparison> {
    let pf = Prefactors::compute(z, params)?;
    let sld_cone = pf.tail(n, crate::sld::Measure::Cone)?;
    let sld_ball = pf.tail(n, crate::sld::Measure::Uniform)?;
    let (mc_cone, mc_ball) = mc_tail_pair(n, z, params, n_samples, seed, opts)?;
    Ok(Comparison {
        n,
        z,
        sld_cone,
        sld_ball,
        mc_cone,
        mc_ball,
        ratio_cone: sld_cone.probability / mc_cone.p_hat,
        ratio_ball: sld_ball.probability / mc_ball.p_hat,
        xi: pf.xi,
        kappa: pf.kappa,
        gamma: pf.gamma,
    })
}

/// Projection length of `B_q^2` on the direction `theta`, by maximising
/// `|<x, theta>|` over a boundary mesh of the unit `l_q` disc.
pub fn projection_length_mesh(theta: [f64; 2], q: f64, mesh: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..mesh {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / mesh as f64;
        let (c, s) = (phi.cos(), phi.sin());
        let x = if q == f64::INFINITY {
            let m = c.abs().max(s.abs());
            [c / m, s / m]
        } else {
            let r = (c.abs().powf(q) + s.abs().powf(q)).powf(1.0 / q);
            [c / r, s / r]
        };
        best = best.max((x[0] * theta[0] + x[1] * theta[1]).abs());
    }
    2.0 * best
}

/// Exponent used by [`projection_length_mesh`] checks: `q*` of `q_proj`.
pub fn dual_exponent(q_proj: f64) -> Result<f64> {
    conjugate_exponent(q_proj)
}
