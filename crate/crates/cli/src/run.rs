use qnorm_sld::gengauss::m_pq;
use qnorm_sld::legendre::rate_norm;
use qnorm_sld::montecarlo::{compare, mc_intersection_with, mc_projection_with, mc_tail_pair, McOptions};
use qnorm_sld::sld::{
    a_pq_closed_form, ball_constants, conjugate_exponent, intersection_volume, projection_params,
    projection_tail, Measure, Prefactors,
};
use qnorm_sld::PqParams;
use rayon::prelude::*;

use crate::config::{
    check_n, check_q_proj, check_t, Command, ConfigError, ConstantsArgs, CurveArgs, IntersectArgs, LevelArgs,
    McArgs, OutputArgs, ProjectArgs, TailArgs,
};
use crate::record::{fin, Record};

/// Validated work plus the output settings.
pub struct Plan {
    pub out: OutputArgs,
    job: Job,
}

enum Job {
    Tail {
        measure: Measure,
        params: PqParams,
        ns: Vec<usize>,
        zs: Vec<f64>,
    },
    Intersect {
        params: PqParams,
        ns: Vec<usize>,
        ts: Vec<f64>,
        sim: Option<(usize, u64, McOptions)>,
    },
    Project {
        q_proj: f64,
        ns: Vec<usize>,
        zs: Vec<f64>,
        sim: Option<(usize, u64, McOptions)>,
    },
    Curve {
        params: PqParams,
        zs: Vec<f64>,
    },
    Mc {
        params: PqParams,
        ns: Vec<usize>,
        zs: Vec<f64>,
        sim: (usize, u64, McOptions),
        with_analytic: bool,
    },
    Constants {
        params: PqParams,
        ns: Vec<usize>,
    },
}

fn levels_above(level: &LevelArgs, floor: f64, strict: bool, what: &str) -> Result<Vec<f64>, ConfigError> {
    let zs = level.levels()?;
    if let Some(z) = zs.iter().find(|&&z| if strict { z <= floor } else { z < floor }) {
        return Err(ConfigError {
            flag: "z",
            message: format!("level {z} must {} {what} = {floor}", if strict { "exceed" } else { "be at least" }),
        });
    }
    Ok(zs)
}

fn pairs<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

pub fn plan(command: Command) -> Result<Plan, ConfigError> {
    Ok(match command {
        Command::SldCone(a) => tail_plan(a, Measure::Cone)?,
        Command::SldBall(a) => tail_plan(a, Measure::Uniform)?,
        Command::Intersect(IntersectArgs { pq, n, t, sim, out }) => {
            let params = pq.params()?;
            check_n(&n)?;
            check_t(&t)?;
            let samples = sim.samples()?;
            Plan {
                out,
                job: Job::Intersect {
                    params,
                    ns: n,
                    ts: t,
                    sim: samples.map(|s| (s, sim.seed, opts(sim.estimator.into()))),
                },
            }
        }
        Command::Project(ProjectArgs { q_proj, n, level, sim, out }) => {
            check_q_proj(q_proj)?;
            check_n(&n)?;
            let params = projection_params(q_proj).map_err(|e| ConfigError {
                flag: "q-proj",
                message: e.to_string(),
            })?;
            let zs = levels_above(&level, 2.0 * m_pq(&params), true, "2 m_(2,q*)")?;
            let samples = sim.samples()?;
            Plan {
                out,
                job: Job::Project {
                    q_proj,
                    ns: n,
                    zs,
                    sim: samples.map(|s| (s, sim.seed, opts(sim.estimator.into()))),
                },
            }
        }
        Command::RateCurve(CurveArgs { pq, level, out }) => {
            let params = pq.params()?;
            let zs = levels_above(&level, m_pq(&params), false, "m_pq")?;
            Plan {
                out,
                job: Job::Curve { params, zs },
            }
        }
        Command::Mc(a) => mc_plan(a, false)?,
        Command::Compare(a) => mc_plan(a, true)?,
        Command::Constants(ConstantsArgs { pq, n, out }) => {
            let params = pq.params()?;
            check_n(&n)?;
            Plan {
                out,
                job: Job::Constants { params, ns: n },
            }
        }
    })
}

fn opts(estimator: qnorm_sld::montecarlo::Estimator) -> McOptions {
    McOptions {
        estimator,
        ..Default::default()
    }
}

fn tail_plan(a: TailArgs, measure: Measure) -> Result<Plan, ConfigError> {
    let params = a.pq.params()?;
    check_n(&a.n)?;
    let zs = levels_above(&a.level, m_pq(&params), true, "m_pq")?;
    Ok(Plan {
        out: a.out,
        job: Job::Tail {
            measure,
            params,
            ns: a.n,
            zs,
        },
    })
}

fn mc_plan(a: McArgs, with_analytic: bool) -> Result<Plan, ConfigError> {
    let params = a.pq.params()?;
    check_n(&a.n)?;
    let samples = a.sim.required_samples()?;
    let estimator: qnorm_sld::montecarlo::Estimator = a.sim.estimator.into();
    let m = m_pq(&params);
    let zs = if with_analytic {
        levels_above(&a.level, m, true, "m_pq")?
    } else if estimator == qnorm_sld::montecarlo::Estimator::Tilted {
        levels_above(&a.level, m, false, "m_pq (tilted estimator)")?
    } else {
        a.level.levels()?
    };
    Ok(Plan {
        out: a.out,
        job: Job::Mc {
            params,
            ns: a.n,
            zs,
            sim: (samples, a.sim.seed, opts(estimator)),
            with_analytic,
        },
    })
}

fn base(command: &str, index: usize, params: &PqParams) -> Record {
    let mut r = Record::new(command, index);
    r.p = Some(params.p());
    r.q = Some(params.q());
    r
}

pub fn execute(plan: &Plan) -> Vec<Record> {
    match &plan.job {
        Job::Tail { measure, params, ns, zs } => {
            let name = match measure {
                Measure::Cone => "sld-cone",
                Measure::Uniform => "sld-ball",
            };
            let pfs: Vec<_> = zs.par_iter().map(|&z| Prefactors::compute(z, params)).collect();
            pairs(ns, &(0..zs.len()).collect::<Vec<_>>())
                .into_iter()
                .enumerate()
                .map(|(i, (n, j))| {
                    let mut r = base(name, i, params);
                    r.n = Some(n);
                    r.z = Some(zs[j]);
                    match pfs[j].as_ref().map_err(Clone::clone).and_then(|pf| {
                        r.set_prefactors(pf);
                        pf.tail(n, *measure)
                    }) {
                        Ok(est) => r.set_tail(&est),
                        Err(e) => r.set_error(&e),
                    }
                    r
                })
                .collect()
        }
        Job::Intersect { params, ns, ts, sim } => pairs(ns, ts)
            .into_iter()
            .enumerate()
            .map(|(i, (n, t))| {
                let mut r = base("intersect", i, params);
                r.n = Some(n);
                r.t = Some(t);
                match intersection_volume(n, t, params) {
                    Ok(iv) => {
                        r.a_t = fin(iv.a_t);
                        r.z_eff = fin(iv.z_eff);
                        r.volume = fin(iv.volume);
                        r.volume_regime = Some(iv.regime.as_str().to_string());
                        if let Some(tail) = iv.tail {
                            r.set_tail(&tail);
                        }
                    }
                    Err(e) => {
                        if let Ok(bc) = ball_constants(n, params) {
                            r.a_t = fin(bc.a_pq * t);
                            r.z_eff = fin(bc.c_npq * t);
                        }
                        r.set_error(&e);
                    }
                }
                if let Some((s, seed, o)) = sim {
                    match mc_intersection_with(n, t, params, *s, *seed, *o) {
                        Ok(e) => r.set_mc(&e),
                        Err(e) => r.set_error(&e),
                    }
                }
                r
            })
            .collect(),
        Job::Project { q_proj, ns, zs, sim } => {
            let params = projection_params(*q_proj).expect("validated");
            pairs(ns, zs)
                .into_iter()
                .enumerate()
                .map(|(i, (n, z))| {
                    let mut r = base("project", i, &params);
                    r.n = Some(n);
                    r.z = Some(z);
                    r.q_proj = Some(*q_proj);
                    r.q_star = conjugate_exponent(*q_proj).ok();
                    match projection_tail(n, *q_proj, z) {
                        Ok(est) => r.set_tail(&est),
                        Err(e) => r.set_error(&e),
                    }
                    if let Some((s, seed, o)) = sim {
                        match mc_projection_with(n, *q_proj, z, *s, *seed, *o) {
                            Ok(e) => r.set_mc(&e),
                            Err(e) => r.set_error(&e),
                        }
                    }
                    r
                })
                .collect()
        }
        Job::Curve { params, zs } => zs
            .par_iter()
            .enumerate()
            .map(|(i, &z)| {
                let mut r = base("rate-curve", i, params);
                r.z = Some(z);
                if z > m_pq(params) {
                    match Prefactors::compute(z, params) {
                        Ok(pf) => r.set_prefactors(&pf),
                        Err(e) => r.set_error(&e),
                    }
                } else {
                    match rate_norm(z, params) {
                        Ok(rp) => {
                            r.rate = fin(rp.rate);
                            r.tau1 = fin(rp.tau.tau1);
                            r.tau2 = fin(rp.tau.tau2);
                            r.newton_iterations = Some(rp.iterations);
                        }
                        Err(e) => r.set_error(&e),
                    }
                }
                r
            })
            .collect(),
        Job::Mc {
            params,
            ns,
            zs,
            sim: (s, seed, o),
            with_analytic,
        } => pairs(ns, zs)
            .into_iter()
            .enumerate()
            .map(|(i, (n, z))| {
                let mut r = base(if *with_analytic { "compare" } else { "mc" }, i, params);
                r.n = Some(n);
                r.z = Some(z);
                if *with_analytic {
                    match compare(n, z, params, *s, *seed, *o) {
                        Ok(c) => {
                            r.set_mc(&c.mc_cone);
                            r.set_mc_ball(&c.mc_ball);
                            r.set_tail(&c.sld_cone);
                            r.probability_ball = fin(c.sld_ball.probability);
                            r.log_probability_ball = fin(c.sld_ball.log_probability);
                            r.regime_ball = Some(c.sld_ball.regime.as_str().to_string());
                            r.measure = None;
                            r.xi = fin(c.xi);
                            r.kappa = fin(c.kappa);
                            r.gamma = fin(c.gamma);
                            r.ratio_cone = fin(c.ratio_cone);
                            r.ratio_ball = fin(c.ratio_ball);
                        }
                        Err(e) => r.set_error(&e),
                    }
                } else {
                    match mc_tail_pair(n, z, params, *s, *seed, *o) {
                        Ok((c, b)) => {
                            r.set_mc(&c);
                            r.set_mc_ball(&b);
                        }
                        Err(e) => r.set_error(&e),
                    }
                }
                r
            })
            .collect(),
        Job::Constants { params, ns } => ns
            .par_iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut r = base("constants", i, params);
                r.n = Some(n);
                r.m_pq = fin(m_pq(params));
                r.a_pq_closed_form = fin(a_pq_closed_form(params));
                match ball_constants(n, params) {
                    Ok(bc) => {
                        r.log_vol = fin(bc.log_vol);
                        r.c_np = fin(bc.c_np);
                        r.c_p = fin(bc.c_p);
                        r.c_npq = fin(bc.c_npq);
                        r.a_npq = fin(bc.a_npq);
                        r.a_pq = fin(bc.a_pq);
                    }
                    Err(e) => r.set_error(&e),
                }
                r
            })
            .collect(),
    }
}
