use std::io::Write;

use qnorm_sld::montecarlo::McEstimate;
use qnorm_sld::sld::{Prefactors, SldEstimate};
use qnorm_sld::SldError;
use serde::{Deserialize, Serialize};

use crate::config::Format;

/// One output row. Fields that do not apply to a command stay empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub command: String,
    pub index: usize,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub n: Option<usize>,
    pub z: Option<f64>,
    pub t: Option<f64>,
    pub q_proj: Option<f64>,
    pub q_star: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub estimator: Option<String>,
    pub rate: Option<f64>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub newton_iterations: Option<usize>,
    pub xi: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub l_d: Option<f64>,
    pub l_lambda: Option<f64>,
    pub measure: Option<String>,
    pub prefactor: Option<f64>,
    pub log_probability: Option<f64>,
    pub probability: Option<f64>,
    pub regime: Option<String>,
    pub probability_ball: Option<f64>,
    pub log_probability_ball: Option<f64>,
    pub regime_ball: Option<String>,
    pub a_t: Option<f64>,
    pub z_eff: Option<f64>,
    pub volume: Option<f64>,
    pub volume_regime: Option<String>,
    pub mc_p_hat: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub mc_ci95_lo: Option<f64>,
    pub mc_ci95_hi: Option<f64>,
    pub mc_hits: Option<u64>,
    pub mc_ball_p_hat: Option<f64>,
    pub mc_ball_stderr: Option<f64>,
    pub mc_ball_ci95_lo: Option<f64>,
    pub mc_ball_ci95_hi: Option<f64>,
    pub mc_ball_hits: Option<u64>,
    pub ratio_cone: Option<f64>,
    pub ratio_ball: Option<f64>,
    pub log_vol: Option<f64>,
    pub c_np: Option<f64>,
    pub c_p: Option<f64>,
    pub c_npq: Option<f64>,
    pub a_npq: Option<f64>,
    pub a_pq: Option<f64>,
    pub a_pq_closed_form: Option<f64>,
    pub m_pq: Option<f64>,
    pub error: Option<String>,
    pub error_message: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

/// Non-finite values are written as empty fields.
pub fn fin(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Record {
    pub fn new(command: &str, index: usize) -> Self {
        Self {
            command: command.to_string(),
            index,
            ..Default::default()
        }
    }

    pub fn set_error(&mut self, e: &SldError) {
        self.error = Some(e.code().to_string());
        self.error_message = Some(e.to_string());
        self.exit_code = e.exit_code();
    }

    pub fn set_prefactors(&mut self, pf: &Prefactors) {
        self.rate = fin(pf.point.rate);
        self.tau1 = fin(pf.point.tau.tau1);
        self.tau2 = fin(pf.point.tau.tau2);
        self.newton_iterations = Some(pf.point.iterations);
        self.xi = fin(pf.xi);
        self.kappa = fin(pf.kappa);
        self.gamma = fin(pf.gamma);
        self.l_d = fin(pf.l_d);
        self.l_lambda = fin(pf.l_lambda);
    }

    pub fn set_tail(&mut self, est: &SldEstimate) {
        self.measure = Some(est.measure.as_str().to_string());
        self.rate = fin(est.rate);
        self.prefactor = fin(est.prefactor);
        self.log_probability = fin(est.log_probability);
        self.probability = fin(est.probability);
        self.regime = Some(est.regime.as_str().to_string());
    }

    pub fn set_mc(&mut self, e: &McEstimate) {
        self.samples = Some(e.n_samples);
        self.seed = Some(e.seed);
        self.estimator = Some(e.estimator.as_str().to_string());
        self.mc_p_hat = fin(e.p_hat);
        self.mc_stderr = fin(e.stderr);
        self.mc_ci95_lo = fin(e.ci95_lo);
        self.mc_ci95_hi = fin(e.ci95_hi);
        self.mc_hits = Some(e.hits);
    }

    pub fn set_mc_ball(&mut self, e: &McEstimate) {
        self.mc_ball_p_hat = fin(e.p_hat);
        self.mc_ball_stderr = fin(e.stderr);
        self.mc_ball_ci95_lo = fin(e.ci95_lo);
        self.mc_ball_ci95_hi = fin(e.ci95_hi);
        self.mc_ball_hits = Some(e.hits);
    }
}

pub fn write_records<W: Write>(records: &[Record], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            out.write_all(b"\n")?;
            out.flush()
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()
        }
    }
}
