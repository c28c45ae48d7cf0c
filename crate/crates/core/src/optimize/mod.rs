//! Full-batch Adam, single training runs and seeded initialization.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::AnsatzSpec;
use crate::error::{Error, Result};
use crate::landscape::{hessian, loss, loss_and_gradient, LossSpec};

/// Final-loss tolerance that labels a run as successful.
pub const SUCCESS_TOL: f64 = 1e-7;

fn default_lr() -> f64 {
    1e-2
}
fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-7
}
fn default_iters() -> usize {
    10_000
}
fn default_stop_gap() -> f64 {
    1e-12
}
fn default_success_tol() -> f64 {
    SUCCESS_TOL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_eps")]
    pub epsilon_hat: f64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_stop_gap")]
    pub stop_gap: f64,
    /// Known optimum; `None` disables gap-based stopping and success labels.
    #[serde(default)]
    pub target_value: Option<f64>,
    #[serde(default = "default_success_tol")]
    pub success_tol: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: default_lr(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon_hat: default_eps(),
            max_iters: default_iters(),
            stop_gap: default_stop_gap(),
            target_value: None,
            success_tol: default_success_tol(),
        }
    }
}

impl AdamConfig {
    pub fn with_target(mut self, target: f64) -> Self {
        self.target_value = Some(target);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta1 and beta2 must lie in (0, 1)");
        }
        if !(self.epsilon_hat > 0.0) {
            return bad("epsilon_hat must be positive");
        }
        if !(self.stop_gap >= 0.0) || !(self.success_tol > 0.0) {
            return bad("stop_gap must be non-negative and success_tol positive");
        }
        if matches!(self.target_value, Some(t) if !t.is_finite()) {
            return bad("target_value must be finite");
        }
        Ok(())
    }
}

/// Moment estimates and step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update of `theta` in place.
pub fn adam_step(state: &mut AdamState, theta: &mut [f64], grad: &[f64], cfg: &AdamConfig) -> Result<()> {
    if grad.len() != theta.len() || state.m.len() != theta.len() {
        return Err(Error::ParamCount {
            expected: theta.len(),
            found: grad.len(),
        });
    }
    if let Some(k) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient component {k}")));
    }
    state.t += 1;
    let b1t = 1.0 - cfg.beta1.powi(state.t as i32);
    let b2t = 1.0 - cfg.beta2.powi(state.t as i32);
    for k in 0..theta.len() {
        state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * grad[k];
        state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        let mh = state.m[k] / b1t;
        let vh = state.v[k] / b2t;
        theta[k] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon_hat);
    }
    Ok(())
}

/// splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run seed from a master seed and a list of counters, chained through splitmix64.
pub fn derive_seed(master: u64, counters: &[u64]) -> u64 {
    counters.iter().fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` angles i.i.d. uniform on `[−π, π)`.
pub fn random_angles<R: Rng>(rng: &mut R, count: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..count).map(|_| rng.random_range(-PI..PI)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: usize,
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub iterations_used: usize,
    pub success: bool,
    pub wall_time: f64,
    pub final_params: Vec<f64>,
    pub status: RunStatus,
    pub target: Option<f64>,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str = "seed,M,final_loss,gap,iterations,success,status,wall_time";

    /// `|final_loss − target|`, or NaN without a target.
    pub fn gap(&self) -> f64 {
        self.target.map_or(f64::NAN, |t| (self.final_loss - t).abs())
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{},{},{},{:.6}",
            self.seed,
            self.m,
            self.final_loss,
            self.gap(),
            self.iterations_used,
            self.success,
            serde_json::to_value(self.status).expect("enum").as_str().expect("string"),
            self.wall_time
        )
    }

    /// `iteration,loss` rows with a header.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,loss\n");
        for (i, v) in self.loss_trace.iter().enumerate() {
            s.push_str(&format!("{i},{v:.16e}\n"));
        }
        s
    }
}

/// Adam from uniform random angles drawn with `seed`.
pub fn train(spec: &LossSpec, a: &AnsatzSpec, cfg: &AdamConfig, seed: u64) -> Result<RunRecord> {
    let theta = random_angles(&mut seeded_rng(seed), a.num_params());
    train_from(spec, a, cfg, seed, theta)
}

/// Adam from a given starting point.
pub fn train_from(spec: &LossSpec, a: &AnsatzSpec, cfg: &AdamConfig, seed: u64, mut theta: Vec<f64>) -> Result<RunRecord> {
    cfg.validate()?;
    a.check_params(&theta)?;
    let start = Instant::now();
    let mut state = AdamState::new(theta.len());
    let mut trace = Vec::new();
    let mut status = RunStatus::MaxIters;
    let mut iterations = 0;
    loop {
        let (value, grad) = loss_and_gradient(spec, a, &theta)?;
        trace.push(value);
        if !value.is_finite() {
            status = RunStatus::NonFinite;
            break;
        }
        if matches!(cfg.target_value, Some(t) if (value - t).abs() < cfg.stop_gap) {
            status = RunStatus::Converged;
            break;
        }
        if iterations == cfg.max_iters {
            break;
        }
        if adam_step(&mut state, &mut theta, &grad, cfg).is_err() {
            status = RunStatus::NonFinite;
            break;
        }
        iterations += 1;
    }
    let final_loss = *trace.last().expect("at least one evaluation");
    let success = status != RunStatus::NonFinite
        && matches!(cfg.target_value, Some(t) if (final_loss - t).abs() < cfg.success_tol);
    Ok(RunRecord {
        seed,
        m: a.num_params(),
        loss_trace: trace,
        final_loss,
        iterations_used: iterations,
        success,
        wall_time: start.elapsed().as_secs_f64(),
        final_params: theta,
        status,
        target: cfg.target_value,
    })
}

/// Damped Newton refinement with a pseudo-inverse Hessian, accepting only
/// steps that lower the loss. Returns the refined point and its loss.
pub fn newton_polish(spec: &LossSpec, a: &AnsatzSpec, theta: &[f64], max_steps: usize) -> Result<(Vec<f64>, f64)> {
    let mut x = theta.to_vec();
    let mut best = loss(spec, a, &x)?;
    for _ in 0..max_steps {
        let (_, g) = loss_and_gradient(spec, a, &x)?;
        let h = hessian(spec, a, &x)?;
        let svd = nalgebra::SVD::new(h, true, true);
        let gv = nalgebra::DVector::from_vec(g);
        let smax = svd.singular_values.max();
        let Ok(step) = svd.solve(&gv, 1e-10 * smax.max(f64::MIN_POSITIVE)) else {
            break;
        };
        let mut improved = false;
        let mut scale = 1.0;
        for _ in 0..8 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(p, s)| p - scale * s).collect();
            let v = loss(spec, a, &trial)?;
            if v < best {
                x = trial;
                best = v;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((x, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{tfim_hamiltonian, Boundary, InputState};
    use crate::pauli::parse_rational;

    #[test]
    fn first_step_closed_form() {
        let cfg = AdamConfig::default();
        let mut st = AdamState::new(1);
        let mut th = [0.0];
        adam_step(&mut st, &mut th, &[1.0], &cfg).unwrap();
        assert!((th[0] + 1e-2 / (1.0 + 1e-7)).abs() < 1e-16);
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut st = AdamState::new(2);
        let mut th = [0.3, -0.2];
        adam_step(&mut st, &mut th, &[0.0, 0.0], &AdamConfig::default()).unwrap();
        assert_eq!(th, [0.3, -0.2]);
        assert!(adam_step(&mut st, &mut th, &[f64::NAN, 0.0], &AdamConfig::default()).is_err());
    }

    #[test]
    fn quadratic_bowl() {
        let cfg = AdamConfig::default();
        let mut st = AdamState::new(1);
        let mut th = [1.0];
        let mut reached = None;
        for k in 0..2000 {
            let g = [2.0 * th[0]];
            adam_step(&mut st, &mut th, &g, &cfg).unwrap();
            if th[0] * th[0] < 1e-8 {
                reached = Some(k);
                break;
            }
        }
        assert!(reached.is_some());
    }

    #[test]
    fn config_validation() {
        assert!(AdamConfig { beta1: 1.0, ..Default::default() }.validate().is_err());
        assert!(AdamConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        let c: AdamConfig = serde_json::from_str(r#"{"max_iters": 5}"#).unwrap();
        assert_eq!(c.learning_rate, 1e-2);
        assert!(serde_json::from_str::<AdamConfig>(r#"{"lr": 1}"#).is_err());
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        let a = random_angles(&mut seeded_rng(3), 100);
        assert!(a.iter().all(|x| (-std::f64::consts::PI..std::f64::consts::PI).contains(x)));
    }

    #[test]
    fn training_is_deterministic_and_traced() {
        let a = AnsatzSpec::custom(1, 1, vec!["1/2\tX".parse().unwrap()], InputState::ZeroState).unwrap();
        let spec = LossSpec::vqe("Z".parse().unwrap());
        let cfg = AdamConfig { max_iters: 50, ..Default::default() }.with_target(-1.0);
        let r1 = train(&spec, &a, &cfg, 11).unwrap();
        let r2 = train(&spec, &a, &cfg, 11).unwrap();
        assert_eq!(r1.loss_trace, r2.loss_trace);
        assert_eq!(r1.loss_trace.len(), r1.iterations_used + 1);
        assert_eq!(r1.status, RunStatus::MaxIters);
        assert!(r1.trace_csv().starts_with("iteration,loss\n0,"));
    }

    #[test]
    fn two_site_tfim_reaches_ground_energy() {
        let a = crate::circuit::hva_tfim(2, 2, Boundary::Open).unwrap();
        let h = tfim_hamiltonian(2, Boundary::Open, parse_rational("1").unwrap()).unwrap();
        let e = -(5f64.sqrt());
        let cfg = AdamConfig::default().with_target(e);
        let ok = (0..5).filter(|&s| train(&LossSpec::vqe(h.clone()), &a, &cfg, s).unwrap().success).count();
        assert!(ok >= 1);
    }
}
