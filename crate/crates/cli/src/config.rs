//! Run configuration shared by every command.

use std::path::PathBuf;

use serde::Serialize;

use hs_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Lagrangian,
    Eta,
    Both,
}

impl SolverChoice {
    pub fn uses_eta(self) -> bool {
        matches!(self, SolverChoice::Eta | SolverChoice::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// Built-in scenario name or path to a JSON state.
    pub scenario: String,
    pub solver: SolverChoice,
    pub t_end: f64,
    /// Output times; empty means nine equally spaced times on `[0, t_end]`.
    pub times: Vec<f64>,
    /// Kernel exponent of the smoothed system.
    pub n: u32,
    /// Moment exponent.
    pub gamma: f64,
    pub grid: usize,
    pub dt: f64,
    pub out: PathBuf,
    pub seed: u64,
    /// Multiply every output `u` by this factor (diagnostic corruption).
    pub perturb_u: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: "delta:8".into(),
            solver: SolverChoice::Lagrangian,
            t_end: 2.0,
            times: Vec::new(),
            n: 3,
            gamma: 3.0,
            grid: 2000,
            dt: 1e-3,
            out: PathBuf::from("out"),
            seed: 0,
            perturb_u: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return fail(format!("t_end must be positive, got {}", self.t_end));
        }
        if let Some(t) = self.times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return fail(format!("output time {t} is outside [0, {}]", self.t_end));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return fail("output times must be strictly increasing".into());
        }
        if !(self.gamma > 2.0) {
            return fail(format!("gamma must exceed 2, got {}", self.gamma));
        }
        if self.n == 0 {
            return fail("kernel exponent n must be at least 1".into());
        }
        if self.solver.uses_eta() && (self.n as f64) < self.gamma {
            return fail(format!("the eta solver needs n >= gamma, got n = {} and gamma = {}", self.n, self.gamma));
        }
        if self.grid < 2 {
            return fail(format!("grid must have at least 2 cells, got {}", self.grid));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if let Some(f) = self.perturb_u {
            if !f.is_finite() {
                return fail("perturbation factor must be finite".into());
            }
        }
        Ok(())
    }

    /// The requested output times, or the default equally spaced set.
    pub fn output_times(&self) -> Vec<f64> {
        if self.times.is_empty() {
            (0..=8).map(|k| self.t_end * k as f64 / 8.0).collect()
        } else {
            self.times.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::default().output_times().len(), 9);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let bad = [
            RunConfig { gamma: 2.0, ..Default::default() },
            RunConfig { t_end: 0.0, ..Default::default() },
            RunConfig { times: vec![0.0, 3.0], ..Default::default() },
            RunConfig { times: vec![1.0, 0.5], ..Default::default() },
            RunConfig { solver: SolverChoice::Eta, n: 2, ..Default::default() },
            RunConfig { dt: -1.0, ..Default::default() },
            RunConfig { grid: 1, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
        // n < gamma is fine when the smoothed system is not involved.
        RunConfig { n: 2, ..Default::default() }.validate().unwrap();
    }
}
