//! Numerical checks of the properties a conservative solution must have.
//! Every check returns numbers; [`CheckResult`] turns them into a verdict
//! with a signed margin (positive means the property holds with room).

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub mod bounds;
pub mod holder;
pub mod weak;

pub use bounds::{
    appendix_a1_order, kr_time_check, lip_eta_u_check, moment_growth_check, p_moment_check, A1Fit, HBoundSample,
    KrReport, LipReport, MomentFit, PMomentReport,
};
pub use holder::{default_radii, holder_check, pair_modulus, sample_times, HolderFit};
pub use weak::{weak_residual, TestFunction, WeakQuadrature, WeakResidual};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub fitted: BTreeMap<String, Value>,
    pub parameters: BTreeMap<String, Value>,
}

impl CheckResult {
    /// Pass exactly when `margin >= 0`.
    pub fn from_margin(name: &str, margin: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            pass: margin >= 0.0,
            margin,
            fitted: BTreeMap::new(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn fitted(mut self, key: &str, value: impl Serialize) -> Self {
        self.fitted.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// One line: `PASS name (margin ...)`.
    pub fn summary(&self) -> String {
        format!("{} {} (margin {:.3e})", if self.pass { "PASS" } else { "FAIL" }, self.name, self.margin)
    }
}
