//! Built-in initial data and scenario files.

use std::fs;
use std::path::Path;

use hs_core::{Atom, EulerianState, Error, Result};

/// Names accepted by [`load`] besides file paths.
pub const BUILTINS: &[&str] = &["zero", "delta[:alpha]", "breaking[:slope]", "two-atom", "eq-counter-check"];

/// `u = 0` with a point mass `alpha` at the origin.
pub fn delta(alpha: f64) -> Result<EulerianState> {
    EulerianState::new(vec![(0.0, 0.0)], vec![Atom { position: 0.0, mass: alpha }])
}

/// Tent-shaped data whose middle segment has slope `-slope`, so the first
/// breaking time is `2 / slope`.
pub fn breaking(slope: f64) -> Result<EulerianState> {
    EulerianState::new(vec![(-2.0, 0.0), (-1.0, slope), (1.0, -slope), (2.0, 0.0)], vec![])
}

/// `u = 0` with equal point masses at `-1` and `1`.
pub fn two_atom() -> Result<EulerianState> {
    EulerianState::new(
        vec![(0.0, 0.0)],
        vec![Atom { position: -1.0, mass: 4.0 }, Atom { position: 1.0, mass: 4.0 }],
    )
}

fn parameter(name: &str, arg: Option<&str>, default: f64) -> Result<f64> {
    match arg {
        None => Ok(default),
        Some(a) => a
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite() && *v > 0.0)
            .ok_or_else(|| Error::Config(format!("scenario `{name}` needs a positive number, got `{a}`"))),
    }
}

/// Resolve a built-in name such as `delta:8` or read a JSON state file.
pub fn load(spec: &str) -> Result<EulerianState> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    match name {
        "zero" => Ok(EulerianState::zero()),
        "delta" => delta(parameter(name, arg, 8.0)?),
        "eq-counter-check" => delta(8.0),
        "breaking" => breaking(parameter(name, arg, 1.0)?),
        "two-atom" => two_atom(),
        _ => from_file(Path::new(spec)),
    }
}

pub fn from_file(path: &Path) -> Result<EulerianState> {
    let text = fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => Error::Config(format!(
            "`{}` is neither a scenario file nor one of {}",
            path.display(),
            BUILTINS.join(", ")
        )),
        _ => Error::Io { path: path.to_path_buf(), source },
    })?;
    let state: EulerianState =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    let report = state.validate();
    if !report.pass {
        return Err(Error::Config(format!("{}: {}", path.display(), report.issues.join("; "))));
    }
    Ok(state)
}
