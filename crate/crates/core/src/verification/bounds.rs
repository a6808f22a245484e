//! Quantitative bounds: Lipschitz growth along characteristics, time
//! continuity of `mu`, the three-halves expansion of `H`, moment growth and
//! the `h`-field estimates of the smoothed system.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eta::EtaState;
use crate::eulerian::EulerianState;
use crate::kernel::KernelSpec;
use crate::lagrangian::{to_lagrangian, LagrangianFlow, LagrangianTriple, DEFAULT_PAD};
use crate::measure::{bl_distance, RadonMeasure1D};
use crate::trajectory::Solution;
use crate::verification::holder::linear_fit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipReport {
    /// `max |dU/dzeta| / e^t` over the sampled times.
    pub max_ratio: f64,
    pub worst_time: f64,
}

/// Lipschitz constant of `zeta -> U(t, zeta)` along initial labels, divided
/// by `e^t`. `initial` must satisfy `y + H = xi`.
///
/// `U` is piecewise linear in the label for all time, so the per-cell
/// difference quotients are the exact Lipschitz constant.
pub fn lip_eta_u_check(initial: &LagrangianTriple, times: &[f64]) -> LipReport {
    let mut report = LipReport { max_ratio: 0.0, worst_time: times.first().copied().unwrap_or(0.0) };
    for &t in times {
        let x = initial.evolve(t);
        let lip = (0..x.cells())
            .map(|i| ((x.u[i + 1] - x.u[i]) / (x.xi[i + 1] - x.xi[i])).abs())
            .fold(0.0, f64::max);
        let ratio = lip / t.exp();
        if ratio > report.max_ratio {
            report = LipReport { max_ratio: ratio, worst_time: t };
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrReport {
    /// Smallest `bound - distance` over the pairs.
    pub min_slack: f64,
    pub worst_pair: (f64, f64),
    pub worst_distance: f64,
    pub worst_bound: f64,
}

/// `d_BL(mu(t), mu(s)) <= |t-s| (||u(s)|| + |t-s| C / 8) C + 2 res C` for
/// each pair. `energy_override` replaces `C` in the bound only.
pub fn kr_time_check(
    sol: &dyn Solution,
    pairs: &[(f64, f64)],
    resolution: f64,
    energy_override: Option<f64>,
) -> Result<KrReport> {
    let c = energy_override.unwrap_or_else(|| sol.energy());
    let mut report = KrReport {
        min_slack: f64::INFINITY,
        worst_pair: (0.0, 0.0),
        worst_distance: 0.0,
        worst_bound: 0.0,
    };
    for &(a, b) in pairs {
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        let early = sol.snapshot(s)?;
        let late = sol.snapshot(t)?;
        let dt = t - s;
        let bound = dt * (early.state.sup_norm() + dt * c / 8.0) * c + 2.0 * resolution * c;
        let dist = bl_distance(&late.measure, &early.measure, resolution);
        if bound - dist < report.min_slack {
            report = KrReport { min_slack: bound - dist, worst_pair: (s, t), worst_distance: dist, worst_bound: bound };
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct A1Fit {
    /// Slope of `log E` against `log |t - s|`; `None` when `E` vanishes.
    pub order: Option<f64>,
    pub intercept: Option<f64>,
    /// `(|t - s|, E)` per sample.
    pub errors: Vec<(f64, f64)>,
}

struct Slice {
    state: EulerianState,
    mu: RadonMeasure1D,
    triple: LagrangianTriple,
}

impl Slice {
    fn at(flow: &LagrangianFlow, t: f64) -> Result<Self> {
        let state = flow.state_at(t)?;
        let triple = to_lagrangian(&state, DEFAULT_PAD)?;
        Ok(Slice { mu: state.measure(), state, triple })
    }

    /// `H = int_{-inf}^{y} p + (xi - y)` together with `y` and `U`.
    fn h(&self, spec: &KernelSpec, xi: f64) -> (f64, f64, f64) {
        let (y, u, _) = self.triple.eval(xi);
        (spec.convolve_cdf(&self.mu, y) + (xi - y), y, u)
    }
}

/// Error of the first-order expansion of `H(s, xi)` about the shifted label
/// `xi + u(t, y(t, xi)) (t - s)`, fitted against `|t - s|` on a log scale.
///
/// With `corrections` off, only `H(s, xi) - H(t, xi')` is measured.
pub fn appendix_a1_order(
    s: &EulerianState,
    spec: KernelSpec,
    xi: f64,
    t: f64,
    s_seq: &[f64],
    corrections: bool,
) -> Result<A1Fit> {
    let flow = LagrangianFlow::new(s)?;
    let now = Slice::at(&flow, t)?;
    let (_, _, u_xi) = now.h(&spec, xi);
    let mut errors = Vec::with_capacity(s_seq.len());
    for &sv in s_seq {
        let earlier = Slice::at(&flow, sv)?;
        let shifted = xi + u_xi * (t - sv);
        let (h_t, y_shift, _) = now.h(&spec, shifted);
        let (h_s, _, _) = earlier.h(&spec, xi);
        let mut e = h_s - h_t;
        if corrections {
            e += spec.convolve(&now.mu, y_shift) * u_xi * (t - sv);
            e += spec.u_weighted(&now.state, y_shift).0 * (sv - t);
        }
        errors.push(((t - sv).abs(), e.abs()));
    }
    let scale = 1.0 + s.energy();
    let usable: Vec<&(f64, f64)> = errors.iter().filter(|e| e.1 > 1e-15 * scale).collect();
    if usable.len() < 2 {
        return Ok(A1Fit { order: None, intercept: None, errors });
    }
    let xs: Vec<f64> = usable.iter().map(|e| e.0.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|e| e.1.ln()).collect();
    let (order, intercept) = linear_fit(&xs, &ys);
    Ok(A1Fit { order: Some(order), intercept: Some(intercept), errors })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentFit {
    /// Smallest `C~` with `M(t) <= C~ (M(0) + t^gamma)` at every sample.
    pub c_tilde: f64,
    /// `(t, M(t))` with `M(t) = int (1 + |x|^gamma) d mu(t)`.
    pub moments: Vec<(f64, f64)>,
}

pub fn moment_growth_check(sol: &dyn Solution, times: &[f64], gamma: f64) -> Result<MomentFit> {
    if !(gamma > 2.0) {
        return Err(Error::Config(format!("moment exponent must exceed 2, got {gamma}")));
    }
    let m0 = sol.snapshot(0.0)?.measure.moment(gamma);
    let mut moments = Vec::with_capacity(times.len());
    let mut c_tilde: f64 = 0.0;
    for &t in times {
        let m = sol.snapshot(t)?.measure.moment(gamma);
        moments.push((t, m));
        let denom = m0 + t.powf(gamma);
        if m > 0.0 {
            c_tilde = c_tilde.max(if denom > 0.0 { m / denom } else { f64::INFINITY });
        }
    }
    Ok(MomentFit { c_tilde, moments })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PMomentReport {
    /// `int (1 + |x|^gamma) p dx`.
    pub p_moment: f64,
    /// `2^gamma pi int (1 + |y|^gamma) d mu`.
    pub bound: f64,
}

/// Moment of `p = K_n * mu` against the bound in terms of the moment of `mu`.
/// Requires `n >= gamma`.
pub fn p_moment_check(mu: &RadonMeasure1D, spec: KernelSpec, gamma: f64, tolerance: f64) -> Result<PMomentReport> {
    if (spec.n() as f64) < gamma {
        return Err(Error::Config(format!("kernel exponent {} is below gamma = {gamma}", spec.n())));
    }
    Ok(PMomentReport {
        p_moment: spec.p_moment(mu, gamma, tolerance),
        bound: 2f64.powf(gamma) * std::f64::consts::PI * mu.moment(gamma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HBoundSample {
    pub t: f64,
    pub sup: f64,
    pub sup_bound: f64,
    pub lip: f64,
    pub lip_bound: f64,
}

impl HBoundSample {
    pub fn of(state: &EtaState) -> Self {
        let t = state.time();
        let h = state.h_field();
        let sup = h.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let lip = h
            .windows(2)
            .zip(state.m.windows(2))
            .map(|(hh, mm)| ((hh[1] - hh[0]) / (mm[1] - mm[0])).abs())
            .fold(0.0, f64::max);
        HBoundSample { t, sup, sup_bound: state.h_sup_bound(t), lip, lip_bound: state.h_lipschitz_bound(t) }
    }

    pub fn slack(&self) -> f64 {
        (self.sup_bound - self.sup).min(self.lip_bound - self.lip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Atom;
    use crate::trajectory::{StaticSolution, Trajectory};

    fn delta(alpha: f64) -> EulerianState {
        EulerianState::new(vec![(0.0, 0.0)], vec![Atom { position: 0.0, mass: alpha }]).unwrap()
    }

    fn breaking(s: f64) -> EulerianState {
        EulerianState::new(vec![(-2.0, 0.0), (-1.0, s), (1.0, -s), (2.0, 0.0)], vec![]).unwrap()
    }

    #[test]
    fn lip_ratio_examples() {
        let times: Vec<f64> = (0..=40).map(|k| 0.1 * k as f64).collect();
        let zero = LagrangianFlow::new(&EulerianState::zero()).unwrap();
        assert_eq!(lip_eta_u_check(zero.initial(), &times).max_ratio, 0.0);
        for s in [delta(8.0), breaking(1.0), breaking(3.0)] {
            let flow = LagrangianFlow::new(&s).unwrap();
            assert!(lip_eta_u_check(flow.initial(), &times).max_ratio <= 1.0);
            assert!(lip_eta_u_check(flow.initial(), &[0.0]).max_ratio <= 0.5 + 1e-15);
        }
    }

    #[test]
    fn kr_examples() {
        let zero = StaticSolution(EulerianState::zero());
        let r = kr_time_check(&zero, &[(0.0, 1.0)], 1e-3, None).unwrap();
        assert_eq!(r.min_slack, 0.0);
        let flow = LagrangianFlow::new(&delta(8.0)).unwrap();
        let pairs = [(0.5, 2.0), (1.0, 1.1), (1.9, 2.0)];
        assert!(kr_time_check(&flow, &pairs, 1e-3, None).unwrap().min_slack >= 0.0);
        assert!(kr_time_check(&flow, &pairs, 1e-3, Some(0.0)).unwrap().min_slack < 0.0);
    }

    #[test]
    fn a1_zero_state_is_exact() {
        let fit = appendix_a1_order(&EulerianState::zero(), KernelSpec::default(), 0.3, 1.0, &[0.9, 0.95], true).unwrap();
        assert_eq!(fit.order, None);
        assert!(fit.errors.iter().all(|e| e.1 == 0.0));
    }

    #[test]
    fn a1_corrections_raise_the_order() {
        let seq: Vec<f64> = (4..=10).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        let with = appendix_a1_order(&breaking(1.0), KernelSpec::default(), 1.2, 1.0, &seq, true).unwrap();
        let without = appendix_a1_order(&breaking(1.0), KernelSpec::default(), 1.2, 1.0, &seq, false).unwrap();
        assert!(with.order.unwrap() >= 1.4, "{with:?}");
        assert!(without.order.unwrap() <= 1.1, "{without:?}");
    }

    #[test]
    fn moment_examples() {
        let zero = StaticSolution(EulerianState::zero());
        let fit = moment_growth_check(&zero, &[0.0, 1.0, 2.0], 3.0).unwrap();
        assert!(fit.c_tilde <= 1.0);
        let traj = Trajectory::lagrangian(&delta(8.0), &[0.0, 1.0, 2.0, 4.0]).unwrap();
        let fit = moment_growth_check(&traj, &traj.times(), 3.0).unwrap();
        assert!(fit.c_tilde.is_finite() && fit.c_tilde >= 1.0);
        assert!(moment_growth_check(&traj, &traj.times(), 2.0).is_err());
    }

    #[test]
    fn p_moment_bound_holds() {
        let spec = KernelSpec::new(3).unwrap();
        let mu = RadonMeasure1D::dirac(1.0, 2.0).unwrap();
        let r = p_moment_check(&mu, spec, 3.0, 1e-8).unwrap();
        assert!((r.p_moment - 7.21238898038469).abs() < 1e-6);
        assert!(r.p_moment <= r.bound);
        assert!(p_moment_check(&mu, KernelSpec::new(2).unwrap(), 3.0, 1e-8).is_err());
    }

    #[test]
    fn h_bounds_on_a_short_delta_run() {
        let mut st = EtaState::from_eulerian(&delta(8.0), KernelSpec::default(), 200).unwrap();
        for _ in 0..5 {
            st = st.advance_to(st.time() + 0.2, 1e-2).unwrap();
            let s = HBoundSample::of(&st);
            assert!(s.slack() >= 0.0, "{s:?}");
        }
    }
}
