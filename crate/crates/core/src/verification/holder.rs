//! Space-time modulus of continuity of `u` and its power-law fit.
//!
//! For a radius `r` the envelope is `Omega(r) = max |u(t,x) - u(s,y)|` over
//! `|t - s| + |x - y| <= r`, with `t, s` drawn from a fixed set of sample
//! times and the spatial maximum computed exactly for piecewise-linear `u`.
//! The slope of `log Omega` against `log r` is the fitted exponent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::eulerian::EulerianState;
use crate::trajectory::Solution;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    pub exponent: f64,
    /// `D` in `Omega(r) ~ D r^exponent`.
    pub constant: f64,
    /// `u` took a single value on every sample; exponent reported as 1.
    pub constant_field: bool,
    /// `(r, Omega(r))` pairs used in the fit.
    pub envelope: Vec<(f64, f64)>,
}

/// `sup_{|x - y| <= rho} |u_a(x) - u_b(y)|`.
///
/// `u_a(x) - u_b(y)` is piecewise linear on the strip, so the extremum sits at
/// a vertex formed by breakpoint lines and the strip edges.
pub fn pair_modulus(a: &EulerianState, b: &EulerianState, rho: f64) -> f64 {
    let xa: Vec<f64> = a.u_nodes().iter().map(|n| n.0).collect();
    let xb: Vec<f64> = b.u_nodes().iter().map(|n| n.0).collect();
    let diff = |x: f64, y: f64| (a.eval_u(x) - b.eval_u(y)).abs();
    let lo = xa[0].min(xb[0]) - rho - 1.0;
    let hi = xa[xa.len() - 1].max(xb[xb.len() - 1]) + rho + 1.0;
    let mut best = diff(lo, lo).max(diff(hi, hi));
    for &x in &xa {
        best = best.max(diff(x, x - rho)).max(diff(x, x + rho));
        let from = xb.partition_point(|&y| y < x - rho);
        for &y in xb[from..].iter().take_while(|&&y| y <= x + rho) {
            best = best.max(diff(x, y));
        }
    }
    for &y in &xb {
        best = best.max(diff(y - rho, y)).max(diff(y + rho, y));
    }
    best
}

/// Sample times for a fit centred at `t_center`: a geometric ladder
/// `t_center +- half_window 2^(-j/2)` plus `extra` uniform draws from `seed`,
/// clipped to `[t_min, t_max]`.
pub fn sample_times(t_center: f64, half_window: f64, t_min: f64, t_max: f64, extra: usize, seed: u64) -> Vec<f64> {
    let mut ts = vec![t_center];
    for j in 0..=24 {
        let d = half_window * 0.5f64.powf(0.5 * j as f64);
        ts.push(t_center - d);
        ts.push(t_center + d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        ts.push(t_center + rng.gen_range(-half_window..=half_window));
    }
    ts.retain(|t| *t >= t_min && *t <= t_max);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Default radii: `r_max 2^(-k/2)` for `k = 0..=16`.
pub fn default_radii(r_max: f64) -> Vec<f64> {
    (0..=16).map(|k| r_max * 0.5f64.powf(0.5 * k as f64)).collect()
}

/// Least-squares slope and intercept of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fit `Omega(r) ~ D r^alpha` from snapshots at `times`.
pub fn holder_check(sol: &dyn Solution, times: &[f64], radii: &[f64]) -> Result<HolderFit> {
    let states: Vec<EulerianState> = times.iter().map(|&t| sol.snapshot(t).map(|s| s.state)).collect::<Result<_>>()?;
    let mut envelope = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut omega: f64 = 0.0;
        for i in 0..states.len() {
            for j in i..states.len() {
                let gap = (times[j] - times[i]).abs();
                if gap <= r {
                    omega = omega.max(pair_modulus(&states[i], &states[j], r - gap));
                }
            }
        }
        envelope.push((r, omega));
    }
    let scale = states.iter().map(|s| s.sup_norm()).fold(0.0, f64::max).max(1.0);
    let usable: Vec<(f64, f64)> = envelope.iter().copied().filter(|e| e.1 > 1e-14 * scale).collect();
    if usable.len() < 2 {
        return Ok(HolderFit { exponent: 1.0, constant: 0.0, constant_field: true, envelope });
    }
    let xs: Vec<f64> = usable.iter().map(|e| e.0.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|e| e.1.ln()).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    Ok(HolderFit { exponent: slope, constant: intercept.exp(), constant_field: false, envelope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lagrangian::LagrangianFlow;
    use crate::trajectory::StaticSolution;

    fn breaking(s: f64) -> EulerianState {
        EulerianState::new(vec![(-2.0, 0.0), (-1.0, s), (1.0, -s), (2.0, 0.0)], vec![]).unwrap()
    }

    #[test]
    fn pair_modulus_of_a_ramp() {
        let ramp = EulerianState::new(vec![(0.0, 0.0), (1.0, 2.0)], vec![]).unwrap();
        assert!((pair_modulus(&ramp, &ramp, 0.25) - 0.5).abs() < 1e-15);
        assert!((pair_modulus(&ramp, &ramp, 5.0) - 2.0).abs() < 1e-15);
        let shifted = ramp.scaled_u(0.5);
        // Best pair: x = 1, y far left.
        assert!((pair_modulus(&ramp, &shifted, 3.0) - 2.0).abs() < 1e-15);
        assert_eq!(pair_modulus(&ramp, &ramp, 0.0), 0.0);
    }

    #[test]
    fn pair_modulus_agrees_with_brute_force() {
        let a = breaking(1.0);
        let b = LagrangianFlow::new(&a).unwrap().state_at(0.7).unwrap();
        let rho = 0.37;
        let mut brute: f64 = 0.0;
        for i in 0..=800 {
            let x = -3.0 + 6.0 * i as f64 / 800.0;
            for j in 0..=40 {
                let y = x - rho + 2.0 * rho * j as f64 / 40.0;
                brute = brute.max((a.eval_u(x) - b.eval_u(y)).abs());
            }
        }
        let exact = pair_modulus(&a, &b, rho);
        assert!(exact >= brute - 1e-12 && exact - brute < 1e-2, "{exact} {brute}");
    }

    #[test]
    fn constant_field_is_flagged() {
        let fit = holder_check(&StaticSolution(EulerianState::zero()), &[0.0, 0.5, 1.0], &default_radii(0.1)).unwrap();
        assert!(fit.constant_field);
        assert_eq!(fit.exponent, 1.0);
        assert!(fit.envelope.iter().all(|e| e.1 == 0.0 && e.0.is_finite()));
    }

    #[test]
    fn exponent_is_one_half_near_breaking_and_one_before() {
        let flow = LagrangianFlow::new(&breaking(1.0)).unwrap();
        let near = holder_check(&flow, &sample_times(2.0, 0.1, 0.0, 4.0, 20, 7), &default_radii(5e-3)).unwrap();
        assert!((near.exponent - 0.5).abs() < 0.05, "{near:?}");
        let early = holder_check(&flow, &sample_times(0.75, 0.1, 0.0, 4.0, 20, 7), &default_radii(5e-3)).unwrap();
        assert!(early.exponent > 0.9, "{early:?}");
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (m, c) = linear_fit(&xs, &ys);
        assert!((m + 0.5).abs() < 1e-15 && (c - 2.0).abs() < 1e-15);
    }
}
