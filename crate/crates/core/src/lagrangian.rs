//! Exact Lagrangian solver.
//!
//! Eulerian data is mapped to a triple `(y, U, H)` of piecewise-linear
//! functions of the label `xi`, evolved by the closed-form solution of the
//! characteristic ODEs, and mapped back by push-forward. Every step is exact
//! up to floating-point rounding; the ODE right-hand side is linear in the
//! triple, so piecewise linearity in `xi` is preserved for all time.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::EulerianState;
use crate::measure::{is_plateau, Atom, Side};

/// Default width of the inert margin added on each side of the label window.
pub const DEFAULT_PAD: f64 = 1.0;

/// Piecewise-linear `(y, U, H)` on the nodes `xi`. Beyond the window
/// `y` has unit slope and `U`, `H` are constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianTriple {
    pub xi: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Vec<f64>,
}

/// Strictly increasing piecewise-linear relabeling with slopes in `[1/c, c]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelabelFn {
    pub nodes: Vec<(f64, f64)>,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelabelCheck {
    pub ok: bool,
    pub min_slope: f64,
    pub max_slope: f64,
    pub max_offset: f64,
    pub issues: Vec<String>,
}

/// Breaking times of every cell, measured from the time the triple represents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Breaking {
    /// Root of `y_xi(t) = 0` per cell; `None` where `y_xi` never vanishes.
    pub per_cell: Vec<Option<f64>>,
    pub first_positive: Option<f64>,
}

impl LagrangianTriple {
    pub fn new(xi: Vec<f64>, y: Vec<f64>, u: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let n = xi.len();
        if n < 2 || y.len() != n || u.len() != n || h.len() != n {
            return Err(Error::IncompatibleTriple("node arrays must share a length of at least 2".into()));
        }
        if xi.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::IncompatibleTriple("xi nodes must be strictly increasing".into()));
        }
        Ok(LagrangianTriple { xi, y, u, h })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.xi.len() - 1
    }

    /// Total energy `C = H(+inf) - H(-inf)`.
    pub fn energy(&self) -> f64 {
        self.h[self.h.len() - 1] - self.h[0]
    }

    /// Largest per-cell violation of `U_xi^2 = y_xi H_xi`, relative to
    /// `y_xi H_xi + U_xi^2` (zero on cells where all three vanish).
    pub fn compatibility_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.cells() {
            let dxi = self.xi[i + 1] - self.xi[i];
            let dy = (self.y[i + 1] - self.y[i]) / dxi;
            let du = (self.u[i + 1] - self.u[i]) / dxi;
            let dh = (self.h[i + 1] - self.h[i]) / dxi;
            let scale = dy * dh + du * du;
            if scale > 0.0 {
                worst = worst.max((du * du - dy * dh).abs() / scale);
            }
        }
        worst
    }

    /// Values `(y, U, H)` at an arbitrary label, extended by the tails.
    pub fn eval(&self, xi: f64) -> (f64, f64, f64) {
        let n = self.len();
        if xi <= self.xi[0] {
            return (self.y[0] + (xi - self.xi[0]), self.u[0], self.h[0]);
        }
        if xi >= self.xi[n - 1] {
            return (self.y[n - 1] + (xi - self.xi[n - 1]), self.u[n - 1], self.h[n - 1]);
        }
        let i = self.xi.partition_point(|&x| x <= xi) - 1;
        let s = (xi - self.xi[i]) / (self.xi[i + 1] - self.xi[i]);
        let lerp = |v: &[f64]| v[i] + s * (v[i + 1] - v[i]);
        (lerp(&self.y), lerp(&self.u), lerp(&self.h))
    }

    /// Closed-form flow over a time span `t`:
    /// `y += t (U + t/4 (H - C/2))`, `U += t/2 (H - C/2)`, `H` unchanged.
    pub fn evolve(&self, t: f64) -> Self {
        let half_c = 0.5 * self.energy();
        let h0 = self.h[0];
        let mut y = Vec::with_capacity(self.len());
        let mut u = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let force = (self.h[k] - h0) - half_c;
            y.push(self.y[k] + t * (self.u[k] + 0.25 * t * force));
            u.push(self.u[k] + 0.5 * t * force);
        }
        LagrangianTriple { xi: self.xi.clone(), y, u, h: self.h.clone() }
    }

    /// Per-cell roots of `y_xi(t) = y_xi + t U_xi + t^2/4 H_xi`.
    ///
    /// Compatibility makes the quadratic a perfect square, so its only root is
    /// `t = -2 U_xi / H_xi`; cells with `H_xi = 0` never break.
    pub fn wave_breaking(&self) -> Breaking {
        let mut per_cell = Vec::with_capacity(self.cells());
        for i in 0..self.cells() {
            let du = self.u[i + 1] - self.u[i];
            let dh = self.h[i + 1] - self.h[i];
            per_cell.push((dh > 0.0).then(|| -2.0 * du / dh));
        }
        let first_positive = per_cell
            .iter()
            .flatten()
            .copied()
            .filter(|&t| t > 0.0)
            .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
        Breaking { per_cell, first_positive }
    }

    /// Relabel so that `y + H = xi` at every node; returns the relabeling `f = y + H`.
    pub fn normalize(&self) -> Result<(Self, RelabelFn)> {
        let f: Vec<f64> = self.y.iter().zip(&self.h).map(|(y, h)| y + h).collect();
        let mut c: f64 = 1.0;
        for i in 0..self.cells() {
            let slope = (f[i + 1] - f[i]) / (self.xi[i + 1] - self.xi[i]);
            if slope <= 0.0 || !slope.is_finite() {
                return Err(Error::DegenerateCell { cell: i, slope });
            }
            c = c.max(slope).max(1.0 / slope);
        }
        let nodes = self.xi.iter().copied().zip(f.iter().copied()).collect();
        let normalized = LagrangianTriple { xi: f, y: self.y.clone(), u: self.u.clone(), h: self.h.clone() };
        Ok((normalized, RelabelFn { nodes, c }))
    }

    /// Push-forward to Eulerian variables: `u(y(xi)) = U(xi)` and
    /// `mu = y_# (H_xi d xi)`. Plateau cells of `y` become atoms.
    pub fn to_eulerian(&self) -> Result<EulerianState> {
        let n = self.len();
        // Outermost cells of a padded triple are inert and only repeat the tails.
        let inert = |i: usize| self.u[i + 1] == self.u[i] && self.h[i + 1] == self.h[i];
        let lo = usize::from(n > 2 && inert(0));
        let hi = if n - lo > 2 && inert(n - 2) { n - 2 } else { n - 1 };

        let mut nodes: Vec<(f64, f64)> = vec![(self.y[lo], self.u[lo])];
        let mut atoms: Vec<Atom> = Vec::new();
        for i in lo..hi {
            let dxi = self.xi[i + 1] - self.xi[i];
            let dy = self.y[i + 1] - self.y[i];
            let dh = self.h[i + 1] - self.h[i];
            if dy < 0.0 && !is_plateau(-dy, dxi, self.y[i]) {
                return Err(Error::IncompatibleTriple(format!("y decreasing on cell {i}")));
            }
            if is_plateau(dy, dxi, self.y[i]) {
                let du = (self.u[i + 1] - self.u[i]).abs();
                if du > 1e-9 * (1.0 + self.u[i].abs()) {
                    return Err(Error::IncompatibleTriple(format!(
                        "U changes by {du} on the plateau cell {i}"
                    )));
                }
                if dh > 0.0 {
                    let x = nodes[nodes.len() - 1].0;
                    match atoms.last_mut() {
                        Some(a) if a.position == x => a.mass += dh,
                        _ => atoms.push(Atom { position: x, mass: dh }),
                    }
                }
            } else {
                nodes.push((self.y[i + 1], self.u[i + 1]));
            }
        }
        Ok(EulerianState::new_unchecked(nodes, atoms))
    }

    /// Rows `xi,y,U,H` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,y,U,H\n");
        for k in 0..self.len() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", self.xi[k], self.y[k], self.u[k], self.h[k]);
        }
        out
    }
}

/// The map from Eulerian data to the normalized triple with `y + H = xi`.
///
/// Nodes sit at the images `x + F(x-)` of u-breakpoints and atom positions;
/// an atom of mass `m` adds a second node `m` further on, giving a plateau
/// of `y`. An inert cell of width `pad` is added on each side.
pub fn to_lagrangian(s: &EulerianState, pad: f64) -> Result<LagrangianTriple> {
    let report = s.validate();
    if !report.pass {
        return Err(Error::InvalidState(report.issues.join("; ")));
    }
    let mu = s.measure();
    let xs = s.breakpoints();
    let atom_mass = |x: f64| {
        s.atoms()
            .binary_search_by(|a| a.position.total_cmp(&x))
            .map_or(0.0, |i| s.atoms()[i].mass)
    };
    let mut t = LagrangianTriple { xi: Vec::new(), y: Vec::new(), u: Vec::new(), h: Vec::new() };
    let mut push = |xi: f64, y: f64, u: f64, h: f64| {
        t.xi.push(xi);
        t.y.push(y);
        t.u.push(u);
        t.h.push(h);
    };
    let x0 = xs[0];
    push(x0 - pad, x0 - pad, s.eval_u(x0), 0.0);
    let mut last = (x0, 0.0);
    for &x in &xs {
        let h_left = mu.cdf(x, Side::Left);
        let u = s.eval_u(x);
        push(x + h_left, x, u, h_left);
        let m = atom_mass(x);
        if m > 0.0 {
            push(x + h_left + m, x, u, h_left + m);
        }
        last = (x, h_left + m);
    }
    let (xl, hl) = last;
    push(xl + hl + pad, xl + pad, s.eval_u(xl), hl);
    LagrangianTriple::new(t.xi, t.y, t.u, t.h)
}

impl RelabelFn {
    pub fn identity() -> Self {
        RelabelFn { nodes: vec![(0.0, 0.0), (1.0, 1.0)], c: 1.0 }
    }

    /// Monotone, `f - id` bounded and slopes within `[1/c, c]`.
    pub fn check(&self) -> RelabelCheck {
        let mut issues = Vec::new();
        let mut min_slope = f64::INFINITY;
        let mut max_slope: f64 = 0.0;
        let mut max_offset: f64 = 0.0;
        for (i, w) in self.nodes.windows(2).enumerate() {
            let dx = w[1].0 - w[0].0;
            if dx <= 0.0 {
                issues.push(format!("labels not increasing at node {}", i + 1));
                continue;
            }
            let slope = (w[1].1 - w[0].1) / dx;
            min_slope = min_slope.min(slope);
            max_slope = max_slope.max(slope);
        }
        for &(x, fx) in &self.nodes {
            max_offset = max_offset.max((fx - x).abs());
        }
        if !max_offset.is_finite() {
            issues.push("f - id is unbounded".to_string());
        }
        if min_slope <= 0.0 {
            issues.push(format!("slope {min_slope} is not positive"));
        }
        if self.c < 1.0 || min_slope < 1.0 / self.c * (1.0 - 1e-12) || max_slope > self.c * (1.0 + 1e-12) {
            issues.push(format!(
                "slopes [{min_slope}, {max_slope}] outside [1/{c}, {c}]",
                c = self.c
            ));
        }
        RelabelCheck { ok: issues.is_empty(), min_slope, max_slope, max_offset, issues }
    }
}

/// Exact solution for given initial data, evaluable at any time.
#[derive(Debug, Clone)]
pub struct LagrangianFlow {
    initial: LagrangianTriple,
}

impl LagrangianFlow {
    pub fn new(s: &EulerianState) -> Result<Self> {
        Ok(LagrangianFlow { initial: to_lagrangian(s, DEFAULT_PAD)? })
    }

    pub fn initial(&self) -> &LagrangianTriple {
        &self.initial
    }

    pub fn energy(&self) -> f64 {
        self.initial.energy()
    }

    pub fn triple_at(&self, t: f64) -> LagrangianTriple {
        self.initial.evolve(t)
    }

    pub fn state_at(&self, t: f64) -> Result<EulerianState> {
        self.triple_at(t).to_eulerian()
    }

    /// First positive breaking time of the initial data.
    pub fn breaking_time(&self) -> Option<f64> {
        self.initial.wave_breaking().first_positive
    }

    /// All distinct positive breaking times, sorted.
    pub fn breaking_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self
            .initial
            .wave_breaking()
            .per_cell
            .into_iter()
            .flatten()
            .filter(|&t| t > 0.0)
            .collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }
}
