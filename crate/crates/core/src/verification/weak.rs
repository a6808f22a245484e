//! Residuals of the weak formulation against compactly supported bumps.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{MonotoneFn, RadonMeasure1D, Side};
use crate::trajectory::{Snapshot, Solution};

/// Smooth bump `exp(1 - 1/(1 - r^2))` on `|r| < 1` and its derivative. All
/// derivatives vanish at the support boundary, so integrands stay smooth in
/// time while mass crosses the edge of the support.
fn profile(r: f64) -> (f64, f64) {
    let q = 1.0 - r * r;
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    let v = (1.0 - 1.0 / q).exp();
    (v, -2.0 * r / (q * q) * v)
}

/// Tensor-product bump `phi(t, x) = b((t - t_c)/a_t) b((x - x_c)/a_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_half: f64,
    pub x_center: f64,
    pub x_half: f64,
}

impl TestFunction {
    pub fn new(t_center: f64, t_half: f64, x_center: f64, x_half: f64) -> Result<Self> {
        if !(t_half > 0.0 && x_half > 0.0) || !t_center.is_finite() || !x_center.is_finite() {
            return Err(Error::Config("test function needs finite centre and positive half-widths".into()));
        }
        Ok(TestFunction { t_center, t_half, x_center, x_half })
    }

    /// A bump whose time support ends by `t_end`; roughly a third of draws
    /// reach back past `t = 0` so the initial-data terms are exercised.
    pub fn random(rng: &mut impl Rng, t_end: f64, x_range: (f64, f64)) -> Self {
        let t_half = rng.gen_range(0.2..0.4) * t_end;
        let t_center = rng.gen_range(-0.5 * t_half..t_end - t_half);
        TestFunction {
            t_center,
            t_half,
            x_center: rng.gen_range(x_range.0..x_range.1),
            x_half: rng.gen_range(0.5..2.0),
        }
    }

    /// `(phi, phi_t, phi_x)`.
    pub fn eval(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (bt, dbt) = profile((t - self.t_center) / self.t_half);
        let (bx, dbx) = profile((x - self.x_center) / self.x_half);
        (bt * bx, dbt / self.t_half * bx, bt * dbx / self.x_half)
    }

    pub fn t_support(&self) -> (f64, f64) {
        (self.t_center - self.t_half, self.t_center + self.t_half)
    }

    pub fn x_support(&self) -> (f64, f64) {
        (self.x_center - self.x_half, self.x_center + self.x_half)
    }
}

/// Number of panels across the support in each direction. Panels
/// are further split wherever the data has a kink or a jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakQuadrature {
    pub nt: usize,
    pub nx: usize,
}

impl Default for WeakQuadrature {
    fn default() -> Self {
        WeakQuadrature { nt: 64, nx: 64 }
    }
}

impl WeakQuadrature {
    pub fn refined(self) -> Self {
        WeakQuadrature { nt: 2 * self.nt, nx: 2 * self.nx }
    }

    /// Every time at which [`weak_residual`] will request a snapshot.
    pub fn time_nodes(&self, phi: &TestFunction, singular: &[f64]) -> Vec<f64> {
        let (lo, hi) = phi.t_support();
        let mut nodes = Vec::new();
        let panels = panels(lo.max(0.0), hi, self.nt, singular);
        for &(l, r) in &panels {
            nodes.push(l);
            nodes.push(0.5 * (l + r));
        }
        if let Some(&(_, r)) = panels.last() {
            nodes.push(r);
        }
        nodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    /// Momentum equation residual.
    pub r1: f64,
    /// Energy transport residual.
    pub r2: f64,
}

/// `n` equal panels on `[a, b]`, each split at the cuts falling inside it.
fn panels(a: f64, b: f64, n: usize, cuts: &[f64]) -> Vec<(f64, f64)> {
    let n = n.max(1);
    let mut pts: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    pts[n] = b;
    let min_gap = 1e-13 * (b - a).max(1.0);
    pts.extend(cuts.iter().copied().filter(|&c| c > a + min_gap && c < b - min_gap));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= min_gap);
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Four-point Gauss-Legendre on each panel. Nodes are interior, so values
/// at the cut points, where the data may jump, are never sampled.
fn gauss(panels: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    let rule = RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(4).unwrap()));
    panels.iter().map(|&(l, r)| rule.integrate(l, r, &f)).sum()
}

/// Piecewise-constant density of `mu`, taking the one-sided value at ends.
fn density(mu: &RadonMeasure1D, x: f64, side: Side) -> f64 {
    let pieces = mu.pieces();
    let i = match side {
        Side::Left => pieces.partition_point(|p| p.right < x),
        Side::Right => pieces.partition_point(|p| p.right <= x),
    };
    match pieces.get(i) {
        Some(p) if (side == Side::Left && p.left < x) || (side == Side::Right && p.left <= x) => p.value,
        _ => 0.0,
    }
}

struct SliceData<'a> {
    snap: &'a Snapshot,
    dist: MonotoneFn,
    mass: f64,
    x_panels: Vec<(f64, f64)>,
}

impl<'a> SliceData<'a> {
    fn new(snap: &'a Snapshot, phi: &TestFunction, nx: usize) -> Self {
        let mu = &snap.measure;
        let mut cuts: Vec<f64> = snap.state.u_nodes().iter().map(|n| n.0).collect();
        cuts.extend(mu.atoms().iter().map(|a| a.position));
        for p in mu.pieces() {
            cuts.push(p.left);
            cuts.push(p.right);
        }
        let (lo, hi) = phi.x_support();
        SliceData { snap, dist: mu.distribution(), mass: mu.total_mass(), x_panels: panels(lo, hi, nx, &cuts) }
    }

    /// `int [u phi_t + u^2 phi_x / 2 + (F_- - F_+) phi / 4] dx` at one time.
    fn momentum(&self, phi: &TestFunction, t: f64) -> f64 {
        gauss(&self.x_panels, |x| {
            let (p, pt, px) = phi.eval(t, x);
            let u = self.snap.state.eval_u(x);
            let left = self.dist.eval(x);
            u * pt + 0.5 * u * u * px + 0.25 * (2.0 * left - self.mass) * p
        })
    }

    /// `int (phi_t + u phi_x) d mu` at one time.
    fn transport(&self, phi: &TestFunction, t: f64) -> f64 {
        let mu = &self.snap.measure;
        let g = |x: f64| {
            let (_, pt, px) = phi.eval(t, x);
            pt + self.snap.state.eval_u(x) * px
        };
        let atoms: f64 = mu.atoms().iter().map(|a| a.mass * g(a.position)).sum();
        atoms + gauss(&self.x_panels, |x| density(mu, x, Side::Left) * g(x))
    }

    fn u_phi(&self, phi: &TestFunction) -> f64 {
        gauss(&self.x_panels, |x| self.snap.state.eval_u(x) * phi.eval(0.0, x).0)
    }

    fn phi_mu(&self, phi: &TestFunction) -> f64 {
        let mu = &self.snap.measure;
        let atoms: f64 = mu.atoms().iter().map(|a| a.mass * phi.eval(0.0, a.position).0).sum();
        atoms + gauss(&self.x_panels, |x| density(mu, x, Side::Left) * phi.eval(0.0, x).0)
    }
}

/// Both weak-form residuals of a solution against `phi`: composite Simpson
/// in `t`, Gauss-Legendre panels in `x`. Atoms of `mu` are integrated exactly.
pub fn weak_residual(sol: &dyn Solution, phi: &TestFunction, quad: WeakQuadrature) -> Result<WeakResidual> {
    let (t_lo, t_hi) = phi.t_support();
    if t_hi <= 0.0 || t_hi > sol.t_max() + 1e-12 {
        return Err(Error::SupportExceeded(format!(
            "test function time support [{t_lo}, {t_hi}] is not inside [0, {}]",
            sol.t_max()
        )));
    }
    let nodes = quad.time_nodes(phi, &sol.singular_times());
    let mut a = Vec::with_capacity(nodes.len());
    let mut b = Vec::with_capacity(nodes.len());
    let mut initial = (0.0, 0.0);
    for (k, &t) in nodes.iter().enumerate() {
        let snap = sol.snapshot(t)?;
        let slice = SliceData::new(&snap, phi, quad.nx);
        a.push(slice.momentum(phi, t));
        b.push(slice.transport(phi, t));
        if k == 0 && t_lo < 0.0 {
            initial = (slice.u_phi(phi), slice.phi_mu(phi));
        }
    }
    let integrate = |v: &[f64]| -> f64 {
        (0..v.len() / 2)
            .map(|i| (nodes[2 * i + 2] - nodes[2 * i]) / 6.0 * (v[2 * i] + 4.0 * v[2 * i + 1] + v[2 * i + 2]))
            .sum()
    };
    Ok(WeakResidual {
        r1: (integrate(&a) + initial.0).abs(),
        r2: (integrate(&b) + initial.1).abs(),
    })
}
