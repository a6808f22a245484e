//! Time-stamped solution snapshots and the [`Solution`] abstraction the
//! checks are written against.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eta::EtaState;
use crate::eulerian::EulerianState;
use crate::kernel::KernelSpec;
use crate::lagrangian::{LagrangianFlow, LagrangianTriple};
use crate::measure::RadonMeasure1D;

/// Snapshot times closer than this are treated as equal.
const TIME_MATCH: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: EulerianState,
    /// Energy measure. Exact for Lagrangian snapshots; for the eta solver it
    /// is assembled from per-cell weights and need not equal `u_x^2 dx`.
    pub measure: RadonMeasure1D,
    pub triple: Option<LagrangianTriple>,
    pub eta: Option<EtaState>,
}

impl Snapshot {
    fn plain(t: f64, state: EulerianState) -> Self {
        let measure = state.measure();
        Snapshot { t, state, measure, triple: None, eta: None }
    }
}

/// Anything that can produce `(u, mu)` at a time.
pub trait Solution {
    fn snapshot(&self, t: f64) -> Result<Snapshot>;
    fn energy(&self) -> f64;
    /// Last time at which the solution is available.
    fn t_max(&self) -> f64;
    /// Times at which `u` loses regularity; quadrature in time splits there.
    fn singular_times(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl Solution for LagrangianFlow {
    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let triple = self.triple_at(t);
        let state = triple.to_eulerian()?;
        let mut snap = Snapshot::plain(t, state);
        snap.triple = Some(triple);
        Ok(snap)
    }

    fn energy(&self) -> f64 {
        LagrangianFlow::energy(self)
    }

    fn t_max(&self) -> f64 {
        f64::INFINITY
    }

    fn singular_times(&self) -> Vec<f64> {
        self.breaking_times()
    }
}

/// A state that does not move, such as zero energy with constant `u`.
#[derive(Debug, Clone)]
pub struct StaticSolution(pub EulerianState);

impl Solution for StaticSolution {
    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        Ok(Snapshot::plain(t, self.0.clone()))
    }

    fn energy(&self) -> f64 {
        self.0.energy()
    }

    fn t_max(&self) -> f64 {
        f64::INFINITY
    }
}

/// Wraps a solution and multiplies `u` by a constant while leaving `mu`
/// alone. Used to confirm that the checks detect non-solutions.
#[derive(Debug, Clone)]
pub struct ScaledU<S> {
    pub inner: S,
    pub factor: f64,
}

impl<S: Solution> Solution for ScaledU<S> {
    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let mut snap = self.inner.snapshot(t)?;
        snap.state = snap.state.scaled_u(self.factor);
        snap.triple = None;
        snap.eta = None;
        Ok(snap)
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    fn t_max(&self) -> f64 {
        self.inner.t_max()
    }

    fn singular_times(&self) -> Vec<f64> {
        self.inner.singular_times()
    }
}

impl<S: Solution + ?Sized> Solution for Box<S> {
    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        (**self).snapshot(t)
    }

    fn energy(&self) -> f64 {
        (**self).energy()
    }

    fn t_max(&self) -> f64 {
        (**self).t_max()
    }

    fn singular_times(&self) -> Vec<f64> {
        (**self).singular_times()
    }
}

/// The smoothed solver evaluated on demand. Requests at increasing times
/// continue from the previous state; an earlier time restarts from `t = 0`.
#[derive(Debug)]
pub struct EtaSolution {
    initial: EtaState,
    current: RefCell<EtaState>,
    dt: f64,
    t_max: f64,
    breaking_times: Vec<f64>,
}

impl EtaSolution {
    pub fn new(s: &EulerianState, spec: KernelSpec, grid_size: usize, dt: f64, t_max: f64) -> Result<Self> {
        let initial = EtaState::from_eulerian(s, spec, grid_size)?;
        Ok(EtaSolution {
            current: RefCell::new(initial.clone()),
            initial,
            dt,
            t_max,
            breaking_times: LagrangianFlow::new(s)?.breaking_times(),
        })
    }
}

impl Solution for EtaSolution {
    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(Error::MissingTime(t));
        }
        let mut cur = self.current.borrow_mut();
        let start = if t >= cur.time() { &*cur } else { &self.initial };
        let next = start.advance_to(t, self.dt)?;
        let rec = next.reconstruct()?;
        *cur = next;
        Ok(Snapshot { t, state: rec.state, measure: rec.measure, triple: None, eta: Some(cur.clone()) })
    }

    fn energy(&self) -> f64 {
        self.initial.energy()
    }

    fn t_max(&self) -> f64 {
        self.t_max
    }

    fn singular_times(&self) -> Vec<f64> {
        self.breaking_times.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum Provenance {
    Lagrangian,
    Eta { grid_size: usize, dt: f64, n: u32 },
    Static,
}

/// Snapshots at strictly increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub provenance: Provenance,
    pub energy: f64,
    pub breaking_times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("at least one output time is required".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Config("output times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("output times must be strictly increasing".into()));
    }
    Ok(())
}

impl Trajectory {
    /// Exact solution sampled at `times`.
    pub fn lagrangian(s: &EulerianState, times: &[f64]) -> Result<Self> {
        check_times(times)?;
        let flow = LagrangianFlow::new(s)?;
        let snapshots = times.iter().map(|&t| flow.snapshot(t)).collect::<Result<_>>()?;
        Ok(Trajectory {
            provenance: Provenance::Lagrangian,
            energy: flow.energy(),
            breaking_times: flow.breaking_times(),
            snapshots,
        })
    }

    /// Characteristic solver in smoothed coordinates, RK4 with step `dt`.
    /// States without energy have nothing to parametrize and stay put.
    pub fn eta(s: &EulerianState, spec: KernelSpec, grid_size: usize, dt: f64, times: &[f64]) -> Result<Self> {
        check_times(times)?;
        if !(dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if s.energy() == 0.0 {
            return Ok(Self::fixed(s, times));
        }
        let breaking_times = LagrangianFlow::new(s)?.breaking_times();
        let mut st = EtaState::from_eulerian(s, spec, grid_size)?;
        let mut snapshots = Vec::with_capacity(times.len());
        for &t in times {
            st = st.advance_to(t, dt)?;
            let rec = st.reconstruct()?;
            snapshots.push(Snapshot {
                t,
                state: rec.state,
                measure: rec.measure,
                triple: None,
                eta: Some(st.clone()),
            });
        }
        Ok(Trajectory {
            provenance: Provenance::Eta { grid_size, dt, n: spec.n() },
            energy: s.energy(),
            breaking_times,
            snapshots,
        })
    }

    fn fixed(s: &EulerianState, times: &[f64]) -> Self {
        Trajectory {
            provenance: Provenance::Static,
            energy: s.energy(),
            breaking_times: Vec::new(),
            snapshots: times.iter().map(|&t| Snapshot::plain(t, s.clone())).collect(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn get(&self, t: f64) -> Result<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= TIME_MATCH)
            .ok_or(Error::MissingTime(t))
    }
}

impl Solution for Trajectory {
    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        self.get(t).cloned()
    }

    fn energy(&self) -> f64 {
        self.energy
    }

    fn t_max(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    fn singular_times(&self) -> Vec<f64> {
        self.breaking_times.clone()
    }
}
