//! Finite positive Radon measures on the line, represented exactly as
//! point masses plus piecewise-constant densities.
//!
//! Everything the solvers need is closed under this representation:
//! cumulative distribution functions, pseudo-inverses, push-forwards of
//! piecewise-linear maps, power moments and the bounded-Lipschitz
//! (Kantorovich-Rubinstein) distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point mass `mass * delta(position)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Atom {
    pub position: f64,
    pub mass: f64,
}

impl From<(f64, f64)> for Atom {
    fn from((position, mass): (f64, f64)) -> Self {
        Atom { position, mass }
    }
}

impl From<Atom> for (f64, f64) {
    fn from(a: Atom) -> Self {
        (a.position, a.mass)
    }
}

/// Constant density `value` on the open interval `(left, right)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64, f64)", into = "(f64, f64, f64)")]
pub struct DensityPiece {
    pub left: f64,
    pub right: f64,
    pub value: f64,
}

impl From<(f64, f64, f64)> for DensityPiece {
    fn from((left, right, value): (f64, f64, f64)) -> Self {
        DensityPiece { left, right, value }
    }
}

impl From<DensityPiece> for (f64, f64, f64) {
    fn from(p: DensityPiece) -> Self {
        (p.left, p.right, p.value)
    }
}

impl DensityPiece {
    pub fn mass(&self) -> f64 {
        self.value * (self.right - self.left)
    }
}

/// Which one-sided value of a cumulative distribution to return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `mu((-inf, x))`
    Left,
    /// `mu((-inf, x])`
    Right,
}

#[derive(Deserialize)]
struct RawMeasure {
    #[serde(default)]
    atoms: Vec<Atom>,
    #[serde(default)]
    pieces: Vec<DensityPiece>,
}

impl TryFrom<RawMeasure> for RadonMeasure1D {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        RadonMeasure1D::new(raw.atoms, raw.pieces)
    }
}

/// Finite positive measure: sorted atoms plus a piecewise-constant density.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct RadonMeasure1D {
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
}

impl RadonMeasure1D {
    /// Validating constructor. Atoms must be strictly increasing with positive
    /// mass; pieces must be sorted, non-overlapping and non-negative.
    pub fn new(atoms: Vec<Atom>, pieces: Vec<DensityPiece>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !a.position.is_finite() || !a.mass.is_finite() {
                return Err(Error::InvalidState(format!("atom {i} is not finite")));
            }
            if a.mass <= 0.0 {
                return Err(Error::InvalidState(format!(
                    "atom {i} has non-positive mass {}",
                    a.mass
                )));
            }
            if i > 0 && atoms[i - 1].position >= a.position {
                return Err(Error::InvalidState(format!(
                    "atom positions not strictly increasing at index {i}"
                )));
            }
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.left.is_finite() && p.right.is_finite() && p.value.is_finite()) {
                return Err(Error::InvalidState(format!("piece {i} is not finite")));
            }
            if p.left >= p.right {
                return Err(Error::InvalidState(format!("piece {i} has left >= right")));
            }
            if p.value < 0.0 {
                return Err(Error::InvalidState(format!("piece {i} has negative density")));
            }
            if i > 0 && pieces[i - 1].right > p.left {
                return Err(Error::InvalidState(format!("piece {i} overlaps its predecessor")));
            }
        }
        Ok(RadonMeasure1D { atoms, pieces })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dirac(position: f64, mass: f64) -> Result<Self> {
        Self::new(vec![Atom { position, mass }], Vec::new())
    }

    pub fn uniform(left: f64, right: f64, value: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![DensityPiece { left, right, value }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.pieces.iter().map(DensityPiece::mass).sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    /// Smallest closed interval containing the support, if any mass is present.
    pub fn support(&self) -> Option<(f64, f64)> {
        let lo = self
            .atoms
            .iter()
            .map(|a| a.position)
            .chain(self.pieces.iter().filter(|p| p.value > 0.0).map(|p| p.left))
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .atoms
            .iter()
            .map(|a| a.position)
            .chain(self.pieces.iter().filter(|p| p.value > 0.0).map(|p| p.right))
            .fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }

    /// `mu((-inf, x))` for [`Side::Left`], `mu((-inf, x])` for [`Side::Right`].
    pub fn cdf(&self, x: f64, side: Side) -> f64 {
        let mut acc = 0.0;
        for a in &self.atoms {
            let counted = match side {
                Side::Left => a.position < x,
                Side::Right => a.position <= x,
            };
            if !counted {
                break;
            }
            acc += a.mass;
        }
        for p in &self.pieces {
            if p.left >= x {
                break;
            }
            acc += p.value * (p.right.min(x) - p.left);
        }
        acc
    }

    /// `integral (1 + |x|^gamma) d mu`, exact for atoms and density pieces.
    pub fn moment(&self, gamma: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|a| a.mass * (1.0 + a.position.abs().powf(gamma)))
            .sum();
        let power_antiderivative =
            |x: f64| x.signum() * x.abs().powf(gamma + 1.0) / (gamma + 1.0);
        let pieces: f64 = self
            .pieces
            .iter()
            .map(|p| {
                p.value
                    * ((p.right - p.left) + power_antiderivative(p.right)
                        - power_antiderivative(p.left))
            })
            .sum();
        atoms + pieces
    }

    /// Replace every density piece by point masses at the midpoints of
    /// sub-cells no wider than `resolution`. Atoms are kept as they are.
    pub fn collapse_to_atoms(&self, resolution: f64) -> Vec<Atom> {
        let mut out: Vec<Atom> = self.atoms.clone();
        for p in &self.pieces {
            if p.value == 0.0 {
                continue;
            }
            let cells = ((p.right - p.left) / resolution).ceil().max(1.0) as usize;
            let width = (p.right - p.left) / cells as f64;
            for c in 0..cells {
                out.push(Atom {
                    position: p.left + (c as f64 + 0.5) * width,
                    mass: p.value * width,
                });
            }
        }
        out.sort_by(|a, b| a.position.total_cmp(&b.position));
        out
    }

    /// The cumulative distribution `x -> mu((-inf, x))` as a monotone function.
    pub fn distribution(&self) -> MonotoneFn {
        let mut xs: Vec<f64> = self.atoms.iter().map(|a| a.position).collect();
        for p in &self.pieces {
            xs.push(p.left);
            xs.push(p.right);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.is_empty() {
            xs.push(0.0);
        }
        // One sweep: pieces are sorted and disjoint, so the density between
        // consecutive nodes is that of the piece holding their midpoint.
        let (mut acc, mut prev, mut pi, mut ai) = (0.0, xs[0], 0, 0);
        let mut nodes = Vec::with_capacity(xs.len());
        for x in xs {
            let mid = 0.5 * (prev + x);
            while pi < self.pieces.len() && self.pieces[pi].right <= mid {
                pi += 1;
            }
            if let Some(p) = self.pieces.get(pi).filter(|p| p.left <= mid) {
                acc += p.value * (x - prev);
            }
            let left = acc;
            if let Some(a) = self.atoms.get(ai).filter(|a| a.position == x) {
                acc += a.mass;
                ai += 1;
            }
            nodes.push(MonotoneNode { x, left, right: acc });
            prev = x;
        }
        MonotoneFn::new(nodes, 0.0, 0.0).expect("distribution of a valid measure is monotone")
    }
}

/// One node of a [`MonotoneFn`]; `left < right` encodes an upward jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneNode {
    pub x: f64,
    pub left: f64,
    pub right: f64,
}

/// Non-decreasing, piecewise-linear function with jumps at nodes and linear
/// tails of slope `left_slope` / `right_slope` beyond the outermost nodes.
///
/// Flat tails (`slope == 0`) give finite asymptotes; unit slopes describe maps
/// such as `x + F(x)`. At a jump the function takes its left value.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFn {
    nodes: Vec<MonotoneNode>,
    left_slope: f64,
    right_slope: f64,
}

impl MonotoneFn {
    pub fn new(nodes: Vec<MonotoneNode>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidState("monotone function needs a node".into()));
        }
        if left_slope < 0.0 || right_slope < 0.0 {
            return Err(Error::InvalidState("tail slopes must be non-negative".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.left > n.right {
                return Err(Error::InvalidState(format!("downward jump at node {i}")));
            }
            if i > 0 {
                let prev = &nodes[i - 1];
                if prev.x >= n.x || prev.right > n.left {
                    return Err(Error::InvalidState(format!(
                        "not non-decreasing between nodes {} and {i}",
                        i - 1
                    )));
                }
            }
        }
        Ok(MonotoneFn { nodes, left_slope, right_slope })
    }

    pub fn identity() -> Self {
        MonotoneFn {
            nodes: vec![MonotoneNode { x: 0.0, left: 0.0, right: 0.0 }],
            left_slope: 1.0,
            right_slope: 1.0,
        }
    }

    pub fn nodes(&self) -> &[MonotoneNode] {
        &self.nodes
    }

    pub fn asymptote_left(&self) -> f64 {
        if self.left_slope > 0.0 {
            f64::NEG_INFINITY
        } else {
            self.nodes[0].left
        }
    }

    pub fn asymptote_right(&self) -> f64 {
        if self.right_slope > 0.0 {
            f64::INFINITY
        } else {
            self.nodes[self.nodes.len() - 1].right
        }
    }

    /// Left-continuous evaluation `f(x) = f(x-)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, Side::Left)
    }

    pub fn eval_side(&self, x: f64, side: Side) -> f64 {
        let first = &self.nodes[0];
        let last = &self.nodes[self.nodes.len() - 1];
        if x < first.x {
            return first.left + self.left_slope * (x - first.x);
        }
        if x > last.x {
            return last.right + self.right_slope * (x - last.x);
        }
        let i = self.nodes.partition_point(|n| n.x < x);
        let node = &self.nodes[i];
        if node.x == x {
            return match side {
                Side::Left => node.left,
                Side::Right => node.right,
            };
        }
        let prev = &self.nodes[i - 1];
        let s = (x - prev.x) / (node.x - prev.x);
        prev.right + s * (node.left - prev.right)
    }

    /// `sup{x : f(x) < level}`.
    ///
    /// Jumps of `f` become plateaus of the result; a plateau of `f` at height
    /// `level` returns its left end, since points on the plateau do not
    /// satisfy the strict inequality.
    pub fn pseudo_inverse(&self, level: f64) -> Result<f64> {
        let (low, high) = (self.asymptote_left(), self.asymptote_right());
        if level.is_nan() || level < low || level > high {
            return Err(Error::OutOfRange { level, low, high });
        }
        let first = &self.nodes[0];
        if level <= first.left {
            if self.left_slope > 0.0 {
                return Ok(first.x - (first.left - level) / self.left_slope);
            }
            // level equals the flat left asymptote: the set is empty.
            return Ok(f64::NEG_INFINITY);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if level <= node.left {
                // Crossing happens on the open segment before this node.
                let prev = &self.nodes[i - 1];
                let rise = node.left - prev.right;
                let s = (level - prev.right) / rise;
                return Ok(prev.x + s * (node.x - prev.x));
            }
            if level <= node.right {
                return Ok(node.x);
            }
        }
        let last = &self.nodes[self.nodes.len() - 1];
        Ok(last.x + (level - last.right) / self.right_slope)
    }
}

/// `inf{x : f(x) >= level}` (equivalently `sup{x : f(x) < level}`) for a
/// non-decreasing `f`, by bisection on a bracket with `f(lo) < level <= f(hi)`.
pub fn pseudo_inverse_bisect(f: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(lo < hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Push-forward of the cell weights under a non-decreasing piecewise-linear
/// map given by its node values `y` on the grid `xi`.
///
/// A cell whose slope `y_xi` falls below `1e-12 (1 + |y|)` is a plateau and
/// its weight becomes an atom; otherwise the weight is spread as a constant
/// density over the image interval.
pub fn pushforward(xi: &[f64], y: &[f64], weights: &[f64]) -> Result<RadonMeasure1D> {
    assert_eq!(xi.len(), y.len());
    assert_eq!(weights.len() + 1, xi.len());
    let mut atoms: Vec<Atom> = Vec::new();
    let mut pieces: Vec<DensityPiece> = Vec::new();
    for (cell, &w) in weights.iter().enumerate() {
        if w < 0.0 {
            return Err(Error::NegativeWeight { cell, weight: w });
        }
        let (y0, y1) = (y[cell], y[cell + 1]);
        let dxi = xi[cell + 1] - xi[cell];
        if y1 < y0 {
            return Err(Error::IncompatibleTriple(format!("y decreasing on cell {cell}")));
        }
        if w == 0.0 {
            continue;
        }
        if is_plateau(y1 - y0, dxi, y0) {
            match atoms.last_mut() {
                Some(a) if a.position == y0 => a.mass += w,
                _ => atoms.push(Atom { position: y0, mass: w }),
            }
        } else {
            pieces.push(DensityPiece { left: y0, right: y1, value: w / (y1 - y0) });
        }
    }
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    // Plateaus at one position may be separated by zero-weight cells.
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(m) if m.position == a.position => m.mass += a.mass,
            _ => merged.push(a),
        }
    }
    RadonMeasure1D::new(merged, pieces)
}

/// Plateau test shared by the push-forward and the Lagrangian solver.
pub(crate) fn is_plateau(dy: f64, dxi: f64, y: f64) -> bool {
    dy < 1e-12 * (1.0 + y.abs()) * dxi
}

/// Signed point masses `mu - nu`, sorted and merged by position.
fn signed_atoms(mu: &RadonMeasure1D, nu: &RadonMeasure1D, resolution: f64) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = mu
        .collapse_to_atoms(resolution)
        .into_iter()
        .map(|a| (a.position, a.mass))
        .chain(nu.collapse_to_atoms(resolution).into_iter().map(|a| (a.position, -a.mass)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (x, w) in pts {
        match merged.last_mut() {
            Some(last) if last.0 == x => last.1 += w,
            _ => merged.push((x, w)),
        }
    }
    merged
}

/// Bounded-Lipschitz distance `sup{ int phi d(mu - nu) : |phi| <= 1, Lip(phi) <= 1 }`.
///
/// Density pieces are collapsed to point masses at spacing `resolution`,
/// which moves every unit of mass by at most `resolution / 2`. On sorted
/// points the constraints reduce to a box plus adjacent-difference chain, and
/// the resulting linear program is solved exactly by [`chain_lp_max`].
pub fn bl_distance(mu: &RadonMeasure1D, nu: &RadonMeasure1D, resolution: f64) -> f64 {
    assert!(resolution > 0.0, "resolution must be positive");
    let pts = signed_atoms(mu, nu, resolution);
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ws: Vec<f64> = pts.iter().map(|p| p.1).collect();
    chain_lp_max(&xs, &ws)
}

/// Exact maximum of `sum w_i phi_i` subject to `|phi_i| <= 1` and
/// `|phi_{i+1} - phi_i| <= x_{i+1} - x_i` for sorted `x`.
///
/// Dynamic programming over concave piecewise-linear value functions on
/// `[-1, 1]`: each gap widens the maximiser set by the gap length on both
/// sides, each point adds a linear term.
pub fn chain_lp_max(xs: &[f64], ws: &[f64]) -> f64 {
    assert_eq!(xs.len(), ws.len());
    if xs.is_empty() {
        return 0.0;
    }
    // Breakpoints (phi, value) of the running value function, phi ascending.
    let mut v: Vec<(f64, f64)> = vec![(-1.0, -ws[0]), (1.0, ws[0])];
    let mut shifted: Vec<(f64, f64)> = Vec::new();
    for i in 1..xs.len() {
        let gap = xs[i] - xs[i - 1];
        let imax = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap();
        shifted.clear();
        shifted.extend(v[..=imax].iter().map(|&(p, val)| (p - gap, val)));
        shifted.extend(v[imax..].iter().map(|&(p, val)| (p + gap, val)));
        v.clear();
        clip_to_box(&shifted, &mut v);
        let w = ws[i];
        for bp in v.iter_mut() {
            bp.1 += w * bp.0;
        }
        prune_collinear(&mut v);
    }
    v.iter().map(|bp| bp.1).fold(f64::NEG_INFINITY, f64::max)
}

fn interp(a: (f64, f64), b: (f64, f64), p: f64) -> f64 {
    if b.0 == a.0 {
        return a.1.max(b.1);
    }
    a.1 + (b.1 - a.1) * (p - a.0) / (b.0 - a.0)
}

/// Restrict a piecewise-linear function covering `[-1, 1]` to exactly that box.
fn clip_to_box(src: &[(f64, f64)], out: &mut Vec<(f64, f64)>) {
    let n = src.len();
    let first_in = src.iter().position(|p| p.0 > -1.0).unwrap_or(n);
    let left_value = if first_in == 0 {
        src[0].1
    } else if first_in == n {
        src[n - 1].1
    } else {
        interp(src[first_in - 1], src[first_in], -1.0)
    };
    out.push((-1.0, left_value));
    for &p in &src[first_in..] {
        if p.0 >= 1.0 {
            break;
        }
        out.push(p);
    }
    let last_in = src.iter().rposition(|p| p.0 < 1.0);
    let right_value = match last_in {
        None => src[0].1,
        Some(j) if j + 1 < n => interp(src[j], src[j + 1], 1.0),
        Some(j) => src[j].1,
    };
    out.push((1.0, right_value));
}

fn prune_collinear(v: &mut Vec<(f64, f64)>) {
    if v.len() <= 2 {
        return;
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    out.push(v[0]);
    for i in 1..v.len() - 1 {
        let a = *out.last().unwrap();
        let b = v[i];
        let c = v[i + 1];
        if b.0 - a.0 <= 0.0 {
            // Coincident abscissae: keep the larger value.
            let last = out.last_mut().unwrap();
            last.1 = last.1.max(b.1);
            continue;
        }
        let predicted = interp(a, c, b.0);
        let scale = 1.0 + a.1.abs().max(b.1.abs()).max(c.1.abs());
        if (predicted - b.1).abs() > 1e-15 * scale {
            out.push(b);
        }
    }
    out.push(v[v.len() - 1]);
    *v = out;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cdf_examples() {
        let d = RadonMeasure1D::dirac(0.0, 1.0).unwrap();
        assert_eq!(d.cdf(0.0, Side::Left), 0.0);
        assert_eq!(d.cdf(0.0, Side::Right), 1.0);
        let u = RadonMeasure1D::uniform(-4.0, 4.0, 1.0).unwrap();
        assert_eq!(u.cdf(0.0, Side::Left), 4.0);
        assert_eq!(u.cdf(100.0, Side::Left), 8.0);
    }

    #[test]
    fn pseudo_inverse_examples() {
        assert_eq!(MonotoneFn::identity().pseudo_inverse(0.3).unwrap(), 0.3);
        let f = RadonMeasure1D::dirac(0.0, 1.0).unwrap().distribution();
        assert_eq!(f.pseudo_inverse(0.5).unwrap(), 0.0);
        assert_eq!(f.pseudo_inverse(1.0).unwrap(), 0.0);
        assert_eq!(f.pseudo_inverse(0.0).unwrap(), f64::NEG_INFINITY);
        let g = RadonMeasure1D::uniform(0.0, 1.0, 1.0).unwrap().distribution();
        assert!(close(g.pseudo_inverse(0.25).unwrap(), 0.25, 1e-15));
        assert!(matches!(g.pseudo_inverse(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(g.pseudo_inverse(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn pseudo_inverse_plateau_returns_left_end() {
        // F of two unit densities separated by a gap: plateau at level 1 on [1, 2].
        let mu = RadonMeasure1D::new(
            vec![],
            vec![
                DensityPiece { left: 0.0, right: 1.0, value: 1.0 },
                DensityPiece { left: 2.0, right: 3.0, value: 1.0 },
            ],
        )
        .unwrap();
        let f = mu.distribution();
        assert_eq!(f.pseudo_inverse(1.0).unwrap(), 1.0);
        assert!(f.pseudo_inverse(1.0 + 1e-9).unwrap() > 2.0);
    }

    #[test]
    fn bisection_agrees_with_exact_inverse() {
        let mu = RadonMeasure1D::new(
            vec![Atom { position: 0.5, mass: 2.0 }],
            vec![DensityPiece { left: -1.0, right: 1.0, value: 0.5 }],
        )
        .unwrap();
        let f = mu.distribution();
        for level in [0.1, 0.7, 1.0, 2.0, 2.9] {
            let exact = f.pseudo_inverse(level).unwrap();
            let bis = pseudo_inverse_bisect(|x| mu.cdf(x, Side::Left), level, -2.0, 2.0);
            assert!(close(exact, bis, 1e-14), "{level}: {exact} vs {bis}");
        }
    }

    #[test]
    fn pushforward_examples() {
        let id = pushforward(&[0.0, 1.0], &[0.0, 1.0], &[1.0]).unwrap();
        assert_eq!(id.pieces(), &[DensityPiece { left: 0.0, right: 1.0, value: 1.0 }]);

        let alpha = 3.5;
        let plateau = pushforward(&[0.0, alpha], &[0.0, 0.0], &[alpha]).unwrap();
        assert_eq!(plateau.atoms(), &[Atom { position: 0.0, mass: alpha }]);

        // Atom cell of width alpha evolved to time t: y_xi = t^2/4, H_xi = 1.
        let (alpha, t) = (8.0, 2.0_f64);
        let y0 = -alpha * t * t / 8.0;
        let y1 = alpha * t * t / 8.0;
        let m = pushforward(&[0.0, alpha], &[y0, y1], &[alpha]).unwrap();
        let p = m.pieces()[0];
        assert!(close(p.value, 4.0 / (t * t), 1e-15));
        assert_eq!((p.left, p.right), (-4.0, 4.0));

        assert!(matches!(
            pushforward(&[0.0, 1.0], &[0.0, 1.0], &[-1.0]),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn moment_examples() {
        assert_eq!(RadonMeasure1D::dirac(0.0, 1.0).unwrap().moment(3.0), 1.0);
        assert_eq!(RadonMeasure1D::dirac(2.0, 1.0).unwrap().moment(3.0), 9.0);
        let u = RadonMeasure1D::uniform(0.0, 1.0, 1.0).unwrap();
        assert!(close(u.moment(2.0), 4.0 / 3.0, 1e-15));
        // Symmetric piece straddling zero: 2 + 2 * (1/4).
        let s = RadonMeasure1D::uniform(-1.0, 1.0, 1.0).unwrap();
        assert!(close(s.moment(3.0), 2.5, 1e-15));
    }

    #[test]
    fn bl_distance_examples() {
        let d0 = RadonMeasure1D::dirac(0.0, 1.0).unwrap();
        assert_eq!(bl_distance(&d0, &d0, 0.01), 0.0);
        let dh = RadonMeasure1D::dirac(0.5, 1.0).unwrap();
        assert!(close(bl_distance(&d0, &dh, 0.01), 0.5, 1e-14));
        let d10 = RadonMeasure1D::dirac(10.0, 1.0).unwrap();
        assert!(close(bl_distance(&d0, &d10, 0.01), 2.0, 1e-14));
        // Unequal masses: optimal phi = 1 everywhere gains the excess.
        let big = RadonMeasure1D::dirac(0.0, 3.0).unwrap();
        assert!(close(bl_distance(&big, &d0, 0.01), 2.0, 1e-14));
    }

    #[test]
    fn serde_round_trip_uses_array_schema() {
        let mu = RadonMeasure1D::new(
            vec![Atom { position: 0.0, mass: 2.0 }],
            vec![DensityPiece { left: 1.0, right: 2.0, value: 0.5 }],
        )
        .unwrap();
        let text = serde_json::to_string(&mu).unwrap();
        assert_eq!(text, r#"{"atoms":[[0.0,2.0]],"pieces":[[1.0,2.0,0.5]]}"#);
        let back: RadonMeasure1D = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
        assert!(serde_json::from_str::<RadonMeasure1D>(r#"{"atoms":[[0,-1]]}"#).is_err());
    }
}
