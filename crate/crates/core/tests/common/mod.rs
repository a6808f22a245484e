#![allow(dead_code)]

use hs_core::{Atom, DensityPiece, EulerianState, RadonMeasure1D};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use proptest::prelude::*;

/// Piecewise-linear data on 2 to 6 nodes in roughly `[-3, 6]` plus up to
/// three atoms.
pub fn arb_state() -> impl Strategy<Value = EulerianState> {
    (
        prop::collection::vec((0.1f64..1.5, -2.0f64..2.0), 2..=6),
        prop::collection::vec((-3.0f64..6.0, 0.1f64..3.0), 0..=3),
    )
        .prop_filter_map("atoms must sit at distinct points", |(segs, atoms)| {
            let mut x = -3.0;
            let nodes = segs
                .into_iter()
                .map(|(gap, u)| {
                    x += gap;
                    (x, u)
                })
                .collect();
            let atoms = atoms.into_iter().map(|(position, mass)| Atom { position, mass }).collect();
            EulerianState::new(nodes, atoms).ok()
        })
}

/// Atoms plus disjoint density pieces on `[-4, 4]`.
pub fn arb_measure() -> impl Strategy<Value = RadonMeasure1D> {
    (
        prop::collection::vec((-4.0f64..4.0, 0.05f64..2.0), 0..=3),
        prop::collection::vec((0.05f64..1.0, 0.05f64..1.0, 0.0f64..2.0), 0..=3),
    )
        .prop_filter_map("valid measure", |(atoms, pieces)| {
            let mut x = -4.0;
            let pieces = pieces
                .into_iter()
                .map(|(gap, width, value)| {
                    let left = x + gap;
                    x = left + width;
                    DensityPiece { left, right: x, value }
                })
                .collect();
            let atoms = atoms.into_iter().map(|(position, mass)| Atom { position, mass }).collect();
            RadonMeasure1D::new(atoms, pieces).ok()
        })
}

pub fn atoms_measure(atoms: &[(f64, f64)]) -> RadonMeasure1D {
    RadonMeasure1D::new(atoms.iter().map(|&a| a.into()).collect(), vec![]).unwrap()
}

/// `sup { sum w_i f(x_i) : |f| <= 1, Lip f <= 1 }` as a dense linear program
/// with every pairwise constraint, solved by simplex.
pub fn bl_lp(points: &[(f64, f64)]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = points.iter().map(|&(_, w)| lp.add_var(w, (-1.0, 1.0))).collect();
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i != j {
                let d = (points[i].0 - points[j].0).abs();
                lp.add_constraint([(vars[i], 1.0), (vars[j], -1.0)], ComparisonOp::Le, d);
            }
        }
    }
    lp.solve().unwrap().into_solution().unwrap().objective()
}

/// Oracle for the distance between two atomic measures.
pub fn bl_oracle(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> f64 {
    let signed: Vec<(f64, f64)> = mu.iter().copied().chain(nu.iter().map(|&(x, m)| (x, -m))).collect();
    bl_lp(&signed)
}

pub fn delta(alpha: f64) -> EulerianState {
    EulerianState::new(vec![(0.0, 0.0)], vec![Atom { position: 0.0, mass: alpha }]).unwrap()
}

pub fn breaking(slope: f64) -> EulerianState {
    EulerianState::new(vec![(-2.0, 0.0), (-1.0, slope), (1.0, -slope), (2.0, 0.0)], vec![]).unwrap()
}
