//! The smoothing kernel `K_n(x) = (1 + x^2)^(-n)` and exact convolutions of it
//! with piecewise-constant measures.
//!
//! Every integral in the solver path reduces to the antiderivatives
//! `I_n = int_0^x K_n`, `Z_n = int_0^x z K_n(z) dz` and `J_n = int_0^x I_n`,
//! all of which have closed forms.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eulerian::EulerianState;
use crate::measure::RadonMeasure1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSpec {
    n: u32,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec { n: 3 }
    }
}

impl KernelSpec {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("kernel exponent n must be at least 1".into()));
        }
        Ok(KernelSpec { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `(K_n(x), K_n'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let q = 1.0 / (1.0 + x * x);
        let k = q.powi(self.n as i32);
        (k, -2.0 * self.n as f64 * x * k * q)
    }

    pub fn k(&self, x: f64) -> f64 {
        (1.0 / (1.0 + x * x)).powi(self.n as i32)
    }

    /// `I_n(x) = int_0^x K_n` by the reduction formula.
    pub fn antideriv(&self, x: f64) -> f64 {
        let mut acc = x.atan();
        let q = 1.0 / (1.0 + x * x);
        let mut qpow = 1.0;
        for m in 2..=self.n {
            let m = m as f64;
            qpow *= q;
            acc = x * qpow / (2.0 * (m - 1.0)) + (2.0 * m - 3.0) / (2.0 * m - 2.0) * acc;
        }
        acc
    }

    /// `I_n(+inf)`, half the total integral of `K_n`.
    pub fn half_mass(&self) -> f64 {
        let mut acc = PI / 2.0;
        for m in 2..=self.n {
            let m = m as f64;
            acc *= (2.0 * m - 3.0) / (2.0 * m - 2.0);
        }
        acc
    }

    /// `int_R K_n`.
    pub fn total_integral(&self) -> f64 {
        2.0 * self.half_mass()
    }

    /// `Z_n(x) = int_0^x z K_n(z) dz`.
    pub fn first_moment(&self, x: f64) -> f64 {
        let s = 1.0 + x * x;
        if self.n == 1 {
            0.5 * s.ln()
        } else {
            let e = 1.0 - self.n as f64;
            // (s^e - 1) / (2e), written to avoid cancellation for small x.
            (e * s.ln()).exp_m1() / (2.0 * e)
        }
    }

    /// `J_n(x) = int_0^x I_n = x I_n(x) - Z_n(x)`.
    pub fn second_antideriv(&self, x: f64) -> f64 {
        x * self.antideriv(x) - self.first_moment(x)
    }

    /// `int_lo^hi K_n`. Far from the origin the difference of antiderivatives
    /// loses all relative accuracy, so there the kernel is integrated directly.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let near = lo.abs().min(hi.abs());
        if lo * hi > 0.0 && near > 4.0 * (hi - lo).abs() && near > 1.0 {
            static RULE: OnceLock<GaussLegendre> = OnceLock::new();
            let rule = RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(12).unwrap()));
            rule.integrate(lo, hi, |w| self.k(w))
        } else {
            self.antideriv(hi) - self.antideriv(lo)
        }
    }

    /// `p(x) = (K_n * mu)(x)`.
    pub fn convolve(&self, mu: &RadonMeasure1D, x: f64) -> f64 {
        let atoms: f64 = mu.atoms().iter().map(|a| a.mass * self.k(x - a.position)).sum();
        let pieces: f64 = mu.pieces().iter().map(|p| p.value * self.mass_between(x - p.right, x - p.left)).sum();
        atoms + pieces
    }

    /// `p_x(x)`.
    pub fn convolve_deriv(&self, mu: &RadonMeasure1D, x: f64) -> f64 {
        let atoms: f64 = mu.atoms().iter().map(|a| a.mass * self.eval(x - a.position).1).sum();
        let pieces: f64 = mu
            .pieces()
            .iter()
            .map(|p| p.value * (self.k(x - p.left) - self.k(x - p.right)))
            .sum();
        atoms + pieces
    }

    /// `int_{-inf}^x p`.
    pub fn convolve_cdf(&self, mu: &RadonMeasure1D, x: f64) -> f64 {
        let i_inf = self.half_mass();
        let atoms: f64 = mu
            .atoms()
            .iter()
            .map(|a| a.mass * (self.antideriv(x - a.position) + i_inf))
            .sum();
        let pieces: f64 = mu
            .pieces()
            .iter()
            .map(|p| {
                p.value
                    * (self.second_antideriv(x - p.left) - self.second_antideriv(x - p.right)
                        + i_inf * (p.right - p.left))
            })
            .sum();
        atoms + pieces
    }

    /// `B = int_R p = mu(R) int_R K_n`.
    pub fn p_integral(&self, mu: &RadonMeasure1D) -> f64 {
        mu.total_mass() * self.total_integral()
    }

    /// `(int_a^b (alpha + beta z) K(x - z) dz, int_a^b (alpha + beta z) K'(x - z) dz)`.
    pub fn linear_weighted(&self, alpha: f64, beta: f64, a: f64, b: f64, x: f64) -> (f64, f64) {
        // Substitute w = x - z; the range becomes [x - b, x - a].
        let (lo, hi) = (x - b, x - a);
        let c = alpha + beta * x;
        let (k_hi, k_lo) = (self.k(hi), self.k(lo));
        let (i_hi, i_lo) = (self.antideriv(hi), self.antideriv(lo));
        let with_k = c * (i_hi - i_lo) - beta * (self.first_moment(hi) - self.first_moment(lo));
        let with_dk = c * (k_hi - k_lo) - beta * ((hi * k_hi - i_hi) - (lo * k_lo - i_lo));
        (with_k, with_dk)
    }

    /// `(int u(y) K(x - y) d mu(y), int u(y) K'(x - y) d mu(y))`, exact.
    pub fn u_weighted(&self, s: &EulerianState, x: f64) -> (f64, f64) {
        let mut with_k = 0.0;
        let mut with_dk = 0.0;
        for a in s.atoms() {
            let (k, dk) = self.eval(x - a.position);
            let w = a.mass * s.eval_u(a.position);
            with_k += w * k;
            with_dk += w * dk;
        }
        for seg in s.u_nodes().windows(2) {
            let ((x0, u0), (x1, u1)) = (seg[0], seg[1]);
            let slope = (u1 - u0) / (x1 - x0);
            if slope == 0.0 {
                continue;
            }
            let (ik, idk) = self.linear_weighted(u0 - slope * x0, slope, x0, x1, x);
            with_k += slope * slope * ik;
            with_dk += slope * slope * idk;
        }
        (with_k, with_dk)
    }

    /// `p_t(x) = -int u(y) K'(x - y) d mu(y)`.
    pub fn p_time_deriv(&self, s: &EulerianState, x: f64) -> f64 {
        -self.u_weighted(s, x).1
    }

    /// `int (1 + |x|^gamma) p(x) dx` by double-exponential quadrature after
    /// the substitution `x = tan(theta)`, split at the images of the breakpoints.
    pub fn p_moment(&self, mu: &RadonMeasure1D, gamma: f64, tolerance: f64) -> f64 {
        let mut cuts: Vec<f64> = mu.atoms().iter().map(|a| a.position.atan()).collect();
        for p in mu.pieces() {
            cuts.push(p.left.atan());
            cuts.push(p.right.atan());
        }
        cuts.push(-PI / 2.0);
        cuts.push(PI / 2.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let integrand = |theta: f64| {
            let c = theta.cos();
            if c <= 0.0 {
                return 0.0;
            }
            let x = theta.tan();
            let v = (1.0 + x.abs().powf(gamma)) * self.convolve(mu, x) / (c * c);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let per_piece = tolerance / cuts.len() as f64;
        cuts.windows(2)
            .map(|w| quadrature::double_exponential::integrate(integrand, w[0], w[1], per_piece).integral)
            .sum()
    }
}
