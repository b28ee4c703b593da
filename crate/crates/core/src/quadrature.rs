//! Product quadrature over the per-qubit phase-space domain.
//!
//! Each qubit carries the measure `dΩ = (2/π) sin2θ dθ dφ` on
//! θ ∈ [0, π/2], φ ∈ [0, π), total mass 2, so that `n` qubits integrate to
//! `2^n`. In the variable `u = cos2θ` the θ part is `du/π` on [−1, 1], which
//! Gauss-Legendre handles exactly for the polynomial integrands met here;
//! φ uses the uniform (periodic trapezoid) rule.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{EulerAngles, PhasePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub theta_nodes: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi_nodes: Vec<f64>,
    pub phi_weights: Vec<f64>,
}

/// Gauss-Legendre nodes and weights on [−1, 1], ascending.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let m = count.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, refined by Newton on P_count.
        let mut x = (PI * (i as f64 + 0.75) / (count as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

impl Quadrature {
    pub fn new(theta_count: usize, phi_count: usize) -> Result<Self> {
        if theta_count == 0 || phi_count == 0 {
            return Err(Error::invalid("quadrature needs at least one θ and one φ node"));
        }
        let (u, w) = gauss_legendre(theta_count);
        // u = cos2θ; θ ascends as u descends, keep θ ascending.
        let theta_nodes: Vec<f64> = u.iter().rev().map(|u| 0.5 * u.clamp(-1.0, 1.0).acos()).collect();
        let theta_weights: Vec<f64> = w.iter().rev().map(|w| w / PI).collect();
        let phi_nodes = (0..phi_count).map(|k| PI * k as f64 / phi_count as f64).collect();
        let phi_weights = vec![PI / phi_count as f64; phi_count];
        Ok(Self {
            theta_nodes,
            theta_weights,
            phi_nodes,
            phi_weights,
        })
    }

    /// 16 θ-nodes and `4n + 2` φ-nodes per qubit.
    pub fn default_for(n: usize) -> Self {
        Self::new(16, 4 * n + 2).expect("nonzero node counts")
    }

    /// Parses `"<theta>x<phi>"`, e.g. `16x10`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (t, p) = spec
            .split_once('x')
            .ok_or_else(|| Error::invalid(format!("quadrature spec `{spec}` is not of the form <theta>x<phi>")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad node count `{s}` in quadrature spec")))
        };
        Self::new(parse(t)?, parse(p)?)
    }

    /// Per-qubit total measure (2 up to rounding).
    pub fn qubit_measure(&self) -> f64 {
        self.theta_weights.iter().sum::<f64>() * self.phi_weights.iter().sum::<f64>()
    }

    /// Per-qubit nodes as (angles, weight) with Φ = 0.
    pub fn qubit_nodes(&self) -> Vec<(EulerAngles, f64)> {
        let mut out = Vec::with_capacity(self.theta_nodes.len() * self.phi_nodes.len());
        for (t, wt) in self.theta_nodes.iter().zip(&self.theta_weights) {
            for (p, wp) in self.phi_nodes.iter().zip(&self.phi_weights) {
                out.push((EulerAngles::new(*t, *p, 0.0), wt * wp));
            }
        }
        out
    }

    /// Visit every node of the `n`-fold product grid with its weight.
    pub fn for_each_point(&self, n: usize, mut f: impl FnMut(&PhasePoint, f64)) {
        let nodes = self.qubit_nodes();
        let m = nodes.len();
        let mut idx = vec![0usize; n];
        let mut point = PhasePoint::new(vec![nodes[0].0; n]);
        loop {
            let mut w = 1.0;
            for (q, &i) in idx.iter().enumerate() {
                point.angles[q] = nodes[i].0;
                w *= nodes[i].1;
            }
            f(&point, w);
            // odometer, last qubit fastest
            let mut q = n;
            loop {
                if q == 0 {
                    return;
                }
                q -= 1;
                idx[q] += 1;
                if idx[q] < m {
                    break;
                }
                idx[q] = 0;
            }
        }
    }

    pub fn point_count(&self, n: usize) -> usize {
        (self.theta_nodes.len() * self.phi_nodes.len()).pow(n as u32)
    }
}
