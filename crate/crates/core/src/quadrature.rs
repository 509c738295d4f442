//! Gauss–Hermite rules for expectations over Gaussian noise.

use serde::{Deserialize, Serialize};

/// Nodes per real dimension used by the capacity and dispersion routines.
pub const DEFAULT_NODES: usize = 32;

/// A rule for `E[f(Z)]` with `Z ~ N(0, 1)`: `Σ w_i f(z_i)`.
///
/// Weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `n`-point Gauss–Hermite rule rescaled to the standard normal measure.
    pub fn gauss_hermite(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let (abscissae, raw) = hermite_nodes(n);
        let norm = std::f64::consts::PI.sqrt();
        Self {
            nodes: abscissae.iter().map(|t| t * std::f64::consts::SQRT_2).collect(),
            weights: raw.iter().map(|w| w / norm).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E[f(Z)]` under the rule.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }

    /// Tensor-product rule over the complex plane: `(z_re, z_im, weight)`
    /// triples for a pair of independent standard normals.
    pub fn complex_grid(&self) -> Vec<(f64, f64, f64)> {
        let mut grid = Vec::with_capacity(self.len() * self.len());
        for (&zr, &wr) in self.nodes.iter().zip(&self.weights) {
            for (&zi, &wi) in self.nodes.iter().zip(&self.weights) {
                grid.push((zr, zi, wr * wi));
            }
        }
        grid
    }
}

/// Physicists' Gauss–Hermite nodes and weights (weight function `exp(-t²)`),
/// found by Newton iteration on the orthonormal Hermite recurrence.
fn hermite_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}
