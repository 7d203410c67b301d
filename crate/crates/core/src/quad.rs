//! Tensor polar quadrature on the unit disk.
//!
//! Radial direction: Gauss–Legendre on `[0, 1]` with the polar weight `r`
//! applied explicitly. Angular direction: equispaced nodes on `[0, 2π)` with
//! uniform weights, which integrates trigonometric polynomials of degree
//! below the node count exactly.

use crate::error::{Error, Result};
use crate::Complex;
use std::f64::consts::PI;

/// Default radial node count (Gauss–Legendre).
pub const DEFAULT_N_RADIAL: usize = 128;
/// Default angular node count (equispaced).
pub const DEFAULT_N_THETA: usize = 256;

/// Tensor polar grid for integration over the unit disk.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    radial_nodes: Vec<f64>,
    radial_weights: Vec<f64>,
    theta_nodes: Vec<f64>,
    theta_weight: f64,
}

impl QuadratureGrid {
    /// Build a grid with `n_r` radial and `n_theta` angular nodes.
    pub fn new(n_r: usize, n_theta: usize) -> Result<Self> {
        if n_r < 2 {
            return Err(Error::InvalidGrid(format!("n_r = {n_r}, need at least 2")));
        }
        if n_theta < 4 {
            return Err(Error::InvalidGrid(format!(
                "n_theta = {n_theta}, need at least 4"
            )));
        }
        let (nodes, weights) = gauss_legendre_unit(n_r);
        let theta_nodes = (0..n_theta)
            .map(|i| 2.0 * PI * i as f64 / n_theta as f64)
            .collect();
        Ok(Self {
            radial_nodes: nodes,
            radial_weights: weights,
            theta_nodes,
            theta_weight: 2.0 * PI / n_theta as f64,
        })
    }

    /// The 128 x 256 grid used by default throughout the crate.
    pub fn default_grid() -> Self {
        Self::new(DEFAULT_N_RADIAL, DEFAULT_N_THETA).expect("default grid sizes are valid")
    }

    pub fn n_radial(&self) -> usize {
        self.radial_nodes.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_nodes.len()
    }

    /// Gauss–Legendre nodes on `(0, 1)`.
    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    /// Gauss–Legendre weights for `∫_0^1 f(r) dr` (polar weight not included).
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// Equispaced angular nodes on `[0, 2π)`.
    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    /// Uniform angular weight `2π / n_theta`.
    pub fn theta_weight(&self) -> f64 {
        self.theta_weight
    }

    /// `∫_0^1 f(r) r dr` with the `L²_r` weight applied explicitly.
    pub fn integrate_radial_weighted<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.radial_nodes
            .iter()
            .zip(&self.radial_weights)
            .map(|(&r, &w)| w * r * f(r))
            .sum()
    }

    /// `∬_D f dA` in polar coordinates, `f` given as `f(r, θ)`.
    pub fn integrate_disk<F: Fn(f64, f64) -> Complex>(&self, f: F) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        for (&r, &wr) in self.radial_nodes.iter().zip(&self.radial_weights) {
            let mut ring = Complex::new(0.0, 0.0);
            for &theta in &self.theta_nodes {
                ring += f(r, theta);
            }
            acc += ring * (wr * r * self.theta_weight);
        }
        acc
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
///
/// Newton iteration on the Legendre polynomial `P_n` with the usual Chebyshev
/// initial guesses; converges to machine precision in a handful of steps.
fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
    }
    nodes.reverse();
    weights.reverse();
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
