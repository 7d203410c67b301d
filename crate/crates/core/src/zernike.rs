//! Orthonormal Zernike polynomial basis of `L²(D)`.
//!
//! The basis functions are
//!
//! ```text
//! ψ_{j,k}(r e^{iθ}) = sqrt((|j| + 2k + 1) / π) · R^{|j|}_{|j|+2k}(r) · e^{ijθ}
//! ```
//!
//! indexed by an angular frequency `j ∈ ℤ` and a radial order `k ∈ ℕ₀`. The
//! radial polynomials with equal angular frequency are orthogonal in the
//! `r`-weighted inner product on `(0, 1)`:
//!
//! ```text
//! ⟨R^{|j|}_{|j|+2k}, R^{|j|}_{|j|+2k'}⟩_{L²_r} = δ_{k,k'} / (2|j| + 4k + 2)
//! ```
//!
//! and monomials expand into radial polynomials with explicit rational
//! coefficients, see [`monomial_coeffs`].

use crate::comb::falling_ratio;
use crate::error::{Error, Result};
use crate::quad::QuadratureGrid;
use crate::Complex;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Largest supported radial order `k`.
///
/// An implementation policy, not a structural limit: everything downstream
/// (reconstruction layers, stability constants, witness search) stays well
/// below it.
pub const MAX_RADIAL_ORDER: u32 = 12;
/// Largest supported angular frequency `|j|`.
pub const MAX_ANGULAR_FREQ: u32 = 64;

/// Index `(j, k)` of one Zernike basis function `ψ_{j,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    /// Angular frequency, any sign.
    pub j: i32,
    /// Radial order.
    pub k: u32,
}

impl BasisIndex {
    pub fn new(j: i32, k: u32) -> Self {
        Self { j, k }
    }
}

fn check_order(j: i32, k: u32) -> Result<()> {
    let j_abs = j.unsigned_abs();
    if j_abs > MAX_ANGULAR_FREQ || k > MAX_RADIAL_ORDER {
        return Err(Error::UnsupportedOrder {
            j_abs,
            k,
            max_j: MAX_ANGULAR_FREQ,
            max_k: MAX_RADIAL_ORDER,
        });
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::RadiusOutOfRange(r));
    }
    Ok(())
}

/// Radial Zernike polynomial `R^{|j|}_{|j|+2k}(r)`.
///
/// Evaluated through the Jacobi polynomial identity
/// `R^{a}_{a+2k}(r) = (-1)^k r^a P_k^{(a,0)}(1 - 2r²)` with the standard
/// three-term recurrence, which is accurate to machine precision across the
/// whole supported order range. The explicit alternating binomial sum loses
/// up to all significant digits near `r = 1` at the largest supported orders
/// (measured worst-case error ~3 at `|j| = 64`, `k = 12`), so it is kept only
/// as a small-order reference in the tests.
pub fn radial_eval(j: i32, k: u32, r: f64) -> Result<f64> {
    check_order(j, k)?;
    check_radius(r)?;
    Ok(radial_eval_unchecked(j.unsigned_abs(), k, r))
}

pub(crate) fn radial_eval_unchecked(j_abs: u32, k: u32, r: f64) -> f64 {
    let a = j_abs as f64;
    let x = 1.0 - 2.0 * r * r;
    let mut p = 1.0;
    if k >= 1 {
        let mut prev = 1.0;
        p = (a + 1.0) + (a + 2.0) * (x - 1.0) / 2.0;
        for n in 2..=k {
            let n = n as f64;
            let c1 = 2.0 * n * (n + a) * (2.0 * n + a - 2.0);
            let c2 = (2.0 * n + a - 1.0) * ((2.0 * n + a) * (2.0 * n + a - 2.0) * x + a * a);
            let c3 = 2.0 * (n + a - 1.0) * (n - 1.0) * (2.0 * n + a);
            let next = (c2 * p - c3 * prev) / c1;
            prev = p;
            p = next;
        }
    }
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * r.powi(j_abs as i32) * p
}

/// Basis function `ψ_{j,k}` at the polar point `(r, θ)`.
pub fn basis_eval(idx: BasisIndex, r: f64, theta: f64) -> Result<Complex> {
    let radial = radial_eval(idx.j, idx.k, r)?;
    let norm = ((idx.j.unsigned_abs() + 2 * idx.k + 1) as f64 / PI).sqrt();
    Ok(Complex::from_polar(1.0, idx.j as f64 * theta) * (norm * radial))
}

/// Quadrature value of `⟨R^{|j|}_{|j|+2k}, R^{|j|}_{|j|+2k2}⟩_{L²_r}`.
///
/// Agrees with the closed form `δ_{k,k2} / (2|j| + 4k + 2)` to quadrature
/// precision; kept as an independent route for testing that identity.
pub fn radial_inner(j: i32, k: u32, k2: u32, grid: &QuadratureGrid) -> Result<f64> {
    check_order(j, k)?;
    check_order(j, k2)?;
    let j_abs = j.unsigned_abs();
    Ok(grid.integrate_radial_weighted(|r| {
        radial_eval_unchecked(j_abs, k, r) * radial_eval_unchecked(j_abs, k2, r)
    }))
}

/// Expansion of the monomial `r^{|j|+2p}` into radial polynomials
/// `R^{|j|}_{|j|+2s}`, `s = 0..=p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialExpansion {
    pub j_abs: u32,
    pub p: u32,
    /// `d[s]` multiplies `R^{|j|}_{|j|+2s}`.
    pub d: Vec<f64>,
}

impl MonomialExpansion {
    /// Evaluate `Σ_s d_s R^{|j|}_{|j|+2s}(r)`, which reconstructs
    /// `r^{|j|+2p}` pointwise.
    pub fn eval(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let mut acc = 0.0;
        for (s, &d) in self.d.iter().enumerate() {
            acc += d * radial_eval(self.j_abs as i32, s as u32, r)?;
        }
        Ok(acc)
    }
}

/// Single expansion coefficient `d_{|j|,s,p}`.
///
/// Uses the Pochhammer form `(|j|+2s+1) (p)_s / ((|j|+p+s+1) (|j|+p+s)_s)`
/// evaluated as a product of ratios, so no intermediate overflows for any
/// order that arises from matrix truncations.
pub fn monomial_coeff(j_abs: u32, s: u32, p: u32) -> f64 {
    debug_assert!(s <= p);
    let j = j_abs as i64;
    let ratio = falling_ratio(p as i64, j + p as i64 + s as i64, s);
    (j + 2 * s as i64 + 1) as f64 / (j + p as i64 + s as i64 + 1) as f64 * ratio
}

/// All coefficients of the expansion `r^{|j|+2p} = Σ_s d_{|j|,s,p} R^{|j|}_{|j|+2s}`.
pub fn monomial_coeffs(j_abs: u32, p: u32) -> MonomialExpansion {
    let d = (0..=p).map(|s| monomial_coeff(j_abs, s, p)).collect();
    MonomialExpansion { j_abs, p, d }
}

/// Sparse table of Zernike coefficients `c_{j,k}` representing a perturbation
/// `η = Σ c_{j,k} ψ_{j,k}` in `L²(D)`.
///
/// Entries are stored keyed by `(k, j)`, so iteration is radial-layer-major
/// with `j` ascending inside each layer. Exact zeros are not stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZernikeCoeffs {
    entries: BTreeMap<(u32, i32), Complex>,
    k_max: u32,
    j_max: u32,
}

impl ZernikeCoeffs {
    /// Empty table with declared bounds `k <= k_max`, `|j| <= j_max`.
    pub fn new(k_max: u32, j_max: u32) -> Self {
        Self {
            entries: BTreeMap::new(),
            k_max,
            j_max,
        }
    }

    /// Build a table from `(j, k, value)` triples, sizing the bounds to fit.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i32, u32, Complex)>,
    {
        let entries: Vec<_> = entries.into_iter().collect();
        let k_max = entries.iter().map(|e| e.1).max().unwrap_or(0);
        let j_max = entries.iter().map(|e| e.0.unsigned_abs()).max().unwrap_or(0);
        let mut table = Self::new(k_max, j_max);
        for (j, k, value) in entries {
            table.set(BasisIndex::new(j, k), value)?;
        }
        Ok(table)
    }

    /// Declared maximum radial order.
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Declared maximum angular frequency magnitude.
    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Largest radial order with a stored coefficient.
    pub fn max_stored_k(&self) -> Option<u32> {
        self.entries.keys().map(|&(k, _)| k).max()
    }

    /// Store `c_{j,k}`; a zero value removes the entry.
    pub fn set(&mut self, idx: BasisIndex, value: Complex) -> Result<()> {
        if idx.k > self.k_max || idx.j.unsigned_abs() > self.j_max {
            return Err(Error::IndexOutOfBounds {
                j: idx.j,
                k: idx.k,
                j_max: self.j_max,
                k_max: self.k_max,
            });
        }
        check_order(idx.j, idx.k)?;
        if value == Complex::new(0.0, 0.0) {
            self.entries.remove(&(idx.k, idx.j));
        } else {
            self.entries.insert((idx.k, idx.j), value);
        }
        Ok(())
    }

    /// Stored coefficient, zero if absent.
    pub fn get(&self, idx: BasisIndex) -> Complex {
        self.entries
            .get(&(idx.k, idx.j))
            .copied()
            .unwrap_or(Complex::new(0.0, 0.0))
    }

    /// Iterate stored entries, `k`-major then `j` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (BasisIndex, Complex)> + '_ {
        self.entries
            .iter()
            .map(|(&(k, j), &c)| (BasisIndex::new(j, k), c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct angular frequencies with stored coefficients, ascending.
    pub fn angular_frequencies(&self) -> Vec<i32> {
        let mut js: Vec<i32> = self.entries.keys().map(|&(_, j)| j).collect();
        js.sort_unstable();
        js.dedup();
        js
    }

    /// Parseval norm `sqrt(Σ |c_{j,k}|²) = ‖η‖_{L²(D)}`.
    pub fn l2_norm(&self) -> f64 {
        self.entries
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Synthesize `η(r e^{iθ}) = Σ c_{j,k} ψ_{j,k}(r e^{iθ})`.
    pub fn eval(&self, r: f64, theta: f64) -> Result<Complex> {
        check_radius(r)?;
        let mut acc = Complex::new(0.0, 0.0);
        for (&(k, j), &c) in &self.entries {
            let j_abs = j.unsigned_abs();
            let norm = ((j_abs + 2 * k + 1) as f64 / PI).sqrt();
            let radial = radial_eval_unchecked(j_abs, k, r);
            acc += c * Complex::from_polar(norm * radial, j as f64 * theta);
        }
        Ok(acc)
    }
}

/// Orthogonal projection of `f` onto the basis functions with `k <= k_max`,
/// `|j| <= j_max`, by quadrature: `c_{j,k} = ∬_D f · conj(ψ_{j,k}) dA`.
///
/// `f` is sampled in polar coordinates as `f(r, θ)`. The grid must resolve
/// `f`; an under-resolved grid is not detected here and is the caller's
/// responsibility.
pub fn project_function<F>(f: F, k_max: u32, j_max: u32, grid: &QuadratureGrid) -> ZernikeCoeffs
where
    F: Fn(f64, f64) -> Complex,
{
    // sample f once
    let samples: Vec<Vec<Complex>> = grid
        .radial_nodes()
        .iter()
        .map(|&r| grid.theta_nodes().iter().map(|&t| f(r, t)).collect())
        .collect();

    let mut out = ZernikeCoeffs::new(k_max, j_max);
    for k in 0..=k_max {
        for j in -(j_max as i32)..=(j_max as i32) {
            let j_abs = j.unsigned_abs();
            let norm = ((j_abs + 2 * k + 1) as f64 / PI).sqrt();
            let mut acc = Complex::new(0.0, 0.0);
            for ((&r, &wr), row) in grid
                .radial_nodes()
                .iter()
                .zip(grid.radial_weights())
                .zip(&samples)
            {
                let radial = radial_eval_unchecked(j_abs, k, r);
                let mut ring = Complex::new(0.0, 0.0);
                for (&theta, &val) in grid.theta_nodes().iter().zip(row) {
                    ring += val * Complex::from_polar(1.0, -(j as f64) * theta);
                }
                acc += ring * (wr * r * radial);
            }
            let c = acc * norm * grid.theta_weight();
            if c.norm() > 0.0 {
                out.set(BasisIndex::new(j, k), c)
                    .expect("indices are within the declared bounds");
            }
        }
    }
    out
}
