//! The linearised forward operator on the unit disk.
//!
//! For a perturbation `η = Σ c_{j,k} ψ_{j,k}` the boundary data matrix in the
//! Fourier basis `f_m(e^{iθ}) = e^{imθ}/sqrt(2π)`, `m ≠ 0`, is banded: the
//! entry at `(m, n)` vanishes unless `mn > 0` and `η` carries the angular
//! frequency `j = n - m`. On the admissible cells the entry has the closed
//! form
//!
//! ```text
//! ⟨(Fη)f_m, f_n⟩ = -(1/√π) Σ_{k=0}^{v} c_{j,k} sqrt(|j|+2k+1)/(|j|+v+k+1) p_{m,j,k}
//! ```
//!
//! with `v = min(|m|,|n|) - 1` and the Pochhammer ratio `p_{m,j,k}`. An
//! independent quadrature oracle evaluates the defining volume integral
//! directly; the two routes are compared in the tests. Hilbert–Schmidt norms
//! of truncated matrices come with a rigorous tail bound, turning truncation
//! error into a certified interval.

use crate::comb::falling_ratio;
use crate::error::{Error, Result};
use crate::quad::QuadratureGrid;
use crate::zernike::{monomial_coeff, BasisIndex, ZernikeCoeffs, MAX_ANGULAR_FREQ, MAX_RADIAL_ORDER};
use crate::Complex;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Index of one Fourier boundary mode; the constant mode `m = 0` is excluded
/// from the basis of `L²_⋄(∂D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FourierMode(i32);

impl FourierMode {
    pub fn new(m: i32) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroFourierMode);
        }
        Ok(Self(m))
    }

    pub fn get(self) -> i32 {
        self.0
    }
}

impl TryFrom<i32> for FourierMode {
    type Error = Error;

    fn try_from(m: i32) -> Result<Self> {
        Self::new(m)
    }
}

/// Pochhammer ratio `p_{m,j,k} = (v)_k / (|j|+v+k)_k` with
/// `v = min(|m|, |m+j|) - 1`, in falling-factorial notation.
///
/// Equals 1 for `k = 0` and 0 for `k > v`.
pub fn pochhammer_ratio(m: i32, j: i32, k: u32) -> Result<f64> {
    let n = m + j;
    if i64::from(m) * i64::from(n) <= 0 {
        return Err(Error::InvalidModePair { m, n });
    }
    let v = i64::from(m.abs().min(n.abs())) - 1;
    Ok(falling_ratio(v, v + i64::from(j.abs()) + i64::from(k), k))
}

/// Closed-form matrix entry `⟨(Fη)f_m, f_n⟩` for `η` given by `coeffs`.
///
/// Exactly zero when `mn < 0` or when no stored coefficient lies on the
/// diagonal `j = n - m`.
pub fn entry_closed_form(coeffs: &ZernikeCoeffs, m: FourierMode, n: FourierMode) -> Complex {
    let (m, n) = (m.get(), n.get());
    if i64::from(m) * i64::from(n) < 0 {
        return Complex::new(0.0, 0.0);
    }
    let j = n - m;
    let j_abs = j.unsigned_abs();
    let v = (m.abs().min(n.abs()) - 1) as u32;
    let mut acc = Complex::new(0.0, 0.0);
    for (idx, c) in coeffs.iter() {
        if idx.j != j || idx.k > v {
            continue;
        }
        let a = (j_abs + 2 * idx.k + 1) as f64;
        let p = pochhammer_ratio(m, j, idx.k).expect("mn > 0 checked above");
        acc += c * (a.sqrt() / (j_abs + v + idx.k + 1) as f64 * p);
    }
    -acc / PI.sqrt()
}

/// Matrix entry `⟨(Fψ_{j,k})f_m, f_{m+j}⟩` for a single basis function.
///
/// Nonzero exactly on the index set `m(m+j) > 0`, `|m| > k`, `|m+j| > k`,
/// where it equals
/// `-(2/√π) sqrt(|j|+2k+1) / (|j|+|m|+|m+j|+2k) · p_{m,j,k}`.
pub fn single_basis_entry(idx: BasisIndex, m: FourierMode) -> Complex {
    let m = m.get();
    let n = m + idx.j;
    let k = idx.k;
    if n == 0 || i64::from(m) * i64::from(n) < 0 {
        return Complex::new(0.0, 0.0);
    }
    if m.unsigned_abs() <= k || n.unsigned_abs() <= k {
        return Complex::new(0.0, 0.0);
    }
    let j_abs = idx.j.unsigned_abs();
    let a = (j_abs + 2 * k + 1) as f64;
    let denom = (j_abs + m.unsigned_abs() + n.unsigned_abs() + 2 * k) as f64;
    let p = pochhammer_ratio(m, idx.j, k).expect("index set guarantees mn > 0");
    Complex::new(-2.0 / PI.sqrt() * a.sqrt() / denom * p, 0.0)
}

/// Truncated boundary data matrix, stored sparsely on its nonzero diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedBoundaryOperator {
    m_bound: i32,
    entries: BTreeMap<(i32, i32), Complex>,
}

impl BandedBoundaryOperator {
    /// Empty operator with truncation `|m|, |n| <= m_bound`.
    pub fn new(m_bound: i32) -> Result<Self> {
        if m_bound < 1 {
            return Err(Error::InvalidTruncation(m_bound));
        }
        Ok(Self {
            m_bound,
            entries: BTreeMap::new(),
        })
    }

    pub fn m_bound(&self) -> i32 {
        self.m_bound
    }

    /// Store an entry. Mode indices must be nonzero and inside the
    /// truncation; a zero value removes the entry.
    pub fn set_entry(&mut self, m: i32, n: i32, value: Complex) -> Result<()> {
        if m == 0 || n == 0 {
            return Err(Error::ZeroFourierMode);
        }
        if m.abs() > self.m_bound || n.abs() > self.m_bound {
            return Err(Error::TruncationTooSmall {
                m,
                n,
                m_bound: self.m_bound,
            });
        }
        if value == Complex::new(0.0, 0.0) {
            self.entries.remove(&(m, n));
        } else {
            self.entries.insert((m, n), value);
        }
        Ok(())
    }

    /// Entry at `(m, n)`; zero if absent.
    pub fn entry(&self, m: i32, n: i32) -> Complex {
        self.entries
            .get(&(m, n))
            .copied()
            .unwrap_or(Complex::new(0.0, 0.0))
    }

    /// Iterate stored entries in `(m, n)` order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32, Complex)> + '_ {
        self.entries.iter().map(|(&(m, n), &v)| (m, n, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Frobenius norm of the stored entries, `sqrt(Σ |a_{mn}|²)`; a lower
    /// bound for the Hilbert–Schmidt norm of the untruncated operator.
    pub fn truncated_hs_norm(&self) -> f64 {
        self.entries
            .values()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Hilbert–Schmidt inner product `Σ a_{mn} conj(b_{mn})` over the stored
    /// supports.
    pub fn hs_inner(&self, other: &Self) -> Complex {
        let (small, large, conj_large) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = Complex::new(0.0, 0.0);
        for (m, n, v) in small.iter() {
            let w = large.entry(m, n);
            acc += if conj_large { v * w.conj() } else { w * v.conj() };
        }
        acc
    }
}

/// Admissible `m` range of the diagonal `j` with both `m` and `m + j`
/// positive, intersected with the truncation bound: `start..=end` (empty if
/// `end < start`).
fn positive_branch(j: i32, m_bound: i32) -> (i32, i32) {
    (1.max(1 - j), m_bound - j.max(0))
}

/// Same for the negative branch, parameterised by `t = -m > 0`.
fn negative_branch(j: i32, m_bound: i32) -> (i32, i32) {
    (1.max(1 + j), m_bound - (-j).max(0))
}

/// Assemble the truncated data matrix for `coeffs`: every potentially
/// nonzero cell `(m, n)` with `mn > 0`, `|m|, |n| <= m_bound` and `n - m`
/// a stored angular frequency is filled from [`entry_closed_form`].
pub fn assemble(coeffs: &ZernikeCoeffs, m_bound: i32) -> Result<BandedBoundaryOperator> {
    let mut op = BandedBoundaryOperator::new(m_bound)?;
    let diagonals = coeffs.angular_frequencies();
    // cells are independent; parallelise per diagonal
    let per_diagonal: Vec<Vec<((i32, i32), Complex)>> = diagonals
        .par_iter()
        .map(|&j| {
            let mut cells = Vec::new();
            let (lo, hi) = positive_branch(j, m_bound);
            for m in lo..=hi {
                let value = entry_closed_form(
                    coeffs,
                    FourierMode(m),
                    FourierMode(m + j),
                );
                if value != Complex::new(0.0, 0.0) {
                    cells.push(((m, m + j), value));
                }
            }
            let (lo, hi) = negative_branch(j, m_bound);
            for t in lo..=hi {
                let (m, n) = (-t, -t + j);
                let value = entry_closed_form(coeffs, FourierMode(m), FourierMode(n));
                if value != Complex::new(0.0, 0.0) {
                    cells.push(((m, n), value));
                }
            }
            cells
        })
        .collect();
    for cells in per_diagonal {
        for ((m, n), value) in cells {
            op.entries.insert((m, n), value);
        }
    }
    Ok(op)
}

/// Quadrature oracle for the defining integral
/// `⟨(Fη)f_m, f_n⟩ = -∬_D η ∇u_m · conj(∇u_n) dA`,
/// with the polar-coordinate gradient product
/// `(1/π) r^{|m|+|n|-2} e^{i(m-n)θ}` for `mn > 0` and zero for `mn < 0`.
///
/// The perturbation is synthesised on the grid once at construction, so a
/// full scan over mode pairs stays affordable. This path never consults the
/// closed form.
pub struct QuadratureOracle<'g> {
    grid: &'g QuadratureGrid,
    /// `η` sampled at `(r_i, θ_l)`, row-major in `i`.
    samples: Vec<Complex>,
}

impl<'g> QuadratureOracle<'g> {
    pub fn new(coeffs: &ZernikeCoeffs, grid: &'g QuadratureGrid) -> Self {
        let n_theta = grid.n_theta();
        let mut samples = Vec::with_capacity(grid.n_radial() * n_theta);
        for &r in grid.radial_nodes() {
            for &theta in grid.theta_nodes() {
                samples.push(coeffs.eval(r, theta).expect("grid nodes lie in [0, 1]"));
            }
        }
        Self { grid, samples }
    }

    pub fn entry(&self, m: FourierMode, n: FourierMode) -> Complex {
        let (m, n) = (m.get(), n.get());
        if i64::from(m) * i64::from(n) < 0 {
            return Complex::new(0.0, 0.0);
        }
        let power = m.abs() + n.abs() - 2;
        let diff = (m - n) as f64;
        let phases: Vec<Complex> = self
            .grid
            .theta_nodes()
            .iter()
            .map(|&t| Complex::from_polar(1.0, diff * t))
            .collect();
        let n_theta = self.grid.n_theta();
        let mut acc = Complex::new(0.0, 0.0);
        for (i, (&r, &wr)) in self
            .grid
            .radial_nodes()
            .iter()
            .zip(self.grid.radial_weights())
            .enumerate()
        {
            let row = &self.samples[i * n_theta..(i + 1) * n_theta];
            let mut ring = Complex::new(0.0, 0.0);
            for (val, phase) in row.iter().zip(&phases) {
                ring += val * phase;
            }
            acc += ring * (wr * r * r.powi(power));
        }
        -acc * self.grid.theta_weight() / PI
    }
}

/// One-shot oracle evaluation; see [`QuadratureOracle`] for scans.
pub fn entry_quadrature_oracle(
    coeffs: &ZernikeCoeffs,
    m: FourierMode,
    n: FourierMode,
    grid: &QuadratureGrid,
) -> Complex {
    QuadratureOracle::new(coeffs, grid).entry(m, n)
}

/// Upper bound `(x+1)/x²` for the trigamma-type series `Σ_{q≥0} (q+x)^{-2}`.
pub fn trigamma_upper(x: f64) -> f64 {
    (x + 1.0) / (x * x)
}

/// Lower bound `(2x+1)/(2x²)` for the same series.
pub fn trigamma_lower(x: f64) -> f64 {
    (2.0 * x + 1.0) / (2.0 * x * x)
}

/// Certified Hilbert–Schmidt norm of a truncated data matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsNormResult {
    /// `sqrt(Σ_{stored} |entry|²)`: a guaranteed lower bound of the true norm.
    pub truncated_norm: f64,
    /// Rigorous bound on the norm of the discarded tail.
    pub tail_bound: f64,
}

impl HsNormResult {
    /// Lower end of the certified interval.
    pub fn certified_lower(&self) -> f64 {
        self.truncated_norm
    }

    /// Upper end `sqrt(truncated² + tail_bound²)` of the certified interval.
    pub fn certified_upper(&self) -> f64 {
        (self.truncated_norm * self.truncated_norm + self.tail_bound * self.tail_bound).sqrt()
    }
}

/// Hilbert–Schmidt norm of `op` with a certified tail.
///
/// The tail majorises every discarded entry of the diagonal `j` through
///
/// ```text
/// |⟨(Fη)f_m, f_{m+j}⟩|² <= (4/π) (Σ_k |c_{j,k}|²) Σ_k (|j|+2k+1)/(|m|+|j|+2k+1)²
/// ```
///
/// and sums the excluded `m` ranges with the trigamma upper bound; `op` must
/// have been assembled from `coeffs` at its truncation bound.
pub fn hs_norm(op: &BandedBoundaryOperator, coeffs: &ZernikeCoeffs) -> HsNormResult {
    let truncated_norm = op.truncated_hs_norm();
    let m_bound = op.m_bound();

    // group coefficient magnitudes per diagonal
    let mut per_diagonal: BTreeMap<i32, Vec<(u32, f64)>> = BTreeMap::new();
    for (idx, c) in coeffs.iter() {
        per_diagonal
            .entry(idx.j)
            .or_default()
            .push((idx.k, c.norm_sqr()));
    }

    let mut tail_sq = 0.0;
    for (&j, layer) in &per_diagonal {
        let coeff_sq: f64 = layer.iter().map(|&(_, c2)| c2).sum();
        let (pos_start, pos_end) = positive_branch(j, m_bound);
        let (neg_start, neg_end) = negative_branch(j, m_bound);
        // first excluded |m| on each branch
        let pos_tail_start = pos_start.max(pos_end + 1);
        let neg_tail_start = neg_start.max(neg_end + 1);
        let mut majorant = 0.0;
        for &(k, _) in layer {
            let a = (j.unsigned_abs() + 2 * k + 1) as f64;
            majorant += a
                * (trigamma_upper(pos_tail_start as f64 + a)
                    + trigamma_upper(neg_tail_start as f64 + a));
        }
        tail_sq += 4.0 / PI * coeff_sq * majorant;
    }

    HsNormResult {
        truncated_norm,
        tail_bound: tail_sq.sqrt(),
    }
}

/// Adjoint of the forward map applied to a finite data matrix `G`:
///
/// ```text
/// F*G = -Σ_{m,n} ⟨G f_m, f_n⟩ P_K( conj(∇u_m) · ∇u_n )
/// ```
///
/// where the gradient product is `(1/π) r^{|m|+|n|-2} e^{i(n-m)θ}` for
/// `mn > 0` and zero otherwise, expanded into Zernike coefficients via the
/// monomial expansion; the projection keeps `k <= k_max`, `|j| <= j_max`.
pub fn adjoint_apply(
    data: &BandedBoundaryOperator,
    k_max: u32,
    j_max: u32,
) -> Result<ZernikeCoeffs> {
    if k_max > MAX_RADIAL_ORDER || j_max > MAX_ANGULAR_FREQ {
        return Err(Error::UnsupportedOrder {
            j_abs: j_max,
            k: k_max,
            max_j: MAX_ANGULAR_FREQ,
            max_k: MAX_RADIAL_ORDER,
        });
    }
    let mut acc: BTreeMap<(u32, i32), Complex> = BTreeMap::new();
    for (m, n, g) in data.iter() {
        if i64::from(m) * i64::from(n) < 0 {
            continue;
        }
        let j = n - m;
        if j.unsigned_abs() > j_max {
            continue;
        }
        let j_abs = j.unsigned_abs();
        let v = (m.abs().min(n.abs()) - 1) as u32;
        for s in 0..=v.min(k_max) {
            let d = monomial_coeff(j_abs, s, v);
            let weight = d / (PI.sqrt() * ((j_abs + 2 * s + 1) as f64).sqrt());
            *acc.entry((s, j)).or_insert(Complex::new(0.0, 0.0)) -= g * weight;
        }
    }
    let mut out = ZernikeCoeffs::new(k_max, j_max);
    for ((k, j), value) in acc {
        out.set(BasisIndex::new(j, k), value)?;
    }
    Ok(out)
}
