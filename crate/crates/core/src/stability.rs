//! Stability constants of the forward map and their verification.
//!
//! On the span of the first `K + 1` radial layers the forward map is bounded
//! in the Hilbert–Schmidt norm,
//!
//! ```text
//! ‖Fη‖_HS <= (2/√π) sqrt(2K + H_K + 4) ‖η‖,
//! ```
//!
//! and on the sign-coherent subset `A_K` (all products
//! `Re(c_{j,k} conj(c_{j,k'}))` nonnegative per angular frequency) it is
//! Lipschitz-stable from below,
//!
//! ```text
//! ‖η‖ <= sqrt(2π) C(2K, K) ‖Fη‖_HS     (constant √π for K = 0).
//! ```
//!
//! Verification always compares against certified interval ends of the
//! computed Hilbert–Schmidt norm, never raw truncated values.

use crate::comb::binomial;
use crate::error::Result;
use crate::forward::{assemble, hs_norm, HsNormResult};
use crate::zernike::{BasisIndex, ZernikeCoeffs};
use crate::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// `K`'th partial sum of the harmonic series, `H_0 = 0`.
pub fn harmonic_number(k: u32) -> f64 {
    (1..=k).map(|i| 1.0 / i as f64).sum()
}

/// Upper stability constant `(2/√π) sqrt(2K + H_K + 4)`.
pub fn upper_bound_constant(k: u32) -> f64 {
    2.0 / PI.sqrt() * (2.0 * k as f64 + harmonic_number(k) + 4.0).sqrt()
}

/// Lipschitz constant `sqrt(2π) C(2K, K)`, improved to `√π` for `K = 0`.
pub fn lipschitz_constant(k: u32) -> f64 {
    if k == 0 {
        PI.sqrt()
    } else {
        (2.0 * PI).sqrt() * binomial(2 * k as u64, k as u64)
    }
}

/// Lower bound for `‖Fψ_{j,k}‖²_HS`, uniform in `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiLowerBound {
    /// `1/(2π) C(2k,k)^{-2}`, valid for every `k`.
    pub squared: f64,
    /// Sharper `1/π` bound available for `k = 0`.
    pub improved_squared: Option<f64>,
}

pub fn psi_lower_bound(k: u32) -> PsiLowerBound {
    let c = binomial(2 * k as u64, k as u64);
    PsiLowerBound {
        squared: 1.0 / (2.0 * PI * c * c),
        improved_squared: (k == 0).then_some(1.0 / PI),
    }
}

/// Scale-aware default tolerance for the `A_K` membership test: the
/// condition is exact sign arithmetic, floating point needs slack
/// proportional to the squared coefficient scale.
pub fn a_k_default_tol(coeffs: &ZernikeCoeffs) -> f64 {
    let m = coeffs.max_abs();
    1e-12 * m * m
}

/// Membership in the sign-coherent class: `Re(c_{j,k} conj(c_{j,k'})) >= -tol`
/// for every `j` and every pair of stored radial orders.
pub fn is_in_a_k(coeffs: &ZernikeCoeffs, tol: f64) -> bool {
    for j in coeffs.angular_frequencies() {
        let layer: Vec<Complex> = coeffs
            .iter()
            .filter(|(idx, _)| idx.j == j)
            .map(|(_, c)| c)
            .collect();
        for (i, a) in layer.iter().enumerate() {
            for b in layer.iter().skip(i + 1) {
                if (a * b.conj()).re < -tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Verification record for one perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Largest stored radial order (0 for the zero perturbation).
    pub k_max: u32,
    pub l2_norm: f64,
    pub hs: HsNormResult,
    pub upper_constant: f64,
    pub lipschitz_constant: f64,
    pub in_a_k: bool,
    /// Certified upper end of the HS interval stays below
    /// `upper_constant * l2_norm`.
    pub upper_satisfied: bool,
    /// `l2_norm` stays below `lipschitz_constant` times the certified upper
    /// end; only meaningful when `in_a_k` holds.
    pub lower_satisfied: bool,
}

/// Assemble the data matrix at truncation `m_bound`, compute the certified
/// Hilbert–Schmidt norm and evaluate both stability inequalities.
pub fn verify(coeffs: &ZernikeCoeffs, m_bound: i32) -> Result<StabilityReport> {
    let k_max = coeffs.max_stored_k().unwrap_or(0);
    let op = assemble(coeffs, m_bound)?;
    let hs = hs_norm(&op, coeffs);
    let l2 = coeffs.l2_norm();
    let upper_constant = upper_bound_constant(k_max);
    let lipschitz = lipschitz_constant(k_max);
    let in_a_k = is_in_a_k(coeffs, a_k_default_tol(coeffs));
    Ok(StabilityReport {
        k_max,
        l2_norm: l2,
        upper_constant,
        lipschitz_constant: lipschitz,
        in_a_k,
        upper_satisfied: hs.certified_upper() <= upper_constant * l2,
        lower_satisfied: l2 <= lipschitz * hs.certified_upper(),
        hs,
    })
}

/// Draw a perturbation with standard complex Gaussian coefficients on
/// `k <= k_max`, `|j| <= j_max`.
pub fn sample_w_k<R: Rng + ?Sized>(rng: &mut R, k_max: u32, j_max: u32) -> ZernikeCoeffs {
    let mut out = ZernikeCoeffs::new(k_max, j_max);
    for k in 0..=k_max {
        for j in -(j_max as i32)..=(j_max as i32) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            out.set(BasisIndex::new(j, k), Complex::new(re, im))
                .expect("indices within bounds");
        }
    }
    out
}

/// Draw a sign-coherent perturbation: one unit phase per angular frequency
/// times nonnegative magnitudes, which makes every product
/// `Re(c_{j,k} conj(c_{j,k'})) = |c||c'| >= 0`.
pub fn sample_a_k<R: Rng + ?Sized>(rng: &mut R, k_max: u32, j_max: u32) -> ZernikeCoeffs {
    let mut out = ZernikeCoeffs::new(k_max, j_max);
    for j in -(j_max as i32)..=(j_max as i32) {
        let phase = Complex::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        for k in 0..=k_max {
            let magnitude: f64 = rng.sample::<f64, _>(StandardNormal).abs();
            out.set(BasisIndex::new(j, k), phase * magnitude)
                .expect("indices within bounds");
        }
    }
    out
}
