//! Conformal transfer between the unit disk and explicitly-mapped domains.
//!
//! Supported map families have closed-form `Φ`, `Φ'` and inverses, with
//! univalence guaranteed by their parameter constraints. Perturbations move
//! by composition, Neumann data picks up the boundary Jacobian
//! `f̂_m = |Ψ'| (f_m ∘ Ψ)`, and every domain-side integral is evaluated by
//! substitution back to the disk, where the Jacobian `|Φ'|²` cancels against
//! the gradient transformation.

use crate::error::{Error, Result};
use crate::forward::{assemble, FourierMode, QuadratureOracle};
use crate::quad::QuadratureGrid;
use crate::zernike::{project_function, ZernikeCoeffs};
use crate::Complex;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Analytic disk-to-domain map `Φ` with closed-form derivative and inverse.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformalMapSpec {
    /// `Φ(w) = w`.
    Identity,
    /// Disk automorphism `Φ(w) = e^{iφ} (w - a)/(1 - conj(a) w)`, `|a| < 1`.
    Moebius { a: Complex, phase: f64 },
    /// `Φ(w) = c1 w + c2 w²` with `c1 ≠ 0`, `|c2/c1| < 1/2` (univalent on
    /// the closed disk).
    Quadratic { c1: Complex, c2: Complex },
}

impl ConformalMapSpec {
    pub fn identity() -> Self {
        Self::Identity
    }

    pub fn moebius(a: Complex, phase: f64) -> Result<Self> {
        if a.norm() >= 1.0 || !a.norm().is_finite() {
            return Err(Error::InvalidMapParameters(format!(
                "Moebius parameter |a| = {} must be < 1",
                a.norm()
            )));
        }
        Ok(Self::Moebius { a, phase })
    }

    pub fn quadratic(c1: Complex, c2: Complex) -> Result<Self> {
        if c1.norm() == 0.0 {
            return Err(Error::InvalidMapParameters("c1 must be nonzero".into()));
        }
        let ratio = (c2 / c1).norm();
        if ratio.is_nan() || ratio >= 0.5 {
            return Err(Error::InvalidMapParameters(format!(
                "|c2/c1| = {ratio} must be < 1/2"
            )));
        }
        Ok(Self::Quadratic { c1, c2 })
    }

    /// `Φ(w)`.
    pub fn map(&self, w: Complex) -> Complex {
        match *self {
            Self::Identity => w,
            Self::Moebius { a, phase } => {
                Complex::from_polar(1.0, phase) * (w - a) / (Complex::new(1.0, 0.0) - a.conj() * w)
            }
            Self::Quadratic { c1, c2 } => c1 * w + c2 * w * w,
        }
    }

    /// Complex derivative `Φ'(w)`.
    pub fn derivative(&self, w: Complex) -> Complex {
        match *self {
            Self::Identity => Complex::new(1.0, 0.0),
            Self::Moebius { a, phase } => {
                let denom = Complex::new(1.0, 0.0) - a.conj() * w;
                Complex::from_polar(1.0, phase) * (1.0 - a.norm_sqr()) / (denom * denom)
            }
            Self::Quadratic { c1, c2 } => c1 + 2.0 * c2 * w,
        }
    }

    /// Inverse map `Ψ(z) = Φ^{-1}(z)` for `z` in the image of the closed
    /// disk.
    pub fn inverse(&self, z: Complex) -> Complex {
        match *self {
            Self::Identity => z,
            Self::Moebius { a, phase } => {
                let u = Complex::from_polar(1.0, -phase) * z;
                (a + u) / (Complex::new(1.0, 0.0) + a.conj() * u)
            }
            Self::Quadratic { c1, c2 } => {
                if c2.norm() == 0.0 {
                    return z / c1;
                }
                // root of c2 w² + c1 w - z with the smaller modulus is the
                // one inside the disk; one Newton step removes the
                // cancellation in the quadratic formula
                let disc = (c1 * c1 + 4.0 * c2 * z).sqrt();
                let w1 = (-c1 + disc) / (2.0 * c2);
                let w2 = (-c1 - disc) / (2.0 * c2);
                let mut w = if w1.norm() <= w2.norm() { w1 } else { w2 };
                w -= (c2 * w * w + c1 * w - z) / (c1 + 2.0 * c2 * w);
                w
            }
        }
    }
}

/// Extremes of `|Φ'|` on the boundary circle and the resulting stability
/// constant for the mapped domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferConstants {
    pub min_boundary_deriv: f64,
    pub max_boundary_deriv: f64,
    /// `√π · max|Ψ'|/min|Ψ'|` on the domain boundary, which equals
    /// `√π · max|Φ'|/min|Φ'|` on the circle.
    pub corollary_constant: f64,
}

/// Locate the extremes of `|Φ'|` over `|w| = 1` by a grid scan plus a
/// ternary refinement pass around each extremum.
pub fn boundary_constants(spec: &ConformalMapSpec, n_samples: usize) -> Result<TransferConstants> {
    if n_samples < 64 {
        return Err(Error::InvalidGrid(format!(
            "boundary sampling needs at least 64 nodes, got {n_samples}"
        )));
    }
    let f = |theta: f64| spec.derivative(Complex::from_polar(1.0, theta)).norm();
    let mut min_at = (f(0.0), 0.0);
    let mut max_at = (f(0.0), 0.0);
    for i in 1..n_samples {
        let theta = 2.0 * PI * i as f64 / n_samples as f64;
        let v = f(theta);
        if v < min_at.0 {
            min_at = (v, theta);
        }
        if v > max_at.0 {
            max_at = (v, theta);
        }
    }
    let h = 2.0 * PI / n_samples as f64;
    let min = refine_extremum(&f, min_at.1 - h, min_at.1 + h, false);
    let max = refine_extremum(&f, max_at.1 - h, max_at.1 + h, true);
    Ok(TransferConstants {
        min_boundary_deriv: min,
        max_boundary_deriv: max,
        corollary_constant: PI.sqrt() * max / min,
    })
}

fn refine_extremum<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, maximise: bool) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if (f(m1) < f(m2)) == maximise {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi))
}

/// Transformed Neumann mode sampled on the domain boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySamples {
    /// Disk boundary angles of the sample points.
    pub theta: Vec<f64>,
    /// Image points `Φ(e^{iθ})` on `∂Ω`.
    pub point: Vec<Complex>,
    /// Sample values of `f̂_m = |Ψ'| (f_m ∘ Ψ)`, i.e. `f_m(e^{iθ})/|Φ'(e^{iθ})|`.
    pub value: Vec<Complex>,
    /// `|Φ'(e^{iθ})|`.
    pub deriv_abs: Vec<f64>,
}

/// Sample the transformed Neumann basis function `f̂_m` on `∂Ω`.
pub fn transform_neumann(
    m: FourierMode,
    spec: &ConformalMapSpec,
    n_samples: usize,
) -> BoundarySamples {
    let mut out = BoundarySamples {
        theta: Vec::with_capacity(n_samples),
        point: Vec::with_capacity(n_samples),
        value: Vec::with_capacity(n_samples),
        deriv_abs: Vec::with_capacity(n_samples),
    };
    let norm = 1.0 / (2.0 * PI).sqrt();
    for i in 0..n_samples {
        let theta = 2.0 * PI * i as f64 / n_samples as f64;
        let w = Complex::from_polar(1.0, theta);
        let dphi = spec.derivative(w).norm();
        out.theta.push(theta);
        out.point.push(spec.map(w));
        out.value
            .push(Complex::from_polar(norm / dphi, m.get() as f64 * theta));
        out.deriv_abs.push(dphi);
    }
    out
}

/// `L²(∂Ω)` norm of the transformed Neumann mode, via substitution:
/// `‖f̂_m‖² = (1/2π) ∫ dθ / |Φ'(e^{iθ})|`.
pub fn neumann_norm_omega(spec: &ConformalMapSpec, n_samples: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n_samples {
        let theta = 2.0 * PI * i as f64 / n_samples as f64;
        acc += 1.0 / spec.derivative(Complex::from_polar(1.0, theta)).norm();
    }
    (acc / n_samples as f64).sqrt()
}

/// Perturbation on `Ω` obtained by pulling disk coefficients through `Ψ`.
#[derive(Debug, Clone)]
pub struct PulledBack<'a> {
    coeffs: &'a ZernikeCoeffs,
    spec: &'a ConformalMapSpec,
}

impl PulledBack<'_> {
    /// Evaluate `η(z) = η̃(Ψ(z))` for `z ∈ Ω`.
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        let w = self.spec.inverse(z);
        let r = w.norm();
        if r > 1.0 + 1e-9 {
            return Err(Error::RadiusOutOfRange(r));
        }
        self.coeffs.eval(r.min(1.0), w.arg())
    }
}

/// View disk coefficients as the perturbation `η = η̃ ∘ Ψ` on `Ω`.
pub fn pull_back<'a>(coeffs: &'a ZernikeCoeffs, spec: &'a ConformalMapSpec) -> PulledBack<'a> {
    PulledBack { coeffs, spec }
}

/// Project `η̃ = f ∘ Φ` onto the Zernike basis by quadrature.
///
/// Returns the coefficients and the truncation residual
/// `sqrt(‖f∘Φ‖² - Σ|c|²)` measured on the grid.
pub fn push_forward<F>(
    f: &F,
    spec: &ConformalMapSpec,
    k_max: u32,
    j_max: u32,
    grid: &QuadratureGrid,
) -> (ZernikeCoeffs, f64)
where
    F: Fn(Complex) -> Complex,
{
    let composed = |r: f64, theta: f64| f(spec.map(Complex::from_polar(r, theta)));
    let coeffs = project_function(composed, k_max, j_max, grid);
    let total_sq = grid
        .integrate_disk(|r, theta| Complex::new(composed(r, theta).norm_sqr(), 0.0))
        .re;
    let captured_sq: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum();
    (coeffs, (total_sq - captured_sq).max(0.0).sqrt())
}

/// `‖η‖_{L²(Ω)}` for `η = η̃ ∘ Ψ`, by substitution:
/// `∬_D |η̃(w)|² |Φ'(w)|² dA(w)`.
pub fn domain_l2_norm(
    coeffs: &ZernikeCoeffs,
    spec: &ConformalMapSpec,
    grid: &QuadratureGrid,
) -> f64 {
    grid.integrate_disk(|r, theta| {
        let w = Complex::from_polar(r, theta);
        let eta = coeffs.eval(r, theta).expect("grid radius in [0, 1]");
        Complex::new(eta.norm_sqr() * spec.derivative(w).norm_sqr(), 0.0)
    })
    .re
    .sqrt()
}

/// Evaluate the data integral on both sides of the conformal identity.
///
/// The first value integrates on the disk directly; the second carries the
/// integrand through `Ω` and back, so the only difference is the numerical
/// round trip `Ψ ∘ Φ`. For `mn < 0` both vanish.
pub fn invariance_check(
    coeffs: &ZernikeCoeffs,
    spec: &ConformalMapSpec,
    m: FourierMode,
    n: FourierMode,
    grid: &QuadratureGrid,
) -> Result<(Complex, Complex)> {
    let disk_side = QuadratureOracle::new(coeffs, grid).entry(m, n);

    let (mi, ni) = (m.get(), n.get());
    if i64::from(mi) * i64::from(ni) < 0 {
        return Ok((disk_side, Complex::new(0.0, 0.0)));
    }
    let eta_omega = pull_back(coeffs, spec);
    let power = mi.abs() + ni.abs() - 2;
    let diff = (mi - ni) as f64;
    let mut domain_side = Complex::new(0.0, 0.0);
    for (&r, &wr) in grid.radial_nodes().iter().zip(grid.radial_weights()) {
        let mut ring = Complex::new(0.0, 0.0);
        for &theta in grid.theta_nodes() {
            let z = spec.map(Complex::from_polar(r, theta));
            let eta = eta_omega.eval(z)?;
            ring += eta * Complex::from_polar(1.0, diff * theta);
        }
        domain_side += ring * (wr * r * r.powi(power));
    }
    domain_side *= -grid.theta_weight() / PI;
    Ok((disk_side, domain_side))
}

/// Truncated Hilbert–Schmidt norm of the transferred operator on `∂Ω`,
/// computed in the orthonormal boundary basis `|Ψ'|^{-1/2} f̂_m` (with the
/// zero-mean projection applied).
///
/// Pulling one basis vector back to the disk gives the Neumann data
/// `|Φ'|^{1/2} f_m`, whose Fourier coefficients are those of the boundary
/// weight `|Φ'|^{1/2}`; the entries on `Ω` are then finite combinations of
/// disk entries. `fourier_band` controls how many weight coefficients are
/// kept; they decay geometrically for the supported analytic maps.
pub fn domain_hs_truncated(
    coeffs: &ZernikeCoeffs,
    spec: &ConformalMapSpec,
    m_show: i32,
    fourier_band: i32,
    n_theta: usize,
) -> Result<f64> {
    // Fourier coefficients h_d of |Φ'(e^{iθ})|^{1/2}
    let mut h: BTreeMap<i32, Complex> = BTreeMap::new();
    for d in -fourier_band..=fourier_band {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..n_theta {
            let theta = 2.0 * PI * i as f64 / n_theta as f64;
            let weight = spec
                .derivative(Complex::from_polar(1.0, theta))
                .norm()
                .sqrt();
            acc += Complex::from_polar(weight, -(d as f64) * theta);
        }
        h.insert(d, acc / n_theta as f64);
    }

    let l_bound = m_show + fourier_band;
    let a = assemble(coeffs, l_bound)?;
    let mut entries: BTreeMap<(i32, i32), Complex> = BTreeMap::new();
    for (l, lp, value) in a.iter() {
        for m in (l - fourier_band).max(-m_show)..=(l + fourier_band).min(m_show) {
            if m == 0 {
                continue;
            }
            let hm = h[&(l - m)];
            for n in (lp - fourier_band).max(-m_show)..=(lp + fourier_band).min(m_show) {
                if n == 0 {
                    continue;
                }
                let hn = h[&(lp - n)];
                *entries.entry((m, n)).or_insert(Complex::new(0.0, 0.0)) +=
                    hm * hn.conj() * value;
            }
        }
    }
    Ok(entries.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
}
