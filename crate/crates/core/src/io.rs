//! File formats for coefficients, data matrices, map specs and reports.
//!
//! All JSON is UTF-8 with a fixed field order; numeric output round-trips
//! exactly. Exact-zero entries are omitted from coefficient and matrix
//! files. CSV columns are documented per writer; floats use 17 significant
//! digits so identical inputs produce byte-identical files.

use crate::conformal::{BoundarySamples, ConformalMapSpec, TransferConstants};
use crate::forward::{BandedBoundaryOperator, HsNormResult};
use crate::reconstruction::WitnessResult;
use crate::stability::StabilityReport;
use crate::zernike::{BasisIndex, ZernikeCoeffs};
use crate::Complex;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid file contents: {0}")]
    Format(String),
}

pub type FileResult<T> = std::result::Result<T, FileError>;

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// Coefficient files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CoeffEntry {
    j: i32,
    k: u32,
    re: f64,
    im: f64,
}

/// `{"basis":"zernike-disk","K":...,"J":...,"entries":[{"j","k","re","im"},...]}`
#[derive(Debug, Serialize, Deserialize)]
struct CoeffsFile {
    basis: String,
    #[serde(rename = "K")]
    k_max: u32,
    #[serde(rename = "J")]
    j_max: u32,
    entries: Vec<CoeffEntry>,
}

pub const COEFFS_BASIS_TAG: &str = "zernike-disk";

pub fn write_coeffs(path: &Path, coeffs: &ZernikeCoeffs) -> FileResult<()> {
    let file = CoeffsFile {
        basis: COEFFS_BASIS_TAG.to_string(),
        k_max: coeffs.k_max(),
        j_max: coeffs.j_max(),
        entries: coeffs
            .iter()
            .map(|(idx, c)| CoeffEntry {
                j: idx.j,
                k: idx.k,
                re: c.re,
                im: c.im,
            })
            .collect(),
    };
    write_json(path, &file)
}

pub fn read_coeffs(path: &Path) -> FileResult<ZernikeCoeffs> {
    let file: CoeffsFile = read_json(path)?;
    if file.basis != COEFFS_BASIS_TAG {
        return Err(FileError::Format(format!(
            "unknown basis tag {:?}, expected {COEFFS_BASIS_TAG:?}",
            file.basis
        )));
    }
    let mut coeffs = ZernikeCoeffs::new(file.k_max, file.j_max);
    for e in file.entries {
        coeffs
            .set(BasisIndex::new(e.j, e.k), Complex::new(e.re, e.im))
            .map_err(|err| FileError::Format(err.to_string()))?;
    }
    Ok(coeffs)
}

// ---------------------------------------------------------------------------
// Matrix files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct MatrixEntry {
    m: i32,
    n: i32,
    re: f64,
    im: f64,
}

/// `{"M":...,"entries":[{"m","n","re","im"},...]}`; absent entries are zero.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    #[serde(rename = "M")]
    m_bound: i32,
    entries: Vec<MatrixEntry>,
}

pub fn write_matrix(path: &Path, op: &BandedBoundaryOperator) -> FileResult<()> {
    let file = MatrixFile {
        m_bound: op.m_bound(),
        entries: op
            .iter()
            .map(|(m, n, v)| MatrixEntry {
                m,
                n,
                re: v.re,
                im: v.im,
            })
            .collect(),
    };
    write_json(path, &file)
}

pub fn read_matrix(path: &Path) -> FileResult<BandedBoundaryOperator> {
    let file: MatrixFile = read_json(path)?;
    let mut op = BandedBoundaryOperator::new(file.m_bound)
        .map_err(|err| FileError::Format(err.to_string()))?;
    for e in file.entries {
        op.set_entry(e.m, e.n, Complex::new(e.re, e.im))
            .map_err(|err| FileError::Format(err.to_string()))?;
    }
    Ok(op)
}

// ---------------------------------------------------------------------------
// Map spec files
// ---------------------------------------------------------------------------

/// `{"kind":"identity"|"moebius"|"quadratic","params":{...}}`
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
enum MapSpecFile {
    Identity,
    Moebius {
        a_re: f64,
        a_im: f64,
        phase: f64,
    },
    Quadratic {
        c1_re: f64,
        c1_im: f64,
        c2_re: f64,
        c2_im: f64,
    },
}

pub fn read_map_spec(path: &Path) -> FileResult<ConformalMapSpec> {
    let file: MapSpecFile = read_json(path)?;
    let spec = match file {
        MapSpecFile::Identity => Ok(ConformalMapSpec::identity()),
        MapSpecFile::Moebius { a_re, a_im, phase } => {
            ConformalMapSpec::moebius(Complex::new(a_re, a_im), phase)
        }
        MapSpecFile::Quadratic {
            c1_re,
            c1_im,
            c2_re,
            c2_im,
        } => ConformalMapSpec::quadratic(Complex::new(c1_re, c1_im), Complex::new(c2_re, c2_im)),
    };
    spec.map_err(|err| FileError::Format(err.to_string()))
}

pub fn write_map_spec(path: &Path, spec: &ConformalMapSpec) -> FileResult<()> {
    let file = match *spec {
        ConformalMapSpec::Identity => MapSpecFile::Identity,
        ConformalMapSpec::Moebius { a, phase } => MapSpecFile::Moebius {
            a_re: a.re,
            a_im: a.im,
            phase,
        },
        ConformalMapSpec::Quadratic { c1, c2 } => MapSpecFile::Quadratic {
            c1_re: c1.re,
            c1_im: c1.im,
            c2_re: c2.re,
            c2_im: c2.im,
        },
    };
    write_json(path, &file)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct HsNormJson {
    truncated_norm: f64,
    tail_bound: f64,
    certified_lower: f64,
    certified_upper: f64,
}

impl From<&HsNormResult> for HsNormJson {
    fn from(hs: &HsNormResult) -> Self {
        Self {
            truncated_norm: hs.truncated_norm,
            tail_bound: hs.tail_bound,
            certified_lower: hs.certified_lower(),
            certified_upper: hs.certified_upper(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StabilityReportJson {
    #[serde(rename = "K")]
    k_max: u32,
    l2_norm: f64,
    hs: HsNormJson,
    upper_constant: f64,
    lipschitz_constant: f64,
    in_a_k: bool,
    upper_satisfied: bool,
    lower_satisfied: bool,
}

pub fn write_stability_report(path: &Path, report: &StabilityReport) -> FileResult<()> {
    let json = StabilityReportJson {
        k_max: report.k_max,
        l2_norm: report.l2_norm,
        hs: (&report.hs).into(),
        upper_constant: report.upper_constant,
        lipschitz_constant: report.lipschitz_constant,
        in_a_k: report.in_a_k,
        upper_satisfied: report.upper_satisfied,
        lower_satisfied: report.lower_satisfied,
    };
    write_json(path, &json)
}

/// One summary row per verified perturbation, for batch runs.
pub fn write_stability_csv(path: &Path, reports: &[StabilityReport]) -> FileResult<()> {
    let mut out = String::from(
        "K,l2_norm,hs_truncated,hs_tail_bound,hs_certified_lower,hs_certified_upper,\
         upper_constant,lipschitz_constant,in_a_k,upper_satisfied,lower_satisfied\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.k_max,
            fmt_float(r.l2_norm),
            fmt_float(r.hs.truncated_norm),
            fmt_float(r.hs.tail_bound),
            fmt_float(r.hs.certified_lower()),
            fmt_float(r.hs.certified_upper()),
            fmt_float(r.upper_constant),
            fmt_float(r.lipschitz_constant),
            r.in_a_k,
            r.upper_satisfied,
            r.lower_satisfied
        ));
    }
    Ok(std::fs::write(path, out)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct WitnessJson {
    m: i32,
    n: i32,
    n0: u32,
    re: f64,
    im: f64,
    abs: f64,
}

pub fn write_witness(path: &Path, witness: &WitnessResult) -> FileResult<()> {
    let json = WitnessJson {
        m: witness.m,
        n: witness.n,
        n0: witness.n0,
        re: witness.value.re,
        im: witness.value.im,
        abs: witness.value.norm(),
    };
    write_json(path, &json)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConformalReportJson {
    pub kind: String,
    min_boundary_deriv: f64,
    max_boundary_deriv: f64,
    corollary_constant: f64,
    pub eta_disk_l2: f64,
    pub eta_domain_l2: f64,
    pub invariance_m: i32,
    pub invariance_n: i32,
    pub invariance_disk_re: f64,
    pub invariance_disk_im: f64,
    pub invariance_domain_re: f64,
    pub invariance_domain_im: f64,
    pub invariance_abs_diff: f64,
}

impl ConformalReportJson {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kind: &str,
        constants: &TransferConstants,
        eta_disk_l2: f64,
        eta_domain_l2: f64,
        m: i32,
        n: i32,
        disk: Complex,
        domain: Complex,
    ) -> Self {
        Self {
            kind: kind.to_string(),
            min_boundary_deriv: constants.min_boundary_deriv,
            max_boundary_deriv: constants.max_boundary_deriv,
            corollary_constant: constants.corollary_constant,
            eta_disk_l2,
            eta_domain_l2,
            invariance_m: m,
            invariance_n: n,
            invariance_disk_re: disk.re,
            invariance_disk_im: disk.im,
            invariance_domain_re: domain.re,
            invariance_domain_im: domain.im,
            invariance_abs_diff: (disk - domain).norm(),
        }
    }
}

pub fn write_conformal_report(path: &Path, report: &ConformalReportJson) -> FileResult<()> {
    write_json(path, report)
}

// ---------------------------------------------------------------------------
// Plot CSVs
// ---------------------------------------------------------------------------

/// Columns: `j,m,n,re,im,abs`; the data matrix grouped by diagonal.
pub fn write_matrix_csv(path: &Path, op: &BandedBoundaryOperator) -> FileResult<()> {
    let mut rows: Vec<(i32, i32, i32, Complex)> =
        op.iter().map(|(m, n, v)| (n - m, m, n, v)).collect();
    rows.sort_by_key(|&(j, m, _, _)| (j, m));
    let mut out = String::from("j,m,n,re,im,abs\n");
    for (j, m, n, v) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            j,
            m,
            n,
            fmt_float(v.re),
            fmt_float(v.im),
            fmt_float(v.norm())
        ));
    }
    Ok(std::fs::write(path, out)?)
}

/// Columns: `r,theta,re,im`; the perturbation sampled on a polar raster.
pub fn write_raster_csv(
    path: &Path,
    coeffs: &ZernikeCoeffs,
    n_r: usize,
    n_theta: usize,
) -> FileResult<()> {
    let mut out = String::from("r,theta,re,im\n");
    for ir in 0..n_r {
        let r = ir as f64 / n_r.saturating_sub(1).max(1) as f64;
        for it in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * it as f64 / n_theta as f64;
            let v = coeffs.eval(r, theta).expect("raster radius in [0, 1]");
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_float(r),
                fmt_float(theta),
                fmt_float(v.re),
                fmt_float(v.im)
            ));
        }
    }
    Ok(std::fs::write(path, out)?)
}

/// Columns: `j,k,amplification`; per-layer data-noise amplification.
pub fn write_amplification_csv(path: &Path, k_max: u32, j_max: u32) -> FileResult<()> {
    let mut out = String::from("j,k,amplification\n");
    for k in 0..=k_max {
        for j in -(j_max as i32)..=(j_max as i32) {
            out.push_str(&format!(
                "{},{},{}\n",
                j,
                k,
                fmt_float(crate::reconstruction::amplification_factor(j, k))
            ));
        }
    }
    Ok(std::fs::write(path, out)?)
}

/// Columns: `theta,phi_re,phi_im,dphi_abs`; boundary samples of the map.
pub fn write_boundary_csv(path: &Path, samples: &BoundarySamples) -> FileResult<()> {
    let mut out = String::from("theta,phi_re,phi_im,dphi_abs\n");
    for i in 0..samples.theta.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(samples.theta[i]),
            fmt_float(samples.point[i].re),
            fmt_float(samples.point[i].im),
            fmt_float(samples.deriv_abs[i])
        ));
    }
    Ok(std::fs::write(path, out)?)
}

/// Columns: `m,n,closed_re,closed_im,quad_re,quad_im,abs_diff`.
pub struct OracleRow {
    pub m: i32,
    pub n: i32,
    pub closed: Complex,
    pub quadrature: Complex,
}

pub fn write_oracle_csv(path: &Path, rows: &[OracleRow]) -> FileResult<()> {
    let mut out = String::from("m,n,closed_re,closed_im,quad_re,quad_im,abs_diff\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.m,
            r.n,
            fmt_float(r.closed.re),
            fmt_float(r.closed.im),
            fmt_float(r.quadrature.re),
            fmt_float(r.quadrature.im),
            fmt_float((r.closed - r.quadrature).norm())
        ));
    }
    Ok(std::fs::write(path, out)?)
}

// ---------------------------------------------------------------------------
// Shared JSON plumbing
// ---------------------------------------------------------------------------

fn write_json<T: Serialize>(path: &Path, value: &T) -> FileResult<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> FileResult<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
