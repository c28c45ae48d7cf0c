use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Gap below which a rank call is reported as ambiguous.
pub const GAP_WARN: f64 = 1e3;

/// How eigenvalues are compared against the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    /// Count `λ > τ λ_max` (positive semidefinite matrices).
    #[default]
    Signed,
    /// Count `|λ| > τ max|λ|` (indefinite matrices such as Hessians).
    Magnitude,
}

/// Eigenvalues (descending), numerical rank and spectral gap of a symmetric matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub rank: usize,
    /// Smallest counted over largest discarded (in magnitude); infinite when
    /// nothing is discarded or nothing is counted.
    pub gap: f64,
    pub tolerance: f64,
    pub lambda_max: f64,
    pub mode: RankMode,
}

#[derive(Serialize)]
struct Summary<'a> {
    rank: usize,
    gap: Option<f64>,
    tolerance: f64,
    lambda_max: f64,
    mode: &'a RankMode,
}

/// Largest entry of `|A − Aᵀ|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i + 1..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix with a rank call.
///
/// Rank counts `λ > τ λ_max` (`λ_max ≤ 0` gives rank 0).
pub fn spectrum_report(m: &DMatrix<f64>, tau: f64) -> Result<SpectrumReport> {
    spectrum_report_with(m, tau, RankMode::Signed)
}

pub fn spectrum_report_with(m: &DMatrix<f64>, tau: f64, mode: RankMode) -> Result<SpectrumReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidConfig(format!(
            "matrix is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix has non-finite entries".into()));
    }
    let scale = m.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let asym = asymmetry(m);
    if asym > 1e-8 * scale {
        return Err(Error::NonSymmetric(asym));
    }
    let mut eig: Vec<f64> = if m.nrows() == 0 {
        Vec::new()
    } else {
        nalgebra::SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect()
    };
    eig.sort_by(|a, b| b.partial_cmp(a).expect("finite"));

    let lambda_max = eig.first().copied().unwrap_or(0.0);
    let key = |v: f64| match mode {
        RankMode::Signed => v,
        RankMode::Magnitude => v.abs(),
    };
    let top = eig.iter().fold(0.0f64, |a, &v| a.max(key(v)));
    let threshold = tau * top;
    let (mut counted_min, mut discarded_max) = (f64::INFINITY, 0.0f64);
    let mut rank = 0;
    if top > 0.0 {
        for &v in &eig {
            if key(v) > threshold {
                rank += 1;
                counted_min = counted_min.min(key(v));
            } else {
                discarded_max = discarded_max.max(v.abs());
            }
        }
    }
    let gap = if rank == 0 || discarded_max == 0.0 {
        f64::INFINITY
    } else {
        counted_min / discarded_max
    };
    if gap < GAP_WARN {
        log::warn!("ambiguous rank call: rank {rank} with spectral gap {gap:.3e} (tolerance {tau:e})");
    }
    Ok(SpectrumReport {
        eigenvalues: eig,
        rank,
        gap,
        tolerance: tau,
        lambda_max,
        mode,
    })
}

impl SpectrumReport {
    /// `index,eigenvalue` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            s.push_str(&format!("{i},{v:.16e}\n"));
        }
        s
    }

    /// `{rank, gap, tolerance, lambda_max, mode}`; an infinite gap is written as `null`.
    pub fn summary_json(&self) -> String {
        let s = Summary {
            rank: self.rank,
            gap: self.gap.is_finite().then_some(self.gap),
            tolerance: self.tolerance,
            lambda_max: self.lambda_max,
            mode: &self.mode,
        };
        serde_json::to_string_pretty(&s).expect("plain data")
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::File::create(dir.join(format!("{stem}.csv")))?.write_all(self.to_csv().as_bytes())?;
        std::fs::File::create(dir.join(format!("{stem}.json")))?.write_all(self.summary_json().as_bytes())?;
        Ok(())
    }
}

/// Row-major CSV dump of a matrix (no header), 17 significant digits.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
