//! Least squares via thin QR with HC1 sandwich covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on `|R_jj| / max|R_ii|` below which a column counts as
/// linearly dependent on earlier ones.
const RANK_TOLERANCE: f64 = 1e-10;

const NEGLIGIBLE_RSS: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    /// HC1 heteroskedasticity-robust covariance.
    pub covariance: DMatrix<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// `yᵀy`, the scale against which `rss` is judged negligible.
    pub response_sum_sq: f64,
    pub df_resid: usize,
    pub n_obs: usize,
    pub column_names: Vec<String>,
}

impl OlsFit {
    /// True when residuals are at rounding level, so the sandwich covariance
    /// carries no information.
    pub fn residuals_negligible(&self) -> bool {
        self.rss <= NEGLIGIBLE_RSS * self.response_sum_sq
    }
}

/// OLS with generic column names `x0, x1, …`.
pub fn ols_hc1(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<OlsFit> {
    let names: Vec<String> = (0..design.ncols()).map(|j| format!("x{j}")).collect();
    ols_hc1_named(design, response, &names)
}

pub fn ols_hc1_named(
    design: &DMatrix<f64>,
    response: &DVector<f64>,
    names: &[String],
) -> Result<OlsFit> {
    let (n, k) = design.shape();
    if response.len() != n {
        return Err(Error::domain(format!(
            "design has {n} rows but response has {} entries",
            response.len()
        )));
    }
    if names.len() != k {
        return Err(Error::domain(format!(
            "{k} columns but {} names",
            names.len()
        )));
    }
    if k == 0 {
        return Err(Error::domain("design has no columns"));
    }
    if n <= k {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} coefficients leaves no residual degrees of freedom"
        )));
    }
    if design.iter().chain(response.iter()).any(|x| !x.is_finite()) {
        return Err(Error::domain(
            "design or response contains non-finite values",
        ));
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let q = qr.q();

    let diag_max = r.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let dependent: Vec<String> = (0..k)
        .filter(|&j| !(r[(j, j)].abs() > RANK_TOLERANCE * diag_max))
        .map(|j| names[j].clone())
        .collect();
    if !dependent.is_empty() {
        return Err(Error::RankDeficient { columns: dependent });
    }

    let qty = q.tr_mul(response);
    let coefficients = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient {
            columns: names.to_vec(),
        })?;
    let residuals = response - design * &coefficients;
    let rss = residuals.norm_squared();

    // (XᵀX)⁻¹Xᵀ = R⁻¹Qᵀ, so the sandwich is R⁻¹ (Qᵀ diag(e²) Q) R⁻ᵀ.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::RankDeficient {
            columns: names.to_vec(),
        })?;
    let mut weighted = q.clone();
    for (mut row, e) in weighted.row_iter_mut().zip(residuals.iter()) {
        row *= e.abs();
    }
    let meat = weighted.tr_mul(&weighted);
    let scale = n as f64 / (n - k) as f64;
    let mut covariance = &r_inv * meat * r_inv.transpose() * scale;
    let sym = (&covariance + covariance.transpose()) * 0.5;
    covariance.copy_from(&sym);

    Ok(OlsFit {
        coefficients,
        covariance,
        residuals,
        rss,
        response_sum_sq: response.norm_squared(),
        df_resid: n - k,
        n_obs: n,
        column_names: names.to_vec(),
    })
}
