//! Standardized ridge regression (the whole-genome linear baseline) and the
//! squared-Pearson accuracy metric.
//!
//! Features are centered and scaled to unit population variance, the target
//! is centered, and the ridge system `(ZᵀZ + λI)β = Zᵀỹ` is solved either in
//! primal form (`p × p`) or, when features outnumber samples, in dual form
//! `β = Zᵀ(ZZᵀ + λI)⁻¹ỹ` (`n × n`). Coefficients are reported on the
//! original feature scale.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};

/// `1e-3, 1e-2, …, 1e4`.
pub const DEFAULT_LAMBDA_GRID: [f64; 8] = [1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3, 1e4];

/// How the regularization strength is chosen for each fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum LambdaPolicy {
    /// Generalized cross-validation over a grid.
    Gcv {
        grid: Vec<f64>,
    },
    Fixed {
        lambda: f64,
    },
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        LambdaPolicy::Gcv {
            grid: DEFAULT_LAMBDA_GRID.to_vec(),
        }
    }
}

impl LambdaPolicy {
    pub fn resolve(&self, x: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
        match self {
            LambdaPolicy::Gcv { grid } => choose_lambda(x, y, grid),
            LambdaPolicy::Fixed { lambda } => Ok(*lambda),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    /// Per-feature effect on the original feature scale.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub feature_means: Vec<f64>,
    /// Population standard deviations; 0 marks a constant column.
    pub feature_scales: Vec<f64>,
    /// Coefficients on the standardized scale.
    pub standardized_coefficients: Vec<f64>,
}

impl RidgeModel {
    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        predict(self, x)
    }
}

struct Standardized {
    z: DMatrix<f64>,
    y_centered: DVector<f64>,
    y_mean: f64,
    means: Vec<f64>,
    scales: Vec<f64>,
}

fn standardize(x: &DMatrix<f64>, y: &[f64]) -> Result<Standardized> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(MintError::invalid(format!(
            "design has {n} rows but the response has {} values",
            y.len()
        )));
    }
    if n < 2 {
        return Err(MintError::invalid(
            "ridge regression needs at least 2 samples",
        ));
    }
    if p == 0 {
        return Err(MintError::invalid(
            "ridge regression needs at least 1 feature",
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(MintError::invalid(
            "design or response contains non-finite values",
        ));
    }
    let nf = n as f64;
    let mut z = x.clone();
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for mut column in z.column_iter_mut() {
        let first = column[0];
        if column.iter().all(|&v| v == first) {
            means.push(first);
            scales.push(0.0);
            column.fill(0.0);
            continue;
        }
        let mean = column.iter().sum::<f64>() / nf;
        let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
        let sd = var.sqrt();
        for v in column.iter_mut() {
            *v = (*v - mean) / sd;
        }
        means.push(mean);
        scales.push(sd);
    }
    let y_mean = y.iter().sum::<f64>() / nf;
    let y_centered = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    Ok(Standardized {
        z,
        y_centered,
        y_mean,
        means,
        scales,
    })
}

/// Fits standardized ridge regression with regularization `lambda`.
///
/// `lambda = 0` is solved as a minimum-norm least-squares problem and is
/// accepted only when the centered design has full rank `min(n − 1, p')`,
/// `p'` being the number of non-constant columns.
pub fn fit_ridge(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(MintError::invalid(format!(
            "lambda must be a finite non-negative number, got {lambda}"
        )));
    }
    let st = standardize(x, y)?;
    let (n, p) = st.z.shape();
    let beta = if lambda == 0.0 {
        min_norm_solve(&st)?
    } else if p <= n {
        let mut a = st.z.tr_mul(&st.z);
        for i in 0..p {
            a[(i, i)] += lambda;
        }
        let rhs = st.z.tr_mul(&st.y_centered);
        a.cholesky()
            .ok_or_else(|| {
                MintError::Numerical("primal ridge system is not positive definite".into())
            })?
            .solve(&rhs)
    } else {
        let mut k = &st.z * st.z.transpose();
        for i in 0..n {
            k[(i, i)] += lambda;
        }
        let alpha = k
            .cholesky()
            .ok_or_else(|| {
                MintError::Numerical("dual ridge system is not positive definite".into())
            })?
            .solve(&st.y_centered);
        st.z.tr_mul(&alpha)
    };

    let standardized: Vec<f64> = beta.iter().copied().collect();
    let coefficients: Vec<f64> = standardized
        .iter()
        .zip(&st.scales)
        .map(|(&b, &s)| if s == 0.0 { 0.0 } else { b / s })
        .collect();
    let intercept = st.y_mean
        - coefficients
            .iter()
            .zip(&st.means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok(RidgeModel {
        coefficients,
        intercept,
        lambda,
        feature_means: st.means,
        feature_scales: st.scales,
        standardized_coefficients: standardized,
    })
}

fn min_norm_solve(st: &Standardized) -> Result<DVector<f64>> {
    let (n, _) = st.z.shape();
    let informative = st.scales.iter().filter(|&&s| s > 0.0).count();
    let required = (n - 1).min(informative);
    let svd = st.z.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let tol = sigma_max * (st.z.nrows().max(st.z.ncols()) as f64) * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < required {
        return Err(MintError::invalid(format!(
            "lambda = 0 with a rank-deficient design (rank {rank}, need {required}); use lambda > 0"
        )));
    }
    svd.solve(&st.y_centered, tol)
        .map_err(|e| MintError::Numerical(format!("least-squares solve failed: {e}")))
}

/// `ŷ = intercept + X·coefficients`.
pub fn predict(model: &RidgeModel, x: &DMatrix<f64>) -> Result<Vec<f64>> {
    if x.ncols() != model.n_features() {
        return Err(MintError::invalid(format!(
            "model has {} features but the design has {} columns",
            model.n_features(),
            x.ncols()
        )));
    }
    let coef = DVector::from_column_slice(&model.coefficients);
    let yhat = x * coef;
    Ok(yhat.iter().map(|v| v + model.intercept).collect())
}

/// Spectrum of the standardized design used to evaluate GCV for many λ.
struct GcvSpectrum {
    n: f64,
    eigenvalues: Vec<f64>,
    /// Squared projections of ỹ onto the left singular directions.
    projections: Vec<f64>,
    /// `‖ỹ‖²` minus the energy captured by `projections`.
    residual_energy: f64,
}

impl GcvSpectrum {
    fn new(st: &Standardized) -> Self {
        let (n, p) = st.z.shape();
        let y = &st.y_centered;
        let total = y.norm_squared();
        if p <= n {
            let gram = st.z.tr_mul(&st.z);
            let eig = SymmetricEigen::new(gram);
            let w = st.z.tr_mul(y);
            let scale = eig.eigenvalues.amax().max(1.0);
            let mut eigenvalues = Vec::with_capacity(p);
            let mut projections = Vec::with_capacity(p);
            for (i, &d) in eig.eigenvalues.iter().enumerate() {
                if d > scale * 1e-12 {
                    let v = eig.eigenvectors.column(i);
                    let q = v.dot(&w);
                    eigenvalues.push(d);
                    projections.push(q * q / d);
                }
            }
            let captured: f64 = projections.iter().sum();
            Self {
                n: n as f64,
                eigenvalues,
                projections,
                residual_energy: (total - captured).max(0.0),
            }
        } else {
            let gram = &st.z * st.z.transpose();
            let eig = SymmetricEigen::new(gram);
            let q = eig.eigenvectors.tr_mul(y);
            Self {
                n: n as f64,
                eigenvalues: eig.eigenvalues.iter().map(|&d| d.max(0.0)).collect(),
                projections: q.iter().map(|v| v * v).collect(),
                residual_energy: 0.0,
            }
        }
    }

    /// `n·RSS / (n − df)²`, with `df = tr(H) + 1` counting the intercept.
    fn score(&self, lambda: f64) -> f64 {
        let mut rss = self.residual_energy;
        let mut trace = 0.0;
        for (&d, &q) in self.eigenvalues.iter().zip(&self.projections) {
            let shrink = lambda / (d + lambda);
            rss += shrink * shrink * q;
            trace += d / (d + lambda);
        }
        let dof = self.n - (trace + 1.0);
        if dof <= self.n * 1e-9 {
            return f64::INFINITY;
        }
        self.n * rss / (dof * dof)
    }
}

/// Picks the grid value minimizing the generalized cross-validation error.
///
/// The grid is scanned in ascending order and the first minimizer wins.
pub fn choose_lambda(x: &DMatrix<f64>, y: &[f64], grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(MintError::invalid("lambda grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(MintError::invalid(format!(
            "lambda grid values must be positive and finite, got {bad}"
        )));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() == 1 {
        return Ok(sorted[0]);
    }
    let st = standardize(x, y)?;
    let spectrum = GcvSpectrum::new(&st);
    let mut best = (sorted[0], spectrum.score(sorted[0]));
    for &lambda in &sorted[1..] {
        let s = spectrum.score(lambda);
        if s < best.1 {
            best = (lambda, s);
        }
    }
    Ok(best.0)
}

/// GCV score of one λ, exposed for diagnostics.
pub fn gcv_score(x: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<f64> {
    let st = standardize(x, y)?;
    Ok(GcvSpectrum::new(&st).score(lambda))
}

/// Squared Pearson correlation between truth and prediction.
///
/// A constant prediction scores 0.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(MintError::invalid(format!(
            "r² of vectors with different lengths ({} vs {})",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.len() < 2 {
        return Err(MintError::invalid("r² needs at least 2 values"));
    }
    if y_true.iter().all(|&v| v == y_true[0]) {
        return Err(MintError::invalid(
            "r² is undefined for a constant response",
        ));
    }
    if y_pred.iter().all(|&v| v == y_pred[0]) {
        warn!("constant prediction vector; r² reported as 0");
        return Ok(0.0);
    }
    let n = y_true.len() as f64;
    let mt = y_true.iter().sum::<f64>() / n;
    let mp = y_pred.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let (dt, dp) = (t - mt, p - mp);
        sxy += dt * dp;
        sxx += dt * dt;
        syy += dp * dp;
    }
    if syy == 0.0 {
        return Ok(0.0);
    }
    let r2 = (sxy * sxy) / (sxx * syy);
    Ok(r2.clamp(0.0, 1.0))
}
