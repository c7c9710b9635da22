//! Generative-quality metrics over precomputed matrices: Fréchet distance
//! between Gaussian feature summaries (FID), Inception Score, CLIP score.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::PlanRng;

/// Tolerance on probability row sums.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Row-major `n x d` sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    inner: DMatrix<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Validation(format!(
                "row {i} has {} values, expected {d}",
                rows[i].len()
            )));
        }
        Self::from_row_major(n, d, rows.iter().flatten().copied().collect())
    }

    pub fn from_row_major(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * d {
            return Err(Error::Validation(format!(
                "{} values for a {n}x{d} matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite value at row {}, column {}",
                i / d.max(1),
                i % d.max(1)
            )));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(n, d, &values),
        })
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.inner.row(i).iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

impl GaussianStats {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let d = mu.len();
        if sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::Validation(format!(
                "covariance is {}x{}, mean has length {d}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite Gaussian statistics".into()));
        }
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        Ok(Self { mu, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }
}

/// Column means and the unbiased (`n - 1`) covariance, symmetrized.
pub fn gaussian_stats(f: &FeatureMatrix) -> Result<GaussianStats> {
    let n = f.nrows();
    if n < 2 {
        return Err(Error::Validation(format!(
            "need at least 2 samples for a covariance, got {n}"
        )));
    }
    let x = &f.inner;
    let mu: DVector<f64> = x.row_mean().transpose();
    let mut centered = x.clone();
    for mut row in centered.row_iter_mut() {
        row -= mu.transpose();
    }
    let s = centered.transpose() * &centered / (n as f64 - 1.0);
    let sigma = (&s + s.transpose()) * 0.5;
    Ok(GaussianStats { mu, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidResult {
    pub value: f64,
    /// Set when a small negative eigenvalue or a negative total was clamped.
    pub clamped: bool,
}

/// Eigendecomposition-based square root of a symmetric PSD matrix.
/// Eigenvalues within `tol` below zero are treated as 0.
fn psd_sqrt(m: &DMatrix<f64>, fail_below: f64, clamped: &mut bool) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let mut roots = eig.eigenvalues.clone();
    for v in roots.iter_mut() {
        if *v < -fail_below {
            return Err(Error::Numerical(format!(
                "covariance eigenvalue {v} is significantly negative"
            )));
        }
        if *v < 0.0 {
            *clamped = true;
            *v = 0.0;
        }
        *v = v.sqrt();
    }
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// `||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^(1/2))`.
///
/// The cross term uses `Tr((S_r^(1/2) S_g S_r^(1/2))^(1/2))`, whose argument
/// is symmetric PSD, so both square roots come from symmetric
/// eigendecompositions.
pub fn fid(r: &GaussianStats, g: &GaussianStats) -> Result<FidResult> {
    if r.dim() != g.dim() {
        return Err(Error::Validation(format!(
            "feature dimensions differ: {} vs {}",
            r.dim(),
            g.dim()
        )));
    }
    let scale = r.sigma.norm().max(g.sigma.norm());
    let fail_below = 1e-6 * scale;
    let mut clamped = false;

    let sqrt_r = psd_sqrt(&r.sigma, fail_below, &mut clamped)?;
    let inner = &sqrt_r * &g.sigma * &sqrt_r;
    let inner = (&inner + inner.transpose()) * 0.5;
    let eig = SymmetricEigen::new(inner);
    let trace_floor = 1e-10 * (r.sigma.trace() + g.sigma.trace()).abs();
    let mut tr_covmean = 0.0;
    for &v in eig.eigenvalues.iter() {
        if v < -fail_below.max(trace_floor) {
            return Err(Error::Numerical(format!(
                "product eigenvalue {v} is significantly negative"
            )));
        }
        if v < 0.0 {
            clamped = true;
        } else {
            tr_covmean += v.sqrt();
        }
    }

    let diff = &r.mu - &g.mu;
    let mut value = diff.dot(&diff) + r.sigma.trace() + g.sigma.trace() - 2.0 * tr_covmean;
    if value < 0.0 {
        clamped = true;
        value = 0.0;
    }
    Ok(FidResult { value, clamped })
}

/// Validated `n x K` matrix of class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    rows: Vec<Vec<f64>>,
}

impl ProbMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(Error::Validation("probability matrix is empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Validation(format!("row {i} has {} classes, expected {k}", row.len())));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Validation(format!("row {i} has a value outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Validation(format!("row {i} sums to {sum}, not 1")));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_features(f: &FeatureMatrix) -> Result<Self> {
        Self::new((0..f.nrows()).map(|i| f.row(i)).collect())
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn k(&self) -> usize {
        self.rows[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InceptionScore {
    pub mean: f64,
    /// Population standard deviation over splits.
    pub std: f64,
}

fn split_score(rows: &[&Vec<f64>]) -> f64 {
    let k = rows[0].len();
    let n = rows.len() as f64;
    let mut marginal = vec![0.0; k];
    for r in rows {
        for (m, p) in marginal.iter_mut().zip(r.iter()) {
            *m += p / n;
        }
    }
    let mean_kl = rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(&marginal)
                .filter(|(p, _)| **p > 0.0)
                .map(|(p, m)| p * (p.ln() - m.ln()))
                .sum::<f64>()
        })
        .sum::<f64>()
        / n;
    mean_kl.exp()
}

/// `exp(mean_i KL(p(y|x_i) || p(y)))` per split, then mean and std.
///
/// With more than one split the rows are permuted with `seed` first and cut
/// into contiguous splits whose sizes differ by at most one (larger first).
/// With a single split the seed is unused.
pub fn inception_score(p: &ProbMatrix, splits: usize, seed: u64) -> Result<InceptionScore> {
    if splits == 0 || splits > p.n() {
        return Err(Error::Argument(format!(
            "splits must be in 1..={} for {} rows, got {splits}",
            p.n(),
            p.n()
        )));
    }
    let mut order: Vec<usize> = (0..p.n()).collect();
    if splits > 1 {
        PlanRng::new(seed).shuffle(&mut order);
    }
    let base = p.n() / splits;
    let extra = p.n() % splits;
    let mut start = 0;
    let mut scores = Vec::with_capacity(splits);
    for s in 0..splits {
        let len = base + usize::from(s < extra);
        let rows: Vec<&Vec<f64>> = order[start..start + len].iter().map(|&i| &p.rows[i]).collect();
        scores.push(split_score(&rows));
        start += len;
    }
    let mean = scores.iter().sum::<f64>() / splits as f64;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / splits as f64;
    Ok(InceptionScore { mean, std: var.sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipScale {
    /// `100 * max(cos, 0)`
    #[default]
    Hundred,
    /// `2.5 * max(cos, 0)`
    HesselW,
}

impl ClipScale {
    pub fn factor(self) -> f64 {
        match self {
            ClipScale::Hundred => 100.0,
            ClipScale::HesselW => 2.5,
        }
    }
}

impl std::str::FromStr for ClipScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hundred" | "100" => Ok(ClipScale::Hundred),
            "hessel_w" | "hessel-w" | "2.5" => Ok(ClipScale::HesselW),
            other => Err(Error::Argument(format!("unknown CLIP scale `{other}`"))),
        }
    }
}

/// Mean of `c * max(cos(img_i, txt_i), 0)` over paired rows.
pub fn clip_score(img: &FeatureMatrix, txt: &FeatureMatrix, scale: ClipScale) -> Result<f64> {
    if img.nrows() != txt.nrows() || img.ncols() != txt.ncols() {
        return Err(Error::Validation(format!(
            "embedding shapes differ: {}x{} vs {}x{}",
            img.nrows(),
            img.ncols(),
            txt.nrows(),
            txt.ncols()
        )));
    }
    if img.nrows() == 0 {
        return Err(Error::Validation("no embedding pairs".into()));
    }
    let mut total = 0.0;
    for i in 0..img.nrows() {
        let a = img.inner.row(i);
        let b = txt.inner.row(i);
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 {
            return Err(Error::Validation(format!("image embedding row {i} has zero norm")));
        }
        if nb == 0.0 {
            return Err(Error::Validation(format!("text embedding row {i} has zero norm")));
        }
        let cos = (a.dot(&b) / (na * nb)).clamp(-1.0, 1.0);
        total += scale.factor() * cos.max(0.0);
    }
    Ok(total / img.nrows() as f64)
}
