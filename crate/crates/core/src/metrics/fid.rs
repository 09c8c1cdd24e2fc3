//! Fréchet distance between Gaussian feature statistics. Linear algebra runs in `f64`.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_VIEWS: usize = 20;
const SYMMETRY_TOL: f64 = 1e-9;
const EIGEN_FLOOR: f64 = -1e-8;

/// Mean and covariance of a feature distribution, optionally tagged with a view index.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStats<T> {
    mean: Array1<T>,
    cov: Array2<T>,
    view: Option<usize>,
}

impl<T: Real> FeatureStats<T> {
    /// Validates finiteness, symmetry (to 1e-9, relative to the largest entry) and
    /// eigenvalues `>= -1e-8` (relative likewise).
    pub fn new(mean: Array1<T>, cov: Array2<T>, view: Option<usize>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || cov.dim() != (d, d) {
            return Err(Error::Shape(format!("mean of length {d} with covariance {:?}", cov.dim())));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature statistics".into()));
        }
        let scale = cov.iter().fold(1.0f64, |m, v| m.max(v.as_f64().abs()));
        for i in 0..d {
            for j in 0..i {
                if (cov[[i, j]] - cov[[j, i]]).as_f64().abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidArgument(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let min_eig = SymmetricEigen::new(to_f64(&cov)).eigenvalues.min();
        if min_eig < EIGEN_FLOOR * scale {
            return Err(Error::InvalidArgument(format!("covariance has eigenvalue {min_eig:e}")));
        }
        Ok(FeatureStats { mean, cov, view })
    }

    /// Sample mean and unbiased covariance of the rows of `features` (`n x d`, `n >= 2`).
    pub fn from_features(features: &Array2<T>, view: Option<usize>) -> Result<Self> {
        let n = features.nrows();
        if n < 2 || features.ncols() == 0 {
            return Err(Error::Shape(format!("need at least 2 feature rows, found {:?}", features.dim())));
        }
        let mean = features.mean_axis(Axis(0)).expect("n >= 2");
        let centered = features - &mean;
        let mut cov = centered.t().dot(&centered) / T::from_usize_lossy(n - 1);
        let d = cov.nrows();
        for i in 0..d {
            for j in 0..i {
                cov[[j, i]] = cov[[i, j]];
            }
        }
        Self::new(mean, cov, view)
    }

    pub fn mean(&self) -> &Array1<T> {
        &self.mean
    }

    pub fn cov(&self) -> &Array2<T> {
        &self.cov
    }

    pub fn view(&self) -> Option<usize> {
        self.view
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

fn to_f64<T: Real>(m: &Array2<T>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]].as_f64())
}

/// Square root of a symmetric PSD matrix with negative eigenvalues clamped to 0.
fn sqrt_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let e = SymmetricEigen::new(sym);
    let roots = e.eigenvalues.map(|l| l.max(0.0).sqrt());
    &e.eigenvectors * DMatrix::from_diagonal(&roots) * e.eigenvectors.transpose()
}

/// `‖μ_g − μ_r‖² + Tr Σ_g + Tr Σ_r − 2 Tr (Σ_r^½ Σ_g Σ_r^½)^½`, clamped to `>= 0`.
pub fn fid<T: Real>(g: &FeatureStats<T>, r: &FeatureStats<T>) -> Result<T> {
    if g.dim() != r.dim() {
        return Err(Error::Shape(format!("feature dims differ: {} vs {}", g.dim(), r.dim())));
    }
    let mean_term: f64 = g
        .mean
        .iter()
        .zip(r.mean.iter())
        .map(|(a, b)| {
            let d = a.as_f64() - b.as_f64();
            d * d
        })
        .sum();
    let (sg, sr) = (to_f64(&g.cov), to_f64(&r.cov));
    let root_r = sqrt_psd(&sr);
    let inner = &root_r * &sg * &root_r;
    let cross = SymmetricEigen::new((&inner + inner.transpose()) * 0.5)
        .eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum::<f64>();
    let value = mean_term + sg.trace() + sr.trace() - 2.0 * cross;
    Ok(T::lit(value.max(0.0)))
}

/// Mean of per-view [`fid`] over `views` view pairs (20 for the standard protocol).
pub fn fid_multiview<T: Real>(pairs: &[(FeatureStats<T>, FeatureStats<T>)], views: usize) -> Result<T> {
    if pairs.len() != views || views == 0 {
        return Err(Error::InvalidArgument(format!(
            "expected {views} view pairs, found {}",
            pairs.len()
        )));
    }
    let mut per_view = pairs
        .iter()
        .map(|(g, r)| fid(g, r).map(Real::as_f64))
        .collect::<Result<Vec<f64>>>()?;
    // summed in sorted order so the mean does not depend on view order
    per_view.sort_by(f64::total_cmp);
    Ok(T::lit(per_view.iter().sum::<f64>() / views as f64))
}
