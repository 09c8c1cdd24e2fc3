//! VAE bottleneck and the reconstruction / regularization losses.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::params::AttentionParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const LOGVAR_MIN: f64 = -30.0;
pub const LOGVAR_MAX: f64 = 20.0;
pub const BCE_CLAMP: f64 = 1e-7;

/// Set latent `F` with its bottleneck `(z, μ, log σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSet<T> {
    pub features: Array2<T>,
    pub z: Array2<T>,
    pub mu: Array2<T>,
    pub logvar: Array2<T>,
}

impl<T: Real> LatentSet<T> {
    pub fn latent_count(&self) -> usize {
        self.features.nrows()
    }

    pub fn width(&self) -> usize {
        self.features.ncols()
    }

    pub fn bottleneck_width(&self) -> usize {
        self.z.ncols()
    }
}

/// Seeded standard normal draws, row-major.
pub fn standard_normal<T: Real>(shape: (usize, usize), seed: u64) -> Array2<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_simple_fn(shape, || {
        let v: f64 = rng.sample(StandardNormal);
        T::lit(v)
    })
}

/// `z = μ + exp(logvar / 2) ε`.
pub fn reparameterize<T: Real>(mu: &Array2<T>, logvar: &Array2<T>, eps: &Array2<T>) -> Result<Array2<T>> {
    same_shape(mu, logvar)?;
    same_shape(mu, eps)?;
    let half = T::lit(0.5);
    let mut z = mu.clone();
    ndarray::Zip::from(&mut z)
        .and(logvar)
        .and(eps)
        .for_each(|z, &lv, &e| *z = *z + (lv * half).exp() * e);
    Ok(z)
}

pub fn clamp_logvar<T: Real>(lv: T) -> T {
    lv.max(T::lit(LOGVAR_MIN)).min(T::lit(LOGVAR_MAX))
}

/// Affine maps to `μ` and clamped `logvar`, then reparameterization with seeded `ε`.
pub fn kl_bottleneck<T: Real>(features: &Array2<T>, params: &AttentionParams<T>, seed: u64) -> Result<LatentSet<T>> {
    if features.ncols() != params.config.width || features.nrows() == 0 {
        return Err(Error::Shape(format!("expected M x {}, found {:?}", params.config.width, features.dim())));
    }
    let mu = features.dot(&params.mu_proj) + &params.mu_bias;
    let logvar = (features.dot(&params.logvar_proj) + &params.logvar_bias).mapv(clamp_logvar);
    let eps = standard_normal(mu.dim(), seed);
    let z = reparameterize(&mu, &logvar, &eps)?;
    Ok(LatentSet {
        features: features.clone(),
        z,
        mu,
        logvar,
    })
}

fn same_shape<T>(a: &Array2<T>, b: &Array2<T>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("shape mismatch {:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `(1 / (M C0)) Σ ½(μ² + σ² − log σ²)`. There is no `−1` term, so the minimum is ½.
pub fn kl_loss<T: Real>(mu: &Array2<T>, logvar: &Array2<T>) -> Result<T> {
    same_shape(mu, logvar)?;
    if mu.is_empty() {
        return Err(Error::Shape("empty bottleneck".into()));
    }
    let half = T::lit(0.5);
    let sum: T = mu
        .iter()
        .zip(logvar.iter())
        .map(|(&m, &lv)| half * (m * m + lv.exp() - lv))
        .sum();
    Ok(sum / T::from_usize_lossy(mu.len()))
}

/// Gradient of [`kl_loss`] with respect to `(μ, logvar)`.
pub fn kl_loss_grad<T: Real>(mu: &Array2<T>, logvar: &Array2<T>) -> Result<(Array2<T>, Array2<T>)> {
    same_shape(mu, logvar)?;
    let n = T::from_usize_lossy(mu.len());
    let half = T::lit(0.5);
    Ok((mu.mapv(|m| m / n), logvar.mapv(|lv| half * (lv.exp() - T::one()) / n)))
}

fn clamp_prob<T: Real>(p: T) -> T {
    let eps = T::lit(BCE_CLAMP);
    p.max(eps).min(T::one() - eps)
}

fn check_bce<T: Real>(o: &[T], o_hat: &[T]) -> Result<()> {
    if o.len() != o_hat.len() {
        return Err(Error::Shape(format!("{} labels but {} predictions", o.len(), o_hat.len())));
    }
    if o.is_empty() {
        return Err(Error::Shape("no labels".into()));
    }
    Ok(())
}

/// `−(1/N) Σ [o log ô + (1 − o) log(1 − ô)]` with `ô` clamped to `[1e-7, 1 − 1e-7]`.
pub fn bce_loss<T: Real>(o: &[T], o_hat: &[T]) -> Result<T> {
    check_bce(o, o_hat)?;
    let sum: T = o
        .iter()
        .zip(o_hat)
        .map(|(&o, &p)| {
            let p = clamp_prob(p);
            -(o * p.ln() + (T::one() - o) * (T::one() - p).ln())
        })
        .sum();
    Ok(sum / T::from_usize_lossy(o.len()))
}

/// `∂L/∂ô = (ô − o) / (ô(1 − ô)) / N`, evaluated at the clamped `ô`.
pub fn bce_loss_grad<T: Real>(o: &[T], o_hat: &[T]) -> Result<Vec<T>> {
    check_bce(o, o_hat)?;
    let n = T::from_usize_lossy(o.len());
    Ok(o.iter()
        .zip(o_hat)
        .map(|(&o, &p)| {
            let p = clamp_prob(p);
            (p - o) / (p * (T::one() - p)) / n
        })
        .collect())
}
