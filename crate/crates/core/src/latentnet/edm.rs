//! Denoising loss and a deterministic sampler over the EDM noise schedule.

use ndarray::{Array2, Zip};

use super::bottleneck::standard_normal;
use super::condition::ConditionVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const EDM_RHO: f64 = 7.0;
pub const DEFAULT_SIGMA_MIN: f64 = 0.002;
pub const DEFAULT_SIGMA_MAX: f64 = 80.0;

/// Diffusion noise scale `σ > 0`; unrelated to the VAE's per-latent `σ_i`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseLevel<T>(T);

impl<T: Real> NoiseLevel<T> {
    pub fn new(sigma: T) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise level must be positive, got {sigma}")));
        }
        Ok(NoiseLevel(sigma))
    }

    pub fn get(self) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdmNorm {
    /// `‖·‖₂` per latent row.
    #[default]
    Euclidean,
    /// `‖·‖₂²` per latent row.
    Squared,
}

/// The seeded noise `n = σ ε` added to `z` by [`edm_loss`].
pub fn edm_noise<T: Real>(shape: (usize, usize), sigma: NoiseLevel<T>, seed: u64) -> Array2<T> {
    standard_normal::<T>(shape, seed) * sigma.get()
}

fn check_output<T>(out: &Array2<T>, want: (usize, usize)) -> Result<()> {
    if out.dim() != want {
        return Err(Error::Shape(format!("denoiser returned {:?}, expected {want:?}", out.dim())));
    }
    Ok(())
}

/// `(1/M) Σ_i ‖D(z_i + n_i, σ, c) − z_i‖` with `n` from [`edm_noise`].
pub fn edm_loss<T, D>(
    z: &Array2<T>,
    sigma: NoiseLevel<T>,
    seed: u64,
    denoiser: D,
    c: &ConditionVector<T>,
    norm: EdmNorm,
) -> Result<T>
where
    T: Real,
    D: Fn(&Array2<T>, T, &ConditionVector<T>) -> Array2<T>,
{
    if z.nrows() == 0 {
        return Err(Error::Shape("no latents".into()));
    }
    let noisy = z + &edm_noise(z.dim(), sigma, seed);
    let out = denoiser(&noisy, sigma.get(), c);
    check_output(&out, z.dim())?;
    let total: T = out
        .rows()
        .into_iter()
        .zip(z.rows())
        .map(|(d, zi)| {
            let sq: T = d.iter().zip(zi.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
            match norm {
                EdmNorm::Euclidean => sq.sqrt(),
                EdmNorm::Squared => sq,
            }
        })
        .sum();
    Ok(total / T::from_usize_lossy(z.nrows()))
}

/// `steps` noise levels from `σ_max` down to `σ_min` (ρ = 7 spacing), then a final 0.
pub fn edm_schedule<T: Real>(steps: usize, sigma_min: T, sigma_max: T) -> Result<Vec<T>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("sampler needs at least one step".into()));
    }
    if !(sigma_min > T::zero() && sigma_min <= sigma_max && sigma_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < sigma_min <= sigma_max, got {sigma_min}, {sigma_max}"
        )));
    }
    let inv = T::one() / T::lit(EDM_RHO);
    let (hi, lo) = (sigma_max.powf(inv), sigma_min.powf(inv));
    let mut t: Vec<T> = (0..steps)
        .map(|i| {
            if steps == 1 {
                sigma_max
            } else {
                let f = T::from_usize_lossy(i) / T::from_usize_lossy(steps - 1);
                (hi + f * (lo - hi)).powf(T::lit(EDM_RHO))
            }
        })
        .collect();
    t.push(T::zero());
    Ok(t)
}

/// Heun integration of the probability-flow ODE `dx/dσ = (x − D(x; σ)) / σ`, starting
/// from `σ_max` times a seeded Gaussian of shape `shape`. The last step to σ = 0 is Euler.
pub fn edm_sample<T, D>(
    denoiser: D,
    c: &ConditionVector<T>,
    shape: (usize, usize),
    steps: usize,
    sigma_min: T,
    sigma_max: T,
    seed: u64,
) -> Result<Array2<T>>
where
    T: Real,
    D: Fn(&Array2<T>, T, &ConditionVector<T>) -> Array2<T>,
{
    let t = edm_schedule(steps, sigma_min, sigma_max)?;
    let mut x = standard_normal::<T>(shape, seed) * sigma_max;
    let slope = |x: &Array2<T>, s: T| -> Result<Array2<T>> {
        let d = denoiser(x, s, c);
        check_output(&d, shape)?;
        Ok((x - &d) / s)
    };
    let half = T::lit(0.5);
    for w in t.windows(2) {
        let (s, s_next) = (w[0], w[1]);
        let h = s_next - s;
        let d = slope(&x, s)?;
        let euler = &x + &(&d * h);
        if s_next == T::zero() {
            x = euler;
        } else {
            let d2 = slope(&euler, s_next)?;
            Zip::from(&mut x)
                .and(&d)
                .and(&d2)
                .for_each(|x, &a, &b| *x = *x + h * half * (a + b));
        }
    }
    Ok(x)
}
