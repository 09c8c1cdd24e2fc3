use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vgrd::RawGrid;

use super::points::PersistencePointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiWeight {
    /// `w(p) = p`
    Linear,
    Constant,
}

/// Sampling window in `(birth, persistence)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiRange<T> {
    pub birth: (T, T),
    pub persistence: (T, T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistenceImageParams<T> {
    /// `(width, height)`: pixels along birth and along persistence.
    pub resolution: (usize, usize),
    pub range: PiRange<T>,
    pub sigma: T,
    pub weight: PiWeight,
}

pub const DEFAULT_PI_RESOLUTION: (usize, usize) = (32, 32);
pub const DEFAULT_PI_SIGMA: f64 = 0.02;

impl<T: Real> PersistenceImageParams<T> {
    /// Defaults over a collection of point sets: 32x32, sigma 0.02, linear weight,
    /// window `[min birth, max birth] x [0, max persistence]`. Zero-width axes are
    /// widened by `3 sigma` on each side.
    pub fn defaults_for<'a>(sets: impl IntoIterator<Item = &'a PersistencePointSet<T>>) -> Self {
        let sigma = T::lit(DEFAULT_PI_SIGMA);
        let (mut b0, mut b1, mut p1) = (T::infinity(), T::neg_infinity(), T::zero());
        for s in sets {
            for p in s.real_points() {
                b0 = b0.min(p.birth);
                b1 = b1.max(p.birth);
                p1 = p1.max(p.persistence);
            }
        }
        if b0 > b1 {
            (b0, b1) = (T::zero(), T::zero());
        }
        let widen = sigma * T::lit(3.0);
        if b1 - b0 <= T::zero() {
            b0 = b0 - widen;
            b1 = b1 + widen;
        }
        if p1 <= T::zero() {
            p1 = widen;
        }
        PersistenceImageParams {
            resolution: DEFAULT_PI_RESOLUTION,
            range: PiRange {
                birth: (b0, b1),
                persistence: (T::zero(), p1),
            },
            sigma,
            weight: PiWeight::Linear,
        }
    }
}

/// Persistence image: weighted isotropic Gaussians centred at the points, evaluated
/// at pixel centres. Row `r` is persistence, column `c` is birth, both increasing.
pub fn persistence_image<T: Real>(points: &PersistencePointSet<T>, params: &PersistenceImageParams<T>) -> Result<Array2<T>> {
    let (w, h) = params.resolution;
    if w == 0 || h == 0 {
        return Err(Error::InvalidArgument("resolution must be at least 1x1".into()));
    }
    if !(params.sigma > T::zero() && params.sigma.is_finite()) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let PiRange { birth: (b0, b1), persistence: (p0, p1) } = params.range;
    if !(b0.is_finite() && b1.is_finite() && p0.is_finite() && p1.is_finite() && b0 < b1 && p0 < p1) {
        return Err(Error::InvalidArgument("degenerate range box".into()));
    }
    let half = T::lit(0.5);
    let xs: Vec<T> = (0..w)
        .map(|c| b0 + (b1 - b0) * ((T::from_usize_lossy(c) + half) / T::from_usize_lossy(w)))
        .collect();
    let ys: Vec<T> = (0..h)
        .map(|r| p0 + (p1 - p0) * ((T::from_usize_lossy(r) + half) / T::from_usize_lossy(h)))
        .collect();
    let two_var = T::lit(2.0) * params.sigma * params.sigma;
    let norm = T::one() / (T::PI() * two_var);
    let mut img = Array2::zeros((h, w));
    for p in points.real_points() {
        let weight = match params.weight {
            PiWeight::Linear => p.persistence,
            PiWeight::Constant => T::one(),
        };
        if weight == T::zero() {
            continue;
        }
        let scale = weight * norm;
        for (r, &y) in ys.iter().enumerate() {
            let dy = y - p.persistence;
            let gy = (-(dy * dy) / two_var).exp();
            for (c, &x) in xs.iter().enumerate() {
                let dx = x - p.birth;
                img[[r, c]] = img[[r, c]] + scale * gy * (-(dx * dx) / two_var).exp();
            }
        }
    }
    Ok(img)
}

/// Stores an image in the volume container: `nx = width`, `ny = height`, `nz = 1`,
/// bounds `(birth0, pers0, 0) .. (birth1, pers1, 1)`.
pub fn image_to_raw<T: Real>(img: &Array2<T>, range: &PiRange<T>) -> RawGrid {
    let (h, w) = img.dim();
    let f = |v: T| v.to_f32().unwrap_or(f32::NAN);
    RawGrid {
        dims: [w as u32, h as u32, 1],
        bounds: [f(range.birth.0), f(range.persistence.0), 0.0, f(range.birth.1), f(range.persistence.1), 1.0],
        values: img.iter().map(|&v| f(v)).collect(),
    }
}

/// Tent of a point at `t`: `max(0, min(t - b, d - t))`.
#[inline]
pub fn tent<T: Real>(birth: T, death: T, t: T) -> T {
    (t - birth).min(death - t).max(T::zero())
}

/// Persistence landscape levels `1..=levels` sampled at `ts`; `out[k-1][i]` is
/// `lambda_k(ts[i])`, the k-th largest tent value (zero when fewer points exist).
pub fn persistence_landscape<T: Real>(points: &PersistencePointSet<T>, levels: usize, ts: &[T]) -> Result<Vec<Vec<T>>> {
    if levels == 0 {
        return Err(Error::InvalidArgument("landscape level must be at least 1".into()));
    }
    let bd: Vec<(T, T)> = points.birth_death();
    let mut out = vec![Vec::with_capacity(ts.len()); levels];
    let mut vals: Vec<T> = Vec::with_capacity(bd.len());
    for &t in ts {
        vals.clear();
        vals.extend(bd.iter().map(|&(b, d)| tent(b, d, t)));
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite tents"));
        for (k, level) in out.iter_mut().enumerate() {
            level.push(vals.get(k).copied().unwrap_or(T::zero()));
        }
    }
    Ok(out)
}

/// `n` evenly spaced samples over `[lo, hi]`, both ends included.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * (T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)))
            .collect(),
    }
}

/// Landscape TSV: `t<TAB>lambda_1<TAB>lambda_2...`.
pub fn landscape_to_tsv<T: Real>(ts: &[T], levels: &[Vec<T>], extra_comments: &[String]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("# topoforge-landscape v1\n");
    for c in extra_comments {
        let _ = writeln!(out, "# {c}");
    }
    for (i, t) in ts.iter().enumerate() {
        let _ = write!(out, "{t}");
        for level in levels {
            let _ = write!(out, "\t{}", level[i]);
        }
        out.push('\n');
    }
    out
}
