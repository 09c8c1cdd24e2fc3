//! Position embedding, attention and the occupancy decoder.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::{AttentionParams, AttnLayer};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// In-place row softmax, max-subtracted.
pub fn softmax_rows<T: Real>(scores: &mut Array2<T>) {
    for mut row in scores.rows_mut() {
        let max = row.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        row.mapv_inplace(|s| (s - max).exp());
        let sum: T = row.iter().copied().sum();
        row.mapv_inplace(|e| e / sum);
    }
}

/// `softmax(q kᵀ / √width)` with `width = q.ncols()`.
pub fn attention_weights<T: Real>(q: &Array2<T>, k: &Array2<T>) -> Array2<T> {
    let scale = T::from_usize_lossy(q.ncols()).sqrt();
    let mut s = q.dot(&k.t()) / scale;
    softmax_rows(&mut s);
    s
}

fn require_points<T>(p: &Array2<T>, name: &str) -> Result<()> {
    if p.ncols() != 3 {
        return Err(Error::Shape(format!("{name}: expected n x 3 points, found {:?}", p.dim())));
    }
    if p.nrows() == 0 {
        return Err(Error::Shape(format!("{name}: no points")));
    }
    Ok(())
}

/// `sin`/`cos` of each coordinate at angular frequencies `π·2^k`, `k < frequencies`.
/// Columns are grouped per axis: `[sin ω0 x, cos ω0 x, sin ω1 x, ..., sin ω0 y, ...]`.
pub fn fourier_features<T: Real>(points: &Array2<T>, frequencies: usize) -> Array2<T> {
    let n = points.nrows();
    let mut out = Array2::zeros((n, 6 * frequencies));
    for (i, p) in points.rows().into_iter().enumerate() {
        for axis in 0..3 {
            let mut w = T::PI();
            for k in 0..frequencies {
                let (s, c) = (w * p[axis]).sin_cos();
                let col = axis * 2 * frequencies + 2 * k;
                out[[i, col]] = s;
                out[[i, col + 1]] = c;
                w = w + w;
            }
        }
    }
    out
}

/// `PE(p)`: Fourier features followed by a learned affine map to width C.
pub fn positional_embed<T: Real>(points: &Array2<T>, params: &AttentionParams<T>) -> Result<Array2<T>> {
    if points.ncols() != 3 {
        return Err(Error::Shape(format!("expected n x 3 points, found {:?}", points.dim())));
    }
    let f = fourier_features(points, params.config.frequencies);
    Ok(f.dot(&params.pe_proj) + &params.pe_bias)
}

/// Attention of `queries` over `keys_values` through one layer; returns the
/// output-projected values and the weight matrix.
pub fn attend<T: Real>(queries: &Array2<T>, keys_values: &Array2<T>, layer: &AttnLayer<T>) -> (Array2<T>, Array2<T>) {
    let q = queries.dot(&layer.wq);
    let k = keys_values.dot(&layer.wk);
    let v = keys_values.dot(&layer.wv);
    let a = attention_weights(&q, &k);
    (a.dot(&v).dot(&layer.wo), a)
}

fn cross_inputs<T: Real>(
    p: &Array2<T>,
    p_tilde: &Array2<T>,
    params: &AttentionParams<T>,
) -> Result<(Array2<T>, Array2<T>)> {
    require_points(p, "P")?;
    require_points(p_tilde, "P~")?;
    if p_tilde.nrows() > p.nrows() {
        return Err(Error::Shape(format!(
            "query set has {} points, more than the {} of the full set",
            p_tilde.nrows(),
            p.nrows()
        )));
    }
    Ok((positional_embed(p_tilde, params)?, positional_embed(p, params)?))
}

/// Set encoder `F = F_cross(PE(P~), PE(P))`, `M x C`.
pub fn cross_attention_encode<T: Real>(p: &Array2<T>, p_tilde: &Array2<T>, params: &AttentionParams<T>) -> Result<Array2<T>> {
    let (q, kv) = cross_inputs(p, p_tilde, params)?;
    Ok(attend(&q, &kv, &params.cross).0)
}

/// The `M x N` attention matrix of [`cross_attention_encode`].
pub fn cross_attention_weights<T: Real>(
    p: &Array2<T>,
    p_tilde: &Array2<T>,
    params: &AttentionParams<T>,
) -> Result<Array2<T>> {
    let (q, kv) = cross_inputs(p, p_tilde, params)?;
    Ok(attend(&q, &kv, &params.cross).1)
}

/// One residual self-attention layer, `x + attn(x)`.
pub fn self_attention_layer<T: Real>(x: &Array2<T>, layer: &AttnLayer<T>) -> Array2<T> {
    attend(x, x, layer).0 + x
}

/// Runs the first `layers` self-attention layers over `M x C` lifted latents.
pub fn self_attention_stack<T: Real>(x: &Array2<T>, params: &AttentionParams<T>, layers: usize) -> Result<Array2<T>> {
    if layers == 0 {
        return Err(Error::InvalidArgument("self-attention stack needs at least one layer".into()));
    }
    if layers > params.layers.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {layers} layers, parameters hold {}",
            params.layers.len()
        )));
    }
    if x.ncols() != params.config.width || x.nrows() == 0 {
        return Err(Error::Shape(format!("expected M x {}, found {:?}", params.config.width, x.dim())));
    }
    let mut h = x.clone();
    for l in &params.layers[..layers] {
        h = self_attention_layer(&h, l);
    }
    Ok(h)
}

/// `l(z)`: the C0 -> C affine lift of bottleneck latents.
pub fn lift_latents<T: Real>(z: &Array2<T>, params: &AttentionParams<T>) -> Result<Array2<T>> {
    if z.ncols() != params.config.bottleneck {
        return Err(Error::Shape(format!(
            "expected M x {}, found {:?}",
            params.config.bottleneck,
            z.dim()
        )));
    }
    Ok(z.dot(&params.lift) + &params.lift_bias)
}

fn query_parts<T: Real>(x: [T; 3], latents: &Array2<T>, params: &AttentionParams<T>) -> Result<(Array1<T>, Array2<T>)> {
    if latents.ncols() != params.config.width || latents.nrows() == 0 {
        return Err(Error::Shape(format!("expected M x {}, found {:?}", params.config.width, latents.dim())));
    }
    let xhat = positional_embed(&Array2::from_shape_vec((1, 3), x.to_vec()).expect("1 x 3"), params)?;
    let q = xhat.dot(&params.query.wq);
    let k = latents.dot(&params.query.wk);
    let w = attention_weights(&q, &k).index_axis_move(Axis(0), 0);
    Ok((w, latents.dot(&params.query.wv)))
}

/// The softmax weights of `x` over the latents.
pub fn query_weights<T: Real>(x: [T; 3], latents: &Array2<T>, params: &AttentionParams<T>) -> Result<Array1<T>> {
    Ok(query_parts(x, latents, params)?.0)
}

/// `f_x = Σ_i v(f_i) · softmax_i(q(PE(x))·k(f_i) / √C)`.
pub fn query_interpolate<T: Real>(x: [T; 3], latents: &Array2<T>, params: &AttentionParams<T>) -> Result<Array1<T>> {
    let (w, v) = query_parts(x, latents, params)?;
    Ok(w.dot(&v))
}

/// Logistic function, stable for large `|t|`.
pub fn sigmoid<T: Real>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// `sigmoid(w·f_x + b)`.
pub fn occupancy_head<T: Real>(f_x: ArrayView1<'_, T>, params: &AttentionParams<T>) -> Result<T> {
    if f_x.len() != params.head_weight.len() {
        return Err(Error::Shape(format!(
            "expected a {}-vector, found {}",
            params.head_weight.len(),
            f_x.len()
        )));
    }
    Ok(sigmoid(f_x.dot(&params.head_weight) + params.head_bias))
}

/// Farthest-point sampling from `start`; ties go to the lowest index.
pub fn farthest_point_indices<T: Real>(points: &Array2<T>, m: usize, start: usize) -> Result<Vec<usize>> {
    require_points(points, "P")?;
    let n = points.nrows();
    if m > n {
        return Err(Error::InvalidArgument(format!("cannot pick {m} of {n} points")));
    }
    if start >= n {
        return Err(Error::IndexOutOfRange { index: start, len: n });
    }
    let d2 = |i: usize, j: usize| -> T {
        let (a, b) = (points.row(i), points.row(j));
        (0..3).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()
    };
    let mut picked = Vec::with_capacity(m);
    if m == 0 {
        return Ok(picked);
    }
    let mut nearest: Vec<T> = (0..n).map(|i| d2(i, start)).collect();
    let mut taken = vec![false; n];
    picked.push(start);
    taken[start] = true;
    while picked.len() < m {
        let mut best: Option<usize> = None;
        for (i, &d) in nearest.iter().enumerate() {
            if !taken[i] && best.is_none_or(|b| d > nearest[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("m <= n leaves a candidate");
        picked.push(b);
        taken[b] = true;
        for (i, near) in nearest.iter_mut().enumerate() {
            *near = near.min(d2(i, b));
        }
    }
    Ok(picked)
}

/// `P~`: `m` farthest-point samples of `P` from a seeded start.
pub fn downsample<T: Real>(points: &Array2<T>, m: usize, seed: u64) -> Result<Array2<T>> {
    require_points(points, "P")?;
    let start = ChaCha8Rng::seed_from_u64(seed).random_range(0..points.nrows());
    let idx = farthest_point_indices(points, m, start)?;
    Ok(points.select(Axis(0), &idx))
}
