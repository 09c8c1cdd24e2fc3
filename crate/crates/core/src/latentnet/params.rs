//! Network parameters: seeded initialization and the manifest + blob file format.
//!
//! The blob is a concatenation of `VGRD` matrices (see [`crate::vgrd`]). The manifest is
//! plain text:
//!
//! ```text
//! topoforge-params v1
//! config latent_count=32 width=64 layers=4 bottleneck=32 condition=256 frequencies=8
//! seed 7
//! blob params.bin
//! matrix pe.proj 48 64 0
//! ...
//! ```
//!
//! with one `matrix name rows cols offset` line per tensor, offsets in bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vgrd::RawGrid;

pub const DEFAULT_LATENT_COUNT: usize = 32;
pub const DEFAULT_WIDTH: usize = 64;
pub const DEFAULT_LAYERS: usize = 4;
pub const BOTTLENECK_WIDTH: usize = 32;
pub const CONDITION_WIDTH: usize = 256;
pub const DEFAULT_FREQUENCIES: usize = 8;
pub const BETTI_TABLE_ROWS: usize = 5;
pub const TOPO_TOKENS: usize = 16;
/// Recorded for reference; the kernels here never build the full denoiser.
pub const DENOISING_BLOCKS: usize = 24;
pub const SAMPLE_POINTS: usize = 2048;

const MANIFEST_MAGIC: &str = "topoforge-params v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentConfig {
    /// M
    pub latent_count: usize,
    /// C
    pub width: usize,
    /// L
    pub layers: usize,
    /// C0
    pub bottleneck: usize,
    pub condition_width: usize,
    /// Fourier frequencies per axis; the embedding has `6 * frequencies` features.
    pub frequencies: usize,
}

impl Default for LatentConfig {
    fn default() -> Self {
        LatentConfig {
            latent_count: DEFAULT_LATENT_COUNT,
            width: DEFAULT_WIDTH,
            layers: DEFAULT_LAYERS,
            bottleneck: BOTTLENECK_WIDTH,
            condition_width: CONDITION_WIDTH,
            frequencies: DEFAULT_FREQUENCIES,
        }
    }
}

impl LatentConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("latent_count", self.latent_count),
            ("width", self.width),
            ("layers", self.layers),
            ("bottleneck", self.bottleneck),
            ("condition", self.condition_width),
            ("frequencies", self.frequencies),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.frequencies > 24 {
            return Err(Error::InvalidArgument("at most 24 frequencies".into()));
        }
        Ok(())
    }

    pub fn feature_width(&self) -> usize {
        6 * self.frequencies
    }
}

/// Query/key/value/output projections of one single-head attention layer. Rows are
/// inputs: `q = x · wq`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttnLayer<T> {
    pub wq: Array2<T>,
    pub wk: Array2<T>,
    pub wv: Array2<T>,
    pub wo: Array2<T>,
}

impl<T: Real> AttnLayer<T> {
    pub fn width(&self) -> usize {
        self.wq.nrows()
    }

    fn check(&self, width: usize, name: &str) -> Result<()> {
        for (m, part) in [(&self.wq, "q"), (&self.wk, "k"), (&self.wv, "v"), (&self.wo, "o")] {
            check_shape(m, (width, width), &format!("{name}.{part}"))?;
        }
        Ok(())
    }
}

/// Parameters of the decoder's query attention; no output projection.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryParams<T> {
    pub wq: Array2<T>,
    pub wk: Array2<T>,
    pub wv: Array2<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoParams<T> {
    pub lift: Array2<T>,
    pub lift_bias: Array1<T>,
    pub layer: AttnLayer<T>,
    pub head: Array2<T>,
    pub head_bias: Array1<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams<T> {
    pub config: LatentConfig,
    /// Seed of the initialization, if seeded.
    pub seed: Option<u64>,
    pub pe_proj: Array2<T>,
    pub pe_bias: Array1<T>,
    pub cross: AttnLayer<T>,
    pub mu_proj: Array2<T>,
    pub mu_bias: Array1<T>,
    pub logvar_proj: Array2<T>,
    pub logvar_bias: Array1<T>,
    /// C0 -> C lift applied to the bottleneck before the self-attention stack.
    pub lift: Array2<T>,
    pub lift_bias: Array1<T>,
    pub layers: Vec<AttnLayer<T>>,
    pub query: QueryParams<T>,
    pub head_weight: Array1<T>,
    pub head_bias: T,
    pub betti_table: Array2<T>,
    pub topo: TopoParams<T>,
}

struct Init {
    rng: ChaCha8Rng,
}

impl Init {
    // Values are drawn as f32 so that f32 and f64 parameter sets agree exactly and
    // survive the f32 blob format.
    fn uniform<T: Real>(&mut self, rows: usize, cols: usize, fan_in: usize) -> Array2<T> {
        let a = 1.0 / (fan_in as f64).sqrt();
        Array2::from_shape_simple_fn((rows, cols), || {
            let v = self.rng.random_range(-a..a) as f32;
            T::lit(v as f64)
        })
    }

    fn uniform_vec<T: Real>(&mut self, n: usize, fan_in: usize) -> Array1<T> {
        self.uniform(1, n, fan_in).into_shape_with_order(n).expect("1 x n")
    }

    fn normal<T: Real>(&mut self, rows: usize, cols: usize) -> Array2<T> {
        Array2::from_shape_simple_fn((rows, cols), || {
            let v: f64 = self.rng.sample(StandardNormal);
            T::lit(v as f32 as f64)
        })
    }

    fn layer<T: Real>(&mut self, width: usize) -> AttnLayer<T> {
        AttnLayer {
            wq: self.uniform(width, width, width),
            wk: self.uniform(width, width, width),
            wv: self.uniform(width, width, width),
            wo: self.uniform(width, width, width),
        }
    }
}

impl<T: Real> AttentionParams<T> {
    pub fn seeded(config: LatentConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = Init {
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let (c, c0, cw, fw) = (
            config.width,
            config.bottleneck,
            config.condition_width,
            config.feature_width(),
        );
        let pe_proj = init.uniform(fw, c, fw);
        let pe_bias = init.uniform_vec(c, fw);
        let cross = init.layer(c);
        let mu_proj = init.uniform(c, c0, c);
        let mu_bias = init.uniform_vec(c0, c);
        let logvar_proj = init.uniform(c, c0, c);
        let logvar_bias = init.uniform_vec(c0, c);
        let lift = init.uniform(c0, c, c0);
        let lift_bias = init.uniform_vec(c, c0);
        let layers = (0..config.layers).map(|_| init.layer(c)).collect();
        let query = QueryParams {
            wq: init.uniform(c, c, c),
            wk: init.uniform(c, c, c),
            wv: init.uniform(c, c, c),
        };
        let head_weight = init.uniform_vec(c, c);
        let head_bias = init.uniform_vec::<T>(1, c)[0];
        let betti_table = init.normal(BETTI_TABLE_ROWS, cw);
        let topo = TopoParams {
            lift: init.uniform(2, cw, 2),
            lift_bias: init.uniform_vec(cw, 2),
            layer: init.layer(cw),
            head: init.uniform(cw, cw, cw),
            head_bias: init.uniform_vec(cw, cw),
        };
        Ok(AttentionParams {
            config,
            seed: Some(seed),
            pe_proj,
            pe_bias,
            cross,
            mu_proj,
            mu_bias,
            logvar_proj,
            logvar_bias,
            lift,
            lift_bias,
            layers,
            query,
            head_weight,
            head_bias,
            betti_table,
            topo,
        })
    }

    /// Checks every tensor against the declared config.
    pub fn validate(&self) -> Result<()> {
        let cfg = &self.config;
        cfg.validate()?;
        let (c, c0, cw, fw) = (cfg.width, cfg.bottleneck, cfg.condition_width, cfg.feature_width());
        check_shape(&self.pe_proj, (fw, c), "pe.proj")?;
        check_len(&self.pe_bias, c, "pe.bias")?;
        self.cross.check(c, "cross")?;
        check_shape(&self.mu_proj, (c, c0), "bottleneck.mu")?;
        check_len(&self.mu_bias, c0, "bottleneck.mu_bias")?;
        check_shape(&self.logvar_proj, (c, c0), "bottleneck.logvar")?;
        check_len(&self.logvar_bias, c0, "bottleneck.logvar_bias")?;
        check_shape(&self.lift, (c0, c), "lift")?;
        check_len(&self.lift_bias, c, "lift.bias")?;
        if self.layers.len() != cfg.layers {
            return Err(Error::Shape(format!(
                "expected {} self-attention layers, found {}",
                cfg.layers,
                self.layers.len()
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            l.check(c, &format!("self.{i}"))?;
        }
        check_shape(&self.query.wq, (c, c), "query.q")?;
        check_shape(&self.query.wk, (c, c), "query.k")?;
        check_shape(&self.query.wv, (c, c), "query.v")?;
        check_len(&self.head_weight, c, "head.weight")?;
        check_shape(&self.betti_table, (BETTI_TABLE_ROWS, cw), "betti.table")?;
        check_shape(&self.topo.lift, (2, cw), "topo.lift")?;
        check_len(&self.topo.lift_bias, cw, "topo.lift_bias")?;
        self.topo.layer.check(cw, "topo.self")?;
        check_shape(&self.topo.head, (cw, cw), "topo.head")?;
        check_len(&self.topo.head_bias, cw, "topo.head_bias")?;
        for (name, m) in self.named_matrices() {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite entry in {name}")));
            }
        }
        Ok(())
    }

    /// Every tensor as a named matrix; vectors are `1 x n`, the scalar bias `1 x 1`.
    pub fn named_matrices(&self) -> Vec<(String, Array2<T>)> {
        let row = |v: &Array1<T>| v.clone().insert_axis(ndarray::Axis(0));
        let mut out = vec![
            ("pe.proj".to_string(), self.pe_proj.clone()),
            ("pe.bias".into(), row(&self.pe_bias)),
        ];
        push_layer(&mut out, "cross", &self.cross);
        out.push(("bottleneck.mu".into(), self.mu_proj.clone()));
        out.push(("bottleneck.mu_bias".into(), row(&self.mu_bias)));
        out.push(("bottleneck.logvar".into(), self.logvar_proj.clone()));
        out.push(("bottleneck.logvar_bias".into(), row(&self.logvar_bias)));
        out.push(("lift".into(), self.lift.clone()));
        out.push(("lift.bias".into(), row(&self.lift_bias)));
        for (i, l) in self.layers.iter().enumerate() {
            push_layer(&mut out, &format!("self.{i}"), l);
        }
        out.push(("query.q".into(), self.query.wq.clone()));
        out.push(("query.k".into(), self.query.wk.clone()));
        out.push(("query.v".into(), self.query.wv.clone()));
        out.push(("head.weight".into(), row(&self.head_weight)));
        out.push(("head.bias".into(), Array2::from_elem((1, 1), self.head_bias)));
        out.push(("betti.table".into(), self.betti_table.clone()));
        out.push(("topo.lift".into(), self.topo.lift.clone()));
        out.push(("topo.lift_bias".into(), row(&self.topo.lift_bias)));
        push_layer(&mut out, "topo.self", &self.topo.layer);
        out.push(("topo.head".into(), self.topo.head.clone()));
        out.push(("topo.head_bias".into(), row(&self.topo.head_bias)));
        out
    }

    fn from_named(config: LatentConfig, seed: Option<u64>, mut m: BTreeMap<String, Array2<T>>) -> Result<Self> {
        let mut take = |name: &str| -> Result<Array2<T>> {
            m.remove(name)
                .ok_or_else(|| Error::Format(format!("missing tensor {name}")))
        };
        let vec = |a: Array2<T>| -> Array1<T> { a.into_iter().collect() };
        let mut layer = |prefix: &str| -> Result<AttnLayer<T>> {
            Ok(AttnLayer {
                wq: take(&format!("{prefix}.q"))?,
                wk: take(&format!("{prefix}.k"))?,
                wv: take(&format!("{prefix}.v"))?,
                wo: take(&format!("{prefix}.o"))?,
            })
        };
        let cross = layer("cross")?;
        let layers = (0..config.layers)
            .map(|i| layer(&format!("self.{i}")))
            .collect::<Result<Vec<_>>>()?;
        let topo_layer = layer("topo.self")?;
        let mut take = |name: &str| -> Result<Array2<T>> {
            m.remove(name)
                .ok_or_else(|| Error::Format(format!("missing tensor {name}")))
        };
        let head_bias = take("head.bias")?;
        if head_bias.len() != 1 {
            return Err(Error::Shape("head.bias must be 1 x 1".into()));
        }
        let params = AttentionParams {
            config,
            seed,
            pe_proj: take("pe.proj")?,
            pe_bias: vec(take("pe.bias")?),
            cross,
            mu_proj: take("bottleneck.mu")?,
            mu_bias: vec(take("bottleneck.mu_bias")?),
            logvar_proj: take("bottleneck.logvar")?,
            logvar_bias: vec(take("bottleneck.logvar_bias")?),
            lift: take("lift")?,
            lift_bias: vec(take("lift.bias")?),
            layers,
            query: QueryParams {
                wq: take("query.q")?,
                wk: take("query.k")?,
                wv: take("query.v")?,
            },
            head_weight: vec(take("head.weight")?),
            head_bias: head_bias[[0, 0]],
            betti_table: take("betti.table")?,
            topo: TopoParams {
                lift: take("topo.lift")?,
                lift_bias: vec(take("topo.lift_bias")?),
                layer: topo_layer,
                head: take("topo.head")?,
                head_bias: vec(take("topo.head_bias")?),
            },
        };
        if let Some(extra) = m.keys().next() {
            return Err(Error::Format(format!("unexpected tensor {extra}")));
        }
        params.validate()?;
        Ok(params)
    }

    /// Serializes to `(manifest, blob)`. The manifest names the blob file `blob_name`.
    /// Fails unless every entry is exactly representable as `f32`.
    pub fn to_files(&self, blob_name: &str) -> Result<(String, Vec<u8>)> {
        let c = &self.config;
        let mut manifest = format!("{MANIFEST_MAGIC}\n");
        let _ = writeln!(
            manifest,
            "config latent_count={} width={} layers={} bottleneck={} condition={} frequencies={}",
            c.latent_count, c.width, c.layers, c.bottleneck, c.condition_width, c.frequencies
        );
        match self.seed {
            Some(s) => {
                let _ = writeln!(manifest, "seed {s}");
            }
            None => manifest.push_str("seed none\n"),
        }
        let _ = writeln!(manifest, "blob {blob_name}");
        let mut blob = Vec::new();
        for (name, m) in self.named_matrices() {
            let mut values = Vec::with_capacity(m.len());
            for &v in m.iter() {
                let x = v.as_f64();
                if (x as f32) as f64 != x {
                    return Err(Error::Format(format!("{name}: {x} is not representable as f32")));
                }
                values.push(x as f32);
            }
            let _ = writeln!(manifest, "matrix {name} {} {} {}", m.nrows(), m.ncols(), blob.len());
            RawGrid::matrix(m.nrows(), m.ncols(), values)?.write_to(&mut blob)?;
        }
        Ok((manifest, blob))
    }

    /// Parses a manifest and its blob. Returns the params and the blob name it references.
    pub fn from_files(manifest: &str, blob: &[u8]) -> Result<(Self, String)> {
        let mut lines = manifest
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some(MANIFEST_MAGIC) {
            return Err(Error::Format("not a topoforge parameter manifest".into()));
        }
        let mut config = None;
        let mut seed = None;
        let mut blob_name = None;
        let mut tensors = BTreeMap::new();
        for line in lines {
            let mut words = line.split_whitespace();
            match words.next() {
                Some("config") => config = Some(parse_config(words)?),
                Some("seed") => {
                    seed = match words.next() {
                        Some("none") => None,
                        Some(s) => Some(s.parse().map_err(|_| Error::Format(format!("bad seed {s}")))?),
                        None => return Err(Error::Format("seed line without value".into())),
                    }
                }
                Some("blob") => blob_name = words.next().map(str::to_string),
                Some("matrix") => {
                    let f: Vec<&str> = words.collect();
                    if f.len() != 4 {
                        return Err(Error::Format(format!("bad matrix line: {line}")));
                    }
                    let num = |s: &str| -> Result<usize> {
                        s.parse().map_err(|_| Error::Format(format!("bad number {s}")))
                    };
                    let (rows, cols, offset) = (num(f[1])?, num(f[2])?, num(f[3])?);
                    let slice = blob
                        .get(offset..)
                        .ok_or_else(|| Error::Format(format!("{}: offset past end of blob", f[0])))?;
                    let raw = RawGrid::read_from(slice)?;
                    if raw.dims != [cols as u32, rows as u32, 1] {
                        return Err(Error::Format(format!("{}: blob shape disagrees with manifest", f[0])));
                    }
                    let values = raw.values.iter().map(|&v| T::lit(v as f64)).collect();
                    let m = Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Shape(e.to_string()))?;
                    if tensors.insert(f[0].to_string(), m).is_some() {
                        return Err(Error::Format(format!("duplicate tensor {}", f[0])));
                    }
                }
                _ => return Err(Error::Format(format!("unrecognized manifest line: {line}"))),
            }
        }
        let config = config.ok_or_else(|| Error::Format("manifest has no config line".into()))?;
        let blob_name = blob_name.ok_or_else(|| Error::Format("manifest has no blob line".into()))?;
        Ok((Self::from_named(config, seed, tensors)?, blob_name))
    }

    /// Reads a manifest file; its blob is resolved relative to the manifest's directory.
    pub fn read_manifest(path: &Path) -> Result<Self> {
        let manifest = std::fs::read_to_string(path)?;
        let blob_name = manifest
            .lines()
            .find_map(|l| l.trim().strip_prefix("blob "))
            .ok_or_else(|| Error::Format("manifest has no blob line".into()))?
            .trim()
            .to_string();
        let blob = std::fs::read(path.parent().unwrap_or(Path::new(".")).join(blob_name))?;
        Ok(Self::from_files(&manifest, &blob)?.0)
    }
}

fn push_layer<T: Real>(out: &mut Vec<(String, Array2<T>)>, prefix: &str, l: &AttnLayer<T>) {
    out.push((format!("{prefix}.q"), l.wq.clone()));
    out.push((format!("{prefix}.k"), l.wk.clone()));
    out.push((format!("{prefix}.v"), l.wv.clone()));
    out.push((format!("{prefix}.o"), l.wo.clone()));
}

fn parse_config<'a>(words: impl Iterator<Item = &'a str>) -> Result<LatentConfig> {
    let mut c = LatentConfig::default();
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad config entry {w}")))?;
        let v: usize = v.parse().map_err(|_| Error::Format(format!("bad config value {w}")))?;
        match k {
            "latent_count" => c.latent_count = v,
            "width" => c.width = v,
            "layers" => c.layers = v,
            "bottleneck" => c.bottleneck = v,
            "condition" => c.condition_width = v,
            "frequencies" => c.frequencies = v,
            _ => return Err(Error::Format(format!("unknown config key {k}"))),
        }
    }
    c.validate()?;
    Ok(c)
}

pub(crate) fn check_shape<T>(m: &Array2<T>, want: (usize, usize), name: &str) -> Result<()> {
    if m.dim() != want {
        return Err(Error::Shape(format!("{name}: expected {want:?}, found {:?}", m.dim())));
    }
    Ok(())
}

pub(crate) fn check_len<T>(v: &Array1<T>, want: usize, name: &str) -> Result<()> {
    if v.len() != want {
        return Err(Error::Shape(format!("{name}: expected length {want}, found {}", v.len())));
    }
    Ok(())
}
