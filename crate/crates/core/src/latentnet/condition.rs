//! Condition vectors: Betti embedding, persistence-point encoder, concatenation.

use std::fmt;

use ndarray::{Array1, Array2, Axis};

use super::attention::softmax_rows;
use super::params::{AttentionParams, CONDITION_WIDTH, TOPO_TOKENS};
use crate::error::{Error, Result};
use crate::pd::PersistencePointSet;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Betti,
    Pd,
    External,
    Concatenated,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionKind::Betti => "betti",
            ConditionKind::Pd => "pd",
            ConditionKind::External => "external",
            ConditionKind::Concatenated => "concatenated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVector<T> {
    kind: ConditionKind,
    values: Array1<T>,
}

impl<T: Real> ConditionVector<T> {
    /// A caller-supplied condition of width 256.
    pub fn external(values: Array1<T>) -> Result<Self> {
        if values.len() != CONDITION_WIDTH {
            return Err(Error::Shape(format!(
                "external condition must have {CONDITION_WIDTH} entries, found {}",
                values.len()
            )));
        }
        Self::new(ConditionKind::External, values)
    }

    fn new(kind: ConditionKind, values: Array1<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Shape("empty condition vector".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite condition entry".into()));
        }
        Ok(ConditionVector { kind, values })
    }

    pub fn kind(&self) -> ConditionKind {
        self.kind
    }

    pub fn values(&self) -> &Array1<T> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `c_β`: row `β1` of the embedding table.
pub fn betti_embed<T: Real>(beta1: usize, params: &AttentionParams<T>) -> Result<ConditionVector<T>> {
    if beta1 >= params.betti_table.nrows() {
        return Err(Error::UnsupportedBetti(beta1));
    }
    ConditionVector::new(ConditionKind::Betti, params.betti_table.row(beta1).to_owned())
}

/// `c_PD = T(G)` on exactly 16 persistence points (pad with
/// [`top_k`](PersistencePointSet::top_k)). Pad points are masked out of attention and
/// pooling.
pub fn topo_encode<T: Real>(points: &PersistencePointSet<T>, params: &AttentionParams<T>) -> Result<ConditionVector<T>> {
    if points.len() != TOPO_TOKENS {
        return Err(Error::Shape(format!(
            "topology encoder takes {TOPO_TOKENS} points, found {}",
            points.len()
        )));
    }
    let mut g = Array2::zeros((TOPO_TOKENS, 2));
    let mut mask = Vec::with_capacity(TOPO_TOKENS);
    for (i, p) in points.points().iter().enumerate() {
        g[[i, 0]] = p.birth;
        g[[i, 1]] = p.persistence;
        mask.push(!p.pad);
    }
    topo_encode_rows(&g, &mask, params)
}

/// [`topo_encode`] on raw `n x 2` rows of `(birth, persistence)`; `real[i]` is false for
/// padding.
pub fn topo_encode_rows<T: Real>(g: &Array2<T>, real: &[bool], params: &AttentionParams<T>) -> Result<ConditionVector<T>> {
    if g.ncols() != 2 || g.nrows() != real.len() {
        return Err(Error::Shape(format!("expected n x 2 rows with n mask flags, found {:?}", g.dim())));
    }
    let topo = &params.topo;
    let keep: Vec<usize> = (0..real.len()).filter(|&i| real[i]).collect();
    let pooled = if keep.is_empty() {
        Array1::zeros(topo.head.nrows())
    } else {
        let x = g.select(Axis(0), &keep).dot(&topo.lift) + &topo.lift_bias;
        let l = &topo.layer;
        let q = x.dot(&l.wq);
        let k = x.dot(&l.wk);
        let v = x.dot(&l.wv);
        let mut s = q.dot(&k.t()) / T::from_usize_lossy(q.ncols()).sqrt();
        softmax_rows(&mut s);
        let h = s.dot(&v).dot(&l.wo) + &x;
        h.mean_axis(Axis(0)).expect("non-empty")
    };
    ConditionVector::new(ConditionKind::Pd, pooled.dot(&topo.head) + &topo.head_bias)
}

/// Concatenation in order.
pub fn concat_conditions<T: Real>(parts: &[ConditionVector<T>]) -> Result<ConditionVector<T>> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("no condition vectors to concatenate".into()));
    }
    let values: Array1<T> = parts.iter().flat_map(|p| p.values.iter().copied()).collect();
    ConditionVector::new(ConditionKind::Concatenated, values)
}
