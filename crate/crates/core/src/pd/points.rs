use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::cubical::{DiagramTable, PersistenceDiagramSet};
use crate::error::{Error, Result};
use crate::scalar::{cmp_finite, Real};

/// A persistence point in `(birth, persistence)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePoint<T> {
    pub birth: T,
    pub persistence: T,
    /// Death was `+inf` and has been replaced by the volume maximum.
    pub capped: bool,
    /// Zero padding added by [`PersistencePointSet::top_k`].
    pub pad: bool,
}

impl<T: Real> PersistencePoint<T> {
    pub fn new(birth: T, persistence: T) -> Self {
        PersistencePoint {
            birth,
            persistence,
            capped: false,
            pad: false,
        }
    }

    pub fn padding() -> Self {
        PersistencePoint {
            birth: T::zero(),
            persistence: T::zero(),
            capped: false,
            pad: true,
        }
    }

    pub fn death(&self) -> T {
        self.birth + self.persistence
    }
}

/// Persistence descending, then birth ascending; padding after real points.
fn canonical<T: Real>(a: &PersistencePoint<T>, b: &PersistencePoint<T>) -> Ordering {
    cmp_finite(b.persistence, a.persistence)
        .then(cmp_finite(a.birth, b.birth))
        .then(a.pad.cmp(&b.pad))
        .then(a.capped.cmp(&b.capped))
}

/// Points of one homology dimension, kept in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistencePointSet<T> {
    dim: usize,
    points: Vec<PersistencePoint<T>>,
}

impl<T: Real> PersistencePointSet<T> {
    pub fn new(dim: usize, mut points: Vec<PersistencePoint<T>>) -> Result<Self> {
        if dim > 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 0, 1 or 2, got {dim}")));
        }
        for p in &points {
            if !(p.birth.is_finite() && p.persistence.is_finite() && p.persistence >= T::zero()) {
                return Err(Error::InvalidArgument(
                    "points need finite birth and persistence >= 0".into(),
                ));
            }
        }
        points.sort_by(canonical);
        Ok(PersistencePointSet { dim, points })
    }

    /// Builds a set from `(birth, persistence)` tuples.
    pub fn from_pairs(dim: usize, pairs: &[(T, T)]) -> Result<Self> {
        Self::new(dim, pairs.iter().map(|&(b, p)| PersistencePoint::new(b, p)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[PersistencePoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Non-padding points.
    pub fn real_points(&self) -> impl Iterator<Item = &PersistencePoint<T>> + '_ {
        self.points.iter().filter(|p| !p.pad)
    }

    /// `(birth, death)` of the non-padding points, for the diagram distances.
    pub fn birth_death(&self) -> Vec<(T, T)> {
        self.real_points().map(|p| (p.birth, p.death())).collect()
    }

    pub fn without_capped(&self) -> Self {
        PersistencePointSet {
            dim: self.dim,
            points: self.points.iter().copied().filter(|p| !p.capped).collect(),
        }
    }

    /// The first `min(k, n)` points, padded with `(0, 0)` entries to exactly `k`.
    pub fn top_k(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let mut points: Vec<_> = self.points.iter().copied().take(k).collect();
        points.resize(k, PersistencePoint::padding());
        Ok(PersistencePointSet { dim: self.dim, points })
    }

    /// Moves point `index` toward the diagonal: persistence scaled by `1 - factor`,
    /// birth unchanged. `factor = 1` puts it on the diagonal.
    pub fn edit_toward_diagonal(&self, index: usize, factor: T) -> Result<Self> {
        if index >= self.points.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.points.len(),
            });
        }
        if !(factor >= T::zero() && factor <= T::one()) {
            return Err(Error::InvalidArgument(format!("factor must lie in [0, 1], got {factor}")));
        }
        let mut points = self.points.clone();
        let p = &mut points[index];
        p.persistence = if factor == T::one() {
            T::zero()
        } else {
            p.persistence * (T::one() - factor)
        };
        points.sort_by(canonical);
        Ok(PersistencePointSet { dim: self.dim, points })
    }

    /// TSV rows `birth<TAB>persistence<TAB>flags`, flags one of `-`, `capped`, `pad`.
    pub fn to_tsv(&self, extra_comments: &[String]) -> String {
        let mut out = format!("# topoforge-points v1 dim={}\n", self.dim);
        for c in extra_comments {
            let _ = writeln!(out, "# {c}");
        }
        for p in &self.points {
            let flag = match (p.pad, p.capped) {
                (true, _) => "pad",
                (false, true) => "capped",
                _ => "-",
            };
            let _ = writeln!(out, "{}\t{}\t{flag}", p.birth, p.persistence);
        }
        out
    }

    pub fn from_tsv(src: &str) -> Result<Self> {
        let mut dim = None;
        let mut points = Vec::new();
        for (n, line) in src.lines().enumerate() {
            let bad = |m: &str| Error::Format(format!("points line {}: {m}", n + 1));
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(d) = rest.trim().strip_prefix("topoforge-points v1 dim=") {
                    dim = Some(d.trim().parse().map_err(|_| bad("bad dim"))?);
                }
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad("expected 3 tab-separated fields"));
            }
            let birth: T = f[0].parse().map_err(|_| bad("bad birth"))?;
            let persistence: T = f[1].parse().map_err(|_| bad("bad persistence"))?;
            let (capped, pad) = match f[2] {
                "-" => (false, false),
                "capped" => (true, false),
                "pad" => (false, true),
                _ => return Err(bad("unknown flag")),
            };
            points.push(PersistencePoint {
                birth,
                persistence,
                capped,
                pad,
            });
        }
        Self::new(dim.unwrap_or(1), points)
    }
}

/// Maps every pair of dimension `dim` to `(b, d - b)`; essential deaths are capped at
/// `cap` and flagged.
fn points_from_rows<T: Real>(dim: usize, rows: impl Iterator<Item = (T, T)>, cap: T) -> Result<PersistencePointSet<T>> {
    let points = rows
        .map(|(b, d)| {
            if d.is_finite() {
                PersistencePoint::new(b, d - b)
            } else {
                PersistencePoint {
                    birth: b,
                    persistence: (cap - b).max(T::zero()),
                    capped: true,
                    pad: false,
                }
            }
        })
        .collect();
    PersistencePointSet::new(dim, points)
}

/// Point representation of one dimension of a diagram set.
pub fn to_points<T: Real>(pds: &PersistenceDiagramSet<T>, dim: usize) -> Result<PersistencePointSet<T>> {
    points_from_rows(dim, pds.pairs_of_dim(dim).map(|p| (p.birth, p.death)), pds.cap_value())
}

/// Same as [`to_points`] for a diagram read from TSV.
pub fn table_to_points<T: Real>(table: &DiagramTable<T>, dim: usize) -> Result<PersistencePointSet<T>> {
    let rows = table.rows.iter().filter(|r| r.0 == dim).map(|&(_, b, d)| (b, d));
    points_from_rows(dim, rows, table.cap_value())
}
