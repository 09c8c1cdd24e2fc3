use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::{cmp_finite, Real};

use super::complex::CellId;

/// One birth/death pair. `death` is `+inf` for essential classes, which also have no
/// death cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    pub death: T,
    pub birth_cell: CellId,
    pub death_cell: Option<CellId>,
}

impl<T: Real> PersistencePair<T> {
    pub fn is_essential(&self) -> bool {
        self.death_cell.is_none()
    }

    pub fn persistence(&self) -> T {
        self.death - self.birth
    }

    /// Alive at `t`: `birth <= t < death`.
    pub fn alive_at(&self, t: T) -> bool {
        self.birth <= t && t < self.death
    }
}

/// Header prefix of the diagram TSV format.
pub const TSV_MAGIC: &str = "# topoforge-pd v1";

/// All persistence pairs of a filtered volume, dimensions 0..=3.
///
/// Dimension-3 pairs only arise for voxels born as 3-cycles, which a complex in R^3
/// never has; they are kept for the Euler identity and omitted from exports.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagramSet<T> {
    pairs: Vec<PersistencePair<T>>,
    grid_dims: [usize; 3],
    value_range: (T, T),
}

impl<T: Real> PersistenceDiagramSet<T> {
    /// Pairs are stored sorted by (dim, birth, death, birth cell).
    pub fn new(mut pairs: Vec<PersistencePair<T>>, grid_dims: [usize; 3], value_range: (T, T)) -> Self {
        pairs.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(cmp_finite(a.birth, b.birth))
                .then(cmp_finite(a.death, b.death))
                .then(a.birth_cell.cmp(&b.birth_cell))
        });
        PersistenceDiagramSet {
            pairs,
            grid_dims,
            value_range,
        }
    }

    pub fn pairs(&self) -> &[PersistencePair<T>] {
        &self.pairs
    }

    pub fn pairs_of_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn grid_dims(&self) -> [usize; 3] {
        self.grid_dims
    }

    /// `(min, max)` of the underlying volume.
    pub fn value_range(&self) -> (T, T) {
        self.value_range
    }

    /// Death value substituted for essential classes in point representations.
    pub fn cap_value(&self) -> T {
        self.value_range.1
    }

    pub fn finite_count(&self) -> usize {
        self.pairs.iter().filter(|p| !p.is_essential()).count()
    }

    pub fn essential_count(&self) -> usize {
        self.pairs.len() - self.finite_count()
    }

    /// Betti numbers in dimensions 0..=2 of the sublevel complex at `t`.
    pub fn betti_at(&self, t: T) -> [usize; 3] {
        let b = self.betti_at_all(t);
        [b[0], b[1], b[2]]
    }

    /// Betti numbers in dimensions 0..=3.
    pub fn betti_at_all(&self, t: T) -> [usize; 4] {
        let mut b = [0usize; 4];
        for p in self.pairs.iter().filter(|p| p.alive_at(t)) {
            b[p.dim] += 1;
        }
        b
    }

    /// Drops pairs with `birth == death`.
    pub fn without_zero_persistence(&self) -> Self {
        PersistenceDiagramSet {
            pairs: self.pairs.iter().copied().filter(|p| p.death > p.birth).collect(),
            grid_dims: self.grid_dims,
            value_range: self.value_range,
        }
    }

    /// Shape-only comparison key: `(dim, birth cell, death cell)` sorted.
    pub fn pairing(&self) -> Vec<(usize, CellId, Option<CellId>)> {
        let mut v: Vec<_> = self
            .pairs
            .iter()
            .map(|p| (p.dim, p.birth_cell, p.death_cell))
            .collect();
        v.sort();
        v
    }

    /// Diagram TSV: header, range comment, then `dim<TAB>birth<TAB>death` for
    /// dimensions 0..=2 with `inf` for essential deaths. Extra `#` lines go after the
    /// header.
    pub fn to_tsv(&self, extra_comments: &[String]) -> String {
        let [nx, ny, nz] = self.grid_dims;
        let mut out = format!("{TSV_MAGIC} dims={nx}x{ny}x{nz}\n");
        let _ = writeln!(out, "# range={},{}", self.value_range.0, self.value_range.1);
        for c in extra_comments {
            let _ = writeln!(out, "# {c}");
        }
        for p in self.pairs.iter().filter(|p| p.dim <= 2) {
            if p.is_essential() {
                let _ = writeln!(out, "{}\t{}\tinf", p.dim, p.birth);
            } else {
                let _ = writeln!(out, "{}\t{}\t{}", p.dim, p.birth, p.death);
            }
        }
        out
    }
}

/// A diagram read back from TSV. Cell ids are not part of the format.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramTable<T> {
    pub grid_dims: Option<[usize; 3]>,
    pub value_range: Option<(T, T)>,
    /// `(dim, birth, death)` with `death = +inf` for essential classes.
    pub rows: Vec<(usize, T, T)>,
}

impl<T: Real> DiagramTable<T> {
    pub fn parse(src: &str) -> Result<Self> {
        let mut grid_dims = None;
        let mut value_range = None;
        let mut rows = Vec::new();
        for (lineno, line) in src.lines().enumerate() {
            let line = line.trim_end();
            let bad = |msg: &str| Error::Format(format!("diagram line {}: {msg}", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(d) = rest.strip_prefix("topoforge-pd v1 dims=") {
                    let parts: Vec<usize> = d
                        .split('x')
                        .map(|s| s.trim().parse().map_err(|_| bad("bad dims")))
                        .collect::<Result<_>>()?;
                    if parts.len() != 3 {
                        return Err(bad("bad dims"));
                    }
                    grid_dims = Some([parts[0], parts[1], parts[2]]);
                } else if let Some(r) = rest.strip_prefix("range=") {
                    let (lo, hi) = r.split_once(',').ok_or_else(|| bad("bad range"))?;
                    let lo: T = lo.parse().map_err(|_| bad("bad range"))?;
                    let hi: T = hi.parse().map_err(|_| bad("bad range"))?;
                    value_range = Some((lo, hi));
                }
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(bad("expected 3 tab-separated fields"));
            }
            let dim: usize = f[0].parse().map_err(|_| bad("bad dim"))?;
            if dim > 2 {
                return Err(bad("dim must be 0, 1 or 2"));
            }
            let birth: T = f[1].parse().map_err(|_| bad("bad birth"))?;
            let death: T = if f[2] == "inf" {
                T::infinity()
            } else {
                f[2].parse().map_err(|_| bad("bad death"))?
            };
            if !birth.is_finite() || death.is_nan() || death < birth {
                return Err(bad("need finite birth <= death"));
            }
            rows.push((dim, birth, death));
        }
        Ok(DiagramTable {
            grid_dims,
            value_range,
            rows,
        })
    }

    /// Death value used for essential classes: the recorded volume maximum, or the
    /// largest finite value in the table.
    pub fn cap_value(&self) -> T {
        if let Some((_, hi)) = self.value_range {
            return hi;
        }
        self.rows
            .iter()
            .flat_map(|&(_, b, d)| [b, d])
            .filter(|v| v.is_finite())
            .fold(T::neg_infinity(), T::max)
    }

    pub fn from_diagrams(d: &PersistenceDiagramSet<T>) -> Self {
        DiagramTable {
            grid_dims: Some(d.grid_dims),
            value_range: Some(d.value_range),
            rows: d
                .pairs
                .iter()
                .filter(|p| p.dim <= 2)
                .map(|p| (p.dim, p.birth, p.death))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(dim: usize, b: f64, d: f64) -> PersistencePair<f64> {
        PersistencePair {
            dim,
            birth: b,
            death: d,
            birth_cell: CellId(0),
            death_cell: if d.is_finite() { Some(CellId(1)) } else { None },
        }
    }

    #[test]
    fn betti_uses_half_open_interval() {
        let d = PersistenceDiagramSet::new(
            vec![pair(0, -1.0, f64::INFINITY), pair(1, -0.1, 0.15), pair(0, 0.0, 0.0)],
            [2, 2, 2],
            (-1.0, 1.0),
        );
        assert_eq!(d.betti_at(0.0), [1, 1, 0]);
        assert_eq!(d.betti_at(0.15), [1, 0, 0]);
        assert_eq!(d.betti_at(-0.1), [1, 1, 0]);
        assert_eq!(d.betti_at(-2.0), [0, 0, 0]);
    }

    #[test]
    fn tsv_round_trip() {
        let d = PersistenceDiagramSet::new(
            vec![pair(0, -1.0, f64::INFINITY), pair(1, -0.1, 0.15)],
            [4, 5, 6],
            (-1.0, 0.75),
        );
        let text = d.to_tsv(&["seed=7".to_string()]);
        assert!(text.starts_with("# topoforge-pd v1 dims=4x5x6\n"));
        assert!(text.contains("\n0\t-1\tinf\n"));
        let t = DiagramTable::<f64>::parse(&text).unwrap();
        assert_eq!(t, DiagramTable::from_diagrams(&d));
        assert_eq!(t.cap_value(), 0.75);
    }

    #[test]
    fn tsv_rejects_garbage() {
        assert!(DiagramTable::<f64>::parse("0\t1\n").is_err());
        assert!(DiagramTable::<f64>::parse("4\t0\t1\n").is_err());
        assert!(DiagramTable::<f64>::parse("1\t0.5\t0.1\n").is_err());
    }
}
