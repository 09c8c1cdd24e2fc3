use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scalar::Real;

/// A non-empty finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    points: Vec<Vec3<T>>,
}

impl<T: Real> PointSet<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("point set is empty".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite point at index {i}")));
        }
        Ok(PointSet { points })
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies `f` to every point.
    pub fn map(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Result<Self> {
        Self::new(self.points.iter().map(|&p| f(p)).collect())
    }

    /// One point per line, coordinates separated by tabs, commas or spaces. `#` starts a
    /// comment line.
    pub fn from_text(src: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (n, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if coords.len() != 3 {
                return Err(Error::Parse {
                    pos: n + 1,
                    msg: format!("expected 3 coordinates, found {}", coords.len()),
                });
            }
            let mut xyz = [T::zero(); 3];
            for (slot, s) in xyz.iter_mut().zip(&coords) {
                *slot = s.parse().map_err(|_| Error::Parse {
                    pos: n + 1,
                    msg: format!("bad coordinate {s:?}"),
                })?;
            }
            points.push(Vec3::from_array(xyz));
        }
        Self::new(points)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{}\t{}\t{}", p.x, p.y, p.z);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    Generated,
    Reference,
}

/// An ordered, non-empty collection of shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeSet<T> {
    role: SetRole,
    shapes: Vec<PointSet<T>>,
}

impl<T: Real> ShapeSet<T> {
    pub fn new(role: SetRole, shapes: Vec<PointSet<T>>) -> Result<Self> {
        if shapes.is_empty() {
            return Err(Error::InvalidArgument("shape set is empty".into()));
        }
        Ok(ShapeSet { role, shapes })
    }

    pub fn role(&self) -> SetRole {
        self.role
    }

    pub fn shapes(&self) -> &[PointSet<T>] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }
}
