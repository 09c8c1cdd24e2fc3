use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};
use crate::scalar::Real;

/// Rotation about an axis through the origin. The matrix is derived from
/// `(axis, angle)` at construction and is orthonormal by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation<T> {
    axis: Vec3<T>,
    angle: T,
    matrix: Mat3<T>,
}

impl<T: Real> Rotation<T> {
    pub fn new(axis: Vec3<T>, angle: T) -> Result<Self> {
        let axis = unit_axis(axis)?;
        if !angle.is_finite() {
            return Err(Error::InvalidScene("rotation angle must be finite".into()));
        }
        Ok(Rotation {
            axis,
            angle,
            matrix: Mat3::from_axis_angle(axis, angle),
        })
    }

    pub fn axis(&self) -> Vec3<T> {
        self.axis
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.matrix
    }
}

/// CSG expression tree over analytic primitives.
///
/// Combinators use the min/max rules, so the result is an exact distance outside
/// the regions where operands interact and a conservative bound inside them. The
/// zero level set is always exact.
#[derive(Debug, Clone, PartialEq)]
pub enum SdfScene<T> {
    Ball {
        center: Vec3<T>,
        radius: T,
    },
    Cuboid {
        center: Vec3<T>,
        half_extents: Vec3<T>,
    },
    /// Solid torus: ring of radius `ring_radius` in the plane normal to `axis`,
    /// thickened by `tube_radius`.
    Torus {
        center: Vec3<T>,
        axis: Vec3<T>,
        ring_radius: T,
        tube_radius: T,
    },
    /// Capped cylinder of total height `2 * half_height`.
    Cylinder {
        center: Vec3<T>,
        axis: Vec3<T>,
        radius: T,
        half_height: T,
    },
    Union(Vec<SdfScene<T>>),
    Intersection(Vec<SdfScene<T>>),
    /// `base` with `cut` removed.
    Subtraction {
        base: Box<SdfScene<T>>,
        cut: Box<SdfScene<T>>,
    },
    Translate {
        offset: Vec3<T>,
        child: Box<SdfScene<T>>,
    },
    Rotate {
        rotation: Rotation<T>,
        child: Box<SdfScene<T>>,
    },
    Scale {
        factor: T,
        child: Box<SdfScene<T>>,
    },
}

fn positive<T: Real>(v: T, what: &str) -> Result<T> {
    if v.is_finite() && v > T::zero() {
        Ok(v)
    } else {
        Err(Error::InvalidScene(format!("{what} must be finite and > 0, got {v}")))
    }
}

fn finite_point<T: Real>(p: Vec3<T>, what: &str) -> Result<Vec3<T>> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(Error::InvalidScene(format!("{what} must be finite")))
    }
}

fn unit_axis<T: Real>(axis: Vec3<T>) -> Result<Vec3<T>> {
    let n = axis.norm();
    if !(n.is_finite() && n > T::epsilon()) {
        return Err(Error::InvalidScene("axis must be a finite non-zero vector".into()));
    }
    // already-unit axes keep their bits so printed scenes re-parse identically
    if (n - T::one()).abs() <= T::lit(4.0) * T::epsilon() {
        return Ok(axis);
    }
    Ok(axis * (T::one() / n))
}

impl<T: Real> SdfScene<T> {
    pub fn ball(center: Vec3<T>, radius: T) -> Result<Self> {
        Ok(SdfScene::Ball {
            center: finite_point(center, "ball center")?,
            radius: positive(radius, "ball radius")?,
        })
    }

    pub fn cuboid(center: Vec3<T>, half_extents: Vec3<T>) -> Result<Self> {
        positive(half_extents.min_elem(), "box half-extent")?;
        Ok(SdfScene::Cuboid {
            center: finite_point(center, "box center")?,
            half_extents: finite_point(half_extents, "box half-extents")?,
        })
    }

    pub fn torus(center: Vec3<T>, axis: Vec3<T>, ring_radius: T, tube_radius: T) -> Result<Self> {
        Ok(SdfScene::Torus {
            center: finite_point(center, "torus center")?,
            axis: unit_axis(axis)?,
            ring_radius: positive(ring_radius, "torus ring radius")?,
            tube_radius: positive(tube_radius, "torus tube radius")?,
        })
    }

    pub fn cylinder(center: Vec3<T>, axis: Vec3<T>, radius: T, half_height: T) -> Result<Self> {
        Ok(SdfScene::Cylinder {
            center: finite_point(center, "cylinder center")?,
            axis: unit_axis(axis)?,
            radius: positive(radius, "cylinder radius")?,
            half_height: positive(half_height, "cylinder half-height")?,
        })
    }

    pub fn union(children: Vec<Self>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidScene("union needs at least one operand".into()));
        }
        Ok(SdfScene::Union(children))
    }

    pub fn intersection(children: Vec<Self>) -> Result<Self> {
        if children.is_empty() {
            return Err(Error::InvalidScene("intersection needs at least one operand".into()));
        }
        Ok(SdfScene::Intersection(children))
    }

    pub fn subtraction(base: Self, cut: Self) -> Self {
        SdfScene::Subtraction {
            base: Box::new(base),
            cut: Box::new(cut),
        }
    }

    pub fn translate(self, offset: Vec3<T>) -> Result<Self> {
        Ok(SdfScene::Translate {
            offset: finite_point(offset, "translation")?,
            child: Box::new(self),
        })
    }

    pub fn rotate(self, axis: Vec3<T>, angle: T) -> Result<Self> {
        Ok(SdfScene::Rotate {
            rotation: Rotation::new(axis, angle)?,
            child: Box::new(self),
        })
    }

    pub fn scale(self, factor: T) -> Result<Self> {
        Ok(SdfScene::Scale {
            factor: positive(factor, "scale factor")?,
            child: Box::new(self),
        })
    }

    /// Re-checks every node invariant. Scenes built through the constructors or the
    /// text parser always pass; this guards hand-assembled enum values.
    pub fn validate(&self) -> Result<()> {
        match self {
            SdfScene::Ball { center, radius } => {
                Self::ball(*center, *radius)?;
            }
            SdfScene::Cuboid { center, half_extents } => {
                Self::cuboid(*center, *half_extents)?;
            }
            SdfScene::Torus {
                center,
                axis,
                ring_radius,
                tube_radius,
            } => {
                Self::torus(*center, *axis, *ring_radius, *tube_radius)?;
                check_unit(*axis)?;
            }
            SdfScene::Cylinder {
                center,
                axis,
                radius,
                half_height,
            } => {
                Self::cylinder(*center, *axis, *radius, *half_height)?;
                check_unit(*axis)?;
            }
            SdfScene::Union(cs) | SdfScene::Intersection(cs) => {
                if cs.is_empty() {
                    return Err(Error::InvalidScene("combinator without operands".into()));
                }
                for c in cs {
                    c.validate()?;
                }
            }
            SdfScene::Subtraction { base, cut } => {
                base.validate()?;
                cut.validate()?;
            }
            SdfScene::Translate { offset, child } => {
                finite_point(*offset, "translation")?;
                child.validate()?;
            }
            SdfScene::Rotate { rotation, child } => {
                check_unit(rotation.axis)?;
                child.validate()?;
            }
            SdfScene::Scale { factor, child } => {
                positive(*factor, "scale factor")?;
                child.validate()?;
            }
        }
        Ok(())
    }

    /// Signed distance at `p`: negative inside, zero on the surface.
    pub fn eval(&self, p: Vec3<T>) -> T {
        match self {
            SdfScene::Ball { center, radius } => (p - *center).norm() - *radius,
            SdfScene::Cuboid { center, half_extents } => {
                let q = (p - *center).abs() - *half_extents;
                let outside = q.map(|v| v.max(T::zero())).norm();
                outside + q.max_elem().min(T::zero())
            }
            SdfScene::Torus {
                center,
                axis,
                ring_radius,
                tube_radius,
            } => {
                let (radial, height) = cylindrical(p - *center, *axis);
                let dr = radial - *ring_radius;
                (dr * dr + height * height).sqrt() - *tube_radius
            }
            SdfScene::Cylinder {
                center,
                axis,
                radius,
                half_height,
            } => {
                let (radial, height) = cylindrical(p - *center, *axis);
                let dx = radial - *radius;
                let dy = height.abs() - *half_height;
                let inside = dx.max(dy).min(T::zero());
                let ox = dx.max(T::zero());
                let oy = dy.max(T::zero());
                inside + (ox * ox + oy * oy).sqrt()
            }
            SdfScene::Union(cs) => cs
                .iter()
                .map(|c| c.eval(p))
                .fold(T::infinity(), T::min),
            SdfScene::Intersection(cs) => cs
                .iter()
                .map(|c| c.eval(p))
                .fold(T::neg_infinity(), T::max),
            SdfScene::Subtraction { base, cut } => base.eval(p).max(-cut.eval(p)),
            SdfScene::Translate { offset, child } => child.eval(p - *offset),
            SdfScene::Rotate { rotation, child } => {
                child.eval(rotation.matrix.transpose().mul_vec(p))
            }
            SdfScene::Scale { factor, child } => *factor * child.eval(p * (T::one() / *factor)),
        }
    }

    /// Number of primitive leaves.
    pub fn primitive_count(&self) -> usize {
        match self {
            SdfScene::Ball { .. }
            | SdfScene::Cuboid { .. }
            | SdfScene::Torus { .. }
            | SdfScene::Cylinder { .. } => 1,
            SdfScene::Union(cs) | SdfScene::Intersection(cs) => {
                cs.iter().map(Self::primitive_count).sum()
            }
            SdfScene::Subtraction { base, cut } => base.primitive_count() + cut.primitive_count(),
            SdfScene::Translate { child, .. }
            | SdfScene::Rotate { child, .. }
            | SdfScene::Scale { child, .. } => child.primitive_count(),
        }
    }
}

fn check_unit<T: Real>(axis: Vec3<T>) -> Result<()> {
    if (axis.norm() - T::one()).abs() > T::lit(1e-5) {
        return Err(Error::InvalidScene("axis must be unit length".into()));
    }
    Ok(())
}

/// Distance from the axis line and signed height along it.
#[inline]
fn cylindrical<T: Real>(d: Vec3<T>, axis: Vec3<T>) -> (T, T) {
    let height = d.dot(axis);
    let radial = (d - axis * height).norm();
    (radial, height)
}
