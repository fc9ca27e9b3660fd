//! Points, distances, caps, regions and segments on `S^{d-1}_R`.
//!
//! Points are stored as three ambient coordinates; on the circle (`d = 2`)
//! the third coordinate is always zero.

mod cap;
mod cover;
mod region;
mod segment;

pub use cap::{cap_measure, Cap};
pub use cover::{
    build_cap_cover, circle_points, fibonacci_points, multiplicity_bound, test_centers, thickness, CapCover,
    ThicknessReport,
};
pub use region::{region_measure, Boundary, Region};
pub use segment::{arc_measure, geodesic_segment, select_direction, DirectionChoice, LineSegment};

use core::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Relative tolerance for `|x| = R`.
pub const ON_SPHERE_TOL: f64 = 1e-12;

/// Relative tolerance (in units of `R²`) for `p·v = 0`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Ambient dimension and radius of the sphere `S^{d-1}_R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereContext {
    d: usize,
    radius: f64,
}

impl SphereContext {
    pub fn new(d: usize, radius: f64) -> Result<Self> {
        if d < 2 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidContext { d, radius });
        }
        if d > 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        Ok(Self { d, radius })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `|S^{d-1}_R|`: `2πR` for the circle, `4πR²` for the sphere.
    pub fn surface_measure(&self) -> f64 {
        match self.d {
            2 => 2.0 * PI * self.radius,
            _ => 4.0 * PI * self.radius * self.radius,
        }
    }

    /// Validates ambient coordinates and returns the point.
    pub fn point(&self, coords: &[f64]) -> Result<SpherePoint> {
        if coords.len() != self.d {
            return Err(Error::InvalidArgument(alloc::format!(
                "expected {} coordinates, got {}",
                self.d,
                coords.len()
            )));
        }
        let mut c = [0.0; 3];
        c[..self.d].copy_from_slice(coords);
        let norm = norm3(&c);
        if !norm.is_finite() || (norm - self.radius).abs() > ON_SPHERE_TOL * self.radius {
            return Err(Error::OffSphere { norm, radius: self.radius });
        }
        Ok(SpherePoint { coords: c })
    }

    /// Scales a nonzero ambient vector onto the sphere.
    pub fn project(&self, coords: [f64; 3]) -> SpherePoint {
        let mut c = coords;
        if self.d == 2 {
            c[2] = 0.0;
        }
        let n = norm3(&c);
        let s = self.radius / n;
        SpherePoint { coords: [c[0] * s, c[1] * s, c[2] * s] }
    }

    /// Point at polar angle `theta` (from `+z`) and azimuth `phi` on `S²_R`.
    /// On the circle `theta` is ignored and `phi` is the angle.
    pub fn polar_point(&self, theta: f64, phi: f64) -> SpherePoint {
        let r = self.radius;
        if self.d == 2 {
            return SpherePoint { coords: [r * libm::cos(phi), r * libm::sin(phi), 0.0] };
        }
        let st = libm::sin(theta);
        SpherePoint { coords: [r * st * libm::cos(phi), r * st * libm::sin(phi), r * libm::cos(theta)] }
    }

    /// Point at angle `theta` on the circle.
    pub fn angle_point(&self, theta: f64) -> SpherePoint {
        self.polar_point(0.0, theta)
    }

    /// The "north pole" `(0, …, 0, R)`.
    pub fn pole(&self) -> SpherePoint {
        match self.d {
            2 => SpherePoint { coords: [0.0, self.radius, 0.0] },
            _ => SpherePoint { coords: [0.0, 0.0, self.radius] },
        }
    }

    /// Uniformly distributed random point.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> SpherePoint {
        loop {
            let mut c = [0.0; 3];
            for ci in c.iter_mut().take(self.d) {
                *ci = rng.random_range(-1.0..1.0);
            }
            let n2 = dot3(&c, &c);
            if n2 > 1e-4 && n2 <= 1.0 {
                return self.project(c);
            }
        }
    }
}

/// A point on `S^{d-1}_R`, stored in ambient coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    coords: [f64; 3],
}

impl SpherePoint {
    /// Wraps coordinates without validation. Callers guarantee `|x| = R`.
    pub(crate) fn from_raw(coords: [f64; 3]) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64; 3] {
        &self.coords
    }

    /// The first `d` coordinates.
    pub fn ambient(&self, ctx: &SphereContext) -> &[f64] {
        &self.coords[..ctx.d]
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot3(&self.coords, &other.coords)
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.coords)
    }

    /// Azimuth `atan2(y, x)` in `(-π, π]`.
    pub fn azimuth(&self) -> f64 {
        libm::atan2(self.coords[1], self.coords[0])
    }

    pub fn neg(&self) -> SpherePoint {
        let c = self.coords;
        SpherePoint { coords: [-c[0], -c[1], -c[2]] }
    }
}

/// Geodesic distance `R·arccos(u·v/R²)`, with the cosine clamped to `[-1, 1]`.
pub fn distance(u: &SpherePoint, v: &SpherePoint, ctx: &SphereContext) -> f64 {
    let r = ctx.radius;
    let c = (u.dot(v) / (r * r)).clamp(-1.0, 1.0);
    r * libm::acos(c)
}

/// A proper rotation of `R³`, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub fn identity() -> Self {
        Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Rotation by `angle` about the unit `axis` (Rodrigues).
    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = norm3(&axis);
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        let t = 1.0 - c;
        Rotation([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Rotation about the `z` axis; the only kind that preserves the circle.
    pub fn about_z(angle: f64) -> Self {
        Self::axis_angle([0.0, 0.0, 1.0], angle)
    }

    /// Random rotation: uniform axis, uniform angle. For `d = 2` use
    /// [`Rotation::about_z`] instead.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let ctx = SphereContext { d: 3, radius: 1.0 };
        let axis = *ctx.random_point(rng).coords();
        let angle = rng.random_range(0.0..2.0 * PI);
        Self::axis_angle(axis, angle)
    }

    pub fn apply_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let m = &self.0;
        [dot3(&m[0], v), dot3(&m[1], v), dot3(&m[2], v)]
    }

    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        SpherePoint { coords: self.apply_vec(&p.coords) }
    }

    /// Angle of the induced rotation of the `xy` plane.
    pub(crate) fn planar_angle(&self) -> f64 {
        libm::atan2(self.0[1][0], self.0[0][0])
    }
}

/// `x` reduced to `[0, m)`.
pub(crate) fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = libm::fmod(x, m);
    if r < 0.0 {
        let w = r + m;
        if w >= m {
            0.0
        } else {
            w
        }
    } else {
        r
    }
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    libm::sqrt(dot3(a, a))
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal pair spanning the plane orthogonal to the unit vector `n`.
pub(crate) fn tangent_frame(n: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross3(n, &helper);
    let l = norm3(&e1);
    let e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
    let e2 = cross3(n, &e1);
    (e1, e2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let u = ctx.point(&[1.0, 0.0, 0.0]).unwrap();
        let v = ctx.point(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(distance(&u, &u, &ctx), 0.0);
        assert!((distance(&u, &u.neg(), &ctx) - PI).abs() < 1e-15);
        assert!((distance(&u, &v, &ctx) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn context_validation() {
        assert!(SphereContext::new(1, 1.0).is_err());
        assert!(SphereContext::new(3, 0.0).is_err());
        assert!(SphereContext::new(3, f64::NAN).is_err());
        assert_eq!(SphereContext::new(4, 1.0), Err(Error::UnsupportedDimension(4)));
        let ctx = SphereContext::new(3, 2.0).unwrap();
        assert!(ctx.point(&[2.0, 0.0, 1e-3]).is_err());
        assert!(ctx.point(&[2.0, 0.0]).is_err());
        assert!(ctx.point(&[0.0, 2.0, 0.0]).is_ok());
    }

    #[test]
    fn rotation_is_orthogonal() {
        let r = Rotation::axis_angle([1.0, 2.0, -0.5], 0.7);
        for i in 0..3 {
            for j in 0..3 {
                let col_i = [r.0[0][i], r.0[1][i], r.0[2][i]];
                let col_j = [r.0[0][j], r.0[1][j], r.0[2][j]];
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot3(&col_i, &col_j) - expect).abs() < 1e-14);
            }
        }
    }
}
