use core::f64::consts::PI;

use super::{SphereContext, SpherePoint};
use crate::error::{Error, Result};

/// Spherical cap `K(x, a) = {y : d_R(x, y) ≤ πa}`.
///
/// The radius parameter `a` is kept in the same units as the threshold
/// `πa`; the angular radius seen from the centre is `πa/R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cap {
    center: SpherePoint,
    radius_a: f64,
    sphere_radius: f64,
    d: usize,
    cos_angle: f64,
}

impl Cap {
    pub fn new(ctx: &SphereContext, center: SpherePoint, radius_a: f64) -> Result<Self> {
        let r = ctx.radius();
        if !(radius_a > 0.0) || radius_a > r * (1.0 + 1e-15) {
            return Err(Error::InvalidCapRadius { a: radius_a, radius: r });
        }
        let radius_a = radius_a.min(r);
        Ok(Self { center, radius_a, sphere_radius: r, d: ctx.dim(), cos_angle: libm::cos(PI * radius_a / r) })
    }

    /// Cap with a prescribed angular radius in `(0, π]`.
    pub fn with_angle(ctx: &SphereContext, center: SpherePoint, angle: f64) -> Result<Self> {
        Self::new(ctx, center, angle * ctx.radius() / PI)
    }

    pub fn center(&self) -> &SpherePoint {
        &self.center
    }

    pub fn radius_a(&self) -> f64 {
        self.radius_a
    }

    /// Angular radius `πa/R`.
    pub fn angle(&self) -> f64 {
        PI * self.radius_a / self.sphere_radius
    }

    pub(crate) fn cos_angle(&self) -> f64 {
        self.cos_angle
    }

    pub fn is_whole_sphere(&self) -> bool {
        self.radius_a >= self.sphere_radius
    }

    pub fn contains(&self, x: &SpherePoint) -> bool {
        if self.is_whole_sphere() {
            return true;
        }
        let r2 = self.sphere_radius * self.sphere_radius;
        self.center.dot(x) / r2 >= self.cos_angle
    }

    pub fn measure(&self) -> f64 {
        let r = self.sphere_radius;
        match self.d {
            2 => 2.0 * PI * self.radius_a.min(r),
            _ => (2.0 * PI * r * r * (1.0 - self.cos_angle)).min(4.0 * PI * r * r),
        }
    }
}

/// Closed-form `|K|`: `2π·min(a, R)` on the circle, `2πR²(1 − cos(πa/R))`
/// on the sphere. Rejects `a ≤ 0`.
pub fn cap_measure(cap: &Cap, ctx: &SphereContext) -> Result<f64> {
    if !(cap.radius_a > 0.0) {
        return Err(Error::InvalidCapRadius { a: cap.radius_a, radius: ctx.radius() });
    }
    Ok(cap.measure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn closed_forms() {
        let s2 = SphereContext::new(3, 1.0).unwrap();
        let c = Cap::new(&s2, s2.pole(), 0.5).unwrap();
        assert!((cap_measure(&c, &s2).unwrap() - 2.0 * PI).abs() < 1e-14);
        let s1 = SphereContext::new(2, 1.0).unwrap();
        let c = Cap::new(&s1, s1.pole(), 1.0).unwrap();
        assert!((cap_measure(&c, &s1).unwrap() - 2.0 * PI).abs() < 1e-14);
        let c = Cap::new(&s2, s2.pole(), 0.1).unwrap();
        let expect = 2.0 * PI * (1.0 - libm::cos(0.1 * PI));
        assert!((c.measure() - expect).abs() < 1e-15);
        assert!((expect - 0.307521).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_radius() {
        let s2 = SphereContext::new(3, 1.0).unwrap();
        assert!(Cap::new(&s2, s2.pole(), 0.0).is_err());
        assert!(Cap::new(&s2, s2.pole(), -0.1).is_err());
        assert!(Cap::new(&s2, s2.pole(), 1.5).is_err());
    }

    #[test]
    fn monte_carlo_membership_matches_closed_form() {
        // 10⁶ samples keeps the unit test fast; the standard error is ~2e-3.
        let s2 = SphereContext::new(3, 1.0).unwrap();
        let cap = Cap::new(&s2, s2.pole(), 0.1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| cap.contains(&s2.random_point(&mut rng))).count();
        let est = 4.0 * PI * hits as f64 / n as f64;
        assert!((est - cap.measure()).abs() < 5e-3, "{est}");
    }

    #[test]
    fn full_cap_contains_antipode() {
        let s2 = SphereContext::new(3, 2.0).unwrap();
        let cap = Cap::new(&s2, s2.pole(), 2.0).unwrap();
        assert!(cap.contains(&s2.pole().neg()));
        assert!((cap.measure() - 16.0 * PI).abs() < 1e-12);
    }
}
