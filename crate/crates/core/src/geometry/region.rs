use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Cap, Rotation, SphereContext, SpherePoint};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Measurable subset of the sphere built from caps, latitude bands (`d = 3`),
/// angle arcs (`d = 2`) and boolean combinations.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Full,
    Empty,
    Cap(Cap),
    Band(Band),
    Arc(AngleArc),
    Union(Vec<Region>),
    Intersection(Vec<Region>),
    Complement(Box<Region>),
}

/// Latitude band `lat ∈ [lo, hi]` on `S²_R`, latitudes in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Band {
    lat: [f64; 2],
    z_lo: f64,
    z_hi: f64,
}

impl Band {
    pub fn lat(&self) -> [f64; 2] {
        self.lat
    }
}

/// Angle interval `[start, end]` on `S¹_R`, measured counter-clockwise from
/// the `x` axis. Intervals wrap around `2π`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleArc {
    start: f64,
    width: f64,
}

impl AngleArc {
    pub fn angles(&self) -> [f64; 2] {
        [self.start, self.start + self.width]
    }
}

/// A curve across which a region indicator may jump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// Circle `{x : n·x = R·h}` on `S²_R` with unit normal `n`.
    Circle { normal: [f64; 3], height: f64 },
    /// Point at the given angle on `S¹_R`.
    Angle(f64),
}

impl Region {
    pub fn cap(cap: Cap) -> Self {
        Region::Cap(cap)
    }

    pub fn band(ctx: &SphereContext, lo: f64, hi: f64) -> Result<Self> {
        if ctx.dim() != 3 {
            return Err(Error::RegionDimension { kind: "band", d: ctx.dim() });
        }
        let half = PI / 2.0;
        if !(lo <= hi) || lo < -half - 1e-12 || hi > half + 1e-12 {
            return Err(Error::InvalidArgument(alloc::format!(
                "band latitudes [{lo}, {hi}] must be ordered within [-π/2, π/2]"
            )));
        }
        let r = ctx.radius();
        Ok(Region::Band(Band { lat: [lo, hi], z_lo: r * libm::sin(lo.max(-half)), z_hi: r * libm::sin(hi.min(half)) }))
    }

    pub fn arc(ctx: &SphereContext, start: f64, end: f64) -> Result<Self> {
        if ctx.dim() != 2 {
            return Err(Error::RegionDimension { kind: "arc", d: ctx.dim() });
        }
        let width = end - start;
        if !(width >= 0.0) || width > 2.0 * PI + 1e-12 {
            return Err(Error::InvalidArgument(alloc::format!("arc [{start}, {end}] must have width in [0, 2π]")));
        }
        Ok(Region::Arc(AngleArc { start, width: width.min(2.0 * PI) }))
    }

    pub fn union(parts: Vec<Region>) -> Self {
        Region::Union(parts)
    }

    pub fn intersection(parts: Vec<Region>) -> Self {
        Region::Intersection(parts)
    }

    pub fn complement(of: Region) -> Self {
        Region::Complement(Box::new(of))
    }

    /// Indicator function.
    pub fn contains(&self, x: &SpherePoint) -> bool {
        match self {
            Region::Full => true,
            Region::Empty => false,
            Region::Cap(c) => c.contains(x),
            Region::Band(b) => {
                let z = x.coords()[2];
                z >= b.z_lo && z <= b.z_hi
            }
            Region::Arc(a) => {
                let t = x.azimuth();
                let rel = super::rem_euclid(t - a.start, 2.0 * PI);
                rel <= a.width || a.width >= 2.0 * PI
            }
            Region::Union(parts) => parts.iter().any(|p| p.contains(x)),
            Region::Intersection(parts) => parts.iter().all(|p| p.contains(x)),
            Region::Complement(of) => !of.contains(x),
        }
    }

    /// Checks that every node is defined for `ctx` and that cap centres lie
    /// on the sphere.
    pub fn validate(&self, ctx: &SphereContext) -> Result<()> {
        match self {
            Region::Full | Region::Empty => Ok(()),
            Region::Cap(c) => {
                ctx.point(c.center().ambient(ctx))?;
                Ok(())
            }
            Region::Band(_) if ctx.dim() != 3 => Err(Error::RegionDimension { kind: "band", d: ctx.dim() }),
            Region::Arc(_) if ctx.dim() != 2 => Err(Error::RegionDimension { kind: "arc", d: ctx.dim() }),
            Region::Band(_) | Region::Arc(_) => Ok(()),
            Region::Union(parts) | Region::Intersection(parts) => parts.iter().try_for_each(|p| p.validate(ctx)),
            Region::Complement(of) => of.validate(ctx),
        }
    }

    /// Curves across which the indicator can change.
    pub fn boundaries(&self, ctx: &SphereContext) -> Vec<Boundary> {
        let mut out = Vec::new();
        self.collect_boundaries(ctx, &mut out);
        out
    }

    fn collect_boundaries(&self, ctx: &SphereContext, out: &mut Vec<Boundary>) {
        let r = ctx.radius();
        match self {
            Region::Full | Region::Empty => {}
            Region::Cap(c) => {
                if c.is_whole_sphere() {
                    return;
                }
                let p = c.center().coords();
                if ctx.dim() == 2 {
                    let t = libm::atan2(p[1], p[0]);
                    out.push(Boundary::Angle(t - c.angle()));
                    out.push(Boundary::Angle(t + c.angle()));
                } else {
                    let normal = [p[0] / r, p[1] / r, p[2] / r];
                    out.push(Boundary::Circle { normal, height: c.cos_angle() });
                }
            }
            Region::Band(b) => {
                for z in [b.z_lo, b.z_hi] {
                    let h = z / r;
                    if h.abs() < 1.0 {
                        out.push(Boundary::Circle { normal: [0.0, 0.0, 1.0], height: h });
                    }
                }
            }
            Region::Arc(a) => {
                if a.width < 2.0 * PI {
                    out.push(Boundary::Angle(a.start));
                    out.push(Boundary::Angle(a.start + a.width));
                }
            }
            Region::Union(parts) | Region::Intersection(parts) => {
                for p in parts {
                    p.collect_boundaries(ctx, out);
                }
            }
            Region::Complement(of) => of.collect_boundaries(ctx, out),
        }
    }

    /// Image of the region under a rotation. On the circle only rotations
    /// about `z` are meaningful; their planar angle is used. Bands become
    /// intersections of polar caps.
    pub fn rotated(&self, rot: &Rotation, ctx: &SphereContext) -> Result<Region> {
        Ok(match self {
            Region::Full => Region::Full,
            Region::Empty => Region::Empty,
            Region::Cap(c) => {
                let center = if ctx.dim() == 2 {
                    let t = c.center().azimuth() + rot.planar_angle();
                    ctx.angle_point(t)
                } else {
                    rot.apply(c.center())
                };
                Region::Cap(Cap::new(ctx, center, c.radius_a())?)
            }
            Region::Arc(a) => {
                let s = a.start + rot.planar_angle();
                Region::arc(ctx, s, s + a.width)?
            }
            Region::Band(b) => {
                let north = rot.apply(&ctx.pole());
                let south = north.neg();
                let mut parts = Vec::new();
                // lat ≥ lo  ⇔  angle to north ≤ π/2 − lo
                let top = PI / 2.0 - b.lat[0];
                if top < PI {
                    parts.push(Region::Cap(Cap::with_angle(ctx, north, top)?));
                }
                // lat ≤ hi  ⇔  angle to south ≤ π/2 + hi
                let bottom = PI / 2.0 + b.lat[1];
                if bottom < PI {
                    parts.push(Region::Cap(Cap::with_angle(ctx, south, bottom)?));
                }
                match parts.len() {
                    0 => Region::Full,
                    _ => Region::Intersection(parts),
                }
            }
            Region::Union(parts) => Region::Union(parts.iter().map(|p| p.rotated(rot, ctx)).collect::<Result<_>>()?),
            Region::Intersection(parts) => {
                Region::Intersection(parts.iter().map(|p| p.rotated(rot, ctx)).collect::<Result<_>>()?)
            }
            Region::Complement(of) => Region::complement(of.rotated(rot, ctx)?),
        })
    }
}

/// `Σ wᵢ 1_S(xᵢ)` over the nodes of `rule`.
pub fn region_measure(region: &Region, rule: &QuadratureRule) -> f64 {
    let terms: Vec<f64> =
        rule.nodes().iter().zip(rule.weights()).map(|(x, w)| if region.contains(x) { *w } else { 0.0 }).collect();
    crate::quadrature::pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{sphere_rule, QuadratureRule};
    use alloc::vec;

    #[test]
    fn trivial_measures() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let rule = sphere_rule(&ctx, 8);
        assert!((region_measure(&Region::Full, &rule) - 4.0 * PI).abs() < 1e-12);
        assert_eq!(region_measure(&Region::Empty, &rule), 0.0);
    }

    #[test]
    fn cap_measure_on_fitted_rule() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let x = ctx.project([0.3, -0.4, 0.8]);
        let cap = Cap::new(&ctx, x, 0.1).unwrap();
        let region = Region::cap(cap);
        let rule = QuadratureRule::fitted(&ctx, 8, &region);
        assert!((region_measure(&region, &rule) - cap.measure()).abs() < 1e-6);
    }

    #[test]
    fn complement_and_disjoint_union() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let a = Region::cap(Cap::new(&ctx, ctx.pole(), 0.2).unwrap());
        let b = Region::cap(Cap::new(&ctx, ctx.pole().neg(), 0.3).unwrap());
        let rule = sphere_rule(&ctx, 30);
        let total = rule.weights().iter().sum::<f64>();
        let ma = region_measure(&a, &rule);
        let mc = region_measure(&Region::complement(a.clone()), &rule);
        assert!(((ma + mc) - total).abs() < 1e-8 * total);
        let mb = region_measure(&b, &rule);
        let mu = region_measure(&Region::union(vec![a, b]), &rule);
        assert!((mu - ma - mb).abs() < 1e-12);
    }

    #[test]
    fn arcs_wrap() {
        let ctx = SphereContext::new(2, 1.0).unwrap();
        let arc = Region::arc(&ctx, 3.0 * PI / 2.0, 5.0 * PI / 2.0).unwrap();
        assert!(arc.contains(&ctx.angle_point(0.0)));
        assert!(arc.contains(&ctx.angle_point(-0.4)));
        assert!(!arc.contains(&ctx.angle_point(PI)));
        assert!(Region::arc(&ctx, 1.0, 0.5).is_err());
    }

    #[test]
    fn dimension_checks() {
        let s1 = SphereContext::new(2, 1.0).unwrap();
        let s2 = SphereContext::new(3, 1.0).unwrap();
        assert!(Region::band(&s1, 0.0, 0.5).is_err());
        assert!(Region::arc(&s2, 0.0, 0.5).is_err());
        assert!(Region::band(&s2, 0.2, 0.1).is_err());
    }

    #[test]
    fn rotated_band_matches_original_pointwise() {
        let ctx = SphereContext::new(3, 1.0).unwrap();
        let band = Region::band(&ctx, -0.3, 0.7).unwrap();
        let rot = Rotation::axis_angle([0.2, 1.0, 0.4], 1.1);
        let moved = band.rotated(&rot, &ctx).unwrap();
        let rule = sphere_rule(&ctx, 20);
        for x in rule.nodes() {
            assert_eq!(band.contains(x), moved.contains(&rot.apply(x)));
        }
    }
}
