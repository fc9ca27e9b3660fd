//! JSON form of [`Region`], tagged by `"type"`.

use caplight_core::geometry::{Cap, Region, SphereContext};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Cap { center: Vec<f64>, a: f64 },
    Band { lat: [f64; 2] },
    Arc { angle: [f64; 2] },
    Union { parts: Vec<RegionSpec> },
    Intersection { parts: Vec<RegionSpec> },
    Complement { of: Box<RegionSpec> },
    Full {},
    Empty {},
}

impl RegionSpec {
    /// Builds the core region, validating centres against `|x| = R`.
    pub fn build(&self, ctx: &SphereContext) -> Result<Region, CliError> {
        let region = match self {
            RegionSpec::Cap { center, a } => {
                let p = ctx.point(center)?;
                Region::cap(Cap::new(ctx, p, *a)?)
            }
            RegionSpec::Band { lat } => Region::band(ctx, lat[0], lat[1])?,
            RegionSpec::Arc { angle } => Region::arc(ctx, angle[0], angle[1])?,
            RegionSpec::Union { parts } => Region::union(parts.iter().map(|p| p.build(ctx)).collect::<Result<_, _>>()?),
            RegionSpec::Intersection { parts } => {
                Region::intersection(parts.iter().map(|p| p.build(ctx)).collect::<Result<_, _>>()?)
            }
            RegionSpec::Complement { of } => Region::complement(of.build(ctx)?),
            RegionSpec::Full {} => Region::Full,
            RegionSpec::Empty {} => Region::Empty,
        };
        region.validate(ctx)?;
        Ok(region)
    }

    /// Parses inline JSON (leading `{`) or reads the file at `arg`.
    pub fn from_arg(arg: &str) -> Result<Self, CliError> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_owned()
        } else {
            std::fs::read_to_string(arg)
                .map_err(|e| CliError::invalid(format!("cannot read region file {arg}: {e}")))?
        };
        serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("region JSON: {e}")))
    }
}
