//! Manifold description files.
//!
//! ```json
//! { "name": "sphere", "kind": "builtin", "builtin": "sphere_projection" }
//! { "name": "hyperbolic", "kind": "warped", "profile": "sinh", "domain_radius": 3.0 }
//! ```
//!
//! Warped metrics default to the projection chart (`r̂ = f(r′)`); `"chart": "normal"` selects
//! geodesic normal coordinates instead.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricField, WarpChart, WarpProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    Builtin,
    Warped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Euclidean,
    SphereProjection,
    SpherePolar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Flat,
    Sin,
    Sinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    Projection,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub name: String,
    pub kind: SpecKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<Chart>,
}

impl From<Profile> for WarpProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Flat => WarpProfile::Flat,
            Profile::Sin => WarpProfile::Sin,
            Profile::Sinh => WarpProfile::Sinh,
        }
    }
}

impl From<Chart> for WarpChart {
    fn from(c: Chart) -> Self {
        match c {
            Chart::Projection => WarpChart::Projection,
            Chart::Normal => WarpChart::Normal,
        }
    }
}

impl ManifoldSpec {
    pub fn builtin(name: &str, builtin: Builtin) -> Self {
        Self { name: name.into(), kind: SpecKind::Builtin, builtin: Some(builtin), profile: None, domain_radius: None, chart: None }
    }

    pub fn warped(name: &str, profile: Profile, chart: Chart) -> Self {
        Self {
            name: name.into(),
            kind: SpecKind::Warped,
            builtin: None,
            profile: Some(profile),
            domain_radius: None,
            chart: Some(chart),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SpecKind::Builtin => {
                if self.builtin.is_none() {
                    return Err(Error::Spec("builtin manifold needs a \"builtin\" field".into()));
                }
                if self.profile.is_some() || self.chart.is_some() {
                    return Err(Error::Spec("\"profile\" and \"chart\" apply to warped manifolds only".into()));
                }
                if self.builtin == Some(Builtin::SpherePolar) && self.domain_radius.is_some() {
                    return Err(Error::Spec("sphere_polar does not take a domain radius".into()));
                }
            }
            SpecKind::Warped => {
                if self.profile.is_none() {
                    return Err(Error::Spec("warped manifold needs a \"profile\" field".into()));
                }
                if self.builtin.is_some() {
                    return Err(Error::Spec("\"builtin\" applies to builtin manifolds only".into()));
                }
            }
        }
        if let Some(r) = self.domain_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Spec(format!("domain_radius must be positive and finite, got {r}")));
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> Result<MetricField> {
        self.validate()?;
        Ok(match self.kind {
            SpecKind::Builtin => match self.builtin.expect("validated") {
                Builtin::Euclidean => MetricField::euclidean_disk(self.domain_radius.unwrap_or(f64::INFINITY)),
                Builtin::SphereProjection => match self.domain_radius {
                    None => MetricField::sphere_projection(),
                    Some(r) => MetricField::warped(WarpProfile::Sin, WarpChart::Projection, Some(r)),
                },
                Builtin::SpherePolar => MetricField::sphere_polar(),
            },
            SpecKind::Warped => MetricField::warped(
                self.profile.expect("validated").into(),
                self.chart.unwrap_or(Chart::Projection).into(),
                self.domain_radius,
            ),
        })
    }

    /// Warping function and chart when the metric is a known warped product.
    pub fn warp(&self) -> Option<(WarpProfile, WarpChart)> {
        match self.kind {
            SpecKind::Builtin => match self.builtin? {
                Builtin::Euclidean => Some((WarpProfile::Flat, WarpChart::Projection)),
                Builtin::SphereProjection => Some((WarpProfile::Sin, WarpChart::Projection)),
                Builtin::SpherePolar => None,
            },
            SpecKind::Warped => {
                Some((self.profile?.into(), self.chart.unwrap_or(Chart::Projection).into()))
            }
        }
    }
}
