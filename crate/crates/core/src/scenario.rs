//! Scenario files: one JSON document describing a slab, a source, where to
//! sample the field, and the numerical settings of each solver.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::DEFAULT_TRUNCATION;
use crate::model::{validate, FieldRequest, Frame, SlabModel, SourceSpec};
use crate::profile::QuadraturePlan;
use crate::reference::fd::{Advection, FdConfig, Scheme};
use crate::reference::ilt::IltPlan;

/// Evenly spaced coordinates `from..=to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.from],
            n => (0..n)
                .map(|i| self.from + (self.to - self.from) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x: Axis,
    pub y: Axis,
    pub z: Axis,
}

impl Grid {
    /// Points in x-major, then y, then z order.
    pub fn points(&self) -> Vec<[f64; 3]> {
        let (xs, ys, zs) = (self.x.values(), self.y.values(), self.z.values());
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSpec {
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub frame: Frame,
}

impl RequestSpec {
    pub fn field_request(&self) -> FieldRequest {
        let mut points = self.points.clone();
        if let Some(grid) = &self.grid {
            points.extend(grid.points());
        }
        FieldRequest {
            points,
            times: self.times.clone(),
            frame: self.frame,
        }
    }
}

/// Mesh settings for the finite-difference oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSpec {
    pub dx: f64,
    pub dz: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_advection")]
    pub advection: Advection,
    /// Lateral node stride used when comparing with the analytical field.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Final time of the mesh run; defaults to the last request time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Snapshot times; defaults to the request times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
}

fn default_scheme() -> Scheme {
    Scheme::SemiImplicitZ
}

fn default_advection() -> Advection {
    Advection::Central
}

fn default_stride() -> usize {
    2
}

/// (z, z′, t̄) samples of the z-kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub z: Vec<f64>,
    pub z_source: Vec<f64>,
    pub tbar: Vec<f64>,
}

/// Radii at which to report the steady closed-form limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub radii: Vec<f64>,
    /// Source power Q.
    #[serde(default = "unit")]
    pub power: f64,
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn unit() -> f64 {
    1.0
}

fn default_modes() -> usize {
    60
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub slab: SlabModel,
    pub source: SourceSpec,
    pub request: RequestSpec,
    #[serde(default)]
    pub plan: QuadraturePlan,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default = "default_poles")]
    pub poles: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd: Option<FdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ilt: Option<IltPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<LimitsSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

fn default_poles() -> usize {
    13
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRequest(format!("scenario: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidRequest(format!("{}: {e}", path.display())))?;
        Scenario::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    /// Checks the slab, the source and the request together.
    pub fn validate(&self) -> Result<()> {
        let mut errors = match validate(&self.slab, &self.source) {
            Ok(_) => Vec::new(),
            Err(e) => e,
        };
        errors.extend(self.request.field_request().validate(&self.slab));
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        if self.truncation == 0 || self.poles == 0 {
            return Err(Error::InvalidRequest("truncation and poles must be at least 1".into()));
        }
        self.plan.validate()?;
        if let Some(ilt) = &self.ilt {
            ilt.validate()?;
        }
        if let Some(fd) = &self.fd {
            if !(fd.dx > 0.0 && fd.dz > 0.0 && fd.stride >= 1) {
                return Err(Error::InvalidRequest("fd spacings must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn fd_times(&self) -> Option<Vec<f64>> {
        let fd = self.fd.as_ref()?;
        let mut times = fd.times.clone().unwrap_or_else(|| self.request.times.clone());
        times.sort_by(f64::total_cmp);
        times.dedup();
        Some(times)
    }

    /// Mesh configuration sized for the scenario's source and final time.
    pub fn fd_config(&self) -> Option<FdConfig> {
        let fd = self.fd.as_ref()?;
        let times = self.fd_times()?;
        let t_end = fd
            .t_end
            .or_else(|| times.last().copied())
            .unwrap_or(0.0);
        let mut config = FdConfig::for_run(&self.slab, &self.source, t_end, fd.dx, fd.dz, fd.scheme);
        config.advection = fd.advection;
        config.frame = self.request.frame;
        config.dt = 0.9 * config.max_stable_dt(&self.slab);
        Some(config)
    }
}
