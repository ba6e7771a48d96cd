//! Domain types shared by every solver.
//!
//! Units are mm, s, K. Cooling coefficients are reduced Robin coefficients
//! in 1/mm: at the lower face `dT/dz = h1 * T`, at the upper face
//! `dT/dz = -h2 * T`. The ambient temperature is fixed at zero.
//!
//! Source terms enter the heat equation `T_t - v T_x - alpha * lap(T) = S`
//! written in the frame that travels with the source. A lab-frame point
//! `x_lab` maps to the co-moving coordinate `x = x_lab - v t`.

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

/// Display string for the cooling coefficient unit as it is usually quoted
/// next to the Table-I parameter set. The solver treats `h1`, `h2` as 1/mm.
pub const QUOTED_COOLING_UNIT: &str = "W.mm^2/K";

/// Highest supported degree of the power-law polynomial.
pub const MAX_POWER_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabModel {
    /// Thermal diffusivity, mm²/s.
    pub alpha: f64,
    /// Slab width along z, mm.
    pub w: f64,
    /// Reduced cooling coefficient at z = 0, 1/mm.
    pub h1: f64,
    /// Reduced cooling coefficient at z = w, 1/mm.
    pub h2: f64,
    /// Source speed along +x in the lab frame, mm/s.
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub t_ambient: f64,
}

impl SlabModel {
    pub fn new(alpha: f64, w: f64, h1: f64, h2: f64, v: f64) -> Self {
        SlabModel {
            alpha,
            w,
            h1,
            h2,
            v,
            t_ambient: 0.0,
        }
    }

    /// Parameter set of the published pole table: w = 5, H1 = 1.2, H2 = 1, alpha = 1.
    pub fn standard() -> Self {
        SlabModel::new(1.0, 5.0, 1.2, 1.0, 0.0)
    }

    pub fn with_speed(mut self, v: f64) -> Self {
        self.v = v;
        self
    }

    pub fn is_insulated(&self) -> bool {
        self.h1 + self.h2 == 0.0
    }

    pub fn validate(&self) -> Vec<ValidationError> {
        let mut errors = Vec::new();
        for (field, value) in [
            ("alpha", self.alpha),
            ("w", self.w),
            ("h1", self.h1),
            ("h2", self.h2),
            ("v", self.v),
            ("t_ambient", self.t_ambient),
        ] {
            if !value.is_finite() {
                errors.push(ValidationError::NonFinite { field });
            }
        }
        if !(self.alpha > 0.0) {
            errors.push(ValidationError::NonPositiveDiffusivity(self.alpha));
        }
        if !(self.w > 0.0) {
            errors.push(ValidationError::NonPositiveWidth {
                field: "w",
                value: self.w,
            });
        }
        if self.h1 < 0.0 {
            errors.push(ValidationError::NegativeCooling {
                field: "h1",
                value: self.h1,
            });
        }
        if self.h2 < 0.0 {
            errors.push(ValidationError::NegativeCooling {
                field: "h2",
                value: self.h2,
            });
        }
        if self.t_ambient != 0.0 && self.t_ambient.is_finite() {
            errors.push(ValidationError::NonZeroAmbient(self.t_ambient));
        }
        errors
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceVariant {
    PointOnOff,
    GaussianEllipsoid,
    DoubleEllipsoid,
}

/// Gaussian widths. `Split` carries separate rear (`sigma_xl`, x < 0) and
/// front (`sigma_xr`, x > 0) widths along the travel direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Widths {
    Split {
        sigma_xl: f64,
        sigma_xr: f64,
        sigma_y: f64,
        sigma_z: f64,
    },
    Symmetric {
        sigma_x: f64,
        sigma_y: f64,
        sigma_z: f64,
    },
}

impl Widths {
    /// (rear, front) widths along x.
    pub fn sigma_x_pair(&self) -> (f64, f64) {
        match *self {
            Widths::Symmetric { sigma_x, .. } => (sigma_x, sigma_x),
            Widths::Split {
                sigma_xl, sigma_xr, ..
            } => (sigma_xl, sigma_xr),
        }
    }

    pub fn sigma_y(&self) -> f64 {
        match *self {
            Widths::Symmetric { sigma_y, .. } | Widths::Split { sigma_y, .. } => sigma_y,
        }
    }

    pub fn sigma_z(&self) -> f64 {
        match *self {
            Widths::Symmetric { sigma_z, .. } | Widths::Split { sigma_z, .. } => sigma_z,
        }
    }

    fn named(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Widths::Symmetric {
                sigma_x,
                sigma_y,
                sigma_z,
            } => vec![("sigma_x", sigma_x), ("sigma_y", sigma_y), ("sigma_z", sigma_z)],
            Widths::Split {
                sigma_xl,
                sigma_xr,
                sigma_y,
                sigma_z,
            } => vec![
                ("sigma_xl", sigma_xl),
                ("sigma_xr", sigma_xr),
                ("sigma_y", sigma_y),
                ("sigma_z", sigma_z),
            ],
        }
    }
}

/// Peak source density. For the double ellipsoid, `a_left` and `a_right` are
/// the rear and front shares: the density on each side is `2 * a_side` times
/// the unit Gaussian shape, so `a_left = a_right = a0 / 2` with equal widths
/// is the symmetric ellipsoid of peak `a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitudes {
    Split { a_left: f64, a_right: f64 },
    Single { a0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub variant: SourceVariant,
    /// Dimensionless envelope `p(tau) = c0 + c1 tau + ...` in pulse-local
    /// time `tau = t - t_on`, multiplying the amplitudes.
    #[serde(default = "unit_power")]
    pub power_law: Vec<f64>,
    #[serde(default)]
    pub t_on: f64,
    /// Switch-off time; `null` in JSON means the source never switches off.
    #[serde(default = "infinity", with = "infinite_as_null")]
    pub t_off: f64,
    /// Source position (x_c, y_c, z_c) in the co-moving frame.
    pub center: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub widths: Option<Widths>,
    pub amplitudes: Amplitudes,
}

fn unit_power() -> Vec<f64> {
    vec![1.0]
}

fn infinity() -> f64 {
    f64::INFINITY
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() && *value > 0.0 {
            serializer.serialize_none()
        } else {
            serializer.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::INFINITY))
    }
}

impl SourceSpec {
    pub fn gaussian(center: [f64; 3], sigma: [f64; 3], a0: f64) -> Self {
        SourceSpec {
            variant: SourceVariant::GaussianEllipsoid,
            power_law: unit_power(),
            t_on: 0.0,
            t_off: f64::INFINITY,
            center,
            widths: Some(Widths::Symmetric {
                sigma_x: sigma[0],
                sigma_y: sigma[1],
                sigma_z: sigma[2],
            }),
            amplitudes: Amplitudes::Single { a0 },
        }
    }

    pub fn double_ellipsoid(
        center: [f64; 3],
        sigma_xl: f64,
        sigma_xr: f64,
        sigma_y: f64,
        sigma_z: f64,
        a_left: f64,
        a_right: f64,
    ) -> Self {
        SourceSpec {
            variant: SourceVariant::DoubleEllipsoid,
            power_law: unit_power(),
            t_on: 0.0,
            t_off: f64::INFINITY,
            center,
            widths: Some(Widths::Split {
                sigma_xl,
                sigma_xr,
                sigma_y,
                sigma_z,
            }),
            amplitudes: Amplitudes::Split { a_left, a_right },
        }
    }

    /// Point source of strength `a0` (temperature x volume per time).
    pub fn point(center: [f64; 3], a0: f64) -> Self {
        SourceSpec {
            variant: SourceVariant::PointOnOff,
            power_law: unit_power(),
            t_on: 0.0,
            t_off: f64::INFINITY,
            center,
            widths: None,
            amplitudes: Amplitudes::Single { a0 },
        }
    }

    pub fn switched(mut self, t_on: f64, t_off: f64) -> Self {
        self.t_on = t_on;
        self.t_off = t_off;
        self
    }

    pub fn with_power_law(mut self, coefficients: Vec<f64>) -> Self {
        self.power_law = coefficients;
        self
    }

    /// Overall amplitude attached once at assembly.
    pub fn amplitude(&self) -> f64 {
        match self.amplitudes {
            Amplitudes::Single { a0 } => a0,
            Amplitudes::Split { a_left, a_right } => a_left + a_right,
        }
    }

    /// Relative (rear, front) weights of the unit x-shape; both 1 for a
    /// symmetric source.
    pub fn side_weights(&self) -> (f64, f64) {
        match self.amplitudes {
            Amplitudes::Single { .. } => (1.0, 1.0),
            Amplitudes::Split { a_left, a_right } => {
                let total = a_left + a_right;
                if total == 0.0 {
                    (0.0, 0.0)
                } else {
                    (2.0 * a_left / total, 2.0 * a_right / total)
                }
            }
        }
    }

    pub fn widths_or_err(&self) -> Result<Widths, crate::Error> {
        self.widths
            .ok_or(crate::Error::Validation(vec![ValidationError::MissingField(
                "widths",
            )]))
    }

    /// Envelope p(t - t_on) inside the switch window, zero outside.
    pub fn envelope(&self, t: f64) -> f64 {
        if t < self.t_on || t > self.t_off {
            return 0.0;
        }
        self.power(t - self.t_on)
    }

    /// Power polynomial in pulse-local time, ignoring the switch window.
    pub fn power(&self, tau: f64) -> f64 {
        self.power_law.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn is_constant_power(&self) -> bool {
        self.power_law.iter().skip(1).all(|c| *c == 0.0)
    }

    pub fn validate(&self, model: &SlabModel) -> Vec<ValidationError> {
        let mut errors = Vec::new();
        if self.power_law.len() > MAX_POWER_DEGREE + 1 {
            errors.push(ValidationError::UnsupportedPower(self.power_law.len() - 1));
        }
        if self.power_law.iter().any(|c| !c.is_finite()) {
            errors.push(ValidationError::NonFinite { field: "power_law" });
        }
        if !self.t_on.is_finite() {
            errors.push(ValidationError::NonFinite { field: "t_on" });
        }
        if self.t_off.is_nan() {
            errors.push(ValidationError::NonFinite { field: "t_off" });
        }
        if self.t_on > self.t_off {
            errors.push(ValidationError::SwitchOrderViolation {
                t_on: self.t_on,
                t_off: self.t_off,
            });
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            errors.push(ValidationError::NonFinite { field: "center" });
        }
        let zc = self.center[2];
        if model.w > 0.0 && !(0.0..=model.w).contains(&zc) {
            errors.push(ValidationError::CenterOutsideSlab { z: zc, w: model.w });
        }
        match self.amplitudes {
            Amplitudes::Single { a0 } if !a0.is_finite() => {
                errors.push(ValidationError::NonFinite { field: "a0" })
            }
            Amplitudes::Split { a_left, a_right } if !(a_left + a_right).is_finite() => {
                errors.push(ValidationError::NonFinite {
                    field: "a_left/a_right",
                })
            }
            _ => {}
        }
        if self.variant != SourceVariant::PointOnOff {
            match &self.widths {
                None => errors.push(ValidationError::MissingField("widths")),
                Some(widths) => {
                    for (field, value) in widths.named() {
                        if !(value > 0.0) || !value.is_finite() {
                            errors.push(ValidationError::NonPositiveWidth { field, value });
                        }
                    }
                }
            }
        }
        errors
    }

    /// Rewrites a symmetric double ellipsoid as the equivalent Gaussian
    /// ellipsoid; every other source is returned unchanged.
    pub fn canonical(&self) -> SourceSpec {
        if self.variant != SourceVariant::DoubleEllipsoid {
            return self.clone();
        }
        let (Some(widths), Amplitudes::Split { a_left, a_right }) = (self.widths, self.amplitudes)
        else {
            return self.clone();
        };
        let (sl, sr) = widths.sigma_x_pair();
        if sl != sr || a_left != a_right {
            return self.clone();
        }
        SourceSpec {
            variant: SourceVariant::GaussianEllipsoid,
            widths: Some(Widths::Symmetric {
                sigma_x: sl,
                sigma_y: widths.sigma_y(),
                sigma_z: widths.sigma_z(),
            }),
            amplitudes: Amplitudes::Single {
                a0: a_left + a_right,
            },
            ..self.clone()
        }
    }
}

/// Checks a model and source together and returns the normalized pair, or
/// every violated invariant.
pub fn validate(
    model: &SlabModel,
    source: &SourceSpec,
) -> Result<(SlabModel, SourceSpec), Vec<ValidationError>> {
    let mut errors = model.validate();
    errors.extend(source.validate(model));
    if errors.is_empty() {
        Ok((*model, source.canonical()))
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    CoMoving,
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRequest {
    pub points: Vec<[f64; 3]>,
    pub times: Vec<f64>,
    #[serde(default)]
    pub frame: Frame,
}

impl FieldRequest {
    pub fn new(points: Vec<[f64; 3]>, times: Vec<f64>) -> Self {
        FieldRequest {
            points,
            times,
            frame: Frame::CoMoving,
        }
    }

    pub fn in_lab_frame(mut self) -> Self {
        self.frame = Frame::Lab;
        self
    }

    pub fn validate(&self, model: &SlabModel) -> Vec<ValidationError> {
        let mut errors = Vec::new();
        for p in &self.points {
            if p.iter().any(|c| !c.is_finite()) {
                errors.push(ValidationError::NonFinite { field: "points" });
            } else if !(0.0..=model.w).contains(&p[2]) {
                errors.push(ValidationError::PointOutsideSlab { z: p[2], w: model.w });
            }
        }
        for &t in &self.times {
            if !t.is_finite() {
                errors.push(ValidationError::NonFinite { field: "times" });
            } else if t < 0.0 {
                errors.push(ValidationError::NegativeTime(t));
            }
        }
        errors
    }

    /// Co-moving coordinates of point `p` at time `t`.
    pub fn co_moving(&self, model: &SlabModel, p: [f64; 3], t: f64) -> [f64; 3] {
        match self.frame {
            Frame::CoMoving => p,
            Frame::Lab => [p[0] - model.v * t, p[1], p[2]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    AnalyticalSeries,
    FiniteDifference,
    InverseLaplace,
}

/// Per-sample warnings. None of them is fatal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SampleFlags {
    /// Estimated series tail above 1e-8 of the partial sum.
    pub truncation: bool,
    /// Time quadrature missed its tolerance.
    pub quadrature: bool,
}

impl SampleFlags {
    pub fn any(&self) -> bool {
        self.truncation || self.quadrature
    }

    pub fn merge(self, other: SampleFlags) -> SampleFlags {
        SampleFlags {
            truncation: self.truncation || other.truncation,
            quadrature: self.quadrature || other.quadrature,
        }
    }

    /// Compact label for CSV output: `ok`, `truncation`, `quadrature` or
    /// `truncation|quadrature`.
    pub fn label(&self) -> &'static str {
        match (self.truncation, self.quadrature) {
            (false, false) => "ok",
            (true, false) => "truncation",
            (false, true) => "quadrature",
            (true, true) => "truncation|quadrature",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureField {
    pub request: FieldRequest,
    /// `values[i][j]` is the temperature at `request.times[i]`, `request.points[j]`.
    pub values: Vec<Vec<f64>>,
    pub flags: Vec<Vec<SampleFlags>>,
    pub provenance: Solver,
    pub truncation: usize,
}

impl TemperatureField {
    pub fn value(&self, time_index: usize, point_index: usize) -> f64 {
        self.values[time_index][point_index]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().flatten().filter(|f| f.any()).count()
    }
}
