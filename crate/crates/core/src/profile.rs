//! Temperature fields: time convolution of the per-axis factors with the
//! source envelope.
//!
//! `T(t,p) = A·∫ p(t'−t_on)·T_x(t̄)·T_y(t̄)·T_z(t̄) dt'` over the part of
//! [t_on, t_off] before t, with t̄ = t − t'. The integral is taken in
//! u = √t̄, which removes the t̄^(-1/2) behaviour of each factor near the
//! upper end.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelEval;
use crate::model::{
    validate, FieldRequest, Frame, SampleFlags, Solver, SourceSpec, SourceVariant,
    TemperatureField,
};
use crate::quadrature::{integrate, Tolerance};
use crate::sources::{point_factors, tx_factor, ty_gaussian, tz_series, SeriesCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePlan {
    /// Absolute tolerance as a fraction of the largest |T| in the field.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadraturePlan {
    fn default() -> Self {
        QuadraturePlan {
            abs_tol: 1e-9,
            rel_tol: 1e-6,
            max_panels: 400,
        }
    }
}

impl QuadraturePlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_panels >= 1) {
            return Err(Error::InvalidRequest(format!(
                "quadrature tolerances must be positive and panels ≥ 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

enum Prepared {
    Distributed(SeriesCoefficients),
    Point,
}

/// Source bound to a kernel, ready for repeated sampling.
pub struct Integrand<'a> {
    kernel: &'a KernelEval,
    source: SourceSpec,
    prepared: Prepared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub error: f64,
    pub flags: SampleFlags,
}

impl<'a> Integrand<'a> {
    pub fn new(kernel: &'a KernelEval, source: &SourceSpec) -> Result<Self> {
        let (_, source) = validate(&kernel.model, source)?;
        let prepared = match source.variant {
            SourceVariant::PointOnOff => Prepared::Point,
            _ => Prepared::Distributed(SeriesCoefficients::new(kernel, &source)?),
        };
        Ok(Integrand {
            kernel,
            source,
            prepared,
        })
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }

    /// Product of the three unit factors at lag t̄ for a co-moving point.
    pub fn factors(&self, tbar: f64, p: [f64; 3]) -> Result<(f64, bool)> {
        if tbar <= 0.0 {
            return Ok((0.0, false));
        }
        let m = &self.kernel.model;
        match &self.prepared {
            Prepared::Point => {
                let (gx, gy, gz) = point_factors(self.kernel, &self.source, tbar, p);
                Ok((gx * gy * gz.value, gz.truncated))
            }
            Prepared::Distributed(coeffs) => {
                let tx = tx_factor(m, &self.source, tbar, p[0])?;
                let ty = ty_gaussian(m, &self.source, tbar, p[1])?;
                if tx == 0.0 || ty == 0.0 {
                    return Ok((0.0, false));
                }
                let tz = tz_series(self.kernel, coeffs, tbar, p[2]);
                Ok((tx * ty * tz.value, tz.truncated))
            }
        }
    }

    /// Temperature at co-moving point `p` and time `t`.
    pub fn sample(&self, t: f64, p: [f64; 3], tol: Tolerance) -> Sample {
        let src = &self.source;
        let amplitude = src.amplitude();
        let lag_hi = t - src.t_on;
        let lag_lo = (t - src.t_off).max(0.0);
        if lag_hi <= 0.0 || lag_hi <= lag_lo || amplitude == 0.0 {
            return Sample {
                value: 0.0,
                error: 0.0,
                flags: SampleFlags::default(),
            };
        }
        let mut truncated = false;
        let mut f = |u: f64| {
            let tbar = u * u;
            let power = src.power(lag_hi - tbar);
            if power == 0.0 {
                return 0.0;
            }
            match self.factors(tbar, p) {
                Ok((v, tr)) => {
                    truncated |= tr && v != 0.0;
                    2.0 * u * power * v
                }
                Err(_) => f64::NAN,
            }
        };
        let (u_lo, u_hi) = (lag_lo.sqrt(), lag_hi.sqrt());
        let mut cuts = vec![u_lo, u_hi];
        let k = self.kernel;
        if k.short_time {
            let switch = (k.tau_star * k.model.w * k.model.w / k.model.alpha).sqrt();
            if switch > u_lo && switch < u_hi {
                cuts.insert(1, switch);
            }
        }
        let mut value = 0.0;
        let mut error = 0.0;
        let mut converged = true;
        for pair in cuts.windows(2) {
            let est = integrate(&mut f, pair[0], pair[1], tol);
            value += est.value;
            error += est.error;
            converged &= est.converged;
        }
        Sample {
            value: amplitude * value,
            error: amplitude.abs() * error,
            flags: SampleFlags {
                truncation: truncated,
                quadrature: !converged || !value.is_finite(),
            },
        }
    }
}

/// Samples the field on `request` (co-moving or lab coordinates according
/// to `request.frame`).
pub fn temperature(
    kernel: &KernelEval,
    source: &SourceSpec,
    request: &FieldRequest,
    plan: &QuadraturePlan,
) -> Result<TemperatureField> {
    plan.validate()?;
    let errors = request.validate(&kernel.model);
    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    let integrand = Integrand::new(kernel, source)?;
    let jobs: Vec<(usize, usize)> = (0..request.times.len())
        .flat_map(|i| (0..request.points.len()).map(move |j| (i, j)))
        .collect();
    let run = |tol: Tolerance| -> Vec<Sample> {
        jobs.par_iter()
            .map(|&(i, j)| {
                let t = request.times[i];
                let p = request.co_moving(&kernel.model, request.points[j], t);
                integrand.sample(t, p, tol)
            })
            .collect()
    };
    // A loose pass fixes the field scale for the absolute tolerance.
    let coarse = run(Tolerance {
        abs: 1e-300,
        rel: 1e-3,
        max_intervals: 50,
    });
    let scale = coarse.iter().fold(0.0_f64, |m, s| m.max(s.value.abs()));
    let amp = integrand.source().amplitude().abs().max(f64::MIN_POSITIVE);
    let abs_floor = plan.abs_tol * scale;
    let samples = if scale == 0.0 {
        coarse
    } else {
        run(Tolerance {
            abs: abs_floor / amp,
            rel: plan.rel_tol,
            max_intervals: plan.max_panels,
        })
    };
    let n_points = request.points.len();
    let mut values = vec![Vec::with_capacity(n_points); request.times.len()];
    let mut flags = vec![Vec::with_capacity(n_points); request.times.len()];
    for (&(i, _), s) in jobs.iter().zip(&samples) {
        if !s.value.is_finite() {
            return Err(Error::NonConvergence {
                method: "time quadrature",
                detail: format!("non-finite sample at t = {}", request.times[i]),
            });
        }
        let accepted = s.error <= (plan.rel_tol * s.value.abs()).max(abs_floor);
        values[i].push(s.value);
        flags[i].push(SampleFlags {
            truncation: s.flags.truncation,
            quadrature: s.flags.quadrature && !accepted,
        });
    }
    Ok(TemperatureField {
        request: request.clone(),
        values,
        flags,
        provenance: Solver::AnalyticalSeries,
        truncation: kernel.truncation,
    })
}

/// Same as `temperature`, reading request points as lab coordinates.
pub fn temperature_lab_frame(
    kernel: &KernelEval,
    source: &SourceSpec,
    request: &FieldRequest,
    plan: &QuadraturePlan,
) -> Result<TemperatureField> {
    let mut lab = request.clone();
    lab.frame = Frame::Lab;
    temperature(kernel, source, &lab, plan)
}

/// Field on a tensor grid of co-moving coordinates, stored per time with
/// index `(i·ny + j)·nz + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Panels per lag segment used at each time.
    pub panels: Vec<usize>,
    /// Whether panel doubling met the tolerance at each time.
    pub converged: Vec<bool>,
    pub truncated: bool,
}

impl GridField {
    pub fn value(&self, time_index: usize, i: usize, j: usize, k: usize) -> f64 {
        self.values[time_index][(i * self.ys.len() + j) * self.zs.len() + k]
    }
}

const GRID_RULE: usize = 16;

/// Same field as `temperature` on a tensor grid of a distributed source.
///
/// The factors separate, so each lag node costs one evaluation per axis
/// coordinate. The lag integral uses composite Gauss–Legendre in u = √t̄,
/// doubling the panel count until two successive sums agree to the plan.
pub fn temperature_grid(
    kernel: &KernelEval,
    source: &SourceSpec,
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    times: &[f64],
    plan: &QuadraturePlan,
) -> Result<GridField> {
    plan.validate()?;
    let model = &kernel.model;
    if let Some(&z) = zs.iter().find(|z| !(**z >= 0.0 && **z <= model.w)) {
        return Err(Error::Validation(vec![crate::ValidationError::PointOutsideSlab {
            z,
            w: model.w,
        }]));
    }
    if let Some(&t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Validation(vec![crate::ValidationError::NegativeTime(t)]));
    }
    let (_, src) = validate(model, source)?;
    if src.variant == SourceVariant::PointOnOff {
        return Err(Error::WrongSourceVariant {
            expected: "distributed",
        });
    }
    let coeffs = SeriesCoefficients::new(kernel, &src)?;
    let rule = crate::quadrature::gauss_legendre(GRID_RULE);
    let amplitude = src.amplitude();
    let (nx, ny, nz) = (xs.len(), ys.len(), zs.len());
    let size = nx * ny * nz;
    let mut truncated = false;

    // Σ over one set of lag nodes, accumulated into `out`.
    let accumulate = |nodes: &[(f64, f64)], out: &mut [f64], truncated: &mut bool| -> Result<()> {
        let parts: Vec<Result<(Vec<f64>, bool)>> = nodes
            .par_iter()
            .map(|&(tbar, weight)| {
                let tx: Vec<f64> = xs
                    .iter()
                    .map(|&x| tx_factor(model, &src, tbar, x).map(|v| v * weight))
                    .collect::<Result<_>>()?;
                let ty: Vec<f64> = ys
                    .iter()
                    .map(|&y| ty_gaussian(model, &src, tbar, y))
                    .collect::<Result<_>>()?;
                let mut trunc = false;
                let tz: Vec<f64> = zs
                    .iter()
                    .map(|&z| {
                        let f = tz_series(kernel, &coeffs, tbar, z);
                        trunc |= f.truncated;
                        f.value
                    })
                    .collect();
                let mut part = vec![0.0; size];
                for i in 0..nx {
                    if tx[i] == 0.0 {
                        continue;
                    }
                    for j in 0..ny {
                        let b = tx[i] * ty[j];
                        if b == 0.0 {
                            continue;
                        }
                        let row = &mut part[(i * ny + j) * nz..(i * ny + j + 1) * nz];
                        row.iter_mut().zip(&tz).for_each(|(o, z)| *o = b * z);
                    }
                }
                Ok((part, trunc))
            })
            .collect();
        for p in parts {
            let (part, trunc) = p?;
            *truncated |= trunc;
            out.iter_mut().zip(&part).for_each(|(o, v)| *o += v);
        }
        Ok(())
    };

    let lag_nodes = |t: f64, panels: usize| -> Vec<(f64, f64)> {
        let lag_hi = t - src.t_on;
        let lag_lo = (t - src.t_off).max(0.0);
        if lag_hi <= 0.0 || lag_hi <= lag_lo {
            return Vec::new();
        }
        let (u_lo, u_hi) = (lag_lo.sqrt(), lag_hi.sqrt());
        let mut cuts = vec![u_lo, u_hi];
        if kernel.short_time {
            let switch = (kernel.tau_star * model.w * model.w / model.alpha).sqrt();
            if switch > u_lo && switch < u_hi {
                cuts.insert(1, switch);
            }
        }
        let mut nodes = Vec::new();
        for seg in cuts.windows(2) {
            let h = (seg[1] - seg[0]) / panels as f64;
            for p in 0..panels {
                let a = seg[0] + p as f64 * h;
                for (x, w) in rule.0.iter().zip(&rule.1) {
                    let u = a + 0.5 * h * (x + 1.0);
                    let tbar = u * u;
                    let power = src.power(lag_hi - tbar);
                    if power != 0.0 {
                        nodes.push((tbar, 0.5 * h * w * 2.0 * u * power * amplitude));
                    }
                }
            }
        }
        nodes
    };

    let mut values = Vec::with_capacity(times.len());
    let mut panels_used = Vec::with_capacity(times.len());
    let mut converged = Vec::with_capacity(times.len());
    for &t in times {
        let mut panels = 2;
        let mut current = vec![0.0; size];
        accumulate(&lag_nodes(t, panels), &mut current, &mut truncated)?;
        let mut ok = false;
        while 2 * panels <= plan.max_panels.max(2) {
            let mut refined = vec![0.0; size];
            accumulate(&lag_nodes(t, 2 * panels), &mut refined, &mut truncated)?;
            panels *= 2;
            let peak = refined.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let done = refined
                .iter()
                .zip(&current)
                .all(|(a, b)| (a - b).abs() <= plan.abs_tol * peak + plan.rel_tol * a.abs());
            current = refined;
            if done {
                ok = true;
                break;
            }
        }
        if current.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence {
                method: "grid lag quadrature",
                detail: format!("non-finite value at t = {t}"),
            });
        }
        values.push(current);
        panels_used.push(panels);
        converged.push(ok);
    }
    Ok(GridField {
        xs: xs.to_vec(),
        ys: ys.to_vec(),
        zs: zs.to_vec(),
        times: times.to_vec(),
        values,
        panels: panels_used,
        converged,
        truncated,
    })
}
