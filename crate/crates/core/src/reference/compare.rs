//! Discrepancy between the analytical field and a mesh solution.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::KernelEval;
use crate::model::{FieldRequest, Frame, SourceSpec, SourceVariant, TemperatureField};
use crate::profile::{temperature, temperature_grid, QuadraturePlan};
use crate::reference::fd::FdResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    /// max |T_a − T_fd| over the window, divided by max |T_a|.
    pub linf_rel: f64,
    /// ‖T_a − T_fd‖₂ / ‖T_a‖₂ over the sampled nodes.
    pub l2_rel: f64,
    pub max_abs_error: f64,
    pub mean_abs_error: f64,
    pub peak: f64,
    pub samples: usize,
}

impl Discrepancy {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Discrepancy {
        let mut peak: f64 = 0.0;
        let mut max_err: f64 = 0.0;
        let mut sum_err = 0.0;
        let mut sq_err = 0.0;
        let mut sq_ref = 0.0;
        let mut n = 0;
        for (reference, other) in pairs {
            let d = (reference - other).abs();
            peak = peak.max(reference.abs());
            max_err = max_err.max(d);
            sum_err += d;
            sq_err += d * d;
            sq_ref += reference * reference;
            n += 1;
        }
        let rel = |num: f64, den: f64| if den > 0.0 { num / den } else if num == 0.0 { 0.0 } else { f64::INFINITY };
        Discrepancy {
            linf_rel: rel(max_err, peak),
            l2_rel: rel(sq_err.sqrt(), sq_ref.sqrt()),
            max_abs_error: max_err,
            mean_abs_error: if n > 0 { sum_err / n as f64 } else { 0.0 },
            peak,
            samples: n,
        }
    }
}

/// Mesh nodes kept for comparison: every `stride`-th node in x and y and
/// every node in z, excluding the lateral edges.
pub fn comparison_points(fd: &FdResult, stride: usize) -> Vec<(usize, usize, usize, [f64; 3])> {
    let stride = stride.max(1);
    let mut out = Vec::new();
    let (nx, ny) = (fd.xs.len(), fd.ys.len());
    // Keep the centre line on the sampled set.
    let first = |n: usize| ((n - 1) / 2) % stride;
    for i in (first(nx)..nx).step_by(stride) {
        for j in (first(ny)..ny).step_by(stride) {
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                continue;
            }
            for (k, &z) in fd.zs.iter().enumerate() {
                out.push((i, j, k, [fd.xs[i], fd.ys[j], z]));
            }
        }
    }
    out
}

/// Analytical field on the sampled mesh nodes at the mesh snapshot times.
pub fn analytical_on_mesh(
    kernel: &KernelEval,
    source: &SourceSpec,
    fd: &FdResult,
    stride: usize,
    plan: &QuadraturePlan,
) -> Result<(Vec<(usize, usize, usize, [f64; 3])>, TemperatureField)> {
    let nodes = comparison_points(fd, stride);
    let mut request = FieldRequest::new(nodes.iter().map(|n| n.3).collect(), fd.times.clone());
    request.frame = fd.config.frame;
    let field = temperature(kernel, source, &request, plan)?;
    Ok((nodes, field))
}

/// Analytical versus mesh over every snapshot and sampled node.
pub fn compare_with_fd(
    kernel: &KernelEval,
    source: &SourceSpec,
    fd: &FdResult,
    stride: usize,
    plan: &QuadraturePlan,
) -> Result<Discrepancy> {
    let nodes = comparison_points(fd, stride);
    let pairs: Vec<(f64, f64)> = if fd.config.frame == Frame::CoMoving
        && source.variant != SourceVariant::PointOnOff
    {
        let keep = |axis: &[f64], idx: &mut Vec<usize>| {
            idx.sort_unstable();
            idx.dedup();
            idx.iter().map(|&i| axis[i]).collect::<Vec<_>>()
        };
        let mut ii: Vec<usize> = nodes.iter().map(|n| n.0).collect();
        let mut jj: Vec<usize> = nodes.iter().map(|n| n.1).collect();
        let xs = keep(&fd.xs, &mut ii);
        let ys = keep(&fd.ys, &mut jj);
        let grid = temperature_grid(kernel, source, &xs, &ys, &fd.zs, &fd.times, plan)?;
        let mut out = Vec::with_capacity(fd.times.len() * ii.len() * jj.len() * fd.zs.len());
        for ti in 0..fd.times.len() {
            for (a, &i) in ii.iter().enumerate() {
                for (b, &j) in jj.iter().enumerate() {
                    for k in 0..fd.zs.len() {
                        out.push((grid.value(ti, a, b, k), fd.value(ti, i, j, k)));
                    }
                }
            }
        }
        out
    } else {
        let (nodes, field) = analytical_on_mesh(kernel, source, fd, stride, plan)?;
        (0..fd.times.len())
            .flat_map(|ti| {
                let field = &field;
                nodes
                    .iter()
                    .enumerate()
                    .map(move |(pi, &(i, j, k, _))| (field.value(ti, pi), fd.value(ti, i, j, k)))
            })
            .collect()
    };
    Ok(Discrepancy::from_pairs(pairs))
}
