//! Finite-difference reference solver for the co-moving heat equation
//! `T_t = α∇²T + v·T_x + S` on a box `[-Lx, Lx] × [-Ly, Ly] × [0, w]`.
//!
//! The slab faces use second-order ghost nodes for the Robin condition; the
//! lateral edges are held at zero. Time stepping is Strang splitting:
//! Crank–Nicolson half steps in z around a Heun step for the lateral
//! diffusion, advection and source. The fully explicit scheme treats z the
//! same way as x and y.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Frame, SlabModel, SourceSpec, SourceVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Explicit,
    SemiImplicitZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Advection {
    Upwind,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Half-widths of the lateral box.
    pub lx: f64,
    pub ly: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub advection: Advection,
    #[serde(default)]
    pub frame: Frame,
}

/// Ratio of edge temperature to peak above which the box is too small.
pub const EDGE_TOLERANCE: f64 = 1e-4;

impl FdConfig {
    /// Box sized by `5·√(σ² + 2α·t_end) + |v|·t_end` with the requested
    /// spacings, and 0.9 of the largest stable step for the scheme.
    pub fn for_run(
        model: &SlabModel,
        source: &SourceSpec,
        t_end: f64,
        dx: f64,
        dz: f64,
        scheme: Scheme,
    ) -> FdConfig {
        let (sx, sy) = match source.widths {
            Some(w) => {
                let (l, r) = w.sigma_x_pair();
                (l.max(r), w.sigma_y())
            }
            None => (0.0, 0.0),
        };
        let spread = |s: f64| 5.0 * (s * s + 2.0 * model.alpha * t_end).sqrt();
        let drift = model.v.abs() * t_end;
        let lx = spread(sx) + drift + source.center[0].abs();
        let ly = spread(sy) + source.center[1].abs();
        let nx = 2 * (lx / dx).ceil() as usize + 1;
        let ny = 2 * (ly / dx).ceil() as usize + 1;
        let nz = (model.w / dz).round().max(2.0) as usize + 1;
        let mut config = FdConfig {
            nx,
            ny,
            nz,
            lx: (nx - 1) as f64 / 2.0 * dx,
            ly: (ny - 1) as f64 / 2.0 * dx,
            dt: 0.0,
            scheme,
            advection: Advection::Central,
            frame: Frame::CoMoving,
        };
        config.dt = 0.9 * config.max_stable_dt(model);
        config
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.lx / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.ly / (self.ny - 1) as f64
    }

    pub fn dz(&self, model: &SlabModel) -> f64 {
        model.w / (self.nz - 1) as f64
    }

    fn explicit_sum(&self, model: &SlabModel) -> f64 {
        let mut s = 1.0 / self.dx().powi(2) + 1.0 / self.dy().powi(2);
        if self.scheme == Scheme::Explicit {
            let dz = self.dz(model);
            // Robin rows are stiffer by 1 + h·dz.
            let h = model.h1.max(model.h2);
            s += (1.0 + h * dz) / (dz * dz);
        }
        s
    }

    /// Diffusion number `α·dt·Σ 1/dᵢ²` over the explicitly treated axes.
    pub fn stability_number(&self, model: &SlabModel) -> f64 {
        model.alpha * self.dt * self.explicit_sum(model)
    }

    pub fn max_stable_dt(&self, model: &SlabModel) -> f64 {
        let diffusive = 0.5 / (model.alpha * self.explicit_sum(model));
        if model.v == 0.0 || self.frame == Frame::Lab {
            diffusive
        } else {
            diffusive.min(self.dx() / model.v.abs())
        }
    }

    pub fn validate(&self, model: &SlabModel) -> Result<()> {
        if self.nx < 3 || self.ny < 3 || self.nz < 3 {
            return Err(Error::InvalidRequest("mesh needs at least 3 nodes per axis".into()));
        }
        if !(self.lx > 0.0 && self.ly > 0.0 && self.dt > 0.0) {
            return Err(Error::InvalidRequest("mesh extents and dt must be positive".into()));
        }
        let number = self.stability_number(model);
        if number > 0.5 {
            return Err(Error::StabilityViolation { number, limit: 0.5 });
        }
        if self.frame == Frame::CoMoving {
            let courant = model.v.abs() * self.dt / self.dx();
            if courant > 1.0 {
                return Err(Error::StabilityViolation {
                    number: courant,
                    limit: 1.0,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdResult {
    pub config: FdConfig,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub zs: Vec<f64>,
    pub times: Vec<f64>,
    /// One full mesh per requested time, index `(i·ny + j)·nz + k`.
    pub snapshots: Vec<Vec<f64>>,
    pub steps: usize,
}

impl FdResult {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ys.len() + j) * self.zs.len() + k
    }

    pub fn value(&self, time_index: usize, i: usize, j: usize, k: usize) -> f64 {
        self.snapshots[time_index][self.index(i, j, k)]
    }

    /// Trilinear interpolation inside the mesh; zero outside the lateral box.
    pub fn interpolate(&self, time_index: usize, p: [f64; 3]) -> f64 {
        let locate = |axis: &[f64], x: f64| -> Option<(usize, f64)> {
            let h = axis[1] - axis[0];
            let s = (x - axis[0]) / h;
            if s < 0.0 || s > (axis.len() - 1) as f64 {
                return None;
            }
            let i = (s.floor() as usize).min(axis.len() - 2);
            Some((i, s - i as f64))
        };
        let (Some((i, fx)), Some((j, fy)), Some((k, fz))) = (
            locate(&self.xs, p[0]),
            locate(&self.ys, p[1]),
            locate(&self.zs, p[2]),
        ) else {
            return 0.0;
        };
        let mut acc = 0.0;
        for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
            for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                    acc += wx * wy * wz * self.value(time_index, i + di, j + dj, k + dk);
                }
            }
        }
        acc
    }

    /// Trapezoid-weighted heat content of a snapshot.
    pub fn total_heat(&self, time_index: usize) -> f64 {
        let (dx, dy, dz) = (
            self.xs[1] - self.xs[0],
            self.ys[1] - self.ys[0],
            self.zs[1] - self.zs[0],
        );
        let nz = self.zs.len();
        self.snapshots[time_index]
            .chunks(nz)
            .map(|col| {
                col.iter()
                    .enumerate()
                    .map(|(k, v)| if k == 0 || k == nz - 1 { 0.5 * v } else { *v })
                    .sum::<f64>()
            })
            .sum::<f64>()
            * dx
            * dy
            * dz
    }

    /// Largest |T| one node inside the lateral edges, relative to the peak.
    pub fn edge_ratio(&self, time_index: usize) -> f64 {
        let snap = &self.snapshots[time_index];
        let peak = snap.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        let (nx, ny, nz) = (self.xs.len(), self.ys.len(), self.zs.len());
        let mut edge: f64 = 0.0;
        for i in 1..nx - 1 {
            for j in 1..ny - 1 {
                if i == 1 || i == nx - 2 || j == 1 || j == ny - 2 {
                    for k in 0..nz {
                        edge = edge.max(snap[(i * ny + j) * nz + k].abs());
                    }
                }
            }
        }
        edge / peak
    }
}

/// Source term on the mesh at time t, written into `out`.
pub type Forcing<'a> = dyn Fn(f64, &mut [f64]) + Sync + 'a;

struct Mesh {
    nx: usize,
    ny: usize,
    nz: usize,
    dx: f64,
    dy: f64,
    dz: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    zs: Vec<f64>,
}

impl Mesh {
    fn new(model: &SlabModel, c: &FdConfig) -> Mesh {
        let axis = |n: usize, l: f64| -> Vec<f64> {
            (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect()
        };
        let zs = (0..c.nz)
            .map(|k| model.w * k as f64 / (c.nz - 1) as f64)
            .collect();
        Mesh {
            nx: c.nx,
            ny: c.ny,
            nz: c.nz,
            dx: c.dx(),
            dy: c.dy(),
            dz: c.dz(model),
            xs: axis(c.nx, c.lx),
            ys: axis(c.ny, c.ly),
            zs,
        }
    }

    fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }
}

/// Second difference in z with Robin ghost nodes, for column `col`.
fn z_laplacian(col: &[f64], k: usize, dz: f64, h1: f64, h2: f64) -> f64 {
    let n = col.len();
    let d2 = dz * dz;
    if k == 0 {
        (2.0 * col[1] - 2.0 * col[0] - 2.0 * dz * h1 * col[0]) / d2
    } else if k == n - 1 {
        (2.0 * col[n - 2] - 2.0 * col[n - 1] - 2.0 * dz * h2 * col[n - 1]) / d2
    } else {
        (col[k + 1] - 2.0 * col[k] + col[k - 1]) / d2
    }
}

/// Crank–Nicolson factorisation of `I − θ·α·dt·Lz` for one column.
struct ZSolver {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    r: f64,
    h1: f64,
    h2: f64,
    dz: f64,
}

impl ZSolver {
    fn new(model: &SlabModel, nz: usize, dz: f64, step: f64) -> ZSolver {
        let r = 0.5 * model.alpha * step / (dz * dz);
        let mut lower = vec![-r; nz];
        let mut diag = vec![1.0 + 2.0 * r; nz];
        let mut upper = vec![-r; nz];
        diag[0] += 2.0 * r * dz * model.h1;
        upper[0] = -2.0 * r;
        diag[nz - 1] += 2.0 * r * dz * model.h2;
        lower[nz - 1] = -2.0 * r;
        // Forward elimination once; store the modified coefficients.
        for k in 1..nz {
            let m = lower[k] / diag[k - 1];
            diag[k] -= m * upper[k - 1];
            lower[k] = m;
        }
        ZSolver {
            lower,
            diag,
            upper,
            r,
            h1: model.h1,
            h2: model.h2,
            dz,
        }
    }

    fn apply(&self, col: &mut [f64], scratch: &mut [f64]) {
        let n = col.len();
        // Right-hand side (I + ½αΔt·Lz) T.
        for k in 0..n {
            scratch[k] = col[k] + self.r * self.dz * self.dz * z_laplacian(col, k, self.dz, self.h1, self.h2);
        }
        for k in 1..n {
            scratch[k] -= self.lower[k] * scratch[k - 1];
        }
        col[n - 1] = scratch[n - 1] / self.diag[n - 1];
        for k in (0..n - 1).rev() {
            col[k] = (scratch[k] - self.upper[k] * col[k + 1]) / self.diag[k];
        }
    }
}

struct Stepper<'a> {
    model: SlabModel,
    config: FdConfig,
    mesh: &'a Mesh,
    forcing: &'a Forcing<'a>,
    advection_speed: f64,
}

impl Stepper<'_> {
    /// Explicit part of the right-hand side.
    fn rhs(&self, t: &[f64], time: f64, out: &mut [f64], source: &mut [f64]) {
        (self.forcing)(time, source);
        let m = self.mesh;
        let (nx, ny, nz) = (m.nx, m.ny, m.nz);
        let a = self.model.alpha;
        let v = self.advection_speed;
        let explicit_z = self.config.scheme == Scheme::Explicit;
        let upwind = self.config.advection == Advection::Upwind;
        let (h1, h2) = (self.model.h1, self.model.h2);
        out.par_chunks_mut(ny * nz)
            .enumerate()
            .for_each(|(i, plane)| {
                if i == 0 || i == nx - 1 {
                    plane.iter_mut().for_each(|x| *x = 0.0);
                    return;
                }
                for j in 0..ny {
                    let row = &mut plane[j * nz..(j + 1) * nz];
                    if j == 0 || j == ny - 1 {
                        row.iter_mut().for_each(|x| *x = 0.0);
                        continue;
                    }
                    let c = (i * ny + j) * nz;
                    let col = &t[c..c + nz];
                    for k in 0..nz {
                        let here = t[c + k];
                        let xp = t[c + ny * nz + k];
                        let xm = t[c - ny * nz + k];
                        let yp = t[c + nz + k];
                        let ym = t[c - nz + k];
                        let mut d = a * ((xp - 2.0 * here + xm) / (m.dx * m.dx)
                            + (yp - 2.0 * here + ym) / (m.dy * m.dy));
                        if explicit_z {
                            d += a * z_laplacian(col, k, m.dz, h1, h2);
                        }
                        if v != 0.0 {
                            let grad = if !upwind {
                                (xp - xm) / (2.0 * m.dx)
                            } else if v > 0.0 {
                                (xp - here) / m.dx
                            } else {
                                (here - xm) / m.dx
                            };
                            d += v * grad;
                        }
                        row[k] = d + source[c + k];
                    }
                }
            });
    }
}

/// General driver: arbitrary forcing and initial state, snapshots at
/// `times` (sorted ascending). `events` are extra times the stepper lands
/// on exactly, such as switch instants.
pub fn fd_solve_forced(
    model: &SlabModel,
    config: &FdConfig,
    times: &[f64],
    events: &[f64],
    initial: Option<&(dyn Fn(f64, f64, f64) -> f64 + Sync)>,
    forcing: &Forcing<'_>,
) -> Result<FdResult> {
    let errors = model.validate();
    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    config.validate(model)?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| *t < 0.0) {
        return Err(Error::InvalidRequest("snapshot times must be sorted and ≥ 0".into()));
    }
    let mesh = Mesh::new(model, config);
    let n = mesh.len();
    let (ny, nz) = (mesh.ny, mesh.nz);
    let mut state = vec![0.0; n];
    if let Some(f) = initial {
        state.par_chunks_mut(ny * nz).enumerate().for_each(|(i, plane)| {
            for j in 0..ny {
                for k in 0..nz {
                    plane[j * nz + k] = f(mesh.xs[i], mesh.ys[j], mesh.zs[k]);
                }
            }
        });
    }
    let stepper = Stepper {
        model: *model,
        config: *config,
        mesh: &mesh,
        forcing,
        advection_speed: if config.frame == Frame::CoMoving { model.v } else { 0.0 },
    };
    let mut marks: Vec<f64> = times.iter().chain(events).copied().filter(|t| *t > 0.0).collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();

    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut source = vec![0.0; n];
    let mut solver_cache: Option<(f64, ZSolver)> = None;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut now = 0.0;
    let mut steps = 0;
    let mut next_time = 0;
    while next_time < times.len() && times[next_time] <= now {
        snapshots.push(state.clone());
        next_time += 1;
    }
    for &mark in &marks {
        while now < mark {
            let remaining = mark - now;
            let pieces = (remaining / config.dt).ceil().max(1.0);
            let dt = remaining / pieces;
            if config.scheme == Scheme::SemiImplicitZ {
                let refresh = match &solver_cache {
                    Some((h, _)) => (h - 0.5 * dt).abs() > 1e-14 * dt,
                    None => true,
                };
                if refresh {
                    solver_cache = Some((0.5 * dt, ZSolver::new(model, nz, mesh.dz, 0.5 * dt)));
                }
                let solver = &solver_cache.as_ref().expect("solver cached").1;
                state.par_chunks_mut(nz).for_each_init(
                    || vec![0.0; nz],
                    |scratch, col| solver.apply(col, scratch),
                );
            }
            // Sample the source just inside the step so switches that fall
            // on a step boundary act for whole steps.
            let inset = 1e-9 * dt;
            stepper.rhs(&state, now + inset, &mut k1, &mut source);
            trial
                .par_iter_mut()
                .zip(state.par_iter().zip(k1.par_iter()))
                .for_each(|(tr, (s, d))| *tr = s + dt * d);
            stepper.rhs(&trial, now + dt - inset, &mut k2, &mut source);
            state
                .par_iter_mut()
                .zip(k1.par_iter().zip(k2.par_iter()))
                .for_each(|(s, (a, b))| *s += 0.5 * dt * (a + b));
            if config.scheme == Scheme::SemiImplicitZ {
                let solver = &solver_cache.as_ref().expect("solver cached").1;
                state.par_chunks_mut(nz).for_each_init(
                    || vec![0.0; nz],
                    |scratch, col| solver.apply(col, scratch),
                );
            }
            now = if pieces <= 1.0 { mark } else { now + dt };
            steps += 1;
        }
        while next_time < times.len() && times[next_time] <= now + 1e-12 * now.max(1.0) {
            snapshots.push(state.clone());
            next_time += 1;
        }
    }
    Ok(FdResult {
        config: *config,
        xs: mesh.xs,
        ys: mesh.ys,
        zs: mesh.zs,
        times: times.to_vec(),
        snapshots,
        steps,
    })
}

/// Spatial density of a source spec on the mesh, before the envelope,
/// for a source centred at lateral offset `shift`.
fn source_shape(source: &SourceSpec, mesh: &Mesh, shift: f64, out: &mut [f64]) {
    let (ny, nz) = (mesh.ny, mesh.nz);
    let [xc, yc, zc] = source.center;
    let xc = xc + shift;
    match (source.variant, source.widths) {
        (SourceVariant::PointOnOff, _) | (_, None) => {
            out.iter_mut().for_each(|v| *v = 0.0);
            // Trilinear spreading of a unit mass onto the eight nearest nodes.
            let pos = |axis: &[f64], x: f64| {
                let h = axis[1] - axis[0];
                let s = ((x - axis[0]) / h).clamp(0.0, (axis.len() - 1) as f64 - 1e-12);
                let i = s.floor() as usize;
                (i, s - i as f64)
            };
            let (i, fx) = pos(&mesh.xs, xc);
            let (j, fy) = pos(&mesh.ys, yc);
            let (k, fz) = pos(&mesh.zs, zc);
            for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                    for (dk, wz) in [(0, 1.0 - fz), (1, fz)] {
                        let kk = k + dk;
                        let zw = if kk == 0 || kk == nz - 1 { 0.5 } else { 1.0 };
                        out[((i + di) * ny + j + dj) * nz + kk] +=
                            wx * wy * wz / (mesh.dx * mesh.dy * mesh.dz * zw);
                    }
                }
            }
        }
        (_, Some(widths)) => {
            let (sl, sr) = widths.sigma_x_pair();
            let (wl, wr) = source.side_weights();
            let (sy, sz) = (widths.sigma_y(), widths.sigma_z());
            out.par_chunks_mut(ny * nz).enumerate().for_each(|(i, plane)| {
                let dx = mesh.xs[i] - xc;
                let (s, w) = if dx >= 0.0 { (sr, wr) } else { (sl, wl) };
                let gx = w * (-dx * dx / (2.0 * s * s)).exp();
                for j in 0..ny {
                    let dy = mesh.ys[j] - yc;
                    let gy = gx * (-dy * dy / (2.0 * sy * sy)).exp();
                    for k in 0..nz {
                        let dz = mesh.zs[k] - zc;
                        plane[j * nz + k] = gy * (-dz * dz / (2.0 * sz * sz)).exp();
                    }
                }
            });
        }
    }
}

/// Mesh solution for a source spec from zero initial temperature.
pub fn fd_solve(
    model: &SlabModel,
    source: &SourceSpec,
    config: &FdConfig,
    times: &[f64],
) -> Result<FdResult> {
    let (model, source) = crate::model::validate(model, source)?;
    let mesh = Mesh::new(&model, config);
    let amplitude = source.amplitude();
    let mut events = vec![source.t_on];
    if source.t_off.is_finite() {
        events.push(source.t_off);
    }
    let lab = config.frame == Frame::Lab && model.v != 0.0;
    let mut fixed = vec![0.0; mesh.len()];
    if !lab {
        source_shape(&source, &mesh, 0.0, &mut fixed);
    }
    let forcing = |t: f64, out: &mut [f64]| {
        let env = if t >= source.t_on && t < source.t_off {
            amplitude * source.power(t - source.t_on)
        } else {
            0.0
        };
        if env == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
        } else if lab {
            source_shape(&source, &mesh, model.v * t, out);
            out.iter_mut().for_each(|v| *v *= env);
        } else {
            out.iter_mut().zip(&fixed).for_each(|(o, f)| *o = env * f);
        }
    };
    let result = fd_solve_forced(&model, config, times, &events, None, &forcing)?;
    for (ti, _) in times.iter().enumerate() {
        let ratio = result.edge_ratio(ti);
        if ratio > EDGE_TOLERANCE {
            return Err(Error::DomainTooSmall { ratio });
        }
    }
    Ok(result)
}

/// Crank–Nicolson solution of `T_t = αT_xx + vT_x` on [−L, L] with zero
/// ends, from `initial` at t0 to t1. Returns nodes and values.
pub fn fd_line(
    alpha: f64,
    v: f64,
    half_width: f64,
    nodes: usize,
    steps: usize,
    t0: f64,
    t1: f64,
    initial: impl Fn(f64) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let dx = 2.0 * half_width / (nodes - 1) as f64;
    let xs: Vec<f64> = (0..nodes).map(|i| -half_width + i as f64 * dx).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| initial(x)).collect();
    u[0] = 0.0;
    u[nodes - 1] = 0.0;
    let dt = (t1 - t0) / steps as f64;
    // Operator L u_i = α(u_{i+1} − 2u_i + u_{i−1})/dx² + v(u_{i+1} − u_{i−1})/(2dx)
    let lo = alpha / (dx * dx) - v / (2.0 * dx);
    let di = -2.0 * alpha / (dx * dx);
    let up = alpha / (dx * dx) + v / (2.0 * dx);
    let m = nodes - 2;
    let a = vec![-0.5 * dt * lo; m];
    let b = vec![1.0 - 0.5 * dt * di; m];
    let c = vec![-0.5 * dt * up; m];
    let mut rhs = vec![0.0; m];
    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    for _ in 0..steps {
        for i in 0..m {
            let n = i + 1;
            rhs[i] = u[n] + 0.5 * dt * (lo * u[n - 1] + di * u[n] + up * u[n + 1]);
        }
        cp[0] = c[0] / b[0];
        dp[0] = rhs[0] / b[0];
        for i in 1..m {
            let den = b[i] - a[i] * cp[i - 1];
            cp[i] = c[i] / den;
            dp[i] = (rhs[i] - a[i] * dp[i - 1]) / den;
        }
        u[m] = dp[m - 1];
        for i in (0..m - 1).rev() {
            u[i + 1] = dp[i] - cp[i] * u[i + 2];
        }
    }
    (xs, u)
}

/// Crank–Nicolson solution in z alone, `T_t = αT_zz + q(t, z)` with the
/// slab's Robin faces, from zero. `forcing` returns the source at a node;
/// a plane source at `z0` is represented by `delta_weight(z0)`.
pub fn fd_z(
    model: &SlabModel,
    nz: usize,
    dt: f64,
    times: &[f64],
    events: &[f64],
    forcing: impl Fn(f64, &[f64], &mut [f64]),
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dz = model.w / (nz - 1) as f64;
    let zs: Vec<f64> = (0..nz).map(|k| k as f64 * dz).collect();
    let mut u = vec![0.0; nz];
    let mut marks: Vec<f64> = times.iter().chain(events).copied().filter(|t| *t > 0.0).collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut out = Vec::new();
    let mut now = 0.0;
    let mut q0 = vec![0.0; nz];
    let mut q1 = vec![0.0; nz];
    let mut scratch = vec![0.0; nz];
    let mut next = 0;
    while next < times.len() && times[next] <= 0.0 {
        out.push(u.clone());
        next += 1;
    }
    for &mark in &marks {
        let pieces = ((mark - now) / dt).ceil().max(1.0) as usize;
        let h = (mark - now) / pieces as f64;
        let solver = ZSolver::new(model, nz, dz, h);
        for p in 0..pieces {
            let t = now + p as f64 * h;
            // Sources at t and t+h, sampled just inside the step so a
            // switch on a step boundary is resolved exactly.
            forcing(t + 1e-12 * h, &zs, &mut q0);
            forcing(t + h - 1e-12 * h, &zs, &mut q1);
            solver.apply(&mut u, &mut scratch);
            for k in 0..nz {
                u[k] += 0.5 * h * (q0[k] + q1[k]);
            }
        }
        now = mark;
        while next < times.len() && times[next] <= now + 1e-12 {
            out.push(u.clone());
            next += 1;
        }
    }
    (zs, out)
}
