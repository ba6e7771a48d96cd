//! Eigenvalues of the Robin problem in z and the matching poles of the
//! Laplace-domain kernel.
//!
//! Modes are `φₙ(z) = cos(λₙz) + (h1/λₙ)·sin(λₙz)` with `λₙ` the positive
//! roots of `sin(λw)(λ² − h1h2) − (h1+h2)λcos(λw) = 0`. The poles of the
//! transformed kernel sit at `sₙ = −αλₙ²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SlabModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub n: usize,
    pub lambda: f64,
    /// λₙ², the pole magnitude divided by α.
    pub s_over_alpha: f64,
    /// ∫₀ʷ φₙ² dz.
    pub norm: f64,
    /// Residue weight A(λₙ) of the pole-sum form of the kernel.
    pub amplitude: f64,
}

impl EigenMode {
    pub fn phi(&self, model: &SlabModel, z: f64) -> f64 {
        phi(model, self.lambda, z)
    }

    /// `λcos(λ(w−z)) + h2·sin(λ(w−z))`, the mode written from the upper face.
    pub fn phi_upper(&self, model: &SlabModel, z: f64) -> f64 {
        let l = self.lambda;
        let zb = model.w - z;
        l * (l * zb).cos() + model.h2 * (l * zb).sin()
    }

    /// `λcos(λz) + h1·sin(λz)`, which equals λ·φₙ(z).
    pub fn phi_lower(&self, model: &SlabModel, z: f64) -> f64 {
        let l = self.lambda;
        l * (l * z).cos() + model.h1 * (l * z).sin()
    }

    pub fn decay_rate(&self, model: &SlabModel) -> f64 {
        model.alpha * self.s_over_alpha
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub model: SlabModel,
    pub modes: Vec<EigenMode>,
}

impl EigenSpectrum {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// First `n` modes, or an error if fewer were computed.
    pub fn take(&self, n: usize) -> Result<&[EigenMode]> {
        if n > self.modes.len() {
            return Err(Error::TruncationExceedsSpectrum {
                requested: n,
                available: self.modes.len(),
            });
        }
        Ok(&self.modes[..n])
    }
}

pub fn phi(model: &SlabModel, lambda: f64, z: f64) -> f64 {
    (lambda * z).cos() + model.h1 / lambda * (lambda * z).sin()
}

/// Characteristic function `g(λ) = sin(λw)(λ² − h1h2) − (h1+h2)λcos(λw)`.
pub fn characteristic(model: &SlabModel, lambda: f64) -> f64 {
    let (s, c) = (lambda * model.w).sin_cos();
    s * (lambda * lambda - model.h1 * model.h2) - (model.h1 + model.h2) * lambda * c
}

fn characteristic_scale(model: &SlabModel, lambda: f64) -> f64 {
    1.0 + lambda * lambda + model.h1 * model.h2 + (model.h1 + model.h2) * lambda
}

/// Phase function whose n-th root is λₙ; strictly increasing in λ.
fn phase(model: &SlabModel, n: usize, lambda: f64) -> f64 {
    lambda * model.w
        - (n - 1) as f64 * std::f64::consts::PI
        - (model.h1 / lambda).atan()
        - (model.h2 / lambda).atan()
}

fn phase_slope(model: &SlabModel, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    model.w + model.h1 / (l2 + model.h1 * model.h1) + model.h2 / (l2 + model.h2 * model.h2)
}

/// Closed-form ∫₀ʷ φ² dz.
pub fn mode_norm(model: &SlabModel, lambda: f64) -> f64 {
    let w = model.w;
    let h1 = model.h1;
    let l2 = lambda * lambda;
    let s2 = (2.0 * lambda * w).sin() / (4.0 * lambda);
    let s = (lambda * w).sin();
    w / 2.0 + s2 + h1 * h1 / l2 * (w / 2.0 - s2) + h1 / l2 * s * s
}

/// Residue weight of the pole-sum kernel at eigenvalue λ.
pub fn residue_amplitude(model: &SlabModel, lambda: f64) -> f64 {
    let (h1, h2, w) = (model.h1, model.h2, model.w);
    let l2 = lambda * lambda;
    let (s, c) = (lambda * w).sin_cos();
    let denom = s * (l2 * ((h1 + h2) * w + 3.0) - h1 * h2)
        + lambda * c * (w * (l2 - h1 * h2) - 2.0 * (h1 + h2));
    2.0 * lambda / denom
}

fn solve_one(model: &SlabModel, n: usize) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let mut lo = (n - 1) as f64 * pi / model.w;
    let mut hi = n as f64 * pi / model.w;
    let lo_probe = if n == 1 { hi * 1e-300_f64.max(1e-14) } else { lo };
    let f_lo = phase(model, n, lo_probe);
    let f_hi = phase(model, n, hi);
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::BracketingFailure {
            n,
            lo,
            hi,
            g_lo: characteristic(model, lo),
            g_hi: characteristic(model, hi),
        });
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = phase(model, n, x);
        if f == 0.0 {
            break;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = f / phase_slope(model, x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-15 * next.abs();
        x = next;
        if done || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let residual = characteristic(model, x);
    if residual.abs() > 1e-10 * characteristic_scale(model, x) {
        return Err(Error::BracketingFailure {
            n,
            lo,
            hi,
            g_lo: characteristic(model, lo),
            g_hi: characteristic(model, hi),
        });
    }
    Ok(x)
}

/// First `count` eigenmodes, each isolated in ((n−1)π/w, nπ/w) and polished
/// by safeguarded Newton steps on the monotone phase form.
pub fn solve_eigenvalues(model: &SlabModel, count: usize) -> Result<EigenSpectrum> {
    let errors = model.validate();
    if !errors.is_empty() {
        return Err(Error::Validation(errors));
    }
    if model.h1 + model.h2 == 0.0 {
        return Err(Error::DegenerateCooling);
    }
    if count == 0 {
        return Err(Error::InvalidRequest("eigenvalue count must be at least 1".into()));
    }
    let modes = (1..=count)
        .map(|n| {
            let lambda = solve_one(model, n)?;
            Ok(EigenMode {
                n,
                lambda,
                s_over_alpha: lambda * lambda,
                norm: mode_norm(model, lambda),
                amplitude: residue_amplitude(model, lambda),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenSpectrum {
        model: *model,
        modes,
    })
}

/// Denominator `(β+h1)(β+h2) − (β−h1)(β−h2)·exp(−2βw)` of the transformed
/// kernel, with `β = √(s/α)` on the principal branch.
pub fn pole_residual(model: &SlabModel, s: Complex64) -> Complex64 {
    let beta = (s / model.alpha).sqrt();
    let (h1, h2) = (model.h1, model.h2);
    (beta + h1) * (beta + h2) - (beta - h1) * (beta - h2) * (-2.0 * beta * model.w).exp()
}

/// Entire form `(h1+h2)cosh(βw) + (β + h1h2/β)sinh(βw)` of the same
/// denominator, free of the removable zero at s = 0. Its zeros are the poles.
pub fn characteristic_entire(model: &SlabModel, s: Complex64) -> Complex64 {
    let beta = (s / model.alpha).sqrt();
    let bw = beta * model.w;
    let (h1, h2) = (model.h1, model.h2);
    // sinh(βw)/β via its series near the origin.
    let sinh_over_beta = if bw.norm() < 1e-4 {
        model.w * (1.0 + bw * bw / 6.0)
    } else {
        bw.sinh() / beta
    };
    (h1 + h2) * bw.cosh() + (beta * beta + h1 * h2) * sinh_over_beta
}

/// Slowest decay rate α·λ₁²; zero for an insulated slab.
pub fn fundamental_decay(model: &SlabModel) -> Result<f64> {
    if model.h1 + model.h2 == 0.0 {
        let errors = model.validate();
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        return Ok(0.0);
    }
    let spectrum = solve_eigenvalues(model, 1)?;
    Ok(model.alpha * spectrum.modes[0].s_over_alpha)
}
