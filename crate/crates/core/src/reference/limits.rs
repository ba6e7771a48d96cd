//! Closed-form limits: the unbounded medium, the cooled thin plate, the
//! thick plate near the source, and the steady separated series.

use crate::eigen::EigenSpectrum;
use crate::error::{Error, Result};
use crate::kernel::{g1d_moving, g1d_static};
use crate::model::SlabModel;
use crate::specfun::bessel_k0;

/// Response at displacement `point` (from the source) of an instantaneous
/// release of `energy` t̄ earlier in unbounded space, drifting like the
/// co-moving kernel. No faces, no cooling.
pub fn open_domain_t(model: &SlabModel, energy: f64, point: [f64; 3], tbar: f64) -> f64 {
    let a = model.alpha;
    energy
        * g1d_moving(a, model.v, point[0], tbar)
        * g1d_static(a, point[1], tbar)
        * g1d_static(a, point[2], tbar)
}

/// Decay constant of the z-averaged plate: √(v²/4α² + (h1+h2)/w).
pub fn plate_decay(model: &SlabModel) -> f64 {
    ((model.v / (2.0 * model.alpha)).powi(2) + (model.h1 + model.h2) / model.w).sqrt()
}

/// Steady temperature of a line source in a cooled plate,
/// `e^{−vx/2α}·(q′/α)·K₀(k·r)`. For a point source of power Q in a plate
/// of thickness w the z-averaged field has `q′ = Q/(2πw)`.
pub fn rosenthal2d_cooling(model: &SlabModel, q_line: f64, r: f64, x: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "plate radius",
            value: r,
        });
    }
    let tilt = (-model.v * x / (2.0 * model.alpha)).exp();
    Ok(tilt * q_line / model.alpha * bessel_k0(plate_decay(model) * r)?)
}

/// Steady point source in unbounded space, `e^{−vx/2α}·A·e^{−vR/2α}/R`.
/// A point source of power Q has `A = Q/(4πα)`.
pub fn rosenthal3d(model: &SlabModel, strength: f64, r: f64, x: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "source distance",
            value: r,
        });
    }
    let c = model.v / (2.0 * model.alpha);
    Ok(strength * (-c * (x + r)).exp() / r)
}

/// Separated steady series without the drift factor,
/// `q/(2πα)·Σ φₙ(z)φₙ(z′)/Nₙ·K₀(√(λₙ² + v²/4α²)·r)` over `n` modes.
pub fn steady_state_series(
    spectrum: &EigenSpectrum,
    q: f64,
    r: f64,
    z: f64,
    zp: f64,
    n: usize,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "steady radius",
            value: r,
        });
    }
    let model = &spectrum.model;
    let c2 = (model.v / (2.0 * model.alpha)).powi(2);
    let mut sum = 0.0;
    for mode in spectrum.take(n)? {
        let arg = (mode.lambda * mode.lambda + c2).sqrt() * r;
        // K₀ underflows long before the modes stop mattering.
        if arg > 700.0 {
            break;
        }
        sum += mode.phi(model, z) * mode.phi(model, zp) / mode.norm * bessel_k0(arg)?;
    }
    Ok(q / (2.0 * std::f64::consts::PI * model.alpha) * sum)
}

/// Steady temperature at lateral offset (x, y) from a source of power q.
pub fn steady_state_temperature(
    spectrum: &EigenSpectrum,
    q: f64,
    x: f64,
    y: f64,
    z: f64,
    zp: f64,
    n: usize,
) -> Result<f64> {
    let model = &spectrum.model;
    let r = x.hypot(y);
    let tilt = (-model.v * x / (2.0 * model.alpha)).exp();
    Ok(tilt * steady_state_series(spectrum, q, r, z, zp, n)?)
}

/// Thickness-averaged steady temperature at lateral offset (x, y),
/// `(1/w)∫₀ʷ T dz`, from the same separated series.
pub fn steady_state_mean(spectrum: &EigenSpectrum, q: f64, x: f64, y: f64, zp: f64, n: usize) -> Result<f64> {
    let r = x.hypot(y);
    if !(r > 0.0) {
        return Err(Error::Domain {
            what: "steady radius",
            value: r,
        });
    }
    let model = &spectrum.model;
    let c2 = (model.v / (2.0 * model.alpha)).powi(2);
    let mut sum = 0.0;
    for mode in spectrum.take(n)? {
        let l = mode.lambda;
        let arg = (l * l + c2).sqrt() * r;
        if arg > 700.0 {
            break;
        }
        let integral = (l * model.w).sin() / l + model.h1 / (l * l) * (1.0 - (l * model.w).cos());
        sum += integral / model.w * mode.phi(model, zp) / mode.norm * bessel_k0(arg)?;
    }
    let tilt = (-model.v * x / (2.0 * model.alpha)).exp();
    Ok(tilt * q / (2.0 * std::f64::consts::PI * model.alpha) * sum)
}
