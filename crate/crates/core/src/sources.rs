//! Per-axis temperature factors: the heat kernel of each axis convolved
//! with the matching slice of the source shape.
//!
//! Shape factors carry unit amplitude. The source amplitude and power
//! envelope are attached once, when the factors are combined in time.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{g1d_static, KernelEval, TRUNCATION_WARNING};
use crate::model::{SlabModel, SourceSpec, SourceVariant};
use crate::quadrature::{gauss_legendre, gauss_legendre_sum, integrate, Tolerance};
use crate::specfun::{bessel_k0, erf, scaled_erf};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Imaginary residue tolerated in a real-valued series.
pub const COMPLEX_LEAK_TOLERANCE: f64 = 1e-8;

/// Gaussian source slice `exp(-m²/2σ²)` convolved with the free 1D kernel,
/// `m` being the offset from the drifting kernel centre.
fn gaussian_factor(alpha: f64, sigma: f64, tbar: f64, m: f64) -> f64 {
    let a = 2.0 * alpha * tbar;
    let spread = a + sigma * sigma;
    sigma / spread.sqrt() * (-m * m / (2.0 * spread)).exp()
}

/// Half-line Gaussian slice (x' > 0 when `front`, x' < 0 otherwise)
/// convolved with the free 1D kernel.
fn half_gaussian_factor(alpha: f64, sigma: f64, tbar: f64, m: f64, front: bool) -> f64 {
    let a = 2.0 * alpha * tbar;
    let spread = a + sigma * sigma;
    let arg = m * sigma / (SQRT_2 * a.sqrt() * spread.sqrt());
    let side = if front { 1.0 + erf(arg) } else { 1.0 - erf(arg) };
    0.5 * sigma / spread.sqrt() * (-m * m / (2.0 * spread)).exp() * side
}

fn sigma_or_err(source: &SourceSpec) -> Result<crate::model::Widths> {
    source.widths_or_err()
}

/// x-factor of a Gaussian ellipsoid, unit amplitude.
pub fn tx_gaussian(model: &SlabModel, source: &SourceSpec, tbar: f64, x: f64) -> Result<f64> {
    if tbar <= 0.0 {
        return Ok(0.0);
    }
    let (sigma, _) = sigma_or_err(source)?.sigma_x_pair();
    let m = x - source.center[0] + model.v * tbar;
    Ok(gaussian_factor(model.alpha, sigma, tbar, m))
}

/// y-factor of a Gaussian or double ellipsoid, unit amplitude.
pub fn ty_gaussian(model: &SlabModel, source: &SourceSpec, tbar: f64, y: f64) -> Result<f64> {
    if tbar <= 0.0 {
        return Ok(0.0);
    }
    let sigma = sigma_or_err(source)?.sigma_y();
    Ok(gaussian_factor(model.alpha, sigma, tbar, y - source.center[1]))
}

/// x-factor of a double ellipsoid: rear and front half-Gaussians weighted by
/// their share of the total amplitude.
pub fn tx_double_ellipsoid(
    model: &SlabModel,
    source: &SourceSpec,
    tbar: f64,
    x: f64,
) -> Result<f64> {
    if tbar <= 0.0 {
        return Ok(0.0);
    }
    let (sigma_l, sigma_r) = sigma_or_err(source)?.sigma_x_pair();
    let (wl, wr) = source.side_weights();
    let m = x - source.center[0] + model.v * tbar;
    Ok(wr * half_gaussian_factor(model.alpha, sigma_r, tbar, m, true)
        + wl * half_gaussian_factor(model.alpha, sigma_l, tbar, m, false))
}

/// x-factor for whichever distributed variant `source` is.
pub fn tx_factor(model: &SlabModel, source: &SourceSpec, tbar: f64, x: f64) -> Result<f64> {
    match source.variant {
        SourceVariant::GaussianEllipsoid => tx_gaussian(model, source, tbar, x),
        SourceVariant::DoubleEllipsoid => tx_double_ellipsoid(model, source, tbar, x),
        SourceVariant::PointOnOff => Err(Error::WrongSourceVariant {
            expected: "distributed",
        }),
    }
}

/// Mode integrals `Iₙ = ∫₀ʷ φₙ(z')·exp(−(z'−z_c)²/2σ_z²) dz'` divided by the
/// mode norms, for one source.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub sigma_z: f64,
    pub z_c: f64,
    /// `Iₙ / Nₙ` for each retained mode.
    pub weights: Vec<f64>,
    /// Largest |Im Iₙ| / |Iₙ| seen while assembling.
    pub max_leak: f64,
}

/// `∫_a^b exp(iλz')·exp(−(z'−z_c)²/2σ²) dz'` via the scaled error function.
fn gaussian_fourier_segment(lambda: f64, sigma: f64, zc: f64, a: f64, b: f64) -> Complex64 {
    let y = lambda * sigma / SQRT_2;
    let xb = (b - zc) / (SQRT_2 * sigma);
    let xa = (a - zc) / (SQRT_2 * sigma);
    let phase = Complex64::new(0.0, lambda * zc).exp();
    phase * (sigma * SQRT_PI / SQRT_2) * (scaled_erf(xb, y) - scaled_erf(xa, y))
}

impl SeriesCoefficients {
    pub fn new(kernel: &KernelEval, source: &SourceSpec) -> Result<Self> {
        let sigma = sigma_or_err(source)?.sigma_z();
        let zc = source.center[2];
        let m = &kernel.model;
        let mut weights = Vec::with_capacity(kernel.truncation);
        let mut max_leak: f64 = 0.0;
        for mode in kernel.modes() {
            let l = mode.lambda;
            let r = m.h1 / l;
            let plus = gaussian_fourier_segment(l, sigma, zc, 0.0, m.w);
            let minus = gaussian_fourier_segment(-l, sigma, zc, 0.0, m.w);
            let integral =
                0.5 * (Complex64::new(1.0, -r) * plus + Complex64::new(1.0, r) * minus);
            let scale = integral.norm();
            if scale > 0.0 {
                let leak = integral.im.abs() / scale;
                // Modes whose integral sits at rounding level carry no signal.
                if integral.re.abs() > 1e-300 && leak > COMPLEX_LEAK_TOLERANCE {
                    return Err(Error::ComplexLeak {
                        real: integral.re,
                        imag: integral.im,
                    });
                }
                max_leak = max_leak.max(leak);
            }
            weights.push(integral.re / mode.norm);
        }
        Ok(SeriesCoefficients {
            sigma_z: sigma,
            z_c: zc,
            weights,
            max_leak,
        })
    }
}

/// z-factor value with truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorValue {
    pub value: f64,
    pub truncated: bool,
    /// Modes skipped because their decay factor underflowed.
    pub dropped: usize,
}

/// z-factor of a Gaussian slice: the z-kernel integrated against
/// `exp(−(z'−z_c)²/2σ_z²)` over the slab.
pub fn tz_series(
    kernel: &KernelEval,
    coefficients: &SeriesCoefficients,
    tbar: f64,
    z: f64,
) -> FactorValue {
    if tbar <= 0.0 {
        return FactorValue {
            value: 0.0,
            truncated: false,
            dropped: 0,
        };
    }
    if kernel.uses_images(tbar) {
        return FactorValue {
            value: tz_images(kernel, coefficients.sigma_z, coefficients.z_c, tbar, z),
            truncated: false,
            dropped: 0,
        };
    }
    let m = &kernel.model;
    let mut sum = 0.0;
    let mut dropped = 0;
    for (mode, w) in kernel.modes().iter().zip(&coefficients.weights) {
        let decay = (-m.alpha * mode.s_over_alpha * tbar).exp();
        if decay == 0.0 {
            dropped += 1;
            continue;
        }
        sum += mode.phi(m, z) * w * decay;
    }
    // The source integral is at most √(2π)σ, so the kernel tail bounds the
    // neglected part.
    let tail = kernel.series_tail(tbar, kernel.truncation)
        * (2.0 * std::f64::consts::PI).sqrt()
        * coefficients.sigma_z;
    FactorValue {
        value: sum,
        truncated: dropped == 0 && tail > TRUNCATION_WARNING * sum.abs(),
        dropped,
    }
}

/// Short-time z-factor: quadrature of the image kernel against the slice.
fn tz_images(kernel: &KernelEval, sigma: f64, zc: f64, tbar: f64, z: f64) -> f64 {
    let w = kernel.model.w;
    let spread = 8.0 * (2.0 * kernel.model.alpha * tbar).sqrt();
    let mut cuts = vec![0.0, w];
    for c in [z - spread, z, z + spread, spread - z, zc - 8.0 * sigma, zc, zc + 8.0 * sigma] {
        if c > 0.0 && c < w {
            cuts.push(c);
        }
    }
    // Reflections across z = w matter when z' is within `spread` of 2w − z.
    let upper = 2.0 * w - z - spread;
    if upper > 0.0 && upper < w {
        cuts.push(upper);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let tol = Tolerance::new(1e-15, 1e-12);
    cuts.windows(2)
        .map(|pair| {
            integrate(
                |zp| {
                    let g = (-(zp - zc) * (zp - zc) / (2.0 * sigma * sigma)).exp();
                    if g == 0.0 {
                        0.0
                    } else {
                        kernel.g_z_images(z, zp, tbar) * g
                    }
                },
                pair[0],
                pair[1],
                tol,
            )
            .value
        })
        .sum()
}

/// z-factor assembled from the pole-sum form, splitting the source integral
/// at z' = z. Mathematically equal to `tz_series`; kept as a second route.
pub fn tz_series_split(kernel: &KernelEval, source: &SourceSpec, tbar: f64, z: f64) -> Result<f64> {
    if tbar <= 0.0 {
        return Ok(0.0);
    }
    let sigma = sigma_or_err(source)?.sigma_z();
    let zc = source.center[2];
    let m = &kernel.model;
    let mut sum = 0.0;
    for mode in kernel.modes() {
        let decay = (-m.alpha * mode.s_over_alpha * tbar).exp();
        if decay == 0.0 {
            break;
        }
        let l = mode.lambda;
        let lower = Complex64::new(l, -m.h1) * gaussian_fourier_segment(l, sigma, zc, 0.0, z);
        let upper = Complex64::new(l, -m.h2)
            * Complex64::new(0.0, l * m.w).exp()
            * gaussian_fourier_segment(l, sigma, zc, z, m.w).conj();
        sum += mode.amplitude
            * decay
            * (mode.phi_upper(m, z) * lower.re + mode.phi_lower(m, z) * upper.re);
    }
    Ok(sum)
}

fn power_degree_check(source: &SourceSpec) -> Result<()> {
    let degree = source.power_law.len().saturating_sub(1);
    if degree > crate::model::MAX_POWER_DEGREE {
        return Err(Error::UnsupportedPower(degree));
    }
    Ok(())
}

fn require_point(source: &SourceSpec) -> Result<()> {
    if source.variant != SourceVariant::PointOnOff {
        return Err(Error::WrongSourceVariant {
            expected: "point_on_off",
        });
    }
    Ok(())
}

/// `∫₀^B τᵏ·exp(−μ(T₀−τ)) dτ` for k = 0..=degree.
fn exponential_moments(mu: f64, t0: f64, b: f64, degree: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(degree + 1);
    if mu * b <= 1.0 {
        let rule = gauss_legendre(16);
        for k in 0..=degree {
            out.push(gauss_legendre_sum(
                |tau| tau.powi(k as i32) * (-mu * (t0 - tau)).exp(),
                0.0,
                b,
                &rule,
            ));
        }
        return out;
    }
    let end = (-mu * (t0 - b)).exp();
    let mut prev = (end - (-mu * t0).exp()) / mu;
    out.push(prev);
    for k in 1..=degree {
        prev = (b.powi(k as i32) * end - k as f64 * prev) / mu;
        out.push(prev);
    }
    out
}

/// Steady 1D response `Σ φₙ(z)φₙ(z₀)/(Nₙαλₙ²)` in closed form.
fn steady_line_response(model: &SlabModel, z: f64, z0: f64) -> f64 {
    let (lo, hi) = if z <= z0 { (z, z0) } else { (z0, z) };
    let u = 1.0 + model.h1 * lo;
    let v = 1.0 + model.h2 * (model.w - hi);
    u * v / (model.alpha * (model.h1 + model.h2 + model.h1 * model.h2 * model.w))
}

/// Temperature of a slab heated uniformly in x and y over the plane z = z₀,
/// switched on at t_on and off at t_off with envelope p(t − t_on).
pub fn point_onoff_1d(kernel: &KernelEval, source: &SourceSpec, t: f64, z: f64) -> Result<f64> {
    require_point(source)?;
    power_degree_check(source)?;
    let t_end = t.min(source.t_off);
    if t_end <= source.t_on {
        return Ok(0.0);
    }
    let m = &kernel.model;
    let z0 = source.center[2];
    let t0 = t - source.t_on;
    let b = t_end - source.t_on;
    let degree = source.power_law.len().saturating_sub(1);
    let active = t <= source.t_off;
    let p_end = source.power(b);
    let mut sum = 0.0;
    for mode in kernel.modes() {
        let mu = m.alpha * mode.s_over_alpha;
        let moments = exponential_moments(mu, t0, b, degree);
        let mut k: f64 = source
            .power_law
            .iter()
            .zip(&moments)
            .map(|(c, mk)| c * mk)
            .sum();
        if active {
            // The p(B)/μ part is summed in closed form below.
            k -= p_end / mu;
        }
        sum += mode.phi(m, z) * mode.phi(m, z0) / mode.norm * k;
    }
    if active {
        sum += p_end * steady_line_response(m, z, z0);
    }
    Ok(source.amplitude() * sum)
}

/// `F(T) = ∫₀^T t⁻¹·exp(−a/t − μt) dt`.
fn leaky_well(a: f64, mu: f64, t_upper: f64) -> f64 {
    if t_upper <= 0.0 {
        return 0.0;
    }
    let tol = Tolerance::new(1e-300, 1e-13);
    let integrand = |u: f64| {
        let t = u.exp();
        (-a / t - mu * t).exp()
    };
    let peak = (a / mu).sqrt();
    let full = 2.0 * bessel_k0(2.0 * (a * mu).sqrt()).unwrap_or(f64::INFINITY);
    let ln_t = t_upper.ln();
    if t_upper < peak {
        // Rising integrand: cut where a/t exceeds its end value by 60.
        let lo = (a / (a / t_upper + 60.0)).ln();
        integrate(integrand, lo, ln_t, tol).value
    } else {
        let hi = (t_upper + 60.0 / mu).ln();
        full - integrate(integrand, ln_t, hi, tol).value
    }
}

/// Temperature from a static point source in the slab (v = 0), with the
/// time integral done per mode. Constant power uses the closed leaky-well
/// integrals; polynomial power falls back to time quadrature.
pub fn point_onoff_static3d(
    kernel: &KernelEval,
    source: &SourceSpec,
    t: f64,
    point: [f64; 3],
) -> Result<f64> {
    require_point(source)?;
    power_degree_check(source)?;
    let m = &kernel.model;
    if m.v != 0.0 {
        return Err(Error::MovingSourceUnsupported(m.v));
    }
    let dx = point[0] - source.center[0];
    let dy = point[1] - source.center[1];
    let rho2 = dx * dx + dy * dy;
    if rho2 == 0.0 {
        return Err(Error::Domain {
            what: "in-plane distance from point source",
            value: 0.0,
        });
    }
    let t_end = t.min(source.t_off);
    if t_end <= source.t_on {
        return Ok(0.0);
    }
    let t0 = t - source.t_on;
    let b = t_end - source.t_on;
    let z0 = source.center[2];
    if !source.is_constant_power() {
        // t̄ = u², integrand smooth in u.
        let est = integrate(
            |u| {
                let tbar = u * u;
                let tau = t0 - tbar;
                2.0 * u * source.power(tau) * kernel.green_full(point, source.center, tbar)
            },
            (t0 - b).max(0.0).sqrt(),
            t0.sqrt(),
            Tolerance::new(1e-300, 1e-11),
        );
        return Ok(source.amplitude() * est.value);
    }
    let a = rho2 / (4.0 * m.alpha);
    let mut sum = 0.0;
    for mode in kernel.modes() {
        let mu = m.alpha * mode.s_over_alpha;
        let weight = mode.phi(m, point[2]) * mode.phi(m, z0) / mode.norm;
        let f = leaky_well(a, mu, t0) - leaky_well(a, mu, t0 - b);
        if f == 0.0 && weight.abs() < 1e300 {
            continue;
        }
        sum += weight * f;
    }
    Ok(source.amplitude() * source.power_law[0] * sum / (4.0 * std::f64::consts::PI * m.alpha))
}

/// Factors of a point source: free kernels in x and y, z-kernel in z.
pub fn point_factors(kernel: &KernelEval, source: &SourceSpec, tbar: f64, p: [f64; 3]) -> (f64, f64, FactorValue) {
    let m = &kernel.model;
    let gx = crate::kernel::g1d_moving(m.alpha, m.v, p[0] - source.center[0], tbar);
    let gy = g1d_static(m.alpha, p[1] - source.center[1], tbar);
    let gz = kernel.g_z_checked(p[2], source.center[2], tbar);
    (
        gx,
        gy,
        FactorValue {
            value: gz.value,
            truncated: gz.truncated,
            dropped: 0,
        },
    )
}
