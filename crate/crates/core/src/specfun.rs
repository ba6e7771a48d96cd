//! Complex error function, Faddeeva function and the modified Bessel
//! function K₀.
//!
//! `faddeeva_w` combines Weideman's rational approximation near the origin
//! with the Laplace continued fraction far from it. Everything else is
//! expressed through it so that large imaginary arguments never form
//! `exp(z²)` and `erf` separately.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const WEIDEMAN_TERMS: usize = 40;
const CONTINUED_FRACTION_RADIUS: f64 = 6.0;
const CONTINUED_FRACTION_DEPTH: usize = 60;

/// Largest |z| accepted by `erf_complex`.
pub const ERF_MAX_MODULUS: f64 = 1e6;
/// Largest value of Im(z)² − Re(z)² before `exp(-z²)` overflows.
pub const ERF_MAX_GROWTH: f64 = 708.0;

struct Weideman {
    l: f64,
    coeffs: Vec<f64>,
}

fn weideman() -> &'static Weideman {
    static TABLE: OnceLock<Weideman> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = WEIDEMAN_TERMS;
        let m = 2 * n;
        let l = (n as f64 / std::f64::consts::SQRT_2).sqrt();
        let samples: Vec<(f64, f64)> = (1..m)
            .map(|k| {
                let t = l * (k as f64 * PI / (2 * m) as f64).tan();
                (k as f64, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        // F is even in k, so the discrete cosine sum folds onto k ≥ 0.
        let coeffs = (1..=n)
            .map(|j| {
                let s: f64 = l * l
                    + samples
                    .iter()
                    .map(|(k, f)| 2.0 * f * (PI * j as f64 * k / m as f64).cos())
                    .sum::<f64>();
                s / (2 * m) as f64
            })
            .collect();
        Weideman { l, coeffs }
    })
}

/// Faddeeva function `w(z) = exp(-z²)·erfc(-iz)`.
pub fn faddeeva_w(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        // w(z) = 2 exp(-z²) - w(-z)
        return 2.0 * (-z * z).exp() - faddeeva_w(-z);
    }
    if z.norm() >= CONTINUED_FRACTION_RADIUS {
        let mut r = Complex64::new(0.0, 0.0);
        for k in (1..=CONTINUED_FRACTION_DEPTH).rev() {
            r = (k as f64 / 2.0) / (z - r);
        }
        return Complex64::new(0.0, 1.0 / SQRT_PI) / (z - r);
    }
    let table = weideman();
    let iz = Complex64::new(-z.im, z.re);
    let denom = table.l - iz;
    let big_z = (table.l + iz) / denom;
    let p = table
        .coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * big_z + c);
    2.0 * p / (denom * denom) + (1.0 / SQRT_PI) / denom
}

/// Scaled complementary error function `exp(x²)·erfc(x)` for real x.
pub fn erfcx(x: f64) -> f64 {
    faddeeva_w(Complex64::new(0.0, x)).re
}

/// Real error function.
pub fn erf(x: f64) -> f64 {
    if x.abs() < 2.0 {
        return erf_taylor(Complex64::new(x, 0.0)).re;
    }
    let tail = (-x * x).exp() * erfcx(x.abs());
    (1.0 - tail).copysign(x)
}

/// Real complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= 0.5 {
        (-x * x).exp() * erfcx(x)
    } else {
        1.0 - erf(x)
    }
}

fn erf_taylor(z: Complex64) -> Complex64 {
    // erf z = 2/√π Σ (-1)^k z^(2k+1) / (k! (2k+1))
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    for k in 1..200 {
        term *= -z2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (2.0 / SQRT_PI)
}

/// Complex error function.
///
/// Returns `OverflowDomain` when |z| ≥ 1e6 or when `exp(-z²)` would
/// overflow (Im² − Re² above about 708).
pub fn erf_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite()
        || !z.im.is_finite()
        || z.norm() >= ERF_MAX_MODULUS
        || z.im * z.im - z.re * z.re > ERF_MAX_GROWTH
    {
        return Err(Error::OverflowDomain { re: z.re, im: z.im });
    }
    if z.norm() < 2.0 {
        return Ok(erf_taylor(z));
    }
    let e = (-z * z).exp();
    if z.re >= 0.0 {
        Ok(1.0 - e * faddeeva_w(Complex64::new(-z.im, z.re)))
    } else {
        Ok(e * faddeeva_w(Complex64::new(z.im, -z.re)) - 1.0)
    }
}

/// `exp(-y²)·erf(x - iy)` evaluated without forming either factor, so it
/// stays finite when y is large.
pub fn scaled_erf(x: f64, y: f64) -> Complex64 {
    let damp = (-y * y).exp();
    let phase = Complex64::new(-x * x, 2.0 * x * y).exp();
    if x >= 0.0 {
        damp - phase * faddeeva_w(Complex64::new(y, x))
    } else {
        phase * faddeeva_w(Complex64::new(-y, -x)) - damp
    }
}

/// Modified Bessel function of the second kind, order zero.
pub fn bessel_k0(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "K0 argument",
            value: x,
        });
    }
    if x <= 2.0 {
        Ok(k0_series(x))
    } else {
        Ok(k0e_integral(x) * (-x).exp())
    }
}

/// Exponentially scaled K₀: `exp(x)·K₀(x)`.
pub fn bessel_k0e(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "K0 argument",
            value: x,
        });
    }
    if x <= 2.0 {
        Ok(k0_series(x) * x.exp())
    } else {
        Ok(k0e_integral(x))
    }
}

fn k0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..60 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        i0 += term;
        tail += term * harmonic;
        if term < 1e-18 {
            break;
        }
    }
    -((x / 2.0).ln() + EULER_GAMMA) * i0 + tail
}

fn k0e_integral(x: f64) -> f64 {
    // exp(x)·K₀(x) = ∫₀^∞ exp(-x (cosh t - 1)) dt, trapezoid with a step
    // that resolves the Gaussian core of width 1/√x.
    let h = 0.25_f64.min(0.7 / x.sqrt());
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        let f = (-x * (t.cosh() - 1.0)).exp();
        sum += f;
        if f < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    sum * h
}
