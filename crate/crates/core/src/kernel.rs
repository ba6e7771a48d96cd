//! Heat kernels: open-line factors in x and y and the finite-width kernel
//! in z.
//!
//! Every factor has unit mass, so the product kernel integrates to the
//! heat remaining in the slab. In the co-moving frame the x-factor drifts
//! toward negative x: a pulse released at the source is left behind as the
//! source advances.

use num_complex::Complex64;

use crate::eigen::{solve_eigenvalues, EigenMode, EigenSpectrum};
use crate::error::{Error, Result};
use crate::model::SlabModel;
use crate::specfun::{erfc, erfcx};

pub const DEFAULT_TRUNCATION: usize = 160;
/// Below `α·t̄ < τ*·w²` the z-kernel switches to the image form.
pub const DEFAULT_TAU_STAR: f64 = 0.01;
/// Series tail above this fraction of the partial sum flags a sample.
pub const TRUNCATION_WARNING: f64 = 1e-8;

/// Free 1D heat kernel `(4παt̄)^(-1/2)·exp(-ȳ²/(4αt̄))`, zero for t̄ ≤ 0.
pub fn g1d_static(alpha: f64, ybar: f64, tbar: f64) -> f64 {
    if tbar <= 0.0 {
        return 0.0;
    }
    let four_at = 4.0 * alpha * tbar;
    (-ybar * ybar / four_at).exp() / (std::f64::consts::PI * four_at).sqrt()
}

/// Co-moving 1D kernel: the static kernel centred at x̄ = −v·t̄.
pub fn g1d_moving(alpha: f64, v: f64, xbar: f64, tbar: f64) -> f64 {
    g1d_static(alpha, xbar + v * tbar, tbar)
}

/// z-kernel value together with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    /// Estimated magnitude of the neglected series tail (0 on the image path).
    pub tail: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEval {
    pub model: SlabModel,
    pub spectrum: EigenSpectrum,
    pub truncation: usize,
    /// Use the image form at short times.
    pub short_time: bool,
    pub tau_star: f64,
}

impl KernelEval {
    /// Solves the spectrum and keeps the first `truncation` modes.
    pub fn new(model: &SlabModel, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidRequest("truncation must be at least 1".into()));
        }
        let spectrum = solve_eigenvalues(model, truncation)?;
        Ok(KernelEval {
            model: *model,
            spectrum,
            truncation,
            short_time: true,
            tau_star: DEFAULT_TAU_STAR,
        })
    }

    pub fn from_spectrum(spectrum: EigenSpectrum, truncation: usize) -> Result<Self> {
        spectrum.take(truncation)?;
        if truncation == 0 {
            return Err(Error::InvalidRequest("truncation must be at least 1".into()));
        }
        Ok(KernelEval {
            model: spectrum.model,
            spectrum,
            truncation,
            short_time: true,
            tau_star: DEFAULT_TAU_STAR,
        })
    }

    /// Pure eigen-series evaluation at every time.
    pub fn series_only(mut self) -> Self {
        self.short_time = false;
        self
    }

    pub fn with_truncation(&self, truncation: usize) -> Result<Self> {
        KernelEval::from_spectrum(self.spectrum.clone(), truncation).map(|k| KernelEval {
            short_time: self.short_time,
            tau_star: self.tau_star,
            ..k
        })
    }

    pub fn modes(&self) -> &[EigenMode] {
        &self.spectrum.modes[..self.truncation]
    }

    pub fn uses_images(&self, tbar: f64) -> bool {
        self.short_time && self.model.alpha * tbar < self.tau_star * self.model.w * self.model.w
    }

    /// Finite-width z-kernel.
    pub fn g_z(&self, z: f64, zp: f64, tbar: f64) -> f64 {
        self.g_z_checked(z, zp, tbar).value
    }

    pub fn g_z_checked(&self, z: f64, zp: f64, tbar: f64) -> KernelValue {
        if tbar <= 0.0 {
            return KernelValue {
                value: 0.0,
                tail: 0.0,
                truncated: false,
            };
        }
        if self.uses_images(tbar) {
            return KernelValue {
                value: self.g_z_images(z, zp, tbar),
                tail: 0.0,
                truncated: false,
            };
        }
        let value = self.g_z_series(z, zp, tbar, self.truncation);
        let tail = self.series_tail(tbar, self.truncation);
        KernelValue {
            value,
            tail,
            truncated: tail > TRUNCATION_WARNING * value.abs(),
        }
    }

    /// Eigen-series `Σ φₙ(z)φₙ(z')/Nₙ·exp(−αλₙ²t̄)` over the first `n` modes.
    pub fn g_z_series(&self, z: f64, zp: f64, tbar: f64, n: usize) -> f64 {
        if tbar <= 0.0 {
            return 0.0;
        }
        let m = &self.model;
        let mut sum = 0.0;
        for mode in &self.spectrum.modes[..n.min(self.spectrum.len())] {
            let decay = (-m.alpha * mode.s_over_alpha * tbar).exp();
            if decay == 0.0 {
                break;
            }
            sum += mode.phi(m, z) * mode.phi(m, zp) / mode.norm * decay;
        }
        sum
    }

    /// Pole-sum form built from the residue amplitudes.
    pub fn g_z_residue(&self, z: f64, zp: f64, tbar: f64) -> f64 {
        if tbar <= 0.0 {
            return 0.0;
        }
        let m = &self.model;
        let (lo, hi) = if z <= zp { (z, zp) } else { (zp, z) };
        self.modes()
            .iter()
            .map(|mode| {
                mode.amplitude
                    * mode.phi_upper(m, hi)
                    * mode.phi_lower(m, lo)
                    * (-m.alpha * mode.s_over_alpha * tbar).exp()
            })
            .sum()
    }

    /// Short-time form: free kernel plus one Robin image per face.
    pub fn g_z_images(&self, z: f64, zp: f64, tbar: f64) -> f64 {
        let m = &self.model;
        let a = m.alpha;
        g1d_static(a, z - zp, tbar)
            + robin_image(a, m.h1, z + zp, tbar)
            + robin_image(a, m.h2, 2.0 * m.w - z - zp, tbar)
    }

    /// Estimate of the neglected modes beyond `n`, from λₖ > (k−1)π/w and
    /// |φₖ|²/Nₖ ≤ (2/w)(1 + h1²/λₙ²) for the high modes.
    pub fn series_tail(&self, tbar: f64, n: usize) -> f64 {
        let m = &self.model;
        let pi = std::f64::consts::PI;
        let a = m.alpha * (pi / m.w).powi(2) * tbar;
        let lambda_n = self.spectrum.modes[n.min(self.spectrum.len()) - 1].lambda;
        let scale = 2.0 / m.w * (1.0 + (m.h1 / lambda_n).powi(2));
        scale * 0.5 * (pi / a).sqrt() * erfc(n as f64 * a.sqrt())
    }

    /// Product kernel `G = g_x·g_y·g_z` for a unit pulse at `source` released
    /// t̄ earlier.
    pub fn green_full(&self, point: [f64; 3], source: [f64; 3], tbar: f64) -> f64 {
        self.green_full_checked(point, source, tbar).value
    }

    pub fn green_full_checked(&self, point: [f64; 3], source: [f64; 3], tbar: f64) -> KernelValue {
        if tbar <= 0.0 {
            return KernelValue {
                value: 0.0,
                tail: 0.0,
                truncated: false,
            };
        }
        let m = &self.model;
        let gx = g1d_moving(m.alpha, m.v, point[0] - source[0], tbar);
        let gy = g1d_static(m.alpha, point[1] - source[1], tbar);
        let gz = self.g_z_checked(point[2], source[2], tbar);
        KernelValue {
            value: gx * gy * gz.value,
            tail: gx * gy * gz.tail,
            truncated: gz.truncated,
        }
    }

    /// Laplace transform of the z-kernel in t̄, written as the four
    /// exponential terms sharing one denominator.
    pub fn g_z_transform(&self, z: f64, zp: f64, s: Complex64) -> Complex64 {
        g_z_transform(&self.model, z, zp, s)
    }
}

/// Half-space Robin image of a unit source at distance `s` from its mirror
/// point: `K(s) − h·erfcx(q)·exp(−s²/(4αt̄))`.
fn robin_image(alpha: f64, h: f64, s: f64, tbar: f64) -> f64 {
    let k = g1d_static(alpha, s, tbar);
    if h == 0.0 {
        return k;
    }
    let root = (alpha * tbar).sqrt();
    let q = s / (2.0 * root) + h * root;
    let gauss = (-s * s / (4.0 * alpha * tbar)).exp();
    k - h * erfcx(q) * gauss
}

/// Laplace transform of the z-kernel in t̄ (β = √(s/α), principal branch).
pub fn g_z_transform(model: &SlabModel, z: f64, zp: f64, s: Complex64) -> Complex64 {
    let (lo, hi) = if z <= zp { (z, zp) } else { (zp, z) };
    let w = model.w;
    let beta = (s / model.alpha).sqrt();
    let (h1, h2) = (model.h1, model.h2);
    let term = |s1: f64, s2: f64, dist: f64| (beta + s1 * h1) * (beta + s2 * h2) * (-beta * dist).exp();
    let num = term(1.0, 1.0, hi - lo)
        + term(1.0, -1.0, (w - hi) + (w - lo))
        + term(-1.0, 1.0, hi + lo)
        + term(-1.0, -1.0, (w - hi) + (w + lo));
    let den = (beta + h1) * (beta + h2) - (beta - h1) * (beta - h2) * (-2.0 * beta * w).exp();
    num / (2.0 * beta * den * model.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_real_line, Tolerance};

    fn standard_kernel() -> KernelEval {
        KernelEval::new(&SlabModel::standard(), DEFAULT_TRUNCATION).unwrap()
    }

    #[test]
    fn kernels_are_causal() {
        let k = standard_kernel();
        for t in [-1.0, -1e-9, 0.0] {
            assert_eq!(g1d_static(1.0, 0.1, t), 0.0);
            assert_eq!(g1d_moving(1.0, 2.0, 0.1, t), 0.0);
            assert_eq!(k.g_z(1.0, 2.0, t), 0.0);
            assert_eq!(k.green_full([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], t), 0.0);
        }
    }

    #[test]
    fn static_kernel_has_unit_mass() {
        let est = integrate_real_line(|y| g1d_static(1.0, y, 0.7), 0.0, Tolerance::new(1e-14, 1e-13));
        assert!((est.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn moving_kernel_peak_trails_the_source() {
        let (alpha, v, t) = (0.8, 1.5, 2.0);
        let peak = -v * t;
        let f = |x: f64| g1d_moving(alpha, v, x, t);
        assert!(f(peak) > f(peak + 1e-3) && f(peak) > f(peak - 1e-3));
        assert_eq!(g1d_moving(alpha, 0.0, 0.4, t), g1d_static(alpha, 0.4, t));
    }

    #[test]
    fn image_and_series_paths_join_continuously() {
        let k = standard_kernel();
        let t_switch = k.tau_star * k.model.w * k.model.w / k.model.alpha;
        for (z, zp) in [(0.1, 0.3), (2.0, 2.5), (4.9, 4.6), (0.0, 0.05), (5.0, 4.8)] {
            let images = k.g_z_images(z, zp, t_switch);
            let series = k.g_z_series(z, zp, t_switch, 400.min(k.spectrum.len()));
            assert!((images - series).abs() < 1e-6 * series.abs().max(1e-3), "{z} {zp}: {images} vs {series}");
        }
    }

    #[test]
    fn residue_form_matches_series_form() {
        let k = standard_kernel().series_only();
        for &(z, zp, t) in &[(0.3, 4.1, 0.5), (2.0, 3.0, 1.0), (4.5, 0.2, 3.0)] {
            let a = k.g_z_series(z, zp, t, k.truncation);
            let b = k.g_z_residue(z, zp, t);
            assert!(((a - b) / a).abs() < 1e-10);
        }
    }

    #[test]
    fn transform_matches_entire_resolvent_form() {
        let m = SlabModel::new(1.7, 2.0, 0.3, 1.4, 0.0);
        for &(z, zp) in &[(0.2, 1.1), (1.9, 0.4), (1.0, 1.0)] {
            for &s in &[Complex64::new(0.7, 0.0), Complex64::new(0.2, 3.0), Complex64::new(-0.1, -5.0)] {
                let beta = (s / m.alpha).sqrt();
                let (lo, hi) = if z <= zp { (z, zp) } else { (zp, z) };
                let u = (beta * lo).cosh() + m.h1 / beta * (beta * lo).sinh();
                let v = (beta * (m.w - hi)).cosh() + m.h2 / beta * (beta * (m.w - hi)).sinh();
                let d = (m.h1 + m.h2) * (beta * m.w).cosh() + (beta + m.h1 * m.h2 / beta) * (beta * m.w).sinh();
                let direct = u * v / (m.alpha * d);
                let got = g_z_transform(&m, z, zp, s);
                assert!((got - direct).norm() < 1e-12 * direct.norm());
            }
        }
    }

    #[test]
    fn late_time_decay_follows_fundamental_mode() {
        let k = standard_kernel();
        let ratio = k.g_z(2.0, 3.0, 10.0).ln() - k.g_z(2.0, 3.0, 12.0).ln();
        let expected = 2.0 * k.spectrum.modes[0].s_over_alpha;
        assert!(((ratio - expected) / expected).abs() < 1e-3);
    }

    #[test]
    fn z_kernel_conserves_heat_when_insulated() {
        let m = SlabModel::new(1.0, 2.0, 1e-9, 1e-9, 0.0);
        let k = KernelEval::new(&m, 200).unwrap();
        for t in [0.01, 0.3, 2.0] {
            let q = integrate(|z| k.g_z(z, 0.7, t), 0.0, m.w, Tolerance::new(1e-13, 1e-12));
            assert!((q.value - 1.0).abs() < 1e-6, "t = {t}: {}", q.value);
        }
    }

    #[test]
    fn tail_estimate_flags_short_series() {
        let k = standard_kernel().series_only().with_truncation(5).unwrap();
        assert!(k.g_z_checked(2.5, 2.5, 0.05).truncated);
        assert!(!k.g_z_checked(2.5, 2.5, 20.0).truncated);
    }
}
