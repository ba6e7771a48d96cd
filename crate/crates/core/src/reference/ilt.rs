//! Numerical inversion of Laplace transforms along a vertical line.
//!
//! Both methods sample F on `Re s = ε` at the frequencies of a Fourier
//! series with period 2T and accelerate the slowly converging sum:
//! the quotient-difference continued fraction of de Hoog, Knight and
//! Stokes, or Wynn's epsilon table on the partial sums.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IltMethod {
    BromwichLine,
    DubnerAbate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IltPlan {
    pub method: IltMethod,
    /// Contour abscissa; `None` picks `ε = ln(1/tol)/(2T)`.
    #[serde(default)]
    pub abscissa: Option<f64>,
    /// Number of samples of F on the line.
    pub nodes: usize,
    /// Half-period T as a multiple of t.
    pub period: f64,
    /// Target accuracy used for the automatic abscissa.
    pub tolerance: f64,
    /// Largest acceptable doubling estimate relative to max(1, |f|).
    pub accept: f64,
}

impl Default for IltPlan {
    fn default() -> Self {
        IltPlan {
            method: IltMethod::BromwichLine,
            abscissa: None,
            nodes: 65,
            period: 2.0,
            tolerance: 1e-12,
            accept: 1e-6,
        }
    }
}

impl IltPlan {
    pub fn dubner_abate() -> Self {
        IltPlan {
            method: IltMethod::DubnerAbate,
            nodes: 257,
            ..IltPlan::default()
        }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn half_period(&self, t: f64) -> f64 {
        self.period * t
    }

    pub fn abscissa_for(&self, t: f64) -> f64 {
        self.abscissa
            .unwrap_or_else(|| -self.tolerance.ln() / (2.0 * self.half_period(t)))
    }

    /// Largest |Im s| sampled.
    pub fn radius(&self, t: f64) -> f64 {
        (self.nodes - 1) as f64 * std::f64::consts::PI / self.half_period(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 64 {
            return Err(Error::InvalidRequest(format!(
                "ILT needs at least 64 nodes, got {}",
                self.nodes
            )));
        }
        if let Some(e) = self.abscissa {
            if !(e > 0.0) {
                return Err(Error::InvalidRequest("ILT abscissa must be positive".into()));
            }
        }
        if !(self.period > 0.5 && self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidRequest("ILT period or tolerance out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IltValue {
    pub value: f64,
    /// |f(N) − f(2N)|, the change under node doubling.
    pub error: f64,
    pub abscissa: f64,
}

fn samples<F: Fn(Complex64) -> Complex64>(f: &F, eps: f64, big_t: f64, n: usize) -> Vec<Complex64> {
    let step = std::f64::consts::PI / big_t;
    (0..n).map(|k| f(Complex64::new(eps, k as f64 * step))).collect()
}

/// de Hoog–Knight–Stokes continued fraction on `2M + 1` samples.
fn de_hoog(a: &[Complex64], t: f64, big_t: f64) -> Complex64 {
    let m = (a.len() - 1) / 2;
    let mut a = a[..2 * m + 1].to_vec();
    a[0] *= 0.5;
    let zero = Complex64::new(0.0, 0.0);
    let mut d = vec![zero; 2 * m + 1];
    d[0] = a[0];
    let mut q: Vec<Complex64> = (0..2 * m).map(|i| a[i + 1] / a[i]).collect();
    let mut e = vec![zero; 2 * m + 1];
    for r in 1..=m {
        let len = 2 * m - 2 * r + 1;
        let mut e_new = vec![zero; len];
        for i in 0..len {
            e_new[i] = q[i + 1] - q[i] + e[i + 1];
        }
        d[2 * r - 1] = -q[0];
        d[2 * r] = -e_new[0];
        if r < m {
            let mut q_new = vec![zero; len - 1];
            for i in 0..len - 1 {
                q_new[i] = q[i + 1] * e_new[i + 1] / e_new[i];
            }
            q = q_new;
        }
        e = e_new;
    }
    let z = Complex64::new(0.0, std::f64::consts::PI * t / big_t).exp();
    let (mut a_prev, mut a_cur) = (zero, d[0]);
    let (mut b_prev, mut b_cur) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    for &dn in &d[1..] {
        let a_next = a_cur + dn * z * a_prev;
        let b_next = b_cur + dn * z * b_prev;
        a_prev = a_cur;
        b_prev = b_cur;
        a_cur = a_next;
        b_cur = b_next;
        // Rescale to keep the recurrences bounded.
        let scale = b_cur.norm();
        if scale > 1e100 || (scale < 1e-100 && scale > 0.0) {
            a_prev /= scale;
            b_prev /= scale;
            a_cur /= scale;
            b_cur /= scale;
        }
    }
    a_cur / b_cur
}

/// Wynn epsilon extrapolation of the partial sums of the Fourier series.
fn wynn(a: &[Complex64], t: f64, big_t: f64) -> f64 {
    let step = std::f64::consts::PI * t / big_t;
    let mut partial = Vec::with_capacity(a.len());
    let mut sum = 0.5 * a[0].re;
    partial.push(sum);
    for (k, ak) in a.iter().enumerate().skip(1) {
        sum += (ak * Complex64::new(0.0, k as f64 * step).exp()).re;
        partial.push(sum);
    }
    // Accelerate the tail only; the early sums are far from the limit.
    let tail = &partial[partial.len().saturating_sub(41)..];
    let mut prev = vec![0.0; tail.len() + 1];
    let mut cur = tail.to_vec();
    let mut best = *tail.last().expect("non-empty");
    let mut column = 0;
    while cur.len() > 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let diff = cur[i + 1] - cur[i];
                let back = prev[i + 1];
                if diff == 0.0 {
                    f64::INFINITY
                } else {
                    back + 1.0 / diff
                }
            })
            .collect();
        column += 1;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        if column % 2 == 0 {
            best = *next.last().expect("non-empty");
        }
        prev = cur;
        cur = next;
    }
    best
}

fn invert_once<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, plan: &IltPlan, nodes: usize) -> f64 {
    let big_t = plan.half_period(t);
    let eps = plan.abscissa_for(t);
    let a = samples(f, eps, big_t, nodes);
    let series = match plan.method {
        IltMethod::BromwichLine => de_hoog(&a, t, big_t).re,
        IltMethod::DubnerAbate => wynn(&a, t, big_t),
    };
    (eps * t).exp() / big_t * series
}

/// Inverse transform of `transform` at `t`, with the change under
/// doubling the node count as the error estimate.
pub fn numerical_ilt<F: Fn(Complex64) -> Complex64>(transform: F, t: f64, plan: &IltPlan) -> Result<IltValue> {
    plan.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain {
            what: "ILT time",
            value: t,
        });
    }
    let coarse = invert_once(&transform, t, plan, plan.nodes);
    let fine = invert_once(&transform, t, plan, 2 * plan.nodes - 1);
    let error = (fine - coarse).abs();
    if !fine.is_finite() || error > plan.accept * fine.abs().max(1.0) {
        return Err(Error::NonConvergence {
            method: "numerical_ilt",
            detail: format!("t = {t}: {coarse} vs {fine} under node doubling"),
        });
    }
    Ok(IltValue {
        value: fine,
        error,
        abscissa: plan.abscissa_for(t),
    })
}
