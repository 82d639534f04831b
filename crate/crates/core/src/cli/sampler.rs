//! Reproducible sample points.
//!
//! The generator is splitmix64: the state advances by `0x9E3779B97F4A7C15`
//! and each output is the state passed through the usual xor-shift-multiply
//! finalizer. Doubles take the top 53 bits. Normals use Box–Muller on two
//! consecutive doubles, so a seed fixes the whole sample set on every
//! platform.

use crate::diffeo::Diffeo;
use crate::error::{FinjetError, Result};
use crate::finsler::PointOnSlit;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform direction on the unit sphere of `R^n`.
    pub fn direction(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.normal()).collect();
            let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if r > 1e-8 {
                return v.into_iter().map(|a| a / r).collect();
            }
        }
    }
}

/// Draws `count` points with `x` uniform in `bounds` and `y` a random
/// direction scaled into `y_shell`. Points where any map in `maps` cannot be
/// evaluated are skipped.
pub fn sample_points(
    rng: &mut SplitMix64,
    count: usize,
    bounds: &[[f64; 2]],
    y_shell: [f64; 2],
    maps: &[&Diffeo],
) -> Result<Vec<PointOnSlit>> {
    let n = bounds.len();
    if y_shell[0] <= 0.0 || y_shell[1] < y_shell[0] {
        return Err(FinjetError::Config(format!("y_shell must satisfy 0 < r0 <= r1, got {y_shell:?}")));
    }
    let mut out = Vec::with_capacity(count);
    let max_tries = 1000 * count.max(1);
    for _ in 0..max_tries {
        if out.len() == count {
            break;
        }
        let x: Vec<f64> = bounds.iter().map(|b| rng.uniform(b[0], b[1])).collect();
        let r = rng.uniform(y_shell[0], y_shell[1]);
        let y: Vec<f64> = rng.direction(n).into_iter().map(|v| v * r).collect();
        if maps.iter().all(|m| m.apply(&x).is_ok()) {
            out.push(PointOnSlit::new(x, y)?);
        }
    }
    if out.len() < count {
        return Err(FinjetError::Config(format!(
            "only {} of {count} sample points fall inside every map's domain",
            out.len()
        )));
    }
    Ok(out)
}
