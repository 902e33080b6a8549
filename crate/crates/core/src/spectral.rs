//! Trigonometric collocation helpers on one periodic cell.
//!
//! Coefficients are stored in FFT index order with the physical
//! normalization u(x) = sum_k c_k exp(i k kappa x), kappa = 2 pi / p.
//! Real fields keep conjugate symmetry; the Nyquist mode is always
//! zeroed, so truncation and padding commute with differentiation.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::sync::Arc;

pub struct CellTransform {
    pub m: usize,
    pub period: f64,
    pub kappa: f64,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
}

impl CellTransform {
    pub fn new(m: usize, period: f64) -> Self {
        assert!(m >= 4 && m % 2 == 0, "mode count must be even and >= 4");
        let mut planner = FftPlanner::new();
        Self {
            m,
            period,
            kappa: 2.0 * std::f64::consts::PI / period,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    /// Signed wavenumber index of FFT slot j.
    #[inline]
    pub fn wave_index(&self, j: usize) -> i64 {
        if j <= self.m / 2 {
            j as i64
        } else {
            j as i64 - self.m as i64
        }
    }

    /// Physical coefficients from real samples at x_j = j p / m.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.m);
        let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.fwd.process(&mut buf);
        let scale = 1.0 / self.m as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        buf[self.m / 2] = Complex64::new(0.0, 0.0);
        buf
    }

    /// Real samples from physical coefficients.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.m);
        let mut buf = coeffs.to_vec();
        self.inv.process(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Coefficients of the m-th spatial derivative.
    pub fn deriv_coeffs(&self, coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let ik = Complex64::new(0.0, self.wave_index(j) as f64 * self.kappa);
                c * ik.powu(m as u32)
            })
            .collect()
    }

    /// Embed into a larger transform (zero padding) preserving wavenumbers.
    pub fn pad(&self, coeffs: &[Complex64], mp: usize) -> Vec<Complex64> {
        assert!(mp >= self.m);
        let mut out = vec![Complex64::new(0.0, 0.0); mp];
        let half = self.m / 2;
        out[..half].copy_from_slice(&coeffs[..half]);
        for j in 1..half {
            out[mp - j] = coeffs[self.m - j];
        }
        out
    }

    /// Truncate a larger coefficient set back to this resolution.
    pub fn truncate(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mp = coeffs.len();
        assert!(mp >= self.m);
        let mut out = vec![Complex64::new(0.0, 0.0); self.m];
        let half = self.m / 2;
        out[..half].copy_from_slice(&coeffs[..half]);
        for j in 1..half {
            out[self.m - j] = coeffs[mp - j];
        }
        out
    }
}

/// Evaluate the series (and derivative orders 0..=max_deriv) at the
/// uniform points x0 + j h, j < n_points, by rotating one phasor per
/// mode. Exact Fourier evaluation: no interpolation error beyond rounding.
pub fn eval_series_on_grid(
    coeffs: &[Complex64],
    kappa: f64,
    x0: f64,
    h: f64,
    n_points: usize,
    max_deriv: usize,
) -> Vec<Vec<f64>> {
    let m = coeffs.len();
    let half = m / 2;
    let mut out = vec![vec![0.0; n_points]; max_deriv + 1];
    for v in out[0].iter_mut() {
        *v = coeffs[0].re;
    }
    for k in 1..half {
        let c = coeffs[k];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let ikk = Complex64::new(0.0, k as f64 * kappa);
        let rot = (ikk * h).exp();
        let mut z = c * (ikk * x0).exp();
        let mut factors = Vec::with_capacity(max_deriv + 1);
        let mut f = Complex64::new(1.0, 0.0);
        for _ in 0..=max_deriv {
            factors.push(f);
            f *= ikk;
        }
        // conjugate pair folded in: u_d += 2 Re(z * (i k kappa)^d)
        for j in 0..n_points {
            for (d, fac) in factors.iter().enumerate() {
                let w = z * fac;
                out[d][j] += 2.0 * w.re;
            }
            z *= rot;
        }
    }
    out
}

/// Evaluate the series derivative of order `deriv` at a single point.
pub fn eval_series_at(coeffs: &[Complex64], kappa: f64, x: f64, deriv: usize) -> f64 {
    let m = coeffs.len();
    let half = m / 2;
    let mut acc = if deriv == 0 { coeffs[0].re } else { 0.0 };
    for k in 1..half {
        let c = coeffs[k];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let ikk = Complex64::new(0.0, k as f64 * kappa);
        let w = c * (ikk * x).exp() * ikk.powu(deriv as u32);
        acc += 2.0 * w.re;
    }
    acc
}
