//! Internal impedance of a solid round conductor.

use std::f64::consts::PI;

use crate::{Complex, MU0};

/// Ratio `I1(z) / I0(z)` of modified Bessel functions, by backward evaluation
/// of the continued fraction `I_{n}/I_{n-1} = 1 / (2n/z + I_{n+1}/I_n)`.
///
/// Stable for all complex `z` in the right half-plane, including the
/// `|z| >> 1` region where the power series loses all precision.
pub fn ratio_i1_i0(z: Complex) -> Complex {
    if z.norm() < 1e-8 {
        // I1/I0 ≈ z/2 − z³/16
        return z / 2.0 - z * z * z / 16.0;
    }
    let terms = (2.0 * z.norm()) as usize + 40;
    let inv_z = z.inv();
    let mut tail = Complex::new(0.0, 0.0);
    for n in (1..=terms).rev() {
        tail = (2.0 * n as f64 * inv_z + tail).inv();
    }
    tail
}

/// Per-unit-length internal impedance (Ω/m) of a solid round rod of radius
/// `a`, conductivity `sigma` and relative permeability `mu_r`, carrying AC
/// current at frequency `f`.
///
/// `z = m / (2π a σ) · I0(m a) / I1(m a)` with `m = sqrt(jωμσ)`. Tends to the
/// DC resistance plus the `μ/8π` internal inductance as `f → 0`, and to the
/// surface form [`rod_surface_impedance`] as `a/δ → ∞`.
pub fn rod_internal_impedance(a: f64, sigma: f64, mu_r: f64, f: f64) -> Complex {
    let r_dc = 1.0 / (PI * a * a * sigma);
    if f <= 0.0 {
        return Complex::new(r_dc, 0.0);
    }
    let omega = 2.0 * PI * f;
    let m = Complex::new(0.0, omega * MU0 * mu_r * sigma).sqrt();
    let x = m * a;
    if x.norm() < 1e-4 {
        return Complex::new(r_dc, omega * MU0 * mu_r / (8.0 * PI));
    }
    m / (2.0 * PI * a * sigma) / ratio_i1_i0(x)
}

/// High-frequency limit of the rod internal impedance: the current flows in a
/// surface layer one skin depth thick, `z = (1 + j) / (σ δ π d)`.
pub fn rod_surface_impedance(a: f64, sigma: f64, mu_r: f64, f: f64) -> Complex {
    let delta = 1.0 / (PI * f * MU0 * mu_r * sigma).sqrt();
    let r = 1.0 / (sigma * delta * 2.0 * PI * a);
    Complex::new(r, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Power series for `I_n(z)`, accurate for moderate `|z|`.
    fn bessel_i_series(n: u32, z: Complex) -> Complex {
        let half = z / 2.0;
        let mut term = half.powu(n);
        for k in 1..=n {
            term /= k as f64;
        }
        let mut sum = term;
        let q = half * half;
        for k in 1..200u32 {
            term *= q / (k as f64 * (k + n) as f64);
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    }

    #[test]
    fn continued_fraction_matches_series() {
        for &(re, im) in &[(0.3, 0.3), (1.0, 1.0), (2.0, 2.0), (3.5, 3.5), (0.1, 2.0), (5.0, 0.0)] {
            let z = Complex::new(re, im);
            let series = bessel_i_series(1, z) / bessel_i_series(0, z);
            let cf = ratio_i1_i0(z);
            assert!((series - cf).norm() < 1e-12 * series.norm(), "{z}: {series} vs {cf}");
        }
    }

    #[test]
    fn dc_limit() {
        let (a, sigma, mu_r) = (2.8e-3, 5.16e6, 300.0);
        let z = rod_internal_impedance(a, sigma, mu_r, 1e-3);
        let r_dc = 1.0 / (PI * a * a * sigma);
        assert!((z.re - r_dc).abs() < 1e-9 * r_dc);
        let l_int = MU0 * mu_r / (8.0 * PI);
        let omega = 2.0 * PI * 1e-3;
        assert!((z.im / omega - l_int).abs() < 1e-6 * l_int);
    }

    #[test]
    fn surface_limit() {
        let (a, sigma, mu_r) = (2.8e-3, 5.16e6, 300.0);
        let f = 1e5;
        let exact = rod_internal_impedance(a, sigma, mu_r, f);
        let surf = rod_surface_impedance(a, sigma, mu_r, f);
        // first correction is O(δ/a)
        assert!((exact - surf).norm() / surf.norm() < 0.01);
        assert!(exact.re > surf.re);
    }

    #[test]
    fn resistance_grows_with_frequency() {
        let mut last = 0.0;
        for f in [1.0, 10.0, 50.0, 200.0, 1e3, 1e4] {
            let r = rod_internal_impedance(2.8e-3, 5.16e6, 300.0, f).re;
            assert!(r >= last);
            last = r;
        }
    }
}
