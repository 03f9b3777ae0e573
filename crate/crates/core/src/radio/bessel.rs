use std::f64::consts::PI;

/// Bessel function of the first kind, order zero.
///
/// Evaluates `J0(x) = (1/pi) * int_0^pi cos(x sin t) dt` with the trapezoid
/// rule, which converges geometrically for this periodic integrand.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 64 + (x.abs().ceil() as usize) * 2;
    let h = PI / n as f64;
    let mut acc = 0.5 * (1.0 + (x * (PI).sin()).cos());
    for k in 1..n {
        acc += (x * (k as f64 * h).sin()).cos();
    }
    acc * h / PI
}

/// Gauss-Markov correlation of the Jakes model: `J0(2 pi f_d T)`.
pub fn jakes_correlation(doppler_hz: f64, slot_s: f64) -> f64 {
    bessel_j0(2.0 * PI * doppler_hz * slot_s)
}
