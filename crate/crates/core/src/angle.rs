//! Angle bookkeeping on the circle.

use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float as _;

/// Fractional part in `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `theta` in `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta - TAU * (theta / TAU).floor();
    if r.is_nan() || (0.0..TAU).contains(&r) {
        r
    } else {
        0.0
    }
}

/// Distance between two angles along the circle, in `[0, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}
