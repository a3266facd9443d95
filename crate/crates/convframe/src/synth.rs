//! Deterministic synthetic test signals.
//!
//! Closed-form generators (no RNG) for the recurring test subjects in this
//! crate: three grayscale textures with distinct local structure —
//! directional stripes, piecewise-smooth shapes with hard edges, and a
//! busy mid-frequency texture — plus a 1-D piecewise-smooth signal.
//! Values lie in `[0, 255]`; the same arguments always produce the same
//! samples, which keeps image-based tests and demos reproducible without
//! shipping binary assets.

use std::f64::consts::TAU;

use crate::signal::{Signal, SignalShape};

fn generate_2d(h: usize, w: usize, f: impl Fn(f64, f64) -> f64) -> Signal {
    assert!(h > 0 && w > 0, "image dimensions must be positive");
    let mut values = Vec::with_capacity(h * w);
    for y in 0..h {
        let v = y as f64 / h as f64;
        for x in 0..w {
            let u = x as f64 / w as f64;
            values.push(f(v, u).clamp(0.0, 255.0));
        }
    }
    Signal::from_flat(values, SignalShape::TwoD { h, w }).expect("length matches shape")
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Oriented stripe texture: two stripe fields with different directions,
/// blended by a smooth but nearly binary region map, over gentle shading.
/// Local patches are strongly anisotropic — a few dominant directions.
pub fn striped_texture(h: usize, w: usize) -> Signal {
    generate_2d(h, w, |v, u| {
        let stripes_a = (TAU * (9.0 * u + 3.0 * v)).sin();
        let stripes_b = (TAU * (2.0 * u - 8.0 * v)).sin();
        let region = logistic((TAU * u + 1.3).sin() * (TAU * v - 0.7).cos() / 0.25);
        let shading = 20.0 * (TAU * v).sin() * (TAU * u).cos();
        128.0 + 55.0 * (region * stripes_a + (1.0 - region) * stripes_b) + shading
    })
}

/// Piecewise-smooth image: slow gradients with a bright disk and a dark
/// diagonal wedge cut by hard edges. Patches are smooth except along the
/// few contours.
pub fn edge_blobs(h: usize, w: usize) -> Signal {
    generate_2d(h, w, |v, u| {
        let mut val = 90.0 + 50.0 * v + 25.0 * (TAU * u).sin() * (TAU * v).sin();
        let disk = (u - 0.35).powi(2) + (v - 0.4).powi(2) < 0.04;
        if disk {
            val += 75.0 + 20.0 * (TAU * 5.0 * (u + v)).sin();
        }
        if u + 0.5 * v > 0.85 {
            val -= 55.0;
        }
        val
    })
}

/// Busy mid-frequency texture: several incommensurately oriented waves of
/// moderate amplitude over a slow base — isotropic "rolling" detail.
pub fn rolling_texture(h: usize, w: usize) -> Signal {
    generate_2d(h, w, |v, u| {
        128.0
            + 30.0 * (TAU * (5.0 * u + 2.0 * v) + 0.4).sin()
            + 25.0 * (TAU * (-3.0 * u + 6.0 * v) + 1.1).sin()
            + 18.0 * (TAU * (8.0 * u - 7.0 * v) + 2.0).sin()
            + 15.0 * (TAU * u + 0.3).sin()
            + 12.0 * (TAU * (12.0 * u + 11.0 * v)).sin()
    })
}

/// 1-D piecewise-smooth signal: four smooth segments (linear, wavy linear,
/// quadratic, linear) separated by jump discontinuities.
pub fn piecewise_smooth_1d(n: usize) -> Signal {
    assert!(n > 0, "signal length must be positive");
    let values = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let val = if t < 0.25 {
                60.0 + 480.0 * t
            } else if t < 0.5 {
                200.0 - 240.0 * (t - 0.25) + 15.0 * (12.0 * TAU * t).sin()
            } else if t < 0.75 {
                40.0 + 2400.0 * (t - 0.5).powi(2)
            } else {
                230.0 - 640.0 * (t - 0.75)
            };
            val.clamp(0.0, 255.0)
        })
        .collect();
    Signal::from_flat(values, SignalShape::OneD { n }).expect("length matches shape")
}
