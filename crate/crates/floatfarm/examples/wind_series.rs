//! Generates a perturbed free-stream wind realization and prints its shape:
//! spline knots every 10 minutes, smooth 0.1 s samples in between.

use floatfarm::vec2::Vec2;
use floatfarm::wind::{generate_wind_series, sample_wind, WindConfig, KNOT_SPACING};

fn main() -> floatfarm::Result<()> {
    let cfg = WindConfig {
        base: Vec2::new(8.0, 0.0),
        sigma: 0.10,
        duration: 3600.0,
        seed: 42,
    };
    let series = generate_wind_series(&cfg)?;

    println!("base wind ({}, {}) m/s, sigma {:.0}%, seed {}", cfg.base.x, cfg.base.y, 100.0 * cfg.sigma, cfg.seed);
    println!("\nknots every {KNOT_SPACING} s:");
    let knots = (cfg.duration / KNOT_SPACING as f64) as usize + 1;
    for k in 0..knots {
        let t = k as f64 * KNOT_SPACING as f64;
        let w = sample_wind(&series, t);
        println!("  t = {t:6.0} s: ({:5.2}, {:5.2}) m/s, speed {:5.2}", w.x, w.y, w.norm());
    }

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut mean = 0.0;
    let samples = 36_000;
    for k in 0..=samples {
        let speed = sample_wind(&series, cfg.duration * k as f64 / samples as f64).norm();
        min = min.min(speed);
        max = max.max(speed);
        mean += speed;
    }
    mean /= (samples + 1) as f64;
    println!("\nsampled speed over the hour: min {min:.2}, mean {mean:.2}, max {max:.2} m/s");
    println!("(the spline can overshoot the knot band slightly between knots)");
    Ok(())
}
