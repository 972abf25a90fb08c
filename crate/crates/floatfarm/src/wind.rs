//! Free-stream wind: slowly varying gusts built from splined random knots.

use crate::spline::CubicSpline;
use crate::{Error, Result, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Spacing of the random velocity knots, s.
pub const KNOT_SPACING: f64 = 600.0;
/// Resolution of the exported sample grid, s.
pub const SAMPLE_SPACING: f64 = 0.1;

/// Parameters of one stochastic wind realization.
#[derive(Debug, Clone, Copy)]
pub struct WindConfig {
    /// Mean free-stream velocity, m/s.
    pub base: Vec2,
    /// Perturbation magnitude as a fraction of |base| (0.05 = 5 %).
    pub sigma: f64,
    /// Length of the series, s.
    pub duration: f64,
    pub seed: u64,
}

impl WindConfig {
    pub fn steady(base: Vec2, duration: f64) -> Self {
        WindConfig { base, sigma: 0.0, duration, seed: 0 }
    }
}

/// A realized wind series: perturbed knots every 600 s joined by natural cubic
/// splines, sampled anywhere inside `[0, duration]`.
#[derive(Debug, Clone)]
pub struct WindSeries {
    pub knot_times: Vec<f64>,
    pub knots: Vec<Vec2>,
    duration: f64,
    spline_x: CubicSpline,
    spline_y: CubicSpline,
}

/// Draws knot perturbations with the config seed and splines them. Each knot
/// component lies within `base ± sigma * |base|`.
pub fn generate_wind_series(cfg: &WindConfig) -> Result<WindSeries> {
    if !(cfg.duration > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "wind series duration {} s must be positive",
            cfg.duration
        )));
    }
    if !(0.0..=1.0).contains(&cfg.sigma) {
        return Err(Error::InvalidConfig(format!(
            "wind sigma {} must lie in [0, 1]",
            cfg.sigma
        )));
    }
    let segments = (cfg.duration / KNOT_SPACING).ceil().max(1.0) as usize;
    let bound = cfg.sigma * cfg.base.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut knot_times = Vec::with_capacity(segments + 1);
    let mut knots = Vec::with_capacity(segments + 1);
    for k in 0..=segments {
        knot_times.push(k as f64 * KNOT_SPACING);
        let px = (2.0 * rng.gen::<f64>() - 1.0) * bound;
        let py = (2.0 * rng.gen::<f64>() - 1.0) * bound;
        knots.push(cfg.base + Vec2::new(px, py));
    }
    let xs: Vec<f64> = knots.iter().map(|v| v.x).collect();
    let ys: Vec<f64> = knots.iter().map(|v| v.y).collect();
    Ok(WindSeries {
        spline_x: CubicSpline::natural(&knot_times, &xs)?,
        spline_y: CubicSpline::natural(&knot_times, &ys)?,
        knot_times,
        knots,
        duration: cfg.duration,
    })
}

/// Interpolated wind at time `t`, exact at knots. Times outside `[0, duration]`
/// clamp to the nearest endpoint with a warning.
pub fn sample_wind(series: &WindSeries, t: f64) -> Vec2 {
    let t = if (0.0..=series.duration).contains(&t) {
        t
    } else {
        log::warn!("wind sampled at t = {t} s outside [0, {}]; clamping", series.duration);
        t.clamp(0.0, series.duration)
    };
    Vec2::new(series.spline_x.eval(t), series.spline_y.eval(t))
}

impl WindSeries {
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Writes the series on the 0.1 s export grid as `t_s,vx_ms,vy_ms`.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "t_s,vx_ms,vy_ms")?;
        let steps = (self.duration / SAMPLE_SPACING).round() as usize;
        for k in 0..=steps {
            let t = (k as f64 * SAMPLE_SPACING).min(self.duration);
            let v = sample_wind(self, t);
            writeln!(out, "{t},{},{}", v.x, v.y)?;
        }
        Ok(())
    }
}
