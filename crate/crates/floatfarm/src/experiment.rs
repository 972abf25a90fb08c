//! Closed-loop experiment harness: greedy and DEMPC runs over a shared wind
//! realization, energy accounting, CSV/JSON export, and parameter sweeps.

use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::dempc::{ControllerConfig, DempcController, PeriodRecord};
use crate::farm::{make_row_farm, FarmConfig, MooringSpec, TurbineInput, TurbineState, TurbineSpec};
use crate::platform::power_output;
use crate::surrogate::{NextStateModel, SurrogateModel};
use crate::vec2::Vec2;
use crate::wake::{effective_velocity, settle_farm, step_farm, FarmState, PRE_ROLL_SECONDS};
use crate::wind::{generate_wind_series, sample_wind, WindConfig};
use crate::{Error, Result, SAMPLING_PERIOD, SIM_DT};

/// Mean free-stream speed every experiment runs at, m/s.
pub const WIND_BASE_SPEED: f64 = 8.0;
/// Row spacing between turbines in rotor diameters.
pub const ROW_SPACING_DIAMETERS: f64 = 7.0;
/// Environment variable bounding the sweep worker pool.
pub const WORKERS_ENV: &str = "FLOATFARM_WORKERS";

/// Who chooses the inputs each sampling period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// Every turbine holds a = 1/3, yaw = 0.
    Greedy,
    /// Distributed economic MPC over trained surrogate models.
    Dempc,
}

impl ControlMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlMode::Greedy => "greedy",
            ControlMode::Dempc => "dempc",
        }
    }
}

/// Everything that defines one reproducible closed-loop run.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentSpec {
    pub mode: ControlMode,
    pub farm_size: usize,
    /// Wind perturbation magnitude as a fraction of the base speed.
    pub sigma: f64,
    /// Logged duration, s; must be a whole number of sampling periods.
    pub duration: f64,
    pub wind_seed: u64,
    pub controller_seed: u64,
}

impl ExperimentSpec {
    pub fn new(mode: ControlMode, farm_size: usize, sigma: f64, seed: u64) -> Self {
        ExperimentSpec {
            mode,
            farm_size,
            sigma,
            duration: 3600.0,
            wind_seed: seed,
            controller_seed: seed + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.farm_size == 0 {
            return Err(Error::InvalidConfig("farm size must be positive".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig("sigma must be finite and non-negative".into()));
        }
        let periods = (self.duration / SAMPLING_PERIOD).round();
        if periods < 1.0 || (self.duration - periods * SAMPLING_PERIOD).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "duration {} s is not a whole number of {} s periods",
                self.duration, SAMPLING_PERIOD
            )));
        }
        Ok(())
    }

    /// The standard row farm this spec runs on.
    pub fn build_farm(&self) -> Result<FarmConfig> {
        make_row_farm(
            self.farm_size,
            ROW_SPACING_DIAMETERS,
            TurbineSpec::default(),
            MooringSpec::default(),
        )
    }
}

/// Everything recorded during a run, sampled every sampling period.
#[derive(Debug, Clone)]
pub struct SimulationLog {
    pub spec: ExperimentSpec,
    /// Neutral platform positions, for displacement statistics.
    pub neutral: Vec<Vec2>,
    /// Sample times, `duration / sampling_period + 1` entries from 0.
    pub times: Vec<f64>,
    /// Platform states at each sample, `[sample][turbine]`.
    pub states: Vec<Vec<TurbineState>>,
    /// Inputs active from each sample on; the final row repeats the last
    /// committed inputs so every sample has a full record.
    pub inputs: Vec<Vec<TurbineInput>>,
    /// Instantaneous per-turbine electrical power at each sample, W.
    pub powers: Vec<Vec<f64>>,
    /// Free-stream wind at each sample.
    pub wind: Vec<Vec2>,
    /// Controller records per period; empty when the mode is greedy.
    pub controller: Vec<Vec<PeriodRecord>>,
    /// Trapezoidal integral of total power over the samples, J.
    pub total_energy: f64,
}

impl SimulationLog {
    pub fn total_power(&self, sample: usize) -> f64 {
        self.powers[sample].iter().sum()
    }

    /// Fraction of periods whose final iteration left a conflict flag raised
    /// on any agent. Zero for greedy logs.
    pub fn conflict_rate(&self) -> f64 {
        if self.controller.is_empty() {
            return 0.0;
        }
        let conflicted = self
            .controller
            .iter()
            .filter(|records| records.iter().any(|r| r.conflict))
            .count();
        conflicted as f64 / self.controller.len() as f64
    }

    /// Per-turbine mean downwind displacement from neutral over all samples.
    pub fn mean_downwind_displacement(&self) -> Vec<f64> {
        self.column_mean(|s, i| s.x - self.neutral[i].x)
    }

    /// Per-turbine mean |crosswind displacement| from neutral.
    pub fn mean_abs_crosswind(&self) -> Vec<f64> {
        self.column_mean(|s, i| (s.y - self.neutral[i].y).abs())
    }

    pub fn final_crosswind(&self) -> Vec<f64> {
        let last = self.states.last().expect("log has samples");
        last.iter()
            .enumerate()
            .map(|(i, s)| s.y - self.neutral[i].y)
            .collect()
    }

    fn column_mean(&self, f: impl Fn(&TurbineState, usize) -> f64) -> Vec<f64> {
        let n = self.neutral.len();
        let mut sums = vec![0.0; n];
        for row in &self.states {
            for (i, s) in row.iter().enumerate() {
                sums[i] += f(s, i);
            }
        }
        sums.iter().map(|s| s / self.states.len() as f64).collect()
    }
}

fn trapezoid(total_powers: &[f64], dt: f64) -> f64 {
    total_powers
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]) * dt)
        .sum()
}

fn sample_powers(
    farm: &FarmState,
    inputs: &[TurbineInput],
    wind: Vec2,
    config: &FarmConfig,
) -> Result<Vec<f64>> {
    (0..config.len())
        .map(|i| {
            let v_eff = effective_velocity(&farm.wake, i, &farm.states, wind, config);
            let state = &farm.states[i];
            let apparent = v_eff - Vec2::new(state.vx, state.vy);
            power_output(apparent, &inputs[i], &config.turbines[i].spec)
        })
        .collect()
}

/// Runs the closed loop: greedy settling pre-roll, then `duration` seconds of
/// the chosen controller at the sampling period, logging every period.
/// `models` is required for DEMPC mode and ignored for greedy.
pub fn run_closed_loop<M: NextStateModel + Clone>(
    spec: &ExperimentSpec,
    config: &FarmConfig,
    models: Option<&[M]>,
) -> Result<SimulationLog> {
    spec.validate()?;
    if config.len() != spec.farm_size {
        return Err(Error::InvalidConfig(format!(
            "spec says {} turbines but farm has {}",
            spec.farm_size,
            config.len()
        )));
    }
    let n = spec.farm_size;
    let periods = (spec.duration / SAMPLING_PERIOD).round() as usize;

    let wind_cfg = WindConfig {
        base: Vec2::new(WIND_BASE_SPEED, 0.0),
        sigma: spec.sigma,
        duration: spec.duration,
        seed: spec.wind_seed,
    };
    let series = generate_wind_series(&wind_cfg)?;

    // Settle under the hour's opening wind so t = 0 starts quasi-steady.
    let mut farm = settle_farm(config, sample_wind(&series, 0.0), PRE_ROLL_SECONDS)?;

    let mut controller = match spec.mode {
        ControlMode::Greedy => None,
        ControlMode::Dempc => {
            let models = models.ok_or_else(|| {
                Error::InvalidConfig("dempc mode requires surrogate models".into())
            })?;
            Some(DempcController::new(
                models.to_vec(),
                config.clone(),
                ControllerConfig::default(),
                spec.controller_seed,
            )?)
        }
    };

    let mut log = SimulationLog {
        spec: *spec,
        neutral: config.turbines.iter().map(|t| t.neutral).collect(),
        times: Vec::with_capacity(periods + 1),
        states: Vec::with_capacity(periods + 1),
        inputs: Vec::with_capacity(periods + 1),
        powers: Vec::with_capacity(periods + 1),
        wind: Vec::with_capacity(periods + 1),
        controller: Vec::with_capacity(periods),
        total_energy: 0.0,
    };

    let greedy_inputs = vec![TurbineInput::greedy(); n];
    let mut last_inputs = greedy_inputs.clone();
    let steps_per_period = (SAMPLING_PERIOD / SIM_DT).round() as usize;

    for k in 0..periods {
        let t = k as f64 * SAMPLING_PERIOD;
        let wind_now = sample_wind(&series, t);
        let inputs = match controller.as_mut() {
            None => greedy_inputs.clone(),
            Some(ctl) => {
                let records = ctl.coordinate_sampling_period(&farm.states)?;
                let committed = records.iter().map(|r| r.committed).collect();
                log.controller.push(records);
                committed
            }
        };
        log.times.push(t);
        log.states.push(farm.states.clone());
        log.powers.push(sample_powers(&farm, &inputs, wind_now, config)?);
        log.wind.push(wind_now);
        log.inputs.push(inputs.clone());
        for s in 0..steps_per_period {
            let tw = t + s as f64 * SIM_DT;
            step_farm(&mut farm, &inputs, sample_wind(&series, tw), SIM_DT, config)?;
        }
        last_inputs = inputs;
    }

    let wind_end = sample_wind(&series, spec.duration);
    log.times.push(spec.duration);
    log.states.push(farm.states.clone());
    log.powers.push(sample_powers(&farm, &last_inputs, wind_end, config)?);
    log.wind.push(wind_end);
    log.inputs.push(last_inputs);

    let totals: Vec<f64> = (0..log.times.len()).map(|k| log.total_power(k)).collect();
    log.total_energy = trapezoid(&totals, SAMPLING_PERIOD);
    Ok(log)
}

/// Greedy run; no models involved.
pub fn run_greedy(spec: &ExperimentSpec, config: &FarmConfig) -> Result<SimulationLog> {
    let spec = ExperimentSpec { mode: ControlMode::Greedy, ..*spec };
    run_closed_loop::<SurrogateModel>(&spec, config, None)
}

/// Percentage energy gain of a DEMPC run over its paired greedy run.
pub fn energy_gain(dempc: &SimulationLog, greedy: &SimulationLog) -> Result<f64> {
    if dempc.times.len() != greedy.times.len()
        || dempc.spec.duration != greedy.spec.duration
        || dempc.spec.wind_seed != greedy.spec.wind_seed
    {
        return Err(Error::InvalidConfig(
            "energy gain needs paired runs with matching duration and wind seed".into(),
        ));
    }
    Ok(100.0 * (dempc.total_energy - greedy.total_energy) / greedy.total_energy)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    mode: &'a str,
    farm_size: usize,
    sigma: f64,
    duration_s: f64,
    wind_seed: u64,
    controller_seed: u64,
    samples: usize,
    total_energy_j: f64,
    mean_total_power_w: f64,
    conflict_rate: f64,
    final_crosswind_m: Vec<f64>,
    mean_downwind_displacement_m: Vec<f64>,
    mean_abs_crosswind_m: Vec<f64>,
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    let path = dir.join(name);
    fs::File::create(&path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn finish_file(mut out: impl IoWrite, path: &Path) -> Result<()> {
    out.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes states.csv, power.csv, controller.csv, wind.csv, and summary.json
/// into `dir`. Floats are printed with the shortest round-trip formatting, so
/// identical logs export byte-identical files.
pub fn export_run(log: &SimulationLog, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let n = log.neutral.len();
    let wrap = |e: std::io::Error, name: &str| Error::io(dir.join(name).display().to_string(), e);

    let mut states = std::io::BufWriter::new(create(dir, "states.csv")?);
    (|| -> std::io::Result<()> {
        write!(states, "t_s")?;
        for i in 0..n {
            write!(states, ",x{i}_m,y{i}_m,vx{i}_ms,vy{i}_ms")?;
        }
        writeln!(states)?;
        for (k, row) in log.states.iter().enumerate() {
            write!(states, "{}", log.times[k])?;
            for s in row {
                write!(states, ",{},{},{},{}", s.x, s.y, s.vx, s.vy)?;
            }
            writeln!(states)?;
        }
        Ok(())
    })()
    .map_err(|e| wrap(e, "states.csv"))?;
    finish_file(states, &dir.join("states.csv"))?;

    let mut power = std::io::BufWriter::new(create(dir, "power.csv")?);
    (|| -> std::io::Result<()> {
        write!(power, "t_s")?;
        for i in 0..n {
            write!(power, ",p{i}_w")?;
        }
        writeln!(power, ",total_w")?;
        for (k, row) in log.powers.iter().enumerate() {
            write!(power, "{}", log.times[k])?;
            for p in row {
                write!(power, ",{p}")?;
            }
            writeln!(power, ",{}", log.total_power(k))?;
        }
        Ok(())
    })()
    .map_err(|e| wrap(e, "power.csv"))?;
    finish_file(power, &dir.join("power.csv"))?;

    let mut wind = std::io::BufWriter::new(create(dir, "wind.csv")?);
    (|| -> std::io::Result<()> {
        writeln!(wind, "t_s,vx_ms,vy_ms")?;
        for (k, w) in log.wind.iter().enumerate() {
            writeln!(wind, "{},{},{}", log.times[k], w.x, w.y)?;
        }
        Ok(())
    })()
    .map_err(|e| wrap(e, "wind.csv"))?;
    finish_file(wind, &dir.join("wind.csv"))?;

    let mut ctl = std::io::BufWriter::new(create(dir, "controller.csv")?);
    (|| -> std::io::Result<()> {
        writeln!(
            ctl,
            "period,agent,level,naive_cost,informed_cost,conflict,yaw_rad,\
             xs_x_m,xs_y_m,xs_vx_ms,xs_vy_ms,terminal_pos_m,terminal_vel_ms"
        )?;
        for (period, records) in log.controller.iter().enumerate() {
            for r in records {
                writeln!(
                    ctl,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    period,
                    r.agent,
                    r.level,
                    r.naive_cost,
                    r.informed_cost,
                    u8::from(r.conflict),
                    r.committed.yaw,
                    r.x_s.x,
                    r.x_s.y,
                    r.x_s.vx,
                    r.x_s.vy,
                    r.terminal_pos_residual,
                    r.terminal_vel_residual
                )?;
            }
        }
        Ok(())
    })()
    .map_err(|e| wrap(e, "controller.csv"))?;
    finish_file(ctl, &dir.join("controller.csv"))?;

    let summary = RunSummary {
        mode: log.spec.mode.as_str(),
        farm_size: log.spec.farm_size,
        sigma: log.spec.sigma,
        duration_s: log.spec.duration,
        wind_seed: log.spec.wind_seed,
        controller_seed: log.spec.controller_seed,
        samples: log.times.len(),
        total_energy_j: log.total_energy,
        mean_total_power_w: log.total_energy / log.spec.duration,
        conflict_rate: log.conflict_rate(),
        final_crosswind_m: log.final_crosswind(),
        mean_downwind_displacement_m: log.mean_downwind_displacement(),
        mean_abs_crosswind_m: log.mean_abs_crosswind(),
    };
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Conventional file name for a cached surrogate model.
pub fn model_file_name(farm_size: usize, turbine: usize) -> String {
    format!("farm{farm_size}_turbine{turbine}.json")
}

/// Loads the cached surrogate models for a farm size from `dir`.
pub fn load_models(dir: &Path, farm_size: usize) -> Result<Vec<SurrogateModel>> {
    (0..farm_size)
        .map(|i| {
            let path = dir.join(model_file_name(farm_size, i));
            if !path.exists() {
                return Err(Error::MissingModel(path.display().to_string()));
            }
            SurrogateModel::load(&path)
        })
        .collect()
}

/// Which parameter a sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Wind perturbation magnitudes 5..20 % on a 1×2 farm.
    Sigma,
    /// Farm sizes 2..5 at 5 % perturbation.
    Size,
}

/// The (farm size, sigma) grid a sweep visits.
pub fn sweep_grid(axis: SweepAxis) -> Vec<(usize, f64)> {
    match axis {
        SweepAxis::Sigma => [0.05, 0.10, 0.15, 0.20].iter().map(|&s| (2, s)).collect(),
        SweepAxis::Size => (2..=5).map(|n| (n, 0.05)).collect(),
    }
}

/// One paired greedy/DEMPC comparison of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub farm_size: usize,
    pub sigma: f64,
    pub energy_greedy_j: f64,
    pub energy_dempc_j: f64,
    pub gain_percent: f64,
    /// Mean over turbines and samples of |crosswind displacement|, m.
    pub mean_abs_crosswind_m: f64,
    pub conflict_rate: f64,
}

/// Runs paired greedy/DEMPC comparisons over the grid, in parallel. Seeds
/// come from the template, so every point sees the same base wind draws
/// scaled to its own sigma. `models_for` supplies surrogates per farm size; a
/// failing point is reported in place and the sweep continues.
pub fn run_sweep<M, F>(
    template: &ExperimentSpec,
    axis: SweepAxis,
    models_for: F,
) -> Vec<Result<SweepPoint>>
where
    M: NextStateModel + Clone + Send + Sync,
    F: Fn(usize) -> Result<Vec<M>> + Sync,
{
    let grid = sweep_grid(axis);
    let work = |&(farm_size, sigma): &(usize, f64)| -> Result<SweepPoint> {
        let spec = ExperimentSpec {
            mode: ControlMode::Dempc,
            farm_size,
            sigma,
            ..*template
        };
        let config = spec.build_farm()?;
        let models = models_for(farm_size)?;
        let greedy = run_greedy(&spec, &config)?;
        let dempc = run_closed_loop(&spec, &config, Some(models.as_slice()))?;
        let gain = energy_gain(&dempc, &greedy)?;
        let crosswind = dempc.mean_abs_crosswind();
        Ok(SweepPoint {
            farm_size,
            sigma,
            energy_greedy_j: greedy.total_energy,
            energy_dempc_j: dempc.total_energy,
            gain_percent: gain,
            mean_abs_crosswind_m: crosswind.iter().sum::<f64>() / crosswind.len() as f64,
            conflict_rate: dempc.conflict_rate(),
        })
    };
    match workers_from_env() {
        Some(workers) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("sweep worker pool");
            pool.install(|| grid.par_iter().map(work).collect())
        }
        None => grid.par_iter().map(work).collect(),
    }
}

fn workers_from_env() -> Option<usize> {
    let raw = std::env::var(WORKERS_ENV).ok()?;
    match raw.parse::<usize>() {
        Ok(w) if w > 0 => Some(w),
        _ => {
            log::warn!("ignoring {WORKERS_ENV}={raw}; expected a positive integer");
            None
        }
    }
}

/// Writes the sweep summary CSV; failed points become rows with an error
/// column instead of aborting the file.
pub fn write_sweep_csv(points: &[Result<SweepPoint>], path: &Path) -> Result<()> {
    let mut out = String::from(
        "farm_size,sigma,energy_greedy_j,energy_dempc_j,gain_percent,\
         mean_abs_crosswind_m,conflict_rate,error\n",
    );
    for point in points {
        match point {
            Ok(p) => out.push_str(&format!(
                "{},{},{},{},{},{},{},\n",
                p.farm_size,
                p.sigma,
                p.energy_greedy_j,
                p.energy_dempc_j,
                p.gain_percent,
                p.mean_abs_crosswind_m,
                p.conflict_rate
            )),
            Err(e) => out.push_str(&format!(",,,,,,,\"{e}\"\n")),
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}
