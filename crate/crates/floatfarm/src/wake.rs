//! Lagrangian wake transport and the coupled farm time step.
//!
//! Every 2 s each rotor sheds a wake element carrying its current velocity
//! deficit. Elements ride downstream at the local advection speed, drift
//! crosswind with the ambient flow plus a decaying yaw-induced skew, widen
//! linearly, and dilute with the widening. Downstream rotors see the
//! root-sum-square of Gaussian-profiled deficits interpolated at their
//! position. Because the platforms themselves drift by tens of meters, source
//! positions move and the wake field continuously re-shapes around them.

use crate::farm::{FarmConfig, TurbineInput, TurbineState};
use crate::platform::{power_output, step_platform};
use crate::{Error, Result, Vec2};

/// Linear wake expansion rate (half-angle slope).
pub const WAKE_EXPANSION: f64 = 0.05;
/// Decay rate of the yaw-induced skew angle with travel. Faster than the
/// width growth: the deflecting momentum spreads over the widening wake long
/// before the deficit itself recovers, so the centerline straightens early.
pub const WAKE_DEFLECTION_DECAY: f64 = 0.17;
/// Elements are dropped after traveling this many rotor diameters.
pub const WAKE_CUTOFF_DIAMETERS: f64 = 20.0;
/// Seconds between wake element emissions.
pub const EMISSION_PERIOD: f64 = 2.0;
/// Crosswind sample points used to average the deficit over a rotor.
pub const ROTOR_PROBES: usize = 9;

/// One shed wake cross-section tracked in Lagrangian coordinates.
#[derive(Debug, Clone, Copy)]
pub struct WakeElement {
    /// Index of the emitting turbine.
    pub source: usize,
    /// Downwind position, m (global x).
    pub x_station: f64,
    /// Crosswind position of the wake centerline, m (global y).
    pub centerline_y: f64,
    /// Current wake width, m.
    pub diameter: f64,
    /// Peak (centerline) velocity deficit, m/s.
    pub centerline_deficit: f64,
    /// Crosswind drift speed at the last advection, m/s.
    pub lateral_velocity: f64,
    /// Seconds since emission.
    pub age: f64,
    /// tan of the initial yaw-induced skew angle, frozen at emission.
    skew_tan: f64,
}

impl WakeElement {
    /// Downstream distance traveled since emission, recovered from the width.
    pub fn travel(&self, rotor_diameter: f64) -> f64 {
        (self.diameter - rotor_diameter) / (2.0 * WAKE_EXPANSION)
    }
}

/// All live wake elements, grouped by source, stations ascending.
#[derive(Debug, Clone, Default)]
pub struct WakeField {
    per_source: Vec<Vec<WakeElement>>,
}

impl WakeField {
    pub fn new(num_sources: usize) -> Self {
        WakeField { per_source: vec![Vec::new(); num_sources] }
    }

    pub fn elements(&self, source: usize) -> &[WakeElement] {
        &self.per_source[source]
    }

    pub fn total_elements(&self) -> usize {
        self.per_source.iter().map(Vec::len).sum()
    }

    /// Inserts an element keeping its source's station ordering.
    fn insert_sorted(&mut self, e: WakeElement) {
        let v = &mut self.per_source[e.source];
        let i = v.partition_point(|x| x.x_station < e.x_station);
        v.insert(i, e);
    }

    /// CSV dump for plotting: `source,x_m,y_centerline_m,diameter_m,deficit_ms`.
    pub fn write_csv(&self, out: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(out, "source,x_m,y_centerline_m,diameter_m,deficit_ms")?;
        for elems in &self.per_source {
            for e in elems {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    e.source, e.x_station, e.centerline_y, e.diameter, e.centerline_deficit
                )?;
            }
        }
        Ok(())
    }
}

/// Builds the element a rotor sheds right now. `v_eff` is the incident
/// rotor-plane velocity (deficit-corrected, platform-relative), `wind` the
/// free-stream velocity carrying the element.
pub fn emit_wake_element(
    source: usize,
    state: &TurbineState,
    input: &TurbineInput,
    v_eff: Vec2,
    wind: Vec2,
) -> WakeElement {
    let normal = Vec2::from_angle(input.yaw);
    let u_n = v_eff.dot(normal);
    let deficit = 2.0 * input.induction * u_n;
    let ct = 4.0 * input.induction * (1.0 - input.induction);
    let cos_yaw = input.yaw.cos();
    // Initial wake skew from yaw (momentum-deflection closure). The lateral
    // thrust component that walks the platform toward one side is reacted by
    // an equal push on the slipstream toward the other, so the wake skews
    // opposite the platform's crosswind walk.
    let skew_tan = (-0.5 * ct * cos_yaw * cos_yaw * input.yaw.sin()).tan();
    let u_adv = wind.x - 0.5 * deficit;
    WakeElement {
        source,
        x_station: state.x,
        centerline_y: state.y,
        diameter: 0.0, // patched by the caller to the source rotor diameter
        centerline_deficit: deficit,
        lateral_velocity: wind.y + u_adv * skew_tan,
        age: 0.0,
        skew_tan,
    }
}

/// Advances every element by `dt`: downstream advection at the deficit-reduced
/// free stream, crosswind drift with decaying skew, linear expansion, deficit
/// dilution, and cutoff pruning.
pub fn advect_wakes(field: &mut WakeField, wind: Vec2, dt: f64, config: &FarmConfig) {
    for (source, elems) in field.per_source.iter_mut().enumerate() {
        let d_rotor = config.turbines[source].spec.rotor_diameter;
        let cutoff = WAKE_CUTOFF_DIAMETERS * d_rotor;
        for e in elems.iter_mut() {
            let travel = e.travel(d_rotor);
            let u_adv = wind.x - 0.5 * e.centerline_deficit;
            let straighten = 1.0 + 2.0 * WAKE_DEFLECTION_DECAY * travel / d_rotor;
            let lateral = wind.y + u_adv * e.skew_tan / (straighten * straighten);
            e.x_station += u_adv * dt;
            e.centerline_y += lateral * dt;
            e.lateral_velocity = lateral;
            let new_travel = travel + u_adv * dt;
            let new_diameter = d_rotor + 2.0 * WAKE_EXPANSION * new_travel;
            e.centerline_deficit *= (e.diameter / new_diameter) * (e.diameter / new_diameter);
            e.diameter = new_diameter;
            e.age += dt;
        }
        elems.retain(|e| e.travel(d_rotor) <= cutoff);
        // Low-deficit elements advect faster than high-deficit ones emitted
        // earlier and can overtake them; restore the station ordering.
        elems.sort_by(|a, b| a.x_station.total_cmp(&b.x_station));
    }
}

/// Velocity deficit at a probe point from all wakes except `exclude`,
/// combined root-sum-square. Inside each wake the two elements bracketing the
/// probe station are interpolated linearly and the crosswind falloff is
/// Gaussian with sigma = width/4.
pub fn deficit_at(field: &WakeField, probe: Vec2, exclude: usize) -> f64 {
    let mut sum_sq = 0.0;
    for (source, elems) in field.per_source.iter().enumerate() {
        if source == exclude || elems.is_empty() {
            continue;
        }
        let first = &elems[0];
        let last = elems.last().unwrap();
        if probe.x < first.x_station || probe.x > last.x_station {
            continue; // upstream of the source or past the wake front
        }
        let i = elems.partition_point(|e| e.x_station < probe.x);
        let (yc, diameter, deficit) = if i == 0 {
            (first.centerline_y, first.diameter, first.centerline_deficit)
        } else {
            let (lo, hi) = (&elems[i - 1], &elems[i]);
            let frac = (probe.x - lo.x_station) / (hi.x_station - lo.x_station);
            (
                lo.centerline_y + frac * (hi.centerline_y - lo.centerline_y),
                lo.diameter + frac * (hi.diameter - lo.diameter),
                lo.centerline_deficit + frac * (hi.centerline_deficit - lo.centerline_deficit),
            )
        };
        let sigma = diameter / 4.0;
        let offset = probe.y - yc;
        let local = deficit * (-offset * offset / (2.0 * sigma * sigma)).exp();
        sum_sq += local * local;
    }
    sum_sq.sqrt()
}

/// Rotor-plane wind at turbine `idx`: free stream minus the deficit averaged
/// over crosswind probes spanning the rotor. Crosswind free stream passes
/// through unchanged.
pub fn effective_velocity(
    field: &WakeField,
    idx: usize,
    states: &[TurbineState],
    wind: Vec2,
    config: &FarmConfig,
) -> Vec2 {
    let d = config.turbines[idx].spec.rotor_diameter;
    let state = &states[idx];
    let mut total = 0.0;
    for j in 0..ROTOR_PROBES {
        let offset = d * (j as f64 / (ROTOR_PROBES - 1) as f64 - 0.5);
        total += deficit_at(field, Vec2::new(state.x, state.y + offset), idx);
    }
    Vec2::new(wind.x - total / ROTOR_PROBES as f64, wind.y)
}

/// Coupled farm state: platform states plus the live wake field.
#[derive(Debug, Clone)]
pub struct FarmState {
    pub states: Vec<TurbineState>,
    pub wake: WakeField,
    pub time: f64,
    next_emission: f64,
}

impl FarmState {
    /// All platforms at rest at their neutral positions, no wakes yet.
    pub fn at_neutral(config: &FarmConfig) -> Self {
        Self::with_states(config.neutral_states())
    }

    pub fn with_states(states: Vec<TurbineState>) -> Self {
        let n = states.len();
        FarmState {
            states,
            wake: WakeField::new(n),
            time: 0.0,
            next_emission: EMISSION_PERIOD,
        }
    }
}

/// Seconds of greedy operation used to settle a farm before an experiment.
pub const PRE_ROLL_SECONDS: f64 = 2000.0;

/// Runs the farm from neutral rest under fixed greedy inputs and constant
/// wind until thrust, mooring, and wakes reach a working equilibrium.
pub fn settle_farm(config: &FarmConfig, wind: Vec2, duration: f64) -> Result<FarmState> {
    let mut farm = FarmState::at_neutral(config);
    let inputs = vec![TurbineInput::greedy(); config.len()];
    let steps = (duration / crate::SIM_DT).round() as usize;
    for _ in 0..steps {
        step_farm(&mut farm, &inputs, wind, crate::SIM_DT, config)?;
    }
    Ok(farm)
}

/// Advances the coupled farm by `dt`: effective velocities from the current
/// wake field, one RK4 platform step per turbine, wake advection, then any due
/// emissions. Returns the instantaneous per-turbine electrical power.
pub fn step_farm(
    farm: &mut FarmState,
    inputs: &[TurbineInput],
    wind: Vec2,
    dt: f64,
    config: &FarmConfig,
) -> Result<Vec<f64>> {
    let n = config.len();
    if farm.states.len() != n || inputs.len() != n {
        return Err(Error::InvalidConfig(format!(
            "farm has {n} turbines but {} states and {} inputs",
            farm.states.len(),
            inputs.len()
        )));
    }
    let v_effs: Vec<Vec2> = (0..n)
        .map(|i| effective_velocity(&farm.wake, i, &farm.states, wind, config))
        .collect();
    let apparents: Vec<Vec2> = (0..n)
        .map(|i| v_effs[i] - farm.states[i].velocity())
        .collect();
    let mut powers = Vec::with_capacity(n);
    for i in 0..n {
        powers.push(power_output(apparents[i], &inputs[i], &config.turbines[i].spec)?);
        farm.states[i] = step_platform(&farm.states[i], &inputs[i], v_effs[i], &config.turbines[i], dt)
            .map_err(|e| match e {
                Error::Diverged(_) => {
                    Error::Diverged(format!("turbine {i} at t = {} s", farm.time))
                }
                other => other,
            })?;
    }
    advect_wakes(&mut farm.wake, wind, dt, config);
    farm.time += dt;
    while farm.time >= farm.next_emission - 1e-9 {
        for i in 0..n {
            let mut e = emit_wake_element(i, &farm.states[i], &inputs[i], apparents[i], wind);
            e.diameter = config.turbines[i].spec.rotor_diameter;
            farm.wake.insert_sorted(e);
        }
        farm.next_emission += EMISSION_PERIOD;
    }
    Ok(powers)
}
