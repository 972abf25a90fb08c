//! Farm layout, rotor overlap geometry, and the neighborhood stage cost.

use crate::{Error, Result, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Axial induction of an unyawed turbine operating at the Betz optimum.
pub const GREEDY_INDUCTION: f64 = 1.0 / 3.0;

/// Rotor and platform constants for one turbine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TurbineSpec {
    /// Rotor diameter in m.
    pub rotor_diameter: f64,
    /// Air density in kg/m^3.
    pub air_density: f64,
    /// Platform mass plus hydrodynamic added mass, kg.
    pub effective_mass: f64,
    /// Lumped quadratic drag gain for the hull, kg/m.
    pub hydro_drag_coeff: f64,
}

impl Default for TurbineSpec {
    fn default() -> Self {
        TurbineSpec {
            rotor_diameter: 126.0,
            air_density: 1.225,
            effective_mass: 1.5e7,
            hydro_drag_coeff: 5e5,
        }
    }
}

impl TurbineSpec {
    /// Swept rotor area in m^2.
    pub fn hub_area(&self) -> f64 {
        let r = self.rotor_diameter / 2.0;
        PI * r * r
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rotor_diameter > 0.0 && self.air_density > 0.0)
            || !(self.effective_mass > 0.0 && self.hydro_drag_coeff >= 0.0)
        {
            return Err(Error::InvalidConfig(
                "turbine spec fields must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Catenary mooring system shared by all lines of one platform.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MooringSpec {
    /// Unstretched line length, m.
    pub line_length: f64,
    /// Water depth (fairlead to seabed), m.
    pub water_depth: f64,
    /// Submerged line weight per length, N/m.
    pub line_weight_per_length: f64,
    /// Horizontal distance from the neutral platform position to each anchor, m.
    pub anchor_radius: f64,
    /// Number of evenly spread lines.
    pub num_lines: usize,
}

impl Default for MooringSpec {
    fn default() -> Self {
        MooringSpec {
            line_length: 950.0,
            water_depth: 200.0,
            line_weight_per_length: 1112.0,
            // Calibrated so 4.345e5 N of steady thrust parks the platform ~96 m
            // downwind and a 10 deg yaw walks it ~68 m crosswind.
            anchor_radius: 791.0,
            num_lines: 3,
        }
    }
}

impl MooringSpec {
    pub fn validate(&self) -> Result<()> {
        if self.line_length <= self.water_depth {
            return Err(Error::InvalidConfig(format!(
                "line length {} m must exceed water depth {} m",
                self.line_length, self.water_depth
            )));
        }
        if !(self.water_depth > 0.0
            && self.line_weight_per_length > 0.0
            && self.anchor_radius > 0.0)
            || self.num_lines == 0
        {
            return Err(Error::InvalidConfig(
                "mooring spec fields must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One turbine berth: neutral (unloaded) platform position plus hardware specs.
#[derive(Debug, Clone, Copy)]
pub struct TurbineSite {
    pub neutral: Vec2,
    pub spec: TurbineSpec,
    pub mooring: MooringSpec,
}

/// Platform state: horizontal position and velocity in the global frame.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TurbineState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl TurbineState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn at(position: Vec2) -> Self {
        TurbineState { x: position.x, y: position.y, vx: 0.0, vy: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.vx.is_finite() && self.vy.is_finite()
    }
}

/// Control input: axial induction factor and nacelle yaw (rad, CCW from x̂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineInput {
    pub induction: f64,
    pub yaw: f64,
}

impl TurbineInput {
    /// Maximum-power input of an uncoordinated turbine: a = 1/3, no yaw.
    pub fn greedy() -> Self {
        TurbineInput { induction: GREEDY_INDUCTION, yaw: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.induction > 0.0 && self.induction < 0.5) {
            return Err(Error::Domain(format!(
                "axial induction {} outside (0, 0.5)",
                self.induction
            )));
        }
        if !(self.yaw.abs() <= PI / 2.0) {
            return Err(Error::Domain(format!("yaw {} rad outside +/- pi/2", self.yaw)));
        }
        Ok(())
    }

    /// Deviation from the greedy input, the quantity penalized by the controller.
    pub fn deviation(&self) -> [f64; 2] {
        [self.induction - GREEDY_INDUCTION, self.yaw]
    }
}

/// Input-deviation weight matrix for the stage cost.
pub type InputWeight = [[f64; 2]; 2];

pub fn identity_weight() -> InputWeight {
    [[1.0, 0.0], [0.0, 1.0]]
}

/// du^T Q du for a 2-vector input deviation.
pub fn input_cost(du: [f64; 2], q: &InputWeight) -> f64 {
    du[0] * (q[0][0] * du[0] + q[0][1] * du[1]) + du[1] * (q[1][0] * du[0] + q[1][1] * du[1])
}

/// Farm layout: ordered berths plus a symmetric neighbor graph.
#[derive(Debug, Clone)]
pub struct FarmConfig {
    pub turbines: Vec<TurbineSite>,
    /// Sorted neighbor indices per turbine; symmetric, no self-loops.
    pub adjacency: Vec<Vec<usize>>,
    /// Row spacing in rotor diameters, kept for serialization round-trips.
    pub spacing_diameters: f64,
}

impl FarmConfig {
    pub fn len(&self) -> usize {
        self.turbines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turbines.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.turbines.is_empty() {
            return Err(Error::InvalidConfig("farm has no turbines".into()));
        }
        if self.adjacency.len() != self.turbines.len() {
            return Err(Error::InvalidConfig("adjacency size mismatch".into()));
        }
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            for &j in nbrs {
                if j == i {
                    return Err(Error::InvalidConfig(format!("self-loop at turbine {i}")));
                }
                if j >= self.turbines.len() {
                    return Err(Error::InvalidConfig(format!("neighbor {j} out of range")));
                }
                if !self.adjacency[j].contains(&i) {
                    return Err(Error::InvalidConfig(format!(
                        "adjacency not symmetric between {i} and {j}"
                    )));
                }
            }
        }
        for site in &self.turbines {
            site.spec.validate()?;
            site.mooring.validate()?;
        }
        Ok(())
    }

    /// States with every platform at rest at its neutral position.
    pub fn neutral_states(&self) -> Vec<TurbineState> {
        self.turbines.iter().map(|t| TurbineState::at(t.neutral)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = FarmFile {
            turbines: self
                .turbines
                .iter()
                .map(|t| Berth { neutral_x: t.neutral.x, neutral_y: t.neutral.y })
                .collect(),
            spacing_diameters: self.spacing_diameters,
            mooring: self.turbines[0].mooring,
            spec: self.turbines[0].spec,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses the JSON layout format; the neighbor graph is rebuilt as a row
    /// (consecutive turbines adjacent).
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FarmFile = serde_json::from_str(text)?;
        let turbines: Vec<TurbineSite> = file
            .turbines
            .iter()
            .map(|b| TurbineSite {
                neutral: Vec2::new(b.neutral_x, b.neutral_y),
                spec: file.spec,
                mooring: file.mooring,
            })
            .collect();
        let adjacency = row_adjacency(turbines.len());
        let cfg = FarmConfig { turbines, adjacency, spacing_diameters: file.spacing_diameters };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize, Deserialize)]
struct Berth {
    neutral_x: f64,
    neutral_y: f64,
}

#[derive(Serialize, Deserialize)]
struct FarmFile {
    turbines: Vec<Berth>,
    spacing_diameters: f64,
    mooring: MooringSpec,
    spec: TurbineSpec,
}

fn row_adjacency(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|i| {
            let mut nbrs = Vec::new();
            if i > 0 {
                nbrs.push(i - 1);
            }
            if i + 1 < n {
                nbrs.push(i + 1);
            }
            nbrs
        })
        .collect()
}

/// Builds a single row of `n` turbines along x̂ spaced `spacing_diameters` rotor
/// diameters apart, neighbors being consecutive row positions.
pub fn make_row_farm(
    n: usize,
    spacing_diameters: f64,
    spec: TurbineSpec,
    mooring: MooringSpec,
) -> Result<FarmConfig> {
    if n == 0 {
        return Err(Error::InvalidConfig("row farm needs at least one turbine".into()));
    }
    if !(spacing_diameters > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "row spacing {spacing_diameters} diameters must be positive"
        )));
    }
    spec.validate()?;
    mooring.validate()?;
    let dx = spacing_diameters * spec.rotor_diameter;
    let turbines = (0..n)
        .map(|i| TurbineSite { neutral: Vec2::new(i as f64 * dx, 0.0), spec, mooring })
        .collect();
    Ok(FarmConfig { turbines, adjacency: row_adjacency(n), spacing_diameters })
}

/// Crosswind rotor overlap of two equal-diameter rotors, as the circle-lens
/// intersection area normalized by one rotor disc area. Only the crosswind (ŷ)
/// separation counts: a fully waked pair at any downwind distance scores 1.
pub fn rotor_overlap_area(y_i: f64, y_j: f64, diameter: f64) -> f64 {
    let r = diameter / 2.0;
    let d = (y_i - y_j).abs();
    if d >= diameter {
        return 0.0;
    }
    if d == 0.0 {
        return 1.0;
    }
    let lens = 2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt();
    lens / (PI * r * r)
}

/// Stage cost seen by turbine `i`: its own input deviation plus, for each
/// neighbor, the shared overlap term (weighted 1/|N_i|) and the neighbor's input
/// deviation.
pub fn neighborhood_cost(
    i: usize,
    states: &[TurbineState],
    inputs: &[TurbineInput],
    config: &FarmConfig,
    q: &InputWeight,
) -> f64 {
    let nbrs = &config.adjacency[i];
    let mut cost = input_cost(inputs[i].deviation(), q);
    if nbrs.is_empty() {
        return cost;
    }
    let inv_n = 1.0 / nbrs.len() as f64;
    let diameter = config.turbines[i].spec.rotor_diameter;
    for &j in nbrs {
        cost += inv_n * rotor_overlap_area(states[i].y, states[j].y, diameter);
        cost += input_cost(inputs[j].deviation(), q);
    }
    cost
}
