//! Distributed economic MPC with a randomized social hierarchy.
//!
//! Each turbine runs its own agent against its local surrogate model. A
//! sampling period has two phases: every agent first picks a stationary
//! set-point (grid search over yaw, fixed point of the model), then plans a
//! trajectory to it (projected gradient descent over the yaw sequence).
//! Agents on lower hierarchy levels decide earlier; same-level agents decide
//! simultaneously from the same snapshot of broadcast plans, which is what
//! makes conflicting decisions possible. After every iteration each agent
//! compares the cost it assumed (naive) with the cost under the plans it then
//! received (informed) and redraws its level when the comparison worsened.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::farm::{
    identity_weight, input_cost, rotor_overlap_area, FarmConfig, InputWeight, TurbineInput,
    TurbineState, GREEDY_INDUCTION,
};
use crate::surrogate::{rollout, NextStateModel};
use crate::{Error, Result, SAMPLING_PERIOD};

/// Controller tuning; defaults reproduce the reference configuration.
#[derive(Debug, Clone, Copy)]
pub struct ControllerConfig {
    /// Prediction horizon in sampling periods.
    pub horizon: usize,
    /// Number of social hierarchy levels.
    pub levels: usize,
    /// Full level-sweep iterations granted to each phase.
    pub iterations_per_phase: usize,
    /// Weight on input deviations from greedy.
    pub input_weight: InputWeight,
    /// Seconds between controller decisions.
    pub sampling_period: f64,
    /// Yaw magnitude limit, rad.
    pub yaw_bound: f64,
    /// Induction factor held by every agent.
    pub induction_fixed: f64,
    /// Terminal set-point tolerance on position, m.
    pub terminal_tolerance_pos: f64,
    /// Terminal set-point tolerance on velocity, m/s.
    pub terminal_tolerance_vel: f64,
    /// Absolute slack before a cost increase counts as a conflict.
    pub conflict_tolerance: f64,
    /// Relative slack on top of the absolute one. Re-solves against freshly
    /// received neighbor plans shift the stage sum by a few percent of its
    /// magnitude even when everyone agrees (late refinements and transient
    /// wake sweeps), while contradictory side picks roughly double it, so
    /// only increases beyond this share of the naive cost count as clashes.
    pub conflict_tolerance_rel: f64,
    /// Terminal penalty gain.
    pub terminal_penalty: f64,
    /// Terminal metric weight on position residuals, 1/m^2.
    pub terminal_weight_pos: f64,
    /// Terminal metric weight on velocity residuals, s^2/m^2.
    pub terminal_weight_vel: f64,
    /// Stationary grid spacing in yaw, rad.
    pub stationary_grid_step: f64,
    /// Fixed-point iteration cap for the stationary solve.
    pub fixed_point_max_iters: usize,
    /// Fixed-point convergence tolerance on position, m.
    pub fixed_point_tol_pos: f64,
    /// Fixed-point convergence tolerance on velocity, m/s.
    pub fixed_point_tol_vel: f64,
    /// Gradient-descent iteration cap for the dynamic solve.
    pub descent_max_iters: usize,
    /// Central finite-difference step on yaw, rad.
    pub fd_step: f64,
    /// Descent stops once an iteration improves cost by less than this.
    pub cost_decrease_tol: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            horizon: 5,
            levels: 2,
            iterations_per_phase: 3,
            input_weight: identity_weight(),
            sampling_period: SAMPLING_PERIOD,
            yaw_bound: 10.0 * std::f64::consts::PI / 180.0,
            induction_fixed: GREEDY_INDUCTION,
            terminal_tolerance_pos: 5.0,
            terminal_tolerance_vel: 0.05,
            conflict_tolerance: 1e-6,
            conflict_tolerance_rel: 1e-1,
            terminal_penalty: 1e3,
            terminal_weight_pos: 1e-4,
            terminal_weight_vel: 1.0,
            stationary_grid_step: std::f64::consts::PI / 180.0,
            fixed_point_max_iters: 200,
            fixed_point_tol_pos: 0.1,
            fixed_point_tol_vel: 1e-3,
            descent_max_iters: 50,
            fd_step: 1e-4,
            cost_decrease_tol: 1e-6,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 || self.levels < 2 || self.iterations_per_phase < 1 {
            return Err(Error::InvalidConfig(
                "need horizon >= 1, levels >= 2, iterations >= 1".into(),
            ));
        }
        if !(self.yaw_bound > 0.0 && self.sampling_period > 0.0 && self.fd_step > 0.0) {
            return Err(Error::InvalidConfig("controller scales must be positive".into()));
        }
        if !(self.conflict_tolerance >= 0.0 && self.conflict_tolerance_rel >= 0.0) {
            return Err(Error::InvalidConfig("conflict tolerances must be non-negative".into()));
        }
        Ok(())
    }

    /// Allowed informed-over-naive increase before a conflict fires.
    pub fn conflict_threshold(&self, naive: f64) -> f64 {
        self.conflict_tolerance + self.conflict_tolerance_rel * naive.abs()
    }
}

/// A broadcast agent decision: trajectory, set-point, and the cost the owner
/// believed it had when it solved.
#[derive(Debug, Clone)]
pub struct AgentPlan {
    pub owner: usize,
    pub level: usize,
    /// Planned states, horizon + 1 entries starting at the measurement.
    pub state_traj: Vec<TurbineState>,
    /// Planned inputs, horizon entries.
    pub input_traj: Vec<TurbineInput>,
    pub x_s: TurbineState,
    pub u_s: TurbineInput,
    /// Stage-cost sum under the neighbor plans assumed while solving.
    pub naive_cost: f64,
    /// Whether the trajectory ends inside the terminal tolerance of x_s.
    pub terminal_ok: bool,
}

impl AgentPlan {
    /// A plan that assumes the owner holds its measured state indefinitely.
    fn hold(owner: usize, level: usize, measured: TurbineState, cfg: &ControllerConfig) -> Self {
        let input = TurbineInput { induction: cfg.induction_fixed, yaw: 0.0 };
        AgentPlan {
            owner,
            level,
            state_traj: vec![measured; cfg.horizon + 1],
            input_traj: vec![input; cfg.horizon],
            x_s: measured,
            u_s: input,
            naive_cost: 0.0,
            terminal_ok: true,
        }
    }
}

/// Reliable latest-plan-per-sender delivery restricted to farm neighbors.
#[derive(Debug, Clone)]
pub struct MessageBus {
    /// slots[recipient][sender]: latest plan delivered along that edge.
    slots: Vec<Vec<Option<AgentPlan>>>,
    /// Each sender's own latest broadcast.
    latest: Vec<Option<AgentPlan>>,
}

impl MessageBus {
    pub fn new(num_agents: usize) -> Self {
        MessageBus {
            slots: vec![vec![None; num_agents]; num_agents],
            latest: vec![None; num_agents],
        }
    }

    /// Delivers `plan` to every neighbor of its owner.
    pub fn broadcast(&mut self, plan: AgentPlan, farm: &FarmConfig) {
        let owner = plan.owner;
        for &j in &farm.adjacency[owner] {
            self.slots[j][owner] = Some(plan.clone());
        }
        self.latest[owner] = Some(plan);
    }

    /// Latest plans the recipient holds from its neighbors, adjacency order.
    pub fn neighbor_plans(&self, recipient: usize, farm: &FarmConfig) -> Vec<&AgentPlan> {
        farm.adjacency[recipient]
            .iter()
            .filter_map(|&j| self.slots[recipient][j].as_ref())
            .collect()
    }

    /// The sender's own most recent broadcast.
    pub fn own_plan(&self, sender: usize) -> Option<&AgentPlan> {
        self.latest[sender].as_ref()
    }
}

/// Single-stage neighborhood cost of a stationary candidate against assumed
/// neighbor set-points.
pub fn stationary_cost(
    owner: usize,
    x_s: &TurbineState,
    u_s: &TurbineInput,
    neighbor_plans: &[&AgentPlan],
    farm: &FarmConfig,
    q: &InputWeight,
) -> f64 {
    let diameter = farm.turbines[owner].spec.rotor_diameter;
    let n_nb = farm.adjacency[owner].len().max(1) as f64;
    let mut cost = input_cost(u_s.deviation(), q);
    for p in neighbor_plans {
        cost += rotor_overlap_area(x_s.y, p.x_s.y, diameter) / n_nb
            + input_cost(p.u_s.deviation(), q);
    }
    cost
}

/// Stage-cost sum of a trajectory against assumed neighbor trajectories,
/// terminal penalty excluded.
pub fn stage_cost_sum(
    owner: usize,
    states: &[TurbineState],
    inputs: &[TurbineInput],
    neighbor_plans: &[&AgentPlan],
    farm: &FarmConfig,
    q: &InputWeight,
) -> f64 {
    let diameter = farm.turbines[owner].spec.rotor_diameter;
    let n_nb = farm.adjacency[owner].len().max(1) as f64;
    let mut total = 0.0;
    for k in 0..inputs.len() {
        total += input_cost(inputs[k].deviation(), q);
        for p in neighbor_plans {
            let ns = p.state_traj.get(k).or(p.state_traj.last());
            let nu = p.input_traj.get(k).unwrap_or(&p.u_s);
            if let Some(ns) = ns {
                total += rotor_overlap_area(states[k].y, ns.y, diameter) / n_nb;
            }
            total += input_cost(nu.deviation(), q);
        }
    }
    total
}

/// Recomputes a plan's stage-cost sum under newly received neighbor plans.
pub fn informed_cost(
    plan: &AgentPlan,
    neighbor_plans: &[&AgentPlan],
    farm: &FarmConfig,
    cfg: &ControllerConfig,
) -> f64 {
    stage_cost_sum(
        plan.owner,
        &plan.state_traj,
        &plan.input_traj,
        neighbor_plans,
        farm,
        &cfg.input_weight,
    )
}

/// Keeps the level while informed stays within tolerance of naive; otherwise
/// redraws uniformly (possibly landing on the same level).
pub fn update_hierarchy_level(
    level: usize,
    naive: f64,
    informed: f64,
    rng: &mut ChaCha8Rng,
    cfg: &ControllerConfig,
) -> usize {
    if informed > naive + cfg.conflict_threshold(naive) {
        rng.gen_range(0..cfg.levels)
    } else {
        level
    }
}

/// Converged stationary candidate.
#[derive(Debug, Clone, Copy)]
pub struct StationaryResult {
    pub x_s: TurbineState,
    pub u_s: TurbineInput,
    pub cost: f64,
}

fn fixed_point<M: NextStateModel>(
    model: &M,
    start: &TurbineState,
    input: &TurbineInput,
    cfg: &ControllerConfig,
) -> Option<TurbineState> {
    let mut x = *start;
    for _ in 0..cfg.fixed_point_max_iters {
        let next = model.next_state(&x, input);
        if !next.is_finite() {
            return None;
        }
        let dp = ((next.x - x.x).powi(2) + (next.y - x.y).powi(2)).sqrt();
        let dv = ((next.vx - x.vx).powi(2) + (next.vy - x.vy).powi(2)).sqrt();
        x = next;
        if dp < cfg.fixed_point_tol_pos && dv < cfg.fixed_point_tol_vel {
            return Some(x);
        }
    }
    None
}

/// Grid search over the stationary yaw with the induction pinned: every
/// candidate's steady state comes from fixed-point iteration of the model, and
/// candidates are scanned in order of increasing |yaw| so ties favor the
/// smallest deflection. Returns None when no candidate converges.
pub fn solve_stationary<M: NextStateModel>(
    owner: usize,
    model: &M,
    x_measured: &TurbineState,
    neighbor_plans: &[&AgentPlan],
    farm: &FarmConfig,
    cfg: &ControllerConfig,
) -> Option<StationaryResult> {
    let steps = (cfg.yaw_bound / cfg.stationary_grid_step).round() as i64;
    let mut candidates: Vec<f64> = (-steps..=steps)
        .map(|i| i as f64 * cfg.stationary_grid_step)
        .collect();
    candidates.sort_by(|a, b| (a.abs(), *a).partial_cmp(&(b.abs(), *b)).unwrap());
    let mut best: Option<StationaryResult> = None;
    for yaw in candidates {
        let u_s = TurbineInput { induction: cfg.induction_fixed, yaw };
        let Some(x_s) = fixed_point(model, x_measured, &u_s, cfg) else {
            continue;
        };
        let cost = stationary_cost(owner, &x_s, &u_s, neighbor_plans, farm, &cfg.input_weight);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(StationaryResult { x_s, u_s, cost });
        }
    }
    best
}

/// Dynamic solve output: the broadcastable plan plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct DynamicResult {
    pub plan: AgentPlan,
    /// Full objective (stage sum + terminal penalty) at the optimum.
    pub total_cost: f64,
    /// Objective after each accepted descent iteration, starting at the
    /// warm-start value; non-increasing by construction.
    pub cost_history: Vec<f64>,
    pub terminal_pos_residual: f64,
    pub terminal_vel_residual: f64,
}

fn terminal_penalty(x_h: &TurbineState, x_s: &TurbineState, cfg: &ControllerConfig) -> f64 {
    let dp2 = (x_h.x - x_s.x).powi(2) + (x_h.y - x_s.y).powi(2);
    let dv2 = (x_h.vx - x_s.vx).powi(2) + (x_h.vy - x_s.vy).powi(2);
    cfg.terminal_penalty * (cfg.terminal_weight_pos * dp2 + cfg.terminal_weight_vel * dv2)
}

/// Plans the yaw sequence toward `x_s` by projected gradient descent with a
/// backtracking line search; monotone in the objective from the warm start.
#[allow(clippy::too_many_arguments)]
pub fn solve_dynamic<M: NextStateModel>(
    owner: usize,
    level: usize,
    model: &M,
    x_measured: &TurbineState,
    x_s: &TurbineState,
    u_s: &TurbineInput,
    neighbor_plans: &[&AgentPlan],
    warm_start: &[TurbineInput],
    farm: &FarmConfig,
    cfg: &ControllerConfig,
) -> DynamicResult {
    let h = cfg.horizon;
    let clamp = |y: f64| y.clamp(-cfg.yaw_bound, cfg.yaw_bound);
    let mut yaws: Vec<f64> = (0..h)
        .map(|k| clamp(warm_start.get(k).map_or(0.0, |u| u.yaw)))
        .collect();

    let inputs_of = |yaws: &[f64]| -> Vec<TurbineInput> {
        yaws.iter()
            .map(|&yaw| TurbineInput { induction: cfg.induction_fixed, yaw })
            .collect()
    };
    let objective = |yaws: &[f64]| -> f64 {
        let inputs = inputs_of(yaws);
        let states = rollout(model, *x_measured, &inputs);
        stage_cost_sum(owner, &states, &inputs, neighbor_plans, farm, &cfg.input_weight)
            + terminal_penalty(states.last().unwrap(), x_s, cfg)
    };

    let mut cost = objective(&yaws);
    let mut history = vec![cost];
    for _ in 0..cfg.descent_max_iters {
        let mut grad = vec![0.0; h];
        for k in 0..h {
            let saved = yaws[k];
            yaws[k] = saved + cfg.fd_step;
            let up = objective(&yaws);
            yaws[k] = saved - cfg.fd_step;
            let down = objective(&yaws);
            yaws[k] = saved;
            grad[k] = (up - down) / (2.0 * cfg.fd_step);
        }
        let g_inf = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        if g_inf == 0.0 {
            break;
        }
        // First trial moves the steepest coordinate about 3 degrees. A step
        // is only taken when it improves cost by at least the stop tolerance,
        // so a re-solve of an unchanged problem returns its warm start
        // verbatim instead of drifting through the flat directions.
        let mut alpha = 0.05 / g_inf;
        let mut accepted = false;
        for _ in 0..20 {
            let trial: Vec<f64> = (0..h).map(|k| clamp(yaws[k] - alpha * grad[k])).collect();
            let trial_cost = objective(&trial);
            if trial_cost < cost - cfg.cost_decrease_tol {
                yaws = trial;
                cost = trial_cost;
                history.push(cost);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    finish(owner, level, model, x_measured, x_s, u_s, neighbor_plans, farm, cfg, yaws, cost, history)
}

#[allow(clippy::too_many_arguments)]
fn finish<M: NextStateModel>(
    owner: usize,
    level: usize,
    model: &M,
    x_measured: &TurbineState,
    x_s: &TurbineState,
    u_s: &TurbineInput,
    neighbor_plans: &[&AgentPlan],
    farm: &FarmConfig,
    cfg: &ControllerConfig,
    yaws: Vec<f64>,
    total_cost: f64,
    history: Vec<f64>,
) -> DynamicResult {
    let inputs: Vec<TurbineInput> = yaws
        .iter()
        .map(|&yaw| TurbineInput { induction: cfg.induction_fixed, yaw })
        .collect();
    let states = rollout(model, *x_measured, &inputs);
    let naive = stage_cost_sum(owner, &states, &inputs, neighbor_plans, farm, &cfg.input_weight);
    let last = states.last().unwrap();
    let pos_res = ((last.x - x_s.x).powi(2) + (last.y - x_s.y).powi(2)).sqrt();
    let vel_res = ((last.vx - x_s.vx).powi(2) + (last.vy - x_s.vy).powi(2)).sqrt();
    let terminal_ok =
        pos_res <= cfg.terminal_tolerance_pos && vel_res <= cfg.terminal_tolerance_vel;
    DynamicResult {
        plan: AgentPlan {
            owner,
            level,
            state_traj: states,
            input_traj: inputs,
            x_s: *x_s,
            u_s: *u_s,
            naive_cost: naive,
            terminal_ok,
        },
        total_cost,
        cost_history: history,
        terminal_pos_residual: pos_res,
        terminal_vel_residual: vel_res,
    }
}

/// Persistent per-turbine controller state surviving across sampling periods.
#[derive(Debug, Clone)]
pub struct Agent {
    pub index: usize,
    pub level: usize,
    /// Set-point adopted at the last period whose terminal check passed.
    pub setpoint: Option<(TurbineState, TurbineInput)>,
    /// Input trajectory seeding the next period's first dynamic solve.
    pub warm_start: Vec<TurbineInput>,
    /// Last committed input; also the fail-safe if a solve goes wrong.
    pub committed: TurbineInput,
}

impl Agent {
    pub fn new(index: usize, level: usize, cfg: &ControllerConfig) -> Self {
        let hold = TurbineInput { induction: cfg.induction_fixed, yaw: 0.0 };
        Agent {
            index,
            level,
            setpoint: None,
            warm_start: vec![hold; cfg.horizon],
            committed: hold,
        }
    }
}

/// One agent's record of a sampling period, ready for the controller log.
#[derive(Debug, Clone, Copy)]
pub struct PeriodRecord {
    pub agent: usize,
    pub level: usize,
    pub naive_cost: f64,
    pub informed_cost: f64,
    /// Conflict standing at the last iteration of the period; this is what
    /// the controller log reports.
    pub conflict: bool,
    /// Level redraw events across both phases of the period.
    pub redraws: usize,
    pub committed: TurbineInput,
    pub x_s: TurbineState,
    pub terminal_pos_residual: f64,
    pub terminal_vel_residual: f64,
    pub terminal_ok: bool,
}

/// Runs one full sampling period of coordination: the stationary phase, the
/// dynamic phase, hierarchy updates after every iteration, and the final
/// commitment of each agent's first input.
#[allow(clippy::too_many_arguments)]
pub fn coordinate_sampling_period<M: NextStateModel>(
    agents: &mut [Agent],
    models: &[M],
    measurements: &[TurbineState],
    bus: &mut MessageBus,
    farm: &FarmConfig,
    cfg: &ControllerConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<PeriodRecord>> {
    let n = agents.len();
    if models.len() != n || measurements.len() != n || farm.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} agents, {} models, {} measurements, {} turbines",
            n,
            models.len(),
            measurements.len(),
            farm.len()
        )));
    }
    cfg.validate()?;

    // First period: neighbors are assumed to hold their measured states.
    for i in 0..n {
        if bus.own_plan(i).is_none() {
            bus.broadcast(AgentPlan::hold(i, agents[i].level, measurements[i], cfg), farm);
        }
    }

    let mut redraws = vec![0usize; n];
    let mut conflict_final = vec![false; n];
    let mut naive = vec![0.0; n];
    let mut setpoints: Vec<(TurbineState, TurbineInput)> = (0..n)
        .map(|i| {
            agents[i].setpoint.unwrap_or((
                measurements[i],
                TurbineInput { induction: cfg.induction_fixed, yaw: 0.0 },
            ))
        })
        .collect();

    // Phase 1: stationary set-points.
    for _ in 0..cfg.iterations_per_phase {
        for level in 0..cfg.levels {
            let members: Vec<usize> =
                (0..n).filter(|&i| agents[i].level == level).collect();
            // Same-level agents solve from the same bus snapshot.
            let solved: Vec<(usize, Option<StationaryResult>)> = members
                .iter()
                .map(|&i| {
                    let plans = bus.neighbor_plans(i, farm);
                    (i, solve_stationary(i, &models[i], &measurements[i], &plans, farm, cfg))
                })
                .collect();
            for (i, result) in solved {
                match result {
                    Some(r) => {
                        setpoints[i] = (r.x_s, r.u_s);
                        naive[i] = r.cost;
                    }
                    None => {
                        // Every candidate diverged: keep the previous set-point.
                        let plans = bus.neighbor_plans(i, farm);
                        let (x_s, u_s) = setpoints[i];
                        naive[i] =
                            stationary_cost(i, &x_s, &u_s, &plans, farm, &cfg.input_weight);
                    }
                }
                // Stationary broadcasts update the set-point only; the
                // previously shared trajectory stays current so phase 2
                // starts from honest transient assumptions.
                let (x_s, u_s) = setpoints[i];
                let prev = bus.own_plan(i).expect("bootstrap broadcast").clone();
                bus.broadcast(
                    AgentPlan {
                        owner: i,
                        level: agents[i].level,
                        state_traj: prev.state_traj,
                        input_traj: prev.input_traj,
                        x_s,
                        u_s,
                        naive_cost: naive[i],
                        terminal_ok: prev.terminal_ok,
                    },
                    farm,
                );
            }
        }
        for i in 0..n {
            let plans = bus.neighbor_plans(i, farm);
            let (x_s, u_s) = setpoints[i];
            let informed = stationary_cost(i, &x_s, &u_s, &plans, farm, &cfg.input_weight);
            if informed > naive[i] + cfg.conflict_threshold(naive[i]) {
                redraws[i] += 1;
            }
            agents[i].level = update_hierarchy_level(agents[i].level, naive[i], informed, rng, cfg);
        }
    }

    // Phase 2: dynamic trajectories toward the fixed set-points.
    let mut results: Vec<Option<DynamicResult>> = (0..n).map(|_| None).collect();
    let mut informed_final = vec![0.0; n];
    for iter in 0..cfg.iterations_per_phase {
        for level in 0..cfg.levels {
            let members: Vec<usize> =
                (0..n).filter(|&i| agents[i].level == level).collect();
            let solved: Vec<(usize, DynamicResult)> = members
                .iter()
                .map(|&i| {
                    let plans = bus.neighbor_plans(i, farm);
                    let warm: Vec<TurbineInput> = match &results[i] {
                        Some(r) => r.plan.input_traj.clone(),
                        None => agents[i].warm_start.clone(),
                    };
                    let (x_s, u_s) = setpoints[i];
                    let r = solve_dynamic(
                        i,
                        agents[i].level,
                        &models[i],
                        &measurements[i],
                        &x_s,
                        &u_s,
                        &plans,
                        &warm,
                        farm,
                        cfg,
                    );
                    (i, r)
                })
                .collect();
            for (i, r) in solved {
                naive[i] = r.plan.naive_cost;
                bus.broadcast(r.plan.clone(), farm);
                results[i] = Some(r);
            }
        }
        for i in 0..n {
            let plans = bus.neighbor_plans(i, farm);
            let plan = &results[i].as_ref().unwrap().plan;
            let informed = informed_cost(plan, &plans, farm, cfg);
            informed_final[i] = informed;
            if informed > naive[i] + cfg.conflict_threshold(naive[i]) {
                redraws[i] += 1;
                if iter + 1 == cfg.iterations_per_phase {
                    conflict_final[i] = true;
                }
            }
            agents[i].level = update_hierarchy_level(agents[i].level, naive[i], informed, rng, cfg);
        }
    }

    // Commit first inputs; adopt set-points only when the terminal check held.
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let r = results[i].take().unwrap();
        let committed = r.plan.input_traj[0];
        agents[i].committed = committed;
        if r.plan.terminal_ok {
            agents[i].setpoint = Some(setpoints[i]);
        }
        let mut warm: Vec<TurbineInput> = r.plan.input_traj[1..].to_vec();
        warm.push(setpoints[i].1);
        agents[i].warm_start = warm;
        records.push(PeriodRecord {
            agent: i,
            level: agents[i].level,
            naive_cost: naive[i],
            informed_cost: informed_final[i],
            conflict: conflict_final[i],
            redraws: redraws[i],
            committed,
            x_s: setpoints[i].0,
            terminal_pos_residual: r.terminal_pos_residual,
            terminal_vel_residual: r.terminal_vel_residual,
            terminal_ok: r.plan.terminal_ok,
        });
    }
    Ok(records)
}

/// Convenience driver owning the agents, models, bus, and reshuffle RNG.
pub struct DempcController<M: NextStateModel> {
    pub agents: Vec<Agent>,
    pub bus: MessageBus,
    pub config: ControllerConfig,
    models: Vec<M>,
    farm: FarmConfig,
    rng: ChaCha8Rng,
}

impl<M: NextStateModel> DempcController<M> {
    /// Initial hierarchy levels are drawn uniformly from the controller seed.
    pub fn new(
        models: Vec<M>,
        farm: FarmConfig,
        config: ControllerConfig,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        if models.len() != farm.len() {
            return Err(Error::InvalidConfig(format!(
                "{} models for {} turbines",
                models.len(),
                farm.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agents = (0..farm.len())
            .map(|i| Agent::new(i, rng.gen_range(0..config.levels), &config))
            .collect();
        let bus = MessageBus::new(farm.len());
        Ok(DempcController { agents, bus, config, models, farm, rng })
    }

    /// Runs one sampling period and returns the per-agent records.
    pub fn coordinate_sampling_period(
        &mut self,
        measurements: &[TurbineState],
    ) -> Result<Vec<PeriodRecord>> {
        coordinate_sampling_period(
            &mut self.agents,
            &self.models,
            measurements,
            &mut self.bus,
            &self.farm,
            &self.config,
            &mut self.rng,
        )
    }
}
