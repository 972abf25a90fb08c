//! Per-turbine neural surrogates of the 60 s platform response.
//!
//! Each turbine gets its own 6-20-4 feed-forward network mapping
//! (x, y, vx, vy, induction, yaw) to the state one sampling period later.
//! Networks are trained on simulator transitions recorded while inputs are
//! randomly redrawn, and deliberately see no neighbor data: aerodynamic
//! coupling through the wakes acts as a disturbance the controller absorbs
//! through feedback.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::farm::{FarmConfig, TurbineInput, TurbineState};
use crate::wake::{settle_farm, step_farm, PRE_ROLL_SECONDS};
use crate::{Error, Result, SAMPLING_PERIOD, SIM_DT};

/// Hidden layer width.
pub const HIDDEN_NEURONS: usize = 20;
/// Per-turbine, per-period probability of redrawing the control input.
pub const REDRAW_PROBABILITY: f64 = 0.1;
/// Induction range sampled during data generation.
pub const INDUCTION_RANGE: (f64, f64) = (0.2, 0.4);
/// Yaw magnitude limit sampled during data generation, rad.
pub const YAW_RANGE: f64 = 20.0 * std::f64::consts::PI / 180.0;

const NUM_FEATURES: usize = 6;
const NUM_TARGETS: usize = 4;
const NUM_PARAMS: usize = HIDDEN_NEURONS * NUM_FEATURES + HIDDEN_NEURONS + NUM_TARGETS * HIDDEN_NEURONS + NUM_TARGETS;

/// One recorded transition: (state, input) at a period start, state at its end.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub features: [f64; NUM_FEATURES],
    pub targets: [f64; NUM_TARGETS],
}

/// Simulator transitions grouped per turbine.
#[derive(Debug, Clone)]
pub struct TrainingDataset {
    pub per_turbine: Vec<Vec<Sample>>,
    /// True when generation stopped early because the simulator diverged.
    pub truncated: bool,
}

impl TrainingDataset {
    /// CSV dump for one turbine, one row per transition.
    pub fn write_csv(&self, turbine: usize, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "x_m,y_m,vx_ms,vy_ms,induction,yaw_rad,next_x_m,next_y_m,next_vx_ms,next_vy_ms"
        )?;
        for s in &self.per_turbine[turbine] {
            let f = s.features;
            let t = s.targets;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                f[0], f[1], f[2], f[3], f[4], f[5], t[0], t[1], t[2], t[3]
            )?;
        }
        Ok(())
    }
}

fn features_of(state: &TurbineState, input: &TurbineInput) -> [f64; NUM_FEATURES] {
    [state.x, state.y, state.vx, state.vy, input.induction, input.yaw]
}

fn targets_of(state: &TurbineState) -> [f64; NUM_TARGETS] {
    [state.x, state.y, state.vx, state.vy]
}

fn draw_input(rng: &mut ChaCha8Rng) -> TurbineInput {
    TurbineInput {
        induction: rng.gen_range(INDUCTION_RANGE.0..=INDUCTION_RANGE.1),
        yaw: rng.gen_range(-YAW_RANGE..=YAW_RANGE),
    }
}

/// Redraws each turbine's input with the generation probability.
fn maybe_redraw(inputs: &mut [TurbineInput], rng: &mut ChaCha8Rng) {
    for input in inputs.iter_mut() {
        if rng.gen::<f64>() < REDRAW_PROBABILITY {
            *input = draw_input(rng);
        }
    }
}

/// Runs the simulator under randomly redrawn inputs and records one
/// transition per turbine per sampling period. The farm starts from the
/// settled greedy state under a steady 8 m/s wind; a divergence stops
/// generation early and flags the partial dataset.
pub fn generate_training_data(
    config: &FarmConfig,
    steps: usize,
    seed: u64,
) -> Result<TrainingDataset> {
    if steps == 0 {
        return Err(Error::InvalidConfig("training steps must be positive".into()));
    }
    let wind = crate::Vec2::new(8.0, 0.0);
    let mut farm = settle_farm(config, wind, PRE_ROLL_SECONDS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.len();
    let mut inputs = vec![TurbineInput::greedy(); n];
    let mut data = TrainingDataset { per_turbine: vec![Vec::with_capacity(steps); n], truncated: false };
    let inner = (SAMPLING_PERIOD / SIM_DT).round() as usize;
    'outer: for _ in 0..steps {
        maybe_redraw(&mut inputs, &mut rng);
        let starts: Vec<TurbineState> = farm.states.clone();
        for _ in 0..inner {
            if step_farm(&mut farm, &inputs, wind, SIM_DT, config).is_err() {
                data.truncated = true;
                break 'outer;
            }
        }
        for i in 0..n {
            data.per_turbine[i].push(Sample {
                features: features_of(&starts[i], &inputs[i]),
                targets: targets_of(&farm.states[i]),
            });
        }
    }
    Ok(data)
}

/// Anything that maps a turbine's (state, input) to the state one sampling
/// period ahead. Implemented by the trained networks and by analytic stand-ins
/// in controller tests.
pub trait NextStateModel {
    fn next_state(&self, state: &TurbineState, input: &TurbineInput) -> TurbineState;
}

/// A trained 6-20-4 network plus its normalization and validation record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateModel {
    /// Index of the turbine this model was fitted to.
    pub turbine: usize,
    pub w1: [[f64; NUM_FEATURES]; HIDDEN_NEURONS],
    pub b1: [f64; HIDDEN_NEURONS],
    pub w2: [[f64; HIDDEN_NEURONS]; NUM_TARGETS],
    pub b2: [f64; NUM_TARGETS],
    pub input_offset: [f64; NUM_FEATURES],
    pub input_scale: [f64; NUM_FEATURES],
    pub output_offset: [f64; NUM_TARGETS],
    pub output_scale: [f64; NUM_TARGETS],
    /// Normalized-space validation MSE of the restored best epoch.
    pub validation_mse: f64,
    /// Validation MSE of always predicting the training-set mean.
    pub baseline_mse: f64,
}

impl SurrogateModel {
    pub fn validate(&self) -> Result<()> {
        let finite = self.w1.iter().flatten().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.iter().flatten().all(|v| v.is_finite())
            && self.b2.iter().all(|v| v.is_finite())
            && self.input_offset.iter().all(|v| v.is_finite())
            && self.output_offset.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("surrogate weights must be finite".into()));
        }
        if self.input_scale.iter().chain(self.output_scale.iter()).any(|&s| !(s.abs() > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig("surrogate normalization scales must be nonzero".into()));
        }
        Ok(())
    }

    /// Forward pass: normalize, tanh hidden layer, linear output, denormalize.
    pub fn predict(&self, state: &TurbineState, input: &TurbineInput) -> TurbineState {
        if input.induction < INDUCTION_RANGE.0 - 1e-9
            || input.induction > INDUCTION_RANGE.1 + 1e-9
            || input.yaw.abs() > YAW_RANGE + 1e-9
        {
            log::warn!(
                "surrogate queried outside its training range: a = {}, yaw = {} rad",
                input.induction,
                input.yaw
            );
        }
        let f = features_of(state, input);
        let mut z = [0.0; NUM_FEATURES];
        for j in 0..NUM_FEATURES {
            z[j] = (f[j] - self.input_offset[j]) / self.input_scale[j];
        }
        let mut h = [0.0; HIDDEN_NEURONS];
        for i in 0..HIDDEN_NEURONS {
            let mut acc = self.b1[i];
            for j in 0..NUM_FEATURES {
                acc += self.w1[i][j] * z[j];
            }
            h[i] = acc.tanh();
        }
        let mut out = [0.0; NUM_TARGETS];
        for k in 0..NUM_TARGETS {
            let mut acc = self.b2[k];
            for i in 0..HIDDEN_NEURONS {
                acc += self.w2[k][i] * h[i];
            }
            out[k] = acc * self.output_scale[k] + self.output_offset[k];
        }
        TurbineState { x: out[0], y: out[1], vx: out[2], vy: out[3] }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingModel(path.display().to_string()));
        }
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let model: SurrogateModel = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }
}

impl NextStateModel for SurrogateModel {
    fn next_state(&self, state: &TurbineState, input: &TurbineInput) -> TurbineState {
        self.predict(state, input)
    }
}

/// Free-function form of the forward pass.
pub fn predict_next_state(
    model: &SurrogateModel,
    state: &TurbineState,
    input: &TurbineInput,
) -> TurbineState {
    model.predict(state, input)
}

/// Iterates a model over an input sequence; the returned trajectory starts at
/// `x0` and has one more entry than `inputs`.
pub fn rollout<M: NextStateModel>(
    model: &M,
    x0: TurbineState,
    inputs: &[TurbineInput],
) -> Vec<TurbineState> {
    let mut traj = Vec::with_capacity(inputs.len() + 1);
    traj.push(x0);
    for input in inputs {
        let next = model.next_state(traj.last().unwrap(), input);
        traj.push(next);
    }
    traj
}

/// Raw network parameters used during training.
#[derive(Clone)]
struct Params {
    w1: [[f64; NUM_FEATURES]; HIDDEN_NEURONS],
    b1: [f64; HIDDEN_NEURONS],
    w2: [[f64; HIDDEN_NEURONS]; NUM_TARGETS],
    b2: [f64; NUM_TARGETS],
}

impl Params {
    fn zeros() -> Self {
        Params {
            w1: [[0.0; NUM_FEATURES]; HIDDEN_NEURONS],
            b1: [0.0; HIDDEN_NEURONS],
            w2: [[0.0; HIDDEN_NEURONS]; NUM_TARGETS],
            b2: [0.0; NUM_TARGETS],
        }
    }

    /// Xavier-uniform initialization.
    fn init(rng: &mut ChaCha8Rng) -> Self {
        let mut p = Params::zeros();
        let lim1 = (6.0 / (NUM_FEATURES + HIDDEN_NEURONS) as f64).sqrt();
        for row in p.w1.iter_mut() {
            for w in row.iter_mut() {
                *w = rng.gen_range(-lim1..lim1);
            }
        }
        let lim2 = (6.0 / (HIDDEN_NEURONS + NUM_TARGETS) as f64).sqrt();
        for row in p.w2.iter_mut() {
            for w in row.iter_mut() {
                *w = rng.gen_range(-lim2..lim2);
            }
        }
        p
    }

    fn get(&self, idx: usize) -> f64 {
        let mut i = idx;
        if i < HIDDEN_NEURONS * NUM_FEATURES {
            return self.w1[i / NUM_FEATURES][i % NUM_FEATURES];
        }
        i -= HIDDEN_NEURONS * NUM_FEATURES;
        if i < HIDDEN_NEURONS {
            return self.b1[i];
        }
        i -= HIDDEN_NEURONS;
        if i < NUM_TARGETS * HIDDEN_NEURONS {
            return self.w2[i / HIDDEN_NEURONS][i % HIDDEN_NEURONS];
        }
        self.b2[i - NUM_TARGETS * HIDDEN_NEURONS]
    }

    fn set(&mut self, idx: usize, v: f64) {
        let mut i = idx;
        if i < HIDDEN_NEURONS * NUM_FEATURES {
            self.w1[i / NUM_FEATURES][i % NUM_FEATURES] = v;
            return;
        }
        i -= HIDDEN_NEURONS * NUM_FEATURES;
        if i < HIDDEN_NEURONS {
            self.b1[i] = v;
            return;
        }
        i -= HIDDEN_NEURONS;
        if i < NUM_TARGETS * HIDDEN_NEURONS {
            self.w2[i / HIDDEN_NEURONS][i % HIDDEN_NEURONS] = v;
            return;
        }
        self.b2[i - NUM_TARGETS * HIDDEN_NEURONS] = v;
    }
}

fn forward(p: &Params, z: &[f64; NUM_FEATURES]) -> ([f64; HIDDEN_NEURONS], [f64; NUM_TARGETS]) {
    let mut h = [0.0; HIDDEN_NEURONS];
    for i in 0..HIDDEN_NEURONS {
        let mut acc = p.b1[i];
        for j in 0..NUM_FEATURES {
            acc += p.w1[i][j] * z[j];
        }
        h[i] = acc.tanh();
    }
    let mut o = [0.0; NUM_TARGETS];
    for k in 0..NUM_TARGETS {
        let mut acc = p.b2[k];
        for i in 0..HIDDEN_NEURONS {
            acc += p.w2[k][i] * h[i];
        }
        o[k] = acc;
    }
    (h, o)
}

/// Mean squared error over samples and outputs.
fn mse(p: &Params, samples: &[Sample]) -> f64 {
    let mut total = 0.0;
    for s in samples {
        let (_, o) = forward(p, &s.features);
        for k in 0..NUM_TARGETS {
            let e = o[k] - s.targets[k];
            total += e * e;
        }
    }
    total / (samples.len() * NUM_TARGETS) as f64
}

/// Loss and analytic gradient over a batch, by back-propagation.
fn batch_gradient(p: &Params, batch: &[Sample]) -> (f64, Params) {
    let mut g = Params::zeros();
    let mut loss = 0.0;
    let scale = 1.0 / (batch.len() * NUM_TARGETS) as f64;
    for s in batch {
        let (h, o) = forward(p, &s.features);
        let mut dout = [0.0; NUM_TARGETS];
        for k in 0..NUM_TARGETS {
            let e = o[k] - s.targets[k];
            loss += e * e * scale;
            dout[k] = 2.0 * e * scale;
        }
        let mut dh = [0.0; HIDDEN_NEURONS];
        for k in 0..NUM_TARGETS {
            for i in 0..HIDDEN_NEURONS {
                g.w2[k][i] += dout[k] * h[i];
                dh[i] += dout[k] * p.w2[k][i];
            }
            g.b2[k] += dout[k];
        }
        for i in 0..HIDDEN_NEURONS {
            let da = dh[i] * (1.0 - h[i] * h[i]);
            for j in 0..NUM_FEATURES {
                g.w1[i][j] += da * s.features[j];
            }
            g.b1[i] += da;
        }
    }
    (loss, g)
}

/// Training hyperparameters; defaults fit the standard datasets.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early-stopping patience in epochs without a validation improvement.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 1e-3, batch_size: 64, max_epochs: 1000, patience: 50 }
    }
}

/// Per-epoch record of a training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epoch_train_loss: Vec<f64>,
    pub epoch_val_loss: Vec<f64>,
    pub best_epoch: usize,
}

struct Adam {
    m: Params,
    v: Params,
    t: u64,
}

impl Adam {
    fn new() -> Self {
        Adam { m: Params::zeros(), v: Params::zeros(), t: 0 }
    }

    fn update(&mut self, p: &mut Params, g: &Params, lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t as i32);
        let c2 = 1.0 - B2.powi(self.t as i32);
        for idx in 0..NUM_PARAMS {
            let grad = g.get(idx);
            let m = B1 * self.m.get(idx) + (1.0 - B1) * grad;
            let v = B2 * self.v.get(idx) + (1.0 - B2) * grad * grad;
            self.m.set(idx, m);
            self.v.set(idx, v);
            let step = lr * (m / c1) / ((v / c2).sqrt() + EPS);
            p.set(idx, p.get(idx) - step);
        }
    }
}

fn column_stats(samples: &[Sample]) -> ([f64; NUM_FEATURES], [f64; NUM_FEATURES], [f64; NUM_TARGETS], [f64; NUM_TARGETS]) {
    let n = samples.len() as f64;
    let mut f_mean = [0.0; NUM_FEATURES];
    let mut t_mean = [0.0; NUM_TARGETS];
    for s in samples {
        for j in 0..NUM_FEATURES {
            f_mean[j] += s.features[j] / n;
        }
        for k in 0..NUM_TARGETS {
            t_mean[k] += s.targets[k] / n;
        }
    }
    let mut f_std = [0.0; NUM_FEATURES];
    let mut t_std = [0.0; NUM_TARGETS];
    for s in samples {
        for j in 0..NUM_FEATURES {
            let d = s.features[j] - f_mean[j];
            f_std[j] += d * d / n;
        }
        for k in 0..NUM_TARGETS {
            let d = s.targets[k] - t_mean[k];
            t_std[k] += d * d / n;
        }
    }
    for v in f_std.iter_mut().chain(t_std.iter_mut()) {
        *v = v.sqrt();
        if *v < 1e-12 {
            *v = 1.0; // constant column; leave it unscaled
        }
    }
    (f_mean, f_std, t_mean, t_std)
}

fn normalize_samples(
    samples: &[Sample],
    f_off: &[f64; NUM_FEATURES],
    f_scale: &[f64; NUM_FEATURES],
    t_off: &[f64; NUM_TARGETS],
    t_scale: &[f64; NUM_TARGETS],
) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| {
            let mut f = [0.0; NUM_FEATURES];
            let mut t = [0.0; NUM_TARGETS];
            for j in 0..NUM_FEATURES {
                f[j] = (s.features[j] - f_off[j]) / f_scale[j];
            }
            for k in 0..NUM_TARGETS {
                t[k] = (s.targets[k] - t_off[k]) / t_scale[k];
            }
            Sample { features: f, targets: t }
        })
        .collect()
}

/// Trains one turbine's network with explicit hyperparameters; returns the
/// model (best validation epoch restored) and the per-epoch loss record.
pub fn train_network_with(
    data: &TrainingDataset,
    turbine: usize,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<(SurrogateModel, TrainReport)> {
    let samples = data
        .per_turbine
        .get(turbine)
        .ok_or_else(|| Error::InvalidConfig(format!("no turbine {turbine} in dataset")))?;
    if samples.len() < 500 {
        return Err(Error::Training(format!(
            "turbine {turbine} has {} samples; need at least 500",
            samples.len()
        )));
    }
    if cfg.batch_size == 0 || cfg.max_epochs == 0 {
        return Err(Error::InvalidConfig("batch size and epoch count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng);
    let n_val = (samples.len() / 5).max(1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let train_raw: Vec<Sample> = train_idx.iter().map(|&i| samples[i]).collect();
    let val_raw: Vec<Sample> = val_idx.iter().map(|&i| samples[i]).collect();

    let (f_off, f_scale, t_off, t_scale) = column_stats(&train_raw);
    let mut train = normalize_samples(&train_raw, &f_off, &f_scale, &t_off, &t_scale);
    let val = normalize_samples(&val_raw, &f_off, &f_scale, &t_off, &t_scale);

    let mut params = Params::init(&mut rng);
    let mut adam = Adam::new();
    let mut report = TrainReport {
        epoch_train_loss: Vec::new(),
        epoch_val_loss: Vec::new(),
        best_epoch: 0,
    };
    let mut best = params.clone();
    let mut best_val = f64::INFINITY;
    let mut since_best = 0;
    for epoch in 0..cfg.max_epochs {
        train.shuffle(&mut rng);
        for batch in train.chunks(cfg.batch_size) {
            let (_, grad) = batch_gradient(&params, batch);
            adam.update(&mut params, &grad, cfg.learning_rate);
        }
        report.epoch_train_loss.push(mse(&params, &train));
        let val_loss = mse(&params, &val);
        report.epoch_val_loss.push(val_loss);
        if val_loss < best_val {
            best_val = val_loss;
            best = params.clone();
            report.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= cfg.patience || epoch + 1 == cfg.max_epochs {
            break;
        }
    }
    // A run whose training loss never dropped below its first epoch within the
    // first 100 epochs is not learning at all. The relative margin ignores
    // order-of-summation noise from reshuffled batches.
    let losses = &report.epoch_train_loss;
    let window = losses.len().min(100);
    if window >= 2 && losses[1..window].iter().all(|&l| l >= losses[0] * (1.0 - 1e-9)) {
        return Err(Error::Training(format!(
            "training loss failed to decrease over the first {window} epochs"
        )));
    }

    let baseline_mse = val
        .iter()
        .map(|s| s.targets.iter().map(|t| t * t).sum::<f64>())
        .sum::<f64>()
        / (val.len() * NUM_TARGETS) as f64;
    let model = SurrogateModel {
        turbine,
        w1: best.w1,
        b1: best.b1,
        w2: best.w2,
        b2: best.b2,
        input_offset: f_off,
        input_scale: f_scale,
        output_offset: t_off,
        output_scale: t_scale,
        validation_mse: best_val,
        baseline_mse,
    };
    model.validate()?;
    Ok((model, report))
}

/// Trains with default hyperparameters.
pub fn train_network(data: &TrainingDataset, turbine: usize, seed: u64) -> Result<SurrogateModel> {
    train_network_with(data, turbine, seed, &TrainConfig::default()).map(|(m, _)| m)
}

/// Compares back-propagated gradients against central finite differences on
/// `coords` random parameter coordinates of a freshly initialized network.
/// Returns the largest relative mismatch.
pub fn gradient_check(data: &TrainingDataset, turbine: usize, seed: u64, coords: usize) -> Result<f64> {
    let samples = data
        .per_turbine
        .get(turbine)
        .ok_or_else(|| Error::InvalidConfig(format!("no turbine {turbine} in dataset")))?;
    if samples.is_empty() {
        return Err(Error::Training("gradient check needs samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f_off, f_scale, t_off, t_scale) = column_stats(samples);
    let batch: Vec<Sample> = normalize_samples(samples, &f_off, &f_scale, &t_off, &t_scale)
        .into_iter()
        .take(128)
        .collect();
    let params = Params::init(&mut rng);
    let (_, analytic) = batch_gradient(&params, &batch);
    let mut worst: f64 = 0.0;
    for _ in 0..coords {
        let idx = rng.gen_range(0..NUM_PARAMS);
        let w0 = params.get(idx);
        let h = 1e-5 * w0.abs().max(1.0);
        let mut p = params.clone();
        p.set(idx, w0 + h);
        let up = mse(&p, &batch);
        p.set(idx, w0 - h);
        let down = mse(&p, &batch);
        let fd = (up - down) / (2.0 * h);
        let a = analytic.get(idx);
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Per-turbine RMSE of [x, y, vx, vy] over repeated 60-period open-loop
/// rollouts against the full simulator.
#[derive(Debug, Clone)]
pub struct RmseTable {
    pub per_turbine: Vec<[f64; NUM_TARGETS]>,
    pub runs: usize,
}

/// Sampling periods of random excitation before each validation rollout.
pub const VALIDATION_WARMUP: usize = 20;
/// Sampling periods compared in each validation rollout.
pub const VALIDATION_HORIZON: usize = 60;

/// Table-style validation: from a randomly excited farm state, roll the
/// surrogates open-loop over 60 sampling periods alongside the simulator and
/// accumulate per-output RMSEs over `runs` repetitions.
pub fn validate_rmse<M: NextStateModel>(
    models: &[M],
    config: &FarmConfig,
    runs: usize,
    seed: u64,
) -> Result<RmseTable> {
    let n = config.len();
    if models.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} models for {n} turbines",
            models.len()
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidConfig("validation needs at least one run".into()));
    }
    let wind = crate::Vec2::new(8.0, 0.0);
    let settled = settle_farm(config, wind, PRE_ROLL_SECONDS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = (SAMPLING_PERIOD / SIM_DT).round() as usize;
    let mut sq_err = vec![[0.0; NUM_TARGETS]; n];
    let count = (runs * VALIDATION_HORIZON) as f64;
    for _ in 0..runs {
        let mut farm = settled.clone();
        let mut inputs = vec![TurbineInput::greedy(); n];
        for _ in 0..VALIDATION_WARMUP {
            maybe_redraw(&mut inputs, &mut rng);
            for _ in 0..inner {
                step_farm(&mut farm, &inputs, wind, SIM_DT, config)?;
            }
        }
        let mut surrogate_states: Vec<TurbineState> = farm.states.clone();
        for _ in 0..VALIDATION_HORIZON {
            maybe_redraw(&mut inputs, &mut rng);
            for _ in 0..inner {
                step_farm(&mut farm, &inputs, wind, SIM_DT, config)?;
            }
            for i in 0..n {
                surrogate_states[i] = models[i].next_state(&surrogate_states[i], &inputs[i]);
                let truth = targets_of(&farm.states[i]);
                let pred = targets_of(&surrogate_states[i]);
                for k in 0..NUM_TARGETS {
                    let e = pred[k] - truth[k];
                    sq_err[i][k] += e * e / count;
                }
            }
        }
    }
    Ok(RmseTable {
        per_turbine: sq_err
            .iter()
            .map(|row| {
                let mut out = [0.0; NUM_TARGETS];
                for k in 0..NUM_TARGETS {
                    out[k] = row[k].sqrt();
                }
                out
            })
            .collect(),
        runs,
    })
}
