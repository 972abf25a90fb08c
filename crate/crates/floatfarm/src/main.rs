//! Command-line front end: train surrogates, run a closed-loop comparison,
//! or sweep a parameter axis. The library does the real work.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use floatfarm::experiment::{
    export_run, load_models, model_file_name, run_closed_loop, run_greedy, run_sweep,
    write_sweep_csv, ControlMode, ExperimentSpec, SweepAxis,
};
use floatfarm::surrogate::{generate_training_data, train_network, validate_rmse};
use floatfarm::Result;

#[derive(Parser)]
#[command(name = "floatfarm", about = "Floating wind farm control testbed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Greedy,
    Dempc,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Sigma,
    Size,
}

#[derive(Subcommand)]
enum Command {
    /// Train per-turbine surrogate models and cache them as JSON files.
    Train {
        /// Number of turbines in the row.
        #[arg(long)]
        farm_size: usize,
        /// Simulated sampling periods of training data.
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        /// Seed for data generation; turbine i trains with seed + 1 + i.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory the model files go into.
        #[arg(long, default_value = "models")]
        out: PathBuf,
        /// Open-loop validation rollouts to report after training (0 skips).
        #[arg(long, default_value_t = 3)]
        validation_runs: usize,
    },
    /// Run one closed-loop hour and export CSV/JSON logs.
    Run {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        farm_size: usize,
        /// Wind perturbation magnitude in percent of the 8 m/s base.
        #[arg(long, default_value_t = 5.0)]
        sigma: f64,
        /// Wind seed; the controller uses seed + 1.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Logged duration in seconds, a multiple of 60.
        #[arg(long, default_value_t = 3600.0)]
        duration: f64,
        #[arg(long)]
        out: PathBuf,
        /// Where cached surrogate models live (dempc mode only).
        #[arg(long, default_value = "models")]
        models_dir: PathBuf,
    },
    /// Paired greedy/dempc comparisons along one parameter axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "models")]
        models_dir: PathBuf,
    },
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train { farm_size, steps, seed, out, validation_runs } => {
            train(farm_size, steps, seed, &out, validation_runs)
        }
        Command::Run { mode, farm_size, sigma, seed, duration, out, models_dir } => {
            let mode = match mode {
                ModeArg::Greedy => ControlMode::Greedy,
                ModeArg::Dempc => ControlMode::Dempc,
            };
            run(mode, farm_size, sigma / 100.0, seed, duration, &out, &models_dir)
        }
        Command::Sweep { axis, seed, out, models_dir } => {
            let axis = match axis {
                AxisArg::Sigma => SweepAxis::Sigma,
                AxisArg::Size => SweepAxis::Size,
            };
            sweep(axis, seed, &out, &models_dir)
        }
    }
}

fn train(
    farm_size: usize,
    steps: usize,
    seed: u64,
    out: &std::path::Path,
    validation_runs: usize,
) -> Result<()> {
    let spec = ExperimentSpec::new(ControlMode::Greedy, farm_size, 0.0, seed);
    let config = spec.build_farm()?;
    println!("generating {steps} training steps for a 1x{farm_size} row (seed {seed})");
    let data = generate_training_data(&config, steps, seed)?;
    std::fs::create_dir_all(out)
        .map_err(|e| floatfarm::Error::io(out.display().to_string(), e))?;
    let mut models = Vec::with_capacity(farm_size);
    for i in 0..farm_size {
        let model = train_network(&data, i, seed + 1 + i as u64)?;
        let path = out.join(model_file_name(farm_size, i));
        model.save(&path)?;
        println!("turbine {i}: saved {}", path.display());
        models.push(model);
    }
    if validation_runs > 0 {
        let table = validate_rmse(&models, &config, validation_runs, seed)?;
        for (i, rmse) in table.per_turbine.iter().enumerate() {
            println!(
                "turbine {i}: open-loop RMSE x={:.2} m, y={:.2} m, vx={:.3} m/s, vy={:.3} m/s",
                rmse[0], rmse[1], rmse[2], rmse[3]
            );
        }
    }
    Ok(())
}

fn run(
    mode: ControlMode,
    farm_size: usize,
    sigma: f64,
    seed: u64,
    duration: f64,
    out: &std::path::Path,
    models_dir: &std::path::Path,
) -> Result<()> {
    let spec = ExperimentSpec { duration, ..ExperimentSpec::new(mode, farm_size, sigma, seed) };
    let config = spec.build_farm()?;
    let log = match mode {
        ControlMode::Greedy => run_greedy(&spec, &config)?,
        ControlMode::Dempc => {
            let models = load_models(models_dir, farm_size)?;
            run_closed_loop(&spec, &config, Some(models.as_slice()))?
        }
    };
    export_run(&log, out)?;
    println!(
        "{} 1x{farm_size}: {:.4e} J over {duration} s, conflict rate {:.1}%, logs in {}",
        mode.as_str(),
        log.total_energy,
        100.0 * log.conflict_rate(),
        out.display()
    );
    Ok(())
}

fn sweep(
    axis: SweepAxis,
    seed: u64,
    out: &std::path::Path,
    models_dir: &std::path::Path,
) -> Result<()> {
    let template = ExperimentSpec::new(ControlMode::Dempc, 2, 0.05, seed);
    let points = run_sweep(&template, axis, |n| load_models(models_dir, n));
    std::fs::create_dir_all(out)
        .map_err(|e| floatfarm::Error::io(out.display().to_string(), e))?;
    let name = match axis {
        SweepAxis::Sigma => "sweep_sigma.csv",
        SweepAxis::Size => "sweep_size.csv",
    };
    let path = out.join(name);
    write_sweep_csv(&points, &path)?;
    for point in &points {
        match point {
            Ok(p) => println!(
                "1x{} sigma {:.0}%: gain {:.1}% (greedy {:.4e} J, dempc {:.4e} J)",
                p.farm_size,
                100.0 * p.sigma,
                p.gain_percent,
                p.energy_greedy_j,
                p.energy_dempc_j
            ),
            Err(e) => println!("point failed: {e}"),
        }
    }
    println!("summary written to {}", path.display());
    Ok(())
}
