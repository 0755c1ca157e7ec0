//! Command-line front end for the schedule simulator.
//!
//! Exit codes: 0 ok, 1 configuration or usage error, 2 infeasible cycle
//! solve, 3 runtime/IO failure. Thread count follows rayon's
//! RAYON_NUM_THREADS environment variable.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use schedsim_core::fit::{dataset_hash, dataset_hash_bytes};
use schedsim_core::io::{self, FileMeta, FitsFile};
use schedsim_core::{
    compare, fit, rachlin_exponent, rdrl_predictions, run_break_run, run_sweep,
    solve_cycle_params, Error, FitOptions, FitResult, ModelFamily, SolverRequest,
};

#[derive(Parser)]
#[command(
    name = "schedsim",
    version,
    about = "Simulate random reinforcement schedules and fit feedback functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find (T, p) cycle parameters realizing a target schedule size.
    SolveTp {
        /// Target size, seconds.
        #[arg(long)]
        size: f64,
        /// Simulation step, seconds.
        #[arg(long, default_value_t = 0.005)]
        dt: f64,
        /// Largest cycle length to consider, seconds.
        #[arg(long, default_value_t = 1.0)]
        tmax: f64,
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        format: OutFormat,
        /// Write the record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded sweep of sessions from a declarative experiment file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit feedback-function models to a sweep and rank them.
    Fit {
        /// Sweep CSV produced by `simulate`.
        #[arg(long)]
        data: PathBuf,
        /// all | rdrl | baum | killeen | prelec | rachlin | rdrl2exp | rdrl-reduced
        #[arg(long, default_value = "all")]
        family: String,
        /// Nominal schedule size in seconds (required for the rdrl families).
        #[arg(long)]
        size: Option<f64>,
        /// Rachlin normalization ceiling; defaults to the largest rate in the data.
        #[arg(long)]
        bmax: Option<f64>,
        /// Keep the B = 0 row (models are evaluated at their analytic limits).
        #[arg(long)]
        include_origin: bool,
        #[arg(long, default_value = "fits.json")]
        out: PathBuf,
    },
    /// Evaluate closed-form feedback functions.
    Predict(PredictArgs),
    /// Compare break-and-run responders against rate-matched plain responders.
    BreakRun {
        #[arg(long)]
        config: PathBuf,
    },
    /// Export tidy plot data: observed sweep points plus fitted model curves.
    Report {
        #[arg(long)]
        sweep: PathBuf,
        /// fits.json from `fit`; omit for an observed-only export.
        #[arg(long)]
        fits: Option<PathBuf>,
        /// Evaluation grid lo:hi:step; defaults to the observed range.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value = "plot.csv")]
        out: PathBuf,
    },
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct PredictArgs {
    #[command(subcommand)]
    points: Option<PredictPoints>,
    /// baum | killeen | prelec | rachlin | rdrl2exp | rdrl-reduced
    #[arg(long)]
    model: Option<String>,
    /// Schedule size V, seconds.
    #[arg(long)]
    size: Option<f64>,
    /// Killeen rise scale (required for killeen).
    #[arg(long)]
    c: Option<f64>,
    /// Rachlin exponent; defaults to the size-derived relation.
    #[arg(long)]
    m: Option<f64>,
    /// Rachlin normalization ceiling.
    #[arg(long, default_value_t = 200.0)]
    bmax: f64,
    /// Two-exponential decay scale (required for rdrl2exp).
    #[arg(long)]
    b: Option<f64>,
    /// Evaluate at a single response rate.
    #[arg(long, conflicts_with = "grid")]
    at: Option<f64>,
    /// Evaluation grid lo:hi:step.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PredictPoints {
    /// Closed-form peak and inflection descriptors of the RDRL curve.
    RdrlPoints {
        /// Schedule size V, seconds.
        #[arg(long)]
        size: f64,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        format: OutFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_class(&err))
        }
    }
}

fn exit_class(err: &Error) -> u8 {
    match err {
        Error::SolverInfeasible { .. } => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SolveTp {
            size,
            dt,
            tmax,
            format,
            out,
        } => solve_tp(size, dt, tmax, format, out),
        Command::Simulate { config } => simulate(&config),
        Command::Fit {
            data,
            family,
            size,
            bmax,
            include_origin,
            out,
        } => run_fit(&data, &family, size, bmax, include_origin, &out),
        Command::Predict(args) => predict(args),
        Command::BreakRun { config } => break_run(&config),
        Command::Report {
            sweep,
            fits,
            grid,
            out,
        } => report(&sweep, fits.as_deref(), grid.as_deref(), &out),
    }
}

fn write_or_print(out: Option<&std::path::Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve_tp(
    size: f64,
    dt: f64,
    tmax: f64,
    format: OutFormat,
    out: Option<PathBuf>,
) -> Result<(), Error> {
    let request = SolverRequest::new(size, dt, tmax)?;
    let result = solve_cycle_params(&request)?;
    let hash = dataset_hash_bytes(format!("solve-tp {size} {dt} {tmax}").as_bytes());
    let text = match format {
        OutFormat::Csv => format!(
            "# config_hash={hash:016x}\ncycle_s,arm_prob,mean_s,sd_s,mean_err,sd_ratio\n{},{},{},{},{},{}\n",
            result.cycle_s, result.arm_prob, result.mean_s, result.sd_s, result.mean_err,
            result.sd_ratio
        ),
        OutFormat::Json => {
            let mut value = serde_json::to_value(result).expect("serializable");
            value["config_hash"] = format!("{hash:016x}").into();
            format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"))
        }
    };
    write_or_print(out.as_deref(), &text)
}

fn simulate(config_path: &std::path::Path) -> Result<(), Error> {
    let experiment = schedsim_core::config::load_experiment(config_path)?;
    let points = run_sweep(
        &experiment.session,
        &experiment.schedule,
        &experiment.template,
    )?;
    let meta = FileMeta {
        config_hash: experiment.config_hash,
        seed: Some(experiment.session.master_seed),
    };
    io::write_sweep_csv(&experiment.sweep_csv, &points, &meta)?;
    if let Some(samples_path) = &experiment.samples_csv {
        io::write_samples_csv(samples_path, &points, &meta)?;
    }
    println!(
        "wrote {} ({} points x {} repetitions, {} {} s)",
        experiment.sweep_csv.display(),
        points.len(),
        experiment.session.repetitions,
        experiment.schedule.kind(),
        experiment.schedule.size(),
    );
    Ok(())
}

fn families_for(selector: &str) -> Result<Vec<ModelFamily>, Error> {
    match selector.to_ascii_lowercase().as_str() {
        "all" => Ok(vec![
            ModelFamily::Baum,
            ModelFamily::Killeen,
            ModelFamily::Prelec,
            ModelFamily::Rachlin,
        ]),
        "rdrl" => Ok(vec![ModelFamily::RdrlTwoExp, ModelFamily::RdrlReduced]),
        other => Ok(vec![ModelFamily::parse(other)?]),
    }
}

fn run_fit(
    data_path: &std::path::Path,
    family: &str,
    size: Option<f64>,
    bmax: Option<f64>,
    include_origin: bool,
    out: &std::path::Path,
) -> Result<(), Error> {
    let rows = io::read_sweep_csv(data_path)?;
    let data: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| include_origin || r.rate_nominal_per_min > 0.0)
        .map(|r| (r.rate_nominal_per_min, r.reinf_mean_per_min))
        .collect();
    let opts = FitOptions {
        nominal_size_s: size,
        rate_ceiling_per_min: bmax,
        ..FitOptions::default()
    };
    let fits: Vec<FitResult> = families_for(family)?
        .into_iter()
        .map(|f| fit(f, &data, &opts))
        .collect::<Result<_, _>>()?;
    let ranking = compare(&fits)?;

    println!(
        "{:<14}{:>3}{:>12}{:>14}{:>12}{:>12}  {:<11}{:>5}",
        "family", "k", "R^2", "RSS", "AIC", "BIC", "quality", "rank"
    );
    for entry in &ranking {
        let fit_result = fits
            .iter()
            .find(|f| f.model.family() == entry.family)
            .expect("ranked family came from fits");
        println!(
            "{:<14}{:>3}{:>12.6}{:>14.6e}{:>12.2}{:>12.2}  {:<11}{:>5}",
            entry.family.to_string(),
            fit_result.k,
            entry.r_squared,
            entry.rss,
            entry.aic,
            entry.bic,
            format!("{:?}", entry.quality).to_lowercase(),
            entry.bic_rank,
        );
    }

    let file = FitsFile {
        config_hash: dataset_hash(&data),
        data_file: data_path.display().to_string(),
        fits,
    };
    io::write_fits_json(out, &file)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidConfig(format!("grid must be lo:hi:step, got '{text}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    let step: f64 = parts[2].parse().map_err(|_| bad())?;
    if !(step > 0.0) || hi < lo {
        return Err(bad());
    }
    Ok(schedsim_core::config::grid_rates(lo, hi, step))
}

fn predict(args: PredictArgs) -> Result<(), Error> {
    if let Some(PredictPoints::RdrlPoints { size, format, out }) = args.points {
        if !(size > 0.0) {
            return Err(Error::InvalidConfig("size must be positive".into()));
        }
        let points = rdrl_predictions(size);
        let hash = dataset_hash_bytes(format!("rdrl-points {size}").as_bytes());
        let text = match format {
            OutFormat::Json => {
                let mut value = serde_json::to_value(points).expect("serializable");
                value["config_hash"] = format!("{hash:016x}").into();
                format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable"))
            }
            OutFormat::Csv => format!(
                "# config_hash={hash:016x}\nb,c,b_at_peak,r_at_peak,b_at_inflection,r_at_inflection\n{},{},{},{},{},{}\n",
                points.b,
                points.c,
                points.b_at_peak,
                points.r_at_peak,
                points.b_at_inflection,
                points.r_at_inflection
            ),
        };
        return write_or_print(out.as_deref(), &text);
    }

    let (model_name, size) = match (&args.model, args.size) {
        (Some(model), Some(size)) if size > 0.0 => (model.clone(), size),
        _ => {
            return Err(Error::InvalidConfig(
                "predict needs --model and a positive --size (or the rdrl-points subcommand)"
                    .into(),
            ))
        }
    };
    let family = ModelFamily::parse(&model_name)?;
    let model = instantiate_model(family, size, &args)?;

    let grid = match (args.at, &args.grid) {
        (Some(b), _) => vec![b],
        (None, Some(spec)) => parse_grid(spec)?,
        (None, None) => schedsim_core::config::grid_rates(0.0, 200.0, 1.0),
    };
    if grid.iter().any(|&b| model.extrapolates(b)) {
        eprintln!(
            "warning: rates above the normalization ceiling {} extrapolate the rachlin curve",
            args.bmax
        );
    }

    let hash = dataset_hash_bytes(
        format!("predict {model_name} {size} {:?} {:?}", args.at, args.grid).as_bytes(),
    );
    let mut text = format!("# config_hash={hash:016x}\nB_per_min,R_per_min\n");
    for &b in &grid {
        text.push_str(&format!("{},{}\n", b, model.eval(b)));
    }
    write_or_print(args.out.as_deref(), &text)
}

fn instantiate_model(
    family: ModelFamily,
    size: f64,
    args: &PredictArgs,
) -> Result<schedsim_core::RffModel, Error> {
    use schedsim_core::RffModel;
    let model = match family {
        ModelFamily::Baum => RffModel::Baum { size_s: size },
        ModelFamily::Prelec => RffModel::Prelec { size_s: size },
        ModelFamily::Killeen => {
            let c = args.c.ok_or_else(|| {
                Error::InvalidConfig("killeen needs --c (no size-derived default exists)".into())
            })?;
            RffModel::Killeen { size_s: size, c }
        }
        ModelFamily::Rachlin => RffModel::Rachlin {
            size_s: size,
            m: args.m.unwrap_or_else(|| rachlin_exponent(size)),
            b_max: args.bmax,
        },
        ModelFamily::RdrlTwoExp => {
            let (b, c) = match (args.b, args.c) {
                (Some(b), Some(c)) => (b, c),
                _ => {
                    let p = rdrl_predictions(size);
                    (args.b.unwrap_or(p.b), args.c.unwrap_or(p.c))
                }
            };
            RffModel::RdrlTwoExp { size_s: size, b, c }
        }
        ModelFamily::RdrlReduced => RffModel::RdrlReduced { size_s: size },
    };
    model.validate()?;
    Ok(model)
}

fn break_run(config_path: &std::path::Path) -> Result<(), Error> {
    let resolved = schedsim_core::config::load_break_run(config_path)?;
    let points = run_break_run(&resolved.session, &resolved.schedule, &resolved.settings)?;
    let meta = FileMeta {
        config_hash: resolved.config_hash,
        seed: Some(resolved.session.master_seed),
    };
    io::write_break_run_csv(&resolved.report_csv, &points, &meta)?;
    println!(
        "{:>6} {:>7} {:>9} {:>11} {:>11} {:>22} {:>7}",
        "P_run", "P_break", "eff/min", "burst_mean", "plain_mean", "plain_hdi", "within"
    );
    for p in &points {
        println!(
            "{:>6} {:>7} {:>9.2} {:>11.4} {:>11.4} {:>10.4} {:>10.4} {:>8}",
            p.run_start_prob,
            p.break_start_prob,
            p.effective_rate_per_min,
            p.burst_mean,
            p.plain_mean,
            p.plain_hdi_lo,
            p.plain_hdi_hi,
            p.within_hdi,
        );
    }
    println!("wrote {}", resolved.report_csv.display());
    Ok(())
}

fn report(
    sweep_path: &std::path::Path,
    fits_path: Option<&std::path::Path>,
    grid: Option<&str>,
    out: &std::path::Path,
) -> Result<(), Error> {
    let observed = io::read_sweep_csv(sweep_path)?;
    let fits = match fits_path {
        Some(path) => io::read_fits_json(path)?.fits,
        None => Vec::new(),
    };
    let grid = match grid {
        Some(spec) => parse_grid(spec)?,
        None => io::default_plot_grid(&observed),
    };
    let sweep_bytes = std::fs::read(sweep_path)?;
    let meta = FileMeta {
        config_hash: dataset_hash_bytes(&sweep_bytes),
        seed: None,
    };
    io::emit_plot_data(out, &observed, &fits, &grid, &meta)?;
    println!(
        "wrote {} ({} observed points, {} model curves)",
        out.display(),
        observed.len(),
        fits.len()
    );
    Ok(())
}
