//! `elasticmkl`: train and apply elastic-net MKL classifiers, and run the
//! two weight subproblems by hand.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a solver
//! ran out of iterations before meeting its tolerance.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use elasticmkl::enlp::enlp_solve_detailed;
use elasticmkl::persist::model_to_string;
use elasticmkl::{
    build_gram_stack, data, datasets, enlp_oracle, load_dataset, load_kernel_config, load_model,
    save_trace, train, wsr_oracle, wsr_solve, DataFormat, ElasticNetMix, MklConfig, MklError,
    MklModel, WsrConfig, WsrStrategy,
};

#[derive(Parser)]
#[command(name = "elasticmkl", version, about = "Multiple kernel learning with elastic-net constrained kernel weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a classifier and write the model file.
    Train(TrainArgs),
    /// Predict labels with a saved model.
    Predict(PredictArgs),
    /// Minimize Σ βₖ/θₖ over the elastic-net set for β read from a file.
    SolveWsr(WsrArgs),
    /// Maximize ⟨u, θ⟩ over the elastic-net set for u read from a file.
    SolveLp(LpArgs),
    /// Write a seeded synthetic dataset in LIBSVM format.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Libsvm,
    Csv,
}

impl From<FormatArg> for DataFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Libsvm => DataFormat::Libsvm,
            FormatArg::Csv => DataFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    /// Pick from η.
    Auto,
    Main,
    Alternating,
}

fn wsr_config(eta: ElasticNetMix, strategy: StrategyArg, eps: f64) -> WsrConfig {
    let cfg = WsrConfig::for_eta(eta).with_eps(eps);
    match strategy {
        StrategyArg::Auto => cfg,
        StrategyArg::Main => cfg.with_strategy(WsrStrategy::Main),
        StrategyArg::Alternating => cfg.with_strategy(WsrStrategy::Alternating),
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training data.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "libsvm")]
    format: FormatArg,
    /// Kernel configuration, one kernel per line (e.g. `rbf gamma=0.5`).
    #[arg(long)]
    kernels: PathBuf,
    /// Elastic-net mix: 1 is the L1 constraint, 0 the L2 ball.
    #[arg(long, allow_negative_numbers = true)]
    eta: f64,
    /// SVM box constraint.
    #[arg(short = 'C', default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-4)]
    eps_mkl: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps_wsr: f64,
    #[arg(long, default_value_t = 1e-6)]
    svm_tol: f64,
    /// Maximum outer iterations.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, value_enum, default_value = "auto")]
    wsr_strategy: StrategyArg,
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Per-iteration CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "libsvm")]
    format: FormatArg,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct WsrArgs {
    /// File of β values separated by whitespace or commas.
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    eta: f64,
    #[arg(long, default_value_t = 1e-9)]
    eps_wsr: f64,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Also run the bisection oracle and report the deviation.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct LpArgs {
    /// File of u values separated by whitespace or commas.
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    eta: f64,
    /// Also run the support-enumeration oracle and report the deviation.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    TwoGaussians,
    Xor,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "two-gaussians")]
    kind: KindArg,
    #[arg(short = 'n', long, default_value_t = 40)]
    n: usize,
    /// Distance between class means (two-gaussians) or the empty band
    /// around the axes (xor).
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn write_file(path: &Path, text: &str) -> Result<(), MklError> {
    fs::write(path, text).map_err(|e| MklError::from(e).with_path(path))
}

fn cmd_train(args: &TrainArgs) -> Result<ExitCode, MklError> {
    let eta = ElasticNetMix::new(args.eta)?;
    let specs = load_kernel_config(&args.kernels)?;
    let dataset = load_dataset(&args.data, args.format.into())?;
    info!(
        "{} instances, {} features, {} kernels",
        dataset.len(),
        dataset.dim(),
        specs.len()
    );
    let cfg = MklConfig::new(eta)
        .with_c(args.c)
        .with_eps_mkl(args.eps_mkl)
        .with_svm_tol(args.svm_tol)
        .with_max_outer_iters(args.max_iters)
        .with_wsr(wsr_config(eta, args.wsr_strategy, args.eps_wsr));

    let stack = build_gram_stack(&dataset.features, &dataset.labels, &specs)?;
    let fit = train(&stack, &cfg)?;
    let model = MklModel::from_fit(&fit, &specs, &stack, &dataset.features, &cfg)?;

    println!("theta: {}", fmt_vec(fit.theta.as_slice()));
    println!("objective: {}", fit.objective());
    println!("gap: {:e}", fit.gap);
    println!("iterations: {}", fit.iterations);
    println!("converged: {}", fit.converged);
    println!("support vectors: {}", model.support.len());

    if let Some(path) = &args.model_out {
        write_file(path, &model_to_string(&model))?;
    }
    if let Some(path) = &args.trace {
        save_trace(&fit.trace, path)?;
    }
    if fit.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "warning: gap {:e} still above {:e} after {} iterations",
            fit.gap, args.eps_mkl, fit.iterations
        );
        Ok(ExitCode::from(2))
    }
}

fn cmd_predict(args: &PredictArgs) -> Result<ExitCode, MklError> {
    let model = load_model(&args.model)?;
    if model.uses_precomputed() {
        return Err(MklError::Input(
            "model uses precomputed kernels; prediction from raw features is not possible".into(),
        ));
    }
    let mut dataset = load_dataset(&args.data, args.format.into())?;
    if args.format == FormatArg::Libsvm {
        // trailing zero features are omitted in sparse files
        dataset.pad_to(model.dim)?;
    }
    let mut out = String::new();
    let mut correct = 0;
    for (x, y) in dataset.features.iter().zip(&dataset.labels) {
        let p = model.predict_features(x)?;
        if p == *y {
            correct += 1;
        }
        out.push_str(if p > 0.0 { "+1\n" } else { "-1\n" });
    }
    match &args.labels_out {
        Some(path) => write_file(path, &out)?,
        None => print!("{out}"),
    }
    eprintln!(
        "accuracy: {} ({correct}/{})",
        correct as f64 / dataset.len() as f64,
        dataset.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve_wsr(args: &WsrArgs) -> Result<ExitCode, MklError> {
    let eta = ElasticNetMix::new(args.eta)?;
    let beta = data::load_vector(&args.input)?;
    let cfg = wsr_config(eta, args.strategy, args.eps_wsr);
    let sol = wsr_solve(&beta, &vec![1.0; beta.len()], eta, &cfg)?;
    println!("theta: {}", fmt_vec(&sol.theta));
    println!("objective: {}", sol.objective);
    println!("certificate: {:e}", sol.certificate);
    println!("iterations: {}", sol.iterations);
    println!("converged: {}", sol.converged);
    if args.oracle {
        let reference = wsr_oracle(&beta, eta, 1e-10)?;
        println!("oracle: {}", fmt_vec(&reference));
        println!("max deviation: {:e}", max_deviation(&sol.theta, &reference));
    }
    Ok(if sol.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_solve_lp(args: &LpArgs) -> Result<ExitCode, MklError> {
    let eta = ElasticNetMix::new(args.eta)?;
    let u = data::load_vector(&args.input)?;
    let st = enlp_solve_detailed(&u, eta)?;
    let value: f64 = st.iterate.iter().zip(&u).map(|(a, b)| a * b).sum();
    println!("theta: {}", fmt_vec(&st.iterate));
    println!("objective: {value}");
    println!(
        "constraint residual: {:e}",
        (eta.constraint_value(&st.iterate) - 1.0).abs()
    );
    println!("passes: {}", st.passes);
    if args.oracle {
        let reference = enlp_oracle(&u, eta)?;
        println!("oracle: {}", fmt_vec(&reference));
        println!("max deviation: {:e}", max_deviation(&st.iterate, &reference));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode, MklError> {
    if args.n < 2 {
        return Err(MklError::Input("need at least two points".into()));
    }
    let d = match args.kind {
        KindArg::TwoGaussians => datasets::two_gaussians(args.n, args.separation, args.seed),
        KindArg::Xor => {
            if !(0.0..1.0).contains(&args.separation) {
                return Err(MklError::Input("xor separation must lie in [0, 1)".into()));
            }
            datasets::xor(args.n, args.separation, args.seed)
        }
    };
    write_file(&args.out, &datasets::to_libsvm(&d))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::SolveWsr(a) => cmd_solve_wsr(a),
        Command::SolveLp(a) => cmd_solve_lp(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
