use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnn_landscape::circuit::{hea, hva_tfim, AnsatzSpec, Boundary, Family, StateVector};
use qnn_landscape::harness::{
    haar_moments, rank_scan, run_sweep, worker_pool, write_matrix_dump, CompileLoss, ExperimentConfig, Task,
};
use qnn_landscape::info_geometry::{qfim, spectrum_report_with, unitary_qfim, RankMode, DEFAULT_RANK_TOL};
use qnn_landscape::landscape::{hessian, loss};
use qnn_landscape::optimize::{random_angles, seeded_rng, train, AdamConfig};
use qnn_landscape::Error;

#[derive(Parser)]
#[command(name = "qnnl", version, about = "Lie-algebraic rank analysis and training of periodic variational circuits")]
struct Cli {
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimension of the dynamical Lie algebra of an ansatz.
    Dla(DlaArgs),
    /// Train one seed with Adam and write its record and loss trace.
    Train(TrainArgs),
    /// Run a depth/seed sweep from a JSON config.
    Sweep(SweepArgs),
    /// QFIM spectrum at a given or random point.
    Qfim(QfimArgs),
    /// Hessian spectrum of a task loss at a given or random point.
    Hessian(HessianArgs),
    /// QFIM ranks at random points for one depth of a sweep config.
    RankScan(RankScanArgs),
    /// Monte-Carlo moment checks of the Haar sampler.
    HaarCheck(HaarArgs),
}

#[derive(Args)]
struct AnsatzArgs {
    #[arg(long, default_value = "hva_tfim")]
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "L", default_value_t = 1)]
    layers: usize,
    #[arg(long, default_value = "open")]
    boundary: Boundary,
    /// Ansatz JSON document; overrides the flags above.
    #[arg(long)]
    ansatz: Option<PathBuf>,
}

#[derive(Args)]
struct DlaArgs {
    #[command(flatten)]
    ansatz: AnsatzArgs,
    /// Write the closure basis to this file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Vqe,
    Compile,
    Autoencoder,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompileLossArg {
    L1,
    L2,
}

#[derive(Args)]
struct TaskArgs {
    #[arg(long, value_enum)]
    task: TaskArg,
    #[arg(long)]
    n: usize,
    #[arg(long = "L")]
    layers: usize,
    /// Chain boundary (vqe only).
    #[arg(long)]
    boundary: Option<Boundary>,
    /// Transverse field as an exact rational (vqe only).
    #[arg(long, default_value = "1")]
    field: String,
    #[arg(long, value_enum, default_value = "l2")]
    compile_loss: CompileLossArg,
    /// Trash register size (autoencoder only).
    #[arg(long)]
    n_trash: Option<usize>,
    #[arg(long, default_value_t = 4)]
    dataset_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "QNNL_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    task: TaskArgs,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct PointArgs {
    /// Comma-separated angles in radians; random from `--seed` when absent.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct QfimArgs {
    #[command(flatten)]
    ansatz: AnsatzArgs,
    #[command(flatten)]
    point: PointArgs,
    /// Use the normalized Choi state of the circuit instead of its output state.
    #[arg(long)]
    unitary: bool,
    #[arg(long, env = "QNNL_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct HessianArgs {
    #[command(flatten)]
    task: TaskArgs,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
}

#[derive(Args)]
struct RankScanArgs {
    #[arg(long)]
    config: PathBuf,
    /// Layer count to scan.
    #[arg(long)]
    depth: usize,
    /// Output directory (default: the config's).
    #[arg(long, env = "QNNL_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct HaarArgs {
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Fail {
    Invalid(String),
    Compute(String),
}

trait Phase<T> {
    fn invalid(self) -> Result<T, Fail>;
    fn compute(self) -> Result<T, Fail>;
}

impl<T> Phase<T> for qnn_landscape::Result<T> {
    fn invalid(self) -> Result<T, Fail> {
        self.map_err(|e| Fail::Invalid(e.to_string()))
    }
    fn compute(self) -> Result<T, Fail> {
        self.map_err(|e: Error| match e {
            Error::SizeGuard { .. } | Error::InvalidConfig(_) | Error::ParamCount { .. } => Fail::Invalid(e.to_string()),
            other => Fail::Compute(other.to_string()),
        })
    }
}

fn io<T>(r: std::io::Result<T>) -> Result<T, Fail> {
    r.map_err(|e| Fail::Compute(e.to_string()))
}

fn build_ansatz(args: &AnsatzArgs) -> Result<AnsatzSpec, Fail> {
    if let Some(path) = &args.ansatz {
        let text = std::fs::read_to_string(path).map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))?;
        return AnsatzSpec::from_json(&text).invalid();
    }
    let n = args.n.ok_or_else(|| Fail::Invalid("--n is required unless --ansatz is given".into()))?;
    match args.family {
        Family::HvaTfim => hva_tfim(n, args.layers, args.boundary).invalid(),
        Family::Hea => hea(n, args.layers).invalid(),
        Family::Custom => Err(Fail::Invalid("family custom needs --ansatz <file>".into())),
    }
}

fn parse_theta(text: &str, m: usize) -> Result<Vec<f64>, Fail> {
    let theta = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| Fail::Invalid(format!("bad angle \"{s}\": {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if theta.len() != m {
        return Err(Fail::Invalid(format!("--theta has {} angles, the ansatz has {m} parameters", theta.len())));
    }
    if theta.iter().any(|x| !x.is_finite()) {
        return Err(Fail::Invalid("--theta contains a non-finite angle".into()));
    }
    Ok(theta)
}

fn point(theta: &Option<String>, seed: u64, m: usize) -> Result<Vec<f64>, Fail> {
    match theta {
        Some(t) => parse_theta(t, m),
        None => Ok(random_angles(&mut seeded_rng(seed), m)),
    }
}

fn task_config(t: &TaskArgs) -> Result<ExperimentConfig, Fail> {
    let task = match t.task {
        TaskArg::Vqe => Task::Vqe,
        TaskArg::Compile => Task::Compile,
        TaskArg::Autoencoder => Task::Autoencoder,
    };
    let cfg = ExperimentConfig {
        task,
        n: t.n,
        boundary: t.boundary,
        depth_list: vec![t.layers],
        seeds_per_point: 1,
        adam: AdamConfig::default(),
        rank_scan: None,
        output_dir: t.output_dir.clone(),
        master_seed: t.seed,
        field: t.field.clone(),
        compile_loss: match t.compile_loss {
            CompileLossArg::L1 => CompileLoss::L1,
            CompileLossArg::L2 => CompileLoss::L2,
        },
        n_trash: t.n_trash,
        dataset_size: t.dataset_size,
        write_traces: false,
        max_optima_per_depth: 0,
    };
    cfg.validate().invalid()?;
    Ok(cfg)
}

fn write_spectrum(dir: &Path, stem: &str, m: &qnn_landscape::info_geometry::RealMatrix, mode: RankMode, theta: &[f64], kind: &str) -> Result<(), Fail> {
    let report = spectrum_report_with(m, DEFAULT_RANK_TOL, mode).compute()?;
    report.write_files(dir, stem).compute()?;
    write_matrix_dump(dir, stem, m, theta, kind).compute()?;
    let gap = if report.gap.is_finite() { format!("{:.3e}", report.gap) } else { "inf".into() };
    println!("M={} rank={} gap={} lambda_max={:.6e}", m.nrows(), report.rank, gap, report.lambda_max);
    Ok(())
}

fn dla(args: &DlaArgs) -> Result<(), Fail> {
    let a = build_ansatz(&args.ansatz)?;
    let basis = a.lie_algebra().compute()?;
    let dim = match a.sector() {
        Some(s) => s.restricted_dim(&basis).compute()?,
        None => basis.dim(),
    };
    println!("dim={dim}");
    println!("closure_dim={}", basis.dim());
    if let Some(path) = &args.dump {
        basis.write_to(path).compute()?;
    }
    Ok(())
}

fn train_cmd(args: &TrainArgs) -> Result<(), Fail> {
    let mut cfg = task_config(&args.task)?;
    if let Some(k) = args.max_iters {
        cfg.adam.max_iters = k;
    }
    if let Some(lr) = args.learning_rate {
        cfg.adam.learning_rate = lr;
    }
    cfg.adam.validate().invalid()?;
    let a = cfg.ansatz(args.task.layers).invalid()?;
    let spec = cfg.loss(0).compute()?;
    let adam = cfg.adam.clone().with_target(cfg.target(&spec).compute()?);
    let rec = train(&spec, &a, &adam, cfg.run_seed(args.task.layers, 0)).compute()?;
    let dir = &cfg.output_dir;
    io(std::fs::create_dir_all(dir))?;
    io(std::fs::write(
        dir.join("run.csv"),
        format!("{}\n{}\n", qnn_landscape::optimize::RunRecord::CSV_HEADER, rec.to_csv_row()),
    ))?;
    io(std::fs::write(dir.join("trace.csv"), rec.trace_csv()))?;
    io(std::fs::write(
        dir.join("run.json"),
        serde_json::to_string_pretty(&rec).map_err(|e| Fail::Compute(e.to_string()))?,
    ))?;
    println!(
        "M={} final_loss={:.16e} gap={:.3e} iterations={} success={}",
        rec.m,
        rec.final_loss,
        rec.gap(),
        rec.iterations_used,
        rec.success
    );
    Ok(())
}

fn sweep(args: &SweepArgs, jobs: Option<usize>) -> Result<(), Fail> {
    let cfg = ExperimentConfig::load(&args.config).invalid()?;
    let res = run_sweep(&cfg, jobs).compute()?;
    for d in &res.depths {
        println!("depth={} M={} success_probability={:.4}", d.depth, d.m, d.success_probability);
    }
    if !res.failures.is_empty() {
        eprintln!("{} runs failed; see log output", res.failures.len());
    }
    Ok(())
}

fn qfim_cmd(args: &QfimArgs) -> Result<(), Fail> {
    let a = build_ansatz(&args.ansatz)?;
    let theta = point(&args.point.theta, args.point.seed, a.num_params())?;
    let f = if args.unitary {
        unitary_qfim(&a, &theta).compute()?
    } else {
        let psi: StateVector = a.input_state().invalid()?;
        qfim(&a, &theta, &psi).compute()?
    };
    write_spectrum(&args.output_dir, "spectrum_qfim", &f, RankMode::Signed, &theta, "qfim")
}

fn hessian_cmd(args: &HessianArgs) -> Result<(), Fail> {
    let cfg = task_config(&args.task)?;
    let a = cfg.ansatz(args.task.layers).invalid()?;
    let theta = point(&args.theta, args.task.seed, a.num_params())?;
    let spec = cfg.loss(0).compute()?;
    let h = hessian(&spec, &a, &theta).compute()?;
    println!("loss={:.16e}", loss(&spec, &a, &theta).compute()?);
    write_spectrum(&cfg.output_dir, "spectrum_hessian", &h, RankMode::Magnitude, &theta, spec.kind_name())
}

fn rank_scan_cmd(args: &RankScanArgs, jobs: Option<usize>) -> Result<(), Fail> {
    let mut cfg = ExperimentConfig::load(&args.config).invalid()?;
    if let Some(d) = &args.output_dir {
        cfg.output_dir = d.clone();
    }
    cfg.ansatz(args.depth).invalid()?;
    let pool = worker_pool(jobs).invalid()?;
    let scan = pool.install(|| rank_scan(&cfg, args.depth)).compute()?;
    let dir = &cfg.output_dir;
    let mut csv = String::from("depth,M,point,rank,gap,lambda_max\n");
    for r in &scan.records {
        let gap = if r.report.gap.is_finite() { format!("{:.16e}", r.report.gap) } else { "inf".into() };
        csv.push_str(&format!("{},{},{},{},{},{:.16e}\n", r.depth, r.m, r.index, r.report.rank, gap, r.report.lambda_max));
        r.report
            .write_files(dir, &format!("spectrum_random_qfim_{}_{}", r.depth, r.index))
            .compute()?;
    }
    io(std::fs::create_dir_all(dir))?;
    io(std::fs::write(dir.join(format!("rank_scan_{}.csv", args.depth)), csv))?;
    println!(
        "depth={} M={} mean_rank={:.4} stddev={:.4} saturated={}",
        scan.depth, scan.m, scan.mean, scan.stddev, scan.saturated
    );
    Ok(())
}

fn haar_check(args: &HaarArgs) -> Result<(), Fail> {
    let m = haar_moments(args.d, args.samples, args.seed).invalid()?;
    println!(
        "E|U00|^2={:.6} (expected {:.6}, se {:.2e})",
        m.entry_mean,
        1.0 / m.d as f64,
        m.entry_se
    );
    println!("E|TrU|^2={:.6} (expected 1, se {:.2e})", m.trace_mean, m.trace_se);
    if m.within(3.0) {
        println!("haar-check: pass");
        Ok(())
    } else {
        Err(Fail::Compute("haar-check: moments outside 3 standard errors".into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.command {
        Command::Dla(a) => dla(a),
        Command::Train(a) => train_cmd(a),
        Command::Sweep(a) => sweep(a, cli.jobs),
        Command::Qfim(a) => qfim_cmd(a),
        Command::Hessian(a) => hessian_cmd(a),
        Command::RankScan(a) => rank_scan_cmd(a, cli.jobs),
        Command::HaarCheck(a) => haar_check(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
