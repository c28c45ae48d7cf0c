//! Depth/seed sweeps, rank scans, Haar sampling and compressible datasets.

mod sampling;

pub use sampling::{
    compressible_dataset, haar_moments, haar_state_with, haar_unitary, haar_unitary_with, HaarMoments,
};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{dla_dimension, hea, hva_tfim, AnsatzSpec, Boundary, StateVector};
use crate::error::{Error, Result};
use crate::info_geometry::{qfim, spectrum_report_with, unitary_qfim, RankMode, SpectrumReport, DEFAULT_RANK_TOL};
use crate::landscape::{
    ground_energy, hessian, hessian_rank_bound, linear_form_rank, LossSpec,
};
use crate::optimize::{derive_seed, newton_polish, random_angles, seeded_rng, train, AdamConfig, RunRecord};
use crate::pauli::parse_rational;

/// Loss gap below which a trained point counts as an optimum for rank analysis.
pub const OPTIMUM_GAP: f64 = 1e-9;

const TARGET_STREAM: u64 = u64::MAX;
const DATASET_STREAM: u64 = u64::MAX - 1;
const RANK_STREAM: u64 = u64::MAX - 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Vqe,
    Compile,
    Autoencoder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CompileLoss {
    L1,
    #[default]
    L2,
}

fn default_points() -> usize {
    30
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankScanConfig {
    #[serde(default = "default_points")]
    pub points_per_depth: usize,
    #[serde(default)]
    pub at_optima: bool,
}

impl Default for RankScanConfig {
    fn default() -> Self {
        RankScanConfig {
            points_per_depth: default_points(),
            at_optima: false,
        }
    }
}

fn default_seeds() -> usize {
    50
}
fn default_field() -> String {
    "1".into()
}
fn default_dataset_size() -> usize {
    4
}
fn default_max_optima() -> usize {
    5
}

/// One sweep over depths and seeds. `depth_list` holds layer counts `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub n: usize,
    /// Chain boundary for the VQE task (default open).
    #[serde(default)]
    pub boundary: Option<Boundary>,
    pub depth_list: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds_per_point: usize,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub rank_scan: Option<RankScanConfig>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    /// Transverse field `h` of the VQE Hamiltonian, as an exact rational.
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default)]
    pub compile_loss: CompileLoss,
    /// Trash register size for the autoencoder (default `n / 2`).
    #[serde(default)]
    pub n_trash: Option<usize>,
    #[serde(default = "default_dataset_size")]
    pub dataset_size: usize,
    /// Write `trace_<depth>_<seed>.csv` for every run.
    #[serde(default)]
    pub write_traces: bool,
    /// Converged runs per depth analysed at their optimum.
    #[serde(default = "default_max_optima")]
    pub max_optima_per_depth: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.depth_list.is_empty() {
            return bad("depth_list must not be empty".into());
        }
        if self.depth_list.windows(2).any(|w| w[0] >= w[1]) || self.depth_list[0] == 0 {
            return bad("depth_list must be strictly ascending positive layer counts".into());
        }
        if self.seeds_per_point == 0 {
            return bad("seeds_per_point must be at least 1".into());
        }
        if self.task != Task::Vqe && self.boundary.is_some() {
            return bad("boundary applies to the vqe task only".into());
        }
        if self.task != Task::Autoencoder && self.n_trash.is_some() {
            return bad("n_trash applies to the autoencoder task only".into());
        }
        if self.task == Task::Autoencoder {
            let t = self.trash();
            if t == 0 || t >= self.n {
                return bad(format!("n_trash = {t} must be in 1..{}", self.n));
            }
            if self.dataset_size == 0 {
                return Err(Error::EmptyDataset);
            }
        }
        if let Some(r) = &self.rank_scan {
            if r.points_per_depth == 0 && !r.at_optima {
                return bad("rank_scan requests no points".into());
            }
        }
        parse_rational(&self.field)?;
        self.adam.validate()?;
        // Build the smallest ansatz early so size and shape errors surface before any work.
        self.ansatz(self.depth_list[0])?;
        Ok(())
    }

    fn trash(&self) -> usize {
        self.n_trash.unwrap_or(self.n / 2)
    }

    pub fn boundary_or_default(&self) -> Boundary {
        self.boundary.unwrap_or(Boundary::Open)
    }

    pub fn ansatz(&self, depth: usize) -> Result<AnsatzSpec> {
        match self.task {
            Task::Vqe => hva_tfim(self.n, depth, self.boundary_or_default()),
            Task::Compile | Task::Autoencoder => hea(self.n, depth),
        }
    }

    pub fn dataset(&self) -> Result<Vec<StateVector>> {
        compressible_dataset(
            self.n,
            self.trash(),
            self.dataset_size,
            derive_seed(self.master_seed, &[DATASET_STREAM]),
        )
    }

    /// Loss for the `index`-th seed; compile targets differ per seed index.
    pub fn loss(&self, index: usize) -> Result<LossSpec> {
        match self.task {
            Task::Vqe => Ok(LossSpec::vqe(crate::circuit::tfim_hamiltonian(
                self.n,
                self.boundary_or_default(),
                parse_rational(&self.field)?,
            )?)),
            Task::Compile => {
                let v = haar_unitary(1 << self.n, derive_seed(self.master_seed, &[TARGET_STREAM, index as u64]))?;
                match self.compile_loss {
                    CompileLoss::L1 => LossSpec::compile_l1(v),
                    CompileLoss::L2 => LossSpec::compile_l2(v),
                }
            }
            Task::Autoencoder => LossSpec::autoencoder(self.dataset()?, self.trash()),
        }
    }

    /// Known global minimum of the loss.
    pub fn target(&self, spec: &LossSpec) -> Result<f64> {
        match spec {
            LossSpec::VqeEnergy { hamiltonian } => ground_energy(hamiltonian),
            other => other
                .analytic_floor()
                .ok_or_else(|| Error::InvalidConfig("loss has no known optimum".into())),
        }
    }

    pub fn run_seed(&self, depth: usize, index: usize) -> u64 {
        derive_seed(self.master_seed, &[depth as u64, index as u64])
    }

    pub fn task_name(&self) -> &'static str {
        match self.task {
            Task::Vqe => "vqe",
            Task::Compile => "compile",
            Task::Autoencoder => "autoencoder",
        }
    }

    fn boundary_name(&self) -> &'static str {
        match (self.task, self.boundary_or_default()) {
            (Task::Vqe, Boundary::Open) => "open",
            (Task::Vqe, Boundary::Closed) => "closed",
            _ => "none",
        }
    }
}

/// QFIM for the task: the output state's for state tasks, the Choi state's for compilation.
pub fn task_qfim(cfg: &ExperimentConfig, a: &AnsatzSpec, theta: &[f64]) -> Result<crate::info_geometry::RealMatrix> {
    match cfg.task {
        Task::Vqe => qfim(a, theta, &a.input_state()?),
        Task::Compile => unitary_qfim(a, theta),
        Task::Autoencoder => qfim(a, theta, &cfg.dataset()?[0]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Random,
    Optimum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Qfim,
    Hessian,
}

/// One rank evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub depth: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub point_kind: PointKind,
    pub matrix: MatrixKind,
    /// Seed index for optima, point index for random points.
    pub index: usize,
    pub report: SpectrumReport,
    /// Upper bound the rank must respect.
    pub bound: usize,
}

/// Random-point QFIM ranks at one depth.
#[derive(Clone, Debug, PartialEq)]
pub struct RankScan {
    pub depth: usize,
    pub m: usize,
    pub records: Vec<RankRecord>,
    pub mean: f64,
    pub stddev: f64,
    /// All points share the largest rank.
    pub saturated: bool,
}

fn rank_stats(ranks: &[usize]) -> (f64, f64, bool) {
    if ranks.is_empty() {
        return (0.0, 0.0, false);
    }
    let n = ranks.len() as f64;
    let mean = ranks.iter().sum::<usize>() as f64 / n;
    let var = ranks.iter().map(|&r| (r as f64 - mean).powi(2)).sum::<f64>() / n;
    let max = *ranks.iter().max().expect("non-empty");
    (mean, var.sqrt(), ranks.iter().all(|&r| r == max))
}

/// QFIM spectra at `points_per_depth` uniform random points.
pub fn rank_scan(cfg: &ExperimentConfig, depth: usize) -> Result<RankScan> {
    let a = cfg.ansatz(depth)?;
    let points = cfg.rank_scan.clone().unwrap_or_default().points_per_depth;
    let bound = dla_dimension(&a)?;
    let records = (0..points)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(derive_seed(cfg.master_seed, &[RANK_STREAM, depth as u64, k as u64]));
            let theta = random_angles(&mut rng, a.num_params());
            let report = spectrum_report_with(&task_qfim(cfg, &a, &theta)?, DEFAULT_RANK_TOL, RankMode::Signed)?;
            Ok(RankRecord {
                depth,
                m: a.num_params(),
                point_kind: PointKind::Random,
                matrix: MatrixKind::Qfim,
                index: k,
                report,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ranks: Vec<usize> = records.iter().map(|r| r.report.rank).collect();
    let (mean, stddev, saturated) = rank_stats(&ranks);
    Ok(RankScan {
        depth,
        m: a.num_params(),
        records,
        mean,
        stddev,
        saturated,
    })
}

/// QFIM and Hessian spectra at a trained point, after Newton refinement.
/// Returns nothing when the refined loss gap stays above [`OPTIMUM_GAP`].
pub fn optimum_ranks(
    cfg: &ExperimentConfig,
    a: &AnsatzSpec,
    spec: &LossSpec,
    target: f64,
    depth: usize,
    index: usize,
    theta: &[f64],
) -> Result<Option<Vec<RankRecord>>> {
    let (x, value) = newton_polish(spec, a, theta, 20)?;
    if (value - target).abs() >= OPTIMUM_GAP {
        return Ok(None);
    }
    let dla = dla_dimension(a)?;
    let hess_bound = match spec.linear_form(a)? {
        Some(f) => hessian_rank_bound(dla, a.dim(), linear_form_rank(&f)?),
        None => dla,
    };
    let q = spectrum_report_with(&task_qfim(cfg, a, &x)?, DEFAULT_RANK_TOL, RankMode::Signed)?;
    let h = spectrum_report_with(&hessian(spec, a, &x)?, DEFAULT_RANK_TOL, RankMode::Magnitude)?;
    let rec = |matrix, report, bound| RankRecord {
        depth,
        m: a.num_params(),
        point_kind: PointKind::Optimum,
        matrix,
        index,
        report,
        bound,
    };
    Ok(Some(vec![rec(MatrixKind::Qfim, q, dla), rec(MatrixKind::Hessian, h, hess_bound)]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthSummary {
    pub depth: usize,
    pub m: usize,
    pub successes: usize,
    pub runs: usize,
    pub success_probability: f64,
    pub rank_mean: Option<f64>,
    pub rank_stddev: Option<f64>,
    pub saturated: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// `(depth, seed index, record)`, sorted by depth then seed index.
    pub runs: Vec<(usize, usize, RunRecord)>,
    pub depths: Vec<DepthSummary>,
    pub ranks: Vec<RankRecord>,
    /// Runs that failed with an error, as `(depth, seed index, message)`.
    pub failures: Vec<(usize, usize, String)>,
    pub violations: Vec<String>,
}

/// Thread pool with `jobs` workers (all logical cores when `None`).
pub fn worker_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Runs every (depth, seed) training job on a pool of `jobs` threads, then the
/// requested rank analyses, and writes all CSV outputs.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    worker_pool(jobs)?.install(|| sweep_inner(cfg))
}

/// Stable hex digest of a parameter vector.
pub fn point_hash(theta: &[f64]) -> String {
    use std::hash::{DefaultHasher, Hash, Hasher};
    let mut h = DefaultHasher::new();
    for x in theta {
        x.to_bits().hash(&mut h);
    }
    format!("{:016x}", h.finish())
}

#[derive(Serialize)]
struct MatrixSidecar<'a> {
    #[serde(rename = "M")]
    m: usize,
    point_hash: String,
    loss_kind: &'a str,
}

/// `<stem>_matrix.csv` (row-major) with a `<stem>_matrix.json` sidecar.
pub fn write_matrix_dump(
    dir: &Path,
    stem: &str,
    m: &crate::info_geometry::RealMatrix,
    theta: &[f64],
    loss_kind: &str,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{stem}_matrix.csv")), crate::info_geometry::matrix_csv(m))?;
    let side = MatrixSidecar {
        m: m.nrows(),
        point_hash: point_hash(theta),
        loss_kind,
    };
    std::fs::write(
        dir.join(format!("{stem}_matrix.json")),
        serde_json::to_string_pretty(&side).expect("plain data"),
    )?;
    Ok(())
}

struct Job {
    depth: usize,
    index: usize,
}

fn sweep_inner(cfg: &ExperimentConfig) -> Result<SweepResult> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let jobs: Vec<Job> = cfg
        .depth_list
        .iter()
        .flat_map(|&depth| (0..cfg.seeds_per_point).map(move |index| Job { depth, index }))
        .collect();
    let outcomes: Vec<(usize, usize, Result<RunRecord>)> = jobs
        .par_iter()
        .map(|j| {
            let run = || -> Result<RunRecord> {
                let a = cfg.ansatz(j.depth)?;
                let spec = cfg.loss(j.index)?;
                let adam = cfg.adam.clone().with_target(cfg.target(&spec)?);
                train(&spec, &a, &adam, cfg.run_seed(j.depth, j.index))
            };
            (j.depth, j.index, run())
        })
        .collect();

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (depth, index, r) in outcomes {
        match r {
            Ok(rec) => runs.push((depth, index, rec)),
            Err(e) => {
                log::error!("run depth={depth} seed_index={index} failed: {e}");
                failures.push((depth, index, e.to_string()));
            }
        }
    }
    runs.sort_by_key(|(d, i, _)| (*d, *i));

    let mut ranks = Vec::new();
    let mut depths = Vec::new();
    for &depth in &cfg.depth_list {
        let a = cfg.ansatz(depth)?;
        let here: Vec<&(usize, usize, RunRecord)> = runs.iter().filter(|(d, _, _)| *d == depth).collect();
        let successes = here.iter().filter(|(_, _, r)| r.success).count();
        let mut summary = DepthSummary {
            depth,
            m: a.num_params(),
            successes,
            runs: cfg.seeds_per_point,
            success_probability: successes as f64 / cfg.seeds_per_point as f64,
            rank_mean: None,
            rank_stddev: None,
            saturated: None,
        };
        if let Some(rs) = &cfg.rank_scan {
            if rs.points_per_depth > 0 {
                let scan = rank_scan(cfg, depth)?;
                summary.rank_mean = Some(scan.mean);
                summary.rank_stddev = Some(scan.stddev);
                summary.saturated = Some(scan.saturated);
                ranks.extend(scan.records);
            }
            if rs.at_optima {
                let picked: Vec<&&(usize, usize, RunRecord)> =
                    here.iter().filter(|(_, _, r)| r.success).take(cfg.max_optima_per_depth).collect();
                let found = picked
                    .par_iter()
                    .map(|(d, i, r)| {
                        let spec = cfg.loss(*i)?;
                        let target = cfg.target(&spec)?;
                        optimum_ranks(cfg, &a, &spec, target, *d, *i, &r.final_params)
                    })
                    .collect::<Result<Vec<_>>>()?;
                ranks.extend(found.into_iter().flatten().flatten());
            }
        }
        depths.push(summary);
    }

    let violations: Vec<String> = ranks
        .iter()
        .filter(|r| r.report.rank > r.bound)
        .map(|r| {
            format!(
                "{:?} {:?} rank {} exceeds bound {} (depth {}, index {})",
                r.point_kind, r.matrix, r.report.rank, r.bound, r.depth, r.index
            )
        })
        .collect();

    let result = SweepResult {
        runs,
        depths,
        ranks,
        failures,
        violations,
    };
    write_outputs(cfg, &result)?;
    if !result.violations.is_empty() {
        for v in &result.violations {
            log::error!("{v}");
        }
        return Err(Error::BoundViolation(result.violations.join("; ")));
    }
    Ok(result)
}

fn kind_str<T: Serialize>(v: T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|x| x.as_str().map(String::from))
        .unwrap_or_default()
}

fn fmt_gap(g: f64) -> String {
    if g.is_finite() {
        format!("{g:.16e}")
    } else {
        "inf".into()
    }
}

/// `runs.csv`, `success.csv`, `ranks.csv`, optional traces and spectrum dumps.
pub fn write_outputs(cfg: &ExperimentConfig, res: &SweepResult) -> Result<()> {
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let mut runs = String::from("task,n,boundary,depth,M,seed,final_loss,gap,iterations,success\n");
    for (depth, _, r) in &res.runs {
        writeln!(
            runs,
            "{},{},{},{},{},{},{:.16e},{:.16e},{},{}",
            cfg.task_name(),
            cfg.n,
            cfg.boundary_name(),
            depth,
            r.m,
            r.seed,
            r.final_loss,
            r.gap(),
            r.iterations_used,
            r.success
        )
        .expect("string write");
    }
    std::fs::write(dir.join("runs.csv"), runs)?;

    let mut success = String::from("depth,M,success_probability,n_runs\n");
    for d in &res.depths {
        writeln!(success, "{},{},{:.16e},{}", d.depth, d.m, d.success_probability, d.runs).expect("string write");
    }
    std::fs::write(dir.join("success.csv"), success)?;

    let mut ranks = String::from("depth,M,point_kind,matrix,rank,gap,lambda_max\n");
    for r in &res.ranks {
        writeln!(
            ranks,
            "{},{},{},{},{},{},{:.16e}",
            r.depth,
            r.m,
            kind_str(r.point_kind),
            kind_str(r.matrix),
            r.report.rank,
            fmt_gap(r.report.gap),
            r.report.lambda_max
        )
        .expect("string write");
        let stem = format!(
            "spectrum_{}_{}_{}_{}",
            kind_str(r.point_kind),
            kind_str(r.matrix),
            r.depth,
            r.index
        );
        r.report.write_files(dir, &stem)?;
    }
    std::fs::write(dir.join("ranks.csv"), ranks)?;

    if cfg.write_traces {
        for (depth, index, r) in &res.runs {
            std::fs::write(dir.join(format!("trace_{depth}_{index}.csv")), r.trace_csv())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"task": "vqe", "n": 2, "depth_list": [1, 2], "seeds_per_point": 3,
                "adam": {{"max_iters": 300}}, "rank_scan": {{"points_per_depth": 4, "at_optima": true}},
                "output_dir": {:?}, "master_seed": 5}}"#,
            dir
        ))
        .unwrap()
    }

    #[test]
    fn config_rejects_bad_input() {
        let base = r#""n": 2, "output_dir": "x""#;
        assert!(ExperimentConfig::from_json(&format!(r#"{{"task": "vqe", {base}, "depth_list": []}}"#)).is_err());
        assert!(ExperimentConfig::from_json(&format!(r#"{{"task": "vqe", {base}, "depth_list": [2, 1]}}"#)).is_err());
        assert!(ExperimentConfig::from_json(&format!(r#"{{"task": "vqe", {base}, "depth_list": [1], "bogus": 1}}"#)).is_err());
        assert!(ExperimentConfig::from_json(&format!(r#"{{"task": "compile", {base}, "depth_list": [1], "boundary": "open"}}"#)).is_err());
        let ok = ExperimentConfig::from_json(&format!(r#"{{"task": "vqe", {base}, "depth_list": [1]}}"#)).unwrap();
        assert_eq!(ok.seeds_per_point, 50);
    }

    #[test]
    fn sweep_writes_reproducible_outputs() {
        let t1 = tempfile::tempdir().unwrap();
        let t2 = tempfile::tempdir().unwrap();
        let r1 = run_sweep(&cfg(t1.path()), Some(2)).unwrap();
        run_sweep(&cfg(t2.path()), Some(1)).unwrap();
        for f in ["runs.csv", "success.csv", "ranks.csv"] {
            let a = std::fs::read_to_string(t1.path().join(f)).unwrap();
            let b = std::fs::read_to_string(t2.path().join(f)).unwrap();
            assert_eq!(a, b, "{f}");
        }
        assert_eq!(r1.runs.len(), 6);
        assert!(r1.depths.iter().all(|d| (0.0..=1.0).contains(&d.success_probability)));
        let runs = std::fs::read_to_string(t1.path().join("runs.csv")).unwrap();
        assert!(runs.starts_with("task,n,boundary,depth,M,seed,final_loss,gap,iterations,success\nvqe,2,open,1,2,"));
    }
}
