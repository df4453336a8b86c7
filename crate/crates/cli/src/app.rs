use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use linmtl_core::{
    check_c1, check_c2, compute_optimal_predictors, irreducible_losses, run_mgda,
    run_randomized_sweep, run_sweep, sample_feasible_region, ConditionReport, DVector,
    MgdaConfig, MgdaVariant, OptimalPredictors, SurfaceKind, SurfaceSet,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, LossScale};
use crate::data::prepare_dataset;
use crate::error::{CliError, CliResult};
use crate::export::{ensure_dir, file_name, fmt_f64, indexed_names, write_csv, Manifest};
use crate::svg::{scatter, Projection, Series, PALETTE};

#[derive(Debug, Parser)]
#[command(name = "linmtl", version = crate::export::VERSION, about = "Scalarization experiments for linear multi-task regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report conditions C1 and C2 (exit 0 if both hold, 1 otherwise).
    Check(CheckArgs),
    /// Sample and classify the feasible region of width q = 1 or k - 1.
    Surfaces(SurfacesArgs),
    /// Plain or randomized linear scalarization sweep.
    Sweep(SweepArgs),
    /// MGDA or MGDA-UB over a list of seeds.
    Smto(SmtoArgs),
    /// Combine sweep and SMTO outputs into one plot-ready CSV and SVG.
    Figure(FigureArgs),
}

/// Dataset selection shared by the data-driven subcommands. Flags override
/// values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV dataset with one header line.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// 0-based task (target) columns, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub tasks: Option<Vec<usize>>,
    /// 0-based feature columns; defaults to every non-task column.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<usize>>,
    #[arg(long)]
    pub standardize: Option<bool>,
    #[arg(long)]
    pub add_bias: Option<bool>,
    #[arg(long, value_enum)]
    pub loss_scale: Option<LossScale>,
}

impl DataArgs {
    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(d) = &self.data {
            config.dataset = d.clone();
        }
        if let Some(t) = &self.tasks {
            config.tasks = t.clone();
        }
        if let Some(f) = &self.features {
            config.features = f.clone();
        }
        if let Some(s) = self.standardize {
            config.standardize = s;
        }
        if let Some(b) = self.add_bias {
            config.add_bias = b;
        }
        if let Some(l) = self.loss_scale {
            config.loss_scale = l;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct SurfacesArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Membership tolerance for surface classification.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum, default_value = "simplex")]
    pub projection: Projection,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Plain,
    Randomized,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "plain")]
    pub mode: SweepMode,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Full,
    Ub,
}

impl VariantArg {
    pub fn core(self) -> MgdaVariant {
        match self {
            Self::Full => MgdaVariant::Full,
            Self::Ub => MgdaVariant::Ub,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Ub => "ub",
        }
    }
}

#[derive(Debug, Args)]
pub struct SmtoArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "full")]
    pub variant: VariantArg,
    /// Seeds as an inclusive range `a..b` or a comma-separated list.
    #[arg(long, default_value = "0", value_parser = parse_seeds)]
    pub seeds: SeedList,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedList(pub Vec<u64>);

pub fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.trim_start_matches('=');
        let lo: u64 = a.trim().parse().map_err(|_| format!("bad seed '{a}'"))?;
        let hi: u64 = b.trim().parse().map_err(|_| format!("bad seed '{b}'"))?;
        if hi < lo {
            return Err(format!("empty seed range {s}"));
        }
        return Ok(SeedList((lo..=hi).collect()));
    }
    let seeds = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad seed '{t}'")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SeedList(seeds))
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// Sweep CSV written by `linmtl sweep`.
    #[arg(long)]
    pub sweep: PathBuf,
    /// Summary CSVs written by `linmtl smto`.
    #[arg(long, num_args = 1..)]
    pub smto: Vec<PathBuf>,
    /// Drop points whose largest MSE exceeds this value (1 if given without
    /// a value).
    #[arg(long, num_args = 0..=1, default_missing_value = "1")]
    pub filter_max_mse: Option<f64>,
    #[arg(long, value_enum, default_value = "simplex")]
    pub projection: Projection,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Check(a) => cmd_check(&a),
        Command::Surfaces(a) => cmd_surfaces(&a).map(|_| 0),
        Command::Sweep(a) => cmd_sweep(&a).map(|_| 0),
        Command::Smto(a) => cmd_smto(&a).map(|_| 0),
        Command::Figure(a) => cmd_figure(&a).map(|_| 0),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Problem {
    preds: OptimalPredictors,
    offsets: DVector<f64>,
}

fn load_problem(config: &ExperimentConfig) -> CliResult<Problem> {
    let data = prepare_dataset(config)?;
    let preds = compute_optimal_predictors(&data)?;
    let offsets = irreducible_losses(&data, &preds);
    Ok(Problem { preds, offsets })
}

fn describe_report(name: &str, report: &ConditionReport) -> String {
    if report.holds {
        match &report.certificate {
            Some(c) => format!("{name}: holds (sign flips {c})"),
            None => format!("{name}: holds"),
        }
    } else {
        match &report.witness {
            Some(w) => {
                let cycle: Vec<String> = w.cycle.iter().map(|i| (i + 1).to_string()).collect();
                format!(
                    "{name}: fails (conflict at pair ({}, {}); negative cycle {})",
                    w.edge.0 + 1,
                    w.edge.1 + 1,
                    cycle.join(" -> ")
                )
            }
            None => format!("{name}: fails"),
        }
    }
}

pub fn cmd_check(args: &CheckArgs) -> CliResult<i32> {
    let config = args.data.resolve()?;
    let problem = load_problem(&config)?;
    let c1 = check_c1(&problem.preds);
    let c2 = check_c2(&problem.preds)?;
    println!("tasks: {}", problem.preds.k());
    println!("{}", describe_report("C1", &c1));
    println!("{}", describe_report("C2", &c2));
    Ok(if c1.holds && c2.holds { 0 } else { 1 })
}

#[derive(Serialize)]
struct SurfacesParams {
    q: usize,
    kind: String,
    count: usize,
    tolerance: f64,
    projection: Projection,
}

pub fn cmd_surfaces(args: &SurfacesArgs) -> CliResult<Vec<PathBuf>> {
    let mut config = args.data.resolve()?;
    if let Some(q) = args.q {
        config.q = q;
    }
    if let Some(c) = args.count {
        config.count = c;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(t) = args.tolerance {
        config.tolerance = t;
    }
    config.validate()?;
    let problem = load_problem(&config)?;
    let k = problem.preds.k();
    let kind = SurfaceKind::for_width(config.q, k)?;
    let set = SurfaceSet::new(&problem.preds, kind)?;
    let samples = sample_feasible_region(&problem.preds, kind, config.count, config.seed)?;
    let t = problem.preds.sq_norms();

    let mut header = indexed_names("v", k);
    header.extend(indexed_names("mse", k));
    header.push("surfaces".into());
    let mut rows = Vec::with_capacity(samples.len());
    let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for point in &samples {
        let mse = t - &point.v + &problem.offsets;
        let ids = set.classify(&point.v, config.tolerance)?;
        let names: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let mut row: Vec<String> = point.v.iter().chain(mse.iter()).map(|x| fmt_f64(*x)).collect();
        row.push(names.join(";"));
        rows.push(row);
        let label = names.first().cloned().unwrap_or_else(|| "unclassified".into());
        let xy = args.projection.apply(&mse);
        match groups.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push(xy),
            None => groups.push((label, vec![xy])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));

    ensure_dir(&args.out)?;
    let csv_path = args.out.join("surfaces.csv");
    write_csv(&csv_path, &header, &rows)?;
    let series: Vec<Series> = groups
        .into_iter()
        .enumerate()
        .map(|(i, (label, points))| Series {
            label,
            color: PALETTE[i % PALETTE.len()],
            radius: 1.2,
            points,
        })
        .collect();
    let svg_path = args.out.join("surfaces.svg");
    let title = format!("Feasible MSEs, q = {}", config.q);
    std::fs::write(&svg_path, scatter(&title, args.projection.axis_labels(), &series))
        .map_err(|e| CliError::io(&svg_path, e))?;

    let params = SurfacesParams {
        q: config.q,
        kind: format!("{kind:?}"),
        count: config.count,
        tolerance: config.tolerance,
        projection: args.projection,
    };
    let mut manifest = Manifest::new("surfaces", Some(config.seed), Some(&config), params);
    manifest.outputs = vec![file_name(&csv_path), file_name(&svg_path)];
    manifest.write(&args.out)?;
    Ok(vec![csv_path, svg_path])
}

#[derive(Serialize)]
struct SweepParams {
    mode: SweepMode,
    q: usize,
    count: usize,
    skipped: usize,
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<PathBuf> {
    let mut config = args.data.resolve()?;
    if let Some(q) = args.q {
        config.q = q;
    }
    if let Some(c) = args.count {
        config.count = c;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;
    let problem = load_problem(&config)?;
    let k = problem.preds.k();
    let result = match args.mode {
        SweepMode::Plain => run_sweep(&problem.preds, &problem.offsets, config.q, config.count, config.seed)?,
        SweepMode::Randomized => {
            run_randomized_sweep(&problem.preds, &problem.offsets, config.q, config.count, config.seed)?
        }
    };

    let mut header = indexed_names("lambda", k);
    header.extend(indexed_names("mse", k));
    header.extend(indexed_names("objective", k));
    if args.mode == SweepMode::Randomized {
        header.extend(indexed_names("partner_lambda", k));
        header.push("t".into());
    }
    let rows: Vec<Vec<String>> = (0..result.len())
        .map(|i| {
            let mut row: Vec<String> = result.weights[i]
                .as_slice()
                .iter()
                .chain(result.losses[i].iter())
                .chain(result.objectives[i].iter())
                .map(|x| fmt_f64(*x))
                .collect();
            if let Some(mix) = result.mixtures.as_ref().map(|m| &m[i]) {
                row.extend(mix.partner.as_slice().iter().map(|x| fmt_f64(*x)));
                row.push(fmt_f64(mix.t));
            }
            row
        })
        .collect();

    ensure_dir(&args.out)?;
    let name = match args.mode {
        SweepMode::Plain => "sweep",
        SweepMode::Randomized => "sweep_randomized",
    };
    let csv_path = args.out.join(format!("{name}.csv"));
    write_csv(&csv_path, &header, &rows)?;
    let params = SweepParams {
        mode: args.mode,
        q: config.q,
        count: config.count,
        skipped: result.skipped,
    };
    let mut manifest = Manifest::new(name, Some(config.seed), Some(&config), params);
    manifest.outputs = vec![file_name(&csv_path)];
    manifest.write(&args.out)?;
    Ok(csv_path)
}

#[derive(Serialize)]
struct SmtoParams<'a> {
    variant: VariantArg,
    seeds: &'a [u64],
    q: usize,
    lr: f64,
    epochs: usize,
    stop_tol: f64,
}

pub fn cmd_smto(args: &SmtoArgs) -> CliResult<PathBuf> {
    let mut config = args.data.resolve()?;
    if let Some(q) = args.q {
        config.q = q;
    }
    if let Some(lr) = args.lr {
        config.lr = lr;
    }
    if let Some(e) = args.epochs {
        config.epochs = e;
    }
    if let Some(s) = args.stop_tol {
        config.stop_tol = s;
    }
    if let Some(&first) = args.seeds.0.first() {
        config.seed = first;
    }
    config.validate()?;
    let data = prepare_dataset(&config)?;
    let k = data.k();
    let variant = args.variant.name();
    ensure_dir(&args.out)?;

    let mut trace_header = vec!["epoch".to_string(), "min_norm".to_string()];
    trace_header.extend(indexed_names("mse", k));
    let mut summary_header: Vec<String> = ["variant", "seed", "converged", "epochs", "final_min_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    summary_header.extend(indexed_names("mse", k));

    let mut outputs = Vec::new();
    let mut summary = Vec::with_capacity(args.seeds.0.len());
    for &seed in &args.seeds.0 {
        let mut mgda = MgdaConfig::new(config.q, args.variant.core(), seed);
        mgda.lr = config.lr;
        mgda.epochs = config.epochs;
        mgda.stop_tol = config.stop_tol;
        let trace = run_mgda(&data, &mgda)?;
        let rows: Vec<Vec<String>> = trace
            .min_norms
            .iter()
            .zip(&trace.iterate_losses)
            .enumerate()
            .map(|(e, (mn, losses))| {
                let mut row = vec![e.to_string(), fmt_f64(*mn)];
                row.extend(losses.iter().map(|x| fmt_f64(*x)));
                row
            })
            .collect();
        let path = args.out.join(format!("smto_{variant}_seed{seed}.csv"));
        write_csv(&path, &trace_header, &rows)?;
        outputs.push(file_name(&path));

        let final_losses = trace
            .final_losses()
            .cloned()
            .unwrap_or_else(|| trace.final_net.task_losses(&data));
        let mut row = vec![
            variant.to_string(),
            seed.to_string(),
            trace.converged.to_string(),
            trace.epochs_run.to_string(),
            fmt_f64(trace.min_norms.last().copied().unwrap_or(f64::NAN)),
        ];
        row.extend(final_losses.iter().map(|x| fmt_f64(*x)));
        summary.push(row);
    }
    let summary_path = args.out.join(format!("smto_{variant}_summary.csv"));
    write_csv(&summary_path, &summary_header, &summary)?;
    outputs.push(file_name(&summary_path));

    let params = SmtoParams {
        variant: args.variant,
        seeds: &args.seeds.0,
        q: config.q,
        lr: config.lr,
        epochs: config.epochs,
        stop_tol: config.stop_tol,
    };
    let command = format!("smto_{variant}");
    let mut manifest = Manifest::new(&command, Some(config.seed), Some(&config), params);
    manifest.outputs = outputs;
    manifest.write(&args.out)?;
    Ok(summary_path)
}

/// Reads the `mse_*` columns of an output CSV plus an optional `variant`
/// label column.
fn mse_vectors(path: &Path) -> CliResult<(Vec<DVector<f64>>, Vec<String>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mse_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("mse_"))
        .map(|(i, _)| i)
        .collect();
    if mse_cols.is_empty() {
        return Err(CliError::Config(format!("{}: no mse_* columns", path.display())));
    }
    let label_col = header.iter().position(|h| h == "variant");
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut v = DVector::zeros(mse_cols.len());
        for (slot, &c) in mse_cols.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            v[slot] = cell.trim().parse().map_err(|_| CliError::Parse {
                path: path.to_path_buf(),
                row: r + 2,
                column: c + 1,
                message: format!("'{cell}' is not a number"),
            })?;
        }
        points.push(v);
        labels.push(label_col.and_then(|c| record.get(c)).unwrap_or("").to_string());
    }
    Ok((points, labels))
}

#[derive(Serialize)]
struct FigureParams<'a> {
    sweep: String,
    smto: Vec<String>,
    filter_max_mse: Option<f64>,
    projection: Projection,
    kept: &'a [usize],
}

pub fn cmd_figure(args: &FigureArgs) -> CliResult<PathBuf> {
    let keep = |v: &DVector<f64>| args.filter_max_mse.is_none_or(|m| v.max() <= m);
    let (sweep, _) = mse_vectors(&args.sweep)?;
    let k = sweep.first().map_or(0, |v| v.len());
    let mut sources: Vec<(String, Vec<DVector<f64>>)> =
        vec![("scalarization".into(), sweep.into_iter().filter(|v| keep(v)).collect())];
    for path in &args.smto {
        let (points, labels) = mse_vectors(path)?;
        for (p, l) in points.into_iter().zip(labels) {
            if p.len() != k {
                return Err(CliError::Config(format!(
                    "{}: expected {k} tasks, found {}",
                    path.display(),
                    p.len()
                )));
            }
            if !keep(&p) {
                continue;
            }
            let name = match l.as_str() {
                "full" => "MGDA".to_string(),
                "ub" => "MGDA-UB".to_string(),
                "" => file_name(path),
                other => other.to_string(),
            };
            match sources.iter_mut().find(|(n, _)| *n == name) {
                Some((_, pts)) => pts.push(p),
                None => sources.push((name, vec![p])),
            }
        }
    }

    let mut header = vec!["source".to_string()];
    header.extend(indexed_names("mse", k));
    let rows: Vec<Vec<String>> = sources
        .iter()
        .flat_map(|(name, pts)| {
            pts.iter().map(move |p| {
                let mut row = vec![name.clone()];
                row.extend(p.iter().map(|x| fmt_f64(*x)));
                row
            })
        })
        .collect();
    ensure_dir(&args.out)?;
    let csv_path = args.out.join("figure.csv");
    write_csv(&csv_path, &header, &rows)?;

    let colors = ["#1f77b4", "#e377c2", "#d62728", "#2ca02c", "#ff7f0e"];
    let series: Vec<Series> = sources
        .iter()
        .enumerate()
        .map(|(i, (name, pts))| Series {
            label: name.clone(),
            color: colors[i % colors.len()],
            radius: if i == 0 { 1.2 } else { 4.0 },
            points: pts.iter().map(|p| args.projection.apply(p)).collect(),
        })
        .collect();
    let svg_path = args.out.join("figure.svg");
    std::fs::write(&svg_path, scatter("Task MSEs", args.projection.axis_labels(), &series))
        .map_err(|e| CliError::io(&svg_path, e))?;

    let kept: Vec<usize> = sources.iter().map(|(_, p)| p.len()).collect();
    let params = FigureParams {
        sweep: file_name(&args.sweep),
        smto: args.smto.iter().map(|p| file_name(p)).collect(),
        filter_max_mse: args.filter_max_mse,
        projection: args.projection,
        kept: &kept,
    };
    let mut manifest = Manifest::new("figure", None, None, params);
    manifest.outputs = vec![file_name(&csv_path), file_name(&svg_path)];
    manifest.write(&args.out)?;
    Ok(csv_path)
}
