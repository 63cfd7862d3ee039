mod args;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::Parser;
use hyperseg_core::cloud::{load_cloud, load_labels, save_labels, CloudFormat, PointCloud};
use hyperseg_core::metrics::{eigencurve, matched_accuracy, silhouette, time_method, EvalReport};
use hyperseg_core::pipeline::{method_spectrum, prepare_cloud, run_method, MethodRun};
use hyperseg_core::{Error, Method, SegmentationConfig};

use args::{BenchmarkArgs, Cli, Command, SegmentArgs, SpectrumArgs};
use report::{
    aggregate, version, write_curve, write_json, BenchmarkReport, BenchmarkRow, ConfigEcho, CurveSummary,
    SegmentReport, Skipped, SpectrumReport,
};

const THREADS_ENV: &str = "HYPERSEG_THREADS";

/// A failure attributed either to the invocation or to the computation.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e.into())
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| match cli.command {
        Command::Segment(a) => segment(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Benchmark(a) => benchmark(a),
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Run(e.into()))
}

fn validated(config: SegmentationConfig) -> Result<SegmentationConfig, Failure> {
    config.validate().map_err(usage)?;
    if config.sample_n == Some(0) {
        return Err(usage("--samples must be positive"));
    }
    Ok(config)
}

fn sibling_labels(input: &Path) -> PathBuf {
    input.with_extension("labels")
}

/// Loads a cloud and attaches labels from `labels` or, if absent, from a
/// `<stem>.labels` file next to it.
fn load_labelled(input: &Path, labels: Option<&Path>) -> anyhow::Result<PointCloud> {
    let cloud = load_cloud(input, CloudFormat::from_path(input))?;
    let path = match labels {
        Some(p) => Some(p.to_path_buf()),
        None => Some(sibling_labels(input)).filter(|p| p.is_file()),
    };
    match path {
        Some(p) => {
            let labels = load_labels(&p)?;
            cloud.with_labels(labels).with_context(|| format!("labels in {}", p.display()))
        }
        None => Ok(cloud),
    }
}

fn evaluate(cloud: &PointCloud, run: &MethodRun, runtime_seconds: f64) -> anyhow::Result<EvalReport> {
    let assignments = &run.clustered.result.assignments;
    let silhouette = match silhouette(cloud.coords(), assignments) {
        Ok(s) => Some(s),
        Err(Error::UndefinedMetric(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let accuracy = cloud.labels().map(|l| matched_accuracy(assignments, l)).transpose()?;
    let eigencurve = run.spectrum_values.as_deref().map(eigencurve).unwrap_or_default();
    Ok(EvalReport {
        silhouette,
        accuracy,
        runtime_seconds,
        eigencurve,
    })
}

fn segment(args: SegmentArgs) -> Result<(), Failure> {
    let config = validated(args.common.config(args.k, args.samples))?;
    let cloud = load_labelled(&args.input, args.labels.as_deref())?;
    let method = Method::from(args.method);
    let prepared = prepare_cloud(&cloud, &config)?;
    let (timing, run) = time_method(args.repeats as usize, || run_method(&prepared, method, &config))?;
    let metrics = evaluate(&prepared, &run, timing.median_seconds)?;
    let result = &run.clustered.result;

    let assignments_path = assignments_path(&args.out);
    save_labels(&assignments_path, &result.assignments)?;
    let report = SegmentReport {
        version: version(),
        input: args.input.display().to_string(),
        n_points: prepared.len(),
        method,
        k: result.k,
        selected_e: result.selected_e,
        inertia: result.inertia,
        assignments: result.assignments.clone(),
        metrics,
        timing_samples: timing.samples,
        graph_params: run.graph_params,
        config: ConfigEcho::new(&config, args.repeats),
    };
    write_json(&args.out, &report)?;
    Ok(())
}

fn assignments_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "segment".into());
    out.with_file_name(format!("{stem}.assignments.txt"))
}

fn spectrum(args: SpectrumArgs) -> Result<(), Failure> {
    let methods: Vec<Method> = if args.method.is_empty() {
        vec![Method::Hgsp, Method::Gsp, Method::Laplacian]
    } else {
        args.method.iter().copied().map(Method::from).collect()
    };
    if methods.contains(&Method::Kmeans) {
        return Err(usage("kmeans has no spectrum"));
    }
    if args.samples.contains(&0) {
        return Err(usage("--samples must be positive"));
    }
    let base = validated(args.common.config(1, None))?;
    let cloud = load_cloud(&args.input, CloudFormat::from_path(&args.input))?;
    let sizes: Vec<Option<usize>> = if args.samples.is_empty() {
        vec![None]
    } else {
        args.samples.iter().copied().map(Some).collect()
    };
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let mut curves = Vec::new();
    for size in sizes {
        let config = SegmentationConfig {
            sample_n: size,
            ..base.clone()
        };
        let prepared = prepare_cloud(&cloud, &config)?;
        for &method in &methods {
            let spectrum = method_spectrum(&prepared, method, &config)?;
            let curve = eigencurve(&spectrum.values);
            let name = format!("{}_{}.csv", method, prepared.len());
            write_curve(&args.out.join(&name), &curve)?;
            curves.push(CurveSummary {
                method,
                n_points: prepared.len(),
                csv: name,
                nonzero: curve.iter().filter(|p| p.value != 0.0).count(),
                graph_params: spectrum.graph_params,
                spectrum: spectrum.hgsp.as_ref().map(serde_json::to_value).transpose().map_err(anyhow::Error::from)?,
            });
        }
    }
    let report = SpectrumReport {
        version: version(),
        input: args.input.display().to_string(),
        curves,
        config: ConfigEcho::new(&base, 1),
    };
    write_json(&args.out.join("spectrum.json"), &report)?;
    Ok(())
}

fn cloud_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if path.is_file() && matches!(ext.as_deref(), Some("xyz" | "ply")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn distinct_labels(cloud: &PointCloud) -> Option<usize> {
    let labels = cloud.labels()?;
    let mut seen: Vec<u32> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    Some(seen.len())
}

fn benchmark_cloud(
    path: &Path,
    args: &BenchmarkArgs,
    methods: &[Method],
    rows: &mut Vec<BenchmarkRow>,
    skipped: &mut Vec<Skipped>,
) -> anyhow::Result<()> {
    let cloud = load_labelled(path, None)?;
    let k = match args.k.or_else(|| distinct_labels(&cloud)) {
        Some(k) => k,
        None => bail!("no --k given and no labels to infer it from"),
    };
    let config = args.common.config(k, args.samples);
    config.validate()?;
    let prepared = prepare_cloud(&cloud, &config)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for &method in methods {
        let outcome = time_method(args.repeats as usize, || run_method(&prepared, method, &config))
            .map_err(anyhow::Error::from)
            .and_then(|(timing, run)| {
                let eval = evaluate(&prepared, &run, timing.median_seconds)?;
                Ok(BenchmarkRow {
                    cloud: name.clone(),
                    n_points: prepared.len(),
                    method,
                    k,
                    selected_e: run.clustered.result.selected_e,
                    runtime_seconds: eval.runtime_seconds,
                    silhouette: eval.silhouette,
                    accuracy: eval.accuracy,
                    graph_params: run.graph_params,
                })
            });
        match outcome {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("warning: {name} ({method}): {e:#}");
                skipped.push(Skipped {
                    file: format!("{name} ({method})"),
                    reason: format!("{e:#}"),
                });
            }
        }
    }
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    let methods: Vec<Method> = if args.method.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.method.iter().copied().map(Method::from).collect()
    };
    let echo_config = validated(args.common.config(args.k.unwrap_or(1), args.samples))?;
    if !args.input.is_dir() {
        return Err(usage(format!("{} is not a directory", args.input.display())));
    }
    let files = cloud_files(&args.input)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for path in &files {
        if let Err(e) = benchmark_cloud(path, &args, &methods, &mut rows, &mut skipped) {
            eprintln!("warning: skipping {}: {e:#}", path.display());
            skipped.push(Skipped {
                file: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                reason: format!("{e:#}"),
            });
        }
    }
    let report = BenchmarkReport {
        version: version(),
        input: args.input.display().to_string(),
        aggregate: aggregate(&rows),
        rows,
        skipped,
        config: ConfigEcho::new(&echo_config, args.repeats),
    };
    write_json(&args.out, &report)?;
    if report.rows.is_empty() {
        return Err(Failure::Run(anyhow!("no cloud in {} could be benchmarked", args.input.display())));
    }
    Ok(())
}
