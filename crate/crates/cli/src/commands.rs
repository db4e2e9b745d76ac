use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dakr::eval::{
    evaluate, generate_scenario, k_sweep, EvalReport, GainCurve, GroundTruth, KSigmaRule, ScenarioKind, ScenarioParams,
    Trial,
};
use dakr::{
    default_k_sigma, AugmentationPolicy, DistanceMetric, Error, FeatureSet, Method, PolicyMode, RankedList,
    RerankConfig, Reranker, SearchSpace, SigmaTable,
};
use log::{info, warn};

use crate::args::{
    BenchArgs, EvalArgs, FeatureFormat, FileArgs, GenArgs, MetricArgs, MetricKind, RerankArgs, ScenarioArgs, SigmaArgs,
    SweepArgs,
};
use crate::bench::{self, BenchConfig};
use crate::error::{CliError, Result};
use crate::io;

fn require_file(path: &Path, flag: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{flag}: no such file {}", path.display())))
    }
}

fn read_features(path: &Path, flag: &str) -> Result<FeatureSet> {
    require_file(path, flag)?;
    io::read_features(path)
}

pub fn load_metric(args: &MetricArgs) -> Result<DistanceMetric> {
    let matrix = |what: &str| -> Result<&PathBuf> {
        let path = args
            .metric_matrix
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("--metric {what} needs --metric-matrix")))?;
        require_file(path, "--metric-matrix")?;
        Ok(path)
    };
    match args.metric {
        MetricKind::Euclidean | MetricKind::SquaredEuclidean if args.metric_matrix.is_some() => Err(CliError::Usage(
            "--metric-matrix only applies to mahalanobis and precomputed".into(),
        )),
        MetricKind::Euclidean => Ok(DistanceMetric::Euclidean),
        MetricKind::SquaredEuclidean => Ok(DistanceMetric::SquaredEuclidean),
        MetricKind::Mahalanobis => io::read_mahalanobis(matrix("mahalanobis")?),
        MetricKind::Precomputed => io::read_precomputed(matrix("precomputed")?),
    }
}

/// Parses `bi_dakr`, `bi_dakr+`, ...; the suffix forces augmentation.
pub fn parse_method(spec: &str, with_probes: bool) -> Result<(Method, PolicyMode)> {
    let spec = spec.trim();
    let (name, plus) = match spec.strip_suffix('+') {
        Some(name) => (name, true),
        None => (spec, false),
    };
    let method = name.parse::<Method>().map_err(|e| CliError::Usage(e.to_string()))?;
    let policy = if plus || with_probes {
        PolicyMode::WithProbes
    } else {
        PolicyMode::GalleryOnly
    };
    Ok((method, policy))
}

fn positive(value: usize, flag: &str) -> Result<usize> {
    if value == 0 {
        Err(CliError::Usage(format!("{flag} must be at least 1")))
    } else {
        Ok(value)
    }
}

pub fn cmd_sigma(args: &SigmaArgs) -> Result<()> {
    let gallery = read_features(&args.gallery, "--gallery")?;
    let metric = load_metric(&args.metric)?;
    let probes = match (&args.probes, args.with_probes) {
        (Some(p), _) => Some(read_features(p, "--probes")?),
        (None, true) => return Err(CliError::Usage("--with-probes needs --probes".into())),
        (None, false) => None,
    };
    let policy = match (&probes, args.with_probes) {
        (Some(p), true) => AugmentationPolicy::WithProbes(p),
        _ => AugmentationPolicy::GalleryOnly,
    };
    let space = if args.shared_ids {
        SearchSpace::with_shared_ids(&gallery, &metric, policy)?
    } else {
        SearchSpace::new(&gallery, &metric, policy)?
    };
    let k_sigma = positive(
        args.k_sigma.unwrap_or_else(|| default_k_sigma(gallery.len())),
        "--k-sigma",
    )?;
    let start = Instant::now();
    let table = SigmaTable::build(&space, k_sigma)?;
    let elapsed = start.elapsed();
    io::write_file(&args.out, &table.to_bytes())?;
    println!(
        "sigma table: {} entries, k_sigma={}, offline {:.3} ms -> {}",
        table.sigmas().len(),
        table.k_sigma(),
        elapsed.as_secs_f64() * 1e3,
        args.out.display()
    );
    Ok(())
}

/// Every list must rank distinct gallery ids.
fn check_rankings(lists: &[RankedList], gallery: &FeatureSet) -> Result<()> {
    let ids: BTreeSet<u64> = gallery.ids().iter().copied().collect();
    for list in lists {
        let mut seen = BTreeSet::new();
        for e in &list.entries {
            if !ids.contains(&e.gallery_id) || !seen.insert(e.gallery_id) {
                return Err(CliError::Internal(format!(
                    "ranking for probe {} repeats or invents gallery id {}",
                    list.probe_id, e.gallery_id
                )));
            }
        }
    }
    Ok(())
}

pub fn cmd_rerank(args: &RerankArgs) -> Result<()> {
    let gallery = read_features(&args.gallery, "--gallery")?;
    let probes = read_features(&args.probes, "--probes")?;
    let metric = load_metric(&args.metric)?;
    let (method, policy) = parse_method(&args.method, args.neighbors.with_probes)?;
    let k = positive(args.neighbors.k, "--k")?;

    let existing = match &args.sigma_table {
        Some(path) if method.uses_kernel() && path.exists() => Some(SigmaTable::read(path)?),
        _ => None,
    };
    let k_sigma = args
        .neighbors
        .k_sigma
        .or(existing.as_ref().map(SigmaTable::k_sigma))
        .unwrap_or_else(|| default_k_sigma(gallery.len()));
    let mut config = RerankConfig::new(method, policy, k, positive(k_sigma, "--k-sigma")?);
    config.shared_ids = args.neighbors.shared_ids;

    let reranker = match existing {
        Some(table) => match Reranker::with_table(config, &probes, &gallery, &metric, table) {
            Err(Error::StaleSigmaTable) if args.recompute => {
                warn!("sigma table does not match the inputs; recomputing");
                let r = Reranker::prepare(config, &probes, &gallery, &metric)?;
                write_table(&r, args.sigma_table.as_deref())?;
                r
            }
            other => other?,
        },
        None => {
            let r = Reranker::prepare(config, &probes, &gallery, &metric)?;
            if method.uses_kernel() {
                write_table(&r, args.sigma_table.as_deref())?;
            }
            r
        }
    };
    info!("offline phase {:.3} ms", reranker.offline_time().as_secs_f64() * 1e3);
    let lists = reranker.rank_all()?;
    check_rankings(&lists, &gallery)?;
    let label = method.label(reranker.config().policy);
    io::write_file(&args.out, io::rankings_to_csv(&lists, &label).as_bytes())
}

fn write_table(reranker: &Reranker<'_>, path: Option<&Path>) -> Result<()> {
    if let (Some(path), Some(table)) = (path, reranker.table()) {
        io::write_file(path, &table.to_bytes())?;
    }
    Ok(())
}

/// Gallery, probes and truth for one evaluation trial.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub gallery: FeatureSet,
    pub probes: FeatureSet,
    pub truth: GroundTruth,
}

impl Dataset {
    pub fn trial(&self) -> Trial<'_> {
        Trial {
            gallery: &self.gallery,
            probes: &self.probes,
            truth: &self.truth,
        }
    }
}

pub fn scenario_params(args: &ScenarioArgs, kind: &str) -> Result<ScenarioParams> {
    let kind: ScenarioKind = kind.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    Ok(ScenarioParams {
        kind,
        n_identities: args.identities,
        shots_per_id: args.shots,
        n_distractors: args.distractors,
        dim: args.dim,
        cluster_spread: args.spread,
        seed: args.seed,
    })
}

/// Resolves the data source: either feature files with a truth file, or a
/// synthetic scenario over `--trials` consecutive seeds, never both.
pub fn load_datasets(files: &FileArgs, scenario: &ScenarioArgs) -> Result<Vec<Dataset>> {
    let has_files = files.gallery.is_some() || files.probes.is_some() || files.truth.is_some();
    match (has_files, &scenario.scenario) {
        (true, Some(_)) => Err(CliError::Usage(
            "give either input files or --scenario, not both".into(),
        )),
        (false, None) => Err(CliError::Usage("give --gallery/--probes/--truth or --scenario".into())),
        (true, None) => {
            let (Some(g), Some(p), Some(t)) = (&files.gallery, &files.probes, &files.truth) else {
                return Err(CliError::Usage(
                    "--gallery, --probes and --truth are all required".into(),
                ));
            };
            let gallery = read_features(g, "--gallery")?;
            let probes = read_features(p, "--probes")?;
            require_file(t, "--truth")?;
            let truth = io::read_truth(t)?;
            truth
                .check_against(gallery.ids())
                .map_err(|e| CliError::format(t, e.to_string()))?;
            Ok(vec![Dataset { gallery, probes, truth }])
        }
        (false, Some(kind)) => {
            let params = scenario_params(scenario, kind)?;
            let trials = positive(scenario.trials, "--trials")?;
            (0..trials as u64)
                .map(|t| {
                    let s = generate_scenario(params.with_seed(params.seed + t))?;
                    Ok(Dataset {
                        gallery: s.gallery,
                        probes: s.probes,
                        truth: s.truth,
                    })
                })
                .collect()
        }
    }
}

/// Caps the requested ranks at the smallest gallery, warning when clipped.
fn clip_ranks(ranks: &[usize], data: &[Dataset]) -> Result<Vec<usize>> {
    if ranks.is_empty() || ranks.contains(&0) {
        return Err(CliError::Usage("--ranks must be positive".into()));
    }
    let limit = data.iter().map(|d| d.gallery.len()).min().unwrap_or(0);
    let mut out: Vec<usize> = ranks.iter().map(|&r| r.min(limit)).collect();
    if out.as_slice() != ranks {
        warn!("ranks above the gallery size {limit} are clipped");
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Paths of the JSON, CSV and timing outputs for a report path.
pub fn report_paths(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        out.with_extension("json"),
        out.with_extension("csv"),
        out.with_extension("timings.csv"),
    )
}

fn write_report(report: &EvalReport, out: &Path, with_timings: bool) -> Result<()> {
    let (json, csv, timings) = report_paths(out);
    io::write_file(&json, report.to_json().as_bytes())?;
    io::write_file(&csv, report.to_csv().as_bytes())?;
    if with_timings {
        io::write_file(&timings, report.timings_csv().as_bytes())?;
    }
    Ok(())
}

pub fn cmd_eval(args: &EvalArgs) -> Result<EvalReport> {
    let data = load_datasets(&args.files, &args.scenario)?;
    let metric = load_metric(&args.metric)?;
    let ranks = clip_ranks(&args.ranks, &data)?;
    let max_rank = *ranks.last().expect("ranks are non-empty");
    let k = positive(args.neighbors.k, "--k")?;
    let rule = match args.neighbors.k_sigma {
        Some(v) => KSigmaRule::Fixed(positive(v, "--k-sigma")?),
        None => KSigmaRule::GalleryFraction(0.05),
    };
    let methods = args
        .method
        .iter()
        .map(|m| parse_method(m, args.neighbors.with_probes))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<Trial<'_>> = data.iter().map(Dataset::trial).collect();

    let run = |method: Method, policy: PolicyMode| {
        let mut config = RerankConfig::new(method, policy, k, 1);
        config.shared_ids = args.neighbors.shared_ids;
        evaluate(config, Some(rule), &trials, &metric, max_rank)
    };
    let mut report = EvalReport::default();
    for &(method, policy) in &methods {
        let (summary, timing) = run(method, policy)?;
        report.methods.push(summary);
        report.timings.push(timing);
    }
    let baseline = match report
        .methods
        .iter()
        .find(|m| m.method == Method::Knn && m.policy == PolicyMode::GalleryOnly)
    {
        Some(b) => b.cmc.clone(),
        None => run(Method::Knn, PolicyMode::GalleryOnly)?.0.cmc,
    };
    for m in &report.methods {
        let cmc: Vec<f64> = ranks.iter().map(|&r| m.cmc[r - 1]).collect();
        report.gain_curves.push(GainCurve {
            label: m.label.clone(),
            method: m.method,
            policy: m.policy,
            k: m.k,
            k_sigma: m.k_sigma,
            ranks: ranks.clone(),
            gains: cmc.iter().zip(&ranks).map(|(v, &r)| v - baseline[r - 1]).collect(),
            cmc,
        });
    }
    write_report(&report, &args.out, true)?;
    Ok(report)
}

pub fn parse_k_sigma_rule(spec: &str) -> Result<KSigmaRule> {
    let bad = || {
        CliError::Usage(format!(
            "--k-sigma-rule {spec:?}: expected same, multiplicity, fraction:F or fixed:N"
        ))
    };
    match spec.split_once(':') {
        None if spec == "same" => Ok(KSigmaRule::SameAsK),
        None if spec == "multiplicity" => Ok(KSigmaRule::MeanMultiplicity),
        Some(("fraction", f)) => match f.parse::<f64>() {
            Ok(f) if f > 0.0 && f <= 1.0 => Ok(KSigmaRule::GalleryFraction(f)),
            _ => Err(bad()),
        },
        Some(("fixed", n)) => match n.parse::<usize>() {
            Ok(n) if n > 0 => Ok(KSigmaRule::Fixed(n)),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<EvalReport> {
    let data = load_datasets(&args.files, &args.scenario)?;
    let metric = load_metric(&args.metric)?;
    let ranks = clip_ranks(&args.ranks, &data)?;
    let rule = parse_k_sigma_rule(&args.k_sigma_rule)?;
    let methods = args
        .method
        .iter()
        .map(|m| parse_method(m, args.with_probes))
        .collect::<Result<Vec<_>>>()?;
    let trials: Vec<Trial<'_>> = data.iter().map(Dataset::trial).collect();
    let curves = k_sweep(&methods, &trials, &args.k_values, rule, &ranks, &metric)?;
    let report = EvalReport {
        gain_curves: curves,
        ..EvalReport::default()
    };
    write_report(&report, &args.out, false)?;
    Ok(report)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<bench::BenchRow>> {
    let config = BenchConfig {
        sizes: args.sizes.clone(),
        dim: args.dim,
        probes: args.probes,
        inn_probes: args.inn_probes,
        repeats: args.repeats,
        k: args.k,
        seed: args.seed,
    };
    let rows = bench::run_bench(&config)?;
    let csv = bench::rows_to_csv(&rows);
    match &args.out {
        Some(path) => io::write_file(path, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    for method in ["inv_dakr", "bi_dakr"] {
        let (a, r2) = bench::fit_n_log_n(&bench::online_series(&rows, method));
        eprintln!("{method}: online ~ {a:.3e} * N ln N ms, R^2 = {r2:.4}");
    }
    Ok(rows)
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let kind = args
        .scenario
        .scenario
        .as_deref()
        .ok_or_else(|| CliError::Usage("gen needs --scenario".into()))?;
    let params = scenario_params(&args.scenario, kind)?;
    let s = generate_scenario(params)?;
    let (ext, gallery, probes) = match args.format {
        FeatureFormat::Csv => (
            "csv",
            io::features_to_csv(&s.gallery).into_bytes(),
            io::features_to_csv(&s.probes).into_bytes(),
        ),
        FeatureFormat::Bin => (
            "fst",
            io::features_to_binary(&s.gallery),
            io::features_to_binary(&s.probes),
        ),
    };
    io::write_file(&args.out.join(format!("gallery.{ext}")), &gallery)?;
    io::write_file(&args.out.join(format!("probes.{ext}")), &probes)?;
    io::write_file(&args.out.join("truth.csv"), io::truth_to_csv(&s.truth).as_bytes())?;
    let params_json = serde_json::to_string_pretty(&s.params).expect("params serialize") + "\n";
    io::write_file(&args.out.join("scenario.json"), params_json.as_bytes())?;
    Ok(())
}
