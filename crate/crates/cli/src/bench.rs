//! Wall-clock timing of the offline and online phases at several gallery
//! sizes. Timings are inherently run-dependent, so this output is the one
//! CLI artifact that is not byte-stable.

use std::fmt::Write as _;
use std::time::Instant;

use dakr::neighbors::{rank_inn_in, rank_knn_in};
use dakr::{default_k_sigma, AugmentationPolicy, DistanceMetric, FeatureSet, KernelIndex, SearchSpace, SigmaTable};
use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub probes: usize,
    pub inn_probes: usize,
    pub repeats: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![1000, 2000, 4000, 8000],
            dim: 64,
            probes: 16,
            inn_probes: 2,
            repeats: 7,
            k: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub n: usize,
    pub offline_ms: f64,
    pub online_ms_per_probe: f64,
}

fn uniform_set(rng: &mut ChaCha8Rng, n: usize, dim: usize, first_id: u64) -> Result<FeatureSet> {
    let data = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    Ok(FeatureSet::new((first_id..first_id + n as u64).collect(), data, dim)?)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.sizes.is_empty() || config.sizes.contains(&0) || config.dim == 0 {
        return Err(CliError::Usage("bench sizes and dimension must be positive".into()));
    }
    if config.probes == 0 || config.repeats == 0 || config.k == 0 {
        return Err(CliError::Usage("bench probes, repeats and k must be positive".into()));
    }
    let metric = DistanceMetric::Euclidean;
    let mut data = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (n as u64).rotate_left(32));
        let gallery = uniform_set(&mut rng, n, config.dim, 0)?;
        let probes = uniform_set(&mut rng, config.probes.max(config.inn_probes), config.dim, n as u64)?;
        data.push((gallery, probes));
    }
    let spaces = data
        .iter()
        .map(|(g, _)| SearchSpace::new(g, &metric, AugmentationPolicy::GalleryOnly))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let mut offline = Vec::with_capacity(spaces.len());
    let mut tables = Vec::with_capacity(spaces.len());
    for (space, &n) in spaces.iter().zip(&config.sizes) {
        let start = Instant::now();
        tables.push(SigmaTable::build(space, default_k_sigma(n))?);
        offline.push(ms_since(start));
    }
    let indexes = spaces
        .iter()
        .zip(&tables)
        .map(|(space, table)| KernelIndex::new(space, table))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    // Sizes are interleaved within every round so that a burst of machine
    // load is spread over all sizes instead of landing on one of them.
    let mut samples = vec![(Vec::new(), Vec::new(), Vec::new()); spaces.len()];
    for round in 0..=config.repeats {
        for (s, (space, index)) in spaces.iter().zip(&indexes).enumerate() {
            let probes = &data[s].1;
            for p in 0..config.probes {
                let probe = probes.sample(p);

                let start = Instant::now();
                let view = space.view(probe)?;
                std::hint::black_box(index.inv_rank(&view));
                let t_inv = ms_since(start);

                let start = Instant::now();
                let view = space.view(probe)?;
                std::hint::black_box(index.bi_rank(&view)?);
                let t_bi = ms_since(start);

                let start = Instant::now();
                let view = space.view(probe)?;
                std::hint::black_box(rank_knn_in(space, &view));
                let t_knn = ms_since(start);

                // round 0 only warms caches and the allocator
                if round > 0 {
                    let (knn, inv, bi) = &mut samples[s];
                    inv.push(t_inv);
                    bi.push(t_bi);
                    knn.push(t_knn);
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (s, &n) in config.sizes.iter().enumerate() {
        let mut inn = Vec::new();
        for p in 0..config.inn_probes {
            let start = Instant::now();
            let view = spaces[s].view(data[s].1.sample(p))?;
            std::hint::black_box(rank_inn_in(&spaces[s], &view, config.k.min(n))?);
            inn.push(ms_since(start));
        }

        let (knn, inv, bi) = std::mem::take(&mut samples[s]);
        let mut push = |method: &str, offline_ms: f64, samples: Vec<f64>| {
            let row = BenchRow {
                method: method.to_string(),
                n,
                offline_ms,
                online_ms_per_probe: median(samples),
            };
            info!(
                "{} n={} offline={:.3}ms online={:.4}ms",
                row.method, n, row.offline_ms, row.online_ms_per_probe
            );
            rows.push(row);
        };
        push("knn", 0.0, knn);
        push("inn", 0.0, inn);
        push("inv_dakr", offline[s], inv);
        push("bi_dakr", offline[s], bi);
    }
    Ok(rows)
}

/// `method,n,offline_ms,online_ms_per_probe`
pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("method,n,offline_ms,online_ms_per_probe\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6}",
            r.method, r.n, r.offline_ms, r.online_ms_per_probe
        );
    }
    out
}

/// Least-squares fit of `t = a * n * ln(n)` through the origin. Returns
/// `(a, r_squared)`, with R² taken against the mean of `t`.
pub fn fit_n_log_n(points: &[(usize, f64)]) -> (f64, f64) {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64 * (n as f64).ln()).collect();
    let ts: Vec<f64> = points.iter().map(|&(_, t)| t).collect();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxt: f64 = xs.iter().zip(&ts).map(|(x, t)| x * t).sum();
    let a = if sxx > 0.0 { sxt / sxx } else { 0.0 };
    let mean = ts.iter().sum::<f64>() / ts.len().max(1) as f64;
    let ss_res: f64 = xs.iter().zip(&ts).map(|(x, t)| (t - a * x).powi(2)).sum();
    let ss_tot: f64 = ts.iter().map(|t| (t - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, r2)
}

/// Online times of `method` as `(n, ms)` pairs, in size order.
pub fn online_series(rows: &[BenchRow], method: &str) -> Vec<(usize, f64)> {
    rows.iter()
        .filter(|r| r.method == method)
        .map(|r| (r.n, r.online_ms_per_probe))
        .collect()
}
