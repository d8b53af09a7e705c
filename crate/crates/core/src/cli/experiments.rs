//! One function per command, each turning a spec into a [`Report`].
//!
//! Replicate `r` always draws from stream `r` of the master seed. Commands
//! that need further independent randomness (a second engine, a comparison
//! sample, bootstrap draws) use stream `(block << 32) | r` with a fixed
//! block number per purpose, so no two purposes ever share a stream.

use rayon::prelude::*;
use thiserror::Error;

use super::{Command, ExperimentSpec, Report, Value};
use crate::analysis::{
    bootstrap_log_law_slope, clt_conditional_check, estimate_time_constant, fit_scaling,
    growth_constant_from_endpoints, ks_two_sample, lemma2_check, min_growth_ratio, q_sequence,
    q_square_prefix_check, q_value, quantile, summation_by_parts, tightness_scan, AnalysisError,
    CompensatedSum, ConditionalMoments, SampleSet, ScalingModel,
};
use crate::engines::{grow, run, run_scales, EngineError, EngineKind, HitResult, SimConfig};
use crate::rng::{derive_stream, RngStream};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Setup(String),
}

type Result<T> = std::result::Result<T, ExperimentError>;

/// Stream blocks for secondary randomness.
const BLOCK_REFERENCE: u64 = 1;
const BLOCK_BOOTSTRAP: u64 = 2;
const BLOCK_ENGINE: u64 = 3;

const BOOTSTRAP_RESAMPLES: usize = 1000;
const SUMMATION_CASES: u64 = 1000;

fn stream(seed: u64, block: u64, r: u64) -> RngStream {
    debug_assert!(r < 1 << 32);
    derive_stream(seed, (block << 32) | r)
}

/// Evaluate `f(0..count)` on `workers` threads, in index order. On failure
/// the error of the lowest failing index is returned.
fn farm<T, F>(workers: usize, count: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Setup(format!("thread pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| (0..count).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

fn meta(spec: &ExperimentSpec) -> Vec<(String, String)> {
    let c = &spec.config;
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    let mut m = vec![
        ("command", spec.command.name().to_string()),
        ("seed", c.master_seed.to_string()),
        ("replicates", c.replicates.to_string()),
        ("n", c.n.to_string()),
        ("direction", format!("{},{}", c.direction.0, c.direction.1)),
        ("engine", c.engine.to_string()),
        ("clock", c.clock.to_string()),
        (
            "alpha",
            c.strip.map_or("none".into(), |s| s.alpha.to_string()),
        ),
        (
            "strip_constant",
            c.strip
                .map_or(super::DEFAULT_STRIP_CONSTANT, |s| s.constant)
                .to_string(),
        ),
        ("scales", join(&spec.scales)),
        ("window", spec.window.to_string()),
        ("fuzz", spec.fuzz.to_string()),
        (
            "max_steps",
            c.max_steps.map_or("default".into(), |m| m.to_string()),
        ),
        ("retain_trace", c.retain_trace.to_string()),
        ("format", spec.format.name().to_string()),
    ];
    m.push((
        "streams",
        "replicate r uses stream r; secondary samples use (block<<32)|r".into(),
    ));
    m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

pub fn run_report(spec: &ExperimentSpec) -> Result<Report> {
    let mut report = match spec.command {
        Command::Hit => hit(spec)?,
        Command::Grow => grow_cmd(spec)?,
        Command::VarianceScan => variance_scan(spec)?,
        Command::Shape => shape(spec)?,
        Command::Lemma2 => lemma2(spec)?,
        Command::Strip => strip(spec)?,
        Command::EnginesCompare => engines_compare(spec)?,
        Command::CltCheck => clt_check(spec)?,
    };
    report.meta = meta(spec);
    Ok(report)
}

const HIT_COLUMNS: [&str; 9] = [
    "command",
    "seed",
    "engine",
    "n",
    "replicate",
    "T",
    "M_n",
    "mu_Mn",
    "sigma2_Mn",
];
const TRACE_COLUMNS: [&str; 10] = [
    "command",
    "seed",
    "engine",
    "n",
    "replicate",
    "j",
    "x",
    "y",
    "Y_j",
    "T_j",
];
const SUMMARY_COLUMNS: [&str; 8] = [
    "n",
    "mean_T",
    "var_T",
    "median_T",
    "max_window_mass",
    "c1_hat",
    "c2_hat",
    "lemma1_ratio_p5",
];

fn hit_row(
    command: &str,
    spec: &ExperimentSpec,
    engine: EngineKind,
    n: u64,
    r: u64,
    h: &HitResult,
) -> Vec<Value> {
    vec![
        command.into(),
        spec.config.master_seed.into(),
        engine.name().into(),
        n.into(),
        r.into(),
        h.passage_time.into(),
        h.hit_index.into(),
        h.mu.into(),
        h.sigma_sq.into(),
    ]
}

fn results_table(spec: &ExperimentSpec, results: &[HitResult]) -> Report {
    let c = &spec.config;
    let name = spec.command.name();
    if c.retain_trace {
        let mut report = Report::new(TRACE_COLUMNS.to_vec());
        for (r, h) in results.iter().enumerate() {
            let t = h.trace.as_ref().expect("trace retained");
            for (j, (v, &time)) in t.vertices.iter().zip(&t.times).enumerate() {
                let y = j.checked_sub(1).map(|i| t.y_counts[i] as u64);
                report.push_row(vec![
                    name.into(),
                    c.master_seed.into(),
                    c.engine.name().into(),
                    c.n.into(),
                    r.into(),
                    j.into(),
                    v.x.into(),
                    v.y.into(),
                    y.into(),
                    time.into(),
                ]);
            }
        }
        report
    } else {
        let mut report = Report::new(HIT_COLUMNS.to_vec());
        for (r, h) in results.iter().enumerate() {
            report.push_row(hit_row(name, spec, c.engine, c.n, r as u64, h));
        }
        report
    }
}

fn times(results: &[HitResult], n: u64) -> SampleSet {
    SampleSet::new(results.iter().map(|h| h.passage_time).collect(), n)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let mut count = 0usize;
    let s: CompensatedSum = xs.inspect(|_| count += 1).collect();
    s.value() / count as f64
}

fn hit(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let target = c.target()?;
    let results = farm(spec.workers, c.replicates, |r| {
        Ok(run(c, &mut derive_stream(c.master_seed, r))?)
    })?;
    let mut report = results_table(spec, &results);
    let t = times(&results, c.n);
    report.note("target", target.to_string());
    report.note("mean_T", t.mean());
    report.note("se_T", t.std_error());
    report.note("mean_M_n", mean(results.iter().map(|h| h.hit_index as f64)));
    Ok(report)
}

fn grow_cmd(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let results = farm(spec.workers, c.replicates, |r| {
        Ok(grow(
            c.engine,
            c.clock,
            c.n,
            c.retain_trace,
            &mut derive_stream(c.master_seed, r),
        )?)
    })?;
    let mut report = results_table(spec, &results);
    let endpoints: Vec<(u64, f64)> = results
        .iter()
        .map(|h| (h.hit_index, h.passage_time))
        .collect();
    let c2 = growth_constant_from_endpoints(&endpoints)?;
    report.note("c2_hat", c2.c2);
    report.note("c2_se", c2.std_error);
    report.note(
        "mean_mu_over_sqrt_n",
        mean(results.iter().map(|h| h.mu / (c.n as f64).sqrt())),
    );
    Ok(report)
}

/// Hit results indexed `[scale][replicate]`; replicate `r` of every scale
/// uses stream `(block << 32) | r`.
fn scale_hits(
    spec: &ExperimentSpec,
    config: &SimConfig,
    block: u64,
) -> Result<Vec<Vec<HitResult>>> {
    let seed = config.master_seed;
    let per_rep: Vec<Vec<HitResult>> = if config.strip.is_none() {
        farm(spec.workers, config.replicates, |r| {
            Ok(run_scales(
                config,
                &spec.scales,
                &mut stream(seed, block, r),
            )?)
        })?
    } else {
        farm(spec.workers, config.replicates, |r| {
            spec.scales
                .iter()
                .map(|&n| {
                    Ok(run(
                        &SimConfig {
                            n,
                            ..config.clone()
                        },
                        &mut stream(seed, block, r),
                    )?)
                })
                .collect()
        })?
    };
    Ok((0..spec.scales.len())
        .map(|i| per_rep.iter().map(|row| row[i].clone()).collect())
        .collect())
}

/// One summary row for the hits at scale `n`.
fn summary_row(n: u64, hits: &[HitResult], window: f64, clock_is_exp: bool) -> Result<Vec<Value>> {
    let set = times(hits, n);
    let s = set.summary()?;
    let mass = tightness_scan(&set, window).ok();
    let c2 = clock_is_exp.then(|| {
        mean(
            hits.iter()
                .map(|h| h.hit_index as f64 / (h.passage_time * h.passage_time)),
        )
    });
    let mut ratios: Vec<f64> = hits
        .iter()
        .filter(|h| h.hit_index >= 2)
        .map(|h| h.sigma_sq / (h.hit_index as f64).ln())
        .collect();
    ratios.sort_unstable_by(f64::total_cmp);
    let p5 = (!ratios.is_empty()).then(|| quantile(&ratios, 0.05));
    Ok(vec![
        n.into(),
        s.mean.into(),
        s.variance.into(),
        s.median.into(),
        mass.into(),
        (s.mean / n as f64).into(),
        c2.into(),
        p5.into(),
    ])
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn variance_scan(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let hits = scale_hits(spec, c, 0)?;
    let is_exp = c.clock == crate::engines::ClockDistribution::Exponential
        || c.engine != EngineKind::Richardson;
    let mut report = Report::new(SUMMARY_COLUMNS.to_vec());
    for (&n, h) in spec.scales.iter().zip(&hits) {
        report.push_row(summary_row(n, h, spec.window, is_exp)?);
    }
    let sets: Vec<SampleSet> = spec
        .scales
        .iter()
        .zip(&hits)
        .map(|(&n, h)| times(h, n))
        .collect();
    let vars: Vec<f64> = sets.iter().map(SampleSet::variance).collect();
    report.note("variance_strictly_increasing", strictly_increasing(&vars));
    let masses: Option<Vec<f64>> = sets
        .iter()
        .map(|s| tightness_scan(s, spec.window).ok())
        .collect();
    report.note(
        "window_mass_strictly_decreasing",
        masses.map(|m| strictly_decreasing(&m)),
    );
    let points: Vec<(f64, f64)> = spec
        .scales
        .iter()
        .zip(&vars)
        .map(|(&n, &v)| (n as f64, v))
        .collect();
    match fit_scaling(&points, ScalingModel::LogLaw) {
        Ok(fit) => {
            report.note("loglaw_C", fit.params.0);
            report.note("loglaw_D", fit.params.1);
            report.note("loglaw_residual", fit.residual);
            let mut rng = stream(c.master_seed, BLOCK_BOOTSTRAP, 0);
            let slopes = bootstrap_log_law_slope(&sets, BOOTSTRAP_RESAMPLES, &mut rng)?;
            report.note("loglaw_C_lower95", quantile(&slopes, 0.05));
        }
        Err(e) => report.note("loglaw_fit", format!("unavailable: {e}")),
    }
    match fit_scaling(&points, ScalingModel::PowerLaw) {
        Ok(fit) => {
            report.note("powerlaw_A_exploratory", fit.params.0);
            report.note("powerlaw_beta_exploratory", fit.params.1);
        }
        Err(e) => report.note("powerlaw_fit", format!("unavailable: {e}")),
    }
    Ok(report)
}

fn shape(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let hits = scale_hits(spec, c, 0)?;
    let mut report = Report::new(SUMMARY_COLUMNS.to_vec());
    for (&n, h) in spec.scales.iter().zip(&hits) {
        report.push_row(summary_row(n, h, spec.window, true)?);
    }
    let clock = if c.engine == EngineKind::Richardson {
        c.clock
    } else {
        crate::engines::ClockDistribution::Exponential
    };
    let sets: Vec<SampleSet> = spec
        .scales
        .iter()
        .zip(&hits)
        .map(|(&n, h)| times(h, n).with_clock(clock))
        .collect();
    let c1 = estimate_time_constant(&sets, c.direction)?;

    let steps = c.n;
    let growth = farm(spec.workers, c.replicates, |r| {
        Ok(grow(
            c.engine,
            c.clock,
            steps,
            false,
            &mut stream(c.master_seed, BLOCK_REFERENCE, r),
        )?)
    })?;
    let endpoints: Vec<(u64, f64)> = growth
        .iter()
        .map(|h| (h.hit_index, h.passage_time))
        .collect();
    let c2 = growth_constant_from_endpoints(&endpoints)?;

    let (largest, largest_hits) = spec
        .scales
        .iter()
        .zip(&hits)
        .max_by_key(|(&n, _)| n)
        .expect("at least one scale");
    let m_over_n2 = mean(
        largest_hits
            .iter()
            .map(|h| h.hit_index as f64 / (*largest as f64).powi(2)),
    );
    let predicted = c2.c2 * c1.c1 * c1.c1;
    let mu_ratio = mean(growth.iter().map(|h| h.mu / (steps as f64).sqrt()));
    let inv_sqrt_c2 = c2.c2.powf(-0.5);

    report.note("c1_hat", c1.c1);
    report.note("c1_se", c1.std_error);
    report.note("c1_scale", c1.scale);
    report.note("c1_extrapolated", c1.extrapolated);
    report.note("c1_extrapolation_slope", c1.slope);
    report.note("c2_hat", c2.c2);
    report.note("c2_se", c2.std_error);
    report.note("c2_lower99", c2.lower_99());
    report.note("c2_steps", steps);
    report.note("M_over_n2", m_over_n2);
    report.note("c2_c1_sq", predicted);
    report.note(
        "M_consistency_rel_diff",
        (m_over_n2 - predicted).abs() / predicted,
    );
    report.note("mean_mu_over_sqrt_n", mu_ratio);
    report.note("c2_inv_sqrt", inv_sqrt_c2);
    report.note(
        "mu_consistency_rel_diff",
        (mu_ratio - inv_sqrt_c2).abs() / inv_sqrt_c2,
    );
    Ok(report)
}

fn lemma2(spec: &ExperimentSpec) -> Result<Report> {
    let seed = spec.config.master_seed;
    let mut report = Report::new(vec!["check", "cases", "violations", "worst", "passed"]);
    let mut all = true;
    let mut row = |report: &mut Report, name: &str, cases: u64, violations: u64, worst: Value| {
        let passed = violations == 0;
        all &= passed;
        report.push_row(vec![
            name.into(),
            cases.into(),
            violations.into(),
            worst,
            passed.into(),
        ]);
    };

    // the extremal sequence a*q attains equality
    let a = 1.7;
    let xs: Vec<f64> = q_sequence(1000).iter().map(|q| a * q).collect();
    let eq = lemma2_check(&xs, a)?;
    let rel = eq.margin.abs() / eq.sum_sq;
    row(
        &mut report,
        "equality",
        1,
        u64::from(rel > 1e-12),
        rel.into(),
    );

    // random positive sequences, a taken from the sequence itself
    let margins = farm(spec.workers, spec.fuzz, |i| {
        let mut r = stream(seed, 0, i);
        let len = 2 + r.index(199);
        let xs: Vec<f64> = (0..len).map(|_| r.uniform01()).collect();
        let rep = lemma2_check(&xs, min_growth_ratio(&xs))?;
        Ok((rep.holds, rep.margin / rep.sum_sq))
    })?;
    let violations = margins.iter().filter(|m| !m.0).count() as u64;
    let worst = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    row(
        &mut report,
        "fuzz",
        spec.fuzz,
        violations,
        if spec.fuzz > 0 {
            worst.into()
        } else {
            Value::Missing
        },
    );

    // sum_{j<=n} q_j^2 >= H_n/4 >= ln(n)/4 for every n up to --n
    let n_max = spec.config.n as usize;
    let first_fail = q_square_prefix_check(n_max).err();
    row(
        &mut report,
        "q_square_prefix",
        n_max as u64,
        u64::from(first_fail.is_some()),
        first_fail.map(|n| n as u64).into(),
    );

    // sum q_j telescopes to sqrt(n)
    let q_sum: CompensatedSum = (1..=n_max).map(q_value).collect();
    let err = (q_sum.value() - (n_max as f64).sqrt()).abs();
    row(
        &mut report,
        "telescoping",
        1,
        u64::from(err >= 1e-9),
        err.into(),
    );

    // summation by parts on random decreasing sequences
    let errors = farm(spec.workers, SUMMATION_CASES, |i| {
        let mut r = stream(seed, BLOCK_REFERENCE, i);
        let len = 2 + r.index(199);
        let mut xs: Vec<f64> = (0..len).map(|_| r.uniform01()).collect();
        xs.sort_by(|a, b| b.total_cmp(a));
        let direct: CompensatedSum = xs.iter().map(|x| x * x).collect();
        Ok((summation_by_parts(&xs) - direct.value()).abs() / direct.value())
    })?;
    let bad = errors.iter().filter(|&&e| e > 1e-10).count() as u64;
    let worst = errors.iter().copied().fold(0.0, f64::max);
    row(
        &mut report,
        "summation_by_parts",
        SUMMATION_CASES,
        bad,
        worst.into(),
    );

    report.check_passed = Some(all);
    Ok(report)
}

fn strip(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let region = c.strip_region()?.expect("strip command requires --alpha");
    let free = SimConfig {
        strip: None,
        ..c.clone()
    };
    let restricted = farm(spec.workers, c.replicates, |r| {
        Ok(run(c, &mut derive_stream(c.master_seed, r))?)
    })?;
    let unrestricted = farm(spec.workers, c.replicates, |r| {
        Ok(run(&free, &mut stream(c.master_seed, BLOCK_REFERENCE, r))?)
    })?;
    let mut report = Report::new(HIT_COLUMNS.to_vec());
    for (r, h) in restricted.iter().enumerate() {
        report.push_row(hit_row("strip", spec, c.engine, c.n, r as u64, h));
    }
    for (r, h) in unrestricted.iter().enumerate() {
        report.push_row(hit_row("hit", spec, c.engine, c.n, r as u64, h));
    }
    let t_strip = times(&restricted, c.n);
    let t_free = times(&unrestricted, c.n);
    let ks = ks_two_sample(&t_strip, &t_free)?;
    let cs_ok = restricted
        .iter()
        .filter(|h| h.sigma_sq >= h.mu * h.mu / h.hit_index as f64 * (1.0 - 1e-12))
        .count();
    report.note("half_width", region.half_width());
    report.note("ks_statistic", ks.statistic);
    report.note("ks_critical", ks.critical);
    report.note("ks_passed", ks.passed());
    report.note("mean_T_strip", t_strip.mean());
    report.note("se_T_strip", t_strip.std_error());
    report.note("mean_T", t_free.mean());
    report.note("se_T", t_free.std_error());
    report.note(
        "mean_M_strip",
        mean(restricted.iter().map(|h| h.hit_index as f64)),
    );
    report.note(
        "mean_M",
        mean(unrestricted.iter().map(|h| h.hit_index as f64)),
    );
    report.note(
        "cauchy_schwarz_fraction",
        cs_ok as f64 / restricted.len() as f64,
    );
    Ok(report)
}

fn engines_compare(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let engines = [
        EngineKind::Eden,
        EngineKind::Dijkstra,
        EngineKind::Richardson,
    ];
    let mut sets = Vec::new();
    for (k, &engine) in engines.iter().enumerate() {
        let cfg = SimConfig {
            engine,
            strip: None,
            ..c.clone()
        };
        let block = BLOCK_ENGINE + k as u64;
        let results = farm(spec.workers, c.replicates, |r| {
            Ok(run(&cfg, &mut stream(c.master_seed, block, r))?)
        })?;
        sets.push(times(&results, c.n));
    }
    let mut report = Report::new(vec![
        "engine_a",
        "engine_b",
        "n",
        "replicates",
        "ks_statistic",
        "ks_critical",
        "passed",
    ]);
    let mut all = true;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let ks = ks_two_sample(&sets[i], &sets[j])?;
        all &= ks.passed();
        report.push_row(vec![
            engines[i].name().into(),
            engines[j].name().into(),
            c.n.into(),
            c.replicates.into(),
            ks.statistic.into(),
            ks.critical.into(),
            ks.passed().into(),
        ]);
    }
    for (e, s) in engines.iter().zip(&sets) {
        report.note(&format!("mean_T_{e}"), s.mean());
    }
    report.note("richardson_clock", c.clock.name());
    report.check_passed = Some(all);
    Ok(report)
}

fn clt_check(spec: &ExperimentSpec) -> Result<Report> {
    let c = &spec.config;
    let trace = grow(
        EngineKind::Eden,
        c.clock,
        c.n,
        true,
        &mut derive_stream(c.master_seed, 0),
    )?
    .trace
    .expect("trace retained");
    let mut rng = stream(c.master_seed, BLOCK_REFERENCE, 0);
    let ks = clt_conditional_check(&trace.y_counts, c.replicates as usize, &mut rng)?;
    let m = ConditionalMoments::from_y_counts(&trace.y_counts)?;
    let mut report = Report::new(vec![
        "n",
        "replicates",
        "ks_statistic",
        "ks_critical",
        "passed",
    ]);
    report.push_row(vec![
        c.n.into(),
        c.replicates.into(),
        ks.statistic.into(),
        ks.critical.into(),
        ks.passed().into(),
    ]);
    report.note("mu_n", *m.mu.last().unwrap());
    report.note("sigma2_n", *m.sigma_sq.last().unwrap());
    report.check_passed = Some(ks.passed());
    Ok(report)
}
