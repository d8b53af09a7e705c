//! Statistical and structural properties of the engines, checked at modest
//! sample sizes with fixed seeds.

use fpp_core::analysis::{
    chi_square_gof, chi_square_homogeneity, conditional_moments, estimate_growth_constant,
    estimate_time_constant, ks_one_sample, lemma1_ratio, quantile, SampleSet,
};
use fpp_core::engines::{
    grow, run, run_dijkstra, run_eden, run_scales, Dijkstra, Eden, GrowthProcess, Richardson,
    SimConfig,
};
use fpp_core::lattice::{min_boundary, Cluster, MIN_BOUNDARY_CAP};
use fpp_core::{derive_stream, ClockDistribution, EngineKind, RngStream, Vertex};

fn process(engine: EngineKind, rng: &mut RngStream) -> Box<dyn GrowthProcess> {
    let c = Cluster::singleton(Vertex::ORIGIN);
    match engine {
        EngineKind::Eden => Box::new(Eden::new(c)),
        EngineKind::Dijkstra => Box::new(Dijkstra::new(c, rng)),
        EngineKind::Richardson => Box::new(Richardson::new(c, ClockDistribution::Exponential)),
    }
}

const ENGINES: [EngineKind; 3] = [
    EngineKind::Eden,
    EngineKind::Dijkstra,
    EngineKind::Richardson,
];

fn neighbor_slot(v: Vertex) -> usize {
    Vertex::ORIGIN
        .neighbors()
        .iter()
        .position(|&n| n == v)
        .expect("first vertex is a neighbor of the origin")
}

/// Index of V2 among the six boundary heads of the domino {0, V1}, listed
/// in a rotation-free canonical order.
fn second_slot(v1: Vertex, v2: Vertex) -> usize {
    let mut heads: Vec<Vertex> = [Vertex::ORIGIN, v1]
        .iter()
        .flat_map(|m| m.neighbors())
        .filter(|&w| w != Vertex::ORIGIN && w != v1)
        .collect();
    heads.sort();
    heads.dedup();
    assert_eq!(heads.len(), 6);
    heads
        .iter()
        .position(|&h| h == v2)
        .expect("V2 is a boundary head of the domino")
}

#[test]
fn first_two_vertices_have_the_same_law_across_engines() {
    let reps = 100_000;
    let mut singles = Vec::new();
    let mut pairs = Vec::new();
    for (k, &engine) in ENGINES.iter().enumerate() {
        let mut v1_counts = vec![0u64; 4];
        let mut pair_counts = vec![0u64; 24];
        for r in 0..reps {
            let mut rng = derive_stream(31, ((k as u64) << 32) | r);
            let mut p = process(engine, &mut rng);
            let v1 = p.step(&mut rng).unwrap().vertex;
            let v2 = p.step(&mut rng).unwrap().vertex;
            v1_counts[neighbor_slot(v1)] += 1;
            pair_counts[neighbor_slot(v1) * 6 + second_slot(v1, v2)] += 1;
        }
        // V1 uniform on 4 neighbors; V2 uniform on the domino's 6 distinct heads
        let (stat, crit) = chi_square_gof(&v1_counts, &[0.25; 4]).unwrap();
        assert!(stat < crit, "{engine} V1: chi2 {stat} >= {crit}");
        let (stat, crit) = chi_square_gof(&pair_counts, &[1.0 / 24.0; 24]).unwrap();
        assert!(stat < crit, "{engine} (V1,V2): chi2 {stat} >= {crit}");
        singles.push(v1_counts);
        pairs.push(pair_counts);
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let (stat, crit) = chi_square_homogeneity(&singles[i], &singles[j]).unwrap();
        assert!(
            stat < crit,
            "V1 {} vs {}: {stat} >= {crit}",
            ENGINES[i],
            ENGINES[j]
        );
        let (stat, crit) = chi_square_homogeneity(&pairs[i], &pairs[j]).unwrap();
        assert!(
            stat < crit,
            "(V1,V2) {} vs {}: {stat} >= {crit}",
            ENGINES[i],
            ENGINES[j]
        );
    }
}

#[test]
fn neighbor_passage_time_means_agree() {
    let reps = 100_000u64;
    let cfg = SimConfig::axis(1);
    let eden: Vec<f64> = (0..reps)
        .map(|r| {
            run_eden(&cfg, &mut derive_stream(32, r))
                .unwrap()
                .passage_time
        })
        .collect();
    let dij: Vec<f64> = (0..reps)
        .map(|r| {
            run_dijkstra(&cfg, &mut derive_stream(33, r))
                .unwrap()
                .passage_time
        })
        .collect();
    let (a, b) = (SampleSet::new(eden, 1), SampleSet::new(dij, 1));
    let se = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    assert!(
        (a.mean() - b.mean()).abs() <= 2.0 * se,
        "eden {} dijkstra {} se {se}",
        a.mean(),
        b.mean()
    );
}

#[test]
fn hit_index_at_least_l1_distance() {
    for (k, &engine) in ENGINES.iter().enumerate() {
        for r in 0..50 {
            let cfg = SimConfig {
                direction: (0.6, 0.8),
                n: 9,
                engine,
                ..Default::default()
            };
            let h = run(&cfg, &mut derive_stream(34, ((k as u64) << 32) | r)).unwrap();
            let target = cfg.target().unwrap();
            assert_eq!(target, Vertex::new(5, 7));
            assert!(h.hit_index >= Vertex::ORIGIN.l1_distance(target));
        }
    }
}

#[test]
fn rescaled_increments_are_exp1_for_every_engine() {
    for (k, &engine) in ENGINES.iter().enumerate() {
        let h = grow(
            engine,
            ClockDistribution::Exponential,
            20_000,
            true,
            &mut derive_stream(35, k as u64),
        )
        .unwrap();
        let t = h.trace.unwrap();
        let scaled: Vec<f64> = t
            .times
            .windows(2)
            .zip(&t.y_counts)
            .map(|(w, &y)| (w[1] - w[0]) * y as f64)
            .collect();
        let ks = ks_one_sample(&scaled, |x| 1.0 - (-x).exp()).unwrap();
        assert!(
            ks.passed(),
            "{engine}: ks {} crit {}",
            ks.statistic,
            ks.critical
        );
    }
}

#[test]
fn conditional_moment_bounds_hold_along_every_trace() {
    for (k, &engine) in ENGINES.iter().enumerate() {
        for r in 0..40 {
            let h = grow(
                engine,
                ClockDistribution::Exponential,
                3_000,
                true,
                &mut derive_stream(36, ((k as u64) << 32) | r),
            )
            .unwrap();
            let t = h.trace.unwrap();
            t.check().unwrap();
            let m = conditional_moments(&t).unwrap();
            assert!(m.bounds_hold(1e-12), "{engine} replicate {r}");
            assert!(m.mu.windows(2).all(|w| w[1] > w[0]));
            assert!(m.sigma_sq.windows(2).all(|w| w[1] > w[0]));
            assert_eq!(*m.mu.last().unwrap(), h.mu);
            assert_eq!(*m.sigma_sq.last().unwrap(), h.sigma_sq);
        }
    }
}

#[test]
fn lemma1_ratio_prefix_consistency() {
    let t = grow(
        EngineKind::Eden,
        ClockDistribution::Exponential,
        4_000,
        true,
        &mut derive_stream(37, 0),
    )
    .unwrap()
    .trace
    .unwrap();
    let n = 2_000;
    let tail: f64 = t.y_counts[n..2 * n]
        .iter()
        .map(|&y| 1.0 / (y as f64).powi(2))
        .sum();
    let lhs = lemma1_ratio(&t, 2 * n).unwrap() * ((2 * n) as f64).ln();
    let rhs = lemma1_ratio(&t, n).unwrap() * (n as f64).ln() + tail;
    assert!((lhs - rhs).abs() <= 1e-12 * lhs, "{lhs} vs {rhs}");
}

#[test]
fn small_snapshots_respect_the_isoperimetric_minimum() {
    for (k, &engine) in ENGINES.iter().enumerate() {
        for r in 0..300 {
            let mut rng = derive_stream(38, ((k as u64) << 32) | r);
            let mut p = process(engine, &mut rng);
            for size in 1..=MIN_BOUNDARY_CAP {
                assert_eq!(p.cluster().size(), size);
                assert!(p.cluster().boundary_count() >= min_boundary(size).unwrap());
                if size < MIN_BOUNDARY_CAP {
                    p.step(&mut rng).unwrap();
                }
            }
        }
    }
}

fn iqr_over_median(mut xs: Vec<f64>) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    (quantile(&xs, 0.75) - quantile(&xs, 0.25)) / quantile(&xs, 0.5)
}

#[test]
fn rescaled_passage_time_concentrates() {
    // T(V_n) / sqrt(n) spreads less as n grows
    let ns = [100usize, 1_000, 10_000];
    let traces: Vec<_> = (0..400)
        .map(|r| {
            grow(
                EngineKind::Eden,
                ClockDistribution::Exponential,
                10_000,
                true,
                &mut derive_stream(39, r),
            )
            .unwrap()
            .trace
            .unwrap()
        })
        .collect();
    let iqr: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let xs: Vec<f64> = traces
                .iter()
                .map(|t| t.times[n] / (n as f64).sqrt())
                .collect();
            let mut sorted = xs.clone();
            sorted.sort_unstable_by(f64::total_cmp);
            quantile(&sorted, 0.75) - quantile(&sorted, 0.25)
        })
        .collect();
    assert!(iqr.windows(2).all(|w| w[1] < w[0]), "{iqr:?}");
    let c2 = estimate_growth_constant(&traces).unwrap();
    assert!(c2.lower_99() > 0.0, "{c2:?}");
}

#[test]
fn hit_index_over_n_squared_concentrates() {
    let ns = [50u64, 100, 200];
    let hits: Vec<Vec<_>> = (0..300)
        .map(|r| run_scales(&SimConfig::axis(1), &ns, &mut derive_stream(40, r)).unwrap())
        .collect();
    let spread: Vec<f64> = (0..ns.len())
        .map(|i| {
            iqr_over_median(
                hits.iter()
                    .map(|h| h[i].hit_index as f64 / (ns[i] * ns[i]) as f64)
                    .collect(),
            )
        })
        .collect();
    assert!(spread.windows(2).all(|w| w[1] < w[0]), "{spread:?}");
}

#[test]
fn time_constant_estimates_are_positive_and_stable() {
    let ns = [100u64, 250, 500];
    let hits: Vec<Vec<_>> = (0..500)
        .map(|r| run_scales(&SimConfig::axis(1), &ns, &mut derive_stream(41, r)).unwrap())
        .collect();
    let sets: Vec<SampleSet> = (0..ns.len())
        .map(|i| SampleSet::new(hits.iter().map(|h| h[i].passage_time).collect(), ns[i]))
        .collect();
    let est = estimate_time_constant(&sets, (1.0, 0.0)).unwrap();
    assert!(est.c1 > 0.0 && est.std_error > 0.0 && est.scale == 500);
    let small = SampleSet::new(sets[0].values.clone(), 100);
    let c_small = small.mean() / 100.0;
    let combined = (small.std_error() / 100.0).hypot(est.std_error);
    assert!(
        (c_small - est.c1).abs() < 5.0 * (combined + 1.0 / 100.0),
        "{c_small} vs {}",
        est.c1
    );
    let wrong = sets
        .iter()
        .cloned()
        .map(|s| s.with_clock(ClockDistribution::Deterministic))
        .collect::<Vec<_>>();
    assert!(estimate_time_constant(&wrong, (1.0, 0.0)).is_err());
}

#[test]
fn strip_restriction_does_not_shorten_passage_times() {
    let n = 100;
    let strip = SimConfig::axis(n).with_strip(0.5, 2.0);
    let free = SimConfig::axis(n);
    let reps = 2000u64;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for r in 0..reps {
        let h = run(&strip, &mut derive_stream(42, r)).unwrap();
        assert!(h.sigma_sq >= h.mu * h.mu / h.hit_index as f64 * (1.0 - 1e-12));
        a.push(h.passage_time);
        b.push(
            run(&free, &mut derive_stream(42, (1 << 32) | r))
                .unwrap()
                .passage_time,
        );
    }
    let (a, b) = (SampleSet::new(a, n), SampleSet::new(b, n));
    assert!(
        a.mean() >= b.mean() - 2.0 * b.std_error(),
        "strip {} free {}",
        a.mean(),
        b.mean()
    );
}

#[test]
fn strip_traces_stay_inside_and_have_small_boundaries() {
    let cfg = SimConfig::axis(60).with_strip(0.5, 2.0).retaining_trace();
    let region = cfg.strip_region().unwrap().unwrap();
    for r in 0..20 {
        let h = run(&cfg, &mut derive_stream(43, r)).unwrap();
        let t = h.trace.unwrap();
        assert!(t.vertices.iter().all(|&v| region.contains(v)));
        assert!(t
            .y_counts
            .iter()
            .enumerate()
            .all(|(i, &y)| y as usize <= 2 * (i + 1) + 2));
        assert_eq!(*t.vertices.last().unwrap(), cfg.target().unwrap());
    }
}
