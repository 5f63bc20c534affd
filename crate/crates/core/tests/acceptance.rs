//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails or exceeds its time budget.

use std::time::{Duration, Instant};

use rand::Rng;

use tpagerank::critical::{
    homotopy_critical_estimate, homotopy_from_starts, sweep_options, temperature_sweep,
    tstar_complete, GeometricSchedule,
};
use tpagerank::graph::generators;
use tpagerank::kernel::classical_pagerank;
use tpagerank::metrics::{birkhoff_coefficient, hilbert_distance, kernel_distance_bound};
use tpagerank::oracle::{
    fixed_points_2x2, h_vector, mtt_invariant_with, multistart_fixed_points, MttBackend,
};
use tpagerank::report::{rank_cdf, top_k};
use tpagerank::rng::{random_simplex, seeded};
use tpagerank::weights::certify_uniqueness;
use tpagerank::{
    Graph, IterOptions, Kernel, KernelConfig, Personalization, RankVector, Temperature, Verdict,
    WeightFunction,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn t(v: f64) -> Temperature {
    Temperature::new(v).unwrap()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn three_node_example() -> Graph {
    Graph::from_dense(&[[0.0, 1.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).unwrap()
}

fn self_validation_example() -> Outcome {
    let g = three_node_example();
    let w = WeightFunction::exp_identity();
    let kernel = Kernel::new(&g, &w, KernelConfig::plain(t(0.25))).map_err(err)?;
    let x0 = RankVector::new(vec![1.0 / 3.0, 1.0 / 3.0 + 1e-3, 1.0 / 3.0 - 1e-3]).map_err(err)?;
    let opts = IterOptions::for_size(3);
    let expected = [0.021, 0.978, 0.001];
    let mut detail = Vec::new();
    for (name, (x, report)) in [
        ("u", kernel.iterate_u(&x0, &opts).map_err(err)?),
        ("f", kernel.iterate_f(&x0, &opts).map_err(err)?),
    ] {
        ensure(report.converged, || {
            format!(
                "{name}-iteration did not converge: {:?}",
                report.termination
            )
        })?;
        let dev = x
            .as_slice()
            .iter()
            .zip(expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(dev <= 1e-3, || {
            format!("{name}-iteration gave {:?}", x.as_slice())
        })?;
        detail.push(format!("{name}: {:.4?}", x.as_slice()));
    }
    Ok(detail.join(", "))
}

fn complete_graph_critical_temperature() -> Outcome {
    let t2 = tstar_complete(2).map_err(err)?;
    ensure((t2 - 0.5).abs() <= 1e-9, || format!("T*(2) = {t2}"))?;
    let big = tstar_complete(281_903).map_err(err)?;
    ensure((big - 0.06148).abs() <= 5e-4, || {
        format!("T*(281903) = {big}")
    })?;
    for n in [3usize, 10, 100, 10_000, 1_000_000] {
        let v = tstar_complete(n).map_err(err)?;
        let ln = (n as f64).ln();
        let lower = (1.0 - 1.0 / ln) / ((ln - 1.0) * n as f64 + 1.0).ln();
        let upper = 1.0 / ((n - 1) as f64).ln();
        ensure(lower <= v && v < upper, || {
            format!("n = {n}: {lower} <= {v} < {upper} fails")
        })?;
    }
    Ok(format!("T*(2) = {t2}, T*(281903) = {big:.6}"))
}

fn oracle_equivalence() -> Outcome {
    let w = WeightFunction::exp_identity();
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.gen_range(2..=6);
        let g = generators::random_irreducible(n, 0.4, &mut rng);
        for temp in [0.1, 1.0, 10.0] {
            let kernel = Kernel::new(&g, &w, KernelConfig::plain(t(temp))).map_err(err)?;
            let x = random_simplex(&mut rng, n);
            let (power, _) = kernel.invariant_measure(&x, 1e-14).map_err(err)?;
            let m = kernel.transition_matrix(&x).map_err(err)?;
            let trees = mtt_invariant_with(&m, MttBackend::Enumeration).map_err(err)?;
            let minors = mtt_invariant_with(&m, MttBackend::Laplacian).map_err(err)?;
            let h = h_vector(&g, &w, t(temp), &x).map_err(err)?;
            let total: f64 = h.iter().sum();
            let h = RankVector::new(h.iter().map(|v| v / total).collect()).map_err(err)?;
            for (label, other) in [
                ("enumeration", &trees),
                ("laplacian", &minors),
                ("h-vector", &h),
            ] {
                let d = power.l1_distance(other);
                worst = worst.max(d);
                ensure(d <= 1e-8, || {
                    format!("case {case}, T = {temp}: power vs {label} L1 = {d:e}")
                })?;
            }
        }
    }
    Ok(format!("600 comparisons, worst L1 {worst:.1e}"))
}

fn uniqueness_regime() -> Outcome {
    let w = WeightFunction::exp_identity();
    let mut rng = seeded(33);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let n = rng.gen_range(2..=8);
        let g = generators::random_irreducible(n, 0.4, &mut rng);
        let temp = t(n as f64 * rng.gen_range(1.0..2.0));
        let cfg = KernelConfig::plain(temp);
        let cert = certify_uniqueness(&g, &w, &cfg, None).map_err(err)?;
        ensure(cert.verdict == Verdict::UniqueByHomogeneity, || {
            format!("case {case}: {cert:?}")
        })?;
        let opts = IterOptions::for_size(n);
        let starts: Vec<RankVector> = (0..10).map(|_| random_simplex(&mut rng, n)).collect();
        let set = multistart_fixed_points(&g, &w, &cfg, &starts, &opts).map_err(err)?;
        ensure(set.len() == 1 && set.dropped == 0, || {
            format!("case {case}: {} points, {} dropped", set.len(), set.dropped)
        })?;
        let kernel = Kernel::new(&g, &w, cfg).map_err(err)?;
        let limits: Vec<RankVector> = starts
            .iter()
            .map(|s| kernel.iterate_u(s, &opts).map(|(x, _)| x))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for a in &limits {
            for b in &limits {
                worst = worst.max(a.l1_distance(b));
            }
        }
        ensure(worst < 1e-6, || {
            format!("case {case}: pairwise L1 {worst:e}")
        })?;
    }
    Ok(format!("50 instances, worst pairwise L1 {worst:.1e}"))
}

fn multiplicity_regime() -> Outcome {
    let n = 5;
    let g = generators::complete(n);
    let w = WeightFunction::exp_identity();
    let starts: Vec<RankVector> = (0..n)
        .map(|i| RankVector::concentrated(n, i, 0.9))
        .collect();
    let set = multistart_fixed_points(
        &g,
        &w,
        &KernelConfig::plain(t(0.01)),
        &starts,
        &IterOptions::for_size(n),
    )
    .map_err(err)?;
    ensure(set.len() >= 2, || {
        format!("only {} fixed point(s)", set.len())
    })?;
    for p in &set.points {
        ensure(p.max_entry() >= 0.9, || {
            format!("fixed point {:?} is not concentrated", p.as_slice())
        })?;
    }
    Ok(format!("{} distinct fixed points", set.len()))
}

fn contraction_inequalities() -> Outcome {
    let w = WeightFunction::exp_identity();
    let mut rng = seeded(66);
    let mut slack = f64::INFINITY;
    for case in 0..20 {
        let n = rng.gen_range(2..=8);
        let g = generators::random_positive(n, 0.2, 2.0, &mut rng);
        let tau = birkhoff_coefficient(&g.to_dense()).map_err(err)?;
        let temp = 2.0 / (1.0 - tau) * rng.gen_range(1.05..3.0);
        let rate = 2.0 / temp;
        ensure(rate < 1.0 - tau, || format!("case {case}: bad temperature"))?;
        let cfg = KernelConfig::plain(t(temp));
        let kernel = Kernel::new(&g, &w, cfg.clone()).map_err(err)?;
        for _ in 0..50 {
            let x = random_simplex(&mut rng, n);
            let y = random_simplex(&mut rng, n);
            let dxy = hilbert_distance(x.as_slice(), y.as_slice()).map_err(err)?;
            let fx = kernel.f_map(&x).map_err(err)?;
            let fy = kernel.f_map(&y).map_err(err)?;
            let lhs = hilbert_distance(fx.as_slice(), fy.as_slice()).map_err(err)?;
            let rhs = (tau + rate) * dxy;
            ensure(lhs <= rhs + 1e-9, || {
                format!("case {case}: d_H(f(x), f(y)) = {lhs} > {rhs}")
            })?;
            let bound = kernel_distance_bound(&g, &w, &cfg, &x, &y).map_err(err)?;
            ensure(bound <= rate * dxy + 1e-9, || {
                format!("case {case}: kernel bound {bound} > {}", rate * dxy)
            })?;
            if dxy > 0.0 {
                slack = slack.min(1.0 - lhs / rhs);
            }
        }
    }
    Ok(format!("1000 pairs, tightest relative slack {slack:.3}"))
}

fn two_by_two_structure() -> Outcome {
    let w = WeightFunction::exp_identity();
    let grid = [0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 5.0];
    let mut rng = seeded(77);
    let mut histogram = [0usize; 6];
    for case in 0..1000 {
        let mut entry = |positive: bool| {
            if !positive && rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.05..5.0)
            }
        };
        let c = [[entry(false), entry(true)], [entry(true), entry(false)]];
        for &temp in &grid {
            let count = fixed_points_2x2(c, &w, t(temp)).map_err(err)?.len();
            ensure(matches!(count, 1 | 3 | 5), || {
                format!("case {case}, C = {c:?}, T = {temp}: {count} points")
            })?;
            ensure(temp < 1.0 || count == 1, || {
                format!("case {case}, C = {c:?}, T = {temp}: {count} points")
            })?;
            histogram[count] += 1;
        }
    }
    for i in 1..=40 {
        let temp = 0.05 * i as f64;
        let count = fixed_points_2x2([[1.0, 2.0], [1.0, 0.0]], &w, t(temp))
            .map_err(err)?
            .len();
        ensure(count == 1, || {
            format!("C = [[1,2],[1,0]], T = {temp}: {count} points")
        })?;
    }
    Ok(format!(
        "counts 1/3/5: {}/{}/{}",
        histogram[1], histogram[3], histogram[5]
    ))
}

fn damped_model_properties() -> Outcome {
    let w = WeightFunction::exp_identity();
    let mut rng = seeded(88);
    // zero-column reduction
    for case in 0..20 {
        let n = rng.gen_range(3..=6);
        let base = generators::random_irreducible(n, 0.5, &mut rng);
        let mut edges: Vec<_> = base.edges().filter(|&(_, j, _)| j != n - 1).collect();
        // keep every row nonempty
        for i in 0..n {
            if !edges.iter().any(|&(s, _, _)| s == i) {
                edges.push((i, (i + 1) % (n - 1), 1.0));
            }
        }
        let g = Graph::from_edges(n, edges).map_err(err)?;
        let gamma = rng.gen_range(0.3..0.95);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let expected = (1.0 - gamma) * d[n - 1] / d.iter().sum::<f64>();
        let cfg = KernelConfig::damped(
            t(rng.gen_range(0.05..2.0)),
            Temperature::INFINITE,
            gamma,
            Personalization::Vector(d),
        );
        let kernel = Kernel::new(&g, &w, cfg).map_err(err)?;
        let (x, report) = kernel
            .iterate_f(&random_simplex(&mut rng, n), &IterOptions::for_size(n))
            .map_err(err)?;
        ensure(report.converged, || format!("case {case}: not converged"))?;
        let got = x.as_slice()[n - 1];
        ensure((got - expected).abs() <= 1e-9, || {
            format!("case {case}: x_n = {got}, expected {expected}")
        })?;
    }
    // gamma -> 1 with T1 = inf
    for case in 0..20 {
        // a uniform invariant measure is already a fixed point for every gamma
        // (uniform d), leaving nothing to decrease; such graphs are redrawn
        let (g, target) = loop {
            let n = rng.gen_range(2..=6);
            let g = generators::random_irreducible(n, 0.4, &mut rng);
            let a = Kernel::new(&g, &w, KernelConfig::plain(Temperature::INFINITE))
                .and_then(|k| k.transition_matrix(&RankVector::uniform(n)))
                .map_err(err)?;
            let target = mtt_invariant_with(&a, MttBackend::Laplacian).map_err(err)?;
            if target.l1_distance(&RankVector::uniform(n)) > 1e-6 {
                break (g, target);
            }
        };
        let n = g.n();
        let t2 = t(rng.gen_range(0.05..1.0));
        let x0 = random_simplex(&mut rng, n);
        let mut previous = f64::INFINITY;
        for gamma in [0.9, 0.99, 0.999] {
            let cfg =
                KernelConfig::damped(Temperature::INFINITE, t2, gamma, Personalization::Uniform);
            let kernel = Kernel::new(&g, &w, cfg).map_err(err)?;
            let (x, report) = kernel
                .iterate_f(&x0, &IterOptions::for_size(n))
                .map_err(err)?;
            ensure(report.converged, || {
                format!(
                    "case {case}, gamma = {gamma}: {:?} after {} steps, residual {:e}",
                    report.termination,
                    report.outer_iterations,
                    report.last_residual()
                )
            })?;
            let dist = x.l1_distance(&target);
            ensure(dist < previous, || {
                format!("case {case}, gamma = {gamma}: distance {dist} >= {previous}")
            })?;
            previous = dist;
        }
    }
    Ok("20 zero-column and 20 damping-limit instances".into())
}

fn homotopy_estimator() -> Outcome {
    let n = 10;
    let g = generators::complete(n);
    let w = WeightFunction::exp_identity();
    let tstar = tstar_complete(n).map_err(err)?;
    let schedule = GeometricSchedule::new(0.02, 1.0, 1.05).map_err(err)?;
    let est = homotopy_critical_estimate(
        &g,
        &w,
        &KernelConfig::plain(t(1.0)),
        2024,
        &schedule,
        20,
        &IterOptions::for_size(n),
    )
    .map_err(err)?;
    ensure(!est.exhausted && !est.never_distinct, || {
        format!("estimate flagged: {est:?}")
    })?;
    ensure(
        est.estimate >= 0.5 * tstar && est.estimate <= tstar + 1e-3,
        || {
            format!(
                "estimate {} outside [{}, {}]",
                est.estimate,
                0.5 * tstar,
                tstar + 1e-3
            )
        },
    )?;
    Ok(format!("estimate {:.4}, T*(10) = {tstar:.4}", est.estimate))
}

fn large_random_pipeline() -> Outcome {
    let n = 10_000;
    let mut rng = seeded(10);
    let g = generators::random(n, 10.0 / n as f64, &mut rng).normalize_dangling();
    let w = WeightFunction::exp_identity();
    let gamma = 0.85;
    let cfg = KernelConfig::damped(t(1.0), t(1.0), gamma, Personalization::Uniform);
    let classical = classical_pagerank(&g, gamma, &Personalization::Uniform, 1e-12).map_err(err)?;
    let opts = sweep_options(n);

    let down = GeometricSchedule::new(0.033, 0.009, 1.1)
        .map_err(err)?
        .temperatures();
    let cooling = temperature_sweep(&g, &w, &cfg, &down, &classical, &opts).map_err(err)?;
    let up = GeometricSchedule::new(0.015, 0.1, 1.1)
        .map_err(err)?
        .temperatures();
    let heating = temperature_sweep(
        &g,
        &w,
        &cfg,
        &up,
        &RankVector::vertex(n, classical.argmax()),
        &opts,
    )
    .map_err(err)?;

    let mut csv = Vec::new();
    cooling
        .write_csv(&mut csv, &["cooling".into()], Some(5))
        .map_err(err)?;
    heating
        .write_csv(&mut csv, &["heating".into()], None)
        .map_err(err)?;
    for rank in cooling
        .ranks
        .iter()
        .chain(&heating.ranks)
        .chain(std::iter::once(&classical))
    {
        let cdf = rank_cdf(rank.as_slice(), 50).map_err(err)?;
        ensure(
            cdf.windows(2).all(|p| p[1].fraction <= p[0].fraction),
            || "CDF not monotone".into(),
        )?;
        top_k(rank.as_slice(), 5).map_err(err)?;
    }

    // random simplex starts on 1e4 nodes stay on the near-uniform branch, so
    // the round pairs the classical ranking with a mass on the top vertex
    let top = classical.argmax();
    let starts = vec![(top as u64, classical.clone(), RankVector::vertex(n, top))];
    let schedule = GeometricSchedule::new(0.005, 0.2, 1.1).map_err(err)?;
    let est = homotopy_from_starts(&g, &w, &cfg, starts, &schedule, &IterOptions::for_size(n))
        .map_err(err)?;
    let bound = tstar_complete(n).map_err(err)?;
    ensure(!est.exhausted, || {
        format!("homotopy schedule exhausted: {est:?}")
    })?;
    ensure(!est.never_distinct, || {
        format!("homotopy never saw distinct limits: {est:?}")
    })?;
    ensure(est.estimate > 0.0 && est.estimate < bound, || {
        format!("estimate {} vs T*(n) = {bound}", est.estimate)
    })?;
    let converged = cooling
        .converged
        .iter()
        .chain(&heating.converged)
        .filter(|&&c| c)
        .count();
    Ok(format!(
        "{} sweep points ({converged} converged), homotopy estimate {:.4} < T*(1e4) = {bound:.4}",
        down.len() + up.len(),
        est.estimate
    ))
}

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let criteria: [(u32, &str, u64, fn() -> Outcome); 10] = [
        (1, "self-validation example", 1, self_validation_example),
        (
            2,
            "complete-graph critical temperature",
            1,
            complete_graph_critical_temperature,
        ),
        (3, "oracle equivalence", 30, oracle_equivalence),
        (4, "uniqueness regime", 60, uniqueness_regime),
        (5, "multiplicity regime", 30, multiplicity_regime),
        (6, "contraction inequalities", 30, contraction_inequalities),
        (7, "2x2 structure", 60, two_by_two_structure),
        (8, "damped-model properties", 30, damped_model_properties),
        (9, "homotopy estimator", 120, homotopy_estimator),
        (
            10,
            "large random-graph pipeline",
            600,
            large_random_pipeline,
        ),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        if !filters.is_empty()
            && !filters
                .iter()
                .any(|f| name.contains(f.as_str()) || *f == id.to_string())
        {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(limit);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over time budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{status}] {name} ({:.2}s / {limit}s): {detail}",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
