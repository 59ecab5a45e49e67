use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use retne_core::cluster::kmeans;
use retne_core::environments::{GateEnv, Gate, RastriginEnv};
use retne_core::evolution::{best_of_cluster, cluster_correlation, ret_pair_traced, PairRule};
use retne_core::stats::{pearson, OnlineCovariance};
use retne_core::variation::{GOLDEN_MAJOR, GOLDEN_MINOR};
use retne_core::*;

fn matrix_strategy(m: usize) -> impl Strategy<Value = FeatureMatrix> {
    let cfg = GenomeConfig::for_arity(2, 1, m - 3, Activation::Sigmoid);
    any::<u64>().prop_map(move |seed| {
        random_feature_matrix(&cfg, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

fn oracle_pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if xs.len() < 3 || sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_a_metric(a in matrix_strategy(6), b in matrix_strategy(6), c in matrix_strategy(6)) {
        let ab = distance(&a, &b).unwrap();
        let ba = distance(&b, &a).unwrap();
        let bc = distance(&b, &c).unwrap();
        let ac = distance(&a, &c).unwrap();
        prop_assert_eq!(distance(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!(ac <= ab + bc + 1e-9);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn combiners_stay_in_the_convex_hull(a in matrix_strategy(6), b in matrix_strategy(6)) {
        let cfg = GenomeConfig::for_arity(2, 1, 3, Activation::Sigmoid);
        let mid = binary_combine(&a, &b, &cfg).unwrap();
        let gold = golden_combine(&a, &b, &cfg).unwrap();
        prop_assert!((GOLDEN_MAJOR + GOLDEN_MINOR - 1.0).abs() <= 1e-12);
        for ((&x, &y), (&u, &v)) in a.as_slice().iter().zip(b.as_slice())
            .zip(mid.matrix().as_slice().iter().zip(gold.matrix().as_slice()))
        {
            let (lo, hi) = (x.min(y), x.max(y));
            prop_assert!(lo - 1e-12 <= u && u <= hi + 1e-12);
            prop_assert!(lo - 1e-12 <= v && v <= hi + 1e-12);
            prop_assert!((u - (0.5 * x + 0.5 * y)).abs() <= 1e-12);
            prop_assert!((v - (GOLDEN_MAJOR * x + GOLDEN_MINOR * y)).abs() <= 1e-12);
        }
        let d = distance(&a, &b).unwrap();
        prop_assert!((distance(&a, mid.matrix()).unwrap() - 0.5 * d).abs() <= 1e-9);
        prop_assert!((distance(&a, gold.matrix()).unwrap() - GOLDEN_MINOR * d).abs() <= 1e-9);
        prop_assert!((distance(gold.matrix(), &b).unwrap() - GOLDEN_MAJOR * d).abs() <= 1e-9);
    }

    #[test]
    fn pearson_matches_two_pass_oracle(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 0..40)
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let expected = oracle_pearson(&xs, &ys);
        let direct = pearson(&xs, &ys);
        let mut acc = OnlineCovariance::default();
        for (&x, &y) in xs.iter().zip(&ys) {
            acc.push(x, y);
        }
        let online = acc.correlation(3);
        match expected {
            None => {
                prop_assert!(direct.is_none());
                prop_assert!(online.is_none());
            }
            Some(r) => {
                prop_assert!((direct.unwrap() - r).abs() <= 1e-9);
                prop_assert!((online.unwrap() - r).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn kmeans_assignment_is_nearest_center(
        pts in prop::collection::vec(prop::collection::vec(-10f64..10.0, 3), 20),
        k in 1usize..8,
        seed in any::<u64>(),
    ) {
        let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
        let c = kmeans(&refs, k, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(c.assignment.len(), 20);
        prop_assert_eq!(c.centers.len(), k);
        let sq = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        for (i, p) in pts.iter().enumerate() {
            let best = c.centers.iter().map(|ctr| sq(p, ctr)).fold(f64::INFINITY, f64::min);
            prop_assert!(sq(p, &c.centers[c.assignment[i]]) <= best + 1e-12);
        }
        for cluster in 0..k {
            let members = c.members(cluster);
            prop_assert!(!members.is_empty());
            for d in 0..3 {
                let mean = members.iter().map(|&i| pts[i][d]).sum::<f64>() / members.len() as f64;
                prop_assert!((c.centers[cluster][d] - mean).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn best_of_cluster_is_the_argmax(
        fits in prop::collection::vec(prop::sample::select(vec![-1.0, 0.0, 0.5, 1.0, 2.0]), 1..15),
        seed in any::<u64>(),
    ) {
        let cfg = GenomeConfig::position(2, Interval::new(-1.0, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let individuals: Vec<Individual> = fits
            .iter()
            .map(|&r| create(random_feature_matrix(&cfg, &mut rng), &cfg).unwrap().with_fitness(r))
            .collect();
        let pop = Population { individuals, generation: 0 };
        let members: Vec<usize> = (0..fits.len()).collect();
        let view = ClusterView { members, center: FeatureMatrix::zeros(2), best: None, rho: None };
        let got = best_of_cluster(&view, &pop).unwrap();
        let max = fits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expected = fits.iter().position(|&r| r == max).unwrap();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn cluster_correlation_matches_oracle(seed in any::<u64>(), n in 1usize..12) {
        let cfg = GenomeConfig::position(2, Interval::new(-5.0, 5.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let individuals: Vec<Individual> = (0..n)
            .map(|_| {
                let ind = create(random_feature_matrix(&cfg, &mut rng), &cfg).unwrap();
                let r = -retne_core::environments::rastrigin(&[ind.matrix().bias(0), ind.matrix().bias(1)]);
                ind.with_fitness(r)
            })
            .collect();
        let pop = Population { individuals, generation: 0 };
        let view = ClusterView { members: (0..n).collect(), center: FeatureMatrix::zeros(2), best: None, rho: None };
        let best = best_of_cluster(&view, &pop).unwrap();
        let ds: Vec<f64> = (0..n)
            .map(|i| distance(pop.individuals[best].matrix(), pop.individuals[i].matrix()).unwrap())
            .collect();
        let rs: Vec<f64> = (0..n).map(|i| pop.fitness(i).unwrap()).collect();
        let got = cluster_correlation(&view, &pop).unwrap();
        match oracle_pearson(&ds, &rs) {
            None => prop_assert!(got.is_none()),
            Some(r) => prop_assert!((got.unwrap() - r).abs() <= 1e-9),
        }
    }
}

#[test]
fn golden_constants() {
    assert!((GOLDEN_MAJOR - (5f64.sqrt() - 1.0) / 2.0).abs() <= 1e-12);
    assert!((GOLDEN_MINOR - (3.0 - 5f64.sqrt()) / 2.0).abs() <= 1e-12);
}

/// Two one-member clusters at distinct points, with the given fitnesses and
/// correlations, evaluated under a mutation that changes nothing.
fn pair_fixture(
    fit_a: f64,
    fit_b: f64,
) -> (Population, ClusterView, ClusterView, GenomeConfig) {
    let cfg = GenomeConfig::position(2, Interval::new(-5.0, 5.0));
    let a = FeatureMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]).unwrap();
    let b = FeatureMatrix::from_rows(&[vec![-3.0, 0.0, 0.0], vec![4.0, 0.0, 0.0]]).unwrap();
    let pop = Population {
        individuals: vec![
            create(a.clone(), &cfg).unwrap().with_fitness(fit_a),
            create(b.clone(), &cfg).unwrap().with_fitness(fit_b),
        ],
        generation: 0,
    };
    let ca = ClusterView { members: vec![0], center: a, best: Some(0), rho: None };
    let cb = ClusterView { members: vec![1], center: b, best: Some(1), rho: None };
    (pop, ca, cb, cfg)
}

#[test]
fn pair_rule_is_total_over_correlation_regions() {
    // explored (<= -0.5), undefined (counts as explored), unexplored
    let regions = [Some(-0.9), Some(-0.5), None, Some(-0.2), Some(0.7)];
    let explored = |r: Option<f64>| r.is_none_or(|x| x <= -0.5);
    let mcfg = MutationConfig::null();
    for method in Method::ALL {
        for &ra in &regions {
            for &rb in &regions {
                for (fa, fb) in [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
                    let (pop, mut ca, mut cb, cfg) = pair_fixture(fa, fb);
                    ca.rho = ra;
                    cb.rho = rb;
                    let ecfg = EvolutionConfig { method, ..Default::default() };
                    let mut rng = ChaCha8Rng::seed_from_u64(0);
                    let ((first, second), rule) =
                        ret_pair_traced(&ca, &cb, &pop, &ecfg, &mcfg, &cfg, &mut rng).unwrap();

                    // relabel: the fitter cluster plays A, ties keep order
                    let (hi, lo, rho_hi, rho_lo) = if fb > fa {
                        (&cb, &ca, rb, ra)
                    } else {
                        (&ca, &cb, ra, rb)
                    };
                    let hi_m = pop.individuals[hi.best.unwrap()].matrix();
                    let lo_m = pop.individuals[lo.best.unwrap()].matrix();
                    let ctx = format!("{method} rho {ra:?}/{rb:?} fit {fa}/{fb}");
                    if !method.uses_ret() {
                        assert_eq!(rule, PairRule::Baseline, "{ctx}");
                        assert_eq!((first.matrix(), second.matrix()), (hi_m, lo_m), "{ctx}");
                        continue;
                    }
                    match (explored(rho_hi), explored(rho_lo)) {
                        (true, true) => {
                            assert_eq!(rule, PairRule::Global, "{ctx}");
                            assert_eq!(first.matrix(), hi_m, "{ctx}");
                            assert_eq!(second.origin(), Origin::Global, "{ctx}");
                            let (wa, wb) = if method == Method::GsNeat {
                                (GOLDEN_MAJOR, GOLDEN_MINOR)
                            } else {
                                (0.5, 0.5)
                            };
                            for ((&c, &x), &y) in second.matrix().as_slice().iter()
                                .zip(hi.center.as_slice()).zip(lo.center.as_slice())
                            {
                                assert!((c - (wa * x + wb * y)).abs() < 1e-12, "{ctx}");
                            }
                        }
                        (false, true) => {
                            assert_eq!(rule, PairRule::DoubleNear, "{ctx}");
                            assert_eq!((first.matrix(), second.matrix()), (hi_m, hi_m), "{ctx}");
                        }
                        (_, false) => {
                            assert_eq!(rule, PairRule::Near, "{ctx}");
                            assert_eq!((first.matrix(), second.matrix()), (hi_m, lo_m), "{ctx}");
                        }
                    }
                    assert!(!first.is_evaluated() && !second.is_evaluated());
                }
            }
        }
    }
}

#[test]
fn best_fitness_never_decreases() {
    let gate = GateEnv::new(Gate::Xor);
    let rast = RastriginEnv { dim: 2 };
    for method in Method::ALL {
        for seed in 0..3 {
            let ecfg = EvolutionConfig {
                method,
                max_generations: 50,
                fitness_threshold: f64::INFINITY,
                ..Default::default()
            };
            let mut prev = f64::NEG_INFINITY;
            run_evolution_observed(&gate, &ecfg, &MutationConfig::default(), &GenomeConfig::default(), seed, |v| {
                let best = v.population.individuals[v.population.best_index().unwrap()].fitness().unwrap();
                assert!(best >= prev, "{method} seed {seed}: {best} < {prev}");
                prev = best;
            })
            .unwrap();

            let ecfg = EvolutionConfig {
                population_size: 5,
                initial_distance: 1.0,
                minimum_distance: 1e-3,
                ..ecfg
            };
            let gcfg = GenomeConfig::position(2, Interval::new(-5.12, 5.12));
            let mut prev = f64::NEG_INFINITY;
            run_evolution_observed(&rast, &ecfg, &MutationConfig::default(), &gcfg, seed, |v| {
                let best = v.population.individuals[v.population.best_index().unwrap()].fitness().unwrap();
                assert!(best >= prev, "{method} seed {seed}: {best} < {prev}");
                prev = best;
            })
            .unwrap();
        }
    }
}

#[test]
fn generations_respect_minimum_distance() {
    let env = GateEnv::new(Gate::Xor);
    for method in Method::ALL {
        let ecfg = EvolutionConfig {
            method,
            population_size: 4,
            minimum_distance: 2.0,
            max_generations: 15,
            ..Default::default()
        };
        let mut checked = 0;
        run_evolution_observed(&env, &ecfg, &MutationConfig::default(), &GenomeConfig::default(), 7, |v| {
            let inds = &v.population.individuals;
            let floor = if v.population.generation == 0 { ecfg.initial_distance } else { ecfg.minimum_distance };
            for i in 0..inds.len() {
                for j in i + 1..inds.len() {
                    let d = distance(inds[i].matrix(), inds[j].matrix()).unwrap();
                    assert!(d >= floor, "{method} gen {}: d({i},{j}) = {d}", v.population.generation);
                }
            }
            assert!(inds.len() <= 4 * 4);
            checked += 1;
        })
        .unwrap();
        assert!(checked > 0);
    }
}

#[test]
fn runs_are_reproducible() {
    let env = GateEnv::new(Gate::Nand);
    let ecfg = EvolutionConfig { max_generations: 30, ..Default::default() };
    let run = |seed| {
        let out = run_evolution(&env, &ecfg, &MutationConfig::default(), &GenomeConfig::default(), seed).unwrap();
        (out.solved, out.end_generation, out.best_fitness.to_bits(), out.best.matrix().clone())
    };
    assert_eq!(run(11), run(11));
    assert_ne!(run(11).3, run(12).3);
}
