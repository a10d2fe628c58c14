mod common;

use std::time::Duration;

use common::*;
use nnfalsify_core::racos::{select_positive, shrink_box, Sample};
use nnfalsify_core::{
    analyze_spec, falsify, parse_property, sample_uniform, Direction, FalsifierConfig,
    OptimizerParams, SafetyProperty, Verdict,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn widths() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..6, 2..5)
}

fn sample(input: Vec<f64>, objective: f64) -> Sample {
    Sample {
        input,
        output: vec![objective],
        objective,
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(256)
    })]

    #[test]
    fn forward_matches_layer_composition(seed in any::<u64>(), w in widths()) {
        let mut r = rng(seed);
        let net = random_network(&mut r, &w);
        let x: Vec<f64> = (0..w[0]).map(|_| r.gen_range(-5.0..5.0)).collect();
        let y = net.forward(&x).unwrap();
        let want = reference_forward(&net, &x);
        prop_assert_eq!(y.len(), *w.last().unwrap());
        for (a, b) in y.iter().zip(&want) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(net.forward(&x).unwrap(), y);
    }

    #[test]
    fn relu_net_without_bias_is_positively_homogeneous(
        seed in any::<u64>(),
        w in widths(),
        alpha in 0.01f64..10.0,
    ) {
        let mut r = rng(seed);
        let mut layers = Vec::new();
        for (k, pair) in w.windows(2).enumerate() {
            let rows = (0..pair[1])
                .map(|_| (0..pair[0]).map(|_| r.gen_range(-2.0..2.0)).collect())
                .collect();
            let act = if k + 2 == w.len() {
                nnfalsify_core::Activation::Linear
            } else {
                nnfalsify_core::Activation::Relu
            };
            layers.push(nnfalsify_core::Layer::new(rows, vec![0.0; pair[1]], act).unwrap());
        }
        let net = nnfalsify_core::Network::new(layers).unwrap();
        let x: Vec<f64> = (0..w[0]).map(|_| r.gen_range(-5.0..5.0)).collect();
        let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
        let a = net.forward(&scaled).unwrap();
        let b = net.forward(&x).unwrap();
        for (u, v) in a.iter().zip(&b) {
            let want = alpha * v;
            prop_assert!((u - want).abs() <= 1e-9 * (1.0 + want.abs()), "{u} vs {want}");
        }
    }

    #[test]
    fn samples_stay_in_box(seed in any::<u64>(), dim in 1usize..8) {
        let mut r = rng(seed);
        let b = random_box(&mut r, dim);
        for _ in 0..50 {
            let x = sample_uniform(&b, &mut r).unwrap();
            prop_assert!(b.contains(&x));
        }
    }

    #[test]
    fn predicate_print_parse_round_trip(seed in any::<u64>(), outputs in 1usize..6, depth in 0usize..5) {
        let mut r = rng(seed);
        let p = random_predicate(&mut r, outputs, depth);
        let text = format!("x1 in [0, 1]\npredicate: {p}\n");
        let back = parse_property(&text).unwrap();
        prop_assert_eq!(&back.predicate, &p);
        for _ in 0..20 {
            let y: Vec<f64> = (0..outputs).map(|_| r.gen_range(-3.0..3.0)).collect();
            prop_assert_eq!(p.eval(&y).unwrap(), reference_eval(&p, &y));
        }
    }

    #[test]
    fn property_text_round_trip(seed in any::<u64>(), dim in 1usize..6, outputs in 1usize..5) {
        let mut r = rng(seed);
        let prop = SafetyProperty::new("roundtrip", random_box(&mut r, dim), random_predicate(&mut r, outputs, 3));
        let back = parse_property(&prop.to_text()).unwrap();
        prop_assert_eq!(back.domain, prop.domain);
        prop_assert_eq!(back.predicate, prop.predicate);
    }

    #[test]
    fn shrink_contains_and_keeps_anchor(seed in any::<u64>(), dim in 1usize..6, k in 1usize..4, n_neg in 0usize..40) {
        let mut r = rng(seed);
        let b = random_box(&mut r, dim);
        let pos: Vec<Sample> = (0..k).map(|_| sample(point_in(&mut r, &b), 0.0)).collect();
        let neg: Vec<Sample> = (0..n_neg).map(|_| sample(point_in(&mut r, &b), 0.0)).collect();
        let out = shrink_box(&b, &pos, &neg, &mut r);
        prop_assert!(out.is_subset_of(&b));
        prop_assert!(pos.iter().any(|p| out.contains(&p.input)));
        if k == 1 {
            prop_assert!(out.contains(&pos[0].input));
        }
    }

    #[test]
    fn shrink_contains_even_with_outside_points(seed in any::<u64>(), dim in 1usize..5) {
        let mut r = rng(seed);
        let b = random_box(&mut r, dim);
        let wide = |r: &mut ChaCha8Rng| (0..dim).map(|_| r.gen_range(-5.0..5.0)).collect::<Vec<_>>();
        let pos = vec![sample(wide(&mut r), 0.0)];
        let neg: Vec<Sample> = (0..20).map(|_| sample(wide(&mut r), 0.0)).collect();
        let out = shrink_box(&b, &pos, &neg, &mut r);
        prop_assert!(out.is_subset_of(&b));
    }

    #[test]
    fn select_positive_partitions(
        values in prop::collection::vec(-5i32..5, 2..40),
        k in 1usize..5,
        maximize in any::<bool>(),
    ) {
        prop_assume!(k < values.len());
        let dir = if maximize { Direction::Maximize } else { Direction::Minimize };
        let samples: Vec<Sample> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| sample(vec![i as f64], v as f64))
            .collect();
        let (pos, neg) = select_positive(samples, dir, k).unwrap();
        prop_assert_eq!(pos.len(), k);
        prop_assert_eq!(pos.len() + neg.len(), values.len());
        let mut ids: Vec<usize> = pos.iter().chain(&neg).map(|s| s.input[0] as usize).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..values.len()).collect::<Vec<_>>());
        for p in &pos {
            for n in &neg {
                prop_assert!(!dir.better(n.objective, p.objective));
            }
        }
        prop_assert!(neg.windows(2).all(|w| w[0].input[0] < w[1].input[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(48)
    })]

    #[test]
    fn falsify_is_sound_and_deterministic(seed in any::<u64>(), n_in in 1usize..4, n_out in 1usize..4) {
        let mut r = rng(seed);
        let mut widths = vec![n_in];
        widths.extend((0..r.gen_range(0..3)).map(|_| r.gen_range(2..6)));
        widths.push(n_out);
        let net = random_network(&mut r, &widths);
        let prop = SafetyProperty::new("random", random_box(&mut r, n_in), random_predicate(&mut r, n_out, 2));
        let plan = analyze_spec(&prop.predicate);
        let cfg = FalsifierConfig {
            timeout: Duration::from_secs(30),
            params: OptimizerParams::with_multiplier(n_in, 10),
            base_seed: seed,
            max_restarts: Some(2),
            theta_terminates: false,
        };
        let a = falsify(&net, &prop, &plan, &cfg).unwrap();
        let b = falsify(&net, &prop, &plan, &cfg).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(&a.counterexample, &b.counterexample);
        prop_assert_eq!(a.stats.total_samples, b.stats.total_samples);
        prop_assert_eq!(a.stats.iterations, b.stats.iterations);
        prop_assert_eq!(a.stats.restarts, b.stats.restarts);
        if a.verdict == Verdict::Falsified {
            let c = a.counterexample.unwrap();
            prop_assert!(reference_violates(&net, &prop, &c.input));
            prop_assert!(a.stats.total_samples >= 1);
        } else {
            prop_assert!(a.counterexample.is_none());
        }
    }
}
