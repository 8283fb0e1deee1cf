//! Property suite for the network IR combinators, serialization, and the
//! Chebyshev coefficient/Clenshaw oracle pair.
//!
//! The combinators promise *exact* algebra — composing, merging, or affinely
//! rewiring networks must not perturb results at all. Floating point lets us
//! check that claim bitwise on dyadic data: when every weight, bias, and
//! input coordinate is a small multiple of 1/4, all intermediate values of
//! these small graphs stay exactly representable (well under 53 mantissa
//! bits), so every arithmetic reassociation a combinator performs is exact
//! and any deviation is a real wiring bug.

use proptest::prelude::*;
use proptest::sample::Index;
use std::ops::RangeInclusive;

use relunet::chebyshev::{build_cheb_series, cheb_coeffs, clenshaw_eval, ChebSeries};
use relunet::graph::{Layer, OutputSpec, Unit};
use relunet::{compose, linear_combine, parallel, precompose_affine, NetworkGraph, SourceRef};

/// An affine node whose sources are resolved against whatever pool of
/// inputs and earlier units exists when the plan is realized.
#[derive(Debug, Clone)]
struct AffinePlan {
    terms: Vec<(Index, f64)>,
    bias: f64,
}

/// A randomized small network: up to 3 hidden layers of up to 3 units.
#[derive(Debug, Clone)]
struct GraphPlan {
    input_dim: usize,
    layers: Vec<Vec<AffinePlan>>,
    outputs: Vec<AffinePlan>,
}

fn source_for(index: &Index, input_dim: usize, layer_sizes: &[usize]) -> SourceRef {
    let pool = input_dim + layer_sizes.iter().sum::<usize>();
    let flat = index.index(pool);
    if flat < input_dim {
        return SourceRef::Input(flat as u32);
    }
    let mut rest = flat - input_dim;
    for (layer, &size) in layer_sizes.iter().enumerate() {
        if rest < size {
            return SourceRef::Unit { layer: layer as u32, unit: rest as u32 };
        }
        rest -= size;
    }
    unreachable!("index resolves inside the source pool");
}

fn realize(plan: &GraphPlan, keep_biases: bool) -> NetworkGraph {
    let bias_of = |b: f64| if keep_biases { b } else { 0.0 };
    let mut layer_sizes: Vec<usize> = Vec::new();
    let mut layers = Vec::new();
    for layer_plan in &plan.layers {
        let units = layer_plan
            .iter()
            .map(|u| Unit {
                weights: u
                    .terms
                    .iter()
                    .map(|(ix, c)| (source_for(ix, plan.input_dim, &layer_sizes), *c))
                    .collect(),
                bias: bias_of(u.bias),
            })
            .collect();
        layers.push(Layer { units });
        layer_sizes.push(layer_plan.len());
    }
    let outputs = plan
        .outputs
        .iter()
        .map(|o| OutputSpec {
            weights: o
                .terms
                .iter()
                .map(|(ix, c)| (source_for(ix, plan.input_dim, &layer_sizes), *c))
                .collect(),
            bias: bias_of(o.bias),
        })
        .collect();
    NetworkGraph::new(plan.input_dim, layers, outputs).expect("plans realize to valid networks")
}

/// Multiples of 1/4 in [-2, 2]: every product and partial sum that can arise
/// in these graphs stays exactly representable.
fn dyadic() -> impl Strategy<Value = f64> + Clone {
    (-8i32..=8).prop_map(|k| f64::from(k) / 4.0)
}

fn affine_plan(
    coeff: impl Strategy<Value = f64> + Clone,
) -> impl Strategy<Value = AffinePlan> {
    (prop::collection::vec((any::<Index>(), coeff.clone()), 1..=3), coeff)
        .prop_map(|(terms, bias)| AffinePlan { terms, bias })
}

fn graph_plan(
    input_dim: impl Strategy<Value = usize>,
    outputs: RangeInclusive<usize>,
    coeff: impl Strategy<Value = f64> + Clone,
) -> impl Strategy<Value = GraphPlan> {
    (
        input_dim,
        prop::collection::vec(prop::collection::vec(affine_plan(coeff.clone()), 1..=3), 1..=3),
        prop::collection::vec(affine_plan(coeff), outputs),
    )
        .prop_map(|(input_dim, layers, outputs)| GraphPlan { input_dim, layers, outputs })
}

/// Deterministic dyadic probe points covering mixed signs in [-2, 2]^dim.
fn probes(dim: usize) -> Vec<Vec<f64>> {
    (0..5)
        .map(|k| (0..dim).map(|j| ((7 * k + 3 * j) % 17) as f64 / 4.0 - 2.0).collect())
        .collect()
}

proptest! {
    #[test]
    fn composition_adds_depth_and_size_and_equals_nested_evaluation(
        (outer_plan, inner_plan) in graph_plan(1usize..=3, 1..=3, dyadic())
            .prop_flat_map(|inner| {
                let arity = inner.outputs.len();
                (graph_plan(Just(arity), 1..=2, dyadic()), Just(inner))
            })
    ) {
        let inner = realize(&inner_plan, true);
        let outer = realize(&outer_plan, true);
        let composed = compose(&outer, &inner).unwrap();
        prop_assert_eq!(composed.depth(), outer.depth() + inner.depth());
        prop_assert_eq!(composed.size(), outer.size() + inner.size());
        prop_assert_eq!(composed.input_dim(), inner.input_dim());
        prop_assert_eq!(composed.output_arity(), outer.output_arity());
        for x in probes(inner.input_dim()) {
            let nested = outer.evaluate(&inner.evaluate(&x).unwrap()).unwrap();
            let direct = composed.evaluate(&x).unwrap();
            prop_assert_eq!(direct, nested);
        }
    }

    #[test]
    fn parallel_merge_takes_max_depth_sums_size_and_concatenates_outputs(
        plans in (1usize..=3).prop_flat_map(|dim| {
            prop::collection::vec(graph_plan(Just(dim), 1..=2, dyadic()), 1..=3)
        })
    ) {
        let nets: Vec<NetworkGraph> = plans.iter().map(|p| realize(p, true)).collect();
        let merged = parallel(&nets).unwrap();
        prop_assert_eq!(merged.depth(), nets.iter().map(NetworkGraph::depth).max().unwrap());
        prop_assert_eq!(merged.size(), nets.iter().map(NetworkGraph::size).sum::<usize>());
        for x in probes(nets[0].input_dim()) {
            let got = merged.evaluate(&x).unwrap();
            let want: Vec<f64> =
                nets.iter().flat_map(|n| n.evaluate(&x).unwrap()).collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn linear_combination_is_the_exact_affine_functional_of_constituents(
        (plans, coeffs, bias) in (1usize..=3).prop_flat_map(|dim| {
            prop::collection::vec(graph_plan(Just(dim), 1..=1, dyadic()), 1..=3)
                .prop_flat_map(|plans| {
                    let k = plans.len();
                    (Just(plans), prop::collection::vec(dyadic(), k), dyadic())
                })
        })
    ) {
        let nets: Vec<NetworkGraph> = plans.iter().map(|p| realize(p, true)).collect();
        let combined = linear_combine(&nets, &coeffs, bias).unwrap();
        prop_assert_eq!(combined.output_arity(), 1);
        prop_assert_eq!(combined.size(), nets.iter().map(NetworkGraph::size).sum::<usize>());
        prop_assert_eq!(combined.depth(), nets.iter().map(NetworkGraph::depth).max().unwrap());
        for x in probes(nets[0].input_dim()) {
            let mut want = bias;
            for (net, &c) in nets.iter().zip(&coeffs) {
                want += c * net.evaluate_scalar(&x).unwrap();
            }
            prop_assert_eq!(combined.evaluate_scalar(&x).unwrap(), want);
        }
    }

    #[test]
    fn affine_precomposition_keeps_resources_and_matches_substitution(
        (plan, a, b, new_dim) in (1usize..=2, 1usize..=2).prop_flat_map(|(old, new)| {
            (
                graph_plan(Just(old), 1..=2, dyadic()),
                prop::collection::vec(prop::collection::vec(dyadic(), new), old),
                prop::collection::vec(dyadic(), old),
                Just(new),
            )
        })
    ) {
        let net = realize(&plan, true);
        let mapped = precompose_affine(&net, &a, &b).unwrap();
        prop_assert_eq!(mapped.depth(), net.depth());
        prop_assert_eq!(mapped.size(), net.size());
        prop_assert_eq!(mapped.input_dim(), new_dim);
        for x in probes(new_dim) {
            let y: Vec<f64> = a
                .iter()
                .zip(&b)
                .map(|(row, &bi)| {
                    row.iter().zip(&x).map(|(&aij, &xj)| aij * xj).sum::<f64>() + bi
                })
                .collect();
            prop_assert_eq!(mapped.evaluate(&x).unwrap(), net.evaluate(&y).unwrap());
        }
    }

    /// Bias-free rectifier graphs are positively homogeneous, and scaling by
    /// a power of two commutes exactly with every float operation — so this
    /// holds bitwise even with arbitrary (non-dyadic) weights.
    #[test]
    fn bias_free_networks_scale_positively_homogeneously(
        plan in graph_plan(1usize..=3, 1..=2, -2.0f64..2.0),
        lam_exp in -2i32..=2,
    ) {
        let net = realize(&plan, false);
        let lam = f64::exp2(f64::from(lam_exp));
        for x in probes(net.input_dim()) {
            let base = net.evaluate(&x).unwrap();
            let scaled_x: Vec<f64> = x.iter().map(|&v| lam * v).collect();
            let scaled = net.evaluate(&scaled_x).unwrap();
            for (s, b) in scaled.iter().zip(&base) {
                prop_assert_eq!(*s, lam * b);
            }
        }
    }

    #[test]
    fn serialization_round_trips_networks_bitwise(
        plan in graph_plan(
            1usize..=3,
            1..=2,
            prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        )
    ) {
        let net = realize(&plan, true);
        let text = net.to_json_string().unwrap();
        let back = NetworkGraph::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.to_json_string().unwrap(), text);
    }

    /// Interpolation coefficients fed back through Clenshaw reproduce any
    /// polynomial of degree ≤ n essentially exactly.
    #[test]
    fn interpolation_then_clenshaw_reproduces_polynomials(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..=13),
        extra in 0usize..=4,
        scale_choice in 0usize..=1,
    ) {
        let scale = [1.0, 2.0][scale_choice];
        // p(x) = Σ aₖ (x/scale)^k keeps |p| ≤ 13 on the interval, so the
        // 1e-12 tolerance is pure rounding headroom, not approximation.
        let p = |x: f64| {
            let t = x / scale;
            coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
        };
        let n = (coeffs.len() - 1).max(1) + extra;
        let series = cheb_coeffs(p, n, scale).unwrap();
        for i in 0..=32 {
            let x = scale * (f64::from(i) / 16.0 - 1.0);
            let got = clenshaw_eval(&series, x).unwrap();
            prop_assert!(
                (got - p(x)).abs() <= 1e-12,
                "x = {}: clenshaw gave {}, direct evaluation {}",
                x, got, p(x)
            );
        }
    }
}

proptest! {
    // Building a network per case is comparatively expensive; a dozen random
    // series exercise the budget arithmetic without dominating the suite.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_networks_stay_within_budget_of_clenshaw(
        coeffs in prop::collection::vec(-1.0f64..1.0, 3..=8),
    ) {
        let eps = 1e-2;
        let series = ChebSeries::new(coeffs, 1.0).unwrap();
        let net = build_cheb_series(&series, eps).unwrap();
        for i in 0..=200 {
            let x = f64::from(i) / 100.0 - 1.0;
            let want = clenshaw_eval(&series, x).unwrap();
            let got = net.evaluate_scalar(&[x]).unwrap();
            prop_assert!(
                (got - want).abs() <= eps,
                "x = {}: network {} vs series {}",
                x, got, want
            );
        }
    }
}
