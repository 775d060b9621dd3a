//! Randomized invariants for the interpolation and chain layers: fitted
//! polynomials reproduce their data and ignore input order, shears and chains
//! invert exactly, symplectic shears stay symplectic under composition, the
//! finite-difference Jacobian agrees with the analytic one on gentle chains,
//! and closed-form flows satisfy the one-parameter group law.

use proptest::prelude::*;
use tameforge::chain::{
    check_symplectic, round_trip_residual, symplectic_defect, symplectic_defect_dd,
};
use tameforge::numerics::{jacobian, rng_from_seed, sample_polydisc, sup_dist, sup_norm};
use tameforge::{
    AutoChain, Cx, FlowPrimitive, Generator, Interpolant, SampleRegion, ShearPrimitive,
    ToleranceConfig,
};

fn cx_box(s: f64) -> impl Strategy<Value = Cx> {
    (-s..s, -s..s).prop_map(|(re, im)| Cx::new(re, im))
}

/// Nodes drawn from distinct cells of a 5×5 grid (spacing 0.9, jitter ≤ 0.2
/// per component), so pairwise gaps stay ≥ 0.3 and divided differences are
/// well conditioned for every draw.
fn separated_nodes(max: usize) -> impl Strategy<Value = Vec<Cx>> {
    (2..=max).prop_flat_map(|k| {
        (
            prop::sample::subsequence((0..25usize).collect::<Vec<_>>(), k),
            prop::collection::vec((-0.2..0.2f64, -0.2..0.2f64), k),
        )
            .prop_map(|(cells, jitter)| {
                cells
                    .into_iter()
                    .zip(jitter)
                    .map(|(c, (jx, jy))| {
                        Cx::new(
                            -1.8 + 0.9 * (c % 5) as f64 + jx,
                            -1.8 + 0.9 * (c / 5) as f64 + jy,
                        )
                    })
                    .collect()
            })
    })
}

fn fit_data(max_nodes: usize, vmax: f64) -> impl Strategy<Value = (Vec<Cx>, Vec<Cx>)> {
    separated_nodes(max_nodes).prop_flat_map(move |nodes| {
        let k = nodes.len();
        (Just(nodes), prop::collection::vec(cx_box(vmax), k))
    })
}

fn gentle_interpolant(max_nodes: usize, vmax: f64) -> impl Strategy<Value = Interpolant> {
    fit_data(max_nodes, vmax).prop_map(|(nodes, values)| Interpolant::fit(&nodes, &values).unwrap())
}

/// Plane shear moving coordinate `c` as a function of the other coordinate.
fn plane_shear(max_nodes: usize, vmax: f64) -> impl Strategy<Value = ShearPrimitive> {
    (0usize..2, gentle_interpolant(max_nodes, vmax)).prop_map(|(c, f)| {
        let mut v = vec![Cx::new(0.0, 0.0); 2];
        v[c] = Cx::new(1.0, 0.0);
        let mut lambda = vec![Cx::new(0.0, 0.0); 2];
        lambda[1 - c] = Cx::new(1.0, 0.0);
        ShearPrimitive::new(v, lambda, f).unwrap()
    })
}

fn forstneric_shear(n: usize) -> impl Strategy<Value = ShearPrimitive> {
    (prop::collection::vec(cx_box(1.0), 2 * n), gentle_interpolant(5, 1.0)).prop_filter_map(
        "direction too close to zero",
        move |(v, f)| {
            if sup_norm(&v) < 0.3 {
                return None;
            }
            ShearPrimitive::forstneric(v, f, n).ok()
        },
    )
}

fn sl2_generator() -> impl Strategy<Value = Generator> {
    prop::sample::select(vec![
        Generator::SlV,
        Generator::SlW,
        Generator::SlH,
        Generator::SlA,
        Generator::SlB,
        Generator::SlC,
    ])
}

fn product_generator() -> impl Strategy<Value = Generator> {
    prop_oneof![
        Just(Generator::ProductX),
        Just(Generator::ProductY),
        (0u32..=3).prop_map(|m| Generator::GizPhi { m }),
        (0u32..=3).prop_map(|m| Generator::GizPsi { m }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_reproduces_its_data((nodes, values) in fit_data(12, 2.0)) {
        let p = Interpolant::fit(&nodes, &values).unwrap();
        let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        for (x, v) in nodes.iter().zip(&values) {
            let err = (p.eval(*x) - v).norm();
            prop_assert!(err <= 1e-8 * scale, "residual {err:e} at node {x}");
        }
    }

    #[test]
    fn fit_ignores_the_order_of_its_data(
        (nodes, values) in fit_data(12, 2.0),
        perm in prop::collection::vec(prop::num::u32::ANY, 12),
        probe in prop::collection::vec(cx_box(1.1), 5),
    ) {
        let p = Interpolant::fit(&nodes, &values).unwrap();
        // sort by random keys: a uniformly random permutation of the data
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by_key(|&i| perm[i]);
        let shuffled_nodes: Vec<Cx> = order.iter().map(|&i| nodes[i]).collect();
        let shuffled_values: Vec<Cx> = order.iter().map(|&i| values[i]).collect();
        let q = Interpolant::fit(&shuffled_nodes, &shuffled_values).unwrap();
        for z in probe {
            let a = p.eval(z);
            let d = (a - q.eval(z)).norm();
            prop_assert!(d <= 1e-8 * (1.0 + a.norm()), "order-dependent by {d:e} at {z}");
        }
    }

    #[test]
    fn shears_invert_to_machine_precision(
        shear in plane_shear(9, 2.0),
        z in prop::collection::vec(cx_box(1.8), 2),
    ) {
        let forward = shear.apply(&z);
        let back = shear.inverse().apply(&forward);
        let scale = 1.0 + sup_norm(&forward);
        prop_assert!(sup_dist(&back, &z) <= 1e-12 * scale, "round trip {:e}", sup_dist(&back, &z));
    }

    #[test]
    fn shear_chains_invert_over_the_sampling_region(
        shears in prop::collection::vec(plane_shear(6, 0.5), 1..=3),
        seed in 0u64..1024,
    ) {
        let mut chain = AutoChain::new(2);
        for s in shears {
            chain.push_shear(s).unwrap();
        }
        let resid = round_trip_residual(&chain, seed, &SampleRegion::origin(2, 1.5)).unwrap();
        prop_assert!(resid <= 1e-9, "round trip {resid:e}");
    }

    #[test]
    fn symplectic_shears_compose_symplectically(
        s1 in forstneric_shear(2),
        s2 in forstneric_shear(2),
        seed in 0u64..1024,
    ) {
        let mut chain = AutoChain::new(4);
        chain.push_shear(s1).unwrap();
        chain.push_shear(s2).unwrap();
        let cfg = ToleranceConfig::default();
        let rep =
            check_symplectic(&chain, 2, &cfg, seed, &SampleRegion::origin(4, 1.0)).unwrap();
        prop_assert!(rep.passed(), "defect {:e}", rep.checks[0].residual);
    }

    #[test]
    fn finite_differences_match_the_analytic_jacobian(
        shear in plane_shear(4, 1.0),
        z in prop::collection::vec(cx_box(1.0), 2),
    ) {
        let mut chain = AutoChain::new(2);
        chain.push_shear(shear).unwrap();
        let cfg = ToleranceConfig::default();
        let analytic = chain.jacobian_at(&z).unwrap();
        let fd = jacobian(|w| chain.apply(w), &z, &cfg).unwrap();
        let scale = 1.0 + analytic.max_abs();
        let diff = analytic.sub(&fd).max_abs();
        prop_assert!(diff <= 2e-6 * scale, "fd vs analytic {diff:e}");

        // halving the step must not move the answer: truncation is already
        // below the roundoff floor for these degrees
        let mut halved = cfg.clone();
        halved.diff_step /= 2.0;
        let fd2 = jacobian(|w| chain.apply(w), &z, &halved).unwrap();
        let drift = fd.sub(&fd2).max_abs();
        prop_assert!(drift <= 2e-6 * scale, "step sensitivity {drift:e}");
    }

    #[test]
    fn sl2_flows_satisfy_the_group_law(
        gen in sl2_generator(),
        s in cx_box(1.0),
        t in cx_box(1.0),
        k1 in -1.5..1.5f64,
        k2 in -1.0..1.0f64,
        k3 in -1.5..1.5f64,
    ) {
        use tameforge::sl2::{flow, SL2Elem};
        let m = SL2Elem::upper(k1).mul(&SL2Elem::diagonal(k2)).mul(&SL2Elem::upper(k3));
        let joint = flow(&gen, s + t, &m).unwrap();
        let split = flow(&gen, s, &flow(&gen, t, &m).unwrap()).unwrap();
        let gap = sup_dist(&joint.to_vec(), &split.to_vec());
        let scale = 1.0 + sup_norm(&joint.to_vec());
        prop_assert!(gap <= 1e-10 * scale, "group law off by {gap:e}");
        prop_assert!(
            joint.det_residual() <= 1e-10 * scale * scale,
            "left the variety by {:e}",
            joint.det_residual()
        );
    }

    #[test]
    fn product_flows_satisfy_the_group_law(
        gen in product_generator(),
        s in cx_box(1.0),
        t in cx_box(1.0),
        z in cx_box(1.2),
        w in cx_box(1.2),
    ) {
        prop_assume!(w.norm() > 0.2);
        let p = vec![z, w];
        let joint = FlowPrimitive::constant(gen.clone(), s + t).apply(&p).unwrap();
        let inner = FlowPrimitive::constant(gen.clone(), t).apply(&p).unwrap();
        let split = FlowPrimitive::constant(gen, s).apply(&inner).unwrap();
        let scale = 1.0 + sup_norm(&joint);
        prop_assert!(
            sup_dist(&joint, &split) <= 1e-10 * scale,
            "group law off by {:e}",
            sup_dist(&joint, &split)
        );
    }

    #[test]
    fn extended_precision_defect_agrees_with_plain_double_on_gentle_chains(
        shear in forstneric_shear(1),
        seed in 0u64..512,
    ) {
        let mut chain = AutoChain::new(2);
        chain.push_shear(shear).unwrap();
        let mut rng = rng_from_seed(seed);
        let z = sample_polydisc(&mut rng, &[Cx::new(0.0, 0.0); 2], 0.8);
        let plain = symplectic_defect(&chain.jacobian_at(&z).unwrap(), 1);
        let dd = symplectic_defect_dd(&chain.jacobian_dd_at(&z).unwrap(), 1);
        prop_assert!(plain < 1e-6, "plain defect {plain:e}");
        prop_assert!(dd < 1e-6, "extended defect {dd:e}");
        prop_assert!((plain - dd).abs() <= 1e-8 * (1.0 + plain), "precisions disagree");
    }
}
