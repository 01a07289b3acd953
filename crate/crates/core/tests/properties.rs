use fctp::formulations::{build_ip_z, build_qdp, build_qsn, check_point};
use fctp::io::{instance_from_str, instance_to_string, model_from_lp, model_to_lp};
use fctp::liftings::{convex_combination, encode_f, pi_map};
use fctp::oracle::{brute_force_solve, enumerate_feasible, DEFAULT_LIMIT};
use fctp::rational::ratio;
use fctp::tree_dp::{encode_uv, solve_tree};
use fctp::{validate_solution, Instance, NodeId, RootedTree, Variant};
use proptest::prelude::*;

/// Small trees with fractional costs, plus a root choice.
fn tree() -> impl Strategy<Value = (Instance, NodeId)> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|k| 0..k).collect();
            let caps = proptest::collection::vec(0i64..=4, n);
            let p = proptest::collection::vec((-6i64..=6, 1i64..=3), n - 1);
            let q = proptest::collection::vec((0i64..=6, 1i64..=4), n - 1);
            (parents, caps, p, q, 1..=n as NodeId)
        })
        .prop_map(|(parents, caps, p, q, root)| {
            let arcs = parents.iter().enumerate().map(|(k, &par)| (par as NodeId + 1, k as NodeId + 2)).collect();
            let p = p.into_iter().map(|(a, b)| ratio(a, b)).collect();
            let q = q.into_iter().map(|(a, b)| ratio(a, b)).collect();
            (Instance::new(caps, arcs, p, q, Variant::default()).unwrap(), root)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_matches_brute_force((inst, root) in tree()) {
        let rt = RootedTree::new(inst.clone(), root).unwrap();
        let (_, sol) = solve_tree(&rt).unwrap();
        prop_assert!(validate_solution(&inst, &sol).is_empty());
        let best = brute_force_solve(&inst, DEFAULT_LIMIT).unwrap();
        prop_assert_eq!(sol.objective, best.objective);
    }

    #[test]
    fn certificate_is_feasible_and_priced((inst, root) in tree()) {
        let rt = RootedTree::new(inst, root).unwrap();
        let (_, sol) = solve_tree(&rt).unwrap();
        let cert = encode_uv(&rt, &sol.x).unwrap();
        let model = build_qdp(&rt).unwrap();
        let pt = cert.to_assignment();
        prop_assert!(check_point(&model, &pt).unwrap().is_empty());
        prop_assert_eq!(model.objective_value(&pt).unwrap(), sol.objective);
    }

    #[test]
    fn lp_text_round_trips((inst, root) in tree()) {
        let rt = RootedTree::new(inst.clone(), root).unwrap();
        for model in [build_ip_z(&inst), build_qdp(&rt).unwrap(), build_qsn(&rt, true).unwrap()] {
            let text = model_to_lp(&model).unwrap();
            let back = model_from_lp(&text).unwrap();
            prop_assert!(back.same_program(&model));
            prop_assert_eq!(model_to_lp(&back).unwrap(), text);
        }
    }

    #[test]
    fn json_round_trips((inst, _) in tree()) {
        let text = instance_to_string(&inst, None);
        prop_assert_eq!(instance_from_str(&text).unwrap().instance, inst);
    }

    #[test]
    fn pi_commutes_with_mixing((inst, root) in tree(), picks in (0usize..64, 0usize..64), lam in (0i64..=5, 1i64..=5)) {
        let rt = RootedTree::new(inst.clone(), root).unwrap();
        let flows: Vec<_> = enumerate_feasible(&inst, DEFAULT_LIMIT).unwrap().map(|s| s.x).collect();
        let a = encode_f(&rt, &flows[picks.0 % flows.len()]).unwrap();
        let b = encode_f(&rt, &flows[picks.1 % flows.len()]).unwrap();
        let lambda = ratio(lam.0.min(lam.1), lam.1);
        let mixed = pi_map(&rt, &convex_combination(&a, &b, &lambda)).unwrap();
        let separate = convex_combination(&pi_map(&rt, &a).unwrap(), &pi_map(&rt, &b).unwrap(), &lambda);
        prop_assert_eq!(&mixed.projection, &separate.projection);
        // zero entries may be present on one side only
        let nonzero = |pt: &fctp::liftings::LiftedPoint| -> Vec<_> {
            pt.values.iter().filter(|(_, v)| **v != ratio(0, 1)).map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        prop_assert_eq!(nonzero(&mixed), nonzero(&separate));
    }
}
