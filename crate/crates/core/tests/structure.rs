use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prewet::contour::{
    contours_and_interface, decompose, extract_interface, interface_configuration, odd_vertices, separating_edges,
    spins_from_contours, spins_from_edges,
};
use prewet::gibbs::SpinConfig;
use prewet::harness::verify::structural_checks;
use prewet::lattice::{make_region, source_points, BoundaryCondition, DualVertex, MINUS, PLUS};
use prewet::observables::height_profile;

fn all_configs(n: u32, m: u32) -> impl Iterator<Item = SpinConfig> {
    let region = make_region(n, m);
    let k = region.site_count();
    (0..1u64 << k).map(move |mask| SpinConfig::from_mask(&region, mask))
}

#[test]
fn structural_suite_on_four_by_three() {
    let checks = structural_checks(&make_region(3, 2), &BoundaryCondition::Dobrushin).unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert!(c.pass, "{c:?}");
    }
}

#[test]
fn three_by_three_interface_is_one_open_path_between_sources() {
    let bc = BoundaryCondition::Dobrushin;
    let sources: Vec<DualVertex> = source_points(&make_region(2, 2), &bc).unwrap();
    assert_eq!(sources.len(), 2);
    let mut shapes = BTreeSet::new();
    for sigma in all_configs(2, 2) {
        let (collection, interface) = contours_and_interface(&sigma, &bc).unwrap();
        assert_eq!(collection.open_paths().count(), 1);
        assert_eq!(interface.endpoints(), (sources[0], sources[1]));
        let edges = separating_edges(&sigma, &bc).unwrap();
        assert!(interface.edge_set().is_subset(&edges));
        // the configuration realizing the interface alone has exactly that separating set
        let alone = interface_configuration(&interface, sigma.region(), &bc).unwrap();
        assert_eq!(separating_edges(&alone, &bc).unwrap(), interface.edge_set());
        shapes.insert(interface.edge_set());
    }
    // several distinct interfaces occur, and the flat one among them
    let flat = extract_interface(&SpinConfig::from_fn(&make_region(2, 2), |v| if v.y >= 0 { PLUS } else { MINUS }), &bc)
        .unwrap();
    assert!(shapes.contains(&flat.edge_set()));
    assert!(shapes.len() > 10);
}

#[test]
fn parity_on_four_by_four() {
    for bc in [BoundaryCondition::Dobrushin, BoundaryCondition::AllPlus, BoundaryCondition::PlusMinusAtHeight(1)] {
        let expected: BTreeSet<DualVertex> = source_points(&make_region(3, 3), &bc).unwrap().into_iter().collect();
        for sigma in all_configs(3, 3) {
            let edges = separating_edges(&sigma, &bc).unwrap();
            assert_eq!(odd_vertices(&edges), expected);
        }
    }
}

#[test]
fn decomposition_reunites_on_sampled_eight_by_eight() {
    let region = make_region(7, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let bcs = [BoundaryCondition::Dobrushin, BoundaryCondition::AllPlus, BoundaryCondition::AllMinus];
    for k in 0..1000 {
        // mix uniform noise with blocky configurations so long contours appear
        let p: f64 = rng.gen_range(0.05..0.95);
        let sigma = SpinConfig::from_fn(&region, |_| if rng.gen_bool(p) { PLUS } else { MINUS });
        let bc = &bcs[k % bcs.len()];
        let edges = separating_edges(&sigma, bc).unwrap();
        let collection = decompose(&edges).unwrap();
        let total: usize = collection.contours().iter().map(|c| c.len()).sum();
        assert_eq!(total, edges.len(), "contours are not edge-disjoint");
        assert_eq!(collection.edge_union().as_ref(), Some(&edges));
        for c in collection.contours() {
            assert!(c.is_loop() || c.endpoints().is_some());
        }
        assert_eq!(spins_from_contours(&collection, &region, bc).unwrap(), sigma);
    }
}

fn bc_strategy() -> impl Strategy<Value = BoundaryCondition> {
    prop_oneof![
        Just(BoundaryCondition::Dobrushin),
        Just(BoundaryCondition::AllPlus),
        Just(BoundaryCondition::AllMinus),
        (-1i32..4).prop_map(BoundaryCondition::PlusMinusAtHeight),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn separating_edges_determine_the_configuration(
        n in 0u32..6, m in 0u32..6, bits in any::<u64>(), bc in bc_strategy()
    ) {
        let region = make_region(n, m);
        let sigma = SpinConfig::from_mask(&region, bits & ((1u64 << region.site_count()) - 1));
        let edges = separating_edges(&sigma, &bc).unwrap();
        prop_assert_eq!(spins_from_edges(&region, &bc, &edges).unwrap(), sigma);
    }

    #[test]
    fn interface_profile_is_well_formed(n in 1u32..7, m in 1u32..7, bits in any::<u64>()) {
        let region = make_region(n, m);
        let sigma = SpinConfig::from_mask(&region, bits & ((1u64 << region.site_count()) - 1));
        let interface = extract_interface(&sigma, &BoundaryCondition::Dobrushin).unwrap();
        let profile = height_profile(&interface).unwrap();
        for x in profile.columns() {
            prop_assert!(profile.hgt_plus(x) >= profile.hgt_minus(x));
            prop_assert!(profile.overhang(x) >= 0);
        }
    }
}
