use proptest::prelude::*;

use dicke::dicke::{build_optimized, build_optimized_wired, DickeParams, VariantMask, Wiring};
use dicke::topology::{
    check_assignment, embeds_into, extract_map, find_mappings, gnk_map, is_isomorphic, is_subgraph, Architecture,
};

fn p(n: usize, k: usize) -> DickeParams {
    DickeParams::new(n, k).unwrap()
}

fn perm5() -> impl Strategy<Value = Vec<usize>> {
    Just((0..5).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn mapping_count_survives_relabeling(perm in perm5(), k in 2usize..4) {
        let cm = gnk_map(p(4, k)).unwrap();
        for name in ["ibmqx2", "ibmqx2-fig6", "ibmq-t5"] {
            let arch = Architecture::bundled(name).unwrap();
            let moved = arch.relabeled(&perm).unwrap();
            prop_assert_eq!(find_mappings(&cm, &arch).len(), find_mappings(&cm, &moved).len());
        }
    }
}

#[test]
fn every_assignment_rechecks() {
    for (n, k) in [(3, 2), (4, 2), (4, 3)] {
        let cm = gnk_map(p(n, k)).unwrap();
        for name in Architecture::bundled_names() {
            let arch = Architecture::bundled(name).unwrap();
            for asg in find_mappings(&cm, &arch) {
                check_assignment(&cm, &arch, &asg).unwrap();
            }
        }
    }
}

#[test]
fn complementary_maps_have_equal_edge_counts() {
    for n in 4..=10 {
        for k in 2..=n - 2 {
            let a = gnk_map(p(n, k)).unwrap().undirected().len();
            let b = gnk_map(p(n, n - k)).unwrap().undirected().len();
            assert_eq!(a, b);
            assert_eq!(a, k * (n - k));
        }
    }
}

#[test]
fn complementary_isomorphism_cases() {
    // distinct for these, but (5,2)/(5,3), (7,3)/(7,4) and (9,4)/(9,5) are isomorphic
    for (n, k) in [(6, 2), (7, 2), (8, 2), (8, 3), (9, 2), (9, 3), (10, 2), (10, 3), (10, 4)] {
        assert!(!is_isomorphic(&gnk_map(p(n, k)).unwrap(), &gnk_map(p(n, n - k)).unwrap()).unwrap(), "({n},{k})");
    }
    for (n, k) in [(5, 2), (7, 3), (9, 4)] {
        assert!(is_isomorphic(&gnk_map(p(n, k)).unwrap(), &gnk_map(p(n, n - k)).unwrap()).unwrap(), "({n},{k})");
    }
}

#[test]
fn consecutive_weights_are_not_labelled_subgraphs() {
    for n in 4..=10 {
        for k in 2..n - 1 {
            let a = gnk_map(p(n, k)).unwrap();
            let b = gnk_map(p(n, k + 1)).unwrap();
            assert!(!is_subgraph(&a, &b).unwrap(), "({n},{k})");
        }
    }
    // with relabeling allowed the claim fails already at n = 6
    assert!(embeds_into(&gnk_map(p(6, 2)).unwrap(), &gnk_map(p(6, 3)).unwrap()).unwrap());
}

#[test]
fn weighted_maps_of_the_4_2_family() {
    let pp = p(4, 2);
    let w = |mask: &str, wiring| {
        let c = build_optimized_wired(pp, &VariantMask::parse(mask).unwrap(), wiring).unwrap();
        extract_map(&c).weights.into_iter().collect::<Vec<_>>()
    };
    assert_eq!(w("0", Wiring::Standard), vec![((1, 2), 5), ((1, 3), 4), ((2, 3), 2), ((2, 4), 1)]);
    assert_eq!(w("1", Wiring::Standard), vec![((1, 2), 5), ((1, 3), 3), ((2, 3), 3), ((2, 4), 1)]);
    assert_eq!(w("1", Wiring::Rewired), vec![((1, 2), 5), ((1, 3), 3), ((2, 3), 3), ((3, 4), 1)]);
}

#[test]
fn dot_exports() {
    let c = build_optimized(p(4, 2), &VariantMask::zeros(p(4, 2))).unwrap();
    let w = extract_map(&c);
    let dot = w.to_dot();
    assert_eq!(dot.matches(" -- ").count(), 4);
    assert_eq!(dot.matches("label=").count(), 4);
    assert_eq!(dot, extract_map(&c).to_dot());
    let g = gnk_map(p(6, 3)).unwrap().to_dot();
    assert!(g.starts_with("digraph"));
}

#[test]
fn bundled_files_match_builtins() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../architectures");
    for name in Architecture::bundled_names() {
        let text = std::fs::read_to_string(format!("{dir}/{name}.json")).unwrap();
        assert_eq!(Architecture::from_json(&text).unwrap(), Architecture::bundled(name).unwrap(), "{name}");
    }
}
