use proptest::prelude::*;

use dicke::dicke::{
    build_baseline, build_baseline_unmerged, build_optimized, build_optimized_unmerged, DickeParams, VariantMask,
};
use dicke::synth::fragment_unitary;
use dicke::{cancel_adjacent_cnots, Circuit, Gate};

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 1..=n;
    prop_oneof![
        1 => q.clone().prop_map(Gate::x),
        1 => (q.clone(), -3.0..3.0f64).prop_map(|(q, t)| Gate::ry(q, t)),
        // weighted towards CX so cancellations actually happen
        3 => (q.clone(), q).prop_filter("distinct", |(c, t)| c != t).prop_map(|(c, t)| Gate::cx(c, t)),
    ]
}

fn circuit() -> impl Strategy<Value = Circuit> {
    (2usize..=6)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(gate(n), 0..40)))
        .prop_map(|(n, gs)| Circuit::from_gates(n, gs).unwrap())
}

proptest! {
    #[test]
    fn cancellation_preserves_unitary(c in circuit()) {
        let r = cancel_adjacent_cnots(&c);
        prop_assert!(r.counts().cnot <= c.counts().cnot);
        prop_assert_eq!(r.counts().ry, c.counts().ry);
        let a = fragment_unitary(c.gates(), c.n()).unwrap();
        let b = fragment_unitary(r.gates(), r.n()).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn json_round_trip(c in circuit()) {
        let s = c.to_json();
        let back = Circuit::from_json(&s).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_json(), s);
    }
}

#[test]
fn trivial_cancellations() {
    let c = Circuit::from_gates(2, vec![Gate::cx(1, 2), Gate::cx(1, 2)]).unwrap();
    assert!(cancel_adjacent_cnots(&c).is_empty());
    let c = Circuit::from_gates(3, vec![Gate::cx(1, 2), Gate::ry(3, 0.4), Gate::cx(1, 2)]).unwrap();
    assert_eq!(cancel_adjacent_cnots(&c).gates(), &[Gate::ry(3, 0.4)]);
}

#[test]
fn unmerged_builds_reduce_to_canonical_counts() {
    for n in 3..=9 {
        for k in 1..n {
            let p = DickeParams::new(n, k).unwrap();
            let naive = build_baseline_unmerged(p);
            let reduced = cancel_adjacent_cnots(&naive);
            assert_eq!(reduced.counts(), build_baseline(p).counts(), "baseline ({n},{k})");
            if k >= 2 {
                let naive = build_optimized_unmerged(p).unwrap();
                let reduced = cancel_adjacent_cnots(&naive);
                let canonical = build_optimized(p, &VariantMask::zeros(p)).unwrap();
                assert_eq!(reduced.counts(), canonical.counts(), "reduced ({n},{k})");
            }
        }
    }
}

#[test]
fn unmerged_and_reduced_act_identically() {
    // full unitary, not just the |0..0> column
    for (n, k) in [(3, 1), (3, 2), (4, 2), (4, 3), (5, 2), (6, 3)] {
        let p = DickeParams::new(n, k).unwrap();
        let naive = build_baseline_unmerged(p);
        let a = fragment_unitary(naive.gates(), n).unwrap();
        let b = fragment_unitary(cancel_adjacent_cnots(&naive).gates(), n).unwrap();
        let c = fragment_unitary(build_baseline(p).gates(), n).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12, "({n},{k})");
        assert!(a.max_abs_diff(&c) < 1e-12, "({n},{k})");
        assert_eq!(naive.counts().cnot - build_baseline(p).counts().cnot, m_count(n, k));
    }
}

/// Number of M transformations in the baseline layout.
fn m_count(n: usize, k: usize) -> usize {
    (2..=n).map(|m| k.min(m - 1) - 1).sum()
}

#[test]
fn qasm_export_of_a_build() {
    let p = DickeParams::new(4, 2).unwrap();
    let c = build_optimized(p, &VariantMask::zeros(p)).unwrap();
    let q = c.to_qasm(true);
    assert!(q.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\ncreg c[4];\n"));
    assert_eq!(q.matches("cx ").count(), 12);
    assert_eq!(q.matches("ry(").count(), 9);
    assert_eq!(q.matches("\nx ").count(), 2);
    assert!(q.lines().skip(4).all(|l| !l.contains("q[4]")), "wires are 0-indexed");
    assert_eq!(q, c.to_qasm(true));
}

#[test]
fn complementary_weights_cost_the_same() {
    for n in 4..=12 {
        for k in 2..=n - 2 {
            let a = build_optimized(DickeParams::new(n, k).unwrap(), &VariantMask::zeros(DickeParams::new(n, k).unwrap()));
            let b = build_optimized(DickeParams::new(n, n - k).unwrap(), &VariantMask::zeros(DickeParams::new(n, n - k).unwrap()));
            let (a, b) = (a.unwrap().counts(), b.unwrap().counts());
            assert_eq!(a.cnot, b.cnot, "({n},{k})");
            assert_eq!(a.ry, b.ry, "({n},{k})");
        }
    }
}
