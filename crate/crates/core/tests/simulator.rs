use proptest::prelude::*;

use dicke::dicke::{build_optimized, DickeParams, VariantMask};
use dicke::error_model::{em_measure, fault_model_for, ResponseFunction};
use dicke::par::Exec;
use dicke::sim::{
    fault_monte_carlo, sample, simulate, FaultAction, FaultModel, MonteCarloConfig, StateVector,
};
use dicke::topology::{Architecture, Assignment};
use dicke::{Circuit, Gate};

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (1..=n).prop_map(Gate::x),
        (1..=n, -3.0..3.0f64).prop_map(|(q, t)| Gate::ry(q, t)),
        (1..=n, 1..=n).prop_filter("distinct", |(c, t)| c != t).prop_map(|(c, t)| Gate::cx(c, t)),
    ]
}

fn run(c: &Circuit, mut sv: StateVector) -> StateVector {
    for g in c.gates() {
        sv.apply(g);
    }
    sv
}

proptest! {
    #[test]
    fn linear_on_superpositions(gs in prop::collection::vec(gate(3), 0..25), raw in prop::collection::vec(-1.0..1.0f64, 8)) {
        let c = Circuit::from_gates(3, gs).unwrap();
        let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amps: Vec<f64> = raw.iter().map(|a| a / norm).collect();
        let whole = run(&c, StateVector::from_amps(3, amps.clone()).unwrap());
        let mut sum = vec![0.0; 8];
        for (i, a) in amps.iter().enumerate() {
            let col = simulate(&c, i).unwrap();
            for (s, x) in sum.iter_mut().zip(col.amps()) {
                *s += a * x;
            }
        }
        for (x, y) in whole.amps().iter().zip(&sum) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_gates_keep_basis_states(
        gs in prop::collection::vec(gate(4).prop_filter("no Ry", |g| !matches!(g, Gate::Ry { .. })), 0..30),
        input in 0usize..16,
    ) {
        let c = Circuit::from_gates(4, gs).unwrap();
        let out = simulate(&c, input).unwrap();
        prop_assert_eq!(out.support(0.5).len(), 1);
        prop_assert_eq!(out.support(0.0).len(), 1);
    }

    #[test]
    fn norm_preserved(gs in prop::collection::vec(gate(5), 0..40), input in 0usize..32) {
        let c = Circuit::from_gates(5, gs).unwrap();
        prop_assert!((simulate(&c, input).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }
}

fn c42() -> Circuit {
    let p = DickeParams::new(4, 2).unwrap();
    build_optimized(p, &VariantMask::zeros(p)).unwrap()
}

#[test]
fn reduced_4_2_state() {
    let sv = simulate(&c42(), 0).unwrap();
    assert_eq!(sv.support(1e-10), vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
    for i in sv.support(1e-10) {
        assert!((sv.amps()[i] - 1.0 / 6f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn monte_carlo_independent_of_execution_mode() {
    let c = c42();
    let arch = Architecture::bundled("a4").unwrap();
    let asg = Assignment { phys: vec![0, 1, 2, 3] };
    let fm = fault_model_for(&c, &asg, &arch, &ResponseFunction::affine(5.0 / 6.0, 0.1).unwrap(), FaultAction::DepolarizingPair)
        .unwrap();
    let mk = |exec| MonteCarloConfig { trials: 5000, seed: 42, weight: 2, exec };
    let a = fault_monte_carlo(&c, &fm, &mk(Exec::Sequential)).unwrap();
    let b = fault_monte_carlo(&c, &fm, &mk(Exec::Parallel)).unwrap();
    assert_eq!(a.histogram, b.histogram);
    assert_eq!(a.mean_faulty_cnots, b.mean_faulty_cnots);
    assert!(a.faulty_trials > 0);
    // heavy faults push the output away from the ideal distribution
    assert!(a.em > 0.05, "em {}", a.em);
}

#[test]
fn zero_faults_reproduce_sampling() {
    let c = c42();
    let fm = FaultModel::new(vec![0.0; c.counts().cnot], FaultAction::BitFlipBoth).unwrap();
    let cfg = MonteCarloConfig { trials: 8192, seed: 5, weight: 2, exec: Exec::Auto };
    let r = fault_monte_carlo(&c, &fm, &cfg).unwrap();
    let h = sample(&simulate(&c, 0).unwrap(), 8192, 5).unwrap();
    assert_eq!(r.histogram, h);
    assert_eq!(r.em, em_measure(&h, 4, 2).unwrap());
    assert_eq!(r.mean_faulty_cnots, 0.0);
}

#[test]
fn bit_flip_action_converges_too() {
    let c = c42();
    let probs: Vec<f64> = (0..c.counts().cnot).map(|i| 0.01 * (i % 3) as f64).collect();
    let fm = FaultModel::new(probs, FaultAction::BitFlipBoth).unwrap();
    let trials = 100_000;
    let cfg = MonteCarloConfig { trials, seed: 9, weight: 2, exec: Exec::Auto };
    let r = fault_monte_carlo(&c, &fm, &cfg).unwrap();
    let sigma = (fm.fault_variance() / trials as f64).sqrt();
    assert!((r.mean_faulty_cnots - fm.expected_faults()).abs() <= 3.0 * sigma);
}
