//! Cross-module invariants, checked on randomized gates and inputs.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qdarwin::attractor::{asymptotic_state, solve_attractor_space, Horizon, DEFAULT_ATTRACTOR_TOL};
use qdarwin::channel::{uniform_digraph, InteractionDigraph, RandomUnitaryChannel};
use qdarwin::darwinism::{mutual_information, pip, von_neumann_entropy, Ordering, OrderingSet};
use qdarwin::gates::{GateSpec, OperatorOrder};
use qdarwin::registers::{initial_state, partial_trace, trace_distance, DensityMatrix, InitialFamily, InitialParams, RegisterLayout};
use qdarwin::zurek::{reduced_system, zurek_closed_form, zurek_evolve, ClosedFormParams, ZurekTag};

/// A gate inside the allowed domain: `φ, γ ∈ [0, π]`, `α₁ + α₂ ∈ [0, π]`.
fn gate() -> impl Strategy<Value = GateSpec> {
    (0.0..=PI, 0.0..=PI, 0.0..=1.0f64, 0.0..=PI, any::<bool>()).prop_map(|(phi, sum, split, gamma, rev)| {
        let order = if rev { OperatorOrder::Reversed } else { OperatorOrder::Tot };
        GateSpec::new(phi, sum * split, sum * (1.0 - split), gamma, order).unwrap()
    })
}

/// Unit-norm single-qubit amplitudes `(a, b)`.
fn qubit() -> impl Strategy<Value = (Complex64, Complex64)> {
    (0.0..=PI, -PI..PI).prop_map(|(theta, phase)| {
        (
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phase),
        )
    })
}

fn family() -> impl Strategy<Value = InitialFamily> {
    prop::sample::select(vec![
        InitialFamily::ZurekGround,
        InitialFamily::EnvExcited,
        InitialFamily::GhzMixture,
        InitialFamily::EnvMaximallyMixed,
        InitialFamily::EntangledSx,
    ])
}

fn start(family: InitialFamily, n: usize, (a, b): (Complex64, Complex64)) -> DensityMatrix {
    initial_state(family, RegisterLayout::new(1, n).unwrap(), &InitialParams::qubit(a, b)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn channel_keeps_states_physical(spec in gate(), amps in qubit(), fam in family(), n in 2usize..=3, steps in 1usize..30) {
        let l = RegisterLayout::new(1, n).unwrap();
        let rho = RandomUnitaryChannel::new(&spec, &uniform_digraph(l)).unwrap().evolve(&start(fam, n, amps), steps).unwrap();
        prop_assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(rho.matrix().hermiticity_defect() < 1e-12);
        prop_assert!(rho.min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn channel_is_a_contraction(spec in gate(), a in qubit(), b in qubit(), n in 2usize..=3) {
        let l = RegisterLayout::new(1, n).unwrap();
        let ch = RandomUnitaryChannel::new(&spec, &uniform_digraph(l)).unwrap();
        let (x, y) = (start(InitialFamily::ZurekGround, n, a), start(InitialFamily::EnvExcited, n, b));
        let before = trace_distance(&x, &y).unwrap();
        let after = trace_distance(&ch.apply(&x).unwrap(), &ch.apply(&y).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-10, "{after} > {before}");
    }

    #[test]
    fn mutual_information_is_bounded_and_grows_with_the_fragment(spec in gate(), amps in qubit(), fam in family(), steps in 0usize..20) {
        let n = 3;
        let l = RegisterLayout::new(1, n).unwrap();
        let rho = RandomUnitaryChannel::new(&spec, &uniform_digraph(l)).unwrap().evolve(&start(fam, n, amps), steps).unwrap();
        let curve = pip(&rho, &OrderingSet::Single(Ordering::RightToLeft), None).unwrap();
        let h_s = curve.points[0].h_s;
        let mut prev = 0.0;
        for p in &curve.points {
            prop_assert!(p.mi >= -1e-9);
            prop_assert!(p.mi <= 2.0 * h_s + 1e-9);
            // Strong subadditivity: discarding environment qubits cannot raise I(S:E_L).
            prop_assert!(p.mi >= prev - 1e-9, "MI fell from {prev} to {}", p.mi);
            prev = p.mi;
        }
    }

    #[test]
    fn zurek_branching_matches_its_closed_form(amps in qubit(), n in 1usize..=5) {
        let params = ClosedFormParams::new(n, amps.0, amps.1);
        let analytic = zurek_closed_form(ZurekTag::CnotBranching, &params).unwrap();
        let evolved = zurek_evolve(&ZurekTag::CnotBranching.case(&params).unwrap()).unwrap();
        prop_assert!((analytic.fidelity(&evolved).unwrap() - 1.0).abs() < 1e-12);
        // The system ends up dephased in the pointer basis.
        let rs = reduced_system(&evolved, 1);
        prop_assert!((rs[(0, 0)].re - amps.0.norm_sqr()).abs() < 1e-12);
        prop_assert!(rs[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn every_closed_form_matches_evolution(amps in qubit(), n in 1usize..=4, tag in prop::sample::select(ZurekTag::ALL.to_vec())) {
        let n = if tag.requires_two_env_qubits() { 2 } else { n };
        let params = ClosedFormParams::new(n, amps.0, amps.1).with_alphas(2.0 * PI / 3.0, PI / 4.0);
        let analytic = zurek_closed_form(tag, &params).unwrap();
        let evolved = zurek_evolve(&tag.case(&params).unwrap()).unwrap();
        let gap = analytic
            .amplitudes()
            .iter()
            .zip(evolved.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        prop_assert!(gap < 1e-12, "{tag}: {gap:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn limit_state_is_a_fixed_point(spec in gate(), amps in qubit(), fam in family()) {
        let l = RegisterLayout::new(1, 2).unwrap();
        let d = uniform_digraph(l);
        let space = solve_attractor_space(&spec, &d, DEFAULT_ATTRACTOR_TOL).unwrap();
        let limit = asymptotic_state(&start(fam, 2, amps), &space, Horizon::Limit).unwrap().state;
        let next = RandomUnitaryChannel::new(&spec, &d).unwrap().apply(&limit).unwrap();
        prop_assert!(next.matrix().sub(limit.matrix()).unwrap().max_abs() < 1e-9);
        prop_assert!((limit.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn finite_horizon_tracks_iteration_once_transients_decay(amps in qubit(), alpha in 0.3..=PI / 2.0) {
        let l = RegisterLayout::new(1, 2).unwrap();
        let d = uniform_digraph(l);
        let spec = GateSpec::symmetric(alpha, OperatorOrder::Tot).unwrap();
        let space = solve_attractor_space(&spec, &d, DEFAULT_ATTRACTOR_TOL).unwrap();
        let rho0 = start(InitialFamily::ZurekGround, 2, amps);
        let steps = 3000;
        let predicted = asymptotic_state(&rho0, &space, Horizon::Steps(steps)).unwrap().state;
        let iterated = RandomUnitaryChannel::new(&spec, &d).unwrap().evolve(&rho0, steps as usize).unwrap();
        prop_assert!(trace_distance(&predicted, &iterated).unwrap() < 1e-6);
    }
}

#[test]
fn seeded_orderings_agree_for_a_symmetric_environment() {
    let n = 5;
    let l = RegisterLayout::new(1, n).unwrap();
    let spec = GateSpec::symmetric(PI / 2.0, OperatorOrder::Tot).unwrap();
    let rho = RandomUnitaryChannel::new(&spec, &uniform_digraph(l))
        .unwrap()
        .evolve(&start(InitialFamily::ZurekGround, n, (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8))), 40)
        .unwrap();
    let single = pip(&rho, &OrderingSet::Single(Ordering::RightToLeft), None).unwrap();
    let seeded = pip(&rho, &OrderingSet::Seeded { count: 20, seed: 7 }, None).unwrap();
    assert!(seeded.max_deviation() < 1e-10, "{}", seeded.max_deviation());
    for (a, b) in single.points.iter().zip(&seeded.points) {
        assert!((a.mi - b.mi).abs() < 1e-10);
    }
}

#[test]
fn skewed_weights_break_ordering_symmetry_but_not_the_terminal_point() {
    let n = 3;
    let l = RegisterLayout::new(1, n).unwrap();
    let spec = GateSpec::symmetric(PI / 3.0, OperatorOrder::Tot).unwrap();
    let d = InteractionDigraph::with_weights(l, &[1.0, 2.0, 5.0]).unwrap();
    let rho = RandomUnitaryChannel::new(&spec, &d)
        .unwrap()
        .evolve(&start(InitialFamily::ZurekGround, n, (Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0))), 6)
        .unwrap();
    let seeded = pip(&rho, &OrderingSet::Seeded { count: 20, seed: 3 }, None).unwrap();
    assert!(seeded.max_deviation() > 1e-6);
    assert!(seeded.spread[n - 1] < 1e-12);
}

#[test]
fn pure_global_state_has_twice_the_system_entropy_at_full_fragment() {
    let n = 4;
    let params = ClosedFormParams::new(n, Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0));
    let rho = zurek_closed_form(ZurekTag::SymmetricDissTot, &params).unwrap().to_density();
    let rho_s = partial_trace(&rho, &rho.env_positions()).unwrap();
    let h_s = von_neumann_entropy(&rho_s).unwrap();
    let full = mutual_information(&rho, n, &Ordering::RightToLeft, None).unwrap();
    assert!((full.mi - 2.0 * h_s).abs() < 1e-10);
    assert!(full.h_sef.abs() < 1e-10);
}
