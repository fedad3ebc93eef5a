use fracground::solvers::minimize_nehari;
use fracground::verify::{
    classify, ground_state_level_audit, positivity_representation_check, sp4_triviality_audit, CaseLabel,
    NegativeBranch, Status,
};
use fracground::{Exec, Field, GridSpec, ProblemSpec, SolverConfig, Variant};

fn grid(l: f64, n: usize) -> GridSpec {
    GridSpec::new(l, n).unwrap()
}

fn sp1_ground_state() -> fracground::GroundStateReport {
    let spec = ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::Sp1).unwrap();
    let r = minimize_nehari(&spec, grid(400.0, 1 << 15), &SolverConfig::default()).unwrap();
    assert!(r.converged);
    r
}

#[test]
fn sp1_level_audit() {
    let r = sp1_ground_state();
    let a = ground_state_level_audit(&r, 20, 5, Exec::Parallel).unwrap();
    assert!(a.passed, "{a:?}");
    assert!(a.identity_defect.unwrap() <= 1e-10);
    assert_eq!(a.trials_below, 0);
    assert!(a.perturbed_action > a.action);
    assert!(a.min_trial_action >= a.action);
    let seq = ground_state_level_audit(&r, 20, 5, Exec::Sequential).unwrap();
    assert_eq!(seq.min_trial_action, a.min_trial_action);
}

#[test]
fn sp1_positivity_representation() {
    let r = sp1_ground_state();
    let p = positivity_representation_check(&r.profile, &r.spec).unwrap();
    assert!(p.positive);
    assert!(p.min_reconstruction > 0.0);
    assert!(
        p.reconstruction_error <= 10.0 * SolverConfig::default().grad_tol,
        "{}",
        p.reconstruction_error
    );
}

#[test]
fn benjamin_positivity_representation() {
    let g = grid(400.0, 1 << 15);
    let phi = Field::from_fn(g, |x| 2.0 / (1.0 + x * x)).unwrap();
    let spec = ProblemSpec::new(1.0, 1.0, 2.0, 0.0, Variant::Single).unwrap();
    let p = positivity_representation_check(&phi, &spec).unwrap();
    assert!(p.positive);
    assert!(p.reconstruction_error * phi.max_abs() <= 1e-4);
    assert!(positivity_representation_check(&Field::zeros(g), &spec).is_err());
}

#[test]
fn sp4_audit_from_lorentzian_collapses() {
    let spec = ProblemSpec::new(1.0, 1.0, 2.0, 3.0, Variant::Sp4).unwrap();
    let a = sp4_triviality_audit(&spec, grid(40.0, 1024), 30, 3, Exec::Parallel).unwrap();
    assert!(a.passed);
    assert!(a.bound_holds && a.min_ratio > 1.0);
    assert!(!a.nontrivial_fixed_point);
    let first = &a.residual_iterations[0];
    assert!(first.collapsed && first.final_norm <= 1e-6 * first.initial_norm);
    let sp1 = ProblemSpec {
        variant: Variant::Sp1,
        ..spec
    };
    assert!(sp4_triviality_audit(&sp1, grid(40.0, 1024), 3, 3, Exec::Sequential).is_err());
}

#[test]
fn odd_powers_give_mirrored_ground_states() {
    let r = classify(
        3,
        5,
        0.1,
        grid(1600.0, 1 << 17),
        &SolverConfig::default(),
        Exec::Parallel,
    )
    .unwrap();
    assert_eq!(r.case_label, CaseLabel::OddOdd);
    assert_eq!(r.negative_branch, NegativeBranch::Mirrored);
    let pos = r.positive_solution.as_ref().unwrap();
    let neg = r.negative_solution.as_ref().unwrap();
    assert!((pos.action - neg.action).abs() <= 1e-10 * pos.action.abs());
    assert!(
        r.verdicts.iter().all(|v| v.status == Status::Passed),
        "{:?}",
        r.verdicts
    );
}

#[test]
fn even_odd_negative_state_is_lower() {
    let r = classify(
        2,
        3,
        0.1,
        grid(1600.0, 1 << 17),
        &SolverConfig::default(),
        Exec::Parallel,
    )
    .unwrap();
    assert_eq!(r.case_label, CaseLabel::EvenOdd);
    assert_eq!(r.negative_branch, NegativeBranch::FromSp2);
    let pos = r.positive_solution.as_ref().unwrap().action;
    let neg = r.negative_solution.as_ref().unwrap().action;
    assert!(pos - neg > 0.0);
    assert!(r.d_estimate <= r.d1_estimate);
    assert!(
        r.verdicts.iter().all(|v| v.status == Status::Passed),
        "{:?}",
        r.verdicts
    );
}
