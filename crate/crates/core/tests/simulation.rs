use std::f64::consts::PI;

use crd_core::{
    build_fd_diff_ops, build_grid, build_rbf_diff_ops, certificate_violations, feedback_inputs, make_controller, run,
    AlphaSpec, ControllerKind, ControllerSpec, Convection, Feedback, GridState, InitialCondition, LoopMode, Profile,
    ProfileTerm, ReactionSpec, ReactionTerm, Side, SimConfig, Simulator,
};
use proptest::prelude::*;

fn sine(amp: f64) -> InitialCondition<f64> {
    InitialCondition::Profile(Profile::new(vec![ProfileTerm::Sin { coeff: amp, freq: 1.0 }]))
}

#[test]
fn heat_equation_matches_exact_decay() {
    let mut cfg = SimConfig::new(0.1, 200, 1e-3, 1.0);
    cfg.initial = sine(1.0);
    let res = run(&cfg).unwrap();
    assert_eq!(res.series.len(), 1001);
    let last = res.snapshots.last().unwrap();
    let grid = build_grid::<f64>(200).unwrap();
    let decay = (-0.1 * PI * PI * last.t).exp();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (x, u) in grid.nodes().iter().zip(&last.values) {
        let exact = decay * (PI * x).sin();
        num = num.max((u - exact).abs());
        den = den.max(exact.abs());
    }
    assert!(num / den < 1e-3, "relative error {}", num / den);
}

#[test]
fn open_loop_diffusion_never_gains_energy() {
    let mut cfg = SimConfig::new(0.05, 100, 1e-3, 0.5);
    cfg.initial = InitialCondition::Profile(Profile::new(vec![
        ProfileTerm::Sin { coeff: 1.0, freq: 1.0 },
        ProfileTerm::Sin { coeff: 0.5, freq: 7.0 },
    ]));
    let res = run(&cfg).unwrap();
    for w in res.series.windows(2) {
        assert!(w[1].lyapunov <= w[0].lyapunov * (1.0 + 1e-12), "{} -> {}", w[0].lyapunov, w[1].lyapunov);
    }
}

#[test]
fn rbf_and_fd_first_derivatives_agree() {
    let grid = build_grid::<f64>(200).unwrap();
    let fd = build_fd_diff_ops(&grid);
    let rbf = build_rbf_diff_ops(&grid, 1e-9).unwrap();
    let mut fns: Vec<Box<dyn Fn(f64) -> f64>> = Vec::new();
    for k in 0..=4 {
        fns.push(Box::new(move |x: f64| x.powi(k)));
    }
    for k in 1..=5 {
        fns.push(Box::new(move |x: f64| (k as f64 * PI * x).sin()));
    }
    for (i, f) in fns.iter().enumerate() {
        let vals = grid.sample(f);
        let a = fd.first_derivative(&vals);
        let b = rbf.first_derivative(&vals);
        let scale = a[1..200].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let gap = (1..200).map(|j| (a[j] - b[j]).abs()).fold(0.0, f64::max);
        assert!(gap / scale <= 1e-2, "function {i}: gap {gap} scale {scale}");
    }
}

#[test]
fn lyapunov_does_not_depend_on_backend() {
    let grid = build_grid::<f64>(120).unwrap();
    let fd = build_fd_diff_ops(&grid);
    let rbf = build_rbf_diff_ops(&grid, 1e-9).unwrap();
    let state = GridState::from_fn(&grid, |x| x * (1.0 - x) + 0.3 * (3.0 * PI * x).sin());
    let r = |u: f64| 0.5 * u * u * u;
    let a = feedback_inputs(&state, &fd, r, 0.02, Side::Left).unwrap();
    let b = feedback_inputs(&state, &rbf, r, 0.02, Side::Left).unwrap();
    assert_eq!(a.lyapunov, b.lyapunov);
    // Endpoint derivative rows differ between backends, so Φ only agrees roughly.
    assert!((a.phi - b.phi).abs() <= 5e-2 * a.phi.abs().max(1e-3), "{} vs {}", a.phi, b.phi);
}

#[test]
fn closed_loop_records_satisfy_certificate() {
    let mut cfg = SimConfig::new(0.05, 200, 1e-3, 0.2);
    cfg.convection = Convection::PlusLinear;
    cfg.reaction = ReactionSpec::new(vec![ReactionTerm { coefficient: 2.0, power: 1 }]).unwrap();
    cfg.initial = sine(4.0);
    let spec = ControllerSpec::new(ControllerKind::Counter, AlphaSpec::new(1.0, 1.0).unwrap(), 0.05);
    cfg.loop_mode = LoopMode::Closed(spec);
    let res = run(&cfg).unwrap();

    let ctl = make_controller(spec).unwrap();
    let first = &res.series[0];
    assert_eq!(first.control, ctl.control(&first.inputs()).unwrap());
    // The record appended at blow-up carries no Φ and is excluded.
    let checked = if res.outcome.is_blow_up() { &res.series[..res.series.len() - 1] } else { &res.series[..] };
    assert!(!checked.is_empty());
    assert!(certificate_violations(checked, &ctl, 1e-9).unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zero_state_is_an_equilibrium(
        eps in 1e-3f64..1.0,
        n in 8usize..60,
        conv in 0usize..7,
        coeff in -5.0f64..5.0,
        power in 1u32..5,
    ) {
        let mut cfg = SimConfig::new(eps, n, 1e-3, 0.01);
        cfg.convection = [
            Convection::None,
            Convection::PlusSquare,
            Convection::MinusSquare,
            Convection::PlusLinear,
            Convection::PlusCube,
            Convection::MinusLinear,
            Convection::MinusCube,
        ][conv];
        cfg.reaction = ReactionSpec::new(vec![ReactionTerm { coefficient: coeff, power }]).unwrap();
        let ops = cfg.build_ops().unwrap();
        let sim = Simulator::new(&cfg, &ops).unwrap();
        let mut state = GridState::zeros(ops.grid());
        for _ in 0..10 {
            state = sim.step(&state, 0.0);
        }
        prop_assert!(state.values().iter().all(|&u| u == 0.0));
    }
}
