use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use bplab::gradients::grad_cost;
use bplab::training::*;
use bplab::*;

/// n=2 with one gate. θ_1 rotates |10⟩,|11⟩ only, so on |00⟩ the output is
/// unchanged: loss ⟨Z_1⟩ = 1 and every base derivative vanishes.
fn dead_angle_setup(theta1: f64) -> (CircuitLayout, ParamVectorF64, CostFunctionF64) {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(2, 1).unwrap(), 1).unwrap();
    let mut v = vec![0.0; 6];
    v[0] = theta1;
    let cost = CostFunction::RawExpectation("Z1".parse().unwrap());
    (lay, ParamVectorF64::new(v).unwrap(), cost)
}

#[test]
fn regularized_formula_on_a_single_angle() {
    let cfg = RegularizationConfig::constant(1.0);
    let (lay, theta, cost) = dead_angle_setup(FRAC_PI_2);
    assert_eq!(lay.entangling_param_indices().len(), 6);
    let base = grad_cost(&cost, &lay, &theta).unwrap();
    assert!(base.values().iter().all(|g| g.abs() < 1e-15));
    let aug = regularized_gradient(&lay, &theta, &cost, &cfg, None).unwrap();
    assert!((aug.loss - 1.0).abs() < 1e-15);
    // cos(π/2)·sign(1)·1 = 0
    assert!(aug.gradient.values().iter().all(|g| g.abs() < 1e-15));
    // penalty η = λ Σ|sin θ^E| L = 1
    assert!((aug.penalty - 1.0).abs() < 1e-15);

    let (lay, theta, cost) = dead_angle_setup(FRAC_PI_4);
    let aug = regularized_gradient(&lay, &theta, &cost, &cfg, None).unwrap();
    assert!((aug.gradient.get(0) - 0.5f64.sqrt()).abs() < 1e-15);
    assert!(aug.gradient.values()[1..].iter().all(|g| g.abs() < 1e-15));
}

#[test]
fn langevin_formula_on_a_single_angle() {
    let (lay, theta, cost) = dead_angle_setup(PI);
    let mut cfg = LangevinConfig::new(0.3, 0);
    cfg.subset = Some(vec![0]);
    let aug = langevin_gradient(&lay, &theta, &cost, &cfg).unwrap();
    assert!((aug.gradient.get(0) - 0.3).abs() < 1e-15);
    assert!(aug.gradient.values()[1..].iter().all(|g| g.abs() < 1e-15));
}

#[test]
fn zero_lambda_reduces_to_plain_gradient() {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(4, 2).unwrap(), 5).unwrap();
    let theta: ParamVectorF64 = init_params(&lay, &InitScheme::Random, 4).unwrap();
    let cost = CostFunction::AbsExpectation("Z1 X2".parse().unwrap());
    let plain = grad_cost(&cost, &lay, &theta).unwrap();
    let r = regularized_gradient(&lay, &theta, &cost, &RegularizationConfig::constant(0.0), None).unwrap();
    let l = langevin_gradient(&lay, &theta, &cost, &LangevinConfig::new(0.0, 1)).unwrap();
    assert_eq!(r.gradient, plain);
    assert_eq!(l.gradient, plain);
}

#[test]
fn amplification_factor_is_global() {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(4, 2).unwrap(), 6).unwrap();
    let theta: ParamVectorF64 = init_params(&lay, &InitScheme::Random, 8).unwrap();
    let cost = CostFunction::RawExpectation("Z1 Z2".parse().unwrap());
    let plain = grad_cost(&cost, &lay, &theta).unwrap();
    let lambda = 0.07;
    let aug = regularized_gradient(&lay, &theta, &cost, &RegularizationConfig::constant(lambda), None).unwrap();
    let sum: f64 = lay.entangling_param_indices().iter().map(|&i| theta.get(i).sin().abs()).sum();
    for i in (0..lay.num_params()).filter(|&i| !lay.is_entangling_param(i)) {
        assert!((aug.gradient.get(i) - (1.0 + lambda * sum) * plain.get(i)).abs() < 1e-12);
    }
    let cfg = LangevinConfig::with_size(lambda, 5, 3);
    let subset = cfg.resolve_subset(lay.num_params()).unwrap();
    let aug = langevin_gradient(&lay, &theta, &cost, &cfg).unwrap();
    let phi: f64 = subset.iter().map(|&i| bplab::scalar::wrap_angle(theta.get(i))).sum();
    for i in (0..lay.num_params()).filter(|i| !subset.contains(i)) {
        assert!((aug.gradient.get(i) - (1.0 + lambda * phi) * plain.get(i)).abs() < 1e-12);
    }
}

#[test]
fn eigenstate_cost_is_learned() {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(3, 3).unwrap(), 8).unwrap();
    let cost = CostFunction::RawExpectation("Z1 Z2 Z3".parse().unwrap());
    let cfg = TrainConfig::new(2000, GradientMode::Plain);
    let mut ok = 0;
    for seed in 0..5 {
        let theta0: ParamVectorF64 = init_params(&lay, &InitScheme::Random, seed).unwrap();
        let (report, _) = train(&lay, &theta0, &cost, &cfg).unwrap();
        if report.final_loss() < -0.99 {
            ok += 1;
        }
    }
    assert!(ok >= 4, "{ok}/5 seeds reached -0.99");
}

#[test]
fn pretraining_removes_collective_entanglement() {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(3, 2).unwrap(), 20).unwrap();
    let mut ok = 0;
    for seed in 0..5 {
        let theta0: ParamVectorF64 = init_params(&lay, &InitScheme::Random, seed).unwrap();
        let r = pretrain_minimize_sc(&lay, &theta0, &PretrainConfig::new(3000), None).unwrap();
        assert!(r.final_sc <= r.initial_sc);
        if r.records.iter().any(|x| x.s_c < 0.1) {
            ok += 1;
        }
    }
    assert!(ok >= 3, "{ok}/5 seeds reached S_C < 0.1");
}

#[test]
fn report_round_trips_and_writes_csv() {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(3, 1).unwrap(), 2).unwrap();
    let theta0: ParamVectorF64 = init_params(&lay, &InitScheme::Random, 0).unwrap();
    let cost = CostFunction::RawExpectation("X1".parse().unwrap());
    let (report, theta) = train(&lay, &theta0, &cost, &TrainConfig::new(5, GradientMode::Plain)).unwrap();
    assert_eq!(report.records.len(), 5);
    assert_eq!(report.final_params, theta.values());
    assert_eq!(TrainReport::from_json(&report.to_json()).unwrap(), report);
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("epoch,loss,S,mixing,grad_norm\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn single_precision_core_runs() {
    let lay = CircuitLayout::new(RegisterSpec::leftmost(3, 1).unwrap(), 3).unwrap();
    let t64: ParamVectorF64 = init_params(&lay, &InitScheme::Random, 5).unwrap();
    let t32 = ParamVectorF32::new(t64.values().iter().map(|&x| x as f32).collect()).unwrap();
    let c64 = CostFunction::RawExpectation("Z1 Y2".parse::<ObservableF64>().unwrap());
    let c32 = CostFunction::RawExpectation("Z1 Y2".parse::<ObservableSum<f32>>().unwrap());
    let g64 = grad_cost(&c64, &lay, &t64).unwrap();
    let g32 = grad_cost(&c32, &lay, &t32).unwrap();
    for i in 0..g64.len() {
        assert!((g64.get(i) - g32.get(i) as f64).abs() < 1e-4);
    }
}
