//! AMSGrad, the gradient augmentations that fight barren plateaus, the
//! training loop and `S_C` pretraining.

use std::io;
use std::time::Instant;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{gate_unitary, CircuitLayout, CompiledCircuit, InitScheme, ParamVector};
use crate::entanglement::{
    bipartite_entropy, collective_entropy_of, default_partition, maximally_entangled, mixing_metric, Partition,
};
use crate::error::{Error, Result};
use crate::gradients::{grad_cost, sample_params, value_and_grad, GradientVector, VarianceReport};
use crate::observables::CostFunction;
use crate::qcore::StateVector;
use crate::rng;
use crate::scalar::{sign0, wrap_angle, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AmsGradConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AmsGradConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl AmsGradConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid AMSGrad hyperparameters {self:?}")))
        }
    }
}

/// Moment estimates of AMSGrad. There is no bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct AmsGradState<T> {
    config: AmsGradConfig,
    m: Vec<T>,
    v: Vec<T>,
    v_hat: Vec<T>,
    steps: usize,
}

impl<T: Real> AmsGradState<T> {
    pub fn new(len: usize, config: AmsGradConfig) -> Result<Self> {
        config.validate()?;
        let z = vec![T::zero(); len];
        Ok(Self { config, m: z.clone(), v: z.clone(), v_hat: z, steps: 0 })
    }

    pub fn config(&self) -> &AmsGradConfig {
        &self.config
    }

    pub fn m(&self) -> &[T] {
        &self.m
    }

    pub fn v(&self) -> &[T] {
        &self.v
    }

    pub fn v_hat(&self) -> &[T] {
        &self.v_hat
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `m ← β1 m + (1−β1) g`, `v ← β2 v + (1−β2) g²`, `v̂ ← max(v̂, v)`,
    /// `θ ← θ − α m / (√v̂ + ε)`.
    pub fn step(&mut self, theta: &mut ParamVector<T>, g: &GradientVector<T>) -> Result<()> {
        if theta.len() != self.m.len() || g.len() != self.m.len() {
            return Err(Error::arg(format!(
                "optimizer holds {} moments, got {} angles and {} gradient entries",
                self.m.len(),
                theta.len(),
                g.len()
            )));
        }
        if !g.is_finite() {
            return Err(Error::numeric("non-finite gradient passed to AMSGrad"));
        }
        let c = &self.config;
        let (b1, b2) = (T::lit(c.beta1), T::lit(c.beta2));
        let (lr, eps) = (T::lit(c.learning_rate), T::lit(c.epsilon));
        for (i, th) in theta.values_mut().iter_mut().enumerate() {
            let gi = g.get(i);
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * gi;
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * gi * gi;
            self.v_hat[i] = self.v_hat[i].max(self.v[i]);
            *th -= lr * self.m[i] / (self.v_hat[i].sqrt() + eps);
        }
        self.steps += 1;
        Ok(())
    }
}

/// Functional form of [`AmsGradState::step`].
pub fn amsgrad_step<T: Real>(
    state: &AmsGradState<T>,
    theta: &ParamVector<T>,
    g: &GradientVector<T>,
) -> Result<(AmsGradState<T>, ParamVector<T>)> {
    let mut s = state.clone();
    let mut t = theta.clone();
    s.step(&mut t, g)?;
    Ok((s, t))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSchedule {
    #[default]
    Constant,
    /// `λ = max(floor, λ0 · clamp(L / L_ref, 0, 1))`, `L_ref` the first loss.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationConfig {
    pub lambda0: f64,
    #[serde(default)]
    pub schedule: LambdaSchedule,
    #[serde(default)]
    pub floor: f64,
}

impl RegularizationConfig {
    pub fn constant(lambda0: f64) -> Self {
        Self { lambda0, schedule: LambdaSchedule::Constant, floor: 0.0 }
    }

    pub fn adaptive(lambda0: f64, floor: f64) -> Self {
        Self { lambda0, schedule: LambdaSchedule::Adaptive, floor }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite() && self.floor >= 0.0 && self.floor <= self.lambda0) {
            return Err(Error::config(format!("invalid regularization {self:?}: need 0 <= floor <= lambda0")));
        }
        Ok(())
    }

    pub fn effective_lambda(&self, loss: f64, loss_ref: Option<f64>) -> f64 {
        match self.schedule {
            LambdaSchedule::Constant => self.lambda0,
            LambdaSchedule::Adaptive => {
                let ratio = match loss_ref {
                    Some(r) if r != 0.0 => (loss / r).clamp(0.0, 1.0),
                    Some(_) => 0.0,
                    None => 1.0,
                };
                (self.lambda0 * ratio).max(self.floor)
            }
        }
    }
}

/// Gradient of an augmented cost together with the plain loss.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedGradient<T> {
    pub loss: T,
    pub gradient: GradientVector<T>,
    /// Added cost (`η` or `G − L`); zero for the plain gradient.
    pub penalty: T,
    pub lambda: T,
}

/// `O_i = (1 + λ Σ_E |sin θ|) ∂L/∂θ_i`, plus `λ cos θ_i sign(sin θ_i) L` on
/// entangling angles.
pub fn regularized_gradient<T: Real>(
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    cost: &CostFunction<T>,
    cfg: &RegularizationConfig,
    loss_ref: Option<T>,
) -> Result<AugmentedGradient<T>> {
    cfg.validate()?;
    let (loss, mut gradient) = value_and_grad(cost, layout, theta)?;
    let lambda = T::lit(cfg.effective_lambda(loss.as_f64(), loss_ref.map(|x| x.as_f64())));
    if lambda == T::zero() {
        return Ok(AugmentedGradient { loss, gradient, penalty: T::zero(), lambda });
    }
    let ent = layout.entangling_param_indices();
    if ent.is_empty() {
        return Err(Error::config("regularization needs entangling angles, the layout has none"));
    }
    let sum: T = ent.iter().map(|&i| theta.get(i).sin().abs()).sum();
    let factor = T::one() + lambda * sum;
    for x in gradient.values_mut() {
        *x *= factor;
    }
    for &i in ent {
        let th = theta.get(i);
        gradient.values_mut()[i] += lambda * th.cos() * sign0(th.sin()) * loss;
    }
    Ok(AugmentedGradient { loss, gradient, penalty: lambda * sum * loss, lambda })
}

fn default_fraction() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    pub lambda: f64,
    /// Explicit subset; overrides `size` and `fraction`.
    #[serde(default)]
    pub subset: Option<Vec<usize>>,
    /// Number of randomly chosen angles; overrides `fraction`.
    #[serde(default)]
    pub size: Option<usize>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

impl LangevinConfig {
    pub fn new(lambda: f64, seed: u64) -> Self {
        Self { lambda, subset: None, size: None, fraction: default_fraction(), seed }
    }

    pub fn with_size(lambda: f64, size: usize, seed: u64) -> Self {
        Self { size: Some(size), ..Self::new(lambda, seed) }
    }

    /// The subset `φ` as sorted parameter indices.
    pub fn resolve_subset(&self, num_params: usize) -> Result<Vec<usize>> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::config(format!("Langevin scale must be non-negative, got {}", self.lambda)));
        }
        if let Some(s) = &self.subset {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&i| i >= num_params) {
                return Err(Error::config(format!("Langevin subset must be non-empty and below {num_params}")));
            }
            return Ok(s);
        }
        let k = match self.size {
            Some(k) => k,
            None => {
                if !(0.0..=1.0).contains(&self.fraction) {
                    return Err(Error::config(format!("Langevin fraction {} not in [0, 1]", self.fraction)));
                }
                ((self.fraction * num_params as f64).round() as usize).max(1)
            }
        };
        if k == 0 || k > num_params {
            return Err(Error::config(format!("Langevin subset of {k} from {num_params} parameters")));
        }
        let mut r = rng::stream(self.seed, "langevin_subset", 0);
        let mut s = sample(&mut r, num_params, k).into_vec();
        s.sort_unstable();
        Ok(s)
    }
}

/// `g_i = (1 + λ Σ_φ φ_j) ∂L/∂θ_i`, plus `λ sign(φ_i) L` on the subset, with
/// each `φ` wrapped onto `[0, 2π)`.
pub fn langevin_gradient<T: Real>(
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    cost: &CostFunction<T>,
    cfg: &LangevinConfig,
) -> Result<AugmentedGradient<T>> {
    let subset = cfg.resolve_subset(layout.num_params())?;
    langevin_with_subset(layout, theta, cost, T::lit(cfg.lambda), &subset)
}

fn langevin_with_subset<T: Real>(
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    cost: &CostFunction<T>,
    lambda: T,
    subset: &[usize],
) -> Result<AugmentedGradient<T>> {
    let (loss, mut gradient) = value_and_grad(cost, layout, theta)?;
    if lambda == T::zero() {
        return Ok(AugmentedGradient { loss, gradient, penalty: T::zero(), lambda });
    }
    let phis: Vec<T> = subset.iter().map(|&i| wrap_angle(theta.get(i))).collect();
    let sum: T = phis.iter().copied().sum();
    let factor = T::one() + lambda * sum;
    for x in gradient.values_mut() {
        *x *= factor;
    }
    for (&i, &phi) in subset.iter().zip(&phis) {
        gradient.values_mut()[i] += lambda * sign0(phi) * loss;
    }
    Ok(AugmentedGradient { loss, gradient, penalty: lambda * sum * loss, lambda })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GradientMode {
    #[default]
    Plain,
    Regularized(RegularizationConfig),
    Langevin(LangevinConfig),
}

impl GradientMode {
    pub fn name(&self) -> &'static str {
        match self {
            GradientMode::Plain => "plain",
            GradientMode::Regularized(_) => "regularized",
            GradientMode::Langevin(_) => "langevin",
        }
    }
}

fn default_grad_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    #[serde(default)]
    pub optimizer: AmsGradConfig,
    #[serde(default)]
    pub mode: GradientMode,
    /// Stop once the loss drops below this value.
    #[serde(default)]
    pub target_loss: Option<f64>,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
}

impl TrainConfig {
    pub fn new(epochs: usize, mode: GradientMode) -> Self {
        Self { epochs, optimizer: AmsGradConfig::default(), mode, target_loss: None, grad_tol: default_grad_tol() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Unaugmented loss `L`.
    pub loss: f64,
    /// Mean bipartite entropy of the circuit outputs over the cost's inputs.
    #[serde(rename = "S")]
    pub entropy: f64,
    /// `None` when the layout has no entangling angles.
    pub mixing: Option<f64>,
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpochBudget,
    TargetReached,
    VanishingGradient,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEcho {
    pub n: usize,
    pub cost_offset: usize,
    pub n_cost: usize,
    pub layers: usize,
}

impl LayoutEcho {
    pub fn of(layout: &CircuitLayout) -> Self {
        let r = layout.register();
        Self { n: r.n(), cost_offset: r.cost_offset(), n_cost: r.n_cost(), layers: layout.layers() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub layout: LayoutEcho,
    pub cost: String,
    pub config: TrainConfig,
    /// Sorted Langevin subset, if any.
    pub langevin_subset: Option<Vec<usize>>,
    pub records: Vec<EpochRecord>,
    pub stop: StopReason,
    pub final_params: Vec<f64>,
    pub wall_time_secs: f64,
}

impl TrainReport {
    pub const CSV_HEADER: [&'static str; 5] = ["epoch", "loss", "S", "mixing", "grad_norm"];

    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.loss)
    }

    /// First epoch whose loss satisfies `pred`.
    pub fn first_epoch_where(&self, pred: impl Fn(f64) -> bool) -> Option<usize> {
        self.records.iter().find(|r| pred(r.loss)).map(|r| r.epoch)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::arg(format!("train report: {e}")))
    }

    /// One row per epoch; floats use 17 significant digits.
    pub fn write_csv<W: io::Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        for r in &self.records {
            out.write_record([
                r.epoch.to_string(),
                fmt_f64(r.loss),
                fmt_f64(r.entropy),
                r.mixing.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.grad_norm),
            ])?;
        }
        out.flush()
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn mean_output_entropy<T: Real>(
    compiled: &CompiledCircuit<T>,
    inputs: &[StateVector<T>],
    partition: &Partition,
) -> Result<T> {
    let mut total = T::zero();
    for s in inputs {
        let mut out = s.clone();
        compiled.apply(&mut out)?;
        total += bipartite_entropy(&out, partition)?;
    }
    Ok(total / T::lit(inputs.len() as f64))
}

fn cost_inputs<T: Real>(cost: &CostFunction<T>, n: usize) -> Result<Vec<StateVector<T>>> {
    match cost {
        CostFunction::CompressorL1 { dataset, .. } => Ok(dataset.iter().map(|d| d.state.clone()).collect()),
        _ => Ok(vec![StateVector::zero_state(n)?]),
    }
}

/// AMSGrad descent from `theta0`. Every epoch logs the loss, output entropy
/// across the default partition, mixing metric and gradient norm at the
/// current parameters, then updates them.
pub fn train<T: Real>(
    layout: &CircuitLayout,
    theta0: &ParamVector<T>,
    cost: &CostFunction<T>,
    cfg: &TrainConfig,
) -> Result<(TrainReport, ParamVector<T>)> {
    if cfg.epochs < 1 {
        return Err(Error::config("training needs at least one epoch"));
    }
    cost.validate(layout.n())?;
    let start = Instant::now();
    let mut theta = theta0.clone();
    let mut opt = AmsGradState::new(theta.len(), cfg.optimizer)?;
    let partition = default_partition(layout.register())?;
    let inputs = cost_inputs(cost, layout.n())?;
    let ent = layout.entangling_param_indices();
    let subset = match &cfg.mode {
        GradientMode::Langevin(l) => Some(l.resolve_subset(layout.num_params())?),
        GradientMode::Regularized(r) => {
            r.validate()?;
            None
        }
        GradientMode::Plain => None,
    };
    let mut records = Vec::new();
    let mut loss_ref: Option<T> = None;
    let mut stop = StopReason::EpochBudget;
    for epoch in 0..cfg.epochs {
        let ctx = |e: Error| e.context(format!("epoch {epoch}"));
        let aug = match &cfg.mode {
            GradientMode::Plain => {
                let (loss, gradient) = value_and_grad(cost, layout, &theta).map_err(ctx)?;
                AugmentedGradient { loss, gradient, penalty: T::zero(), lambda: T::zero() }
            }
            GradientMode::Regularized(r) => regularized_gradient(layout, &theta, cost, r, loss_ref).map_err(ctx)?,
            GradientMode::Langevin(l) => {
                let s = subset.as_deref().expect("resolved above");
                langevin_with_subset(layout, &theta, cost, T::lit(l.lambda), s).map_err(ctx)?
            }
        };
        loss_ref.get_or_insert(aug.loss);
        let compiled = CompiledCircuit::new(layout, &theta).map_err(ctx)?;
        let entropy = mean_output_entropy(&compiled, &inputs, &partition).map_err(ctx)?;
        let mixing = if ent.is_empty() { None } else { Some(mixing_metric(&theta, ent).map_err(ctx)?.as_f64()) };
        let grad_norm = aug.gradient.norm().as_f64();
        let loss = aug.loss.as_f64();
        records.push(EpochRecord { epoch, loss, entropy: entropy.as_f64(), mixing, grad_norm });
        if cfg.target_loss.is_some_and(|t| loss < t) {
            stop = StopReason::TargetReached;
            break;
        }
        if grad_norm < cfg.grad_tol {
            stop = StopReason::VanishingGradient;
            break;
        }
        opt.step(&mut theta, &aug.gradient).map_err(ctx)?;
    }
    let report = TrainReport {
        layout: LayoutEcho::of(layout),
        cost: cost.describe(),
        config: cfg.clone(),
        langevin_subset: subset,
        records,
        stop,
        final_params: theta.values().iter().map(|x| x.as_f64()).collect(),
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, theta))
}

fn default_fd_step() -> f64 {
    1e-4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainConfig {
    pub steps: usize,
    #[serde(default)]
    pub optimizer: AmsGradConfig,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

impl PretrainConfig {
    pub fn new(steps: usize) -> Self {
        Self { steps, optimizer: AmsGradConfig::default(), fd_step: default_fd_step() }
    }
}

/// Default half-width of the probe perturbations, in radians.
pub const PROBE_SPREAD: f64 = std::f64::consts::PI / 10.0;

/// Variance of one gradient component over small random perturbations of
/// every non-entangling angle, `θ_i + U(−spread, spread)`, with the
/// entangling angles held at their current values.
#[derive(Clone, Debug)]
pub struct VarianceProbe<T> {
    pub cost: CostFunction<T>,
    pub param_index: usize,
    pub samples: usize,
    /// Half-width of the perturbation; `π` re-draws the angles uniformly.
    pub spread: f64,
    /// Probe every `every` steps (and at the last step).
    pub every: usize,
    pub seed: u64,
}

impl<T: Real> VarianceProbe<T> {
    /// Uses the same draws at every call, so successive estimates differ only
    /// through the entangling angles.
    pub fn estimate(&self, layout: &CircuitLayout, theta: &ParamVector<T>) -> Result<VarianceReport> {
        if self.param_index >= layout.num_params() {
            return Err(Error::arg(format!("probe parameter {} out of {}", self.param_index, layout.num_params())));
        }
        if !(self.spread > 0.0 && self.spread <= std::f64::consts::PI) {
            return Err(Error::config(format!("probe spread {} not in (0, π]", self.spread)));
        }
        // uniform draws on [0, 2π) mapped onto [−spread, spread)
        let scale = T::lit(self.spread / std::f64::consts::PI);
        let xs = sample_params(layout, &InitScheme::Random, self.samples, self.seed, |draw: &ParamVector<T>| {
            let mut t = theta.clone();
            for (i, x) in t.values_mut().iter_mut().enumerate() {
                if !layout.is_entangling_param(i) {
                    *x += (draw.get(i) - T::PI()) * scale;
                }
            }
            Ok(grad_cost(&self.cost, layout, &t)?.get(self.param_index).as_f64())
        })?;
        VarianceReport::from_samples(self.param_index, &xs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretrainRecord {
    pub step: usize,
    pub s_c: f64,
    pub mixing: f64,
    pub var_o1: Option<f64>,
    pub var_stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PretrainReport<T> {
    /// Iterate with the lowest `S_C` seen.
    pub theta: ParamVector<T>,
    pub best_step: usize,
    pub initial_sc: f64,
    pub final_sc: f64,
    pub records: Vec<PretrainRecord>,
    /// Probe at the returned parameters.
    pub final_probe: Option<VarianceReport>,
}

/// `S_C` and its central-difference gradient. Choi states before each gate
/// are cached so a shifted angle only replays the circuit from its gate on.
fn sc_value_and_grad<T: Real>(layout: &CircuitLayout, theta: &ParamVector<T>, h: T) -> Result<(T, Vec<T>)> {
    let n = layout.n();
    let register = layout.register();
    let compiled = CompiledCircuit::new(layout, theta)?;
    let mut prefixes = Vec::with_capacity(compiled.len());
    let mut psi = maximally_entangled::<T>(n)?;
    for g in 0..compiled.len() {
        prefixes.push(psi.clone());
        compiled.apply_range(&mut psi, g..g + 1, n);
    }
    let value = collective_entropy_of(&psi, register)?;
    let gates = layout.gates();
    let grad = (0..layout.num_params())
        .into_par_iter()
        .map(|i| {
            let (g, m) = layout.locate_param(i).expect("index within layout");
            let site = &gates[g];
            let shifted = |delta: T| -> Result<T> {
                let mut angles: Vec<T> = theta.values()[site.params()].to_vec();
                angles[m] += delta;
                let mut s = prefixes[g].clone();
                s.apply_real_pair(&gate_unitary(&angles), site.first + n);
                compiled.apply_range(&mut s, g + 1..compiled.len(), n);
                collective_entropy_of(&s, register)
            };
            Ok((shifted(h)? - shifted(-h)?) / (T::lit(2.0) * h))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok((value, grad))
}

/// Minimize the collective entanglement `S_C(Θ)` by AMSGrad on central
/// finite differences.
pub fn pretrain_minimize_sc<T: Real>(
    layout: &CircuitLayout,
    theta0: &ParamVector<T>,
    cfg: &PretrainConfig,
    probe: Option<&VarianceProbe<T>>,
) -> Result<PretrainReport<T>> {
    crate::entanglement::check_choi_size(layout.n())?;
    if !(cfg.fd_step > 0.0) {
        return Err(Error::config("finite-difference step must be positive"));
    }
    let ent = layout.entangling_param_indices();
    if ent.is_empty() {
        return Err(Error::config("layout has no entangling gates to pretrain"));
    }
    if let Some(p) = probe {
        if p.every == 0 {
            return Err(Error::config("probe interval must be at least 1"));
        }
        p.cost.validate(layout.n())?;
    }
    let h = T::lit(cfg.fd_step);
    let mut theta = theta0.clone();
    let mut opt = AmsGradState::new(theta.len(), cfg.optimizer)?;
    let mut records = Vec::with_capacity(cfg.steps + 1);
    let mut best: Option<(T, usize, ParamVector<T>)> = None;
    for step in 0..=cfg.steps {
        let ctx = |e: Error| e.context(format!("pretraining step {step}"));
        let (s_c, grad) = sc_value_and_grad(layout, &theta, h).map_err(ctx)?;
        if best.as_ref().is_none_or(|b| s_c < b.0) {
            best = Some((s_c, step, theta.clone()));
        }
        let (var_o1, var_stderr) = match probe {
            Some(p) if step % p.every == 0 || step == cfg.steps => {
                let r = p.estimate(layout, &theta).map_err(ctx)?;
                (Some(r.variance), Some(r.variance_stderr))
            }
            _ => (None, None),
        };
        let mixing = mixing_metric(&theta, ent)?.as_f64();
        records.push(PretrainRecord { step, s_c: s_c.as_f64(), mixing, var_o1, var_stderr });
        if step < cfg.steps {
            opt.step(&mut theta, &GradientVector::new(grad)).map_err(ctx)?;
        }
    }
    let (best_sc, best_step, theta) = best.expect("at least one step recorded");
    let final_probe = probe.map(|p| p.estimate(layout, &theta)).transpose()?;
    Ok(PretrainReport {
        theta,
        best_step,
        initial_sc: records[0].s_c,
        final_sc: best_sc.as_f64(),
        records,
        final_probe,
    })
}
