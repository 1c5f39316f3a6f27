//! Analytic circuit gradients and Monte-Carlo gradient statistics.
//!
//! Gradients use a generator-insertion adjoint sweep: one forward pass to
//! `|ψ_out⟩`, then a reverse pass carrying `|λ⟩ = M|ψ_out⟩` back through the
//! gates. At gate `g` the six angle derivatives are
//! `2 Re ⟨λ_g| ∂u_g/∂θ_m |ψ_{g-1}⟩`, read off a 4×4 overlap matrix so each
//! gate costs three passes over the state.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{gate_derivatives, init_params, output_state, CircuitLayout, CompiledCircuit, InitScheme, ParamVector};
use crate::entanglement::{bipartite_entropy, default_partition};
use crate::error::{Error, Result};
use crate::observables::{cost_value, expectation, CostFunction, ObservableSum};
use crate::qcore::{apply_real_gate, RealGate, StateVector};
use crate::rng;
use crate::scalar::{pairwise_sum, Real};

/// `∂L/∂θ_i` in parameter-vector order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientVector<T> {
    values: Vec<T>,
}

impl<T: Real> GradientVector<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![T::zero(); len] }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|x| *x * *x).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Largest `|a − b| / max(|b|, floor)` over components.
    pub fn max_relative_error(&self, reference: &Self, floor: T) -> T {
        self.values
            .iter()
            .zip(&reference.values)
            .map(|(a, b)| (*a - *b).abs() / b.abs().max(floor))
            .fold(T::zero(), T::max)
    }
}

fn transpose<T: Real>(g: &RealGate<T>) -> RealGate<T> {
    std::array::from_fn(|r| std::array::from_fn(|c| g[c][r]))
}

/// Value and gradient of `⟨in|U† M U|in⟩`.
pub(crate) fn expectation_and_grad<T: Real>(
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    compiled: &CompiledCircuit<T>,
    input: &StateVector<T>,
    obs: &ObservableSum<T>,
) -> Result<(T, Vec<T>)> {
    let n = layout.n();
    let mut out = input.clone();
    compiled.apply(&mut out)?;
    let value = expectation(&out, obs)?;
    let mut lam = obs.apply(&out)?;
    let mut psi = out.into_amplitudes();
    let mut grad = vec![T::zero(); layout.num_params()];
    let two = T::lit(2.0);
    for (g, site) in layout.gates().iter().enumerate().rev() {
        let (mat, first) = compiled.gate(g);
        let mt = transpose(mat);
        apply_real_gate(&mut psi, n, &mt, first);
        // w[a][b] = Σ_groups conj(λ_a) ψ_b
        let mut w = [[Complex::<T>::default(); 4]; 4];
        crate::qcore::for_each_pair_group(n, first, |idx| {
            for a in 0..4 {
                let la = lam[idx[a]].conj();
                for b in 0..4 {
                    w[a][b] += la * psi[idx[b]];
                }
            }
        });
        let derivs = gate_derivatives(&theta.values()[site.params()]);
        for (m, d) in derivs.iter().enumerate() {
            let mut acc = T::zero();
            for a in 0..4 {
                for b in 0..4 {
                    acc += d[a][b] * w[a][b].re;
                }
            }
            grad[site.param_offset + m] = two * acc;
        }
        apply_real_gate(&mut lam, n, &mt, first);
    }
    Ok((value, grad))
}

/// Exact `∂⟨M⟩/∂θ_i` for every angle, with `⟨M⟩` taken on `U(Θ)|input⟩`.
pub fn grad_expectation<T: Real>(
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    input: &StateVector<T>,
    obs: &ObservableSum<T>,
) -> Result<GradientVector<T>> {
    if input.n() != layout.n() {
        return Err(Error::arg(format!("{}-qubit input for a {}-qubit circuit", input.n(), layout.n())));
    }
    obs.check_qubits(layout.n())?;
    let compiled = CompiledCircuit::new(layout, theta)?;
    let (_, g) = expectation_and_grad(layout, theta, &compiled, input, obs)?;
    Ok(GradientVector::new(g))
}

/// Loss and its gradient. Absolute values use `sign(0) = 0`.
pub fn value_and_grad<T: Real>(
    cost: &CostFunction<T>,
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
) -> Result<(T, GradientVector<T>)> {
    cost.validate(layout.n())?;
    let compiled = CompiledCircuit::new(layout, theta)?;
    let inputs = cost.inputs(layout.n())?;
    let per_input: Vec<(T, Vec<T>)> = inputs
        .par_iter()
        .map(|(s, _)| expectation_and_grad(layout, theta, &compiled, s, cost.observable()))
        .collect::<Result<_>>()?;
    let values: Vec<T> = per_input.iter().map(|p| p.0).collect();
    let labels: Vec<T> = inputs.iter().map(|p| p.1).collect();
    let outer = cost.outer_derivatives(&values, &labels);
    let p = layout.num_params();
    let grad = (0..p)
        .map(|i| {
            let terms: Vec<T> = per_input.iter().zip(&outer).map(|((_, g), w)| *w * g[i]).collect();
            pairwise_sum(&terms)
        })
        .collect();
    let grad = GradientVector::new(grad);
    if !grad.is_finite() {
        return Err(Error::numeric("non-finite gradient"));
    }
    Ok((cost.combine(&values, &labels), grad))
}

/// `∂L/∂θ_i = f'(⟨M_C⟩)·∂⟨M_C⟩/∂θ_i`, summed over dataset samples for the
/// compressor loss.
pub fn grad_cost<T: Real>(
    cost: &CostFunction<T>,
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
) -> Result<GradientVector<T>> {
    value_and_grad(cost, layout, theta).map(|(_, g)| g)
}

/// Central differences `(f(θ+h) − f(θ−h)) / 2h`, one coordinate at a time.
pub fn finite_difference_grad<T: Real>(
    cost: &CostFunction<T>,
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    h: T,
) -> Result<GradientVector<T>> {
    if !(h > T::zero()) {
        return Err(Error::arg("finite-difference step must be positive"));
    }
    let values = (0..theta.len())
        .into_par_iter()
        .map(|i| {
            let up = cost_value(cost, layout, &theta.shifted(i, h))?;
            let down = cost_value(cost, layout, &theta.shifted(i, -h))?;
            Ok((up - down) / (T::lit(2.0) * h))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(GradientVector::new(values))
}

/// Sample mean and variance of one gradient component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub param_index: usize,
    pub samples: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Jackknife standard error of `variance`.
    pub variance_stderr: f64,
}

impl VarianceReport {
    pub fn from_samples(param_index: usize, xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 3 {
            return Err(Error::arg(format!("need at least 3 samples for a variance error, got {n}")));
        }
        let nf = n as f64;
        let s1 = pairwise_sum(xs);
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let s2 = pairwise_sum(&sq);
        let mean = s1 / nf;
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let variance = pairwise_sum(&dev) / (nf - 1.0);
        // leave-one-out variances from the running sums
        let loo: Vec<f64> = xs
            .iter()
            .map(|x| {
                let a = s1 - x;
                let b = s2 - x * x;
                ((b - a * a / (nf - 1.0)) / (nf - 2.0)).max(0.0)
            })
            .collect();
        let loo_mean = pairwise_sum(&loo) / nf;
        let spread: Vec<f64> = loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).collect();
        let variance_stderr = ((nf - 1.0) / nf * pairwise_sum(&spread)).sqrt();
        Ok(Self { param_index, samples: n, mean, variance, variance_stderr })
    }

    /// Standard error of the mean.
    pub fn mean_stderr(&self) -> f64 {
        (self.variance / self.samples as f64).sqrt()
    }

    /// Normal-approximation confidence interval on the variance.
    pub fn variance_interval(&self, z: f64) -> (f64, f64) {
        (self.variance - z * self.variance_stderr, self.variance + z * self.variance_stderr)
    }
}

/// Index of `θ_4` of the first gate. It is the first angle that moves
/// `|0…0⟩`: `θ_1..θ_3` rotate planes orthogonal to `|00⟩`, so their
/// derivatives vanish identically on that input.
pub const FIRST_ACTIVE_ANGLE: usize = 3;

/// z-score of a two-sided 99% normal interval.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Evaluate `f` on `n_samples` parameter draws. Draw `i` uses the seed
/// `derive_seed(seed, "sample", i)`, so the output is independent of the
/// thread schedule.
pub fn sample_params<T, R, F>(
    layout: &CircuitLayout,
    scheme: &InitScheme,
    n_samples: usize,
    seed: u64,
    f: F,
) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(&ParamVector<T>) -> Result<R> + Sync,
{
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let theta = init_params(layout, scheme, rng::derive_seed(seed, "sample", i as u64))?;
            f(&theta)
        })
        .collect()
}

/// Monte-Carlo mean and variance of `∂L/∂θ_{param_index}` over `scheme`.
pub fn grad_variance_estimate<T: Real>(
    layout: &CircuitLayout,
    cost: &CostFunction<T>,
    scheme: &InitScheme,
    param_index: usize,
    n_samples: usize,
    seed: u64,
) -> Result<VarianceReport> {
    if param_index >= layout.num_params() {
        return Err(Error::arg(format!("parameter {param_index} out of {}", layout.num_params())));
    }
    let xs = sample_params(layout, scheme, n_samples, seed, |theta: &ParamVector<T>| {
        Ok(grad_cost(cost, layout, theta)?.get(param_index).as_f64())
    })?;
    VarianceReport::from_samples(param_index, &xs)
}

/// Gradient statistics together with the mean output entropy across the
/// default partition, both from the same parameter draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceEntropyReport {
    pub gradient: VarianceReport,
    pub mean_entropy: f64,
}

pub fn grad_variance_with_entropy<T: Real>(
    layout: &CircuitLayout,
    cost: &CostFunction<T>,
    scheme: &InitScheme,
    param_index: usize,
    n_samples: usize,
    seed: u64,
) -> Result<VarianceEntropyReport> {
    if param_index >= layout.num_params() {
        return Err(Error::arg(format!("parameter {param_index} out of {}", layout.num_params())));
    }
    let partition = default_partition(layout.register())?;
    let pairs = sample_params(layout, scheme, n_samples, seed, |theta: &ParamVector<T>| {
        let g = grad_cost(cost, layout, theta)?.get(param_index).as_f64();
        let s = bipartite_entropy(&output_state(layout, theta)?, &partition)?.as_f64();
        Ok((g, s))
    })?;
    let gs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ss: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(VarianceEntropyReport {
        gradient: VarianceReport::from_samples(param_index, &gs)?,
        mean_entropy: pairwise_sum(&ss) / ss.len() as f64,
    })
}
