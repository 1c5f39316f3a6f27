//! Entanglement diagnostics. All entropies are von Neumann entropies in bits.

use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitLayout, CompiledCircuit, ParamVector, RegisterSpec};
use crate::error::{Error, Result};
use crate::qcore::{partial_trace, DensityMatrix, StateVector, MAX_QUBITS};
use crate::scalar::{cre, Real, ENTROPY_CLIP};

/// A cut of the register into a contiguous block `alpha` and its complement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    alpha: Vec<usize>,
    beta: Vec<usize>,
}

impl Partition {
    /// `alpha` must be a non-empty, contiguous, strict subset of `0..n`.
    pub fn new(n: usize, alpha: Vec<usize>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() >= n {
            return Err(Error::arg(format!("alpha {alpha:?} must be a non-empty strict subset of {n} qubits")));
        }
        if alpha.windows(2).any(|w| w[1] != w[0] + 1) || alpha[alpha.len() - 1] >= n {
            return Err(Error::arg(format!("alpha {alpha:?} must be a contiguous run inside 0..{n}")));
        }
        let beta = (0..n).filter(|q| !alpha.contains(q)).collect();
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn beta(&self) -> &[usize] {
        &self.beta
    }

    pub fn n(&self) -> usize {
        self.alpha.len() + self.beta.len()
    }
}

/// `(n−1)/2` contiguous qubits (rounded down, at least one) holding as much
/// of `R_C` as possible. Ties go to the window whose start is closest to the
/// first cost qubit, then to the lower start.
pub fn default_partition(register: &RegisterSpec) -> Result<Partition> {
    let n = register.n();
    if n < 2 {
        return Err(Error::config(format!("cannot bipartition {n} qubit(s)")));
    }
    let size = ((n - 1) / 2).max(1);
    let cost = register.cost_qubits();
    let overlap = |s: usize| (s..s + size).filter(|q| cost.contains(q)).count();
    let start = (0..=n - size)
        .min_by_key(|&s| (std::cmp::Reverse(overlap(s)), s.abs_diff(register.cost_offset()), s))
        .expect("at least one window");
    Partition::new(n, (start..start + size).collect())
}

/// `−Tr ρ log₂ ρ`; eigenvalues are clipped to `[0, 1]` and those below
/// `ENTROPY_CLIP` dropped.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    Ok(entropy_of_spectrum(&rho.spectrum()?))
}

pub fn entropy_of_spectrum<T: Real>(eigenvalues: &[T]) -> T {
    let clip = T::lit(ENTROPY_CLIP);
    let s: T = eigenvalues
        .iter()
        .map(|&p| p.min(T::one()))
        .filter(|&p| p >= clip)
        .map(|p| -p * p.log2())
        .sum();
    s.max(T::zero())
}

/// Entropy of the reduced state on `keep` (sorted). The empty and full sets
/// give 0. The smaller side is traced since both sides share a spectrum.
pub fn subsystem_entropy<T: Real>(state: &StateVector<T>, keep: &[usize]) -> Result<T> {
    let n = state.n();
    if keep.iter().any(|&q| q >= n) {
        return Err(Error::arg(format!("qubits {keep:?} out of range for n={n}")));
    }
    if keep.is_empty() || keep.len() == n {
        return Ok(T::zero());
    }
    if 2 * keep.len() > n {
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        return von_neumann_entropy(&partial_trace(state, &rest)?);
    }
    von_neumann_entropy(&partial_trace(state, keep)?)
}

/// `S = −Tr ρ_α log₂ ρ_α`.
pub fn bipartite_entropy<T: Real>(state: &StateVector<T>, partition: &Partition) -> Result<T> {
    if partition.n() != state.n() {
        return Err(Error::arg(format!("{}-qubit partition for a {}-qubit state", partition.n(), state.n())));
    }
    von_neumann_entropy(&partial_trace(state, partition.alpha())?)
}

/// `S_N = Σ_{q ∈ R_N} S(R_C) + S(q) − S(R_C ∪ q)`.
pub fn mutual_information_sum<T: Real>(state: &StateVector<T>, register: &RegisterSpec) -> Result<T> {
    if register.n() != state.n() {
        return Err(Error::arg(format!("{}-qubit register for a {}-qubit state", register.n(), state.n())));
    }
    if register.n_noncost() == 0 {
        return Err(Error::config("mutual information sum needs at least one non-cost qubit"));
    }
    let cost: Vec<usize> = register.cost_qubits().collect();
    let s_c = subsystem_entropy(state, &cost)?;
    let mut total = T::zero();
    for q in register.noncost_qubits() {
        let mut joint = cost.clone();
        joint.push(q);
        joint.sort_unstable();
        total += s_c + subsystem_entropy(state, &[q])? - subsystem_entropy(state, &joint)?;
    }
    Ok(total)
}

/// `(1/|E|) Σ_{i∈E} |sin θ_i|`.
pub fn mixing_metric<T: Real>(theta: &ParamVector<T>, entangling: &[usize]) -> Result<T> {
    if entangling.is_empty() {
        return Err(Error::arg("mixing metric over an empty angle set"));
    }
    if let Some(&i) = entangling.iter().find(|&&i| i >= theta.len()) {
        return Err(Error::arg(format!("angle index {i} out of {}", theta.len())));
    }
    let s: T = entangling.iter().map(|&i| theta.get(i).sin().abs()).sum();
    Ok(s / T::lit(entangling.len() as f64))
}

/// `n` Bell pairs `Σ_j |j⟩|j⟩ / √(2^n)` over input qubits `0..n` and output
/// qubits `n..2n`.
pub(crate) fn maximally_entangled<T: Real>(n: usize) -> Result<StateVector<T>> {
    check_choi_size(n)?;
    let d = 1usize << n;
    let amp = cre(T::one() / T::lit(d as f64).sqrt());
    let mut a = vec![cre(T::zero()); d * d];
    for j in 0..d {
        a[(j << n) | j] = amp;
    }
    StateVector::from_amplitudes(a)
}

pub(crate) fn check_choi_size(n: usize) -> Result<()> {
    if 2 * n > MAX_QUBITS {
        return Err(Error::config(format!("Choi state of {n} qubits needs {} > {MAX_QUBITS} qubits", 2 * n)));
    }
    Ok(())
}

/// Choi state of `U(Θ)`: amplitude at (input `j`, output `i`) is `U[i][j]/√(2^n)`.
pub fn choi_state<T: Real>(layout: &CircuitLayout, theta: &ParamVector<T>) -> Result<StateVector<T>> {
    let compiled = CompiledCircuit::new(layout, theta)?;
    let mut psi = maximally_entangled(layout.n())?;
    compiled.apply_range(&mut psi, 0..compiled.len(), layout.n());
    Ok(psi)
}

/// `S_C` read off a Choi state: the entropy of the input and output copies
/// of `R_C` together.
pub fn collective_entropy_of<T: Real>(choi: &StateVector<T>, register: &RegisterSpec) -> Result<T> {
    let n = register.n();
    if choi.n() != 2 * n {
        return Err(Error::arg(format!("{}-qubit Choi state for a {n}-qubit register", choi.n())));
    }
    let mut keep: Vec<usize> = register.cost_qubits().collect();
    keep.extend(register.cost_qubits().map(|q| q + n));
    subsystem_entropy(choi, &keep)
}

/// `S_C = −Tr P_C log₂ P_C` with `P_C` the Choi state reduced to the `2n_C`
/// cost-register qubits.
pub fn collective_entropy<T: Real>(layout: &CircuitLayout, theta: &ParamVector<T>) -> Result<T> {
    collective_entropy_of(&choi_state(layout, theta)?, layout.register())
}
