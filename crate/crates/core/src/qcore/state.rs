use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::matrix::{CMatrix, DensityMatrix};
use crate::error::{Error, Result};
use crate::scalar::{cre, Real};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 14;

/// Real 4×4 gate acting on an adjacent qubit pair.
pub type RealGate<T> = [[T; 4]; 4];

/// Normalized pure state of `n` qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index: basis state
/// `|b_0 b_1 … b_{n-1}⟩` lives at index `Σ b_q 2^{n-1-q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real + Serialize + for<'a> Deserialize<'a>")]
pub struct StateVector<T> {
    n: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        if index >= 1 << n {
            return Err(Error::arg(format!("basis index {index} out of range for {n} qubits")));
        }
        let mut amplitudes = vec![Complex::default(); 1 << n];
        amplitudes[index] = cre(T::one());
        Ok(Self { n, amplitudes })
    }

    /// Wrap amplitudes that are already normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::arg(format!("amplitude count {len} is not 2^n with n >= 1")));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n)?;
        let s = Self { n, amplitudes };
        let norm = s.norm_sqr();
        if !((norm - T::one()).abs() <= T::structural_tol()) {
            return Err(Error::arg(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(s)
    }

    /// Normalize arbitrary non-zero amplitudes.
    pub fn normalized(mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::arg("cannot normalize a zero or non-finite vector"));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::from_amplitudes(amplitudes)
    }

    /// Product state from single-qubit amplitudes `(a_q, b_q)`, qubit 0 first.
    pub fn product(qubits: &[[Complex<T>; 2]]) -> Result<Self> {
        let mut amps = vec![cre(T::one())];
        for q in qubits {
            amps = amps.iter().flat_map(|&a| [a * q[0], a * q[1]]).collect();
        }
        Self::normalized(amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// In-place `(I ⊗ gate ⊗ I)` on qubits `(i, i+1)` without a unitarity check.
    pub(crate) fn apply_pair_unchecked(&mut self, gate: &CMatrix<T>, i: usize) {
        let g: [[Complex<T>; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| gate[(r, c)]));
        for_each_pair_group(self.n, i, |idx| {
            let a = &mut self.amplitudes;
            let v = [a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]];
            for r in 0..4 {
                a[idx[r]] = g[r][0] * v[0] + g[r][1] * v[1] + g[r][2] * v[2] + g[r][3] * v[3];
            }
        });
    }

    /// In-place real gate on qubits `(i, i+1)`.
    #[inline]
    pub(crate) fn apply_real_pair(&mut self, g: &RealGate<T>, i: usize) {
        apply_real_gate(&mut self.amplitudes, self.n, g, i);
    }

}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::config(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// Visit the four amplitude indices `|..00..⟩, |..01..⟩, |..10..⟩, |..11..⟩`
/// of every group touched by a gate on `(i, i+1)`.
#[inline]
pub(crate) fn for_each_pair_group(n: usize, i: usize, mut f: impl FnMut([usize; 4])) {
    debug_assert!(i + 1 < n);
    let low = 1usize << (n - 2 - i); // stride of qubit i+1
    let block = low << 2;
    let dim = 1usize << n;
    let mut hi = 0;
    while hi < dim {
        for lo in 0..low {
            let b = hi + lo;
            f([b, b + low, b + 2 * low, b + 3 * low]);
        }
        hi += block;
    }
}

#[inline]
pub(crate) fn apply_real_gate<T: Real>(a: &mut [Complex<T>], n: usize, g: &RealGate<T>, i: usize) {
    for_each_pair_group(n, i, |idx| {
        let v = [a[idx[0]], a[idx[1]], a[idx[2]], a[idx[3]]];
        for r in 0..4 {
            let row = &g[r];
            a[idx[r]] = v[0] * row[0] + v[1] * row[1] + v[2] * row[2] + v[3] * row[3];
        }
    });
}

/// `(I ⊗ gate ⊗ I)·state` for a 4×4 unitary on the adjacent pair `(i, i+1)`.
pub fn apply_two_qubit<T: Real>(
    state: &StateVector<T>,
    gate: &CMatrix<T>,
    pair: (usize, usize),
) -> Result<StateVector<T>> {
    if gate.rows() != 4 || gate.cols() != 4 {
        return Err(Error::arg("two-qubit gate must be 4x4"));
    }
    let defect = gate.unitarity_defect();
    if !(defect <= T::structural_tol()) {
        return Err(Error::arg(format!("gate is not unitary (defect {defect})")));
    }
    let (i, j) = pair;
    if j != i + 1 {
        return Err(Error::Topology(format!(
            "gate on ({i}, {j}); only adjacent pairs (i, i+1) are supported"
        )));
    }
    if j >= state.n() {
        return Err(Error::arg(format!("pair ({i}, {j}) outside a {}-qubit state", state.n())));
    }
    let mut out = state.clone();
    out.apply_pair_unchecked(gate, i);
    Ok(out)
}

/// `Tr_complement |ψ⟩⟨ψ|`, keeping the qubits in `keep` (sorted, qubit order
/// preserved in the reduced index).
pub fn partial_trace<T: Real>(state: &StateVector<T>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    let n = state.n();
    if keep.is_empty() || keep.len() >= n {
        return Err(Error::arg(format!(
            "keep set must be a non-empty strict subset of {n} qubits, got {keep:?}"
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep[keep.len() - 1] >= n {
        return Err(Error::arg(format!("keep set {keep:?} must be sorted, unique and < {n}")));
    }
    let mut env = Vec::with_capacity(n - keep.len());
    let mut it = keep.iter().peekable();
    for q in 0..n {
        if it.peek() == Some(&&q) {
            it.next();
        } else {
            env.push(q);
        }
    }
    let spread = |bits: usize, qubits: &[usize]| -> usize {
        let k = qubits.len();
        qubits
            .iter()
            .enumerate()
            .filter(|(pos, _)| bits >> (k - 1 - pos) & 1 == 1)
            .map(|(_, &q)| 1usize << (n - 1 - q))
            .sum()
    };
    let dk = 1usize << keep.len();
    let de = 1usize << env.len();
    let keep_off: Vec<usize> = (0..dk).map(|b| spread(b, keep)).collect();
    let env_off: Vec<usize> = (0..de).map(|b| spread(b, &env)).collect();
    // reshape ψ into a dk × de matrix M, then ρ = M M†
    let amps = state.amplitudes();
    let m: Vec<Complex<T>> = keep_off
        .iter()
        .flat_map(|&ko| env_off.iter().map(move |&eo| amps[ko + eo]))
        .collect();
    let mut rho = CMatrix::zeros(dk, dk);
    for a in 0..dk {
        let ra = &m[a * de..(a + 1) * de];
        for b in a..dk {
            let rb = &m[b * de..(b + 1) * de];
            let v: Complex<T> = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum();
            rho[(a, b)] = v;
            rho[(b, a)] = v.conj();
        }
        rho[(a, a)].im = T::zero();
    }
    DensityMatrix::new(rho)
}
