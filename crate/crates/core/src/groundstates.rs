//! Random long-range spin Hamiltonians and the ground-state compressor data.
//!
//! `H = Σ_{i<j} (J^z_ij σ^z_i σ^z_j + J^x_ij σ^x_i σ^x_j) + Σ_i (w_i σ^x_i + v σ^z_i)`

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{expectation, z_magnetization, LabeledState};
use crate::qcore::{hermitian_eig, CMatrix, HermitianMatrix, StateVector};
use crate::rng;
use crate::scalar::{c, cre, Real};

pub const MAX_HAMILTONIAN_QUBITS: usize = 12;

/// Tag written into dataset metadata for the coefficient distribution.
pub const DISTRIBUTION_TAG: &str = "uniform_symmetric";

/// Couplings are stored per pair `i < j` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongRangeHamiltonian<T> {
    n: usize,
    jz: Vec<T>,
    jx: Vec<T>,
    w: Vec<T>,
    v: T,
}

/// Pairs `(i, j)`, `i < j`, in storage order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

impl<T: Real> LongRangeHamiltonian<T> {
    pub fn new(n: usize, jz: Vec<T>, jx: Vec<T>, w: Vec<T>, v: T) -> Result<Self> {
        if !(1..=MAX_HAMILTONIAN_QUBITS).contains(&n) {
            return Err(Error::config(format!("Hamiltonian size {n} not in 1..={MAX_HAMILTONIAN_QUBITS}")));
        }
        let np = n * (n - 1) / 2;
        if jz.len() != np || jx.len() != np || w.len() != n {
            return Err(Error::arg(format!(
                "coefficient lengths ({}, {}, {}) do not match n={n} ({np}, {np}, {n})",
                jz.len(),
                jx.len(),
                w.len()
            )));
        }
        if jz.iter().chain(&jx).chain(&w).chain(std::iter::once(&v)).any(|x| !x.is_finite()) {
            return Err(Error::numeric("non-finite Hamiltonian coefficient"));
        }
        Ok(Self { n, jz, jx, w, v })
    }

    /// Zero Hamiltonian with only the longitudinal field `v`.
    pub fn uniform_field(n: usize, v: T) -> Result<Self> {
        let np = n * n.saturating_sub(1) / 2;
        Self::new(n, vec![T::zero(); np], vec![T::zero(); np], vec![T::zero(); n], v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn jz(&self) -> &[T] {
        &self.jz
    }

    pub fn jx(&self) -> &[T] {
        &self.jx
    }

    pub fn w(&self) -> &[T] {
        &self.w
    }

    pub fn v(&self) -> T {
        self.v
    }

    pub fn coefficient_count(&self) -> usize {
        self.jz.len() + self.jx.len() + self.w.len() + 1
    }

    pub fn coefficients(&self) -> impl Iterator<Item = T> + '_ {
        self.jz.iter().chain(&self.jx).chain(&self.w).copied().chain(std::iter::once(self.v))
    }
}

/// All coefficients i.i.d. uniform on `[−scale, scale]`, drawn in the order
/// `J^z`, `J^x`, `w`, `v` from the `hamiltonian` stream of `seed`.
pub fn random_hamiltonian<T: Real>(n: usize, seed: u64, scale: f64) -> Result<LongRangeHamiltonian<T>> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::config(format!("coefficient scale must be finite and non-negative, got {scale}")));
    }
    if !(1..=MAX_HAMILTONIAN_QUBITS).contains(&n) {
        return Err(Error::config(format!("Hamiltonian size {n} not in 1..={MAX_HAMILTONIAN_QUBITS}")));
    }
    let mut r = rng::stream(seed, "hamiltonian", 0);
    let mut draw = |k: usize| -> Vec<T> { (0..k).map(|_| T::lit(scale * r.gen_range(-1.0..=1.0))).collect() };
    let np = n * (n - 1) / 2;
    let jz = draw(np);
    let jx = draw(np);
    let w = draw(n);
    let v = draw(1)[0];
    LongRangeHamiltonian::new(n, jz, jx, w, v)
}

/// Dense `2^n × 2^n` matrix in the computational basis.
pub fn build_matrix<T: Real>(h: &LongRangeHamiltonian<T>) -> Result<HermitianMatrix<T>> {
    let n = h.n;
    let d = 1usize << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let z = |x: usize, q: usize| if x & bit(q) == 0 { T::one() } else { -T::one() };
    let pr = pairs(n);
    let mut m = CMatrix::zeros(d, d);
    for x in 0..d {
        let mut diag = T::zero();
        for (k, &(i, j)) in pr.iter().enumerate() {
            diag += h.jz[k] * z(x, i) * z(x, j);
            m[(x ^ bit(i) ^ bit(j), x)] += cre(h.jx[k]);
        }
        for q in 0..n {
            diag += h.v * z(x, q);
            m[(x ^ bit(q), x)] += cre(h.w[q]);
        }
        m[(x, x)] += cre(diag);
    }
    HermitianMatrix::new(m)
}

/// Lowest eigenpair. The phase is fixed by making the largest-magnitude
/// amplitude (lowest index among ties) real and positive.
pub fn ground_state<T: Real>(h: &LongRangeHamiltonian<T>) -> Result<(T, StateVector<T>)> {
    let hm = build_matrix(h)?;
    let eig = hermitian_eig(&hm)?;
    let energy = eig.values[0];
    let mut g = eig.vectors.column(0);
    let tie = T::lit(1e-12);
    let mut best = 0;
    for (i, a) in g.iter().enumerate() {
        if a.norm() > g[best].norm() + tie {
            best = i;
        }
    }
    let phase = g[best].conj() / g[best].norm();
    for a in g.iter_mut() {
        *a *= phase;
    }
    g[best].im = T::zero();
    let state = StateVector::normalized(g)?;
    let hg = hm.matrix().matvec(state.amplitudes())?;
    let residual = hg
        .iter()
        .zip(state.amplitudes())
        .map(|(x, y)| (x - y * c(energy, T::zero())).norm_sqr())
        .sum::<T>()
        .sqrt();
    if residual > T::spectral_tol() {
        return Err(Error::numeric(format!(
            "ground state residual {residual} exceeds {} (n={}, E={energy})",
            T::spectral_tol(),
            h.n
        )));
    }
    Ok((energy, state))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n: usize,
    pub n_g: usize,
    pub seed: u64,
    pub scale: f64,
    pub distribution: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressorSample<T> {
    pub state: StateVector<T>,
    /// `⟨(1/n) Σ σ^z_i⟩` on the ground state.
    pub label: T,
    pub energy: T,
}

/// Ground states of `N_g` random Hamiltonians with their z-magnetizations.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressorDataset<T> {
    pub meta: DatasetMeta,
    pub samples: Vec<CompressorSample<T>>,
}

#[derive(Serialize, Deserialize)]
struct SampleFile {
    label: f64,
    energy: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    meta: DatasetMeta,
    samples: Vec<SampleFile>,
}

impl<T: Real> CompressorDataset<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labeled_states(&self) -> Vec<LabeledState<T>> {
        self.samples.iter().map(|s| LabeledState { state: s.state.clone(), label: s.label }).collect()
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFile {
            meta: self.meta.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| SampleFile {
                    label: s.label.as_f64(),
                    energy: s.energy.as_f64(),
                    re: s.state.amplitudes().iter().map(|a| a.re.as_f64()).collect(),
                    im: s.state.amplitudes().iter().map(|a| a.im.as_f64()).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(s).map_err(|e| Error::arg(format!("dataset file: {e}")))?;
        let samples = file
            .samples
            .into_iter()
            .map(|s| {
                if s.re.len() != s.im.len() {
                    return Err(Error::arg("dataset sample has mismatched real and imaginary parts"));
                }
                let amps = s.re.iter().zip(&s.im).map(|(&r, &i)| c(T::lit(r), T::lit(i))).collect();
                let state = StateVector::from_amplitudes(amps)?;
                if state.n() != file.meta.n {
                    return Err(Error::arg(format!("{}-qubit sample in an n={} dataset", state.n(), file.meta.n)));
                }
                Ok(CompressorSample { state, label: T::lit(s.label), energy: T::lit(s.energy) })
            })
            .collect::<Result<Vec<_>>>()?;
        if samples.len() != file.meta.n_g {
            return Err(Error::arg(format!("dataset declares {} samples, holds {}", file.meta.n_g, samples.len())));
        }
        Ok(Self { meta: file.meta, samples })
    }
}

/// Sample `i` uses the Hamiltonian seeded by `derive_seed(seed, "dataset", i)`.
pub fn make_compressor_dataset<T: Real>(n: usize, n_g: usize, seed: u64, scale: f64) -> Result<CompressorDataset<T>> {
    if n_g < 1 {
        return Err(Error::config("compressor dataset needs at least one sample"));
    }
    let magnetization = z_magnetization::<T>(n);
    let samples = (0..n_g)
        .into_par_iter()
        .map(|i| {
            let h = random_hamiltonian::<T>(n, rng::derive_seed(seed, "dataset", i as u64), scale)?;
            let (energy, state) = ground_state(&h).map_err(|e| e.context(format!("dataset sample {i}")))?;
            let label = expectation(&state, &magnetization)?;
            Ok(CompressorSample { state, label, energy })
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = DatasetMeta { n, n_g, seed, scale, distribution: DISTRIBUTION_TAG.to_string() };
    Ok(CompressorDataset { meta, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_count_and_reproducibility() {
        let a: LongRangeHamiltonian<f64> = random_hamiltonian(5, 3, 1.0).unwrap();
        let b: LongRangeHamiltonian<f64> = random_hamiltonian(5, 3, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.coefficient_count(), 2 * 10 + 5 + 1);
        assert!(a.coefficients().all(|x| (-1.0..=1.0).contains(&x)));
        let zero: LongRangeHamiltonian<f64> = random_hamiltonian(4, 3, 0.0).unwrap();
        assert!(zero.coefficients().all(|x| x == 0.0));
        assert!(random_hamiltonian::<f64>(13, 0, 1.0).is_err());
    }

    #[test]
    fn v_only_matrix() {
        let h = LongRangeHamiltonian::uniform_field(2, 0.7f64).unwrap();
        let m = build_matrix(&h).unwrap();
        let expect = CMatrix::from_diag(&[1.4, 0.0, 0.0, -1.4]);
        assert!(m.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn single_site_w() {
        let h = LongRangeHamiltonian::new(1, vec![], vec![], vec![0.5f64], 0.0).unwrap();
        let m = build_matrix(&h).unwrap();
        assert!(m.matrix().max_abs_diff(&CMatrix::from_real(2, 2, &[0.0, 0.5, 0.5, 0.0]).unwrap()) < 1e-15);
        let (e, g) = ground_state(&h).unwrap();
        assert!((e + 0.5).abs() < 1e-12);
        let s = 1.0 / 2f64.sqrt();
        // |−⟩ up to the fixed phase: first amplitude positive
        assert!((g.amplitudes()[0].re - s).abs() < 1e-12);
        assert!((g.amplitudes()[1].re + s).abs() < 1e-12);
    }

    #[test]
    fn v_only_ground_state() {
        let h = LongRangeHamiltonian::uniform_field(3, 0.4f64).unwrap();
        let (e, g) = ground_state(&h).unwrap();
        assert!((e + 1.2).abs() < 1e-12);
        assert!((g.amplitudes()[7].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dataset_round_trip() {
        let d: CompressorDataset<f64> = make_compressor_dataset(3, 3, 5, 1.0).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.samples.iter().all(|s| (-1.0..=1.0).contains(&s.label)));
        let back = CompressorDataset::<f64>::from_json(&d.to_json()).unwrap();
        assert_eq!(back, d);
        assert!(make_compressor_dataset::<f64>(3, 0, 5, 1.0).is_err());
    }
}
