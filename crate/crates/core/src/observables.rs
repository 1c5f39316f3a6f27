//! Pauli-string observables, expectation values and cost functions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::circuit::{CircuitLayout, CompiledCircuit, ParamVector, RegisterSpec};
use crate::error::{Error, Result};
use crate::qcore::StateVector;
use crate::scalar::{c, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Product of single-qubit Paulis times a real coefficient. Factors are
/// sorted by qubit and identities are omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString<T> {
    factors: Vec<(usize, Pauli)>,
    coefficient: T,
}

impl<T: Real> PauliString<T> {
    pub fn new(coefficient: T, factors: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut factors: Vec<_> = factors.into_iter().collect();
        factors.sort();
        if factors.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::arg("a Pauli string may act on each qubit at most once"));
        }
        Ok(Self { factors, coefficient })
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    fn max_qubit(&self) -> Option<usize> {
        self.factors.last().map(|f| f.0)
    }

    // Bit masks over the amplitude index for an n-qubit register.
    fn masks(&self, n: usize) -> (usize, usize, usize) {
        let (mut flip, mut zm, mut ym) = (0, 0, 0);
        for &(q, p) in &self.factors {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    ym |= bit;
                }
                Pauli::Z => zm |= bit,
            }
        }
        (flip, zm, ym)
    }

    /// `P|ψ⟩` accumulated into `out` with weight `coefficient`.
    ///
    /// `(P ψ)[i] = i^{n_Y} (-1)^{|i ∧ Z| + |¬i ∧ Y|} ψ[i ⊕ flip]`.
    fn accumulate(&self, psi: &[Complex<T>], n: usize, out: &mut [Complex<T>]) {
        let (flip, zm, ym) = self.masks(n);
        let ny = ym.count_ones() % 4;
        let base = match ny {
            0 => c(T::one(), T::zero()),
            1 => c(T::zero(), T::one()),
            2 => c(-T::one(), T::zero()),
            _ => c(T::zero(), -T::one()),
        } * self.coefficient;
        for (i, o) in out.iter_mut().enumerate() {
            let odd = ((i & zm).count_ones() + (!i & ym).count_ones()) & 1 == 1;
            let v = psi[i ^ flip] * base;
            *o += if odd { -v } else { v };
        }
    }
}

impl<T: Real> fmt::Display for PauliString<T> {
    /// 1-based, e.g. `0.5*Z1 Z2 X3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient != T::one() {
            write!(f, "{}*", self.coefficient)?;
        }
        if self.factors.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self.factors.iter().map(|(q, p)| format!("{p:?}{}", q + 1)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Real-weighted sum of Pauli strings; Hermitian by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSum<T> {
    terms: Vec<PauliString<T>>,
}

impl<T: Real> ObservableSum<T> {
    pub fn new(terms: Vec<PauliString<T>>) -> Self {
        Self { terms }
    }

    pub fn single(term: PauliString<T>) -> Self {
        Self { terms: vec![term] }
    }

    /// Unit-coefficient product of one Pauli axis over `qubits`.
    pub fn product(axis: Pauli, qubits: impl IntoIterator<Item = usize>) -> Result<Self> {
        Ok(Self::single(PauliString::new(T::one(), qubits.into_iter().map(|q| (q, axis)))?))
    }

    pub fn terms(&self) -> &[PauliString<T>] {
        &self.terms
    }

    pub fn check_qubits(&self, n: usize) -> Result<()> {
        match self.terms.iter().filter_map(|t| t.max_qubit()).max() {
            Some(q) if q >= n => Err(Error::arg(format!("observable acts on qubit {q} of a {n}-qubit state"))),
            _ => Ok(()),
        }
    }

    /// Amplitudes of `M|ψ⟩` (not normalized in general).
    pub fn apply(&self, state: &StateVector<T>) -> Result<Vec<Complex<T>>> {
        self.check_qubits(state.n())?;
        let mut out = vec![Complex::default(); state.dim()];
        for t in &self.terms {
            t.accumulate(state.amplitudes(), state.n(), &mut out);
        }
        Ok(out)
    }

    /// Dense matrix over `n` qubits, built by Kronecker products.
    pub fn dense(&self, n: usize) -> Result<crate::qcore::CMatrix<T>> {
        use crate::qcore::CMatrix;
        self.check_qubits(n)?;
        let (z, o) = (T::zero(), T::one());
        let single = |p: Option<Pauli>| -> CMatrix<T> {
            let d = match p {
                None => [c(o, z), c(z, z), c(z, z), c(o, z)],
                Some(Pauli::X) => [c(z, z), c(o, z), c(o, z), c(z, z)],
                Some(Pauli::Y) => [c(z, z), c(z, -o), c(z, o), c(z, z)],
                Some(Pauli::Z) => [c(o, z), c(z, z), c(z, z), c(-o, z)],
            };
            CMatrix::from_rows(2, 2, d.to_vec()).expect("2x2")
        };
        let mut total = CMatrix::zeros(1 << n, 1 << n);
        for t in &self.terms {
            let mut m = CMatrix::identity(1);
            for q in 0..n {
                let p = t.factors.iter().find(|f| f.0 == q).map(|f| f.1);
                m = m.kron(&single(p));
            }
            total = total.add(&m.scale(c(t.coefficient, z)))?;
        }
        Ok(total)
    }
}

impl<T: Real> fmt::Display for ObservableSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<T: Real> FromStr for ObservableSum<T> {
    type Err = Error;

    /// Terms joined by `+`, each an optional `coef*` followed by factors such
    /// as `Z1 Z2 X3`. Qubit labels are 1-based.
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for raw in s.split('+') {
            let raw = raw.trim();
            if raw.is_empty() {
                return Err(Error::arg(format!("empty term in observable `{s}`")));
            }
            let (coef, body) = match raw.split_once('*') {
                Some((c, b)) => {
                    let v: f64 = c.trim().parse().map_err(|_| Error::arg(format!("bad coefficient `{c}`")))?;
                    (T::lit(v), b)
                }
                None => (T::one(), raw),
            };
            let mut factors = Vec::new();
            for tok in body.split_whitespace() {
                let mut chars = tok.chars();
                let axis = match chars.next().map(|ch| ch.to_ascii_uppercase()) {
                    Some('X') => Pauli::X,
                    Some('Y') => Pauli::Y,
                    Some('Z') => Pauli::Z,
                    _ => return Err(Error::arg(format!("bad Pauli factor `{tok}`"))),
                };
                let q: usize = chars
                    .as_str()
                    .parse()
                    .map_err(|_| Error::arg(format!("bad qubit label in `{tok}`")))?;
                if q == 0 {
                    return Err(Error::arg(format!("qubit labels are 1-based, got `{tok}`")));
                }
                factors.push((q - 1, axis));
            }
            if factors.is_empty() {
                return Err(Error::arg(format!("term `{raw}` has no Pauli factors")));
            }
            terms.push(PauliString::new(coef, factors)?);
        }
        Ok(Self { terms })
    }
}

/// `⟨ψ|M|ψ⟩`
pub fn expectation<T: Real>(state: &StateVector<T>, obs: &ObservableSum<T>) -> Result<T> {
    let m_psi = obs.apply(state)?;
    Ok(state.amplitudes().iter().zip(&m_psi).map(|(a, b)| (a.conj() * b).re).sum())
}

/// `(1/n) Σ_i σ_i^z` over all qubits.
pub fn z_magnetization<T: Real>(n: usize) -> ObservableSum<T> {
    let w = T::one() / T::lit(n as f64);
    ObservableSum::new((0..n).map(|q| PauliString { factors: vec![(q, Pauli::Z)], coefficient: w }).collect())
}

/// `(1/n_C) Σ_{i ∈ R_C} σ_i^x`.
pub fn x_magnetization<T: Real>(register: &RegisterSpec) -> ObservableSum<T> {
    let w = T::one() / T::lit(register.n_cost() as f64);
    ObservableSum::new(
        register.cost_qubits().map(|q| PauliString { factors: vec![(q, Pauli::X)], coefficient: w }).collect(),
    )
}

/// One training pair of the compressor task: an input state and its target.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledState<T> {
    pub state: StateVector<T>,
    pub label: T,
}

/// The scalar being minimized, as a function of `⟨M_C⟩`.
#[derive(Clone, Debug, PartialEq)]
pub enum CostFunction<T> {
    /// `⟨M_C⟩` on `U|0⟩`.
    RawExpectation(ObservableSum<T>),
    /// `|⟨M_C⟩|` on `U|0⟩`.
    AbsExpectation(ObservableSum<T>),
    /// `Σ_i |⟨m⟩_{U|Ψ_i⟩} − label_i|`.
    CompressorL1 { observable: ObservableSum<T>, dataset: Vec<LabeledState<T>> },
}

impl<T: Real> CostFunction<T> {
    /// Compressor loss with `m` the x-magnetization of the cost register.
    pub fn compressor(register: &RegisterSpec, dataset: Vec<LabeledState<T>>) -> Result<Self> {
        let cost = CostFunction::CompressorL1 { observable: x_magnetization(register), dataset };
        cost.validate(register.n())?;
        Ok(cost)
    }

    pub fn observable(&self) -> &ObservableSum<T> {
        match self {
            CostFunction::RawExpectation(o) | CostFunction::AbsExpectation(o) => o,
            CostFunction::CompressorL1 { observable, .. } => observable,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.observable().check_qubits(n)?;
        if let CostFunction::CompressorL1 { dataset, .. } = self {
            if dataset.is_empty() {
                return Err(Error::config("compressor dataset is empty"));
            }
            if let Some(bad) = dataset.iter().find(|d| d.state.n() != n) {
                return Err(Error::config(format!(
                    "dataset state has {} qubits, circuit has {n}",
                    bad.state.n()
                )));
            }
        }
        Ok(())
    }

    /// Short description used in report metadata.
    pub fn describe(&self) -> String {
        match self {
            CostFunction::RawExpectation(o) => format!("raw({o})"),
            CostFunction::AbsExpectation(o) => format!("abs({o})"),
            CostFunction::CompressorL1 { observable, dataset } => {
                format!("compressor_l1({observable}; {} samples)", dataset.len())
            }
        }
    }

    /// Inputs the cost is evaluated on, paired with their label (zero for
    /// the expectation costs).
    pub(crate) fn inputs(&self, n: usize) -> Result<Vec<(StateVector<T>, T)>> {
        match self {
            CostFunction::CompressorL1 { dataset, .. } => {
                Ok(dataset.iter().map(|d| (d.state.clone(), d.label)).collect())
            }
            _ => Ok(vec![(StateVector::zero_state(n)?, T::zero())]),
        }
    }

    /// Combine per-input expectations into the loss.
    pub(crate) fn combine(&self, values: &[T], labels: &[T]) -> T {
        match self {
            CostFunction::RawExpectation(_) => values[0],
            CostFunction::AbsExpectation(_) => values[0].abs(),
            CostFunction::CompressorL1 { .. } => {
                let diffs: Vec<T> = values.iter().zip(labels).map(|(v, l)| (*v - *l).abs()).collect();
                crate::scalar::pairwise_sum(&diffs)
            }
        }
    }

    /// `∂f/∂⟨m_i⟩` for each input, with `sign(0) = 0`.
    pub(crate) fn outer_derivatives(&self, values: &[T], labels: &[T]) -> Vec<T> {
        use crate::scalar::sign0;
        match self {
            CostFunction::RawExpectation(_) => vec![T::one()],
            CostFunction::AbsExpectation(_) => vec![sign0(values[0])],
            CostFunction::CompressorL1 { .. } => values.iter().zip(labels).map(|(v, l)| sign0(*v - *l)).collect(),
        }
    }
}

/// Loss of `cost` at parameters `theta`.
pub fn cost_value<T: Real>(cost: &CostFunction<T>, layout: &CircuitLayout, theta: &ParamVector<T>) -> Result<T> {
    cost.validate(layout.n())?;
    let compiled = CompiledCircuit::new(layout, theta)?;
    cost_value_compiled(cost, &compiled, layout.n())
}

pub(crate) fn cost_value_compiled<T: Real>(
    cost: &CostFunction<T>,
    compiled: &CompiledCircuit<T>,
    n: usize,
) -> Result<T> {
    let inputs = cost.inputs(n)?;
    let mut values = Vec::with_capacity(inputs.len());
    let mut labels = Vec::with_capacity(inputs.len());
    for (mut s, label) in inputs {
        compiled.apply(&mut s)?;
        values.push(expectation(&s, cost.observable())?);
        labels.push(label);
    }
    Ok(cost.combine(&values, &labels))
}
