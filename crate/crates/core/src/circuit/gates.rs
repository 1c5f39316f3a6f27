//! The six-angle two-qubit gate and the compiled circuit.
//!
//! A gate is `R_34(θ6)·R_23(θ5)·R_12(θ4)·R_34(θ3)·R_23(θ2)·R_34(θ1)` where
//! `R_ab(θ) = exp(-iθK_ab)` is a Givens rotation. Axes 1..4 label the pair's
//! basis `|00⟩, |01⟩, |10⟩, |11⟩`, so every gate is real orthogonal.

use super::layout::CircuitLayout;
use super::params::ParamVector;
use crate::error::{Error, Result};
use crate::qcore::{CMatrix, HermitianMatrix, RealGate, StateVector};
use crate::scalar::{c, Real};

/// Rotation planes of the six factors in application order (θ1 first).
pub const ROTATION_AXES: [(usize, usize); 6] = [(3, 4), (2, 3), (3, 4), (1, 2), (2, 3), (3, 4)];

/// `K_ab` with `-i` at `(a, b)` and `+i` at `(b, a)`, axes 1-based.
pub fn generator_matrix<T: Real>(axes: (usize, usize)) -> Result<HermitianMatrix<T>> {
    let (a, b) = axes;
    if !(1 <= a && a < b && b <= 4) {
        return Err(Error::arg(format!("generator axes {axes:?} must satisfy 1 <= a < b <= 4")));
    }
    let mut k = CMatrix::zeros(4, 4);
    k[(a - 1, b - 1)] = c(T::zero(), -T::one());
    k[(b - 1, a - 1)] = c(T::zero(), T::one());
    HermitianMatrix::new(k)
}

fn identity<T: Real>() -> RealGate<T> {
    std::array::from_fn(|r| std::array::from_fn(|c| if r == c { T::one() } else { T::zero() }))
}

/// `R_ab(θ)`: cos θ at (a,a), (b,b); −sin θ at (a,b); +sin θ at (b,a).
pub fn givens<T: Real>(axes: (usize, usize), theta: T) -> RealGate<T> {
    let (a, b) = (axes.0 - 1, axes.1 - 1);
    let (s, co) = theta.sin_cos();
    let mut g = identity();
    g[a][a] = co;
    g[b][b] = co;
    g[a][b] = -s;
    g[b][a] = s;
    g
}

/// `-iK_ab` as a real matrix: the derivative of `R_ab(θ)` is `G_ab·R_ab(θ)`.
fn real_generator<T: Real>(axes: (usize, usize)) -> RealGate<T> {
    let (a, b) = (axes.0 - 1, axes.1 - 1);
    let mut g = [[T::zero(); 4]; 4];
    g[a][b] = -T::one();
    g[b][a] = T::one();
    g
}

pub(crate) fn matmul4<T: Real>(x: &RealGate<T>, y: &RealGate<T>) -> RealGate<T> {
    std::array::from_fn(|r| std::array::from_fn(|c| (0..4).map(|k| x[r][k] * y[k][c]).sum()))
}

pub fn gate_unitary<T: Real>(angles: &[T]) -> RealGate<T> {
    assert_eq!(angles.len(), 6, "a gate has six angles");
    let mut u = identity();
    for (axes, &theta) in ROTATION_AXES.iter().zip(angles) {
        u = matmul4(&givens(*axes, theta), &u);
    }
    u
}

/// `∂U/∂θ_m` for all six angles: `R_6⋯R_{m+1}·G_m·R_m⋯R_1`.
pub fn gate_derivatives<T: Real>(angles: &[T]) -> [RealGate<T>; 6] {
    assert_eq!(angles.len(), 6, "a gate has six angles");
    let rots: [RealGate<T>; 6] = std::array::from_fn(|m| givens(ROTATION_AXES[m], angles[m]));
    // prefix[m] = R_m ⋯ R_1 (1-based m), suffix[m] = R_6 ⋯ R_{m+1}
    let mut prefix = [identity(); 7];
    for m in 0..6 {
        prefix[m + 1] = matmul4(&rots[m], &prefix[m]);
    }
    let mut suffix = [identity(); 7];
    for m in (0..6).rev() {
        suffix[m] = matmul4(&suffix[m + 1], &rots[m]);
    }
    std::array::from_fn(|m| {
        let inner = matmul4(&real_generator(ROTATION_AXES[m]), &prefix[m + 1]);
        matmul4(&suffix[m + 1], &inner)
    })
}

/// Gate matrices of a layout evaluated at one parameter vector.
#[derive(Clone, Debug)]
pub struct CompiledCircuit<T> {
    n: usize,
    firsts: Vec<usize>,
    mats: Vec<RealGate<T>>,
}

impl<T: Real> CompiledCircuit<T> {
    pub fn new(layout: &CircuitLayout, theta: &ParamVector<T>) -> Result<Self> {
        if theta.len() != layout.num_params() {
            return Err(Error::arg(format!(
                "parameter vector has {} angles, layout needs {}",
                theta.len(),
                layout.num_params()
            )));
        }
        let v = theta.values();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::numeric("non-finite circuit angle"));
        }
        let mats = layout.gates().iter().map(|g| gate_unitary(&v[g.params()])).collect();
        let firsts = layout.gates().iter().map(|g| g.first).collect();
        Ok(Self { n: layout.n(), firsts, mats })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn gate(&self, g: usize) -> (&RealGate<T>, usize) {
        (&self.mats[g], self.firsts[g])
    }

    /// Apply gates `range` in order to a register whose circuit qubit 0 sits
    /// at `offset` inside `state`.
    pub(crate) fn apply_range(&self, state: &mut StateVector<T>, range: std::ops::Range<usize>, offset: usize) {
        for g in range {
            state.apply_real_pair(&self.mats[g], self.firsts[g] + offset);
        }
    }

    pub fn apply(&self, state: &mut StateVector<T>) -> Result<()> {
        if state.n() != self.n {
            return Err(Error::arg(format!("{}-qubit state for a {}-qubit circuit", state.n(), self.n)));
        }
        self.apply_range(state, 0..self.len(), 0);
        Ok(())
    }

    /// Dense `2^n × 2^n` unitary, column `j` being `U|j⟩`.
    pub fn dense_unitary(&self) -> Result<CMatrix<T>> {
        let d = 1usize << self.n;
        let mut u = CMatrix::zeros(d, d);
        for j in 0..d {
            let mut s = StateVector::basis_state(self.n, j)?;
            self.apply(&mut s)?;
            for (i, a) in s.amplitudes().iter().enumerate() {
                u[(i, j)] = *a;
            }
        }
        Ok(u)
    }
}

/// `U(Θ)|input⟩`: layers in order, gates within a layer in ascending pair order.
pub fn apply_circuit<T: Real>(
    layout: &CircuitLayout,
    theta: &ParamVector<T>,
    input: &StateVector<T>,
) -> Result<StateVector<T>> {
    let compiled = CompiledCircuit::new(layout, theta)?;
    let mut out = input.clone();
    compiled.apply(&mut out)?;
    Ok(out)
}

/// `U(Θ)|0…0⟩`
pub fn output_state<T: Real>(layout: &CircuitLayout, theta: &ParamVector<T>) -> Result<StateVector<T>> {
    apply_circuit(layout, theta, &StateVector::zero_state(layout.n())?)
}

#[cfg(test)]
fn to_cmatrix<T: Real>(g: &RealGate<T>) -> CMatrix<T> {
    let data: Vec<num_complex::Complex<T>> = g.iter().flatten().map(|&x| c(x, T::zero())).collect();
    CMatrix::from_rows(4, 4, data).expect("4x4")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::hermitian_eig;

    /// exp(A) by truncated Taylor series; independent of the closed-form Givens.
    fn expm_series(a: &CMatrix<f64>) -> CMatrix<f64> {
        let mut term = CMatrix::identity(a.rows());
        let mut sum = term.clone();
        for k in 1..60 {
            term = term.matmul(a).unwrap().scale(c(1.0 / k as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        sum
    }

    fn exp_minus_i_theta_k(axes: (usize, usize), theta: f64) -> CMatrix<f64> {
        let k = generator_matrix::<f64>(axes).unwrap();
        expm_series(&k.matrix().scale(c(0.0, -theta)))
    }

    #[test]
    fn generator_entries() {
        let k = generator_matrix::<f64>((1, 2)).unwrap();
        assert_eq!(k.matrix()[(0, 1)], c(0.0, -1.0));
        assert_eq!(k.matrix()[(1, 0)], c(0.0, 1.0));
        let nonzero = k.matrix().data().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn generator_spectra() {
        for a in 1..=4 {
            for b in a + 1..=4 {
                let e = hermitian_eig(&generator_matrix::<f64>((a, b)).unwrap()).unwrap();
                let expect = [-1.0, 0.0, 0.0, 1.0];
                for (x, y) in e.values.iter().zip(expect) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
        assert!(generator_matrix::<f64>((2, 2)).is_err());
        assert!(generator_matrix::<f64>((3, 5)).is_err());
        assert!(generator_matrix::<f64>((0, 1)).is_err());
    }

    #[test]
    fn givens_matches_series_exponential() {
        for a in 1..=4 {
            for b in a + 1..=4 {
                for theta in [0.3, -1.1, 2.5] {
                    let oracle = exp_minus_i_theta_k((a, b), theta);
                    let g = to_cmatrix(&givens((a, b), theta));
                    assert!(g.max_abs_diff(&oracle) < 1e-13);
                }
            }
        }
        // exp(-i π/2 K_12) maps e_1 to e_2
        let u = exp_minus_i_theta_k((1, 2), std::f64::consts::FRAC_PI_2);
        assert!((u[(1, 0)] - c(1.0, 0.0)).norm() < 1e-13);
        assert!(u[(0, 0)].norm() < 1e-13);
    }

    #[test]
    fn gate_zero_angles_is_identity() {
        assert_eq!(gate_unitary(&[0.0f64; 6]), identity::<f64>());
    }

    #[test]
    fn theta4_quarter_turn_maps_00_to_01() {
        let mut a = [0.0f64; 6];
        a[3] = std::f64::consts::FRAC_PI_2;
        let u = gate_unitary(&a);
        // column 0 is the image of |00⟩
        assert!((u[1][0] - 1.0).abs() < 1e-15);
        assert!(u[0][0].abs() < 1e-15 && u[2][0].abs() < 1e-15 && u[3][0].abs() < 1e-15);
    }

    #[test]
    fn gate_derivatives_match_finite_differences() {
        let a: [f64; 6] = [0.4, -1.3, 2.2, 0.9, 3.0, -0.2];
        let d = gate_derivatives(&a);
        let h = 1e-5;
        for m in 0..6 {
            let (mut p, mut q) = (a, a);
            p[m] += h;
            q[m] -= h;
            let (up, uq) = (gate_unitary(&p), gate_unitary(&q));
            for r in 0..4 {
                for c in 0..4 {
                    let fd = (up[r][c] - uq[r][c]) / (2.0 * h);
                    assert!((fd - d[m][r][c]).abs() < 1e-9, "m={m}");
                }
            }
        }
    }
}
