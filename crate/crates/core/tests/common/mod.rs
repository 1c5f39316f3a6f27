//! Dense reference implementations shared by the integration tests. They
//! build full `2^n × 2^n` operators from Kronecker products, independent of
//! the library's strided kernels.
#![allow(dead_code)]

use bplab::qcore::CMatrix;
use bplab::{Pauli, StateVectorF64};
use num_complex::Complex64 as C;
use rand::Rng;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn pauli_matrix(p: Option<Pauli>) -> CMatrix<f64> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let data = match p {
        None => vec![o, z, z, o],
        Some(Pauli::X) => vec![z, o, o, z],
        Some(Pauli::Y) => vec![z, c(0.0, -1.0), c(0.0, 1.0), z],
        Some(Pauli::Z) => vec![o, z, z, -o],
    };
    CMatrix::from_rows(2, 2, data).unwrap()
}

/// `⊗_q factor(q)` with qubit 0 leftmost (most significant).
pub fn kron_all(n: usize, factor: impl Fn(usize) -> CMatrix<f64>) -> CMatrix<f64> {
    (1..n).fold(factor(0), |acc, q| acc.kron(&factor(q)))
}

pub fn dense_pauli_string(n: usize, coef: f64, factors: &[(usize, Pauli)]) -> CMatrix<f64> {
    let m = kron_all(n, |q| pauli_matrix(factors.iter().find(|f| f.0 == q).map(|f| f.1)));
    m.scale(c(coef, 0.0))
}

/// `I ⊗ gate ⊗ I` with the gate on `(i, i+1)`.
pub fn embed_pair(n: usize, i: usize, gate: &CMatrix<f64>) -> CMatrix<f64> {
    let left = CMatrix::identity(1 << i);
    let right = CMatrix::identity(1 << (n - i - 2));
    left.kron(gate).kron(&right)
}

pub fn real_to_cmatrix(g: &[[f64; 4]; 4]) -> CMatrix<f64> {
    CMatrix::from_real(4, 4, &g.iter().flatten().copied().collect::<Vec<_>>()).unwrap()
}

pub fn random_state(rng: &mut impl Rng, n: usize) -> StateVectorF64 {
    let amps = (0..1usize << n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    StateVectorF64::normalized(amps).unwrap()
}

/// Random unitary from Gram-Schmidt on a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMatrix<f64> {
    let mut cols: Vec<Vec<C>> = Vec::new();
    while cols.len() < dim {
        let mut v: Vec<C> = (0..dim).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        for u in &cols {
            let p: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= p * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let data = (0..dim).flat_map(|r| cols.iter().map(move |col| col[r]).collect::<Vec<_>>()).collect();
    CMatrix::from_rows(dim, dim, data).unwrap()
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix<f64> {
    let mut m = CMatrix::zeros(dim, dim);
    for r in 0..dim {
        m[(r, r)] = c(rng.gen_range(-1.0..1.0), 0.0);
        for col in r + 1..dim {
            let z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m[(r, col)] = z;
            m[(col, r)] = z.conj();
        }
    }
    m
}

pub fn expectation_dense(op: &CMatrix<f64>, psi: &[C]) -> C {
    let v = op.matvec(psi).unwrap();
    psi.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
