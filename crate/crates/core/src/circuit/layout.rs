use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split of the qubit chain into the measured cost register R_C (a
/// contiguous block) and the unmeasured remainder R_N.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegisterSpec {
    n: usize,
    cost_offset: usize,
    n_cost: usize,
}

impl RegisterSpec {
    pub fn new(n: usize, cost_offset: usize, n_cost: usize) -> Result<Self> {
        if n_cost < 1 || n_cost > n {
            return Err(Error::config(format!("cost register size {n_cost} not in 1..={n}")));
        }
        if cost_offset + n_cost > n {
            return Err(Error::config(format!(
                "cost register {cost_offset}..{} exceeds {n} qubits",
                cost_offset + n_cost
            )));
        }
        Ok(Self { n, cost_offset, n_cost })
    }

    /// Cost register on the leftmost `n_cost` qubits.
    pub fn leftmost(n: usize, n_cost: usize) -> Result<Self> {
        Self::new(n, 0, n_cost)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost_offset(&self) -> usize {
        self.cost_offset
    }

    pub fn n_cost(&self) -> usize {
        self.n_cost
    }

    pub fn n_noncost(&self) -> usize {
        self.n - self.n_cost
    }

    pub fn cost_qubits(&self) -> std::ops::Range<usize> {
        self.cost_offset..self.cost_offset + self.n_cost
    }

    pub fn noncost_qubits(&self) -> Vec<usize> {
        (0..self.n).filter(|q| !self.is_cost(*q)).collect()
    }

    pub fn is_cost(&self, q: usize) -> bool {
        self.cost_qubits().contains(&q)
    }

    /// Adjacent pairs `(q, q+1)` whose qubits sit in different registers;
    /// zero, one or two of them.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        if self.cost_offset > 0 {
            out.push(self.cost_offset - 1);
        }
        let end = self.cost_offset + self.n_cost;
        if end < self.n {
            out.push(end - 1);
        }
        out
    }

    pub fn straddles(&self, first: usize) -> bool {
        first + 1 < self.n && self.is_cost(first) != self.is_cost(first + 1)
    }
}

/// Placement of one two-qubit gate `u_{i,i+1}^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSite {
    /// 1-based layer index.
    pub layer: usize,
    /// Lower qubit of the pair `(first, first + 1)`, zero-based.
    pub first: usize,
    /// Index of the gate's first angle in the parameter vector; the gate
    /// owns `param_offset..param_offset + 6`.
    pub param_offset: usize,
    /// The pair straddles an R_C/R_N boundary.
    pub is_entangling: bool,
}

impl GateSite {
    pub fn pair(&self) -> (usize, usize) {
        (self.first, self.first + 1)
    }

    pub fn params(&self) -> std::ops::Range<usize> {
        self.param_offset..self.param_offset + super::ANGLES_PER_GATE
    }
}

/// Brick-wall circuit of `layers` layers. Layer `k` (1-based) places gates on
/// `(q + 2m, q + 2m + 1)` with `q = (k - 1) mod 2`; pairs that would run past
/// the last qubit are omitted. With two qubits the odd offset has no pair,
/// so every layer holds the single gate on `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitLayout {
    register: RegisterSpec,
    layers: usize,
    gates: Vec<GateSite>,
    entangling: Vec<usize>,
}

impl CircuitLayout {
    pub fn new(register: RegisterSpec, layers: usize) -> Result<Self> {
        let n = register.n();
        if n < 2 {
            return Err(Error::config(format!("a brick circuit needs at least 2 qubits, got {n}")));
        }
        if layers < 1 {
            return Err(Error::config("circuit needs at least one layer"));
        }
        let mut gates = Vec::new();
        let mut entangling = Vec::new();
        let mut offset = 0;
        for layer in 1..=layers {
            let q = if n == 2 { 0 } else { (layer - 1) % 2 };
            for first in (q..n - 1).step_by(2) {
                let is_entangling = register.straddles(first);
                if is_entangling {
                    entangling.extend(offset..offset + super::ANGLES_PER_GATE);
                }
                gates.push(GateSite { layer, first, param_offset: offset, is_entangling });
                offset += super::ANGLES_PER_GATE;
            }
        }
        Ok(Self { register, layers, gates, entangling })
    }

    pub fn register(&self) -> &RegisterSpec {
        &self.register
    }

    pub fn n(&self) -> usize {
        self.register.n()
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn gates(&self) -> &[GateSite] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.gates.len() * super::ANGLES_PER_GATE
    }

    /// Parameter indices of every boundary-straddling gate, ascending.
    pub fn entangling_param_indices(&self) -> &[usize] {
        &self.entangling
    }

    pub fn is_entangling_param(&self, index: usize) -> bool {
        self.entangling.binary_search(&index).is_ok()
    }

    pub fn gates_in_layer(&self, layer: usize) -> impl Iterator<Item = &GateSite> {
        self.gates.iter().filter(move |g| g.layer == layer)
    }

    /// Layers containing at least one boundary gate, ascending.
    pub fn boundary_layers(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.gates.iter().filter(|g| g.is_entangling).map(|g| g.layer).collect();
        out.dedup();
        out
    }

    /// Gate owning parameter `index`, and the angle's position 0..6 in it.
    pub fn locate_param(&self, index: usize) -> Option<(usize, usize)> {
        let g = index / super::ANGLES_PER_GATE;
        (g < self.gates.len()).then_some((g, index % super::ANGLES_PER_GATE))
    }
}
