use serde::{Deserialize, Serialize};

use super::init::InitScheme;
use super::layout::{CircuitLayout, RegisterSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Flat vector of circuit angles in radians, six per gate in layout order.
/// Angles are periodic; no canonical range is enforced.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector<T> {
    values: Vec<T>,
}

impl<T: Real> ParamVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::numeric("non-finite angle in parameter vector"));
        }
        Ok(Self { values })
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![T::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
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

    pub fn get(&self, i: usize) -> T {
        self.values[i]
    }

    /// Copy with one angle shifted by `delta`.
    pub fn shifted(&self, i: usize, delta: T) -> Self {
        let mut out = self.clone();
        out.values[i] += delta;
        out
    }
}

/// Layout descriptor stored next to serialized parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutDescriptor {
    pub n: usize,
    pub cost_offset: usize,
    pub n_cost: usize,
    pub layers: usize,
    pub scheme: InitScheme,
    pub seed: u64,
}

impl LayoutDescriptor {
    pub fn layout(&self) -> Result<CircuitLayout> {
        CircuitLayout::new(RegisterSpec::new(self.n, self.cost_offset, self.n_cost)?, self.layers)
    }
}

/// On-disk form: the descriptor plus a flat JSON array of radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamFile {
    pub layout: LayoutDescriptor,
    pub values: Vec<f64>,
}

impl ParamFile {
    pub fn new<T: Real>(layout: &CircuitLayout, scheme: InitScheme, seed: u64, theta: &ParamVector<T>) -> Self {
        let r = layout.register();
        Self {
            layout: LayoutDescriptor {
                n: r.n(),
                cost_offset: r.cost_offset(),
                n_cost: r.n_cost(),
                layers: layout.layers(),
                scheme,
                seed,
            },
            values: theta.values().iter().map(|x| x.as_f64()).collect(),
        }
    }

    /// Rebuild layout and parameters, checking that their sizes agree.
    pub fn load<T: Real>(&self) -> Result<(CircuitLayout, ParamVector<T>)> {
        let layout = self.layout.layout()?;
        if self.values.len() != layout.num_params() {
            return Err(Error::arg(format!(
                "file holds {} angles, layout needs {}",
                self.values.len(),
                layout.num_params()
            )));
        }
        let theta = ParamVector::new(self.values.iter().map(|&x| T::lit(x)).collect())?;
        Ok((layout, theta))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::arg(format!("parameter file: {e}")))
    }
}
