use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layout::CircuitLayout;
use super::params::ParamVector;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Which boundary layers keep random entangling angles under a hard limit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    First,
    #[default]
    Last,
    EvenlySpaced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitScheme {
    /// Every angle uniform on `[0, 2π)`.
    Random,
    /// Entangling angles zero (boundary gates are the identity), rest uniform.
    Partitioned,
    /// Entangling angles zero except in `entangling_layers` selected boundary
    /// layers, where they are uniform.
    HardLimit {
        entangling_layers: usize,
        #[serde(default)]
        placement: Placement,
    },
    /// Explicit angles.
    FromValues { values: Vec<f64> },
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitScheme::Random => write!(f, "random"),
            InitScheme::Partitioned => write!(f, "partitioned"),
            InitScheme::HardLimit { entangling_layers, placement } => {
                let p = match placement {
                    Placement::First => "first",
                    Placement::Last => "last",
                    Placement::EvenlySpaced => "even",
                };
                write!(f, "hard_limit_{entangling_layers}_{p}")
            }
            InitScheme::FromValues { .. } => write!(f, "from_values"),
        }
    }
}

impl std::str::FromStr for InitScheme {
    type Err = Error;

    /// `random`, `partitioned`, `hard_limit_<L_E>[_first|_last|_even]`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => return Ok(InitScheme::Random),
            "partitioned" => return Ok(InitScheme::Partitioned),
            _ => {}
        }
        let rest = s
            .strip_prefix("hard_limit_")
            .ok_or_else(|| Error::config(format!("unknown initialization scheme `{s}`")))?;
        let (count, placement) = match rest.split_once('_') {
            None => (rest, Placement::Last),
            Some((c, "first")) => (c, Placement::First),
            Some((c, "last")) => (c, Placement::Last),
            Some((c, "even")) => (c, Placement::EvenlySpaced),
            Some(_) => return Err(Error::config(format!("unknown placement in `{s}`"))),
        };
        let entangling_layers = count.parse().map_err(|_| Error::config(format!("bad layer count in `{s}`")))?;
        Ok(InitScheme::HardLimit { entangling_layers, placement })
    }
}

fn select_layers(boundary: &[usize], count: usize, placement: Placement) -> Vec<usize> {
    let m = boundary.len();
    match placement {
        Placement::First => boundary[..count].to_vec(),
        Placement::Last => boundary[m - count..].to_vec(),
        Placement::EvenlySpaced => (0..count).map(|j| boundary[(2 * j + 1) * m / (2 * count)]).collect(),
    }
}

/// Draw initial angles. Uniform draws are made for every parameter in
/// index order from the `init` stream of `seed` before any masking, so
/// `Random`, `Partitioned` and `HardLimit` share their non-entangling angles
/// for equal seeds.
pub fn init_params<T: Real>(layout: &CircuitLayout, scheme: &InitScheme, seed: u64) -> Result<ParamVector<T>> {
    let p = layout.num_params();
    if let InitScheme::FromValues { values } = scheme {
        if values.len() != p {
            return Err(Error::config(format!("{} explicit angles for {p} parameters", values.len())));
        }
        return ParamVector::new(values.iter().map(|&x| T::lit(x)).collect());
    }
    let mut r = rng::stream(seed, "init", 0);
    let tau = std::f64::consts::TAU;
    let mut values: Vec<T> = (0..p).map(|_| T::lit(r.gen::<f64>() * tau)).collect();
    let zero_entangling = |values: &mut Vec<T>, keep_layers: &[usize]| {
        for g in layout.gates().iter().filter(|g| g.is_entangling && !keep_layers.contains(&g.layer)) {
            for i in g.params() {
                values[i] = T::zero();
            }
        }
    };
    match scheme {
        InitScheme::Random => {}
        InitScheme::Partitioned => zero_entangling(&mut values, &[]),
        InitScheme::HardLimit { entangling_layers, placement } => {
            let boundary = layout.boundary_layers();
            if *entangling_layers > boundary.len() {
                return Err(Error::config(format!(
                    "hard limit of {entangling_layers} entangling layers, circuit has {}",
                    boundary.len()
                )));
            }
            let keep = if *entangling_layers == 0 {
                Vec::new()
            } else {
                select_layers(&boundary, *entangling_layers, *placement)
            };
            zero_entangling(&mut values, &keep);
        }
        InitScheme::FromValues { .. } => unreachable!(),
    }
    ParamVector::new(values)
}
