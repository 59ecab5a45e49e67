use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Environment;
use crate::genome::{Individual, Network};

/// Starting reward; each truth-table case subtracts its error.
pub const GATE_MAX_FITNESS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Imply,
    Nand,
    Nor,
    Xor,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Imply, Gate::Nand, Gate::Nor, Gate::Xor];

    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            Gate::Imply => !a || b,
            Gate::Nand => !(a && b),
            Gate::Nor => !(a || b),
            Gate::Xor => a != b,
        }
    }

    /// The four `([a, b], expected)` cases.
    pub fn truth_table(self) -> [([f64; 2], f64); 4] {
        let case = |a: bool, b: bool| {
            let f = |x: bool| if x { 1.0 } else { 0.0 };
            ([f(a), f(b)], f(self.eval(a, b)))
        };
        [
            case(false, false),
            case(false, true),
            case(true, false),
            case(true, true),
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Gate::Imply => "imply",
            Gate::Nand => "nand",
            Gate::Nor => "nor",
            Gate::Xor => "xor",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Gate::ALL
            .into_iter()
            .find(|g| g.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown gate '{s}'")))
    }
}

/// How per-case errors are folded into the penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateError {
    /// `sum (expected - actual)^2`
    #[default]
    SumSquared,
    /// `sqrt(sum (expected - actual)^2)`
    Euclidean,
}

/// `4.0` minus the error between the truth table and the network outputs.
pub fn gate_fitness(net: &Network, gate: Gate, metric: GateError) -> Result<f64> {
    if net.n_in() != 2 || net.n_out() != 1 {
        return Err(Error::Arity {
            expected_in: 2,
            expected_out: 1,
            found_in: net.n_in(),
            found_out: net.n_out(),
        });
    }
    let mut values = vec![0.0; net.nodes()];
    let mut sse = 0.0;
    for (inputs, expected) in gate.truth_table() {
        net.activate(&inputs, &mut values)?;
        let actual = values[net.nodes() - 1];
        sse += (expected - actual) * (expected - actual);
    }
    let penalty = match metric {
        GateError::SumSquared => sse,
        GateError::Euclidean => sse.sqrt(),
    };
    Ok(GATE_MAX_FITNESS - penalty)
}

#[derive(Debug, Clone, Copy)]
pub struct GateEnv {
    pub gate: Gate,
    pub metric: GateError,
}

impl GateEnv {
    pub fn new(gate: Gate) -> Self {
        Self {
            gate,
            metric: GateError::default(),
        }
    }
}

impl Environment for GateEnv {
    fn evaluate(&self, individual: &Individual, _seed: u64) -> Result<f64> {
        gate_fitness(individual.network(), self.gate, self.metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{create, Activation, FeatureMatrix, GenomeConfig};
    use approx::assert_abs_diff_eq;

    fn zero_net() -> Network {
        let cfg = GenomeConfig::for_arity(2, 1, 0, Activation::Sigmoid);
        create(FeatureMatrix::zeros(3), &cfg).unwrap().network().clone()
    }

    #[test]
    fn truth_tables() {
        let outs = |g: Gate| g.truth_table().map(|(_, e)| e);
        assert_eq!(outs(Gate::Xor), [0.0, 1.0, 1.0, 0.0]);
        assert_eq!(outs(Gate::Nand), [1.0, 1.0, 1.0, 0.0]);
        assert_eq!(outs(Gate::Nor), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(outs(Gate::Imply), [1.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_half_output_scores_three() {
        for g in Gate::ALL {
            assert_abs_diff_eq!(gate_fitness(&zero_net(), g, GateError::SumSquared).unwrap(), 3.0);
            assert_abs_diff_eq!(gate_fitness(&zero_net(), g, GateError::Euclidean).unwrap(), 3.0);
        }
    }

    #[test]
    fn rejects_wrong_arity() {
        let cfg = GenomeConfig::for_arity(4, 1, 0, Activation::Relu);
        let net = create(FeatureMatrix::zeros(5), &cfg).unwrap().network().clone();
        assert!(matches!(
            gate_fitness(&net, Gate::Xor, GateError::SumSquared),
            Err(Error::Arity { .. })
        ));
    }
}
