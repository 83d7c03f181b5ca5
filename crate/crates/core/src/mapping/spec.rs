use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one confluent Natanzon potential.
///
/// `R(ξ) = λ2 ξ² + λ1 ξ + λ0` fixes the mapping and the denominators; the
/// three `σ` coefficients make up the numerator
/// `σ_β ξ² + σ_q0 ξ + σ_c + 1`. The discriminant `Δ = λ1² − 4 λ0 λ2` is always
/// recomputed from the λ's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFields", into = "SpecFields")]
pub struct ConfluentSpec {
    lambda0: f64,
    lambda1: f64,
    lambda2: f64,
    sigma_beta: f64,
    sigma_q0: f64,
    sigma_c: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFields {
    lambda0: f64,
    lambda1: f64,
    lambda2: f64,
    sigma_beta: f64,
    sigma_q0: f64,
    sigma_c: f64,
}

impl TryFrom<SpecFields> for ConfluentSpec {
    type Error = Error;

    fn try_from(s: SpecFields) -> Result<Self> {
        ConfluentSpec::new(
            [s.lambda0, s.lambda1, s.lambda2],
            s.sigma_beta,
            s.sigma_q0,
            s.sigma_c,
        )
    }
}

impl From<ConfluentSpec> for SpecFields {
    fn from(s: ConfluentSpec) -> Self {
        SpecFields {
            lambda0: s.lambda0,
            lambda1: s.lambda1,
            lambda2: s.lambda2,
            sigma_beta: s.sigma_beta,
            sigma_q0: s.sigma_q0,
            sigma_c: s.sigma_c,
        }
    }
}

impl ConfluentSpec {
    /// `lambdas` is `[λ0, λ1, λ2]`.
    pub fn new(lambdas: [f64; 3], sigma_beta: f64, sigma_q0: f64, sigma_c: f64) -> Result<Self> {
        let all = [lambdas[0], lambdas[1], lambdas[2], sigma_beta, sigma_q0, sigma_c];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite potential parameters {all:?}"
            )));
        }
        if lambdas.iter().all(|&l| l == 0.0) {
            return Err(Error::InvalidParameter(
                "λ0, λ1 and λ2 are all zero".to_string(),
            ));
        }
        Ok(Self {
            lambda0: lambdas[0],
            lambda1: lambdas[1],
            lambda2: lambdas[2],
            sigma_beta,
            sigma_q0,
            sigma_c,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambdas(&self) -> [f64; 3] {
        [self.lambda0, self.lambda1, self.lambda2]
    }

    pub fn sigma_beta(&self) -> f64 {
        self.sigma_beta
    }

    pub fn sigma_q0(&self) -> f64 {
        self.sigma_q0
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    /// `Δ = λ1² − 4 λ0 λ2`.
    pub fn delta(&self) -> f64 {
        self.lambda1 * self.lambda1 - 4.0 * self.lambda0 * self.lambda2
    }

    pub fn r(&self, xi: f64) -> f64 {
        (self.lambda2 * xi + self.lambda1).mul_add(xi, self.lambda0)
    }

    /// `dR/dξ`.
    pub fn r_dot(&self, xi: f64) -> f64 {
        2.0 * self.lambda2 * xi + self.lambda1
    }

    /// `d²R/dξ²`.
    pub fn r_ddot(&self) -> f64 {
        2.0 * self.lambda2
    }

    /// Largest absolute parameter, used to scale tolerances.
    pub fn magnitude(&self) -> f64 {
        [
            self.lambda0,
            self.lambda1,
            self.lambda2,
            self.sigma_beta,
            self.sigma_q0,
            self.sigma_c,
        ]
        .iter()
        .fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    /// The single nonzero λ, if exactly one is nonzero: `(index, value)`.
    pub fn single_lambda(&self) -> Option<(usize, f64)> {
        let nonzero: Vec<(usize, f64)> = self
            .lambdas()
            .into_iter()
            .enumerate()
            .filter(|(_, l)| *l != 0.0)
            .collect();
        match nonzero.as_slice() {
            [one] => Some(*one),
            _ => None,
        }
    }

    /// Same spec with all six parameters multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(
            [self.lambda0 * t, self.lambda1 * t, self.lambda2 * t],
            self.sigma_beta * t,
            self.sigma_q0 * t,
            self.sigma_c * t,
        )
    }
}
