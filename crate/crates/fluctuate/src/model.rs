//! Parameter containers, validation and derived quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Full rate parameterisation of the model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Mutant birth rate α.
    pub alpha: f64,
    /// Mutant death rate β.
    pub beta: f64,
    /// Mutation rate ν per wild-type cell.
    pub nu: f64,
    /// Wild-type growth rate δ.
    pub delta: f64,
    /// Final wild-type population size.
    #[serde(rename = "N")]
    pub n: f64,
    /// Initial wild-type population size.
    #[serde(rename = "N0", default = "one")]
    pub n0: f64,
}

/// Quantities derived from [`ModelParams`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Derived {
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
    pub q: f64,
    pub theta: f64,
    pub phi: f64,
    pub tau: f64,
    /// Mean number of mutant clones ν(N−N₀)/δ.
    pub m: f64,
    /// Growth factor N/N₀ of the wild type.
    pub growth: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, nu: f64, delta: f64, n: f64) -> Self {
        ModelParams {
            alpha,
            beta,
            nu,
            delta,
            n,
            n0: 1.0,
        }
    }

    pub fn with_n0(mut self, n0: f64) -> Self {
        self.n0 = n0;
        self
    }

    /// Builds rates realising the reduced parameters (γ, q, μ) with α = 1.
    pub fn from_reduced(gamma: f64, q: f64, mu: f64, n: f64) -> Self {
        let alpha = 1.0;
        let beta = q * alpha;
        ModelParams::new(alpha, beta, mu * alpha, gamma * (alpha - beta), n)
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("nu", self.nu),
            ("delta", self.delta),
            ("N", self.n),
            ("N0", self.n0),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                errs.push(format!("{name} must be finite"));
            }
        }
        if !(self.alpha > 0.0) {
            errs.push("alpha must be positive".into());
        }
        if !(self.beta >= 0.0) {
            errs.push("beta must be nonnegative".into());
        }
        if !(self.alpha - self.beta > 0.0) {
            errs.push("lambda must be positive".into());
        }
        if !(self.nu >= 0.0) {
            errs.push("nu must be nonnegative".into());
        }
        if !(self.delta > 0.0) {
            errs.push("delta must be positive".into());
        }
        if !(self.n >= 1.0) {
            errs.push("N must be at least 1".into());
        }
        if !(self.n0 >= 1.0) {
            errs.push("N0 must be at least 1".into());
        }
        if !(self.n >= self.n0) {
            errs.push("N must be at least N0".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    pub fn derive(&self) -> Result<Derived> {
        derive(self)
    }
}

/// Validates `p` and returns its derived quantities.
pub fn derive(p: &ModelParams) -> Result<Derived> {
    p.validate()?;
    let lambda = p.alpha - p.beta;
    let mu = p.nu / p.alpha;
    Ok(Derived {
        lambda,
        gamma: p.delta / lambda,
        mu,
        q: p.beta / p.alpha,
        theta: p.n * mu,
        phi: 1.0 - 1.0 / p.n,
        tau: p.n.ln() / p.delta,
        m: p.nu * (p.n - p.n0) / p.delta,
        growth: p.n / p.n0,
    })
}

/// Parameters (γ, θ, q) of the large-population small-mutation limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpsmParams {
    pub gamma: f64,
    pub theta: f64,
    pub q: f64,
}

impl LpsmParams {
    pub fn new(gamma: f64, theta: f64, q: f64) -> Self {
        LpsmParams { gamma, theta, q }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            errs.push("gamma must be positive and finite".to_string());
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            errs.push("theta must be nonnegative and finite".to_string());
        }
        if !(self.q >= 0.0 && self.q < 1.0) {
            errs.push("q must lie in [0, 1)".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Either parameterisation; serialises to the matching JSON schema.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSet {
    Model(ModelParams),
    Lpsm(LpsmParams),
}

impl From<ModelParams> for ParamSet {
    fn from(p: ModelParams) -> Self {
        ParamSet::Model(p)
    }
}

impl From<LpsmParams> for ParamSet {
    fn from(p: LpsmParams) -> Self {
        ParamSet::Lpsm(p)
    }
}

/// The clone-law argument ξ and the shifted variable y for a given z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XiY {
    pub xi: f64,
    pub y: f64,
}

/// ξ = (q−z)/(1−z) and y = (z−q)/(1−q).
pub fn xi_of_z(z: f64, q: f64) -> Result<XiY> {
    if !(z < 1.0) {
        return Err(Error::domain(format!("xi_of_z requires z < 1, got {z}")));
    }
    if !(0.0..1.0).contains(&q) {
        return Err(Error::domain(format!("q must lie in [0, 1), got {q}")));
    }
    Ok(XiY {
        xi: (q - z) / (1.0 - z),
        y: (z - q) / (1.0 - q),
    })
}
