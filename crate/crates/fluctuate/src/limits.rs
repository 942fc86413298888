//! Limit laws: the large-θ limit Z of V, the fixed-μ large-N limit W of B,
//! their scaling constants, Laplace exponents and α-stable parameters.
//!
//! Laplace exponents follow Λ_X(s) = ln E[e^{−sX}].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpsm::{log_gf_v_complement, moments_v, Moment};
use crate::model::{derive, LpsmParams, ModelParams};
use crate::specfun::{hyp2f1_abc, sin_pi};

/// Tolerance on γ when deciding whether it sits on a regime boundary.
pub const REGIME_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Family {
    LargeTheta,
    LargeNFixedMu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GammaRegime {
    #[serde(rename = "(0,1)")]
    Below1,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "(1,2)")]
    Between1And2,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "(2,inf)")]
    Above2,
}

impl GammaRegime {
    pub fn classify(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be positive and finite, got {gamma}")));
        }
        Ok(if (gamma - 1.0).abs() <= REGIME_TOL {
            GammaRegime::One
        } else if (gamma - 2.0).abs() <= REGIME_TOL {
            GammaRegime::Two
        } else if gamma < 1.0 {
            GammaRegime::Below1
        } else if gamma < 2.0 {
            GammaRegime::Between1And2
        } else {
            GammaRegime::Above2
        })
    }
}

/// A limit law with its scaling constants and Laplace exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitLaw {
    pub family: Family,
    pub regime: GammaRegime,
    /// Scale a in (X/a − b).
    pub a: f64,
    /// Shift b in (X/a − b).
    pub b: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub mean: Moment,
    pub variance: Moment,
    #[serde(skip)]
    gamma: f64,
    #[serde(skip)]
    q: f64,
    /// Scaled mutation rate μ (fixed-μ family only).
    #[serde(skip)]
    mu: f64,
}

impl LimitLaw {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Laplace exponent of the limit variable at s > 0.
    pub fn exponent(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("Laplace variable must be nonnegative, got {s}")));
        }
        match self.family {
            Family::LargeTheta => Ok(exponent_z(self.regime, self.gamma, s)),
            Family::LargeNFixedMu => exponent_w(self.regime, self.gamma, self.q, self.mu, s),
        }
    }
}

/// −π/sin(πγ)·s^γ, the stable exponent for γ ∈ (0, 2) \ {1}.
fn stable_exponent(gamma: f64, s: f64) -> f64 {
    -PI / sin_pi(gamma) * s.powf(gamma)
}

fn exponent_z(regime: GammaRegime, gamma: f64, s: f64) -> f64 {
    match regime {
        GammaRegime::Below1 | GammaRegime::Between1And2 => stable_exponent(gamma, s),
        GammaRegime::One if s == 0.0 => 0.0,
        GammaRegime::One => s * s.ln(),
        GammaRegime::Two | GammaRegime::Above2 => 0.5 * s * s,
    }
}

fn exponent_w(regime: GammaRegime, g: f64, q: f64, mu: f64, s: f64) -> Result<f64> {
    Ok(match regime {
        GammaRegime::Above2 => 0.5 * mu * (g - q * (g - 2.0)) / ((g - 2.0) * (g - 1.0)) * s * s,
        GammaRegime::Two => 0.5 * mu * s * s,
        GammaRegime::Between1And2 => mu / (2.0 - g) * s * s * hyp2f1_abc(1.0, 2.0 - g, 3.0 - g, -s)?,
        GammaRegime::One => mu * s * (1.0 + s.ln_1p()),
        GammaRegime::Below1 => mu / (g - 1.0) * s * hyp2f1_abc(1.0, 1.0 - g, 2.0 - g, -s)?,
    })
}

/// Limit of V/a − b as θ → ∞.
pub fn large_theta_law(gamma: f64, q: f64, theta: f64) -> Result<LimitLaw> {
    let regime = GammaRegime::classify(gamma)?;
    if !(0.0..1.0).contains(&q) {
        return Err(Error::domain(format!("q must lie in [0, 1), got {q}")));
    }
    if !(theta > 1.0 && theta.is_finite()) {
        return Err(Error::domain(format!(
            "large-theta scaling requires theta > 1, got {theta}"
        )));
    }
    let (a, b) = match regime {
        GammaRegime::Below1 | GammaRegime::Between1And2 => (
            theta.powf(1.0 / gamma) / (1.0 - q),
            theta.powf(1.0 - 1.0 / gamma) / (gamma - 1.0),
        ),
        GammaRegime::One => (theta / (1.0 - q), theta.ln()),
        GammaRegime::Two => {
            let l = theta.ln();
            ((theta * l).sqrt() / (1.0 - q), (theta / l).sqrt())
        }
        GammaRegime::Above2 => {
            // Standardise V exactly so that the limit is s²/2.
            let m = moments_v(&LpsmParams::new(gamma, theta, q))?;
            let (mean, var) = (
                m.mean.value().unwrap_or(f64::NAN),
                m.variance.value().unwrap_or(f64::NAN),
            );
            let a = var.sqrt();
            (a, mean / a)
        }
    };
    let (mean, variance) = match regime {
        GammaRegime::Below1 | GammaRegime::One => (Moment::Infinite, Moment::Infinite),
        GammaRegime::Between1And2 => (Moment::Finite(0.0), Moment::Infinite),
        GammaRegime::Two | GammaRegime::Above2 => (Moment::Finite(0.0), Moment::Finite(1.0)),
    };
    let st = stable_params(gamma)?;
    Ok(LimitLaw {
        family: Family::LargeTheta,
        regime,
        a,
        b,
        alpha: st.alpha,
        sigma: st.sigma,
        mean,
        variance,
        gamma,
        q,
        mu: 0.0,
    })
}

/// Limit of B/a − b as N → ∞ at fixed mutation rate.
pub fn large_n_law(params: &ModelParams) -> Result<LimitLaw> {
    let d = derive(params)?;
    if !(d.mu > 0.0) {
        return Err(Error::domain("fixed-mu limit requires a positive mutation rate"));
    }
    let (g, q, mu, n) = (d.gamma, d.q, d.mu, params.n);
    let regime = GammaRegime::classify(g)?;
    let (scaled_a, b, mean, variance) = match regime {
        GammaRegime::Above2 => {
            let v = mu * (g - q * (g - 2.0)) / ((g - 2.0) * (g - 1.0));
            (n.sqrt(), mu / (g - 1.0) * n.sqrt(), 0.0, v)
        }
        GammaRegime::Two => ((n * n.ln()).sqrt(), mu * (n / n.ln()).sqrt(), 0.0, mu),
        GammaRegime::Between1And2 => (
            n.powf(1.0 / g),
            mu / (g - 1.0) * (n.powf(1.0 - 1.0 / g) - 1.0),
            0.0,
            2.0 * mu / (2.0 - g),
        ),
        GammaRegime::One => (n, mu * (1.0 + n.ln()), mu, 2.0 * mu),
        GammaRegime::Below1 => (n.powf(1.0 / g), 0.0, mu / (g - 1.0), 2.0 * mu / (2.0 - g)),
    };
    let st = stable_params(g)?;
    Ok(LimitLaw {
        family: Family::LargeNFixedMu,
        regime,
        a: scaled_a / (1.0 - q),
        b,
        alpha: st.alpha,
        sigma: st.sigma,
        mean: Moment::Finite(mean),
        variance: Moment::Finite(variance),
        gamma: g,
        q,
        mu,
    })
}

/// Parameters of Z as an α-stable law S_α(σ, β, μ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StableParams {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
}

pub fn stable_params(gamma: f64) -> Result<StableParams> {
    Ok(match GammaRegime::classify(gamma)? {
        GammaRegime::One => StableParams {
            alpha: 1.0,
            sigma: PI / 2.0,
            beta: 1.0,
            mu: 0.0,
        },
        GammaRegime::Two | GammaRegime::Above2 => StableParams {
            alpha: 2.0,
            sigma: std::f64::consts::FRAC_1_SQRT_2,
            beta: 0.0,
            mu: 0.0,
        },
        _ => {
            // σ^γ = (π/2)·csc(πγ/2) from s ↦ −is in −π/sin(πγ)·s^γ.
            let sigma = (PI / (2.0 * sin_pi(gamma / 2.0))).powf(1.0 / gamma);
            StableParams {
                alpha: gamma,
                sigma,
                beta: 1.0,
                mu: 0.0,
            }
        }
    })
}

/// Sup-norm distance between a rescaled exponent and the limit exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergencePoint {
    /// θ for the V pathway, μ for the W pathway.
    pub parameter: f64,
    /// max_s |Λ_rescaled(s) − Λ_Z(s)| / max_s |Λ_Z(s)|.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub gamma: f64,
    pub q: f64,
    pub v_pathway: Vec<ConvergencePoint>,
    /// μ → 0 limit of W/μ^{1/γ}, with μ = 1/θ for each θ (γ < 2 only).
    pub w_pathway: Vec<ConvergencePoint>,
    /// V-pathway distances decrease along the sequence (10% slack).
    pub monotone: bool,
}

/// Λ_V(e^{−s/a}) + b·s, evaluated through 1 − y = −expm1(−s/a)/(1−q).
pub fn rescaled_exponent_v(p: &LpsmParams, law: &LimitLaw, s: f64) -> Result<f64> {
    let u = -(-s / law.a).exp_m1() / (1.0 - p.q);
    Ok(log_gf_v_complement(p, u)? + law.b * s)
}

/// Λ_W(s/a) at a = μ^{1/γ}; at γ = 1 the divergent drift (1 − ln μ)·s is removed.
pub fn rescaled_exponent_w(gamma: f64, mu: f64, s: f64) -> Result<f64> {
    let regime = GammaRegime::classify(gamma)?;
    let a = mu.powf(1.0 / gamma);
    let v = exponent_w(regime, gamma, 0.0, mu, s / a)?;
    Ok(match regime {
        GammaRegime::One => v + (mu.ln() - 1.0) * s,
        _ => v,
    })
}

fn sup_distance(target: &[f64], values: &[f64]) -> f64 {
    let scale = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = target.iter().zip(values).fold(0.0f64, |m, (t, v)| m.max((t - v).abs()));
    diff / scale
}

pub fn verify_limit_convergence(p: &LpsmParams, theta_sequence: &[f64], s_grid: &[f64]) -> Result<ConvergenceReport> {
    p.validate()?;
    if theta_sequence.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation("theta sequence must be strictly increasing"));
    }
    if s_grid.is_empty() || s_grid.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::validation("s grid must be nonempty and positive"));
    }
    let regime = GammaRegime::classify(p.gamma)?;
    let target: Vec<f64> = s_grid.iter().map(|&s| exponent_z(regime, p.gamma, s)).collect();
    let mut v_pathway = Vec::with_capacity(theta_sequence.len());
    let mut w_pathway = Vec::new();
    for &theta in theta_sequence {
        let pt = LpsmParams::new(p.gamma, theta, p.q);
        let law = large_theta_law(p.gamma, p.q, theta)?;
        let vals = s_grid
            .iter()
            .map(|&s| rescaled_exponent_v(&pt, &law, s))
            .collect::<Result<Vec<_>>>()?;
        v_pathway.push(ConvergencePoint {
            parameter: theta,
            distance: sup_distance(&target, &vals),
        });
        if matches!(
            regime,
            GammaRegime::Below1 | GammaRegime::One | GammaRegime::Between1And2
        ) {
            let mu = 1.0 / theta;
            let vals = s_grid
                .iter()
                .map(|&s| rescaled_exponent_w(p.gamma, mu, s))
                .collect::<Result<Vec<_>>>()?;
            w_pathway.push(ConvergencePoint {
                parameter: mu,
                distance: sup_distance(&target, &vals),
            });
        }
    }
    let monotone = v_pathway.windows(2).all(|w| w[1].distance <= 1.1 * w[0].distance);
    Ok(ConvergenceReport {
        gamma: p.gamma,
        q: p.q,
        v_pathway,
        w_pathway,
        monotone,
    })
}

/// Evenly spaced grid of `n` points on [lo, hi].
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_exponent_rows() {
        let l = large_theta_law(0.5, 0.0, 10.0).unwrap();
        assert!((l.exponent(1.0).unwrap().abs() - PI).abs() < 1e-14);
        let l = large_theta_law(1.0, 0.0, 10.0).unwrap();
        assert_eq!(l.exponent(1.0).unwrap(), 0.0);
        assert!((l.exponent(std::f64::consts::E).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let l = large_theta_law(3.0, 0.0, 10.0).unwrap();
        assert_eq!(l.exponent(2.0).unwrap(), 2.0);
        assert_eq!((l.mean, l.variance), (Moment::Finite(0.0), Moment::Finite(1.0)));
        assert_eq!(
            large_theta_law(1.0 + 1e-13, 0.0, 10.0).unwrap().regime,
            GammaRegime::One
        );
        assert!(large_theta_law(-1.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn scalings() {
        let l = large_theta_law(0.5, 0.5, 100.0).unwrap();
        assert!((l.a - 2e4).abs() < 1e-9 && (l.b + 0.02).abs() < 1e-15);
        let l = large_theta_law(1.0, 0.5, 100.0).unwrap();
        assert!((l.a - 200.0).abs() < 1e-12 && (l.b - 100f64.ln()).abs() < 1e-15);
        let l = large_theta_law(2.0, 0.0, 100.0).unwrap();
        assert!((l.a - (100.0 * 100f64.ln()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn w_table_rows() {
        let w = large_n_law(&ModelParams::from_reduced(1.0, 0.0, 0.01, 1e6)).unwrap();
        assert!((w.exponent(1.0).unwrap() - 0.01 * (1.0 + 2f64.ln())).abs() < 1e-15);
        assert_eq!((w.mean, w.variance), (Moment::Finite(0.01), Moment::Finite(0.02)));
        let w = large_n_law(&ModelParams::from_reduced(3.0, 0.0, 0.01, 1e6)).unwrap();
        assert!((w.variance.value().unwrap() - 0.015).abs() < 1e-15);
        let w = large_n_law(&ModelParams::from_reduced(0.5, 0.0, 0.01, 1e6)).unwrap();
        assert!((w.mean.value().unwrap() + 0.02).abs() < 1e-15);
        assert!(w.exponent(1.0).unwrap() < 0.0);
        // variance at the γ = 2 boundary, tagged values only
        let v = |g: f64| {
            large_n_law(&ModelParams::from_reduced(g, 0.0, 0.01, 1e6))
                .unwrap()
                .variance
                .value()
                .unwrap()
        };
        assert!((v(1.9) - 0.2).abs() < 1e-12);
        assert_eq!(v(2.0), 0.01);
        assert!((v(2.1) - 0.01 * 2.1 / (0.1 * 1.1)).abs() < 1e-12);
    }

    #[test]
    fn stable_parameterisation() {
        assert_eq!(
            stable_params(1.0).unwrap(),
            StableParams {
                alpha: 1.0,
                sigma: PI / 2.0,
                beta: 1.0,
                mu: 0.0
            }
        );
        let s = stable_params(0.5).unwrap();
        assert_eq!(s.alpha, 0.5);
        assert!((s.sigma - (PI / 2.0 * 2f64.sqrt()).powi(2)).abs() < 1e-13);
        assert_eq!(stable_params(5.0).unwrap().alpha, 2.0);
        // σ is continuous through γ = 1
        assert!((stable_params(1.0 + 1e-7).unwrap().sigma - PI / 2.0).abs() < 1e-5);
    }

    #[test]
    fn exponents_are_convex() {
        let h = 1e-3;
        for &g in &[0.3, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let z = large_theta_law(g, 0.2, 10.0).unwrap();
            let w = large_n_law(&ModelParams::from_reduced(g, 0.2, 0.01, 1e6)).unwrap();
            for law in [z, w] {
                for i in 1..40 {
                    let s = i as f64 * 0.1;
                    let d2 =
                        law.exponent(s + h).unwrap() - 2.0 * law.exponent(s).unwrap() + law.exponent(s - h).unwrap();
                    assert!(d2 > -1e-12, "{:?} γ={g} s={s} d2={d2}", law.family);
                }
            }
        }
    }

    #[test]
    fn json_keys() {
        let j = serde_json::to_value(large_theta_law(0.5, 0.0, 10.0).unwrap()).unwrap();
        let keys: Vec<_> = j.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 8);
        for k in ["family", "regime", "a", "b", "alpha", "sigma", "mean", "variance"] {
            assert!(j.get(k).is_some(), "{k}");
        }
        assert_eq!(j["mean"], "inf");
        assert_eq!(j["regime"], "(0,1)");
    }

    #[test]
    fn convergence_small() {
        let grid = linear_grid(0.1, 2.0, 20);
        let r = verify_limit_convergence(&LpsmParams::new(0.5, 1.0, 0.0), &[1e2, 1e4, 1e6], &grid).unwrap();
        assert!(r.monotone);
        assert!(r.v_pathway[2].distance < 0.01);
    }
}
