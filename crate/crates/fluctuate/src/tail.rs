//! Large-n asymptotics of p_n and empirical tail-exponent fitting.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Pmf;
use crate::model::{derive, LpsmParams, ModelParams};
use crate::specfun::{digamma, gamma, rgamma, sin_pi, EULER_GAMMA};

/// Distance from γ = 1 within which the γ = 1 expansion is used.
pub const GAMMA1_TOL: f64 = 1e-6;
/// Distance from an integer γ within which sub-leading terms are dropped.
pub const POLE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailRegime {
    LpsmGeneral,
    LpsmGamma1,
    LpsmGamma1NoDeath,
    FiniteNGamma1NoDeath,
}

/// One term c·n^power·(ln n)^log_power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailTerm {
    pub coefficient: f64,
    pub power_of_n: f64,
    pub log_power: u32,
}

impl TailTerm {
    pub fn at(&self, n: f64) -> f64 {
        self.coefficient * n.powf(self.power_of_n) * n.ln().powi(self.log_power as i32)
    }
}

/// p_n ≈ cutoff_base^n · Σ terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailExpansion {
    pub regime: TailRegime,
    /// Sorted by decreasing asymptotic magnitude.
    pub terms: Vec<TailTerm>,
    pub cutoff_base: f64,
    /// Sub-leading terms were dropped because γ sits on a pole of their coefficients.
    pub truncated: bool,
}

impl TailExpansion {
    /// Sum of all terms at n.
    pub fn evaluate(&self, n: f64) -> f64 {
        self.evaluate_terms(n, self.terms.len())
    }

    /// Sum of the first `k` terms at n.
    pub fn evaluate_terms(&self, n: f64, k: usize) -> f64 {
        let s: f64 = self.terms.iter().take(k).map(|t| t.at(n)).sum();
        if self.cutoff_base == 1.0 {
            s
        } else {
            self.cutoff_base.powf(n) * s
        }
    }

    pub fn leading(&self, n: f64) -> f64 {
        self.evaluate_terms(n, 1)
    }
}

fn sort_terms(terms: &mut [TailTerm]) {
    terms.sort_by(|a, b| {
        b.power_of_n
            .total_cmp(&a.power_of_n)
            .then(b.log_power.cmp(&a.log_power))
    });
}

/// Tail of the limit law for general γ (routes to the γ = 1 form near 1).
pub fn tail_lpsm_general(p: &LpsmParams) -> Result<TailExpansion> {
    p.validate()?;
    let (t, g, q) = (p.theta, p.gamma, p.q);
    if (g - 1.0).abs() < GAMMA1_TOL {
        return tail_lpsm_gamma1(t, q);
    }
    let oq = 1.0 - q;
    let mut terms = vec![TailTerm {
        coefficient: t * gamma(1.0 + g)? / oq.powf(g),
        power_of_n: -1.0 - g,
        log_power: 0,
    }];
    let truncated = (g - g.round()).abs() < POLE_TOL;
    if !truncated {
        let kappa = t * PI / sin_pi(g);
        terms.push(TailTerm {
            coefficient: kappa * kappa * rgamma(-2.0 * g) / (2.0 * oq.powf(2.0 * g)),
            power_of_n: -1.0 - 2.0 * g,
            log_power: 0,
        });
        terms.push(TailTerm {
            coefficient: -t * gamma(2.0 + g)? / oq.powf(1.0 + g) * (t / (1.0 - g) + g * (1.0 + q) / 2.0),
            power_of_n: -2.0 - g,
            log_power: 0,
        });
        sort_terms(&mut terms);
    }
    Ok(TailExpansion {
        regime: TailRegime::LpsmGeneral,
        terms,
        cutoff_base: 1.0,
        truncated,
    })
}

/// Three-term tail of the limit law at γ = 1.
pub fn tail_lpsm_gamma1(theta: f64, q: f64) -> Result<TailExpansion> {
    LpsmParams::new(1.0, theta, q).validate()?;
    let oq = 1.0 - q;
    let l = -(-q).ln_1p();
    let t2 = theta * theta;
    let terms = vec![
        TailTerm {
            coefficient: theta / oq,
            power_of_n: -2.0,
            log_power: 0,
        },
        TailTerm {
            coefficient: 2.0 * t2 / (oq * oq),
            power_of_n: -3.0,
            log_power: 1,
        },
        TailTerm {
            coefficient: (t2 * (2.0 * EULER_GAMMA - 3.0 - 2.0 * l) - theta * (1.0 + q)) / (oq * oq),
            power_of_n: -3.0,
            log_power: 0,
        },
    ];
    let regime = if q == 0.0 {
        TailRegime::LpsmGamma1NoDeath
    } else {
        TailRegime::LpsmGamma1
    };
    Ok(TailExpansion {
        regime,
        terms,
        cutoff_base: 1.0,
        truncated: false,
    })
}

/// θ/(n(n+1)) + θ²[2C_E − 3 + 2ψ(n)]/(n(n+1)(n+2)) at γ = 1, q = 0.
pub fn tail_gamma1_two_term(theta: f64, n: f64) -> Result<f64> {
    if !(n >= 1.0) {
        return Err(Error::domain(format!("n must be at least 1, got {n}")));
    }
    let a = n * (n + 1.0);
    Ok(theta / a + theta * theta * (2.0 * EULER_GAMMA - 3.0 + 2.0 * digamma(n)?) / (a * (n + 2.0)))
}

/// Tail of the finite-N law at γ = 1, q = 0, with the (1 − 1/N)^n cut-off.
pub fn tail_finite_n_gamma1(params: &ModelParams) -> Result<TailExpansion> {
    let d = derive(params)?;
    if (d.gamma - 1.0).abs() >= GAMMA1_TOL || d.q != 0.0 || !(d.mu > 0.0 && d.mu < 1.0) {
        return Err(Error::Unsupported(format!(
            "finite-N tail needs gamma = 1, q = 0 and 0 < mu < 1 (got gamma = {}, q = {}, mu = {})",
            d.gamma, d.q, d.mu
        )));
    }
    let (mu, theta) = (d.mu, d.theta);
    let r = rgamma(mu);
    let terms = vec![
        TailTerm {
            coefficient: r,
            power_of_n: mu - 1.0,
            log_power: 0,
        },
        TailTerm {
            coefficient: r * (1.0 - mu) * (theta - mu),
            power_of_n: mu - 2.0,
            log_power: 1,
        },
        TailTerm {
            coefficient: -r * (1.0 - mu) * ((theta - mu) * digamma(mu - 1.0)? + mu / 2.0),
            power_of_n: mu - 2.0,
            log_power: 0,
        },
    ];
    Ok(TailExpansion {
        regime: TailRegime::FiniteNGamma1NoDeath,
        terms,
        cutoff_base: 1.0 - params.n0 / params.n,
        truncated: false,
    })
}

/// Least-squares line through (ln n, ln p_n).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits ln p_n against ln n over n_lo ≤ n ≤ n_hi.
pub fn fit_tail_exponent(pmf: &Pmf, n_lo: usize, n_hi: usize) -> Result<TailFit> {
    if !(n_lo >= 10 && n_hi > n_lo) {
        return Err(Error::validation(format!(
            "fit range needs 10 <= n_lo < n_hi, got [{n_lo}, {n_hi}]"
        )));
    }
    if n_hi > pmf.nmax() {
        return Err(Error::validation(format!(
            "fit range ends at {n_hi} beyond nmax = {}",
            pmf.nmax()
        )));
    }
    let mut pts = Vec::with_capacity(n_hi - n_lo + 1);
    for n in n_lo..=n_hi {
        let v = pmf.probs[n];
        if !(v > 0.0) {
            return Err(Error::domain(format!("p_{n} = {v} is not positive")));
        }
        pts.push(((n as f64).ln(), v.ln()));
    }
    Ok(least_squares(&pts))
}

fn least_squares(pts: &[(f64, f64)]) -> TailFit {
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    TailFit {
        slope,
        intercept: my - slope * mx,
        r2,
    }
}
