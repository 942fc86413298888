//! Exact finite-N mutant-count distribution: log-generating function,
//! moments, recursion coefficients and the compound-Poisson recursion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive, Derived, ModelParams, ParamSet};
use crate::par::{map_range, Exec};
use crate::quad;
use crate::specfun::{hyp2f1_abc, hyp2f1_with_complement, KahanSum, DEFAULT_REL_TOL};

/// Tolerance on |γ−1| and |γ−2| for switching to the special moment branches.
pub const GAMMA_BRANCH_TOL: f64 = 1e-8;

/// Largest number of decimal digits the alternating binomial sum may lose.
pub const MAX_DIGITS_LOST: f64 = 6.0;

/// Beyond this index the binomial form is not attempted by [`coefficients_auto`].
pub const BINOMIAL_K_MAX: usize = 200;

/// Which formula produced a coefficient series or pmf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    ExactGeneral,
    ExactNeutral,
    Lpsm,
}

/// Taylor coefficients q₀..q_nmax of the log-generating function.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientSeries {
    pub regime: Regime,
    pub q_coeffs: Vec<f64>,
    pub params: ParamSet,
}

/// How the length of a [`Pmf`] was decided.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Truncation {
    /// Caller fixed nmax.
    Fixed,
    /// Truncation mass fell below `eps`.
    Converged { eps: f64 },
    /// The cap was reached before the truncation mass fell below `eps`.
    CapReached { eps: f64, cap: usize },
}

/// A truncated probability table p₀..p_nmax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub params: ParamSet,
    pub regime: Regime,
    /// 1 − Σ p_n, clamped at 0.
    pub truncation_mass: f64,
    #[serde(rename = "p")]
    pub probs: Vec<f64>,
    /// Some p_n below 1e-300 were flushed to zero.
    #[serde(skip, default)]
    pub underflow_flushed: bool,
    #[serde(skip, default = "fixed")]
    pub truncation: Truncation,
}

fn fixed() -> Truncation {
    Truncation::Fixed
}

impl Pmf {
    pub fn nmax(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    /// Σ n·p_n over the table.
    pub fn mean(&self) -> f64 {
        let mut s = KahanSum::new(0.0);
        for (n, p) in self.probs.iter().enumerate() {
            s.add(n as f64 * p);
        }
        s.value()
    }

    /// Σ n²p_n − (Σ n p_n)² over the table.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let mut s = KahanSum::new(0.0);
        for (n, p) in self.probs.iter().enumerate() {
            let d = n as f64 - m;
            s.add(d * d * p);
        }
        s.value() + m * m * self.truncation_mass
    }

    /// Writes the table as CSV with header `n,p` and 17 significant digits.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("n,p\n");
        for (n, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{n},{}\n", fmt_sig(*p, digits)));
        }
        out
    }
}

/// Formats `x` with `digits` significant digits: positional for moderate
/// magnitudes, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    let d = digits.clamp(1, 17);
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", d - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..d as i32).contains(&exp) {
        let decimals = (d as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Λ_B(z) = ln E[z^B] for z ∈ [0, 1].
pub fn log_gf_b(p: &ModelParams, z: f64) -> Result<f64> {
    let d = derive(p)?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain(format!("log_gf_b requires z in [0, 1], got {z}")));
    }
    if z == 1.0 || d.theta == 0.0 || d.growth == 1.0 {
        return Ok(0.0);
    }
    let g = d.gamma;
    let big_m = d.growth.powf(1.0 / g);
    let xi = (d.q - z) / (1.0 - z);
    let one_minus_xi = (1.0 - d.q) / (1.0 - z);
    let f_full = hyp2f1_with_complement(1.0, g, 1.0 + g, xi, one_minus_xi, DEFAULT_REL_TOL)?;
    let xs = xi / big_m;
    let f_scaled = hyp2f1_with_complement(1.0, g, 1.0 + g, xs, 1.0 - xs, DEFAULT_REL_TOL)?;
    Ok(d.theta / g * (f_scaled / d.growth - f_full))
}

/// E(B).
pub fn mean_b(p: &ModelParams) -> Result<f64> {
    let d = derive(p)?;
    Ok(mean_from(&d))
}

fn mean_from(d: &Derived) -> f64 {
    let g = d.gamma;
    let r = d.growth;
    let pre = d.theta / (1.0 - d.q);
    if (g - 1.0).abs() < GAMMA_BRANCH_TOL {
        pre * r.ln()
    } else {
        pre * (r.powf(1.0 / g - 1.0) - 1.0) / (1.0 - g)
    }
}

/// Var(B).
pub fn variance_b(p: &ModelParams) -> Result<f64> {
    let d = derive(p)?;
    let g = d.gamma;
    let q = d.q;
    let r = d.growth;
    let pre = d.theta / ((1.0 - q) * (1.0 - q));
    let body = if (g - 1.0).abs() < GAMMA_BRANCH_TOL {
        2.0 * (r - 1.0) - (1.0 + q) * r.ln()
    } else if (g - 2.0).abs() < GAMMA_BRANCH_TOL {
        (1.0 + q) * (r.powf(-0.5) - 1.0) + r.ln()
    } else {
        2.0 * r.powf(2.0 / g - 1.0) / (2.0 - g)
            + (1.0 + q) * r.powf(1.0 / g - 1.0) / (g - 1.0)
            + (q * (2.0 - g) + g) / ((2.0 - g) * (1.0 - g))
    };
    Ok(pre * body)
}

/// Coefficients from the closed hypergeometric form, with the alternating
/// binomial sum monitored for cancellation.
///
/// Fails with [`Error::Cancellation`] at the first k whose binomial sum
/// loses more than [`MAX_DIGITS_LOST`] digits.
pub fn coefficients_exact(p: &ModelParams, nmax: usize) -> Result<CoefficientSeries> {
    let d = derive(p)?;
    let mut q = Vec::with_capacity(nmax + 1);
    q.push(q0_exact(&d)?);
    let ctx = BinomialContext::new(&d, nmax)?;
    for k in 1..=nmax {
        q.push(ctx.coefficient(k)?);
    }
    Ok(CoefficientSeries {
        regime: Regime::ExactGeneral,
        q_coeffs: q,
        params: (*p).into(),
    })
}

fn q0_exact(d: &Derived) -> Result<f64> {
    if d.theta == 0.0 || d.growth == 1.0 {
        return Ok(0.0);
    }
    let g = d.gamma;
    let big_m = d.growth.powf(1.0 / g);
    let f_scaled = hyp2f1_abc(1.0, g, 1.0 + g, d.q / big_m)?;
    let f_full = hyp2f1_abc(1.0, g, 1.0 + g, d.q)?;
    Ok(d.theta / g * (f_scaled / d.growth - f_full))
}

/// Precomputed pieces of the binomial-sum coefficient formula.
struct BinomialContext {
    theta: f64,
    gamma: f64,
    q: f64,
    /// μ·N₀ — the mutation rate rescaled to a single initial cell.
    mu_eff: f64,
    /// (1−q)/(q−M), M = (N/N₀)^{1/γ}.
    base: f64,
    /// F(1, γ; 1+γ+j; q/M) for j = 1..=nmax (index j−1).
    f_scaled: Vec<f64>,
}

impl BinomialContext {
    fn new(d: &Derived, nmax: usize) -> Result<Self> {
        let g = d.gamma;
        let big_m = d.growth.powf(1.0 / g);
        let x = d.q / big_m;
        let f_scaled = (1..=nmax)
            .map(|j| hyp2f1_abc(1.0, g, 1.0 + g + j as f64, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(BinomialContext {
            theta: d.theta,
            gamma: g,
            q: d.q,
            mu_eff: d.theta / d.growth,
            base: (1.0 - d.q) / (d.q - big_m),
            f_scaled,
        })
    }

    fn coefficient(&self, k: usize) -> Result<f64> {
        if self.theta == 0.0 {
            return Ok(0.0);
        }
        let g = self.gamma;
        // Σ_{j=1}^{k} C(k−1, j−1)/(j+γ) · r^j · F(1, γ; 1+γ+j; q/M)
        let mut sum = KahanSum::new(0.0);
        let mut abs_sum = 0.0;
        let mut binom = 1.0; // C(k−1, j−1)
        let mut rpow = 1.0;
        for j in 1..=k {
            rpow *= self.base;
            let t = binom * rpow / (j as f64 + g) * self.f_scaled[j - 1];
            sum.add(t);
            abs_sum += t.abs();
            binom *= (k - j) as f64 / j as f64;
        }
        let s = sum.value();
        if abs_sum > 0.0 {
            let lost = (abs_sum / s.abs()).log10();
            if !(lost <= MAX_DIGITS_LOST) {
                return Err(Error::Cancellation { k, digits: lost });
            }
        }
        let lead = self.theta * lpsm_prefactor(k, g) * hyp2f1_abc(k as f64, g, 1.0 + g + k as f64, self.q)?;
        Ok(self.mu_eff * s + lead)
    }
}

/// (k−1)!/(γ+1)_k by a running product.
pub fn lpsm_prefactor(k: usize, gamma: f64) -> f64 {
    let mut c = 1.0 / (gamma + 1.0);
    for i in 1..k {
        c *= i as f64 / (gamma + 1.0 + i as f64);
    }
    c
}

/// Coefficients from the positive integral representation
/// q_k = θ ∫₀^R ρ^{k−1} (1−ρ)^γ (1−qρ)^{−γ} dρ, R = (M−1)/(M−q),
/// which involves no cancellation at any k.
pub fn coefficients_exact_quadrature(p: &ModelParams, nmax: usize, exec: Exec) -> Result<CoefficientSeries> {
    let d = derive(p)?;
    let q0 = q0_exact(&d)?;
    let ks = map_range(exec, 1..nmax + 1, |k| quadrature_coefficient(&d, k));
    let mut q = Vec::with_capacity(nmax + 1);
    q.push(q0);
    for v in ks {
        q.push(v?);
    }
    Ok(CoefficientSeries {
        regime: Regime::ExactGeneral,
        q_coeffs: q,
        params: (*p).into(),
    })
}

fn quadrature_coefficient(d: &Derived, k: usize) -> Result<f64> {
    if d.theta == 0.0 || d.growth == 1.0 {
        return Ok(0.0);
    }
    let g = d.gamma;
    let q = d.q;
    let big_m = d.growth.powf(1.0 / g);
    let upper = (big_m - 1.0) / (big_m - q);
    let one_minus_upper = (1.0 - q) / (big_m - q);
    let kf = k as f64;
    // ρ = R·e^{−t/k}: ρ^{k−1} dρ = R^k e^{−t} dt / k.
    let integrand = |t: f64| {
        let e = -(-t / kf).exp_m1();
        let one_minus_rho = one_minus_upper + upper * e;
        let rho = upper * (1.0 - e);
        (-t).exp() * (one_minus_rho / (1.0 - q * rho)).powf(g)
    };
    let t_max = 45.0 + g * (1.0 / one_minus_upper).ln();
    let v = quad::integrate(integrand, 0.0, t_max, 0.0, 1e-14)?;
    Ok(d.theta * upper.powf(kf) / kf * v)
}

/// Coefficient series for any γ: the neutral closed form when |γ−1| < 1e-8,
/// otherwise the binomial form for k ≤ [`BINOMIAL_K_MAX`] until it starts to
/// cancel, and the integral representation from there on.
pub fn coefficients_auto(p: &ModelParams, nmax: usize, exec: Exec) -> Result<CoefficientSeries> {
    let d = derive(p)?;
    if (d.gamma - 1.0).abs() < GAMMA_BRANCH_TOL {
        return coefficients_neutral(p, nmax);
    }
    let mut q = vec![q0_exact(&d)?];
    let kb = nmax.min(BINOMIAL_K_MAX);
    let ctx = BinomialContext::new(&d, kb)?;
    let mut switch = nmax + 1;
    for k in 1..=kb {
        match ctx.coefficient(k) {
            Ok(v) => q.push(v),
            Err(Error::Cancellation { .. }) => {
                switch = k;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if switch == nmax + 1 && kb < nmax {
        switch = kb + 1;
    }
    if switch <= nmax {
        let tail = map_range(exec, switch..nmax + 1, |k| quadrature_coefficient(&d, k));
        for v in tail {
            q.push(v?);
        }
    }
    Ok(CoefficientSeries {
        regime: Regime::ExactGeneral,
        q_coeffs: q,
        params: (*p).into(),
    })
}

/// Coefficients in the neutral case γ = 1.
pub fn coefficients_neutral(p: &ModelParams, nmax: usize) -> Result<CoefficientSeries> {
    let d = derive(p)?;
    if (d.gamma - 1.0).abs() >= GAMMA_BRANCH_TOL {
        return Err(Error::Unsupported(format!(
            "neutral coefficients need gamma = 1, got {}",
            d.gamma
        )));
    }
    let theta = d.theta;
    let q = d.q;
    // With N₀ > 1 the model is that of a single founder grown by N/N₀.
    let phi = 1.0 - 1.0 / d.growth;
    let mut out = Vec::with_capacity(nmax + 1);
    if q == 0.0 {
        out.push(-theta * phi);
        let mut phik = 1.0;
        for k in 1..=nmax {
            phik *= phi;
            let kf = k as f64;
            out.push(theta * phik * (1.0 + kf * (1.0 - phi)) / (kf * (kf + 1.0)));
        }
    } else {
        out.push(-theta / q * (phi * q / (1.0 - q)).ln_1p());
        let x = -phi * q / (1.0 - q);
        let base = phi / (1.0 - q * (1.0 - phi));
        let mut bk = 1.0;
        for k in 1..=nmax {
            bk *= base;
            let kf = k as f64;
            let f = hyp2f1_abc(1.0, 1.0, 2.0 + kf, x)?;
            out.push(theta * bk * (1.0 / kf - phi / (kf + 1.0) * f));
        }
    }
    Ok(CoefficientSeries {
        regime: Regime::ExactNeutral,
        q_coeffs: out,
        params: (*p).into(),
    })
}

/// Runs the compound-Poisson recursion p_n = (1/n) Σ_{k<n} (n−k) q_{n−k} p_k.
pub fn pmf_from_coefficients(coeffs: &CoefficientSeries, nmax: usize) -> Result<Pmf> {
    let q = &coeffs.q_coeffs;
    if q.len() < nmax + 1 {
        return Err(Error::validation(format!(
            "coefficient series has {} entries, need {}",
            q.len(),
            nmax + 1
        )));
    }
    if !(q[0] <= 1e-12) {
        return Err(Error::numeric(format!("q0 = {} is positive", q[0])));
    }
    let kq: Vec<f64> = (0..=nmax).map(|k| k as f64 * q[k]).collect();
    let mut p = Vec::with_capacity(nmax + 1);
    p.push(q[0].min(0.0).exp());
    let mut flushed = false;
    for n in 1..=nmax {
        let mut s = 0.0;
        for k in 0..n {
            s += kq[n - k] * p[k];
        }
        let mut v = s / n as f64;
        if v < 0.0 {
            if v > -1e-12 {
                v = 0.0;
            } else {
                return Err(Error::numeric(format!("recursion produced p_{n} = {v:e}")));
            }
        }
        if v < 1e-300 && v != 0.0 {
            v = 0.0;
            flushed = true;
        }
        p.push(v);
    }
    let mut total = KahanSum::new(0.0);
    for &v in &p {
        total.add(v);
    }
    let mass = 1.0 - total.value();
    if mass < -1e-10 {
        return Err(Error::numeric(format!("probabilities sum to {} > 1", total.value())));
    }
    Ok(Pmf {
        params: coeffs.params,
        regime: coeffs.regime,
        truncation_mass: mass.max(0.0),
        probs: p,
        underflow_flushed: flushed,
        truncation: Truncation::Fixed,
    })
}

/// Exact pmf of B up to `nmax` using [`coefficients_auto`].
pub fn pmf_exact(p: &ModelParams, nmax: usize, exec: Exec) -> Result<Pmf> {
    let c = coefficients_auto(p, nmax, exec)?;
    pmf_from_coefficients(&c, nmax)
}

/// Grows nmax geometrically until the truncation mass is below `eps` or `cap` is hit.
pub fn pmf_adaptive<F>(mut build: F, eps: f64, cap: usize) -> Result<Pmf>
where
    F: FnMut(usize) -> Result<Pmf>,
{
    let mut nmax = 64.min(cap);
    loop {
        let mut pmf = build(nmax)?;
        if pmf.truncation_mass < eps {
            pmf.truncation = Truncation::Converged { eps };
            return Ok(pmf);
        }
        if nmax >= cap {
            pmf.truncation = Truncation::CapReached { eps, cap };
            return Ok(pmf);
        }
        nmax = (nmax * 2).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neutral100() -> ModelParams {
        ModelParams::new(1.0, 0.0, 0.01, 1.0, 100.0)
    }

    #[test]
    fn log_gf_examples() {
        let p = neutral100();
        let xi: f64 = -1.0;
        let expected = (100.0 * 0.01 / xi) * ((1.0 - xi) / (1.0 - xi / 100.0)).ln();
        let v = log_gf_b(&p, 0.5).unwrap();
        assert!((v - expected).abs() < 1e-13, "{v} vs {expected}");
        assert!((v + 0.6832).abs() < 1e-4);
        assert_eq!(
            log_gf_b(&ModelParams::new(1.0, 0.0, 0.0, 1.0, 100.0), 0.3).unwrap(),
            0.0
        );
        assert_eq!(log_gf_b(&p, 1.0).unwrap(), 0.0);
        let same = ModelParams::new(1.0, 0.2, 0.01, 1.3, 50.0).with_n0(50.0);
        assert_eq!(log_gf_b(&same, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn moment_examples() {
        let p = neutral100();
        assert!((mean_b(&p).unwrap() - 100f64.ln()).abs() < 1e-12);
        assert!((variance_b(&p).unwrap() - (198.0 - 100f64.ln())).abs() < 1e-10);
        let p2 = ModelParams::from_reduced(2.0, 0.0, 0.001, 1e4);
        assert!((mean_b(&p2).unwrap() - 9.9).abs() < 1e-10);
        assert!((variance_b(&p2).unwrap() - 10.0 * (0.01 - 1.0 + 1e4f64.ln())).abs() < 1e-9);
        let zero = ModelParams::new(1.0, 0.0, 0.0, 2.0, 100.0);
        assert_eq!(mean_b(&zero).unwrap(), 0.0);
        assert_eq!(variance_b(&zero).unwrap(), 0.0);
    }

    #[test]
    fn neutral_coefficient_examples() {
        let c = coefficients_exact(&neutral100(), 3).unwrap().q_coeffs;
        assert!((c[0] + 0.99).abs() < 1e-13);
        assert!((c[1] - 0.49995).abs() < 1e-13);
        let n = coefficients_neutral(&neutral100(), 3).unwrap().q_coeffs;
        assert!((n[0] + 0.99).abs() < 1e-15);
        assert!((n[1] - 0.49995).abs() < 1e-15);
        // θ = 2, φ = 1 (N → ∞ is approached with a huge N)
        let big = ModelParams::new(1.0, 0.0, 2e-15, 1.0, 1e15);
        let b = coefficients_neutral(&big, 2).unwrap().q_coeffs;
        assert!((b[2] - 1.0 / 3.0).abs() < 1e-12);
        // continuity in q
        let tiny_q = ModelParams::new(1.0, 1e-10, 0.01, 1.0 - 1e-10, 100.0);
        let t = coefficients_neutral(&tiny_q, 0).unwrap().q_coeffs;
        assert!((t[0] + 0.99).abs() < 1e-8);
        // p0 with death
        let pd = ModelParams::new(1.0, 0.5, 0.01, 0.5, 100.0);
        let c = coefficients_neutral(&pd, 0).unwrap();
        let p0 = c.q_coeffs[0].exp();
        assert!((p0 - 1.99f64.powf(-2.0)).abs() < 1e-14);
        assert!((p0 - 0.25252).abs() < 1e-5);
    }

    #[test]
    fn zero_mutation_rate() {
        let p = ModelParams::new(1.0, 0.3, 0.0, 1.7, 100.0);
        let c = coefficients_exact(&p, 10).unwrap();
        assert!(c.q_coeffs.iter().all(|&v| v == 0.0));
        let pmf = pmf_from_coefficients(&c, 10).unwrap();
        assert_eq!(pmf.probs[0], 1.0);
        assert!(pmf.probs[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn recursion_lea_coulson() {
        let q: Vec<f64> = (0..=5)
            .map(|k| if k == 0 { -1.0 } else { 1.0 / (k * (k + 1)) as f64 })
            .collect();
        let c = CoefficientSeries {
            regime: Regime::Lpsm,
            q_coeffs: q,
            params: crate::model::LpsmParams::new(1.0, 1.0, 0.0).into(),
        };
        let pmf = pmf_from_coefficients(&c, 5).unwrap();
        let e = (-1f64).exp();
        assert!((pmf.probs[0] - e).abs() < 1e-15);
        assert!((pmf.probs[1] - e / 2.0).abs() < 1e-15);
    }

    #[test]
    fn binomial_and_integral_forms_agree() {
        for &(g, q, n) in &[
            (1.5, 0.5, 100.0),
            (0.5, 0.0, 1000.0),
            (3.0, 0.5, 100.0),
            (2.0, 0.2, 1e3),
        ] {
            let p = ModelParams::from_reduced(g, q, 0.01, n);
            let a = coefficients_exact(&p, 20).unwrap().q_coeffs;
            let b = coefficients_exact_quadrature(&p, 20, Exec::Sequential)
                .unwrap()
                .q_coeffs;
            for k in 0..=20 {
                assert!(
                    (a[k] - b[k]).abs() <= 1e-9 * b[k].abs(),
                    "γ={g} q={q} k={k}: {} vs {}",
                    a[k],
                    b[k]
                );
            }
        }
    }

    #[test]
    fn cancellation_is_detected() {
        let p = ModelParams::from_reduced(3.0, 0.0, 0.01, 100.0);
        match coefficients_exact(&p, 120) {
            Err(Error::Cancellation { k, digits }) => assert!(k > 10 && digits > 6.0),
            other => panic!("expected cancellation, got {other:?}"),
        }
        let auto = coefficients_auto(&p, 120, Exec::default()).unwrap();
        assert!(auto.q_coeffs[1..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn n0_reduces_to_rescaled_single_founder() {
        let p = ModelParams::new(1.0, 0.25, 0.02, 1.2, 400.0).with_n0(4.0);
        let d = derive(&p).unwrap();
        let single = ModelParams::new(1.0, 0.25, 0.02 * 4.0, 1.2, 100.0);
        let a = coefficients_auto(&p, 30, Exec::Sequential).unwrap().q_coeffs;
        let b = coefficients_auto(&single, 30, Exec::Sequential).unwrap().q_coeffs;
        for k in 0..=30 {
            assert!((a[k] - b[k]).abs() <= 1e-12 * b[k].abs().max(1e-300));
        }
        assert!((d.theta - 8.0).abs() < 1e-12);
        assert!((log_gf_b(&p, 0.3).unwrap() - log_gf_b(&single, 0.3).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig((-1f64).exp(), 7), "0.3678794");
        assert_eq!(fmt_sig(1.0, 17), "1");
        assert_eq!(fmt_sig(1.5e-8, 3), "1.5e-8");
        assert_eq!(fmt_sig(123456.0, 3), "1.23e5");
        assert_eq!(fmt_sig(-2.5, 17), "-2.5");
        assert_eq!(fmt_sig(0.0, 5), "0");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_sig(x, 17).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let pmf = pmf_exact(&neutral100(), 20, Exec::Sequential).unwrap();
        let json = serde_json::to_string(&pmf).unwrap();
        assert!(json.starts_with(r#"{"params":{"alpha""#));
        let back: Pmf = serde_json::from_str(&json).unwrap();
        assert_eq!(back.probs, pmf.probs);
        let csv = pmf.to_csv(17);
        assert!(csv.starts_with("n,p\n0,"));
        let parsed: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(parsed, pmf.probs);
    }
}
