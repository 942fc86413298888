//! The large-population small-mutation limit V with parameters (γ, θ, q).

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{lpsm_prefactor, pmf_from_coefficients, CoefficientSeries, Pmf, Regime};
use crate::model::LpsmParams;
use crate::oracle;
use crate::par::{map_range, Exec};
use crate::specfun::{hyp2f1_abc, hyp2f1_with_complement, DEFAULT_REL_TOL};

/// A moment that may be infinite. Serialises as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn value(&self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(*v),
            Moment::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Moment::Infinite)
    }

    pub fn render(&self, digits: usize) -> String {
        match self {
            Moment::Finite(v) => crate::exact::fmt_sig(*v, digits),
            Moment::Infinite => "inf".into(),
        }
    }
}

impl Serialize for Moment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Moment::Finite(v) => s.serialize_f64(*v),
            Moment::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Λ_V(z) = ln E[z^V] for z ∈ [0, 1].
///
/// Evaluated both as −(θ/γ)·F(1, γ; 1+γ; ξ) and as −(θ/γ)(1−y)·F(1, 1; 1+γ; y);
/// the two must agree to 1e-10 relative or a numeric error is raised.
pub fn log_gf_v(p: &LpsmParams, z: f64) -> Result<f64> {
    p.validate()?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain(format!("log_gf_v requires z in [0, 1], got {z}")));
    }
    if z == 1.0 || p.theta == 0.0 {
        return Ok(0.0);
    }
    let g = p.gamma;
    let q = p.q;
    let xi = (q - z) / (1.0 - z);
    let xi_form = -p.theta / g * hyp2f1_with_complement(1.0, g, 1.0 + g, xi, (1.0 - q) / (1.0 - z), DEFAULT_REL_TOL)?;
    let u = (1.0 - z) / (1.0 - q);
    let y_form = log_gf_v_complement(p, u)?;
    if (xi_form - y_form).abs() > 1e-10 * xi_form.abs().max(y_form.abs()) {
        return Err(Error::numeric(format!(
            "log_gf_v forms disagree at z = {z}: {xi_form} vs {y_form}"
        )));
    }
    Ok(xi_form)
}

/// Λ_V as a function of u = 1 − y = (1−z)/(1−q), accurate as u → 0:
/// Λ_V = −(θ/γ)·u·F(1, 1; 1+γ; 1−u).
pub fn log_gf_v_complement(p: &LpsmParams, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let f = hyp2f1_with_complement(1.0, 1.0, 1.0 + p.gamma, 1.0 - u, u, DEFAULT_REL_TOL)?;
    Ok(-p.theta / p.gamma * u * f)
}

/// Recursion coefficients of V.
pub fn coefficients_lpsm(p: &LpsmParams, nmax: usize, exec: Exec) -> Result<CoefficientSeries> {
    p.validate()?;
    let g = p.gamma;
    let q0 = -p.theta / g * hyp2f1_abc(1.0, g, 1.0 + g, p.q)?;
    let mut pref = Vec::with_capacity(nmax + 1);
    pref.push(0.0);
    let mut c = 1.0 / (g + 1.0);
    for k in 1..=nmax {
        pref.push(c);
        c *= k as f64 / (g + 1.0 + k as f64);
    }
    let rest = map_range(exec, 1..nmax + 1, |k| {
        if p.q == 0.0 {
            Ok(p.theta * pref[k])
        } else {
            hyp2f1_abc(k as f64, g, 1.0 + g + k as f64, p.q).map(|f| p.theta * pref[k] * f)
        }
    });
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(q0);
    for v in rest {
        out.push(v?);
    }
    debug_assert!(nmax == 0 || (pref[1] - lpsm_prefactor(1, g)).abs() < 1e-15);
    Ok(CoefficientSeries {
        regime: Regime::Lpsm,
        q_coeffs: out,
        params: (*p).into(),
    })
}

/// Pmf of V up to `nmax`.
pub fn pmf_v(p: &LpsmParams, nmax: usize) -> Result<Pmf> {
    pmf_v_with(p, nmax, Exec::default())
}

pub fn pmf_v_with(p: &LpsmParams, nmax: usize, exec: Exec) -> Result<Pmf> {
    let c = coefficients_lpsm(p, nmax, exec)?;
    pmf_from_coefficients(&c, nmax)
}

/// Mean and variance of V.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentsV {
    pub mean: Moment,
    pub variance: Moment,
}

pub fn moments_v(p: &LpsmParams) -> Result<MomentsV> {
    p.validate()?;
    let (g, t, q) = (p.gamma, p.theta, p.q);
    let mean = if g > 1.0 {
        Moment::Finite(t / ((1.0 - q) * (g - 1.0)))
    } else {
        Moment::Infinite
    };
    let variance = if g > 2.0 {
        Moment::Finite(t / ((1.0 - q) * (1.0 - q)) * (q * (2.0 - g) + g) / ((g - 2.0) * (g - 1.0)))
    } else {
        Moment::Infinite
    };
    Ok(MomentsV { mean, variance })
}

/// P(V = 0) and P(V > 0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Resistance {
    pub p0: f64,
    pub p_positive: f64,
}

pub fn resistance_p0(p: &LpsmParams) -> Result<Resistance> {
    p.validate()?;
    let g = p.gamma;
    let l = -p.theta / g * hyp2f1_abc(1.0, g, 1.0 + g, p.q)?;
    Ok(Resistance {
        p0: l.exp(),
        p_positive: -l.exp_m1(),
    })
}

/// p₁/p₀ = θ/(γ+1)·F(1, γ; 2+γ; q).
pub fn ratio_p1_p0(p: &LpsmParams) -> Result<f64> {
    p.validate()?;
    Ok(p.theta / (p.gamma + 1.0) * hyp2f1_abc(1.0, p.gamma, 2.0 + p.gamma, p.q)?)
}

/// An exact θ value together with its large-γ approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaPair {
    pub exact: f64,
    pub approx: f64,
}

fn check_gamma_q(gamma: f64, q: f64) -> Result<()> {
    LpsmParams::new(gamma, 1.0, q).validate()
}

/// θ at which p₁ = p₀, i.e. the boundary between mode 0 and mode ≥ 1.
pub fn boundary_theta(gamma: f64, q: f64) -> Result<ThetaPair> {
    check_gamma_q(gamma, q)?;
    Ok(ThetaPair {
        exact: (1.0 + gamma) / hyp2f1_abc(1.0, gamma, 2.0 + gamma, q)?,
        approx: 1.0 + q + (1.0 - q) * gamma,
    })
}

/// θ for which P(V = 0) equals `p0_target`.
pub fn p0_contour_theta(gamma: f64, q: f64, p0_target: f64) -> Result<ThetaPair> {
    check_gamma_q(gamma, q)?;
    if !(p0_target > 0.0 && p0_target < 1.0) {
        return Err(Error::validation(format!(
            "target p0 must lie in (0, 1), got {p0_target}"
        )));
    }
    let l = p0_target.ln();
    Ok(ThetaPair {
        exact: -gamma * l / hyp2f1_abc(1.0, gamma, 1.0 + gamma, q)?,
        approx: -(gamma * (1.0 - q) + q) * l,
    })
}

/// Location and height of the most probable value of V.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeReport {
    pub mode: usize,
    pub p_at_mode: f64,
    pub p0: f64,
    pub ratio_p1_p0: f64,
    /// No probability beyond the scanned range can exceed `p_at_mode`.
    pub certified: bool,
    #[serde(skip)]
    pub local_maxima: Vec<usize>,
    #[serde(skip)]
    pub multimodal: bool,
    #[serde(skip)]
    pub scanned: usize,
}

/// Scans the pmf of V until the running maximum is provably global.
pub fn mode_v(p: &LpsmParams, nmax_cap: usize) -> Result<ModeReport> {
    p.validate()?;
    let ratio = ratio_p1_p0(p)?;
    // n·p_n = Σ k q_k p_{n−k} and k q_k ≤ θ(1−q)^{−γ}/(1+γ), so p_n ≤ K/n.
    let k_bound = p.theta * (1.0 - p.q).powf(-p.gamma) / (1.0 + p.gamma);
    let mut nmax = 64.min(nmax_cap.max(1));
    loop {
        let pmf = pmf_v(p, nmax)?;
        let probs = &pmf.probs;
        let mut best = 0;
        let mut cum = 0.0;
        let mut certified_at = None;
        for (n, &v) in probs.iter().enumerate() {
            if v > probs[best] {
                best = n;
            }
            cum += v;
            let beyond = (1.0 - cum).min(k_bound / (n + 1) as f64);
            if beyond < probs[best] {
                certified_at = Some(n);
                break;
            }
        }
        if certified_at.is_some() || nmax >= nmax_cap {
            let end = certified_at.unwrap_or(probs.len() - 1);
            let local_maxima = local_maxima(&probs[..=(end + 1).min(probs.len() - 1)]);
            return Ok(ModeReport {
                mode: best,
                p_at_mode: probs[best],
                p0: probs[0],
                ratio_p1_p0: ratio,
                certified: certified_at.is_some(),
                multimodal: local_maxima.len() > 1,
                local_maxima,
                scanned: end,
            });
        }
        nmax = (nmax * 2).min(nmax_cap);
    }
}

fn local_maxima(p: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    for n in 0..p.len() {
        let left = n == 0 || p[n] > p[n - 1];
        let right = n + 1 == p.len() || p[n] >= p[n + 1];
        if left && right && p[n] > 0.0 {
            out.push(n);
        }
    }
    out
}

/// Clone-size generating value and the Poisson intensity of clones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CloneSizeGf {
    /// E[z^X] = 1 − (1−q)·F(1, γ; 1+γ; ξ).
    pub value: f64,
    /// θ/((1−q)γ).
    pub intensity: f64,
}

pub fn clone_size_gf(p: &LpsmParams, z: f64) -> Result<CloneSizeGf> {
    p.validate()?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain(format!("clone_size_gf requires z in [0, 1], got {z}")));
    }
    let intensity = p.theta / ((1.0 - p.q) * p.gamma);
    if z == 1.0 {
        // ξ → −∞ and F(1, γ; 1+γ; ξ) → 0: the law is proper.
        return Ok(CloneSizeGf { value: 1.0, intensity });
    }
    let g = p.gamma;
    let xi = (p.q - z) / (1.0 - z);
    let f = hyp2f1_with_complement(1.0, g, 1.0 + g, xi, (1.0 - p.q) / (1.0 - z), DEFAULT_REL_TOL)?;
    Ok(CloneSizeGf {
        value: 1.0 - (1.0 - p.q) * f,
        intensity,
    })
}

/// Clone-size probabilities P(X = 0..=nmax) by contour extraction.
pub fn clone_size_pmf(p: &LpsmParams, nmax: usize) -> Result<Vec<f64>> {
    oracle::clone_size_pmf_cauchy(p, nmax, oracle::default_grid(nmax))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gf_examples() {
        let p = LpsmParams::new(1.3, 2.0, 0.4);
        assert_eq!(log_gf_v(&p, 1.0).unwrap(), 0.0);
        let p = LpsmParams::new(2.5, 1.7, 0.0);
        assert!((log_gf_v(&p, 0.0).unwrap() + 1.7 / 2.5).abs() < 1e-15);
        let p = LpsmParams::new(1.0, 1.0, 0.0);
        assert!((log_gf_v(&p, 0.5).unwrap() + 2f64.ln()).abs() < 1e-14);
        for &g in &[0.3, 0.5, 1.0, 1.5, 2.0, 4.0, 30.0] {
            for &q in &[0.0, 0.5, 0.9] {
                let p = LpsmParams::new(g, 1.0, q);
                for i in 0..=20 {
                    let z = i as f64 / 20.0;
                    let v = log_gf_v(&p, z).unwrap();
                    assert!(v <= 0.0);
                }
                // Λ_V vanishes like u^{min(γ,1)}, u = (1−z)/(1−q), with a log factor at γ = 1.
                let mut prev = f64::NEG_INFINITY;
                for e in [2, 4, 6, 8, 10, 12] {
                    let v = log_gf_v(&p, 1.0 - 10f64.powi(-e)).unwrap();
                    assert!(v > prev, "γ={g} q={q} e={e}");
                    prev = v;
                }
                let u = 1e-12 / (1.0 - q);
                let bound = 10.0 * u.powf(g.min(1.0)) * (1.0 - u.ln());
                assert!(prev.abs() < bound, "γ={g} q={q} {prev} vs {bound}");
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients_lpsm(&LpsmParams::new(2.0, 1.0, 0.0), 3, Exec::Sequential)
            .unwrap()
            .q_coeffs;
        assert!((c[0] + 0.5).abs() < 1e-15);
        assert!((c[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((c[2] - 1.0 / 12.0).abs() < 1e-15);
        let c = coefficients_lpsm(&LpsmParams::new(1.0, 1.0, 0.0), 50, Exec::Sequential)
            .unwrap()
            .q_coeffs;
        for (k, &ck) in c.iter().enumerate().skip(1) {
            let e = 1.0 / (k * (k + 1)) as f64;
            assert!((ck - e).abs() < 1e-15 * e);
        }
    }

    #[test]
    fn moments_table() {
        let m = moments_v(&LpsmParams::new(2.0, 1.0, 0.0)).unwrap();
        assert_eq!(m.mean, Moment::Finite(1.0));
        assert!(m.variance.is_infinite());
        let m = moments_v(&LpsmParams::new(3.0, 1.0, 0.0)).unwrap();
        assert_eq!(m.mean, Moment::Finite(0.5));
        assert_eq!(m.variance, Moment::Finite(1.5));
        let m = moments_v(&LpsmParams::new(0.5, 1.0, 0.0)).unwrap();
        assert!(m.mean.is_infinite() && m.variance.is_infinite());
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"mean":"inf","variance":"inf"}"#);
    }

    #[test]
    fn resistance_and_ratio() {
        let r = resistance_p0(&LpsmParams::new(2.0, 1.0, 0.0)).unwrap();
        assert!((r.p0 - (-0.5f64).exp()).abs() < 1e-15);
        assert!((r.p0 + r.p_positive - 1.0).abs() < 1e-15);
        assert_eq!(resistance_p0(&LpsmParams::new(2.0, 0.0, 0.3)).unwrap().p0, 1.0);
        assert!((ratio_p1_p0(&LpsmParams::new(1.0, 1.0, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(ratio_p1_p0(&LpsmParams::new(2.5, 3.5, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn boundary_and_contour() {
        let b = boundary_theta(3.0, 0.0).unwrap();
        assert_eq!((b.exact, b.approx), (4.0, 4.0));
        let b = boundary_theta(20.0, 0.5).unwrap();
        assert!(((b.exact - b.approx) / b.approx).abs() < 0.02);
        assert!((b.approx - 11.5).abs() < 1e-12);
        let b = boundary_theta(1e-9, 0.0).unwrap();
        assert!((b.exact - 1.0).abs() < 1e-8);
        let c = p0_contour_theta(2.0, 0.0, (-0.5f64).exp()).unwrap();
        assert!((c.exact - 1.0).abs() < 1e-14);
        let c = p0_contour_theta(2.0, 0.0, 1.0 - 1e-12).unwrap();
        assert!(c.exact < 1e-11);
        let c = p0_contour_theta(10.0, 0.4, 0.5).unwrap();
        assert!(((c.exact - c.approx) / c.exact).abs() < 0.05);
        assert!(p0_contour_theta(1.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn mode_examples() {
        let m = mode_v(&LpsmParams::new(1.5, 1.0, 0.5), 10_000).unwrap();
        assert!(m.ratio_p1_p0 < 1.0);
        assert_eq!(m.mode, 0);
        assert!(m.certified && !m.multimodal);
        let m = mode_v(&LpsmParams::new(0.5, 10.0, 0.5), 100_000).unwrap();
        assert!(m.mode >= 1 && m.certified);
        let m = mode_v(&LpsmParams::new(1.0, 1e-9, 0.0), 1000).unwrap();
        assert_eq!(m.mode, 0);
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.starts_with(r#"{"mode":0,"p_at_mode":"#) && json.ends_with(r#""certified":true}"#));
    }

    #[test]
    fn clone_size_law() {
        let p = LpsmParams::new(1.0, 1.0, 0.0);
        let v = clone_size_gf(&p, 0.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.intensity, 1.0);
        assert_eq!(clone_size_gf(&p, 1.0).unwrap().value, 1.0);
        // clone law weights equal q_k / intensity
        let p = LpsmParams::new(1.5, 2.0, 0.5);
        let law = clone_size_pmf(&p, 30).unwrap();
        let c = coefficients_lpsm(&p, 30, Exec::Sequential).unwrap().q_coeffs;
        let lam = clone_size_gf(&p, 0.0).unwrap().intensity;
        assert!((law[0] - clone_size_gf(&p, 0.0).unwrap().value).abs() < 1e-12);
        for k in 1..=30 {
            assert!((law[k] - c[k] / lam).abs() < 1e-10, "k={k}");
        }
    }
}
