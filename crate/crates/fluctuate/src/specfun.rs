//! Real-argument special functions: log-Gamma, Gamma, Digamma, Trigamma,
//! Pochhammer symbols and the Gauss hypergeometric function 2F1.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Default relative tolerance for [`hyp2f1`].
pub const DEFAULT_REL_TOL: f64 = 1e-13;

/// Hard cap on the number of terms in any hypergeometric series.
pub const MAX_SERIES_TERMS: usize = 100_000;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new(init: f64) -> Self {
        KahanSum { sum: init, comp: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// If `x` is a nonpositive integer, returns `-x`.
pub fn nonpositive_integer(x: f64) -> Option<u64> {
    if x <= 0.0 && x == x.round() && x > -9.0e15 {
        Some((-x) as u64)
    } else {
        None
    }
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.round() {
        return 0.0;
    }
    let r = x - 2.0 * (x / 2.0).round(); // r in [-1, 1]
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let s = if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * r).sin()
    };
    sign * s
}

/// ζ(k) − 1 for k = 0..=40 (entries 0 and 1 unused), summed directly with an
/// Euler–Maclaurin tail so that no cancellation against 1 occurs.
fn zeta_minus_one_table() -> &'static [f64; 41] {
    static TABLE: OnceLock<[f64; 41]> = OnceLock::new();
    TABLE.get_or_init(|| {
        const BERNOULLI: [f64; 6] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
        ];
        let m = 20.0_f64;
        let mut t = [0.0; 41];
        for (k, slot) in t.iter_mut().enumerate().skip(2) {
            let s = k as f64;
            let mut acc = KahanSum::new(0.0);
            for n in (2..20).rev() {
                acc.add((n as f64).powf(-s));
            }
            acc.add(m.powf(1.0 - s) / (s - 1.0));
            acc.add(0.5 * m.powf(-s));
            // B_{2j}/(2j)! * (s)_{2j-1} * m^{-s-2j+1}
            let mut fact = 1.0; // (2j)!
            let mut poch = 1.0; // (s)_{2j-1}
            for (j, b) in BERNOULLI.iter().enumerate() {
                let j = j + 1;
                let two_j = 2 * j;
                fact *= ((two_j - 1) * two_j) as f64;
                poch *= if j == 1 {
                    s
                } else {
                    (s + (two_j - 3) as f64) * (s + (two_j - 2) as f64)
                };
                acc.add(b / fact * poch * m.powf(-s - (two_j - 1) as f64));
            }
            *slot = acc.value();
        }
        t
    })
}

/// ln Γ(1+ε) for |ε| ≤ 0.5, accurate in the relative sense near ε = 0.
fn ln_gamma_1p(eps: f64) -> f64 {
    let zm1 = zeta_minus_one_table();
    let mut acc = KahanSum::new(0.0);
    let mut pow = -eps;
    for (k, z) in zm1.iter().enumerate().skip(2) {
        pow *= -eps;
        let term = z * pow / k as f64;
        acc.add(term);
        if term.abs() < 1e-18 * acc.value().abs().max(1e-300) {
            break;
        }
    }
    -eps.ln_1p() + eps * (1.0 - EULER_GAMMA) + acc.value()
}

/// Stirling series for ln Γ(x), x ≥ 15.
fn ln_gamma_stirling(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            + r2 * (-1.0 / 360.0
                + r2 * (1.0 / 1260.0
                    + r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360_360.0 + r2 / 156.0))))));
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series
}

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        if x == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x == 1.0 || x == 2.0 {
        0.0
    } else if x < 0.5 {
        ln_gamma_1p(x) - x.ln()
    } else if x < 1.5 {
        ln_gamma_1p(x - 1.0)
    } else if x < 2.5 {
        ln_gamma_1p(x - 2.0) + (x - 1.0).ln()
    } else if x < 15.0 {
        // Downward recurrence onto [1.5, 2.5).
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        ln_gamma_1p(y - 2.0) + (y - 1.0).ln() + prod.ln()
    } else {
        ln_gamma_stirling(x)
    }
}

/// ln|Γ(x)| and the sign of Γ(x) for any real x that is not a pole.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(Error::domain("ln_gamma_signed of NaN"));
    }
    if x > 0.0 {
        return Ok((ln_gamma_pos(x), 1.0));
    }
    if nonpositive_integer(x).is_some() {
        return Err(Error::domain(format!("Gamma has a pole at {x}")));
    }
    // Reflection: Γ(x) Γ(1−x) = π / sin(πx).
    let s = sin_pi(x);
    let lg = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Ok((lg, s.signum()))
}

/// Γ(x) on the whole real line; poles are a domain error.
pub fn gamma(x: f64) -> Result<f64> {
    if x > 0.0 && x == x.round() && x <= 30.0 {
        let mut f = 1.0;
        for i in 2..(x as u64) {
            f *= i as f64;
        }
        return Ok(f);
    }
    let (lg, s) = ln_gamma_signed(x)?;
    Ok(s * lg.exp())
}

/// 1/Γ(x), which is entire: returns 0 at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    match ln_gamma_signed(x) {
        Ok((lg, s)) => s * (-lg).exp(),
        Err(_) => 0.0,
    }
}

/// Digamma function Ψ(x) = Γ'(x)/Γ(x).
pub fn digamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("digamma of NaN"));
    }
    if nonpositive_integer(x).is_some() {
        return Err(Error::domain(format!("digamma has a pole at {x}")));
    }
    if x < 0.0 {
        // Ψ(1−x) − Ψ(x) = π cot(πx)
        let cot = sin_pi(x + 0.5) / sin_pi(x);
        return Ok(digamma(1.0 - x)? - PI * cot);
    }
    let mut acc = KahanSum::new(0.0);
    let mut y = x;
    while y < 10.0 {
        acc.add(-1.0 / y);
        y += 1.0;
    }
    let r2 = 1.0 / (y * y);
    let tail = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0 - r2 * (691.0 / 32760.0 - r2 / 12.0))))));
    acc.add(y.ln());
    acc.add(-0.5 / y);
    acc.add(-tail);
    Ok(acc.value())
}

/// Trigamma function Ψ₁(x) = Ψ'(x).
pub fn polygamma1(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("polygamma1 of NaN"));
    }
    if nonpositive_integer(x).is_some() {
        return Err(Error::domain(format!("polygamma1 has a pole at {x}")));
    }
    if x < 0.0 {
        // Ψ₁(1−x) + Ψ₁(x) = π² / sin²(πx)
        let s = sin_pi(x);
        return Ok(PI * PI / (s * s) - polygamma1(1.0 - x)?);
    }
    let mut acc = KahanSum::new(0.0);
    let mut y = x;
    while y < 10.0 {
        acc.add(1.0 / (y * y));
        y += 1.0;
    }
    let r = 1.0 / y;
    let r2 = r * r;
    let tail = r
        + 0.5 * r2
        + r * r2
            * (1.0 / 6.0
                - r2 * (1.0 / 30.0
                    - r2 * (1.0 / 42.0
                        - r2 * (1.0 / 30.0 - r2 * (5.0 / 66.0 - r2 * (691.0 / 2730.0 - r2 * 7.0 / 6.0))))));
    acc.add(tail);
    Ok(acc.value())
}

/// Ascending factorial (a)_n = a(a+1)…(a+n−1).
pub fn pochhammer(a: f64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n <= 64 {
        let mut p = 1.0;
        for i in 0..n {
            p *= a + i as f64;
        }
        return p;
    }
    let nf = n as f64;
    if let Some(m) = nonpositive_integer(a) {
        if n > m {
            return 0.0;
        }
        // (−m)_n = (−1)^n m! / (m−n)!
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mf = m as f64;
        return sign * (ln_gamma_pos(mf + 1.0) - ln_gamma_pos(mf - nf + 1.0)).exp();
    }
    let (l1, s1) = ln_gamma_signed(a + nf).expect("a + n is not a pole here");
    let (l0, s0) = ln_gamma_signed(a).expect("a is not a pole here");
    s1 * s0 * (l1 - l0).exp()
}

/// Γ(num[0])·Γ(num[1])⋯ / (Γ(den[0])·Γ(den[1])⋯); a pole in the denominator gives 0.
fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut lg = 0.0;
    let mut sign = 1.0;
    for &d in den {
        if nonpositive_integer(d).is_some() {
            return Ok(0.0);
        }
        let (l, s) = ln_gamma_signed(d)?;
        lg -= l;
        sign *= s;
    }
    for &n in num {
        let (l, s) = ln_gamma_signed(n)?;
        lg += l;
        sign *= s;
    }
    Ok(sign * lg.exp())
}

/// A request for ₂F₁(a, b; c; z) on the real line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Hyp2F1Request {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
    pub rel_tol: f64,
}

impl Hyp2F1Request {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        Hyp2F1Request {
            a,
            b,
            c,
            z,
            rel_tol: DEFAULT_REL_TOL,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn eval(&self) -> Result<f64> {
        hyp2f1(self)
    }
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real z ≤ 1.
///
/// Strategy: direct series for 0 ≤ z ≤ 0.5, the Pfaff map z → z/(z−1) for
/// z < 0, the (1−z) connection formulas (including the logarithmic cases
/// of integer c−a−b) for 0.5 < z < 1, and Gauss' theorem at z = 1.
pub fn hyp2f1(req: &Hyp2F1Request) -> Result<f64> {
    hyp2f1_with_complement(req.a, req.b, req.c, req.z, 1.0 - req.z, req.rel_tol)
}

/// Convenience wrapper with the default tolerance.
pub fn hyp2f1_abc(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with_complement(a, b, c, z, 1.0 - z, DEFAULT_REL_TOL)
}

/// ₂F₁ evaluated with the complement `one_minus_z` supplied explicitly.
///
/// Near z = 1 the value of 1−z cannot be recovered from z in floating
/// point; callers who know it precisely pass it here.
pub fn hyp2f1_with_complement(a: f64, b: f64, c: f64, z: f64, one_minus_z: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::domain(format!("non-finite 2F1 argument ({a}, {b}; {c}; {z})")));
    }
    if nonpositive_integer(c).is_some() {
        return Err(Error::domain(format!("2F1 parameter c = {c} is a pole")));
    }
    if z > 1.0 {
        return Err(Error::domain(format!(
            "2F1 argument z = {z} > 1 is off the real branch"
        )));
    }
    let tol = (rel_tol * 1e-2).max(1e-17);
    if z == 0.0 {
        return Ok(1.0);
    }
    let ta = nonpositive_integer(a);
    let tb = nonpositive_integer(b);
    if ta.is_some() || tb.is_some() {
        return polynomial(a, b, c, z, one_minus_z, ta, tb, tol);
    }
    if z == 1.0 || one_minus_z == 0.0 {
        let d = c - a - b;
        if d > 0.0 {
            return gamma_ratio(&[c, d], &[c - a, c - b]);
        }
        return Err(Error::domain(format!(
            "2F1({a}, {b}; {c}; 1) diverges (c−a−b = {d} ≤ 0); see hyp2f1_z1_limit"
        )));
    }
    if z < 0.0 {
        let w = z / (z - 1.0);
        let omw = 1.0 / one_minus_z;
        if b >= a {
            // (1−z)^{−a} F(a, c−b; c; w)
            let f = positive_argument(a, c - b, c, w, omw, tol)?;
            return Ok(one_minus_z.powf(-a) * f);
        }
        // (1−z)^{−b} F(c−a, b; c; w)
        let f = positive_argument(c - a, b, c, w, omw, tol)?;
        return Ok(one_minus_z.powf(-b) * f);
    }
    positive_argument(a, b, c, z, one_minus_z, tol)
}

#[allow(clippy::too_many_arguments)]
fn polynomial(a: f64, b: f64, c: f64, z: f64, omz: f64, ta: Option<u64>, tb: Option<u64>, tol: f64) -> Result<f64> {
    if z == 1.0 {
        // Chu–Vandermonde: F(−n, b; c; 1) = (c−b)_n / (c)_n, free of cancellation.
        let (n, other) = match (ta, tb) {
            (Some(n), Some(m)) if m < n => (m, a),
            (Some(n), _) => (n, b),
            (None, Some(m)) => (m, a),
            (None, None) => unreachable!("polynomial needs a terminating parameter"),
        };
        return Ok((0..n).map(|k| (c - other + k as f64) / (c + k as f64)).product());
    }
    if z >= -1.0 {
        return direct_series(a, b, c, z, tol);
    }
    // Keep the terminating parameter so the transformed series is still a polynomial.
    let w = z / (z - 1.0);
    let keep_a = match (ta, tb) {
        (Some(ma), Some(mb)) => ma <= mb,
        (Some(_), None) => true,
        _ => false,
    };
    if keep_a {
        Ok(omz.powf(-a) * direct_series(a, c - b, c, w, tol)?)
    } else {
        Ok(omz.powf(-b) * direct_series(c - a, b, c, w, tol)?)
    }
}

/// Evaluation for 0 < z < 1 with known complement w = 1 − z.
fn positive_argument(a: f64, b: f64, c: f64, z: f64, w: f64, tol: f64) -> Result<f64> {
    if z <= 0.5 {
        return direct_series(a, b, c, z, tol);
    }
    if nonpositive_integer(a).is_some() || nonpositive_integer(b).is_some() {
        return direct_series(a, b, c, z, tol);
    }
    let d = c - a - b;
    let m = d.round();
    let near = (d - m).abs();
    // An integer d built from rounded parameters is treated as exact.
    let degenerate = near <= Z1_LOG_TOL * (a.abs() + b.abs() + c.abs());
    let positive_terms = a > 0.0 && b > 0.0 && c > 0.0;
    let ill_conditioned = a.abs().max(b.abs()).max(c.abs()) * w > 1.0;
    if positive_terms && (ill_conditioned || (near < 1e-3 && !degenerate)) {
        match direct_series(a, b, c, z, tol) {
            Err(Error::NonConvergence(_)) => {}
            other => return other,
        }
    }
    if degenerate {
        return degenerate_connection(a, b, c, z, w, m as i64, tol);
    }
    if near < 1e-3 && z <= 0.99 {
        if let Ok(v) = direct_series(a, b, c, z, tol) {
            return Ok(v);
        }
    }
    general_connection(a, b, c, w, tol)
}

/// Plain Gauss series with a remainder-bound stopping rule.
fn direct_series(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<f64> {
    let mut sum = KahanSum::new(1.0);
    let mut term = 1.0;
    let az = z.abs();
    for n in 0..MAX_SERIES_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum.add(term);
        if term == 0.0 {
            return Ok(sum.value());
        }
        let n1 = nf + 1.0;
        let r_next = ((a + n1) * (b + n1) / ((c + n1) * (n1 + 1.0)) * z).abs();
        let r = r_next.max(az);
        if r < 1.0 && term.abs() * r / (1.0 - r) <= tol * sum.value().abs() {
            return Ok(sum.value());
        }
    }
    Err(Error::NonConvergence(format!(
        "2F1({a}, {b}; {c}; {z}) series exceeded {MAX_SERIES_TERMS} terms (last partial sum {})",
        sum.value()
    )))
}

/// (1−z) connection formula for non-integer c−a−b.
fn general_connection(a: f64, b: f64, c: f64, w: f64, tol: f64) -> Result<f64> {
    let d = c - a - b;
    let a1 = gamma_ratio(&[c, d], &[c - a, c - b])?;
    let a2 = gamma_ratio(&[c, -d], &[a, b])?;
    let s1 = if a1 != 0.0 {
        direct_series(a, b, 1.0 - d, w, tol)?
    } else {
        0.0
    };
    let s2 = if a2 != 0.0 {
        direct_series(c - a, c - b, 1.0 + d, w, tol)?
    } else {
        0.0
    };
    Ok(a1 * s1 + a2 * w.powf(d) * s2)
}

/// (1−z) connection formulas for integer c−a−b = m (logarithmic cases).
fn degenerate_connection(a: f64, b: f64, c: f64, z: f64, w: f64, m: i64, tol: f64) -> Result<f64> {
    let lnw = w.ln();
    // Infinite logarithmic series Σ_n (A)_n (B)_n / (n! (n+k)!) w^n [lnw − ψ(n+1) − ψ(n+k+1) + ψ(A+n) + ψ(B+n)]
    let log_series = |aa: f64, bb: f64, k: u64| -> Result<f64> {
        let mut psi_n1 = -EULER_GAMMA; // ψ(1)
        let mut psi_nk1 = digamma(k as f64 + 1.0)?;
        let mut psi_a = digamma(aa)?;
        let mut psi_b = digamma(bb)?;
        let mut coef = 1.0 / gamma(k as f64 + 1.0)?; // 1/k!
        let mut sum = KahanSum::new(0.0);
        for n in 0..MAX_SERIES_TERMS {
            let nf = n as f64;
            let bracket = lnw - psi_n1 - psi_nk1 + psi_a + psi_b;
            let term = coef * bracket;
            sum.add(term);
            let ratio = ((aa + nf) * (bb + nf) / ((nf + 1.0) * (nf + 1.0 + k as f64)) * w).abs();
            if n > 2 && ratio < 1.0 && (term.abs() + coef.abs()) * ratio / (1.0 - ratio) <= tol * sum.value().abs() {
                return Ok(sum.value());
            }
            if coef == 0.0 {
                return Ok(sum.value());
            }
            psi_n1 += 1.0 / (nf + 1.0);
            psi_nk1 += 1.0 / (nf + 1.0 + k as f64);
            psi_a += 1.0 / (aa + nf);
            psi_b += 1.0 / (bb + nf);
            coef *= (aa + nf) * (bb + nf) / ((nf + 1.0) * (nf + 1.0 + k as f64)) * w;
        }
        Err(Error::NonConvergence(format!(
            "logarithmic 2F1 connection series for ({a}, {b}; {c}; {z}) exceeded the term cap"
        )))
    };

    if m == 0 {
        let pre = gamma_ratio(&[c], &[a, b])?;
        // Γ(a+b)/(Γ(a)Γ(b)) Σ (a)_n(b)_n/(n!)² [2ψ(n+1) − ψ(a+n) − ψ(b+n) − ln w] wⁿ
        let s = log_series(a, b, 0)?;
        return Ok(-pre * s);
    }
    if m > 0 {
        let mu = m as u64;
        let pre1 = gamma_ratio(&[m as f64, c], &[a + m as f64, b + m as f64])?;
        let mut finite = KahanSum::new(0.0);
        let mut t = 1.0;
        for n in 0..mu {
            let nf = n as f64;
            finite.add(t);
            t *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - m as f64 + nf)) * w;
        }
        let pre2 = gamma_ratio(&[c], &[a, b])?;
        let s = if pre2 != 0.0 {
            log_series(a + m as f64, b + m as f64, mu)?
        } else {
            0.0
        };
        let neg_w_m = (-w).powi(m as i32);
        return Ok(pre1 * finite.value() - pre2 * neg_w_m * s);
    }
    let mp = (-m) as u64;
    let mf = mp as f64;
    let pre1 = gamma_ratio(&[mf, c], &[a, b])?;
    let mut finite = KahanSum::new(0.0);
    let mut t = 1.0;
    for n in 0..mp {
        let nf = n as f64;
        finite.add(t);
        t *= (a - mf + nf) * (b - mf + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
    }
    let pre2 = gamma_ratio(&[c], &[a - mf, b - mf])?;
    let s = if pre2 != 0.0 { log_series(a, b, mp)? } else { 0.0 };
    let sign = if mp.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(pre1 * w.powi(-(mp as i32)) * finite.value() - sign * pre2 * s)
}

/// Behaviour of ₂F₁(a, b; c; z) as z ↗ 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Z1Limit {
    /// The series converges at z = 1 to `value`.
    Finite { value: f64 },
    /// F ~ coefficient · ln(1/(1−z)).
    LogDivergent { coefficient: f64 },
    /// F ~ coefficient · (1−z)^exponent with exponent = c−a−b < 0.
    PowerDivergent { exponent: f64, coefficient: f64 },
}

/// Relative size of c − a − b below which it is treated as an exact integer.
pub const Z1_LOG_TOL: f64 = 1e-12;

/// Classifies the z → 1 limit of ₂F₁(a, b; c; z).
pub fn hyp2f1_z1_limit(a: f64, b: f64, c: f64) -> Result<Z1Limit> {
    if nonpositive_integer(c).is_some() {
        return Err(Error::domain(format!("2F1 parameter c = {c} is a pole")));
    }
    let (ta, tb) = (nonpositive_integer(a), nonpositive_integer(b));
    if ta.is_some() || tb.is_some() {
        return Ok(Z1Limit::Finite {
            value: polynomial(a, b, c, 1.0, 0.0, ta, tb, 1e-17)?,
        });
    }
    let d = c - a - b;
    // c = a + b formed in floating point may leave a rounding residue.
    if d.abs() <= Z1_LOG_TOL * (a.abs() + b.abs() + c.abs()) {
        Ok(Z1Limit::LogDivergent {
            coefficient: gamma_ratio(&[a + b], &[a, b])?,
        })
    } else if d > 0.0 {
        Ok(Z1Limit::Finite {
            value: gamma_ratio(&[c, d], &[c - a, c - b])?,
        })
    } else if d == 0.0 {
        Ok(Z1Limit::LogDivergent {
            coefficient: gamma_ratio(&[a + b], &[a, b])?,
        })
    } else {
        Ok(Z1Limit::PowerDivergent {
            exponent: d,
            coefficient: gamma_ratio(&[c, -d], &[a, b])?,
        })
    }
}
