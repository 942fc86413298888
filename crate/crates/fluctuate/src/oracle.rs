//! Independent pmf oracle: Taylor coefficients of G(z) = exp Λ(z) extracted
//! by a discrete Cauchy integral on a circle of radius r < 1.
//!
//! Λ is evaluated at complex z from the integral representation
//! Λ(z) = −θ ∫_{x_min}^0 e^{γx} / (1 − e^x ξ(z)) dx,  ξ = (q−z)/(1−z),
//! with x_min = −ln M (finite N, M = (N/N₀)^{1/γ}) or −∞ (limit law).
//! This path shares no code with the hypergeometric evaluator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{Pmf, Regime, Truncation};
use crate::model::{derive, LpsmParams, ModelParams, ParamSet};
use crate::par::{map_range, Exec};
use crate::quad;

/// Largest imaginary residue tolerated in an extracted coefficient.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
struct Kernel {
    theta: f64,
    gamma: f64,
    q: f64,
    /// Lower integration limit in x = ln v.
    x_min: f64,
}

impl Kernel {
    fn from_params(params: &ParamSet) -> Result<Self> {
        match params {
            ParamSet::Model(p) => Self::from_model(p),
            ParamSet::Lpsm(l) => Self::from_lpsm(l),
        }
    }

    fn from_model(p: &ModelParams) -> Result<Self> {
        let d = derive(p)?;
        Ok(Kernel {
            theta: d.theta,
            gamma: d.gamma,
            q: d.q,
            x_min: -d.growth.ln() / d.gamma,
        })
    }

    fn from_lpsm(l: &LpsmParams) -> Result<Self> {
        l.validate()?;
        // |integrand| ≤ 2 e^{γx}/(1−q) on the closed unit disc; cut where that is negligible.
        let x_min = (1e-18 * l.gamma * (1.0 - l.q) / 2.0).ln() / l.gamma;
        Ok(Kernel {
            theta: l.theta,
            gamma: l.gamma,
            q: l.q,
            x_min,
        })
    }

    /// ∫_{x_min}^0 e^{γx}/(1 − e^x ξ) dx at complex z.
    fn integral(&self, z: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let xi = (Complex64::new(self.q, 0.0) - z) / (one - z);
        let g = self.gamma;
        quad::integrate(
            |x: f64| {
                let e = x.exp();
                Complex64::new((g * x).exp(), 0.0) / (one - xi * e)
            },
            self.x_min,
            0.0,
            1e-17,
            1e-15,
        )
    }

    fn lambda(&self, z: Complex64) -> Result<Complex64> {
        if self.theta == 0.0 || self.x_min == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(-self.theta * self.integral(z)?)
    }
}

/// Λ(z) at complex z by quadrature (finite N or limit law).
pub fn log_gf_complex(params: &ParamSet, z: Complex64) -> Result<Complex64> {
    Kernel::from_params(params)?.lambda(z)
}

/// Default contour radius for coefficient extraction up to `nmax`.
pub fn default_radius(nmax: usize) -> f64 {
    // r^{−nmax} ≤ 1e6 bounds the amplification of rounding error.
    0.9f64.min(1e6f64.powf(-1.0 / nmax.max(1) as f64))
}

/// Default grid size: a power of two ≥ 4·nmax (at least 64).
pub fn default_grid(nmax: usize) -> usize {
    (4 * nmax.max(16)).next_power_of_two()
}

/// Coefficients 0..=nmax of an analytic function sampled on |z| = r.
fn cauchy_coefficients<F>(f: F, nmax: usize, grid: usize, radius: f64, exec: Exec) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync + Send,
{
    if grid < 4 * nmax {
        return Err(Error::validation(format!(
            "grid size {grid} must be at least 4·nmax = {}",
            4 * nmax
        )));
    }
    let step = 2.0 * std::f64::consts::PI / grid as f64;
    let roots: Vec<Complex64> = (0..grid).map(|j| Complex64::from_polar(1.0, step * j as f64)).collect();
    let values = map_range(exec, 0..grid, |j| f(roots[j] * radius));
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(nmax + 1);
    let mut scale = 1.0;
    for n in 0..=nmax {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in values.iter().enumerate() {
            // ω^{−jn}
            acc += v * roots[(grid - (j * n) % grid) % grid];
        }
        let c = acc / (grid as f64 * scale);
        if c.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::numeric(format!(
                "Cauchy extraction left imaginary residue {:e} at n = {n}; refine radius or grid",
                c.im
            )));
        }
        out.push(c.re);
        scale *= radius;
    }
    Ok(out)
}

/// Pmf from the Cauchy integral of exp Λ with explicit grid and radius.
pub fn pmf_oracle_cauchy_with(params: &ParamSet, nmax: usize, grid: usize, radius: f64, exec: Exec) -> Result<Pmf> {
    let kernel = Kernel::from_params(params)?;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::validation(format!("contour radius {radius} must lie in (0, 1)")));
    }
    let probs = cauchy_coefficients(|z| Ok(kernel.lambda(z)?.exp()), nmax, grid, radius, exec)?;
    let total: f64 = probs.iter().sum();
    let regime = match params {
        ParamSet::Model(_) if (kernel.gamma - 1.0).abs() < 1e-8 => Regime::ExactNeutral,
        ParamSet::Model(_) => Regime::ExactGeneral,
        ParamSet::Lpsm(_) => Regime::Lpsm,
    };
    Ok(Pmf {
        params: *params,
        regime,
        truncation_mass: (1.0 - total).max(0.0),
        probs,
        underflow_flushed: false,
        truncation: Truncation::Fixed,
    })
}

/// Pmf from the Cauchy integral with the default radius and grid (grid ≥ 4·nmax).
pub fn pmf_oracle_cauchy(params: &ParamSet, nmax: usize, grid_size: usize) -> Result<Pmf> {
    pmf_oracle_cauchy_with(params, nmax, grid_size, default_radius(nmax), Exec::default())
}

/// Clone-size law of the limit distribution: coefficients of
/// ψ(z) = 1 − (1−q) γ ∫₀¹ v^{γ−1}/(1−vξ) dv, by the same contour extraction.
pub fn clone_size_pmf_cauchy(p: &LpsmParams, nmax: usize, grid: usize) -> Result<Vec<f64>> {
    let kernel = Kernel::from_lpsm(p)?;
    let one = Complex64::new(1.0, 0.0);
    let scale = (1.0 - p.q) * p.gamma;
    cauchy_coefficients(
        |z| Ok(one - scale * kernel.integral(z)?),
        nmax,
        grid,
        default_radius(nmax),
        Exec::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mutation_gives_point_mass() {
        let p: ParamSet = ModelParams::new(1.0, 0.0, 0.0, 1.0, 100.0).into();
        let pmf = pmf_oracle_cauchy(&p, 10, 64).unwrap();
        assert!((pmf.probs[0] - 1.0).abs() < 1e-14);
        assert!(pmf.probs[1..].iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn real_axis_matches_closed_form() {
        let p = ModelParams::new(1.0, 0.0, 0.01, 1.0, 100.0);
        let v = log_gf_complex(&p.into(), Complex64::new(0.5, 0.0)).unwrap();
        let xi: f64 = -1.0;
        let exact = (1.0 / xi) * ((1.0 - xi) / (1.0 - xi / 100.0)).ln();
        assert!((v.re - exact).abs() < 1e-13 && v.im.abs() < 1e-15);
    }

    #[test]
    fn lea_coulson_series_composition() {
        // Neutral, no death: G(z) = (1−φz)^{θ(1−z)/z}. Expand its logarithm by hand and
        // exponentiate the power series; compare with the contour coefficients.
        let n = 100.0;
        let phi = 1.0 - 1.0 / n;
        let p: ParamSet = ModelParams::new(1.0, 0.0, 0.01, 1.0, n).into();
        let pmf = pmf_oracle_cauchy(&p, 12, 256).unwrap();
        // ln(1−φz) = −Σ φ^k z^k / k, so with θ = 1
        // Λ(z) = (1−z)/z · ln(1−φz) = −Σ_k φ^k z^{k−1}/k + Σ_k φ^k z^k / k.
        let m = 14;
        let mut lam = vec![0.0; m];
        for k in 1..=m {
            let c = phi.powi(k as i32) / k as f64;
            lam[k - 1] -= c;
            if k < m {
                lam[k] += c;
            }
        }
        // exp of a power series: g' = λ' g
        let mut g = vec![0.0; m];
        g[0] = lam[0].exp();
        for n in 1..m {
            let mut s = 0.0;
            for k in 1..=n {
                s += k as f64 * lam[k] * g[n - k];
            }
            g[n] = s / n as f64;
        }
        for (n, (&p, &e)) in pmf.probs.iter().zip(&g).take(13).enumerate() {
            assert!((p - e).abs() < 1e-10, "n={n}: {p} vs {e}");
        }
    }
}
