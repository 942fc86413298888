//! Monte Carlo samplers of the mutant count and goodness-of-fit statistics.
//!
//! Trajectory `i` draws from a ChaCha8 generator seeded with `seed` on stream `i`,
//! so ensembles are bit-identical for any number of workers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Pmf;
use crate::model::{derive, ModelParams};
use crate::par::{map_range, Exec};

/// Default histogram cap; larger counts go to the overflow bin.
pub const DEFAULT_HIST_CAP: u64 = 1_000_000;
/// Default safety cap on clones (semi-deterministic) or events (fully stochastic).
pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

const CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMode {
    SemiDeterministic,
    FullyStochastic,
}

fn default_max_events() -> u64 {
    DEFAULT_MAX_EVENTS
}

fn default_hist_cap() -> u64 {
    DEFAULT_HIST_CAP
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub trajectories: u64,
    pub seed: u64,
    pub mode: SimMode,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
    #[serde(default = "default_hist_cap")]
    pub hist_cap: u64,
}

impl SimConfig {
    pub fn new(params: ModelParams, trajectories: u64, seed: u64, mode: SimMode) -> Self {
        SimConfig {
            params,
            trajectories,
            seed,
            mode,
            max_events: DEFAULT_MAX_EVENTS,
            hist_cap: DEFAULT_HIST_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = match self.params.validate() {
            Err(Error::Validation(v)) => v,
            Err(e) => return Err(e),
            Ok(()) => Vec::new(),
        };
        if self.trajectories == 0 {
            errs.push("trajectories must be at least 1".into());
        }
        if self.max_events == 0 {
            errs.push("max_events must be positive".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Total-variation distance to a named reference pmf.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvReference {
    pub reference: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    /// Trajectory counts for mutant numbers 0, 1, … up to the largest observed ≤ `hist_cap`.
    pub empirical_pmf: Vec<u64>,
    /// Trajectories whose mutant number exceeded `hist_cap`.
    pub overflow: u64,
    pub hist_cap: u64,
    /// Trajectories that completed; `empirical_pmf` plus `overflow` sums to this.
    pub n_trajectories: u64,
    /// Trajectories dropped because they exceeded `max_events`.
    pub excluded: u64,
    pub mean: f64,
    pub variance: f64,
    pub clone_count_mean: f64,
    pub tv_distance_vs: Option<TvReference>,
}

impl EnsembleSummary {
    /// Empirical probability of `n` mutants.
    pub fn frequency(&self, n: usize) -> f64 {
        self.empirical_pmf
            .get(n)
            .map_or(0.0, |&c| c as f64 / self.n_trajectories as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count\n");
        for (n, c) in self.empirical_pmf.iter().enumerate() {
            out.push_str(&format!("{n},{c}\n"));
        }
        if self.overflow > 0 {
            out.push_str(&format!("overflow,{}\n", self.overflow));
        }
        out
    }

    /// Records the TV distance to `pmf` under the label `reference`.
    pub fn with_reference(mut self, reference: &str, pmf: &Pmf) -> Self {
        self.tv_distance_vs = Some(TvReference {
            reference: reference.into(),
            value: tv_distance(&self, pmf),
        });
        self
    }
}

#[derive(Default)]
struct Partial {
    counts: BTreeMap<u64, u64>,
    overflow: u64,
    included: u64,
    excluded: u64,
    sum: u128,
    sum_sq: u128,
    clones: u128,
}

impl Partial {
    fn record(&mut self, outcome: Option<(u64, u64)>, cap: u64) {
        match outcome {
            None => self.excluded += 1,
            Some((b, k)) => {
                self.included += 1;
                if b > cap {
                    self.overflow += 1;
                } else {
                    *self.counts.entry(b).or_default() += 1;
                }
                self.sum += b as u128;
                self.sum_sq += (b as u128) * (b as u128);
                self.clones += k as u128;
            }
        }
    }

    fn merge(&mut self, other: Partial) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        self.overflow += other.overflow;
        self.included += other.included;
        self.excluded += other.excluded;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.clones += other.clones;
    }

    fn finish(self, cap: u64) -> EnsembleSummary {
        let n = self.included;
        let len = self.counts.keys().next_back().map_or(0, |&k| k as usize + 1);
        let mut empirical_pmf = vec![0u64; len];
        for (k, v) in &self.counts {
            empirical_pmf[*k as usize] = *v;
        }
        let nf = n as f64;
        let mean = self.sum as f64 / nf;
        let variance = if n < 2 {
            0.0
        } else {
            // n·Σb² − (Σb)² exactly when it fits, so the result is order independent.
            match (n as u128).checked_mul(self.sum_sq).zip(self.sum.checked_mul(self.sum)) {
                Some((a, b)) => (a - b) as f64 / (nf * (nf - 1.0)),
                None => (self.sum_sq as f64 - self.sum as f64 * mean) / (nf - 1.0),
            }
        };
        EnsembleSummary {
            empirical_pmf,
            overflow: self.overflow,
            hist_cap: cap,
            n_trajectories: n,
            excluded: self.excluded,
            mean,
            variance,
            clone_count_mean: self.clones as f64 / nf,
            tv_distance_vs: None,
        }
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Size of a clone founded by one mutant when e = e^{λt} at its age t.
///
/// Extinct with probability q(e−1)/(e−q); otherwise geometric on {1, 2, …}
/// with P(X > k | X > 0) = η^k, η = (e−1)/(e−q).
pub fn sample_clone_size<R: Rng + ?Sized>(rng: &mut R, e: f64, q: f64) -> u64 {
    let p0 = q * (e - 1.0) / (e - q);
    if rng.random::<f64>() < p0 {
        return 0;
    }
    let success = (1.0 - q) / (e - q);
    match Geometric::new(success.min(1.0)) {
        Ok(g) => 1 + g.sample(rng),
        Err(_) => 1,
    }
}

/// Generating function E[z^X] of the single-ancestor clone size at e = e^{λt}.
pub fn clone_gf(e: f64, q: f64, z: f64) -> f64 {
    let em = 1.0 / e;
    (q * (z - 1.0) - (z - q) * em) / ((z - 1.0) - (z - q) * em)
}

fn semi_deterministic_one(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Result<Option<(u64, u64)>> {
    let p = &cfg.params;
    let d = derive(p)?;
    let k = if d.m > 0.0 {
        Poisson::new(d.m)
            .map_err(|e| Error::numeric(format!("Poisson({}) rejected: {e}", d.m)))?
            .sample(rng) as u64
    } else {
        0
    };
    if k > cfg.max_events {
        return Ok(None);
    }
    let mut b = 0u64;
    for _ in 0..k {
        // Arrival on [ln N₀/δ, τ] with density ∝ e^{δs}: wild-type size w = N₀ + U(N − N₀).
        let w = p.n0 + rng.random::<f64>() * (p.n - p.n0);
        let e = (p.n / w).powf(1.0 / d.gamma);
        b += sample_clone_size(rng, e, d.q);
    }
    Ok(Some((b, k)))
}

fn fully_stochastic_one(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Option<(u64, u64)> {
    let p = &cfg.params;
    let target = p.n.ceil() as u64;
    let mut a = p.n0.round().max(1.0) as u64;
    let mut b = 0u64;
    let mut clones = 0u64;
    let mut events = 0u64;
    // Stopping depends on #A only, so the embedded jump chain suffices.
    while a < target {
        events += 1;
        if events > cfg.max_events {
            return None;
        }
        let (ra, rb) = ((p.delta + p.nu) * a as f64, (p.alpha + p.beta) * b as f64);
        let u = rng.random::<f64>() * (ra + rb);
        if u < ra {
            if u < p.delta * a as f64 {
                a += 1;
            } else {
                b += 1;
                clones += 1;
            }
        } else if u - ra < p.alpha * b as f64 {
            b += 1;
        } else {
            b -= 1;
        }
    }
    Some((b, clones))
}

fn run(cfg: &SimConfig, exec: Exec) -> Result<EnsembleSummary> {
    cfg.validate()?;
    let total = cfg.trajectories;
    let chunks = total.div_ceil(CHUNK as u64) as usize;
    let parts = map_range(exec, 0..chunks, |c| -> Result<Partial> {
        let mut part = Partial::default();
        let lo = c as u64 * CHUNK as u64;
        let hi = (lo + CHUNK as u64).min(total);
        for i in lo..hi {
            let mut rng = rng_for(cfg.seed, i);
            let outcome = match cfg.mode {
                SimMode::SemiDeterministic => semi_deterministic_one(cfg, &mut rng)?,
                SimMode::FullyStochastic => fully_stochastic_one(cfg, &mut rng),
            };
            part.record(outcome, cfg.hist_cap);
        }
        Ok(part)
    });
    let mut acc = Partial::default();
    for part in parts {
        acc.merge(part?);
    }
    Ok(acc.finish(cfg.hist_cap))
}

/// Exact sampler of the model: Poisson clone count, inverse-CDF arrival times, birth–death clone sizes.
pub fn sample_semi_deterministic(cfg: &SimConfig) -> Result<EnsembleSummary> {
    sample_semi_deterministic_with(cfg, Exec::default())
}

pub fn sample_semi_deterministic_with(cfg: &SimConfig, exec: Exec) -> Result<EnsembleSummary> {
    if cfg.mode != SimMode::SemiDeterministic {
        return Err(Error::validation(
            "sample_semi_deterministic requires mode SemiDeterministic",
        ));
    }
    run(cfg, exec)
}

/// Two-type Markov process stopped when the wild type first reaches ⌈N⌉.
pub fn sample_fully_stochastic(cfg: &SimConfig) -> Result<EnsembleSummary> {
    sample_fully_stochastic_with(cfg, Exec::default())
}

pub fn sample_fully_stochastic_with(cfg: &SimConfig, exec: Exec) -> Result<EnsembleSummary> {
    if cfg.mode != SimMode::FullyStochastic {
        return Err(Error::validation(
            "sample_fully_stochastic requires mode FullyStochastic",
        ));
    }
    run(cfg, exec)
}

/// Runs the sampler selected by `cfg.mode`.
pub fn simulate(cfg: &SimConfig, exec: Exec) -> Result<EnsembleSummary> {
    run(cfg, exec)
}

/// Total-variation distance between the ensemble and `pmf`; mass beyond
/// `pmf.nmax()` is compared as a single bin.
pub fn tv_distance(s: &EnsembleSummary, pmf: &Pmf) -> f64 {
    let m = pmf.nmax();
    let mut d = 0.0;
    let mut emp_in = 0.0;
    for n in 0..=m {
        let e = s.frequency(n);
        emp_in += e;
        d += (e - pmf.probs[n]).abs();
    }
    let ref_tail = (1.0 - pmf.probs.iter().sum::<f64>()).max(0.0);
    d += ((1.0 - emp_in) - ref_tail).abs();
    0.5 * d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness of fit with consecutive bins merged until each expects ≥ 5 counts;
/// the final bin collects everything beyond.
pub fn chi_square(s: &EnsembleSummary, pmf: &Pmf) -> Result<ChiSquare> {
    let total = s.n_trajectories as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut used_obs = 0.0;
    let mut used_exp = 0.0;
    for n in 0..=pmf.nmax() {
        obs += s.empirical_pmf.get(n).copied().unwrap_or(0) as f64;
        exp += total * pmf.probs[n];
        if exp >= 5.0 {
            bins.push((obs, exp));
            used_obs += obs;
            used_exp += exp;
            obs = 0.0;
            exp = 0.0;
        }
    }
    let rest = (total - used_obs, (total - used_exp).max(0.0));
    if rest.1 >= 5.0 || bins.is_empty() {
        bins.push(rest);
    } else if let Some(last) = bins.last_mut() {
        last.0 += rest.0;
        last.1 += rest.1;
    }
    if bins.len() < 2 {
        return Err(Error::numeric("too few bins for a chi-square test"));
    }
    let statistic: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    let p_value = statrs::function::gamma::checked_gamma_ur(dof as f64 / 2.0, statistic / 2.0)
        .map_err(|e| Error::numeric(format!("chi-square p-value: {e}")))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}
