//! Backhaul bottleneck occurrence (BBO): the probability that a branch's
//! access sum rate exceeds its bottleneck backhaul rate.

use rayon::prelude::*;

use crate::channel::{AccessStatistics, DownlinkModel};
use crate::config::SystemConfig;
use crate::error::{invalid, Result};
use crate::harness::sample_realization;
use crate::rates::{access_sum_rate, backhaul_rate, RateContext};
use crate::rng::substream;
use crate::topology::SuperCellTopology;

/// Gaussian upper tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    let lg = |x: u64| libm::lgamma(x as f64 + 1.0);
    lg(n) - lg(k) - lg(n - k)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Distribution of the number of non-empty cells when `m_ues` UEs fall
/// uniformly into `n_bs` cells. Entry `n - 1` holds `P[n non-empty]`.
pub fn occupancy_pmf(n_bs: usize, m_ues: usize) -> Result<Vec<f64>> {
    if n_bs == 0 || m_ues == 0 {
        return invalid("occupancy needs at least one cell and one UE");
    }
    let big_n = n_bs as f64;
    let m = m_ues as f64;
    let mut pmf = vec![0.0; n_bs];
    for n in 1..=n_bs.min(m_ues) {
        let mut acc = Compensated::default();
        for l in 0..n {
            let ln_term = ln_binomial(n as u64, l as u64) + m * ((n - l) as f64 / big_n).ln();
            let term = ln_term.exp();
            acc.add(if l % 2 == 0 { term } else { -term });
        }
        let p = ln_binomial(n_bs as u64, n as u64).exp() * acc.value();
        pmf[n - 1] = if p < 0.0 { 0.0 } else { p.min(1.0) };
    }
    Ok(pmf)
}

/// MMSE weight `beta* = n_BS / M` that maps the UE-sum to the cell-averaged sum.
pub fn mmse_beta(counts: &[usize]) -> Result<f64> {
    let m: usize = counts.iter().sum();
    if m == 0 {
        return invalid("count vector must contain at least one UE");
    }
    Ok(counts.iter().filter(|&&c| c > 0).count() as f64 / m as f64)
}

/// `Y = sum_i (1/M_i) sum_{u in cell i} x_u`, with `x` laid out cell by cell.
pub fn cell_averaged_sum(counts: &[usize], x: &[f64]) -> f64 {
    let mut offset = 0;
    let mut y = 0.0;
    for &c in counts {
        if c > 0 {
            y += x[offset..offset + c].iter().sum::<f64>() / c as f64;
        }
        offset += c;
    }
    y
}

/// Closed-form BBO approximation from the occupancy PMF and a Gaussian
/// model of the summed access rate.
pub fn bbo_analytic(
    cfg: &SystemConfig,
    topology: &SuperCellTopology,
    stats: &AccessStatistics,
    k_b: f64,
    m_ues: usize,
) -> Result<f64> {
    let rb = backhaul_rate(k_b, cfg)?;
    let pmf = occupancy_pmf(topology.n_bs_per_branch(), m_ues)?;
    let sigma = stats.rate_std();
    let sqrt_m = (m_ues as f64).sqrt();
    let p: f64 = pmf
        .iter()
        .enumerate()
        .map(|(k, &pn)| {
            let n = (k + 1) as f64;
            let gap = rb - n * stats.mean_rate;
            let tail = if sigma > 0.0 {
                q_function(gap / (n / sqrt_m * sigma))
            } else if gap < 0.0 {
                1.0
            } else {
                0.0
            };
            pn * tail
        })
        .sum();
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloProbability {
    pub probability: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl MonteCarloProbability {
    fn from_hits(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            probability: p,
            std_err: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }
}

/// Branch access sum rates `sum_i R_a_i` of independent UE drops, one per
/// trial. Trial `t` uses substream `(seed, stream, t)`.
pub fn access_sum_samples(
    cfg: &SystemConfig,
    topology: &SuperCellTopology,
    model: &DownlinkModel,
    m_ues: usize,
    trials: usize,
    seed: u64,
    stream: u32,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let ctx = RateContext::new(cfg, 0.0)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, stream, t as u32);
            let real = sample_realization(topology, 1, model, m_ues, &mut rng)?;
            Ok((0..real.n_bs()).map(|p| access_sum_rate(p, &real, &ctx)).sum())
        })
        .collect()
}

/// Fraction of samples whose access sum rate exceeds `backhaul_rate`.
pub fn bbo_from_samples(samples: &[f64], backhaul_rate: f64) -> MonteCarloProbability {
    let hits = samples.iter().filter(|&&s| s > backhaul_rate).count();
    MonteCarloProbability::from_hits(hits, samples.len())
}

/// Monte Carlo BBO estimate at a single power ratio.
#[allow(clippy::too_many_arguments)]
pub fn bbo_monte_carlo(
    cfg: &SystemConfig,
    topology: &SuperCellTopology,
    model: &DownlinkModel,
    k_b: f64,
    m_ues: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloProbability> {
    let samples = access_sum_samples(cfg, topology, model, m_ues, trials, seed, 0)?;
    Ok(bbo_from_samples(&samples, backhaul_rate(k_b, cfg)?))
}

/// Analytic and Monte Carlo BBO for one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BboEstimate {
    pub n_tiers: usize,
    pub m_ues: usize,
    pub k_b: f64,
    pub bandwidth_ratio: f64,
    pub analytic: f64,
    pub monte_carlo: MonteCarloProbability,
}
