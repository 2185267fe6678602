//! Fixed backhaul power control: MSPC, ASPC, ARPC and the NPC baseline.

use std::fmt;
use std::str::FromStr;

use crate::channel::AccessStatistics;
use crate::config::SystemConfig;
use crate::error::{invalid, Error, Result};
use crate::rates::backhaul_rate;
use crate::topology::SuperCellTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// No power control, `K_b = 1`.
    Npc,
    /// Sized for every UE at peak SINR.
    Mspc,
    /// Sized for the average SINR.
    Aspc,
    /// Sized for the average access rate.
    Arpc,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Npc, Scheme::Mspc, Scheme::Aspc, Scheme::Arpc];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Npc => "NPC",
            Scheme::Mspc => "MSPC",
            Scheme::Aspc => "ASPC",
            Scheme::Arpc => "ARPC",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NPC" => Ok(Scheme::Npc),
            "MSPC" => Ok(Scheme::Mspc),
            "ASPC" => Ok(Scheme::Aspc),
            "ARPC" => Ok(Scheme::Arpc),
            _ => invalid(format!("unknown power-control scheme {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerControlResult {
    pub scheme: Scheme,
    /// Uncapped minimum coefficient.
    pub k_min: f64,
    /// `min(k_min, 1)`
    pub k_capped: f64,
    /// Bottleneck backhaul rate at the capped coefficient, bits/s.
    pub backhaul_rate: f64,
}

/// `expm1(log_factor) / gamma_b`, evaluated without forming the power.
fn from_log(log_factor: f64, cfg: &SystemConfig) -> Result<f64> {
    let gamma_b = cfg.backhaul_snr_unit();
    if !(gamma_b > 0.0) {
        return Err(Error::Numerical("backhaul SNR must be positive".into()));
    }
    Ok(log_factor.exp_m1() / gamma_b)
}

/// Coefficient that lets the backhaul carry `n_bs` cells whose per-UE SINR
/// is `gamma`.
pub fn sinr_coefficient(gamma: f64, n_bs: usize, cfg: &SystemConfig) -> Result<f64> {
    if !(gamma >= 0.0) {
        return invalid(format!("SINR must be nonnegative, got {gamma}"));
    }
    from_log(n_bs as f64 / cfg.zeta() * gamma.ln_1p(), cfg)
}

pub fn mspc_coefficient(cfg: &SystemConfig, topology: &SuperCellTopology, stats: &AccessStatistics) -> Result<f64> {
    sinr_coefficient(stats.gamma_max, topology.n_bs_per_branch(), cfg)
}

pub fn aspc_coefficient(cfg: &SystemConfig, topology: &SuperCellTopology, stats: &AccessStatistics) -> Result<f64> {
    sinr_coefficient(stats.mean_sinr, topology.n_bs_per_branch(), cfg)
}

pub fn arpc_coefficient(cfg: &SystemConfig, topology: &SuperCellTopology, stats: &AccessStatistics) -> Result<f64> {
    if !(stats.mean_rate >= 0.0) {
        return invalid("mean rate must be nonnegative");
    }
    let n = topology.n_bs_per_branch() as f64;
    from_log(
        std::f64::consts::LN_2 * n * stats.mean_rate / cfg.backhaul_effective_bw(),
        cfg,
    )
}

pub fn cap_coefficient(k: f64) -> f64 {
    k.min(1.0)
}

pub fn power_control(
    scheme: Scheme,
    cfg: &SystemConfig,
    topology: &SuperCellTopology,
    stats: &AccessStatistics,
) -> Result<PowerControlResult> {
    let k_min = match scheme {
        Scheme::Npc => 1.0,
        Scheme::Mspc => mspc_coefficient(cfg, topology, stats)?,
        Scheme::Aspc => aspc_coefficient(cfg, topology, stats)?,
        Scheme::Arpc => arpc_coefficient(cfg, topology, stats)?,
    };
    let k_capped = cap_coefficient(k_min);
    Ok(PowerControlResult {
        scheme,
        k_min,
        k_capped,
        backhaul_rate: backhaul_rate(k_capped, cfg)?,
    })
}
