//! Access, backhaul and end-to-end rates under user-based (UBS) and
//! cell-based (CBS) bandwidth scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::channel::backhaul_snr;
use crate::config::SystemConfig;
use crate::error::{invalid, Error, Result};
use crate::topology::SuperCellTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Ubs,
    Cbs,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Ubs => "UBS",
            Policy::Cbs => "CBS",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "UBS" => Ok(Policy::Ubs),
            "CBS" => Ok(Policy::Cbs),
            _ => invalid(format!("unknown policy {s:?}")),
        }
    }
}

/// Effective bandwidth ratio `zeta = xi_b B_b / (xi_a B_a)`.
pub fn effective_bandwidth_ratio(cfg: &SystemConfig) -> f64 {
    cfg.zeta()
}

/// Bottleneck backhaul rate `xi_b B_b log2(1 + k_b gamma_b)` in bits/s.
pub fn backhaul_rate(k_b: f64, cfg: &SystemConfig) -> Result<f64> {
    Ok(cfg.backhaul_effective_bw() * backhaul_snr(k_b, cfg)?.ln_1p() / std::f64::consts::LN_2)
}

/// Bandwidth-sharing coefficients over a branch, in `branch_members` order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleVector {
    mu: Vec<f64>,
}

impl ScheduleVector {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        if mu.is_empty() {
            return invalid("schedule must cover at least one base station");
        }
        if mu.iter().any(|m| !(m.is_finite() && *m >= -1e-12 && *m <= 1.0 + 1e-12)) {
            return invalid("schedule coefficients must lie in [0, 1]");
        }
        let sum: f64 = mu.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return invalid(format!("schedule must sum to 1, got {sum}"));
        }
        Ok(Self { mu })
    }

    /// Builds a schedule without the simplex check, for iterates the solver
    /// has already renormalized.
    pub(crate) fn from_raw(mu: Vec<f64>) -> Self {
        Self { mu }
    }

    pub fn equal(n_bs: usize) -> Result<Self> {
        if n_bs == 0 {
            return invalid("schedule must cover at least one base station");
        }
        Ok(Self {
            mu: vec![1.0 / n_bs as f64; n_bs],
        })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Coefficient of the `pos`-th station, clamped to `[0, 1]`.
    pub fn get(&self, pos: usize) -> f64 {
        self.mu[pos].clamp(0.0, 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }
}

/// One Monte Carlo draw of the UEs of a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct UeRealization {
    branch: usize,
    members: Vec<usize>,
    sinr: Vec<Vec<f64>>,
}

impl UeRealization {
    /// `sinr[p]` holds the SINRs of the UEs attached to `members[p]`.
    pub fn new(branch: usize, members: Vec<usize>, sinr: Vec<Vec<f64>>) -> Result<Self> {
        if members.len() != sinr.len() || members.is_empty() {
            return invalid("realization needs one SINR list per member station");
        }
        if sinr.iter().flatten().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return invalid("SINR values must be finite and nonnegative");
        }
        Ok(Self {
            branch,
            members,
            sinr,
        })
    }

    pub fn branch(&self) -> usize {
        self.branch
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn n_bs(&self) -> usize {
        self.members.len()
    }

    pub fn n_ues(&self) -> usize {
        self.sinr.iter().map(Vec::len).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.sinr.iter().map(Vec::len).collect()
    }

    pub fn cell(&self, pos: usize) -> &[f64] {
        &self.sinr[pos]
    }

    pub fn cells(&self) -> &[Vec<f64>] {
        &self.sinr
    }

    /// Position of global index `bs` within the branch.
    pub fn position_of(&self, bs: usize) -> Result<usize> {
        self.members
            .iter()
            .position(|&m| m == bs)
            .ok_or(Error::UnknownBs(bs))
    }
}

/// Rate constants shared by every station of a branch at a fixed `k_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateContext {
    pub access_bw: f64,
    pub backhaul_bw: f64,
    pub zeta: f64,
    pub k_b: f64,
    /// `log2(1 + k_b gamma_b)`
    pub backhaul_se: f64,
}

impl RateContext {
    pub fn new(cfg: &SystemConfig, k_b: f64) -> Result<Self> {
        let snr = backhaul_snr(k_b, cfg)?;
        Ok(Self {
            access_bw: cfg.access_effective_bw(),
            backhaul_bw: cfg.backhaul_effective_bw(),
            zeta: cfg.zeta(),
            k_b,
            backhaul_se: snr.ln_1p() / std::f64::consts::LN_2,
        })
    }

    pub fn backhaul_rate(&self) -> f64 {
        self.backhaul_bw * self.backhaul_se
    }

    /// Normalized rate `rho_u = log2(1 + gamma) / (zeta log2(1 + k_b gamma_b))`.
    pub fn rho(&self, gamma: f64) -> f64 {
        gamma.log2_1p() / (self.zeta * self.backhaul_se)
    }
}

trait Log2p1 {
    fn log2_1p(self) -> f64;
}

impl Log2p1 for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// Access sum rate of the `pos`-th station; empty cells carry no traffic.
pub fn access_sum_rate(pos: usize, real: &UeRealization, ctx: &RateContext) -> f64 {
    let cell = real.cell(pos);
    if cell.is_empty() {
        return 0.0;
    }
    ctx.access_bw / cell.len() as f64 * cell.iter().map(|g| g.log2_1p()).sum::<f64>()
}

/// Per-link coefficients `mu_{i,j}` for every station `i` of the branch and
/// every link `j` on its path.
pub fn normalize_outer_tiers(
    topology: &SuperCellTopology,
    branch: usize,
    schedule: &ScheduleVector,
) -> Result<BTreeMap<(usize, usize), f64>> {
    let members = topology.branch_members(branch)?;
    if members.len() != schedule.len() {
        return invalid("schedule length does not match the branch size");
    }
    let mu_of = |bs: usize| schedule.get(members.binary_search(&bs).expect("branch member"));
    let mut out = BTreeMap::new();
    for &i in members {
        let mu_i = mu_of(i);
        for &j in topology.path_to(i)? {
            let total: f64 = topology.descendants(j)?.iter().map(|&d| mu_of(d)).sum();
            let v = if total > 0.0 { mu_i / total } else { 0.0 };
            out.insert((i, j), v);
        }
    }
    Ok(out)
}

/// End-to-end UBS rate of UE `ue` at the `pos`-th station.
pub fn ubs_ue_rate(pos: usize, ue: usize, schedule: &ScheduleVector, real: &UeRealization, ctx: &RateContext) -> f64 {
    let cell = real.cell(pos);
    let m = cell.len() as f64;
    let backhaul = schedule.get(pos) * ctx.zeta * ctx.backhaul_se;
    ctx.access_bw / m * backhaul.min(cell[ue].log2_1p())
}

/// UBS rate of a UE evaluated over the full backhaul path with per-hop
/// coefficients from [`normalize_outer_tiers`].
pub fn ubs_ue_rate_path(
    pos: usize,
    ue: usize,
    schedule: &ScheduleVector,
    real: &UeRealization,
    ctx: &RateContext,
    topology: &SuperCellTopology,
) -> Result<f64> {
    let per_link = normalize_outer_tiers(topology, real.branch(), schedule)?;
    let bs = real.members()[pos];
    let hop = topology
        .path_to(bs)?
        .iter()
        .map(|&j| per_link[&(bs, j)] * ctx.zeta * ctx.backhaul_se)
        .fold(f64::INFINITY, f64::min);
    let cell = real.cell(pos);
    Ok(ctx.access_bw / cell.len() as f64 * hop.min(cell[ue].log2_1p()))
}

/// End-to-end CBS sum rate of the `pos`-th station.
pub fn cbs_bs_rate(pos: usize, schedule: &ScheduleVector, real: &UeRealization, ctx: &RateContext) -> f64 {
    (schedule.get(pos) * ctx.backhaul_rate()).min(access_sum_rate(pos, real, ctx))
}

/// CBS station rate evaluated over the full backhaul path.
pub fn cbs_bs_rate_path(
    pos: usize,
    schedule: &ScheduleVector,
    real: &UeRealization,
    ctx: &RateContext,
    topology: &SuperCellTopology,
) -> Result<f64> {
    let per_link = normalize_outer_tiers(topology, real.branch(), schedule)?;
    let bs = real.members()[pos];
    let hop = topology
        .path_to(bs)?
        .iter()
        .map(|&j| per_link[&(bs, j)] * ctx.backhaul_rate())
        .fold(f64::INFINITY, f64::min);
    Ok(hop.min(access_sum_rate(pos, real, ctx)))
}

/// Per-UE CBS rates of the `pos`-th station: the backhaul share is split
/// equally when it limits the cell, otherwise each UE gets its access rate.
pub fn cbs_ue_rates(pos: usize, schedule: &ScheduleVector, real: &UeRealization, ctx: &RateContext) -> Vec<f64> {
    let cell = real.cell(pos);
    let m = cell.len() as f64;
    let mu = schedule.get(pos);
    let rb = ctx.backhaul_rate();
    if mu * rb <= access_sum_rate(pos, real, ctx) {
        vec![mu * rb / m; cell.len()]
    } else {
        cell.iter().map(|g| ctx.access_bw / m * g.log2_1p()).collect()
    }
}

/// Branch end-to-end sum rate in bits/s.
pub fn branch_sum_rate(policy: Policy, schedule: &ScheduleVector, real: &UeRealization, ctx: &RateContext) -> Result<f64> {
    if schedule.len() != real.n_bs() {
        return invalid("schedule length does not match the realization");
    }
    let total = (0..real.n_bs())
        .map(|pos| match policy {
            Policy::Ubs => (0..real.cell(pos).len())
                .map(|u| ubs_ue_rate(pos, u, schedule, real, ctx))
                .sum::<f64>(),
            Policy::Cbs => cbs_bs_rate(pos, schedule, real, ctx),
        })
        .sum();
    Ok(total)
}

/// Scheduling problem in normalized units: per-cell lists of `rho_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedInstance {
    rho: Vec<Vec<f64>>,
}

impl NormalizedInstance {
    pub fn new(rho: Vec<Vec<f64>>) -> Result<Self> {
        if rho.is_empty() {
            return invalid("instance needs at least one cell");
        }
        if rho.iter().flatten().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return invalid("normalized rates must be finite and nonnegative");
        }
        Ok(Self { rho })
    }

    /// Requires `k_b > 0`; with a dead backhaul every rate is zero.
    pub fn from_realization(real: &UeRealization, ctx: &RateContext) -> Result<Self> {
        if !(ctx.backhaul_se > 0.0) {
            return invalid("normalized rates need a positive backhaul rate");
        }
        Self::new(
            real.cells()
                .iter()
                .map(|cell| cell.iter().map(|&g| ctx.rho(g)).collect())
                .collect(),
        )
    }

    pub fn n_bs(&self) -> usize {
        self.rho.len()
    }

    pub fn cell(&self, pos: usize) -> &[f64] {
        &self.rho[pos]
    }

    /// Cell average of `rho_u`; 0 for empty cells.
    pub fn cap(&self, pos: usize) -> f64 {
        let c = &self.rho[pos];
        if c.is_empty() {
            0.0
        } else {
            c.iter().sum::<f64>() / c.len() as f64
        }
    }

    pub fn objective(&self, policy: Policy, mu: &[f64]) -> f64 {
        match policy {
            Policy::Ubs => self
                .rho
                .iter()
                .zip(mu)
                .filter(|(c, _)| !c.is_empty())
                .map(|(c, &m)| c.iter().map(|&r| m.min(r)).sum::<f64>() / c.len() as f64)
                .sum(),
            Policy::Cbs => (0..self.rho.len()).map(|p| mu[p].min(self.cap(p))).sum(),
        }
    }
}
