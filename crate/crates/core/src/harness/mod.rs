//! Experiment runners: random UE drops, parameter sweeps and result tables.

mod output;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

pub use output::{Moments, ResultTable, Row, HEADER, SCHEMA_VERSION};

use crate::bbo::{access_sum_samples, bbo_analytic, bbo_from_samples};
use crate::channel::{AccessStatistics, DownlinkModel, SinrDistribution};
use crate::config::SystemConfig;
use crate::error::{invalid, Error, Result};
use crate::power::{power_control, Scheme};
use crate::rates::{access_sum_rate, NormalizedInstance, Policy, RateContext, UeRealization};
use crate::rng::substream;
use crate::scheduler::{optimize, SolverSettings};
use crate::topology::{build_super_cell, SuperCellTopology};

/// Branch on which every experiment is measured.
pub const MEASURED_BRANCH: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    SumrateVsKb,
    SumrateVsLambda,
    SumrateVsNt,
    SumrateVsBw,
    PcCoefficients,
    BboVsKb,
    BboGrid,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::SumrateVsKb,
        ExperimentKind::SumrateVsLambda,
        ExperimentKind::SumrateVsNt,
        ExperimentKind::SumrateVsBw,
        ExperimentKind::PcCoefficients,
        ExperimentKind::BboVsKb,
        ExperimentKind::BboGrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SumrateVsKb => "sumrate-vs-kb",
            ExperimentKind::SumrateVsLambda => "sumrate-vs-lambda",
            ExperimentKind::SumrateVsNt => "sumrate-vs-nt",
            ExperimentKind::SumrateVsBw => "sumrate-vs-bw",
            ExperimentKind::PcCoefficients => "pc-coefficients",
            ExperimentKind::BboVsKb => "bbo-vs-kb",
            ExperimentKind::BboGrid => "bbo-grid",
        }
    }

    fn is_sum_rate(self) -> bool {
        matches!(
            self,
            ExperimentKind::SumrateVsKb
                | ExperimentKind::SumrateVsLambda
                | ExperimentKind::SumrateVsNt
                | ExperimentKind::SumrateVsBw
        )
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

/// A scheduling policy paired with optimal or equal bandwidth sharing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Series {
    pub policy: Policy,
    pub optimal: bool,
}

impl Series {
    pub const ALL: [Series; 4] = [
        Series { policy: Policy::Ubs, optimal: true },
        Series { policy: Policy::Ubs, optimal: false },
        Series { policy: Policy::Cbs, optimal: true },
        Series { policy: Policy::Cbs, optimal: false },
    ];
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.policy, if self.optimal { "OPT" } else { "EQL" })
    }
}

impl FromStr for Series {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, kind) = s
            .split_once('-')
            .ok_or_else(|| Error::InvalidArgument(format!("series {s:?} is not POLICY-OPT or POLICY-EQL")))?;
        let optimal = match kind.to_ascii_uppercase().as_str() {
            "OPT" => true,
            "EQL" => false,
            _ => return invalid(format!("series {s:?} is not POLICY-OPT or POLICY-EQL")),
        };
        Ok(Series {
            policy: p.parse()?,
            optimal,
        })
    }
}

/// Source of the backhaul power ratio at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerSetting {
    Fixed(Vec<f64>),
    Schemes(Vec<Scheme>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_tiers: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub power: PowerSetting,
    pub bw_ratios: Vec<f64>,
    pub series: Vec<Series>,
    pub realizations: usize,
    pub seed: u64,
    pub solver: SolverSettings,
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Number of UEs for a density of `lambda` UEs per cell.
pub fn ue_count(lambda: f64, n_bs: usize) -> usize {
    (lambda * n_bs as f64).round() as usize
}

impl ExperimentSpec {
    /// Default sweep for each experiment family.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let kb_grid = log_grid(1e-4, 1.0, 20);
        let (n_tiers, lambdas, power, bw_ratios, realizations) = match kind {
            ExperimentKind::SumrateVsKb => (vec![1, 3, 5], vec![1.0, 5.0], PowerSetting::Fixed(kb_grid), vec![3.0], 10_000),
            ExperimentKind::SumrateVsLambda => (
                vec![3],
                (1..=10).map(f64::from).collect(),
                PowerSetting::Fixed(vec![1e-2, 1e-1]),
                vec![3.0],
                10_000,
            ),
            ExperimentKind::SumrateVsNt => (
                (1..=5).collect(),
                vec![5.0],
                PowerSetting::Schemes(Scheme::ALL.to_vec()),
                vec![3.0],
                10_000,
            ),
            ExperimentKind::SumrateVsBw => (
                vec![3],
                vec![1.0],
                PowerSetting::Fixed(vec![1e-2]),
                vec![1.0, 2.0, 3.0, 4.0],
                10_000,
            ),
            ExperimentKind::PcCoefficients => (
                (1..=5).collect(),
                vec![],
                PowerSetting::Schemes(vec![Scheme::Mspc, Scheme::Aspc, Scheme::Arpc]),
                vec![1.0, 2.0, 3.0, 4.0],
                0,
            ),
            ExperimentKind::BboVsKb => (vec![1, 3, 5], vec![1.0, 5.0], PowerSetting::Fixed(kb_grid), vec![3.0], 100_000),
            ExperimentKind::BboGrid => (
                (1..=5).collect(),
                (1..=5).map(f64::from).collect(),
                PowerSetting::Schemes(Scheme::ALL.to_vec()),
                vec![3.0],
                100_000,
            ),
        };
        Self {
            kind,
            n_tiers,
            lambdas,
            power,
            bw_ratios,
            series: Series::ALL.to_vec(),
            realizations,
            seed: 0,
            solver: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tiers.is_empty() || self.n_tiers.contains(&0) {
            return invalid("tier grid must be nonempty and positive");
        }
        if self.bw_ratios.is_empty() || self.bw_ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return invalid("bandwidth-ratio grid must be nonempty and positive");
        }
        match &self.power {
            PowerSetting::Fixed(k) if k.is_empty() || k.iter().any(|k| !(k.is_finite() && *k >= 0.0)) => {
                return invalid("power-ratio grid must be nonempty and nonnegative")
            }
            PowerSetting::Schemes(s) if s.is_empty() => return invalid("scheme list must be nonempty"),
            _ => {}
        }
        if self.kind != ExperimentKind::PcCoefficients {
            if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return invalid("UE-density grid must be nonempty and positive");
            }
            if self.realizations == 0 {
                return invalid("realization count must be at least 1");
            }
        }
        if self.kind.is_sum_rate() && self.series.is_empty() {
            return invalid("at least one policy series is required");
        }
        if self.realizations > u32::MAX as usize {
            return invalid("realization count exceeds the RNG stream range");
        }
        self.solver.validate()
    }
}

/// Drops `m_ues` UEs uniformly over the cells of `branch` (multinomial split,
/// uniform position in each equivalent disc) and evaluates their SINR.
pub fn sample_realization<R: Rng + ?Sized>(
    topology: &SuperCellTopology,
    branch: usize,
    model: &DownlinkModel,
    m_ues: usize,
    rng: &mut R,
) -> Result<UeRealization> {
    let members = topology.branch_members(branch)?.to_vec();
    let n = members.len();
    let mut counts = vec![0usize; n];
    for _ in 0..m_ues {
        counts[rng.random_range(0..n)] += 1;
    }
    let sinr = counts
        .iter()
        .map(|&c| (0..c).map(|_| model.sample_ue(rng).2).collect())
        .collect();
    UeRealization::new(branch, members, sinr)
}

struct Context<'a> {
    spec: &'a ExperimentSpec,
    cfg: &'a SystemConfig,
    model: DownlinkModel,
    stats: Option<AccessStatistics>,
    table: ResultTable,
}

impl Context<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(
        &mut self,
        n_tiers: usize,
        lambda: f64,
        m_ues: usize,
        k_b: f64,
        bw_ratio: f64,
        series: String,
        metric: &str,
        mean: f64,
        std_err: f64,
        realizations: usize,
        flags: String,
    ) {
        self.table.rows.push(Row {
            experiment: self.spec.kind.name().to_string(),
            n_tiers,
            lambda,
            m_ues,
            k_b,
            bw_ratio,
            series,
            metric: metric.to_string(),
            mean,
            std_err,
            realizations,
            flags,
        });
    }

    fn stats(&mut self) -> Result<AccessStatistics> {
        if let Some(s) = self.stats {
            return Ok(s);
        }
        let s = SinrDistribution::new(self.cfg)?.statistics()?;
        self.stats = Some(s);
        Ok(s)
    }

    /// `(label suffix, k_b)` pairs for one `(N_T, bandwidth)` point.
    fn power_points(&mut self, cfg: &SystemConfig, topology: &SuperCellTopology) -> Result<Vec<(String, f64)>> {
        match &self.spec.power {
            PowerSetting::Fixed(k) => Ok(k.iter().map(|&k| (String::new(), k)).collect()),
            PowerSetting::Schemes(schemes) => {
                let schemes = schemes.clone();
                let stats = self.stats()?;
                schemes
                    .iter()
                    .map(|&s| Ok((format!("/{s}"), power_control(s, cfg, topology, &stats)?.k_capped)))
                    .collect()
            }
        }
    }
}

/// Per-realization outcome: one value per requested series, then the access limit.
fn evaluate(
    real: &UeRealization,
    ctx: &RateContext,
    series: &[Series],
    solver: &SolverSettings,
) -> Result<(Vec<f64>, usize)> {
    let access: f64 = (0..real.n_bs()).map(|p| access_sum_rate(p, real, ctx)).sum();
    let mut values = Vec::with_capacity(series.len() + 1);
    let mut nonconverged = 0;
    if real.n_ues() == 0 || !(ctx.backhaul_se > 0.0) {
        values.resize(series.len(), 0.0);
    } else {
        let inst = NormalizedInstance::from_realization(real, ctx)?;
        let equal = vec![1.0 / real.n_bs() as f64; real.n_bs()];
        let rb = ctx.backhaul_rate();
        for s in series {
            let v = if s.optimal {
                let sol = optimize(s.policy, &inst, solver)?;
                if !sol.converged {
                    nonconverged += 1;
                }
                sol.objective
            } else {
                inst.objective(s.policy, &equal)
            };
            values.push(v * rb);
        }
    }
    values.push(access);
    Ok((values, nonconverged))
}

fn run_sum_rate(c: &mut Context<'_>) -> Result<()> {
    let spec = c.spec;
    for (ti, &nt) in spec.n_tiers.iter().enumerate() {
        let topology = build_super_cell(nt, c.cfg.cell_radius_m)?;
        let n_bs = topology.n_bs_per_branch();
        for (li, &lambda) in spec.lambdas.iter().enumerate() {
            let m = ue_count(lambda, n_bs);
            let stream = (ti * spec.lambdas.len() + li) as u32;
            let model = &c.model;
            let drops: Vec<UeRealization> = (0..spec.realizations)
                .into_par_iter()
                .map(|r| {
                    let mut rng = substream(spec.seed, stream, r as u32);
                    sample_realization(&topology, MEASURED_BRANCH, model, m, &mut rng)
                })
                .collect::<Result<_>>()?;
            for &bw in &spec.bw_ratios {
                let cfg = c.cfg.clone().with_bandwidth_ratio(bw);
                for (suffix, k_b) in c.power_points(&cfg, &topology)? {
                    let ctx = RateContext::new(&cfg, k_b)?;
                    let outcomes: Vec<(Vec<f64>, usize)> = drops
                        .par_iter()
                        .map(|real| evaluate(real, &ctx, &spec.series, &spec.solver))
                        .collect::<Result<_>>()?;
                    let mut moments = vec![Moments::default(); spec.series.len() + 1];
                    let mut nonconverged = vec![0usize; spec.series.len()];
                    for (values, nc) in &outcomes {
                        for (mo, v) in moments.iter_mut().zip(values) {
                            mo.push(*v);
                        }
                        if *nc > 0 {
                            for (s, slot) in spec.series.iter().zip(nonconverged.iter_mut()) {
                                if s.optimal {
                                    *slot += 1;
                                }
                            }
                        }
                    }
                    let n = spec.realizations;
                    for (k, s) in spec.series.iter().enumerate() {
                        let flags = if nonconverged[k] > 0 {
                            format!("nonconverged={}", nonconverged[k])
                        } else {
                            String::new()
                        };
                        let (mean, se) = (moments[k].mean(), moments[k].std_err());
                        c.row(nt, lambda, m, k_b, bw, format!("{s}{suffix}"), "sum_rate_bps", mean, se, n, flags);
                    }
                    let access = moments[spec.series.len()];
                    c.row(nt, lambda, m, k_b, bw, format!("ACCESS-LIMIT{suffix}"), "sum_rate_bps", access.mean(), access.std_err(), n, String::new());
                    c.row(nt, lambda, m, k_b, bw, format!("BACKHAUL-LIMIT{suffix}"), "sum_rate_bps", ctx.backhaul_rate(), 0.0, n, String::new());
                }
            }
        }
    }
    Ok(())
}

fn run_pc_coefficients(c: &mut Context<'_>) -> Result<()> {
    let stats = c.stats()?;
    let schemes = match &c.spec.power {
        PowerSetting::Schemes(s) => s.clone(),
        PowerSetting::Fixed(_) => return invalid("pc-coefficients needs power-control schemes"),
    };
    for &nt in &c.spec.n_tiers {
        let topology = build_super_cell(nt, c.cfg.cell_radius_m)?;
        for &bw in &c.spec.bw_ratios {
            let cfg = c.cfg.clone().with_bandwidth_ratio(bw);
            for &scheme in &schemes {
                let pc = power_control(scheme, &cfg, &topology, &stats)?;
                let label = scheme.to_string();
                let flags = if pc.k_min > 1.0 { "capped".to_string() } else { String::new() };
                c.row(nt, 0.0, 0, pc.k_capped, bw, label.clone(), "k_min", pc.k_min, 0.0, 0, flags.clone());
                c.row(nt, 0.0, 0, pc.k_capped, bw, label.clone(), "k_capped", pc.k_capped, 0.0, 0, flags.clone());
                c.row(nt, 0.0, 0, pc.k_capped, bw, label, "backhaul_rate_bps", pc.backhaul_rate, 0.0, 0, flags);
            }
        }
    }
    Ok(())
}

fn run_bbo(c: &mut Context<'_>) -> Result<()> {
    let spec = c.spec;
    let stats = c.stats()?;
    for (ti, &nt) in spec.n_tiers.iter().enumerate() {
        let topology = build_super_cell(nt, c.cfg.cell_radius_m)?;
        let n_bs = topology.n_bs_per_branch();
        for (li, &lambda) in spec.lambdas.iter().enumerate() {
            let m = ue_count(lambda, n_bs);
            if m == 0 {
                return invalid(format!("UE density {lambda} gives no UEs for {n_bs} cells"));
            }
            let stream = (ti * spec.lambdas.len() + li) as u32;
            let samples = access_sum_samples(c.cfg, &topology, &c.model, m, spec.realizations, spec.seed, stream)?;
            for &bw in &spec.bw_ratios {
                let cfg = c.cfg.clone().with_bandwidth_ratio(bw);
                for (suffix, k_b) in c.power_points(&cfg, &topology)? {
                    let analytic = bbo_analytic(&cfg, &topology, &stats, k_b, m)?;
                    let mc = bbo_from_samples(&samples, crate::rates::backhaul_rate(k_b, &cfg)?);
                    c.row(nt, lambda, m, k_b, bw, format!("ANALYTIC{suffix}"), "bbo_probability", analytic, 0.0, 0, String::new());
                    c.row(nt, lambda, m, k_b, bw, format!("MONTE-CARLO{suffix}"), "bbo_probability", mc.probability, mc.std_err, mc.trials, String::new());
                }
            }
        }
    }
    Ok(())
}

/// Runs a sweep and returns its table, including `#` metadata.
pub fn run_experiment(spec: &ExperimentSpec, cfg: &SystemConfig) -> Result<ResultTable> {
    spec.validate()?;
    cfg.validate()?;
    let mut table = ResultTable::default();
    table.push_meta("schema", SCHEMA_VERSION);
    table.push_meta("version", env!("CARGO_PKG_VERSION"));
    table.push_meta("experiment", spec.kind);
    table.push_meta("seed", spec.seed);
    table.push_meta("config_sha256", cfg.content_hash());
    table.push_meta("realizations", spec.realizations);
    table.push_meta("interference_rings", cfg.interference_rings);
    table.push_meta("measured_branch", MEASURED_BRANCH);
    if spec.kind.is_sum_rate() {
        table.push_meta(
            "solver",
            format!(
                "step={} max_iterations={} stagnation={}/{} projection={:?}",
                spec.solver.step,
                spec.solver.max_iterations,
                spec.solver.stagnation_tol,
                spec.solver.stagnation_window,
                spec.solver.projection
            ),
        );
        table.push_meta(
            "note",
            "absolute sum rates depend on the truncated lattice-sum reconstruction of the I0/I30 \
             interference profiles and on the electrical power convention P_a=(P_opt/alpha)^2; \
             deviations from published reference levels are attributed to these choices",
        );
    }
    let mut c = Context {
        spec,
        cfg,
        model: DownlinkModel::new(cfg)?,
        stats: None,
        table,
    };
    match spec.kind {
        k if k.is_sum_rate() => run_sum_rate(&mut c)?,
        ExperimentKind::PcCoefficients => run_pc_coefficients(&mut c)?,
        _ => run_bbo(&mut c)?,
    }
    Ok(c.table)
}
