//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! process exits nonzero if any gating check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use attocell::bbo::{cell_averaged_sum, mmse_beta};
use attocell::channel::SinrDistribution;
use attocell::harness::{run_experiment, ExperimentKind, ExperimentSpec, PowerSetting, ResultTable, Series};
use attocell::power::{arpc_coefficient, aspc_coefficient, mspc_coefficient, Scheme};
use attocell::rates::{NormalizedInstance, Policy};
use attocell::scheduler::{equal_schedule, grid_oracle, optimize, SolverSettings};
use attocell::topology::build_super_cell;
use attocell::SystemConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn structure() -> Outcome {
    for nt in 1..=6 {
        let t = build_super_cell(nt, 2.5).unwrap();
        if t.n_bs_per_branch() != nt * (nt + 1) / 2 {
            return outcome(false, format!("N_T={nt}: {} stations per branch", t.n_bs_per_branch()));
        }
    }
    for nt in 3..=6 {
        let t = build_super_cell(nt, 2.5).unwrap();
        let p = t.path_to(20).unwrap();
        if p != [1, 8, 20] {
            return outcome(false, format!("N_T={nt}: path of 20 is {p:?}"));
        }
    }
    outcome(true, "N_BS = N_T(N_T+1)/2 for N_T=1..6; path(20) = [1, 8, 20]")
}

fn random_instance(rng: &mut ChaCha8Rng) -> NormalizedInstance {
    let n_bs = rng.random_range(2..=3);
    let m = rng.random_range(1..=9);
    let mut cells = vec![Vec::new(); n_bs];
    for _ in 0..m {
        cells[rng.random_range(0..n_bs)].push(rng.random_range(0.0..1.5));
    }
    NormalizedInstance::new(cells).unwrap()
}

fn scheduler_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let settings = SolverSettings::default();
    let mut worst_gap: f64 = 0.0;
    for i in 0..200 {
        let inst = random_instance(&mut rng);
        let resolution = if inst.n_bs() == 2 { 1e-4 } else { 5e-4 };
        for policy in [Policy::Ubs, Policy::Cbs] {
            let sol = optimize(policy, &inst, &settings).unwrap();
            let oracle = grid_oracle(policy, &inst, resolution).unwrap();
            let equal = inst.objective(policy, equal_schedule(inst.n_bs()).unwrap().as_slice());
            let gap = (sol.objective - oracle).abs();
            worst_gap = worst_gap.max(gap);
            if gap > 1e-3 || sol.objective < equal {
                return outcome(
                    false,
                    format!(
                        "instance {i} {policy}: solver {:.6} oracle {oracle:.6} equal {equal:.6}",
                        sol.objective
                    ),
                );
            }
        }
    }
    outcome(true, format!("200 instances, worst |solver - oracle| = {worst_gap:.2e}, never below equal"))
}

fn power_ordering() -> Outcome {
    let base = SystemConfig::default();
    let stats = SinrDistribution::new(&base).unwrap().statistics().unwrap();
    // k[scheme][nt][bw]
    let mut k = vec![vec![vec![0.0; 4]; 5]; 3];
    for nt in 1..=5 {
        let t = build_super_cell(nt, base.cell_radius_m).unwrap();
        for bw in 1..=4 {
            let cfg = base.clone().with_bandwidth_ratio(bw as f64);
            let arpc = arpc_coefficient(&cfg, &t, &stats).unwrap();
            let aspc = aspc_coefficient(&cfg, &t, &stats).unwrap();
            let mspc = mspc_coefficient(&cfg, &t, &stats).unwrap();
            if !(arpc < aspc && aspc < mspc) {
                return outcome(
                    false,
                    format!("N_T={nt} ratio={bw}: ARPC {arpc:e} ASPC {aspc:e} MSPC {mspc:e}"),
                );
            }
            k[0][nt - 1][bw - 1] = arpc;
            k[1][nt - 1][bw - 1] = aspc;
            k[2][nt - 1][bw - 1] = mspc;
        }
    }
    for (s, surface) in k.iter().enumerate() {
        for nt in 0..5 {
            for bw in 0..4 {
                let v = surface[nt][bw];
                if nt > 0 && v < surface[nt - 1][bw] {
                    return outcome(false, format!("scheme {s} decreases in N_T at N_T={}", nt + 1));
                }
                if bw > 0 && v > surface[nt][bw - 1] {
                    return outcome(false, format!("scheme {s} increases in ratio at ratio={}", bw + 1));
                }
            }
        }
    }
    outcome(true, "ARPC < ASPC < MSPC on N_T=1..5 x ratio=1..4, monotone in both axes")
}

fn bbo_rows<'a>(table: &'a ResultTable, series: &'a str) -> impl Iterator<Item = &'a attocell::harness::Row> + 'a {
    table.select(series, "bbo_probability")
}

fn bbo_agreement() -> Outcome {
    let spec = ExperimentSpec::defaults(ExperimentKind::BboVsKb);
    assert!(spec.realizations >= 100_000);
    let table = run_experiment(&spec, &SystemConfig::default()).unwrap();
    let analytic: Vec<_> = bbo_rows(&table, "ANALYTIC").collect();
    let mc: Vec<_> = bbo_rows(&table, "MONTE-CARLO").collect();
    if analytic.len() != 6 * 20 || mc.len() != analytic.len() {
        return outcome(false, format!("expected 120 grid points, got {}/{}", analytic.len(), mc.len()));
    }
    let mut worst = (0.0, 0, 0.0, 0.0);
    for (a, m) in analytic.iter().zip(&mc) {
        assert_eq!((a.n_tiers, a.lambda, a.k_b), (m.n_tiers, m.lambda, m.k_b));
        let gap = (a.mean - m.mean).abs();
        if gap > worst.0 {
            worst = (gap, a.n_tiers, a.lambda, a.k_b);
        }
    }
    let (gap, nt, lambda, kb) = worst;
    outcome(
        gap <= 0.05,
        format!(
            "max |analytic - MC| = {gap:.4} (N_T={nt}, lambda={lambda}, K_b={kb:.2e}), {} trials/point",
            mc[0].realizations
        ),
    )
}

fn bbo_anchors() -> Outcome {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::BboGrid);
    spec.lambdas = vec![1.0, 5.0];
    spec.power = PowerSetting::Schemes(vec![Scheme::Npc, Scheme::Mspc]);
    let table = run_experiment(&spec, &SystemConfig::default()).unwrap();
    let mut worst_zero: f64 = 0.0;
    let mut anchor = Vec::new();
    for scheme in ["NPC", "MSPC"] {
        for r in bbo_rows(&table, &format!("MONTE-CARLO/{scheme}")) {
            if r.n_tiers < 5 {
                worst_zero = worst_zero.max(r.mean);
            } else if r.lambda == 5.0 {
                anchor.push((scheme, r.mean));
            }
        }
    }
    let anchor_ok = anchor.len() == 2 && anchor.iter().all(|(_, p)| (p - 0.20).abs() <= 0.05);
    let analytic: Vec<f64> = bbo_rows(&table, "ANALYTIC/NPC")
        .filter(|r| r.n_tiers == 5 && r.lambda == 5.0)
        .map(|r| r.mean)
        .collect();
    outcome(
        worst_zero <= 0.01 && anchor_ok,
        format!(
            "max BBO for N_T<5 = {worst_zero:.4}; N_T=5 lambda=5: {} (analytic NPC {:.4})",
            anchor
                .iter()
                .map(|(s, p)| format!("{s} {p:.4}"))
                .collect::<Vec<_>>()
                .join(", "),
            analytic.first().copied().unwrap_or(f64::NAN)
        ),
    )
}

fn sum_rate_anchors() -> Outcome {
    const REFERENCE_MBPS: [f64; 5] = [74.0, 221.0, 442.0, 734.0, 1083.0];
    let mut spec = ExperimentSpec::defaults(ExperimentKind::SumrateVsNt);
    spec.realizations = 1000;
    spec.series = vec!["CBS-OPT".parse::<Series>().unwrap()];
    spec.power = PowerSetting::Schemes(vec![Scheme::Npc, Scheme::Mspc, Scheme::Aspc]);
    let table = run_experiment(&spec, &SystemConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for scheme in ["NPC", "MSPC", "ASPC"] {
        for r in table.select(&format!("CBS-OPT/{scheme}"), "sum_rate_bps") {
            let dev = r.mean / 1e6 / REFERENCE_MBPS[r.n_tiers - 1] - 1.0;
            worst = if dev.abs() > worst.abs() { dev } else { worst };
            if scheme == "NPC" {
                parts.push(format!("{:.0}", r.mean / 1e6));
            }
        }
    }
    let within = worst.abs() <= 0.15;
    let attributed = table
        .metadata
        .iter()
        .any(|(k, v)| k == "note" && v.contains("I0/I30"));
    let summary = format!(
        "NPC sum rates {} Mbit/s vs 74/221/442/734/1083, worst deviation {:+.1}%",
        parts.join("/"),
        100.0 * worst
    );
    if within {
        outcome(true, summary)
    } else {
        outcome(attributed, format!("{summary}; outside 15%, attributed in output metadata"))
    }
}

fn moment_agreement() -> Outcome {
    let cfg = SystemConfig::default();
    let dist = SinrDistribution::new(&cfg).unwrap();
    let stats = dist.statistics().unwrap();
    let bw = cfg.access_effective_bw();
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let nf = n as f64;
    let mean_se = |xs: &mut dyn Iterator<Item = f64>| {
        let (mut s, mut s2) = (0.0, 0.0);
        for x in xs {
            s += x;
            s2 += x * x;
        }
        let mean = s / nf;
        (mean, ((s2 / nf - mean * mean) / (nf - 1.0)).sqrt())
    };
    let (g_mean, g_se) = mean_se(&mut draws.iter().copied());
    let (r_mean, r_se) = mean_se(&mut draws.iter().map(|g| bw * g.ln_1p() / std::f64::consts::LN_2));
    let (v_mean, v_se) = mean_se(
        &mut draws
            .iter()
            .map(|g| (bw * g.ln_1p() / std::f64::consts::LN_2 - r_mean).powi(2)),
    );
    let z = [
        (stats.mean_sinr - g_mean) / g_se,
        (stats.mean_rate - r_mean) / r_se,
        (stats.rate_variance - v_mean * nf / (nf - 1.0)) / v_se,
    ];
    outcome(
        z.iter().all(|z| z.abs() <= 3.0),
        format!(
            "1e6 draws: z(mean SINR) = {:+.2}, z(mean rate) = {:+.2}, z(rate variance) = {:+.2}",
            z[0], z[1], z[2]
        ),
    )
}

fn cell_average_approximation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=15);
        let c = rng.random_range(1..=8);
        let counts = vec![c; n];
        let x: Vec<f64> = (0..n * c).map(|_| rng.random_range(1e7..2e8)).collect();
        let y = cell_averaged_sum(&counts, &x);
        let s: f64 = x.iter().sum();
        let approx = mmse_beta(&counts).unwrap() * s;
        worst_rel = worst_rel.max(((y - approx) / y).abs());
    }
    if worst_rel > 1e-13 {
        return outcome(false, format!("equal counts: relative error {worst_rel:e}"));
    }

    let dist = SinrDistribution::new(&SystemConfig::default()).unwrap();
    let mut misses = 0;
    for _ in 0..50 {
        let n_cells = rng.random_range(2..=10);
        let counts: Vec<usize> = (0..n_cells).map(|_| rng.random_range(0..=6)).collect();
        let m: usize = counts.iter().sum();
        if m == 0 {
            continue;
        }
        let beta_star = mmse_beta(&counts).unwrap();
        let grid: Vec<f64> = (-10..=10).map(|k| beta_star * (1.0 + 0.05 * k as f64)).collect();
        let mut sse = vec![0.0; grid.len()];
        for _ in 0..4000 {
            let x: Vec<f64> = (0..m).map(|_| dist.sample(&mut rng).ln_1p()).collect();
            let y = cell_averaged_sum(&counts, &x);
            let s: f64 = x.iter().sum();
            for (e, b) in sse.iter_mut().zip(&grid) {
                *e += (y - b * s).powi(2);
            }
        }
        let best = sse
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        if best != 10 {
            misses += 1;
        }
    }
    outcome(
        misses == 0,
        format!("equal counts exact (max rel {worst_rel:.1e}); beta* is the grid argmin in {}/50", 50 - misses),
    )
}

fn run_with_threads(threads: usize, spec: &ExperimentSpec) -> String {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| run_experiment(spec, &SystemConfig::default()).unwrap().to_csv_string())
}

fn determinism() -> Outcome {
    let mut specs = Vec::new();
    let mut kb = ExperimentSpec::defaults(ExperimentKind::SumrateVsKb);
    kb.realizations = 60;
    kb.seed = 11;
    specs.push(kb);
    let mut bbo = ExperimentSpec::defaults(ExperimentKind::BboVsKb);
    bbo.realizations = 2000;
    bbo.seed = 11;
    specs.push(bbo);
    specs.push(ExperimentSpec::defaults(ExperimentKind::PcCoefficients));
    for spec in &specs {
        let one = run_with_threads(1, spec);
        let four = run_with_threads(4, spec);
        if one != four {
            return outcome(false, format!("{} differs between 1 and 4 workers", spec.kind.name()));
        }
    }
    outcome(true, "sumrate-vs-kb, bbo-vs-kb, pc-coefficients byte-identical with 1 and 4 workers")
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let checks: [(u32, &str, Check, Duration); 9] = [
        (1, "structure", structure, Duration::from_secs(1)),
        (2, "scheduler optimality", scheduler_optimality, Duration::from_secs(120)),
        (3, "power-coefficient ordering", power_ordering, Duration::from_secs(60)),
        (4, "BBO analytic vs Monte Carlo", bbo_agreement, Duration::from_secs(900)),
        (5, "BBO anchors", bbo_anchors, Duration::from_secs(600)),
        (6, "sum-rate anchors", sum_rate_anchors, Duration::from_secs(1800)),
        (7, "moment agreement", moment_agreement, Duration::from_secs(120)),
        (8, "cell-average approximation", cell_average_approximation, Duration::from_secs(60)),
        (9, "determinism", determinism, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (id, name, check, budget) in checks {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{}] {name}: {} ({:.1}s of {}s{})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
