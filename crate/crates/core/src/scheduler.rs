//! Optimal bandwidth scheduling by projected subgradient ascent.

use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::rates::{NormalizedInstance, Policy, ScheduleVector};

/// How iterates are pulled back onto the simplex after each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Projection {
    /// Clip negative components to zero, then rescale to unit sum.
    #[default]
    ClipRenormalize,
    /// Exact Euclidean projection onto the probability simplex.
    Simplex,
}

impl FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip" | "clip-renormalize" => Ok(Projection::ClipRenormalize),
            "simplex" => Ok(Projection::Simplex),
            _ => invalid(format!("unknown projection {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub step: f64,
    pub max_iterations: usize,
    /// Relative improvement of the best objective below which the run is
    /// considered stagnant.
    pub stagnation_tol: f64,
    pub stagnation_window: usize,
    pub projection: Projection,
    pub keep_trace: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            step: 1e-3,
            max_iterations: 20_000,
            stagnation_tol: 1e-8,
            stagnation_window: 500,
            projection: Projection::ClipRenormalize,
            keep_trace: false,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return invalid("step size must be positive");
        }
        if self.max_iterations == 0 || self.stagnation_window == 0 {
            return invalid("iteration cap and stagnation window must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSolution {
    pub schedule: ScheduleVector,
    /// Best objective in normalized units.
    pub objective: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit before stagnation.
    pub converged: bool,
    /// Best objective after each iteration, when requested.
    pub trace: Vec<f64>,
}

pub fn equal_schedule(n_bs: usize) -> Result<ScheduleVector> {
    ScheduleVector::equal(n_bs)
}

/// Removes the component along the all-ones direction.
pub fn hyperplane_project(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Hyperplane projection restricted to the simplex face containing `mu`:
/// coordinates at zero whose projected step would point outward are held
/// fixed and the mean is taken over the rest. Equals [`hyperplane_project`]
/// in the interior.
pub fn face_project(g: &[f64], mu: &[f64]) -> Vec<f64> {
    let mut free: Vec<bool> = vec![true; g.len()];
    loop {
        let n_free = free.iter().filter(|&&f| f).count();
        if n_free == 0 {
            return vec![0.0; g.len()];
        }
        let mean = g.iter().zip(&free).filter(|(_, &f)| f).map(|(x, _)| x).sum::<f64>() / n_free as f64;
        let mut changed = false;
        for i in 0..g.len() {
            if free[i] && mu[i] <= 0.0 && g[i] < mean {
                free[i] = false;
                changed = true;
            }
        }
        if !changed {
            return g
                .iter()
                .zip(&free)
                .map(|(x, &f)| if f { x - mean } else { 0.0 })
                .collect();
        }
    }
}

/// Euclidean projection onto `{x >= 0, sum x = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

fn clip_renormalize(v: &mut [f64]) {
    for x in v.iter_mut() {
        *x = x.max(0.0);
    }
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        for x in v.iter_mut() {
            *x /= sum;
        }
    } else {
        let n = v.len() as f64;
        v.iter_mut().for_each(|x| *x = 1.0 / n);
    }
}

/// `g_i`: fraction of UEs in cell `i` with `mu_i <= rho_u`.
pub fn ubs_subgradient(mu: &[f64], inst: &NormalizedInstance) -> Vec<f64> {
    (0..inst.n_bs())
        .map(|p| {
            let cell = inst.cell(p);
            if cell.is_empty() {
                0.0
            } else {
                cell.iter().filter(|&&r| mu[p] <= r).count() as f64 / cell.len() as f64
            }
        })
        .collect()
}

/// `g_i = 1` when `mu_i` does not exceed the cell-average `rho`, else 0.
pub fn cbs_subgradient(mu: &[f64], inst: &NormalizedInstance) -> Vec<f64> {
    (0..inst.n_bs())
        .map(|p| {
            if !inst.cell(p).is_empty() && mu[p] <= inst.cap(p) {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

pub fn subgradient(policy: Policy, mu: &[f64], inst: &NormalizedInstance) -> Vec<f64> {
    match policy {
        Policy::Ubs => ubs_subgradient(mu, inst),
        Policy::Cbs => cbs_subgradient(mu, inst),
    }
}

/// Maximizes the normalized branch sum rate over the simplex, starting from
/// the equal schedule and returning the best iterate seen.
pub fn optimize(policy: Policy, inst: &NormalizedInstance, settings: &SolverSettings) -> Result<ScheduleSolution> {
    settings.validate()?;
    let n = inst.n_bs();
    let mut mu = vec![1.0 / n as f64; n];
    let mut best_mu = mu.clone();
    let mut best = inst.objective(policy, &mu);
    let mut trace = Vec::new();
    if n == 1 {
        return Ok(ScheduleSolution {
            schedule: ScheduleVector::from_raw(mu),
            objective: best,
            iterations: 0,
            converged: true,
            trace,
        });
    }
    let mut history = Vec::with_capacity(settings.max_iterations.min(1 << 16));
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=settings.max_iterations {
        iterations = it;
        let raw = subgradient(policy, &mu, inst);
        let g = match settings.projection {
            Projection::ClipRenormalize => face_project(&raw, &mu),
            Projection::Simplex => hyperplane_project(&raw),
        };
        for (m, d) in mu.iter_mut().zip(&g) {
            *m += settings.step * d;
        }
        match settings.projection {
            Projection::ClipRenormalize => clip_renormalize(&mut mu),
            Projection::Simplex => mu = project_simplex(&mu),
        }
        let value = inst.objective(policy, &mu);
        if value > best {
            best = value;
            best_mu.copy_from_slice(&mu);
        }
        history.push(best);
        if it > settings.stagnation_window {
            let old = history[it - 1 - settings.stagnation_window];
            if best - old <= settings.stagnation_tol * best.abs() {
                converged = true;
                break;
            }
        }
    }
    if settings.keep_trace {
        trace = history;
    }
    Ok(ScheduleSolution {
        schedule: ScheduleVector::from_raw(best_mu),
        objective: best,
        iterations,
        converged,
        trace,
    })
}

/// Best objective over a regular simplex grid with spacing `resolution`.
/// Only defined for up to three stations.
pub fn grid_oracle(policy: Policy, inst: &NormalizedInstance, resolution: f64) -> Result<f64> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return invalid("grid resolution must lie in (0, 1]");
    }
    let steps = (1.0 / resolution).round() as usize;
    let h = 1.0 / steps as f64;
    match inst.n_bs() {
        1 => Ok(inst.objective(policy, &[1.0])),
        2 => Ok((0..=steps)
            .map(|a| {
                let x = a as f64 * h;
                inst.objective(policy, &[x, 1.0 - x])
            })
            .fold(f64::NEG_INFINITY, f64::max)),
        3 => {
            let mut best = f64::NEG_INFINITY;
            let mut mu = [0.0; 3];
            for a in 0..=steps {
                for b in 0..=steps - a {
                    mu[0] = a as f64 * h;
                    mu[1] = b as f64 * h;
                    mu[2] = (steps - a - b) as f64 * h;
                    best = best.max(inst.objective(policy, &mu));
                }
            }
            Ok(best)
        }
        n => invalid(format!("grid oracle supports at most 3 stations, got {n}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn face_projection() {
        let g = [0.0, 1.0, 0.5];
        assert_eq!(face_project(&g, &[0.3, 0.3, 0.4]), hyperplane_project(&g));
        let d = face_project(&g, &[0.0, 0.5, 0.5]);
        assert_eq!(d, vec![0.0, 0.25, -0.25]);
        assert_eq!(face_project(&[0.7, 0.7], &[0.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn no_stall_on_empty_cell() {
        // Cell 0 is empty; the optimum lies on the face mu_0 = 0.
        let inst = NormalizedInstance::new(vec![vec![], vec![0.15, 0.4], vec![0.9, 1.2, 0.3]]).unwrap();
        let sol = optimize(Policy::Ubs, &inst, &SolverSettings::default()).unwrap();
        let oracle = grid_oracle(Policy::Ubs, &inst, 1e-3).unwrap();
        assert!(sol.objective >= oracle - 1e-3, "{} vs {oracle}", sol.objective);
    }

    fn inst(rho: Vec<Vec<f64>>) -> NormalizedInstance {
        NormalizedInstance::new(rho).unwrap()
    }

    #[test]
    fn equal_schedules() {
        assert_eq!(equal_schedule(1).unwrap().as_slice(), &[1.0]);
        let s = equal_schedule(15).unwrap();
        assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(equal_schedule(0).is_err());
    }

    #[test]
    fn projection_properties() {
        assert!(hyperplane_project(&[1.0; 4]).iter().all(|x| x.abs() < 1e-15));
        let g = [0.3, -1.2, 4.0, 0.1];
        let p = hyperplane_project(&g);
        let pp = hyperplane_project(&p);
        for (a, b) in p.iter().zip(&pp) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(p.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.2, 0.3, 0.5]);
        assert!((p[0] - 0.2).abs() < 1e-15 && (p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ubs_subgradient_counts() {
        let i = inst(vec![vec![0.1, 0.2, 0.6, 0.7, 0.05], vec![0.3], vec![]]);
        let g = ubs_subgradient(&[0.5, 0.0, 0.5], &i);
        assert_eq!(g, vec![0.4, 1.0, 0.0]);
        let g = ubs_subgradient(&[0.9, 0.0, 0.1], &i);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn cbs_subgradient_cases() {
        let i = inst(vec![vec![0.5], vec![0.2, 0.4]]);
        assert_eq!(cbs_subgradient(&[0.0, 1.0], &i), vec![1.0, 0.0]);
        assert_eq!(cbs_subgradient(&[0.5, 0.3], &i), vec![1.0, 1.0]);
    }

    #[test]
    fn single_station_is_trivial() {
        let i = inst(vec![vec![0.4, 2.0]]);
        let s = optimize(Policy::Ubs, &i, &SolverSettings::default()).unwrap();
        assert_eq!(s.schedule.as_slice(), &[1.0]);
        assert!((s.objective - 0.7).abs() < 1e-15);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn two_station_cbs_toy() {
        let i = inst(vec![vec![0.2], vec![0.9]]);
        let s = optimize(Policy::Cbs, &i, &SolverSettings::default()).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
        let mu0 = s.schedule.get(0);
        assert!((0.1 - 1e-9..=0.2 + 1e-9).contains(&mu0));
        let oracle = grid_oracle(Policy::Cbs, &i, 1e-4).unwrap();
        assert!((oracle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_is_nondecreasing_and_feasible() {
        let i = inst(vec![vec![0.05, 0.3, 0.9], vec![0.2, 0.25], vec![0.6]]);
        let settings = SolverSettings {
            keep_trace: true,
            ..Default::default()
        };
        for p in [Policy::Ubs, Policy::Cbs] {
            let s = optimize(p, &i, &settings).unwrap();
            assert!(s.trace.windows(2).all(|w| w[1] >= w[0]));
            let mu = s.schedule.as_slice();
            assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(mu.iter().all(|&m| m >= -1e-12));
            assert!(s.objective >= i.objective(p, &[1.0 / 3.0; 3]));
            let simplex = optimize(
                p,
                &i,
                &SolverSettings {
                    projection: Projection::Simplex,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((simplex.objective - s.objective).abs() < 2e-3);
        }
    }

    #[test]
    fn oracle_rejects_large_branches() {
        let i = inst(vec![vec![0.1]; 4]);
        assert!(grid_oracle(Policy::Ubs, &i, 0.1).is_err());
    }

    #[test]
    fn oracle_symmetric_caps() {
        let i = inst(vec![vec![0.25], vec![0.25], vec![0.25]]);
        let v = grid_oracle(Policy::Cbs, &i, 1.0 / 300.0).unwrap();
        assert!((v - i.objective(Policy::Cbs, &[1.0 / 3.0; 3])).abs() < 1e-12);
    }
}
