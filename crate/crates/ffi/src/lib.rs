//! C interface to the attocell simulator.
//!
//! Objects are exposed as opaque handles created by `*_new` functions and
//! released with the matching `*_free`. Every fallible call returns an
//! [`AttocellStatus`]; on failure, [`attocell_last_error`] describes the most
//! recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use attocell::bbo::bbo_analytic;
use attocell::channel::{AccessStatistics, SinrDistribution, SinrLaw};
use attocell::power::{power_control, Scheme};
use attocell::rates::{backhaul_rate, NormalizedInstance, Policy};
use attocell::scheduler::{optimize, SolverSettings};
use attocell::topology::{build_super_cell, SuperCellTopology};
use attocell::{Error, SystemConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttocellStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttocellScheme {
    Npc = 0,
    Mspc = 1,
    Aspc = 2,
    Arpc = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttocellPolicy {
    Ubs = 0,
    Cbs = 1,
}

/// Per-UE access statistics of one attocell.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttocellStats {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub mean_sinr: f64,
    /// bits/s
    pub mean_rate: f64,
    pub rate_variance: f64,
    pub rate_min: f64,
    pub rate_max: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AttocellPowerControl {
    pub k_min: f64,
    pub k_capped: f64,
    /// bits/s
    pub backhaul_rate: f64,
}

pub struct AttocellConfig(SystemConfig);
pub struct AttocellTopology(SuperCellTopology);
pub struct AttocellDistribution(SinrDistribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: AttocellStatus, msg: impl Into<String>) -> AttocellStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> AttocellStatus {
    let status = if e.is_input_error() {
        AttocellStatus::InvalidArgument
    } else {
        AttocellStatus::Numerical
    };
    fail(status, e.to_string())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), AttocellStatus>) -> AttocellStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AttocellStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(AttocellStatus::Panic, "internal panic"),
    }
}

trait IntoStatus<T> {
    fn status(self) -> Result<T, AttocellStatus>;
}

impl<T> IntoStatus<T> for attocell::Result<T> {
    fn status(self) -> Result<T, AttocellStatus> {
        self.map_err(from_error)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, AttocellStatus> {
    p.as_ref()
        .ok_or_else(|| fail(AttocellStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, AttocellStatus> {
    p.as_mut()
        .ok_or_else(|| fail(AttocellStatus::NullPointer, format!("{what} is null")))
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn attocell_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a configuration holding the default indoor parameters.
///
/// # Safety
/// `out_cfg` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn attocell_config_new_default(out_cfg: *mut *mut AttocellConfig) -> AttocellStatus {
    guard(|| {
        let slot = out(out_cfg, "out_cfg")?;
        *slot = Box::into_raw(Box::new(AttocellConfig(SystemConfig::default())));
        Ok(())
    })
}

/// Parses a TOML configuration. Missing keys take defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out_cfg` writable.
#[no_mangle]
pub unsafe extern "C" fn attocell_config_from_toml(
    toml: *const c_char,
    out_cfg: *mut *mut AttocellConfig,
) -> AttocellStatus {
    guard(|| {
        if toml.is_null() {
            return Err(fail(AttocellStatus::NullPointer, "toml is null"));
        }
        let slot = out(out_cfg, "out_cfg")?;
        let text = CStr::from_ptr(toml)
            .to_str()
            .map_err(|_| fail(AttocellStatus::InvalidArgument, "toml is not UTF-8"))?;
        let cfg = SystemConfig::from_toml_str(text).status()?;
        *slot = Box::into_raw(Box::new(AttocellConfig(cfg)));
        Ok(())
    })
}

/// Sets the backhaul bandwidth to `ratio` times the access bandwidth.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn attocell_config_set_bandwidth_ratio(cfg: *mut AttocellConfig, ratio: f64) -> AttocellStatus {
    guard(|| {
        let cfg = out(cfg, "cfg")?;
        let updated = cfg.0.clone().with_bandwidth_ratio(ratio);
        updated.validate().status()?;
        cfg.0 = updated;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn attocell_config_free(cfg: *mut AttocellConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds a six-branch super cell with `n_tiers` tiers.
///
/// # Safety
/// `out_topology` must be writable.
#[no_mangle]
pub unsafe extern "C" fn attocell_topology_new(
    n_tiers: usize,
    cell_radius: f64,
    out_topology: *mut *mut AttocellTopology,
) -> AttocellStatus {
    guard(|| {
        let slot = out(out_topology, "out_topology")?;
        let t = build_super_cell(n_tiers, cell_radius).status()?;
        *slot = Box::into_raw(Box::new(AttocellTopology(t)));
        Ok(())
    })
}

/// # Safety
/// `topology` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn attocell_topology_n_bs_per_branch(topology: *const AttocellTopology) -> usize {
    topology.as_ref().map_or(0, |t| t.0.n_bs_per_branch())
}

/// Writes the backhaul path from the tier-1 station to `bs_index` into
/// `buf`. `out_len` receives the path length even when `capacity` is too
/// small, in which case `BufferTooSmall` is returned.
///
/// # Safety
/// `buf` must hold `capacity` elements (it may be null when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn attocell_topology_path(
    topology: *const AttocellTopology,
    bs_index: usize,
    buf: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> AttocellStatus {
    guard(|| {
        let t = deref(topology, "topology")?;
        let len_slot = out(out_len, "out_len")?;
        let path = t.0.path_to(bs_index).status()?;
        *len_slot = path.len();
        if capacity < path.len() {
            return Err(fail(
                AttocellStatus::BufferTooSmall,
                format!("path has {} entries, buffer holds {capacity}", path.len()),
            ));
        }
        if buf.is_null() {
            return Err(fail(AttocellStatus::NullPointer, "buf is null"));
        }
        std::slice::from_raw_parts_mut(buf, path.len()).copy_from_slice(path);
        Ok(())
    })
}

/// # Safety
/// `topology` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn attocell_topology_free(topology: *mut AttocellTopology) {
    if !topology.is_null() {
        drop(Box::from_raw(topology));
    }
}

/// Builds the downlink SINR distribution of a single attocell.
///
/// # Safety
/// `cfg` must be a live handle and `out_dist` writable.
#[no_mangle]
pub unsafe extern "C" fn attocell_distribution_new(
    cfg: *const AttocellConfig,
    out_dist: *mut *mut AttocellDistribution,
) -> AttocellStatus {
    guard(|| {
        let cfg = deref(cfg, "cfg")?;
        let slot = out(out_dist, "out_dist")?;
        let d = SinrDistribution::new(&cfg.0).status()?;
        *slot = Box::into_raw(Box::new(AttocellDistribution(d)));
        Ok(())
    })
}

/// `P[gamma <= x]`.
///
/// # Safety
/// `dist` must be a live handle and `out_p` writable.
#[no_mangle]
pub unsafe extern "C" fn attocell_distribution_cdf(
    dist: *const AttocellDistribution,
    x: f64,
    out_p: *mut f64,
) -> AttocellStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let slot = out(out_p, "out_p")?;
        *slot = d.0.cdf(x).status()?;
        Ok(())
    })
}

/// # Safety
/// `dist` must be a live handle and `out_stats` writable.
#[no_mangle]
pub unsafe extern "C" fn attocell_distribution_statistics(
    dist: *const AttocellDistribution,
    out_stats: *mut AttocellStats,
) -> AttocellStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let slot = out(out_stats, "out_stats")?;
        let s = d.0.statistics().status()?;
        *slot = AttocellStats {
            gamma_min: s.gamma_min,
            gamma_max: s.gamma_max,
            mean_sinr: s.mean_sinr,
            mean_rate: s.mean_rate,
            rate_variance: s.rate_variance,
            rate_min: s.rate_min,
            rate_max: s.rate_max,
        };
        Ok(())
    })
}

/// # Safety
/// `dist` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn attocell_distribution_free(dist: *mut AttocellDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

fn core_stats(s: &AttocellStats) -> AccessStatistics {
    AccessStatistics {
        gamma_min: s.gamma_min,
        gamma_max: s.gamma_max,
        mean_sinr: s.mean_sinr,
        mean_rate: s.mean_rate,
        rate_variance: s.rate_variance,
        rate_min: s.rate_min,
        rate_max: s.rate_max,
    }
}

/// Bottleneck backhaul rate in bits/s at power ratio `k_b`.
///
/// # Safety
/// `cfg` must be a live handle and `out_rate` writable.
#[no_mangle]
pub unsafe extern "C" fn attocell_backhaul_rate(
    cfg: *const AttocellConfig,
    k_b: f64,
    out_rate: *mut f64,
) -> AttocellStatus {
    guard(|| {
        let cfg = deref(cfg, "cfg")?;
        let slot = out(out_rate, "out_rate")?;
        *slot = backhaul_rate(k_b, &cfg.0).status()?;
        Ok(())
    })
}

/// Fixed power-control coefficient of `scheme`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn attocell_power_control(
    scheme: AttocellScheme,
    cfg: *const AttocellConfig,
    topology: *const AttocellTopology,
    stats: *const AttocellStats,
    out_result: *mut AttocellPowerControl,
) -> AttocellStatus {
    guard(|| {
        let cfg = deref(cfg, "cfg")?;
        let t = deref(topology, "topology")?;
        let s = deref(stats, "stats")?;
        let slot = out(out_result, "out_result")?;
        let scheme = match scheme {
            AttocellScheme::Npc => Scheme::Npc,
            AttocellScheme::Mspc => Scheme::Mspc,
            AttocellScheme::Aspc => Scheme::Aspc,
            AttocellScheme::Arpc => Scheme::Arpc,
        };
        let r = power_control(scheme, &cfg.0, &t.0, &core_stats(s)).status()?;
        *slot = AttocellPowerControl {
            k_min: r.k_min,
            k_capped: r.k_capped,
            backhaul_rate: r.backhaul_rate,
        };
        Ok(())
    })
}

/// Analytic backhaul bottleneck probability for `m_ues` UEs per branch.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn attocell_bbo_analytic(
    cfg: *const AttocellConfig,
    topology: *const AttocellTopology,
    stats: *const AttocellStats,
    k_b: f64,
    m_ues: usize,
    out_p: *mut f64,
) -> AttocellStatus {
    guard(|| {
        let cfg = deref(cfg, "cfg")?;
        let t = deref(topology, "topology")?;
        let s = deref(stats, "stats")?;
        let slot = out(out_p, "out_p")?;
        *slot = bbo_analytic(&cfg.0, &t.0, &core_stats(s), k_b, m_ues).status()?;
        Ok(())
    })
}

/// Optimizes the bandwidth-sharing schedule with default solver settings.
///
/// `rho` holds the normalized UE rates cell by cell; `counts[i]` is the
/// number of UEs in cell `i`. The schedule is written to `out_mu`
/// (`n_bs` entries) and the objective to `out_objective`.
///
/// # Safety
/// `counts` and `out_mu` must hold `n_bs` elements, `rho` the sum of `counts`.
#[no_mangle]
pub unsafe extern "C" fn attocell_optimize_schedule(
    policy: AttocellPolicy,
    rho: *const f64,
    counts: *const usize,
    n_bs: usize,
    out_mu: *mut f64,
    out_objective: *mut f64,
) -> AttocellStatus {
    guard(|| {
        if n_bs == 0 {
            return Err(fail(AttocellStatus::InvalidArgument, "n_bs must be positive"));
        }
        if counts.is_null() || out_mu.is_null() {
            return Err(fail(AttocellStatus::NullPointer, "counts or out_mu is null"));
        }
        let obj_slot = out(out_objective, "out_objective")?;
        let counts = std::slice::from_raw_parts(counts, n_bs);
        let total: usize = counts.iter().sum();
        if total > 0 && rho.is_null() {
            return Err(fail(AttocellStatus::NullPointer, "rho is null"));
        }
        let flat = if total == 0 { &[][..] } else { std::slice::from_raw_parts(rho, total) };
        let mut cells = Vec::with_capacity(n_bs);
        let mut offset = 0;
        for &c in counts {
            cells.push(flat[offset..offset + c].to_vec());
            offset += c;
        }
        let inst = NormalizedInstance::new(cells).status()?;
        let policy = match policy {
            AttocellPolicy::Ubs => Policy::Ubs,
            AttocellPolicy::Cbs => Policy::Cbs,
        };
        let sol = optimize(policy, &inst, &SolverSettings::default()).status()?;
        std::slice::from_raw_parts_mut(out_mu, n_bs).copy_from_slice(sol.schedule.as_slice());
        *obj_slot = sol.objective;
        Ok(())
    })
}
