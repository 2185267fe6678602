//! Downlink SINR model, its distribution and moments, and the backhaul SNR.
//!
//! Geometry convention: profile azimuths are measured in the cell frame where
//! 0° points toward a hexagon vertex and 30° toward the nearest neighbouring
//! base station, the direction of strongest interference. In topology
//! coordinates neighbours sit at 0°, 60°, ..., so cell-frame azimuth `phi`
//! corresponds to lattice angle `phi + 30°`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, LN_2, PI};

use rand::Rng;

use crate::config::SystemConfig;
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::topology::SuperCellTopology;

/// Radial grid size of the cached interference profiles.
pub const PROFILE_POINTS: usize = 512;

/// Lambertian order `-ln 2 / ln cos(phi)` of an emitter with half-power
/// semi-angle `phi`.
pub fn lambertian_order(semiangle_deg: f64) -> Result<f64> {
    if !(semiangle_deg > 0.0 && semiangle_deg < 90.0) {
        return invalid(format!("semi-angle must lie in (0, 90) degrees, got {semiangle_deg}"));
    }
    Ok(-LN_2 / semiangle_deg.to_radians().cos().ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Azimuth {
    /// Toward a hexagon vertex.
    Deg0,
    /// Toward a neighbouring base station.
    Deg30,
}

impl Azimuth {
    /// Angle in topology coordinates.
    pub fn lattice_angle(self) -> f64 {
        match self {
            Azimuth::Deg0 => FRAC_PI_6,
            Azimuth::Deg30 => 2.0 * FRAC_PI_6,
        }
    }
}

/// Interferer positions of a full-reuse hexagonal lattice, relative to the
/// serving base station.
#[derive(Debug, Clone)]
pub struct InterferenceField {
    offsets: Vec<[f64; 2]>,
    h2: f64,
    exponent: f64,
    equivalent_radius: f64,
}

impl InterferenceField {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        Self::with_rings(cfg, cfg.interference_rings)
    }

    pub fn with_rings(cfg: &SystemConfig, rings: u32) -> Result<Self> {
        cfg.validate()?;
        if rings == 0 {
            return invalid("interference needs at least one ring");
        }
        let s = cfg.bs_spacing();
        let n = rings as i64;
        let mut offsets = Vec::with_capacity((3 * n * (n + 1)) as usize);
        for q in -n..=n {
            for r in -n..=n {
                let ring = q.abs().max(r.abs()).max((q + r).abs());
                if ring == 0 || ring > n {
                    continue;
                }
                let (q, r) = (q as f64, r as f64);
                offsets.push([s * (q + 0.5 * r), s * r * 3f64.sqrt() / 2.0]);
            }
        }
        let h = cfg.vertical_sep_m;
        Ok(Self {
            offsets,
            h2: h * h,
            exponent: -(cfg.access_lambertian_order() + 3.0),
            equivalent_radius: cfg.equivalent_radius(),
        })
    }

    pub fn n_interferers(&self) -> usize {
        self.offsets.len()
    }

    /// Interference sum at horizontal offset `(x, y)` from the serving BS.
    pub fn at(&self, x: f64, y: f64) -> f64 {
        self.offsets
            .iter()
            .map(|p| {
                let d2 = (x - p[0]).powi(2) + (y - p[1]).powi(2);
                (d2 + self.h2).powf(self.exponent)
            })
            .sum()
    }

    /// Interference sum at radius `r` along a cell-frame azimuth.
    pub fn profile(&self, r: f64, azimuth: Azimuth) -> Result<f64> {
        if !(0.0..=self.equivalent_radius * (1.0 + 1e-12)).contains(&r) {
            return invalid(format!(
                "radius {r} outside [0, {}]",
                self.equivalent_radius
            ));
        }
        let a = azimuth.lattice_angle();
        Ok(self.at(r * a.cos(), r * a.sin()))
    }
}

/// Interference profile `I_0°(r)` or `I_30°(r)` truncated to `rings` lattice rings.
pub fn interference_profile(cfg: &SystemConfig, r: f64, azimuth: Azimuth, rings: u32) -> Result<f64> {
    InterferenceField::with_rings(cfg, rings)?.profile(r, azimuth)
}

/// Backhaul SNR per subcarrier at power ratio `k_b`.
pub fn backhaul_snr(k_b: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(k_b >= 0.0) {
        return invalid(format!("power ratio must be nonnegative, got {k_b}"));
    }
    Ok(k_b * cfg.backhaul_snr_unit())
}

/// Per-attocell downlink model: desired signal, lattice interference and noise.
#[derive(Debug, Clone)]
pub struct DownlinkModel {
    field: InterferenceField,
    xi_inv: f64,
    omega: f64,
    cell_radius: f64,
}

impl DownlinkModel {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        Ok(Self {
            field: InterferenceField::new(cfg)?,
            xi_inv: 1.0 / cfg.xi_access(),
            omega: cfg.omega(),
            cell_radius: cfg.cell_radius_m,
        })
    }

    pub fn field(&self) -> &InterferenceField {
        &self.field
    }

    pub fn equivalent_radius(&self) -> f64 {
        self.field.equivalent_radius
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Normalized desired-signal term at horizontal distance `r`.
    pub fn signal(&self, r: f64) -> f64 {
        self.xi_inv * (r * r + self.field.h2).powf(self.field.exponent)
    }

    /// SINR of a UE at polar offset `(r, theta)` from its serving BS, with
    /// `theta` in topology coordinates.
    pub fn sinr(&self, r: f64, theta: f64) -> Result<f64> {
        let re = self.equivalent_radius();
        if !(0.0..=re * (1.0 + 1e-12)).contains(&r) {
            return invalid(format!("UE radius {r} outside equivalent disc of radius {re}"));
        }
        let i = self.field.at(r * theta.cos(), r * theta.sin());
        Ok(self.signal(r) / (i + self.omega))
    }

    /// Lower SINR bound, attained at the disc edge facing a neighbour.
    pub fn gamma_min(&self) -> f64 {
        let re = self.equivalent_radius();
        self.sinr(re, Azimuth::Deg30.lattice_angle()).expect("edge radius is valid")
    }

    /// Upper SINR bound, attained at the cell center.
    pub fn gamma_max(&self) -> f64 {
        self.sinr(0.0, 0.0).expect("zero radius is valid")
    }

    /// Draws a uniform position in the equivalent disc and returns `(r, theta, sinr)`.
    pub fn sample_ue<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let r = self.equivalent_radius() * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let g = self.sinr(r, theta).expect("sampled radius is inside the disc");
        (r, theta, g)
    }
}

/// SINR of a UE served by `serving_bs`, using the truncated lattice interference.
pub fn downlink_sinr(
    ue_polar: (f64, f64),
    serving_bs: usize,
    topology: &SuperCellTopology,
    model: &DownlinkModel,
) -> Result<f64> {
    topology.station(serving_bs)?;
    if (topology.cell_radius() - model.cell_radius).abs() > 1e-12 * model.cell_radius {
        return invalid("topology and channel model use different cell radii");
    }
    model.sinr(ue_polar.0, ue_polar.1)
}

/// Clamped arcsine: `-pi/2` below -1, `pi/2` above 1.
pub fn arcsin_clamped(z: f64) -> f64 {
    if z <= -1.0 {
        -FRAC_PI_2
    } else if z >= 1.0 {
        FRAC_PI_2
    } else {
        z.asin()
    }
}

/// A distribution with bounded support, described by its CDF.
pub trait SinrLaw {
    fn support(&self) -> (f64, f64);
    fn cdf(&self, gamma: f64) -> Result<f64>;
}

const MOMENT_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-7,
    max_intervals: 4000,
};

fn log_support<L: SinrLaw + ?Sized>(law: &L) -> (f64, f64) {
    let (a, b) = law.support();
    (a.ln_1p(), b.ln_1p())
}

/// `E[gamma]` from the survival function, integrated over `t = ln(1 + gamma)`.
pub fn mean_sinr_of<L: SinrLaw + ?Sized>(law: &L) -> Result<f64> {
    let (a, _) = law.support();
    let (ta, tb) = log_support(law);
    let mut failure = None;
    let tail = integrate(
        |t| match law.cdf(t.exp_m1()) {
            Ok(f) => (1.0 - f) * t.exp(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        ta,
        tb,
        MOMENT_TOL,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(a + tail.value)
}

/// `E[log2(1 + gamma)]` and `E[log2(1 + gamma)^2]`.
pub fn log_moments_of<L: SinrLaw + ?Sized>(law: &L) -> Result<(f64, f64)> {
    let (ta, tb) = log_support(law);
    let mut failure = None;
    let mut surv = |t: f64| match law.cdf(t.exp_m1()) {
        Ok(f) => 1.0 - f,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let first = integrate(&mut surv, ta, tb, MOMENT_TOL)?.value;
    let second = integrate(|t| t * surv(t), ta, tb, MOMENT_TOL)?.value;
    if let Some(e) = failure {
        return Err(e);
    }
    let mean = (ta + first) / LN_2;
    let square = (ta * ta + 2.0 * second) / (LN_2 * LN_2);
    Ok((mean, square))
}

/// Moments of the per-UE access rate `xi_a B_a log2(1 + gamma)` and the SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessStatistics {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub mean_sinr: f64,
    /// bits/s
    pub mean_rate: f64,
    /// (bits/s)^2
    pub rate_variance: f64,
    pub rate_min: f64,
    pub rate_max: f64,
}

impl AccessStatistics {
    pub fn rate_std(&self) -> f64 {
        self.rate_variance.sqrt()
    }
}

/// Downlink SINR distribution of a UE uniformly placed in the equivalent disc,
/// using the harmonic azimuthal interference model built from cached
/// `I_0°` and `I_30°` profiles.
#[derive(Debug, Clone)]
pub struct SinrDistribution {
    model: DownlinkModel,
    step: f64,
    i0: Vec<f64>,
    i30: Vec<f64>,
    gamma_min: f64,
    gamma_max: f64,
    access_bw: f64,
}

const CDF_TOL: Tolerance = Tolerance {
    abs: 1e-10,
    rel: 0.0,
    max_intervals: 2000,
};

impl SinrDistribution {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let model = DownlinkModel::new(cfg)?;
        let re = model.equivalent_radius();
        let step = re / (PROFILE_POINTS - 1) as f64;
        let mut i0 = Vec::with_capacity(PROFILE_POINTS);
        let mut i30 = Vec::with_capacity(PROFILE_POINTS);
        for k in 0..PROFILE_POINTS {
            let r = (k as f64 * step).min(re);
            i0.push(model.field.profile(r, Azimuth::Deg0)?);
            i30.push(model.field.profile(r, Azimuth::Deg30)?);
        }
        if i0.iter().chain(&i30).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Numerical("interference profile is not finite".into()));
        }
        let omega = model.omega;
        let gamma_min = model.signal(re) / (i30[PROFILE_POINTS - 1] + omega);
        let gamma_max = model.signal(0.0) / (i0[0] + omega);
        Ok(Self {
            model,
            step,
            i0,
            i30,
            gamma_min,
            gamma_max,
            access_bw: cfg.access_effective_bw(),
        })
    }

    pub fn model(&self) -> &DownlinkModel {
        &self.model
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma_min
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    /// Linearly interpolated `(I_0°(r), I_30°(r))`.
    pub fn profiles(&self, r: f64) -> (f64, f64) {
        let x = (r / self.step).clamp(0.0, (PROFILE_POINTS - 1) as f64);
        let k = (x.floor() as usize).min(PROFILE_POINTS - 2);
        let w = x - k as f64;
        (
            self.i0[k] + w * (self.i0[k + 1] - self.i0[k]),
            self.i30[k] + w * (self.i30[k + 1] - self.i30[k]),
        )
    }

    /// Normalized threshold `Z(r, gamma)`.
    pub fn z(&self, r: f64, gamma: f64) -> f64 {
        let (a, b) = self.profiles(r);
        let num = 2.0 * self.model.signal(r) / gamma - 2.0 * self.model.omega - (a + b);
        let den = (a - b).abs();
        if den > 0.0 {
            num / den
        } else if num > 0.0 {
            f64::INFINITY
        } else if num < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    }

    /// SINR under the harmonic model at radius `r` and cell-frame azimuth `theta`.
    pub fn harmonic_sinr(&self, r: f64, theta: f64) -> f64 {
        let (a, b) = self.profiles(r);
        let i = 0.5 * (a + b) + 0.5 * (a - b) * (6.0 * theta).cos();
        self.model.signal(r) / (i + self.model.omega)
    }

    /// Draws one SINR from the distribution this CDF describes.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let r = self.model.equivalent_radius() * rng.random::<f64>().sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        self.harmonic_sinr(r, theta)
    }

    /// Mean SINR.
    pub fn mean_sinr(&self) -> Result<f64> {
        mean_sinr_of(self)
    }

    /// Mean per-UE access rate `xi_a B_a E[log2(1 + gamma)]` in bits/s.
    pub fn mean_rate(&self) -> Result<f64> {
        Ok(self.access_bw * log_moments_of(self)?.0)
    }

    /// Variance of the per-UE access rate in (bits/s)^2.
    pub fn rate_variance(&self) -> Result<f64> {
        let (m1, m2) = log_moments_of(self)?;
        variance_from(self.access_bw, m1, m2)
    }

    pub fn statistics(&self) -> Result<AccessStatistics> {
        let (m1, m2) = log_moments_of(self)?;
        Ok(AccessStatistics {
            gamma_min: self.gamma_min,
            gamma_max: self.gamma_max,
            mean_sinr: self.mean_sinr()?,
            mean_rate: self.access_bw * m1,
            rate_variance: variance_from(self.access_bw, m1, m2)?,
            rate_min: self.access_bw * self.gamma_min.ln_1p() / LN_2,
            rate_max: self.access_bw * self.gamma_max.ln_1p() / LN_2,
        })
    }
}

fn variance_from(bw: f64, m1: f64, m2: f64) -> Result<f64> {
    let v = m2 - m1 * m1;
    if v < -1e-7 * m2 {
        return Err(Error::Numerical(format!("negative rate variance {v:.3e}")));
    }
    Ok(bw * bw * v.max(0.0))
}

impl SinrLaw for SinrDistribution {
    fn support(&self) -> (f64, f64) {
        (self.gamma_min, self.gamma_max)
    }

    /// CDF of the downlink SINR. Values outside the support clamp to 0 or 1.
    fn cdf(&self, gamma: f64) -> Result<f64> {
        if gamma <= self.gamma_min {
            return Ok(0.0);
        }
        if gamma >= self.gamma_max {
            return Ok(1.0);
        }
        let re = self.model.equivalent_radius();
        let integral = integrate(|r| arcsin_clamped(self.z(r, gamma)) * r, 0.0, re, CDF_TOL)?;
        Ok((0.5 - 2.0 * integral.value / (PI * re * re)).clamp(0.0, 1.0))
    }
}
