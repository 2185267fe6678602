//! Physical system parameters and the constants derived from them.
//!
//! The on-disk format is a flat TOML table whose keys match the field names
//! below. Every key is optional; missing keys take the indoor office defaults.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::lambertian_order;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Downlink LED optical power in watts.
    pub led_optical_power_w: f64,
    /// Half-power semi-angle of the access LEDs in degrees.
    pub access_semiangle_deg: f64,
    /// Half-power semi-angle of the backhaul (IR) LEDs in degrees.
    pub backhaul_semiangle_deg: f64,
    /// Vertical separation between BS plane and receiver plane in meters.
    pub vertical_sep_m: f64,
    /// Hexagonal cell radius (center to vertex) in meters.
    pub cell_radius_m: f64,
    pub access_bandwidth_hz: f64,
    pub backhaul_bandwidth_hz: f64,
    pub fft_access: u32,
    /// Backhaul FFT length. `None` derives it from subchannel matching
    /// `B_a / N_a = B_b / N_b`.
    pub fft_backhaul: Option<u32>,
    /// Single-sided noise PSD in A^2/Hz.
    pub noise_psd: f64,
    pub pd_area_m2: f64,
    /// Photodiode responsivity in A/W.
    pub pd_responsivity: f64,
    /// DC bias scaling factor of DCO-OFDM.
    pub dc_bias_factor: f64,
    /// Electrical signal power per BS. `None` uses `(P_opt / alpha)^2`.
    pub access_elec_power: Option<f64>,
    /// Number of hexagonal lattice rings included in interference sums.
    pub interference_rings: u32,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            led_optical_power_w: 10.0,
            access_semiangle_deg: 40.0,
            backhaul_semiangle_deg: 3.1,
            vertical_sep_m: 2.25,
            cell_radius_m: 2.5,
            access_bandwidth_hz: 20e6,
            backhaul_bandwidth_hz: 60e6,
            fft_access: 1024,
            fft_backhaul: None,
            noise_psd: 5e-22,
            pd_area_m2: 1e-4,
            pd_responsivity: 0.6,
            dc_bias_factor: 3.0,
            access_elec_power: None,
            interference_rings: 10,
        }
    }
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical TOML rendering, used to tag outputs.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Sets `B_b = ratio * B_a` and re-derives the backhaul FFT length.
    pub fn with_bandwidth_ratio(mut self, ratio: f64) -> Self {
        self.backhaul_bandwidth_hz = ratio * self.access_bandwidth_hz;
        self.fft_backhaul = None;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("led_optical_power_w", self.led_optical_power_w),
            ("vertical_sep_m", self.vertical_sep_m),
            ("cell_radius_m", self.cell_radius_m),
            ("access_bandwidth_hz", self.access_bandwidth_hz),
            ("backhaul_bandwidth_hz", self.backhaul_bandwidth_hz),
            ("noise_psd", self.noise_psd),
            ("pd_area_m2", self.pd_area_m2),
            ("pd_responsivity", self.pd_responsivity),
            ("dc_bias_factor", self.dc_bias_factor),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        for (name, deg) in [
            ("access_semiangle_deg", self.access_semiangle_deg),
            ("backhaul_semiangle_deg", self.backhaul_semiangle_deg),
        ] {
            if !(deg > 0.0 && deg < 90.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 90), got {deg}"
                )));
            }
        }
        if self.fft_access <= 2 {
            return Err(Error::InvalidConfig("fft_access must exceed 2".into()));
        }
        if let Some(p) = self.access_elec_power {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "access_elec_power must be positive, got {p}"
                )));
            }
        }
        if self.interference_rings == 0 {
            return Err(Error::InvalidConfig(
                "interference_rings must be at least 1".into(),
            ));
        }
        if self.fft_backhaul_len() <= 2 {
            return Err(Error::InvalidConfig(
                "backhaul FFT length must exceed 2".into(),
            ));
        }
        Ok(())
    }

    pub fn fft_backhaul_len(&self) -> u32 {
        self.fft_backhaul.unwrap_or_else(|| {
            (self.fft_access as f64 * self.backhaul_bandwidth_hz / self.access_bandwidth_hz)
                .round() as u32
        })
    }

    /// Subcarrier utilization factor of the access system, `(N_a - 2) / N_a`.
    pub fn xi_access(&self) -> f64 {
        let n = self.fft_access as f64;
        (n - 2.0) / n
    }

    pub fn xi_backhaul(&self) -> f64 {
        let n = self.fft_backhaul_len() as f64;
        (n - 2.0) / n
    }

    pub fn access_lambertian_order(&self) -> f64 {
        lambertian_order(self.access_semiangle_deg).expect("validated semi-angle")
    }

    pub fn backhaul_lambertian_order(&self) -> f64 {
        lambertian_order(self.backhaul_semiangle_deg).expect("validated semi-angle")
    }

    pub fn access_power(&self) -> f64 {
        self.access_elec_power.unwrap_or_else(|| {
            let rms = self.led_optical_power_w / self.dc_bias_factor;
            rms * rms
        })
    }

    /// Radius of the disc with the same area as the hexagonal cell.
    pub fn equivalent_radius(&self) -> f64 {
        self.cell_radius_m * (3.0 * 3f64.sqrt() / (2.0 * PI)).sqrt()
    }

    /// Center spacing of adjacent base stations.
    pub fn bs_spacing(&self) -> f64 {
        3f64.sqrt() * self.cell_radius_m
    }

    /// Normalized noise term of the downlink SINR.
    pub fn omega(&self) -> f64 {
        let m = self.access_lambertian_order();
        let h = self.vertical_sep_m;
        let gain = (m + 1.0) * h.powf(m + 1.0) * self.pd_area_m2 * self.pd_responsivity;
        4.0 * PI * PI * self.noise_psd * self.access_bandwidth_hz * self.xi_access()
            / (gain * gain * self.access_power())
    }

    /// Backhaul SNR per subcarrier at unit power ratio.
    pub fn backhaul_snr_unit(&self) -> f64 {
        let l = self.backhaul_lambertian_order();
        let gain = (l + 1.0) * self.pd_area_m2 * self.pd_responsivity;
        let r = self.cell_radius_m;
        let xi_b = self.xi_backhaul();
        gain * gain * self.access_power()
            / (72.0 * PI * PI * r.powi(4) * self.noise_psd * self.backhaul_bandwidth_hz * xi_b * xi_b)
    }

    /// Effective backhaul-to-access bandwidth ratio.
    pub fn zeta(&self) -> f64 {
        self.xi_backhaul() * self.backhaul_bandwidth_hz
            / (self.xi_access() * self.access_bandwidth_hz)
    }

    /// Effective access bandwidth `xi_a * B_a`.
    pub fn access_effective_bw(&self) -> f64 {
        self.xi_access() * self.access_bandwidth_hz
    }

    pub fn backhaul_effective_bw(&self) -> f64 {
        self.xi_backhaul() * self.backhaul_bandwidth_hz
    }
}
