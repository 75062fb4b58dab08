//! Free-space propagation with log-normal shadowing, SINR and jam sensing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Watts, shared by every radiating node (blue and red).
    pub tx_power: f64,
    /// Meters.
    pub carrier_wavelength: f64,
    /// Standard deviation of the shadowing term, dB.
    pub shadowing_sigma_db: f64,
    /// Watts.
    pub noise_power: f64,
    /// Decoding threshold tau, dB.
    pub sinr_threshold_db: f64,
    /// Sensed jamming power above which a node declares itself jammed, watts.
    pub jam_detect_threshold: f64,
}

impl ChannelParams {
    /// Defaults tied to a communication range: -100 dBm noise, and a jam
    /// detection threshold equal to the unshadowed power of one jammer at
    /// twice that range.
    pub fn for_range(range: f64) -> Self {
        let tx_power = 1.0;
        let carrier_wavelength = 0.125;
        let sinr_threshold_db = 5.0;
        let path_gain = |d: f64| (carrier_wavelength / (4.0 * PI * d)).powi(2);
        Self {
            tx_power,
            carrier_wavelength,
            shadowing_sigma_db: 8.0,
            noise_power: dbm_to_watts(-100.0),
            sinr_threshold_db,
            jam_detect_threshold: tx_power * path_gain(2.0 * range),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power", self.tx_power),
            ("carrier_wavelength", self.carrier_wavelength),
            ("noise_power", self.noise_power),
            ("jam_detect_threshold", self.jam_detect_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("channel.{name} must be positive, got {v}")));
            }
        }
        if !(self.shadowing_sigma_db >= 0.0) {
            return Err(Error::Config("channel.shadowing_sigma_db must be >= 0".into()));
        }
        Ok(())
    }

    pub fn sinr_threshold_linear(&self) -> f64 {
        db_to_linear(self.sinr_threshold_db)
    }

    /// Unshadowed received power at `distance`.
    pub fn mean_received_power(&self, distance: f64) -> f64 {
        self.tx_power * (self.carrier_wavelength / (4.0 * PI * distance)).powi(2)
    }

    /// Distance at which the unshadowed received power equals `power`.
    pub fn range_for_power(&self, power: f64) -> f64 {
        self.carrier_wavelength / (4.0 * PI) * (self.tx_power / power).sqrt()
    }

    /// Distance at which one transmitter's unshadowed power reaches the jam
    /// detection threshold.
    pub fn jam_range(&self) -> f64 {
        self.range_for_power(self.jam_detect_threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSample {
    pub rx_power: f64,
    pub interference_power: f64,
    pub sinr_db: f64,
}

impl LinkSample {
    pub fn new(rx_power: f64, interference_power: f64, noise_power: f64) -> Self {
        Self {
            rx_power,
            interference_power,
            sinr_db: linear_to_db(rx_power / (interference_power + noise_power)),
        }
    }

    pub fn decodes(&self, params: &ChannelParams) -> bool {
        self.sinr_db > params.sinr_threshold_db
    }
}

/// `tx_power * (wavelength / (4 pi d))^2 * 10^(shadow_db / 10)`.
pub fn received_power(params: &ChannelParams, distance: f64, shadow_db: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::DegenerateGeometry("received power at zero distance"));
    }
    Ok(params.mean_received_power(distance) * db_to_linear(shadow_db))
}

/// SINR in dB.
pub fn sinr(signal_w: f64, interferers_w: &[f64], noise_w: f64) -> f64 {
    let interference: f64 = interferers_w.iter().sum();
    linear_to_db(signal_w / (interference + noise_w))
}

pub fn is_jammed(total_received_interference: f64, params: &ChannelParams) -> bool {
    total_received_interference > params.jam_detect_threshold
}
