use serde::{Deserialize, Serialize};

use super::fading::FadingKind;
use crate::error::{Error, Result};
use crate::model::{BaseStation, Vehicle};

/// Radio environment shared by every link in a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub shadowing_sigma_db: f64,
    pub shadowing_enabled: bool,
    /// Rice factor of line-of-sight links; non-line-of-sight links are Rayleigh.
    pub rician_k: f64,
    pub los_probability: f64,
    pub noise_density_dbm_hz: f64,
    pub bandwidth_hz: f64,
    /// Co-channel base stations counted as interferers on every link.
    pub interferer_count: usize,
    pub fading: FadingKind,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_ghz: 5.9,
            tx_power_dbm: 23.0,
            antenna_gain_dbi: 1.0,
            shadowing_sigma_db: 8.2,
            shadowing_enabled: true,
            rician_k: 1.0,
            los_probability: 0.5,
            noise_density_dbm_hz: -174.0,
            bandwidth_hz: 20e6,
            interferer_count: 0,
            fading: FadingKind::Analytic,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("channel.carrier_ghz", self.carrier_ghz),
            ("channel.tx_power_dbm", self.tx_power_dbm),
            ("channel.antenna_gain_dbi", self.antenna_gain_dbi),
            ("channel.shadowing_sigma_db", self.shadowing_sigma_db),
            ("channel.noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("channel.bandwidth_hz", self.bandwidth_hz),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(Error::config(field, "must be finite"));
            }
        }
        if self.carrier_ghz <= 0.0 {
            return Err(Error::config("channel.carrier_ghz", "must be positive"));
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(Error::config("channel.bandwidth_hz", "must be positive"));
        }
        if self.shadowing_sigma_db < 0.0 {
            return Err(Error::config(
                "channel.shadowing_sigma_db",
                "must be non-negative",
            ));
        }
        if !(self.rician_k >= 0.0 && self.rician_k.is_finite()) {
            return Err(Error::config("channel.rician_k", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.los_probability) {
            return Err(Error::config(
                "channel.los_probability",
                "must lie in [0, 1]",
            ));
        }
        if let FadingKind::MonteCarlo { draws, .. } = self.fading {
            if draws == 0 {
                return Err(Error::config("channel.fading.draws", "must be positive"));
            }
        }
        Ok(())
    }

    /// Thermal noise over the full bandwidth, dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_density_dbm_hz + 10.0 * self.bandwidth_hz.log10()
    }
}

/// UMi street-canyon path loss with the carrier in GHz and distance in meters.
pub fn path_loss_db(distance_m: f64, carrier_ghz: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::domain(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    if !(carrier_ghz > 0.0) {
        return Err(Error::domain(format!(
            "carrier must be positive, got {carrier_ghz}"
        )));
    }
    Ok(32.4 + 20.0 * carrier_ghz.log10() + 31.9 * distance_m.log10())
}

/// One base station as seen by a vehicle, with the frozen shadowing of that link.
#[derive(Debug, Clone, Copy)]
pub struct Link<'a> {
    pub bs: &'a BaseStation,
    pub shadowing_db: f64,
}

pub fn received_power_dbm(
    link: Link<'_>,
    vehicle: &Vehicle,
    params: &ChannelParams,
) -> Result<f64> {
    let d = link.bs.position.distance(&vehicle.position);
    let pl = path_loss_db(d, params.carrier_ghz)?;
    Ok(params.tx_power_dbm + params.antenna_gain_dbi - pl - link.shadowing_db)
}

/// Mean SINR (dB) at `vehicle` from `server`, summing powers in linear units.
pub fn mean_sinr_db(
    server: Link<'_>,
    vehicle: &Vehicle,
    params: &ChannelParams,
    interferers: &[Link<'_>],
) -> Result<f64> {
    let signal = dbm_to_mw(received_power_dbm(server, vehicle, params)?);
    let mut denom = dbm_to_mw(params.noise_power_dbm());
    for &i in interferers {
        denom += dbm_to_mw(received_power_dbm(i, vehicle, params)?);
    }
    Ok(10.0 * (signal / denom).log10())
}

pub(crate) fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Position;

    fn bs_at(x: f64, y: f64) -> BaseStation {
        BaseStation {
            position: Position::new(x, y),
            rb_budget: 10,
        }
    }

    fn vehicle_at(x: f64, y: f64) -> Vehicle {
        Vehicle {
            position: Position::new(x, y),
            speed_kmh: 0.0,
            interest: vec![],
        }
    }

    #[test]
    fn path_loss_examples() {
        assert!((path_loss_db(1.0, 1.0).unwrap() - 32.4).abs() < 1e-12);
        assert!((path_loss_db(10.0, 1.0).unwrap() - 64.3).abs() < 1e-12);
        // direct evaluation: 32.4 + 20 log10(5.9) + 31.9 log10(500)
        assert!((path_loss_db(500.0, 5.9).unwrap() - 133.914_183_371_161_87).abs() < 1e-9);
    }

    #[test]
    fn path_loss_rejects_bad_distance() {
        assert!(path_loss_db(0.0, 5.9).is_err());
        assert!(path_loss_db(-3.0, 5.9).is_err());
    }

    #[test]
    fn noise_only_sinr_is_snr() {
        let p = ChannelParams::default();
        let bs = bs_at(0.0, 0.0);
        let v = vehicle_at(0.0, 100.0);
        let link = Link {
            bs: &bs,
            shadowing_db: 0.0,
        };
        let sinr = mean_sinr_db(link, &v, &p, &[]).unwrap();
        let snr = received_power_dbm(link, &v, &p).unwrap() - p.noise_power_dbm();
        assert!((sinr - snr).abs() < 1e-9);
        // independent spreadsheet link budget: 23 + 1 - 111.61704 - (-100.98970)
        assert!((sinr - 13.372_659_810_517_305).abs() < 1e-9);
    }

    #[test]
    fn equal_interferer_pushes_sinr_below_zero() {
        let p = ChannelParams {
            noise_density_dbm_hz: -300.0,
            ..ChannelParams::default()
        };
        let a = bs_at(-100.0, 0.0);
        let b = bs_at(100.0, 0.0);
        let v = vehicle_at(0.0, 0.0);
        let sinr = mean_sinr_db(
            Link {
                bs: &a,
                shadowing_db: 0.0,
            },
            &v,
            &p,
            &[Link {
                bs: &b,
                shadowing_db: 0.0,
            }],
        )
        .unwrap();
        assert!(sinr <= 0.0 && sinr > -1e-6);
    }
}
