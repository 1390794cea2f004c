use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::fading::{Interferer, LinkStats};
use super::propagation::{received_power_dbm, ChannelParams, Link};
use crate::error::{Error, Result};
use crate::model::{BaseStation, Vehicle};

/// Per-link random state drawn once per replication: shadowing and LOS/NLOS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDraws {
    /// `[bs][vehicle]`, dB, subtracted from the received power.
    pub shadowing_db: Vec<Vec<f64>>,
    /// `[bs][vehicle]` Rice factor: `params.rician_k` for LOS links, 0 otherwise.
    pub k_factor: Vec<Vec<f64>>,
}

impl LinkDraws {
    pub fn sample<R: Rng + ?Sized>(
        n_bs: usize,
        n_vehicles: usize,
        params: &ChannelParams,
        rng: &mut R,
    ) -> Result<Self> {
        let sigma = if params.shadowing_enabled {
            params.shadowing_sigma_db
        } else {
            0.0
        };
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::domain(e.to_string()))?;
        let mut shadowing_db = vec![vec![0.0; n_vehicles]; n_bs];
        let mut k_factor = vec![vec![0.0; n_vehicles]; n_bs];
        for n in 0..n_bs {
            for v in 0..n_vehicles {
                shadowing_db[n][v] = normal.sample(rng);
                let los = rng.random_bool(params.los_probability);
                k_factor[n][v] = if los { params.rician_k } else { 0.0 };
            }
        }
        Ok(Self {
            shadowing_db,
            k_factor,
        })
    }
}

/// Mean SINR and fading statistics of every BS→vehicle link at one instant.
///
/// Immutable once built; mobility produces a fresh realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    /// `[bs][vehicle]`, dB.
    pub sinr_db: Vec<Vec<f64>>,
    pub shadowing_db: Vec<Vec<f64>>,
    pub k_factor: Vec<Vec<f64>>,
    links: Vec<Vec<LinkStats>>,
}

impl ChannelRealization {
    pub fn compute(
        base_stations: &[BaseStation],
        vehicles: &[Vehicle],
        params: &ChannelParams,
        draws: &LinkDraws,
    ) -> Result<Self> {
        let n_bs = base_stations.len();
        let n_veh = vehicles.len();
        if draws.shadowing_db.len() != n_bs || draws.shadowing_db.iter().any(|r| r.len() != n_veh) {
            return Err(Error::Dimension(format!(
                "link draws do not cover {n_bs} x {n_veh} links"
            )));
        }
        let noise = params.noise_power_dbm();
        let mut rx = vec![vec![0.0; n_veh]; n_bs];
        for (n, bs) in base_stations.iter().enumerate() {
            for (v, veh) in vehicles.iter().enumerate() {
                let link = Link {
                    bs,
                    shadowing_db: draws.shadowing_db[n][v],
                };
                rx[n][v] = received_power_dbm(link, veh, params)?;
            }
        }
        let mut links = Vec::with_capacity(n_bs);
        let mut sinr_db = vec![vec![0.0; n_veh]; n_bs];
        for n in 0..n_bs {
            let mut row = Vec::with_capacity(n_veh);
            for v in 0..n_veh {
                let mut others: Vec<usize> = (0..n_bs).filter(|&m| m != n).collect();
                others.sort_by(|&a, &b| rx[b][v].total_cmp(&rx[a][v]).then(a.cmp(&b)));
                others.truncate(params.interferer_count);
                let interferers = others
                    .into_iter()
                    .map(|m| Interferer {
                        mean_inr_db: rx[m][v] - noise,
                        k_factor: draws.k_factor[m][v],
                    })
                    .collect();
                let stats = LinkStats {
                    mean_snr_db: rx[n][v] - noise,
                    k_factor: draws.k_factor[n][v],
                    interferers,
                };
                sinr_db[n][v] = stats.mean_sinr_db();
                row.push(stats);
            }
            links.push(row);
        }
        Ok(Self {
            sinr_db,
            shadowing_db: draws.shadowing_db.clone(),
            k_factor: draws.k_factor.clone(),
            links,
        })
    }

    /// Noise-limited links with the given mean SINR and one Rice factor.
    pub fn from_sinr(sinr_db: Vec<Vec<f64>>, k_factor: f64) -> Self {
        let k = sinr_db
            .iter()
            .map(|row| vec![k_factor; row.len()])
            .collect::<Vec<_>>();
        Self::from_sinr_and_k(sinr_db, k)
    }

    pub fn from_sinr_and_k(sinr_db: Vec<Vec<f64>>, k_factor: Vec<Vec<f64>>) -> Self {
        let links = sinr_db
            .iter()
            .zip(&k_factor)
            .map(|(srow, krow)| {
                srow.iter()
                    .zip(krow)
                    .map(|(&s, &k)| LinkStats::noise_limited(s, k))
                    .collect()
            })
            .collect();
        let shadowing_db = sinr_db.iter().map(|r| vec![0.0; r.len()]).collect();
        Self {
            sinr_db,
            shadowing_db,
            k_factor,
            links,
        }
    }

    pub fn n_bs(&self) -> usize {
        self.sinr_db.len()
    }

    pub fn n_vehicles(&self) -> usize {
        self.sinr_db.first().map_or(0, Vec::len)
    }

    pub fn link(&self, bs: usize, vehicle: usize) -> &LinkStats {
        &self.links[bs][vehicle]
    }

    /// Strongest BS for `vehicle`; ties go to the lowest index.
    pub fn best_bs(&self, vehicle: usize) -> usize {
        let mut best = 0;
        for n in 1..self.n_bs() {
            if self.sinr_db[n][vehicle] > self.sinr_db[best][vehicle] {
                best = n;
            }
        }
        best
    }
}
