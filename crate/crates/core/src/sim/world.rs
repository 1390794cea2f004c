//! Scenario generation and vehicle mobility.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Deployment, ScenarioConfig};
use crate::channel::{ChannelRealization, LinkDraws};
use crate::error::Result;
use crate::model::{BaseStation, Position, Road, Scenario, Vehicle};

/// A scenario together with its frozen link draws and current channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub scenario: Scenario,
    pub draws: LinkDraws,
    pub channel: ChannelRealization,
}

impl World {
    pub fn recompute_channel(&mut self) -> Result<()> {
        self.channel = ChannelRealization::compute(
            &self.scenario.base_stations,
            &self.scenario.vehicles,
            &self.scenario.params,
            &self.draws,
        )?;
        Ok(())
    }
}

/// Draw BS sites, vehicles, interests and per-link shadowing/LOS state.
pub fn generate_scenario<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<World> {
    config.validate()?;
    let spacing = config.spacing();
    let road = Road {
        x_start: -spacing / 2.0,
        length_m: config.n_bs as f64 * spacing,
        lateral_offset_m: config.lateral_offset_m,
    };
    let base_stations = (0..config.n_bs)
        .map(|i| {
            let x = match config.deployment {
                Deployment::FixedSpacing => i as f64 * spacing,
                Deployment::Binomial => road.x_start + rng.random::<f64>() * road.length_m,
            };
            BaseStation {
                position: Position::new(x, 0.0),
                rb_budget: config.rb_budget,
            }
        })
        .collect();
    let messages = config.resolved_messages()?;
    let [lo, hi] = config.speed_band_kmh;
    let vehicles = (0..config.n_vehicles)
        .map(|_| {
            let x = road.x_start + rng.random::<f64>() * road.length_m;
            let speed_kmh = lo + rng.random::<f64>() * (hi - lo);
            let interest = (0..messages.len())
                .map(|_| rng.random_bool(config.interest_probability))
                .collect();
            Vehicle {
                position: Position::new(x, road.lateral_offset_m),
                speed_kmh,
                interest,
            }
        })
        .collect();
    let scenario = Scenario {
        base_stations,
        vehicles,
        messages,
        table: config.load_table()?,
        params: config.channel.clone(),
        slots_per_second: config.slots_per_second,
        cqi_alphabet: config.cqi_alphabet.clone(),
        road,
    };
    scenario.validate()?;
    let draws = LinkDraws::sample(
        scenario.n_bs(),
        scenario.n_vehicles(),
        &scenario.params,
        rng,
    )?;
    let channel = ChannelRealization::compute(
        &scenario.base_stations,
        &scenario.vehicles,
        &scenario.params,
        &draws,
    )?;
    Ok(World {
        scenario,
        draws,
        channel,
    })
}

/// Outcome of one mobility step.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MobilityStep {
    /// `(vehicle, old strongest BS, new strongest BS)` for every argmax flip.
    pub handoffs: Vec<(usize, usize, usize)>,
}

/// Advance every vehicle by `speed · dt` along the road (wrapping), refresh the
/// channel and report vehicles whose strongest BS changed.
pub fn step_mobility(world: &mut World, dt_slots: u32) -> Result<MobilityStep> {
    let before: Vec<usize> = (0..world.scenario.n_vehicles())
        .map(|v| world.channel.best_bs(v))
        .collect();
    let dt_s = f64::from(dt_slots) / f64::from(world.scenario.slots_per_second);
    let road = world.scenario.road;
    for veh in &mut world.scenario.vehicles {
        let dx = veh.speed_kmh / 3.6 * dt_s;
        veh.position.x = road.wrap(veh.position.x + dx);
    }
    world.recompute_channel()?;
    let handoffs = before
        .into_iter()
        .enumerate()
        .filter_map(|(v, old)| {
            let new = world.channel.best_bs(v);
            (new != old).then_some((v, old, new))
        })
        .collect();
    Ok(MobilityStep { handoffs })
}
