//! Propagation, fading, SINR and link adaptation.

mod fading;
mod marcum;
mod mcs;
mod propagation;
mod realization;

pub use fading::{
    rb_success_prob, rician_success_prob, FadingKind, FadingModel, Interferer, LinkStats,
    MonteCarloFading, RicianAnalytic,
};
pub use marcum::marcum_q;
pub use mcs::{
    sinr_to_cqi, McsEntry, McsTable, MAX_CQI, STANDARD_CSV, STANDARD_ENTRIES, TABLE_ROWS,
};
pub use propagation::{mean_sinr_db, path_loss_db, received_power_dbm, ChannelParams, Link};
pub use realization::{ChannelRealization, LinkDraws};
