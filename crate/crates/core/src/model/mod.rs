//! Scenario description, decision variables and the utility they earn.

mod allocation;
mod evaluate;
mod reliability;
mod types;

pub use allocation::{check_feasibility, Allocation, Constraint, Violation, RATE_TOLERANCE_BPS};
pub use evaluate::{evaluate, evaluate_with, system_utility, Evaluation, SuccessCache};
pub use reliability::{
    binomial_pmf, ps_success, ps_with_blocks, rb_count, rb_data_rate, required_blocks, utility,
    RESOURCE_ELEMENTS_PER_RB,
};
pub(crate) use types::validate_alphabet;
pub use types::{
    full_alphabet, BaseStation, MessageCatalog, MessageType, Position, Road, Scenario, Vehicle,
    CATALOG_JSON,
};
