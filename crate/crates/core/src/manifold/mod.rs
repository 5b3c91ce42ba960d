//! Charts, isometric actions, invariant metrics and Killing data.

mod chart;
mod killing;
mod sampling;
mod scenario;

pub use chart::{Chart, Coordinate, Region};
pub use killing::{
    action_jacobian, action_jacobian_fd, isotropy_split, killing_operator, killing_operator_fd,
    orbit_tensor, pullback_metric, KillingData, OrbitBundlePoint,
};
pub use sampling::{halton_points, SamplePlan};
pub use scenario::{
    scenario_info, DerivativeSource, Numerics, ParamSpec, Scenario, ScenarioInfo, CATALOGUE,
};
