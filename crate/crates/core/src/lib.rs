//! Market area analysis toolkit.
//!
//! The workflow mirrors a typical market study: build an [`InteractionMatrix`]
//! from customer origins and supply locations, attach transport costs, then
//! run the model stages (utilities, probabilities, flows, market areas),
//! estimate parameters from observed data (MCI log-centering regression or
//! nonlinear calibration), or derive accessibility measures (Hansen, 2SFCA).

pub mod access;
pub mod calibrate;
pub mod decay;
pub mod error;
pub mod geo;
pub mod huff;
pub mod mci;
pub mod model;

pub use access::{fca2s, hansen, AccessMethod, AccessibilityResult};
pub use calibrate::{
    build_objective, fit_huff, gof_metrics, simplex_minimize, FitConfig, FitResult, GOFMetrics,
    HuffObjective, ObservedData, SimplexResult,
};
pub use decay::{DecayKind, DecaySpec};
pub use error::{Error, Result};
pub use geo::{distance_matrix, haversine_km, CostMatrix, CostUnit, GeoPoint, EARTH_RADIUS_KM};
pub use huff::{
    cd_probabilities, clustering_indicator, flows, inter_location_costs, market_areas,
    probabilities, utilities, CDParams, HuffParams, MarketAreas,
};
pub use mci::{
    log_centering_transform, mci_fit, mci_predict, MciDesign, MciFit, MciRow, ZeroSharePolicy,
    TRANSPORT_COST_ATTRIBUTE,
};
pub use model::{
    CostSource, CustomerOrigin, InteractionMatrix, PairView, SupplyLocation, DEFAULT_COST_FLOOR,
};
