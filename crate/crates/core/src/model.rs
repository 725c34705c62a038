//! Customer origins, supply locations, and the origin-destination
//! interaction matrix every analysis consumes.
//!
//! The matrix is the full I x J cross product in origin-major order. Model
//! stages never mutate: each stage returns an enriched copy, and calling a
//! later stage before its prerequisite is a state error rather than an
//! implicit computation.

use std::collections::HashSet;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::geo::{self, CostMatrix, CostUnit, GeoPoint};

/// Default lower bound applied to transport costs, in the matrix's unit.
///
/// Power decay `t^-lambda` is singular at t = 0, which occurs whenever an
/// origin coincides with a location; the floor keeps utilities bounded.
pub const DEFAULT_COST_FLOOR: f64 = 0.1;

/// A demand point: place plus customer or expenditure potential `C_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomerOrigin {
    point: GeoPoint,
    demand: f64,
}

impl CustomerOrigin {
    /// Demand may be zero (an origin with no purchasing power) but not
    /// negative.
    pub fn new(point: GeoPoint, demand: f64) -> Result<Self> {
        if !demand.is_finite() || demand < 0.0 {
            return Err(Error::InvalidValue(format!(
                "demand must be >= 0, got {demand} for origin {}",
                point.id()
            )));
        }
        Ok(Self { point, demand })
    }

    pub fn point(&self) -> &GeoPoint {
        &self.point
    }

    pub fn id(&self) -> &str {
        self.point.id()
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }
}

/// A supply point: place, attraction `A_j`, and optional named attributes
/// `A_hj` used by the MCI model.
#[derive(Debug, Clone, PartialEq)]
pub struct SupplyLocation {
    point: GeoPoint,
    attraction: f64,
    attributes: IndexMap<String, f64>,
}

impl SupplyLocation {
    /// Attraction must be strictly positive: the models raise it to a power
    /// and the MCI transform takes its logarithm.
    pub fn new(point: GeoPoint, attraction: f64) -> Result<Self> {
        if !attraction.is_finite() || attraction <= 0.0 {
            return Err(Error::InvalidValue(format!(
                "attraction must be > 0, got {attraction} for location {}",
                point.id()
            )));
        }
        Ok(Self {
            point,
            attraction,
            attributes: IndexMap::new(),
        })
    }

    /// Adds a named attribute. Values must be strictly positive so their
    /// logarithms exist.
    pub fn with_attribute(mut self, name: impl Into<String>, value: f64) -> Result<Self> {
        let name = name.into();
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidValue(format!(
                "attribute {name} must be > 0, got {value} for location {}",
                self.point.id()
            )));
        }
        self.attributes.insert(name, value);
        Ok(self)
    }

    pub fn point(&self) -> &GeoPoint {
        &self.point
    }

    pub fn id(&self) -> &str {
        self.point.id()
    }

    pub fn attraction(&self) -> f64 {
        self.attraction
    }

    pub fn attributes(&self) -> &IndexMap<String, f64> {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Option<f64> {
        self.attributes.get(name).copied()
    }
}

/// Where transport costs come from.
#[derive(Debug, Clone)]
pub enum CostSource {
    /// Great-circle kilometers computed from the entity coordinates.
    Haversine,
    /// A user-provided I x J matrix carrying its own unit, e.g. a travel-time
    /// matrix fetched from a routing service.
    External(CostMatrix),
}

/// One origin-destination pair with whatever stage values are set.
#[derive(Debug, Clone, Copy)]
pub struct PairView<'a> {
    pub origin: &'a CustomerOrigin,
    pub location: &'a SupplyLocation,
    pub transport_cost: Option<f64>,
    pub utility: Option<f64>,
    pub probability: Option<f64>,
    pub flow: Option<f64>,
    pub observed_probability: Option<f64>,
    pub observed_flow: Option<f64>,
}

/// The full I x J cross product of origins and locations with per-pair
/// transport costs, utilities, probabilities, and flows.
///
/// Pair vectors are origin-major: the pair (i, j) lives at `i * J + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    origins: Vec<CustomerOrigin>,
    locations: Vec<SupplyLocation>,
    cost_unit: Option<CostUnit>,
    costs: Option<Vec<f64>>,
    utilities: Option<Vec<f64>>,
    probabilities: Option<Vec<f64>>,
    flows: Option<Vec<f64>>,
    observed_probabilities: Option<Vec<f64>>,
    observed_flows: Option<Vec<f64>>,
}

impl InteractionMatrix {
    /// Builds the cross product with all model fields unset. Both lists must
    /// be non-empty and ids unique within each list.
    pub fn new(origins: Vec<CustomerOrigin>, locations: Vec<SupplyLocation>) -> Result<Self> {
        if origins.is_empty() {
            return Err(Error::Dimension(
                "at least one customer origin is required".into(),
            ));
        }
        if locations.is_empty() {
            return Err(Error::Dimension(
                "at least one supply location is required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for origin in &origins {
            if !seen.insert(origin.id()) {
                return Err(Error::DuplicateId(origin.id().to_string()));
            }
        }
        seen.clear();
        for location in &locations {
            if !seen.insert(location.id()) {
                return Err(Error::DuplicateId(location.id().to_string()));
            }
        }
        Ok(Self {
            origins,
            locations,
            cost_unit: None,
            costs: None,
            utilities: None,
            probabilities: None,
            flows: None,
            observed_probabilities: None,
            observed_flows: None,
        })
    }

    pub fn origin_count(&self) -> usize {
        self.origins.len()
    }

    pub fn location_count(&self) -> usize {
        self.locations.len()
    }

    pub fn pair_count(&self) -> usize {
        self.origins.len() * self.locations.len()
    }

    pub fn origins(&self) -> &[CustomerOrigin] {
        &self.origins
    }

    pub fn locations(&self) -> &[SupplyLocation] {
        &self.locations
    }

    /// Index of the pair (origin i, location j) in the pair vectors.
    pub fn pair_index(&self, origin: usize, location: usize) -> usize {
        origin * self.locations.len() + location
    }

    pub fn cost_unit(&self) -> Option<CostUnit> {
        self.cost_unit
    }

    pub fn costs(&self) -> Option<&[f64]> {
        self.costs.as_deref()
    }

    pub fn utilities(&self) -> Option<&[f64]> {
        self.utilities.as_deref()
    }

    pub fn probabilities(&self) -> Option<&[f64]> {
        self.probabilities.as_deref()
    }

    pub fn flows(&self) -> Option<&[f64]> {
        self.flows.as_deref()
    }

    pub fn observed_probabilities(&self) -> Option<&[f64]> {
        self.observed_probabilities.as_deref()
    }

    pub fn observed_flows(&self) -> Option<&[f64]> {
        self.observed_flows.as_deref()
    }

    pub fn cost(&self, origin: usize, location: usize) -> Option<f64> {
        self.costs.as_ref().map(|v| v[self.pair_index(origin, location)])
    }

    pub fn utility(&self, origin: usize, location: usize) -> Option<f64> {
        self.utilities
            .as_ref()
            .map(|v| v[self.pair_index(origin, location)])
    }

    pub fn probability(&self, origin: usize, location: usize) -> Option<f64> {
        self.probabilities
            .as_ref()
            .map(|v| v[self.pair_index(origin, location)])
    }

    pub fn flow(&self, origin: usize, location: usize) -> Option<f64> {
        self.flows
            .as_ref()
            .map(|v| v[self.pair_index(origin, location)])
    }

    /// Iterates the pairs in origin-major order.
    pub fn pairs(&self) -> impl Iterator<Item = PairView<'_>> + '_ {
        let cols = self.locations.len();
        (0..self.pair_count()).map(move |idx| {
            let (i, j) = (idx / cols, idx % cols);
            PairView {
                origin: &self.origins[i],
                location: &self.locations[j],
                transport_cost: self.costs.as_ref().map(|v| v[idx]),
                utility: self.utilities.as_ref().map(|v| v[idx]),
                probability: self.probabilities.as_ref().map(|v| v[idx]),
                flow: self.flows.as_ref().map(|v| v[idx]),
                observed_probability: self.observed_probabilities.as_ref().map(|v| v[idx]),
                observed_flow: self.observed_flows.as_ref().map(|v| v[idx]),
            }
        })
    }

    /// Populates transport costs from a source, applying the cost floor:
    /// every value below `cost_floor` is raised to it.
    pub fn with_transport_costs(&self, source: &CostSource, cost_floor: f64) -> Result<Self> {
        if !cost_floor.is_finite() || cost_floor < 0.0 {
            return Err(Error::InvalidValue(format!(
                "cost floor must be a non-negative number, got {cost_floor}"
            )));
        }
        let (raw, unit) = match source {
            CostSource::Haversine => {
                let origin_points: Vec<GeoPoint> =
                    self.origins.iter().map(|o| o.point().clone()).collect();
                let location_points: Vec<GeoPoint> =
                    self.locations.iter().map(|l| l.point().clone()).collect();
                let m = geo::distance_matrix(&origin_points, &location_points)?;
                (m.values().to_vec(), CostUnit::Kilometers)
            }
            CostSource::External(m) => {
                if m.rows() != self.origin_count() || m.cols() != self.location_count() {
                    return Err(Error::Dimension(format!(
                        "external cost matrix is {}x{}, interaction matrix needs {}x{}",
                        m.rows(),
                        m.cols(),
                        self.origin_count(),
                        self.location_count()
                    )));
                }
                (m.values().to_vec(), m.unit())
            }
        };
        let costs = raw
            .into_iter()
            .map(|v| if v < cost_floor { cost_floor } else { v })
            .collect();
        let mut next = self.clone();
        next.costs = Some(costs);
        next.cost_unit = Some(unit);
        Ok(next)
    }

    /// Attaches observed market shares per pair (origin-major, length I x J).
    ///
    /// Shares must lie in [0, 1]. Within each origin the shares must sum to
    /// one within 1e-6, except that an all-zero row is accepted (such origins
    /// carry no information and are dropped by the MCI transform).
    pub fn with_observed_probabilities(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.pair_count() {
            return Err(Error::Dimension(format!(
                "observed shares need {} values, got {}",
                self.pair_count(),
                values.len()
            )));
        }
        for &v in &values {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidValue(format!(
                    "observed shares must lie in [0, 1], got {v}"
                )));
            }
        }
        let cols = self.locations.len();
        for (i, origin) in self.origins.iter().enumerate() {
            let sum: f64 = values[i * cols..(i + 1) * cols].iter().sum();
            if sum != 0.0 && (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidValue(format!(
                    "observed shares for origin {} sum to {sum}, expected 1",
                    origin.id()
                )));
            }
        }
        let mut next = self.clone();
        next.observed_probabilities = Some(values);
        Ok(next)
    }

    /// Attaches observed flows per pair (origin-major, length I x J).
    pub fn with_observed_flows(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.pair_count() {
            return Err(Error::Dimension(format!(
                "observed flows need {} values, got {}",
                self.pair_count(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!(
                "observed flows must be >= 0, got {v}"
            )));
        }
        let mut next = self.clone();
        next.observed_flows = Some(values);
        Ok(next)
    }

    pub(crate) fn replacing_utilities(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.pair_count());
        let mut next = self.clone();
        next.utilities = Some(values);
        next
    }

    pub(crate) fn replacing_probabilities(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.pair_count());
        let mut next = self.clone();
        next.probabilities = Some(values);
        next
    }

    pub(crate) fn replacing_flows(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.pair_count());
        let mut next = self.clone();
        next.flows = Some(values);
        next
    }
}
