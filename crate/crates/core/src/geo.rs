//! Geodesic primitives: validated points and great-circle cost matrices.
//!
//! Distances use the haversine formula on a sphere with the IUGG mean Earth
//! radius. These are the default transport costs; travel-time matrices from
//! an external routing service are produced by the I/O layer and enter the
//! model as a [`CostMatrix`] tagged with [`CostUnit::Minutes`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// IUGG mean Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// A named WGS84 point.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPoint {
    id: String,
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    /// Validates and builds a point: latitude in [-90, 90], longitude in
    /// [-180, 180], non-empty id.
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidValue("point id must be non-empty".into()));
        }
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::InvalidValue(format!(
                "latitude {lat} out of [-90, 90] for id {id}"
            )));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidValue(format!(
                "longitude {lon} out of [-180, 180] for id {id}"
            )));
        }
        Ok(Self { id, lat, lon })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Great-circle distance in kilometers between two points.
///
/// Symmetric, non-negative, and zero only for identical coordinates. The
/// haversine argument is clamped into [0, 1] so rounding near antipodal
/// pairs cannot leave the arcsine domain.
pub fn haversine_km(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    let half_dlat = (lat_b - lat_a) / 2.0;
    let half_dlon = (b.lon - a.lon).to_radians() / 2.0;

    let h = half_dlat.sin().powi(2) + lat_a.cos() * lat_b.cos() * half_dlon.sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Unit carried by transport costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostUnit {
    Kilometers,
    Minutes,
}

impl fmt::Display for CostUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostUnit::Kilometers => write!(f, "km"),
            CostUnit::Minutes => write!(f, "min"),
        }
    }
}

impl FromStr for CostUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "km" | "kilometers" => Ok(CostUnit::Kilometers),
            "min" | "minutes" => Ok(CostUnit::Minutes),
            other => Err(Error::InvalidValue(format!(
                "unknown cost unit {other:?} (expected km or min)"
            ))),
        }
    }
}

/// Dense row-major origin x destination cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    unit: CostUnit,
    values: Vec<f64>,
}

impl CostMatrix {
    /// Builds a matrix from row-major values. Costs must be non-negative and
    /// not NaN; positive infinity is allowed and marks unroutable pairs.
    pub fn new(rows: usize, cols: usize, unit: CostUnit, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(
                "cost matrix needs at least one row and one column".into(),
            ));
        }
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "cost matrix expects {rows}x{cols} = {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::InvalidValue(format!(
                "transport costs must be non-negative, got {v}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            unit,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn unit(&self) -> CostUnit {
        self.unit
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Pairwise haversine distances: one row per origin, one column per
/// destination, in kilometers.
pub fn distance_matrix(origins: &[GeoPoint], destinations: &[GeoPoint]) -> Result<CostMatrix> {
    if origins.is_empty() || destinations.is_empty() {
        return Err(Error::Dimension(
            "distance matrix needs at least one origin and one destination".into(),
        ));
    }
    let mut values = Vec::with_capacity(origins.len() * destinations.len());
    for origin in origins {
        for destination in destinations {
            values.push(haversine_km(origin, destination));
        }
    }
    CostMatrix::new(
        origins.len(),
        destinations.len(),
        CostUnit::Kilometers,
        values,
    )
}
