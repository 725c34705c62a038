//! Spatial accessibility measures: Hansen accessibility and two-step
//! floating catchment area analysis.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::decay::DecaySpec;
use crate::error::{Error, Result};
use crate::model::InteractionMatrix;

/// Which measure produced a result, echoing its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum AccessMethod {
    Hansen { decay: DecaySpec },
    /// 2SFCA with its catchment threshold in the matrix's cost unit.
    TwoStepFca { d0: f64 },
}

/// Per-origin accessibility values, plus per-location supply ratios for
/// 2SFCA.
#[derive(Debug, Clone)]
pub struct AccessibilityResult {
    method: AccessMethod,
    per_origin: IndexMap<String, f64>,
    per_location: Option<IndexMap<String, f64>>,
    warnings: Vec<String>,
}

impl AccessibilityResult {
    pub fn method(&self) -> &AccessMethod {
        &self.method
    }

    /// Accessibility per origin id, in origin order.
    pub fn per_origin(&self) -> &IndexMap<String, f64> {
        &self.per_origin
    }

    /// Supply-to-demand ratio per location id (2SFCA only), in location
    /// order.
    pub fn per_location(&self) -> Option<&IndexMap<String, f64>> {
        self.per_location.as_ref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

fn lookup_per_location(
    matrix: &InteractionMatrix,
    values: &HashMap<String, f64>,
    what: &str,
) -> Result<Vec<f64>> {
    matrix
        .locations()
        .iter()
        .map(|l| {
            let v = values.get(l.id()).copied().ok_or_else(|| {
                Error::InvalidValue(format!("missing {what} value for location {}", l.id()))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValue(format!(
                    "{what} for location {} must be >= 0, got {v}",
                    l.id()
                )));
            }
            Ok(v)
        })
        .collect()
}

fn lookup_per_origin(
    matrix: &InteractionMatrix,
    values: &HashMap<String, f64>,
    what: &str,
) -> Result<Vec<f64>> {
    matrix
        .origins()
        .iter()
        .map(|o| {
            let v = values.get(o.id()).copied().ok_or_else(|| {
                Error::InvalidValue(format!("missing {what} value for origin {}", o.id()))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValue(format!(
                    "{what} for origin {} must be >= 0, got {v}",
                    o.id()
                )));
            }
            Ok(v)
        })
        .collect()
}

/// Hansen accessibility: `A_i = sum_j O_j * w(d_ij)` with `O_j` the
/// opportunities at location j.
pub fn hansen(
    matrix: &InteractionMatrix,
    opportunities: &HashMap<String, f64>,
    decay: &DecaySpec,
) -> Result<AccessibilityResult> {
    let costs = matrix.costs().ok_or_else(|| {
        Error::MissingStage("transport costs must be set before accessibility".into())
    })?;
    let opportunities = lookup_per_location(matrix, opportunities, "opportunity")?;
    let cols = matrix.location_count();
    let mut per_origin = IndexMap::with_capacity(matrix.origin_count());
    for (i, origin) in matrix.origins().iter().enumerate() {
        let mut accessibility = 0.0;
        for (j, o) in opportunities.iter().enumerate() {
            accessibility += o * decay.eval(costs[i * cols + j])?;
        }
        per_origin.insert(origin.id().to_string(), accessibility);
    }
    Ok(AccessibilityResult {
        method: AccessMethod::Hansen { decay: *decay },
        per_origin,
        per_location: None,
        warnings: Vec::new(),
    })
}

/// Two-step floating catchment area analysis.
///
/// Step 1 computes the supply-to-demand ratio `R_j = S_j / sum_{k: d_kj <= d0}
/// P_k` per location; step 2 sums the reachable ratios per origin:
/// `A_i = sum_{j: d_ij <= d0} R_j`. The threshold comparison is inclusive.
/// A location with no population inside its catchment gets `R_j = 0` and a
/// warning record.
pub fn fca2s(
    matrix: &InteractionMatrix,
    supply: &HashMap<String, f64>,
    population: &HashMap<String, f64>,
    d0: f64,
) -> Result<AccessibilityResult> {
    let costs = matrix.costs().ok_or_else(|| {
        Error::MissingStage("transport costs must be set before accessibility".into())
    })?;
    if !d0.is_finite() || d0 <= 0.0 {
        return Err(Error::InvalidValue(format!(
            "catchment threshold d0 must be > 0, got {d0}"
        )));
    }
    let supply = lookup_per_location(matrix, supply, "supply")?;
    let population = lookup_per_origin(matrix, population, "population")?;
    let cols = matrix.location_count();

    let mut warnings = Vec::new();
    let mut ratios = IndexMap::with_capacity(cols);
    for (j, location) in matrix.locations().iter().enumerate() {
        let mut reachable_population = 0.0;
        for (k, p) in population.iter().enumerate() {
            if costs[k * cols + j] <= d0 {
                reachable_population += p;
            }
        }
        let ratio = if reachable_population > 0.0 {
            supply[j] / reachable_population
        } else {
            warnings.push(format!(
                "location {}: no population within the catchment; ratio set to 0",
                location.id()
            ));
            0.0
        };
        ratios.insert(location.id().to_string(), ratio);
    }

    let mut per_origin = IndexMap::with_capacity(matrix.origin_count());
    for (i, origin) in matrix.origins().iter().enumerate() {
        let mut accessibility = 0.0;
        for (j, ratio) in ratios.values().enumerate() {
            if costs[i * cols + j] <= d0 {
                accessibility += ratio;
            }
        }
        per_origin.insert(origin.id().to_string(), accessibility);
    }

    Ok(AccessibilityResult {
        method: AccessMethod::TwoStepFca { d0 },
        per_origin,
        per_location: Some(ratios),
        warnings,
    })
}
