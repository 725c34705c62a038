//! GeoJSON ingestion: RFC 7946 FeatureCollections of Point geometries.
//!
//! Coordinates come from the geometry in (lon, lat) order; all other fields
//! come from the feature properties. Property values may be JSON numbers or
//! numeric strings.

use std::collections::HashSet;
use std::path::Path;

use marketflow_core::{CustomerOrigin, GeoPoint, SupplyLocation};
use serde_json::Value;

use crate::columns::ColumnSpec;
use crate::CliError;

struct PointFeature {
    point: GeoPoint,
    properties: serde_json::Map<String, Value>,
    index: usize,
}

fn property_number(
    properties: &serde_json::Map<String, Value>,
    name: &str,
    index: usize,
) -> Result<f64, CliError> {
    let value = properties.get(name).ok_or_else(|| {
        CliError::Validation(format!("missing property {name} at feature {index}"))
    })?;
    match value {
        Value::Number(n) => n.as_f64().ok_or_else(|| {
            CliError::Validation(format!("property {name} at feature {index} is not a number"))
        }),
        Value::String(s) => s.trim().parse::<f64>().map_err(|_| {
            CliError::Validation(format!(
                "unparsable number {s:?} in property {name} at feature {index}"
            ))
        }),
        other => Err(CliError::Validation(format!(
            "property {name} at feature {index} is not numeric: {other}"
        ))),
    }
}

fn property_id(
    properties: &serde_json::Map<String, Value>,
    name: &str,
    index: usize,
) -> Result<String, CliError> {
    let value = properties.get(name).ok_or_else(|| {
        CliError::Validation(format!("missing property {name} at feature {index}"))
    })?;
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(CliError::Validation(format!(
            "property {name} at feature {index} is not usable as an id: {other}"
        ))),
    }
}

fn read_point_features(path: &Path, spec: &ColumnSpec) -> Result<Vec<PointFeature>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid JSON in {}: {e}", path.display())))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(CliError::Validation(format!(
            "{} is not a GeoJSON FeatureCollection",
            path.display()
        )));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| {
            CliError::Validation(format!("{} has no features array", path.display()))
        })?;

    let mut seen = HashSet::new();
    let mut result = Vec::with_capacity(features.len());
    for (index, feature) in features.iter().enumerate() {
        let geometry = feature.get("geometry").ok_or_else(|| {
            CliError::Validation(format!("missing geometry at feature {index}"))
        })?;
        if geometry.get("type").and_then(Value::as_str) != Some("Point") {
            return Err(CliError::Validation(format!(
                "non-point geometry at feature {index}"
            )));
        }
        let coordinates = geometry
            .get("coordinates")
            .and_then(Value::as_array)
            .ok_or_else(|| {
                CliError::Validation(format!("missing coordinates at feature {index}"))
            })?;
        if coordinates.len() < 2 {
            return Err(CliError::Validation(format!(
                "point at feature {index} needs [lon, lat] coordinates"
            )));
        }
        // GeoJSON convention: longitude first
        let lon = coordinates[0].as_f64().ok_or_else(|| {
            CliError::Validation(format!("non-numeric longitude at feature {index}"))
        })?;
        let lat = coordinates[1].as_f64().ok_or_else(|| {
            CliError::Validation(format!("non-numeric latitude at feature {index}"))
        })?;
        let properties = match feature.get("properties") {
            Some(Value::Object(map)) => map.clone(),
            _ => serde_json::Map::new(),
        };
        let id = property_id(&properties, &spec.id_column, index)?;
        if !seen.insert(id.clone()) {
            return Err(CliError::Validation(format!("duplicate id: {id}")));
        }
        let point = GeoPoint::new(id, lat, lon)
            .map_err(|e| CliError::Validation(format!("feature {index}: {e}")))?;
        result.push(PointFeature {
            point,
            properties,
            index,
        });
    }
    Ok(result)
}

pub fn load_origins_geojson(
    path: &Path,
    spec: &ColumnSpec,
) -> Result<Vec<CustomerOrigin>, CliError> {
    read_point_features(path, spec)?
        .into_iter()
        .map(|f| {
            let demand = match &spec.demand_column {
                Some(column) => property_number(&f.properties, column, f.index)?,
                None => 0.0,
            };
            CustomerOrigin::new(f.point, demand)
                .map_err(|e| CliError::Validation(format!("feature {}: {e}", f.index)))
        })
        .collect()
}

pub fn load_locations_geojson(
    path: &Path,
    spec: &ColumnSpec,
) -> Result<Vec<SupplyLocation>, CliError> {
    read_point_features(path, spec)?
        .into_iter()
        .map(|f| {
            let attraction = match &spec.attraction_column {
                Some(column) => property_number(&f.properties, column, f.index)?,
                None => 1.0,
            };
            let mut location = SupplyLocation::new(f.point, attraction)
                .map_err(|e| CliError::Validation(format!("feature {}: {e}", f.index)))?;
            for name in &spec.attribute_columns {
                let value = property_number(&f.properties, name, f.index)?;
                location = location
                    .with_attribute(name.clone(), value)
                    .map_err(|e| CliError::Validation(format!("feature {}: {e}", f.index)))?;
            }
            Ok(location)
        })
        .collect()
}
