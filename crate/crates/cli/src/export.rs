//! Result export: CSV tables, GeoJSON FeatureCollections, and JSON fit
//! summaries.
//!
//! Numbers are serialized with Rust's shortest round-trip formatting, so an
//! exported value parses back to the identical f64. File writes are atomic:
//! content goes to a temporary sibling first, then a rename.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use marketflow_core::{
    AccessibilityResult, DecaySpec, FitResult, GeoPoint, InteractionMatrix, MarketAreas, MciFit,
    ZeroSharePolicy,
};
use serde_json::{json, Value};

use crate::CliError;

/// Shortest decimal representation that parses back to the same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes via a temporary sibling file plus rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("cannot move {} into place: {e}", path.display())))
}

fn optional_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Full pair table: one row per origin-destination pair with every stage
/// field, empty where unset.
pub fn export_interaction_csv(matrix: &InteractionMatrix, path: &Path) -> Result<(), CliError> {
    let mut out = String::from(
        "origin_id,location_id,transport_cost,utility,probability,flow,observed_probability,observed_flow\n",
    );
    for pair in matrix.pairs() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            pair.origin.id(),
            pair.location.id(),
            optional_cell(pair.transport_cost),
            optional_cell(pair.utility),
            optional_cell(pair.probability),
            optional_cell(pair.flow),
            optional_cell(pair.observed_probability),
            optional_cell(pair.observed_flow),
        )
        .expect("writing to a string cannot fail");
    }
    write_atomic(path, &out)
}

fn export_pair_values(
    matrix: &InteractionMatrix,
    header: &str,
    values: impl Fn(&marketflow_core::PairView<'_>) -> Option<f64>,
    path: &Path,
) -> Result<(), CliError> {
    let mut out = format!("origin_id,location_id,{header}\n");
    for pair in matrix.pairs() {
        let value = values(&pair).ok_or_else(|| {
            CliError::Validation(format!("{header} not computed for every pair"))
        })?;
        writeln!(
            out,
            "{},{},{}",
            pair.origin.id(),
            pair.location.id(),
            fmt_f64(value)
        )
        .expect("writing to a string cannot fail");
    }
    write_atomic(path, &out)
}

pub fn export_probabilities_csv(
    matrix: &InteractionMatrix,
    path: &Path,
) -> Result<(), CliError> {
    export_pair_values(matrix, "probability", |p| p.probability, path)
}

pub fn export_flows_csv(matrix: &InteractionMatrix, path: &Path) -> Result<(), CliError> {
    export_pair_values(matrix, "flow", |p| p.flow, path)
}

pub fn export_market_areas_csv(areas: &MarketAreas, path: &Path) -> Result<(), CliError> {
    let mut out = String::from("location_id,total\n");
    for (id, total) in areas.totals() {
        writeln!(out, "{id},{}", fmt_f64(*total)).expect("writing to a string cannot fail");
    }
    write_atomic(path, &out)
}

/// Per-origin accessibility values.
pub fn export_accessibility_csv(
    result: &AccessibilityResult,
    path: &Path,
) -> Result<(), CliError> {
    let mut out = String::from("origin_id,accessibility\n");
    for (id, value) in result.per_origin() {
        writeln!(out, "{id},{}", fmt_f64(*value)).expect("writing to a string cannot fail");
    }
    write_atomic(path, &out)
}

/// Per-location supply-to-demand ratios (2SFCA step 1).
pub fn export_ratios_csv(result: &AccessibilityResult, path: &Path) -> Result<(), CliError> {
    let ratios = result.per_location().ok_or_else(|| {
        CliError::Validation("this accessibility result carries no per-location ratios".into())
    })?;
    let mut out = String::from("location_id,ratio\n");
    for (id, value) in ratios {
        writeln!(out, "{id},{}", fmt_f64(*value)).expect("writing to a string cannot fail");
    }
    write_atomic(path, &out)
}

pub fn export_named_values_csv(
    header: (&str, &str),
    values: impl IntoIterator<Item = (String, f64)>,
    path: &Path,
) -> Result<(), CliError> {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (id, value) in values {
        writeln!(out, "{id},{}", fmt_f64(value)).expect("writing to a string cannot fail");
    }
    write_atomic(path, &out)
}

/// Travel-time matrix in long format, minutes per pair.
pub fn export_traveltime_csv(
    origins: &[GeoPoint],
    destinations: &[GeoPoint],
    minutes: &[f64],
    path: &Path,
) -> Result<(), CliError> {
    let mut out = String::from("origin_id,destination_id,minutes\n");
    for (i, origin) in origins.iter().enumerate() {
        for (j, destination) in destinations.iter().enumerate() {
            writeln!(
                out,
                "{},{},{}",
                origin.id(),
                destination.id(),
                fmt_f64(minutes[i * destinations.len() + j])
            )
            .expect("writing to a string cannot fail");
        }
    }
    write_atomic(path, &out)
}

fn point_feature(point: &GeoPoint, mut properties: serde_json::Map<String, Value>) -> Value {
    properties.insert("id".into(), Value::String(point.id().to_string()));
    json!({
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [point.lon(), point.lat()],
        },
        "properties": properties,
    })
}

fn feature_collection(features: Vec<Value>) -> String {
    let collection = json!({
        "type": "FeatureCollection",
        "features": features,
    });
    let mut text = serde_json::to_string_pretty(&collection).expect("static JSON serializes");
    text.push('\n');
    text
}

/// Market areas joined back to the location points.
pub fn export_market_areas_geojson(
    areas: &MarketAreas,
    locations: &[GeoPoint],
    path: &Path,
) -> Result<(), CliError> {
    let by_id: HashMap<&str, &GeoPoint> = locations.iter().map(|p| (p.id(), p)).collect();
    let mut features = Vec::new();
    for (id, total) in areas.totals() {
        let point = by_id.get(id.as_str()).ok_or_else(|| {
            CliError::Validation(format!("no location point for market area {id}"))
        })?;
        let mut properties = serde_json::Map::new();
        properties.insert("total".into(), json!(total));
        features.push(point_feature(point, properties));
    }
    write_atomic(path, &feature_collection(features))
}

/// Accessibility values joined back to the origin points.
pub fn export_accessibility_geojson(
    result: &AccessibilityResult,
    origins: &[GeoPoint],
    path: &Path,
) -> Result<(), CliError> {
    let by_id: HashMap<&str, &GeoPoint> = origins.iter().map(|p| (p.id(), p)).collect();
    let mut features = Vec::new();
    for (id, value) in result.per_origin() {
        let point = by_id.get(id.as_str()).ok_or_else(|| {
            CliError::Validation(format!("no origin point for accessibility value {id}"))
        })?;
        let mut properties = serde_json::Map::new();
        properties.insert("accessibility".into(), json!(value));
        features.push(point_feature(point, properties));
    }
    write_atomic(path, &feature_collection(features))
}

fn decay_json(decay: &DecaySpec) -> Value {
    match decay {
        DecaySpec::Power { lambda } => json!({"kind": "power", "lambda": lambda}),
        DecaySpec::Exponential { lambda } => json!({"kind": "exponential", "lambda": lambda}),
        DecaySpec::Logistic { a, b } => json!({"kind": "logistic", "a": a, "b": b}),
    }
}

fn gof_json(gof: &marketflow_core::GOFMetrics) -> Value {
    json!({
        "r_squared": gof.r_squared,
        "mae": gof.mae,
        "rmse": gof.rmse,
        "loglik": gof.loglik,
    })
}

/// Machine-readable calibration summary.
pub fn export_fit_json(result: &FitResult, path: &Path) -> Result<(), CliError> {
    let document = json!({
        "model": "huff",
        "params": {
            "gamma": result.params.gamma,
            "decay": decay_json(&result.params.decay),
        },
        "objective_value": result.objective_value,
        "converged": result.converged,
        "iterations": result.iterations,
        "gof": gof_json(&result.gof),
        "warnings": result.warnings,
        "trace": result.trace,
    });
    let mut text = serde_json::to_string_pretty(&document).expect("static JSON serializes");
    text.push('\n');
    write_atomic(path, &text)
}

/// Machine-readable MCI fit summary; `mci-predict` reads the coefficients
/// back from this document.
pub fn export_mci_fit_json(
    fit: &MciFit,
    policy: ZeroSharePolicy,
    warnings: &[String],
    path: &Path,
) -> Result<(), CliError> {
    let coefficients: serde_json::Map<String, Value> = fit
        .coefficients()
        .iter()
        .map(|(name, value)| (name.clone(), json!(value)))
        .collect();
    let policy = match policy {
        ZeroSharePolicy::Drop => json!({"kind": "drop"}),
        ZeroSharePolicy::AddEpsilon(eps) => json!({"kind": "add_epsilon", "epsilon": eps}),
    };
    let document = json!({
        "model": "mci",
        "coefficients": coefficients,
        "gof": gof_json(fit.gof()),
        "zero_share_policy": policy,
        "warnings": warnings,
    });
    let mut text = serde_json::to_string_pretty(&document).expect("static JSON serializes");
    text.push('\n');
    write_atomic(path, &text)
}

/// Plain-text coefficient table.
pub fn export_mci_fit_txt(fit: &MciFit, path: &Path) -> Result<(), CliError> {
    let width = fit
        .coefficients()
        .keys()
        .map(|name| name.len())
        .max()
        .unwrap_or(0)
        .max("coefficient".len());
    let mut out = format!("{:<width$}  value\n", "coefficient");
    for (name, value) in fit.coefficients() {
        writeln!(out, "{name:<width$}  {}", fmt_f64(*value))
            .expect("writing to a string cannot fail");
    }
    if let Some(r2) = fit.gof().r_squared {
        writeln!(out, "\nr_squared  {}", fmt_f64(r2)).expect("writing to a string cannot fail");
    }
    writeln!(out, "mae        {}", fmt_f64(fit.gof().mae))
        .expect("writing to a string cannot fail");
    writeln!(out, "rmse       {}", fmt_f64(fit.gof().rmse))
        .expect("writing to a string cannot fail");
    write_atomic(path, &out)
}

/// Reads coefficients back from an exported MCI fit document.
pub fn read_coefficients_json(
    path: &Path,
) -> Result<indexmap::IndexMap<String, f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid JSON in {}: {e}", path.display())))?;
    let map = root
        .get("coefficients")
        .and_then(Value::as_object)
        .ok_or_else(|| {
            CliError::Validation(format!(
                "{} has no \"coefficients\" object",
                path.display()
            ))
        })?;
    map.iter()
        .map(|(name, value)| {
            value
                .as_f64()
                .map(|v| (name.clone(), v))
                .ok_or_else(|| {
                    CliError::Validation(format!("coefficient {name} is not a number"))
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_formatting_round_trips_exactly() {
        for v in [
            0.1,
            1.0 / 3.0,
            500.0,
            2.0f64.powi(-40),
            123456789.123456789,
            f64::INFINITY,
        ] {
            let text = fmt_f64(v);
            assert_eq!(text.parse::<f64>().unwrap(), v, "text was {text}");
        }
        assert_eq!(fmt_f64(500.0), "500");
    }
}
