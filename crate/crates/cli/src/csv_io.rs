//! CSV ingestion: customer origins, supply locations, observed data,
//! external cost matrices, and interaction-matrix records.
//!
//! All readers expect UTF-8 with a header row and locale-independent numbers
//! (decimal point). The delimiter defaults to a comma and may be switched to
//! a semicolon.

use std::collections::HashMap;
use std::collections::HashSet;
use std::path::Path;

use marketflow_core::{CustomerOrigin, GeoPoint, ObservedData, SupplyLocation};

use crate::columns::ColumnSpec;
use crate::CliError;

fn open_reader(path: &Path, delimiter: u8) -> Result<csv::Reader<std::fs::File>, CliError> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Validation(format!("missing column: {name}")))
}

fn parse_number(field: &str, column: &str, row: usize) -> Result<f64, CliError> {
    field.trim().parse::<f64>().map_err(|_| {
        CliError::Validation(format!(
            "unparsable number {field:?} in column {column} on row {row}"
        ))
    })
}

struct PointRow {
    point: GeoPoint,
    values: Vec<f64>,
    row: usize,
}

/// Shared row parser: id/lat/lon plus the named value columns, with 1-based
/// data-row indices in every error.
fn read_point_rows(
    path: &Path,
    spec: &ColumnSpec,
    delimiter: u8,
    value_columns: &[String],
) -> Result<Vec<PointRow>, CliError> {
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let id_idx = header_index(&headers, &spec.id_column)?;
    let lat_idx = header_index(&headers, &spec.lat_column)?;
    let lon_idx = header_index(&headers, &spec.lon_column)?;
    let value_idx: Vec<usize> = value_columns
        .iter()
        .map(|c| header_index(&headers, c))
        .collect::<Result<_, _>>()?;

    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record =
            record.map_err(|e| CliError::Io(format!("cannot read row {row} of {}: {e}", path.display())))?;
        let id = record.get(id_idx).unwrap_or("").trim().to_string();
        if !seen.insert(id.clone()) {
            return Err(CliError::Validation(format!("duplicate id: {id}")));
        }
        let lat = parse_number(record.get(lat_idx).unwrap_or(""), &spec.lat_column, row)?;
        let lon = parse_number(record.get(lon_idx).unwrap_or(""), &spec.lon_column, row)?;
        let point = GeoPoint::new(id, lat, lon)
            .map_err(|e| CliError::Validation(format!("row {row}: {e}")))?;
        let values = value_idx
            .iter()
            .zip(value_columns)
            .map(|(idx, column)| parse_number(record.get(*idx).unwrap_or(""), column, row))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(PointRow { point, values, row });
    }
    Ok(rows)
}

/// Loads customer origins; demand comes from `demand_column` or defaults to
/// zero.
pub fn load_origins_csv(
    path: &Path,
    spec: &ColumnSpec,
    delimiter: u8,
) -> Result<Vec<CustomerOrigin>, CliError> {
    let value_columns: Vec<String> = spec.demand_column.iter().cloned().collect();
    read_point_rows(path, spec, delimiter, &value_columns)?
        .into_iter()
        .map(|r| {
            let demand = r.values.first().copied().unwrap_or(0.0);
            CustomerOrigin::new(r.point, demand)
                .map_err(|e| CliError::Validation(format!("row {}: {e}", r.row)))
        })
        .collect()
}

/// Loads supply locations; attraction comes from `attraction_column` or
/// defaults to one, and each attribute column becomes a named attribute.
pub fn load_locations_csv(
    path: &Path,
    spec: &ColumnSpec,
    delimiter: u8,
) -> Result<Vec<SupplyLocation>, CliError> {
    let mut value_columns: Vec<String> = spec.attraction_column.iter().cloned().collect();
    value_columns.extend(spec.attribute_columns.iter().cloned());
    read_point_rows(path, spec, delimiter, &value_columns)?
        .into_iter()
        .map(|r| {
            let mut values = r.values.iter();
            let attraction = if spec.attraction_column.is_some() {
                *values.next().unwrap()
            } else {
                1.0
            };
            let mut location = SupplyLocation::new(r.point, attraction)
                .map_err(|e| CliError::Validation(format!("row {}: {e}", r.row)))?;
            for (name, value) in spec.attribute_columns.iter().zip(values) {
                location = location
                    .with_attribute(name.clone(), *value)
                    .map_err(|e| CliError::Validation(format!("row {}: {e}", r.row)))?;
            }
            Ok(location)
        })
        .collect()
}

/// Loads observed data, inferring the kind from the header:
/// `origin_id,location_id,share` for shares, `origin_id,location_id,flow`
/// for flows, `location_id,total` for totals (column order is free).
pub fn load_observed_csv(path: &Path, delimiter: u8) -> Result<ObservedData, CliError> {
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let has = |name: &str| names.contains(&name);

    if has("origin_id") && has("location_id") && (has("share") || has("flow")) {
        let shares = has("share");
        let origin_idx = header_index(&headers, "origin_id")?;
        let location_idx = header_index(&headers, "location_id")?;
        let value_column = if shares { "share" } else { "flow" };
        let value_idx = header_index(&headers, value_column)?;
        let mut values: HashMap<(String, String), f64> = HashMap::new();
        for (row_number, record) in reader.records().enumerate() {
            let row = row_number + 1;
            let record = record
                .map_err(|e| CliError::Io(format!("cannot read row {row} of {}: {e}", path.display())))?;
            let key = (
                record.get(origin_idx).unwrap_or("").trim().to_string(),
                record.get(location_idx).unwrap_or("").trim().to_string(),
            );
            let value = parse_number(record.get(value_idx).unwrap_or(""), value_column, row)?;
            if values.insert(key.clone(), value).is_some() {
                return Err(CliError::Validation(format!(
                    "duplicate observed pair ({}, {}) on row {row}",
                    key.0, key.1
                )));
            }
        }
        let observed = if shares {
            ObservedData::shares(values)
        } else {
            ObservedData::flows(values)
        };
        observed.map_err(CliError::from)
    } else if has("location_id") && has("total") {
        let location_idx = header_index(&headers, "location_id")?;
        let value_idx = header_index(&headers, "total")?;
        let mut values: HashMap<String, f64> = HashMap::new();
        for (row_number, record) in reader.records().enumerate() {
            let row = row_number + 1;
            let record = record
                .map_err(|e| CliError::Io(format!("cannot read row {row} of {}: {e}", path.display())))?;
            let id = record.get(location_idx).unwrap_or("").trim().to_string();
            let value = parse_number(record.get(value_idx).unwrap_or(""), "total", row)?;
            if values.insert(id.clone(), value).is_some() {
                return Err(CliError::Validation(format!(
                    "duplicate observed location {id} on row {row}"
                )));
            }
        }
        ObservedData::totals(values).map_err(CliError::from)
    } else {
        Err(CliError::Validation(format!(
            "cannot infer observed kind from header {names:?}; expected \
             origin_id,location_id,share | origin_id,location_id,flow | location_id,total"
        )))
    }
}

/// Loads a long-format cost matrix: `origin_id,location_id,cost`, one row
/// per pair.
pub fn load_cost_pairs_csv(
    path: &Path,
    delimiter: u8,
) -> Result<HashMap<(String, String), f64>, CliError> {
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let origin_idx = header_index(&headers, "origin_id")?;
    let location_idx = header_index(&headers, "location_id")?;
    let cost_idx = header_index(&headers, "cost")?;
    let mut values = HashMap::new();
    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record = record
            .map_err(|e| CliError::Io(format!("cannot read row {row} of {}: {e}", path.display())))?;
        let key = (
            record.get(origin_idx).unwrap_or("").trim().to_string(),
            record.get(location_idx).unwrap_or("").trim().to_string(),
        );
        let cost = parse_number(record.get(cost_idx).unwrap_or(""), "cost", row)?;
        if values.insert(key.clone(), cost).is_some() {
            return Err(CliError::Validation(format!(
                "duplicate cost pair ({}, {}) on row {row}",
                key.0, key.1
            )));
        }
    }
    Ok(values)
}

/// One exported interaction-matrix row read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionRecord {
    pub origin_id: String,
    pub location_id: String,
    pub transport_cost: Option<f64>,
    pub utility: Option<f64>,
    pub probability: Option<f64>,
    pub flow: Option<f64>,
    pub observed_probability: Option<f64>,
    pub observed_flow: Option<f64>,
}

/// Reads an exported interaction matrix back; empty cells become `None`.
pub fn read_interaction_csv(
    path: &Path,
    delimiter: u8,
) -> Result<Vec<InteractionRecord>, CliError> {
    let mut reader = open_reader(path, delimiter)?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Io(format!("cannot read header of {}: {e}", path.display())))?
        .clone();
    let columns = [
        "origin_id",
        "location_id",
        "transport_cost",
        "utility",
        "probability",
        "flow",
        "observed_probability",
        "observed_flow",
    ];
    let idx: Vec<usize> = columns
        .iter()
        .map(|c| header_index(&headers, c))
        .collect::<Result<_, _>>()?;
    let optional = |record: &csv::StringRecord, i: usize, column: &str, row: usize| {
        let field = record.get(idx[i]).unwrap_or("").trim();
        if field.is_empty() {
            Ok(None)
        } else {
            parse_number(field, column, row).map(Some)
        }
    };
    let mut rows = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let row = row_number + 1;
        let record = record
            .map_err(|e| CliError::Io(format!("cannot read row {row} of {}: {e}", path.display())))?;
        rows.push(InteractionRecord {
            origin_id: record.get(idx[0]).unwrap_or("").trim().to_string(),
            location_id: record.get(idx[1]).unwrap_or("").trim().to_string(),
            transport_cost: optional(&record, 2, "transport_cost", row)?,
            utility: optional(&record, 3, "utility", row)?,
            probability: optional(&record, 4, "probability", row)?,
            flow: optional(&record, 5, "flow", row)?,
            observed_probability: optional(&record, 6, "observed_probability", row)?,
            observed_flow: optional(&record, 7, "observed_flow", row)?,
        });
    }
    Ok(rows)
}
