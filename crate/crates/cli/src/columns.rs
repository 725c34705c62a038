//! Column mapping between input files and the entity model.

/// Which input columns (CSV) or properties (GeoJSON) carry the entity
/// fields. `id`, `lat`, and `lon` are mandatory; GeoJSON takes coordinates
/// from the geometry instead of the lat/lon columns.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub id_column: String,
    pub lat_column: String,
    pub lon_column: String,
    /// Demand potential column for origins; absent means demand 0.
    pub demand_column: Option<String>,
    /// Attraction column for locations; absent means attraction 1.
    pub attraction_column: Option<String>,
    /// Additional positive location attributes, e.g. for the MCI model.
    pub attribute_columns: Vec<String>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            id_column: "id".into(),
            lat_column: "lat".into(),
            lon_column: "lon".into(),
            demand_column: None,
            attraction_column: None,
            attribute_columns: Vec::new(),
        }
    }
}
