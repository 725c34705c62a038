//! Multiplicative Competitive Interaction model: log-centering transform,
//! least-squares estimation, and share prediction.
//!
//! The MCI model explains market shares through several location attributes
//! at once: `p_ij = prod_h A_hj^g_h / sum_j prod_h A_hj^g_h`. Dividing shares
//! and attributes by their per-origin geometric means and taking logs turns
//! this into a linear regression without intercept, so the exponents can be
//! estimated by ordinary least squares.

use indexmap::IndexMap;

use crate::calibrate::{gof_metrics, GOFMetrics};
use crate::error::{Error, Result};
use crate::model::InteractionMatrix;

/// Reserved attribute name resolving to the pair transport cost `t_ij`.
///
/// Include it in the attribute list to estimate a travel-cost exponent; the
/// fitted coefficient is normally negative.
pub const TRANSPORT_COST_ATTRIBUTE: &str = "t";

/// How observed zero shares are handled before the log transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroSharePolicy {
    /// Remove zero-share pairs and recompute the per-origin geometric mean
    /// over the remainder. Default: epsilon substitutes bias coefficients.
    Drop,
    /// Replace zeros with the given epsilon, then renormalize shares within
    /// each origin.
    AddEpsilon(f64),
}

impl Default for ZeroSharePolicy {
    fn default() -> Self {
        ZeroSharePolicy::Drop
    }
}

/// One regression row of the transformed design.
#[derive(Debug, Clone)]
pub struct MciRow {
    pub origin_id: String,
    pub location_id: String,
    /// `log(p_ij / geomean_i p)` over the retained alternatives.
    pub response: f64,
    /// `log(A_hj / geomean_i A_h)` per attribute, in attribute order.
    pub regressors: Vec<f64>,
}

/// The log-centered regression design.
#[derive(Debug, Clone)]
pub struct MciDesign {
    attribute_names: Vec<String>,
    rows: Vec<MciRow>,
    warnings: Vec<String>,
    policy: ZeroSharePolicy,
}

impl MciDesign {
    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn rows(&self) -> &[MciRow] {
        &self.rows
    }

    /// Origins dropped during the transform, one message each.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn policy(&self) -> ZeroSharePolicy {
        self.policy
    }
}

/// Estimated MCI coefficients with residuals and fit metrics.
#[derive(Debug, Clone)]
pub struct MciFit {
    coefficients: IndexMap<String, f64>,
    residuals: Vec<f64>,
    gof: GOFMetrics,
}

impl MciFit {
    /// One coefficient per attribute; there is no intercept.
    pub fn coefficients(&self) -> &IndexMap<String, f64> {
        &self.coefficients
    }

    /// Per-row residual of the centered regression, in design row order.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn gof(&self) -> &GOFMetrics {
        &self.gof
    }
}

/// Resolves an attribute name to one value per pair (origin-major).
///
/// `t` is reserved for the transport cost; every other name must be present
/// and positive on every location.
fn attribute_column(matrix: &InteractionMatrix, name: &str) -> Result<Vec<f64>> {
    if name == TRANSPORT_COST_ATTRIBUTE {
        let costs = matrix.costs().ok_or_else(|| {
            Error::MissingStage(
                "transport costs must be set to use the cost attribute in MCI".into(),
            )
        })?;
        if let Some(t) = costs.iter().find(|t| **t <= 0.0 || !t.is_finite()) {
            return Err(Error::Domain(format!(
                "transport-cost attribute must be positive and finite, got {t}; raise the cost floor"
            )));
        }
        return Ok(costs.to_vec());
    }
    let per_location: Vec<f64> = matrix
        .locations()
        .iter()
        .map(|l| {
            let v = l.attribute(name).ok_or_else(|| {
                Error::InvalidValue(format!(
                    "attribute {name} missing on location {}",
                    l.id()
                ))
            })?;
            if v <= 0.0 {
                return Err(Error::Domain(format!(
                    "attribute {name} must be positive, got {v} on location {}",
                    l.id()
                )));
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let mut column = Vec::with_capacity(matrix.pair_count());
    for _ in 0..matrix.origin_count() {
        column.extend_from_slice(&per_location);
    }
    Ok(column)
}

/// Applies the log-centering transformation to observed market shares.
///
/// Within each origin, shares and attribute values are divided by their
/// geometric mean over the retained alternatives before taking logs, so the
/// per-origin sums of the response and of every regressor column vanish.
/// Origins with fewer than two retained alternatives are dropped with a
/// warning; it is an error only if no origins remain.
pub fn log_centering_transform(
    matrix: &InteractionMatrix,
    attributes: &[String],
    policy: ZeroSharePolicy,
) -> Result<MciDesign> {
    let observed = matrix.observed_probabilities().ok_or_else(|| {
        Error::MissingStage("observed market shares must be attached before the MCI transform".into())
    })?;
    if attributes.is_empty() {
        return Err(Error::Dimension("at least one attribute is required".into()));
    }
    for (idx, name) in attributes.iter().enumerate() {
        if attributes[..idx].contains(name) {
            return Err(Error::DuplicateId(name.clone()));
        }
    }
    if let ZeroSharePolicy::AddEpsilon(eps) = policy {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::InvalidValue(format!(
                "zero-share epsilon must be > 0, got {eps}"
            )));
        }
    }
    let columns: Vec<Vec<f64>> = attributes
        .iter()
        .map(|name| attribute_column(matrix, name))
        .collect::<Result<_>>()?;

    let cols = matrix.location_count();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (i, origin) in matrix.origins().iter().enumerate() {
        let share_row = &observed[i * cols..(i + 1) * cols];
        if share_row.iter().all(|&s| s == 0.0) {
            warnings.push(format!(
                "origin {} dropped: all observed shares are zero",
                origin.id()
            ));
            continue;
        }
        // indices retained for this origin plus the share to transform
        let retained: Vec<(usize, f64)> = match policy {
            ZeroSharePolicy::Drop => share_row
                .iter()
                .enumerate()
                .filter(|(_, s)| **s > 0.0)
                .map(|(j, s)| (j, *s))
                .collect(),
            ZeroSharePolicy::AddEpsilon(eps) => {
                let replaced: Vec<f64> = share_row
                    .iter()
                    .map(|&s| if s == 0.0 { eps } else { s })
                    .collect();
                let total: f64 = replaced.iter().sum();
                replaced
                    .into_iter()
                    .enumerate()
                    .map(|(j, s)| (j, s / total))
                    .collect()
            }
        };
        if retained.len() < 2 {
            warnings.push(format!(
                "origin {} dropped: fewer than two positive shares",
                origin.id()
            ));
            continue;
        }

        let n = retained.len() as f64;
        let log_shares: Vec<f64> = retained.iter().map(|(_, s)| s.ln()).collect();
        let mean_log_share: f64 = log_shares.iter().sum::<f64>() / n;
        let log_columns: Vec<Vec<f64>> = columns
            .iter()
            .map(|col| {
                retained
                    .iter()
                    .map(|(j, _)| col[i * cols + j].ln())
                    .collect::<Vec<f64>>()
            })
            .collect();
        let mean_logs: Vec<f64> = log_columns
            .iter()
            .map(|logs| logs.iter().sum::<f64>() / n)
            .collect();

        for (pos, (j, _)) in retained.iter().enumerate() {
            rows.push(MciRow {
                origin_id: origin.id().to_string(),
                location_id: matrix.locations()[*j].id().to_string(),
                response: log_shares[pos] - mean_log_share,
                regressors: log_columns
                    .iter()
                    .zip(&mean_logs)
                    .map(|(logs, mean)| logs[pos] - mean)
                    .collect(),
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Domain(
            "no origins with at least two positive observed shares remain".into(),
        ));
    }
    Ok(MciDesign {
        attribute_names: attributes.to_vec(),
        rows,
        warnings,
        policy,
    })
}

/// Solves the H x H normal-equation system by Gaussian elimination with
/// partial pivoting. A vanishing pivot at column k means attribute k is
/// linearly dependent on the preceding columns.
fn solve_normal_equations(
    mut gram: Vec<Vec<f64>>,
    mut rhs: Vec<f64>,
    names: &[String],
) -> Result<Vec<f64>> {
    let h = rhs.len();
    let scale = gram
        .iter()
        .enumerate()
        .map(|(k, row)| row[k].abs())
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return Err(Error::Collinear(format!(
            "all regressor columns are zero (first: {})",
            names[0]
        )));
    }
    let tolerance = 1e-10 * scale;
    for k in 0..h {
        let pivot_row = (k..h)
            .max_by(|&a, &b| gram[a][k].abs().partial_cmp(&gram[b][k].abs()).unwrap())
            .unwrap();
        if gram[pivot_row][k].abs() <= tolerance {
            return Err(Error::Collinear(format!(
                "column {} is linearly dependent on the preceding columns",
                names[k]
            )));
        }
        gram.swap(k, pivot_row);
        rhs.swap(k, pivot_row);
        for r in (k + 1)..h {
            let factor = gram[r][k] / gram[k][k];
            for c in k..h {
                gram[r][c] -= factor * gram[k][c];
            }
            rhs[r] -= factor * rhs[k];
        }
    }
    let mut solution = vec![0.0; h];
    for k in (0..h).rev() {
        let mut acc = rhs[k];
        for c in (k + 1)..h {
            acc -= gram[k][c] * solution[c];
        }
        solution[k] = acc / gram[k][k];
    }
    Ok(solution)
}

/// Ordinary least squares on the centered design, without intercept
/// (the centering makes an intercept identically zero).
pub fn mci_fit(design: &MciDesign) -> Result<MciFit> {
    let h = design.attribute_names.len();
    let n = design.rows.len();
    if n < h + 1 {
        return Err(Error::Dimension(format!(
            "MCI fit needs at least {} rows for {h} attribute(s), got {n}",
            h + 1
        )));
    }
    let mut gram = vec![vec![0.0; h]; h];
    let mut rhs = vec![0.0; h];
    for row in &design.rows {
        for a in 0..h {
            rhs[a] += row.regressors[a] * row.response;
            for b in 0..h {
                gram[a][b] += row.regressors[a] * row.regressors[b];
            }
        }
    }
    let coefficients = solve_normal_equations(gram, rhs, &design.attribute_names)?;

    let fitted: Vec<f64> = design
        .rows
        .iter()
        .map(|row| {
            row.regressors
                .iter()
                .zip(&coefficients)
                .map(|(x, c)| x * c)
                .sum()
        })
        .collect();
    let observed: Vec<f64> = design.rows.iter().map(|r| r.response).collect();
    let residuals: Vec<f64> = observed
        .iter()
        .zip(&fitted)
        .map(|(o, f)| o - f)
        .collect();
    let gof = gof_metrics(&observed, &fitted)?;

    Ok(MciFit {
        coefficients: design
            .attribute_names
            .iter()
            .cloned()
            .zip(coefficients)
            .collect(),
        residuals,
        gof,
    })
}

/// Predicts market shares from fitted coefficients via the inverse
/// log-centering transformation:
/// `p_ij = exp(sum_h g_h log(A_hj / geomean A_h)) / sum_j exp(same)`.
pub fn mci_predict(
    matrix: &InteractionMatrix,
    coefficients: &IndexMap<String, f64>,
) -> Result<InteractionMatrix> {
    if coefficients.is_empty() {
        return Err(Error::Dimension("at least one coefficient is required".into()));
    }
    if let Some((name, v)) = coefficients.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidValue(format!(
            "coefficient {name} must be finite, got {v}"
        )));
    }
    let columns: Vec<(f64, Vec<f64>)> = coefficients
        .iter()
        .map(|(name, &coef)| Ok((coef, attribute_column(matrix, name)?)))
        .collect::<Result<_>>()?;

    let cols = matrix.location_count();
    let mut values = Vec::with_capacity(matrix.pair_count());
    for (i, origin) in matrix.origins().iter().enumerate() {
        // centered log-scores per alternative, then a softmax
        let mut scores = vec![0.0; cols];
        for (coef, column) in &columns {
            let logs: Vec<f64> = (0..cols).map(|j| column[i * cols + j].ln()).collect();
            let mean: f64 = logs.iter().sum::<f64>() / cols as f64;
            for (score, log) in scores.iter_mut().zip(&logs) {
                *score += coef * (log - mean);
            }
        }
        let numerators: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
        let sum: f64 = numerators.iter().sum();
        if !sum.is_finite() {
            return Err(Error::Domain(format!(
                "predicted share numerators overflow for origin {}",
                origin.id()
            )));
        }
        if sum == 0.0 {
            return Err(Error::DegenerateOrigin(format!(
                "predicted share numerators underflow for origin {}",
                origin.id()
            )));
        }
        values.extend(numerators.iter().map(|u| u / sum));
    }
    Ok(matrix.replacing_probabilities(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{CostMatrix, CostUnit, GeoPoint};
    use crate::model::{CostSource, CustomerOrigin, SupplyLocation};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn matrix_with(
        shares: Vec<f64>,
        attraction_like: &[(&str, Vec<f64>)],
        costs: Vec<f64>,
        i: usize,
        j: usize,
    ) -> InteractionMatrix {
        let origins: Vec<CustomerOrigin> = (0..i)
            .map(|k| {
                CustomerOrigin::new(GeoPoint::new(format!("o{k}"), 0.0, 0.0).unwrap(), 100.0)
                    .unwrap()
            })
            .collect();
        let locations: Vec<SupplyLocation> = (0..j)
            .map(|k| {
                let mut loc =
                    SupplyLocation::new(GeoPoint::new(format!("l{k}"), 0.0, 0.0).unwrap(), 1.0)
                        .unwrap();
                for (name, values) in attraction_like {
                    loc = loc.with_attribute(*name, values[k]).unwrap();
                }
                loc
            })
            .collect();
        let m = InteractionMatrix::new(origins, locations).unwrap();
        let m = m
            .with_transport_costs(
                &CostSource::External(CostMatrix::new(i, j, CostUnit::Minutes, costs).unwrap()),
                0.0,
            )
            .unwrap();
        m.with_observed_probabilities(shares).unwrap()
    }

    /// Forward MCI model: shares from attribute columns and exponents.
    fn forward_shares(columns: &[(&Vec<f64>, f64)], i: usize, j: usize) -> Vec<f64> {
        let mut shares = Vec::with_capacity(i * j);
        for row in 0..i {
            let numerators: Vec<f64> = (0..j)
                .map(|col| {
                    columns
                        .iter()
                        .map(|(values, exponent)| values[row * j + col].powf(*exponent))
                        .product()
                })
                .collect();
            let sum: f64 = numerators.iter().sum();
            shares.extend(numerators.iter().map(|n| n / sum));
        }
        shares
    }

    #[test]
    fn uniform_shares_and_attributes_center_to_zero() {
        let shares = vec![0.5, 0.5, 0.5, 0.5];
        let m = matrix_with(
            shares,
            &[("size", vec![3.0, 3.0])],
            vec![1.0, 1.0, 1.0, 1.0],
            2,
            2,
        );
        let design =
            log_centering_transform(&m, &["size".to_string()], ZeroSharePolicy::Drop).unwrap();
        for row in design.rows() {
            assert_eq!(row.response, 0.0);
            assert_eq!(row.regressors[0], 0.0);
        }
    }

    #[test]
    fn hand_evaluated_geometric_means() {
        // p = (0.8, 0.2) has geometric mean sqrt(0.16) = 0.4; A = (4, 1) has
        // geometric mean 2.
        let m = matrix_with(
            vec![0.8, 0.2],
            &[("size", vec![4.0, 1.0])],
            vec![1.0, 1.0],
            1,
            2,
        );
        let design =
            log_centering_transform(&m, &["size".to_string()], ZeroSharePolicy::Drop).unwrap();
        let rows = design.rows();
        assert!((rows[0].response - (0.8f64 / 0.4).ln()).abs() < 1e-12);
        assert!((rows[1].response - (0.2f64 / 0.4).ln()).abs() < 1e-12);
        assert!((rows[0].regressors[0] - 2.0f64.ln()).abs() < 1e-12);
        assert!((rows[1].regressors[0] - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn per_origin_design_sums_vanish_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..10 {
            let (i, j) = (rng.gen_range(2..6), rng.gen_range(2..5));
            let size: Vec<f64> = (0..j).map(|_| rng.gen_range(0.5..40.0)).collect();
            let costs: Vec<f64> = (0..i * j).map(|_| rng.gen_range(1.0..30.0)).collect();
            let mut shares = Vec::new();
            for _ in 0..i {
                let raw: Vec<f64> = (0..j).map(|_| rng.gen_range(0.05..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                shares.extend(raw.iter().map(|r| r / sum));
            }
            let m = matrix_with(shares, &[("size", size)], costs, i, j);
            let attrs = vec!["size".to_string(), "t".to_string()];
            let design = log_centering_transform(&m, &attrs, ZeroSharePolicy::Drop).unwrap();
            for origin in m.origins() {
                let rows: Vec<&MciRow> = design
                    .rows()
                    .iter()
                    .filter(|r| r.origin_id == origin.id())
                    .collect();
                let response_sum: f64 = rows.iter().map(|r| r.response).sum();
                assert!(response_sum.abs() < 1e-9);
                for h in 0..2 {
                    let reg_sum: f64 = rows.iter().map(|r| r.regressors[h]).sum();
                    assert!(reg_sum.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zero_shares_are_dropped_and_origins_with_one_alternative_warned() {
        let shares = vec![1.0, 0.0, 0.6, 0.4];
        let m = matrix_with(
            shares,
            &[("size", vec![4.0, 2.0])],
            vec![1.0, 2.0, 3.0, 4.0],
            2,
            2,
        );
        let design =
            log_centering_transform(&m, &["size".to_string()], ZeroSharePolicy::Drop).unwrap();
        // origin o0 retains a single positive share -> dropped with warning
        assert_eq!(design.rows().len(), 2);
        assert_eq!(design.warnings().len(), 1);
        assert!(design.warnings()[0].contains("o0"));
    }

    #[test]
    fn epsilon_policy_keeps_all_alternatives() {
        let shares = vec![1.0, 0.0, 0.6, 0.4];
        let m = matrix_with(
            shares,
            &[("size", vec![4.0, 2.0])],
            vec![1.0, 2.0, 3.0, 4.0],
            2,
            2,
        );
        let design = log_centering_transform(
            &m,
            &["size".to_string()],
            ZeroSharePolicy::AddEpsilon(1e-6),
        )
        .unwrap();
        assert_eq!(design.rows().len(), 4);
        assert!(design.warnings().is_empty());
    }

    #[test]
    fn transform_requires_observed_shares() {
        let m = matrix_with(
            vec![0.5, 0.5],
            &[("size", vec![4.0, 2.0])],
            vec![1.0, 2.0],
            1,
            2,
        );
        // rebuild without observed shares
        let bare = InteractionMatrix::new(m.origins().to_vec(), m.locations().to_vec()).unwrap();
        assert!(matches!(
            log_centering_transform(&bare, &["size".to_string()], ZeroSharePolicy::Drop),
            Err(Error::MissingStage(_))
        ));
    }

    #[test]
    fn noise_free_two_attribute_recovery() {
        // Forward-generate from exponents (1.0, -2.0) with a cost column.
        let mut rng = StdRng::seed_from_u64(33);
        let (i, j) = (8, 5);
        let size: Vec<f64> = (0..j).map(|_| rng.gen_range(5.0..50.0)).collect();
        let costs: Vec<f64> = (0..i * j).map(|_| rng.gen_range(2.0..40.0)).collect();
        let size_pairs: Vec<f64> = (0..i * j).map(|idx| size[idx % j]).collect();
        let shares = forward_shares(&[(&size_pairs, 1.0), (&costs, -2.0)], i, j);

        let m = matrix_with(shares, &[("size", size)], costs, i, j);
        let attrs = vec!["size".to_string(), "t".to_string()];
        let design = log_centering_transform(&m, &attrs, ZeroSharePolicy::Drop).unwrap();
        let fit = mci_fit(&design).unwrap();
        assert!((fit.coefficients()["size"] - 1.0).abs() < 1e-6);
        assert!((fit.coefficients()["t"] - (-2.0)).abs() < 1e-6);
        assert!(fit.gof().r_squared.unwrap() > 1.0 - 1e-9);

        // round trip: predicted shares reproduce the observations
        let predicted = mci_predict(&m, fit.coefficients()).unwrap();
        let observed = m.observed_probabilities().unwrap();
        for idx in 0..m.pair_count() {
            assert!((predicted.probabilities().unwrap()[idx] - observed[idx]).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_regression_has_unit_coefficient() {
        // Shares generated with exponent exactly 1 on a single attribute.
        let mut rng = StdRng::seed_from_u64(9);
        let (i, j) = (4, 3);
        let size: Vec<f64> = (0..j).map(|_| rng.gen_range(1.0..20.0)).collect();
        let size_pairs: Vec<f64> = (0..i * j).map(|idx| size[idx % j]).collect();
        let shares = forward_shares(&[(&size_pairs, 1.0)], i, j);
        let m = matrix_with(
            shares,
            &[("size", size)],
            (0..i * j).map(|_| 1.0).collect(),
            i,
            j,
        );
        let design =
            log_centering_transform(&m, &["size".to_string()], ZeroSharePolicy::Drop).unwrap();
        let fit = mci_fit(&design).unwrap();
        assert!((fit.coefficients()["size"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_attribute_column_is_collinear() {
        let mut rng = StdRng::seed_from_u64(17);
        let (i, j) = (3, 3);
        let size: Vec<f64> = (0..j).map(|_| rng.gen_range(1.0..20.0)).collect();
        let mut shares = Vec::new();
        for _ in 0..i {
            let raw: Vec<f64> = (0..j).map(|_| rng.gen_range(0.1..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            shares.extend(raw.iter().map(|r| r / sum));
        }
        let m = matrix_with(
            shares,
            &[("size", size.clone()), ("size2", size)],
            (0..i * j).map(|_| 1.0).collect(),
            i,
            j,
        );
        let attrs = vec!["size".to_string(), "size2".to_string()];
        let design = log_centering_transform(&m, &attrs, ZeroSharePolicy::Drop).unwrap();
        match mci_fit(&design) {
            Err(Error::Collinear(message)) => assert!(message.contains("size2")),
            other => panic!("expected collinearity error, got {other:?}"),
        }
    }

    #[test]
    fn zero_coefficients_predict_uniform_shares() {
        let m = matrix_with(
            vec![0.8, 0.2, 0.3, 0.7],
            &[("size", vec![4.0, 2.0])],
            vec![1.0, 2.0, 3.0, 4.0],
            2,
            2,
        );
        let coefficients: IndexMap<String, f64> =
            [("size".to_string(), 0.0)].into_iter().collect();
        let predicted = mci_predict(&m, &coefficients).unwrap();
        for idx in 0..4 {
            assert!((predicted.probabilities().unwrap()[idx] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_coefficient_reproduces_attribute_shares() {
        // With H = 1 and g = 1, predicted shares are A / sum(A).
        let size = vec![6.0, 3.0, 1.0];
        let m = matrix_with(
            vec![0.5, 0.3, 0.2],
            &[("size", size.clone())],
            vec![1.0, 1.0, 1.0],
            1,
            3,
        );
        let coefficients: IndexMap<String, f64> =
            [("size".to_string(), 1.0)].into_iter().collect();
        let predicted = mci_predict(&m, &coefficients).unwrap();
        let total: f64 = size.iter().sum();
        for (j, s) in size.iter().enumerate() {
            assert!((predicted.probability(0, j).unwrap() - s / total).abs() < 1e-12);
        }
    }

    #[test]
    fn prediction_is_invariant_to_attribute_scaling() {
        let mut rng = StdRng::seed_from_u64(41);
        let (i, j) = (3, 4);
        let size: Vec<f64> = (0..j).map(|_| rng.gen_range(1.0..30.0)).collect();
        let scaled: Vec<f64> = size.iter().map(|s| s * 4.2).collect();
        let costs: Vec<f64> = (0..i * j).map(|_| rng.gen_range(1.0..30.0)).collect();
        let shares: Vec<f64> = {
            let mut acc = Vec::new();
            for _ in 0..i {
                let raw: Vec<f64> = (0..j).map(|_| rng.gen_range(0.1..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                acc.extend(raw.iter().map(|r| r / sum));
            }
            acc
        };
        let coefficients: IndexMap<String, f64> =
            [("size".to_string(), 1.4), ("t".to_string(), -0.8)]
                .into_iter()
                .collect();
        let base = matrix_with(shares.clone(), &[("size", size)], costs.clone(), i, j);
        let scaled = matrix_with(shares, &[("size", scaled)], costs, i, j);
        let p1 = mci_predict(&base, &coefficients).unwrap();
        let p2 = mci_predict(&scaled, &coefficients).unwrap();
        for idx in 0..i * j {
            let diff =
                (p1.probabilities().unwrap()[idx] - p2.probabilities().unwrap()[idx]).abs();
            assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn predicted_rows_sum_to_one() {
        let m = matrix_with(
            vec![0.8, 0.2, 0.3, 0.7],
            &[("size", vec![4.0, 2.0])],
            vec![1.0, 2.0, 3.0, 4.0],
            2,
            2,
        );
        let coefficients: IndexMap<String, f64> =
            [("size".to_string(), 1.7), ("t".to_string(), -2.3)]
                .into_iter()
                .collect();
        let predicted = mci_predict(&m, &coefficients).unwrap();
        let p = predicted.probabilities().unwrap();
        for i in 0..2 {
            let sum: f64 = p[i * 2..(i + 1) * 2].iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_attribute_is_a_domain_error() {
        // attribute positivity is enforced at construction, so exercise the
        // cost column: a zero cost must be rejected for the "t" attribute
        let m = matrix_with(
            vec![0.5, 0.5],
            &[("size", vec![4.0, 2.0])],
            vec![0.0, 2.0],
            1,
            2,
        );
        assert!(matches!(
            log_centering_transform(&m, &["t".to_string()], ZeroSharePolicy::Drop),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn fit_needs_more_rows_than_attributes() {
        let m = matrix_with(
            vec![0.8, 0.2],
            &[("size", vec![4.0, 2.0])],
            vec![1.0, 2.0],
            1,
            2,
        );
        let attrs = vec!["size".to_string(), "t".to_string()];
        let design = log_centering_transform(&m, &attrs, ZeroSharePolicy::Drop).unwrap();
        assert!(matches!(mci_fit(&design), Err(Error::Dimension(_))));
    }
}
