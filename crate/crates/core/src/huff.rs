//! The basic Huff pipeline (utilities, probabilities, flows, market areas)
//! and the Competing Destinations extension.
//!
//! Stages are explicit: each takes the matrix a previous stage produced and
//! returns an enriched copy. The classical model is `utility = A^gamma *
//! t^-lambda`; the decay factor is pluggable, so power decay reproduces the
//! classical form while exponential and logistic variants share the rest of
//! the pipeline.

use indexmap::IndexMap;

use crate::decay::{DecayKind, DecaySpec};
use crate::error::{Error, Result};
use crate::geo::{self, CostMatrix, GeoPoint};
use crate::model::{InteractionMatrix, SupplyLocation};

/// Weighting parameters of the basic model: attraction exponent plus decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuffParams {
    /// Attraction exponent gamma. Fitted values may take any sign.
    pub gamma: f64,
    pub decay: DecaySpec,
}

impl HuffParams {
    pub fn new(gamma: f64, decay: DecaySpec) -> Self {
        Self { gamma, decay }
    }
}

/// Parameters of the Competing Destinations model: the base utility plus the
/// clustering exponent beta and the clustering-indicator shape (alpha, delta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDParams {
    base: HuffParams,
    beta: f64,
    alpha: f64,
    delta: f64,
}

impl CDParams {
    /// Standard form: the utility decay must be exponential. Use
    /// [`CDParams::with_any_decay`] to compare other families.
    pub fn new(base: HuffParams, beta: f64, alpha: f64, delta: f64) -> Result<Self> {
        if base.decay.kind() != DecayKind::Exponential {
            return Err(Error::InvalidValue(
                "competing destinations uses exponential decay; call with_any_decay to override"
                    .into(),
            ));
        }
        Self::with_any_decay(base, beta, alpha, delta)
    }

    /// Relaxed constructor allowing any decay family in the utility term.
    pub fn with_any_decay(base: HuffParams, beta: f64, alpha: f64, delta: f64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("alpha", alpha), ("delta", delta)] {
            if !v.is_finite() {
                return Err(Error::InvalidValue(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(Self {
            base,
            beta,
            alpha,
            delta,
        })
    }

    pub fn base(&self) -> &HuffParams {
        &self.base
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Total market area `T_j` per location, in demand units.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketAreas {
    totals: IndexMap<String, f64>,
}

impl MarketAreas {
    pub fn totals(&self) -> &IndexMap<String, f64> {
        &self.totals
    }

    pub fn get(&self, location_id: &str) -> Option<f64> {
        self.totals.get(location_id).copied()
    }

    /// Sum over locations; equals total demand by construction.
    pub fn demand_total(&self) -> f64 {
        self.totals.values().sum()
    }
}

/// Computes `U_ij = A_j^gamma * w(t_ij)` for every pair.
pub fn utilities(matrix: &InteractionMatrix, params: &HuffParams) -> Result<InteractionMatrix> {
    if !params.gamma.is_finite() {
        return Err(Error::InvalidValue(format!(
            "gamma must be finite, got {}",
            params.gamma
        )));
    }
    let costs = matrix.costs().ok_or_else(|| {
        Error::MissingStage("transport costs must be set before utilities".into())
    })?;
    let cols = matrix.location_count();
    let mut values = Vec::with_capacity(costs.len());
    for (idx, &t) in costs.iter().enumerate() {
        let attraction = matrix.locations()[idx % cols].attraction();
        values.push(attraction.powf(params.gamma) * params.decay.eval(t)?);
    }
    Ok(matrix.replacing_utilities(values))
}

/// Normalizes utilities into interaction probabilities `p_ij = U_ij / sum_j U_ij`.
pub fn probabilities(matrix: &InteractionMatrix) -> Result<InteractionMatrix> {
    let utilities = matrix.utilities().ok_or_else(|| {
        Error::MissingStage("utilities must be computed before probabilities".into())
    })?;
    let cols = matrix.location_count();
    let mut values = Vec::with_capacity(utilities.len());
    for (i, origin) in matrix.origins().iter().enumerate() {
        let row = &utilities[i * cols..(i + 1) * cols];
        let sum: f64 = row.iter().sum();
        if !sum.is_finite() {
            return Err(Error::Domain(format!(
                "utility sum for origin {} is not finite",
                origin.id()
            )));
        }
        if sum == 0.0 {
            return Err(Error::DegenerateOrigin(format!(
                "all utilities are zero for origin {}",
                origin.id()
            )));
        }
        values.extend(row.iter().map(|u| u / sum));
    }
    Ok(matrix.replacing_probabilities(values))
}

/// Scales probabilities by origin demand: `E_ij = p_ij * C_i`.
pub fn flows(matrix: &InteractionMatrix) -> Result<InteractionMatrix> {
    let probabilities = matrix.probabilities().ok_or_else(|| {
        Error::MissingStage("probabilities must be computed before flows".into())
    })?;
    let cols = matrix.location_count();
    let values = probabilities
        .iter()
        .enumerate()
        .map(|(idx, p)| p * matrix.origins()[idx / cols].demand())
        .collect();
    Ok(matrix.replacing_flows(values))
}

/// Column sums of the flows: `T_j = sum_i E_ij`.
pub fn market_areas(matrix: &InteractionMatrix) -> Result<MarketAreas> {
    let flows = matrix
        .flows()
        .ok_or_else(|| Error::MissingStage("flows must be computed before market areas".into()))?;
    let cols = matrix.location_count();
    let mut totals: Vec<f64> = vec![0.0; cols];
    for (idx, &flow) in flows.iter().enumerate() {
        totals[idx % cols] += flow;
    }
    Ok(MarketAreas {
        totals: matrix
            .locations()
            .iter()
            .zip(totals)
            .map(|(l, t)| (l.id().to_string(), t))
            .collect(),
    })
}

/// Haversine location-to-location costs with the floor applied off the
/// diagonal; the diagonal is left at zero and ignored downstream.
pub fn inter_location_costs(locations: &[SupplyLocation], cost_floor: f64) -> Result<CostMatrix> {
    if !cost_floor.is_finite() || cost_floor < 0.0 {
        return Err(Error::InvalidValue(format!(
            "cost floor must be a non-negative number, got {cost_floor}"
        )));
    }
    let points: Vec<GeoPoint> = locations.iter().map(|l| l.point().clone()).collect();
    let raw = geo::distance_matrix(&points, &points)?;
    let n = locations.len();
    let mut values = raw.values().to_vec();
    for (idx, v) in values.iter_mut().enumerate() {
        if idx / n != idx % n && *v < cost_floor {
            *v = cost_floor;
        }
    }
    CostMatrix::new(n, n, raw.unit(), values)
}

/// Clustering indicator `C_j = sum_{k != j} A_k^alpha / t_jk^delta` measuring
/// competitor agglomeration around each location.
pub fn clustering_indicator(
    locations: &[SupplyLocation],
    inter_location_costs: &CostMatrix,
    alpha: f64,
    delta: f64,
) -> Result<IndexMap<String, f64>> {
    let n = locations.len();
    if n < 2 {
        return Err(Error::Dimension(
            "clustering indicator needs at least two locations".into(),
        ));
    }
    if inter_location_costs.rows() != n || inter_location_costs.cols() != n {
        return Err(Error::Dimension(format!(
            "inter-location cost matrix is {}x{}, expected {n}x{n}",
            inter_location_costs.rows(),
            inter_location_costs.cols()
        )));
    }
    if !alpha.is_finite() || !delta.is_finite() {
        return Err(Error::InvalidValue(
            "alpha and delta must be finite".into(),
        ));
    }
    let mut result = IndexMap::with_capacity(n);
    for (j, location) in locations.iter().enumerate() {
        let mut sum = 0.0;
        for (k, competitor) in locations.iter().enumerate() {
            if k == j {
                continue;
            }
            let t = inter_location_costs.get(j, k);
            if t <= 0.0 {
                return Err(Error::Domain(format!(
                    "inter-location cost between {} and {} must be positive off the diagonal",
                    location.id(),
                    competitor.id()
                )));
            }
            sum += competitor.attraction().powf(alpha) / t.powf(delta);
        }
        result.insert(location.id().to_string(), sum);
    }
    Ok(result)
}

/// Competing Destinations probabilities
/// `p_ij = A_j^gamma * w(t_ij) * C_j^beta / sum_j (same)`.
///
/// With beta = 0 this reduces to the basic model under the same decay.
pub fn cd_probabilities(
    matrix: &InteractionMatrix,
    params: &CDParams,
    clustering: &IndexMap<String, f64>,
) -> Result<InteractionMatrix> {
    if !params.base.gamma.is_finite() {
        return Err(Error::InvalidValue(format!(
            "gamma must be finite, got {}",
            params.base.gamma
        )));
    }
    let costs = matrix.costs().ok_or_else(|| {
        Error::MissingStage("transport costs must be set before probabilities".into())
    })?;
    let cluster_factors: Vec<f64> = matrix
        .locations()
        .iter()
        .map(|l| {
            let c = clustering.get(l.id()).copied().ok_or_else(|| {
                Error::InvalidValue(format!("missing clustering value for location {}", l.id()))
            })?;
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Domain(format!(
                    "clustering value for location {} must be positive, got {c}",
                    l.id()
                )));
            }
            Ok(c.powf(params.beta))
        })
        .collect::<Result<_>>()?;
    let cols = matrix.location_count();
    let mut values = Vec::with_capacity(costs.len());
    for (i, origin) in matrix.origins().iter().enumerate() {
        let mut numerators = Vec::with_capacity(cols);
        for j in 0..cols {
            let t = costs[i * cols + j];
            let attraction = matrix.locations()[j].attraction();
            numerators.push(
                attraction.powf(params.base.gamma)
                    * params.base.decay.eval(t)?
                    * cluster_factors[j],
            );
        }
        let sum: f64 = numerators.iter().sum();
        if !sum.is_finite() {
            return Err(Error::Domain(format!(
                "utility sum for origin {} is not finite",
                origin.id()
            )));
        }
        if sum == 0.0 {
            return Err(Error::DegenerateOrigin(format!(
                "all utilities are zero for origin {}",
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
    use crate::geo::CostUnit;
    use crate::model::{CostSource, CustomerOrigin};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn origin(id: &str, demand: f64) -> CustomerOrigin {
        CustomerOrigin::new(GeoPoint::new(id, 0.0, 0.0).unwrap(), demand).unwrap()
    }

    fn location(id: &str, attraction: f64) -> SupplyLocation {
        SupplyLocation::new(GeoPoint::new(id, 0.0, 0.0).unwrap(), attraction).unwrap()
    }

    fn with_costs(
        origins: Vec<CustomerOrigin>,
        locations: Vec<SupplyLocation>,
        costs: Vec<f64>,
    ) -> InteractionMatrix {
        let rows = origins.len();
        let cols = locations.len();
        let m = InteractionMatrix::new(origins, locations).unwrap();
        let external = CostMatrix::new(rows, cols, CostUnit::Minutes, costs).unwrap();
        m.with_transport_costs(&CostSource::External(external), 0.0)
            .unwrap()
    }

    #[test]
    fn utility_matches_classical_power_form() {
        // A = 100, t = 10, gamma = 1, lambda = 2 -> 100 * 10^-2 = 1.
        let m = with_costs(vec![origin("o1", 1.0)], vec![location("l1", 100.0)], vec![10.0]);
        let params = HuffParams::new(1.0, DecaySpec::power(2.0).unwrap());
        let m = utilities(&m, &params).unwrap();
        assert!((m.utility(0, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn utility_with_all_unity_factors() {
        let m = with_costs(vec![origin("o1", 1.0)], vec![location("l1", 1.0)], vec![42.0]);
        let params = HuffParams::new(0.0, DecaySpec::exponential(0.0).unwrap());
        let m = utilities(&m, &params).unwrap();
        assert_eq!(m.utility(0, 0), Some(1.0));
    }

    #[test]
    fn utility_matches_direct_formula_evaluation() {
        let m = with_costs(vec![origin("o1", 1.0)], vec![location("l1", 50.0)], vec![5.0]);
        let params = HuffParams::new(0.9, DecaySpec::power(1.5).unwrap());
        let m = utilities(&m, &params).unwrap();
        let expected = 50f64.powf(0.9) * 5f64.powf(-1.5);
        assert!((m.utility(0, 0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn utilities_require_transport_costs() {
        let m = InteractionMatrix::new(vec![origin("o1", 1.0)], vec![location("l1", 1.0)])
            .unwrap();
        let params = HuffParams::new(1.0, DecaySpec::power(2.0).unwrap());
        assert!(matches!(
            utilities(&m, &params),
            Err(Error::MissingStage(_))
        ));
    }

    #[test]
    fn equidistant_identical_locations_split_evenly() {
        let m = with_costs(
            vec![origin("o1", 1.0)],
            vec![location("l1", 10.0), location("l2", 10.0)],
            vec![7.0, 7.0],
        );
        let m = utilities(&m, &HuffParams::new(1.0, DecaySpec::power(2.0).unwrap())).unwrap();
        let m = probabilities(&m).unwrap();
        assert!((m.probability(0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.probability(0, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_location_takes_the_whole_share() {
        let m = with_costs(vec![origin("o1", 1.0)], vec![location("l1", 3.0)], vec![9.0]);
        let m = utilities(&m, &HuffParams::new(1.0, DecaySpec::power(2.0).unwrap())).unwrap();
        let m = probabilities(&m).unwrap();
        assert_eq!(m.probability(0, 0), Some(1.0));
    }

    #[test]
    fn probabilities_match_hand_normalized_utilities() {
        // U = (100 * 10^-2, 50 * 10^-2) = (1.0, 0.5) -> p = (2/3, 1/3).
        let m = with_costs(
            vec![origin("o1", 1.0)],
            vec![location("l1", 100.0), location("l2", 50.0)],
            vec![10.0, 10.0],
        );
        let m = utilities(&m, &HuffParams::new(1.0, DecaySpec::power(2.0).unwrap())).unwrap();
        let m = probabilities(&m).unwrap();
        assert!((m.probability(0, 0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.probability(0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_require_utilities() {
        let m = with_costs(vec![origin("o1", 1.0)], vec![location("l1", 1.0)], vec![1.0]);
        assert!(matches!(probabilities(&m), Err(Error::MissingStage(_))));
    }

    #[test]
    fn flows_scale_probabilities_by_demand() {
        let m = with_costs(
            vec![origin("o1", 900.0)],
            vec![location("l1", 100.0), location("l2", 50.0)],
            vec![10.0, 10.0],
        );
        let m = utilities(&m, &HuffParams::new(1.0, DecaySpec::power(2.0).unwrap())).unwrap();
        let m = flows(&probabilities(&m).unwrap()).unwrap();
        assert!((m.flow(0, 0).unwrap() - 600.0).abs() < 1e-9);
        assert!((m.flow(0, 1).unwrap() - 300.0).abs() < 1e-9);
    }

    #[test]
    fn zero_demand_origin_sends_no_flow() {
        let m = with_costs(
            vec![origin("o1", 0.0)],
            vec![location("l1", 100.0), location("l2", 50.0)],
            vec![10.0, 10.0],
        );
        let m = utilities(&m, &HuffParams::new(1.0, DecaySpec::power(2.0).unwrap())).unwrap();
        let m = flows(&probabilities(&m).unwrap()).unwrap();
        assert_eq!(m.flow(0, 0), Some(0.0));
        assert_eq!(m.flow(0, 1), Some(0.0));
    }

    #[test]
    fn market_areas_are_column_sums_and_conserve_demand() {
        let mut rng = StdRng::seed_from_u64(11);
        let origins: Vec<CustomerOrigin> = (0..3)
            .map(|i| origin(&format!("o{i}"), rng.gen_range(10.0..500.0)))
            .collect();
        let locations: Vec<SupplyLocation> = (0..4)
            .map(|j| location(&format!("l{j}"), rng.gen_range(1.0..50.0)))
            .collect();
        let costs: Vec<f64> = (0..12).map(|_| rng.gen_range(1.0..30.0)).collect();
        let demand_total: f64 = origins.iter().map(|o| o.demand()).sum();

        let m = with_costs(origins, locations, costs);
        let m = utilities(&m, &HuffParams::new(0.8, DecaySpec::power(1.7).unwrap())).unwrap();
        let m = flows(&probabilities(&m).unwrap()).unwrap();
        let areas = market_areas(&m).unwrap();

        // brute-force column sums straight from the flow field
        for (j, loc) in m.locations().iter().enumerate() {
            let expected: f64 = (0..m.origin_count()).map(|i| m.flow(i, j).unwrap()).sum();
            assert!((areas.get(loc.id()).unwrap() - expected).abs() < 1e-12);
        }
        assert!((areas.demand_total() - demand_total).abs() <= 1e-9 * demand_total);
    }

    #[test]
    fn market_areas_with_all_probability_on_one_location() {
        // l2 is so remote that its exponential weight underflows to zero, so
        // every origin shops at l1: T = (300, 0).
        let m = with_costs(
            vec![origin("o1", 100.0), origin("o2", 200.0)],
            vec![location("l1", 10.0), location("l2", 10.0)],
            vec![1.0, 1000.0, 1.0, 1000.0],
        );
        let m = utilities(&m, &HuffParams::new(0.0, DecaySpec::exponential(1.0).unwrap()))
            .unwrap();
        let m = flows(&probabilities(&m).unwrap()).unwrap();
        let areas = market_areas(&m).unwrap();
        assert_eq!(areas.get("l1"), Some(300.0));
        assert_eq!(areas.get("l2"), Some(0.0));
    }

    #[test]
    fn clustering_indicator_single_competitor() {
        let locations = vec![location("l1", 10.0), location("l2", 10.0)];
        let costs = CostMatrix::new(2, 2, CostUnit::Minutes, vec![0.0, 10.0, 10.0, 0.0]).unwrap();
        let c = clustering_indicator(&locations, &costs, 1.0, 1.0).unwrap();
        assert!((c["l1"] - 1.0).abs() < 1e-15);
        assert!((c["l2"] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clustering_indicator_with_zero_exponents_counts_competitors() {
        let locations = vec![location("l1", 3.0), location("l2", 7.0), location("l3", 11.0)];
        let costs = CostMatrix::new(
            3,
            3,
            CostUnit::Minutes,
            vec![0.0, 5.0, 2.0, 5.0, 0.0, 9.0, 2.0, 9.0, 0.0],
        )
        .unwrap();
        let c = clustering_indicator(&locations, &costs, 0.0, 0.0).unwrap();
        for id in ["l1", "l2", "l3"] {
            assert!((c[id] - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn clustering_indicator_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(5);
        let locations: Vec<SupplyLocation> = (0..3)
            .map(|j| location(&format!("l{j}"), rng.gen_range(1.0..40.0)))
            .collect();
        let mut values = vec![0.0; 9];
        for j in 0..3 {
            for k in (j + 1)..3 {
                let t = rng.gen_range(1.0..20.0);
                values[j * 3 + k] = t;
                values[k * 3 + j] = t;
            }
        }
        let costs = CostMatrix::new(3, 3, CostUnit::Minutes, values.clone()).unwrap();
        let (alpha, delta) = (0.7, 1.3);
        let c = clustering_indicator(&locations, &costs, alpha, delta).unwrap();
        for (j, loc) in locations.iter().enumerate() {
            let mut expected = 0.0;
            for (k, competitor) in locations.iter().enumerate() {
                if k != j {
                    expected +=
                        competitor.attraction().powf(alpha) / values[j * 3 + k].powf(delta);
                }
            }
            assert!((c[loc.id()] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn clustering_indicator_needs_two_locations() {
        let locations = vec![location("l1", 10.0)];
        let costs = CostMatrix::new(1, 1, CostUnit::Minutes, vec![0.0]).unwrap();
        assert!(matches!(
            clustering_indicator(&locations, &costs, 1.0, 1.0),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn cd_with_zero_beta_reduces_to_huff() {
        let mut rng = StdRng::seed_from_u64(3);
        let origins: Vec<CustomerOrigin> = (0..3)
            .map(|i| origin(&format!("o{i}"), rng.gen_range(10.0..100.0)))
            .collect();
        let locations: Vec<SupplyLocation> = (0..4)
            .map(|j| location(&format!("l{j}"), rng.gen_range(1.0..40.0)))
            .collect();
        let costs: Vec<f64> = (0..12).map(|_| rng.gen_range(1.0..25.0)).collect();
        let m = with_costs(origins, locations.clone(), costs);

        let base = HuffParams::new(1.1, DecaySpec::exponential(0.2).unwrap());
        let clustering: IndexMap<String, f64> = locations
            .iter()
            .map(|l| (l.id().to_string(), rng.gen_range(0.5..5.0)))
            .collect();
        let cd_params = CDParams::new(base, 0.0, 1.0, 1.0).unwrap();
        let cd = cd_probabilities(&m, &cd_params, &clustering).unwrap();
        let plain = probabilities(&utilities(&m, &base).unwrap()).unwrap();
        for idx in 0..m.pair_count() {
            let (i, j) = (idx / 4, idx % 4);
            let diff = (cd.probability(i, j).unwrap() - plain.probability(i, j).unwrap()).abs();
            assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn cd_symmetric_pair_splits_evenly() {
        let m = with_costs(
            vec![origin("o1", 1.0)],
            vec![location("l1", 10.0), location("l2", 10.0)],
            vec![5.0, 5.0],
        );
        let base = HuffParams::new(1.0, DecaySpec::exponential(0.1).unwrap());
        let params = CDParams::new(base, 0.7, 1.0, 1.0).unwrap();
        let clustering: IndexMap<String, f64> =
            [("l1".to_string(), 2.0), ("l2".to_string(), 2.0)].into_iter().collect();
        let m = cd_probabilities(&m, &params, &clustering).unwrap();
        assert!((m.probability(0, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.probability(0, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cd_matches_direct_formula_on_two_by_three() {
        let origins = vec![origin("o1", 10.0), origin("o2", 20.0)];
        let locations = vec![location("l1", 5.0), location("l2", 9.0), location("l3", 2.0)];
        let costs = vec![3.0, 8.0, 5.0, 6.0, 2.0, 7.0];
        let m = with_costs(origins, locations.clone(), costs.clone());

        let (gamma, lambda, beta) = (1.2, 0.15, 1.0);
        let base = HuffParams::new(gamma, DecaySpec::exponential(lambda).unwrap());
        let params = CDParams::new(base, beta, 1.0, 1.0).unwrap();
        let clustering: IndexMap<String, f64> = [
            ("l1".to_string(), 1.5),
            ("l2".to_string(), 0.7),
            ("l3".to_string(), 2.4),
        ]
        .into_iter()
        .collect();
        let m = cd_probabilities(&m, &params, &clustering).unwrap();

        let attractions = [5.0_f64, 9.0, 2.0];
        let cluster = [1.5_f64, 0.7, 2.4];
        for i in 0..2 {
            let numerators: Vec<f64> = (0..3)
                .map(|j| {
                    attractions[j].powf(gamma)
                        * (-lambda * costs[i * 3 + j]).exp()
                        * cluster[j].powf(beta)
                })
                .collect();
            let sum: f64 = numerators.iter().sum();
            for j in 0..3 {
                assert!((m.probability(i, j).unwrap() - numerators[j] / sum).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cd_params_require_exponential_unless_relaxed() {
        let power_base = HuffParams::new(1.0, DecaySpec::power(2.0).unwrap());
        assert!(CDParams::new(power_base, 1.0, 1.0, 1.0).is_err());
        assert!(CDParams::with_any_decay(power_base, 1.0, 1.0, 1.0).is_ok());
    }
}
