//! Property tests for the model invariants: normalization, conservation,
//! scale invariance, monotonicity, centering identities, and metric ordering.

use std::collections::HashMap;

use marketflow_core::{
    cd_probabilities, fca2s, flows, gof_metrics, hansen, haversine_km, log_centering_transform,
    market_areas, probabilities, utilities, CDParams, CostMatrix, CostSource, CostUnit,
    CustomerOrigin, DecaySpec, GeoPoint, HuffParams, InteractionMatrix, MciRow, ObservedData,
    SupplyLocation, ZeroSharePolicy,
};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    rows: usize,
    cols: usize,
    demands: Vec<f64>,
    attractions: Vec<f64>,
    costs: Vec<f64>,
}

fn instance(max_i: usize, max_j: usize) -> impl Strategy<Value = Instance> {
    (1..=max_i, 1..=max_j).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(0.0f64..400.0, rows),
            prop::collection::vec(0.5f64..80.0, cols),
            prop::collection::vec(1.0f64..40.0, rows * cols),
        )
            .prop_map(move |(demands, attractions, costs)| Instance {
                rows,
                cols,
                demands,
                attractions,
                costs,
            })
    })
}

fn decay_spec() -> impl Strategy<Value = DecaySpec> {
    prop_oneof![
        (0.05f64..3.0).prop_map(|l| DecaySpec::power(l).unwrap()),
        (0.01f64..0.8).prop_map(|l| DecaySpec::exponential(l).unwrap()),
        ((-4.0f64..4.0), (0.02f64..0.8)).prop_map(|(a, b)| DecaySpec::logistic(a, b).unwrap()),
    ]
}

fn build(instance: &Instance) -> InteractionMatrix {
    let origins: Vec<CustomerOrigin> = instance
        .demands
        .iter()
        .enumerate()
        .map(|(k, d)| {
            CustomerOrigin::new(GeoPoint::new(format!("o{k}"), 0.0, 0.0).unwrap(), *d).unwrap()
        })
        .collect();
    let locations: Vec<SupplyLocation> = instance
        .attractions
        .iter()
        .enumerate()
        .map(|(k, a)| {
            SupplyLocation::new(GeoPoint::new(format!("l{k}"), 0.0, 0.0).unwrap(), *a).unwrap()
        })
        .collect();
    let external = CostMatrix::new(
        instance.rows,
        instance.cols,
        CostUnit::Minutes,
        instance.costs.clone(),
    )
    .unwrap();
    InteractionMatrix::new(origins, locations)
        .unwrap()
        .with_transport_costs(&CostSource::External(external), 0.1)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haversine_symmetry_and_triangle_inequality(
        lat_a in -89.0f64..89.0, lon_a in -179.0f64..179.0,
        lat_b in -89.0f64..89.0, lon_b in -179.0f64..179.0,
        lat_c in -89.0f64..89.0, lon_c in -179.0f64..179.0,
    ) {
        let a = GeoPoint::new("a", lat_a, lon_a).unwrap();
        let b = GeoPoint::new("b", lat_b, lon_b).unwrap();
        let c = GeoPoint::new("c", lat_c, lon_c).unwrap();
        prop_assert_eq!(haversine_km(&a, &b), haversine_km(&b, &a));
        prop_assert!(haversine_km(&a, &b) >= 0.0);
        prop_assert!(haversine_km(&a, &b) <= haversine_km(&a, &c) + haversine_km(&c, &b) + 1e-9);
    }

    #[test]
    fn decay_is_strictly_monotone_and_positive(
        spec in decay_spec(),
        t1 in 0.1f64..200.0,
        step in 0.5f64..50.0,
    ) {
        let t2 = t1 + step;
        let w1 = spec.eval(t1).unwrap();
        let w2 = spec.eval(t2).unwrap();
        prop_assert!(w1 > 0.0);
        prop_assert!(w2 > 0.0);
        prop_assert!(w2 < w1);
    }

    #[test]
    fn probability_rows_are_normalized(
        inst in instance(5, 5),
        gamma in -0.5f64..2.0,
        spec in decay_spec(),
    ) {
        let m = build(&inst);
        let m = probabilities(&utilities(&m, &HuffParams::new(gamma, spec)).unwrap()).unwrap();
        let p = m.probabilities().unwrap();
        for i in 0..inst.rows {
            let sum: f64 = p[i * inst.cols..(i + 1) * inst.cols].iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            for v in &p[i * inst.cols..(i + 1) * inst.cols] {
                prop_assert!((0.0..=1.0).contains(v));
            }
        }
    }

    #[test]
    fn probabilities_are_invariant_to_attraction_scaling(
        inst in instance(4, 4),
        gamma in -0.5f64..2.0,
        spec in decay_spec(),
        scale in 0.1f64..20.0,
    ) {
        let m = build(&inst);
        let mut scaled_inst = inst.clone();
        for a in &mut scaled_inst.attractions {
            *a *= scale;
        }
        let scaled = build(&scaled_inst);
        let params = HuffParams::new(gamma, spec);
        let p1 = probabilities(&utilities(&m, &params).unwrap()).unwrap();
        let p2 = probabilities(&utilities(&scaled, &params).unwrap()).unwrap();
        for idx in 0..inst.rows * inst.cols {
            let diff = (p1.probabilities().unwrap()[idx] - p2.probabilities().unwrap()[idx]).abs();
            prop_assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn market_areas_conserve_demand(
        inst in instance(5, 5),
        gamma in 0.0f64..2.0,
        spec in decay_spec(),
    ) {
        let m = build(&inst);
        let m = flows(&probabilities(&utilities(&m, &HuffParams::new(gamma, spec)).unwrap()).unwrap()).unwrap();
        let areas = market_areas(&m).unwrap();
        let demand_total: f64 = inst.demands.iter().sum();
        let area_total = areas.demand_total();
        if demand_total > 0.0 {
            prop_assert!((area_total - demand_total).abs() <= 1e-9 * demand_total);
        } else {
            prop_assert_eq!(area_total, 0.0);
        }
    }

    #[test]
    fn raising_one_cost_moves_shares_away_from_that_pair(
        inst in instance(4, 4),
        bump in 0.5f64..10.0,
        pair_seed in 0usize..1000,
    ) {
        // moderate, fixed decay so the utility change stays well above
        // floating-point noise
        prop_assume!(inst.cols >= 2);
        let params = HuffParams::new(1.0, DecaySpec::power(1.5).unwrap());
        let m = build(&inst);
        let i = pair_seed % inst.rows;
        let j = (pair_seed / inst.rows) % inst.cols;

        let mut bumped_inst = inst.clone();
        bumped_inst.costs[i * inst.cols + j] += bump;
        let bumped = build(&bumped_inst);

        let base = probabilities(&utilities(&m, &params).unwrap()).unwrap();
        let moved = probabilities(&utilities(&bumped, &params).unwrap()).unwrap();
        prop_assert!(moved.probability(i, j).unwrap() < base.probability(i, j).unwrap());
        for k in 0..inst.cols {
            if k != j {
                prop_assert!(moved.probability(i, k).unwrap() > base.probability(i, k).unwrap());
            }
        }
    }

    #[test]
    fn cd_with_zero_beta_equals_plain_huff(
        inst in instance(4, 4),
        gamma in 0.0f64..2.0,
        lambda in 0.01f64..0.8,
        cluster_seed in prop::collection::vec(0.2f64..8.0, 5),
    ) {
        let m = build(&inst);
        let base = HuffParams::new(gamma, DecaySpec::exponential(lambda).unwrap());
        let clustering: indexmap::IndexMap<String, f64> = (0..inst.cols)
            .map(|j| (format!("l{j}"), cluster_seed[j % cluster_seed.len()]))
            .collect();
        let cd = cd_probabilities(&m, &CDParams::new(base, 0.0, 1.0, 1.0).unwrap(), &clustering).unwrap();
        let plain = probabilities(&utilities(&m, &base).unwrap()).unwrap();
        for idx in 0..inst.rows * inst.cols {
            let diff = (cd.probabilities().unwrap()[idx] - plain.probabilities().unwrap()[idx]).abs();
            prop_assert!(diff <= 1e-12);
        }
    }

    #[test]
    fn mci_design_columns_center_to_zero(
        inst in instance(4, 4),
        raw_shares in prop::collection::vec(0.05f64..1.0, 16),
    ) {
        prop_assume!(inst.cols >= 2);
        let m = build(&inst);
        let mut shares = Vec::with_capacity(inst.rows * inst.cols);
        for i in 0..inst.rows {
            let row = &raw_shares[..inst.cols];
            let _ = i;
            let sum: f64 = row.iter().sum();
            shares.extend(row.iter().map(|s| s / sum));
        }
        let m = m.with_observed_probabilities(shares).unwrap();
        let design = log_centering_transform(&m, &["t".to_string()], ZeroSharePolicy::Drop).unwrap();
        for i in 0..inst.rows {
            let rows: Vec<&MciRow> = design
                .rows()
                .iter()
                .filter(|r| r.origin_id == format!("o{i}"))
                .collect();
            let response_sum: f64 = rows.iter().map(|r| r.response).sum();
            let regressor_sum: f64 = rows.iter().map(|r| r.regressors[0]).sum();
            prop_assert!(response_sum.abs() <= 1e-9);
            prop_assert!(regressor_sum.abs() <= 1e-9);
        }
    }

    #[test]
    fn rmse_dominates_mae(
        observed in prop::collection::vec(-100.0f64..100.0, 2..40),
        noise in prop::collection::vec(-50.0f64..50.0, 2..40),
    ) {
        let n = observed.len().min(noise.len());
        let predicted: Vec<f64> = observed[..n]
            .iter()
            .zip(&noise[..n])
            .map(|(o, e)| o + e)
            .collect();
        let gof = gof_metrics(&observed[..n], &predicted).unwrap();
        prop_assert!(gof.rmse >= gof.mae);
    }

    #[test]
    fn hansen_monotonicity_in_opportunities_and_costs(
        inst in instance(4, 4),
        extra in 0.5f64..30.0,
        seed in 0usize..1000,
    ) {
        let m = build(&inst);
        let decay = DecaySpec::power(1.5).unwrap();
        let opportunities: HashMap<String, f64> = (0..inst.cols)
            .map(|j| (format!("l{j}"), 0.5 + inst.attractions[j]))
            .collect();
        let base = hansen(&m, &opportunities, &decay).unwrap();

        // raising one opportunity weakly increases every origin's value
        let j = seed % inst.cols;
        let mut more = opportunities.clone();
        *more.get_mut(&format!("l{j}")).unwrap() += extra;
        let raised = hansen(&m, &more, &decay).unwrap();
        for (id, v) in base.per_origin() {
            prop_assert!(raised.per_origin()[id] >= *v);
        }

        // cutting one pair's cost strictly increases that origin's value
        let i = seed % inst.rows;
        let mut closer_inst = inst.clone();
        let idx = i * inst.cols + j;
        closer_inst.costs[idx] = (closer_inst.costs[idx] * 0.5).max(0.2);
        prop_assume!(closer_inst.costs[idx] < inst.costs[idx]);
        let closer = hansen(&build(&closer_inst), &opportunities, &decay).unwrap();
        let origin_id = format!("o{i}");
        prop_assert!(closer.per_origin()[&origin_id] > base.per_origin()[&origin_id]);
    }

    #[test]
    fn fca2s_catchments_grow_with_threshold(
        inst in instance(4, 4),
        d0 in 5.0f64..20.0,
        widen in 1.0f64..20.0,
    ) {
        let m = build(&inst);
        let supply: HashMap<String, f64> = (0..inst.cols)
            .map(|j| (format!("l{j}"), 1.0 + inst.attractions[j]))
            .collect();
        let population: HashMap<String, f64> = (0..inst.rows)
            .map(|i| (format!("o{i}"), 1.0 + inst.demands[i]))
            .collect();
        let narrow = fca2s(&m, &supply, &population, d0).unwrap();
        let wide = fca2s(&m, &supply, &population, d0 + widen).unwrap();
        // membership is monotone: every pair inside the narrow catchment
        // stays inside the wide one
        let costs = m.costs().unwrap();
        for idx in 0..inst.rows * inst.cols {
            if costs[idx] <= d0 {
                prop_assert!(costs[idx] <= d0 + widen);
            }
        }
        // a location reachable by someone under the narrow threshold keeps a
        // positive denominator under the wide one, so warnings cannot grow
        prop_assert!(wide.warnings().len() <= narrow.warnings().len());
    }

    #[test]
    fn observed_share_maps_reject_bad_rows(
        good in 0.0f64..1.0,
    ) {
        let mut values = HashMap::new();
        values.insert(("o1".to_string(), "l1".to_string()), good);
        values.insert(("o1".to_string(), "l2".to_string()), 1.0 - good);
        prop_assert!(ObservedData::shares(values).is_ok());
    }
}
