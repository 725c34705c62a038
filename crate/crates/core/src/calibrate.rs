//! Nonlinear estimation of Huff weighting parameters from observed market
//! shares, customer flows, or location totals, plus goodness-of-fit metrics
//! for comparing decay families.
//!
//! Shares and flows are fitted by maximizing a multinomial likelihood over
//! destination choice per origin; totals carry no per-origin information and
//! are fitted by least squares. The optimizer is a self-contained downhill
//! simplex with seeded multi-start, so identical config and seed reproduce
//! bit-identical results.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::decay::{DecayKind, DecaySpec};
use crate::error::{Error, Result};
use crate::huff::{self, HuffParams};
use crate::model::InteractionMatrix;

/// Goodness-of-fit between observed and predicted values.
#[derive(Debug, Clone, PartialEq)]
pub struct GOFMetrics {
    /// 1 - SSR/SST about the observed mean; absent when the observations
    /// have zero variance.
    pub r_squared: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
    /// Multinomial log-likelihood; present for share/flow fits only.
    pub loglik: Option<f64>,
}

/// Standard comparison metrics. `rmse >= mae` always holds.
pub fn gof_metrics(observed: &[f64], predicted: &[f64]) -> Result<GOFMetrics> {
    if observed.len() != predicted.len() {
        return Err(Error::Dimension(format!(
            "observed and predicted lengths differ: {} vs {}",
            observed.len(),
            predicted.len()
        )));
    }
    if observed.len() < 2 {
        return Err(Error::Dimension(
            "goodness-of-fit needs at least two values".into(),
        ));
    }
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let sst: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    let ssr: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).powi(2))
        .sum();
    let mae = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).abs())
        .sum::<f64>()
        / n;
    Ok(GOFMetrics {
        r_squared: (sst > 0.0).then(|| 1.0 - ssr / sst),
        mae,
        rmse: (ssr / n).sqrt(),
        loglik: None,
    })
}

/// Outcome of a downhill-simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Best objective value after each iteration.
    pub trace: Vec<f64>,
}

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Derivative-free Nelder-Mead minimization with standard coefficients.
///
/// Converged means the spread of objective values across the simplex fell
/// below `tolerance` and the simplex diameter fell below `sqrt(tolerance)`;
/// the second condition rules out premature stops on symmetric vertex
/// configurations whose objective values coincide far from the minimum. A
/// non-finite objective at the initial point is an error; anywhere else the
/// vertex is penalized with +inf and the search continues.
pub fn simplex_minimize<F>(
    objective: F,
    initial: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<SimplexResult>
where
    F: Fn(&[f64]) -> f64,
{
    let n = initial.len();
    if n == 0 {
        return Err(Error::Dimension(
            "the initial point must have at least one dimension".into(),
        ));
    }
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::InvalidValue(format!(
            "tolerance must be > 0, got {tolerance}"
        )));
    }
    let eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let f_initial = eval(initial);
    if !f_initial.is_finite() {
        return Err(Error::NonFiniteObjective);
    }

    // initial simplex: perturb each coordinate by 5%, or a small absolute
    // step where it is zero
    let mut simplex: Vec<Vec<f64>> = vec![initial.to_vec()];
    for d in 0..n {
        let mut vertex = initial.to_vec();
        vertex[d] = if vertex[d] != 0.0 {
            vertex[d] * 1.05
        } else {
            0.00025
        };
        simplex.push(vertex);
    }
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    values.push(f_initial);
    values.extend(simplex[1..].iter().map(|v| eval(v)));

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        // ascending by objective; the stable sort keeps ties deterministic
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = order.iter().map(|&k| simplex[k].clone()).collect();
        values = order.iter().map(|&k| values[k]).collect();

        let diameter = simplex[1..]
            .iter()
            .flat_map(|vertex| {
                vertex
                    .iter()
                    .zip(&simplex[0])
                    .map(|(v, b)| (v - b).abs())
            })
            .fold(0.0_f64, f64::max);
        if values[n] - values[0] < tolerance && diameter < tolerance.sqrt() {
            converged = true;
            break;
        }
        if iterations == max_iterations {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for vertex in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(vertex) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= n as f64;
        }

        let worst = simplex[n].clone();
        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(c, w)| c + REFLECTION * (c - w))
            .collect();
        let f_reflected = eval(&reflected);

        if f_reflected < values[0] {
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + EXPANSION * (r - c))
                .collect();
            let f_expanded = eval(&expanded);
            if f_expanded < f_reflected {
                simplex[n] = expanded;
                values[n] = f_expanded;
            } else {
                simplex[n] = reflected;
                values[n] = f_reflected;
            }
        } else if f_reflected < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_reflected;
        } else {
            // contract toward the better of the reflected and worst points
            let outside = f_reflected < values[n];
            let target = if outside { &reflected } else { &worst };
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(target)
                .map(|(c, t)| c + CONTRACTION * (t - c))
                .collect();
            let f_contracted = eval(&contracted);
            let accepted = if outside {
                f_contracted <= f_reflected
            } else {
                f_contracted < values[n]
            };
            if accepted {
                simplex[n] = contracted;
                values[n] = f_contracted;
            } else {
                let best = simplex[0].clone();
                for k in 1..=n {
                    let shrunk: Vec<f64> = best
                        .iter()
                        .zip(&simplex[k])
                        .map(|(b, v)| b + SHRINK * (v - b))
                        .collect();
                    values[k] = eval(&shrunk);
                    simplex[k] = shrunk;
                }
            }
        }
        trace.push(values.iter().cloned().fold(f64::INFINITY, f64::min));
    }

    Ok(SimplexResult {
        argmin: simplex[0].clone(),
        value: values[0],
        converged,
        iterations,
        trace,
    })
}

/// Observed interaction data used for calibration.
#[derive(Debug, Clone)]
pub enum ObservedData {
    /// Market shares per (origin id, location id); each origin's shares sum
    /// to one within 1e-6. Missing pairs count as zero.
    Shares(HashMap<(String, String), f64>),
    /// Customer or expenditure flows per (origin id, location id).
    Flows(HashMap<(String, String), f64>),
    /// Total market areas per location id.
    Totals(HashMap<String, f64>),
}

impl ObservedData {
    pub fn shares(values: HashMap<(String, String), f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("observed shares must not be empty".into()));
        }
        let mut sums: HashMap<&str, f64> = HashMap::new();
        for ((origin, _), v) in &values {
            if !v.is_finite() || !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidValue(format!(
                    "observed shares must lie in [0, 1], got {v}"
                )));
            }
            *sums.entry(origin.as_str()).or_insert(0.0) += v;
        }
        for (origin, sum) in sums {
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidValue(format!(
                    "observed shares for origin {origin} sum to {sum}, expected 1"
                )));
            }
        }
        Ok(ObservedData::Shares(values))
    }

    pub fn flows(values: HashMap<(String, String), f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("observed flows must not be empty".into()));
        }
        if let Some((_, v)) = values.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!(
                "observed flows must be >= 0, got {v}"
            )));
        }
        Ok(ObservedData::Flows(values))
    }

    pub fn totals(values: HashMap<String, f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Dimension("observed totals must not be empty".into()));
        }
        if let Some((_, v)) = values.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!(
                "observed totals must be >= 0, got {v}"
            )));
        }
        Ok(ObservedData::Totals(values))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ObservedData::Shares(_) => "shares",
            ObservedData::Flows(_) => "flows",
            ObservedData::Totals(_) => "totals",
        }
    }
}

/// Densifies per-pair observations into origin-major order. Keys must
/// reference known ids; missing pairs default to zero.
fn align_pairs(
    matrix: &InteractionMatrix,
    values: &HashMap<(String, String), f64>,
) -> Result<Vec<f64>> {
    let origin_index: HashMap<&str, usize> = matrix
        .origins()
        .iter()
        .enumerate()
        .map(|(i, o)| (o.id(), i))
        .collect();
    let location_index: HashMap<&str, usize> = matrix
        .locations()
        .iter()
        .enumerate()
        .map(|(j, l)| (l.id(), j))
        .collect();
    let mut dense = vec![0.0; matrix.pair_count()];
    for ((origin, location), &v) in values {
        let i = *origin_index.get(origin.as_str()).ok_or_else(|| {
            Error::Dimension(format!("observed data references unknown origin id {origin}"))
        })?;
        let j = *location_index.get(location.as_str()).ok_or_else(|| {
            Error::Dimension(format!(
                "observed data references unknown location id {location}"
            ))
        })?;
        dense[i * matrix.location_count() + j] = v;
    }
    Ok(dense)
}

/// Densifies per-location observations in location order; missing locations
/// default to zero.
fn align_locations(matrix: &InteractionMatrix, values: &HashMap<String, f64>) -> Result<Vec<f64>> {
    let location_index: HashMap<&str, usize> = matrix
        .locations()
        .iter()
        .enumerate()
        .map(|(j, l)| (l.id(), j))
        .collect();
    let mut dense = vec![0.0; matrix.location_count()];
    for (location, &v) in values {
        let j = *location_index.get(location.as_str()).ok_or_else(|| {
            Error::Dimension(format!(
                "observed data references unknown location id {location}"
            ))
        })?;
        dense[j] = v;
    }
    Ok(dense)
}

enum ObjectiveKind {
    /// Negative multinomial log-likelihood over per-pair counts. `observed`
    /// keeps the raw aligned values for goodness-of-fit.
    Counts {
        counts: Vec<f64>,
        observed: Vec<f64>,
        shares: bool,
    },
    /// Sum of squared total-market-area residuals per location.
    Totals { observed: Vec<f64> },
}

/// A calibration objective over the parameter vector
/// `(gamma if fitted, decay parameters...)`.
pub struct HuffObjective {
    matrix: InteractionMatrix,
    kind: ObjectiveKind,
    decay_kind: DecayKind,
    fit_gamma: bool,
    fixed_gamma: f64,
    warnings: Vec<String>,
}

impl HuffObjective {
    /// Dimension of the parameter vector.
    pub fn dim(&self) -> usize {
        usize::from(self.fit_gamma) + self.decay_kind.param_count()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Decodes a parameter vector; `None` outside the feasible region
    /// (lambda > 0, b > 0).
    pub fn decode(&self, theta: &[f64]) -> Option<HuffParams> {
        if theta.len() != self.dim() {
            return None;
        }
        let mut next = theta.iter();
        let gamma = if self.fit_gamma {
            *next.next().unwrap()
        } else {
            self.fixed_gamma
        };
        if !gamma.is_finite() {
            return None;
        }
        let decay = match self.decay_kind {
            DecayKind::Power => {
                let lambda = *next.next().unwrap();
                (lambda.is_finite() && lambda > 0.0).then_some(DecaySpec::Power { lambda })?
            }
            DecayKind::Exponential => {
                let lambda = *next.next().unwrap();
                (lambda.is_finite() && lambda > 0.0)
                    .then_some(DecaySpec::Exponential { lambda })?
            }
            DecayKind::Logistic => {
                let a = *next.next().unwrap();
                let b = *next.next().unwrap();
                (a.is_finite() && b.is_finite() && b > 0.0)
                    .then_some(DecaySpec::Logistic { a, b })?
            }
        };
        Some(HuffParams { gamma, decay })
    }

    /// Objective value; +inf outside the feasible region or where the model
    /// fails to evaluate.
    pub fn value(&self, theta: &[f64]) -> f64 {
        let Some(params) = self.decode(theta) else {
            return f64::INFINITY;
        };
        let with_p = match huff::utilities(&self.matrix, &params)
            .and_then(|m| huff::probabilities(&m))
        {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        let value = match &self.kind {
            ObjectiveKind::Counts { counts, .. } => {
                let p = with_p.probabilities().expect("probabilities just computed");
                let mut neg_loglik = 0.0;
                for (n, p) in counts.iter().zip(p) {
                    if *n > 0.0 {
                        neg_loglik -= n * p.ln();
                    }
                }
                neg_loglik
            }
            ObjectiveKind::Totals { observed } => {
                let areas = match huff::flows(&with_p).and_then(|m| huff::market_areas(&m)) {
                    Ok(areas) => areas,
                    Err(_) => return f64::INFINITY,
                };
                areas
                    .totals()
                    .values()
                    .zip(observed)
                    .map(|(t, o)| (t - o).powi(2))
                    .sum()
            }
        };
        if value.is_nan() {
            f64::INFINITY
        } else {
            value
        }
    }

    /// Goodness-of-fit at the given parameters, on the same unit kind as
    /// the observations.
    pub fn gof_at(&self, params: &HuffParams) -> Result<GOFMetrics> {
        let with_p = huff::probabilities(&huff::utilities(&self.matrix, params)?)?;
        match &self.kind {
            ObjectiveKind::Counts {
                counts,
                observed,
                shares,
            } => {
                let p = with_p.probabilities().expect("probabilities just computed");
                let predicted: Vec<f64> = if *shares {
                    p.to_vec()
                } else {
                    huff::flows(&with_p)?
                        .flows()
                        .expect("flows just computed")
                        .to_vec()
                };
                let mut gof = gof_metrics(observed, &predicted)?;
                gof.loglik = Some(
                    counts
                        .iter()
                        .zip(p)
                        .filter(|(n, _)| **n > 0.0)
                        .map(|(n, p)| n * p.ln())
                        .sum(),
                );
                Ok(gof)
            }
            ObjectiveKind::Totals { observed } => {
                let areas = huff::market_areas(&huff::flows(&with_p)?)?;
                let predicted: Vec<f64> = areas.totals().values().copied().collect();
                gof_metrics(observed, &predicted)
            }
        }
    }
}

/// Builds the calibration objective for a decay family.
///
/// For shares and flows the objective is the negative multinomial
/// log-likelihood `-sum_ij n_ij log p_ij(theta)` with `n_ij` the observed
/// flows (or shares times origin demand); for totals it is the sum of squared
/// residuals of the location totals. When `fit_gamma` is false, gamma stays
/// at `fixed_gamma`.
pub fn build_objective(
    matrix: &InteractionMatrix,
    observed: &ObservedData,
    decay_kind: DecayKind,
    fit_gamma: bool,
    fixed_gamma: f64,
) -> Result<HuffObjective> {
    if matrix.costs().is_none() {
        return Err(Error::MissingStage(
            "transport costs must be set before building a calibration objective".into(),
        ));
    }
    if !fit_gamma && !fixed_gamma.is_finite() {
        return Err(Error::InvalidValue(format!(
            "fixed gamma must be finite, got {fixed_gamma}"
        )));
    }
    let mut warnings = Vec::new();
    let kind = match observed {
        ObservedData::Shares(values) => {
            let aligned = align_pairs(matrix, values)?;
            let counts: Vec<f64> = aligned
                .iter()
                .enumerate()
                .map(|(idx, share)| {
                    share * matrix.origins()[idx / matrix.location_count()].demand()
                })
                .collect();
            if counts.iter().all(|n| *n == 0.0) {
                warnings.push(
                    "observed shares carry zero total weight (all origin demands are zero); \
                     the likelihood objective is flat"
                        .into(),
                );
            }
            ObjectiveKind::Counts {
                counts,
                observed: aligned,
                shares: true,
            }
        }
        ObservedData::Flows(values) => {
            let aligned = align_pairs(matrix, values)?;
            if aligned.iter().all(|n| *n == 0.0) {
                warnings.push("all observed flows are zero; the likelihood objective is flat".into());
            }
            ObjectiveKind::Counts {
                counts: aligned.clone(),
                observed: aligned,
                shares: false,
            }
        }
        ObservedData::Totals(values) => {
            let aligned = align_locations(matrix, values)?;
            let observed_total: f64 = aligned.iter().sum();
            let demand_total: f64 = matrix.origins().iter().map(|o| o.demand()).sum();
            if demand_total > 0.0 {
                if (observed_total - demand_total).abs() > 0.01 * demand_total {
                    warnings.push(format!(
                        "observed totals sum to {observed_total} but demand sums to {demand_total} \
                         (difference above 1%); the model conserves demand, so totals are matched \
                         in shape only"
                    ));
                }
            } else if observed_total > 0.0 {
                warnings.push(
                    "total demand is zero, so predicted totals are identically zero".into(),
                );
            }
            ObjectiveKind::Totals { observed: aligned }
        }
    };
    Ok(HuffObjective {
        matrix: matrix.clone(),
        kind,
        decay_kind,
        fit_gamma,
        fixed_gamma,
        warnings,
    })
}

/// Options for [`fit_huff`], also the shape of the flat fit-config document
/// accepted by the CLI.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub initial_gamma: f64,
    pub initial_lambda: f64,
    pub initial_a: f64,
    pub initial_b: f64,
    /// Convergence tolerance on the simplex objective spread.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Number of additional jittered starts beyond the configured initial
    /// point.
    pub restarts: usize,
    pub seed: u64,
    /// None = fit gamma for shares/flows, fix it for totals (which alone
    /// under-identify gamma and the decay jointly).
    pub fit_gamma: Option<bool>,
    pub record_trace: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            initial_gamma: 1.0,
            initial_lambda: 1.0,
            initial_a: 0.0,
            initial_b: 0.5,
            tolerance: 1e-8,
            max_iterations: 2000,
            restarts: 3,
            seed: 0,
            fit_gamma: None,
            record_trace: false,
        }
    }
}

/// Result of a nonlinear calibration.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: HuffParams,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub gof: GOFMetrics,
    pub trace: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

fn initial_vector(config: &FitConfig, fit_gamma: bool, decay_kind: DecayKind) -> Vec<f64> {
    let mut initial = Vec::with_capacity(3);
    if fit_gamma {
        initial.push(config.initial_gamma);
    }
    match decay_kind {
        DecayKind::Power | DecayKind::Exponential => initial.push(config.initial_lambda),
        DecayKind::Logistic => {
            initial.push(config.initial_a);
            initial.push(config.initial_b);
        }
    }
    initial
}

/// Which parameter positions must stay positive (lambda, b).
fn positivity_mask(fit_gamma: bool, decay_kind: DecayKind) -> Vec<bool> {
    let mut mask = Vec::with_capacity(3);
    if fit_gamma {
        mask.push(false);
    }
    match decay_kind {
        DecayKind::Power | DecayKind::Exponential => mask.push(true),
        DecayKind::Logistic => {
            mask.push(false);
            mask.push(true);
        }
    }
    mask
}

/// Fits Huff weighting parameters to observed data with seeded multi-start
/// Nelder-Mead. Non-convergence is reported in the result, not as an error.
pub fn fit_huff(
    matrix: &InteractionMatrix,
    observed: &ObservedData,
    decay_kind: DecayKind,
    config: &FitConfig,
) -> Result<FitResult> {
    if config.max_iterations == 0 {
        return Err(Error::InvalidValue("max_iterations must be >= 1".into()));
    }
    let fit_gamma = config
        .fit_gamma
        .unwrap_or(!matches!(observed, ObservedData::Totals(_)));
    let mut warnings = Vec::new();
    if fit_gamma && matches!(observed, ObservedData::Totals(_)) {
        warnings.push(
            "fitting gamma and the decay jointly from totals may be under-identified; \
             consider fixing gamma"
                .to_string(),
        );
    }
    let objective = build_objective(matrix, observed, decay_kind, fit_gamma, config.initial_gamma)?;
    warnings.extend(objective.warnings().iter().cloned());

    let initial = initial_vector(config, fit_gamma, decay_kind);
    if objective.decode(&initial).is_none() {
        return Err(Error::InvalidValue(
            "initial parameters are outside the feasible region".into(),
        ));
    }
    let positive = positivity_mask(fit_gamma, decay_kind);
    let mut rng = StdRng::seed_from_u64(config.seed);
    let mut starts = vec![initial.clone()];
    for _ in 0..config.restarts {
        starts.push(
            initial
                .iter()
                .zip(&positive)
                .map(|(v, keep_positive)| {
                    if *keep_positive {
                        v * rng.gen_range(0.5..1.5)
                    } else {
                        v + rng.gen_range(-0.5..0.5)
                    }
                })
                .collect(),
        );
    }

    let mut best: Option<SimplexResult> = None;
    for (index, start) in starts.iter().enumerate() {
        let run = match simplex_minimize(
            |theta| objective.value(theta),
            start,
            config.tolerance,
            config.max_iterations,
        ) {
            Ok(run) => run,
            Err(Error::NonFiniteObjective) if index > 0 => {
                warnings.push(format!(
                    "restart {index} skipped: objective not finite at its start point"
                ));
                continue;
            }
            Err(e) => return Err(e),
        };
        // strictly-lower keeps the earliest run on ties
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("the validated initial start always produces a run");

    let params = objective.decode(&best.argmin).ok_or_else(|| {
        Error::InvalidValue("optimizer returned parameters outside the feasible region".into())
    })?;
    let gof = objective.gof_at(&params)?;

    Ok(FitResult {
        params,
        objective_value: best.value,
        converged: best.converged,
        iterations: best.iterations,
        gof,
        trace: config.record_trace.then(|| best.trace.clone()),
        warnings,
    })
}
