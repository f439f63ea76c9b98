//! Perturbation models, the smoothed solving pipeline, and the experiment
//! harness that measures it.
//!
//! The pipeline answers one question end to end: given a bimatrix game with
//! payoffs in `[1, 2]`, how good a Nash approximation do we get by embedding
//! the game as an exchange economy, randomly perturbing that economy,
//! solving the perturbed market, and mapping the prices back to strategies?
//! Each run produces a [`TrialRecord`] holding everything a downstream
//! analysis needs: the noise magnitude, the seed, a deterministic cost
//! proxy, the measured market ε, the recovered profile's relative defect δ
//! on the *original* game, the closed-form transfer bound for comparison,
//! and the quantitative-property violation count.
//!
//! Determinism is absolute: records are pure functions of `(config, master
//! seed)`. Randomness flows only through [`SplitMix64`] streams derived with
//! [`child_seed`], trials run in parallel but are sorted back into `(σ,
//! trial)` order, and `time_ms` is a cost model rather than a wall clock, so
//! reruns and different worker counts produce byte-identical output.

use rayon::prelude::*;
use thiserror::Error;

use crate::games::{measured_relative_defect, BimatrixGame, GameError, MixedProfile};
use crate::market::{measured_eps, normalize_prices, Economy, MarketError};
use crate::reduction::{
    property_report, recover_strategies, reduce_game_to_economy, transfer_bound, ReducedEconomy,
    ReductionError, DEFAULT_TRANSFER_CONSTANT,
};
use crate::rng::{child_seed, SplitMix64};
use crate::solvers::{grid_search_equilibrium, solve_reduced_exact, GridSpec, SolveStatus};

#[derive(Debug, Error, PartialEq)]
pub enum SmoothedError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("solver gave up with status {status:?} after scanning {} points", .record.points_scanned)]
    SolverFailed {
        status: SolveStatus,
        record: TrialRecord,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Shape of the entrywise noise added to an economy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbationKind {
    /// Uniform on `[−σ, σ]`.
    Uniform,
    /// Normal with standard deviation σ.
    Gaussian,
}

/// Entrywise perturbation: `entry ← max(entry + δ, 0)` with `δ` drawn
/// independently per entry according to `kind`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationModel {
    kind: PerturbationKind,
    sigma: f64,
}

impl PerturbationModel {
    pub fn new(kind: PerturbationKind, sigma: f64) -> Result<Self, SmoothedError> {
        if !sigma.is_finite() || !(0.0..1.0).contains(&sigma) {
            return Err(SmoothedError::InvalidParameter(
                "sigma must lie in [0, 1)",
            ));
        }
        Ok(PerturbationModel { kind, sigma })
    }

    pub fn uniform(sigma: f64) -> Result<Self, SmoothedError> {
        Self::new(PerturbationKind::Uniform, sigma)
    }

    pub fn gaussian(sigma: f64) -> Result<Self, SmoothedError> {
        Self::new(PerturbationKind::Gaussian, sigma)
    }

    pub fn kind(&self) -> PerturbationKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn draw(&self, rng: &mut SplitMix64) -> f64 {
        match self.kind {
            PerturbationKind::Uniform => rng.uniform_in(-self.sigma, self.sigma),
            PerturbationKind::Gaussian => self.sigma * rng.standard_normal(),
        }
    }
}

/// Which solver the pipeline runs on the perturbed economy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverSpec {
    /// Price-simplex grid sweep.
    Grid(GridSpec),
    /// Exact solve through the game correspondence (σ = 0 only).
    ExactReduced,
}

/// One pipeline run, fully reproducible from `(config, seed)`. `time_ms` is
/// the deterministic cost proxy from [`cost_model_ms`], not a wall clock.
/// The four optional fields are `None` when the trial's solver failed (and
/// `prop_violations` also when the measured ε or σ falls outside the
/// property preconditions).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sigma: f64,
    pub seed: u64,
    pub time_ms: f64,
    pub points_scanned: usize,
    pub market_eps: Option<f64>,
    pub nash_delta: Option<f64>,
    pub bound_delta: Option<f64>,
    pub prop_violations: Option<usize>,
}

/// Deterministic cost proxy recorded as `time_ms`: one microsecond per grid
/// point visited. Keeps records byte-identical across machines, runs, and
/// worker counts; callers that want wall-clock numbers measure separately.
pub fn cost_model_ms(points_scanned: usize) -> f64 {
    points_scanned as f64 * 0.001
}

/// The σ-schedule tying noise to the accuracy target: `σ = ε′ / n³`.
pub fn sigma_schedule(eps_prime: f64, n: usize) -> f64 {
    let nf = n as f64;
    eps_prime / (nf * nf * nf)
}

/// Samples a perturbed copy of an unperturbed reduced economy: every
/// endowment entry (row-major), then every demand entry (row-major), gets an
/// independent draw added and is clamped at zero. The output remembers the
/// model's σ. A σ = 0 model returns the input unchanged.
pub fn perturb_economy(
    reduced: &ReducedEconomy,
    model: &PerturbationModel,
    seed: u64,
) -> Result<ReducedEconomy, SmoothedError> {
    if reduced.sigma() != 0.0 {
        return Err(SmoothedError::Reduction(
            ReductionError::PreconditionViolated(
                "perturbation input must be an unperturbed reduced economy (sigma = 0)",
            ),
        ));
    }
    if model.sigma == 0.0 {
        return Ok(reduced.clone());
    }
    let mut rng = SplitMix64::new(seed);
    let endowments = perturbed_copy(reduced.economy().endowments(), model, &mut rng);
    let demands = perturbed_copy(reduced.economy().demands(), model, &mut rng);
    let econ = Economy::new(endowments, demands)?;
    Ok(ReducedEconomy::new(econ, reduced.game_size(), model.sigma)?)
}

fn perturbed_copy(
    matrix: &crate::linalg::Matrix<f64>,
    model: &PerturbationModel,
    rng: &mut SplitMix64,
) -> crate::linalg::Matrix<f64> {
    let mut rows = Vec::with_capacity(matrix.rows());
    for i in 0..matrix.rows() {
        let mut row = Vec::with_capacity(matrix.cols());
        for j in 0..matrix.cols() {
            row.push((matrix.get(i, j) + model.draw(rng)).max(0.0));
        }
        rows.push(row);
    }
    crate::linalg::Matrix::from_rows(rows)
}

/// The end-to-end smoothed pipeline: embed the `[1, 2]` game as an economy,
/// perturb with uniform noise of magnitude `σ` (the `ε′/n³` schedule unless
/// `sigma_override` pins it), solve the perturbed market, and recover a
/// mixed profile from the utility vector. The returned record measures the
/// profile against the *original* game. Fully deterministic given `seed`.
///
/// A solver that comes back empty-handed is reported as
/// [`SmoothedError::SolverFailed`] carrying the partial record.
pub fn approximate_nash_from_smoothed_leontief(
    game: &BimatrixGame<f64>,
    eps_prime: f64,
    sigma_override: Option<f64>,
    solver: &SolverSpec,
    seed: u64,
) -> Result<(MixedProfile<f64>, TrialRecord), SmoothedError> {
    if !eps_prime.is_finite() || eps_prime <= 0.0 || eps_prime >= 1.0 {
        return Err(SmoothedError::InvalidParameter(
            "eps_prime must lie strictly inside (0, 1)",
        ));
    }
    let reduced = reduce_game_to_economy(game)?;
    let n = game.rows();
    let sigma = sigma_override.unwrap_or_else(|| sigma_schedule(eps_prime, n));
    let model = PerturbationModel::uniform(sigma)?;
    let perturbed = perturb_economy(&reduced, &model, seed)?;

    let (equilibrium, points_scanned) = match solver {
        SolverSpec::Grid(spec) => {
            let result = grid_search_equilibrium(perturbed.economy(), spec)?;
            match (result.status, result.equilibrium) {
                (SolveStatus::Found, Some(eq)) => (eq, result.points_scanned),
                (status, _) => {
                    return Err(SmoothedError::SolverFailed {
                        status,
                        record: TrialRecord {
                            sigma,
                            seed,
                            time_ms: cost_model_ms(result.points_scanned),
                            points_scanned: result.points_scanned,
                            market_eps: None,
                            nash_delta: None,
                            bound_delta: None,
                            prop_violations: None,
                        },
                    })
                }
            }
        }
        SolverSpec::ExactReduced => (solve_reduced_exact(&perturbed)?, 0),
    };

    let market_eps = measured_eps(perturbed.economy(), &equilibrium.u, &equilibrium.w)?;
    let w = normalize_prices(&equilibrium.w)?;
    let profile = recover_strategies(&equilibrium.u, n)?;
    let nash_delta = measured_relative_defect(game, &profile)?;
    let bound_delta = transfer_bound(n, market_eps, sigma, DEFAULT_TRANSFER_CONSTANT);
    let prop_violations = match property_report(&perturbed, &equilibrium.u, &w, market_eps) {
        Ok(report) => Some(report.violations.len()),
        Err(ReductionError::PreconditionViolated(_)) => None,
        Err(other) => return Err(other.into()),
    };
    let record = TrialRecord {
        sigma,
        seed,
        time_ms: cost_model_ms(points_scanned),
        points_scanned,
        market_eps: Some(market_eps),
        nash_delta: Some(nash_delta),
        bound_delta: Some(bound_delta),
        prop_violations,
    };
    Ok((profile, record))
}

/// A full measurement campaign: `trials` pipeline runs at every σ in
/// `sigmas`, all on the same game with the same solver, seeded from
/// `master_seed` via [`child_seed`]`(master, σ-index, trial-index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub game: BimatrixGame<f64>,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub eps_prime: f64,
    pub solver: SolverSpec,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SmoothedError> {
        if self.trials == 0 {
            return Err(SmoothedError::InvalidParameter("trials must be ≥ 1"));
        }
        if self.sigmas.is_empty() {
            return Err(SmoothedError::InvalidParameter(
                "the sigma schedule must be nonempty",
            ));
        }
        if self
            .sigmas
            .iter()
            .any(|s| !s.is_finite() || *s < 0.0 || *s >= 1.0)
        {
            return Err(SmoothedError::InvalidParameter(
                "every sigma must lie in [0, 1)",
            ));
        }
        if !self.eps_prime.is_finite() || self.eps_prime <= 0.0 || self.eps_prime >= 1.0 {
            return Err(SmoothedError::InvalidParameter(
                "eps_prime must lie strictly inside (0, 1)",
            ));
        }
        Ok(())
    }
}

/// Per-σ summary over an experiment's records. Failure counts cover trials
/// whose solver came back empty; `mean_nash_delta` averages the successful
/// trials and is `None` when there were none.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaAggregate {
    pub sigma: f64,
    pub trials: usize,
    pub failures: usize,
    pub mean_time_ms: f64,
    pub max_time_ms: f64,
    pub mean_nash_delta: Option<f64>,
}

/// Everything an experiment produced: one record per (σ, trial) in schedule
/// order, plus per-σ aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<SigmaAggregate>,
}

/// Runs every (σ, trial) cell of the config in parallel and assembles the
/// records in deterministic `(σ-index, trial-index)` order. Solver failures
/// become records with empty measurement fields rather than aborting the
/// campaign; so do the rare per-trial recovery failures.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, SmoothedError> {
    config.validate()?;
    // Surface game problems once, up front, instead of as N identical
    // per-trial failures.
    reduce_game_to_economy(&config.game)?;

    let jobs: Vec<(usize, usize)> = (0..config.sigmas.len())
        .flat_map(|si| (0..config.trials).map(move |ti| (si, ti)))
        .collect();
    let mut cells: Vec<((usize, usize), TrialRecord)> = jobs
        .into_par_iter()
        .map(|(si, ti)| {
            let sigma = config.sigmas[si];
            let seed = child_seed(config.master_seed, si as u64, ti as u64);
            let record = match approximate_nash_from_smoothed_leontief(
                &config.game,
                config.eps_prime,
                Some(sigma),
                &config.solver,
                seed,
            ) {
                Ok((_, record)) => record,
                Err(SmoothedError::SolverFailed { record, .. }) => record,
                Err(_) => TrialRecord {
                    sigma,
                    seed,
                    time_ms: 0.0,
                    points_scanned: 0,
                    market_eps: None,
                    nash_delta: None,
                    bound_delta: None,
                    prop_violations: None,
                },
            };
            ((si, ti), record)
        })
        .collect();
    cells.sort_by_key(|((si, ti), _)| (*si, *ti));
    let records: Vec<TrialRecord> = cells.into_iter().map(|(_, r)| r).collect();

    let mut aggregates = Vec::with_capacity(config.sigmas.len());
    for (si, &sigma) in config.sigmas.iter().enumerate() {
        let chunk = &records[si * config.trials..(si + 1) * config.trials];
        let failures = chunk.iter().filter(|r| r.market_eps.is_none()).count();
        let mean_time_ms = chunk.iter().map(|r| r.time_ms).sum::<f64>() / chunk.len() as f64;
        let max_time_ms = chunk.iter().map(|r| r.time_ms).fold(0.0, f64::max);
        let deltas: Vec<f64> = chunk.iter().filter_map(|r| r.nash_delta).collect();
        let mean_nash_delta = if deltas.is_empty() {
            None
        } else {
            Some(deltas.iter().sum::<f64>() / deltas.len() as f64)
        };
        aggregates.push(SigmaAggregate {
            sigma,
            trials: chunk.len(),
            failures,
            mean_time_ms,
            max_time_ms,
            mean_nash_delta,
        });
    }
    Ok(ExperimentOutcome {
        records,
        aggregates,
    })
}

/// Column layout of the experiment CSV. Optional fields serialize as empty
/// cells; floats use the shortest representation that reparses to the same
/// bits, so a round-trip through text is exact.
pub const CSV_HEADER: &str =
    "sigma,seed,time_ms,points_scanned,market_eps,nash_delta,bound_delta,prop_violations";

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    use std::fmt::Write as _;
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let opt_f64 = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.sigma,
            r.seed,
            r.time_ms,
            r.points_scanned,
            opt_f64(r.market_eps),
            opt_f64(r.nash_delta),
            opt_f64(r.bound_delta),
            r.prop_violations.map(|c| c.to_string()).unwrap_or_default(),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<TrialRecord>, SmoothedError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SmoothedError::Csv("empty input".into()))?;
    if header.trim_end() != CSV_HEADER {
        return Err(SmoothedError::Csv(format!("unexpected header: {header:?}")));
    }
    let mut records = Vec::new();
    for (offset, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = offset + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(SmoothedError::Csv(format!(
                "line {lineno}: expected 8 fields, got {}",
                fields.len()
            )));
        }
        let f64_at = |idx: usize| -> Result<f64, SmoothedError> {
            fields[idx].parse::<f64>().map_err(|e| {
                SmoothedError::Csv(format!("line {lineno}, field {}: {e}", idx + 1))
            })
        };
        let opt_f64_at = |idx: usize| -> Result<Option<f64>, SmoothedError> {
            if fields[idx].is_empty() {
                Ok(None)
            } else {
                f64_at(idx).map(Some)
            }
        };
        records.push(TrialRecord {
            sigma: f64_at(0)?,
            seed: fields[1].parse::<u64>().map_err(|e| {
                SmoothedError::Csv(format!("line {lineno}, field 2: {e}"))
            })?,
            time_ms: f64_at(2)?,
            points_scanned: fields[3].parse::<usize>().map_err(|e| {
                SmoothedError::Csv(format!("line {lineno}, field 4: {e}"))
            })?,
            market_eps: opt_f64_at(4)?,
            nash_delta: opt_f64_at(5)?,
            bound_delta: opt_f64_at(6)?,
            prop_violations: if fields[7].is_empty() {
                None
            } else {
                Some(fields[7].parse::<usize>().map_err(|e| {
                    SmoothedError::Csv(format!("line {lineno}, field 8: {e}"))
                })?)
            },
        });
    }
    Ok(records)
}
