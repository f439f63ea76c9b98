//! Equilibrium finders for Leontief economies.
//!
//! Three complementary strategies:
//!
//! * [`grid_search_equilibrium`] sweeps the uniform `1/k` grid on the price
//!   simplex exhaustively, in ascending lexicographic order, and returns the
//!   first point whose induced utilities pass the ε-approximate check. At
//!   desk scale exhaustion beats cleverness: the scan order (and therefore
//!   the answer) is completely deterministic, restartable, and easy to
//!   partition by rank ranges without changing the result.
//! * [`refine_equilibrium`] polishes a near-equilibrium by tâtonnement:
//!   prices of over-demanded goods rise by a factor `1 + η`, the price
//!   vector renormalizes, and utilities are recomputed from scratch. The
//!   best iterate seen is kept, so refinement never loses ground.
//! * [`solve_reduced_exact`] solves an unperturbed game-embedded economy
//!   through the correspondence: recover the payoff blocks, enumerate a Nash
//!   equilibrium by support, and map it back to market prices.
//!
//! Every `Found` result is re-verified with the public checkers before it is
//! returned — callers never need to trust solver internals.

use crate::games::{support_enumeration_nash, BimatrixGame};
use crate::market::{
    check_eps_equilibrium, measured_eps, trader_utility_max, Economy, MarketEquilibrium,
    MarketError, PriceVector, UtilityVector,
};
use crate::reduction::{nash_to_market, ReducedEconomy, ReductionError};
use crate::scalar::FLOAT_WHISKER;

/// Largest measured ε an input to [`refine_equilibrium`] may have (up to the
/// usual floating-point whisker). Beyond this the multiplicative update has
/// no useful signal to follow.
pub const REFINE_START_EPS: f64 = 0.5;

/// Step-size divisor for refinement: `η = eps_target / 4`, small enough that
/// a single multiplicative update cannot jump across the `(1 ± ε)` band.
const REFINE_STEP_DIVISOR: f64 = 4.0;

/// Search parameters for [`grid_search_equilibrium`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    resolution: usize,
    eps_target: f64,
    max_points: usize,
}

impl GridSpec {
    /// `resolution` is the grid denominator `k` (step `1/k` on the price
    /// simplex), `eps_target` the approximation level to verify against, and
    /// `max_points` a hard budget on how many grid points may be visited.
    pub fn new(resolution: usize, eps_target: f64, max_points: usize) -> Result<Self, MarketError> {
        if resolution == 0 {
            return Err(MarketError::InvalidParameter("grid resolution must be ≥ 1"));
        }
        if !eps_target.is_finite() || eps_target < 0.0 {
            return Err(MarketError::InvalidParameter(
                "eps_target must be finite and nonnegative",
            ));
        }
        if max_points == 0 {
            return Err(MarketError::InvalidParameter("max_points must be ≥ 1"));
        }
        Ok(GridSpec {
            resolution,
            eps_target,
            max_points,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn eps_target(&self) -> f64 {
        self.eps_target
    }

    pub fn max_points(&self) -> usize {
        self.max_points
    }
}

/// Outcome of a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// A point passing the ε-approximate check was found (and re-verified).
    Found,
    /// The search space was exhausted without a passing point.
    NotFound,
    /// The `max_points` budget ran out with grid points still unvisited.
    BudgetExhausted,
}

/// Result of a solver run. `points_scanned` counts every grid point visited
/// (including points skipped for unbounded utilities) or, for refinement,
/// every price update performed; on a `Found` grid result it equals the rank
/// of the returned point in scan order. `achieved_eps` is the measured ε of
/// the returned pair, always at most `eps_target` when the status is
/// `Found`. Refinement also returns its best iterate on `NotFound`; the grid
/// search returns an equilibrium only on `Found`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub equilibrium: Option<MarketEquilibrium<f64>>,
    pub points_scanned: usize,
    pub achieved_eps: Option<f64>,
}

/// Iterator over all length-`parts` tuples of nonnegative integers summing
/// to `total`, in ascending lexicographic order: `(0,…,0,total)` first,
/// `(total,0,…,0)` last.
struct Compositions {
    next: Option<Vec<usize>>,
}

impl Compositions {
    fn new(parts: usize, total: usize) -> Self {
        assert!(parts >= 1, "compositions need at least one part");
        let mut first = vec![0; parts];
        first[parts - 1] = total;
        Compositions { next: Some(first) }
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        // Successor: increment the rightmost position that has mass strictly
        // to its right, then park the leftover mass in the last slot (the
        // lexicographically smallest tail).
        let m = current.len();
        let mut suffix = 0usize;
        for i in (0..m - 1).rev() {
            suffix += current[i + 1];
            if suffix >= 1 {
                let mut next = current.clone();
                next[i] += 1;
                for slot in next.iter_mut().skip(i + 1) {
                    *slot = 0;
                }
                next[m - 1] = suffix - 1;
                self.next = Some(next);
                break;
            }
        }
        Some(current)
    }
}

/// Exhaustive sweep of the `1/k` price grid, returning the first point (in
/// ascending lexicographic order of grid coordinates) whose induced
/// utilities `u_j = ⟨e_j,w⟩ / ⟨d_j,w⟩` pass the ε-approximate check. Grid
/// points where some trader's demanded goods are all free (utility would be
/// unbounded) are skipped but still counted. Exhaustive at desk scale; for
/// larger economies `max_points` bounds the sweep and a `BudgetExhausted`
/// status reports the truncation honestly.
pub fn grid_search_equilibrium(
    econ: &Economy<f64>,
    spec: &GridSpec,
) -> Result<SolveResult, MarketError> {
    let k = spec.resolution();
    let scale = 1.0 / k as f64;
    let mut points_scanned = 0usize;
    for coords in Compositions::new(econ.goods(), k) {
        if points_scanned == spec.max_points() {
            return Ok(SolveResult {
                status: SolveStatus::BudgetExhausted,
                equilibrium: None,
                points_scanned,
                achieved_eps: None,
            });
        }
        points_scanned += 1;
        let w = PriceVector::new(coords.iter().map(|&c| c as f64 * scale).collect())?;
        let mut utilities = Vec::with_capacity(econ.traders());
        let mut unbounded = false;
        for j in 0..econ.traders() {
            match trader_utility_max(econ, &w, j) {
                Ok(v) => utilities.push(v),
                Err(MarketError::Unbounded { .. }) => {
                    unbounded = true;
                    break;
                }
                Err(other) => return Err(other),
            }
        }
        if unbounded {
            continue;
        }
        let u = UtilityVector::new(utilities)?;
        if check_eps_equilibrium(econ, &u, &w, spec.eps_target())?.passed {
            let achieved = measured_eps(econ, &u, &w)?;
            return Ok(SolveResult {
                status: SolveStatus::Found,
                equilibrium: Some(MarketEquilibrium { u, w }),
                points_scanned,
                achieved_eps: Some(achieved),
            });
        }
    }
    Ok(SolveResult {
        status: SolveStatus::NotFound,
        equilibrium: None,
        points_scanned,
        achieved_eps: None,
    })
}

/// Tâtonnement polish for a near-equilibrium `(u, w)`: each iteration raises
/// the prices of over-demanded goods by `1 + η` (η = `eps_target`/4),
/// renormalizes, and recomputes the induced utilities. Stops as soon as the
/// measured ε drops to `eps_target`, or after `max_iters` updates. The best
/// iterate (the input included) is returned, so the result is never worse
/// than the input; with `max_iters = 0` the input is echoed back with its
/// measured ε. The input must already be within [`REFINE_START_EPS`].
pub fn refine_equilibrium(
    econ: &Economy<f64>,
    u: &UtilityVector<f64>,
    w: &PriceVector<f64>,
    eps_target: f64,
    max_iters: usize,
) -> Result<SolveResult, MarketError> {
    if !eps_target.is_finite() || eps_target < 0.0 {
        return Err(MarketError::InvalidParameter(
            "eps_target must be finite and nonnegative",
        ));
    }
    let input_eps = measured_eps(econ, u, w)?;
    // Whiskered like every other comparison: a grid point accepted at
    // eps_target = 0.5 may measure a couple of ulps above it. A NaN or
    // infinite measurement is rejected too.
    if input_eps > REFINE_START_EPS + FLOAT_WHISKER || input_eps.is_nan() {
        return Err(MarketError::InvalidParameter(
            "refinement needs a starting point with measured ε ≤ 0.5",
        ));
    }
    let eta = eps_target / REFINE_STEP_DIVISOR;
    let mut best_u = u.clone();
    let mut best_w = w.clone();
    let mut best_eps = input_eps;
    let mut cur_u = u.clone();
    let mut cur_w = w.clone();
    let mut iterations = 0usize;
    while best_eps > eps_target && iterations < max_iters {
        iterations += 1;
        let demand = econ.aggregate_demand(&cur_u);
        let supply = econ.supply();
        let mut prices = cur_w.values().to_vec();
        for (price, (d, s)) in prices.iter_mut().zip(demand.iter().zip(supply.iter())) {
            if d > s {
                *price *= 1.0 + eta;
            }
        }
        let total: f64 = prices.iter().sum();
        for price in &mut prices {
            *price /= total;
        }
        cur_w = PriceVector::new(prices)?;
        let mut utilities = Vec::with_capacity(econ.traders());
        for j in 0..econ.traders() {
            utilities.push(trader_utility_max(econ, &cur_w, j)?);
        }
        cur_u = UtilityVector::new(utilities)?;
        let eps = measured_eps(econ, &cur_u, &cur_w)?;
        if eps < best_eps {
            best_eps = eps;
            best_u = cur_u.clone();
            best_w = cur_w.clone();
        }
    }
    let status = if best_eps <= eps_target {
        SolveStatus::Found
    } else {
        SolveStatus::NotFound
    };
    Ok(SolveResult {
        status,
        equilibrium: Some(MarketEquilibrium {
            u: best_u,
            w: best_w,
        }),
        points_scanned: iterations,
        achieved_eps: Some(best_eps),
    })
}

/// Exact solve for an unperturbed game-embedded economy: recovers the two
/// payoff matrices from the demand blocks, finds a Nash equilibrium by
/// support enumeration, and maps it through the correspondence. The output
/// carries the correspondence's own verification (exact check at its
/// internal tolerance). Requires `sigma = 0` and a game small enough to
/// enumerate.
pub fn solve_reduced_exact(reduced: &ReducedEconomy) -> Result<MarketEquilibrium<f64>, ReductionError> {
    if reduced.sigma() != 0.0 {
        return Err(ReductionError::PreconditionViolated(
            "exact solve requires an unperturbed reduced economy (sigma = 0)",
        ));
    }
    let blocks = reduced.blocks();
    let game = BimatrixGame::new(blocks.a.clone(), blocks.b.transpose(), Some((1.0, 2.0)))?;
    let found = support_enumeration_nash(&game)?;
    let profile = found
        .profiles
        .first()
        .ok_or(ReductionError::ConstructionFailed)?;
    nash_to_market(&game, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::market::check_equilibrium;
    use crate::reduction::reduce_game_to_economy;
    use proptest::prelude::*;

    fn game(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> BimatrixGame<f64> {
        BimatrixGame::new(Matrix::from_rows(a), Matrix::from_rows(b), None).unwrap()
    }

    fn embedded(g: &BimatrixGame<f64>) -> ReducedEconomy {
        reduce_game_to_economy(g).unwrap()
    }

    fn all_ones() -> BimatrixGame<f64> {
        game(
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        )
    }

    fn coordination() -> BimatrixGame<f64> {
        game(
            vec![vec![2.0, 1.0], vec![1.0, 2.0]],
            vec![vec![2.0, 1.0], vec![1.0, 2.0]],
        )
    }

    fn spec(resolution: usize, eps: f64) -> GridSpec {
        GridSpec::new(resolution, eps, 1_000_000).unwrap()
    }

    #[test]
    fn compositions_enumerate_in_ascending_lexicographic_order() {
        let all: Vec<Vec<usize>> = Compositions::new(3, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0, 2],
                vec![0, 1, 1],
                vec![0, 2, 0],
                vec![1, 0, 1],
                vec![1, 1, 0],
                vec![2, 0, 0],
            ]
        );
        // C(8+4-1, 4-1) = C(11, 3) = 165 points on the k=8 simplex grid.
        assert_eq!(Compositions::new(4, 8).count(), 165);
        // A single part admits exactly one composition.
        assert_eq!(Compositions::new(1, 5).collect::<Vec<_>>(), vec![vec![5]]);
    }

    #[test]
    fn single_good_single_trader_economy_solves_at_the_corner() {
        let econ = Economy::new(
            Matrix::from_rows(vec![vec![1.0]]),
            Matrix::from_rows(vec![vec![1.0]]),
        )
        .unwrap();
        let result = grid_search_equilibrium(&econ, &spec(1, 0.0)).unwrap();
        assert_eq!(result.status, SolveStatus::Found);
        assert_eq!(result.points_scanned, 1);
        assert_eq!(result.achieved_eps, Some(0.0));
        let eq = result.equilibrium.unwrap();
        assert_eq!(eq.w.values(), &[1.0]);
        assert_eq!(eq.u.values(), &[1.0]);
    }

    #[test]
    fn grid_finds_the_first_equal_split_point_for_the_all_ones_embedding() {
        let econ = embedded(&all_ones()).economy().clone();
        let result = grid_search_equilibrium(&econ, &spec(8, 1e-6)).unwrap();
        assert_eq!(result.status, SolveStatus::Found);
        // First passing point in scan order is (0, 4, 0, 4)/8: any split with
        // equal price mass on the two good halves is exactly market-clearing
        // here, and that is the earliest such split lexicographically. The 30
        // points before it all fail the supply band.
        assert_eq!(result.points_scanned, 31);
        let eq = result.equilibrium.unwrap();
        assert_eq!(eq.w.values(), &[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(eq.u.values(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(result.achieved_eps, Some(0.0));
        assert!(check_equilibrium(&econ, &eq.u, &eq.w, 1e-12).unwrap().passed);
    }

    #[test]
    fn grid_resolution_gates_the_coordination_embedding() {
        let econ = embedded(&coordination()).economy().clone();
        // No k=3 grid point is close to any of the three equilibria: the
        // sweep is exhaustive (C(6,3) = 20 points) and comes back empty.
        let coarse = grid_search_equilibrium(&econ, &spec(3, 1e-6)).unwrap();
        assert_eq!(coarse.status, SolveStatus::NotFound);
        assert_eq!(coarse.points_scanned, 20);
        assert!(coarse.equilibrium.is_none());
        // k=4 contains the pure-equilibrium price vector (0, 1/2, 0, 1/2),
        // reached as the 10th point in scan order.
        let fine = grid_search_equilibrium(&econ, &spec(4, 1e-6)).unwrap();
        assert_eq!(fine.status, SolveStatus::Found);
        assert_eq!(fine.points_scanned, 10);
        let eq = fine.equilibrium.unwrap();
        assert_eq!(eq.w.values(), &[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(eq.u.values(), &[0.0, 0.5, 0.0, 0.5]);
        assert!(check_equilibrium(&econ, &eq.u, &eq.w, 1e-12).unwrap().passed);
    }

    #[test]
    fn point_budget_truncates_the_sweep_honestly() {
        let econ = embedded(&all_ones()).economy().clone();
        let truncated =
            grid_search_equilibrium(&econ, &GridSpec::new(8, 1e-6, 5).unwrap()).unwrap();
        assert_eq!(truncated.status, SolveStatus::BudgetExhausted);
        assert_eq!(truncated.points_scanned, 5);
        assert!(truncated.equilibrium.is_none());
        assert!(truncated.achieved_eps.is_none());
        // A budget of exactly the winning rank still succeeds.
        let exact = grid_search_equilibrium(&econ, &GridSpec::new(8, 1e-6, 31).unwrap()).unwrap();
        assert_eq!(exact.status, SolveStatus::Found);
        assert_eq!(exact.points_scanned, 31);
    }

    #[test]
    fn free_good_points_are_skipped_not_fatal() {
        // Two traders swap their endowed goods. Boundary grid points price
        // one trader's demanded good at zero with a positive budget; those
        // points are skipped and the sweep continues.
        let econ = Economy::new(
            Matrix::identity(2),
            Matrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
        )
        .unwrap();
        let coarse = grid_search_equilibrium(&econ, &spec(1, 1e-9)).unwrap();
        assert_eq!(coarse.status, SolveStatus::NotFound);
        assert_eq!(coarse.points_scanned, 2);
        let fine = grid_search_equilibrium(&econ, &spec(2, 1e-9)).unwrap();
        assert_eq!(fine.status, SolveStatus::Found);
        assert_eq!(fine.points_scanned, 2);
        let eq = fine.equilibrium.unwrap();
        assert_eq!(eq.w.values(), &[0.5, 0.5]);
        assert_eq!(eq.u.values(), &[1.0, 1.0]);
    }

    #[test]
    fn grid_spec_rejects_degenerate_parameters() {
        assert!(GridSpec::new(0, 0.1, 10).is_err());
        assert!(GridSpec::new(4, -0.1, 10).is_err());
        assert!(GridSpec::new(4, f64::NAN, 10).is_err());
        assert!(GridSpec::new(4, 0.1, 0).is_err());
    }

    #[test]
    fn grid_search_is_deterministic() {
        let econ = embedded(&coordination()).economy().clone();
        let a = grid_search_equilibrium(&econ, &spec(4, 1e-6)).unwrap();
        let b = grid_search_equilibrium(&econ, &spec(4, 1e-6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_polishes_a_coarse_grid_point() {
        // On the all-ones embedding, k=5 only reaches a lopsided split with a
        // 50% supply overshoot; tâtonnement walks it down to 1%.
        let econ = embedded(&all_ones()).economy().clone();
        let coarse = grid_search_equilibrium(&econ, &spec(5, 0.5)).unwrap();
        assert_eq!(coarse.status, SolveStatus::Found);
        let start = coarse.equilibrium.unwrap();
        // Exactly 1/2 in real arithmetic; grid coordinates built from 1/5
        // leave a couple of ulps of noise.
        assert!((coarse.achieved_eps.unwrap() - 0.5).abs() < 1e-12);
        let refined = refine_equilibrium(&econ, &start.u, &start.w, 0.01, 1000).unwrap();
        assert_eq!(refined.status, SolveStatus::Found);
        let achieved = refined.achieved_eps.unwrap();
        assert!(achieved <= 0.01, "achieved {achieved}");
        let eq = refined.equilibrium.unwrap();
        assert!(check_eps_equilibrium(&econ, &eq.u, &eq.w, 0.01).unwrap().passed);
        // Strictly better than the input, and well inside the iteration cap.
        assert!(achieved < 0.5);
        assert!(refined.points_scanned < 1000, "{}", refined.points_scanned);
    }

    #[test]
    fn refinement_returns_an_already_passing_input_unchanged() {
        let econ = embedded(&all_ones()).economy().clone();
        let u = UtilityVector::new(vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let w = PriceVector::new(vec![0.0, 0.5, 0.0, 0.5]).unwrap();
        let result = refine_equilibrium(&econ, &u, &w, 1e-6, 100).unwrap();
        assert_eq!(result.status, SolveStatus::Found);
        assert_eq!(result.points_scanned, 0);
        assert_eq!(result.achieved_eps, Some(0.0));
        let eq = result.equilibrium.unwrap();
        assert_eq!(eq.u.values(), u.values());
        assert_eq!(eq.w.values(), w.values());
    }

    #[test]
    fn refinement_with_zero_iterations_echoes_the_input() {
        let econ = embedded(&all_ones()).economy().clone();
        // Prices split 60/40 between the halves: budgets are exact but the
        // cheap half's goods are over-demanded by half.
        let w = PriceVector::new(vec![0.3, 0.3, 0.2, 0.2]).unwrap();
        let u = UtilityVector::new(vec![0.75, 0.75, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let result = refine_equilibrium(&econ, &u, &w, 0.01, 0).unwrap();
        assert_eq!(result.status, SolveStatus::NotFound);
        assert_eq!(result.points_scanned, 0);
        assert_eq!(result.achieved_eps, Some(0.5));
        let eq = result.equilibrium.unwrap();
        assert_eq!(eq.w.values(), w.values());
    }

    #[test]
    fn refinement_never_returns_worse_than_its_input() {
        let econ = embedded(&all_ones()).economy().clone();
        let w = PriceVector::new(vec![0.3, 0.3, 0.2, 0.2]).unwrap();
        let u = UtilityVector::new(vec![0.75, 0.75, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        // One coarse step cannot reach 1e-6, but the incumbent logic must
        // still hand back something no worse than the 0.5 start.
        let result = refine_equilibrium(&econ, &u, &w, 1e-6, 3).unwrap();
        assert_eq!(result.status, SolveStatus::NotFound);
        assert!(result.achieved_eps.unwrap() <= 0.5);
    }

    #[test]
    fn refinement_rejects_a_hopeless_start() {
        let econ = embedded(&all_ones()).economy().clone();
        // Doubled utilities overshoot supply by 100%: outside the supported
        // starting region.
        let w = PriceVector::new(vec![0.25; 4]).unwrap();
        let u = UtilityVector::new(vec![2.0; 4]).unwrap();
        let err = refine_equilibrium(&econ, &u, &w, 0.01, 10).unwrap_err();
        assert!(matches!(err, MarketError::InvalidParameter(_)));
    }

    #[test]
    fn exact_solve_recovers_the_first_enumerated_equilibrium() {
        // All-ones: every profile is an equilibrium, so enumeration returns
        // the (e₀, e₀) corner first and the correspondence prices only the
        // supported goods.
        let result = solve_reduced_exact(&embedded(&all_ones())).unwrap();
        assert_eq!(result.w.values(), &[0.5, 0.0, 0.5, 0.0]);
        assert_eq!(result.u.values(), &[1.0, 0.0, 1.0, 0.0]);
        // Coordination: the first enumerated equilibrium is the (e₀, e₀)
        // coordination corner.
        let result = solve_reduced_exact(&embedded(&coordination())).unwrap();
        assert_eq!(result.w.values(), &[0.5, 0.0, 0.5, 0.0]);
        let econ = embedded(&coordination()).economy().clone();
        assert!(check_equilibrium(&econ, &result.u, &result.w, 1e-12)
            .unwrap()
            .passed);
    }

    #[test]
    fn exact_solve_rejects_a_perturbed_economy() {
        let base = embedded(&all_ones());
        // Hand-build a slightly perturbed copy: same matrices except one
        // endowment entry nudged off the identity.
        let mut endow = base.economy().endowments().clone();
        *endow.get_mut(0, 1) = 0.003;
        let econ = Economy::new(endow, base.economy().demands().clone()).unwrap();
        let perturbed = ReducedEconomy::new(econ, 2, 0.01).unwrap();
        let err = solve_reduced_exact(&perturbed).unwrap_err();
        assert!(matches!(err, ReductionError::PreconditionViolated(_)));
    }

    #[test]
    fn finer_grids_never_lose_a_coarser_find() {
        // k=4 finds the coordination equilibria; k=8 contains every k=4
        // point, so it must find one too.
        let econ = embedded(&coordination()).economy().clone();
        let coarse = grid_search_equilibrium(&econ, &spec(4, 1e-6)).unwrap();
        let fine = grid_search_equilibrium(&econ, &spec(8, 1e-6)).unwrap();
        assert_eq!(coarse.status, SolveStatus::Found);
        assert_eq!(fine.status, SolveStatus::Found);
        // Same for the all-ones embedding at (8, 16).
        let econ = embedded(&all_ones()).economy().clone();
        let coarse = grid_search_equilibrium(&econ, &spec(8, 1e-6)).unwrap();
        let fine = grid_search_equilibrium(&econ, &spec(16, 1e-6)).unwrap();
        assert_eq!(coarse.status, SolveStatus::Found);
        assert_eq!(fine.status, SolveStatus::Found);
    }

    proptest! {
        #[test]
        fn compositions_cover_the_simplex_grid(parts in 1usize..=4, total in 0usize..=6) {
            let all: Vec<Vec<usize>> = Compositions::new(parts, total).collect();
            // Every tuple sums to the total.
            for c in &all {
                prop_assert_eq!(c.len(), parts);
                prop_assert_eq!(c.iter().sum::<usize>(), total);
            }
            // Strictly ascending lexicographic order (hence all distinct).
            for pair in all.windows(2) {
                prop_assert!(pair[0] < pair[1]);
            }
            // Count matches the stars-and-bars formula C(total+parts-1, parts-1).
            let mut expected = 1usize;
            for i in 0..parts - 1 {
                expected = expected * (total + i + 1) / (i + 1);
            }
            prop_assert_eq!(all.len(), expected);
        }

        #[test]
        fn doubling_the_resolution_preserves_found_status(
            a in prop::collection::vec(1.0f64..=2.0, 4),
            b in prop::collection::vec(1.0f64..=2.0, 4),
        ) {
            let g = game(
                vec![vec![a[0], a[1]], vec![a[2], a[3]]],
                vec![vec![b[0], b[1]], vec![b[2], b[3]]],
            );
            let econ = embedded(&g).economy().clone();
            let coarse = grid_search_equilibrium(&econ, &spec(4, 0.3)).unwrap();
            if coarse.status == SolveStatus::Found {
                let fine = grid_search_equilibrium(&econ, &spec(8, 0.3)).unwrap();
                prop_assert_eq!(fine.status, SolveStatus::Found);
            }
        }
    }
}
