//! Leontief exchange economies and equilibrium checkers.
//!
//! An economy has `m` goods and `n` traders. Column `j` of the endowment
//! matrix is what trader `j` brings to market; column `j` of the demand matrix
//! fixes the proportions in which that trader consumes. A trader with demand
//! column `d` values a bundle `x` at `min { x_i / d_i : d_i > 0 }` — goods are
//! wanted in fixed ratio, and anything beyond that ratio is wasted.
//!
//! Equilibria are expressed in utility/price form: prices `w` determine each
//! trader's budget `⟨e_j, w⟩` and per-unit demand cost `⟨d_j, w⟩`, hence a
//! best attainable utility, and an equilibrium is a pair `(u, w)` where every
//! `u_j` equals that optimum and aggregate demand `D·u` stays within supply.
//! The checkers verify that exactly, approximately (all three conditions
//! relaxed by `ε`), or strictly (budgets and supply exact, only utility
//! relaxed); an allocation-based variant checks explicit bundles instead of
//! utility values.
//!
//! ### Slack convention
//!
//! Every condition is reported with a signed slack: for an inequality
//! `lhs ≤ rhs` the slack is `(rhs − lhs) / max(1, |rhs|)`, so slack ≥ 0 means
//! satisfied and the magnitude is comparable across scales. Conditions with an
//! explicit tolerance fold it into the slack. In floating-point mode a
//! [`FLOAT_WHISKER`](crate::scalar::FLOAT_WHISKER)-sized margin absorbs
//! last-ulp noise; in exact-rational mode comparisons are exact.

use crate::linalg::{dot, Matrix};
use crate::scalar::{rel_scale, Scalar};
use serde::Serialize;
use thiserror::Error;

/// Tolerance for the `normalized`/`normalized_supply` construction flags and
/// for the exact budget/supply comparisons of the strict checker.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MarketError {
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} contains a negative or non-finite entry")]
    InvalidEntry { what: &'static str },
    #[error("demand column of trader {trader} is all zero")]
    EmptyDemandColumn { trader: usize },
    #[error("economy must have at least one good and one trader")]
    Empty,
    #[error("price vector is identically zero")]
    ZeroPrices,
    #[error("trader {trader} has positive budget but zero demand cost: utility is unbounded")]
    Unbounded { trader: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Exchange economy with Leontief consumers.
///
/// `endowments` and `demands` are `m × n` (goods × traders) and entrywise
/// nonnegative; every trader must demand at least one good.
#[derive(Debug, Clone, PartialEq)]
pub struct Economy<T> {
    endowments: Matrix<T>,
    demands: Matrix<T>,
    normalized_supply: bool,
}

impl<T: Scalar> Economy<T> {
    pub fn new(endowments: Matrix<T>, demands: Matrix<T>) -> Result<Self, MarketError> {
        if endowments.rows() == 0 || endowments.cols() == 0 {
            return Err(MarketError::Empty);
        }
        if demands.rows() != endowments.rows() {
            return Err(MarketError::DimensionMismatch {
                what: "demand matrix rows",
                expected: endowments.rows(),
                got: demands.rows(),
            });
        }
        if demands.cols() != endowments.cols() {
            return Err(MarketError::DimensionMismatch {
                what: "demand matrix columns",
                expected: endowments.cols(),
                got: demands.cols(),
            });
        }
        if endowments.iter().any(|v| !v.is_valid() || v.is_negative()) {
            return Err(MarketError::InvalidEntry { what: "endowments" });
        }
        if demands.iter().any(|v| !v.is_valid() || v.is_negative()) {
            return Err(MarketError::InvalidEntry { what: "demands" });
        }
        for j in 0..demands.cols() {
            if (0..demands.rows()).all(|i| demands.get(i, j).is_zero()) {
                return Err(MarketError::EmptyDemandColumn { trader: j });
            }
        }
        let tol = T::from_f64(NORMALIZATION_TOL);
        let one = T::one();
        let normalized_supply = endowments
            .row_sums()
            .iter()
            .all(|s| (s.clone() - one.clone()).abs() <= tol);
        Ok(Economy {
            endowments,
            demands,
            normalized_supply,
        })
    }

    /// Number of goods.
    pub fn goods(&self) -> usize {
        self.endowments.rows()
    }

    /// Number of traders.
    pub fn traders(&self) -> usize {
        self.endowments.cols()
    }

    pub fn endowments(&self) -> &Matrix<T> {
        &self.endowments
    }

    pub fn demands(&self) -> &Matrix<T> {
        &self.demands
    }

    /// True when every good's total endowment is 1 (within 1e-12).
    pub fn normalized_supply(&self) -> bool {
        self.normalized_supply
    }

    /// Total amount of each good brought to market (row sums of endowments).
    pub fn supply(&self) -> Vec<T> {
        self.endowments.row_sums()
    }

    /// Aggregate demand `D·u` at utility levels `u`.
    pub fn aggregate_demand(&self, u: &UtilityVector<T>) -> Vec<T> {
        self.demands.matvec(u.values())
    }
}

/// Nonnegative price vector, one entry per good.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceVector<T> {
    values: Vec<T>,
    normalized: bool,
}

impl<T: Scalar> PriceVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, MarketError> {
        if values.iter().any(|v| !v.is_valid() || v.is_negative()) {
            return Err(MarketError::InvalidEntry { what: "prices" });
        }
        if values.iter().all(|v| v.is_zero()) {
            return Err(MarketError::ZeroPrices);
        }
        let tol = T::from_f64(NORMALIZATION_TOL);
        let total = crate::linalg::sum(&values);
        let normalized = (total - T::one()).abs() <= tol;
        Ok(PriceVector { values, normalized })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the entries sum to 1 (within 1e-12).
    pub fn normalized(&self) -> bool {
        self.normalized
    }
}

/// Scales prices so they sum to one.
pub fn normalize_prices<T: Scalar>(w: &PriceVector<T>) -> Result<PriceVector<T>, MarketError> {
    let total = crate::linalg::sum(w.values());
    if total.is_zero() {
        return Err(MarketError::ZeroPrices);
    }
    let values: Vec<T> = w.values().iter().map(|v| v.clone() / total.clone()).collect();
    PriceVector::new(values)
}

/// One utility level per trader, all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityVector<T> {
    values: Vec<T>,
}

impl<T: Scalar> UtilityVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self, MarketError> {
        if values.iter().any(|v| !v.is_valid() || v.is_negative()) {
            return Err(MarketError::InvalidEntry { what: "utilities" });
        }
        Ok(UtilityVector { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Utility/price pair — the object the checkers certify.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketEquilibrium<T> {
    pub u: UtilityVector<T>,
    pub w: PriceVector<T>,
}

/// Explicit bundles, one column per trader (`m × n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    amounts: Matrix<T>,
}

impl<T: Scalar> Allocation<T> {
    pub fn new(amounts: Matrix<T>) -> Result<Self, MarketError> {
        if amounts.iter().any(|v| !v.is_valid() || v.is_negative()) {
            return Err(MarketError::InvalidEntry { what: "allocation" });
        }
        Ok(Allocation { amounts })
    }

    pub fn amounts(&self) -> &Matrix<T> {
        &self.amounts
    }

    pub fn bundle(&self, trader: usize) -> Vec<T> {
        self.amounts.column(trader)
    }

    /// Total consumption of each good (row sums).
    pub fn totals(&self) -> Vec<T> {
        self.amounts.row_sums()
    }
}

/// Outcome of one verified inequality family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub name: &'static str,
    pub satisfied: bool,
    /// Worst (minimum) relative slack across components; ≥ 0 means satisfied.
    pub worst_slack: f64,
}

/// Full verdict of a checker run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub passed: bool,
    pub conditions: Vec<ConditionReport>,
    /// Component index (trader or good, depending on the worst condition)
    /// achieving the overall worst slack.
    pub witness_index: Option<usize>,
}

/// Accumulates per-component slacks for one condition.
pub(crate) struct ConditionAcc<T> {
    name: &'static str,
    worst: Option<(T, usize)>,
}

impl<T: Scalar> ConditionAcc<T> {
    pub(crate) fn new(name: &'static str) -> Self {
        ConditionAcc { name, worst: None }
    }

    pub(crate) fn push(&mut self, slack: T, index: usize) {
        let replace = match &self.worst {
            Some((cur, _)) => slack < *cur,
            None => true,
        };
        if replace {
            self.worst = Some((slack, index));
        }
    }
}

pub(crate) fn build_report<T: Scalar>(conditions: Vec<ConditionAcc<T>>) -> CheckReport {
    let whisker = T::whisker();
    let mut out = Vec::with_capacity(conditions.len());
    let mut witness: Option<(T, usize)> = None;
    for c in conditions {
        let (slack, idx) = c
            .worst
            .unwrap_or((T::from_f64(f64::MAX), usize::MAX));
        let satisfied = slack >= -whisker.clone();
        if idx != usize::MAX {
            let better = match &witness {
                Some((cur, _)) => slack < *cur,
                None => true,
            };
            if better {
                witness = Some((slack.clone(), idx));
            }
        }
        out.push(ConditionReport {
            name: c.name,
            satisfied,
            worst_slack: slack.to_f64(),
        });
    }
    CheckReport {
        passed: out.iter().all(|c| c.satisfied),
        conditions: out,
        witness_index: witness.map(|(_, i)| i),
    }
}

/// Slack of `lhs ≤ rhs` under the relative convention.
pub(crate) fn slack_le<T: Scalar>(lhs: &T, rhs: &T) -> T {
    (rhs.clone() - lhs.clone()) / rel_scale(rhs)
}

fn check_dims<T: Scalar>(
    econ: &Economy<T>,
    u: Option<&UtilityVector<T>>,
    w: &PriceVector<T>,
) -> Result<(), MarketError> {
    if let Some(u) = u {
        if u.len() != econ.traders() {
            return Err(MarketError::DimensionMismatch {
                what: "utility vector",
                expected: econ.traders(),
                got: u.len(),
            });
        }
    }
    if w.len() != econ.goods() {
        return Err(MarketError::DimensionMismatch {
            what: "price vector",
            expected: econ.goods(),
            got: w.len(),
        });
    }
    Ok(())
}

/// Budget `⟨e_j, w⟩` and demand cost `⟨d_j, w⟩` for every trader.
fn budgets_and_costs<T: Scalar>(econ: &Economy<T>, w: &PriceVector<T>) -> Vec<(T, T)> {
    (0..econ.traders())
        .map(|j| {
            let e = econ.endowments().column(j);
            let d = econ.demands().column(j);
            (dot(&e, w.values()), dot(&d, w.values()))
        })
        .collect()
}

/// Utility of `bundle` for `trader`: the bottleneck ratio over demanded goods.
pub fn leontief_utility<T: Scalar>(
    econ: &Economy<T>,
    trader: usize,
    bundle: &[T],
) -> Result<T, MarketError> {
    if trader >= econ.traders() {
        return Err(MarketError::DimensionMismatch {
            what: "trader index",
            expected: econ.traders(),
            got: trader,
        });
    }
    if bundle.len() != econ.goods() {
        return Err(MarketError::DimensionMismatch {
            what: "bundle",
            expected: econ.goods(),
            got: bundle.len(),
        });
    }
    let mut best: Option<T> = None;
    for (i, amount) in bundle.iter().enumerate() {
        let d = econ.demands().get(i, trader);
        if d.is_zero() {
            continue;
        }
        let ratio = amount.clone() / d.clone();
        best = Some(match best {
            Some(cur) if cur <= ratio => cur,
            _ => ratio,
        });
    }
    // The economy invariant guarantees a nonzero demand column.
    Ok(best.expect("demand column is all zero"))
}

/// Best utility `trader` can afford at prices `w`: `⟨e_j,w⟩ / ⟨d_j,w⟩`,
/// zero on a zero budget, and an error when the budget is positive but the
/// demanded goods are free (utility would be unbounded).
pub fn trader_utility_max<T: Scalar>(
    econ: &Economy<T>,
    w: &PriceVector<T>,
    trader: usize,
) -> Result<T, MarketError> {
    check_dims(econ, None, w)?;
    if trader >= econ.traders() {
        return Err(MarketError::DimensionMismatch {
            what: "trader index",
            expected: econ.traders(),
            got: trader,
        });
    }
    let e = econ.endowments().column(trader);
    let d = econ.demands().column(trader);
    let budget = dot(&e, w.values());
    let cost = dot(&d, w.values());
    if budget.is_zero() {
        return Ok(T::zero());
    }
    if cost.is_zero() {
        return Err(MarketError::Unbounded { trader });
    }
    Ok(budget / cost)
}

/// The bundle that attains [`trader_utility_max`]: demand proportions scaled
/// by the best affordable utility. Spends the whole budget exactly.
pub fn optimal_bundle<T: Scalar>(
    econ: &Economy<T>,
    w: &PriceVector<T>,
    trader: usize,
) -> Result<Vec<T>, MarketError> {
    let best = trader_utility_max(econ, w, trader)?;
    Ok(econ
        .demands()
        .column(trader)
        .iter()
        .map(|d| d.clone() * best.clone())
        .collect())
}

/// Verifies an exact equilibrium, within relative tolerance `tol`:
/// nonnegative prices, `u_j` equal to the budget-optimal utility (zero budget
/// forces zero utility), and aggregate demand within supply.
pub fn check_equilibrium<T: Scalar>(
    econ: &Economy<T>,
    u: &UtilityVector<T>,
    w: &PriceVector<T>,
    tol: T,
) -> Result<CheckReport, MarketError> {
    check_dims(econ, Some(u), w)?;
    if tol.is_negative() {
        return Err(MarketError::InvalidParameter("tol must be nonnegative"));
    }
    let mut prices = ConditionAcc::new("nonnegative_prices");
    for (i, v) in w.values().iter().enumerate() {
        prices.push(v.clone() / rel_scale(v) + tol.clone(), i);
    }
    let mut budget = ConditionAcc::new("budget_equality");
    for (j, (b, c)) in budgets_and_costs(econ, w).into_iter().enumerate() {
        let target = if b.is_zero() {
            T::zero()
        } else if c.is_zero() {
            return Err(MarketError::Unbounded { trader: j });
        } else {
            b / c
        };
        let dev = (u.values()[j].clone() - target.clone()).abs() / rel_scale(&target);
        budget.push(tol.clone() - dev, j);
    }
    let mut supply = ConditionAcc::new("supply_bound");
    let total = econ.aggregate_demand(u);
    for (i, (demand, avail)) in total.iter().zip(econ.supply()).enumerate() {
        supply.push(slack_le(demand, &avail) + tol.clone(), i);
    }
    Ok(build_report(vec![prices, budget, supply]))
}

/// Verifies an ε-approximate equilibrium: each utility within a `(1±ε)` band
/// of its budget optimum, and aggregate demand within `(1+ε)`·supply.
pub fn check_eps_equilibrium<T: Scalar>(
    econ: &Economy<T>,
    u: &UtilityVector<T>,
    w: &PriceVector<T>,
    eps: T,
) -> Result<CheckReport, MarketError> {
    check_dims(econ, Some(u), w)?;
    if eps.is_negative() {
        return Err(MarketError::InvalidParameter("eps must be nonnegative"));
    }
    let one = T::one();
    let lo = one.clone() - eps.clone();
    let hi = one.clone() + eps.clone();
    let mut lower = ConditionAcc::new("utility_lower_bound");
    let mut upper = ConditionAcc::new("utility_upper_bound");
    for (j, (b, c)) in budgets_and_costs(econ, w).into_iter().enumerate() {
        let target = if b.is_zero() {
            T::zero()
        } else if c.is_zero() {
            return Err(MarketError::Unbounded { trader: j });
        } else {
            b / c
        };
        let uj = &u.values()[j];
        lower.push(slack_le(&(lo.clone() * target.clone()), uj), j);
        upper.push(slack_le(uj, &(hi.clone() * target)), j);
    }
    let mut supply = ConditionAcc::new("supply_bound");
    let total = econ.aggregate_demand(u);
    for (i, (demand, avail)) in total.iter().zip(econ.supply()).enumerate() {
        supply.push(slack_le(demand, &(hi.clone() * avail)), i);
    }
    Ok(build_report(vec![lower, upper, supply]))
}

/// Verifies an ε-approximate equilibrium given explicit bundles: each trader
/// spends at most `(1+ε)`·budget, reaches at least `(1−ε)` of the optimal
/// utility, and total consumption stays within `(1+ε)`·supply.
pub fn check_allocation_eps_equilibrium<T: Scalar>(
    econ: &Economy<T>,
    alloc: &Allocation<T>,
    w: &PriceVector<T>,
    eps: T,
) -> Result<CheckReport, MarketError> {
    check_alloc_dims(econ, alloc)?;
    check_dims(econ, None, w)?;
    if eps.is_negative() {
        return Err(MarketError::InvalidParameter("eps must be nonnegative"));
    }
    let hi = T::one() + eps.clone();
    let lo = T::one() - eps.clone();
    let mut budget = ConditionAcc::new("budget_bound");
    let mut utility = ConditionAcc::new("near_optimal_utility");
    for j in 0..econ.traders() {
        let bundle = alloc.bundle(j);
        let cost = dot(&bundle, w.values());
        let b = dot(&econ.endowments().column(j), w.values());
        budget.push(slack_le(&cost, &(hi.clone() * b)), j);
        let best = trader_utility_max(econ, w, j)?;
        let have = leontief_utility(econ, j, &bundle)?;
        utility.push(slack_le(&(lo.clone() * best), &have), j);
    }
    let mut supply = ConditionAcc::new("supply_bound");
    for (i, (used, avail)) in alloc.totals().iter().zip(econ.supply()).enumerate() {
        supply.push(slack_le(used, &(hi.clone() * avail)), i);
    }
    Ok(build_report(vec![budget, utility, supply]))
}

/// Verifies a strictly ε-approximate equilibrium: budgets and supply hold
/// exactly (within a 1e-12 relative comparison margin), and only the utility
/// condition is relaxed to `(1−ε)`·optimum. Requires `0 ≤ ε < 1`.
pub fn check_strict_eps_equilibrium<T: Scalar>(
    econ: &Economy<T>,
    alloc: &Allocation<T>,
    w: &PriceVector<T>,
    eps: T,
) -> Result<CheckReport, MarketError> {
    check_alloc_dims(econ, alloc)?;
    check_dims(econ, None, w)?;
    if eps.is_negative() || eps >= T::one() {
        return Err(MarketError::InvalidParameter("eps must lie in [0, 1)"));
    }
    let margin = T::from_f64(NORMALIZATION_TOL);
    let lo = T::one() - eps.clone();
    let mut budget = ConditionAcc::new("budget_exact");
    let mut utility = ConditionAcc::new("near_optimal_utility");
    for j in 0..econ.traders() {
        let bundle = alloc.bundle(j);
        let cost = dot(&bundle, w.values());
        let b = dot(&econ.endowments().column(j), w.values());
        budget.push(slack_le(&cost, &b) + margin.clone(), j);
        let best = trader_utility_max(econ, w, j)?;
        let have = leontief_utility(econ, j, &bundle)?;
        utility.push(slack_le(&(lo.clone() * best), &have), j);
    }
    let mut supply = ConditionAcc::new("supply_exact");
    for (i, (used, avail)) in alloc.totals().iter().zip(econ.supply()).enumerate() {
        supply.push(slack_le(used, &avail) + margin.clone(), i);
    }
    Ok(build_report(vec![budget, utility, supply]))
}

fn check_alloc_dims<T: Scalar>(econ: &Economy<T>, alloc: &Allocation<T>) -> Result<(), MarketError> {
    if alloc.amounts().rows() != econ.goods() {
        return Err(MarketError::DimensionMismatch {
            what: "allocation rows",
            expected: econ.goods(),
            got: alloc.amounts().rows(),
        });
    }
    if alloc.amounts().cols() != econ.traders() {
        return Err(MarketError::DimensionMismatch {
            what: "allocation columns",
            expected: econ.traders(),
            got: alloc.amounts().cols(),
        });
    }
    Ok(())
}

/// Rescales an allocation that passes the ε/2-approximate check into one that
/// passes the strict check at ε: multiplying every bundle by `(1 − ε/2)`
/// brings budgets within `(1−ε²/4)`·budget and consumption within supply,
/// while keeping at least `(1−ε/2)²  ≥ 1−ε` of the optimal utility.
pub fn strict_from_approximate<T: Scalar>(alloc: &Allocation<T>, eps: T) -> Allocation<T> {
    let two = T::one() + T::one();
    let factor = T::one() - eps / two;
    Allocation {
        amounts: alloc.amounts().map(|v| v.clone() * factor.clone()),
    }
}

/// Smallest ε at which `(u, w)` passes [`check_eps_equilibrium`], or infinity
/// when no finite ε works (e.g. positive utility on a zero budget).
pub fn measured_eps(
    econ: &Economy<f64>,
    u: &UtilityVector<f64>,
    w: &PriceVector<f64>,
) -> Result<f64, MarketError> {
    check_dims(econ, Some(u), w)?;
    let mut eps = 0.0f64;
    for (j, (b, c)) in budgets_and_costs(econ, w).into_iter().enumerate() {
        let uj = u.values()[j];
        if b == 0.0 {
            if uj > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        if c == 0.0 {
            return Err(MarketError::Unbounded { trader: j });
        }
        eps = eps.max((uj * c / b - 1.0).abs());
    }
    for (demand, avail) in econ.aggregate_demand(u).iter().zip(econ.supply()) {
        if *demand <= avail {
            continue;
        }
        if avail == 0.0 {
            return Ok(f64::INFINITY);
        }
        eps = eps.max(demand / avail - 1.0);
    }
    Ok(eps)
}
