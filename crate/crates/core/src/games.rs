//! Two-player bimatrix games: payoffs, approximate-Nash checkers, and small
//! exact solvers.
//!
//! A game is a pair of `m × n` payoff matrices `(A, B)`: the row player picks
//! one of `m` rows, the column player one of `n` columns, and entry `(i, j)`
//! pays `a_{ij}` to the row player and `b_{ij}` to the column player. Mixed
//! strategies are probability vectors; expected payoffs are the bilinear
//! forms `xᵀAy` and `xᵀBy`.
//!
//! Two approximation notions are checked:
//! - **additive** ([`check_eps_nash`]): each player's payoff is within `ε` of
//!   their best response against the opponent's strategy — invariant under
//!   shifting both matrices, covariant under scaling (scale payoffs by `c`,
//!   scale `ε` by `c`);
//! - **relative** ([`check_eps_relative_nash`]): each player earns at least
//!   `(1−ε)` times their best response — invariant under positive scaling,
//!   meaningful only for nonnegative payoffs.
//!
//! The solvers ([`support_enumeration_nash`], [`lemke_howson`]) are
//! desk-scale oracles on `f64` games; everything they return is re-verified
//! by the checkers rather than trusted.

use crate::linalg::{dot, solve_square, sum, Matrix};
use crate::market::{build_report, slack_le, CheckReport, ConditionAcc, NORMALIZATION_TOL};
use crate::scalar::Scalar;
use thiserror::Error;

/// Every profile returned by [`support_enumeration_nash`] must survive the
/// additive check at this ε.
pub const ORACLE_EPS: f64 = 1e-9;

/// Candidate strategies from a solved support system may dip this far below
/// zero before the candidate is rejected (solver round-off allowance).
const NONNEG_TOL: f64 = 1e-9;

/// Two profiles within this 1-norm distance count as the same equilibrium.
const DEDUP_TOL: f64 = 1e-9;

/// Pivot entries at or below this magnitude are treated as zero.
const PIVOT_EPS: f64 = 1e-9;

/// Pivot budget before declaring the path lost to round-off.
const MAX_PIVOTS: usize = 10_000;

/// Strategy counts above this make support enumeration explode (4^{m+n}).
pub const ENUMERATION_LIMIT: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{what} contains a non-finite entry")]
    InvalidEntry { what: &'static str },
    #[error("{what} is not a probability vector")]
    NotDistribution { what: &'static str },
    #[error("payoff entry outside the declared range")]
    RangeTagViolated,
    #[error("game too large for support enumeration (limit {limit} strategies per player)")]
    TooLarge { limit: usize },
    #[error("pivoting failed to terminate; input is degenerate beyond the lexicographic rule")]
    CycleDetected,
    #[error("relative comparison is ill-posed: payoffs must be nonnegative")]
    IllPosed,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Two-player game in strategic form. `A` and `B` are the row and column
/// player's payoff matrices, both `m × n`. An optional `range_tag` declares
/// (and enforces) that every entry lies in a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame<T> {
    a: Matrix<T>,
    b: Matrix<T>,
    range_tag: Option<(T, T)>,
}

impl<T: Scalar> BimatrixGame<T> {
    pub fn new(a: Matrix<T>, b: Matrix<T>, range_tag: Option<(T, T)>) -> Result<Self, GameError> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(GameError::InvalidParameter(
                "game must have at least one strategy per player",
            ));
        }
        if b.rows() != a.rows() || b.cols() != a.cols() {
            return Err(GameError::DimensionMismatch {
                what: "column-player payoff matrix entries",
                expected: a.rows() * a.cols(),
                got: b.rows() * b.cols(),
            });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_valid()) {
            return Err(GameError::InvalidEntry { what: "payoffs" });
        }
        if let Some((lo, hi)) = &range_tag {
            if a.iter().chain(b.iter()).any(|v| v < lo || v > hi) {
                return Err(GameError::RangeTagViolated);
            }
        }
        Ok(BimatrixGame { a, b, range_tag })
    }

    /// Row-player strategy count `m`.
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// Column-player strategy count `n`.
    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn row_payoffs(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn col_payoffs(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn range_tag(&self) -> Option<&(T, T)> {
        self.range_tag.as_ref()
    }
}

/// A pair of mixed strategies, one per player, each on the probability
/// simplex (nonnegative, summing to 1 within 1e-12).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile<T> {
    x: Vec<T>,
    y: Vec<T>,
}

impl<T: Scalar> MixedProfile<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self, GameError> {
        for (what, v) in [("row strategy", &x), ("column strategy", &y)] {
            if v.is_empty() || v.iter().any(|e| !e.is_valid() || e.is_negative()) {
                return Err(GameError::NotDistribution { what });
            }
            let total = sum(v);
            if (total - T::one()).abs() > T::from_f64(NORMALIZATION_TOL) {
                return Err(GameError::NotDistribution { what });
            }
        }
        Ok(MixedProfile { x, y })
    }

    /// Both players play pure strategies `(i, j)`.
    pub fn pure(i: usize, m: usize, j: usize, n: usize) -> Self {
        let mut x = vec![T::zero(); m];
        let mut y = vec![T::zero(); n];
        x[i] = T::one();
        y[j] = T::one();
        MixedProfile { x, y }
    }

    /// Both players uniformly randomize.
    pub fn uniform(m: usize, n: usize) -> Self {
        let xm = T::one() / T::from_f64(m as f64);
        let yn = T::one() / T::from_f64(n as f64);
        MixedProfile {
            x: vec![xm; m],
            y: vec![yn; n],
        }
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }
}

fn check_profile_dims<T: Scalar>(
    game: &BimatrixGame<T>,
    profile: &MixedProfile<T>,
) -> Result<(), GameError> {
    if profile.x().len() != game.rows() {
        return Err(GameError::DimensionMismatch {
            what: "row strategy",
            expected: game.rows(),
            got: profile.x().len(),
        });
    }
    if profile.y().len() != game.cols() {
        return Err(GameError::DimensionMismatch {
            what: "column strategy",
            expected: game.cols(),
            got: profile.y().len(),
        });
    }
    Ok(())
}

/// Expected payoffs `(xᵀAy, xᵀBy)`.
pub fn payoffs<T: Scalar>(
    game: &BimatrixGame<T>,
    profile: &MixedProfile<T>,
) -> Result<(T, T), GameError> {
    check_profile_dims(game, profile)?;
    let ay = game.a.matvec(profile.y());
    let bty = game.b.matvec(profile.y());
    Ok((dot(profile.x(), &ay), dot(profile.x(), &bty)))
}

/// Best payoff each player could get by deviating unilaterally:
/// `(max_i (Ay)_i, max_j (xᵀB)_j)` — pure deviations suffice.
pub fn best_response_values<T: Scalar>(
    game: &BimatrixGame<T>,
    profile: &MixedProfile<T>,
) -> Result<(T, T), GameError> {
    check_profile_dims(game, profile)?;
    let ay = game.a.matvec(profile.y());
    let xb = game.b.tr_matvec(profile.x());
    let max = |v: Vec<T>| {
        v.into_iter()
            .reduce(|acc, e| if e > acc { e } else { acc })
            .expect("game has at least one strategy")
    };
    Ok((max(ay), max(xb)))
}

/// Checks the additive condition: each player's payoff within `eps` of their
/// best response. Slack for each player is
/// `(payoff − (best − eps)) / max(1, |payoff|)`.
pub fn check_eps_nash<T: Scalar>(
    game: &BimatrixGame<T>,
    profile: &MixedProfile<T>,
    eps: T,
) -> Result<CheckReport, GameError> {
    if eps.is_negative() {
        return Err(GameError::InvalidParameter("eps must be nonnegative"));
    }
    let (row_payoff, col_payoff) = payoffs(game, profile)?;
    let (row_best, col_best) = best_response_values(game, profile)?;
    let mut row = ConditionAcc::new("row_best_response");
    row.push(slack_le(&(row_best - eps.clone()), &row_payoff), 0);
    let mut col = ConditionAcc::new("col_best_response");
    col.push(slack_le(&(col_best - eps), &col_payoff), 1);
    Ok(build_report(vec![row, col]))
}

/// Checks the relative condition: each player's payoff at least `(1−eps)`
/// times their best response. Requires nonnegative payoffs and `eps ∈ [0,1]`.
pub fn check_eps_relative_nash<T: Scalar>(
    game: &BimatrixGame<T>,
    profile: &MixedProfile<T>,
    eps: T,
) -> Result<CheckReport, GameError> {
    if eps.is_negative() || eps > T::one() {
        return Err(GameError::InvalidParameter("eps must lie in [0, 1]"));
    }
    if game.a.iter().chain(game.b.iter()).any(|v| v.is_negative()) {
        return Err(GameError::IllPosed);
    }
    let (row_payoff, col_payoff) = payoffs(game, profile)?;
    let (row_best, col_best) = best_response_values(game, profile)?;
    let keep = T::one() - eps;
    let mut row = ConditionAcc::new("row_relative_best_response");
    row.push(slack_le(&(keep.clone() * row_best), &row_payoff), 0);
    let mut col = ConditionAcc::new("col_relative_best_response");
    col.push(slack_le(&(keep * col_best), &col_payoff), 1);
    Ok(build_report(vec![row, col]))
}

/// Smallest ε at which the profile passes [`check_eps_relative_nash`]:
/// `max(0, 1 − payoff/best)` over both players, where a zero best response
/// contributes nothing (payoff can only be zero too). Requires nonnegative
/// payoff matrices, like the relative check itself.
pub fn measured_relative_defect(
    game: &BimatrixGame<f64>,
    profile: &MixedProfile<f64>,
) -> Result<f64, GameError> {
    if game.a.iter().chain(game.b.iter()).any(|&v| v < 0.0) {
        return Err(GameError::IllPosed);
    }
    let (row_payoff, col_payoff) = payoffs(game, profile)?;
    let (row_best, col_best) = best_response_values(game, profile)?;
    let defect = |pay: f64, best: f64| {
        if best <= 0.0 {
            0.0
        } else {
            (1.0 - pay / best).max(0.0)
        }
    };
    Ok(defect(row_payoff, row_best).max(defect(col_payoff, col_best)))
}

/// Affinely rescales each payoff matrix so its entries span `[lo, hi]`;
/// constant matrices map to the midpoint. The result carries the range tag.
pub fn normalize_game<T: Scalar>(
    game: &BimatrixGame<T>,
    lo: T,
    hi: T,
) -> Result<BimatrixGame<T>, GameError> {
    if hi <= lo {
        return Err(GameError::InvalidParameter("range must satisfy hi > lo"));
    }
    let two = T::one() + T::one();
    let remap = |m: &Matrix<T>| -> Matrix<T> {
        let min = m
            .iter()
            .cloned()
            .reduce(|acc, e| if e < acc { e } else { acc })
            .expect("nonempty matrix");
        let max = m
            .iter()
            .cloned()
            .reduce(|acc, e| if e > acc { e } else { acc })
            .expect("nonempty matrix");
        if max == min {
            let mid = (lo.clone() + hi.clone()) / two.clone();
            return m.map(|_| mid.clone());
        }
        let scale = (hi.clone() - lo.clone()) / (max - min.clone());
        m.map(|v| lo.clone() + (v.clone() - min.clone()) * scale.clone())
    };
    BimatrixGame::new(
        remap(&game.a),
        remap(&game.b),
        Some((lo.clone(), hi.clone())),
    )
}

/// Everything [`support_enumeration_nash`] found. `degenerate` flags that at
/// least one indifference system was singular (the enumeration then falls
/// back to a uniform candidate on that support rather than aborting).
#[derive(Debug, Clone, PartialEq)]
pub struct SupportEnumeration {
    pub profiles: Vec<MixedProfile<f64>>,
    pub degenerate: bool,
}

/// All index subsets of `{0..n}` of size `k`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Solves for weights over `own_support` that make the opponent indifferent
/// across `opp_support`: `Σ_i w_i (P[i][j₁] − P[i][j₂]) = 0` for consecutive
/// opponent strategies, plus `Σ w_i = 1`. `payoff_of_opp[i][j]` is the
/// opponent's payoff when the owner plays `i` and the opponent plays `j`.
fn indifference_weights(
    payoff_of_opp: &dyn Fn(usize, usize) -> f64,
    own_support: &[usize],
    opp_support: &[usize],
) -> Option<Vec<f64>> {
    let s = own_support.len();
    let mut rows = Vec::with_capacity(s);
    for t in 0..s - 1 {
        let (j1, j2) = (opp_support[t], opp_support[t + 1]);
        rows.push(
            own_support
                .iter()
                .map(|&i| payoff_of_opp(i, j1) - payoff_of_opp(i, j2))
                .collect::<Vec<f64>>(),
        );
    }
    rows.push(vec![1.0; s]);
    let mut rhs = vec![0.0; s];
    rhs[s - 1] = 1.0;
    solve_square(&Matrix::from_rows(rows), &rhs, 1e-12)
}

/// Embeds support weights into a full strategy vector, rejecting significant
/// negativity and renormalizing away round-off.
fn embed(weights: &[f64], support: &[usize], len: usize) -> Option<Vec<f64>> {
    if weights.iter().any(|&v| v < -NONNEG_TOL) {
        return None;
    }
    let mut full = vec![0.0; len];
    for (&i, &v) in support.iter().zip(weights) {
        full[i] = v.max(0.0);
    }
    let total: f64 = full.iter().sum();
    if total <= 0.0 {
        return None;
    }
    for v in &mut full {
        *v /= total;
    }
    Some(full)
}

fn profile_distance(a: &MixedProfile<f64>, b: &MixedProfile<f64>) -> f64 {
    let d1: f64 = a.x().iter().zip(b.x()).map(|(u, v)| (u - v).abs()).sum();
    let d2: f64 = a.y().iter().zip(b.y()).map(|(u, v)| (u - v).abs()).sum();
    d1 + d2
}

/// Finds Nash equilibria by trying every pair of equal-size supports and
/// solving the two indifference systems. On nondegenerate games every
/// equilibrium has equal-size supports, so the sweep is exhaustive there;
/// singular systems flag the game degenerate and fall back to a uniform
/// candidate on that support. Every candidate must pass [`check_eps_nash`]
/// at [`ORACLE_EPS`]. Results are ordered by support size, then
/// lexicographically by support; near-duplicates (1e-9) are dropped.
pub fn support_enumeration_nash(
    game: &BimatrixGame<f64>,
) -> Result<SupportEnumeration, GameError> {
    let (m, n) = (game.rows(), game.cols());
    if m > ENUMERATION_LIMIT || n > ENUMERATION_LIMIT {
        return Err(GameError::TooLarge {
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut profiles: Vec<MixedProfile<f64>> = Vec::new();
    let mut degenerate = false;
    for size in 1..=m.min(n) {
        for rows_support in combinations(m, size) {
            for cols_support in combinations(n, size) {
                let candidate = if size == 1 {
                    Some((vec![1.0], vec![1.0]))
                } else {
                    // Row weights equalize the COLUMN player's payoffs (B);
                    // column weights equalize the ROW player's payoffs (A).
                    let xw = indifference_weights(
                        &|i, j| *game.b.get(i, j),
                        &rows_support,
                        &cols_support,
                    );
                    let yw = indifference_weights(
                        &|j, i| *game.a.get(i, j),
                        &cols_support,
                        &rows_support,
                    );
                    match (xw, yw) {
                        (Some(x), Some(y)) => Some((x, y)),
                        _ => {
                            degenerate = true;
                            let u = 1.0 / size as f64;
                            Some((vec![u; size], vec![u; size]))
                        }
                    }
                };
                let Some((xw, yw)) = candidate else { continue };
                let (Some(x), Some(y)) = (
                    embed(&xw, &rows_support, m),
                    embed(&yw, &cols_support, n),
                ) else {
                    continue;
                };
                let Ok(profile) = MixedProfile::new(x, y) else {
                    continue;
                };
                if !check_eps_nash(game, &profile, ORACLE_EPS)?.passed {
                    continue;
                }
                if profiles
                    .iter()
                    .any(|p| profile_distance(p, &profile) <= DEDUP_TOL)
                {
                    continue;
                }
                profiles.push(profile);
            }
        }
    }
    Ok(SupportEnumeration {
        profiles,
        degenerate,
    })
}

/// One tableau of the complementary-pivoting solver: constraint rows
/// `slack = 1 − M·decision` kept in equation form with an explicit slack
/// identity block used for lexicographic tie-breaking.
struct Tableau {
    rows: usize,
    decision: usize,
    /// rows × (decision + rows + 1); final column is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Basic variable of each row: `0..decision` decision, then slacks.
    basis: Vec<usize>,
}

impl Tableau {
    /// `constraint` must be entrywise positive so the polytope
    /// `{v ≥ 0 : constraint·v ≤ 1}` is bounded.
    fn new(constraint: &Matrix<f64>) -> Self {
        let rows = constraint.rows();
        let decision = constraint.cols();
        let mut t = vec![vec![0.0; decision + rows + 1]; rows];
        for (r, row) in t.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate().take(decision) {
                *cell = *constraint.get(r, c);
            }
            row[decision + r] = 1.0;
            row[decision + rows] = 1.0;
        }
        Tableau {
            rows,
            decision,
            t,
            basis: (0..rows).map(|r| decision + r).collect(),
        }
    }

    /// Brings `entering` into the basis using the lexicographic minimum-ratio
    /// rule (right-hand side first, then the slack identity columns), which
    /// makes the pivot choice deterministic even on degenerate inputs.
    /// Returns the leaving variable, or None on an unbounded ray.
    fn pivot(&mut self, entering: usize) -> Option<usize> {
        let rhs = self.decision + self.rows;
        let mut leave: Option<usize> = None;
        for r in 0..self.rows {
            let a = self.t[r][entering];
            if a <= PIVOT_EPS {
                continue;
            }
            let better = match leave {
                None => true,
                Some(cur) => {
                    let b = self.t[cur][entering];
                    let mut ord = (self.t[r][rhs] / a)
                        .partial_cmp(&(self.t[cur][rhs] / b))
                        .expect("tableau entries are finite");
                    if ord == std::cmp::Ordering::Equal {
                        for k in 0..self.rows {
                            let col = self.decision + k;
                            ord = (self.t[r][col] / a)
                                .partial_cmp(&(self.t[cur][col] / b))
                                .expect("tableau entries are finite");
                            if ord != std::cmp::Ordering::Equal {
                                break;
                            }
                        }
                    }
                    ord == std::cmp::Ordering::Less
                }
            };
            if better {
                leave = Some(r);
            }
        }
        let row = leave?;
        let p = self.t[row][entering];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let f = self.t[r][entering];
            if f == 0.0 {
                continue;
            }
            for c in 0..self.t[r].len() {
                self.t[r][c] -= f * self.t[row][c];
            }
        }
        let leaving = self.basis[row];
        self.basis[row] = entering;
        Some(leaving)
    }

    fn decision_values(&self) -> Vec<f64> {
        let rhs = self.decision + self.rows;
        let mut out = vec![0.0; self.decision];
        for r in 0..self.rows {
            if self.basis[r] < self.decision {
                out[self.basis[r]] = self.t[r][rhs].max(0.0);
            }
        }
        out
    }
}

/// Complementary-pivoting Nash solver. Starting from the all-zero artificial
/// point, drops `dropped_label` (1-based: labels `1..=m` are row strategies,
/// `m+1..=m+n` column strategies) and follows the unique almost-complementary
/// path until the label is picked back up, alternating pivots between the two
/// best-response polytopes. Payoff matrices are shifted to be positive first
/// (equilibria are shift-invariant). Degenerate ties are broken by the
/// lexicographic rule, so the output is deterministic; inputs degenerate
/// beyond that surface as [`GameError::CycleDetected`].
pub fn lemke_howson(
    game: &BimatrixGame<f64>,
    dropped_label: usize,
) -> Result<MixedProfile<f64>, GameError> {
    let (m, n) = (game.rows(), game.cols());
    if dropped_label < 1 || dropped_label > m + n {
        return Err(GameError::InvalidParameter(
            "dropped_label must lie in 1..=m+n",
        ));
    }
    let positive = |mat: &Matrix<f64>| {
        let min = mat.iter().cloned().fold(f64::INFINITY, f64::min);
        mat.map(|v| v - min + 1.0)
    };
    let a = positive(game.row_payoffs());
    let b = positive(game.col_payoffs());

    // Tableau 1 over x: s = 1 − Bᵀx (n rows). Variable labels: x_i → i,
    // s_j → m+j; with x occupying columns 0..m this makes label = var index.
    // Tableau 2 over y: r = 1 − Ay (m rows). Labels: y_j → m+j, r_i → i.
    let mut t1 = Tableau::new(&b.transpose());
    let mut t2 = Tableau::new(&a);
    let label_of = |sys: u8, var: usize| -> usize {
        match sys {
            1 => var,
            _ => {
                if var < n {
                    m + var
                } else {
                    var - n
                }
            }
        }
    };
    let var_of = |sys: u8, label: usize| -> usize {
        match sys {
            1 => label,
            _ => {
                if label < m {
                    n + label
                } else {
                    label - m
                }
            }
        }
    };

    let target = dropped_label - 1;
    let (mut sys, mut entering) = if target < m {
        (1u8, target)
    } else {
        (2u8, target - m)
    };
    for _ in 0..MAX_PIVOTS {
        let leaving = match sys {
            1 => t1.pivot(entering),
            _ => t2.pivot(entering),
        }
        .ok_or(GameError::CycleDetected)?;
        let label = label_of(sys, leaving);
        if label == target {
            let x = t1.decision_values();
            let y = t2.decision_values();
            let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
            if sx <= 0.0 || sy <= 0.0 {
                return Err(GameError::CycleDetected);
            }
            return MixedProfile::new(
                x.iter().map(|v| v / sx).collect(),
                y.iter().map(|v| v / sy).collect(),
            );
        }
        sys = 3 - sys;
        entering = var_of(sys, label);
    }
    Err(GameError::CycleDetected)
}
