//! Translation between bimatrix games and Leontief economies.
//!
//! [`reduce_game_to_economy`] embeds a square game with payoffs in `[1,2]`
//! into an exchange economy of twice the size: endowments are the identity
//! (trader `j` owns one unit of good `j`) and the demand matrix is the block
//! matrix `[[0, A], [Bᵀ, 0]]`. The first `n` traders demand only the second
//! group of goods in proportions given by their own payoff rows in `B`; the
//! second `n` traders demand the first group in proportions given by columns
//! of `A`. Under that layout the market's equilibria and the game's Nash
//! equilibria are in one-to-one correspondence:
//!
//! - [`nash_to_market`] maps a Nash profile `(x*, y*)` to a market
//!   equilibrium: rescale each strategy by the opponent's best-response value
//!   so the binding supply rows are exactly 1, then solve the linear
//!   fixed-point system the budget equalities impose on prices (a Perron
//!   eigenvector problem restricted to the equilibrium supports).
//! - [`recover_strategies`] goes the other way: the two halves of any
//!   equilibrium utility vector, normalized to the simplex, form the profile.
//!
//! The quality of the correspondence degrades gracefully: an ε-approximate
//! market equilibrium of a σ-perturbed reduced economy recovers a profile
//! whose relative-Nash defect is bounded by [`transfer_bound`], and
//! [`property_report`] checks the quantitative symmetry/size facts
//! ([price/utility symmetry and the slack-demand utility bound](PropertyReport))
//! that drive that bound.

use crate::games::{check_eps_nash, BimatrixGame, GameError, MixedProfile};
use crate::linalg::{null_space, Matrix};
use crate::market::{
    check_equilibrium, Economy, MarketEquilibrium, MarketError, PriceVector, UtilityVector,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A profile fed to [`nash_to_market`] must pass the additive Nash check at
/// this ε.
pub const NASH_INPUT_EPS: f64 = 1e-9;

/// Constructed market equilibria must pass the exact checker at this
/// relative tolerance before being returned.
pub const CORRESPONDENCE_TOL: f64 = 1e-8;

/// Default multiplier in [`transfer_bound`].
pub const DEFAULT_TRANSFER_CONSTANT: f64 = 10.0;

/// Absolute margin used when comparing measured quantities against the
/// closed-form bounds (absorbs last-ulp float noise; the bounds are O(1)).
const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("game payoffs must lie in [1, 2] for the market embedding")]
    RangeViolation,
    #[error("utility vector half is all zero; strategies cannot be recovered")]
    ZeroUtilityBlock,
    #[error("input profile is not a Nash equilibrium (additive check at 1e-9 failed)")]
    ProfileNotNash,
    #[error("price fixed-point system has no nonnegative solution on the equilibrium supports")]
    ConstructionFailed,
    #[error("precondition violated: {0}")]
    PreconditionViolated(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Market(#[from] MarketError),
}

/// A Leontief economy produced by the game embedding (possibly perturbed),
/// remembering the game size and the perturbation magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEconomy {
    econ: Economy<f64>,
    game_size: usize,
    sigma: f64,
}

/// The four `n × n` corners of a reduced economy's demand matrix. In an
/// unperturbed reduced economy `z` and `n` are zero, `a` is the row player's
/// payoff matrix, and `b` is the TRANSPOSE of the column player's matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandBlocks {
    pub z: Matrix<f64>,
    pub a: Matrix<f64>,
    pub b: Matrix<f64>,
    pub n: Matrix<f64>,
}

impl ReducedEconomy {
    /// Wraps an economy as a reduced one. The economy must be square with an
    /// even side `2·game_size`. When `sigma == 0` the unperturbed shape is
    /// enforced exactly: identity endowments and zero diagonal demand blocks.
    /// For `sigma > 0` entries are only required to be valid economy entries
    /// (Gaussian perturbations have no a-priori upper range); the Uniform
    /// model's ranges can be asserted with [`within_uniform_envelope`](Self::within_uniform_envelope).
    pub fn new(econ: Economy<f64>, game_size: usize, sigma: f64) -> Result<Self, ReductionError> {
        if game_size == 0 {
            return Err(ReductionError::InvalidParameter("game_size must be ≥ 1"));
        }
        if econ.goods() != 2 * game_size || econ.traders() != 2 * game_size {
            return Err(ReductionError::DimensionMismatch {
                what: "reduced economy side",
                expected: 2 * game_size,
                got: econ.goods().max(econ.traders()),
            });
        }
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(ReductionError::InvalidParameter(
                "sigma must be finite and nonnegative",
            ));
        }
        if sigma == 0.0 {
            let side = 2 * game_size;
            for i in 0..side {
                for j in 0..side {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    if *econ.endowments().get(i, j) != expected {
                        return Err(ReductionError::InvalidParameter(
                            "an unperturbed reduced economy must have identity endowments",
                        ));
                    }
                }
            }
            let d = econ.demands();
            for i in 0..side {
                for j in 0..side {
                    let in_diag_block = (i < game_size) == (j < game_size);
                    if in_diag_block && *d.get(i, j) != 0.0 {
                        return Err(ReductionError::InvalidParameter(
                            "an unperturbed reduced economy must have zero diagonal demand blocks",
                        ));
                    }
                }
            }
        }
        Ok(ReducedEconomy {
            econ,
            game_size,
            sigma,
        })
    }

    pub fn economy(&self) -> &Economy<f64> {
        &self.econ
    }

    pub fn game_size(&self) -> usize {
        self.game_size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The four corners of the demand matrix.
    pub fn blocks(&self) -> DemandBlocks {
        split_blocks(&self.econ, self.game_size).expect("constructor checked the dimensions")
    }

    /// True when every entry respects the Uniform perturbation model's
    /// ranges: diagonal demand blocks in `[0, σ]`, payoff blocks within `±σ`
    /// of `[1, 2]`, endowment diagonal in `[1−σ, 1+σ]`, endowment
    /// off-diagonal in `[0, σ]`.
    pub fn within_uniform_envelope(&self) -> bool {
        let s = self.sigma;
        let in_range = |v: f64, lo: f64, hi: f64| (lo..=hi).contains(&v);
        let blocks = self.blocks();
        let diag_blocks_ok = blocks
            .z
            .iter()
            .chain(blocks.n.iter())
            .all(|&v| in_range(v, 0.0, s));
        let payoff_blocks_ok = blocks
            .a
            .iter()
            .chain(blocks.b.iter())
            .all(|&v| in_range(v, 1.0 - s, 2.0 + s));
        let e = self.econ.endowments();
        let endow_ok = (0..e.rows()).all(|i| {
            (0..e.cols()).all(|j| {
                let v = *e.get(i, j);
                if i == j {
                    in_range(v, 1.0 - s, 1.0 + s)
                } else {
                    in_range(v, 0.0, s)
                }
            })
        });
        diag_blocks_ok && payoff_blocks_ok && endow_ok
    }
}

/// Embeds a square `[1,2]`-game into a Leontief economy: identity endowments
/// and demand matrix `[[0, A], [Bᵀ, 0]]`, so that trader `j ≤ n` demands the
/// second goods group in proportions `(b_{j,1}, …, b_{j,n})` and trader `n+j`
/// demands the first group in proportions `(a_{1,j}, …, a_{n,j})`.
pub fn reduce_game_to_economy(game: &BimatrixGame<f64>) -> Result<ReducedEconomy, ReductionError> {
    let n = game.rows();
    if game.cols() != n {
        return Err(ReductionError::DimensionMismatch {
            what: "square game",
            expected: n,
            got: game.cols(),
        });
    }
    if game
        .row_payoffs()
        .iter()
        .chain(game.col_payoffs().iter())
        .any(|&v| !(1.0..=2.0).contains(&v))
    {
        return Err(ReductionError::RangeViolation);
    }
    let zero = Matrix::zeros(n, n);
    let demands = Matrix::from_blocks(
        &zero,
        game.row_payoffs(),
        &game.col_payoffs().transpose(),
        &zero,
    );
    let econ = Economy::new(Matrix::identity(2 * n), demands)?;
    ReducedEconomy::new(econ, n, 0.0)
}

/// Splits a `2n × 2n` demand matrix into its four corners.
pub fn split_blocks(econ: &Economy<f64>, game_size: usize) -> Result<DemandBlocks, ReductionError> {
    let side = 2 * game_size;
    if game_size == 0 || econ.goods() != side || econ.traders() != side {
        return Err(ReductionError::DimensionMismatch {
            what: "economy side for block split",
            expected: side,
            got: econ.goods().max(econ.traders()),
        });
    }
    let d = econ.demands();
    let n = game_size;
    Ok(DemandBlocks {
        z: d.block(0, n, 0, n),
        a: d.block(0, n, n, side),
        b: d.block(n, side, 0, n),
        n: d.block(n, side, n, side),
    })
}

/// Interprets an equilibrium utility vector of a reduced economy as a mixed
/// profile: each half, normalized to sum 1.
pub fn recover_strategies(
    u: &UtilityVector<f64>,
    game_size: usize,
) -> Result<MixedProfile<f64>, ReductionError> {
    if u.len() != 2 * game_size || game_size == 0 {
        return Err(ReductionError::DimensionMismatch {
            what: "utility vector for strategy recovery",
            expected: 2 * game_size,
            got: u.len(),
        });
    }
    let (xs, ys) = u.values().split_at(game_size);
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    if sx <= 0.0 || sy <= 0.0 {
        return Err(ReductionError::ZeroUtilityBlock);
    }
    Ok(MixedProfile::new(
        xs.iter().map(|v| v / sx).collect(),
        ys.iter().map(|v| v / sy).collect(),
    )?)
}

/// Worst-case relative-Nash defect of strategies recovered from an
/// ε-approximate equilibrium of a σ-perturbed reduced economy of game size
/// `n`: `min(1, C·(n·√(max(ε, nσ)) + n·√(nσ)))`. Defects beyond 1 are
/// meaningless for the relative notion, hence the clamp.
pub fn transfer_bound(n: usize, eps: f64, sigma: f64, c: f64) -> f64 {
    let nf = n as f64;
    let lambda = eps.max(nf * sigma);
    (c * (nf * lambda.sqrt() + nf * (nf * sigma).sqrt())).min(1.0)
}

fn max_position(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `M·p = p` for a nonnegative `p` (sum 1). `M` is expected to be
/// (near-)column-stochastic with positive entries, so the fixed point is the
/// Perron eigenvector: try the null space of `M − I` first, then fall back to
/// damped power iteration for matrices that are only approximately
/// stochastic.
fn perron_fixed_point(m: &Matrix<f64>) -> Option<Vec<f64>> {
    let k = m.rows();
    let residual = |p: &[f64]| -> f64 {
        m.matvec(p)
            .iter()
            .zip(p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let mut shifted = m.clone();
    for i in 0..k {
        *shifted.get_mut(i, i) -= 1.0;
    }
    for basis in null_space(&shifted, 1e-10) {
        let total: f64 = basis.iter().sum();
        if total == 0.0 {
            continue;
        }
        let sign = total.signum();
        if basis.iter().any(|&v| v * sign < -1e-9) {
            continue;
        }
        let clamped: Vec<f64> = basis.iter().map(|&v| (v * sign).max(0.0)).collect();
        let sum: f64 = clamped.iter().sum();
        let candidate: Vec<f64> = clamped.iter().map(|v| v / sum).collect();
        if residual(&candidate) <= 1e-9 {
            return Some(candidate);
        }
    }
    // Damped iteration p ← (p + M·p)/2 keeps the fixed points of M and
    // contracts everything else when M is positive with spectral radius ~1.
    let mut p = vec![1.0 / k as f64; k];
    for _ in 0..5_000 {
        let mp = m.matvec(&p);
        let mut next: Vec<f64> = p.iter().zip(&mp).map(|(a, b)| 0.5 * (a + b)).collect();
        let total: f64 = next.iter().sum();
        if total <= 0.0 || total.is_nan() {
            return None;
        }
        for v in &mut next {
            *v /= total;
        }
        p = next;
    }
    if residual(&p) <= 1e-9 {
        Some(p)
    } else {
        None
    }
}

/// Maps a Nash equilibrium of a `[1,2]`-game to a market equilibrium of its
/// reduced economy.
///
/// Scaling each strategy by the opponent's best-response value (`x* / v_col`,
/// `y* / v_row`) makes the supply rows bind exactly on the equilibrium
/// supports. The budget equalities then force `p = diag(x)·B·q` and
/// `q = diag(y)·Aᵀ·p` on the supports; substituting one into the other gives
/// a column-stochastic positive matrix (columns sum to 1 precisely because
/// supported strategies are best responses), whose Perron eigenvector is the
/// price vector. The result is normalized to `‖w‖₁ = 1` and re-verified with
/// the exact checker at `1e-8` before being returned.
pub fn nash_to_market(
    game: &BimatrixGame<f64>,
    profile: &MixedProfile<f64>,
) -> Result<MarketEquilibrium<f64>, ReductionError> {
    let reduced = reduce_game_to_economy(game)?;
    let n = game.rows();
    if !check_eps_nash(game, profile, NASH_INPUT_EPS)?.passed {
        return Err(ReductionError::ProfileNotNash);
    }
    let a = game.row_payoffs();
    let b = game.col_payoffs();
    let v_row = max_position(&a.matvec(profile.y()));
    let v_col = max_position(&b.tr_matvec(profile.x()));
    let x_scaled: Vec<f64> = profile.x().iter().map(|v| v / v_col).collect();
    let y_scaled: Vec<f64> = profile.y().iter().map(|v| v / v_row).collect();

    let support = |v: &[f64]| -> Vec<usize> {
        v.iter()
            .enumerate()
            .filter(|(_, &e)| e > 0.0)
            .map(|(i, _)| i)
            .collect()
    };
    let s_rows = support(profile.x());
    let t_cols = support(profile.y());

    // M[i][k] = x_i · Σ_{j ∈ T} b_{i,j} · y_j · a_{k,j}, for i, k ∈ S.
    let k = s_rows.len();
    let mut fixed_point = Matrix::zeros(k, k);
    for (ii, &i) in s_rows.iter().enumerate() {
        for (kk, &kr) in s_rows.iter().enumerate() {
            let mut acc = 0.0;
            for &j in &t_cols {
                acc += b.get(i, j) * y_scaled[j] * a.get(kr, j);
            }
            *fixed_point.get_mut(ii, kk) = x_scaled[i] * acc;
        }
    }
    let p_support = perron_fixed_point(&fixed_point).ok_or(ReductionError::ConstructionFailed)?;

    let mut p = vec![0.0; n];
    for (ii, &i) in s_rows.iter().enumerate() {
        p[i] = p_support[ii];
    }
    // q_j = y_j · Σ_{i ∈ S} a_{i,j} p_i on the column support.
    let mut q = vec![0.0; n];
    for &j in &t_cols {
        let mut acc = 0.0;
        for (ii, &i) in s_rows.iter().enumerate() {
            acc += a.get(i, j) * p_support[ii];
        }
        q[j] = y_scaled[j] * acc;
    }
    let total: f64 = p.iter().chain(q.iter()).sum();
    if total <= 0.0 || total.is_nan() {
        return Err(ReductionError::ConstructionFailed);
    }
    let w = PriceVector::new(p.iter().chain(q.iter()).map(|v| v / total).collect())?;
    let u = UtilityVector::new(x_scaled.into_iter().chain(y_scaled).collect())?;
    let report = check_equilibrium(reduced.economy(), &u, &w, CORRESPONDENCE_TOL)?;
    if !report.passed {
        return Err(ReductionError::ConstructionFailed);
    }
    Ok(MarketEquilibrium { u, w })
}

/// Closed interval used in the property bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    fn contains_with_margin(&self, v: f64) -> bool {
        v >= self.lo - BOUNDARY_MARGIN && v <= self.hi + BOUNDARY_MARGIN
    }
}

/// One quantitative bound that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyViolation {
    /// "price_symmetry", "utility_symmetry", or "utility_upper_bound".
    pub check: String,
    /// Component index for the per-coordinate bound; None for norm bounds.
    pub index: Option<usize>,
    pub value: f64,
    pub allowed: Interval,
}

/// Quantitative health report of an (ε, σ) equilibrium of a reduced economy.
///
/// - **price symmetry**: each half of the price vector has 1-norm in
///   `[(1−ε−4nσ)/(2−4nσ), (1+ε)/(2−4nσ)]` (collapses to exactly 1/2 at
///   ε = σ = 0);
/// - **utility symmetry**: each half of the utility vector has 1-norm in
///   `[(1−ε)(1−σ)(1−ε−4nσ)/((1+ε)(2+2σ)),
///   ((1+ε)² + nσ(1+ε)(2−4nσ))/((1−σ)(1−ε−4nσ))]`;
/// - **utility upper bound**: with λ = max(ε, nσ) > 0, any trader whose
///   good's aggregate demand (`s = Z·x + A·y` for the first half,
///   `t = B·x + N·y` for the second) is at least `√λ` below `(1+ε)(1−σ)`
///   must have utility ≤ `(1+ε)(2−4nσ)(5√λ+σ)/((1−σ)(1−ε−4nσ))` — an
///   approximate-complementarity statement. At λ = 0 the trigger degenerates
///   (the bound collapses to zero at the binding boundary), so it is skipped;
///   exact complementarity is the equilibrium checker's job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub eps: f64,
    pub sigma: f64,
    /// max(eps, n·sigma) — the combined slack scale.
    pub lambda: f64,
    pub price_interval: Interval,
    pub p_norm: f64,
    pub q_norm: f64,
    pub utility_interval: Interval,
    pub x_norm: f64,
    pub y_norm: f64,
    /// Aggregate demand for the first goods group: Z·x + A·y.
    pub s: Vec<f64>,
    /// Aggregate demand for the second goods group: B·x + N·y.
    pub t: Vec<f64>,
    pub violations: Vec<PropertyViolation>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates the three quantitative bounds for an ε-approximate equilibrium
/// `(u, w)` of a σ-perturbed reduced economy. Preconditions: `‖w‖₁ = 1`,
/// `0 ≤ ε < 1/2`, `σ < 1/(8n)`.
pub fn property_report(
    reduced: &ReducedEconomy,
    u: &UtilityVector<f64>,
    w: &PriceVector<f64>,
    eps: f64,
) -> Result<PropertyReport, ReductionError> {
    let n = reduced.game_size();
    if u.len() != 2 * n {
        return Err(ReductionError::DimensionMismatch {
            what: "utility vector",
            expected: 2 * n,
            got: u.len(),
        });
    }
    if w.len() != 2 * n {
        return Err(ReductionError::DimensionMismatch {
            what: "price vector",
            expected: 2 * n,
            got: w.len(),
        });
    }
    if !w.normalized() {
        return Err(ReductionError::PreconditionViolated(
            "price vector must have 1-norm 1",
        ));
    }
    if !(0.0..0.5).contains(&eps) {
        return Err(ReductionError::PreconditionViolated(
            "eps must lie in [0, 1/2)",
        ));
    }
    let nf = n as f64;
    let sigma = reduced.sigma();
    if sigma >= 1.0 / (8.0 * nf) {
        return Err(ReductionError::PreconditionViolated(
            "sigma must be below 1/(8n)",
        ));
    }

    let lambda = eps.max(nf * sigma);
    let p_norm: f64 = w.values()[..n].iter().sum();
    let q_norm: f64 = w.values()[n..].iter().sum();
    let (xs, ys) = u.values().split_at(n);
    let x_norm: f64 = xs.iter().sum();
    let y_norm: f64 = ys.iter().sum();

    let denom = 2.0 - 4.0 * nf * sigma;
    let price_interval = Interval {
        lo: (1.0 - eps - 4.0 * nf * sigma) / denom,
        hi: (1.0 + eps) / denom,
    };
    let utility_interval = Interval {
        lo: (1.0 - eps) * (1.0 - sigma) * (1.0 - eps - 4.0 * nf * sigma)
            / ((1.0 + eps) * (2.0 + 2.0 * sigma)),
        hi: ((1.0 + eps) * (1.0 + eps) + nf * sigma * (1.0 + eps) * denom)
            / ((1.0 - sigma) * (1.0 - eps - 4.0 * nf * sigma)),
    };

    let blocks = reduced.blocks();
    let add = |u: Vec<f64>, v: Vec<f64>| -> Vec<f64> {
        u.into_iter().zip(v).map(|(a, b)| a + b).collect()
    };
    let s = add(blocks.z.matvec(xs), blocks.a.matvec(ys));
    let t = add(blocks.b.matvec(xs), blocks.n.matvec(ys));

    let mut violations = Vec::new();
    for (name, value) in [("p", p_norm), ("q", q_norm)] {
        if !price_interval.contains_with_margin(value) {
            violations.push(PropertyViolation {
                check: format!("price_symmetry_{name}"),
                index: None,
                value,
                allowed: price_interval,
            });
        }
    }
    for (name, value) in [("x", x_norm), ("y", y_norm)] {
        if !utility_interval.contains_with_margin(value) {
            violations.push(PropertyViolation {
                check: format!("utility_symmetry_{name}"),
                index: None,
                value,
                allowed: utility_interval,
            });
        }
    }
    if lambda > 0.0 {
        let trigger = (1.0 + eps) * (1.0 - sigma) - lambda.sqrt();
        let cap = (1.0 + eps) * denom * (5.0 * lambda.sqrt() + sigma)
            / ((1.0 - sigma) * (1.0 - eps - 4.0 * nf * sigma));
        let allowed = Interval { lo: 0.0, hi: cap };
        for (label, demand, utility) in [("x", &s, xs), ("y", &t, ys)] {
            for i in 0..n {
                if demand[i] <= trigger && utility[i] > cap + BOUNDARY_MARGIN {
                    violations.push(PropertyViolation {
                        check: format!("utility_upper_bound_{label}"),
                        index: Some(i),
                        value: utility[i],
                        allowed,
                    });
                }
            }
        }
    }

    Ok(PropertyReport {
        eps,
        sigma,
        lambda,
        price_interval,
        p_norm,
        q_norm,
        utility_interval,
        x_norm,
        y_norm,
        s,
        t,
        violations,
    })
}
