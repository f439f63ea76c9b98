//! JSON documents for every artifact the tools read and write.
//!
//! All documents are plain JSON objects with stable field names:
//!
//! * economy — `{"m": goods, "n": traders, "endowments": [[…]], "demands": [[…]]}`
//!   (matrices are rows-first, one inner array per good, one column per trader);
//! * equilibrium — `{"u": […], "w": […]}`;
//! * allocation — `{"X": [[…]]}`;
//! * game — `{"A": [[…]], "B": [[…]], "range": [lo, hi]}` with `range` optional;
//! * profile — `{"x": […], "y": […]}`;
//! * reduced economy — the economy fields plus `{"game_size": n, "sigma": s}`;
//! * solve result — `{"status": "found" | "not_found" | "budget_exhausted",
//!   "equilibrium": … | null, "points_scanned": k, "achieved_eps": e | null}`;
//! * solver — `"exact_reduced"` or `{"grid": {"resolution": k, "eps_target": e,
//!   "max_points": p}}`;
//! * experiment config — `{"game": …, "sigmas": […], "trials": t,
//!   "eps_prime": e, "solver": …, "master_seed": s}` with `master_seed`
//!   defaulting to 0.
//!
//! Every numeric position accepts either a JSON number or a string literal
//! (`"0.25"`, `"-3e-2"`, `"22/7"`). Strings are parsed exactly: in rational
//! mode they are kept exact, in floating-point mode they are rounded once to
//! the nearest double. On output, floating-point values are emitted as JSON
//! numbers in shortest round-trip form and rational values as `"p/q"` (or
//! `"p"` for integers), so decode ∘ encode is the identity in both modes.

use serde_json::{json, Map, Number, Value};
use thiserror::Error;

use crate::games::{BimatrixGame, GameError, MixedProfile};
use crate::linalg::Matrix;
use crate::market::{
    Allocation, CheckReport, Economy, MarketEquilibrium, MarketError, PriceVector, UtilityVector,
};
use crate::reduction::{PropertyReport, ReducedEconomy, ReductionError};
use crate::scalar::{format_exact, parse_exact, Scalar};
use crate::smoothed::{ExperimentConfig, SolverSpec, TrialRecord};
use crate::solvers::{GridSpec, SolveResult, SolveStatus};

#[derive(Debug, Error)]
pub enum JsonError {
    /// The text is not valid JSON at all.
    #[error("invalid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    /// The JSON is well formed but does not match the document shape.
    #[error("{what}: {why}")]
    Schema { what: String, why: String },
    /// The document decoded but the values violate a domain invariant.
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

fn schema(what: impl Into<String>, why: impl Into<String>) -> JsonError {
    JsonError::Schema {
        what: what.into(),
        why: why.into(),
    }
}

fn kind(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Parses a JSON document from text.
pub fn parse(text: &str) -> Result<Value, JsonError> {
    Ok(serde_json::from_str(text)?)
}

/// Pretty-prints a document with a trailing newline, ready for stdout.
pub fn to_pretty_string(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("documents hold only plain data");
    out.push('\n');
    out
}

/// Renders one scalar: a JSON number (shortest round-trip decimal) in
/// floating-point mode, a `"p/q"` string in rational mode.
pub fn number_to_value<T: Scalar>(v: &T) -> Value {
    if T::EXACT {
        Value::String(format_exact(&v.to_exact()))
    } else {
        Value::Number(Number::from_f64(v.to_f64()).expect("scalar values are finite"))
    }
}

/// Reads one scalar. JSON numbers pass through their double value; string
/// literals are parsed exactly and rounded only when the target mode is
/// floating point.
pub fn number_from_value<T: Scalar>(value: &Value, what: &str) -> Result<T, JsonError> {
    let parsed = match value {
        Value::Number(n) => {
            let d = n
                .as_f64()
                .ok_or_else(|| schema(what, "number does not fit a double"))?;
            T::from_f64(d)
        }
        Value::String(s) => {
            let exact = parse_exact(s).map_err(|e| schema(what, e.to_string()))?;
            T::from_exact(exact)
        }
        other => {
            return Err(schema(
                what,
                format!("expected a number or numeric string, got {}", kind(other)),
            ))
        }
    };
    if !parsed.is_valid() {
        return Err(schema(what, "value does not fit the numeric range"));
    }
    Ok(parsed)
}

fn obj<'v>(value: &'v Value, what: &str) -> Result<&'v Map<String, Value>, JsonError> {
    value
        .as_object()
        .ok_or_else(|| schema(what, format!("expected an object, got {}", kind(value))))
}

fn field<'v>(map: &'v Map<String, Value>, key: &str, what: &str) -> Result<&'v Value, JsonError> {
    map.get(key)
        .ok_or_else(|| schema(what, format!("missing field {key:?}")))
}

fn usize_field(map: &Map<String, Value>, key: &str, what: &str) -> Result<usize, JsonError> {
    field(map, key, what)?
        .as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| schema(format!("{what}.{key}"), "expected a nonnegative integer"))
}

fn vector_to_value<T: Scalar>(values: &[T]) -> Value {
    Value::Array(values.iter().map(number_to_value).collect())
}

fn vector_from_value<T: Scalar>(value: &Value, what: &str) -> Result<Vec<T>, JsonError> {
    let items = value
        .as_array()
        .ok_or_else(|| schema(what, format!("expected an array, got {}", kind(value))))?;
    items
        .iter()
        .enumerate()
        .map(|(i, v)| number_from_value(v, &format!("{what}[{i}]")))
        .collect()
}

fn matrix_to_value<T: Scalar>(matrix: &Matrix<T>) -> Value {
    Value::Array(
        (0..matrix.rows())
            .map(|i| vector_to_value(matrix.row(i)))
            .collect(),
    )
}

fn matrix_from_value<T: Scalar>(value: &Value, what: &str) -> Result<Matrix<T>, JsonError> {
    let rows = value
        .as_array()
        .ok_or_else(|| schema(what, format!("expected an array of rows, got {}", kind(value))))?;
    if rows.is_empty() {
        return Err(schema(what, "matrix must have at least one row"));
    }
    let mut data: Vec<Vec<T>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let parsed: Vec<T> = vector_from_value(row, &format!("{what}[{i}]"))?;
        if let Some(first) = data.first() {
            if parsed.len() != first.len() {
                return Err(schema(
                    format!("{what}[{i}]"),
                    format!(
                        "ragged matrix: row has {} entries, expected {}",
                        parsed.len(),
                        first.len()
                    ),
                ));
            }
        } else if parsed.is_empty() {
            return Err(schema(what, "matrix rows must be nonempty"));
        }
        data.push(parsed);
    }
    Ok(Matrix::from_rows(data))
}

pub fn economy_to_json<T: Scalar>(econ: &Economy<T>) -> Value {
    json!({
        "m": econ.goods(),
        "n": econ.traders(),
        "endowments": matrix_to_value(econ.endowments()),
        "demands": matrix_to_value(econ.demands()),
    })
}

pub fn economy_from_json<T: Scalar>(value: &Value) -> Result<Economy<T>, JsonError> {
    let map = obj(value, "economy")?;
    let m = usize_field(map, "m", "economy")?;
    let n = usize_field(map, "n", "economy")?;
    let endowments: Matrix<T> =
        matrix_from_value(field(map, "endowments", "economy")?, "economy.endowments")?;
    let demands: Matrix<T> = matrix_from_value(field(map, "demands", "economy")?, "economy.demands")?;
    for (name, matrix) in [("endowments", &endowments), ("demands", &demands)] {
        if matrix.rows() != m || matrix.cols() != n {
            return Err(schema(
                format!("economy.{name}"),
                format!(
                    "declared {m}×{n} but the matrix is {}×{}",
                    matrix.rows(),
                    matrix.cols()
                ),
            ));
        }
    }
    Ok(Economy::new(endowments, demands)?)
}

pub fn equilibrium_to_json<T: Scalar>(eq: &MarketEquilibrium<T>) -> Value {
    json!({
        "u": vector_to_value(eq.u.values()),
        "w": vector_to_value(eq.w.values()),
    })
}

pub fn equilibrium_from_json<T: Scalar>(value: &Value) -> Result<MarketEquilibrium<T>, JsonError> {
    let map = obj(value, "equilibrium")?;
    let u = vector_from_value(field(map, "u", "equilibrium")?, "equilibrium.u")?;
    let w = vector_from_value(field(map, "w", "equilibrium")?, "equilibrium.w")?;
    Ok(MarketEquilibrium {
        u: UtilityVector::new(u)?,
        w: PriceVector::new(w)?,
    })
}

pub fn allocation_to_json<T: Scalar>(allocation: &Allocation<T>) -> Value {
    json!({ "X": matrix_to_value(allocation.amounts()) })
}

pub fn allocation_from_json<T: Scalar>(value: &Value) -> Result<Allocation<T>, JsonError> {
    let map = obj(value, "allocation")?;
    let amounts = matrix_from_value(field(map, "X", "allocation")?, "allocation.X")?;
    Ok(Allocation::new(amounts)?)
}

pub fn game_to_json<T: Scalar>(game: &BimatrixGame<T>) -> Value {
    let mut map = Map::new();
    map.insert("A".into(), matrix_to_value(game.row_payoffs()));
    map.insert("B".into(), matrix_to_value(game.col_payoffs()));
    if let Some((lo, hi)) = game.range_tag() {
        map.insert(
            "range".into(),
            Value::Array(vec![number_to_value(lo), number_to_value(hi)]),
        );
    }
    Value::Object(map)
}

pub fn game_from_json<T: Scalar>(value: &Value) -> Result<BimatrixGame<T>, JsonError> {
    let map = obj(value, "game")?;
    let a = matrix_from_value(field(map, "A", "game")?, "game.A")?;
    let b = matrix_from_value(field(map, "B", "game")?, "game.B")?;
    let range = match map.get("range") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let items = v
                .as_array()
                .ok_or_else(|| schema("game.range", "expected [lo, hi]"))?;
            if items.len() != 2 {
                return Err(schema(
                    "game.range",
                    format!("expected exactly 2 entries, got {}", items.len()),
                ));
            }
            let lo = number_from_value(&items[0], "game.range[0]")?;
            let hi = number_from_value(&items[1], "game.range[1]")?;
            Some((lo, hi))
        }
    };
    Ok(BimatrixGame::new(a, b, range)?)
}

pub fn profile_to_json<T: Scalar>(profile: &MixedProfile<T>) -> Value {
    json!({
        "x": vector_to_value(profile.x()),
        "y": vector_to_value(profile.y()),
    })
}

pub fn profile_from_json<T: Scalar>(value: &Value) -> Result<MixedProfile<T>, JsonError> {
    let map = obj(value, "profile")?;
    let x = vector_from_value(field(map, "x", "profile")?, "profile.x")?;
    let y = vector_from_value(field(map, "y", "profile")?, "profile.y")?;
    Ok(MixedProfile::new(x, y)?)
}

pub fn reduced_to_json(reduced: &ReducedEconomy) -> Value {
    let mut value = economy_to_json(reduced.economy());
    let map = value.as_object_mut().expect("economy document is an object");
    map.insert("game_size".into(), json!(reduced.game_size()));
    map.insert("sigma".into(), number_to_value(&reduced.sigma()));
    value
}

pub fn reduced_from_json(value: &Value) -> Result<ReducedEconomy, JsonError> {
    let econ: Economy<f64> = economy_from_json(value)?;
    let map = obj(value, "reduced economy")?;
    let game_size = usize_field(map, "game_size", "reduced economy")?;
    let sigma: f64 = number_from_value(
        field(map, "sigma", "reduced economy")?,
        "reduced economy.sigma",
    )?;
    Ok(ReducedEconomy::new(econ, game_size, sigma)?)
}

fn status_name(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Found => "found",
        SolveStatus::NotFound => "not_found",
        SolveStatus::BudgetExhausted => "budget_exhausted",
    }
}

pub fn solve_result_to_json(result: &SolveResult) -> Value {
    json!({
        "status": status_name(result.status),
        "equilibrium": result
            .equilibrium
            .as_ref()
            .map_or(Value::Null, equilibrium_to_json),
        "points_scanned": result.points_scanned,
        "achieved_eps": result
            .achieved_eps
            .map_or(Value::Null, |e| number_to_value(&e)),
    })
}

pub fn solve_result_from_json(value: &Value) -> Result<SolveResult, JsonError> {
    let map = obj(value, "solve result")?;
    let status = match field(map, "status", "solve result")?.as_str() {
        Some("found") => SolveStatus::Found,
        Some("not_found") => SolveStatus::NotFound,
        Some("budget_exhausted") => SolveStatus::BudgetExhausted,
        _ => {
            return Err(schema(
                "solve result.status",
                "expected \"found\", \"not_found\", or \"budget_exhausted\"",
            ))
        }
    };
    let equilibrium = match field(map, "equilibrium", "solve result")? {
        Value::Null => None,
        v => Some(equilibrium_from_json(v)?),
    };
    let points_scanned = usize_field(map, "points_scanned", "solve result")?;
    let achieved_eps = match field(map, "achieved_eps", "solve result")? {
        Value::Null => None,
        v => Some(number_from_value(v, "solve result.achieved_eps")?),
    };
    Ok(SolveResult {
        status,
        equilibrium,
        points_scanned,
        achieved_eps,
    })
}

pub fn solver_spec_to_json(spec: &SolverSpec) -> Value {
    match spec {
        SolverSpec::ExactReduced => Value::String("exact_reduced".into()),
        SolverSpec::Grid(grid) => json!({
            "grid": {
                "resolution": grid.resolution(),
                "eps_target": number_to_value(&grid.eps_target()),
                "max_points": grid.max_points(),
            }
        }),
    }
}

pub fn solver_spec_from_json(value: &Value) -> Result<SolverSpec, JsonError> {
    match value {
        Value::String(s) if s == "exact_reduced" => Ok(SolverSpec::ExactReduced),
        Value::String(other) => Err(schema(
            "solver",
            format!("unknown solver {other:?}; expected \"exact_reduced\" or {{\"grid\": …}}"),
        )),
        Value::Object(map) => {
            let grid = obj(field(map, "grid", "solver")?, "solver.grid")?;
            let resolution = usize_field(grid, "resolution", "solver.grid")?;
            let eps_target: f64 = number_from_value(
                field(grid, "eps_target", "solver.grid")?,
                "solver.grid.eps_target",
            )?;
            let max_points = usize_field(grid, "max_points", "solver.grid")?;
            Ok(SolverSpec::Grid(GridSpec::new(
                resolution, eps_target, max_points,
            )?))
        }
        other => Err(schema(
            "solver",
            format!("expected a solver name or object, got {}", kind(other)),
        )),
    }
}

pub fn experiment_config_to_json(config: &ExperimentConfig) -> Value {
    json!({
        "game": game_to_json(&config.game),
        "sigmas": vector_to_value(&config.sigmas),
        "trials": config.trials,
        "eps_prime": number_to_value(&config.eps_prime),
        "solver": solver_spec_to_json(&config.solver),
        "master_seed": config.master_seed,
    })
}

pub fn experiment_config_from_json(value: &Value) -> Result<ExperimentConfig, JsonError> {
    let map = obj(value, "experiment config")?;
    let game = game_from_json(field(map, "game", "experiment config")?)?;
    let sigmas = vector_from_value(
        field(map, "sigmas", "experiment config")?,
        "experiment config.sigmas",
    )?;
    let trials = usize_field(map, "trials", "experiment config")?;
    let eps_prime: f64 = number_from_value(
        field(map, "eps_prime", "experiment config")?,
        "experiment config.eps_prime",
    )?;
    let solver = solver_spec_from_json(field(map, "solver", "experiment config")?)?;
    let master_seed = match map.get("master_seed") {
        None | Some(Value::Null) => 0,
        Some(v) => v.as_u64().ok_or_else(|| {
            schema(
                "experiment config.master_seed",
                "expected a nonnegative integer",
            )
        })?,
    };
    Ok(ExperimentConfig {
        game,
        sigmas,
        trials,
        eps_prime,
        solver,
        master_seed,
    })
}

/// Serializes one pipeline trial record; measurements a failed solve leaves
/// empty come out as nulls.
pub fn trial_record_to_json(record: &TrialRecord) -> Value {
    let opt = |v: Option<f64>| v.map_or(Value::Null, |x| number_to_value(&x));
    json!({
        "sigma": number_to_value(&record.sigma),
        "seed": record.seed,
        "time_ms": number_to_value(&record.time_ms),
        "points_scanned": record.points_scanned,
        "market_eps": opt(record.market_eps),
        "nash_delta": opt(record.nash_delta),
        "bound_delta": opt(record.bound_delta),
        "prop_violations": record
            .prop_violations
            .map_or(Value::Null, |n| json!(n)),
    })
}

/// Serializes a condition-by-condition market check report.
pub fn check_report_to_json(report: &CheckReport) -> Value {
    serde_json::to_value(report).expect("reports hold only plain data")
}

/// Serializes a quantitative property report of a reduced-economy equilibrium.
pub fn property_report_to_json(report: &PropertyReport) -> Value {
    serde_json::to_value(report).expect("reports hold only plain data")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;
    use num::BigInt;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn economy_f64() -> Economy<f64> {
        Economy::new(
            Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            Matrix::from_rows(vec![vec![0.1, 1.5], vec![1.0 / 3.0, 2.0]]),
        )
        .unwrap()
    }

    fn parse_str(text: &str) -> Value {
        parse(text).unwrap()
    }

    #[test]
    fn economy_round_trips_through_text_in_float_mode() {
        let econ = economy_f64();
        let text = to_pretty_string(&economy_to_json(&econ));
        let back: Economy<f64> = economy_from_json(&parse_str(&text)).unwrap();
        assert_eq!(back, econ);
    }

    #[test]
    fn economy_round_trips_exactly_in_rational_mode() {
        let econ = Economy::new(
            Matrix::from_rows(vec![
                vec![rat(1, 1), rat(0, 1)],
                vec![rat(0, 1), rat(1, 1)],
            ]),
            Matrix::from_rows(vec![
                vec![rat(1, 3), rat(3, 2)],
                vec![rat(1, 10), rat(2, 1)],
            ]),
        )
        .unwrap();
        let value = economy_to_json(&econ);
        // Rational mode emits exact strings, integers without a denominator.
        assert_eq!(value["demands"][0][0], json!("1/3"));
        assert_eq!(value["demands"][1][1], json!("2"));
        assert_eq!(value["endowments"][0][0], json!("1"));
        let back: Economy<BigRational> = economy_from_json(&value).unwrap();
        assert_eq!(back, econ);
    }

    #[test]
    fn rational_mode_keeps_doubles_exact_and_canonicalizes_fractions() {
        let value = parse_str(
            r#"{"m": 1, "n": 2,
                "endowments": [[1, 1]],
                "demands": [[0.5, "2/6"]]}"#,
        );
        let econ: Economy<BigRational> = economy_from_json(&value).unwrap();
        assert_eq!(*econ.demands().get(0, 0), rat(1, 2));
        assert_eq!(*econ.demands().get(0, 1), rat(1, 3));
        assert_eq!(
            economy_to_json(&econ)["demands"],
            json!([["1/2", "1/3"]])
        );
    }

    #[test]
    fn float_mode_parses_strings_exactly_then_rounds_once() {
        assert_eq!(
            number_from_value::<f64>(&json!("22/7"), "x").unwrap(),
            22.0 / 7.0
        );
        assert_eq!(number_from_value::<f64>(&json!("0.1"), "x").unwrap(), 0.1);
        assert_eq!(
            number_from_value::<f64>(&json!("-2.5e-3"), "x").unwrap(),
            -0.0025
        );
        // Out-of-range and malformed literals are schema errors, not panics.
        assert!(matches!(
            number_from_value::<f64>(&json!("1e999"), "x"),
            Err(JsonError::Schema { .. })
        ));
        assert!(matches!(
            number_from_value::<f64>(&json!("abc"), "x"),
            Err(JsonError::Schema { .. })
        ));
        assert!(matches!(
            number_from_value::<f64>(&json!(true), "x"),
            Err(JsonError::Schema { .. })
        ));
    }

    #[test]
    fn economy_schema_violations_are_rejected() {
        let good = economy_to_json(&economy_f64());

        let mut wrong_m = good.clone();
        wrong_m["m"] = json!(3);
        assert!(matches!(
            economy_from_json::<f64>(&wrong_m),
            Err(JsonError::Schema { .. })
        ));

        let ragged = parse_str(
            r#"{"m": 2, "n": 2,
                "endowments": [[1, 0], [0]],
                "demands": [[1, 1], [1, 1]]}"#,
        );
        assert!(matches!(
            economy_from_json::<f64>(&ragged),
            Err(JsonError::Schema { .. })
        ));

        let mut missing = good.clone();
        missing.as_object_mut().unwrap().remove("demands");
        assert!(matches!(
            economy_from_json::<f64>(&missing),
            Err(JsonError::Schema { .. })
        ));

        assert!(matches!(
            economy_from_json::<f64>(&json!([1, 2, 3])),
            Err(JsonError::Schema { .. })
        ));

        // Well-formed JSON with domain-invalid values is a domain error.
        let mut negative = good;
        negative["endowments"][0][0] = json!(-1.0);
        assert!(matches!(
            economy_from_json::<f64>(&negative),
            Err(JsonError::Market(_))
        ));
    }

    #[test]
    fn game_round_trips_with_and_without_range() {
        let tagged = BimatrixGame::new(
            Matrix::from_rows(vec![vec![1.0, 2.0], vec![1.5, 1.0]]),
            Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 1.25]]),
            Some((1.0, 2.0)),
        )
        .unwrap();
        let back: BimatrixGame<f64> = game_from_json(&game_to_json(&tagged)).unwrap();
        assert_eq!(back, tagged);
        assert_eq!(back.range_tag(), Some(&(1.0, 2.0)));

        let untagged = BimatrixGame::new(
            Matrix::from_rows(vec![vec![0.0, 3.0]]),
            Matrix::from_rows(vec![vec![1.0, -1.0]]),
            None,
        )
        .unwrap();
        let value = game_to_json(&untagged);
        assert!(value.get("range").is_none());
        let back: BimatrixGame<f64> = game_from_json(&value).unwrap();
        assert_eq!(back, untagged);

        let mut bad_range = game_to_json(&tagged);
        bad_range["range"] = json!([1.0, 2.0, 3.0]);
        assert!(matches!(
            game_from_json::<f64>(&bad_range),
            Err(JsonError::Schema { .. })
        ));

        let mut out_of_range = game_to_json(&tagged);
        out_of_range["A"][0][0] = json!(5.0);
        assert!(matches!(
            game_from_json::<f64>(&out_of_range),
            Err(JsonError::Game(_))
        ));
    }

    #[test]
    fn profile_equilibrium_and_allocation_round_trip() {
        let profile = MixedProfile::new(vec![0.25, 0.75], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        assert_eq!(
            profile_from_json::<f64>(&profile_to_json(&profile)).unwrap(),
            profile
        );

        let eq = MarketEquilibrium {
            u: UtilityVector::new(vec![0.0, 1.0]).unwrap(),
            w: PriceVector::new(vec![0.5, 0.5]).unwrap(),
        };
        assert_eq!(
            equilibrium_from_json::<f64>(&equilibrium_to_json(&eq)).unwrap(),
            eq
        );

        let rational_eq = MarketEquilibrium {
            u: UtilityVector::new(vec![rat(1, 3), rat(1, 1)]).unwrap(),
            w: PriceVector::new(vec![rat(1, 2), rat(1, 2)]).unwrap(),
        };
        let value = equilibrium_to_json(&rational_eq);
        assert_eq!(value["w"], json!(["1/2", "1/2"]));
        assert_eq!(
            equilibrium_from_json::<BigRational>(&value).unwrap(),
            rational_eq
        );

        let allocation =
            Allocation::new(Matrix::from_rows(vec![vec![0.1, 0.9], vec![0.4, 0.6]])).unwrap();
        assert_eq!(
            allocation_from_json::<f64>(&allocation_to_json(&allocation)).unwrap(),
            allocation
        );

        // A profile off the simplex is a domain error, not a schema error.
        let lopsided = parse_str(r#"{"x": [0.9, 0.9], "y": [1.0]}"#);
        assert!(matches!(
            profile_from_json::<f64>(&lopsided),
            Err(JsonError::Game(_))
        ));
    }

    #[test]
    fn reduced_economy_round_trips_and_checks_shape() {
        let game = BimatrixGame::new(
            Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]),
            Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]),
            Some((1.0, 2.0)),
        )
        .unwrap();
        let reduced = crate::reduction::reduce_game_to_economy(&game).unwrap();
        let value = reduced_to_json(&reduced);
        assert_eq!(value["game_size"], json!(2));
        assert_eq!(value["sigma"], json!(0.0));
        assert_eq!(reduced_from_json(&value).unwrap(), reduced);

        let mut wrong_size = value;
        wrong_size["game_size"] = json!(3);
        assert!(matches!(
            reduced_from_json(&wrong_size),
            Err(JsonError::Reduction(_))
        ));
    }

    #[test]
    fn solve_results_round_trip_for_every_status() {
        let found = SolveResult {
            status: SolveStatus::Found,
            equilibrium: Some(MarketEquilibrium {
                u: UtilityVector::new(vec![0.0, 1.0]).unwrap(),
                w: PriceVector::new(vec![0.5, 0.5]).unwrap(),
            }),
            points_scanned: 31,
            achieved_eps: Some(0.0),
        };
        let value = solve_result_to_json(&found);
        assert_eq!(value["status"], json!("found"));
        assert_eq!(solve_result_from_json(&value).unwrap(), found);

        let not_found = SolveResult {
            status: SolveStatus::NotFound,
            equilibrium: None,
            points_scanned: 20,
            achieved_eps: None,
        };
        let value = solve_result_to_json(&not_found);
        assert_eq!(value["equilibrium"], Value::Null);
        assert_eq!(solve_result_from_json(&value).unwrap(), not_found);

        let exhausted = SolveResult {
            status: SolveStatus::BudgetExhausted,
            equilibrium: None,
            points_scanned: 5,
            achieved_eps: None,
        };
        assert_eq!(
            solve_result_from_json(&solve_result_to_json(&exhausted)).unwrap(),
            exhausted
        );

        let mut unknown = solve_result_to_json(&not_found);
        unknown["status"] = json!("gave_up");
        assert!(matches!(
            solve_result_from_json(&unknown),
            Err(JsonError::Schema { .. })
        ));
    }

    #[test]
    fn solver_specs_and_experiment_configs_round_trip() {
        let grid = SolverSpec::Grid(GridSpec::new(64, 0.125, 100_000).unwrap());
        assert_eq!(
            solver_spec_from_json(&solver_spec_to_json(&grid)).unwrap(),
            grid
        );
        assert_eq!(
            solver_spec_from_json(&json!("exact_reduced")).unwrap(),
            SolverSpec::ExactReduced
        );
        assert!(matches!(
            solver_spec_from_json(&json!("simplex")),
            Err(JsonError::Schema { .. })
        ));
        // Invalid grid parameters surface as the solver's own domain error.
        assert!(matches!(
            solver_spec_from_json(&json!({"grid": {
                "resolution": 0, "eps_target": 0.1, "max_points": 10
            }})),
            Err(JsonError::Market(_))
        ));

        let config = ExperimentConfig {
            game: BimatrixGame::new(
                Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]),
                Matrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]),
                Some((1.0, 2.0)),
            )
            .unwrap(),
            sigmas: vec![0.0, 1e-4],
            trials: 8,
            eps_prime: 0.1,
            solver: grid,
            master_seed: u64::MAX,
        };
        let value = experiment_config_to_json(&config);
        assert_eq!(experiment_config_from_json(&value).unwrap(), config);

        // master_seed is optional on input and defaults to zero.
        let mut unseeded = value;
        unseeded.as_object_mut().unwrap().remove("master_seed");
        assert_eq!(experiment_config_from_json(&unseeded).unwrap().master_seed, 0);
    }

    #[test]
    fn trial_records_serialize_with_nulls_for_missing_measurements() {
        let complete = TrialRecord {
            sigma: 1e-4,
            seed: 42,
            time_ms: 0.165,
            points_scanned: 165,
            market_eps: Some(0.05),
            nash_delta: Some(0.2),
            bound_delta: Some(0.75),
            prop_violations: Some(0),
        };
        let value = trial_record_to_json(&complete);
        assert_eq!(value["seed"], json!(42));
        assert_eq!(value["market_eps"], json!(0.05));
        assert_eq!(value["prop_violations"], json!(0));

        let failed = TrialRecord {
            market_eps: None,
            nash_delta: None,
            bound_delta: None,
            prop_violations: None,
            ..complete
        };
        let value = trial_record_to_json(&failed);
        assert_eq!(value["points_scanned"], json!(165));
        for key in ["market_eps", "nash_delta", "bound_delta", "prop_violations"] {
            assert_eq!(value[key], Value::Null, "{key}");
        }
    }

    #[test]
    fn float_numbers_are_emitted_as_shortest_round_trip_doubles() {
        assert_eq!(number_to_value(&0.1f64), json!(0.1));
        assert_eq!(
            serde_json::to_string(&number_to_value(&(1.0f64 / 3.0))).unwrap(),
            "0.3333333333333333"
        );
        assert_eq!(
            serde_json::to_string(&number_to_value(&f64::EPSILON)).unwrap(),
            "2.220446049250313e-16"
        );
    }
}
