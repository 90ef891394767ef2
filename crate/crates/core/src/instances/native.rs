//! The native JSON instance format.
//!
//! ```json
//! {
//!   "name": "example",
//!   "locations": [{"id": 1, "x": 0.0, "y": 0.0}, {"id": 2, "x": 0.0, "y": 70.0}],
//!   "matrix": {"euclidean": {"factor": 6.0}},
//!   "requests": [
//!     {"id": 1, "origin": 1, "destination": 2,
//!      "pickup_window": {"start": 360, "end": 1080},
//!      "delivery_windows": [{"start": 360, "end": 1080}]}
//!   ],
//!   "cost": {"kappa": 1.06, "sm_tiers": [{"upper_km": 150.0, "rate": 1.75}, {"upper_km": null, "rate": 1.15}]},
//!   "regs": {"tau_n": 450, "tau_b": 990, "tau_s": 1320, "sigma": 120, "nu": 70.0},
//!   "mu": 250.0,
//!   "horizon": {"origin_weekday": "monday", "days": 8}
//! }
//! ```
//!
//! `matrix` is either `"euclidean"` (factor 1), `{"euclidean": {"factor": f}}`
//! or explicit `{"distance": [[km, ...], ...], "time": [[min, ...], ...]}`
//! with `time` optional. Euclidean distances are rounded to whole km.
//! Requests refer to locations by id. A request may carry its own
//! `sm_price`; otherwise the price follows from `cost`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::builder::euclidean_km;
use super::InstanceError;
use crate::model::{
    CostModel, Distance, Horizon, Instance, Location, Minutes, Money, RegParams, Request, TimeWindow, TravelMatrix,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    #[serde(default)]
    name: String,
    locations: Vec<Location>,
    matrix: RawMatrix,
    requests: Vec<RawRequest>,
    cost: CostModel,
    regs: RegParams,
    mu: Distance,
    horizon: Horizon,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawMatrix {
    Directive(String),
    Euclidean { euclidean: EuclideanSpec },
    Explicit {
        distance: Vec<Vec<Distance>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time: Option<Vec<Vec<Minutes>>>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EuclideanSpec {
    factor: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    id: u32,
    origin: u32,
    destination: u32,
    pickup_window: TimeWindow,
    delivery_windows: Vec<TimeWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sm_price: Option<Money>,
}

/// JSON pointer of a deserialization path.
fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => write!(out, "/{index}").unwrap(),
            Segment::Map { key } => write!(out, "/{}", key.replace('~', "~0").replace('/', "~1")).unwrap(),
            Segment::Enum { variant } => write!(out, "/{variant}").unwrap(),
            Segment::Unknown => {}
        }
    }
    out
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> InstanceError {
    InstanceError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Parses an instance from native JSON text.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let value: Value = serde_json::from_str(text).map_err(|e| schema("", e.to_string()))?;
    let raw: RawInstance = serde_path_to_error::deserialize(value).map_err(|e| {
        let mut ptr = pointer(e.path());
        let message = e.inner().to_string();
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.split('`').next())
        {
            ptr.push('/');
            ptr.push_str(field);
        }
        schema(ptr, message)
    })?;
    from_raw(raw)
}

fn from_raw(raw: RawInstance) -> Result<Instance, InstanceError> {
    let n = raw.locations.len();
    let index: BTreeMap<u32, usize> = raw.locations.iter().enumerate().map(|(i, l)| (l.id, i)).collect();
    if index.len() != n {
        let dup = raw
            .locations
            .iter()
            .enumerate()
            .find(|(i, l)| index[&l.id] != *i)
            .map_or(0, |(i, _)| i);
        return Err(schema(format!("/locations/{dup}/id"), "duplicate location id"));
    }

    let matrix = match raw.matrix {
        RawMatrix::Directive(d) if d == "euclidean" => euclidean_matrix(&raw.locations, 1.0, &raw.regs)?,
        RawMatrix::Directive(d) => return Err(schema("/matrix", format!("unknown matrix directive `{d}`"))),
        RawMatrix::Euclidean { euclidean } => {
            if !(euclidean.factor.is_finite() && euclidean.factor > 0.0) {
                return Err(schema("/matrix/euclidean/factor", "must be positive"));
            }
            euclidean_matrix(&raw.locations, euclidean.factor, &raw.regs)?
        }
        RawMatrix::Explicit { distance, time } => {
            check_square(&distance, n, "/matrix/distance")?;
            let distance: Vec<Distance> = distance.into_iter().flatten().collect();
            match time {
                Some(time) => {
                    check_square(&time, n, "/matrix/time")?;
                    TravelMatrix::new(n, distance, time.into_iter().flatten().collect())?
                }
                None => TravelMatrix::from_distances(n, distance, &raw.regs)?,
            }
        }
    };

    let mut cost = raw.cost;
    let mut requests = Vec::with_capacity(raw.requests.len());
    for (i, r) in raw.requests.into_iter().enumerate() {
        let loc = |id: u32, field: &str| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| schema(format!("/requests/{i}/{field}"), format!("unknown location id {id}")))
        };
        let origin = loc(r.origin, "origin")?;
        let destination = loc(r.destination, "destination")?;
        if let Some(price) = r.sm_price {
            cost.explicit_sm_prices.insert(r.id, price);
        }
        let sm_price = cost.sm_price(matrix.distance(origin, destination), r.id);
        requests.push(Request {
            id: r.id,
            origin,
            destination,
            pickup_window: r.pickup_window,
            delivery_windows: r.delivery_windows,
            sm_price,
        });
    }
    Ok(Instance::new(
        raw.name,
        raw.locations,
        matrix,
        requests,
        cost,
        raw.regs,
        raw.mu,
        raw.horizon,
    )?)
}

fn check_square<T>(rows: &[Vec<T>], n: usize, path: &str) -> Result<(), InstanceError> {
    if rows.len() != n {
        return Err(schema(path, format!("expected {n} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(schema(format!("{path}/{i}"), format!("expected {n} entries, found {}", row.len())));
        }
    }
    Ok(())
}

fn euclidean_matrix(locations: &[Location], factor: f64, regs: &RegParams) -> Result<TravelMatrix, InstanceError> {
    let mut points = Vec::with_capacity(locations.len());
    for (i, l) in locations.iter().enumerate() {
        match (l.x, l.y) {
            (Some(x), Some(y)) => points.push((x, y)),
            (None, _) => return Err(schema(format!("/locations/{i}/x"), "coordinates required for a euclidean matrix")),
            (_, None) => return Err(schema(format!("/locations/{i}/y"), "coordinates required for a euclidean matrix")),
        }
    }
    let n = points.len();
    let distance = crate::parallel::map_rows(n, |i| {
        points.iter().map(|&b| euclidean_km(points[i], b, factor)).collect()
    });
    Ok(TravelMatrix::from_distances(n, distance, regs)?)
}

fn to_raw(instance: &Instance) -> RawInstance {
    let n = instance.matrix.len();
    let distance: Vec<Vec<Distance>> = (0..n).map(|i| instance.matrix.row_distances(i).to_vec()).collect();
    let derived = (0..n).all(|i| {
        instance
            .matrix
            .row_distances(i)
            .iter()
            .zip(instance.matrix.row_times(i))
            .all(|(&d, &t)| instance.regs.travel_minutes(d) == t)
    });
    let time = (!derived).then(|| (0..n).map(|i| instance.matrix.row_times(i).to_vec()).collect());
    RawInstance {
        name: instance.name.clone(),
        locations: instance.locations.clone(),
        matrix: RawMatrix::Explicit { distance, time },
        requests: instance
            .requests
            .iter()
            .map(|r| RawRequest {
                id: r.id,
                origin: instance.locations[r.origin].id,
                destination: instance.locations[r.destination].id,
                pickup_window: r.pickup_window,
                delivery_windows: r.delivery_windows.clone(),
                sm_price: None,
            })
            .collect(),
        cost: instance.cost.clone(),
        regs: instance.regs.clone(),
        mu: instance.mu,
        horizon: instance.horizon,
    }
}

/// Deterministic JSON text of `instance` (sorted keys, explicit matrix).
pub fn instance_to_json(instance: &Instance) -> String {
    let value = serde_json::to_value(to_raw(instance)).expect("instance serializes to JSON");
    let mut out = String::new();
    pretty(&value, 0, &mut out);
    out.push('\n');
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text)
}

pub fn write_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, instance_to_json(instance)).map_err(|source| InstanceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Arrays of scalars and objects with at most four scalar members stay on
/// one line; everything else is indented by two spaces per level.
fn is_inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(is_scalar),
        Value::Object(map) => map.len() <= 4 && map.values().all(is_scalar),
        _ => true,
    }
}

fn pretty(v: &Value, indent: usize, out: &mut String) {
    if is_inline(v) {
        inline(v, out);
        return;
    }
    let pad = "  ".repeat(indent + 1);
    match v {
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                pretty(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                pretty(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
        _ => unreachable!("scalars are inline"),
    }
}

fn inline(v: &Value, out: &mut String) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                inline(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                inline(item, out);
            }
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}
