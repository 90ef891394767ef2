//! Destroy and repair operators.

mod insertion;
mod removal;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::Trip;

pub use insertion::{best_insertion, build_initial, normalize, repair, InsertionCache, InsertionCell, InsertionConfig};
pub use removal::{
    remove, remove_random_routes, remove_random_shipments, remove_shaw, remove_stop_routes, remove_time_routes,
    remove_time_shipments, shaw_relatedness, ShawVariant,
};

/// A partially destroyed solution: the remaining trips, the untouched bank
/// and the requests just taken out, in removal order.
#[derive(Clone, Debug, Default)]
pub struct Destroyed {
    pub trips: Vec<Arc<Trip>>,
    pub bank: BTreeSet<usize>,
    pub removed: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RemovalOperator {
    #[serde(rename = "RRR")]
    RandomRoute,
    #[serde(rename = "TRR")]
    TimeRoute,
    #[serde(rename = "SRR")]
    StopRoute,
    #[serde(rename = "RSR")]
    RandomShipment,
    #[serde(rename = "TSR")]
    TimeShipment,
    /// Shaw removal on distance and pickup time.
    #[serde(rename = "SR")]
    Shaw,
    /// Shaw removal on pickup time only.
    #[serde(rename = "SR-TW")]
    ShawTime,
}

impl RemovalOperator {
    pub const ALL: [RemovalOperator; 7] = [
        RemovalOperator::RandomRoute,
        RemovalOperator::TimeRoute,
        RemovalOperator::StopRoute,
        RemovalOperator::RandomShipment,
        RemovalOperator::TimeShipment,
        RemovalOperator::Shaw,
        RemovalOperator::ShawTime,
    ];

    /// The default operator set: everything except TRR.
    pub fn defaults() -> Vec<RemovalOperator> {
        vec![
            RemovalOperator::RandomRoute,
            RemovalOperator::StopRoute,
            RemovalOperator::Shaw,
            RemovalOperator::ShawTime,
            RemovalOperator::TimeShipment,
            RemovalOperator::RandomShipment,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            RemovalOperator::RandomRoute => "RRR",
            RemovalOperator::TimeRoute => "TRR",
            RemovalOperator::StopRoute => "SRR",
            RemovalOperator::RandomShipment => "RSR",
            RemovalOperator::TimeShipment => "TSR",
            RemovalOperator::Shaw => "SR",
            RemovalOperator::ShawTime => "SR-TW",
        }
    }
}

impl fmt::Display for RemovalOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Repair rule: cheapest insertion first, or largest k-regret first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InsertionOperator {
    Greedy,
    Regret(usize),
}

impl InsertionOperator {
    pub fn defaults() -> Vec<InsertionOperator> {
        vec![
            InsertionOperator::Greedy,
            InsertionOperator::Regret(4),
            InsertionOperator::Regret(5),
            InsertionOperator::Regret(6),
        ]
    }
}

impl fmt::Display for InsertionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InsertionOperator::Greedy => f.write_str("greedy"),
            InsertionOperator::Regret(k) => write!(f, "regret-{k}"),
        }
    }
}

impl std::str::FromStr for InsertionOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "greedy" {
            return Ok(InsertionOperator::Greedy);
        }
        let k = s
            .strip_prefix("regret-")
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| format!("unknown insertion operator `{s}` (expected `greedy` or `regret-<k>`)"))?;
        if k < 2 {
            return Err(format!("regret order must be at least 2, got {k}"));
        }
        Ok(InsertionOperator::Regret(k))
    }
}

impl Serialize for InsertionOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InsertionOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of requests to remove: `min(psi, ceil(xi * planned), planned)`.
pub fn removal_count(planned: usize, psi: usize, xi: f64) -> usize {
    let relative = (xi * planned as f64).ceil() as usize;
    psi.min(relative).min(planned)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removal_count_caps() {
        assert_eq!(removal_count(0, 100, 0.35), 0);
        assert_eq!(removal_count(1, 100, 0.35), 1);
        assert_eq!(removal_count(10, 100, 0.35), 4);
        assert_eq!(removal_count(1000, 100, 0.35), 100);
        assert_eq!(removal_count(5, 100, 1.0), 5);
    }

    #[test]
    fn operator_names_round_trip() {
        for op in RemovalOperator::ALL {
            let json = serde_json::to_string(&op).unwrap();
            assert_eq!(json, format!("\"{}\"", op.name()));
            assert_eq!(serde_json::from_str::<RemovalOperator>(&json).unwrap(), op);
        }
        for op in InsertionOperator::defaults() {
            let json = serde_json::to_string(&op).unwrap();
            assert_eq!(serde_json::from_str::<InsertionOperator>(&json).unwrap(), op);
        }
        assert!("regret-1".parse::<InsertionOperator>().is_err());
        assert!("best".parse::<InsertionOperator>().is_err());
    }
}
