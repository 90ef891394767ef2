use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::builder::euclidean_km;
use super::{GhInstance, InstanceError};
use crate::model::{
    default_sm_tiers, CostModel, Distance, Horizon, Instance, Location, Minutes, Rate, RegParams, Request, SmTier,
    TimeWindow, TravelMatrix, Weekday, DAY,
};

/// Parameters of the benchmark transformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransformConfig {
    /// Scale factor applied to coordinates and to ready times.
    pub factor: f64,
    /// Daily opening time, minutes from midnight.
    pub day_open: Minutes,
    /// Daily closing time, minutes from midnight.
    pub day_close: Minutes,
    /// Minimum distance per day on which at least one pickup takes place.
    pub mu_per_day: Distance,
    pub kappa: Rate,
    pub sm_tiers: Vec<SmTier>,
    pub regs: RegParams,
    /// Days appended after the last ready day.
    pub slack_days: u32,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            factor: 6.0,
            day_open: 360,
            day_close: 1080,
            mu_per_day: Distance::from_km(250),
            kappa: Rate::from_cents(106),
            sm_tiers: default_sm_tiers(),
            regs: RegParams::default(),
            slack_days: 7,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if !(self.factor.is_finite() && self.factor >= 1.0) {
            return Err(InstanceError::Transform("factor must be at least 1".into()));
        }
        if !(0 <= self.day_open && self.day_open < self.day_close && self.day_close <= DAY) {
            return Err(InstanceError::Transform(
                "opening hours must satisfy 0 <= day_open < day_close <= 1440".into(),
            ));
        }
        if self.mu_per_day < Distance::ZERO {
            return Err(InstanceError::Transform("mu_per_day must be non-negative".into()));
        }
        Ok(())
    }

    fn cost_model(&self) -> CostModel {
        CostModel {
            kappa: self.kappa,
            sm_tiers: self.sm_tiers.clone(),
            ..CostModel::default()
        }
    }
}

/// Turns a pickup-and-delivery benchmark into an FTL instance.
///
/// Node 0 is dropped; request `i` goes from node `i` to node `N/2 + i`.
/// Coordinates are scaled by `factor` and distances rounded to whole km.
/// The ready time of the pickup node, scaled by `factor`, fixes the pickup
/// day; pickups happen within opening hours on that day and deliveries
/// within opening hours on any later or equal day of the horizon.
pub fn transform(gh: &GhInstance, cfg: &TransformConfig) -> Result<Instance, InstanceError> {
    cfg.validate()?;
    if gh.nodes.is_empty() {
        return Err(InstanceError::Transform("no nodes".into()));
    }
    let customers = &gh.nodes[1..];
    if customers.len() % 2 != 0 {
        return Err(InstanceError::Transform(format!(
            "odd number of non-depot nodes ({}), cannot pair pickups with deliveries",
            customers.len()
        )));
    }
    let half = customers.len() / 2;

    let locations: Vec<Location> = customers
        .iter()
        .map(|n| Location {
            id: n.id,
            x: Some(n.x),
            y: Some(n.y),
            name: None,
        })
        .collect();
    let m = customers.len();
    let mut distance = Vec::with_capacity(m * m);
    for a in customers {
        for b in customers {
            distance.push(euclidean_km((a.x, a.y), (b.x, b.y), cfg.factor));
        }
    }
    let matrix = TravelMatrix::from_distances(m, distance, &cfg.regs)?;

    let ready_days: Vec<i64> = customers[..half]
        .iter()
        .map(|n| ((cfg.factor * n.tw_start) / DAY as f64).floor() as i64)
        .collect();
    if let Some(i) = ready_days.iter().position(|&d| d < 0) {
        return Err(InstanceError::Transform(format!(
            "node {} has a negative ready time",
            customers[i].id
        )));
    }
    let last_ready = ready_days.iter().copied().max().unwrap_or(0);
    let days = last_ready + 1 + i64::from(cfg.slack_days);
    let distinct: BTreeSet<i64> = ready_days.iter().copied().collect();
    let mu = Distance::from_tenths(cfg.mu_per_day.tenths() * distinct.len() as i64);

    let cost = cfg.cost_model();
    let window = |day: i64| TimeWindow::new(day * DAY + cfg.day_open, day * DAY + cfg.day_close);
    let requests = (0..half)
        .map(|i| {
            let id = customers[i].id;
            let day = ready_days[i];
            let direct = matrix.distance(i, half + i);
            Request {
                id,
                origin: i,
                destination: half + i,
                pickup_window: window(day),
                delivery_windows: (day..days).map(window).collect(),
                sm_price: cost.sm_price(direct, id),
            }
        })
        .collect();

    let horizon = Horizon {
        origin_weekday: Weekday::Monday,
        days: days as u32,
    };
    Ok(Instance::new(
        gh.name.clone(),
        locations,
        matrix,
        requests,
        cost,
        cfg.regs.clone(),
        mu,
        horizon,
    )?)
}
