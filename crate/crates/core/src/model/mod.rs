//! Domain types, the cost model and whole-solution accounting.

mod units;

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schedule::{self, Calendar, Front, Infeasible, Schedule};

pub use units::{Distance, Minutes, Money, Rate, DAY};

/// Simplified driving-time regulation and vehicle speed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    /// Maximum cumulative driving without a shift break.
    pub tau_n: Minutes,
    /// Minimum length of a shift break.
    pub tau_b: Minutes,
    /// Minimum length of the Sunday break.
    pub tau_s: Minutes,
    /// Duration of one loading or unloading operation.
    pub sigma: Minutes,
    /// Average speed in km/h.
    pub nu: f64,
}

impl Default for RegParams {
    fn default() -> Self {
        RegParams {
            tau_n: 450,
            tau_b: 990,
            tau_s: 1320,
            sigma: 120,
            nu: 70.0,
        }
    }
}

impl RegParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &str, msg: &str| Err(ModelError::invalid(format!("/regs/{field}"), msg));
        if self.tau_n <= 0 {
            return bad("tau_n", "must be positive");
        }
        if self.tau_b <= 0 {
            return bad("tau_b", "must be positive");
        }
        if self.tau_s < self.tau_b {
            return bad("tau_s", "must be at least tau_b");
        }
        if self.tau_s > DAY {
            return bad("tau_s", "must fit into one day");
        }
        if self.sigma < 0 {
            return bad("sigma", "must be non-negative");
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return bad("nu", "must be positive");
        }
        Ok(())
    }

    /// Driving minutes for `distance`, rounded up to whole minutes.
    pub fn travel_minutes(&self, distance: Distance) -> Minutes {
        // Speed is taken at 0.1 km/h resolution so the division stays exact.
        let nu_tenths = (self.nu * 10.0).round() as i64;
        let num = distance.tenths() * 60;
        num.div_euclid(nu_tenths) + i64::from(num.rem_euclid(nu_tenths) != 0)
    }
}

/// One spot-market price band: `rate` applies to direct distances strictly
/// below `upper_km` (or to all remaining distances when `upper_km` is absent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmTier {
    pub upper_km: Option<Distance>,
    pub rate: Rate,
}

/// Vehicle cost per kilometre and spot-market prices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    pub kappa: Rate,
    pub sm_tiers: Vec<SmTier>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub explicit_sm_prices: BTreeMap<u32, Money>,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            kappa: Rate::from_cents(106),
            sm_tiers: default_sm_tiers(),
            explicit_sm_prices: BTreeMap::new(),
        }
    }
}

/// Spot-market rates: 1.75/km below 150 km, 1.40/km below 350 km, 1.15/km beyond.
pub fn default_sm_tiers() -> Vec<SmTier> {
    vec![
        SmTier {
            upper_km: Some(Distance::from_km(150)),
            rate: Rate::from_cents(175),
        },
        SmTier {
            upper_km: Some(Distance::from_km(350)),
            rate: Rate::from_cents(140),
        },
        SmTier {
            upper_km: None,
            rate: Rate::from_cents(115),
        },
    ]
}

impl CostModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.kappa.cents() <= 0 {
            return Err(ModelError::invalid("/cost/kappa", "must be positive"));
        }
        if self.sm_tiers.is_empty() {
            return Err(ModelError::invalid("/cost/sm_tiers", "at least one tier is required"));
        }
        let last = self.sm_tiers.len() - 1;
        let mut prev: Option<Distance> = None;
        for (i, tier) in self.sm_tiers.iter().enumerate() {
            let path = format!("/cost/sm_tiers/{i}");
            if tier.rate.cents() <= 0 {
                return Err(ModelError::invalid(format!("{path}/rate"), "must be positive"));
            }
            match (tier.upper_km, i == last) {
                (None, true) => {}
                (None, false) => {
                    return Err(ModelError::invalid(
                        format!("{path}/upper_km"),
                        "only the last tier may be open",
                    ))
                }
                (Some(_), true) => {
                    return Err(ModelError::invalid(
                        format!("{path}/upper_km"),
                        "the last tier must be open",
                    ))
                }
                (Some(upper), false) => {
                    if upper <= prev.unwrap_or(Distance::ZERO) {
                        return Err(ModelError::invalid(
                            format!("{path}/upper_km"),
                            "tier bounds must be positive and strictly increasing",
                        ));
                    }
                    prev = Some(upper);
                }
            }
        }
        for (id, price) in &self.explicit_sm_prices {
            if *price <= Money::ZERO {
                return Err(ModelError::invalid(
                    format!("/cost/explicit_sm_prices/{id}"),
                    "must be positive",
                ));
            }
        }
        Ok(())
    }

    /// Rate of the tier that contains `direct` (a bound belongs to the upper tier).
    pub fn tier_rate(&self, direct: Distance) -> Rate {
        self.sm_tiers
            .iter()
            .find(|t| t.upper_km.is_none_or(|upper| direct < upper))
            .or(self.sm_tiers.last())
            .map(|t| t.rate)
            .unwrap_or_default()
    }

    /// Spot-market price of a request: the explicit price when one is given,
    /// otherwise the tier rate for the direct distance times that distance.
    pub fn sm_price(&self, direct: Distance, request_id: u32) -> Money {
        match self.explicit_sm_prices.get(&request_id) {
            Some(price) => *price,
            None => self.tier_rate(direct).cost(direct),
        }
    }
}

/// An absolute interval `[start, end]` in minutes from the horizon origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: Minutes,
    pub end: Minutes,
}

impl TimeWindow {
    pub const fn new(start: Minutes, end: Minutes) -> Self {
        TimeWindow { start, end }
    }

    pub fn contains(&self, t: Minutes) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    /// Monday is 0.
    pub fn index(self) -> i64 {
        self as i64
    }
}

/// Planning horizon: weekday of day 0 and number of days.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub origin_weekday: Weekday,
    pub days: u32,
}

impl Horizon {
    pub fn end(&self) -> Minutes {
        i64::from(self.days) * DAY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Dense travel distances and times between locations, indexed by position
/// in the instance's location list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TravelMatrix {
    n: usize,
    distance: Vec<Distance>,
    time: Vec<Minutes>,
}

impl TravelMatrix {
    pub fn new(n: usize, distance: Vec<Distance>, time: Vec<Minutes>) -> Result<Self, ModelError> {
        if distance.len() != n * n || time.len() != n * n {
            return Err(ModelError::invalid("/matrix", format!("expected {n}x{n} entries")));
        }
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                if distance[k] < Distance::ZERO {
                    return Err(ModelError::invalid(format!("/matrix/distance/{i}/{j}"), "negative distance"));
                }
                if time[k] < 0 {
                    return Err(ModelError::invalid(format!("/matrix/time/{i}/{j}"), "negative time"));
                }
                if i == j && (distance[k] != Distance::ZERO || time[k] != 0) {
                    return Err(ModelError::invalid(format!("/matrix/distance/{i}/{j}"), "diagonal must be zero"));
                }
            }
        }
        Ok(TravelMatrix { n, distance, time })
    }

    /// Derives travel times from distances at the given regulation's speed.
    pub fn from_distances(n: usize, distance: Vec<Distance>, regs: &RegParams) -> Result<Self, ModelError> {
        let time = distance.iter().map(|&d| regs.travel_minutes(d)).collect();
        TravelMatrix::new(n, distance, time)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distance(&self, from: usize, to: usize) -> Distance {
        self.distance[from * self.n + to]
    }

    pub fn time(&self, from: usize, to: usize) -> Minutes {
        self.time[from * self.n + to]
    }

    pub fn max_distance(&self) -> Distance {
        self.distance.iter().copied().max().unwrap_or_default()
    }

    pub fn row_distances(&self, from: usize) -> &[Distance] {
        &self.distance[from * self.n..(from + 1) * self.n]
    }

    pub fn row_times(&self, from: usize) -> &[Minutes] {
        &self.time[from * self.n..(from + 1) * self.n]
    }
}

/// A full-truck-load transport request. `origin` and `destination` index the
/// instance's location list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub id: u32,
    pub origin: usize,
    pub destination: usize,
    pub pickup_window: TimeWindow,
    pub delivery_windows: Vec<TimeWindow>,
    /// Resolved spot-market price.
    pub sm_price: Money,
}

/// A complete problem instance. Build it with [`Instance::new`], which checks
/// every cross-field invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub locations: Vec<Location>,
    pub matrix: TravelMatrix,
    pub requests: Vec<Request>,
    pub cost: CostModel,
    pub regs: RegParams,
    /// Minimum distance each vehicle has to drive over the horizon.
    pub mu: Distance,
    pub horizon: Horizon,
}

impl Instance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        locations: Vec<Location>,
        matrix: TravelMatrix,
        requests: Vec<Request>,
        cost: CostModel,
        regs: RegParams,
        mu: Distance,
        horizon: Horizon,
    ) -> Result<Self, ModelError> {
        let instance = Instance {
            name,
            locations,
            matrix,
            requests,
            cost,
            regs,
            mu,
            horizon,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.regs.validate()?;
        self.cost.validate()?;
        if self.mu < Distance::ZERO {
            return Err(ModelError::invalid("/mu", "must be non-negative"));
        }
        if self.matrix.len() != self.locations.len() {
            return Err(ModelError::invalid("/matrix", "size differs from the number of locations"));
        }
        let mut loc_ids = BTreeSet::new();
        for (i, loc) in self.locations.iter().enumerate() {
            if !loc_ids.insert(loc.id) {
                return Err(ModelError::invalid(format!("/locations/{i}/id"), "duplicate location id"));
            }
        }
        let end = self.horizon.end();
        let mut req_ids = BTreeSet::new();
        for (i, r) in self.requests.iter().enumerate() {
            let path = format!("/requests/{i}");
            if !req_ids.insert(r.id) {
                return Err(ModelError::invalid(format!("{path}/id"), "duplicate request id"));
            }
            if r.origin >= self.locations.len() {
                return Err(ModelError::invalid(format!("{path}/origin"), "unknown location"));
            }
            if r.destination >= self.locations.len() {
                return Err(ModelError::invalid(format!("{path}/destination"), "unknown location"));
            }
            if r.origin == r.destination {
                return Err(ModelError::invalid(format!("{path}/destination"), "must differ from origin"));
            }
            let check_window = |w: &TimeWindow, p: String| {
                if w.start > w.end {
                    Err(ModelError::invalid(p, "window start after end"))
                } else if w.start < 0 || w.end > end {
                    Err(ModelError::invalid(p, "window outside the horizon"))
                } else {
                    Ok(())
                }
            };
            check_window(&r.pickup_window, format!("{path}/pickup_window"))?;
            if r.delivery_windows.is_empty() {
                return Err(ModelError::invalid(format!("{path}/delivery_windows"), "at least one window is required"));
            }
            for (k, w) in r.delivery_windows.iter().enumerate() {
                check_window(w, format!("{path}/delivery_windows/{k}"))?;
                if k > 0 && w.start <= r.delivery_windows[k - 1].end {
                    return Err(ModelError::invalid(
                        format!("{path}/delivery_windows/{k}"),
                        "windows must be sorted and pairwise disjoint",
                    ));
                }
            }
            if r.sm_price <= Money::ZERO {
                return Err(ModelError::invalid(format!("{path}/sm_price"), "spot-market price must be positive"));
            }
        }
        Ok(())
    }

    pub fn calendar(&self) -> Calendar {
        Calendar::new(self.horizon)
    }

    pub fn dist(&self, from: usize, to: usize) -> Distance {
        self.matrix.distance(from, to)
    }

    pub fn time(&self, from: usize, to: usize) -> Minutes {
        self.matrix.time(from, to)
    }

    /// Loaded distance of request `r`.
    pub fn direct(&self, r: usize) -> Distance {
        let req = &self.requests[r];
        self.dist(req.origin, req.destination)
    }

    /// Index of the request with external id `id`.
    pub fn request_index(&self, id: u32) -> Option<usize> {
        self.requests.iter().position(|r| r.id == id)
    }

    /// Sum of all spot-market prices.
    pub fn all_outsourced_cost(&self) -> Money {
        self.requests.iter().map(|r| r.sm_price).sum()
    }

    /// A copy of this instance where every request costs `price` to outsource.
    pub fn with_uniform_sm_price(&self, price: Money) -> Instance {
        let mut out = self.clone();
        out.cost.explicit_sm_prices = self.requests.iter().map(|r| (r.id, price)).collect();
        for r in &mut out.requests {
            r.sm_price = price;
        }
        out
    }
}

/// A vehicle tour: the requests it serves in order plus the cached distance
/// split and earliest-arrival schedule.
#[derive(Clone, Debug)]
pub struct Trip {
    uid: u64,
    requests: Vec<usize>,
    loaded: Distance,
    empty: Distance,
    drive_minutes: Minutes,
    schedule: Schedule,
    fronts: Vec<Front>,
}

impl Trip {
    /// Schedules `requests` (instance indices, in service order).
    pub fn new(instance: &Instance, requests: Vec<usize>) -> Result<Trip, Infeasible> {
        let fronts = schedule::sequence_fronts(instance, &requests)?;
        let schedule = schedule::schedule_from_fronts(instance, &requests, &fronts);
        let (loaded, empty) = trip_distances(instance, &requests);
        let drive_minutes = trip_drive_minutes(instance, &requests);
        static NEXT_UID: AtomicU64 = AtomicU64::new(0);
        Ok(Trip {
            uid: NEXT_UID.fetch_add(1, Ordering::Relaxed),
            requests,
            loaded,
            empty,
            drive_minutes,
            schedule,
            fronts,
        })
    }

    /// Process-unique identity of this trip value; changes whenever a trip
    /// is rebuilt.
    pub fn uid(&self) -> u64 {
        self.uid
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn loaded(&self) -> Distance {
        self.loaded
    }

    pub fn empty(&self) -> Distance {
        self.empty
    }

    pub fn distance(&self) -> Distance {
        self.loaded + self.empty
    }

    /// Total driving minutes (loaded and empty legs).
    pub fn drive_minutes(&self) -> Minutes {
        self.drive_minutes
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub(crate) fn fronts(&self) -> &[Front] {
        &self.fronts
    }
}

/// Loaded and empty kilometres of a request sequence.
pub fn trip_distances(instance: &Instance, requests: &[usize]) -> (Distance, Distance) {
    let loaded = requests.iter().map(|&r| instance.direct(r)).sum();
    let empty = requests
        .windows(2)
        .map(|w| instance.dist(instance.requests[w[0]].destination, instance.requests[w[1]].origin))
        .sum();
    (loaded, empty)
}

fn trip_drive_minutes(instance: &Instance, requests: &[usize]) -> Minutes {
    let loaded: Minutes = requests
        .iter()
        .map(|&r| instance.time(instance.requests[r].origin, instance.requests[r].destination))
        .sum();
    let empty: Minutes = requests
        .windows(2)
        .map(|w| instance.time(instance.requests[w[0]].destination, instance.requests[w[1]].origin))
        .sum();
    loaded + empty
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub vehicles: Money,
    pub outsourced: Money,
    pub total: Money,
}

/// A partition of the requests into vehicle trips and the outsource bank.
#[derive(Clone, Debug)]
pub struct Solution {
    pub trips: Vec<Arc<Trip>>,
    pub bank: BTreeSet<usize>,
    pub cost: CostBreakdown,
}

impl Solution {
    /// Assembles a solution and computes its cost from the given parts.
    pub fn new(instance: &Instance, trips: Vec<Arc<Trip>>, bank: BTreeSet<usize>) -> Solution {
        let cost = cost_of(instance, &trips, &bank);
        Solution { trips, bank, cost }
    }

    /// Every request outsourced, no vehicle used.
    pub fn all_outsourced(instance: &Instance) -> Solution {
        Solution::new(instance, Vec::new(), (0..instance.requests.len()).collect())
    }

    pub fn total(&self) -> Money {
        self.cost.total
    }

    pub fn planned_count(&self) -> usize {
        self.trips.iter().map(|t| t.len()).sum()
    }

    pub fn planned(&self) -> impl Iterator<Item = usize> + '_ {
        self.trips.iter().flat_map(|t| t.requests().iter().copied())
    }

    pub fn loaded(&self) -> Distance {
        self.trips.iter().map(|t| t.loaded()).sum()
    }

    pub fn empty(&self) -> Distance {
        self.trips.iter().map(|t| t.empty()).sum()
    }
}

fn cost_of(instance: &Instance, trips: &[Arc<Trip>], bank: &BTreeSet<usize>) -> CostBreakdown {
    let driven: Distance = trips.iter().map(|t| t.distance()).sum();
    let vehicles = instance.cost.kappa.cost(driven);
    let outsourced = bank.iter().map(|&r| instance.requests[r].sm_price).sum();
    CostBreakdown {
        vehicles,
        outsourced,
        total: vehicles + outsourced,
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("request {request} appears {occurrences} times in the solution")]
    PartitionViolation { request: usize, occurrences: usize },
}

impl ModelError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Recomputes the cost of `solution` from scratch after checking that trips
/// and bank partition the request set.
pub fn solution_cost(instance: &Instance, solution: &Solution) -> Result<CostBreakdown, ModelError> {
    let counts = occurrences(instance, solution);
    if let Some((request, &occurrences)) = counts.iter().enumerate().find(|(_, &c)| c != 1) {
        return Err(ModelError::PartitionViolation { request, occurrences });
    }
    let driven: Distance = solution
        .trips
        .iter()
        .map(|t| {
            let (loaded, empty) = trip_distances(instance, t.requests());
            loaded + empty
        })
        .sum();
    let vehicles = instance.cost.kappa.cost(driven);
    let outsourced = solution.bank.iter().map(|&r| instance.requests[r].sm_price).sum();
    Ok(CostBreakdown {
        vehicles,
        outsourced,
        total: vehicles + outsourced,
    })
}

fn occurrences(instance: &Instance, solution: &Solution) -> Vec<usize> {
    let mut counts = vec![0usize; instance.requests.len()];
    for r in solution.planned().chain(solution.bank.iter().copied()) {
        if let Some(c) = counts.get_mut(r) {
            *c += 1;
        }
    }
    counts
}

/// A broken solution invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Request served or banked `occurrences` times instead of exactly once.
    Partition { request: usize, occurrences: usize },
    /// A trip or the bank names a request index that does not exist.
    UnknownRequest { request: usize },
    /// The trip's request sequence has no feasible schedule.
    Infeasible { trip: usize, cause: Infeasible },
    /// The trip drives less than the minimum distance.
    MinDistance { trip: usize, distance: Distance, mu: Distance },
    /// Cached distances of the trip disagree with a fresh re-walk.
    StaleTrip { trip: usize },
    /// Cached solution cost disagrees with a fresh recomputation.
    CostMismatch { cached: Money, recomputed: Money },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Partition { request, occurrences } => {
                write!(f, "request {request} appears {occurrences} times")
            }
            Violation::UnknownRequest { request } => write!(f, "unknown request index {request}"),
            Violation::Infeasible { trip, cause } => write!(f, "trip {trip} infeasible: {cause}"),
            Violation::MinDistance { trip, distance, mu } => {
                write!(f, "trip {trip} drives {distance} km, minimum is {mu} km")
            }
            Violation::StaleTrip { trip } => write!(f, "trip {trip} has stale cached distances"),
            Violation::CostMismatch { cached, recomputed } => {
                write!(f, "cached cost {cached} differs from recomputed {recomputed}")
            }
        }
    }
}

/// Lists every broken invariant of `solution`; empty means feasible.
pub fn validate_solution(instance: &Instance, solution: &Solution) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = instance.requests.len();
    for r in solution.planned().chain(solution.bank.iter().copied()) {
        if r >= n {
            out.push(Violation::UnknownRequest { request: r });
        }
    }
    for (request, occurrences) in occurrences(instance, solution).into_iter().enumerate() {
        if occurrences != 1 {
            out.push(Violation::Partition { request, occurrences });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (i, trip) in solution.trips.iter().enumerate() {
        if let Err(cause) = schedule::simulate_trip(instance, trip.requests()) {
            out.push(Violation::Infeasible { trip: i, cause });
        }
        let (loaded, empty) = trip_distances(instance, trip.requests());
        if loaded != trip.loaded() || empty != trip.empty() {
            out.push(Violation::StaleTrip { trip: i });
        }
        if loaded + empty < instance.mu {
            out.push(Violation::MinDistance {
                trip: i,
                distance: loaded + empty,
                mu: instance.mu,
            });
        }
    }
    if let Ok(fresh) = solution_cost(instance, solution) {
        if fresh != solution.cost {
            out.push(Violation::CostMismatch {
                cached: solution.cost.total,
                recomputed: fresh.total,
            });
        }
    }
    out
}
