use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Destroyed, InsertionOperator};
use crate::model::{Distance, Instance, Money, Solution, Trip};
use crate::parallel;
use crate::schedule::insertion_feasible;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InsertionConfig {
    /// Use `(k - 1) * (c_k - c_1)` as the regret instead of
    /// `sum_{i=2..k} (c_i - c_1)`.
    pub regret_literal: bool,
}

/// Cheapest feasible insertion of a request into one trip.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsertionCell {
    /// Insert before the request currently at this position.
    pub position: usize,
    /// Added vehicle cost.
    pub delta: Money,
}

/// Memo of cheapest insertions keyed by trip identity and request. Entries
/// never go stale because a changed trip gets a new identity.
#[derive(Debug, Default)]
pub struct InsertionCache {
    cells: HashMap<(u64, usize), Option<InsertionCell>>,
}

const CACHE_LIMIT: usize = 1 << 21;

impl InsertionCache {
    pub fn new() -> Self {
        InsertionCache::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn get(&self, trip: &Trip, request: usize) -> Option<InsertionCell> {
        self.cells[&(trip.uid(), request)]
    }

    /// Evaluates every missing (trip, request) pair.
    fn fill(&mut self, instance: &Instance, trips: &[Arc<Trip>], requests: &BTreeSet<usize>) {
        if self.cells.len() > CACHE_LIMIT {
            self.cells.clear();
        }
        let missing: Vec<(usize, usize)> = trips
            .iter()
            .enumerate()
            .flat_map(|(t, trip)| requests.iter().map(move |&r| (t, r)).filter(|&(_, r)| !self.cells.contains_key(&(trip.uid(), r))))
            .collect();
        if missing.is_empty() {
            return;
        }
        let found = parallel::map_indexed(missing.len(), 16, |i| {
            let (t, r) = missing[i];
            best_insertion(instance, &trips[t], r)
        });
        for ((t, r), cell) in missing.into_iter().zip(found) {
            self.cells.insert((trips[t].uid(), r), cell);
        }
    }
}

/// Extra distance from inserting `r` before position `pos` of `seq`.
pub(crate) fn insertion_delta(instance: &Instance, seq: &[usize], r: usize, pos: usize) -> Distance {
    let req = &instance.requests[r];
    let mut delta = instance.direct(r);
    let prev = pos.checked_sub(1).map(|p| &instance.requests[seq[p]]);
    let next = seq.get(pos).map(|&n| &instance.requests[n]);
    if let Some(p) = prev {
        delta += instance.dist(p.destination, req.origin);
    }
    if let Some(n) = next {
        delta += instance.dist(req.destination, n.origin);
    }
    if let (Some(p), Some(n)) = (prev, next) {
        delta -= instance.dist(p.destination, n.origin);
    }
    delta
}

/// Cheap necessary condition: ignores breaks and blackouts, so a `true`
/// proves the insertion infeasible.
fn surely_infeasible(instance: &Instance, trip: &Trip, r: usize, pos: usize) -> bool {
    let sigma = instance.regs.sigma;
    let req = &instance.requests[r];
    let seq = trip.requests();
    let mut pickup = req.pickup_window.start;
    if pos > 0 {
        let prev = &instance.requests[seq[pos - 1]];
        let depart = trip.fronts()[2 * pos - 1]
            .iter()
            .map(|l| l.service_start)
            .min()
            .unwrap_or(0)
            + sigma;
        pickup = pickup.max(depart + instance.time(prev.destination, req.origin));
    }
    if pickup + sigma > req.pickup_window.end {
        return true;
    }
    let arrive = pickup + sigma + instance.time(req.origin, req.destination);
    let Some(delivery) = req
        .delivery_windows
        .iter()
        .find(|w| arrive.max(w.start) + sigma <= w.end)
        .map(|w| arrive.max(w.start))
    else {
        return true;
    };
    if let Some(&n) = seq.get(pos) {
        let next = &instance.requests[n];
        let reach = (delivery + sigma + instance.time(req.destination, next.origin)).max(next.pickup_window.start);
        if reach + sigma > next.pickup_window.end {
            return true;
        }
    }
    false
}

/// Cheapest feasible insertion of request `r` into `trip`; positions are
/// tried by increasing added distance, ties by position.
pub fn best_insertion(instance: &Instance, trip: &Trip, r: usize) -> Option<InsertionCell> {
    let seq = trip.requests();
    let mut candidates: Vec<(Distance, usize)> =
        (0..=seq.len()).map(|p| (insertion_delta(instance, seq, r, p), p)).collect();
    candidates.sort();
    candidates
        .into_iter()
        .find(|&(_, p)| !surely_infeasible(instance, trip, r, p) && insertion_feasible(instance, trip, r, p))
        .map(|(d, position)| InsertionCell {
            position,
            delta: instance.cost.kappa.cost(d),
        })
}

fn insert_into(instance: &Instance, trip: &Trip, r: usize, position: usize) -> Arc<Trip> {
    let mut seq = trip.requests().to_vec();
    seq.insert(position, r);
    Arc::new(Trip::new(instance, seq).expect("insertion was checked feasible"))
}

/// `a / b < c / d` for non-negative `b`, `d`, where a zero denominator
/// stands for an infinite ratio.
fn ratio_less(a: Money, b: Distance, c: Money, d: Distance) -> bool {
    match (b.tenths() == 0, d.tenths() == 0) {
        (true, _) => false,
        (false, true) => true,
        (false, false) => i128::from(a.mills()) * i128::from(d.tenths()) < i128::from(c.mills()) * i128::from(b.tenths()),
    }
}

struct Choice {
    request: usize,
    target: Option<(usize, InsertionCell)>,
}

/// Cheapest feasible cell of `r` over all trips; ties to the lowest trip.
fn cheapest(cache: &InsertionCache, trips: &[Arc<Trip>], r: usize) -> Option<(usize, InsertionCell)> {
    let mut best: Option<(usize, InsertionCell)> = None;
    for (t, trip) in trips.iter().enumerate() {
        if let Some(cell) = cache.get(trip, r) {
            if best.is_none_or(|(_, b)| cell.delta < b.delta) {
                best = Some((t, cell));
            }
        }
    }
    best
}

fn choose(
    instance: &Instance,
    cache: &InsertionCache,
    trips: &[Arc<Trip>],
    pending: &BTreeSet<usize>,
    op: InsertionOperator,
    cfg: &InsertionConfig,
) -> Choice {
    let mut chosen: Option<(Choice, Money)> = None;
    for &r in pending {
        let Some((t, cell)) = cheapest(cache, trips, r) else {
            continue;
        };
        let score = match op {
            // Negated so that larger is better for both rules.
            InsertionOperator::Greedy => -cell.delta,
            InsertionOperator::Regret(k) => regret(instance, cache, trips, r, k, cfg.regret_literal),
        };
        if chosen.as_ref().is_none_or(|(_, s)| score > *s) {
            chosen = Some((
                Choice {
                    request: r,
                    target: Some((t, cell)),
                },
                score,
            ));
        }
    }
    if let Some((c, _)) = chosen {
        return c;
    }
    // Nothing fits anywhere: least outsourcing price per loaded distance.
    let mut best = *pending.first().expect("pending set is non-empty");
    for &r in pending {
        if ratio_less(
            instance.requests[r].sm_price,
            instance.direct(r),
            instance.requests[best].sm_price,
            instance.direct(best),
        ) {
            best = r;
        }
    }
    Choice {
        request: best,
        target: None,
    }
}

/// k-regret of `r`: per-trip cheapest costs, with the outsourcing price
/// standing in for trips without a feasible position and for missing trips.
fn regret(
    instance: &Instance,
    cache: &InsertionCache,
    trips: &[Arc<Trip>],
    r: usize,
    k: usize,
    literal: bool,
) -> Money {
    let cap = instance.requests[r].sm_price;
    let mut costs: Vec<Money> = trips
        .iter()
        .map(|t| cache.get(t, r).map_or(cap, |c| c.delta))
        .collect();
    costs.sort();
    costs.resize(costs.len().max(k), cap);
    let c1 = costs[0];
    if literal {
        (costs[k - 1] - c1) * (k as i64 - 1)
    } else {
        costs[1..k].iter().map(|&c| c - c1).sum()
    }
}

/// Insertion procedure: repeatedly picks a pending request by the rule of
/// `op` and inserts it at its cheapest position when that costs less than
/// outsourcing. Otherwise it opens a new trip when every existing trip
/// already meets the minimum distance and a dedicated vehicle is no dearer
/// than outsourcing, or banks the request. Requests already in the bank are
/// pending as well. Trips still below the minimum distance are dissolved at
/// the end (see [`normalize`]).
pub fn repair(
    instance: &Instance,
    destroyed: Destroyed,
    op: InsertionOperator,
    cfg: &InsertionConfig,
    cache: &mut InsertionCache,
) -> Solution {
    let Destroyed {
        mut trips,
        bank,
        removed,
    } = destroyed;
    let mut pending: BTreeSet<usize> = bank;
    pending.extend(removed);
    let mut out = BTreeSet::new();
    let mu = instance.mu;
    let kappa = instance.cost.kappa;

    while !pending.is_empty() {
        cache.fill(instance, &trips, &pending);
        let Choice { request: r, target } = choose(instance, cache, &trips, &pending, op, cfg);
        pending.remove(&r);
        let price = instance.requests[r].sm_price;
        match target {
            Some((t, cell)) if cell.delta < price => {
                trips[t] = insert_into(instance, &trips[t], r, cell.position);
            }
            _ => {
                let well_utilized = trips.iter().all(|t| t.distance() >= mu);
                let opened = (well_utilized && kappa.cost(instance.direct(r)) <= price)
                    .then(|| Trip::new(instance, vec![r]).ok())
                    .flatten();
                match opened {
                    Some(trip) => trips.push(Arc::new(trip)),
                    None => {
                        out.insert(r);
                    }
                }
            }
        }
    }
    let (trips, out) = normalize(instance, trips, out, cache);
    Solution::new(instance, trips, out)
}

/// Dissolves every trip shorter than the minimum distance and offers its
/// requests to the remaining trips, cheapest insertion first and only when
/// cheaper than outsourcing. Unplaced requests are banked. Repeats until no
/// short trip is left.
pub fn normalize(
    instance: &Instance,
    mut trips: Vec<Arc<Trip>>,
    mut bank: BTreeSet<usize>,
    cache: &mut InsertionCache,
) -> (Vec<Arc<Trip>>, BTreeSet<usize>) {
    loop {
        let (short, keep): (Vec<_>, Vec<_>) = trips.into_iter().partition(|t| t.distance() < instance.mu);
        trips = keep;
        if short.is_empty() {
            return (trips, bank);
        }
        let mut pending: BTreeSet<usize> = short.iter().flat_map(|t| t.requests().iter().copied()).collect();
        loop {
            cache.fill(instance, &trips, &pending);
            let mut best: Option<(Money, usize, usize, InsertionCell)> = None;
            for &r in &pending {
                if let Some((t, cell)) = cheapest(cache, &trips, r) {
                    if cell.delta < instance.requests[r].sm_price && best.is_none_or(|b| cell.delta < b.0) {
                        best = Some((cell.delta, r, t, cell));
                    }
                }
            }
            let Some((_, r, t, cell)) = best else {
                break;
            };
            trips[t] = insert_into(instance, &trips[t], r, cell.position);
            pending.remove(&r);
        }
        bank.extend(pending);
    }
}

/// Starting solution: everything outsourced, then one greedy repair pass.
pub fn build_initial(instance: &Instance, cfg: &InsertionConfig, cache: &mut InsertionCache) -> Solution {
    let all = Solution::all_outsourced(instance);
    let destroyed = Destroyed {
        trips: Vec::new(),
        bank: all.bank,
        removed: Vec::new(),
    };
    repair(instance, destroyed, InsertionOperator::Greedy, cfg, cache)
}
