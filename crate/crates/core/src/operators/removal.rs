use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Destroyed, RemovalOperator};
use crate::model::{Distance, Instance, Solution, Trip};

/// Index drawn with probability proportional to `weights`; uniform when all
/// weights are zero.
fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return rng.gen_range(0..weights.len());
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Removes whole routes, drawn without replacement by `weight`, until at
/// least `q` requests are out.
fn remove_routes<R: Rng + ?Sized>(
    solution: &Solution,
    q: usize,
    rng: &mut R,
    weight: impl Fn(&Trip) -> f64,
) -> Destroyed {
    let mut trips = solution.trips.clone();
    let mut removed = Vec::new();
    while removed.len() < q && !trips.is_empty() {
        let weights: Vec<f64> = trips.iter().map(|t| weight(t)).collect();
        let pick = roulette(&weights, rng);
        let trip = trips.remove(pick);
        removed.extend_from_slice(trip.requests());
    }
    Destroyed {
        trips,
        bank: solution.bank.clone(),
        removed,
    }
}

/// RRR: routes drawn uniformly.
pub fn remove_random_routes<R: Rng + ?Sized>(solution: &Solution, q: usize, rng: &mut R) -> Destroyed {
    remove_routes(solution, q, rng, |_| 1.0)
}

/// TRR: routes drawn proportionally to their total driving time.
pub fn remove_time_routes<R: Rng + ?Sized>(solution: &Solution, q: usize, rng: &mut R) -> Destroyed {
    remove_routes(solution, q, rng, |t| t.drive_minutes() as f64)
}

/// SRR: routes drawn inversely proportionally to their number of requests.
pub fn remove_stop_routes<R: Rng + ?Sized>(solution: &Solution, q: usize, rng: &mut R) -> Destroyed {
    remove_routes(solution, q, rng, |t| 1.0 / t.len().max(1) as f64)
}

/// Takes `chosen` out of their trips. A trip whose remainder has no feasible
/// schedule is removed entirely.
fn take_out(instance: &Instance, solution: &Solution, chosen: Vec<usize>) -> Destroyed {
    let set: BTreeSet<usize> = chosen.iter().copied().collect();
    let mut removed = chosen;
    let mut trips = Vec::with_capacity(solution.trips.len());
    for trip in &solution.trips {
        if !trip.requests().iter().any(|r| set.contains(r)) {
            trips.push(Arc::clone(trip));
            continue;
        }
        let rest: Vec<usize> = trip.requests().iter().copied().filter(|r| !set.contains(r)).collect();
        if rest.is_empty() {
            continue;
        }
        match Trip::new(instance, rest.clone()) {
            Ok(t) => trips.push(Arc::new(t)),
            Err(_) => removed.extend(rest),
        }
    }
    Destroyed {
        trips,
        bank: solution.bank.clone(),
        removed,
    }
}

/// RSR: `q` planned requests drawn uniformly.
pub fn remove_random_shipments<R: Rng + ?Sized>(
    instance: &Instance,
    solution: &Solution,
    q: usize,
    rng: &mut R,
) -> Destroyed {
    let mut planned: Vec<usize> = solution.planned().collect();
    let q = q.min(planned.len());
    let (chosen, _) = planned.partial_shuffle(rng, q);
    take_out(instance, solution, chosen.to_vec())
}

/// TSR: `q` planned requests drawn without replacement, proportionally to
/// the empty driving time into their pickup and out of their delivery.
pub fn remove_time_shipments<R: Rng + ?Sized>(
    instance: &Instance,
    solution: &Solution,
    q: usize,
    rng: &mut R,
) -> Destroyed {
    let mut pool: Vec<(usize, f64)> = Vec::new();
    for trip in &solution.trips {
        let seq = trip.requests();
        for (i, &r) in seq.iter().enumerate() {
            let req = &instance.requests[r];
            let mut w = 0;
            if i > 0 {
                w += instance.time(instance.requests[seq[i - 1]].destination, req.origin);
            }
            if i + 1 < seq.len() {
                w += instance.time(req.destination, instance.requests[seq[i + 1]].origin);
            }
            pool.push((r, w as f64));
        }
    }
    let q = q.min(pool.len());
    let mut chosen = Vec::with_capacity(q);
    while chosen.len() < q {
        let weights: Vec<f64> = pool.iter().map(|p| p.1).collect();
        let pick = roulette(&weights, rng);
        chosen.push(pool.remove(pick).0);
    }
    take_out(instance, solution, chosen)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShawVariant {
    /// Pickup and delivery distances plus pickup times.
    DistanceAndTime,
    /// Pickup times only.
    TimeOnly,
}

/// Relatedness of two requests; lower means more similar.
pub fn shaw_relatedness(instance: &Instance, a: usize, b: usize, variant: ShawVariant) -> f64 {
    relatedness(instance, instance.matrix.max_distance(), a, b, variant)
}

fn relatedness(instance: &Instance, d_max: Distance, a: usize, b: usize, variant: ShawVariant) -> f64 {
    let ra = &instance.requests[a];
    let rb = &instance.requests[b];
    let horizon = instance.horizon.end().max(1) as f64;
    let time = (ra.pickup_window.start - rb.pickup_window.start).abs() as f64 / horizon;
    match variant {
        ShawVariant::TimeOnly => time,
        ShawVariant::DistanceAndTime => {
            let spatial = if d_max.tenths() > 0 {
                (instance.dist(ra.origin, rb.origin) + instance.dist(ra.destination, rb.destination)).tenths() as f64
                    / d_max.tenths() as f64
            } else {
                0.0
            };
            spatial + time
        }
    }
}

/// SR: starts from a uniformly drawn request and repeatedly removes a request
/// related to a random already-removed one. Candidates are ranked by
/// relatedness and rank `floor(u^p * n)` is taken.
pub fn remove_shaw<R: Rng + ?Sized>(
    instance: &Instance,
    solution: &Solution,
    q: usize,
    rng: &mut R,
    variant: ShawVariant,
    exponent: f64,
) -> Destroyed {
    let mut remaining: Vec<usize> = solution.planned().collect();
    let q = q.min(remaining.len());
    let mut chosen: Vec<usize> = Vec::with_capacity(q);
    let d_max = instance.matrix.max_distance();
    if q > 0 {
        chosen.push(remaining.swap_remove(rng.gen_range(0..remaining.len())));
    }
    while chosen.len() < q {
        let anchor = chosen[rng.gen_range(0..chosen.len())];
        let mut ranked: Vec<(f64, usize)> = remaining
            .iter()
            .map(|&r| (relatedness(instance, d_max, anchor, r, variant), r))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let u: f64 = rng.gen();
        let rank = ((u.powf(exponent) * ranked.len() as f64) as usize).min(ranked.len() - 1);
        let pick = ranked[rank].1;
        remaining.retain(|&r| r != pick);
        chosen.push(pick);
    }
    take_out(instance, solution, chosen)
}

/// Applies `op` with removal count `q`.
pub fn remove<R: Rng + ?Sized>(
    op: RemovalOperator,
    instance: &Instance,
    solution: &Solution,
    q: usize,
    rng: &mut R,
    shaw_exponent: f64,
) -> Destroyed {
    match op {
        RemovalOperator::RandomRoute => remove_random_routes(solution, q, rng),
        RemovalOperator::TimeRoute => remove_time_routes(solution, q, rng),
        RemovalOperator::StopRoute => remove_stop_routes(solution, q, rng),
        RemovalOperator::RandomShipment => remove_random_shipments(instance, solution, q, rng),
        RemovalOperator::TimeShipment => remove_time_shipments(instance, solution, q, rng),
        RemovalOperator::Shaw => remove_shaw(instance, solution, q, rng, ShawVariant::DistanceAndTime, shaw_exponent),
        RemovalOperator::ShawTime => remove_shaw(instance, solution, q, rng, ShawVariant::TimeOnly, shaw_exponent),
    }
}

#[cfg(test)]
mod tests;
