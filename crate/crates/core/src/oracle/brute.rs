use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use super::lp::deadhead_allowed;
use super::OracleError;
use crate::instances::InstanceBuilder;
use crate::model::{Distance, Horizon, Instance, Money, Solution, TimeWindow, Trip, Weekday, DAY};
use crate::schedule::simulate_trip;

pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BruteForceOptions {
    /// Only allow consecutive requests joined by a deadhead arc of the arc graph.
    pub arc_filter: bool,
}

/// Shortest feasible service order per request subset (bitmask), or `None`.
fn best_sequences(instance: &Instance, opts: BruteForceOptions) -> Vec<Option<(Distance, Vec<usize>)>> {
    let n = instance.requests.len();
    let mut best: Vec<Option<(Distance, Vec<usize>)>> = vec![None; 1 << n];
    let mut seq = Vec::with_capacity(n);
    extend(instance, opts, &mut seq, 0, Distance::ZERO, &mut best);
    best
}

/// Depth-first over sequences in lexicographic order; an infeasible prefix
/// prunes all its extensions.
fn extend(
    instance: &Instance,
    opts: BruteForceOptions,
    seq: &mut Vec<usize>,
    mask: usize,
    distance: Distance,
    best: &mut [Option<(Distance, Vec<usize>)>],
) {
    let n = instance.requests.len();
    for r in 0..n {
        if mask & (1 << r) != 0 {
            continue;
        }
        let mut d = distance + instance.direct(r);
        if let Some(&last) = seq.last() {
            if opts.arc_filter && !deadhead_allowed(instance, last, r) {
                continue;
            }
            d += instance.dist(instance.requests[last].destination, instance.requests[r].origin);
        }
        seq.push(r);
        if simulate_trip(instance, seq).is_ok() {
            let m = mask | (1 << r);
            if d >= instance.mu && best[m].as_ref().is_none_or(|(bd, _)| d < *bd) {
                best[m] = Some((d, seq.clone()));
            }
            extend(instance, opts, seq, m, d, best);
        }
        seq.pop();
    }
}

/// Exact optimum by enumeration of every split into outsourced requests and
/// feasible trips. Ties prefer outsourcing, then lower subset masks.
pub fn brute_force(instance: &Instance) -> Result<Solution, OracleError> {
    brute_force_with(instance, BruteForceOptions::default())
}

pub fn brute_force_with(instance: &Instance, opts: BruteForceOptions) -> Result<Solution, OracleError> {
    let n = instance.requests.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let seqs = best_sequences(instance, opts);
    let full = (1usize << n) - 1;
    // cost[m]: cheapest handling of the requests in m; choice[m]: 0 to
    // outsource the lowest request, else the subset served by one trip.
    let mut cost = vec![Money::ZERO; full + 1];
    let mut choice = vec![0usize; full + 1];
    for m in 1..=full {
        let low = m.trailing_zeros() as usize;
        let rest = m & !(1 << low);
        let mut best = instance.requests[low].sm_price + cost[rest];
        let mut pick = 0;
        // Subsets of m that contain `low`, ascending.
        let mut sub = rest;
        let mut subsets = Vec::new();
        loop {
            subsets.push(sub | (1 << low));
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        subsets.sort_unstable();
        for s in subsets {
            if let Some((d, _)) = &seqs[s] {
                let c = instance.cost.kappa.cost(*d) + cost[m & !s];
                if c < best {
                    best = c;
                    pick = s;
                }
            }
        }
        cost[m] = best;
        choice[m] = pick;
    }

    let mut trips = Vec::new();
    let mut bank = BTreeSet::new();
    let mut m = full;
    while m != 0 {
        let pick = choice[m];
        if pick == 0 {
            let low = m.trailing_zeros() as usize;
            bank.insert(low);
            m &= !(1 << low);
        } else {
            let (_, seq) = seqs[pick].as_ref().expect("chosen subset has a sequence");
            let trip = Trip::new(instance, seq.clone()).expect("sequence was checked feasible");
            trips.push(Arc::new(trip));
            m &= !pick;
        }
    }
    let solution = Solution::new(instance, trips, bank);
    debug_assert_eq!(solution.total(), cost[full]);
    Ok(solution)
}

/// Shape of randomly generated micro-instances.
#[derive(Clone, Debug)]
pub struct MicroConfig {
    pub requests: std::ops::RangeInclusive<usize>,
    /// Coordinates are drawn from `[0, extent]^2`, in km.
    pub extent: f64,
    pub days: u32,
    /// Probability of a non-zero minimum distance.
    pub mu_probability: f64,
}

impl Default for MicroConfig {
    fn default() -> Self {
        MicroConfig {
            requests: 3..=7,
            extent: 300.0,
            days: 7,
            mu_probability: 0.5,
        }
    }
}

/// A random small instance on a Euclidean plane: daily opening hours,
/// pickups over the first days, deliveries on a ladder of later days and
/// outsourcing prices at several levels relative to the vehicle cost.
pub fn random_micro_instance<R: Rng + ?Sized>(rng: &mut R, cfg: &MicroConfig) -> Instance {
    let n = rng.gen_range(cfg.requests.clone());
    let weekday = [
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
        Weekday::Sunday,
    ][rng.gen_range(0..7)];
    let mut b = InstanceBuilder::new("micro").horizon(weekday, cfg.days);
    let hubs: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.0..cfg.extent), rng.gen_range(0.0..cfg.extent)))
        .collect();
    let point = |rng: &mut R| {
        let (hx, hy) = hubs[rng.gen_range(0..hubs.len())];
        let jitter = cfg.extent / 6.0;
        (
            (hx + rng.gen_range(-jitter..jitter)).clamp(0.0, cfg.extent),
            (hy + rng.gen_range(-jitter..jitter)).clamp(0.0, cfg.extent),
        )
    };
    let kappa = 1.06;
    let pickup_days = (cfg.days as i64 - 2).clamp(1, 3);
    for _ in 0..n {
        let (ox, oy) = point(rng);
        let (mut dx, mut dy) = point(rng);
        if (dx - ox).abs() + (dy - oy).abs() < 1.0 {
            dx = (ox + 20.0).min(cfg.extent);
            dy = oy;
            if dx == ox {
                dx = ox - 20.0;
            }
        }
        let o = b.location(ox, oy);
        let d = b.location(dx, dy);
        let day = rng.gen_range(0..pickup_days);
        let (open, close) = if rng.gen_bool(0.3) { (480, 840) } else { (360, 1080) };
        let pickup = TimeWindow::new(day * DAY + open, day * DAY + close);
        let last_day = (day + rng.gen_range(1..=3)).min(cfg.days as i64 - 1);
        let deliveries = (day..=last_day)
            .map(|k| TimeWindow::new(k * DAY + 360, k * DAY + 1080))
            .collect();
        let direct = ((ox - dx).powi(2) + (oy - dy).powi(2)).sqrt().round().max(1.0);
        let level = [0.8, 1.1, 1.6, 2.5, 4.0][rng.gen_range(0..5)];
        let price = Money::from_cents((kappa * direct * level * 100.0).round() as i64);
        b.priced_request(o, d, pickup, deliveries, price);
    }
    let mu = if rng.gen_bool(cfg.mu_probability) {
        Distance::from_km(rng.gen_range(1..=4) * 100)
    } else {
        Distance::ZERO
    };
    let inst = b.mu(mu).build().expect("generated instance is valid");
    debug_assert_eq!(
        inst.horizon,
        Horizon {
            origin_weekday: weekday,
            days: cfg.days
        }
    );
    inst
}
