use super::*;
use crate::instances::InstanceBuilder;
use crate::model::{TimeWindow, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Requests between points on the x axis, all with one wide window.
fn line(pairs: &[(f64, f64)]) -> Instance {
    let mut b = InstanceBuilder::new("line");
    let w = TimeWindow::new(0, 13 * 1440);
    for &(a, c) in pairs {
        let o = b.location(a, 0.0);
        let d = b.location(c, 0.0);
        b.request(o, d, w, vec![w]);
    }
    b.horizon(Weekday::Monday, 14).build().unwrap()
}

fn solution(inst: &Instance, trips: &[&[usize]]) -> Solution {
    let trips: Vec<Arc<Trip>> = trips
        .iter()
        .map(|s| Arc::new(Trip::new(inst, s.to_vec()).unwrap()))
        .collect();
    let planned: BTreeSet<usize> = trips.iter().flat_map(|t| t.requests().to_vec()).collect();
    let bank = (0..inst.requests.len()).filter(|r| !planned.contains(r)).collect();
    Solution::new(inst, trips, bank)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Pearson statistic of observed counts against expected probabilities.
fn chi_square(observed: &[usize], p: &[f64]) -> f64 {
    let n: usize = observed.iter().sum();
    observed
        .iter()
        .zip(p)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

// Upper 0.1% points of the chi-square distribution.
const CHI2_1DF: f64 = 10.83;
const CHI2_2DF: f64 = 13.82;

#[test]
fn random_route_removal_takes_whole_routes() {
    let inst = line(&[(0.0, 100.0), (100.0, 200.0), (200.0, 300.0)]);
    let s = solution(&inst, &[&[0, 1, 2]]);
    let d = remove_random_routes(&s, 2, &mut rng(1));
    assert!(d.trips.is_empty());
    assert_eq!(d.removed, vec![0, 1, 2]);
}

#[test]
fn route_removal_without_routes_is_empty() {
    let inst = line(&[(0.0, 100.0)]);
    let s = Solution::all_outsourced(&inst);
    for d in [
        remove_random_routes(&s, 3, &mut rng(1)),
        remove_time_routes(&s, 3, &mut rng(1)),
        remove_stop_routes(&s, 3, &mut rng(1)),
    ] {
        assert!(d.removed.is_empty());
        assert_eq!(d.bank, s.bank);
    }
}

#[test]
fn removal_is_reproducible_under_a_seed() {
    let inst = line(&[(0.0, 100.0), (100.0, 200.0), (200.0, 300.0), (300.0, 400.0), (400.0, 500.0)]);
    let s = solution(&inst, &[&[0, 1], &[2], &[3, 4]]);
    for op in RemovalOperator::ALL {
        let a = remove(op, &inst, &s, 2, &mut rng(9), 6.0);
        let b = remove(op, &inst, &s, 2, &mut rng(9), 6.0);
        assert_eq!(a.removed, b.removed, "{op:?}");
    }
}

#[test]
fn time_route_removal_is_proportional_to_driving_time() {
    // 70 km (60 min) and 210 km (180 min).
    let inst = line(&[(0.0, 70.0), (1000.0, 1210.0)]);
    let s = solution(&inst, &[&[0], &[1]]);
    let mut r = rng(3);
    let mut counts = [0usize; 2];
    for _ in 0..20_000 {
        let d = remove_time_routes(&s, 1, &mut r);
        counts[d.removed[0]] += 1;
    }
    let chi = chi_square(&counts, &[0.25, 0.75]);
    assert!(chi < CHI2_1DF, "counts {counts:?}, chi2 {chi}");
}

#[test]
fn stop_route_removal_prefers_short_routes() {
    let inst = line(&[(0.0, 100.0), (1000.0, 1100.0), (1100.0, 1200.0), (1200.0, 1300.0)]);
    let s = solution(&inst, &[&[0], &[1, 2, 3]]);
    let mut r = rng(4);
    let mut counts = [0usize; 2];
    for _ in 0..20_000 {
        let d = remove_stop_routes(&s, 1, &mut r);
        counts[usize::from(d.removed[0] != 0)] += 1;
    }
    let chi = chi_square(&counts, &[0.75, 0.25]);
    assert!(chi < CHI2_1DF, "counts {counts:?}, chi2 {chi}");
}

#[test]
fn single_route_is_always_selected() {
    let inst = line(&[(0.0, 100.0)]);
    let s = solution(&inst, &[&[0]]);
    for seed in 0..20 {
        assert_eq!(remove_time_routes(&s, 1, &mut rng(seed)).removed, vec![0]);
        assert_eq!(remove_stop_routes(&s, 1, &mut rng(seed)).removed, vec![0]);
    }
}

#[test]
fn random_shipment_removal_can_take_everything() {
    let inst = line(&[(0.0, 100.0), (100.0, 200.0), (200.0, 300.0)]);
    let s = solution(&inst, &[&[0, 1], &[2]]);
    let d = remove_random_shipments(&inst, &s, 3, &mut rng(5));
    let mut removed = d.removed.clone();
    removed.sort();
    assert_eq!(removed, vec![0, 1, 2]);
    assert!(d.trips.is_empty());
}

#[test]
fn shipment_removal_rebuilds_the_remaining_trip() {
    let inst = line(&[(0.0, 100.0), (100.0, 200.0), (200.0, 300.0)]);
    let s = solution(&inst, &[&[0, 1, 2]]);
    let d = remove_random_shipments(&inst, &s, 1, &mut rng(6));
    assert_eq!(d.removed.len(), 1);
    assert_eq!(d.trips.len(), 1);
    assert_eq!(d.trips[0].len(), 2);
    assert!(!d.trips[0].requests().contains(&d.removed[0]));
}

#[test]
fn time_shipment_removal_follows_deadhead_time() {
    // Request 0 ends where request 1 starts; request 2 starts 210 km
    // (180 min) after the end of request 1. Weights: 0, 180, 180.
    let inst = line(&[(0.0, 100.0), (100.0, 200.0), (410.0, 500.0)]);
    let s = solution(&inst, &[&[0, 1, 2]]);
    let mut r = rng(7);
    let mut counts = [0usize; 3];
    for _ in 0..20_000 {
        let d = remove_time_shipments(&inst, &s, 1, &mut r);
        counts[d.removed[0]] += 1;
    }
    assert_eq!(counts[0], 0);
    let chi = chi_square(&counts[1..], &[0.5, 0.5]);
    assert!(chi < CHI2_1DF, "counts {counts:?}, chi2 {chi}");
}

#[test]
fn identical_requests_are_removed_together() {
    let inst = line(&[(0.0, 100.0), (0.0, 100.0), (3000.0, 3300.0), (5000.0, 4700.0)]);
    let s = solution(&inst, &[&[0], &[1], &[2], &[3]]);
    let mut r = rng(8);
    // An infinite exponent always takes the most related candidate.
    for _ in 0..200 {
        let d = remove_shaw(&inst, &s, 2, &mut r, ShawVariant::DistanceAndTime, f64::INFINITY);
        if d.removed[0] < 2 {
            let mut got = d.removed.clone();
            got.sort();
            assert_eq!(got, vec![0, 1]);
        }
    }
    assert_eq!(shaw_relatedness(&inst, 0, 1, ShawVariant::DistanceAndTime), 0.0);
}

#[test]
fn time_only_relatedness_ignores_locations() {
    let mut b = InstanceBuilder::new("tw");
    let a = b.location(0.0, 0.0);
    let c = b.location(100.0, 0.0);
    let far = b.location(2000.0, 0.0);
    let far2 = b.location(2100.0, 0.0);
    let day = |k: i64| TimeWindow::new(k * 1440 + 360, k * 1440 + 1080);
    // Co-located, far apart in time.
    b.request(a, c, day(0), vec![day(0), day(1)]);
    b.request(a, c, day(5), vec![day(5), day(6)]);
    // Far apart in space, same window.
    b.request(far, far2, day(0), vec![day(0), day(1)]);
    let inst = b.build().unwrap();
    let v = ShawVariant::TimeOnly;
    assert!(shaw_relatedness(&inst, 0, 2, v) < shaw_relatedness(&inst, 0, 1, v));
    let v = ShawVariant::DistanceAndTime;
    assert!(shaw_relatedness(&inst, 0, 1, v) < shaw_relatedness(&inst, 0, 2, v));
}

#[test]
fn unit_exponent_picks_ranks_uniformly() {
    // Seed request 0; the second pick is uniform over the three others.
    let inst = line(&[(0.0, 100.0), (200.0, 300.0), (600.0, 700.0), (1400.0, 1500.0)]);
    let s = solution(&inst, &[&[0], &[1], &[2], &[3]]);
    let mut r = rng(10);
    let mut counts = [0usize; 3];
    let mut n = 0;
    while n < 15_000 {
        let d = remove_shaw(&inst, &s, 2, &mut r, ShawVariant::DistanceAndTime, 1.0);
        if d.removed[0] == 0 {
            counts[d.removed[1] - 1] += 1;
            n += 1;
        }
    }
    let chi = chi_square(&counts, &[1.0 / 3.0; 3]);
    assert!(chi < CHI2_2DF, "counts {counts:?}, chi2 {chi}");
}

#[test]
fn large_exponent_prefers_the_most_related() {
    let inst = line(&[(0.0, 100.0), (200.0, 300.0), (600.0, 700.0), (1400.0, 1500.0)]);
    let s = solution(&inst, &[&[0], &[1], &[2], &[3]]);
    let mut r = rng(11);
    let mut nearest = 0;
    let mut n = 0;
    while n < 2000 {
        let d = remove_shaw(&inst, &s, 2, &mut r, ShawVariant::DistanceAndTime, 6.0);
        if d.removed[0] == 0 {
            nearest += usize::from(d.removed[1] == 1);
            n += 1;
        }
    }
    // P(floor(3 u^6) = 0) = (1/3)^(1/6) ~ 0.83.
    assert!(nearest > 1500, "{nearest}");
}
