//! Generators and property checks shared by the integration tests and the
//! acceptance runner. Every check takes a seed and reports the first broken
//! expectation as an error message.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ftl_core::engine::{run, AlnsConfig};
use ftl_core::instances::InstanceBuilder;
use ftl_core::model::{
    solution_cost, validate_solution, Distance, Instance, Minutes, Money, Solution, TimeWindow, Trip, Weekday, DAY,
};
use ftl_core::operators::{remove, repair, InsertionCache, InsertionConfig, InsertionOperator, RemovalOperator};
use ftl_core::oracle::{
    brute_force, brute_force_leg, brute_force_schedule, brute_force_with, build_arc_graph, check_lp_assignment,
    random_micro_instance, verify_schedule, BruteForceOptions, MicroConfig,
};
use ftl_core::scenarios::{scenario_all_sm, scenario_mixed};
use ftl_core::schedule::{check_insertion, propagate, simulate_trip, Label};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn micro(seed: u64) -> Instance {
    random_micro_instance(&mut rng(seed), &MicroConfig::default())
}

pub fn engine_config(iterations: usize, seed: u64) -> AlnsConfig {
    AlnsConfig {
        max_iterations: iterations,
        segment_length: 50.min(iterations),
        seed,
        ..AlnsConfig::default()
    }
}

const WEEKDAYS: [Weekday; 7] = [
    Weekday::Monday,
    Weekday::Tuesday,
    Weekday::Wednesday,
    Weekday::Thursday,
    Weekday::Friday,
    Weekday::Saturday,
    Weekday::Sunday,
];

/// Daytime window on `day` with both ends on the half-hour grid.
fn grid_window<R: Rng>(rng: &mut R, day: i64) -> TimeWindow {
    let open = 30 * rng.gen_range(8..=20);
    let len = 30 * rng.gen_range(4..=30);
    let start = day * DAY + open;
    TimeWindow::new(start, (start + len).min(day * DAY + DAY))
}

/// A trip of one to three requests where every travel time, window bound and
/// rule parameter is a multiple of 30 minutes. Legs are up to 840 km long so
/// that shift breaks and Sunday breaks both occur.
pub fn grid_trip(seed: u64) -> (Instance, Vec<usize>) {
    let mut r = rng(seed);
    let k = r.gen_range(1..=3usize);
    let n = 2 * k;
    let mut d = vec![Distance::ZERO; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let km = Distance::from_km(35 * r.gen_range(1..=24));
            d[i * n + j] = km;
            d[j * n + i] = km;
        }
    }
    let days = r.gen_range(4..=9u32);
    let mut b = InstanceBuilder::new("grid")
        .horizon(WEEKDAYS[r.gen_range(0..7)], days)
        .distances(d);
    for i in 0..n {
        b.location(i as f64, 0.0);
    }
    let mut day = 0;
    for i in 0..k {
        day = (day + r.gen_range(0..=1)).min(days as i64 - 2);
        let pickup = grid_window(&mut r, day);
        let last = (day + r.gen_range(0..=3)).min(days as i64 - 1);
        let deliveries = (day..=last).map(|x| grid_window(&mut r, x)).collect::<Vec<_>>();
        b.request(2 * i, 2 * i + 1, pickup, sorted_disjoint(deliveries));
    }
    (b.build().expect("grid instance is valid"), (0..k).collect())
}

fn sorted_disjoint(mut w: Vec<TimeWindow>) -> Vec<TimeWindow> {
    w.sort_by_key(|x| x.start);
    let mut out: Vec<TimeWindow> = Vec::new();
    for x in w {
        match out.last_mut() {
            Some(l) if x.start <= l.end => l.end = l.end.max(x.end),
            _ => out.push(x),
        }
    }
    out
}

/// A random feasible solution: requests in random order are appended to
/// the open trip while it stays feasible, some are outsourced outright and
/// trips below the minimum distance are dissolved into the bank.
pub fn random_solution<R: Rng>(instance: &Instance, rng: &mut R) -> Solution {
    let mut order: Vec<usize> = (0..instance.requests.len()).collect();
    order.shuffle(rng);
    let mut trips: Vec<Vec<usize>> = Vec::new();
    let mut bank = BTreeSet::new();
    let mut open: Vec<usize> = Vec::new();
    for r in order {
        if rng.gen_bool(0.25) {
            bank.insert(r);
            continue;
        }
        open.push(r);
        if simulate_trip(instance, &open).is_err() {
            open.pop();
            if !open.is_empty() {
                trips.push(std::mem::take(&mut open));
            }
            open.push(r);
            if simulate_trip(instance, &open).is_err() {
                open.clear();
                bank.insert(r);
            }
        }
        if rng.gen_bool(0.2) && !open.is_empty() {
            trips.push(std::mem::take(&mut open));
        }
    }
    if !open.is_empty() {
        trips.push(open);
    }
    let mut kept = Vec::new();
    for seq in trips {
        let t = Trip::new(instance, seq).expect("built from feasible sequences");
        if t.distance() >= instance.mu {
            kept.push(Arc::new(t));
        } else {
            bank.extend(t.requests().iter().copied());
        }
    }
    Solution::new(instance, kept, bank)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// A produced schedule obeys the counter, Sunday, window and horizon rules,
/// and completes no later than the exhaustive search on the same grid.
pub fn check_trip_schedule(seed: u64) -> Check {
    let (inst, seq) = grid_trip(seed);
    let oracle = brute_force_schedule(&inst, &seq, 30);
    match simulate_trip(&inst, &seq) {
        Ok(s) => {
            let v = verify_schedule(&inst, &seq, &s);
            ensure(v.is_empty(), || format!("seed {seed}: rule violations {v:?}"))?;
            let best = oracle.map_err(|e| format!("seed {seed}: produced a schedule the search calls {e}"))?;
            ensure(s.end() <= best, || format!("seed {seed}: completes at {}, optimum {best}", s.end()))
        }
        Err(e) => ensure(oracle.is_err(), || {
            format!("seed {seed}: reported {e:?} but the search completes at {:?}", oracle)
        }),
    }
}

/// One leg from a random driving state: same earliest arrival as the
/// exhaustive search, or infeasible for both. Departures fall outside
/// Sunday blackouts, as they do after any service; from inside a blackout
/// with a positive counter, stretching the blackout into a full break can
/// beat the drive-first policy.
pub fn check_leg(seed: u64) -> Check {
    let mut r = rng(seed);
    let (inst, _) = grid_trip(seed ^ 0x5eed);
    let cal = inst.calendar();
    let end = cal.horizon_end();
    let label = Label {
        arrival: 0,
        nonstop_drive: 30 * r.gen_range(0..=15),
    };
    let mut depart: Minutes = 30 * r.gen_range(0..(end / 30 / 2));
    if let Some((_, until)) = cal.blackout_at(depart, inst.regs.tau_s) {
        depart = until;
    }
    let drive: Minutes = 30 * r.gen_range(0..=36);
    let day = (depart + drive) / DAY;
    let windows = sorted_disjoint(
        (day..(day + r.gen_range(1..=3)).min(end / DAY))
            .map(|d| grid_window(&mut r, d))
            .collect(),
    );
    let got = propagate(label, depart, drive, &windows, &inst.regs, &cal);
    let want = brute_force_leg(label, depart, drive, &windows, &inst.regs, &cal, 30);
    match (got, want) {
        (Ok(l), Ok(t)) => ensure(l.arrival == t, || format!("seed {seed}: arrival {} vs optimum {t}", l.arrival)),
        (Err(_), Err(_)) => Ok(()),
        (g, w) => Err(format!("seed {seed}: propagate {g:?}, search {w:?}")),
    }
}

/// Incremental insertion check agrees with simulating the new sequence.
pub fn check_insertion_consistency(seed: u64) -> Check {
    let inst = micro(seed);
    let mut r = rng(seed ^ 0x1457);
    let sol = random_solution(&inst, &mut r);
    for trip in &sol.trips {
        for req in 0..inst.requests.len() {
            if trip.requests().contains(&req) {
                continue;
            }
            for pos in 0..=trip.len() {
                let mut seq = trip.requests().to_vec();
                seq.insert(pos, req);
                let a = check_insertion(&inst, trip, req, pos).ok();
                let b = simulate_trip(&inst, &seq).ok();
                ensure(a == b, || format!("seed {seed}: request {req} at {pos} of {:?}", trip.requests()))?;
            }
        }
    }
    Ok(())
}

fn solution_ok(inst: &Instance, s: &Solution, what: &str) -> Check {
    let v = validate_solution(inst, s);
    ensure(v.is_empty(), || format!("{what}: {v:?}"))?;
    let c = solution_cost(inst, s).map_err(|e| format!("{what}: {e}"))?;
    ensure(c == s.cost, || format!("{what}: cached cost {:?} differs from {c:?}", s.cost))
}

/// Removal takes the expected number of requests and repair puts every
/// request back on exactly one trip or in the bank, feasibly.
pub fn check_destroy_repair(seed: u64) -> Check {
    let inst = micro(seed);
    let mut r = rng(seed ^ 0xde57);
    let sol = random_solution(&inst, &mut r);
    solution_ok(&inst, &sol, "random solution")?;
    let planned = sol.planned_count();
    let op = RemovalOperator::ALL[r.gen_range(0..RemovalOperator::ALL.len())];
    let q = r.gen_range(0..=planned);
    let d = remove(op, &inst, &sol, q, &mut r, 6.0);
    let removed = d.removed.len();
    let longest = sol.trips.iter().map(|t| t.len()).max().unwrap_or(0);
    match op {
        RemovalOperator::RandomRoute | RemovalOperator::TimeRoute | RemovalOperator::StopRoute => {
            ensure(removed >= q && (q == 0 || removed < q + longest), || {
                format!("seed {seed}: {op:?} removed {removed} for q = {q}, longest route {longest}")
            })?
        }
        _ => ensure(removed == q, || format!("seed {seed}: {op:?} removed {removed} for q = {q}"))?,
    }
    let distinct: BTreeSet<usize> = d.removed.iter().copied().collect();
    ensure(distinct.len() == removed, || format!("seed {seed}: duplicate removal"))?;
    let ins = [
        InsertionOperator::Greedy,
        InsertionOperator::Regret(2),
        InsertionOperator::Regret(4),
    ][r.gen_range(0..3)];
    let cfg = InsertionConfig {
        regret_literal: r.gen_bool(0.5),
    };
    let repaired = repair(&inst, d, ins, &cfg, &mut InsertionCache::new());
    let mut seen: Vec<usize> = repaired.planned().chain(repaired.bank.iter().copied()).collect();
    seen.sort();
    ensure(seen == (0..inst.requests.len()).collect::<Vec<_>>(), || {
        format!("seed {seed}: after {op:?}/{ins:?} requests are {seen:?}")
    })?;
    solution_ok(&inst, &repaired, &format!("seed {seed}: repaired"))
}

/// Short search run: weights stay positive, the best cost never rises, the
/// result is feasible, not worse than outsourcing everything and not better
/// than the exact optimum.
pub fn check_search(seed: u64, iterations: usize) -> Check {
    let inst = micro(seed);
    let (best, report) = run(&inst, &engine_config(iterations, seed)).map_err(|e| e.to_string())?;
    solution_ok(&inst, &best, &format!("seed {seed}: best"))?;
    for s in report.removal_stats.iter().chain(&report.insertion_stats) {
        ensure(s.weight > 0.0 && s.weight.is_finite(), || {
            format!("seed {seed}: weight of {} is {}", s.name, s.weight)
        })?;
    }
    for w in report.trace.windows(2) {
        ensure(w[1].best_cost <= w[0].best_cost, || {
            format!("seed {seed}: best cost rose at iteration {}", w[1].iteration)
        })?;
    }
    ensure(best.total() <= report.initial_cost.total, || format!("seed {seed}: best above initial"))?;
    let all_sm = scenario_all_sm(&inst).result.total_cost;
    ensure(best.total() <= all_sm, || format!("seed {seed}: {} above all-SM {all_sm}", best.total()))?;
    let opt = brute_force(&inst).map_err(|e| e.to_string())?;
    ensure(best.total() >= opt.total(), || {
        format!("seed {seed}: {} below the optimum {}", best.total(), opt.total())
    })
}

/// The mixed scenario never costs more than outsourcing everything.
pub fn check_mixed_vs_all_sm(seed: u64, iterations: usize) -> Check {
    let inst = micro(seed);
    let mixed = scenario_mixed(&inst, &engine_config(iterations, seed)).map_err(|e| e.to_string())?;
    let sm = scenario_all_sm(&inst);
    ensure(mixed.result.total_cost <= sm.result.total_cost, || {
        format!("seed {seed}: mixed {} > all-SM {}", mixed.result.total_cost, sm.result.total_cost)
    })
}

/// Every feasible solution is a feasible point of the routing model with
/// the same objective value.
pub fn check_lp(inst: &Instance, sol: &Solution) -> Check {
    let graph = build_arc_graph(inst);
    let c = check_lp_assignment(&graph, inst, sol);
    ensure(c.violations.is_empty(), || format!("violations {:?}", c.violations))?;
    let gap = (c.objective - sol.total()).mills().abs();
    ensure(gap <= Money::from_cents(1).mills(), || {
        format!("objective {} vs cost {}", c.objective, sol.total())
    })
}

/// Restricting sequences to arcs of the arc graph leaves the optimum unchanged.
pub fn check_arc_filter(seed: u64) -> Check {
    let inst = micro(seed);
    let plain = brute_force(&inst).map_err(|e| e.to_string())?;
    let filtered = brute_force_with(&inst, BruteForceOptions { arc_filter: true }).map_err(|e| e.to_string())?;
    ensure(plain.total() == filtered.total(), || {
        format!("seed {seed}: {} without filter, {} with", plain.total(), filtered.total())
    })
}

/// Directory holding benchmark files: `FTL_GH_DIR` or `tests/data/gh`.
pub fn gh_dir() -> PathBuf {
    std::env::var_os("FTL_GH_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/gh"))
}

/// `<name>.txt` in any letter case.
pub fn find_gh(name: &str) -> Option<PathBuf> {
    let dir = gh_dir();
    std::fs::read_dir(&dir).ok()?.flatten().map(|e| e.path()).find(|p| {
        p.file_stem().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case(name))
            && p.extension().and_then(|s| s.to_str()).is_some_and(|s| s.eq_ignore_ascii_case("txt"))
    })
}

pub fn data(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(path)
}

/// Benchmark-layout text with `pairs` pickup/delivery pairs on a 140 x 140
/// grid, clustered around twelve centres or uniform, with ready times over
/// the first 1200 time units.
pub fn synthetic_gh(seed: u64, clustered: bool, pairs: usize) -> String {
    let mut r = rng(seed);
    let centres: Vec<(f64, f64)> = (0..12)
        .map(|_| (r.gen_range(10.0..130.0), r.gen_range(10.0..130.0)))
        .collect();
    let mut text = format!(
        "{}_syn_{seed}\n\nVEHICLE\nNUMBER     CAPACITY\n  50          200\n\nCUSTOMER\n\
         CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE TIME\n\n    0  70  70  0  0  1351  0\n",
        if clustered { "C" } else { "R" }
    );
    for i in 1..=2 * pairs {
        let (x, y) = if clustered {
            let (cx, cy) = centres[r.gen_range(0..centres.len())];
            (cx + r.gen_range(-10.0..10.0), cy + r.gen_range(-10.0..10.0))
        } else {
            (r.gen_range(0.0..140.0), r.gen_range(0.0..140.0))
        };
        let ready = r.gen_range(0..=1200);
        text += &format!(
            "    {i}  {}  {}  10  {ready}  {}  90\n",
            x.clamp(0.0, 140.0).round(),
            y.clamp(0.0, 140.0).round(),
            ready + 60
        );
    }
    text
}

pub fn synthetic_instance(seed: u64, clustered: bool, pairs: usize) -> Instance {
    let gh = ftl_core::instances::parse_gh(&synthetic_gh(seed, clustered, pairs)).expect("generated text parses");
    ftl_core::instances::transform(&gh, &Default::default()).expect("generated instance transforms")
}
