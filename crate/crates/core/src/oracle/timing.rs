//! Exhaustive schedule search and an independent schedule rule checker.

use std::collections::{BTreeMap, HashSet};

use crate::model::{Instance, Minutes, RegParams, TimeWindow};
use crate::schedule::{Calendar, Label, Schedule, SegmentKind};

use super::OracleError;

/// Search state on the time grid. `idle` is capped at `tau_b` and zeroed
/// whenever the counter is zero, where it no longer matters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct State {
    /// Next node to serve.
    node: usize,
    /// Driving minutes left on the leg into `node`.
    remaining: Minutes,
    counter: Minutes,
    idle: Minutes,
}

struct Search<'a> {
    regs: &'a RegParams,
    cal: Calendar,
    g: Minutes,
    legs: Vec<(Minutes, &'a [TimeWindow])>,
}

impl Search<'_> {
    fn in_blackout(&self, from: Minutes, to: Minutes) -> bool {
        self.cal.blackout_overlapping(from, to, self.regs.tau_s).is_some()
    }

    fn service_ok(&self, t: Minutes, windows: &[TimeWindow]) -> bool {
        let end = t + self.regs.sigma;
        end <= self.cal.horizon_end()
            && windows.iter().any(|w| w.start <= t && end <= w.end)
            && !(if self.regs.sigma > 0 {
                self.in_blackout(t, end)
            } else {
                self.cal.blackout_at(t, self.regs.tau_s).is_some()
            })
    }

    fn rest(&self, s: State) -> State {
        if s.counter == 0 {
            return s;
        }
        let idle = (s.idle + self.g).min(self.regs.tau_b);
        if idle >= self.regs.tau_b {
            State { counter: 0, idle: 0, ..s }
        } else {
            State { idle, ..s }
        }
    }

    /// Earliest service start at the last node, exploring every placement
    /// of rests (including voluntary ones) on the grid. States are visited
    /// per time step: waiting with a zero counter leaves the state unchanged,
    /// so an earlier visit does not cover a later one.
    fn run(&self, t0: Minutes, start: State) -> Option<Minutes> {
        let mut queue: BTreeMap<Minutes, HashSet<State>> = BTreeMap::new();
        queue.entry(t0).or_default().insert(start);
        let end = self.cal.horizon_end();
        let last = self.legs.len() - 1;
        while let Some((t, states)) = queue.pop_first() {
            for s in undominated(states) {
                let mut push = |ns: State, nt: Minutes| {
                    if nt <= end {
                        queue.entry(nt).or_default().insert(ns);
                    }
                };
                if s.remaining > 0 {
                    if s.counter + self.g <= self.regs.tau_n && !self.in_blackout(t, t + self.g) {
                        push(
                            State {
                                remaining: s.remaining - self.g,
                                counter: s.counter + self.g,
                                idle: 0,
                                ..s
                            },
                            t + self.g,
                        );
                    }
                    push(self.rest(s), t + self.g);
                    continue;
                }
                let windows = self.legs[s.node].1;
                if self.service_ok(t, windows) {
                    if s.node == last {
                        return Some(t);
                    }
                    let next = s.node + 1;
                    push(
                        State {
                            node: next,
                            remaining: self.legs[next].0,
                            counter: s.counter,
                            idle: 0,
                        },
                        t + self.regs.sigma,
                    );
                }
                if windows.iter().any(|w| w.end > t) {
                    push(self.rest(s), t + self.g);
                }
            }
        }
        None
    }
}

/// Drops states that another state at the same node and leg progress
/// dominates: a counter no higher and a rest at least as long. A zero
/// counter counts as a complete rest.
fn undominated(states: HashSet<State>) -> Vec<State> {
    let rested = |s: &State| if s.counter == 0 { Minutes::MAX } else { s.idle };
    let mut v: Vec<State> = states.into_iter().collect();
    v.sort_by_key(|s| (s.node, s.remaining, s.counter, std::cmp::Reverse(rested(s))));
    let mut out = Vec::with_capacity(v.len());
    let mut group = None;
    let mut best_rest = Minutes::MIN;
    for s in v {
        if group != Some((s.node, s.remaining)) {
            group = Some((s.node, s.remaining));
            best_rest = Minutes::MIN;
        }
        if rested(&s) > best_rest {
            best_rest = rested(&s);
            out.push(s);
        }
    }
    out
}

fn check_grid(values: &[(&str, Minutes)], g: Minutes) -> Result<(), OracleError> {
    if g <= 0 {
        return Err(OracleError::Granularity("granularity must be positive".into()));
    }
    for (name, v) in values {
        if v.rem_euclid(g) != 0 {
            return Err(OracleError::Granularity(format!("{name} = {v} is not a multiple of {g}")));
        }
    }
    Ok(())
}

fn regs_on_grid(regs: &RegParams, g: Minutes) -> Result<(), OracleError> {
    check_grid(
        &[
            ("tau_n", regs.tau_n),
            ("tau_b", regs.tau_b),
            ("tau_s", regs.tau_s),
            ("sigma", regs.sigma),
            ("day", crate::model::DAY),
        ],
        g,
    )
}

fn windows_on_grid(windows: &[TimeWindow], g: Minutes) -> Result<(), OracleError> {
    for w in windows {
        check_grid(&[("window start", w.start), ("window end", w.end)], g)?;
    }
    Ok(())
}

const MAX_DAYS: u32 = 14;

/// Earliest completion (departure from the last node) of `seq` found by
/// exhaustive search on a `granularity`-minute grid. All durations, travel
/// times and window bounds must lie on the grid.
pub fn brute_force_schedule(instance: &Instance, seq: &[usize], granularity: Minutes) -> Result<Minutes, OracleError> {
    if seq.is_empty() || seq.len() > 3 {
        return Err(OracleError::TooLarge {
            size: seq.len(),
            limit: 3,
        });
    }
    if instance.horizon.days > MAX_DAYS {
        return Err(OracleError::TooLarge {
            size: instance.horizon.days as usize,
            limit: MAX_DAYS as usize,
        });
    }
    let g = granularity;
    regs_on_grid(&instance.regs, g)?;
    let mut legs: Vec<(Minutes, &[TimeWindow])> = Vec::with_capacity(seq.len() * 2);
    let mut prev_loc: Option<usize> = None;
    for &r in seq {
        let req = &instance.requests[r];
        let into_pickup = prev_loc.map_or(0, |p| instance.time(p, req.origin));
        legs.push((into_pickup, std::slice::from_ref(&req.pickup_window)));
        legs.push((instance.time(req.origin, req.destination), &req.delivery_windows));
        prev_loc = Some(req.destination);
        windows_on_grid(std::slice::from_ref(&req.pickup_window), g)?;
        windows_on_grid(&req.delivery_windows, g)?;
    }
    for (d, _) in &legs {
        check_grid(&[("travel time", *d)], g)?;
    }
    let search = Search {
        regs: &instance.regs,
        cal: instance.calendar(),
        g,
        legs,
    };
    let t0 = instance.requests[seq[0]].pickup_window.start;
    let start = State {
        node: 0,
        remaining: 0,
        counter: 0,
        idle: 0,
    };
    search
        .run(t0, start)
        .map(|s| s + instance.regs.sigma)
        .ok_or(OracleError::Infeasible)
}

/// Earliest service start at the end of one leg, found by exhaustive search
/// on the grid; the counterpart of [`crate::schedule::propagate`].
pub fn brute_force_leg(
    label: Label,
    depart_time: Minutes,
    drive_minutes: Minutes,
    windows: &[TimeWindow],
    regs: &RegParams,
    cal: &Calendar,
    granularity: Minutes,
) -> Result<Minutes, OracleError> {
    let g = granularity;
    regs_on_grid(regs, g)?;
    windows_on_grid(windows, g)?;
    check_grid(
        &[
            ("departure", depart_time),
            ("drive", drive_minutes),
            ("counter", label.nonstop_drive),
        ],
        g,
    )?;
    let search = Search {
        regs,
        cal: *cal,
        g,
        legs: vec![(drive_minutes, windows)],
    };
    let start = State {
        node: 0,
        remaining: drive_minutes,
        counter: label.nonstop_drive,
        idle: 0,
    };
    search.run(depart_time, start).ok_or(OracleError::Infeasible)
}

/// A broken schedule rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleViolation {
    NodeCount { expected: usize, found: usize },
    /// Segments overlap, leave a gap, or have negative length.
    Timeline { at: Minutes },
    /// The timeline does not start at the first pickup window's start.
    Start { expected: Minutes, found: Minutes },
    /// Service of a node is missing, misplaced or outside every window.
    Service { node: usize },
    /// Drive time on a leg differs from the travel time.
    LegDrive { node: usize, expected: Minutes, found: Minutes },
    /// More than `tau_n` of driving without a qualifying break.
    Counter { at: Minutes, counter: Minutes },
    /// Driving or service inside a Sunday blackout.
    Sunday { at: Minutes },
    Horizon { at: Minutes },
}

/// Checks `schedule` for `seq` against the scheduling rules, independently of
/// how it was produced.
pub fn verify_schedule(instance: &Instance, seq: &[usize], schedule: &Schedule) -> Vec<ScheduleViolation> {
    let regs = &instance.regs;
    let cal = instance.calendar();
    let mut out = Vec::new();
    let n = seq.len() * 2;
    if schedule.nodes.len() != n {
        out.push(ScheduleViolation::NodeCount {
            expected: n,
            found: schedule.nodes.len(),
        });
        return out;
    }
    if n == 0 {
        return out;
    }
    let node_info = |i: usize| {
        let r = &instance.requests[seq[i / 2]];
        if i % 2 == 0 {
            (r.origin, std::slice::from_ref(&r.pickup_window))
        } else {
            (r.destination, r.delivery_windows.as_slice())
        }
    };

    let segs = &schedule.segments;
    let expected_start = instance.requests[seq[0]].pickup_window.start;
    if let Some(first) = segs.first() {
        if first.start != expected_start {
            out.push(ScheduleViolation::Start {
                expected: expected_start,
                found: first.start,
            });
        }
    }
    for w in segs.windows(2) {
        if w[0].end != w[1].start {
            out.push(ScheduleViolation::Timeline { at: w[0].end });
        }
    }
    for s in segs {
        if s.end < s.start {
            out.push(ScheduleViolation::Timeline { at: s.start });
        }
        if s.end > cal.horizon_end() {
            out.push(ScheduleViolation::Horizon { at: s.end });
        }
        if matches!(s.kind, SegmentKind::Drive | SegmentKind::Service) && s.end > s.start {
            if let Some((b, _)) = cal.blackout_overlapping(s.start, s.end, regs.tau_s) {
                out.push(ScheduleViolation::Sunday { at: b.max(s.start) });
            }
        }
    }

    // Services in node order, drive totals per leg.
    let services: Vec<usize> = segs
        .iter()
        .enumerate()
        .filter(|(_, s)| s.kind == SegmentKind::Service)
        .map(|(i, _)| i)
        .collect();
    if services.len() != n {
        out.push(ScheduleViolation::Service { node: services.len().min(n - 1) });
        return out;
    }
    for (i, &si) in services.iter().enumerate() {
        let seg = segs[si];
        let node = schedule.nodes[i];
        let (_, windows) = node_info(i);
        let fits = windows.iter().any(|w| w.start <= seg.start && seg.end <= w.end);
        if seg.start != node.service_start
            || seg.end != node.departure
            || seg.end - seg.start != regs.sigma
            || !fits
            || node.arrival > node.service_start
        {
            out.push(ScheduleViolation::Service { node: i });
        }
        if i > 0 {
            let driven: Minutes = segs[services[i - 1] + 1..si]
                .iter()
                .filter(|s| s.kind == SegmentKind::Drive)
                .map(|s| s.end - s.start)
                .sum();
            let (from, _) = node_info(i - 1);
            let (to, _) = node_info(i);
            let expected = instance.time(from, to);
            if driven != expected {
                out.push(ScheduleViolation::LegDrive {
                    node: i,
                    expected,
                    found: driven,
                });
            }
        }
    }

    // Counter: contiguous non-drive, non-service time of at least tau_b resets.
    let mut counter = 0;
    let mut idle = 0;
    for s in segs {
        let len = s.end - s.start;
        match s.kind {
            SegmentKind::Drive => {
                idle = 0;
                counter += len;
                if counter > regs.tau_n {
                    out.push(ScheduleViolation::Counter { at: s.end, counter });
                }
            }
            SegmentKind::Service => idle = 0,
            SegmentKind::Break | SegmentKind::Wait => {
                idle += len;
                if idle >= regs.tau_b {
                    counter = 0;
                }
            }
        }
    }
    out
}
