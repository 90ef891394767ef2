//! Earliest-arrival driver schedules.
//!
//! A driver's state at a node is a [`Label`]: the time service can start and
//! the minutes driven since the last shift break. Legs are driven in maximal
//! stints: drive until the nonstop counter reaches `tau_n`, rest exactly
//! `tau_b`, repeat. Every Sunday the interval `[00:00, 00:00 + tau_s)` is a
//! blackout in which neither driving nor (un)loading may happen. Any
//! contiguous stretch of waiting or resting of at least `tau_b` resets the
//! counter; (un)loading interrupts such a stretch.
//!
//! Serving as early as possible is not always best: arriving with a high
//! counter and waiting slightly less than `tau_b` for a window leaves the
//! counter untouched, while waiting a full `tau_b` would reset it and can
//! save a whole break on the next leg. Trips are therefore scheduled over
//! small Pareto sets of labels (earlier service start vs. lower counter);
//! [`propagate`] exposes the single-label step.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Horizon, Instance, Minutes, RegParams, TimeWindow, DAY};

/// Driver state at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Label {
    /// Time at which service at the node starts.
    pub arrival: Minutes,
    /// Minutes driven since the last shift break.
    pub nonstop_drive: Minutes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfeasibleReason {
    /// No window of the node can be met.
    NoWindow,
    /// The schedule would run past the end of the horizon.
    HorizonExceeded,
}

impl fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfeasibleReason::NoWindow => f.write_str("no reachable time window"),
            InfeasibleReason::HorizonExceeded => f.write_str("horizon exceeded"),
        }
    }
}

/// A sequence has no feasible schedule; `node` is the first node (pickup of
/// request `k` is node `2k`, its delivery `2k + 1`) that cannot be served.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Error)]
#[error("node {node}: {reason}")]
pub struct Infeasible {
    pub node: usize,
    pub reason: InfeasibleReason,
}

/// Week structure of the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Calendar {
    origin_weekday: i64,
    end: Minutes,
}

impl Calendar {
    pub fn new(horizon: Horizon) -> Self {
        Calendar {
            origin_weekday: horizon.origin_weekday.index(),
            end: horizon.end(),
        }
    }

    pub fn horizon_end(&self) -> Minutes {
        self.end
    }

    pub fn is_sunday(&self, day: i64) -> bool {
        (self.origin_weekday + day).rem_euclid(7) == 6
    }

    /// Start of the first Sunday at or after `day`.
    fn sunday_on_or_after(&self, day: i64) -> Minutes {
        let offset = (6 - (self.origin_weekday + day)).rem_euclid(7);
        (day + offset) * DAY
    }

    /// The blackout interval containing `t`, if any.
    pub fn blackout_at(&self, t: Minutes, tau_s: Minutes) -> Option<(Minutes, Minutes)> {
        let day = t.div_euclid(DAY);
        let start = day * DAY;
        (self.is_sunday(day) && t < start + tau_s).then_some((start, start + tau_s))
    }

    /// Start of the first blackout strictly after `t`.
    pub fn next_blackout_after(&self, t: Minutes) -> Minutes {
        let day = t.div_euclid(DAY);
        let candidate = self.sunday_on_or_after(day);
        if candidate > t {
            candidate
        } else {
            self.sunday_on_or_after(day + 1)
        }
    }

    /// First blackout overlapping `[from, to)`.
    pub fn blackout_overlapping(&self, from: Minutes, to: Minutes, tau_s: Minutes) -> Option<(Minutes, Minutes)> {
        if let Some(b) = self.blackout_at(from, tau_s) {
            return Some(b);
        }
        let next = self.next_blackout_after(from);
        (next < to).then_some((next, next + tau_s))
    }

    /// All blackouts intersecting `[from, to]`.
    pub fn blackouts_between(&self, from: Minutes, to: Minutes, tau_s: Minutes) -> Vec<(Minutes, Minutes)> {
        let mut out = Vec::new();
        let mut day = from.div_euclid(DAY);
        loop {
            let start = self.sunday_on_or_after(day);
            if start > to {
                break;
            }
            if start + tau_s > from {
                out.push((start, start + tau_s));
            }
            day = start / DAY + 1;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Drive,
    /// Rest taken on the road: forced shift break or Sunday blackout.
    Break,
    /// Waiting at a node before service.
    Wait,
    Service,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: Minutes,
    pub end: Minutes,
}

impl Segment {
    pub fn len(&self) -> Minutes {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NodeTimes {
    pub arrival: Minutes,
    pub service_start: Minutes,
    pub departure: Minutes,
}

/// Timed plan of a trip: one entry per node (pickup and delivery of every
/// request, in order) and a gap-free activity timeline from the first
/// pickup window start to the last departure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub nodes: Vec<NodeTimes>,
    pub segments: Vec<Segment>,
}

impl Schedule {
    pub fn start(&self) -> Minutes {
        self.segments.first().map_or(0, |s| s.start)
    }

    pub fn end(&self) -> Minutes {
        self.nodes.last().map_or(0, |n| n.departure)
    }
}

/// Driver clock. Tracks the nonstop counter and the start of the current
/// idle stretch; optionally records the activity timeline.
struct Driver<'a> {
    t: Minutes,
    counter: Minutes,
    idle_since: Minutes,
    regs: &'a RegParams,
    cal: &'a Calendar,
    log: Option<&'a mut Vec<Segment>>,
}

impl<'a> Driver<'a> {
    fn new(t: Minutes, counter: Minutes, regs: &'a RegParams, cal: &'a Calendar) -> Self {
        Driver {
            t,
            counter,
            idle_since: t,
            regs,
            cal,
            log: None,
        }
    }

    fn record(&mut self, kind: SegmentKind, start: Minutes, end: Minutes) {
        if end <= start {
            return;
        }
        if let Some(log) = self.log.as_deref_mut() {
            log.push(Segment { kind, start, end });
        }
    }

    fn idle_until(&mut self, until: Minutes, kind: SegmentKind) {
        if until <= self.t {
            return;
        }
        self.record(kind, self.t, until);
        self.t = until;
        if self.t - self.idle_since >= self.regs.tau_b {
            self.counter = 0;
        }
    }

    fn drive(&mut self, minutes: Minutes) -> Result<(), InfeasibleReason> {
        let regs = self.regs;
        let mut remaining = minutes;
        while remaining > 0 {
            if let Some((_, end)) = self.cal.blackout_at(self.t, regs.tau_s) {
                self.idle_until(end, SegmentKind::Break);
                continue;
            }
            if self.counter >= regs.tau_n {
                let until = self.t.max(self.idle_since + regs.tau_b);
                self.idle_until(until, SegmentKind::Break);
                continue;
            }
            let stint = remaining
                .min(regs.tau_n - self.counter)
                .min(self.cal.next_blackout_after(self.t) - self.t);
            self.record(SegmentKind::Drive, self.t, self.t + stint);
            self.t += stint;
            self.counter += stint;
            self.idle_since = self.t;
            remaining -= stint;
            if self.t > self.cal.horizon_end() {
                return Err(InfeasibleReason::HorizonExceeded);
            }
        }
        Ok(())
    }
}

/// Earliest `s >= not_before` such that `[s, s + sigma]` lies in one of
/// `windows` and `[s, s + sigma)` misses every blackout.
pub fn earliest_service(
    not_before: Minutes,
    windows: &[TimeWindow],
    regs: &RegParams,
    cal: &Calendar,
) -> Result<Minutes, InfeasibleReason> {
    let sigma = regs.sigma;
    for w in windows {
        let mut s = not_before.max(w.start);
        while s + sigma <= w.end {
            let hit = if sigma > 0 {
                cal.blackout_overlapping(s, s + sigma, regs.tau_s)
            } else {
                cal.blackout_at(s, regs.tau_s)
            };
            match hit {
                Some((_, end)) => s = end,
                None if s + sigma > cal.horizon_end() => return Err(InfeasibleReason::HorizonExceeded),
                None => return Ok(s),
            }
        }
    }
    Err(InfeasibleReason::NoWindow)
}

/// Drives one leg from `depart_time` and returns the label at the target:
/// the earliest feasible service start, with the counter reset when the wait
/// before service lasts at least `tau_b`.
pub fn propagate(
    label: Label,
    depart_time: Minutes,
    drive_minutes: Minutes,
    target_windows: &[TimeWindow],
    regs: &RegParams,
    cal: &Calendar,
) -> Result<Label, InfeasibleReason> {
    let mut driver = Driver::new(depart_time, label.nonstop_drive, regs, cal);
    driver.drive(drive_minutes)?;
    let arrival = driver.t;
    let start = earliest_service(arrival, target_windows, regs, cal)?;
    let counter = if start - arrival >= regs.tau_b { 0 } else { driver.counter };
    Ok(Label {
        arrival: start,
        nonstop_drive: counter,
    })
}

/// One member of a node's Pareto set of labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct FrontLabel {
    pub service_start: Minutes,
    pub counter: Minutes,
    /// Index of the label it was extended from in the previous node's set.
    pub parent: u32,
}

pub(crate) type Front = Vec<FrontLabel>;

/// Location and windows of node `i` of a request sequence.
fn node<'a>(instance: &'a Instance, seq: &[usize], i: usize) -> (usize, &'a [TimeWindow]) {
    let r = &instance.requests[seq[i / 2]];
    if i % 2 == 0 {
        (r.origin, std::slice::from_ref(&r.pickup_window))
    } else {
        (r.destination, &r.delivery_windows)
    }
}

/// The vehicle appears at the first pickup at its window start with a zero
/// counter.
fn initial_front(instance: &Instance, first: usize, cal: &Calendar) -> Result<Front, InfeasibleReason> {
    let r = &instance.requests[first];
    let s = earliest_service(r.pickup_window.start, std::slice::from_ref(&r.pickup_window), &instance.regs, cal)?;
    Ok(vec![FrontLabel {
        service_start: s,
        counter: 0,
        parent: 0,
    }])
}

/// Extends every label of `prev` across a leg of `drive` minutes into a node
/// with `windows`, keeping the non-dominated results.
fn extend_front(
    prev: &[FrontLabel],
    drive: Minutes,
    windows: &[TimeWindow],
    regs: &RegParams,
    cal: &Calendar,
) -> Result<Front, InfeasibleReason> {
    let mut out: Vec<FrontLabel> = Vec::with_capacity(prev.len() * 2);
    let mut first_err = None;
    for (pi, l) in prev.iter().enumerate() {
        let mut driver = Driver::new(l.service_start + regs.sigma, l.counter, regs, cal);
        if let Err(e) = driver.drive(drive) {
            first_err.get_or_insert(e);
            continue;
        }
        let arrival = driver.t;
        let counter = driver.counter;
        match earliest_service(arrival, windows, regs, cal) {
            Ok(s) => {
                let c = if s - arrival >= regs.tau_b { 0 } else { counter };
                out.push(FrontLabel {
                    service_start: s,
                    counter: c,
                    parent: pi as u32,
                });
                if c > 0 {
                    if let Ok(s2) = earliest_service(arrival + regs.tau_b, windows, regs, cal) {
                        out.push(FrontLabel {
                            service_start: s2,
                            counter: 0,
                            parent: pi as u32,
                        });
                    }
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if out.is_empty() {
        return Err(first_err.unwrap_or(InfeasibleReason::NoWindow));
    }
    Ok(pareto(out))
}

fn pareto(mut labels: Vec<FrontLabel>) -> Front {
    labels.sort_by_key(|l| (l.service_start, l.counter, l.parent));
    let mut out = Vec::with_capacity(labels.len());
    let mut best_counter = Minutes::MAX;
    for l in labels {
        if l.counter < best_counter {
            best_counter = l.counter;
            out.push(l);
        }
    }
    out
}

fn leg_minutes(instance: &Instance, seq: &[usize], into: usize) -> Minutes {
    let (from, _) = node(instance, seq, into - 1);
    let (to, _) = node(instance, seq, into);
    instance.time(from, to)
}

/// Pareto label sets for every node of `seq`.
pub(crate) fn sequence_fronts(instance: &Instance, seq: &[usize]) -> Result<Vec<Front>, Infeasible> {
    let cal = instance.calendar();
    let n = seq.len() * 2;
    let mut fronts: Vec<Front> = Vec::with_capacity(n);
    if seq.is_empty() {
        return Ok(fronts);
    }
    let first = initial_front(instance, seq[0], &cal).map_err(|reason| Infeasible { node: 0, reason })?;
    fronts.push(first);
    for i in 1..n {
        let (_, windows) = node(instance, seq, i);
        let drive = leg_minutes(instance, seq, i);
        let next = extend_front(&fronts[i - 1], drive, windows, &instance.regs, &cal)
            .map_err(|reason| Infeasible { node: i, reason })?;
        fronts.push(next);
    }
    Ok(fronts)
}

/// Rebuilds the full timeline along the earliest-finishing label chain.
pub(crate) fn schedule_from_fronts(instance: &Instance, seq: &[usize], fronts: &[Front]) -> Schedule {
    let n = fronts.len();
    if n == 0 {
        return Schedule {
            nodes: Vec::new(),
            segments: Vec::new(),
        };
    }
    // Walk parents back from the best final label.
    let mut chain = vec![fronts[n - 1][0]; n];
    for i in (0..n - 1).rev() {
        chain[i] = fronts[i][chain[i + 1].parent as usize];
    }
    let regs = &instance.regs;
    let cal = instance.calendar();
    let mut segments = Vec::new();
    let mut nodes = Vec::with_capacity(n);

    let start = instance.requests[seq[0]].pickup_window.start;
    let s0 = chain[0].service_start;
    if s0 > start {
        segments.push(Segment {
            kind: SegmentKind::Wait,
            start,
            end: s0,
        });
    }
    segments.push(Segment {
        kind: SegmentKind::Service,
        start: s0,
        end: s0 + regs.sigma,
    });
    nodes.push(NodeTimes {
        arrival: start,
        service_start: s0,
        departure: s0 + regs.sigma,
    });
    for i in 1..n {
        let prev = chain[i - 1];
        let depart = prev.service_start + regs.sigma;
        let mut driver = Driver::new(depart, prev.counter, regs, &cal);
        driver.log = Some(&mut segments);
        driver
            .drive(leg_minutes(instance, seq, i))
            .expect("leg was feasible when the label set was built");
        let arrival = driver.t;
        let s = chain[i].service_start;
        driver.idle_until(s, SegmentKind::Wait);
        segments.push(Segment {
            kind: SegmentKind::Service,
            start: s,
            end: s + regs.sigma,
        });
        nodes.push(NodeTimes {
            arrival,
            service_start: s,
            departure: s + regs.sigma,
        });
    }
    Schedule { nodes, segments }
}

/// Earliest-finishing schedule of a request sequence (instance indices).
pub fn simulate_trip(instance: &Instance, seq: &[usize]) -> Result<Schedule, Infeasible> {
    let fronts = sequence_fronts(instance, seq)?;
    Ok(schedule_from_fronts(instance, seq, &fronts))
}

/// Label sets of `trip` with `request` spliced in at `position`, reusing the
/// trip's cached sets for the untouched prefix.
fn spliced_fronts(
    instance: &Instance,
    trip_seq: &[usize],
    trip_fronts: &[Front],
    request: usize,
    position: usize,
    keep: bool,
) -> Result<Vec<Front>, Infeasible> {
    let mut seq = Vec::with_capacity(trip_seq.len() + 1);
    seq.extend_from_slice(&trip_seq[..position]);
    seq.push(request);
    seq.extend_from_slice(&trip_seq[position..]);
    let cal = instance.calendar();
    let n = seq.len() * 2;
    let prefix = 2 * position;
    let mut fronts: Vec<Front> = Vec::with_capacity(if keep { n } else { 2 });
    let mut last: Front;
    if prefix == 0 {
        last = initial_front(instance, seq[0], &cal).map_err(|reason| Infeasible { node: 0, reason })?;
    } else {
        if keep {
            fronts.extend(trip_fronts[..prefix].iter().cloned());
        }
        last = trip_fronts[prefix - 1].clone();
    }
    let from = if prefix == 0 {
        if keep {
            fronts.push(last.clone());
        }
        1
    } else {
        prefix
    };
    for i in from..n {
        let (_, windows) = node(instance, &seq, i);
        let drive = leg_minutes(instance, &seq, i);
        let next = extend_front(&last, drive, windows, &instance.regs, &cal)
            .map_err(|reason| Infeasible { node: i, reason })?;
        if keep {
            fronts.push(next.clone());
        }
        last = next;
    }
    if !keep {
        fronts.push(last);
    }
    Ok(fronts)
}

/// Whether `request` can be inserted before position `position` of `trip`.
pub(crate) fn insertion_feasible(instance: &Instance, trip: &crate::model::Trip, request: usize, position: usize) -> bool {
    spliced_fronts(instance, trip.requests(), trip.fronts(), request, position, false).is_ok()
}

/// Schedule of `trip` with `request` inserted at `position`; identical to
/// [`simulate_trip`] on the spliced sequence.
pub fn check_insertion(
    instance: &Instance,
    trip: &crate::model::Trip,
    request: usize,
    position: usize,
) -> Result<Schedule, Infeasible> {
    assert!(position <= trip.len(), "insertion position out of range");
    let fronts = spliced_fronts(instance, trip.requests(), trip.fronts(), request, position, true)?;
    let mut seq = trip.requests().to_vec();
    seq.insert(position, request);
    Ok(schedule_from_fronts(instance, &seq, &fronts))
}

/// Schedule rows for debugging: one line per node.
pub fn schedule_csv(instance: &Instance, seq: &[usize], schedule: &Schedule) -> String {
    let mut out = String::from("node,request,kind,arrival,service_start,departure,segments\n");
    let mut seg_iter = schedule.segments.iter().peekable();
    for (i, n) in schedule.nodes.iter().enumerate() {
        let mut parts = Vec::new();
        while let Some(seg) = seg_iter.peek() {
            if seg.start >= n.departure {
                break;
            }
            let tag = match seg.kind {
                SegmentKind::Drive => "D",
                SegmentKind::Break => "B",
                SegmentKind::Wait => "W",
                SegmentKind::Service => "S",
            };
            parts.push(format!("{tag}:{}-{}", seg.start, seg.end));
            seg_iter.next();
        }
        let kind = if i % 2 == 0 { "pickup" } else { "delivery" };
        out.push_str(&format!(
            "{i},{},{kind},{},{},{},{}\n",
            instance.requests[seq[i / 2]].id,
            n.arrival,
            n.service_start,
            n.departure,
            parts.join(" ")
        ));
    }
    out
}
