//! Arc graph of the routing model with minimum driving distance, its
//! CPLEX-LP export, and a checker that maps solutions onto the model.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::model::{Distance, Instance, Minutes, Money, Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    /// Artificial start of every tour.
    Start,
    /// Artificial end of every tour.
    End,
    /// Origin of request (index).
    Origin(usize),
    /// Destination of request (index).
    Destination(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    Start,
    Serve,
    Deadhead,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphArc {
    pub from: Node,
    pub to: Node,
    pub kind: ArcKind,
    pub distance: Distance,
    pub time: Minutes,
}

#[derive(Clone, Debug)]
pub struct ArcGraph {
    pub nodes: Vec<Node>,
    pub arcs: Vec<GraphArc>,
    index: HashMap<(Node, Node), usize>,
}

impl ArcGraph {
    pub fn arc(&self, from: Node, to: Node) -> Option<usize> {
        self.index.get(&(from, to)).copied()
    }

    /// Big-M of the distance linking constraints: the sum of all arc distances.
    pub fn big_m(&self) -> Distance {
        self.arcs.iter().map(|a| a.distance).sum()
    }
}

/// Whether the empty leg from the delivery of `r1` to the pickup of `r2` can
/// possibly be used: starting at the opening of `r1`'s pickup window, the
/// loaded leg, the empty leg and three (un)loadings must fit before `r2`'s
/// pickup window closes.
pub fn deadhead_allowed(instance: &Instance, r1: usize, r2: usize) -> bool {
    // Printed as `r_s + t(o1,d1) + t(d1,o2) + 3 sigma <= r2^e`; `r_s` is read
    // as the pickup window start of r1.
    let a = &instance.requests[r1];
    let b = &instance.requests[r2];
    r1 != r2
        && a.pickup_window.start
            + instance.time(a.origin, a.destination)
            + instance.time(a.destination, b.origin)
            + 3 * instance.regs.sigma
            <= b.pickup_window.end
}

pub fn build_arc_graph(instance: &Instance) -> ArcGraph {
    let n = instance.requests.len();
    let mut nodes = vec![Node::Start, Node::End];
    for r in 0..n {
        nodes.push(Node::Origin(r));
        nodes.push(Node::Destination(r));
    }
    let mut arcs = Vec::new();
    for r in 0..n {
        arcs.push(GraphArc {
            from: Node::Start,
            to: Node::Origin(r),
            kind: ArcKind::Start,
            distance: Distance::ZERO,
            time: 0,
        });
    }
    for r in 0..n {
        let req = &instance.requests[r];
        arcs.push(GraphArc {
            from: Node::Origin(r),
            to: Node::Destination(r),
            kind: ArcKind::Serve,
            distance: instance.direct(r),
            time: instance.time(req.origin, req.destination),
        });
    }
    for r1 in 0..n {
        for r2 in 0..n {
            if deadhead_allowed(instance, r1, r2) {
                let (from, to) = (instance.requests[r1].destination, instance.requests[r2].origin);
                arcs.push(GraphArc {
                    from: Node::Destination(r1),
                    to: Node::Origin(r2),
                    kind: ArcKind::Deadhead,
                    distance: instance.dist(from, to),
                    time: instance.time(from, to),
                });
            }
        }
    }
    for r in 0..n {
        arcs.push(GraphArc {
            from: Node::Destination(r),
            to: Node::End,
            kind: ArcKind::End,
            distance: Distance::ZERO,
            time: 0,
        });
    }
    let index = arcs.iter().enumerate().map(|(i, a)| ((a.from, a.to), i)).collect();
    ArcGraph { nodes, arcs, index }
}

fn node_name(instance: &Instance, n: Node) -> String {
    match n {
        Node::Start => "n0".into(),
        Node::End => "ninf".into(),
        Node::Origin(r) => format!("o{}", instance.requests[r].id),
        Node::Destination(r) => format!("d{}", instance.requests[r].id),
    }
}

fn var(instance: &Instance, prefix: char, a: &GraphArc) -> String {
    format!("{prefix}_{}_{}", node_name(instance, a.from), node_name(instance, a.to))
}

/// Writes `terms` as a linear expression, several terms per line.
fn expr(terms: &[(String, String)]) -> String {
    let mut out = String::new();
    for (i, (coef, v)) in terms.iter().enumerate() {
        if i > 0 && i % 6 == 0 {
            out.push_str("\n   ");
        }
        let (sign, mag) = match coef.strip_prefix('-') {
            Some(m) => ("-", m),
            None => ("+", coef.as_str()),
        };
        if i == 0 && sign == "+" {
            write!(out, " {mag} {v}").unwrap();
        } else {
            write!(out, " {sign} {mag} {v}").unwrap();
        }
    }
    if terms.is_empty() {
        out.push_str(" 0");
    }
    out
}

/// The routing model (without timing constraints) in CPLEX-LP format.
pub fn lp_string(graph: &ArcGraph, instance: &Instance) -> String {
    let kappa = instance.cost.kappa;
    let mut out = String::new();
    out.push_str("\\ Full-truck-load routing with outsourcing and minimum driving distance per vehicle.\n");
    out.push_str("\\ Time windows and driving-time rules are not part of this model; they are\n");
    out.push_str("\\ enforced by the schedule simulator.\n");
    out.push_str("\\ x_<src>_<dst>: arc used; y_<src>_<dst>: distance driven up to and including the arc.\n");

    let mut obj: Vec<(String, String)> = Vec::new();
    for a in &graph.arcs {
        let mut c = kappa.cost(a.distance);
        if let (ArcKind::Serve, Node::Origin(r)) = (a.kind, a.from) {
            c -= instance.requests[r].sm_price;
        }
        if c != Money::ZERO {
            obj.push((c.to_string(), var(instance, 'x', a)));
        }
    }
    let constant: Money = instance.requests.iter().map(|r| r.sm_price).sum();
    out.push_str("Minimize\n obj:");
    out.push_str(&expr(&obj));
    writeln!(out, " + {constant}").unwrap();

    out.push_str("Subject To\n");
    let arcs_into = |n: Node| graph.arcs.iter().filter(move |a| a.to == n);
    let arcs_out = |n: Node| graph.arcs.iter().filter(move |a| a.from == n);
    for r in 0..instance.requests.len() {
        let serve = &graph.arcs[graph.arc(Node::Origin(r), Node::Destination(r)).expect("serve arc")];
        let id = instance.requests[r].id;
        let mut t: Vec<(String, String)> = arcs_into(Node::Origin(r)).map(|a| ("1".into(), var(instance, 'x', a))).collect();
        t.push(("-1".into(), var(instance, 'x', serve)));
        writeln!(out, " kirchhoff1_{id}:{} = 0", expr(&t)).unwrap();
        let mut t: Vec<(String, String)> =
            arcs_out(Node::Destination(r)).map(|a| ("1".into(), var(instance, 'x', a))).collect();
        t.push(("-1".into(), var(instance, 'x', serve)));
        writeln!(out, " kirchhoff2_{id}:{} = 0", expr(&t)).unwrap();
    }
    for &n in graph.nodes.iter().filter(|n| !matches!(n, Node::Start | Node::End)) {
        let mut t: Vec<(String, String)> = Vec::new();
        for a in arcs_out(n) {
            t.push(("1".into(), var(instance, 'y', a)));
            if a.distance != Distance::ZERO {
                t.push((format!("-{}", a.distance), var(instance, 'x', a)));
            }
        }
        for a in arcs_into(n) {
            t.push(("-1".into(), var(instance, 'y', a)));
        }
        writeln!(out, " drivupdate_{}:{} = 0", node_name(instance, n), expr(&t)).unwrap();
    }
    for a in arcs_out(Node::Start) {
        writeln!(out, " n0_{}: {} = 0", node_name(instance, a.to), var(instance, 'y', a)).unwrap();
    }
    let m = graph.big_m();
    for a in &graph.arcs {
        writeln!(
            out,
            " bigm_{}_{}: {} - {m} {} <= 0",
            node_name(instance, a.from),
            node_name(instance, a.to),
            var(instance, 'y', a),
            var(instance, 'x', a)
        )
        .unwrap();
    }
    for a in arcs_into(Node::End) {
        writeln!(
            out,
            " mindriving_{}: {} - {} {} >= 0",
            node_name(instance, a.from),
            var(instance, 'y', a),
            instance.mu,
            var(instance, 'x', a)
        )
        .unwrap();
    }
    out.push_str("Bounds\n");
    for a in &graph.arcs {
        writeln!(out, " {} >= 0", var(instance, 'y', a)).unwrap();
    }
    out.push_str("Binary\n");
    for a in &graph.arcs {
        writeln!(out, " {}", var(instance, 'x', a)).unwrap();
    }
    out.push_str("End\n");
    out
}

pub fn emit_lp(graph: &ArcGraph, instance: &Instance, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, lp_string(graph, instance))
}

/// GraphArc values induced by a solution: `x` marks used arcs, `y` the distance
/// driven from the tour start up to and including the arc.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpAssignment {
    pub x: Vec<bool>,
    pub y: Vec<Distance>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpViolation {
    pub constraint: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpCheck {
    pub assignment: LpAssignment,
    pub objective: Money,
    pub violations: Vec<LpViolation>,
}

/// Maps `solution` onto the arc variables and evaluates every model
/// constraint on the result.
pub fn check_lp_assignment(graph: &ArcGraph, instance: &Instance, solution: &Solution) -> LpCheck {
    let mut violations = Vec::new();
    let mut x = vec![false; graph.arcs.len()];
    let mut y = vec![Distance::ZERO; graph.arcs.len()];
    for (ti, trip) in solution.trips.iter().enumerate() {
        let mut path = vec![Node::Start];
        for &r in trip.requests() {
            path.push(Node::Origin(r));
            path.push(Node::Destination(r));
        }
        path.push(Node::End);
        let mut driven = Distance::ZERO;
        for w in path.windows(2) {
            match graph.arc(w[0], w[1]) {
                Some(a) => {
                    driven += graph.arcs[a].distance;
                    if x[a] {
                        violations.push(LpViolation {
                            constraint: "vars".into(),
                            detail: format!("arc {} used twice", var(instance, 'x', &graph.arcs[a])),
                        });
                    }
                    x[a] = true;
                    y[a] = driven;
                }
                None => violations.push(LpViolation {
                    constraint: "arcs".into(),
                    detail: format!(
                        "trip {ti} uses {} -> {}, which is not in the graph",
                        node_name(instance, w[0]),
                        node_name(instance, w[1])
                    ),
                }),
            }
        }
    }

    let kappa = instance.cost.kappa;
    let mut objective: Money = instance.requests.iter().map(|r| r.sm_price).sum();
    for (i, a) in graph.arcs.iter().enumerate() {
        if x[i] {
            objective += kappa.cost(a.distance);
            if let (ArcKind::Serve, Node::Origin(r)) = (a.kind, a.from) {
                objective -= instance.requests[r].sm_price;
            }
        }
    }

    let serve = |r: usize| graph.arc(Node::Origin(r), Node::Destination(r)).expect("serve arc");
    let flow = |pred: &dyn Fn(&GraphArc) -> bool| -> i64 {
        graph
            .arcs
            .iter()
            .enumerate()
            .filter(|(i, a)| x[*i] && pred(a))
            .count() as i64
    };
    for r in 0..instance.requests.len() {
        let id = instance.requests[r].id;
        let s = i64::from(x[serve(r)]);
        let inflow = flow(&|a| a.to == Node::Origin(r));
        if inflow != s {
            violations.push(LpViolation {
                constraint: format!("kirchhoff1_{id}"),
                detail: format!("inflow {inflow}, serve {s}"),
            });
        }
        let outflow = flow(&|a| a.from == Node::Destination(r));
        if outflow != s {
            violations.push(LpViolation {
                constraint: format!("kirchhoff2_{id}"),
                detail: format!("outflow {outflow}, serve {s}"),
            });
        }
    }
    for &n in graph.nodes.iter().filter(|n| !matches!(n, Node::Start | Node::End)) {
        let mut lhs = 0i64;
        let mut rhs = 0i64;
        for (i, a) in graph.arcs.iter().enumerate() {
            if a.from == n {
                lhs += y[i].tenths();
                if x[i] {
                    rhs += a.distance.tenths();
                }
            }
            if a.to == n {
                rhs += y[i].tenths();
            }
        }
        if lhs != rhs {
            violations.push(LpViolation {
                constraint: format!("drivupdate_{}", node_name(instance, n)),
                detail: format!("outgoing y {lhs} != {rhs} (tenths of km)"),
            });
        }
    }
    let m = graph.big_m();
    for (i, a) in graph.arcs.iter().enumerate() {
        if a.from == Node::Start && y[i] != Distance::ZERO {
            violations.push(LpViolation {
                constraint: format!("n0_{}", node_name(instance, a.to)),
                detail: format!("y = {}", y[i]),
            });
        }
        let bound = if x[i] { m } else { Distance::ZERO };
        if y[i] > bound || y[i] < Distance::ZERO {
            violations.push(LpViolation {
                constraint: format!("bigm_{}_{}", node_name(instance, a.from), node_name(instance, a.to)),
                detail: format!("y = {}, bound {}", y[i], bound),
            });
        }
        if a.to == Node::End && x[i] && y[i] < instance.mu {
            violations.push(LpViolation {
                constraint: format!("mindriving_{}", node_name(instance, a.from)),
                detail: format!("tour distance {} < {}", y[i], instance.mu),
            });
        }
    }

    LpCheck {
        assignment: LpAssignment { x, y },
        objective,
        violations,
    }
}
