//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Verdicts are reported, not asserted, so that the rest of the suite stays
//! green when a criterion cannot be met; set `FTL_ACCEPTANCE_STRICT=1` to
//! exit with a failure status instead. Benchmark files are looked up in
//! `FTL_GH_DIR` or `tests/data/gh`.

mod common;

use std::time::Instant;

use common::*;
use ftl_core::engine::{run, AlnsConfig};
use ftl_core::instances::{instance_to_json, parse_gh, transform, TransformConfig};
use ftl_core::model::{Money, RegParams};
use ftl_core::oracle::brute_force;
use ftl_core::scenarios::{compare, Comparison};
use ftl_core::schedule::{simulate_trip, SegmentKind};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn parameters() -> Verdict {
    let r = RegParams::default();
    let c = AlnsConfig::default();
    let regs = (r.tau_n, r.tau_b, r.tau_s, r.sigma, r.nu) == (450, 990, 1320, 120, 70.0);
    let search = (c.max_iterations, c.psi, c.xi, c.segment_length) == (25_000, 100, 0.35, 200);
    verdict(
        regs && search,
        format!(
            "tau_n={} tau_b={} tau_s={} sigma={} nu={} m={} psi={} xi={} n={}",
            r.tau_n, r.tau_b, r.tau_s, r.sigma, r.nu, c.max_iterations, c.psi, c.xi, c.segment_length
        ),
    )
}

fn search_vs_oracle() -> Verdict {
    let started = Instant::now();
    let mut exact = 0;
    let mut within = 0;
    let mut below = Vec::new();
    let mut worst = 0.0f64;
    let (mut exact_mu0, mut n_mu0, mut exact_mu, mut n_mu) = (0, 0, 0, 0);
    for i in 0..100u64 {
        let inst = micro(1000 + i);
        let opt = brute_force(&inst).expect("micro-instances are small").total();
        let cfg = AlnsConfig {
            max_iterations: 2000,
            seed: i,
            ..AlnsConfig::default()
        };
        let best = run(&inst, &cfg).expect("valid config").0.total();
        if best < opt {
            below.push(i);
        }
        let gap = if opt > Money::ZERO {
            (best - opt).as_f64() / opt.as_f64()
        } else {
            0.0
        };
        worst = worst.max(gap);
        let hit = best == opt;
        exact += usize::from(hit);
        within += usize::from(gap <= 0.02);
        if inst.mu.tenths() == 0 {
            n_mu0 += 1;
            exact_mu0 += usize::from(hit);
        } else {
            n_mu += 1;
            exact_mu += usize::from(hit);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        exact >= 95 && within == 100 && secs < 60.0 && below.is_empty(),
        format!(
            "optimal {exact}/100 (mu = 0: {exact_mu0}/{n_mu0}, mu > 0: {exact_mu}/{n_mu}), within 2% {within}/100, \
             worst gap {:.1}%, below optimum {below:?}, {secs:.1} s",
            100.0 * worst
        ),
    )
}

fn scheduling_vs_oracle() -> Verdict {
    let mut failures = Vec::new();
    let (mut feasible, mut with_break, mut over_sunday) = (0, 0, 0);
    for seed in 0..500u64 {
        if let Err(e) = check_trip_schedule(seed) {
            failures.push(e);
        }
        if let Err(e) = check_leg(seed) {
            failures.push(e);
        }
        let (inst, seq) = grid_trip(seed);
        if let Ok(s) = simulate_trip(&inst, &seq) {
            feasible += 1;
            with_break += usize::from(s.segments.iter().any(|g| g.kind == SegmentKind::Break));
            let cal = inst.calendar();
            over_sunday += usize::from(!cal.blackouts_between(s.start(), s.end(), inst.regs.tau_s).is_empty());
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "500 trips ({feasible} feasible, {with_break} with a shift break, {over_sunday} spanning a Sunday) \
             and 500 legs, {} violations{}",
            failures.len(),
            failures.first().map(|e| format!(": {e}")).unwrap_or_default()
        ),
    )
}

fn lp_soundness() -> Verdict {
    let mut failures = Vec::new();
    let mut with_trips = 0;
    for i in 0..200u64 {
        let inst = micro(5000 + i);
        let sol = random_solution(&inst, &mut rng(i));
        with_trips += usize::from(!sol.trips.is_empty());
        if let Err(e) = check_lp(&inst, &sol) {
            failures.push(format!("instance {i}: {e}"));
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "200 solutions ({with_trips} using vehicles), {} with violations or objective off by more than 0.01{}",
            failures.len(),
            failures.first().map(|e| format!(": {e}")).unwrap_or_default()
        ),
    )
}

const BENCHMARKS: [&str; 3] = ["C1_2_1", "R1_2_1", "RC1_2_1"];

fn load_benchmark(name: &str) -> Option<ftl_core::Instance> {
    let path = find_gh(name)?;
    let text = std::fs::read_to_string(path).ok()?;
    transform(&parse_gh(&text).ok()?, &TransformConfig::default()).ok()
}

fn missing_benchmarks() -> Vec<&'static str> {
    BENCHMARKS.iter().copied().filter(|n| find_gh(n).is_none()).collect()
}

fn savings(c: &Comparison) -> f64 {
    let sm = c.all_sm.result.total_cost.as_f64();
    if sm > 0.0 {
        100.0 * (sm - c.mixed.result.total_cost.as_f64()) / sm
    } else {
        0.0
    }
}

fn desk_scale() -> Verdict {
    let missing = missing_benchmarks();
    if !missing.is_empty() {
        return verdict(
            false,
            format!("benchmark files {missing:?} not found in {}", gh_dir().display()),
        );
    }
    let mut pass = true;
    let mut notes = Vec::new();
    for name in BENCHMARKS {
        let Some(inst) = load_benchmark(name) else {
            return verdict(false, format!("{name} could not be read or transformed"));
        };
        for seed in 0..3u64 {
            let cfg = AlnsConfig {
                seed,
                ..AlnsConfig::default()
            };
            let started = Instant::now();
            let c = compare(&inst, &cfg).expect("default config is valid");
            let secs = started.elapsed().as_secs_f64();
            let (sm, fct, mixed) = (
                c.all_sm.result.total_cost,
                c.all_fct.result.total_cost,
                c.mixed.result.total_cost,
            );
            let s = savings(&c);
            let mut bad = Vec::new();
            if mixed > sm {
                bad.push("mixed > all-SM");
            }
            if name == "C1_2_1" && !(0.0..=2.0).contains(&s) {
                bad.push("savings outside [0%, 2%]");
            }
            if secs > 600.0 {
                bad.push("over 10 min");
            }
            if sm > fct {
                notes.push(format!("{name}/{seed}: all-SM {sm} above all-FCT {fct} (reported)"));
            }
            pass &= bad.is_empty();
            notes.push(format!(
                "{name}/{seed}: savings {s:.2}%, own {:.1}%, {secs:.0} s{}",
                c.mixed.result.pct_own,
                if bad.is_empty() { String::new() } else { format!(" {bad:?}") }
            ));
        }
    }
    verdict(pass, notes.join("; "))
}

fn results_without_cpu(c: &Comparison) -> String {
    c.results_csv()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

fn reproducible(inst: &ftl_core::Instance, cfg: &AlnsConfig) -> bool {
    let a = compare(inst, cfg).expect("valid config");
    let b = compare(inst, cfg).expect("valid config");
    results_without_cpu(&a) == results_without_cpu(&b) && a.table_csv(&inst.name) == b.table_csv(&inst.name)
}

fn determinism() -> Verdict {
    match load_benchmark("C1_2_1") {
        Some(inst) => {
            let same = reproducible(&inst, &AlnsConfig::default());
            verdict(same, format!("C1_2_1 reports {}", if same { "identical" } else { "differ" }))
        }
        None => {
            let inst = synthetic_instance(1, true, 100);
            let cfg = AlnsConfig {
                max_iterations: 2000,
                ..AlnsConfig::default()
            };
            let same = reproducible(&inst, &cfg);
            verdict(
                false,
                format!(
                    "C1_2_1 not found in {}; a clustered synthetic 100-request instance at m = 2000 gives {} reports",
                    gh_dir().display(),
                    if same { "identical" } else { "differing" }
                ),
            )
        }
    }
}

fn golden() -> Verdict {
    let text = std::fs::read_to_string(data("golden/tiny5.txt")).expect("fixture present");
    let inst = transform(&parse_gh(&text).expect("fixture parses"), &TransformConfig::default()).expect("transforms");
    let expected = std::fs::read_to_string(data("golden/tiny5.json")).expect("golden file present");
    let same = instance_to_json(&inst) == expected;
    verdict(same, if same { "byte-identical" } else { "output differs from tiny5.json" })
}

fn properties() -> Verdict {
    type Suite = (&'static str, u64, fn(u64) -> Check);
    let suites: [Suite; 8] = [
        ("schedule rules", 300, check_trip_schedule),
        ("legs", 300, check_leg),
        ("insertion check", 100, check_insertion_consistency),
        ("repair closure and removal bounds", 300, check_destroy_repair),
        ("arc filter", 50, check_arc_filter),
        ("weights, best-cost monotonicity, oracle bound", 40, |s| check_search(s, 300)),
        ("mixed <= all-SM", 40, |s| check_mixed_vs_all_sm(s, 300)),
        ("LP soundness", 100, |s| check_lp(&micro(s), &random_solution(&micro(s), &mut rng(s)))),
    ];
    let mut failed = Vec::new();
    let mut cases = 0;
    for (name, n, check) in suites {
        for seed in 0..n {
            cases += 1;
            if let Err(e) = check(seed + 10_000) {
                failed.push(format!("{name}: {e}"));
                break;
            }
        }
    }
    verdict(
        failed.is_empty(),
        format!("{cases} cases over {} suites{}", suites.len(), if failed.is_empty() { String::new() } else { format!(", failing: {failed:?}") }),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("parameter defaults", parameters),
        ("search vs exact optimum", search_vs_oracle),
        ("schedules vs exhaustive search", scheduling_vs_oracle),
        ("LP assignment soundness", lp_soundness),
        ("benchmark desk scale", desk_scale),
        ("report determinism", determinism),
        ("transformation golden file", golden),
        ("property suites", properties),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = f();
        failed += usize::from(!v.pass);
        println!(
            "criterion {}: {} {name} ({:.1} s) - {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var_os("FTL_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
