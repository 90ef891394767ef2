//! The three business scenarios and their key figures.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{self, AlnsConfig, ConfigError, RunReport};
use crate::model::{Distance, Instance, Money, Solution};
use crate::parallel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Every request goes to the spot market.
    #[serde(rename = "all-sm")]
    AllSm,
    /// Every request on own vehicles.
    #[serde(rename = "all-fct")]
    AllFct,
    /// Own vehicles or spot market, whichever is cheaper.
    #[serde(rename = "mixed")]
    Mixed,
}

impl Scenario {
    pub fn tag(self) -> &'static str {
        match self {
            Scenario::AllSm => "all-sm",
            Scenario::AllFct => "all-fct",
            Scenario::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-sm" => Ok(Scenario::AllSm),
            "all-fct" => Ok(Scenario::AllFct),
            "mixed" => Ok(Scenario::Mixed),
            _ => Err(format!("unknown scenario `{s}` (expected all-sm, all-fct or mixed)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub total_cost: Money,
    pub vehicle_cost: Money,
    pub outsourced_cost: Money,
    pub vehicles: usize,
    pub loaded_km: Distance,
    pub empty_km: Distance,
    /// Direct distance of the outsourced requests.
    pub outsourced_km: Distance,
    /// Share of requests served by own vehicles, in percent.
    pub pct_own: f64,
    pub min_km: Distance,
    pub avg_km: f64,
    pub max_km: Distance,
    pub cpu_s: f64,
    /// Requests the all-own-fleet run could not place on a vehicle.
    pub residual: usize,
}

impl ScenarioResult {
    /// Key figures of `solution`, with outsourcing valued at the instance's
    /// own prices.
    pub fn from_solution(instance: &Instance, scenario: Scenario, solution: &Solution, cpu_s: f64) -> Self {
        let driven: Vec<Distance> = solution.trips.iter().map(|t| t.distance()).collect();
        let loaded = solution.loaded();
        let empty = solution.empty();
        let vehicle_cost = instance.cost.kappa.cost(loaded + empty);
        let outsourced_cost: Money = solution.bank.iter().map(|&r| instance.requests[r].sm_price).sum();
        let outsourced_km: Distance = solution.bank.iter().map(|&r| instance.direct(r)).sum();
        let n = instance.requests.len();
        let pct_own = if n == 0 {
            0.0
        } else {
            100.0 * solution.planned_count() as f64 / n as f64
        };
        let avg_km = if driven.is_empty() {
            0.0
        } else {
            driven.iter().map(|d| d.km()).sum::<f64>() / driven.len() as f64
        };
        ScenarioResult {
            scenario,
            total_cost: vehicle_cost + outsourced_cost,
            vehicle_cost,
            outsourced_cost,
            vehicles: solution.trips.len(),
            loaded_km: loaded,
            empty_km: empty,
            outsourced_km,
            pct_own,
            min_km: driven.iter().copied().min().unwrap_or_default(),
            avg_km,
            max_km: driven.iter().copied().max().unwrap_or_default(),
            cpu_s,
            residual: 0,
        }
    }

    /// Extra empty distance relative to the loaded distance.
    pub fn additional_empty_ratio(&self) -> f64 {
        if self.loaded_km == Distance::ZERO {
            0.0
        } else {
            self.empty_km.tenths() as f64 / self.loaded_km.tenths() as f64
        }
    }
}

/// Result of one scenario together with the solution behind it.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub result: ScenarioResult,
    pub solution: Solution,
    pub report: Option<RunReport>,
}

/// Everything outsourced; no search.
pub fn scenario_all_sm(instance: &Instance) -> ScenarioRun {
    let solution = Solution::all_outsourced(instance);
    ScenarioRun {
        result: ScenarioResult::from_solution(instance, Scenario::AllSm, &solution, 0.0),
        solution,
        report: None,
    }
}

/// Outsourcing price used to force every request onto own vehicles: ten
/// times the cost of driving all requests' loaded distances.
pub fn all_fct_penalty(instance: &Instance) -> Money {
    let loaded: Distance = (0..instance.requests.len()).map(|r| instance.direct(r)).sum();
    instance.cost.kappa.cost(loaded) * 10
}

/// Own vehicles only. Requests the search still leaves unplanned are
/// reported in `residual` and valued at their real outsourcing price.
pub fn scenario_all_fct(instance: &Instance, config: &AlnsConfig) -> Result<ScenarioRun, ConfigError> {
    if instance.requests.is_empty() {
        let mut run = scenario_all_sm(instance);
        run.result.scenario = Scenario::AllFct;
        return Ok(run);
    }
    let forced = instance.with_uniform_sm_price(all_fct_penalty(instance));
    let started = Instant::now();
    let (best, report) = engine::run(&forced, config)?;
    let cpu_s = started.elapsed().as_secs_f64();
    let solution = Solution::new(instance, best.trips, best.bank);
    let mut result = ScenarioResult::from_solution(instance, Scenario::AllFct, &solution, cpu_s);
    result.residual = solution.bank.len();
    Ok(ScenarioRun {
        result,
        solution,
        report: Some(report),
    })
}

/// Own vehicles and spot market at their real prices.
pub fn scenario_mixed(instance: &Instance, config: &AlnsConfig) -> Result<ScenarioRun, ConfigError> {
    let started = Instant::now();
    let (solution, report) = engine::run(instance, config)?;
    let cpu_s = started.elapsed().as_secs_f64();
    Ok(ScenarioRun {
        result: ScenarioResult::from_solution(instance, Scenario::Mixed, &solution, cpu_s),
        solution,
        report: Some(report),
    })
}

/// Runs one scenario; the search uses `config` unchanged.
pub fn run_scenario(instance: &Instance, scenario: Scenario, config: &AlnsConfig) -> Result<ScenarioRun, ConfigError> {
    match scenario {
        Scenario::AllSm => Ok(scenario_all_sm(instance)),
        Scenario::AllFct => scenario_all_fct(instance, config),
        Scenario::Mixed => scenario_mixed(instance, config),
    }
}

pub const RESULT_HEADER: [&str; 13] = [
    "scenario",
    "total_cost",
    "vehicle_cost",
    "outsourced_cost",
    "vehicles",
    "loaded_km",
    "empty_km",
    "outsourced_km",
    "pct_own",
    "min_km",
    "avg_km",
    "max_km",
    "cpu_s",
];

fn result_record(r: &ScenarioResult) -> Vec<String> {
    vec![
        r.scenario.to_string(),
        r.total_cost.to_string(),
        r.vehicle_cost.to_string(),
        r.outsourced_cost.to_string(),
        r.vehicles.to_string(),
        r.loaded_km.to_string(),
        r.empty_km.to_string(),
        r.outsourced_km.to_string(),
        format!("{:.2}", r.pct_own),
        r.min_km.to_string(),
        format!("{:.1}", r.avg_km),
        r.max_km.to_string(),
        format!("{:.3}", r.cpu_s),
    ]
}

/// One CSV row per scenario.
pub fn results_csv(results: &[ScenarioResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULT_HEADER).expect("in-memory write");
    for r in results {
        w.write_record(result_record(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub all_sm: ScenarioRun,
    pub all_fct: ScenarioRun,
    pub mixed: ScenarioRun,
}

impl Comparison {
    pub fn results(&self) -> [&ScenarioResult; 3] {
        [&self.all_sm.result, &self.all_fct.result, &self.mixed.result]
    }

    pub fn results_csv(&self) -> String {
        results_csv(&self.results().map(|r| r.clone()))
    }

    /// Single-row layout: outsourcing nothing, everything, and the mix split
    /// into its own-vehicle and outsourced parts.
    pub fn table_csv(&self, instance_name: &str) -> String {
        let nothing = &self.all_fct.result;
        let everything = &self.all_sm.result;
        let mixed = &self.mixed.result;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "instance",
            "nothing_km",
            "nothing_cost",
            "everything_km",
            "everything_cost",
            "mixed_pct_req",
            "mixed_loaded_km",
            "mixed_empty_km",
            "mixed_own_cost",
            "mixed_outsourced_km",
            "mixed_outsourced_cost",
            "mixed_total_cost",
        ])
        .expect("in-memory write");
        w.write_record([
            instance_name.to_string(),
            (nothing.loaded_km + nothing.empty_km).to_string(),
            nothing.total_cost.to_string(),
            everything.outsourced_km.to_string(),
            everything.total_cost.to_string(),
            format!("{:.2}", mixed.pct_own),
            mixed.loaded_km.to_string(),
            mixed.empty_km.to_string(),
            mixed.vehicle_cost.to_string(),
            mixed.outsourced_km.to_string(),
            mixed.outsourced_cost.to_string(),
            mixed.total_cost.to_string(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn summary_json(&self, instance_name: &str) -> String {
        let savings = if self.all_sm.result.total_cost > Money::ZERO {
            100.0 * (self.all_sm.result.total_cost - self.mixed.result.total_cost).as_f64()
                / self.all_sm.result.total_cost.as_f64()
        } else {
            0.0
        };
        let value = serde_json::json!({
            "instance": instance_name,
            "results": self.results(),
            "mixed_savings_pct": savings,
            "all_fct_residual": self.all_fct.result.residual,
            "mixed_not_worse_than_all_sm": self.mixed.result.total_cost <= self.all_sm.result.total_cost,
            "all_sm_not_worse_than_all_fct": self.all_sm.result.total_cost <= self.all_fct.result.total_cost,
        });
        serde_json::to_string_pretty(&value).expect("summary serializes")
    }

    /// Writes `results.csv`, `table.csv` and `summary.json` into `dir`.
    pub fn write(&self, instance_name: &str, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.results_csv())?;
        std::fs::write(dir.join("table.csv"), self.table_csv(instance_name))?;
        std::fs::write(dir.join("summary.json"), self.summary_json(instance_name) + "\n")
    }
}

/// Runs all three scenarios. The searches use seeds `seed + 1` (all own
/// fleet) and `seed + 2` (mixed) and may run concurrently.
pub fn compare(instance: &Instance, config: &AlnsConfig) -> Result<Comparison, ConfigError> {
    let all_sm = scenario_all_sm(instance);
    let mut runs = parallel::map_indexed(2, 2, |i| {
        let mut cfg = config.clone();
        cfg.seed = config.seed.wrapping_add(1 + i as u64);
        if i == 0 {
            scenario_all_fct(instance, &cfg)
        } else {
            scenario_mixed(instance, &cfg)
        }
    })
    .into_iter();
    let all_fct = runs.next().expect("two runs")?;
    let mixed = runs.next().expect("two runs")?;
    Ok(Comparison { all_sm, all_fct, mixed })
}

/// Every trip's schedule as CSV, one block per trip.
pub fn dump_schedules(instance: &Instance, solution: &Solution) -> String {
    let mut out = String::new();
    for (i, trip) in solution.trips.iter().enumerate() {
        out.push_str(&format!("# trip {i}\n"));
        out.push_str(&crate::schedule::schedule_csv(instance, trip.requests(), trip.schedule()));
    }
    out
}
