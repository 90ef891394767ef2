//! Adaptive large neighbourhood search with simulated-annealing acceptance.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CostBreakdown, Instance, Money, Solution};
use crate::operators::{
    self, build_initial, removal_count, repair, Destroyed, InsertionCache, InsertionConfig, InsertionOperator,
    RemovalOperator,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scores {
    /// New overall best.
    pub best: f64,
    /// Better than the current solution.
    pub improve: f64,
    /// Worse than the current solution but accepted.
    pub accept: f64,
}

impl Default for Scores {
    fn default() -> Self {
        Scores {
            best: 33.0,
            improve: 9.0,
            accept: 13.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlnsConfig {
    pub max_iterations: usize,
    /// Iterations between weight updates.
    pub segment_length: usize,
    /// Absolute cap on removed requests.
    pub psi: usize,
    /// Relative cap on removed requests.
    pub xi: f64,
    pub scores: Scores,
    /// Weight reaction factor.
    pub reaction: f64,
    /// Cost gap, relative to the initial cost, that calibrates the start temperature.
    pub sa_start_gap: f64,
    /// Start-time acceptance probability of a solution `sa_start_gap` worse.
    pub sa_start_acceptance: f64,
    /// Final temperature as a fraction of the start temperature.
    pub sa_end_fraction: f64,
    pub seed: u64,
    pub removal_operators: Vec<RemovalOperator>,
    pub insertion_operators: Vec<InsertionOperator>,
    /// Randomization exponent of Shaw removal.
    pub shaw_exponent: f64,
    pub regret_literal: bool,
    /// Optional wall-clock limit in seconds, checked between iterations.
    pub time_limit_s: Option<f64>,
}

impl Default for AlnsConfig {
    fn default() -> Self {
        AlnsConfig {
            max_iterations: 25_000,
            segment_length: 200,
            psi: 100,
            xi: 0.35,
            scores: Scores::default(),
            reaction: 0.1,
            sa_start_gap: 0.05,
            sa_start_acceptance: 0.5,
            sa_end_fraction: 0.002,
            seed: 0,
            removal_operators: RemovalOperator::defaults(),
            insertion_operators: InsertionOperator::defaults(),
            shaw_exponent: 6.0,
            regret_literal: false,
            time_limit_s: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config value at {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

fn invalid(field: &str, message: &str) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.to_string(),
    }
}

impl AlnsConfig {
    /// Full validation, including `max_iterations > 0`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iterations == 0 {
            return Err(invalid("/max_iterations", "must be positive"));
        }
        self.validate_search()
    }

    /// Everything except the iteration count, which may be zero for a run
    /// that only builds the initial solution.
    fn validate_search(&self) -> Result<(), ConfigError> {
        if self.segment_length == 0 {
            return Err(invalid("/segment_length", "must be positive"));
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err(invalid("/xi", "must lie in (0, 1]"));
        }
        if !(self.reaction > 0.0 && self.reaction <= 1.0) {
            return Err(invalid("/reaction", "must lie in (0, 1]"));
        }
        let s = self.scores;
        for (name, v) in [("best", s.best), ("improve", s.improve), ("accept", s.accept)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(&format!("/scores/{name}"), "must be non-negative"));
            }
        }
        if !(self.sa_start_gap.is_finite() && self.sa_start_gap > 0.0) {
            return Err(invalid("/sa_start_gap", "must be positive"));
        }
        if !(self.sa_start_acceptance > 0.0 && self.sa_start_acceptance < 1.0) {
            return Err(invalid("/sa_start_acceptance", "must lie in (0, 1)"));
        }
        if !(self.sa_end_fraction > 0.0 && self.sa_end_fraction <= 1.0) {
            return Err(invalid("/sa_end_fraction", "must lie in (0, 1]"));
        }
        if self.removal_operators.is_empty() {
            return Err(invalid("/removal_operators", "at least one operator is required"));
        }
        if self.insertion_operators.is_empty() {
            return Err(invalid("/insertion_operators", "at least one operator is required"));
        }
        if !(self.shaw_exponent.is_finite() && self.shaw_exponent >= 1.0) {
            return Err(invalid("/shaw_exponent", "must be at least 1"));
        }
        if let Some(t) = self.time_limit_s {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid("/time_limit_s", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<AlnsConfig, ConfigError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let cfg: AlnsConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| ConfigError::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<AlnsConfig, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        AlnsConfig::from_json(&text)
    }

    fn insertion_config(&self) -> InsertionConfig {
        InsertionConfig {
            regret_literal: self.regret_literal,
        }
    }
}

/// Start temperature and per-iteration cooling factor.
///
/// At the start a solution `sa_start_gap * initial_cost` worse than the
/// current one is accepted with probability `sa_start_acceptance`; after
/// `max_iterations` coolings the temperature is `sa_end_fraction * T0`.
pub fn temperature_schedule(config: &AlnsConfig, initial_cost: f64) -> (f64, f64) {
    let t0 = if initial_cost > 0.0 {
        -(config.sa_start_gap * initial_cost) / config.sa_start_acceptance.ln()
    } else {
        1.0
    };
    let cooling = if config.max_iterations == 0 {
        1.0
    } else {
        config.sa_end_fraction.powf(1.0 / config.max_iterations as f64)
    };
    (t0, cooling)
}

/// Simulated-annealing acceptance test.
pub fn accept<R: Rng + ?Sized>(current: f64, candidate: f64, temperature: f64, rng: &mut R) -> bool {
    if candidate < current {
        return true;
    }
    let p = (-(candidate - current) / temperature).exp();
    rng.gen::<f64>() < p
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorStats {
    pub name: String,
    pub weight: f64,
    pub segment_score: f64,
    pub segment_uses: u64,
    pub uses: u64,
    pub best_count: u64,
}

impl OperatorStats {
    fn new(name: String) -> Self {
        OperatorStats {
            name,
            weight: 1.0,
            segment_score: 0.0,
            segment_uses: 0,
            uses: 0,
            best_count: 0,
        }
    }

    fn credit(&mut self, score: f64, new_best: bool) {
        self.segment_score += score;
        self.segment_uses += 1;
        self.uses += 1;
        if new_best {
            self.best_count += 1;
        }
    }

    /// Blends the segment's average score into the weight; unused operators
    /// keep theirs.
    fn end_segment(&mut self, reaction: f64) {
        if self.segment_uses > 0 {
            self.weight = (1.0 - reaction) * self.weight + reaction * self.segment_score / self.segment_uses as f64;
        }
        self.segment_score = 0.0;
        self.segment_uses = 0;
    }
}

/// Selection probabilities of one operator class.
pub fn selection_probabilities(stats: &[OperatorStats]) -> Vec<f64> {
    let total: f64 = stats.iter().map(|s| s.weight).sum();
    stats.iter().map(|s| s.weight / total).collect()
}

fn roulette<R: Rng + ?Sized>(stats: &[OperatorStats], rng: &mut R) -> usize {
    let total: f64 = stats.iter().map(|s| s.weight).sum();
    if !(total > 0.0) {
        return rng.gen_range(0..stats.len());
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, s) in stats.iter().enumerate() {
        acc += s.weight;
        if u < acc {
            return i;
        }
    }
    stats.len() - 1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub current_cost: Money,
    pub best_cost: Money,
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub seed: u64,
    pub iterations: usize,
    pub initial_cost: CostBreakdown,
    pub best_cost: CostBreakdown,
    pub start_temperature: f64,
    pub cooling: f64,
    pub trace: Vec<TracePoint>,
    pub removal_stats: Vec<OperatorStats>,
    pub insertion_stats: Vec<OperatorStats>,
    pub wall_seconds: f64,
}

impl RunReport {
    /// `iteration,current_cost,best_cost,temperature` rows.
    pub fn trace_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["iteration", "current_cost", "best_cost", "temperature"])
            .expect("in-memory write");
        for p in &self.trace {
            w.write_record([
                p.iteration.to_string(),
                p.current_cost.to_string(),
                p.best_cost.to_string(),
                format!("{:.6}", p.temperature),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs the search for exactly `max_iterations` iterations (or until the
/// optional time limit) and returns the best solution found.
pub fn run(instance: &Instance, config: &AlnsConfig) -> Result<(Solution, RunReport), ConfigError> {
    config.validate_search()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cache = InsertionCache::new();
    let ins_cfg = config.insertion_config();

    let initial = build_initial(instance, &ins_cfg, &mut cache);
    let mut current = initial.clone();
    let mut best = initial.clone();
    let (t0, cooling) = temperature_schedule(config, initial.total().as_f64());
    let mut temperature = t0;

    let mut removal_stats: Vec<OperatorStats> =
        config.removal_operators.iter().map(|o| OperatorStats::new(o.to_string())).collect();
    let mut insertion_stats: Vec<OperatorStats> =
        config.insertion_operators.iter().map(|o| OperatorStats::new(o.to_string())).collect();
    let mut trace = vec![TracePoint {
        iteration: 0,
        current_cost: current.total(),
        best_cost: best.total(),
        temperature,
    }];

    let mut done = 0;
    for it in 1..=config.max_iterations {
        if config
            .time_limit_s
            .is_some_and(|limit| started.elapsed().as_secs_f64() >= limit)
        {
            break;
        }
        let ri = roulette(&removal_stats, &mut rng);
        let ii = roulette(&insertion_stats, &mut rng);
        let q = removal_count(current.planned_count(), config.psi, config.xi);
        let destroyed = if q == 0 {
            Destroyed {
                trips: current.trips.clone(),
                bank: current.bank.clone(),
                removed: Vec::new(),
            }
        } else {
            operators::remove(
                config.removal_operators[ri],
                instance,
                &current,
                q,
                &mut rng,
                config.shaw_exponent,
            )
        };
        let candidate = repair(instance, destroyed, config.insertion_operators[ii], &ins_cfg, &mut cache);
        debug_assert!(crate::model::validate_solution(instance, &candidate).is_empty());

        let new_best = candidate.total() < best.total();
        let improves = candidate.total() < current.total();
        let accepted = accept(current.total().as_f64(), candidate.total().as_f64(), temperature, &mut rng);
        let score = if new_best {
            config.scores.best
        } else if improves {
            config.scores.improve
        } else if accepted && candidate.total() > current.total() {
            config.scores.accept
        } else {
            0.0
        };
        removal_stats[ri].credit(score, new_best);
        insertion_stats[ii].credit(score, new_best);
        if new_best {
            best = candidate.clone();
        }
        if accepted {
            current = candidate;
        }
        temperature *= cooling;
        done = it;

        if it % config.segment_length == 0 {
            for s in removal_stats.iter_mut().chain(insertion_stats.iter_mut()) {
                s.end_segment(config.reaction);
            }
            trace.push(TracePoint {
                iteration: it,
                current_cost: current.total(),
                best_cost: best.total(),
                temperature,
            });
        }
    }
    if trace.last().is_some_and(|p| p.iteration != done) {
        trace.push(TracePoint {
            iteration: done,
            current_cost: current.total(),
            best_cost: best.total(),
            temperature,
        });
    }

    let report = RunReport {
        seed: config.seed,
        iterations: done,
        initial_cost: initial.cost,
        best_cost: best.cost,
        start_temperature: t0,
        cooling,
        trace,
        removal_stats,
        insertion_stats,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((best, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_parameters() {
        let c = AlnsConfig::default();
        assert_eq!(c.max_iterations, 25_000);
        assert_eq!(c.psi, 100);
        assert_eq!(c.xi, 0.35);
        assert_eq!(c.segment_length, 200);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn start_temperature_example() {
        let (t0, c) = temperature_schedule(&AlnsConfig::default(), 1000.0);
        assert!((t0 - 50.0 / 2f64.ln()).abs() < 1e-9);
        assert!((t0 - 72.13).abs() < 0.01);
        assert_eq!(c, 0.002f64.powf(1.0 / 25_000.0));
        let end = t0 * c.powi(25_000);
        assert!((end / t0 - 0.002).abs() < 1e-9);
    }

    #[test]
    fn zero_initial_cost_gets_unit_temperature() {
        assert_eq!(temperature_schedule(&AlnsConfig::default(), 0.0).0, 1.0);
    }

    #[test]
    fn acceptance_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(accept(10.0, 9.0, 1.0, &mut rng));
        assert!((0..100).all(|_| accept(10.0, 10.0, 1.0, &mut rng)));
        let t = 5.0;
        let n = 10_000;
        let hits = (0..n).filter(|_| accept(0.0, t * 2f64.ln(), t, &mut rng)).count();
        let rate = hits as f64 / n as f64;
        assert!((rate - 0.5).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn weight_update_blends_average_score() {
        let mut s = OperatorStats::new("x".into());
        s.credit(33.0, true);
        s.credit(0.0, false);
        s.end_segment(0.1);
        assert!((s.weight - (0.9 + 0.1 * 16.5)).abs() < 1e-12);
        let w = s.weight;
        s.end_segment(0.1);
        assert_eq!(s.weight, w);
    }

    #[test]
    fn config_json_errors() {
        assert!(AlnsConfig::from_json("{}").is_ok());
        assert!(matches!(
            AlnsConfig::from_json(r#"{"xi": 0}"#),
            Err(ConfigError::Invalid { field, .. }) if field == "/xi"
        ));
        assert!(matches!(AlnsConfig::from_json(r#"{"bogus": 1}"#), Err(ConfigError::Parse { .. })));
        let c = AlnsConfig::from_json(r#"{"insertion_operators": ["greedy", "regret-3"], "removal_operators": ["TRR"]}"#)
            .unwrap();
        assert_eq!(c.insertion_operators, vec![InsertionOperator::Greedy, InsertionOperator::Regret(3)]);
        assert_eq!(c.removal_operators, vec![RemovalOperator::TimeRoute]);
    }
}
