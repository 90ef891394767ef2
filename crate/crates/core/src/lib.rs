//! Planning of full-truck-load (FTL) pickup-and-delivery tenders.
//!
//! Every request is either served by a chartered vehicle of the own fleet,
//! paid per driven kilometre, or outsourced to the spot market at a fixed
//! per-request price. Vehicles must respect time windows, a simplified
//! driving-time regulation (shift breaks and a Sunday break) and must drive
//! a minimum distance over the planning horizon.
//!
//! The crate is organised as:
//!
//! - [`model`]: domain types, cost model, whole-solution accounting.
//! - [`schedule`]: earliest-arrival driver schedules, the feasibility kernel.
//! - [`instances`]: Gehring & Homberger reader, benchmark transformation and
//!   the native JSON instance format.
//! - [`operators`]: removal operators and the outsourcing-aware insertion.
//! - [`engine`]: the adaptive large neighbourhood search loop.
//! - [`scenarios`]: all-spot-market, all-own-fleet and mixed scenarios.
//! - [`oracle`]: exact enumeration, schedule verification and LP export used
//!   to cross-check the heuristic.

pub mod engine;
pub mod instances;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod scenarios;
pub mod schedule;

mod parallel;

pub use engine::{AlnsConfig, RunReport};
pub use model::{
    CostBreakdown, CostModel, Distance, Instance, Money, RegParams, Request, Solution, TimeWindow,
    Trip,
};
pub use schedule::{Label, Schedule};
