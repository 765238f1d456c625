//! Meaning negotiation between agents holding stubborn and flexible
//! propositional theories.
//!
//! Agents exchange angle formulas under a bilateral bargaining protocol or a
//! one-to-many auction until an agreement angle is reached or disagreement
//! is certified. Every step is recorded as a [`trace::TraceEvent`] that
//! [`verify::verify`] can replay independently.
//!
//! ```
//! use mnd::logic::{parse_formula, Signature, WorldSet};
//!
//! let sig = Signature::from_names(["a", "b"]).unwrap();
//! let ws = WorldSet::full(sig.clone()).unwrap();
//! let f = parse_formula("a & b", &sig).unwrap();
//! let g = parse_formula("a | b", &sig).unwrap();
//! assert!(ws.entails(&f, &g));
//! ```

pub mod agent;
pub mod engine;
pub mod graph;
pub mod logic;
pub mod relation;
pub mod rules;
pub mod scenario;
pub mod trace;
pub mod verify;

pub use agent::{AgentSpec, Attitude};
pub use engine::{run, Mode, Negotiation, Outcome, Phase};
pub use logic::{Formula, Signature, WorldSet};
pub use relation::{classify, RelationLabel};
pub use scenario::Scenario;
