//! Scenario files: JSON descriptions of a signature, its worlds, the agents
//! and the protocol to run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::agent::{AgentSpec, AngleRef, Attitude, RenameMap};
use crate::engine::{beat_bound, EngineError, Mode, Negotiation, Outcome};
use crate::logic::{parse_formula, Atom, Formula, LogicError, Signature, World, WorldSet};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: cannot read: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: schema error: {detail}")]
    Schema { path: String, detail: String },
    #[error("{path}: {detail}")]
    Semantic { path: String, detail: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAtom {
    Name(String),
    Full(Atom),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorld {
    name: String,
    holds: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawWorlds {
    Named(Vec<RawWorld>),
    Constraint(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    id: String,
    stubborn: Vec<String>,
    angles: Vec<String>,
    #[serde(default)]
    attitude: Attitude,
    #[serde(default)]
    translations: BTreeMap<String, RenameMap>,
    #[serde(default)]
    script: Vec<AngleRef>,
    /// Subset of the scenario signature; defaults to all of it.
    #[serde(default)]
    signature: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawMode {
    Bilateral,
    Auction,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    description: Option<String>,
    signature: Vec<RawAtom>,
    #[serde(default)]
    worlds: Option<RawWorlds>,
    agents: Vec<RawAgent>,
    mode: RawMode,
    #[serde(default)]
    alpha: Option<usize>,
    #[serde(default)]
    passive_auctioneer: bool,
    #[serde(default)]
    max_beats: Option<usize>,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub description: Option<String>,
    pub ws: WorldSet,
    pub agents: Vec<AgentSpec>,
    pub mode: Mode,
    pub max_beats: Option<usize>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::from_json(&text, &path.display().to_string())
    }

    /// `origin` names the source in error messages.
    pub fn from_json(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Schema {
            path: origin.to_string(),
            detail: e.to_string(),
        })?;
        let semantic = |detail: String| ScenarioError::Semantic {
            path: origin.to_string(),
            detail,
        };
        let logic = |what: &str, e: LogicError| semantic(format!("{what}: {e}"));

        let atoms = raw
            .signature
            .into_iter()
            .map(|a| match a {
                RawAtom::Name(n) => Atom::new(n),
                RawAtom::Full(a) => a,
            })
            .collect();
        let sig = Signature::new(atoms).map_err(|e| logic("signature", e))?;
        let ws = match raw.worlds {
            None => WorldSet::full(sig.clone()),
            Some(RawWorlds::Constraint(c)) => {
                let f = parse_formula(&c, &sig).map_err(|e| logic("world constraint", e))?;
                WorldSet::constrained(sig.clone(), &f)
            }
            Some(RawWorlds::Named(ws)) => ws
                .iter()
                .map(|w| {
                    let holds: Vec<&str> = w.holds.iter().map(String::as_str).collect();
                    World::with_true(w.name.clone(), &sig, &holds)
                })
                .collect::<Result<Vec<_>, _>>()
                .and_then(|worlds| WorldSet::named(sig.clone(), worlds)),
        }
        .map_err(|e| logic("worlds", e))?;

        let mut agents = Vec::new();
        for a in raw.agents {
            let asig = match &a.signature {
                None => sig.clone(),
                Some(names) => {
                    let mut atoms = Vec::new();
                    for n in names {
                        let i = sig.index_of(n).ok_or_else(|| {
                            semantic(format!(
                                "agent {}: atom `{n}` is not in the scenario signature",
                                a.id
                            ))
                        })?;
                        atoms.push(sig.atoms()[i].clone());
                    }
                    Signature::new(atoms)
                        .map_err(|e| logic(&format!("agent {} signature", a.id), e))?
                }
            };
            let parse = |what: &str, list: &[String]| -> Result<Vec<Formula>, ScenarioError> {
                list.iter()
                    .enumerate()
                    .map(|(k, t)| {
                        parse_formula(t, &asig)
                            .map_err(|e| logic(&format!("agent {} {what} {k}", a.id), e))
                    })
                    .collect()
            };
            let stubborn = parse("stubborn formula", &a.stubborn)?;
            let angles = parse("angle", &a.angles)?;
            let mut spec = AgentSpec::new(a.id.clone(), asig.clone(), stubborn, angles)
                .map_err(|e| semantic(e.to_string()))?
                .with_attitude(a.attitude)
                .with_script(a.script)
                .map_err(|e| semantic(e.to_string()))?;
            for (peer, map) in a.translations {
                spec = spec
                    .with_translation(peer, map)
                    .map_err(|e| semantic(e.to_string()))?;
            }
            spec.validate(&ws).map_err(|e| semantic(e.to_string()))?;
            agents.push(spec);
        }

        let mode = match raw.mode {
            RawMode::Bilateral => {
                if raw.alpha.is_some() || raw.passive_auctioneer {
                    return Err(semantic(
                        "alpha and passive_auctioneer apply to auctions only".into(),
                    ));
                }
                Mode::Bilateral
            }
            RawMode::Auction => Mode::Auction {
                alpha: raw.alpha.unwrap_or(agents.len()),
                passive_auctioneer: raw.passive_auctioneer,
            },
        };
        let scenario = Scenario {
            description: raw.description,
            ws,
            agents,
            mode,
            max_beats: raw.max_beats,
        };
        scenario.negotiation()?;
        Ok(scenario)
    }

    /// Overrides the auction threshold; ignored for bilateral scenarios.
    pub fn with_alpha(mut self, alpha: usize) -> Result<Scenario, ScenarioError> {
        if let Mode::Auction {
            passive_auctioneer, ..
        } = self.mode
        {
            self.mode = Mode::Auction {
                alpha,
                passive_auctioneer,
            };
            self.negotiation()?;
        }
        Ok(self)
    }

    pub fn effective_max_beats(&self) -> usize {
        self.max_beats.unwrap_or_else(|| beat_bound(&self.agents))
    }

    pub fn negotiation(&self) -> Result<Negotiation, EngineError> {
        Negotiation::init(self.agents.clone(), self.mode, self.ws.clone())
    }

    pub fn run(&self) -> Result<Outcome, EngineError> {
        self.negotiation()?.run(self.effective_max_beats())
    }
}
