//! Agents: stubborn knowledge, the declared angle hierarchy, the W/C/S moves
//! between angles, and the attitude that picks among them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::logic::{conjoin, Formula, LogicError, Models, Signature, WorldSet};
use crate::relation::{classify_models, RelationLabel, Role};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("agent {agent}: {detail}")]
    Invalid { agent: String, detail: String },
    #[error("agent {agent}: {source}")]
    Logic {
        agent: String,
        #[source]
        source: LogicError,
    },
    #[error("agent {agent} cannot translate atom `{atom}` received from {peer}")]
    UntranslatableAtom {
        agent: String,
        peer: String,
        atom: String,
    },
    #[error("agent {agent}: scripted step {step} ({target}) is not a legal move from `{from}`")]
    ScriptViolation {
        agent: String,
        step: usize,
        target: String,
        from: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attitude {
    #[default]
    Collaborative,
    Competitive,
}

/// The three proposal rules: weakening, changing, stubbornness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProposalRuleTag {
    W,
    C,
    S,
}

impl fmt::Display for ProposalRuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProposalRuleTag::W => "W",
            ProposalRuleTag::C => "C",
            ProposalRuleTag::S => "S",
        })
    }
}

/// How a CAF in the history was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepTag {
    Open,
    Rule(ProposalRuleTag),
    Adopt,
}

/// A reference to a declared angle or to the stub (the implicit top angle).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AngleRef {
    Index(usize),
    Stub,
}

impl Serialize for AngleRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AngleRef::Index(i) => s.serialize_u64(*i as u64),
            AngleRef::Stub => s.serialize_str("stub"),
        }
    }
}

impl<'de> Deserialize<'de> for AngleRef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Name(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(i) => Ok(AngleRef::Index(i)),
            Raw::Name(s) if s == "stub" => Ok(AngleRef::Stub),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "expected an angle index or \"stub\", found \"{s}\""
            ))),
        }
    }
}

/// Atom-rename map applied to formulas received from one peer.
pub type RenameMap = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentSpec {
    id: String,
    sig: Signature,
    stubborn: Vec<Formula>,
    angles: Vec<Formula>,
    attitude: Attitude,
    translations: BTreeMap<String, RenameMap>,
    script: Vec<AngleRef>,
    stub: Formula,
}

impl AgentSpec {
    /// Checks structure only; see [`AgentSpec::validate`] for the semantic invariants.
    pub fn new(
        id: impl Into<String>,
        sig: Signature,
        stubborn: Vec<Formula>,
        angles: Vec<Formula>,
    ) -> Result<AgentSpec, AgentError> {
        let id = id.into();
        let invalid = |detail: &str| AgentError::Invalid {
            agent: id.clone(),
            detail: detail.into(),
        };
        if id.is_empty() {
            return Err(invalid("empty agent id"));
        }
        if angles.is_empty() {
            return Err(invalid("no angles declared"));
        }
        let stub = conjoin(&stubborn).map_err(|_| invalid("no stubborn formulas declared"))?;
        for f in stubborn.iter().chain(&angles) {
            f.check(&sig).map_err(|source| AgentError::Logic {
                agent: id.clone(),
                source,
            })?;
        }
        Ok(AgentSpec {
            id,
            sig,
            stubborn,
            angles,
            attitude: Attitude::default(),
            translations: BTreeMap::new(),
            script: Vec::new(),
            stub,
        })
    }

    pub fn with_attitude(mut self, attitude: Attitude) -> Self {
        self.attitude = attitude;
        self
    }

    /// Every rename target must be an atom of this agent.
    pub fn with_translation(
        mut self,
        peer: impl Into<String>,
        map: RenameMap,
    ) -> Result<Self, AgentError> {
        if let Some(bad) = map.values().find(|t| !self.sig.contains(t)) {
            return Err(AgentError::Logic {
                agent: self.id.clone(),
                source: LogicError::UnknownAtom(bad.clone()),
            });
        }
        self.translations.insert(peer.into(), map);
        Ok(self)
    }

    pub fn with_script(mut self, script: Vec<AngleRef>) -> Result<Self, AgentError> {
        if let Some(AngleRef::Index(i)) = script
            .iter()
            .find(|r| matches!(r, AngleRef::Index(i) if *i >= self.angles.len()))
        {
            return Err(AgentError::Invalid {
                agent: self.id.clone(),
                detail: format!(
                    "script refers to angle {i}, but only {} are declared",
                    self.angles.len()
                ),
            });
        }
        self.script = script;
        Ok(self)
    }

    /// Semantic invariants over the negotiation's world set: the stub is
    /// satisfiable and every angle is a satisfiable restriction of it.
    pub fn validate(&self, ws: &WorldSet) -> Result<(), AgentError> {
        let invalid = |detail: String| AgentError::Invalid {
            agent: self.id.clone(),
            detail,
        };
        if let Some(a) = self
            .sig
            .atoms()
            .iter()
            .find(|a| !ws.signature().contains(&a.name))
        {
            return Err(invalid(format!(
                "atom `{}` is not in the world set's signature",
                a.name
            )));
        }
        let stub = ws.models(&self.stub);
        if stub.is_empty() {
            return Err(invalid(format!("stub `{}` is unsatisfiable", self.stub)));
        }
        for (i, a) in self.angles.iter().enumerate() {
            let m = ws.models(a);
            if m.is_empty() {
                return Err(invalid(format!("angle {i} `{a}` is unsatisfiable")));
            }
            if !m.is_subset(&stub) {
                return Err(invalid(format!(
                    "angle {i} `{a}` does not entail the stub `{}`",
                    self.stub
                )));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn sig(&self) -> &Signature {
        &self.sig
    }

    pub fn stubborn(&self) -> &[Formula] {
        &self.stubborn
    }

    pub fn angles(&self) -> &[Formula] {
        &self.angles
    }

    pub fn attitude(&self) -> Attitude {
        self.attitude
    }

    pub fn translations(&self) -> &BTreeMap<String, RenameMap> {
        &self.translations
    }

    pub fn script(&self) -> &[AngleRef] {
        &self.script
    }

    pub fn stub_formula(&self) -> Formula {
        self.stub.clone()
    }

    /// Index `angles().len()` denotes the stub.
    pub fn candidate(&self, index: usize) -> &Formula {
        self.angles.get(index).unwrap_or(&self.stub)
    }

    pub fn resolve(&self, r: AngleRef) -> usize {
        match r {
            AngleRef::Index(i) => i,
            AngleRef::Stub => self.angles.len(),
        }
    }
}

pub fn stub_formula(a: &AgentSpec) -> Formula {
    a.stub_formula()
}

/// The agent's current angle formula and how it got there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CafState {
    pub agent: String,
    pub k: usize,
    pub current: Formula,
    pub history: Vec<(StepTag, Formula)>,
}

impl CafState {
    pub fn new(a: &AgentSpec) -> CafState {
        let first = a.angles[0].clone();
        CafState {
            agent: a.id.clone(),
            k: 0,
            current: first.clone(),
            history: vec![(StepTag::Open, first)],
        }
    }

    pub fn step(&mut self, tag: StepTag, f: Formula) {
        self.k += 1;
        self.current = f.clone();
        self.history.push((tag, f));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub tag: ProposalRuleTag,
    /// Angle index; `angles().len()` is the stub.
    pub index: usize,
    pub formula: Formula,
}

/// Moves available from the current CAF.
///
/// At the stub only (S) remains. Elsewhere every declared angle or the stub
/// that strictly generalizes the CAF is a (W) move and every incomparable one
/// a (C) move. Declared angles already held earlier are not offered again,
/// which bounds the number of moves; the stub always stays reachable.
pub fn legal_successors(c: &CafState, a: &AgentSpec, ws: &WorldSet) -> Vec<Candidate> {
    let cur = ws.models(&c.current);
    let stub = ws.models(&a.stub);
    if cur == stub {
        return vec![Candidate {
            tag: ProposalRuleTag::S,
            index: a.angles.len(),
            formula: c.current.clone(),
        }];
    }
    let held: Vec<Models> = c.history.iter().map(|(_, f)| ws.models(f)).collect();
    let mut seen: Vec<Models> = Vec::new();
    let mut out = Vec::new();
    for index in 0..=a.angles.len() {
        let g = a.candidate(index);
        let m = ws.models(g);
        if (index < a.angles.len() && held.contains(&m)) || seen.contains(&m) {
            continue;
        }
        let tag = if cur.is_proper_subset(&m) {
            ProposalRuleTag::W
        } else if !cur.is_subset(&m) && !m.is_subset(&cur) {
            ProposalRuleTag::C
        } else {
            continue;
        };
        seen.push(m);
        out.push(Candidate {
            tag,
            index,
            formula: g.clone(),
        });
    }
    out
}

/// Outcome of move selection: keep the current CAF (only offered when it
/// already lies inside an adoptable proposal) or apply a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choice {
    Keep,
    Move(Candidate),
}

fn hint_matches(tag: ProposalRuleTag, situation: Option<RelationLabel>) -> bool {
    matches!(
        (situation, tag),
        (Some(RelationLabel::Comp), ProposalRuleTag::W)
            | (Some(RelationLabel::EssDis), ProposalRuleTag::C)
    )
}

fn best_by<K: Ord>(cands: Vec<Candidate>, key: impl Fn(&Candidate) -> K) -> Option<Candidate> {
    // Ties go to the lowest index, hence the reversed index in the key.
    cands
        .into_iter()
        .max_by_key(|c| (key(c), std::cmp::Reverse(c.index)))
}

/// Picks the next CAF against one received proposal, already translated.
///
/// `situation` is the relation the agent currently sees; it breaks ties in
/// favour of (W) under compatibility and (C) under essence disagreement.
pub fn choose_next(
    c: &CafState,
    a: &AgentSpec,
    received: Option<&Formula>,
    situation: Option<RelationLabel>,
    ws: &WorldSet,
) -> Choice {
    let Some(p) = received else {
        if c.k == 0 {
            return Choice::Keep;
        }
        return best_by(legal_successors(c, a, ws), |_| 0).map_or(Choice::Keep, Choice::Move);
    };
    let stub = ws.models(&a.stub);
    let cur = ws.models(&c.current);
    let pm = ws.models(p);
    let succ = legal_successors(c, a, ws);
    match a.attitude {
        Attitude::Collaborative => {
            let rank = |m: &Models| classify_models(&stub, m, &pm, Role::Following).rank();
            let best = best_by(succ, |g| {
                (rank(&ws.models(&g.formula)), hint_matches(g.tag, situation))
            });
            let keep = cur != stub && cur.is_subset(&pm) && pm.is_subset(&stub);
            match best {
                Some(g) if !keep || rank(&ws.models(&g.formula)) > rank(&cur) => Choice::Move(g),
                _ if keep => Choice::Keep,
                Some(g) => Choice::Move(g),
                None => Choice::Keep,
            }
        }
        Attitude::Competitive => {
            let origin = ws.models(&a.angles[0]);
            best_by(succ, |g| {
                (
                    ws.models(&g.formula).intersection_count(&origin),
                    hint_matches(g.tag, situation),
                )
            })
            .map_or(Choice::Keep, Choice::Move)
        }
    }
}

/// Picks one CAF against several received proposals (the auctioneer's case):
/// collaborative agents maximize the summed relation rank, competitive ones
/// stay closest to their first angle.
pub fn choose_next_multi(
    c: &CafState,
    a: &AgentSpec,
    received: &[Formula],
    ws: &WorldSet,
) -> Candidate {
    let stub = ws.models(&a.stub);
    let ps: Vec<Models> = received.iter().map(|p| ws.models(p)).collect();
    let origin = ws.models(&a.angles[0]);
    let succ = legal_successors(c, a, ws);
    let best = match a.attitude {
        Attitude::Collaborative => best_by(succ, |g| {
            let m = ws.models(&g.formula);
            ps.iter()
                .map(|p| classify_models(&stub, &m, p, Role::Following).rank())
                .sum::<u32>()
        }),
        Attitude::Competitive => {
            best_by(succ, |g| ws.models(&g.formula).intersection_count(&origin))
        }
    };
    best.expect("legal_successors is never empty")
}

/// Renames atoms of a formula received from `from_peer` into `a`'s signature.
/// Atoms absent from the rename map must be shared verbatim.
pub fn translate(a: &AgentSpec, from_peer: &str, f: &Formula) -> Result<Formula, AgentError> {
    let map = a.translations.get(from_peer);
    f.try_rename(&|atom: &str| {
        if let Some(t) = map.and_then(|m| m.get(atom)) {
            Ok(t.clone())
        } else if a.sig.contains(atom) {
            Ok(atom.to_string())
        } else {
            Err(AgentError::UntranslatableAtom {
                agent: a.id.clone(),
                peer: from_peer.to_string(),
                atom: atom.to_string(),
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        Formula::parse(s).unwrap()
    }

    fn setup() -> (WorldSet, AgentSpec) {
        let sig = Signature::from_names(["a", "b", "c"]).unwrap();
        let ws = WorldSet::full(sig.clone()).unwrap();
        let agent = AgentSpec::new(
            "X",
            sig,
            vec![f("a | b")],
            vec![f("a & b"), f("a"), f("b & !a"), f("a & b & c")],
        )
        .unwrap();
        agent.validate(&ws).unwrap();
        (ws, agent)
    }

    #[test]
    fn successors_follow_the_rules() {
        let (ws, a) = setup();
        let c = CafState::new(&a);
        let succ = legal_successors(&c, &a, &ws);
        let tags: Vec<_> = succ.iter().map(|s| (s.tag, s.index)).collect();
        assert_eq!(
            tags,
            vec![
                (ProposalRuleTag::W, 1),
                (ProposalRuleTag::C, 2),
                (ProposalRuleTag::W, 4)
            ]
        );
    }

    #[test]
    fn stub_only_repeats() {
        let (ws, a) = setup();
        let mut c = CafState::new(&a);
        c.step(StepTag::Rule(ProposalRuleTag::W), a.stub_formula());
        let succ = legal_successors(&c, &a, &ws);
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].tag, ProposalRuleTag::S);
        assert_eq!(
            choose_next(&c, &a, Some(&f("c")), None, &ws),
            Choice::Move(succ[0].clone())
        );
    }

    #[test]
    fn abandoned_angles_are_not_revisited() {
        let (ws, a) = setup();
        let mut c = CafState::new(&a);
        c.step(StepTag::Rule(ProposalRuleTag::C), f("b & !a"));
        let succ = legal_successors(&c, &a, &ws);
        assert!(succ.iter().all(|s| s.index != 0));
        assert!(succ.iter().any(|s| s.index == 4));
    }

    #[test]
    fn collaborative_keeps_inside_an_adoptable_proposal() {
        let (ws, a) = setup();
        let c = CafState::new(&a);
        assert_eq!(
            choose_next(&c, &a, Some(&f("a & (b | c)")), None, &ws),
            Choice::Keep
        );
        // Moving onto an angle equivalent to the proposal beats keeping.
        assert!(
            matches!(choose_next(&c, &a, Some(&f("a")), None, &ws), Choice::Move(m) if m.index == 1)
        );
        // A proposal reaching outside the stub cannot be adopted.
        let outside = f("a | c");
        assert!(matches!(
            choose_next(&c, &a, Some(&outside), None, &ws),
            Choice::Move(_)
        ));
    }

    #[test]
    fn competitive_stays_close() {
        let (ws, a) = setup();
        let a = a.with_attitude(Attitude::Competitive);
        let c = CafState::new(&a);
        let Choice::Move(m) =
            choose_next(&c, &a, Some(&f("b & !a")), Some(RelationLabel::EssDis), &ws)
        else {
            panic!("competitive agents always move");
        };
        // Angles 1 and 4 both contain all of angle 0; the lower index wins.
        assert_eq!(m.index, 1);
    }

    #[test]
    fn translation() {
        let sig = Signature::from_names(["wing", "b"]).unwrap();
        let a = AgentSpec::new("X", sig, vec![f("b")], vec![f("b")])
            .unwrap()
            .with_translation("Y", [("aile".to_string(), "wing".to_string())].into())
            .unwrap();
        assert_eq!(translate(&a, "Y", &f("aile")).unwrap(), f("wing"));
        assert_eq!(translate(&a, "Z", &f("b & wing")).unwrap(), f("b & wing"));
        assert!(matches!(
            translate(&a, "Z", &f("aile")),
            Err(AgentError::UntranslatableAtom { .. })
        ));
    }

    #[test]
    fn validation() {
        let sig = Signature::from_names(["a", "b"]).unwrap();
        let ws = WorldSet::full(sig.clone()).unwrap();
        let bad = AgentSpec::new("X", sig.clone(), vec![f("a")], vec![f("b")]).unwrap();
        assert!(bad.validate(&ws).is_err());
        let unsat = AgentSpec::new("X", sig.clone(), vec![f("a & !a")], vec![f("a & !a")]).unwrap();
        assert!(unsat.validate(&ws).is_err());
        assert!(AgentSpec::new("X", sig.clone(), vec![], vec![f("a")]).is_err());
        assert!(AgentSpec::new("X", sig.clone(), vec![f("a")], vec![]).is_err());
        assert!(AgentSpec::new("X", sig, vec![f("z")], vec![f("a")]).is_err());
    }
}
