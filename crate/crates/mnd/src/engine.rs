//! The negotiation state machine: bilateral bargaining and the one-to-many
//! auction, driven turn by turn and recorded as a trace.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::agent::{
    choose_next, choose_next_multi, legal_successors, translate, AgentError, AgentSpec, AngleRef,
    Attitude, CafState, Candidate, Choice, ProposalRuleTag, StepTag,
};
use crate::logic::{Formula, Models, WorldSet};
use crate::relation::{classify_models, RelationLabel, Role};
use crate::rules::{Abbrev, Rule, RuleTable, SpeakerRole};
use crate::trace::{EventKind, TerminalPhase, TraceEvent, TraceFooter, SYSTEM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Bilateral,
    /// The first listed agent is the auctioneer. A passive auctioneer does not
    /// count towards the `alpha` agreeing agents.
    Auction {
        alpha: usize,
        passive_auctioneer: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Phase {
    Init,
    Negotiate,
    Agreement(Formula),
    Disagreement,
}

impl Phase {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Phase::Agreement(_) | Phase::Disagreement)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("{mode} negotiation needs {need} agents, got {got}")]
    BadArity {
        mode: &'static str,
        need: &'static str,
        got: usize,
    },
    #[error("alpha must lie in 1..={n}, got {alpha}")]
    BadAlpha { alpha: usize, n: usize },
    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("beat {beat}: no rule for {speaker} asserting {rule}")]
    NoLegalRule {
        beat: usize,
        speaker: String,
        rule: String,
    },
    #[error("negotiation still open after {0} beats")]
    BeatLimitExceeded(usize),
}

/// Everything a turn needs to know about the negotiation so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegotiationState {
    pub mode: Mode,
    pub phase: Phase,
    /// Index of the next beat to play.
    pub beat: usize,
    /// Current angle formulas, in listing order.
    pub caf: Vec<CafState>,
    /// The label each speaker last asserted about each target's proposal.
    pub last_label: BTreeMap<(String, String), RelationLabel>,
    pub agreeing: BTreeSet<String>,
    pub auctioneer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub phase: Phase,
    pub outcome: Option<Formula>,
    /// Agreeing agents in listing order.
    pub agreeing: Vec<String>,
    pub beats: usize,
    pub trace: Vec<TraceEvent>,
}

impl Outcome {
    pub fn is_agreement(&self) -> bool {
        matches!(self.phase, Phase::Agreement(_))
    }

    pub fn footer(&self) -> TraceFooter {
        TraceFooter {
            phase: if self.is_agreement() {
                TerminalPhase::Agreement
            } else {
                TerminalPhase::Disagreement
            },
            outcome: self.outcome.clone(),
            agreeing: self.agreeing.clone(),
        }
    }
}

/// Upper bound on the beats any run can take.
pub fn beat_bound(agents: &[AgentSpec]) -> usize {
    2 + agents
        .iter()
        .map(|a| (a.angles().len() + 1) * agents.len())
        .sum::<usize>()
}

pub struct Negotiation {
    agents: Vec<AgentSpec>,
    stubs: Vec<Models>,
    ws: WorldSet,
    state: NegotiationState,
    trace: Vec<TraceEvent>,
    script_pos: Vec<usize>,
    withdrawn: Vec<bool>,
    second_pending: Vec<bool>,
    /// Labels asserted during the current turn or beat, per agent.
    asserted: Vec<Option<RelationLabel>>,
}

impl Negotiation {
    pub fn init(
        agents: Vec<AgentSpec>,
        mode: Mode,
        ws: WorldSet,
    ) -> Result<Negotiation, EngineError> {
        let n = agents.len();
        match mode {
            Mode::Bilateral if n != 2 => {
                return Err(EngineError::BadArity {
                    mode: "bilateral",
                    need: "exactly 2",
                    got: n,
                })
            }
            Mode::Auction { .. } if n < 3 => {
                return Err(EngineError::BadArity {
                    mode: "auction",
                    need: "at least 3",
                    got: n,
                })
            }
            Mode::Auction { alpha, .. } if alpha == 0 || alpha > n => {
                return Err(EngineError::BadAlpha { alpha, n })
            }
            _ => {}
        }
        let mut ids = BTreeSet::new();
        for a in &agents {
            if !ids.insert(a.id()) {
                return Err(EngineError::DuplicateAgent(a.id().to_string()));
            }
            a.validate(&ws)?;
        }
        let stubs = agents
            .iter()
            .map(|a| ws.models(&a.stub_formula()))
            .collect();
        let state = NegotiationState {
            mode,
            phase: Phase::Init,
            beat: 0,
            caf: agents.iter().map(CafState::new).collect(),
            last_label: BTreeMap::new(),
            agreeing: BTreeSet::new(),
            auctioneer: matches!(mode, Mode::Auction { .. }).then(|| agents[0].id().to_string()),
        };
        Ok(Negotiation {
            stubs,
            ws,
            state,
            trace: Vec::new(),
            script_pos: vec![0; n],
            withdrawn: vec![false; n],
            second_pending: (0..n).map(|i| i != 0).collect(),
            asserted: vec![None; n],
            agents,
        })
    }

    pub fn state(&self) -> &NegotiationState {
        &self.state
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    pub fn world_set(&self) -> &WorldSet {
        &self.ws
    }

    /// Plays one bilateral turn or one auction beat.
    pub fn step(&mut self) -> Result<(), EngineError> {
        if self.state.phase.is_terminal() {
            return Ok(());
        }
        self.asserted.iter_mut().for_each(|a| *a = None);
        let beat = self.state.beat;
        match self.state.mode {
            Mode::Bilateral => {
                if beat == 0 {
                    self.bid();
                } else {
                    let (s, o) = (beat % 2, 1 - beat % 2);
                    let reinitiated = if self.second_pending[s] {
                        self.second_proposer_step(s, o)?
                    } else {
                        self.following_step(s, o)?;
                        false
                    };
                    if !reinitiated && !self.state.phase.is_terminal() {
                        self.bilateral_transition(s, o);
                    }
                }
            }
            Mode::Auction { .. } => {
                if beat == 0 {
                    self.bid();
                    for k in 1..self.agents.len() {
                        self.second_proposer_step(k, 0)?;
                    }
                } else {
                    self.auctioneer_step()?;
                    for k in 1..self.agents.len() {
                        if !self.withdrawn[k] {
                            self.following_step(k, 0)?;
                        }
                    }
                }
                self.auction_transition();
            }
        }
        self.state.beat += 1;
        Ok(())
    }

    /// Plays until a terminal phase; beats past `max_beats` are an error.
    pub fn run(mut self, max_beats: usize) -> Result<Outcome, EngineError> {
        while !self.state.phase.is_terminal() {
            if self.state.beat > max_beats {
                return Err(EngineError::BeatLimitExceeded(max_beats));
            }
            self.step()?;
        }
        let outcome = match &self.state.phase {
            Phase::Agreement(f) => Some(f.clone()),
            _ => None,
        };
        let agreeing = self
            .agents
            .iter()
            .filter(|a| self.state.agreeing.contains(a.id()))
            .map(|a| a.id().to_string())
            .collect();
        Ok(Outcome {
            phase: self.state.phase,
            outcome,
            agreeing,
            beats: self.state.beat,
            trace: self.trace,
        })
    }

    fn id(&self, i: usize) -> String {
        self.agents[i].id().to_string()
    }

    fn caf_models(&self, i: usize) -> Models {
        self.ws.models(&self.state.caf[i].current)
    }

    fn at_stub(&self, i: usize) -> bool {
        self.caf_models(i) == self.stubs[i]
    }

    /// `from`'s current proposal in `to`'s signature.
    fn received(&self, to: usize, from: usize) -> Result<Formula, EngineError> {
        Ok(translate(
            &self.agents[to],
            self.agents[from].id(),
            &self.state.caf[from].current,
        )?)
    }

    fn push(&mut self, speaker: String, kind: EventKind, rule: Rule) -> &mut TraceEvent {
        self.trace.push(TraceEvent {
            beat: self.state.beat,
            speaker,
            kind,
            rule,
            formula: None,
            label: None,
            target: None,
            violation: false,
        });
        self.trace.last_mut().expect("just pushed")
    }

    fn propose(&mut self, i: usize, rule: Rule, f: Formula) {
        let speaker = self.id(i);
        self.push(speaker, EventKind::Proposal, rule).formula = Some(f);
    }

    fn evaluate(&mut self, i: usize, j: usize, rule: Rule, label: RelationLabel, violation: bool) {
        let (speaker, target) = (self.id(i), self.id(j));
        let e = self.push(speaker.clone(), EventKind::Evaluation, rule);
        e.label = Some(label);
        e.target = Some(target.clone());
        e.violation = violation;
        self.state.last_label.insert((speaker, target), label);
        self.asserted[i] = Some(label);
    }

    fn system(&mut self, rule: Rule, f: Option<Formula>) {
        self.push(SYSTEM.to_string(), EventKind::System, rule)
            .formula = f;
    }

    fn apply(&mut self, i: usize, c: Candidate) {
        self.state.caf[i].step(StepTag::Rule(c.tag), c.formula.clone());
        self.propose(i, Rule::Move(c.tag), c.formula);
    }

    fn adopt(&mut self, i: usize, f: Formula) {
        self.state.caf[i].step(StepTag::Adopt, f.clone());
        self.propose(i, Rule::Adopt, f);
    }

    fn bid(&mut self) {
        self.state.phase = Phase::Negotiate;
        let f = self.state.caf[0].current.clone();
        self.propose(0, Rule::Bid, f);
    }

    /// The scripted move if one is pending, otherwise `fallback`. At the stub
    /// the (S) move is forced and the script is not consumed.
    fn pick(
        &mut self,
        i: usize,
        fallback: impl FnOnce(&Self) -> Choice,
    ) -> Result<Choice, EngineError> {
        let (c, a) = (&self.state.caf[i], &self.agents[i]);
        let succ = legal_successors(c, a, &self.ws);
        if succ.len() == 1 && succ[0].tag == ProposalRuleTag::S {
            return Ok(Choice::Move(
                succ.into_iter().next().expect("one successor"),
            ));
        }
        let step = self.script_pos[i];
        let Some(&r) = a.script().get(step) else {
            return Ok(fallback(self));
        };
        let target = a.candidate(a.resolve(r));
        let tm = self.ws.models(target);
        match succ.into_iter().find(|g| self.ws.models(&g.formula) == tm) {
            Some(g) => {
                self.script_pos[i] += 1;
                Ok(Choice::Move(g))
            }
            None => Err(AgentError::ScriptViolation {
                agent: a.id().to_string(),
                step,
                target: match r {
                    AngleRef::Index(k) => format!("angle {k}"),
                    AngleRef::Stub => "stub".to_string(),
                },
                from: c.current.to_string(),
            }
            .into()),
        }
    }

    /// Moves `i` somewhere new after evaluating `p`; keeping the CAF is only
    /// acceptable when the caller can adopt afterwards.
    fn counter(
        &mut self,
        i: usize,
        p: &Formula,
        situation: RelationLabel,
    ) -> Result<Choice, EngineError> {
        self.pick(i, |me| {
            choose_next(
                &me.state.caf[i],
                &me.agents[i],
                Some(p),
                Some(situation),
                &me.ws,
            )
        })
    }

    fn call_away(&mut self, i: usize, j: usize) {
        self.evaluate(i, j, Rule::CallAway, RelationLabel::CallAway, false);
        match self.state.mode {
            Mode::Bilateral => self.state.phase = Phase::Disagreement,
            Mode::Auction { .. } => self.withdrawn[if i == 0 { j } else { i }] = true,
        }
    }

    fn rule_entry(
        &self,
        i: usize,
        role: SpeakerRole,
        x: Option<Abbrev>,
        y: Abbrev,
    ) -> Result<(Rule, bool), EngineError> {
        RuleTable::lookup(role, x, y)
            .map(|e| (e.rule, e.violation))
            .ok_or_else(|| EngineError::NoLegalRule {
                beat: self.state.beat,
                speaker: self.id(i),
                rule: match x {
                    Some(x) => format!("{}-{}", x.as_str(), y.as_str()),
                    None => y.as_str().to_string(),
                },
            })
    }

    /// Evaluation of an opening bid. Returns true when `i` re-initiated with (I),
    /// in which case no system transition follows.
    pub fn second_proposer_step(&mut self, i: usize, j: usize) -> Result<bool, EngineError> {
        self.second_pending[i] = false;
        let p = self.received(i, j)?;
        let pm = self.ws.models(&p);
        let role = match self.state.mode {
            Mode::Bilateral => Role::SecondProposer,
            Mode::Auction { .. } => Role::Following,
        };
        let label = classify_models(&self.stubs[i], &self.caf_models(i), &pm, role);
        match label {
            RelationLabel::CallAway => self.call_away(i, j),
            RelationLabel::Restrictive => {
                let f = self.state.caf[i].current.clone();
                self.propose(i, Rule::I, f);
                self.second_pending[j] = true;
                return Ok(true);
            }
            RelationLabel::Agree | RelationLabel::RelDis if pm.is_subset(&self.stubs[i]) => {
                let (rule, violation) =
                    self.rule_entry(i, SpeakerRole::SecondProposer, None, Abbrev::Ag)?;
                self.evaluate(i, j, rule, RelationLabel::Agree, violation);
                self.adopt(i, p);
            }
            // Only reachable after (I). A relDis assertion forces the peer to
            // adopt, so it must hold of the angle actually left on the table:
            // move first, then evaluate against the new CAF.
            RelationLabel::RelDis => {
                match self.counter(i, &p, label)? {
                    Choice::Move(c) => self.apply(i, c),
                    Choice::Keep => unreachable!("keeping needs an adoptable proposal"),
                }
                let y = classify_models(&self.stubs[i], &self.caf_models(i), &pm, Role::Following);
                let abbrev = Abbrev::of(y).expect("evaluation label");
                let (rule, violation) =
                    self.rule_entry(i, SpeakerRole::SecondProposer, None, abbrev)?;
                self.evaluate(i, j, rule, y, violation);
                if y == RelationLabel::Agree {
                    self.adopt(i, p);
                }
            }
            other => {
                let y = Abbrev::of(other).expect("evaluation label");
                let (rule, violation) = self.rule_entry(i, SpeakerRole::SecondProposer, None, y)?;
                self.evaluate(i, j, rule, other, violation);
                match self.counter(i, &p, other)? {
                    Choice::Move(c) => self.apply(i, c),
                    Choice::Keep => unreachable!("keeping needs an adoptable proposal"),
                }
            }
        }
        Ok(false)
    }

    /// A reply to `j`'s latest proposal and evaluation of `i`.
    pub fn following_step(&mut self, i: usize, j: usize) -> Result<(), EngineError> {
        let received = self
            .state
            .last_label
            .get(&(self.id(j), self.id(i)))
            .copied();
        let Some(x) = received.and_then(Abbrev::of) else {
            return Err(EngineError::NoLegalRule {
                beat: self.state.beat,
                speaker: self.id(i),
                rule: format!("a reply to {:?}", received.map(|l| l.as_str())),
            });
        };
        let p = self.received(i, j)?;
        let pm = self.ws.models(&p);
        let stub = self.stubs[i].clone();
        if stub.is_proper_subset(&pm) {
            self.call_away(i, j);
            return Ok(());
        }
        let forced = x == Abbrev::RD || (x == Abbrev::Ag && self.caf_models(i).is_subset(&pm));
        if forced {
            let (rule, violation) =
                self.rule_entry(i, SpeakerRole::Participant, Some(x), Abbrev::Ag)?;
            self.evaluate(i, j, rule, RelationLabel::Agree, violation);
            self.adopt(i, p);
            return Ok(());
        }
        let situation = classify_models(&stub, &self.caf_models(i), &pm, Role::Following);
        let kept = match self.counter(i, &p, situation)? {
            Choice::Move(c) => {
                self.apply(i, c);
                false
            }
            Choice::Keep => true,
        };
        let y = classify_models(&stub, &self.caf_models(i), &pm, Role::Following);
        let adopt = match y {
            RelationLabel::Agree => true,
            RelationLabel::RelDis => {
                kept || (self.agents[i].attitude() == Attitude::Collaborative
                    && pm.is_subset(&stub))
            }
            _ => false,
        };
        let asserted = if adopt { RelationLabel::Agree } else { y };
        let (rule, violation) = self.rule_entry(
            i,
            SpeakerRole::Participant,
            Some(x),
            Abbrev::of(asserted).expect("evaluation label"),
        )?;
        self.evaluate(i, j, rule, asserted, violation);
        if adopt {
            self.adopt(i, p);
        }
        Ok(())
    }

    /// One auctioneer proposal followed by an evaluation of every active participant.
    pub fn auctioneer_step(&mut self) -> Result<(), EngineError> {
        let active: Vec<usize> = (1..self.agents.len())
            .filter(|&k| !self.withdrawn[k])
            .collect();
        let received = active
            .iter()
            .map(|&k| self.received(0, k))
            .collect::<Result<Vec<_>, _>>()?;
        let choice = self.pick(0, |me| {
            Choice::Move(choose_next_multi(
                &me.state.caf[0],
                &me.agents[0],
                &received,
                &me.ws,
            ))
        })?;
        if let Choice::Move(c) = choice {
            self.apply(0, c);
        }
        let stub = self.stubs[0].clone();
        let cur = self.caf_models(0);
        for (&k, p) in active.iter().zip(&received) {
            let pm = self.ws.models(p);
            if stub.is_proper_subset(&pm) {
                self.call_away(0, k);
                continue;
            }
            let x = self
                .state
                .last_label
                .get(&(self.id(k), self.id(0)))
                .copied()
                .and_then(Abbrev::of)
                .ok_or_else(|| EngineError::NoLegalRule {
                    beat: self.state.beat,
                    speaker: self.id(0),
                    rule: format!("a reply to {}", self.id(k)),
                })?;
            let y = classify_models(&stub, &cur, &pm, Role::Following);
            let (rule, violation) = self.rule_entry(
                0,
                SpeakerRole::Auctioneer,
                Some(x),
                Abbrev::of(y).expect("evaluation label"),
            )?;
            self.evaluate(0, k, rule, y, violation);
        }
        Ok(())
    }

    fn bilateral_transition(&mut self, s: usize, o: usize) {
        if self.asserted[s] == Some(RelationLabel::Agree) {
            let f = self.state.caf[o].current.clone();
            self.state.agreeing = [self.id(0), self.id(1)].into();
            self.system(Rule::A, Some(f.clone()));
            self.state.phase = Phase::Agreement(f);
        } else if self.at_stub(s) && self.at_stub(o) {
            self.system(Rule::D, None);
            self.state.phase = Phase::Disagreement;
        } else {
            self.system(Rule::N, None);
        }
    }

    fn auction_transition(&mut self) {
        let Mode::Auction {
            alpha,
            passive_auctioneer,
        } = self.state.mode
        else {
            unreachable!("auction transition in bilateral mode")
        };
        let mut agreeing = BTreeSet::new();
        if !passive_auctioneer {
            agreeing.insert(self.id(0));
        }
        for k in 1..self.agents.len() {
            if self.asserted[k] == Some(RelationLabel::Agree) {
                agreeing.insert(self.id(k));
            }
        }
        let quiescent = self.at_stub(0)
            && (1..self.agents.len()).all(|k| {
                self.withdrawn[k] || self.at_stub(k) || agreeing.contains(self.agents[k].id())
            });
        if agreeing.len() >= alpha {
            let f = self.state.caf[0].current.clone();
            self.system(Rule::AA, Some(f.clone()));
            self.state.phase = Phase::Agreement(f);
            self.state.agreeing = agreeing;
        } else if quiescent {
            self.system(Rule::DD, None);
            self.state.phase = Phase::Disagreement;
            self.state.agreeing.clear();
        } else {
            self.system(Rule::NN, None);
            self.state.agreeing = agreeing;
        }
    }
}

/// Convenience wrapper: initialize and run to completion.
pub fn run(
    agents: Vec<AgentSpec>,
    mode: Mode,
    ws: WorldSet,
    max_beats: usize,
) -> Result<Outcome, EngineError> {
    Negotiation::init(agents, mode, ws)?.run(max_beats)
}
