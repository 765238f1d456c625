//! Independent replay of a trace against the deduction rules.
//!
//! The checker re-derives every guard from the scenario and the proposals
//! recorded in the trace: move legality, the relation behind each label, the
//! rule table entry and its violation flag, adoptions, turn order and the
//! system transitions. Attitudes are not checked; any legal choice passes.

use std::collections::BTreeMap;
use std::fmt;

use crate::agent::{translate, AgentSpec, ProposalRuleTag};
use crate::engine::Mode;
use crate::logic::{Formula, Models, WorldSet};
use crate::relation::{classify_models, RelationLabel, Role};
use crate::rules::{Abbrev, Rule, RuleTable, SpeakerRole};
use crate::trace::{EventKind, TerminalPhase, TraceEvent, TraceFooter, SYSTEM};

/// The first failing event. `event` is a 0-based index into the trace; the
/// footer counts as the event after the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyError {
    pub beat: usize,
    pub event: usize,
    pub reason: String,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "beat {}, event {}: {}",
            self.beat, self.event, self.reason
        )
    }
}

impl std::error::Error for VerifyError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Terminal {
    Agreement(Models, Vec<usize>),
    Disagreement,
}

enum TurnEnd {
    Normal,
    Reinitiated,
    CalledAway,
}

struct Replay<'a> {
    agents: &'a [AgentSpec],
    ws: &'a WorldSet,
    events: &'a [TraceEvent],
    pos: usize,
    beat: usize,
    stubs: Vec<Models>,
    caf: Vec<Formula>,
    held: Vec<Vec<Models>>,
    last: BTreeMap<(usize, usize), RelationLabel>,
    withdrawn: Vec<bool>,
    pending: Vec<bool>,
    asserted: Vec<Option<RelationLabel>>,
}

type Check<T> = Result<T, VerifyError>;

pub fn verify(
    agents: &[AgentSpec],
    ws: &WorldSet,
    mode: Mode,
    events: &[TraceEvent],
    footer: Option<&TraceFooter>,
) -> Result<(), VerifyError> {
    let n = agents.len();
    let mut r = Replay {
        agents,
        ws,
        events,
        pos: 0,
        beat: 0,
        stubs: agents
            .iter()
            .map(|a| ws.models(&a.stub_formula()))
            .collect(),
        caf: agents.iter().map(|a| a.angles()[0].clone()).collect(),
        held: agents
            .iter()
            .map(|a| vec![ws.models(&a.angles()[0])])
            .collect(),
        last: BTreeMap::new(),
        withdrawn: vec![false; n],
        pending: (0..n).map(|i| i != 0).collect(),
        asserted: vec![None; n],
    };
    let terminal = match mode {
        Mode::Bilateral => r.bilateral()?,
        Mode::Auction {
            alpha,
            passive_auctioneer,
        } => r.auction(alpha, passive_auctioneer)?,
    };
    if r.pos < events.len() {
        return Err(r.fail("event after the terminal transition"));
    }
    r.check_footer(&terminal, footer)
}

impl<'a> Replay<'a> {
    fn fail(&self, reason: impl Into<String>) -> VerifyError {
        let beat = self.events.get(self.pos).map_or(self.beat, |e| e.beat);
        VerifyError {
            beat,
            event: self.pos,
            reason: reason.into(),
        }
    }

    fn id(&self, i: usize) -> &str {
        self.agents[i].id()
    }

    fn models(&self, f: &Formula) -> Check<Models> {
        self.ws
            .try_models(f)
            .map_err(|e| self.fail(format!("formula `{f}`: {e}")))
    }

    fn cur(&self, i: usize) -> Models {
        self.ws.models(&self.caf[i])
    }

    fn received(&self, to: usize, from: usize) -> Check<Models> {
        let f = translate(&self.agents[to], self.id(from), &self.caf[from])
            .map_err(|e| self.fail(e.to_string()))?;
        self.models(&f)
    }

    fn peek(&self) -> Check<&'a TraceEvent> {
        self.events
            .get(self.pos)
            .ok_or_else(|| self.fail("trace ends before a terminal transition"))
    }

    /// Takes the next event, checking beat, speaker, kind and payload shape.
    fn take(&mut self, speaker: Option<usize>, kind: EventKind) -> Check<&'a TraceEvent> {
        let e = self.peek()?;
        let expected = speaker.map_or(SYSTEM, |i| self.id(i));
        if e.beat != self.beat {
            return Err(self.fail(format!("expected beat {}, found {}", self.beat, e.beat)));
        }
        if e.speaker != expected {
            return Err(self.fail(format!("expected {expected} to speak, found {}", e.speaker)));
        }
        if e.kind != kind {
            return Err(self.fail(format!("expected a {kind:?} event, found {:?}", e.kind)));
        }
        let shape_ok = match kind {
            EventKind::Proposal => {
                e.formula.is_some() && e.label.is_none() && e.target.is_none() && !e.violation
            }
            EventKind::Evaluation => e.formula.is_none() && e.label.is_some() && e.target.is_some(),
            EventKind::System => {
                e.label.is_none()
                    && e.target.is_none()
                    && !e.violation
                    && e.formula.is_some() == matches!(e.rule, Rule::A | Rule::AA)
            }
        };
        if !shape_ok {
            return Err(self.fail("malformed event payload"));
        }
        self.pos += 1;
        Ok(e)
    }

    fn formula_of(&self, i: usize, e: &TraceEvent) -> Check<(Formula, Models)> {
        let f = e.formula.clone().expect("proposal shape checked");
        f.check(self.agents[i].sig())
            .map_err(|err| self.back(format!("formula `{f}`: {err}")))?;
        let m = self
            .ws
            .try_models(&f)
            .map_err(|err| self.back(format!("formula `{f}`: {err}")))?;
        Ok((f, m))
    }

    fn set_caf(&mut self, i: usize, f: Formula, m: Models) {
        self.caf[i] = f;
        self.held[i].push(m);
    }

    /// A (W), (C) or (S) move by `i`.
    fn check_move(&mut self, i: usize, e: &TraceEvent) -> Check<()> {
        let Rule::Move(tag) = e.rule else {
            return Err(self.back(format!("rule {} is not a proposal rule", e.rule)));
        };
        let (f, m) = self.formula_of(i, e)?;
        let cur = self.cur(i);
        let stub = &self.stubs[i];
        let a = &self.agents[i];
        let expected = if cur == *stub {
            if m != cur {
                return Err(self.back("an agent at its stub may only repeat it"));
            }
            ProposalRuleTag::S
        } else {
            let is_angle = a.angles().iter().any(|g| self.ws.models(g) == m);
            if m != *stub && !is_angle {
                return Err(self.back(format!("`{f}` is not a declared angle of {}", a.id())));
            }
            if m != *stub && self.held[i].contains(&m) {
                return Err(self.back(format!("`{f}` was already held by {}", a.id())));
            }
            if cur.is_proper_subset(&m) {
                ProposalRuleTag::W
            } else if !cur.is_subset(&m) && !m.is_subset(&cur) {
                ProposalRuleTag::C
            } else {
                return Err(self.back(format!("`{f}` is neither a weakening nor a change")));
            }
        };
        if tag != expected {
            return Err(self.back(format!("move is a ({expected}), labelled ({tag})")));
        }
        self.set_caf(i, f, m);
        Ok(())
    }

    fn check_adopt(&mut self, i: usize, pm: &Models) -> Check<()> {
        let e = self.take(Some(i), EventKind::Proposal)?;
        if e.rule != Rule::Adopt {
            return Err(self.back(format!("expected an adoption, found ({})", e.rule)));
        }
        let (f, m) = self.formula_of(i, e)?;
        if m != *pm {
            return Err(self.back("adopted formula differs from the received proposal"));
        }
        self.set_caf(i, f, m);
        Ok(())
    }

    fn evaluation(&mut self, i: usize, j: usize) -> Check<&'a TraceEvent> {
        let e = self.take(Some(i), EventKind::Evaluation)?;
        if e.target.as_deref() != Some(self.id(j)) {
            return Err(self.back(format!("evaluation should target {}", self.id(j))));
        }
        Ok(e)
    }

    fn check_entry(
        &mut self,
        e: &TraceEvent,
        role: SpeakerRole,
        x: Option<Abbrev>,
        y: Abbrev,
    ) -> Check<()> {
        match RuleTable::lookup(role, x, y) {
            None => Err(self.back(format!("rule {} not permitted for role {role:?}", e.rule))),
            Some(entry) if entry.violation != e.violation => Err(self.back(format!(
                "violation flag of {} should be {}",
                e.rule, entry.violation
            ))),
            Some(_) => Ok(()),
        }
    }

    /// Fails at the previous event (the one just taken).
    fn back(&self, reason: impl Into<String>) -> VerifyError {
        let mut err = VerifyError {
            beat: self.beat,
            event: self.pos - 1,
            reason: reason.into(),
        };
        if let Some(e) = self.events.get(self.pos - 1) {
            err.beat = e.beat;
        }
        err
    }

    fn record(&mut self, i: usize, j: usize, label: RelationLabel) {
        self.last.insert((i, j), label);
        self.asserted[i] = Some(label);
    }

    fn call_away(&mut self, i: usize, j: usize, e: &TraceEvent, bilateral: bool) -> Check<TurnEnd> {
        if e.label != Some(RelationLabel::CallAway) || e.violation {
            return Err(self.back("call-away must carry label callAway and no violation"));
        }
        if !self.stubs[i].is_proper_subset(&self.received(i, j)?) {
            return Err(
                self.back("call-away declared but the proposal does not generalize the stub")
            );
        }
        self.record(i, j, RelationLabel::CallAway);
        if !bilateral {
            self.withdrawn[if i == 0 { j } else { i }] = true;
        }
        Ok(TurnEnd::CalledAway)
    }

    fn second_proposer(&mut self, i: usize, j: usize, bilateral: bool) -> Check<TurnEnd> {
        let pm = self.received(i, j)?;
        let role = if bilateral {
            Role::SecondProposer
        } else {
            Role::Following
        };
        let expected = classify_models(&self.stubs[i], &self.cur(i), &pm, role);
        self.pending[i] = false;
        let first = self.peek()?;
        if first.kind == EventKind::Proposal && first.rule == Rule::I {
            let e = self.take(Some(i), EventKind::Proposal)?;
            if expected != RelationLabel::Restrictive {
                return Err(self.back(format!(
                    "(I) needs a stricter opening; the relation is {expected}"
                )));
            }
            let (_, m) = self.formula_of(i, e)?;
            if m != self.cur(i) {
                return Err(self.back("(I) must repeat the current angle"));
            }
            self.pending[j] = true;
            return Ok(TurnEnd::Reinitiated);
        }
        if first.kind == EventKind::Proposal {
            return self.second_proposer_moving(i, j, expected, &pm);
        }
        let e = self.evaluation(i, j)?;
        if e.rule == Rule::CallAway {
            return self.call_away(i, j, e, bilateral);
        }
        if expected == RelationLabel::CallAway {
            return Err(self.back("the opening calls away the stub"));
        }
        let Rule::Open(y) = e.rule else {
            return Err(self.back(format!(
                "rule {} not permitted for a second proposer",
                e.rule
            )));
        };
        self.check_entry(e, SpeakerRole::SecondProposer, None, y)?;
        if e.label != Some(y.label()) {
            return Err(self.back(format!("rule {} must carry label {}", e.rule, y.label())));
        }
        let inside = pm.is_subset(&self.stubs[i]);
        let fits = match y {
            Abbrev::Ag => {
                matches!(expected, RelationLabel::Agree | RelationLabel::RelDis) && inside
            }
            Abbrev::RD => expected == RelationLabel::RelDis && !inside,
            _ => expected == y.label(),
        };
        if !fits {
            return Err(self.back(format!(
                "false label: the relation is {expected}, not {}",
                y.label()
            )));
        }
        self.record(i, j, y.label());
        if y == Abbrev::Ag {
            self.check_adopt(i, &pm)?;
        } else {
            let m = self.take(Some(i), EventKind::Proposal)?;
            self.check_move(i, m)?;
        }
        Ok(TurnEnd::Normal)
    }

    /// A second proposer facing a relDis opening it cannot adopt moves first
    /// and evaluates against its new angle.
    fn second_proposer_moving(
        &mut self,
        i: usize,
        j: usize,
        expected: RelationLabel,
        pm: &Models,
    ) -> Check<TurnEnd> {
        let m = self.take(Some(i), EventKind::Proposal)?;
        if expected != RelationLabel::RelDis || pm.is_subset(&self.stubs[i]) {
            return Err(self.back(format!(
                "a second proposer evaluates before moving unless the opening is an unadoptable relDis; it is {expected}"
            )));
        }
        self.check_move(i, m)?;
        let e = self.evaluation(i, j)?;
        let Rule::Open(y) = e.rule else {
            return Err(self.back(format!(
                "rule {} not permitted for a second proposer",
                e.rule
            )));
        };
        self.check_entry(e, SpeakerRole::SecondProposer, None, y)?;
        let now = classify_models(&self.stubs[i], &self.cur(i), pm, Role::Following);
        if e.label != Some(y.label()) || now != y.label() {
            return Err(self.back(format!(
                "false label: the relation is {now}, not {}",
                y.label()
            )));
        }
        self.record(i, j, y.label());
        if y == Abbrev::Ag {
            self.check_adopt(i, pm)?;
        }
        Ok(TurnEnd::Normal)
    }

    fn following(&mut self, i: usize, j: usize, bilateral: bool) -> Check<TurnEnd> {
        let Some(x) = self.last.get(&(j, i)).copied().and_then(Abbrev::of) else {
            return Err(self.fail(format!("{} has no evaluation to answer", self.id(i))));
        };
        let pm = self.received(i, j)?;
        let stub = self.stubs[i].clone();
        let old = self.cur(i);
        let mut moved = false;
        let mut e = self.peek()?;
        if e.kind == EventKind::Proposal {
            let m = self.take(Some(i), EventKind::Proposal)?;
            self.check_move(i, m)?;
            moved = true;
        }
        e = self.evaluation(i, j)?;
        if e.rule == Rule::CallAway {
            if moved {
                return Err(self.back("call-away after a move"));
            }
            return self.call_away(i, j, e, bilateral);
        }
        if stub.is_proper_subset(&pm) {
            return Err(self.back("the proposal calls away the stub"));
        }
        let Rule::Pair(x2, y) = e.rule else {
            return Err(self.back(format!(
                "rule {} not permitted for role Participant",
                e.rule
            )));
        };
        self.check_entry(e, SpeakerRole::Participant, Some(x2), y)?;
        if x2 != x {
            return Err(self.back(format!(
                "rule {} answers {}, but the last label received was {}",
                e.rule,
                x2.as_str(),
                x.label()
            )));
        }
        if e.label != Some(y.label()) {
            return Err(self.back(format!("rule {} must carry label {}", e.rule, y.label())));
        }
        let forced = x == Abbrev::RD || (x == Abbrev::Ag && old.is_subset(&pm));
        let now = classify_models(&stub, &self.cur(i), &pm, Role::Following);
        if y == Abbrev::Ag {
            if forced && moved {
                return Err(self.back("a forced agreement admits no move"));
            }
            if !forced {
                if !matches!(now, RelationLabel::Agree | RelationLabel::RelDis)
                    || !pm.is_subset(&stub)
                {
                    return Err(self.back(format!("false label: the relation is {now}, not agree")));
                }
                if !moved && old == stub {
                    return Err(self.back("an agent at its stub must repeat it"));
                }
            }
            self.record(i, j, RelationLabel::Agree);
            self.check_adopt(i, &pm)?;
        } else {
            if forced {
                return Err(self.back(format!("after {} the agent must agree", x.as_str())));
            }
            if !moved {
                return Err(self.back("a disagreeing reply needs a new proposal"));
            }
            if now != y.label() {
                return Err(self.back(format!(
                    "false label: the relation is {now}, not {}",
                    y.label()
                )));
            }
            self.record(i, j, y.label());
        }
        Ok(TurnEnd::Normal)
    }

    fn bilateral(&mut self) -> Check<Terminal> {
        let e = self.take(Some(0), EventKind::Proposal)?;
        if e.rule != Rule::Bid {
            return Err(self.back("the negotiation opens with a bid"));
        }
        let (_, m) = self.formula_of(0, e)?;
        if m != self.cur(0) {
            return Err(self.back("the bid must be the first angle"));
        }
        loop {
            self.beat += 1;
            self.asserted.iter_mut().for_each(|a| *a = None);
            let (s, o) = (self.beat % 2, 1 - self.beat % 2);
            let end = if self.pending[s] {
                self.second_proposer(s, o, true)?
            } else {
                self.following(s, o, true)?
            };
            match end {
                TurnEnd::Reinitiated => continue,
                TurnEnd::CalledAway => return Ok(Terminal::Disagreement),
                TurnEnd::Normal => {}
            }
            let e = self.take(None, EventKind::System)?;
            let (rule, terminal) = if self.asserted[s] == Some(RelationLabel::Agree) {
                (Rule::A, Some(Terminal::Agreement(self.cur(o), vec![0, 1])))
            } else if self.cur(s) == self.stubs[s] && self.cur(o) == self.stubs[o] {
                (Rule::D, Some(Terminal::Disagreement))
            } else {
                (Rule::N, None)
            };
            if e.rule != rule {
                return Err(self.back(format!(
                    "system transition should be ({rule}), found ({})",
                    e.rule
                )));
            }
            if let Some(f) = &e.formula {
                if self.models(f)? != self.cur(o) {
                    return Err(self.back("agreement outcome differs from the accepted proposal"));
                }
            }
            if let Some(t) = terminal {
                return Ok(t);
            }
        }
    }

    fn auctioneer(&mut self) -> Check<()> {
        let e = self.take(Some(0), EventKind::Proposal)?;
        self.check_move(0, e)?;
        let stub = self.stubs[0].clone();
        let cur = self.cur(0);
        for k in 1..self.agents.len() {
            if self.withdrawn[k] {
                continue;
            }
            let pm = self.received(0, k)?;
            let e = self.evaluation(0, k)?;
            if e.rule == Rule::CallAway {
                self.call_away(0, k, e, false)?;
                continue;
            }
            if stub.is_proper_subset(&pm) {
                return Err(self.back(format!(
                    "the proposal of {} calls away the stub",
                    self.id(k)
                )));
            }
            let Some(x) = self.last.get(&(k, 0)).copied().and_then(Abbrev::of) else {
                return Err(self.back(format!("{} has no evaluation to answer", self.id(k))));
            };
            let Rule::Pair(x2, y) = e.rule else {
                return Err(self.back(format!("rule {} not permitted for role Auctioneer", e.rule)));
            };
            self.check_entry(e, SpeakerRole::Auctioneer, Some(x2), y)?;
            if x2 != x {
                return Err(self.back(format!(
                    "rule {} answers {}, but the last label received was {}",
                    e.rule,
                    x2.as_str(),
                    x.label()
                )));
            }
            let now = classify_models(&stub, &cur, &pm, Role::Following);
            if e.label != Some(y.label()) || now != y.label() {
                return Err(self.back(format!(
                    "false label: the relation is {now}, not {}",
                    y.label()
                )));
            }
            self.record(0, k, now);
        }
        Ok(())
    }

    fn auction(&mut self, alpha: usize, passive: bool) -> Check<Terminal> {
        let n = self.agents.len();
        loop {
            self.asserted.iter_mut().for_each(|a| *a = None);
            if self.beat == 0 {
                let e = self.take(Some(0), EventKind::Proposal)?;
                if e.rule != Rule::Bid {
                    return Err(self.back("the auction opens with a bid"));
                }
                let (_, m) = self.formula_of(0, e)?;
                if m != self.cur(0) {
                    return Err(self.back("the bid must be the first angle"));
                }
                for k in 1..n {
                    self.second_proposer(k, 0, false)?;
                }
            } else {
                self.auctioneer()?;
                for k in 1..n {
                    if !self.withdrawn[k] {
                        self.following(k, 0, false)?;
                    }
                }
            }
            let mut agreeing: Vec<usize> = if passive { vec![] } else { vec![0] };
            agreeing.extend((1..n).filter(|&k| self.asserted[k] == Some(RelationLabel::Agree)));
            let quiescent = self.cur(0) == self.stubs[0]
                && (1..n).all(|k| {
                    self.withdrawn[k] || self.cur(k) == self.stubs[k] || agreeing.contains(&k)
                });
            let e = self.take(None, EventKind::System)?;
            let (rule, terminal) = if agreeing.len() >= alpha {
                (Rule::AA, Some(Terminal::Agreement(self.cur(0), agreeing)))
            } else if quiescent {
                (Rule::DD, Some(Terminal::Disagreement))
            } else {
                (Rule::NN, None)
            };
            if e.rule != rule {
                return Err(self.back(format!(
                    "system transition should be ({rule}), found ({})",
                    e.rule
                )));
            }
            if let Some(f) = &e.formula {
                if self.models(f)? != self.cur(0) {
                    return Err(
                        self.back("agreement outcome differs from the auctioneer's proposal")
                    );
                }
            }
            if let Some(t) = terminal {
                return Ok(t);
            }
            self.beat += 1;
        }
    }

    fn check_footer(&self, terminal: &Terminal, footer: Option<&TraceFooter>) -> Check<()> {
        let Some(footer) = footer else {
            return Err(self.fail("missing terminal line"));
        };
        let (phase, outcome, agreeing) = match terminal {
            Terminal::Agreement(m, who) => (TerminalPhase::Agreement, Some(m), who.clone()),
            Terminal::Disagreement => (TerminalPhase::Disagreement, None, vec![]),
        };
        if footer.phase != phase {
            return Err(self.fail(format!(
                "terminal line says {:?}, the trace ends in {phase:?}",
                footer.phase
            )));
        }
        match (&footer.outcome, outcome) {
            (None, None) => {}
            (Some(f), Some(m)) if self.models(f)? == *m => {}
            _ => return Err(self.fail("terminal outcome does not match the agreement")),
        }
        let ids: Vec<&str> = agreeing.iter().map(|&k| self.id(k)).collect();
        if footer.agreeing != ids {
            return Err(self.fail(format!("agreeing agents should be {ids:?}")));
        }
        Ok(())
    }
}
