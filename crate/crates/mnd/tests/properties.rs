mod common;

use common::{brute_models, subset, RandomCase};
use mnd::agent::{legal_successors, AgentSpec, CafState, ProposalRuleTag, StepTag};
use mnd::engine::Mode;
use mnd::logic::{Formula, Models, Signature, WorldSet};
use mnd::relation::{classify_models, RelationLabel, Role};
use mnd::rules::{Abbrev, Rule, RuleTable, SpeakerRole};
use mnd::trace::{to_jsonl, EventKind, SYSTEM};
use proptest::prelude::*;

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

fn atoms() -> Vec<String> {
    ATOMS.iter().map(|s| s.to_string()).collect()
}

fn full() -> WorldSet {
    WorldSet::full(Signature::from_names(ATOMS).unwrap()).unwrap()
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop::sample::select(ATOMS.to_vec()).prop_map(Formula::atom);
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| Formula::and(f, g)),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| Formula::or(f, g)),
            (inner.clone(), inner).prop_map(|(f, g)| Formula::implies(f, g)),
        ]
    })
}

/// Library model set as a bitmask in the oracle's world numbering.
fn mask(ws: &WorldSet, f: &Formula) -> u64 {
    let n = ATOMS.len();
    ws.models(f)
        .iter()
        .map(|w| {
            let vals = ws.values(w);
            let code = (0..n).fold(0u64, |acc, k| acc << 1 | vals[k] as u64);
            1u64 << code
        })
        .sum()
}

fn models8(bits: u8) -> Models {
    Models::from_indices(8, (0..8).filter(|k| bits >> k & 1 == 1))
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(f in formula()) {
        let text = f.to_string();
        prop_assert_eq!(Formula::parse(&text).unwrap(), f);
    }

    #[test]
    fn models_match_truth_tables(f in formula()) {
        let ws = full();
        prop_assert_eq!(mask(&ws, &f), brute_models(&f, &atoms()));
    }

    #[test]
    fn entailment_is_model_inclusion(f in formula(), g in formula()) {
        let ws = full();
        let (mf, mg) = (brute_models(&f, &atoms()), brute_models(&g, &atoms()));
        prop_assert_eq!(ws.entails(&f, &g), subset(mf, mg));
        prop_assert_eq!(ws.equivalent(&f, &g), ws.entails(&f, &g) && ws.entails(&g, &f));
        prop_assert_eq!(ws.consistent(&f, &g), mf & mg != 0);
    }

    #[test]
    fn classical_laws(f in formula(), g in formula()) {
        let ws = full();
        let and = Formula::and(f.clone(), g.clone());
        let de_morgan = Formula::or(Formula::not(f.clone()), Formula::not(g.clone()));
        prop_assert!(ws.equivalent(&Formula::not(and), &de_morgan));
        let material = Formula::or(Formula::not(f.clone()), g.clone());
        prop_assert!(ws.equivalent(&Formula::implies(f.clone(), g), &material));
        prop_assert!(ws.equivalent(&Formula::not(Formula::not(f.clone())), &f));
    }

    #[test]
    fn classification_is_total_and_exclusive(s in 1u8.., f in 1u8.., p in 1u8.., second in any::<bool>()) {
        let f = f & s;
        prop_assume!(f != 0);
        let role = if second { Role::SecondProposer } else { Role::Following };
        let label = classify_models(&models8(s), &models8(f), &models8(p), role);
        let strict = |a: u8, b: u8| a != b && a & !b == 0;
        let holds = |l: RelationLabel| match l {
            RelationLabel::CallAway => strict(s, p),
            RelationLabel::Restrictive => second && strict(p, f),
            RelationLabel::AbsDis => s & p == 0,
            RelationLabel::EssDis => f & p == 0,
            RelationLabel::RelDis => strict(f, p),
            RelationLabel::Agree => f & !p == 0,
            RelationLabel::Comp => true,
        };
        prop_assert!(holds(label), "{label} does not hold");
        let order = [
            RelationLabel::CallAway,
            RelationLabel::Restrictive,
            RelationLabel::AbsDis,
            RelationLabel::EssDis,
            RelationLabel::RelDis,
            RelationLabel::Agree,
        ];
        // Nothing earlier in the cascade applies.
        for earlier in order.iter().take_while(|l| **l != label) {
            prop_assert!(!holds(*earlier), "{earlier} applies before {label}");
        }
    }

    #[test]
    fn an_equivalent_proposal_is_agreement(s in 1u8.., f in 1u8.., second in any::<bool>()) {
        let f = f & s;
        prop_assume!(f != 0);
        let role = if second { Role::SecondProposer } else { Role::Following };
        prop_assert_eq!(classify_models(&models8(s), &models8(f), &models8(f), role), RelationLabel::Agree);
    }

    #[test]
    fn successors_respect_the_proposal_rules(seed in any::<u64>()) {
        let case = RandomCase::generate(seed);
        let ws = case.world_set();
        for a in case.agents() {
            let stub = ws.models(&a.stub_formula());
            let mut c = CafState::new(&a);
            // Walk a few steps, always taking the last candidate.
            for _ in 0..6 {
                let cur = ws.models(&c.current);
                let succ = legal_successors(&c, &a, &ws);
                prop_assert!(!succ.is_empty());
                for g in &succ {
                    let m = ws.models(&g.formula);
                    prop_assert!(m.is_subset(&stub));
                    match g.tag {
                        ProposalRuleTag::W => prop_assert!(cur.is_proper_subset(&m)),
                        ProposalRuleTag::C => prop_assert!(!cur.is_subset(&m) && !m.is_subset(&cur)),
                        ProposalRuleTag::S => prop_assert!(m == cur && cur == stub),
                    }
                }
                if cur == stub {
                    prop_assert_eq!(succ.len(), 1);
                }
                let g = succ.last().unwrap().clone();
                c.step(StepTag::Rule(g.tag), g.formula);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(seed in 0u64..2000) {
        let case = RandomCase::generate(seed);
        let (a, b) = (case.run(), case.run());
        prop_assert_eq!(to_jsonl(&a.trace, Some(&a.footer())), to_jsonl(&b.trace, Some(&b.footer())));
    }

    #[test]
    fn lowering_alpha_never_delays_agreement(seed in 0u64..2000) {
        let mut case = RandomCase::generate(seed);
        let Mode::Auction { alpha, .. } = case.mode else { return Ok(()) };
        let high = case.run();
        if !high.is_agreement() {
            return Ok(());
        }
        for lower in 1..alpha {
            case.mode = Mode::Auction { alpha: lower, passive_auctioneer: false };
            let low = case.run();
            prop_assert!(low.is_agreement(), "alpha {lower} disagrees where {alpha} agrees");
            prop_assert!(low.beats <= high.beats);
        }
    }

    #[test]
    fn violations_are_exactly_the_flagged_rules(seed in 0u64..2000) {
        let case = RandomCase::generate(seed);
        let out = case.run();
        let auction = matches!(case.mode, Mode::Auction { .. });
        for e in out.trace.iter().filter(|e| e.kind == EventKind::Evaluation) {
            prop_assert_ne!(e.speaker.as_str(), SYSTEM);
            let expected = match e.rule {
                Rule::Pair(x, y) => {
                    let role = if auction && e.speaker == "x0" { SpeakerRole::Auctioneer } else { SpeakerRole::Participant };
                    let entry = RuleTable::lookup(role, Some(x), y);
                    prop_assert!(entry.is_some(), "{} not permitted", e.rule);
                    let participant = matches!((x, y), (Abbrev::ED, Abbrev::AD) | (Abbrev::ED, Abbrev::Co));
                    prop_assert!(role == SpeakerRole::Auctioneer || entry.unwrap().violation == participant);
                    entry.unwrap().violation
                }
                _ => false,
            };
            prop_assert_eq!(e.violation, expected, "{}", e.rule);
        }
        for e in out.trace.iter().filter(|e| e.kind != EventKind::Evaluation) {
            prop_assert!(!e.violation);
        }
    }

    #[test]
    fn every_caf_stays_inside_the_stub(seed in 0u64..2000) {
        let case = RandomCase::generate(seed);
        let out = case.run();
        let ids = case.ids();
        for e in out.trace.iter().filter(|e| e.kind == EventKind::Proposal) {
            let x = ids.iter().position(|i| *i == e.speaker).unwrap();
            let m = brute_models(e.formula.as_ref().unwrap(), &case.atoms);
            prop_assert!(subset(m, case.stubs[x]), "seed {seed}: {} leaves its stub", e.speaker);
        }
    }
}

#[test]
fn an_agent_at_its_stub_only_repeats_it() {
    let sig = Signature::from_names(ATOMS).unwrap();
    let a = AgentSpec::new(
        "x",
        sig,
        vec![Formula::parse("a | b").unwrap()],
        vec![Formula::parse("a").unwrap()],
    )
    .unwrap();
    let ws = full();
    let mut c = CafState::new(&a);
    c.step(StepTag::Rule(ProposalRuleTag::W), a.stub_formula());
    let succ = legal_successors(&c, &a, &ws);
    assert_eq!(succ.len(), 1);
    assert_eq!(succ[0].tag, ProposalRuleTag::S);
    assert!(ws.equivalent(&succ[0].formula, &a.stub_formula()));
}
