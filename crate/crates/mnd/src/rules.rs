//! Rule names and the table of evaluation rules each role may apply.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::agent::ProposalRuleTag;
use crate::relation::RelationLabel;

/// The five relations an agent can assert, by their rule-name abbreviations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Abbrev {
    AD,
    ED,
    Co,
    RD,
    Ag,
}

impl Abbrev {
    pub const ALL: [Abbrev; 5] = [Abbrev::AD, Abbrev::ED, Abbrev::Co, Abbrev::RD, Abbrev::Ag];

    pub fn of(label: RelationLabel) -> Option<Abbrev> {
        match label {
            RelationLabel::AbsDis => Some(Abbrev::AD),
            RelationLabel::EssDis => Some(Abbrev::ED),
            RelationLabel::Comp => Some(Abbrev::Co),
            RelationLabel::RelDis => Some(Abbrev::RD),
            RelationLabel::Agree => Some(Abbrev::Ag),
            RelationLabel::CallAway | RelationLabel::Restrictive => None,
        }
    }

    pub fn label(self) -> RelationLabel {
        match self {
            Abbrev::AD => RelationLabel::AbsDis,
            Abbrev::ED => RelationLabel::EssDis,
            Abbrev::Co => RelationLabel::Comp,
            Abbrev::RD => RelationLabel::RelDis,
            Abbrev::Ag => RelationLabel::Agree,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Abbrev::AD => "AD",
            Abbrev::ED => "ED",
            Abbrev::Co => "Co",
            Abbrev::RD => "RD",
            Abbrev::Ag => "Ag",
        }
    }

    fn parse(s: &str) -> Option<Abbrev> {
        Abbrev::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

/// Every rule name that can appear in a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// The opening proposal.
    Bid,
    Move(ProposalRuleTag),
    /// Re-initiation by a second proposer facing a stricter proposal.
    I,
    /// A CAF taken over from the opponent after an agreement rule.
    Adopt,
    /// A proposal generalizing the receiver's stub.
    CallAway,
    /// A second proposer's evaluation.
    Open(Abbrev),
    /// A following evaluation: received relation, then asserted relation.
    Pair(Abbrev, Abbrev),
    A,
    D,
    N,
    AA,
    DD,
    NN,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Bid => f.write_str("Bid"),
            Rule::Move(t) => write!(f, "{t}"),
            Rule::I => f.write_str("I"),
            Rule::Adopt => f.write_str("Adopt"),
            Rule::CallAway => f.write_str("CA"),
            Rule::Open(a) => f.write_str(a.as_str()),
            Rule::Pair(x, y) => write!(f, "{}-{}", x.as_str(), y.as_str()),
            Rule::A => f.write_str("A"),
            Rule::D => f.write_str("D"),
            Rule::N => f.write_str("N"),
            Rule::AA => f.write_str("AA"),
            Rule::DD => f.write_str("DD"),
            Rule::NN => f.write_str("NN"),
        }
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Bid" => Rule::Bid,
            "W" => Rule::Move(ProposalRuleTag::W),
            "C" => Rule::Move(ProposalRuleTag::C),
            "S" => Rule::Move(ProposalRuleTag::S),
            "I" => Rule::I,
            "Adopt" => Rule::Adopt,
            "CA" => Rule::CallAway,
            "A" => Rule::A,
            "D" => Rule::D,
            "N" => Rule::N,
            "AA" => Rule::AA,
            "DD" => Rule::DD,
            "NN" => Rule::NN,
            _ => {
                if let Some(a) = Abbrev::parse(s) {
                    Rule::Open(a)
                } else if let Some((x, y)) = s.split_once('-') {
                    match (Abbrev::parse(x), Abbrev::parse(y)) {
                        (Some(x), Some(y)) => Rule::Pair(x, y),
                        _ => return Err(format!("unknown rule `{s}`")),
                    }
                } else {
                    return Err(format!("unknown rule `{s}`"));
                }
            }
        })
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Who is speaking, as far as the rule table is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeakerRole {
    /// Evaluating an opening proposal.
    SecondProposer,
    /// A bilateral agent after the opening, or an auction participant.
    Participant,
    Auctioneer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleEntry {
    pub rule: Rule,
    pub violation: bool,
}

/// The evaluation rules, indexed by role, received relation and asserted relation.
pub struct RuleTable;

impl RuleTable {
    /// `received` is `None` exactly for second proposers.
    pub fn lookup(
        role: SpeakerRole,
        received: Option<Abbrev>,
        asserted: Abbrev,
    ) -> Option<RuleEntry> {
        use Abbrev::*;
        match (role, received) {
            // RD is not among the opening rules proper: it covers a strictly
            // more general opening that reaches outside the receiver's stub.
            (SpeakerRole::SecondProposer, None) => Some(RuleEntry {
                rule: Rule::Open(asserted),
                violation: false,
            }),
            (SpeakerRole::SecondProposer, Some(_)) | (_, None) => None,
            (role, Some(x)) => {
                let following = matches!(
                    (x, asserted),
                    (AD, _) | (ED, _) | (Co, ED | Co | RD | Ag) | (RD, Ag)
                );
                let auctioneer_only =
                    matches!((x, asserted), (Co, AD) | (RD, ED | Co | RD) | (Ag, _));
                let entry = |violation| {
                    Some(RuleEntry {
                        rule: Rule::Pair(x, asserted),
                        violation,
                    })
                };
                if following {
                    entry(matches!((x, asserted), (ED, AD) | (ED, Co)))
                } else if auctioneer_only && role == SpeakerRole::Auctioneer {
                    entry(true)
                } else if (x, asserted) == (Ag, Ag) {
                    entry(false)
                } else {
                    None
                }
            }
        }
    }

    /// All entries available to `role`, in a stable order.
    pub fn entries(role: SpeakerRole) -> Vec<(Option<Abbrev>, Abbrev, RuleEntry)> {
        let received: Vec<Option<Abbrev>> = match role {
            SpeakerRole::SecondProposer => vec![None],
            _ => Abbrev::ALL.into_iter().map(Some).collect(),
        };
        let mut out = Vec::new();
        for x in received {
            for y in Abbrev::ALL {
                if let Some(e) = RuleTable::lookup(role, x, y) {
                    out.push((x, y, e));
                }
            }
        }
        out
    }
}
