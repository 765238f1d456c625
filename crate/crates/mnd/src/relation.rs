//! Negotiation relations between a receiver and a proposal, and the EGG/YOLK
//! configurations of two agents (egg = stub models, yolk = CAF models).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentSpec, CafState};
use crate::logic::{Formula, Models, WorldSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("yolk is not contained in egg for agent {0}")]
    InvalidEggYolk(char),
    #[error("configuration {0} is not catalogued")]
    UnknownConfig(String),
}

/// The five RCC5 relations between two sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rcc5 {
    EQ,
    PP,
    PPi,
    PO,
    DR,
}

impl Rcc5 {
    pub fn inverse(self) -> Rcc5 {
        match self {
            Rcc5::PP => Rcc5::PPi,
            Rcc5::PPi => Rcc5::PP,
            r => r,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rcc5::EQ => "EQ",
            Rcc5::PP => "PP",
            Rcc5::PPi => "PPi",
            Rcc5::PO => "PO",
            Rcc5::DR => "DR",
        }
    }
}

impl fmt::Display for Rcc5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tests are applied in order: equality, proper part either way, disjointness.
pub fn rcc5(a: &Models, b: &Models) -> Rcc5 {
    if a == b {
        Rcc5::EQ
    } else if a.is_subset(b) {
        Rcc5::PP
    } else if b.is_subset(a) {
        Rcc5::PPi
    } else if a.is_disjoint(b) {
        Rcc5::DR
    } else {
        Rcc5::PO
    }
}

/// Relation between two stubs.
pub type StubRelation = Rcc5;

pub fn stub_relation(stub_i: &Models, stub_j: &Models) -> StubRelation {
    rcc5(stub_i, stub_j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RelationLabel {
    CallAway,
    Restrictive,
    Agree,
    AbsDis,
    EssDis,
    RelDis,
    Comp,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 7] = [
        RelationLabel::CallAway,
        RelationLabel::Restrictive,
        RelationLabel::Agree,
        RelationLabel::AbsDis,
        RelationLabel::EssDis,
        RelationLabel::RelDis,
        RelationLabel::Comp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationLabel::CallAway => "callAway",
            RelationLabel::Restrictive => "restrictive",
            RelationLabel::Agree => "agree",
            RelationLabel::AbsDis => "absDis",
            RelationLabel::EssDis => "essDis",
            RelationLabel::RelDis => "relDis",
            RelationLabel::Comp => "comp",
        }
    }

    /// Preference order used by collaborative agents.
    pub fn rank(self) -> u32 {
        match self {
            RelationLabel::Agree => 4,
            RelationLabel::RelDis => 3,
            RelationLabel::Comp | RelationLabel::Restrictive => 2,
            RelationLabel::EssDis => 1,
            RelationLabel::AbsDis | RelationLabel::CallAway => 0,
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown relation label `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    SecondProposer,
    Following,
}

/// First matching label for stub `s`, current CAF `f` and translated proposal `p`.
///
/// Call-away needs a proposal strictly more general than the stub; a proposal
/// equivalent to the stub drops no stubborn knowledge and falls through.
pub fn classify_models(s: &Models, f: &Models, p: &Models, role: Role) -> RelationLabel {
    if s.is_proper_subset(p) {
        RelationLabel::CallAway
    } else if role == Role::SecondProposer && p.is_proper_subset(f) {
        RelationLabel::Restrictive
    } else if s.is_disjoint(p) {
        RelationLabel::AbsDis
    } else if f.is_disjoint(p) {
        RelationLabel::EssDis
    } else if f.is_proper_subset(p) {
        RelationLabel::RelDis
    } else if f.is_subset(p) {
        RelationLabel::Agree
    } else {
        RelationLabel::Comp
    }
}

pub fn classify(
    receiver: &AgentSpec,
    caf: &CafState,
    proposal: &Formula,
    role: Role,
    ws: &WorldSet,
) -> RelationLabel {
    classify_models(
        &ws.models(&receiver.stub_formula()),
        &ws.models(&caf.current),
        &ws.models(proposal),
        role,
    )
}

/// The joint configuration of agents `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EggYolkConfig {
    /// egg_i against egg_j
    pub ee: Rcc5,
    /// yolk_i against yolk_j
    pub yy: Rcc5,
    /// yolk_i against egg_j
    pub ye: Rcc5,
    /// yolk_j against egg_i
    pub ey: Rcc5,
    /// Catalogue number, when the configuration is a catalogued one.
    pub number: Option<&'static str>,
}

impl EggYolkConfig {
    pub fn quad(&self) -> [Rcc5; 4] {
        [self.ee, self.yy, self.ye, self.ey]
    }

    /// The same configuration seen from `j`.
    pub fn swapped(&self) -> EggYolkConfig {
        let (ee, yy, ye, ey) = (self.ee.inverse(), self.yy.inverse(), self.ey, self.ye);
        EggYolkConfig {
            ee,
            yy,
            ye,
            ey,
            number: lookup_quad([ee, yy, ye, ey]).map(|c| c.number),
        }
    }

    pub fn quad_label(&self) -> String {
        format!("{}/{}/{}/{}", self.ee, self.yy, self.ye, self.ey)
    }
}

impl fmt::Display for EggYolkConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number {
            Some(n) => f.write_str(n),
            None => f.write_str(&self.quad_label()),
        }
    }
}

/// Computes the four relations. A number is attached only when both yolks are
/// non-empty proper parts of their eggs, as in every catalogued drawing.
pub fn egg_yolk_config(
    egg_i: &Models,
    yolk_i: &Models,
    egg_j: &Models,
    yolk_j: &Models,
) -> Result<EggYolkConfig, RelationError> {
    if !yolk_i.is_subset(egg_i) {
        return Err(RelationError::InvalidEggYolk('i'));
    }
    if !yolk_j.is_subset(egg_j) {
        return Err(RelationError::InvalidEggYolk('j'));
    }
    let quad = [
        rcc5(egg_i, egg_j),
        rcc5(yolk_i, yolk_j),
        rcc5(yolk_i, egg_j),
        rcc5(yolk_j, egg_i),
    ];
    let proper = |y: &Models, e: &Models| !y.is_empty() && y.is_proper_subset(e);
    let number = if proper(yolk_i, egg_i) && proper(yolk_j, egg_j) {
        lookup_quad(quad).map(|c| c.number)
    } else {
        None
    };
    Ok(EggYolkConfig {
        ee: quad[0],
        yy: quad[1],
        ye: quad[2],
        ey: quad[3],
        number,
    })
}

/// A catalogued configuration: its relations and the relation it depicts for
/// the receiver `i` facing `j`'s offer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigEntry {
    pub number: &'static str,
    pub quad: [Rcc5; 4],
    pub group: RelationLabel,
}

macro_rules! configs {
    ($($n:literal: $ee:ident $yy:ident $ye:ident $ey:ident => $g:ident;)*) => {
        &[$(ConfigEntry {
            number: $n,
            quad: [Rcc5::$ee, Rcc5::$yy, Rcc5::$ye, Rcc5::$ey],
            group: RelationLabel::$g,
        },)*]
    };
}

pub const CONFIGURATIONS: &[ConfigEntry] = configs! {
    "1": DR DR DR DR => AbsDis;
    "2": PO DR DR DR => AbsDis;
    "3": PO DR PO DR => AbsDis;
    "4": PO DR DR PO => EssDis;
    "5": PO DR DR PP => EssDis;
    "6": PO DR PP DR => AbsDis;
    "7": PPi DR DR PP => EssDis;
    "8": PP DR PP DR => AbsDis;
    "9": PO DR PO PO => EssDis;
    "10": PO DR PO PP => EssDis;
    "11": PO DR PP PO => EssDis;
    "12": PPi DR PO PP => EssDis;
    "13": PP DR PP PO => EssDis;
    "14": PO PO PO PO => Comp;
    "15": PO PO PP PO => Comp;
    "16": PO PO PO PP => Comp;
    "17": PO PPi PO PP => Agree;
    "18": PO PP PP PO => RelDis;
    "19": PPi PO PO PP => Comp;
    "20": PP PO PP PO => Comp;
    "21": PPi PPi PPi PP => Agree;
    "22": PP PP PP PPi => CallAway;
    "23": PPi PPi PO PP => Agree;
    "24": PP PP PP PO => RelDis;
    "25": PO DR PP PP => EssDis;
    "26": PPi DR PP PP => EssDis;
    "27": PP DR PP PP => EssDis;
    "28": PO PO PP PP => Comp;
    "29": PO PPi PP PP => Agree;
    "30": PO PP PP PP => RelDis;
    "31": PPi PO PP PP => Comp;
    "32": PP PO PP PP => Comp;
    "33": PPi PPi EQ PP => Agree;
    "34": PP PP PP EQ => RelDis;
    "35": PPi PP PP PP => RelDis;
    "36": PPi PPi PP PP => Agree;
    "37": PP PP PP PP => RelDis;
    "38": PP PPi PP PP => Agree;
    "39": PO EQ PP PP => Agree;
    "40": PPi EQ PP PP => Agree;
    "41": PP EQ PP PP => Agree;
    "42a": EQ DR PP PP => EssDis;
    "42b": EQ PO PP PP => Comp;
    "42c": EQ PP PP PP => RelDis;
    "42d": EQ PPi PP PP => Agree;
    "42e": EQ EQ PP PP => Agree;
};

pub fn lookup_quad(quad: [Rcc5; 4]) -> Option<&'static ConfigEntry> {
    CONFIGURATIONS.iter().find(|c| c.quad == quad)
}

pub fn config_by_number(number: &str) -> Option<&'static ConfigEntry> {
    CONFIGURATIONS.iter().find(|c| c.number == number)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perspective {
    I,
    J,
}

/// The depicted relation for the receiver named by `perspective`.
pub fn relation_of_config(
    cfg: &EggYolkConfig,
    perspective: Perspective,
) -> Result<RelationLabel, RelationError> {
    let seen = match perspective {
        Perspective::I => *cfg,
        Perspective::J => cfg.swapped(),
    };
    seen.number
        .and_then(config_by_number)
        .map(|c| c.group)
        .ok_or_else(|| RelationError::UnknownConfig(seen.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ix: &[usize]) -> Models {
        Models::from_indices(8, ix.iter().copied())
    }

    #[test]
    fn rcc5_cases() {
        assert_eq!(rcc5(&set(&[1, 2]), &set(&[1, 2])), Rcc5::EQ);
        assert_eq!(rcc5(&set(&[1]), &set(&[1, 2])), Rcc5::PP);
        assert_eq!(rcc5(&set(&[1, 2]), &set(&[1])), Rcc5::PPi);
        assert_eq!(rcc5(&set(&[1, 2]), &set(&[2, 3])), Rcc5::PO);
        assert_eq!(rcc5(&set(&[1]), &set(&[2])), Rcc5::DR);
    }

    #[test]
    fn catalogue_is_consistent() {
        assert_eq!(CONFIGURATIONS.len(), 46);
        for (i, a) in CONFIGURATIONS.iter().enumerate() {
            for b in &CONFIGURATIONS[i + 1..] {
                assert_ne!(a.quad, b.quad, "{} and {}", a.number, b.number);
                assert_ne!(a.number, b.number);
            }
        }
    }

    #[test]
    fn catalogue_is_closed_under_swap() {
        for c in CONFIGURATIONS {
            let cfg = EggYolkConfig {
                ee: c.quad[0],
                yy: c.quad[1],
                ye: c.quad[2],
                ey: c.quad[3],
                number: Some(c.number),
            };
            assert!(cfg.swapped().number.is_some(), "{}", c.number);
            assert_eq!(cfg.swapped().swapped().number, Some(c.number));
        }
    }

    #[test]
    fn cascade_order() {
        let s = set(&[0, 1, 2, 3]);
        let f = set(&[0, 1]);
        let role = Role::Following;
        assert_eq!(
            classify_models(&s, &f, &set(&[0, 1, 2, 3, 4]), role),
            RelationLabel::CallAway
        );
        assert_eq!(classify_models(&s, &f, &s, role), RelationLabel::RelDis);
        assert_eq!(
            classify_models(&s, &f, &set(&[5]), role),
            RelationLabel::AbsDis
        );
        assert_eq!(
            classify_models(&s, &f, &set(&[2, 5]), role),
            RelationLabel::EssDis
        );
        assert_eq!(
            classify_models(&s, &f, &set(&[0, 1, 2]), role),
            RelationLabel::RelDis
        );
        assert_eq!(classify_models(&s, &f, &f, role), RelationLabel::Agree);
        assert_eq!(
            classify_models(&s, &f, &set(&[1, 2]), role),
            RelationLabel::Comp
        );
        assert_eq!(
            classify_models(&s, &f, &set(&[0]), role),
            RelationLabel::Comp
        );
        assert_eq!(
            classify_models(&s, &f, &set(&[0]), Role::SecondProposer),
            RelationLabel::Restrictive
        );
    }

    #[test]
    fn configuration_numbers() {
        let egg = set(&[0, 1, 2]);
        let cfg = egg_yolk_config(&egg, &set(&[0]), &egg, &set(&[1])).unwrap();
        assert_eq!(cfg.number, Some("42a"));
        let cfg = egg_yolk_config(&set(&[0, 1]), &set(&[0]), &set(&[2, 3]), &set(&[2])).unwrap();
        assert_eq!(cfg.number, Some("1"));
        assert_eq!(
            relation_of_config(&cfg, Perspective::I),
            Ok(RelationLabel::AbsDis)
        );
        let cfg = egg_yolk_config(&set(&[0, 1]), &set(&[0]), &set(&[0, 1, 2]), &set(&[0])).unwrap();
        assert_eq!(cfg.number, Some("41"));
        assert!(egg_yolk_config(&set(&[0]), &set(&[1]), &set(&[0]), &set(&[0])).is_err());
    }

    #[test]
    fn perspective_swap() {
        // Seen from j, the offer of 22 is a strict part of j's own yolk: that is 21.
        let e22 = config_by_number("22").unwrap();
        let cfg = EggYolkConfig {
            ee: e22.quad[0],
            yy: e22.quad[1],
            ye: e22.quad[2],
            ey: e22.quad[3],
            number: Some("22"),
        };
        assert_eq!(
            relation_of_config(&cfg, Perspective::I),
            Ok(RelationLabel::CallAway)
        );
        assert_eq!(cfg.swapped().number, Some("21"));
        assert_eq!(
            relation_of_config(&cfg, Perspective::J),
            Ok(RelationLabel::Agree)
        );
        let e42b = config_by_number("42b").unwrap();
        let cfg = EggYolkConfig {
            ee: e42b.quad[0],
            yy: e42b.quad[1],
            ye: e42b.quad[2],
            ey: e42b.quad[3],
            number: Some("42b"),
        };
        assert_eq!(
            relation_of_config(&cfg, Perspective::J),
            Ok(RelationLabel::Comp)
        );
    }
}
