//! Shared fixtures: bundled scenarios, a seeded random corpus and
//! brute-force oracles that do not go through the library's semantics.

#![allow(dead_code)]

use std::path::PathBuf;

use mnd::agent::{AgentSpec, Attitude};
use mnd::engine::{beat_bound, Mode, Outcome};
use mnd::logic::{Formula, Signature, WorldSet};
use mnd::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn example_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

pub fn example(name: &str) -> Scenario {
    Scenario::load(example_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub const EXAMPLES: [&str; 6] = [
    "vehicle-bilateral.json",
    "vehicle-auction.json",
    "config-pp.json",
    "config-eq.json",
    "config-po.json",
    "disjoint.json",
];

/// Truth of `f` under an assignment, by direct recursion on the tree.
pub fn eval(f: &Formula, truth: &dyn Fn(&str) -> bool) -> bool {
    match f {
        Formula::Atom(a) => truth(a),
        Formula::Not(g) => !eval(g, truth),
        Formula::And(g, h) => eval(g, truth) && eval(h, truth),
        Formula::Or(g, h) => eval(g, truth) || eval(h, truth),
        Formula::Implies(g, h) => !eval(g, truth) || eval(h, truth),
    }
}

/// Model set over the full assignments of `atoms`, as a bitmask over worlds.
/// World `w` gives atom `k` the bit `n - 1 - k` of `w`.
pub fn brute_models(f: &Formula, atoms: &[String]) -> u64 {
    let n = atoms.len();
    assert!(n <= 6, "bitmask oracle covers at most 64 worlds");
    let mut out = 0u64;
    for w in 0..(1u64 << n) {
        let truth = |a: &str| {
            let k = atoms
                .iter()
                .position(|x| x == a)
                .expect("atom in signature");
            (w >> (n - 1 - k)) & 1 == 1
        };
        if eval(f, &truth) {
            out |= 1 << w;
        }
    }
    out
}

pub fn subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

/// Disjunction of minterms describing exactly the worlds in `mask`.
pub fn dnf(mask: u64, atoms: &[String]) -> Formula {
    let n = atoms.len();
    let mut terms = (0..(1u64 << n)).filter(|w| mask >> w & 1 == 1).map(|w| {
        (0..n)
            .map(|k| {
                let a = Formula::atom(atoms[k].clone());
                if (w >> (n - 1 - k)) & 1 == 1 {
                    a
                } else {
                    Formula::not(a)
                }
            })
            .reduce(Formula::and)
            .expect("at least one atom")
    });
    let first = terms.next().expect("non-empty model set");
    terms.fold(first, Formula::or)
}

/// One generated negotiation together with the raw model sets behind it.
#[derive(Clone)]
pub struct RandomCase {
    pub seed: u64,
    pub atoms: Vec<String>,
    pub stubs: Vec<u64>,
    pub angles: Vec<Vec<u64>>,
    pub attitudes: Vec<Attitude>,
    pub mode: Mode,
}

impl RandomCase {
    pub fn generate(seed: u64) -> RandomCase {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_atoms = rng.random_range(2..=4);
        let atoms: Vec<String> = (0..n_atoms).map(|k| format!("p{k}")).collect();
        let worlds = 1u32 << n_atoms;
        let full = if worlds == 64 {
            u64::MAX
        } else {
            (1u64 << worlds) - 1
        };
        let n_agents = rng.random_range(2..=3);
        let mut stubs = Vec::new();
        let mut angles = Vec::new();
        let mut attitudes = Vec::new();
        for _ in 0..n_agents {
            let stub = loop {
                let s = rng.random::<u64>() & full;
                if s != 0 {
                    break s;
                }
            };
            let want = rng.random_range(1..=4);
            let mut mine: Vec<u64> = Vec::new();
            // A small stub may not have `want` distinct non-empty subsets.
            for _ in 0..64 {
                if mine.len() == want {
                    break;
                }
                let a = rng.random::<u64>() & stub;
                if a != 0 && !mine.contains(&a) {
                    mine.push(a);
                }
            }
            stubs.push(stub);
            angles.push(mine);
            attitudes.push(if rng.random_bool(0.5) {
                Attitude::Collaborative
            } else {
                Attitude::Competitive
            });
        }
        let mode = if n_agents == 2 {
            Mode::Bilateral
        } else {
            Mode::Auction {
                alpha: rng.random_range(1..=n_agents),
                passive_auctioneer: false,
            }
        };
        RandomCase {
            seed,
            atoms,
            stubs,
            angles,
            attitudes,
            mode,
        }
    }

    /// Same case with pairwise disjoint stubs: each agent keeps only the
    /// worlds congruent to its index modulo the number of agents.
    pub fn generate_disjoint(seed: u64) -> RandomCase {
        let mut c = RandomCase::generate(seed);
        let n = c.stubs.len() as u64;
        let worlds = 1u64 << c.atoms.len();
        for (i, (stub, angles)) in c.stubs.iter_mut().zip(c.angles.iter_mut()).enumerate() {
            let lane: u64 = (0..worlds)
                .filter(|w| w % n == i as u64)
                .map(|w| 1u64 << w)
                .sum();
            *stub = lane;
            let mut kept: Vec<u64> = Vec::new();
            for a in angles.iter().map(|a| a & lane) {
                if a != 0 && !kept.contains(&a) {
                    kept.push(a);
                }
            }
            if kept.is_empty() {
                kept.push(lane & lane.wrapping_neg());
            }
            *angles = kept;
        }
        if let Mode::Auction {
            alpha,
            passive_auctioneer,
        } = &mut c.mode
        {
            *alpha = (*alpha).max(2);
            *passive_auctioneer = false;
        }
        c
    }

    pub fn collaborative(mut self) -> RandomCase {
        self.attitudes
            .iter_mut()
            .for_each(|a| *a = Attitude::Collaborative);
        self
    }

    pub fn ids(&self) -> Vec<String> {
        (0..self.stubs.len()).map(|i| format!("x{i}")).collect()
    }

    pub fn world_set(&self) -> WorldSet {
        WorldSet::full(Signature::from_names(self.atoms.iter().cloned()).unwrap()).unwrap()
    }

    pub fn agents(&self) -> Vec<AgentSpec> {
        let sig = Signature::from_names(self.atoms.iter().cloned()).unwrap();
        self.ids()
            .into_iter()
            .enumerate()
            .map(|(i, id)| {
                let angles = self.angles[i]
                    .iter()
                    .map(|&m| dnf(m, &self.atoms))
                    .collect();
                AgentSpec::new(
                    id,
                    sig.clone(),
                    vec![dnf(self.stubs[i], &self.atoms)],
                    angles,
                )
                .unwrap()
                .with_attitude(self.attitudes[i])
            })
            .collect()
    }

    pub fn bound(&self) -> usize {
        beat_bound(&self.agents())
    }

    pub fn run(&self) -> Outcome {
        mnd::engine::run(self.agents(), self.mode, self.world_set(), self.bound())
            .unwrap_or_else(|e| panic!("seed {}: {e}", self.seed))
    }

    pub fn alpha(&self) -> usize {
        match self.mode {
            Mode::Bilateral => 2,
            Mode::Auction { alpha, .. } => alpha,
        }
    }

    /// Acceptable to agent `x`: inside its stub and generalizing one of its
    /// angles, the stub counting as the top angle.
    pub fn acceptable(&self, x: usize, g: u64) -> bool {
        subset(g, self.stubs[x])
            && (self.angles[x].iter().any(|&a| subset(a, g)) || subset(self.stubs[x], g))
    }

    /// Brute force: does some declared angle (or stub) of any agent suit at
    /// least `alpha` agents?
    pub fn agreement_exists(&self) -> bool {
        let candidates = self.angles.iter().flatten().chain(&self.stubs);
        candidates.into_iter().any(|&g| {
            (0..self.stubs.len())
                .filter(|&x| self.acceptable(x, g))
                .count()
                >= self.alpha()
        })
    }
}
