//! Configuration paths: the EGG/YOLK configuration of a pair of agents after
//! every turn, rendered as a Graphviz digraph.

use std::fmt::Write as _;

use crate::agent::AgentSpec;
use crate::logic::{Models, WorldSet};
use crate::relation::{egg_yolk_config, EggYolkConfig};
use crate::trace::{EventKind, TerminalPhase, TraceEvent, TraceFooter};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathNode {
    pub beat: usize,
    /// Who spoke in the turn that produced this configuration.
    pub speaker: String,
    pub config: EggYolkConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEdge {
    /// Index into the trace of the turn's last proposal.
    pub event: usize,
    pub label: String,
}

/// The path of one pair: `i` is drawn plain, `j` dashed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigPath {
    pub i: String,
    pub j: String,
    pub nodes: Vec<PathNode>,
    /// `edges[k]` leads from `nodes[k]` to `nodes[k + 1]`.
    pub edges: Vec<PathEdge>,
}

impl ConfigPath {
    pub fn labels(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.config.to_string()).collect()
    }
}

/// One path per pair: the two agents of a bilateral run, or the auctioneer
/// with each participant.
pub fn config_paths(agents: &[AgentSpec], ws: &WorldSet, trace: &[TraceEvent]) -> Vec<ConfigPath> {
    (1..agents.len())
        .map(|k| pair_path(agents, ws, trace, 0, k))
        .collect()
}

fn pair_path(
    agents: &[AgentSpec],
    ws: &WorldSet,
    trace: &[TraceEvent],
    i: usize,
    j: usize,
) -> ConfigPath {
    let eggs: Vec<Models> = [i, j]
        .iter()
        .map(|&x| ws.models(&agents[x].stub_formula()))
        .collect();
    let mut yolks: Vec<Models> = [i, j]
        .iter()
        .map(|&x| ws.models(&agents[x].angles()[0]))
        .collect();
    let ids = [agents[i].id(), agents[j].id()];
    let mut path = ConfigPath {
        i: ids[0].to_string(),
        j: ids[1].to_string(),
        nodes: Vec::new(),
        edges: Vec::new(),
    };

    // Turns: maximal runs of consecutive events by one of the pair's agents.
    let mut pos = 0;
    while pos < trace.len() {
        let e = &trace[pos];
        let Some(side) = ids.iter().position(|id| *id == e.speaker) else {
            pos += 1;
            continue;
        };
        let mut end = pos;
        let mut last_proposal = None;
        while end < trace.len()
            && trace[end].speaker == e.speaker
            && trace[end].kind != EventKind::System
        {
            let ev = &trace[end];
            if ev.kind == EventKind::Proposal {
                if let Some(f) = &ev.formula {
                    yolks[side] = ws.models(f);
                }
                last_proposal = Some(end);
            }
            end += 1;
        }
        if let Some(event) = last_proposal {
            let config = egg_yolk_config(&eggs[0], &yolks[0], &eggs[1], &yolks[1])
                .expect("every CAF entails its stub");
            if !path.nodes.is_empty() {
                path.edges.push(PathEdge {
                    event,
                    label: edge_label(&trace[pos..end], &e.speaker, ids),
                });
            }
            path.nodes.push(PathNode {
                beat: e.beat,
                speaker: e.speaker.clone(),
                config,
            });
        }
        pos = end.max(pos + 1);
    }
    path
}

fn edge_label(turn: &[TraceEvent], speaker: &str, ids: [&str; 2]) -> String {
    let eval = turn.iter().find(|e| {
        e.kind == EventKind::Evaluation && e.target.as_deref().is_some_and(|t| ids.contains(&t))
    });
    let last = turn
        .iter()
        .rev()
        .find(|e| e.kind == EventKind::Proposal)
        .expect("turn has a proposal");
    match eval {
        Some(ev) => format!("{speaker}: {} ({})", ev.rule, last.rule),
        None => format!("{speaker}: {}", last.rule),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the paths as one digraph. The last node is filled on agreement.
pub fn to_dot(paths: &[ConfigPath], footer: Option<&TraceFooter>) -> String {
    let agreed = footer.is_some_and(|f| f.phase == TerminalPhase::Agreement);
    let mut out = String::from("digraph mn {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (p, path) in paths.iter().enumerate() {
        let _ = writeln!(
            out,
            "  subgraph cluster_{p} {{\n    label=\"{} / {}\";",
            escape(&path.i),
            escape(&path.j)
        );
        for (k, n) in path.nodes.iter().enumerate() {
            let fill = if agreed && k + 1 == path.nodes.len() {
                ", style=filled"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    p{p}n{k} [label=\"{}\"{fill}];",
                escape(&n.config.to_string())
            );
        }
        for (k, e) in path.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "    p{p}n{k} -> p{p}n{} [label=\"{}\"];",
                k + 1,
                escape(&e.label)
            );
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}
