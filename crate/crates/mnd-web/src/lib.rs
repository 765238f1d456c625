//! Browser bindings for the negotiation engine.
//!
//! Every export takes a JSON string and returns a JSON string. Failures come
//! back as `{"error": "..."}` so the page never has to catch exceptions, and
//! the functions stay callable from native tests.

use mnd::graph::{config_paths, to_dot};
use mnd::logic::{parse_formula, Signature, WorldSet};
use mnd::relation::{classify_models, egg_yolk_config, relation_of_config, Perspective, Role};
use mnd::trace::to_jsonl;
use mnd::Scenario;
use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyRequest {
    signature: Vec<String>,
    stub: String,
    caf: String,
    proposal: String,
    #[serde(default)]
    second_proposer: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EggYolkRequest {
    signature: Vec<String>,
    stub_i: String,
    flex_i: String,
    stub_j: String,
    flex_j: String,
}

fn respond(result: Result<Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn full_worlds(names: &[String]) -> Result<WorldSet, String> {
    let sig = Signature::from_names(names.iter().cloned()).map_err(|e| e.to_string())?;
    WorldSet::full(sig).map_err(|e| e.to_string())
}

fn parse_models(ws: &WorldSet, what: &str, text: &str) -> Result<mnd::logic::Models, String> {
    let f = parse_formula(text, ws.signature()).map_err(|e| format!("{what}: {e}"))?;
    Ok(ws.models(&f))
}

/// Relation a receiver with the given stub and current angle sees in a proposal.
#[wasm_bindgen]
pub fn classify_json(request: &str) -> String {
    respond((|| {
        let r: ClassifyRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
        let ws = full_worlds(&r.signature)?;
        let s = parse_models(&ws, "stub", &r.stub)?;
        let f = parse_models(&ws, "caf", &r.caf)?;
        let p = parse_models(&ws, "proposal", &r.proposal)?;
        if !f.is_subset(&s) {
            return Err("caf must entail the stub".into());
        }
        let role = if r.second_proposer {
            Role::SecondProposer
        } else {
            Role::Following
        };
        Ok(json!({ "label": classify_models(&s, &f, &p, role) }))
    })())
}

/// EGG/YOLK configuration of two agents, with its catalogue number and the
/// relation it depicts for each side when it is catalogued.
#[wasm_bindgen]
pub fn egg_yolk(request: &str) -> String {
    respond((|| {
        let r: EggYolkRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
        let ws = full_worlds(&r.signature)?;
        let cfg = egg_yolk_config(
            &parse_models(&ws, "stub_i", &r.stub_i)?,
            &parse_models(&ws, "flex_i", &r.flex_i)?,
            &parse_models(&ws, "stub_j", &r.stub_j)?,
            &parse_models(&ws, "flex_j", &r.flex_j)?,
        )
        .map_err(|e| e.to_string())?;
        Ok(json!({
            "number": cfg.number,
            "quad": cfg.quad_label(),
            "relation_i": relation_of_config(&cfg, Perspective::I).ok(),
            "relation_j": relation_of_config(&cfg, Perspective::J).ok(),
        }))
    })())
}

/// Runs a scenario document and returns its trace, outcome and DOT graph.
#[wasm_bindgen]
pub fn run_scenario(scenario: &str) -> String {
    respond((|| {
        let s = Scenario::from_json(scenario, "scenario").map_err(|e| e.to_string())?;
        let out = s.run().map_err(|e| e.to_string())?;
        let footer = out.footer();
        Ok(json!({
            "agreement": out.is_agreement(),
            "outcome": out.outcome.as_ref().map(ToString::to_string),
            "agreeing": out.agreeing,
            "beats": out.beats,
            "trace": to_jsonl(&out.trace, Some(&footer)),
            "dot": to_dot(&config_paths(&s.agents, &s.ws, &out.trace), Some(&footer)),
        }))
    })())
}
