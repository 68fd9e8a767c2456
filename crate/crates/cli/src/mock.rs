//! Deterministic synthetic responder for the mock backend.
//!
//! Replies are drawn from an RNG seeded by the prompt hash, so the same
//! prompt always gets the same reply. The reply follows the expected schema,
//! in the loose style real models use (prose around a fenced block, Python
//! literals), and a small share of replies carry no usable answer at all.

use std::collections::HashSet;
use std::sync::Arc;

use compliance_core::prompting::SchemaDescriptor;
use compliance_core::regulation::RegulationManifest;
use compliance_llm::{BackendError, ChatRequest, MockBackend};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

/// Share of replies that contain no parseable answer.
pub const GARBAGE_RATE: f64 = 0.03;

const GARBAGE: &[&str] = &[
    "I'm sorry, but I can't determine that from the description provided.",
    "The event raises several questions that would need legal review before answering.",
    "{\"analysis\": \"incomplete",
];

fn rng_for(request: &ChatRequest, seed: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    for (i, b) in request.prompt_hash.as_bytes().iter().take(64).enumerate() {
        bytes[i % 32] ^= b.wrapping_mul(i as u8 | 1);
    }
    for (i, b) in seed.to_le_bytes().iter().enumerate() {
        bytes[i] ^= b;
    }
    ChaCha8Rng::from_seed(bytes)
}

fn fenced(obj: &str, rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.5) {
        format!("Based on the event, here is my assessment.\n```json\n{obj}\n```")
    } else {
        obj.to_string()
    }
}

fn tri_state_reply(ids: &[String], exemptions: &HashSet<String>, rng: &mut impl Rng) -> String {
    let mut map = Map::new();
    for id in ids {
        let r: f64 = rng.gen();
        // Exemptions rarely apply; a "yes" there would end the assessment.
        let yes = if exemptions.contains(id) { 0.05 } else { 0.70 };
        let v = if r < yes {
            "yes"
        } else if r < yes + 0.18 {
            "no"
        } else {
            "not sure"
        };
        map.insert(id.clone(), Value::String(v.into()));
    }
    fenced(&serde_json::to_string_pretty(&Value::Object(map)).unwrap(), rng)
}

fn analysis_reply(rng: &mut impl Rng) -> String {
    let involved = rng.gen_bool(0.85);
    let body = format!(
        "{{\n    \"AI_system_involved\": {},\n    \"AI_system_name\": \"{}\",\n    \"AI_system_type\": \"\",\n    \"AI_system_usage\": \"\",\n    \"actions\": []\n}}",
        if involved { "True" } else { "False" },
        if involved { "the described system" } else { "" }
    );
    fenced(&body, rng)
}

fn multi_select_reply(questions: &[(String, u32)], rng: &mut impl Rng) -> String {
    let mut map = Map::new();
    for (id, n) in questions {
        if rng.gen_bool(0.04) {
            continue;
        }
        let mut options: Vec<u32> = (1..=*n).collect();
        options.shuffle(rng);
        let k = if rng.gen_bool(0.2) { 2.min(options.len()) } else { 1 };
        let mut chosen = options[..k].to_vec();
        chosen.sort_unstable();
        map.insert(id.clone(), chosen.into_iter().map(Value::from).collect());
    }
    fenced(&serde_json::to_string_pretty(&Value::Object(map)).unwrap(), rng)
}

fn choice_reply(rng: &mut impl Rng) -> String {
    let choice = ["A. Prohibited", "B. Permitted", "C. Not related"][rng.gen_range(0..3)];
    format!("The event mainly concerns how the data is handled.\nChoice: {choice}")
}

/// Reply for one request, deterministic in `(prompt_hash, seed)`.
/// Provisions in `exemptions` are answered "yes" only rarely.
pub fn synthetic_reply(request: &ChatRequest, seed: u64, exemptions: &HashSet<String>) -> String {
    let mut rng = rng_for(request, seed);
    if rng.gen_bool(GARBAGE_RATE) {
        return GARBAGE[rng.gen_range(0..GARBAGE.len())].to_string();
    }
    match &request.schema {
        Some(SchemaDescriptor::TriStateMap(ids)) => {
            tri_state_reply(&ids.iter().map(|i| i.to_string()).collect::<Vec<_>>(), exemptions, &mut rng)
        }
        Some(SchemaDescriptor::AnalysisObject) => analysis_reply(&mut rng),
        Some(SchemaDescriptor::MultiSelectMap(qs)) => {
            multi_select_reply(&qs.iter().map(|q| (q.id.clone(), q.option_count)).collect::<Vec<_>>(), &mut rng)
        }
        Some(SchemaDescriptor::SingleChoice) | None => choice_reply(&mut rng),
    }
}

pub fn synthetic_backend(seed: u64, manifest: &RegulationManifest) -> MockBackend {
    let exemptions: Arc<HashSet<String>> = Arc::new(
        manifest.chunks.iter().flat_map(|c| &c.provisions).filter(|p| p.exemption).map(|p| p.id.to_string()).collect(),
    );
    MockBackend::new(move |req| Ok::<_, BackendError>(synthetic_reply(req, seed, &exemptions)))
}
