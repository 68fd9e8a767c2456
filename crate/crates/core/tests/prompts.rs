use compliance_core::graph::{DecisionGraph, OptionEdge, QuestionNode};
use compliance_core::prompting::*;
use compliance_core::regulation::{ChunkKind, RegulationManifest};
use compliance_core::tokens::count_tokens;
use proptest::prelude::*;

const TYPICAL_CONTEXT: &str = "A regional hospital shares the full medical records of its cardiology patients, \
including names, diagnoses and genetic test results, with a pharmaceutical company that wants to recruit \
participants for a clinical trial. The patients were not informed and no consent was requested. \
The hospital argues that the trial could benefit future patients.";

const LONG_CONTEXT: &str = "NovaRecruit GmbH, a company based in Munich, has developed an AI-powered recruitment \
platform called TalentLens and places it on the EU market under its own brand. Large employers across Germany, \
France and Spain deploy TalentLens to screen incoming job applications. The system parses CVs, cover letters and \
recorded video interviews, extracts features such as work history gaps, vocabulary, facial expressions and tone of \
voice, and produces a ranked shortlist together with a numerical suitability score for each candidate. Recruiters \
usually invite only the top twenty percent of candidates to interviews and rarely review the remaining \
applications. NovaRecruit markets an optional module that estimates a candidate's emotional stability and \
likelihood of joining a trade union from the video recordings. The provider has not carried out a conformity \
assessment, has not registered the system in the EU database, and does not inform applicants that an automated \
system is evaluating them. Several rejected candidates have complained that they received no explanation.";

fn all_chunk_prompts(m: &RegulationManifest, ctx: &str) -> Vec<PromptRequest> {
    m.chunks_by_precedence()
        .iter()
        .map(|c| build_gdpr_chunk_prompt(m, c.kind, c.sub_group.as_deref(), ctx).unwrap())
        .collect()
}

fn output_block(rendered: &str, marker: &str) -> String {
    rendered[rendered.rfind(marker).unwrap()..].to_string()
}

#[test]
fn lawful_basis_prompt_lists_article_6() {
    let m = RegulationManifest::gdpr();
    let p = build_gdpr_chunk_prompt(&m, ChunkKind::CommonProvisions, Some("lawful_basis"), TYPICAL_CONTEXT).unwrap();
    for s in ["a", "b", "c", "d", "e", "f"] {
        assert!(p.rendered_text.contains(&format!("- Article 6(1)({s}): ")), "{s}");
        assert!(p.rendered_text.contains(&format!("\"Article 6(1)({s})\": \"yes\" or \"no\" or \"not sure\"")));
    }
    match &p.expected_schema {
        SchemaDescriptor::TriStateMap(ids) => assert_eq!(ids.len(), 6),
        other => panic!("unexpected schema {other:?}"),
    }
    assert!(p.rendered_text.contains(NOT_SURE_INSTRUCTION));
}

#[test]
fn unknown_or_ambiguous_chunk_errors() {
    let m = RegulationManifest::gdpr();
    assert!(matches!(
        build_gdpr_chunk_prompt(&m, ChunkKind::CommonProvisions, Some("nope"), ""),
        Err(PromptError::UnknownChunk { .. })
    ));
    assert!(matches!(
        build_gdpr_chunk_prompt(&m, ChunkKind::CommonProvisions, None, ""),
        Err(PromptError::AmbiguousChunk { .. })
    ));
}

#[test]
fn empty_context_and_determinism() {
    let m = RegulationManifest::gdpr();
    let a = build_gdpr_chunk_prompt(&m, ChunkKind::GeneralPrinciples, None, "").unwrap();
    let b = build_gdpr_chunk_prompt(&m, ChunkKind::GeneralPrinciples, None, "").unwrap();
    assert_eq!(a.rendered_text, b.rendered_text);
    assert!(a.rendered_text.contains("Context:\n\"\"\"\n\n\"\"\"\n"));
    assert_eq!(extract_context(&a.rendered_text).unwrap(), "");
}

#[test]
fn every_chunk_prompt_is_schema_coherent() {
    let m = RegulationManifest::gdpr();
    for p in all_chunk_prompts(&m, TYPICAL_CONTEXT) {
        assert!(p.rendered_text.contains(NOT_SURE_INSTRUCTION));
        let block = output_block(&p.rendered_text, "Output Format:");
        let keys = p.expected_schema.keys();
        for k in &keys {
            assert!(block.contains(&format!("\"{k}\":")), "{k} missing from {}", p.mode);
        }
        let quoted = block.matches("\": \"yes\"").count();
        assert_eq!(quoted, keys.len(), "{}", p.mode);
        assert_eq!(p.case_context, TYPICAL_CONTEXT);
        assert_eq!(p.rendered_text.matches(TYPICAL_CONTEXT).count(), 1);
    }
}

#[test]
fn analysis_prompt() {
    let p = build_aiact_analysis_prompt("A bank deploys a credit-scoring model");
    assert!(p.rendered_text.contains("machine-based system designed to operate"));
    assert!(p.rendered_text.contains("\"AI_system_involved\": True/False"));
    assert!(p.rendered_text.contains("\"AI_system_name\""));
    assert!(p.rendered_text.contains("A bank deploys a credit-scoring model"));
    assert_eq!(p.token_estimate, count_tokens(&p.rendered_text));
    assert_eq!(p.expected_schema, SchemaDescriptor::AnalysisObject);
}

#[test]
fn quotes_are_escaped_and_recoverable() {
    let ctx = "The CEO said \"we \\ will\" and then \"\"\" ended";
    let p = build_aiact_analysis_prompt(ctx);
    assert!(p.rendered_text.contains("The CEO said \\\"we \\\\ will\\\""));
    assert_eq!(extract_context(&p.rendered_text).unwrap(), ctx);
}

#[test]
fn questions_prompt_for_shipped_graph() {
    let g = DecisionGraph::ai_act();
    let analysis = r#"{"AI_system_involved": true, "AI_system_name": "ScoreBot `v2`"}"#;
    let p = build_aiact_questions_prompt(&g, TYPICAL_CONTEXT, analysis).unwrap();
    let t = &p.rendered_text;
    assert!(t.contains("**Question 1**: Which kind of entity is your organisation?"));
    for (i, label) in ["Provider", "Deployer", "Distributor", "Importer", "Product manufacturer", "Authorised representative"]
        .iter()
        .enumerate()
    {
        assert!(t.contains(&format!("    {}. {label}\n", i + 1)));
    }
    assert!(t.contains("**background**: Definitions:"));
    assert!(t.contains("\\u0060v2\\u0060"));
    assert!(t.contains("You should select at least one option for each question."));
    match &p.expected_schema {
        SchemaDescriptor::MultiSelectMap(qs) => {
            assert_eq!(qs.len(), 10);
            assert_eq!(qs[0].option_count, 6);
        }
        other => panic!("unexpected schema {other:?}"),
    }
    let block = output_block(t, "**Output format**:");
    for k in p.expected_schema.keys() {
        assert!(block.contains(&format!("\"{k}\":")));
    }
    assert!(p.token_estimate >= 2000, "questions prompt has only {} tokens", p.token_estimate);
}

#[test]
fn questions_prompt_single_question_graph() {
    let q = QuestionNode {
        id: "only".into(),
        text: "Pick".into(),
        background: None,
        nota_index: None,
        provenance: None,
        options: (1..=2)
            .map(|i| OptionEdge { index: i, label: format!("o{i}"), successor: "leaf:end".parse().unwrap() })
            .collect(),
    };
    let leaf = DecisionGraph::ai_act().leaves().iter().find(|l| l.id == "high_risk_annex_i").unwrap().clone();
    let leaf = compliance_core::graph::OutcomeLeaf { id: "end".into(), ..leaf };
    let g = DecisionGraph::new("t", "only", vec![q], vec![leaf]);
    let p = build_aiact_questions_prompt(&g, "", "{}").unwrap();
    assert_eq!(p.expected_schema.keys(), vec!["only".to_string()]);
    assert!(p.rendered_text.contains("**Question 1** (only): Pick"));
}

#[test]
fn direct_baseline_prompt() {
    let p = build_direct_baseline_prompt("GDPR", TYPICAL_CONTEXT).unwrap();
    assert!(p.rendered_text.contains("(A) The event is prohibited by GDPR."));
    assert!(p.rendered_text.contains("(B) The event is permitted by GDPR."));
    assert!(p.rendered_text.contains("(C) The event is not related to GDPR."));
    assert!(p.rendered_text.contains("Choice: [A. Prohibited | B. Permitted | C. Not related ]"));
    assert_eq!(p.expected_schema, SchemaDescriptor::SingleChoice);
    let e = build_direct_baseline_prompt("EU AI Act", "").unwrap();
    assert!(e.rendered_text.contains("Event:\n\"\"\"\n\n\"\"\""));
    assert_eq!(build_direct_baseline_prompt("  ", "x"), Err(PromptError::EmptyDomain));
}

#[test]
fn token_budgets() {
    let overhead = build_direct_baseline_prompt("GDPR", "").unwrap().token_estimate;
    assert!((60..=110).contains(&overhead), "template overhead is {overhead} tokens");
    let direct = build_direct_baseline_prompt("EU AI Act", LONG_CONTEXT).unwrap().token_estimate;
    assert!((250..=450).contains(&direct), "direct prompt has {direct} tokens");
    let m = RegulationManifest::gdpr();
    let total: usize = all_chunk_prompts(&m, TYPICAL_CONTEXT).iter().map(|p| p.token_estimate).sum();
    assert!((1000..=10000).contains(&total), "GDPR prompts total {total} tokens");
    println!("direct overhead {overhead}, direct with long context {direct}, GDPR chunk prompts {total}");
}

proptest! {
    #[test]
    fn adversarial_context_keeps_sections(ctx in "(Output Format:|Context:|\"\"\"|```|\\{\\{context\\}\\}|\n|[a-z \"\\\\]){0,40}") {
        let m = RegulationManifest::gdpr();
        let p = build_gdpr_chunk_prompt(&m, ChunkKind::GeneralPrinciples, None, &ctx).unwrap();
        let sections: Vec<&str> = split_sections(&p.rendered_text, GDPR_SECTIONS).iter().map(|(m, _)| *m).collect();
        prop_assert_eq!(sections, GDPR_SECTIONS.to_vec());
        prop_assert_eq!(extract_context(&p.rendered_text).unwrap(), ctx.clone());

        let d = build_direct_baseline_prompt("GDPR", &ctx).unwrap();
        let sections: Vec<&str> = split_sections(&d.rendered_text, DIRECT_SECTIONS).iter().map(|(m, _)| *m).collect();
        prop_assert_eq!(sections, DIRECT_SECTIONS.to_vec());

        let g = DecisionGraph::ai_act();
        let q = build_aiact_questions_prompt(&g, &ctx, &ctx).unwrap();
        let sections: Vec<&str> =
            split_sections(&q.rendered_text, AIACT_QUESTIONS_SECTIONS).iter().map(|(m, _)| *m).collect();
        prop_assert_eq!(sections, AIACT_QUESTIONS_SECTIONS.to_vec());
    }

    #[test]
    fn escaping_round_trips(ctx in any::<String>()) {
        prop_assert_eq!(unescape_context(&escape_context(&ctx)), ctx);
    }
}
