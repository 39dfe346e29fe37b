//! Template-based generation of definition sentences.
//!
//! The pair list is shuffled once with the run seed and consumed from the
//! front. Templates are visited cyclically starting from the first; when
//! fewer pairs remain than the current template needs, the scan moves
//! forward to the next template that fits. Every pair is placed exactly
//! once, so the output holds as many variable mentions as there were pairs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{validate_corpus, AnnotatedDocument, CharSpan, Sentence, VarDefPair, VariableMention};
use crate::error::{Error, Result};
use crate::templates::{Segment, SlotKind, Template, TemplateSet};

pub const GENERATED_PROCESS_TAG: &str = "TPL";

/// One emission of the generation loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlanStep {
    /// 1-based position in the template set.
    pub template: usize,
    pub consumed: usize,
}

/// Consumption schedule for `pairs_count` pairs, without generating text.
pub fn plan_preview(pairs_count: usize, templates: &TemplateSet) -> Vec<PlanStep> {
    let arities: Vec<usize> = templates.templates().iter().map(Template::var_slots).collect();
    plan_for_arities(pairs_count, &arities)
}

fn plan_for_arities(pairs_count: usize, arities: &[usize]) -> Vec<PlanStep> {
    let count = arities.len();
    let mut plan = Vec::new();
    let mut remaining = pairs_count;
    let mut cursor = 0;
    while remaining > 0 {
        // An arity-1 template always exists, so the scan finds one.
        let idx = (0..count)
            .map(|off| (cursor + off) % count)
            .find(|&i| arities[i] <= remaining)
            .expect("template set has a single-slot template");
        let n = arities[idx];
        plan.push(PlanStep {
            template: idx + 1,
            consumed: n,
        });
        remaining -= n;
        cursor = (idx + 1) % count;
    }
    plan
}

/// Generates one single-sentence document per plan step.
///
/// Documents are named `tpl-<seed>-<sequence>` (sequence from 1) and tagged
/// with the `TPL` process. Variables are named `v<i>` after their slot and
/// every one is an extraction target; a definition span is annotated only
/// where the template has the matching `[DEF_i]`.
pub fn augment(pairs: &[VarDefPair], templates: &TemplateSet, seed: u64) -> Result<Vec<AnnotatedDocument>> {
    let mut order: Vec<&VarDefPair> = pairs.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let plan = plan_preview(order.len(), templates);
    let mut docs = Vec::with_capacity(plan.len());
    let mut queue = order.as_slice();
    for (seq, step) in plan.iter().enumerate() {
        let (take, rest) = queue.split_at(step.consumed);
        queue = rest;
        let template = &templates.templates()[step.template - 1];
        docs.push(AnnotatedDocument {
            doc_id: format!("tpl-{seed}-{}", seq + 1),
            process_tag: GENERATED_PROCESS_TAG.to_string(),
            sentences: vec![fill_template(template, take)],
        });
    }
    debug_assert!(queue.is_empty());
    validate_corpus(&docs).map_err(|e| match e {
        Error::Invariant { doc_id, var_id, message } => Error::Invariant {
            doc_id,
            var_id,
            message: format!("generated sentence invalid (check input pairs): {message}"),
        },
        other => other,
    })?;
    Ok(docs)
}

/// Substitutes `pairs[i-1]` into `[VAR_i]` and, where present, `[DEF_i]`.
pub fn fill_template(template: &Template, pairs: &[&VarDefPair]) -> Sentence {
    assert_eq!(template.var_slots(), pairs.len(), "one pair per variable slot");
    let mut text = String::new();
    let mut pos = 0usize;
    let mut var_spans = vec![CharSpan::new(0, 0); pairs.len()];
    let mut def_spans: Vec<Option<CharSpan>> = vec![None; pairs.len()];
    for seg in template.segments() {
        let piece: &str = match seg {
            Segment::Text(t) => t,
            Segment::Slot { kind: SlotKind::Var, index } => &pairs[index - 1].variable,
            Segment::Slot { kind: SlotKind::Def, index } => &pairs[index - 1].definition,
        };
        let len = piece.chars().count();
        let span = CharSpan::new(pos, pos + len);
        match seg {
            Segment::Slot { kind: SlotKind::Var, index } => var_spans[index - 1] = span,
            Segment::Slot { kind: SlotKind::Def, index } => def_spans[index - 1] = Some(span),
            Segment::Text(_) => {}
        }
        text.push_str(piece);
        pos += len;
    }
    let variables = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| VariableMention {
            var_id: format!("v{}", i + 1),
            span: var_spans[i],
            surface: p.variable.clone(),
            definition: def_spans[i],
            is_target: true,
        })
        .collect();
    Sentence { text, variables }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_stats, PairOrigin};

    fn pair(v: &str, d: &str) -> VarDefPair {
        VarDefPair {
            variable: v.into(),
            definition: d.into(),
            origin: PairOrigin {
                doc_id: "src".into(),
                var_id: v.into(),
            },
        }
    }

    #[test]
    fn single_slot_substitution() {
        let set = TemplateSet::parse("[VAR_1] is defined as [DEF_1].").unwrap();
        let docs = augment(&[pair("x", "time constant")], &set, 7).unwrap();
        assert_eq!(docs.len(), 1);
        let s = &docs[0].sentences[0];
        assert_eq!(s.text, "x is defined as time constant.");
        assert_eq!(s.variables[0].span, CharSpan::new(0, 1));
        assert_eq!(s.definition_text(&s.variables[0]).unwrap(), "time constant");
        assert_eq!(docs[0].doc_id, "tpl-7-1");
        assert_eq!(docs[0].process_tag, "TPL");
    }

    #[test]
    fn cyclic_schedule_hand_trace() {
        // j=1 takes 2, j=2 takes 1, j=1 takes 2: 5 pairs, 4 definitions.
        let set = TemplateSet::parse("[VAR_1] and [VAR_2] are [DEF_1] and [DEF_2].\n[VAR_1] is a constant.").unwrap();
        let plan = plan_preview(5, &set);
        let expect = [(1, 2), (2, 1), (1, 2)];
        assert_eq!(plan.iter().map(|s| (s.template, s.consumed)).collect::<Vec<_>>(), expect);

        let pairs: Vec<_> = (0..5).map(|i| pair(&format!("x{i}"), &format!("quantity {i}"))).collect();
        let docs = augment(&pairs, &set, 1).unwrap();
        let stats = corpus_stats(&docs);
        assert_eq!(docs.len(), 3);
        assert_eq!(stats.num_variables(), 5);
        assert_eq!(stats.num_with_definition(), 4);
    }

    #[test]
    fn leftover_rule_skips_wide_templates() {
        let six = (1..=6).map(|i| format!("[VAR_{i}]")).collect::<Vec<_>>().join(", ") + " are constants.";
        let set = TemplateSet::parse(&format!("{six}\n[VAR_1] is constant.")).unwrap();
        let plan = plan_preview(3, &set);
        assert_eq!(plan, vec![PlanStep { template: 2, consumed: 1 }; 3]);
        let pairs: Vec<_> = (0..3).map(|i| pair(&format!("y{i}"), "z")).collect();
        assert_eq!(augment(&pairs, &set, 0).unwrap().len(), 3);
    }

    #[test]
    fn empty_pairs_give_empty_output() {
        let set = TemplateSet::parse("[VAR_1] is [DEF_1].").unwrap();
        assert!(plan_preview(0, &set).is_empty());
        assert!(augment(&[], &set, 3).unwrap().is_empty());
    }

    #[test]
    fn definitions_are_verbatim_and_unicode_safe() {
        let set = TemplateSet::parse("Here [VAR_1] denotes [DEF_1] (in K).").unwrap();
        let docs = augment(&[pair("θ_s", "Température de surface")], &set, 0).unwrap();
        let s = &docs[0].sentences[0];
        assert_eq!(s.slice(s.variables[0].span), "θ_s");
        assert_eq!(s.definition_text(&s.variables[0]).unwrap(), "Température de surface");
    }

    #[test]
    fn same_seed_same_output() {
        let set = TemplateSet::parse("[VAR_1] and [VAR_2] are [DEF_1] and [DEF_2].\n[VAR_1] is [DEF_1].").unwrap();
        let pairs: Vec<_> = (0..9).map(|i| pair(&format!("a{i}"), &format!("d{i}"))).collect();
        assert_eq!(augment(&pairs, &set, 5).unwrap(), augment(&pairs, &set, 5).unwrap());
    }
}
