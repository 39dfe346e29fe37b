//! Template sentences with `[VAR_i]` / `[DEF_i]` placeholders.
//!
//! A template carries between one and six variable slots, numbered
//! contiguously from 1, each appearing exactly once. Definition slots are
//! optional per variable: `[DEF_i]` may appear at most once and only when
//! `[VAR_i]` exists. Brackets that do not start with `[VAR` or `[DEF` are
//! ordinary text, so rate expressions such as `k[A][B]` survive untouched.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_VAR_SLOTS: usize = 6;

/// Histogram over the number of definition slots, buckets 0..=6.
pub type DefHistogram = [usize; MAX_VAR_SLOTS + 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Var,
    Def,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Slot { kind: SlotKind, index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    raw: String,
    segments: Vec<Segment>,
    var_slots: usize,
    def_indices: BTreeSet<usize>,
}

impl Template {
    pub fn parse(raw: &str) -> std::result::Result<Self, String> {
        let segments = tokenize(raw)?;

        let mut var_seen = [0usize; MAX_VAR_SLOTS + 1];
        let mut def_seen = [0usize; MAX_VAR_SLOTS + 1];
        for seg in &segments {
            if let Segment::Slot { kind, index } = seg {
                if *index > MAX_VAR_SLOTS {
                    return Err(format!(
                        "slot index {index} exceeds the maximum of {MAX_VAR_SLOTS} variables"
                    ));
                }
                match kind {
                    SlotKind::Var => var_seen[*index] += 1,
                    SlotKind::Def => def_seen[*index] += 1,
                }
            }
        }

        let var_slots = var_seen.iter().filter(|&&c| c > 0).count();
        if var_slots == 0 {
            return Err("template has no [VAR_i] placeholder".into());
        }
        for i in 1..=MAX_VAR_SLOTS {
            if var_seen[i] > 1 {
                return Err(format!("[VAR_{i}] appears {} times", var_seen[i]));
            }
            if def_seen[i] > 1 {
                return Err(format!("[DEF_{i}] appears {} times", def_seen[i]));
            }
        }
        if let Some(gap) = (1..=var_slots).find(|&i| var_seen[i] == 0) {
            return Err(format!(
                "variable indices must be contiguous from 1; [VAR_{gap}] is missing"
            ));
        }
        let def_indices: BTreeSet<usize> = (1..=MAX_VAR_SLOTS).filter(|&i| def_seen[i] > 0).collect();
        if let Some(orphan) = def_indices.iter().find(|&&i| var_seen[i] == 0) {
            return Err(format!("[DEF_{orphan}] has no matching [VAR_{orphan}]"));
        }

        Ok(Template {
            raw: raw.to_string(),
            segments,
            var_slots,
            def_indices,
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Number of variable slots (`n_j`).
    pub fn var_slots(&self) -> usize {
        self.var_slots
    }

    pub fn def_slots(&self) -> usize {
        self.def_indices.len()
    }

    pub fn has_def(&self, index: usize) -> bool {
        self.def_indices.contains(&index)
    }

    /// Placeholders and literal text in order of appearance.
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }
}

fn tokenize(raw: &str) -> std::result::Result<Vec<Segment>, String> {
    let mut segments = Vec::new();
    let mut text = String::new();
    let mut rest = raw;
    while let Some(pos) = rest.find('[') {
        let candidate = &rest[pos..];
        let kind = if candidate.starts_with("[VAR") {
            Some(SlotKind::Var)
        } else if candidate.starts_with("[DEF") {
            Some(SlotKind::Def)
        } else {
            None
        };
        let Some(kind) = kind else {
            text.push_str(&rest[..=pos]);
            rest = &rest[pos + 1..];
            continue;
        };
        let (index, consumed) = parse_slot(candidate)
            .ok_or_else(|| format!("malformed placeholder near {:?}", truncate(candidate, 12)))?;
        text.push_str(&rest[..pos]);
        if !text.is_empty() {
            segments.push(Segment::Text(std::mem::take(&mut text)));
        }
        segments.push(Segment::Slot { kind, index });
        rest = &candidate[consumed..];
    }
    text.push_str(rest);
    if !text.is_empty() {
        segments.push(Segment::Text(text));
    }
    Ok(segments)
}

/// Parses `[VAR_<n>]` or `[DEF_<n>]` at the start of `s`; returns the index
/// and the byte length consumed. Indices have no leading zeros.
fn parse_slot(s: &str) -> Option<(usize, usize)> {
    let body = s.get(4..)?.strip_prefix('_')?;
    let digits = body.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 || body.as_bytes()[0] == b'0' || body.as_bytes().get(digits) != Some(&b']') {
        return None;
    }
    let index = body[..digits].parse().ok()?;
    Some((index, 4 + 1 + digits + 1))
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

/// Ordered template collection; position `j` (1-based) is the cycle order
/// the augmentor walks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<Template>,
}

impl TemplateSet {
    /// Requires at least one template and at least one single-variable
    /// template, which the augmentor needs to place leftover pairs.
    pub fn new(templates: Vec<Template>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::TemplateSet("no templates".into()));
        }
        if !templates.iter().any(|t| t.var_slots() == 1) {
            return Err(Error::TemplateSet(
                "at least one template with a single variable slot is required".into(),
            ));
        }
        Ok(TemplateSet { templates })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut templates = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let t = Template::parse(line).map_err(|message| Error::Template {
                line: idx + 1,
                message,
            })?;
            templates.push(t);
        }
        TemplateSet::new(templates)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// One template per line, in set order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.templates {
            out.push_str(t.raw());
            out.push('\n');
        }
        out
    }
}

pub fn load_templates(path: &Path) -> Result<TemplateSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TemplateSet::parse(&text)
}

pub fn def_token_histogram(set: &TemplateSet) -> DefHistogram {
    let mut hist = DefHistogram::default();
    for t in set.templates() {
        hist[t.def_slots()] += 1;
    }
    hist
}

/// Draws a seeded uniform subset whose definition-slot histogram equals
/// `target`. Chosen templates keep their relative order from `set`.
pub fn subset_templates(
    set: &TemplateSet,
    target_size: usize,
    target: &DefHistogram,
    seed: u64,
) -> Result<TemplateSet> {
    let requested: usize = target.iter().sum();
    if requested != target_size {
        return Err(Error::InfeasibleHistogram(format!(
            "histogram sums to {requested}, requested size is {target_size}"
        )));
    }
    let available = def_token_histogram(set);
    for (bucket, (&want, &have)) in target.iter().zip(available.iter()).enumerate() {
        if want > have {
            return Err(Error::InfeasibleHistogram(format!(
                "bucket {bucket} wants {want} templates, only {have} available"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = Vec::with_capacity(target_size);
    for (bucket, &want) in target.iter().enumerate() {
        let pool: Vec<usize> = set
            .templates()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.def_slots() == bucket)
            .map(|(i, _)| i)
            .collect();
        chosen.extend(pool.choose_multiple(&mut rng, want).copied());
    }
    chosen.sort_unstable();
    TemplateSet::new(chosen.into_iter().map(|i| set.templates()[i].clone()).collect())
}

/// Parses a comma- or whitespace-separated histogram such as `40,14,14,8,8,8,8`.
pub fn parse_histogram(s: &str) -> Result<DefHistogram> {
    let parts: Vec<&str> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect();
    if parts.len() != MAX_VAR_SLOTS + 1 {
        return Err(Error::Usage(format!(
            "histogram needs {} buckets, got {}",
            MAX_VAR_SLOTS + 1,
            parts.len()
        )));
    }
    let mut hist = DefHistogram::default();
    for (slot, p) in hist.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| Error::Usage(format!("bad histogram count {p:?}")))?;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_slot_with_definition() {
        let t = Template::parse("[VAR_1] is defined as [DEF_1].").unwrap();
        assert_eq!(t.var_slots(), 1);
        assert_eq!(t.def_slots(), 1);
    }

    #[test]
    fn two_slots_with_definitions() {
        let t = Template::parse("[VAR_1] and [VAR_2] denote [DEF_1] and [DEF_2].").unwrap();
        assert_eq!((t.var_slots(), t.def_slots()), (2, 2));
    }

    #[test]
    fn indices_must_start_at_one() {
        let err = Template::parse("[VAR_2] equals [DEF_2].").unwrap_err();
        assert!(err.contains("contiguous"), "{err}");
    }

    #[test]
    fn rate_expression_brackets_are_text() {
        let t = Template::parse("d[VAR_1]/dt = k[A][B]").unwrap();
        assert_eq!((t.var_slots(), t.def_slots()), (1, 0));
        assert_eq!(
            t.segments(),
            &[
                Segment::Text("d".into()),
                Segment::Slot { kind: SlotKind::Var, index: 1 },
                Segment::Text("/dt = k[A][B]".into()),
            ]
        );
    }

    #[test]
    fn mixed_definitions_are_allowed() {
        let t = Template::parse("[VAR_1] is [DEF_1], while [VAR_2] is used later.").unwrap();
        assert_eq!((t.var_slots(), t.def_slots()), (2, 1));
        assert!(t.has_def(1) && !t.has_def(2));
    }

    #[test]
    fn rejects_bad_placeholders() {
        for bad in [
            "[VAR_] is x",
            "[VAR_01] is x",
            "[VAR_1 is x",
            "[VARX] is x",
            "[VAR_a] is x",
            "[DEF_1 and [VAR_1]",
        ] {
            assert!(Template::parse(bad).unwrap_err().contains("malformed"), "{bad}");
        }
    }

    #[test]
    fn rejects_structural_violations() {
        assert!(Template::parse("[VAR_1] is [DEF_2].").unwrap_err().contains("no matching"));
        assert!(Template::parse("[VAR_1] and [VAR_1]").unwrap_err().contains("2 times"));
        assert!(Template::parse("[VAR_1] [DEF_1] [DEF_1]").unwrap_err().contains("2 times"));
        assert!(Template::parse("no slots here").unwrap_err().contains("no [VAR_i]"));
        let seven = (1..=7).map(|i| format!("[VAR_{i}]")).collect::<Vec<_>>().join(" ");
        assert!(Template::parse(&seven).unwrap_err().contains("maximum"));
    }

    #[test]
    fn set_requires_single_slot_template() {
        let err = TemplateSet::parse("[VAR_1] and [VAR_2] are constants.\n").unwrap_err();
        assert!(matches!(err, Error::TemplateSet(_)));
        assert!(matches!(TemplateSet::parse("# only a comment\n"), Err(Error::TemplateSet(_))));
    }

    #[test]
    fn set_parse_reports_line_and_skips_comments() {
        let text = "# header\n[VAR_1] is [DEF_1].\n[VAR_2] is bad.\n";
        match TemplateSet::parse(text) {
            Err(Error::Template { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let set = TemplateSet::parse("# c\n[VAR_1] is [DEF_1].\n\n[VAR_1] holds.\n").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.to_text(), "[VAR_1] is [DEF_1].\n[VAR_1] holds.\n");
    }

    #[test]
    fn histogram_of_single_zero_def_template() {
        let set = TemplateSet::parse("[VAR_1] is constant.").unwrap();
        assert_eq!(def_token_histogram(&set), [1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn subset_checks_feasibility() {
        let set = TemplateSet::parse("[VAR_1] is constant.\n[VAR_1] is [DEF_1].").unwrap();
        assert!(matches!(
            subset_templates(&set, 2, &[2, 0, 0, 0, 0, 0, 0], 0),
            Err(Error::InfeasibleHistogram(_))
        ));
        assert!(matches!(
            subset_templates(&set, 3, &[1, 1, 0, 0, 0, 0, 0], 0),
            Err(Error::InfeasibleHistogram(_))
        ));
        let same = subset_templates(&set, 2, &[1, 1, 0, 0, 0, 0, 0], 9).unwrap();
        assert_eq!(same, set);
    }

    #[test]
    fn histogram_parsing() {
        assert_eq!(parse_histogram("40,14,14,8,8,8,8").unwrap(), [40, 14, 14, 8, 8, 8, 8]);
        assert!(parse_histogram("1,2").is_err());
    }
}
