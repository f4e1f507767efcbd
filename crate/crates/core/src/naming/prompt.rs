use serde::{Deserialize, Serialize};

use crate::concept::ConceptVector;
use crate::error::{JourneyError, Result};

/// Number of salient terms rendered as keywords.
pub const PROMPT_KEYWORDS: usize = 10;
/// Separator between titles inside one prompt.
pub const TITLE_SEPARATOR: &str = "; ";
/// Separator between keywords inside one prompt.
pub const KEYWORD_SEPARATOR: &str = ", ";
/// Line placed between journey blocks when several journeys share a prompt.
pub const BLOCK_SEPARATOR: &str = "\n---\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    NaturalTitles,
    StructuredTitles,
    StructuredKeywords,
    StructuredTitlesKeywords,
}

impl PromptKind {
    pub const ALL: [PromptKind; 4] = [
        PromptKind::NaturalTitles,
        PromptKind::StructuredTitles,
        PromptKind::StructuredKeywords,
        PromptKind::StructuredTitlesKeywords,
    ];

    pub fn uses_titles(self) -> bool {
        !matches!(self, PromptKind::StructuredKeywords)
    }

    pub fn uses_keywords(self) -> bool {
        matches!(self, PromptKind::StructuredKeywords | PromptKind::StructuredTitlesKeywords)
    }
}

impl std::str::FromStr for PromptKind {
    type Err = JourneyError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| JourneyError::arg(format!("unknown prompt kind {s:?}")))
    }
}

/// What a prompt says about one journey.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptInput {
    #[serde(default)]
    pub titles: Vec<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl PromptInput {
    /// Titles in order plus the top salient terms of `representation`.
    pub fn from_journey<S: AsRef<str>>(titles: &[S], representation: &ConceptVector) -> Self {
        Self {
            titles: titles.iter().map(|t| t.as_ref().to_string()).collect(),
            keywords: representation
                .top_terms(PROMPT_KEYWORDS)
                .expect("PROMPT_KEYWORDS is positive")
                .into_iter()
                .map(|(t, _)| t)
                .collect(),
        }
    }
}

/// A completed input → name pair shown before the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exemplar {
    pub input: PromptInput,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub kind: PromptKind,
    /// Keep only the last `max_items` titles of the query journey.
    #[serde(default)]
    pub max_items: Option<usize>,
    #[serde(default)]
    pub exemplars: Vec<Exemplar>,
}

impl PromptTemplate {
    pub fn new(kind: PromptKind) -> Self {
        Self {
            kind,
            max_items: None,
            exemplars: Vec::new(),
        }
    }

    pub fn with_max_items(mut self, n: usize) -> Self {
        self.max_items = Some(n);
        self
    }

    pub fn with_exemplars(mut self, exemplars: Vec<Exemplar>) -> Self {
        self.exemplars = exemplars;
        self
    }

    /// Exemplars must supply the fields this kind renders.
    pub fn validate(&self) -> Result<()> {
        if self.max_items == Some(0) {
            return Err(JourneyError::arg("max_items must be at least 1"));
        }
        for (i, ex) in self.exemplars.iter().enumerate() {
            if self.kind.uses_titles() && ex.input.titles.is_empty() {
                return Err(JourneyError::input(format!("exemplar {i} has no titles for {:?}", self.kind)));
            }
            if self.kind.uses_keywords() && ex.input.keywords.is_empty() {
                return Err(JourneyError::input(format!("exemplar {i} has no keywords for {:?}", self.kind)));
            }
        }
        Ok(())
    }

    fn render_query(&self, titles: &str, keywords: &str) -> String {
        match self.kind {
            PromptKind::NaturalTitles => {
                format!("I consumed content with titles: {titles}.\nI would describe one of my interests as:")
            }
            PromptKind::StructuredTitles => format!("titles: {titles} interest_journey:"),
            PromptKind::StructuredKeywords => format!("keywords: {keywords} interest_journey:"),
            PromptKind::StructuredTitlesKeywords => {
                format!("titles: {titles} keywords: {keywords} interest_journey:")
            }
        }
    }

    fn truncated<'a>(&self, titles: &'a [String]) -> &'a [String] {
        match self.max_items {
            Some(n) if n < titles.len() => &titles[titles.len() - n..],
            _ => titles,
        }
    }

    /// Renders exemplars followed by the query for one or more journey
    /// blocks. Multiple blocks are separated by [`BLOCK_SEPARATOR`].
    pub fn render(&self, blocks: &[PromptInput]) -> Result<String> {
        self.validate()?;
        if blocks.is_empty() || blocks.iter().all(|b| b.titles.is_empty() && b.keywords.is_empty()) {
            return Err(JourneyError::input("cannot build a prompt for an empty journey"));
        }
        let mut out = String::new();
        for ex in &self.exemplars {
            let q = self.render_query(
                &ex.input.titles.join(TITLE_SEPARATOR),
                &ex.input.keywords.join(KEYWORD_SEPARATOR),
            );
            out.push_str(&q);
            out.push(' ');
            out.push_str(ex.target.trim());
            out.push_str("\n\n");
        }
        let titles = blocks
            .iter()
            .map(|b| self.truncated(&b.titles).join(TITLE_SEPARATOR))
            .collect::<Vec<_>>()
            .join(BLOCK_SEPARATOR);
        let keywords = blocks
            .iter()
            .map(|b| b.keywords.join(KEYWORD_SEPARATOR))
            .collect::<Vec<_>>()
            .join(BLOCK_SEPARATOR);
        out.push_str(&self.render_query(&titles, &keywords));
        Ok(out)
    }
}

/// Renders the prompt for a single journey.
pub fn build_prompt(journey: &PromptInput, template: &PromptTemplate) -> Result<String> {
    template.render(std::slice::from_ref(journey))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn titles(ts: &[&str]) -> PromptInput {
        PromptInput {
            titles: ts.iter().map(|s| s.to_string()).collect(),
            keywords: vec!["surf".into(), "wave".into()],
        }
    }

    #[test]
    fn natural_format() {
        let p = build_prompt(&titles(&["T1", "T2"]), &PromptTemplate::new(PromptKind::NaturalTitles)).unwrap();
        assert_eq!(p, "I consumed content with titles: T1; T2.\nI would describe one of my interests as:");
    }

    #[test]
    fn last_n_truncation() {
        let t = PromptTemplate::new(PromptKind::StructuredTitles).with_max_items(1);
        assert_eq!(build_prompt(&titles(&["T1", "T2", "T3"]), &t).unwrap(), "titles: T3 interest_journey:");
    }

    #[test]
    fn exemplars_come_first_in_order() {
        let ex = |t: &str, name: &str| Exemplar {
            input: PromptInput { titles: vec![t.into()], keywords: vec![] },
            target: name.into(),
        };
        let t = PromptTemplate::new(PromptKind::StructuredTitles)
            .with_exemplars(vec![ex("Equal Angles", "Olympiad Geometry"), ex("Seafaring", "Maritime History")]);
        let p = build_prompt(&titles(&["Q"]), &t).unwrap();
        assert_eq!(
            p,
            "titles: Equal Angles interest_journey: Olympiad Geometry\n\n\
             titles: Seafaring interest_journey: Maritime History\n\n\
             titles: Q interest_journey:"
        );
    }

    #[test]
    fn exemplar_kind_mismatch_and_empty_journey() {
        let t = PromptTemplate::new(PromptKind::StructuredKeywords).with_exemplars(vec![Exemplar {
            input: PromptInput { titles: vec!["x".into()], keywords: vec![] },
            target: "y".into(),
        }]);
        assert!(build_prompt(&titles(&["Q"]), &t).is_err());
        let empty = PromptInput::default();
        assert!(build_prompt(&empty, &PromptTemplate::new(PromptKind::NaturalTitles)).is_err());
    }

    #[test]
    fn kind_parses_from_snake_case() {
        assert_eq!("structured_titles_keywords".parse::<PromptKind>().unwrap(), PromptKind::StructuredTitlesKeywords);
        assert!("bogus".parse::<PromptKind>().is_err());
    }
}
