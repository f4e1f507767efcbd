//! Journey naming: prompt rendering, completion backends, and an overlap
//! score for comparing naming strategies.

mod backend;
mod bleu;
mod prompt;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::concept::{aggregate, ConceptVector};
use crate::error::{JourneyError, Result};
use crate::icpc::{extract_journeys, IcpcConfig, JourneyCluster};
use crate::item::UserHistory;

pub use backend::{
    clean_completion, CompletionClient, CompletionRequest, CompletionResponse, HttpCompletionClient,
    NAME_TOKEN_LIMIT, OFFLINE_NAME_TERMS,
};
pub use bleu::bleu;
pub use prompt::{
    build_prompt, Exemplar, PromptInput, PromptKind, PromptTemplate, BLOCK_SEPARATOR, KEYWORD_SEPARATOR,
    PROMPT_KEYWORDS, TITLE_SEPARATOR,
};

/// Titles and concept representation of a journey to be named.
#[derive(Debug, Clone, PartialEq)]
pub struct NamingJourney {
    pub titles: Vec<String>,
    pub representation: ConceptVector,
}

impl NamingJourney {
    /// Looks up member titles in `history`.
    pub fn from_cluster(cluster: &JourneyCluster, history: &UserHistory) -> Self {
        let titles: HashMap<&str, &str> = history
            .items
            .iter()
            .map(|i| (i.id.as_str(), i.title.as_str()))
            .collect();
        Self {
            titles: cluster
                .members
                .iter()
                .map(|m| titles.get(m.as_str()).copied().unwrap_or(m.as_str()).to_string())
                .collect(),
            representation: cluster.representation.clone(),
        }
    }

    /// The whole history as one journey.
    pub fn from_history(history: &UserHistory) -> Self {
        Self {
            titles: history.items.iter().map(|i| i.title.clone()).collect(),
            representation: aggregate(history.items.iter().map(|i| &i.concepts)),
        }
    }

    fn prompt_input(&self) -> PromptInput {
        PromptInput::from_journey(&self.titles, &self.representation)
    }
}

/// One naming call: one or more journey blocks rendered into one prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct NamingRequest {
    pub blocks: Vec<NamingJourney>,
    pub template: PromptTemplate,
}

impl NamingRequest {
    pub fn single(journey: NamingJourney, template: PromptTemplate) -> Self {
        Self {
            blocks: vec![journey],
            template,
        }
    }

    pub fn prompt(&self) -> Result<String> {
        let inputs: Vec<PromptInput> = self.blocks.iter().map(NamingJourney::prompt_input).collect();
        self.template.render(&inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamingResult {
    pub name: String,
    pub prompt: String,
    pub backend: String,
}

/// Where names come from.
#[derive(Clone, Copy)]
pub enum Backend<'a> {
    /// Joins each block's top salient terms; no model involved.
    Offline,
    Remote(&'a dyn CompletionClient),
}

impl Backend<'_> {
    pub fn tag(&self) -> &'static str {
        match self {
            Backend::Offline => "offline",
            Backend::Remote(_) => "remote",
        }
    }
}

impl std::fmt::Debug for Backend<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Offline name for one journey: its top terms joined by spaces.
pub fn offline_name(representation: &ConceptVector) -> String {
    representation
        .top_terms(OFFLINE_NAME_TERMS)
        .expect("OFFLINE_NAME_TERMS is positive")
        .into_iter()
        .map(|(t, _)| t)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Names the journeys of one request.
///
/// Remote failures are returned as errors; there is no fallback to the
/// offline namer.
pub fn name_journey(request: &NamingRequest, backend: Backend<'_>) -> Result<NamingResult> {
    let prompt = request.prompt()?;
    let name = match backend {
        Backend::Offline => request
            .blocks
            .iter()
            .map(|b| offline_name(&b.representation))
            .collect::<Vec<_>>()
            .join("; "),
        Backend::Remote(client) => clean_completion(&client.complete(&CompletionRequest::greedy(prompt.clone()))?),
    };
    Ok(NamingResult {
        name,
        prompt,
        backend: backend.tag().to_string(),
    })
}

/// Names many requests with at most `max_in_flight` concurrent calls.
/// Results keep the order of `requests`.
pub fn name_all(requests: &[NamingRequest], backend: Backend<'_>, max_in_flight: usize) -> Vec<Result<NamingResult>> {
    let cap = max_in_flight.max(1);
    if cap == 1 || matches!(backend, Backend::Offline) {
        return requests.iter().map(|r| name_journey(r, backend)).collect();
    }
    let mut out = Vec::with_capacity(requests.len());
    for chunk in requests.chunks(cap) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|r| s.spawn(move || name_journey(r, backend))).collect();
            for h in handles {
                out.push(h.join().unwrap_or_else(|_| {
                    Err(JourneyError::Backend {
                        status: None,
                        message: "naming worker panicked".into(),
                    })
                }));
            }
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamingMode {
    /// One call over the whole mixed history.
    WholeHistory,
    /// One call over all extracted journeys, separated block by block.
    ConcatenatedJourneys,
    /// One call per extracted journey.
    PerJourney,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeOutcome {
    pub mode: NamingMode,
    pub calls: usize,
    pub names: Vec<String>,
    pub errors: Vec<String>,
    /// Set when some calls failed and `names` is incomplete.
    pub partial: bool,
    /// Overlap between the concatenated names and the concatenated titles.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamingComparison {
    pub user_id: String,
    pub journeys: usize,
    pub modes: Vec<ModeOutcome>,
}

impl NamingComparison {
    pub fn mode(&self, mode: NamingMode) -> Option<&ModeOutcome> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

fn run_mode(mode: NamingMode, requests: Vec<NamingRequest>, backend: Backend<'_>, reference: &str, cap: usize) -> ModeOutcome {
    let calls = requests.len();
    let mut names = Vec::new();
    let mut errors = Vec::new();
    for r in name_all(&requests, backend, cap) {
        match r {
            Ok(res) => names.push(res.name),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let score = bleu(&names.join(" "), reference, 4);
    ModeOutcome {
        mode,
        calls,
        partial: !errors.is_empty(),
        names,
        errors,
        score,
    }
}

/// Names a history three ways (whole history, concatenated journeys, one
/// call per journey) and scores each against the history's titles.
pub fn compare_naming_modes(
    history: &UserHistory,
    cfg: &IcpcConfig,
    template: &PromptTemplate,
    backend: Backend<'_>,
    max_in_flight: usize,
) -> Result<NamingComparison> {
    let extracted = extract_journeys(history, cfg)?;
    let journeys: Vec<NamingJourney> = extracted
        .journeys
        .iter()
        .map(|j| NamingJourney::from_cluster(j, history))
        .collect();
    let reference = history.items.iter().map(|i| i.title.as_str()).collect::<Vec<_>>().join(" ");

    let whole = if history.is_empty() {
        vec![]
    } else {
        vec![NamingRequest::single(NamingJourney::from_history(history), template.clone())]
    };
    let concatenated = if journeys.is_empty() {
        vec![]
    } else {
        vec![NamingRequest {
            blocks: journeys.clone(),
            template: template.clone(),
        }]
    };
    let per_journey: Vec<NamingRequest> = journeys
        .iter()
        .map(|j| NamingRequest::single(j.clone(), template.clone()))
        .collect();

    Ok(NamingComparison {
        user_id: history.user_id.clone(),
        journeys: journeys.len(),
        modes: vec![
            run_mode(NamingMode::WholeHistory, whole, backend, &reference, max_in_flight),
            run_mode(NamingMode::ConcatenatedJourneys, concatenated, backend, &reference, max_in_flight),
            run_mode(NamingMode::PerJourney, per_journey, backend, &reference, max_in_flight),
        ],
    })
}
