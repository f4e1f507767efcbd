use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use journey_core::baselines::GlobalAssignment;
use journey_core::eval::{granularity_stats, report_table, Playlist};
use journey_core::io::{read_jsonl_file, write_jsonl, HistoryRecord, JourneysRecord};
use journey_core::naming::{
    compare_naming_modes, name_all, Backend, Exemplar, HttpCompletionClient, NamingJourney, NamingRequest,
    PromptTemplate,
};
use journey_core::pipeline::{fit_multimodal, run_e2, Extractor, Method};
use journey_core::synth::{generate, SynthSpec};
use journey_core::{aggregate, Corpus, Item, UserHistory};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Config, TOKEN_ENV};
use crate::error::CliError;

fn load_corpus(cfg: &Config) -> Result<Corpus, CliError> {
    let path = cfg
        .io
        .items
        .as_deref()
        .ok_or_else(|| CliError::Usage("an item corpus is required (--items or io.items)".into()))?;
    let items: Vec<Item> = read_jsonl_file(path).map_err(|e| in_file(path, e))?;
    Ok(Corpus::new(items)?)
}

fn in_file(path: &Path, e: journey_core::JourneyError) -> CliError {
    let inner = CliError::from(e);
    let msg = format!("{}: {inner}", path.display());
    match inner {
        CliError::Usage(_) => CliError::Usage(msg),
        CliError::Data(_) => CliError::Data(msg),
        CliError::Backend(_) => CliError::Backend(msg),
    }
}

fn load_histories(corpus: &Corpus, path: &Path) -> Result<Vec<UserHistory>, CliError> {
    let records: Vec<HistoryRecord> = read_jsonl_file(path).map_err(|e| in_file(path, e))?;
    records
        .iter()
        .map(|r| corpus.history(&r.user_id, &r.item_ids).map_err(|e| in_file(path, e)))
        .collect()
}

fn pool(cfg: &Config) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn build_extractor(cfg: &Config, method: Method, corpus: &Corpus) -> Result<Extractor, CliError> {
    Ok(match method {
        Method::Icpc => Extractor::Icpc(cfg.icpc()?),
        Method::Cooc => {
            let path = cfg.io.model.as_deref().ok_or_else(|| {
                CliError::Usage("cooc needs a trained model (--model, produced by train-cooc)".into())
            })?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let assignment: GlobalAssignment = serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            assignment.validate().map_err(|e| in_file(path, e))?;
            Extractor::Cooc {
                assignment,
                min_cluster_size: cfg.min_cluster_size,
            }
        }
        Method::Multimodal => Extractor::Multimodal {
            model: fit_multimodal(corpus, &cfg.multimodal)?,
            min_cluster_size: cfg.min_cluster_size,
        },
    })
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit_jsonl<T: Serialize>(out: Option<&Path>, records: &[T]) -> Result<(), CliError> {
    let w = open_out(out)?;
    Ok(write_jsonl(w, records)?)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Data(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Data(e.to_string()))
}

pub fn gen(spec_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", spec_path.display())))?;
    let spec: SynthSpec =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", spec_path.display())))?;
    let synth = generate(&spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;
    emit_jsonl(Some(&out_dir.join("items.jsonl")), &synth.items)?;
    emit_jsonl(Some(&out_dir.join("playlists.jsonl")), &synth.playlists)?;
    emit_jsonl(Some(&out_dir.join("histories.jsonl")), &synth.histories)?;
    Ok(())
}

pub fn train_cooc(cfg: &Config, histories: &Path, out: &Path) -> Result<(), CliError> {
    let corpus = load_corpus(cfg)?;
    let histories = load_histories(&corpus, histories)?;
    let assignment = journey_core::pipeline::train_cooc(&histories, &cfg.cooc)?;
    emit_json(Some(out), &assignment)
}


pub fn extract(cfg: &Config, method: Method, input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let corpus = load_corpus(cfg)?;
    let extractor = build_extractor(cfg, method, &corpus)?;
    let histories = load_histories(&corpus, input)?;
    let records: Vec<JourneysRecord> = pool(cfg)?.install(|| {
        histories
            .par_iter()
            .map(|h| extractor.extract(h).map(|r| JourneysRecord::from(&r)))
            .collect::<Result<_, _>>()
    })?;
    emit_jsonl(out, &records)
}

pub fn eval_e2(cfg: &Config, method: Method, playlists: &Path, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let corpus = load_corpus(cfg)?;
    let playlists: Vec<Playlist> = read_jsonl_file(playlists).map_err(|e| in_file(playlists, e))?;
    if playlists.len() < 2 {
        return Err(CliError::Data(format!(
            "mixing needs at least 2 playlists, found {}",
            playlists.len()
        )));
    }
    let extractor = build_extractor(cfg, method, &corpus)?;
    let (_, report) = run_e2(&playlists, &corpus, &extractor, seed)?;
    match out {
        Some(p) => {
            emit_json(Some(p), &report)?;
            print!("{}", report_table(std::slice::from_ref(&report)));
            Ok(())
        }
        None => emit_json(None, &report),
    }
}

pub fn stats_e1(cfg: &Config, method: Method, input: &Path, min_size: usize, out: Option<&Path>) -> Result<(), CliError> {
    let corpus = load_corpus(cfg)?;
    let extractor = build_extractor(cfg, method, &corpus)?;
    let histories = load_histories(&corpus, input)?;
    let results = pool(cfg)?.install(|| {
        histories
            .par_iter()
            .map(|h| extractor.extract(h))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let stats = granularity_stats(&results, min_size)?;
    emit_json(out, &stats)
}

fn template(cfg: &Config) -> Result<PromptTemplate, CliError> {
    let mut t = PromptTemplate::new(cfg.naming.template);
    if let Some(n) = cfg.naming.max_items {
        t = t.with_max_items(n);
    }
    if let Some(path) = cfg.naming.exemplars.as_deref() {
        let ex: Vec<Exemplar> = read_jsonl_file(path).map_err(|e| in_file(path, e))?;
        t = t.with_exemplars(ex);
    }
    t.validate()?;
    Ok(t)
}

fn client(cfg: &Config) -> Result<HttpCompletionClient, CliError> {
    let endpoint = cfg
        .naming
        .endpoint
        .as_deref()
        .ok_or_else(|| CliError::Usage("remote backend needs an endpoint (--endpoint or naming.endpoint)".into()))?;
    Ok(HttpCompletionClient::new(endpoint)
        .with_auth_token(std::env::var(TOKEN_ENV).ok())
        .with_timeout(Duration::from_secs(cfg.naming.timeout_secs)))
}

#[derive(Debug, Serialize)]
struct NameRecord {
    user_id: String,
    idx: usize,
    backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompt: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn name(cfg: &Config, remote: bool, input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let corpus = load_corpus(cfg)?;
    let template = template(cfg)?;
    let records: Vec<JourneysRecord> = read_jsonl_file(input).map_err(|e| in_file(input, e))?;
    let mut keys = Vec::new();
    let mut requests = Vec::new();
    for rec in &records {
        for j in &rec.journeys {
            let history = corpus.history(&rec.user_id, &j.item_ids).map_err(|e| in_file(input, e))?;
            let journey = NamingJourney {
                titles: history.items.iter().map(|i| i.title.clone()).collect(),
                representation: aggregate(history.items.iter().map(|i| &i.concepts)),
            };
            keys.push((rec.user_id.clone(), j.idx));
            requests.push(NamingRequest::single(journey, template.clone()));
        }
    }
    let http;
    let backend = if remote {
        http = client(cfg)?;
        Backend::Remote(&http)
    } else {
        Backend::Offline
    };
    let results = name_all(&requests, backend, cfg.naming.max_in_flight);
    let mut failures = 0;
    let out_records: Vec<NameRecord> = keys
        .into_iter()
        .zip(results)
        .map(|((user_id, idx), r)| match r {
            Ok(res) => NameRecord {
                user_id,
                idx,
                backend: res.backend,
                name: Some(res.name),
                prompt: Some(res.prompt),
                error: None,
            },
            Err(e) => {
                failures += 1;
                NameRecord {
                    user_id,
                    idx,
                    backend: backend.tag().to_string(),
                    name: None,
                    prompt: None,
                    error: Some(e.to_string()),
                }
            }
        })
        .collect();
    emit_jsonl(out, &out_records)?;
    if failures > 0 {
        return Err(CliError::Backend(format!(
            "{failures} of {} naming call(s) failed",
            out_records.len()
        )));
    }
    Ok(())
}

pub fn compare_naming(cfg: &Config, remote: bool, input: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let corpus = load_corpus(cfg)?;
    let template = template(cfg)?;
    let icpc = cfg.icpc()?;
    let histories = load_histories(&corpus, input)?;
    let http;
    let backend = if remote {
        http = client(cfg)?;
        Backend::Remote(&http)
    } else {
        Backend::Offline
    };
    let comparisons = histories
        .iter()
        .map(|h| compare_naming_modes(h, &icpc, &template, backend, cfg.naming.max_in_flight))
        .collect::<Result<Vec<_>, _>>()?;
    emit_jsonl(out, &comparisons)?;
    let partial = comparisons
        .iter()
        .flat_map(|c| &c.modes)
        .filter(|m| m.partial)
        .count();
    if partial > 0 {
        return Err(CliError::Backend(format!("{partial} naming mode run(s) had failed calls")));
    }
    Ok(())
}
