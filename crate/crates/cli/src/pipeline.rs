//! Executes an experiment config: ingest, split, the selected task, then
//! persistence and artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;
use tcbench::ablation::{self, Anchor, CurveOptions, LearningCurve};
use tcbench::corpus::{self, Dataset, LabelSchema, LoadOptions, Split, TableFormat};
use tcbench::finetune::{self, SeedRun, TrainConfig, TrainedClassifier};
use tcbench::metrics::{self, MetricReport};
use tcbench::mtclient::{DeeplConfig, DeeplTransport, TranslateTransport, TranslationCache, Translator};
use tcbench::report::{self, RunRecord, RunResult, TableFormat as OutFormat, TableOptions};
use tcbench::zeroshot::{
    self, ChatTransport, DatasetOutcome, EntailmentScorer, HttpChatTransport, HttpNliScorer, PromptTemplate,
    TemplateRegistry, ZeroShotClassifier,
};

use crate::config::{AnchorKind, Artifact, DataFormat, DatasetSection, ExperimentConfig, Task};
use crate::CliError;

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub dry_run: bool,
    /// Replaces `evaluation.seeds` with this single seed.
    pub seed: Option<u64>,
    /// Replaces `output.artifact_dir`.
    pub out: Option<PathBuf>,
}

/// External services; `None` entries are built from the config on demand.
#[derive(Default)]
pub struct Backends {
    pub chat: Option<Box<dyn ChatTransport>>,
    pub nli: Option<Box<dyn EntailmentScorer>>,
    pub translator: Option<Box<dyn TranslateTransport>>,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub plan: String,
    pub records: Vec<RunRecord>,
    /// Markdown table of the run(s), when the task produces table rows.
    pub table: Option<String>,
    pub artifacts: Vec<PathBuf>,
}

/// Apply command-line overrides to a loaded config.
pub fn apply_overrides(cfg: &mut ExperimentConfig, opts: &RunOptions) {
    if let Some(seed) = opts.seed {
        cfg.evaluation.seeds = vec![seed];
    }
    if let Some(out) = &opts.out {
        cfg.output.artifact_dir = out.clone();
    }
}

fn data_format(d: &DatasetSection) -> DataFormat {
    d.format.unwrap_or_else(|| match TableFormat::from_path(&d.path) {
        Some(TableFormat::Jsonl) => DataFormat::Jsonl,
        _ => DataFormat::Csv,
    })
}

/// Human-readable execution plan.
pub fn plan(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let task = cfg.task()?;
    let d = &cfg.dataset;
    let mut steps = vec![format!("load {} ({:?})", d.path.display(), data_format(d))];
    if d.label_map.is_some() {
        steps.push(format!("map labels onto {:?}", d.labels.clone().unwrap_or_default()));
    }
    if d.clean_social {
        steps.push("clean social-media text (RT markers, URLs, handles)".into());
    }
    if let Some(key) = d.aggregate {
        steps.push(format!("aggregate duplicate records by {key:?} (strict majority)"));
    }
    if let Some(t) = &d.translate {
        steps.push(format!(
            "translate {} -> {} via {}",
            t.source_lang, t.target_lang, t.provider
        ));
    }
    let e = &cfg.evaluation;
    steps.push(format!(
        "split off {} test records (split seed {}, stratified {})",
        e.test_size, e.split_seed, e.stratified
    ));
    match &task {
        Task::Finetune(_) => {
            let t = cfg.train_config()?;
            steps.push(format!(
                "fine-tune {} with seeds {:?}: {}",
                t.backbone_id,
                e.seeds,
                json!(t)
            ));
        }
        Task::ZeroShot(z) => {
            let p = cfg.model.provider.as_ref().expect("validated");
            steps.push(format!(
                "zero-shot prompt {} with template {} (temperature {}, max_attempts {})",
                p.model_id,
                z.template
                    .clone()
                    .unwrap_or_else(|| z.template_path.clone().unwrap_or_default().display().to_string()),
                p.temperature,
                p.max_attempts
            ));
        }
        Task::Nli(_) => {
            let n = cfg.model.nli.as_ref().expect("validated");
            steps.push(format!("NLI zero-shot with {} at {}", n.model_id, n.url));
        }
        Task::Baseline(_) => steps.push("majority-class baseline".into()),
        Task::Ablation(a) => {
            let t = cfg.train_config()?;
            steps.push(format!(
                "learning curve for {} at sizes {:?} with seeds {:?}{}{}",
                t.backbone_id,
                a.sizes,
                e.seeds,
                if a.include_full_data {
                    " plus the full train pool"
                } else {
                    ""
                },
                a.anchor.map(|k| format!(", {k:?} anchor at N=0")).unwrap_or_default()
            ));
        }
    }
    steps.push(format!(
        "persist run record to {}; artifacts {:?} to {}",
        cfg.output.store_dir.display(),
        cfg.output.artifacts,
        cfg.output.artifact_dir.display()
    ));
    Ok(steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}\n", i + 1))
        .collect())
}

/// Load, relabel, clean, aggregate and translate the configured dataset.
pub fn prepare_dataset(cfg: &ExperimentConfig, backends: &Backends) -> Result<Dataset, CliError> {
    let d = &cfg.dataset;
    let target = d.labels.as_ref().map(LabelSchema::new).transpose()?;
    let mut ds = match data_format(d) {
        DataFormat::Dataset => corpus::open_dataset(&d.path)?,
        fmt => {
            let table_format = if fmt == DataFormat::Jsonl {
                TableFormat::Jsonl
            } else {
                TableFormat::Csv
            };
            let opts = LoadOptions {
                id_column: d.id_column.clone(),
                group_column: d.group_column.clone(),
                filter: d.filter.clone(),
                missing_text: d.missing_text,
                ..LoadOptions::new(table_format, &d.text_column, &d.label_column)
            };
            let schema = if d.label_map.is_some() { None } else { target.as_ref() };
            corpus::load_table(&d.path, &opts, schema)?
        }
    };
    if let (Some(map), Some(target)) = (&d.label_map, &target) {
        ds = corpus::map_labels(&ds, map, target, d.drop_unmapped)?;
    }
    if d.clean_social {
        ds = corpus::clean_dataset(&ds, corpus::clean_social_text).0;
    }
    if let Some(key) = d.aggregate {
        ds = corpus::aggregate_majority(&ds, key)?;
    }
    if let Some(t) = &d.translate {
        let cache = match &t.cache {
            Some(p) => TranslationCache::load(p)?,
            None => TranslationCache::new(),
        };
        let owned;
        let transport: &dyn TranslateTransport = match &backends.translator {
            Some(b) => b.as_ref(),
            None => {
                owned = DeeplTransport::from_config(&DeeplConfig {
                    base_url: t.base_url.clone(),
                    auth_env_var: t.auth_env_var.clone(),
                })?;
                &owned
            }
        };
        let result = Translator::new(transport, &cache, t.options.clone()).translate_dataset(
            &ds,
            &t.source_lang,
            &t.target_lang,
        );
        // keep whatever was translated before a failure
        if let Some(p) = &t.cache {
            cache.save(p)?;
        }
        ds = result?;
    }
    log::info!(
        "dataset ready: {} records, class counts {:?}",
        ds.len(),
        ds.class_counts()
    );
    Ok(ds)
}

pub fn make_split(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Split, CliError> {
    let e = &cfg.evaluation;
    Ok(corpus::split(ds, e.test_size, e.split_seed, e.stratified)?)
}

fn template_for(registry: &TemplateRegistry, id: &str) -> Result<PromptTemplate, CliError> {
    Ok(registry.get(id)?.clone())
}

fn prompt_template(task: &crate::config::PromptTask) -> Result<PromptTemplate, CliError> {
    match (&task.template, &task.template_path) {
        (Some(id), _) => {
            let mut t = template_for(&TemplateRegistry::builtin(), id)?;
            if let Some(forms) = &task.surface_forms {
                t = PromptTemplate::new(t.task_id(), t.body(), forms.clone())?;
            }
            Ok(t)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::ConfigInvalid(format!("task.zeroshot.template_path: {}: {e}", path.display()))
            })?;
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("custom");
            Ok(PromptTemplate::from_text(id, &text, task.surface_forms.clone())?)
        }
        (None, None) => Err(CliError::ConfigInvalid("task.zeroshot: no template".into())),
    }
}

fn hypotheses(template: &Option<String>, explicit: &Option<Vec<String>>) -> Result<Vec<String>, CliError> {
    match explicit {
        Some(h) => Ok(h.clone()),
        None => {
            let id = template.as_deref().expect("validated");
            Ok(template_for(&TemplateRegistry::builtin(), id)?
                .label_surface_forms()
                .to_vec())
        }
    }
}

struct Output<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn path(&mut self, name: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        let p = self.dir.join(name);
        self.written.push(p.clone());
        Ok(p)
    }

    fn write(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let p = self.path(name)?;
        fs::write(&p, body).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
    }
}

fn zeroshot_predictions(ds: &Dataset, outcome: &DatasetOutcome) -> String {
    let mut out = String::new();
    for (rec, o) in ds.records.iter().zip(&outcome.outcomes) {
        let line = json!({
            "record_id": rec.record_id,
            "gold": rec.label.and_then(|l| ds.schema.name_of(l)),
            "predicted": o.label().and_then(|l| ds.schema.name_of(l)),
            "outcome": o,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

fn outcome_result(outcome: &DatasetOutcome) -> Result<RunResult, CliError> {
    let report = outcome
        .report
        .clone()
        .ok_or_else(|| CliError::Runtime(format!("all {} records failed; no metrics", outcome.outcomes.len())))?;
    Ok(RunResult::Single {
        report,
        exclusion_rate: Some(outcome.exclusion_rate),
    })
}

fn chat_transport<'b>(
    cfg: &ExperimentConfig,
    backends: &'b Backends,
    owned: &'b mut Option<HttpChatTransport>,
) -> Result<&'b dyn ChatTransport, CliError> {
    if let Some(b) = &backends.chat {
        return Ok(b.as_ref());
    }
    let p = cfg.model.provider.as_ref().expect("validated");
    Ok(owned.insert(HttpChatTransport::from_config(p)?))
}

fn nli_scorer<'b>(
    cfg: &ExperimentConfig,
    backends: &'b Backends,
    owned: &'b mut Option<HttpNliScorer>,
) -> Result<&'b dyn EntailmentScorer, CliError> {
    if let Some(b) = &backends.nli {
        return Ok(b.as_ref());
    }
    let n = cfg.model.nli.as_ref().expect("validated");
    Ok(owned.insert(HttpNliScorer::from_config(n)?))
}

type SeedModels = Vec<(u64, TrainedClassifier)>;

/// Fine-tune once per seed on `split`, keeping models only when asked.
fn finetune_seeds(
    split: &Split,
    train_cfg: &TrainConfig,
    seeds: &[u64],
    keep_models: bool,
) -> Result<(Vec<SeedRun>, SeedModels), CliError> {
    let mut runs = Vec::new();
    let mut models = Vec::new();
    for &seed in seeds {
        let cfg = TrainConfig {
            seed,
            ..train_cfg.clone()
        };
        let model = finetune::fine_tune(split, &cfg)?;
        let report = model.evaluate(&split.test)?;
        log::info!(
            "seed {seed}: accuracy {:.4}, f1_macro {:.4}",
            report.accuracy,
            report.f1_macro
        );
        runs.push(SeedRun {
            seed,
            report,
            training_log: model.training_log.clone(),
        });
        if keep_models {
            models.push((seed, model));
        }
    }
    Ok((runs, models))
}

/// Run the configured task end to end. `expect` restricts the accepted task
/// kinds for stage subcommands.
pub fn execute(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    backends: &Backends,
    expect: Option<&[&str]>,
) -> Result<RunSummary, CliError> {
    let mut cfg = cfg.clone();
    apply_overrides(&mut cfg, opts);
    cfg.validate()?;
    let task = cfg.task()?;
    if let Some(kinds) = expect {
        if !kinds.contains(&task.kind()) {
            return Err(CliError::ConfigInvalid(format!(
                "task: this subcommand runs {} tasks, the config selects {}",
                kinds.join(" or "),
                task.kind()
            )));
        }
    }
    let plan = plan(&cfg)?;
    if opts.dry_run {
        return Ok(RunSummary {
            plan,
            ..RunSummary::default()
        });
    }

    let ds = prepare_dataset(&cfg, backends)?;
    let fingerprint = ds.fingerprint();
    let artifacts = &cfg.output.artifacts;
    let wants = |a: Artifact| artifacts.contains(&a);
    let run_id = report::new_run_id();
    let mut out = Output {
        dir: &cfg.output.artifact_dir,
        written: Vec::new(),
    };
    let seeds = cfg.evaluation.seeds.clone();

    let (system_name, config_snapshot, run_seeds, result) = match &task {
        Task::Baseline(b) => {
            let split = make_split(&ds, &cfg)?;
            let clf = metrics::majority_classifier(&split.train.labels()?)?;
            let truth = split.test.labels()?;
            let report = metrics::evaluate(&truth, &clf.predict(truth.len()), &ds.schema)?;
            (
                b.system_name.clone().unwrap_or_else(|| "MAJ-VOT".into()),
                json!({ "task": "baseline", "evaluation": cfg.evaluation, "majority_label": ds.schema.name_of(clf.label) }),
                vec![],
                RunResult::Single {
                    report,
                    exclusion_rate: None,
                },
            )
        }
        Task::Finetune(f) => {
            let train_cfg = cfg.train_config()?;
            let split = make_split(&ds, &cfg)?;
            let (runs, models) = finetune_seeds(
                &split,
                &train_cfg,
                &seeds,
                wants(Artifact::Model) || wants(Artifact::Predictions),
            )?;
            let reports: Vec<MetricReport> = runs.iter().map(|r| r.report.clone()).collect();
            let aggregate = metrics::aggregate(&reports)?;
            for (seed, model) in &models {
                if wants(Artifact::Model) {
                    let dir = out.path(&format!("{run_id}.model-seed-{seed}"))?;
                    model.save(&dir)?;
                }
                if wants(Artifact::Predictions) {
                    let texts = split.test.texts();
                    let preds = model.predict(&texts)?;
                    let mut body = String::new();
                    for (rec, p) in split.test.records.iter().zip(preds) {
                        let line = json!({
                            "record_id": rec.record_id,
                            "gold": rec.label.and_then(|l| ds.schema.name_of(l)),
                            "predicted": ds.schema.name_of(p.label_id),
                            "probabilities": p.probabilities,
                        });
                        body.push_str(&line.to_string());
                        body.push('\n');
                    }
                    out.write(&format!("{run_id}.predictions-seed-{seed}.jsonl"), &body)?;
                }
            }
            let name = f.system_name.clone().unwrap_or_else(|| {
                finetune::preset(&train_cfg.backbone_id)
                    .map(|p| p.short_name.to_owned())
                    .unwrap_or_else(|| train_cfg.backbone_id.clone())
            });
            (
                name,
                json!({ "task": "finetune", "train": train_cfg, "evaluation": cfg.evaluation }),
                seeds.clone(),
                RunResult::Aggregate { aggregate, runs },
            )
        }
        Task::ZeroShot(z) => {
            let template = prompt_template(z)?;
            let provider = cfg.model.provider.clone().expect("validated");
            let eval = if z.all_records {
                ds.clone()
            } else {
                make_split(&ds, &cfg)?.test
            };
            let mut owned = None;
            let transport = chat_transport(&cfg, backends, &mut owned)?;
            let mut clf = ZeroShotClassifier::new(&template, &provider, transport)?;
            if wants(Artifact::Transcript) {
                let p = out.path(&format!("{run_id}.transcript.jsonl"))?;
                let f = File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                clf = clf.with_transcript(Box::new(BufWriter::new(f)));
            }
            let outcome = clf.classify_dataset(&eval)?;
            drop(clf);
            if wants(Artifact::Predictions) {
                out.write(
                    &format!("{run_id}.predictions.jsonl"),
                    &zeroshot_predictions(&eval, &outcome),
                )?;
            }
            log::info!(
                "{} of {} records failed validation",
                outcome.n_failed,
                outcome.outcomes.len()
            );
            (
                z.system_name.clone().unwrap_or_else(|| provider.model_id.clone()),
                json!({ "task": "zeroshot", "provider": provider, "template": template.task_id(), "prompt_body": template.body(), "label_surface_forms": template.label_surface_forms(), "evaluation": cfg.evaluation, "all_records": z.all_records }),
                vec![],
                outcome_result(&outcome)?,
            )
        }
        Task::Nli(n) => {
            let hyps = hypotheses(&n.template, &n.hypotheses)?;
            let endpoint = cfg.model.nli.clone().expect("validated");
            let eval = if n.all_records {
                ds.clone()
            } else {
                make_split(&ds, &cfg)?.test
            };
            let mut owned = None;
            let scorer = nli_scorer(&cfg, backends, &mut owned)?;
            let outcome = zeroshot::nli_classify_dataset(&eval, &hyps, scorer, endpoint.max_in_flight)?;
            if wants(Artifact::Predictions) {
                out.write(
                    &format!("{run_id}.predictions.jsonl"),
                    &zeroshot_predictions(&eval, &outcome),
                )?;
            }
            (
                n.system_name.clone().unwrap_or_else(|| endpoint.model_id.clone()),
                json!({ "task": "nli", "endpoint": endpoint, "hypotheses": hyps, "evaluation": cfg.evaluation, "all_records": n.all_records }),
                vec![],
                outcome_result(&outcome)?,
            )
        }
        Task::Ablation(a) => {
            let train_cfg = cfg.train_config()?;
            let curve_opts = CurveOptions {
                test_size: cfg.evaluation.test_size,
                split_seed: cfg.evaluation.split_seed,
                include_full_data: a.include_full_data,
            };
            let mut chat_owned = None;
            let mut nli_owned = None;
            let curve: LearningCurve = match a.anchor {
                None => ablation::run_learning_curve_with(&ds, &train_cfg, &a.sizes, &seeds, &curve_opts, None)?,
                Some(AnchorKind::Nli) => {
                    let hyps = hypotheses(&a.template, &a.hypotheses)?;
                    let endpoint = cfg.model.nli.clone().expect("validated");
                    let scorer = nli_scorer(&cfg, backends, &mut nli_owned)?;
                    let anchor = |test: &Dataset| -> Result<Anchor, String> {
                        let o = zeroshot::nli_classify_dataset(test, &hyps, scorer, endpoint.max_in_flight)
                            .map_err(|e| e.to_string())?;
                        Ok(Anchor {
                            system_name: endpoint.model_id.clone(),
                            report: o.report.ok_or("every anchor record failed")?,
                        })
                    };
                    ablation::run_learning_curve_with(&ds, &train_cfg, &a.sizes, &seeds, &curve_opts, Some(&anchor))?
                }
                Some(AnchorKind::Zeroshot) => {
                    let template =
                        template_for(&TemplateRegistry::builtin(), a.template.as_deref().expect("validated"))?;
                    let provider = cfg.model.provider.clone().expect("validated");
                    let transport = chat_transport(&cfg, backends, &mut chat_owned)?;
                    let anchor = |test: &Dataset| -> Result<Anchor, String> {
                        let clf =
                            ZeroShotClassifier::new(&template, &provider, transport).map_err(|e| e.to_string())?;
                        let o = clf.classify_dataset(test).map_err(|e| e.to_string())?;
                        Ok(Anchor {
                            system_name: provider.model_id.clone(),
                            report: o.report.ok_or("every anchor record failed")?,
                        })
                    };
                    ablation::run_learning_curve_with(&ds, &train_cfg, &a.sizes, &seeds, &curve_opts, Some(&anchor))?
                }
            };
            if wants(Artifact::CurveJson) {
                out.write(&format!("{run_id}.curve.json"), &curve.to_json())?;
            }
            if wants(Artifact::CurveSvg) {
                let p = out.path(&format!("{run_id}.curve.svg"))?;
                report::render_curve_plot(&curve, &a.metrics, &p)?;
            }
            let name = a.system_name.clone().unwrap_or_else(|| {
                finetune::preset(&train_cfg.backbone_id)
                    .map(|p| p.short_name.to_owned())
                    .unwrap_or_else(|| train_cfg.backbone_id.clone())
            });
            (
                name,
                json!({ "task": "ablation", "train": train_cfg, "ablation": a, "evaluation": cfg.evaluation }),
                seeds.clone(),
                RunResult::Curve { curve },
            )
        }
    };

    let record = RunRecord {
        run_id,
        config: config_snapshot,
        seeds: run_seeds,
        ..RunRecord::new(
            task.kind(),
            system_name,
            serde_json::Value::Null,
            fingerprint,
            vec![],
            result,
        )
    };

    let rows = curve_or_table_rows(&record);
    let table = if rows.is_empty() {
        None
    } else {
        let md = report::render_table(&rows, &TableOptions::default())?;
        if wants(Artifact::TableMd) {
            out.write(&format!("{}.table.md", record.run_id), &md)?;
        }
        if wants(Artifact::TableTex) {
            let tex = report::render_table(
                &rows,
                &TableOptions {
                    format: OutFormat::Latex,
                    bold_best: false,
                },
            )?;
            out.write(&format!("{}.table.tex", record.run_id), &tex)?;
        }
        Some(md)
    };

    report::persist_run(&record, &cfg.output.store_dir)?;
    Ok(RunSummary {
        plan,
        records: vec![record],
        table,
        artifacts: out.written,
    })
}

/// Table rows for one record; curves become one row per training size.
pub fn curve_or_table_rows(record: &RunRecord) -> Vec<(String, metrics::AggregateReport)> {
    match &record.result {
        RunResult::Curve { curve } => {
            let mut rows = Vec::new();
            if let Some(a) = &curve.zero_shot_anchor {
                if let Ok(agg) = metrics::aggregate(std::slice::from_ref(&a.report)) {
                    rows.push((format!("{} (N=0)", a.system_name), agg));
                }
            }
            rows.extend(
                curve
                    .points
                    .iter()
                    .map(|p| (format!("{} (N={})", record.system_name, p.n_train), p.aggregate.clone())),
            );
            if let Some(full) = &curve.full_data_point {
                rows.push((
                    format!("{} (full, N={})", record.system_name, full.n_train),
                    full.aggregate.clone(),
                ));
            }
            rows
        }
        _ => report::table_rows(std::slice::from_ref(record)),
    }
}

/// `ingest`: prepared dataset written as a canonical dump.
pub fn ingest(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    backends: &Backends,
) -> Result<(Dataset, Option<PathBuf>), CliError> {
    let mut cfg = cfg.clone();
    apply_overrides(&mut cfg, opts);
    let ds = prepare_dataset(&cfg, backends)?;
    if opts.dry_run {
        return Ok((ds, None));
    }
    let dir = &cfg.output.artifact_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join("dataset.jsonl");
    corpus::save_dataset(&ds, &path)?;
    Ok((ds, Some(path)))
}

/// `split`: train and test dumps.
pub fn split_stage(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    backends: &Backends,
) -> Result<(Split, Vec<PathBuf>), CliError> {
    let mut cfg = cfg.clone();
    apply_overrides(&mut cfg, opts);
    let ds = prepare_dataset(&cfg, backends)?;
    let split = make_split(&ds, &cfg)?;
    if opts.dry_run {
        return Ok((split, vec![]));
    }
    let dir = &cfg.output.artifact_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let train = dir.join("train.jsonl");
    let test = dir.join("test.jsonl");
    corpus::save_dataset(&split.train, &train)?;
    corpus::save_dataset(&split.test, &test)?;
    Ok((split, vec![train, test]))
}

/// `report`: table over every non-curve run in a store.
pub fn report_table(store_dir: &Path, latex: bool, bold_best: bool) -> Result<String, CliError> {
    let records = report::list_runs(store_dir)?;
    let rows: Vec<_> = records.iter().flat_map(curve_or_table_rows).collect();
    let opts = TableOptions {
        format: if latex { OutFormat::Latex } else { OutFormat::Markdown },
        bold_best,
    };
    Ok(report::render_table(&rows, &opts)?)
}

pub fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(body.as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
