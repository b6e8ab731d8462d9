//! Experiment configuration files (TOML).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tcbench::ablation::DEFAULT_SIZES;
use tcbench::corpus::{AggregateKey, MissingTextPolicy, RowFilter, DEFAULT_SPLIT_SEED};
use tcbench::finetune::TrainConfig;
use tcbench::metrics::Metric;
use tcbench::mtclient::TranslateOptions;
use tcbench::zeroshot::{NliEndpointConfig, ProviderConfig, TemplateRegistry};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Jsonl,
    /// Canonical dump written by `tcbench ingest`.
    Dataset,
}

fn default_text() -> String {
    "text".into()
}
fn default_label() -> String {
    "label".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub path: PathBuf,
    /// Inferred from the file extension when absent.
    #[serde(default)]
    pub format: Option<DataFormat>,
    #[serde(default = "default_text")]
    pub text_column: String,
    #[serde(default = "default_label")]
    pub label_column: String,
    #[serde(default)]
    pub id_column: Option<String>,
    #[serde(default)]
    pub group_column: Option<String>,
    #[serde(default)]
    pub filter: Option<RowFilter>,
    #[serde(default)]
    pub missing_text: MissingTextPolicy,
    /// Label schema in id order. With `label_map`, the target schema.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub label_map: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub drop_unmapped: bool,
    #[serde(default)]
    pub clean_social: bool,
    #[serde(default)]
    pub aggregate: Option<AggregateKey>,
    #[serde(default)]
    pub translate: Option<TranslateSection>,
}

fn default_deepl_url() -> String {
    "https://api-free.deepl.com".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateSection {
    #[serde(default = "default_provider")]
    pub provider: String,
    #[serde(default = "default_deepl_url")]
    pub base_url: String,
    pub auth_env_var: String,
    pub source_lang: String,
    pub target_lang: String,
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub options: TranslateOptions,
}

fn default_provider() -> String {
    "deepl".into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinetuneTask {
    #[serde(default)]
    pub system_name: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptTask {
    /// Built-in template id.
    #[serde(default)]
    pub template: Option<String>,
    /// Custom template file; surface forms come from its `Labels:` line
    /// unless `surface_forms` is given.
    #[serde(default)]
    pub template_path: Option<PathBuf>,
    #[serde(default)]
    pub surface_forms: Option<Vec<String>>,
    #[serde(default)]
    pub system_name: Option<String>,
    /// Classify the whole dataset instead of the test split.
    #[serde(default)]
    pub all_records: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NliTask {
    #[serde(default)]
    pub template: Option<String>,
    /// One hypothesis per label in schema order; defaults to the template's
    /// surface forms.
    #[serde(default)]
    pub hypotheses: Option<Vec<String>>,
    #[serde(default)]
    pub system_name: Option<String>,
    #[serde(default)]
    pub all_records: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineTask {
    #[serde(default)]
    pub system_name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorKind {
    Nli,
    Zeroshot,
}

fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}

fn default_curve_metrics() -> Vec<Metric> {
    vec![Metric::F1Macro, Metric::F1Weighted, Metric::Accuracy]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationTask {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub include_full_data: bool,
    #[serde(default)]
    pub anchor: Option<AnchorKind>,
    /// Template for the anchor (zero-shot prompt or NLI hypotheses).
    #[serde(default)]
    pub template: Option<String>,
    #[serde(default)]
    pub hypotheses: Option<Vec<String>>,
    #[serde(default = "default_curve_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub system_name: Option<String>,
}

impl Default for AblationTask {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            include_full_data: false,
            anchor: None,
            template: None,
            hypotheses: None,
            metrics: default_curve_metrics(),
            system_name: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    #[serde(default)]
    pub finetune: Option<FinetuneTask>,
    #[serde(default)]
    pub zeroshot: Option<PromptTask>,
    #[serde(default)]
    pub nli: Option<NliTask>,
    #[serde(default)]
    pub baseline: Option<BaselineTask>,
    #[serde(default)]
    pub ablation: Option<AblationTask>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Finetune(FinetuneTask),
    ZeroShot(PromptTask),
    Nli(NliTask),
    Baseline(BaselineTask),
    Ablation(AblationTask),
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Finetune(_) => "finetune",
            Task::ZeroShot(_) => "zeroshot",
            Task::Nli(_) => "nli",
            Task::Baseline(_) => "baseline",
            Task::Ablation(_) => "ablation",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Partial [`TrainConfig`]; omitted keys take the backbone preset's values.
    #[serde(default)]
    pub train: Option<toml::Table>,
    #[serde(default)]
    pub provider: Option<ProviderConfig>,
    #[serde(default)]
    pub nli: Option<NliEndpointConfig>,
}

fn default_test_size() -> usize {
    200
}
fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3]
}
fn default_true() -> bool {
    true
}
fn default_split_seed() -> u64 {
    DEFAULT_SPLIT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default = "default_split_seed")]
    pub split_seed: u64,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        Self {
            test_size: default_test_size(),
            seeds: default_seeds(),
            stratified: true,
            split_seed: default_split_seed(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    TableMd,
    TableTex,
    CurveJson,
    CurveSvg,
    Predictions,
    Transcript,
    Model,
}

fn default_store() -> PathBuf {
    "runs".into()
}
fn default_artifact_dir() -> PathBuf {
    "artifacts".into()
}
/// Tables are written for tasks with table rows, curves only for ablations.
fn default_artifacts() -> Vec<Artifact> {
    vec![Artifact::TableMd, Artifact::CurveJson, Artifact::CurveSvg]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_store")]
    pub store_dir: PathBuf,
    #[serde(default = "default_artifact_dir")]
    pub artifact_dir: PathBuf,
    #[serde(default = "default_artifacts")]
    pub artifacts: Vec<Artifact>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            store_dir: default_store(),
            artifact_dir: default_artifact_dir(),
            artifacts: default_artifacts(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string()))
    }

    /// Parse, make relative paths relative to the file's directory, validate.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.dataset.path);
        resolve(base, &mut cfg.output.store_dir);
        resolve(base, &mut cfg.output.artifact_dir);
        if let Some(t) = &mut cfg.dataset.translate {
            if let Some(c) = &mut t.cache {
                resolve(base, c);
            }
        }
        if let Some(p) = cfg.task.zeroshot.as_mut().and_then(|z| z.template_path.as_mut()) {
            resolve(base, p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The single selected task.
    pub fn task(&self) -> Result<Task, CliError> {
        let t = &self.task;
        let mut selected = Vec::new();
        if let Some(x) = &t.finetune {
            selected.push(Task::Finetune(x.clone()));
        }
        if let Some(x) = &t.zeroshot {
            selected.push(Task::ZeroShot(x.clone()));
        }
        if let Some(x) = &t.nli {
            selected.push(Task::Nli(x.clone()));
        }
        if let Some(x) = &t.baseline {
            selected.push(Task::Baseline(x.clone()));
        }
        if let Some(x) = &t.ablation {
            selected.push(Task::Ablation(x.clone()));
        }
        match selected.len() {
            1 => Ok(selected.pop().expect("one")),
            0 => Err(CliError::ConfigInvalid(
                "task: select exactly one of finetune, zeroshot, nli, baseline, ablation (none given)".into(),
            )),
            _ => Err(CliError::ConfigInvalid(format!(
                "task: select exactly one task, got {}",
                selected.iter().map(Task::kind).collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    /// Training config with preset-aware defaults for omitted keys.
    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let user = self.model.train.clone().unwrap_or_default();
        let backbone = match user.get("backbone_id") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => {
                return Err(CliError::ConfigInvalid(
                    "model.train.backbone_id: expected a string".into(),
                ))
            }
            None => TrainConfig::default().backbone_id,
        };
        let base = TrainConfig::for_backbone(&backbone);
        let mut merged = toml::Table::try_from(&base).expect("serializable");
        merged.extend(user);
        merged.insert("backbone_id".into(), toml::Value::String(base.backbone_id.clone()));
        let cfg: TrainConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e| CliError::ConfigInvalid(format!("model.train: {e}")))?;
        cfg.validate()
            .map_err(|e| CliError::ConfigInvalid(format!("model.train: {e}")))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut errors: Vec<String> = Vec::new();
        let task = self.task()?;

        let d = &self.dataset;
        if d.path.as_os_str().is_empty() {
            errors.push("dataset.path: must not be empty".into());
        }
        if d.format.is_none() && tcbench::corpus::TableFormat::from_path(&d.path).is_none() {
            errors.push("dataset.format: cannot infer from the file extension; set csv, jsonl or dataset".into());
        }
        if d.label_map.is_some() && d.labels.is_none() {
            errors.push("dataset.labels: required as the target schema when label_map is set".into());
        }
        if d.aggregate == Some(AggregateKey::GroupKey)
            && d.group_column.is_none()
            && d.format != Some(DataFormat::Dataset)
        {
            errors.push("dataset.group_column: required for aggregate = \"group_key\"".into());
        }
        if let Some(t) = &d.translate {
            if t.provider != "deepl" {
                errors.push(format!("dataset.translate.provider: unknown provider {:?}", t.provider));
            }
        }

        let e = &self.evaluation;
        if e.seeds.is_empty() {
            errors.push("evaluation.seeds: at least one seed is required".into());
        }
        if e.test_size == 0
            && !matches!(
                task,
                Task::ZeroShot(PromptTask { all_records: true, .. }) | Task::Nli(NliTask { all_records: true, .. })
            )
        {
            errors.push("evaluation.test_size: must be positive".into());
        }

        let registry = TemplateRegistry::builtin();
        let check_template = |errors: &mut Vec<String>, field: &str, id: &Option<String>| {
            if let Some(id) = id {
                if registry.get(id).is_err() {
                    errors.push(format!(
                        "{field}: unknown template {id:?}; built-in templates are {}",
                        registry.task_ids().collect::<Vec<_>>().join(", ")
                    ));
                }
            }
        };

        match &task {
            Task::Finetune(_) => {
                if let Err(CliError::ConfigInvalid(m)) = self.train_config() {
                    errors.push(m);
                }
            }
            Task::ZeroShot(z) => {
                match (&z.template, &z.template_path) {
                    (Some(_), Some(_)) => errors.push("task.zeroshot: set template or template_path, not both".into()),
                    (None, None) => errors.push("task.zeroshot: template or template_path is required".into()),
                    _ => {}
                }
                check_template(&mut errors, "task.zeroshot.template", &z.template);
                self.check_provider(&mut errors);
            }
            Task::Nli(n) => {
                if n.template.is_none() && n.hypotheses.is_none() {
                    errors.push("task.nli: template or hypotheses is required".into());
                }
                check_template(&mut errors, "task.nli.template", &n.template);
                if self.model.nli.is_none() {
                    errors.push("model.nli: required for the nli task".into());
                }
            }
            Task::Baseline(_) => {}
            Task::Ablation(a) => {
                if a.sizes.is_empty() || a.sizes[0] == 0 || a.sizes.windows(2).any(|w| w[0] >= w[1]) {
                    errors.push("task.ablation.sizes: must be non-empty, positive and strictly increasing".into());
                }
                if a.metrics.is_empty() {
                    errors.push("task.ablation.metrics: at least one metric is required".into());
                }
                if let Err(CliError::ConfigInvalid(m)) = self.train_config() {
                    errors.push(m);
                }
                check_template(&mut errors, "task.ablation.template", &a.template);
                match a.anchor {
                    Some(AnchorKind::Zeroshot) => {
                        if a.template.is_none() {
                            errors.push("task.ablation.template: required for a zeroshot anchor".into());
                        }
                        self.check_provider(&mut errors);
                    }
                    Some(AnchorKind::Nli) => {
                        if a.template.is_none() && a.hypotheses.is_none() {
                            errors.push("task.ablation: template or hypotheses is required for an nli anchor".into());
                        }
                        if self.model.nli.is_none() {
                            errors.push("model.nli: required for an nli anchor".into());
                        }
                    }
                    None => {}
                }
            }
        }

        if errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::ConfigInvalid(errors.join("\n")))
        }
    }

    fn check_provider(&self, errors: &mut Vec<String>) {
        match &self.model.provider {
            None => errors.push("model.provider: required for zero-shot prompting".into()),
            Some(p) => {
                if let Err(e) = p.validate() {
                    errors.push(format!("model.provider: {e}"));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[dataset]
path = "data.csv"
"#;

    fn parse(extra: &str) -> Result<ExperimentConfig, CliError> {
        let cfg = ExperimentConfig::parse(&format!("{BASE}{extra}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn baseline_defaults() {
        let cfg = parse("[task.baseline]\n").unwrap();
        assert_eq!(cfg.task().unwrap().kind(), "baseline");
        assert_eq!(cfg.evaluation, EvaluationSection::default());
        assert_eq!(cfg.evaluation.seeds, vec![1, 2, 3]);
        assert_eq!(cfg.output.store_dir, PathBuf::from("runs"));
    }

    #[test]
    fn exactly_one_task() {
        let err = parse("[task.baseline]\n[task.finetune]\n").unwrap_err();
        assert!(matches!(err, CliError::ConfigInvalid(ref m) if m.contains("baseline") && m.contains("finetune")));
        assert!(matches!(parse(""), Err(CliError::ConfigInvalid(_))));
    }

    #[test]
    fn train_defaults_follow_preset() {
        let cfg = parse("[task.finetune]\n[model.train]\nbackbone_id = \"BOW-SMALL\"\nepochs = 3\n").unwrap();
        let t = cfg.train_config().unwrap();
        assert_eq!(t.backbone_id, tcbench::finetune::SMALL_BACKBONE);
        assert_eq!(t.epochs, 3);
        assert_eq!(t.learning_rate, TrainConfig::small().learning_rate);

        let cfg = parse("[task.finetune]\n").unwrap();
        assert_eq!(cfg.train_config().unwrap(), TrainConfig::default());
        let cfg = parse("[task.finetune]\n[model.train]\nbackbone_id = \"DEB-V3\"\n").unwrap();
        assert_eq!(cfg.train_config().unwrap().batch_size, 2);
    }

    #[test]
    fn field_level_messages() {
        let err = parse("[task.finetune]\n[model.train]\nepochs = 0\nbogus = 1\n").unwrap_err();
        assert!(
            matches!(err, CliError::ConfigInvalid(ref m) if m.starts_with("model.train")),
            "{err}"
        );
        let err = parse("[task.zeroshot]\ntemplate = \"nope\"\n").unwrap_err();
        let CliError::ConfigInvalid(m) = err else { panic!() };
        assert!(m.contains("task.zeroshot.template"));
        assert!(m.contains("model.provider"));
        let err = parse("[task.ablation]\nsizes = [100, 50]\n").unwrap_err();
        assert!(matches!(err, CliError::ConfigInvalid(ref m) if m.contains("task.ablation.sizes")));
        assert!(ExperimentConfig::parse("[dataset]\npath = 'x.csv'\nunknown = 1\n").is_err());
    }

    #[test]
    fn zeroshot_with_provider() {
        let cfg = parse(
            r#"
[task.zeroshot]
template = "sentiment"
[model.provider]
api = "openai"
base_url = "https://api.openai.com/v1"
model_id = "gpt-4-1106-preview"
auth_env_var = "OPENAI_API_KEY"
[model.provider.retry]
max_attempts = 2
"#,
        )
        .unwrap();
        let p = cfg.model.provider.unwrap();
        assert_eq!(
            (
                p.temperature,
                p.max_attempts,
                p.retry.max_attempts,
                p.retry.base_delay_ms
            ),
            (0.1, 5, 2, 500)
        );
    }
}
