use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ZeroShotError;

/// Marks where the record text is inserted.
pub const PLACEHOLDER: &str = "<Text>";

/// A zero-shot prompt with exactly one [`PLACEHOLDER`].
///
/// `label_surface_forms` are the strings the model must answer with, in
/// schema order (index = label id). This can differ from the order in which
/// the body lists them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TemplateParts", into = "TemplateParts")]
pub struct PromptTemplate {
    task_id: String,
    body: String,
    label_surface_forms: Vec<String>,
    split_at: usize,
}

#[derive(Serialize, Deserialize)]
struct TemplateParts {
    task_id: String,
    body: String,
    label_surface_forms: Vec<String>,
}

impl TryFrom<TemplateParts> for PromptTemplate {
    type Error = ZeroShotError;

    fn try_from(p: TemplateParts) -> Result<Self, Self::Error> {
        PromptTemplate::new(p.task_id, p.body, p.label_surface_forms)
    }
}

impl From<PromptTemplate> for TemplateParts {
    fn from(t: PromptTemplate) -> Self {
        Self {
            task_id: t.task_id,
            body: t.body,
            label_surface_forms: t.label_surface_forms,
        }
    }
}

impl PromptTemplate {
    pub fn new(
        task_id: impl Into<String>,
        body: impl Into<String>,
        label_surface_forms: Vec<String>,
    ) -> Result<Self, ZeroShotError> {
        let task_id = task_id.into();
        let body = body.into();
        let invalid = |why: String| ZeroShotError::InvalidTemplate {
            task_id: task_id.clone(),
            reason: why,
        };
        let count = body.matches(PLACEHOLDER).count();
        if count != 1 {
            return Err(invalid(format!(
                "expected exactly one {PLACEHOLDER} placeholder, found {count}"
            )));
        }
        if label_surface_forms.len() < 2 {
            return Err(invalid("at least two label surface forms are required".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for form in &label_surface_forms {
            let norm = super::normalize_output(form);
            if norm.is_empty() {
                return Err(invalid("empty label surface form".into()));
            }
            if !seen.insert(norm) {
                return Err(invalid(format!(
                    "surface form {form:?} is not distinct after normalization"
                )));
            }
        }
        let split_at = body.find(PLACEHOLDER).expect("counted above");
        Ok(Self {
            task_id,
            body,
            label_surface_forms,
            split_at,
        })
    }

    /// Build from template text, taking surface forms from its
    /// `Labels: 'a', 'b'` line when `forms` is `None`.
    pub fn from_text(
        task_id: impl Into<String>,
        text: &str,
        forms: Option<Vec<String>>,
    ) -> Result<Self, ZeroShotError> {
        let task_id = task_id.into();
        let forms = match forms {
            Some(f) => f,
            None => parse_label_line(text).ok_or_else(|| ZeroShotError::InvalidTemplate {
                task_id: task_id.clone(),
                reason: "no `Labels:` line and no explicit surface forms".into(),
            })?,
        };
        Self::new(task_id, text, forms)
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn label_surface_forms(&self) -> &[String] {
        &self.label_surface_forms
    }

    pub fn k(&self) -> usize {
        self.label_surface_forms.len()
    }

    /// Insert `text` verbatim at the placeholder.
    pub fn render(&self, text: &str) -> String {
        let (head, tail) = self.body.split_at(self.split_at);
        let tail = &tail[PLACEHOLDER.len()..];
        let mut out = String::with_capacity(self.body.len() + text.len());
        out.push_str(head);
        out.push_str(text);
        out.push_str(tail);
        out
    }
}

/// Parse the quoted labels of the first line starting with `Labels:`.
///
/// Items are single- or double-quoted and comma separated; quotes may not be
/// escaped.
pub fn parse_label_line(text: &str) -> Option<Vec<String>> {
    let line = text.lines().find_map(|l| l.trim_start().strip_prefix("Labels:"))?;
    let mut labels = Vec::new();
    let mut rest = line.trim();
    while !rest.is_empty() {
        let quote = rest.chars().next()?;
        if quote != '\'' && quote != '"' {
            return None;
        }
        let body = &rest[1..];
        let end = body.find(quote)?;
        labels.push(body[..end].to_owned());
        rest = body[end + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return None;
        }
    }
    (!labels.is_empty()).then_some(labels)
}

/// Task id → template lookup.
#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, PromptTemplate>,
}

const BUILTIN: [(&str, &str, &[&str]); 4] = [
    (
        "sentiment",
        include_str!("../../templates/sentiment.txt"),
        &["Negative Sentiment", "Positive Sentiment"],
    ),
    (
        "stance",
        include_str!("../../templates/stance.txt"),
        &[
            "negative attitudinal stance towards",
            "positive attitudinal stance towards",
        ],
    ),
    // schema order: 0 = non-angry, 1 = angry
    (
        "anger",
        include_str!("../../templates/anger.txt"),
        &["Non-Angry", "Angry"],
    ),
    (
        "eu_positions",
        include_str!("../../templates/eu_positions.txt"),
        &[
            "Neutral towards Leave demands",
            "Pro-Leave demands",
            "Very Pro-Leave demands",
        ],
    ),
];

impl TemplateRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The four shipped case-study templates.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        for (id, body, forms) in BUILTIN {
            let forms = forms.iter().map(|s| s.to_string()).collect();
            reg.register(PromptTemplate::new(id, body, forms).expect("builtin template is valid"));
        }
        reg
    }

    pub fn register(&mut self, template: PromptTemplate) -> Option<PromptTemplate> {
        self.templates.insert(template.task_id.clone(), template)
    }

    pub fn get(&self, task_id: &str) -> Result<&PromptTemplate, ZeroShotError> {
        self.templates
            .get(task_id)
            .ok_or_else(|| ZeroShotError::UnknownTask(task_id.to_owned()))
    }

    pub fn task_ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn render_prompt(&self, task_id: &str, text: &str) -> Result<String, ZeroShotError> {
        Ok(self.get(task_id)?.render(text))
    }
}
