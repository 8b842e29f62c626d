//! Layered settings: built-in defaults, then a JSON config file (either a
//! bare settings object or a previous run's `manifest.json`), then flags.

use std::path::Path;

use clap::Args;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use spindle::ModelSpec;

use crate::Failure;

/// Model selection flags shared by every subcommand that needs a model.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelFlags {
    /// `circle`, `ellipse` or a registered parametric model name.
    #[arg(long)]
    pub model: Option<String>,
    /// Circle radius.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Ellipse semi-axis along x.
    #[arg(long)]
    pub a: Option<f64>,
    /// Ellipse semi-axis along y.
    #[arg(long)]
    pub b: Option<f64>,
}

impl ModelFlags {
    fn is_empty(&self) -> bool {
        self.model.is_none() && self.rho.is_none() && self.a.is_none() && self.b.is_none()
    }

    /// Combines the flags with the model already present in `existing`.
    fn apply(&self, existing: Option<&Value>) -> Result<ModelSpec, Failure> {
        let current: Option<ModelSpec> = existing.and_then(|v| serde_json::from_value(v.clone()).ok());
        let kind = match (&self.model, &current) {
            (Some(k), _) => k.clone(),
            (None, Some(ModelSpec::Circle { .. })) => "circle".into(),
            (None, Some(ModelSpec::Ellipse { .. })) => "ellipse".into(),
            (None, Some(ModelSpec::Parametric { name })) => name.clone(),
            (None, None) => return Err(Failure::invalid("--rho/--a/--b given without --model")),
        };
        match kind.as_str() {
            "circle" => {
                if self.a.is_some() || self.b.is_some() {
                    return Err(Failure::invalid("--a/--b do not apply to the circle model"));
                }
                let rho = match (self.rho, &current) {
                    (Some(rho), _) => rho,
                    (None, Some(ModelSpec::Circle { rho })) => *rho,
                    _ => return Err(Failure::invalid("circle model needs --rho")),
                };
                Ok(ModelSpec::Circle { rho })
            }
            "ellipse" => {
                if self.rho.is_some() {
                    return Err(Failure::invalid("--rho does not apply to the ellipse model"));
                }
                let (a0, b0) = match &current {
                    Some(ModelSpec::Ellipse { a, b }) => (Some(*a), Some(*b)),
                    _ => (None, None),
                };
                match (self.a.or(a0), self.b.or(b0)) {
                    (Some(a), Some(b)) => Ok(ModelSpec::Ellipse { a, b }),
                    _ => Err(Failure::invalid("ellipse model needs --a and --b")),
                }
            }
            name => {
                if self.rho.is_some() || self.a.is_some() || self.b.is_some() {
                    return Err(Failure::invalid(format!(
                        "--rho/--a/--b do not apply to the parametric model `{name}`"
                    )));
                }
                Ok(ModelSpec::Parametric { name: name.to_string() })
            }
        }
    }
}

fn load_file(command: &str, path: &Path) -> Result<Map<String, Value>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(mut obj) = value else {
        return Err(Failure::invalid(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    };
    if obj.contains_key("config") && obj.contains_key("command") {
        let from = obj
            .get("command")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        if from != command {
            return Err(Failure::invalid(format!(
                "manifest {} was written by `{from}`, not `{command}`",
                path.display()
            )));
        }
        return match obj.remove("config") {
            Some(Value::Object(inner)) => Ok(inner),
            _ => Err(Failure::invalid(format!(
                "manifest {} has no config object",
                path.display()
            ))),
        };
    }
    Ok(obj)
}

/// Resolves the settings for `command`. Later layers win key by key.
pub fn resolve<S: DeserializeOwned>(
    command: &str,
    defaults: Value,
    config: Option<&Path>,
    flags: &impl Serialize,
    model: Option<&ModelFlags>,
) -> Result<S, Failure> {
    let Value::Object(mut merged) = defaults else {
        unreachable!("defaults are always an object")
    };
    if let Some(path) = config {
        merged.extend(load_file(command, path)?);
    }
    match serde_json::to_value(flags) {
        Ok(Value::Object(f)) => merged.extend(f.into_iter().filter(|(_, v)| !v.is_null())),
        Ok(_) => {}
        Err(e) => return Err(Failure::invalid(format!("cannot encode flags: {e}"))),
    }
    if let Some(m) = model.filter(|m| !m.is_empty()) {
        let spec = m.apply(merged.get("model"))?;
        merged.insert(
            "model".into(),
            serde_json::to_value(spec).expect("model spec serializes"),
        );
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| Failure::invalid(format!("invalid configuration: {e}")))
}
