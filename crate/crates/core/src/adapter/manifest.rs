use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AdapterError;
use crate::config::EvalConfig;
use crate::forecasters::{ModelDescriptor, ModelKind};

/// File name of a model's manifest inside its registration directory.
pub const MANIFEST_FILE: &str = "manifest";

const DEFAULT_TIMEOUT_SECONDS: u64 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HorizonSupport {
    Any(String),
    List(Vec<usize>),
}

impl HorizonSupport {
    pub fn any() -> Self {
        HorizonSupport::Any("any".into())
    }

    pub fn supports(&self, h: usize) -> bool {
        match self {
            HorizonSupport::Any(_) => true,
            HorizonSupport::List(list) => list.contains(&h),
        }
    }
}

/// Validated description of an external model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterManifest {
    pub model_id: String,
    pub display_name: String,
    pub model_type: String,
    pub command: Vec<String>,
    pub input_window_len: usize,
    pub horizons_supported: HorizonSupport,
    pub timeout_seconds: u64,
    /// Working directory for the command; the manifest's directory when
    /// loaded from disk.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl AdapterManifest {
    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor {
            model_id: self.model_id.clone(),
            kind: ModelKind::Adapter,
            display_name: self.display_name.clone(),
            model_type: self.model_type.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        let mut table = toml::Table::new();
        table.insert("kind".into(), "adapter".into());
        table.insert("model_id".into(), self.model_id.clone().into());
        table.insert("display_name".into(), self.display_name.clone().into());
        table.insert("model_type".into(), self.model_type.clone().into());
        table.insert(
            "command".into(),
            toml::Value::Array(self.command.iter().map(|c| c.clone().into()).collect()),
        );
        table.insert("input_window_len".into(), (self.input_window_len as i64).into());
        let horizons = match &self.horizons_supported {
            HorizonSupport::Any(_) => "any".into(),
            HorizonSupport::List(l) => toml::Value::Array(l.iter().map(|h| (*h as i64).into()).collect()),
        };
        table.insert("horizons_supported".into(), horizons);
        table.insert("timeout_seconds".into(), (self.timeout_seconds as i64).into());
        toml::to_string(&table).expect("manifest serializes")
    }
}

fn require<'a>(doc: &'a toml::Table, field: &str) -> Result<&'a toml::Value, AdapterError> {
    doc.get(field)
        .ok_or_else(|| AdapterError::MissingField(field.to_string()))
}

fn string_field(doc: &toml::Table, field: &str) -> Result<String, AdapterError> {
    match require(doc, field)?.as_str() {
        Some(s) if !s.trim().is_empty() => Ok(s.to_string()),
        _ => Err(AdapterError::InvalidField {
            field: field.into(),
            reason: "expected a nonempty string".into(),
        }),
    }
}

fn positive_int(value: &toml::Value, field: &str) -> Result<u64, AdapterError> {
    value
        .as_integer()
        .filter(|n| *n > 0)
        .map(|n| n as u64)
        .ok_or_else(|| AdapterError::InvalidField {
            field: field.into(),
            reason: "expected a positive integer".into(),
        })
}

/// Validates a parsed manifest document against the platform config.
pub fn validate_manifest(doc: &toml::Table, cfg: &EvalConfig) -> Result<AdapterManifest, AdapterError> {
    let model_id = string_field(doc, "model_id")?;
    if !ModelDescriptor::is_valid_id(&model_id) {
        return Err(AdapterError::InvalidField {
            field: "model_id".into(),
            reason: format!("`{model_id}` must match [a-z0-9_-]+"),
        });
    }
    let display_name = string_field(doc, "display_name")?;
    let model_type = string_field(doc, "model_type")?;

    let command = match require(doc, "command")? {
        toml::Value::Array(items) => items
            .iter()
            .map(|v| v.as_str().map(str::to_string))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| AdapterError::BadCommand("command entries must be strings".into()))?,
        toml::Value::String(s) => s.split_whitespace().map(str::to_string).collect(),
        _ => return Err(AdapterError::BadCommand("command must be a list of strings".into())),
    };
    if command.is_empty() || command[0].trim().is_empty() {
        return Err(AdapterError::BadCommand("command is empty".into()));
    }

    let input_window_len = positive_int(require(doc, "input_window_len")?, "input_window_len")? as usize;
    if input_window_len != cfg.lookback {
        return Err(AdapterError::DimensionMismatch(format!(
            "input_window_len {input_window_len} differs from the configured look-back {}",
            cfg.lookback
        )));
    }

    let horizons_supported = match require(doc, "horizons_supported")? {
        toml::Value::String(s) if s == "any" => HorizonSupport::any(),
        toml::Value::Array(items) => HorizonSupport::List(
            items
                .iter()
                .map(|v| positive_int(v, "horizons_supported").map(|h| h as usize))
                .collect::<Result<_, _>>()?,
        ),
        _ => {
            return Err(AdapterError::InvalidField {
                field: "horizons_supported".into(),
                reason: "expected a list of integers or \"any\"".into(),
            })
        }
    };
    if let Some(h) = cfg.horizons.iter().find(|h| !horizons_supported.supports(**h)) {
        return Err(AdapterError::DimensionMismatch(format!(
            "configured horizon {h} is not supported"
        )));
    }

    let timeout_seconds = match doc.get("timeout_seconds") {
        Some(v) => positive_int(v, "timeout_seconds")?,
        None => DEFAULT_TIMEOUT_SECONDS,
    };

    Ok(AdapterManifest {
        model_id,
        display_name,
        model_type,
        command,
        input_window_len,
        horizons_supported,
        timeout_seconds,
        base_dir: None,
    })
}

/// Reads `<dir>/manifest` (or the given file) and validates it.
pub fn load_manifest(path: &Path, cfg: &EvalConfig) -> Result<AdapterManifest, AdapterError> {
    let file = if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    };
    let text = std::fs::read_to_string(&file).map_err(|e| AdapterError::Io(format!("{}: {e}", file.display())))?;
    let doc: toml::Table = toml::from_str(&text).map_err(|e| AdapterError::Io(format!("{}: {e}", file.display())))?;
    let mut manifest = validate_manifest(&doc, cfg)?;
    let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
    manifest.base_dir = Some(std::fs::canonicalize(&dir).unwrap_or(dir));
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> toml::Table {
        toml::from_str(text).unwrap()
    }

    const COMPLETE: &str = r#"
        model_id = "last_value"
        display_name = "Last value"
        model_type = "statistical"
        command = ["python3", "last_value.py"]
        input_window_len = 96
        horizons_supported = "any"
    "#;

    #[test]
    fn accepts_complete_manifest() {
        let m = validate_manifest(&doc(COMPLETE), &EvalConfig::default()).unwrap();
        assert_eq!(m.model_id, "last_value");
        assert_eq!(m.timeout_seconds, 60);
        assert_eq!(m.command, ["python3", "last_value.py"]);
        assert_eq!(m.descriptor().kind, ModelKind::Adapter);
    }

    #[test]
    fn window_length_must_match() {
        let text = COMPLETE.replace("96", "48");
        assert!(matches!(
            validate_manifest(&doc(&text), &EvalConfig::default()),
            Err(AdapterError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn missing_command() {
        let text: String = COMPLETE
            .lines()
            .filter(|l| !l.contains("command"))
            .collect::<Vec<_>>()
            .join("\n");
        assert_eq!(
            validate_manifest(&doc(&text), &EvalConfig::default()),
            Err(AdapterError::MissingField("command".into()))
        );
    }

    #[test]
    fn bad_commands_and_ids() {
        let empty = COMPLETE.replace(r#"["python3", "last_value.py"]"#, "[]");
        assert!(matches!(
            validate_manifest(&doc(&empty), &EvalConfig::default()),
            Err(AdapterError::BadCommand(_))
        ));
        let bad_id = COMPLETE.replace("\"last_value\"", "\"Last Value\"");
        assert!(matches!(
            validate_manifest(&doc(&bad_id), &EvalConfig::default()),
            Err(AdapterError::InvalidField { .. })
        ));
    }

    #[test]
    fn horizon_list_must_cover_config() {
        let text = COMPLETE.replace("\"any\"", "[12, 24]");
        assert!(matches!(
            validate_manifest(&doc(&text), &EvalConfig::default()),
            Err(AdapterError::DimensionMismatch(_))
        ));
        let cfg = EvalConfig {
            horizons: vec![12, 24],
            ..Default::default()
        };
        assert!(validate_manifest(&doc(&text), &cfg).is_ok());
    }

    #[test]
    fn toml_round_trip() {
        let m = validate_manifest(&doc(COMPLETE), &EvalConfig::default()).unwrap();
        let again = validate_manifest(&doc(&m.to_toml()), &EvalConfig::default()).unwrap();
        assert_eq!(m, again);
    }
}
