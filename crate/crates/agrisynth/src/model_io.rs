//! Version-tagged JSON model artifacts.

use std::path::Path;

use agrisynth_core::model::AnyModel;
use serde::{Deserialize, Serialize};

use crate::Error;

pub const FORMAT: &str = "agrisynth-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub target: String,
    pub model: AnyModel,
}

impl ModelArtifact {
    pub fn new(target: &str, model: AnyModel) -> Self {
        ModelArtifact { format: FORMAT.into(), version: VERSION, target: target.into(), model }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("models serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let bad = |e: serde_json::Error| Error::Config(format!("model artifact: {e}"));
        let h: Header = serde_json::from_str(text).map_err(bad)?;
        if h.format != FORMAT || h.version != VERSION {
            return Err(Error::Config(format!(
                "unsupported model artifact {} v{} (expected {FORMAT} v{VERSION})",
                h.format, h.version
            )));
        }
        serde_json::from_str(text).map_err(bad)
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
