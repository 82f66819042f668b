//! JSON form of a [`Scenario`]. Derived constants are never written; they are
//! recomputed on load.

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use super::{LearningConfig, ModelError, NetworkConfig, Scenario, UserProfile};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    users: Vec<UserProfile>,
    network: NetworkConfig,
    learning: LearningConfig,
    #[serde(default)]
    seed: Option<u64>,
}

/// Render a serde path as an RFC 6901 JSON pointer.
pub(crate) fn json_pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() { "/".into() } else { out }
}

impl Scenario {
    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            users: self.users.clone(),
            network: self.net,
            learning: self.learn,
            seed: self.seed,
        };
        serde_json::to_string_pretty(&file).expect("scenario is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| ModelError::Json {
            pointer: json_pointer(e.path()),
            message: e.inner().to_string(),
        })?;
        Scenario::new(file.users, file.network, file.learning, file.seed)
    }
}
