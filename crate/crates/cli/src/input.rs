use std::fs;

use serde::de::DeserializeOwned;

use crate::CliError;

/// Parses `arg` as inline JSON when it looks like JSON, otherwise as a path
/// to a JSON file. Errors name the flag and the offending JSON path.
pub fn parse<T: DeserializeOwned>(flag: &str, arg: &str) -> Result<T, CliError> {
    let trimmed = arg.trim_start();
    let owned;
    let (text, origin) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (arg, "inline JSON".to_string())
    } else {
        owned = fs::read_to_string(arg)
            .map_err(|e| CliError::Validation(format!("{flag}: cannot read {arg}: {e}")))?;
        (owned.as_str(), arg.to_string())
    };
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Validation(format!(
            "{flag} ({origin}): at `{path}`: {}",
            e.into_inner()
        ))
    })
}
