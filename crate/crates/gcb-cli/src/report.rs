use gcb::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Inputs read so far, results and deviations for one command.
#[derive(Debug, Default)]
pub struct Report {
    pub inputs: BTreeMap<String, Value>,
    pub results: Map<String, Value>,
    pub deviations: Map<String, Value>,
}

impl Report {
    pub fn result(&mut self, key: &str, v: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    /// A measured deviation and the tolerance it was held to.
    pub fn deviation(&mut self, key: &str, value: f64, tol: f64) {
        self.deviations.insert(key.into(), json!({"value": finite(value), "tol": tol, "pass": value <= tol}));
    }

    /// Reads and digests an input file.
    pub fn input(&mut self, role: &str, path: &Path) -> gcb::Result<Value> {
        let bytes = std::fs::read(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        let v: Value = serde_json::from_slice(&bytes).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        self.inputs.insert(role.into(), json!({"path": path.display().to_string(), "sha256": hex}));
        Ok(v)
    }

    /// Parses a typed input and records whether it survives a
    /// serialize/parse cycle unchanged.
    pub fn typed<T: Serialize + DeserializeOwned>(&mut self, role: &str, v: Value) -> gcb::Result<T> {
        let t: T = gcb::io::from_value(v)?;
        let once = serde_json::to_value(&t).expect("serializable");
        let again: T = gcb::io::from_value(once.clone())?;
        let lossless = serde_json::to_value(&again).expect("serializable") == once;
        if let Some(Value::Object(m)) = self.inputs.get_mut(role) {
            m.insert("round_trip".into(), Value::Bool(lossless));
        }
        Ok(again)
    }
}

/// JSON has no NaN or infinity.
pub fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn error_value(e: &Error) -> Value {
    json!({"kind": e.kind(), "message": e.to_string()})
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoConvergence { .. } => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NoConvergence { iterations: 3, gap: 0.1 }), 2);
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), 1);
        assert_eq!(finite(f64::INFINITY), json!("inf"));
        assert_eq!(error_value(&Error::NoConvergence { iterations: 3, gap: 0.1 })["kind"], "NoConvergence");
    }
}
