use std::path::Path;

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use fluxonium_core::{Error, Result};

/// Result document: provenance plus a command-specific result table.
pub struct Report {
    command: &'static str,
    seed: u64,
    arguments: Vec<String>,
    inputs: Table,
    pub result: Table,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Report {
    pub fn new(command: &'static str, seed: u64, arguments: Vec<String>) -> Self {
        Self {
            command,
            seed,
            arguments,
            inputs: Table::new(),
            result: Table::new(),
        }
    }

    /// Records the SHA-256 of an input file.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.inputs.insert(
            path.display().to_string(),
            Value::String(format!("sha256:{}", hex(&Sha256::digest(&bytes)))),
        );
        Ok(())
    }

    /// Records a built-in input by name.
    pub fn builtin(&mut self, name: &str) {
        self.inputs.insert(name.to_string(), Value::String("builtin".into()));
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.result.insert(key.to_string(), value.into());
    }

    pub fn render(&self) -> String {
        let mut prov = Table::new();
        prov.insert("tool".into(), Value::String("fluxonium".into()));
        prov.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        prov.insert("command".into(), Value::String(self.command.into()));
        prov.insert("seed".into(), Value::Integer(self.seed as i64));
        prov.insert(
            "arguments".into(),
            Value::Array(self.arguments.iter().cloned().map(Value::String).collect()),
        );
        prov.insert("inputs".into(), Value::Table(self.inputs.clone()));
        let mut root = Table::new();
        root.insert("provenance".into(), Value::Table(prov));
        root.insert("result".into(), Value::Table(self.result.clone()));
        toml::to_string(&root).expect("tables of plain values always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic() {
        let mk = || {
            let mut r = Report::new("trap", 3, vec!["--x".into()]);
            r.set("n", 1i64);
            r.set("phi_trap", std::f64::consts::PI);
            r.builtin("device1");
            r.render()
        };
        assert_eq!(mk(), mk());
        assert!(mk().contains("seed = 3"));
    }

    #[test]
    fn hashes_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "abc").unwrap();
        let mut r = Report::new("x", 0, vec![]);
        r.input(&p).unwrap();
        assert!(r
            .render()
            .contains("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
    }
}
