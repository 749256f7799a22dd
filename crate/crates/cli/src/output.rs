//! Output directory handling: every command writes its artifacts under
//! `--out-dir` and finishes with a manifest listing file digests.

use std::fs;
use std::path::{Path, PathBuf};

use posture_core::pipeline::sha256_hex;

use crate::CliError;

pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.files.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    /// Writes `manifest.json` recording the command, the digest of the
    /// effective config, and the digest of every artifact produced.
    pub fn finish(mut self, command: &str, config_json: &str) -> Result<(), CliError> {
        let mut manifest = String::from("{\n");
        manifest.push_str(&format!("  \"command\": {:?},\n", command));
        manifest.push_str(&format!(
            "  \"config_sha256\": {:?},\n",
            sha256_hex(config_json.as_bytes())
        ));
        manifest.push_str("  \"files\": [\n");
        self.files.sort();
        let entries: Vec<String> = self
            .files
            .iter()
            .map(|(name, digest)| format!("    {{\"file\": {name:?}, \"sha256\": {digest:?}}}"))
            .collect();
        manifest.push_str(&entries.join(",\n"));
        manifest.push_str("\n  ]\n}\n");
        let path = self.root.join("manifest.json");
        fs::write(path, manifest)?;
        Ok(())
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))
}
