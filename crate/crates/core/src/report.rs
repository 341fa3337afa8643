//! Output files with provenance headers.
//!
//! Every file a command writes opens with the same provenance block:
//! version, the exact command line, the base seed when one exists, and a
//! unix timestamp. The timestamp is optional so deterministic pipelines can
//! compare outputs byte for byte.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

/// Run metadata stamped into every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    /// Crate version.
    pub version: String,
    /// The command line that produced the file.
    pub command: String,
    /// Base seed, when the command used one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Unix seconds; absent under --no-timestamp.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl Provenance {
    /// Captures the current run's metadata.
    pub fn new(command: String, seed: Option<u64>, with_timestamp: bool) -> Self {
        let timestamp = with_timestamp.then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            seed,
            timestamp,
        }
    }

    /// `# key: value` comment lines for the top of a CSV file.
    pub fn comment_lines(&self) -> String {
        let mut lines = format!("# airholp {}\n# command: {}\n", self.version, self.command);
        if let Some(seed) = self.seed {
            lines.push_str(&format!("# seed: {seed}\n"));
        }
        if let Some(ts) = self.timestamp {
            lines.push_str(&format!("# timestamp: {ts}\n"));
        }
        lines
    }
}

/// Writes a CSV file: provenance comments, a header row, then the rows.
pub fn write_csv(
    path: &Path,
    prov: &Provenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut file = File::create(path)?;
    file.write_all(prov.comment_lines().as_bytes())?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| crate::error::Error::Data(format!("{}: {e}", path.display())))?;
    file.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_lines_respect_optional_fields() {
        let full = Provenance {
            version: "0.1.0".into(),
            command: "airholp screen --x x.csv".into(),
            seed: Some(7),
            timestamp: Some(1_700_000_000),
        };
        let text = full.comment_lines();
        assert!(text.contains("# airholp 0.1.0\n"));
        assert!(text.contains("# command: airholp screen --x x.csv\n"));
        assert!(text.contains("# seed: 7\n"));
        assert!(text.contains("# timestamp: 1700000000\n"));

        let bare = Provenance {
            seed: None,
            timestamp: None,
            ..full
        };
        let text = bare.comment_lines();
        assert!(!text.contains("seed"));
        assert!(!text.contains("timestamp"));
    }

    #[test]
    fn new_without_timestamp_is_reproducible() {
        let a = Provenance::new("cmd".into(), Some(1), false);
        let b = Provenance::new("cmd".into(), Some(1), false);
        assert_eq!(a.comment_lines(), b.comment_lines());
        assert!(a.timestamp.is_none());
    }

    #[test]
    fn csv_files_start_with_provenance_and_parse_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let prov = Provenance::new("airholp test".into(), None, false);
        write_csv(
            &path,
            &prov,
            &["a", "b"],
            &[vec!["1".into(), "x,y".into()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# airholp"));
        // the embedded comma must be quoted so the table stays rectangular
        assert!(text.contains("\"x,y\""));
    }
}
