use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::CliError;

/// One embedded assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// A CSV file written by an experiment and its column documentation.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub description: String,
    pub columns: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: String,
    pub anchor: String,
    pub slack: String,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn new(id: &str, anchor: &str, slack: &str) -> Self {
        Self { id: id.into(), anchor: anchor.into(), slack: slack.into(), checks: Vec::new(), artifacts: Vec::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "[{status}] {}", self.id);
        let _ = writeln!(s, "  reproduces: {}", self.anchor);
        let _ = writeln!(s, "  slack budget: {}", self.slack);
        for c in &self.checks {
            let _ = writeln!(s, "  {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        }
        s
    }

    /// Markdown describing every artifact's columns.
    pub fn readme_fragment(&self) -> String {
        let mut s = format!("## {}\n\n{}\n\nSlack budget: {}.\n", self.id, self.anchor, self.slack);
        for a in &self.artifacts {
            let _ = write!(s, "\n### `{}`\n\n{}\n\n| column | meaning |\n|---|---|\n", a.file, a.description);
            for (c, m) in &a.columns {
                let _ = writeln!(s, "| `{c}` | {m} |");
            }
        }
        s
    }
}

/// Artifact sink for one experiment. With [`Format::TextSummary`] nothing is
/// written to disk.
pub struct Output {
    dir: PathBuf,
    format: Format,
}

impl Output {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        if format == Format::Csv {
            std::fs::create_dir_all(dir)?;
        }
        Ok(Self { dir: dir.to_path_buf(), format })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Writes a CSV table and records its documentation in `report`.
    pub fn table<R>(
        &self,
        report: &mut Report,
        file: &str,
        description: &str,
        columns: &[(&str, &str)],
        rows: R,
    ) -> Result<(), CliError>
    where
        R: IntoIterator<Item = Vec<String>>,
    {
        report.artifacts.push(Artifact {
            file: file.into(),
            description: description.into(),
            columns: columns.iter().map(|(c, m)| (c.to_string(), m.to_string())).collect(),
        });
        if self.format != Format::Csv {
            return Ok(());
        }
        let mut w = csv::Writer::from_path(self.dir.join(file))?;
        w.write_record(columns.iter().map(|c| c.0))?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Raw writer for artifacts produced by core types.
    pub fn file(&self, report: &mut Report, file: &str, description: &str, columns: &[(&str, &str)]) -> Result<Option<BufWriter<File>>, CliError> {
        report.artifacts.push(Artifact {
            file: file.into(),
            description: description.into(),
            columns: columns.iter().map(|(c, m)| (c.to_string(), m.to_string())).collect(),
        });
        if self.format != Format::Csv {
            return Ok(None);
        }
        Ok(Some(BufWriter::new(File::create(self.dir.join(file))?)))
    }

    pub fn finish(&self, report: &Report) -> Result<(), CliError> {
        if self.format != Format::Csv {
            return Ok(());
        }
        std::fs::write(self.dir.join("summary.txt"), report.summary())?;
        let mut f = File::create(self.dir.join("README.md"))?;
        f.write_all(report.readme_fragment().as_bytes())?;
        Ok(())
    }
}

/// Formats a float for CSV output.
pub fn num(x: f64) -> String {
    x.to_string()
}
