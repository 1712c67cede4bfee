//! Coherence tables aggregated from run summaries.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::commands::{Outcome, SUMMARY_FILE, TABLE_CSV_FILE, TABLE_MD_FILE};

#[derive(Debug, Deserialize)]
struct Summary {
    method: String,
    field: String,
    d: usize,
    #[serde(rename = "N")]
    n: usize,
    mu: f64,
    mu_cb: f64,
}

/// Summaries under each input, which may be a summary file or a directory
/// searched recursively. Sorted for a stable scan order.
fn collect(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack: Vec<PathBuf> = inputs.to_vec();
    while let Some(p) = stack.pop() {
        if p.is_dir() {
            for entry in
                std::fs::read_dir(&p).with_context(|| format!("reading {}", p.display()))?
            {
                stack.push(entry?.path());
            }
        } else if p.file_name().is_some_and(|f| f == SUMMARY_FILE) || inputs.contains(&p) {
            found.push(p);
        }
    }
    found.sort();
    Ok(found)
}

#[derive(Default)]
struct Row {
    mu_cb: f64,
    mu: BTreeMap<String, f64>,
}

pub struct Table {
    /// Method columns, the designed frame first.
    methods: Vec<String>,
    /// Keyed by (d, N, field).
    rows: BTreeMap<(usize, usize, String), Row>,
}

impl Table {
    fn from_summaries(paths: &[PathBuf]) -> Result<Self> {
        let mut rows: BTreeMap<(usize, usize, String), Row> = BTreeMap::new();
        let mut methods = BTreeSet::new();
        for path in paths {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let s: Summary = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let row = rows.entry((s.d, s.n, s.field)).or_default();
            row.mu_cb = s.mu_cb;
            let best = row.mu.entry(s.method.clone()).or_insert(f64::INFINITY);
            *best = best.min(s.mu);
            methods.insert(s.method);
        }
        let mut methods: Vec<String> = methods.into_iter().collect();
        methods.sort_by_key(|m| (m != "telet", m.clone()));
        Ok(Self { methods, rows })
    }

    fn cells(&self) -> Vec<Vec<String>> {
        let single_field = self
            .rows
            .keys()
            .map(|k| &k.2)
            .collect::<BTreeSet<_>>()
            .len()
            <= 1;
        self.rows
            .iter()
            .map(|((d, n, field), row)| {
                let key = if single_field {
                    format!("({d},{n})")
                } else {
                    format!("({d},{n}) {field}")
                };
                let mut cells = vec![key, format!("{:.4}", row.mu_cb)];
                for m in &self.methods {
                    cells.push(
                        row.mu
                            .get(m)
                            .map_or_else(|| "-".into(), |v| format!("{v:.4}")),
                    );
                }
                cells
            })
            .collect()
    }

    fn header(&self) -> Vec<String> {
        let mut h = vec!["(d,N)".to_string(), "mu_CB".to_string()];
        h.extend(self.methods.iter().cloned());
        h
    }

    pub fn to_markdown(&self) -> String {
        let header = self.header();
        let mut out = format!("| {} |\n", header.join(" | "));
        out.push_str(&format!("|{}\n", "---|".repeat(header.len())));
        for cells in self.cells() {
            out.push_str(&format!("| {} |\n", cells.join(" | ")));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let quote = |s: &String| {
            if s.contains(',') {
                format!("\"{s}\"")
            } else {
                s.clone()
            }
        };
        let line = |cells: &[String]| cells.iter().map(quote).collect::<Vec<_>>().join(",") + "\n";
        let mut out = line(&self.header());
        for cells in self.cells() {
            out.push_str(&line(&cells));
        }
        out
    }
}

pub fn run(inputs: &[PathBuf], out: &Path) -> Result<Outcome> {
    let paths = collect(inputs)?;
    if paths.is_empty() {
        bail!("no {SUMMARY_FILE} found under the given inputs");
    }
    let table = Table::from_summaries(&paths)?;
    let md = table.to_markdown();
    print!("{md}");
    let md_path = out.join(TABLE_MD_FILE);
    let csv_path = out.join(TABLE_CSV_FILE);
    std::fs::write(&md_path, md)?;
    std::fs::write(&csv_path, table.to_csv())?;
    Ok(Outcome {
        outputs: vec![md_path, csv_path],
        ok: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_summary(dir: &Path, method: &str, d: usize, n: usize, mu: f64) -> PathBuf {
        let sub = dir.join(format!("{method}_{d}_{n}"));
        std::fs::create_dir_all(&sub).unwrap();
        let path = sub.join(SUMMARY_FILE);
        let body = serde_json::json!({
            "method": method, "field": "complex", "d": d, "N": n, "mu": mu, "mu_cb": 0.25,
        });
        std::fs::write(&path, body.to_string()).unwrap();
        path
    }

    #[test]
    fn rows_sorted_and_methods_merged() {
        let dir = tempfile::tempdir().unwrap();
        write_summary(dir.path(), "tropp", 4, 7, 0.36);
        write_summary(dir.path(), "telet", 4, 7, 0.35);
        write_summary(dir.path(), "telet", 2, 8, 0.8);
        write_summary(dir.path(), "telet", 4, 5, 0.25);
        let paths = collect(&[dir.path().to_path_buf()]).unwrap();
        let table = Table::from_summaries(&paths).unwrap();
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "\"(d,N)\",mu_CB,telet,tropp");
        assert_eq!(lines[1], "\"(2,8)\",0.2500,0.8000,-");
        assert_eq!(lines[2], "\"(4,5)\",0.2500,0.2500,-");
        assert_eq!(lines[3], "\"(4,7)\",0.2500,0.3500,0.3600");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn duplicate_runs_keep_the_lowest() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_summary(&dir.path().join("a"), "telet", 4, 5, 0.3);
        let b = write_summary(&dir.path().join("b"), "telet", 4, 5, 0.26);
        let table = Table::from_summaries(&[a, b]).unwrap();
        assert!(table.to_markdown().contains("| (4,5) | 0.2500 | 0.2600 |"));
    }

    #[test]
    fn markdown_has_separator() {
        let dir = tempfile::tempdir().unwrap();
        let a = write_summary(dir.path(), "telet", 4, 5, 0.25);
        let md = Table::from_summaries(&[a]).unwrap().to_markdown();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "| (d,N) | mu_CB | telet |");
        assert_eq!(lines[1], "|---|---|---|");
        assert_eq!(lines.len(), 3);
    }
}
