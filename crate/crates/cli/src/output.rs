//! Run artifacts: CSV tables, plotting scripts and the manifest.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

/// Formats a float for CSV output with 12 decimals.
pub fn num(value: f64) -> String {
    format!("{value:.12}")
}

/// Builds a CSV document row by row.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns, "row width");
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// What a generated matplotlib script draws.
#[derive(Debug, Clone)]
pub struct PlotSpec<'a> {
    pub csv: &'a str,
    pub image: &'a str,
    pub title: &'a str,
    pub x: &'a str,
    /// `(column, label, matplotlib style)` per curve.
    pub series: Vec<(&'a str, &'a str, &'a str)>,
    /// Column splitting rows into separate curves (`Curves`) or panels.
    pub group: Option<(&'a str, Grouping)>,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub vline: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    Curves,
    Panels,
}

impl PlotSpec<'_> {
    pub fn script(&self) -> String {
        let series = self
            .series
            .iter()
            .map(|(c, l, s)| format!("({c:?}, {l:?}, {s:?})"))
            .collect::<Vec<_>>()
            .join(", ");
        let (group, panels) = match self.group {
            Some((col, g)) => (format!("{col:?}"), g == Grouping::Panels),
            None => ("None".to_string(), false),
        };
        let panels = if panels { "True" } else { "False" };
        let vline = self.vline.map_or("None".to_string(), |v| format!("{v}"));
        format!(
            r#"import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSV = os.path.join(HERE, {csv:?})
IMAGE = os.path.join(HERE, {image:?})
X = {x:?}
SERIES = [{series}]
GROUP = {group}
PANELS = {panels}
VLINE = {vline}

with open(CSV) as handle:
    rows = list(csv.DictReader(handle))

groups = {{}}
for row in rows:
    key = row[GROUP] if GROUP else ""
    groups.setdefault(key, []).append(row)

if PANELS:
    count = len(groups)
    cols = 2 if count > 1 else 1
    nrows = (count + cols - 1) // cols
    fig, axes = plt.subplots(nrows, cols, figsize=(6 * cols, 4 * nrows), squeeze=False)
    targets = [(key, axes[k // cols][k % cols]) for k, key in enumerate(groups)]
    for k in range(count, nrows * cols):
        axes[k // cols][k % cols].axis("off")
else:
    fig, ax = plt.subplots(figsize=(7, 5))
    targets = [(key, ax) for key in groups]

for key, ax in targets:
    data = groups[key]
    xs = [float(r[X]) for r in data]
    for column, label, style in SERIES:
        ys = [float(r[column]) for r in data]
        name = label if PANELS or not GROUP else f"{{label}} ({{GROUP}} = {{key}})"
        ax.plot(xs, ys, style, label=name)
    if VLINE is not None:
        ax.axvline(VLINE, color="black", linestyle=":")
    if PANELS:
        ax.set_title(f"{{GROUP}} = {{key}}")
    ax.set_xlabel({xlabel:?})
    ax.set_ylabel({ylabel:?})
    ax.legend()

fig.suptitle({title:?})
fig.tight_layout()
fig.savefig(IMAGE, dpi=150)
"#,
            csv = self.csv,
            image = self.image,
            x = self.x,
            xlabel = self.xlabel,
            ylabel = self.ylabel,
            title = self.title,
        )
    }
}

/// Collects the files written by one run and the lines of its summary.
#[derive(Debug)]
pub struct RunOutput {
    dir: PathBuf,
    artifacts: Vec<String>,
    summary: Vec<(String, String)>,
    figure: Option<String>,
    action: Option<String>,
}

impl RunOutput {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
            summary: Vec::new(),
            figure: None,
            action: None,
        })
    }

    pub fn set_figure(&mut self, figure: impl Into<String>) {
        self.figure = Some(figure.into());
    }

    pub fn set_action(&mut self, action: impl Into<String>) {
        self.action = Some(action.into());
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, csv: Csv) -> io::Result<()> {
        self.write(name, &csv.into_string())
    }

    pub fn plot(&mut self, name: &str, spec: &PlotSpec<'_>) -> io::Result<()> {
        self.write(name, &spec.script())
    }

    /// Records a summary line, echoed to stdout and into `summary.txt`.
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    /// Writes `summary.txt` and `manifest.txt`, and prints the summary.
    pub fn finish(mut self, config: &ExperimentConfig) -> io::Result<()> {
        let mut summary = String::new();
        for (k, v) in &self.summary {
            let _ = writeln!(summary, "{k} = {v}");
        }
        if !self.summary.is_empty() {
            self.write("summary.txt", &summary)?;
        }
        let mut manifest = String::new();
        let _ = writeln!(manifest, "tool = multidqi-cli {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(manifest, "library = multidqi {}", multidqi::VERSION);
        let _ = writeln!(manifest, "subcommand = {}", config.subcommand);
        if let Some(action) = &self.action {
            let _ = writeln!(manifest, "action = {action}");
        }
        if let Some(figure) = &self.figure {
            let _ = writeln!(manifest, "figure = {figure}");
        }
        let _ = writeln!(manifest, "seed = {}", config.seed);
        let _ = writeln!(manifest, "cap = {}", config.cap);
        let _ = writeln!(manifest, "strict-distance = {}", config.strict_distance);
        let _ = writeln!(manifest, "out = {}", config.out.display());
        for (k, v) in config.params.resolved() {
            let _ = writeln!(manifest, "param.{k} = {v}");
        }
        for a in &self.artifacts {
            let _ = writeln!(manifest, "artifact = {a}");
        }
        self.write("manifest.txt", &manifest)?;
        print!("{summary}");
        println!("wrote {} files to {}", self.artifacts.len(), self.dir.display());
        Ok(())
    }
}
