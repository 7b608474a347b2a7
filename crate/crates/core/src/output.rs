//! Artifact writing: fixed-format tables, atomic file replacement and gnuplot
//! scripts.
//!
//! Every float goes out with 17 significant digits in scientific notation
//! and rows keep their index order, so identical inputs give byte-identical
//! files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Output encoding for tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Float formatting shared by every artifact.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(usize),
    Num(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => fmt_float(*x),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Text(s) => serde_json::Value::String(s.clone()),
            Cell::Int(i) => serde_json::Value::from(*i),
            Cell::Num(x) => serde_json::Value::String(fmt_float(*x)),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}
impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i)
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}
impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// A header row plus data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<Cell>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<I: IntoIterator<Item = C>, C: Into<Cell>>(header: I) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    /// Row label followed by numbers.
    pub fn push_labeled(&mut self, label: impl Into<Cell>, values: impl IntoIterator<Item = f64>) {
        let mut row = vec![label.into()];
        row.extend(values.into_iter().map(Cell::Num));
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// `{"header": [...], "rows": [[...], ...]}` with floats kept as their
    /// fixed-format strings.
    pub fn to_json(&self) -> String {
        let header: Vec<_> = self.header.iter().map(Cell::json).collect();
        let rows: Vec<Vec<_>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let v = serde_json::json!({ "header": header, "rows": rows });
        serde_json::to_string_pretty(&v).expect("table serializes") + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so the final path never holds a partial file.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Collects the artifacts of one run under an output directory.
#[derive(Debug)]
pub struct ArtifactWriter {
    pub dir: PathBuf,
    pub format: Format,
    pub written: Vec<String>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, format: Format) -> Self {
        Self {
            dir: dir.to_path_buf(),
            format,
            written: Vec::new(),
        }
    }

    /// Writes `name` (relative to the output directory) and records it.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        atomic_write(&self.dir.join(name), contents.as_bytes())?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes a table as `stem.csv` or `stem.json`; returns the file name.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<String> {
        let name = format!("{stem}.{}", self.format.extension());
        self.write(&name, &table.render(self.format))?;
        Ok(name)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.write(name, &text)
    }

    /// Writes a gnuplot script for CSV artifacts already in the directory.
    pub fn plot(&mut self, name: &str, plot: &Plot) -> Result<()> {
        let script = emit_plot_script(&self.dir, plot)?;
        self.write(name, &script)
    }
}

/// A rendering of one CSV artifact.
#[derive(Debug, Clone, PartialEq)]
pub enum Plot {
    /// Nonuniform matrix: first row is the column count then x values,
    /// following rows are y then z values.
    Heatmap {
        csv: String,
        title: String,
        xlabel: String,
        ylabel: String,
    },
    /// Clustered bars, one cluster per row; `first_column` (1-based) is the
    /// first plotted column and `label_column` names the clusters.
    GroupedBars {
        csv: String,
        title: String,
        label_column: usize,
        first_column: usize,
        n_series: usize,
        ylabel: String,
    },
    /// Matrix with a header row and a label column.
    MatrixImage {
        csv: String,
        title: String,
        xlabel: String,
        ylabel: String,
    },
}

impl Plot {
    fn csv(&self) -> &str {
        match self {
            Plot::Heatmap { csv, .. } | Plot::GroupedBars { csv, .. } | Plot::MatrixImage { csv, .. } => csv,
        }
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// A self-contained gnuplot script that reads the CSV by relative path and
/// writes a PNG next to it.
pub fn emit_plot_script(dir: &Path, plot: &Plot) -> Result<String> {
    let csv = plot.csv();
    if !dir.join(csv).is_file() {
        return Err(Error::validation(format!(
            "cannot plot {csv}: no such artifact in {}",
            dir.display()
        )));
    }
    let png = format!("{}.png", csv.trim_end_matches(".csv"));
    let mut s = String::new();
    let _ = writeln!(s, "# run from the directory holding {csv}");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,720");
    let _ = writeln!(s, "set output {}", quote(&png));
    match plot {
        Plot::Heatmap {
            title, xlabel, ylabel, ..
        } => {
            let _ = writeln!(s, "set title {}", quote(title));
            let _ = writeln!(s, "set xlabel {}", quote(xlabel));
            let _ = writeln!(s, "set ylabel {}", quote(ylabel));
            let _ = writeln!(s, "set palette rgbformulae 33,13,10");
            let _ = writeln!(s, "set view map");
            let _ = writeln!(s, "plot {} nonuniform matrix with image notitle", quote(csv));
        }
        Plot::GroupedBars {
            title,
            label_column,
            first_column,
            n_series,
            ylabel,
            ..
        } => {
            let _ = writeln!(s, "set title {}", quote(title));
            let _ = writeln!(s, "set ylabel {}", quote(ylabel));
            let _ = writeln!(s, "set style data histogram");
            let _ = writeln!(s, "set style histogram cluster gap 1");
            let _ = writeln!(s, "set style fill solid border -1");
            let _ = writeln!(s, "set xtics rotate by -90 font ',6'");
            let _ = writeln!(s, "set key autotitle columnheader");
            let last = first_column + n_series.saturating_sub(1);
            let _ = writeln!(
                s,
                "plot for [i={first_column}:{last}] {} using i:xtic({label_column})",
                quote(csv)
            );
        }
        Plot::MatrixImage {
            title, xlabel, ylabel, ..
        } => {
            let _ = writeln!(s, "set title {}", quote(title));
            let _ = writeln!(s, "set xlabel {}", quote(xlabel));
            let _ = writeln!(s, "set ylabel {}", quote(ylabel));
            let _ = writeln!(s, "set palette rgbformulae 33,13,10");
            let _ = writeln!(s, "set xtics rotate by -90 font ',6'");
            let _ = writeln!(s, "set ytics font ',6'");
            let _ = writeln!(s, "set yrange [] reverse");
            let _ = writeln!(s, "plot {} matrix rowheaders columnheaders with image notitle", quote(csv));
        }
    }
    Ok(s)
}
