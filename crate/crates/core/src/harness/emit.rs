//! CSV artifacts and the optional plotting script.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::run::{final_epoch_summary, ExperimentOutput, PatternRow, ResultRow, SelectionRow, SummaryRow};
use crate::error::{Error, Result};

pub const MSE_VS_DIM: &str = "mse_vs_dim.csv";
pub const MSE_VS_TIME: &str = "mse_vs_time.csv";
pub const BEAM_PATTERN: &str = "beam_pattern.csv";
pub const SELECTION_TRACE: &str = "selection_trace.csv";
pub const PLOT_SCRIPT: &str = "plot.py";

const RESULT_HEADER: [&str; 8] = [
    "epoch",
    "dimension",
    "kind",
    "trial",
    "mse",
    "empirical_error",
    "det_log",
    "captured_power",
];

/// Writes `rows` as CSV with a header, even when `rows` is empty.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], header: &[&str], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn results_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &RESULT_HEADER, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

pub fn results_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    read_csv(text.as_bytes())
}

fn write_file<T: Serialize>(dir: &Path, name: &str, rows: &[T], header: &[&str]) -> Result<PathBuf> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_csv(rows, header, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Csv(c) => Error::Io {
            path: path.clone(),
            source: std::io::Error::other(c.to_string()),
        },
        other => other,
    })?;
    Ok(path)
}

/// Writes all artifacts into `dir` (created if missing) and returns their paths.
pub fn emit(output: &ExperimentOutput, dir: &Path, plot_script: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary: Vec<SummaryRow> = final_epoch_summary(&output.rows);
    let mut paths = vec![
        write_file(
            dir,
            MSE_VS_DIM,
            &summary,
            &[
                "epoch",
                "dimension",
                "kind",
                "trials",
                "mse_mean",
                "mse_se",
                "empirical_mean",
                "empirical_se",
                "det_log",
                "captured_power",
            ],
        )?,
        write_file(dir, MSE_VS_TIME, &output.rows, &RESULT_HEADER)?,
        write_file::<PatternRow>(
            dir,
            BEAM_PATTERN,
            &output.patterns,
            &["kind", "dimension", "block", "azimuth", "gain_db"],
        )?,
        write_file::<SelectionRow>(
            dir,
            SELECTION_TRACE,
            &output.selections,
            &["kind", "dimension", "block", "delay", "index", "snr", "column"],
        )?,
    ];
    if plot_script {
        let path = dir.join(PLOT_SCRIPT);
        std::fs::write(&path, PLOT_SOURCE).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

const PLOT_SOURCE: &str = r#"import sys
import pandas as pd
import matplotlib.pyplot as plt

d = sys.argv[1] if len(sys.argv) > 1 else "."

dim = pd.read_csv(f"{d}/mse_vs_dim.csv")
fig, ax = plt.subplots()
for kind, g in dim.groupby("kind"):
    ax.errorbar(g["dimension"], g["mse_mean"], yerr=g["mse_se"], marker="o", label=kind)
ax.set_yscale("log")
ax.set_xlabel("D")
ax.set_ylabel("MSE")
ax.legend()
fig.savefig(f"{d}/mse_vs_dim.png", dpi=150)

t = pd.read_csv(f"{d}/mse_vs_time.csv")
t = t.groupby(["kind", "dimension", "epoch"], as_index=False)["mse"].mean()
fig, ax = plt.subplots()
for (kind, dim_), g in t.groupby(["kind", "dimension"]):
    ax.plot(g["epoch"], g["mse"], label=f"{kind} D={dim_}")
ax.set_yscale("log")
ax.set_xlabel("epoch")
ax.set_ylabel("MSE")
ax.legend(fontsize=6)
fig.savefig(f"{d}/mse_vs_time.png", dpi=150)

p = pd.read_csv(f"{d}/beam_pattern.csv")
p = p[p["block"] == 0]
fig, ax = plt.subplots()
for (kind, dim_), g in p.groupby(["kind", "dimension"]):
    ax.plot(g["azimuth"], g["gain_db"], label=f"{kind} D={dim_}")
ax.set_ylim(bottom=-80)
ax.set_xlabel("azimuth (deg)")
ax.set_ylabel("gain (dB)")
ax.legend(fontsize=6)
fig.savefig(f"{d}/beam_pattern.png", dpi=150)
"#;
