use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sort_records, CellSummary, FailureRecord, ResultRecord};
use crate::error::{Error, Result};
use crate::pareto::Solution;
use crate::policies::PolicyId;
use crate::refsets::{format_value, FrontKind};
use crate::scheduler::{EventDiagnostics, Schedule};
use crate::stats::format_sci;

#[derive(Serialize, Deserialize)]
struct RawRow {
    front: FrontKind,
    policy: PolicyId,
    schedule: Schedule,
    shuffle: usize,
    igd: f64,
}

#[derive(Serialize, Deserialize)]
struct TimingRow {
    front: FrontKind,
    policy: PolicyId,
    schedule: Schedule,
    shuffle: usize,
    duration_ms: f64,
}

#[derive(Serialize)]
struct FailureRow<'a> {
    front: FrontKind,
    policy: PolicyId,
    schedule: Schedule,
    shuffle: usize,
    message: &'a str,
}

#[derive(Serialize)]
struct SummaryRow {
    front: FrontKind,
    policy: PolicyId,
    schedule: Schedule,
    runs: usize,
    mean: f64,
    std: f64,
    letters: String,
    median_shuffle: usize,
    median_igd: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `front,policy,schedule,shuffle,igd`; contains nothing that varies
/// between identical runs.
pub fn write_raw_results(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_rows(
        path,
        records.iter().map(|r| RawRow {
            front: r.front,
            policy: r.policy,
            schedule: r.schedule,
            shuffle: r.shuffle,
            igd: r.igd,
        }),
        &["front", "policy", "schedule", "shuffle", "igd"],
    )
}

/// `front,policy,schedule,shuffle,duration_ms`.
pub fn write_timings(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_rows(
        path,
        records.iter().map(|r| TimingRow {
            front: r.front,
            policy: r.policy,
            schedule: r.schedule,
            shuffle: r.shuffle,
            duration_ms: r.duration_ms,
        }),
        &["front", "policy", "schedule", "shuffle", "duration_ms"],
    )
}

pub fn write_failures(path: &Path, failures: &[FailureRecord]) -> Result<()> {
    write_rows(
        path,
        failures.iter().map(|f| FailureRow {
            front: f.cell.front,
            policy: f.cell.policy,
            schedule: f.cell.schedule,
            shuffle: f.shuffle,
            message: &f.message,
        }),
        &["front", "policy", "schedule", "shuffle", "message"],
    )
}

/// Reads `raw_results.csv` from `dir`, joining durations from
/// `timings.csv` when present (NaN otherwise). Records come back in
/// canonical order.
pub fn read_results(dir: &Path) -> Result<Vec<ResultRecord>> {
    let path = dir.join("raw_results.csv");
    let mut r = csv::Reader::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    let mut records = Vec::new();
    for row in r.deserialize::<RawRow>() {
        let row = row.map_err(|e| Error::csv(&path, e))?;
        records.push(ResultRecord {
            front: row.front,
            policy: row.policy,
            schedule: row.schedule,
            shuffle: row.shuffle,
            igd: row.igd,
            duration_ms: f64::NAN,
        });
    }
    let timings = dir.join("timings.csv");
    if timings.exists() {
        let mut r = csv::Reader::from_path(&timings).map_err(|e| Error::csv(&timings, e))?;
        for row in r.deserialize::<TimingRow>() {
            let row = row.map_err(|e| Error::csv(&timings, e))?;
            if let Some(rec) = records.iter_mut().find(|rec| {
                rec.front == row.front
                    && rec.policy == row.policy
                    && rec.schedule == row.schedule
                    && rec.shuffle == row.shuffle
            }) {
                rec.duration_ms = row.duration_ms;
            }
        }
    }
    sort_records(&mut records);
    Ok(records)
}

pub fn write_summary_csv(path: &Path, cells: &[CellSummary]) -> Result<()> {
    write_rows(
        path,
        cells.iter().map(|c| SummaryRow {
            front: c.cell.front,
            policy: c.cell.policy,
            schedule: c.cell.schedule,
            runs: c.runs,
            mean: c.mean,
            std: c.std,
            letters: c.letters.clone(),
            median_shuffle: c.median_shuffle,
            median_igd: c.median_igd,
        }),
        &[
            "front",
            "policy",
            "schedule",
            "runs",
            "mean",
            "std",
            "letters",
            "median_shuffle",
            "median_igd",
        ],
    )
}

fn pad(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(len)))
}

/// Fixed-width text table: one block per front, one row per policy, one
/// column per schedule, each entry `mean ± std (letters)`.
pub fn render_summary_table(cells: &[CellSummary]) -> String {
    let mut fronts: Vec<FrontKind> = Vec::new();
    let mut policies: Vec<PolicyId> = Vec::new();
    let mut schedules: Vec<Schedule> = Vec::new();
    for c in cells {
        if !fronts.contains(&c.cell.front) {
            fronts.push(c.cell.front);
        }
        if !policies.contains(&c.cell.policy) {
            policies.push(c.cell.policy);
        }
        if !schedules.contains(&c.cell.schedule) {
            schedules.push(c.cell.schedule);
        }
    }
    let entry = |c: &CellSummary| format!("{} ± {} ({})", format_sci(c.mean, 3), format_sci(c.std, 1), c.letters);

    let first_width = policies
        .iter()
        .map(|p| p.label().chars().count())
        .chain(std::iter::once("Policy".len()))
        .max()
        .unwrap_or(0);
    let col_width = cells
        .iter()
        .map(|c| entry(c).chars().count())
        .chain(schedules.iter().map(|s| s.name().len()))
        .max()
        .unwrap_or(0);

    let mut out = String::new();
    for front in fronts {
        out.push_str(&format!("IGD on the {} front (mean ± std, letters by schedule)\n", front.name()));
        let mut header = pad("Policy", first_width);
        for s in &schedules {
            header.push_str("  ");
            header.push_str(&pad(s.name(), col_width));
        }
        out.push_str(header.trim_end());
        out.push('\n');
        out.push_str(&"-".repeat(first_width + schedules.len() * (col_width + 2)));
        out.push('\n');
        for p in &policies {
            let mut line = pad(p.label(), first_width);
            for s in &schedules {
                line.push_str("  ");
                let text = cells
                    .iter()
                    .find(|c| c.cell.front == front && c.cell.policy == *p && c.cell.schedule == *s)
                    .map_or_else(|| "n/a".to_string(), entry);
                line.push_str(&pad(&text, col_width));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// Writes one scatter panel: the archive (`kind = archive`) followed by the
/// front's corner points (`kind = vertex`), each row carrying the IGD.
pub fn export_plot_data(path: &Path, front: FrontKind, archive: &[Solution], igd: f64) -> Result<()> {
    let first = archive.first().ok_or(Error::EmptyInput("plot data archive"))?;
    let m = first.objectives.dim();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = std::iter::once("kind".to_string())
        .chain((1..=m).map(|i| format!("f{i}")))
        .chain(std::iter::once("igd".to_string()))
        .collect();
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    let igd_text = format_value(igd);
    let rows = archive
        .iter()
        .map(|s| ("archive", s.values().to_vec()))
        .chain(front.vertices(m).into_iter().map(|v| ("vertex", v)));
    for (kind, values) in rows {
        let row: Vec<String> = std::iter::once(kind.to_string())
            .chain(values.iter().map(|&v| format_value(v)))
            .chain(std::iter::once(igd_text.clone()))
            .collect();
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parsed plot-data file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub archive: Vec<Vec<f64>>,
    pub vertices: Vec<Vec<f64>>,
    pub igd: f64,
}

pub fn read_plot_data(path: &Path) -> Result<PlotData> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let width = r.headers().map_err(|e| Error::csv(path, e))?.len();
    if width < 4 {
        return Err(Error::format(path, "expected header kind,f1,...,fm,igd"));
    }
    let mut data = PlotData {
        archive: Vec::new(),
        vertices: Vec::new(),
        igd: f64::NAN,
    };
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let bad = || Error::format(path, format!("row {}: bad number", line + 1));
        let values = (1..width - 1)
            .map(|i| record[i].parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        data.igd = record[width - 1].parse().map_err(|_| bad())?;
        match &record[0] {
            "archive" => data.archive.push(values),
            "vertex" => data.vertices.push(values),
            other => return Err(Error::format(path, format!("row {}: unknown kind `{other}`", line + 1))),
        }
    }
    if data.archive.is_empty() {
        return Err(Error::format(path, "no archive rows"));
    }
    Ok(data)
}

/// Per-event normalisation trace: `batch,size_before,size_after,ideal_i..,nadir_i..`.
pub(crate) fn write_trace(path: &Path, events: &[EventDiagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let m = events.first().map_or(0, |e| e.ideal.len());
    let header: Vec<String> = ["batch", "size_before", "size_after"]
        .into_iter()
        .map(String::from)
        .chain((1..=m).map(|i| format!("ideal_{i}")))
        .chain((1..=m).map(|i| format!("nadir_{i}")))
        .collect();
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for e in events {
        let row: Vec<String> = [e.batch + 1, e.size_before, e.size_after]
            .into_iter()
            .map(|v| v.to_string())
            .chain(e.ideal.iter().chain(&e.nadir).map(|&v| format_value(v)))
            .collect();
        w.write_record(&row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
