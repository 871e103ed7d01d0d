//! CSV ingestion and export of datasets.

use std::path::Path;

use cksvar::{Dataset, LatentPath};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::config::{DataConfig, Transform};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Freq {
    Quarter,
    Month,
    Index,
}

/// Parses `1960q1`, `1960-Q1`, `1960-01`, `1960-01-01` or an integer index
/// into a frequency and an ordinal.
fn parse_date(s: &str) -> Option<(Freq, i64)> {
    let s = s.trim();
    if let Some(pos) = s.find(['q', 'Q']) {
        let year: i64 = s[..pos].trim_end_matches(['-', ':', ' ']).parse().ok()?;
        let q: i64 = s[pos + 1..].parse().ok()?;
        return (1..=4).contains(&q).then_some((Freq::Quarter, year * 4 + q - 1));
    }
    let parts: Vec<&str> = s.split('-').collect();
    if parts.len() == 2 || parts.len() == 3 {
        let year: i64 = parts[0].parse().ok()?;
        let month: i64 = parts[1].parse().ok()?;
        if parts.len() == 3 {
            let day: i64 = parts[2].parse().ok()?;
            if !(1..=31).contains(&day) {
                return None;
            }
        }
        return (1..=12).contains(&month).then_some((Freq::Month, year * 12 + month - 1));
    }
    s.parse::<i64>().ok().map(|i| (Freq::Index, i))
}

pub fn quarter_label(ordinal: i64) -> String {
    format!("{}q{}", ordinal.div_euclid(4), ordinal.rem_euclid(4) + 1)
}

/// Consecutive quarter labels starting at `start` (e.g. `1960q1`).
pub fn quarter_labels(start: &str, n: usize) -> CliResult<Vec<String>> {
    match parse_date(start) {
        Some((Freq::Quarter, q0)) => Ok((0..n as i64).map(|i| quarter_label(q0 + i)).collect()),
        _ => Err(CliError::Config(format!("start date '{start}' is not a quarter such as 1960q1"))),
    }
}

fn is_missing(s: &str) -> bool {
    matches!(s.trim().to_ascii_lowercase().as_str(), "" | "na" | "nan" | "." | "null")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    /// Rows after aggregation and transforms, including pre-sample rows.
    pub rows: usize,
    /// Estimation sample length `T` (rows minus lags).
    pub observations: usize,
    pub at_bound: usize,
    pub share_at_bound: f64,
    /// Values strictly below the bound, recorded as binding.
    pub below_bound: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Series names in model order; the constrained series is last.
    pub names: Vec<String>,
    /// Date label of every row, pre-sample rows first.
    pub dates: Vec<String>,
    pub report: IngestReport,
}

struct Table {
    dates: Vec<String>,
    keys: Vec<(Freq, i64)>,
    names: Vec<String>,
    /// Column-major values.
    cols: Vec<Vec<f64>>,
}

fn read_table(path: &Path, cfg: &DataConfig) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Config(format!("{}: bad header row: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let col_of = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("column '{name}' not found in {}", path.display())))
    };
    let date_idx = match &cfg.date_column {
        Some(d) => col_of(d)?,
        None => 0,
    };
    let constrained = cfg.constrained.as_deref().unwrap_or_default();
    let mut names: Vec<String> = if cfg.columns.is_empty() {
        headers.iter().enumerate().filter(|(i, _)| *i != date_idx).map(|(_, h)| h.clone()).collect()
    } else {
        cfg.columns.clone()
    };
    let c_pos = names
        .iter()
        .position(|n| n == constrained)
        .ok_or_else(|| CliError::Config(format!("constrained series '{constrained}' not found")))?;
    let c_name = names.remove(c_pos);
    names.push(c_name);
    let idx: Vec<usize> = names.iter().map(|n| col_of(n)).collect::<CliResult<_>>()?;
    if idx.contains(&date_idx) {
        return Err(CliError::Config("the date column cannot be a model series".into()));
    }
    if names.len() < 2 {
        return Err(CliError::Config("at least two series are required".into()));
    }

    let mut dates = Vec::new();
    let mut keys = Vec::new();
    let mut cols = vec![Vec::new(); names.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let line = r + 2;
        let date = rec.get(date_idx).unwrap_or("").to_string();
        let key = parse_date(&date)
            .ok_or_else(|| CliError::Config(format!("line {line}: unrecognized date '{date}'")))?;
        for (c, &i) in idx.iter().enumerate() {
            let cell = rec.get(i).unwrap_or("");
            if is_missing(cell) {
                return Err(CliError::Config(format!("line {line} ({date}): missing value for '{}'", names[c])));
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Config(format!("line {line} ({date}): '{cell}' in '{}' is not a number", names[c]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Config(format!("line {line} ({date}): non-finite value in '{}'", names[c])));
            }
            cols[c].push(v);
        }
        dates.push(date);
        keys.push(key);
    }
    if dates.is_empty() {
        return Err(CliError::Config(format!("{} has no data rows", path.display())));
    }
    Ok(Table { dates, keys, names, cols })
}

/// Dates must share one frequency, increase strictly and be evenly spaced.
fn check_dates(keys: &[(Freq, i64)], dates: &[String]) -> CliResult<()> {
    let freq = keys[0].0;
    if let Some(i) = keys.iter().position(|k| k.0 != freq) {
        return Err(CliError::Config(format!("date '{}' has a different format from '{}'", dates[i], dates[0])));
    }
    let mut step = None;
    for i in 1..keys.len() {
        let diff = keys[i].1 - keys[i - 1].1;
        if diff <= 0 {
            return Err(CliError::Config(format!(
                "dates are not increasing: '{}' follows '{}'",
                dates[i],
                dates[i - 1]
            )));
        }
        let s = *step.get_or_insert(diff);
        if diff != s {
            return Err(CliError::Config(format!("gap in the data between '{}' and '{}'", dates[i - 1], dates[i])));
        }
    }
    Ok(())
}

fn quarterly_average(t: Table, warnings: &mut Vec<String>) -> CliResult<Table> {
    let monthly = t.keys[0].0 == Freq::Month && t.keys.windows(2).all(|w| w[1].1 - w[0].1 == 1);
    if !monthly {
        return Err(CliError::Config("quarterly averaging requires consecutive monthly dates".into()));
    }
    let mut out = Table {
        dates: Vec::new(),
        keys: Vec::new(),
        names: t.names,
        cols: vec![Vec::new(); t.cols.len()],
    };
    let mut i = 0;
    while i < t.keys.len() {
        let q = t.keys[i].1.div_euclid(3);
        let mut j = i;
        while j < t.keys.len() && t.keys[j].1.div_euclid(3) == q {
            j += 1;
        }
        if j - i == 3 {
            for (c, col) in t.cols.iter().enumerate() {
                out.cols[c].push(col[i..j].iter().sum::<f64>() / 3.0);
            }
            out.dates.push(quarter_label(q));
            out.keys.push((Freq::Quarter, q));
        } else {
            warnings.push(format!("dropped incomplete quarter {}", quarter_label(q)));
        }
        i = j;
    }
    Ok(out)
}

fn apply_transforms(mut t: Table, cfg: &DataConfig) -> CliResult<Table> {
    if cfg.transforms.is_empty() {
        return Ok(t);
    }
    for (name, tr) in &cfg.transforms {
        let c = t
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::Config(format!("transform for unknown series '{name}'")))?;
        match tr {
            Transform::AnnualizedLogDiff => {
                let col = &t.cols[c];
                if let Some(r) = col.iter().position(|v| *v <= 0.0) {
                    return Err(CliError::Config(format!(
                        "'{name}' must be positive for a log difference (row {})",
                        t.dates[r]
                    )));
                }
                let mut d = vec![f64::NAN];
                d.extend(col.windows(2).map(|w| 400.0 * (w[1] / w[0]).ln()));
                t.cols[c] = d;
            }
        }
    }
    // differencing loses the first row of every series
    t.dates.remove(0);
    t.keys.remove(0);
    for col in &mut t.cols {
        col.remove(0);
    }
    Ok(t)
}

/// Reads a CSV file with a header row and one date column, orders the
/// constrained series last and builds the dataset. The first `p` rows are
/// the pre-sample.
pub fn ingest(path: &Path, cfg: &DataConfig, p: usize) -> CliResult<Ingested> {
    let mut warnings = Vec::new();
    let mut table = read_table(path, cfg)?;
    check_dates(&table.keys, &table.dates)?;
    if cfg.quarterly_average {
        table = quarterly_average(table, &mut warnings)?;
    }
    table = apply_transforms(table, cfg)?;
    let rows = table.dates.len();
    if rows <= p {
        return Err(CliError::Config(format!("{rows} rows leave no observations after {p} lags")));
    }
    let k = table.names.len();
    let mut below = 0;
    let c = &mut table.cols[k - 1];
    for v in c.iter_mut() {
        if *v < cfg.bound {
            *v = cfg.bound;
            below += 1;
        }
    }
    if below > 0 {
        warnings.push(format!("{below} values of '{}' below the bound recorded as binding", table.names[k - 1]));
    }
    let all = DMatrix::from_fn(rows, k, |r, c| table.cols[c][r]);
    let init = all.rows(0, p).into_owned();
    let y = all.rows(p, rows - p).into_owned();
    let t_len = rows - p;
    let dataset = Dataset::from_observations(y, init, DMatrix::from_element(t_len, 1, 1.0), cfg.bound, cfg.bind_tol, p)?;
    let at_bound = dataset.n_bound();
    if at_bound == t_len {
        return Err(CliError::Config(format!(
            "'{}' is at the bound in every period; the model needs some observations above it",
            table.names[k - 1]
        )));
    }
    if at_bound == 0 {
        warnings.push(format!(
            "'{}' is never at the bound; the kink and latent-lag coefficients are not identified and fits reduce to a linear VAR",
            table.names[k - 1]
        ));
    }
    Ok(Ingested {
        dataset,
        names: table.names,
        dates: table.dates,
        report: IngestReport {
            rows,
            observations: t_len,
            at_bound,
            share_at_bound: at_bound as f64 / t_len as f64,
            below_bound: below,
            warnings,
        },
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("cannot write {}: {e}", path.display()))
}

/// Writes pre-sample and sample rows in the layout read by [`ingest`].
/// Values use the shortest representation that parses back exactly.
pub fn export(path: &Path, data: &Dataset, names: &[String], dates: &[String]) -> CliResult<()> {
    let p = data.p;
    if names.len() != data.k() || dates.len() != p + data.len() {
        return Err(CliError::Config("names or dates do not match the dataset".into()));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["date".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for r in 0..p + data.len() {
        let row = if r < p { data.init.row(r) } else { data.y.row(r - p) };
        let mut rec = vec![dates[r].clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Shadow value and latent gap per sample period.
pub fn export_latent(path: &Path, latent: &LatentPath, dates: &[String]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["date", "shadow", "xbar"]).map_err(csv_err(path))?;
    for (t, (s, x)) in latent.ybar2star.iter().zip(&latent.xbar).enumerate() {
        w.write_record([dates[t].clone(), s.to_string(), x.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
