//! CSV ingestion and emission.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, Writer};
use serde::{Deserialize, Serialize};
use varireg::DiscreteCurve;

use crate::failure::{CliResult, Failure};

/// Floats are written with 17 significant digits, which round-trips `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Affine map from input time to `[0, 1]`: `(t - offset) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeTransform {
    pub offset: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Wide,
    Long,
}

/// Curves read from one input file.
#[derive(Debug, Clone)]
pub struct Sample {
    pub ids: Vec<String>,
    pub curves: Vec<DiscreteCurve>,
    pub format: InputFormat,
    pub transform: Option<TimeTransform>,
}

fn open(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    Ok(ReaderBuilder::new().trim(Trim::All).from_reader(file))
}

fn line(rec: &StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn number(field: &str, line: u64, what: &str) -> CliResult<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| {
            Failure::parse(format!(
                "line {line}: {what} '{field}' is not a finite number"
            ))
        })
}

struct RawCurve {
    id: String,
    points: Vec<(f64, f64, u64)>,
}

/// Reads a wide (`t, curve…`) or long (`curve_id, t, value`) CSV file.
/// Times outside `[0, 1]` are rescaled affinely onto it.
pub fn read_sample(path: &Path) -> CliResult<Sample> {
    let mut rdr = open(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(Failure::parse("line 1: missing header row"));
    }
    if headers.get(0).is_some_and(|h| h.parse::<f64>().is_ok()) {
        return Err(Failure::parse(
            "line 1: expected a header row, found numbers",
        ));
    }
    let lower: Vec<String> = headers.iter().map(str::to_ascii_lowercase).collect();
    let (format, mut raw) = if lower == ["curve_id", "t", "value"] {
        (InputFormat::Long, read_long(&mut rdr)?)
    } else {
        (InputFormat::Wide, read_wide(&mut rdr, &headers)?)
    };
    if raw.is_empty() || raw.iter().all(|c| c.points.is_empty()) {
        return Err(Failure::parse(format!(
            "{}: no observations",
            path.display()
        )));
    }

    let (lo, hi) = raw
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| {
            (a.min(t), b.max(t))
        });
    let transform = (lo < 0.0 || hi > 1.0).then_some(TimeTransform {
        offset: lo,
        scale: hi - lo,
    });
    if let Some(tr) = transform {
        if !(tr.scale > 0.0) {
            return Err(Failure::parse("all observation times coincide"));
        }
        for c in &mut raw {
            for p in &mut c.points {
                p.0 = ((p.0 - tr.offset) / tr.scale).clamp(0.0, 1.0);
            }
        }
    }

    let mut ids = Vec::with_capacity(raw.len());
    let mut curves = Vec::with_capacity(raw.len());
    for c in raw {
        let grid = c.points.iter().map(|p| p.0).collect();
        let values = c.points.iter().map(|p| p.1).collect();
        let curve = DiscreteCurve::new(grid, values)
            .map_err(|e| Failure::parse(format!("curve '{}': {e}", c.id)))?;
        ids.push(c.id);
        curves.push(curve);
    }
    Ok(Sample {
        ids,
        curves,
        format,
        transform,
    })
}

fn read_wide(rdr: &mut csv::Reader<File>, headers: &StringRecord) -> CliResult<Vec<RawCurve>> {
    if headers.len() < 2 {
        return Err(Failure::parse(
            "line 1: a wide file needs a time column and at least one curve column",
        ));
    }
    let mut raw: Vec<RawCurve> = headers
        .iter()
        .skip(1)
        .map(|h| RawCurve {
            id: h.to_string(),
            points: Vec::new(),
        })
        .collect();
    check_unique(raw.iter().map(|c| c.id.as_str()))?;
    let mut prev: Option<f64> = None;
    for rec in rdr.records() {
        let rec = rec?;
        let ln = line(&rec);
        let t = number(&rec[0], ln, "time")?;
        if prev.is_some_and(|p| t <= p) {
            return Err(Failure::parse(format!(
                "line {ln}: times must increase strictly"
            )));
        }
        prev = Some(t);
        for (c, field) in raw.iter_mut().zip(rec.iter().skip(1)) {
            let v = number(field, ln, &format!("value of '{}'", c.id))?;
            c.points.push((t, v, ln));
        }
    }
    Ok(raw)
}

fn read_long(rdr: &mut csv::Reader<File>) -> CliResult<Vec<RawCurve>> {
    let mut raw: Vec<RawCurve> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let ln = line(&rec);
        let id = &rec[0];
        if id.is_empty() {
            return Err(Failure::parse(format!("line {ln}: empty curve_id")));
        }
        let t = number(&rec[1], ln, "time")?;
        let v = number(&rec[2], ln, "value")?;
        let k = *index.entry(id.to_string()).or_insert_with(|| {
            raw.push(RawCurve {
                id: id.to_string(),
                points: Vec::new(),
            });
            raw.len() - 1
        });
        raw[k].points.push((t, v, ln));
    }
    for c in &mut raw {
        c.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = c.points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Failure::parse(format!(
                "line {}: curve '{}' repeats time {}",
                w[1].2, c.id, w[1].0
            )));
        }
    }
    Ok(raw)
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> CliResult<()> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Failure::parse(format!("line 1: duplicate curve id '{id}'")));
        }
    }
    Ok(())
}

pub fn writer(path: &Path, header: &[&str]) -> CliResult<Writer<File>> {
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut w = Writer::from_writer(file);
    w.write_record(header)?;
    Ok(w)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::new(1, e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// A numeric table read back from one of our own outputs. The first
/// `id_cols` columns are kept as text.
pub struct Table {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a file whose header must equal `header` exactly. The first column
/// is an identifier when `has_id` is set.
pub fn read_table(path: &Path, header: &[&str], has_id: bool) -> CliResult<Table> {
    let mut rdr = open(path)?;
    let found = rdr.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Failure::parse(format!(
            "{}: line 1: expected columns {:?}, found {:?}",
            path.display(),
            header,
            found.iter().collect::<Vec<_>>()
        )));
    }
    let skip = usize::from(has_id);
    let mut table = Table {
        ids: Vec::new(),
        rows: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec?;
        let ln = line(&rec);
        if has_id {
            table.ids.push(rec[0].to_string());
        }
        let row = rec
            .iter()
            .skip(skip)
            .zip(header.iter().skip(skip))
            .map(|(f, h)| {
                number(f, ln, h).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

/// Groups the rows of a long table by identifier, keeping first-seen order.
pub fn group_rows(table: Table) -> Vec<(String, Vec<Vec<f64>>)> {
    let mut out: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (id, row) in table.ids.into_iter().zip(table.rows) {
        let k = *index.entry(id.clone()).or_insert_with(|| {
            out.push((id, Vec::new()));
            out.len() - 1
        });
        out[k].1.push(row);
    }
    out
}
