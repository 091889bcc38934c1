//! CSV and JSON tables of sweep results.
//!
//! Column order is fixed and given by [`COLUMNS`]. Numbers carry nine
//! significant digits; failed rows have empty (CSV) or null (JSON) metric
//! cells and the error text in `status`.

use serde_json::{Map, Value};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::ResultRow;

pub const COLUMNS: [&str; 22] = [
    "L_m",
    "theta_deg",
    "P_in_W",
    "mu",
    "V1",
    "V2",
    "eta_b",
    "w_m",
    "converged",
    "iterations",
    "eta_diff",
    "eta_extr",
    "c1_W",
    "P_out_W",
    "gamma_AA",
    "P_pv_o_W",
    "I_pv_A",
    "V_pv_V",
    "SNR",
    "R_a_bps",
    "below_threshold",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::validation("format", format!("expected csv or json, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Missing,
}

/// Format with nine significant digits, choosing fixed or exponent
/// notation like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn row_cells(row: &ResultRow) -> Vec<Cell> {
    let p = &row.point;
    let input = match p.drive {
        crate::power::DriveMode::Power(w) => Some(w),
        crate::power::DriveMode::Current(_) => None,
    };
    let mut cells = vec![Cell::Num(p.distance), Cell::Num(p.theta_deg)];
    match &row.outcome {
        Ok(m) => {
            cells.push(Cell::Num(input.unwrap_or(m.budget.p_in)));
            cells.push(Cell::Num(p.mu));
            cells.extend([
                Cell::Num(m.mode.v1),
                Cell::Num(m.mode.v2),
                Cell::Num(m.mode.overlap_efficiency),
                Cell::Num(m.mode.beam_radius),
                Cell::Bool(m.mode.converged),
                Cell::Int(m.mode.iterations as u64),
                Cell::Num(m.budget.eta_diff),
                Cell::Num(m.budget.eta_extr),
                Cell::Num(m.budget.c1),
                Cell::Num(m.budget.p_out),
                Cell::Num(m.gamma),
                Cell::Num(m.receiver.pv.power),
                Cell::Num(m.receiver.pv.current),
                Cell::Num(m.receiver.pv.voltage),
                Cell::Num(m.receiver.snr),
                Cell::Num(m.receiver.rate),
                Cell::Bool(m.budget.below_threshold),
                Cell::Text(if m.mode.closed { "closed".into() } else { "ok".into() }),
            ]);
        }
        Err(e) => {
            cells.push(input.map_or(Cell::Missing, Cell::Num));
            cells.push(Cell::Num(p.mu));
            cells.extend(std::iter::repeat(Cell::Missing).take(COLUMNS.len() - 5));
            cells.push(Cell::Text(format!("error: {e}")));
        }
    }
    debug_assert_eq!(cells.len(), COLUMNS.len());
    cells
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Num(x) => format_sig9(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(t) => {
            if t.contains([',', '"', '\n']) {
                format!("\"{}\"", t.replace('"', "\"\""))
            } else {
                t.clone()
            }
        }
        Cell::Missing => String::new(),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Num(x) if x.is_finite() => {
            let rounded: f64 = format_sig9(*x).parse().expect("formatted number parses");
            serde_json::Number::from_f64(rounded).map_or(Value::Null, Value::Number)
        }
        Cell::Num(_) | Cell::Missing => Value::Null,
        Cell::Int(i) => Value::from(*i),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(t) => Value::String(t.clone()),
    }
}

/// Render rows as CSV text with a header line.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row_cells(row).iter().map(csv_field).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Render rows as a JSON array of objects keyed by column name.
pub fn to_json(rows: &[ResultRow]) -> String {
    let array: Vec<Value> = rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, cell) in COLUMNS.iter().zip(row_cells(row)) {
                obj.insert((*name).to_string(), json_value(&cell));
            }
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&array).expect("json serialises");
    s.push('\n');
    s
}

pub fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(rows),
    }
}

/// Write the table to `path`, or to stdout when `path` is `-`.
pub fn emit(rows: &[ResultRow], format: Format, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::validation("results", "nothing to emit"));
    }
    let text = render(rows, format);
    if path == Path::new("-") {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
