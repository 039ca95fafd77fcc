use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::CliError;

/// Fixed column order of every emitted table.
pub const HEADER: [&str; 11] = ["a", "b", "gamma", "d", "nu", "s", "mu", "t", "status", "gap", "seconds"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Optimal => "optimal",
            RecordStatus::Infeasible => "infeasible",
            RecordStatus::MaxIterations => "max_iterations",
        }
    }
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordStatus {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "optimal" => Ok(RecordStatus::Optimal),
            "infeasible" => Ok(RecordStatus::Infeasible),
            "max_iterations" => Ok(RecordStatus::MaxIterations),
            other => Err(CliError::Parse(format!("unknown status {other:?}"))),
        }
    }
}

/// One row of sweep output. Fields a problem does not use stay `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub gamma: Option<f64>,
    pub d: usize,
    pub nu: Option<f64>,
    pub s: Option<f64>,
    pub mu: Option<f64>,
    pub t: Option<f64>,
    pub status: RecordStatus,
    pub gap: Option<f64>,
    pub seconds: Option<f64>,
}

impl SweepRecord {
    pub fn empty(d: usize, status: RecordStatus) -> Self {
        Self {
            a: None,
            b: None,
            gamma: None,
            d,
            nu: None,
            s: None,
            mu: None,
            t: None,
            status,
            gap: None,
            seconds: None,
        }
    }

    fn numeric(&self) -> [Option<f64>; 10] {
        [
            self.a,
            self.b,
            self.gamma,
            Some(self.d as f64),
            self.nu,
            self.s,
            self.mu,
            self.t,
            self.gap,
            self.seconds,
        ]
    }

    fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
        vec![
            opt(self.a),
            opt(self.b),
            opt(self.gamma),
            self.d.to_string(),
            opt(self.nu),
            opt(self.s),
            opt(self.mu),
            opt(self.t),
            self.status.to_string(),
            opt(self.gap),
            opt(self.seconds),
        ]
    }

    fn to_json(&self) -> Value {
        let num = |v: Option<f64>| match v {
            Some(x) => Number::from_f64(rounded(x)).map(Value::Number).unwrap_or(Value::Null),
            None => Value::Null,
        };
        let mut m = Map::new();
        m.insert("a".into(), num(self.a));
        m.insert("b".into(), num(self.b));
        m.insert("gamma".into(), num(self.gamma));
        m.insert("d".into(), Value::from(self.d));
        m.insert("nu".into(), num(self.nu));
        m.insert("s".into(), num(self.s));
        m.insert("mu".into(), num(self.mu));
        m.insert("t".into(), num(self.t));
        m.insert("status".into(), Value::from(self.status.as_str()));
        m.insert("gap".into(), num(self.gap));
        m.insert("seconds".into(), num(self.seconds));
        Value::Object(m)
    }

    /// Order by the input columns `a, b, gamma, d`, missing values first.
    pub fn input_order(&self, other: &Self) -> Ordering {
        let key = |r: &Self| [r.a, r.b, r.gamma, Some(r.d as f64)];
        for (x, y) in key(self).iter().zip(key(other).iter()) {
            let o = match (x, y) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some(x), Some(y)) => x.total_cmp(y),
            };
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    }

    pub fn is_finite_when_optimal(&self) -> bool {
        self.status != RecordStatus::Optimal || self.numeric().iter().flatten().all(|v| v.is_finite())
    }
}

/// `%.9g`: nine significant digits, trailing zeros removed, exponent form
/// outside `[1e-4, 1e9)`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mant));
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn rounded(v: f64) -> f64 {
    format_sig(v).parse().unwrap_or(v)
}

/// Sorts by inputs and writes the table.
pub fn write_records(records: &[SweepRecord], format: OutputFormat, out: &mut impl Write) -> Result<(), CliError> {
    let mut sorted = records.to_vec();
    sorted.sort_by(|x, y| x.input_order(y));
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(HEADER)?;
            for r in &sorted {
                w.write_record(r.cells())?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = sorted.iter().map(SweepRecord::to_json).collect();
            serde_json::to_writer_pretty(&mut *out, &rows).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Reads a table produced by [`write_records`] in CSV form.
pub fn read_csv(input: impl Read) -> Result<Vec<SweepRecord>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(CliError::Parse(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let num = |i: usize| -> Result<Option<f64>, CliError> {
            let cell = &row[i];
            if cell.is_empty() {
                Ok(None)
            } else {
                cell.parse()
                    .map(Some)
                    .map_err(|_| CliError::Parse(format!("column {} holds {cell:?}", HEADER[i])))
            }
        };
        out.push(SweepRecord {
            a: num(0)?,
            b: num(1)?,
            gamma: num(2)?,
            d: row[3]
                .parse()
                .map_err(|_| CliError::Parse(format!("dimension {:?}", &row[3])))?,
            nu: num(4)?,
            s: num(5)?,
            mu: num(6)?,
            t: num(7)?,
            status: row[8].parse()?,
            gap: num(9)?,
            seconds: num(10)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(5.0 / 3.0), "1.66666667");
        assert_eq!(format_sig(25.0 / 9.0), "2.77777778");
        assert_eq!(format_sig(0.25), "0.25");
        assert_eq!(format_sig(2.0), "2");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(9.9999999996), "10");
        assert_eq!(format_sig(1.234e-7), "1.234e-7");
        assert_eq!(format_sig(123456789012.0), "1.23456789e11");
        assert_eq!(format_sig(0.000123456789123), "0.000123456789");
    }

    #[test]
    fn formatting_is_idempotent() {
        for v in [1.0 / 3.0, 1e-9 / 7.0, 12345.678901234, -2.5e12 / 3.0, 0.121884706] {
            let once = format_sig(v);
            assert_eq!(format_sig(once.parse().unwrap()), once);
        }
    }

    #[test]
    fn ordering_puts_missing_inputs_first() {
        let mut x = SweepRecord::empty(2, RecordStatus::Optimal);
        let mut y = x.clone();
        y.gamma = Some(1.0);
        assert_eq!(x.input_order(&y), Ordering::Less);
        x.a = Some(0.0);
        assert_eq!(x.input_order(&y), Ordering::Greater);
    }
}
