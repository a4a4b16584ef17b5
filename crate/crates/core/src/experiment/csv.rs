use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::signal::Signal;
use crate::{Error, Result};

pub const TRACE_HEADER: &str = "n,variant,theta,lambda,step_norm,normalized_error";

/// One line of an error curve. Row `n` describes `x_n` and the iteration
/// leaving it; the last row of a run has no outgoing iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub variant: String,
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub step_norm: Option<f64>,
    /// `‖x_n − x∞‖ / ‖x0 − x∞‖`
    pub normalized_error: Option<f64>,
}

fn field(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        write!(out, "{v:.16e}").unwrap();
    }
}

pub fn format_trace(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        write!(out, "{},{}", r.n, r.variant).unwrap();
        field(&mut out, r.theta);
        field(&mut out, r.lambda);
        field(&mut out, r.step_norm);
        field(&mut out, r.normalized_error);
        out.push('\n');
    }
    out
}

pub fn emit_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    fs::write(path, format_trace(rows))?;
    Ok(())
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(Error::Config("missing trace header".into()));
    }
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("bad number `{s}`")))
        }
    };
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Config(format!("expected 6 fields in `{line}`")));
            }
            Ok(TraceRow {
                n: f[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("bad index `{}`", f[0])))?,
                variant: f[1].to_string(),
                theta: num(f[2])?,
                lambda: num(f[3])?,
                step_norm: num(f[4])?,
                normalized_error: num(f[5])?,
            })
        })
        .collect()
}

pub fn format_signal(x: &Signal) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in x.iter().enumerate() {
        writeln!(out, "{i},{v:.16e}").unwrap();
    }
    out
}

pub fn write_signal(x: &Signal, path: &Path) -> Result<()> {
    fs::write(path, format_signal(x))?;
    Ok(())
}

pub fn read_signal(path: &Path) -> Result<Signal> {
    let text = fs::read_to_string(path)?;
    let values = text
        .lines()
        .skip(1)
        .map(|l| {
            l.split_once(',')
                .and_then(|(_, v)| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad signal line `{l}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Signal::new(values)
}
