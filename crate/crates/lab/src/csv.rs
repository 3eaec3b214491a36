//! CSV emitters. Floats are written with 17 significant digits so every
//! value round-trips exactly.

use std::io::{self, Write};

use crate::outcome::{Check, SummaryRow, Table};

/// `{:.16e}` keeps 17 significant digits; non-finite values spell out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

pub fn write_table<W: Write>(w: &mut W, table: &Table) -> io::Result<()> {
    write!(w, "trial,step")?;
    for c in &table.columns {
        write!(w, ",{c}")?;
    }
    writeln!(w)?;
    for (trial, step, values) in table.rows() {
        write!(w, "{trial},{step}")?;
        for v in values {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(w: &mut W, columns: &[&str], summary: &[SummaryRow]) -> io::Result<()> {
    write!(w, "step,count")?;
    for c in columns {
        write!(w, ",mean_{c},se_{c}")?;
    }
    writeln!(w)?;
    for row in summary {
        write!(w, "{},{}", row.step, row.count)?;
        for (m, s) in row.mean.iter().zip(&row.se) {
            write!(w, ",{},{}", fmt_f64(*m), fmt_f64(*s))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_checks<W: Write>(w: &mut W, checks: &[Check], failures: &[(u64, String)]) -> io::Result<()> {
    writeln!(w, "check,passed,detail")?;
    for c in checks {
        writeln!(w, "{},{},{}", quote(&c.name), c.passed, quote(&c.detail))?;
    }
    for (trial, msg) in failures {
        writeln!(w, "{},false,{}", quote(&format!("trial-{trial}")), quote(msg))?;
    }
    Ok(())
}

/// One unit vector per row, columns `x0, x1, …`.
pub fn write_directions<W: Write>(w: &mut W, dim: usize, points: &[&[f64]]) -> io::Result<()> {
    let header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
