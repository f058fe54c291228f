//! CSV outputs. Every file has a header row, numbers are printed with six
//! significant digits, and rows come out in a fixed order.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tasks::EvalReport;
use crate::tensor::Matrix;
use crate::train::RunLog;

/// Formats like C's `%.6g`.
pub fn format_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// `metric,fold,value`. Aggregate metrics leave `fold` empty; per-fold values
/// and seeds carry their index.
pub fn report_to_csv(report: &EvalReport) -> String {
    let mut out = String::from("metric,fold,value\n");
    for (name, v) in &report.metrics {
        let _ = writeln!(out, "{name},,{}", format_sig6(*v));
    }
    for (name, values) in &report.per_fold {
        for (i, v) in values.iter().enumerate() {
            let _ = writeln!(out, "{name},{i},{}", format_sig6(*v));
        }
    }
    for (i, s) in report.seeds.iter().enumerate() {
        let _ = writeln!(out, "seed,{i},{s}");
    }
    out
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_file(path, &report_to_csv(report))
}

/// `id,e0,...,e{d-1}`, one row per graph.
pub fn write_embeddings(path: &Path, embeddings: &Matrix) -> Result<()> {
    let mut out = String::from("id");
    for j in 0..embeddings.cols() {
        let _ = write!(out, ",e{j}");
    }
    out.push('\n');
    for i in 0..embeddings.rows() {
        let _ = write!(out, "{i}");
        for &v in embeddings.row(i) {
            let _ = write!(out, ",{}", format_sig6(v));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// `run,epoch,loss`, one row per epoch of every run.
pub fn write_runlog(path: &Path, runs: &[(String, &RunLog)]) -> Result<()> {
    let mut out = String::from("run,epoch,loss\n");
    for (name, log) in runs {
        for (e, loss) in log.epoch_losses.iter().enumerate() {
            let _ = writeln!(out, "{name},{},{}", e + 1, format_sig6(*loss));
        }
    }
    write_file(path, &out)
}

/// `run,epoch,seconds`. Wall-clock times differ between runs, so they are
/// kept apart from the reproducible outputs.
pub fn write_timing(path: &Path, runs: &[(String, &RunLog)]) -> Result<()> {
    let mut out = String::from("run,epoch,seconds\n");
    for (name, log) in runs {
        for (e, s) in log.epoch_seconds.iter().enumerate() {
            let _ = writeln!(out, "{name},{},{}", e + 1, format_sig6(*s));
        }
    }
    write_file(path, &out)
}

/// `node,<name>...`, one row per node.
pub fn write_signals(path: &Path, names: &[String], columns: &[Vec<f64>]) -> Result<()> {
    if names.len() != columns.len() {
        return Err(Error::InvalidArgument("one name per signal column".into()));
    }
    let n = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("signal columns differ in length".into()));
    }
    let mut out = String::from("node");
    for name in names {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for i in 0..n {
        let _ = write!(out, "{i}");
        for c in columns {
            let _ = write!(out, ",{}", format_sig6(c[i]));
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn read_signals(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = super::read_text(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let names: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut columns = vec![Vec::new(); names.len()];
    for (k, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() + 1 {
            return Err(Error::parse(path, k + 2, "wrong number of fields"));
        }
        for (c, f) in columns.iter_mut().zip(&fields[1..]) {
            c.push(
                f.parse()
                    .map_err(|e: std::num::ParseFloatError| Error::parse(path, k + 2, e.to_string()))?,
            );
        }
    }
    Ok((names, columns))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.1234567), "0.123457");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e+06");
        assert_eq!(format_sig6(-0.00012345678), "-0.000123457");
        assert_eq!(format_sig6(1.5e-7), "1.5e-07");
        assert_eq!(format_sig6(-2.0e123), "-2e+123");
        assert_eq!(format_sig6(999999.9), "1e+06");
        assert_eq!(format_sig6(f64::NAN), "nan");
    }

    #[test]
    fn empty_report_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_report(&p, &EvalReport::default()).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "metric,fold,value\n");
    }

    #[test]
    fn embeddings_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        write_embeddings(&p, &Matrix::filled(3, 512, 0.5)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.split(',').count() == 513));
    }

    #[test]
    fn signals_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/s.csv");
        let cols = vec![vec![0.1, -2.5e-9, 3.0], vec![1.0 / 3.0, 7e12, -0.0]];
        let names = vec!["a".to_string(), "b".to_string()];
        write_signals(&p, &names, &cols).unwrap();
        let (n2, c2) = read_signals(&p).unwrap();
        assert_eq!(n2, names);
        for (a, b) in cols.iter().flatten().zip(c2.iter().flatten()) {
            assert!((a - b).abs() <= 5e-6 * a.abs());
        }
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f");
        std::fs::write(&file, "x").unwrap();
        assert!(write_report(&file.join("r.csv"), &EvalReport::default()).is_err());
    }
}
