//! CSV ingestion into dated series.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use bevt::extract::{Point, Stamp, TimeSeries};
use chrono::NaiveDate;

/// A malformed input file; the message names the offending line.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(path: &Path, line: u64, msg: impl fmt::Display) -> anyhow::Error {
    InputError(format!("{}:{line}: {msg}", path.display())).into()
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> anyhow::Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
        InputError(format!(
            "{}: no column named '{name}' (found: {})",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(", ")
        ))
        .into()
    })
}

/// Reads `date,value[,group]` rows into one series per group label, in
/// order of first appearance, each sorted by date. Lines starting with `#`
/// are ignored.
pub fn ingest_csv(
    path: &Path,
    value_col: &str,
    date_col: &str,
    group_col: Option<&str>,
) -> anyhow::Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let vi = column(&headers, value_col, path)?;
    let di = column(&headers, date_col, path)?;
    let gi = group_col.map(|g| column(&headers, g, path)).transpose()?;

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(NaiveDate, f64, u64)>> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input_err(path, line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let date = NaiveDate::parse_from_str(field(di), "%Y-%m-%d")
            .map_err(|e| input_err(path, line, format!("bad date '{}': {e}", field(di))))?;
        let value: f64 = field(vi)
            .parse()
            .map_err(|_| input_err(path, line, format!("bad value '{}'", field(vi))))?;
        if !value.is_finite() {
            return Err(input_err(path, line, format!("non-finite value '{}'", field(vi))));
        }
        let group = gi.map_or_else(|| "series".to_string(), |i| field(i).to_string());
        if !rows.contains_key(&group) {
            order.push(group.clone());
        }
        rows.entry(group).or_default().push((date, value, line));
    }
    if order.is_empty() {
        return Err(InputError(format!("{}: no data rows", path.display())).into());
    }

    order
        .into_iter()
        .map(|g| {
            let mut r = rows.remove(&g).expect("group recorded");
            r.sort_by_key(|&(d, _, line)| (d, line));
            if let Some(w) = r.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(input_err(
                    path,
                    w[1].2,
                    format!("duplicate date {} in group '{g}' (first on line {})", w[1].0, w[0].2),
                ));
            }
            let points = r
                .into_iter()
                .map(|(d, value, _)| Point {
                    stamp: Stamp::Date(d),
                    value,
                })
                .collect();
            Ok(TimeSeries::new(g, points)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_column_file() {
        let mut text = String::from("date,value\n");
        for d in 1..=10 {
            text.push_str(&format!("2020-01-{d:02},{}\n", d as f64 * 0.5));
        }
        let f = write(&text);
        let s = ingest_csv(f.path(), "value", "date", None).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].len(), 10);
    }

    #[test]
    fn group_column_splits_series() {
        let f = write("date,value,index\n2020-01-02,1.0,SP\n2020-01-02,2.0,FTSE\n2020-01-01,0.5,SP\n");
        let s = ingest_csv(f.path(), "value", "date", Some("index")).unwrap();
        let names: Vec<_> = s.iter().map(|x| x.name().to_string()).collect();
        assert_eq!(names, ["SP", "FTSE"]);
        assert_eq!(s[0].values(), [0.5, 1.0]);
    }

    #[test]
    fn malformed_date_names_line() {
        let f = write("date,value\n2020-01-01,1\n2020-13-01,2\n");
        let e = ingest_csv(f.path(), "value", "date", None).unwrap_err().to_string();
        assert!(e.contains(":3:"), "{e}");
        assert!(e.contains("2020-13-01"));
    }

    #[test]
    fn duplicate_dates_rejected_within_group() {
        let f = write("date,value,g\n2020-01-01,1,a\n2020-01-01,2,b\n2020-01-01,3,a\n");
        let e = ingest_csv(f.path(), "value", "date", Some("g")).unwrap_err().to_string();
        assert!(e.contains(":4:") && e.contains("line 2"), "{e}");
    }

    #[test]
    fn missing_column_reported() {
        let f = write("day,value\n2020-01-01,1\n");
        let e = ingest_csv(f.path(), "value", "date", None).unwrap_err().to_string();
        assert!(e.contains("no column named 'date'"), "{e}");
    }
}
