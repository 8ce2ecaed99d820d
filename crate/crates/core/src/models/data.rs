//! CSV dataset readers and the bundled fixtures.
//!
//! Layouts: normal `ybar`; binomial `y,n`; correlation `v1,v2` (raw, one
//! row per pair); table `y00,y01,y10,y11`. Lines starting with `#` are
//! comments.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{BinomialData, CorrelationData, NormalData, TableCounts};
use crate::real::Real;

pub const CLINICAL_TRIAL_CSV: &str = include_str!("../../fixtures/clinical_trial.csv");
pub const LAW_SCHOOL_CSV: &str = include_str!("../../fixtures/law_school.csv");

fn rows<R: Read>(reader: R, columns: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| Error::InvalidData(format!("missing column `{c}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(idx.iter().map(|&i| rec.get(i).unwrap_or("").to_string()).collect());
    }
    if out.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }
    Ok(out)
}

fn single_row<R: Read>(reader: R, columns: &[&str]) -> Result<Vec<String>> {
    let mut r = rows(reader, columns)?;
    if r.len() != 1 {
        return Err(Error::InvalidData(format!("expected one data row, found {}", r.len())));
    }
    Ok(r.remove(0))
}

fn real<T: Real>(s: &str) -> Result<T> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::InvalidData(format!("not a number: `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::InvalidData(format!("not finite: `{s}`")));
    }
    Ok(T::lit(v))
}

fn count(s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| Error::InvalidData(format!("not a nonnegative integer: `{s}`")))
}

pub fn read_normal<T: Real, R: Read>(reader: R) -> Result<NormalData<T>> {
    let row = single_row(reader, &["ybar"])?;
    Ok(NormalData { ybar: real(&row[0])? })
}

/// Returns the observation and the number of trials.
pub fn read_binomial<R: Read>(reader: R) -> Result<(BinomialData, u64)> {
    let row = single_row(reader, &["y", "n"])?;
    let y = count(&row[0])?;
    let n = count(&row[1])?;
    if y > n {
        return Err(Error::InvalidData(format!("y = {y} exceeds n = {n}")));
    }
    Ok((BinomialData { successes: y }, n))
}

/// Raw pairs, before standardization.
pub fn read_pairs<T: Real, R: Read>(reader: R) -> Result<Vec<[T; 2]>> {
    rows(reader, &["v1", "v2"])?
        .iter()
        .map(|r| Ok([real(&r[0])?, real(&r[1])?]))
        .collect()
}

/// Reads raw pairs and standardizes them.
pub fn read_correlation<T: Real, R: Read>(reader: R) -> Result<CorrelationData<T>> {
    CorrelationData::standardized(&read_pairs(reader)?)
}

pub fn read_table<R: Read>(reader: R) -> Result<TableCounts> {
    let row = single_row(reader, &["y00", "y01", "y10", "y11"])?;
    Ok(TableCounts::new(count(&row[0])?, count(&row[1])?, count(&row[2])?, count(&row[3])?))
}

pub fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// The bundled clinical-trial table.
pub fn clinical_trial() -> TableCounts {
    read_table(CLINICAL_TRIAL_CSV.as_bytes()).expect("bundled fixture parses")
}

/// The bundled law-school pairs, standardized.
pub fn law_school<T: Real>() -> CorrelationData<T> {
    read_correlation(LAW_SCHOOL_CSV.as_bytes()).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        assert_eq!(clinical_trial().cells, [11, 14, 17, 8]);
        let d = law_school::<f64>();
        assert_eq!(d.len(), 15);
        assert!((d.sample_correlation() - 0.776).abs() < 1e-3);
    }

    #[test]
    fn readers_reject_malformed_input() {
        assert!(read_normal::<f64, _>("ybar\nabc\n".as_bytes()).is_err());
        assert!(read_normal::<f64, _>("mean\n1\n".as_bytes()).is_err());
        assert!(read_binomial("y,n\n21,20\n".as_bytes()).is_err());
        assert!(read_binomial("y,n\n-1,20\n".as_bytes()).is_err());
        assert!(read_table("y00,y01,y10,y11\n1,2,3\n".as_bytes()).is_err());
        assert!(read_table("y00,y01,y10,y11\n".as_bytes()).is_err());
        assert_eq!(read_binomial("# c\ny,n\n8,20\n".as_bytes()).unwrap(), (BinomialData { successes: 8 }, 20));
        assert_eq!(read_normal::<f64, _>("ybar\n152\n".as_bytes()).unwrap().ybar, 152.0);
    }
}
