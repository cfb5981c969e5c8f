//! Bit-exact CSV emission and parsing.

use crate::error::{Error, Result};
use crate::reduced_state::{Family, NegativityReport};

pub const CSV_MAGIC: &str = "# squeezelink v1";
pub const CSV_HEADER: &str = "family,alpha,s,tau,ng_B,ng_A1,linear_entropy";

/// Significant digits of every emitted number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style formatting with `.` separator and no trailing zeros.
pub fn format_sig(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One CSV data line.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRecord {
    pub family: Family,
    pub alpha: Option<f64>,
    pub s: f64,
    pub tau: f64,
    pub ng_b: f64,
    pub ng_a1: f64,
    pub linear_entropy: f64,
}

impl CsvRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.family.name(),
            self.alpha.map(format_sig).unwrap_or_default(),
            format_sig(self.s),
            format_sig(self.tau),
            format_sig(self.ng_b),
            format_sig(self.ng_a1),
            format_sig(self.linear_entropy),
        )
    }

    /// The record with every value rounded to the emitted precision.
    pub fn rounded(&self) -> Self {
        let r = |v: f64| format_sig(v).parse::<f64>().unwrap_or(v);
        Self {
            family: self.family,
            alpha: self.alpha.map(r),
            s: r(self.s),
            tau: r(self.tau),
            ng_b: r(self.ng_b),
            ng_a1: r(self.ng_a1),
            linear_entropy: r(self.linear_entropy),
        }
    }
}

impl From<&NegativityReport> for CsvRecord {
    fn from(r: &NegativityReport) -> Self {
        Self {
            family: r.family,
            alpha: r.alpha,
            s: r.s,
            tau: r.tau,
            ng_b: r.ng_b,
            ng_a1: r.ng_a1,
            linear_entropy: r.linear_entropy,
        }
    }
}

pub fn write_csv<'a>(records: impl IntoIterator<Item = &'a NegativityReport>) -> String {
    let mut out = String::new();
    out.push_str(CSV_MAGIC);
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&CsvRecord::from(r).to_line());
        out.push('\n');
    }
    out
}

fn field(line: usize, name: &str, text: &str) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {line}: bad {name} '{text}': {e}")))
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>> {
    let mut lines = text.split('\n');
    if lines.next() != Some(CSV_MAGIC) {
        return Err(Error::Parse(format!("missing '{CSV_MAGIC}' header")));
    }
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing column header".into()));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 3;
        if line.is_empty() {
            continue;
        }
        if line.ends_with('\r') {
            return Err(Error::Parse(format!("line {lineno}: CR line ending")));
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Parse(format!("line {lineno}: expected 7 columns, got {}", cols.len())));
        }
        let family: Family = cols[0]
            .parse()
            .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
        let alpha = match (family, cols[1]) {
            (Family::Phi2, "") => None,
            (Family::Phi2, other) => {
                return Err(Error::Parse(format!("line {lineno}: phi2 row has alpha '{other}'")))
            }
            (Family::Alpha, text) => Some(field(lineno, "alpha", text)?),
        };
        out.push(CsvRecord {
            family,
            alpha,
            s: field(lineno, "s", cols[2])?,
            tau: field(lineno, "tau", cols[3])?,
            ng_b: field(lineno, "ng_B", cols[4])?,
            ng_a1: field(lineno, "ng_A1", cols[5])?,
            linear_entropy: field(lineno, "linear_entropy", cols[6])?,
        });
    }
    Ok(out)
}

/// Re-emit parsed records in the canonical form.
pub fn write_records(records: &[CsvRecord]) -> String {
    let mut out = format!("{CSV_MAGIC}\n{CSV_HEADER}\n");
    for r in records {
        out.push_str(&r.to_line());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_like_percent_g() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.05), "0.05");
        assert_eq!(format_sig(7.75), "7.75");
        assert_eq!(format_sig(0.1 + 0.2), "0.3");
        assert_eq!(format_sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(1e-4), "0.0001");
        assert_eq!(format_sig(1e-5), "1e-5");
        assert_eq!(format_sig(2.5e13), "2.5e13");
        assert_eq!(format_sig(-0.25), "-0.25");
    }

    #[test]
    fn phi2_alpha_is_empty() {
        let r = CsvRecord {
            family: Family::Phi2,
            alpha: None,
            s: 0.64,
            tau: 7.75,
            ng_b: 0.5,
            ng_a1: 0.25,
            linear_entropy: 0.125,
        };
        assert_eq!(r.to_line(), "phi2,,0.64,7.75,0.5,0.25,0.125");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_csv("family,alpha\n").is_err());
        let head = format!("{CSV_MAGIC}\n{CSV_HEADER}\n");
        assert!(parse_csv(&format!("{head}alpha,1,0,0,0,0\n")).is_err());
        assert!(parse_csv(&format!("{head}phi2,1,0,0,0,0,0\n")).is_err());
        assert!(parse_csv(&format!("{head}alpha,1,0,0,0,0,0\r\n")).is_err());
        assert_eq!(parse_csv(&head).unwrap(), vec![]);
    }

    proptest! {
        #[test]
        fn format_round_trips(v in prop::num::f64::NORMAL) {
            let once = format_sig(v);
            let back: f64 = once.parse().unwrap();
            prop_assert_eq!(format_sig(back), once.clone());
            if v != 0.0 {
                prop_assert!(((back - v) / v).abs() <= 5e-12);
            }
        }
    }
}
