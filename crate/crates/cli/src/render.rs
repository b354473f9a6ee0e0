//! Deterministic number and table rendering.

use crate::error::CliError;

pub const PRECISION_VAR: &str = "VALFORME_PRECISION";
pub const DEFAULT_DIGITS: usize = 12;
const MIN_DIGITS: usize = 6;
const MAX_DIGITS: usize = 17;

/// Significant digits of rendered numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision(pub usize);

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_DIGITS)
    }
}

impl Precision {
    pub fn parse(raw: Option<&str>) -> Result<Self, CliError> {
        let Some(raw) = raw else {
            return Ok(Precision::default());
        };
        match raw.trim().parse::<usize>() {
            Ok(d) if (MIN_DIGITS..=MAX_DIGITS).contains(&d) => Ok(Precision(d)),
            _ => Err(CliError::Input(format!("{PRECISION_VAR} must be an integer in {MIN_DIGITS}..={MAX_DIGITS}, got {raw:?}"))),
        }
    }

    pub fn from_env() -> Result<Self, CliError> {
        Precision::parse(std::env::var(PRECISION_VAR).ok().as_deref())
    }

    /// `v` with `self.0` significant digits: plain decimal for moderate
    /// magnitudes, scientific otherwise.
    pub fn fmt(self, v: f64) -> String {
        if v == 0.0 {
            return "0".into();
        }
        if !v.is_finite() {
            return format!("{v}");
        }
        let digits = self.0;
        let sci = format!("{:.*e}", digits - 1, v);
        let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
        if (-5..=15).contains(&exp) {
            let decimals = (digits as i32 - 1 - exp).max(0) as usize;
            format!("{v:.decimals$}")
        } else {
            sci
        }
    }

    pub fn fmt_opt(self, v: Option<f64>) -> String {
        v.map_or_else(String::new, |v| self.fmt(v))
    }
}

/// Right-aligned text grid; the first column is left-aligned.
pub fn grid(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|j| rows.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = width[j]) } else { format!("{c:>w$}", w = width[j]) })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}
