//! Target functions.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::airy;
use crate::error::{Error, Result};

/// Tabulated samples, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub source: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Table {
    pub fn new(source: impl Into<String>, mut rows: Vec<(f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Config(
                "a table target needs at least two samples".into(),
            ));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("table abscissae must be distinct".into()));
        }
        let (xs, ys) = rows.into_iter().unzip();
        Ok(Self {
            source: source.into(),
            xs,
            ys,
        })
    }

    /// Reads a two-column CSV (`x,f`); a non-numeric first line is a header.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (a, b) = match (cols.next(), cols.next()) {
                (Some(a), Some(b)) => (a.trim(), b.trim()),
                _ => {
                    return Err(Error::Parse(format!(
                        "{}:{}: expected x,f",
                        path.display(),
                        i + 1
                    )))
                }
            };
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => rows.push((x, y)),
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "{}:{}: bad number",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
        Self::new(path.display().to_string(), rows)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain(format!(
                "x = {x} outside table range [{lo}, {hi}]"
            )));
        }
        let j = self
            .xs
            .partition_point(|&t| t <= x)
            .clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let t = (x - x0) / (x1 - x0);
        Ok(self.ys[j - 1] * (1.0 - t) + self.ys[j] * t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TargetSpec {
    /// `e^{-x}`
    ExpNeg,
    /// `Bi(-x)`
    AiryBiNeg,
    Abs,
    /// `x^{1/p}` on `[0, inf)`
    Root(u32),
    /// `log x` on `(0, inf)`
    LogPos,
    Table(Arc<Table>),
}

impl TargetSpec {
    /// Natural domain as a closed or open interval `(lo, hi, lo_inclusive)`.
    pub fn domain(&self) -> (f64, f64, bool) {
        match self {
            Self::ExpNeg | Self::Abs => (f64::NEG_INFINITY, f64::INFINITY, false),
            Self::AiryBiNeg => (-airy::BI_MAX, -airy::BI_MIN, true),
            Self::Root(_) => (0.0, f64::INFINITY, true),
            Self::LogPos => (0.0, f64::INFINITY, false),
            Self::Table(t) => {
                let (a, b) = t.domain();
                (a, b, true)
            }
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi, incl) = self.domain();
        let above = if incl { x >= lo } else { x > lo };
        above && x <= hi && x.is_finite()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Domain(format!("{self} is not defined at x = {x}")));
        }
        Ok(match self {
            Self::ExpNeg => (-x).exp(),
            Self::AiryBiNeg => airy::airy_bi(-x)?,
            Self::Abs => x.abs(),
            Self::Root(2) => x.sqrt(),
            Self::Root(3) => x.cbrt(),
            Self::Root(p) => x.powf(1.0 / *p as f64),
            Self::LogPos => x.ln(),
            Self::Table(t) => t.eval(x)?,
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::ExpNeg => "exp-neg".into(),
            Self::AiryBiNeg => "airy-bi-neg".into(),
            Self::Abs => "abs".into(),
            Self::Root(p) => format!("root:{p}"),
            Self::LogPos => "log".into(),
            Self::Table(t) => format!("table:{}", t.source),
        }
    }
}

/// Evaluates a target, failing outside its domain.
pub fn eval_target(spec: &TargetSpec, x: f64) -> Result<f64> {
    spec.eval(x)
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<TargetSpec> for String {
    fn from(t: TargetSpec) -> String {
        t.name()
    }
}

impl TryFrom<String> for TargetSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("table:") {
            return Ok(Self::Table(Arc::new(Table::load(Path::new(path))?)));
        }
        match s {
            "exp-neg" => return Ok(Self::ExpNeg),
            "airy-bi-neg" => return Ok(Self::AiryBiNeg),
            "abs" => return Ok(Self::Abs),
            "log" => return Ok(Self::LogPos),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("root:") {
            let p: u32 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad root order in `{s}`")))?;
            if p < 2 {
                return Err(Error::Config(format!("root order must be >= 2, got {p}")));
            }
            return Ok(Self::Root(p));
        }
        Err(Error::Parse(format!("unrecognised target `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_values() {
        assert_eq!(TargetSpec::ExpNeg.eval(0.0).unwrap(), 1.0);
        assert_eq!(TargetSpec::Abs.eval(-2.0).unwrap(), 2.0);
        assert_eq!(TargetSpec::Root(2).eval(0.25).unwrap(), 0.5);
        assert_eq!(TargetSpec::LogPos.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn airy_target_is_reflected() {
        let v = TargetSpec::AiryBiNeg.eval(-1.0).unwrap();
        assert_eq!(v, airy::airy_bi(1.0).unwrap());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            TargetSpec::Root(2).eval(-0.1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            TargetSpec::LogPos.eval(0.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            TargetSpec::AiryBiNeg.eval(31.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parse_names() {
        for s in ["exp-neg", "airy-bi-neg", "abs", "root:3", "log"] {
            assert_eq!(s.parse::<TargetSpec>().unwrap().name(), s);
        }
        assert!("root:1".parse::<TargetSpec>().is_err());
        assert!("sin".parse::<TargetSpec>().is_err());
    }

    #[test]
    fn table_interpolates() {
        let t = Table::new("mem", vec![(1.0, 10.0), (0.0, 0.0), (2.0, 0.0)]).unwrap();
        let spec = TargetSpec::Table(Arc::new(t));
        assert_eq!(spec.eval(0.5).unwrap(), 5.0);
        assert_eq!(spec.eval(2.0).unwrap(), 0.0);
        assert_eq!(spec.eval(1.0).unwrap(), 10.0);
        assert!(spec.eval(2.5).is_err());
    }

    #[test]
    fn table_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "x,f\n0,1\n1,3\n").unwrap();
        let spec: TargetSpec = format!("table:{}", path.display()).parse().unwrap();
        assert_eq!(spec.eval(0.5).unwrap(), 2.0);
    }
}
