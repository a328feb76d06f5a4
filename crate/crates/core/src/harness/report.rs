use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{Experiment, Format};
use super::stats::{IntegerMoments, Proportion};

pub const CSV_HEADER: &str = "experiment,r,T,n,estimate,stderr,ci_low,ci_high,target,target_source,z";

/// One cell of an experiment. Non-finite numbers mean "not available".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub r: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub n: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub target: Option<f64>,
    pub target_source: String,
    pub z: Option<f64>,
}

impl Row {
    fn with_stats(label: String, estimate: f64, stderr: f64, ci: (f64, f64), n: u64) -> Row {
        Row {
            experiment: label,
            r: None,
            horizon: None,
            n,
            estimate,
            stderr,
            ci_low: ci.0,
            ci_high: ci.1,
            target: None,
            target_source: "empirical-only".into(),
            z: None,
        }
    }

    pub fn proportion(label: impl Into<String>, p: Proportion) -> Row {
        Row::with_stats(label.into(), p.estimate(), p.stderr(), p.interval(), p.n)
    }

    pub fn mean(label: impl Into<String>, m: IntegerMoments) -> Row {
        Row::with_stats(label.into(), m.mean(), m.stderr(), m.interval(), m.n)
    }

    /// A row whose estimate is a deterministic computation with an error bound.
    pub fn computed(label: impl Into<String>, value: f64, error: f64, n: u64) -> Row {
        Row::with_stats(label.into(), value, error, (value - error, value + error), n)
    }

    /// A cell that could not be computed.
    pub fn failure(label: impl Into<String>, n: u64, message: &str) -> Row {
        let mut row = Row::with_stats(label.into(), f64::NAN, f64::NAN, (f64::NAN, f64::NAN), n);
        row.target_source = format!("error: {}", message.replace([',', '\n', '\r'], ";"));
        row
    }

    pub fn at(mut self, r: Option<f64>, horizon: Option<f64>) -> Row {
        self.r = r;
        self.horizon = horizon;
        self
    }

    /// Attaches a target and fills in the z-score.
    pub fn target(mut self, target: Option<f64>, source: &str) -> Row {
        self.target = target.filter(|t| t.is_finite());
        self.target_source = source.to_string();
        self.z = self.target.and_then(|t| {
            let diff = self.estimate - t;
            if self.stderr > 0.0 {
                Some(diff / self.stderr)
            } else if diff == 0.0 {
                Some(0.0)
            } else {
                None
            }
        });
        self
    }

    pub fn is_failure(&self) -> bool {
        self.target_source.starts_with("error:")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub seed: u64,
    pub workers: usize,
    pub samples: u64,
    pub c1: f64,
    pub wall_time_seconds: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub experiment: Experiment,
    pub rows: Vec<Row>,
    pub metadata: Metadata,
}

impl TrialReport {
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(Row::is_failure)
    }

    /// Rows whose label ends with `quantity`, e.g. `"event"` for `evl:event`.
    pub fn rows_for<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |row| row.experiment.rsplit(':').next() == Some(quantity))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let cells = [
                row.experiment.clone(),
                opt(row.r),
                opt(row.horizon),
                row.n.to_string(),
                num(row.estimate),
                num(row.stderr),
                num(row.ci_low),
                num(row.ci_high),
                opt(row.target),
                row.target_source.clone(),
                opt(row.z),
            ];
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes the report to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> std::io::Result<()> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                stdout.flush()
            }
        }
    }
}

/// `v` rounded to 15 significant digits, printed as a plain decimal; empty if
/// not finite.
pub fn num(v: f64) -> String {
    if !v.is_finite() {
        return String::new();
    }
    let rounded: f64 = format!("{v:.14e}").parse().expect("round trip of formatted float");
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(rows: Vec<Row>) -> TrialReport {
        TrialReport {
            experiment: Experiment::HitProb,
            rows,
            metadata: Metadata {
                seed: 1,
                workers: 1,
                samples: 100,
                c1: 50.0,
                wall_time_seconds: 0.5,
                version: "0".into(),
            },
        }
    }

    #[test]
    fn number_formatting() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1.0 / 3.0), "0.333333333333333");
        assert_eq!(num(2.0 / 3.0), "0.666666666666667");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1e4), "10000");
        assert_eq!(num(f64::NAN), "");
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(report(vec![]).to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_render_and_z_scores() {
        let row = Row::proportion("hit-prob:hit", Proportion { successes: 25, n: 100 })
            .at(Some(0.5), None)
            .target(Some(0.2), "first-moment");
        assert!((row.z.unwrap() - 0.05 / (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-12);
        let csv = report(vec![row]).to_csv();
        let line = csv.lines().nth(1).unwrap();
        assert!(line.starts_with("hit-prob:hit,0.5,,100,0.25,"));
        assert_eq!(line.split(',').count(), 11);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn failures_are_marked() {
        let row = Row::failure("evl:event", 100, "too many, candidates\nhere");
        assert!(row.is_failure());
        let r = report(vec![row]);
        assert!(r.has_failures());
        assert_eq!(r.to_csv().lines().nth(1).unwrap().split(',').count(), 11);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(v["rows"][0]["estimate"].is_null());
    }

    #[test]
    fn json_round_trips() {
        let row = Row::proportion("x", Proportion { successes: 1, n: 3 }).target(Some(0.3), "t");
        let r = report(vec![row.clone()]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rows"][0]["estimate"].as_f64().unwrap(), row.estimate);
        assert_eq!(v["rows"][0]["z"].as_f64().unwrap(), row.z.unwrap());
        assert_eq!(v["metadata"]["seed"].as_u64().unwrap(), 1);
        assert_eq!(v["experiment"], "hit-prob");
        assert_eq!(r.to_json(), r.to_json());
    }
}
