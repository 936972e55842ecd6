//! Trial statistics: mean/std over independent runs, the two-sample t-test
//! with its 0/1 rejection indicator, and the comparison report.
//!
//! The default test is Welch's (unequal variances); a pooled-variance
//! variant is available for comparison. Critical values come from the
//! t-distribution CDF evaluated through a continued-fraction regularized
//! incomplete beta — no table lookup, so fractional Welch degrees of freedom
//! cost nothing.

use crate::error::Error;
use crate::Result;

/// Labeled RMSE results of ≥ 2 independent trials of one optimizer setup.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    label: String,
    rmses: Vec<f64>,
}

impl TrialSet {
    pub fn new(label: impl Into<String>, rmses: Vec<f64>) -> Result<Self> {
        if rmses.len() < 2 {
            return Err(Error::InvalidSample(
                "a trial set needs at least 2 values".into(),
            ));
        }
        if let Some(bad) = rmses.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!(
                "trial values must be finite, got {bad}"
            )));
        }
        Ok(TrialSet {
            label: label.into(),
            rmses,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.rmses
    }

    pub fn len(&self) -> usize {
        self.rmses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rmses.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean_std(self).0
    }

    pub fn std(&self) -> f64 {
        mean_std(self).1
    }
}

/// Arithmetic mean and sample standard deviation (n − 1 denominator),
/// accumulated with Welford's update for numerical stability.
pub fn mean_std(set: &TrialSet) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &v) in set.values().iter().enumerate() {
        let d = v - mean;
        mean += d / (k + 1) as f64;
        m2 += d * (v - mean);
    }
    (mean, (m2 / (set.len() - 1) as f64).sqrt())
}

/// Outcome of a two-sample test. `h == 1` exactly when |t| exceeds the
/// two-tailed critical value at `alpha` for `dof` degrees of freedom,
/// i.e. when the two-tailed `p` drops below `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t: f64,
    pub dof: f64,
    /// Two-tailed p-value.
    pub p: f64,
    pub alpha: f64,
    pub h: u8,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha > 0.5 {
        return Err(Error::invalid_config("alpha", "must lie in (0, 0.5]"));
    }
    Ok(())
}

/// Resolution when both samples have zero variance: equal means are a
/// non-result (t = 0, h = 0); distinct means are an unambiguous rejection.
fn degenerate(mean_a: f64, mean_b: f64, dof: f64, alpha: f64) -> TTestResult {
    if mean_a == mean_b {
        TTestResult {
            t: 0.0,
            dof,
            p: 1.0,
            alpha,
            h: 0,
        }
    } else {
        TTestResult {
            t: if mean_a > mean_b {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            dof,
            p: 0.0,
            alpha,
            h: 1,
        }
    }
}

fn finish(t: f64, dof: f64, alpha: f64) -> TTestResult {
    let p = student_t_two_tailed_p(t, dof);
    TTestResult {
        t,
        dof,
        p,
        alpha,
        h: u8::from(p < alpha),
    }
}

/// Welch's unequal-variance t-test,
/// t = (mean_a − mean_b) / √(s_a²/n_a + s_b²/n_b),
/// with Welch–Satterthwaite degrees of freedom. Negative t means sample a's
/// mean is smaller — better, when the samples are RMSEs.
pub fn two_sample_t_test(a: &TrialSet, b: &TrialSet, alpha: f64) -> Result<TTestResult> {
    check_alpha(alpha)?;
    let (mean_a, std_a) = mean_std(a);
    let (mean_b, std_b) = mean_std(b);
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);
    let va = std_a * std_a / n_a;
    let vb = std_b * std_b / n_b;
    if va + vb == 0.0 {
        return Ok(degenerate(mean_a, mean_b, n_a + n_b - 2.0, alpha));
    }
    let t = (mean_a - mean_b) / (va + vb).sqrt();
    let dof = (va + vb).powi(2) / (va * va / (n_a - 1.0) + vb * vb / (n_b - 1.0));
    Ok(finish(t, dof, alpha))
}

/// Pooled-variance (Student's) variant with n_a + n_b − 2 degrees of
/// freedom, provided for comparison against the Welch default.
pub fn two_sample_t_test_pooled(a: &TrialSet, b: &TrialSet, alpha: f64) -> Result<TTestResult> {
    check_alpha(alpha)?;
    let (mean_a, std_a) = mean_std(a);
    let (mean_b, std_b) = mean_std(b);
    let (n_a, n_b) = (a.len() as f64, b.len() as f64);
    let dof = n_a + n_b - 2.0;
    let pooled = ((n_a - 1.0) * std_a * std_a + (n_b - 1.0) * std_b * std_b) / dof;
    if pooled == 0.0 {
        return Ok(degenerate(mean_a, mean_b, dof, alpha));
    }
    let t = (mean_a - mean_b) / (pooled * (1.0 / n_a + 1.0 / n_b)).sqrt();
    Ok(finish(t, dof, alpha))
}

/// Two-tailed tail probability P(|T| > |t|) of Student's t with `dof`
/// degrees of freedom, via the identity P = I_x(dof/2, 1/2) at
/// x = dof/(dof + t²).
pub fn student_t_two_tailed_p(t: f64, dof: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t))
}

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
/// switching to the complement when x is past the distribution's bulk so
/// the fraction always converges fast. Accurate to ~1e−14.
fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 3e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=400 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Natural log of the gamma function (Lanczos, g = 7), good to ~1e−13
/// relative over the positive arguments the t CDF needs.
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection keeps small arguments accurate.
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Per-set summary line of a comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct SetRow {
    pub label: String,
    pub n: usize,
    pub mean_rmse: f64,
    pub std_rmse: f64,
}

/// Pairwise test line of a comparison report.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    /// "left vs right" in set order.
    pub label: String,
    pub t: f64,
    pub dof: f64,
    pub alpha: f64,
    pub h: u8,
}

/// Mean/std per trial set plus a Welch test for every pair, renderable as
/// aligned text or CSV and parseable back from its own CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub sets: Vec<SetRow>,
    pub pairs: Vec<PairRow>,
}

const REPORT_HEADER: [&str; 9] = [
    "section",
    "label",
    "n",
    "mean_rmse",
    "std_rmse",
    "t",
    "dof",
    "alpha",
    "h",
];

/// Which two-sample test the report's pair rows use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Welch,
    Pooled,
}

/// Builds the report for one or more labeled trial sets: a summary row per
/// set, then a Welch test row per unordered pair in set order. A single set
/// yields summaries only.
pub fn comparison_report(sets: &[TrialSet], alpha: f64) -> Result<ComparisonReport> {
    comparison_report_with(sets, alpha, TestKind::Welch)
}

/// [`comparison_report`] with an explicit choice of two-sample test.
pub fn comparison_report_with(
    sets: &[TrialSet],
    alpha: f64,
    kind: TestKind,
) -> Result<ComparisonReport> {
    if sets.is_empty() {
        return Err(Error::InvalidSample(
            "a comparison report needs at least one trial set".into(),
        ));
    }
    check_alpha(alpha)?;
    let set_rows = sets
        .iter()
        .map(|s| {
            let (mean_rmse, std_rmse) = mean_std(s);
            SetRow {
                label: s.label().to_string(),
                n: s.len(),
                mean_rmse,
                std_rmse,
            }
        })
        .collect();
    let mut pairs = Vec::new();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let test = match kind {
                TestKind::Welch => two_sample_t_test(&sets[i], &sets[j], alpha)?,
                TestKind::Pooled => two_sample_t_test_pooled(&sets[i], &sets[j], alpha)?,
            };
            pairs.push(PairRow {
                label: format!("{} vs {}", sets[i].label(), sets[j].label()),
                t: test.t,
                dof: test.dof,
                alpha: test.alpha,
                h: test.h,
            });
        }
    }
    Ok(ComparisonReport {
        sets: set_rows,
        pairs,
    })
}

impl ComparisonReport {
    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<24} {:>4} {:>14} {:>14}\n",
            "set", "n", "mean_rmse", "std_rmse"
        ));
        for row in &self.sets {
            out.push_str(&format!(
                "{:<24} {:>4} {:>14.8} {:>14.8}\n",
                row.label, row.n, row.mean_rmse, row.std_rmse
            ));
        }
        if !self.pairs.is_empty() {
            out.push_str(&format!(
                "\n{:<24} {:>10} {:>10} {:>7} {:>3}\n",
                "pair", "t", "dof", "alpha", "h"
            ));
            for row in &self.pairs {
                out.push_str(&format!(
                    "{:<24} {:>10.4} {:>10.3} {:>7} {:>3}\n",
                    row.label, row.t, row.dof, row.alpha, row.h
                ));
            }
        }
        out
    }

    /// CSV with one row per set then one per pair. Numbers are written in
    /// shortest round-trip form, so parsing the output reproduces the exact
    /// statistics.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        write_csv_row(&mut w, &REPORT_HEADER)?;
        for row in &self.sets {
            write_csv_row(
                &mut w,
                &[
                    "set",
                    &row.label,
                    &row.n.to_string(),
                    &row.mean_rmse.to_string(),
                    &row.std_rmse.to_string(),
                    "",
                    "",
                    "",
                    "",
                ],
            )?;
        }
        for row in &self.pairs {
            write_csv_row(
                &mut w,
                &[
                    "pair",
                    &row.label,
                    "",
                    "",
                    "",
                    &row.t.to_string(),
                    &row.dof.to_string(),
                    &row.alpha.to_string(),
                    &row.h.to_string(),
                ],
            )?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::CsvFormat(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::CsvFormat(e.to_string()))
    }

    /// Parses a report back from its own CSV. The header must match the
    /// emitted schema exactly; unknown columns or sections are rejected.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::CsvFormat(e.to_string()))?;
        if headers.iter().ne(REPORT_HEADER.iter().copied()) {
            return Err(Error::CsvFormat(format!(
                "unexpected report header: {headers:?}"
            )));
        }
        let mut sets = Vec::new();
        let mut pairs = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::CsvFormat(e.to_string()))?;
            let field = |i: usize| record.get(i).unwrap_or_default();
            match field(0) {
                "set" => sets.push(SetRow {
                    label: field(1).to_string(),
                    n: parse_csv_number(field(2))?,
                    mean_rmse: parse_csv_number(field(3))?,
                    std_rmse: parse_csv_number(field(4))?,
                }),
                "pair" => pairs.push(PairRow {
                    label: field(1).to_string(),
                    t: parse_csv_number(field(5))?,
                    dof: parse_csv_number(field(6))?,
                    alpha: parse_csv_number(field(7))?,
                    h: parse_csv_number(field(8))?,
                }),
                other => {
                    return Err(Error::CsvFormat(format!(
                        "unknown report section {other:?}"
                    )))
                }
            }
        }
        Ok(ComparisonReport { sets, pairs })
    }
}

fn write_csv_row<W: std::io::Write>(w: &mut csv::Writer<W>, fields: &[&str]) -> Result<()> {
    w.write_record(fields)
        .map_err(|e| Error::CsvFormat(e.to_string()))
}

fn parse_csv_number<T: std::str::FromStr>(field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .parse()
        .map_err(|e| Error::CsvFormat(format!("bad numeric field {field:?}: {e}")))
}
