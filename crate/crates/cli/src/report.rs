//! The JSON report written by every subcommand.

use serde::{Deserialize, Serialize};

use quadfit_core::gof::{BootstrapOutcome, GofTestResult};
use quadfit_core::spectral::{SpectrumMethod, TraceMethod};
use quadfit_core::{
    CumulantDiagnostics, DofReport, Estimator, HeuristicRange, MehlerParameters, SpectralDecomposition, TailEstimate,
};

pub const FORMAT: &str = "quadfit-report/1";
/// Eigenvalues shown unless the full spectrum is requested.
pub const SPECTRUM_HEAD: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub format: String,
    pub command: String,
    pub config: ConfigEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<StatisticSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<DofSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heuristic_range: Option<RangeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mehler: Option<MehlerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cumulants: Option<CumulantSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p_values: Vec<PValueEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pvalue: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centered: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    pub full_spectrum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticSection {
    pub estimator: String,
    /// `n V_n`, or `√(n(n-1)) U_n` for the U estimator.
    pub value: f64,
    pub v_stat: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_stat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DofSection {
    pub trace: f64,
    pub trace_sq: f64,
    pub scale: f64,
    pub dof: f64,
    pub method: TraceMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub method: SpectrumMethod,
    /// Number of eigenvalues computed; `eigenvalues` may hold fewer.
    pub len: usize,
    pub eigenvalues: Vec<f64>,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MehlerSection {
    pub w: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub printed_a: f64,
    pub printed_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CumulantSection {
    pub skewness_ratio: f64,
    /// `(r, Σγᵢʳ)`.
    pub normed: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PValueEntry {
    pub method: String,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    /// Monte Carlo draws or bootstrap replicates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded: Option<usize>,
}

impl Report {
    pub fn new(command: &str, config: ConfigEcho) -> Self {
        Self {
            format: FORMAT.into(),
            command: command.into(),
            config,
            n: None,
            statistic: None,
            dof: None,
            heuristic_range: None,
            spectrum: None,
            mehler: None,
            cumulants: None,
            p_values: Vec::new(),
            theta: None,
            notes: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self).map(|s| s + "\n")
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn with_test_result(mut self, r: &GofTestResult, full: bool) -> Self {
        self.n = Some(r.n);
        self.statistic = Some(StatisticSection {
            estimator: estimator_name(r.estimator).into(),
            value: r.statistic,
            v_stat: r.v_stat,
            u_stat: r.u_stat,
        });
        if r.trace.is_finite() && r.trace_sq.is_finite() {
            self.dof = Some(DofSection {
                trace: r.trace,
                trace_sq: r.trace_sq,
                scale: r.scale,
                dof: r.dof,
                method: r.trace_method,
            });
        }
        self.heuristic_range = Some(RangeSection::from(&r.heuristic_range));
        if !r.spectrum.is_empty() {
            self.spectrum = Some(SpectrumSection::from_values(r.spectrum_method, &r.spectrum, r.tail_bound, full));
        }
        let p = &r.p_values;
        if let Some(t) = &p.spectral {
            self.p_values.push(PValueEntry::tail("spectral", t));
        }
        if let Some(s) = p.satterthwaite {
            self.p_values.push(PValueEntry { method: "satterthwaite".into(), p: s, se: None, draws: None, discarded: None });
        }
        if let Some(b) = &p.bootstrap {
            self.p_values.push(PValueEntry::bootstrap(b));
        }
        self.theta = r.theta.clone();
        self.notes.extend(r.notes.iter().cloned());
        self
    }
}

pub fn estimator_name(e: Estimator) -> &'static str {
    match e {
        Estimator::UStat => "u",
        Estimator::VStat => "v",
        Estimator::Exact => "exact",
    }
}

impl From<&HeuristicRange> for RangeSection {
    fn from(h: &HeuristicRange) -> Self {
        Self { lower: h.lower, upper: h.upper, warning: h.warning.clone() }
    }
}

impl From<&DofReport> for DofSection {
    fn from(d: &DofReport) -> Self {
        let method = match d.source {
            quadfit_core::dof::DofSource::Analytic => TraceMethod::Analytic,
            quadfit_core::dof::DofSource::Quadrature => TraceMethod::Quadrature,
            quadfit_core::dof::DofSource::Empirical => TraceMethod::Empirical,
        };
        Self { trace: d.trace, trace_sq: d.trace_sq, scale: d.scale, dof: d.dof, method }
    }
}

impl From<&MehlerParameters> for MehlerSection {
    fn from(p: &MehlerParameters) -> Self {
        Self {
            w: p.w,
            a: p.a,
            b: p.b,
            alpha: p.alpha,
            beta: p.beta,
            printed_a: p.printed_a,
            printed_alpha: p.printed_alpha,
        }
    }
}

impl From<&CumulantDiagnostics> for CumulantSection {
    fn from(c: &CumulantDiagnostics) -> Self {
        Self { skewness_ratio: c.skewness_ratio, normed: c.normed_cumulants.clone() }
    }
}

impl SpectrumSection {
    pub fn from_values(method: SpectrumMethod, values: &[f64], tail_bound: f64, full: bool) -> Self {
        let shown = if full { values.len() } else { values.len().min(SPECTRUM_HEAD) };
        Self { method, len: values.len(), eigenvalues: values[..shown].to_vec(), tail_bound }
    }

    pub fn from_decomposition(s: &SpectralDecomposition, full: bool) -> Self {
        Self::from_values(s.method(), s.eigenvalues(), s.tail_bound(), full)
    }
}

impl PValueEntry {
    fn tail(method: &str, t: &TailEstimate) -> Self {
        Self { method: method.into(), p: t.p, se: Some(t.se), draws: Some(t.draws), discarded: None }
    }

    fn bootstrap(b: &BootstrapOutcome) -> Self {
        Self { method: "bootstrap".into(), p: b.p, se: Some(b.se), draws: Some(b.replicates), discarded: Some(b.discarded) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(
            "test",
            ConfigEcho { kernel: "cvm".into(), null: Some("uniform01".into()), seed: Some(3), ..ConfigEcho::default() },
        );
        r.n = Some(10);
        r.dof = Some(DofSection { trace: 1.0 / 6.0, trace_sq: 1.0 / 90.0, scale: 15.0, dof: 2.5, method: TraceMethod::Analytic });
        r.spectrum = Some(SpectrumSection::from_values(SpectrumMethod::Analytic, &[0.1, 0.01 / 3.0, 1e-300], 1e-17, false));
        r.p_values.push(PValueEntry { method: "satterthwaite".into(), p: 0.123456789012345, se: None, draws: None, discarded: None });
        r.wall_time_s = 0.25;
        r
    }

    #[test]
    fn round_trip_is_lossless() {
        let r = sample();
        let text = r.to_json().unwrap();
        assert_eq!(Report::from_json(&text).unwrap(), r);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&sample().to_json().unwrap()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<Report>(v.clone()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&sample().to_json().unwrap()).unwrap();
        v["dof"]["bogus"] = serde_json::json!(true);
        assert!(serde_json::from_value::<Report>(v).is_err());
    }

    #[test]
    fn spectrum_head_is_truncated() {
        let values: Vec<f64> = (0..50).map(|i| 1.0 / (i + 1) as f64).collect();
        let s = SpectrumSection::from_values(SpectrumMethod::Quadrature, &values, 0.0, false);
        assert_eq!((s.len, s.eigenvalues.len()), (50, SPECTRUM_HEAD));
        assert_eq!(SpectrumSection::from_values(SpectrumMethod::Quadrature, &values, 0.0, true).eigenvalues.len(), 50);
    }
}
