//! `Σλ = ∫K(x, x) dM` and `Σλ² = ∬K² dM dM`, in closed form where known.

use std::f64::consts::PI;

use super::{TraceEstimates, TraceMethod};
use crate::error::{Error, Result};
use crate::kernel::{gaussian, BaselineMeasure, CenteredKernel, Kernel, KernelSpec};

#[derive(Debug, Clone, Copy)]
pub enum TraceTarget<'a> {
    Plain(&'a KernelSpec),
    Centered(&'a CenteredKernel),
}

impl<'a> From<&'a KernelSpec> for TraceTarget<'a> {
    fn from(k: &'a KernelSpec) -> Self {
        TraceTarget::Plain(k)
    }
}

impl<'a> From<&'a CenteredKernel> for TraceTarget<'a> {
    fn from(k: &'a CenteredKernel) -> Self {
        TraceTarget::Centered(k)
    }
}

impl TraceTarget<'_> {
    fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            TraceTarget::Plain(k) => k.eval(x, y),
            TraceTarget::Centered(k) => k.eval(x, y),
        }
    }
}

fn is_period_uniform(k: &crate::kernel::PoissonKernel, m: &BaselineMeasure) -> bool {
    match m {
        BaselineMeasure::UniformCircle => k.is_canonical(),
        BaselineMeasure::UniformInterval { lo, hi } => k.interval() == (*lo, *hi),
        _ => false,
    }
}

fn is_uniform01(m: &BaselineMeasure) -> bool {
    matches!(m, BaselineMeasure::UniformInterval { lo, hi } if *lo == 0.0 && *hi == 1.0)
}

fn charged_points(m: &BaselineMeasure) -> Option<usize> {
    match m {
        BaselineMeasure::Discrete(p) => Some(p.probs().iter().filter(|&&w| w > 0.0).count()),
        _ => None,
    }
}

fn plain_trace(k: &KernelSpec, m: &BaselineMeasure) -> Option<f64> {
    match k {
        KernelSpec::Normal { h2 } => Some(1.0 / (2.0 * PI * h2).sqrt()),
        KernelSpec::Poisson(p) if is_period_uniform(p, m) => Some((1.0 + p.rho()) / (1.0 - p.rho())),
        KernelSpec::Cvm if is_uniform01(m) => Some(0.5),
        KernelSpec::Pearson(g) if matches!(m, BaselineMeasure::Discrete(q) if q == g) => charged_points(m).map(|c| c as f64),
        KernelSpec::Identity if matches!(m, BaselineMeasure::Discrete(_)) => Some(1.0),
        _ => None,
    }
}

fn plain_trace_sq(k: &KernelSpec, m: &BaselineMeasure) -> Option<f64> {
    match k {
        KernelSpec::Normal { h2 } => {
            let comps = m.gaussian_components()?;
            let mut acc = 0.0;
            for a in &comps {
                for b in &comps {
                    acc += a.weight * b.weight * gaussian(a.mean - b.mean, h2 / 2.0 + a.var + b.var);
                }
            }
            Some(acc / (2.0 * (PI * h2).sqrt()))
        }
        KernelSpec::Poisson(p) if is_period_uniform(p, m) => {
            let r2 = p.rho() * p.rho();
            Some((1.0 + r2) / (1.0 - r2))
        }
        KernelSpec::Cvm if is_uniform01(m) => Some(1.0 / 6.0),
        KernelSpec::Pearson(g) if matches!(m, BaselineMeasure::Discrete(q) if q == g) => charged_points(m).map(|c| c as f64),
        KernelSpec::Identity => match m {
            BaselineMeasure::Discrete(p) => Some(p.probs().iter().map(|w| w * w).sum()),
            _ => None,
        },
        _ => None,
    }
}

/// `∫ K(x, G)² dG(x)` for a normal kernel under a Gaussian mixture.
fn normal_one_point_sq(h2: f64, g: &BaselineMeasure) -> Option<f64> {
    let comps = g.gaussian_components()?;
    let mut acc = 0.0;
    for k in &comps {
        for l in &comps {
            let (sk, sl) = (h2 + k.var, h2 + l.var);
            let overlap = gaussian(k.mean - l.mean, sk + sl);
            let v = sk * sl / (sk + sl);
            let mid = (k.mean * sl + l.mean * sk) / (sk + sl);
            for j in &comps {
                acc += k.weight * l.weight * j.weight * overlap * gaussian(mid - j.mean, v + j.var);
            }
        }
    }
    Some(acc)
}

fn centered_trace(c: &CenteredKernel, m: &BaselineMeasure) -> Option<f64> {
    if m != c.center() || !c.is_closed_form() {
        return None;
    }
    plain_trace(c.base(), m).map(|t| t - c.k_gg())
}

fn centered_trace_sq(c: &CenteredKernel, m: &BaselineMeasure) -> Option<f64> {
    if m != c.center() || !c.is_closed_form() {
        return None;
    }
    match c.base() {
        KernelSpec::Poisson(p) if is_period_uniform(p, m) => {
            let r = p.rho();
            Some(2.0 * r * r / (1.0 - r * r))
        }
        KernelSpec::Cvm if is_uniform01(m) => Some(1.0 / 90.0),
        KernelSpec::Pearson(_) => charged_points(m).map(|c| c as f64 - 1.0),
        KernelSpec::Normal { h2 } => {
            let t2 = plain_trace_sq(c.base(), m)?;
            let one = normal_one_point_sq(*h2, m)?;
            Some(t2 - 2.0 * one + c.k_gg() * c.k_gg())
        }
        _ => None,
    }
}

fn closed_trace(t: TraceTarget<'_>, m: &BaselineMeasure) -> Option<f64> {
    match t {
        TraceTarget::Plain(k) => plain_trace(k, m),
        TraceTarget::Centered(c) => centered_trace(c, m),
    }
}

fn closed_trace_sq(t: TraceTarget<'_>, m: &BaselineMeasure) -> Option<f64> {
    match t {
        TraceTarget::Plain(k) => plain_trace_sq(k, m),
        TraceTarget::Centered(c) => centered_trace_sq(c, m),
    }
}

fn numeric_trace(t: TraceTarget<'_>, m: &BaselineMeasure) -> Result<f64> {
    let v = m.integrate(|x| {
        let d = t.eval(x, x)?;
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::DivergentTrace)
        }
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::DivergentTrace)
    }
}

fn numeric_trace_sq(t: TraceTarget<'_>, m: &BaselineMeasure) -> Result<f64> {
    let v = match t {
        TraceTarget::Centered(c) if m == c.center() && !c.is_closed_form() => {
            // Expand the square so that K(x, G) is integrated once per node.
            let plain = numeric_trace_sq(TraceTarget::Plain(c.base()), m)?;
            let one = m.integrate(|x| Ok(c.k_xg(x)?.powi(2)))?;
            plain - 2.0 * one + c.k_gg() * c.k_gg()
        }
        _ => m.integrate(|x| m.integrate(|y| Ok(t.eval(x, y)?.powi(2))))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Integration("squared kernel integral is not finite".into()))
    }
}

/// `Σλ_j = ∫K(x, x) dM(x)`. Fails with [`Error::DivergentTrace`] when the
/// diagonal is not integrable.
pub fn trace_analytic<'a>(k: impl Into<TraceTarget<'a>>, m: &BaselineMeasure) -> Result<f64> {
    let t = k.into();
    match closed_trace(t, m) {
        Some(v) => Ok(v),
        None => numeric_trace(t, m),
    }
}

/// `Σλ_j² = ∬K(x, y)² dM(x) dM(y)`.
pub fn trace_sq_analytic<'a>(k: impl Into<TraceTarget<'a>>, m: &BaselineMeasure) -> Result<f64> {
    let t = k.into();
    match closed_trace_sq(t, m) {
        Some(v) => Ok(v),
        None => numeric_trace_sq(t, m),
    }
}

/// Both traces, tagged analytic only when neither needed quadrature.
pub fn traces<'a>(k: impl Into<TraceTarget<'a>>, m: &BaselineMeasure) -> Result<TraceEstimates> {
    let t = k.into();
    let (ct, cs) = (closed_trace(t, m), closed_trace_sq(t, m));
    let method = if ct.is_some() && cs.is_some() { TraceMethod::Analytic } else { TraceMethod::Quadrature };
    let trace = match ct {
        Some(v) => v,
        None => numeric_trace(t, m)?,
    };
    let trace_sq = match cs {
        Some(v) => v,
        None => numeric_trace_sq(t, m)?,
    };
    if !(trace_sq > 0.0) {
        return Err(Error::DegenerateLimit("the kernel has zero squared trace under the measure".into()));
    }
    Ok(TraceEstimates { trace, trace_sq, method })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{center_kernel, Pmf};

    #[test]
    fn cvm_centered_constants() {
        let c = center_kernel(&KernelSpec::Cvm, &BaselineMeasure::uniform01()).unwrap();
        let t = traces(&c, &BaselineMeasure::uniform01()).unwrap();
        assert_eq!(t.method, TraceMethod::Analytic);
        assert!((t.trace - 1.0 / 6.0).abs() < 1e-15);
        assert!((t.trace_sq - 1.0 / 90.0).abs() < 1e-15);
        assert!((t.dof() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_agree_with_quadrature() {
        let normal = BaselineMeasure::normal(0.4, 1.7).unwrap();
        let k = KernelSpec::normal(0.6).unwrap();
        let shifted = k.gauge_shift(|_| 0.0, 0.0);
        let c = center_kernel(&k, &normal).unwrap();
        let cn = center_kernel(&shifted, &normal).unwrap();
        assert!((trace_sq_analytic(&k, &normal).unwrap() - trace_sq_analytic(&shifted, &normal).unwrap()).abs() < 1e-8);
        assert!((trace_analytic(&c, &normal).unwrap() - trace_analytic(&cn, &normal).unwrap()).abs() < 1e-8);
        assert!((trace_sq_analytic(&c, &normal).unwrap() - trace_sq_analytic(&cn, &normal).unwrap()).abs() < 1e-8);

        let mix = BaselineMeasure::normal_mixture(vec![
            crate::kernel::NormalComponent { weight: 0.3, mean: -1.0, var: 0.5 },
            crate::kernel::NormalComponent { weight: 0.7, mean: 1.5, var: 1.2 },
        ])
        .unwrap();
        let c = center_kernel(&k, &mix).unwrap();
        let cn = center_kernel(&shifted, &mix).unwrap();
        assert!((trace_sq_analytic(&c, &mix).unwrap() - trace_sq_analytic(&cn, &mix).unwrap()).abs() < 1e-8);

        let circle = BaselineMeasure::UniformCircle;
        let p = KernelSpec::poisson(0.5).unwrap();
        let cp = center_kernel(&p, &circle).unwrap();
        assert!((trace_analytic(&cp, &circle).unwrap() - 2.0).abs() < 1e-15);
        assert!((trace_sq_analytic(&cp, &circle).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let ps = p.gauge_shift(|_| 0.0, 0.0);
        assert!((trace_sq_analytic(&ps, &circle).unwrap() - 5.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn pearson_traces_count_cells() {
        let pmf = Pmf::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = BaselineMeasure::Discrete(pmf.clone());
        let c = center_kernel(&KernelSpec::pearson(pmf), &g).unwrap();
        let t = traces(&c, &g).unwrap();
        assert!((t.trace - 3.0).abs() < 1e-12 && (t.trace_sq - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_diagonal_is_a_divergent_trace() {
        let probe: Vec<f64> = (0..5).map(f64::from).collect();
        let k = KernelSpec::custom("spike", |s, t| if s == t { f64::INFINITY } else { 0.0 }, &probe);
        // the CNND probe itself cannot judge an infinite diagonal
        if let Ok(k) = k {
            let err = trace_analytic(&k, &BaselineMeasure::uniform01()).unwrap_err();
            assert!(err.is_route_refusal());
        }
        let k = KernelSpec::normal(1.0).unwrap().gauge_shift(|x| if x > 0.5 { f64::INFINITY } else { 0.0 }, 0.0);
        assert!(trace_analytic(&k, &BaselineMeasure::uniform01()).unwrap_err().is_route_refusal());
    }
}
