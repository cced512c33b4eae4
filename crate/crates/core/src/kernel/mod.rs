//! Kernels, baseline measures and the two centering transformations.
//!
//! Points are univariate (`f64`). Discrete sample spaces use the numeric
//! value of each category as its label.

mod centered;
pub mod grammar;
mod matrix;
mod measure;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{double_center, symmetric_eigenvalues};

pub use centered::{center_kernel, CenteredKernel};
pub use matrix::{build_empirical_matrix, empirical_center_matrix, EmpiricalKernelMatrix};
pub use measure::{BaselineMeasure, NormalComponent, Pmf};

/// Number of probe points used to spot-check user kernels for CNND.
pub const CNND_PROBE_POINTS: usize = 20;
const CNND_TOL: f64 = 1e-8;

/// A symmetric kernel `K(s, t)`.
pub trait Kernel: Send + Sync {
    fn eval(&self, s: f64, t: f64) -> Result<f64>;

    fn label(&self) -> String;

    /// The matrix `[K(pᵢ, pⱼ)]`. Rows are evaluated independently, so the
    /// result does not depend on how the work is scheduled.
    fn gram(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        let n = points.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| self.eval(points[i], points[j])).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                m[(i, i + off)] = v;
                m[(i + off, i)] = v;
            }
        }
        Ok(m)
    }
}

/// Density of `N(0, var)` at `x`.
pub fn gaussian(x: f64, var: f64) -> f64 {
    (-0.5 * x * x / var).exp() / (2.0 * PI * var).sqrt()
}

/// The Poisson kernel on a period `[lo, lo + span)`, canonically `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernel {
    rho: f64,
    lo: f64,
    span: f64,
}

impl PoissonKernel {
    pub fn new(rho: f64) -> Result<Self> {
        Self::on_interval(rho, 0.0, 2.0 * PI)
    }

    pub fn on_interval(rho: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::param(format!("poisson rho must lie in (0, 1), got {rho}")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param(format!("poisson interval [{lo}, {hi}) is empty")));
        }
        Ok(Self { rho, lo, span: hi - lo })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.lo + self.span)
    }

    pub fn is_canonical(&self) -> bool {
        self.lo == 0.0 && self.span == 2.0 * PI
    }

    /// Maps a point of the period interval to its angle in `[0, 2π)`.
    pub fn angle(&self, x: f64) -> Result<f64> {
        if !(x >= self.lo && x < self.lo + self.span) {
            return Err(Error::Domain { point: x, domain: "poisson period" });
        }
        Ok(2.0 * PI * (x - self.lo) / self.span)
    }

    /// `(1 - ρ²) / (1 - 2ρ cos(θ - φ) + ρ²)` for angles θ, φ.
    pub fn eval_angles(&self, theta: f64, phi: f64) -> f64 {
        let r = self.rho;
        (1.0 - r * r) / (1.0 - 2.0 * r * (theta - phi).cos() + r * r)
    }

    /// The defining eigen-series truncated after `terms` harmonics.
    pub fn series(&self, theta: f64, phi: f64, terms: usize) -> f64 {
        let mut acc = 1.0;
        let mut rk = 1.0;
        for k in 1..=terms {
            rk *= self.rho;
            let kf = k as f64;
            acc += 2.0 * rk * ((kf * theta).cos() * (kf * phi).cos() + (kf * theta).sin() * (kf * phi).sin());
        }
        acc
    }
}

/// `K*(x, y) = K(x, y) + a(x) + a(y) + b`.
#[derive(Clone)]
pub struct GaugeShift {
    pub a: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub b: f64,
}

#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

#[derive(Clone)]
pub enum KernelSpec {
    /// Gaussian density kernel with variance `h2`.
    Normal { h2: f64 },
    Poisson(PoissonKernel),
    /// `1 - max(u, v)` on `[0, 1]`.
    Cvm,
    /// `I[s = t] / √(g(s) g(t))` for a discrete pmf `g`.
    Pearson(Pmf),
    /// `I[s = t]` on a discrete space.
    Identity,
    /// A gauge-shifted kernel. Shifts leave every quadratic distance
    /// unchanged but need not be CNND, so no CNND check applies.
    Shifted { base: Box<KernelSpec>, shift: GaugeShift },
    Custom(CustomKernel),
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl KernelSpec {
    pub fn normal(h2: f64) -> Result<Self> {
        if !(h2 > 0.0 && h2.is_finite()) {
            return Err(Error::param(format!("normal kernel variance must be positive, got {h2}")));
        }
        Ok(KernelSpec::Normal { h2 })
    }

    pub fn poisson(rho: f64) -> Result<Self> {
        Ok(KernelSpec::Poisson(PoissonKernel::new(rho)?))
    }

    /// Poisson kernel rescaled to the period `[lo, hi)`.
    pub fn poisson_on(rho: f64, lo: f64, hi: f64) -> Result<Self> {
        Ok(KernelSpec::Poisson(PoissonKernel::on_interval(rho, lo, hi)?))
    }

    pub fn pearson(pmf: Pmf) -> Self {
        KernelSpec::Pearson(pmf)
    }

    /// `K(x, y) + a(x) + a(y) + b`.
    pub fn gauge_shift(&self, a: impl Fn(f64) -> f64 + Send + Sync + 'static, b: f64) -> Self {
        KernelSpec::Shifted {
            base: Box::new(self.clone()),
            shift: GaugeShift { a: Arc::new(a), b },
        }
    }

    /// A user kernel. It is spot-checked once for conditional nonnegative
    /// definiteness on the probe points (a necessary condition only).
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        probe: &[f64],
    ) -> Result<Self> {
        if probe.len() < 2 {
            return Err(Error::param("custom kernel needs at least two probe points"));
        }
        let k = KernelSpec::Custom(CustomKernel { name: name.into(), f: Arc::new(f) });
        let min_eig = cnnd_min_eigenvalue(&k, probe)?;
        let scale = k.gram(probe)?.norm().max(1.0);
        if min_eig < -CNND_TOL * scale {
            return Err(Error::param(format!(
                "custom kernel is not conditionally nonnegative definite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(k)
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain { point: x, domain: "finite real" });
        }
        match self {
            KernelSpec::Cvm if !(0.0..=1.0).contains(&x) => Err(Error::Domain { point: x, domain: "[0, 1]" }),
            _ => Ok(()),
        }
    }
}

impl Kernel for KernelSpec {
    fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.check_point(s)?;
        self.check_point(t)?;
        Ok(match self {
            KernelSpec::Normal { h2 } => gaussian(s - t, *h2),
            KernelSpec::Poisson(p) => p.eval_angles(p.angle(s)?, p.angle(t)?),
            KernelSpec::Cvm => 1.0 - s.max(t),
            KernelSpec::Pearson(g) => {
                let (gs, gt) = (g.mass(s), g.mass(t));
                if gs <= 0.0 {
                    return Err(Error::UndefinedKernel(s));
                }
                if gt <= 0.0 {
                    return Err(Error::UndefinedKernel(t));
                }
                if s == t {
                    1.0 / gs
                } else {
                    0.0
                }
            }
            KernelSpec::Identity => f64::from(u8::from(s == t)),
            KernelSpec::Shifted { base, shift } => base.eval(s, t)? + (shift.a)(s) + (shift.a)(t) + shift.b,
            KernelSpec::Custom(c) => (c.f)(s, t),
        })
    }

    fn label(&self) -> String {
        match self {
            KernelSpec::Normal { h2 } => format!("normal:h2={h2}"),
            KernelSpec::Poisson(p) if p.is_canonical() => format!("poisson:rho={}", p.rho),
            KernelSpec::Poisson(p) => {
                let (lo, hi) = p.interval();
                format!("poisson:rho={},lo={lo},hi={hi}", p.rho)
            }
            KernelSpec::Cvm => "cvm".into(),
            KernelSpec::Pearson(_) => "pearson".into(),
            KernelSpec::Identity => "identity".into(),
            KernelSpec::Shifted { base, .. } => format!("shifted({})", base.label()),
            KernelSpec::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

/// `K_{h1²} * K_{h2²} = K_{h1² + h2²}` for normal kernels.
pub fn convolve_normal(h1_sq: f64, h2_sq: f64) -> Result<KernelSpec> {
    if !(h1_sq > 0.0 && h2_sq > 0.0) {
        return Err(Error::param(format!(
            "convolution needs positive variances, got {h1_sq} and {h2_sq}"
        )));
    }
    KernelSpec::normal(h1_sq + h2_sq)
}

/// The square-root kernel `K^{1/2}` with `∫ K^{1/2}(s, r) K^{1/2}(r, t) dr = K(s, t)`.
/// Only the normal family has a closed form: `K_{h²/2}`.
pub fn sqrt_kernel(k: &KernelSpec) -> Result<KernelSpec> {
    match k {
        KernelSpec::Normal { h2 } => KernelSpec::normal(h2 / 2.0),
        other => Err(Error::Unsupported(format!("no closed-form square root for {}", other.label()))),
    }
}

/// Smallest eigenvalue of the doubly-centered Gram matrix on `points`;
/// nonnegative (up to rounding) for CNND kernels.
pub fn cnnd_min_eigenvalue(k: &dyn Kernel, points: &[f64]) -> Result<f64> {
    let gram = double_center(&k.gram(points)?);
    let eig = symmetric_eigenvalues(gram)?;
    Ok(eig.last().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_closed_form_values() {
        let k = KernelSpec::poisson(0.5).unwrap();
        assert!((k.eval(1.0, 1.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((k.eval(0.0, PI).unwrap() - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_series_oracle_agrees_with_closed_form() {
        let p = PoissonKernel::new(0.5).unwrap();
        for &(a, b) in &[(1.0, 1.0), (0.0, PI), (0.3, 5.9), (2.2, 4.1)] {
            assert!((p.series(a, b, 60) - p.eval_angles(a, b)).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_rejects_points_off_the_circle_and_bad_rho() {
        let k = KernelSpec::poisson(0.5).unwrap();
        assert!(matches!(k.eval(-0.1, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(k.eval(2.0 * PI, 1.0), Err(Error::Domain { .. })));
        assert!(KernelSpec::poisson(1.0).is_err());
        assert!(KernelSpec::poisson(0.0).is_err());
    }

    #[test]
    fn rescaled_poisson_maps_interval_onto_circle() {
        let k = KernelSpec::poisson_on(0.5, 0.0, 1.0).unwrap();
        let c = KernelSpec::poisson(0.5).unwrap();
        let v = k.eval(0.25, 0.75).unwrap();
        assert!((v - c.eval(PI / 2.0, 3.0 * PI / 2.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn identity_is_an_indicator() {
        let k = KernelSpec::Identity;
        assert_eq!(k.eval(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(k.eval(2.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn pearson_undefined_off_support() {
        let g = Pmf::new(vec![0.0, 1.0], vec![0.25, 0.75]).unwrap();
        let k = KernelSpec::pearson(g);
        assert!((k.eval(0.0, 0.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(k.eval(0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(k.eval(2.0, 2.0), Err(Error::UndefinedKernel(_))));
    }

    #[test]
    fn normal_kernel_peak_value() {
        let k = KernelSpec::normal(1.0).unwrap();
        assert!((k.eval(0.0, 0.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!(KernelSpec::normal(0.0).is_err());
    }

    #[test]
    fn convolution_and_square_root() {
        match convolve_normal(1.0, 1.0).unwrap() {
            KernelSpec::Normal { h2 } => assert_eq!(h2, 2.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(convolve_normal(1.0, 0.0).is_err());
        match sqrt_kernel(&KernelSpec::normal(2.0).unwrap()).unwrap() {
            KernelSpec::Normal { h2 } => assert_eq!(h2, 1.0),
            other => panic!("unexpected {other:?}"),
        }
        match sqrt_kernel(&KernelSpec::normal(1.0).unwrap()).unwrap() {
            KernelSpec::Normal { h2 } => assert_eq!(h2, 0.5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(sqrt_kernel(&KernelSpec::Cvm), Err(Error::Unsupported(_))));
    }

    #[test]
    fn cvm_domain() {
        assert!(KernelSpec::Cvm.eval(1.5, 0.2).is_err());
        assert_eq!(KernelSpec::Cvm.eval(0.2, 0.7).unwrap(), 0.30000000000000004);
    }

    #[test]
    fn custom_kernel_spot_check() {
        let probe: Vec<f64> = (0..CNND_PROBE_POINTS).map(|i| i as f64 / 4.0).collect();
        assert!(KernelSpec::custom("laplace", |s, t| (-(s - t).abs()).exp(), &probe).is_ok());
        // -(s - t)² is CNND (a negative squared distance)
        assert!(KernelSpec::custom("negsq", |s, t| -(s - t) * (s - t), &probe).is_ok());
        assert!(KernelSpec::custom("sqdist", |s, t| (s - t) * (s - t), &probe).is_err());
    }

    #[test]
    fn shifted_kernel_skips_cnnd() {
        let base = KernelSpec::normal(1.0).unwrap();
        let k = base.gauge_shift(|x| 3.0 * x * x, -2.0);
        let v = k.eval(0.5, 1.0).unwrap();
        let expect = base.eval(0.5, 1.0).unwrap() + 0.75 + 3.0 - 2.0;
        assert!((v - expect).abs() < 1e-15);
        let same = base.gauge_shift(|_| 0.0, 0.0);
        assert_eq!(same.eval(0.1, 0.4).unwrap(), base.eval(0.1, 0.4).unwrap());
    }
}
