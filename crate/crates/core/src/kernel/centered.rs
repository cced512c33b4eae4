use nalgebra::DMatrix;

use super::{gaussian, BaselineMeasure, Kernel, KernelSpec};
use crate::error::Result;

#[derive(Debug, Clone)]
enum OnePoint {
    Constant(f64),
    /// `K(x, G) = Σ w N(x; m, v)` from the normal convolution identity.
    Gaussian(Vec<(f64, f64, f64)>),
    /// `(1 - x²) / 2` for the Cramér–von Mises kernel under uniform(0, 1).
    CvmUniform,
    Numeric,
}

/// The G-centered kernel `K(x, y) - K(x, G) - K(G, y) + K(G, G)`.
///
/// `K(x, G)` is closed-form for normal kernels under Gaussian (mixture)
/// baselines, Poisson kernels under the uniform law on their period, and the
/// Cramér–von Mises kernel under uniform(0, 1); otherwise it is integrated
/// numerically under the baseline.
#[derive(Debug, Clone)]
pub struct CenteredKernel {
    base: KernelSpec,
    center: BaselineMeasure,
    one_point: OnePoint,
    kgg: f64,
}

pub fn center_kernel(k: &KernelSpec, g: &BaselineMeasure) -> Result<CenteredKernel> {
    CenteredKernel::new(k.clone(), g.clone())
}

impl CenteredKernel {
    pub fn new(base: KernelSpec, center: BaselineMeasure) -> Result<Self> {
        let closed = match (&base, &center) {
            (KernelSpec::Normal { h2 }, g) if g.gaussian_components().is_some() => {
                let comps = g.gaussian_components().unwrap();
                let terms: Vec<(f64, f64, f64)> = comps.iter().map(|c| (c.weight, c.mean, h2 + c.var)).collect();
                let mut kgg = 0.0;
                for a in &comps {
                    for b in &comps {
                        kgg += a.weight * b.weight * gaussian(a.mean - b.mean, h2 + a.var + b.var);
                    }
                }
                Some((OnePoint::Gaussian(terms), kgg))
            }
            (KernelSpec::Poisson(p), BaselineMeasure::UniformCircle) if p.is_canonical() => {
                Some((OnePoint::Constant(1.0), 1.0))
            }
            (KernelSpec::Poisson(p), BaselineMeasure::UniformInterval { lo, hi })
                if p.interval() == (*lo, *hi) =>
            {
                Some((OnePoint::Constant(1.0), 1.0))
            }
            (KernelSpec::Cvm, BaselineMeasure::UniformInterval { lo, hi }) if *lo == 0.0 && *hi == 1.0 => {
                Some((OnePoint::CvmUniform, 1.0 / 3.0))
            }
            (KernelSpec::Pearson(g), BaselineMeasure::Discrete(m)) if g == m => Some((OnePoint::Constant(1.0), 1.0)),
            _ => None,
        };
        match closed {
            Some((one_point, kgg)) => Ok(Self { base, center, one_point, kgg }),
            None => {
                let mut k = Self { base, center, one_point: OnePoint::Numeric, kgg: 0.0 };
                k.kgg = k.center.integrate(|x| k.k_xg(x))?;
                Ok(k)
            }
        }
    }

    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn center(&self) -> &BaselineMeasure {
        &self.center
    }

    /// Whether `K(x, G)` has a closed form for this pairing.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self.one_point, OnePoint::Numeric)
    }

    /// `K(x, G) = ∫ K(x, y) dG(y)`.
    pub fn k_xg(&self, x: f64) -> Result<f64> {
        Ok(match &self.one_point {
            OnePoint::Constant(c) => *c,
            OnePoint::Gaussian(terms) => terms.iter().map(|(w, m, v)| w * gaussian(x - m, *v)).sum(),
            OnePoint::CvmUniform => 0.5 * (1.0 - x * x),
            OnePoint::Numeric => self.center.integrate(|y| self.base.eval(x, y))?,
        })
    }

    /// `K(G, G)`.
    pub fn k_gg(&self) -> f64 {
        self.kgg
    }
}

impl Kernel for CenteredKernel {
    fn eval(&self, s: f64, t: f64) -> Result<f64> {
        Ok(self.base.eval(s, t)? - self.k_xg(s)? - self.k_xg(t)? + self.kgg)
    }

    fn label(&self) -> String {
        format!("{} centered at {}", self.base.label(), self.center.label())
    }

    fn gram(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        let one = points.iter().map(|&x| self.k_xg(x)).collect::<Result<Vec<_>>>()?;
        let mut m = self.base.gram(points)?;
        let n = points.len();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += self.kgg - one[i] - one[j];
            }
        }
        Ok(m)
    }
}
