//! Score centering: projecting a kernel orthogonally to the constants and
//! the likelihood scores of a fitted model.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::model::{extended_information, extended_score, ParametricModel};
use crate::distance::PairSums;
use crate::error::{Error, Result};
use crate::kernel::{gaussian, BaselineMeasure, CenteredKernel, Kernel, KernelSpec};
use crate::linalg::{spd_inverse, symmetric_eigenvalues};

/// Quadrature nodes for the projection integrals of non-closed-form pairings.
pub const PROJECTION_NODES: usize = 64;

#[derive(Debug, Clone)]
enum OnePoint {
    /// Normal kernel under the normal model, in closed form.
    Normal { h2: f64, mean: f64, var: f64 },
    /// `b(y) = Σ_k w_k u*(z_k) K(z_k, y)` over a fixed rule.
    Rule { nodes: Vec<f64>, weighted: Vec<DVector<f64>> },
}

/// `K_scen = (I - P*) K (I - P*)` where `P*` projects onto the span of
/// `u* = (1, uᵀ)ᵀ` in `L²(G_θ)`. Evaluated as
/// `K(x, y) - u*(x)ᵀJ*⁻¹b(y) - b(x)ᵀJ*⁻¹u*(y) + u*(x)ᵀJ*⁻¹AJ*⁻¹u*(y)`
/// with `b(y) = ∫u*(z)K(z, y)dG_θ(z)` and `A = ∫b u*ᵀ dG_θ`.
#[derive(Debug, Clone)]
pub struct ScoreCenteredKernel {
    base: KernelSpec,
    model: Arc<dyn ParametricModel>,
    theta: Vec<f64>,
    baseline: BaselineMeasure,
    jinv: DMatrix<f64>,
    middle: DMatrix<f64>,
    one_point: OnePoint,
}

pub fn score_center_kernel(k: &KernelSpec, model: Arc<dyn ParametricModel>, theta: &[f64]) -> Result<ScoreCenteredKernel> {
    ScoreCenteredKernel::new(k.clone(), model, theta.to_vec())
}

impl ScoreCenteredKernel {
    pub fn new(base: KernelSpec, model: Arc<dyn ParametricModel>, theta: Vec<f64>) -> Result<Self> {
        model.validate(&theta)?;
        let baseline = model.baseline(&theta)?;
        let jinv = spd_inverse(&extended_information(model.as_ref(), &theta)?)?;
        let one_point = match (&base, &baseline) {
            (KernelSpec::Normal { h2 }, BaselineMeasure::Normal { mean, var }) if model.is_normal() => {
                OnePoint::Normal { h2: *h2, mean: *mean, var: *var }
            }
            _ => {
                let rule = baseline.quadrature_rule(PROJECTION_NODES);
                let mut nodes = Vec::with_capacity(rule.len());
                let mut weighted = Vec::with_capacity(rule.len());
                for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
                    if w > 0.0 {
                        nodes.push(z);
                        weighted.push(DVector::from_vec(extended_score(model.as_ref(), z, &theta)?) * w);
                    }
                }
                OnePoint::Rule { nodes, weighted }
            }
        };
        let mut k = Self {
            base,
            model,
            theta,
            baseline,
            middle: DMatrix::zeros(jinv.nrows(), jinv.ncols()),
            jinv,
            one_point,
        };
        let a = k.cross_moment()?;
        k.middle = &k.jinv * a * &k.jinv;
        Ok(k)
    }

    pub fn base(&self) -> &KernelSpec {
        &self.base
    }

    pub fn model(&self) -> &Arc<dyn ParametricModel> {
        &self.model
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn baseline(&self) -> &BaselineMeasure {
        &self.baseline
    }

    fn u_star(&self, x: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(extended_score(self.model.as_ref(), x, &self.theta)?))
    }

    /// `b(y) = ∫ u*(z) K(z, y) dG_θ(z)`.
    pub fn one_point(&self, y: f64) -> Result<DVector<f64>> {
        match &self.one_point {
            OnePoint::Normal { h2, mean, var } => {
                let s2 = h2 + var;
                let d = y - mean;
                let g = gaussian(d, s2);
                Ok(DVector::from_vec(vec![g, g * d / s2, g * (d * d - s2) / (2.0 * s2 * s2)]))
            }
            OnePoint::Rule { nodes, weighted } => {
                let mut acc = DVector::zeros(self.jinv.nrows());
                for (&z, w) in nodes.iter().zip(weighted) {
                    acc += w * self.base.eval(z, y)?;
                }
                Ok(acc)
            }
        }
    }

    /// `A = ∫ b(y) u*(y)ᵀ dG_θ(y)`.
    fn cross_moment(&self) -> Result<DMatrix<f64>> {
        match &self.one_point {
            OnePoint::Normal { h2, var, .. } => {
                let (s2, v) = (h2 + var, *var);
                let c = gaussian(0.0, s2 + v);
                let tau2 = s2 * v / (s2 + v);
                let mut a = DMatrix::zeros(3, 3);
                a[(0, 0)] = c;
                a[(0, 2)] = -c / (2.0 * (s2 + v));
                a[(2, 0)] = a[(0, 2)];
                a[(1, 1)] = c * tau2 / (s2 * v);
                a[(2, 2)] = c * (3.0 * tau2 * tau2 - (s2 + v) * tau2 + s2 * v) / (4.0 * s2 * s2 * v * v);
                Ok(a)
            }
            OnePoint::Rule { nodes, weighted } => {
                let p1 = self.jinv.nrows();
                let mut a = DMatrix::zeros(p1, p1);
                for (&z, w) in nodes.iter().zip(weighted) {
                    a += self.one_point(z)? * w.transpose();
                }
                // symmetric in exact arithmetic
                Ok((&a + a.transpose()) * 0.5)
            }
        }
    }

    fn combine(&self, k: f64, ux: &DVector<f64>, bx: &DVector<f64>, uy: &DVector<f64>, by: &DVector<f64>) -> f64 {
        let ju_y = &self.jinv * uy;
        let ju_x = &self.jinv * ux;
        k - ju_x.dot(by) - bx.dot(&ju_y) + ux.dot(&(&self.middle * uy))
    }

    /// Sums of `K_scen` over all ordered sample pairs and over the diagonal,
    /// computed from sums of `K` and per-point projections in `O(n²)` kernel
    /// evaluations.
    pub fn pair_sums(&self, sample: &[f64]) -> Result<PairSums> {
        let plain = PairSums::compute(&self.base, sample)?;
        let n = sample.len();
        let p1 = self.jinv.nrows();
        let (mut ubar, mut bbar) = (DVector::zeros(p1), DVector::zeros(p1));
        let mut diag_corr = Vec::with_capacity(n);
        for &x in sample {
            let (u, b) = (self.u_star(x)?, self.one_point(x)?);
            diag_corr.push(-2.0 * (&self.jinv * &u).dot(&b) + u.dot(&(&self.middle * &u)));
            ubar += &u;
            bbar += &b;
        }
        let nf = n as f64;
        ubar /= nf;
        bbar /= nf;
        let total_corr = nf * nf * (-2.0 * (&self.jinv * &ubar).dot(&bbar) + ubar.dot(&(&self.middle * &ubar)));
        Ok(PairSums {
            n,
            total: plain.total + total_corr,
            diagonal: plain.diagonal + crate::numeric::pairwise_sum(&diag_corr),
        })
    }

    /// `∫ K_scen(x, y) u*_j(y) dG_θ(y)` for each `j`, by the baseline's own
    /// integration rule. Zero up to quadrature error.
    pub fn orthogonality_residuals(&self, x: f64) -> Result<Vec<f64>> {
        (0..self.jinv.nrows())
            .map(|j| self.baseline.integrate(|y| Ok(self.eval(x, y)? * self.u_star(y)?[j])))
            .collect()
    }

    /// The same kernel built from the G-centered kernel and the scores alone,
    /// `(I - P) K_cen (I - P)`, with every integral done by quadrature.
    pub fn scores_only_route(&self) -> Result<ScoreProjectedKernel> {
        ScoreProjectedKernel::new(self.base.clone(), Arc::clone(&self.model), self.theta.clone())
    }
}

impl Kernel for ScoreCenteredKernel {
    fn eval(&self, s: f64, t: f64) -> Result<f64> {
        let (us, ut) = (self.u_star(s)?, self.u_star(t)?);
        let (bs, bt) = (self.one_point(s)?, self.one_point(t)?);
        Ok(self.combine(self.base.eval(s, t)?, &us, &bs, &ut, &bt))
    }

    fn label(&self) -> String {
        format!("{} score-centered at {}", self.base.label(), self.model.name())
    }

    fn gram(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        let us = points.iter().map(|&x| self.u_star(x)).collect::<Result<Vec<_>>>()?;
        let bs = points.iter().map(|&x| self.one_point(x)).collect::<Result<Vec<_>>>()?;
        let mut m = self.base.gram(points)?;
        let n = points.len();
        for i in 0..n {
            for j in i..n {
                let v = self.combine(m[(i, j)], &us[i], &bs[i], &us[j], &bs[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }
}

/// `(I - P) K_cen (I - P)` with `P` the projection onto the scores only.
#[derive(Debug, Clone)]
pub struct ScoreProjectedKernel {
    centered: CenteredKernel,
    model: Arc<dyn ParametricModel>,
    theta: Vec<f64>,
    jinv: DMatrix<f64>,
    middle: DMatrix<f64>,
}

impl ScoreProjectedKernel {
    pub fn new(base: KernelSpec, model: Arc<dyn ParametricModel>, theta: Vec<f64>) -> Result<Self> {
        let baseline = model.baseline(&theta)?;
        let centered = CenteredKernel::new(base, baseline)?;
        let jinv = spd_inverse(&model.information(&theta)?)?;
        let p = jinv.nrows();
        let mut k = Self { centered, model, theta, middle: DMatrix::zeros(p, p), jinv };
        let g = k.centered.center().clone();
        let mut c = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in 0..p {
                c[(a, b)] = g.integrate(|y| Ok(k.one_point(y)?[a] * k.score(y)?[b]))?;
            }
        }
        let c = (&c + c.transpose()) * 0.5;
        k.middle = &k.jinv * c * &k.jinv;
        Ok(k)
    }

    fn score(&self, x: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.model.score(x, &self.theta)?))
    }

    /// `c(y) = ∫ u(z) K_cen(z, y) dG_θ(z)`.
    fn one_point(&self, y: f64) -> Result<DVector<f64>> {
        let p = self.jinv.nrows();
        let g = self.centered.center();
        let mut out = DVector::zeros(p);
        for a in 0..p {
            out[a] = g.integrate(|z| Ok(self.score(z)?[a] * self.centered.eval(z, y)?))?;
        }
        Ok(out)
    }
}

impl Kernel for ScoreProjectedKernel {
    fn eval(&self, s: f64, t: f64) -> Result<f64> {
        let (us, ut) = (self.score(s)?, self.score(t)?);
        let (cs, ct) = (self.one_point(s)?, self.one_point(t)?);
        Ok(self.centered.eval(s, t)? - (&self.jinv * &us).dot(&ct) - cs.dot(&(&self.jinv * &ut))
            + us.dot(&(&self.middle * &ut)))
    }

    fn label(&self) -> String {
        format!("{} projected off the {} scores", self.centered.label(), self.model.name())
    }
}

/// Eigenvalues of `k` compressed onto the span of the extended scores:
/// with `J* = LLᵀ` and `e = L⁻¹u*` orthonormal in `L²(G_θ)`, the spectrum of
/// `[∬ e_a(x) K(x, y) e_b(y) dG_θ dG_θ]`. Directions a kernel annihilates
/// show up as zeros.
pub fn score_subspace_eigenvalues<K: Kernel + ?Sized>(
    k: &K,
    model: &dyn ParametricModel,
    theta: &[f64],
) -> Result<Vec<f64>> {
    let g = model.baseline(theta)?;
    let rule = g.quadrature_rule(PROJECTION_NODES);
    let gram = k.gram(&rule.nodes)?;
    let p1 = model.dim() + 1;
    let scores = rule.nodes.iter().map(|&x| extended_score(model, x, theta)).collect::<Result<Vec<_>>>()?;
    let m = rule.len();
    let u = DMatrix::from_fn(m, p1, |i, a| scores[i][a] * rule.weights[i]);
    let r = u.transpose() * gram * &u;
    let chol = extended_information(model, theta)?.cholesky().ok_or(Error::SingularInformation)?;
    let linv = chol.l().try_inverse().ok_or(Error::SingularInformation)?;
    let q = &linv * r * linv.transpose();
    symmetric_eigenvalues((&q + q.transpose()) * 0.5)
}
