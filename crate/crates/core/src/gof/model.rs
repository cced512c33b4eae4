//! Parametric null models with closed-form maximum likelihood fits.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{BaselineMeasure, Pmf};
use crate::linalg::spd_inverse;

/// Relative size below which a fitted variance or cell mass is treated as zero.
const DEGENERATE: f64 = 1e-12;

/// A parametric family `G_θ` with likelihood scores and information.
pub trait ParametricModel: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Number of free parameters `p`.
    fn dim(&self) -> usize;

    fn validate(&self, theta: &[f64]) -> Result<()>;

    /// The maximum likelihood estimate.
    fn fit(&self, sample: &[f64]) -> Result<Vec<f64>>;

    fn baseline(&self, theta: &[f64]) -> Result<BaselineMeasure>;

    fn density(&self, x: f64, theta: &[f64]) -> Result<f64>;

    /// `u(x; θ) = ∇_θ log g_θ(x)`.
    fn score(&self, x: f64, theta: &[f64]) -> Result<Vec<f64>>;

    /// `J_θ = E_θ[u uᵀ]`; numeric unless overridden.
    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.baseline(theta)?;
        let p = self.dim();
        let mut j = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                let v = g.integrate(|x| {
                    let u = self.score(x, theta)?;
                    Ok(u[a] * u[b])
                })?;
                j[(a, b)] = v;
                j[(b, a)] = v;
            }
        }
        Ok(j)
    }

    fn sample(&self, theta: &[f64], rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<f64>> {
        Ok(self.baseline(theta)?.sample(rng, n))
    }

    /// Whether the model lives on a finite set of points.
    fn is_discrete(&self) -> bool {
        false
    }

    /// Whether `θ = (μ, σ²)` of a normal law with the usual scores, which
    /// unlocks closed-form score centering of normal kernels.
    fn is_normal(&self) -> bool {
        false
    }
}

/// `u*(x) = (1, u(x)ᵀ)ᵀ`.
pub fn extended_score(model: &dyn ParametricModel, x: f64, theta: &[f64]) -> Result<Vec<f64>> {
    let mut u = Vec::with_capacity(model.dim() + 1);
    u.push(1.0);
    u.extend(model.score(x, theta)?);
    Ok(u)
}

/// `J* = blockdiag(1, J_θ)`.
pub fn extended_information(model: &dyn ParametricModel, theta: &[f64]) -> Result<DMatrix<f64>> {
    let p = model.dim();
    let j = model.information(theta)?;
    let mut out = DMatrix::zeros(p + 1, p + 1);
    out[(0, 0)] = 1.0;
    out.view_mut((1, 1), (p, p)).copy_from(&j);
    Ok(out)
}

/// `P*(x, y) = u*(x)ᵀ J*⁻¹ u*(y)`, the projection onto the constants and scores.
pub fn extended_projection(model: &dyn ParametricModel, theta: &[f64], x: f64, y: f64) -> Result<f64> {
    let jinv = spd_inverse(&extended_information(model, theta)?)?;
    let (ux, uy) = (extended_score(model, x, theta)?, extended_score(model, y, theta)?);
    let ux = nalgebra::DVector::from_vec(ux);
    let uy = nalgebra::DVector::from_vec(uy);
    Ok(ux.dot(&(jinv * uy)))
}

fn check_dim(theta: &[f64], p: usize, name: &str) -> Result<()> {
    if theta.len() != p {
        return Err(Error::Dimension(format!("{name} model has {p} parameters, got {}", theta.len())));
    }
    Ok(())
}

fn check_sample(sample: &[f64], need: usize) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if sample.len() < need {
        return Err(Error::SampleTooSmall { need, got: sample.len() });
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("sample contains non-finite values"));
    }
    Ok(())
}

/// `N(μ, σ²)` with `θ = (μ, σ²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalModel;

impl ParametricModel for NormalModel {
    fn name(&self) -> String {
        "normal".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn validate(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 2, "normal")?;
        if !(theta[0].is_finite() && theta[1] > 0.0 && theta[1].is_finite()) {
            return Err(Error::param(format!("invalid normal parameters {theta:?}")));
        }
        Ok(())
    }

    fn fit(&self, sample: &[f64]) -> Result<Vec<f64>> {
        check_sample(sample, 2)?;
        let n = sample.len() as f64;
        let mean = crate::numeric::mean(sample);
        let dev: Vec<f64> = sample.iter().map(|x| (x - mean).powi(2)).collect();
        let var = crate::numeric::pairwise_sum(&dev) / n;
        if !(var > DEGENERATE * (1.0 + mean * mean)) {
            return Err(Error::SingularFit(format!("sample variance is {var}")));
        }
        Ok(vec![mean, var])
    }

    fn baseline(&self, theta: &[f64]) -> Result<BaselineMeasure> {
        self.validate(theta)?;
        BaselineMeasure::normal(theta[0], theta[1])
    }

    fn density(&self, x: f64, theta: &[f64]) -> Result<f64> {
        self.validate(theta)?;
        Ok((-(x - theta[0]).powi(2) / (2.0 * theta[1])).exp() / (2.0 * PI * theta[1]).sqrt())
    }

    fn score(&self, x: f64, theta: &[f64]) -> Result<Vec<f64>> {
        self.validate(theta)?;
        let (d, v) = (x - theta[0], theta[1]);
        Ok(vec![d / v, (d * d - v) / (2.0 * v * v)])
    }

    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.validate(theta)?;
        let v = theta[1];
        Ok(DMatrix::from_row_slice(2, 2, &[1.0 / v, 0.0, 0.0, 1.0 / (2.0 * v * v)]))
    }

    fn is_normal(&self) -> bool {
        true
    }
}

/// Exponential law with `θ = (rate)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExponentialModel;

impl ParametricModel for ExponentialModel {
    fn name(&self) -> String {
        "exponential".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn validate(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, 1, "exponential")?;
        if !(theta[0] > 0.0 && theta[0].is_finite()) {
            return Err(Error::param(format!("invalid exponential rate {}", theta[0])));
        }
        Ok(())
    }

    fn fit(&self, sample: &[f64]) -> Result<Vec<f64>> {
        check_sample(sample, 1)?;
        if let Some(&x) = sample.iter().find(|&&x| x < 0.0) {
            return Err(Error::Domain { point: x, domain: "[0, ∞)" });
        }
        let mean = crate::numeric::mean(sample);
        if !(mean > 0.0) {
            return Err(Error::SingularFit("all observations are zero".into()));
        }
        Ok(vec![1.0 / mean])
    }

    fn baseline(&self, theta: &[f64]) -> Result<BaselineMeasure> {
        self.validate(theta)?;
        BaselineMeasure::exponential(theta[0])
    }

    fn density(&self, x: f64, theta: &[f64]) -> Result<f64> {
        self.validate(theta)?;
        Ok(if x < 0.0 { 0.0 } else { theta[0] * (-theta[0] * x).exp() })
    }

    fn score(&self, x: f64, theta: &[f64]) -> Result<Vec<f64>> {
        self.validate(theta)?;
        if x < 0.0 {
            return Err(Error::Domain { point: x, domain: "[0, ∞)" });
        }
        Ok(vec![1.0 / theta[0] - x])
    }

    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.validate(theta)?;
        Ok(DMatrix::from_element(1, 1, 1.0 / (theta[0] * theta[0])))
    }
}

/// Multinomial (categorical) law on `k` labelled cells, `θ = (π₁, …, π_{k-1})`.
#[derive(Debug, Clone)]
pub struct Multinomial {
    cells: Vec<f64>,
}

fn cell_probs(theta: &[f64]) -> Vec<f64> {
    let mut p = theta.to_vec();
    p.push(1.0 - theta.iter().sum::<f64>());
    p
}

fn simplex_check(theta: &[f64], name: &str) -> Result<()> {
    let p = cell_probs(theta);
    if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::param(format!("{name} probabilities must be positive, got {p:?}")));
    }
    Ok(())
}

/// Multinomial score block: `I[i = a]/π_a - I[i = last]/π_last`.
fn simplex_score(index: usize, probs: &[f64]) -> Vec<f64> {
    let last = probs.len() - 1;
    (0..last)
        .map(|a| {
            let mut v = 0.0;
            if index == a {
                v += 1.0 / probs[a];
            }
            if index == last {
                v -= 1.0 / probs[last];
            }
            v
        })
        .collect()
}

/// `δ_ab/π_a + 1/π_last`.
fn simplex_information(probs: &[f64]) -> DMatrix<f64> {
    let last = probs.len() - 1;
    DMatrix::from_fn(last, last, |a, b| if a == b { 1.0 / probs[a] } else { 0.0 } + 1.0 / probs[last])
}

fn frequencies(indices: impl Iterator<Item = usize>, k: usize, n: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    for i in indices {
        counts[i] += 1;
    }
    counts.into_iter().map(|c| c as f64 / n as f64).collect()
}

impl Multinomial {
    pub fn new(mut cells: Vec<f64>) -> Result<Self> {
        cells.sort_by(f64::total_cmp);
        if cells.len() < 2 || cells.windows(2).any(|w| w[0] == w[1]) || cells.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("multinomial needs at least two distinct finite cell labels"));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    fn index(&self, x: f64) -> Result<usize> {
        self.cells
            .binary_search_by(|c| c.total_cmp(&x))
            .map_err(|_| Error::Domain { point: x, domain: "multinomial cells" })
    }
}

impl ParametricModel for Multinomial {
    fn name(&self) -> String {
        format!("multinomial({} cells)", self.cells.len())
    }

    fn dim(&self) -> usize {
        self.cells.len() - 1
    }

    fn validate(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, self.dim(), "multinomial")?;
        simplex_check(theta, "multinomial")
    }

    fn fit(&self, sample: &[f64]) -> Result<Vec<f64>> {
        check_sample(sample, 1)?;
        let idx = sample.iter().map(|&x| self.index(x)).collect::<Result<Vec<_>>>()?;
        let freq = frequencies(idx.into_iter(), self.cells.len(), sample.len());
        if let Some(i) = freq.iter().position(|&f| f == 0.0) {
            return Err(Error::SingularFit(format!("cell {} is empty", self.cells[i])));
        }
        Ok(freq[..self.dim()].to_vec())
    }

    fn baseline(&self, theta: &[f64]) -> Result<BaselineMeasure> {
        self.validate(theta)?;
        Ok(BaselineMeasure::Discrete(Pmf::from_weights(self.cells.clone(), cell_probs(theta))?))
    }

    fn density(&self, x: f64, theta: &[f64]) -> Result<f64> {
        self.validate(theta)?;
        Ok(self.index(x).map(|i| cell_probs(theta)[i]).unwrap_or(0.0))
    }

    fn score(&self, x: f64, theta: &[f64]) -> Result<Vec<f64>> {
        self.validate(theta)?;
        Ok(simplex_score(self.index(x)?, &cell_probs(theta)))
    }

    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.validate(theta)?;
        Ok(simplex_information(&cell_probs(theta)))
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

/// Independence of row and column in an `r × c` table. Cell `(i, j)` is
/// labelled `i·c + j`; `θ` holds the first `r-1` row and `c-1` column margins.
#[derive(Debug, Clone, Copy)]
pub struct Independence {
    rows: usize,
    cols: usize,
}

impl Independence {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::param(format!("independence needs at least a 2x2 table, got {rows}x{cols}")));
        }
        Ok(Self { rows, cols })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn cell(&self, row: usize, col: usize) -> f64 {
        (row * self.cols + col) as f64
    }

    /// One observation per count, labelled by cell.
    pub fn expand(&self, counts: &[Vec<usize>]) -> Result<Vec<f64>> {
        if counts.len() != self.rows || counts.iter().any(|r| r.len() != self.cols) {
            return Err(Error::Dimension(format!("table must be {}x{}", self.rows, self.cols)));
        }
        let mut out = Vec::new();
        for (i, row) in counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                out.extend(std::iter::repeat_n(self.cell(i, j), c));
            }
        }
        Ok(out)
    }

    fn split(&self, x: f64) -> Result<(usize, usize)> {
        let k = self.rows * self.cols;
        if !(x >= 0.0 && x.fract() == 0.0 && (x as usize) < k) {
            return Err(Error::Domain { point: x, domain: "contingency table cells" });
        }
        let i = x as usize;
        Ok((i / self.cols, i % self.cols))
    }

    fn margins<'a>(&self, theta: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        theta.split_at(self.rows - 1)
    }
}

impl ParametricModel for Independence {
    fn name(&self) -> String {
        format!("independence({}x{})", self.rows, self.cols)
    }

    fn dim(&self) -> usize {
        self.rows + self.cols - 2
    }

    fn validate(&self, theta: &[f64]) -> Result<()> {
        check_dim(theta, self.dim(), "independence")?;
        let (a, b) = self.margins(theta);
        simplex_check(a, "row")?;
        simplex_check(b, "column")
    }

    fn fit(&self, sample: &[f64]) -> Result<Vec<f64>> {
        check_sample(sample, 1)?;
        let cells = sample.iter().map(|&x| self.split(x)).collect::<Result<Vec<_>>>()?;
        let n = sample.len();
        let rows = frequencies(cells.iter().map(|c| c.0), self.rows, n);
        let cols = frequencies(cells.iter().map(|c| c.1), self.cols, n);
        if rows.iter().chain(&cols).any(|&f| f == 0.0) {
            return Err(Error::SingularFit("a row or column of the table is empty".into()));
        }
        let mut theta = rows[..self.rows - 1].to_vec();
        theta.extend_from_slice(&cols[..self.cols - 1]);
        Ok(theta)
    }

    fn baseline(&self, theta: &[f64]) -> Result<BaselineMeasure> {
        self.validate(theta)?;
        let (a, b) = self.margins(theta);
        let (pa, pb) = (cell_probs(a), cell_probs(b));
        let mut support = Vec::with_capacity(self.rows * self.cols);
        let mut probs = Vec::with_capacity(self.rows * self.cols);
        for (i, ra) in pa.iter().enumerate() {
            for (j, cb) in pb.iter().enumerate() {
                support.push(self.cell(i, j));
                probs.push(ra * cb);
            }
        }
        Ok(BaselineMeasure::Discrete(Pmf::from_weights(support, probs)?))
    }

    fn density(&self, x: f64, theta: &[f64]) -> Result<f64> {
        self.validate(theta)?;
        let (a, b) = self.margins(theta);
        Ok(match self.split(x) {
            Ok((i, j)) => cell_probs(a)[i] * cell_probs(b)[j],
            Err(_) => 0.0,
        })
    }

    fn score(&self, x: f64, theta: &[f64]) -> Result<Vec<f64>> {
        self.validate(theta)?;
        let (i, j) = self.split(x)?;
        let (a, b) = self.margins(theta);
        let mut u = simplex_score(i, &cell_probs(a));
        u.extend(simplex_score(j, &cell_probs(b)));
        Ok(u)
    }

    fn information(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.validate(theta)?;
        let (a, b) = self.margins(theta);
        let (ja, jb) = (simplex_information(&cell_probs(a)), simplex_information(&cell_probs(b)));
        let p = self.dim();
        let mut j = DMatrix::zeros(p, p);
        j.view_mut((0, 0), (self.rows - 1, self.rows - 1)).copy_from(&ja);
        j.view_mut((self.rows - 1, self.rows - 1), (self.cols - 1, self.cols - 1)).copy_from(&jb);
        Ok(j)
    }

    fn is_discrete(&self) -> bool {
        true
    }
}

/// Resolves a model name: `normal`, `exponential`, `multinomial:<labels…>`
/// (comma separated) or `independence:<rows>x<cols>`.
pub fn model_from_name(spec: &str) -> Result<Box<dyn ParametricModel>> {
    let (head, body) = spec.split_once(':').unwrap_or((spec, ""));
    match (head.trim(), body.trim()) {
        ("normal", "") => Ok(Box::new(NormalModel)),
        ("exponential", "") => Ok(Box::new(ExponentialModel)),
        ("multinomial", cells) if !cells.is_empty() => {
            let labels = cells
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|_| Error::param(format!("bad cell label `{c}`"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(Box::new(Multinomial::new(labels)?))
        }
        ("independence", shape) => {
            let (r, c) = shape
                .split_once('x')
                .and_then(|(r, c)| Some((r.trim().parse().ok()?, c.trim().parse().ok()?)))
                .ok_or_else(|| Error::param(format!("independence needs `<rows>x<cols>`, got `{shape}`")))?;
            Ok(Box::new(Independence::new(r, c)?))
        }
        _ => Err(Error::param(format!("unknown model `{spec}`"))),
    }
}
