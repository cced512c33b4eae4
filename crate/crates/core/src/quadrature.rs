//! Quadrature rules: Gauss–Hermite, Gauss–Legendre, Gauss–Laguerre, the
//! periodic trapezoid rule, and adaptive Gauss–Kronrod on intervals.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const NEWTON_EPS: f64 = 1e-15;
const NEWTON_MAX: usize = 100;

/// A fixed rule `∫ f dμ ≈ Σ wᵢ f(xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn try_integrate(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }

    /// Physicists' Gauss–Hermite rule for the weight `exp(-x²)` on ℝ.
    pub fn gauss_hermite(n: usize) -> Self {
        assert!(n >= 1);
        // π^{-1/4}
        const PIM4: f64 = 0.751_125_544_464_942_5;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut z = 0.0_f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..NEWTON_MAX {
                let (mut p1, mut p2) = (PIM4, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= NEWTON_EPS * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[m - 1] = 0.0;
        }
        Self { nodes: x, weights: w }
    }

    /// Expectation rule for `N(mean, var)`: weights sum to one.
    pub fn normal(n: usize, mean: f64, var: f64) -> Self {
        let gh = Self::gauss_hermite(n);
        let scale = (2.0 * var).sqrt();
        Self {
            nodes: gh.nodes.iter().map(|t| mean + scale * t).collect(),
            weights: gh.weights.iter().map(|w| w / PI.sqrt()).collect(),
        }
    }

    /// Gauss–Legendre rule on `[lo, hi]`; weights sum to `hi - lo`.
    pub fn gauss_legendre(n: usize, lo: f64, hi: f64) -> Self {
        assert!(n >= 1);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..NEWTON_MAX {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= NEWTON_EPS {
                    break;
                }
            }
            x[i] = mid - half * z;
            x[n - 1 - i] = mid + half * z;
            w[i] = 2.0 * half / ((1.0 - z * z) * pp * pp);
            w[n - 1 - i] = w[i];
        }
        Self { nodes: x, weights: w }
    }

    /// Expectation rule for the uniform law on `[lo, hi]`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        let mut rule = Self::gauss_legendre(n, lo, hi);
        let len = hi - lo;
        rule.weights.iter_mut().for_each(|w| *w /= len);
        rule
    }

    /// Gauss–Laguerre rule for the weight `exp(-x)` on `[0, ∞)`.
    pub fn gauss_laguerre(n: usize) -> Self {
        assert!(n >= 1);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - x[i - 2])
                }
            };
            let (mut pp, mut p2) = (0.0, 0.0);
            for _ in 0..NEWTON_MAX {
                let mut p1 = 1.0;
                p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
                }
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= NEWTON_EPS * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            w[i] = -1.0 / (pp * nf * p2);
        }
        Self { nodes: x, weights: w }
    }

    /// Expectation rule for the exponential law with the given rate.
    pub fn exponential(n: usize, rate: f64) -> Self {
        let gl = Self::gauss_laguerre(n);
        Self { nodes: gl.nodes.iter().map(|t| t / rate).collect(), weights: gl.weights }
    }

    /// Trapezoid rule for the uniform law on `[0, 2π)`; spectrally accurate
    /// for smooth periodic integrands.
    pub fn circle(n: usize) -> Self {
        Self {
            nodes: (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect(),
            weights: vec![1.0 / n as f64; n],
        }
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 48;

fn gk15(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for j in 0..7 {
        let dx = half * GK_NODES[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += GK_WEIGHTS[j] * pair;
        if j % 2 == 1 {
            gauss += G7_WEIGHTS[j / 2] * pair;
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).abs()))
}

fn adapt(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (value, err) = gk15(f, a, b)?;
    if !value.is_finite() {
        return Err(Error::Integration(format!("non-finite integrand on [{a}, {b}]")));
    }
    if err <= tol.max(1e-15 * value.abs()) {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Integration(format!(
            "tolerance {tol:e} not reached on [{a}, {b}] (error estimate {err:e})"
        )));
    }
    let mid = 0.5 * (a + b);
    Ok(adapt(f, a, mid, 0.5 * tol, depth + 1)? + adapt(f, mid, b, 0.5 * tol, depth + 1)?)
}

/// Adaptive Gauss–Kronrod (7/15) integral of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn adaptive(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    adapt(&f, a, b, tol, 0)
}

/// Adaptive integral over `[a, ∞)` through `x = a + t / (1 - t)`.
pub fn adaptive_semi_infinite(f: impl Fn(f64) -> Result<f64>, a: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| -> Result<f64> {
        let s = 1.0 - t;
        let v = f(a + t / s)?;
        Ok(if v == 0.0 { 0.0 } else { v / (s * s) })
    };
    adapt(&g, 0.0, 1.0, tol, 0)
}
