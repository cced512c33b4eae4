//! Acceptance criteria. Each test prints one `PASS` or `FAIL` line.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use quadfit_core::chistar::ChiStarDistribution;
use quadfit_core::distance::{quadratic_distance, u_stat, v_stat, PairSums};
use quadfit_core::dof::{chi_star_cumulant, cumulant_ratio, CumulantDiagnostics, poisson_cumulant_ratio, poisson_dof, sdof};
use quadfit_core::gof::{
    score_subspace_eigenvalues, CompositeKernel, CompositeNullTest, Independence, NormalModel, ParametricModel,
    ScoreCenteredKernel, SimpleNullTest, TestOptions,
};
use quadfit_core::kernel::{center_kernel, gaussian, BaselineMeasure, CenteredKernel, Kernel, KernelSpec, PoissonKernel, Pmf};
use quadfit_core::numeric::stream_rng;
use quadfit_core::quadrature::QuadratureRule;
use quadfit_core::spectral::{
    mehler_root, nystrom_spectrum, poisson_pairs_for_ratio, poisson_spectrum, traces, MehlerParameters, MAX_TERMS,
    TRUNCATION_RATIO,
};

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!("{} [{id}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

/// Five-point Gauss–Legendre on `[a, b]`, exact for polynomials of degree 9.
fn legendre5(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 5] = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    X.iter().zip(W).map(|(&x, w)| w * f(m + r * x)).sum::<f64>() * r
}

#[test]
fn criterion_01_cvm_constants() {
    let u = BaselineMeasure::uniform01();
    let c = center_kernel(&KernelSpec::Cvm, &u).unwrap();
    let t = traces(&c, &u).unwrap();
    // oracle: the centered kernel is a polynomial on each side of the diagonal
    let k = |x: f64, y: f64| c.eval(x, y).unwrap();
    let tr = legendre5(|x| k(x, x), 0.0, 1.0);
    let tr2 = legendre5(|x| legendre5(|y| k(x, y).powi(2), 0.0, x) + legendre5(|y| k(x, y).powi(2), x, 1.0), 0.0, 1.0);
    let ok = (t.trace - 1.0 / 6.0).abs() < 1e-9
        && (t.trace_sq - 1.0 / 90.0).abs() < 1e-9
        && (t.dof() - 2.5).abs() < 1e-9
        && (tr - 1.0 / 6.0).abs() < 1e-9
        && (tr2 - 1.0 / 90.0).abs() < 1e-9;
    report(
        1,
        "cramer-von mises constants",
        ok,
        format!("trace={:.12} trace_sq={:.12} dof={:.12} (quadrature {:.12}, {:.12})", t.trace, t.trace_sq, t.dof(), tr, tr2),
    );
    assert!(ok);
}

#[test]
fn criterion_02_poisson_closure() {
    let grid: Vec<f64> = (0..10).map(|i| 2.0 * PI * (i as f64 + 0.25) / 10.0).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for &rho in &[0.3, 0.5, 0.9] {
        let p = PoissonKernel::new(rho).unwrap();
        let mut err = 0.0f64;
        for &a in &grid {
            for &b in &grid {
                err = err.max((p.series(a, b, 60) - p.eval_angles(a, b)).abs());
            }
        }
        let bound = 2.0 * rho.powi(61) / (1.0 - rho);
        let pairs = poisson_pairs_for_ratio(rho, TRUNCATION_RATIO, MAX_TERMS);
        let s = poisson_spectrum(&p, pairs, true).unwrap();
        let l = s.eigenvalues();
        let tr: f64 = l.iter().sum();
        let tr2: f64 = l.iter().map(|v| v * v).sum();
        let dof_err = (sdof(tr, tr2).unwrap() - poisson_dof(rho).unwrap()).abs();
        let pass = err < 1e-9 && dof_err < 1e-8;
        ok &= pass;
        detail.push(format!(
            "rho={rho}: 60-term max error {err:.3e} (truncation bound {bound:.3e}), dof error {dof_err:.3e} over {pairs} pairs"
        ));
    }
    report(2, "poisson kernel closure", ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn criterion_03_mehler() {
    let p = MehlerParameters::new(1.0, 0.0, 1.0).unwrap();
    let root = (p.r * p.w - (1.0 - p.w).powi(2)).abs();
    let w = mehler_root(1.0);
    let rule = QuadratureRule::normal(120, 0.0, 1.0);
    let phis: Vec<Vec<f64>> = rule.nodes.iter().map(|&x| p.eigenfunctions(11, x)).collect();
    let mut orth = 0.0f64;
    for n in 0..=10 {
        for m in 0..=10 {
            let ip: f64 = phis.iter().zip(&rule.weights).map(|(f, w)| w * f[n] * f[m]).sum();
            orth = orth.max((ip - if n == m { 1.0 } else { 0.0 }).abs());
        }
    }
    let grid: Vec<f64> = (0..13).map(|i| -3.0 + 0.5 * i as f64).collect();
    let mut recon = 0.0f64;
    for &x in &grid {
        let fx = p.eigenfunctions(40, x);
        for &y in &grid {
            let fy = p.eigenfunctions(40, y);
            let s: f64 = (0..40).map(|n| p.eigenvalue(n) * fx[n] * fy[n]).sum();
            recon = recon.max((s - gaussian(x - y, 1.0)).abs());
        }
    }
    let sum: f64 = (0..40).map(|n| p.eigenvalue(n)).sum();
    let trace_gap = (sum - 1.0 / (2.0 * PI).sqrt()).abs();
    let ok = root < 1e-12 && w == p.w && orth < 1e-7 && recon < 1e-6 && trace_gap <= p.tail(40) + 1e-15;
    report(
        3,
        "mehler decomposition",
        ok,
        format!(
            "root residual {root:.2e}, orthonormality {orth:.2e}, reconstruction {recon:.2e}, trace gap {trace_gap:.2e} (tail {:.2e})",
            p.tail(40)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_04_estimators() {
    let u01 = BaselineMeasure::uniform01();
    let c = center_kernel(&KernelSpec::Cvm, &u01).unwrap();
    let mut identity = 0.0f64;
    for rep in 0..20 {
        let mut rng = stream_rng(40, rep);
        let n = rng.random_range(2..60);
        let xs = u01.sample(&mut rng, n);
        let v = v_stat(&xs, &u01, &KernelSpec::Cvm).unwrap().value;
        let u = u_stat(&xs, &u01, &KernelSpec::Cvm).unwrap().value;
        // brute force
        let (mut off, mut diag) = (0.0, 0.0);
        for (i, &a) in xs.iter().enumerate() {
            for (j, &b) in xs.iter().enumerate() {
                let k = c.eval(a, b).unwrap();
                if i == j {
                    diag += k;
                } else {
                    off += k;
                }
            }
        }
        let nf = n as f64;
        identity = identity.max((v - (off + diag) / (nf * nf)).abs());
        identity = identity.max((u - off / (nf * (nf - 1.0))).abs());
        identity = identity.max((v - ((nf - 1.0) / nf * u + diag / (nf * nf))).abs());
    }
    let reps = 10_000u64;
    let n = 50;
    let (mut vs, mut us) = (Vec::new(), Vec::new());
    for rep in 0..reps {
        let xs = u01.sample(&mut stream_rng(41, rep), n);
        let s = PairSums::compute(&c, &xs).unwrap();
        vs.push(s.v());
        us.push(s.u().unwrap());
    }
    let stats = |x: &[f64]| {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0);
        (m, (var / x.len() as f64).sqrt())
    };
    let (mu, seu) = stats(&us);
    let (mv, sev) = stats(&vs);
    let target = (1.0 / 6.0) / n as f64;
    let ok = identity < 1e-12 && mu.abs() < 3.0 * seu && (mv - target).abs() < 3.0 * sev;
    report(
        4,
        "estimator identities and bias",
        ok,
        format!("identity error {identity:.2e}; mean U {mu:.3e} (se {seu:.2e}); mean V {mv:.5e} vs {target:.5e} (se {sev:.2e})"),
    );
    assert!(ok);
}

#[test]
fn criterion_05_simple_null_calibration() {
    let circle = BaselineMeasure::UniformCircle;
    let test = SimpleNullTest::new(circle.clone(), KernelSpec::poisson(0.5).unwrap(), TestOptions { seed: 50, ..TestOptions::default() })
        .unwrap();
    let reps = 2000u64;
    let (mut spectral, mut satt) = (0usize, 0usize);
    for rep in 0..reps {
        let xs = circle.sample(&mut stream_rng(51, rep), 200);
        let r = test.run(&xs).unwrap();
        spectral += (r.p_values.spectral.unwrap().p <= 0.05) as usize;
        satt += (r.p_values.satterthwaite.unwrap() <= 0.05) as usize;
    }
    let (a, b) = (spectral as f64 / reps as f64, satt as f64 / reps as f64);
    let ok = (0.035..=0.065).contains(&a) && (0.03..=0.07).contains(&b);
    report(5, "simple-null calibration", ok, format!("spectral rejection {a:.4}, satterthwaite rejection {b:.4}"));
    assert!(ok);
}

#[test]
fn criterion_06_composite_null() {
    let kernel = KernelSpec::normal(1.0).unwrap();
    let reps = 2000u64;
    let std_normal = BaselineMeasure::normal(0.0, 1.0).unwrap();
    let (mut spectral, mut satt) = (0usize, 0usize);
    for rep in 0..reps {
        let options = TestOptions { draws: 20_000, seed: 600 + rep, ..TestOptions::default() };
        let test = CompositeNullTest::new(Arc::new(NormalModel), CompositeKernel::Fixed(kernel.clone()), options).unwrap();
        let xs = std_normal.sample(&mut stream_rng(61, rep), 200);
        let r = test.run(&xs).unwrap();
        spectral += (r.p_values.spectral.unwrap().p <= 0.05) as usize;
        satt += (r.p_values.satterthwaite.unwrap() <= 0.05) as usize;
    }
    let rate = spectral as f64 / reps as f64;
    let satt_rate = satt as f64 / reps as f64;

    let theta = [0.0, 1.0];
    let scen = ScoreCenteredKernel::new(kernel.clone(), Arc::new(NormalModel), theta.to_vec()).unwrap();
    let cen = CenteredKernel::new(kernel, NormalModel.baseline(&theta).unwrap()).unwrap();
    let lmax = nystrom_spectrum(&scen, &std_normal, 64).unwrap().eigenvalues()[0];
    let suppressed = |eig: Vec<f64>| eig.iter().filter(|v| **v < 1e-3 * lmax).count();
    let scen_count = suppressed(score_subspace_eigenvalues(&scen, &NormalModel, &theta).unwrap());
    let cen_count = suppressed(score_subspace_eigenvalues(&cen, &NormalModel, &theta).unwrap());
    let ok = (0.03..=0.07).contains(&rate) && scen_count == 3;
    report(
        6,
        "composite-null calibration",
        ok,
        format!(
            "spectral rejection {rate:.4} (satterthwaite {satt_rate:.4}); suppressed directions {scen_count} score-centered, {cen_count} G-centered"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_07_pearson_reduction() {
    let mut worst = 0.0f64;
    for rep in 0..50 {
        let mut rng = stream_rng(70, rep);
        let (rows, cols) = (rng.random_range(2..5usize), rng.random_range(2..5usize));
        let counts: Vec<Vec<usize>> = (0..rows).map(|_| (0..cols).map(|_| rng.random_range(1..15)).collect()).collect();
        let model = Independence::new(rows, cols).unwrap();
        let sample = model.expand(&counts).unwrap();
        let n = sample.len() as f64;
        let theta = model.fit(&sample).unwrap();
        let kernel = CompositeKernel::Pearson.resolve(&model, &theta).unwrap();
        let k = ScoreCenteredKernel::new(kernel, Arc::new(model), theta).unwrap();
        let stat = n * k.pair_sums(&sample).unwrap().v();
        let rs: Vec<f64> = counts.iter().map(|r| r.iter().sum::<usize>() as f64).collect();
        let cs: Vec<f64> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum::<usize>() as f64).collect();
        let mut x2 = 0.0;
        for i in 0..rows {
            for j in 0..cols {
                let e = rs[i] * cs[j] / n;
                x2 += (counts[i][j] as f64 - e).powi(2) / e;
            }
        }
        worst = worst.max((stat - x2).abs());
    }
    let ok = worst < 1e-10;
    report(7, "pearson reduction", ok, format!("max |nV - X²| over 50 tables {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_08_cumulants() {
    let mut monotone = true;
    let mut min_ratio = f64::INFINITY;
    for rep in 0..1000 {
        let mut rng = stream_rng(80, rep);
        let len = rng.random_range(1..40);
        let l: Vec<f64> = (0..len).map(|_| rng.random::<f64>().powi(3) + 1e-6).collect();
        let norm = l.iter().map(|v| v * v).sum::<f64>().sqrt();
        let normed: Vec<f64> = (2..=8).map(|r| l.iter().map(|v| (v / norm).powi(r)).sum()).collect();
        monotone &= normed.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let diag = CumulantDiagnostics::new(&l, 8).unwrap();
        let lib: Vec<f64> = diag.normed_cumulants.iter().map(|&(_, c)| c).collect();
        monotone &= lib.len() == normed.len() && lib.iter().zip(&normed).all(|(a, b)| (a - b).abs() <= 1e-12 * b.max(1e-300));
        // cumulant ratios against the oracle Σγʳ (Σγ)^{r-2}
        for r in 3..=8 {
            let q = cumulant_ratio(&l, r).unwrap();
            let oracle = normed[r - 2] * (l.iter().sum::<f64>() / norm).powi(r as i32 - 2);
            monotone &= (q - oracle).abs() <= 1e-10 * oracle;
            min_ratio = min_ratio.min(q);
        }
        monotone &= (chi_star_cumulant(&l, 2).unwrap() - 1.0).abs() < 1e-12;
    }
    let mut skew = 0.0f64;
    for &rho in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
        let closed = (1.0 + rho) * (1.0 + rho) / (1.0 + rho + rho * rho);
        skew = skew.max((poisson_cumulant_ratio(rho, 3).unwrap() - closed).abs());
        let s = poisson_spectrum(&PoissonKernel::new(rho).unwrap(), 4000, true).unwrap();
        skew = skew.max((cumulant_ratio(s.eigenvalues(), 3).unwrap() - closed).abs());
    }
    let near = poisson_cumulant_ratio(1.0 - 1e-6, 3).unwrap();
    let mut limit = 0.0f64;
    for r in 3..=8 {
        limit = limit.max((poisson_cumulant_ratio(0.999, r).unwrap() - 2f64.powi(r as i32 - 1) / r as f64).abs());
    }
    let ok = monotone && min_ratio >= 1.0 - 1e-12 && skew < 1e-10 && (near - 4.0 / 3.0).abs() < 1e-5 && limit < 1e-2;
    report(
        8,
        "cumulant theory",
        ok,
        format!(
            "monotone={monotone}, min ratio {min_ratio:.6}, skewness error {skew:.2e}, ratio near rho=1 {near:.8}, r-limit error {limit:.2e}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_09_approximation_ordering() {
    let mut ok = true;
    let mut detail = Vec::new();
    for &rho in &[0.5, 0.9] {
        let p = PoissonKernel::new(rho).unwrap();
        let s = poisson_spectrum(&p, poisson_pairs_for_ratio(rho, TRUNCATION_RATIO, MAX_TERMS), true).unwrap();
        let law = ChiStarDistribution::from_spectrum(&s, false).unwrap();
        let reference = law.reference(400_000, 90).unwrap();
        for q in [0.90, 0.95] {
            let x = reference.quantile(q);
            let mc = reference.tail(x).p;
            let sat = (law.satterthwaite(x).unwrap() - mc).abs();
            let nor = (law.normal(x).unwrap() - mc).abs();
            ok &= sat < nor;
            detail.push(format!("rho={rho} q={q}: |satt-mc|={sat:.2e} |normal-mc|={nor:.2e}"));
        }
    }
    report(9, "approximation ordering", ok, detail.join("; "));
    assert!(ok);
}

#[test]
fn criterion_10_gauge_invariance() {
    let mut worst = 0.0f64;
    for rep in 0..200 {
        let mut rng = stream_rng(100, rep);
        let m = rng.random_range(1..8);
        let support: Vec<f64> = (0..m).map(|i| i as f64 * 0.7 + rng.random::<f64>() * 0.5).collect();
        let wf: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.01).collect();
        let wg: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.01).collect();
        let f = Pmf::from_weights(support.clone(), wf).unwrap();
        let g = Pmf::from_weights(support.clone(), wg).unwrap();
        let h2 = 0.1 + rng.random::<f64>() * 2.0;
        let (c1, c2, b) = (rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>(), rng.random::<f64>() * 10.0 - 5.0);
        let k = KernelSpec::normal(h2).unwrap();
        let shifted = k.gauge_shift(move |x| c1 * x.sin() + c2 * x * x, b);
        // brute-force oracle
        let diff: Vec<f64> = f.probs().iter().zip(g.probs()).map(|(a, b)| a - b).collect();
        let mut oracle = 0.0;
        for i in 0..m {
            for j in 0..m {
                oracle += diff[i] * diff[j] * gaussian(support[i] - support[j], h2);
            }
        }
        let d = quadratic_distance(&f, &g, &k).unwrap();
        let ds = quadratic_distance(&f, &g, &shifted).unwrap();
        worst = worst.max((d - oracle).abs()).max((ds - oracle).abs());
    }
    let ok = worst < 1e-10;
    report(10, "gauge invariance", ok, format!("max deviation from brute force over 200 measure pairs {worst:.2e}"));
    assert!(ok);
}
