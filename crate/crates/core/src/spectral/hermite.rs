//! Hermite polynomials and their damped, normalized variants.

/// Physicists' Hermite polynomial `H_n(x)` by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n(a x) exp(-b² x² / 2)`.
pub fn damped_hermite(n: usize, x: f64, a: f64, b: f64) -> f64 {
    hermite(n, a * x) * (-0.5 * b * b * x * x).exp()
}

/// `H_n(y) / √(2ⁿ n!)` for `n = 0..len`, computed without forming `n!`.
///
/// The normalized recurrence keeps every term of order one near the bulk of
/// the weight, so degrees in the hundreds stay finite.
pub fn normalized_hermite_all(len: usize, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(1.0);
    if len == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * y);
    for n in 1..len - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * y * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}
