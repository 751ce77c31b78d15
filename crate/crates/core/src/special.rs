//! Special functions and quadrature rules used by the beam profiles.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Generalized Laguerre polynomial `L_p^α(x)` by upward recurrence in `p`.
pub fn laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Bessel functions of the first kind `J_0(z) ..= J_nmax(z)` for complex `z`.
///
/// Small arguments use the power series; larger ones Miller's backward
/// recurrence, normalized with `1 = J₀ + 2ΣJ₂ₖ` near the real axis and with
/// `cos z = J₀ + 2Σ(−1)ᵏJ₂ₖ` once `|Im z| > 1`, where the first identity
/// cancels catastrophically.
pub fn bessel_j_upto(nmax: usize, z: Complex64) -> Vec<Complex64> {
    if z.norm() <= 2.0 {
        return (0..=nmax).map(|n| bessel_series(n, z)).collect();
    }
    let a = z.norm();
    let start = {
        let base = (nmax as f64).max(a);
        let m = (base + 20.0 + 4.0 * base.sqrt()) as usize + 10;
        m + (m % 2)
    };

    let mut vals = vec![Complex64::new(0.0, 0.0); start + 2];
    vals[start + 1] = Complex64::new(0.0, 0.0);
    vals[start] = Complex64::new(1e-300, 0.0);
    let two_over_z = 2.0 / z;
    for k in (1..=start).rev() {
        let next = two_over_z * k as f64 * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.norm() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }

    // Bring the unnormalized sequence to O(1): complex division squares the divisor.
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    for v in vals.iter_mut() {
        *v /= peak;
    }

    let norm = if z.im.abs() <= 1.0 {
        let mut s = vals[0];
        for k in (2..=start).step_by(2) {
            s += 2.0 * vals[k];
        }
        s
    } else {
        let mut s = vals[0];
        for (idx, k) in (2..=start).step_by(2).enumerate() {
            let sign = if idx % 2 == 0 { -1.0 } else { 1.0 };
            s += 2.0 * sign * vals[k];
        }
        s / z.cos()
    };
    vals.truncate(nmax + 1);
    vals.iter().map(|v| v / norm).collect()
}

/// `J_n(z)` for integer order and complex argument.
pub fn bessel_j(n: i32, z: Complex64) -> Complex64 {
    let order = n.unsigned_abs() as usize;
    let v = bessel_j_upto(order, z)[order];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `J_n(x)` for real `x`: the same Miller recurrence in real arithmetic,
/// keeping only the running terms.
pub fn bessel_j_real(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs() as usize;
    let sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    if x.abs() <= 2.0 {
        return sign * bessel_series(order, Complex64::new(x, 0.0)).re;
    }
    let a = x.abs();
    let start = {
        let base = (order as f64).max(a);
        let m = (base + 20.0 + 4.0 * base.sqrt()) as usize + 10;
        m + (m % 2)
    };
    let two_over_x = 2.0 / x;
    let (mut hi, mut cur) = (0.0f64, 1e-300f64);
    let mut norm = if start % 2 == 0 { 2.0 * cur } else { 0.0 };
    let mut wanted = if start == order { cur } else { 0.0 };
    for k in (1..=start).rev() {
        let next = two_over_x * k as f64 * cur - hi;
        hi = cur;
        cur = next;
        let idx = k - 1;
        if idx == order {
            wanted = cur;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { cur } else { 2.0 * cur };
        }
        if cur.abs() > 1e250 {
            hi *= 1e-250;
            cur *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    sign * wanted / norm
}

/// `J_n(z)` and `J_n'(z)` together.
pub fn bessel_j_with_derivative(n: i32, z: Complex64) -> (Complex64, Complex64) {
    let order = n.unsigned_abs() as usize;
    let vals = bessel_j_upto(order + 1, z);
    let j = vals[order];
    let dj = if order == 0 {
        -vals[1]
    } else {
        0.5 * (vals[order - 1] - vals[order + 1])
    };
    if n < 0 && order % 2 == 1 {
        (-j, -dj)
    } else {
        (j, dj)
    }
}

fn bessel_series(n: usize, z: Complex64) -> Complex64 {
    let half = z / 2.0;
    let q = -half * half;
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels of `order` nodes.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: `J_n(x) = (1/π)∫₀^π cos(nτ − x sin τ) dτ`, whose
    /// periodic integrand makes the trapezoid rule spectrally accurate.
    fn bessel_integral(n: i32, x: f64) -> f64 {
        let steps = 4000;
        let h = 2.0 * PI / steps as f64;
        (0..steps)
            .map(|k| {
                let t = k as f64 * h;
                (n as f64 * t - x * t.sin()).cos()
            })
            .sum::<f64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn real_bessel_matches_integral_representation() {
        for n in [0, 1, 2, 4, 7, 15, 30] {
            for x in [0.0, 0.3, 1.9, 2.1, 5.0, 13.7, 40.0, 70.0] {
                let a = bessel_j_real(n, x);
                let b = bessel_integral(n, x);
                assert!((a - b).abs() < 1e-13, "J_{n}({x}): {a} vs {b}");
            }
        }
        assert!((bessel_j_real(-3, 2.5) + bessel_j_real(3, 2.5)).abs() < 1e-16);
        for n in [0, 1, 5] {
            for x in [2.5, 9.0, 33.0] {
                assert!((bessel_j_real(n, x) - bessel_j(n, Complex64::new(x, 0.0)).re).abs() < 1e-14);
            }
        }
    }

    /// Complex-argument oracle from the same integral representation.
    fn bessel_integral_complex(n: i32, z: Complex64) -> Complex64 {
        let steps = 4000;
        let h = 2.0 * PI / steps as f64;
        let i = Complex64::i();
        (0..steps)
            .map(|k| {
                let t = k as f64 * h;
                (i * (z * t.sin() - n as f64 * t)).exp()
            })
            .sum::<Complex64>()
            * h
            / (2.0 * PI)
    }

    #[test]
    fn complex_bessel_matches_integral_representation() {
        let args = [
            Complex64::new(3.0, -3.0),
            Complex64::new(10.0, -10.0),
            Complex64::new(0.5, 1.2),
            Complex64::new(25.0, -4.0),
            Complex64::new(1.0, 8.0),
        ];
        for n in [0, 1, 2, 4, 9] {
            for z in args {
                let a = bessel_j(n, z);
                let b = bessel_integral_complex(n, z);
                let scale = b.norm().max(1e-3);
                assert!((a - b).norm() < 1e-11 * scale.max(1.0), "J_{n}({z}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let z = Complex64::new(4.2, -1.3);
        for n in [0, 1, 3] {
            let (_, d) = bessel_j_with_derivative(n, z);
            let h = 1e-5;
            let fd = (bessel_j(n, z + h) - bessel_j(n, z - h)) / (2.0 * h);
            assert!((d - fd).norm() < 1e-8);
        }
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_eq!(laguerre(0, 3.0, x), 1.0);
        assert!((laguerre(1, 1.0, x) - (2.0 - x)).abs() < 1e-15);
        let l2 = 0.5 * (x * x - 2.0 * (2.0 + 2.0) * x + (2.0 + 1.0) * (2.0 + 2.0));
        assert!((laguerre(2, 2.0, x) - l2).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((s - 2.0 / 31.0).abs() < 1e-14);
        let rule = CompositeGauss::new(0.0, 3.0, 7, 8);
        assert!((rule.integrate(|t| (-t).exp()) - (1.0 - (-3.0f64).exp())).abs() < 1e-14);
    }
}
