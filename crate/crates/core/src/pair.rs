//! Two-photon wave packets of twisted photon pairs: radial profiles, the
//! real-space Hankel transform, correlation functions and pair densities.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::beam::{bloch_spinor, BeamEvaluator, BeamSpec, BlochState};
use crate::error::{Error, Result};
use crate::special::bessel_j_real;

const NODES: usize = 801;
const SPAN_SIGMAS: f64 = 12.0;
const NORM_TOLERANCE: f64 = 1e-10;

/// `η(k_z, ρ_k)`, independent of the azimuth `φ_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialProfile {
    /// `|η|²` Gaussian in `k_z` (centre `kz0`, std `sigma_z`) times a Gaussian ring in `ρ_k`.
    GaussianRing { kz0: f64, sigma_z: f64, rho_k0: f64, sigma_rho: f64 },
    /// Samples `values[[iz, ir]]` at `(kz[iz], rho_k[ir])`, integrated by the trapezoid rule.
    Tabulated { kz: Vec<f64>, rho_k: Vec<f64>, values: Array2<Complex64> },
}

impl RadialProfile {
    /// Ring at the cone angle `theta_p` around `k₀ = 2π/λ₀`, with 1 % axial and 10 % radial width.
    pub fn default_ring(lambda0: f64, theta_p: f64) -> Self {
        let k0 = 2.0 * PI / lambda0;
        let rho_k0 = k0 * theta_p.sin();
        RadialProfile::GaussianRing { kz0: k0, sigma_z: 0.01 * k0, rho_k0, sigma_rho: 0.1 * rho_k0 }
    }

    /// `∫|η|² d³k`.
    pub fn norm(&self) -> Result<f64> {
        match self {
            RadialProfile::GaussianRing { .. } => {
                let q = RingQuadrature::new(self)?;
                Ok(q.norm())
            }
            RadialProfile::Tabulated { kz, rho_k, values } => {
                check_table(kz, rho_k, values)?;
                let wz = trapezoid_weights(kz);
                let wr = trapezoid_weights(rho_k);
                let mut s = 0.0;
                for (iz, a) in wz.iter().enumerate() {
                    for (ir, b) in wr.iter().enumerate() {
                        s += a * b * rho_k[ir] * values[[iz, ir]].norm_sqr();
                    }
                }
                Ok(2.0 * PI * s)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.norm()?;
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized(n));
        }
        Ok(())
    }
}

fn check_table(kz: &[f64], rho_k: &[f64], values: &Array2<Complex64>) -> Result<()> {
    if kz.len() < 2 || rho_k.len() < 2 || values.dim() != (kz.len(), rho_k.len()) {
        return Err(Error::InvalidParameter(
            "tabulated profile needs at least 2×2 samples matching the value array".into(),
        ));
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    if !increasing(kz) || !increasing(rho_k) || rho_k[0] < 0.0 {
        return Err(Error::InvalidParameter(
            "tabulated axes must increase strictly and rho_k must be non-negative".into(),
        ));
    }
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidParameter("tabulated profile has non-finite values".into()));
    }
    Ok(())
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Separable trapezoid nodes for a Gaussian ring, normalized in `ρ_k`.
struct RingQuadrature {
    kz: Vec<f64>,
    a: Vec<f64>,
    rho_k: Vec<f64>,
    b: Vec<f64>,
    h_z: f64,
    h_r: f64,
}

impl RingQuadrature {
    fn new(p: &RadialProfile) -> Result<Self> {
        let RadialProfile::GaussianRing { kz0, sigma_z, rho_k0, sigma_rho } = *p else {
            unreachable!("ring quadrature on a tabulated profile")
        };
        if !(sigma_z > 0.0 && sigma_rho > 0.0 && rho_k0 >= 0.0)
            || ![kz0, sigma_z, rho_k0, sigma_rho].iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidParameter(
                "gaussian ring needs finite positive widths and a non-negative radius".into(),
            ));
        }
        let h_z = 2.0 * SPAN_SIGMAS * sigma_z / (NODES - 1) as f64;
        let kz: Vec<f64> = (0..NODES).map(|i| kz0 - SPAN_SIGMAS * sigma_z + i as f64 * h_z).collect();
        // |a|² is a unit-area normal density.
        let az = (2.0 * PI * sigma_z * sigma_z).powf(-0.25);
        let a = kz.iter().map(|k| az * (-(k - kz0).powi(2) / (4.0 * sigma_z * sigma_z)).exp()).collect();

        let lo = (rho_k0 - SPAN_SIGMAS * sigma_rho).max(0.0);
        let hi = rho_k0 + SPAN_SIGMAS * sigma_rho;
        let h_r = (hi - lo) / (NODES - 1) as f64;
        let rho_k: Vec<f64> = (0..NODES).map(|i| lo + i as f64 * h_r).collect();
        let raw: Vec<f64> = rho_k
            .iter()
            .map(|r| (-(r - rho_k0).powi(2) / (4.0 * sigma_rho * sigma_rho)).exp())
            .collect();
        let mut q = Self { kz, a, rho_k, b: raw, h_z, h_r };
        let s = q.radial_norm();
        for v in q.b.iter_mut() {
            *v /= s.sqrt();
        }
        Ok(q)
    }

    fn radial_norm(&self) -> f64 {
        2.0 * PI * trapezoid(self.h_r, self.rho_k.iter().zip(&self.b).map(|(r, b)| r * b * b))
    }

    fn norm(&self) -> f64 {
        trapezoid(self.h_z, self.a.iter().map(|a| a * a)) * self.radial_norm()
    }
}

fn trapezoid(h: f64, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// `η̃(ρ, z) = (iᵐ/√2π) ∫dk_z ∫ρ_k dρ_k η e^{ik_z z} J_m(ρρ_k)` at each `rho`.
pub fn hankel_profile(eta: &RadialProfile, m: i32, rho: &[f64], z: f64) -> Result<Vec<Complex64>> {
    // Symmetric sample sets repeat radii; transform each distinct value once.
    let mut unique: Vec<f64> = rho.to_vec();
    unique.sort_by(f64::total_cmp);
    unique.dedup_by(|a, b| a.to_bits() == b.to_bits());
    if unique.len() < rho.len() {
        let values = hankel_distinct(eta, m, &unique, z)?;
        return Ok(rho
            .iter()
            .map(|r| values[unique.binary_search_by(|u| u.total_cmp(r)).expect("radius present")])
            .collect());
    }
    hankel_distinct(eta, m, rho, z)
}

fn hankel_distinct(eta: &RadialProfile, m: i32, rho: &[f64], z: f64) -> Result<Vec<Complex64>> {
    eta.validate()?;
    let pre = Complex64::new(0.0, 1.0).powi(m) / (2.0 * PI).sqrt();
    match eta {
        RadialProfile::GaussianRing { .. } => {
            let q = RingQuadrature::new(eta)?;
            let axial: Complex64 = {
                let terms: Vec<Complex64> =
                    q.kz.iter().zip(&q.a).map(|(k, a)| Complex64::from_polar(*a, k * z)).collect();
                let n = terms.len();
                (terms.iter().sum::<Complex64>() - 0.5 * (terms[0] + terms[n - 1])) * q.h_z
            };
            Ok(rho
                .iter()
                .map(|&r| {
                    let radial = trapezoid(
                        q.h_r,
                        q.rho_k.iter().zip(&q.b).map(|(rk, b)| rk * b * bessel_j_real(m, r * rk)),
                    );
                    pre * axial * radial
                })
                .collect())
        }
        RadialProfile::Tabulated { kz, rho_k, values } => {
            let wz = trapezoid_weights(kz);
            let wr = trapezoid_weights(rho_k);
            let axial: Vec<Complex64> = (0..rho_k.len())
                .map(|ir| {
                    kz.iter()
                        .enumerate()
                        .map(|(iz, k)| wz[iz] * values[[iz, ir]] * Complex64::from_polar(1.0, k * z))
                        .sum()
                })
                .collect();
            Ok(rho
                .iter()
                .map(|&r| {
                    let s: Complex64 = rho_k
                        .iter()
                        .enumerate()
                        .map(|(ir, rk)| axial[ir] * (wr[ir] * rk * bessel_j_real(m, r * rk)))
                        .sum();
                    pre * s
                })
                .collect())
        }
    }
}

/// Polarization class of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinSymmetry {
    /// Opposite helicities, `|↑↓⟩ + |↓↑⟩`, angular factor `e^{imΔ} + c.c.`
    Symmetric,
    /// `|↑↓⟩ − |↓↑⟩`, angular factor `e^{imΔ} − c.c.`; needs `m ≠ 0`.
    Antisymmetric,
    /// Both photons in the Bloch state `|↑⟩`.
    SameUp,
    /// Both photons in the Bloch state `|↓⟩`.
    SameDown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSpec {
    pub m: i32,
    pub symmetry: SpinSymmetry,
    pub theta_b: f64,
    pub phi_b: f64,
    /// Global phase of the two-photon amplitude.
    pub phi0: f64,
    pub eta: RadialProfile,
    /// Slice at which both photons are detected, in λ₀.
    pub z: f64,
}

impl PairSpec {
    pub fn validate(&self) -> Result<()> {
        if self.symmetry == SpinSymmetry::Antisymmetric && self.m == 0 {
            return Err(Error::InvalidParameter("antisymmetric pairs need m != 0".into()));
        }
        if ![self.theta_b, self.phi_b, self.phi0, self.z].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("pair angles and z must be finite".into()));
        }
        self.eta.validate()
    }

    /// `Θ_{λλ′}` with rows and columns ordered `(+, −)`.
    pub fn theta(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta_b.sin_cos();
        let re = |v: f64| Complex64::new(v, 0.0);
        match self.symmetry {
            SpinSymmetry::Symmetric => [
                [-s * Complex64::from_polar(1.0, -self.phi_b), re(c)],
                [re(c), s * Complex64::from_polar(1.0, self.phi_b)],
            ],
            SpinSymmetry::Antisymmetric => [[re(0.0), re(1.0)], [re(-1.0), re(0.0)]],
            SpinSymmetry::SameUp | SpinSymmetry::SameDown => {
                let which = if self.symmetry == SpinSymmetry::SameUp { BlochState::Up } else { BlochState::Down };
                let u = bloch_spinor(self.theta_b, self.phi_b, which);
                let r2 = 2f64.sqrt();
                [[r2 * u[0] * u[0], r2 * u[0] * u[1]], [r2 * u[1] * u[0], r2 * u[1] * u[1]]]
            }
        }
    }

    /// `N = [4(1 + δ_{m,0})]^{−1/2}`, with `δ` only for the `+ c.c.` classes.
    pub fn norm_factor(&self) -> f64 {
        let delta: f64 = if self.m == 0 && self.symmetry != SpinSymmetry::Antisymmetric { 1.0 } else { 0.0 };
        (4.0 * (1.0 + delta)).powf(-0.5)
    }

    fn sign(&self) -> f64 {
        if self.symmetry == SpinSymmetry::Antisymmetric {
            -1.0
        } else {
            1.0
        }
    }

    /// `e^{imΔ} ± c.c.`
    pub fn angular_factor(&self, delta_phi: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, self.m as f64 * delta_phi);
        e + self.sign() * e.conj()
    }

    /// `ξ̃_{λλ′}(r, r′)` for points `(ρ, φ)` given `η̃` at both radii.
    pub fn amplitude(&self, eta_r: Complex64, eta_rp: Complex64, phi: f64, phi_p: f64) -> [[Complex64; 2]; 2] {
        let common = Complex64::from_polar(self.norm_factor(), self.phi0) * eta_r * eta_rp * self.angular_factor(phi - phi_p);
        let t = self.theta();
        [[common * t[0][0], common * t[0][1]], [common * t[1][0], common * t[1][1]]]
    }
}

/// Correlation matrices indexed by point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelations {
    pub g2: Array2<f64>,
    pub big_g2: Array2<f64>,
    pub big_g2h: Array2<f64>,
}

fn eta_at(spec: &PairSpec, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    spec.validate()?;
    let rho: Vec<f64> = points.iter().map(|p| p.0).collect();
    hankel_profile(&spec.eta, spec.m, &rho, spec.z)
}

fn kronecker(spec: &PairSpec) -> f64 {
    if spec.m == 0 && spec.symmetry != SpinSymmetry::Antisymmetric {
        1.0
    } else {
        0.0
    }
}

/// Closed forms for `G²`, `G²_H` and `g²` over all pairs of `points = (ρ, φ)`.
///
/// `g²` is NaN where either density vanishes.
pub fn pair_correlations(spec: &PairSpec, points: &[(f64, f64)]) -> Result<PairCorrelations> {
    let eta = eta_at(spec, points)?;
    Ok(correlation_table(spec, points, &eta, points, &eta))
}

/// Rectangular variant: entry `[a, b]` pairs `rows[a]` with `cols[b]`.
pub fn pair_correlations_between(
    spec: &PairSpec,
    rows: &[(f64, f64)],
    cols: &[(f64, f64)],
) -> Result<PairCorrelations> {
    let eta_r = eta_at(spec, rows)?;
    let eta_c = eta_at(spec, cols)?;
    Ok(correlation_table(spec, rows, &eta_r, cols, &eta_c))
}

fn correlation_table(
    spec: &PairSpec,
    rows: &[(f64, f64)],
    eta_r: &[Complex64],
    cols: &[(f64, f64)],
    eta_c: &[Complex64],
) -> PairCorrelations {
    let shape = (rows.len(), cols.len());
    let n2 = spec.norm_factor().powi(2);
    let delta = kronecker(spec);
    let cos2 = (2.0 * spec.theta_b).cos();
    let cos_sq = spec.theta_b.cos().powi(2);
    let mut g2 = Array2::zeros(shape);
    let mut big = Array2::zeros(shape);
    let mut big_h = Array2::zeros(shape);
    for a in 0..shape.0 {
        for b in 0..shape.1 {
            let c = (2.0 * spec.m as f64 * (rows[a].1 - cols[b].1)).cos();
            let mod_ = 1.0 + spec.sign() * c;
            let amp = eta_r[a].norm_sqr() * eta_c[b].norm_sqr();
            let gg = 8.0 * n2 * amp * mod_;
            big[[a, b]] = gg;
            big_h[[a, b]] = match spec.symmetry {
                SpinSymmetry::Symmetric => -cos2 * gg,
                SpinSymmetry::Antisymmetric => -gg,
                SpinSymmetry::SameUp | SpinSymmetry::SameDown => cos_sq * gg,
            };
            g2[[a, b]] = if amp > 0.0 {
                match spec.symmetry {
                    SpinSymmetry::Antisymmetric => 0.5 * mod_,
                    _ => mod_ / (2.0 * (1.0 + delta)),
                }
            } else {
                f64::NAN
            };
        }
    }
    PairCorrelations { g2, big_g2: big, big_g2h: big_h }
}

/// Photon and helicity densities of the pair at each `(ρ, φ)`.
pub fn pair_densities(spec: &PairSpec, points: &[(f64, f64)]) -> Result<(Vec<f64>, Vec<f64>)> {
    let eta = eta_at(spec, points)?;
    let pnd: Vec<f64> = eta.iter().map(|e| 2.0 * e.norm_sqr()).collect();
    let h = spec.theta_b.cos();
    let hel = pnd
        .iter()
        .map(|d| match spec.symmetry {
            SpinSymmetry::SameUp => d * h,
            SpinSymmetry::SameDown => -d * h,
            _ => 0.0,
        })
        .collect();
    Ok((pnd, hel))
}

/// Brute-force `G² = 2Σ|ξ̃_{λλ′}|²` and `G²_H = 2Σλλ′|ξ̃_{λλ′}|²` from the explicit amplitudes.
pub fn contraction_oracle(spec: &PairSpec, r: (f64, f64), r_prime: (f64, f64)) -> Result<(f64, f64)> {
    let eta = eta_at(spec, &[r, r_prime])?;
    let xi = spec.amplitude(eta[0], eta[1], r.1, r_prime.1);
    let lambda = [1.0, -1.0];
    let (mut g, mut gh) = (0.0, 0.0);
    for (l, row) in xi.iter().enumerate() {
        for (lp, v) in row.iter().enumerate() {
            g += 2.0 * v.norm_sqr();
            gh += 2.0 * lambda[l] * lambda[lp] * v.norm_sqr();
        }
    }
    Ok((g, gh))
}

/// Coherent-state reference at transverse points `(x, y)`: `g² ≡ 1`, `G²_H = n_H n_H′`.
pub fn coherent_correlations(
    beam: &BeamSpec,
    lambda0: f64,
    z: f64,
    points: &[(f64, f64)],
) -> Result<(Array2<f64>, Array2<f64>)> {
    let ev = BeamEvaluator::new(beam, lambda0)?;
    let hel: Vec<f64> = points
        .iter()
        .map(|&(x, y)| {
            let v = ev.eval(x, y, z);
            v[0].norm_sqr() - v[1].norm_sqr()
        })
        .collect();
    let n = points.len();
    let g2 = Array2::from_elem((n, n), 1.0);
    let gh = Array2::from_shape_fn((n, n), |(a, b)| hel[a] * hel[b]);
    Ok((g2, gh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::CompositeGauss;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring() -> RadialProfile {
        RadialProfile::default_ring(1.0, 0.05 * PI)
    }

    fn spec(m: i32, symmetry: SpinSymmetry, theta_b: f64) -> PairSpec {
        PairSpec { m, symmetry, theta_b, phi_b: 0.3, phi0: 0.7, eta: ring(), z: 0.0 }
    }

    #[test]
    fn default_ring_is_normalized() {
        assert!((ring().norm().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_in_real_space() {
        // The z integral of |η̃|² factorizes; integrate both directions on independent Gauss rules.
        let eta = ring();
        let rq = CompositeGauss::new(0.0, 90.0, 120, 10);
        let zq = CompositeGauss::new(-80.0, 80.0, 80, 10);
        for m in [0, 1, 3] {
            let radial = hankel_profile(&eta, m, &rq.nodes, 0.0).unwrap();
            let shape: f64 =
                rq.nodes.iter().zip(&rq.weights).zip(&radial).map(|((r, w), v)| w * r * v.norm_sqr()).sum();
            let at_origin = hankel_profile(&eta, m, &[3.0], 0.0).unwrap()[0];
            let axial: f64 = zq
                .nodes
                .iter()
                .zip(&zq.weights)
                .map(|(z, w)| w * (hankel_profile(&eta, m, &[3.0], *z).unwrap()[0] / at_origin).norm_sqr())
                .sum();
            let total = 2.0 * PI * shape * axial;
            assert!((total - 1.0).abs() < 1e-6, "m = {m}: {total}");
        }
    }

    #[test]
    fn narrow_ring_tends_to_bessel() {
        let k = 1.0;
        let mut last = f64::INFINITY;
        for width in [0.05, 0.02, 0.005] {
            let eta = RadialProfile::GaussianRing { kz0: 2.0 * PI, sigma_z: 0.05, rho_k0: k, sigma_rho: width };
            let rho: Vec<f64> = (0..40).map(|i| 0.25 * i as f64).collect();
            let v = hankel_profile(&eta, 0, &rho, 0.0).unwrap();
            let err = rho
                .iter()
                .zip(&v)
                .map(|(r, e)| ((e / v[0]).re - bessel_j_real(0, k * r)).abs())
                .fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-3, "{last}");
    }

    #[test]
    fn odd_orders_vanish_on_axis() {
        assert_eq!(hankel_profile(&ring(), 2, &[0.0], 0.0).unwrap()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tabulated_profile_must_be_normalized() {
        let kz: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let rk: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let eta = RadialProfile::Tabulated { kz, rho_k: rk, values: Array2::from_elem((5, 5), Complex64::new(1.0, 0.0)) };
        assert!(matches!(hankel_profile(&eta, 0, &[1.0], 0.0), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn tabulated_matches_analytic_ring() {
        let RadialProfile::GaussianRing { kz0, sigma_z, rho_k0, sigma_rho } = ring() else { unreachable!() };
        let kz: Vec<f64> = (0..201).map(|i| kz0 - 10.0 * sigma_z + i as f64 * 0.1 * sigma_z).collect();
        let rk: Vec<f64> = (0..301).map(|i| i as f64 * 0.01 * rho_k0).collect();
        let raw = Array2::from_shape_fn((kz.len(), rk.len()), |(a, b)| {
            Complex64::new(
                (-(kz[a] - kz0).powi(2) / (4.0 * sigma_z * sigma_z) - (rk[b] - rho_k0).powi(2) / (4.0 * sigma_rho * sigma_rho)).exp(),
                0.0,
            )
        });
        let un = RadialProfile::Tabulated { kz: kz.clone(), rho_k: rk.clone(), values: raw.clone() };
        let s = un.norm().unwrap().sqrt();
        let tab = RadialProfile::Tabulated { kz, rho_k: rk, values: raw / s };
        let a = hankel_profile(&tab, 1, &[3.0, 7.0], 2.0).unwrap();
        let b = hankel_profile(&ring(), 1, &[3.0, 7.0], 2.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-8 * y.norm(), "{x} {y}");
        }
    }

    #[test]
    fn theta_structure() {
        let s = spec(1, SpinSymmetry::Symmetric, 0.4).theta();
        assert_eq!(s[0][1], s[1][0]);
        let a = spec(1, SpinSymmetry::Antisymmetric, 0.4).theta();
        assert_eq!(a[0][0], Complex64::new(0.0, 0.0));
        assert_eq!(a[1][1], Complex64::new(0.0, 0.0));
        assert_eq!(a[0][1], -a[1][0]);
        assert!(PairSpec { m: 0, ..spec(0, SpinSymmetry::Antisymmetric, 0.0) }.validate().is_err());
    }

    #[test]
    fn closed_forms_at_special_points() {
        let pts = [(8.0, 0.3), (8.0, 0.3 + PI / 2.0), (4.0, 1.1)];
        let c = pair_correlations(&spec(1, SpinSymmetry::Symmetric, 0.2), &pts).unwrap();
        assert!((c.g2[[0, 0]] - 1.0).abs() < 1e-14);
        assert!(c.g2[[0, 1]].abs() < 1e-14);
        let c0 = pair_correlations(&spec(0, SpinSymmetry::Symmetric, 0.2), &pts).unwrap();
        assert!(c0.g2.iter().all(|g| (g - 0.5).abs() < 1e-14));
        let ca = pair_correlations(&spec(2, SpinSymmetry::Antisymmetric, 0.2), &pts).unwrap();
        assert!(ca.g2[[2, 2]].abs() < 1e-14);
        for (a, b) in c.g2.iter().zip(pair_correlations(&spec(1, SpinSymmetry::Antisymmetric, 0.2), &pts).unwrap().g2.iter()) {
            assert!((a + b - 1.0).abs() < 1e-12);
        }
        let q = pair_correlations(&spec(3, SpinSymmetry::Symmetric, PI / 4.0), &pts).unwrap();
        assert!(q.big_g2h.iter().all(|v| v.abs() < 1e-12 * q.big_g2.iter().cloned().fold(0.0, f64::max)));
    }

    #[test]
    fn rectangular_table_matches_square() {
        let pts = [(8.0, 0.3), (5.0, 2.0), (4.0, 1.1)];
        let s = spec(2, SpinSymmetry::Symmetric, 0.4);
        let full = pair_correlations(&s, &pts).unwrap();
        let row = pair_correlations_between(&s, &pts[1..2], &pts).unwrap();
        for b in 0..3 {
            assert_eq!(row.g2[[0, b]], full.g2[[1, b]]);
            assert_eq!(row.big_g2h[[0, b]], full.big_g2h[[1, b]]);
        }
    }

    #[test]
    fn oracle_agrees_with_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let classes = [SpinSymmetry::Symmetric, SpinSymmetry::Antisymmetric, SpinSymmetry::SameUp, SpinSymmetry::SameDown];
        for _ in 0..100 {
            let sym = classes[rng.random_range(0..4)];
            let m = if sym == SpinSymmetry::Antisymmetric { rng.random_range(1..4) } else { rng.random_range(0..4) };
            let mut s = spec(m, sym, rng.random_range(0.0..PI));
            s.phi_b = rng.random_range(0.0..2.0 * PI);
            s.phi0 = rng.random_range(0.0..2.0 * PI);
            let r = (rng.random_range(1.0..15.0), rng.random_range(0.0..2.0 * PI));
            let rp = (rng.random_range(1.0..15.0), rng.random_range(0.0..2.0 * PI));
            let (g, gh) = contraction_oracle(&s, r, rp).unwrap();
            let c = pair_correlations(&s, &[r, rp]).unwrap();
            let scale = g.abs().max(1e-300);
            assert!((c.big_g2[[0, 1]] - g).abs() <= 1e-10 * scale, "{sym:?}");
            assert!((c.big_g2h[[0, 1]] - gh).abs() <= 1e-10 * scale, "{sym:?}");
        }
    }

    #[test]
    fn densities_by_class() {
        let pts = [(6.0, 0.0), (9.0, 1.0)];
        let (n, h) = pair_densities(&spec(1, SpinSymmetry::Symmetric, 0.5), &pts).unwrap();
        assert!(n.iter().all(|&v| v > 0.0) && h.iter().all(|&v| v == 0.0));
        let (n, h) = pair_densities(&spec(1, SpinSymmetry::SameUp, 0.0), &pts).unwrap();
        assert_eq!(n, h);
    }

    #[test]
    fn saf_is_normalized_and_exchange_symmetric() {
        // Σ∬|ξ̃|² factorizes into Θ, angular and radial parts; the radial part is
        // (1/2π)² by Parseval, so the angular integral is checked by quadrature here.
        for (m, sym) in [(0, SpinSymmetry::Symmetric), (2, SpinSymmetry::Symmetric), (1, SpinSymmetry::Antisymmetric), (3, SpinSymmetry::SameDown)] {
            let s = spec(m, sym, 0.9);
            let t = s.theta();
            let theta_sum: f64 = t.iter().flatten().map(|v| v.norm_sqr()).sum();
            let n = 256;
            let h = 2.0 * PI / n as f64;
            let mut ang = 0.0;
            for a in 0..n {
                for b in 0..n {
                    ang += s.angular_factor((a as f64 - b as f64) * h).norm_sqr() * h * h;
                }
            }
            let total = s.norm_factor().powi(2) * theta_sum * ang / (2.0 * PI).powi(2);
            assert!((total - 1.0).abs() < 1e-8, "{m} {sym:?}: {total}");
            let x = s.amplitude(Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), 0.4, 2.1);
            let y = s.amplitude(Complex64::new(-0.2, 0.4), Complex64::new(0.3, 0.1), 2.1, 0.4);
            for l in 0..2 {
                for lp in 0..2 {
                    assert!((x[l][lp] - y[lp][l]).norm() < 1e-15);
                }
            }
        }
    }
}
