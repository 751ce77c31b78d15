//! Local observables of a spinor field: densities, currents, flow velocities,
//! and orbital angular momentum expectation values.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField2D};
use crate::spectral::{fd4_gradient, gradient_with, Fft2};

/// Default relative density threshold below which velocities are masked.
pub const DEFAULT_MASK_THRESHOLD: f64 = 1e-6;

/// How transverse gradients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gradient {
    #[default]
    Spectral,
    FiniteDifference4,
}

/// Photon number density `|Ψ₊|² + |Ψ₋|²` and helicity density `|Ψ₊|² − |Ψ₋|²`.
pub fn densities(f: &SpinorField) -> (ScalarField, ScalarField) {
    let mut n = Array2::zeros(f.grid.shape());
    let mut h = Array2::zeros(f.grid.shape());
    Zip::from(&mut n)
        .and(&mut h)
        .and(&f.psi_plus)
        .and(&f.psi_minus)
        .for_each(|n, h, p, m| {
            let (a, b) = (p.norm_sqr(), m.norm_sqr());
            *n = a + b;
            *h = a - b;
        });
    (ScalarField::new(f.grid, n), ScalarField::new(f.grid, h))
}

/// Photon current `j_N` and helicity current `j_H` with spectral gradients.
pub fn currents(f: &SpinorField) -> (VectorField2D, VectorField2D) {
    currents_with(f, Gradient::Spectral)
}

/// `j_N = (1/k₀)Σ_λ Im(Ψ_λ*∇Ψ_λ)` and `j_H = (1/k₀)Σ_λ λ Im(Ψ_λ*∇Ψ_λ)`.
pub fn currents_with(f: &SpinorField, method: Gradient) -> (VectorField2D, VectorField2D) {
    let grid = f.grid;
    let fft = matches!(method, Gradient::Spectral).then(|| Fft2::new(&grid));
    let k0 = grid.k0();
    let shape = grid.shape();
    let mut jn = [Array2::zeros(shape), Array2::zeros(shape)];
    let mut jh = [Array2::zeros(shape), Array2::zeros(shape)];
    for (comp, sign) in [(&f.psi_plus, 1.0), (&f.psi_minus, -1.0)] {
        let (gx, gy) = match &fft {
            Some(fft) => gradient_with(fft, comp, &grid),
            None => fd4_gradient(comp, &grid),
        };
        for (axis, g) in [gx, gy].iter().enumerate() {
            Zip::from(&mut jn[axis])
                .and(&mut jh[axis])
                .and(comp)
                .and(g)
                .for_each(|n, h, psi, d| {
                    let flux = (psi.conj() * d).im / k0;
                    *n += flux;
                    *h += sign * flux;
                });
        }
    }
    let [nx, ny] = jn;
    let [hx, hy] = jh;
    (VectorField2D::new(grid, nx, ny), VectorField2D::new(grid, hx, hy))
}

/// Flow velocities `v_N = j_N/n` and `v_H = j_H/n`, masked where
/// `n < mask_threshold · max n`.
pub fn velocities(f: &SpinorField, mask_threshold: f64) -> Result<(VectorField2D, VectorField2D)> {
    let (pnd, _) = densities(f);
    let (jn, jh) = currents(f);
    velocities_from(&pnd, &jn, &jh, mask_threshold)
}

fn velocities_from(
    pnd: &ScalarField,
    jn: &VectorField2D,
    jh: &VectorField2D,
    mask_threshold: f64,
) -> Result<(VectorField2D, VectorField2D)> {
    if !(mask_threshold > 0.0 && mask_threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mask_threshold = {mask_threshold} outside (0, 1)"
        )));
    }
    let floor = mask_threshold * pnd.max();
    let mask = pnd.values.mapv(|n| !(n >= floor) || n == 0.0);
    let div = |a: &Array2<f64>| {
        Zip::from(a).and(&pnd.values).map_collect(|&j, &n| if n > 0.0 { j / n } else { 0.0 })
    };
    let vn = VectorField2D::new(pnd.grid, div(&jn.vx), div(&jn.vy)).with_mask(mask.clone());
    let vh = VectorField2D::new(pnd.grid, div(&jh.vx), div(&jh.vy)).with_mask(mask);
    Ok((vn, vh))
}

/// Every local observable of one slice.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    pub pnd: ScalarField,
    pub helicity: ScalarField,
    pub j_n: VectorField2D,
    pub j_h: VectorField2D,
    pub v_n: VectorField2D,
    pub v_h: VectorField2D,
    pub mask_threshold: f64,
}

impl ObservableSet {
    pub fn compute(f: &SpinorField, mask_threshold: f64, method: Gradient) -> Result<Self> {
        let (pnd, helicity) = densities(f);
        let (j_n, j_h) = currents_with(f, method);
        let (v_n, v_h) = velocities_from(&pnd, &j_n, &j_h, mask_threshold)?;
        Ok(Self { pnd, helicity, j_n, j_h, v_n, v_h, mask_threshold })
    }
}

/// Per-photon OAM expectation values in units of ħ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OamExpectation {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

/// OAM expectation from three slices at `z − dz`, `z`, `z + dz`.
///
/// `∂z` acts on the full field: the envelope derivative (central difference)
/// plus `ik₀Ψ` from the carrier.
pub fn oam_expectation(
    f_minus: &SpinorField,
    f: &SpinorField,
    f_plus: &SpinorField,
    dz: f64,
) -> Result<OamExpectation> {
    f.grid.require_same_transverse(&f_minus.grid)?;
    f.grid.require_same_transverse(&f_plus.grid)?;
    if dz == 0.0 || !dz.is_finite() {
        return Err(Error::InvalidParameter("dz must be finite and nonzero".into()));
    }
    let grid = f.grid;
    let norm = f.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::ZeroField);
    }
    let fft = Fft2::new(&grid);
    let k0 = grid.k0();
    let z = grid.z;
    let i = Complex64::new(0.0, 1.0);
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (psi, lo, hi) in [
        (&f.psi_plus, &f_minus.psi_plus, &f_plus.psi_plus),
        (&f.psi_minus, &f_minus.psi_minus, &f_plus.psi_minus),
    ] {
        let (gx, gy) = gradient_with(&fft, psi, &grid);
        for ((j, ii), v) in psi.indexed_iter() {
            let (x, y) = (grid.x(ii), grid.y(j));
            let dzf = (hi[[j, ii]] - lo[[j, ii]]) / (2.0 * dz) + i * k0 * v;
            let (dxf, dyf) = (gx[[j, ii]], gy[[j, ii]]);
            let c = v.conj() * -i;
            acc[0] += c * (y * dzf - z * dyf);
            acc[1] += c * (z * dxf - x * dzf);
            acc[2] += c * (x * dyf - y * dxf);
        }
    }
    let s = grid.cell_area() / norm;
    Ok(OamExpectation { lx: acc[0].re * s, ly: acc[1].re * s, lz: acc[2].re * s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{synthesize, BeamSpec, PolarizationKind, PolarizationSpec, Profile};
    use crate::grid::TransverseGrid;
    use std::f64::consts::PI;

    fn beam(kind: PolarizationKind, profile: Profile, g: &TransverseGrid) -> SpinorField {
        let spec = BeamSpec::single(Complex64::new(1.0, 0.0), PolarizationSpec::new(kind), profile);
        synthesize(&spec, g).unwrap()
    }

    fn lg(p: u32, m: i32) -> Profile {
        Profile::LaguerreGauss { p, m, w0: 10.0 }
    }

    #[test]
    fn linear_polarization_has_no_helicity() {
        let g = TransverseGrid::centered(64, 80.0).unwrap();
        let f = beam(PolarizationKind::LinearX, lg(1, 1), &g);
        let (n, h) = densities(&f);
        assert!(h.max_abs() < 1e-15 * n.max());
        let (_, jh) = currents(&f);
        assert!(jh.max_norm() < 1e-15);
    }

    #[test]
    fn helicity_bounded_by_density() {
        let g = TransverseGrid::centered(32, 60.0).unwrap();
        let spec = BeamSpec::single(
            Complex64::new(1.0, 0.0),
            PolarizationSpec::new(PolarizationKind::BlochUp),
            lg(0, 2),
        );
        let spec = BeamSpec {
            components: vec![
                spec.components[0],
                crate::beam::BeamComponent {
                    amplitude: Complex64::new(0.3, -0.2),
                    pol: PolarizationSpec::new(PolarizationKind::CircularMinus),
                    profile: lg(1, -1),
                },
            ],
        };
        let f = synthesize(&spec, &g).unwrap();
        let (n, h) = densities(&f);
        for (a, b) in n.values.iter().zip(h.values.iter()) {
            assert!(*a >= 0.0 && b.abs() <= *a);
        }
    }

    #[test]
    fn lg_current_is_azimuthal_with_closed_form_magnitude() {
        let g = TransverseGrid::centered(256, 100.0).unwrap();
        let f = beam(PolarizationKind::CircularPlus, lg(1, 1), &g);
        let (n, _) = densities(&f);
        let (j, jh) = currents(&f);
        let nmax = n.max();
        let mut tangential_max = 0.0f64;
        let mut radial_max = 0.0f64;
        for jj in 0..g.ny {
            for ii in 0..g.nx {
                let (x, y) = (g.x(ii), g.y(jj));
                let rho = x.hypot(y);
                if rho == 0.0 {
                    continue;
                }
                let (jx, jy) = (j.vx[[jj, ii]], j.vy[[jj, ii]]);
                radial_max = radial_max.max(((jx * x + jy * y) / rho).abs());
                tangential_max = tangential_max.max(((-jx * y + jy * x) / rho).abs());
                if n.values[[jj, ii]] > 0.01 * nmax {
                    let mag = jx.hypot(jy) * 2.0 * PI * rho;
                    assert!((mag / n.values[[jj, ii]] - 1.0).abs() < 1e-6);
                }
                assert_eq!(jh.vx[[jj, ii]], jx);
            }
        }
        assert!(radial_max < 1e-10 * tangential_max);
    }

    #[test]
    fn spectral_and_fd_currents_agree() {
        let g = TransverseGrid::centered(768, 100.0).unwrap();
        let f = beam(PolarizationKind::LinearY, lg(1, 2), &g);
        let (a, _) = currents_with(&f, Gradient::Spectral);
        let (b, _) = currents_with(&f, Gradient::FiniteDifference4);
        let scale = a.max_norm();
        let (n, _) = densities(&f);
        let floor = 0.01 * n.max();
        for ((jj, ii), v) in n.values.indexed_iter() {
            if *v > floor {
                let d = (a.vx[[jj, ii]] - b.vx[[jj, ii]]).hypot(a.vy[[jj, ii]] - b.vy[[jj, ii]]);
                assert!(d < 1e-6 * scale, "{d} vs {scale}");
            }
        }
    }

    #[test]
    fn velocity_of_unit_charge_at_one_wavelength() {
        let g = TransverseGrid::centered(256, 128.0).unwrap();
        let f = beam(PolarizationKind::CircularPlus, lg(0, 1), &g);
        let (v, _) = velocities(&f, DEFAULT_MASK_THRESHOLD).unwrap();
        // x = 1 λ₀ on the axis row.
        let c = g.nx / 2;
        let i = c + (1.0 / g.dx).round() as usize;
        assert!((g.x(i) - 1.0).abs() < 1e-12);
        let speed = v.vx[[c, i]].hypot(v.vy[[c, i]]);
        assert!((speed - 1.0 / (2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn gaussian_has_no_flow_and_zero_is_masked() {
        let g = TransverseGrid::centered(64, 80.0).unwrap();
        let f = beam(PolarizationKind::CircularPlus, lg(0, 0), &g);
        let (v, _) = velocities(&f, DEFAULT_MASK_THRESHOLD).unwrap();
        assert!(v.max_norm() < 1e-12);
        let f = beam(PolarizationKind::CircularPlus, lg(0, 3), &g);
        let (v, _) = velocities(&f, DEFAULT_MASK_THRESHOLD).unwrap();
        assert!(v.is_masked(32, 32));
        assert!(velocities(&f, 0.0).is_err());
    }

    #[test]
    fn uniform_polarization_scales_helicity_velocity() {
        let g = TransverseGrid::centered(128, 100.0).unwrap();
        let pol = PolarizationSpec::bloch(crate::beam::BlochState::Up, 0.9, 0.4);
        let spec = BeamSpec::single(Complex64::new(1.0, 0.0), pol, lg(1, 2));
        let f = synthesize(&spec, &g).unwrap();
        let s = pol.spinor();
        let c2 = s[0].norm_sqr() / s[1].norm_sqr();
        let factor = (c2 - 1.0) / (c2 + 1.0);
        let (vn, vh) = velocities(&f, 1e-6).unwrap();
        for ((j, i), x) in vn.vx.indexed_iter() {
            if !vn.is_masked(j, i) {
                assert!((vh.vx[[j, i]] - factor * x).abs() < 1e-9 * x.abs() + 1e-12);
            }
        }
    }

    #[test]
    fn lz_is_scale_and_phase_invariant() {
        let g = TransverseGrid::centered(128, 80.0).unwrap();
        let f = beam(PolarizationKind::LinearX, lg(1, 1), &g);
        let a = oam_expectation(&f, &f, &f, 1.0).unwrap();
        let s = f.scaled(Complex64::from_polar(3.0, 0.7));
        let b = oam_expectation(&s, &s, &s, 1.0).unwrap();
        assert!((a.lz - 1.0).abs() < 1e-6);
        assert!((a.lz - b.lz).abs() < 1e-12);
        assert!(oam_expectation(&f, &SpinorField::zeros(g), &f, 1.0).is_err());
    }
}
