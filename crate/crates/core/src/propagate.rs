//! Exact spectral stepping of the paraxial equation `2ik₀∂zΨ = −∇²_T Ψ` and
//! the discrete continuity check.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result, Warning};
use crate::field::{ScalarField, SpinorField, VectorField2D};
use crate::observables::{currents, densities};
use crate::spectral::{fd4_divergence, wavenumbers, Fft2};

/// Fraction of the slice norm tolerated inside the guard band before warning.
pub const BORDER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    /// Step in units of λ₀; negative values propagate backwards.
    pub dz: f64,
    pub n_steps: usize,
    /// Width of the monitored border strip as a fraction of each grid dimension.
    pub guard_band: f64,
}

impl PropagationPlan {
    pub fn new(dz: f64, n_steps: usize) -> Result<Self> {
        let plan = Self { dz, n_steps, guard_band: 0.1 };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dz == 0.0 || !self.dz.is_finite() {
            return Err(Error::InvalidParameter("dz must be finite and nonzero".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if !(0.0..0.5).contains(&self.guard_band) {
            return Err(Error::InvalidParameter("guard_band must lie in [0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Propagated field together with any border-energy warnings.
#[derive(Debug, Clone)]
pub struct Propagated {
    pub field: SpinorField,
    pub warnings: Vec<Warning>,
}

/// Advances `f` by `n_steps · dz` using the transfer function
/// `exp(−i(kx² + ky²)dz/(2k₀))` on each polarization component.
pub fn propagate(f: &SpinorField, plan: &PropagationPlan) -> Result<Propagated> {
    plan.validate()?;
    f.check_finite()?;
    let grid = f.grid;
    let fft = Fft2::new(&grid);
    let kx = wavenumbers(grid.nx, grid.dx);
    let ky = wavenumbers(grid.ny, grid.dy);
    let k0 = grid.k0();
    let transfer = Array2::from_shape_fn(grid.shape(), |(j, i)| {
        let k2 = kx[i] * kx[i] + ky[j] * ky[j];
        Complex64::from_polar(1.0, -k2 * plan.dz / (2.0 * k0))
    });

    let mut comps = [f.psi_plus.clone(), f.psi_minus.clone()];
    let mut warnings = Vec::new();
    for step in 1..=plan.n_steps {
        for c in comps.iter_mut() {
            fft.forward(c);
            Zip::from(&mut *c).and(&transfer).for_each(|v, t| *v *= t);
            fft.inverse(c);
        }
        let fraction = border_fraction(&comps, plan.guard_band);
        if fraction > BORDER_TOLERANCE {
            warnings.push(Warning::BorderEnergy { step, fraction });
        }
    }
    let [psi_plus, psi_minus] = comps;
    let field = SpinorField {
        grid: grid.at_z(grid.z + plan.n_steps as f64 * plan.dz),
        psi_plus,
        psi_minus,
    };
    field.check_finite()?;
    Ok(Propagated { field, warnings })
}

fn border_fraction(comps: &[Array2<Complex64>; 2], band: f64) -> f64 {
    let (ny, nx) = comps[0].dim();
    let bx = (band * nx as f64).ceil() as usize;
    let by = (band * ny as f64).ceil() as usize;
    let (mut total, mut edge) = (0.0, 0.0);
    for c in comps {
        for ((j, i), v) in c.indexed_iter() {
            let w = v.norm_sqr();
            total += w;
            if i < bx || j < by || i + bx >= nx || j + by >= ny {
                edge += w;
            }
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}

/// Relative continuity residual `max|(n₊ − n₋)/dz + ∇·j| / max|∇·j|` for a
/// density sampled on slices at `z ∓ dz/2` and a current at the midpoint.
///
/// The divergence uses fourth-order central differences; samples within two
/// cells of the border are skipped. A vanishing current and density change
/// gives 0.
pub fn density_continuity_defect(
    n_minus: &ScalarField,
    n_plus: &ScalarField,
    j: &VectorField2D,
    dz: f64,
) -> Result<f64> {
    n_minus.grid.require_same_transverse(&n_plus.grid)?;
    n_minus.grid.require_same_transverse(&j.grid)?;
    if dz == 0.0 || !dz.is_finite() {
        return Err(Error::InvalidParameter("dz must be finite and nonzero".into()));
    }
    let grid = j.grid;
    let div = fd4_divergence(&j.vx, &j.vy, &grid);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for jj in 2..grid.ny.saturating_sub(2) {
        for ii in 2..grid.nx.saturating_sub(2) {
            let d = div[[jj, ii]];
            let dn = (n_plus.values[[jj, ii]] - n_minus.values[[jj, ii]]) / dz;
            worst = worst.max((dn + d).abs());
            scale = scale.max(d.abs());
        }
    }
    if worst == 0.0 {
        return Ok(0.0);
    }
    Ok(worst / scale)
}

/// Photon-number continuity residual from slices at `z ∓ dz/2` and the midpoint slice.
pub fn continuity_defect(
    f_minus: &SpinorField,
    f_plus: &SpinorField,
    f_mid: &SpinorField,
    dz: f64,
) -> Result<f64> {
    let (n_minus, _) = densities(f_minus);
    let (n_plus, _) = densities(f_plus);
    let (j, _) = currents(f_mid);
    density_continuity_defect(&n_minus, &n_plus, &j, dz)
}

/// Helicity continuity residual, same conventions as [`continuity_defect`].
pub fn helicity_continuity_defect(
    f_minus: &SpinorField,
    f_plus: &SpinorField,
    f_mid: &SpinorField,
    dz: f64,
) -> Result<f64> {
    let (_, h_minus) = densities(f_minus);
    let (_, h_plus) = densities(f_plus);
    let (_, jh) = currents(f_mid);
    density_continuity_defect(&h_minus, &h_plus, &jh, dz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{synthesize, BeamSpec, PolarizationKind, PolarizationSpec, Profile};
    use crate::grid::TransverseGrid;
    use std::f64::consts::PI;

    fn lg_field(p: u32, m: i32, grid: &TransverseGrid) -> SpinorField {
        let spec = BeamSpec::single(
            Complex64::new(1.0, 0.0),
            PolarizationSpec::new(PolarizationKind::LinearX),
            Profile::LaguerreGauss { p, m, w0: 6.0 },
        );
        synthesize(&spec, grid).unwrap()
    }

    #[test]
    fn forward_then_back_is_identity() {
        let g = TransverseGrid::centered(128, 64.0).unwrap();
        let f = lg_field(1, 2, &g);
        let out = propagate(&f, &PropagationPlan::new(25.0, 1).unwrap()).unwrap().field;
        let back = propagate(&out, &PropagationPlan::new(-25.0, 1).unwrap()).unwrap().field;
        assert!(back.max_abs_diff(&f) < 1e-12 * f.max_abs());
        assert_eq!(back.grid.z, 0.0);
    }

    #[test]
    fn norm_is_conserved_and_steps_compose() {
        let g = TransverseGrid::centered(128, 64.0).unwrap();
        let f = lg_field(0, 1, &g);
        let two = propagate(&f, &PropagationPlan::new(10.0, 2).unwrap()).unwrap().field;
        let one = propagate(&f, &PropagationPlan::new(20.0, 1).unwrap()).unwrap().field;
        assert!(two.max_abs_diff(&one) < 1e-12 * f.max_abs());
        assert!((two.norm_sqr() - f.norm_sqr()).abs() < 1e-12 * f.norm_sqr());
        assert_eq!(two.grid.z, 20.0);
    }

    #[test]
    fn gaussian_spreads_by_root_two_at_rayleigh_length() {
        // Oracle: |q(z_R)|² = 2, so the 1/e² intensity radius grows to √2·w₀.
        let g = TransverseGrid::centered(256, 96.0).unwrap();
        let f = lg_field(0, 0, &g);
        let zr = PI * 36.0;
        let out = propagate(&f, &PropagationPlan::new(zr, 1).unwrap()).unwrap().field;
        let row = g.ny / 2;
        let c = g.nx / 2;
        let i0 = out.psi_plus[[row, c]].norm_sqr();
        let target = i0 * (-2.0f64).exp();
        let mut radius = 0.0;
        for i in c..g.nx - 1 {
            let (a, b) = (out.psi_plus[[row, i]].norm_sqr(), out.psi_plus[[row, i + 1]].norm_sqr());
            if a >= target && b < target {
                radius = g.x(i) + (a - target) / (a - b) * g.dx;
                break;
            }
        }
        let expected = 2f64.sqrt() * 6.0;
        assert!((radius - expected).abs() < 0.01 * expected, "{radius}");
    }

    #[test]
    fn border_energy_is_flagged() {
        let g = TransverseGrid::centered(64, 24.0).unwrap();
        let f = lg_field(0, 0, &g);
        let out = propagate(&f, &PropagationPlan::new(200.0, 2).unwrap()).unwrap();
        assert!(matches!(out.warnings[0], Warning::BorderEnergy { step: 1, .. }));
    }

    #[test]
    fn zero_field_has_zero_defect() {
        let g = TransverseGrid::centered(16, 8.0).unwrap();
        let z = SpinorField::zeros(g);
        assert_eq!(continuity_defect(&z, &z, &z, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn invalid_plans_are_rejected() {
        assert!(PropagationPlan::new(0.0, 1).is_err());
        assert!(PropagationPlan::new(1.0, 0).is_err());
    }
}
