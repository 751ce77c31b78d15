//! Field containers sampled on a [`TransverseGrid`] and the slice inner product.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TransverseGrid;

/// Two-component (circular basis) paraxial envelope `[Ψ₊, Ψ₋]` at one z-slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: TransverseGrid,
    pub psi_plus: Array2<Complex64>,
    pub psi_minus: Array2<Complex64>,
}

impl SpinorField {
    pub fn new(
        grid: TransverseGrid,
        psi_plus: Array2<Complex64>,
        psi_minus: Array2<Complex64>,
    ) -> Result<Self> {
        grid.validate()?;
        let shape = grid.shape();
        if psi_plus.dim() != shape || psi_minus.dim() != shape {
            return Err(Error::GridMismatch(format!(
                "component shapes {:?}/{:?} do not match grid {:?}",
                psi_plus.dim(),
                psi_minus.dim(),
                shape
            )));
        }
        let field = Self { grid, psi_plus, psi_minus };
        field.check_finite()?;
        Ok(field)
    }

    pub fn zeros(grid: TransverseGrid) -> Self {
        Self {
            grid,
            psi_plus: Array2::zeros(grid.shape()),
            psi_minus: Array2::zeros(grid.shape()),
        }
    }

    pub fn component(&self, pol: Polarization) -> &Array2<Complex64> {
        match pol {
            Polarization::Plus => &self.psi_plus,
            Polarization::Minus => &self.psi_minus,
        }
    }

    pub fn components(&self) -> [&Array2<Complex64>; 2] {
        [&self.psi_plus, &self.psi_minus]
    }

    pub fn check_finite(&self) -> Result<()> {
        let ok = self
            .psi_plus
            .iter()
            .chain(self.psi_minus.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Numerical("field contains non-finite samples".into()))
        }
    }

    /// `∫ (|Ψ₊|² + |Ψ₋|²) dx dy` over the slice.
    pub fn norm_sqr(&self) -> f64 {
        let s: f64 = self
            .psi_plus
            .iter()
            .chain(self.psi_minus.iter())
            .map(|c| c.norm_sqr())
            .sum();
        s * self.grid.cell_area()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            psi_plus: self.psi_plus.mapv(|c| c * factor),
            psi_minus: self.psi_minus.mapv(|c| c * factor),
        }
    }

    /// Largest pointwise |Ψ₊ − Ψ₊'| or |Ψ₋ − Ψ₋'|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = |a: &Array2<Complex64>, b: &Array2<Complex64>| {
            Zip::from(a)
                .and(b)
                .fold(0.0f64, |m, x, y| m.max((x - y).norm()))
        };
        d(&self.psi_plus, &other.psi_plus).max(d(&self.psi_minus, &other.psi_minus))
    }

    pub fn max_abs(&self) -> f64 {
        self.psi_plus
            .iter()
            .chain(self.psi_minus.iter())
            .fold(0.0f64, |m, c| m.max(c.norm()))
    }
}

/// Circular polarization component index λ = ±.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Plus,
    Minus,
}

impl Polarization {
    pub fn sign(self) -> f64 {
        match self {
            Polarization::Plus => 1.0,
            Polarization::Minus => -1.0,
        }
    }
}

/// Single complex scalar field on a grid (a beam profile, for instance).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: TransverseGrid,
    pub values: Array2<Complex64>,
}

/// Real scalar field with an optional mask of undefined samples.
///
/// Masked samples hold `NaN` as a sentinel and are skipped by reductions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: TransverseGrid,
    pub values: Array2<f64>,
    pub mask: Option<Array2<bool>>,
}

impl ScalarField {
    pub fn new(grid: TransverseGrid, values: Array2<f64>) -> Self {
        Self { grid, values, mask: None }
    }

    /// Applies `mask` (true = undefined) and writes the sentinel into masked samples.
    pub fn with_mask(mut self, mask: Array2<bool>) -> Self {
        Zip::from(&mut self.values).and(&mask).for_each(|v, &m| {
            if m {
                *v = f64::NAN;
            }
        });
        self.mask = Some(mask);
        self
    }

    pub fn is_masked(&self, j: usize, i: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[[j, i]])
    }

    /// Iterator over unmasked sample values.
    pub fn unmasked(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .indexed_iter()
            .filter(move |((j, i), _)| !self.is_masked(*j, *i))
            .map(|(_, &v)| v)
    }

    pub fn unmasked_count(&self) -> usize {
        self.unmasked().count()
    }

    /// `(min, max)` over unmasked samples, `None` if everything is masked.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.unmasked().fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    pub fn max(&self) -> f64 {
        self.unmasked().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.unmasked().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.unmasked().sum::<f64>() * self.grid.cell_area()
    }
}

/// Real in-plane vector field `(vx, vy)` with an optional mask.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    pub grid: TransverseGrid,
    pub vx: Array2<f64>,
    pub vy: Array2<f64>,
    pub mask: Option<Array2<bool>>,
}

impl VectorField2D {
    pub fn new(grid: TransverseGrid, vx: Array2<f64>, vy: Array2<f64>) -> Self {
        Self { grid, vx, vy, mask: None }
    }

    pub fn with_mask(mut self, mask: Array2<bool>) -> Self {
        Zip::from(&mut self.vx)
            .and(&mut self.vy)
            .and(&mask)
            .for_each(|x, y, &m| {
                if m {
                    *x = f64::NAN;
                    *y = f64::NAN;
                }
            });
        self.mask = Some(mask);
        self
    }

    pub fn is_masked(&self, j: usize, i: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[[j, i]])
    }

    pub fn magnitude(&self) -> ScalarField {
        let mut values = Array2::zeros(self.grid.shape());
        Zip::from(&mut values)
            .and(&self.vx)
            .and(&self.vy)
            .for_each(|m, &x, &y| *m = x.hypot(y));
        let s = ScalarField::new(self.grid, values);
        match &self.mask {
            Some(mask) => s.with_mask(mask.clone()),
            None => s,
        }
    }

    pub fn x_component(&self) -> ScalarField {
        self.component(&self.vx)
    }

    pub fn y_component(&self) -> ScalarField {
        self.component(&self.vy)
    }

    fn component(&self, values: &Array2<f64>) -> ScalarField {
        ScalarField { grid: self.grid, values: values.clone(), mask: self.mask.clone() }
    }

    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for ((j, i), &x) in self.vx.indexed_iter() {
            if !self.is_masked(j, i) {
                m = m.max(x.hypot(self.vy[[j, i]]));
            }
        }
        m
    }
}

/// `Σ_λ ∫ conj(a_λ) b_λ dx dy` over the slice.
pub fn inner_product(a: &SpinorField, b: &SpinorField) -> Result<Complex64> {
    a.grid.require_same(&b.grid)?;
    let sum = |x: &Array2<Complex64>, y: &Array2<Complex64>| {
        Zip::from(x)
            .and(y)
            .fold(Complex64::new(0.0, 0.0), |acc, p, q| acc + p.conj() * q)
    };
    let s = sum(&a.psi_plus, &b.psi_plus) + sum(&a.psi_minus, &b.psi_minus);
    Ok(s * a.grid.cell_area())
}

/// Rescales the field so that its slice norm is one.
pub fn slice_normalize(f: &SpinorField) -> Result<SpinorField> {
    let n2 = f.norm_sqr();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::ZeroField);
    }
    Ok(f.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn grid() -> TransverseGrid {
        TransverseGrid::centered(16, 8.0).unwrap()
    }

    fn ramp(g: TransverseGrid, seed: f64) -> SpinorField {
        let p = Array2::from_shape_fn(g.shape(), |(j, i)| {
            Complex64::new((i as f64 * 0.3 + seed).sin(), (j as f64 * 0.2 - seed).cos())
        });
        let m = Array2::from_shape_fn(g.shape(), |(j, i)| {
            Complex64::new((j as f64 * 0.1).cos() * seed, i as f64 * 0.05)
        });
        SpinorField::new(g, p, m).unwrap()
    }

    #[test]
    fn rejects_shape_mismatch_and_nan() {
        let g = grid();
        let ok = Array2::zeros(g.shape());
        assert!(SpinorField::new(g, Array2::zeros((3, 3)), ok.clone()).is_err());
        let mut bad = ok.clone();
        bad[[0, 0]] = Complex64::new(f64::NAN, 0.0);
        assert!(SpinorField::new(g, ok, bad).is_err());
    }

    #[test]
    fn inner_product_requires_matching_grids() {
        let a = ramp(grid(), 0.4);
        let b = ramp(grid().at_z(1.0), 0.4);
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn normalization_is_scale_invariant_and_idempotent() {
        let f = ramp(grid(), 0.7);
        let n1 = slice_normalize(&f).unwrap();
        assert!((inner_product(&n1, &n1).unwrap().re - 1.0).abs() < 1e-12);
        let n3 = slice_normalize(&f.scaled(Complex64::new(3.0, 0.0))).unwrap();
        assert!(n1.max_abs_diff(&n3) <= 1e-15 * n1.max_abs());
        let again = slice_normalize(&n1).unwrap();
        assert!(n1.max_abs_diff(&again) <= 1e-15 * n1.max_abs());
    }

    #[test]
    fn zero_field_cannot_be_normalized() {
        assert!(matches!(
            slice_normalize(&SpinorField::zeros(grid())),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn masked_samples_are_skipped() {
        let g = grid();
        let mut mask = Array2::from_elem(g.shape(), false);
        mask[[0, 0]] = true;
        let s = ScalarField::new(g, Array2::from_elem(g.shape(), 2.0)).with_mask(mask);
        assert!(s.values[[0, 0]].is_nan());
        assert_eq!(s.unmasked_count(), g.len() - 1);
        assert_eq!(s.range(), Some((2.0, 2.0)));
    }
}
