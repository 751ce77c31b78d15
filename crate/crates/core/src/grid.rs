use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform, axis-aligned transverse sampling grid at one longitudinal position.
///
/// All lengths are in units of the reference wavelength, so with the default
/// `lambda0 = 1` the carrier wavenumber is `k0 = 2π`. Sample `(i, j)` (column
/// `i`, row `j`) sits at `(x0 + i·dx, y0 + j·dy)`; arrays are stored with shape
/// `(ny, nx)`, y outer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x0: f64,
    pub y0: f64,
    pub lambda0: f64,
    pub z: f64,
}

impl TransverseGrid {
    pub fn new(
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        x0: f64,
        y0: f64,
        lambda0: f64,
        z: f64,
    ) -> Result<Self> {
        let grid = Self { nx, ny, dx, dy, x0, y0, lambda0, z };
        grid.validate()?;
        Ok(grid)
    }

    /// Square grid of `n × n` samples with spacing `span / n`, centred on the axis.
    ///
    /// For even `n` the origin coincides with sample `(n/2, n/2)`.
    pub fn centered(n: usize, span: f64) -> Result<Self> {
        let d = span / n as f64;
        let origin = -((n / 2) as f64) * d;
        Self::new(n, n, d, d, origin, origin, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 || self.ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4×4 samples, got {}×{}",
                self.nx, self.ny
            )));
        }
        let finite = [self.dx, self.dy, self.x0, self.y0, self.lambda0, self.z]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidGrid("non-finite grid parameter".into()));
        }
        if self.dx <= 0.0 || self.dy <= 0.0 {
            return Err(Error::InvalidGrid("spacing must be positive".into()));
        }
        if self.lambda0 <= 0.0 {
            return Err(Error::InvalidGrid("lambda0 must be positive".into()));
        }
        Ok(())
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.nx - 1)
    }

    pub fn y_max(&self) -> f64 {
        self.y(self.ny - 1)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn at_z(&self, z: f64) -> Self {
        Self { z, ..*self }
    }

    /// Same sampling in the transverse plane; `z` may differ.
    pub fn same_transverse(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.x0 == other.x0
            && self.y0 == other.y0
            && self.lambda0 == other.lambda0
    }

    pub(crate) fn require_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    pub(crate) fn require_same_transverse(&self, other: &Self) -> Result<()> {
        if self.same_transverse(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Fractional sample coordinates of a physical point.
    pub fn to_index(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) / self.dx, (y - self.y0) / self.dy)
    }

    /// Whether the point lies in the closed rectangle spanned by the samples.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (fi, fj) = self.to_index(x, y);
        let eps = 1e-9;
        fi >= -eps
            && fj >= -eps
            && fi <= (self.nx - 1) as f64 + eps
            && fj <= (self.ny - 1) as f64 + eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(TransverseGrid::new(3, 8, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(TransverseGrid::new(8, 8, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(TransverseGrid::new(8, 8, 1.0, 1.0, 0.0, 0.0, -1.0, 0.0).is_err());
        assert!(TransverseGrid::new(8, 8, 1.0, f64::NAN, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn centered_grid_puts_origin_on_a_sample() {
        let g = TransverseGrid::centered(64, 32.0).unwrap();
        assert_eq!(g.x(32), 0.0);
        assert_eq!(g.y(32), 0.0);
        assert!((g.k0() - 2.0 * PI).abs() < 1e-15);
    }
}
