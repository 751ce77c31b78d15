//! 2D FFTs, spectral derivatives and finite-difference stencils on periodic grids.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::TransverseGrid;

/// Forward and inverse 2D transforms for one grid shape.
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(grid: &TransverseGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx: grid.nx,
            ny: grid.ny,
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_y: planner.plan_fft_forward(grid.ny),
            inv_y: planner.plan_fft_inverse(grid.ny),
        }
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, a: &mut Array2<Complex64>) {
        self.apply(a, &self.fwd_x, &self.fwd_y);
    }

    /// Inverse transform including the `1/(nx·ny)` factor.
    pub fn inverse(&self, a: &mut Array2<Complex64>) {
        self.apply(a, &self.inv_x, &self.inv_y);
        let s = 1.0 / (self.nx * self.ny) as f64;
        a.mapv_inplace(|c| c * s);
    }

    fn apply(&self, a: &mut Array2<Complex64>, fx: &Arc<dyn Fft<f64>>, fy: &Arc<dyn Fft<f64>>) {
        assert_eq!(a.dim(), (self.ny, self.nx));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nx.max(self.ny)];
        for mut row in a.axis_iter_mut(Axis(0)) {
            let b = &mut buf[..self.nx];
            for (d, s) in b.iter_mut().zip(row.iter()) {
                *d = *s;
            }
            fx.process(b);
            for (d, s) in row.iter_mut().zip(b.iter()) {
                *d = *s;
            }
        }
        for mut col in a.axis_iter_mut(Axis(1)) {
            let b = &mut buf[..self.ny];
            for (d, s) in b.iter_mut().zip(col.iter()) {
                *d = *s;
            }
            fy.process(b);
            for (d, s) in col.iter_mut().zip(b.iter()) {
                *d = *s;
            }
        }
    }
}

/// Angular wavenumbers in FFT order for `n` samples of spacing `d`.
pub fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let signed = if k <= n / 2 { k as isize } else { k as isize - n as isize };
            2.0 * PI * signed as f64 / (n as f64 * d)
        })
        .collect()
}

/// Wavenumbers for first derivatives: the unpaired Nyquist mode of an even
/// length is zeroed so real fields stay real.
fn derivative_wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let mut k = wavenumbers(n, d);
    if n % 2 == 0 {
        k[n / 2] = 0.0;
    }
    k
}

/// Spectral `(∂x, ∂y)` of a periodic complex array.
pub fn gradient(values: &Array2<Complex64>, grid: &TransverseGrid) -> (Array2<Complex64>, Array2<Complex64>) {
    gradient_with(&Fft2::new(grid), values, grid)
}

pub fn gradient_with(
    fft: &Fft2,
    values: &Array2<Complex64>,
    grid: &TransverseGrid,
) -> (Array2<Complex64>, Array2<Complex64>) {
    let kx = derivative_wavenumbers(grid.nx, grid.dx);
    let ky = derivative_wavenumbers(grid.ny, grid.dy);
    let mut spec = values.clone();
    fft.forward(&mut spec);
    let i = Complex64::new(0.0, 1.0);
    let mut gx = spec.clone();
    let mut gy = spec;
    for ((_, col), v) in gx.indexed_iter_mut() {
        *v *= i * kx[col];
    }
    for ((row, _), v) in gy.indexed_iter_mut() {
        *v *= i * ky[row];
    }
    fft.inverse(&mut gx);
    fft.inverse(&mut gy);
    (gx, gy)
}

/// Fourth-order central differences with periodic wrap.
pub fn fd4_gradient(values: &Array2<Complex64>, grid: &TransverseGrid) -> (Array2<Complex64>, Array2<Complex64>) {
    let (ny, nx) = values.dim();
    let gx = Array2::from_shape_fn((ny, nx), |(j, i)| {
        let at = |o: isize| values[[j, (i as isize + o).rem_euclid(nx as isize) as usize]];
        (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * grid.dx)
    });
    let gy = Array2::from_shape_fn((ny, nx), |(j, i)| {
        let at = |o: isize| values[[(j as isize + o).rem_euclid(ny as isize) as usize, i]];
        (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * grid.dy)
    });
    (gx, gy)
}

/// Fourth-order central-difference divergence of a real vector field.
///
/// Samples within two cells of the border are set to zero.
pub fn fd4_divergence(vx: &Array2<f64>, vy: &Array2<f64>, grid: &TransverseGrid) -> Array2<f64> {
    let (ny, nx) = vx.dim();
    Array2::from_shape_fn((ny, nx), |(j, i)| {
        if i < 2 || j < 2 || i + 2 >= nx || j + 2 >= ny {
            return 0.0;
        }
        let dx = (8.0 * (vx[[j, i + 1]] - vx[[j, i - 1]]) - (vx[[j, i + 2]] - vx[[j, i - 2]]))
            / (12.0 * grid.dx);
        let dy = (8.0 * (vy[[j + 1, i]] - vy[[j - 1, i]]) - (vy[[j + 2, i]] - vy[[j - 2, i]]))
            / (12.0 * grid.dy);
        dx + dy
    })
}
