//! Loop circulations, winding numbers with π-jump resolution, topological
//! charge comparators and a plaquette singularity census.
//!
//! Phases are tracked along a closed loop by nearest-branch differences.
//! Intervals whose phase step exceeds π/2 are bisected until the step is
//! small or the interval has shrunk onto a zero of the field. A zero crossed
//! with a step of ±π is a *jump*; jumps along a loop are assigned +π, −π,
//! +π, … in order of arc position, so a closed zero curve crossed twice
//! contributes nothing while an open cut line contributes π.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::beam::{BeamEvaluator, BeamSpec};
use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::TransverseGrid;
use crate::observables::DEFAULT_MASK_THRESHOLD;
use crate::spectral::{gradient_with, Fft2};

const TAU: f64 = 2.0 * PI;

/// Closed sampling contour, traversed counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopShape {
    Circle { cx: f64, cy: f64, radius: f64 },
    /// Vertices in counter-clockwise order with the number of samples on each edge.
    Polygon { vertices: Vec<(f64, f64)>, edge_samples: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSpec {
    pub shape: LoopShape,
    pub n_samples: usize,
}

/// Smallest accepted `n_samples` for user loops.
pub const MIN_LOOP_SAMPLES: usize = 64;

impl LoopSpec {
    pub fn circle(cx: f64, cy: f64, radius: f64, n_samples: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() || !cx.is_finite() || !cy.is_finite() {
            return Err(Error::InvalidParameter(format!("circle radius {radius} must be positive")));
        }
        check_count(n_samples)?;
        Ok(Self { shape: LoopShape::Circle { cx, cy, radius }, n_samples })
    }

    /// Polygon with samples allocated to edges in proportion to their length.
    pub fn polygon(vertices: Vec<(f64, f64)>, n_samples: usize) -> Result<Self> {
        check_count(n_samples)?;
        check_polygon(&vertices)?;
        let lengths: Vec<f64> = edges(&vertices).map(|(a, b)| (b.0 - a.0).hypot(b.1 - a.1)).collect();
        let total: f64 = lengths.iter().sum();
        let edge_samples: Vec<usize> = lengths
            .iter()
            .map(|l| ((n_samples as f64 * l / total).round() as usize).max(1))
            .collect();
        let n = edge_samples.iter().sum();
        Ok(Self { shape: LoopShape::Polygon { vertices, edge_samples }, n_samples: n })
    }

    /// Rectangle through the outermost ring of grid samples, one loop sample per node.
    pub fn grid_boundary(grid: &TransverseGrid) -> Self {
        let (x0, y0, x1, y1) = (grid.x0, grid.y0, grid.x_max(), grid.y_max());
        let vertices = vec![(x0, y0), (x1, y0), (x1, y1), (x0, y1)];
        let edge_samples = vec![grid.nx - 1, grid.ny - 1, grid.nx - 1, grid.ny - 1];
        let n = edge_samples.iter().sum();
        Self { shape: LoopShape::Polygon { vertices, edge_samples }, n_samples: n }
    }

    /// Same contour with `factor` times as many samples.
    pub fn refined(&self, factor: usize) -> Self {
        let shape = match &self.shape {
            LoopShape::Circle { .. } => self.shape.clone(),
            LoopShape::Polygon { vertices, edge_samples } => LoopShape::Polygon {
                vertices: vertices.clone(),
                edge_samples: edge_samples.iter().map(|n| n * factor).collect(),
            },
        };
        Self { shape, n_samples: self.n_samples * factor }
    }

    /// Position and derivative `dr/ds` at loop parameter `s ∈ [0, 1)`.
    pub fn point(&self, s: f64) -> ((f64, f64), (f64, f64)) {
        match &self.shape {
            LoopShape::Circle { cx, cy, radius } => {
                let (sn, cs) = (TAU * s).sin_cos();
                ((cx + radius * cs, cy + radius * sn), (-TAU * radius * sn, TAU * radius * cs))
            }
            LoopShape::Polygon { vertices, edge_samples } => {
                let t = s.rem_euclid(1.0) * self.n_samples as f64;
                let mut start = 0.0;
                let last = vertices.len() - 1;
                for (e, (&n, (a, b))) in edge_samples.iter().zip(edges(vertices)).enumerate() {
                    let n = n as f64;
                    if t < start + n || e == last {
                        let u = (t - start) / n;
                        let d = (b.0 - a.0, b.1 - a.1);
                        let scale = self.n_samples as f64 / n;
                        return ((a.0 + u * d.0, a.1 + u * d.1), (d.0 * scale, d.1 * scale));
                    }
                    start += n;
                }
                unreachable!("polygon has at least three edges")
            }
        }
    }

    /// Node `k` of the base sampling.
    pub fn node(&self, k: usize) -> (f64, f64) {
        match &self.shape {
            LoopShape::Polygon { vertices, edge_samples } => {
                // Exact vertex coordinates at edge starts.
                let mut start = 0;
                for (e, &n) in edge_samples.iter().enumerate() {
                    if k < start + n {
                        let a = vertices[e];
                        let b = vertices[(e + 1) % vertices.len()];
                        let u = (k - start) as f64 / n as f64;
                        return (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1));
                    }
                    start += n;
                }
                vertices[0]
            }
            LoopShape::Circle { .. } => self.point(k as f64 / self.n_samples as f64).0,
        }
    }

    /// Whether `(x, y)` lies inside the loop; `None` when it is on the contour.
    pub fn encloses(&self, x: f64, y: f64) -> Option<bool> {
        match &self.shape {
            LoopShape::Circle { cx, cy, radius } => {
                let d = (x - cx).hypot(y - cy);
                if (d - radius).abs() <= 1e-12 * radius {
                    None
                } else {
                    Some(d < *radius)
                }
            }
            LoopShape::Polygon { vertices, .. } => {
                let mut inside = false;
                for (a, b) in edges(vertices) {
                    let cross = (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
                    let within = x >= a.0.min(b.0) && x <= a.0.max(b.0) && y >= a.1.min(b.1) && y <= a.1.max(b.1);
                    if cross == 0.0 && within {
                        return None;
                    }
                    if (a.1 > y) != (b.1 > y) && x < a.0 + (y - a.1) * (b.0 - a.0) / (b.1 - a.1) {
                        inside = !inside;
                    }
                }
                Some(inside)
            }
        }
    }

    /// Quadrature vectors `w_k` with `∮ v·dr ≈ Σ v(node k)·w_k`.
    ///
    /// Circles use the periodic trapezoid rule on the tangent; polygons the
    /// trapezoid rule along each straight edge.
    pub fn line_weights(&self) -> Vec<(f64, f64)> {
        let n = self.n_samples;
        match &self.shape {
            LoopShape::Circle { .. } => (0..n)
                .map(|k| {
                    let (_, d) = self.point(k as f64 / n as f64);
                    (d.0 / n as f64, d.1 / n as f64)
                })
                .collect(),
            LoopShape::Polygon { .. } => (0..n)
                .map(|k| {
                    let next = self.node((k + 1) % n);
                    let prev = self.node((k + n - 1) % n);
                    (0.5 * (next.0 - prev.0), 0.5 * (next.1 - prev.1))
                })
                .collect(),
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < MIN_LOOP_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "loop needs at least {MIN_LOOP_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

fn edges(v: &[(f64, f64)]) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn check_polygon(v: &[(f64, f64)]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::InvalidParameter("polygon needs at least 3 vertices".into()));
    }
    if v.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::InvalidParameter("polygon vertices must be finite".into()));
    }
    let area: f64 = edges(v).map(|(a, b)| a.0 * b.1 - b.0 * a.1).sum::<f64>() * 0.5;
    if !(area > 0.0) {
        return Err(Error::InvalidParameter(
            "polygon must be non-degenerate and counter-clockwise".into(),
        ));
    }
    let n = v.len();
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (p1, p2) = (v[i], v[(i + 1) % n]);
            let (q1, q2) = (v[j], v[(j + 1) % n]);
            let d1 = cross(p1, p2, q1);
            let d2 = cross(p1, p2, q2);
            let d3 = cross(q1, q2, p1);
            let d4 = cross(q1, q2, p2);
            if d1 * d2 <= 0.0 && d3 * d4 <= 0.0 {
                return Err(Error::InvalidParameter("polygon is not simple".into()));
            }
        }
    }
    Ok(())
}

/// Which scalar is tracked around the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Component {
    Plus,
    Minus,
    /// `Ψ₊ + Ψ₋`.
    Sum,
    /// Projection `conj(s₊)Ψ₊ + conj(s₋)Ψ₋` onto a polarization spinor.
    Along([Complex64; 2]),
}

impl Component {
    pub fn pick(&self, v: [Complex64; 2]) -> Complex64 {
        match self {
            Component::Plus => v[0],
            Component::Minus => v[1],
            Component::Sum => v[0] + v[1],
            Component::Along(s) => s[0].conj() * v[0] + s[1].conj() * v[1],
        }
    }
}

/// Field values for loop integrals: closed-form beam or sampled slice.
pub enum FieldSource<'a> {
    /// `oam` is the shared OAM index when every component carries the same `m`.
    Analytic { beam: BeamEvaluator, z: f64, uniform: Option<[Complex64; 2]>, oam: Option<i32> },
    Grid { field: &'a SpinorField, grads: [[Array2<Complex64>; 2]; 2] },
}

impl FieldSource<'static> {
    pub fn analytic(spec: &BeamSpec, lambda0: f64, z: f64) -> Result<Self> {
        Ok(FieldSource::Analytic {
            beam: BeamEvaluator::new(spec, lambda0)?,
            z,
            uniform: spec.uniform_polarization(),
            oam: {
                let m = spec.components[0].profile.m();
                spec.components.iter().all(|c| c.profile.m() == m).then_some(m)
            },
        })
    }
}

impl<'a> FieldSource<'a> {
    /// Sampled source; spectral gradients are precomputed for circulations.
    pub fn grid(field: &'a SpinorField) -> Self {
        let fft = Fft2::new(&field.grid);
        let (px, py) = gradient_with(&fft, &field.psi_plus, &field.grid);
        let (mx, my) = gradient_with(&fft, &field.psi_minus, &field.grid);
        FieldSource::Grid { field, grads: [[px, py], [mx, my]] }
    }

    pub fn k0(&self) -> f64 {
        match self {
            FieldSource::Analytic { beam, .. } => beam.k0(),
            FieldSource::Grid { field, .. } => field.grid.k0(),
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<[Complex64; 2]> {
        match self {
            FieldSource::Analytic { beam, z, .. } => Ok(beam.eval(x, y, *z)),
            FieldSource::Grid { field, .. } => {
                let b = Bilinear::at(&field.grid, x, y)?;
                Ok([b.apply(&field.psi_plus), b.apply(&field.psi_minus)])
            }
        }
    }

    /// Values and `[[∂xΨ₊, ∂yΨ₊], [∂xΨ₋, ∂yΨ₋]]`.
    pub fn eval_with_gradient(&self, x: f64, y: f64) -> Result<([Complex64; 2], [[Complex64; 2]; 2])> {
        match self {
            FieldSource::Analytic { beam, z, .. } => Ok(beam.eval_with_gradient(x, y, *z)),
            FieldSource::Grid { field, grads } => {
                let b = Bilinear::at(&field.grid, x, y)?;
                let v = [b.apply(&field.psi_plus), b.apply(&field.psi_minus)];
                let g = [
                    [b.apply(&grads[0][0]), b.apply(&grads[0][1])],
                    [b.apply(&grads[1][0]), b.apply(&grads[1][1])],
                ];
                Ok((v, g))
            }
        }
    }

    /// Exact winding of a closed-form single-OAM beam `f(ρ, z)e^{imφ}`: `m` if the
    /// loop encloses the axis, else 0. `None` for other sources or a loop through the axis.
    pub fn axis_winding(&self, lp: &LoopSpec) -> Option<i64> {
        match self {
            FieldSource::Analytic { oam: Some(m), .. } => lp.encloses(0.0, 0.0).map(|inside| if inside { *m as i64 } else { 0 }),
            _ => None,
        }
    }

    /// Common polarization spinor if the field is uniformly polarized.
    pub fn uniform_polarization(&self) -> Option<[Complex64; 2]> {
        match self {
            FieldSource::Analytic { uniform, .. } => *uniform,
            FieldSource::Grid { field, .. } => {
                let (mut best, mut at) = (0.0, (0, 0));
                for ((j, i), p) in field.psi_plus.indexed_iter() {
                    let n = p.norm_sqr() + field.psi_minus[[j, i]].norm_sqr();
                    if n > best {
                        best = n;
                        at = (j, i);
                    }
                }
                if best == 0.0 {
                    return None;
                }
                let r = best.sqrt();
                let s = [field.psi_plus[at] / r, field.psi_minus[at] / r];
                let tol = 1e-10 * r;
                let uniform = field
                    .psi_plus
                    .iter()
                    .zip(field.psi_minus.iter())
                    .all(|(p, m)| (p * s[1] - m * s[0]).norm() <= tol);
                uniform.then_some(s)
            }
        }
    }
}

struct Bilinear {
    j: usize,
    i: usize,
    tx: f64,
    ty: f64,
}

impl Bilinear {
    fn at(grid: &TransverseGrid, x: f64, y: f64) -> Result<Self> {
        if !grid.contains(x, y) {
            return Err(Error::OutsideGrid { x, y });
        }
        let (fi, fj) = grid.to_index(x, y);
        let i = (fi.floor().max(0.0) as usize).min(grid.nx - 2);
        let j = (fj.floor().max(0.0) as usize).min(grid.ny - 2);
        Ok(Self { j, i, tx: (fi - i as f64).clamp(0.0, 1.0), ty: (fj - j as f64).clamp(0.0, 1.0) })
    }

    fn apply(&self, a: &Array2<Complex64>) -> Complex64 {
        let (j, i, tx, ty) = (self.j, self.i, self.tx, self.ty);
        let bottom = a[[j, i]] * (1.0 - tx) + a[[j, i + 1]] * tx;
        let top = a[[j + 1, i]] * (1.0 - tx) + a[[j + 1, i + 1]] * tx;
        bottom * (1.0 - ty) + top * ty
    }
}

/// Phase of `b` relative to `a` in `(−π, π]`.
pub fn phase_step(a: Complex64, b: Complex64) -> f64 {
    let d = (b * a.conj()).arg();
    if d <= -PI {
        PI
    } else {
        d
    }
}

/// Maps an angle to `(−π, π]`.
fn wrap_phase(d: f64) -> f64 {
    let w = d - TAU * (d / TAU).round();
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// Relative amplitude (to the loop maximum) below which a sample counts as a zero.
    pub zero_fraction: f64,
    /// A zero-crossing step within this distance of ±π is a jump.
    pub jump_tolerance: f64,
    /// Start the jump sequence with −π instead of +π.
    pub first_jump_negative: bool,
    /// Maximum bisection depth per loop interval.
    pub max_depth: u32,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self { zero_fraction: 1e-8, jump_tolerance: 0.1, first_jump_negative: false, max_depth: 60 }
    }
}

/// A π-jump at a zero crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    /// Loop parameter in `[0, 1)`.
    pub arc: f64,
    /// `+1` or `−1`: the jump contributes `sign · π`.
    pub sign: i32,
}

/// One base sample of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Resolved phase change from the previous retained sample (0 for zero samples).
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Winding {
    pub winding: i64,
    pub total_phase: f64,
    pub converged: bool,
    pub jump_events: Vec<JumpEvent>,
    pub samples: Vec<LoopSample>,
    /// The loop runs along a zero set of a closed-form single-OAM beam, so the
    /// winding was taken from the enclosed axis instead of phase tracking.
    pub axis_fallback: bool,
}

struct Tracker<'s, 'a> {
    source: &'s FieldSource<'a>,
    component: Component,
    lp: &'s LoopSpec,
    eps: f64,
    opts: WindingOptions,
    jumps: Vec<JumpEvent>,
    converged: bool,
}

impl Tracker<'_, '_> {
    fn value(&self, s: f64) -> Result<Complex64> {
        let ((x, y), _) = self.lp.point(s);
        Ok(self.component.pick(self.source.eval(x, y)?))
    }

    fn is_jump(&self, step: f64) -> bool {
        (step.abs() - PI).abs() <= self.opts.jump_tolerance
    }

    fn jump(&mut self, arc: f64, step: f64) -> f64 {
        let first = if self.opts.first_jump_negative { -1 } else { 1 };
        let sign = if self.jumps.len() % 2 == 0 { first } else { -first };
        self.jumps.push(JumpEvent { arc: arc.rem_euclid(1.0), sign });
        sign as f64 * PI + (step - step.signum() * PI)
    }

    /// Resolved phase change from `a` to `b` (`a < b` in loop parameter, possibly beyond 1).
    fn resolve(&mut self, a: f64, va: Complex64, b: f64, vb: Complex64, depth: u32) -> Result<f64> {
        let step = phase_step(va, vb);
        if step.abs() <= 0.5 * PI {
            return Ok(step);
        }
        let small = va.norm().min(vb.norm()) < self.eps;
        if small && self.is_jump(step) {
            return Ok(self.jump(0.5 * (a + b), step));
        }
        if depth >= self.opts.max_depth {
            self.converged = false;
            return Ok(step);
        }
        let mut m = 0.5 * (a + b);
        let mut vm = self.value(m)?;
        if vm.norm() < self.eps {
            if self.is_jump(step) {
                return Ok(self.jump(m, step));
            }
            m = a + 0.37 * (b - a);
            vm = self.value(m)?;
            if vm.norm() < self.eps {
                self.converged = false;
                return Ok(step);
            }
        }
        Ok(self.resolve(a, va, m, vm, depth + 1)? + self.resolve(m, vm, b, vb, depth + 1)?)
    }
}

/// Integer winding of the chosen component around `lp`, with π-jumps resolved.
pub fn loop_winding(
    source: &FieldSource,
    component: Component,
    lp: &LoopSpec,
    opts: &WindingOptions,
) -> Result<Winding> {
    let n = lp.n_samples;
    let mut samples = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let s = k as f64 / n as f64;
        let (x, y) = lp.node(k);
        let v = component.pick(source.eval(x, y)?);
        values.push(v);
        samples.push(LoopSample { s, x, y, amplitude: v.norm(), phase: v.arg(), increment: 0.0 });
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if !(peak > 0.0) {
        return Err(Error::ZeroField);
    }
    let zeros = values.iter().filter(|v| v.norm() < opts.zero_fraction * peak).count();
    if zeros * 100 > n {
        if let Some(w) = source.axis_winding(lp) {
            return Ok(Winding {
                winding: w,
                total_phase: w as f64 * TAU,
                converged: true,
                jump_events: Vec::new(),
                samples,
                axis_fallback: true,
            });
        }
    }
    let mut tracker = Tracker {
        source,
        component,
        lp,
        eps: opts.zero_fraction * peak,
        opts: *opts,
        jumps: Vec::new(),
        converged: true,
    };
    let retained: Vec<usize> = (0..n).filter(|&k| values[k].norm() >= tracker.eps).collect();
    let mut total = 0.0;
    for (idx, &k) in retained.iter().enumerate() {
        let next = retained[(idx + 1) % retained.len()];
        let (a, b) = (k as f64 / n as f64, if next > k { next } else { next + n } as f64 / n as f64);
        let inc = tracker.resolve(a, values[k], b, values[next], 0)?;
        samples[next].increment = inc;
        total += inc;
    }
    let turns = total / TAU;
    let winding = turns.round();
    let excess = (turns - winding).abs();
    if excess > 1e-6 {
        return Err(Error::NonIntegerWinding { total, excess: excess * TAU });
    }
    tracker.jumps.sort_by(|a, b| a.arc.total_cmp(&b.arc));
    Ok(Winding {
        winding: winding as i64,
        total_phase: total,
        converged: tracker.converged,
        jump_events: tracker.jumps,
        samples,
        axis_fallback: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Photon,
    Helicity,
}

/// Circulation `κ = ∮ v·dr` in units of λ₀.
///
/// Samples where the density falls below the default velocity mask are
/// skipped. If more than 1 % are masked, a uniformly polarized field falls
/// back to `winding · λ₀` (scaled by `(C²−1)/(C²+1)` for helicity); anything
/// else is a [`Error::MaskedLoop`].
pub fn loop_circulation(source: &FieldSource, lp: &LoopSpec, which: Flow) -> Result<f64> {
    let n = lp.n_samples;
    let weights = lp.line_weights();
    let k0 = source.k0();
    let mut pnd = Vec::with_capacity(n);
    let mut flux = Vec::with_capacity(n);
    for k in 0..n {
        let (x, y) = lp.node(k);
        let (v, g) = source.eval_with_gradient(x, y)?;
        let mut j = [0.0, 0.0];
        for (l, sign) in [(0, 1.0), (1, -1.0)] {
            let w = if which == Flow::Helicity { sign } else { 1.0 };
            j[0] += w * (v[l].conj() * g[l][0]).im;
            j[1] += w * (v[l].conj() * g[l][1]).im;
        }
        pnd.push(v[0].norm_sqr() + v[1].norm_sqr());
        flux.push(j[0] * weights[k].0 + j[1] * weights[k].1);
    }
    let peak = pnd.iter().cloned().fold(0.0, f64::max);
    let floor = DEFAULT_MASK_THRESHOLD * peak;
    let masked = pnd.iter().filter(|&&d| d < floor || peak == 0.0).count();
    let fraction = masked as f64 / n as f64;
    if fraction > 0.01 {
        let spinor = source.uniform_polarization().ok_or(Error::MaskedLoop { fraction: 100.0 * fraction })?;
        let w = loop_winding(source, Component::Along(spinor), lp, &WindingOptions::default())?;
        let lambda0 = TAU / k0;
        let (a, b) = (spinor[0].norm_sqr(), spinor[1].norm_sqr());
        let factor = match which {
            Flow::Photon => 1.0,
            Flow::Helicity => (a - b) / (a + b),
        };
        return Ok(w.winding as f64 * lambda0 * factor);
    }
    let kappa: f64 = pnd
        .iter()
        .zip(&flux)
        .filter(|(d, _)| **d >= floor)
        .map(|(d, f)| f / d)
        .sum();
    Ok(kappa / k0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcVariant {
    /// `(1/2π)∮ d(arg ψ)` with nearest-branch steps, ties to +π.
    Arg,
    /// `(1/2π) Im ∮ (∂ₛψ)/ψ ds` by the midpoint rule.
    Field,
}

/// Literature topological-charge definitions, without jump correction.
pub fn berry_tc(source: &FieldSource, component: Component, lp: &LoopSpec, variant: TcVariant) -> Result<f64> {
    match variant {
        TcVariant::Arg => {
            let n = lp.n_samples;
            let vals = (0..n)
                .map(|k| {
                    let (x, y) = lp.node(k);
                    Ok(component.pick(source.eval(x, y)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let total: f64 = (0..n).map(|k| phase_step(vals[k], vals[(k + 1) % n])).sum();
            Ok(total / TAU)
        }
        TcVariant::Field => {
            let coarse = field_tc(source, component, lp)?;
            let fine = field_tc(source, component, &lp.refined(2))?;
            if (fine - coarse).abs() > 1e-3 {
                return Err(Error::NotConverged(format!(
                    "field charge changed from {coarse} to {fine} on doubling the samples"
                )));
            }
            Ok(fine)
        }
    }
}

fn field_tc(source: &FieldSource, component: Component, lp: &LoopSpec) -> Result<f64> {
    let n = lp.n_samples;
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64;
        let ((x, y), d) = lp.point(s);
        let (v, g) = source.eval_with_gradient(x, y)?;
        let e = component.pick(v);
        let de = component.pick([g[0][0], g[1][0]]) * d.0 + component.pick([g[0][1], g[1][1]]) * d.1;
        terms.push((e, de));
    }
    let peak = terms.iter().fold(0.0f64, |m, (e, _)| m.max(e.norm()));
    if !(peak > 0.0) {
        return Ok(0.0);
    }
    let eps = 1e-8 * peak;
    let sum: f64 = terms
        .iter()
        .filter(|(e, _)| e.norm() >= eps)
        .map(|(e, de)| (de / e).im)
        .sum();
    Ok(sum / n as f64 / TAU)
}

/// Everything known about one loop.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexReport {
    pub winding: i64,
    pub total_phase: f64,
    pub converged: bool,
    pub jump_events: Vec<JumpEvent>,
    pub samples: Vec<LoopSample>,
    pub axis_fallback: bool,
    /// Photon circulation in λ₀; `None` when the loop is masked and no fallback applies.
    pub kappa_n: Option<f64>,
    pub kappa_h: Option<f64>,
    pub tc_berry_arg: f64,
    /// `None` when the field-based charge does not converge.
    pub tc_berry_field: Option<f64>,
}

pub fn vortex_report(
    source: &FieldSource,
    component: Component,
    lp: &LoopSpec,
    opts: &WindingOptions,
) -> Result<VortexReport> {
    let w = loop_winding(source, component, lp, opts)?;
    let tolerate = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::MaskedLoop { .. } | Error::NotConverged(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(VortexReport {
        winding: w.winding,
        total_phase: w.total_phase,
        converged: w.converged,
        jump_events: w.jump_events,
        samples: w.samples,
        axis_fallback: w.axis_fallback,
        kappa_n: tolerate(loop_circulation(source, lp, Flow::Photon))?,
        kappa_h: tolerate(loop_circulation(source, lp, Flow::Helicity))?,
        tc_berry_arg: berry_tc(source, component, lp, TcVariant::Arg)?,
        tc_berry_field: tolerate(berry_tc(source, component, lp, TcVariant::Field))?,
    })
}

/// A plaquette with nonzero phase circulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    /// Plaquette centre.
    pub x: f64,
    pub y: f64,
    pub charge: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Census {
    pub grid: TransverseGrid,
    pub singularities: Vec<Singularity>,
    /// Samples on or next to a zero of the field.
    pub zero_raster: Array2<bool>,
}

impl Census {
    pub fn net_charge(&self) -> i64 {
        self.singularities.iter().map(|s| s.charge as i64).sum()
    }

    /// Net charge of plaquettes whose centre lies within `radius` of `(cx, cy)`.
    pub fn net_charge_within(&self, cx: f64, cy: f64, radius: f64) -> i64 {
        self.singularities
            .iter()
            .filter(|s| (s.x - cx).hypot(s.y - cy) < radius)
            .map(|s| s.charge as i64)
            .sum()
    }
}

/// Relative density below which a sample is a zero in the raster.
pub const ZERO_FRACTION: f64 = 1e-8;

/// Plaquette charges of one component plus a raster of zero-amplitude samples.
///
/// Each grid edge gets one wrapped phase difference, shared by the two
/// plaquettes on either side, so charges summed over any region equal the
/// phase winding along its boundary. A sample joins the zero raster when its
/// density is below `ZERO_FRACTION` of the maximum, or when it is the weaker
/// end of a neighbour pair whose phases differ by more than π/2 (a zero lies
/// between them).
pub fn singularity_census(f: &SpinorField, component: Component) -> Census {
    let grid = f.grid;
    let (ny, nx) = grid.shape();
    let psi = Array2::from_shape_fn((ny, nx), |(j, i)| component.pick([f.psi_plus[[j, i]], f.psi_minus[[j, i]]]));
    // Differences of node phases, so every plaquette sum is an exact multiple
    // of 2π even when a node sits on a zero.
    let arg = psi.mapv(|v| v.arg());
    let ex = Array2::from_shape_fn((ny, nx - 1), |(j, i)| wrap_phase(arg[[j, i + 1]] - arg[[j, i]]));
    let ey = Array2::from_shape_fn((ny - 1, nx), |(j, i)| wrap_phase(arg[[j + 1, i]] - arg[[j, i]]));
    let mut singularities = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let sum = ex[[j, i]] + ey[[j, i + 1]] - ex[[j + 1, i]] - ey[[j, i]];
            let charge = (sum / TAU).round() as i32;
            if charge != 0 {
                singularities.push(Singularity {
                    x: grid.x(i) + 0.5 * grid.dx,
                    y: grid.y(j) + 0.5 * grid.dy,
                    charge,
                });
            }
        }
    }

    let pnd = Array2::from_shape_fn((ny, nx), |(j, i)| f.psi_plus[[j, i]].norm_sqr() + f.psi_minus[[j, i]].norm_sqr());
    let pmax = pnd.iter().cloned().fold(0.0, f64::max);
    let amax = psi.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let floor = 1e-12 * amax;
    let mut raster = pnd.mapv(|d| d < ZERO_FRACTION * pmax);
    let mut mark = |a: (usize, usize), b: (usize, usize)| {
        let (va, vb) = (psi[a], psi[b]);
        if va.norm().max(vb.norm()) < floor {
            return;
        }
        if (va.conj() * vb).re < 0.0 {
            let weaker = if va.norm() <= vb.norm() { a } else { b };
            raster[weaker] = true;
        }
    };
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                mark((j, i), (j, i + 1));
            }
            if j + 1 < ny {
                mark((j, i), (j + 1, i));
            }
        }
    }
    Census { grid, singularities, zero_raster: raster }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{
        bessel_zero, synthesize, BeamComponent, PolarizationKind, PolarizationSpec, Profile,
    };

    fn circ() -> PolarizationSpec {
        PolarizationSpec::new(PolarizationKind::CircularPlus)
    }

    fn lg_spec(p: u32, m: i32) -> BeamSpec {
        BeamSpec::single(Complex64::new(1.0, 0.0), circ(), Profile::LaguerreGauss { p, m, w0: 10.0 })
    }

    fn mixed(m: i32, n: i32) -> BeamSpec {
        let bg = |m| BeamComponent {
            amplitude: Complex64::new(1.0, 0.0),
            pol: circ(),
            profile: Profile::BesselGauss { p: 1, m, w0: 10.0, theta_p: 0.05 * PI },
        };
        BeamSpec::new(vec![bg(m), bg(n)]).unwrap()
    }

    fn wind(spec: &BeamSpec, r: f64) -> Winding {
        let src = FieldSource::analytic(spec, 1.0, 0.0).unwrap();
        let lp = LoopSpec::circle(0.0, 0.0, r, 4096).unwrap();
        loop_winding(&src, Component::Sum, &lp, &WindingOptions::default()).unwrap()
    }

    #[test]
    fn census_handles_zero_on_a_node() {
        let grid = TransverseGrid::centered(64, 40.0).unwrap();
        let f = synthesize(&lg_spec(0, -2), &grid).unwrap();
        assert_eq!(f.psi_plus[[32, 32]].norm(), 0.0);
        assert_eq!(singularity_census(&f, Component::Sum).net_charge(), -2);
    }

    #[test]
    fn loop_on_a_zero_circle_uses_the_axis() {
        let w = wind(&lg_spec(1, -1), 10.0);
        assert!(w.axis_fallback);
        assert_eq!(w.winding, -1);
        assert!(!wind(&lg_spec(1, -1), 5.0).axis_fallback);
    }

    #[test]
    fn lg_winding_equals_index() {
        assert_eq!(wind(&lg_spec(1, 3), 20.0).winding, 3);
        assert_eq!(wind(&lg_spec(0, 0), 10.0).winding, 0);
        assert_eq!(wind(&lg_spec(2, -2), 5.0).winding, -2);
    }

    #[test]
    fn mixed_beam_follows_jump_convention() {
        let w = wind(&mixed(1, 4), 10.0);
        assert_eq!(w.winding, 3);
        assert!(w.converged);
        let signs: Vec<i32> = w.jump_events.iter().map(|j| j.sign).collect();
        assert_eq!(signs, vec![1, -1, 1]);
        for (ev, phi) in w.jump_events.iter().zip([PI / 3.0, PI, 5.0 * PI / 3.0]) {
            assert!((ev.arc * TAU - phi).abs() < 1e-6);
        }
        let src = FieldSource::analytic(&mixed(1, 4), 1.0, 0.0).unwrap();
        let lp = LoopSpec::circle(0.0, 0.0, 10.0, 4096).unwrap();
        let flipped = WindingOptions { first_jump_negative: true, ..Default::default() };
        assert_eq!(loop_winding(&src, Component::Sum, &lp, &flipped).unwrap().winding, 2);
    }

    #[test]
    fn parity_rule() {
        for m in 0..=4 {
            for n in 0..=4 {
                let w = wind(&mixed(m, n), 10.0).winding;
                let s = (m + n) as i64;
                let expect = if s % 2 == 0 { s / 2 } else { (s + 1) / 2 };
                assert_eq!(w, expect, "({m}, {n})");
            }
        }
    }

    #[test]
    fn even_crossing_of_a_zero_circle_cancels() {
        // L₁¹ vanishes on ρ = w₀; an off-centre loop crosses that circle twice.
        let spec = lg_spec(1, 1);
        let src = FieldSource::analytic(&spec, 1.0, 0.0).unwrap();
        let crossing = LoopSpec::circle(10.0, 0.0, 3.0, 1024).unwrap();
        let w = loop_winding(&src, Component::Sum, &crossing, &WindingOptions::default()).unwrap();
        assert_eq!(w.jump_events.len(), 2);
        let inside = LoopSpec::circle(5.0, 0.0, 2.0, 1024).unwrap();
        let w2 = loop_winding(&src, Component::Sum, &inside, &WindingOptions::default()).unwrap();
        assert_eq!(w.winding, w2.winding);
        assert_eq!(w.winding, 0);
    }

    #[test]
    fn circulation_quantized_for_lg() {
        for m in [-2, 1, 3] {
            let src = FieldSource::analytic(&lg_spec(1, m), 1.0, 0.0).unwrap();
            let lp = LoopSpec::circle(0.0, 0.0, 7.0, 4096).unwrap();
            let k = loop_circulation(&src, &lp, Flow::Photon).unwrap();
            assert!((k - m as f64).abs() < 1e-9, "{k}");
            let kh = loop_circulation(&src, &lp, Flow::Helicity).unwrap();
            assert!((kh - m as f64).abs() < 1e-9);
        }
        let src = FieldSource::analytic(&lg_spec(0, 0), 1.0, 0.0).unwrap();
        let lp = LoopSpec::circle(1.0, 2.0, 7.0, 256).unwrap();
        assert!(loop_circulation(&src, &lp, Flow::Photon).unwrap().abs() < 1e-9);
    }

    #[test]
    fn loop_through_dark_tail_keeps_quantized_circulation() {
        // An off-axis loop reaching far into the Gaussian tail: a large share of
        // its samples fall below the density mask, so the winding fallback applies.
        let spec = BeamSpec::single(
            Complex64::new(1.0, 0.0),
            PolarizationSpec::bloch(crate::beam::BlochState::Up, PI / 3.0, 0.0),
            Profile::LaguerreGauss { p: 0, m: 2, w0: 10.0 },
        );
        let src = FieldSource::analytic(&spec, 1.0, 0.0).unwrap();
        let lp = LoopSpec::circle(10.0, 0.0, 25.0, 512).unwrap();
        let dens: Vec<f64> = (0..512)
            .map(|k| {
                let (x, y) = lp.node(k);
                let v = src.eval(x, y).unwrap();
                v[0].norm_sqr() + v[1].norm_sqr()
            })
            .collect();
        let peak = dens.iter().cloned().fold(0.0, f64::max);
        assert!(dens.iter().filter(|&&d| d < 1e-6 * peak).count() > 6);
        assert!((loop_circulation(&src, &lp, Flow::Photon).unwrap() - 2.0).abs() < 1e-12);
        let kh = loop_circulation(&src, &lp, Flow::Helicity).unwrap();
        assert!((kh - 2.0 * (PI / 3.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn tc_comparators() {
        let src = FieldSource::analytic(&lg_spec(0, 2), 1.0, 0.0).unwrap();
        let lp = LoopSpec::circle(0.0, 0.0, 25.0, 512).unwrap();
        assert!((berry_tc(&src, Component::Sum, &lp, TcVariant::Arg).unwrap() - 2.0).abs() < 1e-9);
        assert!((berry_tc(&src, Component::Sum, &lp, TcVariant::Field).unwrap() - 2.0).abs() < 1e-6);
        let src = FieldSource::analytic(&mixed(1, 4), 1.0, 0.0).unwrap();
        let lp = LoopSpec::circle(0.0, 0.0, 10.0, 4096).unwrap();
        let tc = berry_tc(&src, Component::Sum, &lp, TcVariant::Field).unwrap();
        assert!((tc - 2.5).abs() < 0.01, "{tc}");
    }

    #[test]
    fn grid_source_matches_analytic_winding_and_circulation() {
        let g = TransverseGrid::centered(256, 80.0).unwrap();
        let spec = lg_spec(1, 2);
        let f = synthesize(&spec, &g).unwrap();
        let src = FieldSource::grid(&f);
        let lp = LoopSpec::circle(0.0, 0.0, 5.0, 1024).unwrap();
        assert_eq!(loop_winding(&src, Component::Plus, &lp, &WindingOptions::default()).unwrap().winding, 2);
        let k = loop_circulation(&src, &lp, Flow::Photon).unwrap();
        assert!((k - 2.0).abs() < 1e-3, "{k}");
        assert_eq!(src.uniform_polarization().map(|s| s[1].norm()), Some(0.0));
        let outside = LoopSpec::circle(0.0, 0.0, 60.0, 128).unwrap();
        assert!(matches!(loop_winding(&src, Component::Plus, &outside, &WindingOptions::default()), Err(Error::OutsideGrid { .. })));
    }

    #[test]
    fn census_counts_charge_and_matches_boundary() {
        let g = TransverseGrid::centered(128, 60.0).unwrap();
        let f = synthesize(&lg_spec(0, 3), &g).unwrap();
        let c = singularity_census(&f, Component::Plus);
        assert_eq!(c.net_charge_within(0.0, 0.0, 5.0), 3);
        let src = FieldSource::grid(&f);
        let w = loop_winding(&src, Component::Plus, &LoopSpec::grid_boundary(&g), &WindingOptions::default()).unwrap();
        assert_eq!(c.net_charge(), w.winding);
    }

    #[test]
    fn census_raster_finds_bessel_ring() {
        let g = TransverseGrid::centered(256, 80.0).unwrap();
        let spec = BeamSpec::single(
            Complex64::new(1.0, 0.0),
            circ(),
            Profile::BesselGauss { p: 1, m: 1, w0: 10.0, theta_p: 0.05 * PI },
        );
        let f = synthesize(&spec, &g).unwrap();
        let c = singularity_census(&f, Component::Plus);
        let ring = bessel_zero(1, 1) / (TAU * (0.05 * PI).sin());
        let mut near = 0;
        for ((j, i), &z) in c.zero_raster.indexed_iter() {
            if z && (g.x(i).hypot(g.y(j)) - ring).abs() < g.dx {
                near += 1;
            }
        }
        assert!(near > 50, "{near}");
    }

    #[test]
    fn loop_validation() {
        assert!(LoopSpec::circle(0.0, 0.0, -1.0, 128).is_err());
        assert!(LoopSpec::circle(0.0, 0.0, 1.0, 10).is_err());
        let cw = vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)];
        assert!(LoopSpec::polygon(cw, 128).is_err());
        let bow = vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)];
        assert!(LoopSpec::polygon(bow, 128).is_err());
        let sq = LoopSpec::polygon(vec![(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)], 128).unwrap();
        assert_eq!(sq.node(32), (2.0, 0.0));
        assert_eq!(sq.point(0.25).0, (2.0, 0.0));
    }

    #[test]
    fn polygon_circulation_of_uniform_rotation() {
        // v = (−y, x)/ρ² has circulation 2π around the origin on any enclosing path:
        // LG m = 1 gives κ = λ₀ around a square too.
        let src = FieldSource::analytic(&lg_spec(0, 1), 1.0, 0.0).unwrap();
        let sq = LoopSpec::polygon(vec![(-6.0, -6.0), (6.0, -6.0), (6.0, 6.0), (-6.0, 6.0)], 4096).unwrap();
        let k = loop_circulation(&src, &sq, Flow::Photon).unwrap();
        assert!((k - 1.0).abs() < 1e-5, "{k}");
    }
}
