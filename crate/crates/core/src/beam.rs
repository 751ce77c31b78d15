//! Closed-form Laguerre-Gaussian and Bessel-Gaussian profiles, polarization
//! spinors, and coaxial superpositions of them.
//!
//! Profiles are the slowly varying envelope: the `e^{ik₀z}` carrier is not
//! included. Every profile is scaled so that its `z = 0` slice has unit norm;
//! the constant comes from a radial Gauss–Legendre quadrature, independent of
//! any sampling grid.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result, Warning};
use crate::field::{inner_product, ComplexField, SpinorField};
use crate::grid::TransverseGrid;
use crate::special::{bessel_j_with_derivative, bessel_j_real, laguerre, CompositeGauss};

/// Largest radial or azimuthal index accepted by the special-function recurrences.
pub const MAX_INDEX: u32 = 30;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochState {
    Up,
    Down,
}

/// Eigenstates of the Bloch-sphere polarization operator in the circular basis.
pub fn bloch_spinor(theta_b: f64, phi_b: f64, which: BlochState) -> [Complex64; 2] {
    let (s, c) = (0.5 * theta_b).sin_cos();
    let lead = Complex64::from_polar(1.0, -0.5 * phi_b);
    let trail = Complex64::from_polar(1.0, 0.5 * phi_b);
    match which {
        BlochState::Up => [c * lead, s * trail],
        BlochState::Down => [-s * lead, c * trail],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizationKind {
    CircularPlus,
    CircularMinus,
    LinearX,
    LinearY,
    BlochUp,
    BlochDown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationSpec {
    pub kind: PolarizationKind,
    /// Bloch polar angle, used by the `Bloch*` kinds.
    pub theta_b: f64,
    /// Bloch azimuth, used by the `Bloch*` kinds.
    pub phi_b: f64,
}

impl PolarizationSpec {
    pub fn new(kind: PolarizationKind) -> Self {
        Self { kind, theta_b: 0.0, phi_b: 0.0 }
    }

    pub fn bloch(which: BlochState, theta_b: f64, phi_b: f64) -> Self {
        let kind = match which {
            BlochState::Up => PolarizationKind::BlochUp,
            BlochState::Down => PolarizationKind::BlochDown,
        };
        Self { kind, theta_b, phi_b }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta_b.is_finite() || !self.phi_b.is_finite() {
            return Err(Error::InvalidParameter("Bloch angles must be finite".into()));
        }
        if !(0.0..=PI).contains(&self.theta_b) {
            return Err(Error::InvalidParameter(format!(
                "theta_B = {} outside [0, π]",
                self.theta_b
            )));
        }
        Ok(())
    }

    /// Unit spinor `(c₊, c₋)`.
    pub fn spinor(&self) -> [Complex64; 2] {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self.kind {
            PolarizationKind::CircularPlus => [one, zero],
            PolarizationKind::CircularMinus => [zero, one],
            PolarizationKind::LinearX => [r, r],
            PolarizationKind::LinearY => [I * r, -I * r],
            PolarizationKind::BlochUp => bloch_spinor(self.theta_b, self.phi_b, BlochState::Up),
            PolarizationKind::BlochDown => {
                bloch_spinor(self.theta_b, self.phi_b, BlochState::Down)
            }
        }
    }
}

/// Transverse profile of one beam component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    LaguerreGauss { p: u32, m: i32, w0: f64 },
    BesselGauss { p: u32, m: i32, w0: f64, theta_p: f64 },
}

impl Profile {
    pub fn m(&self) -> i32 {
        match *self {
            Profile::LaguerreGauss { m, .. } | Profile::BesselGauss { m, .. } => m,
        }
    }

    pub fn w0(&self) -> f64 {
        match *self {
            Profile::LaguerreGauss { w0, .. } | Profile::BesselGauss { w0, .. } => w0,
        }
    }

    /// Rayleigh length `π w₀² / λ₀`.
    pub fn rayleigh_length(&self, lambda0: f64) -> f64 {
        PI * self.w0().powi(2) / lambda0
    }

    pub fn validate(&self) -> Result<()> {
        let (p, m, w0) = match *self {
            Profile::LaguerreGauss { p, m, w0 } => (p, m, w0),
            Profile::BesselGauss { p, m, w0, theta_p } => {
                if !(theta_p > 0.0 && theta_p < 0.5 * PI) {
                    return Err(Error::InvalidParameter(format!(
                        "theta_p = {theta_p} outside (0, π/2)"
                    )));
                }
                (p, m, w0)
            }
        };
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidParameter(format!("w0 = {w0} must be positive")));
        }
        if p > MAX_INDEX || m.unsigned_abs() > MAX_INDEX {
            return Err(Error::InvalidParameter(format!(
                "indices p = {p}, m = {m} exceed ±{MAX_INDEX}"
            )));
        }
        Ok(())
    }

    pub fn warnings(&self, lambda0: f64) -> Vec<Warning> {
        let mut out = Vec::new();
        match *self {
            Profile::LaguerreGauss { w0, .. } => {
                if w0 < 2.0 * lambda0 {
                    out.push(Warning::ParaxialValidity { theta_p: None, w0 });
                }
            }
            Profile::BesselGauss { p, m, w0, theta_p } => {
                if theta_p > 0.15 * PI || w0 < 2.0 * lambda0 {
                    out.push(Warning::ParaxialValidity { theta_p: Some(theta_p), w0 });
                }
                if p == 0 && m != 0 {
                    out.push(Warning::DivergentKineticEnergy { m });
                }
            }
        }
        out
    }
}

/// A profile together with its slice-normalization constant.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedProfile {
    pub profile: Profile,
    pub k0: f64,
    pub norm: f64,
}

impl NormalizedProfile {
    pub fn new(profile: Profile, lambda0: f64) -> Result<Self> {
        profile.validate()?;
        let k0 = 2.0 * PI / lambda0;
        let mut np = Self { profile, k0, norm: 1.0 };
        let (rho_max, h) = match profile {
            Profile::LaguerreGauss { p, m, w0 } => {
                let extent = ((2 * p + m.unsigned_abs() + 1) as f64).sqrt() + 8.0;
                (w0 * extent, w0 / 24.0)
            }
            Profile::BesselGauss { w0, theta_p, .. } => {
                let beta = k0 * theta_p.sin();
                (w0 * 8.0, (w0 / 24.0).min(PI / (4.0 * beta)))
            }
        };
        let panels = (rho_max / h).ceil() as usize;
        let rule = CompositeGauss::new(0.0, rho_max, panels, 12);
        let integral = 2.0 * PI * rule.integrate(|r| np.radial(r, 0.0).norm_sqr() * r);
        if !(integral > 0.0) || !integral.is_finite() {
            return Err(Error::Numerical(format!("profile normalization failed: {integral}")));
        }
        np.norm = 1.0 / integral.sqrt();
        Ok(np)
    }

    /// Radial factor `R(ρ, z)` such that the profile is `R e^{imφ}`.
    pub fn radial(&self, rho: f64, z: f64) -> Complex64 {
        self.radial_with_derivative(rho, z, false).0
    }

    /// `R(ρ, z)` and, when requested, `∂R/∂ρ`.
    pub fn radial_with_derivative(&self, rho: f64, z: f64, deriv: bool) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        match self.profile {
            Profile::LaguerreGauss { p, m, w0 } => {
                let zr = 0.5 * self.k0 * w0 * w0;
                let q = Complex64::new(1.0, z / zr);
                let q_abs2 = q.norm_sqr();
                let am = m.unsigned_abs();
                let pre = self.norm * q.inv().powi((2 * p + am + 1) as i32) * q_abs2.powi(p as i32);
                let c = 2f64.sqrt() / w0;
                let s = 2.0 / (w0 * w0 * q_abs2);
                let x = s * rho * rho;
                let poly = laguerre(p, am as f64, x);
                let a = (c * rho).powi(am as i32);
                let gauss = (-rho * rho / (w0 * w0 * q)).exp();
                let value = pre * a * poly * gauss;
                if !deriv {
                    return (value, zero);
                }
                let da = if am == 0 { 0.0 } else { am as f64 * c.powi(am as i32) * rho.powi(am as i32 - 1) };
                let dpoly = if p == 0 { 0.0 } else { -laguerre(p - 1, am as f64 + 1.0, x) * 2.0 * s * rho };
                let dgauss = -2.0 * rho / (w0 * w0 * q);
                let d = pre * gauss * (da * poly + a * dpoly + a * poly * dgauss);
                (value, d)
            }
            Profile::BesselGauss { p, w0, theta_p, .. } => {
                let zr = 0.5 * self.k0 * w0 * w0;
                let q = Complex64::new(1.0, z / zr);
                let beta = self.k0 * theta_p.sin();
                let arg = beta * rho / q;
                let phase = (-I * self.k0 * z * theta_p.sin().powi(2) / (2.0 * q)).exp();
                let gauss = (-rho * rho / (w0 * w0 * q)).exp();
                let pre = self.norm / q * phase;
                let (j, dj) = bessel_j_with_derivative(p as i32, arg);
                let value = pre * j * gauss;
                if !deriv {
                    return (value, zero);
                }
                let dgauss = -2.0 * rho / (w0 * w0 * q);
                let d = pre * gauss * (beta / q * dj + j * dgauss);
                (value, d)
            }
        }
    }

    /// Profile value at a transverse point.
    pub fn value(&self, x: f64, y: f64, z: f64) -> Complex64 {
        let rho = x.hypot(y);
        let phi = y.atan2(x);
        self.radial(rho, z) * Complex64::from_polar(1.0, self.profile.m() as f64 * phi)
    }

    /// Value and Cartesian gradient `(∂x, ∂y)`.
    pub fn value_with_gradient(&self, x: f64, y: f64, z: f64) -> (Complex64, [Complex64; 2]) {
        let rho = x.hypot(y);
        if rho < 1e-9 * self.profile.w0() {
            let h = 1e-6 * self.profile.w0();
            let v = self.value(x, y, z);
            let gx = (self.value(x + h, y, z) - self.value(x - h, y, z)) / (2.0 * h);
            let gy = (self.value(x, y + h, z) - self.value(x, y - h, z)) / (2.0 * h);
            return (v, [gx, gy]);
        }
        let m = self.profile.m() as f64;
        let (c, s) = (x / rho, y / rho);
        let (r, dr) = self.radial_with_derivative(rho, z, true);
        let az = Complex64::new(c, s).powi(self.profile.m());
        let v = r * az;
        // ∇ = ê_ρ ∂ρ + ê_φ (1/ρ) ∂φ with ∂φ → im
        let radial = dr * az;
        let azimuthal = I * m / rho * v;
        (v, [radial * c - azimuthal * s, radial * s + azimuthal * c])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamComponent {
    /// Complex strength of the component (beam amplitude times any polarization coefficient).
    pub amplitude: Complex64,
    pub pol: PolarizationSpec,
    pub profile: Profile,
}

/// Coaxial superposition of beam components.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSpec {
    pub components: Vec<BeamComponent>,
}

impl BeamSpec {
    pub fn new(components: Vec<BeamComponent>) -> Result<Self> {
        let spec = Self { components };
        spec.validate()?;
        Ok(spec)
    }

    pub fn single(amplitude: Complex64, pol: PolarizationSpec, profile: Profile) -> Self {
        Self { components: vec![BeamComponent { amplitude, pol, profile }] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidParameter("beam needs at least one component".into()));
        }
        for c in &self.components {
            c.pol.validate()?;
            c.profile.validate()?;
            if !(c.amplitude.re.is_finite() && c.amplitude.im.is_finite()) {
                return Err(Error::InvalidParameter("amplitude must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn warnings(&self, lambda0: f64) -> Vec<Warning> {
        let mut out: Vec<Warning> = Vec::new();
        for c in &self.components {
            for w in c.profile.warnings(lambda0) {
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| BeamComponent { amplitude: c.amplitude * factor, ..*c })
            .collect();
        Self { components }
    }

    /// The common polarization spinor if every component shares it.
    pub fn uniform_polarization(&self) -> Option<[Complex64; 2]> {
        let first = self.components[0].pol.spinor();
        let same = self.components.iter().all(|c| {
            let s = c.pol.spinor();
            (s[0] - first[0]).norm() < 1e-14 && (s[1] - first[1]).norm() < 1e-14
        });
        same.then_some(first)
    }

    /// Two Bessel-Gaussian beams with opposite helical phases `e^{±imφ}` in the
    /// orthogonal Bloch states `|↑⟩` and `|↓⟩`.
    ///
    /// With `|c_up| = |c_down|` the photon current vanishes identically while the
    /// helicity current circulates.
    #[allow(clippy::too_many_arguments)]
    pub fn helicity_vortex(
        alpha: Complex64,
        c_up: Complex64,
        c_down: Complex64,
        theta_b: f64,
        phi_b: f64,
        p: u32,
        m: i32,
        w0: f64,
        theta_p: f64,
    ) -> Result<Self> {
        Self::new(vec![
            BeamComponent {
                amplitude: alpha * c_up,
                pol: PolarizationSpec::bloch(BlochState::Up, theta_b, phi_b),
                profile: Profile::BesselGauss { p, m, w0, theta_p },
            },
            BeamComponent {
                amplitude: alpha * c_down,
                pol: PolarizationSpec::bloch(BlochState::Down, theta_b, phi_b),
                profile: Profile::BesselGauss { p, m: -m, w0, theta_p },
            },
        ])
    }
}

/// Constant phase `φ₀` of the helicity-density pattern
/// `n_H = n sinθ_B cos(2mφ + φ₀)` of [`BeamSpec::helicity_vortex`], wrapped into `(−π, π]`.
pub fn helicity_phase_offset(c_up: Complex64, c_down: Complex64) -> f64 {
    let raw = c_up.arg() - c_down.arg() + PI;
    let wrapped = raw.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Point evaluator for a [`BeamSpec`] with normalization constants precomputed.
#[derive(Debug, Clone)]
pub struct BeamEvaluator {
    terms: Vec<(Complex64, [Complex64; 2], NormalizedProfile)>,
    lambda0: f64,
}

impl BeamEvaluator {
    pub fn new(spec: &BeamSpec, lambda0: f64) -> Result<Self> {
        spec.validate()?;
        if !(lambda0 > 0.0) {
            return Err(Error::InvalidParameter("lambda0 must be positive".into()));
        }
        let terms = spec
            .components
            .iter()
            .map(|c| {
                Ok((c.amplitude, c.pol.spinor(), NormalizedProfile::new(c.profile, lambda0)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms, lambda0 })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    /// `[Ψ₊, Ψ₋]` at `(x, y, z)`.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> [Complex64; 2] {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (amp, spinor, prof) in &self.terms {
            let v = amp * prof.value(x, y, z);
            out[0] += v * spinor[0];
            out[1] += v * spinor[1];
        }
        out
    }

    /// `[Ψ₊, Ψ₋]` and `[[∂xΨ₊, ∂yΨ₊], [∂xΨ₋, ∂yΨ₋]]`.
    pub fn eval_with_gradient(&self, x: f64, y: f64, z: f64) -> ([Complex64; 2], [[Complex64; 2]; 2]) {
        let zero = Complex64::new(0.0, 0.0);
        let mut v = [zero; 2];
        let mut g = [[zero; 2]; 2];
        for (amp, spinor, prof) in &self.terms {
            let (pv, pg) = prof.value_with_gradient(x, y, z);
            for l in 0..2 {
                let c = amp * spinor[l];
                v[l] += c * pv;
                g[l][0] += c * pg[0];
                g[l][1] += c * pg[1];
            }
        }
        (v, g)
    }

    pub fn sample(&self, grid: &TransverseGrid) -> SpinorField {
        let mut plus = Array2::zeros(grid.shape());
        let mut minus = Array2::zeros(grid.shape());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                let [p, m] = self.eval(grid.x(i), y, grid.z);
                plus[[j, i]] = p;
                minus[[j, i]] = m;
            }
        }
        SpinorField { grid: *grid, psi_plus: plus, psi_minus: minus }
    }
}

fn profile_field(profile: Profile, grid: &TransverseGrid) -> Result<ComplexField> {
    grid.validate()?;
    let np = NormalizedProfile::new(profile, grid.lambda0)?;
    let values =
        Array2::from_shape_fn(grid.shape(), |(j, i)| np.value(grid.x(i), grid.y(j), grid.z));
    Ok(ComplexField { grid: *grid, values })
}

/// Laguerre-Gaussian envelope on `grid` at `grid.z`, unit slice norm at `z = 0`.
pub fn lg_profile(p: u32, m: i32, w0: f64, grid: &TransverseGrid) -> Result<ComplexField> {
    profile_field(Profile::LaguerreGauss { p, m, w0 }, grid)
}

/// Bessel-Gaussian envelope `J_p(β_p ρ/q) e^{imφ}` on `grid` at `grid.z`.
///
/// The Bessel order `p` and the helical index `m` are independent. The
/// closed form follows paraxial propagation exactly only for `p = |m|`; for
/// other combinations it is meaningful in the `z = 0` plane. Validity warnings
/// are available from [`Profile::warnings`].
pub fn bg_profile(
    p: u32,
    m: i32,
    w0: f64,
    theta_p: f64,
    grid: &TransverseGrid,
) -> Result<ComplexField> {
    profile_field(Profile::BesselGauss { p, m, w0, theta_p }, grid)
}

/// Samples the superposition `Ψ_λ = Σ amplitude · spinor_λ · profile` on `grid`.
pub fn synthesize(spec: &BeamSpec, grid: &TransverseGrid) -> Result<SpinorField> {
    grid.validate()?;
    let field = BeamEvaluator::new(spec, grid.lambda0)?.sample(grid);
    field.check_finite()?;
    Ok(field)
}

/// `ln 𝒩 = Σ_{j≠j'} conj(α_j) α_j' ⟨ξ_j, ξ_j'⟩` for a product of coherent states.
pub fn superposition_log_norm(amps: &[Complex64], fields: &[SpinorField]) -> Result<f64> {
    if amps.len() != fields.len() {
        return Err(Error::InvalidParameter(format!(
            "{} amplitudes for {} fields",
            amps.len(),
            fields.len()
        )));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for (j, (aj, fj)) in amps.iter().zip(fields).enumerate() {
        for (k, (ak, fk)) in amps.iter().zip(fields).enumerate() {
            if j == k {
                continue;
            }
            let term = aj.conj() * ak * inner_product(fj, fk)?;
            scale = scale.max(term.norm());
            total += term;
        }
    }
    if total.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "overlap double sum has imaginary part {}",
            total.im
        )));
    }
    Ok(total.re)
}

/// First positive zero of `J_p`, bracketed by a coarse scan and refined by bisection.
pub fn bessel_zero(p: u32, k: usize) -> f64 {
    let f = |x: f64| bessel_j_real(p as i32, x);
    let mut found = 0;
    let step = 0.05;
    let mut a = if p == 0 { step } else { p as f64 * 0.5 + step };
    loop {
        let b = a + step;
        if f(a) * f(b) < 0.0 {
            found += 1;
            if found == k {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(lo) * f(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
    }
}
