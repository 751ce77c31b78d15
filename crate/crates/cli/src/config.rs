//! INI-style scenario files.
//!
//! Sections are `[name]` lines, entries are `key = value`, and `#` starts a
//! comment. Numeric values accept arithmetic with `pi` and `sqrt(..)`, e.g.
//! `theta_p = 0.05*pi`. Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use vortexlab_core::beam::{BeamComponent, BeamSpec, BlochState, PolarizationKind, PolarizationSpec, Profile};
use vortexlab_core::pair::{RadialProfile, SpinSymmetry};
use vortexlab_core::vortex::Component;
use vortexlab_core::TransverseGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self { line: Some(l), message } => write!(f, "line {l}: {message}"),
            Self { line: None, message } => f.write_str(message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Synth,
    Propagate,
    Observables,
    Circulation,
    Census,
    Coherence,
    Oam,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Synth => "synth",
            Action::Propagate => "propagate",
            Action::Observables => "observables",
            Action::Circulation => "circulation",
            Action::Census => "census",
            Action::Coherence => "coherence",
            Action::Oam => "oam",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Action::Synth,
            Action::Propagate,
            Action::Observables,
            Action::Circulation,
            Action::Census,
            Action::Coherence,
            Action::Oam,
        ]
        .into_iter()
        .find(|a| a.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub z: f64,
}

impl GridConfig {
    /// Grid centred on the axis: sample `(nx/2, ny/2)` sits at the origin.
    pub fn build(&self, lambda0: f64) -> vortexlab_core::Result<TransverseGrid> {
        let x0 = -((self.nx / 2) as f64) * self.dx;
        let y0 = -((self.ny / 2) as f64) * self.dy;
        TransverseGrid::new(self.nx, self.ny, self.dx, self.dy, x0, y0, lambda0, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateConfig {
    pub dz: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopConfig {
    pub radius: Option<f64>,
    pub cx: f64,
    pub cy: f64,
    pub samples: usize,
    pub component: Component,
    pub first_jump_negative: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairConfig {
    pub m: Vec<i32>,
    pub symmetry: Vec<SpinSymmetry>,
    pub theta_b: f64,
    pub phi_b: f64,
    pub phi0: f64,
    pub z: f64,
    pub eta: RadialProfile,
    pub ring_radius: f64,
    pub ring_samples: usize,
    pub matrix_samples: usize,
    pub disk_radius: f64,
    pub disk_n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub action: Option<Action>,
    pub lambda0: f64,
    pub grid: GridConfig,
    pub beam: Option<BeamSpec>,
    /// Pattern offset of a `[helicity_vortex]` beam.
    pub helicity_offset: Option<f64>,
    pub propagate: Option<PropagateConfig>,
    pub loop_: LoopConfig,
    pub census_component: Component,
    pub oam_dz: f64,
    pub pair: Option<PairConfig>,
    pub heatmaps: bool,
}

impl Scenario {
    pub fn grid(&self) -> vortexlab_core::Result<TransverseGrid> {
        self.grid.build(self.lambda0)
    }

    pub fn require_beam(&self) -> Result<&BeamSpec> {
        self.beam.as_ref().ok_or_else(|| ConfigError {
            line: None,
            message: "no beam defined: add a [component] or [helicity_vortex] section".into(),
        })
    }
}

#[derive(Debug)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn raw(&mut self, key: &str) -> Option<(&str, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.as_str(), e.line)
        })
    }

    fn float(&mut self, key: &str) -> Result<Option<(f64, usize)>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => {
                let x = eval(v).map_err(|m| ConfigError::at(line, format!("{key}: {m}")))?;
                if !x.is_finite() {
                    return Err(ConfigError::at(line, format!("{key}: value is not finite")));
                }
                Ok(Some((x, line)))
            }
        }
    }

    fn float_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(key)?.map_or(default, |v| v.0))
    }

    fn positive(&mut self, key: &str) -> Result<Option<f64>> {
        match self.float(key)? {
            Some((x, line)) if x <= 0.0 => Err(ConfigError::at(line, format!("{key} must be positive, got {x}"))),
            v => Ok(v.map(|v| v.0)),
        }
    }

    fn required_positive(&mut self, key: &str) -> Result<f64> {
        let line = self.line;
        let name = self.name.clone();
        self.positive(key)?.ok_or_else(|| ConfigError::at(line, format!("[{name}] requires `{key}`")))
    }

    fn int(&mut self, key: &str) -> Result<Option<(i64, usize)>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<i64>()
                .map(|x| Some((x, line)))
                .map_err(|_| ConfigError::at(line, format!("{key}: expected an integer, got `{v}`"))),
        }
    }

    fn count(&mut self, key: &str, min: i64) -> Result<Option<usize>> {
        match self.int(key)? {
            Some((x, line)) if x < min => Err(ConfigError::at(line, format!("{key} must be at least {min}, got {x}"))),
            v => Ok(v.map(|v| v.0 as usize)),
        }
    }

    fn word(&mut self, key: &str) -> Option<(String, usize)> {
        self.raw(key).map(|(v, l)| (v.to_ascii_lowercase(), l))
    }

    fn list(&mut self, key: &str) -> Option<(Vec<String>, usize)> {
        self.word(key).map(|(v, l)| (v.split(',').map(|s| s.trim().to_string()).collect(), l))
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().find(|(_, e)| !e.used) {
            Some((k, e)) => Err(ConfigError::at(e.line, format!("unknown key `{k}` in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

const SECTIONS: [&str; 10] = [
    "scenario",
    "grid",
    "component",
    "helicity_vortex",
    "propagate",
    "loop",
    "census",
    "oam",
    "pair",
    "output",
];

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, "malformed section header"))?
                .trim()
                .to_ascii_lowercase();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ConfigError::at(line, format!("unknown section [{name}]")));
            }
            if name != "component" {
                if let Some(first) = sections.iter().find(|s| s.name == name) {
                    return Err(ConfigError::at(
                        line,
                        format!("duplicate section [{name}] (first defined on line {})", first.line),
                    ));
                }
            }
            sections.push(Section { name, line, entries: BTreeMap::new() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim().to_string());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(line, "empty key or value"));
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| ConfigError::at(line, "entry before any section header"))?;
        if let Some(prev) = section.entries.get(&key) {
            return Err(ConfigError::at(line, format!("duplicate key `{key}` (first on line {})", prev.line)));
        }
        section.entries.insert(key, Entry { value, line, used: false });
    }
    Ok(sections)
}

pub fn parse_config_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut sections = split_sections(text)?;
    let mut take = |name: &str| sections.iter().position(|s| s.name == name).map(|i| sections.remove(i));

    let mut action = None;
    let mut lambda0 = 1.0;
    if let Some(mut s) = take("scenario") {
        if let Some((a, line)) = s.word("action") {
            action = Some(Action::parse(&a).ok_or_else(|| ConfigError::at(line, format!("unknown action `{a}`")))?);
        }
        lambda0 = s.positive("lambda0")?.unwrap_or(1.0);
        s.finish()?;
    }

    let mut grid = GridConfig { nx: 256, ny: 256, dx: 100.0 / 256.0, dy: 100.0 / 256.0, z: 0.0 };
    if let Some(mut s) = take("grid") {
        let n = s.count("n", 4)?;
        grid.nx = s.count("nx", 4)?.or(n).unwrap_or(256);
        grid.ny = s.count("ny", 4)?.or(n).unwrap_or(256);
        let span = s.positive("span")?;
        grid.dx = s.positive("dx")?.or(span.map(|w| w / grid.nx as f64)).unwrap_or(100.0 / grid.nx as f64);
        grid.dy = s.positive("dy")?.or(span.map(|w| w / grid.ny as f64)).unwrap_or(100.0 / grid.ny as f64);
        grid.z = s.float_or("z", 0.0)?;
        s.finish()?;
    }

    let mut components = Vec::new();
    while let Some(s) = take("component") {
        components.push(component(s)?);
    }
    let mut helicity_offset = None;
    let beam = match take("helicity_vortex") {
        Some(s) if !components.is_empty() => {
            return Err(ConfigError::at(s.line, "[helicity_vortex] cannot be combined with [component] sections"));
        }
        Some(s) => {
            let (spec, offset) = helicity_vortex(s)?;
            helicity_offset = Some(offset);
            Some(spec)
        }
        None if components.is_empty() => None,
        None => Some(BeamSpec::new(components).map_err(|e| ConfigError { line: None, message: e.to_string() })?),
    };

    let propagate = match take("propagate") {
        Some(mut s) => {
            let (dz, line) = s.float("dz")?.ok_or_else(|| ConfigError::at(s.line, "[propagate] requires `dz`"))?;
            if dz == 0.0 {
                return Err(ConfigError::at(line, "dz must be nonzero"));
            }
            let steps = s.count("steps", 1)?.unwrap_or(1);
            s.finish()?;
            Some(PropagateConfig { dz, steps })
        }
        None => None,
    };

    let mut loop_ = LoopConfig {
        radius: None,
        cx: 0.0,
        cy: 0.0,
        samples: 4096,
        component: Component::Sum,
        first_jump_negative: false,
    };
    if let Some(mut s) = take("loop") {
        loop_.radius = s.positive("radius")?;
        loop_.cx = s.float_or("cx", 0.0)?;
        loop_.cy = s.float_or("cy", 0.0)?;
        loop_.samples = s.count("samples", 64)?.unwrap_or(4096);
        if let Some((c, line)) = s.word("component") {
            loop_.component = parse_component(&c, line)?;
        }
        if let Some((j, line)) = s.word("first_jump") {
            loop_.first_jump_negative = match j.as_str() {
                "positive" | "+" => false,
                "negative" | "-" => true,
                _ => return Err(ConfigError::at(line, format!("first_jump: expected positive or negative, got `{j}`"))),
            };
        }
        s.finish()?;
    }

    let mut census_component = Component::Sum;
    if let Some(mut s) = take("census") {
        if let Some((c, line)) = s.word("component") {
            census_component = parse_component(&c, line)?;
        }
        s.finish()?;
    }

    let mut oam_dz = 1.0;
    if let Some(mut s) = take("oam") {
        oam_dz = s.positive("dz")?.unwrap_or(1.0);
        s.finish()?;
    }

    let pair = take("pair").map(|s| pair(s, lambda0)).transpose()?;

    let mut heatmaps = true;
    if let Some(mut s) = take("output") {
        if let Some((v, line)) = s.word("heatmaps") {
            heatmaps = match v.as_str() {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => return Err(ConfigError::at(line, format!("heatmaps: expected true or false, got `{v}`"))),
            };
        }
        s.finish()?;
    }

    Ok(Scenario {
        action,
        lambda0,
        grid,
        beam,
        helicity_offset,
        propagate,
        loop_,
        census_component,
        oam_dz,
        pair,
        heatmaps,
    })
}

fn parse_component(c: &str, line: usize) -> Result<Component> {
    match c {
        "sum" => Ok(Component::Sum),
        "plus" | "+" => Ok(Component::Plus),
        "minus" | "-" => Ok(Component::Minus),
        _ => Err(ConfigError::at(line, format!("component: expected sum, plus or minus, got `{c}`"))),
    }
}

fn theta_p(s: &mut Section) -> Result<f64> {
    let line = s.line;
    match s.float("theta_p")? {
        None => Err(ConfigError::at(line, "Bessel-Gauss profile requires `theta_p`")),
        Some((t, l)) if !(t > 0.0 && t < 0.5 * PI) => {
            Err(ConfigError::at(l, format!("theta_p must lie in (0, pi/2), got {t}")))
        }
        Some((t, _)) => Ok(t),
    }
}

fn order_p(s: &mut Section) -> Result<u32> {
    match s.int("p")? {
        None => Ok(0),
        Some((p, line)) if !(0..=30).contains(&p) => Err(ConfigError::at(line, format!("p must lie in 0..=30, got {p}"))),
        Some((p, _)) => Ok(p as u32),
    }
}

fn order_m(s: &mut Section) -> Result<i32> {
    match s.int("m")? {
        None => Ok(0),
        Some((m, line)) if m.abs() > 30 => Err(ConfigError::at(line, format!("|m| must not exceed 30, got {m}"))),
        Some((m, _)) => Ok(m as i32),
    }
}

fn component(mut s: Section) -> Result<BeamComponent> {
    let line = s.line;
    let (kind, kline) = s.word("profile").ok_or_else(|| ConfigError::at(line, "[component] requires `profile`"))?;
    let p = order_p(&mut s)?;
    let m = order_m(&mut s)?;
    let w0 = s.required_positive("w0")?;
    let profile = match kind.as_str() {
        "lg" => Profile::LaguerreGauss { p, m, w0 },
        "bg" => Profile::BesselGauss { p, m, w0, theta_p: theta_p(&mut s)? },
        _ => return Err(ConfigError::at(kline, format!("profile: expected lg or bg, got `{kind}`"))),
    };
    let modulus = s.float_or("amplitude", 1.0)?;
    let phase = s.float_or("phase", 0.0)?;
    let (pol, pline) = s.word("polarization").unwrap_or(("plus".into(), line));
    let kind = match pol.as_str() {
        "plus" | "circular_plus" => PolarizationKind::CircularPlus,
        "minus" | "circular_minus" => PolarizationKind::CircularMinus,
        "x" | "linear_x" => PolarizationKind::LinearX,
        "y" | "linear_y" => PolarizationKind::LinearY,
        "bloch_up" => PolarizationKind::BlochUp,
        "bloch_down" => PolarizationKind::BlochDown,
        _ => return Err(ConfigError::at(pline, format!("unknown polarization `{pol}`"))),
    };
    let pol = match kind {
        PolarizationKind::BlochUp | PolarizationKind::BlochDown => {
            let which = if kind == PolarizationKind::BlochUp { BlochState::Up } else { BlochState::Down };
            PolarizationSpec::bloch(which, s.float_or("theta_b", 0.0)?, s.float_or("phi_b", 0.0)?)
        }
        _ => PolarizationSpec::new(kind),
    };
    s.finish()?;
    let c = BeamComponent { amplitude: Complex64::from_polar(modulus, phase), pol, profile };
    profile.validate().map_err(|e| ConfigError::at(line, e.to_string()))?;
    Ok(c)
}

fn helicity_vortex(mut s: Section) -> Result<(BeamSpec, f64)> {
    let line = s.line;
    let alpha = Complex64::new(s.float_or("alpha", 1.0)?, 0.0);
    let c_up = Complex64::from_polar(s.float_or("c_up", 0.5f64.sqrt())?, s.float_or("c_up_phase", 0.0)?);
    let c_down = Complex64::from_polar(s.float_or("c_down", 0.5f64.sqrt())?, s.float_or("c_down_phase", 0.0)?);
    let theta_b = s.float_or("theta_b", 0.25 * PI)?;
    let phi_b = s.float_or("phi_b", 0.0)?;
    let p = order_p(&mut s)?;
    let m = order_m(&mut s)?;
    let w0 = s.required_positive("w0")?;
    let tp = theta_p(&mut s)?;
    s.finish()?;
    let spec = BeamSpec::helicity_vortex(alpha, c_up, c_down, theta_b, phi_b, p, m, w0, tp)
        .map_err(|e| ConfigError::at(line, e.to_string()))?;
    Ok((spec, vortexlab_core::beam::helicity_phase_offset(c_up, c_down)))
}

fn pair(mut s: Section, lambda0: f64) -> Result<PairConfig> {
    let m = match s.list("m") {
        None => vec![1],
        Some((items, line)) => items
            .iter()
            .map(|v| v.parse::<i32>().map_err(|_| ConfigError::at(line, format!("m: expected integers, got `{v}`"))))
            .collect::<Result<_>>()?,
    };
    let symmetry = match s.list("symmetry") {
        None => vec![SpinSymmetry::Symmetric],
        Some((items, line)) => items
            .iter()
            .map(|v| match v.as_str() {
                "symmetric" => Ok(SpinSymmetry::Symmetric),
                "antisymmetric" => Ok(SpinSymmetry::Antisymmetric),
                "same_up" => Ok(SpinSymmetry::SameUp),
                "same_down" => Ok(SpinSymmetry::SameDown),
                _ => Err(ConfigError::at(line, format!("unknown symmetry `{v}`"))),
            })
            .collect::<Result<_>>()?,
    };
    let theta_p = s.float_or("theta_p", 0.05 * PI)?;
    let ring = [s.positive("kz0")?, s.positive("sigma_z")?, s.positive("rho_k0")?, s.positive("sigma_rho")?];
    let eta = match ring {
        [None, None, None, None] => RadialProfile::default_ring(lambda0, theta_p),
        [Some(kz0), Some(sigma_z), Some(rho_k0), Some(sigma_rho)] => {
            RadialProfile::GaussianRing { kz0, sigma_z, rho_k0, sigma_rho }
        }
        _ => return Err(ConfigError::at(s.line, "give all of kz0, sigma_z, rho_k0, sigma_rho or none")),
    };
    let cfg = PairConfig {
        m,
        symmetry,
        theta_b: s.float_or("theta_b", 0.0)?,
        phi_b: s.float_or("phi_b", 0.0)?,
        phi0: s.float_or("phi0", 0.0)?,
        z: s.float_or("z", 0.0)?,
        eta,
        ring_radius: s.positive("ring_radius")?.unwrap_or(6.0),
        ring_samples: s.count("ring_samples", 2)?.unwrap_or(360),
        matrix_samples: s.count("matrix_samples", 2)?.unwrap_or(36),
        disk_radius: s.positive("disk_radius")?.unwrap_or(20.0),
        disk_n: s.count("disk_n", 4)?.unwrap_or(101),
    };
    s.finish()?;
    Ok(cfg)
}

/// Evaluates `+ - * /`, parentheses, `pi` and `sqrt(..)` over decimal literals.
pub fn eval(expr: &str) -> std::result::Result<f64, String> {
    let tokens = tokenize(expr)?;
    let mut p = ExprParser { tokens: &tokens, pos: 0 };
    let v = p.sum()?;
    if p.pos != tokens.len() {
        return Err(format!("unexpected `{}` in `{expr}`", tokens[p.pos]));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(x) => write!(f, "{x}"),
            Token::Ident(s) => f.write_str(s),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(s: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token::Num(text.parse().map_err(|_| format!("bad number `{text}`"))?));
        } else if c.is_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect::<String>().to_ascii_lowercase()));
        } else if "+-*/()".contains(c) || c == '\u{2212}' {
            out.push(Token::Op(if c == '\u{2212}' { '-' } else { c }));
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    if out.is_empty() {
        return Err("empty expression".into());
    }
    Ok(out)
}

struct ExprParser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.product()?;
        loop {
            if self.eat('+') {
                v += self.product()?;
            } else if self.eat('-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                v /= self.unary()?;
            } else if matches!(self.peek(), Some(Token::Ident(_) | Token::Op('('))) {
                // Implicit product such as `2pi`.
                v *= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> std::result::Result<f64, String> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> std::result::Result<f64, String> {
        let tok = self.peek().cloned().ok_or("expression ends early")?;
        self.pos += 1;
        match tok {
            Token::Num(x) => Ok(x),
            Token::Ident(name) if name == "pi" || name == "π" => Ok(PI),
            Token::Ident(name) if name == "sqrt" => {
                if !self.eat('(') {
                    return Err("sqrt needs parentheses".into());
                }
                let v = self.sum()?;
                if !self.eat(')') {
                    return Err("missing `)`".into());
                }
                Ok(v.sqrt())
            }
            Token::Ident(name) => Err(format!("unknown name `{name}`")),
            Token::Op('(') => {
                let v = self.sum()?;
                if !self.eat(')') {
                    return Err("missing `)`".into());
                }
                Ok(v)
            }
            Token::Op(c) => Err(format!("unexpected `{c}`")),
        }
    }
}
