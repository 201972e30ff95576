//! Traveling-wave profiles `u(t, x) = U(x - c t)`.
//!
//! Substituting the ansatz into the nonlocal form and integrating once gives
//! `(c + 1) U + 7 U^2 - (1 - d^2)^{-1} R(U) = A`. Applying `(1 - d^2)` turns
//! this into the planar system
//!
//! ```text
//! U' = V,    D(U) V' = -(7 V^2 + F(U)),
//! D(U) = c + 1 + 14 U,
//! F(U) = A - (c - 1) U + 3 U^2 - 2 U^3 + 3 U^4,
//! ```
//!
//! with first integral `H(U, V) = D(U) V^2 + 2 G(U)`, `G' = F`, `G(0) = 0`.
//! Orbits on the level `H = E` satisfy `V^2 = Q(U) = (E - 2 G(U)) / D(U)`,
//! so a profile is recovered by the quadrature `xi = int dU / sqrt(Q(U))`.
//! The line `U = -(c + 1) / 14` where `D` vanishes separates smooth orbits
//! from peaked and cusped ones.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::poly::{Polynomial, Root};
use crate::quadrature::PanelIntegral;

const PANELS: usize = 64;
const ORDER: usize = 20;
/// Default bracketing window for turning points.
pub const ROOT_WINDOW: (f64, f64) = (-10.0, 10.0);
const ROOT_TOL: f64 = 1e-12;
/// `|E - 2G(U_s)|` below which contact with the singular line has a finite
/// limiting slope (peaked) rather than an unbounded one (cusped).
pub const PEAK_CONTACT_TOL: f64 = 1e-10;
/// `|D(U)|` below which [`planar_field`] refuses to evaluate.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TWParams {
    pub speed: f64,
    pub integration_constant: f64,
    pub energy: f64,
}

impl TWParams {
    pub fn new(speed: f64, integration_constant: f64, energy: f64) -> Result<Self> {
        if !(speed.is_finite() && integration_constant.is_finite() && energy.is_finite()) {
            return Err(Error::NonFinite { what: "traveling-wave parameters" });
        }
        Ok(Self { speed, integration_constant, energy })
    }

    /// Decay to zero at infinity forces `A = 0` and `E = 0`.
    pub fn solitary(speed: f64) -> Result<Self> {
        Self::new(speed, 0.0, 0.0)
    }

    pub fn with_energy(self, energy: f64) -> Self {
        Self { energy, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhasePoint {
    pub elevation: f64,
    pub slope: f64,
}

impl PhasePoint {
    pub fn new(elevation: f64, slope: f64) -> Self {
        Self { elevation, slope }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regularity {
    SmoothSolitary,
    SmoothPeriodic,
    Peaked,
    Cusped,
    Composite,
}

/// A sampled profile on a uniform periodic window `xi_j = j h`.
#[derive(Clone, Debug, PartialEq)]
pub struct TWProfile {
    pub params: TWParams,
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
    pub regularity: Regularity,
    pub period: Option<f64>,
    /// Length of the sampling window (one period for periodic profiles).
    pub window: f64,
}

impl TWProfile {
    pub fn spacing(&self) -> f64 {
        self.window / self.values.len() as f64
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.values.len(), self.window)
    }

    pub fn to_field(&self) -> Result<Field> {
        Field::new(self.grid()?, self.values.clone())
    }

    /// Index of the sample with the largest `|U - mean|`.
    pub fn extremum_index(&self) -> usize {
        let mean = self.values.iter().sum::<f64>() / self.values.len() as f64;
        self.values
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, v)| if (v - mean).abs() > best.1 { (i, (v - mean).abs()) } else { best })
            .0
    }

    /// `max_s |U(xi_i + s) - U(xi_i - s)|` over the sampled window.
    pub fn evenness_defect(&self, index: usize) -> f64 {
        let n = self.values.len();
        (0..n).fold(0.0, |m, s| m.max((self.values[(index + s) % n] - self.values[(index + n - s) % n]).abs()))
    }
}

/// `D(U) = c + 1 + 14 U`, the coefficient of `U''`.
pub fn curvature_coefficient(elevation: f64, params: &TWParams) -> f64 {
    params.speed + 1.0 + 14.0 * elevation
}

/// `F(U) = A - (c - 1) U + 3 U^2 - 2 U^3 + 3 U^4`.
pub fn forcing(params: &TWParams) -> Polynomial {
    Polynomial::new(alloc::vec![params.integration_constant, -(params.speed - 1.0), 3.0, -2.0, 3.0])
}

/// `G` with `G' = F` and `G(0) = 0`.
pub fn potential(params: &TWParams) -> Polynomial {
    forcing(params).antiderivative()
}

/// `E - 2 G(U)`; its roots are the turning points of the orbit at level `E`.
pub fn level_polynomial(params: &TWParams) -> Polynomial {
    potential(params).scale(-2.0).add_constant(params.energy)
}

/// Vector field `(V, V')` of the planar profile system.
pub fn planar_field(p: PhasePoint, params: &TWParams) -> Result<PhasePoint> {
    let d = curvature_coefficient(p.elevation, params);
    if d.abs() <= SINGULAR_TOL {
        return Err(Error::Singularity { elevation: p.elevation, denominator: d });
    }
    let f = forcing(params).eval(p.elevation);
    Ok(PhasePoint { elevation: p.slope, slope: -(7.0 * p.slope * p.slope + f) / d })
}

/// `H(U, V) = D(U) V^2 + 2 G(U)`.
pub fn first_integral(p: PhasePoint, params: &TWParams) -> f64 {
    curvature_coefficient(p.elevation, params) * p.slope * p.slope + 2.0 * potential(params).eval(p.elevation)
}

/// Elevation `-(c + 1) / 14` where `D` vanishes.
pub fn singular_line(params: &TWParams) -> f64 {
    -(params.speed + 1.0) / 14.0
}

/// Real roots of `E - 2G` on [`ROOT_WINDOW`].
pub fn turning_points(params: &TWParams) -> Vec<Root> {
    turning_points_in(params, ROOT_WINDOW.0, ROOT_WINDOW.1)
}

pub fn turning_points_in(params: &TWParams, lo: f64, hi: f64) -> Vec<Root> {
    level_polynomial(params).real_roots(lo, hi, ROOT_TOL)
}

/// Fixed-step RK4 integration of the planar system.
pub fn integrate_orbit(start: PhasePoint, params: &TWParams, step: f64, steps: usize) -> Result<Vec<PhasePoint>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start);
    let mut p = start;
    let add = |p: PhasePoint, k: PhasePoint, a: f64| PhasePoint::new(p.elevation + a * k.elevation, p.slope + a * k.slope);
    for _ in 0..steps {
        let k1 = planar_field(p, params)?;
        let k2 = planar_field(add(p, k1, 0.5 * step), params)?;
        let k3 = planar_field(add(p, k2, 0.5 * step), params)?;
        let k4 = planar_field(add(p, k3, step), params)?;
        p = PhasePoint::new(
            p.elevation + step / 6.0 * (k1.elevation + 2.0 * k2.elevation + 2.0 * k3.elevation + k4.elevation),
            p.slope + step / 6.0 * (k1.slope + 2.0 * k2.slope + 2.0 * k3.slope + k4.slope),
        );
        out.push(p);
    }
    Ok(out)
}

/// `V^2 = Q(U)` on one level set, evaluated without cancellation near
/// turning points and near a peaked contact with the singular line.
#[derive(Clone, Debug)]
struct LevelSet {
    params: TWParams,
    numerator: Polynomial,
    /// `(E - 2G) / (U - U_s)` when the level passes through the singular line.
    deflated: Option<Polynomial>,
    /// Taylor expansions of the numerator about endpoints that are roots.
    anchors: Vec<(f64, Polynomial)>,
}

impl LevelSet {
    fn new(params: &TWParams, endpoints: &[f64]) -> Self {
        let numerator = level_polynomial(params);
        let singular = singular_line(params);
        let deflated = (numerator.eval(singular).abs() <= PEAK_CONTACT_TOL * params.energy.abs().max(1.0))
            .then(|| numerator.deflate(singular));
        let anchors = endpoints
            .iter()
            .filter(|&&e| numerator.eval(e).abs() <= 1e-9 * params.energy.abs().max(1.0))
            .map(|&e| {
                let mut shifted = numerator.shifted(e).coeffs().to_vec();
                shifted[0] = 0.0;
                (e, Polynomial::new(shifted))
            })
            .collect();
        Self { params: *params, numerator, deflated, anchors }
    }

    fn numerator_at(&self, u: f64) -> f64 {
        let nearest = self.anchors.iter().min_by(|a, b| (a.0 - u).abs().total_cmp(&(b.0 - u).abs()));
        match nearest {
            Some((e, p)) => p.eval(u - e),
            None => self.numerator.eval(u),
        }
    }

    fn q(&self, u: f64) -> f64 {
        match &self.deflated {
            Some(m) => m.eval(u) / 14.0,
            None => self.numerator_at(u) / curvature_coefficient(u, &self.params),
        }
    }
}

/// A monotone piece of an orbit on one level set, from elevation `from` to `to`.
#[derive(Clone, Debug)]
pub struct Segment {
    params: TWParams,
    from: f64,
    to: f64,
    level: LevelSet,
    quad: PanelIntegral,
}

impl Segment {
    /// Builds the arc `from -> to` on the level `params.energy`.
    ///
    /// Fails with a nonexistence error when `Q = V^2` is not positive strictly
    /// between the endpoints.
    pub fn new(params: &TWParams, from: f64, to: f64) -> Result<Self> {
        if !(from.is_finite() && to.is_finite()) || from == to {
            return Err(Error::InvalidConfig(format!("segment endpoints {from} -> {to}")));
        }
        let level = LevelSet::new(params, &[from, to]);
        let quad = {
            let f = Self::integrand(&level, from, to);
            PanelIntegral::new(&f, PANELS, ORDER)
        };
        if !quad.total().is_finite() || quad.total() <= 0.0 {
            return Err(Error::Nonexistence(format!(
                "level E={} has no real orbit between U={from} and U={to}",
                params.energy
            )));
        }
        for i in 1..64 {
            let u = from + (to - from) * i as f64 / 64.0;
            if !(level.q(u) > 0.0) {
                return Err(Error::Nonexistence(format!(
                    "V^2 = {} <= 0 at U={u} between {from} and {to} on level E={}",
                    level.q(u),
                    params.energy
                )));
            }
        }
        Ok(Self { params: *params, from, to, level, quad })
    }

    fn integrand(level: &LevelSet, from: f64, to: f64) -> impl Fn(f64) -> f64 + '_ {
        move |t: f64| {
            let u = from + (to - from) * 0.5 * (1.0 - libm::cos(PI * t));
            let du = (to - from).abs() * 0.5 * PI * libm::sin(PI * t);
            let q = level.q(u);
            if du == 0.0 {
                0.0
            } else {
                du / libm::sqrt(q)
            }
        }
    }

    fn elevation(&self, t: f64) -> f64 {
        self.from + (self.to - self.from) * 0.5 * (1.0 - libm::cos(PI * t))
    }

    pub fn params(&self) -> &TWParams {
        &self.params
    }

    pub fn from(&self) -> f64 {
        self.from
    }

    pub fn to(&self) -> f64 {
        self.to
    }

    /// Extent in `xi` of the arc.
    pub fn length(&self) -> f64 {
        self.quad.total()
    }

    /// The same arc traversed in the opposite direction.
    pub fn mirrored(&self) -> Segment {
        Segment {
            params: self.params,
            from: self.to,
            to: self.from,
            level: self.level.clone(),
            quad: {
                let f = Self::integrand(&self.level, self.to, self.from);
                PanelIntegral::new(&|t| f(t), PANELS, ORDER)
            },
        }
    }

    /// `U` at distance `s` along the arc, `s` clamped to `[0, length]`.
    pub fn value_at(&self, s: f64) -> f64 {
        let total = self.length();
        let s = s.clamp(0.0, total);
        if s == 0.0 {
            return self.from;
        }
        if s == total {
            return self.to;
        }
        let f = Self::integrand(&self.level, self.from, self.to);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut t = s / total;
        for _ in 0..200 {
            let err = self.quad.cumulative(&f, t) - s;
            if err.abs() <= 1e-15 * total.max(1.0) {
                break;
            }
            if err > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            if hi - lo <= 1e-16 {
                break;
            }
            let slope = f(t);
            let newton = t - err / slope;
            t = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        self.elevation(t)
    }
}

/// Samples a closed chain of segments on `n_points` uniform nodes.
fn sample_chain(segments: &[Segment], n_points: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let lengths: Vec<f64> = segments.iter().map(Segment::length).collect();
    let total: f64 = lengths.iter().sum();
    let h = total / n_points as f64;
    let xi: Vec<f64> = (0..n_points).map(|j| j as f64 * h).collect();
    let values = xi
        .iter()
        .map(|&x| {
            let mut offset = x;
            for (seg, len) in segments.iter().zip(&lengths) {
                if offset <= *len {
                    return seg.value_at(offset);
                }
                offset -= len;
            }
            segments.last().map(|s| s.to()).unwrap_or(0.0)
        })
        .collect();
    (xi, values, total)
}

fn check_same_level(segments: &[Segment], params: &TWParams) -> Result<()> {
    for seg in segments {
        let p = seg.params();
        if (p.speed - params.speed).abs() > 1e-10 || (p.integration_constant - params.integration_constant).abs() > 1e-10
        {
            return Err(Error::InvalidConfig(format!(
                "segment has (c, A) = ({}, {}), expected ({}, {})",
                p.speed, p.integration_constant, params.speed, params.integration_constant
            )));
        }
        let delta = (p.energy - params.energy).abs();
        if delta > 1e-10 {
            return Err(Error::EnergyMismatch { delta });
        }
    }
    Ok(())
}

fn check_chain(segments: &[Segment]) -> Result<()> {
    if segments.is_empty() {
        return Err(Error::InvalidConfig("no segments to compose".into()));
    }
    let n = segments.len();
    for i in 0..n {
        let (a, b) = (&segments[i], &segments[(i + 1) % n]);
        if (a.to() - b.from()).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "segments do not join continuously: U={} then U={}",
                a.to(),
                b.from()
            )));
        }
    }
    Ok(())
}

/// Concatenates segments that share `(c, A, E)` into a periodic composite.
///
/// The chain must close (`last.to == first.from`). Junctions where `V`
/// changes sign are corners on the same level set.
pub fn compose_segments(segments: &[Segment], params: &TWParams, n_points: usize) -> Result<TWProfile> {
    check_same_level(segments, params)?;
    compose_unchecked(segments, params, n_points)
}

/// [`compose_segments`] without the same-energy check, for building the
/// non-symmetric composites that mix levels.
pub fn compose_unchecked(segments: &[Segment], params: &TWParams, n_points: usize) -> Result<TWProfile> {
    check_chain(segments)?;
    if n_points < Grid::MIN_POINTS {
        return Err(Error::InvalidGrid { n_points, length: 0.0 });
    }
    let (xi, values, total) = sample_chain(segments, n_points);
    Ok(TWProfile {
        params: *params,
        xi,
        values,
        regularity: Regularity::Composite,
        period: Some(total),
        window: total,
    })
}

/// Which side of the rest state a solitary wave lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Branch {
    Elevation,
    Depression,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Elevation => 1.0,
            Branch::Depression => -1.0,
        }
    }
}

/// The homoclinic orbit of the saddle at the origin (`A = E = 0`).
///
/// With `-2G(U) = U^2 g(U)` the slope is `V = U s(U)`, `s = sqrt(g / D)`, and
///
/// ```text
/// xi(U) = ln(U_max / U) / kappa + int_{U/U_max}^1 (1/s(U_max r) - 1/kappa) dr / r,
/// ```
///
/// where `kappa = s(0)` is the decay rate. The remaining integral is taken in
/// `r = sin(pi tau / 2)`, which removes the inverse square root at the crest.
#[derive(Clone, Debug)]
pub struct SolitaryWave {
    params: TWParams,
    amplitude: f64,
    kappa: f64,
    regularity: Regularity,
    reduced: Polynomial,
    /// Taylor expansion of `g` about the crest when the crest is a root of `g`.
    crest_expansion: Option<Polynomial>,
    peaked_ratio: Option<Polynomial>,
    quad: PanelIntegral,
}

impl SolitaryWave {
    /// Prefers a smooth wave (elevation first), then a singular one.
    pub fn new(speed: f64) -> Result<Self> {
        let candidates = [Branch::Elevation, Branch::Depression];
        let mut singular = None;
        let mut reasons: Vec<String> = Vec::new();
        for branch in candidates {
            match Self::with_branch(speed, branch) {
                Ok(w) if w.regularity == Regularity::SmoothSolitary => return Ok(w),
                Ok(w) => {
                    if singular.is_none() {
                        singular = Some(w);
                    }
                }
                Err(Error::Nonexistence(why)) if !reasons.contains(&why) => reasons.push(why),
                Err(Error::Nonexistence(_)) => {}
                Err(e) => reasons.push(format!("{e}")),
            }
        }
        singular.ok_or_else(|| Error::Nonexistence(reasons.join("; ")))
    }

    pub fn with_branch(speed: f64, branch: Branch) -> Result<Self> {
        let params = TWParams::solitary(speed)?;
        let d0 = curvature_coefficient(0.0, &params);
        if d0 == 0.0 {
            return Err(Error::Nonexistence("c = -1 puts the rest state on the singular line".into()));
        }
        // -2G(U) = U^2 g(U)
        let neg2g = potential(&params).scale(-2.0);
        let reduced = Polynomial::new(neg2g.coeffs()[2..].to_vec());
        let ratio = reduced.eval(0.0) / d0;
        if !(ratio > 0.0) {
            return Err(Error::Nonexistence(format!(
                "origin is not a saddle for c={speed}: F'(0)/D(0) = {} >= 0",
                -ratio
            )));
        }
        let kappa = libm::sqrt(ratio);
        let sign = branch.sign();
        let (lo, hi) = if sign > 0.0 { (0.0, ROOT_WINDOW.1) } else { (ROOT_WINDOW.0, 0.0) };
        let turning = reduced
            .real_roots(lo, hi, ROOT_TOL)
            .into_iter()
            .map(|r| r.value)
            .filter(|v| v * sign > 0.0)
            .min_by(|a, b| a.abs().total_cmp(&b.abs()));
        let singular = singular_line(&params);
        let contact = (singular * sign > 0.0 && singular.abs() <= ROOT_WINDOW.1).then_some(singular);
        let (amplitude, regularity) = match (turning, contact) {
            (Some(t), Some(s)) if s.abs() <= t.abs() => (s, Self::contact_kind(&reduced, s)),
            (Some(t), _) => (t, Regularity::SmoothSolitary),
            (None, Some(s)) => (s, Self::contact_kind(&reduced, s)),
            (None, None) => {
                return Err(Error::Nonexistence(format!(
                    "no turning point or singular contact for the {branch:?} branch at c={speed} in [-10, 10]"
                )))
            }
        };
        let crest_expansion = (regularity == Regularity::SmoothSolitary).then(|| {
            let mut c = reduced.shifted(amplitude).coeffs().to_vec();
            c[0] = 0.0;
            Polynomial::new(c)
        });
        let peaked_ratio = (regularity == Regularity::Peaked).then(|| reduced.deflate(amplitude));
        let mut wave = Self {
            params,
            amplitude,
            kappa,
            regularity,
            reduced,
            crest_expansion,
            peaked_ratio,
            quad: PanelIntegral::new(&|_| 0.0, 1, 1),
        };
        let f = |tau: f64| wave.correction_integrand(tau);
        let quad = PanelIntegral::new(&f, PANELS, ORDER);
        wave.quad = quad;
        Ok(wave)
    }

    fn contact_kind(reduced: &Polynomial, singular: f64) -> Regularity {
        if reduced.eval(singular).abs() * singular * singular <= PEAK_CONTACT_TOL {
            Regularity::Peaked
        } else {
            Regularity::Cusped
        }
    }

    /// `1 / s(U)` with `s = sqrt(g / D)`.
    fn inverse_rate(&self, u: f64) -> f64 {
        if let Some(m) = &self.peaked_ratio {
            return libm::sqrt(14.0 / m.eval(u));
        }
        let g = match &self.crest_expansion {
            Some(p) if (u - self.amplitude).abs() < 0.5 * self.amplitude.abs() => p.eval(u - self.amplitude),
            _ => self.reduced.eval(u),
        };
        let d = curvature_coefficient(u, &self.params);
        if g == 0.0 {
            return f64::INFINITY;
        }
        libm::sqrt(d / g)
    }

    fn correction_integrand(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            // limit of (1/s(U_max r) - 1/kappa) / r as r -> 0, times dr/dtau
            let h = 1e-7;
            let u = self.amplitude * h;
            return (self.inverse_rate(u) - 1.0 / self.kappa) / h * 0.5 * PI;
        }
        let r = libm::sin(0.5 * PI * tau);
        let dr = 0.5 * PI * libm::cos(0.5 * PI * tau);
        if dr == 0.0 {
            return 0.0;
        }
        (self.inverse_rate(self.amplitude * r) - 1.0 / self.kappa) / r * dr
    }

    pub fn params(&self) -> &TWParams {
        &self.params
    }

    /// Signed crest (or trough) elevation.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Exponential decay rate `sqrt((c - 1) / (c + 1))` of the tails.
    pub fn decay_rate(&self) -> f64 {
        self.kappa
    }

    pub fn regularity(&self) -> Regularity {
        self.regularity
    }

    /// Distance from the crest at which the profile equals `amplitude * sin(pi tau / 2)`.
    fn distance(&self, tau: f64) -> f64 {
        let f = |t: f64| self.correction_integrand(t);
        let r = libm::sin(0.5 * PI * tau);
        -libm::log(r) / self.kappa + (self.quad.total() - self.quad.cumulative(&f, tau))
    }

    /// `U(xi)` with the crest at `xi = 0`.
    pub fn value_at(&self, xi: f64) -> f64 {
        let target = xi.abs();
        if target == 0.0 {
            return self.amplitude;
        }
        let offset = self.quad.total();
        if self.kappa * (target - offset) > 700.0 {
            return 0.0;
        }
        // Work in z = ln(tau); xi(z) is decreasing and close to linear in z.
        let xi_of = |z: f64| self.distance(libm::exp(z));
        let mut hi = 0.0f64;
        let guess = libm::log(2.0 / PI) - self.kappa * (target - offset);
        let mut lo = guess.min(-1.0) - 2.0;
        while xi_of(lo) < target {
            lo -= 4.0;
        }
        let mut z = guess.clamp(lo, hi);
        let f = |t: f64| self.correction_integrand(t);
        for _ in 0..200 {
            let err = xi_of(z) - target;
            if err.abs() <= 1e-14 * target.max(1.0) {
                break;
            }
            if err > 0.0 {
                lo = z;
            } else {
                hi = z;
            }
            if hi - lo <= 1e-15 {
                break;
            }
            let tau = libm::exp(z);
            let r = libm::sin(0.5 * PI * tau);
            let dr = 0.5 * PI * libm::cos(0.5 * PI * tau);
            // d xi / d z = tau * (-(dr / r) / kappa - correction)
            let derivative = tau * (-(dr / r) / self.kappa - f(tau));
            let newton = z - err / derivative;
            z = if derivative < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        self.amplitude * libm::sin(0.5 * PI * libm::exp(z))
    }

    /// `U'(xi)` from the level set, with the sign fixed by the side of the crest.
    pub fn slope_at(&self, xi: f64) -> f64 {
        let u = self.value_at(xi);
        let rate = 1.0 / self.inverse_rate(u);
        -xi.signum() * self.amplitude.signum() * u.abs() * rate
    }

    /// Samples the wave on `grid` with its crest at the window center.
    pub fn sample(&self, grid: &Grid) -> Result<TWProfile> {
        let center = 0.5 * grid.length();
        let xi: Vec<f64> = grid.points().collect();
        let values: Vec<f64> = xi.iter().map(|&x| self.value_at(x - center)).collect();
        let edge = self.value_at(center).abs();
        if self.regularity == Regularity::SmoothSolitary && edge > 1e-6 * self.amplitude.abs() {
            return Err(Error::InvalidConfig(format!(
                "window {} too short: U at the edge is {edge:e} (decay rate {})",
                grid.length(),
                self.kappa
            )));
        }
        Ok(TWProfile {
            params: self.params,
            xi,
            values,
            regularity: self.regularity,
            period: None,
            window: grid.length(),
        })
    }
}

/// Solitary profile of speed `c` sampled on `grid`, crest at the center.
pub fn solitary_profile(speed: f64, grid: &Grid) -> Result<TWProfile> {
    SolitaryWave::new(speed)?.sample(grid)
}

/// Window length at which a smooth solitary wave of speed `c` has decayed
/// to `ratio` of its amplitude at both edges.
pub fn solitary_window(speed: f64, ratio: f64) -> Result<f64> {
    let wave = SolitaryWave::new(speed)?;
    Ok(2.0 * (libm::log(1.0 / ratio) / wave.decay_rate() + wave.quad.total().abs() + 1.0))
}

/// Adjacent simple turning points `U1 < U2` bounding a smooth oval.
pub fn periodic_bounds(params: &TWParams) -> Result<(f64, f64)> {
    let roots: Vec<f64> = turning_points(params).into_iter().filter(|r| !r.tangency).map(|r| r.value).collect();
    let level = LevelSet::new(params, &roots);
    let singular = singular_line(params);
    roots
        .windows(2)
        .map(|w| (w[0], w[1]))
        .find(|&(a, b)| !(a - 1e-9..=b + 1e-9).contains(&singular) && level.q(0.5 * (a + b)) > 0.0)
        .ok_or_else(|| {
            Error::Nonexistence(format!(
                "no pair of adjacent simple turning points with V^2 > 0 between them at (c, A, E) = ({}, {}, {})",
                params.speed, params.integration_constant, params.energy
            ))
        })
}

/// Smooth periodic profile: trough at `xi = 0`, crest at half a period.
pub fn periodic_profile(params: &TWParams, n_points: usize) -> Result<TWProfile> {
    let (low, high) = periodic_bounds(params)?;
    let rise = Segment::new(params, low, high)?;
    let mut profile = compose_segments(&[rise.clone(), rise.mirrored()], params, n_points)?;
    profile.regularity = Regularity::SmoothPeriodic;
    Ok(profile)
}

/// Period `2 int_{U1}^{U2} dU / sqrt(Q)` of the smooth oval at this level.
pub fn period(params: &TWParams) -> Result<f64> {
    let (low, high) = periodic_bounds(params)?;
    Ok(2.0 * Segment::new(params, low, high)?.length())
}

/// Periodic wave whose orbit runs from a turning point to the singular line
/// and back on the same level: peaked when the level passes through the
/// singular line with finite slope, cusped otherwise.
pub fn contact_profile(params: &TWParams, n_points: usize) -> Result<TWProfile> {
    let singular = singular_line(params);
    let roots: Vec<f64> = turning_points(params).into_iter().filter(|r| !r.tangency).map(|r| r.value).collect();
    let level = LevelSet::new(params, &roots);
    let peaked = level.deflated.is_some();
    let below = roots.iter().copied().rfind(|&r| r < singular - 1e-9);
    let above = roots.iter().copied().find(|&r| r > singular + 1e-9);
    for turning in [below, above].into_iter().flatten() {
        if level.q(0.5 * (turning + singular)) > 0.0 {
            let rise = Segment::new(params, turning, singular)?;
            let mut profile = compose_segments(&[rise.clone(), rise.mirrored()], params, n_points)?;
            profile.regularity = if peaked { Regularity::Peaked } else { Regularity::Cusped };
            return Ok(profile);
        }
    }
    Err(Error::Nonexistence(format!(
        "no orbit connects a turning point to the singular line U_s={singular} at (c, A, E) = ({}, {}, {})",
        params.speed, params.integration_constant, params.energy
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_equilibrium() {
        let params = TWParams::solitary(1.2).unwrap();
        let f = planar_field(PhasePoint::new(0.0, 0.0), &params).unwrap();
        assert_eq!(f, PhasePoint::new(0.0, 0.0));
        assert_eq!(first_integral(PhasePoint::new(0.0, 0.0), &params), 0.0);
    }

    #[test]
    fn zero_slope_gives_zero_velocity() {
        let params = TWParams::new(0.5, 0.2, 0.1).unwrap();
        for u in [-0.3, 0.1, 0.7] {
            assert_eq!(planar_field(PhasePoint::new(u, 0.0), &params).unwrap().elevation, 0.0);
        }
    }

    #[test]
    fn singular_line_values() {
        assert_eq!(singular_line(&TWParams::solitary(-1.0).unwrap()), 0.0);
        assert_eq!(singular_line(&TWParams::solitary(13.0).unwrap()), -1.0);
        let params = TWParams::solitary(13.0).unwrap();
        assert!(planar_field(PhasePoint::new(-1.0, 0.3), &params).is_err());
    }

    #[test]
    fn turning_point_at_rest_state() {
        let params = TWParams::solitary(1.2).unwrap();
        let roots = turning_points(&params);
        let zero = roots.iter().find(|r| r.value.abs() < 1e-10).expect("U = 0 is a root");
        assert!(zero.tangency);
    }

    #[test]
    fn saddle_condition() {
        assert!(SolitaryWave::new(0.5).is_err());
        assert!(SolitaryWave::new(1.2).is_ok());
    }

    #[test]
    fn energy_mismatch_is_rejected() {
        let level = TWParams::new(1.2, 0.0, -2e-4).unwrap();
        let (a, b) = periodic_bounds(&level).unwrap();
        // a larger oval contains b, so the arc b -> c exists on it
        let other = level.with_energy(-1e-4);
        let (c, _) = periodic_bounds(&other).unwrap();
        let rise = Segment::new(&level, a, b).unwrap();
        let fall = Segment::new(&other, b, c).unwrap();
        match compose_segments(&[rise, fall], &level, 64).unwrap_err() {
            Error::EnergyMismatch { delta } => assert!((delta - 1e-4).abs() < 1e-12),
            e => panic!("unexpected {e:?}"),
        }
    }
}
