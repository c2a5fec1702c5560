//! Level equations of the singular regions and the solvers built on them.
//!
//! Every region's equation is brought to the form `P(E) + ν ≡ 0 (mod π)`
//! with a phase `P` that increases in E between consecutive poles:
//!
//! * subcritical: `P = atan(f(E)/Γ(1−2γ))`
//! * critical: `P = −atan(g(E))`
//! * overcritical: `P = π/2 − Θ(E)`
//!
//! The merit function used for residuals and the brute-force scan is
//! `P(E) + ν` reduced into [−π/2, π/2].

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{pole_ladder, sommerfeld_energy, Channel, ChannelError, ExtensionAngle, Region, Zeta};
use crate::specfun::{arg_gamma_continuous, digamma, ln_gamma_diff_large, ln_gamma_signed, sin_pi, SignLog, SpecfunError, EULER_GAMMA};

/// Every returned level satisfies its equation to this phase residual.
pub const RESIDUAL_BOUND: f64 = 1e-10;

/// Imaginary offset standing in for the E → −1 limit of B₃ (variant a only).
const EDGE_IMAG: f64 = 1e-200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Special(#[from] SpecfunError),
    #[error("the extension is unique for a nonsingular channel ({0}); no extension angle applies")]
    ExtensionNotApplicable(String),
    #[error("an extension angle is required in the {0} region")]
    ExtensionRequired(Region),
    #[error("{op} needs a {expected} channel, got {got}")]
    WrongRegion {
        op: &'static str,
        expected: &'static str,
        got: Region,
    },
    #[error("energy {0} is outside the open interval (-1, 1)")]
    OutsideInterval(f64),
    #[error("level n = {n} of channel [{channel}] at nu = {nu} cannot be resolved in double precision (residual {residual:e})")]
    Unresolvable {
        channel: String,
        nu: f64,
        n: u32,
        residual: f64,
    },
    #[error("no bracket for level n = {n} of channel [{channel}] at nu = {nu}: {reason}")]
    NoBracket {
        channel: String,
        nu: f64,
        n: u32,
        reason: String,
    },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// How the logarithms of the overcritical B-factors are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaVariant {
    /// arg Γ(B₁) + arg Γ(B₂) + arg B₃ + σ ln 2τ.
    #[default]
    BracketOutsideGamma,
    /// arg Γ(B₁) + arg Γ(B₂) + arg Γ(B₃) + σ ln 2τ.
    AllInsideGamma,
}

impl ThetaVariant {
    pub const ALL: [ThetaVariant; 2] = [ThetaVariant::BracketOutsideGamma, ThetaVariant::AllInsideGamma];

    pub fn as_str(self) -> &'static str {
        match self {
            ThetaVariant::BracketOutsideGamma => "bracket-outside-gamma",
            ThetaVariant::AllInsideGamma => "all-inside-gamma",
        }
    }
}

impl fmt::Display for ThetaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThetaVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "bracket-outside-gamma" | "b" => Ok(ThetaVariant::BracketOutsideGamma),
            "all-inside-gamma" | "a" => Ok(ThetaVariant::AllInsideGamma),
            other => Err(format!(
                "unknown theta variant '{other}' (expected bracket-outside-gamma or all-inside-gamma)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Highest level index returned.
    pub n_max: u32,
    /// Bracket width at which bisection may stop (E/m).
    pub bisect_tol: f64,
    /// Brute-force samples per unit of x = qE/τ (roughly per level).
    pub scan_points: usize,
    pub theta_variant: ThetaVariant,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_max: 10,
            bisect_tol: 1e-13,
            scan_points: 4096,
            theta_variant: ThetaVariant::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_n_max(self, n_max: u32) -> Self {
        SolverConfig { n_max, ..self }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.n_max < 1 {
            return Err(SolveError::InvalidConfig("n_max must be at least 1".into()));
        }
        if !(self.bisect_tol > 0.0) {
            return Err(SolveError::InvalidConfig("bisect_tol must be positive".into()));
        }
        if self.scan_points < 16 {
            return Err(SolveError::InvalidConfig("scan_points must be at least 16".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: u32,
    /// E/m.
    pub energy: f64,
    pub residual: f64,
}

/// The discrete spectrum of one channel and extension, up to `n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub channel: Channel,
    pub region: Region,
    pub nu: Option<ExtensionAngle>,
    /// ν_{−m}, absent for nonsingular channels.
    pub nu_lower: Option<f64>,
    pub levels: Vec<Level>,
    /// Non-fatal findings, e.g. a non-monotone stretch of Θ.
    pub diagnostics: Vec<String>,
}

impl LevelSet {
    pub fn get(&self, n: u32) -> Option<&Level> {
        self.levels.iter().find(|l| l.n == n)
    }

    pub fn energy(&self, n: u32) -> Option<f64> {
        self.get(n).map(|l| l.energy)
    }

    pub fn indices(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.n).collect()
    }
}

/// x = qE/τ and τ = sqrt(1 − E²), with R − x = q(1 − E)/τ formed without
/// cancellation.
#[derive(Debug, Clone, Copy)]
struct Kinematics {
    x: f64,
    tau: f64,
    r_minus_x: f64,
}

fn kinematics(e: f64, q: f64) -> Result<Kinematics, SolveError> {
    if !(e > -1.0 && e < 1.0) {
        return Err(SolveError::OutsideInterval(e));
    }
    let tau = ((1.0 - e) * (1.0 + e)).sqrt();
    Ok(Kinematics {
        x: q * e / tau,
        tau,
        r_minus_x: q * (1.0 - e) / tau,
    })
}

/// Reduces a phase into [−π/2, π/2].
pub fn wrap_pi(x: f64) -> f64 {
    x - PI * (x / PI).round()
}

fn ln_gamma_or_pole(x: f64) -> Result<SignLog, SolveError> {
    match ln_gamma_signed(x) {
        Ok(v) => Ok(v),
        Err(SpecfunError::Pole(_)) => Ok(SignLog::pole(1)),
        Err(e) => Err(e.into()),
    }
}

/// Γ(u)/Γ(v) in SignLog form, stable for large |u|, |v| of equal sign.
fn gamma_ratio(u: f64, v: f64) -> Result<SignLog, SolveError> {
    if u >= 10.0 && v >= 10.0 {
        return Ok(SignLog::new(1, ln_gamma_diff_large(v, u - v, 0.0)));
    }
    if u <= -9.0 && v <= -9.0 {
        // Γ(u)/Γ(v) = [sin πv / sin πu]·Γ(1−v)/Γ(1−u)
        let su = sin_pi(u);
        let sv = sin_pi(v);
        if su == 0.0 {
            return Ok(SignLog::pole(1));
        }
        let mag = ln_gamma_diff_large(1.0 - u, u - v, 0.0);
        return Ok((SignLog::from_f64(sv) / SignLog::from_f64(su)).scale_ln(mag));
    }
    let num = ln_gamma_or_pole(u)?;
    let den = ln_gamma_or_pole(v)?;
    match (num.is_pole(), den.is_pole()) {
        (true, true) => Err(SolveError::Special(SpecfunError::Pole(u))),
        _ => Ok(num / den),
    }
}

fn require(channel: &Channel, region: Region, op: &'static str) -> Result<(), SolveError> {
    let got = channel.region();
    if got != region {
        return Err(SolveError::WrongRegion {
            op,
            expected: region.as_str(),
            got,
        });
    }
    Ok(())
}

/// f(E) of the subcritical level equation.
///
/// The removable zero/pole pair shared by Γ(−γ − x)/Γ(γ − x) and the bracket
/// ratio is cancelled analytically, leaving only the ladder poles and the
/// Sommerfeld zeros.
pub fn f_subcritical(e: f64, channel: &Channel) -> Result<SignLog, SolveError> {
    require(channel, Region::Subcritical, "f_subcritical")?;
    let g = channel.gamma().unwrap_or(0.0);
    subcritical_core(e, channel, ln_gamma_signed(1.0 + 2.0 * g)?)
}

/// f(E) with the constant Γ factor supplied by the caller.
fn subcritical_core(e: f64, channel: &Channel, prefactor: SignLog) -> Result<SignLog, SolveError> {
    let q = channel.q();
    let c = channel.j().plus_half();
    let g = channel.gamma().unwrap_or(0.0);
    let k = kinematics(e, q)?;
    let d = k.r_minus_x;
    let (ratio, brackets) = match channel.zeta() {
        Zeta::Plus => (gamma_ratio(1.0 - g - k.x, 1.0 + g - k.x)?, (d + c + g) / (d + c - g)),
        Zeta::Minus => (gamma_ratio(-g - k.x, g - k.x)?, (d + c - g) / (d + c + g)),
    };
    let two_tau = LN_2 + 0.5 * ((1.0 - e) * (1.0 + e)).ln();
    Ok((prefactor * ratio * SignLog::from_f64(brackets)).scale_ln(-2.0 * g * two_tau))
}

/// g(E) of the critical level equation; `±inf` at its poles.
///
/// The term [ζ − (τ + ζ)/E]/(2c) is folded into ψ and rewritten with
/// (τ − 1)/E = −E/(1 + τ), which is finite at E = 0. For ζ = −1 the pole of
/// ψ(−x) at E = 0 remains and is a genuine ladder pole.
pub fn g_critical(e: f64, channel: &Channel) -> Result<f64, SolveError> {
    require(channel, Region::Critical, "g_critical")?;
    let c = channel.j().plus_half();
    let k = kinematics(e, c)?;
    let ln_two_tau = LN_2 + k.tau.ln();
    // x/(R + c) with R = c/τ
    let x_over = k.x / (c / k.tau + c);
    let psi_arg = match channel.zeta() {
        Zeta::Plus => 1.0 - k.x,
        Zeta::Minus => -k.x,
    };
    let psi = match digamma(psi_arg) {
        Ok(v) => v,
        Err(SpecfunError::Pole(_)) => return Ok(f64::INFINITY),
        Err(e) => return Err(e.into()),
    };
    let rest = match channel.zeta() {
        Zeta::Plus => (1.0 - x_over) / (2.0 * c),
        Zeta::Minus => (x_over - 1.0) / (2.0 * c),
    };
    Ok(ln_two_tau + psi + rest + 2.0 * EULER_GAMMA)
}

/// The phase Θ(E) of the overcritical level equation cos(Θ − ν) = 0,
/// continuous on (−1, 1).
pub fn theta_overcritical(e: f64, channel: &Channel, variant: ThetaVariant) -> Result<f64, SolveError> {
    require(channel, Region::Overcritical, "theta_overcritical")?;
    let s = channel.sigma().unwrap_or(0.0);
    theta_core(e, channel, variant, arg_gamma_continuous(0.0, -2.0 * s)?)
}

/// Θ(E) with the constant arg Γ(B₁) supplied by the caller.
fn theta_core(e: f64, channel: &Channel, variant: ThetaVariant, b1: f64) -> Result<f64, SolveError> {
    let q = channel.q();
    let c = channel.j().plus_half();
    let s = channel.sigma().unwrap_or(0.0);
    let z = channel.zeta().sign();
    let k = kinematics(e, q)?;
    let b2 = arg_gamma_continuous(-k.x, s)?;
    let b3 = match variant {
        // B₃/τ = c − ζ(R − x) − iζσ; dividing by τ > 0 keeps the argument.
        ThetaVariant::BracketOutsideGamma => (-z * s).atan2(c - z * k.r_minus_x),
        ThetaVariant::AllInsideGamma => {
            arg_gamma_continuous(k.tau * c - z * q * (1.0 - e), -z * k.tau * s)?
        }
    };
    Ok(b1 + b2 + b3 + s * (LN_2 + k.tau.ln()))
}

/// lim Θ(E) as E → −1, taken analytically: σ ln 2τ + arg Γ(iσ − x) → σ ln 2q.
pub fn theta_lower_limit(channel: &Channel, variant: ThetaVariant) -> Result<f64, SolveError> {
    require(channel, Region::Overcritical, "theta_lower_limit")?;
    let q = channel.q();
    let s = channel.sigma().unwrap_or(0.0);
    let base = arg_gamma_continuous(0.0, -2.0 * s)? + s * (2.0 * q).ln();
    let b3 = match (variant, channel.zeta()) {
        // B₃/τ → −ζ·∞ − iζσ
        (ThetaVariant::BracketOutsideGamma, Zeta::Plus) => -PI,
        (ThetaVariant::BracketOutsideGamma, Zeta::Minus) => 0.0,
        // B₃ → −2ζq from the side Im B₃ = −ζ·0⁺
        (ThetaVariant::AllInsideGamma, zeta) => {
            let zs = zeta.sign();
            arg_gamma_continuous(-2.0 * zs * q, -zs * EDGE_IMAG)?
        }
    };
    Ok(base + b3)
}

/// The angle ν_{−m} at which the lowest level reaches E = −1.
pub fn nu_lower(channel: &Channel) -> Result<ExtensionAngle, SolveError> {
    match channel.region() {
        Region::Subcritical => {
            let g = channel.gamma().unwrap_or(0.0);
            let q = channel.q();
            let t = ln_gamma_signed(1.0 + 2.0 * g)? / ln_gamma_signed(1.0 - 2.0 * g)?;
            Ok(ExtensionAngle::new(-t.scale_ln(-2.0 * g * (2.0 * q).ln()).atan()))
        }
        Region::Critical => {
            let c = channel.j().plus_half();
            let t = (2.0 * c).ln() + 2.0 * EULER_GAMMA + channel.zeta().sign() / c;
            Ok(ExtensionAngle::new(t.atan()))
        }
        Region::Overcritical => {
            let s = channel.sigma().unwrap_or(0.0);
            let q = channel.q();
            let v = FRAC_PI_2 + arg_gamma_continuous(0.0, -2.0 * s)? + s * (2.0 * q).ln();
            Ok(ExtensionAngle::new(v))
        }
        Region::Nonsingular => Err(SolveError::ExtensionNotApplicable(channel.to_string())),
    }
}

/// The region's equation in phase form, with precomputed constants.
struct Equation {
    channel: Channel,
    region: Region,
    variant: ThetaVariant,
    /// ν_{−m} in (−π/2, π/2].
    nu_m: f64,
    /// lim_{E→−1} P(E) (unreduced for the overcritical phase).
    phase_floor: f64,
    /// Θ(−m), overcritical only.
    theta_floor: f64,
    /// Γ(1+2γ)/Γ(1−2γ) (subcritical) or arg Γ(B₁) (overcritical).
    f_scale: SignLog,
    arg_b1: f64,
}

impl Equation {
    fn new(channel: &Channel, variant: ThetaVariant) -> Result<Self, SolveError> {
        let region = channel.region();
        let nu_m = nu_lower(channel)?.radians();
        let (phase_floor, theta_floor) = match region {
            Region::Overcritical => {
                let t = theta_lower_limit(channel, variant)?;
                (FRAC_PI_2 - t, t)
            }
            _ => (-nu_m, 0.0),
        };
        let (f_scale, arg_b1) = match region {
            Region::Subcritical => {
                let g = channel.gamma().unwrap_or(0.0);
                (ln_gamma_signed(1.0 + 2.0 * g)? / ln_gamma_signed(1.0 - 2.0 * g)?, 0.0)
            }
            Region::Overcritical => {
                let s = channel.sigma().unwrap_or(0.0);
                (SignLog::ONE, arg_gamma_continuous(0.0, -2.0 * s)?)
            }
            _ => (SignLog::ONE, 0.0),
        };
        Ok(Equation {
            channel: *channel,
            region,
            variant,
            nu_m,
            phase_floor,
            theta_floor,
            f_scale,
            arg_b1,
        })
    }

    /// P(E); at E = −1 the analytic limit.
    fn phase(&self, e: f64) -> Result<f64, SolveError> {
        if e == -1.0 {
            return Ok(self.phase_floor);
        }
        match self.region {
            Region::Subcritical => Ok(subcritical_core(e, &self.channel, self.f_scale)?.atan()),
            Region::Critical => Ok(-g_critical(e, &self.channel)?.atan()),
            Region::Overcritical => Ok(FRAC_PI_2 - self.theta(e)?),
            Region::Nonsingular => unreachable!("no level equation in the nonsingular region"),
        }
    }

    fn merit(&self, e: f64, nu: f64) -> Result<f64, SolveError> {
        Ok(wrap_pi(self.phase(e)? + nu))
    }

    /// Θ(−m) − Θ(E), increasing from 0.
    fn theta_drop(&self, e: f64) -> Result<f64, SolveError> {
        if e == -1.0 {
            return Ok(0.0);
        }
        Ok(self.theta_floor - self.theta(e)?)
    }

    fn theta(&self, e: f64) -> Result<f64, SolveError> {
        theta_core(e, &self.channel, self.variant, self.arg_b1)
    }
}

/// Phase residual of `energy` in its region's equation.
pub fn level_residual(
    channel: &Channel,
    nu: ExtensionAngle,
    energy: f64,
    variant: ThetaVariant,
) -> Result<f64, SolveError> {
    let eq = Equation::new(channel, variant)?;
    Ok(eq.merit(energy, nu.radians())?.abs())
}

/// Bisection for an increasing `h` with h(a) ≤ 0 ≤ h(b). `ha`/`hb` may be
/// one-sided limits; only interior points are evaluated. Stops once the
/// bracket is below `tol` and the better endpoint meets the residual bound,
/// or when no representable midpoint remains.
fn bisect<H>(h: H, mut a: f64, mut b: f64, mut ha: f64, mut hb: f64, tol: f64) -> Result<(f64, f64), SolveError>
where
    H: Fn(f64) -> Result<f64, SolveError>,
{
    loop {
        let best = ha.abs().min(hb.abs());
        if b - a <= tol && best <= RESIDUAL_BOUND / 4.0 {
            break;
        }
        let mid = a + 0.5 * (b - a);
        if mid <= a || mid >= b {
            break;
        }
        let hm = h(mid)?;
        if hm < 0.0 {
            a = mid;
            ha = hm;
        } else {
            b = mid;
            hb = hm;
        }
    }
    Ok(if ha.abs() <= hb.abs() { (a, ha) } else { (b, hb) })
}

fn describe(channel: &Channel) -> String {
    channel.to_string()
}

fn nonsingular_levels(channel: &Channel, cfg: &SolverConfig) -> Result<LevelSet, SolveError> {
    let g = channel.gamma().unwrap_or(0.0);
    let q = channel.q();
    let mut levels = Vec::new();
    for n in channel.lowest_index()..=cfg.n_max {
        let e = sommerfeld_energy(channel, n)?;
        let x = kinematics(e, q)?.x;
        levels.push(Level {
            n,
            energy: e,
            residual: wrap_pi(PI * (x - g)).abs(),
        });
    }
    Ok(LevelSet {
        channel: *channel,
        region: Region::Nonsingular,
        nu: None,
        nu_lower: None,
        levels,
        diagnostics: Vec::new(),
    })
}

/// Solves for the levels n ≤ `cfg.n_max` of `channel` under extension `nu`.
///
/// `nu` must be `None` exactly when the channel is nonsingular.
pub fn solve_levels(channel: &Channel, nu: Option<ExtensionAngle>, cfg: &SolverConfig) -> Result<LevelSet, SolveError> {
    cfg.validate()?;
    let region = channel.region();
    let nu = match (region, nu) {
        (Region::Nonsingular, None) => return nonsingular_levels(channel, cfg),
        (Region::Nonsingular, Some(_)) => return Err(SolveError::ExtensionNotApplicable(describe(channel))),
        (_, None) => return Err(SolveError::ExtensionRequired(region)),
        (_, Some(nu)) => nu,
    };
    let eq = Equation::new(channel, cfg.theta_variant)?;
    let mut set = LevelSet {
        channel: *channel,
        region,
        nu: Some(nu),
        nu_lower: Some(eq.nu_m),
        levels: Vec::new(),
        diagnostics: Vec::new(),
    };
    match region {
        Region::Overcritical => solve_overcritical(&eq, nu, cfg, &mut set)?,
        _ => solve_between_poles(&eq, nu, cfg, &mut set)?,
    }
    finish(&eq, nu, &mut set)?;
    Ok(set)
}

fn bottom_present(eq: &Equation, nu: ExtensionAngle) -> bool {
    nu.is_lower_edge() || nu.radians() <= eq.nu_m
}

fn solve_between_poles(
    eq: &Equation,
    nu: ExtensionAngle,
    cfg: &SolverConfig,
    set: &mut LevelSet,
) -> Result<(), SolveError> {
    let ch = &eq.channel;
    let v = nu.radians();
    let n0 = ch.lowest_index();
    let h = |e: f64| -> Result<f64, SolveError> { Ok(eq.phase(e)? + v) };
    for n in n0..=cfg.n_max {
        let top = pole_ladder(ch, n)?;
        if n == n0 {
            if !bottom_present(eq, nu) {
                continue;
            }
            if nu.is_lower_edge() {
                set.levels.push(Level { n, energy: top, residual: 0.0 });
                continue;
            }
            let floor = v - eq.nu_m;
            if floor == 0.0 {
                set.levels.push(Level { n, energy: -1.0, residual: 0.0 });
                continue;
            }
            let (e, _) = bisect(h, -1.0, top, floor, FRAC_PI_2 + v, cfg.bisect_tol)?;
            set.levels.push(Level { n, energy: e, residual: 0.0 });
            continue;
        }
        let bottom = pole_ladder(ch, n - 1)?;
        if !(top > bottom) {
            return Err(SolveError::Unresolvable {
                channel: describe(ch),
                nu: v,
                n,
                residual: f64::NAN,
            });
        }
        let e = if nu.is_lower_edge() {
            top
        } else if nu.is_upper_edge() {
            bottom
        } else {
            bisect(h, bottom, top, v - FRAC_PI_2, v + FRAC_PI_2, cfg.bisect_tol)?.0
        };
        set.levels.push(Level { n, energy: e, residual: 0.0 });
    }
    Ok(())
}

/// Step in x between successive overcritical bracket probes.
const X_STEP: f64 = 0.25;
/// Beyond this |x| the spacing of doubles near E = ±1 is too coarse.
const X_LIMIT: f64 = 1e7;

fn energy_of_x(x: f64, q: f64) -> f64 {
    x / q.hypot(x)
}

fn solve_overcritical(
    eq: &Equation,
    nu: ExtensionAngle,
    cfg: &SolverConfig,
    set: &mut LevelSet,
) -> Result<(), SolveError> {
    let ch = &eq.channel;
    let q = ch.q();
    let v = nu.radians();
    // Lower edge: T_n = πn + ν_{−m} + π/2; the upper edge is the same list
    // shifted by one index.
    let mut lo = -1.0;
    let mut d_lo = 0.0;
    let mut x = -4.0;
    for n in 0..=cfg.n_max {
        let target = PI * f64::from(n) + eq.nu_m - v;
        if n == 0 && !bottom_present(eq, nu) {
            continue;
        }
        if target == 0.0 {
            set.levels.push(Level { n, energy: -1.0, residual: 0.0 });
            continue;
        }
        // March the x-grid until Θ(−m) − Θ passes the target.
        let (hi, d_hi) = loop {
            if x > X_LIMIT {
                return Err(SolveError::NoBracket {
                    channel: describe(ch),
                    nu: v,
                    n,
                    reason: "phase target not reached before E = 1".into(),
                });
            }
            let e = energy_of_x(x, q);
            x += X_STEP;
            if e <= lo {
                continue;
            }
            let d = eq.theta_drop(e)?;
            if d < d_lo {
                set.diagnostics.push(format!(
                    "theta is not monotone between E = {lo} and E = {e} (drop {d_lo} -> {d})"
                ));
                let (a, da, b, db) = dense_first_crossing(eq, lo, e, target, cfg.scan_points)?;
                if db >= target {
                    lo = a;
                    d_lo = da;
                    break (b, db);
                }
            }
            if d >= target {
                break (e, d);
            }
            lo = e;
            d_lo = d;
        };
        let h = |e: f64| -> Result<f64, SolveError> { Ok(eq.theta_drop(e)? - target) };
        let (e, _) = bisect(h, lo, hi, d_lo - target, d_hi - target, cfg.bisect_tol)?;
        set.levels.push(Level { n, energy: e, residual: 0.0 });
        // The next level lies above this one; restart the march just below.
        lo = e;
        d_lo = eq.theta_drop(e)?;
        x = (q * e / ((1.0 - e) * (1.0 + e)).sqrt()).max(-4.0);
    }
    Ok(())
}

/// Scans [a, b] uniformly for the first point where the drop reaches
/// `target`, returning the enclosing cell.
fn dense_first_crossing(eq: &Equation, a: f64, b: f64, target: f64, points: usize) -> Result<(f64, f64, f64, f64), SolveError> {
    let mut pa = a;
    let mut da = eq.theta_drop(a)?;
    for i in 1..=points {
        let e = a + (b - a) * i as f64 / points as f64;
        let d = eq.theta_drop(e)?;
        if d >= target {
            return Ok((pa, da, e, d));
        }
        pa = e;
        da = d;
    }
    Ok((pa, da, b, da))
}

/// Fills residuals and checks the LevelSet invariants.
fn finish(eq: &Equation, nu: ExtensionAngle, set: &mut LevelSet) -> Result<(), SolveError> {
    let v = nu.radians();
    let mut prev = f64::NEG_INFINITY;
    for level in &mut set.levels {
        level.residual = eq.merit(level.energy, v)?.abs();
        if level.residual > RESIDUAL_BOUND / 4.0 && level.energy > -1.0 {
            polish(eq, v, level)?;
        }
        if level.residual > RESIDUAL_BOUND || !(level.energy > prev) {
            return Err(SolveError::Unresolvable {
                channel: describe(&eq.channel),
                nu: v,
                n: level.n,
                residual: level.residual,
            });
        }
        prev = level.energy;
    }
    Ok(())
}

/// Steps a few ulps either way when the phase is so steep that a
/// neighbouring double satisfies the equation better (closed-form ladder
/// values near E = 1 can be an ulp off).
fn polish(eq: &Equation, nu: f64, level: &mut Level) -> Result<(), SolveError> {
    const ULPS: i64 = 4;
    let bits = level.energy.to_bits() as i64;
    for k in -ULPS..=ULPS {
        // E ∈ (−1, 1) and the sign does not change within a few ulps of a
        // level this close to E = 1.
        let e = f64::from_bits((bits + if level.energy >= 0.0 { k } else { -k }) as u64);
        if !(e > -1.0 && e < 1.0) {
            continue;
        }
        let r = eq.merit(e, nu)?.abs();
        if r < level.residual {
            level.energy = e;
            level.residual = r;
        }
    }
    Ok(())
}

/// Looks for upward sign changes of the merit in [a, b]. A wrap jump
/// means a pole sits inside, and a root can hide next to it, so such
/// intervals are halved until the jump is isolated.
#[allow(clippy::too_many_arguments)]
fn scan_interval<H>(
    h: &H,
    a: f64,
    b: f64,
    ma: f64,
    mb: f64,
    tol: f64,
    depth: u32,
    roots: &mut Vec<(f64, f64)>,
) -> Result<(), SolveError>
where
    H: Fn(f64) -> Result<f64, SolveError>,
{
    if (mb - ma).abs() < FRAC_PI_2 {
        if ma < 0.0 && mb >= 0.0 {
            roots.push(bisect(h, a, b, ma, mb, tol)?);
        }
        return Ok(());
    }
    let mid = 0.5 * (a + b);
    if depth >= 200 || mid <= a || mid >= b {
        return Ok(());
    }
    let mm = h(mid)?;
    scan_interval(h, a, mid, ma, mm, tol, depth + 1, roots)?;
    scan_interval(h, mid, b, mm, mb, tol, depth + 1, roots)
}

/// Independent oracle: dense scan of the wrapped merit function over
/// (−1, 1), refining every upward zero crossing by bisection.
///
/// Samples are uniform in x = qE/τ (spacing 1/`scan_points`) over the part
/// of the axis holding the first `n_max` levels, plus a logarithmic tail
/// toward E = −1. Intervals straddling a pole are subdivided, and a scan
/// that finds fewer than the expected number of levels is an error.
pub fn brute_force_levels(channel: &Channel, nu: ExtensionAngle, cfg: &SolverConfig) -> Result<LevelSet, SolveError> {
    cfg.validate()?;
    let region = channel.region();
    if region == Region::Nonsingular {
        return Err(SolveError::ExtensionNotApplicable(describe(channel)));
    }
    let eq = Equation::new(channel, cfg.theta_variant)?;
    let q = match region {
        Region::Critical => channel.j().plus_half(),
        _ => channel.q(),
    };
    let v = nu.radians();

    let mut grid = vec![-1.0];
    let decades = 7.0;
    let tail = 40 * decades as usize;
    for i in 0..tail {
        let t = decades * (1.0 - i as f64 / tail as f64);
        grid.push(energy_of_x(-2.0 * 10f64.powf(t), q));
    }
    let x_hi = f64::from(cfg.n_max) + 8.0;
    let uniform = ((x_hi + 2.0) * cfg.scan_points as f64).ceil() as usize;
    for i in 0..=uniform {
        grid.push(energy_of_x(-2.0 + i as f64 / cfg.scan_points as f64, q));
    }
    grid.dedup();

    let merits = grid
        .par_iter()
        .map(|&e| eq.merit(e, v))
        .collect::<Result<Vec<f64>, SolveError>>()?;

    let mut roots = Vec::new();
    if merits[0] == 0.0 {
        roots.push((-1.0, 0.0));
    }
    let h = |e: f64| eq.merit(e, v);
    for i in 0..grid.len() - 1 {
        scan_interval(&h, grid[i], grid[i + 1], merits[i], merits[i + 1], cfg.bisect_tol, 0, &mut roots)?;
    }

    let first = if bottom_present(&eq, nu) {
        channel.lowest_index()
    } else {
        channel.lowest_index() + 1
    };
    let expected = (cfg.n_max + 1).saturating_sub(first) as usize;
    if roots.len() < expected {
        return Err(SolveError::NoBracket {
            channel: describe(channel),
            nu: v,
            n: first + roots.len() as u32,
            reason: format!("the scan found {} of {expected} levels", roots.len()),
        });
    }
    let levels = roots
        .into_iter()
        .zip(first..=cfg.n_max)
        .map(|((energy, m), n)| Level { n, energy, residual: m.abs() })
        .collect();
    let mut set = LevelSet {
        channel: *channel,
        region,
        nu: Some(nu),
        nu_lower: Some(eq.nu_m),
        levels,
        diagnostics: Vec::new(),
    };
    finish(&eq, nu, &mut set)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{HalfInteger, DEFAULT_ALPHA_INV};

    fn ch(z: f64, zeta: Zeta) -> Channel {
        Channel::new(z, DEFAULT_ALPHA_INV, HalfInteger::ONE_HALF, zeta).unwrap()
    }

    fn crit(zeta: Zeta) -> Channel {
        Channel::critical(HalfInteger::ONE_HALF, zeta, DEFAULT_ALPHA_INV).unwrap()
    }

    /// f from the literal formula, without the analytic cancellation.
    fn f_direct(e: f64, c: &Channel) -> f64 {
        let q = c.q();
        let g = c.gamma().unwrap();
        let t = (1.0 - e * e).sqrt();
        let k = c.kappa();
        let lg = |x: f64| ln_gamma_signed(x).unwrap().to_f64();
        lg(1.0 + 2.0 * g) * lg(-g - q * e / t) * (q * (1.0 - e) - (k + g) * t)
            / (lg(g - q * e / t) * (q * (1.0 - e) - (k - g) * t) * (2.0 * t).powf(2.0 * g))
    }

    #[test]
    fn subcritical_function_matches_literal_formula() {
        for zeta in Zeta::BOTH {
            let c = ch(121.0, zeta);
            for e in [-0.9, -0.3, 0.1, 0.42, 0.7, 0.93] {
                let got = f_subcritical(e, &c).unwrap().to_f64();
                let want = f_direct(e, &c);
                assert!(((got - want) / want).abs() < 1e-12, "{zeta} {e}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn subcritical_zeros_and_poles() {
        let c = ch(121.0, Zeta::Plus);
        let e1 = sommerfeld_energy(&c, 1).unwrap();
        assert!(f_subcritical(e1, &c).unwrap().atan().abs() < 1e-12);
        let p1 = pole_ladder(&c, 1).unwrap();
        assert!(f_subcritical(p1, &c).unwrap().atan().abs() > FRAC_PI_2 - 1e-12);
        assert!(f_subcritical(1.0, &c).is_err());
        assert!(f_subcritical(0.0, &ch(138.0, Zeta::Plus)).is_err());
    }

    #[test]
    fn subcritical_lower_limit() {
        let c = ch(121.0, Zeta::Minus);
        let g = c.gamma().unwrap();
        let want = ln_gamma_signed(1.0 + 2.0 * g).unwrap().log_mag - 2.0 * g * (2.0 * c.q()).ln();
        let got = f_subcritical(-1.0 + 1e-15, &c).unwrap().log_mag;
        assert!((got - want).abs() < 1e-6);
    }

    #[test]
    fn nu_lower_values() {
        let v = nu_lower(&ch(121.0, Zeta::Plus)).unwrap().radians();
        assert!((v + 0.036_129_936_923_996).abs() < 1e-12);
        let v = nu_lower(&ch(138.0, Zeta::Minus)).unwrap().radians();
        assert!((v - 0.215_140_584_452_392).abs() < 1e-12);
        let v = nu_lower(&crit(Zeta::Plus)).unwrap().radians();
        assert!((v - 1.233_074_615_161_692).abs() < 1e-12);
        let v = nu_lower(&crit(Zeta::Minus)).unwrap().radians();
        assert!((v - 0.703_086_583_831_569).abs() < 1e-12);
        assert!(nu_lower(&ch(100.0, Zeta::Plus)).is_err());
    }

    #[test]
    fn critical_function_limits_and_poles() {
        let c = crit(Zeta::Plus);
        let want = 2f64.ln() + 2.0 * EULER_GAMMA + 1.0;
        assert!((g_critical(-1.0 + 1e-14, &c).unwrap() - want).abs() < 1e-6);
        assert!(g_critical(0.0, &c).unwrap().is_finite());
        assert!(g_critical(0.0, &crit(Zeta::Minus)).unwrap().is_infinite());
        assert!(g_critical(0.0, &ch(121.0, Zeta::Plus)).is_err());
    }

    #[test]
    fn theta_limit_matches_near_edge_value() {
        for zeta in Zeta::BOTH {
            for variant in ThetaVariant::ALL {
                let c = ch(138.0, zeta);
                let lim = theta_lower_limit(&c, variant).unwrap();
                let near = theta_overcritical(-1.0 + 1e-15, &c, variant).unwrap();
                assert!((lim - near).abs() < 1e-6, "{zeta} {variant}: {lim} vs {near}");
            }
        }
    }

    #[test]
    fn bracket_argument_stays_off_negative_axis() {
        for zeta in Zeta::BOTH {
            let c = ch(160.0, zeta);
            let z = zeta.sign();
            let s = c.sigma().unwrap();
            let mut prev: Option<f64> = None;
            for i in 1..2000 {
                let e = -1.0 + 2.0 * f64::from(i) / 2000.0;
                let k = kinematics(e, c.q()).unwrap();
                let a = (-z * s).atan2(1.0 - z * k.r_minus_x);
                if let Some(p) = prev {
                    assert!((a - p).abs() < 0.5);
                }
                prev = Some(a);
            }
        }
    }

    #[test]
    fn spot_levels() {
        let cfg = SolverConfig::default().with_n_max(4);
        let quarter = ExtensionAngle::from_pi_fraction(1, 4);
        let m_quarter = ExtensionAngle::from_pi_fraction(-1, 4);
        let s = solve_levels(&ch(121.0, Zeta::Plus), Some(m_quarter), &cfg).unwrap();
        assert!((s.energy(1).unwrap() - 0.465_810).abs() < 2e-6);
        let s = solve_levels(&ch(138.0, Zeta::Minus), Some(ExtensionAngle::lower_edge()), &cfg).unwrap();
        assert!((s.energy(0).unwrap() - 0.024_086).abs() < 2e-6);
        let s = solve_levels(&ch(180.0, Zeta::Plus), Some(quarter), &cfg).unwrap();
        assert!((s.energy(0).unwrap() + 0.837_22).abs() < 2e-5);
        let s = solve_levels(&ch(138.0, Zeta::Plus), Some(ExtensionAngle::zero()), &cfg).unwrap();
        assert!((s.energy(1).unwrap() - 0.839_196).abs() < 2e-6);
        let s = solve_levels(&crit(Zeta::Minus), Some(ExtensionAngle::zero()), &cfg).unwrap();
        assert!((s.energy(0).unwrap() + 0.636_533).abs() < 2e-6);
    }

    #[test]
    fn extension_angle_rules() {
        let cfg = SolverConfig::default();
        let c = ch(100.0, Zeta::Plus);
        assert!(matches!(
            solve_levels(&c, Some(ExtensionAngle::zero()), &cfg),
            Err(SolveError::ExtensionNotApplicable(_))
        ));
        assert!(matches!(
            solve_levels(&ch(121.0, Zeta::Plus), None, &cfg),
            Err(SolveError::ExtensionRequired(Region::Subcritical))
        ));
        let s = solve_levels(&c, None, &cfg).unwrap();
        assert_eq!(s.levels[0].n, 1);
        assert!(s.levels.iter().all(|l| l.residual < 1e-12));
    }

    #[test]
    fn edges_hit_the_ladder_exactly() {
        let cfg = SolverConfig::default().with_n_max(5);
        for c in [ch(121.0, Zeta::Plus), ch(121.0, Zeta::Minus), crit(Zeta::Plus), crit(Zeta::Minus)] {
            let lower = solve_levels(&c, Some(ExtensionAngle::lower_edge()), &cfg).unwrap();
            let upper = solve_levels(&c, Some(ExtensionAngle::upper_edge()), &cfg).unwrap();
            for l in &lower.levels {
                assert_eq!(l.energy, pole_ladder(&c, l.n).unwrap(), "{c} n = {}", l.n);
                if l.n < 5 {
                    assert_eq!(upper.energy(l.n + 1), Some(l.energy));
                }
            }
            assert!(upper.get(c.lowest_index()).is_none());
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = SolverConfig { n_max: 0, ..SolverConfig::default() };
        assert!(solve_levels(&ch(121.0, Zeta::Plus), Some(ExtensionAngle::zero()), &bad).is_err());
        let bad = SolverConfig { bisect_tol: 0.0, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
    }
}
