//! Quantum-number bookkeeping for the radial Dirac–Coulomb channels, region
//! classification, and the closed-form spectra.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inverse fine-structure constant used unless overridden.
pub const DEFAULT_ALPHA_INV: f64 = 137.035_999;

/// Electron rest energy in keV, for optional unit conversion of E/m.
pub const ELECTRON_REST_KEV: f64 = 510.998_950;

/// Largest |q − (j + 1/2)| accepted when snapping a channel onto the
/// critical curve.
pub const CRITICAL_SNAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("2j must be a positive odd integer, got {0}")]
    NotHalfInteger(i64),
    #[error("cannot parse '{0}' as a half-integer; expected a fraction like 1/2 or 3/2")]
    BadFraction(String),
    #[error("charge number must be positive and finite, got {0}")]
    BadCharge(f64),
    #[error("inverse fine-structure constant must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("zeta must be +1 or -1, got {0}")]
    BadZeta(String),
    #[error("channel is not critical: |q - (j + 1/2)| = {0:e} exceeds {CRITICAL_SNAP_TOL:e}")]
    NotCritical(f64),
    #[error("index n = {n} is out of range for zeta = {zeta} (lowest is {lowest})")]
    IndexOutOfRange { n: u32, zeta: Zeta, lowest: u32 },
    #[error("{op} is not defined in the {region} region")]
    WrongRegion { op: &'static str, region: Region },
}

/// j ∈ {1/2, 3/2, …}, stored as 2j.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInteger(u32);

impl HalfInteger {
    pub const ONE_HALF: HalfInteger = HalfInteger(1);

    pub fn from_twice(twice: i64) -> Result<Self, ChannelError> {
        if twice >= 1 && twice % 2 == 1 && twice <= i64::from(u32::MAX) {
            Ok(HalfInteger(twice as u32))
        } else {
            Err(ChannelError::NotHalfInteger(twice))
        }
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// j + 1/2, which equals |κ|.
    pub fn plus_half(self) -> f64 {
        f64::from(self.0 + 1) / 2.0
    }

    pub fn next(self) -> Self {
        HalfInteger(self.0 + 2)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

impl FromStr for HalfInteger {
    type Err = ChannelError;

    /// Accepts only exact fractions `N/2` with N odd (`1/2`, `3/2`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ChannelError::BadFraction(s.to_string());
        let (num, den) = s.trim().split_once('/').ok_or_else(bad)?;
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den != 2 {
            return Err(bad());
        }
        HalfInteger::from_twice(num)
    }
}

/// Sign ζ of the spin-operator eigenvalue; κ = ζ(j + 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zeta {
    Plus,
    Minus,
}

impl Zeta {
    pub const BOTH: [Zeta; 2] = [Zeta::Plus, Zeta::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Zeta::Plus => 1.0,
            Zeta::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Zeta::Plus => 1,
            Zeta::Minus => -1,
        }
    }
}

impl fmt::Display for Zeta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zeta::Plus => "+",
            Zeta::Minus => "-",
        })
    }
}

impl FromStr for Zeta {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" => Ok(Zeta::Plus),
            "-" | "-1" | "minus" => Ok(Zeta::Minus),
            other => Err(ChannelError::BadZeta(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Nonsingular,
    Subcritical,
    Critical,
    Overcritical,
}

impl Region {
    pub fn is_singular(self) -> bool {
        self != Region::Nonsingular
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::Nonsingular => "nonsingular",
            Region::Subcritical => "subcritical",
            Region::Critical => "critical",
            Region::Overcritical => "overcritical",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The self-adjoint-extension angle ν on the circle of circumference π.
///
/// Construction normalizes into (−π/2, π/2]. The point −π/2 is the same
/// extension as π/2 but labels the levels differently (the level that sits on
/// a ladder pole is counted as the top of its bracket rather than the bottom
/// of the next); it is only produced by [`ExtensionAngle::lower_edge`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ExtensionAngle(f64);

impl ExtensionAngle {
    pub fn new(raw: f64) -> Self {
        let mut r = raw - PI * (raw / PI).round();
        if r <= -FRAC_PI_2 {
            r += PI;
        }
        if r > FRAC_PI_2 {
            r = FRAC_PI_2;
        }
        ExtensionAngle(r)
    }

    /// ν = (num/den)·π, exact at the quarter points. A literal −1/2 yields
    /// the lower edge.
    pub fn from_pi_fraction(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        if 2 * num == -den {
            return ExtensionAngle::lower_edge();
        }
        let mut r = num.rem_euclid(den);
        if 2 * r > den {
            r -= den;
        }
        if 2 * r == den {
            ExtensionAngle::upper_edge()
        } else {
            ExtensionAngle(r as f64 / den as f64 * PI)
        }
    }

    pub const fn lower_edge() -> Self {
        ExtensionAngle(-FRAC_PI_2)
    }

    pub const fn upper_edge() -> Self {
        ExtensionAngle(FRAC_PI_2)
    }

    pub const fn zero() -> Self {
        ExtensionAngle(0.0)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn is_lower_edge(self) -> bool {
        self.0 == -FRAC_PI_2
    }

    pub fn is_upper_edge(self) -> bool {
        self.0 == FRAC_PI_2
    }

    pub fn is_edge(self) -> bool {
        self.is_lower_edge() || self.is_upper_edge()
    }

    /// Whether both angles select the same Hamiltonian.
    pub fn same_extension(self, other: ExtensionAngle) -> bool {
        let d = (self.0 - other.0).abs();
        d == 0.0 || (self.is_edge() && other.is_edge())
    }
}

impl fmt::Display for ExtensionAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Singular charge Z_s(j) = sqrt(j(j + 1))·α⁻¹.
pub fn z_singular(j: HalfInteger, alpha_inv: f64) -> f64 {
    let jv = j.value();
    (jv * (jv + 1.0)).sqrt() * alpha_inv
}

/// Critical charge Z_c(j) = (j + 1/2)·α⁻¹.
pub fn z_critical(j: HalfInteger, alpha_inv: f64) -> f64 {
    j.plus_half() * alpha_inv
}

/// One radial sector (Z, α, j, ζ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    z: f64,
    alpha_inv: f64,
    j: HalfInteger,
    zeta: Zeta,
    /// Set when q has been snapped to exactly j + 1/2.
    critical: bool,
}

impl Channel {
    pub fn new(z: f64, alpha_inv: f64, j: HalfInteger, zeta: Zeta) -> Result<Self, ChannelError> {
        if !(z.is_finite() && z > 0.0) {
            return Err(ChannelError::BadCharge(z));
        }
        if !(alpha_inv.is_finite() && alpha_inv > 0.0) {
            return Err(ChannelError::BadAlpha(alpha_inv));
        }
        Ok(Channel {
            z,
            alpha_inv,
            j,
            zeta,
            critical: false,
        })
    }

    /// The channel exactly on the critical curve, Z = Z_c(j).
    pub fn critical(j: HalfInteger, zeta: Zeta, alpha_inv: f64) -> Result<Self, ChannelError> {
        let mut ch = Channel::new(z_critical(j, alpha_inv), alpha_inv, j, zeta)?;
        ch.critical = true;
        Ok(ch)
    }

    /// Snaps q onto j + 1/2 when it is within [`CRITICAL_SNAP_TOL`].
    pub fn snap_critical(self) -> Result<Self, ChannelError> {
        let gap = (self.z / self.alpha_inv - self.j.plus_half()).abs();
        if gap > CRITICAL_SNAP_TOL {
            return Err(ChannelError::NotCritical(gap));
        }
        Channel::critical(self.j, self.zeta, self.alpha_inv)
    }

    pub fn with_zeta(self, zeta: Zeta) -> Self {
        Channel { zeta, ..self }
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn alpha_inv(&self) -> f64 {
        self.alpha_inv
    }

    pub fn j(&self) -> HalfInteger {
        self.j
    }

    pub fn zeta(&self) -> Zeta {
        self.zeta
    }

    pub fn is_snapped_critical(&self) -> bool {
        self.critical
    }

    /// Coupling q = Zα.
    pub fn q(&self) -> f64 {
        if self.critical {
            self.j.plus_half()
        } else {
            self.z / self.alpha_inv
        }
    }

    /// Dirac quantum number κ = ζ(j + 1/2).
    pub fn kappa(&self) -> f64 {
        self.zeta.sign() * self.j.plus_half()
    }

    /// γ = sqrt((j + 1/2)² − q²), present unless the channel is overcritical.
    pub fn gamma(&self) -> Option<f64> {
        let c = self.j.plus_half();
        let q = self.q();
        if self.critical || q == c {
            return Some(0.0);
        }
        (q < c).then(|| ((c - q) * (c + q)).sqrt())
    }

    /// σ = sqrt(q² − (j + 1/2)²), present only for overcritical channels.
    pub fn sigma(&self) -> Option<f64> {
        if self.critical {
            return None;
        }
        let c = self.j.plus_half();
        let q = self.q();
        (q > c).then(|| ((q - c) * (q + c)).sqrt())
    }

    pub fn region(&self) -> Region {
        if self.critical {
            return Region::Critical;
        }
        let jv = self.j.value();
        let q = self.q();
        let c = self.j.plus_half();
        if q * q <= jv * (jv + 1.0) {
            Region::Nonsingular
        } else if q < c {
            Region::Subcritical
        } else if q == c {
            // Only reachable with a contrived α; the same exact-q situation
            // as an explicit snap.
            Region::Critical
        } else {
            Region::Overcritical
        }
    }

    /// Smallest level index for this channel in its region.
    pub fn lowest_index(&self) -> u32 {
        match (self.region(), self.zeta) {
            (Region::Overcritical, _) => 0,
            (_, Zeta::Plus) => 1,
            (_, Zeta::Minus) => 0,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Z = {}{}, j = {}, zeta = {}, alpha_inv = {}",
            self.z,
            if self.critical { " (critical)" } else { "" },
            self.j,
            self.zeta,
            self.alpha_inv
        )
    }
}

/// Region of `channel`; with `force_critical` the channel must lie within
/// [`CRITICAL_SNAP_TOL`] of the critical curve and `Critical` is returned.
pub fn classify(channel: &Channel, force_critical: bool) -> Result<Region, ChannelError> {
    if force_critical {
        channel.snap_critical().map(|c| c.region())
    } else {
        Ok(channel.region())
    }
}

/// Number Δ = 2k(Z) of extension parameters of the total Hamiltonian, where
/// k(Z) counts the j with Z > Z_s(j).
pub fn num_extension_params(z: f64, alpha_inv: f64) -> u32 {
    let q = z / alpha_inv;
    // j = l − 1/2 is singular iff l² < 1/4 + q².
    let s = (0.25 + q * q).sqrt();
    let mut k = s.floor() as u32;
    if f64::from(k) == s {
        k -= 1;
    }
    2 * k
}

fn check_index(channel: &Channel, n: u32) -> Result<(), ChannelError> {
    let lowest = match channel.zeta {
        Zeta::Plus => 1,
        Zeta::Minus => 0,
    };
    if n < lowest {
        return Err(ChannelError::IndexOutOfRange {
            n,
            zeta: channel.zeta,
            lowest,
        });
    }
    Ok(())
}

/// Sommerfeld energy E/m = (n + γ)/sqrt(q² + (n + γ)²).
pub fn sommerfeld_energy(channel: &Channel, n: u32) -> Result<f64, ChannelError> {
    let gamma = channel.gamma().ok_or(ChannelError::WrongRegion {
        op: "the Sommerfeld formula",
        region: channel.region(),
    })?;
    check_index(channel, n)?;
    let c = channel.j.plus_half();
    let nf = f64::from(n);
    // q² + (n + γ)² = c² + n(n + 2γ)
    Ok((nf + gamma) / (c * c + nf * (nf + 2.0 * gamma)).sqrt())
}

/// Pole ladder 𝓔_n of the level-equation function: the spectrum at ν = ±π/2.
pub fn pole_ladder(channel: &Channel, n: u32) -> Result<f64, ChannelError> {
    let region = channel.region();
    let c = channel.j.plus_half();
    let nf = f64::from(n);
    match region {
        Region::Subcritical => {
            let gamma = channel.gamma().unwrap_or(0.0);
            Ok((nf - gamma) / (c * c + nf * (nf - 2.0 * gamma)).sqrt())
        }
        Region::Critical => Ok(nf / (c * c + nf * nf).sqrt()),
        _ => Err(ChannelError::WrongRegion {
            op: "the pole ladder",
            region,
        }),
    }
}

/// Nonrelativistic binding energy −q²/(2n²), in units of m.
pub fn nonrel_energy(channel: &Channel, n: u32) -> Result<f64, ChannelError> {
    if n == 0 {
        return Err(ChannelError::IndexOutOfRange {
            n,
            zeta: channel.zeta,
            lowest: 1,
        });
    }
    let q = channel.q();
    let nf = f64::from(n);
    Ok(-q * q / (2.0 * nf * nf))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: HalfInteger = HalfInteger::ONE_HALF;

    fn ch(z: f64, zeta: Zeta) -> Channel {
        Channel::new(z, DEFAULT_ALPHA_INV, HALF, zeta).unwrap()
    }

    #[test]
    fn singular_and_critical_values() {
        let three_halves: HalfInteger = "3/2".parse().unwrap();
        let five_halves: HalfInteger = "5/2".parse().unwrap();
        assert!((z_singular(HALF, 137.04) - 118.68).abs() < 5e-3);
        // The printed 265.37 is truncated; the exact value is 265.3774.
        assert!((z_singular(three_halves, 137.04) - 265.37).abs() < 1e-2);
        assert!((z_singular(HALF, 2.0) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(z_critical(HALF, 137.04), 137.04);
        assert!((z_critical(five_halves, 137.04) - 411.12).abs() < 1e-9);
        assert_eq!(z_critical(HALF, 2.0), 2.0);
    }

    #[test]
    fn half_integer_parsing() {
        assert_eq!("1/2".parse::<HalfInteger>().unwrap().twice(), 1);
        assert_eq!(" 7/2 ".parse::<HalfInteger>().unwrap().twice(), 7);
        for bad in ["0.5", "2/2", "1/3", "-1/2", "1", "x/2", "0/2"] {
            assert!(bad.parse::<HalfInteger>().is_err(), "{bad}");
        }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&ch(100.0, Zeta::Plus), false).unwrap(), Region::Nonsingular);
        assert_eq!(classify(&ch(121.0, Zeta::Plus), false).unwrap(), Region::Subcritical);
        assert_eq!(classify(&ch(138.0, Zeta::Minus), false).unwrap(), Region::Overcritical);
        assert!(matches!(
            classify(&ch(137.0, Zeta::Plus), true),
            Err(ChannelError::NotCritical(_))
        ));
        let near = Channel::new(137.035_999 + 1e-5, DEFAULT_ALPHA_INV, HALF, Zeta::Plus).unwrap();
        assert_eq!(classify(&near, true).unwrap(), Region::Critical);
        let snapped = near.snap_critical().unwrap();
        assert_eq!(snapped.q(), 1.0);
        assert_eq!(snapped.gamma(), Some(0.0));
        assert_eq!(snapped.sigma(), None);
    }

    #[test]
    fn channel_validation() {
        assert!(Channel::new(0.0, 137.0, HALF, Zeta::Plus).is_err());
        assert!(Channel::new(10.0, -1.0, HALF, Zeta::Plus).is_err());
        assert!(Channel::new(f64::NAN, 137.0, HALF, Zeta::Plus).is_err());
        let c = ch(138.0, Zeta::Minus);
        assert_eq!(c.kappa(), -1.0);
        assert!(c.gamma().is_none());
        assert!((c.sigma().unwrap() - 0.118_822_543_022_728_8).abs() < 1e-12);
    }

    #[test]
    fn extension_counts() {
        assert_eq!(num_extension_params(118.0, DEFAULT_ALPHA_INV), 0);
        assert_eq!(num_extension_params(119.0, DEFAULT_ALPHA_INV), 2);
        assert_eq!(num_extension_params(266.0, DEFAULT_ALPHA_INV), 4);
    }

    #[test]
    fn sommerfeld_examples() {
        let c = ch(121.0, Zeta::Plus);
        assert!((sommerfeld_energy(&c, 1).unwrap() - 0.85715).abs() < 1e-5);
        let minus = c.with_zeta(Zeta::Minus);
        let gamma = minus.gamma().unwrap();
        assert!((gamma - 0.469_411).abs() < 1e-6);
        assert_eq!(sommerfeld_energy(&minus, 0).unwrap(), gamma);
        assert!(sommerfeld_energy(&c, 0).is_err());
        let crit = Channel::critical(HALF, Zeta::Plus, DEFAULT_ALPHA_INV).unwrap();
        assert!((sommerfeld_energy(&crit, 1).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(sommerfeld_energy(&ch(138.0, Zeta::Plus), 1).is_err());
    }

    #[test]
    fn ladder_examples() {
        let c = ch(121.0, Zeta::Plus);
        assert!((pole_ladder(&c, 1).unwrap() - 0.515_067).abs() < 1e-6);
        assert_eq!(pole_ladder(&c, 0).unwrap(), -c.gamma().unwrap());
        let crit = Channel::critical(HALF, Zeta::Plus, DEFAULT_ALPHA_INV).unwrap();
        assert!((pole_ladder(&crit, 2).unwrap() - 0.894_427).abs() < 1e-6);
        assert!(pole_ladder(&ch(100.0, Zeta::Plus), 1).is_err());
        assert!(pole_ladder(&ch(138.0, Zeta::Plus), 1).is_err());
    }

    #[test]
    fn nonrel_examples() {
        let unit = Channel::new(1.0, 1.0, HALF, Zeta::Plus).unwrap();
        assert_eq!(nonrel_energy(&unit, 1).unwrap(), -0.5);
        let c = ch(121.0, Zeta::Plus);
        assert!((nonrel_energy(&c, 10).unwrap() + 0.003_898_265).abs() < 1e-9);
        let q = c.q();
        assert_eq!(2.0 * 49.0 * nonrel_energy(&c, 7).unwrap() / (q * q), -1.0);
        assert!(nonrel_energy(&c, 0).is_err());
    }

    #[test]
    fn extension_angle_normalization() {
        assert_eq!(ExtensionAngle::new(-FRAC_PI_2).radians(), FRAC_PI_2);
        assert_eq!(ExtensionAngle::new(FRAC_PI_2).radians(), FRAC_PI_2);
        assert!((ExtensionAngle::new(PI + 0.3).radians() - 0.3).abs() < 1e-15);
        assert!((ExtensionAngle::new(-2.0).radians() - (PI - 2.0)).abs() < 1e-15);
        assert_eq!(ExtensionAngle::from_pi_fraction(-1, 2), ExtensionAngle::lower_edge());
        assert_eq!(ExtensionAngle::from_pi_fraction(1, 2), ExtensionAngle::upper_edge());
        assert_eq!(ExtensionAngle::from_pi_fraction(1, 4).radians(), std::f64::consts::FRAC_PI_4);
        assert_eq!(ExtensionAngle::from_pi_fraction(-1, 4).radians(), -std::f64::consts::FRAC_PI_4);
        assert_eq!(ExtensionAngle::from_pi_fraction(0, 1).radians(), 0.0);
        assert!(ExtensionAngle::lower_edge().same_extension(ExtensionAngle::upper_edge()));
    }
}
