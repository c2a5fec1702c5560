//! Real gamma with sign tracking, digamma, and a branch-continuous argument
//! of Γ at complex points.
//!
//! Everything here is a pure function of `f64` inputs. Gamma magnitudes are
//! only ever handed out as [`SignLog`] values; the Γ ratios that appear in the
//! level equations overflow long before their quotient does.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Div, Mul};

use num_complex::Complex64;
use thiserror::Error;

/// Euler–Mascheroni constant γ_E.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Below this real part `arg_gamma_continuous` switches from the upward
/// recurrence to the reflection formula.
const ARG_REFLECT_BELOW: f64 = -16.0;

/// Real part at which the Stirling series takes over.
const STIRLING_MIN: f64 = 8.0;

/// ζ(k) − 1 for k = 2..=41.
const ZETA_MINUS_ONE: [f64; 40] = [
    6.44934066848226406e-01,
    2.02056903159594292e-01,
    8.23232337111381857e-02,
    3.69277551433699266e-02,
    1.73430619844491402e-02,
    8.34927738192282713e-03,
    4.07735619794433960e-03,
    2.00839282608221426e-03,
    9.94575127818085256e-04,
    4.94188604119464529e-04,
    2.46086553308048320e-04,
    1.22713347578489145e-04,
    6.12481350587048277e-05,
    3.05882363070204933e-05,
    1.52822594086518710e-05,
    7.63719763789976257e-06,
    3.81729326499984022e-06,
    1.90821271655393897e-06,
    9.53962033872796212e-07,
    4.76932986787806447e-07,
    2.38450502727733004e-07,
    1.19219925965311064e-07,
    5.96081890512594801e-08,
    2.98035035146522793e-08,
    1.49015548283650427e-08,
    7.45071178983543006e-09,
    3.72533402478845728e-09,
    1.86265972351304914e-09,
    9.31327432419668166e-10,
    4.65662906503378366e-10,
    2.32831183367650534e-10,
    1.16415501727005193e-10,
    5.82077208790270145e-11,
    2.91038504449710001e-11,
    1.45519218910419849e-11,
    7.27595983505748180e-12,
    3.63797954737865086e-12,
    1.81898965030706607e-12,
    9.09494784026388841e-13,
    4.54747378304215422e-13,
];

/// Bernoulli numbers B_2 .. B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecfunError {
    #[error("pole at non-positive integer argument {0}")]
    Pole(f64),
    #[error("argument is not finite")]
    NonFinite,
    #[error("arg Γ(x + iy) needs a nonzero imaginary part")]
    RealAxis,
}

/// A real number stored as an exact sign and the natural log of its
/// magnitude.
///
/// `sign == 0` is zero (with `log_mag == -inf`); `log_mag == +inf` with a
/// nonzero sign is a pole approached from that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignLog {
    pub sign: i8,
    pub log_mag: f64,
}

impl SignLog {
    pub const ONE: SignLog = SignLog {
        sign: 1,
        log_mag: 0.0,
    };

    pub const ZERO: SignLog = SignLog {
        sign: 0,
        log_mag: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_mag: f64) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignLog {
                sign: sign.signum(),
                log_mag,
            }
        }
    }

    pub fn pole(sign: i8) -> Self {
        SignLog {
            sign: if sign < 0 { -1 } else { 1 },
            log_mag: f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        match v.partial_cmp(&0.0) {
            Some(Ordering::Greater) => SignLog::new(1, v.ln()),
            Some(Ordering::Less) => SignLog::new(-1, (-v).ln()),
            _ => Self::ZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_pole(&self) -> bool {
        self.sign != 0 && self.log_mag == f64::INFINITY
    }

    pub fn recip(self) -> Self {
        if self.sign == 0 {
            SignLog::pole(1)
        } else {
            SignLog::new(self.sign, -self.log_mag)
        }
    }

    /// Multiplies by `exp(delta)`.
    pub fn scale_ln(self, delta: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignLog::new(self.sign, self.log_mag + delta)
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.log_mag.exp()
    }

    /// `atan` of the represented value, exact at zero and at poles.
    pub fn atan(self) -> f64 {
        let s = f64::from(self.sign);
        if self.sign == 0 {
            0.0
        } else if self.log_mag > 0.0 {
            s * (std::f64::consts::FRAC_PI_2 - (-self.log_mag).exp().atan())
        } else {
            s * self.log_mag.exp().atan()
        }
    }
}

impl Mul for SignLog {
    type Output = SignLog;

    fn mul(self, rhs: SignLog) -> SignLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignLog::ZERO;
        }
        SignLog::new(self.sign * rhs.sign, self.log_mag + rhs.log_mag)
    }
}

impl Div for SignLog {
    type Output = SignLog;

    fn div(self, rhs: SignLog) -> SignLog {
        self * rhs.recip()
    }
}

impl fmt::Display for SignLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "+" }, self.log_mag),
        }
    }
}

fn check_real(x: f64) -> Result<(), SpecfunError> {
    if !x.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    if x <= 0.0 && x == x.floor() {
        return Err(SpecfunError::Pole(x));
    }
    Ok(())
}

/// sin(πx) with exact argument reduction.
pub fn sin_pi(x: f64) -> f64 {
    let mut r = x % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r < -1.0 {
        r += 2.0;
    }
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

/// cos(πx) with exact argument reduction.
pub fn cos_pi(x: f64) -> f64 {
    let mut r = (x % 2.0).abs();
    if r > 1.0 {
        r = 2.0 - r;
    }
    // cos(πr) = sin(π(1/2 − r)); 1/2 − r is exact for r in [0, 1].
    sin_pi(0.5 - r)
}

/// cot(πx) with exact argument reduction.
pub fn cot_pi(x: f64) -> f64 {
    let r = x - x.round();
    let a = PI * r;
    a.cos() / a.sin()
}

/// ln Γ(2 + ε) for |ε| ≤ 1/2, from the ζ-series. Relative accuracy holds
/// down to ε → 0.
fn ln_gamma_two_plus(eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -eps;
    for (i, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        pow *= -eps;
        let k = (i + 2) as f64;
        sum += zm1 * pow / k;
        if pow.abs() * zm1 < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    eps * (1.0 - EULER_GAMMA) + sum
}

fn stirling_correction(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut sum = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        sum += b / (two_k * (two_k - 1.0)) * pow;
        pow *= inv2;
    }
    sum
}

/// ln Γ(x) for x > 0.
fn ln_gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 0.5 {
        // Γ(x) = Γ(1 + x) / x, with ln Γ(1 + x) = ln Γ(2 + x) − ln(1 + x).
        ln_gamma_two_plus(x) - x.ln_1p() - x.ln()
    } else if x < 1.5 {
        let eps = x - 1.0;
        ln_gamma_two_plus(eps) - eps.ln_1p()
    } else if x < 2.5 {
        ln_gamma_two_plus(x - 2.0)
    } else if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        ln_gamma_two_plus(y - 2.0) + prod.ln()
    } else {
        (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x)
    }
}

/// Sign and ln|Γ(x)| for real x off the poles.
pub fn ln_gamma_signed(x: f64) -> Result<SignLog, SpecfunError> {
    check_real(x)?;
    if x > 0.0 {
        return Ok(SignLog::new(1, ln_gamma_positive(x)));
    }
    if x > -0.5 {
        // Γ(x) = Γ(1 + x)/x with ln Γ(1 + x) taken from the series in x.
        let lg1 = ln_gamma_two_plus(x) - x.ln_1p();
        return Ok(SignLog::new(-1, lg1 - (-x).ln()));
    }
    // Γ(x) = π / (sin(πx) · (−x) · Γ(−x)).
    let s = sin_pi(x);
    let sign = if s < 0.0 { -1 } else { 1 };
    let log_mag = LN_PI - s.abs().ln() - (-x).ln() - ln_gamma_positive(-x);
    Ok(SignLog::new(sign, log_mag))
}

/// ln Γ(y + a) − ln Γ(y + b) for large y (both arguments ≥ 10), without the
/// cancellation of two large logarithms.
pub fn ln_gamma_diff_large(y: f64, a: f64, b: f64) -> f64 {
    debug_assert!(y + a >= 10.0 && y + b >= 10.0);
    let la = (a / y).ln_1p();
    let lb = (b / y).ln_1p();
    (a - b) * y.ln() + (y + a - 0.5) * la - (y + b - 0.5) * lb - (a - b)
        + stirling_correction(y + a)
        - stirling_correction(y + b)
}

/// Digamma ψ(x) = Γ'(x)/Γ(x) on the real line minus the poles.
pub fn digamma(x: f64) -> Result<f64, SpecfunError> {
    check_real(x)?;
    if x < 0.0 {
        if x > -0.5 {
            return Ok(digamma_positive(1.0 + x) - 1.0 / x);
        }
        return Ok(digamma_positive(1.0 - x) - PI * cot_pi(x));
    }
    Ok(digamma_positive(x))
}

fn digamma_positive(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    while y < 10.0 {
        shift += 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut pow = inv2;
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        series += b / (2.0 * (k as f64 + 1.0)) * pow;
        pow *= inv2;
    }
    y.ln() - 0.5 / y - series - shift
}

/// Im ln Γ(z) by the Stirling series; requires Re z ≥ 8.
fn arg_gamma_stirling(z: Complex64) -> f64 {
    let ln_z = z.ln();
    let lead = (z - 0.5) * ln_z - z;
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    let mut corr = Complex64::new(0.0, 0.0);
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        corr += pow * (b / (two_k * (two_k - 1.0)));
        pow *= inv2;
    }
    (lead + corr).im
}

/// A branch of arg Γ(x + iy) that is continuous in x for fixed y ≠ 0.
///
/// This is the imaginary part of the standard log-gamma (analytic off the
/// negative real axis, equal to the Stirling-series value for x ≥ 8). It is
/// odd in y.
pub fn arg_gamma_continuous(x: f64, y: f64) -> Result<f64, SpecfunError> {
    if !x.is_finite() || !y.is_finite() {
        return Err(SpecfunError::NonFinite);
    }
    if y == 0.0 {
        return Err(SpecfunError::RealAxis);
    }
    if y < 0.0 {
        return Ok(-arg_gamma_upper(x, -y));
    }
    Ok(arg_gamma_upper(x, y))
}

fn arg_gamma_upper(x: f64, y: f64) -> f64 {
    if x >= STIRLING_MIN {
        return arg_gamma_stirling(Complex64::new(x, y));
    }
    if x >= ARG_REFLECT_BELOW {
        let mut shifted = x;
        let mut args = 0.0;
        while shifted < STIRLING_MIN {
            args += y.atan2(shifted);
            shifted += 1.0;
        }
        return arg_gamma_stirling(Complex64::new(shifted, y)) - args;
    }
    // ln Γ(z) = ln π − ln sin(πz) − ln Γ(1 − z), with
    // ln sin(πz) = ln(1/2) + i(π/2 − πz) + ln(1 − e^{2πiz}) for Im z > 0.
    let decay = (-2.0 * PI * y).exp();
    let re = 1.0 - decay * cos_pi(2.0 * x);
    let im = -decay * sin_pi(2.0 * x);
    let arg_one_minus = im.atan2(re);
    let reflected = -arg_gamma_upper(1.0 - x, y);
    PI * x - std::f64::consts::FRAC_PI_2 - arg_one_minus - reflected
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_one_is_exactly_one() {
        let v = ln_gamma_signed(1.0).unwrap();
        assert_eq!(v.sign, 1);
        assert_eq!(v.log_mag, 0.0);
        assert_eq!(ln_gamma_signed(2.0).unwrap().log_mag, 0.0);
    }

    #[test]
    fn gamma_half_is_sqrt_pi() {
        let v = ln_gamma_signed(0.5).unwrap();
        assert_eq!(v.sign, 1);
        assert!((v.log_mag - 0.572_364_942_924_700_1).abs() < 1e-15);
    }

    #[test]
    fn gamma_minus_two_and_a_half() {
        // Γ(−5/2) = −8√π/15
        let v = ln_gamma_signed(-2.5).unwrap();
        assert_eq!(v.sign, -1);
        assert!((v.log_mag - 0.945_308_720_482_941_9_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn poles_are_rejected() {
        for x in [0.0, -1.0, -2.0, -57.0] {
            assert_eq!(ln_gamma_signed(x), Err(SpecfunError::Pole(x)));
            assert_eq!(digamma(x), Err(SpecfunError::Pole(x)));
        }
        assert_eq!(ln_gamma_signed(f64::NAN), Err(SpecfunError::NonFinite));
    }

    #[test]
    fn digamma_small_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        let half = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
    }

    #[test]
    fn arg_gamma_rejects_real_axis() {
        assert_eq!(arg_gamma_continuous(1.0, 0.0), Err(SpecfunError::RealAxis));
    }

    #[test]
    fn arg_gamma_positive_axis_limit() {
        assert!(arg_gamma_continuous(5.0, 1e-12).unwrap().abs() < 1e-10);
    }

    #[test]
    fn arg_gamma_branch_switch_is_seamless() {
        for y in [0.12, 0.85, 3.0, 20.0] {
            let left = arg_gamma_continuous(ARG_REFLECT_BELOW - 1e-9, y).unwrap();
            let right = arg_gamma_continuous(ARG_REFLECT_BELOW, y).unwrap();
            assert!((left - right).abs() < 1e-7, "y = {y}: {left} vs {right}");
        }
    }

    #[test]
    fn signlog_arithmetic() {
        let a = SignLog::from_f64(-3.0);
        let b = SignLog::from_f64(0.5);
        assert!(((a * b).to_f64() + 1.5).abs() < 1e-15);
        assert!(((a / b).to_f64() + 6.0).abs() < 1e-14);
        assert!((a * SignLog::ZERO).is_zero());
        assert!(SignLog::ZERO.recip().is_pole());
        assert_eq!(SignLog::pole(-1).atan(), -std::f64::consts::FRAC_PI_2);
        assert!((SignLog::from_f64(1e300).atan() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn trig_pi_reductions() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert!((sin_pi(-2.5) + 1.0).abs() < 1e-16);
        assert!((cos_pi(4.0) - 1.0).abs() < 1e-16);
        assert!((cos_pi(-3.0) + 1.0).abs() < 1e-16);
        assert!(cos_pi(100.5).abs() < 1e-16);
        assert!((cot_pi(0.25) - 1.0).abs() < 1e-15);
    }
}
