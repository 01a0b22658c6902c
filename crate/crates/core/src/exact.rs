//! Exact scalars: Gaussian rationals times an integer power of a formal pi.
//!
//! Coefficients throughout the symbolic layer live in the ring
//! Q(i)[pi, pi^-1], restricted to *homogeneous* elements: a single Gaussian
//! rational times a single power of pi. Sums are only defined between equal
//! pi-powers; a mixed sum is a loud error rather than a silent coercion,
//! because pi is transcendental over Q(i) and every identity we verify is
//! pi-homogeneous termwise.

use crate::error::SymbolicError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A Gaussian rational a + b*i with arbitrary-precision rational a, b.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        GaussRat {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit i.
    pub fn i() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    /// The rational number num/den.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussRat {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Self, SymbolicError> {
        if self.is_zero() {
            return Err(SymbolicError::DivisionByZero);
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Ok(GaussRat {
            re: &self.re / &norm,
            im: -&self.im / &norm,
        })
    }

    /// Evaluate to a pair (re, im) of f64.
    pub fn to_f64(&self) -> (f64, f64) {
        (rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
}

/// Convert a BigRational to f64 with correct rounding for the magnitudes
/// appearing here (numerator and denominator well below 2^1000).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Scale so that the integer division keeps ~80 bits of the quotient.
    let num_bits = num.bits() as i64;
    let den_bits = den.bits() as i64;
    let shift = 80 - (num_bits - den_bits);
    if shift >= 0 {
        let scaled = (num << shift as u64) / den;
        big_to_f64(&scaled) / 2f64.powi(shift as i32)
    } else {
        let scaled = num / (den << (-shift) as u64);
        big_to_f64(&scaled) * 2f64.powi((-shift) as i32)
    }
}

fn big_to_f64(n: &BigInt) -> f64 {
    // BigInt -> f64 via string is exact enough only for small values; use
    // base-2 digits instead.
    let (sign, digits) = n.to_u64_digits();
    let mut acc = 0f64;
    for d in digits.iter().rev() {
        acc = acc * 2f64.powi(64) + *d as f64;
    }
    match sign {
        num_bigint::Sign::Minus => -acc,
        _ => acc,
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, rhs: &GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}*i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({}{}*i)", self.re, self.im)
        } else {
            write!(f, "({}+{}*i)", self.re, self.im)
        }
    }
}

/// A homogeneous exact scalar: `gauss * pi^pi_pow`.
///
/// Canonical form: `gauss` in lowest terms; the zero scalar always carries
/// `pi_pow = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactScalar {
    pub gauss: GaussRat,
    pub pi_pow: i64,
}

impl ExactScalar {
    pub fn new(gauss: GaussRat, pi_pow: i64) -> Self {
        if gauss.is_zero() {
            ExactScalar {
                gauss,
                pi_pow: 0,
            }
        } else {
            ExactScalar { gauss, pi_pow }
        }
    }

    pub fn zero() -> Self {
        ExactScalar::new(GaussRat::zero(), 0)
    }

    pub fn one() -> Self {
        ExactScalar::new(GaussRat::one(), 0)
    }

    pub fn i() -> Self {
        ExactScalar::new(GaussRat::i(), 0)
    }

    pub fn from_int(n: i64) -> Self {
        ExactScalar::new(GaussRat::from_int(n), 0)
    }

    /// num/den * pi^pi_pow.
    pub fn ratio_pi(num: i64, den: i64, pi_pow: i64) -> Self {
        ExactScalar::new(GaussRat::ratio(num, den), pi_pow)
    }

    /// The Fock parameter lambda = 2*pi*i.
    pub fn lambda() -> Self {
        ExactScalar::new(&GaussRat::from_int(2) * &GaussRat::i(), 1)
    }

    pub fn is_zero(&self) -> bool {
        self.gauss.is_zero()
    }

    pub fn conj(&self) -> Self {
        ExactScalar::new(self.gauss.conj(), self.pi_pow)
    }

    /// Checked addition: errors if both operands are nonzero with different
    /// pi-powers.
    pub fn checked_add(&self, rhs: &ExactScalar) -> Result<ExactScalar, SymbolicError> {
        if self.is_zero() {
            return Ok(rhs.clone());
        }
        if rhs.is_zero() {
            return Ok(self.clone());
        }
        if self.pi_pow != rhs.pi_pow {
            return Err(SymbolicError::PiMismatch(self.pi_pow, rhs.pi_pow));
        }
        Ok(ExactScalar::new(&self.gauss + &rhs.gauss, self.pi_pow))
    }

    pub fn inv(&self) -> Result<ExactScalar, SymbolicError> {
        Ok(ExactScalar::new(self.gauss.inv()?, -self.pi_pow))
    }

    pub fn pow(&self, n: u32) -> ExactScalar {
        let mut acc = ExactScalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate numerically with pi = 3.14159..., as a complex pair.
    pub fn to_complex_f64(&self) -> (f64, f64) {
        let (re, im) = self.gauss.to_f64();
        let scale = std::f64::consts::PI.powi(self.pi_pow as i32);
        (re * scale, im * scale)
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        ExactScalar::new(&self.gauss * &rhs.gauss, self.pi_pow + rhs.pi_pow)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::new(-&self.gauss, self.pi_pow)
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pi_pow == 0 {
            write!(f, "{}", self.gauss)
        } else {
            write!(f, "{} * pi^{}", self.gauss, self.pi_pow)
        }
    }
}
