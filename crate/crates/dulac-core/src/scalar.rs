//! Coefficient field: exact Gaussian rationals and big-float complex
//! numbers behind one `Scalar` type.
//!
//! Exact values support error-free ring operations and exact division;
//! big-float values carry a working precision in bits. Mixed operations
//! promote the exact side to the float side's precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bigfloat::{
    bf_add, bf_sqrt, bf_to_dec, bf_zero, dec_to_rat, rat_to_bf, BigC, Dir,
};
use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Gaussian rational: exact complex number with rational parts.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        GaussRat { re, im: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        GaussRat::from_rat(rat_int(n))
    }

    pub fn zero() -> Self {
        GaussRat::from_int(0)
    }

    pub fn one() -> Self {
        GaussRat::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// |z|^2 as an exact rational.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn mul(&self, o: &GaussRat) -> GaussRat {
        GaussRat::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }

    pub fn div(&self, o: &GaussRat) -> Option<GaussRat> {
        if o.is_zero() {
            return None;
        }
        let n2 = o.norm_sqr();
        let num = self.mul(&o.conj());
        Some(GaussRat::new(num.re / &n2, num.im / &n2))
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

/// Square root within the Gaussian rationals, when one exists.
///
/// Solves (x + iy)^2 = d exactly; returns `None` when the root is
/// irrational. Used to keep resonance orders exact for rational instances.
pub fn gaussian_sqrt(d: &GaussRat) -> Option<GaussRat> {
    if d.is_zero() {
        return Some(GaussRat::zero());
    }
    if d.im.is_zero() {
        return if d.re.is_positive() {
            rat_sqrt(&d.re).map(GaussRat::from_rat)
        } else {
            rat_sqrt(&(-d.re.clone())).map(|y| GaussRat::new(Rat::zero(), y))
        };
    }
    // x^2 - y^2 = re, 2xy = im; with m = |d| rational: x^2 = (re + m) / 2.
    let m = rat_sqrt(&d.norm_sqr())?;
    let x2 = (&d.re + &m) / rat_int(2);
    let x = rat_sqrt(&x2)?;
    if x.is_zero() {
        return None;
    }
    let y = &d.im / (rat_int(2) * &x);
    Some(GaussRat::new(x, y))
}

/// Exact square root of a nonnegative rational, if rational.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(Rat::zero());
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// A coefficient: exact Gaussian rational or big-float complex.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(GaussRat),
    Big(BigC),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(GaussRat::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(GaussRat::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(GaussRat::from_int(n))
    }

    pub fn from_rat(r: Rat) -> Self {
        Scalar::Exact(GaussRat::from_rat(r))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Scalar::from_rat(rat_frac(n, d))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Big(b) => b.is_zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Promotes to a big-float complex at precision `p` (exact side is
    /// rounded to nearest; a big value keeps its own bits).
    pub fn to_bigc(&self, p: usize) -> BigC {
        match self {
            Scalar::Exact(g) => BigC::new(
                rat_to_bf(&g.re, p, Dir::Near),
                rat_to_bf(&g.im, p, Dir::Near),
                p,
            ),
            Scalar::Big(b) => b.clone(),
        }
    }

    /// Upper bound on |z| at precision `p`.
    pub fn abs_up(&self, p: usize) -> BigFloat {
        match self {
            Scalar::Exact(g) => {
                if g.im.is_zero() {
                    rat_to_bf(&g.re.abs(), p, Dir::Up)
                } else {
                    let n2 = rat_to_bf(&g.norm_sqr(), p + 16, Dir::Up);
                    bf_sqrt(&n2, p, Dir::Up)
                }
            }
            Scalar::Big(b) => b.abs_up(),
        }
    }

    /// Lower bound on |z| at precision `p`.
    pub fn abs_down(&self, p: usize) -> BigFloat {
        match self {
            Scalar::Exact(g) => {
                if g.im.is_zero() {
                    rat_to_bf(&g.re.abs(), p, Dir::Down)
                } else {
                    let n2 = rat_to_bf(&g.norm_sqr(), p + 16, Dir::Down);
                    bf_sqrt(&n2, p, Dir::Down)
                }
            }
            Scalar::Big(b) => b.abs_down(),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(-g),
            Scalar::Big(b) => Scalar::Big(b.neg()),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(g.conj()),
            Scalar::Big(b) => Scalar::Big(BigC::new(b.re.clone(), b.im.clone().neg(), b.prec)),
        }
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar> {
        if o.is_zero() {
            return Err(Error::Invalid("division by zero".into()));
        }
        Ok(match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                Scalar::Exact(a.div(b).expect("nonzero divisor"))
            }
            _ => {
                let p = self.prec().max(o.prec());
                Scalar::Big(self.to_bigc(p).div(&o.to_bigc(p)))
            }
        })
    }

    fn prec(&self) -> usize {
        match self {
            Scalar::Exact(_) => 0,
            Scalar::Big(b) => b.prec,
        }
    }

    pub fn pow_u32(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact value as a rational pair when the scalar is exact.
    pub fn as_exact(&self) -> Option<&GaussRat> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Big(_) => None,
        }
    }

    /// Parses the external text syntax: exact `p/q`, or a decimal string
    /// (containing `.`, `e` or `E`) interpreted as a big-float at
    /// precision `p`.
    pub fn parse_real(s: &str, p: usize) -> Result<Scalar> {
        let t = s.trim();
        if t.is_empty() {
            return Err(Error::Invalid("empty scalar".into()));
        }
        if t.contains(['.', 'e', 'E']) {
            let r = dec_to_rat(t)?;
            return Ok(Scalar::Big(BigC::new(
                rat_to_bf(&r, p, Dir::Near),
                bf_zero(),
                p,
            )));
        }
        let (num, den) = match t.find('/') {
            Some(i) => (&t[..i], &t[i + 1..]),
            None => (t, "1"),
        };
        let n: BigInt = num
            .parse()
            .map_err(|_| Error::Invalid(format!("malformed rational `{s}`")))?;
        let d: BigInt = den
            .parse()
            .map_err(|_| Error::Invalid(format!("malformed rational `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Invalid(format!("zero denominator in `{s}`")));
        }
        Ok(Scalar::from_rat(Rat::new(n, d)))
    }

    /// Canonical text of a real scalar (panics on a non-real value).
    pub fn to_real_string(&self) -> String {
        match self {
            Scalar::Exact(g) => {
                assert!(g.im.is_zero(), "complex scalar has no real text form");
                rat_to_string(&g.re)
            }
            Scalar::Big(b) => {
                assert!(b.im.is_zero(), "complex scalar has no real text form");
                bf_to_dec(&b.re)
            }
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.im.is_zero(),
            Scalar::Big(b) => b.im.is_zero(),
        }
    }
}

pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PartialEq for Scalar {
    /// Exact value equality: big floats compare by their exact binary
    /// value, mixed comparisons go through exact rationals.
    fn eq(&self, o: &Scalar) -> bool {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (ar, ai) = self.exact_parts();
                let (br, bi) = o.exact_parts();
                ar == br && ai == bi
            }
        }
    }
}

impl Scalar {
    fn exact_parts(&self) -> (Rat, Rat) {
        match self {
            Scalar::Exact(g) => (g.re.clone(), g.im.clone()),
            Scalar::Big(b) => (
                crate::bigfloat::bf_to_rat(&b.re).expect("finite"),
                crate::bigfloat::bf_to_rat(&b.im).expect("finite"),
            ),
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            _ => {
                let p = self.prec().max(o.prec());
                Scalar::Big(self.to_bigc(p).add(&o.to_bigc(p)))
            }
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => {
                let p = self.prec().max(o.prec());
                Scalar::Big(self.to_bigc(p).sub(&o.to_bigc(p)))
            }
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            _ => {
                let p = self.prec().max(o.prec());
                Scalar::Big(self.to_bigc(p).mul(&o.to_bigc(p)))
            }
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) => {
                if g.im.is_zero() {
                    write!(f, "{}", rat_to_string(&g.re))
                } else {
                    write!(f, "({}, {}i)", rat_to_string(&g.re), rat_to_string(&g.im))
                }
            }
            Scalar::Big(b) => {
                if b.im.is_zero() {
                    write!(f, "{}", bf_to_dec(&b.re))
                } else {
                    write!(f, "({}, {}i)", bf_to_dec(&b.re), bf_to_dec(&b.im))
                }
            }
        }
    }
}

/// Sum of upper bounds, rounded upward: an upper bound for the true sum.
pub fn sum_abs_up(items: impl Iterator<Item = BigFloat>, p: usize) -> BigFloat {
    let mut acc = bf_zero();
    for x in items {
        acc = bf_add(&acc, &x, p, Dir::Up);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_field_ops() {
        let a = Scalar::from_frac(1, 2);
        let b = Scalar::from_frac(1, 3);
        let s = &a + &b;
        assert_eq!(s, Scalar::from_frac(5, 6));
        let p = &a * &b;
        assert_eq!(p, Scalar::from_frac(1, 6));
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q, Scalar::from_frac(3, 2));
        assert!(Scalar::zero().checked_div(&Scalar::zero()).is_err());
    }

    #[test]
    fn gaussian_division_exact() {
        // (1 + 2i) / (3 - i) = (1/10) + (7/10)i
        let a = Scalar::Exact(GaussRat::new(rat_int(1), rat_int(2)));
        let b = Scalar::Exact(GaussRat::new(rat_int(3), rat_int(-1)));
        let q = a.checked_div(&b).unwrap();
        assert_eq!(
            q,
            Scalar::Exact(GaussRat::new(rat_frac(1, 10), rat_frac(7, 10)))
        );
        // round trip
        assert_eq!(&q * &b, a);
    }

    #[test]
    fn mixed_mode_promotes() {
        let a = Scalar::from_frac(1, 2);
        let b = Scalar::Big(BigC::from_f64(0.25, 0.0, 128));
        let s = &a + &b;
        assert!(matches!(s, Scalar::Big(_)));
        assert_eq!(s, Scalar::from_frac(3, 4));
    }

    #[test]
    fn gaussian_sqrt_cases() {
        // sqrt(-4) = 2i
        let r = gaussian_sqrt(&GaussRat::new(rat_int(-4), rat_int(0))).unwrap();
        assert_eq!(r, GaussRat::new(rat_int(0), rat_int(2)));
        // sqrt(3 + 4i) = 2 + i
        let r = gaussian_sqrt(&GaussRat::new(rat_int(3), rat_int(4))).unwrap();
        assert_eq!(r.clone().mul(&r), GaussRat::new(rat_int(3), rat_int(4)));
        // sqrt(2) is irrational
        assert!(gaussian_sqrt(&GaussRat::from_int(2)).is_none());
        // sqrt(9/4) = 3/2
        let r = gaussian_sqrt(&GaussRat::from_rat(rat_frac(9, 4))).unwrap();
        assert_eq!(r, GaussRat::from_rat(rat_frac(3, 2)));
    }

    #[test]
    fn scalar_text_syntax() {
        let s = Scalar::parse_real("-3/4", 128).unwrap();
        assert_eq!(s, Scalar::from_frac(-3, 4));
        assert!(s.is_exact());
        let b = Scalar::parse_real("0.5", 128).unwrap();
        assert!(!b.is_exact());
        assert_eq!(b, Scalar::from_frac(1, 2));
        assert_eq!(Scalar::from_frac(-3, 4).to_real_string(), "-3/4");
        assert_eq!(Scalar::from_int(7).to_real_string(), "7");
    }

    #[test]
    fn abs_bounds_bracket() {
        let z = Scalar::Exact(GaussRat::new(rat_int(3), rat_int(4)));
        let up = z.abs_up(64);
        let down = z.abs_down(64);
        // |3+4i| = 5 exactly; both bounds equal 5.
        assert_eq!(crate::bigfloat::bf_to_f64(&up), 5.0);
        assert_eq!(crate::bigfloat::bf_to_f64(&down), 5.0);
        let z = Scalar::from_frac(1, 3);
        assert!(crate::bigfloat::bf_le(&z.abs_down(64), &z.abs_up(64)));
    }
}
