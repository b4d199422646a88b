//! Arbitrary-precision real and complex floating arithmetic on top of
//! `astro-float`, with directed rounding where certificates need it.
//!
//! Conventions:
//! - `Dir::Up` / `Dir::Down` are true directed roundings (toward +inf /
//!   -inf); `Dir::Near` is round-to-nearest-even.
//! - Conversions between `BigFloat` and `BigRational` are exact; decimal
//!   serialization is the exact decimal expansion of the binary value, so
//!   emit/parse round-trips are bit- and byte-identical.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word, WORD_BIT_SIZE};
use num_bigint::{BigInt, BigUint, Sign as IntSign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PREC: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Up,
    Down,
    Near,
}

impl Dir {
    pub fn rm(self) -> RoundingMode {
        match self {
            Dir::Up => RoundingMode::Up,
            Dir::Down => RoundingMode::Down,
            Dir::Near => RoundingMode::ToEven,
        }
    }
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Runs `f` with the thread-local constants cache (pi, ln 2, ...).
pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn bf_zero() -> BigFloat {
    BigFloat::from_word(0, 1)
}

pub fn bf_from_u64(v: u64, p: usize) -> BigFloat {
    BigFloat::from_u64(v, p)
}

fn biguint_to_words(m: &BigUint) -> Vec<Word> {
    // Little-endian bytes packed into astro-float words.
    let bytes = m.to_bytes_le();
    let wb = WORD_BIT_SIZE / 8;
    let mut words = Vec::with_capacity(bytes.len() / wb + 1);
    for chunk in bytes.chunks(wb) {
        let mut w: Word = 0;
        for (i, b) in chunk.iter().enumerate() {
            w |= (*b as Word) << (8 * i);
        }
        words.push(w);
    }
    if words.is_empty() {
        words.push(0);
    }
    words
}

fn words_to_biguint(words: &[Word]) -> BigUint {
    let wb = WORD_BIT_SIZE / 8;
    let mut bytes = Vec::with_capacity(words.len() * wb);
    for w in words {
        let mut v = *w;
        for _ in 0..wb {
            bytes.push((v & 0xff) as u8);
            v >>= 8;
        }
    }
    BigUint::from_bytes_le(&bytes)
}

/// Builds the exact value `m * 2^exp2`. The magnitude of `m` must be small
/// enough that `exp2 + bits(m)` fits the exponent range, which holds for
/// every use in this crate.
pub fn bigint_to_bf_exact(m: &BigInt, exp2: i64) -> BigFloat {
    if m.is_zero() {
        return bf_zero();
    }
    let words = biguint_to_words(m.magnitude());
    let sign = if m.is_negative() { Sign::Neg } else { Sign::Pos };
    let p_bits = (words.len() * WORD_BIT_SIZE) as i64;
    let e = p_bits + exp2;
    assert!(e.unsigned_abs() < i32::MAX as u64, "exponent out of range");
    BigFloat::from_words(&words, sign, e as i32)
}

/// Exact rational value of a finite `BigFloat`.
pub fn bf_to_rat(x: &BigFloat) -> Option<BigRational> {
    if x.is_zero() {
        return Some(BigRational::zero());
    }
    let (words, _n, sign, e, _inexact) = x.as_raw_parts()?;
    let m = words_to_biguint(words);
    let p_bits = (words.len() * WORD_BIT_SIZE) as i64;
    let mut num = BigInt::from_biguint(
        if sign == Sign::Neg { IntSign::Minus } else { IntSign::Plus },
        m,
    );
    let exp2 = e as i64 - p_bits;
    let mut den = BigInt::one();
    if exp2 >= 0 {
        num <<= exp2 as usize;
    } else {
        den <<= (-exp2) as usize;
    }
    Some(BigRational::new(num, den))
}

/// Converts a rational to a `BigFloat` with `p` bits, rounded in `dir`.
pub fn rat_to_bf(r: &BigRational, p: usize, dir: Dir) -> BigFloat {
    if r.is_zero() {
        return bf_zero();
    }
    let neg = r.is_negative();
    // Direction of rounding for the magnitude.
    #[derive(PartialEq)]
    enum Mag {
        Up,
        Down,
        Near,
    }
    let mag = match (dir, neg) {
        (Dir::Up, false) | (Dir::Down, true) => Mag::Up,
        (Dir::Up, true) | (Dir::Down, false) => Mag::Down,
        (Dir::Near, _) => Mag::Near,
    };
    let num = r.numer().magnitude().clone();
    let den = r.denom().magnitude().clone();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Scale so the integer quotient has at least p+2 significant bits.
    let s = (p as i64 + 2) + db - nb;
    let (a, d) = if s >= 0 {
        (num << s as usize, den)
    } else {
        (num, den << (-s) as usize)
    };
    let q = &a / &d;
    let rem = &a - &q * &d;
    let qb = q.bits() as i64;
    let g = (qb - p as i64).max(0) as u64;
    let mask = (BigUint::one() << g) - BigUint::one();
    let dropped = &q & &mask;
    let mut qf = &q >> g;
    let sticky = !rem.is_zero();
    let inc = match mag {
        Mag::Up => !dropped.is_zero() || sticky,
        Mag::Down => false,
        Mag::Near => {
            if g == 0 {
                false
            } else {
                let half = BigUint::one() << (g - 1);
                match dropped.cmp(&half) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => sticky || qf.bit(0),
                }
            }
        }
    };
    if inc {
        qf += BigUint::one();
    }
    let exp2 = g as i64 - s;
    let m = BigInt::from_biguint(
        if neg { IntSign::Minus } else { IntSign::Plus },
        qf,
    );
    bigint_to_bf_exact(&m, exp2)
}

/// Exact decimal form of a finite `BigFloat`, always containing a point and
/// an exponent marker so the text is unambiguously a floating value.
pub fn bf_to_dec(x: &BigFloat) -> String {
    let r = bf_to_rat(x).expect("finite value");
    if r.is_zero() {
        return "0.0e0".to_string();
    }
    let neg = r.is_negative();
    // Denominator is a power of two; value = m / 2^k with k >= 0, or m * 2^j.
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let k = den.bits() - 1; // den == 2^k
    debug_assert_eq!(den, &(BigUint::one() << k));
    // value = num * 5^k * 10^(-k)
    let scaled = num * BigUint::from(5u8).pow(k as u32);
    let digits = scaled.to_str_radix(10);
    let dec_exp = digits.len() as i64 - 1 - k as i64;
    let mut frac: String = digits[1..].trim_end_matches('0').to_string();
    if frac.is_empty() {
        frac.push('0');
    }
    format!(
        "{}{}.{}e{}",
        if neg { "-" } else { "" },
        &digits[..1],
        frac,
        dec_exp
    )
}

/// Parses a decimal string (optional sign, point, exponent) to the exact
/// rational it denotes.
pub fn dec_to_rat(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Invalid(format!("malformed decimal literal `{s}`"));
    let (neg, rest) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (mant, exp) = match rest.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = rest[i + 1..].parse().map_err(|_| bad())?;
            (&rest[..i], e)
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let shift = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    Ok(if shift >= 0 {
        BigRational::from_integer(num * ten.pow(shift as u32))
    } else {
        BigRational::new(num, ten.pow((-shift) as u32))
    })
}

pub fn dec_to_bf(s: &str, p: usize, dir: Dir) -> Result<BigFloat> {
    Ok(rat_to_bf(&dec_to_rat(s)?, p, dir))
}

// ---------------------------------------------------------------------------
// Directed real helpers. Inputs are finite; NaN propagation is a bug.
// ---------------------------------------------------------------------------

pub fn bf_add(a: &BigFloat, b: &BigFloat, p: usize, dir: Dir) -> BigFloat {
    a.add(b, p, dir.rm())
}

pub fn bf_sub(a: &BigFloat, b: &BigFloat, p: usize, dir: Dir) -> BigFloat {
    a.sub(b, p, dir.rm())
}

pub fn bf_mul(a: &BigFloat, b: &BigFloat, p: usize, dir: Dir) -> BigFloat {
    a.mul(b, p, dir.rm())
}

pub fn bf_div(a: &BigFloat, b: &BigFloat, p: usize, dir: Dir) -> BigFloat {
    a.div(b, p, dir.rm())
}

pub fn bf_sqrt(a: &BigFloat, p: usize, dir: Dir) -> BigFloat {
    a.sqrt(p, dir.rm())
}

pub fn bf_ln(a: &BigFloat, p: usize, dir: Dir) -> BigFloat {
    with_consts(|cc| a.ln(p, dir.rm(), cc))
}

pub fn bf_le(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c <= 0)
}

pub fn bf_lt(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.cmp(b), Some(c) if c < 0)
}

pub fn bf_max(a: &BigFloat, b: &BigFloat) -> BigFloat {
    if bf_le(a, b) {
        b.clone()
    } else {
        a.clone()
    }
}

/// f64 view of a `BigFloat` for diagnostics and fits.
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    let r = match bf_to_rat(x) {
        Some(r) => r,
        None => return f64::NAN,
    };
    if r.is_zero() {
        return 0.0;
    }
    // Scale into f64 range via the bit lengths.
    let nb = r.numer().magnitude().bits() as i64;
    let db = r.denom().magnitude().bits() as i64;
    let e = nb - db;
    if e > 1000 {
        return if r.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    if e < -1000 {
        return 0.0;
    }
    // 64 significant bits are plenty.
    let shift = 64 - e;
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    let approx: f64 = scaled.to_string().parse().unwrap_or(f64::NAN);
    approx * 2f64.powi(-shift as i32)
}

// ---------------------------------------------------------------------------
// Complex arithmetic at a stated precision, round-to-nearest.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BigC {
    pub re: BigFloat,
    pub im: BigFloat,
    pub prec: usize,
}

impl BigC {
    pub fn new(re: BigFloat, im: BigFloat, prec: usize) -> Self {
        BigC { re, im, prec }
    }

    pub fn zero(prec: usize) -> Self {
        BigC::new(bf_zero(), bf_zero(), prec)
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Self {
        BigC::new(BigFloat::from_f64(re, prec), BigFloat::from_f64(im, prec), prec)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.im.is_nan() || self.re.is_inf() || self.im.is_inf())
    }

    pub fn add(&self, o: &BigC) -> BigC {
        let p = self.prec.max(o.prec);
        BigC::new(bf_add(&self.re, &o.re, p, Dir::Near), bf_add(&self.im, &o.im, p, Dir::Near), p)
    }

    pub fn sub(&self, o: &BigC) -> BigC {
        let p = self.prec.max(o.prec);
        BigC::new(bf_sub(&self.re, &o.re, p, Dir::Near), bf_sub(&self.im, &o.im, p, Dir::Near), p)
    }

    pub fn neg(&self) -> BigC {
        BigC::new(self.re.neg(), self.im.neg(), self.prec)
    }

    pub fn mul(&self, o: &BigC) -> BigC {
        let p = self.prec.max(o.prec);
        let w = p + 32;
        let ac = bf_mul(&self.re, &o.re, w, Dir::Near);
        let bd = bf_mul(&self.im, &o.im, w, Dir::Near);
        let ad = bf_mul(&self.re, &o.im, w, Dir::Near);
        let bc = bf_mul(&self.im, &o.re, w, Dir::Near);
        BigC::new(bf_sub(&ac, &bd, p, Dir::Near), bf_add(&ad, &bc, p, Dir::Near), p)
    }

    pub fn div(&self, o: &BigC) -> BigC {
        let p = self.prec.max(o.prec);
        let w = p + 32;
        let c2 = bf_mul(&o.re, &o.re, w, Dir::Near);
        let d2 = bf_mul(&o.im, &o.im, w, Dir::Near);
        let den = bf_add(&c2, &d2, w, Dir::Near);
        let ac = bf_mul(&self.re, &o.re, w, Dir::Near);
        let bd = bf_mul(&self.im, &o.im, w, Dir::Near);
        let bc = bf_mul(&self.im, &o.re, w, Dir::Near);
        let ad = bf_mul(&self.re, &o.im, w, Dir::Near);
        let re = bf_div(&bf_add(&ac, &bd, w, Dir::Near), &den, p, Dir::Near);
        let im = bf_div(&bf_sub(&bc, &ad, w, Dir::Near), &den, p, Dir::Near);
        BigC::new(re, im, p)
    }

    pub fn scale(&self, f: &BigFloat) -> BigC {
        BigC::new(
            bf_mul(&self.re, f, self.prec, Dir::Near),
            bf_mul(&self.im, f, self.prec, Dir::Near),
            self.prec,
        )
    }

    /// Upper bound on |z|.
    pub fn abs_up(&self) -> BigFloat {
        let p = self.prec + 16;
        let r2 = bf_mul(&self.re, &self.re, p, Dir::Up);
        let i2 = bf_mul(&self.im, &self.im, p, Dir::Up);
        bf_sqrt(&bf_add(&r2, &i2, p, Dir::Up), self.prec, Dir::Up)
    }

    /// Lower bound on |z|.
    pub fn abs_down(&self) -> BigFloat {
        let p = self.prec + 16;
        let r2 = bf_mul(&self.re, &self.re, p, Dir::Down);
        let i2 = bf_mul(&self.im, &self.im, p, Dir::Down);
        bf_sqrt(&bf_add(&r2, &i2, p, Dir::Down), self.prec, Dir::Down)
    }

    pub fn abs_near(&self) -> BigFloat {
        let p = self.prec + 16;
        let r2 = bf_mul(&self.re, &self.re, p, Dir::Near);
        let i2 = bf_mul(&self.im, &self.im, p, Dir::Near);
        bf_sqrt(&bf_add(&r2, &i2, p, Dir::Near), self.prec, Dir::Near)
    }

    /// Principal natural logarithm: ln|z| + i * atan2(im, re).
    pub fn ln(&self) -> BigC {
        assert!(!self.is_zero(), "ln of zero");
        let p = self.prec;
        let re = bf_ln(&self.abs_near(), p, Dir::Near);
        let im = bf_atan2(&self.im, &self.re, p);
        BigC::new(re, im, p)
    }

    pub fn powu(&self, mut e: u32) -> BigC {
        let mut base = self.clone();
        let mut acc = BigC::new(bf_from_u64(1, self.prec), bf_zero(), self.prec);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact comparison of the underlying binary values.
    pub fn eq_bits(&self, o: &BigC) -> bool {
        self.re.cmp(&o.re) == Some(0) && self.im.cmp(&o.im) == Some(0)
    }
}

/// Four-quadrant arctangent at precision `p`, round-to-nearest.
pub fn bf_atan2(y: &BigFloat, x: &BigFloat, p: usize) -> BigFloat {
    let w = p + 16;
    if x.is_zero() && y.is_zero() {
        return bf_zero();
    }
    let pi = with_consts(|cc| cc.pi(w, RoundingMode::ToEven));
    if x.is_zero() {
        let half_pi = bf_div(&pi, &bf_from_u64(2, w), p, Dir::Near);
        return if y.is_positive() { half_pi } else { half_pi.neg() };
    }
    let q = bf_div(y, x, w, Dir::Near);
    let base = with_consts(|cc| q.atan(w, RoundingMode::ToEven, cc));
    if x.is_positive() {
        let mut b = base;
        b.set_precision(p, RoundingMode::ToEven).expect("finite");
        b
    } else if y.is_negative() {
        bf_sub(&base, &pi, p, Dir::Near)
    } else {
        bf_add(&base, &pi, p, Dir::Near)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_round_trip_exact() {
        // Dyadic rationals convert exactly in either direction.
        let r = rat(-13, 32);
        let x = rat_to_bf(&r, 64, Dir::Near);
        assert_eq!(bf_to_rat(&x).unwrap(), r);
    }

    #[test]
    fn directed_rounding_brackets_value() {
        let r = rat(1, 3);
        let lo = rat_to_bf(&r, 64, Dir::Down);
        let hi = rat_to_bf(&r, 64, Dir::Up);
        assert!(bf_to_rat(&lo).unwrap() < r);
        assert!(bf_to_rat(&hi).unwrap() > r);
        // Bracket is one ulp wide at most: hi - lo < 2^-62.
        let gap = bf_to_rat(&hi).unwrap() - bf_to_rat(&lo).unwrap();
        assert!(gap < rat(1, 1i64 << 62));
        // Negative values flip the magnitude direction.
        let r = rat(-1, 3);
        let lo = rat_to_bf(&r, 64, Dir::Down);
        let hi = rat_to_bf(&r, 64, Dir::Up);
        assert!(bf_to_rat(&lo).unwrap() < r);
        assert!(bf_to_rat(&hi).unwrap() > r);
    }

    #[test]
    fn decimal_round_trip_byte_identical() {
        for r in [rat(1, 4), rat(-7, 8), rat(355, 128), rat(1, 1 << 20)] {
            let x = rat_to_bf(&r, 96, Dir::Near);
            let s = bf_to_dec(&x);
            let y = rat_to_bf(&dec_to_rat(&s).unwrap(), 96, Dir::Near);
            assert_eq!(bf_to_dec(&y), s);
            assert_eq!(bf_to_rat(&y), bf_to_rat(&x));
        }
        assert_eq!(bf_to_dec(&bf_zero()), "0.0e0");
        assert_eq!(bf_to_dec(&bf_from_u64(2, 64)), "2.0e0");
    }

    #[test]
    fn decimal_parse_forms() {
        assert_eq!(dec_to_rat("0.5").unwrap(), rat(1, 2));
        assert_eq!(dec_to_rat("-1.25e-3").unwrap(), rat(-1, 800));
        assert_eq!(dec_to_rat("3e2").unwrap(), rat(300, 1));
        assert!(dec_to_rat("abc").is_err());
        assert!(dec_to_rat(".").is_err());
    }

    #[test]
    fn atan2_quadrants() {
        let p = 96;
        let pi = std::f64::consts::PI;
        for (y, x, want) in [
            (1.0, 1.0, pi / 4.0),
            (1.0, -1.0, 3.0 * pi / 4.0),
            (-1.0, -1.0, -3.0 * pi / 4.0),
            (-1.0, 1.0, -pi / 4.0),
            (1.0, 0.0, pi / 2.0),
        ] {
            let got = bf_to_f64(&bf_atan2(
                &BigFloat::from_f64(y, p),
                &BigFloat::from_f64(x, p),
                p,
            ));
            assert!((got - want).abs() < 1e-12, "atan2({y},{x}) = {got}, want {want}");
        }
    }

    #[test]
    fn complex_ln_matches_f64() {
        let z = BigC::from_f64(0.1, 0.0, 128);
        let l = z.ln();
        assert!((bf_to_f64(&l.re) - 0.1f64.ln()).abs() < 1e-12);
        assert!(bf_to_f64(&l.im).abs() < 1e-12);
        let z = BigC::from_f64(-2.0, 1.0, 128);
        let l = z.ln();
        let want = num_complex_ln(-2.0, 1.0);
        assert!((bf_to_f64(&l.re) - want.0).abs() < 1e-12);
        assert!((bf_to_f64(&l.im) - want.1).abs() < 1e-12);
    }

    fn num_complex_ln(re: f64, im: f64) -> (f64, f64) {
        ((re * re + im * im).sqrt().ln(), im.atan2(re))
    }

    #[test]
    fn bf_to_f64_scales() {
        let r = BigRational::from_f64(0.001953125).unwrap();
        let x = rat_to_bf(&r, 64, Dir::Near);
        assert_eq!(bf_to_f64(&x), 0.001953125);
    }
}
