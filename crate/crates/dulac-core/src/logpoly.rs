//! Polynomials in the transcendental symbol t (standing for ln x, or
//! -eps * ln x after rescaling), with the coefficient 1-norm used by the
//! majorant machinery.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use astro_float::BigFloat;

use crate::bigfloat::{bf_zero, Dir};
use crate::scalar::{sum_abs_up, Scalar};

/// Dense polynomial in t. Zero polynomial is the empty coefficient vector;
/// a nonzero polynomial has a nonzero leading coefficient.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct LogPoly {
    coeffs: Vec<Scalar>,
}

impl LogPoly {
    pub fn zero() -> Self {
        LogPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        LogPoly::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        LogPoly::from_coeffs(vec![c])
    }

    /// The monomial t.
    pub fn t() -> Self {
        LogPoly::from_coeffs(vec![Scalar::zero(), Scalar::one()])
    }

    pub fn from_coeffs(coeffs: Vec<Scalar>) -> Self {
        let mut p = LogPoly { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial (degree -inf).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn scale(&self, c: &Scalar) -> LogPoly {
        if c.is_zero() {
            return LogPoly::zero();
        }
        LogPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplies by t^k.
    pub fn shift_t(&self, k: usize) -> LogPoly {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let mut coeffs = vec![Scalar::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        LogPoly { coeffs }
    }

    /// d/dt; degree drops by exactly one for nonconstant input.
    pub fn derive(&self) -> LogPoly {
        if self.coeffs.len() <= 1 {
            return LogPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * &Scalar::from_int(i as i64))
            .collect();
        LogPoly::from_coeffs(coeffs)
    }

    /// Horner evaluation at a scalar point.
    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// 1-norm of the coefficient column, rounded upward: an upper bound.
    pub fn lognorm_up(&self, p: usize) -> BigFloat {
        sum_abs_up(self.coeffs.iter().map(|c| c.abs_up(p)), p)
    }

    /// 1-norm rounded downward: a lower bound.
    pub fn lognorm_down(&self, p: usize) -> BigFloat {
        let mut acc = bf_zero();
        for c in &self.coeffs {
            acc = crate::bigfloat::bf_add(&acc, &c.abs_down(p), p, Dir::Down);
        }
        acc
    }

    /// True if every coefficient is exact.
    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_exact())
    }
}

impl Add for &LogPoly {
    type Output = LogPoly;
    fn add(self, o: &LogPoly) -> LogPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(&self.coeff(i) + &o.coeff(i));
        }
        LogPoly::from_coeffs(coeffs)
    }
}

impl Sub for &LogPoly {
    type Output = LogPoly;
    fn sub(self, o: &LogPoly) -> LogPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            coeffs.push(&self.coeff(i) - &o.coeff(i));
        }
        LogPoly::from_coeffs(coeffs)
    }
}

impl Neg for &LogPoly {
    type Output = LogPoly;
    fn neg(self) -> LogPoly {
        LogPoly {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }
}

impl Mul for &LogPoly {
    type Output = LogPoly;
    fn mul(self, o: &LogPoly) -> LogPoly {
        if self.is_zero() || o.is_zero() {
            return LogPoly::zero();
        }
        let mut coeffs = vec![Scalar::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        LogPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for LogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Applies the shifted operator L(k + s*d/dt) to P, where L is a
/// polynomial in one variable: the finite Taylor expansion
/// sum_i L^(i)(k)/i! * s^i * (d/dt)^i P. Exact in exact mode.
pub fn shifted_apply(l: &LogPoly, k: &Scalar, s: &Scalar, p: &LogPoly) -> LogPoly {
    assert!(!l.is_zero(), "operator polynomial must be nonzero");
    let mut result = LogPoly::zero();
    let mut l_deriv = l.clone();
    let mut p_deriv = p.clone();
    let mut s_pow = Scalar::one();
    let mut factorial = Scalar::one();
    let mut i: u64 = 0;
    loop {
        if l_deriv.is_zero() || p_deriv.is_zero() {
            break;
        }
        let coeff = l_deriv
            .eval(k)
            .checked_div(&factorial)
            .expect("factorial nonzero");
        result = &result + &p_deriv.scale(&(&coeff * &s_pow));
        l_deriv = l_deriv.derive();
        p_deriv = p_deriv.derive();
        s_pow = &s_pow * s;
        i += 1;
        factorial = &factorial * &Scalar::from_int(i as i64);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigfloat::bf_to_f64;

    fn poly(v: &[i64]) -> LogPoly {
        LogPoly::from_coeffs(v.iter().map(|&n| Scalar::from_int(n)).collect())
    }

    #[test]
    fn lognorm_values() {
        // t - 1 -> 2
        assert_eq!(bf_to_f64(&poly(&[-1, 1]).lognorm_up(64)), 2.0);
        // zero polynomial -> 0
        assert_eq!(bf_to_f64(&LogPoly::zero().lognorm_up(64)), 0.0);
        // (t+1)^2 = t^2 + 2t + 1 -> 4 = lognorm(t+1)^2
        let tp1 = poly(&[1, 1]);
        let sq = &tp1 * &tp1;
        assert_eq!(bf_to_f64(&sq.lognorm_up(64)), 4.0);
    }

    #[test]
    fn derive_cases() {
        assert_eq!(poly(&[0, 0, 1]).derive(), poly(&[0, 2])); // t^2 -> 2t
        assert_eq!(poly(&[5]).derive(), LogPoly::zero()); // constant -> 0
        assert_eq!(poly(&[0, -1, 0, 1]).derive(), poly(&[-1, 0, 3])); // t^3 - t
        // degree drops by exactly one
        let p = poly(&[3, 1, 4, 1, 5]);
        assert_eq!(p.derive().degree(), Some(p.degree().unwrap() - 1));
    }

    #[test]
    fn shifted_apply_cases() {
        // L = xi, k = 1, s = 1, P = t - 1: (1 + D)(t - 1) = t
        let l = poly(&[0, 1]);
        let got = shifted_apply(&l, &Scalar::from_int(1), &Scalar::from_int(1), &poly(&[-1, 1]));
        assert_eq!(got, poly(&[0, 1]));
        // zero input stays zero
        let got = shifted_apply(&l, &Scalar::from_int(7), &Scalar::from_int(2), &LogPoly::zero());
        assert!(got.is_zero());
        // L = xi^2, k = 2, s = -eps: (2 - eps D)^2 t = 4t - 4 eps
        let l2 = poly(&[0, 0, 1]);
        let eps = Scalar::from_frac(1, 3);
        let got = shifted_apply(&l2, &Scalar::from_int(2), &eps.neg(), &LogPoly::t());
        let want = LogPoly::from_coeffs(vec![
            &Scalar::from_int(-4) * &eps,
            Scalar::from_int(4),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn shifted_apply_composes() {
        // Applying L1 then L2 equals applying L1*L2.
        let l1 = poly(&[2, 1]); // xi + 2
        let l2 = poly(&[-1, 0, 1]); // xi^2 - 1
        let k = Scalar::from_frac(3, 2);
        let s = Scalar::from_frac(-1, 2);
        let p = poly(&[1, -2, 0, 5]);
        let once = shifted_apply(&l2, &k, &s, &shifted_apply(&l1, &k, &s, &p));
        let prod = shifted_apply(&(&l1 * &l2), &k, &s, &p);
        assert_eq!(once, prod);
    }

    #[test]
    fn product_degree_adds() {
        let a = poly(&[1, 2, 3]);
        let b = poly(&[-1, 1]);
        assert_eq!(
            (&a * &b).degree().unwrap(),
            a.degree().unwrap() + b.degree().unwrap()
        );
    }
}
