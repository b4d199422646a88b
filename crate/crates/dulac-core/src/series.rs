//! Truncated Dulac series: finite maps k -> P_k(t) with an explicit
//! truncation order. A series asserts complete knowledge of every order
//! up to its truncation; arithmetic computes the largest truncation it
//! can honestly claim.

use std::collections::BTreeMap;
use std::fmt;

use crate::logpoly::LogPoly;
use crate::scalar::Scalar;

/// Truncation sentinel for exact Dulac polynomials (all omitted orders are
/// genuinely zero, not unknown).
pub const EXACT: u32 = u32::MAX;

fn sat_add(a: u32, b: u32) -> u32 {
    if a == EXACT || b == EXACT {
        EXACT
    } else {
        a.saturating_add(b).min(EXACT - 1)
    }
}

/// Valuation of a series: smallest order with a nonzero coefficient.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Valuation {
    Finite(u32),
    /// No nonzero order is known, but the series is only known up to a
    /// truncation: the valuation is at least this.
    AtLeast(u32),
    /// Exactly the zero series.
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::AtLeast(k) => write!(f, ">= {k}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct DulacSeries {
    terms: BTreeMap<u32, LogPoly>,
    trunc: u32,
}

impl DulacSeries {
    pub fn zero(trunc: u32) -> Self {
        DulacSeries { terms: BTreeMap::new(), trunc }
    }

    /// The constant series 1 (exact polynomial).
    pub fn one() -> Self {
        DulacSeries::monomial(0, LogPoly::one(), EXACT)
    }

    pub fn constant(c: Scalar) -> Self {
        DulacSeries::monomial(0, LogPoly::constant(c), EXACT)
    }

    pub fn monomial(k: u32, p: LogPoly, trunc: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !p.is_zero() && k <= trunc {
            terms.insert(k, p);
        }
        DulacSeries { terms, trunc }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, LogPoly)>, trunc: u32) -> Self {
        let mut map = BTreeMap::new();
        for (k, p) in terms {
            if !p.is_zero() && k <= trunc {
                map.insert(k, p);
            }
        }
        DulacSeries { terms: map, trunc }
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_exact_poly(&self) -> bool {
        self.trunc == EXACT
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &LogPoly)> {
        self.terms.iter().map(|(k, p)| (*k, p))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, k: u32) -> LogPoly {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn coeff_ref(&self, k: u32) -> Option<&LogPoly> {
        self.terms.get(&k)
    }

    pub fn is_zero_through_trunc(&self) -> bool {
        self.terms.is_empty()
    }

    /// Inserts/overwrites the coefficient of x^k. The order must be within
    /// the asserted truncation.
    pub fn set_coeff(&mut self, k: u32, p: LogPoly) {
        assert!(k <= self.trunc, "order {k} beyond truncation {}", self.trunc);
        if p.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, p);
        }
    }

    /// Restricts to a lower truncation, dropping higher stored orders.
    pub fn truncate(&self, n: u32) -> DulacSeries {
        let trunc = self.trunc.min(n);
        DulacSeries {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| **k <= trunc)
                .map(|(k, p)| (*k, p.clone()))
                .collect(),
            trunc,
        }
    }

    /// Valuation per the definition; the zero-so-far series reports
    /// `AtLeast(trunc + 1)` for finite truncations.
    pub fn val(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(&k) => Valuation::Finite(k),
            None if self.trunc == EXACT => Valuation::Infinite,
            None => Valuation::AtLeast(self.trunc + 1),
        }
    }

    /// Lower bound on the valuation, as a plain number (EXACT for the
    /// exact zero series).
    fn val_lb(&self) -> u32 {
        match self.val() {
            Valuation::Finite(k) => k,
            Valuation::AtLeast(k) => k,
            Valuation::Infinite => EXACT,
        }
    }

    /// The derivation delta = x d/dx: P_k(ln x) x^k -> x^k (k + d/dt) P_k.
    pub fn delta(&self) -> DulacSeries {
        let terms = self.terms.iter().map(|(&k, p)| {
            let kp = p.scale(&Scalar::from_int(k as i64));
            (k, &kp + &p.derive())
        });
        DulacSeries::from_terms(terms, self.trunc)
    }

    pub fn neg(&self) -> DulacSeries {
        DulacSeries {
            terms: self.terms.iter().map(|(k, p)| (*k, -p)).collect(),
            trunc: self.trunc,
        }
    }

    pub fn add(&self, o: &DulacSeries) -> DulacSeries {
        let trunc = self.trunc.min(o.trunc);
        let mut out = DulacSeries::zero(trunc);
        for (&k, p) in self.terms.iter().chain(o.terms.iter()) {
            if k > trunc {
                continue;
            }
            let cur = out.coeff(k);
            out.set_coeff(k, &cur + p);
        }
        out
    }

    pub fn sub(&self, o: &DulacSeries) -> DulacSeries {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Scalar) -> DulacSeries {
        DulacSeries {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| (*k, p.scale(c)))
                .filter(|(_, p)| !p.is_zero())
                .collect(),
            trunc: self.trunc,
        }
    }

    /// Multiplies every coefficient polynomial by `f(P_k)`.
    pub fn map_coeffs(&self, f: impl Fn(&LogPoly) -> LogPoly) -> DulacSeries {
        DulacSeries::from_terms(
            self.terms.iter().map(|(&k, p)| (k, f(p))),
            self.trunc,
        )
    }

    /// Multiplies by x^m (shifts orders up; the truncation shifts too).
    pub fn mul_xpow(&self, m: u32) -> DulacSeries {
        DulacSeries {
            terms: self.terms.iter().map(|(k, p)| (sat_add(*k, m), p.clone())).collect(),
            trunc: sat_add(self.trunc, m),
        }
    }

    /// Cauchy product. The result truncation is the largest order at which
    /// every contribution is known on both sides:
    /// min(trunc_a + val(b), trunc_b + val(a)).
    pub fn mul(&self, o: &DulacSeries) -> DulacSeries {
        let trunc = sat_add(self.trunc, o.val_lb()).min(sat_add(o.trunc, self.val_lb()));
        let mut out = DulacSeries::zero(trunc);
        for (&i, p) in &self.terms {
            for (&j, q) in &o.terms {
                let k = sat_add(i, j);
                if k > trunc {
                    break;
                }
                let cur = out.coeff(k);
                out.set_coeff(k, &cur + &(p * q));
            }
        }
        out
    }

    /// Single coefficient of the Cauchy product; the caller must ensure
    /// the order is within both operands' knowledge.
    pub fn mul_coeff(&self, o: &DulacSeries, k: u32) -> LogPoly {
        let mut acc = LogPoly::zero();
        for (&i, p) in self.terms.range(..=k) {
            if let Some(q) = o.terms.get(&(k - i)) {
                acc = &acc + &(p * q);
            }
        }
        acc
    }

    pub fn pow(&self, e: u32) -> DulacSeries {
        let mut acc = DulacSeries::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Maximum t-degree over the stored coefficients.
    pub fn max_t_degree(&self) -> usize {
        self.terms
            .values()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(|p| p.is_exact())
    }
}

impl fmt::Display for DulacSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (k, p) in &self.terms {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({p})*x^{k}")?;
            }
        }
        if self.trunc != EXACT {
            write!(f, " + O(x^{})", self.trunc as u64 + 1)?;
        }
        Ok(())
    }
}
