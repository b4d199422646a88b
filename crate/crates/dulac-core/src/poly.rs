//! Polynomials F(x, y_0, ..., y_n) in monomial-list form, where y_j stands
//! for the j-th delta-power of the unknown. Reduced right-hand sides reuse
//! the same type with an extra exponent on t = ln x.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::logpoly::LogPoly;
use crate::scalar::{rat_to_string, Scalar};
use crate::series::{DulacSeries, EXACT};

#[derive(Clone, PartialEq, Debug)]
pub struct Monomial {
    pub coeff: Scalar,
    pub x_pow: u32,
    pub t_pow: u32,
    pub y_pows: Vec<u32>,
}

impl Monomial {
    fn key(&self) -> (u32, u32, Vec<u32>) {
        (self.x_pow, self.t_pow, self.y_pows.clone())
    }
}

/// Canonicalized polynomial: monomials sorted lexicographically in
/// (x_pow, t_pow, y_pows), merged, zero coefficients dropped.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyN2 {
    n: usize,
    monomials: Vec<Monomial>,
}

impl PolyN2 {
    pub fn new(n: usize, monomials: Vec<Monomial>) -> Self {
        let mut p = PolyN2 { n, monomials };
        p.canonicalize();
        p
    }

    pub fn zero(n: usize) -> Self {
        PolyN2 { n, monomials: Vec::new() }
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        PolyN2::new(
            n,
            vec![Monomial { coeff: c, x_pow: 0, t_pow: 0, y_pows: vec![0; n + 1] }],
        )
    }

    /// The variable y_j as a polynomial.
    pub fn var(n: usize, j: usize) -> Self {
        assert!(j <= n);
        let mut y_pows = vec![0; n + 1];
        y_pows[j] = 1;
        PolyN2::new(
            n,
            vec![Monomial { coeff: Scalar::one(), x_pow: 0, t_pow: 0, y_pows }],
        )
    }

    pub fn xvar(n: usize) -> Self {
        PolyN2::new(
            n,
            vec![Monomial { coeff: Scalar::one(), x_pow: 1, t_pow: 0, y_pows: vec![0; n + 1] }],
        )
    }

    fn canonicalize(&mut self) {
        for m in &self.monomials {
            assert_eq!(m.y_pows.len(), self.n + 1, "y exponent arity");
        }
        self.monomials.sort_by(|a, b| a.key().cmp(&b.key()));
        let mut merged: Vec<Monomial> = Vec::with_capacity(self.monomials.len());
        for m in self.monomials.drain(..) {
            match merged.last_mut() {
                Some(last) if last.key() == m.key() => {
                    last.coeff = &last.coeff + &m.coeff;
                }
                _ => merged.push(m),
            }
        }
        merged.retain(|m| !m.coeff.is_zero());
        self.monomials = merged;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn num_monomials(&self) -> usize {
        self.monomials.len()
    }

    pub fn add(&self, o: &PolyN2) -> PolyN2 {
        assert_eq!(self.n, o.n);
        let mut monomials = self.monomials.clone();
        monomials.extend(o.monomials.iter().cloned());
        PolyN2::new(self.n, monomials)
    }

    pub fn sub(&self, o: &PolyN2) -> PolyN2 {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> PolyN2 {
        PolyN2 {
            n: self.n,
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial { coeff: m.coeff.neg(), ..m.clone() })
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> PolyN2 {
        PolyN2::new(
            self.n,
            self.monomials
                .iter()
                .map(|m| Monomial { coeff: &m.coeff * c, ..m.clone() })
                .collect(),
        )
    }

    pub fn mul(&self, o: &PolyN2) -> PolyN2 {
        assert_eq!(self.n, o.n);
        let mut monomials = Vec::with_capacity(self.monomials.len() * o.monomials.len());
        for a in &self.monomials {
            for b in &o.monomials {
                monomials.push(Monomial {
                    coeff: &a.coeff * &b.coeff,
                    x_pow: a.x_pow + b.x_pow,
                    t_pow: a.t_pow + b.t_pow,
                    y_pows: a
                        .y_pows
                        .iter()
                        .zip(&b.y_pows)
                        .map(|(p, q)| p + q)
                        .collect(),
                });
            }
        }
        PolyN2::new(self.n, monomials)
    }

    pub fn pow(&self, e: u32) -> PolyN2 {
        let mut acc = PolyN2::constant(self.n, Scalar::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal partial derivative in y_j.
    pub fn partial(&self, j: usize) -> Result<PolyN2> {
        if j > self.n {
            return Err(Error::Arity(format!(
                "partial index {j} out of range for order {}",
                self.n
            )));
        }
        let monomials = self
            .monomials
            .iter()
            .filter(|m| m.y_pows[j] > 0)
            .map(|m| {
                let mut y_pows = m.y_pows.clone();
                y_pows[j] -= 1;
                Monomial {
                    coeff: &m.coeff * &Scalar::from_int(m.y_pows[j] as i64),
                    x_pow: m.x_pow,
                    t_pow: m.t_pow,
                    y_pows,
                }
            })
            .collect();
        Ok(PolyN2::new(self.n, monomials))
    }

    pub fn max_t_pow(&self) -> u32 {
        self.monomials.iter().map(|m| m.t_pow).max().unwrap_or(0)
    }

    pub fn max_x_pow(&self) -> u32 {
        self.monomials.iter().map(|m| m.x_pow).max().unwrap_or(0)
    }

    pub fn max_total_y_degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(|m| m.y_pows.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Evaluates at the delta-tuple of a series: builds
    /// (s, delta s, ..., delta^n s) and substitutes.
    pub fn substitute(&self, s: &DulacSeries) -> Result<DulacSeries> {
        let mut tuple = Vec::with_capacity(self.n + 1);
        tuple.push(s.clone());
        for _ in 0..self.n {
            tuple.push(tuple.last().unwrap().delta());
        }
        self.substitute_tuple(&tuple)
    }

    /// Evaluates at an explicit variable tuple. Horner-like nesting over
    /// y_n, ..., y_0 keeps the product count down.
    pub fn substitute_tuple(&self, tuple: &[DulacSeries]) -> Result<DulacSeries> {
        if tuple.len() != self.n + 1 {
            return Err(Error::Arity(format!(
                "expected {} series, got {}",
                self.n + 1,
                tuple.len()
            )));
        }
        let idx: Vec<usize> = (0..self.monomials.len()).collect();
        Ok(self.horner(&idx, self.n as isize, tuple))
    }

    fn horner(&self, idx: &[usize], var: isize, tuple: &[DulacSeries]) -> DulacSeries {
        if idx.is_empty() {
            return DulacSeries::zero(EXACT);
        }
        // Find which variable to nest on: highest var with a nonzero power.
        // Variables above `var` were stripped by outer Horner levels.
        let mut v = var;
        while v >= 0 && !idx.iter().any(|&i| self.monomials[i].y_pows[v as usize] > 0) {
            v -= 1;
        }
        if v < 0 {
            // Base: only x and t left; collect into a Dulac polynomial.
            let mut out = DulacSeries::zero(EXACT);
            for &i in idx {
                let m = &self.monomials[i];
                let p = LogPoly::constant(m.coeff.clone()).shift_t(m.t_pow as usize);
                let cur = out.coeff(m.x_pow);
                out.set_coeff(m.x_pow, &cur + &p);
            }
            return out;
        }
        let v = v as usize;
        let max_q = idx
            .iter()
            .map(|&i| self.monomials[i].y_pows[v])
            .max()
            .unwrap();
        // Group monomial indices by their power of y_v; within a group the
        // y_v factor is implicit, so the recursion proceeds below v.
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); max_q as usize + 1];
        for &i in idx {
            groups[self.monomials[i].y_pows[v] as usize].push(i);
        }
        // Horner: C_0 + y_v (C_1 + y_v (C_2 + ...)).
        let mut acc: Option<DulacSeries> = None;
        for group in groups.iter().rev() {
            let coeff = if group.is_empty() {
                None
            } else {
                Some(self.horner(group, v as isize - 1, tuple))
            };
            acc = match (acc, coeff) {
                (None, None) => None,
                (None, Some(c)) => Some(c),
                (Some(a), None) => Some(a.mul(&tuple[v])),
                (Some(a), Some(c)) => Some(a.mul(&tuple[v]).add(&c)),
            };
        }
        acc.unwrap_or_else(|| DulacSeries::zero(EXACT))
    }

    /// Substitutes each variable y_j by a linear combination of fresh
    /// variables with scalar coefficients: y_j -> sum_i forms[j][i] * v_i.
    /// Used by the reduction to re-express (delta + ell)^j u in powers of
    /// delta.
    pub fn subst_y_linear(&self, forms: &[Vec<Scalar>]) -> PolyN2 {
        assert_eq!(forms.len(), self.n + 1);
        let linear: Vec<PolyN2> = forms
            .iter()
            .map(|f| {
                PolyN2::new(
                    self.n,
                    f.iter()
                        .enumerate()
                        .map(|(i, c)| {
                            let mut y_pows = vec![0; self.n + 1];
                            y_pows[i] = 1;
                            Monomial { coeff: c.clone(), x_pow: 0, t_pow: 0, y_pows }
                        })
                        .collect(),
                )
            })
            .collect();
        let mut out = PolyN2::zero(self.n);
        for m in &self.monomials {
            let mut term = PolyN2::new(
                self.n,
                vec![Monomial {
                    coeff: m.coeff.clone(),
                    x_pow: m.x_pow,
                    t_pow: m.t_pow,
                    y_pows: vec![0; self.n + 1],
                }],
            );
            for (j, &q) in m.y_pows.iter().enumerate() {
                if q > 0 {
                    term = term.mul(&linear[j].pow(q));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Grammar-conformant text for polynomials with exact real
    /// coefficients and no t powers; `None` otherwise.
    pub fn emit_text(&self) -> Option<String> {
        if self.is_zero() {
            return Some("0".to_string());
        }
        let mut parts = Vec::new();
        for m in &self.monomials {
            let g = m.coeff.as_exact()?;
            if !g.im.is_zero() || m.t_pow != 0 {
                return None;
            }
            let mut factors = Vec::new();
            let c = rat_to_string(&g.re);
            if c != "1" || (m.x_pow == 0 && m.y_pows.iter().all(|&q| q == 0)) {
                factors.push(c);
            }
            if m.x_pow == 1 {
                factors.push("x".to_string());
            } else if m.x_pow > 1 {
                factors.push(format!("x^{}", m.x_pow));
            }
            for (j, &q) in m.y_pows.iter().enumerate() {
                if q == 1 {
                    factors.push(format!("y{j}"));
                } else if q > 1 {
                    factors.push(format!("y{j}^{q}"));
                }
            }
            parts.push(factors.join("*"));
        }
        Some(parts.join(" + "))
    }
}
