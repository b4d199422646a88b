//! Reduction to L(delta)u = x * M(x, ln x, u, delta u, ..., delta^n u):
//! choice of the shift ell, the substitution y = phi_ell + x^ell * u, the
//! divisibility checks, and the split into the linear operator L and the
//! polynomial right-hand side M.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde_json::{json, Map, Value};

use crate::certifier::{Certificate, Verdict};
use crate::error::{Error, Result};
use crate::logpoly::LogPoly;
use crate::poly::{Monomial, PolyN2};
use crate::problem::{poly_from_json, poly_to_json, scalar_to_json, OdeProblem};
use crate::roots::{poly_roots, RootEnclosure};
use crate::scalar::{Rat, Scalar};
use crate::series::{DulacSeries, Valuation, EXACT};

#[derive(Clone, Debug)]
pub struct ReducedProblem {
    pub ell: u32,
    /// L expanded in xi: L(xi) = sum_j a_j (xi + ell)^j.
    pub l_xi: LogPoly,
    /// Leading coefficients a_0..a_n extracted during the reduction.
    pub a: Vec<Scalar>,
    /// M as a polynomial in x, t, and v_j = delta^j u.
    pub m_poly: PolyN2,
    /// Degree of M in t.
    pub c_deg: u32,
    /// Valuation m from the certificate.
    pub m_val: u32,
}

impl ReducedProblem {
    pub fn n(&self) -> usize {
        self.m_poly.n()
    }

    /// L evaluated at an integer order.
    pub fn l_at(&self, k: u32) -> Scalar {
        self.l_xi.eval(&Scalar::from_int(k as i64))
    }

    pub fn to_json(&self) -> Value {
        let mut o = Map::new();
        o.insert("C".into(), json!(self.c_deg));
        o.insert(
            "L".into(),
            Value::Array(self.l_xi.coeffs().iter().map(scalar_to_json).collect()),
        );
        o.insert("M".into(), poly_to_json(&self.m_poly));
        o.insert("ell".into(), json!(self.ell));
        Value::Object(o)
    }

    pub fn from_json(v: &Value, n: usize, prec: usize) -> Result<ReducedProblem> {
        let o = v
            .as_object()
            .ok_or_else(|| Error::Schema("reduced problem must be an object".into()))?;
        let ell = o
            .get("ell")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Schema("reduced problem needs `ell`".into()))? as u32;
        let c_deg = o
            .get("C")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Schema("reduced problem needs `C`".into()))? as u32;
        let l = o
            .get("L")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema("reduced problem needs `L`".into()))?;
        let l_xi = LogPoly::from_coeffs(
            l.iter()
                .map(|c| crate::problem::scalar_from_json(c, prec))
                .collect::<Result<Vec<_>>>()?,
        );
        let m_poly = poly_from_json(
            o.get("M").ok_or_else(|| Error::Schema("reduced problem needs `M`".into()))?,
            n,
            prec,
        )?;
        Ok(ReducedProblem { ell, l_xi, a: Vec::new(), m_poly, c_deg, m_val: 0 })
    }
}

fn binom_scalar(n: u32, k: u32) -> Scalar {
    Scalar::from_rat(Rat::from_integer(num_integer::binomial(
        BigInt::from(n),
        BigInt::from(k),
    )))
}

/// One ulp-scale guard for numeric root bounds.
fn guard_ulp(prec: usize) -> Rat {
    Rat::new(BigInt::from(1), BigInt::from(2).pow(prec as u32 - 8))
}

/// Certified upper bound on Re(root) with the policy guard: exact roots
/// are used as-is; numeric enclosures get twice their radius plus an ulp.
fn guarded_re_upper(root: &RootEnclosure, prec: usize) -> Rat {
    match &root.exact {
        Some(g) => g.re.clone(),
        None => {
            let re = crate::bigfloat::bf_to_rat(&root.approx.re).expect("finite");
            let r = crate::bigfloat::bf_to_rat(&root.radius_up).expect("finite");
            re + Rat::from_integer(BigInt::from(2)) * r + guard_ulp(prec)
        }
    }
}

/// Chooses the reduction shift: the smallest ell satisfying both
/// conditions (ell > m, and L(xi) = sum a_j (xi + ell)^j root-free in the
/// open right half-plane) with certified margin.
pub fn choose_ell(cert: &Certificate, prec: usize) -> Result<u32> {
    if cert.verdict != Verdict::Pass {
        return Err(Error::Invalid(format!(
            "cannot reduce: certificate verdict is {}",
            cert.verdict.as_str()
        )));
    }
    let m = cert.m.expect("pass certificate has m");
    let roots = poly_roots(&cert.a, prec)?;
    let mut ell = m as i64 + 1;
    for r in &roots {
        let ub = guarded_re_upper(r, prec);
        let c = ub.ceil();
        let v: i64 = c
            .numer()
            .try_into()
            .map_err(|_| Error::Roots("root real part out of range".into()))?;
        ell = ell.max(v);
    }
    Ok(ell as u32)
}

/// Performs the substitution y = phi_ell + x^ell u and splits the result
/// into L and M. Exact computation; the seed must be known through order
/// ell and satisfy the equation to order m + ell (checked).
pub fn reduce(problem: &OdeProblem, cert: &Certificate, ell: u32) -> Result<ReducedProblem> {
    if cert.verdict != Verdict::Pass {
        return Err(Error::Invalid(format!(
            "cannot reduce: certificate verdict is {}",
            cert.verdict.as_str()
        )));
    }
    let m = cert.m.expect("pass certificate has m");
    if ell <= m {
        return Err(Error::Invalid(format!("ell = {ell} must exceed m = {m}")));
    }
    if problem.seed.trunc() < ell {
        return Err(Error::Invalid(format!(
            "seed known only through order {}, reduction at ell = {ell} needs more",
            problem.seed.trunc()
        )));
    }
    let n = problem.f.n();
    let shift = m + ell;

    // Exact polynomial prefix and its delta-tuple.
    let phi_ell = DulacSeries::from_terms(
        problem.seed.terms().filter(|(k, _)| *k <= ell).map(|(k, p)| (k, p.clone())),
        EXACT,
    );
    let mut tuple = vec![phi_ell];
    for _ in 0..n {
        tuple.push(tuple.last().unwrap().delta());
    }

    // Powers of the prefix tuple, filled on demand.
    let mut dpow: Vec<Vec<DulacSeries>> = (0..=n).map(|j| vec![DulacSeries::one(), tuple[j].clone()]).collect();
    let mut dpow_get = |j: usize, q: u32, dpow: &mut Vec<Vec<DulacSeries>>| -> DulacSeries {
        while dpow[j].len() <= q as usize {
            let next = dpow[j].last().unwrap().mul(&tuple[j]);
            dpow[j].push(next);
        }
        dpow[j][q as usize].clone()
    };

    // Expand G(x, t, u_0..u_n) = F(x, ..., D_j + x^ell u_j, ...) grouped
    // by the u-exponent pattern.
    let mut g: BTreeMap<Vec<u32>, DulacSeries> = BTreeMap::new();
    for mono in problem.f.monomials() {
        let mut acc: Vec<(Vec<u32>, DulacSeries)> = vec![(
            vec![0u32; n + 1],
            DulacSeries::monomial(mono.x_pow, LogPoly::constant(mono.coeff.clone()), EXACT),
        )];
        for j in 0..=n {
            let q = mono.y_pows[j];
            if q == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(acc.len() * (q as usize + 1));
            for (pat, series) in &acc {
                for r in 0..=q {
                    let mut pat2 = pat.clone();
                    pat2[j] = r;
                    let base = dpow_get(j, q - r, &mut dpow);
                    let factor = base
                        .scale(&binom_scalar(q, r))
                        .mul_xpow(ell * r);
                    next.push((pat2, series.mul(&factor)));
                }
            }
            acc = next;
        }
        for (pat, s) in acc {
            let entry = g.remove(&pat).unwrap_or_else(|| DulacSeries::zero(EXACT));
            g.insert(pat, entry.add(&s));
        }
    }

    // u-free part: valuation must be at least m + ell + 1.
    let zero_pat = vec![0u32; n + 1];
    let g0 = g.remove(&zero_pat).unwrap_or_else(|| DulacSeries::zero(EXACT));
    if let Valuation::Finite(k) = g0.val() {
        if k <= shift {
            return Err(Error::SeedInconsistent { order: k });
        }
    }

    let mut a = vec![Scalar::zero(); n + 1];
    let mut m_monomials: Vec<Monomial> = Vec::new();
    let mut push_series = |s: &DulacSeries, pat: &[u32], from_order: u32, out: &mut Vec<Monomial>| {
        for (k, p) in s.terms() {
            if k < from_order {
                continue;
            }
            for (i, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                out.push(Monomial {
                    coeff: c.neg(),
                    x_pow: k - shift - 1,
                    t_pow: i as u32,
                    y_pows: pat.to_vec(),
                });
            }
        }
    };
    push_series(&g0, &zero_pat, shift + 1, &mut m_monomials);

    for (pat, s) in &g {
        let weight: u32 = pat.iter().sum();
        let linear_j = if weight == 1 {
            pat.iter().position(|&r| r == 1)
        } else {
            None
        };
        match s.val() {
            Valuation::Finite(k) if k < shift => {
                return Err(Error::SeedInconsistent { order: k });
            }
            _ => {}
        }
        if let Some(j) = linear_j {
            let lead = s.coeff(shift);
            if lead.degree().unwrap_or(0) > 0 {
                return Err(Error::Invalid(format!(
                    "coefficient of u_{j} at order {shift} is not constant; the \
                     certificate and seed disagree"
                )));
            }
            a[j] = lead.coeff(0);
            push_series(s, pat, shift + 1, &mut m_monomials);
        } else {
            if let Valuation::Finite(k) = s.val() {
                if k <= shift {
                    return Err(Error::Invalid(format!(
                        "nonlinear u-term at order {k} <= m + ell = {shift}; \
                         reduction invariant violated"
                    )));
                }
            }
            push_series(s, pat, shift + 1, &mut m_monomials);
        }
    }

    // The extracted leading coefficients must reproduce the certificate.
    if problem.f.monomials().iter().all(|mm| mm.coeff.is_exact())
        && cert.a.iter().all(|c| c.is_exact())
        && a != cert.a
    {
        return Err(Error::Invalid(
            "leading coefficients from the reduction disagree with the certificate".into(),
        ));
    }
    if a[n].is_zero() {
        return Err(Error::Invalid("a_n vanished during reduction".into()));
    }

    // Re-express u_j = (delta + ell)^j u in powers of delta:
    // u_j = sum_i binom(j, i) ell^(j-i) v_i.
    let ell_scalar = Scalar::from_int(ell as i64);
    let forms: Vec<Vec<Scalar>> = (0..=n)
        .map(|j| {
            (0..=n)
                .map(|i| {
                    if i > j {
                        Scalar::zero()
                    } else {
                        &binom_scalar(j as u32, i as u32) * &ell_scalar.pow_u32((j - i) as u32)
                    }
                })
                .collect()
        })
        .collect();
    let m_poly = PolyN2::new(n, m_monomials).subst_y_linear(&forms);

    // L(xi) = sum_j a_j (xi + ell)^j, expanded.
    let xi_plus_ell = LogPoly::from_coeffs(vec![ell_scalar.clone(), Scalar::one()]);
    let mut l_xi = LogPoly::zero();
    let mut pow = LogPoly::one();
    for aj in &a {
        l_xi = &l_xi + &pow.scale(aj);
        pow = &pow * &xi_plus_ell;
    }

    // Half-plane condition: every root of L has Re <= 0, certified.
    let roots = poly_roots(l_xi.coeffs(), problem.options.prec)?;
    for r in &roots {
        let ok = match &r.exact {
            Some(g) => g.re <= Rat::from_integer(BigInt::from(0)),
            None => {
                let ub = crate::bigfloat::bf_to_rat(
                    &crate::bigfloat::bf_add(
                        &r.approx.re,
                        &r.radius_up,
                        problem.options.prec,
                        crate::bigfloat::Dir::Up,
                    ),
                )
                .expect("finite");
                ub <= Rat::from_integer(BigInt::from(0))
            }
        };
        if !ok {
            return Err(Error::Invalid(format!(
                "L has a root with positive real part at ell = {ell}; increase ell"
            )));
        }
    }

    let c_deg = m_poly.max_t_pow();
    Ok(ReducedProblem { ell, l_xi, a, m_poly, c_deg, m_val: m })
}
