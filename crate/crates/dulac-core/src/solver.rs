//! Order-by-order solution of the reduced equation: the unique tail
//! psi = sum_{k>=1} P_k(t) x^k with L(k + d/dt) P_k = R_k, where R_k is
//! the x^k coefficient of x * M evaluated at the lower-order tail.

use std::collections::BTreeMap;

use num_traits::Zero as _;

use crate::error::{Error, Result};
use crate::logpoly::LogPoly;
use crate::reducer::ReducedProblem;
use crate::scalar::Scalar;
use crate::series::{DulacSeries, EXACT};

#[derive(Clone, Debug)]
pub struct TailSolution {
    /// psi with truncation N.
    pub tail: DulacSeries,
    /// Right-hand sides R_k, retained for audit.
    pub rhs: BTreeMap<u32, LogPoly>,
    /// Degrees nu_k of the computed P_k (None for P_k = 0).
    pub degrees: BTreeMap<u32, Option<usize>>,
}

/// Unique polynomial solution of L(k + d/dt) P = R, computed by
/// back-substitution on the triangular coefficient system whose diagonal
/// is L(k). Requires L(k) != 0.
pub fn solve_poly_linear_ode(l: &LogPoly, k: u32, r: &LogPoly) -> Result<LogPoly> {
    let lk = l.eval(&Scalar::from_int(k as i64));
    if lk.is_zero() {
        return Err(Error::ResonantOrder(k));
    }
    if r.is_zero() {
        return Ok(LogPoly::zero());
    }
    // Operator coefficients: L(k + D) = sum_i c_i D^i, c_i = L^(i)(k)/i!.
    let deg_r = r.degree().unwrap();
    let mut c = Vec::new();
    let mut l_deriv = l.clone();
    let mut factorial = Scalar::one();
    let mut i: u64 = 0;
    while !l_deriv.is_zero() && (i as usize) <= deg_r {
        c.push(
            l_deriv
                .eval(&Scalar::from_int(k as i64))
                .checked_div(&factorial)
                .expect("factorial nonzero"),
        );
        l_deriv = l_deriv.derive();
        i += 1;
        factorial = &factorial * &Scalar::from_int(i as i64);
    }
    // Back-substitution from the top degree: the t^j equation reads
    // sum_i c_i (j+i)!/j! p_{j+i} = r_j.
    let mut p = vec![Scalar::zero(); deg_r + 1];
    for j in (0..=deg_r).rev() {
        let mut rhs = r.coeff(j);
        let mut rising = Scalar::one();
        for (i, ci) in c.iter().enumerate().skip(1) {
            if j + i > deg_r {
                break;
            }
            // rising factor (j+i)!/j! built incrementally
            rising = &rising * &Scalar::from_int((j + i) as i64);
            rhs = &rhs - &(&(ci * &rising) * &p[j + i]);
        }
        p[j] = rhs.checked_div(&c[0]).expect("L(k) nonzero");
    }
    Ok(LogPoly::from_coeffs(p))
}

/// Applies (k + d/dt) j times.
fn shift_pow(p: &LogPoly, k: u32, j: usize) -> LogPoly {
    let mut out = p.clone();
    let ks = Scalar::from_int(k as i64);
    for _ in 0..j {
        out = &out.scale(&ks) + &out.derive();
    }
    out
}

/// Extracts the order-`o` coefficient of a product of series factors.
fn product_coeff(factors: &[&DulacSeries], o: u32) -> LogPoly {
    match factors {
        [] => {
            if o == 0 {
                LogPoly::one()
            } else {
                LogPoly::zero()
            }
        }
        [single] => single.coeff(o),
        [first, rest @ ..] => {
            let mut acc = LogPoly::zero();
            for (k1, p1) in first.terms() {
                if k1 > o {
                    break;
                }
                let tail_coeff = product_coeff(rest, o - k1);
                if !tail_coeff.is_zero() {
                    acc = &acc + &(p1 * &tail_coeff);
                }
            }
            acc
        }
    }
}

/// Solves the tail of a reduced problem through order N.
///
/// Powers of the derivative tuple delta^j psi are cached and updated
/// incrementally as each new order is determined; only orders below k
/// contribute to R_k because every monomial of x*M carries at least one
/// power of x.
pub fn solve_tail(red: &ReducedProblem, n_orders: u32) -> Result<TailSolution> {
    let n = red.n();
    if n_orders < 1 {
        return Err(Error::Invalid("tail order must be at least 1".into()));
    }
    // Resonance-freedom along the integers we will divide by.
    for k in 1..=n_orders {
        if red.l_at(k).is_zero() {
            return Err(Error::ResonantOrder(k));
        }
    }
    // Maximum power of each variable appearing in M.
    let mut maxq = vec![0u32; n + 1];
    for m in red.m_poly.monomials() {
        for (j, &q) in m.y_pows.iter().enumerate() {
            maxq[j] = maxq[j].max(q);
        }
    }
    // powers[j][q] = (delta^j psi)^q, truncated at N.
    let mut powers: Vec<Vec<DulacSeries>> = (0..=n)
        .map(|j| {
            (0..=maxq[j])
                .map(|q| {
                    if q == 0 {
                        DulacSeries::monomial(0, LogPoly::one(), n_orders)
                    } else {
                        DulacSeries::zero(n_orders)
                    }
                })
                .collect()
        })
        .collect();

    let mut tail = DulacSeries::zero(n_orders);
    let mut rhs = BTreeMap::new();
    let mut degrees = BTreeMap::new();
    for k in 1..=n_orders {
        // R_k = coeff of x^k in x*M = coeff of x^(k-1) in M at the tail.
        let mut r = LogPoly::zero();
        for mono in red.m_poly.monomials() {
            if mono.x_pow > k - 1 {
                continue;
            }
            let o = k - 1 - mono.x_pow;
            let factors: Vec<&DulacSeries> = mono
                .y_pows
                .iter()
                .enumerate()
                .filter(|(_, &q)| q > 0)
                .map(|(j, &q)| &powers[j][q as usize])
                .collect();
            let c = product_coeff(&factors, o);
            if !c.is_zero() {
                r = &r + &c
                    .scale(&mono.coeff)
                    .shift_t(mono.t_pow as usize);
            }
        }
        let p_k = solve_poly_linear_ode(&red.l_xi, k, &r)?;
        degrees.insert(k, p_k.degree());
        if let Some(d) = p_k.degree() {
            debug_assert!(
                d as u64 <= k as u64 * red.c_deg as u64,
                "degree bound violated at order {k}: {d} > {}",
                k * red.c_deg
            );
        }
        rhs.insert(k, r);
        if !p_k.is_zero() {
            tail.set_coeff(k, p_k.clone());
            // Update cached powers: (Y + tau)^q with tau = x^k (k+D)^j P_k.
            for j in 0..=n {
                if maxq[j] == 0 {
                    continue;
                }
                let tau = DulacSeries::monomial(k, shift_pow(&p_k, k, j), n_orders);
                let old = powers[j].clone();
                for q in 1..=maxq[j] as usize {
                    let mut updated = old[q].clone();
                    let mut tau_pow = DulacSeries::monomial(0, LogPoly::one(), n_orders);
                    for i in 1..=q {
                        tau_pow = tau_pow.mul(&tau).truncate(n_orders);
                        if tau_pow.is_zero_through_trunc() {
                            break;
                        }
                        let binom = Scalar::from_rat(crate::scalar::Rat::from_integer(
                            num_integer::binomial(
                                num_bigint::BigInt::from(q),
                                num_bigint::BigInt::from(i),
                            ),
                        ));
                        updated = updated.add(&old[q - i].mul(&tau_pow).scale(&binom).truncate(n_orders));
                    }
                    powers[j][q] = updated.truncate(n_orders);
                }
            }
        }
    }
    Ok(TailSolution { tail, rhs, degrees })
}

/// phi = phi_ell + x^ell psi. Seed orders above ell must agree with the
/// tail where both are known.
pub fn recompose(seed: &DulacSeries, ell: u32, tail: &TailSolution) -> Result<DulacSeries> {
    if seed.trunc() < ell {
        return Err(Error::Invalid(format!(
            "seed truncation {} below ell = {ell}",
            seed.trunc()
        )));
    }
    let shifted = tail.tail.mul_xpow(ell);
    let trunc = shifted.trunc();
    let mut out = DulacSeries::zero(trunc);
    for (k, p) in shifted.terms() {
        out.set_coeff(k, p.clone());
    }
    for (k, p) in seed.terms() {
        if k <= ell {
            out.set_coeff(k, p.clone());
        } else if k <= trunc {
            // Overlap: the seed claims this order too; they must agree.
            if &out.coeff(k) != p {
                return Err(Error::Invalid(format!(
                    "seed order {k} disagrees with the computed tail"
                )));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::certify;
    use crate::parser::parse_expression;
    use crate::problem::{OdeOptions, OdeProblem};
    use crate::reducer::{choose_ell, reduce};
    use crate::scalar::rat_frac;

    fn poly(v: &[i64]) -> LogPoly {
        LogPoly::from_coeffs(v.iter().map(|&x| Scalar::from_int(x)).collect())
    }

    #[test]
    fn linear_ode_examples() {
        // L = xi, k = 1, R = t: (1 + D) P = t -> P = t - 1
        let p = solve_poly_linear_ode(&LogPoly::t(), 1, &LogPoly::t()).unwrap();
        assert_eq!(p, poly(&[-1, 1]));
        // R = 0 -> P = 0
        let p = solve_poly_linear_ode(&poly(&[3, 2, 1]), 2, &LogPoly::zero()).unwrap();
        assert!(p.is_zero());
        // L = xi^2, k = 1, R = t^2: P = t^2 - 4t + 6
        let p = solve_poly_linear_ode(&poly(&[0, 0, 1]), 1, &poly(&[0, 0, 1])).unwrap();
        assert_eq!(p, poly(&[6, -4, 1]));
        // resonance: L = xi - 2 at k = 2
        assert!(matches!(
            solve_poly_linear_ode(&poly(&[-2, 1]), 2, &LogPoly::one()),
            Err(Error::ResonantOrder(2))
        ));
    }

    #[test]
    fn solved_ode_satisfies_equation() {
        // For random-ish L, k, R: verify L(k+D)P == R exactly.
        let cases = [
            (poly(&[1, 1]), 3, poly(&[2, 0, 5])),
            (poly(&[-3, 0, 2]), 1, poly(&[1, 1, 1, 1])),
            (poly(&[0, 1]), 4, poly(&[7])),
        ];
        for (l, k, r) in cases {
            let p = solve_poly_linear_ode(&l, k, &r).unwrap();
            let back = crate::logpoly::shifted_apply(
                &l,
                &Scalar::from_int(k as i64),
                &Scalar::one(),
                &p,
            );
            assert_eq!(back, r, "L = {l}, k = {k}");
            assert_eq!(p.degree(), r.degree());
        }
    }

    fn abel_pipeline(c: i64, n_orders: u32) -> (OdeProblem, ReducedProblem, TailSolution) {
        let f = parse_expression("y0*y1 - y0^2 + x^2*y0 + 1", 1).unwrap();
        let seed = DulacSeries::from_terms(
            [
                (0, LogPoly::one()),
                (2, LogPoly::from_coeffs(vec![Scalar::from_int(c), Scalar::from_int(-1)])),
            ],
            2,
        );
        let p = OdeProblem { name: "abel2".into(), f, seed, options: OdeOptions::default() };
        let cert = certify(&p, &p.seed, 2).unwrap();
        let ell = choose_ell(&cert, 256).unwrap();
        let red = reduce(&p, &cert, ell).unwrap();
        let tail = solve_tail(&red, n_orders).unwrap();
        (p, red, tail)
    }

    #[test]
    fn abel_tail_structure() {
        let (_, red, tail) = abel_pipeline(0, 8);
        assert_eq!(red.ell, 2);
        // P_1 = 0; P_2 = -t^2/2 + t/2 - 1/4 (hand computation)
        assert!(tail.tail.coeff(1).is_zero());
        let want = LogPoly::from_coeffs(vec![
            Scalar::from_rat(rat_frac(-1, 4)),
            Scalar::from_rat(rat_frac(1, 2)),
            Scalar::from_rat(rat_frac(-1, 2)),
        ]);
        assert_eq!(tail.tail.coeff(2), want);
        // odd orders vanish
        for k in [1u32, 3, 5, 7] {
            assert!(tail.tail.coeff(k).is_zero(), "odd order {k} nonzero");
        }
        // degree bound
        for (k, d) in &tail.degrees {
            if let Some(d) = d {
                assert!(*d as u64 <= (*k as u64) * red.c_deg as u64);
            }
        }
    }

    #[test]
    fn tail_satisfies_reduced_equation() {
        // Exactness: L(delta) psi == x * M(tail) order by order.
        let (_, red, tail) = abel_pipeline(1, 8);
        let psi = &tail.tail;
        // L(delta) psi: order k gets L(k + D) P_k
        for k in 1..=8u32 {
            let lhs = crate::logpoly::shifted_apply(
                &red.l_xi,
                &Scalar::from_int(k as i64),
                &Scalar::one(),
                &psi.coeff(k),
            );
            let rhs = tail.rhs.get(&k).unwrap();
            assert_eq!(&lhs, rhs, "order {k}");
        }
        // and R_k really is the coefficient of x^k in x*M at the full tail
        let mut tuple = vec![psi.clone()];
        tuple.push(psi.delta());
        let m_eval = red.m_poly.substitute_tuple(&tuple).unwrap();
        for k in 1..=8u32 {
            let direct = m_eval.coeff(k - 1);
            assert_eq!(&direct, tail.rhs.get(&k).unwrap(), "R_{k}");
        }
    }

    #[test]
    fn zero_forcing_zero_tail() {
        // M with no u-free monomials and zero seed forcing: all P_k = 0.
        let f = parse_expression("y1 - y0 + 1 + x", 1).unwrap();
        let seed = DulacSeries::from_terms(
            [
                (0, LogPoly::one()),
                (1, LogPoly::from_coeffs(vec![Scalar::from_int(1), Scalar::from_int(-1)])),
            ],
            3,
        );
        let p = OdeProblem { name: "linlog".into(), f, seed, options: OdeOptions::default() };
        let cert = certify(&p, &p.seed, 2).unwrap();
        let red = reduce(&p, &cert, 1).unwrap();
        let tail = solve_tail(&red, 6).unwrap();
        assert!(tail.tail.is_zero_through_trunc());
    }

    #[test]
    fn recompose_cases() {
        // seed {k=0:1}, ell = 0, tail {k=1:t} -> {0:1, 1:t}
        let seed = DulacSeries::monomial(0, LogPoly::one(), 0);
        let tail = TailSolution {
            tail: DulacSeries::monomial(1, LogPoly::t(), 5),
            rhs: BTreeMap::new(),
            degrees: BTreeMap::new(),
        };
        let phi = recompose(&seed, 0, &tail).unwrap();
        assert_eq!(phi.coeff(0), LogPoly::one());
        assert_eq!(phi.coeff(1), LogPoly::t());
        assert_eq!(phi.trunc(), 5);
        // empty tail: seed unchanged
        let tail0 = TailSolution {
            tail: DulacSeries::zero(4),
            rhs: BTreeMap::new(),
            degrees: BTreeMap::new(),
        };
        let phi = recompose(&seed, 0, &tail0).unwrap();
        assert_eq!(phi.coeff(0), LogPoly::one());
        assert_eq!(phi.trunc(), 4);
    }

    #[test]
    fn abel_recompose_even_orders() {
        let (p, red, tail) = abel_pipeline(0, 10);
        let phi = recompose(&p.seed, red.ell, &tail).unwrap();
        // 1 + (C - ln x)x^2 + sum_{k>=2} P_k(ln x) x^{2k}: odd orders vanish
        for k in (1..=11u32).step_by(2) {
            assert!(phi.coeff(k).is_zero(), "odd order {k}");
        }
        assert_eq!(phi.coeff(0), LogPoly::one());
        assert_eq!(phi.trunc(), 12);
        // the full residual vanishes at every computable order
        let res = p.f.substitute(&phi).unwrap();
        for k in 0..=res.trunc() {
            assert!(res.coeff(k).is_zero(), "residual at order {k}");
        }
    }

    #[test]
    fn recompose_overlap_must_agree() {
        let (p, red, tail) = abel_pipeline(0, 6);
        // seed extended with a wrong order-4 term
        let mut bad_terms: Vec<(u32, LogPoly)> = p.seed.terms().map(|(k, q)| (k, q.clone())).collect();
        bad_terms.push((4, LogPoly::one()));
        let bad_seed = DulacSeries::from_terms(bad_terms, 4);
        assert!(recompose(&bad_seed, red.ell, &tail).is_err());
    }
}
