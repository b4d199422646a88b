//! Polynomial root finding with certified enclosures.
//!
//! Small degrees with exact coefficients are solved exactly (including
//! Gaussian-rational square roots of quadratic discriminants). Otherwise
//! Durand-Kerner simultaneous iteration runs in big-float complex
//! arithmetic; the final Weierstrass corrections W_i give the classical
//! inclusion statement that every root lies in some disk
//! D(z_i, n*|W_i|), which is what the certificate consumes.

use astro_float::BigFloat;

use crate::bigfloat::{bf_div, bf_from_u64, bf_mul, bf_to_f64, bf_zero, rat_to_bf, BigC, Dir};
use crate::error::{Error, Result};
use crate::scalar::{gaussian_sqrt, GaussRat, Rat, Scalar};

#[derive(Clone, Debug)]
pub struct RootEnclosure {
    pub approx: BigC,
    /// Upper bound on the covering radius; zero for exact roots.
    pub radius_up: BigFloat,
    /// Present when the root was computed exactly.
    pub exact: Option<GaussRat>,
}

impl RootEnclosure {
    fn from_exact(g: GaussRat, prec: usize) -> Self {
        RootEnclosure {
            approx: BigC::new(
                rat_to_bf(&g.re, prec, Dir::Near),
                rat_to_bf(&g.im, prec, Dir::Near),
                prec,
            ),
            radius_up: bf_zero(),
            exact: Some(g),
        }
    }

    /// Upper bound on the real part of any root covered by this disk.
    pub fn re_upper(&self) -> Rat {
        match &self.exact {
            Some(g) => g.re.clone(),
            None => {
                let up = crate::bigfloat::bf_add(
                    &self.approx.re,
                    &self.radius_up,
                    self.approx.prec,
                    Dir::Up,
                );
                crate::bigfloat::bf_to_rat(&up).expect("finite")
            }
        }
    }

    /// Upper bound on |root| for roots covered by this disk.
    pub fn abs_upper(&self) -> BigFloat {
        crate::bigfloat::bf_add(
            &self.approx.abs_up(),
            &self.radius_up,
            self.approx.prec,
            Dir::Up,
        )
    }
}

/// Roots of sum_j coeffs[j] * z^j. The leading coefficient must be nonzero.
pub fn poly_roots(coeffs: &[Scalar], prec: usize) -> Result<Vec<RootEnclosure>> {
    let deg = coeffs.len().saturating_sub(1);
    let lead = coeffs
        .last()
        .filter(|c| !c.is_zero())
        .ok_or_else(|| Error::Roots("leading coefficient is zero".into()))?;
    if deg == 0 {
        return Ok(Vec::new());
    }
    // Exact route for degrees 1 and 2 with exact coefficients.
    if coeffs.iter().all(|c| c.is_exact()) {
        let g: Vec<&GaussRat> = coeffs.iter().map(|c| c.as_exact().unwrap()).collect();
        if deg == 1 {
            let root = (-g[0]).div(g[1]).expect("nonzero leading coefficient");
            return Ok(vec![RootEnclosure::from_exact(root, prec)]);
        }
        if deg == 2 {
            let four = GaussRat::from_int(4);
            let disc = &g[1].mul(g[1]) - &four.mul(&g[2].mul(g[0]));
            if let Some(s) = gaussian_sqrt(&disc) {
                let two_a = GaussRat::from_int(2).mul(g[2]);
                let r1 = (&(-g[1]) + &s).div(&two_a).expect("nonzero");
                let r2 = (&(-g[1]) - &s).div(&two_a).expect("nonzero");
                return Ok(vec![
                    RootEnclosure::from_exact(r1, prec),
                    RootEnclosure::from_exact(r2, prec),
                ]);
            }
        }
    }
    durand_kerner(coeffs, lead, deg, prec)
}

fn durand_kerner(
    coeffs: &[Scalar],
    lead: &Scalar,
    deg: usize,
    prec: usize,
) -> Result<Vec<RootEnclosure>> {
    let w = prec + 32;
    let c: Vec<BigC> = coeffs.iter().map(|s| s.to_bigc(w)).collect();
    let lead_c = lead.to_bigc(w);
    // Monic coefficients for the iteration.
    let monic: Vec<BigC> = c.iter().map(|ci| ci.div(&lead_c)).collect();
    let horner = |z: &BigC, cs: &[BigC]| -> BigC {
        let mut acc = BigC::zero(w);
        for ci in cs.iter().rev() {
            acc = acc.mul(z).add(ci);
        }
        acc
    };
    // Standard staggered initial points.
    let seed = BigC::from_f64(0.4, 0.9, w);
    let mut z: Vec<BigC> = (0..deg).map(|i| seed.powu(i as u32 + 1)).collect();
    let tiny = {
        let mut t = bf_from_u64(1, w);
        t.set_exponent(-((prec as i64 - 4) as i32));
        t
    };
    let mut corrections: Vec<BigC> = vec![BigC::zero(w); deg];
    for _iter in 0..400 {
        let mut max_w = bf_zero();
        for i in 0..deg {
            let p = horner(&z[i], &monic);
            let mut den = BigC::new(bf_from_u64(1, w), bf_zero(), w);
            for j in 0..deg {
                if j != i {
                    den = den.mul(&z[i].sub(&z[j]));
                }
            }
            if den.is_zero() {
                return Err(Error::Roots("coincident iterates".into()));
            }
            let wi = p.div(&den);
            corrections[i] = wi.clone();
            z[i] = z[i].sub(&wi);
            let mag = wi.abs_up();
            max_w = crate::bigfloat::bf_max(&max_w, &mag);
        }
        if crate::bigfloat::bf_le(&max_w, &tiny) {
            break;
        }
    }
    // Certified covering radii from the final Weierstrass corrections,
    // recomputed at the final iterates with directed rounding.
    let mut out = Vec::with_capacity(deg);
    for i in 0..deg {
        let p_up = horner(&z[i], &c).abs_up();
        let mut den_down = lead_c.abs_down();
        for j in 0..deg {
            if j != i {
                den_down = bf_mul(&den_down, &z[i].sub(&z[j]).abs_down(), w, Dir::Down);
            }
        }
        if den_down.is_zero() || den_down.is_negative() {
            return Err(Error::Roots("cannot certify enclosure radii".into()));
        }
        let wi_up = bf_div(&p_up, &den_down, w, Dir::Up);
        let radius_up = bf_mul(&wi_up, &bf_from_u64(deg as u64, w), prec, Dir::Up);
        if !radius_up.is_negative() && bf_to_f64(&radius_up) > 1e-6 {
            return Err(Error::Roots(format!(
                "enclosure radius too large ({}); raise the precision",
                bf_to_f64(&radius_up)
            )));
        }
        out.push(RootEnclosure {
            approx: BigC::new(z[i].re.clone(), z[i].im.clone(), prec),
            radius_up,
            exact: None,
        });
    }
    Ok(out)
}

/// Smallest integer ell with ell >= Re(root) certified for every root.
pub fn ceil_max_re(roots: &[RootEnclosure]) -> i64 {
    let mut best: Option<Rat> = None;
    for r in roots {
        let ub = r.re_upper();
        best = Some(match best {
            None => ub,
            Some(b) => {
                if ub > b {
                    ub
                } else {
                    b
                }
            }
        });
    }
    match best {
        None => 0,
        Some(b) => {
            let c = b.ceil();
            let v: i64 = c
                .numer()
                .try_into()
                .expect("root real parts are of moderate size");
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;
    use num_traits::Zero;

    #[test]
    fn linear_exact() {
        // -2 + z = 0 -> root 2 exactly
        let roots = poly_roots(&[Scalar::from_int(-2), Scalar::from_int(1)], 128).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].exact, Some(GaussRat::from_int(2)));
        assert_eq!(ceil_max_re(&roots), 2);
    }

    #[test]
    fn quadratic_exact() {
        // (z - 1)(z - 3) = 3 - 4z + z^2
        let roots = poly_roots(
            &[Scalar::from_int(3), Scalar::from_int(-4), Scalar::from_int(1)],
            128,
        )
        .unwrap();
        let mut res: Vec<Rat> = roots.iter().map(|r| r.exact.clone().unwrap().re).collect();
        res.sort();
        assert_eq!(res, vec![rat_int(1), rat_int(3)]);
        assert_eq!(ceil_max_re(&roots), 3);
    }

    #[test]
    fn quadratic_complex_exact() {
        // z^2 + 1 -> +-i
        let roots =
            poly_roots(&[Scalar::from_int(1), Scalar::zero(), Scalar::from_int(1)], 128).unwrap();
        for r in &roots {
            let g = r.exact.clone().unwrap();
            assert!(g.re.is_zero());
        }
        assert_eq!(ceil_max_re(&roots), 0);
    }

    #[test]
    fn cubic_numeric_with_certificates() {
        // (z+1)(z-2)(z^2... keep cubic: (z+1)(z-2)(z-1/2) =
        // z^3 - 3/2 z^2 - 3/2 z + 1
        let roots = poly_roots(
            &[
                Scalar::from_int(1),
                Scalar::from_frac(-3, 2),
                Scalar::from_frac(-3, 2),
                Scalar::from_int(1),
            ],
            192,
        )
        .unwrap();
        assert_eq!(roots.len(), 3);
        let mut res: Vec<f64> = roots.iter().map(|r| bf_to_f64(&r.approx.re)).collect();
        res.sort_by(f64::total_cmp);
        assert!((res[0] + 1.0).abs() < 1e-30);
        assert!((res[1] - 0.5).abs() < 1e-30);
        assert!((res[2] - 2.0).abs() < 1e-30);
        for r in &roots {
            assert!(bf_to_f64(&r.radius_up) < 1e-20);
        }
        assert_eq!(ceil_max_re(&roots), 2);
    }

    #[test]
    fn irrational_quadratic_falls_back() {
        // z^2 - 2: sqrt(2) irrational, numeric route with tight radii
        let roots =
            poly_roots(&[Scalar::from_int(-2), Scalar::zero(), Scalar::from_int(1)], 192).unwrap();
        let mut res: Vec<f64> = roots.iter().map(|r| bf_to_f64(&r.approx.re)).collect();
        res.sort_by(f64::total_cmp);
        assert!((res[1] - 2f64.sqrt()).abs() < 1e-30);
        assert!(roots.iter().all(|r| r.exact.is_none()));
        assert_eq!(ceil_max_re(&roots), 2); // ceil(sqrt 2) = 2
    }

    #[test]
    fn degenerate_leading_coefficient() {
        assert!(poly_roots(&[Scalar::from_int(1), Scalar::zero()], 64).is_err());
    }
}
