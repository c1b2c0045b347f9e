//! Eta quotients and theta-nullwerte.

use rug::{Integer, Rational};

use crate::arith::{lcm_u, sigma};
use crate::error::{Error, Result};
use crate::qseries::series::QSeries;

/// One factor `eta(s tau)^e` of an eta quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaFactor {
    pub scale: Rational,
    pub exponent: i64,
}

impl EtaFactor {
    pub fn new(scale: Rational, exponent: i64) -> Self {
        assert!(scale > 0, "eta scale must be positive");
        EtaFactor { scale, exponent }
    }

    pub fn int(scale: i64, exponent: i64) -> Self {
        Self::new(Rational::from(scale), exponent)
    }
}

/// Builds a factor list from `(scale, exponent)` pairs with integer scales.
pub fn eta_spec(pairs: &[(i64, i64)]) -> Vec<EtaFactor> {
    pairs.iter().map(|&(s, e)| EtaFactor::int(s, e)).collect()
}

/// Order of vanishing `sum e s / 24` at the infinite cusp.
pub fn eta_valuation(spec: &[EtaFactor]) -> Rational {
    spec.iter()
        .map(|f| Rational::from(&f.scale * f.exponent) / 24)
        .sum()
}

/// `prod_k eta(s_k tau)^(e_k)`, known for all exponents below `prec`.
///
/// The series lives on the lattice `lcm(24 * den(s_k))`. The product part is
/// computed with the integer recurrence `n f_n = sum_j g_j f_(n-j)` coming
/// from the logarithmic derivative.
pub fn eta_quotient(spec: &[EtaFactor], prec: &Rational) -> Result<QSeries> {
    let mut inner = 1u64;
    let mut lattice = 24u64;
    for f in spec {
        let d = f.scale.denom().to_u64().expect("scale denominator out of range");
        inner = lcm_u(inner, d);
        lattice = lcm_u(lattice, 24 * d);
    }
    let lead = eta_valuation(spec);
    if *prec <= lead {
        return Err(Error::EmptySeries);
    }
    let step = (lattice / inner) as i64;
    let lead_key = Rational::from(&lead * lattice).numer().to_i64().unwrap();
    let trunc_key = Rational::from(prec * lattice).ceil().numer().to_i64().unwrap();
    let n_terms = ((trunc_key - lead_key + step - 1) / step) as usize;

    // g_j for j in units of q^(1/inner)
    let mut g = vec![Integer::new(); n_terms];
    for f in spec {
        if f.exponent == 0 {
            continue;
        }
        let sl = Rational::from(&f.scale * inner);
        let sl = sl.numer().to_i64().unwrap() as usize;
        let mut n = 1usize;
        while sl * n < n_terms {
            g[sl * n] -= sigma(n as u64, 1) * (f.exponent * sl as i64);
            n += 1;
        }
    }
    let nz: Vec<(usize, &Integer)> =
        g.iter().enumerate().filter(|(_, c)| **c != 0).collect();
    let mut fs: Vec<Integer> = Vec::with_capacity(n_terms);
    fs.push(Integer::from(1));
    for n in 1..n_terms {
        let mut s = Integer::new();
        for &(j, gj) in &nz {
            if j > n {
                break;
            }
            s += gj * &fs[n - j];
        }
        s.div_exact_u_mut(n as u32);
        fs.push(s);
    }
    Ok(QSeries::from_keys(
        lattice,
        fs.into_iter()
            .enumerate()
            .map(|(n, c)| (lead_key + n as i64 * step, Rational::from(c))),
        Some(trunc_key),
    ))
}

/// `theta^0_(m,r) = sum_(s = r mod 2m) q^(s^2/4m)` for `m > 0`.
pub fn theta_nullwert(m: u64, r: i64, prec: &Rational) -> QSeries {
    assert!(m > 0, "theta-nullwert needs positive index");
    let lattice = 4 * m;
    let trunc = Rational::from(prec * lattice).ceil().numer().to_i64().unwrap();
    let two_m = 2 * m as i64;
    let r0 = r.rem_euclid(two_m);
    let bound = (trunc.max(0) as f64).sqrt() as i64 + 1;
    let terms = (-bound..=bound)
        .filter(|s| s.rem_euclid(two_m) == r0 && s * s < trunc)
        .map(|s| (s * s, Rational::from(1)));
    QSeries::from_keys(lattice, terms, Some(trunc.max(0)))
}

/// The weight-1/2 theta function `sum_(n in Z) q^(n^2)` on the integer lattice.
pub fn jacobi_theta(prec: i64) -> QSeries {
    theta_nullwert(1, 0, &Rational::from(prec)).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::{int, rat};

    fn ints(s: &QSeries, from: i64, to: i64) -> Vec<i64> {
        (from..to).map(|n| s.coeff_int(n).numer().to_i64().unwrap()).collect()
    }

    #[test]
    fn theta_as_eta_quotient() {
        let th = eta_quotient(&eta_spec(&[(2, 5), (1, -2), (4, -2)]), &int(30)).unwrap();
        assert_eq!(th, jacobi_theta(30));
        assert_eq!(ints(&th, 0, 10), vec![1, 2, 0, 0, 2, 0, 0, 0, 0, 2]);
    }

    #[test]
    fn weight_one_half_quotients() {
        let f = eta_quotient(&eta_spec(&[(1, 6), (4, 14), (2, -19)]), &int(6))
            .unwrap()
            .scale(&int(128));
        assert_eq!(ints(&f, 1, 6), vec![128, -768, 3584, -13312, 43008]);
        let g = eta_quotient(&eta_spec(&[(2, 23), (1, -8), (4, -14)]), &int(4)).unwrap();
        let want: Vec<(Rational, i64)> =
            vec![(rat(-3, 4), 1), (rat(1, 4), 8), (rat(5, 4), 21), (rat(9, 4), 8), (rat(13, 4), -42)];
        for (e, c) in want {
            assert_eq!(g.coeff(&e), c, "exponent {e}");
        }
    }

    #[test]
    fn pentagonal_numbers() {
        let eta = eta_quotient(&eta_spec(&[(1, 1)]), &(int(201) + rat(1, 24))).unwrap();
        let mut direct = vec![0i64; 201];
        direct[0] = 1;
        for n in 1..201 {
            for k in (n..201).rev() {
                direct[k] -= direct[k - n];
            }
        }
        for (n, &c) in direct.iter().enumerate() {
            assert_eq!(eta.coeff(&(rat(1, 24) + int(n as i64))), c, "n = {n}");
        }
    }

    #[test]
    fn fractional_scale() {
        let e = eta_quotient(&[EtaFactor::new(rat(1, 4), 1)], &int(2)).unwrap();
        assert_eq!(e.lattice(), 96);
        assert_eq!(e.coeff(&rat(1, 96)), 1);
        assert_eq!(e.coeff(&(rat(1, 96) + rat(1, 4))), -1);
        assert_eq!(e.coeff(&(rat(1, 96) + rat(1, 2))), -1);
        assert_eq!(e.coeff(&(rat(1, 96) + rat(5, 4))), 1);
    }

    #[test]
    fn empty_series_error() {
        assert!(matches!(eta_quotient(&eta_spec(&[(1, 24)]), &int(1)), Err(Error::EmptySeries)));
    }

    #[test]
    fn theta_nullwerte() {
        let t0 = theta_nullwert(1, 0, &int(10));
        assert_eq!(t0.coeff(&int(0)), 1);
        assert_eq!(t0.coeff(&int(1)), 2);
        assert_eq!(t0.coeff(&int(4)), 2);
        assert_eq!(t0.coeff(&int(9)), 2);
        let t1 = theta_nullwert(1, 1, &int(7));
        assert_eq!(t1, QSeries::from_terms([rat(1, 4), rat(9, 4), rat(25, 4)].map(|e| (e, int(2))), Some(int(7))));
        for m in 1..5u64 {
            for r in 0..(2 * m as i64) {
                assert_eq!(theta_nullwert(m, r, &int(12)), theta_nullwert(m, -r, &int(12)));
            }
        }
        assert_eq!(
            theta_nullwert(1, 1, &int(3)).rescale(&int(4)),
            QSeries::from_terms([(int(1), int(2)), (int(9), int(2))], Some(int(12)))
        );
    }
}
