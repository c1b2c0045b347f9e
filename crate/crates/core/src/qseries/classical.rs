//! Level one Eisenstein series, the discriminant, `j`, and level four hauptmoduln.

use rug::Rational;

use crate::arith::sigma;
use crate::qseries::eta::{eta_quotient, eta_spec};
use crate::qseries::series::QSeries;

/// `E_k = 1 + c sum sigma_(k-1)(n) q^n`, known below `q^prec`.
fn eisenstein(k: u32, c: i64, prec: i64) -> QSeries {
    let terms = std::iter::once((0, Rational::from(1)))
        .chain((1..prec.max(0)).map(|n| (n, Rational::from(sigma(n as u64, k - 1) * c))));
    QSeries::from_keys(1, terms, Some(prec))
}

pub fn eisenstein_e4(prec: i64) -> QSeries {
    eisenstein(4, 240, prec)
}

pub fn eisenstein_e6(prec: i64) -> QSeries {
    eisenstein(6, -504, prec)
}

/// `Delta = eta^24 = q - 24 q^2 + ...`.
pub fn delta(prec: i64) -> QSeries {
    eta_quotient(&eta_spec(&[(1, 24)]), &Rational::from(prec.max(2)))
        .expect("nonempty")
        .normalized()
        .truncate_int(prec)
}

/// `j = E4^3 / Delta`, known below `q^prec`.
pub fn klein_j(prec: i64) -> QSeries {
    let e4 = eisenstein_e4(prec + 1);
    let d = delta(prec + 2);
    let e43 = e4.mul(&e4).mul(&e4);
    e43.mul(&d.inv().expect("Delta is invertible")).truncate_int(prec)
}

/// `j = E6^2 / Delta + 1728`, an independent route to the same series.
pub fn klein_j_from_e6(prec: i64) -> QSeries {
    let e6 = eisenstein_e6(prec + 1);
    let d = delta(prec + 2);
    e6.mul(&e6)
        .mul(&d.inv().expect("Delta is invertible"))
        .add(&QSeries::constant(Rational::from(1728)))
        .truncate_int(prec)
}

/// `J = j - 744`.
pub fn capital_j(prec: i64) -> QSeries {
    klein_j(prec).sub(&QSeries::constant(Rational::from(744)))
}

/// `t_4 = eta(tau)^8 / eta(4 tau)^8 = q^-1 - 8 + 20 q - 62 q^3 + ...`.
pub fn hauptmodul_t4(prec: i64) -> QSeries {
    eta_quotient(&eta_spec(&[(1, 8), (4, -8)]), &Rational::from(prec))
        .expect("nonempty")
        .normalized()
}

/// `u = eta(tau)^8 eta(4 tau)^16 / eta(2 tau)^24 = q + ...`, equal to `1/(t_4 + 16)`.
pub fn level4_u(prec: i64) -> QSeries {
    eta_quotient(&eta_spec(&[(1, 8), (4, 16), (2, -24)]), &Rational::from(prec.max(2)))
        .expect("nonempty")
        .normalized()
        .truncate_int(prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::rational::int;

    #[test]
    fn j_expansion() {
        let j = klein_j(4);
        assert_eq!(j.truncation(), Some(int(4)));
        let want = [1i64, 744, 196884, 21493760, 864299970];
        for (i, &c) in want.iter().enumerate() {
            assert_eq!(j.coeff_int(i as i64 - 1), c);
        }
        assert_eq!(capital_j(4).coeff_int(0), 0);
    }

    #[test]
    fn two_formulas_for_j_agree() {
        let a = klein_j(30);
        assert_eq!(a, klein_j_from_e6(30));
        assert_eq!(a.coeff_int(4), rug::Integer::from(20245856256u64));
    }

    #[test]
    fn j_delta_is_e4_cubed() {
        let e4 = eisenstein_e4(25);
        let lhs = klein_j(25).mul(&delta(26));
        assert_eq!(lhs, e4.mul(&e4).mul(&e4).truncate_int(25));
    }

    #[test]
    fn hauptmodul_coefficients() {
        let t = hauptmodul_t4(5);
        assert_eq!(t.coeff_int(-1), 1);
        assert_eq!(t.coeff_int(0), -8);
        assert_eq!(t.coeff_int(1), 20);
        assert_eq!(t.coeff_int(2), 0);
        assert_eq!(t.coeff_int(3), -62);
    }

    #[test]
    fn u_inverts_shifted_hauptmodul() {
        let t = hauptmodul_t4(20).add(&QSeries::constant(int(16)));
        let prod = t.mul(&level4_u(21));
        assert_eq!(prod, QSeries::one().truncate_int(20));
    }
}
