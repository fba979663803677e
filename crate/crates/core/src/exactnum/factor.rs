use num_traits::{One, Signed, Zero};

use super::poly::IntPoly;
use super::{Int, Rational};

/// Irreducible monic factors of `p` over the rationals, with multiplicities,
/// sorted by degree and then coefficients. The product of the factors with
/// their multiplicities equals `p` up to a rational scalar.
///
/// Factoring runs square-free decomposition, rational-root extraction, and
/// interpolation splitting on what remains. Interpolation splitting is
/// exponential in the degree; inputs up to degree 12 stay comfortable, which
/// covers everything this crate produces.
pub fn factor_rational(p: &IntPoly) -> Vec<(IntPoly, usize)> {
    assert!(!p.is_zero(), "factor_rational needs a nonzero polynomial");
    let mut out: Vec<(IntPoly, usize)> = Vec::new();
    for (b, m) in p.squarefree_decomposition() {
        for g in split_squarefree(b) {
            out.push((g, m));
        }
    }
    out.sort_by(|(a, _), (b, _)| {
        a.degree()
            .cmp(&b.degree())
            .then_with(|| a.coeffs().cmp(b.coeffs()))
    });
    out
}

/// Whether `p` is irreducible over the rationals (up to a scalar).
pub fn is_irreducible(p: &IntPoly) -> bool {
    if p.is_zero() || p.is_constant() {
        return false;
    }
    let f = factor_rational(p);
    f.len() == 1 && f[0].1 == 1
}

/// Splits a monic square-free nonconstant polynomial into monic irreducible
/// factors (unsorted).
fn split_squarefree(b: IntPoly) -> Vec<IntPoly> {
    let mut out = Vec::new();
    let mut h = b;
    // rational roots give linear factors
    loop {
        if h.is_constant() {
            return out;
        }
        if h.degree() == Some(1) {
            out.push(h.monic());
            return out;
        }
        match find_rational_root(&h) {
            Some(r) => {
                let lin = IntPoly::linear_root(&r);
                h = h.div_exact(&lin);
                out.push(lin);
            }
            None => break,
        }
    }
    kronecker(&h, &mut out);
    out
}

fn find_rational_root(h: &IntPoly) -> Option<Rational> {
    if h.coeff(0).is_zero() {
        return Some(Rational::zero());
    }
    let ints = h.primitive_integer();
    let a0 = ints[0].abs();
    let an = ints.last().unwrap().abs();
    for num in divisors(&a0) {
        for den in divisors(&an) {
            for cand in [
                Rational::new(num.clone(), den.clone()),
                Rational::new(-num.clone(), den.clone()),
            ] {
                if h.eval(&cand).is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// Positive divisors of a positive integer, ascending; trial division.
fn divisors(n: &Int) -> Vec<Int> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = Int::one();
    while &i * &i <= *n {
        if (n % &i).is_zero() {
            small.push(i.clone());
            let j = n / &i;
            if j != i {
                large.push(j);
            }
        }
        i += Int::one();
    }
    large.reverse();
    small.extend(large);
    small
}

/// Factors a monic square-free polynomial with no rational roots by
/// interpolation: a proper factor of degree e is determined by its values at
/// e+1 integer points, and those values must divide the polynomial's values.
fn kronecker(h: &IntPoly, out: &mut Vec<IntPoly>) {
    let n = h.degree().unwrap();
    let hz = IntPoly::from_integer_coeffs(&h.primitive_integer());
    for e in 2..=n / 2 {
        let points = sample_points(e + 1);
        let values: Vec<Int> = points
            .iter()
            .map(|x| {
                let v = hz.eval(&Rational::from_integer(x.clone()));
                debug_assert!(v.denom().is_one());
                v.numer().clone()
            })
            .collect();
        let choices: Vec<Vec<Int>> = values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let pos = divisors(&v.abs());
                if i == 0 {
                    // a factor can be negated, so fix the first value positive
                    pos
                } else {
                    let mut both = Vec::with_capacity(pos.len() * 2);
                    for d in pos {
                        both.push(d.clone());
                        both.push(-d);
                    }
                    both
                }
            })
            .collect();
        let mut idx = vec![0usize; choices.len()];
        loop {
            let picked: Vec<Rational> = idx
                .iter()
                .zip(&choices)
                .map(|(&i, ds)| Rational::from_integer(ds[i].clone()))
                .collect();
            if let Some(f) = interpolate_integer(&points, &picked) {
                if f.degree().map_or(false, |d| d >= 1) && f.divides(&hz) {
                    let g = f.monic();
                    let rest = hz.div_exact(&f).monic();
                    kronecker(&g, out);
                    kronecker(&rest, out);
                    return;
                }
            }
            // odometer advance
            let mut k = 0;
            loop {
                if k == idx.len() {
                    break;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    out.push(h.monic());
}

/// 0, 1, -1, 2, -2, ...
fn sample_points(m: usize) -> Vec<Int> {
    (0..m as i64)
        .map(|k| {
            if k % 2 == 1 {
                Int::from((k + 1) / 2)
            } else {
                Int::from(-k / 2)
            }
        })
        .collect()
}

/// Lagrange interpolation; returns the polynomial only if all coefficients
/// are integers (a rational-coefficient candidate can never divide a
/// primitive integer polynomial).
fn interpolate_integer(points: &[Int], values: &[Rational]) -> Option<IntPoly> {
    let xs: Vec<Rational> = points
        .iter()
        .map(|x| Rational::from_integer(x.clone()))
        .collect();
    let mut f = IntPoly::zero();
    for (i, v) in values.iter().enumerate() {
        let mut basis = IntPoly::one();
        let mut denom = Rational::one();
        for (j, xj) in xs.iter().enumerate() {
            if j == i {
                continue;
            }
            basis = &basis * &IntPoly::linear_root(xj);
            denom *= &xs[i] - xj;
        }
        f = &f + &basis.scale(&(v / denom));
    }
    if f.coeffs().iter().all(|c| c.denom().is_one()) {
        Some(f)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::super::rat_i64;
    use super::*;

    fn p(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_coeffs(coeffs.iter().map(|&c| rat_i64(c)).collect())
    }

    #[test]
    fn splits_quadratic_with_rational_roots() {
        // t^2 - 1
        let f = factor_rational(&p(&[-1, 0, 1]));
        assert_eq!(f, vec![(p(&[-1, 1]), 1), (p(&[1, 1]), 1)]);
    }

    #[test]
    fn keeps_irreducible_quadratic_whole() {
        let f = factor_rational(&p(&[-2, 0, 1]));
        assert_eq!(f, vec![(p(&[-2, 0, 1]), 1)]);
    }

    #[test]
    fn tracks_multiplicity() {
        let q = &p(&[-1, 1]).pow(2) * &p(&[-2, 0, 1]);
        let f = factor_rational(&q);
        assert_eq!(f, vec![(p(&[-1, 1]), 2), (p(&[-2, 0, 1]), 1)]);
    }

    #[test]
    fn cubic_without_rational_roots_is_irreducible() {
        assert!(is_irreducible(&p(&[-2, 0, 0, 1])));
    }

    #[test]
    fn splits_product_of_irreducible_quadratics() {
        // (t^2 + 1)(t^2 - 2)
        let q = &p(&[1, 0, 1]) * &p(&[-2, 0, 1]);
        let f = factor_rational(&q);
        assert_eq!(f, vec![(p(&[-2, 0, 1]), 1), (p(&[1, 0, 1]), 1)]);
    }

    #[test]
    fn quartic_cyclotomic_is_irreducible() {
        assert!(is_irreducible(&p(&[1, 0, 0, 0, 1])));
    }

    #[test]
    fn sixth_roots_of_unity() {
        let f = factor_rational(&p(&[-1, 0, 0, 0, 0, 0, 1]));
        assert_eq!(
            f,
            vec![
                (p(&[-1, 1]), 1),
                (p(&[1, 1]), 1),
                (p(&[1, -1, 1]), 1),
                (p(&[1, 1, 1]), 1),
            ]
        );
    }

    #[test]
    fn scalar_and_denominators_are_ignored() {
        let q = p(&[-4, 0, 2]).scale(&super::super::rat(1, 3)); // (2t^2-4)/3
        let f = factor_rational(&q);
        assert_eq!(f, vec![(p(&[-2, 0, 1]), 1)]);
    }
}
