use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::{Int, NumError, Rational};

/// Univariate polynomial in `t` with rational coefficients, stored densely,
/// lowest degree first, with no trailing zeros. The zero polynomial is the
/// empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<Rational>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly::constant(Rational::one())
    }

    /// The variable `t`.
    pub fn var() -> Self {
        IntPoly {
            coeffs: vec![Rational::zero(), Rational::one()],
        }
    }

    pub fn constant(c: Rational) -> Self {
        IntPoly::from_coeffs(vec![c])
    }

    /// `t - r`.
    pub fn linear_root(r: &Rational) -> Self {
        IntPoly::from_coeffs(vec![-r.clone(), Rational::one()])
    }

    /// Builds from coefficients, lowest degree first; trailing zeros trimmed.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rational::from_integer(Int::from(k)))
            .collect();
        IntPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &Rational) -> IntPoly {
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn monic(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let lc = self.leading();
        self.scale(&lc.recip())
    }

    pub fn pow(&self, mut e: usize) -> IntPoly {
        let mut base = self.clone();
        let mut acc = IntPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Euclidean division: returns `(q, r)` with `self = q*d + r`,
    /// `deg r < deg d`.
    pub fn divrem(&self, d: &IntPoly) -> Result<(IntPoly, IntPoly), NumError> {
        if d.is_zero() {
            return Err(NumError::ZeroDenominator);
        }
        let dd = d.degree().unwrap();
        let lc = d.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let f = rem.last().unwrap() / &lc;
            if !f.is_zero() {
                for (i, c) in d.coeffs.iter().enumerate() {
                    let v = &rem[k + i] - c * &f;
                    rem[k + i] = v;
                }
            }
            quot[k] = f;
            rem.pop();
        }
        Ok((IntPoly::from_coeffs(quot), IntPoly::from_coeffs(rem)))
    }

    /// Exact division; panics if the remainder is nonzero (used only where
    /// divisibility is already established).
    pub fn div_exact(&self, d: &IntPoly) -> IntPoly {
        let (q, r) = self.divrem(d).expect("division by zero polynomial");
        assert!(r.is_zero(), "div_exact with nonzero remainder");
        q
    }

    pub fn divides(&self, other: &IntPoly) -> bool {
        match other.divrem(self) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => false,
        }
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b).unwrap();
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Square-free part `p / gcd(p, p')`, made monic.
    pub fn squarefree_part(&self) -> IntPoly {
        if self.is_zero() || self.is_constant() {
            return if self.is_zero() {
                IntPoly::zero()
            } else {
                IntPoly::one()
            };
        }
        let g = self.gcd(&self.derivative());
        self.div_exact(&g).monic()
    }

    /// Yun's square-free decomposition: returns `[(b_1, 1), (b_2, 2), ...]`
    /// with `p = lc * prod b_i^i`, each `b_i` monic square-free, pairwise
    /// coprime; factors with `b_i = 1` omitted.
    pub fn squarefree_decomposition(&self) -> Vec<(IntPoly, usize)> {
        assert!(!self.is_zero());
        let p = self.monic();
        if p.is_constant() {
            return Vec::new();
        }
        let dp = p.derivative();
        let mut out = Vec::new();
        let a0 = p.gcd(&dp);
        let mut b = p.div_exact(&a0);
        let mut c = dp.div_exact(&a0);
        let mut i = 1usize;
        loop {
            let d = &c - &b.derivative();
            if b.is_constant() {
                break;
            }
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.monic(), i));
            }
            b = b.div_exact(&a);
            c = d.div_exact(&a);
            i += 1;
        }
        out
    }

    /// Scales to an integer-coefficient polynomial with content 1 and positive
    /// leading coefficient; returns its integer coefficients (lowest first).
    pub fn primitive_integer(&self) -> Vec<Int> {
        if self.is_zero() {
            return Vec::new();
        }
        let mut denlcm = Int::one();
        for c in &self.coeffs {
            denlcm = num_integer::lcm(denlcm, c.denom().clone());
        }
        let mut ints: Vec<Int> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&denlcm / c.denom()))
            .collect();
        let mut content = Int::zero();
        for v in &ints {
            content = num_integer::gcd(content, v.clone());
        }
        if ints.last().map_or(false, |l| l.is_negative()) {
            content = -content;
        }
        for v in &mut ints {
            *v = &*v / &content;
        }
        ints
    }

    pub fn from_integer_coeffs(coeffs: &[Int]) -> IntPoly {
        IntPoly::from_coeffs(
            coeffs
                .iter()
                .map(|c| Rational::from_integer(c.clone()))
                .collect(),
        )
    }

    /// Substitutes a rational function for `t`; returns `(num, den)` before
    /// reduction, where `self(f) = num / den`.
    pub fn compose_ratfunc(&self, f: &RatFunc) -> (IntPoly, IntPoly) {
        let n = self.degree().unwrap_or(0);
        // self(p/q) * q^n = sum c_k p^k q^(n-k)
        let mut num = IntPoly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let term = f.num.pow(k) * f.den.pow(n - k);
            num = &num + &term.scale(c);
        }
        (num, f.den.pow(n))
    }

    /// Cauchy root bound rounded up to a power of two: all real roots lie in
    /// `(-B, B)`.
    pub fn cauchy_bound_pow2(&self) -> Rational {
        assert!(!self.is_zero());
        let lc = self.leading().abs();
        let mut m = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let v = c.abs() / &lc;
            if v > m {
                m = v;
            }
        }
        let bound = m + Rational::one();
        let mut b = Rational::one();
        let two = super::rat_i64(2);
        while b < bound {
            b *= &two;
        }
        b * two
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) + rhs.coeff(k));
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            coeffs.push(self.coeff(k) - rhs.coeff(k));
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                let v = &coeffs[i + j] + a * b;
                coeffs[i + j] = v;
            }
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl Mul for IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: IntPoly) -> IntPoly {
        (&self) * (&rhs)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (sign_str, mag) = if c.is_negative() {
                (if first { "-" } else { " - " }, -c)
            } else {
                (if first { "" } else { " + " }, c.clone())
            };
            write!(f, "{sign_str}")?;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            if k > 0 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if k == 1 {
                    write!(f, "t")?;
                } else {
                    write!(f, "t^{k}")?;
                }
            }
            first = false;
        }
        Ok(())
    }
}

/// Element of the rational function field: `num / den` with `den` monic and
/// `gcd(num, den) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: IntPoly,
    den: IntPoly,
}

impl RatFunc {
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self, NumError> {
        if den.is_zero() {
            return Err(NumError::ZeroDenominator);
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g), den.div_exact(&g))
        };
        let lc = den.leading();
        Ok(RatFunc {
            num: num.scale(&lc.recip()),
            den: den.monic(),
        })
    }

    pub fn from_poly(p: IntPoly) -> Self {
        RatFunc {
            num: p,
            den: IntPoly::one(),
        }
    }

    pub fn from_rational(c: Rational) -> Self {
        RatFunc::from_poly(IntPoly::constant(c))
    }

    pub fn var() -> Self {
        RatFunc::from_poly(IntPoly::var())
    }

    pub fn num(&self) -> &IntPoly {
        &self.num
    }

    pub fn den(&self) -> &IntPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn add(&self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .unwrap()
    }

    pub fn mul(&self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).unwrap()
    }

    pub fn recip(&self) -> Result<RatFunc, NumError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    /// Valuation at infinity: `deg den - deg num`. Positive means a zero at
    /// infinity. Panics on zero.
    pub fn inf_valuation(&self) -> i64 {
        self.den.degree().unwrap() as i64 - self.num.degree().expect("valuation of zero") as i64
    }

    /// Sign of the unit part at infinity: the sign of `lc(num)/lc(den)`.
    pub fn inf_unit_sign(&self) -> i8 {
        let s = self.num.leading() / self.den.leading();
        if s.is_negative() {
            -1
        } else {
            1
        }
    }

    /// Exact evaluation; `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// Substitution `t -> f(t)`.
    pub fn compose(&self, f: &RatFunc) -> Result<RatFunc, NumError> {
        let (nn, nd) = self.num.compose_ratfunc(f);
        let (dn, dd) = self.den.compose_ratfunc(f);
        // (nn/nd) / (dn/dd)
        RatFunc::new(&nn * &dd, &nd * &dn)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            return write!(f, "{}", self.num);
        }
        let num_simple = self.num.coeffs.iter().filter(|c| !c.is_zero()).count() <= 1;
        let den_simple = self.den.coeffs.iter().filter(|c| !c.is_zero()).count() <= 1;
        if num_simple {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        if den_simple && self.den.degree() == Some(0) {
            write!(f, " / {}", self.den)
        } else {
            write!(f, " / ({})", self.den)
        }
    }
}

impl IntPoly {
    fn is_one_poly(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, rat_i64};
    use super::*;

    fn p(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_coeffs(coeffs.iter().map(|&c| rat_i64(c)).collect())
    }

    #[test]
    fn divrem_reconstructs() {
        let a = p(&[1, 0, -3, 0, 1]); // t^4 - 3t^2 + 1
        let d = p(&[-1, 1]); // t - 1
        let (q, r) = a.divrem(&d).unwrap();
        assert_eq!(&(&q * &d) + &r, a);
        assert!(r.degree().unwrap_or(0) < 1 || r.is_zero());
    }

    #[test]
    fn gcd_of_multiples() {
        let g = p(&[-2, 0, 1]); // t^2 - 2
        let a = &g * &p(&[1, 1]);
        let b = &g * &p(&[3, 0, 0, 1]);
        assert_eq!(a.gcd(&b), g.monic());
    }

    #[test]
    fn squarefree_decomposition_of_cube() {
        let q = &p(&[-1, 1]).pow(3) * &p(&[2, 1]); // (t-1)^3 (t+2)
        let dec = q.squarefree_decomposition();
        assert_eq!(dec, vec![(p(&[2, 1]), 1), (p(&[-1, 1]), 3)]);
    }

    #[test]
    fn display_and_sign_conventions() {
        assert_eq!(p(&[-2, 0, 1]).to_string(), "t^2 - 2");
        assert_eq!(p(&[1, -1]).to_string(), "-t + 1");
        let half = IntPoly::from_coeffs(vec![rat(1, 2), rat_i64(2)]);
        assert_eq!(half.to_string(), "2*t + 1/2");
    }

    #[test]
    fn ratfunc_normalizes_monic_denominator() {
        let f = RatFunc::new(p(&[0, 2]), p(&[0, 0, 4])).unwrap(); // 2t / 4t^2
        assert_eq!(f.num(), &IntPoly::constant(rat(1, 2)));
        assert_eq!(f.den(), &IntPoly::var());
    }

    #[test]
    fn compose_substitutes() {
        // (t - 3) under t -> t^2 gives t^2 - 3
        let f = RatFunc::from_poly(p(&[-3, 1]));
        let sq = RatFunc::from_poly(p(&[0, 0, 1]));
        assert_eq!(f.compose(&sq).unwrap(), RatFunc::from_poly(p(&[-3, 0, 1])));
    }

    #[test]
    fn primitive_integer_scaling() {
        let q = IntPoly::from_coeffs(vec![rat(1, 2), rat(-3, 4)]); // -3/4 t + 1/2
        let ints = q.primitive_integer();
        // scaled by -4/1: 3t - 2
        assert_eq!(ints, vec![Int::from(-2), Int::from(3)]);
    }
}
