use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use super::factor::factor_rational;
use super::poly::IntPoly;
use super::{rat, NumError, Rational};

/// Exact sign: -1, 0, or +1.
pub type Sign = i8;

pub(crate) fn sign_of(r: &Rational) -> Sign {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// A real algebraic number. Rational values are stored exactly; irrational
/// values are stored as (monic irreducible defining polynomial, isolating
/// interval with rational non-root endpoints, 1-based index among the real
/// roots of the defining polynomial in increasing order).
///
/// Because the defining polynomial is the canonical irreducible one, two
/// values are equal iff they share the defining polynomial and root index.
#[derive(Debug, Clone)]
pub struct RealAlg {
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Rat(Rational),
    Alg {
        defining: IntPoly,
        index: usize,
        lo: Rational,
        hi: Rational,
    },
}

impl RealAlg {
    pub fn from_rational(r: Rational) -> Self {
        RealAlg { repr: Repr::Rat(r) }
    }

    pub fn from_int(n: i64) -> Self {
        RealAlg::from_rational(super::rat_i64(n))
    }

    /// The unique root of `p` in the open interval `(lo, hi)`. The stored
    /// representation is canonicalized: the defining polynomial becomes the
    /// monic irreducible factor vanishing at the root, and the interval is
    /// replaced by that factor's own bisection-isolated interval.
    pub fn from_root(p: &IntPoly, lo: Rational, hi: Rational) -> Result<Self, NumError> {
        if p.is_zero() {
            return Err(NumError::ZeroPolynomial("root isolation"));
        }
        if lo >= hi {
            return Err(NumError::IntervalNotIsolating(format!(
                "empty interval ({lo}, {hi})"
            )));
        }
        let q = p.squarefree_part();
        if q.is_constant() {
            return Err(NumError::IntervalNotIsolating(
                "polynomial has no roots".into(),
            ));
        }
        if q.eval(&lo).is_zero() || q.eval(&hi).is_zero() {
            return Err(NumError::IntervalNotIsolating(format!(
                "an endpoint of ({lo}, {hi}) is a root"
            )));
        }
        let chain = SturmChain::new(&q);
        let n = chain.count_roots_in(&lo, &hi);
        if n != 1 {
            return Err(NumError::IntervalNotIsolating(format!(
                "interval ({lo}, {hi}) contains {n} roots, need exactly 1"
            )));
        }
        for (g, _) in factor_rational(&q) {
            if g.degree() == Some(1) {
                let r = -g.coeff(0);
                if lo < r && r < hi {
                    return Ok(RealAlg::from_rational(r));
                }
            } else if SturmChain::new(&g).count_roots_in(&lo, &hi) == 1 {
                let ivs = canonical_intervals(&g);
                let gchain = SturmChain::new(&g);
                let bound = g.cauchy_bound_pow2();
                let below = if lo <= -&bound {
                    0
                } else {
                    gchain.count_roots_in(&(-bound), &lo)
                };
                let (clo, chi) = ivs[below].clone();
                return Ok(RealAlg {
                    repr: Repr::Alg {
                        defining: g,
                        index: below + 1,
                        lo: clo,
                        hi: chi,
                    },
                });
            }
        }
        unreachable!("exactly one irreducible factor holds the isolated root")
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match &self.repr {
            Repr::Rat(r) => Some(r),
            Repr::Alg { .. } => None,
        }
    }

    /// Monic defining polynomial, irreducible over the rationals
    /// (`t - r` for a rational value `r`).
    pub fn defining(&self) -> IntPoly {
        match &self.repr {
            Repr::Rat(r) => IntPoly::linear_root(r),
            Repr::Alg { defining, .. } => defining.clone(),
        }
    }

    /// 1-based position among the real roots of the defining polynomial.
    pub fn root_index(&self) -> usize {
        match &self.repr {
            Repr::Rat(_) => 1,
            Repr::Alg { index, .. } => *index,
        }
    }

    /// An open interval with rational endpoints containing the value, with
    /// neither endpoint equal to it. Degenerate for rational values, where
    /// a closed singleton is returned.
    pub fn interval(&self) -> (Rational, Rational) {
        match &self.repr {
            Repr::Rat(r) => (r.clone(), r.clone()),
            Repr::Alg { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    /// Halves the isolating interval once (no-op for rational values).
    pub fn refine(&mut self) {
        if let Repr::Alg {
            defining, lo, hi, ..
        } = &mut self.repr
        {
            let mid = (&*lo + &*hi) * rat(1, 2);
            // irreducible of degree >= 2: no rational roots, mid is safe
            let s_lo = sign_of(&defining.eval(lo));
            let s_mid = sign_of(&defining.eval(&mid));
            if s_lo != s_mid {
                *hi = mid;
            } else {
                *lo = mid;
            }
        }
    }

    fn refined_until<F: Fn(&Rational, &Rational) -> bool>(&self, done: F) -> (Rational, Rational) {
        let mut work = self.clone();
        loop {
            let (lo, hi) = work.interval();
            if done(&lo, &hi) {
                return (lo, hi);
            }
            work.refine();
        }
    }

    /// A rational approximation within `eps` of the value.
    pub fn approximate(&self, eps: &Rational) -> Rational {
        let (lo, hi) = self.refined_until(|lo, hi| &(hi - lo) < eps);
        (lo + hi) * rat(1, 2)
    }
}

impl PartialEq for RealAlg {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RealAlg {}

impl PartialOrd for RealAlg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RealAlg {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => a.cmp(b),
            (Repr::Rat(r), Repr::Alg { .. }) => cmp_rational_to_alg(r, other),
            (Repr::Alg { .. }, Repr::Rat(r)) => cmp_rational_to_alg(r, self).reverse(),
            (
                Repr::Alg {
                    defining: f,
                    index: i,
                    ..
                },
                Repr::Alg {
                    defining: g,
                    index: j,
                    ..
                },
            ) => {
                if f == g {
                    return i.cmp(j);
                }
                // distinct irreducibles share no root, so the intervals
                // separate after finitely many refinements
                let mut a = self.clone();
                let mut b = other.clone();
                loop {
                    let (alo, ahi) = a.interval();
                    let (blo, bhi) = b.interval();
                    if ahi <= blo {
                        return Ordering::Less;
                    }
                    if bhi <= alo {
                        return Ordering::Greater;
                    }
                    a.refine();
                    b.refine();
                }
            }
        }
    }
}

fn cmp_rational_to_alg(r: &Rational, x: &RealAlg) -> Ordering {
    // x is irrational, so equality is impossible
    let (lo, hi) = x.refined_until(|lo, hi| r <= lo || r >= hi);
    if r <= &lo {
        Ordering::Less
    } else {
        debug_assert!(r >= &hi);
        Ordering::Greater
    }
}

impl fmt::Display for RealAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(r) => write!(f, "{r}"),
            Repr::Alg {
                defining, lo, hi, ..
            } => write!(f, "root({defining}, {lo}, {hi})"),
        }
    }
}

/// Sturm chain of a square-free polynomial.
struct SturmChain {
    chain: Vec<IntPoly>,
}

impl SturmChain {
    fn new(q: &IntPoly) -> Self {
        let mut chain = vec![q.clone(), q.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let (_, r) = chain[n - 2].divrem(&chain[n - 1]).unwrap();
            chain.push(-&r);
        }
        SturmChain { chain }
    }

    fn variations_at(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last: Sign = 0;
        for p in &self.chain {
            let s = sign_of(&p.eval(x));
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    fn variations_at_neg_inf(&self) -> usize {
        self.variations_limit(true)
    }

    fn variations_at_pos_inf(&self) -> usize {
        self.variations_limit(false)
    }

    fn variations_limit(&self, neg: bool) -> usize {
        let mut count = 0;
        let mut last: Sign = 0;
        for p in &self.chain {
            if p.is_zero() {
                continue;
            }
            let deg = p.degree().unwrap();
            let mut s = sign_of(&p.leading());
            if neg && deg % 2 == 1 {
                s = -s;
            }
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of roots in the open interval `(lo, hi)`; endpoints must not be
    /// roots.
    fn count_roots_in(&self, lo: &Rational, hi: &Rational) -> usize {
        debug_assert!(lo < hi);
        self.variations_at(lo) - self.variations_at(hi)
    }

    fn count_all_roots(&self) -> usize {
        self.variations_at_neg_inf() - self.variations_at_pos_inf()
    }
}

/// Isolating intervals for all real roots of an irreducible polynomial of
/// degree >= 2, in increasing order. Bisection from the symmetric power-of-two
/// bound; all endpoints are dyadic and never roots (no rational roots exist).
fn canonical_intervals(g: &IntPoly) -> Vec<(Rational, Rational)> {
    let chain = SturmChain::new(g);
    let b = g.cauchy_bound_pow2();
    let mut out = Vec::new();
    bisect(&chain, -&b, b, &mut out);
    out
}

fn bisect(
    chain: &SturmChain,
    lo: Rational,
    hi: Rational,
    out: &mut Vec<(Rational, Rational)>,
) {
    match chain.count_roots_in(&lo, &hi) {
        0 => {}
        1 => out.push((lo, hi)),
        _ => {
            let mid = (&lo + &hi) * rat(1, 2);
            bisect(chain, lo, mid.clone(), out);
            bisect(chain, mid, hi, out);
        }
    }
}

/// All distinct real roots of `p`, in increasing order, with pairwise
/// disjoint isolating intervals.
pub fn sturm_isolate(p: &IntPoly) -> Result<Vec<RealAlg>, NumError> {
    if p.is_zero() {
        return Err(NumError::ZeroPolynomial("root isolation"));
    }
    if p.is_constant() {
        return Ok(Vec::new());
    }
    let mut roots: Vec<RealAlg> = Vec::new();
    for (g, _) in factor_rational(p) {
        if g.degree() == Some(1) {
            roots.push(RealAlg::from_rational(-g.coeff(0)));
        } else {
            for (idx, (lo, hi)) in canonical_intervals(&g).into_iter().enumerate() {
                roots.push(RealAlg {
                    repr: Repr::Alg {
                        defining: g.clone(),
                        index: idx + 1,
                        lo,
                        hi,
                    },
                });
            }
        }
    }
    roots.sort();
    // separate neighbouring intervals coming from different factors
    for i in 1..roots.len() {
        let (left, right) = roots.split_at_mut(i);
        let a = left.last_mut().unwrap();
        let b = &mut right[0];
        loop {
            let (_, ahi) = a.interval();
            let (blo, _) = b.interval();
            if ahi <= blo {
                break;
            }
            a.refine();
            b.refine();
        }
    }
    Ok(roots)
}

/// Exact sign of `p` at the real algebraic point.
pub fn sign_at(p: &IntPoly, alpha: &RealAlg) -> Sign {
    if p.is_zero() {
        return 0;
    }
    match &alpha.repr {
        Repr::Rat(r) => sign_of(&p.eval(r)),
        Repr::Alg { defining, .. } => {
            let (_, rem) = p.divrem(defining).unwrap();
            if rem.is_zero() {
                return 0;
            }
            // rem(alpha) = p(alpha) != 0; refine until the interval is clear
            // of roots of rem, where its sign is constant
            let sf = rem.squarefree_part();
            let chain = SturmChain::new(&sf);
            let (lo, _) = alpha.refined_until(|lo, hi| {
                !sf.eval(lo).is_zero()
                    && !sf.eval(hi).is_zero()
                    && chain.count_roots_in(lo, hi) == 0
            });
            sign_of(&rem.eval(&lo))
        }
    }
}

/// A rational number strictly between `a` and `b`; requires `a < b`.
pub fn rational_between(a: &RealAlg, b: &RealAlg) -> Rational {
    assert!(a < b, "rational_between needs a < b");
    match (&a.repr, &b.repr) {
        (Repr::Rat(x), Repr::Rat(y)) => (x + y) * rat(1, 2),
        (Repr::Rat(x), Repr::Alg { .. }) => {
            let (blo, _) = b.refined_until(|lo, _| lo > x);
            (x + &blo) * rat(1, 2)
        }
        (Repr::Alg { .. }, Repr::Rat(y)) => {
            let (_, ahi) = a.refined_until(|_, hi| hi < y);
            (&ahi + y) * rat(1, 2)
        }
        (Repr::Alg { .. }, Repr::Alg { .. }) => {
            let mut wa = a.clone();
            let mut wb = b.clone();
            loop {
                let (_, ahi) = wa.interval();
                let (blo, _) = wb.interval();
                if ahi <= blo {
                    return (ahi + blo) * rat(1, 2);
                }
                wa.refine();
                wb.refine();
            }
        }
    }
}

/// Number of real roots of `p` (a plumbing hook for oracles in tests).
pub fn count_real_roots(p: &IntPoly) -> usize {
    if p.is_constant() {
        return 0;
    }
    SturmChain::new(&p.squarefree_part()).count_all_roots()
}
