//! Sign sections on the real spectrum of R and R(t).
//!
//! A Witt class over R(t) restricts to a locally constant integer function on
//! the orderings of the field: a list of breakpoints (real algebraic numbers)
//! and one value per open interval between them. This module computes those
//! sections from diagonal forms, the twisted residue `beta` at a point, the
//! transfer back to R, and the assembled differential `d_re`, which is the
//! topological shadow of the second-residue differential.
//!
//! The uniformizer at infinity is fixed as 1/t with the germ convention that
//! the plus side of 1/t is the ordering at +infinity. Residue values at
//! infinity are reported raw in this chart; any comparison that needs the
//! global frame of the projective line applies its own sign there.

use std::fmt;

use thiserror::Error;

use crate::exactnum::{RealAlg, Sign};
use crate::quadform::{
    signature_at, ClosedPoint, DiagonalForm, FieldTag, FormError, TwistBasis,
};

pub use crate::quadform::Ordering;

/// Errors from section arithmetic.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SectionError {
    #[error("SupportTooSmall: breakpoint {0} is missing from the support")]
    SupportTooSmall(String),
    #[error("NotInIj: value {value} is not divisible by 2^{level}")]
    NotInIj { value: i64, level: usize },
    #[error("malformed section: {0}")]
    Malformed(String),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A locally constant integer function on the orderings of R(t) (or the
/// single ordering of R, stored as a section with no breakpoints).
///
/// Storage is non-reduced: adjacent values may coincide. Equality compares
/// canonical forms.
#[derive(Debug, Clone, Eq)]
pub struct SignSection {
    breakpoints: Vec<RealAlg>,
    values: Vec<i64>,
    twist: Option<TwistBasis>,
}

impl SignSection {
    pub fn new(
        breakpoints: Vec<RealAlg>,
        values: Vec<i64>,
        twist: Option<TwistBasis>,
    ) -> Result<Self, SectionError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(SectionError::Malformed(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SectionError::Malformed(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(SignSection {
            breakpoints,
            values,
            twist,
        })
    }

    pub fn constant(value: i64) -> Self {
        SignSection {
            breakpoints: Vec::new(),
            values: vec![value],
            twist: None,
        }
    }

    pub fn breakpoints(&self) -> &[RealAlg] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn twist(&self) -> Option<&TwistBasis> {
        self.twist.as_ref()
    }

    pub fn with_twist(mut self, twist: Option<TwistBasis>) -> Self {
        self.twist = twist;
        self
    }

    /// Merges intervals across breakpoints where the value does not jump.
    pub fn canonicalize(&self) -> Self {
        let mut bps = Vec::new();
        let mut vals = vec![self.values[0]];
        for (bp, pair) in self.breakpoints.iter().zip(self.values.windows(2)) {
            if pair[0] != pair[1] {
                bps.push(bp.clone());
                vals.push(pair[1]);
            }
        }
        SignSection {
            breakpoints: bps,
            values: vals,
            twist: self.twist.clone(),
        }
    }

    /// Value at an ordering, by local constancy.
    pub fn value_at(&self, p: &Ordering) -> i64 {
        match p {
            Ordering::Real | Ordering::MinusInfinity => self.values[0],
            Ordering::PlusInfinity => *self.values.last().unwrap(),
            Ordering::FinitePlus(a) => {
                let idx = self.breakpoints.iter().filter(|bp| *bp <= a).count();
                self.values[idx]
            }
            Ordering::FiniteMinus(a) => {
                let idx = self.breakpoints.iter().filter(|bp| *bp < a).count();
                self.values[idx]
            }
        }
    }

    /// Pointwise sum; twists must agree.
    pub fn add(&self, other: &SignSection) -> Result<SignSection, SectionError> {
        if self.twist != other.twist {
            return Err(SectionError::Form(FormError::TwistMismatch(
                "sum of sections with different twists".into(),
            )));
        }
        let mut bps: Vec<RealAlg> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .cloned()
            .collect();
        bps.sort();
        bps.dedup();
        let mut vals = Vec::with_capacity(bps.len() + 1);
        if bps.is_empty() {
            vals.push(self.values[0] + other.values[0]);
        } else {
            vals.push(
                self.value_at(&Ordering::FiniteMinus(bps[0].clone()))
                    + other.value_at(&Ordering::FiniteMinus(bps[0].clone())),
            );
            for bp in &bps {
                let p = Ordering::FinitePlus(bp.clone());
                vals.push(self.value_at(&p) + other.value_at(&p));
            }
        }
        Ok(SignSection {
            breakpoints: bps,
            values: vals,
            twist: self.twist.clone(),
        })
    }

    pub fn neg(&self) -> SignSection {
        SignSection {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            twist: self.twist.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0)
    }
}

impl PartialEq for SignSection {
    fn eq(&self, other: &Self) -> bool {
        let a = self.canonicalize();
        let b = other.canonicalize();
        a.breakpoints == b.breakpoints && a.values == b.values && a.twist == b.twist
    }
}

impl fmt::Display for SignSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "section{{ bps=[")?;
        for (i, bp) in self.breakpoints.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{bp}")?;
        }
        write!(f, "], vals=[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "] }}")?;
        if let Some(tw) = &self.twist {
            write!(f, "@twist({tw})")?;
        }
        Ok(())
    }
}

/// Value of a degree-one cochain at a single closed point: an integer at an
/// R-point (or infinity), a mod-2 class at a complex bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecValue {
    Int(i64),
    Mod2(u8),
}

impl SpecValue {
    pub fn is_zero(&self) -> bool {
        match self {
            SpecValue::Int(v) => *v == 0,
            SpecValue::Mod2(v) => *v == 0,
        }
    }
}

impl fmt::Display for SpecValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecValue::Int(v) => write!(f, "{v}"),
            SpecValue::Mod2(v) => write!(f, "{} mod 2", v % 2),
        }
    }
}

/// A value attached to a closed point, carrying the twist label of the dual
/// uniformizer there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointValue {
    pub point: ClosedPoint,
    pub value: SpecValue,
    pub twist: TwistBasis,
}

/// The sign section of a diagonal form: breakpoints are the real roots of
/// all entry numerators and denominators, interval values are exact
/// signature sums. `s` names the trivialization used for a twisted form and
/// must match the form's own twist label; untwisted forms take `None`.
///
/// A form over C has empty real spectrum; its section is the zero constant.
pub fn signature(f: &DiagonalForm, s: Option<&TwistBasis>) -> Result<SignSection, SectionError> {
    match (s, f.twist()) {
        (None, None) => {}
        (Some(a), Some(b)) if a == b => {}
        _ => {
            return Err(SectionError::Form(FormError::TwistMismatch(format!(
                "trivialization {:?} does not match the form twist {:?}",
                s.map(|t| t.0.clone()),
                f.twist().map(|t| t.0.clone())
            ))))
        }
    }
    match f.field() {
        FieldTag::ComplexField => Ok(SignSection::constant(0)),
        FieldTag::RealField => Ok(SignSection::constant(signature_at(f, &Ordering::Real)?)
            .with_twist(f.twist().cloned())),
        FieldTag::RatFuncReal => {
            let mut bps: Vec<RealAlg> = Vec::new();
            for x in crate::quadform::support(f) {
                if let ClosedPoint::Real(a) = x {
                    bps.push(a);
                }
            }
            bps.sort();
            bps.dedup();
            let mut vals = Vec::with_capacity(bps.len() + 1);
            if bps.is_empty() {
                vals.push(signature_at(f, &Ordering::PlusInfinity)?);
            } else {
                vals.push(signature_at(f, &Ordering::FiniteMinus(bps[0].clone()))?);
                for bp in &bps {
                    vals.push(signature_at(f, &Ordering::FinitePlus(bp.clone()))?);
                }
            }
            Ok(SignSection {
                breakpoints: bps,
                values: vals,
                twist: f.twist().cloned(),
            })
        }
    }
}

/// The twisted residue of a section at a real point: the jump
/// s(alpha+) - s(alpha-), tensored with the dual uniformizer basis.
pub fn beta(s: &SignSection, alpha: &RealAlg) -> PointValue {
    let jump = s.value_at(&Ordering::FinitePlus(alpha.clone()))
        - s.value_at(&Ordering::FiniteMinus(alpha.clone()));
    let point = ClosedPoint::Real(alpha.clone());
    let twist = point.uniformizer_dual();
    PointValue {
        point,
        value: SpecValue::Int(jump),
        twist,
    }
}

/// Transfer of a point value down to the real numbers: the identity over an
/// R-point, zero over a complex bucket (whose real spectrum is empty).
pub fn transfer_section(v: &PointValue) -> i64 {
    match (&v.point, &v.value) {
        (ClosedPoint::Complex(_), _) => 0,
        (_, SpecValue::Int(n)) => *n,
        (_, SpecValue::Mod2(_)) => 0,
    }
}

/// The differential on sign sections: beta-then-transfer at every real
/// support point, zero at complex buckets, and the raw 1/t-chart jump
/// s(+infinity) - s(-infinity) when the support includes infinity.
///
/// Every jump of the section must be covered by the support.
pub fn d_re(s: &SignSection, support: &[ClosedPoint]) -> Result<Vec<PointValue>, SectionError> {
    let canonical = s.canonicalize();
    for bp in canonical.breakpoints() {
        let covered = support
            .iter()
            .any(|x| matches!(x, ClosedPoint::Real(a) if a == bp));
        if !covered {
            return Err(SectionError::SupportTooSmall(bp.to_string()));
        }
    }
    let mut out = Vec::with_capacity(support.len());
    for x in support {
        let pv = match x {
            ClosedPoint::Real(alpha) => {
                let b = beta(s, alpha);
                PointValue {
                    point: x.clone(),
                    value: SpecValue::Int(transfer_section(&b)),
                    twist: b.twist,
                }
            }
            ClosedPoint::Complex(_) => PointValue {
                point: x.clone(),
                value: SpecValue::Mod2(0),
                twist: x.uniformizer_dual(),
            },
            ClosedPoint::Infinity => PointValue {
                point: x.clone(),
                value: SpecValue::Int(
                    s.value_at(&Ordering::PlusInfinity) - s.value_at(&Ordering::MinusInfinity),
                ),
                twist: x.uniformizer_dual(),
            },
        };
        out.push(pv);
    }
    Ok(out)
}

/// Exact division of all section values by 2^j; the structure map of the
/// compatible system behind the normalized sign data.
pub fn sign_infty_normalize(s: &SignSection, j: usize) -> Result<SignSection, SectionError> {
    let mut values = Vec::with_capacity(s.values.len());
    for v in &s.values {
        if v.rem_euclid(1 << j) != 0 {
            return Err(SectionError::NotInIj {
                value: *v,
                level: j,
            });
        }
        values.push(v >> j);
    }
    Ok(SignSection {
        breakpoints: s.breakpoints.clone(),
        values,
        twist: s.twist.clone(),
    })
}

/// Exact division of a point value by 2^j.
pub fn normalize_point_value(v: &SpecValue, j: usize) -> Result<SpecValue, SectionError> {
    match v {
        SpecValue::Int(n) => {
            if n.rem_euclid(1 << j) != 0 {
                return Err(SectionError::NotInIj {
                    value: *n,
                    level: j,
                });
            }
            Ok(SpecValue::Int(n >> j))
        }
        SpecValue::Mod2(p) => Ok(SpecValue::Mod2(*p)),
    }
}

/// Sign of a rational number, exposed for the oracles in tests.
pub fn sign_of_value(v: i64) -> Sign {
    match v.cmp(&0) {
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Greater => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat_i64, IntPoly, RatFunc};
    use crate::quadform::{second_residue, FieldElem};

    fn poly(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_coeffs(coeffs.iter().map(|&c| rat_i64(c)).collect())
    }

    fn fun(coeffs: &[i64]) -> FieldElem {
        FieldElem::Fun(RatFunc::from_poly(poly(coeffs)))
    }

    fn form(entries: Vec<FieldElem>) -> DiagonalForm {
        DiagonalForm::new(FieldTag::RatFuncReal, entries, None).unwrap()
    }

    fn sqrt2() -> RealAlg {
        RealAlg::from_root(&poly(&[-2, 0, 1]), rat_i64(1), rat_i64(2)).unwrap()
    }

    fn sqrt2_form() -> DiagonalForm {
        // <1, -(t^2 - 2)>
        form(vec![
            fun(&[1]),
            FieldElem::Fun(RatFunc::from_poly(-&poly(&[-2, 0, 1]))),
        ])
    }

    #[test]
    fn signature_of_constants() {
        let f = DiagonalForm::real(vec![rat_i64(1), rat_i64(1)]).unwrap();
        let s = signature(&f, None).unwrap();
        assert!(s.breakpoints().is_empty());
        assert_eq!(s.values(), &[2]);
    }

    #[test]
    fn signature_of_t() {
        let s = signature(&form(vec![fun(&[0, 1])]), None).unwrap();
        assert_eq!(s.breakpoints(), &[RealAlg::from_int(0)]);
        assert_eq!(s.values(), &[-1, 1]);
    }

    #[test]
    fn signature_with_irrational_breakpoints() {
        let s = signature(&sqrt2_form(), None).unwrap();
        assert_eq!(s.values(), &[0, 2, 0]);
        assert_eq!(s.breakpoints().len(), 2);
        assert_eq!(s.breakpoints()[1], sqrt2());
    }

    #[test]
    fn beta_reads_jumps() {
        let s = signature(&form(vec![fun(&[0, 1])]), None).unwrap();
        let b = beta(&s, &RealAlg::from_int(0));
        assert_eq!(b.value, SpecValue::Int(2));
        assert_eq!(b.twist, TwistBasis::new("(t)^*"));
        // away from the breakpoint the jump vanishes
        assert_eq!(beta(&s, &RealAlg::from_int(5)).value, SpecValue::Int(0));
        // constant sections jump nowhere
        let c = SignSection::constant(7);
        assert_eq!(beta(&c, &RealAlg::from_int(0)).value, SpecValue::Int(0));
        // the sqrt2 example: values (0, 2, 0) jump -2 at sqrt2
        let s2 = signature(&sqrt2_form(), None).unwrap();
        assert_eq!(beta(&s2, &sqrt2()).value, SpecValue::Int(-2));
    }

    #[test]
    fn residue_square_smoke() {
        // 2 * sig(second_residue(f, a)) = beta(signature(f), a)
        for f in [
            form(vec![fun(&[0, 1])]),
            sqrt2_form(),
            form(vec![fun(&[1]), fun(&[0, -1, 1])]),
            form(vec![fun(&[0, 1]), fun(&[0, 1]), fun(&[-1, 1])]),
        ] {
            let s = signature(&f, None).unwrap();
            for x in crate::quadform::support(&f) {
                if let ClosedPoint::Real(alpha) = x {
                    let lhs = 2 * second_residue(&f, &ClosedPoint::Real(alpha.clone()))
                        .unwrap()
                        .signature()
                        .unwrap();
                    let rhs = beta(&s, &alpha);
                    assert_eq!(SpecValue::Int(lhs), rhs.value, "form {f} at {alpha}");
                    assert_eq!(rhs.twist, ClosedPoint::Real(alpha).uniformizer_dual());
                }
            }
        }
    }

    #[test]
    fn d_re_of_t_with_infinity() {
        let s = signature(&form(vec![fun(&[0, 1])]), None).unwrap();
        let support = vec![
            ClosedPoint::rational(rat_i64(0)),
            ClosedPoint::Infinity,
        ];
        let out = d_re(&s, &support).unwrap();
        assert_eq!(out[0].value, SpecValue::Int(2));
        assert_eq!(out[0].twist, TwistBasis::new("(t)^*"));
        // raw 1/t-chart value: s(+inf) - s(-inf) = 1 - (-1)
        assert_eq!(out[1].value, SpecValue::Int(2));
        assert_eq!(out[1].twist, TwistBasis::new("(1/t)^*"));
    }

    #[test]
    fn d_re_requires_support() {
        let s = signature(&form(vec![fun(&[0, 1])]), None).unwrap();
        assert!(matches!(
            d_re(&s, &[]),
            Err(SectionError::SupportTooSmall(_))
        ));
        // a canonically silent breakpoint is not required
        let silent = SignSection::new(
            vec![RealAlg::from_int(0)],
            vec![3, 3],
            None,
        )
        .unwrap();
        assert!(d_re(&silent, &[]).unwrap().is_empty());
    }

    #[test]
    fn d_re_is_zero_on_complex_buckets() {
        let f = form(vec![fun(&[1, 0, 1])]);
        let s = signature(&f, None).unwrap();
        let bucket = ClosedPoint::complex(poly(&[1, 0, 1])).unwrap();
        let out = d_re(&s, &[bucket]).unwrap();
        assert_eq!(out[0].value, SpecValue::Mod2(0));
    }

    #[test]
    fn normalization_divides_exactly() {
        let s = signature(&form(vec![fun(&[1]), fun(&[0, 1])]), None).unwrap();
        assert_eq!(s.values(), &[0, 2]);
        let n = sign_infty_normalize(&s, 1).unwrap();
        assert_eq!(n.values(), &[0, 1]);
        assert!(matches!(
            sign_infty_normalize(&n, 1),
            Err(SectionError::NotInIj { value: 1, level: 1 })
        ));
        assert_eq!(
            sign_infty_normalize(&SignSection::constant(0), 3)
                .unwrap()
                .values(),
            &[0]
        );
    }

    #[test]
    fn sections_compare_canonically() {
        let a = SignSection::new(vec![RealAlg::from_int(1)], vec![2, 2], None).unwrap();
        let b = SignSection::constant(2);
        assert_eq!(a, b);
        let c = SignSection::new(vec![RealAlg::from_int(1)], vec![2, 4], None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn section_sum_is_pointwise() {
        let s = signature(&form(vec![fun(&[0, 1])]), None).unwrap(); // sign(t)
        let u = signature(&form(vec![fun(&[-1, 1])]), None).unwrap(); // sign(t-1)
        let sum = s.add(&u).unwrap();
        assert_eq!(sum.values(), &[-2, 0, 2]);
        assert!(s.add(&s.neg()).unwrap().is_zero());
    }

    #[test]
    fn transfer_kills_complex_points() {
        let bucket = ClosedPoint::complex(poly(&[1, 0, 1])).unwrap();
        let v = PointValue {
            twist: bucket.uniformizer_dual(),
            point: bucket,
            value: SpecValue::Mod2(1),
        };
        assert_eq!(transfer_section(&v), 0);
        let w = PointValue {
            point: ClosedPoint::rational(rat_i64(0)),
            value: SpecValue::Int(3),
            twist: TwistBasis::new("(t)^*"),
        };
        assert_eq!(transfer_section(&w), 3);
    }

    #[test]
    fn section_display_reads_back() {
        let s = signature(&form(vec![fun(&[0, 1])]), None).unwrap();
        assert_eq!(s.to_string(), "section{ bps=[0], vals=[-1, 1] }");
    }
}
