//! Diagonal quadratic forms and Witt-group arithmetic over R, C, and R(t).
//!
//! A form is a list of nonzero diagonal entries plus an optional symbolic
//! twist label. Witt classes over R(t) are represented by their complete
//! invariant: the Milnor second residue at every closed point of the affine
//! line together with one reference signature at the ordering +infinity.
//! Membership in powers of the fundamental ideal is decided constructively;
//! a positive answer always comes with a certificate that expands back to
//! the input, and a negative answer carries a concrete witness.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exactnum::{
    rational_between, sign_at, sturm_isolate,IntPoly, RatFunc, Rational, RealAlg, Sign,
};

/// The three coefficient fields in play.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    RealField,
    ComplexField,
    RatFuncReal,
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::RealField => write!(f, "R"),
            FieldTag::ComplexField => write!(f, "C"),
            FieldTag::RatFuncReal => write!(f, "R(t)"),
        }
    }
}

/// A nonzero element of one of the three fields. Scalar entries serve both R
/// and C; rational functions serve R(t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldElem {
    Num(Rational),
    Fun(RatFunc),
}

impl FieldElem {
    pub fn num_i64(n: i64) -> Self {
        FieldElem::Num(Rational::from_integer(n.into()))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Num(r) => r.is_zero(),
            FieldElem::Fun(f) => f.is_zero(),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            FieldElem::Num(r) => FieldElem::Num(-r),
            FieldElem::Fun(f) => FieldElem::Fun(f.neg()),
        }
    }

    pub fn mul(&self, other: &FieldElem) -> Self {
        match (self, other) {
            (FieldElem::Num(a), FieldElem::Num(b)) => FieldElem::Num(a * b),
            (a, b) => FieldElem::Fun(a.as_fun().mul(&b.as_fun())),
        }
    }

    /// View as a rational function (constants are promoted).
    pub fn as_fun(&self) -> RatFunc {
        match self {
            FieldElem::Num(r) => RatFunc::from_rational(r.clone()),
            FieldElem::Fun(f) => f.clone(),
        }
    }

    fn matches_field(&self, field: FieldTag) -> bool {
        match (self, field) {
            (FieldElem::Num(_), FieldTag::RealField | FieldTag::ComplexField) => true,
            (FieldElem::Fun(_), FieldTag::RatFuncReal) => true,
            _ => false,
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Num(r) => write!(f, "{r}"),
            FieldElem::Fun(g) => write!(f, "{g}"),
        }
    }
}

/// Symbolic name of a basis of a one-dimensional twisting space, e.g.
/// `(t)^*`, `(t^2 + 1)^*`, `(1/t)^*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwistBasis(pub String);

impl TwistBasis {
    pub fn new(name: impl Into<String>) -> Self {
        TwistBasis(name.into())
    }
}

impl fmt::Display for TwistBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Errors from form arithmetic.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("FieldMismatch: {0}")]
    FieldMismatch(String),
    #[error("TwistMismatch: {0}")]
    TwistMismatch(String),
    #[error("DoubleTwist: both tensor operands carry a twist")]
    DoubleTwist,
    #[error("EmptySpectrum: the complex numbers admit no ordering")]
    EmptySpectrum,
    #[error("zero entry in a diagonal form")]
    ZeroEntry,
    #[error("MalformedPoint: {0}")]
    MalformedPoint(String),
}

/// A diagonal quadratic form with an optional twist label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalForm {
    field: FieldTag,
    entries: Vec<FieldElem>,
    twist: Option<TwistBasis>,
}

impl DiagonalForm {
    pub fn new(
        field: FieldTag,
        entries: Vec<FieldElem>,
        twist: Option<TwistBasis>,
    ) -> Result<Self, FormError> {
        for e in &entries {
            if e.is_zero() {
                return Err(FormError::ZeroEntry);
            }
            if !e.matches_field(field) {
                return Err(FormError::FieldMismatch(format!(
                    "entry {e} does not live in {field}"
                )));
            }
        }
        Ok(DiagonalForm {
            field,
            entries,
            twist,
        })
    }

    pub fn empty(field: FieldTag) -> Self {
        DiagonalForm {
            field,
            entries: Vec::new(),
            twist: None,
        }
    }

    pub fn real(entries: Vec<Rational>) -> Result<Self, FormError> {
        DiagonalForm::new(
            FieldTag::RealField,
            entries.into_iter().map(FieldElem::Num).collect(),
            None,
        )
    }

    pub fn ratfunc(entries: Vec<RatFunc>) -> Result<Self, FormError> {
        DiagonalForm::new(
            FieldTag::RatFuncReal,
            entries.into_iter().map(FieldElem::Fun).collect(),
            None,
        )
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn entries(&self) -> &[FieldElem] {
        &self.entries
    }

    pub fn twist(&self) -> Option<&TwistBasis> {
        self.twist.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn with_twist(mut self, twist: Option<TwistBasis>) -> Self {
        self.twist = twist;
        self
    }

    /// The form with all entries negated (represents the Witt inverse).
    pub fn neg(&self) -> Self {
        DiagonalForm {
            field: self.field,
            entries: self.entries.iter().map(FieldElem::neg).collect(),
            twist: self.twist.clone(),
        }
    }
}

impl fmt::Display for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ">")?;
        if let Some(tw) = &self.twist {
            write!(f, "@twist({tw})")?;
        }
        Ok(())
    }
}

/// A closed point of the affine line over R (or the point at infinity on the
/// projective line). Complex points are bucketed by their Q-irreducible
/// defining polynomial, which must be free of real roots; conjugate pairs
/// inside a factor with real roots carry no independent residue data for
/// forms with rational-function entries, so no bucket is stored for those.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedPoint {
    Real(RealAlg),
    Complex(IntPoly),
    Infinity,
}

impl ClosedPoint {
    pub fn real(alpha: RealAlg) -> Self {
        ClosedPoint::Real(alpha)
    }

    pub fn rational(r: Rational) -> Self {
        ClosedPoint::Real(RealAlg::from_rational(r))
    }

    /// Complex bucket of a Q-irreducible polynomial without real roots.
    pub fn complex(factor: IntPoly) -> Result<Self, FormError> {
        let factor = factor.monic();
        if factor.degree().unwrap_or(0) < 2 {
            return Err(FormError::MalformedPoint(format!(
                "complex bucket needs degree >= 2, got {factor}"
            )));
        }
        if !crate::exactnum::is_irreducible(&factor) {
            return Err(FormError::MalformedPoint(format!(
                "complex bucket {factor} is not irreducible"
            )));
        }
        if crate::exactnum::count_real_roots(&factor) != 0 {
            return Err(FormError::MalformedPoint(format!(
                "complex bucket {factor} has real roots"
            )));
        }
        Ok(ClosedPoint::Complex(factor))
    }

    /// The name of the dual basis of m/m^2 given by the canonical
    /// uniformizer at this point.
    pub fn uniformizer_dual(&self) -> TwistBasis {
        match self {
            ClosedPoint::Real(alpha) => match alpha.as_rational() {
                Some(r) if r.is_zero() => TwistBasis::new("(t)^*"),
                Some(r) if r > &Rational::zero() => TwistBasis::new(format!("(t-{r})^*")),
                Some(r) => TwistBasis::new(format!("(t+{})^*", -r)),
                None => TwistBasis::new(format!("(t-{alpha})^*")),
            },
            ClosedPoint::Complex(factor) => TwistBasis::new(format!("({factor})^*")),
            ClosedPoint::Infinity => TwistBasis::new("(1/t)^*"),
        }
    }

    /// Residue field of the point.
    pub fn residue_field(&self) -> FieldTag {
        match self {
            ClosedPoint::Real(_) | ClosedPoint::Infinity => FieldTag::RealField,
            ClosedPoint::Complex(_) => FieldTag::ComplexField,
        }
    }
}

impl fmt::Display for ClosedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedPoint::Real(a) => write!(f, "{a}"),
            ClosedPoint::Complex(p) => write!(f, "{p}"),
            ClosedPoint::Infinity => write!(f, "infinity"),
        }
    }
}

impl PartialOrd for ClosedPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ClosedPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering as O;
        match (self, other) {
            (ClosedPoint::Real(a), ClosedPoint::Real(b)) => a.cmp(b),
            (ClosedPoint::Real(_), _) => O::Less,
            (_, ClosedPoint::Real(_)) => O::Greater,
            (ClosedPoint::Complex(p), ClosedPoint::Complex(q)) => p
                .degree()
                .cmp(&q.degree())
                .then_with(|| p.coeffs().cmp(q.coeffs())),
            (ClosedPoint::Complex(_), _) => O::Less,
            (_, ClosedPoint::Complex(_)) => O::Greater,
            (ClosedPoint::Infinity, ClosedPoint::Infinity) => O::Equal,
        }
    }
}

/// An ordering (point of the real spectrum) of R or R(t). Orderings of R(t)
/// are the two germs at each real algebraic number plus the two ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ordering {
    Real,
    FinitePlus(RealAlg),
    FiniteMinus(RealAlg),
    PlusInfinity,
    MinusInfinity,
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ordering::Real => write!(f, "R"),
            Ordering::FinitePlus(a) => write!(f, "{a}+"),
            Ordering::FiniteMinus(a) => write!(f, "{a}-"),
            Ordering::PlusInfinity => write!(f, "+infinity"),
            Ordering::MinusInfinity => write!(f, "-infinity"),
        }
    }
}

/// Canonical invariant data of a Witt class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittClass {
    pub field: FieldTag,
    pub twist: Option<TwistBasis>,
    pub data: WittData,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WittData {
    /// W(R) = Z via the signature.
    Sig(i64),
    /// W(C) = Z/2 via the rank.
    RankParity(u8),
    /// W(R(t)): nonzero second residues at closed points plus the signature
    /// at the ordering +infinity.
    Fun {
        residues: BTreeMap<ClosedPoint, WittClass>,
        ref_sig: i64,
    },
}

impl WittClass {
    pub fn zero(field: FieldTag) -> Self {
        let data = match field {
            FieldTag::RealField => WittData::Sig(0),
            FieldTag::ComplexField => WittData::RankParity(0),
            FieldTag::RatFuncReal => WittData::Fun {
                residues: BTreeMap::new(),
                ref_sig: 0,
            },
        };
        WittClass {
            field,
            twist: None,
            data,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            WittData::Sig(s) => *s == 0,
            WittData::RankParity(p) => *p == 0,
            WittData::Fun { residues, ref_sig } => residues.is_empty() && *ref_sig == 0,
        }
    }

    /// Signature for classes over R.
    pub fn signature(&self) -> Option<i64> {
        match &self.data {
            WittData::Sig(s) => Some(*s),
            _ => None,
        }
    }

    pub fn rank_parity(&self) -> Option<u8> {
        match &self.data {
            WittData::RankParity(p) => Some(*p),
            _ => None,
        }
    }
}

/// Orthogonal sum.
pub fn dsum(f: &DiagonalForm, g: &DiagonalForm) -> Result<DiagonalForm, FormError> {
    if f.field != g.field {
        return Err(FormError::FieldMismatch(format!(
            "dsum over {} and {}",
            f.field, g.field
        )));
    }
    if f.twist != g.twist {
        return Err(FormError::TwistMismatch(
            "dsum operands carry different twists".into(),
        ));
    }
    let mut entries = f.entries.clone();
    entries.extend(g.entries.iter().cloned());
    Ok(DiagonalForm {
        field: f.field,
        entries,
        twist: f.twist.clone(),
    })
}

/// Tensor product; at most one operand may be twisted.
pub fn tensor(f: &DiagonalForm, g: &DiagonalForm) -> Result<DiagonalForm, FormError> {
    if f.field != g.field {
        return Err(FormError::FieldMismatch(format!(
            "tensor over {} and {}",
            f.field, g.field
        )));
    }
    if f.twist.is_some() && g.twist.is_some() {
        return Err(FormError::DoubleTwist);
    }
    let mut entries = Vec::with_capacity(f.entries.len() * g.entries.len());
    for a in &f.entries {
        for b in &g.entries {
            entries.push(a.mul(b));
        }
    }
    Ok(DiagonalForm {
        field: f.field,
        entries,
        twist: f.twist.clone().or_else(|| g.twist.clone()),
    })
}

/// The binary Pfister form <<a>> = <1, -a>.
pub fn pfister(field: FieldTag, a: FieldElem) -> Result<DiagonalForm, FormError> {
    if a.is_zero() {
        return Err(FormError::ZeroEntry);
    }
    let one = match field {
        FieldTag::RatFuncReal => FieldElem::Fun(RatFunc::from_rational(Rational::from_integer(
            1.into(),
        ))),
        _ => FieldElem::num_i64(1),
    };
    DiagonalForm::new(field, vec![one, a.neg()], None)
}

fn pow_sign(s: Sign, k: i64) -> Sign {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        s
    }
}

/// Order of vanishing of `a` at the irreducible `pi`, together with the
/// unit part `a / pi^k`.
fn ord_and_unit(a: &RatFunc, pi: &IntPoly) -> (i64, RatFunc) {
    fn strip(mut p: IntPoly, pi: &IntPoly) -> (i64, IntPoly) {
        let mut k = 0;
        loop {
            let (q, r) = p.divrem(pi).unwrap();
            if r.is_zero() {
                k += 1;
                p = q;
            } else {
                return (k, p);
            }
        }
    }
    let (kn, num) = strip(a.num().clone(), pi);
    let (kd, den) = strip(a.den().clone(), pi);
    (kn - kd, RatFunc::new(num, den).unwrap())
}

/// Sign of a rational function at a finite one-sided ordering. `plus` picks
/// the germ to the right of `alpha`.
fn sign_one_sided(e: &RatFunc, alpha: &RealAlg, plus: bool) -> Sign {
    let pi = alpha.defining();
    let (k, w) = ord_and_unit(e, &pi);
    let sw = sign_at(w.num(), alpha) * sign_at(w.den(), alpha);
    debug_assert!(sw != 0);
    let spi = pow_sign(sign_at(&pi.derivative(), alpha), k);
    let right = sw * spi;
    if plus {
        right
    } else {
        right * pow_sign(-1, k)
    }
}

fn sign_at_ordering(e: &RatFunc, p: &Ordering) -> Sign {
    match p {
        Ordering::Real => unreachable!("scalar entries are signed directly"),
        Ordering::FinitePlus(a) => sign_one_sided(e, a, true),
        Ordering::FiniteMinus(a) => sign_one_sided(e, a, false),
        Ordering::PlusInfinity => e.inf_unit_sign(),
        Ordering::MinusInfinity => e.inf_unit_sign() * pow_sign(-1, e.inf_valuation()),
    }
}

/// Signature of a form at an ordering of its base field. Twists are labels
/// only and do not enter here.
pub fn signature_at(f: &DiagonalForm, p: &Ordering) -> Result<i64, FormError> {
    match f.field {
        FieldTag::ComplexField => Err(FormError::EmptySpectrum),
        FieldTag::RealField => {
            if *p != Ordering::Real {
                return Err(FormError::FieldMismatch(
                    "ordering of R(t) applied to a form over R".into(),
                ));
            }
            let mut s = 0i64;
            for e in &f.entries {
                if let FieldElem::Num(r) = e {
                    s += if r.is_positive() { 1 } else { -1 };
                }
            }
            Ok(s)
        }
        FieldTag::RatFuncReal => {
            if *p == Ordering::Real {
                return Err(FormError::FieldMismatch(
                    "the unique ordering of R applied to a form over R(t)".into(),
                ));
            }
            let mut s = 0i64;
            for e in &f.entries {
                s += sign_at_ordering(&e.as_fun(), p) as i64;
            }
            Ok(s)
        }
    }
}

/// Milnor's second residue of a form over R(t) at a closed point, twisted by
/// the dual of the canonical uniformizer. Entries a = pi^k * u with odd k
/// contribute <u(x)>; even valuations contribute nothing.
pub fn second_residue(f: &DiagonalForm, x: &ClosedPoint) -> Result<WittClass, FormError> {
    if f.field != FieldTag::RatFuncReal {
        return Err(FormError::FieldMismatch(
            "second residue needs a form over R(t)".into(),
        ));
    }
    let twist = Some(x.uniformizer_dual());
    match x {
        ClosedPoint::Real(alpha) => {
            let pi = alpha.defining();
            let dpi = pi.derivative();
            let spi = sign_at(&dpi, alpha);
            let mut sig = 0i64;
            for e in &f.entries {
                let (k, w) = ord_and_unit(&e.as_fun(), &pi);
                if k.rem_euclid(2) == 1 {
                    let sw = sign_at(w.num(), alpha) * sign_at(w.den(), alpha);
                    sig += (sw * spi) as i64;
                }
            }
            Ok(WittClass {
                field: FieldTag::RealField,
                twist,
                data: WittData::Sig(sig),
            })
        }
        ClosedPoint::Complex(pi) => {
            let mut parity = 0u8;
            for e in &f.entries {
                let (k, _) = ord_and_unit(&e.as_fun(), pi);
                if k.rem_euclid(2) == 1 {
                    parity ^= 1;
                }
            }
            Ok(WittClass {
                field: FieldTag::ComplexField,
                twist,
                data: WittData::RankParity(parity),
            })
        }
        ClosedPoint::Infinity => {
            let mut sig = 0i64;
            for e in &f.entries {
                let fun = e.as_fun();
                if fun.inf_valuation().rem_euclid(2) == 1 {
                    sig += fun.inf_unit_sign() as i64;
                }
            }
            Ok(WittClass {
                field: FieldTag::RealField,
                twist,
                data: WittData::Sig(sig),
            })
        }
    }
}

/// Twisted transfer to W(R): identity on classes over an R-point, zero on
/// classes over a C-point (the transfer of <1> is hyperbolic).
pub fn transfer_point(c: &WittClass, x: &ClosedPoint) -> Result<WittClass, FormError> {
    if c.field != x.residue_field() {
        return Err(FormError::FieldMismatch(format!(
            "class over {} at a point with residue field {}",
            c.field,
            x.residue_field()
        )));
    }
    let sig = match &c.data {
        WittData::Sig(s) => *s,
        WittData::RankParity(_) => 0,
        WittData::Fun { .. } => {
            return Err(FormError::FieldMismatch(
                "transfer expects a class over a residue field".into(),
            ))
        }
    };
    Ok(WittClass {
        field: FieldTag::RealField,
        twist: None,
        data: WittData::Sig(sig),
    })
}

/// All closed points at which some entry of `f` could ramify: the real roots
/// of every numerator and denominator, plus one complex bucket per
/// Q-irreducible factor without real roots.
pub fn support(f: &DiagonalForm) -> Vec<ClosedPoint> {
    let mut set: std::collections::BTreeSet<ClosedPoint> = std::collections::BTreeSet::new();
    for e in &f.entries {
        let fun = e.as_fun();
        for part in [fun.num(), fun.den()] {
            if part.is_constant() {
                continue;
            }
            for (factor, _) in crate::exactnum::factor_rational(part) {
                if factor.degree() == Some(0) {
                    continue;
                }
                let real_roots = sturm_isolate(&factor).unwrap();
                if real_roots.is_empty() {
                    set.insert(ClosedPoint::Complex(factor));
                } else {
                    for r in real_roots {
                        set.insert(ClosedPoint::Real(r));
                    }
                }
            }
        }
    }
    set.into_iter().collect()
}

/// Complete invariant of the Witt class of `f`.
pub fn witt_class_of(f: &DiagonalForm) -> Result<WittClass, FormError> {
    let data = match f.field {
        FieldTag::RealField => WittData::Sig(signature_at(f, &Ordering::Real)?),
        FieldTag::ComplexField => WittData::RankParity((f.rank() % 2) as u8),
        FieldTag::RatFuncReal => {
            let mut residues = BTreeMap::new();
            for x in support(f) {
                let r = second_residue(f, &x)?;
                if !r.is_zero() {
                    residues.insert(x, r);
                }
            }
            WittData::Fun {
                residues,
                ref_sig: signature_at(f, &Ordering::PlusInfinity)?,
            }
        }
    };
    Ok(WittClass {
        field: f.field,
        twist: f.twist.clone(),
        data,
    })
}

/// Whether two forms define the same Witt class. Over R(t) this holds iff the
/// difference has zero second residue at every closed point in its support
/// and zero signature at the ordering +infinity.
pub fn witt_equal(f: &DiagonalForm, g: &DiagonalForm) -> Result<bool, FormError> {
    if f.field != g.field {
        return Err(FormError::FieldMismatch(format!(
            "witt_equal over {} and {}",
            f.field, g.field
        )));
    }
    if f.twist != g.twist {
        return Err(FormError::TwistMismatch(
            "witt_equal operands carry different twists".into(),
        ));
    }
    let diff = dsum(f, &g.neg().with_twist(f.twist.clone()))?;
    Ok(witt_class_of(&diff)?.is_zero())
}

/// One term u * <<a_1>> x ... x <<a_j>> of a fundamental-ideal certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertTerm {
    pub unit: FieldElem,
    pub slots: Vec<FieldElem>,
}

/// Certificate that a form lies in the j-th power of the fundamental ideal:
/// a formal sum of scaled j-fold Pfister forms whose expansion is Witt
/// equivalent to the form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IPowerCertificate {
    pub level: usize,
    pub terms: Vec<CertTerm>,
}

/// Concrete witness refuting membership in I^j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IPowerWitness {
    /// Forms of odd rank are not even in I^1.
    OddRank { rank: usize },
    /// A signature not divisible by 2^j at the named ordering.
    SignatureNotDivisible { ordering: Ordering, value: i64 },
    /// A nonzero residue at a complex bucket; those residues must vanish in
    /// I^(j-1)(C) = 0 once j >= 2.
    ComplexResidue { factor: IntPoly },
}

impl fmt::Display for IPowerWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IPowerWitness::OddRank { rank } => write!(f, "odd rank {rank}"),
            IPowerWitness::SignatureNotDivisible { ordering, value } => {
                write!(f, "signature {value} at {ordering} not divisible")
            }
            IPowerWitness::ComplexResidue { factor } => {
                write!(f, "nonzero residue at the complex bucket {factor}")
            }
        }
    }
}

/// Outcome of the I^j membership decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IPowerOutcome {
    Member(IPowerCertificate),
    Refused(IPowerWitness),
    /// Reserved for inputs the procedure cannot decide; the current decision
    /// procedure always reaches a verdict, so this is never produced.
    Unknown,
}

/// Expands a certificate into a concrete diagonal form over `field`.
pub fn expand_certificate(cert: &IPowerCertificate, field: FieldTag) -> DiagonalForm {
    let mut acc = DiagonalForm::empty(field);
    for term in &cert.terms {
        let mut block = DiagonalForm::new(field, vec![term.unit.clone()], None)
            .expect("certificate units are nonzero");
        for a in &term.slots {
            let p = pfister(field, a.clone()).expect("certificate slots are nonzero");
            block = tensor(&block, &p).expect("certificate blocks share the field");
        }
        acc = dsum(&acc, &block).expect("certificate blocks share the field");
    }
    acc
}

fn const_elem(field: FieldTag, n: i64) -> FieldElem {
    match field {
        FieldTag::RatFuncReal => FieldElem::Fun(RatFunc::from_rational(Rational::from_integer(
            n.into(),
        ))),
        _ => FieldElem::num_i64(n),
    }
}

fn residue_sig(f: &DiagonalForm, alpha: &RealAlg) -> i64 {
    second_residue(f, &ClosedPoint::Real(alpha.clone()))
        .expect("form over R(t)")
        .signature()
        .unwrap()
}

/// Builds a polynomial with prescribed signs at the real roots of `pi`:
/// positive at root `l`, negative at every other root.
pub(crate) fn selector_poly(roots: &[RealAlg], l: usize) -> IntPoly {
    if roots.len() == 1 {
        return IntPoly::one();
    }
    let mut q = IntPoly::one();
    let mut flips = 0;
    if l > 0 {
        let c = rational_between(&roots[l - 1], &roots[l]);
        q = &q * &IntPoly::linear_root(&c);
        flips += 1;
    }
    if l + 1 < roots.len() {
        let c = rational_between(&roots[l], &roots[l + 1]);
        q = &q * &IntPoly::linear_root(&c);
    }
    // make the value at root l positive: on (c_lo, c_hi) the product of the
    // linear factors has sign (-1)^(number of factors to its right)
    let sign_at_l = if l + 1 < roots.len() { -1 } else { 1 };
    let q = if flips == 1 && l + 1 == roots.len() {
        q // (t - c_lo): positive to the right, root l is rightmost
    } else if sign_at_l < 0 {
        -&q
    } else {
        q
    };
    debug_assert!(roots
        .iter()
        .enumerate()
        .all(|(k, r)| { sign_at(&q, r) == if k == l { 1 } else { -1 } }));
    q
}

/// Decides membership of `f` in I^j. Positive answers come with a
/// certificate expanding to `f`; negative answers carry a witness. The twist
/// label of `f` is ignored: membership concerns the underlying form.
#[allow(non_snake_case)]
pub fn in_I_power(f: &DiagonalForm, j: usize) -> IPowerOutcome {
    let field = f.field;
    if j == 0 {
        // I^0 = W: each entry is its own 0-fold Pfister block
        let terms = f
            .entries
            .iter()
            .map(|e| CertTerm {
                unit: e.clone(),
                slots: Vec::new(),
            })
            .collect();
        return IPowerOutcome::Member(IPowerCertificate { level: 0, terms });
    }
    if f.rank() % 2 == 1 {
        return IPowerOutcome::Refused(IPowerWitness::OddRank { rank: f.rank() });
    }
    match field {
        FieldTag::ComplexField => {
            // W(C) = Z/2 by rank: even rank is already the zero class
            IPowerOutcome::Member(IPowerCertificate {
                level: j,
                terms: Vec::new(),
            })
        }
        FieldTag::RealField => {
            let sig = signature_at(f, &Ordering::Real).unwrap();
            if sig.rem_euclid(1 << j) != 0 {
                return IPowerOutcome::Refused(IPowerWitness::SignatureNotDivisible {
                    ordering: Ordering::Real,
                    value: sig,
                });
            }
            let m = sig >> j;
            let term = |u: i64| CertTerm {
                unit: const_elem(field, u),
                slots: vec![const_elem(field, -1); j],
            };
            let terms = (0..m.unsigned_abs()).map(|_| term(m.signum())).collect();
            let cert = IPowerCertificate { level: j, terms };
            debug_assert!(
                witt_equal(&expand_certificate(&cert, field), &f.clone().with_twist(None))
                    .unwrap()
            );
            IPowerOutcome::Member(cert)
        }
        FieldTag::RatFuncReal => in_I_power_ratfunc(f, j),
    }
}

#[allow(non_snake_case)]
fn in_I_power_ratfunc(f: &DiagonalForm, j: usize) -> IPowerOutcome {
    let field = FieldTag::RatFuncReal;
    let plain = f.clone().with_twist(None);
    if j == 1 {
        // I^1 is exactly the even-rank classes: pair up the entries,
        // <a, b> = a<1, ab> = a<<-ab>>
        let terms = plain
            .entries()
            .chunks(2)
            .map(|pair| CertTerm {
                unit: pair[0].clone(),
                slots: vec![pair[0].mul(&pair[1]).neg()],
            })
            .collect();
        let cert = IPowerCertificate { level: 1, terms };
        debug_assert!(witt_equal(&expand_certificate(&cert, field), &plain).unwrap());
        return IPowerOutcome::Member(cert);
    }

    // residue conditions at the support of f
    let pts = support(&plain);
    let step = 1i64 << (j - 1);
    for x in &pts {
        match x {
            ClosedPoint::Complex(pi) => {
                let r = second_residue(&plain, x).unwrap();
                if !r.is_zero() {
                    return IPowerOutcome::Refused(IPowerWitness::ComplexResidue {
                        factor: pi.clone(),
                    });
                }
            }
            ClosedPoint::Real(alpha) => {
                let s = residue_sig(&plain, alpha);
                if s.rem_euclid(step) != 0 {
                    // the jump at alpha is 2s, so one side has a signature
                    // not divisible by 2^j
                    let plus = signature_at(&plain, &Ordering::FinitePlus(alpha.clone()))
                        .unwrap();
                    let witness = if plus.rem_euclid(1 << j) != 0 {
                        IPowerWitness::SignatureNotDivisible {
                            ordering: Ordering::FinitePlus(alpha.clone()),
                            value: plus,
                        }
                    } else {
                        let minus = signature_at(&plain, &Ordering::FiniteMinus(alpha.clone()))
                            .unwrap();
                        debug_assert!(minus.rem_euclid(1 << j) != 0);
                        IPowerWitness::SignatureNotDivisible {
                            ordering: Ordering::FiniteMinus(alpha.clone()),
                            value: minus,
                        }
                    };
                    return IPowerOutcome::Refused(witness);
                }
            }
            ClosedPoint::Infinity => unreachable!("support contains finite points only"),
        }
    }

    // constructive pass: clear residues at irrational conjugate families
    // first (their selector blocks spill only onto fresh rational points),
    // then at rational points, then match the constant remainder
    let mut g = plain.clone();
    let mut terms: Vec<CertTerm> = Vec::new();
    let push_block = |g: &mut DiagonalForm, terms: &mut Vec<CertTerm>, count: i64, term: CertTerm| {
        let block = expand_certificate(
            &IPowerCertificate {
                level: j,
                terms: vec![term.clone()],
            },
            field,
        );
        for _ in 0..count {
            *g = dsum(g, &block.neg()).unwrap();
            terms.push(term.clone());
        }
    };

    let mut defining_polys: Vec<IntPoly> = Vec::new();
    for x in &pts {
        if let ClosedPoint::Real(alpha) = x {
            if alpha.as_rational().is_none() {
                let pi = alpha.defining();
                if !defining_polys.contains(&pi) {
                    defining_polys.push(pi);
                }
            }
        }
    }
    for pi in defining_polys {
        let roots = sturm_isolate(&pi).unwrap();
        for (l, alpha) in roots.iter().enumerate() {
            let s = residue_sig(&g, alpha);
            if s == 0 {
                continue;
            }
            debug_assert_eq!(s.rem_euclid(step), 0);
            let m = s / step;
            // u * <<-1>>^(j-2) x <<-q>> x <<-pi>> has residue
            // u * 2^(j-1) * sign(pi'(alpha_k)) * [q(alpha_k) > 0] at alpha_k
            let q = selector_poly(&roots, l);
            let u = m.signum() * (sign_at(&pi.derivative(), alpha) as i64);
            let mut slots = vec![const_elem(field, -1); j - 2];
            slots.push(FieldElem::Fun(RatFunc::from_poly(-&q)));
            slots.push(FieldElem::Fun(RatFunc::from_poly(-&pi)));
            push_block(
                &mut g,
                &mut terms,
                m.abs(),
                CertTerm {
                    unit: const_elem(field, u),
                    slots,
                },
            );
            debug_assert_eq!(residue_sig(&g, alpha), 0);
        }
    }

    // rational points: original support plus selector spill
    for x in support(&g) {
        if let ClosedPoint::Real(alpha) = x {
            let Some(c) = alpha.as_rational().cloned() else {
                debug_assert_eq!(residue_sig(&g, &alpha), 0);
                continue;
            };
            let s = residue_sig(&g, &alpha);
            if s == 0 {
                continue;
            }
            debug_assert_eq!(s.rem_euclid(step), 0);
            let m = s / step;
            // u * <<-1>>^(j-1) x <<-(t - c)>> has residue u * 2^(j-1) at c
            let mut slots = vec![const_elem(field, -1); j - 1];
            slots.push(FieldElem::Fun(RatFunc::from_poly(IntPoly::linear_root(&c)).neg()));
            push_block(
                &mut g,
                &mut terms,
                m.abs(),
                CertTerm {
                    unit: const_elem(field, m.signum()),
                    slots,
                },
            );
            debug_assert_eq!(residue_sig(&g, &alpha), 0);
        }
    }

    // the remainder is residue-free, hence a constant class; its signature
    // must be divisible by 2^j
    let s_inf = signature_at(&g, &Ordering::PlusInfinity).unwrap();
    if s_inf.rem_euclid(1 << j) != 0 {
        return IPowerOutcome::Refused(IPowerWitness::SignatureNotDivisible {
            ordering: Ordering::PlusInfinity,
            value: signature_at(&plain, &Ordering::PlusInfinity).unwrap(),
        });
    }
    let m = s_inf >> j;
    if m != 0 {
        push_block(
            &mut g,
            &mut terms,
            m.abs(),
            CertTerm {
                unit: const_elem(field, m.signum()),
                slots: vec![const_elem(field, -1); j],
            },
        );
    }

    let cert = IPowerCertificate { level: j, terms };
    debug_assert!(witt_equal(&expand_certificate(&cert, field), &plain).unwrap());
    IPowerOutcome::Member(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat_i64;

    fn poly(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_coeffs(coeffs.iter().map(|&c| rat_i64(c)).collect())
    }

    fn fun(coeffs: &[i64]) -> FieldElem {
        FieldElem::Fun(RatFunc::from_poly(poly(coeffs)))
    }

    fn form(entries: Vec<FieldElem>) -> DiagonalForm {
        DiagonalForm::new(FieldTag::RatFuncReal, entries, None).unwrap()
    }

    fn rform(entries: &[i64]) -> DiagonalForm {
        DiagonalForm::real(entries.iter().map(|&n| rat_i64(n)).collect()).unwrap()
    }

    fn origin() -> ClosedPoint {
        ClosedPoint::rational(rat_i64(0))
    }

    fn sqrt2() -> RealAlg {
        RealAlg::from_root(&poly(&[-2, 0, 1]), rat_i64(1), rat_i64(2)).unwrap()
    }

    #[test]
    fn dsum_concatenates_and_checks() {
        let f = rform(&[1]);
        let g = rform(&[-1]);
        assert_eq!(dsum(&f, &g).unwrap(), rform(&[1, -1]));
        let h = form(vec![fun(&[0, 1])]);
        assert!(matches!(dsum(&f, &h), Err(FormError::FieldMismatch(_))));
        let empty = DiagonalForm::empty(FieldTag::RealField);
        assert_eq!(dsum(&empty, &f).unwrap(), f);
    }

    #[test]
    fn tensor_multiplies_pairwise() {
        let f = rform(&[1, 1]);
        let g = rform(&[3]);
        assert_eq!(tensor(&f, &g).unwrap(), rform(&[3, 3]));
        let t1 = rform(&[1]).with_twist(Some(TwistBasis::new("(t)^*")));
        let t2 = rform(&[1]).with_twist(Some(TwistBasis::new("(1/t)^*")));
        assert!(matches!(tensor(&t1, &t2), Err(FormError::DoubleTwist)));
        // hyperbolic absorbs
        let hyp = tensor(&rform(&[1, -1]), &rform(&[5, 7])).unwrap();
        assert!(witt_equal(&hyp, &DiagonalForm::empty(FieldTag::RealField)).unwrap());
    }

    #[test]
    fn pfister_convention() {
        let p = pfister(FieldTag::RealField, FieldElem::num_i64(-1)).unwrap();
        assert_eq!(p, rform(&[1, 1]));
        assert_eq!(signature_at(&p, &Ordering::Real).unwrap(), 2);
        let q = pfister(FieldTag::RealField, FieldElem::num_i64(1)).unwrap();
        assert!(witt_equal(&q, &DiagonalForm::empty(FieldTag::RealField)).unwrap());
    }

    #[test]
    fn signature_at_orderings() {
        // <1, -(t^2 - 2)>
        let g = form(vec![
            fun(&[1]),
            FieldElem::Fun(RatFunc::from_poly(-&poly(&[-2, 0, 1]))),
        ]);
        assert_eq!(
            signature_at(&g, &Ordering::FinitePlus(RealAlg::from_int(0))).unwrap(),
            2
        );
        assert_eq!(signature_at(&g, &Ordering::PlusInfinity).unwrap(), 0);
        assert_eq!(signature_at(&g, &Ordering::MinusInfinity).unwrap(), 0);
        let t = form(vec![fun(&[0, 1])]);
        assert_eq!(signature_at(&t, &Ordering::MinusInfinity).unwrap(), -1);
        assert_eq!(signature_at(&t, &Ordering::PlusInfinity).unwrap(), 1);
    }

    #[test]
    fn second_residue_examples() {
        // <t> at 0 -> <1> (x) (t)^*
        let t = form(vec![fun(&[0, 1])]);
        let r = second_residue(&t, &origin()).unwrap();
        assert_eq!(r.signature(), Some(1));
        assert_eq!(r.twist, Some(TwistBasis::new("(t)^*")));
        // <1> at 0 -> 0
        let one = form(vec![fun(&[1])]);
        assert!(second_residue(&one, &origin()).unwrap().is_zero());
        // <1, t(t-1)> at 0 -> <-1> (x) (t)^*
        let f = form(vec![fun(&[1]), fun(&[0, -1, 1])]);
        assert_eq!(second_residue(&f, &origin()).unwrap().signature(), Some(-1));
        // <t^2+1> at the complex bucket t^2+1 -> nonzero in W(C)
        let c = form(vec![fun(&[1, 0, 1])]);
        let bucket = ClosedPoint::complex(poly(&[1, 0, 1])).unwrap();
        assert_eq!(second_residue(&c, &bucket).unwrap().rank_parity(), Some(1));
    }

    #[test]
    fn residue_at_irrational_point() {
        // <1, -(t^2-2)> at sqrt2: unit -(t^2-2)/(t-sqrt2) evaluates with
        // sign -1 * sign(2t) = -1
        let g = form(vec![fun(&[1]), FieldElem::Fun(RatFunc::from_poly(-&poly(&[-2, 0, 1])))]);
        let r = second_residue(&g, &ClosedPoint::Real(sqrt2())).unwrap();
        assert_eq!(r.signature(), Some(-1));
    }

    #[test]
    fn residue_at_infinity() {
        let t = form(vec![fun(&[0, 1])]);
        let r = second_residue(&t, &ClosedPoint::Infinity).unwrap();
        // t = (1/t)^(-1), odd valuation, unit sign +
        assert_eq!(r.signature(), Some(1));
        assert_eq!(r.twist, Some(TwistBasis::new("(1/t)^*")));
    }

    #[test]
    fn residues_annihilate_unramified_sums() {
        let f = form(vec![fun(&[0, 1]), fun(&[3, 1]), fun(&[1, 0, 1])]);
        let diff = dsum(&f, &f.neg()).unwrap();
        for x in support(&diff) {
            assert!(second_residue(&diff, &x).unwrap().is_zero());
        }
    }

    #[test]
    fn uniformizer_independence_up_to_unit_sign() {
        // at a rational point the alternative unit part is itself a rational
        // function, so the residue with uniformizer u*(t-1) can be computed
        // from scratch and compared against the canonical one
        let one = RealAlg::from_int(1);
        let a = RatFunc::from_poly(&poly(&[-1, 1]) * &poly(&[5, 1])); // (t-1)(t+5)
        let f = form(vec![FieldElem::Fun(a.clone())]);
        let base = second_residue(&f, &ClosedPoint::Real(one.clone()))
            .unwrap()
            .signature()
            .unwrap();
        for u in [poly(&[3, 1]), -&poly(&[3, 1]), poly(&[1, 0, 2])] {
            // w = a / (u * (t-1)), evaluated exactly at 1
            let w = a
                .mul(&RatFunc::new(IntPoly::one(), &u * &poly(&[-1, 1])).unwrap());
            let sw = sign_at(w.num(), &one) * sign_at(w.den(), &one);
            assert_eq!(sw as i64, base * sign_at(&u, &one) as i64);
        }
    }

    #[test]
    fn witt_equal_examples() {
        let empty = DiagonalForm::empty(FieldTag::RatFuncReal);
        let hyp = form(vec![fun(&[1]), fun(&[-1])]);
        assert!(witt_equal(&hyp, &empty).unwrap());
        let a = form(vec![fun(&[0, 1]), fun(&[0, 0, 0, 1])]);
        let b = form(vec![fun(&[0, 1]), fun(&[0, 1])]);
        assert!(witt_equal(&a, &b).unwrap());
        let c = form(vec![fun(&[1]), fun(&[0, 1])]);
        let d = form(vec![fun(&[0, 1]), fun(&[1])]);
        assert!(witt_equal(&c, &d).unwrap());
        let e = form(vec![fun(&[1]), fun(&[0, -1])]);
        assert!(!witt_equal(&c, &e).unwrap());
    }

    #[test]
    fn witt_class_separates_by_complex_bucket() {
        let f = form(vec![fun(&[1, 0, 1])]); // <t^2+1>
        let g = form(vec![fun(&[1])]); // <1>
        assert!(!witt_equal(&f, &g).unwrap());
    }

    #[test]
    fn in_i_power_scalar_cases() {
        let two = rform(&[1, 1]);
        match in_I_power(&two, 1) {
            IPowerOutcome::Member(cert) => {
                assert_eq!(cert.terms.len(), 1);
                let exp = expand_certificate(&cert, FieldTag::RealField);
                assert!(witt_equal(&exp, &two).unwrap());
            }
            other => panic!("expected membership, got {other:?}"),
        }
        match in_I_power(&rform(&[1]), 1) {
            IPowerOutcome::Refused(IPowerWitness::OddRank { rank }) => assert_eq!(rank, 1),
            other => panic!("expected odd-rank refusal, got {other:?}"),
        }
        match in_I_power(&two, 2) {
            IPowerOutcome::Refused(IPowerWitness::SignatureNotDivisible { value, .. }) => {
                assert_eq!(value, 2)
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn in_i_power_pairs_ratfunc_level_one() {
        let f = form(vec![fun(&[1]), fun(&[0, 1])]); // <1, t>
        match in_I_power(&f, 1) {
            IPowerOutcome::Member(cert) => {
                assert_eq!(cert.terms.len(), 1);
                // <1, t> = <<-t>>
                let exp = expand_certificate(&cert, FieldTag::RatFuncReal);
                assert!(witt_equal(&exp, &f).unwrap());
            }
            other => panic!("expected membership, got {other:?}"),
        }
    }

    #[test]
    fn in_i_power_level_two_with_conjugates() {
        // <<-1>> x <<t^2 - 2>> lies in I^2
        let pf = tensor(
            &pfister(FieldTag::RatFuncReal, const_elem(FieldTag::RatFuncReal, -1)).unwrap(),
            &pfister(
                FieldTag::RatFuncReal,
                FieldElem::Fun(RatFunc::from_poly(poly(&[-2, 0, 1]))),
            )
            .unwrap(),
        )
        .unwrap();
        match in_I_power(&pf, 2) {
            IPowerOutcome::Member(cert) => {
                let exp = expand_certificate(&cert, FieldTag::RatFuncReal);
                assert!(witt_equal(&exp, &pf).unwrap());
            }
            other => panic!("expected membership, got {other:?}"),
        }
        // <1, -(t^2-2), 1, -1> has residue -1 at sqrt2: refused with a
        // one-sided witness
        let bad = form(vec![
            fun(&[1]),
            FieldElem::Fun(RatFunc::from_poly(-&poly(&[-2, 0, 1]))),
            fun(&[1]),
            fun(&[-1]),
        ]);
        // the support is scanned in increasing order, so the witness sits at
        // -sqrt2, where the right-hand germ has signature 2, not 0 mod 4
        let neg_sqrt2 =
            RealAlg::from_root(&poly(&[-2, 0, 1]), rat_i64(-2), rat_i64(-1)).unwrap();
        match in_I_power(&bad, 2) {
            IPowerOutcome::Refused(IPowerWitness::SignatureNotDivisible {
                ordering,
                value,
            }) => {
                assert_eq!(ordering, Ordering::FinitePlus(neg_sqrt2));
                assert_eq!(value, 2);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn in_i_power_complex_obstruction() {
        // even rank, but residue at t^2+1 is nonzero: not in I^2
        let f = form(vec![fun(&[1, 0, 1]), fun(&[1])]);
        match in_I_power(&f, 2) {
            IPowerOutcome::Refused(IPowerWitness::ComplexResidue { factor }) => {
                assert_eq!(factor, poly(&[1, 0, 1]));
            }
            other => panic!("expected complex refusal, got {other:?}"),
        }
        // at level 1 the same form is fine
        assert!(matches!(in_I_power(&f, 1), IPowerOutcome::Member(_)));
    }

    #[test]
    fn transfer_point_rules() {
        let c = WittClass {
            field: FieldTag::RealField,
            twist: Some(TwistBasis::new("(t)^*")),
            data: WittData::Sig(3),
        };
        let out = transfer_point(&c, &origin()).unwrap();
        assert_eq!(out.signature(), Some(3));
        let bucket = ClosedPoint::complex(poly(&[1, 0, 1])).unwrap();
        let cc = WittClass {
            field: FieldTag::ComplexField,
            twist: None,
            data: WittData::RankParity(1),
        };
        assert!(transfer_point(&cc, &bucket).unwrap().is_zero());
    }

    #[test]
    fn selector_poly_signs() {
        let roots = sturm_isolate(&poly(&[2, 0, -4, 0, 1])).unwrap(); // t^4-4t^2+2: 4 real roots
        assert_eq!(roots.len(), 4);
        for l in 0..roots.len() {
            let q = selector_poly(&roots, l);
            for (k, r) in roots.iter().enumerate() {
                assert_eq!(sign_at(&q, r), if k == l { 1 } else { -1 });
            }
        }
    }
}
