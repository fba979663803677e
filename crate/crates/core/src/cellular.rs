//! Cellular cochain complexes with three coefficient systems (integral,
//! integral twisted, mod 2), their cohomology through Smith normal form,
//! Bockstein connecting maps, the bigraded table of powers of the
//! fundamental ideal derived from the two-column dichotomy, and Chow and
//! Chow-Witt group tables assembled as fiber products.

pub mod mat;

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use mat::{hnf, kernel_basis, same_lattice, smith, solve, Int, IntMat};

#[derive(Debug, Error)]
pub enum CellError {
    /// The supplied matrices do not form compatible cochain complexes.
    #[error("NotAComplex: {0}")]
    NotAComplex(String),
    /// Derived table data fails an exactness or consistency requirement.
    #[error("InconsistentTable: {0}")]
    InconsistentTable(String),
}

/// Coefficient choice for plain cohomology of a cellular complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coeff {
    Z,
    ZL,
    Z2,
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Z => write!(f, "Z"),
            Coeff::ZL => write!(f, "ZL"),
            Coeff::Z2 => write!(f, "Z2"),
        }
    }
}

/// One of the two integral systems; the parameter L of the derived tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum System {
    Z,
    ZL,
}

impl System {
    pub fn coeff(self) -> Coeff {
        match self {
            System::Z => Coeff::Z,
            System::ZL => Coeff::ZL,
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff())
    }
}

/// Finitely generated abelian group in invariant form: free rank plus a
/// divisibility chain d1 | d2 | ... of torsion factors, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinAbGroup {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl FinAbGroup {
    pub fn new(rank: usize, torsion: Vec<u64>) -> Self {
        for w in torsion.windows(2) {
            assert!(w[1] % w[0] == 0, "torsion factors must form a chain");
        }
        assert!(torsion.iter().all(|d| *d >= 2), "torsion factors are >= 2");
        FinAbGroup { rank, torsion }
    }

    pub fn trivial() -> Self {
        FinAbGroup {
            rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        FinAbGroup {
            rank,
            torsion: Vec::new(),
        }
    }

    pub fn elementary_2(dim: usize) -> Self {
        FinAbGroup {
            rank: 0,
            torsion: vec![2; dim],
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Dimension of A/2A over the field with two elements.
    pub fn mod2_dim(&self) -> usize {
        self.rank + self.torsion.iter().filter(|d| *d % 2 == 0).count()
    }

    /// Dimension of the subgroup of elements killed by 2.
    pub fn two_torsion_dim(&self) -> usize {
        self.torsion.iter().filter(|d| *d % 2 == 0).count()
    }

    /// The image of multiplication by 2, read off the invariant factors:
    /// free summands survive, Z/d becomes Z/(d/2) for even d and is
    /// untouched for odd d.
    pub fn double(&self) -> FinAbGroup {
        let torsion = self
            .torsion
            .iter()
            .map(|d| if d % 2 == 0 { d / 2 } else { *d })
            .filter(|d| *d >= 2)
            .collect();
        FinAbGroup {
            rank: self.rank,
            torsion,
        }
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// A finite cochain complex presented by explicit matrices in all three
/// coefficient systems. Degrees run 0..=dim; the matrix at index k is the
/// coboundary from degree k to degree k+1, with one column per source cell.
#[derive(Debug, Clone)]
pub struct CochainComplexSpec {
    cell_counts: Vec<usize>,
    z: Vec<IntMat>,
    zl: Vec<IntMat>,
    z2: Vec<IntMat>,
}

impl CochainComplexSpec {
    pub fn new(
        cell_counts: Vec<usize>,
        z: Vec<IntMat>,
        zl: Vec<IntMat>,
        z2: Vec<IntMat>,
    ) -> Result<Self, CellError> {
        if cell_counts.is_empty() {
            return Err(CellError::NotAComplex("no cell counts given".into()));
        }
        let dim = cell_counts.len() - 1;
        for (label, sys) in [("Z", &z), ("ZL", &zl), ("Z2", &z2)] {
            if sys.len() != dim {
                return Err(CellError::NotAComplex(format!(
                    "{label} system has {} matrices, expected {dim}",
                    sys.len()
                )));
            }
            for (k, m) in sys.iter().enumerate() {
                if m.rows() != cell_counts[k + 1] || m.cols() != cell_counts[k] {
                    return Err(CellError::NotAComplex(format!(
                        "{label} matrix at degree {k} is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        cell_counts[k + 1],
                        cell_counts[k]
                    )));
                }
            }
        }
        for (label, sys) in [("Z", &z), ("ZL", &zl)] {
            for k in 0..dim.saturating_sub(1) {
                if !sys[k + 1].mul(&sys[k]).is_zero() {
                    return Err(CellError::NotAComplex(format!(
                        "{label} system fails d.d = 0 at degree {k}"
                    )));
                }
            }
        }
        let z2: Vec<IntMat> = z2.iter().map(IntMat::mod2).collect();
        for k in 0..dim.saturating_sub(1) {
            if !z2[k + 1].mul(&z2[k]).mod2().is_zero() {
                return Err(CellError::NotAComplex(format!(
                    "Z2 system fails d.d = 0 at degree {k}"
                )));
            }
        }
        for (label, sys) in [("Z", &z), ("ZL", &zl)] {
            for k in 0..dim {
                if sys[k].mod2() != z2[k] {
                    return Err(CellError::NotAComplex(format!(
                        "Z2 matrix at degree {k} is not the mod 2 reduction of the {label} one"
                    )));
                }
            }
        }
        Ok(CochainComplexSpec {
            cell_counts,
            z,
            zl,
            z2,
        })
    }

    pub fn from_integer_rows(
        cell_counts: Vec<usize>,
        z: Vec<Vec<Vec<i64>>>,
        zl: Vec<Vec<Vec<i64>>>,
        z2: Vec<Vec<Vec<i64>>>,
    ) -> Result<Self, CellError> {
        let lift = |sys: Vec<Vec<Vec<i64>>>, counts: &[usize]| -> Vec<IntMat> {
            sys.into_iter()
                .enumerate()
                .map(|(k, rows)| {
                    if rows.is_empty() {
                        // empty row list stands for a matrix with no rows
                        IntMat::zero(0, counts.get(k).copied().unwrap_or(0))
                    } else {
                        IntMat::from_rows(rows)
                    }
                })
                .collect()
        };
        let z = lift(z, &cell_counts);
        let zl = lift(zl, &cell_counts);
        let z2 = lift(z2, &cell_counts);
        CochainComplexSpec::new(cell_counts, z, zl, z2)
    }

    pub fn dim(&self) -> usize {
        self.cell_counts.len() - 1
    }

    pub fn cell_counts(&self) -> &[usize] {
        &self.cell_counts
    }

    fn system(&self, coeff: Coeff) -> &[IntMat] {
        match coeff {
            Coeff::Z => &self.z,
            Coeff::ZL => &self.zl,
            Coeff::Z2 => &self.z2,
        }
    }

    /// Coboundary out of degree k; the map to the zero module for k = dim.
    fn delta(&self, coeff: Coeff, k: usize) -> IntMat {
        if k < self.dim() {
            self.system(coeff)[k].clone()
        } else {
            IntMat::zero(0, self.cell_counts[k.min(self.dim())])
        }
    }

    /// Coboundary into degree k; the map from the zero module for k = 0.
    fn delta_into(&self, coeff: Coeff, k: usize) -> IntMat {
        if k == 0 {
            IntMat::zero(self.cell_counts[0], 0)
        } else {
            self.system(coeff)[k - 1].clone()
        }
    }
}

/// Smith-form presentation of one cohomology group of an integral system,
/// carrying enough data to take invariant coordinates of cocycles and to
/// produce representative cocycles of the invariant generators.
#[derive(Debug, Clone)]
struct GroupPresentation {
    group: FinAbGroup,
    /// columns: basis of the cocycle lattice inside the cochain module
    kernel: IntMat,
    u: IntMat,
    u_inv: IntMat,
    /// surviving invariant rows of U: torsion factor, or None when free
    keep: Vec<(usize, Option<u64>)>,
}

impl GroupPresentation {
    fn build(up: &IntMat, down: &IntMat) -> Self {
        let kernel = kernel_basis(up);
        let relations =
            solve(&kernel, down).expect("coboundaries lie in the cocycle lattice");
        let s = smith(&relations);
        let mut keep = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..kernel.cols() {
            if i < s.rank {
                let d = s.diagonal(i);
                if !d.is_one() {
                    let d = d.to_u64().expect("torsion factor fits in 64 bits");
                    keep.push((i, Some(d)));
                    torsion.push(d);
                }
            } else {
                keep.push((i, None));
            }
        }
        let rank = keep.iter().filter(|(_, f)| f.is_none()).count();
        GroupPresentation {
            group: FinAbGroup::new(rank, torsion),
            kernel,
            u: s.u,
            u_inv: s.u_inv,
            keep,
        }
    }

    fn trivial() -> Self {
        GroupPresentation::build(&IntMat::zero(0, 0), &IntMat::zero(0, 0))
    }

    /// Number of invariant coordinates (torsion generators then free ones,
    /// in chain order).
    fn coords_dim(&self) -> usize {
        self.keep.len()
    }

    /// Relation lattice in invariant coordinates: d * e_i per torsion
    /// generator.
    fn relations(&self) -> IntMat {
        let q = self.coords_dim();
        let cols: Vec<Vec<Int>> = self
            .keep
            .iter()
            .enumerate()
            .filter_map(|(idx, (_, fac))| {
                fac.map(|d| {
                    let mut col = vec![Int::zero(); q];
                    col[idx] = Int::from(d);
                    col
                })
            })
            .collect();
        IntMat::from_columns(cols, q)
    }

    /// Invariant coordinates of a cocycle, torsion entries reduced into
    /// [0, d).
    fn invariant_coords(&self, cocycle: &[Int]) -> Vec<Int> {
        let v = IntMat::from_columns(vec![cocycle.to_vec()], cocycle.len());
        let c = solve(&self.kernel, &v).expect("vector is a cocycle");
        let w = self.u.mul(&c);
        self.keep
            .iter()
            .map(|(row, fac)| match fac {
                Some(d) => w.get(*row, 0).mod_floor(&Int::from(*d)),
                None => w.get(*row, 0).clone(),
            })
            .collect()
    }

    /// A cocycle representing the invariant generator with the given index.
    fn rep(&self, idx: usize) -> Vec<Int> {
        let (row, _) = self.keep[idx];
        let c = IntMat::from_columns(vec![self.u_inv.column(row)], self.u_inv.rows());
        let v = self.kernel.mul(&c);
        v.column(0)
    }

    fn is_zero_class(&self, coords: &[Int]) -> bool {
        self.keep.iter().zip(coords).all(|((_, fac), c)| match fac {
            Some(d) => c.mod_floor(&Int::from(*d)).is_zero(),
            None => c.is_zero(),
        })
    }
}

/// Mod 2 cohomology of one degree with reduction bookkeeping: basis
/// representatives plus an elimination table that expresses any cocycle in
/// terms of coboundaries and the chosen basis.
#[derive(Debug, Clone)]
struct F2Cohomology {
    cells: usize,
    reps: Vec<Vec<u8>>,
    /// (pivot column, reduced vector, coefficients on reps)
    table: Vec<(usize, Vec<u8>, Vec<u8>)>,
}

fn xor_into(target: &mut [u8], src: &[u8]) {
    for (t, s) in target.iter_mut().zip(src) {
        *t ^= s;
    }
}

impl F2Cohomology {
    fn dim(&self) -> usize {
        self.reps.len()
    }

    fn insert(&mut self, mut v: Vec<u8>, as_rep: bool) {
        let mut coeffs = vec![0u8; self.reps.len()];
        for (pivot, row, row_coeffs) in &self.table {
            if v[*pivot] == 1 {
                xor_into(&mut v, row);
                for (i, c) in row_coeffs.iter().enumerate() {
                    coeffs[i] ^= c;
                }
            }
        }
        let Some(pivot) = v.iter().position(|b| *b == 1) else {
            return;
        };
        if as_rep {
            // the reduced vector itself becomes the new basis class, so its
            // expansion is the fresh unit vector, not the reduction trail
            self.reps.push(v.clone());
            coeffs = vec![0; self.reps.len() - 1];
            coeffs.push(1);
        }
        self.table.push((pivot, v, coeffs));
    }

    /// Class coordinates of a mod 2 cocycle in the chosen basis.
    fn coords(&self, v: &[u8]) -> Vec<u8> {
        let mut v = v.to_vec();
        let mut out = vec![0u8; self.reps.len()];
        for (pivot, row, row_coeffs) in &self.table {
            if v[*pivot] == 1 {
                xor_into(&mut v, row);
                for (i, c) in row_coeffs.iter().enumerate() {
                    out[i] ^= c;
                }
            }
        }
        assert!(
            v.iter().all(|b| *b == 0),
            "vector is not a mod 2 cocycle of this degree"
        );
        out
    }

    fn is_cocycle(&self, up: &IntMat, v: &[u8]) -> bool {
        let image = up.mul_vec(&v.iter().map(|b| Int::from(*b)).collect::<Vec<_>>());
        image.iter().all(|x| x.mod_floor(&Int::from(2)).is_zero())
    }
}

fn mat_to_bits(m: &IntMat) -> Vec<Vec<u8>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| if m.get(i, j).mod_floor(&Int::from(2)).is_zero() { 0 } else { 1 })
                .collect()
        })
        .collect()
}

/// Basis of the mod 2 kernel of an integer matrix.
fn f2_kernel(m: &IntMat) -> Vec<Vec<u8>> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = mat_to_bits(m);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        if let Some(pr) = (r..rows).find(|&i| a[i][c] == 1) {
            a.swap(r, pr);
            let row = a[r].clone();
            for (i, target) in a.iter_mut().enumerate() {
                if i != r && target[c] == 1 {
                    xor_into(target, &row);
                }
            }
            pivots.push((r, c));
            r += 1;
        }
    }
    let pivot_cols: Vec<usize> = pivots.iter().map(|(_, c)| *c).collect();
    let mut out = Vec::new();
    for f in 0..cols {
        if pivot_cols.contains(&f) {
            continue;
        }
        let mut v = vec![0u8; cols];
        v[f] = 1;
        for (pr, pc) in &pivots {
            v[*pc] = a[*pr][f];
        }
        out.push(v);
    }
    out
}

fn f2_cohomology(up: &IntMat, down: &IntMat) -> F2Cohomology {
    let cells = up.cols();
    let mut h = F2Cohomology {
        cells,
        reps: Vec::new(),
        table: Vec::new(),
    };
    for j in 0..down.cols() {
        let col = down
            .column(j)
            .iter()
            .map(|x| if x.mod_floor(&Int::from(2)).is_zero() { 0 } else { 1 })
            .collect();
        h.insert(col, false);
    }
    for v in f2_kernel(up) {
        h.insert(v, true);
    }
    h
}

fn presentation_at(spec: &CochainComplexSpec, sys: System, k: usize) -> GroupPresentation {
    if k > spec.dim() {
        return GroupPresentation::trivial();
    }
    GroupPresentation::build(&spec.delta(sys.coeff(), k), &spec.delta_into(sys.coeff(), k))
}

fn f2_at(spec: &CochainComplexSpec, k: usize) -> F2Cohomology {
    if k > spec.dim() {
        return F2Cohomology {
            cells: 0,
            reps: Vec::new(),
            table: Vec::new(),
        };
    }
    f2_cohomology(&spec.delta(Coeff::Z2, k), &spec.delta_into(Coeff::Z2, k))
}

/// Cohomology of the complex in all degrees 0..=dim with the chosen
/// coefficients.
pub fn cohomology(spec: &CochainComplexSpec, coeff: Coeff) -> Vec<FinAbGroup> {
    (0..=spec.dim())
        .map(|k| match coeff {
            Coeff::Z2 => FinAbGroup::elementary_2(f2_at(spec, k).dim()),
            Coeff::Z => presentation_at(spec, System::Z, k).group,
            Coeff::ZL => presentation_at(spec, System::ZL, k).group,
        })
        .collect()
}

/// Connecting map of the coefficient sequence 0 -> Z(L) -> Z(L) -> Z/2 -> 0
/// in one degree: H^k(Z/2) -> H^{k+1}(Z(L)), computed by the snake: lift a
/// mod 2 cocycle to integers, apply the integral coboundary of the target
/// system, divide by two.
pub struct Bockstein {
    pub degree: usize,
    pub source_dim: usize,
    pub target: FinAbGroup,
    columns: Vec<Vec<Int>>,
    source: F2Cohomology,
    target_pres: GroupPresentation,
    delta_l: IntMat,
}

impl Bockstein {
    /// Image of each source basis generator, in invariant coordinates of
    /// the target group; one column per generator.
    pub fn matrix(&self) -> IntMat {
        IntMat::from_columns(self.columns.clone(), self.target_pres.coords_dim())
    }

    /// Apply to a mod 2 cocycle with the canonical 0/1 lift.
    pub fn apply_cocycle(&self, z: &[u8]) -> Vec<Int> {
        let lift: Vec<Int> = z.iter().map(|b| Int::from(*b)).collect();
        self.apply_lifted(z, &lift)
    }

    /// Apply with a caller-chosen integral lift; the result is independent
    /// of the choice.
    pub fn apply_lifted(&self, z: &[u8], lift: &[Int]) -> Vec<Int> {
        assert_eq!(lift.len(), z.len(), "lift length mismatch");
        let two = Int::from(2);
        for (l, b) in lift.iter().zip(z) {
            assert!(
                l.mod_floor(&two) == Int::from(*b),
                "lift does not reduce to the cocycle"
            );
        }
        let w = self.delta_l.mul_vec(lift);
        let half: Vec<Int> = w
            .iter()
            .map(|x| {
                let (q, r) = x.div_rem(&two);
                assert!(r.is_zero(), "snake image is divisible by two");
                q
            })
            .collect();
        self.target_pres.invariant_coords(&half)
    }

    /// Apply to class coordinates in the source basis.
    pub fn apply_class(&self, coords: &[u8]) -> Vec<Int> {
        assert_eq!(coords.len(), self.source_dim, "class coordinate length");
        let mut out = vec![Int::zero(); self.target_pres.coords_dim()];
        for (c, col) in coords.iter().zip(&self.columns) {
            if *c == 1 {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += v;
                }
            }
        }
        self.target_pres
            .invariant_coords(&self.assemble(&out))
    }

    fn assemble(&self, coords: &[Int]) -> Vec<Int> {
        // rebuild a cocycle from invariant coordinates to renormalize
        let mut v = vec![Int::zero(); self.target_pres.kernel.rows()];
        for (idx, c) in coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (slot, r) in self.target_pres.rep(idx).iter().enumerate() {
                v[slot] += c * r;
            }
        }
        v
    }

    /// Class coordinates of the source generator with the given index.
    pub fn source_rep(&self, idx: usize) -> Vec<u8> {
        self.source.reps[idx].clone()
    }

    pub fn is_zero_image(&self, coords: &[Int]) -> bool {
        self.target_pres.is_zero_class(coords)
    }
}

pub fn bockstein(spec: &CochainComplexSpec, sys: System, k: usize) -> Bockstein {
    assert!(k <= spec.dim(), "degree out of range");
    let source = f2_at(spec, k);
    let target_pres = presentation_at(spec, sys, k + 1);
    let delta_l = spec.delta(sys.coeff(), k);
    let mut columns = Vec::new();
    for z in &source.reps {
        let lift: Vec<Int> = z.iter().map(|b| Int::from(*b)).collect();
        let w = delta_l.mul_vec(&lift);
        let two = Int::from(2);
        let half: Vec<Int> = w
            .iter()
            .map(|x| {
                let (q, r) = x.div_rem(&two);
                assert!(r.is_zero(), "snake image is divisible by two");
                q
            })
            .collect();
        columns.push(target_pres.invariant_coords(&half));
    }
    Bockstein {
        degree: k,
        source_dim: source.dim(),
        target: target_pres.group.clone(),
        columns,
        source,
        target_pres,
        delta_l,
    }
}

/// A cellular variety: a named real cell structure with both integral
/// systems plus the count of algebraic cells in each codimension.
#[derive(Debug, Clone)]
pub struct CellularVariety {
    pub name: String,
    pub complex: CochainComplexSpec,
    pub cells_per_codim: Vec<usize>,
}

impl CellularVariety {
    pub fn new(name: impl Into<String>, complex: CochainComplexSpec) -> Self {
        let cells_per_codim = complex.cell_counts().to_vec();
        CellularVariety {
            name: name.into(),
            complex,
            cells_per_codim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinSpace {
    RPn(usize),
    Sn(usize),
    P1,
}

/// Cell structures with known coboundaries: real projective spaces with one
/// cell per dimension, spheres with two cells, and the projective line as
/// the circle with its Moebius twist.
pub fn builtin(space: BuiltinSpace) -> CellularVariety {
    match space {
        BuiltinSpace::RPn(n) => {
            let counts = vec![1usize; n + 1];
            let z: Vec<IntMat> = (0..n)
                .map(|k| IntMat::from_rows(vec![vec![if k % 2 == 0 { 0 } else { 2 }]]))
                .collect();
            let zl: Vec<IntMat> = (0..n)
                .map(|k| IntMat::from_rows(vec![vec![if k % 2 == 0 { 2 } else { 0 }]]))
                .collect();
            let z2: Vec<IntMat> = (0..n)
                .map(|_| IntMat::from_rows(vec![vec![0]]))
                .collect();
            let complex = CochainComplexSpec::new(counts, z, zl, z2)
                .expect("projective cell structure is a complex");
            CellularVariety::new(format!("RP^{n}"), complex)
        }
        BuiltinSpace::Sn(n) => {
            if n == 0 {
                let complex =
                    CochainComplexSpec::new(vec![2], vec![], vec![], vec![])
                        .expect("two points form a complex");
                return CellularVariety::new("S^0", complex);
            }
            let mut counts = vec![0usize; n + 1];
            counts[0] = 1;
            counts[n] = 1;
            let deltas: Vec<IntMat> = (0..n)
                .map(|k| IntMat::zero(counts[k + 1], counts[k]))
                .collect();
            let complex = CochainComplexSpec::new(
                counts,
                deltas.clone(),
                deltas.clone(),
                deltas,
            )
            .expect("sphere cell structure is a complex");
            CellularVariety::new(format!("S^{n}"), complex)
        }
        BuiltinSpace::P1 => {
            let circle = builtin(BuiltinSpace::RPn(1));
            CellularVariety::new("P^1", circle.complex)
        }
    }
}

/// The bigraded table of cohomology with coefficients in the powers of the
/// fundamental ideal: entry (i, j, L) is the topological group for j >= i
/// and its doubled image below the diagonal.
#[derive(Debug, Clone)]
pub struct BigradedTable {
    pub dim: usize,
    pub jmax: usize,
    trivial: Vec<FinAbGroup>,
    twisted: Vec<FinAbGroup>,
    ch: Vec<usize>,
}

impl BigradedTable {
    fn topological(&self, i: usize, sys: System) -> &FinAbGroup {
        match sys {
            System::Z => &self.trivial[i],
            System::ZL => &self.twisted[i],
        }
    }

    pub fn entry(&self, i: usize, j: usize, sys: System) -> FinAbGroup {
        assert!(i <= self.dim, "degree out of range");
        let top = self.topological(i, sys);
        if j >= i {
            top.clone()
        } else {
            top.double()
        }
    }

    /// Mod 2 cohomology dimension in one degree.
    pub fn ch_dim(&self, i: usize) -> usize {
        self.ch[i]
    }

    /// Subquotient column data: order (as a power of two) of the middle
    /// term of the short sequence joining columns j+1 and j at row i.
    pub fn quotient_dim(&self, i: usize, j: usize, sys: System) -> usize {
        if j < i {
            return 0;
        }
        let here = self.topological(i, sys).mod2_dim();
        let next = if i < self.dim {
            self.topological(i + 1, sys).two_torsion_dim()
        } else {
            0
        };
        here + next
    }
}

struct LesColumn {
    pres: Vec<GroupPresentation>,
    f2: Vec<F2Cohomology>,
    red: Vec<IntMat>,
    beta: Vec<IntMat>,
}

fn les_column(spec: &CochainComplexSpec, sys: System) -> LesColumn {
    let top = spec.dim() + 1;
    let pres: Vec<GroupPresentation> =
        (0..=top).map(|k| presentation_at(spec, sys, k)).collect();
    let f2: Vec<F2Cohomology> = (0..=top).map(|k| f2_at(spec, k)).collect();
    let mut red = Vec::new();
    let mut beta = Vec::new();
    for k in 0..=top {
        let p = &pres[k];
        let cols: Vec<Vec<Int>> = (0..p.coords_dim())
            .map(|idx| {
                let bits: Vec<u8> = p
                    .rep(idx)
                    .iter()
                    .map(|x| if x.mod_floor(&Int::from(2)).is_zero() { 0 } else { 1 })
                    .collect();
                f2[k].coords(&bits).into_iter().map(Int::from).collect()
            })
            .collect();
        red.push(IntMat::from_columns(cols, f2[k].dim()));
        if k < top {
            beta.push(bockstein(spec, sys, k).matrix());
        } else {
            beta.push(IntMat::zero(0, f2[k].dim()));
        }
    }
    LesColumn {
        pres,
        f2,
        red,
        beta,
    }
}

fn two_identity(n: usize) -> IntMat {
    let mut m = IntMat::identity(n);
    for i in 0..n {
        m.set(i, i, Int::from(2));
    }
    m
}

/// Generators of the kernel of a group map given in invariant coordinates:
/// x with (map)x lying in the target relation lattice.
fn map_kernel(map: &IntMat, target_rel: &IntMat) -> IntMat {
    let q = map.cols();
    let combined = map.hstack(target_rel);
    let k = kernel_basis(&combined);
    k.top_rows(q)
}

fn check_exact(
    label: &str,
    image_gens: &IntMat,
    kernel_gens: &IntMat,
    relations: &IntMat,
) -> Result<(), CellError> {
    let im = image_gens.hstack(relations);
    let ker = kernel_gens.hstack(relations);
    if same_lattice(&im, &ker) {
        Ok(())
    } else {
        Err(CellError::InconsistentTable(format!(
            "coefficient sequence fails exactness {label}"
        )))
    }
}

fn validate_les(spec: &CochainComplexSpec, sys: System) -> Result<LesColumn, CellError> {
    let col = les_column(spec, sys);
    let top = spec.dim() + 1;
    for i in 0..=top {
        let q = col.pres[i].coords_dim();
        let rel = col.pres[i].relations();
        let two = two_identity(q);
        let ch_rel = two_identity(col.f2[i].dim());
        // target of the connecting map, source of doubling
        let incoming = if i == 0 {
            IntMat::zero(q, 0)
        } else {
            col.beta[i - 1].clone()
        };
        let ker_double = map_kernel(&two, &rel);
        check_exact(
            &format!("at H^{i}({sys}) before doubling", ),
            &incoming,
            &ker_double,
            &rel,
        )?;
        // target of doubling, source of reduction
        let ker_red = map_kernel(&col.red[i], &ch_rel);
        check_exact(
            &format!("at H^{i}({sys}) before reduction"),
            &two,
            &ker_red,
            &rel,
        )?;
        // target of reduction, source of the connecting map
        if i < top {
            let ker_beta = map_kernel(&col.beta[i], &col.pres[i + 1].relations());
            check_exact(
                &format!("at H^{i}(Z2) for {sys}"),
                &col.red[i],
                &ker_beta,
                &ch_rel,
            )?;
        }
    }
    Ok(col)
}

/// Derive the full bigraded table for a cellular variety, validating the
/// coefficient long exact sequence of both integral systems at every
/// position first.
#[allow(non_snake_case)]
pub fn derive_I_table(x: &CellularVariety) -> Result<BigradedTable, CellError> {
    let spec = &x.complex;
    let triv = validate_les(spec, System::Z)?;
    let tw = validate_les(spec, System::ZL)?;
    let dim = spec.dim();
    let table = BigradedTable {
        dim,
        jmax: dim + 1,
        trivial: (0..=dim).map(|i| triv.pres[i].group.clone()).collect(),
        twisted: (0..=dim).map(|i| tw.pres[i].group.clone()).collect(),
        ch: (0..=dim).map(|i| triv.f2[i].dim()).collect(),
    };
    // the subquotient column must agree with mod 2 cohomology in each row
    for sys in [System::Z, System::ZL] {
        for i in 0..=dim {
            for j in i..=table.jmax {
                if table.quotient_dim(i, j, sys) != table.ch_dim(i) {
                    return Err(CellError::InconsistentTable(format!(
                        "subquotient column disagrees with mod 2 cohomology at ({i}, {j}, {sys})"
                    )));
                }
            }
        }
    }
    Ok(table)
}

/// Cycle class groups of a cellular variety: free Chow groups from the
/// codimension cell counts, mod 2 Chow groups from mod 2 cohomology.
pub fn chow_tables(x: &CellularVariety) -> (Vec<FinAbGroup>, Vec<FinAbGroup>) {
    let dim = x.complex.dim();
    let ch_free: Vec<FinAbGroup> = x
        .cells_per_codim
        .iter()
        .map(|c| FinAbGroup::free(*c))
        .collect();
    let ch_mod2: Vec<FinAbGroup> = (0..=dim)
        .map(|k| FinAbGroup::elementary_2(f2_at(&x.complex, k).dim()))
        .collect();
    (ch_free, ch_mod2)
}

/// One codimension of the Chow-Witt table with the data of its fiber
/// product presentation.
#[derive(Debug, Clone)]
pub struct ChowWittEntry {
    pub codim: usize,
    pub group: FinAbGroup,
    /// H^n of the n-th power sheaf with the chosen system.
    pub witt_part: FinAbGroup,
    /// Index of the kernel of the cycle boundary inside the free Chow group.
    pub cycle_kernel_index: u64,
    /// Index of the fiber product inside the direct product; a power of two.
    pub product_index: u64,
    /// Whether projecting to the boundary kernel of the free Chow group hits
    /// every cycle class.
    pub onto_cycles: bool,
    /// Kernel of that projection: sheaf classes with zero mod 2 reduction.
    pub projection_kernel: FinAbGroup,
}

/// Chow-Witt groups as fiber products of the derived sheaf cohomology and
/// the boundary kernel in the free Chow group over mod 2 cohomology.
pub fn chow_witt_table(
    x: &CellularVariety,
    sys: System,
) -> Result<Vec<ChowWittEntry>, CellError> {
    let spec = &x.complex;
    let dim = spec.dim();
    let mut out = Vec::new();
    for n in 0..=dim {
        let pres = presentation_at(spec, sys, n);
        let f2 = f2_at(spec, n);
        let cells = x.cells_per_codim[n];
        let up2 = spec.delta(Coeff::Z2, n);
        // mod 2 classes of the codimension-n cells
        let mut cell_red_cols = Vec::new();
        for l in 0..cells {
            let mut e = vec![0u8; f2.cells];
            e[l] = 1;
            if !f2.is_cocycle(&up2, &e) {
                return Err(CellError::InconsistentTable(format!(
                    "codimension {n} cell {l} is not a mod 2 cocycle"
                )));
            }
            cell_red_cols.push(f2.coords(&e).into_iter().map(Int::from).collect());
        }
        let cell_red = IntMat::from_columns(cell_red_cols, f2.dim());
        // boundary on free cycles: Bockstein after reduction
        let b = bockstein(spec, sys, n);
        let boundary = b.matrix().mul(&cell_red);
        let next_rel = presentation_at(spec, sys, n + 1).relations();
        let ker_boundary = map_kernel(&boundary, &next_rel);
        let kernel_hnf = hnf(&ker_boundary);
        let cycle_kernel_index = lattice_index(cells, &kernel_hnf);
        // reduction of the sheaf side
        let red_cols: Vec<Vec<Int>> = (0..pres.coords_dim())
            .map(|idx| {
                let bits: Vec<u8> = pres
                    .rep(idx)
                    .iter()
                    .map(|v| if v.mod_floor(&Int::from(2)).is_zero() { 0 } else { 1 })
                    .collect();
                f2.coords(&bits).into_iter().map(Int::from).collect()
            })
            .collect();
        let red_sheaf = IntMat::from_columns(red_cols, f2.dim());
        // difference map on the product, kernel = fiber product
        let matched = cell_red.mul(&kernel_hnf);
        let diff = red_sheaf.hstack(&matched);
        let ch_rel = two_identity(f2.dim());
        let fiber = map_kernel(&diff, &ch_rel);
        // relations of the product: sheaf relations only, cycles are free
        let q = pres.coords_dim();
        let k = kernel_hnf.cols();
        let rel = pres.relations();
        let mut rel_full = IntMat::zero(q + k, rel.cols());
        for i in 0..q {
            for j in 0..rel.cols() {
                rel_full.set(i, j, rel.get(i, j).clone());
            }
        }
        let group = present_subquotient(&fiber, &rel_full);
        // index of the fiber product inside the direct product: the rank of
        // the difference map over the field with two elements
        let product_index = 1u64 << f2_rank(&diff);
        // projection to the boundary kernel: onto when every matched cycle
        // class already lies in the image of the sheaf side reduction
        let onto_cycles = f2_rank(&red_sheaf) == f2_rank(&red_sheaf.hstack(&matched));
        // its kernel: sheaf classes reducing to zero, paired with the zero cycle
        let lat = map_kernel(&red_sheaf, &ch_rel);
        let projection_kernel = present_subquotient(&lat, &rel);
        out.push(ChowWittEntry {
            codim: n,
            group,
            witt_part: pres.group.clone(),
            cycle_kernel_index,
            product_index,
            onto_cycles,
            projection_kernel,
        });
    }
    Ok(out)
}

/// Present the group generated by the columns of `gens` modulo the lattice
/// spanned by the columns of `rel`, which must lie in the span of `gens`.
/// The generators need not be independent; syzygies become relations.
fn present_subquotient(gens: &IntMat, rel: &IntMat) -> FinAbGroup {
    if gens.cols() == 0 {
        return FinAbGroup::trivial();
    }
    let rel_coords = solve(gens, rel).expect("relations lie inside the generated lattice");
    let syzygies = kernel_basis(gens);
    let s = smith(&rel_coords.hstack(&syzygies));
    let mut torsion = Vec::new();
    for i in 0..s.rank {
        let d = s.diagonal(i);
        if !d.is_one() {
            torsion.push(d.to_u64().expect("torsion factor fits in 64 bits"));
        }
    }
    FinAbGroup::new(gens.cols() - s.rank, torsion)
}

fn f2_rank(m: &IntMat) -> usize {
    let cols = m.cols();
    let kernel_dim = f2_kernel(m).len();
    cols - kernel_dim
}

/// Index of a full-rank sublattice given by its Hermite form columns.
fn lattice_index(ambient: usize, h: &IntMat) -> u64 {
    assert_eq!(h.cols(), ambient, "sublattice is full rank");
    let mut det = Int::one();
    // echelon form: the determinant is the product of the pivots
    let mut row = 0;
    for j in 0..h.cols() {
        while row < h.rows() && h.get(row, j).is_zero() {
            row += 1;
        }
        assert!(row < h.rows(), "echelon pivot exists");
        det *= h.get(row, j);
        row += 1;
    }
    det.abs().to_u64().expect("lattice index fits in 64 bits")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(n: usize) -> CellularVariety {
        builtin(BuiltinSpace::RPn(n))
    }

    fn groups(v: &[FinAbGroup]) -> Vec<String> {
        v.iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn projective_plane_cohomology() {
        let x = rp(2);
        assert_eq!(
            groups(&cohomology(&x.complex, Coeff::Z)),
            vec!["Z", "0", "Z/2"]
        );
        assert_eq!(
            groups(&cohomology(&x.complex, Coeff::ZL)),
            vec!["0", "Z/2", "Z"]
        );
        assert_eq!(
            groups(&cohomology(&x.complex, Coeff::Z2)),
            vec!["Z/2", "Z/2", "Z/2"]
        );
    }

    #[test]
    fn sphere_and_circle_cohomology() {
        let s2 = builtin(BuiltinSpace::Sn(2));
        assert_eq!(
            groups(&cohomology(&s2.complex, Coeff::Z)),
            vec!["Z", "0", "Z"]
        );
        let p1 = builtin(BuiltinSpace::P1);
        assert_eq!(groups(&cohomology(&p1.complex, Coeff::Z)), vec!["Z", "Z"]);
        assert_eq!(groups(&cohomology(&p1.complex, Coeff::ZL)), vec!["0", "Z/2"]);
    }

    #[test]
    fn projective_three_space() {
        let x = rp(3);
        assert_eq!(
            groups(&cohomology(&x.complex, Coeff::Z)),
            vec!["Z", "0", "Z/2", "Z"]
        );
        assert_eq!(
            groups(&cohomology(&x.complex, Coeff::ZL)),
            vec!["0", "Z/2", "0", "Z/2"]
        );
    }

    #[test]
    fn rejects_non_complexes() {
        // d.d != 0
        let bad = CochainComplexSpec::from_integer_rows(
            vec![1, 1, 1],
            vec![vec![vec![1]], vec![vec![1]]],
            vec![vec![vec![1]], vec![vec![1]]],
            vec![vec![vec![1]], vec![vec![1]]],
        );
        assert!(matches!(bad, Err(CellError::NotAComplex(_))));
        // mod 2 mismatch between systems
        let bad = CochainComplexSpec::from_integer_rows(
            vec![1, 1],
            vec![vec![vec![2]]],
            vec![vec![vec![2]]],
            vec![vec![vec![1]]],
        );
        assert!(matches!(bad, Err(CellError::NotAComplex(_))));
    }

    #[test]
    fn bockstein_on_the_projective_plane() {
        let x = rp(2);
        // generator of H^1(Z2) maps to the generator of H^2(Z) = Z/2
        let b = bockstein(&x.complex, System::Z, 1);
        assert_eq!(b.source_dim, 1);
        assert_eq!(b.target, FinAbGroup::new(0, vec![2]));
        let image = b.apply_class(&[1]);
        assert!(!b.is_zero_image(&image));
        // towards the twisted system the same class dies: H^2(ZL) = Z is
        // reached through a coboundary that is already divisible
        let bt = bockstein(&x.complex, System::ZL, 1);
        let image = bt.apply_class(&[1]);
        assert!(bt.is_zero_image(&image));
    }

    #[test]
    fn bockstein_on_the_twisted_circle() {
        let p1 = builtin(BuiltinSpace::P1);
        let b = bockstein(&p1.complex, System::ZL, 0);
        assert_eq!(b.target, FinAbGroup::new(0, vec![2]));
        let image = b.apply_class(&[1]);
        assert!(!b.is_zero_image(&image));
    }

    #[test]
    fn bockstein_is_independent_of_the_lift() {
        let x = rp(2);
        let b = bockstein(&x.complex, System::Z, 1);
        let z = b.source_rep(0);
        let plain = b.apply_cocycle(&z);
        let shifted: Vec<Int> = z
            .iter()
            .enumerate()
            .map(|(i, bit)| Int::from(*bit) + 2 * Int::from((i * 7 + 3) as i64 % 5))
            .collect();
        let other = b.apply_lifted(&z, &shifted);
        assert_eq!(plain, other);
    }

    #[test]
    fn derived_table_of_the_circle() {
        let p1 = builtin(BuiltinSpace::P1);
        let t = derive_I_table(&p1).unwrap();
        for j in 0..=t.jmax {
            assert_eq!(t.entry(0, j, System::Z).to_string(), "Z");
            assert_eq!(t.entry(1, j, System::Z).to_string(), "Z");
            assert_eq!(t.entry(0, j, System::ZL).to_string(), "0");
        }
        for j in 1..=t.jmax {
            assert_eq!(t.entry(1, j, System::ZL).to_string(), "Z/2");
        }
        assert_eq!(t.entry(1, 0, System::ZL).to_string(), "0");
    }

    #[test]
    fn derived_table_of_the_projective_plane() {
        let x = rp(2);
        let t = derive_I_table(&x).unwrap();
        // below the diagonal the doubled image kills the two torsion
        assert_eq!(t.entry(2, 1, System::Z).to_string(), "0");
        assert_eq!(t.entry(2, 2, System::Z).to_string(), "Z/2");
        assert_eq!(t.entry(2, 3, System::ZL).to_string(), "Z");
        assert_eq!(t.entry(2, 1, System::ZL).to_string(), "Z");
        // mod 2 row
        for i in 0..=2 {
            assert_eq!(t.ch_dim(i), 1);
        }
    }

    #[test]
    fn derived_tables_exist_up_to_dimension_five() {
        for n in 0..=5 {
            let t = derive_I_table(&rp(n)).unwrap();
            for i in 0..=n {
                assert_eq!(t.ch_dim(i), 1);
            }
        }
    }

    #[test]
    fn chow_tables_of_the_line_and_projective_spaces() {
        let p1 = builtin(BuiltinSpace::P1);
        let (free, mod2) = chow_tables(&p1);
        assert_eq!(groups(&free), vec!["Z", "Z"]);
        assert_eq!(groups(&mod2), vec!["Z/2", "Z/2"]);
        let (free, mod2) = chow_tables(&rp(3));
        assert_eq!(groups(&free), vec!["Z", "Z", "Z", "Z"]);
        assert_eq!(groups(&mod2), vec!["Z/2", "Z/2", "Z/2", "Z/2"]);
        let s2 = builtin(BuiltinSpace::Sn(2));
        let (free, mod2) = chow_tables(&s2);
        assert_eq!(groups(&free), vec!["Z", "0", "Z"]);
        assert_eq!(groups(&mod2), vec!["Z/2", "0", "Z/2"]);
    }

    #[test]
    fn chow_witt_of_the_projective_line() {
        let p1 = builtin(BuiltinSpace::P1);
        let plain = chow_witt_table(&p1, System::Z).unwrap();
        assert_eq!(plain[0].group.to_string(), "Z^2");
        assert_eq!(plain[1].group.to_string(), "Z^2");
        // the degree one group sits in the product with index two: the
        // congruence between the sheaf class and the cycle degree
        assert_eq!(plain[1].product_index, 2);
        assert_eq!(plain[1].cycle_kernel_index, 1);
        // projecting to the cycle side is onto, with kernel twice the sheaf part
        assert!(plain.iter().all(|e| e.onto_cycles));
        assert_eq!(plain[0].projection_kernel.to_string(), "Z");
        assert_eq!(plain[1].projection_kernel.to_string(), "Z");
        let twisted = chow_witt_table(&p1, System::ZL).unwrap();
        assert_eq!(twisted[0].group.to_string(), "Z");
        assert_eq!(twisted[1].group.to_string(), "Z");
        assert_eq!(twisted[1].witt_part.to_string(), "Z/2");
        assert_eq!(twisted[1].product_index, 2);
        assert_eq!(twisted[0].cycle_kernel_index, 2);
        // twisted sheaf classes inject: the projection kernels vanish
        assert!(twisted.iter().all(|e| e.onto_cycles));
        assert!(twisted.iter().all(|e| e.projection_kernel.is_trivial()));
    }

    #[test]
    fn doubling_invariant_factors() {
        let g = FinAbGroup::new(2, vec![2, 4, 12]);
        assert_eq!(g.double(), FinAbGroup::new(2, vec![2, 6]));
        assert_eq!(FinAbGroup::new(0, vec![3]).double(), FinAbGroup::new(0, vec![3]));
    }
}
