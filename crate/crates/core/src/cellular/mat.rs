//! Exact integer matrices: Smith and Hermite normal forms, kernels, and
//! solving, sized for cellular cochain complexes (a handful of cells per
//! dimension), not for bulk numerics.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, Int::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().map(Int::from).collect(),
        }
    }

    pub fn from_columns(cols: Vec<Vec<Int>>, rows: usize) -> Self {
        let c = cols.len();
        let mut m = IntMat::zero(rows, c);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), rows, "column height mismatch");
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.rows, other.rows, "row mismatch");
        let mut out = IntMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// The submatrix of the first q rows.
    pub fn top_rows(&self, q: usize) -> IntMat {
        assert!(q <= self.rows, "row count out of range");
        let mut out = IntMat::zero(q, self.cols);
        for i in 0..q {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn transpose(&self) -> IntMat {
        let mut out = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn mod2(&self) -> IntMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.mod_floor(&Int::from(2));
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row a += k * row b
    fn add_row(&mut self, a: usize, b: usize, k: &Int) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(a, j) + k * self.get(b, j);
            self.set(a, j, v);
        }
    }

    /// col a += k * col b
    fn add_col(&mut self, a: usize, b: usize, k: &Int) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, a) + k * self.get(i, b);
            self.set(i, a, v);
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j);
            self.set(a, j, v);
        }
    }

    fn negate_col(&mut self, a: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, a);
            self.set(i, a, v);
        }
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// U * A * V = D with U, V unimodular and D diagonal with the divisibility
/// chain d1 | d2 | ... The inverse of U is carried along for extracting
/// generator representatives.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMat,
    pub u_inv: IntMat,
    pub v: IntMat,
    pub d: IntMat,
    pub rank: usize,
}

impl Smith {
    pub fn diagonal(&self, i: usize) -> &Int {
        self.d.get(i, i)
    }
}

/// Smith normal form with deterministic pivoting: among the nonzero entries
/// of the working block, the one of least absolute value, ties broken by
/// lowest row then column.
pub fn smith(a: &IntMat) -> Smith {
    let mut d = a.clone();
    let rows = d.rows();
    let cols = d.cols();
    let mut u = IntMat::identity(rows);
    let mut u_inv = IntMat::identity(rows);
    let mut v = IntMat::identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // deterministic pivot choice
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if d.get(i, j).is_zero() {
                    continue;
                }
                let better = match &pivot {
                    None => true,
                    Some((pi, pj)) => {
                        let cur = d.get(*pi, *pj).abs();
                        let cand = d.get(i, j).abs();
                        cand < cur
                    }
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        u_inv.swap_cols(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        // clear the pivot row and column
        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in t + 1..rows {
                if !d.get(i, t).is_zero() {
                    let q = d.get(i, t).div_floor(d.get(t, t));
                    d.add_row(i, t, &-&q);
                    u.add_row(i, t, &-&q);
                    u_inv.add_col(t, i, &q);
                    if !d.get(i, t).is_zero() {
                        // remainder smaller than the pivot: swap up and retry
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        u_inv.swap_cols(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !d.get(t, j).is_zero() {
                    let q = d.get(t, j).div_floor(d.get(t, t));
                    d.add_col(j, t, &-&q);
                    v.add_col(j, t, &-&q);
                    if !d.get(t, j).is_zero() {
                        d.swap_cols(t, j);
                        v.swap_cols(t, j);
                        dirty = true;
                    }
                }
            }
        }
        // enforce the divisibility chain: fold any bad entry into the pivot
        let mut fixed = false;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if !d.get(i, j).mod_floor(&d.get(t, t).abs()).is_zero() {
                    d.add_col(t, j, &Int::one());
                    v.add_col(t, j, &Int::one());
                    fixed = true;
                    break 'outer;
                }
            }
        }
        if fixed {
            continue;
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        t += 1;
    }
    Smith {
        u,
        u_inv,
        v,
        d,
        rank: t,
    }
}

/// Basis of the integer kernel {x : A x = 0}, as matrix columns. The lattice
/// is saturated: every integer solution is an integer combination.
pub fn kernel_basis(a: &IntMat) -> IntMat {
    let s = smith(a);
    let free = a.cols() - s.rank;
    let mut out = IntMat::zero(a.cols(), free);
    for j in 0..free {
        for i in 0..a.cols() {
            out.set(i, j, s.v.get(i, s.rank + j).clone());
        }
    }
    out
}

/// Solves A X = B over the integers; None when no integral solution exists.
pub fn solve(a: &IntMat, b: &IntMat) -> Option<IntMat> {
    assert_eq!(a.rows(), b.rows(), "dimension mismatch");
    let s = smith(a);
    let ub = s.u.mul(b);
    let mut y = IntMat::zero(a.cols(), b.cols());
    for j in 0..b.cols() {
        for i in 0..a.rows() {
            let rhs = ub.get(i, j);
            if i < s.rank {
                let d = s.diagonal(i);
                let (q, r) = rhs.div_rem(d);
                if !r.is_zero() {
                    return None;
                }
                y.set(i, j, q);
            } else if !rhs.is_zero() {
                return None;
            }
        }
    }
    Some(s.v.mul(&y))
}

/// Canonical column Hermite normal form of the lattice spanned by the
/// columns: echelon columns with positive pivots, entries to the right of
/// each pivot reduced into [0, pivot), zero columns dropped. Two sets of
/// columns span the same lattice exactly when their forms agree.
pub fn hnf(a: &IntMat) -> IntMat {
    let mut m = a.clone();
    let rows = m.rows();
    let cols = m.cols();
    let mut lead = 0usize;
    for i in 0..rows {
        if lead >= cols {
            break;
        }
        // gcd-reduce the row segment [lead..] to a single nonzero entry
        loop {
            let mut best: Option<usize> = None;
            for j in lead..cols {
                if m.get(i, j).is_zero() {
                    continue;
                }
                best = match best {
                    None => Some(j),
                    Some(b) if m.get(i, j).abs() < m.get(i, b).abs() => Some(j),
                    keep => keep,
                };
            }
            let Some(b) = best else { break };
            m.swap_cols(lead, b);
            let mut again = false;
            for j in lead + 1..cols {
                if !m.get(i, j).is_zero() {
                    let q = m.get(i, j).div_floor(m.get(i, lead));
                    m.add_col(j, lead, &-&q);
                    if !m.get(i, j).is_zero() {
                        again = true;
                    }
                }
            }
            if !again {
                break;
            }
        }
        if m.get(i, lead).is_zero() {
            continue;
        }
        if m.get(i, lead).is_negative() {
            m.negate_col(lead);
        }
        // reduce earlier pivot columns at this row into [0, pivot)
        let p = m.get(i, lead).clone();
        for j in 0..lead {
            let q = m.get(i, j).div_floor(&p);
            m.add_col(j, lead, &-&q);
        }
        lead += 1;
    }
    // keep the pivot columns only, in order
    let mut out = IntMat::zero(rows, lead);
    for j in 0..lead {
        for i in 0..rows {
            out.set(i, j, m.get(i, j).clone());
        }
    }
    out
}

/// Whether two generating sets span the same column lattice.
pub fn same_lattice(a: &IntMat, b: &IntMat) -> bool {
    hnf(a) == hnf(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: Vec<Vec<i64>>) -> IntMat {
        IntMat::from_rows(rows)
    }

    #[test]
    fn smith_of_small_matrices() {
        let a = m(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let s = smith(&a);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);
        let diag: Vec<i64> = (0..3)
            .map(|i| i64::try_from(s.diagonal(i)).unwrap())
            .collect();
        assert_eq!(diag, vec![2, 2, 156]);
        assert_eq!(s.rank, 3);
        // transforms invert each other
        assert_eq!(s.u.mul(&s.u_inv), IntMat::identity(3));
    }

    #[test]
    fn smith_keeps_divisibility_chain() {
        let a = m(vec![vec![2, 0], vec![0, 3]]);
        let s = smith(&a);
        assert_eq!(i64::try_from(s.diagonal(0)).unwrap(), 1);
        assert_eq!(i64::try_from(s.diagonal(1)).unwrap(), 6);
    }

    #[test]
    fn kernel_of_projection() {
        let a = m(vec![vec![1, 2, 3]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
        // saturation: (1, 1, -1) lies in the kernel and in the lattice
        let target = m(vec![vec![1], vec![1], vec![-1]]);
        assert!(solve(&k, &target).is_some());
    }

    #[test]
    fn solve_finds_integral_solutions_only() {
        let a = m(vec![vec![2, 0], vec![0, 2]]);
        assert!(solve(&a, &m(vec![vec![2], vec![-4]])).is_some());
        assert!(solve(&a, &m(vec![vec![1], vec![0]])).is_none());
        let x = solve(&a, &m(vec![vec![6], vec![8]])).unwrap();
        assert_eq!(a.mul(&x), m(vec![vec![6], vec![8]]));
    }

    #[test]
    fn hnf_detects_lattice_equality() {
        let a = m(vec![vec![1, 0], vec![0, 2]]);
        let b = m(vec![vec![1, 1], vec![2, 0]]);
        assert!(same_lattice(&a, &b));
        let c = m(vec![vec![1, 0], vec![0, 1]]);
        assert!(!same_lattice(&a, &c));
        // redundant generators collapse
        let d = m(vec![vec![1, 0, 3], vec![0, 2, 4]]);
        assert!(same_lattice(&a, &d));
    }

    #[test]
    fn hnf_of_zero_is_empty() {
        let z = IntMat::zero(3, 2);
        assert_eq!(hnf(&z).cols(), 0);
    }
}
