//! Dense linear algebra over `F_q`: determinant, rank, reduced echelon form,
//! null space and linear solves. Every criterion matrix of the constructions
//! lives here.

use thiserror::Error;

use crate::field::{FieldCtx, SubElement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("entry {index} is not an element of F_q")]
    BadEntry { index: u32 },
}

/// Row-major matrix with entries in `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<SubElement>,
}

impl FqMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<SubElement>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(FqMatrix { rows, cols, entries })
    }

    /// Checks every entry against the subfield of `ctx`.
    pub fn validated(self, ctx: &FieldCtx) -> Result<Self, LinalgError> {
        if let Some(bad) = self.entries.iter().find(|e| e.index() >= ctx.q()) {
            return Err(LinalgError::BadEntry { index: bad.index() });
        }
        Ok(self)
    }

    pub fn from_rows(rows: Vec<Vec<SubElement>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        FqMatrix {
            rows,
            cols,
            entries: vec![SubElement::ZERO; rows * cols],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.set(i, i, SubElement::ONE);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[SubElement] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> SubElement {
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: SubElement) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[SubElement] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<SubElement>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<SubElement> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `c·I + self`.
    pub fn plus_scalar_identity(&self, ctx: &FieldCtx, c: SubElement) -> Result<Self, LinalgError> {
        self.require_square()?;
        let mut out = self.clone();
        for i in 0..self.rows {
            out.set(i, i, ctx.fq_add(self.get(i, i), c));
        }
        Ok(out)
    }

    pub fn add(&self, ctx: &FieldCtx, other: &Self) -> Result<Self, LinalgError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::Shape("addition of differently shaped matrices".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| ctx.fq_add(a, b))
            .collect();
        Ok(FqMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = SubElement::ZERO;
                for t in 0..self.cols {
                    acc = ctx.fq_add(acc, ctx.fq_mul(self.get(i, t), other.get(t, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, ctx: &FieldCtx, v: &[SubElement]) -> Result<Vec<SubElement>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::Shape(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(SubElement::ZERO, |acc, (&a, &b)| ctx.fq_add(acc, ctx.fq_mul(a, b)))
            })
            .collect())
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[target] -= factor * row[source]`, from column `from` onwards.
    fn eliminate(&mut self, ctx: &FieldCtx, target: usize, source: usize, factor: SubElement, from: usize) {
        for j in from..self.cols {
            let v = ctx.fq_sub(self.get(target, j), ctx.fq_mul(factor, self.get(source, j)));
            self.set(target, j, v);
        }
    }

    /// Determinant by Gaussian elimination; the pivot is the first nonzero
    /// entry scanning down the current column.
    pub fn det(&self, ctx: &FieldCtx) -> Result<SubElement, LinalgError> {
        self.require_square()?;
        let k = self.rows;
        let mut a = self.clone();
        let mut det = SubElement::ONE;
        for col in 0..k {
            let Some(piv) = (col..k).find(|&r| !a.get(r, col).is_zero()) else {
                return Ok(SubElement::ZERO);
            };
            if piv != col {
                a.swap_rows(piv, col);
                det = ctx.fq_neg(det);
            }
            let pv = a.get(col, col);
            det = ctx.fq_mul(det, pv);
            let inv = ctx.fq_inv(pv).expect("pivot is nonzero");
            for r in col + 1..k {
                let f = ctx.fq_mul(a.get(r, col), inv);
                if !f.is_zero() {
                    a.eliminate(ctx, r, col, f, col);
                }
            }
        }
        Ok(det)
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self, ctx: &FieldCtx) -> (Self, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(piv) = (row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
                continue;
            };
            a.swap_rows(piv, row);
            let inv = ctx.fq_inv(a.get(row, col)).expect("pivot is nonzero");
            for j in col..a.cols {
                let v = ctx.fq_mul(a.get(row, j), inv);
                a.set(row, j, v);
            }
            for r in 0..a.rows {
                if r != row {
                    let f = a.get(r, col);
                    if !f.is_zero() {
                        a.eliminate(ctx, r, row, f, col);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self, ctx: &FieldCtx) -> usize {
        self.rref(ctx).1.len()
    }

    /// Basis of `{v : Mv = 0}`: free variables set to unit vectors in
    /// ascending column order, pivot variables read off the reduced form.
    pub fn null_space(&self, ctx: &FieldCtx) -> Vec<Vec<SubElement>> {
        let (r, pivots) = self.rref(ctx);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![SubElement::ZERO; self.cols];
                v[fc] = SubElement::ONE;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = ctx.fq_neg(r.get(i, fc));
                }
                v
            })
            .collect()
    }

    /// One solution of `Mx = b` (free variables zero), or `None` if inconsistent.
    pub fn solve(&self, ctx: &FieldCtx, b: &[SubElement]) -> Result<Option<Vec<SubElement>>, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::Shape(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for (i, &bi) in b.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, bi);
        }
        let (r, pivots) = aug.rref(ctx);
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![SubElement::ZERO; self.cols];
        for (i, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(i, self.cols);
        }
        Ok(Some(x))
    }

    /// Nonzero rows of the reduced form of the transpose: a canonical basis
    /// of the column space.
    pub fn column_space(&self, ctx: &FieldCtx) -> Vec<Vec<SubElement>> {
        let (r, pivots) = self.transpose().rref(ctx);
        (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use proptest::prelude::*;

    fn s(v: u32) -> SubElement {
        SubElement(v)
    }

    fn m(rows: &[&[u32]]) -> FqMatrix {
        FqMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| s(v)).collect()).collect()).unwrap()
    }

    #[test]
    fn f3_examples() {
        let k = make_field(3, 1, 1).unwrap();
        let a = m(&[&[1, 2], &[2, 1]]);
        assert_eq!(a.det(&k).unwrap(), s(0));
        assert_eq!(a.rank(&k), 1);
        let ns = a.null_space(&k);
        assert_eq!(ns.len(), 1);
        assert_eq!(a.mul_vec(&k, &ns[0]).unwrap(), vec![s(0), s(0)]);
        assert_eq!(ns[0], vec![s(1), s(1)]);

        assert_eq!(FqMatrix::identity(3).det(&k).unwrap(), s(1));
        assert_eq!(m(&[&[2]]).det(&k).unwrap(), s(2));
        assert_eq!(FqMatrix::zeros(3, 3).rank(&k), 0);
        assert_eq!(FqMatrix::identity(4).rank(&k), 4);
        assert!(FqMatrix::identity(2).null_space(&k).is_empty());
        assert_eq!(FqMatrix::zeros(1, 2).null_space(&k).len(), 2);
    }

    #[test]
    fn det_requires_square() {
        let k = make_field(3, 1, 1).unwrap();
        assert_eq!(
            FqMatrix::zeros(2, 3).det(&k),
            Err(LinalgError::NotSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let k = make_field(5, 1, 1).unwrap();
        let a = m(&[&[1, 2, 3], &[2, 4, 1]]);
        let b = vec![s(4), s(3)];
        let x = a.solve(&k, &b).unwrap().unwrap();
        assert_eq!(a.mul_vec(&k, &x).unwrap(), b);
        let singular = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(singular.solve(&k, &[s(1), s(1)]).unwrap(), None);
    }

    #[test]
    fn row_swap_sign() {
        let k = make_field(5, 1, 1).unwrap();
        // [[0,1],[1,0]] has determinant -1.
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(&k).unwrap(), s(4));
    }

    fn field_and_matrices() -> impl Strategy<Value = ((u64, u64), usize, Vec<u32>, Vec<u32>)> {
        prop_oneof![
            Just((2u64, 1u64)),
            Just((3, 1)),
            Just((2, 2)),
            Just((5, 1)),
            Just((3, 2))
        ]
        .prop_flat_map(|(p, n)| {
            let q = p.pow(n as u32) as u32;
            (1usize..5).prop_flat_map(move |k| {
                (
                    Just((p, n)),
                    Just(k),
                    proptest::collection::vec(0..q, k * k),
                    proptest::collection::vec(0..q, k * k),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn det_rank_consistency(((p, n), k, a, b) in field_and_matrices()) {
            let ctx = make_field(p, n, 1).unwrap();
            let a = FqMatrix::new(k, k, a.into_iter().map(SubElement).collect()).unwrap();
            let b = FqMatrix::new(k, k, b.into_iter().map(SubElement).collect()).unwrap();
            let da = a.det(&ctx).unwrap();
            prop_assert_eq!(!da.is_zero(), a.rank(&ctx) == k);
            prop_assert_eq!(a.rank(&ctx), a.transpose().rank(&ctx));
            let ab = a.mul(&ctx, &b).unwrap();
            prop_assert_eq!(ab.det(&ctx).unwrap(), ctx.fq_mul(da, b.det(&ctx).unwrap()));
            let ns = a.null_space(&ctx);
            prop_assert_eq!(ns.len(), k - a.rank(&ctx));
            for v in &ns {
                prop_assert!(a.mul_vec(&ctx, v).unwrap().iter().all(|e| e.is_zero()));
            }
        }
    }
}
