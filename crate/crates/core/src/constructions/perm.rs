//! Permutations of `F_q` used as the outer maps `h_j`: monomials, Dickson
//! polynomials and explicit tables.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Element, FieldCtx, SubElement};
use crate::oracle::is_permutation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("x^{t} permutes F_q only when gcd(t, q-1) = 1; here q-1 = {q_minus_1}")]
    PowerNotCoprime { t: u64, q_minus_1: u64 },
    #[error("D_{t} permutes F_q only when gcd(t, q^2-1) = 1; here q^2-1 = {modulus}")]
    DicksonNotCoprime { t: u64, modulus: u64 },
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("table entry {0} is outside F_q")]
    OutOfRange(u32),
    #[error("table is not a bijection of F_q")]
    NotBijective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FqPermSpec {
    Power {
        t: u64,
    },
    Dickson {
        t: u64,
    },
    /// Image of each element of `F_q`, by index.
    Table {
        table: Vec<u32>,
    },
}

impl FqPermSpec {
    pub fn validate(&self, ctx: &FieldCtx) -> Result<(), PermError> {
        let q = ctx.q() as u64;
        match self {
            FqPermSpec::Power { t: 0 } | FqPermSpec::Dickson { t: 0 } => Err(PermError::ZeroDegree),
            FqPermSpec::Power { t } => {
                if t.gcd(&(q - 1)) != 1 {
                    return Err(PermError::PowerNotCoprime {
                        t: *t,
                        q_minus_1: q - 1,
                    });
                }
                Ok(())
            }
            FqPermSpec::Dickson { t } => {
                if t.gcd(&(q * q - 1)) != 1 {
                    return Err(PermError::DicksonNotCoprime {
                        t: *t,
                        modulus: q * q - 1,
                    });
                }
                Ok(())
            }
            FqPermSpec::Table { table } => {
                if table.len() != q as usize {
                    return Err(PermError::TableLength {
                        expected: q as usize,
                        got: table.len(),
                    });
                }
                if let Some(&bad) = table.iter().find(|&&v| v as u64 >= q) {
                    return Err(PermError::OutOfRange(bad));
                }
                let as_sub: Vec<SubElement> = table.iter().map(|&v| SubElement(v)).collect();
                if !is_permutation(&as_sub) {
                    return Err(PermError::NotBijective);
                }
                Ok(())
            }
        }
    }

    /// Assumes [`FqPermSpec::validate`] has passed.
    pub fn eval(&self, ctx: &FieldCtx, c: SubElement) -> SubElement {
        match self {
            FqPermSpec::Power { t } => ctx.fq_pow(c, *t),
            FqPermSpec::Dickson { t } => dickson_eval(ctx, *t, c),
            FqPermSpec::Table { table } => SubElement(table[c.index() as usize]),
        }
    }

    pub fn table(&self, ctx: &FieldCtx) -> Vec<SubElement> {
        ctx.sub_elements().map(|c| self.eval(ctx, c)).collect()
    }
}

/// `D_t(x, 1)` by `D_0 = 2`, `D_1 = x`, `D_t = x·D_{t−1} − D_{t−2}`.
pub fn dickson_eval(ctx: &FieldCtx, t: u64, x: SubElement) -> SubElement {
    let two = ctx.fq_add(SubElement::ONE, SubElement::ONE);
    let (mut prev, mut cur) = (two, x);
    if t == 0 {
        return two;
    }
    for _ in 1..t {
        let next = ctx.fq_sub(ctx.fq_mul(x, cur), prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// The same recurrence evaluated in the top field.
pub fn dickson_eval_top(ctx: &FieldCtx, t: u64, x: Element) -> Element {
    let two = ctx.from_int(2);
    let (mut prev, mut cur) = (two, x);
    if t == 0 {
        return two;
    }
    for _ in 1..t {
        let next = ctx.sub(ctx.mul(x, cur), prev);
        prev = cur;
        cur = next;
    }
    cur
}
