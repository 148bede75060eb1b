//! JSON encodings of field elements and matrices.
//!
//! An element is accepted either as its canonical index or as its nested
//! coefficient array (little-endian in both layers), or as an object carrying
//! both, which must then agree. Scalars are emitted in the two-part object
//! form; long tables are emitted as bare indices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Element, FieldCtx, FieldError, SubElement};
use crate::linalg::FqMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("index {index} and coefficients {coeffs} name different elements")]
    Inconsistent { index: u64, coeffs: String },
    #[error("matrix shape: {0}")]
    Shape(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementWire {
    Index(u64),
    Coeffs(Vec<Vec<u64>>),
    Full { index: u64, coeffs: Vec<Vec<u64>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SubElementWire {
    Index(u64),
    Coeffs(Vec<u64>),
    Full { index: u64, coeffs: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixWire {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<SubElementWire>>,
}

fn widen(rows: Vec<Vec<u32>>) -> Vec<Vec<u64>> {
    rows.into_iter()
        .map(|r| r.into_iter().map(u64::from).collect())
        .collect()
}

impl ElementWire {
    pub fn encode(ctx: &FieldCtx, x: Element) -> Self {
        ElementWire::Full {
            index: x.index() as u64,
            coeffs: widen(ctx.coeffs(x)),
        }
    }

    pub fn decode(&self, ctx: &FieldCtx) -> Result<Element, WireError> {
        match self {
            ElementWire::Index(i) => Ok(ctx.element(*i)?),
            ElementWire::Coeffs(c) => Ok(ctx.from_coeffs(c)?),
            ElementWire::Full { index, coeffs } => {
                let by_index = ctx.element(*index)?;
                if ctx.from_coeffs(coeffs)? != by_index {
                    return Err(WireError::Inconsistent {
                        index: *index,
                        coeffs: format!("{coeffs:?}"),
                    });
                }
                Ok(by_index)
            }
        }
    }
}

impl SubElementWire {
    pub fn encode(ctx: &FieldCtx, c: SubElement) -> Self {
        SubElementWire::Full {
            index: c.index() as u64,
            coeffs: ctx.sub_coeffs(c).into_iter().map(u64::from).collect(),
        }
    }

    pub fn decode(&self, ctx: &FieldCtx) -> Result<SubElement, WireError> {
        match self {
            SubElementWire::Index(i) => Ok(ctx.sub_element(*i)?),
            SubElementWire::Coeffs(c) => Ok(ctx.sub_from_coeffs(c)?),
            SubElementWire::Full { index, coeffs } => {
                let by_index = ctx.sub_element(*index)?;
                if ctx.sub_from_coeffs(coeffs)? != by_index {
                    return Err(WireError::Inconsistent {
                        index: *index,
                        coeffs: format!("{coeffs:?}"),
                    });
                }
                Ok(by_index)
            }
        }
    }
}

impl MatrixWire {
    /// Entries are emitted as bare indices.
    pub fn encode(m: &FqMatrix) -> Self {
        MatrixWire {
            rows: m.rows(),
            cols: m.cols(),
            entries: m
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|c| SubElementWire::Index(c.index() as u64)).collect())
                .collect(),
        }
    }

    pub fn decode(&self, ctx: &FieldCtx) -> Result<FqMatrix, WireError> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(WireError::Shape(format!(
                "declared {}x{} but entries do not match",
                self.rows, self.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .flatten()
            .map(|e| e.decode(ctx))
            .collect::<Result<Vec<_>, _>>()?;
        FqMatrix::new(self.rows, self.cols, entries).map_err(|e| WireError::Shape(e.to_string()))
    }
}

pub fn encode_elements(ctx: &FieldCtx, xs: &[Element]) -> Vec<ElementWire> {
    xs.iter().map(|&x| ElementWire::encode(ctx, x)).collect()
}

pub fn decode_elements(ctx: &FieldCtx, xs: &[ElementWire]) -> Result<Vec<Element>, WireError> {
    xs.iter().map(|x| x.decode(ctx)).collect()
}

/// Bare indices for a table of elements.
pub fn table_indices<T: crate::field::Indexed>(table: &[T]) -> Vec<u32> {
    table.iter().map(|v| v.index()).collect()
}

pub fn element_table(ctx: &FieldCtx, indices: &[u32]) -> Result<Vec<Element>, WireError> {
    indices.iter().map(|&i| Ok(ctx.element(i as u64)?)).collect()
}

pub fn sub_element_table(ctx: &FieldCtx, indices: &[u32]) -> Result<Vec<SubElement>, WireError> {
    indices.iter().map(|&i| Ok(ctx.sub_element(i as u64)?)).collect()
}
