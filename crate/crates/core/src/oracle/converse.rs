//! Exhaustive checks of the trace representation `f(x) = Tr(βx + H(L(x)))`
//! with `L` non-bijective: every such `f` has each nonzero `α ∈ Ker(L)` as a
//! `Tr(αβ)`-translator, and on tiny fields every `f` with a translator arises
//! this way.
//!
//! `H` only enters through `Tr(H(y))` for `y ∈ Im(L)`, so the reduced search
//! ranges over maps `c: Im(L) → F_q` realised as `H(y) = c(y)·t` with
//! `Tr(t) = 1`. The full search enumerates every `H` literally and is only
//! feasible on `F_4`.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::field::{Element, FieldCtx, SubElement};
use crate::linearized::LinearizedPoly;
use crate::translators::{all_translators, make_translator_map, translator_coefficient, FqMap, SelfMap};

/// Largest number of functions `F_{q^m} → F_q` the converse search will
/// enumerate.
pub const MAX_FUNCTIONS: u64 = 1 << 15;
/// Largest number of self-maps `H` the literal search will enumerate.
pub const MAX_LITERAL_MAPS: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HSearch {
    /// Every map `H: F_{q^m} → F_{q^m}`.
    Full,
    /// Every map `Im(L) → F_q`, lifted through an element of trace one.
    TraceReduced,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConverseError {
    #[error("field too large for exhaustive search: {0}")]
    TooLarge(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct ForwardReport {
    pub search: HSearch,
    pub maps_checked: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConverseReport {
    pub search: HSearch,
    pub functions: usize,
    pub with_translators: usize,
    pub representable: usize,
    /// Functions with a translator that no `(β, H, L)` produces.
    pub unrepresentable: Vec<Vec<u32>>,
    /// Produced functions that nonetheless have no translator.
    pub representable_without_translators: Vec<Vec<u32>>,
}

impl ConverseReport {
    pub fn is_clean(&self) -> bool {
        self.unrepresentable.is_empty() && self.representable_without_translators.is_empty()
    }
}

pub fn non_bijective_linearized(ctx: &FieldCtx) -> Vec<LinearizedPoly> {
    let order = ctx.order() as u64;
    let m = ctx.m();
    (0..order.pow(m as u32))
        .filter_map(|mut code| {
            let coeffs = (0..m)
                .map(|_| {
                    let c = Element((code % order) as u32);
                    code /= order;
                    c
                })
                .collect();
            let l = LinearizedPoly::new(ctx, coeffs).expect("length m");
            (!l.structure(ctx).bijective).then_some(l)
        })
        .collect()
}

fn unit_trace_element(ctx: &FieldCtx) -> Element {
    ctx.elements()
        .find(|&t| ctx.trace(t) == SubElement::ONE)
        .expect("the trace is onto")
}

fn literal_cap(ctx: &FieldCtx) -> Result<(), ConverseError> {
    let order = ctx.order() as u64;
    if order.checked_pow(order as u32).is_none_or(|n| n > MAX_LITERAL_MAPS) {
        return Err(ConverseError::TooLarge(format!(
            "{order}^{order} maps H exceed {MAX_LITERAL_MAPS}"
        )));
    }
    Ok(())
}

/// Calls `visit` with every `H` the chosen search considers for `L`.
fn for_each_h(ctx: &FieldCtx, l: &LinearizedPoly, search: HSearch, mut visit: impl FnMut(SelfMap)) {
    let order = ctx.order() as u64;
    match search {
        HSearch::Full => {
            for mut code in 0..order.pow(order as u32) {
                let table = (0..order)
                    .map(|_| {
                        let v = Element((code % order) as u32);
                        code /= order;
                        v
                    })
                    .collect();
                visit(SelfMap::from_table(ctx, table).expect("in range"));
            }
        }
        HSearch::TraceReduced => {
            let mut image: Vec<Element> = l.table(ctx);
            image.sort();
            image.dedup();
            let t = unit_trace_element(ctx);
            let q = ctx.q() as u64;
            for mut code in 0..q.pow(image.len() as u32) {
                let mut table = vec![Element::ZERO; order as usize];
                for y in &image {
                    table[y.index() as usize] = ctx.scale(SubElement((code % q) as u32), t);
                    code /= q;
                }
                visit(SelfMap::from_table(ctx, table).expect("in range"));
            }
        }
    }
}

fn betas_and_ls(ctx: &FieldCtx) -> (Vec<Element>, Vec<LinearizedPoly>) {
    (ctx.elements().collect(), non_bijective_linearized(ctx))
}

/// Every `(β, H, L)` yields a map with each nonzero kernel element of `L` as
/// a `Tr(αβ)`-translator.
pub fn forward_exhaustive(ctx: &FieldCtx, search: HSearch) -> Result<ForwardReport, ConverseError> {
    if search == HSearch::Full {
        literal_cap(ctx)?;
    }
    let (betas, ls) = betas_and_ls(ctx);
    let mut report = ForwardReport {
        search,
        maps_checked: 0,
        failures: Vec::new(),
    };
    for l in &ls {
        let kernel: Vec<Element> = l
            .structure(ctx)
            .kernel
            .span(ctx)
            .into_iter()
            .filter(|a| !a.is_zero())
            .collect();
        for_each_h(ctx, l, search, |h| {
            for &beta in &betas {
                let f = make_translator_map(ctx, beta, h.clone(), l.clone()).expect("L is not bijective");
                report.maps_checked += 1;
                for &alpha in &kernel {
                    let expected = ctx.trace(ctx.mul(alpha, beta));
                    let got = translator_coefficient(ctx, &f, alpha).expect("alpha is nonzero");
                    if got != Some(expected) {
                        report.failures.push(format!(
                            "L = {:?}, beta = {beta}, alpha = {alpha}: expected {expected}, got {got:?}",
                            l.coeffs()
                        ));
                    }
                }
            }
        });
    }
    Ok(report)
}

/// Compares the set of functions with a translator against the set of
/// trace representations, over all `q^{q^m}` functions.
pub fn converse_exhaustive(ctx: &FieldCtx, search: HSearch) -> Result<ConverseReport, ConverseError> {
    let q = ctx.q() as u64;
    let order = ctx.order() as u64;
    let functions = q
        .checked_pow(order as u32)
        .filter(|&n| n <= MAX_FUNCTIONS)
        .ok_or_else(|| ConverseError::TooLarge(format!("{q}^{order} functions exceed {MAX_FUNCTIONS}")))?;
    if search == HSearch::Full {
        literal_cap(ctx)?;
    }

    let (betas, ls) = betas_and_ls(ctx);
    let mut representable: HashSet<Vec<u32>> = HashSet::new();
    for l in &ls {
        for_each_h(ctx, l, search, |h| {
            for &beta in &betas {
                let f = make_translator_map(ctx, beta, h.clone(), l.clone()).expect("L is not bijective");
                representable.insert(f.table().iter().map(|c| c.index()).collect());
            }
        });
    }

    let mut report = ConverseReport {
        search,
        functions: functions as usize,
        with_translators: 0,
        representable: representable.len(),
        unrepresentable: Vec::new(),
        representable_without_translators: Vec::new(),
    };
    for mut code in 0..functions {
        let table: Vec<u32> = (0..order)
            .map(|_| {
                let v = (code % q) as u32;
                code /= q;
                v
            })
            .collect();
        let f = FqMap::from_table(ctx, table.iter().map(|&v| SubElement(v)).collect()).expect("in range");
        let has = !all_translators(ctx, &f).is_empty();
        let rep = representable.contains(&table);
        report.with_translators += usize::from(has);
        match (has, rep) {
            (true, false) => report.unrepresentable.push(table),
            (false, true) => report.representable_without_translators.push(table),
            _ => {}
        }
    }
    Ok(report)
}
