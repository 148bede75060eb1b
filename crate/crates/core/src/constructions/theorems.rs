//! The four criteria and the maps they decide.
//!
//! * kernel form: `F(x) = L(x) + Σ γ_j·h_j(f_j(x))` with `γ` a basis of
//!   `Ker(L)`, `Ker(L) ∩ Im(L) = {0}`, `h_j` permutations of `F_q`; permutes
//!   iff `det(b_ij) ≠ 0`.
//! * shift form: `F(x) = x + Σ γ_j·f_j(x)` with independent `γ`; permutes iff
//!   `rank(I + A) = k`, and is `q^l`-to-1 when the rank is `k − l`.
//! * complete mapping: the shift form with `F + id` also a permutation, iff
//!   `rank(I + A) = rank(2I + A) = k` (odd characteristic).
//! * trace sum: `F(x) = L(x) + Σ γ_i·Tr(h_i(x))` with `γ ⊆ Ker(L)`; permutes
//!   iff for every nonzero `ε ∈ Ker(L)` and every `x` some `i` has
//!   `Tr(h_i(x + ε) − h_i(x)) ≠ 0`.

use rayon::prelude::*;

use super::perm::FqPermSpec;
use super::{CheckOptions, Hypothesis, Theorem};
use crate::field::{Element, FieldCtx, SubElement};
use crate::linalg::FqMatrix;
use crate::linearized::{rank_of, LinearizedPoly, SubspaceBasis};
use crate::oracle::{is_permutation, FiberHistogram};
use crate::translators::{translator_matrix, FqMap, SelfMap, TranslatorError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelInstance {
    pub l: LinearizedPoly,
    pub gammas: Vec<Element>,
    pub hs: Vec<FqPermSpec>,
    pub fs: Vec<FqMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftInstance {
    pub gammas: Vec<Element>,
    pub fs: Vec<FqMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSumInstance {
    pub l: LinearizedPoly,
    pub gammas: Vec<Element>,
    pub hs: Vec<SelfMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Kernel(KernelInstance),
    Shift(ShiftInstance),
    TraceSum(TraceSumInstance),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Criterion {
    Det {
        matrix: FqMatrix,
        det: SubElement,
    },
    Rank {
        translator: FqMatrix,
        shifted: FqMatrix,
        rank: usize,
        k: usize,
        /// `q^{k − rank}`.
        fiber_size: u64,
    },
    RankPair {
        translator: FqMatrix,
        shifted: FqMatrix,
        doubled: FqMatrix,
        rank: usize,
        doubled_rank: usize,
        k: usize,
    },
    TraceDifference {
        l: usize,
        kernel_dim: usize,
        /// A pair `(x, ε)` at which every trace difference vanishes.
        witness: Option<(Element, Element)>,
    },
}

impl Criterion {
    /// The matrix whose determinant or rank decides the verdict.
    pub fn deciding_matrix(&self) -> Option<&FqMatrix> {
        match self {
            Criterion::Det { matrix, .. } => Some(matrix),
            Criterion::Rank { shifted, .. } | Criterion::RankPair { shifted, .. } => Some(shifted),
            Criterion::TraceDifference { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub theorem: Theorem,
    pub criterion: Criterion,
    pub criterion_verdict: bool,
    pub oracle_verdict: Option<bool>,
    pub histogram: Option<FiberHistogram>,
    /// `None` when the oracle was off; otherwise whether the oracle confirmed
    /// the verdict and, for the shift form, the predicted fiber shape.
    pub agreement: Option<bool>,
    pub table: Vec<Element>,
}

impl Outcome {
    pub fn disagrees(&self) -> bool {
        self.agreement == Some(false)
    }
}

impl Instance {
    pub fn theorem_default(&self) -> Theorem {
        match self {
            Instance::Kernel(_) => Theorem::Kernel,
            Instance::Shift(_) => Theorem::Shift,
            Instance::TraceSum(_) => Theorem::TraceSum,
        }
    }
}

/// Runs the criterion for `theorem` on `instance` (the complete-mapping test
/// takes a shift instance).
pub fn evaluate(
    ctx: &FieldCtx,
    theorem: Theorem,
    instance: &Instance,
    opts: CheckOptions,
) -> Result<Outcome, Hypothesis> {
    match (theorem, instance) {
        (Theorem::Kernel, Instance::Kernel(i)) => evaluate_kernel(ctx, i, opts),
        (Theorem::Shift, Instance::Shift(i)) => evaluate_shift(ctx, i, opts, false),
        (Theorem::Complete, Instance::Shift(i)) => evaluate_shift(ctx, i, opts, true),
        (Theorem::TraceSum, Instance::TraceSum(i)) => evaluate_trace_sum(ctx, i, opts),
        _ => Err(Hypothesis::Precondition(format!(
            "theorem {theorem} cannot be applied to this instance shape"
        ))),
    }
}

fn translator_hypothesis(e: TranslatorError) -> Hypothesis {
    match e {
        TranslatorError::NotATranslator { i, j } => Hypothesis::NotATranslator { i, j },
        TranslatorError::ZeroAlpha => Hypothesis::Dependent,
        other => Hypothesis::Precondition(other.to_string()),
    }
}

fn check_count(what: &'static str, expected: usize, got: usize) -> Result<(), Hypothesis> {
    if expected != got {
        return Err(Hypothesis::CountMismatch { what, expected, got });
    }
    Ok(())
}

fn check_in_kernel(ctx: &FieldCtx, l: &LinearizedPoly, gammas: &[Element]) -> Result<(), Hypothesis> {
    for (i, &g) in gammas.iter().enumerate() {
        if !l.eval(ctx, g).is_zero() {
            return Err(Hypothesis::NotInKernel { i: i + 1 });
        }
    }
    if rank_of(ctx, gammas) != gammas.len() {
        return Err(Hypothesis::Dependent);
    }
    Ok(())
}

fn oracle_parts(table: &[Element], opts: CheckOptions) -> (Option<bool>, Option<FiberHistogram>) {
    if !opts.oracle {
        return (None, None);
    }
    let hist = FiberHistogram::of(table);
    (Some(hist.is_permutation()), Some(hist))
}

fn evaluate_kernel(ctx: &FieldCtx, inst: &KernelInstance, opts: CheckOptions) -> Result<Outcome, Hypothesis> {
    let st = inst.l.structure(ctx);
    let k = st.kernel.dim();
    if k == 0 {
        return Err(Hypothesis::KernelDimension {
            expected: inst.gammas.len(),
            got: 0,
        });
    }
    if inst.gammas.len() != k {
        return Err(Hypothesis::KernelDimension {
            expected: inst.gammas.len(),
            got: k,
        });
    }
    if !st.trivial_intersection {
        return Err(Hypothesis::NontrivialIntersection);
    }
    check_in_kernel(ctx, &inst.l, &inst.gammas)?;
    check_count("permutations h", k, inst.hs.len())?;
    check_count("functions f", k, inst.fs.len())?;
    for (j, h) in inst.hs.iter().enumerate() {
        h.validate(ctx)
            .map_err(|source| Hypothesis::NotAPermutation { j: j + 1, source })?;
    }
    let matrix = translator_matrix(ctx, &inst.gammas, &inst.fs).map_err(translator_hypothesis)?;
    let det = matrix.det(ctx).expect("square");
    let criterion_verdict = !det.is_zero() ^ opts.flip_criterion;

    let l_table = inst.l.table(ctx);
    let h_tables: Vec<Vec<SubElement>> = inst.hs.iter().map(|h| h.table(ctx)).collect();
    let table: Vec<Element> = ctx
        .elements()
        .map(|x| {
            let xi = x.index() as usize;
            inst.gammas
                .iter()
                .zip(&h_tables)
                .zip(&inst.fs)
                .fold(l_table[xi], |acc, ((&g, h), f)| {
                    ctx.add(acc, ctx.scale(h[f.table()[xi].index() as usize], g))
                })
        })
        .collect();
    let (oracle_verdict, histogram) = oracle_parts(&table, opts);
    Ok(Outcome {
        theorem: Theorem::Kernel,
        criterion: Criterion::Det { matrix, det },
        criterion_verdict,
        agreement: oracle_verdict.map(|o| o == criterion_verdict),
        oracle_verdict,
        histogram,
        table,
    })
}

fn shift_table(ctx: &FieldCtx, inst: &ShiftInstance, base: Element) -> Vec<Element> {
    ctx.elements()
        .map(|x| {
            inst.gammas
                .iter()
                .zip(&inst.fs)
                .fold(ctx.mul(base, x), |acc, (&g, f)| ctx.add(acc, ctx.scale(f.apply(x), g)))
        })
        .collect()
}

fn evaluate_shift(
    ctx: &FieldCtx,
    inst: &ShiftInstance,
    opts: CheckOptions,
    complete: bool,
) -> Result<Outcome, Hypothesis> {
    let k = inst.gammas.len();
    if k == 0 {
        return Err(Hypothesis::CountMismatch {
            what: "gammas (at least one)",
            expected: 1,
            got: 0,
        });
    }
    check_count("functions f", k, inst.fs.len())?;
    if rank_of(ctx, &inst.gammas) != k {
        return Err(Hypothesis::Dependent);
    }
    if complete && ctx.p() == 2 {
        return Err(Hypothesis::CharacteristicTwo);
    }
    let translator = translator_matrix(ctx, &inst.gammas, &inst.fs).map_err(translator_hypothesis)?;
    let shifted = translator.plus_scalar_identity(ctx, SubElement::ONE).expect("square");
    let rank = shifted.rank(ctx);
    let table = shift_table(ctx, inst, Element::ONE);
    let (oracle_verdict, histogram) = oracle_parts(&table, opts);

    if !complete {
        let l = k - rank;
        let fiber_size = (ctx.q() as u64).pow(l as u32);
        let criterion_verdict = (rank == k) ^ opts.flip_criterion;
        let agreement = histogram.as_ref().map(|h| {
            let shape_ok = if l == 0 {
                true
            } else {
                let order = ctx.order() as usize;
                let hit = order / fiber_size as usize;
                let mut expect = FiberHistogram::default();
                expect.counts.insert(0, order - hit);
                expect.counts.insert(fiber_size as usize, hit);
                *h == expect
            };
            shape_ok && h.is_permutation() == criterion_verdict
        });
        return Ok(Outcome {
            theorem: Theorem::Shift,
            criterion: Criterion::Rank {
                translator,
                shifted,
                rank,
                k,
                fiber_size,
            },
            criterion_verdict,
            oracle_verdict,
            histogram,
            agreement,
            table,
        });
    }

    let two = ctx.fq_add(SubElement::ONE, SubElement::ONE);
    let doubled = translator.plus_scalar_identity(ctx, two).expect("square");
    let doubled_rank = doubled.rank(ctx);
    let criterion_verdict = (rank == k && doubled_rank == k) ^ opts.flip_criterion;
    let oracle_verdict =
        oracle_verdict.map(|f_perm| f_perm && is_permutation(&shift_table(ctx, inst, ctx.from_int(2))));
    Ok(Outcome {
        theorem: Theorem::Complete,
        criterion: Criterion::RankPair {
            translator,
            shifted,
            doubled,
            rank,
            doubled_rank,
            k,
        },
        criterion_verdict,
        agreement: oracle_verdict.map(|o| o == criterion_verdict),
        oracle_verdict,
        histogram,
        table,
    })
}

/// Finds `(x, ε)` with `ε ≠ 0` in `Ker(L)` and `Tr(h_i(x + ε)) = Tr(h_i(x))`
/// for every `i`, if one exists. Two points differ by a kernel element
/// exactly when `L` agrees on them, so this is a collision search on the
/// key `(L(x), Tr(h_1(x)), …)`.
pub fn trace_difference_witness(
    ctx: &FieldCtx,
    l_table: &[Element],
    trace_tables: &[Vec<SubElement>],
) -> Option<(Element, Element)> {
    let q = ctx.q() as u64;
    let mut keyed: Vec<(u64, u32)> = ctx
        .elements()
        .map(|x| {
            let xi = x.index() as usize;
            let key = trace_tables
                .iter()
                .fold(l_table[xi].index() as u64, |acc, t| acc * q + t[xi].index() as u64);
            (key, x.index())
        })
        .collect();
    keyed.par_sort_unstable();
    keyed.windows(2).find(|w| w[0].0 == w[1].0).map(|w| {
        let x = Element(w[0].1);
        let y = Element(w[1].1);
        (x, ctx.sub(y, x))
    })
}

/// The same criterion by direct quantification over `ε ∈ Ker(L) \ {0}` and
/// all `x`; quadratic, kept for cross-checking on small fields.
pub fn trace_difference_witness_direct(
    ctx: &FieldCtx,
    kernel: &SubspaceBasis,
    hs: &[SelfMap],
) -> Option<(Element, Element)> {
    for eps in kernel.span(ctx).into_iter().filter(|e| !e.is_zero()) {
        for x in ctx.elements() {
            let shifted = ctx.add(x, eps);
            let all_vanish = hs
                .iter()
                .all(|h| ctx.trace(ctx.sub(h.apply(shifted), h.apply(x))).is_zero());
            if all_vanish {
                return Some((x, eps));
            }
        }
    }
    None
}

/// The stronger condition with a single index serving every `(x, ε)`.
/// Sufficient for the trace-sum form to permute but not necessary.
pub fn single_index_condition(ctx: &FieldCtx, kernel: &SubspaceBasis, hs: &[SelfMap]) -> bool {
    let nonzero: Vec<Element> = kernel.span(ctx).into_iter().filter(|e| !e.is_zero()).collect();
    hs.iter().any(|h| {
        nonzero.iter().all(|&eps| {
            ctx.elements()
                .all(|x| !ctx.trace(ctx.sub(h.apply(ctx.add(x, eps)), h.apply(x))).is_zero())
        })
    })
}

fn evaluate_trace_sum(ctx: &FieldCtx, inst: &TraceSumInstance, opts: CheckOptions) -> Result<Outcome, Hypothesis> {
    let st = inst.l.structure(ctx);
    let k = st.kernel.dim();
    if k == 0 {
        return Err(Hypothesis::KernelDimension {
            expected: inst.gammas.len(),
            got: 0,
        });
    }
    if !st.trivial_intersection {
        return Err(Hypothesis::NontrivialIntersection);
    }
    let l = inst.gammas.len();
    if l == 0 || l > k {
        return Err(Hypothesis::TooManyGammas { l, k });
    }
    check_in_kernel(ctx, &inst.l, &inst.gammas)?;
    check_count("maps h", l, inst.hs.len())?;

    let l_table = inst.l.table(ctx);
    let trace_tables: Vec<Vec<SubElement>> = inst
        .hs
        .iter()
        .map(|h| h.table().iter().map(|&v| ctx.trace(v)).collect())
        .collect();
    let witness = trace_difference_witness(ctx, &l_table, &trace_tables);
    let criterion_verdict = witness.is_none() ^ opts.flip_criterion;
    let table: Vec<Element> = ctx
        .elements()
        .map(|x| {
            let xi = x.index() as usize;
            inst.gammas
                .iter()
                .zip(&trace_tables)
                .fold(l_table[xi], |acc, (&g, t)| ctx.add(acc, ctx.scale(t[xi], g)))
        })
        .collect();
    let (oracle_verdict, histogram) = oracle_parts(&table, opts);
    Ok(Outcome {
        theorem: Theorem::TraceSum,
        criterion: Criterion::TraceDifference {
            l,
            kernel_dim: k,
            witness,
        },
        criterion_verdict,
        agreement: oracle_verdict.map(|o| o == criterion_verdict),
        oracle_verdict,
        histogram,
        table,
    })
}
