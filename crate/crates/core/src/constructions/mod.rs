//! Permutation constructions, their exact criteria, and certificates that
//! pair each criterion verdict with a brute-force one.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod certificate;
pub mod corollaries;
pub mod perm;
pub mod theorems;

pub use certificate::Certificate;
pub use perm::{dickson_eval, FqPermSpec, PermError};
pub use theorems::{evaluate, Criterion, Instance, KernelInstance, Outcome, ShiftInstance, TraceSumInstance};

use crate::field::FieldCtx;

/// Which criterion decides a construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theorem {
    /// `L(x) + Σ γ_j h_j(f_j(x))`, decided by a determinant.
    #[serde(rename = "2.1")]
    Kernel,
    /// `x + Σ γ_j f_j(x)`, decided by `rank(I + A)`.
    #[serde(rename = "2.2")]
    Shift,
    /// Complete mappings of the shift form.
    #[serde(rename = "2.10")]
    Complete,
    /// `L(x) + Σ γ_i Tr(h_i(x))`, decided by trace differences.
    #[serde(rename = "3.1")]
    TraceSum,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [Theorem::Kernel, Theorem::Shift, Theorem::TraceSum, Theorem::Complete];

    pub fn label(self) -> &'static str {
        match self {
            Theorem::Kernel => "2.1",
            Theorem::Shift => "2.2",
            Theorem::Complete => "2.10",
            Theorem::TraceSum => "3.1",
        }
    }

    pub fn from_label(s: &str) -> Option<Theorem> {
        Theorem::ALL.into_iter().find(|t| t.label() == s)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Compute the brute-force verdict and enforce agreement.
    pub oracle: bool,
    /// Invert the criterion verdict. Only for exercising the disagreement path.
    pub flip_criterion: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            oracle: true,
            flip_criterion: false,
        }
    }
}

/// A named hypothesis of a construction that the input fails.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Hypothesis {
    #[error("expected a kernel of dimension {expected}, found dimension {got}")]
    KernelDimension { expected: usize, got: usize },
    #[error("Ker(L) and Im(L) intersect nontrivially")]
    NontrivialIntersection,
    #[error("gamma {i} is not in Ker(L)")]
    NotInKernel { i: usize },
    #[error("the gammas are linearly dependent over F_q")]
    Dependent,
    #[error("expected {expected} {what}, got {got}")]
    CountMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("h {j} is not a permutation of F_q: {source}")]
    NotAPermutation { j: usize, source: PermError },
    #[error("gamma {i} is not a linear translator of f {j}")]
    NotATranslator { i: usize, j: usize },
    #[error("requires odd characteristic")]
    CharacteristicTwo,
    #[error("need 1 <= l <= k gammas, got l = {l} with kernel dimension k = {k}")]
    TooManyGammas { l: usize, k: usize },
    #[error("{0}")]
    Precondition(String),
}

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] Hypothesis),
    #[error("criterion verdict and brute-force verdict disagree")]
    Disagreement(Box<Certificate>),
}

/// A corollary's own prediction of the deciding matrix, plus the commonly
/// quoted variant when one exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub variant: String,
    pub predicted: crate::linalg::FqMatrix,
    pub printed: Option<crate::linalg::FqMatrix>,
    pub notes: Vec<String>,
}

/// Evaluates and certifies. A disagreement between criterion and oracle, or
/// between a corollary's predicted matrix and the generic one, is returned as
/// an error carrying the full certificate.
pub fn certify(
    ctx: &FieldCtx,
    theorem: Theorem,
    instance: &Instance,
    prediction: Option<&Prediction>,
    opts: CheckOptions,
) -> Result<Certificate, ConstructionError> {
    let outcome = evaluate(ctx, theorem, instance, opts)?;
    let cert = Certificate::build(ctx, instance, &outcome, prediction);
    let prediction_ok = cert.corollary.as_ref().is_none_or(|c| c.matches_generic);
    if outcome.disagrees() || !prediction_ok {
        return Err(ConstructionError::Disagreement(Box::new(cert)));
    }
    Ok(cert)
}
