//! Serializable certificates: enough of the instance to rebuild it, the
//! criterion payload, both verdicts and the fiber histogram.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::perm::FqPermSpec;
use super::theorems::{evaluate, Criterion, Instance, KernelInstance, Outcome, ShiftInstance, TraceSumInstance};
use super::{CheckOptions, Hypothesis, Prediction, Theorem};
use crate::field::{FieldCtx, FieldError};
use crate::linearized::LinearizedPoly;
use crate::oracle::FiberHistogram;
use crate::translators::{FqMap, SelfMap, TraceForm};
use crate::wire::{
    decode_elements, element_table, encode_elements, sub_element_table, table_indices, ElementWire, MatrixWire,
    SubElementWire, WireError,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldRecord {
    pub p: u64,
    pub n: u64,
    pub m: u64,
    pub q: u64,
    pub order: u64,
    /// Inner modulus over `F_p`, lowest coefficient first, leading one included.
    pub f_mod: Vec<u32>,
    /// Outer modulus over `F_q`, lowest coefficient first, leading one included.
    pub g_mod: Vec<SubElementWire>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfMapRecord {
    pub table: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<ElementWire>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFormRecord {
    pub beta: ElementWire,
    #[serde(rename = "H")]
    pub h: SelfMapRecord,
    #[serde(rename = "L")]
    pub l: Vec<ElementWire>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FqMapRecord {
    pub table: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<TraceFormRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceRecord {
    Kernel {
        #[serde(rename = "L")]
        l: Vec<ElementWire>,
        gammas: Vec<ElementWire>,
        hs: Vec<FqPermSpec>,
        fs: Vec<FqMapRecord>,
    },
    Shift {
        gammas: Vec<ElementWire>,
        fs: Vec<FqMapRecord>,
    },
    TraceSum {
        #[serde(rename = "L")]
        l: Vec<ElementWire>,
        gammas: Vec<ElementWire>,
        hs: Vec<SelfMapRecord>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRecord {
    pub x: ElementWire,
    pub epsilon: ElementWire,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionRecord {
    /// `det`, `rank`, `rank_pair` or `trace_difference`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion_form: Option<String>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translator_matrix: Option<MatrixWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_matrix: Option<MatrixWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<SubElementWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_fiber_size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorollaryRecord {
    pub variant: String,
    /// The corollary's closed-form deciding matrix.
    pub predicted_matrix: MatrixWire,
    pub matches_generic: bool,
    /// The commonly quoted variant of the closed form, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_matrix: Option<MatrixWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub printed_matches_generic: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: u32,
    pub field: FieldRecord,
    pub theorem: Theorem,
    pub instance: InstanceRecord,
    pub criterion: CriterionRecord,
    pub criterion_verdict: bool,
    pub oracle_verdict: Option<bool>,
    pub fiber_histogram: Option<FiberHistogram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corollary: Option<CorollaryRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecordError {
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyFailure {
    #[error("malformed certificate: {0}")]
    Malformed(#[from] RecordError),
    #[error("certified instance violates a hypothesis: {0}")]
    Hypothesis(#[from] Hypothesis),
    #[error("certificate does not match recomputation in: {}", .0.join(", "))]
    Mismatch(Vec<String>),
    #[error("recomputed criterion and brute-force verdicts disagree")]
    Disagreement,
}

impl FieldRecord {
    pub fn encode(ctx: &FieldCtx) -> Self {
        FieldRecord {
            p: ctx.p() as u64,
            n: ctx.n() as u64,
            m: ctx.m() as u64,
            q: ctx.q() as u64,
            order: ctx.order() as u64,
            f_mod: ctx.f_mod().to_vec(),
            g_mod: ctx
                .g_mod()
                .into_iter()
                .map(|c| SubElementWire::encode(ctx, c))
                .collect(),
        }
    }

    /// Rebuilds the context; the recorded moduli must be the canonical ones.
    pub fn context(&self, cap: u64) -> Result<FieldCtx, RecordError> {
        let ctx = FieldCtx::with_cap(self.p, self.n, self.m, cap)?;
        let g_mod = self
            .g_mod
            .iter()
            .map(|c| c.decode(&ctx))
            .collect::<Result<Vec<_>, _>>()?;
        if self.q != ctx.q() as u64
            || self.order != ctx.order() as u64
            || self.f_mod != ctx.f_mod()
            || g_mod != ctx.g_mod()
        {
            return Err(RecordError::Invalid(
                "field record does not match the canonical field".into(),
            ));
        }
        Ok(ctx)
    }
}

impl SelfMapRecord {
    pub fn encode(ctx: &FieldCtx, h: &SelfMap) -> Self {
        SelfMapRecord {
            table: table_indices(h.table()),
            poly: h.poly().map(|c| encode_elements(ctx, c)),
        }
    }

    pub fn decode(&self, ctx: &FieldCtx) -> Result<SelfMap, RecordError> {
        let table = element_table(ctx, &self.table)?;
        match &self.poly {
            Some(coeffs) => {
                let built = SelfMap::polynomial(ctx, decode_elements(ctx, coeffs)?);
                if built.table() != table.as_slice() {
                    return Err(RecordError::Invalid("map table disagrees with its polynomial".into()));
                }
                Ok(built)
            }
            None => SelfMap::from_table(ctx, table).map_err(|e| RecordError::Invalid(e.to_string())),
        }
    }
}

fn decode_linearized(ctx: &FieldCtx, coeffs: &[ElementWire]) -> Result<LinearizedPoly, RecordError> {
    LinearizedPoly::new(ctx, decode_elements(ctx, coeffs)?).map_err(|e| RecordError::Invalid(e.to_string()))
}

impl FqMapRecord {
    pub fn encode(ctx: &FieldCtx, f: &FqMap) -> Self {
        FqMapRecord {
            table: table_indices(f.table()),
            description: f.description().map(|d| TraceFormRecord {
                beta: ElementWire::encode(ctx, d.beta),
                h: SelfMapRecord::encode(ctx, &d.h),
                l: encode_elements(ctx, d.l.coeffs()),
            }),
        }
    }

    pub fn decode(&self, ctx: &FieldCtx) -> Result<FqMap, RecordError> {
        let table = sub_element_table(ctx, &self.table)?;
        let built = match &self.description {
            Some(d) => {
                let form = TraceForm {
                    beta: d.beta.decode(ctx)?,
                    h: d.h.decode(ctx)?,
                    l: decode_linearized(ctx, &d.l)?,
                };
                FqMap::with_description(ctx, table, form)
            }
            None => FqMap::from_table(ctx, table),
        };
        built.map_err(|e| RecordError::Invalid(e.to_string()))
    }
}

impl InstanceRecord {
    pub fn encode(ctx: &FieldCtx, instance: &Instance) -> Self {
        let fs = |fs: &[FqMap]| fs.iter().map(|f| FqMapRecord::encode(ctx, f)).collect();
        match instance {
            Instance::Kernel(i) => InstanceRecord::Kernel {
                l: encode_elements(ctx, i.l.coeffs()),
                gammas: encode_elements(ctx, &i.gammas),
                hs: i.hs.clone(),
                fs: fs(&i.fs),
            },
            Instance::Shift(i) => InstanceRecord::Shift {
                gammas: encode_elements(ctx, &i.gammas),
                fs: fs(&i.fs),
            },
            Instance::TraceSum(i) => InstanceRecord::TraceSum {
                l: encode_elements(ctx, i.l.coeffs()),
                gammas: encode_elements(ctx, &i.gammas),
                hs: i.hs.iter().map(|h| SelfMapRecord::encode(ctx, h)).collect(),
            },
        }
    }

    pub fn decode(&self, ctx: &FieldCtx) -> Result<Instance, RecordError> {
        let fs = |fs: &[FqMapRecord]| fs.iter().map(|f| f.decode(ctx)).collect::<Result<Vec<_>, _>>();
        Ok(match self {
            InstanceRecord::Kernel { l, gammas, hs, fs: f } => Instance::Kernel(KernelInstance {
                l: decode_linearized(ctx, l)?,
                gammas: decode_elements(ctx, gammas)?,
                hs: hs.clone(),
                fs: fs(f)?,
            }),
            InstanceRecord::Shift { gammas, fs: f } => Instance::Shift(ShiftInstance {
                gammas: decode_elements(ctx, gammas)?,
                fs: fs(f)?,
            }),
            InstanceRecord::TraceSum { l, gammas, hs } => Instance::TraceSum(TraceSumInstance {
                l: decode_linearized(ctx, l)?,
                gammas: decode_elements(ctx, gammas)?,
                hs: hs.iter().map(|h| h.decode(ctx)).collect::<Result<_, _>>()?,
            }),
        })
    }
}

impl CriterionRecord {
    pub fn encode(ctx: &FieldCtx, criterion: &Criterion) -> Self {
        let empty = CriterionRecord {
            kind: String::new(),
            criterion_form: None,
            k: 0,
            translator_matrix: None,
            matrix: None,
            second_matrix: None,
            det: None,
            rank: None,
            second_rank: None,
            predicted_fiber_size: None,
            l: None,
            witness: None,
        };
        match criterion {
            Criterion::Det { matrix, det } => CriterionRecord {
                kind: "det".into(),
                k: matrix.rows(),
                translator_matrix: Some(MatrixWire::encode(matrix)),
                matrix: Some(MatrixWire::encode(matrix)),
                det: Some(SubElementWire::encode(ctx, *det)),
                ..empty
            },
            Criterion::Rank {
                translator,
                shifted,
                rank,
                k,
                fiber_size,
            } => CriterionRecord {
                kind: "rank".into(),
                k: *k,
                translator_matrix: Some(MatrixWire::encode(translator)),
                matrix: Some(MatrixWire::encode(shifted)),
                rank: Some(*rank),
                predicted_fiber_size: Some(*fiber_size),
                ..empty
            },
            Criterion::RankPair {
                translator,
                shifted,
                doubled,
                rank,
                doubled_rank,
                k,
            } => CriterionRecord {
                kind: "rank_pair".into(),
                k: *k,
                translator_matrix: Some(MatrixWire::encode(translator)),
                matrix: Some(MatrixWire::encode(shifted)),
                second_matrix: Some(MatrixWire::encode(doubled)),
                rank: Some(*rank),
                second_rank: Some(*doubled_rank),
                ..empty
            },
            Criterion::TraceDifference { l, kernel_dim, witness } => CriterionRecord {
                kind: "trace_difference".into(),
                criterion_form: Some("forall-exists".into()),
                k: *kernel_dim,
                l: Some(*l),
                witness: witness.map(|(x, e)| WitnessRecord {
                    x: ElementWire::encode(ctx, x),
                    epsilon: ElementWire::encode(ctx, e),
                }),
                ..empty
            },
        }
    }

    /// Re-encodes every element and matrix in emitted form, so that records
    /// using other accepted encodings compare equal.
    fn canonical(&self, ctx: &FieldCtx) -> Result<Self, RecordError> {
        let matrix = |m: &Option<MatrixWire>| -> Result<Option<MatrixWire>, RecordError> {
            Ok(match m {
                Some(w) => Some(MatrixWire::encode(&w.decode(ctx)?)),
                None => None,
            })
        };
        Ok(CriterionRecord {
            translator_matrix: matrix(&self.translator_matrix)?,
            matrix: matrix(&self.matrix)?,
            second_matrix: matrix(&self.second_matrix)?,
            det: match &self.det {
                Some(d) => Some(SubElementWire::encode(ctx, d.decode(ctx)?)),
                None => None,
            },
            witness: match &self.witness {
                Some(w) => Some(WitnessRecord {
                    x: ElementWire::encode(ctx, w.x.decode(ctx)?),
                    epsilon: ElementWire::encode(ctx, w.epsilon.decode(ctx)?),
                }),
                None => None,
            },
            ..self.clone()
        })
    }
}

impl Certificate {
    pub fn build(ctx: &FieldCtx, instance: &Instance, outcome: &Outcome, prediction: Option<&Prediction>) -> Self {
        let deciding = outcome.criterion.deciding_matrix();
        let corollary = prediction.map(|p| CorollaryRecord {
            variant: p.variant.clone(),
            predicted_matrix: MatrixWire::encode(&p.predicted),
            matches_generic: deciding == Some(&p.predicted),
            printed_matrix: p.printed.as_ref().map(MatrixWire::encode),
            printed_matches_generic: p.printed.as_ref().map(|m| deciding == Some(m)),
        });
        Certificate {
            format: FORMAT_VERSION,
            field: FieldRecord::encode(ctx),
            theorem: outcome.theorem,
            instance: InstanceRecord::encode(ctx, instance),
            criterion: CriterionRecord::encode(ctx, &outcome.criterion),
            criterion_verdict: outcome.criterion_verdict,
            oracle_verdict: outcome.oracle_verdict,
            fiber_histogram: outcome.histogram.clone(),
            corollary,
            notes: prediction.map(|p| p.notes.clone()).unwrap_or_default(),
        }
    }

    /// Whether the certificate reports a permutation (or complete mapping).
    pub fn is_positive(&self) -> bool {
        self.criterion_verdict
    }
}

fn corollary_prediction(ctx: &FieldCtx, rec: &CorollaryRecord, notes: &[String]) -> Result<Prediction, RecordError> {
    Ok(Prediction {
        variant: rec.variant.clone(),
        predicted: rec.predicted_matrix.decode(ctx)?,
        printed: match &rec.printed_matrix {
            Some(m) => Some(m.decode(ctx)?),
            None => None,
        },
        notes: notes.to_vec(),
    })
}

/// Rebuilds the certified instance, recomputes the criterion with the oracle
/// on, and compares every recorded field. Returns the recomputed certificate.
pub fn verify(cert: &Certificate, cap: u64) -> Result<Certificate, VerifyFailure> {
    if cert.format != FORMAT_VERSION {
        return Err(RecordError::Invalid(format!("unsupported format {}", cert.format)).into());
    }
    let ctx = cert.field.context(cap)?;
    let instance = cert.instance.decode(&ctx)?;
    let outcome = evaluate(&ctx, cert.theorem, &instance, CheckOptions::default())?;
    let prediction = match &cert.corollary {
        Some(rec) => Some(corollary_prediction(&ctx, rec, &cert.notes)?),
        None => None,
    };
    let fresh = Certificate::build(&ctx, &instance, &outcome, prediction.as_ref());

    let mut differs = Vec::new();
    if cert.criterion.canonical(&ctx)? != fresh.criterion {
        differs.push("criterion".to_string());
    }
    if cert.criterion_verdict != fresh.criterion_verdict {
        differs.push("criterion_verdict".to_string());
    }
    if cert.oracle_verdict.is_some() && cert.oracle_verdict != fresh.oracle_verdict {
        differs.push("oracle_verdict".to_string());
    }
    if cert.fiber_histogram.is_some() && cert.fiber_histogram != fresh.fiber_histogram {
        differs.push("fiber_histogram".to_string());
    }
    if let (Some(given), Some(now)) = (&cert.corollary, &fresh.corollary) {
        if given.matches_generic != now.matches_generic || given.printed_matches_generic != now.printed_matches_generic
        {
            differs.push("corollary".to_string());
        }
    }
    if !differs.is_empty() {
        return Err(VerifyFailure::Mismatch(differs));
    }
    let corollary_ok = fresh.corollary.as_ref().is_none_or(|c| c.matches_generic);
    if outcome.disagrees() || !corollary_ok {
        return Err(VerifyFailure::Disagreement);
    }
    Ok(fresh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::certify;
    use crate::field::{make_field, Element, DEFAULT_MAX_ORDER};
    use crate::translators::make_translator_map;

    fn sample(ctx: &FieldCtx) -> Instance {
        let l = LinearizedPoly::diff_k(ctx, 1).unwrap();
        Instance::Kernel(KernelInstance {
            l: l.clone(),
            gammas: vec![Element::ONE],
            hs: vec![FqPermSpec::Power { t: 1 }],
            fs: vec![make_translator_map(ctx, Element::ONE, SelfMap::identity(ctx), l).unwrap()],
        })
    }

    #[test]
    fn json_round_trip_and_verify() {
        let k = make_field(3, 1, 2).unwrap();
        let cert = certify(&k, Theorem::Kernel, &sample(&k), None, CheckOptions::default()).unwrap();
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
        assert_eq!(verify(&back, DEFAULT_MAX_ORDER).unwrap(), cert);
    }

    #[test]
    fn tampering_is_detected() {
        let k = make_field(3, 1, 2).unwrap();
        let cert = certify(&k, Theorem::Kernel, &sample(&k), None, CheckOptions::default()).unwrap();

        let mut flipped = cert.clone();
        flipped.criterion_verdict = !flipped.criterion_verdict;
        assert_eq!(
            verify(&flipped, DEFAULT_MAX_ORDER),
            Err(VerifyFailure::Mismatch(vec!["criterion_verdict".into()]))
        );

        let mut bad_table = cert.clone();
        if let InstanceRecord::Kernel { fs, .. } = &mut bad_table.instance {
            fs[0].table[4] = (fs[0].table[4] + 1) % 3;
        }
        assert!(matches!(
            verify(&bad_table, DEFAULT_MAX_ORDER),
            Err(VerifyFailure::Malformed(_))
        ));

        let mut bad_field = cert.clone();
        bad_field.field.f_mod = vec![1, 1];
        assert!(matches!(
            verify(&bad_field, DEFAULT_MAX_ORDER),
            Err(VerifyFailure::Malformed(_))
        ));
    }

    #[test]
    fn alternative_encodings_still_verify() {
        let k = make_field(3, 1, 2).unwrap();
        let mut cert = certify(&k, Theorem::Kernel, &sample(&k), None, CheckOptions::default()).unwrap();
        cert.criterion.det = Some(SubElementWire::Index(2));
        cert.oracle_verdict = None;
        cert.fiber_histogram = None;
        assert!(verify(&cert, DEFAULT_MAX_ORDER).is_ok());
    }
}
