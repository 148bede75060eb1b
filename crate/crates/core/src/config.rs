//! JSON construction configs: which criterion or named family to run, on
//! which field, with which parameters.
//!
//! ```json
//! {"theorem": "2.1", "field": {"p": 3, "n": 1, "m": 2},
//!  "L": {"kind": "diff_k", "k": 1}, "gammas": "kernel",
//!  "hs": [{"kind": "power", "t": 1}],
//!  "fs": [{"beta": 1, "H": {"kind": "random", "seed": 42}, "L": "same"}]}
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::corollaries::{assemble, Params, Variant};
use crate::constructions::{
    FqPermSpec, Hypothesis, Instance, KernelInstance, Prediction, ShiftInstance, Theorem, TraceSumInstance,
};
use crate::field::{Element, FieldCtx, FieldError, Level};
use crate::linearized::LinearizedPoly;
use crate::translators::{FqMap, SelfMap, TraceForm};
use crate::wire::{decode_elements, element_table, sub_element_table, ElementWire, WireError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON for this schema: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("{0}")]
    Invalid(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] Hypothesis),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u64,
    pub n: u64,
    pub m: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LSpec {
    Trace,
    Identity,
    Zero,
    /// `x − x^{q^k}` with `m = 2k`.
    DiffK {
        k: usize,
    },
    /// Monic cubic q-polynomial with roots `1, α, α²`.
    #[serde(alias = "cor29_n")]
    ThreeRoot {
        #[serde(default)]
        alpha: Option<ElementWire>,
    },
    /// Quadratic q-polynomial vanishing on `F_q + F_q γ`.
    #[serde(alias = "cor27_m")]
    TwoRoot {
        #[serde(default)]
        gamma: Option<ElementWire>,
    },
    /// `Σ a_i x^{q^i}`; longer lists fold since `x^{q^m} = x`.
    Coeffs {
        coeffs: Vec<ElementWire>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SameTag {
    Same,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LRef {
    Same(SameTag),
    Spec(LSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelfMapSpec {
    Zero,
    Identity,
    Random {
        seed: u64,
    },
    /// Coefficients of `Σ c_i x^i`, constant term first.
    Poly {
        coeffs: Vec<ElementWire>,
    },
    Table {
        table: Vec<u32>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub beta: ElementWire,
    #[serde(rename = "H", default)]
    pub h: Option<SelfMapSpec>,
    #[serde(rename = "L", default)]
    pub l: Option<LRef>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedMap {
    Trace,
    Zero,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub table: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FSpec {
    Form(FormSpec),
    Named(NamedMap),
    Table(TableSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelTag {
    Kernel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammasSpec {
    Kernel(KernelTag),
    List(Vec<ElementWire>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructConfig {
    #[serde(default)]
    pub theorem: Option<String>,
    #[serde(default)]
    pub corollary: Option<String>,
    pub field: FieldSpec,
    #[serde(rename = "L", default)]
    pub l: Option<LSpec>,
    #[serde(default)]
    pub gammas: Option<GammasSpec>,
    /// Permutation specs for the kernel form, self-map specs for the
    /// trace-sum form.
    #[serde(default)]
    pub hs: Vec<serde_json::Value>,
    #[serde(default)]
    pub fs: Vec<FSpec>,
    #[serde(default)]
    pub betas: Vec<ElementWire>,
    #[serde(rename = "Hs", default)]
    pub big_hs: Vec<SelfMapSpec>,
    #[serde(default)]
    pub alpha: Option<ElementWire>,
    #[serde(default)]
    pub gamma: Option<ElementWire>,
    #[serde(default)]
    pub ts: Vec<u64>,
    #[serde(default = "default_true")]
    pub oracle: bool,
}

fn default_true() -> bool {
    true
}

/// A config resolved against its field.
#[derive(Clone, Debug)]
pub struct Built {
    pub ctx: FieldCtx,
    pub theorem: Theorem,
    pub instance: Instance,
    pub prediction: Option<Prediction>,
    pub oracle: bool,
}

/// One config object, or an array of them.
pub fn parse_configs(text: &str) -> Result<Vec<ConstructConfig>, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(|v| serde_json::from_value(v).map_err(ConfigError::from))
            .collect(),
        other => Ok(vec![serde_json::from_value(other)?]),
    }
}

impl LSpec {
    pub fn build(&self, ctx: &FieldCtx) -> Result<LinearizedPoly, ConfigError> {
        let lin = |r: Result<LinearizedPoly, crate::linearized::LinearizedError>| r.map_err(|e| invalid(e.to_string()));
        Ok(match self {
            LSpec::Trace => LinearizedPoly::trace(ctx),
            LSpec::Identity => LinearizedPoly::identity(ctx),
            LSpec::Zero => LinearizedPoly::zero(ctx),
            LSpec::DiffK { k } => lin(LinearizedPoly::diff_k(ctx, *k))?,
            LSpec::ThreeRoot { alpha } => {
                let a = match alpha {
                    Some(a) => a.decode(ctx)?,
                    None => ctx.find_primitive(Level::Outer),
                };
                lin(LinearizedPoly::three_root(ctx, a))?
            }
            LSpec::TwoRoot { gamma } => {
                let g = match gamma {
                    Some(g) => g.decode(ctx)?,
                    None => ctx
                        .elements()
                        .find(|&x| !ctx.in_subfield(x))
                        .ok_or_else(|| invalid("two_root needs m >= 2"))?,
                };
                lin(LinearizedPoly::two_root(ctx, g))?
            }
            LSpec::Coeffs { coeffs } => {
                if coeffs.is_empty() {
                    return Err(invalid("L coefficient list is empty"));
                }
                LinearizedPoly::from_q_powers(ctx, &decode_elements(ctx, coeffs)?)
            }
        })
    }
}

impl SelfMapSpec {
    pub fn build(&self, ctx: &FieldCtx) -> Result<SelfMap, ConfigError> {
        Ok(match self {
            SelfMapSpec::Zero => SelfMap::zero(ctx),
            SelfMapSpec::Identity => SelfMap::identity(ctx),
            SelfMapSpec::Random { seed } => SelfMap::random(ctx, &mut ChaCha8Rng::seed_from_u64(*seed)),
            SelfMapSpec::Poly { coeffs } => SelfMap::polynomial(ctx, decode_elements(ctx, coeffs)?),
            SelfMapSpec::Table { table } => {
                SelfMap::from_table(ctx, element_table(ctx, table)?).map_err(|e| invalid(e.to_string()))?
            }
        })
    }
}

impl FSpec {
    pub fn build(&self, ctx: &FieldCtx, same: Option<&LinearizedPoly>) -> Result<FqMap, ConfigError> {
        Ok(match self {
            FSpec::Named(NamedMap::Trace) => FqMap::trace(ctx),
            FSpec::Named(NamedMap::Zero) => FqMap::from_fn(ctx, |_| crate::field::SubElement::ZERO),
            FSpec::Table(t) => {
                FqMap::from_table(ctx, sub_element_table(ctx, &t.table)?).map_err(|e| invalid(e.to_string()))?
            }
            FSpec::Form(form) => {
                let l = match &form.l {
                    None | Some(LRef::Same(SameTag::Same)) => same
                        .cloned()
                        .ok_or_else(|| invalid("f refers to L but the config has no top-level L"))?,
                    Some(LRef::Spec(spec)) => spec.build(ctx)?,
                };
                let h = match &form.h {
                    Some(h) => h.build(ctx)?,
                    None => SelfMap::zero(ctx),
                };
                FqMap::trace_form(
                    ctx,
                    TraceForm {
                        beta: form.beta.decode(ctx)?,
                        h,
                        l,
                    },
                )
            }
        })
    }
}

impl ConstructConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self, cap: u64) -> Result<Built, ConfigError> {
        let f = &self.field;
        let ctx = FieldCtx::with_cap(f.p, f.n, f.m, cap)?;
        let l = self.l.as_ref().map(|s| s.build(&ctx)).transpose()?;
        let explicit_gammas = match &self.gammas {
            Some(GammasSpec::List(list)) => Some(decode_elements(&ctx, list)?),
            _ => None,
        };
        let fs = self
            .fs
            .iter()
            .map(|s| s.build(&ctx, l.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;

        let (theorem, instance, prediction) = match (&self.theorem, &self.corollary) {
            (Some(_), Some(_)) => return Err(invalid("give either theorem or corollary, not both")),
            (None, None) => return Err(invalid("config needs a theorem or a corollary")),
            (Some(label), None) => {
                let theorem =
                    Theorem::from_label(label).ok_or_else(|| invalid(format!("unknown theorem {label:?}")))?;
                let gammas = |l: Option<&LinearizedPoly>| -> Result<Vec<Element>, ConfigError> {
                    match (&explicit_gammas, l) {
                        (Some(g), _) => Ok(g.clone()),
                        (None, Some(l)) => Ok(l.structure(&ctx).kernel.vectors().to_vec()),
                        (None, None) => Err(invalid("gammas must be listed when there is no L")),
                    }
                };
                let need_l = || l.clone().ok_or_else(|| invalid(format!("theorem {theorem} needs L")));
                let instance = match theorem {
                    Theorem::Kernel => Instance::Kernel(KernelInstance {
                        gammas: gammas(l.as_ref())?,
                        l: need_l()?,
                        hs: self.perm_hs()?,
                        fs,
                    }),
                    Theorem::Shift | Theorem::Complete => Instance::Shift(ShiftInstance {
                        gammas: gammas(l.as_ref())?,
                        fs,
                    }),
                    Theorem::TraceSum => Instance::TraceSum(TraceSumInstance {
                        gammas: gammas(l.as_ref())?,
                        l: need_l()?,
                        hs: self.map_hs(&ctx)?,
                    }),
                };
                (theorem, instance, None)
            }
            (None, Some(label)) => {
                let variant =
                    Variant::from_label(label).ok_or_else(|| invalid(format!("unknown corollary {label:?}")))?;
                let trace_sum = variant.theorem() == Theorem::TraceSum;
                let decode_opt = |w: &Option<ElementWire>| w.as_ref().map(|w| w.decode(&ctx)).transpose();
                let params = Params {
                    l,
                    gammas: explicit_gammas,
                    hs: if trace_sum { Vec::new() } else { self.perm_hs()? },
                    self_hs: if trace_sum { self.map_hs(&ctx)? } else { Vec::new() },
                    fs,
                    betas: decode_elements(&ctx, &self.betas)?,
                    big_hs: self.big_hs.iter().map(|h| h.build(&ctx)).collect::<Result<_, _>>()?,
                    alpha: decode_opt(&self.alpha)?,
                    gamma: decode_opt(&self.gamma)?,
                    ts: self.ts.clone(),
                };
                let a = assemble(&ctx, variant, &params)?;
                (a.theorem, a.instance, a.prediction)
            }
        };
        Ok(Built {
            ctx,
            theorem,
            instance,
            prediction,
            oracle: self.oracle,
        })
    }

    fn perm_hs(&self) -> Result<Vec<FqPermSpec>, ConfigError> {
        self.hs
            .iter()
            .map(|v| serde_json::from_value(v.clone()).map_err(|e| invalid(format!("hs entry {v}: {e}"))))
            .collect()
    }

    fn map_hs(&self, ctx: &FieldCtx) -> Result<Vec<SelfMap>, ConfigError> {
        self.hs
            .iter()
            .map(|v| {
                let spec: SelfMapSpec =
                    serde_json::from_value(v.clone()).map_err(|e| invalid(format!("hs entry {v}: {e}")))?;
                spec.build(ctx)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{certify, CheckOptions};
    use crate::field::DEFAULT_MAX_ORDER;

    fn run(text: &str) -> Result<crate::constructions::Certificate, String> {
        let built = ConstructConfig::from_json(text)
            .and_then(|c| c.build(DEFAULT_MAX_ORDER))
            .map_err(|e| e.to_string())?;
        certify(
            &built.ctx,
            built.theorem,
            &built.instance,
            built.prediction.as_ref(),
            CheckOptions::default(),
        )
        .map_err(|e| e.to_string())
    }

    #[test]
    fn documented_example() {
        let cert = run(
            r#"{"theorem":"2.1","field":{"p":3,"n":1,"m":2},"L":{"kind":"diff_k","k":1},
            "gammas":"kernel","hs":[{"kind":"power","t":1}],
            "fs":[{"beta":1,"H":{"kind":"random","seed":42},"L":"same"}],"oracle":true}"#,
        )
        .unwrap();
        assert!(cert.criterion_verdict);
        assert_eq!(cert.oracle_verdict, Some(true));
    }

    #[test]
    fn shift_examples() {
        let pos = run(r#"{"theorem":"2.2","field":{"p":3,"n":1,"m":2},"gammas":[3],"fs":[{"kind":"trace"}]}"#).unwrap();
        assert_eq!(pos.criterion.rank, Some(1));
        let neg = run(r#"{"theorem":"2.2","field":{"p":3,"n":1,"m":2},"gammas":[1],"fs":[{"kind":"trace"}]}"#).unwrap();
        assert!(!neg.criterion_verdict);
        assert_eq!(serde_json::to_string(&neg.fiber_histogram).unwrap(), r#"{"0":6,"3":3}"#);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConstructConfig::from_json(r#"{"theorem":"2.1","field":{"p":3,"n":1,"m":2},"bogus":1}"#).is_err());
        assert!(run(
            r#"{"theorem":"2.1","field":{"p":3,"n":1,"m":2},"L":{"kind":"diff_k","k":1},
            "gammas":[3],"hs":[{"kind":"power","t":1}],"fs":[{"beta":1,"L":"same"}]}"#
        )
        .unwrap_err()
        .contains("not in Ker(L)"));
        assert!(run(r#"{"theorem":"9.9","field":{"p":3,"n":1,"m":2}}"#).is_err());
        assert!(run(r#"{"theorem":"2.2","field":{"p":4,"n":1,"m":2},"gammas":[1],"fs":[]}"#).is_err());
    }

    #[test]
    fn corollary_and_batch() {
        let text = r#"[{"corollary":"cor2.8","field":{"p":3,"n":1,"m":2},"L":{"kind":"diff_k","k":1},
                        "gammas":[1],"betas":[3],"Hs":[{"kind":"zero"}]},
                       {"corollary":"cor3.1","field":{"p":2,"n":1,"m":3},"hs":[{"kind":"identity"}]}]"#;
        let configs = parse_configs(text).unwrap();
        assert_eq!(configs.len(), 2);
        for c in configs {
            let b = c.build(DEFAULT_MAX_ORDER).unwrap();
            certify(
                &b.ctx,
                b.theorem,
                &b.instance,
                b.prediction.as_ref(),
                CheckOptions::default(),
            )
            .unwrap();
        }
    }
}
