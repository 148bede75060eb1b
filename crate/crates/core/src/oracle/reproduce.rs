//! Re-runs the two worked examples on random parameters, checking each
//! closed-form determinant against the generic criterion and the oracle.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::sweep::{random_invertible, random_singular};
use crate::constructions::corollaries::{assemble, Params, Variant};
use crate::constructions::{certify, Certificate, CheckOptions, ConstructionError, Hypothesis};
use crate::field::{Element, FieldCtx, FieldError};
use crate::linalg::FqMatrix;
use crate::translators::{beta_for_traces, SelfMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Example {
    /// Monomial `h_j` on `F_{q^4}` with `L = x^{q^2} − x`.
    #[serde(rename = "2.1")]
    Monomial,
    /// Dickson `h_j` on `F_{q^4}` with `L = Tr`.
    #[serde(rename = "2.2")]
    Dickson,
}

impl Example {
    pub fn from_label(s: &str) -> Option<Example> {
        match s {
            "2.1" => Some(Example::Monomial),
            "2.2" => Some(Example::Dickson),
            _ => None,
        }
    }

    fn variant(self) -> Variant {
        match self {
            Example::Monomial => Variant::MonomialExample,
            Example::Dickson => Variant::DicksonExample,
        }
    }

    fn k(self) -> usize {
        match self {
            Example::Monomial => 2,
            Example::Dickson => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReproduceError {
    #[error("q = {0} is not a prime power")]
    NotPrimePower(u64),
    #[error("requires odd characteristic, got q = {0}")]
    EvenCharacteristic(u64),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] Hypothesis),
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceReport {
    pub example: Example,
    pub q: u64,
    pub seed: u64,
    pub trials: usize,
    /// Draws beyond `trials`, steered to a verdict class that had not shown up.
    pub extra_draws: usize,
    pub permutations: usize,
    pub non_permutations: usize,
    pub disagreements: Vec<Certificate>,
}

impl ReproduceReport {
    pub fn both_classes(&self) -> bool {
        self.permutations > 0 && self.non_permutations > 0
    }
}

/// `(p, n)` with `q = p^n`.
pub fn split_prime_power(q: u64) -> Option<(u64, u64)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut n = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        n += 1;
    }
    (rest == 1).then_some((p, n))
}

fn draw_params<R: Rng + ?Sized>(
    ctx: &FieldCtx,
    example: Example,
    gammas: &[Element],
    aim: Option<bool>,
    rng: &mut R,
) -> Params {
    let q = ctx.q() as u64;
    let k = example.k();
    let modulus = match example {
        Example::Monomial => q - 1,
        Example::Dickson => q * q - 1,
    };
    let ts = (0..k)
        .map(|_| loop {
            let t = rng.gen_range(1..=modulus.max(2));
            if t.gcd(&modulus) == 1 {
                break t;
            }
        })
        .collect();
    let betas = match aim {
        None => (0..k).map(|_| Element(rng.gen_range(0..ctx.order()))).collect(),
        Some(positive) => {
            let target: FqMatrix = if positive {
                random_invertible(ctx, k, rng)
            } else {
                random_singular(ctx, k, rng)
            };
            (0..k)
                .map(|j| beta_for_traces(ctx, gammas, &target.column(j), rng).expect("gammas are independent"))
                .collect()
        }
    };
    Params {
        ts,
        betas,
        big_hs: (0..k).map(|_| SelfMap::random(ctx, rng)).collect(),
        ..Params::default()
    }
}

pub fn reproduce(
    example: Example,
    q: u64,
    trials: usize,
    seed: u64,
    cap: u64,
) -> Result<ReproduceReport, ReproduceError> {
    let (p, n) = split_prime_power(q).ok_or(ReproduceError::NotPrimePower(q))?;
    if p == 2 {
        return Err(ReproduceError::EvenCharacteristic(q));
    }
    let ctx = FieldCtx::with_cap(p, n, 4, cap)?;
    // Resolve the defaults once so a hypothesis failure surfaces before any draw.
    let probe = draw_params(&ctx, example, &[], None, &mut ChaCha8Rng::seed_from_u64(seed));
    let base = assemble(&ctx, example.variant(), &probe)?;
    let gammas = match &base.instance {
        crate::constructions::Instance::Kernel(i) => i.gammas.clone(),
        _ => unreachable!("both examples are kernel-form"),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ReproduceReport {
        example,
        q,
        seed,
        trials,
        extra_draws: 0,
        permutations: 0,
        non_permutations: 0,
        disagreements: Vec::new(),
    };
    let run = |params: Params, report: &mut ReproduceReport| -> Result<(), ReproduceError> {
        let a = assemble(&ctx, example.variant(), &params)?;
        let cert = match certify(
            &ctx,
            a.theorem,
            &a.instance,
            a.prediction.as_ref(),
            CheckOptions::default(),
        ) {
            Ok(cert) => cert,
            Err(ConstructionError::Disagreement(cert)) => {
                report.disagreements.push(*cert.clone());
                *cert
            }
            Err(ConstructionError::Hypothesis(h)) => return Err(h.into()),
        };
        if cert.criterion_verdict {
            report.permutations += 1;
        } else {
            report.non_permutations += 1;
        }
        Ok(())
    };
    for _ in 0..trials {
        let params = draw_params(&ctx, example, &gammas, None, &mut rng);
        run(params, &mut report)?;
    }
    // Retry budget for a class the random draws missed.
    if trials > 0 {
        for _ in 0..trials {
            let aim = match (report.permutations, report.non_permutations) {
                (0, _) => true,
                (_, 0) => false,
                _ => break,
            };
            report.extra_draws += 1;
            let params = draw_params(&ctx, example, &gammas, Some(aim), &mut rng);
            run(params, &mut report)?;
        }
    }
    Ok(report)
}
