//! Randomized criterion-versus-oracle agreement sweeps.
//!
//! Every trial draws its own RNG from `(seed, cell, trial)`, so the report is
//! identical regardless of how rayon schedules the work.

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{
    evaluate, Certificate, CheckOptions, FqPermSpec, Hypothesis, Instance, KernelInstance, ShiftInstance, Theorem,
    TraceSumInstance,
};
use crate::field::{make_field, Element, FieldCtx, FieldError, SubElement};
use crate::linalg::FqMatrix;
use crate::linearized::{random_linearized, LinearizedPoly};
use crate::translators::{beta_for_traces, make_translator_map, FqMap, SelfMap};

/// Rejection budget for drawing `L` with the required kernel shape.
pub const L_RETRY_CAP: usize = 10_000;
/// Redraws allowed per trial before the cell is declared unsatisfiable.
pub const REDRAW_CAP: usize = 100;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub theorems: Vec<Theorem>,
    pub fields: Vec<(u32, usize, usize)>,
    pub trials: usize,
    pub seed: u64,
    /// Flip the criterion verdict of the very first trial, to prove the
    /// harness notices.
    pub inject_fault: bool,
}

/// All `(p, n, m)` with `p` in `primes`, `m ≥ 2` and `q^m ≤ max_size`.
pub fn sweep_fields(primes: &[u32], max_size: u64) -> Vec<(u32, usize, usize)> {
    let mut out = Vec::new();
    for &p in primes {
        let mut q = p as u64;
        let mut n = 1;
        while q * q <= max_size {
            let mut m = 2;
            while q.pow(m as u32) <= max_size {
                out.push((p, n, m));
                m += 1;
            }
            n += 1;
            q *= p as u64;
        }
    }
    out
}

/// Which verdict class a trial tried to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Aim {
    Random,
    Positive,
    Negative,
}

impl Aim {
    fn of_trial(trial: usize) -> Aim {
        match trial % 3 {
            0 => Aim::Random,
            1 => Aim::Positive,
            _ => Aim::Negative,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellReport {
    pub theorem: Theorem,
    pub p: u32,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub agreements: usize,
    /// Instances whose criterion says "permutation" (or "complete mapping").
    pub positive: usize,
    pub negative: usize,
    pub redraws: usize,
    /// Set when the field cannot host the theorem at all (e.g. `p = 2` for
    /// complete mappings), in which case no trials ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub trials: usize,
    pub agreements: usize,
    pub redraws: usize,
    pub cells: Vec<CellReport>,
    pub counterexamples: Vec<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl SweepReport {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }

    /// Cells that ran trials but never saw one of the two verdict classes.
    pub fn one_sided_cells(&self) -> Vec<&CellReport> {
        self.cells
            .iter()
            .filter(|c| c.skipped.is_none() && c.trials > 0 && (c.positive == 0 || c.negative == 0))
            .collect()
    }
}

struct TrialResult {
    verdict: bool,
    counterexample: Option<Certificate>,
    redraws: usize,
}

fn trial_rng(seed: u64, cell: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((cell as u64) << 32) | trial as u64);
    rng
}

fn cell_precondition(ctx: &FieldCtx, theorem: Theorem) -> Option<String> {
    (theorem == Theorem::Complete && ctx.p() == 2).then(|| "complete mappings need odd characteristic".into())
}

pub fn agreement_sweep(cfg: &SweepConfig) -> Result<SweepReport, FieldError> {
    let ctxs: Vec<FieldCtx> = cfg
        .fields
        .iter()
        .map(|&(p, n, m)| make_field(p as u64, n as u64, m as u64))
        .collect::<Result<_, _>>()?;
    let cells: Vec<(Theorem, usize)> = cfg
        .theorems
        .iter()
        .flat_map(|&t| (0..ctxs.len()).map(move |f| (t, f)))
        .collect();
    let skipped: Vec<Option<String>> = cells.iter().map(|&(t, f)| cell_precondition(&ctxs[f], t)).collect();

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .filter(|&c| skipped[c].is_none())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let results: Vec<Option<TrialResult>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (theorem, f) = cells[c];
            let mut rng = trial_rng(cfg.seed, c, t);
            let opts = CheckOptions {
                oracle: true,
                flip_criterion: cfg.inject_fault && c == 0 && t == 0,
            };
            run_trial(&ctxs[f], theorem, Aim::of_trial(t), opts, &mut rng)
        })
        .collect();

    let mut report = SweepReport {
        seed: cfg.seed,
        trials: 0,
        agreements: 0,
        redraws: 0,
        cells: cells
            .iter()
            .zip(&skipped)
            .map(|(&(theorem, f), skip)| CellReport {
                theorem,
                p: ctxs[f].p(),
                n: ctxs[f].n(),
                m: ctxs[f].m(),
                trials: 0,
                agreements: 0,
                positive: 0,
                negative: 0,
                redraws: 0,
                skipped: skip.clone(),
            })
            .collect(),
        counterexamples: Vec::new(),
        elapsed_ms: None,
    };
    for (&(c, _), result) in jobs.iter().zip(results) {
        let cell = &mut report.cells[c];
        let Some(r) = result else {
            cell.skipped
                .get_or_insert_with(|| "no valid instance within the redraw budget".into());
            continue;
        };
        cell.trials += 1;
        cell.redraws += r.redraws;
        if r.verdict {
            cell.positive += 1;
        } else {
            cell.negative += 1;
        }
        match r.counterexample {
            Some(cert) => report.counterexamples.push(cert),
            None => cell.agreements += 1,
        }
    }
    for cell in &report.cells {
        report.trials += cell.trials;
        report.agreements += cell.agreements;
        report.redraws += cell.redraws;
    }
    Ok(report)
}

fn run_trial(
    ctx: &FieldCtx,
    theorem: Theorem,
    aim: Aim,
    opts: CheckOptions,
    rng: &mut ChaCha8Rng,
) -> Option<TrialResult> {
    for redraws in 0..REDRAW_CAP {
        let Some(instance) = draw_instance(ctx, theorem, aim, rng) else {
            continue;
        };
        match evaluate(ctx, theorem, &instance, opts) {
            Ok(outcome) => {
                let counterexample = outcome
                    .disagrees()
                    .then(|| Certificate::build(ctx, &instance, &outcome, None));
                return Some(TrialResult {
                    verdict: outcome.criterion_verdict,
                    counterexample,
                    redraws,
                });
            }
            Err(_) => continue,
        }
    }
    None
}

/// A random instance of `theorem`, steered towards the requested class.
pub fn draw_for(ctx: &FieldCtx, theorem: Theorem, positive: Option<bool>, rng: &mut ChaCha8Rng) -> Option<Instance> {
    let aim = match positive {
        None => Aim::Random,
        Some(true) => Aim::Positive,
        Some(false) => Aim::Negative,
    };
    draw_instance(ctx, theorem, aim, rng)
}

fn draw_instance(ctx: &FieldCtx, theorem: Theorem, aim: Aim, rng: &mut ChaCha8Rng) -> Option<Instance> {
    match theorem {
        Theorem::Kernel => draw_kernel(ctx, aim, rng),
        Theorem::Shift => draw_shift(ctx, aim, rng, false),
        Theorem::Complete => draw_shift(ctx, aim, rng, true),
        Theorem::TraceSum => draw_trace_sum(ctx, aim, rng),
    }
    .map_err(|_: Hypothesis| ())
    .ok()
}

fn sub<R: Rng + ?Sized>(ctx: &FieldCtx, rng: &mut R) -> SubElement {
    SubElement(rng.gen_range(0..ctx.q()))
}

pub fn random_matrix<R: Rng + ?Sized>(ctx: &FieldCtx, k: usize, rng: &mut R) -> FqMatrix {
    let entries = (0..k * k).map(|_| sub(ctx, rng)).collect();
    FqMatrix::new(k, k, entries).expect("shape")
}

pub fn random_invertible<R: Rng + ?Sized>(ctx: &FieldCtx, k: usize, rng: &mut R) -> FqMatrix {
    loop {
        let m = random_matrix(ctx, k, rng);
        if m.rank(ctx) == k {
            return m;
        }
    }
}

/// A random `k × k` matrix of rank at most `k − 1`, with the rank itself drawn
/// uniformly so that every fiber size gets exercised.
pub fn random_singular<R: Rng + ?Sized>(ctx: &FieldCtx, k: usize, rng: &mut R) -> FqMatrix {
    let r = rng.gen_range(0..k);
    if r == 0 {
        return FqMatrix::zeros(k, k);
    }
    let left = FqMatrix::new(k, r, (0..k * r).map(|_| sub(ctx, rng)).collect()).expect("shape");
    let right = FqMatrix::new(r, k, (0..k * r).map(|_| sub(ctx, rng)).collect()).expect("shape");
    left.mul(ctx, &right).expect("shape")
}

pub fn random_perm_spec<R: Rng + ?Sized>(ctx: &FieldCtx, rng: &mut R) -> FqPermSpec {
    let q = ctx.q() as u64;
    match rng.gen_range(0..3) {
        0 => loop {
            let t = rng.gen_range(1..=q.max(2));
            if t.gcd(&(q - 1)) == 1 || q == 2 {
                return FqPermSpec::Power { t };
            }
        },
        1 => loop {
            let t = rng.gen_range(1..=q * q);
            if t.gcd(&(q * q - 1)) == 1 {
                return FqPermSpec::Dickson { t };
            }
        },
        _ => {
            let mut table: Vec<u32> = (0..ctx.q()).collect();
            table.shuffle(rng);
            FqPermSpec::Table { table }
        }
    }
}

/// Columns of `target` become the `β_j`: `Tr(γ_i β_j) = target[i][j]`.
fn betas_for(ctx: &FieldCtx, gammas: &[Element], target: &FqMatrix, rng: &mut ChaCha8Rng) -> Option<Vec<Element>> {
    (0..target.cols())
        .map(|j| beta_for_traces(ctx, gammas, &target.column(j), rng))
        .collect()
}

fn trace_maps(
    ctx: &FieldCtx,
    l: &LinearizedPoly,
    betas: &[Element],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<FqMap>, Hypothesis> {
    betas
        .iter()
        .map(|&b| {
            make_translator_map(ctx, b, SelfMap::random(ctx, rng), l.clone())
                .map_err(|e| Hypothesis::Precondition(e.to_string()))
        })
        .collect()
}

fn draw_l(
    ctx: &FieldCtx,
    trivial_intersection: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(LinearizedPoly, Vec<Element>), Hypothesis> {
    let (l, st) = random_linearized(ctx, rng, None, trivial_intersection, L_RETRY_CAP)
        .map_err(|e| Hypothesis::Precondition(e.to_string()))?;
    let basis = st.kernel.rebased(ctx, rng).vectors().to_vec();
    Ok((l, basis))
}

fn draw_kernel(ctx: &FieldCtx, aim: Aim, rng: &mut ChaCha8Rng) -> Result<Instance, Hypothesis> {
    let (l, gammas) = draw_l(ctx, true, rng)?;
    let k = gammas.len();
    let betas: Vec<Element> = match aim {
        Aim::Random => (0..k).map(|_| Element(rng.gen_range(0..ctx.order()))).collect(),
        Aim::Positive => betas_for(ctx, &gammas, &random_invertible(ctx, k, rng), rng).ok_or(Hypothesis::Dependent)?,
        Aim::Negative => betas_for(ctx, &gammas, &random_singular(ctx, k, rng), rng).ok_or(Hypothesis::Dependent)?,
    };
    let fs = trace_maps(ctx, &l, &betas, rng)?;
    let hs = (0..k).map(|_| random_perm_spec(ctx, rng)).collect();
    Ok(Instance::Kernel(KernelInstance { l, gammas, hs, fs }))
}

/// Shift instances use `γ` drawn from the kernel of a random `L` (no
/// intersection requirement), so the trace forms built on `L` have them as
/// translators.
fn draw_shift(ctx: &FieldCtx, aim: Aim, rng: &mut ChaCha8Rng, complete: bool) -> Result<Instance, Hypothesis> {
    let (l, basis) = draw_l(ctx, false, rng)?;
    let k = rng.gen_range(1..=basis.len());
    let gammas = basis[..k].to_vec();
    let one = SubElement::ONE;
    let two = ctx.fq_add(one, one);
    let minus = |m: FqMatrix, c: SubElement| m.plus_scalar_identity(ctx, ctx.fq_neg(c)).expect("square");
    let target = match (aim, complete) {
        (Aim::Random, _) => random_matrix(ctx, k, rng),
        (Aim::Positive, false) => minus(random_invertible(ctx, k, rng), one),
        (Aim::Negative, false) => minus(random_singular(ctx, k, rng), one),
        (Aim::Positive, true) => loop {
            let a = random_matrix(ctx, k, rng);
            let both = [one, two]
                .iter()
                .all(|&c| a.plus_scalar_identity(ctx, c).expect("square").rank(ctx) == k);
            if both {
                break a;
            }
        },
        (Aim::Negative, true) => {
            let c = if rng.gen_bool(0.5) { one } else { two };
            minus(random_singular(ctx, k, rng), c)
        }
    };
    let betas = betas_for(ctx, &gammas, &target, rng).ok_or(Hypothesis::Dependent)?;
    let fs = trace_maps(ctx, &l, &betas, rng)?;
    Ok(Instance::Shift(ShiftInstance { gammas, fs }))
}

/// `h_i(x) = β_i x + R_i(L(x))` makes the trace differences `Tr(β_i ε)`,
/// which are jointly nonzero on `Ker(L) \ {0}` exactly when the pairing
/// matrix is invertible. Random `h_i` almost always collide.
fn draw_trace_sum(ctx: &FieldCtx, aim: Aim, rng: &mut ChaCha8Rng) -> Result<Instance, Hypothesis> {
    let (l, basis) = draw_l(ctx, true, rng)?;
    let k = basis.len();
    let count = match aim {
        Aim::Positive => k,
        _ => rng.gen_range(1..=k),
    };
    let gammas = basis[..count].to_vec();
    let hs: Vec<SelfMap> = if aim == Aim::Random {
        (0..count).map(|_| SelfMap::random(ctx, rng)).collect()
    } else {
        let target = if aim == Aim::Positive {
            random_invertible(ctx, k, rng)
        } else {
            random_singular(ctx, k, rng)
        };
        let betas = betas_for(ctx, &basis, &target, rng).ok_or(Hypothesis::Dependent)?;
        let l_table = l.table(ctx);
        betas[..count]
            .iter()
            .map(|&b| {
                let r = SelfMap::random(ctx, rng);
                SelfMap::from_fn(ctx, |x| ctx.add(ctx.mul(b, x), r.apply(l_table[x.index() as usize])))
            })
            .collect()
    };
    Ok(Instance::TraceSum(TraceSumInstance { l, gammas, hs }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_list() {
        let f = sweep_fields(&[2, 3, 5], 81);
        assert!(f.contains(&(2, 1, 6)) && f.contains(&(2, 2, 3)) && f.contains(&(3, 2, 2)) && f.contains(&(5, 1, 2)));
        assert!(!f.contains(&(5, 1, 3)) && !f.contains(&(3, 1, 1)));
    }

    #[test]
    fn zero_trials() {
        let cfg = SweepConfig {
            theorems: Theorem::ALL.to_vec(),
            fields: vec![(3, 1, 2)],
            trials: 0,
            seed: 1,
            inject_fault: false,
        };
        let r = agreement_sweep(&cfg).unwrap();
        assert_eq!((r.trials, r.agreements), (0, 0));
        assert!(r.counterexamples.is_empty());
    }

    #[test]
    fn small_sweep_is_clean_and_two_sided() {
        let cfg = SweepConfig {
            theorems: Theorem::ALL.to_vec(),
            fields: vec![(2, 1, 2), (3, 1, 2), (2, 1, 3)],
            trials: 30,
            seed: 42,
            inject_fault: false,
        };
        let r = agreement_sweep(&cfg).unwrap();
        assert!(r.is_clean(), "{:?}", r.counterexamples.len());
        assert_eq!(r.agreements, r.trials);
        assert!(r.one_sided_cells().is_empty(), "{:?}", r.one_sided_cells());
        let again = agreement_sweep(&cfg).unwrap();
        assert_eq!(r.cells, again.cells);
    }

    #[test]
    fn injected_fault_is_reported() {
        let cfg = SweepConfig {
            theorems: vec![Theorem::Shift],
            fields: vec![(3, 1, 2)],
            trials: 3,
            seed: 9,
            inject_fault: true,
        };
        let r = agreement_sweep(&cfg).unwrap();
        assert_eq!(r.counterexamples.len(), 1);
        assert_eq!(r.agreements + r.counterexamples.len(), r.trials);
    }
}
