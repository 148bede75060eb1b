//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::collections::{BTreeMap, HashMap};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ltperm_core::constructions::corollaries::{corollary_build, Params, Variant};
use ltperm_core::constructions::{evaluate, CheckOptions, Theorem};
use ltperm_core::field::{make_field, Element, FieldCtx, SubElement};
use ltperm_core::linalg::FqMatrix;
use ltperm_core::linearized::LinearizedPoly;
use ltperm_core::oracle::converse::{converse_exhaustive, forward_exhaustive, HSearch};
use ltperm_core::oracle::sweep::{agreement_sweep, draw_for, sweep_fields, SweepConfig, SweepReport};
use ltperm_core::oracle::{fiber_histogram, is_permutation};
use ltperm_core::translators::{beta_for_traces, make_translator_map, translator_coefficient, FqMap, SelfMap};

/// Sweep parameters fixed by the criteria.
const SWEEP_PRIMES: [u32; 3] = [2, 3, 5];
const SWEEP_MAX_SIZE: u64 = 6561;
const SWEEP_TRIALS: usize = 200;
const COMPLETE_TRIALS: usize = 100;
const THREE_ROOT_DRAWS: usize = 60;
const EXAMPLE_TRIALS: &str = "50";
const INVARIANT_MAX_ORDER: u64 = 256;
const SEED: u64 = 2024;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn field(p: u64, n: u64, m: u64) -> FieldCtx {
    make_field(p, n, m).expect("valid field")
}

fn el(ctx: &FieldCtx, i: u64) -> Element {
    ctx.element(i).expect("in range")
}

fn sweep(theorem: Theorem, fields: Vec<(u32, usize, usize)>, trials: usize) -> SweepReport {
    agreement_sweep(&SweepConfig {
        theorems: vec![theorem],
        fields,
        trials,
        seed: SEED,
        inject_fault: false,
    })
    .expect("fields within cap")
}

fn judge_sweep(r: &SweepReport, per_cell: usize) -> Check {
    if !r.counterexamples.is_empty() {
        return Err(format!("{} counterexamples", r.counterexamples.len()));
    }
    if let Some(c) = r.cells.iter().find(|c| c.trials < per_cell) {
        return Err(format!("only {} trials on ({}, {}, {})", c.trials, c.p, c.n, c.m));
    }
    if let Some(c) = r.one_sided_cells().first() {
        return Err(format!("one verdict class only on ({}, {}, {})", c.p, c.n, c.m));
    }
    let pos: usize = r.cells.iter().map(|c| c.positive).sum();
    Ok(format!(
        "{} fields, {} instances ({} positive, {} negative), 0 disagreements",
        r.cells.len(),
        r.trials,
        pos,
        r.trials - pos
    ))
}

/// Counts fibers with a plain hash map, independently of the library's
/// histogram type.
fn fibers(table: &[Element]) -> BTreeMap<usize, usize> {
    let mut hits: HashMap<u32, usize> = HashMap::new();
    for v in table {
        *hits.entry(v.index()).or_default() += 1;
    }
    let mut out = BTreeMap::new();
    let missed = table.len() - hits.len();
    if missed > 0 {
        out.insert(0, missed);
    }
    for s in hits.into_values() {
        *out.entry(s).or_default() += 1;
    }
    out
}

fn q_to_one_shape(order: usize, fiber: usize) -> BTreeMap<usize, usize> {
    let hit = order / fiber;
    let mut shape = BTreeMap::from([(fiber, hit)]);
    if order > hit {
        shape.insert(0, order - hit);
    }
    shape
}

fn criterion_1() -> Check {
    judge_sweep(
        &sweep(
            Theorem::Kernel,
            sweep_fields(&SWEEP_PRIMES, SWEEP_MAX_SIZE),
            SWEEP_TRIALS,
        ),
        SWEEP_TRIALS,
    )
}

fn criterion_2() -> Check {
    let fields = sweep_fields(&SWEEP_PRIMES, SWEEP_MAX_SIZE);
    let summary = judge_sweep(&sweep(Theorem::Shift, fields.clone(), SWEEP_TRIALS), SWEEP_TRIALS)?;
    // Part 2, recounted outside the library on rank-deficient draws.
    let mut deficient = 0;
    for (fi, &(p, n, m)) in fields.iter().enumerate() {
        let ctx = field(p as u64, n as u64, m as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ fi as u64);
        for _ in 0..20 {
            let inst = draw_for(&ctx, Theorem::Shift, Some(false), &mut rng).ok_or("no instance drawn")?;
            let out = evaluate(&ctx, Theorem::Shift, &inst, CheckOptions::default()).map_err(|e| e.to_string())?;
            let (k, rank) = match &out.criterion {
                ltperm_core::constructions::Criterion::Rank { k, rank, .. } => (*k, *rank),
                _ => return Err("unexpected criterion".into()),
            };
            let fiber = (ctx.q() as usize).pow((k - rank) as u32);
            if fibers(&out.table) != q_to_one_shape(ctx.order() as usize, fiber) {
                return Err(format!(
                    "fiber shape wrong on ({p}, {n}, {m}) with rank {rank} < k = {k}"
                ));
            }
            deficient += 1;
        }
    }
    Ok(format!(
        "{summary}; {deficient} rank-deficient instances have the exact q^l-to-1 shape"
    ))
}

fn criterion_3() -> Check {
    let mut checked = 0;
    for (p, m) in [(3u64, 2u64), (5, 2)] {
        let ctx = field(p, 1, m);
        let q = ctx.q() as u64;
        let minus_one = ctx.fq_neg(SubElement::ONE);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + p);
        for gamma in ctx.elements().skip(1) {
            // L(x) = x^q − γ^{q−1} x vanishes exactly on F_q γ.
            let l = LinearizedPoly::from_q_powers(&ctx, &[ctx.neg(ctx.pow(gamma, q - 1)), Element::ONE]);
            for beta in ctx.elements() {
                let f = make_translator_map(&ctx, beta, SelfMap::random(&ctx, &mut rng), l.clone())
                    .map_err(|e| e.to_string())?;
                let b = translator_coefficient(&ctx, &f, gamma)
                    .map_err(|e| e.to_string())?
                    .ok_or("gamma is not a translator")?;
                let table: Vec<Element> = ctx
                    .elements()
                    .map(|x| ctx.add(x, ctx.scale(f.apply(x), gamma)))
                    .collect();
                let expected = if b == minus_one {
                    q_to_one_shape(ctx.order() as usize, q as usize)
                } else {
                    BTreeMap::from([(1, ctx.order() as usize)])
                };
                if fibers(&table) != expected {
                    return Err(format!("F_{} gamma = {gamma}, beta = {beta}, b = {b}", ctx.order()));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (gamma, beta) pairs on F_9 and F_25"))
}

fn criterion_4() -> Check {
    let mut identities = 0;
    let mut realized = 0;
    for p in [3u64, 5] {
        let base = field(p, 1, 1);
        let ext = field(p, 1, 2);
        let gammas = [Element::ONE, el(&ext, p)];
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10 * p);
        let all: Vec<SubElement> = base.sub_elements().collect();
        for &b1 in &all {
            for &b2 in &all {
                for &d1 in &all {
                    for &d2 in &all {
                        let a = FqMatrix::from_rows(vec![vec![b1, b2], vec![d1, d2]]).expect("2x2");
                        let full_rank = a
                            .plus_scalar_identity(&base, SubElement::ONE)
                            .expect("square")
                            .rank(&base)
                            == 2;
                        let one_b1 = base.fq_add(SubElement::ONE, b1);
                        let realized_perm = {
                            let fs: Vec<FqMap> = (0..2)
                                .map(|j| {
                                    let beta =
                                        beta_for_traces(&ext, &gammas, &a.column(j), &mut rng).expect("independent");
                                    FqMap::from_fn(&ext, |x| ext.trace(ext.mul(beta, x)))
                                })
                                .collect();
                            let table: Vec<Element> = ext
                                .elements()
                                .map(|x| {
                                    let s = ext.add(x, ext.scale(fs[0].apply(x), gammas[0]));
                                    ext.add(s, ext.scale(fs[1].apply(x), gammas[1]))
                                })
                                .collect();
                            is_permutation(&table)
                        };
                        realized += 1;
                        if realized_perm != full_rank {
                            return Err(format!("rank test disagrees with the oracle for A = {:?}", a.to_rows()));
                        }
                        if one_b1.is_zero() {
                            continue;
                        }
                        let ratio = base.fq_mul(base.fq_mul(d1, b2), base.fq_inv(one_b1).expect("nonzero"));
                        let formula = base.fq_sub(d2, ratio) != base.fq_neg(SubElement::ONE);
                        if formula != full_rank {
                            return Err(format!(
                                "identity fails for (b1, b2, d1, d2) = ({b1}, {b2}, {d1}, {d2}) over F_{p}"
                            ));
                        }
                        identities += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{identities} matrices with b1 != -1 over F_3 and F_5; {realized} realized on F_9/F_25"
    ))
}

fn criterion_5() -> Check {
    let mut total = 0;
    for (p, m) in [(3u64, 2u64), (5, 2), (3, 3)] {
        let ctx = field(p, 1, m);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED + 100 * p + m);
        let (mut pos, mut neg) = (0, 0);
        for t in 0..COMPLETE_TRIALS {
            let aim = [None, Some(true), Some(false)][t % 3];
            let inst = draw_for(&ctx, Theorem::Complete, aim, &mut rng).ok_or("no instance drawn")?;
            let out = evaluate(&ctx, Theorem::Complete, &inst, CheckOptions::default()).map_err(|e| e.to_string())?;
            let plus_x: Vec<Element> = ctx
                .elements()
                .map(|x| ctx.add(out.table[x.index() as usize], x))
                .collect();
            let oracle = fibers(&out.table).len() == 1 && fibers(&plus_x).len() == 1 && is_permutation(&plus_x);
            if oracle != out.criterion_verdict || out.disagrees() {
                return Err(format!("disagreement on F_{}", ctx.order()));
            }
            if oracle {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        if pos == 0 || neg == 0 {
            return Err(format!("one verdict class only on F_{}", ctx.order()));
        }
        total += pos + neg;
    }
    Ok(format!("{total} instances on F_9, F_25, F_27, both classes on each"))
}

fn criterion_6() -> Check {
    judge_sweep(
        &sweep(
            Theorem::TraceSum,
            sweep_fields(&SWEEP_PRIMES, SWEEP_MAX_SIZE),
            SWEEP_TRIALS,
        ),
        SWEEP_TRIALS,
    )
}

fn criterion_7() -> Check {
    let ctx = field(3, 1, 4);
    let alpha = ctx.find_primitive(ltperm_core::field::Level::Outer);
    let n = LinearizedPoly::three_root(&ctx, alpha).map_err(|e| e.to_string())?;
    for (name, x) in [
        ("1", Element::ONE),
        ("alpha", alpha),
        ("alpha^2", ctx.mul(alpha, alpha)),
    ] {
        if !n.eval(&ctx, x).is_zero() {
            return Err(format!("N({name}) != 0"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let (mut pos, mut printed_differs) = (0, 0);
    for _ in 0..THREE_ROOT_DRAWS {
        let params = Params {
            betas: (0..3).map(|_| el(&ctx, rng.gen_range(0..81))).collect(),
            big_hs: (0..3).map(|_| SelfMap::random(&ctx, &mut rng)).collect(),
            ..Params::default()
        };
        let cert = corollary_build(&ctx, Variant::ThreeRootShift, &params, CheckOptions::default())
            .map_err(|e| format!("draw rejected: {e}"))?;
        let cor = cert.corollary.as_ref().ok_or("no corollary record")?;
        if !cor.matches_generic || cert.oracle_verdict != Some(cert.criterion_verdict) {
            return Err("assembled matrix or verdict disagrees".into());
        }
        pos += usize::from(cert.criterion_verdict);
        printed_differs += usize::from(cor.printed_matches_generic == Some(false));
    }
    Ok(format!(
        "N vanishes on 1, alpha, alpha^2 (alpha = {alpha}); {THREE_ROOT_DRAWS} draws agree ({pos} permutations); \
         printed third column differs on {printed_differs}"
    ))
}

fn criterion_8() -> Check {
    let mut parts = Vec::new();
    for ex in ["2.1", "2.2"] {
        let out = Command::new(env!("CARGO_BIN_EXE_ltperm"))
            .args([
                "reproduce",
                "--example",
                ex,
                "--q",
                "3",
                "--trials",
                EXAMPLE_TRIALS,
                "--seed",
                "11",
            ])
            .env_remove("LTPERM_MAX_FIELD_SIZE")
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.code() != Some(0) {
            return Err(format!(
                "example {ex} exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let r: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        parts.push(format!("{ex}: {}+/{}-", r["permutations"], r["non_permutations"]));
    }
    Ok(parts.join(", "))
}

fn criterion_9() -> Check {
    let f4 = field(2, 1, 2);
    let f9 = field(3, 1, 2);
    let mut checked = 0;
    for (ctx, search) in [
        (&f4, HSearch::Full),
        (&f4, HSearch::TraceReduced),
        (&f9, HSearch::TraceReduced),
    ] {
        let r = forward_exhaustive(ctx, search).map_err(|e| e.to_string())?;
        if let Some(f) = r.failures.first() {
            return Err(format!("forward property fails: {f}"));
        }
        checked += r.maps_checked;
    }
    let c = converse_exhaustive(&f4, HSearch::Full).map_err(|e| e.to_string())?;
    if !c.is_clean() {
        return Err(format!(
            "{} unrepresentable, {} representable without translators",
            c.unrepresentable.len(),
            c.representable_without_translators.len()
        ));
    }
    Ok(format!(
        "forward: {checked} maps on F_4 and F_9; converse: {}/{} translator-admitting maps on F_4 representable",
        c.representable, c.with_translators
    ))
}

fn small_fields() -> Vec<FieldCtx> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13] {
        for n in 1..=8u64 {
            for m in 1..=8u64 {
                if p.checked_pow((n * m) as u32).is_some_and(|o| o <= INVARIANT_MAX_ORDER) {
                    out.push(field(p, n, m));
                }
            }
        }
    }
    out
}

fn field_axioms(ctx: &FieldCtx) -> Result<(), String> {
    let els: Vec<Element> = ctx.elements().collect();
    let err = |what: &str| Err(format!("{what} fails on F_{}^{}", ctx.q(), ctx.m()));
    for &x in &els {
        if ctx.add(x, ctx.neg(x)) != Element::ZERO || ctx.mul(x, Element::ONE) != x {
            return err("identity/negation");
        }
        if !x.is_zero() && ctx.mul(x, ctx.inv(x).expect("nonzero")) != Element::ONE {
            return err("inverse");
        }
        for &y in &els {
            let xy = ctx.mul(x, y);
            if xy != ctx.mul(y, x) || ctx.add(x, y) != ctx.add(y, x) {
                return err("commutativity");
            }
            for &z in &els {
                if ctx.mul(xy, z) != ctx.mul(x, ctx.mul(y, z))
                    || ctx.add(ctx.add(x, y), z) != ctx.add(x, ctx.add(y, z))
                    || ctx.mul(x, ctx.add(y, z)) != ctx.add(xy, ctx.mul(x, z))
                {
                    return err("associativity/distributivity");
                }
            }
        }
    }
    Ok(())
}

fn trace_laws(ctx: &FieldCtx) -> Result<(), String> {
    let mut image = vec![false; ctx.q() as usize];
    for x in ctx.elements() {
        let tx = ctx.trace(x);
        image[tx.index() as usize] = true;
        if ctx.trace(ctx.frobenius(x, 1)) != tx {
            return Err("Tr(x^q) != Tr(x)".into());
        }
        for y in ctx.elements() {
            let ty = ctx.trace(y);
            for u in ctx.sub_elements() {
                if ctx.trace(ctx.add(x, ctx.scale(u, y))) != ctx.fq_add(tx, ctx.fq_mul(u, ty)) {
                    return Err("trace is not F_q-linear".into());
                }
            }
        }
    }
    if image.contains(&false) {
        return Err("trace is not onto F_q".into());
    }
    Ok(())
}

fn linear_maps(ctx: &FieldCtx, rng: &mut ChaCha8Rng) -> Vec<LinearizedPoly> {
    let order = ctx.order() as u64;
    let m = ctx.m();
    let total = order.checked_pow(m as u32).unwrap_or(u64::MAX);
    let codes: Vec<u64> = if total <= 4096 {
        (0..total).collect()
    } else {
        (0..300).map(|_| rng.gen_range(0..total)).collect()
    };
    codes
        .into_iter()
        .map(|mut code| {
            let coeffs: Vec<Element> = (0..m)
                .map(|_| {
                    let c = el(ctx, code % order);
                    code /= order;
                    c
                })
                .collect();
            LinearizedPoly::new(ctx, coeffs).expect("length m")
        })
        .collect()
}

fn histogram_conserves(table: &[Element]) -> Result<(), String> {
    let h = fiber_histogram(table);
    let order = table.len();
    let points: usize = h.counts.values().sum();
    let mass: usize = h.counts.iter().map(|(s, c)| s * c).sum();
    if points != order || mass != order {
        return Err("histogram mass not conserved".into());
    }
    let identity_shape = h.counts.len() == 1 && h.counts.get(&1) == Some(&order);
    if identity_shape != is_permutation(table) || h.counts != fibers(table) {
        return Err("histogram disagrees with the permutation scan".into());
    }
    Ok(())
}

fn criterion_10() -> Check {
    let fields = small_fields();
    let mut maps = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    for ctx in &fields {
        field_axioms(ctx)?;
        trace_laws(ctx)?;
        for l in linear_maps(ctx, &mut rng) {
            let st = l.structure(ctx);
            if st.kernel.dim() + st.image.dim() != ctx.m() {
                return Err(format!("rank-nullity fails for {:?}", l.coeffs()));
            }
            let table = l.table(ctx);
            if st.bijective != is_permutation(&table) {
                return Err("bijectivity disagrees with the oracle".into());
            }
            histogram_conserves(&table)?;
            maps += 1;
        }
        for _ in 0..20 {
            histogram_conserves(SelfMap::random(ctx, &mut rng).table())?;
        }
    }
    Ok(format!(
        "{} fields with q^m <= {INVARIANT_MAX_ORDER}; {maps} linearized maps",
        fields.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("kernel-form determinant criterion iff permutation", criterion_1),
        ("shift-form rank criterion iff permutation, q^l-to-1 shape", criterion_2),
        (
            "single-translator shift: b != -1 permutes, b = -1 is q-to-1",
            criterion_3,
        ),
        ("two-translator rank identity", criterion_4),
        ("complete-mapping rank pair iff F and F + x permute", criterion_5),
        ("trace-sum criterion (forall-exists) iff permutation", criterion_6),
        (
            "three-root polynomial roots and assembled determinant form",
            criterion_7,
        ),
        ("worked examples reproduce at q = 3", criterion_8),
        ("trace representation forward and converse", criterion_9),
        ("field, trace, rank-nullity and histogram invariants", criterion_10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = run();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {}: {name} [{detail}] ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} [{why}] ({secs:.1}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
