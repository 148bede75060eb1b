use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ltperm_core::constructions::theorems::{trace_difference_witness, trace_difference_witness_direct};
use ltperm_core::field::{make_field, Element, FieldCtx, SubElement};
use ltperm_core::linearized::random_linearized;
use ltperm_core::oracle::is_permutation;
use ltperm_core::translators::{
    all_translators, make_translator_map, translator_coefficient, translator_coefficient_on_basis, translator_space,
    FqMap, SelfMap,
};

const FIELDS: [(u64, u64, u64); 6] = [(2, 1, 3), (2, 2, 2), (3, 1, 2), (3, 1, 3), (5, 1, 2), (2, 1, 4)];

fn pick(i: usize) -> FieldCtx {
    let (p, n, m) = FIELDS[i % FIELDS.len()];
    make_field(p, n, m).unwrap()
}

fn rand_el(ctx: &FieldCtx, rng: &mut ChaCha8Rng) -> Element {
    ctx.element(rng.gen_range(0..ctx.order() as u64)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frobenius_is_a_field_automorphism(fi in 0usize..6, seed: u64) {
        let ctx = pick(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (rand_el(&ctx, &mut rng), rand_el(&ctx, &mut rng));
        let fr = |v| ctx.frobenius(v, 1);
        prop_assert_eq!(fr(ctx.add(x, y)), ctx.add(fr(x), fr(y)));
        prop_assert_eq!(fr(ctx.mul(x, y)), ctx.mul(fr(x), fr(y)));
        prop_assert_eq!(ctx.frobenius(x, ctx.m()), x);
        if !x.is_zero() {
            prop_assert_eq!(ctx.pow(x, ctx.order() as u64 - 1), Element::ONE);
        }
    }

    #[test]
    fn trace_of_subfield_element_is_m_times_it(fi in 0usize..6, c in 0u64..25) {
        let ctx = pick(fi);
        let c = ctx.sub_element(c % ctx.q() as u64).unwrap();
        let expected = (0..ctx.m()).fold(SubElement::ZERO, |acc, _| ctx.fq_add(acc, c));
        prop_assert_eq!(ctx.trace(ctx.embed(c)), expected);
    }

    #[test]
    fn kernel_elements_translate_the_trace_form(fi in 0usize..6, seed: u64) {
        let ctx = pick(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, st) = random_linearized(&ctx, &mut rng, None, false, 10_000).unwrap();
        let beta = rand_el(&ctx, &mut rng);
        let f = make_translator_map(&ctx, beta, SelfMap::random(&ctx, &mut rng), l).unwrap();
        for alpha in st.kernel.span(&ctx).into_iter().filter(|a| !a.is_zero()) {
            let expected = ctx.trace(ctx.mul(alpha, beta));
            prop_assert_eq!(translator_coefficient(&ctx, &f, alpha).unwrap(), Some(expected));
        }
    }

    #[test]
    fn translators_form_a_subspace_with_linear_coefficient(fi in 0usize..6, seed: u64) {
        let ctx = pick(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, st) = random_linearized(&ctx, &mut rng, None, false, 10_000).unwrap();
        let f = make_translator_map(&ctx, rand_el(&ctx, &mut rng), SelfMap::random(&ctx, &mut rng), l).unwrap();
        let certs = all_translators(&ctx, &f);
        let space = translator_space(&ctx, &certs);
        prop_assert!(space.is_subspace);
        prop_assert!(space.coefficient_linear);
        prop_assert!(space.basis.dim() >= st.kernel.dim());
    }

    #[test]
    fn basis_check_matches_full_check(fi in 0usize..6, seed: u64, structured: bool) {
        let ctx = pick(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = if structured {
            let (l, _) = random_linearized(&ctx, &mut rng, None, false, 10_000).unwrap();
            make_translator_map(&ctx, rand_el(&ctx, &mut rng), SelfMap::random(&ctx, &mut rng), l).unwrap()
        } else {
            let q = ctx.q() as u64;
            FqMap::from_fn(&ctx, |_| ctx.sub_element(rng.gen_range(0..q)).unwrap())
        };
        for alpha in ctx.elements().skip(1) {
            prop_assert_eq!(
                translator_coefficient(&ctx, &f, alpha).unwrap(),
                translator_coefficient_on_basis(&ctx, &f, alpha).unwrap()
            );
        }
    }

    #[test]
    fn grouped_witness_search_matches_direct_search(fi in 0usize..6, seed: u64, count in 1usize..3) {
        let ctx = pick(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (l, st) = random_linearized(&ctx, &mut rng, None, false, 10_000).unwrap();
        let hs: Vec<SelfMap> = (0..count).map(|_| SelfMap::random(&ctx, &mut rng)).collect();
        let traces: Vec<Vec<SubElement>> =
            hs.iter().map(|h| h.table().iter().map(|&v| ctx.trace(v)).collect()).collect();
        let grouped = trace_difference_witness(&ctx, &l.table(&ctx), &traces);
        let direct = trace_difference_witness_direct(&ctx, &st.kernel, &hs);
        prop_assert_eq!(grouped.is_some(), direct.is_some());
        if let Some((x, eps)) = grouped {
            prop_assert!(!eps.is_zero() && st.kernel.contains(&ctx, eps));
            for h in &hs {
                prop_assert!(ctx.trace(ctx.sub(h.apply(ctx.add(x, eps)), h.apply(x))).is_zero());
            }
        }
    }
}

#[test]
fn affine_shift_by_one_translator_permutes_unless_coefficient_is_minus_one() {
    // x + γ·f(x) with f(x + uγ) = f(x) + u·b maps the coset x + F_qγ to itself
    // as u ↦ u(1 + b) plus a constant.
    let ctx = make_field(3, 1, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let (l, st) = random_linearized(&ctx, &mut rng, Some(1), false, 10_000).unwrap();
        let gamma = st.kernel.vectors()[0];
        let f = make_translator_map(&ctx, rand_el(&ctx, &mut rng), SelfMap::random(&ctx, &mut rng), l).unwrap();
        let b = translator_coefficient(&ctx, &f, gamma).unwrap().unwrap();
        let table: Vec<Element> = ctx
            .elements()
            .map(|x| ctx.add(x, ctx.scale(f.apply(x), gamma)))
            .collect();
        assert_eq!(is_permutation(&table), b != ctx.fq_neg(SubElement::ONE));
    }
}
