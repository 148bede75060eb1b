//! Functions `F_{q^m} → F_q` and their linear translators: nonzero `α` with
//! `f(x + uα) − f(x) = u·a` for all `x` and all `u ∈ F_q`.

use rand::Rng;
use thiserror::Error;

use crate::field::{Element, FieldCtx, SubElement};
use crate::linalg::FqMatrix;
use crate::linearized::{LinearizedPoly, SubspaceBasis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslatorError {
    #[error("a linear translator must be nonzero")]
    ZeroAlpha,
    #[error("the linearized polynomial is bijective, so it has no nonzero kernel to translate along")]
    BijectiveL,
    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("table entry {position} has index {index}, outside a field of {order} elements")]
    EntryOutOfRange { position: usize, index: u32, order: u32 },
    #[error("table disagrees with its description at element #{0}")]
    DescriptionMismatch(u32),
    #[error("gamma {i} is not a linear translator of f {j}")]
    NotATranslator { i: usize, j: usize },
}

/// A map `F_{q^m} → F_{q^m}` stored as a full table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfMap {
    table: Vec<Element>,
    /// Coefficients `c_0, c_1, …` of `Σ c_d x^d` when the map came from a polynomial.
    poly: Option<Vec<Element>>,
}

/// `x ↦ Tr(βx + H(L(x)))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceForm {
    pub beta: Element,
    pub h: SelfMap,
    pub l: LinearizedPoly,
}

/// A map `F_{q^m} → F_q` stored as a full table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMap {
    table: Vec<SubElement>,
    description: Option<TraceForm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslatorCertificate {
    pub alpha: Element,
    pub a: SubElement,
}

/// Shape of the set of translators found for one function.
#[derive(Clone, Debug)]
pub struct TranslatorSpace {
    /// A basis of the span of the translators.
    pub basis: SubspaceBasis,
    /// Translators together with zero form exactly that span.
    pub is_subspace: bool,
    /// `α ↦ a` agrees with its linear extension from the basis.
    pub coefficient_linear: bool,
}

fn check_range<T: crate::field::Indexed>(table: &[T], order: u32) -> Result<(), TranslatorError> {
    for (position, v) in table.iter().enumerate() {
        if v.index() >= order {
            return Err(TranslatorError::EntryOutOfRange {
                position,
                index: v.index(),
                order,
            });
        }
    }
    Ok(())
}

fn check_len(expected: u32, got: usize) -> Result<(), TranslatorError> {
    if got != expected as usize {
        return Err(TranslatorError::TableLength {
            expected: expected as usize,
            got,
        });
    }
    Ok(())
}

impl SelfMap {
    pub fn from_table(ctx: &FieldCtx, table: Vec<Element>) -> Result<Self, TranslatorError> {
        check_len(ctx.order(), table.len())?;
        check_range(&table, ctx.order())?;
        Ok(SelfMap { table, poly: None })
    }

    pub fn from_fn(ctx: &FieldCtx, f: impl FnMut(Element) -> Element) -> Self {
        SelfMap {
            table: ctx.elements().map(f).collect(),
            poly: None,
        }
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        Self::polynomial(ctx, vec![])
    }

    pub fn identity(ctx: &FieldCtx) -> Self {
        Self::polynomial(ctx, vec![Element::ZERO, Element::ONE])
    }

    /// `x ↦ Σ c_d x^d`, evaluated by Horner's rule.
    pub fn polynomial(ctx: &FieldCtx, coeffs: Vec<Element>) -> Self {
        let table = ctx
            .elements()
            .map(|x| {
                coeffs
                    .iter()
                    .rev()
                    .fold(Element::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c))
            })
            .collect();
        SelfMap {
            table,
            poly: Some(coeffs),
        }
    }

    /// Uniformly random table.
    pub fn random<R: Rng + ?Sized>(ctx: &FieldCtx, rng: &mut R) -> Self {
        SelfMap {
            table: (0..ctx.order())
                .map(|_| Element(rng.gen_range(0..ctx.order())))
                .collect(),
            poly: None,
        }
    }

    pub fn table(&self) -> &[Element] {
        &self.table
    }

    pub fn poly(&self) -> Option<&[Element]> {
        self.poly.as_deref()
    }

    pub fn apply(&self, x: Element) -> Element {
        self.table[x.index() as usize]
    }
}

impl FqMap {
    pub fn from_table(ctx: &FieldCtx, table: Vec<SubElement>) -> Result<Self, TranslatorError> {
        check_len(ctx.order(), table.len())?;
        check_range(&table, ctx.q())?;
        Ok(FqMap {
            table,
            description: None,
        })
    }

    pub fn from_fn(ctx: &FieldCtx, f: impl FnMut(Element) -> SubElement) -> Self {
        FqMap {
            table: ctx.elements().map(f).collect(),
            description: None,
        }
    }

    /// The relative trace itself.
    pub fn trace(ctx: &FieldCtx) -> Self {
        Self::from_fn(ctx, |x| ctx.trace(x))
    }

    /// `x ↦ Tr(βx + H(L(x)))` for any `L`, bijective or not.
    pub fn trace_form(ctx: &FieldCtx, form: TraceForm) -> Self {
        let l_table = form.l.table(ctx);
        let table = ctx
            .elements()
            .map(|x| {
                let inner = ctx.add(ctx.mul(form.beta, x), form.h.apply(l_table[x.index() as usize]));
                ctx.trace(inner)
            })
            .collect();
        FqMap {
            table,
            description: Some(form),
        }
    }

    /// A table with a claimed description, checked pointwise.
    pub fn with_description(ctx: &FieldCtx, table: Vec<SubElement>, form: TraceForm) -> Result<Self, TranslatorError> {
        let built = Self::trace_form(ctx, form);
        check_len(ctx.order(), table.len())?;
        if let Some(i) = (0..table.len()).find(|&i| table[i] != built.table[i]) {
            return Err(TranslatorError::DescriptionMismatch(i as u32));
        }
        Ok(built)
    }

    pub fn table(&self) -> &[SubElement] {
        &self.table
    }

    pub fn description(&self) -> Option<&TraceForm> {
        self.description.as_ref()
    }

    pub fn apply(&self, x: Element) -> SubElement {
        self.table[x.index() as usize]
    }
}

/// `x ↦ Tr(βx + H(L(x)))` for a non-bijective `L`; every nonzero kernel
/// element of `L` is then a `Tr(αβ)`-translator of the result.
pub fn make_translator_map(
    ctx: &FieldCtx,
    beta: Element,
    h: SelfMap,
    l: LinearizedPoly,
) -> Result<FqMap, TranslatorError> {
    if l.structure(ctx).bijective {
        return Err(TranslatorError::BijectiveL);
    }
    Ok(FqMap::trace_form(ctx, TraceForm { beta, h, l }))
}

fn holds_for(ctx: &FieldCtx, f: &FqMap, alpha: Element, a: SubElement, us: &[SubElement]) -> bool {
    let shifts: Vec<(Element, SubElement)> = us.iter().map(|&u| (ctx.scale(u, alpha), ctx.fq_mul(u, a))).collect();
    ctx.elements().all(|x| {
        let fx = f.apply(x);
        shifts
            .iter()
            .all(|&(ua, expect)| ctx.fq_sub(f.apply(ctx.add(x, ua)), fx) == expect)
    })
}

/// The `a` making `α` an `a`-linear translator of `f`, checking every `u ∈ F_q`.
pub fn translator_coefficient(
    ctx: &FieldCtx,
    f: &FqMap,
    alpha: Element,
) -> Result<Option<SubElement>, TranslatorError> {
    let us: Vec<SubElement> = ctx.sub_elements().collect();
    coefficient_over(ctx, f, alpha, &us)
}

/// As [`translator_coefficient`], checking `u` only over the `F_p`-basis
/// `1, X, …, X^{n−1}` of `F_q`. Equivalent, since the defining identity is
/// additive in `u` once it holds for every `x`.
pub fn translator_coefficient_on_basis(
    ctx: &FieldCtx,
    f: &FqMap,
    alpha: Element,
) -> Result<Option<SubElement>, TranslatorError> {
    let us: Vec<SubElement> = (0..ctx.n()).map(|i| SubElement(ctx.p().pow(i as u32))).collect();
    coefficient_over(ctx, f, alpha, &us)
}

fn coefficient_over(
    ctx: &FieldCtx,
    f: &FqMap,
    alpha: Element,
    us: &[SubElement],
) -> Result<Option<SubElement>, TranslatorError> {
    if alpha.is_zero() {
        return Err(TranslatorError::ZeroAlpha);
    }
    let a = ctx.fq_sub(f.apply(alpha), f.apply(Element::ZERO));
    Ok(holds_for(ctx, f, alpha, a, us).then_some(a))
}

/// Every translator of `f`, in ascending index order.
pub fn all_translators(ctx: &FieldCtx, f: &FqMap) -> Vec<TranslatorCertificate> {
    ctx.elements()
        .skip(1)
        .filter_map(|alpha| {
            translator_coefficient(ctx, f, alpha)
                .expect("alpha is nonzero")
                .map(|a| TranslatorCertificate { alpha, a })
        })
        .collect()
}

/// Span, closure and linearity of a translator listing.
pub fn translator_space(ctx: &FieldCtx, certs: &[TranslatorCertificate]) -> TranslatorSpace {
    let mut basis_vecs: Vec<Element> = Vec::new();
    let mut basis_coeffs: Vec<SubElement> = Vec::new();
    for c in certs {
        let mut trial = basis_vecs.clone();
        trial.push(c.alpha);
        if crate::linearized::rank_of(ctx, &trial) == trial.len() {
            basis_vecs = trial;
            basis_coeffs.push(c.a);
        }
    }
    let basis = SubspaceBasis::new(ctx, basis_vecs).expect("independent by construction");
    let span_size = (ctx.q() as u64).pow(basis.dim() as u32);
    let is_subspace = certs.len() as u64 + 1 == span_size;
    let coefficient_linear = certs.iter().all(|c| {
        let coords = basis.coordinates(ctx, c.alpha).expect("in span");
        let predicted = coords
            .iter()
            .zip(&basis_coeffs)
            .fold(SubElement::ZERO, |acc, (&u, &a)| ctx.fq_add(acc, ctx.fq_mul(u, a)));
        predicted == c.a
    });
    TranslatorSpace {
        basis,
        is_subspace,
        coefficient_linear,
    }
}

/// `B[i][j]` = the coefficient making `γ_i` a translator of `f_j`, checked
/// over the `F_p`-basis of `F_q`. Failures name `(i, j)` counting from one.
pub fn translator_matrix(ctx: &FieldCtx, gammas: &[Element], fs: &[FqMap]) -> Result<FqMatrix, TranslatorError> {
    let mut b = FqMatrix::zeros(gammas.len(), fs.len());
    for (i, &g) in gammas.iter().enumerate() {
        for (j, f) in fs.iter().enumerate() {
            match translator_coefficient_on_basis(ctx, f, g)? {
                Some(a) => b.set(i, j, a),
                None => return Err(TranslatorError::NotATranslator { i: i + 1, j: j + 1 }),
            }
        }
    }
    Ok(b)
}

/// A random `β` with `Tr(γ_i β) = targets[i]` for each `i`, or `None` when the
/// system is inconsistent (never, for independent `γ`).
pub fn beta_for_traces<R: Rng + ?Sized>(
    ctx: &FieldCtx,
    gammas: &[Element],
    targets: &[SubElement],
    rng: &mut R,
) -> Option<Element> {
    let m = ctx.m();
    let mut system = FqMatrix::zeros(gammas.len(), m);
    let mut unit = vec![SubElement::ZERO; m];
    for c in 0..m {
        unit[c] = SubElement::ONE;
        let basis_vec = ctx.from_coords(&unit);
        unit[c] = SubElement::ZERO;
        for (i, &g) in gammas.iter().enumerate() {
            system.set(i, c, ctx.trace(ctx.mul(g, basis_vec)));
        }
    }
    let mut v = system.solve(ctx, targets).expect("shapes agree")?;
    for free in system.null_space(ctx) {
        let u = SubElement(rng.gen_range(0..ctx.q()));
        for (vi, fi) in v.iter_mut().zip(free) {
            *vi = ctx.fq_add(*vi, ctx.fq_mul(u, fi));
        }
    }
    Some(ctx.from_coords(&v))
}

/// `(Tr(γ_i β_j))`.
pub fn trace_pairing(ctx: &FieldCtx, gammas: &[Element], betas: &[Element]) -> FqMatrix {
    let mut out = FqMatrix::zeros(gammas.len(), betas.len());
    for (i, &g) in gammas.iter().enumerate() {
        for (j, &b) in betas.iter().enumerate() {
            out.set(i, j, ctx.trace(ctx.mul(g, b)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trace_of_square(ctx: &FieldCtx) -> FqMap {
        FqMap::from_fn(ctx, |x| ctx.trace(ctx.mul(x, x)))
    }

    #[test]
    fn f9_coefficients() {
        let k = make_field(3, 1, 2).unwrap();
        let alpha = Element(3);
        let tr = FqMap::trace(&k);
        assert_eq!(translator_coefficient(&k, &tr, Element::ONE), Ok(Some(SubElement(2))));
        assert_eq!(translator_coefficient(&k, &tr, alpha), Ok(Some(SubElement(0))));
        assert_eq!(translator_coefficient(&k, &trace_of_square(&k), Element::ONE), Ok(None));
        assert_eq!(
            translator_coefficient(&k, &tr, Element::ZERO),
            Err(TranslatorError::ZeroAlpha)
        );
    }

    #[test]
    fn f9_search() {
        let k = make_field(3, 1, 2).unwrap();
        let certs = all_translators(&k, &FqMap::trace(&k));
        assert_eq!(certs.len(), 8);
        let space = translator_space(&k, &certs);
        assert_eq!(space.basis.dim(), 2);
        assert!(space.is_subspace && space.coefficient_linear);

        let zero = FqMap::from_fn(&k, |_| SubElement::ZERO);
        let certs = all_translators(&k, &zero);
        assert_eq!(certs.len(), 8);
        assert!(certs.iter().all(|c| c.a.is_zero()));

        assert!(all_translators(&k, &trace_of_square(&k)).is_empty());
    }

    #[test]
    fn f9_translator_maps() {
        let k = make_field(3, 1, 2).unwrap();
        let alpha = Element(3);
        let l = LinearizedPoly::diff_k(&k, 1).unwrap();
        let f = make_translator_map(&k, alpha, SelfMap::zero(&k), l.clone()).unwrap();
        assert_eq!(translator_coefficient(&k, &f, Element::ONE), Ok(Some(SubElement(0))));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = make_translator_map(&k, Element::ONE, SelfMap::random(&k, &mut rng), l.clone()).unwrap();
        assert_eq!(translator_coefficient(&k, &f, Element::ONE), Ok(Some(SubElement(2))));

        let f = make_translator_map(&k, Element::ZERO, SelfMap::zero(&k), l).unwrap();
        assert!(f.table().iter().all(|v| v.is_zero()));

        let id = LinearizedPoly::identity(&k);
        assert_eq!(
            make_translator_map(&k, Element::ONE, SelfMap::zero(&k), id),
            Err(TranslatorError::BijectiveL)
        );
    }

    #[test]
    fn f9_matrices() {
        let k = make_field(3, 1, 2).unwrap();
        let tr = FqMap::trace(&k);
        let b = translator_matrix(&k, &[Element::ONE], std::slice::from_ref(&tr)).unwrap();
        assert_eq!(b.get(0, 0), SubElement(2));
        let b = translator_matrix(&k, &[Element(3)], std::slice::from_ref(&tr)).unwrap();
        assert_eq!(b.get(0, 0), SubElement(0));
        assert_eq!(
            translator_matrix(&k, &[Element::ONE], &[trace_of_square(&k)]),
            Err(TranslatorError::NotATranslator { i: 1, j: 1 })
        );
    }

    #[test]
    fn basis_check_matches_full_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for &(p, n, m) in &[(2u64, 2u64, 2u64), (3, 2, 2), (2, 3, 1), (2, 2, 3)] {
            let k = make_field(p, n, m).unwrap();
            let ker_l = if m >= 2 {
                LinearizedPoly::trace(&k)
            } else {
                LinearizedPoly::zero(&k)
            };
            let mut maps = vec![FqMap::from_fn(&k, |_| SubElement(rng.gen_range(0..k.q())))];
            for _ in 0..3 {
                let beta = Element(rng.gen_range(0..k.order()));
                maps.push(make_translator_map(&k, beta, SelfMap::random(&k, &mut rng), ker_l.clone()).unwrap());
            }
            for f in &maps {
                for alpha in k.elements().skip(1) {
                    assert_eq!(
                        translator_coefficient(&k, f, alpha),
                        translator_coefficient_on_basis(&k, f, alpha),
                    );
                }
            }
        }
    }

    #[test]
    fn prescribed_traces() {
        let k = make_field(3, 1, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gammas = [Element(1), Element(3), Element(10)];
        for _ in 0..20 {
            let targets: Vec<SubElement> = (0..3).map(|_| SubElement(rng.gen_range(0..3))).collect();
            let beta = beta_for_traces(&k, &gammas, &targets, &mut rng).unwrap();
            let got = trace_pairing(&k, &gammas, &[beta]);
            assert_eq!(got.column(0), targets);
        }
    }

    #[test]
    fn description_must_match_table() {
        let k = make_field(2, 1, 2).unwrap();
        let form = TraceForm {
            beta: Element::ONE,
            h: SelfMap::zero(&k),
            l: LinearizedPoly::trace(&k),
        };
        let good = FqMap::trace_form(&k, form.clone());
        assert!(FqMap::with_description(&k, good.table().to_vec(), form.clone()).is_ok());
        let mut bad = good.table().to_vec();
        bad[3] = SubElement(1 - bad[3].index());
        assert_eq!(
            FqMap::with_description(&k, bad, form),
            Err(TranslatorError::DescriptionMismatch(3))
        );
        assert!(FqMap::from_table(&k, vec![SubElement(0); 3]).is_err());
        assert!(FqMap::from_table(&k, vec![SubElement(2); 4]).is_err());
    }
}
