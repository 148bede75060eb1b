//! Linearized polynomials `L(x) = Σ a_i x^{q^i}` over `F_{q^m}` viewed as
//! `F_q`-linear maps: evaluation, matrix over the power basis, kernel and
//! image, and the special polynomials used by the constructions.

use rand::Rng;
use thiserror::Error;

use crate::field::{Element, FieldCtx, FieldError, SubElement};
use crate::linalg::FqMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearizedError {
    #[error("expected {expected} coefficients, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("vectors are linearly dependent over F_q")]
    Dependent,
    #[error("{0} is not a primitive element")]
    NotPrimitive(Element),
    #[error("requires m {requirement}, but m = {m}")]
    Degree { m: usize, requirement: String },
    #[error("denominator vanishes")]
    ZeroDenominator,
    #[error("{0} lies in the subfield F_q")]
    InSubfield(Element),
    #[error("no linearized polynomial with {0} found within the retry budget")]
    Unsatisfiable(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Coefficients `(a_0, …, a_{m-1})` of `Σ a_i x^{q^i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearizedPoly {
    coeffs: Vec<Element>,
}

/// A list of elements linearly independent over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceBasis {
    vectors: Vec<Element>,
}

#[derive(Clone, Debug)]
pub struct Structure {
    /// Column `j` holds the coordinates of `L(Y^j)`.
    pub matrix: FqMatrix,
    pub kernel: SubspaceBasis,
    pub image: SubspaceBasis,
    pub bijective: bool,
    /// `Ker(L) ∩ Im(L) = {0}`.
    pub trivial_intersection: bool,
}

impl LinearizedPoly {
    pub fn new(ctx: &FieldCtx, coeffs: Vec<Element>) -> Result<Self, LinearizedError> {
        if coeffs.len() != ctx.m() {
            return Err(LinearizedError::WrongLength {
                expected: ctx.m(),
                got: coeffs.len(),
            });
        }
        Ok(LinearizedPoly { coeffs })
    }

    /// Accepts any number of q-power coefficients, folding `x^{q^i}` onto
    /// `x^{q^{i mod m}}`.
    pub fn from_q_powers(ctx: &FieldCtx, powers: &[Element]) -> Self {
        let mut coeffs = vec![Element::ZERO; ctx.m()];
        for (i, &a) in powers.iter().enumerate() {
            let slot = i % ctx.m();
            coeffs[slot] = ctx.add(coeffs[slot], a);
        }
        LinearizedPoly { coeffs }
    }

    pub fn identity(ctx: &FieldCtx) -> Self {
        Self::from_q_powers(ctx, &[Element::ONE])
    }

    pub fn zero(ctx: &FieldCtx) -> Self {
        Self::from_q_powers(ctx, &[])
    }

    /// `Tr(x) = x + x^q + … + x^{q^{m-1}}`.
    pub fn trace(ctx: &FieldCtx) -> Self {
        LinearizedPoly {
            coeffs: vec![Element::ONE; ctx.m()],
        }
    }

    /// `x − x^{q^k}` on `F_{q^{2k}}`.
    pub fn diff_k(ctx: &FieldCtx, k: usize) -> Result<Self, LinearizedError> {
        if k == 0 || ctx.m() != 2 * k {
            return Err(LinearizedError::Degree {
                m: ctx.m(),
                requirement: format!("= 2k = {}", 2 * k),
            });
        }
        let mut coeffs = vec![Element::ZERO; ctx.m()];
        coeffs[0] = Element::ONE;
        coeffs[k] = ctx.neg(Element::ONE);
        Ok(LinearizedPoly { coeffs })
    }

    /// `N(x) = x^{q^3} + a x^{q^2} + b x^q + c x` with
    /// `a = (α − α^{q^3})(α^{q^2} − α)^{q−1} / (α^{q^2} − α^q)`,
    /// `b = (α^{q^3} − α)(α − α^q)^{q^2−1} / (α^{q^2} − α^q)`, `c = −1 − a − b`.
    /// Its roots include `1, α, α²`.
    pub fn three_root(ctx: &FieldCtx, alpha: Element) -> Result<Self, LinearizedError> {
        if ctx.m() <= 3 {
            return Err(LinearizedError::Degree {
                m: ctx.m(),
                requirement: "> 3".into(),
            });
        }
        if !ctx.is_primitive(alpha) {
            return Err(LinearizedError::NotPrimitive(alpha));
        }
        let q = ctx.q() as u64;
        let fr = |i| ctx.frobenius(alpha, i);
        let den = ctx.sub(fr(2), fr(1));
        if den.is_zero() {
            return Err(LinearizedError::ZeroDenominator);
        }
        let a = ctx.div(
            ctx.mul(ctx.sub(alpha, fr(3)), ctx.pow(ctx.sub(fr(2), alpha), q - 1)),
            den,
        )?;
        let b = ctx.div(
            ctx.mul(ctx.sub(fr(3), alpha), ctx.pow(ctx.sub(alpha, fr(1)), q * q - 1)),
            den,
        )?;
        let c = ctx.sub(ctx.neg(Element::ONE), ctx.add(a, b));
        Ok(Self::from_q_powers(ctx, &[c, b, a, Element::ONE]))
    }

    /// `M(x) = x^{q^2} − (1 + δ) x^q + δ x` with `δ = (γ^q − γ)^{q−1}`; its
    /// kernel contains `1` and `γ`.
    pub fn two_root(ctx: &FieldCtx, gamma: Element) -> Result<Self, LinearizedError> {
        if ctx.in_subfield(gamma) {
            return Err(LinearizedError::InSubfield(gamma));
        }
        let delta = ctx.pow(ctx.sub(ctx.frobenius(gamma, 1), gamma), ctx.q() as u64 - 1);
        let mid = ctx.neg(ctx.add(Element::ONE, delta));
        Ok(Self::from_q_powers(ctx, &[delta, mid, Element::ONE]))
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    pub fn eval(&self, ctx: &FieldCtx, x: Element) -> Element {
        let mut acc = Element::ZERO;
        let mut xi = x;
        for &a in &self.coeffs {
            acc = ctx.add(acc, ctx.mul(a, xi));
            xi = ctx.frobenius(xi, 1);
        }
        acc
    }

    /// Value table indexed by canonical element index.
    pub fn table(&self, ctx: &FieldCtx) -> Vec<Element> {
        let on_basis: Vec<Element> = ctx.prime_basis().into_iter().map(|e| self.eval(ctx, e)).collect();
        ctx.linear_table(&on_basis)
    }

    pub fn matrix(&self, ctx: &FieldCtx) -> FqMatrix {
        let m = ctx.m();
        let mut mat = FqMatrix::zeros(m, m);
        let mut coords = vec![SubElement::ZERO; m];
        for j in 0..m {
            coords.iter_mut().for_each(|c| *c = SubElement::ZERO);
            coords[j] = SubElement::ONE;
            let image = self.eval(ctx, ctx.from_coords(&coords));
            for (i, c) in ctx.coords(image).into_iter().enumerate() {
                mat.set(i, j, c);
            }
        }
        mat
    }

    pub fn structure(&self, ctx: &FieldCtx) -> Structure {
        let matrix = self.matrix(ctx);
        let kernel = SubspaceBasis {
            vectors: matrix.null_space(ctx).iter().map(|v| ctx.from_coords(v)).collect(),
        };
        let image = SubspaceBasis {
            vectors: matrix.column_space(ctx).iter().map(|v| ctx.from_coords(v)).collect(),
        };
        let joint: Vec<Element> = kernel.vectors.iter().chain(&image.vectors).copied().collect();
        let trivial_intersection = rank_of(ctx, &joint) == joint.len();
        Structure {
            bijective: kernel.dim() == 0,
            matrix,
            kernel,
            image,
            trivial_intersection,
        }
    }
}

/// Rank over `F_q` of a list of elements.
pub fn rank_of(ctx: &FieldCtx, vectors: &[Element]) -> usize {
    coord_matrix(ctx, vectors).rank(ctx)
}

/// `m × len` matrix whose columns are the coordinates of `vectors`.
pub fn coord_matrix(ctx: &FieldCtx, vectors: &[Element]) -> FqMatrix {
    let mut mat = FqMatrix::zeros(ctx.m(), vectors.len());
    for (j, &v) in vectors.iter().enumerate() {
        for (i, c) in ctx.coords(v).into_iter().enumerate() {
            mat.set(i, j, c);
        }
    }
    mat
}

impl SubspaceBasis {
    pub fn new(ctx: &FieldCtx, vectors: Vec<Element>) -> Result<Self, LinearizedError> {
        if rank_of(ctx, &vectors) != vectors.len() {
            return Err(LinearizedError::Dependent);
        }
        Ok(SubspaceBasis { vectors })
    }

    pub fn vectors(&self) -> &[Element] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn combination(&self, ctx: &FieldCtx, coeffs: &[SubElement]) -> Element {
        self.vectors
            .iter()
            .zip(coeffs)
            .fold(Element::ZERO, |acc, (&v, &c)| ctx.add(acc, ctx.scale(c, v)))
    }

    /// All `q^dim` elements of the span, in the order of their coefficient
    /// vectors read as base-`q` integers.
    pub fn span(&self, ctx: &FieldCtx) -> Vec<Element> {
        let mut out = vec![Element::ZERO];
        for &v in &self.vectors {
            let multiples: Vec<Element> = ctx.sub_elements().map(|c| ctx.scale(c, v)).collect();
            out = multiples
                .iter()
                .flat_map(|&mv| out.iter().map(move |&x| (mv, x)))
                .map(|(mv, x)| ctx.add(x, mv))
                .collect();
        }
        out
    }

    pub fn contains(&self, ctx: &FieldCtx, x: Element) -> bool {
        let mut with = self.vectors.clone();
        with.push(x);
        rank_of(ctx, &with) == self.dim()
    }

    /// Whether both bases span the same subspace.
    pub fn same_span(&self, ctx: &FieldCtx, other: &SubspaceBasis) -> bool {
        self.dim() == other.dim() && other.vectors.iter().all(|&v| self.contains(ctx, v))
    }

    /// Coordinates of `x` in this basis, if `x` lies in the span.
    pub fn coordinates(&self, ctx: &FieldCtx, x: Element) -> Option<Vec<SubElement>> {
        coord_matrix(ctx, &self.vectors)
            .solve(ctx, &ctx.coords(x))
            .expect("shapes agree")
    }

    /// A uniformly random basis of the same subspace.
    pub fn rebased<R: Rng + ?Sized>(&self, ctx: &FieldCtx, rng: &mut R) -> SubspaceBasis {
        let k = self.dim();
        loop {
            let change: Vec<SubElement> = (0..k * k).map(|_| SubElement(rng.gen_range(0..ctx.q()))).collect();
            let mat = FqMatrix::new(k, k, change).expect("square");
            if mat.rank(ctx) == k {
                let vectors = (0..k).map(|j| self.combination(ctx, &mat.column(j))).collect();
                return SubspaceBasis { vectors };
            }
        }
    }
}

/// Uniformly random coefficients, redrawn until the kernel has the requested
/// dimension (`None` means any positive dimension) and, if asked, until
/// `Ker(L) ∩ Im(L) = {0}`.
pub fn random_linearized<R: Rng + ?Sized>(
    ctx: &FieldCtx,
    rng: &mut R,
    kernel_dim: Option<usize>,
    trivial_intersection: bool,
    max_attempts: usize,
) -> Result<(LinearizedPoly, Structure), LinearizedError> {
    for _ in 0..max_attempts {
        let coeffs = (0..ctx.m()).map(|_| Element(rng.gen_range(0..ctx.order()))).collect();
        let l = LinearizedPoly { coeffs };
        let st = l.structure(ctx);
        let dim = st.kernel.dim();
        let dim_ok = match kernel_dim {
            Some(k) => dim == k,
            None => dim >= 1,
        };
        if dim_ok && (!trivial_intersection || st.trivial_intersection) {
            return Ok((l, st));
        }
    }
    Err(LinearizedError::Unsatisfiable(format!(
        "kernel dimension {} and trivial intersection = {trivial_intersection}",
        kernel_dim.map_or("≥ 1".to_string(), |k| k.to_string())
    )))
}
