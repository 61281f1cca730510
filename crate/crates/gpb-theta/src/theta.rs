//! Theta divisors for GPBs: the product equation in the glue scalars, the
//! eigenvalue-avoiding choice of a theta line bundle, the Hom-vanishing
//! verifier, the Hom-system determinant as a multivariate polynomial, and
//! the vanishing bound for morphisms out of degree-(1-g) line GPBs.

use crate::field::Field;
use crate::gpb::{hom_space, hom_system_matrix, Gpb, GpbError, GpbMorphism, GpbType};
use crate::matrix::{Matrix, MatrixError};
use crate::poly::{MultiPoly, PolyError, UniPoly};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ThetaError {
    #[error("operation requires a type-B GPB")]
    TypeT,
    #[error("prime field of size {p} is too small; need p > {needed}")]
    PrimeFieldTooSmall { p: u64, needed: u64 },
    #[error("hom system is not square ({rows}x{cols}); requires deg(V) = 0 and every twist >= 1-g")]
    NonSquareSystem { rows: usize, cols: usize },
    #[error("morphism source must be a line bundle of degree 1-g (got {0:?})")]
    BadSource(Vec<i64>),
    #[error("the zero morphism is rejected")]
    ZeroMorphism,
    #[error(transparent)]
    Gpb(#[from] GpbError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A theta line bundle candidate: the glue scalars of a rank-1 type-B GPB
/// with underlying bundle O(1-g).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaLineSpec<F: Field> {
    pub lambda: Vec<F::Elem>,
    pub degree: i64,
}

impl<F: Field> ThetaLineSpec<F> {
    pub fn new(field: &F, lambda: Vec<F::Elem>) -> Result<Self, ThetaError> {
        if lambda.iter().any(|l| field.is_zero(l)) {
            return Err(ThetaError::TypeT);
        }
        let degree = 1 - lambda.len() as i64;
        Ok(ThetaLineSpec { lambda, degree })
    }

    /// The rank-1 type-B GPB this spec describes, on the given line.
    pub fn to_gpb(&self, line: &crate::bundles::MarkedLine<F>) -> Result<Gpb<F>, GpbError> {
        Gpb::rank1_type_b(line.clone(), self.degree, &self.lambda)
    }
}

/// The product of the per-pair factors det(A_i - λ_i I), kept both as the
/// list of univariate factors and fully expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaPolynomial<F: Field> {
    pub factors: Vec<UniPoly<F>>,
    pub expanded: MultiPoly<F>,
}

impl<F: Field> ThetaPolynomial<F> {
    pub fn eval(&self, lambda: &[F::Elem]) -> Result<F::Elem, PolyError> {
        self.expanded.eval(lambda)
    }
}

/// det(A - x I) as a univariate polynomial in x, by interpolation at the
/// r+1 points 0..=r (its degree is exactly r).
fn glue_char_factor<F: Field>(field: &F, a: &Matrix<F>) -> Result<UniPoly<F>, ThetaError> {
    let r = a.rows();
    if let crate::field::FieldSpec::PrimeField { characteristic } = field.spec() {
        if characteristic <= r as u64 {
            return Err(ThetaError::PrimeFieldTooSmall {
                p: characteristic,
                needed: r as u64,
            });
        }
    }
    let nodes: Vec<F::Elem> = (0..=r as i64).map(|n| field.from_i64(n)).collect();
    let mut values = Vec::with_capacity(nodes.len());
    for x in &nodes {
        let mut m = a.clone();
        for i in 0..r {
            *m.at_mut(i, i) = field.sub(a.at(i, i), x);
        }
        values.push(m.det()?);
    }
    Ok(UniPoly::interpolate(field.clone(), &nodes, &values)?)
}

/// The product equation: prod_i det(A_i - λ_i I) as a polynomial in
/// (λ_1, ..., λ_g). Type T is rejected.
pub fn product_theta<F: Field>(v: &Gpb<F>) -> Result<ThetaPolynomial<F>, ThetaError> {
    if v.classify_type() != GpbType::B {
        return Err(ThetaError::TypeT);
    }
    let field = v.field().clone();
    let glues = v.glue_matrices()?;
    let g = v.genus();
    let mut factors = Vec::with_capacity(g);
    let mut expanded = MultiPoly::constant(field.clone(), field.one(), g);
    for (i, a) in glues.iter().enumerate() {
        let factor = glue_char_factor(&field, a)?;
        expanded = expanded.mul(&MultiPoly::from_univariate(&factor, i, g));
        factors.push(factor);
    }
    Ok(ThetaPolynomial { factors, expanded })
}

/// For each pair, the smallest scalar of the deterministic trial sequence
/// 1, 2, 3, ... that is not an eigenvalue of the glue matrix. At most r+1
/// trials are ever needed; a prime field must satisfy p > 2r + 1 so the
/// trial scalars are distinct, nonzero residues.
pub fn choose_theta_glue<F: Field>(v: &Gpb<F>) -> Result<ThetaLineSpec<F>, ThetaError> {
    if v.classify_type() != GpbType::B {
        return Err(ThetaError::TypeT);
    }
    let field = v.field().clone();
    let r = v.rank() as u64;
    if let crate::field::FieldSpec::PrimeField { characteristic } = field.spec() {
        if characteristic <= 2 * r + 1 {
            return Err(ThetaError::PrimeFieldTooSmall {
                p: characteristic,
                needed: 2 * r + 1,
            });
        }
    }
    let glues = v.glue_matrices()?;
    let mut lambda = Vec::with_capacity(v.genus());
    for a in &glues {
        let mut chosen = None;
        for trial in 1..=(r + 1) as i64 {
            let x = field.from_i64(trial);
            let mut m = a.clone();
            for i in 0..a.rows() {
                *m.at_mut(i, i) = field.sub(a.at(i, i), &x);
            }
            if !field.is_zero(&m.det()?) {
                chosen = Some(x);
                break;
            }
        }
        lambda.push(chosen.expect("a matrix has at most r eigenvalues"));
    }
    ThetaLineSpec::new(&field, lambda)
}

/// Whether the rank-1 type-B GPB built from `l` has no nonzero morphism to
/// `v`: the sole success criterion is Hom dimension zero.
pub fn verify_theta<F: Field>(l: &ThetaLineSpec<F>, v: &Gpb<F>) -> Result<bool, ThetaError> {
    let line_gpb = l.to_gpb(v.line())?;
    let (dim, _) = hom_space(&line_gpb, v)?;
    Ok(dim == 0)
}

/// Hom dimension from the theta line to v (the quantity verify_theta tests
/// for zero).
pub fn theta_hom_dimension<F: Field>(l: &ThetaLineSpec<F>, v: &Gpb<F>) -> Result<usize, ThetaError> {
    let line_gpb = l.to_gpb(v.line())?;
    let (dim, _) = hom_space(&line_gpb, v)?;
    Ok(dim)
}

/// The grid {1..size}^g of nonzero trial scalars, in odometer order with the
/// last variable fastest.
pub fn lambda_grid<F: Field>(field: &F, g: usize, size: u32) -> Vec<Vec<F::Elem>> {
    let values: Vec<F::Elem> = (1..=size as i64).map(|n| field.from_i64(n)).collect();
    let mut out = Vec::with_capacity((size as usize).pow(g as u32));
    let mut idx = vec![0usize; g];
    'outer: loop {
        out.push(idx.iter().map(|&i| values[i].clone()).collect());
        let mut pos = g;
        while pos > 0 {
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < values.len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }
    out
}

fn multi_interpolate<F: Field>(
    field: &F,
    nodes: &[Vec<F::Elem>],
    values: &[F::Elem],
    nvars_total: usize,
) -> Result<MultiPoly<F>, ThetaError> {
    if nodes.is_empty() {
        assert_eq!(values.len(), 1);
        return Ok(MultiPoly::constant(field.clone(), values[0].clone(), nvars_total));
    }
    let var = nvars_total - nodes.len();
    let first = &nodes[0];
    let rest = &nodes[1..];
    let block: usize = rest.iter().map(|n| n.len()).product();
    let mut acc = MultiPoly::zero(field.clone(), nvars_total);
    for (i, node) in first.iter().enumerate() {
        let sub = multi_interpolate(field, rest, &values[i * block..(i + 1) * block], nvars_total)?;
        // Lagrange basis polynomial for this node in variable `var`.
        let mut basis = MultiPoly::constant(field.clone(), field.one(), nvars_total);
        for (j, other) in first.iter().enumerate() {
            if i == j {
                continue;
            }
            let denom = field.sub(node, other);
            let inv = field.inv(&denom).ok_or(PolyError::RepeatedNode)?;
            let mut lin = MultiPoly::zero(field.clone(), nvars_total);
            let mut exps = vec![0u32; nvars_total];
            exps[var] = 1;
            lin.add_term(exps, inv.clone());
            lin.add_term(vec![0; nvars_total], field.neg(&field.mul(other, &inv)));
            basis = basis.mul(&lin);
        }
        acc = acc.add(&basis.mul(&sub));
    }
    Ok(acc)
}

/// The determinant of the Hom coefficient system for morphisms
/// (O(1-g), graph λ) -> v, as an exact polynomial in (λ_1, ..., λ_g).
///
/// It vanishes at λ exactly where the Hom space is nonzero, and has degree
/// at most r in each variable, so interpolation on the (r+1)^g grid of
/// nonzero trial scalars recovers it exactly. Requires the system to be
/// square: deg(V) = 0 with every twist at least 1-g.
pub fn hom_determinant<F: Field>(v: &Gpb<F>) -> Result<MultiPoly<F>, ThetaError> {
    if v.classify_type() != GpbType::B {
        return Err(ThetaError::TypeT);
    }
    let field = v.field().clone();
    let g = v.genus();
    let r = v.rank();
    let grid_size = (r + 1) as u32;
    if let crate::field::FieldSpec::PrimeField { characteristic } = field.spec() {
        if characteristic <= grid_size as u64 {
            return Err(ThetaError::PrimeFieldTooSmall {
                p: characteristic,
                needed: grid_size as u64,
            });
        }
    }
    // Square-system preconditions checked on a probe point.
    let probe = ThetaLineSpec::new(&field, vec![field.one(); g])?;
    let probe_gpb = probe.to_gpb(v.line())?;
    let system = hom_system_matrix(&probe_gpb, v)?;
    if system.rows() != system.cols() || system.rows() != r * g {
        return Err(ThetaError::NonSquareSystem {
            rows: system.rows(),
            cols: system.cols(),
        });
    }
    let nodes: Vec<Vec<F::Elem>> =
        vec![(1..=grid_size as i64).map(|n| field.from_i64(n)).collect(); g];
    let mut values = Vec::with_capacity((grid_size as usize).pow(g as u32));
    for lambda in lambda_grid(&field, g, grid_size) {
        let l = ThetaLineSpec::new(&field, lambda)?;
        let w = l.to_gpb(v.line())?;
        let m = hom_system_matrix(&w, v)?;
        values.push(m.det()?);
    }
    multi_interpolate(&field, &nodes, &values, g)
}

/// Vanishing count of a nonzero GPB morphism from a degree-(1-g) line GPB,
/// and whether it satisfies the d <= 2g - 1 bound. The caller asserts
/// semistability of the (type-B, degree-0) target; this checks the rest.
pub fn vanishing_bound_check<F: Field>(
    f: &GpbMorphism<F>,
    v: &Gpb<F>,
) -> Result<(usize, bool), ThetaError> {
    if v.classify_type() != GpbType::B || v.bundle().degree() != 0 {
        return Err(ThetaError::TypeT);
    }
    let g = v.genus() as i64;
    let src = f.underlying.source();
    if src.rank() != 1 || src.degree() != 1 - g {
        return Err(ThetaError::BadSource(src.twists().to_vec()));
    }
    if f.underlying.is_zero() {
        return Err(ThetaError::ZeroMorphism);
    }
    let vp = crate::bundles::vanishing_points(&f.underlying, v.line()).map_err(GpbError::from)?;
    let d = vp.count();
    Ok((d, d as i64 <= 2 * g - 1))
}
