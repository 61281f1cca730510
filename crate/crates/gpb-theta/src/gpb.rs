//! Generalized parabolic bundles: a split bundle plus a chosen subspace of
//! the fiber sum at each marked pair, morphism spaces, induced structures on
//! subsheaves, and degree/slope bookkeeping.
//!
//! Fiber-sum coordinates are always ordered a-fiber block first, then
//! b-fiber block, components following the splitting type. Subspaces are
//! RREF-canonical, so structure equality is matrix equality.

use crate::bundles::{BundleError, MarkedLine, PolyMatrixHom, SplitBundle};
use crate::field::Field;
use crate::matrix::{Matrix, Subspace};
use num::rational::Ratio;
use thiserror::Error;

pub type Slope = Ratio<i64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GpbError {
    #[error("structure data count {got} does not match genus {genus}")]
    StructureCount { got: usize, genus: usize },
    #[error("glue matrix {index} is not an invertible {rank}x{rank} matrix")]
    BadGlue { index: usize, rank: usize },
    #[error("structure subspace {index} lives in ambient dimension {got}, expected {expected}")]
    BadAmbient {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("operation requires a type-B structure, but pair {index} is not a graph")]
    NotTypeB { index: usize },
    #[error("the two GPBs live on different marked lines")]
    LineMismatch,
    #[error("inclusion is not injective as a sheaf map")]
    NotInjective,
    #[error("morphism shape does not match the bundles")]
    ShapeMismatch,
    #[error(transparent)]
    Bundle(#[from] BundleError),
}

/// Per-pair structure data: either invertible glue matrices whose graphs are
/// the subspaces (type B in graph form) or arbitrary RREF-canonical
/// subspaces of the fiber sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure<F: Field> {
    Graphs(Vec<Matrix<F>>),
    Subspaces(Vec<Subspace<F>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpbType {
    B,
    T,
}

/// A generalized parabolic bundle (V, {F_i}) on a marked line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gpb<F: Field> {
    bundle: SplitBundle,
    line: MarkedLine<F>,
    structure: Structure<F>,
}

/// The graph of A inside k^r + k^r: row space of [I | A^T].
pub fn graph_to_subspace<F: Field>(glue: &Matrix<F>) -> Subspace<F> {
    let f = glue.field().clone();
    let r = glue.rows();
    let mut rows = Matrix::zeros(f.clone(), r, 2 * r);
    for j in 0..r {
        *rows.at_mut(j, j) = f.one();
        for i in 0..r {
            *rows.at_mut(j, r + i) = glue.at(i, j).clone();
        }
    }
    Subspace::from_rows(&rows)
}

/// Recover the glue matrix from a graph subspace. Fails with a
/// classification error when the subspace is not a graph of an isomorphism.
pub fn subspace_to_graph<F: Field>(s: &Subspace<F>, index: usize) -> Result<Matrix<F>, GpbError> {
    let ambient = s.ambient_dim();
    assert!(ambient % 2 == 0, "fiber sum has even dimension");
    let r = ambient / 2;
    if s.dim() != r {
        return Err(GpbError::NotTypeB { index });
    }
    let f = s.basis().field().clone();
    let mut a_block = Matrix::zeros(f.clone(), r, r);
    let mut b_block = Matrix::zeros(f.clone(), r, r);
    for row in 0..r {
        for c in 0..r {
            *a_block.at_mut(row, c) = s.basis().at(row, c).clone();
            *b_block.at_mut(row, c) = s.basis().at(row, r + c).clone();
        }
    }
    let a_inv = a_block.inverse().ok_or(GpbError::NotTypeB { index })?;
    // Rows are (x, Ax): B_b = B_a·A^T, so A = (B_a^{-1}·B_b)^T.
    let glue = a_inv.mul_matrix(&b_block).transpose();
    if glue.inverse().is_none() {
        return Err(GpbError::NotTypeB { index });
    }
    Ok(glue)
}

impl<F: Field> Gpb<F> {
    pub fn new(
        bundle: SplitBundle,
        line: MarkedLine<F>,
        structure: Structure<F>,
    ) -> Result<Self, GpbError> {
        let g = line.genus();
        let r = bundle.rank();
        match &structure {
            Structure::Graphs(glues) => {
                if glues.len() != g {
                    return Err(GpbError::StructureCount {
                        got: glues.len(),
                        genus: g,
                    });
                }
                for (i, a) in glues.iter().enumerate() {
                    if a.rows() != r || a.cols() != r || a.inverse().is_none() {
                        return Err(GpbError::BadGlue { index: i, rank: r });
                    }
                }
            }
            Structure::Subspaces(subs) => {
                if subs.len() != g {
                    return Err(GpbError::StructureCount {
                        got: subs.len(),
                        genus: g,
                    });
                }
                for (i, s) in subs.iter().enumerate() {
                    if s.ambient_dim() != 2 * r {
                        return Err(GpbError::BadAmbient {
                            index: i,
                            got: s.ambient_dim(),
                            expected: 2 * r,
                        });
                    }
                }
            }
        }
        Ok(Gpb {
            bundle,
            line,
            structure,
        })
    }

    /// The rank-1 type-B GPB (O(e), graph of λ_i at each pair).
    pub fn rank1_type_b(
        line: MarkedLine<F>,
        e: i64,
        lambdas: &[F::Elem],
    ) -> Result<Self, GpbError> {
        let f = line.field().clone();
        let glues = lambdas
            .iter()
            .map(|l| Matrix::new(f.clone(), 1, 1, vec![l.clone()]))
            .collect();
        Gpb::new(SplitBundle::line(e), line, Structure::Graphs(glues))
    }

    /// The trivial GPB (O, graph of the identity at every pair); it descends
    /// to the structure sheaf of the nodal curve.
    pub fn trivial(line: MarkedLine<F>) -> Self {
        let one = line.field().one();
        let lambdas = vec![one; line.genus()];
        Gpb::rank1_type_b(line, 0, &lambdas).expect("identity glue is invertible")
    }

    pub fn bundle(&self) -> &SplitBundle {
        &self.bundle
    }

    pub fn line(&self) -> &MarkedLine<F> {
        &self.line
    }

    pub fn field(&self) -> &F {
        self.line.field()
    }

    pub fn structure(&self) -> &Structure<F> {
        &self.structure
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    pub fn genus(&self) -> usize {
        self.line.genus()
    }

    /// The structure subspace at pair i, in canonical form.
    pub fn structure_subspace(&self, i: usize) -> Subspace<F> {
        match &self.structure {
            Structure::Graphs(glues) => graph_to_subspace(&glues[i]),
            Structure::Subspaces(subs) => subs[i].clone(),
        }
    }

    pub fn structure_dim(&self, i: usize) -> usize {
        match &self.structure {
            Structure::Graphs(_) => self.rank(),
            Structure::Subspaces(subs) => subs[i].dim(),
        }
    }

    /// The glue matrices when the GPB is of type B.
    pub fn glue_matrices(&self) -> Result<Vec<Matrix<F>>, GpbError> {
        match &self.structure {
            Structure::Graphs(glues) => Ok(glues.clone()),
            Structure::Subspaces(subs) => subs
                .iter()
                .enumerate()
                .map(|(i, s)| subspace_to_graph(s, i))
                .collect(),
        }
    }

    /// Type B iff every structure subspace is the graph of a fiber
    /// isomorphism: dimension r with both projections of full rank.
    pub fn classify_type(&self) -> GpbType {
        match &self.structure {
            Structure::Graphs(_) => GpbType::B,
            Structure::Subspaces(subs) => {
                let r = self.rank();
                for (i, s) in subs.iter().enumerate() {
                    if s.dim() != r || subspace_to_graph(s, i).is_err() {
                        return GpbType::T;
                    }
                }
                GpbType::B
            }
        }
    }

    /// deg(V) + sum_i dim F_i.
    pub fn gpb_degree(&self) -> i64 {
        let dims: i64 = (0..self.genus()).map(|i| self.structure_dim(i) as i64).sum();
        self.bundle.degree() + dims
    }

    pub fn gpb_slope(&self) -> Slope {
        Ratio::new(self.gpb_degree(), self.rank() as i64)
    }
}

/// The structure a subsheaf inherits: at each pair, the preimage of the
/// ambient F_i under the fiber maps of the inclusion.
pub fn induced_structure<F: Field>(
    inclusion: &PolyMatrixHom<F>,
    target: &Gpb<F>,
) -> Result<Vec<Subspace<F>>, GpbError> {
    if inclusion.target() != target.bundle() {
        return Err(GpbError::ShapeMismatch);
    }
    if !inclusion.is_injective() {
        return Err(GpbError::NotInjective);
    }
    Ok(induced_structure_unchecked(inclusion, target))
}

pub(crate) fn induced_structure_unchecked<F: Field>(
    inclusion: &PolyMatrixHom<F>,
    target: &Gpb<F>,
) -> Vec<Subspace<F>> {
    let f = target.field().clone();
    let s = inclusion.source().rank();
    let r = target.rank();
    let mut out = Vec::with_capacity(target.genus());
    for (i, (a, b)) in target.line().pairs().iter().enumerate() {
        let fa = inclusion.fiber_map(a);
        let fb = inclusion.fiber_map(b);
        // Block-diagonal map k^s + k^s -> k^r + k^r.
        let mut block = Matrix::zeros(f.clone(), 2 * r, 2 * s);
        for row in 0..r {
            for col in 0..s {
                *block.at_mut(row, col) = fa.at(row, col).clone();
                *block.at_mut(r + row, s + col) = fb.at(row, col).clone();
            }
        }
        out.push(target.structure_subspace(i).preimage(&block));
    }
    out
}

/// A GPB morphism is determined by its underlying polynomial matrix: the
/// F_i-level maps exist iff the fiber-sum images land in the target
/// structure, and are then unique because F_i embeds in the fiber sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GpbMorphism<F: Field> {
    pub underlying: PolyMatrixHom<F>,
}

/// Containment check defining GPB morphisms: the image of each F_i(w) under
/// the pairwise fiber maps lies in F_i(v).
pub fn is_gpb_morphism<F: Field>(f: &PolyMatrixHom<F>, w: &Gpb<F>, v: &Gpb<F>) -> bool {
    if f.source() != w.bundle() || f.target() != v.bundle() || w.line() != v.line() {
        return false;
    }
    let field = v.field().clone();
    let r = v.rank();
    for (i, (a, b)) in v.line().pairs().iter().enumerate() {
        let fa = f.fiber_map(a);
        let fb = f.fiber_map(b);
        let fw = w.structure_subspace(i);
        let fv = v.structure_subspace(i);
        for row in 0..fw.dim() {
            let u = fw.basis().row(row);
            let (ua, ub) = u.split_at(w.rank());
            let ya = fa.mul_vector(ua);
            let yb = fb.mul_vector(ub);
            let mut y = Vec::with_capacity(2 * r);
            y.extend(ya);
            y.extend(yb);
            let _ = &field;
            if !fv.contains(&y) {
                return false;
            }
        }
    }
    true
}

/// Index map for the unknown polynomial coefficients of a morphism
/// w.bundle -> v.bundle: (target row j, source column k, degree m), ordered
/// exactly in that precedence.
pub(crate) fn coefficient_layout(source: &SplitBundle, target: &SplitBundle) -> Vec<(usize, usize, usize)> {
    let mut layout = Vec::new();
    for j in 0..target.rank() {
        for k in 0..source.rank() {
            let bound = crate::bundles::entry_bound(source, target, j, k);
            if bound >= 0 {
                for m in 0..=(bound as usize) {
                    layout.push((j, k, m));
                }
            }
        }
    }
    layout
}

/// The exact linear system whose kernel is Hom(w, v): one row per
/// (pair i, basis vector of F_i(w), quotient coordinate of F_i(v)), one
/// column per polynomial coefficient of the morphism matrix.
pub fn hom_system_matrix<F: Field>(w: &Gpb<F>, v: &Gpb<F>) -> Result<Matrix<F>, GpbError> {
    if w.line() != v.line() {
        return Err(GpbError::LineMismatch);
    }
    let field = v.field().clone();
    let layout = coefficient_layout(w.bundle(), v.bundle());
    let ncols = layout.len();
    let r = v.rank();
    let mut rows: Vec<Vec<F::Elem>> = Vec::new();
    for (i, (a, b)) in v.line().pairs().iter().enumerate() {
        let fw = w.structure_subspace(i);
        let fv = v.structure_subspace(i);
        let q = fv.quotient_constraints();
        // Powers of the two marked points up to the largest degree in play.
        let max_deg = layout.iter().map(|&(_, _, m)| m).max().unwrap_or(0);
        let mut pow_a = Vec::with_capacity(max_deg + 1);
        let mut pow_b = Vec::with_capacity(max_deg + 1);
        let mut pa = field.one();
        let mut pb = field.one();
        for _ in 0..=max_deg {
            pow_a.push(pa.clone());
            pow_b.push(pb.clone());
            pa = field.mul(&pa, a);
            pb = field.mul(&pb, b);
        }
        for urow in 0..fw.dim() {
            let u = fw.basis().row(urow);
            let (ua, ub) = u.split_at(w.rank());
            for qrow in 0..q.rows() {
                let mut row = Vec::with_capacity(ncols);
                for &(j, k, m) in &layout {
                    // Image coordinate j of the a-block gets c·a^m·u_a[k];
                    // coordinate r+j of the b-block gets c·b^m·u_b[k].
                    let ca = field.mul(&field.mul(&pow_a[m], &ua[k]), q.at(qrow, j));
                    let cb = field.mul(&field.mul(&pow_b[m], &ub[k]), q.at(qrow, r + j));
                    row.push(field.add(&ca, &cb));
                }
                rows.push(row);
            }
        }
    }
    Ok(Matrix::from_rows(field, rows))
}

/// The space of GPB morphisms w -> v: dimension and an explicit basis,
/// computed as the kernel of one exact linear system in the polynomial
/// coefficients.
pub fn hom_space<F: Field>(
    w: &Gpb<F>,
    v: &Gpb<F>,
) -> Result<(usize, Vec<GpbMorphism<F>>), GpbError> {
    let field = v.field().clone();
    let system = hom_system_matrix(w, v)?;
    let layout = coefficient_layout(w.bundle(), v.bundle());
    let kernel = system.kernel_basis();
    let mut basis = Vec::with_capacity(kernel.len());
    for vec in &kernel {
        let mut entries: Vec<Vec<Vec<F::Elem>>> = (0..v.rank())
            .map(|j| {
                (0..w.rank())
                    .map(|k| {
                        let bound = PolyMatrixHom::<F>::entry_bound(w.bundle(), v.bundle(), j, k);
                        vec![field.zero(); (bound.max(-1) + 1) as usize]
                    })
                    .collect()
            })
            .collect();
        for (col, &(j, k, m)) in layout.iter().enumerate() {
            entries[j][k][m] = vec[col].clone();
        }
        let rows = entries
            .into_iter()
            .enumerate()
            .map(|(j, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(k, coeffs)| {
                        let bound = PolyMatrixHom::<F>::entry_bound(w.bundle(), v.bundle(), j, k);
                        crate::poly::UniPoly::new(field.clone(), coeffs, bound.max(-1))
                            .expect("kernel coefficients respect bounds")
                    })
                    .collect()
            })
            .collect();
        let hom = PolyMatrixHom::new(field.clone(), w.bundle().clone(), v.bundle().clone(), rows)?;
        debug_assert!(is_gpb_morphism(&hom, w, v));
        basis.push(GpbMorphism { underlying: hom });
    }
    Ok((basis.len(), basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, PrimeField, Rationals};
    use crate::poly::UniPoly;

    fn q(n: i64) -> <Rationals as Field>::Elem {
        Rationals.from_i64(n)
    }

    fn line_q() -> MarkedLine<Rationals> {
        MarkedLine::from_i64_pairs(Rationals, &[(0, 2), (1, 3)]).unwrap()
    }

    fn type_b_rank2_identity() -> Gpb<Rationals> {
        Gpb::new(
            SplitBundle::new(vec![0, 0]).unwrap(),
            line_q(),
            Structure::Graphs(vec![
                Matrix::identity(Rationals, 2),
                Matrix::identity(Rationals, 2),
            ]),
        )
        .unwrap()
    }

    #[test]
    fn classify_graph_structures_as_type_b() {
        assert_eq!(type_b_rank2_identity().classify_type(), GpbType::B);
    }

    #[test]
    fn classify_half_fiber_as_type_t() {
        // r = 1, F_1 = a-fiber + 0 = span{(1,0)}: the b-projection is zero.
        let line = MarkedLine::from_i64_pairs(Rationals, &[(0, 1)]).unwrap();
        let s = Subspace::from_rows(&Matrix::from_i64_rows(Rationals, &[&[1, 0]]));
        let v = Gpb::new(SplitBundle::line(0), line, Structure::Subspaces(vec![s])).unwrap();
        assert_eq!(v.classify_type(), GpbType::T);
    }

    #[test]
    fn swap_graph_classifies_as_b_and_recovers_swap() {
        // F spanned by {(e1,e2),(e2,e1)} is the graph of the swap matrix.
        let line = MarkedLine::from_i64_pairs(Rationals, &[(0, 1)]).unwrap();
        let s = Subspace::from_rows(&Matrix::from_i64_rows(
            Rationals,
            &[&[1, 0, 0, 1], &[0, 1, 1, 0]],
        ));
        let v = Gpb::new(
            SplitBundle::new(vec![0, 0]).unwrap(),
            line,
            Structure::Subspaces(vec![s.clone()]),
        )
        .unwrap();
        assert_eq!(v.classify_type(), GpbType::B);
        let glue = subspace_to_graph(&s, 0).unwrap();
        assert_eq!(glue, Matrix::from_i64_rows(Rationals, &[&[0, 1], &[1, 0]]));
        // Round trip back to the same canonical subspace.
        assert_eq!(graph_to_subspace(&glue), s);
    }

    #[test]
    fn graph_subspace_round_trips() {
        // A = I (r=1): span{(1,1)}.
        let id1 = Matrix::identity(Rationals, 1);
        let s = graph_to_subspace(&id1);
        assert_eq!(s.basis(), &Matrix::from_i64_rows(Rationals, &[&[1, 1]]));
        assert_eq!(subspace_to_graph(&s, 0).unwrap(), id1);
        // span{(1,λ)} -> (λ).
        let s = Subspace::from_rows(&Matrix::from_i64_rows(Rationals, &[&[1, 7]]));
        assert_eq!(
            subspace_to_graph(&s, 0).unwrap(),
            Matrix::from_i64_rows(Rationals, &[&[7]])
        );
    }

    #[test]
    fn subspace_to_graph_rejects_type_t() {
        let s = Subspace::from_rows(&Matrix::from_i64_rows(Rationals, &[&[1, 0]]));
        assert_eq!(
            subspace_to_graph(&s, 3).unwrap_err(),
            GpbError::NotTypeB { index: 3 }
        );
    }

    #[test]
    fn degrees_and_slopes() {
        // Type B, r=2, deg(V)=0, g=2: degree 4, slope 2.
        let v = type_b_rank2_identity();
        assert_eq!(v.gpb_degree(), 4);
        assert_eq!(v.gpb_slope(), Ratio::new(2, 1));

        // Type B, r=1, deg(V)=1-g: degree 1, slope 1.
        let l = Gpb::rank1_type_b(line_q(), -1, &[q(2), q(2)]).unwrap();
        assert_eq!(l.gpb_degree(), 1);
        assert_eq!(l.gpb_slope(), Ratio::new(1, 1));

        // Type T, r=1, deg(V)=-1, g=2, dims (2,1): degree 2.
        let s_full = Subspace::full(Rationals, 2);
        let s_line = Subspace::from_rows(&Matrix::from_i64_rows(Rationals, &[&[1, 4]]));
        let t = Gpb::new(
            SplitBundle::line(-1),
            line_q(),
            Structure::Subspaces(vec![s_full, s_line]),
        )
        .unwrap();
        assert_eq!(t.classify_type(), GpbType::T);
        assert_eq!(t.gpb_degree(), 2);
    }

    #[test]
    fn glue_must_be_invertible() {
        let singular = Matrix::from_i64_rows(Rationals, &[&[1, 1], &[1, 1]]);
        let err = Gpb::new(
            SplitBundle::new(vec![0, 0]).unwrap(),
            line_q(),
            Structure::Graphs(vec![singular, Matrix::identity(Rationals, 2)]),
        )
        .unwrap_err();
        assert_eq!(err, GpbError::BadGlue { index: 0, rank: 2 });
    }

    #[test]
    fn induced_structure_of_identity_is_the_structure() {
        let v = type_b_rank2_identity();
        let id = PolyMatrixHom::identity(Rationals, v.bundle().clone());
        let ind = induced_structure(&id, &v).unwrap();
        for i in 0..v.genus() {
            assert_eq!(ind[i], v.structure_subspace(i));
        }
    }

    #[test]
    fn induced_structure_swap_glue_kills_first_summand() {
        // Target r=2 with A1 = swap; source O embedded by the constant e1.
        // (x e1, y e1) lies in graph(swap) iff x e2 = y e1, forcing x = y = 0.
        let line = MarkedLine::from_i64_pairs(Rationals, &[(0, 1)]).unwrap();
        let swap = Matrix::from_i64_rows(Rationals, &[&[0, 1], &[1, 0]]);
        let v = Gpb::new(
            SplitBundle::new(vec![0, 0]).unwrap(),
            line,
            Structure::Graphs(vec![swap]),
        )
        .unwrap();
        let c1 = UniPoly::constant(Rationals, q(1), 0).unwrap();
        let z = UniPoly::zero(Rationals, 0);
        let incl =
            PolyMatrixHom::from_column(Rationals, 0, v.bundle().clone(), vec![c1, z]).unwrap();
        let ind = induced_structure(&incl, &v).unwrap();
        assert_eq!(ind[0].dim(), 0);
    }

    #[test]
    fn induced_structure_is_full_where_inclusion_vanishes() {
        // Rank-1 source vanishing at both a1 and b1: F_1^ind = all of k^2.
        let v = Gpb::rank1_type_b(line_q(), 0, &[q(1), q(1)]).unwrap();
        let p = UniPoly::from_roots(Rationals, &[q(0), q(2)], q(1), 2).unwrap();
        let incl =
            PolyMatrixHom::from_column(Rationals, -2, v.bundle().clone(), vec![p]).unwrap();
        let ind = induced_structure(&incl, &v).unwrap();
        assert_eq!(ind[0].dim(), 2);
        assert_eq!(ind[1].dim(), 1);
    }

    #[test]
    fn induced_structure_rejects_non_injective() {
        let v = type_b_rank2_identity();
        let z = PolyMatrixHom::zero(Rationals, SplitBundle::line(-1), v.bundle().clone());
        assert_eq!(
            induced_structure(&z, &v).unwrap_err(),
            GpbError::NotInjective
        );
    }

    #[test]
    fn hom_space_contains_identity_endomorphism() {
        let v = Gpb::rank1_type_b(line_q(), 0, &[q(5), q(-3)]).unwrap();
        let (dim, basis) = hom_space(&v, &v).unwrap();
        assert!(dim >= 1);
        assert!(basis.iter().all(|m| is_gpb_morphism(&m.underlying, &v, &v)));
    }

    #[test]
    fn hom_space_four_by_four_fixture() {
        // v = ((0,0), A = I twice), w = (O(-1), λ = (2,2)): the system
        // p(0)=2p(2), p(1)=2p(3) per component has only the zero solution.
        let v = type_b_rank2_identity();
        let w = Gpb::rank1_type_b(line_q(), -1, &[q(2), q(2)]).unwrap();
        let system = hom_system_matrix(&w, &v).unwrap();
        assert_eq!((system.rows(), system.cols()), (4, 4));
        let (dim, _) = hom_space(&w, &v).unwrap();
        assert_eq!(dim, 0);

        // λ = (1,1) admits exactly the constant sections: dimension 2.
        let w1 = Gpb::rank1_type_b(line_q(), -1, &[q(1), q(1)]).unwrap();
        let (dim1, basis) = hom_space(&w1, &v).unwrap();
        assert_eq!(dim1, 2);
        for m in &basis {
            assert!(is_gpb_morphism(&m.underlying, &w1, &v));
        }
    }

    #[test]
    fn hom_space_matches_exhaustive_enumeration_over_f5() {
        // Independent oracle: enumerate all 5^4 coefficient vectors of
        // (p, q) with deg <= 1 and keep those satisfying the graph
        // containment at both pairs, checked directly against the graphs.
        let f = PrimeField::new(5).unwrap();
        let line = MarkedLine::from_i64_pairs(f, &[(0, 2), (1, 3)]).unwrap();
        for (lam, expected_members) in [(2u64, None), (1u64, Some(25usize))] {
            let v = Gpb::new(
                SplitBundle::new(vec![0, 0]).unwrap(),
                line.clone(),
                Structure::Graphs(vec![Matrix::identity(f, 2), Matrix::identity(f, 2)]),
            )
            .unwrap();
            let w = Gpb::rank1_type_b(line.clone(), -1, &[lam, lam]).unwrap();
            let mut count = 0usize;
            for c0 in 0..5u64 {
                for c1 in 0..5u64 {
                    for d0 in 0..5u64 {
                        for d1 in 0..5u64 {
                            let p = |t: u64| f.add(&c0, &f.mul(&c1, &t));
                            let qq = |t: u64| f.add(&d0, &f.mul(&d1, &t));
                            // containment in graph(I): a-values equal λ·b-values
                            let ok = [(0u64, 2u64), (1, 3)].iter().all(|&(a, b)| {
                                p(a) == f.mul(&lam, &p(b)) && qq(a) == f.mul(&lam, &qq(b))
                            });
                            if ok {
                                count += 1;
                            }
                        }
                    }
                }
            }
            let (dim, _) = hom_space(&w, &v).unwrap();
            assert_eq!(5usize.pow(dim as u32), count);
            if let Some(exp) = expected_members {
                assert_eq!(count, exp);
            }
        }
    }

    #[test]
    fn hom_space_rejects_line_mismatch() {
        let v = type_b_rank2_identity();
        let other_line = MarkedLine::from_i64_pairs(Rationals, &[(0, 2), (1, 4)]).unwrap();
        let w = Gpb::rank1_type_b(other_line, -1, &[q(2), q(2)]).unwrap();
        assert_eq!(hom_space(&w, &v).unwrap_err(), GpbError::LineMismatch);
    }

    #[test]
    fn square_system_size_for_theta_shape() {
        // w = (O(1-g), graph λ), v type-B of splitting type (0,...,0):
        // rg unknowns and rg constraints.
        for r in 1..=3usize {
            let line = line_q();
            let glues = vec![Matrix::identity(Rationals, r); 2];
            let v = Gpb::new(
                SplitBundle::new(vec![0; r]).unwrap(),
                line.clone(),
                Structure::Graphs(glues),
            )
            .unwrap();
            let w = Gpb::rank1_type_b(line, -1, &[q(2), q(2)]).unwrap();
            let m = hom_system_matrix(&w, &v).unwrap();
            assert_eq!((m.rows(), m.cols()), (2 * r, 2 * r));
        }
    }
}
