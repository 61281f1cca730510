//! Vector bundles on the projective line as splitting types, morphisms as
//! degree-bounded polynomial matrices, and fiber evaluation at marked points.
//!
//! Everything lives in a single affine chart; marked points are affine
//! coordinates and fiber maps are entrywise evaluations in that
//! trivialization. A morphism O(e_k) -> O(d_j) is a polynomial of degree at
//! most d_j - e_k (the entry is forced to zero when that bound is negative).

use crate::field::Field;
use crate::matrix::Matrix;
use crate::poly::{PolyError, UniPoly};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BundleError {
    #[error("splitting type must be a non-increasing, nonempty list")]
    BadSplittingType,
    #[error("marked points must be pairwise distinct")]
    RepeatedMarkedPoint,
    #[error("a marked line needs at least one pair")]
    NoPairs,
    #[error("morphism entry ({row},{col}) violates its degree bound")]
    EntryBound { row: usize, col: usize },
    #[error("morphism shape does not match the splitting types")]
    ShapeMismatch,
    #[error("operation requires a rank-1 source, got rank {0}")]
    SourceNotRank1(usize),
    #[error("the zero morphism vanishes everywhere; operation rejects it")]
    ZeroMorphism,
    #[error("no unmarked affine point is left over this field")]
    FieldExhausted,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The projective line with g marked pairs (a_i, b_i), all affine and
/// pairwise distinct. Identifying a_i with b_i produces the g-nodal curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkedLine<F: Field> {
    field: F,
    pairs: Vec<(F::Elem, F::Elem)>,
}

impl<F: Field> MarkedLine<F> {
    pub fn new(field: F, pairs: Vec<(F::Elem, F::Elem)>) -> Result<Self, BundleError> {
        if pairs.is_empty() {
            return Err(BundleError::NoPairs);
        }
        let mut seen: Vec<&F::Elem> = Vec::new();
        for (a, b) in &pairs {
            for p in [a, b] {
                if seen.contains(&p) {
                    return Err(BundleError::RepeatedMarkedPoint);
                }
                seen.push(p);
            }
        }
        Ok(MarkedLine { field, pairs })
    }

    pub fn from_i64_pairs(field: F, pairs: &[(i64, i64)]) -> Result<Self, BundleError> {
        let pairs = pairs
            .iter()
            .map(|(a, b)| (field.from_i64(*a), field.from_i64(*b)))
            .collect();
        Self::new(field, pairs)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn genus(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(F::Elem, F::Elem)] {
        &self.pairs
    }

    pub fn is_marked(&self, p: &F::Elem) -> bool {
        self.pairs.iter().any(|(a, b)| a == p || b == p)
    }

    /// The first point of the deterministic trial sequence 0, 1, 2, ... that
    /// is not marked. Over a tiny prime field this can run out.
    pub fn unmarked_point(&self) -> Result<F::Elem, BundleError> {
        let f = &self.field;
        let limit = match f.spec().characteristic() {
            0 => 2 * self.genus() as u64 + 1,
            p => p,
        };
        for n in 0..limit {
            let cand = f.from_i64(n as i64);
            if !self.is_marked(&cand) {
                return Ok(cand);
            }
        }
        Err(BundleError::FieldExhausted)
    }
}

/// A bundle on the line as its splitting type (d_1 >= ... >= d_r).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SplitBundle {
    twists: Vec<i64>,
}

impl SplitBundle {
    pub fn new(twists: Vec<i64>) -> Result<Self, BundleError> {
        if twists.is_empty() || twists.windows(2).any(|w| w[0] < w[1]) {
            return Err(BundleError::BadSplittingType);
        }
        Ok(SplitBundle { twists })
    }

    /// The twist O(e) as a rank-1 bundle.
    pub fn line(e: i64) -> Self {
        SplitBundle { twists: vec![e] }
    }

    pub fn twists(&self) -> &[i64] {
        &self.twists
    }

    pub fn rank(&self) -> usize {
        self.twists.len()
    }

    pub fn degree(&self) -> i64 {
        self.twists.iter().sum()
    }

    /// Riemann–Roch on the line: chi(V(e)) = sum(d_i + e) + r.
    pub fn euler_char(&self, twist: i64) -> i64 {
        self.degree() + (self.rank() as i64) * (twist + 1)
    }
}

/// dim Hom(O(e), V) = sum_j max(0, d_j - e + 1).
pub fn hom_dimension(e: i64, b: &SplitBundle) -> i64 {
    b.twists().iter().map(|d| 0.max(d - e + 1)).sum()
}

/// Degree bound of morphism entry (row, col): d_row(target) - d_col(source).
pub fn entry_bound(source: &SplitBundle, target: &SplitBundle, row: usize, col: usize) -> i64 {
    target.twists()[row] - source.twists()[col]
}

/// A morphism between split bundles as a matrix of degree-bounded
/// polynomials; rows index target components, columns source components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrixHom<F: Field> {
    field: F,
    source: SplitBundle,
    target: SplitBundle,
    entries: Vec<UniPoly<F>>, // row-major, target.rank() x source.rank()
}

impl<F: Field> PolyMatrixHom<F> {
    pub fn entry_bound(source: &SplitBundle, target: &SplitBundle, row: usize, col: usize) -> i64 {
        entry_bound(source, target, row, col)
    }

    pub fn new(
        field: F,
        source: SplitBundle,
        target: SplitBundle,
        entries: Vec<Vec<UniPoly<F>>>,
    ) -> Result<Self, BundleError> {
        if entries.len() != target.rank() || entries.iter().any(|r| r.len() != source.rank()) {
            return Err(BundleError::ShapeMismatch);
        }
        let mut flat = Vec::with_capacity(source.rank() * target.rank());
        for (j, row) in entries.into_iter().enumerate() {
            for (k, p) in row.into_iter().enumerate() {
                let bound = Self::entry_bound(&source, &target, j, k);
                match p.degree() {
                    Some(d) if (d as i64) > bound => {
                        return Err(BundleError::EntryBound { row: j, col: k })
                    }
                    _ => {}
                }
                // Re-pin the entry to its structural bound.
                flat.push(UniPoly::new(field.clone(), p.coeffs().to_vec(), bound.max(-1))?);
            }
        }
        Ok(PolyMatrixHom {
            field,
            source,
            target,
            entries: flat,
        })
    }

    pub fn zero(field: F, source: SplitBundle, target: SplitBundle) -> Self {
        let entries = (0..target.rank())
            .flat_map(|j| {
                (0..source.rank()).map({
                    let field = field.clone();
                    let source = source.clone();
                    let target = target.clone();
                    move |k| {
                        UniPoly::zero(
                            field.clone(),
                            Self::entry_bound(&source, &target, j, k).max(-1),
                        )
                    }
                })
            })
            .collect();
        PolyMatrixHom {
            field,
            source,
            target,
            entries,
        }
    }

    pub fn identity(field: F, bundle: SplitBundle) -> Self {
        let mut m = Self::zero(field.clone(), bundle.clone(), bundle.clone());
        for j in 0..bundle.rank() {
            m.entries[j * bundle.rank() + j] =
                UniPoly::constant(field.clone(), field.one(), 0).expect("constant fits bound 0");
        }
        m
    }

    /// Column vector of polynomials as a map from O(e).
    pub fn from_column(
        field: F,
        e: i64,
        target: SplitBundle,
        column: Vec<UniPoly<F>>,
    ) -> Result<Self, BundleError> {
        let entries = column.into_iter().map(|p| vec![p]).collect();
        Self::new(field, SplitBundle::line(e), target, entries)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn source(&self) -> &SplitBundle {
        &self.source
    }

    pub fn target(&self) -> &SplitBundle {
        &self.target
    }

    pub fn entry(&self, row: usize, col: usize) -> &UniPoly<F> {
        &self.entries[row * self.source.rank() + col]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero())
    }

    /// The numeric matrix of entrywise evaluations at an affine point.
    pub fn fiber_map(&self, p: &F::Elem) -> Matrix<F> {
        let rows = self.target.rank();
        let cols = self.source.rank();
        let data = (0..rows)
            .flat_map(|j| (0..cols).map(move |k| self.entry(j, k).eval(p)))
            .collect();
        Matrix::new(self.field.clone(), rows, cols, data)
    }

    /// self ∘ inner (apply `inner` first).
    pub fn compose(&self, inner: &PolyMatrixHom<F>) -> Result<PolyMatrixHom<F>, BundleError> {
        if inner.target != self.source {
            return Err(BundleError::ShapeMismatch);
        }
        let f = &self.field;
        let mut rows = Vec::with_capacity(self.target.rank());
        for j in 0..self.target.rank() {
            let mut row = Vec::with_capacity(inner.source.rank());
            for k in 0..inner.source.rank() {
                let bound = Self::entry_bound(&inner.source, &self.target, j, k);
                let mut acc = UniPoly::zero(f.clone(), bound.max(-1));
                for l in 0..self.source.rank() {
                    let prod = self.entry(j, l).mul(inner.entry(l, k));
                    if !prod.is_zero() {
                        acc = acc.add(&prod)?;
                    }
                }
                row.push(UniPoly::new(f.clone(), acc.coeffs().to_vec(), bound.max(-1))?);
            }
            rows.push(row);
        }
        PolyMatrixHom::new(f.clone(), inner.source.clone(), self.target.clone(), rows)
    }

    /// Injectivity as a sheaf map. A nonzero map from a rank-1 source is
    /// always injective; in general the map is injective iff the induced map
    /// on sections of a sufficiently high twist has trivial kernel (a kernel
    /// subsheaf would contribute syzygies of bounded degree, so one twist
    /// past the Cramer bound decides it).
    pub fn is_injective(&self) -> bool {
        if self.source.rank() == 1 {
            return !self.is_zero();
        }
        if self.source.rank() > self.target.rank() {
            return false;
        }
        let col_max: i64 = (0..self.source.rank())
            .map(|k| {
                (0..self.target.rank())
                    .map(|j| Self::entry_bound(&self.source, &self.target, j, k).max(0))
                    .max()
                    .unwrap_or(0)
            })
            .sum();
        let min_e = *self.source.twists().iter().min().expect("rank >= 1");
        let twist = col_max + (-min_e).max(0) + 1;
        self.section_matrix(twist).kernel_basis().is_empty()
    }

    /// The matrix of the induced map H0(source(N)) -> H0(target(N)) in the
    /// monomial bases, ordered (component ascending, degree ascending).
    fn section_matrix(&self, twist: i64) -> Matrix<F> {
        let f = &self.field;
        let col_dims: Vec<usize> = self
            .source
            .twists()
            .iter()
            .map(|e| (e + twist + 1).max(0) as usize)
            .collect();
        let row_dims: Vec<usize> = self
            .target
            .twists()
            .iter()
            .map(|d| (d + twist + 1).max(0) as usize)
            .collect();
        let ncols: usize = col_dims.iter().sum();
        let nrows: usize = row_dims.iter().sum();
        let mut m = Matrix::zeros(f.clone(), nrows, ncols);
        let mut col_offset = 0usize;
        for (k, &cdim) in col_dims.iter().enumerate() {
            for deg_s in 0..cdim {
                let mut row_offset = 0usize;
                for (j, &rdim) in row_dims.iter().enumerate() {
                    for (deg_p, c) in self.entry(j, k).coeffs().iter().enumerate() {
                        let out_deg = deg_s + deg_p;
                        if out_deg < rdim {
                            *m.at_mut(row_offset + out_deg, col_offset + deg_s) = c.clone();
                        }
                    }
                    row_offset += rdim;
                }
            }
            col_offset += cdim;
        }
        m
    }
}

/// Monomial basis of Hom(O(e), V): one single-entry morphism t^m per target
/// component j and degree 0 <= m <= d_j - e, ordered (j ascending, m
/// ascending). Its length equals `hom_dimension(e, b)`.
pub fn hom_basis<F: Field>(field: F, e: i64, b: &SplitBundle) -> Vec<PolyMatrixHom<F>> {
    let mut out = Vec::new();
    for (j, d) in b.twists().iter().enumerate() {
        let bound = d - e;
        if bound < 0 {
            continue;
        }
        for m in 0..=bound as usize {
            let mut hom = PolyMatrixHom::zero(field.clone(), SplitBundle::line(e), b.clone());
            hom.entries[j] = UniPoly::monomial(field.clone(), m, bound).expect("m <= bound");
            out.push(hom);
        }
    }
    out
}

/// Which marked points a rank-1-source morphism vanishes at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VanishingSet {
    /// Per pair: (vanishes at a_i, vanishes at b_i).
    pub flags: Vec<(bool, bool)>,
}

impl VanishingSet {
    pub fn count(&self) -> usize {
        self.flags
            .iter()
            .map(|(a, b)| usize::from(*a) + usize::from(*b))
            .sum()
    }

    /// True when some pair (a_i, b_i) is entirely outside the vanishing set.
    pub fn has_nonvanishing_pair(&self) -> bool {
        self.flags.iter().any(|(a, b)| !a && !b)
    }

    pub fn points<F: Field>(&self, line: &MarkedLine<F>) -> Vec<F::Elem> {
        let mut pts = Vec::new();
        for ((a, b), (va, vb)) in line.pairs().iter().zip(&self.flags) {
            if *va {
                pts.push(a.clone());
            }
            if *vb {
                pts.push(b.clone());
            }
        }
        pts
    }
}

/// The set of marked points where the fiber map of a nonzero rank-1-source
/// morphism is the zero matrix.
pub fn vanishing_points<F: Field>(
    f: &PolyMatrixHom<F>,
    line: &MarkedLine<F>,
) -> Result<VanishingSet, BundleError> {
    if f.source().rank() != 1 {
        return Err(BundleError::SourceNotRank1(f.source().rank()));
    }
    if f.is_zero() {
        return Err(BundleError::ZeroMorphism);
    }
    let flags = line
        .pairs()
        .iter()
        .map(|(a, b)| (f.fiber_map(a).is_zero(), f.fiber_map(b).is_zero()))
        .collect();
    Ok(VanishingSet { flags })
}
