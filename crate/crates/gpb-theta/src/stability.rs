//! Semistability of GPBs: certificate verification, windowed line-subsheaf
//! search over finite enumeration domains, randomized probing, and exact
//! decisions for rank <= 2.
//!
//! A destabilizer certificate is a line subsheaf O(e) -> V together with its
//! induced structure and slope; anyone can re-verify it independently. The
//! default search window is e in [min d_i - 2g, max d_i]: vanishing at a
//! full marked pair costs 2 in degree and gains at most 2 in structure
//! dimension, so deeper twists cannot win.

use crate::bundles::{entry_bound, MarkedLine, PolyMatrixHom, SplitBundle};
use crate::field::Field;
use crate::gpb::{
    induced_structure, induced_structure_unchecked, Gpb, GpbError, GpbType, Slope,
};
use crate::matrix::{Matrix, Subspace};
use crate::poly::UniPoly;
use num::rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StabilityError {
    #[error("degree window {lo}..={hi} is empty")]
    EmptyWindow { lo: i64, hi: i64 },
    #[error("enumeration would visit ~{estimated} candidates, over the budget {budget}")]
    SearchTooLarge { estimated: u128, budget: u64 },
    #[error("exhaustive mode is unsupported here: {0}")]
    ExhaustiveUnsupported(String),
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    #[error("exhaustive enumeration requires a prime field")]
    NeedsPrimeField,
    #[error(transparent)]
    Gpb(#[from] GpbError),
}

/// A candidate destabilizer: an injective line-subsheaf inclusion together
/// with the structure it inherits and the slope it claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubGpbCertificate<F: Field> {
    pub inclusion: PolyMatrixHom<F>,
    pub induced: Vec<Subspace<F>>,
    pub claimed_slope: Slope,
}

impl<F: Field> SubGpbCertificate<F> {
    /// Build the certificate for an inclusion into `v`, computing the
    /// induced structure and slope.
    pub fn for_inclusion(
        inclusion: PolyMatrixHom<F>,
        v: &Gpb<F>,
    ) -> Result<SubGpbCertificate<F>, StabilityError> {
        let induced = induced_structure(&inclusion, v)?;
        let dims: i64 = induced.iter().map(|s| s.dim() as i64).sum();
        let degree = inclusion.source().degree() + dims;
        let claimed_slope = Ratio::new(degree, inclusion.source().rank() as i64);
        Ok(SubGpbCertificate {
            inclusion,
            induced,
            claimed_slope,
        })
    }

    /// Deterministic tie-break key: the twist and coefficient strings in
    /// layout order, exactly the serialized certificate's payload order.
    fn tie_key(&self) -> String {
        let f = self.inclusion.field();
        let mut parts = vec![self.inclusion.source().twists()[0].to_string()];
        for j in 0..self.inclusion.target().rank() {
            for k in 0..self.inclusion.source().rank() {
                for c in self.inclusion.entry(j, k).coeffs() {
                    parts.push(f.elem_to_string(c));
                }
            }
        }
        parts.join(",")
    }
}

/// Outcome of checking a certificate against an ambient GPB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateCheck {
    /// claimed slope strictly exceeds the ambient slope
    StrictDestabilizer,
    /// claimed slope equals the ambient slope (semistability boundary)
    SlopeEquality,
    NotDestabilizing,
}

/// Re-verify a certificate from scratch: injectivity, proper-subsheaf shape,
/// induced structure, slope, and the comparison against mu(v). Malformed
/// certificates are errors, not `NotDestabilizing`.
pub fn verify_destabilizer<F: Field>(
    c: &SubGpbCertificate<F>,
    v: &Gpb<F>,
) -> Result<CertificateCheck, StabilityError> {
    let src = c.inclusion.source();
    if c.inclusion.target() != v.bundle() {
        return Err(StabilityError::MalformedCertificate(
            "inclusion does not target the ambient bundle".into(),
        ));
    }
    let proper = src.rank() < v.rank() || (src.rank() == v.rank() && src.degree() < v.bundle().degree());
    if !proper {
        return Err(StabilityError::MalformedCertificate(
            "inclusion is not a proper subsheaf".into(),
        ));
    }
    let recomputed = induced_structure(&c.inclusion, v).map_err(|e| match e {
        GpbError::NotInjective => {
            StabilityError::MalformedCertificate("inclusion is not injective".into())
        }
        other => StabilityError::Gpb(other),
    })?;
    if recomputed != c.induced {
        return Err(StabilityError::MalformedCertificate(
            "stored induced structure does not recompute".into(),
        ));
    }
    let dims: i64 = recomputed.iter().map(|s| s.dim() as i64).sum();
    let slope = Ratio::new(src.degree() + dims, src.rank() as i64);
    if slope != c.claimed_slope {
        return Err(StabilityError::MalformedCertificate(format!(
            "claimed slope {} does not recompute (got {})",
            c.claimed_slope, slope
        )));
    }
    let ambient = v.gpb_slope();
    Ok(if slope > ambient {
        CertificateCheck::StrictDestabilizer
    } else if slope == ambient {
        CertificateCheck::SlopeEquality
    } else {
        CertificateCheck::NotDestabilizing
    })
}

/// How a search enumerates line-subsheaf coefficient vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SearchDomain {
    /// Every projective coefficient vector over the (prime) field.
    FieldExhaustive { budget: u64 },
    /// Integer coefficients with |c| <= max_abs and positive leading
    /// coefficient; over the rationals this covers every subsheaf map of
    /// height <= max_abs after clearing denominators.
    IntegerBox { max_abs: i64, budget: u64 },
    /// Seeded uniform sampling, `samples` candidates per window twist.
    Randomized { samples: u64, seed: u64 },
}

impl SearchDomain {
    fn describe(&self) -> String {
        match self {
            SearchDomain::FieldExhaustive { .. } => "exhaustive-field".into(),
            SearchDomain::IntegerBox { max_abs, .. } => format!("integer-box({max_abs})"),
            SearchDomain::Randomized { samples, seed } => {
                format!("randomized(samples={samples},seed={seed})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityStatus {
    UnstableWithCertificate,
    SemistableExhaustive,
    StableExhaustive,
    NoDestabilizerFoundRandomized,
}

/// Provenance of a verdict: what was searched, and whether the verdict is a
/// complete decision or only evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub window: (i64, i64),
    pub domain: String,
    pub complete_decision: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityVerdict<F: Field> {
    pub status: StabilityStatus,
    pub witness: Option<SubGpbCertificate<F>>,
    pub search_params: SearchParams,
}

impl<F: Field> StabilityVerdict<F> {
    pub fn is_semistable(&self) -> bool {
        matches!(
            self.status,
            StabilityStatus::SemistableExhaustive | StabilityStatus::StableExhaustive
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Randomized { samples: u64, seed: u64 },
}

/// The default window [min d_i - 2g, max d_i].
pub fn default_window<F: Field>(v: &Gpb<F>) -> (i64, i64) {
    let lo = v.bundle().twists().iter().min().unwrap() - 2 * v.genus() as i64;
    let hi = *v.bundle().twists().iter().max().unwrap();
    (lo, hi)
}

/// Per-pair data for fast induced-dimension evaluation of rank-1 subs.
struct PairEval<F: Field> {
    q: Matrix<F>, // quotient constraints of F_i(v), (2r - dim) x 2r
    a: F::Elem,
    b: F::Elem,
}

impl<F: Field> PairEval<F> {
    fn prepare(v: &Gpb<F>) -> Vec<PairEval<F>> {
        v.line()
            .pairs()
            .iter()
            .enumerate()
            .map(|(i, (a, b))| PairEval {
                q: v.structure_subspace(i).quotient_constraints(),
                a: a.clone(),
                b: b.clone(),
            })
            .collect()
    }

    /// dim F_i^ind for the rank-1 sub with fiber values fa, fb in k^r:
    /// 2 - rank of the (2r - dim F_i) x 2 matrix [Q·(fa;0) | Q·(0;fb)].
    fn induced_dim(&self, field: &F, fa: &[F::Elem], fb: &[F::Elem]) -> usize {
        let r = fa.len();
        let qrows = self.q.rows();
        let mut col_a = Vec::with_capacity(qrows);
        let mut col_b = Vec::with_capacity(qrows);
        for row in 0..qrows {
            let mut sa = field.zero();
            let mut sb = field.zero();
            for j in 0..r {
                sa = field.add(&sa, &field.mul(self.q.at(row, j), &fa[j]));
                sb = field.add(&sb, &field.mul(self.q.at(row, r + j), &fb[j]));
            }
            col_a.push(sa);
            col_b.push(sb);
        }
        let a_zero = col_a.iter().all(|e| field.is_zero(e));
        let b_zero = col_b.iter().all(|e| field.is_zero(e));
        if a_zero && b_zero {
            return 2;
        }
        if a_zero || b_zero {
            return 1;
        }
        // Both nonzero: rank 1 iff the columns are proportional.
        let lead = col_a.iter().position(|e| !field.is_zero(e)).unwrap();
        let ratio = field
            .div(&col_b[lead], &col_a[lead])
            .expect("leading entry is nonzero");
        let proportional = (0..qrows).all(|row| {
            field.mul(&col_a[row], &ratio) == col_b[row]
        });
        if proportional {
            1
        } else {
            0
        }
    }
}

/// Slope of the rank-1 sub given by coefficient vector `coeffs` (layout: per
/// target component, ascending degree) at twist e.
fn rank1_slope<F: Field>(
    field: &F,
    pairs: &[PairEval<F>],
    layout: &[(usize, usize)], // (component j, degree m)
    r: usize,
    e: i64,
    coeffs: &[F::Elem],
) -> Slope {
    let mut total = 0i64;
    for pe in pairs {
        let mut fa = vec![field.zero(); r];
        let mut fb = vec![field.zero(); r];
        // Horner would need per-component grouping; with tiny degrees the
        // direct power accumulation is fine and allocation-free per entry.
        let mut pow_a = field.one();
        let mut pow_b = field.one();
        let mut last_m = 0usize;
        for (&(j, m), c) in layout.iter().zip(coeffs) {
            if m < last_m {
                pow_a = field.one();
                pow_b = field.one();
                last_m = 0;
            }
            while last_m < m {
                pow_a = field.mul(&pow_a, &pe.a);
                pow_b = field.mul(&pow_b, &pe.b);
                last_m += 1;
            }
            if !field.is_zero(c) {
                fa[j] = field.add(&fa[j], &field.mul(c, &pow_a));
                fb[j] = field.add(&fb[j], &field.mul(c, &pow_b));
            }
        }
        total += pe.induced_dim(field, &fa, &fb) as i64;
    }
    Ratio::new(e + total, 1)
}

/// Coefficient layout for a map O(e) -> V: (component j, degree m), ordered
/// (j ascending, m ascending); components with negative bound are skipped.
fn rank1_layout(e: i64, b: &SplitBundle) -> Vec<(usize, usize)> {
    let mut layout = Vec::new();
    for (j, d) in b.twists().iter().enumerate() {
        let bound = d - e;
        if bound >= 0 {
            for m in 0..=(bound as usize) {
                layout.push((j, m));
            }
        }
    }
    layout
}

fn build_inclusion<F: Field>(
    field: &F,
    e: i64,
    target: &SplitBundle,
    layout: &[(usize, usize)],
    coeffs: &[F::Elem],
) -> PolyMatrixHom<F> {
    let mut per_component: Vec<Vec<F::Elem>> = target
        .twists()
        .iter()
        .map(|d| vec![field.zero(); ((d - e).max(-1) + 1) as usize])
        .collect();
    for (&(j, m), c) in layout.iter().zip(coeffs) {
        per_component[j][m] = c.clone();
    }
    let column = per_component
        .into_iter()
        .enumerate()
        .map(|(j, coeffs)| {
            UniPoly::new(field.clone(), coeffs, entry_bound(&SplitBundle::line(e), target, j, 0).max(-1))
                .expect("coefficients respect bounds")
        })
        .collect();
    PolyMatrixHom::from_column(field.clone(), e, target.clone(), column).expect("shape is valid")
}

struct Best<F: Field> {
    slope: Slope,
    cert: SubGpbCertificate<F>,
    key: String,
}

fn better<F: Field>(current: Option<Best<F>>, candidate: Best<F>) -> Option<Best<F>> {
    match current {
        None => Some(candidate),
        Some(cur) => {
            if candidate.slope > cur.slope
                || (candidate.slope == cur.slope && candidate.key < cur.key)
            {
                Some(candidate)
            } else {
                Some(cur)
            }
        }
    }
}

/// Enumerate coefficient vectors for one leading-position stratum: zeros
/// before `lead`, a fixed leading value, free values after, in odometer
/// order. Returns the best candidate of the stratum.
#[allow(clippy::too_many_arguments)]
fn scan_stratum<F: Field>(
    v: &Gpb<F>,
    pairs: &[PairEval<F>],
    layout: &[(usize, usize)],
    e: i64,
    lead: usize,
    lead_values: &[F::Elem],
    free_values: &[F::Elem],
) -> Option<Best<F>> {
    let field = v.field().clone();
    let n = layout.len();
    let free = n - lead - 1;
    let mut best: Option<Best<F>> = None;
    let mut coeffs: Vec<F::Elem> = vec![field.zero(); n];
    for lv in lead_values {
        coeffs[lead] = lv.clone();
        let mut odometer = vec![0usize; free];
        'candidates: loop {
            for (slot, &idx) in odometer.iter().enumerate() {
                coeffs[lead + 1 + slot] = free_values[idx].clone();
            }
            let slope = rank1_slope(&field, pairs, layout, v.rank(), e, &coeffs);
            let improves = match &best {
                None => true,
                Some(b) => slope >= b.slope,
            };
            if improves {
                let inclusion = build_inclusion(&field, e, v.bundle(), layout, &coeffs);
                let induced = induced_structure_unchecked(&inclusion, v);
                let dims: i64 = induced.iter().map(|s| s.dim() as i64).sum();
                let cert = SubGpbCertificate {
                    inclusion,
                    induced,
                    claimed_slope: Ratio::new(e + dims, 1),
                };
                debug_assert_eq!(cert.claimed_slope, slope);
                let key = cert.tie_key();
                best = better(best, Best { slope, cert, key });
            }
            let mut pos = free;
            while pos > 0 {
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < free_values.len() {
                    continue 'candidates;
                }
                odometer[pos] = 0;
            }
            break;
        }
    }
    best
}

fn enumeration_values<F: Field>(field: &F, domain: &SearchDomain) -> Result<(Vec<F::Elem>, Vec<F::Elem>), StabilityError> {
    match domain {
        SearchDomain::FieldExhaustive { .. } => {
            let p = match field.spec() {
                crate::field::FieldSpec::PrimeField { characteristic } => characteristic,
                _ => return Err(StabilityError::NeedsPrimeField),
            };
            let all: Vec<F::Elem> = (0..p).map(|n| field.from_i64(n as i64)).collect();
            // Leading value 1 only: projective normalization.
            Ok((vec![field.one()], all))
        }
        SearchDomain::IntegerBox { max_abs, .. } => {
            let h = *max_abs;
            let lead: Vec<F::Elem> = (1..=h).map(|n| field.from_i64(n)).collect();
            let free: Vec<F::Elem> = (-h..=h).map(|n| field.from_i64(n)).collect();
            Ok((lead, free))
        }
        SearchDomain::Randomized { .. } => unreachable!("randomized path does not enumerate"),
    }
}

fn enumeration_budget(domain: &SearchDomain) -> u64 {
    match domain {
        SearchDomain::FieldExhaustive { budget } => *budget,
        SearchDomain::IntegerBox { budget, .. } => *budget,
        SearchDomain::Randomized { samples, .. } => *samples,
    }
}

/// Search the window for the rank-1 sub-GPB of maximal induced slope, up to
/// scalar equivalence, scanning twists from the top down and pruning twists
/// whose ceiling e + 2g cannot beat the best slope found. Strata are scanned
/// concurrently; merging is deterministic (max slope, then lexicographically
/// smallest serialized certificate).
pub fn line_subsheaf_search<F: Field>(
    v: &Gpb<F>,
    window: (i64, i64),
    domain: &SearchDomain,
) -> Result<Option<SubGpbCertificate<F>>, StabilityError> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(StabilityError::EmptyWindow { lo, hi });
    }
    if let SearchDomain::Randomized { samples, seed } = domain {
        return randomized_search(v, window, *samples, *seed);
    }
    let field = v.field().clone();
    let (lead_values, free_values) = enumeration_values(&field, domain)?;
    let budget = enumeration_budget(domain);

    let pairs = PairEval::prepare(v);
    let g = v.genus() as i64;
    let mut best: Option<Best<F>> = None;
    let mut visited: u128 = 0;
    for e in (lo..=hi).rev() {
        if let Some(b) = &best {
            // Per-pair induced dimension is at most 2, so twists below
            // best - 2g cannot win and are pruned before being counted.
            if Ratio::new(e + 2 * g, 1) < b.slope {
                break;
            }
        }
        // Constants at e = d1 into a rank-1 target are isomorphisms,
        // not proper subsheaves.
        if v.rank() == 1 && e == v.bundle().twists()[0] {
            continue;
        }
        let layout = rank1_layout(e, v.bundle());
        if layout.is_empty() {
            continue;
        }
        let mut count_for_e: u128 = 0;
        for lead in 0..layout.len() {
            let mut stratum = lead_values.len() as u128;
            for _ in lead + 1..layout.len() {
                stratum = stratum.saturating_mul(free_values.len() as u128);
            }
            count_for_e = count_for_e.saturating_add(stratum);
        }
        visited = visited.saturating_add(count_for_e);
        if visited > budget as u128 {
            return Err(StabilityError::SearchTooLarge {
                estimated: visited,
                budget,
            });
        }
        let stratum_best = (0..layout.len())
            .into_par_iter()
            .map(|lead| {
                scan_stratum(v, &pairs, &layout, e, lead, &lead_values, &free_values)
            })
            .reduce(
                || None,
                |a, b| match (a, b) {
                    (None, x) => x,
                    (x, None) => x,
                    (Some(x), Some(y)) => better(Some(x), y),
                },
            );
        if let Some(b) = stratum_best {
            best = better(best, b);
        }
    }
    Ok(best.map(|b| b.cert))
}

fn randomized_search<F: Field>(
    v: &Gpb<F>,
    window: (i64, i64),
    samples: u64,
    seed: u64,
) -> Result<Option<SubGpbCertificate<F>>, StabilityError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let field = v.field().clone();
    let pairs = PairEval::prepare(v);
    let char_p = field.spec().characteristic();
    let mut best: Option<Best<F>> = None;
    for e in (window.0..=window.1).rev() {
        if v.rank() == 1 && e == v.bundle().twists()[0] {
            continue;
        }
        let layout = rank1_layout(e, v.bundle());
        if layout.is_empty() {
            continue;
        }
        for _ in 0..samples {
            let coeffs: Vec<F::Elem> = (0..layout.len())
                .map(|_| {
                    if char_p == 0 {
                        field.from_i64(rng.gen_range(-20i64..=20))
                    } else {
                        field.from_i64(rng.gen_range(0..char_p) as i64)
                    }
                })
                .collect();
            if coeffs.iter().all(|c| field.is_zero(c)) {
                continue;
            }
            let slope = rank1_slope(&field, &pairs, &layout, v.rank(), e, &coeffs);
            let improves = match &best {
                None => true,
                Some(b) => slope >= b.slope,
            };
            if improves {
                let inclusion = build_inclusion(&field, e, v.bundle(), &layout, &coeffs);
                let induced = induced_structure_unchecked(&inclusion, v);
                let dims: i64 = induced.iter().map(|s| s.dim() as i64).sum();
                let cert = SubGpbCertificate {
                    inclusion,
                    induced,
                    claimed_slope: Ratio::new(e + dims, 1),
                };
                let key = cert.tie_key();
                best = better(best, Best { slope, cert, key });
            }
        }
    }
    Ok(best.map(|b| b.cert))
}

/// Exact stability decision for a rank-1 GPB by scanning the 4^g profiles of
/// marked-point vanishing; each profile's optimum is realized by the product
/// of prescribed linear factors.
fn decide_rank1<F: Field>(v: &Gpb<F>) -> Result<StabilityVerdict<F>, StabilityError> {
    let field = v.field().clone();
    let delta = v.bundle().degree();
    let g = v.genus();
    let mu = v.gpb_slope();
    let structures: Vec<Subspace<F>> = (0..g).map(|i| v.structure_subspace(i)).collect();

    // dim F_i^ind as a function of the vanishing pattern at pair i.
    let dim_for = |i: usize, va: bool, vb: bool| -> i64 {
        let s = &structures[i];
        match (va, vb) {
            (false, false) => s.dim() as i64,
            (true, true) => 2,
            (true, false) => {
                1 + i64::from(s.contains(&[field.zero(), field.one()]))
            }
            (false, true) => {
                1 + i64::from(s.contains(&[field.one(), field.zero()]))
            }
        }
    };

    let mut best: Option<(Slope, Vec<(bool, bool)>)> = None;
    for mask in 0..(4usize.pow(g as u32)) {
        let profile: Vec<(bool, bool)> = (0..g)
            .map(|i| {
                let bits = (mask >> (2 * i)) & 3;
                (bits & 1 == 1, bits & 2 == 2)
            })
            .collect();
        let m: i64 = profile
            .iter()
            .map(|(a, b)| i64::from(*a) + i64::from(*b))
            .sum();
        let (e, dims) = if m == 0 {
            // Proper subsheaf with no marked vanishing: one unmarked root.
            if v.line().unmarked_point().is_err() {
                continue;
            }
            let dims: i64 = (0..g).map(|i| dim_for(i, false, false)).sum();
            (delta - 1, dims)
        } else {
            let dims: i64 = (0..g)
                .map(|i| dim_for(i, profile[i].0, profile[i].1))
                .sum();
            (delta - m, dims)
        };
        let slope = Ratio::new(e + dims, 1);
        if best.as_ref().map_or(true, |(s, _)| slope > *s) {
            best = Some((slope, profile));
        }
    }
    let (max_slope, profile) = best.expect("profile space is nonempty");

    let make_cert = |profile: &[(bool, bool)]| -> Result<SubGpbCertificate<F>, StabilityError> {
        let mut roots = Vec::new();
        for ((a, b), (va, vb)) in v.line().pairs().iter().zip(profile) {
            if *va {
                roots.push(a.clone());
            }
            if *vb {
                roots.push(b.clone());
            }
        }
        if roots.is_empty() {
            roots.push(v.line().unmarked_point().map_err(GpbError::from)?);
        }
        let e = delta - roots.len() as i64;
        let p = UniPoly::from_roots(field.clone(), &roots, field.one(), delta - e)
            .expect("product of linear factors fits its degree");
        let inclusion = PolyMatrixHom::from_column(field.clone(), e, v.bundle().clone(), vec![p])
            .expect("column shape is valid");
        SubGpbCertificate::for_inclusion(inclusion, v)
    };

    let params = |complete| SearchParams {
        window: default_window(v),
        domain: "rank1-vanishing-profiles".into(),
        complete_decision: complete,
    };
    if max_slope > mu {
        Ok(StabilityVerdict {
            status: StabilityStatus::UnstableWithCertificate,
            witness: Some(make_cert(&profile)?),
            search_params: params(true),
        })
    } else if max_slope == mu {
        Ok(StabilityVerdict {
            status: StabilityStatus::SemistableExhaustive,
            witness: Some(make_cert(&profile)?),
            search_params: params(true),
        })
    } else {
        Ok(StabilityVerdict {
            status: StabilityStatus::StableExhaustive,
            witness: None,
            search_params: params(true),
        })
    }
}

/// Field-rational eigendirections of a 2x2 matrix, as projective column
/// vectors; `None` marks a scalar matrix (every direction works).
fn eigendirections_2x2<F: Field>(field: &F, a: &Matrix<F>) -> Option<Vec<Vec<F::Elem>>> {
    debug_assert_eq!((a.rows(), a.cols()), (2, 2));
    let is_scalar = a.at(0, 1) == &field.zero()
        && a.at(1, 0) == &field.zero()
        && a.at(0, 0) == a.at(1, 1);
    if is_scalar {
        return None;
    }
    let tr = field.add(a.at(0, 0), a.at(1, 1));
    let det = field.sub(
        &field.mul(a.at(0, 0), a.at(1, 1)),
        &field.mul(a.at(0, 1), a.at(1, 0)),
    );
    // Eigenvalues: roots of x^2 - tr x + det.
    let mut eigenvalues = Vec::new();
    if field.spec().characteristic() == 2 {
        // Tiny characteristic: trial over the field.
        for x in 0..2u64 {
            let x = field.from_i64(x as i64);
            let val = field.add(&field.sub(&field.mul(&x, &x), &field.mul(&tr, &x)), &det);
            if field.is_zero(&val) {
                eigenvalues.push(x);
            }
        }
    } else {
        let four = field.from_i64(4);
        let disc = field.sub(&field.mul(&tr, &tr), &field.mul(&four, &det));
        if let Some(s) = field.sqrt_elem(&disc) {
            let half = field
                .inv(&field.from_i64(2))
                .expect("characteristic is not 2");
            let l1 = field.mul(&field.add(&tr, &s), &half);
            let l2 = field.mul(&field.sub(&tr, &s), &half);
            eigenvalues.push(l1.clone());
            if l2 != l1 {
                eigenvalues.push(l2);
            }
        }
    }
    let mut dirs = Vec::new();
    for l in eigenvalues {
        let mut m = a.clone();
        *m.at_mut(0, 0) = field.sub(a.at(0, 0), &l);
        *m.at_mut(1, 1) = field.sub(a.at(1, 1), &l);
        for vkernel in m.kernel_basis() {
            if !dirs.contains(&vkernel) {
                dirs.push(vkernel);
            }
        }
    }
    Some(dirs)
}

/// Whether c is an eigenvector direction of A (A c parallel to c, c != 0).
fn is_quasi_eigenvector<F: Field>(field: &F, a: &Matrix<F>, c: &[F::Elem]) -> bool {
    let ac = a.mul_vector(c);
    let lead = c.iter().position(|x| !field.is_zero(x)).expect("c nonzero");
    if field.is_zero(&ac[lead]) {
        return ac.iter().all(|x| field.is_zero(x));
    }
    let ratio = field.div(&ac[lead], &c[lead]).expect("lead nonzero");
    c.iter()
        .zip(&ac)
        .all(|(x, y)| field.mul(x, &ratio) == *y)
}

/// Exact stability decision for rank-2 type-B GPBs over any field. A
/// full-rank subsheaf strictly drops chi on the integral curve, so rank-1
/// subs decide; for d1 > d2 only the O(d1)-summand family can reach mu, and
/// for d1 = d2 only constant embeddings along a common quasi-eigenvector.
fn decide_rank2_type_b<F: Field>(v: &Gpb<F>) -> Result<StabilityVerdict<F>, StabilityError> {
    let field = v.field().clone();
    let glues = v.glue_matrices()?;
    let d1 = v.bundle().twists()[0];
    let d2 = v.bundle().twists()[1];
    let g = v.genus();
    let mu = v.gpb_slope();
    let params = SearchParams {
        window: default_window(v),
        domain: "rank2-type-b-closed-form".into(),
        complete_decision: true,
    };

    let (max_slope, witness_coeffs): (Slope, Vec<F::Elem>) = if d1 > d2 {
        let e1 = [field.one(), field.zero()];
        let count = glues
            .iter()
            .filter(|a| is_quasi_eigenvector(&field, a, &e1))
            .count() as i64;
        (Ratio::new(d1 + count, 1), e1.to_vec())
    } else {
        // Balanced splitting: maximize the number of pairs whose glue fixes
        // a single field-rational direction.
        let mut candidates: Vec<Vec<F::Elem>> = vec![vec![field.one(), field.zero()]];
        let mut all_scalar = true;
        for a in &glues {
            if let Some(dirs) = eigendirections_2x2(&field, a) {
                all_scalar = false;
                for d in dirs {
                    if !candidates.contains(&d) {
                        candidates.push(d);
                    }
                }
            }
        }
        let score = |c: &[F::Elem]| -> i64 {
            glues
                .iter()
                .filter(|a| is_quasi_eigenvector(&field, a, c))
                .count() as i64
        };
        if all_scalar {
            (Ratio::new(d1 + g as i64, 1), vec![field.one(), field.zero()])
        } else {
            let best = candidates
                .into_iter()
                .map(|c| (score(&c), c))
                .max_by_key(|(s, _)| *s)
                .expect("candidate list is nonempty");
            (Ratio::new(d1 + best.0, 1), best.1)
        }
    };

    let make_cert = || -> Result<SubGpbCertificate<F>, StabilityError> {
        let column = witness_coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let bound = (v.bundle().twists()[j] - d1).max(-1);
                UniPoly::new(field.clone(), vec![c.clone()], bound)
                    .expect("constant respects nonnegative bound")
            })
            .collect();
        let inclusion =
            PolyMatrixHom::from_column(field.clone(), d1, v.bundle().clone(), column)
                .expect("column shape is valid");
        SubGpbCertificate::for_inclusion(inclusion, v)
    };

    if max_slope > mu {
        Ok(StabilityVerdict {
            status: StabilityStatus::UnstableWithCertificate,
            witness: Some(make_cert()?),
            search_params: params,
        })
    } else if max_slope == mu {
        Ok(StabilityVerdict {
            status: StabilityStatus::SemistableExhaustive,
            witness: Some(make_cert()?),
            search_params: params,
        })
    } else {
        Ok(StabilityVerdict {
            status: StabilityStatus::StableExhaustive,
            witness: None,
            search_params: params,
        })
    }
}

/// Default budget for small-prime-field exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 200_000_000;

/// Decide or probe semistability.
///
/// Exhaustive mode is a genuine decision procedure for rank 1 (any field,
/// any structure), rank 2 of type B (any field), and rank 2 of type T over a
/// prime field small enough to enumerate; anything else is rejected rather
/// than given false authority. Randomized mode samples the window and can
/// only ever return `unstable-with-certificate` or
/// `no-destabilizer-found-randomized`.
pub fn is_semistable<F: Field>(
    v: &Gpb<F>,
    mode: Mode,
) -> Result<StabilityVerdict<F>, StabilityError> {
    match mode {
        Mode::Exhaustive => {
            if v.rank() == 1 {
                return decide_rank1(v);
            }
            if v.rank() == 2 && v.classify_type() == GpbType::B {
                return decide_rank2_type_b(v);
            }
            if v.rank() == 2 {
                // Type T over a small prime field: honest enumeration.
                let domain = SearchDomain::FieldExhaustive {
                    budget: DEFAULT_ENUMERATION_BUDGET,
                };
                let window = default_window(v);
                let best = line_subsheaf_search(v, window, &domain)?;
                let params = SearchParams {
                    window,
                    domain: domain.describe(),
                    complete_decision: true,
                };
                let mu = v.gpb_slope();
                return Ok(match best {
                    Some(cert) if cert.claimed_slope > mu => StabilityVerdict {
                        status: StabilityStatus::UnstableWithCertificate,
                        witness: Some(cert),
                        search_params: params,
                    },
                    Some(cert) if cert.claimed_slope == mu => StabilityVerdict {
                        status: StabilityStatus::SemistableExhaustive,
                        witness: Some(cert),
                        search_params: params,
                    },
                    _ => StabilityVerdict {
                        status: StabilityStatus::StableExhaustive,
                        witness: None,
                        search_params: params,
                    },
                });
            }
            Err(StabilityError::ExhaustiveUnsupported(format!(
                "rank {} exhaustive decision is out of scope (rank-1 subs do not decide it)",
                v.rank()
            )))
        }
        Mode::Randomized { samples, seed } => {
            let window = default_window(v);
            let domain = SearchDomain::Randomized { samples, seed };
            let best = line_subsheaf_search(v, window, &domain)?;
            let params = SearchParams {
                window,
                domain: domain.describe(),
                complete_decision: false,
            };
            let mu = v.gpb_slope();
            Ok(match best {
                Some(cert) if cert.claimed_slope > mu => StabilityVerdict {
                    status: StabilityStatus::UnstableWithCertificate,
                    witness: Some(cert),
                    search_params: params,
                },
                _ => StabilityVerdict {
                    status: StabilityStatus::NoDestabilizerFoundRandomized,
                    witness: None,
                    search_params: params,
                },
            })
        }
    }
}

/// Convenience: a marked line plus identity glue of the given rank.
pub fn type_b_with_identity_glue<F: Field>(
    line: MarkedLine<F>,
    twists: Vec<i64>,
) -> Result<Gpb<F>, GpbError> {
    let field = line.field().clone();
    let bundle = SplitBundle::new(twists)?;
    let glues = vec![Matrix::identity(field, bundle.rank()); line.genus()];
    Gpb::new(bundle, line, crate::gpb::Structure::Graphs(glues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, PrimeField, Rationals};
    use crate::gpb::Structure;

    fn q(n: i64) -> <Rationals as Field>::Elem {
        Rationals.from_i64(n)
    }

    fn line_q() -> MarkedLine<Rationals> {
        MarkedLine::from_i64_pairs(Rationals, &[(0, 2), (1, 3)]).unwrap()
    }

    /// ((1,-1), A_i = I, g = 2): the classic unstable fixture.
    fn unstable_fixture() -> Gpb<Rationals> {
        type_b_with_identity_glue(line_q(), vec![1, -1]).unwrap()
    }

    #[test]
    fn summand_certificate_destabilizes_fixture() {
        let v = unstable_fixture();
        // O(1) embedded as the first summand: induced dims all 1, slope 3 > mu = 2.
        let one = UniPoly::constant(Rationals, q(1), 0).unwrap();
        let zero = UniPoly::zero(Rationals, -1);
        let incl =
            PolyMatrixHom::from_column(Rationals, 1, v.bundle().clone(), vec![one, zero]).unwrap();
        let cert = SubGpbCertificate::for_inclusion(incl, &v).unwrap();
        assert_eq!(cert.claimed_slope, Ratio::new(3, 1));
        assert_eq!(
            verify_destabilizer(&cert, &v).unwrap(),
            CertificateCheck::StrictDestabilizer
        );
    }

    #[test]
    fn non_destabilizing_certificate_reports_false() {
        // Rank-1 type B, sub of one lower degree vanishing at a non-marked
        // point: slope mu - 1.
        let v = Gpb::rank1_type_b(line_q(), 0, &[q(1), q(1)]).unwrap();
        let p = UniPoly::from_roots(Rationals, &[q(7)], q(1), 1).unwrap();
        let incl = PolyMatrixHom::from_column(Rationals, -1, v.bundle().clone(), vec![p]).unwrap();
        let cert = SubGpbCertificate::for_inclusion(incl, &v).unwrap();
        assert_eq!(cert.claimed_slope, Ratio::new(1, 1));
        assert_eq!(
            verify_destabilizer(&cert, &v).unwrap(),
            CertificateCheck::NotDestabilizing
        );
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let v = unstable_fixture();
        let one = UniPoly::constant(Rationals, q(1), 0).unwrap();
        let zero = UniPoly::zero(Rationals, -1);
        let incl =
            PolyMatrixHom::from_column(Rationals, 1, v.bundle().clone(), vec![one, zero]).unwrap();
        let mut cert = SubGpbCertificate::for_inclusion(incl, &v).unwrap();
        cert.claimed_slope = Ratio::new(10, 1);
        assert!(matches!(
            verify_destabilizer(&cert, &v),
            Err(StabilityError::MalformedCertificate(_))
        ));
    }

    #[test]
    fn improper_certificate_is_rejected() {
        let v = Gpb::rank1_type_b(line_q(), 0, &[q(1), q(1)]).unwrap();
        let id = PolyMatrixHom::identity(Rationals, v.bundle().clone());
        let induced = induced_structure(&id, &v).unwrap();
        let cert = SubGpbCertificate {
            inclusion: id,
            induced,
            claimed_slope: Ratio::new(2, 1),
        };
        assert!(matches!(
            verify_destabilizer(&cert, &v),
            Err(StabilityError::MalformedCertificate(_))
        ));
    }

    #[test]
    fn search_finds_summand_destabilizer_over_f5() {
        let f5 = PrimeField::new(5).unwrap();
        let line = MarkedLine::from_i64_pairs(f5, &[(0, 2), (1, 3)]).unwrap();
        let v = type_b_with_identity_glue(line, vec![1, -1]).unwrap();
        let cert = line_subsheaf_search(
            &v,
            default_window(&v),
            &SearchDomain::FieldExhaustive { budget: 10_000_000 },
        )
        .unwrap()
        .expect("search finds something");
        assert_eq!(cert.claimed_slope, Ratio::new(3, 1));
        assert_eq!(
            verify_destabilizer(&cert, &v).unwrap(),
            CertificateCheck::StrictDestabilizer
        );
    }

    #[test]
    fn search_on_stable_rank1_tops_out_at_boundary() {
        // Rank-1 type B of degree 0: constants at e = 0 are isomorphisms
        // and excluded, so the best proper sub reaches slope mu - 1.
        let f5 = PrimeField::new(5).unwrap();
        let line = MarkedLine::from_i64_pairs(f5, &[(0, 2), (1, 3)]).unwrap();
        let v = Gpb::rank1_type_b(line, 0, &[1, 1]).unwrap();
        let cert = line_subsheaf_search(
            &v,
            (-4, 0),
            &SearchDomain::FieldExhaustive { budget: 10_000_000 },
        )
        .unwrap()
        .expect("some sub exists");
        assert!(cert.claimed_slope < v.gpb_slope());
        assert_eq!(cert.claimed_slope, Ratio::new(1, 1));
    }

    #[test]
    fn search_rejects_empty_window() {
        let v = unstable_fixture();
        assert_eq!(
            line_subsheaf_search(&v, (1, 0), &SearchDomain::IntegerBox { max_abs: 1, budget: 100 })
                .unwrap_err(),
            StabilityError::EmptyWindow { lo: 1, hi: 0 }
        );
    }

    #[test]
    fn search_budget_is_enforced() {
        let f5 = PrimeField::new(5).unwrap();
        let line = MarkedLine::from_i64_pairs(f5, &[(0, 2), (1, 3)]).unwrap();
        let v = type_b_with_identity_glue(line, vec![1, -1]).unwrap();
        let err = line_subsheaf_search(
            &v,
            default_window(&v),
            &SearchDomain::FieldExhaustive { budget: 10 },
        )
        .unwrap_err();
        assert!(matches!(err, StabilityError::SearchTooLarge { .. }));
    }

    #[test]
    fn rank1_gpbs_of_type_b_are_stable() {
        let v = Gpb::rank1_type_b(line_q(), 0, &[q(3), q(5)]).unwrap();
        let verdict = is_semistable(&v, Mode::Exhaustive).unwrap();
        assert_eq!(verdict.status, StabilityStatus::StableExhaustive);
        assert!(verdict.search_params.complete_decision);
    }

    #[test]
    fn unstable_fixture_is_detected_with_witness() {
        let verdict = is_semistable(&unstable_fixture(), Mode::Exhaustive).unwrap();
        assert_eq!(verdict.status, StabilityStatus::UnstableWithCertificate);
        let w = verdict.witness.expect("unstable verdicts carry witnesses");
        assert_eq!(w.claimed_slope, Ratio::new(3, 1));
    }

    #[test]
    fn identity_glue_balanced_is_semistable_not_stable() {
        // ((0,0), A = I): the diagonal O -> O+O has slope exactly mu = 2.
        let v = type_b_with_identity_glue(line_q(), vec![0, 0]).unwrap();
        let verdict = is_semistable(&v, Mode::Exhaustive).unwrap();
        assert_eq!(verdict.status, StabilityStatus::SemistableExhaustive);
        let w = verdict.witness.expect("equality witness attached");
        assert_eq!(w.claimed_slope, v.gpb_slope());
        assert_eq!(
            verify_destabilizer(&w, &v).unwrap(),
            CertificateCheck::SlopeEquality
        );
    }

    #[test]
    fn generic_balanced_rank2_is_stable() {
        // Glues with no common rational eigendirection.
        let rot = Matrix::from_i64_rows(Rationals, &[&[0, -1], &[1, 0]]);
        let id = Matrix::identity(Rationals, 2);
        let v = Gpb::new(
            SplitBundle::new(vec![0, 0]).unwrap(),
            line_q(),
            Structure::Graphs(vec![rot, id]),
        )
        .unwrap();
        let verdict = is_semistable(&v, Mode::Exhaustive).unwrap();
        // rot has no rational eigendirections at all.
        assert_eq!(verdict.status, StabilityStatus::StableExhaustive);
    }

    #[test]
    fn rank2_closed_form_matches_enumeration_over_f5() {
        // Cross-check the closed form against the honest search on a prime
        // field, across several glue shapes.
        let f5 = PrimeField::new(5).unwrap();
        let line = MarkedLine::from_i64_pairs(f5, &[(0, 2), (1, 3)]).unwrap();
        let glue_sets: Vec<Vec<Matrix<PrimeField>>> = vec![
            vec![Matrix::identity(f5, 2), Matrix::identity(f5, 2)],
            vec![
                Matrix::from_i64_rows(f5, &[&[0, 1], &[1, 0]]),
                Matrix::identity(f5, 2),
            ],
            vec![
                Matrix::from_i64_rows(f5, &[&[1, 1], &[0, 1]]),
                Matrix::from_i64_rows(f5, &[&[2, 0], &[0, 3]]),
            ],
            vec![
                Matrix::from_i64_rows(f5, &[&[1, 2], &[3, 4]]),
                Matrix::from_i64_rows(f5, &[&[2, 1], &[1, 1]]),
            ],
        ];
        for twists in [vec![0, 0], vec![1, -1]] {
            for glues in &glue_sets {
                let v = Gpb::new(
                    SplitBundle::new(twists.clone()).unwrap(),
                    line.clone(),
                    Structure::Graphs(glues.clone()),
                )
                .unwrap();
                let closed = decide_rank2_type_b(&v).unwrap();
                let best = line_subsheaf_search(
                    &v,
                    default_window(&v),
                    &SearchDomain::FieldExhaustive { budget: 100_000_000 },
                )
                .unwrap()
                .expect("window always contains some sub");
                let mu = v.gpb_slope();
                let expected = if best.claimed_slope > mu {
                    StabilityStatus::UnstableWithCertificate
                } else if best.claimed_slope == mu {
                    StabilityStatus::SemistableExhaustive
                } else {
                    StabilityStatus::StableExhaustive
                };
                assert_eq!(closed.status, expected, "twists {twists:?}");
                if let Some(w) = &closed.witness {
                    assert_eq!(w.claimed_slope, best.claimed_slope);
                }
            }
        }
    }

    #[test]
    fn exhaustive_mode_refuses_rank3() {
        let v = type_b_with_identity_glue(line_q(), vec![0, 0, 0]).unwrap();
        assert!(matches!(
            is_semistable(&v, Mode::Exhaustive),
            Err(StabilityError::ExhaustiveUnsupported(_))
        ));
    }

    #[test]
    fn randomized_mode_flags_incompleteness() {
        let v = type_b_with_identity_glue(line_q(), vec![0, 0, 0]).unwrap();
        let verdict = is_semistable(
            &v,
            Mode::Randomized {
                samples: 50,
                seed: 7,
            },
        )
        .unwrap();
        assert!(!verdict.search_params.complete_decision);
        assert!(matches!(
            verdict.status,
            StabilityStatus::NoDestabilizerFoundRandomized | StabilityStatus::UnstableWithCertificate
        ));
    }

    #[test]
    fn randomized_mode_finds_obvious_destabilizer() {
        let f = PrimeField::new(10007).unwrap();
        let line = MarkedLine::from_i64_pairs(f, &[(0, 2), (1, 3)]).unwrap();
        let v = type_b_with_identity_glue(line, vec![2, 0, -2]).unwrap();
        // O(2) summand has induced dims 1 everywhere (identity glue): slope 4 > mu = 2.
        let verdict = is_semistable(
            &v,
            Mode::Randomized {
                samples: 200,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(verdict.status, StabilityStatus::UnstableWithCertificate);
    }

    #[test]
    fn eigendirection_extraction() {
        let f = Rationals;
        // [[1,1],[0,1]]: single eigendirection e1.
        let a = Matrix::from_i64_rows(f, &[&[1, 1], &[0, 1]]);
        let dirs = eigendirections_2x2(&f, &a).unwrap();
        assert_eq!(dirs.len(), 1);
        assert!(is_quasi_eigenvector(&f, &a, &dirs[0]));
        // Rotation: no rational eigendirections.
        let rot = Matrix::from_i64_rows(f, &[&[0, -1], &[1, 0]]);
        assert!(eigendirections_2x2(&f, &rot).unwrap().is_empty());
        // Scalar matrix: every direction.
        let s = Matrix::from_i64_rows(f, &[&[3, 0], &[0, 3]]);
        assert!(eigendirections_2x2(&f, &s).is_none());
        // diag(1,2): two eigendirections.
        let d = Matrix::from_i64_rows(f, &[&[1, 0], &[0, 2]]);
        assert_eq!(eigendirections_2x2(&f, &d).unwrap().len(), 2);
    }
}
