//! Univariate and multivariate polynomial arithmetic over exact fields.
//!
//! `UniPoly` carries a degree bound because morphism-matrix entries are
//! degree-bounded by the splitting types they connect; the bound is part of
//! the value and is enforced on construction.

use crate::field::Field;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomial degree {degree} exceeds bound {bound}")]
    DegreeOverflow { degree: usize, bound: i64 },
    #[error("evaluation point tuple has length {got}, expected {expected}")]
    ArityMismatch { got: usize, expected: usize },
    #[error("interpolation nodes must be pairwise distinct")]
    RepeatedNode,
}

/// A univariate polynomial with ascending coefficients and a degree bound.
///
/// Coefficients are normalized: the leading (last) stored coefficient of a
/// nonzero polynomial is nonzero; the zero polynomial stores no coefficients.
/// A negative bound forces the polynomial to be zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly<F: Field> {
    field: F,
    coeffs: Vec<F::Elem>,
    degree_bound: i64,
}

impl<F: Field> UniPoly<F> {
    pub fn new(field: F, mut coeffs: Vec<F::Elem>, degree_bound: i64) -> Result<Self, PolyError> {
        while let Some(last) = coeffs.last() {
            if field.is_zero(last) {
                coeffs.pop();
            } else {
                break;
            }
        }
        if !coeffs.is_empty() {
            let degree = coeffs.len() - 1;
            if (degree as i64) > degree_bound {
                return Err(PolyError::DegreeOverflow {
                    degree,
                    bound: degree_bound,
                });
            }
        }
        Ok(UniPoly {
            field,
            coeffs,
            degree_bound,
        })
    }

    pub fn zero(field: F, degree_bound: i64) -> Self {
        UniPoly {
            field,
            coeffs: Vec::new(),
            degree_bound,
        }
    }

    pub fn constant(field: F, value: F::Elem, degree_bound: i64) -> Result<Self, PolyError> {
        UniPoly::new(field, vec![value], degree_bound)
    }

    /// The monomial t^m.
    pub fn monomial(field: F, m: usize, degree_bound: i64) -> Result<Self, PolyError> {
        let mut coeffs = vec![field.zero(); m + 1];
        coeffs[m] = field.one();
        UniPoly::new(field, coeffs, degree_bound)
    }

    /// (t - r1)(t - r2)... scaled by `lead`.
    pub fn from_roots(field: F, roots: &[F::Elem], lead: F::Elem, degree_bound: i64) -> Result<Self, PolyError> {
        let mut coeffs = vec![lead];
        for r in roots {
            let mut next = vec![field.zero(); coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i + 1] = field.add(&next[i + 1], c);
                let shifted = field.mul(c, r);
                next[i] = field.sub(&next[i], &shifted);
            }
            coeffs = next;
        }
        UniPoly::new(field, coeffs, degree_bound)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn coeffs(&self) -> &[F::Elem] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> i64 {
        self.degree_bound
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, t: &F::Elem) -> F::Elem {
        let f = &self.field;
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, t), c);
        }
        acc
    }

    pub fn add(&self, other: &UniPoly<F>) -> Result<UniPoly<F>, PolyError> {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero());
            let b = other.coeffs.get(i).cloned().unwrap_or_else(|| f.zero());
            coeffs.push(f.add(&a, &b));
        }
        UniPoly::new(
            f.clone(),
            coeffs,
            self.degree_bound.max(other.degree_bound),
        )
    }

    pub fn scale(&self, c: &F::Elem) -> UniPoly<F> {
        let f = &self.field;
        let coeffs = self.coeffs.iter().map(|a| f.mul(a, c)).collect();
        UniPoly::new(f.clone(), coeffs, self.degree_bound).expect("scaling cannot raise degree")
    }

    pub fn mul(&self, other: &UniPoly<F>) -> UniPoly<F> {
        let f = &self.field;
        let bound = self.degree_bound.saturating_add(other.degree_bound);
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(f.clone(), bound);
        }
        let mut coeffs = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = f.add(&coeffs[i + j], &f.mul(a, b));
            }
        }
        UniPoly::new(f.clone(), coeffs, bound).expect("product respects summed bounds")
    }

    /// Lagrange interpolation through (nodes[i], values[i]); the result's
    /// bound is nodes.len() - 1.
    pub fn interpolate(
        field: F,
        nodes: &[F::Elem],
        values: &[F::Elem],
    ) -> Result<UniPoly<F>, PolyError> {
        assert_eq!(nodes.len(), values.len());
        let n = nodes.len();
        let bound = n as i64 - 1;
        let mut acc = UniPoly::zero(field.clone(), bound);
        for i in 0..n {
            let mut term = UniPoly::constant(field.clone(), values[i].clone(), bound)?;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let diff = field.sub(&nodes[i], &nodes[j]);
                let inv = field.inv(&diff).ok_or(PolyError::RepeatedNode)?;
                // term *= (t - node_j) / (node_i - node_j)
                let factor = UniPoly::new(
                    field.clone(),
                    vec![field.mul(&field.neg(&nodes[j]), &inv), inv],
                    1,
                )?;
                term = term.mul(&factor);
            }
            let coeffs: Vec<F::Elem> = term.coeffs().to_vec();
            acc = acc.add(&UniPoly::new(field.clone(), coeffs, bound)?)?;
        }
        UniPoly::new(field, acc.coeffs, bound)
    }
}

/// A multivariate polynomial in variables λ1..λn, stored as a sorted map
/// from exponent tuples to nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly<F: Field> {
    field: F,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, F::Elem>,
}

impl<F: Field> MultiPoly<F> {
    pub fn zero(field: F, nvars: usize) -> Self {
        MultiPoly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: F, value: F::Elem, nvars: usize) -> Self {
        let mut p = MultiPoly::zero(field, nvars);
        p.add_term(vec![0; nvars], value);
        p
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &F::Elem)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, coeff: F::Elem) {
        assert_eq!(exps.len(), self.nvars);
        if self.field.is_zero(&coeff) {
            return;
        }
        let f = self.field.clone();
        match self.terms.remove(&exps) {
            None => {
                self.terms.insert(exps, coeff);
            }
            Some(old) => {
                let sum = f.add(&old, &coeff);
                if !f.is_zero(&sum) {
                    self.terms.insert(exps, sum);
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly<F>) -> MultiPoly<F> {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly<F>) -> MultiPoly<F> {
        assert_eq!(self.nvars, other.nvars);
        let f = &self.field;
        let mut out = MultiPoly::zero(f.clone(), self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(exps, f.mul(ca, cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &F::Elem) -> MultiPoly<F> {
        let f = &self.field;
        let mut out = MultiPoly::zero(f.clone(), self.nvars);
        for (e, a) in &self.terms {
            out.add_term(e.clone(), f.mul(a, c));
        }
        out
    }

    /// Lift a univariate polynomial into variable `var` of an nvars-ring.
    pub fn from_univariate(p: &UniPoly<F>, var: usize, nvars: usize) -> MultiPoly<F> {
        assert!(var < nvars);
        let mut out = MultiPoly::zero(p.field().clone(), nvars);
        for (k, c) in p.coeffs().iter().enumerate() {
            let mut exps = vec![0u32; nvars];
            exps[var] = k as u32;
            out.add_term(exps, c.clone());
        }
        out
    }

    /// Exact evaluation at a point; errors when the tuple length is wrong.
    pub fn eval(&self, point: &[F::Elem]) -> Result<F::Elem, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::ArityMismatch {
                got: point.len(),
                expected: self.nvars,
            });
        }
        let f = &self.field;
        let mut acc = f.zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (v, &e) in point.iter().zip(exps.iter()) {
                for _ in 0..e {
                    term = f.mul(&term, v);
                }
            }
            acc = f.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Degree in one variable (0 for the zero polynomial).
    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, PrimeField, Rationals};

    #[test]
    fn horner_eval_matches_direct_substitution() {
        // p = t^2 + 1 at t = 2 over Q -> 5
        let p = UniPoly::new(
            Rationals,
            vec![
                Rationals.from_i64(1),
                Rationals.from_i64(0),
                Rationals.from_i64(1),
            ],
            2,
        )
        .unwrap();
        assert_eq!(p.eval(&Rationals.from_i64(2)), Rationals.from_i64(5));
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let p = UniPoly::zero(Rationals, 3);
        assert_eq!(p.eval(&Rationals.from_i64(17)), Rationals.from_i64(0));
        assert!(p.is_zero());
        assert_eq!(p.degree(), None);
    }

    #[test]
    fn normalization_trims_trailing_zeros() {
        let f = PrimeField::new(5).unwrap();
        let p = UniPoly::new(f, vec![2, 3, 0, 0], 3).unwrap();
        assert_eq!(p.coeffs(), &[2, 3]);
        assert_eq!(p.degree(), Some(1));
    }

    #[test]
    fn degree_bound_is_enforced() {
        let f = Rationals;
        let err = UniPoly::new(f, vec![f.from_i64(1), f.from_i64(1)], 0).unwrap_err();
        assert_eq!(
            err,
            PolyError::DegreeOverflow {
                degree: 1,
                bound: 0
            }
        );
        // A high-degree coefficient vector that collapses to a constant is fine.
        let ok = UniPoly::new(f, vec![f.from_i64(1), f.from_i64(0)], 0).unwrap();
        assert_eq!(ok.degree(), Some(0));
    }

    #[test]
    fn from_roots_expands_correctly() {
        let f = Rationals;
        // (t-1)(t-2) = t^2 - 3t + 2
        let p = UniPoly::from_roots(f, &[f.from_i64(1), f.from_i64(2)], f.one(), 2).unwrap();
        assert_eq!(
            p.coeffs(),
            &[f.from_i64(2), f.from_i64(-3), f.from_i64(1)]
        );
        assert!(Rationals.is_zero(&p.eval(&f.from_i64(1))));
        assert!(Rationals.is_zero(&p.eval(&f.from_i64(2))));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = PrimeField::new(10007).unwrap();
        let p = UniPoly::new(f, vec![3, 0, 7, 2], 3).unwrap();
        let nodes: Vec<u64> = vec![1, 2, 3, 4];
        let values: Vec<u64> = nodes.iter().map(|t| p.eval(t)).collect();
        let q = UniPoly::interpolate(f, &nodes, &values).unwrap();
        assert_eq!(p.coeffs(), q.coeffs());
    }

    #[test]
    fn multi_eval_product_of_variables() {
        // q = λ1·λ2 at (3,4) -> 12
        let f = Rationals;
        let mut q = MultiPoly::zero(f, 2);
        q.add_term(vec![1, 1], f.one());
        assert_eq!(
            q.eval(&[f.from_i64(3), f.from_i64(4)]).unwrap(),
            f.from_i64(12)
        );
        assert_eq!(
            q.eval(&[f.from_i64(3)]).unwrap_err(),
            PolyError::ArityMismatch {
                got: 1,
                expected: 2
            }
        );
    }

    #[test]
    fn multi_poly_drops_cancelling_terms() {
        let f = Rationals;
        let mut q = MultiPoly::zero(f, 1);
        q.add_term(vec![2], f.from_i64(5));
        q.add_term(vec![2], f.from_i64(-5));
        assert!(q.is_zero());
        assert_eq!(q.num_terms(), 0);
    }

    #[test]
    fn multi_poly_product_degree() {
        let f = Rationals;
        let mut a = MultiPoly::zero(f, 2);
        a.add_term(vec![1, 0], f.one());
        a.add_term(vec![0, 0], f.from_i64(-2));
        let mut b = MultiPoly::zero(f, 2);
        b.add_term(vec![0, 1], f.one());
        let ab = a.mul(&b);
        assert_eq!(ab.degree_in(0), 1);
        assert_eq!(ab.degree_in(1), 1);
        assert_eq!(
            ab.eval(&[f.from_i64(2), f.from_i64(9)]).unwrap(),
            f.from_i64(0)
        );
    }
}
