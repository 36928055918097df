//! Laurent polynomials and matrices over the group ring C[Z^n].
//!
//! Exponents are exact integers; coefficients are `Complex64`. A term is only
//! dropped when its coefficient is exactly zero, so cancellation residue from
//! floating arithmetic stays visible to callers that check identities such as
//! `d∘d = 0`.
//!
//! The involution `z^m ↦ z^{-m}` combined with complex conjugation models
//! duality of Hilbertian modules; on matrices it is conjugate transposition,
//! and evaluation at a torus point turns it into the ordinary adjoint.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector of a monomial `z_1^{m_1} ⋯ z_n^{m_n}`.
pub type Exponent = Vec<i32>;

/// A point `(exp(iθ_1), …, exp(iθ_n))` of the n-torus, stored by its angles.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    pub angles: Vec<f64>,
}

impl TorusPoint {
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles }
    }

    pub fn num_vars(&self) -> usize {
        self.angles.len()
    }

    /// The coordinates `z_k = exp(iθ_k)`.
    pub fn coords(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }
}

/// Element of C[z_1^{±1}, …, z_n^{±1}].
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    num_vars: usize,
    terms: BTreeMap<Exponent, Complex64>,
}

impl LaurentPoly {
    pub fn zero(num_vars: usize) -> Self {
        Self { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: Complex64) -> Self {
        Self::monomial(vec![0; num_vars], c)
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Complex64::new(1.0, 0.0))
    }

    /// `c · z^exp`; the number of variables is the length of `exp`.
    pub fn monomial(exp: Exponent, c: Complex64) -> Self {
        let num_vars = exp.len();
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(exp, c);
        }
        Self { num_vars, terms }
    }

    /// The variable `z_k` (zero-based `k`).
    pub fn var(num_vars: usize, k: usize) -> Self {
        let mut exp = vec![0; num_vars];
        exp[k] = 1;
        Self::monomial(exp, Complex64::new(1.0, 0.0))
    }

    /// `z_k - 1`, the boundary symbol of a one-cell along the k-th circle.
    pub fn var_minus_one(num_vars: usize, k: usize) -> Self {
        &Self::var(num_vars, k) - &Self::one(num_vars)
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let mut p = Self::zero(num_vars);
        for (exp, c) in terms {
            if exp.len() != num_vars {
                return Err(Error::DimensionMismatch { expected: num_vars, found: exp.len() });
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, exp: Exponent, c: Complex64) {
        use std::collections::btree_map::Entry;
        let zero = Complex64::new(0.0, 0.0);
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                if c != zero {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                // exact cancellation only
                if *o.get() == zero {
                    o.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &[i32]) -> Complex64 {
        self.terms.get(exp).copied().unwrap_or_default()
    }

    /// Largest coefficient magnitude; zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    /// The group-ring involution: `Σ c_m z^m ↦ Σ conj(c_m) z^{-m}`.
    pub fn involution(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.iter().map(|x| -x).collect::<Exponent>(), c.conj())).collect();
        Self { num_vars: self.num_vars, terms }
    }

    /// Entrywise complex conjugation of coefficients, exponents untouched.
    pub fn conj_coeffs(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.conj())).collect();
        Self { num_vars: self.num_vars, terms }
    }

    /// Evaluates at a torus point: `Σ c_m exp(i⟨m, θ⟩)`.
    pub fn eval(&self, pt: &TorusPoint) -> Result<Complex64> {
        if pt.num_vars() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: pt.num_vars() });
        }
        Ok(self.eval_unchecked(&pt.angles))
    }

    pub(crate) fn eval_unchecked(&self, angles: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let phase: f64 = e.iter().zip(angles).map(|(&m, &t)| m as f64 * t).sum();
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: other.num_vars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut acc: BTreeMap<Exponent, Complex64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += c1 * c2;
            }
        }
        let zero = Complex64::new(0.0, 0.0);
        acc.retain(|_, v| *v != zero);
        Ok(Self { num_vars: self.num_vars, terms: acc })
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (k, m) in e.iter().enumerate() {
                if *m != 0 {
                    write!(f, "·z{}^{}", k + 1, m)?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_add(rhs).expect("LaurentPoly add: variable count mismatch")
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        LaurentPoly { num_vars: self.num_vars, terms }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_mul(rhs).expect("LaurentPoly mul: variable count mismatch")
    }
}

/// Dense row-major matrix of Laurent polynomials; a morphism between free
/// Hilbertian modules over N(Z^n).
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    num_vars: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn zeros(num_vars: usize, rows: usize, cols: usize) -> Self {
        Self { rows, cols, num_vars, entries: vec![LaurentPoly::zero(num_vars); rows * cols] }
    }

    pub fn identity(num_vars: usize, k: usize) -> Self {
        let mut m = Self::zeros(num_vars, k, k);
        for i in 0..k {
            m.entries[i * k + i] = LaurentPoly::one(num_vars);
        }
        m
    }

    /// Builds a matrix from rows; every row must have the same length.
    pub fn from_rows(num_vars: usize, rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for r in rows {
            if r.len() != ncols {
                return Err(Error::ShapeMismatch { op: "from_rows", lhs: (nrows, ncols), rhs: (1, r.len()) });
            }
            for p in r {
                if p.num_vars() != num_vars {
                    return Err(Error::DimensionMismatch { expected: num_vars, found: p.num_vars() });
                }
                entries.push(p);
            }
        }
        Ok(Self { rows: nrows, cols: ncols, num_vars, entries })
    }

    /// A 1×1 matrix.
    pub fn scalar(p: LaurentPoly) -> Self {
        Self { rows: 1, cols: 1, num_vars: p.num_vars(), entries: vec![p] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn get(&self, r: usize, c: usize) -> &LaurentPoly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: LaurentPoly) -> Result<()> {
        if p.num_vars() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: p.num_vars() });
        }
        self.entries[r * self.cols + c] = p;
        Ok(())
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.iter().map(LaurentPoly::max_abs_coeff).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(LaurentPoly::is_zero)
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: other.num_vars });
        }
        Ok(())
    }

    /// Conjugate transpose under the group-ring involution.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.num_vars, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).involution();
            }
        }
        out
    }

    /// Entrywise conjugation `z ↦ z^{-1}`, coefficients conjugated, no transpose.
    pub fn bar(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            num_vars: self.num_vars,
            entries: self.entries.iter().map(LaurentPoly::involution).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.check_vars(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch { op: "matmul", lhs: self.shape(), rhs: rhs.shape() });
        }
        let mut out = Self::zeros(self.num_vars, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = LaurentPoly::zero(self.num_vars);
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), rhs.get(k, j));
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.entries[i * rhs.cols + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_vars(rhs)?;
        if self.shape() != rhs.shape() {
            return Err(Error::ShapeMismatch { op: "add", lhs: self.shape(), rhs: rhs.shape() });
        }
        let entries = self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect();
        Ok(self.with_entries(entries))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let entries = self.entries.iter().map(|p| p.scale(c)).collect();
        self.with_entries(entries)
    }

    fn with_entries(&self, entries: Vec<LaurentPoly>) -> Self {
        Self { rows: self.rows, cols: self.cols, num_vars: self.num_vars, entries }
    }

    pub fn block_diag(blocks: &[&Self]) -> Result<Self> {
        let num_vars = blocks.first().map_or(1, |b| b.num_vars);
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(num_vars, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            if b.num_vars != num_vars {
                return Err(Error::DimensionMismatch { expected: num_vars, found: b.num_vars });
            }
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.entries[(r0 + i) * cols + c0 + j] = b.get(i, j).clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Horizontal concatenation `[A | B | …]`.
    pub fn hstack(blocks: &[&Self]) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Domain("hstack of nothing".into()))?;
        let rows = first.rows;
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(first.num_vars, rows, cols);
        let mut c0 = 0;
        for b in blocks {
            first.check_vars(b)?;
            if b.rows != rows {
                return Err(Error::ShapeMismatch { op: "hstack", lhs: first.shape(), rhs: b.shape() });
            }
            for i in 0..rows {
                for j in 0..b.cols {
                    out.entries[i * cols + c0 + j] = b.get(i, j).clone();
                }
            }
            c0 += b.cols;
        }
        Ok(out)
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let adj: Vec<Self> = blocks.iter().map(|b| b.transpose()).collect();
        let refs: Vec<&Self> = adj.iter().collect();
        Ok(Self::hstack(&refs)?.transpose())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.num_vars, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        out
    }

    /// Evaluates every entry at `pt`.
    pub fn eval_matrix(&self, pt: &TorusPoint) -> Result<DMatrix<Complex64>> {
        if pt.num_vars() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: pt.num_vars() });
        }
        Ok(self.eval_unchecked(&pt.angles))
    }

    pub(crate) fn eval_unchecked(&self, angles: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).eval_unchecked(angles))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(LaurentMatrixJson::from(self)).expect("LaurentMatrix JSON encoding")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: LaurentMatrixJson = serde_json::from_value(v.clone())?;
        Self::try_from(j)
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    exp: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryJson {
    row: usize,
    col: usize,
    terms: Vec<TermJson>,
}

/// Wire form of a [`LaurentMatrix`]; zero entries are omitted.
#[derive(Debug, Serialize, Deserialize)]
struct LaurentMatrixJson {
    rows: usize,
    cols: usize,
    num_vars: usize,
    #[serde(default)]
    entries: Vec<EntryJson>,
}

impl From<&LaurentMatrix> for LaurentMatrixJson {
    fn from(m: &LaurentMatrix) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.rows {
            for c in 0..m.cols {
                let p = m.get(r, c);
                if p.is_zero() {
                    continue;
                }
                let terms = p.terms().map(|(e, z)| TermJson { exp: e.clone(), re: z.re, im: z.im }).collect();
                entries.push(EntryJson { row: r, col: c, terms });
            }
        }
        Self { rows: m.rows, cols: m.cols, num_vars: m.num_vars, entries }
    }
}

impl TryFrom<LaurentMatrixJson> for LaurentMatrix {
    type Error = Error;

    fn try_from(j: LaurentMatrixJson) -> Result<Self> {
        if j.num_vars == 0 {
            return Err(Error::Parse("num_vars must be at least 1".into()));
        }
        let mut m = LaurentMatrix::zeros(j.num_vars, j.rows, j.cols);
        for e in j.entries {
            if e.row >= j.rows || e.col >= j.cols {
                return Err(Error::Parse(format!("entry ({}, {}) outside {}x{} matrix", e.row, e.col, j.rows, j.cols)));
            }
            let terms = e.terms.into_iter().map(|t| (t.exp, Complex64::new(t.re, t.im)));
            let p = LaurentPoly::from_terms(j.num_vars, terms).map_err(|err| Error::Parse(err.to_string()))?;
            let p = m.get(e.row, e.col) + &p;
            m.set(e.row, e.col, p)?;
        }
        Ok(m)
    }
}

impl Serialize for LaurentMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LaurentMatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LaurentMatrixJson::deserialize(d)?;
        LaurentMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::fiber_singular_values;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zm1() -> LaurentPoly {
        LaurentPoly::var_minus_one(1, 0)
    }

    #[test]
    fn evaluation_examples() {
        let p = zm1();
        assert!((p.eval(&TorusPoint::new(vec![PI])).unwrap() - c(-2.0, 0.0)).norm() < 1e-15);
        assert!(p.eval(&TorusPoint::new(vec![0.0])).unwrap().norm() < 1e-15);
        let q = LaurentPoly::monomial(vec![1, -1], c(1.0, 0.0));
        let v = q.eval(&TorusPoint::new(vec![PI / 2.0, PI / 2.0])).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(p.eval(&TorusPoint::new(vec![0.0, 0.0])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn adjoint_examples() {
        let m = LaurentMatrix::scalar(LaurentPoly::monomial(vec![1, 0], c(0.0, 2.0)));
        let a = m.adjoint();
        assert_eq!(a.get(0, 0), &LaurentPoly::monomial(vec![-1, 0], c(0.0, -2.0)));
        assert_eq!(a.adjoint(), m);

        let row =
            LaurentMatrix::from_rows(2, vec![vec![LaurentPoly::var_minus_one(2, 0), LaurentPoly::var_minus_one(2, 1)]])
                .unwrap();
        assert_eq!(row.adjoint().shape(), (2, 1));
    }

    #[test]
    fn product_with_adjoint() {
        let m = LaurentMatrix::scalar(zm1());
        let p = m.matmul(&m.adjoint()).unwrap();
        let z = LaurentPoly::var(1, 0);
        let zinv = LaurentPoly::monomial(vec![-1], c(1.0, 0.0));
        let expect = &(&LaurentPoly::constant(1, c(2.0, 0.0)) - &z) - &zinv;
        assert_eq!(p.get(0, 0), &expect);
    }

    #[test]
    fn exact_cancellation_prunes_terms() {
        let p = zm1();
        assert!((&p - &p).is_zero());
        assert_eq!((&p + &LaurentPoly::one(1)).num_terms(), 1);
    }

    #[test]
    fn shape_and_variable_errors() {
        let a = LaurentMatrix::zeros(1, 2, 3);
        let b = LaurentMatrix::zeros(1, 2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::ShapeMismatch { .. })));
        let c2 = LaurentMatrix::zeros(2, 3, 1);
        assert!(matches!(a.matmul(&c2), Err(Error::DimensionMismatch { .. })));
        assert!(LaurentPoly::from_terms(2, [(vec![1], c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn stacking() {
        let m = LaurentMatrix::scalar(zm1());
        let i = LaurentMatrix::identity(1, 1);
        let h = LaurentMatrix::hstack(&[&m, &i]).unwrap();
        assert_eq!(h.shape(), (1, 2));
        let v = LaurentMatrix::vstack(&[&m, &i]).unwrap();
        assert_eq!(v, h.transpose());
        let d = LaurentMatrix::block_diag(&[&m, &i]).unwrap();
        assert_eq!(d.get(0, 1), &LaurentPoly::zero(1));
        assert_eq!(d.get(1, 1), &LaurentPoly::one(1));
    }

    #[test]
    fn json_round_trip() {
        let m = LaurentMatrix::from_rows(
            2,
            vec![vec![LaurentPoly::var_minus_one(2, 0), LaurentPoly::monomial(vec![-2, 3], c(0.5, -1.5))]],
        )
        .unwrap();
        let v = m.to_json();
        assert_eq!(v["rows"], 1);
        assert_eq!(LaurentMatrix::from_json(&v).unwrap(), m);
        let s = serde_json::to_string(&m).unwrap();
        let back: LaurentMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = serde_json::json!({"rows": 1, "cols": 1, "num_vars": 1,
            "entries": [{"row": 3, "col": 0, "terms": []}]});
        assert!(matches!(LaurentMatrix::from_json(&bad), Err(Error::Parse(_))));
    }

    fn poly(nv: usize) -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((prop::collection::vec(-3i32..=3, nv), -2.0f64..2.0, -2.0f64..2.0), 0..5)
            .prop_map(move |ts| LaurentPoly::from_terms(nv, ts.into_iter().map(|(e, re, im)| (e, c(re, im)))).unwrap())
    }

    fn matrix(nv: usize, r: usize, k: usize) -> impl Strategy<Value = LaurentMatrix> {
        prop::collection::vec(poly(nv), r * k).prop_map(move |es| {
            let rows = es.chunks(k).map(|ch| ch.to_vec()).collect();
            LaurentMatrix::from_rows(nv, rows).unwrap()
        })
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    proptest! {
        #[test]
        fn adjoint_is_an_involution(m in matrix(2, 2, 3)) {
            prop_assert_eq!(m.adjoint().adjoint(), m);
        }

        #[test]
        fn evaluation_is_a_homomorphism(
            a in matrix(2, 2, 3),
            b in matrix(2, 3, 2),
            t in prop::collection::vec(0.0f64..6.3, 2),
        ) {
            let pt = TorusPoint::new(t);
            let ab = a.matmul(&b).unwrap().eval_matrix(&pt).unwrap();
            let prod = a.eval_matrix(&pt).unwrap() * b.eval_matrix(&pt).unwrap();
            prop_assert!(close(&ab, &prod, 1e-12 * (1.0 + prod.norm())));
            let sum = a.add(&a).unwrap().eval_matrix(&pt).unwrap();
            prop_assert!(close(&sum, &(a.eval_matrix(&pt).unwrap() * c(2.0, 0.0)), 1e-12));
        }

        #[test]
        fn adjoint_evaluates_to_conjugate_transpose(m in matrix(1, 2, 2), t in 0.0f64..6.3) {
            let pt = TorusPoint::new(vec![t]);
            let lhs = m.adjoint().eval_matrix(&pt).unwrap();
            let rhs = m.eval_matrix(&pt).unwrap().adjoint();
            prop_assert!(close(&lhs, &rhs, 1e-12));
            let s1 = fiber_singular_values(&lhs);
            let s2 = fiber_singular_values(&m.eval_matrix(&pt).unwrap());
            prop_assert!(s1.iter().zip(&s2).all(|(a, b)| (a - b).abs() < 1e-10));
        }

        #[test]
        fn bar_is_an_involution(m in matrix(2, 2, 2)) {
            prop_assert_eq!(m.bar().bar(), m.clone());
            prop_assert_eq!(m.bar().transpose(), m.adjoint());
        }
    }
}
