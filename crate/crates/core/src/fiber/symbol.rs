use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laurent::LaurentMatrix;

/// A bounded matrix-valued function on the n-torus that can be evaluated at
/// any point. Laurent matrices are one case; `|z - z0|^ν`, constants, and
/// piecewise-constant generator maps are the others. Composite variants are
/// built through the checked constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Laurent(LaurentMatrix),
    /// Scalar `(Σ_k |z_k - exp(iθ_k)|²)^{ν/2}`; for one variable this is `|z - z0|^ν`.
    AbsPower {
        center: Vec<f64>,
        nu: f64,
    },
    Constant {
        num_vars: usize,
        value: DMatrix<Complex64>,
    },
    BlockDiag {
        num_vars: usize,
        blocks: Vec<Symbol>,
    },
    HStack(Vec<Symbol>),
    VStack(Vec<Symbol>),
    Product(Box<Symbol>, Box<Symbol>),
    Scale(Complex64, Box<Symbol>),
    /// Piecewise constant: takes `pieces[c]` on the region of points nearest
    /// to `centers[c]` (geodesic distance on the torus).
    Piecewise {
        centers: Vec<Vec<f64>>,
        pieces: Vec<DMatrix<Complex64>>,
    },
}

impl Symbol {
    pub fn abs_power(center_angle: f64, nu: f64) -> Result<Self> {
        Self::abs_power_nd(vec![center_angle], nu)
    }

    pub fn abs_power_nd(center: Vec<f64>, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("abs_power exponent must be positive, got {nu}")));
        }
        if center.is_empty() {
            return Err(Error::Domain("abs_power needs at least one variable".into()));
        }
        Ok(Symbol::AbsPower { center, nu })
    }

    pub fn constant(num_vars: usize, value: DMatrix<Complex64>) -> Self {
        Symbol::Constant { num_vars, value }
    }

    pub fn zeros(num_vars: usize, rows: usize, cols: usize) -> Self {
        Self::constant(num_vars, DMatrix::zeros(rows, cols))
    }

    pub fn identity(num_vars: usize, k: usize) -> Self {
        Self::constant(num_vars, DMatrix::identity(k, k))
    }

    pub fn block_diag(num_vars: usize, blocks: Vec<Symbol>) -> Result<Self> {
        for b in &blocks {
            check_vars(num_vars, b)?;
        }
        Ok(Symbol::BlockDiag { num_vars, blocks })
    }

    pub fn hstack(blocks: Vec<Symbol>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Domain("hstack of nothing".into()))?;
        let (rows, nv) = (first.rows(), first.num_vars());
        for b in &blocks {
            check_vars(nv, b)?;
            if b.rows() != rows {
                return Err(Error::ShapeMismatch { op: "hstack", lhs: first.shape(), rhs: b.shape() });
            }
        }
        Ok(Symbol::HStack(blocks))
    }

    pub fn vstack(blocks: Vec<Symbol>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Domain("vstack of nothing".into()))?;
        let (cols, nv) = (first.cols(), first.num_vars());
        for b in &blocks {
            check_vars(nv, b)?;
            if b.cols() != cols {
                return Err(Error::ShapeMismatch { op: "vstack", lhs: first.shape(), rhs: b.shape() });
            }
        }
        Ok(Symbol::VStack(blocks))
    }

    pub fn product(lhs: Symbol, rhs: Symbol) -> Result<Self> {
        check_vars(lhs.num_vars(), &rhs)?;
        if lhs.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch { op: "product", lhs: lhs.shape(), rhs: rhs.shape() });
        }
        Ok(Symbol::Product(Box::new(lhs), Box::new(rhs)))
    }

    pub fn scale(c: Complex64, s: Symbol) -> Self {
        Symbol::Scale(c, Box::new(s))
    }

    pub fn piecewise(centers: Vec<Vec<f64>>, pieces: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if centers.is_empty() || centers.len() != pieces.len() {
            return Err(Error::Domain("piecewise symbol needs one piece per center".into()));
        }
        let nv = centers[0].len();
        let shape = pieces[0].shape();
        if centers.iter().any(|c| c.len() != nv) || pieces.iter().any(|p| p.shape() != shape) {
            return Err(Error::Domain("piecewise symbol pieces disagree in shape".into()));
        }
        Ok(Symbol::Piecewise { centers, pieces })
    }

    pub fn num_vars(&self) -> usize {
        match self {
            Symbol::Laurent(m) => m.num_vars(),
            Symbol::AbsPower { center, .. } => center.len(),
            Symbol::Constant { num_vars, .. } | Symbol::BlockDiag { num_vars, .. } => *num_vars,
            Symbol::HStack(b) | Symbol::VStack(b) => b[0].num_vars(),
            Symbol::Product(a, _) | Symbol::Scale(_, a) => a.num_vars(),
            Symbol::Piecewise { centers, .. } => centers[0].len(),
        }
    }

    pub fn rows(&self) -> usize {
        self.shape().0
    }

    pub fn cols(&self) -> usize {
        self.shape().1
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Symbol::Laurent(m) => m.shape(),
            Symbol::AbsPower { .. } => (1, 1),
            Symbol::Constant { value, .. } => value.shape(),
            Symbol::BlockDiag { blocks, .. } => blocks.iter().fold((0, 0), |(r, c), b| (r + b.rows(), c + b.cols())),
            Symbol::HStack(b) => (b[0].rows(), b.iter().map(Symbol::cols).sum()),
            Symbol::VStack(b) => (b.iter().map(Symbol::rows).sum(), b[0].cols()),
            Symbol::Product(a, b) => (a.rows(), b.cols()),
            Symbol::Scale(_, a) => a.shape(),
            Symbol::Piecewise { pieces, .. } => pieces[0].shape(),
        }
    }

    /// True when every leaf is a Laurent matrix or a constant.
    pub fn is_laurent(&self) -> bool {
        match self {
            Symbol::Laurent(_) | Symbol::Constant { .. } => true,
            Symbol::AbsPower { .. } | Symbol::Piecewise { .. } => false,
            Symbol::BlockDiag { blocks, .. } => blocks.iter().all(Symbol::is_laurent),
            Symbol::HStack(b) | Symbol::VStack(b) => b.iter().all(Symbol::is_laurent),
            Symbol::Product(a, b) => a.is_laurent() && b.is_laurent(),
            Symbol::Scale(_, a) => a.is_laurent(),
        }
    }

    pub fn as_laurent(&self) -> Option<&LaurentMatrix> {
        match self {
            Symbol::Laurent(m) => Some(m),
            _ => None,
        }
    }

    /// Pointwise conjugate transpose. Laurent leaves use the group-ring
    /// involution so `adjoint(adjoint(s)) == s` holds structurally.
    pub fn adjoint(&self) -> Self {
        match self {
            Symbol::Laurent(m) => Symbol::Laurent(m.adjoint()),
            Symbol::AbsPower { .. } => self.clone(),
            Symbol::Constant { num_vars, value } => Symbol::Constant { num_vars: *num_vars, value: value.adjoint() },
            Symbol::BlockDiag { num_vars, blocks } => {
                Symbol::BlockDiag { num_vars: *num_vars, blocks: blocks.iter().map(Symbol::adjoint).collect() }
            }
            Symbol::HStack(b) => Symbol::VStack(b.iter().map(Symbol::adjoint).collect()),
            Symbol::VStack(b) => Symbol::HStack(b.iter().map(Symbol::adjoint).collect()),
            Symbol::Product(a, b) => Symbol::Product(Box::new(b.adjoint()), Box::new(a.adjoint())),
            Symbol::Scale(c, a) => Symbol::Scale(c.conj(), Box::new(a.adjoint())),
            Symbol::Piecewise { centers, pieces } => {
                Symbol::Piecewise { centers: centers.clone(), pieces: pieces.iter().map(|p| p.adjoint()).collect() }
            }
        }
    }

    /// Evaluates at the torus point with the given angles. The caller
    /// guarantees `angles.len() == self.num_vars()`.
    pub fn eval(&self, angles: &[f64]) -> DMatrix<Complex64> {
        match self {
            Symbol::Laurent(m) => m.eval_unchecked(angles),
            Symbol::AbsPower { center, nu } => {
                let d2: f64 = center
                    .iter()
                    .zip(angles)
                    .map(|(&c, &t)| (Complex64::from_polar(1.0, t) - Complex64::from_polar(1.0, c)).norm_sqr())
                    .sum();
                DMatrix::from_element(1, 1, Complex64::new(d2.powf(nu / 2.0), 0.0))
            }
            Symbol::Constant { value, .. } => value.clone(),
            Symbol::BlockDiag { blocks, .. } => {
                let (rows, cols) = self.shape();
                let mut out = DMatrix::zeros(rows, cols);
                let (mut r0, mut c0) = (0, 0);
                for b in blocks {
                    let v = b.eval(angles);
                    out.view_mut((r0, c0), v.shape()).copy_from(&v);
                    r0 += v.nrows();
                    c0 += v.ncols();
                }
                out
            }
            Symbol::HStack(b) => {
                let (rows, cols) = self.shape();
                let mut out = DMatrix::zeros(rows, cols);
                let mut c0 = 0;
                for s in b {
                    let v = s.eval(angles);
                    out.view_mut((0, c0), v.shape()).copy_from(&v);
                    c0 += v.ncols();
                }
                out
            }
            Symbol::VStack(b) => {
                let (rows, cols) = self.shape();
                let mut out = DMatrix::zeros(rows, cols);
                let mut r0 = 0;
                for s in b {
                    let v = s.eval(angles);
                    out.view_mut((r0, 0), v.shape()).copy_from(&v);
                    r0 += v.nrows();
                }
                out
            }
            Symbol::Product(a, b) => a.eval(angles) * b.eval(angles),
            Symbol::Scale(c, a) => a.eval(angles) * *c,
            Symbol::Piecewise { centers, pieces } => {
                let nearest = centers
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (i, torus_distance_sq(c, angles)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map_or(0, |(i, _)| i);
                pieces[nearest].clone()
            }
        }
    }
}

fn check_vars(expected: usize, s: &Symbol) -> Result<()> {
    if s.num_vars() != expected {
        return Err(Error::DimensionMismatch { expected, found: s.num_vars() });
    }
    Ok(())
}

/// Squared geodesic distance between two points of the flat torus.
pub fn torus_distance_sq(a: &[f64], b: &[f64]) -> f64 {
    use std::f64::consts::TAU;
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = (x - y).rem_euclid(TAU);
            let d = d.min(TAU - d);
            d * d
        })
        .sum()
}

impl From<LaurentMatrix> for Symbol {
    fn from(m: LaurentMatrix) -> Self {
        Symbol::Laurent(m)
    }
}
