//! Two-dimensional linear SDEs `dz = A z dt + dW`, `<dW dW^T> = D dt`.
//!
//! The exact one-step update is `z' = Phi z + xi` with `Phi = exp(A h)` and
//! `xi ~ N(0, Q)`, `Q = int_0^h exp(A s) D exp(A^T s) ds`, both taken from one
//! block matrix exponential (Van Loan), so no stationarity is assumed.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Exact discrete-time propagator for a fixed step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactStep {
    pub phi: Matrix2<f64>,
    pub q: Matrix2<f64>,
    pub(crate) chol: Matrix2<f64>,
}

impl ExactStep {
    pub fn new(a: &Matrix2<f64>, d: &Matrix2<f64>, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain("step must be positive"));
        }
        let mut block = Matrix4::zeros();
        block.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-a * h));
        block.fixed_view_mut::<2, 2>(0, 2).copy_from(&(d * h));
        block.fixed_view_mut::<2, 2>(2, 2).copy_from(&(a.transpose() * h));
        let e = block.exp();
        let f22: Matrix2<f64> = e.fixed_view::<2, 2>(2, 2).into();
        let f12: Matrix2<f64> = e.fixed_view::<2, 2>(0, 2).into();
        let phi = f22.transpose();
        let q = phi * f12;
        let q = (q + q.transpose()) * 0.5;
        if !phi.iter().chain(q.iter()).all(|v| v.is_finite()) {
            return Err(Error::Instability {
                time: h,
                hint: "propagator overflowed; reduce the step",
            });
        }
        Ok(Self {
            phi,
            q,
            chol: psd_cholesky(&q),
        })
    }

    pub fn advance<R: Rng + ?Sized>(&self, z: &Vector2<f64>, rng: &mut R) -> Vector2<f64> {
        let n = Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        self.phi * z + self.chol * n
    }
}

/// Step rule for a linear SDE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exact Gaussian transition; any step size.
    Exact,
    /// Euler–Maruyama; first order in the step.
    EulerMaruyama,
}

/// One-step propagator for a fixed step under either scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Propagator {
    Exact(ExactStep),
    Euler {
        a: Matrix2<f64>,
        chol: Matrix2<f64>,
        dt: f64,
    },
}

impl Propagator {
    pub fn new(a: &Matrix2<f64>, d: &Matrix2<f64>, dt: f64, scheme: Scheme) -> Result<Self> {
        match scheme {
            Scheme::Exact => Ok(Propagator::Exact(ExactStep::new(a, d, dt)?)),
            Scheme::EulerMaruyama => {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(Error::domain("step must be positive"));
                }
                Ok(Propagator::Euler {
                    a: *a,
                    chol: psd_cholesky(&(d * dt)),
                    dt,
                })
            }
        }
    }

    pub fn dt(&self) -> f64 {
        match self {
            Propagator::Exact(_) => f64::NAN,
            Propagator::Euler { dt, .. } => *dt,
        }
    }

    /// Advances `z` in place and returns the noise increment added
    /// (the full stochastic part for the exact scheme).
    pub fn step<R: Rng + ?Sized>(&self, z: &mut Vector2<f64>, rng: &mut R) -> Vector2<f64> {
        let n = Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        match self {
            Propagator::Exact(s) => {
                let kick = s.chol * n;
                *z = s.phi * *z + kick;
                kick
            }
            Propagator::Euler { a, chol, dt } => {
                let kick = chol * n;
                *z += a * *z * *dt + kick;
                kick
            }
        }
    }
}

/// Lower factor `L L^T = Q` of a symmetric PSD 2x2 matrix, clipping rounding negatives.
pub fn psd_cholesky(q: &Matrix2<f64>) -> Matrix2<f64> {
    let l11 = q[(0, 0)].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { q[(1, 0)] / l11 } else { 0.0 };
    let l22 = (q[(1, 1)] - l21 * l21).max(0.0).sqrt();
    Matrix2::new(l11, 0.0, l21, l22)
}

/// Solves `A S + S A^T + D = 0` through the Kronecker form.
pub fn lyapunov(a: &Matrix2<f64>, d: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let id = Matrix2::<f64>::identity();
    let k: Matrix4<f64> = id.kronecker(a) + a.kronecker(&id);
    // column-major vec
    let rhs = -Vector4::new(d[(0, 0)], d[(1, 0)], d[(0, 1)], d[(1, 1)]);
    let v = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::NoStationaryState("drift has an eigenvalue pair summing to zero"))?;
    let s = Matrix2::new(v[0], v[2], v[1], v[3]);
    Ok((s + s.transpose()) * 0.5)
}

/// True when every eigenvalue of `A` has a negative real part.
pub fn is_stable(a: &Matrix2<f64>) -> bool {
    a.trace() < 0.0 && a.determinant() > 0.0
}
