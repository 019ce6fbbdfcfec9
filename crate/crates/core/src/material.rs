//! Pointwise material law for isotropic plate bending and the matrix-valued
//! differential-operator kernels (Curl, symCurl) shared by all assembly
//! routines.

use crate::error::{Error, Result};

/// A real 2x2 matrix, row-major. Used for moments, curvatures and gradients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }

    /// Symmetric part (A + A^T)/2.
    pub fn sym(&self) -> Mat2 {
        let off = 0.5 * (self.0[0][1] + self.0[1][0]);
        Mat2([[self.0[0][0], off], [off, self.0[1][1]]])
    }

    /// Frobenius inner product A : B.
    pub fn dot(&self, other: &Mat2) -> f64 {
        self.0[0][0] * other.0[0][0]
            + self.0[0][1] * other.0[0][1]
            + self.0[1][0] * other.0[1][0]
            + self.0[1][1] * other.0[1][1]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2([
            [s * self.0[0][0], s * self.0[0][1]],
            [s * self.0[1][0], s * self.0[1][1]],
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] + rhs.0[0][0], self.0[0][1] + rhs.0[0][1]],
            [self.0[1][0] + rhs.0[1][0], self.0[1][1] + rhs.0[1][1]],
        ])
    }
}

impl std::ops::Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] - rhs.0[0][0], self.0[0][1] - rhs.0[0][1]],
            [self.0[1][0] - rhs.0[1][0], self.0[1][1] - rhs.0[1][1]],
        ])
    }
}

/// Isotropic bending material: C N = D ((1-nu) N + nu tr(N) I).
///
/// `d` is the bending stiffness, `nu` the Poisson ratio. Invertibility of C
/// requires nu away from +-1; physically 0 <= nu < 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicMaterial {
    d: f64,
    nu: f64,
}

impl IsotropicMaterial {
    pub fn new(d: f64, nu: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::InvalidMaterial(format!("D must be positive, got {d}")));
        }
        if !(nu > -1.0 && nu < 1.0) {
            return Err(Error::InvalidMaterial(format!(
                "nu must lie in (-1, 1) for C to be invertible, got {nu}"
            )));
        }
        Ok(IsotropicMaterial { d, nu })
    }

    pub fn stiffness(&self) -> f64 {
        self.d
    }

    pub fn poisson(&self) -> f64 {
        self.nu
    }

    /// C N = D ((1-nu) N + nu tr(N) I).
    pub fn apply_c(&self, n: &Mat2) -> Mat2 {
        let t = self.d * self.nu * n.trace();
        let s = self.d * (1.0 - self.nu);
        Mat2([
            [s * n.0[0][0] + t, s * n.0[0][1]],
            [s * n.0[1][0], s * n.0[1][1] + t],
        ])
    }

    /// C^-1 M = 1/(D(1-nu)) (M - nu/(1+nu) tr(M) I); exact inverse of `apply_c`.
    pub fn apply_c_inverse(&self, m: &Mat2) -> Mat2 {
        let s = 1.0 / (self.d * (1.0 - self.nu));
        let t = s * self.nu / (1.0 + self.nu) * m.trace();
        Mat2([
            [s * m.0[0][0] - t, s * m.0[0][1]],
            [s * m.0[1][0], s * m.0[1][1] - t],
        ])
    }

    /// Scalar q in C^-1 (q I) = q * scale * I, i.e. scale = 1/(D(1+nu)).
    ///
    /// Used by the coupling and trace-mass forms, where the term
    /// (q I, N)_{C^-1} collapses to scale * q * tr(N).
    pub fn c_inverse_identity_scale(&self) -> f64 {
        1.0 / (self.d * (1.0 + self.nu))
    }

    /// Bending moment of a deflection with Hessian `hess`: M = -C hess.
    pub fn moment_from_hessian(&self, hess: &Mat2) -> Mat2 {
        self.apply_c(hess).scale(-1.0)
    }
}

/// Row-wise rotated gradient: Curl psi has rows (d psi_i / dx2, -d psi_i / dx1).
///
/// `grad[i][j]` is the partial of component i with respect to x_j.
pub fn curl_from_grad(grad: &Mat2) -> Mat2 {
    Mat2([
        [grad.0[0][1], -grad.0[0][0]],
        [grad.0[1][1], -grad.0[1][0]],
    ])
}

/// Symmetric part of the row-wise rotated gradient.
pub fn sym_curl(grad: &Mat2) -> Mat2 {
    curl_from_grad(grad).sym()
}

/// tr(symCurl psi) = d psi_1/dx2 - d psi_2/dx1, without forming the matrix.
pub fn sym_curl_trace(grad: &Mat2) -> f64 {
    grad.0[0][1] - grad.0[1][0]
}
