//! Exact single-step propagators for a piecewise-constant generator.
//!
//! Real symmetric generators (no decay) are diagonalized; non-Hermitian ones
//! (decay widths on the diagonal) go through a Padé matrix exponential. The inhomogeneous step
//! integrates a linearly interpolated source exactly via the phi-functions of
//! the generator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Propagator data for one step of length `dt` with constant `H`.
#[derive(Clone, Debug)]
pub(crate) enum StepKernel {
    Eigen {
        vectors: DMatrix<C64>,
        values: DVector<f64>,
        dt: f64,
    },
    Dense {
        h: DMatrix<C64>,
        dt: f64,
    },
}

impl StepKernel {
    pub fn new(h: DMatrix<C64>, dt: f64, hermitian: bool) -> Self {
        if hermitian && h.iter().all(|z| z.im == 0.0) {
            let eig = SymmetricEigen::new(h.map(|z| z.re));
            StepKernel::Eigen {
                vectors: eig.eigenvectors.map(|x| C64::new(x, 0.0)),
                values: eig.eigenvalues,
                dt,
            }
        } else if hermitian {
            let eig = SymmetricEigen::new(h);
            StepKernel::Eigen {
                vectors: eig.eigenvectors,
                values: eig.eigenvalues,
                dt,
            }
        } else {
            StepKernel::Dense { h, dt }
        }
    }

    /// `exp(-i H dt) psi`.
    pub fn forward(&self, psi: &DVector<C64>) -> DVector<C64> {
        match self {
            StepKernel::Eigen {
                vectors,
                values,
                dt,
            } => {
                let mut c = vectors.ad_mul(psi);
                for (ci, &l) in c.iter_mut().zip(values.iter()) {
                    *ci *= C64::from_polar(1.0, -l * dt);
                }
                vectors * c
            }
            StepKernel::Dense { h, dt } => (h * (-I * *dt)).exp() * psi,
        }
    }

    /// `exp(+i H^dagger dt) chi`: one step backward in time with the adjoint
    /// generator.
    pub fn backward(&self, chi: &DVector<C64>) -> DVector<C64> {
        match self {
            StepKernel::Eigen {
                vectors,
                values,
                dt,
            } => {
                let mut c = vectors.ad_mul(chi);
                for (ci, &l) in c.iter_mut().zip(values.iter()) {
                    *ci *= C64::from_polar(1.0, l * dt);
                }
                vectors * c
            }
            StepKernel::Dense { h, dt } => (h.adjoint() * (I * *dt)).exp() * chi,
        }
    }

    /// One backward step of `d chi/dt = -i H^dagger chi + s(t)` from
    /// `t_{k+1}` to `t_k`, with `s` linear between `s_k` and `s_next`.
    pub fn backward_inhomogeneous(
        &self,
        chi_next: &DVector<C64>,
        s_k: &DVector<C64>,
        s_next: &DVector<C64>,
    ) -> DVector<C64> {
        match self {
            StepKernel::Eigen {
                vectors,
                values,
                dt,
            } => {
                let c = vectors.ad_mul(chi_next);
                let a = vectors.ad_mul(s_k);
                let b = vectors.ad_mul(s_next);
                let out = DVector::from_iterator(
                    c.len(),
                    (0..c.len()).map(|j| {
                        let z = I * values[j] * *dt;
                        let (p1, p2) = phi12(z);
                        z.exp() * c[j] - (a[j] * p2 + b[j] * (p1 - p2)) * *dt
                    }),
                );
                vectors * out
            }
            StepKernel::Dense { h, dt } => {
                let n = chi_next.len();
                let b = h.adjoint() * I;
                let mut m = DMatrix::<C64>::zeros(n + 2, n + 2);
                m.view_mut((0, 0), (n, n)).copy_from(&b);
                // y' = B y - s(t_{k+1} - u), u running over [0, dt]
                let slope = (s_next - s_k) / C64::new(*dt, 0.0);
                for i in 0..n {
                    m[(i, n)] = -s_next[i];
                    m[(i, n + 1)] = slope[i];
                }
                m[(n + 1, n)] = C64::new(1.0, 0.0);
                let e = (m * C64::new(*dt, 0.0)).exp();
                let mut x = DVector::zeros(n + 2);
                x.rows_mut(0, n).copy_from(chi_next);
                x[n] = C64::new(1.0, 0.0);
                (e * x).rows(0, n).into_owned()
            }
        }
    }
}

/// `phi1(z) = (e^z - 1)/z`, `phi2(z) = (e^z - 1 - z)/z^2`.
pub(crate) fn phi12(z: C64) -> (C64, C64) {
    if z.norm() < 0.1 {
        // phi_k(z) = sum_j z^j / (j + k)!
        let mut p1 = C64::new(0.0, 0.0);
        let mut p2 = C64::new(0.0, 0.0);
        let mut zj = C64::new(1.0, 0.0);
        let mut fact1 = 1.0; // (j+1)!
        let mut fact2 = 2.0; // (j+2)!
        for j in 0..14 {
            p1 += zj / fact1;
            p2 += zj / fact2;
            zj *= z;
            fact1 *= (j + 2) as f64;
            fact2 *= (j + 3) as f64;
        }
        (p1, p2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}
