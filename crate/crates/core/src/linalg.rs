//! Small dense linear-algebra helpers shared by the physics modules.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DMatrix<C64>,
}

/// Eigen-decomposition of a real symmetric matrix with eigenvalues sorted ascending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

pub fn hermitian_eigen(m: &DMatrix<C64>) -> HermitianEigen {
    let (values, vectors) = polished_eigen(m);
    HermitianEigen { values, vectors }
}

pub fn symmetric_eigen(m: &DMatrix<f64>) -> SymmetricEigen {
    let (values, vectors) = polished_eigen(m);
    SymmetricEigen { values, vectors }
}

/// QR eigen-decomposition followed by Jacobi sweeps on `V^dagger M V`.
///
/// nalgebra 0.33 can skip the eigenvector rotation of a 2x2 block it has
/// already deflated, which leaves an orthonormal but wrong basis when the
/// matrix is reducible. The sweeps repair such blocks and are a no-op
/// otherwise.
fn polished_eigen<T>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut v = eig.eigenvectors;
    let mut a = v.adjoint() * m * &v;
    jacobi_sweeps(&mut a, &mut v);
    let diag: Vec<f64> = (0..a.nrows()).map(|k| a[(k, k)].clone().real()).collect();
    let order = ascending_order(&diag);
    let values = order.iter().map(|&k| diag[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| v[(r, order[c])].clone());
    (values, vectors)
}

/// Cyclic Jacobi on a Hermitian `a`, accumulating rotations into the columns of `v`.
fn jacobi_sweeps<T>(a: &mut DMatrix<T>, v: &mut DMatrix<T>)
where
    T: ComplexField<RealField = f64>,
{
    let n = a.nrows();
    let scale = a.iter().fold(0.0f64, |acc, z| acc.max(z.clone().modulus()));
    let tol = 4.0 * n as f64 * f64::EPSILON * scale;
    for _ in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)].clone();
                let r = apq.clone().modulus();
                if r <= tol {
                    continue;
                }
                rotated = true;
                // Unit phase w with a_pq = r w; rotating in the basis
                // (e_p, w^* e_q) reduces to the real 2x2 case.
                let w = apq.unscale(r);
                let app = a[(p, p)].clone().real();
                let aqq = a[(q, q)].clone().real();
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns: p' = c p - s w^* q, q' = s w p + c q.
                let sw = w.clone().scale(s);
                let swc = w.conjugate().scale(s);
                for k in 0..n {
                    let akp = a[(k, p)].clone();
                    let akq = a[(k, q)].clone();
                    a[(k, p)] = akp.clone().scale(c) - swc.clone() * akq.clone();
                    a[(k, q)] = sw.clone() * akp + akq.scale(c);
                }
                for k in 0..n {
                    let apk = a[(p, k)].clone();
                    let aqk = a[(q, k)].clone();
                    a[(p, k)] = apk.clone().scale(c) - sw.clone() * aqk.clone();
                    a[(q, k)] = swc.clone() * apk + aqk.scale(c);
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for k in 0..v.nrows() {
                    let vkp = v[(k, p)].clone();
                    let vkq = v[(k, q)].clone();
                    v[(k, p)] = vkp.clone().scale(c) - swc.clone() * vkq.clone();
                    v[(k, q)] = sw.clone() * vkp + vkq.scale(c);
                }
            }
        }
        if !rotated {
            return;
        }
    }
}

/// `max |M - M^dagger|`.
pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |U^dagger U - 1|`.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

/// Multiplies every entry of `v` by the phase that makes its largest-magnitude
/// component real and positive. Near-ties resolve to the lowest index.
pub fn fix_global_phase(v: &mut DVector<C64>) {
    let max = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-8))
        .expect("non-empty vector");
    let phase = v[pivot].conj() / v[pivot].norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}
