//! Direct discrete Fourier sums at arbitrary real frequencies, the Fourier
//! slice check, and nonuniform Vandermonde column inversion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{circular_distance, CenteredRange};
use crate::object::Object3D;
use crate::xray::{project, Direction, Projection2D};

pub const DEFAULT_NODE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e8;

/// `exp(-2 pi i t / p)`
pub fn twiddle(t: f64, p: f64) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * t / p)
}

/// The 3D transform `sum f(i,j,k) exp(-2 pi i (xi i + eta j + zeta k) / p)`.
pub fn dft3_at(f: &Object3D, xi: f64, eta: f64, zeta: f64) -> Complex64 {
    let p = f.p() as f64;
    let r = f.range();
    let ex: Vec<Complex64> = r.iter().map(|i| twiddle(xi * i as f64, p)).collect();
    let ey: Vec<Complex64> = r.iter().map(|j| twiddle(eta * j as f64, p)).collect();
    let ez: Vec<Complex64> = r.iter().map(|k| twiddle(zeta * k as f64, p)).collect();
    let n = f.n();
    let v = f.values();
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, wx) in ex.iter().enumerate() {
        for (b, wy) in ey.iter().enumerate() {
            let w = wx * wy;
            let row = &v[(a * n + b) * n..(a * n + b + 1) * n];
            let inner: Complex64 = row.iter().zip(&ez).map(|(f, wz)| f * wz).sum();
            acc += w * inner;
        }
    }
    acc
}

/// The 2D transform of a projection over `Z_p^2`.
pub fn dft2_at(g: &Projection2D, eta: f64, zeta: f64) -> Complex64 {
    let p = g.p() as f64;
    let r = g.range();
    let ez: Vec<Complex64> = r.iter().map(|b| twiddle(zeta * b as f64, p)).collect();
    let q = g.p();
    r.iter()
        .enumerate()
        .map(|(sa, a)| {
            let row = &g.values()[sa * q..(sa + 1) * q];
            let inner: Complex64 = row.iter().zip(&ez).map(|(v, w)| v * w).sum();
            twiddle(eta * a as f64, p) * inner
        })
        .sum()
}

/// All integer frequency pairs of `Z_p^2`.
pub fn frequency_grid(p: usize) -> Vec<[i64; 2]> {
    let r = CenteredRange::new(p);
    r.iter()
        .flat_map(|a| r.iter().map(move |b| [a, b]))
        .collect()
}

/// Largest deviation between the 2D transform of `project(f, d)` and the 3D
/// transform of `f` on the slice plane of `d`, over the given frequency
/// pairs.
pub fn fourier_slice_residual(f: &Object3D, d: &Direction, grid: &[[i64; 2]]) -> Result<f64> {
    let g = project(f, d)?;
    Ok(grid
        .iter()
        .map(|&[u, v]| {
            let [a, b, c] = d.slice_frequency(u as f64, v as f64);
            (dft2_at(&g, u as f64, v as f64) - dft3_at(f, a, b, c)).norm()
        })
        .fold(0.0, f64::max))
}

/// Samples of a trigonometric polynomial with `n` coefficients on `Z_n`,
/// taken at real nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeColumn {
    pub nodes: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub n: usize,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VandermondeSolution {
    /// Coefficients indexed by storage order of `Z_n`.
    pub coefficients: Vec<Complex64>,
    /// 1-norm condition number of the node matrix.
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// The `len(nodes) x n` matrix `exp(-2 pi i k xi_l / p)`, `k` in `Z_n`.
pub fn vandermonde_matrix(nodes: &[f64], n: usize, p: usize) -> DMatrix<Complex64> {
    let r = CenteredRange::new(n);
    DMatrix::from_fn(nodes.len(), n, |l, s| {
        twiddle(r.centered(s) as f64 * nodes[l], p as f64)
    })
}

/// Evaluates the trigonometric polynomial with the given coefficients at
/// `xi`.
pub fn evaluate_column(coefficients: &[Complex64], xi: f64, p: usize) -> Complex64 {
    let r = CenteredRange::new(coefficients.len());
    coefficients
        .iter()
        .enumerate()
        .map(|(s, c)| c * twiddle(r.centered(s) as f64 * xi, p as f64))
        .sum()
}

pub(crate) fn check_distinct(nodes: &[f64], p: usize, tol: f64) -> Result<()> {
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            let distance = circular_distance(nodes[a], nodes[b], p as f64);
            if distance < tol {
                return Err(Error::SingularNodes {
                    first: a,
                    second: b,
                    period: p as f64,
                    distance,
                });
            }
        }
    }
    Ok(())
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves a square complex system by partial-pivoting LU and reports the
/// 1-norm condition number computed from the factorization.
pub(crate) fn lu_solve_with_condition(
    a: DMatrix<Complex64>,
    rhs: &[Complex64],
) -> Option<(Vec<Complex64>, f64)> {
    let norm_a = one_norm(&a);
    let lu = a.lu();
    let inverse = lu.try_inverse()?;
    let b = nalgebra::DVector::from_column_slice(rhs);
    let x = lu.solve(&b)?;
    let condition = norm_a * one_norm(&inverse);
    Some((x.iter().copied().collect(), condition))
}

/// Recovers the `n` coefficients of a column from its first `n` samples.
pub fn solve_vandermonde_column(col: &VandermondeColumn, tol: f64) -> Result<VandermondeSolution> {
    solve_vandermonde_column_with(col, tol, DEFAULT_CONDITION_THRESHOLD)
}

pub fn solve_vandermonde_column_with(
    col: &VandermondeColumn,
    tol: f64,
    condition_threshold: f64,
) -> Result<VandermondeSolution> {
    let n = col.n;
    if n == 0 {
        return Err(Error::InvalidSize("column needs n >= 1".into()));
    }
    if col.nodes.len() < n || col.samples.len() < n {
        return Err(Error::TooFewNodes {
            needed: n,
            found: col.nodes.len().min(col.samples.len()),
        });
    }
    let nodes = &col.nodes[..n];
    check_distinct(nodes, col.p, tol)?;
    let v = vandermonde_matrix(nodes, n, col.p);
    let (coefficients, condition) =
        lu_solve_with_condition(v, &col.samples[..n]).ok_or(Error::SingularNodes {
            first: 0,
            second: 0,
            period: col.p as f64,
            distance: 0.0,
        })?;
    Ok(VandermondeSolution {
        coefficients,
        condition,
        ill_conditioned: condition > condition_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::{random_object, ObjectKind};
    use crate::xray::Family;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft3_of_delta_and_at_origin() {
        let d = Object3D::delta(3, 5, [0, 0, 0]).unwrap();
        assert!((dft3_at(&d, 0.3, -1.7, 2.2) - c(1.0, 0.0)).norm() < 1e-15);
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 1).unwrap();
        let total: Complex64 = f.values().iter().sum();
        assert!((dft3_at(&f, 0.0, 0.0, 0.0) - total).norm() < 1e-13);
    }

    #[test]
    fn dft3_is_periodic() {
        let f = random_object(4, 7, &ObjectKind::ComplexGaussian, 5).unwrap();
        for (xi, eta, zeta) in [(0.2, 1.1, -2.7), (3.3, -0.4, 0.9)] {
            let a = dft3_at(&f, xi, eta, zeta);
            for shifted in [
                dft3_at(&f, xi + 7.0, eta, zeta),
                dft3_at(&f, xi, eta - 7.0, zeta),
                dft3_at(&f, xi, eta, zeta + 14.0),
            ] {
                assert!((a - shifted).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dft2_matches_naive_sum() {
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 6).unwrap();
        let g = project(&f, &Direction::new(Family::Z, 0.1, 0.2).unwrap()).unwrap();
        for (eta, zeta) in [(0.0, 0.0), (1.0, -2.0), (0.37, 1.9)] {
            let mut naive = c(0.0, 0.0);
            for a in -2i64..=2 {
                for b in -2i64..=2 {
                    let phase = -2.0 * PI * (eta * a as f64 + zeta * b as f64) / 5.0;
                    naive += g.get([a, b]) * Complex64::from_polar(1.0, phase);
                }
            }
            assert!((dft2_at(&g, eta, zeta) - naive).norm() < 1e-12);
        }
        let delta = Projection2D::delta(5, [0, 0]);
        assert!((dft2_at(&delta, 0.7, -1.3) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((dft2_at(&g, 0.0, 0.0) - g.sum()).norm() < 1e-13);
    }

    #[test]
    fn slice_residual_of_zero_and_delta() {
        let zero = Object3D::zeros(3, 5).unwrap();
        let d = Direction::new(Family::Z, 0.3, -0.5).unwrap();
        assert_eq!(fourier_slice_residual(&zero, &d, &frequency_grid(5)).unwrap(), 0.0);
        let delta = Object3D::delta(3, 5, [0, 0, 0]).unwrap();
        assert!(fourier_slice_residual(&delta, &d, &frequency_grid(5)).unwrap() < 1e-12);
    }

    #[test]
    fn slice_residual_random() {
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 21).unwrap();
        for d in [
            Direction::new(Family::X, 0.4, -0.7).unwrap(),
            Direction::new(Family::Z, 0.3, -0.5).unwrap(),
            Direction::new(Family::Y, -1.0, 1.0).unwrap(),
        ] {
            assert!(fourier_slice_residual(&f, &d, &frequency_grid(5)).unwrap() < 1e-9);
        }
    }

    #[test]
    fn equispaced_nodes_recover_coefficients() {
        let (n, p) = (4usize, 7usize);
        let truth = vec![c(1.0, -0.5), c(0.25, 2.0), c(-1.5, 0.0), c(0.0, 0.75)];
        let nodes: Vec<f64> = (0..n).map(|l| l as f64 * p as f64 / n as f64).collect();
        let samples = nodes.iter().map(|&x| evaluate_column(&truth, x, p)).collect();
        let col = VandermondeColumn { nodes, samples, n, p };
        let sol = solve_vandermonde_column(&col, DEFAULT_NODE_TOLERANCE).unwrap();
        for (a, b) in sol.coefficients.iter().zip(&truth) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(!sol.ill_conditioned);
    }

    #[test]
    fn coincident_nodes_are_singular() {
        let col = VandermondeColumn {
            nodes: vec![0.5, 1.0, 0.5 + 7.0],
            samples: vec![c(1.0, 0.0); 3],
            n: 3,
            p: 7,
        };
        assert!(matches!(
            solve_vandermonde_column(&col, DEFAULT_NODE_TOLERANCE),
            Err(Error::SingularNodes { first: 0, second: 2, .. })
        ));
    }

    #[test]
    fn single_coefficient_column() {
        let col = VandermondeColumn {
            nodes: vec![2.3],
            samples: vec![c(0.4, -1.2)],
            n: 1,
            p: 1,
        };
        let sol = solve_vandermonde_column(&col, DEFAULT_NODE_TOLERANCE).unwrap();
        assert_eq!(sol.coefficients.len(), 1);
        assert!((sol.coefficients[0] - c(0.4, -1.2)).norm() < 1e-15);
    }

    #[test]
    fn close_nodes_flag_ill_conditioning() {
        let col = VandermondeColumn {
            nodes: vec![0.0, 1e-10, 2.0],
            samples: vec![c(1.0, 0.0); 3],
            n: 3,
            p: 5,
        };
        let sol = solve_vandermonde_column(&col, 1e-12).unwrap();
        assert!(sol.ill_conditioned);
        assert!(sol.condition > 1e8);
    }
}
