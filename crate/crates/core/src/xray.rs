//! Dirichlet-kernel interpolation and the three families of discrete X-ray
//! transforms (line sums along x-, y- and z-lines).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{dirichlet_kernel, CenteredRange};
use crate::object::Object3D;
use crate::support::{classify_support, SupportClass};

/// Relative modulus below which a projection sample counts as zero when
/// extracting supports.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    X,
    Y,
    Z,
}

impl Family {
    /// Object coordinates of the sample at position `along` on the line axis
    /// and `(t1, t2)` on the transverse axes.
    pub fn embed(self, along: i64, t1: i64, t2: i64) -> [i64; 3] {
        match self {
            Family::X => [along, t1, t2],
            Family::Y => [t1, along, t2],
            Family::Z => [t1, t2, along],
        }
    }

    pub fn axis(self) -> usize {
        match self {
            Family::X => 0,
            Family::Y => 1,
            Family::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::X => "x",
            Family::Y => "y",
            Family::Z => "z",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Family::X),
            "y" => Ok(Family::Y),
            "z" => Ok(Family::Z),
            other => Err(Error::InvalidSize(format!("unknown family '{other}'"))),
        }
    }
}

/// A family of parallel lines: for `X`, `y = alpha x + c1`, `z = beta x + c2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub family: Family,
    pub alpha: f64,
    pub beta: f64,
}

impl Direction {
    pub fn new(family: Family, alpha: f64, beta: f64) -> Result<Self> {
        let d = Self {
            family,
            alpha,
            beta,
        };
        d.validate()?;
        Ok(d)
    }

    /// Axis-aligned lines of the given family.
    pub fn axis(family: Family) -> Self {
        Self {
            family,
            alpha: 0.0,
            beta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.abs() <= 1.0 && self.beta.abs() <= 1.0) {
            return Err(Error::SlopeOutOfRange {
                alpha: self.alpha.abs(),
                beta: self.beta.abs(),
            });
        }
        Ok(())
    }

    /// Maps a transverse frequency pair to the 3D frequency on the slice
    /// plane of this direction.
    pub fn slice_frequency(&self, u: f64, v: f64) -> [f64; 3] {
        let w = -self.alpha * u - self.beta * v;
        match self.family {
            Family::X => [w, u, v],
            Family::Y => [u, w, v],
            Family::Z => [u, v, w],
        }
    }
}

/// A complex 2D array on `Z_p^2`, stored row-major over `(c1, c2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    p: usize,
    values: Vec<Complex64>,
    pub provenance: Option<Direction>,
}

impl Projection2D {
    pub fn zeros(p: usize) -> Self {
        assert!(p > 0, "projection side must be positive");
        Self {
            p,
            values: vec![Complex64::new(0.0, 0.0); p * p],
            provenance: None,
        }
    }

    pub fn from_values(p: usize, values: Vec<Complex64>) -> Result<Self> {
        if p == 0 || values.len() != p * p {
            return Err(Error::SizeMismatch {
                expected: p * p,
                found: values.len(),
            });
        }
        Ok(Self {
            p,
            values,
            provenance: None,
        })
    }

    pub fn from_fn(p: usize, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let r = CenteredRange::new(p);
        let mut out = Self::zeros(p);
        for (s, v) in out.values.iter_mut().enumerate() {
            *v = f(r.centered(s / p), r.centered(s % p));
        }
        out
    }

    pub fn delta(p: usize, at: [i64; 2]) -> Self {
        Self::from_fn(p, |a, b| {
            if [a, b] == at {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn range(&self) -> CenteredRange {
        CenteredRange::new(self.p)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    fn index(&self, [a, b]: [i64; 2]) -> Option<usize> {
        let r = self.range();
        Some(r.storage(a)? * self.p + r.storage(b)?)
    }

    /// Value at centered coordinates; zero outside `Z_p^2`.
    pub fn get(&self, at: [i64; 2]) -> Complex64 {
        self.index(at)
            .map_or(Complex64::new(0.0, 0.0), |s| self.values[s])
    }

    pub fn set(&mut self, at: [i64; 2], value: Complex64) -> bool {
        match self.index(at) {
            Some(s) => {
                self.values[s] = value;
                true
            }
            None => false,
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        let r = self.range();
        let p = self.p;
        self.values
            .iter()
            .enumerate()
            .map(move |(s, &v)| ([r.centered(s / p), r.centered(s % p)], v))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            p: self.p,
            values: self.values.iter().map(|&v| v * factor).collect(),
            provenance: self.provenance,
        }
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.p != other.p {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Points whose modulus exceeds `rel_threshold * max|value|`.
    pub fn support(&self, rel_threshold: f64) -> Vec<[i64; 2]> {
        let cut = rel_threshold * self.max_abs();
        self.samples()
            .filter(|(_, v)| v.norm() > cut && v.norm() > 0.0)
            .map(|(at, _)| at)
            .collect()
    }

    pub fn support_class(&self) -> SupportClass {
        classify_support(&self.support(SUPPORT_THRESHOLD))
    }
}

/// Kernel-interpolated value of the slice `family = slice_index` at the
/// transverse point `(u, v)`.
pub fn interpolate_slice(f: &Object3D, family: Family, slice_index: i64, u: f64, v: f64) -> Complex64 {
    let r = f.range();
    if !r.contains(slice_index) {
        return Complex64::new(0.0, 0.0);
    }
    let p = f.p();
    let mut acc = Complex64::new(0.0, 0.0);
    for t1 in r.iter() {
        let w1 = dirichlet_kernel(p, u - t1 as f64);
        if w1 == 0.0 {
            continue;
        }
        for t2 in r.iter() {
            let w2 = dirichlet_kernel(p, v - t2 as f64);
            acc += f.get(family.embed(slice_index, t1, t2)) * (w1 * w2);
        }
    }
    acc
}

/// Discrete X-ray transform: line sums of the interpolated object over every
/// intercept pair in `Z_p^2`.
pub fn project(f: &Object3D, d: &Direction) -> Result<Projection2D> {
    d.validate()?;
    let (n, p) = (f.n(), f.p());
    let obj = f.range();
    let pad = CenteredRange::new(p);
    let mut out = Projection2D::zeros(p);
    // kernel tables: k1[c1][t1] = D_p(alpha i + c1 - t1)
    let mut k1 = vec![0.0; p * n];
    let mut k2 = vec![0.0; p * n];
    let mut partial = vec![Complex64::new(0.0, 0.0); n * p];
    for i in obj.iter() {
        for (sc, c) in pad.iter().enumerate() {
            for (st, t) in obj.iter().enumerate() {
                k1[sc * n + st] = dirichlet_kernel(p, d.alpha * i as f64 + (c - t) as f64);
                k2[sc * n + st] = dirichlet_kernel(p, d.beta * i as f64 + (c - t) as f64);
            }
        }
        // partial[t1][c2] = sum_t2 f(i, t1, t2) k2[c2][t2]
        for (st1, t1) in obj.iter().enumerate() {
            for sc2 in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for (st2, t2) in obj.iter().enumerate() {
                    acc += f.get(d.family.embed(i, t1, t2)) * k2[sc2 * n + st2];
                }
                partial[st1 * p + sc2] = acc;
            }
        }
        for sc1 in 0..p {
            for sc2 in 0..p {
                let mut acc = Complex64::new(0.0, 0.0);
                for st1 in 0..n {
                    acc += partial[st1 * p + sc2] * k1[sc1 * n + st1];
                }
                out.values[sc1 * p + sc2] += acc;
            }
        }
    }
    out.provenance = Some(*d);
    Ok(out)
}

/// The real `p^2 x n^3` matrix of [`project`] acting on storage-ordered
/// voxel vectors.
pub fn projection_operator(n: usize, p: usize, d: &Direction) -> Result<DMatrix<f64>> {
    d.validate()?;
    crate::object::check_padding(n, p)?;
    let obj = CenteredRange::new(n);
    let pad = CenteredRange::new(p);
    let mut m = DMatrix::zeros(p * p, n * n * n);
    for i in obj.iter() {
        for (sc1, c1) in pad.iter().enumerate() {
            for (sc2, c2) in pad.iter().enumerate() {
                for t1 in obj.iter() {
                    let w1 = dirichlet_kernel(p, d.alpha * i as f64 + (c1 - t1) as f64);
                    if w1 == 0.0 {
                        continue;
                    }
                    for t2 in obj.iter() {
                        let w2 = dirichlet_kernel(p, d.beta * i as f64 + (c2 - t2) as f64);
                        let [x, y, z] = d.family.embed(i, t1, t2);
                        let col = ((obj.storage(x).unwrap() * n) + obj.storage(y).unwrap()) * n
                            + obj.storage(z).unwrap();
                        m[(sc1 * p + sc2, col)] += w1 * w2;
                    }
                }
            }
        }
    }
    Ok(m)
}
