//! The discrete 3D object: complex voxels on `Z_n^3`, zero-padded into
//! `Z_p^3`.
//!
//! Voxels are stored row-major over `(x, y, z)` with the centered offset
//! `floor(n / 2)` on every axis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::CenteredRange;

/// Smallest padded side for an object of side `n`.
pub fn default_padding(n: usize) -> usize {
    2 * n - 1
}

pub(crate) fn check_padding(n: usize, p: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSize("side length must be positive".into()));
    }
    if p < 2 * n - 1 {
        return Err(Error::InvalidSize(format!(
            "padded side {p} is smaller than 2n-1 = {}",
            2 * n - 1
        )));
    }
    if p.is_multiple_of(2) {
        return Err(Error::InvalidSize(format!("padded side {p} must be odd")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Object3D {
    n: usize,
    p: usize,
    values: Vec<Complex64>,
}

impl Object3D {
    pub fn zeros(n: usize, p: usize) -> Result<Self> {
        check_padding(n, p)?;
        Ok(Self {
            n,
            p,
            values: vec![Complex64::new(0.0, 0.0); n * n * n],
        })
    }

    pub fn from_values(n: usize, p: usize, values: Vec<Complex64>) -> Result<Self> {
        check_padding(n, p)?;
        if values.len() != n * n * n {
            return Err(Error::SizeMismatch {
                expected: n * n * n,
                found: values.len(),
            });
        }
        Ok(Self { n, p, values })
    }

    /// Builds an object from a function of centered coordinates.
    pub fn from_fn(
        n: usize,
        p: usize,
        mut f: impl FnMut(i64, i64, i64) -> Complex64,
    ) -> Result<Self> {
        let mut obj = Self::zeros(n, p)?;
        let r = obj.range();
        for (s, v) in obj.values.iter_mut().enumerate() {
            let (x, y, z) = (s / (n * n), (s / n) % n, s % n);
            *v = f(r.centered(x), r.centered(y), r.centered(z));
        }
        Ok(obj)
    }

    /// Unit impulse at the given centered voxel.
    pub fn delta(n: usize, p: usize, at: [i64; 3]) -> Result<Self> {
        let mut obj = Self::zeros(n, p)?;
        if !obj.set(at, Complex64::new(1.0, 0.0)) {
            return Err(Error::InvalidSize(format!("{at:?} is outside Z_{n}^3")));
        }
        Ok(obj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn range(&self) -> CenteredRange {
        CenteredRange::new(self.n)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    fn index(&self, [x, y, z]: [i64; 3]) -> Option<usize> {
        let r = self.range();
        Some((r.storage(x)? * self.n + r.storage(y)?) * self.n + r.storage(z)?)
    }

    /// Voxel value at centered coordinates; zero anywhere outside `Z_n^3`.
    pub fn get(&self, at: [i64; 3]) -> Complex64 {
        self.index(at)
            .map_or(Complex64::new(0.0, 0.0), |s| self.values[s])
    }

    /// Sets a voxel; returns `false` if the coordinates are outside `Z_n^3`.
    pub fn set(&mut self, at: [i64; 3], value: Complex64) -> bool {
        match self.index(at) {
            Some(s) => {
                self.values[s] = value;
                true
            }
            None => false,
        }
    }

    /// Iterates `(coordinates, value)` over all voxels in storage order.
    pub fn voxels(&self) -> impl Iterator<Item = ([i64; 3], Complex64)> + '_ {
        let n = self.n;
        let r = self.range();
        self.values.iter().enumerate().map(move |(s, &v)| {
            let at = [
                r.centered(s / (n * n)),
                r.centered((s / n) % n),
                r.centered(s % n),
            ];
            (at, v)
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            n: self.n,
            p: self.p,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a * self + b * other`; both objects must share `n` and `p`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.n != other.n || self.p != other.p {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Self {
            n: self.n,
            p: self.p,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
        })
    }

    /// The 3D conjugate inversion `conj(f(-x))`. Only closed on `Z_n^3` for
    /// odd `n`.
    pub fn twin(&self) -> Result<Self> {
        if self.n.is_multiple_of(2) {
            return Err(Error::InvalidSize(format!(
                "3D twin needs an odd side length, got {}",
                self.n
            )));
        }
        Self::from_fn(self.n, self.p, |x, y, z| self.get([-x, -y, -z]).conj())
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Centered coordinates of voxels whose modulus exceeds `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<[i64; 3]> {
        self.voxels()
            .filter(|(_, v)| v.norm() > threshold)
            .map(|(at, _)| at)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectKind {
    /// Circular complex Gaussian with unit variance per voxel.
    ComplexGaussian,
    /// Unit-modulus voxels with uniform phase.
    UnitPhases,
    /// Uniform draws from a finite list of values.
    FiniteAlphabet(Vec<Complex64>),
}

pub fn random_object(n: usize, p: usize, kind: &ObjectKind, seed: u64) -> Result<Object3D> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "random objects need n >= 2, got {n}"
        )));
    }
    if let ObjectKind::FiniteAlphabet(a) = kind {
        if a.is_empty() {
            return Err(Error::InvalidSize("empty alphabet".into()));
        }
    }
    let mut obj = Object3D::zeros(n, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in obj.values.iter_mut() {
        *v = match kind {
            ObjectKind::ComplexGaussian => {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
            ObjectKind::UnitPhases => Complex64::from_polar(1.0, rng.random_range(-PI..PI)),
            ObjectKind::FiniteAlphabet(a) => a[rng.random_range(0..a.len())],
        };
    }
    Ok(obj)
}
