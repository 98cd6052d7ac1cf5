//! Centered index sets and the periodic Dirichlet kernel.
//!
//! A side length `n` indexes the centered range `[-n/2, n/2 - 1]` for even
//! `n` and `[-(n-1)/2, (n-1)/2]` for odd `n`. Storage index is always
//! `centered + floor(n/2)`.

use std::f64::consts::PI;

/// Snap distance used to decide that a kernel argument is an integer.
pub const INTEGER_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CenteredRange {
    n: usize,
}

impl CenteredRange {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "centered range needs a positive side length");
        Self { n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offset(&self) -> i64 {
        (self.n / 2) as i64
    }

    pub fn min(&self) -> i64 {
        -self.offset()
    }

    pub fn max(&self) -> i64 {
        self.n as i64 - 1 - self.offset()
    }

    pub fn contains(&self, i: i64) -> bool {
        i >= self.min() && i <= self.max()
    }

    /// Storage index of a centered index, `None` when out of range.
    pub fn storage(&self, i: i64) -> Option<usize> {
        self.contains(i).then(|| (i + self.offset()) as usize)
    }

    pub fn centered(&self, s: usize) -> i64 {
        debug_assert!(s < self.n);
        s as i64 - self.offset()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + Clone {
        self.min()..=self.max()
    }
}

/// Residue of `t` in `[-p/2, p/2)`, i.e. the signed circular offset.
pub fn wrap_centered(t: f64, p: f64) -> f64 {
    let r = t.rem_euclid(p);
    if r >= p / 2.0 {
        r - p
    } else {
        r
    }
}

/// Circular distance between two reals modulo `p`.
pub fn circular_distance(a: f64, b: f64, p: f64) -> f64 {
    let d = (a - b).rem_euclid(p);
    d.min(p - d)
}

/// The `p`-periodic Dirichlet kernel `sin(pi t) / (p sin(pi t / p))`, equal to
/// one at multiples of `p`.
///
/// Integer arguments that are not multiples of `p` return exactly zero, so
/// `[D_p(i - j)]` over `i, j` in `Z_p` is the identity matrix bit for bit.
pub fn dirichlet_kernel(p: usize, t: f64) -> f64 {
    assert!(p >= 1, "Dirichlet kernel period must be positive");
    let pf = p as f64;
    let r = wrap_centered(t, pf);
    if r.abs() < INTEGER_SNAP {
        return 1.0;
    }
    if (r - r.round()).abs() < INTEGER_SNAP {
        return 0.0;
    }
    // For odd p the closed form is exactly p-periodic, so evaluating at the
    // wrapped argument only improves accuracy. Even p is antiperiodic and is
    // evaluated as written.
    let x = if p % 2 == 1 { r } else { t };
    (PI * x).sin() / (pf * (PI * x / pf).sin())
}
