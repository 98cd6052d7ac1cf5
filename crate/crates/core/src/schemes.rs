//! Measurement schemes: families of projection slopes, the strong CT
//! distinctness condition, and the schemes with one extra projection along
//! a direction orthogonal to the base family's axis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{circular_distance, CenteredRange};
use crate::object::default_padding;
use crate::xray::{Direction, Family};

pub const DEFAULT_DISTINCT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    pub family: Family,
    pub slopes: Vec<(f64, f64)>,
    /// Components `(alpha_0, beta_0)` of the extra direction on the two
    /// transverse axes of `family`; its component along the family axis is 0.
    pub extra: Option<(f64, f64)>,
    pub n: usize,
    pub p: usize,
}

impl Scheme {
    pub fn new(family: Family, slopes: Vec<(f64, f64)>, n: usize) -> Result<Self> {
        let s = Self {
            family,
            slopes,
            extra: None,
            n,
            p: default_padding(n.max(1)),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.slopes.is_empty() {
            return Err(Error::InvalidSize("a scheme needs at least one slope pair".into()));
        }
        crate::object::check_padding(self.n, self.p)?;
        for &(a, b) in &self.slopes {
            Direction::new(self.family, a, b)?;
        }
        if let Some((a, b)) = self.extra {
            if a == 0.0 && b == 0.0 {
                return Err(Error::ZeroExtraDirection);
            }
        }
        Ok(())
    }

    pub fn base_directions(&self) -> Vec<Direction> {
        self.slopes
            .iter()
            .map(|&(alpha, beta)| Direction {
                family: self.family,
                alpha,
                beta,
            })
            .collect()
    }

    pub fn extra_direction(&self) -> Option<Direction> {
        self.extra.map(|e| realize_extra(self.family, e))
    }

    /// Base directions followed by the extra direction, if any.
    pub fn directions(&self) -> Vec<Direction> {
        let mut all = self.base_directions();
        all.extend(self.extra_direction());
        all
    }

    pub fn len(&self) -> usize {
        self.slopes.len() + usize::from(self.extra.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node values `alpha_l j + beta_l k` of the frequency pair `(j, k)`.
    pub fn node_values(&self, j: f64, k: f64) -> Vec<f64> {
        self.slopes.iter().map(|&(a, b)| a * j + b * k).collect()
    }
}

/// Maps the extra direction to a concrete line family.
///
/// For an x-based scheme the direction `(0, a0, b0)` keeps x constant; it is
/// a z-line with slopes `(0, a0 / b0)` when that ratio is at most one in
/// magnitude, otherwise a y-line with slopes `(0, b0 / a0)`. The y- and
/// z-based schemes follow the same pattern with the roles permuted.
pub fn realize_extra(base: Family, (a0, b0): (f64, f64)) -> Direction {
    let ratio_ok = |num: f64, den: f64| den != 0.0 && (num / den).abs() <= 1.0;
    let (family, alpha, beta) = match base {
        // (0, a0, b0)
        Family::X if ratio_ok(a0, b0) => (Family::Z, 0.0, a0 / b0),
        Family::X => (Family::Y, 0.0, b0 / a0),
        // (a0, 0, b0): z-lines have direction (alpha, beta, 1), x-lines (1, alpha, beta)
        Family::Y if ratio_ok(a0, b0) => (Family::Z, a0 / b0, 0.0),
        Family::Y => (Family::X, 0.0, b0 / a0),
        // (a0, b0, 0): x-lines (1, alpha, beta), y-lines (alpha, 1, beta)
        Family::Z if ratio_ok(b0, a0) => (Family::X, b0 / a0, 0.0),
        Family::Z => (Family::Y, a0 / b0, 0.0),
    };
    Direction {
        family,
        alpha,
        beta,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongCtReport {
    pub pass: bool,
    pub worst_pair: (i64, i64),
    pub worst_count: usize,
    pub tolerance: f64,
    pub needed: usize,
}

/// Number of values that are pairwise at least `tol` apart modulo `p`,
/// counted greedily in input order.
pub fn distinct_count(values: &[f64], p: f64, tol: f64) -> usize {
    let mut reps: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if reps.iter().all(|&r| circular_distance(r, v, p) >= tol) {
            reps.push(v);
        }
    }
    reps.len()
}

/// Checks that every nonzero frequency pair of `Z_p^2` sees at least `n`
/// distinct node values modulo `p`.
pub fn check_strong_ct(s: &Scheme, tol: f64) -> StrongCtReport {
    let r = CenteredRange::new(s.p);
    let mut worst = ((0, 0), usize::MAX);
    for j in r.iter() {
        for k in r.iter() {
            if (j, k) == (0, 0) {
                continue;
            }
            let count = distinct_count(&s.node_values(j as f64, k as f64), s.p as f64, tol);
            if count < worst.1 {
                worst = ((j, k), count);
            }
        }
    }
    StrongCtReport {
        pass: worst.1 >= s.n,
        worst_pair: worst.0,
        worst_count: worst.1,
        tolerance: tol,
        needed: s.n,
    }
}

pub(crate) fn require_strong_ct(s: &Scheme, tol: f64) -> Result<StrongCtReport> {
    let report = check_strong_ct(s, tol);
    if report.pass {
        Ok(report)
    } else {
        Err(Error::StrongCtFailure {
            j: report.worst_pair.0,
            k: report.worst_pair.1,
            count: report.worst_count,
            needed: report.needed,
        })
    }
}

/// `n` i.i.d. slope pairs uniform on the open square `(-1, 1)^2`.
pub fn random_scheme(n: usize, family: Family, seed: u64) -> Result<Scheme> {
    if n == 0 {
        return Err(Error::InvalidSize("random schemes need n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut open_unit = || loop {
        let v: f64 = rng.random_range(-1.0..1.0);
        if v > -1.0 {
            break v;
        }
    };
    let slopes = (0..n).map(|_| (open_unit(), open_unit())).collect();
    Scheme::new(family, slopes, n)
}

/// `m` directions at a common angle `arctan(gamma)` to the family axis,
/// equispaced in azimuth.
pub fn rotation_scheme(gamma: f64, m: usize, n: usize, family: Family) -> Result<Scheme> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    if m == 0 {
        return Err(Error::InvalidSize("rotation schemes need m >= 1".into()));
    }
    let slopes = (0..m)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / m as f64;
            (gamma * t.cos(), gamma * t.sin())
        })
        .collect();
    Scheme::new(family, slopes, n)
}

/// Attaches the extra orthogonal direction to a base scheme of exactly `n`
/// slope pairs satisfying the strong CT condition.
pub fn tom2_scheme(base: &Scheme, extra: (f64, f64)) -> Result<Scheme> {
    if extra == (0.0, 0.0) {
        return Err(Error::ZeroExtraDirection);
    }
    if base.slopes.len() != base.n {
        return Err(Error::InvalidSize(format!(
            "base scheme needs exactly n = {} slope pairs, has {}",
            base.n,
            base.slopes.len()
        )));
    }
    require_strong_ct(base, DEFAULT_DISTINCT_TOLERANCE)?;
    let realized = realize_extra(base.family, extra);
    realized.validate()?;
    Ok(Scheme {
        extra: Some(extra),
        ..base.clone()
    })
}
