//! Masks, exit waves, autocorrelations and diffraction patterns.
//!
//! A diffraction pattern of `g` on `Z_p^2` is `|sum_n g(n) exp(-2 pi i n.w)|^2`
//! sampled at frequencies `w` in `[-1/2, 1/2]^2`. The regular grid
//! `Z_{2p-1}^2 / (2p-1)` carries exactly the information of the
//! autocorrelation; irregular grids within a quarter cell of it do too.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::CenteredRange;
use crate::spectral::{lu_solve_with_condition, DEFAULT_CONDITION_THRESHOLD};
use crate::xray::Projection2D;

/// Floating-point slack below zero tolerated for intensities.
pub const NEGATIVE_INTENSITY_SLACK: f64 = 1e-12;

/// Unimodular mask `exp(i phi(n))` on `Z_p^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask2D {
    p: usize,
    phases: Vec<f64>,
    /// Seed the phases were drawn from; `None` for plain or hand-built masks.
    pub seed: Option<u64>,
}

impl Mask2D {
    pub fn plain(p: usize) -> Self {
        Self {
            p,
            phases: vec![0.0; p * p],
            seed: None,
        }
    }

    pub fn from_phases(p: usize, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != p * p {
            return Err(Error::SizeMismatch {
                expected: p * p,
                found: phases.len(),
            });
        }
        Ok(Self {
            p,
            phases,
            seed: None,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_plain(&self) -> bool {
        self.phases.iter().all(|&phi| phi == 0.0)
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&phi| Complex64::from_polar(1.0, phi))
            .collect()
    }

    pub fn as_projection(&self) -> Projection2D {
        Projection2D::from_values(self.p, self.values()).expect("mask has p^2 phases")
    }
}

/// I.i.d. uniform phases on `[-pi, pi)`, deterministic per seed.
pub fn random_mask(p: usize, seed: u64) -> Mask2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = (0..p * p).map(|_| rng.random_range(-PI..PI)).collect();
    Mask2D {
        p,
        phases,
        seed: Some(seed),
    }
}

/// Pointwise product of a projection with a mask (the exit wave).
pub fn apply_mask(g: &Projection2D, mu: &Mask2D) -> Result<Projection2D> {
    if g.p() != mu.p() {
        return Err(Error::SizeMismatch {
            expected: g.p(),
            found: mu.p(),
        });
    }
    let values = g
        .values()
        .iter()
        .zip(&mu.phases)
        .map(|(&v, &phi)| v * Complex64::from_polar(1.0, phi))
        .collect();
    let mut out = Projection2D::from_values(g.p(), values)?;
    out.provenance = g.provenance;
    Ok(out)
}

/// Autocorrelation of an array on `Z_p^2`, held on `Z_{2p-1}^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation2D {
    p: usize,
    field: Projection2D,
}

impl Autocorrelation2D {
    pub fn from_field(p: usize, field: Projection2D) -> Result<Self> {
        if field.p() != 2 * p - 1 {
            return Err(Error::SizeMismatch {
                expected: 2 * p - 1,
                found: field.p(),
            });
        }
        Ok(Self { p, field })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn side(&self) -> usize {
        2 * self.p - 1
    }

    pub fn get(&self, lag: [i64; 2]) -> Complex64 {
        self.field.get(lag)
    }

    pub fn field(&self) -> &Projection2D {
        &self.field
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.field.max_abs_diff(&other.field)
    }

    /// Largest violation of `R(-n) = conj(R(n))`.
    pub fn hermitian_defect(&self) -> f64 {
        self.field
            .samples()
            .map(|([a, b], v)| (self.get([-a, -b]) - v.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// The trigonometric polynomial `sum_n R(n) exp(-2 pi i n.w)`.
    pub fn evaluate(&self, w: [f64; 2]) -> Complex64 {
        self.field
            .samples()
            .map(|([a, b], v)| v * Complex64::from_polar(1.0, -2.0 * PI * (a as f64 * w[0] + b as f64 * w[1])))
            .sum()
    }
}

pub fn autocorrelation(g: &Projection2D) -> Autocorrelation2D {
    let p = g.p();
    let lags = CenteredRange::new(2 * p - 1);
    let mut field = Projection2D::zeros(2 * p - 1);
    for a in lags.iter() {
        for b in lags.iter() {
            let r: Complex64 = g
                .samples()
                .map(|([x, y], v)| g.get([x + a, y + b]) * v.conj())
                .sum();
            field.set([a, b], r);
        }
    }
    Autocorrelation2D { p, field }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum KadecNorm {
    #[default]
    Euclidean,
    Sup,
}

impl KadecNorm {
    fn of(self, d: [f64; 2]) -> f64 {
        match self {
            KadecNorm::Euclidean => d[0].hypot(d[1]),
            KadecNorm::Sup => d[0].abs().max(d[1].abs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyGrid {
    /// `Z_{2p-1}^2 / (2p-1)`.
    Regular,
    /// One node per regular grid point, in the same storage order.
    Irregular(Vec<[f64; 2]>),
}

impl FrequencyGrid {
    pub fn nodes(&self, p: usize) -> Vec<[f64; 2]> {
        match self {
            FrequencyGrid::Regular => regular_nodes(p),
            FrequencyGrid::Irregular(nodes) => nodes.clone(),
        }
    }
}

/// The regular grid `Z_{2p-1}^2 / (2p-1)` in row-major storage order.
pub fn regular_nodes(p: usize) -> Vec<[f64; 2]> {
    let q = 2 * p - 1;
    let r = CenteredRange::new(q);
    r.iter()
        .flat_map(|j| r.iter().map(move |k| [j as f64 / q as f64, k as f64 / q as f64]))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KadecReport {
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub worst_node: usize,
    pub norm: KadecNorm,
    pub pass: bool,
}

/// Checks `|(2p-1) w_jk - (j,k)| < 1/4` for every node.
pub fn kadec_check(nodes: &[[f64; 2]], p: usize, norm: KadecNorm) -> Result<KadecReport> {
    let q = 2 * p - 1;
    if nodes.len() != q * q {
        return Err(Error::WrongNodeCount {
            expected: q * q,
            found: nodes.len(),
        });
    }
    let deviations: Vec<f64> = nodes
        .iter()
        .zip(regular_nodes(p))
        .map(|(w, r)| norm.of([q as f64 * (w[0] - r[0]), q as f64 * (w[1] - r[1])]))
        .collect();
    let (worst_node, max_deviation) = deviations
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    Ok(KadecReport {
        pass: max_deviation < 0.25,
        deviations,
        max_deviation,
        worst_node,
        norm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionPattern {
    pub p: usize,
    pub grid: FrequencyGrid,
    pub intensities: Vec<f64>,
    pub mask_seed: Option<u64>,
    pub kadec_norm: KadecNorm,
    /// Set when an irregular grid was accepted despite failing the Kadec check.
    pub forced: bool,
}

impl DiffractionPattern {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.intensities.len() != other.intensities.len() {
            return f64::INFINITY;
        }
        self.intensities
            .iter()
            .zip(&other.intensities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PatternOptions {
    pub kadec_norm: KadecNorm,
    pub force: bool,
}

/// Clamps tiny negative intensities to zero; anything below the slack is an
/// error.
pub fn validate_intensities(intensities: &mut [f64]) -> Result<()> {
    for (node, v) in intensities.iter_mut().enumerate() {
        if *v < -NEGATIVE_INTENSITY_SLACK || v.is_nan() {
            return Err(Error::NegativeIntensity { value: *v, node });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Fourier transform `sum_n g(n) exp(-2 pi i n.w)` of an array on `Z_p^2`.
pub fn fourier_at(g: &Projection2D, w: [f64; 2]) -> Complex64 {
    let r = g.range();
    let p = g.p();
    let e2: Vec<Complex64> = r
        .iter()
        .map(|b| Complex64::from_polar(1.0, -2.0 * PI * b as f64 * w[1]))
        .collect();
    r.iter()
        .enumerate()
        .map(|(sa, a)| {
            let row = &g.values()[sa * p..(sa + 1) * p];
            let inner: Complex64 = row.iter().zip(&e2).map(|(v, e)| v * e).sum();
            Complex64::from_polar(1.0, -2.0 * PI * a as f64 * w[0]) * inner
        })
        .sum()
}

pub fn diffraction_pattern(
    g: &Projection2D,
    grid: &FrequencyGrid,
    options: PatternOptions,
) -> Result<DiffractionPattern> {
    let p = g.p();
    let mut forced = false;
    if let FrequencyGrid::Irregular(nodes) = grid {
        let report = kadec_check(nodes, p, options.kadec_norm)?;
        if !report.pass {
            if !options.force {
                return Err(Error::KadecViolation {
                    max_deviation: report.max_deviation,
                    node: report.worst_node,
                });
            }
            forced = true;
        }
    }
    let mut intensities: Vec<f64> = grid
        .nodes(p)
        .iter()
        .map(|&w| fourier_at(g, w).norm_sqr())
        .collect();
    validate_intensities(&mut intensities)?;
    Ok(DiffractionPattern {
        p,
        grid: grid.clone(),
        intensities,
        mask_seed: None,
        kadec_norm: options.kadec_norm,
        forced,
    })
}

/// Coded diffraction pattern on the regular grid: the plain pattern of the
/// masked array.
pub fn coded_pattern(g: &Projection2D, mu: &Mask2D) -> Result<DiffractionPattern> {
    let mut pat = diffraction_pattern(&apply_mask(g, mu)?, &FrequencyGrid::Regular, PatternOptions::default())?;
    pat.mask_seed = mu.seed;
    Ok(pat)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredAutocorrelation {
    pub autocorrelation: Autocorrelation2D,
    /// 1-norm condition of the sampling matrix (`1` for the regular grid).
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Inverts the sampling relation between autocorrelation and pattern.
pub fn recover_autocorrelation(pat: &DiffractionPattern) -> Result<RecoveredAutocorrelation> {
    let p = pat.p;
    let q = 2 * p - 1;
    if pat.intensities.len() != q * q {
        return Err(Error::WrongNodeCount {
            expected: q * q,
            found: pat.intensities.len(),
        });
    }
    let lags = CenteredRange::new(q);
    match &pat.grid {
        FrequencyGrid::Regular => {
            // inverse q-point DFT, one axis at a time
            let qf = q as f64;
            let inv: Vec<Complex64> = lags
                .iter()
                .flat_map(|a| {
                    lags.iter()
                        .map(move |j| Complex64::from_polar(1.0, 2.0 * PI * (a * j) as f64 / qf))
                })
                .collect();
            // rows[j][b] = sum_k I(j, k) e^{2 pi i b k / q}
            let mut rows = vec![Complex64::new(0.0, 0.0); q * q];
            for sj in 0..q {
                for sb in 0..q {
                    rows[sj * q + sb] = (0..q)
                        .map(|sk| inv[sb * q + sk] * pat.intensities[sj * q + sk])
                        .sum();
                }
            }
            let mut values = vec![Complex64::new(0.0, 0.0); q * q];
            for sa in 0..q {
                for sb in 0..q {
                    let acc: Complex64 = (0..q).map(|sj| inv[sa * q + sj] * rows[sj * q + sb]).sum();
                    values[sa * q + sb] = acc / (qf * qf);
                }
            }
            let field = Projection2D::from_values(q, values)?;
            Ok(RecoveredAutocorrelation {
                autocorrelation: Autocorrelation2D { p, field },
                condition: 1.0,
                ill_conditioned: false,
            })
        }
        FrequencyGrid::Irregular(nodes) => {
            let report = kadec_check(nodes, p, pat.kadec_norm)?;
            if !report.pass && !pat.forced {
                return Err(Error::KadecViolation {
                    max_deviation: report.max_deviation,
                    node: report.worst_node,
                });
            }
            let lag_list: Vec<[i64; 2]> = lags
                .iter()
                .flat_map(|a| lags.iter().map(move |b| [a, b]))
                .collect();
            let a = DMatrix::from_fn(q * q, q * q, |row, col| {
                let w = nodes[row];
                let [la, lb] = lag_list[col];
                Complex64::from_polar(1.0, -2.0 * PI * (la as f64 * w[0] + lb as f64 * w[1]))
            });
            let rhs: Vec<Complex64> = pat.intensities.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let (x, condition) = lu_solve_with_condition(a, &rhs).ok_or(Error::SingularNodes {
                first: 0,
                second: 0,
                period: 1.0,
                distance: 0.0,
            })?;
            let field = Projection2D::from_values(q, x)?;
            Ok(RecoveredAutocorrelation {
                autocorrelation: Autocorrelation2D { p, field },
                condition,
                ill_conditioned: condition > DEFAULT_CONDITION_THRESHOLD,
            })
        }
    }
}

/// Conjugate inversion `conj(g(-n))`.
pub fn twin(g: &Projection2D) -> Result<Projection2D> {
    if g.p().is_multiple_of(2) {
        return Err(Error::EvenPadding(g.p()));
    }
    let mut out = Projection2D::from_fn(g.p(), |a, b| g.get([-a, -b]).conj());
    out.provenance = g.provenance;
    Ok(out)
}

/// `exp(i theta) h(n + shift)` with `h = twin(g)` when `twinned`, else `g`.
pub fn orbit_transform(g: &Projection2D, shift: [i64; 2], theta: f64, twinned: bool) -> Result<Projection2D> {
    let h = if twinned { twin(g)? } else { g.clone() };
    let range = h.range();
    for ([a, b], v) in h.samples() {
        if v != Complex64::new(0.0, 0.0)
            && !(range.contains(a - shift[0]) && range.contains(b - shift[1]))
        {
            return Err(Error::SupportOverflow);
        }
    }
    let phase = Complex64::from_polar(1.0, theta);
    let mut out = Projection2D::from_fn(h.p(), |a, b| phase * h.get([a + shift[0], b + shift[1]]));
    out.provenance = g.provenance;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::{random_object, ObjectKind};
    use crate::xray::{project, Direction, Family};
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_projection(p: usize, seed: u64) -> Projection2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Projection2D::from_fn(p, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    // An array supported on a small corner block so that shifts stay inside.
    fn compact_projection(p: usize, seed: u64) -> Projection2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Projection2D::from_fn(p, |a, b| {
            if a.abs() <= 1 && b.abs() <= 1 {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn masks_are_deterministic_and_unimodular() {
        assert_eq!(random_mask(5, 3), random_mask(5, 3));
        assert_ne!(random_mask(5, 3), random_mask(5, 4));
        assert!(random_mask(5, 3).values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-15));
        let big = random_mask(100, 17);
        let mean = big.phases().iter().sum::<f64>() / big.phases().len() as f64;
        assert!(mean.abs() < 0.1, "mean phase {mean}");
        assert!(big.phases().iter().all(|&phi| (-PI..PI).contains(&phi)));
    }

    #[test]
    fn masking_preserves_modulus_and_support_class() {
        let g = random_projection(5, 1);
        assert_eq!(apply_mask(&g, &Mask2D::plain(5)).unwrap(), g);
        let mu = random_mask(5, 2);
        let masked = apply_mask(&g, &mu).unwrap();
        for (a, b) in masked.values().iter().zip(g.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
        let line = Projection2D::from_fn(5, |a, b| if a == b { c(1.0, 0.5) } else { c(0.0, 0.0) });
        for h in [g, line, Projection2D::delta(5, [1, -1])] {
            assert_eq!(apply_mask(&h, &mu).unwrap().support_class(), h.support_class());
        }
        assert!(matches!(
            apply_mask(&Projection2D::zeros(3), &mu),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn autocorrelation_basics() {
        let r = autocorrelation(&Projection2D::delta(3, [0, 0]));
        assert!(r.field().max_abs_diff(&Projection2D::delta(5, [0, 0])) < 1e-15);
        let g = random_projection(5, 9);
        let r = autocorrelation(&g);
        assert!((r.get([0, 0]) - c(g.norm_sqr(), 0.0)).norm() < 1e-12);
        assert!(r.hermitian_defect() < 1e-12);
    }

    #[test]
    fn pattern_two_routes_agree() {
        let g = random_projection(4, 5);
        let pat = diffraction_pattern(&g, &FrequencyGrid::Regular, PatternOptions::default()).unwrap();
        let r = autocorrelation(&g);
        for (w, &i) in regular_nodes(4).iter().zip(&pat.intensities) {
            let via_r = r.evaluate(*w);
            assert!((via_r.re - i).abs() < 1e-10 && via_r.im.abs() < 1e-10);
        }
        let rotated = g.scaled(Complex64::from_polar(1.0, 1.234));
        let pat2 = diffraction_pattern(&rotated, &FrequencyGrid::Regular, PatternOptions::default()).unwrap();
        assert!(pat.max_abs_diff(&pat2) < 1e-12);
    }

    #[test]
    fn delta_pattern_is_flat() {
        let delta = Projection2D::delta(3, [0, 0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let nodes: Vec<[f64; 2]> = regular_nodes(3)
            .iter()
            .map(|w| [w[0] + rng.random_range(-0.03..0.03), w[1] + rng.random_range(-0.03..0.03)])
            .collect();
        for grid in [FrequencyGrid::Regular, FrequencyGrid::Irregular(nodes)] {
            let pat = diffraction_pattern(&delta, &grid, PatternOptions::default()).unwrap();
            assert!(pat.intensities.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        }
    }

    fn perturbed(p: usize, mut f: impl FnMut(usize) -> [f64; 2]) -> Vec<[f64; 2]> {
        let q = (2 * p - 1) as f64;
        regular_nodes(p)
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let d = f(i);
                [w[0] + d[0] / q, w[1] + d[1] / q]
            })
            .collect()
    }

    #[test]
    fn kadec_check_cases() {
        let p = 3;
        let exact = kadec_check(&regular_nodes(p), p, KadecNorm::Euclidean).unwrap();
        assert!(exact.pass);
        assert!(exact.max_deviation < 1e-12);

        let along_x = perturbed(p, |i| [if i % 2 == 0 { 0.2 } else { -0.2 }, 0.0]);
        assert!(kadec_check(&along_x, p, KadecNorm::Euclidean).unwrap().pass);

        // 0.2 on both components: 0.283 Euclidean, 0.2 sup
        let diagonal = perturbed(p, |_| [0.2, 0.2]);
        assert!(kadec_check(&diagonal, p, KadecNorm::Sup).unwrap().pass);
        assert!(!kadec_check(&diagonal, p, KadecNorm::Euclidean).unwrap().pass);

        let one_bad = perturbed(p, |i| if i == 7 { [0.3, 0.3] } else { [0.0, 0.0] });
        let report = kadec_check(&one_bad, p, KadecNorm::Euclidean).unwrap();
        assert!(!report.pass);
        assert_eq!(report.worst_node, 7);
        assert!((report.max_deviation - 0.3 * 2f64.sqrt()).abs() < 1e-12);

        assert!(matches!(
            kadec_check(&regular_nodes(3)[..5], 3, KadecNorm::Euclidean),
            Err(Error::WrongNodeCount { expected: 25, found: 5 })
        ));
    }

    #[test]
    fn regular_round_trip() {
        for p in [2usize, 3, 5] {
            let g = random_projection(p, p as u64);
            let pat = diffraction_pattern(&g, &FrequencyGrid::Regular, PatternOptions::default()).unwrap();
            let rec = recover_autocorrelation(&pat).unwrap();
            assert!(rec.autocorrelation.max_abs_diff(&autocorrelation(&g)) < 1e-10);
        }
        let zero = diffraction_pattern(&Projection2D::zeros(3), &FrequencyGrid::Regular, PatternOptions::default()).unwrap();
        assert_eq!(recover_autocorrelation(&zero).unwrap().autocorrelation.field().max_abs(), 0.0);
    }

    #[test]
    fn irregular_round_trip_and_rejection() {
        let p = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let nodes = perturbed(p, |_| [rng.random_range(-0.17..0.17), rng.random_range(-0.17..0.17)]);
        let g = random_projection(p, 12);
        let pat = diffraction_pattern(&g, &FrequencyGrid::Irregular(nodes), PatternOptions::default()).unwrap();
        let rec = recover_autocorrelation(&pat).unwrap();
        let err = rec.autocorrelation.max_abs_diff(&autocorrelation(&g));
        assert!(err <= 1e-8 * rec.condition, "err {err} cond {}", rec.condition);

        let bad = perturbed(p, |i| if i == 3 { [0.3, 0.3] } else { [0.0, 0.0] });
        assert!(matches!(
            diffraction_pattern(&g, &FrequencyGrid::Irregular(bad.clone()), PatternOptions::default()),
            Err(Error::KadecViolation { node: 3, .. })
        ));
        let forced = diffraction_pattern(
            &g,
            &FrequencyGrid::Irregular(bad),
            PatternOptions { force: true, ..Default::default() },
        )
        .unwrap();
        assert!(forced.forced);
    }

    #[test]
    fn negative_intensities() {
        let mut ok = vec![1.0, -5e-13, 0.0];
        validate_intensities(&mut ok).unwrap();
        assert_eq!(ok, vec![1.0, 0.0, 0.0]);
        assert!(matches!(
            validate_intensities(&mut [0.5, -1e-9]),
            Err(Error::NegativeIntensity { node: 1, .. })
        ));
    }

    #[test]
    fn twin_properties() {
        let g = random_projection(5, 31);
        assert_eq!(twin(&twin(&g).unwrap()).unwrap(), g);
        let sym = Projection2D::from_fn(5, |a, b| c((a * a + 2 * b * b) as f64, 0.0));
        assert_eq!(twin(&sym).unwrap(), sym);
        let pat = |h: &Projection2D| diffraction_pattern(h, &FrequencyGrid::Regular, PatternOptions::default()).unwrap();
        assert!(pat(&g).max_abs_diff(&pat(&twin(&g).unwrap())) < 1e-10);
        assert!(matches!(twin(&Projection2D::zeros(4)), Err(Error::EvenPadding(4))));
    }

    #[test]
    fn twin_spectrum_is_conjugate() {
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 2).unwrap();
        let g = project(&f, &Direction::new(Family::X, 0.2, 0.9).unwrap()).unwrap();
        let t = twin(&g).unwrap();
        for (eta, zeta) in [(0.0, 1.0), (1.3, -0.4), (-2.0, 2.0)] {
            let a = crate::spectral::dft2_at(&t, eta, zeta);
            let b = crate::spectral::dft2_at(&g, eta, zeta).conj();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn orbit_elements_share_patterns() {
        let g = compact_projection(7, 3);
        assert_eq!(orbit_transform(&g, [0, 0], 0.0, false).unwrap(), g);
        let pat = |h: &Projection2D| diffraction_pattern(h, &FrequencyGrid::Regular, PatternOptions::default()).unwrap();
        let base = pat(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let shift = [rng.random_range(-2..=2), rng.random_range(-2..=2)];
            let theta = rng.random_range(-PI..PI);
            let twinned = rng.random_bool(0.5);
            let h = orbit_transform(&g, shift, theta, twinned).unwrap();
            assert!(pat(&h).max_abs_diff(&base) < 1e-10);
            // the autocorrelation is an orbit invariant as well
            assert!(autocorrelation(&h).max_abs_diff(&autocorrelation(&g)) < 1e-10);
        }
        assert!(matches!(
            orbit_transform(&g, [3, 0], 0.0, false),
            Err(Error::SupportOverflow)
        ));
    }

    #[test]
    fn random_mask_breaks_twin_symmetry() {
        let mut differing = 0;
        for trial in 0..100u64 {
            let g = random_projection(5, 1000 + trial);
            let mu = random_mask(5, 2000 + trial);
            let a = coded_pattern(&g, &mu).unwrap();
            let b = coded_pattern(&twin(&g).unwrap(), &mu).unwrap();
            if a.max_abs_diff(&b) > 1e-6 {
                differing += 1;
            }
            // with a plain mask the twin is invisible
            let plain = Mask2D::plain(5);
            let a = coded_pattern(&g, &plain).unwrap();
            let b = coded_pattern(&twin(&g).unwrap(), &plain).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10);
        }
        assert_eq!(differing, 100);
    }
}
