//! Exact CT reconstruction from field projections: per-frequency
//! Vandermonde recovery of the slice spectra, DC completion from the support
//! constraint, the common-projection ambiguity deduction, and null-space
//! witnesses for deficient schemes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{circular_distance, CenteredRange};
use crate::object::{check_padding, Object3D};
use crate::schemes::{require_strong_ct, Scheme};
use crate::spectral::{
    check_distinct, dft2_at, lu_solve_with_condition, vandermonde_matrix, DEFAULT_NODE_TOLERANCE,
};
use crate::support::SupportClass;
use crate::xray::{project, projection_operator, Projection2D};

/// Relative factor of the default consistency tolerance,
/// `CONSISTENCY_FACTOR * (1 + condition)`.
pub const CONSISTENCY_FACTOR: f64 = 1e-8;

/// Exhaustive node selection is used while the number of candidate subsets
/// stays below this bound; larger cases fall back to a greedy choice.
const EXHAUSTIVE_SUBSETS: usize = 5000;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnRecovery {
    pub freq_pair: (i64, i64),
    /// Indices of the projections whose nodes were used.
    pub selected: Vec<usize>,
    pub nodes: Vec<f64>,
    /// Slice spectra `c_i(j, k)`, `i` in storage order of `Z_n`.
    pub coefficients: Vec<Complex64>,
    pub condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtReconstruction {
    pub object: Object3D,
    pub columns: Vec<ColumnRecovery>,
    pub max_condition: f64,
    /// Largest outside-support residual met during DC completion.
    pub dc_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcCompletion {
    /// Slice values on `Z_n^2`, row-major.
    pub slice: Vec<Complex64>,
    pub dc: Complex64,
    pub residual: f64,
}

/// Binomial coefficient, saturating.
fn choose(m: usize, k: usize) -> usize {
    let k = k.min(m - k.min(m));
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(m - i) / (i + 1))
}

fn min_gap(nodes: &[f64], idx: &[usize], p: f64) -> f64 {
    let mut gap = f64::INFINITY;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            gap = gap.min(circular_distance(nodes[idx[a]], nodes[idx[b]], p));
        }
    }
    gap
}

/// Indices of `n` nodes maximizing the smallest pairwise circular gap.
pub fn select_nodes(nodes: &[f64], n: usize, p: usize) -> Vec<usize> {
    let m = nodes.len();
    if m <= n {
        return (0..m).collect();
    }
    let pf = p as f64;
    if choose(m, n) <= EXHAUSTIVE_SUBSETS {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let gap = min_gap(nodes, &idx, pf);
            if gap > best.0 {
                best = (gap, idx.clone());
            }
            // next combination in lexicographic order
            let Some(pos) = (0..n).rev().find(|&i| idx[i] != i + m - n) else {
                break;
            };
            idx[pos] += 1;
            for i in pos + 1..n {
                idx[i] = idx[i - 1] + 1;
            }
        }
        return best.1;
    }
    // farthest-point greedy
    let mut chosen = vec![0usize];
    while chosen.len() < n {
        let next = (0..m)
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| {
                let da = chosen.iter().map(|&c| circular_distance(nodes[a], nodes[c], pf)).fold(f64::INFINITY, f64::min);
                let db = chosen.iter().map(|&c| circular_distance(nodes[b], nodes[c], pf)).fold(f64::INFINITY, f64::min);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        chosen.push(next);
    }
    chosen.sort_unstable();
    chosen
}

/// Inverse `p`-point 2D DFT of `spectrum` with its DC entry replaced by the
/// value that makes the field vanish outside `Z_n^2` (least squares over all
/// outside points).
pub fn complete_dc_slice(spectrum: &Projection2D, n: usize, tol: f64) -> Result<DcCompletion> {
    let p = spectrum.p();
    check_padding(n, p)?;
    let pr = CenteredRange::new(p);
    let nr = CenteredRange::new(n);
    let pf = p as f64;
    // separable inverse: rows first, then columns
    let table: Vec<Complex64> = (0..p * p)
        .map(|s| {
            let (a, b) = (pr.centered(s / p), pr.centered(s % p));
            Complex64::from_polar(1.0, 2.0 * PI * (a * b) as f64 / pf)
        })
        .collect();
    let mut spec = spectrum.values().to_vec();
    spec[pr.storage(0).unwrap() * p + pr.storage(0).unwrap()] = Complex64::new(0.0, 0.0);
    // half[s_eta][s_b] = sum_zeta spec[eta][zeta] e^{2 pi i b zeta / p}
    let mut half = vec![Complex64::new(0.0, 0.0); p * p];
    for se in 0..p {
        for sb in 0..p {
            half[se * p + sb] = (0..p).map(|sz| spec[se * p + sz] * table[sb * p + sz]).sum();
        }
    }
    let scale = 1.0 / (pf * pf);
    let mut h0 = vec![Complex64::new(0.0, 0.0); p * p];
    for sa in 0..p {
        for sb in 0..p {
            h0[sa * p + sb] = (0..p).map(|se| half[se * p + sb] * table[sa * p + se]).sum::<Complex64>() * scale;
        }
    }
    let inside = |s: usize| nr.contains(pr.centered(s / p)) && nr.contains(pr.centered(s % p));
    let outside: Vec<usize> = (0..p * p).filter(|&s| !inside(s)).collect();
    let mean: Complex64 = outside.iter().map(|&s| h0[s]).sum::<Complex64>() / outside.len() as f64;
    let dc = -mean * (pf * pf);
    let residual = outside.iter().map(|&s| (h0[s] - mean).norm()).fold(0.0, f64::max);
    if residual > tol {
        return Err(Error::InconsistentSpectrum { residual, tolerance: tol });
    }
    let mut slice = Vec::with_capacity(n * n);
    for a in nr.iter() {
        for b in nr.iter() {
            let s = pr.storage(a).unwrap() * p + pr.storage(b).unwrap();
            slice.push(h0[s] - mean);
        }
    }
    Ok(DcCompletion { slice, dc, residual })
}

/// Reconstructs the object from the projections along the base slopes of
/// `s`, in slope order. Extra projections beyond the base slopes are ignored.
pub fn ct_reconstruct(projections: &[Projection2D], s: &Scheme, tol: f64) -> Result<Object3D> {
    ct_reconstruct_detailed(projections, s, tol).map(|r| r.object)
}

pub fn ct_reconstruct_detailed(projections: &[Projection2D], s: &Scheme, tol: f64) -> Result<CtReconstruction> {
    s.validate()?;
    let (n, p) = (s.n, s.p);
    let m = s.slopes.len();
    if projections.len() < m {
        return Err(Error::WrongNodeCount {
            expected: m,
            found: projections.len(),
        });
    }
    for g in &projections[..m] {
        if g.p() != p {
            return Err(Error::SizeMismatch {
                expected: p,
                found: g.p(),
            });
        }
    }
    require_strong_ct(s, tol)?;

    let pairs: Vec<(i64, i64)> = crate::spectral::frequency_grid(p)
        .into_iter()
        .map(|[a, b]| (a, b))
        .filter(|&f| f != (0, 0))
        .collect();
    let columns: Vec<ColumnRecovery> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let (jf, kf) = (j as f64, k as f64);
            let all_nodes: Vec<f64> = s.slopes.iter().map(|&(a, b)| -a * jf - b * kf).collect();
            let selected = select_nodes(&all_nodes, n, p);
            let nodes: Vec<f64> = selected.iter().map(|&l| all_nodes[l]).collect();
            check_distinct(&nodes, p, tol)?;
            let samples: Vec<Complex64> = selected.iter().map(|&l| dft2_at(&projections[l], jf, kf)).collect();
            let (coefficients, condition) = lu_solve_with_condition(vandermonde_matrix(&nodes, n, p), &samples)
                .ok_or(Error::SingularNodes {
                    first: 0,
                    second: 0,
                    period: p as f64,
                    distance: 0.0,
                })?;
            Ok(ColumnRecovery {
                freq_pair: (j, k),
                selected,
                nodes,
                coefficients,
                condition,
            })
        })
        .collect::<Result<_>>()?;

    let max_condition = columns.iter().map(|c| c.condition).fold(1.0, f64::max);
    let scale = projections[..m].iter().map(|g| g.max_abs()).fold(1.0, f64::max);
    let consistency = CONSISTENCY_FACTOR * (1.0 + max_condition) * scale;
    let pr = CenteredRange::new(p);
    let family = s.family;
    let slices: Vec<DcCompletion> = (0..n)
        .into_par_iter()
        .map(|si| {
            let mut spectrum = Projection2D::zeros(p);
            for c in &columns {
                let at = pr.storage(c.freq_pair.0).unwrap() * p + pr.storage(c.freq_pair.1).unwrap();
                spectrum.values_mut()[at] = c.coefficients[si];
            }
            complete_dc_slice(&spectrum, n, consistency)
        })
        .collect::<Result<_>>()?;

    let nr = CenteredRange::new(n);
    let mut object = Object3D::zeros(n, p)?;
    for (si, completion) in slices.iter().enumerate() {
        let i = nr.centered(si);
        for (st1, t1) in nr.iter().enumerate() {
            for (st2, t2) in nr.iter().enumerate() {
                object.set(family.embed(i, t1, t2), completion.slice[st1 * n + st2]);
            }
        }
    }
    let dc_residual = slices.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(CtReconstruction {
        object,
        columns,
        max_condition,
        dc_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AmbiguityKind {
    UniqueUpToPhase,
    CommonProjectionAmbiguity,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityWitness {
    pub common_projection: Projection2D,
    /// The object supported on the coordinate plane orthogonal to the base
    /// axis whose base projections equal the common projection.
    pub planar_object: Option<Object3D>,
    pub predicted_extra: Option<Projection2D>,
    pub measured_extra_class: SupportClass,
    /// Largest deviation of the constant-data Vandermonde solutions from a
    /// discrete delta at 0.
    pub delta_defect: f64,
    pub max_condition: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityVerdict {
    pub kind: AmbiguityKind,
    pub witness: Option<AmbiguityWitness>,
    /// Largest spectral disagreement between base projections.
    pub spectral_spread: f64,
}

/// Decides whether base projections that all coincide can come from an
/// object whose extra projection matches the measured one.
pub fn ambiguity_classify(projections: &[Projection2D], s: &Scheme, tol: f64) -> Result<AmbiguityVerdict> {
    s.validate()?;
    let extra_dir = s
        .extra_direction()
        .ok_or_else(|| Error::InvalidSize("ambiguity classification needs a scheme with an extra direction".into()))?;
    let (n, p, m) = (s.n, s.p, s.slopes.len());
    if projections.len() != m + 1 {
        return Err(Error::WrongNodeCount {
            expected: m + 1,
            found: projections.len(),
        });
    }
    if let Some(g) = projections.iter().find(|g| g.p() != p) {
        return Err(Error::SizeMismatch {
            expected: p,
            found: g.p(),
        });
    }
    let grid = crate::spectral::frequency_grid(p);
    let spectra: Vec<Vec<Complex64>> = projections[..m]
        .iter()
        .map(|g| grid.iter().map(|&[a, b]| dft2_at(g, a as f64, b as f64)).collect())
        .collect();
    let scale = spectra.iter().flatten().map(|v| v.norm()).fold(1.0, f64::max);
    let spectral_spread = spectra[1..]
        .iter()
        .flat_map(|sp| sp.iter().zip(&spectra[0]).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    if spectral_spread > tol * scale {
        return Ok(AmbiguityVerdict {
            kind: AmbiguityKind::UniqueUpToPhase,
            witness: None,
            spectral_spread,
        });
    }

    // Constant data: every column system must be solved by a delta at 0.
    require_strong_ct(s, DEFAULT_NODE_TOLERANCE)?;
    let nr = CenteredRange::new(n);
    let zero = nr.storage(0).unwrap();
    let mut delta_defect: f64 = 0.0;
    let mut max_condition: f64 = 1.0;
    for (gi, &[j, k]) in grid.iter().enumerate() {
        if (j, k) == (0, 0) {
            continue;
        }
        let (jf, kf) = (j as f64, k as f64);
        let all_nodes: Vec<f64> = s.slopes.iter().map(|&(a, b)| -a * jf - b * kf).collect();
        let nodes: Vec<f64> = select_nodes(&all_nodes, n, p).into_iter().map(|l| all_nodes[l]).collect();
        let value = spectra[0][gi];
        let (c, condition) = lu_solve_with_condition(vandermonde_matrix(&nodes, n, p), &vec![value; n]).ok_or(
            Error::SingularNodes {
                first: 0,
                second: 0,
                period: p as f64,
                distance: 0.0,
            },
        )?;
        max_condition = max_condition.max(condition);
        for (si, ci) in c.iter().enumerate() {
            let expected = if si == zero { value } else { Complex64::new(0.0, 0.0) };
            delta_defect = delta_defect.max((ci - expected).norm());
        }
    }

    let common = projections[0].clone();
    let measured_extra = &projections[m];
    let measured_extra_class = measured_extra.support_class();
    let consistency = CONSISTENCY_FACTOR * (1.0 + max_condition) * scale;
    let mut witness = AmbiguityWitness {
        common_projection: common.clone(),
        planar_object: None,
        predicted_extra: None,
        measured_extra_class,
        delta_defect,
        max_condition,
        reason: String::new(),
    };
    if delta_defect > consistency {
        witness.reason = format!("constant-data solutions deviate from a delta by {delta_defect:.3e}");
        return Ok(inconsistent(witness, spectral_spread));
    }
    // Only the slice through the origin survives; its spectrum is the common one.
    let common_spectrum = Projection2D::from_values(p, spectra[0].clone())?;
    let planar = match complete_dc_slice(&common_spectrum, n, consistency) {
        Ok(c) => c,
        Err(Error::InconsistentSpectrum { residual, .. }) => {
            witness.reason = format!("common projection is not supported in the object window (residual {residual:.3e})");
            return Ok(inconsistent(witness, spectral_spread));
        }
        Err(e) => return Err(e),
    };
    let mut object = Object3D::zeros(n, p)?;
    for (st1, t1) in nr.iter().enumerate() {
        for (st2, t2) in nr.iter().enumerate() {
            object.set(s.family.embed(0, t1, t2), planar.slice[st1 * n + st2]);
        }
    }
    let predicted = project(&object, &extra_dir)?;
    let extra_gap = predicted.max_abs_diff(measured_extra);
    witness.planar_object = Some(object);
    witness.predicted_extra = Some(predicted);
    if !measured_extra_class.is_line_compatible() {
        witness.reason = format!(
            "a planar object has a line-supported extra projection, the measured one is {measured_extra_class:?}"
        );
        return Ok(inconsistent(witness, spectral_spread));
    }
    if extra_gap > consistency {
        witness.reason = format!("extra projection differs from the planar prediction by {extra_gap:.3e}");
        return Ok(inconsistent(witness, spectral_spread));
    }
    witness.reason = format!("planar object explains all data; extra projection is {measured_extra_class:?}");
    Ok(AmbiguityVerdict {
        kind: AmbiguityKind::CommonProjectionAmbiguity,
        witness: Some(witness),
        spectral_spread,
    })
}

fn inconsistent(witness: AmbiguityWitness, spectral_spread: f64) -> AmbiguityVerdict {
    AmbiguityVerdict {
        kind: AmbiguityKind::Inconsistent,
        witness: Some(witness),
        spectral_spread,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessityWitness {
    pub first: Object3D,
    pub second: Object3D,
    pub difference_norm: f64,
    /// Largest projection difference over all scheme directions.
    pub projection_difference: f64,
    pub sigma_min: f64,
}

/// Two objects with identical projections in every direction of `s`, built
/// from a null vector of the stacked projection operator. `base` supplies
/// the first object; the second differs from it by a unit-norm null vector.
pub fn necessity_witness(s: &Scheme, base: &Object3D, tol: f64) -> Result<NecessityWitness> {
    s.validate()?;
    let (n, p) = (s.n, s.p);
    if base.n() != n || base.p() != p {
        return Err(Error::SizeMismatch {
            expected: n,
            found: base.n(),
        });
    }
    let dirs = s.directions();
    let cols = n * n * n;
    let rows = (dirs.len() * p * p).max(cols);
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    for (l, d) in dirs.iter().enumerate() {
        let op = projection_operator(n, p, d)?;
        a.view_mut((l * p * p, 0), (p * p, cols)).copy_from(&op);
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (imin, sigma_min) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    if sigma_min > tol {
        return Err(Error::NoWitness { sigma_min });
    }
    let null: Vec<Complex64> = v_t.row(imin).iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let h = Object3D::from_values(n, p, null)?;
    let second = base.combine(Complex64::new(1.0, 0.0), &h, Complex64::new(1.0, 0.0))?;
    let mut projection_difference: f64 = 0.0;
    for d in &dirs {
        projection_difference = projection_difference.max(project(base, d)?.max_abs_diff(&project(&second, d)?));
    }
    Ok(NecessityWitness {
        difference_norm: h.norm(),
        first: base.clone(),
        second,
        projection_difference,
        sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::{random_object, ObjectKind};
    use crate::schemes::{check_strong_ct, random_scheme, tom2_scheme, DEFAULT_DISTINCT_TOLERANCE};
    use crate::xray::Family;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn projections(f: &Object3D, s: &Scheme) -> Vec<Projection2D> {
        s.directions().iter().map(|d| project(f, d).unwrap()).collect()
    }

    fn spectrum_of(p: usize, n: usize, slice: &[Complex64]) -> Projection2D {
        let nr = CenteredRange::new(n);
        let field = Projection2D::from_fn(p, |a, b| match (nr.storage(a), nr.storage(b)) {
            (Some(sa), Some(sb)) => slice[sa * n + sb],
            _ => c(0.0, 0.0),
        });
        Projection2D::from_fn(p, |e, z| dft2_at(&field, e as f64, z as f64))
    }

    #[test]
    fn dc_completion_round_trip() {
        let (n, p) = (4, 7);
        let f = random_object(n, p, &ObjectKind::ComplexGaussian, 3).unwrap();
        let slice: Vec<Complex64> = f.values()[..n * n].to_vec();
        let mut spec = spectrum_of(p, n, &slice);
        let true_dc = spec.get([0, 0]);
        spec.set([0, 0], c(123.0, -4.0));
        let done = complete_dc_slice(&spec, n, 1e-10).unwrap();
        assert!((done.dc - true_dc).norm() < 1e-10);
        for (a, b) in done.slice.iter().zip(&slice) {
            assert!((a - b).norm() < 1e-10);
        }
        let zero = complete_dc_slice(&Projection2D::zeros(p), n, 1e-12).unwrap();
        assert!(zero.slice.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn dc_completion_rejects_constant_field() {
        let p = 5;
        let constant = Projection2D::from_fn(p, |_, _| c(1.0, 0.0));
        let spec = Projection2D::from_fn(p, |e, z| dft2_at(&constant, e as f64, z as f64));
        assert!(complete_dc_slice(&spec, 3, 1e-10).unwrap().slice.iter().all(|v| v.norm() < 1e-12));
        let mut bumped = spec.clone();
        bumped.set([1, 0], c(1.0, 0.0));
        assert!(matches!(
            complete_dc_slice(&bumped, 3, 1e-10),
            Err(Error::InconsistentSpectrum { .. })
        ));
    }

    #[test]
    fn delta_reconstructs_exactly() {
        let s = random_scheme(3, Family::Z, 9).unwrap();
        let f = Object3D::delta(3, 5, [0, 0, 0]).unwrap();
        let g = ct_reconstruct(&projections(&f, &s), &s, DEFAULT_DISTINCT_TOLERANCE).unwrap();
        assert!(g.max_abs_diff(&f) <= 1e-9);
    }

    #[test]
    fn random_objects_reconstruct_in_every_family() {
        for (seed, family) in [(1, Family::X), (2, Family::Y), (3, Family::Z)] {
            for n in 2..=4 {
                let p = 2 * n - 1;
                let s = random_scheme(n, family, seed * 10 + n as u64).unwrap();
                let f = random_object(n, p, &ObjectKind::ComplexGaussian, seed).unwrap();
                let r = ct_reconstruct_detailed(&projections(&f, &s), &s, DEFAULT_DISTINCT_TOLERANCE).unwrap();
                let tol = 1e-8 * f64::max(1.0, r.max_condition / 1e6);
                assert!(r.object.max_abs_diff(&f) <= tol, "n {n} {family}: {}", r.object.max_abs_diff(&f));
                let phase = Complex64::from_polar(1.0, 0.9);
                let rotated: Vec<_> = projections(&f, &s).iter().map(|g| g.scaled(phase)).collect();
                let h = ct_reconstruct(&rotated, &s, DEFAULT_DISTINCT_TOLERANCE).unwrap();
                assert!(h.max_abs_diff(&f.scaled(phase)) <= tol);
            }
        }
    }

    #[test]
    fn surplus_directions_use_best_nodes() {
        let (n, p) = (3, 5);
        let mut s = random_scheme(n, Family::X, 4).unwrap();
        s.slopes.push(s.slopes[0]);
        s.slopes.push((0.11, -0.73));
        let f = random_object(n, p, &ObjectKind::UnitPhases, 6).unwrap();
        let r = ct_reconstruct_detailed(&projections(&f, &s), &s, DEFAULT_DISTINCT_TOLERANCE).unwrap();
        assert!(r.object.max_abs_diff(&f) <= 1e-8 * f64::max(1.0, r.max_condition / 1e6));
        assert!(r.columns.iter().all(|c| c.selected.len() == n));
    }

    #[test]
    fn node_selection_prefers_separation() {
        assert_eq!(select_nodes(&[0.0, 0.01, 2.0, 4.0], 3, 5), vec![1, 2, 3]);
        let many: Vec<f64> = (0..30).map(|i| i as f64 * 0.37).collect();
        let pick = select_nodes(&many, 8, 11);
        assert_eq!(pick.len(), 8);
        assert!(min_gap(&many, &pick, 11.0) > 0.3);
    }

    #[test]
    fn failing_scheme_is_rejected_before_solving() {
        let s = Scheme::new(Family::Z, vec![(0.0, 0.0); 2], 2).unwrap();
        let g = vec![Projection2D::zeros(3); 2];
        assert!(matches!(
            ct_reconstruct(&g, &s, DEFAULT_DISTINCT_TOLERANCE),
            Err(Error::StrongCtFailure { .. })
        ));
    }

    #[test]
    fn generic_object_is_unique_up_to_phase() {
        let base = random_scheme(3, Family::X, 12).unwrap();
        let s = tom2_scheme(&base, (0.4, 1.0)).unwrap();
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 13).unwrap();
        let v = ambiguity_classify(&projections(&f, &s), &s, 1e-9).unwrap();
        assert_eq!(v.kind, AmbiguityKind::UniqueUpToPhase);
        assert!(v.spectral_spread > 1e-3);
    }

    #[test]
    fn delta_is_a_common_projection_ambiguity() {
        let base = random_scheme(3, Family::Z, 5).unwrap();
        let s = tom2_scheme(&base, (1.0, 0.5)).unwrap();
        let f = Object3D::delta(3, 5, [0, 0, 0]).unwrap();
        let v = ambiguity_classify(&projections(&f, &s), &s, 1e-9).unwrap();
        assert_eq!(v.kind, AmbiguityKind::CommonProjectionAmbiguity, "{:?}", v.witness.as_ref().map(|w| &w.reason));
        let w = v.witness.unwrap();
        assert_eq!(w.measured_extra_class, SupportClass::Point);
        assert!(w.delta_defect < 1e-10);
        assert!(w.planar_object.unwrap().max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn hand_built_common_data_is_refuted() {
        let (n, p) = (3, 5);
        let base = random_scheme(n, Family::Y, 21).unwrap();
        let s = tom2_scheme(&base, (0.0, 1.0)).unwrap();
        let slice = random_object(n, p, &ObjectKind::ComplexGaussian, 22).unwrap();
        let nr = CenteredRange::new(n);
        let common = Projection2D::from_fn(p, |a, b| {
            if nr.contains(a) && nr.contains(b) {
                slice.get([a, b, 0])
            } else {
                c(0.0, 0.0)
            }
        });
        assert_eq!(common.support_class(), SupportClass::Spread2D);
        let mut data = vec![common.clone(); n + 1];
        let v = ambiguity_classify(&data, &s, 1e-9).unwrap();
        assert_eq!(v.kind, AmbiguityKind::Inconsistent, "{:?}", v.witness.as_ref().map(|w| &w.reason));
        let w = v.witness.unwrap();
        assert!(w.delta_defect < 1e-9);
        assert!(w.predicted_extra.unwrap().support_class().is_line_compatible());

        // the planar prediction itself is accepted
        let planar = w.planar_object.unwrap();
        data[n] = project(&planar, &s.extra_direction().unwrap()).unwrap();
        let v = ambiguity_classify(&data, &s, 1e-9).unwrap();
        assert_eq!(v.kind, AmbiguityKind::CommonProjectionAmbiguity);
    }

    #[test]
    fn ambiguity_needs_extra_direction() {
        let s = random_scheme(2, Family::X, 1).unwrap();
        assert!(ambiguity_classify(&vec![Projection2D::zeros(3); 3], &s, 1e-9).is_err());
    }

    #[test]
    fn collapsed_schemes_have_null_vectors() {
        let n = 3;
        let s = Scheme::new(Family::X, vec![(0.3, -0.6); n], n).unwrap();
        assert!(!check_strong_ct(&s, DEFAULT_DISTINCT_TOLERANCE).pass);
        let f = random_object(n, 5, &ObjectKind::ComplexGaussian, 2).unwrap();
        let w = necessity_witness(&s, &f, 1e-10).unwrap();
        assert!((w.difference_norm - 1.0).abs() < 1e-12);
        assert!(w.projection_difference <= 1e-10);

        let axis = Scheme::new(Family::Z, vec![(0.0, 0.0); 2], 2).unwrap();
        let f = random_object(2, 3, &ObjectKind::ComplexGaussian, 2).unwrap();
        assert!(necessity_witness(&axis, &f, 1e-10).unwrap().projection_difference <= 1e-10);
    }

    #[test]
    fn valid_schemes_have_no_null_vectors() {
        let s = random_scheme(2, Family::X, 3).unwrap();
        let f = random_object(2, 3, &ObjectKind::ComplexGaussian, 2).unwrap();
        assert!(matches!(necessity_witness(&s, &f, 1e-10), Err(Error::NoWitness { .. })));
    }
}
