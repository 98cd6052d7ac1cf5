//! Forward uniqueness experiments: coded data sets, invariance checks,
//! distinguishability probes and exhaustive enumeration oracles.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashSet;

use crate::diffraction::{
    apply_mask, coded_pattern, fourier_at, random_mask, regular_nodes, twin, DiffractionPattern, Mask2D,
};
use crate::error::{Error, Result};
use crate::object::Object3D;
use crate::schemes::Scheme;
use crate::xray::{project, Direction, Projection2D};

pub const SAME_CLASS_TOLERANCE: f64 = 1e-9;
pub const CLASS_GAP: f64 = 1e-6;
pub const DEFAULT_BUDGET: f64 = 1e7;
/// Number of fresh masks an apparent counterexample is re-checked under.
pub const RERUN_MASKS: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CodedDataSet {
    pub scheme: Scheme,
    pub mask: Mask2D,
    pub patterns: Vec<DiffractionPattern>,
    pub seed: Option<u64>,
}

impl CodedDataSet {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.patterns
            .iter()
            .zip(&other.patterns)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn check_object(f: &Object3D, mu: &Mask2D, s: &Scheme) -> Result<()> {
    s.validate()?;
    if f.n() != s.n {
        return Err(Error::SizeMismatch {
            expected: s.n,
            found: f.n(),
        });
    }
    for q in [f.p(), mu.p()] {
        if q != s.p {
            return Err(Error::SizeMismatch { expected: s.p, found: q });
        }
    }
    Ok(())
}

/// One coded pattern per scheme direction, extra direction last.
pub fn coded_data(f: &Object3D, mu: &Mask2D, s: &Scheme) -> Result<CodedDataSet> {
    check_object(f, mu, s)?;
    let patterns = s
        .directions()
        .iter()
        .map(|d| coded_pattern(&project(f, d)?, mu))
        .collect::<Result<_>>()?;
    Ok(CodedDataSet {
        scheme: s.clone(),
        mask: mu.clone(),
        patterns,
        seed: mu.seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    /// Deviation of the coded data under a global phase.
    pub global_phase: f64,
    /// Largest per-projection deviation between a projection and its twin
    /// under the plain mask.
    pub plain_twin: f64,
    /// Smallest per-projection twin deviation under `mu`; `None` when `mu`
    /// is the plain mask.
    pub masked_twin: Option<f64>,
    pub tolerance: f64,
    pub witness_threshold: f64,
}

impl InvarianceReport {
    pub fn phase_ok(&self) -> bool {
        self.global_phase <= self.tolerance
    }

    pub fn plain_twin_ok(&self) -> bool {
        self.plain_twin <= self.tolerance
    }

    pub fn masked_twin_witnessed(&self) -> Option<bool> {
        self.masked_twin.map(|d| d > self.witness_threshold)
    }
}

pub fn invariance_suite(f: &Object3D, mu: &Mask2D, s: &Scheme) -> Result<InvarianceReport> {
    let data = coded_data(f, mu, s)?;
    let rotated = coded_data(&f.scaled(Complex64::from_polar(1.0, 1.234)), mu, s)?;
    let plain = Mask2D::plain(s.p);
    let mut plain_twin: f64 = 0.0;
    let mut masked_twin = f64::INFINITY;
    for d in s.directions() {
        let g = project(f, &d)?;
        let t = twin(&g)?;
        plain_twin = plain_twin.max(coded_pattern(&g, &plain)?.max_abs_diff(&coded_pattern(&t, &plain)?));
        masked_twin = masked_twin.min(coded_pattern(&g, mu)?.max_abs_diff(&coded_pattern(&t, mu)?));
    }
    Ok(InvarianceReport {
        global_phase: data.max_abs_diff(&rotated),
        plain_twin,
        masked_twin: (!mu.is_plain()).then_some(masked_twin),
        tolerance: 1e-10,
        witness_threshold: CLASS_GAP,
    })
}

/// Largest coded-data deviation between two objects.
pub fn distinguish(f: &Object3D, g: &Object3D, mu: &Mask2D, s: &Scheme) -> Result<f64> {
    if f.n() != g.n() || f.p() != g.p() {
        return Err(Error::SizeMismatch {
            expected: f.n(),
            found: g.n(),
        });
    }
    Ok(coded_data(f, mu, s)?.max_abs_diff(&coded_data(g, mu, s)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AnomalyKind {
    /// A collision class that is not a global-phase orbit.
    NonOrbitClass,
    /// Two objects whose data distance falls between the class tolerance and
    /// the required gap.
    GapViolation,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Anomaly {
    pub kind: AnomalyKind,
    pub ids: Vec<u64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleReport {
    pub enumerated: u64,
    pub admissible: u64,
    pub classes: Vec<Vec<u64>>,
    pub phase_orbit_pure: Vec<bool>,
    pub anomalies: Vec<Anomaly>,
    /// Apparent anomalies that disappeared under at least one re-run mask.
    pub resolved_by_rerun: usize,
    pub mask_seed: Option<u64>,
    pub rerun_seeds: Vec<u64>,
}

impl OracleReport {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

/// Linear data model of an enumeration: per direction, the projection and
/// the complex Fourier samples of the masked projection as maps from the
/// support values.
struct LinearModel {
    support_len: usize,
    p: usize,
    /// `[direction][pixel][voxel]`
    projections: Vec<Vec<Complex64>>,
    /// `[direction][node][voxel]`
    fourier: Vec<Vec<Complex64>>,
    nodes: usize,
}

impl LinearModel {
    fn new(support: &[[i64; 3]], n: usize, p: usize, dirs: &[Direction], mu: &Mask2D) -> Result<Self> {
        let nodes = regular_nodes(p);
        let k = support.len();
        let mut projections = Vec::with_capacity(dirs.len());
        let mut fourier = Vec::with_capacity(dirs.len());
        for d in dirs {
            let mut proj = vec![Complex64::new(0.0, 0.0); p * p * k];
            let mut four = vec![Complex64::new(0.0, 0.0); nodes.len() * k];
            for (v, &at) in support.iter().enumerate() {
                let g = project(&Object3D::delta(n, p, at)?, d)?;
                for (s, val) in g.values().iter().enumerate() {
                    proj[s * k + v] = *val;
                }
                let masked = apply_mask(&g, mu)?;
                for (l, &w) in nodes.iter().enumerate() {
                    four[l * k + v] = fourier_at(&masked, w);
                }
            }
            projections.push(proj);
            fourier.push(four);
        }
        Ok(Self {
            support_len: k,
            p,
            projections,
            fourier,
            nodes: nodes.len(),
        })
    }

    fn apply<'a>(matrix: &'a [Complex64], x: &'a [Complex64], rows: usize) -> impl Iterator<Item = Complex64> + 'a {
        let k = x.len();
        (0..rows).map(move |r| matrix[r * k..(r + 1) * k].iter().zip(x).map(|(a, b)| a * b).sum())
    }

    fn admissible(&self, x: &[Complex64]) -> bool {
        self.projections.iter().all(|m| {
            let values: Vec<Complex64> = Self::apply(m, x, self.p * self.p).collect();
            let g = Projection2D::from_values(self.p, values).expect("sized by construction");
            !g.support_class().is_line_compatible()
        })
    }

    fn data(&self, x: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.support_len);
        self.fourier
            .iter()
            .flat_map(|m| Self::apply(m, x, self.nodes).map(|v| v.norm_sqr()))
            .collect()
    }
}

struct Enumeration<'a> {
    alphabet: &'a [Complex64],
    times_i: Vec<usize>,
    len: usize,
}

impl Enumeration<'_> {
    fn digits(&self, id: u64) -> Vec<usize> {
        let base = self.alphabet.len() as u64;
        let mut rest = id;
        (0..self.len)
            .map(|_| {
                let d = (rest % base) as usize;
                rest /= base;
                d
            })
            .collect()
    }

    fn id_of(&self, digits: &[usize]) -> u64 {
        let base = self.alphabet.len() as u64;
        digits.iter().rev().fold(0u64, |acc, &d| acc * base + d as u64)
    }

    fn values(&self, id: u64) -> Vec<Complex64> {
        self.digits(id).into_iter().map(|d| self.alphabet[d]).collect()
    }

    /// Ids of `f, i f, -f, -i f`, deduplicated and sorted.
    fn orbit(&self, id: u64) -> Vec<u64> {
        let mut digits = self.digits(id);
        let mut out = Vec::with_capacity(4);
        for _ in 0..4 {
            out.push(self.id_of(&digits));
            for d in digits.iter_mut() {
                *d = self.times_i[*d];
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn index_of(alphabet: &[Complex64], z: Complex64) -> Option<usize> {
    alphabet.iter().position(|a| (a - z).norm() <= 1e-12)
}

/// The object encoded by an oracle id.
pub fn oracle_object(id: u64, support: &[[i64; 3]], alphabet: &[Complex64], n: usize, p: usize) -> Result<Object3D> {
    let e = Enumeration {
        alphabet,
        times_i: Vec::new(),
        len: support.len(),
    };
    let mut f = Object3D::zeros(n, p)?;
    for (&at, v) in support.iter().zip(e.values(id)) {
        f.set(at, v);
    }
    Ok(f)
}

fn rerun_seed(seed: u64, k: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn scale_of(a: &[f64], b: &[f64]) -> f64 {
    a.iter().chain(b).fold(1.0, |m, v| m.max(v.abs()))
}

/// Enumerates every object on `support` with values in `alphabet`, keeps
/// those whose projections are non-line in every scheme direction, groups
/// them by coded data and checks that each group is a global-phase orbit.
pub fn exhaustive_oracle(
    support: &[[i64; 3]],
    alphabet: &[Complex64],
    mu: &Mask2D,
    s: &Scheme,
    budget: f64,
) -> Result<OracleReport> {
    s.validate()?;
    let (n, p) = (s.n, s.p);
    if mu.p() != p {
        return Err(Error::SizeMismatch { expected: p, found: mu.p() });
    }
    let needed = (alphabet.len() as f64).powi(support.len() as i32);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    if alphabet.is_empty() || index_of(alphabet, Complex64::new(0.0, 0.0)).is_none() {
        return Err(Error::InvalidSize("oracle alphabet must contain 0".into()));
    }
    let times_i: Vec<usize> = alphabet
        .iter()
        .map(|&a| index_of(alphabet, a * Complex64::i()))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidSize("oracle alphabet must be closed under multiplication by i".into()))?;
    let range = crate::grid::CenteredRange::new(n);
    let mut seen = HashSet::new();
    for at in support {
        if !at.iter().all(|&c| range.contains(c)) || !seen.insert(*at) {
            return Err(Error::InvalidSize(format!("support voxel {at:?} is outside Z_n^3 or repeated")));
        }
    }
    let dirs = s.directions();
    let model = LinearModel::new(support, n, p, &dirs, mu)?;
    let e = Enumeration {
        alphabet,
        times_i,
        len: support.len(),
    };
    let total = needed.round() as u64;

    // scalar sort key: positive weights on the data vector
    let width = dirs.len() * model.nodes;
    let weights: Vec<f64> = (0..width).map(|i| 0.5 + 0.5 * ((i as f64 * 0.618_033_988_75).fract())).collect();
    let weight_sum: f64 = weights.iter().sum();
    let mut keyed: Vec<(f64, u64)> = (0..total)
        .into_par_iter()
        .filter_map(|id| {
            let x = e.values(id);
            if !model.admissible(&x) {
                return None;
            }
            let data = model.data(&x);
            Some((data.iter().zip(&weights).map(|(d, w)| d * w).sum(), id))
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // union-find over near pairs found by sweeping the sorted keys
    let count = keyed.len();
    let data: Vec<Vec<f64>> = keyed.par_iter().map(|&(_, id)| model.data(&e.values(id))).collect();
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut gap_violations = Vec::new();
    for a in 0..count {
        for b in a + 1..count {
            let scale = scale_of(&data[a], &data[b]);
            if keyed[b].0 - keyed[a].0 > CLASS_GAP * weight_sum * scale {
                break;
            }
            let dist = distance(&data[a], &data[b]);
            if dist <= SAME_CLASS_TOLERANCE * scale {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            } else if dist < CLASS_GAP * scale {
                gap_violations.push((keyed[a].1, keyed[b].1, dist));
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<u64>> = Default::default();
    for (i, &(_, id)) in keyed.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(id);
    }
    let mut classes: Vec<Vec<u64>> = groups
        .into_values()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    classes.sort();
    let phase_orbit_pure: Vec<bool> = classes.iter().map(|c| *c == e.orbit(c[0])).collect();

    let mut suspects: Vec<Anomaly> = classes
        .iter()
        .zip(&phase_orbit_pure)
        .filter(|(_, &pure)| !pure)
        .map(|(c, _)| Anomaly {
            kind: AnomalyKind::NonOrbitClass,
            ids: c.clone(),
            distance: 0.0,
        })
        .collect();
    suspects.extend(gap_violations.into_iter().map(|(a, b, d)| Anomaly {
        kind: AnomalyKind::GapViolation,
        ids: vec![a, b],
        distance: d,
    }));

    let (anomalies, resolved_by_rerun, rerun_seeds) = match mu.seed {
        None => (suspects, 0, Vec::new()),
        Some(seed) => {
            let seeds: Vec<u64> = (1..=RERUN_MASKS).map(|k| rerun_seed(seed, k)).collect();
            let models = seeds
                .iter()
                .map(|&sd| LinearModel::new(support, n, p, &dirs, &random_mask(p, sd)))
                .collect::<Result<Vec<_>>>()?;
            let mut kept = Vec::new();
            let mut resolved = 0;
            for anomaly in suspects {
                let persists = models.iter().all(|m| still_anomalous(&anomaly, m, &e));
                if persists {
                    kept.push(anomaly);
                } else {
                    resolved += 1;
                }
            }
            (kept, resolved, seeds)
        }
    };

    Ok(OracleReport {
        enumerated: total,
        admissible: count as u64,
        classes,
        phase_orbit_pure,
        anomalies,
        resolved_by_rerun,
        mask_seed: mu.seed,
        rerun_seeds,
    })
}

/// Whether the objects of an anomaly still collide across phase orbits, or
/// still sit inside the gap, under another mask.
fn still_anomalous(anomaly: &Anomaly, model: &LinearModel, e: &Enumeration) -> bool {
    let data: Vec<Vec<f64>> = anomaly.ids.iter().map(|&id| model.data(&e.values(id))).collect();
    for a in 0..data.len() {
        for b in a + 1..data.len() {
            let scale = scale_of(&data[a], &data[b]);
            let dist = distance(&data[a], &data[b]);
            let same_orbit = e.orbit(anomaly.ids[a]).contains(&anomaly.ids[b]);
            let bad = match anomaly.kind {
                AnomalyKind::NonOrbitClass => !same_orbit && dist <= SAME_CLASS_TOLERANCE * scale,
                AnomalyKind::GapViolation => dist > SAME_CLASS_TOLERANCE * scale && dist < CLASS_GAP * scale,
            };
            if bad {
                return true;
            }
        }
    }
    false
}

/// Unit-modulus phase alphabet `{0, 1, i, -1, -i}`.
pub fn quarter_phase_alphabet() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ]
}

/// All voxels of `Z_n^3` in storage order.
pub fn full_support(n: usize) -> Vec<[i64; 3]> {
    let r = crate::grid::CenteredRange::new(n);
    r.iter()
        .flat_map(|x| r.iter().flat_map(move |y| r.iter().map(move |z| [x, y, z])))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::{random_object, ObjectKind};
    use crate::schemes::{random_scheme, tom2_scheme};
    use crate::xray::Family;

    fn tom2(n: usize, seed: u64) -> Scheme {
        tom2_scheme(&random_scheme(n, Family::Z, seed).unwrap(), (1.0, 0.3)).unwrap()
    }

    #[test]
    fn coded_data_shapes_and_zero() {
        let s = tom2(2, 1);
        let mu = random_mask(3, 2);
        let f = random_object(2, 3, &ObjectKind::ComplexGaussian, 3).unwrap();
        let d = coded_data(&f, &mu, &s).unwrap();
        assert_eq!(d.patterns.len(), 3);
        assert!(d.patterns.iter().all(|p| p.intensities.len() == 25));
        assert_eq!(d.seed, Some(2));
        let z = coded_data(&Object3D::zeros(2, 3).unwrap(), &mu, &s).unwrap();
        assert!(z.patterns.iter().all(|p| p.intensities.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn invariances_hold() {
        let s = tom2(3, 4);
        let mu = random_mask(5, 5);
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 6).unwrap();
        let r = invariance_suite(&f, &mu, &s).unwrap();
        assert!(r.phase_ok() && r.plain_twin_ok(), "{r:?}");
        assert_eq!(r.masked_twin_witnessed(), Some(true));
        assert!(invariance_suite(&f, &Mask2D::plain(5), &s).unwrap().masked_twin.is_none());
    }

    #[test]
    fn distinguish_cases() {
        let s = tom2(3, 7);
        let mu = random_mask(5, 8);
        let f = random_object(3, 5, &ObjectKind::ComplexGaussian, 9).unwrap();
        assert!(distinguish(&f, &f.scaled(Complex64::from_polar(1.0, 0.7)), &mu, &s).unwrap() <= 1e-10);
        let mut g = f.clone();
        g.set([0, 1, -1], f.get([0, 1, -1]) + 0.1);
        assert!(distinguish(&f, &g, &mu, &s).unwrap() > 1e-6);
        let plain = Mask2D::plain(5);
        assert!(distinguish(&f, &f.twin().unwrap(), &plain, &s).unwrap() <= 1e-10);
        assert!(distinguish(&f, &f.twin().unwrap(), &mu, &s).unwrap() > 1e-6);
    }

    #[test]
    fn linear_model_matches_coded_data() {
        let s = tom2(2, 3);
        let mu = random_mask(3, 11);
        let support = full_support(2);
        let alphabet = quarter_phase_alphabet();
        let model = LinearModel::new(&support, 2, 3, &s.directions(), &mu).unwrap();
        let e = Enumeration {
            alphabet: &alphabet,
            times_i: vec![0, 2, 3, 4, 1],
            len: 8,
        };
        for id in [1u64, 777, 123_456, 390_624] {
            let f = oracle_object(id, &support, &alphabet, 2, 3).unwrap();
            let direct: Vec<f64> = coded_data(&f, &mu, &s)
                .unwrap()
                .patterns
                .into_iter()
                .flat_map(|p| p.intensities)
                .collect();
            assert!(distance(&direct, &model.data(&e.values(id))) < 1e-12);
            assert_eq!(e.orbit(id).len(), 4);
            assert!(e.orbit(id).contains(&id));
        }
        assert_eq!(e.orbit(0), vec![0]);
    }

    #[test]
    fn zero_alphabet_gives_no_classes() {
        let s = tom2(2, 1);
        let r = exhaustive_oracle(&full_support(2), &[Complex64::new(0.0, 0.0)], &random_mask(3, 1), &s, 1e7).unwrap();
        assert_eq!(r.enumerated, 1);
        assert!(r.classes.is_empty() && r.anomalies.is_empty());
    }

    #[test]
    fn oracle_input_validation() {
        let s = tom2(2, 1);
        let mu = random_mask(3, 1);
        let a = quarter_phase_alphabet();
        assert!(matches!(
            exhaustive_oracle(&full_support(2), &a, &mu, &s, 1e5),
            Err(Error::BudgetExceeded { .. })
        ));
        let not_closed = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(exhaustive_oracle(&full_support(2), &not_closed, &mu, &s, 1e7).is_err());
        assert!(exhaustive_oracle(&[[5, 0, 0]], &a, &mu, &s, 1e7).is_err());
    }

    #[test]
    fn small_random_mask_oracle_is_phase_pure_and_refines() {
        let support = vec![[0, 0, 0], [-1, 0, 0], [0, -1, -1], [-1, -1, 0]];
        let a = quarter_phase_alphabet();
        let mu = random_mask(3, 42);
        let s = tom2(2, 8);
        let r = exhaustive_oracle(&support, &a, &mu, &s, 1e7).unwrap();
        assert!(r.anomalies.is_empty(), "{:?}", r.anomalies);
        assert!(r.phase_orbit_pure.iter().all(|&x| x));
        let members: usize = r.classes.iter().map(Vec::len).sum();
        assert_eq!(members as u64, r.admissible);

        // dropping the extra direction can only merge classes
        let mut fewer = s.clone();
        fewer.extra = None;
        let coarse = exhaustive_oracle(&support, &a, &mu, &fewer, 1e7).unwrap();
        assert!(coarse.admissible >= r.admissible);
        let coarse_of = |id: &u64| coarse.classes.iter().position(|c| c.contains(id)).unwrap();
        for class in &r.classes {
            let first = coarse_of(&class[0]);
            assert!(class.iter().all(|id| coarse_of(id) == first));
        }
        let touched: HashSet<usize> = r.classes.iter().flatten().map(coarse_of).collect();
        assert!(r.class_count() >= touched.len());
    }

    #[test]
    fn plain_mask_merges_twins_on_symmetric_support() {
        let support = vec![[1, 0, 0], [-1, 0, 0], [0, 1, 1], [0, -1, -1]];
        let a = quarter_phase_alphabet();
        let s = tom2(3, 2);
        let r = exhaustive_oracle(&support, &a, &Mask2D::plain(5), &s, 1e7).unwrap();
        assert!(!r.anomalies.is_empty());
        assert!(r.anomalies.iter().any(|x| x.kind == AnomalyKind::NonOrbitClass && x.ids.len() == 8));
    }
}
