//! Command-line driver for the tomophase experiments.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tomophase::ct_recon::{ambiguity_classify, ct_reconstruct_detailed, AmbiguityKind};
use tomophase::diffraction::{
    apply_mask, diffraction_pattern, random_mask, recover_autocorrelation, regular_nodes, DiffractionPattern,
    FrequencyGrid, Mask2D, PatternOptions,
};
use tomophase::io::{Codec, Report};
use tomophase::physics::{born_rytov_consistency, fresnel_validity, intensity_decomposition, DEFAULT_FRESNEL_THRESHOLD};
use tomophase::schemes::{check_strong_ct, random_scheme, rotation_scheme, tom2_scheme, Scheme};
use tomophase::spectral::{fourier_slice_residual, frequency_grid};
use tomophase::uniqueness::{exhaustive_oracle, invariance_suite, DEFAULT_BUDGET};
use tomophase::{project, random_object, Direction, Error, Family, Object3D, ObjectKind, Projection2D};

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "tomophase", version, about = "Discrete tomography and coded diffraction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random object on Z_n^3 padded to Z_p^3.
    GenObject {
        #[arg(long)]
        n: usize,
        /// Padding period; defaults to 2n-1.
        #[arg(long)]
        p: Option<usize>,
        /// gaussian, unit-phases or quarter-phases
        #[arg(long, default_value = "gaussian")]
        kind: String,
        #[arg(long, env = "TOMOPHASE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a random phase mask, or the plain mask.
    GenMask {
        #[arg(long)]
        p: usize,
        #[arg(long, env = "TOMOPHASE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        plain: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a measurement scheme.
    GenScheme {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "z")]
        family: Family,
        #[arg(long, env = "TOMOPHASE_SEED", default_value_t = 0)]
        seed: u64,
        /// Equiangular scheme `gamma,m` instead of random slopes.
        #[arg(long, value_parser = parse_rotation)]
        rotation: Option<(f64, usize)>,
        /// Extra orthogonal direction `a0,b0`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        extra: Option<(f64, f64)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the strong CT distinctness condition of a scheme.
    CheckScheme {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Project an object along every direction of a scheme.
    Project {
        #[arg(long)]
        object: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Coded diffraction patterns of every projection in a directory.
    Diffract {
        #[arg(long)]
        projections_dir: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        /// `regular` or `irregular:<file>` with one `w1 w2` node per line.
        #[arg(long, default_value = "regular")]
        grid: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Recover the autocorrelation from a diffraction pattern.
    RecoverAutocorr {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the Fourier slice theorem for every scheme direction.
    VerifySlice {
        #[arg(long)]
        object: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Reconstruct an object from field projections.
    Reconstruct {
        #[arg(long)]
        projections_dir: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Object to measure the reconstruction error against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Classify common-projection data under a scheme with an extra direction.
    ClassifyAmbiguity {
        #[arg(long)]
        projections_dir: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run the coded-data invariance suite on an object.
    VerifyUniqueness {
        #[arg(long)]
        object: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Exhaustively enumerate objects and group them by coded data.
    Oracle {
        /// One voxel `x y z` per line.
        #[arg(long)]
        support_file: PathBuf,
        /// One value `re im` per line.
        #[arg(long)]
        alphabet_file: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: f64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Exit-wave identities for an object.
    PhysicsDemo {
        #[arg(long)]
        object: PathBuf,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        kappa: f64,
        #[arg(long, env = "TOMOPHASE_SEED", default_value_t = 0)]
        seed: u64,
        /// Feature size, wavelength and propagation distance `ell,lambda,z0`
        /// for a Fresnel-number check.
        #[arg(long, value_parser = parse_triple)]
        fresnel: Option<(f64, f64, f64)>,
        #[arg(long)]
        report: PathBuf,
    },
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_floats(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err("expected two comma-separated numbers".into()),
    }
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    match parse_floats(s)?.as_slice() {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err("expected three comma-separated numbers".into()),
    }
}

fn parse_rotation(s: &str) -> Result<(f64, usize), String> {
    let (gamma, m) = s.split_once(',').ok_or("expected `gamma,m`")?;
    Ok((
        gamma.trim().parse().map_err(|e| format!("gamma: {e}"))?,
        m.trim().parse().map_err(|e| format!("m: {e}"))?,
    ))
}

enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Input(String),
    /// A check report was written but at least one check failed.
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load<T: Codec>(path: &Path) -> Result<T, Failure> {
    Ok(T::decode(&read(path)?)?)
}

fn finish(report: &Report, path: &Path) -> Outcome {
    write(path, report.to_csv().as_bytes())?;
    print!("{}", report.to_csv());
    if report.all_pass() {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn numbered(dir: &Path, prefix: &str, index: usize) -> PathBuf {
    dir.join(format!("{prefix}-{index:03}.tpa"))
}

/// Files `<prefix>-NNN.tpa` of a directory in index order.
fn list_numbered(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::Io(dir.to_path_buf(), e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&format!("{prefix}-")) && n.ends_with(".tpa"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Input(format!("no {prefix}-*.tpa files in {}", dir.display())));
    }
    Ok(files)
}

fn load_projections(dir: &Path) -> Result<Vec<Projection2D>, Failure> {
    list_numbered(dir, "projection")?.iter().map(|p| load(p)).collect()
}

fn parse_rows<const K: usize>(text: &str, what: &str) -> Result<Vec<[f64; K]>, Failure> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let v: Vec<f64> = l
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::Input(format!("{what} line `{l}`: {e}")))?;
            v.try_into()
                .map_err(|_| Failure::Input(format!("{what} line `{l}` needs {K} numbers")))
        })
        .collect()
}

fn object_kind(name: &str) -> Result<ObjectKind, Failure> {
    match name {
        "gaussian" => Ok(ObjectKind::ComplexGaussian),
        "unit-phases" => Ok(ObjectKind::UnitPhases),
        "quarter-phases" => Ok(ObjectKind::FiniteAlphabet(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ])),
        other => Err(Failure::Input(format!(
            "unknown object kind `{other}` (gaussian, unit-phases, quarter-phases)"
        ))),
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::GenObject { n, p, kind, seed, out } => {
            let f = random_object(n, p.unwrap_or(2 * n.max(1) - 1), &object_kind(&kind)?, seed)?;
            write(&out, &f.encode())
        }
        Command::GenMask { p, seed, plain, out } => {
            if p == 0 {
                return Err(Failure::Input("mask size p must be positive".into()));
            }
            let mask = if plain { Mask2D::plain(p) } else { random_mask(p, seed) };
            write(&out, &mask.encode())
        }
        Command::GenScheme {
            n,
            family,
            seed,
            rotation,
            extra,
            out,
        } => {
            let base = match rotation {
                Some((gamma, m)) => rotation_scheme(gamma, m, n, family)?,
                None => random_scheme(n, family, seed)?,
            };
            let s = match extra {
                Some(e) => tom2_scheme(&base, e)?,
                None => base,
            };
            write(&out, &s.encode())
        }
        Command::CheckScheme { scheme, tol, report } => {
            let s: Scheme = load(&scheme)?;
            let r = check_strong_ct(&s, tol);
            let mut rep = Report::default();
            rep.push("worst_count", r.worst_count as f64, r.needed as f64, r.pass);
            rep.push("worst_j", r.worst_pair.0 as f64, 0.0, true);
            rep.push("worst_k", r.worst_pair.1 as f64, 0.0, true);
            rep.push("tolerance", tol, tol, true);
            finish(&rep, &report)
        }
        Command::Project { object, scheme, out_dir } => {
            let f: Object3D = load(&object)?;
            let s: Scheme = load(&scheme)?;
            for (i, d) in s.directions().iter().enumerate() {
                write(&numbered(&out_dir, "projection", i), &project(&f, d)?.encode())?;
            }
            Ok(())
        }
        Command::Diffract {
            projections_dir,
            mask,
            grid,
            out_dir,
        } => {
            let mu: Mask2D = load(&mask)?;
            let grid = match grid.as_str() {
                "regular" => FrequencyGrid::Regular,
                g => match g.strip_prefix("irregular:") {
                    Some(file) => FrequencyGrid::Irregular(
                        parse_rows::<2>(&read_text(Path::new(file))?, "grid")?
                            .into_iter()
                            .collect(),
                    ),
                    None => return Err(Failure::Input(format!("unknown grid `{g}`"))),
                },
            };
            for (i, g) in load_projections(&projections_dir)?.iter().enumerate() {
                let mut pat = diffraction_pattern(&apply_mask(g, &mu)?, &grid, PatternOptions::default())?;
                pat.mask_seed = mu.seed;
                write(&numbered(&out_dir, "pattern", i), &pat.encode())?;
            }
            Ok(())
        }
        Command::RecoverAutocorr { pattern, out } => {
            let pat: DiffractionPattern = load(&pattern)?;
            let rec = recover_autocorrelation(&pat)?;
            println!("condition {:e}", rec.condition);
            if rec.ill_conditioned {
                eprintln!("warning: sampling system is ill-conditioned");
            }
            write(&out, &rec.autocorrelation.encode())
        }
        Command::VerifySlice { object, scheme, report } => {
            let f: Object3D = load(&object)?;
            let s: Scheme = load(&scheme)?;
            let grid = frequency_grid(f.p());
            let mut rep = Report::default();
            for (i, d) in s.directions().iter().enumerate() {
                rep.at_most(format!("slice_residual_{i}"), fourier_slice_residual(&f, d, &grid)?, 1e-9);
            }
            finish(&rep, &report)
        }
        Command::Reconstruct {
            projections_dir,
            scheme,
            tol,
            out,
            report,
            reference,
        } => {
            let s: Scheme = load(&scheme)?;
            let data = load_projections(&projections_dir)?;
            let r = ct_reconstruct_detailed(&data, &s, tol)?;
            write(&out, &r.object.encode())?;
            let mut rep = Report::default();
            rep.push("max_condition", r.max_condition, 1e6, true);
            rep.push("dc_residual", r.dc_residual, 0.0, true);
            if let Some(path) = reference {
                let f: Object3D = load(&path)?;
                if f.n() != r.object.n() || f.p() != r.object.p() {
                    return Err(Failure::Lib(Error::SizeMismatch {
                        expected: r.object.n(),
                        found: f.n(),
                    }));
                }
                let bound = 1e-8 * f64::max(1.0, r.max_condition / 1e6);
                rep.at_most("reconstruction_error", r.object.max_abs_diff(&f), bound);
            }
            finish(&rep, &report)
        }
        Command::ClassifyAmbiguity {
            projections_dir,
            scheme,
            tol,
            report,
        } => {
            let s: Scheme = load(&scheme)?;
            let v = ambiguity_classify(&load_projections(&projections_dir)?, &s, tol)?;
            println!("verdict {:?}", v.kind);
            if let Some(w) = &v.witness {
                println!("witness {}", w.reason);
            }
            let mut rep = Report::default();
            rep.push("spectral_spread", v.spectral_spread, tol, true);
            for kind in [
                AmbiguityKind::UniqueUpToPhase,
                AmbiguityKind::CommonProjectionAmbiguity,
                AmbiguityKind::Inconsistent,
            ] {
                rep.push(format!("verdict_{kind:?}"), f64::from(u8::from(v.kind == kind)), 1.0, true);
            }
            if let Some(w) = &v.witness {
                rep.push("delta_defect", w.delta_defect, 0.0, true);
                rep.push("extra_line_compatible", f64::from(u8::from(w.measured_extra_class.is_line_compatible())), 1.0, true);
            }
            finish(&rep, &report)
        }
        Command::VerifyUniqueness {
            object,
            mask,
            scheme,
            report,
        } => {
            let f: Object3D = load(&object)?;
            let mu: Mask2D = load(&mask)?;
            let s: Scheme = load(&scheme)?;
            let r = invariance_suite(&f, &mu, &s)?;
            let mut rep = Report::default();
            rep.at_most("global_phase", r.global_phase, r.tolerance);
            rep.at_most("plain_twin", r.plain_twin, r.tolerance);
            if let Some(d) = r.masked_twin {
                rep.push("masked_twin", d, r.witness_threshold, d > r.witness_threshold);
            }
            finish(&rep, &report)
        }
        Command::Oracle {
            support_file,
            alphabet_file,
            mask,
            scheme,
            budget,
            report,
        } => {
            let support: Vec<[i64; 3]> = parse_rows::<3>(&read_text(&support_file)?, "support")?
                .into_iter()
                .map(|v| {
                    if v.iter().all(|x| x.fract() == 0.0) {
                        Ok([v[0] as i64, v[1] as i64, v[2] as i64])
                    } else {
                        Err(Failure::Input(format!("support voxel {v:?} is not integral")))
                    }
                })
                .collect::<Result<_, _>>()?;
            let alphabet: Vec<Complex64> = parse_rows::<2>(&read_text(&alphabet_file)?, "alphabet")?
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect();
            let mu: Mask2D = load(&mask)?;
            let s: Scheme = load(&scheme)?;
            let r = exhaustive_oracle(&support, &alphabet, &mu, &s, budget)?;
            let pure = r.phase_orbit_pure.iter().filter(|&&x| x).count();
            let mut rep = Report::default();
            rep.push("enumerated", r.enumerated as f64, budget, true);
            rep.push("admissible", r.admissible as f64, 0.0, true);
            rep.push("classes", r.classes.len() as f64, 0.0, true);
            rep.push("phase_orbit_classes", pure as f64, r.classes.len() as f64, true);
            rep.push("resolved_by_rerun", r.resolved_by_rerun as f64, 0.0, true);
            rep.at_most("anomalies", r.anomalies.len() as f64, 0.0);
            for a in &r.anomalies {
                eprintln!("anomaly {:?}: ids {:?} distance {:e}", a.kind, a.ids, a.distance);
            }
            finish(&rep, &report)
        }
        Command::PhysicsDemo {
            object,
            kappa,
            seed,
            fresnel,
            report,
        } => {
            let f: Object3D = load(&object)?;
            let mut rep = Report::default();
            for family in [Family::X, Family::Y, Family::Z] {
                rep.at_most(format!("born_rytov_{family}"), born_rytov_consistency(&f, family, kappa)?, 1e-10);
            }
            let g = project(&f, &Direction::axis(Family::Z))?;
            let mu = random_mask(f.p(), seed);
            let d = intensity_decomposition(&mu, &g, kappa, &regular_nodes(f.p()))?;
            rep.at_most("intensity_decomposition", d.residual, 1e-10);
            if let Some((ell, lambda, z0)) = fresnel {
                let r = fresnel_validity(ell, lambda, z0, DEFAULT_FRESNEL_THRESHOLD)?;
                rep.push("fresnel_number", r.fresnel_number, r.threshold, r.valid);
            }
            finish(&rep, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(EXIT_VALIDATION),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_VALIDATION })
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
