//! Exit waves under the projection approximation and the coded-intensity
//! decomposition into reference, interference and object terms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::diffraction::{apply_mask, fourier_at, Mask2D};
use crate::error::{Error, Result};
use crate::object::Object3D;
use crate::xray::{project, Direction, Family, Projection2D};

/// Wavenumber in units where the wavelength is one.
pub const DEFAULT_KAPPA: f64 = 2.0 * PI;
pub const DEFAULT_FRESNEL_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveModel {
    Born,
    Rytov,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitWave2D {
    pub values: Projection2D,
    pub model: WaveModel,
    pub kappa: f64,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput("kappa"))
    }
}

/// Born: `1 - (i / 2 kappa) S`; Rytov: `exp(-(i / 2 kappa) S)`, where `S` is
/// the axis-aligned line sum of `f`.
pub fn exit_wave(f: &Object3D, axis: Family, kappa: f64, model: WaveModel) -> Result<ExitWave2D> {
    check_kappa(kappa)?;
    let line_sum = project(f, &Direction::axis(axis))?;
    let factor = Complex64::new(0.0, -1.0 / (2.0 * kappa));
    let values = Projection2D::from_fn(line_sum.p(), |a, b| {
        let phase = factor * line_sum.get([a, b]);
        match model {
            WaveModel::Born => Complex64::new(1.0, 0.0) + phase,
            WaveModel::Rytov => phase.exp(),
        }
    });
    Ok(ExitWave2D {
        values,
        model,
        kappa,
    })
}

/// Largest `|exp(v_B - 1) - v_R|` over the grid: the Born scattered field is
/// a logarithm of the Rytov wave.
pub fn born_rytov_consistency(f: &Object3D, axis: Family, kappa: f64) -> Result<f64> {
    let born = exit_wave(f, axis, kappa, WaveModel::Born)?;
    let rytov = exit_wave(f, axis, kappa, WaveModel::Rytov)?;
    Ok(born
        .values
        .values()
        .iter()
        .zip(rytov.values.values())
        .map(|(&b, &r)| ((b - 1.0).exp() - r).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityDecomposition {
    /// `|F(mu)|^2`
    pub reference: Vec<f64>,
    /// `(1 / kappa) Im(conj(F(mu)) F(mu S))`
    pub interference: Vec<f64>,
    /// `|F(mu S)|^2 / (4 kappa^2)`
    pub object: Vec<f64>,
    /// `|F(mu v_B)|^2`
    pub measured: Vec<f64>,
    pub residual: f64,
}

/// Evaluates both sides of the coded-intensity expansion of the Born exit
/// wave at the given frequency nodes.
pub fn intensity_decomposition(
    mu: &Mask2D,
    fproj: &Projection2D,
    kappa: f64,
    nodes: &[[f64; 2]],
) -> Result<IntensityDecomposition> {
    check_kappa(kappa)?;
    let masked_mu = mu.as_projection();
    let masked_obj = apply_mask(fproj, mu)?;
    let born = Projection2D::from_fn(fproj.p(), |a, b| {
        Complex64::new(1.0, 0.0) - Complex64::new(0.0, 1.0 / (2.0 * kappa)) * fproj.get([a, b])
    });
    let masked_born = apply_mask(&born, mu)?;

    let mut out = IntensityDecomposition {
        reference: Vec::with_capacity(nodes.len()),
        interference: Vec::with_capacity(nodes.len()),
        object: Vec::with_capacity(nodes.len()),
        measured: Vec::with_capacity(nodes.len()),
        residual: 0.0,
    };
    for &w in nodes {
        let fm = fourier_at(&masked_mu, w);
        let fo = fourier_at(&masked_obj, w);
        let t0 = fm.norm_sqr();
        let t1 = (fm.conj() * fo).im / kappa;
        let t2 = fo.norm_sqr() / (4.0 * kappa * kappa);
        let lhs = fourier_at(&masked_born, w).norm_sqr();
        out.residual = out.residual.max((lhs - (t0 + t1 + t2)).abs());
        out.reference.push(t0);
        out.interference.push(t1);
        out.object.push(t2);
        out.measured.push(lhs);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FresnelReport {
    pub ell: f64,
    pub lambda: f64,
    pub z0: f64,
    pub fresnel_number: f64,
    pub threshold: f64,
    pub valid: bool,
}

/// Fresnel number `ell^2 / (lambda z0)` and whether the projection
/// approximation regime holds at the given threshold.
pub fn fresnel_validity(ell: f64, lambda: f64, z0: f64, threshold: f64) -> Result<FresnelReport> {
    for (value, name) in [(ell, "ell"), (lambda, "lambda"), (z0, "z0")] {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::NonPositiveInput(name));
        }
    }
    let fresnel_number = ell * ell / (lambda * z0);
    Ok(FresnelReport {
        ell,
        lambda,
        z0,
        fresnel_number,
        threshold,
        valid: fresnel_number >= threshold,
    })
}
