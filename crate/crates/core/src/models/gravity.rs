//! Wavepacket above a mirror in uniform gravity.
//!
//! Units: length `x0 = (hbar²/2m²g)^{1/3}`, energy `m g x0`, time `hbar/(m g x0)`,
//! so `H = -d²/dx² + x` on `x > 0`, `D_Q = 1` and `hbar/m = 2`. Eigenstates are
//! `χ_n(x) = Ai(x - E_n) / Ai'(-E_n)` with `-E_n` the zeros of `Ai`.
//!
//! The initial Gaussian `exp(-(x-h)²/4ζ²)` expands with the closed-form
//! coefficients
//!
//! ```text
//! c_n = (8πζ²)^{1/4} / Ai'(-E_n) · Ai(h - E_n + ζ⁴) · exp(ζ²(h - E_n + 2ζ⁴/3))
//! ```
//!
//! valid for `ζ ≪ h`. A narrow packet needs thousands of states, so for the
//! Monte Carlo runs the field is tabulated once ([`GravityField`]) and each
//! time level costs a single matrix product.

use std::sync::Arc;

use ndarray::{s, Array2};
use rayon::prelude::*;

use super::airy::{airy_pair, airy_zeros};
use super::{ComplexValue, DriftField, DriftFrame, ModelError, WavefunctionModel};

/// Raw captured norm below which a truncation is rejected.
pub const REQUIRED_NORM: f64 = 0.999;
/// Captured norm the automatic truncation aims for.
pub const TARGET_NORM: f64 = 0.9999;
/// Upper bound on the automatic truncation.
pub const MAX_STATES: usize = 4000;
/// Largest admissible `ζ/h`.
pub const MAX_ASPECT: f64 = 0.2;

#[derive(Debug)]
struct Basis {
    h: f64,
    zeta: f64,
    energies: Vec<f64>,
    /// `1/Ai'(-E_n)`
    inv_slopes: Vec<f64>,
    coeffs: Vec<f64>,
    raw_norm: f64,
}

/// Truncated eigen-expansion of the initial Gaussian; cheap to clone.
#[derive(Debug, Clone)]
pub struct GravityModel {
    basis: Arc<Basis>,
}

fn check_geometry(h: f64, zeta: f64) -> Result<(), ModelError> {
    if !(h > 0.0 && zeta > 0.0 && h.is_finite()) || !(zeta / h < MAX_ASPECT) {
        return Err(ModelError::InvalidParameter(format!(
            "need h > 0 and 0 < zeta/h < {MAX_ASPECT}, got h = {h}, zeta = {zeta}"
        )));
    }
    Ok(())
}

fn raw_coefficient(h: f64, zeta: f64, e: f64, inv_slope: f64) -> Result<f64, ModelError> {
    let z2 = zeta * zeta;
    let arg = h - e + z2 * z2;
    let (ai, _) = airy_pair(arg)?;
    Ok((8.0 * std::f64::consts::PI * z2).powf(0.25) * inv_slope * ai * (z2 * (h - e + 2.0 / 3.0 * z2 * z2)).exp())
}

impl GravityModel {
    /// Expansion truncated to the first `n_max` states.
    pub fn with_states(h: f64, zeta: f64, n_max: usize) -> Result<Self, ModelError> {
        check_geometry(h, zeta)?;
        if n_max == 0 {
            return Err(ModelError::InvalidParameter("need at least one state".into()));
        }
        let energies = airy_zeros(n_max)?;
        Self::assemble(h, zeta, energies)
    }

    /// Smallest truncation capturing [`TARGET_NORM`] of the packet, up to [`MAX_STATES`].
    pub fn auto(h: f64, zeta: f64) -> Result<Self, ModelError> {
        Self::with_target(h, zeta, TARGET_NORM, MAX_STATES)
    }

    pub fn with_target(h: f64, zeta: f64, target: f64, cap: usize) -> Result<Self, ModelError> {
        check_geometry(h, zeta)?;
        let all = airy_zeros(cap)?;
        let mut captured = 0.0;
        let mut n = 0;
        for &e in &all {
            let (_, slope) = airy_pair(-e)?;
            captured += raw_coefficient(h, zeta, e, 1.0 / slope)?.powi(2);
            n += 1;
            if captured >= target {
                break;
            }
        }
        Self::assemble(h, zeta, all[..n].to_vec())
    }

    fn assemble(h: f64, zeta: f64, energies: Vec<f64>) -> Result<Self, ModelError> {
        let inv_slopes = energies
            .iter()
            .map(|&e| airy_pair(-e).map(|p| 1.0 / p.1))
            .collect::<Result<Vec<_>, _>>()?;
        let mut coeffs = energies
            .iter()
            .zip(&inv_slopes)
            .map(|(&e, &s)| raw_coefficient(h, zeta, e, s))
            .collect::<Result<Vec<_>, _>>()?;
        let raw_norm: f64 = coeffs.iter().map(|c| c * c).sum();
        if raw_norm < REQUIRED_NORM {
            return Err(ModelError::TruncationTooSevere { captured: raw_norm, required: REQUIRED_NORM });
        }
        let scale = raw_norm.sqrt().recip();
        coeffs.iter_mut().for_each(|c| *c *= scale);
        Ok(Self { basis: Arc::new(Basis { h, zeta, energies, inv_slopes, coeffs, raw_norm }) })
    }

    pub fn h(&self) -> f64 {
        self.basis.h
    }

    pub fn zeta(&self) -> f64 {
        self.basis.zeta
    }

    pub fn n_max(&self) -> usize {
        self.basis.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.basis.energies
    }

    /// Renormalized coefficients (`Σ c_n² = 1`).
    pub fn coeffs(&self) -> &[f64] {
        &self.basis.coeffs
    }

    /// `Σ c_n²` before renormalization.
    pub fn raw_norm(&self) -> f64 {
        self.basis.raw_norm
    }

    pub fn truncation_deficit(&self) -> f64 {
        1.0 - self.basis.raw_norm
    }

    /// `χ_n(x)` and `χ_n'(x)`; zero below the mirror.
    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<(f64, f64), ModelError> {
        if x <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let b = &self.basis;
        let (ai, aip) = airy_pair(x - b.energies[n])?;
        Ok((ai * b.inv_slopes[n], aip * b.inv_slopes[n]))
    }

    /// `(psi, psi')` by direct summation over the basis.
    pub fn psi_direct(&self, x: f64, t: f64) -> Result<(ComplexValue, ComplexValue), ModelError> {
        if x <= 0.0 {
            return Ok((ComplexValue::new(0.0, 0.0), ComplexValue::new(0.0, 0.0)));
        }
        let b = &self.basis;
        let mut psi = ComplexValue::new(0.0, 0.0);
        let mut dpsi = ComplexValue::new(0.0, 0.0);
        for n in 0..b.energies.len() {
            let (chi, dchi) = self.eigenfunction(n, x)?;
            let w = ComplexValue::from_polar(b.coeffs[n], -b.energies[n] * t);
            psi += w * chi;
            dpsi += w * dchi;
        }
        Ok((psi, dpsi))
    }

    /// Spatial extent needed to hold the packet up to time `t_end`: the
    /// initial spread, the ballistic reach of a `5σ` velocity component and a
    /// diffusive margin.
    pub fn reach(&self, t_end: f64) -> f64 {
        let b = &self.basis;
        b.h + 1.0 + 5.0 * t_end / b.zeta + 5.0 * (2.0 * t_end).sqrt()
    }

    /// Tabulates `c_n χ_n` and `c_n χ_n'` on `[0, x_max]` with spacing `dx`.
    pub fn tabulate(&self, x_max: f64, dx: f64) -> Result<GravityField, ModelError> {
        if !(dx > 0.0 && x_max > dx) {
            return Err(ModelError::InvalidParameter(format!("bad table geometry x_max = {x_max}, dx = {dx}")));
        }
        let rows = (x_max / dx).ceil() as usize + 1;
        let n = self.n_max();
        let b = &self.basis;
        let built: Result<Vec<(Vec<f64>, Vec<f64>)>, ModelError> = (0..rows)
            .into_par_iter()
            .map(|j| {
                let x = j as f64 * dx;
                let mut v = vec![0.0; n];
                let mut d = vec![0.0; n];
                if j > 0 {
                    for k in 0..n {
                        let (chi, dchi) = self.eigenfunction(k, x)?;
                        v[k] = b.coeffs[k] * chi;
                        d[k] = b.coeffs[k] * dchi;
                    }
                } else {
                    for k in 0..n {
                        let (_, aip) = airy_pair(-b.energies[k])?;
                        d[k] = b.coeffs[k] * aip * b.inv_slopes[k];
                    }
                }
                Ok((v, d))
            })
            .collect();
        let built = built?;
        let mut values = Array2::zeros((rows, n));
        let mut slopes = Array2::zeros((rows, n));
        for (j, (v, d)) in built.into_iter().enumerate() {
            values.row_mut(j).assign(&ndarray::ArrayView1::from(&v));
            slopes.row_mut(j).assign(&ndarray::ArrayView1::from(&d));
        }
        Ok(GravityField {
            model: self.clone(),
            table: Arc::new(Table { dx, rows, values, slopes }),
        })
    }
}

impl WavefunctionModel for GravityModel {
    fn psi_and_derivative(&self, x: f64, t: f64) -> Result<(ComplexValue, ComplexValue), ModelError> {
        self.psi_direct(x, t)
    }

    fn hbar_over_m(&self) -> f64 {
        2.0
    }

    fn support(&self, _t: f64) -> (f64, f64) {
        (0.0, self.reach(1.0))
    }
}

#[derive(Debug)]
struct Table {
    dx: f64,
    rows: usize,
    /// `c_n χ_n(x_j)`, row per grid point.
    values: Array2<f64>,
    /// `c_n χ_n'(x_j)`.
    slopes: Array2<f64>,
}

/// Tabulated gravity field; frames interpolate the table, positions beyond it
/// fall back to direct summation.
#[derive(Debug, Clone)]
pub struct GravityField {
    model: GravityModel,
    table: Arc<Table>,
}

impl GravityField {
    pub fn model(&self) -> &GravityModel {
        &self.model
    }

    pub fn x_max(&self) -> f64 {
        (self.table.rows - 1) as f64 * self.table.dx
    }

    pub fn spacing(&self) -> f64 {
        self.table.dx
    }

    /// Freezes the field at `t` on grid rows covering `[0, upper]`.
    pub fn frame_upto(&self, t: f64, upper: f64) -> GravityFrame {
        self.frames_upto(&[t], upper).pop().expect("one time requested")
    }

    /// Frames at each of `ts`, sharing a single pass over the table.
    pub fn frames_upto(&self, ts: &[f64], upper: f64) -> Vec<GravityFrame> {
        let tab = &self.table;
        let rows = ((upper.max(0.0) / tab.dx).ceil() as usize + 3).min(tab.rows);
        let energies = self.model.energies();
        let (n, m) = (energies.len(), ts.len());
        // columns per time: Re/Im of e^{-iEt} then Re/Im of E e^{-iEt}
        let mut w = Array2::zeros((n, 4 * m));
        let mut w1 = Array2::zeros((n, 2 * m));
        for (k, &e) in energies.iter().enumerate() {
            for (i, &t) in ts.iter().enumerate() {
                let (s, c) = (e * t).sin_cos();
                w[[k, 4 * i]] = c;
                w[[k, 4 * i + 1]] = -s;
                w[[k, 4 * i + 2]] = e * c;
                w[[k, 4 * i + 3]] = -e * s;
                w1[[k, 2 * i]] = c;
                w1[[k, 2 * i + 1]] = -s;
            }
        }
        let vals = tab.values.slice(s![..rows, ..]).dot(&w);
        let slopes = tab.slopes.slice(s![..rows, ..]).dot(&w1);
        ts.iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut psi = Vec::with_capacity(rows);
                let mut dpsi = Vec::with_capacity(rows);
                let mut d2psi = Vec::with_capacity(rows);
                for j in 0..rows {
                    let x = j as f64 * tab.dx;
                    let p = ComplexValue::new(vals[[j, 4 * i]], vals[[j, 4 * i + 1]]);
                    let ep = ComplexValue::new(vals[[j, 4 * i + 2]], vals[[j, 4 * i + 3]]);
                    psi.push(p);
                    dpsi.push(ComplexValue::new(slopes[[j, 2 * i]], slopes[[j, 2 * i + 1]]));
                    // χ'' = (x - E) χ
                    d2psi.push(p * x - ep);
                }
                psi[0] = ComplexValue::new(0.0, 0.0);
                GravityFrame { field: self.clone(), t, psi, dpsi, d2psi }
            })
            .collect()
    }
}

/// Time levels per table pass during integration.
const FRAME_BATCH: usize = 16;

impl DriftField for GravityField {
    type Frame = GravityFrame;
    fn frame(&self, t: f64, extent: (f64, f64)) -> Result<GravityFrame, ModelError> {
        Ok(self.frame_upto(t, extent.1 + 4.0 * self.table.dx))
    }

    fn frames(&self, ts: &[f64], extent: (f64, f64)) -> Result<Vec<GravityFrame>, ModelError> {
        Ok(self.frames_upto(ts, extent.1 + 4.0 * self.table.dx))
    }

    fn batch_len(&self) -> usize {
        FRAME_BATCH
    }
}

pub struct GravityFrame {
    field: GravityField,
    t: f64,
    psi: Vec<ComplexValue>,
    dpsi: Vec<ComplexValue>,
    d2psi: Vec<ComplexValue>,
}

fn hermite(s: f64, dx: f64, f0: ComplexValue, d0: ComplexValue, f1: ComplexValue, d1: ComplexValue) -> ComplexValue {
    let s2 = s * s;
    let s3 = s2 * s;
    f0 * (2.0 * s3 - 3.0 * s2 + 1.0) + d0 * (dx * (s3 - 2.0 * s2 + s)) + f1 * (3.0 * s2 - 2.0 * s3) + d1 * (dx * (s3 - s2))
}

impl GravityFrame {
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `(psi, psi')` at `x`, interpolated inside the frame and summed directly outside.
    pub fn psi(&self, x: f64) -> Result<(ComplexValue, ComplexValue), ModelError> {
        if x <= 0.0 {
            return Ok((ComplexValue::new(0.0, 0.0), ComplexValue::new(0.0, 0.0)));
        }
        let dx = self.field.table.dx;
        let u = x / dx;
        let j = u.floor() as usize;
        if j + 1 >= self.psi.len() {
            return self.field.model.psi_direct(x, self.t);
        }
        let s = u - j as f64;
        let p = hermite(s, dx, self.psi[j], self.dpsi[j], self.psi[j + 1], self.dpsi[j + 1]);
        let dp = hermite(s, dx, self.dpsi[j], self.d2psi[j], self.dpsi[j + 1], self.d2psi[j + 1]);
        Ok((p, dp))
    }

    pub fn density(&self, x: f64) -> Result<f64, ModelError> {
        Ok(self.psi(x)?.0.norm_sqr())
    }

    /// `|psi|²` at the table nodes `j dx` covered by this frame.
    pub fn node_densities(&self) -> Vec<f64> {
        self.psi.iter().map(|p| p.norm_sqr()).collect()
    }
}

impl DriftFrame for GravityFrame {
    fn drift(&self, x: f64) -> Result<f64, ModelError> {
        if x <= 0.0 {
            return Err(ModelError::NodeSingularity { x, t: self.t });
        }
        let (p, dp) = self.psi(x)?;
        super::drift_from_psi(p, dp, 2.0).map_err(|e| e.at(x, self.t))
    }
}

/// Scale factors of the dimensionless units for a particle of mass `mass_kg`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysicalUnits {
    pub length_m: f64,
    pub time_s: f64,
    pub energy_j: f64,
}

pub const HBAR: f64 = 1.054_571_817e-34;
pub const NEUTRON_MASS: f64 = 1.674_927_498_04e-27;
pub const STANDARD_GRAVITY: f64 = 9.806_65;

pub fn physical_units(mass_kg: f64, g: f64) -> PhysicalUnits {
    let length_m = (HBAR * HBAR / (2.0 * mass_kg * mass_kg * g)).cbrt();
    let energy_j = mass_kg * g * length_m;
    PhysicalUnits { length_m, time_s: HBAR / energy_j, energy_j }
}

pub fn neutron_units() -> PhysicalUnits {
    physical_units(NEUTRON_MASS, STANDARD_GRAVITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wide_packets() {
        assert!(GravityModel::with_states(1.0, 0.3, 10).is_err());
        assert!(GravityModel::with_states(-1.0, 0.01, 10).is_err());
    }

    #[test]
    fn short_truncation_is_too_severe() {
        let err = GravityModel::with_states(1.5, 0.09, 20).unwrap_err();
        assert!(matches!(err, ModelError::TruncationTooSevere { captured, .. } if captured < 0.9));
    }

    #[test]
    fn auto_truncation_reaches_target() {
        let m = GravityModel::auto(1.5, 0.09).unwrap();
        assert!(m.raw_norm() >= TARGET_NORM && m.raw_norm() < 1.0 + 1e-6);
        let norm: f64 = m.coeffs().iter().map(|c| c * c).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_envelope_decays_above_the_packet() {
        // Ai(h - E_n) oscillates for E_n > h; the Gaussian factor sets the envelope
        let m = GravityModel::auto(3.0, 0.3).unwrap();
        let maxima: Vec<f64> = m
            .energies()
            .iter()
            .zip(m.coeffs())
            .filter(|(e, _)| **e > 6.0)
            .map(|(_, c)| c.abs())
            .collect::<Vec<_>>()
            .chunks(8)
            .map(|c| c.iter().cloned().fold(0.0, f64::max))
            .collect();
        assert!(maxima.len() > 3);
        for i in 1..maxima.len() {
            let earlier = maxima[..i].iter().cloned().fold(0.0, f64::max);
            assert!(maxima[i] < earlier, "{maxima:?}");
        }
        assert!(*maxima.last().unwrap() < 0.05 * maxima[0]);
    }

    #[test]
    fn wavefunction_vanishes_at_mirror() {
        let m = GravityModel::with_target(2.0, 0.3, TARGET_NORM, 400).unwrap();
        assert_eq!(m.psi_direct(0.0, 0.37).unwrap().0, ComplexValue::new(0.0, 0.0));
    }

    #[test]
    fn frame_interpolation_matches_direct_sum() {
        let m = GravityModel::with_target(2.0, 0.3, TARGET_NORM, 400).unwrap();
        let field = m.tabulate(12.0, 0.01).unwrap();
        let frame = field.frame_upto(0.21, 12.0);
        for x in [0.003, 0.5, 1.234, 2.71, 6.0] {
            let (p, dp) = frame.psi(x).unwrap();
            let (q, dq) = m.psi_direct(x, 0.21).unwrap();
            assert!((p - q).norm() < 1e-6, "{x}: {p} vs {q}");
            assert!((dp - dq).norm() < 1e-5, "{x}: {dp} vs {dq}");
        }
        // beyond the frame rows: direct fallback
        let small = field.frame_upto(0.21, 1.0);
        let (p, _) = small.psi(3.0).unwrap();
        assert!((p - m.psi_direct(3.0, 0.21).unwrap().0).norm() < 1e-12);
    }

    #[test]
    fn batched_frames_match_single_frames() {
        let m = GravityModel::with_target(2.0, 0.3, TARGET_NORM, 400).unwrap();
        let field = m.tabulate(8.0, 0.01).unwrap();
        let ts = [0.1, 0.1001, 0.1002, 0.35];
        for (t, batched) in ts.iter().zip(field.frames_upto(&ts, 6.0)) {
            let single = field.frame_upto(*t, 6.0);
            assert_eq!(batched.t(), *t);
            for x in [0.2, 1.7, 4.05] {
                let (a, b) = (batched.psi(x).unwrap(), single.psi(x).unwrap());
                assert!((a.0 - b.0).norm() < 1e-12 && (a.1 - b.1).norm() < 1e-12, "{t} {x}");
            }
        }
    }

    #[test]
    fn neutron_scales() {
        let u = neutron_units();
        assert!((u.length_m * 1e6 - 5.87).abs() < 0.01);
        assert!((u.time_s * 1e3 - 1.09).abs() < 0.01);
    }
}
