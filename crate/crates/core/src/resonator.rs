//! Eigenmodes of a transmission-line resonator cut by `N` equally spaced
//! coupling junctions, each a linear inductance `L_J` shunted by
//! `(gamma + 2 beta) C_J`.
//!
//! Inputs are SI. Returned angular frequencies are in rad/ns so they can be
//! fed straight into the dynamics module.
//!
//! Between junctions the flux obeys the wave equation with wavenumber
//! `k = omega / v`. Writing `d_j` for the flux slope at junction `j` (with
//! `d_0 = d_{N+1} = 0` at the open ends), segment `s` carries
//!
//! ```text
//! r_s(y) = d_s cos(k (a - y)) - d_{s+1} cos(k y),   0 <= y <= a,
//! ```
//!
//! which already conserves current at every node. The junction relation
//! `-r'/l = (1/L_J - omega^2 C_s) * jump` is then a symmetric tridiagonal
//! system in `d`, diagonalised by `d_j = sin(pi p j / (N + 1))`. Each band
//! index `p = 1..N` gives one scalar characteristic function
//!
//! ```text
//! f_p(omega) = 2 Y(omega) (cos(pi p / (N + 1)) - cos(k a)) + k sin(k a) / l.
//! ```
//!
//! The remaining modes have `d = 0`, i.e. `r = cos(k x)` with `k a = m pi`;
//! they never bend at a junction and so never couple to a qubit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Quadrature subintervals per inter-junction segment (even, for Simpson).
pub const SAMPLES_PER_SEGMENT: usize = 512;

const SCAN_DIVISIONS: f64 = 200.0;
const ROOT_REL_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonatorError {
    #[error("invalid resonator parameter: {0}")]
    InvalidParams(String),
    #[error("could not isolate a root of band {band} between {lo:.6e} and {hi:.6e} rad/s")]
    RootBracketingFailure { band: usize, lo: f64, hi: f64 },
    #[error("modes near {center:.6} rad/ns spread by {spread:.3e} (relative), above the window {window:.3e}")]
    NotDegenerate { center: f64, spread: f64, window: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    pub length_m: f64,
    /// Inductance per unit length, H/m.
    pub l_per_m: f64,
    /// Capacitance per unit length, F/m.
    pub c_per_m: f64,
    pub n_junctions: usize,
    pub c_j: f64,
    pub l_j: f64,
    pub gamma: f64,
    pub beta: f64,
}

/// Reduced flux quantum in Wb.
const PHI0_REDUCED: f64 = 3.291_059_757_0e-16;
const PLANCK: f64 = 6.626_070_15e-34;

impl ResonatorParams {
    pub fn validate(&self) -> Result<(), ResonatorError> {
        let positive = [
            ("length_m", self.length_m),
            ("l_per_m", self.l_per_m),
            ("c_per_m", self.c_per_m),
            ("C_J", self.c_j),
            ("L_J", self.l_j),
            ("gamma", self.gamma),
            ("beta", self.beta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ResonatorError::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Phase velocity in m/s.
    pub fn phase_velocity(&self) -> f64 {
        1.0 / (self.l_per_m * self.c_per_m).sqrt()
    }

    /// Characteristic impedance in ohms.
    pub fn impedance(&self) -> f64 {
        (self.l_per_m / self.c_per_m).sqrt()
    }

    pub fn segment_length(&self) -> f64 {
        self.length_m / (self.n_junctions + 1) as f64
    }

    pub fn shunt_capacitance(&self) -> f64 {
        (self.gamma + 2.0 * self.beta) * self.c_j
    }

    /// `1/sqrt(C_J L_J)` in rad/ns.
    pub fn plasma_frequency(&self) -> f64 {
        1e-9 / (self.c_j * self.l_j).sqrt()
    }

    /// `1/sqrt(C_s L_J)` in rad/ns, the frequency at which a junction's
    /// admittance vanishes.
    pub fn shunt_resonance(&self) -> f64 {
        1e-9 / (self.shunt_capacitance() * self.l_j).sqrt()
    }

    /// `pi v (N + 1) / L` in rad/ns.
    pub fn manifold_frequency(&self) -> f64 {
        1e-9 * PI * self.phase_velocity() / self.segment_length()
    }

    /// Returns a copy with `C_J` chosen so the junction admittance vanishes
    /// at the manifold frequency, which makes `N + 1` modes degenerate there.
    pub fn tuned_to_manifold(mut self) -> Self {
        let w = self.manifold_frequency() * 1e9;
        self.c_j = 1.0 / (w * w * self.l_j * (self.gamma + 2.0 * self.beta));
        self
    }

    /// Synthetic coplanar-waveguide numbers with the manifold at 5 GHz and
    /// `L_J = phi0^2 / E_J` for `E_J / h = 221 GHz`.
    pub fn synthetic(n_junctions: usize) -> Self {
        let l_per_m: f64 = 4.2e-7;
        let c_per_m = 1.6e-10;
        let v = 1.0 / (l_per_m * c_per_m).sqrt();
        let target_hz = 5e9;
        let length_m = v * (n_junctions + 1) as f64 / (2.0 * target_hz);
        let l_j = PHI0_REDUCED * PHI0_REDUCED / (221e9 * PLANCK);
        Self { length_m, l_per_m, c_per_m, n_junctions, c_j: 1e-12, l_j, gamma: 0.1, beta: 0.1 }.tuned_to_manifold()
    }

    fn admittance(&self, omega: f64) -> f64 {
        1.0 / self.l_j - omega * omega * self.shunt_capacitance()
    }

    fn band_angle(&self, p: usize) -> f64 {
        PI * p as f64 / (self.n_junctions + 1) as f64
    }

    /// Characteristic function of band `p` at angular frequency `omega` (rad/s).
    pub fn band_function(&self, p: usize, omega: f64) -> f64 {
        let k = omega / self.phase_velocity();
        let ka = k * self.segment_length();
        2.0 * self.admittance(omega) * (self.band_angle(p).cos() - ka.cos()) + k * ka.sin() / self.l_per_m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModeFamily {
    /// Slopes at the junctions follow `sin(pi p j / (N + 1))`.
    Band { p: usize },
    /// `cos(k x)` with `k a = m pi`; no flux drop at any junction.
    Unpinned { m: usize },
}

/// One eigenmode, normalised so the largest sampled `|r|` is 1 and positive.
#[derive(Clone, Debug, Serialize)]
pub struct Eigenmode {
    /// Angular frequency in rad/ns.
    pub omega: f64,
    pub family: ModeFamily,
    #[serde(skip)]
    wavenumber: f64,
    #[serde(skip)]
    segment: f64,
    /// Junction slopes `d_0..d_{N+1}` (band modes only).
    #[serde(skip)]
    slopes: Vec<f64>,
    #[serde(skip)]
    scale: f64,
}

impl Eigenmode {
    fn raw(&self, s: usize, y: f64) -> f64 {
        let k = self.wavenumber;
        match self.family {
            ModeFamily::Band { .. } => self.slopes[s] * (k * (self.segment - y)).cos() - self.slopes[s + 1] * (k * y).cos(),
            ModeFamily::Unpinned { .. } => (k * (s as f64 * self.segment + y)).cos(),
        }
    }

    fn raw_derivative(&self, s: usize, y: f64) -> f64 {
        let k = self.wavenumber;
        match self.family {
            ModeFamily::Band { .. } => k * (self.slopes[s] * (k * (self.segment - y)).sin() + self.slopes[s + 1] * (k * y).sin()),
            ModeFamily::Unpinned { .. } => -k * (k * (s as f64 * self.segment + y)).sin(),
        }
    }

    /// Mode function in segment `s` at local coordinate `y` in `[0, a]`.
    pub fn value(&self, s: usize, y: f64) -> f64 {
        self.scale * self.raw(s, y)
    }

    /// Spatial derivative (1/m) in segment `s`.
    pub fn derivative(&self, s: usize, y: f64) -> f64 {
        self.scale * self.raw_derivative(s, y)
    }

    /// The same mode with the opposite overall sign.
    pub fn flipped(&self) -> Self {
        Self { scale: -self.scale, ..self.clone() }
    }

    pub fn frequency_ghz(&self) -> f64 {
        self.omega / (2.0 * PI)
    }

    /// `r(ja^-) - r(ja^+)` for `j = 1..N`.
    pub fn flux_drops(&self) -> Vec<f64> {
        let n = self.slopes.len().saturating_sub(2);
        (1..=n).map(|j| self.value(j - 1, self.segment) - self.value(j, 0.0)).collect()
    }

    /// Samples of segment `s` on `samples + 1` equally spaced points.
    pub fn sample_segment(&self, s: usize, samples: usize) -> Vec<f64> {
        (0..=samples).map(|i| self.value(s, self.segment * i as f64 / samples as f64)).collect()
    }
}

/// Largest violation of the three boundary-condition families, in units
/// where slopes are measured against `k` and currents against `k / l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryResiduals {
    pub open_ends: f64,
    pub current_conservation: f64,
    pub junction_relation: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        self.open_ends.max(self.current_conservation).max(self.junction_relation)
    }
}

pub fn boundary_residuals(params: &ResonatorParams, mode: &Eigenmode) -> BoundaryResiduals {
    let n = params.n_junctions;
    let a = params.segment_length();
    let k = mode.wavenumber;
    let omega_si = mode.omega * 1e9;
    let open_ends = (mode.derivative(0, 0.0).abs()).max(mode.derivative(n, a).abs()) / k;
    let mut conservation = 0.0f64;
    let mut relation = 0.0f64;
    for j in 1..=n {
        let left = mode.derivative(j - 1, a);
        let right = mode.derivative(j, 0.0);
        conservation = conservation.max((left - right).abs() / k);
        let drop = mode.value(j - 1, a) - mode.value(j, 0.0);
        let current = -left / params.l_per_m;
        relation = relation.max((current - params.admittance(omega_si) * drop).abs() * params.l_per_m / k);
    }
    BoundaryResiduals { open_ends, current_conservation: conservation, junction_relation: relation }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenmodeSet {
    pub modes: Vec<Eigenmode>,
    /// Sample positions in metres. Each segment contributes
    /// `SAMPLES_PER_SEGMENT + 1` points, so junction positions appear twice
    /// (left and right limits).
    pub grid: Vec<f64>,
    pub mode_functions: Vec<Vec<f64>>,
    /// Farads (mode functions are dimensionless).
    pub effective_masses: Vec<f64>,
    pub flux_drops: Vec<Vec<f64>>,
}

impl EigenmodeSet {
    pub fn frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, band: usize) -> Result<f64, ResonatorError> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(ResonatorError::RootBracketingFailure { band, lo, hi });
    }
    for _ in 0..200 {
        if hi - lo <= ROOT_REL_TOL * hi {
            // Secant step inside the final bracket.
            let fh = f(hi);
            let x = hi - fh * (hi - lo) / (fh - flo);
            return Ok(if x.is_finite() && x >= lo && x <= hi { x } else { 0.5 * (lo + hi) });
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(ResonatorError::RootBracketingFailure { band, lo, hi })
}

fn band_roots(params: &ResonatorParams, p: usize, max_omega: f64, step: f64) -> Result<Vec<f64>, ResonatorError> {
    let f = |w: f64| params.band_function(p, w);
    let mut roots = Vec::new();
    let steps = (max_omega / step).ceil() as usize;
    let mut lo = step * 1e-6;
    let mut flo = f(lo);
    for i in 1..=steps {
        let hi = (step * i as f64).min(max_omega);
        let fhi = f(hi);
        if fhi == 0.0 {
            roots.push(hi);
        } else if flo != 0.0 && flo.signum() != fhi.signum() {
            roots.push(bisect(&f, lo, hi, p)?);
        }
        lo = hi;
        flo = fhi;
    }
    Ok(roots)
}

fn normalise(mut mode: Eigenmode, n_segments: usize) -> Eigenmode {
    mode.scale = 1.0;
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for s in 0..n_segments {
        for v in mode.sample_segment(s, SAMPLES_PER_SEGMENT) {
            if v.abs() > best * (1.0 + 1e-12) {
                best = v.abs();
                sign = v.signum();
            }
        }
    }
    mode.scale = sign / best;
    mode
}

/// All eigenmodes with `0 < f < max_freq_ghz`, ascending in frequency.
pub fn mode_equation_roots(params: &ResonatorParams, max_freq_ghz: f64) -> Result<EigenmodeSet, ResonatorError> {
    params.validate()?;
    if !(max_freq_ghz > 0.0 && max_freq_ghz.is_finite()) {
        return Err(ResonatorError::InvalidParams("max_freq must be positive".into()));
    }
    let n = params.n_junctions;
    let v = params.phase_velocity();
    let a = params.segment_length();
    let max_omega = 2.0 * PI * max_freq_ghz * 1e9;
    let bar = params.manifold_frequency() * 1e9;
    let step = bar / SCAN_DIVISIONS;

    let mut modes = Vec::new();
    let template = |omega: f64, family: ModeFamily, slopes: Vec<f64>| Eigenmode {
        omega: omega * 1e-9,
        family,
        wavenumber: omega / v,
        segment: a,
        slopes,
        scale: 1.0,
    };
    for p in 1..=n {
        let theta = params.band_angle(p);
        let mut slopes = vec![0.0; n + 2];
        for (j, d) in slopes.iter_mut().enumerate().take(n + 1).skip(1) {
            *d = (theta * j as f64).sin();
        }
        for omega in band_roots(params, p, max_omega, step)? {
            modes.push(template(omega, ModeFamily::Band { p }, slopes.clone()));
        }
    }
    let mut m = 1;
    while m as f64 * bar < max_omega {
        modes.push(template(m as f64 * bar, ModeFamily::Unpinned { m }, vec![0.0; n + 2]));
        m += 1;
    }
    modes.sort_by(|x, y| x.omega.total_cmp(&y.omega));
    let modes: Vec<Eigenmode> = modes.into_iter().map(|m| normalise(m, n + 1)).collect();

    let mut grid = Vec::with_capacity((n + 1) * (SAMPLES_PER_SEGMENT + 1));
    for s in 0..=n {
        for i in 0..=SAMPLES_PER_SEGMENT {
            grid.push(a * (s as f64 + i as f64 / SAMPLES_PER_SEGMENT as f64));
        }
    }
    let mode_functions = modes
        .iter()
        .map(|m| (0..=n).flat_map(|s| m.sample_segment(s, SAMPLES_PER_SEGMENT)).collect())
        .collect();
    let flux_drops = modes.iter().map(|m| m.flux_drops()).collect();
    let mut set = EigenmodeSet { modes, grid, mode_functions, effective_masses: Vec::new(), flux_drops };
    set.effective_masses = effective_masses(params, &set);
    Ok(set)
}

fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut acc = samples[0] + samples[n];
    for (i, v) in samples.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// `c * int r^2 dx + C_s * sum_j jump_j^2` using `samples` Simpson
/// subintervals per segment (`samples` must be even).
pub fn effective_mass(params: &ResonatorParams, mode: &Eigenmode, samples: usize) -> f64 {
    assert!(samples >= 2 && samples % 2 == 0, "Simpson needs an even number of subintervals");
    let a = params.segment_length();
    let h = a / samples as f64;
    let integral: f64 = (0..=params.n_junctions)
        .map(|s| {
            let sq: Vec<f64> = mode.sample_segment(s, samples).iter().map(|r| r * r).collect();
            simpson(&sq, h)
        })
        .sum();
    let jumps: f64 = mode.flux_drops().iter().map(|d| d * d).sum();
    params.c_per_m * integral + params.shunt_capacitance() * jumps
}

pub fn effective_masses(params: &ResonatorParams, modes: &EigenmodeSet) -> Vec<f64> {
    modes.modes.iter().map(|m| effective_mass(params, m, SAMPLES_PER_SEGMENT)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifoldSpec {
    /// rad/ns.
    pub degenerate_frequency: f64,
    /// Modes inside the window, `N + 1` at exact tuning.
    pub mode_count: usize,
    /// Modes in the window that bend at the junctions and therefore couple
    /// to the qubits (`N` at exact tuning).
    pub coupled_mode_count: usize,
    /// Relative spread `(max - min) / center` of the `N + 1` modes closest to
    /// the manifold frequency.
    pub spread: f64,
    /// `sqrt(2/(N+1)) sin(pi j/(N+1))`, `j = 1..N`.
    pub coupling_profile: Vec<f64>,
}

pub fn coupling_profile(n_junctions: usize) -> Vec<f64> {
    let n1 = (n_junctions + 1) as f64;
    (1..=n_junctions).map(|j| (2.0 / n1).sqrt() * (PI * j as f64 / n1).sin()).collect()
}

/// Checks that the `N + 1` modes nearest `pi v (N + 1)/L` fall within
/// `window` (relative) and reports the manifold.
pub fn degenerate_manifold(params: &ResonatorParams, window: f64) -> Result<ManifoldSpec, ResonatorError> {
    params.validate()?;
    let center = params.manifold_frequency();
    let set = mode_equation_roots(params, 1.5 * center / (2.0 * PI))?;
    let mut nearest: Vec<&Eigenmode> = set.modes.iter().collect();
    nearest.sort_by(|x, y| (x.omega - center).abs().total_cmp(&(y.omega - center).abs()));
    nearest.truncate(params.n_junctions + 1);
    let lo = nearest.iter().map(|m| m.omega).fold(f64::INFINITY, f64::min);
    let hi = nearest.iter().map(|m| m.omega).fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / center;
    if spread > window {
        return Err(ResonatorError::NotDegenerate { center, spread, window });
    }
    let in_window: Vec<&Eigenmode> =
        set.modes.iter().filter(|m| (m.omega - center).abs() <= window * center).collect();
    let coupled = in_window.iter().filter(|m| matches!(m.family, ModeFamily::Band { .. })).count();
    Ok(ManifoldSpec {
        degenerate_frequency: center,
        mode_count: in_window.len(),
        coupled_mode_count: coupled,
        spread,
        coupling_profile: coupling_profile(params.n_junctions),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn synthetic_defaults_place_manifold_at_five_ghz() {
        for n in 0..4 {
            let p = ResonatorParams::synthetic(n);
            assert_relative_eq!(p.manifold_frequency() / (2.0 * PI), 5.0, max_relative = 1e-12);
            assert_relative_eq!(p.shunt_resonance(), p.manifold_frequency(), max_relative = 1e-12);
        }
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let xs: Vec<f64> = (0..=4).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        assert_relative_eq!(simpson(&ys, 0.25), 0.25 - 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = ResonatorParams::synthetic(1);
        p.l_j = 0.0;
        assert!(mode_equation_roots(&p, 10.0).is_err());
        assert!(mode_equation_roots(&ResonatorParams::synthetic(1), -1.0).is_err());
    }

    #[test]
    fn profile_for_single_junction() {
        let prof = coupling_profile(1);
        assert_relative_eq!(prof[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn detuned_chain_is_not_degenerate() {
        let mut p = ResonatorParams::synthetic(2);
        p.c_j *= 1.5;
        assert!(matches!(degenerate_manifold(&p, 1e-6), Err(ResonatorError::NotDegenerate { .. })));
    }
}
