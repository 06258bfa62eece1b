//! Six-junction flux qubit: charge-basis Hamiltonian, two-level truncation and
//! the Pauli decomposition of the qubit-resonator coupling operator.
//!
//! Energies are in GHz (E/h). Angular frequencies are in rad/ns, so a level
//! splitting of `s` GHz corresponds to `omega_q = 2 pi s`.
//!
//! The two-level basis is ordered `(|e>, |g>)` when building Pauli matrices, so
//! that `sigma_z |e> = +|e>` and `sigma_z |g> = -|g>`, matching the sign of the
//! qubit term in the Rabi Hamiltonian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{fix_global_phase, hermitian_eigen, HermitianEigen, C64, I};

/// Largest basis dimension accepted by [`build_qubit_hamiltonian`].
pub const MAX_BASIS_DIM: usize = 10_000;

/// Relative change of the qubit gap above which a cutoff counts as unconverged.
pub const GAP_CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluxQubitError {
    #[error("invalid circuit parameter: {0}")]
    InvalidParams(String),
    #[error("charge basis dimension {dim} exceeds the limit of {limit}")]
    BasisTooLarge { dim: usize, limit: usize },
    #[error("charge cutoff n_max={n_max} unconverged: qubit gap moved by {relative_change:.3e} (relative) at n_max+2")]
    CutoffTooSmall { n_max: usize, relative_change: f64 },
    #[error("lowest two levels are degenerate (splitting {splitting:.3e} GHz)")]
    DegenerateGroundSpace { splitting: f64 },
    #[error("operator dimension {operator} does not match eigenvector dimension {vector}")]
    BasisMismatch { operator: usize, vector: usize },
    #[error("sweep point alpha={alpha}, f1={f1}: {source}")]
    SweepPoint {
        alpha: f64,
        f1: f64,
        #[source]
        source: Box<FluxQubitError>,
    },
    #[error("sweep grids must be non-empty and sorted")]
    BadGrid,
}

/// Junction energies of one qubit. `e_j` and `e_c` in GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxQubitParams {
    pub e_j: f64,
    pub e_c: f64,
    /// E_J3 / E_J.
    pub alpha: f64,
    /// E_J4 / E_J = E_J5 / E_J.
    pub beta: f64,
    /// E_J6 / E_J. Enters only the coupling junction, not the bare qubit.
    pub gamma: f64,
}

impl FluxQubitParams {
    pub fn new(e_j: f64, e_c: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self, FluxQubitError> {
        let p = Self { e_j, e_c, alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    /// E_J/h = 221 GHz, E_C = E_J/32, with alpha = 0.8, beta = gamma = 0.1.
    pub fn reference() -> Self {
        Self { e_j: 221.0, e_c: 221.0 / 32.0, alpha: 0.8, beta: 0.1, gamma: 0.1 }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<(), FluxQubitError> {
        let bad = |msg: &str| Err(FluxQubitError::InvalidParams(msg.to_string()));
        if !(self.e_j > 0.0 && self.e_j.is_finite()) {
            return bad("E_J must be positive");
        }
        if !(self.e_c > 0.0 && self.e_c.is_finite()) {
            return bad("E_C must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        Ok(())
    }
}

/// External flux frustrations, each reduced to `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasPoint {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

fn wrap_unit(f: f64) -> f64 {
    let w = f.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl BiasPoint {
    pub fn new(f1: f64, f2: f64, f3: f64) -> Self {
        Self { f1: wrap_unit(f1), f2: wrap_unit(f2), f3: wrap_unit(f3) }
    }

    pub fn with_f1(self, f1: f64) -> Self {
        Self::new(f1, self.f2, self.f3)
    }

    /// Phase offset `2 pi (f1 - f2 + f3/2)` of the coupling term.
    pub fn coupling_phase(&self) -> f64 {
        2.0 * PI * (self.f1 - self.f2 + self.f3 / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeBasisSpec {
    pub n_max: usize,
}

impl Default for ChargeBasisSpec {
    fn default() -> Self {
        Self { n_max: 10 }
    }
}

impl ChargeBasisSpec {
    pub fn new(n_max: usize) -> Result<Self, FluxQubitError> {
        if n_max < 1 {
            return Err(FluxQubitError::InvalidParams("n_max must be at least 1".into()));
        }
        Ok(Self { n_max })
    }

    pub fn width(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn dimension(&self) -> usize {
        self.width() * self.width()
    }

    fn index(&self, n1: i64, n2: i64) -> usize {
        let m = self.n_max as i64;
        ((n1 + m) as usize) * self.width() + (n2 + m) as usize
    }

    fn charges(&self) -> impl Iterator<Item = (i64, i64)> {
        let m = self.n_max as i64;
        (-m..=m).flat_map(move |a| (-m..=m).map(move |b| (a, b)))
    }

    fn from_dimension(dim: usize) -> Option<Self> {
        let w = (dim as f64).sqrt().round() as usize;
        (w * w == dim && w % 2 == 1 && w >= 3).then(|| Self { n_max: (w - 1) / 2 })
    }
}

/// `U_q / E_J` including the coupling phase slip `phi_x`.
pub fn potential_energy(params: &FluxQubitParams, bias: &BiasPoint, phi1: f64, phi2: f64, phi_x: f64) -> f64 {
    let d = phi2 - phi1;
    -(phi1.cos()
        + phi2.cos()
        + params.alpha * (d + 2.0 * PI * bias.f1).cos()
        + 2.0 * params.beta * (PI * bias.f3).cos() * (d + bias.coupling_phase() + phi_x).cos())
}

/// Complex amplitude multiplying `exp(i(phi2 - phi1))` in the potential,
/// combining the alpha junction and the beta loop.
fn difference_amplitude(params: &FluxQubitParams, bias: &BiasPoint) -> C64 {
    C64::from_polar(params.alpha, 2.0 * PI * bias.f1)
        + C64::from_polar(2.0 * params.beta * (PI * bias.f3).cos(), bias.coupling_phase())
}

/// Kinetic matrix `4 E_C * C_J * C^{-1}` for the two qubit phases with
/// `phi_x` frozen to zero.
fn kinetic_matrix(params: &FluxQubitParams) -> [[f64; 2]; 2] {
    let b = params.alpha + 2.0 * params.beta;
    let a = 1.0 + b;
    let det = 1.0 + 2.0 * b;
    let s = 4.0 * params.e_c / det;
    [[s * a, s * b], [s * b, s * a]]
}

/// Hamiltonian in the plane-wave basis `|n1, n2>`, `|n_k| <= n_max`, in GHz.
pub fn build_qubit_hamiltonian(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    basis: &ChargeBasisSpec,
) -> Result<DMatrix<C64>, FluxQubitError> {
    params.validate()?;
    let dim = basis.dimension();
    if dim > MAX_BASIS_DIM {
        return Err(FluxQubitError::BasisTooLarge { dim, limit: MAX_BASIS_DIM });
    }
    let m = basis.n_max as i64;
    let k = kinetic_matrix(params);
    let hop = C64::new(-params.e_j / 2.0, 0.0);
    let diff = difference_amplitude(params, bias) * (-params.e_j / 2.0);
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for (n1, n2) in basis.charges() {
        let here = basis.index(n1, n2);
        let (x1, x2) = (n1 as f64, n2 as f64);
        h[(here, here)] = C64::new(k[0][0] * x1 * x1 + 2.0 * k[0][1] * x1 * x2 + k[1][1] * x2 * x2, 0.0);
        // cos(phi1), cos(phi2): nearest-neighbour charge hops.
        if n1 < m {
            let there = basis.index(n1 + 1, n2);
            h[(there, here)] += hop;
            h[(here, there)] += hop;
        }
        if n2 < m {
            let there = basis.index(n1, n2 + 1);
            h[(there, here)] += hop;
            h[(here, there)] += hop;
        }
        // exp(i(phi2 - phi1)) maps |n1, n2> to |n1 - 1, n2 + 1>.
        if n1 > -m && n2 < m {
            let there = basis.index(n1 - 1, n2 + 1);
            h[(there, here)] += diff;
            h[(here, there)] += diff.conj();
        }
    }
    Ok(h)
}

/// The coupling operator `sin(phi2 - phi1 + 2 pi (f1 - f2 + f3/2))` in the charge basis.
pub fn coupling_operator(bias: &BiasPoint, basis: &ChargeBasisSpec) -> DMatrix<C64> {
    let m = basis.n_max as i64;
    let dim = basis.dimension();
    let up = C64::from_polar(1.0, bias.coupling_phase()) / (2.0 * I);
    let mut op = DMatrix::<C64>::zeros(dim, dim);
    for (n1, n2) in basis.charges() {
        if n1 > -m && n2 < m {
            let here = basis.index(n1, n2);
            let there = basis.index(n1 - 1, n2 + 1);
            op[(there, here)] += up;
            op[(here, there)] += up.conj();
        }
    }
    op
}

/// Two lowest eigenpairs of a qubit Hamiltonian.
#[derive(Clone, Debug)]
pub struct QubitModel {
    /// Lowest three eigenvalues in GHz (fewer if the matrix is smaller).
    pub levels: Vec<f64>,
    /// Qubit angular frequency in rad/ns.
    pub omega_q: f64,
    pub ground: DVector<C64>,
    pub excited: DVector<C64>,
}

impl QubitModel {
    pub fn splitting_ghz(&self) -> f64 {
        self.omega_q / (2.0 * PI)
    }

    /// Separation of the third level from the first excited level, in GHz.
    pub fn anharmonic_gap(&self) -> Option<f64> {
        self.levels.get(2).map(|e2| e2 - self.levels[1])
    }
}

/// Truncates `h` to its two lowest levels. `energy_scale` sets the
/// degeneracy threshold `1e-9 * energy_scale`.
pub fn qubit_spectrum(h: &DMatrix<C64>, energy_scale: f64) -> Result<QubitModel, FluxQubitError> {
    spectrum_with_reference(h, energy_scale, None)
}

fn spectrum_with_reference(
    h: &DMatrix<C64>,
    energy_scale: f64,
    previous_excited: Option<&DVector<C64>>,
) -> Result<QubitModel, FluxQubitError> {
    if h.nrows() < 2 {
        return Err(FluxQubitError::InvalidParams("need at least two levels".into()));
    }
    model_from_eigen(hermitian_eigen(h), energy_scale, previous_excited)
}

fn model_from_eigen(
    eig: HermitianEigen,
    energy_scale: f64,
    previous_excited: Option<&DVector<C64>>,
) -> Result<QubitModel, FluxQubitError> {
    let splitting = eig.values[1] - eig.values[0];
    if splitting < 1e-9 * energy_scale {
        return Err(FluxQubitError::DegenerateGroundSpace { splitting });
    }
    let mut excited_col = 1;
    // Near a level crossing between the first and second excited states,
    // follow the state that best continues the previous grid point.
    if let Some(prev) = previous_excited {
        if eig.values.len() > 2 && (eig.values[2] - eig.values[1]).abs() < 1e-6 * energy_scale {
            let overlap = |c: usize| eig.vectors.column(c).dotc(prev).norm();
            if overlap(2) > overlap(1) {
                excited_col = 2;
            }
        }
    }
    let mut ground: DVector<C64> = eig.vectors.column(0).into_owned();
    let mut excited: DVector<C64> = eig.vectors.column(excited_col).into_owned();
    fix_global_phase(&mut ground);
    fix_global_phase(&mut excited);
    let levels: Vec<f64> = eig.values.iter().take(3).copied().collect();
    let omega_q = 2.0 * PI * (levels[excited_col] - levels[0]);
    Ok(QubitModel { levels, omega_q, ground, excited })
}

/// Pauli coefficients `(c_0, c_x, c_y, c_z)` of a projected two-level operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCoefficients {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

fn pauli(index: usize) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    match index {
        0 => Matrix2::new(l, o, o, l),
        1 => Matrix2::new(o, l, l, o),
        2 => Matrix2::new(o, -I, I, o),
        _ => Matrix2::new(l, o, o, -l),
    }
}

impl CouplingCoefficients {
    /// `c_nu = tr(sigma_nu * m) / 2` for a Hermitian 2x2 matrix.
    pub fn decompose(m: &Matrix2<C64>) -> Self {
        let c = |k| (pauli(k) * m).trace().re / 2.0;
        Self { c0: c(0), cx: c(1), cy: c(2), cz: c(3) }
    }

    pub fn reconstruct(&self) -> Matrix2<C64> {
        pauli(0) * C64::new(self.c0, 0.0)
            + pauli(1) * C64::new(self.cx, 0.0)
            + pauli(2) * C64::new(self.cy, 0.0)
            + pauli(3) * C64::new(self.cz, 0.0)
    }

    pub fn squared_norm(&self) -> f64 {
        self.c0 * self.c0 + self.cx * self.cx + self.cy * self.cy + self.cz * self.cz
    }

    /// Magnitude of the off-diagonal (transversal) part. How it splits between
    /// `c_x` and `c_y` depends only on the relative phase of the two
    /// eigenvectors.
    pub fn transversal(&self) -> f64 {
        self.cx.hypot(self.cy)
    }

    /// Size of the traceless part, the coupling scale absorbed into `g_j`.
    pub fn coupling_scale(&self) -> f64 {
        (self.cx * self.cx + self.cy * self.cy + self.cz * self.cz).sqrt()
    }

    /// Transversal and longitudinal weights normalised so that
    /// `cx^2 + cz^2 = 1`; these are the coefficients of the Rabi Hamiltonian.
    pub fn effective(&self) -> EffectiveCoupling {
        let scale = self.coupling_scale();
        if scale == 0.0 {
            return EffectiveCoupling { cx: 0.0, cz: 0.0, scale };
        }
        EffectiveCoupling { cx: self.transversal() / scale, cz: self.cz / scale, scale }
    }
}

/// Normalised coupling split used by the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCoupling {
    pub cx: f64,
    pub cz: f64,
    pub scale: f64,
}

/// `<a|op|b>` for `a, b` in `(|e>, |g>)`.
pub fn project_operator(op: &DMatrix<C64>, model: &QubitModel) -> Result<Matrix2<C64>, FluxQubitError> {
    if op.nrows() != model.ground.len() || op.ncols() != model.ground.len() {
        return Err(FluxQubitError::BasisMismatch { operator: op.nrows(), vector: model.ground.len() });
    }
    let basis = [&model.excited, &model.ground];
    let mut out = Matrix2::<C64>::zeros();
    for (r, a) in basis.iter().enumerate() {
        let op_a: DVector<C64> = op.adjoint() * *a;
        for (c, b) in basis.iter().enumerate() {
            out[(r, c)] = op_a.dotc(b);
        }
    }
    Ok(out)
}

/// The coupling operator restricted to the qubit doublet.
pub fn projected_coupling(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    model: &QubitModel,
) -> Result<Matrix2<C64>, FluxQubitError> {
    params.validate()?;
    let basis = ChargeBasisSpec::from_dimension(model.ground.len()).ok_or(FluxQubitError::BasisMismatch {
        operator: 0,
        vector: model.ground.len(),
    })?;
    project_operator(&coupling_operator(bias, &basis), model)
}

pub fn coupling_coefficients(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    model: &QubitModel,
) -> Result<CouplingCoefficients, FluxQubitError> {
    Ok(CouplingCoefficients::decompose(&projected_coupling(params, bias, model)?))
}

/// One fully resolved bias point.
#[derive(Clone, Debug, Serialize)]
pub struct QubitPoint {
    pub alpha: f64,
    pub f1: f64,
    pub n_max: usize,
    pub omega_q: f64,
    pub coefficients: CouplingCoefficients,
    pub effective: EffectiveCoupling,
    /// Tunnel splitting Delta in GHz, `omega_q/2pi * |cx_eff|`.
    pub gap_delta: f64,
    /// Flux tilt epsilon in GHz, `omega_q/2pi * cz_eff`.
    pub tilt_epsilon: f64,
    /// Matrix-element size of the current operator (dimensionless).
    pub persistent_current_scale: f64,
    /// Third level minus first excited level, GHz.
    pub anharmonic_gap: Option<f64>,
    /// `max |sum_nu c_nu sigma_nu - P op P|` over the 2x2 entries.
    pub reconstruction_residual: f64,
}

/// How [`solve_point`] treats the charge cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffPolicy {
    /// Use the requested cutoff as is.
    Fixed,
    /// Compare against `n_max + 2`, failing with `CutoffTooSmall`.
    Check,
    /// Raise `n_max` in steps of two until converged (up to 24).
    Escalate,
}

const ESCALATION_LIMIT: usize = 24;

/// Orthonormal basis vectors of one sector of the reflection
/// `|n1, n2> -> |-n2, -n1>`, stored sparsely as `(index, weight)` pairs.
fn reflection_sector(basis: &ChargeBasisSpec, even: bool) -> Vec<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (n1, n2) in basis.charges() {
        let here = basis.index(n1, n2);
        let image = basis.index(-n2, -n1);
        if here == image {
            if even {
                out.push(vec![(here, 1.0)]);
            }
        } else if here < image {
            let w = std::f64::consts::FRAC_1_SQRT_2;
            out.push(vec![(here, w), (image, if even { w } else { -w })]);
        }
    }
    out
}

/// Both the Hamiltonian and the coupling operator commute with the charge
/// reflection, so the spectrum is assembled from two half-size blocks.
fn reflection_eigen(h: &DMatrix<C64>, basis: &ChargeBasisSpec) -> HermitianEigen {
    let dim = h.nrows();
    let mut values = Vec::with_capacity(dim);
    let mut columns: Vec<DVector<C64>> = Vec::with_capacity(dim);
    for even in [true, false] {
        let sector = reflection_sector(basis, even);
        let k = sector.len();
        if k == 0 {
            continue;
        }
        let hb = DMatrix::<C64>::from_fn(dim, k, |r, c| sector[c].iter().map(|&(i, w)| h[(r, i)] * w).sum());
        let block = DMatrix::<C64>::from_fn(k, k, |r, c| sector[r].iter().map(|&(i, w)| hb[(i, c)] * w).sum());
        let eig = hermitian_eigen(&block);
        for (j, &v) in eig.values.iter().enumerate() {
            let mut full = DVector::<C64>::zeros(dim);
            for (r, vec) in sector.iter().enumerate() {
                for &(i, w) in vec {
                    full[i] += eig.vectors[(r, j)] * w;
                }
            }
            values.push(v);
            columns.push(full);
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    HermitianEigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: DMatrix::from_columns(&order.iter().map(|&k| columns[k].clone()).collect::<Vec<_>>()),
    }
}

fn model_at(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    basis: &ChargeBasisSpec,
    previous: Option<&DVector<C64>>,
) -> Result<QubitModel, FluxQubitError> {
    let h = build_qubit_hamiltonian(params, bias, basis)?;
    model_from_eigen(reflection_eigen(&h, basis), params.e_j, previous)
}

/// Builds, diagonalizes and projects at one bias point.
pub fn solve_point(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    basis: &ChargeBasisSpec,
    policy: CutoffPolicy,
) -> Result<QubitPoint, FluxQubitError> {
    solve_point_following(params, bias, basis, policy, None).map(|(p, _)| p)
}

fn solve_point_following(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    basis: &ChargeBasisSpec,
    policy: CutoffPolicy,
    previous: Option<(&DVector<C64>, usize)>,
) -> Result<(QubitPoint, DVector<C64>), FluxQubitError> {
    let mut basis = *basis;
    // Tracking across a crossing only makes sense in the same basis.
    let prev_vec = previous.and_then(|(v, n)| (n == basis.n_max).then_some(v));
    let mut model = model_at(params, bias, &basis, prev_vec)?;
    if policy != CutoffPolicy::Fixed {
        loop {
            let finer = ChargeBasisSpec { n_max: basis.n_max + 2 };
            let refined = model_at(params, bias, &finer, None)?;
            let gap = model.omega_q;
            let change = ((refined.omega_q - gap) / gap).abs();
            if change <= GAP_CONVERGENCE_TOL {
                break;
            }
            if policy == CutoffPolicy::Check || finer.n_max > ESCALATION_LIMIT {
                return Err(FluxQubitError::CutoffTooSmall { n_max: basis.n_max, relative_change: change });
            }
            basis = finer;
            model = refined;
        }
    }
    let projected = projected_coupling(params, bias, &model)?;
    let coefficients = CouplingCoefficients::decompose(&projected);
    let reconstruction_residual = (coefficients.reconstruct() - projected).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let effective = coefficients.effective();
    let splitting = model.splitting_ghz();
    let point = QubitPoint {
        alpha: params.alpha,
        f1: bias.f1,
        n_max: basis.n_max,
        omega_q: model.omega_q,
        coefficients,
        effective,
        gap_delta: splitting * effective.cx.abs(),
        tilt_epsilon: splitting * effective.cz,
        persistent_current_scale: effective.scale,
        anharmonic_gap: model.anharmonic_gap(),
        reconstruction_residual,
    };
    Ok((point, model.excited))
}

/// Grid of resolved bias points, alpha-major.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientSurface {
    pub alphas: Vec<f64>,
    pub f1s: Vec<f64>,
    pub points: Vec<QubitPoint>,
}

impl CoefficientSurface {
    pub fn at(&self, alpha_index: usize, f1_index: usize) -> &QubitPoint {
        &self.points[alpha_index * self.f1s.len() + f1_index]
    }
}

fn sorted_non_empty(grid: &[f64]) -> bool {
    !grid.is_empty() && grid.iter().all(|x| x.is_finite()) && grid.windows(2).all(|w| w[0] <= w[1])
}

fn sweep_row(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    basis: &ChargeBasisSpec,
    policy: CutoffPolicy,
    alpha: f64,
    f1_grid: &[f64],
) -> Result<Vec<QubitPoint>, FluxQubitError> {
    let row_params = params.with_alpha(alpha);
    let mut previous: Option<(DVector<C64>, usize)> = None;
    let mut out = Vec::with_capacity(f1_grid.len());
    for &f1 in f1_grid {
        let at = bias.with_f1(f1);
        let prev = previous.as_ref().map(|(v, n)| (v, *n));
        let (point, excited) = solve_point_following(&row_params, &at, basis, policy, prev).map_err(|e| {
            FluxQubitError::SweepPoint { alpha, f1, source: Box::new(e) }
        })?;
        previous = Some((excited, point.n_max));
        out.push(point);
    }
    Ok(out)
}

/// Sweeps `alpha x f1`; the other bias components come from `bias`.
/// Rows (fixed alpha) run in parallel; within a row, points are solved in
/// order so that eigenvector tracking across crossings is continuous.
pub fn sweep_bias(
    params: &FluxQubitParams,
    bias: &BiasPoint,
    basis: &ChargeBasisSpec,
    policy: CutoffPolicy,
    alpha_grid: &[f64],
    f1_grid: &[f64],
) -> Result<CoefficientSurface, FluxQubitError> {
    if !sorted_non_empty(alpha_grid) || !sorted_non_empty(f1_grid) {
        return Err(FluxQubitError::BadGrid);
    }
    let row = |&alpha: &f64| sweep_row(params, bias, basis, policy, alpha, f1_grid);
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = {
        use rayon::prelude::*;
        alpha_grid.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = alpha_grid.iter().map(row).collect();
    let mut points = Vec::with_capacity(alpha_grid.len() * f1_grid.len());
    for r in rows {
        points.extend(r?);
    }
    Ok(CoefficientSurface { alphas: alpha_grid.to_vec(), f1s: f1_grid.to_vec(), points })
}

/// `count` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect(),
    }
}
