use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::analytic::evolve_analytic;
use super::cavity::{cavity_ensemble, CavityFieldSpec};
use super::hamiltonian::Propagator;
use super::state::QuantumState;
use super::{spin, DynamicsError, RabiSystem};
use crate::linalg::C64;

/// Tolerance on the two coupling constraints.
pub const CONDITION_TOL: f64 = 1e-9;

/// One application of the cavity-mediated controlled-phase gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub pair: (usize, usize),
    /// Gate duration in mode periods.
    pub n_periods: usize,
    pub kappa_i: f64,
    pub kappa_j: f64,
}

impl GateSchedule {
    /// Equal couplings `kappa = 1 / (4 sqrt(n M))`.
    pub fn symmetric(pair: (usize, usize), n_periods: usize, modes: usize) -> Self {
        let kappa = 1.0 / (4.0 * ((n_periods * modes) as f64).sqrt());
        Self { pair, n_periods, kappa_i: kappa, kappa_j: kappa }
    }

    /// `2 pi n / omega` in ns for `omega` in rad/ns.
    pub fn gate_time(&self, omega: f64) -> f64 {
        2.0 * PI * self.n_periods as f64 / omega
    }

    /// Residuals of `k_i^2 + k_j^2 = 1/(8nM)` and `k_i k_j = 1/(16nM)`.
    pub fn condition_residuals(&self, modes: usize) -> (f64, f64) {
        let nm = (self.n_periods * modes) as f64;
        (
            self.kappa_i * self.kappa_i + self.kappa_j * self.kappa_j - 1.0 / (8.0 * nm),
            self.kappa_i * self.kappa_j - 1.0 / (16.0 * nm),
        )
    }

    pub fn check_conditions(&self, modes: usize) -> Result<(), DynamicsError> {
        let (s, p) = self.condition_residuals(modes);
        if s.abs() > CONDITION_TOL || p.abs() > CONDITION_TOL || self.n_periods == 0 {
            return Err(DynamicsError::ConditionViolated { sum_of_squares: s, product: p });
        }
        Ok(())
    }
}

/// Phases of the gate, `U(T) = e^{i global} U_loc exp(-i pi/4 (sz_i + sz_j)) exp(i zz sz_i sz_j)`
/// with `U_loc = exp(i (u_i sz_i + u_j sz_j))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseReport {
    /// Gate time in ns.
    pub gate_time: f64,
    /// `-(pi/4) (4 n w_q / w - 1)` per qubit.
    pub local_angles: [f64; 2],
    /// The fixed `-pi/4` rotation of both qubits.
    pub fixed_angle: f64,
    /// `4 pi n M k_i k_j`, equal to `pi/4` on the operating point.
    pub zz_angle: f64,
    pub global_phase: f64,
    /// `arg(d_gg d_ee / (d_ge d_eg))` of the propagated diagonal; `pi` for a CZ.
    pub entangling_phase: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CzResult {
    /// Diagonal qubit operator after one gate, little-endian in `(i, j)`.
    #[serde(skip)]
    pub unitary: DMatrix<C64>,
    /// `unitary` with the reported local and global phases removed.
    #[serde(skip)]
    pub corrected: DMatrix<C64>,
    pub report: PhaseReport,
    /// `max |corrected - diag(1, 1, 1, -1)|`.
    pub cz_defect: f64,
    /// Largest probability left outside the initial cavity state.
    pub cavity_leakage: f64,
}

fn common_mode_frequency(system: &RabiSystem) -> Result<f64, DynamicsError> {
    let w = *system
        .mode_freqs
        .first()
        .ok_or_else(|| DynamicsError::InvalidSystem("at least one mode is required".into()))?;
    if system.mode_freqs.iter().any(|x| ((x - w) / w).abs() > 1e-12) {
        return Err(DynamicsError::InvalidSystem("modes must be degenerate".into()));
    }
    Ok(w)
}

fn pair_subsystem(system: &RabiSystem, schedule: &GateSchedule, omega: f64) -> Result<RabiSystem, DynamicsError> {
    let (i, j) = schedule.pair;
    if i == j || i >= system.n_qubits() || j >= system.n_qubits() {
        return Err(DynamicsError::InvalidSystem(format!("invalid qubit pair ({i}, {j})")));
    }
    RabiSystem::new(
        vec![system.qubit_freqs[i], system.qubit_freqs[j]],
        system.mode_freqs.clone(),
        vec![schedule.kappa_i * omega, schedule.kappa_j * omega],
        vec![system.cx[i], system.cx[j]],
        vec![system.cz[i], system.cz[j]],
        system.cutoffs.clone(),
    )
}

fn cz_matrix() -> DMatrix<C64> {
    let one = C64::new(1.0, 0.0);
    DMatrix::from_diagonal(&DVector::from_vec(vec![one, one, one, -one]))
}

/// Runs the gate on the pair `schedule.pair` with all other qubits idle and
/// the cavity starting and ending in vacuum.
pub fn ultrafast_cz(schedule: &GateSchedule, system: &RabiSystem) -> Result<CzResult, DynamicsError> {
    system.validate()?;
    let omega = common_mode_frequency(system)?;
    let modes = system.n_modes();
    schedule.check_conditions(modes)?;
    let sub = pair_subsystem(system, schedule, omega)?;
    for (k, &q) in [schedule.pair.0, schedule.pair.1].iter().enumerate() {
        if system.cx[q].abs() > 1e-12 {
            return Err(DynamicsError::TransversalCouplingPresent { qubit: q, cx: sub.cx[k] });
        }
    }
    let t = schedule.gate_time(omega);
    let layout = sub.layout();
    let vacuum_modes = vec![0; modes];
    let mut diag = Vec::with_capacity(4);
    let mut leakage = 0.0f64;
    for q in 0..4 {
        let mut psi = DVector::<C64>::zeros(layout.dimension());
        let start = layout.index(q, &vacuum_modes);
        psi[start] = C64::new(1.0, 0.0);
        let out = evolve_analytic(&sub, &QuantumState::pure(layout.clone(), psi)?, t)?;
        let amp = match &out.repr {
            super::StateRepr::Pure(v) => v[start],
            super::StateRepr::Mixed(_) => unreachable!("pure input stays pure"),
        };
        leakage = leakage.max(1.0 - amp.norm_sqr());
        diag.push(amp);
    }
    let unitary = DMatrix::from_diagonal(&DVector::from_vec(diag.clone()));

    let n = schedule.n_periods as f64;
    let m = modes as f64;
    let ki = schedule.kappa_i * sub.cz[0];
    let kj = schedule.kappa_j * sub.cz[1];
    let local = [
        -(PI / 4.0) * (4.0 * n * sub.qubit_freqs[0] / omega - 1.0),
        -(PI / 4.0) * (4.0 * n * sub.qubit_freqs[1] / omega - 1.0),
    ];
    let report = PhaseReport {
        gate_time: t,
        local_angles: local,
        fixed_angle: -PI / 4.0,
        zz_angle: 4.0 * PI * n * m * ki * kj,
        global_phase: 2.0 * PI * n * m * (ki * ki + kj * kj),
        entangling_phase: (diag[3] * diag[0] / (diag[1] * diag[2])).arg(),
    };

    // zz rotation by pi/4 is CZ * exp(-i pi/4) * exp(-i pi/4 (sz_i + sz_j)),
    // so undoing U_loc and two fixed rotations leaves CZ up to a global phase.
    let corrected_diag: Vec<C64> = (0..4)
        .map(|q| {
            let (si, sj) = (spin(q, 0), spin(q, 1));
            let local_phase = (local[0] + 2.0 * report.fixed_angle) * si + (local[1] + 2.0 * report.fixed_angle) * sj;
            diag[q] * C64::from_polar(1.0, -local_phase - report.global_phase + PI / 4.0)
        })
        .collect();
    let corrected = DMatrix::from_diagonal(&DVector::from_vec(corrected_diag));
    let cz_defect = (&corrected - cz_matrix()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    Ok(CzResult { unitary, corrected, report, cz_defect, cavity_leakage: leakage })
}

/// `(|e,+> - |g,->)/sqrt(2)` with the first label on qubit 0, in the
/// little-endian qubit basis.
pub fn target_cluster_pair() -> DVector<C64> {
    DVector::from_vec(vec![C64::new(-0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0)])
}

fn plus() -> [C64; 2] {
    [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)]
}

fn fidelity_with_propagator(
    prop: &Propagator,
    system: &RabiSystem,
    cavity: &CavityFieldSpec,
    omega: f64,
) -> Result<f64, DynamicsError> {
    let layout = system.layout();
    let t = 2.0 * PI / omega;
    let per_mode: Vec<Vec<(f64, DVector<C64>)>> = system
        .cutoffs
        .iter()
        .zip(&system.mode_freqs)
        .map(|(c, w)| cavity_ensemble(cavity, *c, *w))
        .collect::<Result<_, _>>()?;

    let mut rho = DMatrix::<C64>::zeros(4, 4);
    let mut choice = vec![0usize; per_mode.len()];
    loop {
        let weight: f64 = choice.iter().zip(&per_mode).map(|(k, comps)| comps[*k].0).product();
        let modes: Vec<DVector<C64>> = choice.iter().zip(&per_mode).map(|(k, comps)| comps[*k].1.clone()).collect();
        let start = QuantumState::product(layout.clone(), &[plus(), plus()], &modes)?;
        let end = prop.evolve(&start, t);
        rho += end.reduced_qubits() * C64::new(weight, 0.0);
        // Odometer over ensemble components.
        let mut l = 0;
        while l < choice.len() {
            choice[l] += 1;
            if choice[l] < per_mode[l].len() {
                break;
            }
            choice[l] = 0;
            l += 1;
        }
        if l == choice.len() {
            break;
        }
    }

    // Undo U_loc = exp(i sum_j u_j sz_j).
    let u: Vec<f64> = system.qubit_freqs.iter().map(|wq| -(PI / 4.0) * (4.0 * wq / omega - 1.0)).collect();
    let correction: Vec<C64> = (0..4).map(|q| C64::from_polar(1.0, -(u[0] * spin(q, 0) + u[1] * spin(q, 1)))).collect();
    let target = target_cluster_pair();
    let mut f = C64::new(0.0, 0.0);
    for a in 0..4 {
        for b in 0..4 {
            f += target[a].conj() * correction[a] * rho[(a, b)] * correction[b].conj() * target[b];
        }
    }
    Ok(f.re)
}

fn check_pair_system(system: &RabiSystem) -> Result<f64, DynamicsError> {
    system.validate()?;
    if system.n_qubits() != 2 {
        return Err(DynamicsError::InvalidSystem("gate fidelity needs exactly two qubits".into()));
    }
    common_mode_frequency(system)
}

/// Fidelity of `|++>` evolved for one mode period with transversal weight
/// `cx` (and `c_z = sqrt(1 - cx^2)`), cavity traced out and `U_loc` undone,
/// against `(|e,+> - |g,->)/sqrt(2)`.
pub fn gate_fidelity(system: &RabiSystem, cavity: &CavityFieldSpec, cx: f64) -> Result<f64, DynamicsError> {
    let omega = check_pair_system(system)?;
    if !(cx.abs() <= 1.0) {
        return Err(DynamicsError::InvalidSystem(format!("c_x = {cx} outside [-1, 1]")));
    }
    let sys = system.with_transversal(cx);
    let prop = Propagator::from_system(&sys)?;
    fidelity_with_propagator(&prop, &sys, cavity, omega)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateFidelityRow {
    pub cx: f64,
    pub cavity: CavityFieldSpec,
    pub fidelity: f64,
}

/// Fidelities for every `(cx, cavity)` pair, cx-major. One diagonalisation
/// per `cx`; different `cx` values run in parallel.
pub fn gate_fidelity_sweep(
    system: &RabiSystem,
    cavities: &[CavityFieldSpec],
    cx_grid: &[f64],
) -> Result<Vec<GateFidelityRow>, DynamicsError> {
    let omega = check_pair_system(system)?;
    if cx_grid.is_empty() || cavities.is_empty() {
        return Err(DynamicsError::InvalidSystem("empty c_x grid or cavity list".into()));
    }
    if let Some(bad) = cx_grid.iter().find(|c| !(c.abs() <= 1.0)) {
        return Err(DynamicsError::InvalidSystem(format!("c_x = {bad} outside [-1, 1]")));
    }
    let row = |cx: &f64| -> Result<Vec<GateFidelityRow>, DynamicsError> {
        let sys = system.with_transversal(*cx);
        let prop = Propagator::from_system(&sys)?;
        cavities
            .iter()
            .map(|cav| {
                Ok(GateFidelityRow { cx: *cx, cavity: *cav, fidelity: fidelity_with_propagator(&prop, &sys, cav, omega)? })
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<_> = {
        use rayon::prelude::*;
        cx_grid.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<_> = cx_grid.iter().map(row).collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn operating_point_kappa() {
        let s = GateSchedule::symmetric((0, 1), 1, 2);
        assert_relative_eq!(s.kappa_i, 1.0 / (4.0 * 2f64.sqrt()), epsilon = 1e-15);
        let (a, b) = s.condition_residuals(2);
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        assert_relative_eq!(s.gate_time(2.0 * PI * 5.0), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn violated_conditions_are_reported() {
        let mut s = GateSchedule::symmetric((0, 1), 1, 2);
        s.kappa_j *= 1.1;
        let sys = RabiSystem::symmetric(2, 2, 1.0, 0.25, s.kappa_i, 0.0, 4).unwrap();
        assert!(matches!(ultrafast_cz(&s, &sys), Err(DynamicsError::ConditionViolated { .. })));
    }

    #[test]
    fn target_state_is_normalised() {
        assert_relative_eq!(target_cluster_pair().norm(), 1.0, epsilon = 1e-15);
    }
}
