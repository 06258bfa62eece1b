use std::f64::consts::PI;

use approx::assert_relative_eq;
use usc_qec::resonator::*;

/// Lumped-element discretisation of the same circuit: `cells` line sections
/// in total, each junction an inductor `L_J` in parallel with `C_s` between
/// two nodes. Both the stiffness and capacitance matrices are tridiagonal,
/// so eigenvalues of `K v = w^2 C v` are located by Sylvester inertia
/// counting and bisection.
struct LumpedChain {
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    c_diag: Vec<f64>,
    c_off: Vec<f64>,
}

impl LumpedChain {
    fn new(p: &ResonatorParams, cells: usize) -> Self {
        let segs = p.n_junctions + 1;
        let per = cells / segs;
        let dx = p.segment_length() / per as f64;
        let nodes = segs * (per + 1);
        let mut k_diag = vec![0.0; nodes];
        let mut k_off = vec![0.0; nodes - 1];
        let mut c_diag = vec![0.0; nodes];
        let mut c_off = vec![0.0; nodes - 1];
        let cs = p.shunt_capacitance();
        for s in 0..segs {
            let base = s * (per + 1);
            for i in 0..per {
                let (u, w) = (base + i, base + i + 1);
                let kl = 1.0 / (p.l_per_m * dx);
                k_diag[u] += kl;
                k_diag[w] += kl;
                k_off[u] -= kl;
                c_diag[u] += p.c_per_m * dx / 2.0;
                c_diag[w] += p.c_per_m * dx / 2.0;
            }
            if s + 1 < segs {
                let (u, w) = (base + per, base + per + 1);
                k_diag[u] += 1.0 / p.l_j;
                k_diag[w] += 1.0 / p.l_j;
                k_off[u] -= 1.0 / p.l_j;
                c_diag[u] += cs;
                c_diag[w] += cs;
                c_off[u] -= cs;
            }
        }
        Self { k_diag, k_off, c_diag, c_off }
    }

    fn count_below(&self, lambda: f64) -> usize {
        let mut negatives = 0;
        let mut pivot = 0.0f64;
        for i in 0..self.k_diag.len() {
            let diag = self.k_diag[i] - lambda * self.c_diag[i];
            pivot = if i == 0 {
                diag
            } else {
                let off = self.k_off[i - 1] - lambda * self.c_off[i - 1];
                diag - off * off / pivot
            };
            if pivot == 0.0 {
                pivot = 1e-300;
            }
            if pivot < 0.0 {
                negatives += 1;
            }
        }
        negatives
    }

    /// `index`-th nonzero angular frequency (0-based) in rad/ns.
    fn omega(&self, index: usize, upper: f64) -> f64 {
        let target = index + 2; // skip the uniform zero mode
        let (mut lo, mut hi) = (0.0f64, (upper * 1e9).powi(2));
        assert!(self.count_below(hi) >= target);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (0.5 * (lo + hi)).sqrt() * 1e-9
    }
}

#[test]
fn undoped_line_has_open_open_harmonics() {
    let p = ResonatorParams::synthetic(0);
    let set = mode_equation_roots(&p, 22.0).unwrap();
    let fundamental = PI * p.phase_velocity() / p.length_m * 1e-9;
    assert_eq!(set.modes.len(), 4);
    for (m, mode) in set.modes.iter().enumerate() {
        assert_relative_eq!(mode.omega, (m + 1) as f64 * fundamental, max_relative = 1e-10);
    }
}

#[test]
fn undoped_masses_are_half_the_line_capacitance() {
    let p = ResonatorParams::synthetic(0);
    let set = mode_equation_roots(&p, 22.0).unwrap();
    for m in &set.effective_masses {
        assert_relative_eq!(*m, p.c_per_m * p.length_m / 2.0, max_relative = 1e-10);
    }
}

#[test]
fn single_junction_matches_lumped_chain() {
    let mut p = ResonatorParams::synthetic(1);
    p.c_j *= 0.6;
    p.l_j *= 1.7;
    let set = mode_equation_roots(&p, 20.0).unwrap();
    let chain = LumpedChain::new(&p, 2000);
    assert!(set.modes.len() >= 5);
    for (i, mode) in set.modes.iter().enumerate() {
        let oracle = chain.omega(i, 25.0 * 2.0 * PI);
        assert!(
            ((mode.omega - oracle) / oracle).abs() < 1e-3,
            "mode {i}: {} vs lumped {}",
            mode.omega,
            oracle
        );
    }
}

#[test]
fn three_junctions_match_lumped_chain() {
    let mut p = ResonatorParams::synthetic(3);
    p.c_j *= 1.3;
    let set = mode_equation_roots(&p, 12.0).unwrap();
    let chain = LumpedChain::new(&p, 2000);
    for (i, mode) in set.modes.iter().enumerate() {
        let oracle = chain.omega(i, 30.0 * 2.0 * PI);
        assert!(((mode.omega - oracle) / oracle).abs() < 1e-3, "mode {i}");
    }
}

#[test]
fn every_mode_satisfies_boundary_conditions() {
    for n in [1, 2, 5] {
        for scale in [0.5, 1.0, 2.0] {
            let mut p = ResonatorParams::synthetic(n);
            p.c_j *= scale;
            let set = mode_equation_roots(&p, 16.0).unwrap();
            for mode in &set.modes {
                let r = boundary_residuals(&p, mode);
                assert!(r.max() < 1e-8, "n={n} scale={scale} {:?} {:?}", mode.family, r);
            }
        }
    }
}

#[test]
fn frequencies_sorted_and_masses_positive() {
    let mut p = ResonatorParams::synthetic(4);
    p.c_j *= 0.8;
    let set = mode_equation_roots(&p, 15.0).unwrap();
    assert!(set.modes.windows(2).all(|w| w[0].omega < w[1].omega));
    assert!(set.effective_masses.iter().all(|&m| m > 0.0));
    assert_eq!(set.grid.len(), 5 * (SAMPLES_PER_SEGMENT + 1));
    assert_eq!(set.mode_functions[0].len(), set.grid.len());
}

#[test]
fn mass_quadrature_matches_richardson_extrapolation() {
    let mut p = ResonatorParams::synthetic(1);
    p.c_j *= 0.7;
    let set = mode_equation_roots(&p, 16.0).unwrap();
    for mode in &set.modes {
        let coarse = effective_mass(&p, mode, 1024);
        let fine = effective_mass(&p, mode, 2048);
        let extrapolated = fine + (fine - coarse) / 15.0;
        let production = effective_mass(&p, mode, SAMPLES_PER_SEGMENT);
        assert_relative_eq!(production, extrapolated, max_relative = 1e-8);
    }
}

#[test]
fn mass_is_invariant_under_sign_flip() {
    let p = ResonatorParams::synthetic(2);
    let set = mode_equation_roots(&p, 12.0).unwrap();
    for mode in &set.modes {
        let a = effective_mass(&p, mode, SAMPLES_PER_SEGMENT);
        let b = effective_mass(&p, &mode.flipped(), SAMPLES_PER_SEGMENT);
        assert_eq!(a, b);
    }
}

#[test]
fn tuned_chain_is_degenerate_with_sine_profile() {
    let p = ResonatorParams::synthetic(5);
    let manifold = degenerate_manifold(&p, 1e-8).unwrap();
    assert_eq!(manifold.mode_count, 6);
    assert_eq!(manifold.coupled_mode_count, 5);
    assert!(manifold.spread < 1e-8);
    assert_relative_eq!(manifold.degenerate_frequency / (2.0 * PI), 5.0, max_relative = 1e-12);

    // The lowest band's flux drops at the manifold follow the closed form.
    let set = mode_equation_roots(&p, 5.2).unwrap();
    let band1 = set
        .modes
        .iter()
        .find(|m| m.family == ModeFamily::Band { p: 1 } && (m.omega - manifold.degenerate_frequency).abs() < 1e-6)
        .unwrap();
    let drops = band1.flux_drops();
    let ratio = manifold.coupling_profile[2] / drops[2];
    for (d, prof) in drops.iter().zip(&manifold.coupling_profile) {
        assert!((d * ratio - prof).abs() < 1e-10);
    }
    for j in 0..5 {
        assert!((manifold.coupling_profile[j] - manifold.coupling_profile[4 - j]).abs() < 1e-15);
    }
}

#[test]
fn tuned_chain_degeneracy_seen_by_lumped_chain() {
    let p = ResonatorParams::synthetic(2);
    let chain = LumpedChain::new(&p, 2001);
    let bar = p.manifold_frequency();
    let set = mode_equation_roots(&p, 5.5).unwrap();
    let first = set.modes.iter().position(|m| (m.omega - bar).abs() < 1e-6 * bar).unwrap();
    for i in first..first + 3 {
        let w = chain.omega(i, 20.0 * 2.0 * PI);
        assert!(((w - bar) / bar).abs() < 1e-3, "lumped mode {i} at {w}, manifold {bar}");
    }
}

#[test]
fn profile_squares_sum_to_one() {
    for n in 1..12 {
        let s: f64 = coupling_profile(n).iter().map(|x| x * x).sum();
        // sum_j sin^2(pi j/(N+1)) = (N+1)/2
        assert_relative_eq!(s, 1.0, epsilon = 1e-13);
    }
}

#[test]
fn five_junction_profile_values() {
    let prof = coupling_profile(5);
    let expected = [0.5 / 3f64.sqrt(), 0.5, 1.0 / 3f64.sqrt(), 0.5, 0.5 / 3f64.sqrt()];
    for (a, b) in prof.iter().zip(expected) {
        assert_relative_eq!(*a, b, epsilon = 1e-14);
    }
}
