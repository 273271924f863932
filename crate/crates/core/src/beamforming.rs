//! Closed-form optimal passive (RIS phase) and active (BS) beamformers.
//!
//! With `V = g a_Mᴴ` the matrix `R = V* Vᵀ` is rank one, so its dominant
//! eigenpair is available directly: `λ₁ = ‖a_M‖²·‖g‖² = M Σ|hᵢ|²` and
//! `u₁ = conj(g)/‖g‖`. Aligning the RIS phases with `u₁` attains the
//! triangle-inequality bound and gives `γ = M γ̄ (Σ|hᵢ|)²`.
//!
//! [`brute_force_phase_search`] enumerates a quantized phase lattice for
//! tiny K and certifies the closed form.

use num_complex::Complex64;

use crate::channel::CascadedChannel;
use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::vector::ComplexVector;

/// Dominant eigenpair of the rank-1 matrix `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda1: f64,
    pub u1: ComplexVector,
}

pub fn rank1_eigenpair(channel: &CascadedChannel) -> Result<Eigenpair> {
    let g = channel.ris_factor();
    let g_norm_sqr = g.norm_sqr();
    if g_norm_sqr == 0.0 {
        return Err(Error::DegenerateChannel("all-zero fading vector"));
    }
    let inv = 1.0 / g_norm_sqr.sqrt();
    let u1 = g.iter().map(|z| z.conj() * inv).collect();
    Ok(Eigenpair {
        lambda1: channel.tx_response().norm_sqr() * g_norm_sqr,
        u1: ComplexVector::from_vec_unchecked(u1),
    })
}

/// Unit-modulus RIS phase vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShifts {
    pub phases: ComplexVector,
    /// Set when some entry of `u₁` was exactly zero and its phase defaulted to 1.
    pub degenerate: bool,
}

/// `φᵢ = exp(j·arg u₁ᵢ)`, which makes every term of `u₁ᴴφ` real and
/// non-negative so that `|u₁ᴴφ| = Σ|u₁ᵢ|`.
pub fn optimal_phase_shifts(u1: &ComplexVector) -> PhaseShifts {
    let mut degenerate = false;
    let phases = u1
        .iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                degenerate = true;
                Complex64::new(1.0, 0.0)
            } else {
                z / r
            }
        })
        .collect();
    PhaseShifts {
        phases: ComplexVector::from_vec_unchecked(phases),
        degenerate,
    }
}

/// Matched filter `w = (φᵀV)ᴴ / ‖φᵀV‖`.
///
/// `φᵀV = (φᵀg)·a_Mᴴ`, so `w = conj(φᵀg)·a_M / (|φᵀg|·‖a_M‖)`.
pub fn optimal_tx_beamformer(
    phase_shifts: &ComplexVector,
    channel: &CascadedChannel,
) -> Result<ComplexVector> {
    let s = phase_shifts.dot(channel.ris_factor())?;
    let a = channel.tx_response();
    let norm = s.norm() * a.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateChannel(
            "phase-combined channel φᵀV is zero",
        ));
    }
    let scale = s.conj() / norm;
    Ok(ComplexVector::from_vec_unchecked(
        a.iter().map(|z| z * scale).collect(),
    ))
}

/// `γ = γ̄ |φᵀ V w|²` evaluated as `γ̄ |φᵀg|² |a_Mᴴ w|²`.
pub fn received_snr(
    phase_shifts: &ComplexVector,
    w: &ComplexVector,
    channel: &CascadedChannel,
    gamma_bar: f64,
) -> Result<f64> {
    check_gamma_bar(gamma_bar)?;
    channel.tx_response().check_len(w.len())?;
    let s = phase_shifts.dot(channel.ris_factor())?;
    let t = channel.tx_response().hdot(w)?;
    Ok(gamma_bar * (s * t).norm_sqr())
}

/// Maximum received SNR `M γ̄ (Σ|hᵢ|)²`.
pub fn closed_form_snr(h: &ComplexVector, m_antennas: usize, gamma_bar: f64) -> Result<f64> {
    check_gamma_bar(gamma_bar)?;
    if m_antennas == 0 {
        return Err(domain("closed_form_snr: M must be at least 1"));
    }
    let y: f64 = h.iter().map(|z| z.norm()).sum();
    Ok(m_antennas as f64 * gamma_bar * y * y)
}

fn check_gamma_bar(gamma_bar: f64) -> Result<()> {
    if gamma_bar >= 0.0 && gamma_bar.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "average SNR must be finite and non-negative, got {gamma_bar}"
        )))
    }
}

/// Jointly optimal beamformers and the SNR they achieve.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub phase_shifts: ComplexVector,
    pub tx_beamformer: ComplexVector,
    pub lambda1: f64,
    pub u1: ComplexVector,
    pub snr: f64,
    pub degenerate: bool,
}

/// Runs the full chain: eigenpair, RIS phases, matched BS beamformer, SNR.
pub fn optimize(channel: &CascadedChannel, gamma_bar: f64) -> Result<BeamformingSolution> {
    check_gamma_bar(gamma_bar)?;
    let Eigenpair { lambda1, u1 } = rank1_eigenpair(channel)?;
    let PhaseShifts { phases, degenerate } = optimal_phase_shifts(&u1);
    let w = optimal_tx_beamformer(&phases, channel)?;
    let snr = received_snr(&phases, &w, channel, gamma_bar)?;
    Ok(BeamformingSolution {
        phase_shifts: phases,
        tx_beamformer: w,
        lambda1,
        u1,
        snr,
        degenerate,
    })
}

/// Largest supported K for the exhaustive lattice search.
pub const MAX_BRUTE_FORCE_ELEMENTS: usize = 4;
pub const MIN_GRID_POINTS: usize = 8;

/// Best point of the uniform phase lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOptimum {
    pub phases: ComplexVector,
    pub snr: f64,
    /// Lattice index of each phase, `φᵢ = exp(j 2π indexᵢ / grid)`.
    pub indices: Vec<usize>,
}

/// Exhaustively maximizes `γ̄ ‖φᵀV‖²` over `φᵢ ∈ {exp(j2πn/G)}`.
///
/// Work is split on the first coordinate; ties resolve to the
/// lexicographically smallest index tuple regardless of the split.
pub fn brute_force_phase_search(
    channel: &CascadedChannel,
    gamma_bar: f64,
    grid_points_per_phase: usize,
    exec: &Execution,
) -> Result<LatticeOptimum> {
    check_gamma_bar(gamma_bar)?;
    let k = channel.k_elements();
    if k > MAX_BRUTE_FORCE_ELEMENTS {
        return Err(Error::Capability(format!(
            "exhaustive phase search supports K <= {MAX_BRUTE_FORCE_ELEMENTS}, got {k}"
        )));
    }
    if grid_points_per_phase < MIN_GRID_POINTS {
        return Err(domain(format!(
            "grid must have at least {MIN_GRID_POINTS} points per phase, got {grid_points_per_phase}"
        )));
    }
    let grid = grid_points_per_phase;
    let table: Vec<Complex64> = (0..grid)
        .map(|n| Complex64::from_polar(1.0, std::f64::consts::TAU * n as f64 / grid as f64))
        .collect();
    let g = channel.ris_factor().as_slice();
    let scale = gamma_bar * channel.tx_response().norm_sqr();

    let partials = exec.map_indexed(grid, |first| {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut idx = vec![0usize; k];
        idx[0] = first;
        search_suffix(g, &table, 1, g[0] * table[first], &mut idx, &mut best);
        best
    });
    // Partitions arrive in first-index order; strict `>` keeps the earliest.
    let (best_obj, indices) =
        partials
            .into_iter()
            .fold((f64::NEG_INFINITY, Vec::new()), |acc, cand| {
                if cand.0 > acc.0 {
                    cand
                } else {
                    acc
                }
            });
    let phases = indices.iter().map(|&n| table[n]).collect();
    Ok(LatticeOptimum {
        phases: ComplexVector::from_vec_unchecked(phases),
        snr: scale * best_obj,
        indices,
    })
}

fn search_suffix(
    g: &[Complex64],
    table: &[Complex64],
    depth: usize,
    partial: Complex64,
    idx: &mut Vec<usize>,
    best: &mut (f64, Vec<usize>),
) {
    if depth == g.len() {
        let obj = partial.norm_sqr();
        if obj > best.0 {
            *best = (obj, idx.clone());
        }
        return;
    }
    for (n, phasor) in table.iter().enumerate() {
        idx[depth] = n;
        search_suffix(g, table, depth + 1, partial + g[depth] * phasor, idx, best);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{cascaded_channel, sample_fading, LinkGeometry};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_channel(k: usize, m: usize, seed: u64) -> CascadedChannel {
        let los = LinkGeometry::symmetric(k, m).unwrap().los_channel();
        let h = sample_fading(k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        cascaded_channel(&h, &los).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn scalar_channel() {
        let ch = random_unit_channel();
        let ep = rank1_eigenpair(&ch).unwrap();
        assert_eq!(ep.lambda1, 1.0);
        assert_eq!(ep.u1.as_slice(), &[Complex64::new(1.0, 0.0)]);
        let phi = optimal_phase_shifts(&ep.u1).phases;
        let w = optimal_tx_beamformer(&phi, &ch).unwrap();
        assert_eq!(w.as_slice(), &[Complex64::new(1.0, 0.0)]);
    }

    fn random_unit_channel() -> CascadedChannel {
        let los = LinkGeometry::symmetric(1, 1).unwrap().los_channel();
        cascaded_channel(&ComplexVector::from_real(&[1.0]).unwrap(), &los).unwrap()
    }

    #[test]
    fn eigenvalue_is_m_times_fading_energy() {
        for seed in 0..20 {
            let ch = random_channel(16, 16, seed);
            let ep = rank1_eigenpair(&ch).unwrap();
            let want = 16.0 * ch.fading().norm_sqr();
            assert!(rel(ep.lambda1, want) < 1e-13);
            assert!((ep.u1.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_fading_is_degenerate() {
        let los = LinkGeometry::symmetric(4, 4).unwrap().los_channel();
        let ch = cascaded_channel(&ComplexVector::from_real(&[0.0; 4]).unwrap(), &los).unwrap();
        assert!(matches!(
            rank1_eigenpair(&ch),
            Err(Error::DegenerateChannel(_))
        ));
        let phi = ComplexVector::from_real(&[1.0; 4]).unwrap();
        assert!(matches!(
            optimal_tx_beamformer(&phi, &ch),
            Err(Error::DegenerateChannel(_))
        ));
    }

    #[test]
    fn real_positive_eigenvector_gives_zero_phases() {
        let u = ComplexVector::from_real(&[0.5, 0.5, 0.5, 0.5]).unwrap();
        let p = optimal_phase_shifts(&u);
        assert!(!p.degenerate);
        assert!(p.phases.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn zero_entry_flags_degeneracy() {
        let u =
            ComplexVector::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)]).unwrap();
        let p = optimal_phase_shifts(&u);
        assert!(p.degenerate);
        assert_eq!(p.phases[0], Complex64::new(1.0, 0.0));
        assert!((p.phases[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn phases_attain_triangle_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u: Vec<Complex64> = (0..9)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let u = ComplexVector::new(u).unwrap();
            let phi = optimal_phase_shifts(&u).phases;
            assert!(phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            let lhs = u.hdot(&phi).unwrap().norm();
            let rhs: f64 = u.iter().map(|z| z.norm()).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn tx_beamformer_is_unit_norm_matched_filter() {
        for seed in 0..20 {
            let ch = random_channel(16, 4, seed);
            let phi = optimal_phase_shifts(&rank1_eigenpair(&ch).unwrap().u1).phases;
            let w = optimal_tx_beamformer(&phi, &ch).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-13);
            // |φᵀ V w| = ‖φᵀ V‖ from the dense matrix
            let v = ch.to_dense();
            let row: Vec<Complex64> = (0..v.cols())
                .map(|j| (0..v.rows()).map(|i| phi[i] * v.get(i, j)).sum())
                .collect();
            let row_norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let proj: Complex64 = row.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            assert!(rel(proj.norm(), row_norm) < 1e-12);
        }
    }

    #[test]
    fn received_snr_edge_cases() {
        let ch = random_channel(4, 4, 1);
        let sol = optimize(&ch, 1.0).unwrap();
        assert_eq!(
            received_snr(&sol.phase_shifts, &sol.tx_beamformer, &ch, 0.0).unwrap(),
            0.0
        );
        assert!(received_snr(&sol.phase_shifts, &sol.tx_beamformer, &ch, -1.0).is_err());
        let w_bad = ComplexVector::from_real(&[1.0]).unwrap();
        assert!(matches!(
            received_snr(&sol.phase_shifts, &w_bad, &ch, 1.0),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn closed_form_examples() {
        let one = ComplexVector::from_real(&[1.0]).unwrap();
        assert_eq!(closed_form_snr(&one, 1, 1.0).unwrap(), 1.0);
        let two = ComplexVector::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(closed_form_snr(&two, 4, 2.0).unwrap(), 32.0);
        assert!(closed_form_snr(&two, 0, 2.0).is_err());
        assert!(closed_form_snr(&two, 4, f64::NAN).is_err());
    }

    #[test]
    fn solution_invariants_and_three_way_agreement() {
        for seed in 0..50 {
            let gamma_bar = 0.37;
            let ch = random_channel(16, 16, seed);
            let sol = optimize(&ch, gamma_bar).unwrap();
            assert!(sol
                .phase_shifts
                .iter()
                .all(|z| (z.norm() - 1.0).abs() < 1e-12));
            assert!((sol.tx_beamformer.norm() - 1.0).abs() < 1e-12);
            assert!((sol.u1.norm() - 1.0).abs() < 1e-12);
            let via_eig =
                gamma_bar * sol.lambda1 * sol.u1.hdot(&sol.phase_shifts).unwrap().norm_sqr();
            let via_sum: f64 =
                gamma_bar * sol.lambda1 * sol.u1.iter().map(|z| z.norm()).sum::<f64>().powi(2);
            let closed = closed_form_snr(ch.fading(), 16, gamma_bar).unwrap();
            assert!(rel(sol.snr, via_eig) < 1e-10);
            assert!(rel(sol.snr, via_sum) < 1e-10);
            assert!(rel(sol.snr, closed) < 1e-10);
        }
    }

    #[test]
    fn brute_force_rejects_large_k_and_coarse_grid() {
        let ch = random_channel(9, 1, 0);
        assert!(matches!(
            brute_force_phase_search(&ch, 1.0, 16, &Execution::Sequential),
            Err(Error::Capability(_))
        ));
        let ch = random_channel(4, 1, 0);
        assert!(brute_force_phase_search(&ch, 1.0, 7, &Execution::Sequential).is_err());
    }

    #[test]
    fn brute_force_single_element_any_phase_is_optimal() {
        let ch = random_channel(1, 4, 5);
        let opt = brute_force_phase_search(&ch, 2.0, 64, &Execution::Sequential).unwrap();
        let want = 4.0 * 2.0 * ch.fading().norm_sqr();
        assert!(rel(opt.snr, want) < 1e-12);
    }

    #[test]
    fn brute_force_is_partition_independent() {
        let ch = random_channel(4, 4, 9);
        let seq = brute_force_phase_search(&ch, 1.0, 16, &Execution::Sequential).unwrap();
        for workers in [1, 2, 3] {
            let par = brute_force_phase_search(&ch, 1.0, 16, &Execution::parallel(Some(workers)))
                .unwrap();
            assert_eq!(seq, par);
        }
    }
}
