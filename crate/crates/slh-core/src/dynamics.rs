//! Master-equation time integration and the classical-noise embeddings
//! (Wiener quadrature coupling, Poisson unitary kicks, classical diffusion
//! on a truncated oscillator), with expectation-value trajectory output.
//!
//! Integration is fixed-step fourth-order Runge-Kutta of `ρ̇ = 𝓛*ρ`; trace,
//! Hermiticity, and positivity are monitored at every stored state and a
//! breach beyond the thresholds aborts with the offending time instead of
//! being clipped away.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operator::{annihilator, Operator, C64};
use crate::slh::SLHTriple;

/// `|Tr ρ − 1|` ceiling along a trajectory.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-9;
/// `‖ρ − ρ†‖` ceiling along a trajectory.
pub const HERMITICITY_DRIFT_LIMIT: f64 = 1e-9;
/// Minimum-eigenvalue floor along a trajectory.
pub const POSITIVITY_FLOOR: f64 = -1e-7;

/// Minimum oscillator truncation for the diffusion embedding.
pub const MIN_DIFFUSION_TRUNCATION: usize = 8;

/// A density matrix: Hermitian, unit trace, positive semidefinite within
/// the tolerance it was validated at.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: Operator,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace, and positivity within `tol`.
    pub fn new(rho: Operator, tol: f64) -> Result<Self> {
        let herm = rho.hermitian_deviation();
        if herm > tol {
            return Err(Error::InvalidState {
                message: String::from("state is not Hermitian"),
                deviation: herm,
            });
        }
        let trace = rho.trace();
        let tr_dev = libm::sqrt((trace - C64::new(1.0, 0.0)).norm_sqr());
        if tr_dev > tol {
            return Err(Error::InvalidState {
                message: String::from("state trace is not 1"),
                deviation: tr_dev,
            });
        }
        if !rho.is_psd_within(tol) {
            return Err(Error::InvalidState {
                message: String::from("state is not positive semidefinite"),
                deviation: -rho.min_eigenvalue(),
            });
        }
        Ok(DensityMatrix { rho })
    }

    pub(crate) fn unchecked(rho: Operator) -> Self {
        DensityMatrix { rho }
    }

    /// Normalized pure state `|ψ⟩⟨ψ|`.
    pub fn pure_state(amplitudes: &[C64]) -> Result<Self> {
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr <= 0.0 || !norm_sqr.is_finite() {
            return Err(Error::InvalidState {
                message: String::from("pure state amplitudes have zero or non-finite norm"),
                deviation: f64::INFINITY,
            });
        }
        let dim = amplitudes.len();
        let rho = Operator::from_fn(dim, |i, j| amplitudes[i] * amplitudes[j].conj() / norm_sqr);
        Ok(DensityMatrix { rho })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            rho: Operator::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    /// Truncated coherent state `|α⟩⟨α|`, renormalized on the truncation.
    pub fn coherent(dim: usize, alpha: C64) -> Result<Self> {
        let mut amp = Vec::with_capacity(dim);
        let mut term = C64::new(1.0, 0.0);
        amp.push(term);
        for n in 1..dim {
            term = term * alpha / C64::new(libm::sqrt(n as f64), 0.0);
            amp.push(term);
        }
        DensityMatrix::pure_state(&amp)
    }

    pub fn operator(&self) -> &Operator {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }
}

/// `Tr(ρX)`.
pub fn expectation(rho: &DensityMatrix, x: &Operator) -> Result<C64> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: x.dim(),
            context: "expectation",
        });
    }
    Ok((rho.operator() * x).trace())
}

/// A stored master-equation solution: a strictly increasing time grid, one
/// state per time, and any recorded expectation-value series.
#[derive(Clone, Debug)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<DensityMatrix>,
    observables: Vec<(String, Vec<C64>)>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("non-empty trajectory")
    }

    /// Evaluates `Tr(ρ_t X)` along the trajectory and stores the series
    /// under `name`.
    pub fn record_observable(&mut self, name: impl Into<String>, x: &Operator) -> Result<()> {
        let series = self
            .states
            .iter()
            .map(|rho| expectation(rho, x))
            .collect::<Result<Vec<C64>>>()?;
        self.observables.push((name.into(), series));
        Ok(())
    }

    pub fn observables(&self) -> &[(String, Vec<C64>)] {
        &self.observables
    }

    pub fn observable(&self, name: &str) -> Option<&[C64]> {
        self.observables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, series)| series.as_slice())
    }
}

/// Precomputed pieces of `𝓛*ρ = Σ LρL† − ½{K, ρ} − i[H, ρ]` with
/// `K = Σ L†L`.
struct Predual {
    coupling: Vec<(Operator, Operator)>, // (L, L†)
    damping: Operator,                   // K = Σ L†L
    hamiltonian: Operator,
}

impl Predual {
    fn new(triple: &SLHTriple) -> Self {
        let n = triple.channels();
        let d = triple.dim();
        let mut coupling = Vec::with_capacity(n);
        let mut damping = Operator::zeros(d);
        for i in 0..n {
            let l = triple.l(i).clone();
            let ld = l.dagger();
            damping = &damping + &(&ld * &l);
            coupling.push((l, ld));
        }
        Predual {
            coupling,
            damping,
            hamiltonian: triple.h().clone(),
        }
    }

    fn apply(&self, rho: &Operator) -> Operator {
        let mut out = Operator::zeros(rho.dim());
        for (l, ld) in &self.coupling {
            out = &out + &(&(l * rho) * ld);
        }
        let anti = &(&self.damping * rho) + &(rho * &self.damping);
        out = &out - &anti.scale(C64::new(0.5, 0.0));
        let comm = &(&self.hamiltonian * rho) - &(rho * &self.hamiltonian);
        &out - &comm.scale(C64::new(0.0, 1.0))
    }
}

fn rk4_step(predual: &Predual, rho: &Operator, dt: f64) -> Operator {
    let half = C64::new(dt / 2.0, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = predual.apply(rho);
    let k2 = predual.apply(&(rho + &k1.scale(half)));
    let k3 = predual.apply(&(rho + &k2.scale(half)));
    let k4 = predual.apply(&(rho + &k3.scale(full)));
    let sum = &(&k1 + &k4) + &(&k2 + &k3).scale(C64::new(2.0, 0.0));
    rho + &sum.scale(C64::new(dt / 6.0, 0.0))
}

fn guard_state(rho: &Operator, time: f64) -> Result<()> {
    let tr = rho.trace();
    let tr_dev = libm::sqrt((tr - C64::new(1.0, 0.0)).norm_sqr());
    if !tr_dev.is_finite() || tr_dev > TRACE_DRIFT_LIMIT {
        return Err(Error::Diverged {
            time,
            message: format!("trace drift {tr_dev:.3e} exceeds {TRACE_DRIFT_LIMIT:.0e}"),
        });
    }
    let herm = rho.hermitian_deviation();
    if !herm.is_finite() || herm > HERMITICITY_DRIFT_LIMIT {
        return Err(Error::Diverged {
            time,
            message: format!("Hermiticity drift {herm:.3e} exceeds {HERMITICITY_DRIFT_LIMIT:.0e}"),
        });
    }
    if !rho.is_psd_within(-POSITIVITY_FLOOR) {
        let min_eig = rho.min_eigenvalue();
        return Err(Error::Diverged {
            time,
            message: format!(
                "smallest eigenvalue {min_eig:.3e} below the floor {POSITIVITY_FLOOR:.0e}"
            ),
        });
    }
    Ok(())
}

/// Fixed-step RK4 integration of `ρ̇ = 𝓛*ρ` from `t = 0` to `t_end`,
/// storing every step (a trailing partial step lands exactly on `t_end`).
pub fn integrate_master(
    triple: &SLHTriple,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::NonPositive {
            what: "integration step dt",
            value: dt,
        });
    }
    if !t_end.is_finite() || t_end < 0.0 {
        return Err(Error::NonPositive {
            what: "integration horizon t_end",
            value: t_end,
        });
    }
    if rho0.dim() != triple.dim() {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: triple.dim(),
            context: "integrate_master initial state",
        });
    }

    let predual = Predual::new(triple);
    let full_steps = libm::floor(t_end / dt + 1e-9) as usize;
    let remainder = t_end - full_steps as f64 * dt;

    let mut rho = rho0.operator().clone();
    let mut times = Vec::with_capacity(full_steps + 2);
    let mut states = Vec::with_capacity(full_steps + 2);
    times.push(0.0);
    states.push(DensityMatrix::unchecked(rho.clone()));

    for step in 1..=full_steps {
        rho = rk4_step(&predual, &rho, dt);
        let t = step as f64 * dt;
        guard_state(&rho, t)?;
        times.push(t);
        states.push(DensityMatrix::unchecked(rho.clone()));
    }
    if remainder > 1e-9 * dt {
        rho = rk4_step(&predual, &rho, remainder);
        guard_state(&rho, t_end)?;
        times.push(t_end);
        states.push(DensityMatrix::unchecked(rho));
    }

    Ok(Trajectory {
        times,
        states,
        observables: Vec::new(),
    })
}

/// Quadrature coupling to a Wiener quantum noise: returns `(I, −iE, H)`,
/// whose master equation is `ρ̇ = EρE − ½{E², ρ} − i[H, ρ]`.
pub fn embed_quadrature(e: &Operator, h: &Operator, tol: f64) -> Result<SLHTriple> {
    let dev = e.hermitian_deviation();
    if dev > tol {
        return Err(Error::NonHermitian {
            context: "quadrature coupling coefficient",
            deviation: dev,
        });
    }
    let dev = h.hermitian_deviation();
    if dev > tol {
        return Err(Error::NonHermitian {
            context: "quadrature Hamiltonian",
            deviation: dev,
        });
    }
    if e.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: e.dim(),
            right: h.dim(),
            context: "embed_quadrature",
        });
    }
    SLHTriple::new(
        alloc::vec![alloc::vec![Operator::identity(e.dim())]],
        alloc::vec![e.scale(C64::new(0.0, -1.0))],
        h.clone(),
    )
}

/// Unitary kicks at Poisson-distributed times with rate `nu`: returns
/// `(S, √ν(S − 1), (iν/2)(S − S†))`, the triple whose master equation is
/// `ρ̇ = ν(SρS† − ρ)`; that equality is the defining contract.
pub fn embed_poisson(s: &Operator, nu: f64, tol: f64) -> Result<SLHTriple> {
    let dev = s.unitary_deviation();
    if dev > tol {
        return Err(Error::NonUnitary {
            context: "Poisson kick operator",
            deviation: dev,
        });
    }
    if !nu.is_finite() || nu <= 0.0 {
        return Err(Error::NonPositive {
            what: "Poisson rate",
            value: nu,
        });
    }
    let dim = s.dim();
    let coupling = (s - &Operator::identity(dim)).scale(C64::new(libm::sqrt(nu), 0.0));
    let hamiltonian = (s - &s.dagger()).scale(C64::new(0.0, nu / 2.0));
    SLHTriple::new(
        alloc::vec![alloc::vec![s.clone()]],
        alloc::vec![coupling],
        hamiltonian,
    )
}

/// Position quadrature `(a + a†)/√2` on an `dim`-level truncation.
pub fn position_operator(dim: usize) -> Operator {
    let a = annihilator(dim);
    (&a + &a.dagger()).scale(C64::new(1.0 / libm::sqrt(2.0), 0.0))
}

/// Momentum quadrature `i(a† − a)/√2` on an `dim`-level truncation.
pub fn momentum_operator(dim: usize) -> Operator {
    let a = annihilator(dim);
    (&a.dagger() - &a).scale(C64::new(0.0, 1.0 / libm::sqrt(2.0)))
}

/// Quantum embedding of the classical diffusion
/// `dx = w(x)dt + σ(x)dW` (Stratonovich drift `w`): builds
/// `H = ½(p·w(q) + w(q)·p)` and `E = ½(p·σ(q) + σ(q)·p)` on an `n`-level
/// truncated oscillator pair and feeds them to [`embed_quadrature`].
///
/// Coefficient slices are `[c₀, c₁, c₂]` for `c₀ + c₁x + c₂x²` (degree ≤ 2).
/// The Heisenberg drift of `q` reproduces the Itō drift
/// `v = w + ½(∂σ/∂x)σ` away from the truncation corner.
pub fn embed_diffusion(w: &[f64], sigma: &[f64], n: usize) -> Result<SLHTriple> {
    if w.len() > 3 || sigma.len() > 3 {
        return Err(Error::PolynomialDegree {
            terms: w.len().max(sigma.len()),
            max_terms: 3,
        });
    }
    if n < MIN_DIFFUSION_TRUNCATION {
        return Err(Error::TruncationTooSmall {
            requested: n,
            minimum: MIN_DIFFUSION_TRUNCATION,
        });
    }
    let q = position_operator(n);
    let p = momentum_operator(n);

    let poly = |coeffs: &[f64]| -> Operator {
        let mut acc = Operator::zeros(n);
        let mut power = Operator::identity(n);
        for (k, &coef) in coeffs.iter().enumerate() {
            if k > 0 {
                power = &power * &q;
            }
            acc = &acc + &power.scale(C64::new(coef, 0.0));
        }
        acc
    };
    let symmetrized =
        |f: &Operator| -> Operator { (&(&p * f) + &(f * &p)).scale(C64::new(0.5, 0.0)) };

    let h = symmetrized(&poly(w));
    let e = symmetrized(&poly(sigma));
    embed_quadrature(&e, &h, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{sigma_x, sigma_z};
    use crate::testutil::{c, random_hermitian, random_op};
    use alloc::vec;
    use rand::SeedableRng;

    fn qubit_up() -> DensityMatrix {
        DensityMatrix::pure_state(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap()
    }

    fn plus_state() -> DensityMatrix {
        DensityMatrix::pure_state(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Operator::identity(2).scale(c(0.5, 0.0)), 1e-10).is_ok());
        // wrong trace
        assert!(matches!(
            DensityMatrix::new(Operator::identity(2), 1e-10),
            Err(Error::InvalidState { .. })
        ));
        // indefinite
        assert!(matches!(
            DensityMatrix::new(sigma_z(), 1e-10),
            Err(Error::InvalidState { .. })
        ));
        // non-Hermitian
        assert!(matches!(
            DensityMatrix::new(crate::operator::sigma_minus(), 1e-10),
            Err(Error::InvalidState { .. })
        ));
    }

    #[test]
    fn expectation_examples() {
        let rho = qubit_up();
        let one = expectation(&rho, &Operator::identity(2)).unwrap();
        assert!((one - c(1.0, 0.0)).norm_sqr() < 1e-30);
        // convention sigma_z = |e><e| - |g><g| with the excited state first
        let up = expectation(&rho, &sigma_z()).unwrap();
        assert!((up - c(1.0, 0.0)).norm_sqr() < 1e-30);

        // linearity on random inputs
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let x = random_op(2, &mut rng);
        let y = random_op(2, &mut rng);
        let lhs = expectation(&rho, &(&x + &y)).unwrap();
        let rhs = expectation(&rho, &x).unwrap() + expectation(&rho, &y).unwrap();
        assert!((lhs - rhs).norm_sqr() < 1e-26);
    }

    #[test]
    fn frozen_dynamics_without_generator() {
        let triple = SLHTriple::identity(1, 2);
        let rho0 = plus_state();
        let traj = integrate_master(&triple, &rho0, 1.0, 0.01).unwrap();
        assert_eq!(traj.len(), 101);
        let drift = (traj.final_state().operator() - rho0.operator()).max_abs();
        assert!(drift == 0.0);
    }

    #[test]
    fn dephasing_decays_coherence() {
        // L = -i sigma_z: rho01(t) = e^{-2t} rho01(0)
        let triple = embed_quadrature(&sigma_z(), &Operator::zeros(2), 1e-12).unwrap();
        let traj = integrate_master(&triple, &plus_state(), 1.0, 1e-3).unwrap();
        let got = traj.final_state().operator().get(0, 1);
        let want = c(0.5 * libm::exp(-2.0), 0.0);
        assert!(
            (got - want).norm_sqr() < 1e-12,
            "rho01 = {got}, want {want}"
        );
    }

    #[test]
    fn poisson_qubit_flips() {
        // kicks by sigma_x at rate nu: <sigma_z>_t = e^{-2 nu t}
        let nu = 0.7;
        let triple = embed_poisson(&sigma_x(), nu, 1e-12).unwrap();
        let mut traj = integrate_master(&triple, &qubit_up(), 1.0, 1e-3).unwrap();
        traj.record_observable("sz", &sigma_z()).unwrap();
        let series = traj.observable("sz").unwrap();
        let got = series.last().unwrap();
        let want = libm::exp(-2.0 * nu);
        assert!((got.re - want).abs() < 1e-6);
        assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn quadrature_master_equation_matches_paper_form() {
        // lindblad_schrodinger of (I, -iE, H) vs EρE - ½{E²,ρ} - i[H,ρ],
        // the two sides computed by independent code paths
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let e = random_hermitian(3, &mut rng);
            let h = random_hermitian(3, &mut rng);
            let triple = embed_quadrature(&e, &h, 1e-12).unwrap();
            let rho = random_op(3, &mut rng);
            let got = triple.lindblad_schrodinger(&rho).unwrap();

            let e2 = &e * &e;
            let want = &(&(&e * &rho) * &e) - &(&(&e2 * &rho) + &(&rho * &e2)).scale(c(0.5, 0.0));
            let comm = &(&h * &rho) - &(&rho * &h);
            let want = &want - &comm.scale(c(0.0, 1.0));
            assert!((&got - &want).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn quadrature_drift_is_half_e_squared() {
        let e = Operator::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let triple = embed_quadrature(&e, &Operator::zeros(2), 1e-12).unwrap();
        let l = triple.l(0);
        let ldl = &l.dagger() * l;
        let want = (&e * &e).scale(c(1.0, 0.0));
        assert!((&ldl - &want).max_abs() < 1e-15);
    }

    #[test]
    fn quadrature_rejects_non_hermitian() {
        let err = embed_quadrature(&crate::operator::sigma_minus(), &Operator::zeros(2), 1e-12)
            .unwrap_err();
        assert!(matches!(err, Error::NonHermitian { .. }));
    }

    #[test]
    fn poisson_master_equation_contract() {
        // lindblad_schrodinger of the returned triple equals ν(SρS† − ρ)
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        for _ in 0..10 {
            // random unitary via the Cayley transform of a random Hermitian
            let herm = random_hermitian(3, &mut rng);
            let id = Operator::identity(3);
            let plus = &id + &herm.scale(c(0.0, 0.5));
            let minus = &id - &herm.scale(c(0.0, 0.5));
            let (inv, _) = plus.try_inverse().unwrap();
            let s = &minus * &inv;
            let nu = 1.3;
            let triple = embed_poisson(&s, nu, 1e-10).unwrap();
            let rho = random_op(3, &mut rng);
            let got = triple.lindblad_schrodinger(&rho).unwrap();
            let want = (&(&(&s * &rho) * &s.dagger()) - &rho).scale(c(nu, 0.0));
            assert!((&got - &want).max_abs() <= 1e-11);
        }
    }

    #[test]
    fn poisson_trivial_cases() {
        let triple = embed_poisson(&Operator::identity(2), 1.0, 1e-12).unwrap();
        assert!(triple.l(0).is_zero());
        assert!(triple.h().is_zero());

        // scalar phase kick: generator vanishes because scalars commute
        let theta = 0.9;
        let s = Operator::scalar(c(libm::cos(theta), libm::sin(theta)));
        let triple = embed_poisson(&s, 2.0, 1e-12).unwrap();
        let rho = Operator::scalar(c(1.0, 0.0));
        assert!(triple.lindblad_schrodinger(&rho).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn poisson_rejects_bad_input() {
        assert!(matches!(
            embed_poisson(&crate::operator::sigma_minus(), 1.0, 1e-12),
            Err(Error::NonUnitary { .. })
        ));
        assert!(matches!(
            embed_poisson(&sigma_x(), -1.0, 1e-12),
            Err(Error::NonPositive { .. })
        ));
    }

    #[test]
    fn diffusion_trivial_embedding() {
        let triple = embed_diffusion(&[], &[], 8).unwrap();
        assert!(triple.l(0).is_zero());
        assert!(triple.h().is_zero());
    }

    #[test]
    fn diffusion_constant_noise_has_no_ito_correction() {
        // constant σ: 𝓛q = w(q) exactly away from the truncation corner
        let n = 12;
        let triple = embed_diffusion(&[0.2, -0.5], &[0.3], n).unwrap();
        let q = position_operator(n);
        let drift = triple.lindblad_heisenberg(&q).unwrap();
        let want = &Operator::identity(n).scale(c(0.2, 0.0)) + &q.scale(c(-0.5, 0.0));
        let diff = &drift - &want;
        // compare on the interior block, the last two levels feel the corner
        let mut worst = 0.0_f64;
        for i in 0..n - 2 {
            for j in 0..n - 2 {
                worst = worst.max(libm::sqrt(diff.get(i, j).norm_sqr()));
            }
        }
        assert!(worst <= 1e-12, "interior deviation {worst}");
    }

    #[test]
    fn diffusion_ito_correction_for_linear_noise() {
        // σ(x) = s0 + s1 x gives the Itō drift correction ½σ'σ
        let n = 14;
        let (s0, s1) = (0.4, 0.25);
        let triple = embed_diffusion(&[0.0], &[s0, s1], n).unwrap();
        let q = position_operator(n);
        let drift = triple.lindblad_heisenberg(&q).unwrap();
        let sigma_q = &Operator::identity(n).scale(c(s0, 0.0)) + &q.scale(c(s1, 0.0));
        let want = sigma_q.scale(c(0.5 * s1, 0.0));
        let diff = &drift - &want;
        let mut worst = 0.0_f64;
        for i in 0..n - 3 {
            for j in 0..n - 3 {
                worst = worst.max(libm::sqrt(diff.get(i, j).norm_sqr()));
            }
        }
        assert!(worst <= 1e-12, "interior deviation {worst}");
    }

    #[test]
    fn diffusion_input_validation() {
        assert!(matches!(
            embed_diffusion(&[0.0; 4], &[], 10),
            Err(Error::PolynomialDegree { .. })
        ));
        assert!(matches!(
            embed_diffusion(&[], &[], 4),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn trajectory_guards_catch_divergence() {
        // a absurdly large step makes RK4 blow up; the guard names a time
        let triple =
            embed_quadrature(&sigma_z().scale(c(30.0, 0.0)), &Operator::zeros(2), 1e-9).unwrap();
        let err = integrate_master(&triple, &plus_state(), 10.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn trailing_partial_step_lands_on_t_end() {
        let triple = embed_quadrature(&sigma_z(), &Operator::zeros(2), 1e-12).unwrap();
        let traj = integrate_master(&triple, &plus_state(), 0.35, 0.1).unwrap();
        let times = traj.times();
        assert_eq!(times.len(), 5);
        assert_eq!(*times.last().unwrap(), 0.35);
        let got = traj.final_state().operator().get(0, 1).re;
        let want = 0.5 * libm::exp(-2.0 * 0.35);
        // coarse dt: only the truncation error of RK4 at dt = 0.1
        assert!((got - want).abs() < 1e-4, "got {got}, want {want}");
    }

    #[test]
    fn step_halving_is_fourth_order() {
        let triple = embed_quadrature(&sigma_z(), &Operator::zeros(2), 1e-12).unwrap();
        let rho0 = plus_state();
        let exact = |t: f64| 0.5 * libm::exp(-2.0 * t);
        let max_err = |dt: f64| -> f64 {
            let traj = integrate_master(&triple, &rho0, 1.0, dt).unwrap();
            traj.times()
                .iter()
                .zip(traj.states())
                .map(|(t, s)| (s.operator().get(0, 1).re - exact(*t)).abs())
                .fold(0.0_f64, f64::max)
        };
        let coarse = max_err(0.05);
        let fine = max_err(0.025);
        assert!(
            coarse / fine >= 8.0,
            "order check: coarse {coarse:.3e}, fine {fine:.3e}"
        );
    }

    #[test]
    fn purity_never_increases_under_pure_decoherence() {
        let triple = embed_quadrature(&sigma_z(), &Operator::zeros(2), 1e-12).unwrap();
        let traj = integrate_master(&triple, &plus_state(), 2.0, 0.01).unwrap();
        let mut last = f64::INFINITY;
        for state in traj.states() {
            let p = state.purity();
            assert!(p <= last + 1e-12, "purity increased: {p} after {last}");
            last = p;
        }
    }

    #[test]
    fn ou_mean_reverts() {
        // Ornstein-Uhlenbeck: <q>_t = e^{-λt} <q>_0 within truncation error
        let (lambda, sigma, n) = (0.5, 0.3, 20);
        let triple = embed_diffusion(&[0.0, -lambda], &[sigma], n).unwrap();
        let alpha = c(1.0 / libm::sqrt(2.0), 0.0); // <q> = 1
        let rho0 = DensityMatrix::coherent(n, alpha).unwrap();
        let mut traj = integrate_master(&triple, &rho0, 1.0, 2e-3).unwrap();
        traj.record_observable("q", &position_operator(n)).unwrap();
        let series = traj.observable("q").unwrap();
        assert!((series[0].re - 1.0).abs() < 1e-6);
        let got = series.last().unwrap().re;
        let want = libm::exp(-lambda);
        assert!((got - want).abs() < 1e-3, "got {got}, want {want}");
    }
}
