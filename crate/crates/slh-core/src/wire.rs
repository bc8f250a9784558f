//! A single quantum on a 1-D wire: exact-shift propagation with the δ-kick
//! boundary multiplier at the origin, and single-excitation frequency-domain
//! transfer functions for declared linear-passive components, used to
//! certify the zero-delay series limit.
//!
//! The free evolution translates the wave function at unit speed along the
//! negative axis, so on a grid with spacing `h` one time step of length `h`
//! is an exact one-node shift; the only physics is the unimodular
//! multiplier picked up on crossing the origin.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::operator::C64;

/// Condition ceiling for the mode-response inverse; beyond it the point is
/// reported as a pole.
const POLE_CONDITION_LIMIT: f64 = 1e12;

/// Relative amplitude at the outgoing grid edge that counts as the packet
/// reaching the boundary.
const EXIT_THRESHOLD: f64 = 1e-12;

/// Boundary multiplier of the δ-kick of strength `epsilon`:
/// `s = (1 − iε/2)/(1 + iε/2)`, always unimodular.
pub fn delta_phase(epsilon: f64) -> C64 {
    C64::new(1.0, -epsilon / 2.0) / C64::new(1.0, epsilon / 2.0)
}

/// Single-quantum amplitude on a uniform grid over `[−X, X]` with the
/// origin between the two middle nodes (nodes sit at half-integer
/// multiples of the spacing).
#[derive(Clone, Debug)]
pub struct WireState {
    /// Kick strength at the origin.
    epsilon: f64,
    /// Grid spacing (and time per step).
    spacing: f64,
    /// Nodes left of the origin (total node count is `2·half_nodes`).
    half_nodes: usize,
    psi: Vec<C64>,
}

impl WireState {
    /// Builds a normalized Gaussian packet `exp(−(x−center)²/(4 width²))`.
    pub fn gaussian(
        half_width: f64,
        spacing: f64,
        center: f64,
        width: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !spacing.is_finite() || spacing <= 0.0 {
            return Err(Error::NonPositive {
                what: "grid spacing",
                value: spacing,
            });
        }
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::NonPositive {
                what: "packet width",
                value: width,
            });
        }
        if !half_width.is_finite() || half_width <= spacing {
            return Err(Error::NonPositive {
                what: "grid half-width (must exceed the spacing)",
                value: half_width,
            });
        }
        let half_nodes = libm::round(half_width / spacing) as usize;
        let mut state = WireState {
            epsilon,
            spacing,
            half_nodes,
            psi: vec![C64::new(0.0, 0.0); 2 * half_nodes],
        };
        for k in 0..state.psi.len() {
            let x = state.position(k);
            let arg = (x - center) * (x - center) / (4.0 * width * width);
            state.psi[k] = C64::new(libm::exp(-arg), 0.0);
        }
        let norm = state.norm();
        if norm <= 0.0 {
            return Err(Error::Shape {
                message: String::from("packet has zero norm on this grid"),
            });
        }
        for amp in &mut state.psi {
            *amp /= C64::new(norm, 0.0);
        }
        Ok(state)
    }

    pub fn from_amplitudes(spacing: f64, epsilon: f64, psi: Vec<C64>) -> Result<Self> {
        if !spacing.is_finite() || spacing <= 0.0 {
            return Err(Error::NonPositive {
                what: "grid spacing",
                value: spacing,
            });
        }
        if psi.is_empty() || !psi.len().is_multiple_of(2) {
            return Err(Error::Shape {
                message: String::from("wire grid needs an even, positive node count"),
            });
        }
        Ok(WireState {
            epsilon,
            spacing,
            half_nodes: psi.len() / 2,
            psi,
        })
    }

    /// Node position `x_k`; the origin lies between nodes
    /// `half_nodes − 1` and `half_nodes`.
    pub fn position(&self, k: usize) -> f64 {
        (k as f64 - self.half_nodes as f64 + 0.5) * self.spacing
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// Grid-weighted L² norm `√(h Σ|ψ|²)`.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self.psi.iter().map(|z| z.norm_sqr()).sum();
        libm::sqrt(self.spacing * sum)
    }

    fn max_amplitude(&self) -> f64 {
        libm::sqrt(
            self.psi
                .iter()
                .map(|z| z.norm_sqr())
                .fold(0.0_f64, f64::max),
        )
    }
}

/// Translates the state leftward for time `t` (an exact multiple of the
/// grid spacing), multiplying the amplitude that crosses the origin by the
/// boundary phase [`delta_phase`].
pub fn propagate_wavepacket(state: &WireState, t: f64) -> Result<WireState> {
    let steps_f = t / state.spacing;
    let steps = libm::round(steps_f);
    if !t.is_finite() || t < 0.0 || (steps_f - steps).abs() > 1e-9 {
        return Err(Error::NotMultipleOfStep {
            time: t,
            step: state.spacing,
        });
    }
    let steps = steps as usize;
    let phase = delta_phase(state.epsilon);
    let mut out = state.clone();
    let n = out.psi.len();
    let crossing = out.half_nodes - 1; // node just left of the origin
    for step in 0..steps {
        let exit = libm::sqrt(out.psi[0].norm_sqr());
        if exit > EXIT_THRESHOLD * out.max_amplitude() {
            return Err(Error::DomainExit { step });
        }
        for k in 0..n - 1 {
            out.psi[k] = out.psi[k + 1];
        }
        out.psi[n - 1] = C64::new(0.0, 0.0);
        out.psi[crossing] *= phase;
    }
    Ok(out)
}

/// A declared linear-passive component: channel scattering `S` (n×n),
/// coupling matrix `C` (n×m, coupling vector `L = C·a`), and quadratic mode
/// Hamiltonian `Ω` (m×m, `H = a†Ωa`).
#[derive(Clone, Debug)]
pub struct LinearPassive {
    scattering: CMatrix,
    coupling: CMatrix,
    mode_hamiltonian: CMatrix,
}

impl LinearPassive {
    /// Validates shapes, unitarity of `S`, and Hermiticity of `Ω` within
    /// `tol`.
    pub fn new(
        scattering: CMatrix,
        coupling: CMatrix,
        mode_hamiltonian: CMatrix,
        tol: f64,
    ) -> Result<Self> {
        let n = scattering.rows();
        if scattering.cols() != n {
            return Err(Error::Shape {
                message: String::from("linear-passive scattering matrix must be square"),
            });
        }
        let m = mode_hamiltonian.rows();
        if mode_hamiltonian.cols() != m {
            return Err(Error::Shape {
                message: String::from("linear-passive mode Hamiltonian must be square"),
            });
        }
        if coupling.rows() != n || coupling.cols() != m {
            return Err(Error::Shape {
                message: alloc::format!(
                    "linear-passive coupling must be {n}×{m}, got {}×{}",
                    coupling.rows(),
                    coupling.cols()
                ),
            });
        }
        if !scattering.is_finite() || !coupling.is_finite() || !mode_hamiltonian.is_finite() {
            return Err(Error::NonFinite {
                context: "linear-passive component",
            });
        }
        let s_dev = scattering
            .dagger()
            .matmul(&scattering)
            .sub(&CMatrix::identity(n))
            .max_abs();
        if s_dev > tol {
            return Err(Error::NonUnitary {
                context: "linear-passive scattering matrix",
                deviation: s_dev,
            });
        }
        let h_dev = mode_hamiltonian.sub(&mode_hamiltonian.dagger()).max_abs();
        if h_dev > tol {
            return Err(Error::NonHermitian {
                context: "linear-passive mode Hamiltonian",
                deviation: h_dev,
            });
        }
        Ok(LinearPassive {
            scattering,
            coupling,
            mode_hamiltonian,
        })
    }

    /// Pure scattering component without internal modes.
    pub fn static_scattering(scattering: CMatrix, tol: f64) -> Result<Self> {
        let n = scattering.rows();
        LinearPassive::new(scattering, CMatrix::zeros(n, 0), CMatrix::zeros(0, 0), tol)
    }

    /// Single-mode cavity: scattering 1, coupling `√κ`, detuning `Δ`.
    pub fn cavity(kappa: f64, delta: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::NonPositive {
                what: "cavity linewidth",
                value: kappa,
            });
        }
        let mut coupling = CMatrix::zeros(1, 1);
        coupling.set(0, 0, C64::new(libm::sqrt(kappa), 0.0));
        let mut omega = CMatrix::zeros(1, 1);
        omega.set(0, 0, C64::new(delta, 0.0));
        LinearPassive::new(CMatrix::identity(1), coupling, omega, 1e-12)
    }

    pub fn channels(&self) -> usize {
        self.scattering.rows()
    }

    pub fn modes(&self) -> usize {
        self.mode_hamiltonian.rows()
    }

    pub fn scattering(&self) -> &CMatrix {
        &self.scattering
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn mode_hamiltonian(&self) -> &CMatrix {
        &self.mode_hamiltonian
    }

    /// Series composition `downstream ◁ upstream` at the linear-passive
    /// level: `S = S²S¹`, `C = [S²C¹ | C²]`, and the mode Hamiltonian gains
    /// the cross block from `Im{L²†S²L¹}`.
    pub fn series(downstream: &LinearPassive, upstream: &LinearPassive) -> Result<LinearPassive> {
        let n = upstream.channels();
        if downstream.channels() != n {
            return Err(Error::ChannelMismatch {
                left: downstream.channels(),
                right: n,
            });
        }
        let (m1, m2) = (upstream.modes(), downstream.modes());
        let s = downstream.scattering.matmul(&upstream.scattering);
        let forwarded = downstream.scattering.matmul(&upstream.coupling); // n×m1
        let mut coupling = CMatrix::zeros(n, m1 + m2);
        for i in 0..n {
            for j in 0..m1 {
                coupling.set(i, j, forwarded.get(i, j));
            }
            for j in 0..m2 {
                coupling.set(i, m1 + j, downstream.coupling.get(i, j));
            }
        }
        // cross coupling T = C²† S² C¹ enters as ±(i/2) blocks
        let t = downstream
            .coupling
            .dagger()
            .matmul(&downstream.scattering)
            .matmul(&upstream.coupling); // m2×m1
        let mut omega = CMatrix::zeros(m1 + m2, m1 + m2);
        for i in 0..m1 {
            for j in 0..m1 {
                omega.set(i, j, upstream.mode_hamiltonian.get(i, j));
            }
        }
        for i in 0..m2 {
            for j in 0..m2 {
                omega.set(m1 + i, m1 + j, downstream.mode_hamiltonian.get(i, j));
            }
        }
        let half_i = C64::new(0.0, 0.5);
        for i in 0..m1 {
            for j in 0..m2 {
                // Ω[upstream, downstream] = (i/2) T†
                omega.set(i, m1 + j, half_i * t.get(j, i).conj());
                // Ω[downstream, upstream] = −(i/2) T
                omega.set(m1 + j, i, -half_i * t.get(j, i));
            }
        }
        LinearPassive::new(s, coupling, omega, 1e-9)
    }
}

/// One point of a frequency response.
#[derive(Clone, Debug)]
pub struct TransferPoint {
    pub omega: f64,
    pub matrix: CMatrix,
}

impl TransferPoint {
    /// `‖Ξ†Ξ − I‖` in max-abs; small for lossless components.
    pub fn unitary_deviation(&self) -> f64 {
        let n = self.matrix.rows();
        self.matrix
            .dagger()
            .matmul(&self.matrix)
            .sub(&CMatrix::identity(n))
            .max_abs()
    }
}

/// Steady-state input-to-output response at frequency `omega`:
/// `Ξ(ω) = [I − C (i(Ω − ω) + ½C†C)⁻¹ C†] S`.
///
/// Derived from the Langevin equation of the mode vector,
/// `ȧ = (−iΩ − ½C†C)a − C†S b_in`, and the output relation
/// `b_out = S b_in + C a` driven at `e^{−iωt}`.
pub fn transfer_function(component: &LinearPassive, omega: f64) -> Result<TransferPoint> {
    let n = component.channels();
    let m = component.modes();
    if m == 0 {
        return Ok(TransferPoint {
            omega,
            matrix: component.scattering.clone(),
        });
    }
    let c = &component.coupling;
    let cd = c.dagger();
    let mut response = component.mode_hamiltonian.scale(C64::new(0.0, 1.0));
    for i in 0..m {
        let shift = response.get(i, i) - C64::new(0.0, omega);
        response.set(i, i, shift);
    }
    response = response.add(&cd.matmul(c).scale(C64::new(0.5, 0.0)));
    let inv = match linalg::try_inverse(&response) {
        Some((inv, condition)) if condition <= POLE_CONDITION_LIMIT => inv,
        _ => return Err(Error::Pole { omega }),
    };
    let correction = c.matmul(&inv).matmul(&cd);
    let xi = CMatrix::identity(n)
        .sub(&correction)
        .matmul(&component.scattering);
    Ok(TransferPoint { omega, matrix: xi })
}

/// Comparison of the composite response against the product of individual
/// responses over a frequency grid.
#[derive(Clone, Debug)]
pub struct CascadeReport {
    pub max_deviation: f64,
    pub worst_omega: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Pass threshold for [`cascade_transfer`].
pub const CASCADE_THRESHOLD: f64 = 1e-8;

/// Certifies the zero-delay limit: over `omegas`, compares
/// `Ξ_series(ω)` of the composed component against `Ξ₂(ω)Ξ₁(ω)`.
pub fn cascade_transfer(
    upstream: &LinearPassive,
    downstream: &LinearPassive,
    omegas: &[f64],
) -> Result<CascadeReport> {
    let composite = LinearPassive::series(downstream, upstream)?;
    let mut max_deviation = 0.0_f64;
    let mut worst_omega = f64::NAN;
    for &omega in omegas {
        let xi_series = transfer_function(&composite, omega)?;
        let xi1 = transfer_function(upstream, omega)?;
        let xi2 = transfer_function(downstream, omega)?;
        let dev = xi_series
            .matrix
            .sub(&xi2.matrix.matmul(&xi1.matrix))
            .max_abs();
        if dev > max_deviation {
            max_deviation = dev;
            worst_omega = omega;
        }
    }
    Ok(CascadeReport {
        max_deviation,
        worst_omega,
        threshold: CASCADE_THRESHOLD,
        passed: max_deviation <= CASCADE_THRESHOLD,
    })
}

/// Evenly spaced frequency grid with `steps` points (inclusive endpoints).
pub fn omega_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![min];
    }
    let span = max - min;
    (0..steps)
        .map(|k| min + span * k as f64 / (steps - 1) as f64)
        .collect()
}
