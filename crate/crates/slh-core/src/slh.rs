//! The SLH triple data model, the Cayley transform between Stratonovich
//! interaction coefficients and Itō coefficients, the generator-matrix
//! algebra of the quantum Itō table, and the Lindblad / Langevin /
//! input-output generator constructions.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::operator::{commutator, Operator, C64};

/// Condition-estimate ceiling for the operator-matrix inverses in the
/// coefficient transforms.
pub const TRANSFORM_CONDITION_LIMIT: f64 = 1e12;

/// An n-channel open component in the Itō picture: scattering operator
/// matrix `S`, coupling vector `L`, Hamiltonian `H`, all on one system
/// space.
///
/// Valid triples have `S` unitary as an operator matrix and `H` Hermitian;
/// construction checks shapes only, [`SLHTriple::validate`] checks the
/// invariants against a tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct SLHTriple {
    channels: usize,
    dim: usize,
    scattering: Vec<Operator>, // n*n, row-major
    coupling: Vec<Operator>,   // n
    hamiltonian: Operator,
}

impl SLHTriple {
    pub fn new(
        scattering: Vec<Vec<Operator>>,
        coupling: Vec<Operator>,
        hamiltonian: Operator,
    ) -> Result<Self> {
        let n = scattering.len();
        if coupling.len() != n {
            return Err(Error::Shape {
                message: format!(
                    "coupling vector has {} entries for {} channels",
                    coupling.len(),
                    n
                ),
            });
        }
        let dim = hamiltonian.dim();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in scattering.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape {
                    message: format!("scattering row {i} has {} blocks, expected {n}", row.len()),
                });
            }
            flat.extend(row);
        }
        for op in flat.iter().chain(coupling.iter()) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: op.dim(),
                    right: dim,
                    context: "SLH blocks on one system space",
                });
            }
        }
        Ok(SLHTriple {
            channels: n,
            dim,
            scattering: flat,
            coupling,
            hamiltonian,
        })
    }

    /// The trivial n-channel component `(I, 0, 0)` on a `dim`-level space.
    pub fn identity(channels: usize, dim: usize) -> Self {
        let mut scattering = Vec::with_capacity(channels * channels);
        for i in 0..channels {
            for j in 0..channels {
                scattering.push(if i == j {
                    Operator::identity(dim)
                } else {
                    Operator::zeros(dim)
                });
            }
        }
        SLHTriple {
            channels,
            dim,
            scattering,
            coupling: vec![Operator::zeros(dim); channels],
            hamiltonian: Operator::zeros(dim),
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self, i: usize, j: usize) -> &Operator {
        &self.scattering[i * self.channels + j]
    }

    pub fn l(&self, i: usize) -> &Operator {
        &self.coupling[i]
    }

    pub fn h(&self) -> &Operator {
        &self.hamiltonian
    }

    /// `‖S†S − I‖` of the stacked operator matrix, max-abs.
    pub fn scattering_deviation(&self) -> f64 {
        let big = blocks_to_cmatrix(self.channels, self.dim, |i, j| self.s(i, j));
        big.dagger()
            .matmul(&big)
            .sub(&CMatrix::identity(self.channels * self.dim))
            .max_abs()
    }

    pub fn hamiltonian_deviation(&self) -> f64 {
        self.hamiltonian.hermitian_deviation()
    }

    /// Checks the type invariants (operator-matrix unitarity of `S`,
    /// Hermiticity of `H`) within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let s_dev = self.scattering_deviation();
        if s_dev > tol {
            return Err(Error::Invariant {
                message: String::from("S is not unitary as an operator matrix"),
                deviation: s_dev,
            });
        }
        let h_dev = self.hamiltonian_deviation();
        if h_dev > tol {
            return Err(Error::Invariant {
                message: String::from("H is not Hermitian"),
                deviation: h_dev,
            });
        }
        Ok(())
    }

    /// The canonical (S, L) accessor used by the input-output relation
    /// `dB_out = j_t(S) dB + j_t(L) dt`.
    pub fn io_coefficients(&self) -> (Vec<Operator>, Vec<Operator>) {
        (self.scattering.clone(), self.coupling.clone())
    }

    /// Packages the four Itō-differential coefficient blocks of the QSDE.
    pub fn generator_matrix(&self) -> GeneratorMatrix {
        let n = self.channels;
        let d = self.dim;
        let id = Operator::identity(d);
        let mut gauge = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut block = self.s(i, j).clone();
                if i == j {
                    block = &block - &id;
                }
                gauge.push(block);
            }
        }
        let creation = self.coupling.clone();
        // annihilation_j = -sum_i L_i† S_ij
        let mut annihilation = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Operator::zeros(d);
            for i in 0..n {
                acc = &acc + &(&self.l(i).dagger() * self.s(i, j));
            }
            annihilation.push(-&acc);
        }
        // drift = -(1/2 sum_i L_i†L_i + iH)
        let mut half_ldl = Operator::zeros(d);
        for l in &self.coupling {
            half_ldl = &half_ldl + &(&l.dagger() * l);
        }
        let drift =
            &half_ldl.scale(C64::new(-0.5, 0.0)) - &self.hamiltonian.scale(C64::new(0.0, 1.0));
        GeneratorMatrix {
            channels: n,
            dim: d,
            gauge,
            creation,
            annihilation,
            drift,
        }
    }

    /// Heisenberg-picture Lindblad generator
    /// `𝓛X = ½ Σ L†[X, L] + ½ Σ [L†, X] L − i[X, H]`.
    pub fn lindblad_heisenberg(&self, x: &Operator) -> Result<Operator> {
        self.expect_dim(x, "lindblad_heisenberg observable")?;
        let mut acc = Operator::zeros(self.dim);
        for l in &self.coupling {
            let ld = l.dagger();
            let t1 = &ld * &commutator(x, l)?;
            let t2 = &commutator(&ld, x)? * l;
            acc = &acc + &(&t1 + &t2).scale(C64::new(0.5, 0.0));
        }
        let hterm = commutator(x, &self.hamiltonian)?.scale(C64::new(0.0, -1.0));
        Ok(&acc + &hterm)
    }

    /// Schrödinger-picture (predual) generator
    /// `𝓛*ρ = Σ LρL† − ½{L†L, ρ} − i[H, ρ]`.
    pub fn lindblad_schrodinger(&self, rho: &Operator) -> Result<Operator> {
        self.expect_dim(rho, "lindblad_schrodinger state")?;
        let mut acc = Operator::zeros(self.dim);
        for l in &self.coupling {
            let ld = l.dagger();
            let sandwich = &(l * rho) * &ld;
            let ldl = &ld * l;
            let anti = &(&ldl * rho) + &(rho * &ldl);
            acc = &acc + &(&sandwich - &anti.scale(C64::new(0.5, 0.0)));
        }
        let hterm = commutator(&self.hamiltonian, rho)?.scale(C64::new(0.0, -1.0));
        Ok(&acc + &hterm)
    }

    /// Coefficients of the quantum Langevin equation for observable `x`.
    pub fn langevin_coefficients(&self, x: &Operator) -> Result<LangevinCoefficients> {
        self.expect_dim(x, "langevin observable")?;
        let n = self.channels;
        let d = self.dim;
        // gauge_ij = sum_k S_ki† X S_kj - delta_ij X
        let mut gauge = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Operator::zeros(d);
                for k in 0..n {
                    acc = &acc + &(&(&self.s(k, i).dagger() * x) * self.s(k, j));
                }
                if i == j {
                    acc = &acc - x;
                }
                gauge.push(acc);
            }
        }
        // creation_i = sum_j S_ji† [X, L_j]
        let mut creation = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Operator::zeros(d);
            for j in 0..n {
                acc = &acc + &(&self.s(j, i).dagger() * &commutator(x, self.l(j))?);
            }
            creation.push(acc);
        }
        // annihilation_j = sum_i [L_i†, X] S_ij
        let mut annihilation = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Operator::zeros(d);
            for i in 0..n {
                acc = &acc + &(&commutator(&self.l(i).dagger(), x)? * self.s(i, j));
            }
            annihilation.push(acc);
        }
        Ok(LangevinCoefficients {
            channels: n,
            dim: d,
            gauge,
            creation,
            annihilation,
            drift: self.lindblad_heisenberg(x)?,
        })
    }

    fn expect_dim(&self, x: &Operator, context: &'static str) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: self.dim,
                context,
            });
        }
        Ok(())
    }

    pub(crate) fn coupling_blocks(&self) -> &[Operator] {
        &self.coupling
    }
}

/// The Stratonovich-picture interaction coefficients: a Hermitian operator
/// matrix (`quadratic`, coefficient of `b†b`), a coupling vector (`linear`,
/// coefficient of `b†`), and a system term (`constant`).
///
/// The coefficient of `b` is represented implicitly as `linear[i]†`, which
/// makes the Hermiticity pairing unviolable by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct StratonovichCoefficients {
    channels: usize,
    dim: usize,
    quadratic: Vec<Operator>, // n*n, row-major
    linear: Vec<Operator>,    // n
    constant: Operator,
}

impl StratonovichCoefficients {
    pub fn new(
        quadratic: Vec<Vec<Operator>>,
        linear: Vec<Operator>,
        constant: Operator,
    ) -> Result<Self> {
        let n = quadratic.len();
        if linear.len() != n {
            return Err(Error::Shape {
                message: format!(
                    "linear coefficient vector has {} entries for {} channels",
                    linear.len(),
                    n
                ),
            });
        }
        let dim = constant.dim();
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in quadratic.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape {
                    message: format!("quadratic row {i} has {} blocks, expected {n}", row.len()),
                });
            }
            flat.extend(row);
        }
        for op in flat.iter().chain(linear.iter()) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: op.dim(),
                    right: dim,
                    context: "Stratonovich blocks on one system space",
                });
            }
        }
        Ok(StratonovichCoefficients {
            channels: n,
            dim,
            quadratic: flat,
            linear,
            constant,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn quadratic(&self, i: usize, j: usize) -> &Operator {
        &self.quadratic[i * self.channels + j]
    }

    pub fn linear(&self, i: usize) -> &Operator {
        &self.linear[i]
    }

    pub fn constant(&self) -> &Operator {
        &self.constant
    }

    /// `‖E − E†‖` of the stacked quadratic operator matrix.
    pub fn quadratic_deviation(&self) -> f64 {
        let big = blocks_to_cmatrix(self.channels, self.dim, |i, j| self.quadratic(i, j));
        big.sub(&big.dagger()).max_abs()
    }

    pub fn constant_deviation(&self) -> f64 {
        self.constant.hermitian_deviation()
    }

    /// Checks Hermiticity of the quadratic operator matrix and the constant
    /// term within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let q = self.quadratic_deviation();
        if q > tol {
            return Err(Error::Invariant {
                message: String::from("quadratic coefficient matrix is not Hermitian"),
                deviation: q,
            });
        }
        let c = self.constant_deviation();
        if c > tol {
            return Err(Error::Invariant {
                message: String::from("constant coefficient is not Hermitian"),
                deviation: c,
            });
        }
        Ok(())
    }

    pub(crate) fn linear_blocks(&self) -> &[Operator] {
        &self.linear
    }
}

/// The four Itō-differential coefficient blocks of a QSDE
/// `dU = {gauge·dΛ + creation·dB† + annihilation·dB + drift·dt} U`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix {
    channels: usize,
    dim: usize,
    /// Coefficients of `dΛ_ij`: `S_ij − δ_ij`.
    pub gauge: Vec<Operator>,
    /// Coefficients of `dB_i†`: `L_i`.
    pub creation: Vec<Operator>,
    /// Coefficients of `dB_j`: `−Σ_i L_i† S_ij`.
    pub annihilation: Vec<Operator>,
    /// Coefficient of `dt`: `−(½ Σ L†L + iH)`.
    pub drift: Operator,
}

impl GeneratorMatrix {
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gauge(&self, i: usize, j: usize) -> &Operator {
        &self.gauge[i * self.channels + j]
    }

    /// Generator of the adjoint process `dU†` (block-wise conjugation with
    /// the gauge block transposed).
    pub fn adjoint(&self) -> GeneratorMatrix {
        let n = self.channels;
        let mut gauge = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                gauge.push(self.gauge(j, i).dagger());
            }
        }
        GeneratorMatrix {
            channels: n,
            dim: self.dim,
            gauge,
            creation: self.annihilation.iter().map(Operator::dagger).collect(),
            annihilation: self.creation.iter().map(Operator::dagger).collect(),
            drift: self.drift.dagger(),
        }
    }

    pub fn add(&self, rhs: &GeneratorMatrix) -> GeneratorMatrix {
        assert_eq!(self.channels, rhs.channels);
        GeneratorMatrix {
            channels: self.channels,
            dim: self.dim,
            gauge: self
                .gauge
                .iter()
                .zip(&rhs.gauge)
                .map(|(a, b)| a + b)
                .collect(),
            creation: self
                .creation
                .iter()
                .zip(&rhs.creation)
                .map(|(a, b)| a + b)
                .collect(),
            annihilation: self
                .annihilation
                .iter()
                .zip(&rhs.annihilation)
                .map(|(a, b)| a + b)
                .collect(),
            drift: &self.drift + &rhs.drift,
        }
    }

    /// Max-abs residual of the unitarity condition
    /// `G + G† + G† ⋆ G = 0`, where `⋆` is the channel contraction of the
    /// Itō table.
    pub fn unitarity_residual(&self) -> f64 {
        let adj = self.adjoint();
        let prod = ito_product(&adj, self).expect("matching shape");
        let total = self.add(&adj).add(&prod);
        let mut worst = total.drift.max_abs();
        for op in total
            .gauge
            .iter()
            .chain(&total.creation)
            .chain(&total.annihilation)
        {
            worst = worst.max(op.max_abs());
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst = self.drift.max_abs();
        for op in self
            .gauge
            .iter()
            .chain(&self.creation)
            .chain(&self.annihilation)
        {
            worst = worst.max(op.max_abs());
        }
        worst
    }
}

/// Product of two generator matrices under the quantum Itō table
/// `dB_i dB_j† = δ_ij dt`, `dB_i dΛ_jk = δ_ij dB_k`,
/// `dΛ_ij dB_k† = δ_jk dB_i†`, `dΛ_ij dΛ_kl = δ_jk dΛ_il`,
/// all other products zero.
pub fn ito_product(a: &GeneratorMatrix, b: &GeneratorMatrix) -> Result<GeneratorMatrix> {
    if a.channels != b.channels {
        return Err(Error::ChannelMismatch {
            left: a.channels,
            right: b.channels,
        });
    }
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
            context: "ito_product",
        });
    }
    let n = a.channels;
    let d = a.dim;

    // drift: annihilation(a) · creation(b)
    let mut drift = Operator::zeros(d);
    for k in 0..n {
        drift = &drift + &(&a.annihilation[k] * &b.creation[k]);
    }
    // creation_i: gauge(a)_ik · creation(b)_k
    let mut creation = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Operator::zeros(d);
        for k in 0..n {
            acc = &acc + &(a.gauge(i, k) * &b.creation[k]);
        }
        creation.push(acc);
    }
    // annihilation_j: annihilation(a)_k · gauge(b)_kj
    let mut annihilation = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Operator::zeros(d);
        for k in 0..n {
            acc = &acc + &(&a.annihilation[k] * b.gauge(k, j));
        }
        annihilation.push(acc);
    }
    // gauge_ij: gauge(a)_ik · gauge(b)_kj
    let mut gauge = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Operator::zeros(d);
            for k in 0..n {
                acc = &acc + &(a.gauge(i, k) * b.gauge(k, j));
            }
            gauge.push(acc);
        }
    }
    Ok(GeneratorMatrix {
        channels: n,
        dim: d,
        gauge,
        creation,
        annihilation,
        drift,
    })
}

/// Coefficients of the Langevin equation
/// `dj(X) = j(gauge)·dΛ + j(creation)·dB† + j(annihilation)·dB + j(drift)·dt`.
#[derive(Clone, Debug, PartialEq)]
pub struct LangevinCoefficients {
    channels: usize,
    dim: usize,
    pub gauge: Vec<Operator>,
    pub creation: Vec<Operator>,
    pub annihilation: Vec<Operator>,
    pub drift: Operator,
}

impl LangevinCoefficients {
    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn gauge(&self, i: usize, j: usize) -> &Operator {
        &self.gauge[i * self.channels + j]
    }

    pub(crate) fn from_parts(
        channels: usize,
        dim: usize,
        gauge: Vec<Operator>,
        creation: Vec<Operator>,
        annihilation: Vec<Operator>,
        drift: Operator,
    ) -> Self {
        LangevinCoefficients {
            channels,
            dim,
            gauge,
            creation,
            annihilation,
            drift,
        }
    }

    pub fn max_abs_difference(&self, other: &LangevinCoefficients) -> f64 {
        let mut worst = (&self.drift - &other.drift).max_abs();
        for (a, b) in self.gauge.iter().zip(&other.gauge) {
            worst = worst.max((a - b).max_abs());
        }
        for (a, b) in self.creation.iter().zip(&other.creation) {
            worst = worst.max((a - b).max_abs());
        }
        for (a, b) in self.annihilation.iter().zip(&other.annihilation) {
            worst = worst.max((a - b).max_abs());
        }
        worst
    }
}

/// Stacks n×n operator blocks of dimension d into an (n·d)×(n·d) matrix.
pub(crate) fn blocks_to_cmatrix<'a>(
    n: usize,
    d: usize,
    block: impl Fn(usize, usize) -> &'a Operator,
) -> CMatrix {
    let mut big = CMatrix::zeros(n * d, n * d);
    for bi in 0..n {
        for bj in 0..n {
            let op = block(bi, bj);
            for i in 0..d {
                for j in 0..d {
                    big.set(bi * d + i, bj * d + j, op.get(i, j));
                }
            }
        }
    }
    big
}

pub(crate) fn cmatrix_to_blocks(big: &CMatrix, n: usize, d: usize) -> Vec<Operator> {
    let mut out = Vec::with_capacity(n * n);
    for bi in 0..n {
        for bj in 0..n {
            out.push(Operator::from_fn(d, |i, j| big.get(bi * d + i, bj * d + j)));
        }
    }
    out
}

/// Stacks an n-vector of d-dim operators into an (n·d)×d matrix.
fn stack_vector(n: usize, d: usize, blocks: &[Operator]) -> CMatrix {
    let mut out = CMatrix::zeros(n * d, d);
    for (b, op) in blocks.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                out.set(b * d + i, j, op.get(i, j));
            }
        }
    }
    out
}

fn unstack_vector(m: &CMatrix, n: usize, d: usize) -> Vec<Operator> {
    (0..n)
        .map(|b| Operator::from_fn(d, |i, j| m.get(b * d + i, j)))
        .collect()
}

/// Cayley transform from Stratonovich coefficients to the Itō triple:
///
/// `S = (1 − (i/2)E)(1 + (i/2)E)⁻¹`,
/// `L = i (1 + (i/2)E)⁻¹ E_vec`,
/// `H = E00 + ½ E_vec† Im{(1 + (i/2)E)⁻¹} E_vec`
///
/// with `Im(A) = (A − A†)/(2i)` on operator matrices.
pub fn stratonovich_to_ito(coeffs: &StratonovichCoefficients) -> Result<SLHTriple> {
    let n = coeffs.channels();
    let d = coeffs.dim();
    let big_e = blocks_to_cmatrix(n, d, |i, j| coeffs.quadratic(i, j));
    let nd = n * d;
    let half_i = C64::new(0.0, 0.5);

    let plus = CMatrix::identity(nd).add(&big_e.scale(half_i));
    let minus = CMatrix::identity(nd).sub(&big_e.scale(half_i));
    let (inv, condition) = match crate::linalg::try_inverse(&plus) {
        Some(pair) => pair,
        None => {
            return Err(Error::SingularTransform {
                condition: f64::INFINITY,
            })
        }
    };
    if condition > TRANSFORM_CONDITION_LIMIT {
        return Err(Error::SingularTransform { condition });
    }

    let big_s = minus.matmul(&inv);
    let s_blocks = cmatrix_to_blocks(&big_s, n, d);

    let linear_stack = stack_vector(n, d, coeffs.linear_blocks());
    let l_stack = inv.matmul(&linear_stack).scale(C64::new(0.0, 1.0));
    let coupling = unstack_vector(&l_stack, n, d);

    // H = E00 + 1/2 · E_vec† · Im(inv) · E_vec
    let im_inv = inv.sub(&inv.dagger()).scale(C64::new(0.0, -0.5));
    let correction = linear_stack
        .dagger()
        .matmul(&im_inv)
        .matmul(&linear_stack)
        .scale(C64::new(0.5, 0.0));
    let hamiltonian = coeffs.constant() + &Operator::from_cmatrix(correction);

    let mut rows = Vec::with_capacity(n);
    let mut iter = s_blocks.into_iter();
    for _ in 0..n {
        rows.push((0..n).map(|_| iter.next().expect("block count")).collect());
    }
    SLHTriple::new(rows, coupling, hamiltonian)
}

/// Inverse of [`stratonovich_to_ito`]:
///
/// `E = 2i(S − 1)(1 + S)⁻¹`, then `E_vec = −2i(1 + S)⁻¹ L` and
/// `E00 = H − ½ E_vec† Im{(1 + S)/2} E_vec`, using
/// `(1 + (i/2)E)⁻¹ = (1 + S)/2`.
///
/// The inverse of the `L` and `H` formulas is certified through the
/// roundtrip contract with [`stratonovich_to_ito`].
pub fn ito_to_stratonovich(triple: &SLHTriple) -> Result<StratonovichCoefficients> {
    let n = triple.channels();
    let d = triple.dim();
    let nd = n * d;
    let big_s = blocks_to_cmatrix(n, d, |i, j| triple.s(i, j));

    let plus = CMatrix::identity(nd).add(&big_s);
    let (inv, condition) = match crate::linalg::try_inverse(&plus) {
        Some(pair) => pair,
        None => {
            return Err(Error::NoStratonovichForm {
                condition: f64::INFINITY,
            })
        }
    };
    if condition > TRANSFORM_CONDITION_LIMIT {
        return Err(Error::NoStratonovichForm { condition });
    }

    let big_e = big_s
        .sub(&CMatrix::identity(nd))
        .matmul(&inv)
        .scale(C64::new(0.0, 2.0));
    let quadratic = cmatrix_to_blocks(&big_e, n, d);

    let l_stack = stack_vector(n, d, triple.coupling_blocks());
    let linear_stack = inv.matmul(&l_stack).scale(C64::new(0.0, -2.0));
    let linear = unstack_vector(&linear_stack, n, d);

    // Im{(1 + S)/2} = (S − S†)/(4i)
    let im_m = big_s.sub(&big_s.dagger()).scale(C64::new(0.0, -0.25));
    let correction = linear_stack
        .dagger()
        .matmul(&im_m)
        .matmul(&linear_stack)
        .scale(C64::new(0.5, 0.0));
    let constant = triple.h() - &Operator::from_cmatrix(correction);

    let mut rows = Vec::with_capacity(n);
    let mut iter = quadratic.into_iter();
    for _ in 0..n {
        rows.push((0..n).map(|_| iter.next().expect("block count")).collect());
    }
    StratonovichCoefficients::new(rows, linear, constant)
}
