//! Z₂-graded (parity) machinery for Fermi noise models: parity
//! classification and splitting, fermionic system-mode construction with a
//! Jordan-Wigner chain, validation of the parity table for Fermi
//! components (`S`, `H` even, `L` odd), the graded Langevin equation, and
//! parity-checked composition.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network;
use crate::operator::{commutator, Operator, C64, DEFAULT_TOL};
use crate::slh::{LangevinCoefficients, SLHTriple, StratonovichCoefficients};

/// Default cap on the number of fermionic modes (space dimension `2^m`).
pub const FERMION_MODE_CAP: usize = 6;

/// The parity operator defining the Z₂ grading of a system space.
///
/// `eta` must be a Hermitian involution (`eta² = 1`, `eta = eta†`).
#[derive(Clone, Debug, PartialEq)]
pub struct ParityContext {
    eta: Operator,
}

impl ParityContext {
    pub fn new(eta: Operator, tol: f64) -> Result<Self> {
        let herm = eta.hermitian_deviation();
        let inv = (&(&eta * &eta) - &Operator::identity(eta.dim())).max_abs();
        let deviation = herm.max(inv);
        if deviation > tol {
            return Err(Error::InvalidParityOperator { deviation });
        }
        Ok(ParityContext { eta })
    }

    pub fn eta(&self) -> &Operator {
        &self.eta
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    /// Grade conjugation `η(X) = ηXη`.
    pub fn conjugate(&self, x: &Operator) -> Operator {
        &(&self.eta * x) * &self.eta
    }
}

/// Definite parity of an operator under the grading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl core::fmt::Display for Parity {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
            Parity::Mixed => write!(f, "mixed"),
        }
    }
}

/// Parity classification with both residuals reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityClassification {
    pub parity: Parity,
    /// `‖ηXη − X‖`
    pub even_deviation: f64,
    /// `‖ηXη + X‖`
    pub odd_deviation: f64,
}

/// Classifies `x` as even, odd, or mixed within `tol`.
pub fn parity_of(x: &Operator, ctx: &ParityContext, tol: f64) -> Result<ParityClassification> {
    if x.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: ctx.dim(),
            context: "parity_of",
        });
    }
    let conj = ctx.conjugate(x);
    let even_deviation = (&conj - x).max_abs();
    let odd_deviation = (&conj + x).max_abs();
    let parity = if even_deviation <= tol {
        Parity::Even
    } else if odd_deviation <= tol {
        Parity::Odd
    } else {
        Parity::Mixed
    };
    Ok(ParityClassification {
        parity,
        even_deviation,
        odd_deviation,
    })
}

/// Splits `x = x_even + x_odd` with `x_even = ½(x + ηxη)`,
/// `x_odd = ½(x − ηxη)`; the reassembly is exact.
pub fn split_parity(x: &Operator, ctx: &ParityContext) -> Result<(Operator, Operator)> {
    if x.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: ctx.dim(),
            context: "split_parity",
        });
    }
    let conj = ctx.conjugate(x);
    let half = C64::new(0.5, 0.0);
    Ok(((x + &conj).scale(half), (x - &conj).scale(half)))
}

/// A family of fermionic annihilation operators on `2^m` dimensions
/// together with the global parity operator.
#[derive(Clone, Debug)]
pub struct FermionModes {
    pub modes: Vec<Operator>,
    pub parity: Operator,
}

impl FermionModes {
    pub fn context(&self) -> ParityContext {
        ParityContext::new(self.parity.clone(), DEFAULT_TOL).expect("sign-diagonal involution")
    }
}

/// Jordan-Wigner chain of `m` fermionic modes: mode `α` carries sign
/// strings on the factors below it, so the canonical anticommutation
/// relations hold exactly and the global parity anticommutes with every
/// mode.
pub fn fermion_modes(m: usize) -> Result<FermionModes> {
    fermion_modes_capped(m, FERMION_MODE_CAP)
}

pub fn fermion_modes_capped(m: usize, cap: usize) -> Result<FermionModes> {
    if m == 0 {
        return Err(Error::Shape {
            message: String::from("at least one fermionic mode required"),
        });
    }
    if m > cap {
        return Err(Error::ModeCapExceeded { requested: m, cap });
    }
    let one = C64::new(1.0, 0.0);
    let sign = Operator::from_fn(2, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i == 0 {
            one
        } else {
            -one
        }
    });
    // vacuum-first two-level lowering operator |0><1|
    let lower = Operator::from_fn(2, |i, j| {
        if i == 0 && j == 1 {
            one
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let id = Operator::identity(2);

    let mut modes = Vec::with_capacity(m);
    for alpha in 0..m {
        let mut acc = Operator::identity(1);
        for site in 0..m {
            let factor = if site < alpha {
                &sign
            } else if site == alpha {
                &lower
            } else {
                &id
            };
            acc = acc.tensor(factor)?;
        }
        modes.push(acc);
    }
    let mut parity = Operator::identity(1);
    for _ in 0..m {
        parity = parity.tensor(&sign)?;
    }
    Ok(FermionModes { modes, parity })
}

/// A Fermi component: an SLH triple together with the grading of its system
/// space. The parity table (`S`, `H` even, `L` odd) is checked by
/// [`validate_fermi`], not at construction, so invalid candidates can be
/// diagnosed.
#[derive(Clone, Debug)]
pub struct FermiSLH {
    pub triple: SLHTriple,
    pub context: ParityContext,
}

impl FermiSLH {
    pub fn new(triple: SLHTriple, context: ParityContext) -> Result<Self> {
        if triple.dim() != context.dim() {
            return Err(Error::DimensionMismatch {
                left: triple.dim(),
                right: context.dim(),
                context: "FermiSLH system space",
            });
        }
        Ok(FermiSLH { triple, context })
    }
}

/// One row of a parity diagnostics table.
#[derive(Clone, Debug)]
pub struct ParityCheck {
    /// Which coefficient, e.g. `"S[0][1]"`, `"L[0]"`, `"H"`.
    pub label: String,
    pub required: Parity,
    pub observed: Parity,
    pub even_deviation: f64,
    pub odd_deviation: f64,
    pub passed: bool,
}

/// Diagnostics from a parity-table validation.
#[derive(Clone, Debug)]
pub struct FermiDiagnostics {
    pub checks: Vec<ParityCheck>,
    pub passed: bool,
}

impl FermiDiagnostics {
    fn push(
        &mut self,
        label: String,
        required: Parity,
        x: &Operator,
        ctx: &ParityContext,
        tol: f64,
    ) {
        let cls = parity_of(x, ctx, tol).expect("dims checked by caller");
        // judged by the residual of the required parity, so the zero
        // operator (even and odd at once) passes either requirement
        let passed = match required {
            Parity::Even => cls.even_deviation <= tol,
            Parity::Odd => cls.odd_deviation <= tol,
            Parity::Mixed => true,
        };
        self.passed &= passed;
        self.checks.push(ParityCheck {
            label,
            required,
            observed: cls.parity,
            even_deviation: cls.even_deviation,
            odd_deviation: cls.odd_deviation,
            passed,
        });
    }

    pub fn first_failure(&self) -> Option<&ParityCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Checks the Itō-side parity table: every `S_ij` even, every `L_i` odd,
/// `H` even.
pub fn validate_fermi(g: &FermiSLH, tol: f64) -> FermiDiagnostics {
    let mut diag = FermiDiagnostics {
        checks: Vec::new(),
        passed: true,
    };
    let n = g.triple.channels();
    for i in 0..n {
        for j in 0..n {
            diag.push(
                format!("S[{i}][{j}]"),
                Parity::Even,
                g.triple.s(i, j),
                &g.context,
                tol,
            );
        }
    }
    for i in 0..n {
        diag.push(
            format!("L[{i}]"),
            Parity::Odd,
            g.triple.l(i),
            &g.context,
            tol,
        );
    }
    diag.push(
        String::from("H"),
        Parity::Even,
        g.triple.h(),
        &g.context,
        tol,
    );
    diag
}

/// Checks the Stratonovich-side parity table: every quadratic coefficient
/// even, every linear coefficient odd, the constant term even.
pub fn validate_fermi_stratonovich(
    coeffs: &StratonovichCoefficients,
    ctx: &ParityContext,
    tol: f64,
) -> Result<FermiDiagnostics> {
    if coeffs.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch {
            left: coeffs.dim(),
            right: ctx.dim(),
            context: "validate_fermi_stratonovich",
        });
    }
    let mut diag = FermiDiagnostics {
        checks: Vec::new(),
        passed: true,
    };
    let n = coeffs.channels();
    for i in 0..n {
        for j in 0..n {
            diag.push(
                format!("E[{i}][{j}]"),
                Parity::Even,
                coeffs.quadratic(i, j),
                ctx,
                tol,
            );
        }
    }
    for i in 0..n {
        diag.push(
            format!("Evec[{i}]"),
            Parity::Odd,
            coeffs.linear(i),
            ctx,
            tol,
        );
    }
    diag.push(
        String::from("E00"),
        Parity::Even,
        coeffs.constant(),
        ctx,
        tol,
    );
    Ok(diag)
}

/// Coefficients of the graded Langevin equation:
///
/// `gauge_ij = Σ_k S_ki† X S_kj − δ_ij X`,
/// `creation_i = Σ_j S_ji† (η(X)L_j − L_j X)`,
/// `annihilation_j = Σ_i (L_i† η(X) − X L_i†) S_ij`,
/// `drift = Σ_i L_i† η(X) L_i − ½{Σ_i L_i†L_i, X} − i[X, H]`,
///
/// with `η(X) = ηXη`. For even `X` this is the Bose Langevin equation; for
/// odd `X` it reproduces the anticommutator form.
pub fn fermi_langevin(g: &FermiSLH, x: &Operator) -> Result<LangevinCoefficients> {
    let triple = &g.triple;
    if x.dim() != triple.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: triple.dim(),
            context: "fermi_langevin observable",
        });
    }
    let n = triple.channels();
    let d = triple.dim();
    let graded = g.context.conjugate(x);

    let mut gauge = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Operator::zeros(d);
            for k in 0..n {
                acc = &acc + &(&(&triple.s(k, i).dagger() * x) * triple.s(k, j));
            }
            if i == j {
                acc = &acc - x;
            }
            gauge.push(acc);
        }
    }

    let mut creation = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Operator::zeros(d);
        for j in 0..n {
            let term = &(&graded * triple.l(j)) - &(triple.l(j) * x);
            acc = &acc + &(&triple.s(j, i).dagger() * &term);
        }
        creation.push(acc);
    }

    let mut annihilation = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = Operator::zeros(d);
        for i in 0..n {
            let ld = triple.l(i).dagger();
            let term = &(&ld * &graded) - &(x * &ld);
            acc = &acc + &(&term * triple.s(i, j));
        }
        annihilation.push(acc);
    }

    let mut sandwich = Operator::zeros(d);
    let mut ldl = Operator::zeros(d);
    for i in 0..n {
        let ld = triple.l(i).dagger();
        sandwich = &sandwich + &(&(&ld * &graded) * triple.l(i));
        ldl = &ldl + &(&ld * triple.l(i));
    }
    let half = C64::new(0.5, 0.0);
    let anti = (&(x * &ldl) + &(&ldl * x)).scale(half);
    let hterm = commutator(x, triple.h())?.scale(C64::new(0.0, -1.0));
    let drift = &(&sandwich - &anti) + &hterm;

    Ok(LangevinCoefficients::from_parts(
        n,
        d,
        gauge,
        creation,
        annihilation,
        drift,
    ))
}

fn require_valid(g: &FermiSLH, tol: f64, which: &str) -> Result<()> {
    let diag = validate_fermi(g, tol);
    if let Some(fail) = diag.first_failure() {
        return Err(Error::ParityViolation {
            message: format!(
                "{which} component violates the parity table at {}: required {}, observed {}",
                fail.label, fail.required, fail.observed
            ),
        });
    }
    Ok(())
}

fn same_grading(g2: &FermiSLH, g1: &FermiSLH) -> Result<()> {
    if g1.context.dim() != g2.context.dim()
        || !g1.context.eta().approx_eq(g2.context.eta(), DEFAULT_TOL)
    {
        return Err(Error::ParityViolation {
            message: String::from(
                "Fermi composition requires one shared system space and parity operator \
                 (build joint-space components with fermion_modes)",
            ),
        });
    }
    Ok(())
}

/// Series product of two Fermi components sharing one graded system space;
/// validates the parity table on the inputs and the composite.
pub fn fermi_series(g2: &FermiSLH, g1: &FermiSLH, tol: f64) -> Result<FermiSLH> {
    same_grading(g2, g1)?;
    require_valid(g1, tol, "upstream")?;
    require_valid(g2, tol, "downstream")?;
    let triple = network::series(&g2.triple, &g1.triple)?;
    let composite = FermiSLH::new(triple, g1.context.clone())?;
    require_valid(&composite, tol, "composite")?;
    Ok(composite)
}

/// Feedback reduction of a Fermi component; validates the parity table on
/// the input and the reduced component.
pub fn fermi_feedback_reduce(g: &FermiSLH, r0: usize, s0: usize, tol: f64) -> Result<FermiSLH> {
    require_valid(g, tol, "input")?;
    let triple = network::feedback_reduce(&g.triple, r0, s0)?;
    let reduced = FermiSLH::new(triple, g.context.clone())?;
    require_valid(&reduced, tol, "reduced")?;
    Ok(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{anticommutator, sigma_x};
    use crate::testutil::{c, random_op};
    use alloc::vec;
    use rand::SeedableRng;

    fn single_mode() -> (Operator, ParityContext) {
        let fm = fermion_modes(1).unwrap();
        (fm.modes[0].clone(), fm.context())
    }

    #[test]
    fn smallest_car_representation() {
        let fm = fermion_modes(1).unwrap();
        let want_c = Operator::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let want_eta = Operator::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ])
        .unwrap();
        assert!(fm.modes[0].approx_eq(&want_c, 0.0));
        assert!(fm.parity.approx_eq(&want_eta, 0.0));
    }

    #[test]
    fn car_residuals_vanish() {
        for m in 1..=4 {
            let fm = fermion_modes(m).unwrap();
            let id = Operator::identity(1 << m);
            for a in 0..m {
                for b in 0..m {
                    let mixed = anticommutator(&fm.modes[a], &fm.modes[b].dagger()).unwrap();
                    let want = if a == b {
                        id.clone()
                    } else {
                        Operator::zeros(1 << m)
                    };
                    assert!((&mixed - &want).max_abs() <= 1e-13, "{{c_{a}, c_{b}†}}");
                    let same = anticommutator(&fm.modes[a], &fm.modes[b]).unwrap();
                    assert!(same.max_abs() <= 1e-13, "{{c_{a}, c_{b}}}");
                }
            }
        }
    }

    #[test]
    fn parity_anticommutes_with_modes() {
        let fm = fermion_modes(3).unwrap();
        for mode in &fm.modes {
            let conj = &(&fm.parity * mode) * &fm.parity;
            assert!((&conj + mode).max_abs() <= 1e-13);
        }
    }

    #[test]
    fn mode_cap_enforced() {
        assert!(matches!(
            fermion_modes(7),
            Err(Error::ModeCapExceeded { .. })
        ));
        assert!(fermion_modes_capped(7, 8).is_ok());
    }

    #[test]
    fn parity_classification_examples() {
        let (mode, ctx) = single_mode();
        let id = Operator::identity(2);
        assert_eq!(
            parity_of(&id, &ctx, DEFAULT_TOL).unwrap().parity,
            Parity::Even
        );
        assert_eq!(
            parity_of(&mode, &ctx, DEFAULT_TOL).unwrap().parity,
            Parity::Odd
        );
        let number = &mode.dagger() * &mode;
        assert_eq!(
            parity_of(&number, &ctx, DEFAULT_TOL).unwrap().parity,
            Parity::Even
        );
        // a sum of even and odd parts is mixed, both residuals reported
        let mixed = &id + &mode;
        let cls = parity_of(&mixed, &ctx, DEFAULT_TOL).unwrap();
        assert_eq!(cls.parity, Parity::Mixed);
        assert!(cls.even_deviation > 0.1 && cls.odd_deviation > 0.1);
    }

    #[test]
    fn split_parity_examples() {
        let (mode, ctx) = single_mode();
        let number = &mode.dagger() * &mode;
        let (even, odd) = split_parity(&number, &ctx).unwrap();
        assert!(even.approx_eq(&number, 0.0));
        assert!(odd.max_abs() == 0.0);

        // sigma_x is odd under the sign grading
        let (even, odd) = split_parity(&sigma_x(), &ctx).unwrap();
        assert!(even.max_abs() == 0.0);
        assert!(odd.approx_eq(&sigma_x(), 0.0));

        // exact reassembly for arbitrary operators
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let x = random_op(2, &mut rng);
        let (even, odd) = split_parity(&x, &ctx).unwrap();
        assert!((&(&even + &odd) - &x).max_abs() == 0.0);
    }

    fn decay_component(gamma: f64, omega: f64) -> FermiSLH {
        let (mode, ctx) = single_mode();
        let number = &mode.dagger() * &mode;
        let triple = SLHTriple::new(
            vec![vec![Operator::identity(2)]],
            vec![mode.scale(c(libm::sqrt(gamma), 0.0))],
            number.scale(c(omega, 0.0)),
        )
        .unwrap();
        FermiSLH::new(triple, ctx).unwrap()
    }

    #[test]
    fn parity_table_validation() {
        let good = decay_component(0.8, 1.1);
        assert!(validate_fermi(&good, DEFAULT_TOL).passed);

        // L = c†c is even where odd is required
        let (mode, ctx) = single_mode();
        let bad_l = FermiSLH::new(
            SLHTriple::new(
                vec![vec![Operator::identity(2)]],
                vec![&mode.dagger() * &mode],
                Operator::zeros(2),
            )
            .unwrap(),
            ctx.clone(),
        )
        .unwrap();
        let diag = validate_fermi(&bad_l, DEFAULT_TOL);
        assert!(!diag.passed);
        assert_eq!(diag.first_failure().unwrap().label, "L[0]");

        // S = c is odd where even is required (not unitary either, but the
        // parity diagnostics only look at the grading)
        let bad_s = FermiSLH::new(
            SLHTriple::new(
                vec![vec![mode.clone()]],
                vec![mode.clone()],
                Operator::zeros(2),
            )
            .unwrap(),
            ctx,
        )
        .unwrap();
        let diag = validate_fermi(&bad_s, DEFAULT_TOL);
        assert!(!diag.passed);
        assert_eq!(diag.first_failure().unwrap().label, "S[0][0]");
    }

    #[test]
    fn stratonovich_parity_table() {
        let (mode, ctx) = single_mode();
        let number = &mode.dagger() * &mode;
        let good = StratonovichCoefficients::new(
            vec![vec![number.scale(c(0.3, 0.0))]],
            vec![mode.scale(c(0.7, 0.0))],
            number.clone(),
        )
        .unwrap();
        assert!(
            validate_fermi_stratonovich(&good, &ctx, DEFAULT_TOL)
                .unwrap()
                .passed
        );

        let bad =
            StratonovichCoefficients::new(vec![vec![number.clone()]], vec![number.clone()], number)
                .unwrap();
        let diag = validate_fermi_stratonovich(&bad, &ctx, DEFAULT_TOL).unwrap();
        assert!(!diag.passed);
        assert_eq!(diag.first_failure().unwrap().label, "Evec[0]");
    }

    #[test]
    fn even_observable_matches_bose_langevin() {
        let g = decay_component(0.9, 0.4);
        let mode = g.triple.l(0).scale(c(1.0 / libm::sqrt(0.9), 0.0));
        let number = &mode.dagger() * &mode;
        // even observables: 1, c†c, and the parity operator itself
        for x in [Operator::identity(2), number, g.context.eta().clone()] {
            let graded = fermi_langevin(&g, &x).unwrap();
            let bose = g.triple.langevin_coefficients(&x).unwrap();
            assert!(graded.max_abs_difference(&bose) <= 1e-12);
        }
    }

    #[test]
    fn odd_observable_decay_drift() {
        // X = c, L = sqrt(gamma) c, S = I, H = 0: drift = -(gamma/2) c
        let gamma = 0.8;
        let g = decay_component(gamma, 0.0);
        let (mode, _) = single_mode();
        let coeffs = fermi_langevin(&g, &mode).unwrap();
        let want = mode.scale(c(-gamma / 2.0, 0.0));
        assert!((&coeffs.drift - &want).max_abs() <= 1e-12);
    }

    #[test]
    fn odd_observable_matches_anticommutator_form() {
        // for odd X and S = I:
        // drift = -(1/2{X, L†}L + 1/2 L†{L, X} + i[X, H])
        let g = decay_component(0.7, 0.9);
        let (mode, _) = single_mode();
        let l = g.triple.l(0);
        let coeffs = fermi_langevin(&g, &mode).unwrap();
        let t1 = &anticommutator(&mode, &l.dagger()).unwrap() * l;
        let t2 = &l.dagger() * &anticommutator(l, &mode).unwrap();
        let t3 = commutator(&mode, g.triple.h()).unwrap().scale(c(0.0, 1.0));
        let want = (&(&t1 + &t2).scale(c(0.5, 0.0)) + &t3).scale(c(-1.0, 0.0));
        assert!((&coeffs.drift - &want).max_abs() <= 1e-12);
        // creation coefficient carries the anticommutator too
        let want_creation = anticommutator(&mode, l).unwrap().scale(c(-1.0, 0.0));
        assert!((&coeffs.creation[0] - &want_creation).max_abs() <= 1e-12);
    }

    #[test]
    fn identity_observable_is_silent() {
        let g = decay_component(0.5, 0.3);
        let coeffs = fermi_langevin(&g, &Operator::identity(2)).unwrap();
        assert!(coeffs.drift.max_abs() <= 1e-13);
        assert!(coeffs.creation[0].max_abs() <= 1e-13);
        assert!(coeffs.annihilation[0].max_abs() <= 1e-13);
        assert!(coeffs.gauge(0, 0).max_abs() <= 1e-13);
    }

    #[test]
    fn fermi_predual_conserves_trace_for_even_sector() {
        // duality against the Bose predual on even observables
        let g = decay_component(0.6, 0.2);
        let mut rng = rand::rngs::StdRng::seed_from_u64(13);
        let rho = {
            let a = random_op(2, &mut rng);
            let pos = &a * &a.dagger();
            let tr = pos.trace().re;
            pos.scale(c(1.0 / tr, 0.0))
        };
        // Tr L*rho = 0 and duality Tr[(LX) rho] = Tr[X (L*rho)] for even X
        let predual = g.triple.lindblad_schrodinger(&rho).unwrap();
        assert!(predual.trace().norm_sqr() < 1e-22);
        let number = {
            let (mode, _) = single_mode();
            &mode.dagger() * &mode
        };
        let lhs = (&fermi_langevin(&g, &number).unwrap().drift * &rho).trace();
        let rhs = (&number * &predual).trace();
        assert!((lhs - rhs).norm_sqr() < 1e-22);
    }

    fn joint_decay_components(g1: f64, g2: f64) -> (FermiSLH, FermiSLH) {
        let fm = fermion_modes(2).unwrap();
        let ctx = fm.context();
        let make = |mode: &Operator, gamma: f64| {
            let triple = SLHTriple::new(
                vec![vec![Operator::identity(4)]],
                vec![mode.scale(c(libm::sqrt(gamma), 0.0))],
                (&mode.dagger() * mode).scale(c(0.3, 0.0)),
            )
            .unwrap();
            FermiSLH::new(triple, ctx.clone()).unwrap()
        };
        (make(&fm.modes[0], g1), make(&fm.modes[1], g2))
    }

    #[test]
    fn series_of_fermi_components_preserves_parity() {
        let (c1, c2) = joint_decay_components(0.8, 0.5);
        let composite = fermi_series(&c2, &c1, DEFAULT_TOL).unwrap();
        assert!(validate_fermi(&composite, DEFAULT_TOL).passed);
        composite.triple.validate(1e-10).unwrap();
    }

    #[test]
    fn fermi_series_identity_law() {
        let (c1, _) = joint_decay_components(0.8, 0.5);
        let id = FermiSLH::new(SLHTriple::identity(1, 4), c1.context.clone()).unwrap();
        let ser = fermi_series(&id, &c1, DEFAULT_TOL).unwrap();
        assert!((ser.triple.l(0) - c1.triple.l(0)).max_abs() <= 1e-12);
        assert!((ser.triple.h() - c1.triple.h()).max_abs() <= 1e-12);
    }

    #[test]
    fn fermi_feedback_preserves_parity() {
        // two-channel Fermi component with a non-trivial even scattering
        let fm = fermion_modes(2).unwrap();
        let ctx = fm.context();
        let theta = 0.4_f64;
        let (cc, ss) = (libm::cos(theta), libm::sin(theta));
        let id4 = Operator::identity(4);
        let triple = SLHTriple::new(
            vec![
                vec![id4.scale(c(cc, 0.0)), id4.scale(c(ss, 0.0))],
                vec![id4.scale(c(-ss, 0.0)), id4.scale(c(cc, 0.0))],
            ],
            vec![
                fm.modes[0].scale(c(0.9, 0.0)),
                fm.modes[1].scale(c(0.7, 0.0)),
            ],
            (&fm.modes[0].dagger() * &fm.modes[0]).scale(c(0.2, 0.0)),
        )
        .unwrap();
        let g = FermiSLH::new(triple, ctx).unwrap();
        assert!(validate_fermi(&g, DEFAULT_TOL).passed);
        let reduced = fermi_feedback_reduce(&g, 1, 1, DEFAULT_TOL).unwrap();
        assert!(validate_fermi(&reduced, DEFAULT_TOL).passed);
        assert_eq!(reduced.triple.channels(), 1);
    }

    #[test]
    fn fermi_series_rejects_invalid_input() {
        let (mode, ctx) = single_mode();
        let bad = FermiSLH::new(
            SLHTriple::new(
                vec![vec![Operator::identity(2)]],
                vec![&mode.dagger() * &mode],
                Operator::zeros(2),
            )
            .unwrap(),
            ctx.clone(),
        )
        .unwrap();
        let good = FermiSLH::new(SLHTriple::identity(1, 2), ctx).unwrap();
        let err = fermi_series(&good, &bad, DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, Error::ParityViolation { .. }));
    }
}
