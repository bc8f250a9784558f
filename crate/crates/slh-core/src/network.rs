//! Quantum feedback network algebra: concatenation, the series product,
//! general feedback reduction, and whole-graph reduction of a component
//! network to a single triple in the zero-delay limit.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operator::{Operator, DIM_LIMIT};
use crate::slh::SLHTriple;

/// Condition-estimate ceiling for the loop inverse `(1 − S_loop)⁻¹`.
pub const LOOP_CONDITION_LIMIT: f64 = 1e10;

/// Open-loop composition of two components on distinct system spaces:
/// operators are tensor-promoted onto the joint space, `S` becomes block
/// diagonal, `L` is stacked, and the Hamiltonians add.
pub fn concatenate(g1: &SLHTriple, g2: &SLHTriple) -> Result<SLHTriple> {
    let (d1, d2) = (g1.dim(), g2.dim());
    let joint = d1.saturating_mul(d2);
    if joint > DIM_LIMIT {
        return Err(Error::DimensionLimit {
            requested: joint,
            limit: DIM_LIMIT,
        });
    }
    let (n1, n2) = (g1.channels(), g2.channels());
    let n = n1 + n2;
    let id1 = Operator::identity(d1);
    let id2 = Operator::identity(d2);

    let promote1 = |op: &Operator| op.tensor(&id2).expect("within dimension limit");
    let promote2 = |op: &Operator| id1.tensor(op).expect("within dimension limit");

    let mut scattering = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            row.push(if i < n1 && j < n1 {
                promote1(g1.s(i, j))
            } else if i >= n1 && j >= n1 {
                promote2(g2.s(i - n1, j - n1))
            } else {
                Operator::zeros(joint)
            });
        }
        scattering.push(row);
    }
    let mut coupling = Vec::with_capacity(n);
    for i in 0..n1 {
        coupling.push(promote1(g1.l(i)));
    }
    for i in 0..n2 {
        coupling.push(promote2(g2.l(i)));
    }
    let hamiltonian = &promote1(g1.h()) + &promote2(g2.h());
    SLHTriple::new(scattering, coupling, hamiltonian)
}

/// Tensor-promotes two components onto their joint space without touching
/// the channel structure (each keeps its own ports). Useful for applying
/// [`series`] to components declared on distinct spaces.
pub fn promote_pair(g1: &SLHTriple, g2: &SLHTriple) -> Result<(SLHTriple, SLHTriple)> {
    let (d1, d2) = (g1.dim(), g2.dim());
    let joint = d1.saturating_mul(d2);
    if joint > DIM_LIMIT {
        return Err(Error::DimensionLimit {
            requested: joint,
            limit: DIM_LIMIT,
        });
    }
    let id1 = Operator::identity(d1);
    let id2 = Operator::identity(d2);
    let lift = |g: &SLHTriple, first: bool| -> Result<SLHTriple> {
        let promote = |op: &Operator| {
            if first {
                op.tensor(&id2).expect("within dimension limit")
            } else {
                id1.tensor(op).expect("within dimension limit")
            }
        };
        let n = g.channels();
        let scattering = (0..n)
            .map(|i| (0..n).map(|j| promote(g.s(i, j))).collect())
            .collect();
        let coupling = (0..n).map(|i| promote(g.l(i))).collect();
        SLHTriple::new(scattering, coupling, promote(g.h()))
    };
    Ok((lift(g1, true)?, lift(g2, false)?))
}

/// Series product `g2 ◁ g1` of two components on one system space with equal
/// channel counts (`g1` is traversed first):
///
/// `S = S²S¹`, `L = L² + S²L¹`, `H = H¹ + H² + Im{Σ_i (L²_i)† (S²L¹)_i}`.
pub fn series(g2: &SLHTriple, g1: &SLHTriple) -> Result<SLHTriple> {
    if g1.channels() != g2.channels() {
        return Err(Error::ChannelMismatch {
            left: g2.channels(),
            right: g1.channels(),
        });
    }
    if g1.dim() != g2.dim() {
        return Err(Error::DimensionMismatch {
            left: g2.dim(),
            right: g1.dim(),
            context: "series on one system space (promote first)",
        });
    }
    let n = g1.channels();
    let d = g1.dim();

    let mut scattering = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Operator::zeros(d);
            for k in 0..n {
                acc = &acc + &(g2.s(i, k) * g1.s(k, j));
            }
            row.push(acc);
        }
        scattering.push(row);
    }

    // forwarded coupling S² L¹
    let mut forwarded = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Operator::zeros(d);
        for j in 0..n {
            acc = &acc + &(g2.s(i, j) * g1.l(j));
        }
        forwarded.push(acc);
    }
    let coupling: Vec<Operator> = forwarded
        .iter()
        .enumerate()
        .map(|(i, fwd)| g2.l(i) + fwd)
        .collect();

    let mut cross = Operator::zeros(d);
    for (i, fwd) in forwarded.iter().enumerate() {
        cross = &cross + &(&g2.l(i).dagger() * fwd);
    }
    let hamiltonian = &(g1.h() + g2.h()) + &cross.im_part();

    SLHTriple::new(scattering, coupling, hamiltonian)
}

/// Eliminates the internal edge feeding output `s0` back into input `r0`:
///
/// `S'_{sr} = S_{sr} + S_{s r0}(1 − S_{s0 r0})⁻¹ S_{s0 r}`,
/// `L'_s = L_s + S_{s r0}(1 − S_{s0 r0})⁻¹ L_{s0}`,
/// `H' = H + Σ_s Im{L_s† S_{s r0}(1 − S_{s0 r0})⁻¹ L_{s0}}`,
///
/// where the `H'` sum runs over every output channel of the unreduced
/// component, including `s0` itself: the loop's own contribution is
/// what makes a phase-shifted self-loop pull the internal frequency.
pub fn feedback_reduce(g: &SLHTriple, r0: usize, s0: usize) -> Result<SLHTriple> {
    feedback_reduce_traced(g, r0, s0, None).map(|(t, _)| t)
}

fn feedback_reduce_traced(
    g: &SLHTriple,
    r0: usize,
    s0: usize,
    edge_label: Option<&str>,
) -> Result<(SLHTriple, f64)> {
    let n = g.channels();
    if n < 2 {
        return Err(Error::Network {
            message: format!("feedback reduction needs at least 2 channels, component has {n}"),
        });
    }
    if r0 >= n || s0 >= n {
        return Err(Error::Network {
            message: format!("feedback ports ({r0}, {s0}) out of range for {n} channels"),
        });
    }
    let d = g.dim();

    let loop_gain = Operator::identity(d);
    let loop_op = &loop_gain - g.s(s0, r0);
    let (inv, condition) = match loop_op.try_inverse() {
        Some(pair) => pair,
        None => {
            return Err(Error::AlgebraicLoop {
                condition: f64::INFINITY,
                edge: edge_label.map(String::from),
            })
        }
    };
    if condition > LOOP_CONDITION_LIMIT {
        return Err(Error::AlgebraicLoop {
            condition,
            edge: edge_label.map(String::from),
        });
    }

    let retained_out: Vec<usize> = (0..n).filter(|&s| s != s0).collect();
    let retained_in: Vec<usize> = (0..n).filter(|&r| r != r0).collect();

    let mut scattering = Vec::with_capacity(n - 1);
    for &s in &retained_out {
        let through = &(g.s(s, r0) * &inv);
        let mut row = Vec::with_capacity(n - 1);
        for &r in &retained_in {
            row.push(g.s(s, r) + &(through * g.s(s0, r)));
        }
        scattering.push(row);
    }

    let fed_back = &inv * g.l(s0);
    let coupling: Vec<Operator> = retained_out
        .iter()
        .map(|&s| g.l(s) + &(g.s(s, r0) * &fed_back))
        .collect();

    let mut cross = Operator::zeros(d);
    for s in 0..n {
        cross = &cross + &(&g.l(s).dagger() * &(g.s(s, r0) * &fed_back));
    }
    let hamiltonian = g.h() + &cross.im_part();

    Ok((
        SLHTriple::new(scattering, coupling, hamiltonian)?,
        condition,
    ))
}

/// Reorders channels: row `i` of the result is row `output_perm[i]` of the
/// input (in `S` and `L`), column `j` is column `input_perm[j]` of `S`.
pub fn permute_channels(
    g: &SLHTriple,
    input_perm: &[usize],
    output_perm: &[usize],
) -> Result<SLHTriple> {
    let n = g.channels();
    check_permutation(input_perm, n, "input")?;
    check_permutation(output_perm, n, "output")?;
    let scattering = output_perm
        .iter()
        .map(|&i| input_perm.iter().map(|&j| g.s(i, j).clone()).collect())
        .collect();
    let coupling = output_perm.iter().map(|&i| g.l(i).clone()).collect();
    SLHTriple::new(scattering, coupling, g.h().clone())
}

fn check_permutation(perm: &[usize], n: usize, which: &str) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation {
            message: format!(
                "{which} permutation has {} entries for {n} channels",
                perm.len()
            ),
        });
    }
    let mut seen = alloc::vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation {
                message: format!("{which} permutation is not a permutation of 0..{n}"),
            });
        }
        seen[p] = true;
    }
    Ok(())
}

/// A port of a named component, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Port {
    pub component: String,
    pub port: usize,
}

impl Port {
    pub fn new(component: impl Into<String>, port: usize) -> Self {
        Port {
            component: component.into(),
            port,
        }
    }
}

impl core::fmt::Display for Port {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}[{}]", self.component, self.port)
    }
}

/// An internal edge: `from` is an output port, `to` an input port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: Port,
    pub to: Port,
}

/// A directed network of named components with internal edges and declared
/// external port orderings. Validated on construction.
#[derive(Clone, Debug)]
pub struct NetworkSpec {
    components: Vec<(String, SLHTriple)>,
    edges: Vec<Edge>,
    external_inputs: Vec<Port>,
    external_outputs: Vec<Port>,
}

impl NetworkSpec {
    pub fn new(
        components: Vec<(String, SLHTriple)>,
        edges: Vec<Edge>,
        external_inputs: Vec<Port>,
        external_outputs: Vec<Port>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Network {
                message: String::from("network has no components"),
            });
        }
        for (i, (name, _)) in components.iter().enumerate() {
            if components[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::Network {
                    message: format!("duplicate component name {name:?}"),
                });
            }
        }
        let find = |port: &Port, kind: &str| -> Result<()> {
            match components.iter().find(|(name, _)| name == &port.component) {
                None => Err(Error::Network {
                    message: format!("{kind} port {port} references unknown component"),
                }),
                Some((_, triple)) if port.port >= triple.channels() => Err(Error::Network {
                    message: format!(
                        "{kind} port {port} out of range ({} channels)",
                        triple.channels()
                    ),
                }),
                Some(_) => Ok(()),
            }
        };

        let mut used_outputs: Vec<&Port> = Vec::new();
        let mut used_inputs: Vec<&Port> = Vec::new();
        for edge in &edges {
            find(&edge.from, "edge source (output)")?;
            find(&edge.to, "edge target (input)")?;
            if used_outputs.contains(&&edge.from) {
                return Err(Error::Network {
                    message: format!("output port {} wired twice", edge.from),
                });
            }
            if used_inputs.contains(&&edge.to) {
                return Err(Error::Network {
                    message: format!("input port {} wired twice", edge.to),
                });
            }
            used_outputs.push(&edge.from);
            used_inputs.push(&edge.to);
        }

        // the declared external ports must be exactly the unwired ones
        let all_ports = |_which: &str| -> Vec<Port> {
            let mut v = Vec::new();
            for (name, triple) in &components {
                for p in 0..triple.channels() {
                    v.push(Port::new(name.clone(), p));
                }
            }
            v
        };
        let free_inputs: Vec<Port> = all_ports("in")
            .into_iter()
            .filter(|p| !used_inputs.contains(&p))
            .collect();
        let free_outputs: Vec<Port> = all_ports("out")
            .into_iter()
            .filter(|p| !used_outputs.contains(&p))
            .collect();
        check_external(&external_inputs, &free_inputs, "input")?;
        check_external(&external_outputs, &free_outputs, "output")?;

        Ok(NetworkSpec {
            components,
            edges,
            external_inputs,
            external_outputs,
        })
    }

    /// Builds the network with external ports in canonical order (component
    /// declaration order, then port index).
    pub fn with_default_external(
        components: Vec<(String, SLHTriple)>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (name, triple) in &components {
            for p in 0..triple.channels() {
                let port = Port::new(name.clone(), p);
                if !edges.iter().any(|e| e.to == port) {
                    inputs.push(port.clone());
                }
                if !edges.iter().any(|e| e.from == port) {
                    outputs.push(port);
                }
            }
        }
        NetworkSpec::new(components, edges, inputs, outputs)
    }

    pub fn components(&self) -> &[(String, SLHTriple)] {
        &self.components
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn external_inputs(&self) -> &[Port] {
        &self.external_inputs
    }

    pub fn external_outputs(&self) -> &[Port] {
        &self.external_outputs
    }
}

fn check_external(declared: &[Port], free: &[Port], which: &str) -> Result<()> {
    if declared.len() != free.len() {
        return Err(Error::Network {
            message: format!(
                "declared {} external {which} ports, network leaves {} unwired",
                declared.len(),
                free.len()
            ),
        });
    }
    for port in declared {
        if !free.contains(port) {
            return Err(Error::Network {
                message: format!("external {which} port {port} is wired internally or unknown"),
            });
        }
    }
    for port in free {
        if !declared.contains(port) {
            return Err(Error::Network {
                message: format!("unwired {which} port {port} missing from the external list"),
            });
        }
    }
    Ok(())
}

/// One eliminated edge in a [`ReductionTrace`].
#[derive(Clone, Debug)]
pub struct ReductionStep {
    /// `"source -> target"` in component/port notation.
    pub edge: String,
    /// Condition estimate of `1 − S_loop` at elimination time.
    pub condition: f64,
    /// Channel count after the elimination.
    pub channels_after: usize,
}

/// Diagnostics from [`reduce_network`]: one step per eliminated edge.
#[derive(Clone, Debug, Default)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

/// Concatenates all components onto the joint space, eliminates every
/// internal edge (in declaration order), and permutes the surviving
/// channels into the declared external order.
pub fn reduce_network(spec: &NetworkSpec) -> Result<(SLHTriple, ReductionTrace)> {
    let mut iter = spec.components().iter();
    let (_, first) = iter.next().expect("validated non-empty");
    let mut triple = first.clone();
    for (_, next) in iter {
        triple = concatenate(&triple, next)?;
    }

    let mut input_ports: Vec<Port> = Vec::new();
    let mut output_ports: Vec<Port> = Vec::new();
    for (name, component) in spec.components() {
        for p in 0..component.channels() {
            input_ports.push(Port::new(name.clone(), p));
            output_ports.push(Port::new(name.clone(), p));
        }
    }

    let mut trace = ReductionTrace::default();
    for edge in spec.edges() {
        let s0 = output_ports
            .iter()
            .position(|p| p == &edge.from)
            .expect("validated");
        let r0 = input_ports
            .iter()
            .position(|p| p == &edge.to)
            .expect("validated");
        let label = format!("{} -> {}", edge.from, edge.to);
        let (reduced, condition) = feedback_reduce_traced(&triple, r0, s0, Some(&label))?;
        triple = reduced;
        output_ports.remove(s0);
        input_ports.remove(r0);
        trace.steps.push(ReductionStep {
            edge: label,
            condition,
            channels_after: triple.channels(),
        });
    }

    let output_perm: Vec<usize> = spec
        .external_outputs()
        .iter()
        .map(|p| output_ports.iter().position(|q| q == p).expect("validated"))
        .collect();
    let input_perm: Vec<usize> = spec
        .external_inputs()
        .iter()
        .map(|p| input_ports.iter().position(|q| q == p).expect("validated"))
        .collect();
    let triple = permute_channels(&triple, &input_perm, &output_perm)?;
    Ok((triple, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{annihilator, C64};
    use crate::testutil::{c, random_triple};
    use alloc::vec;
    use rand::SeedableRng;

    fn scalar_triple(s: C64, l: C64, h: f64) -> SLHTriple {
        SLHTriple::new(
            vec![vec![Operator::scalar(s)]],
            vec![Operator::scalar(l)],
            Operator::scalar(c(h, 0.0)),
        )
        .unwrap()
    }

    fn cavity(dim: usize, kappa: f64, delta: f64) -> SLHTriple {
        let a = annihilator(dim);
        SLHTriple::new(
            vec![vec![Operator::identity(dim)]],
            vec![a.scale(c(libm::sqrt(kappa), 0.0))],
            (&a.dagger() * &a).scale(c(delta, 0.0)),
        )
        .unwrap()
    }

    fn max_diff(a: &SLHTriple, b: &SLHTriple) -> f64 {
        assert_eq!(a.channels(), b.channels());
        let n = a.channels();
        let mut worst = (a.h() - b.h()).max_abs();
        for i in 0..n {
            worst = worst.max((a.l(i) - b.l(i)).max_abs());
            for j in 0..n {
                worst = worst.max((a.s(i, j) - b.s(i, j)).max_abs());
            }
        }
        worst
    }

    #[test]
    fn concatenate_trivial_components() {
        let id = scalar_triple(c(1.0, 0.0), c(0.0, 0.0), 0.0);
        let cat = concatenate(&id, &id).unwrap();
        assert_eq!(cat.channels(), 2);
        assert_eq!(cat.dim(), 1);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((cat.s(i, j).get(0, 0) - c(want, 0.0)).norm_sqr() < 1e-30);
            }
        }
        assert!(cat.l(0).is_zero() && cat.l(1).is_zero());
        assert!(cat.h().is_zero());
    }

    #[test]
    fn concatenate_two_cavities() {
        let g1 = cavity(2, 1.0, 0.5);
        let g2 = cavity(2, 2.0, -0.3);
        let cat = concatenate(&g1, &g2).unwrap();
        assert_eq!(cat.channels(), 2);
        assert_eq!(cat.dim(), 4);
        let id2 = Operator::identity(2);
        assert!(cat.l(0).approx_eq(&g1.l(0).tensor(&id2).unwrap(), 0.0));
        assert!(cat.l(1).approx_eq(&id2.tensor(g2.l(0)).unwrap(), 0.0));
        let want_h = &g1.h().tensor(&id2).unwrap() + &id2.tensor(g2.h()).unwrap();
        assert!(cat.h().approx_eq(&want_h, 0.0));
        assert!(cat.s(0, 1).is_zero() && cat.s(1, 0).is_zero());
        cat.validate(1e-12).unwrap();
    }

    #[test]
    fn concatenate_preserves_validity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(19);
        for _ in 0..5 {
            let g1 = random_triple(1, 2, &mut rng);
            let g2 = random_triple(2, 2, &mut rng);
            let cat = concatenate(&g1, &g2).unwrap();
            assert_eq!(cat.channels(), 3);
            cat.validate(1e-10).unwrap();
        }
    }

    #[test]
    fn series_identity_laws_exact() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(29);
        let g = random_triple(2, 2, &mut rng);
        let id = SLHTriple::identity(2, 2);
        assert!(max_diff(&series(&id, &g).unwrap(), &g) <= 1e-12);
        assert!(max_diff(&series(&g, &id).unwrap(), &g) <= 1e-12);
    }

    #[test]
    fn series_adds_scalar_phases() {
        let (th1, th2) = (0.7, -1.1);
        let p1 = scalar_triple(c(libm::cos(th1), libm::sin(th1)), c(0.0, 0.0), 0.0);
        let p2 = scalar_triple(c(libm::cos(th2), libm::sin(th2)), c(0.0, 0.0), 0.0);
        let ser = series(&p2, &p1).unwrap();
        let want = c(libm::cos(th1 + th2), libm::sin(th1 + th2));
        assert!((ser.s(0, 0).get(0, 0) - want).norm_sqr() < 1e-30);
    }

    #[test]
    fn series_scalar_couplings_add() {
        // (1, 2, 0) ◁ (1, 1, 0) = (1, 3, 0); Im(2·1) = 0
        let g1 = scalar_triple(c(1.0, 0.0), c(1.0, 0.0), 0.0);
        let g2 = scalar_triple(c(1.0, 0.0), c(2.0, 0.0), 0.0);
        let ser = series(&g2, &g1).unwrap();
        assert!((ser.l(0).get(0, 0) - c(3.0, 0.0)).norm_sqr() < 1e-30);
        assert!(ser.h().is_zero());
    }

    #[test]
    fn io_coefficients_of_series_are_the_composite() {
        // dB_out of the cascade is rotated by S²S¹ and driven by L² + S²L¹
        let mut rng = rand::rngs::StdRng::seed_from_u64(83);
        let g1 = random_triple(1, 2, &mut rng);
        let g2 = random_triple(1, 2, &mut rng);
        let ser = series(&g2, &g1).unwrap();
        let (s, l) = ser.io_coefficients();
        let want_s = g2.s(0, 0) * g1.s(0, 0);
        let want_l = g2.l(0) + &(g2.s(0, 0) * g1.l(0));
        assert!(s[0].approx_eq(&want_s, 1e-14));
        assert!(l[0].approx_eq(&want_l, 1e-14));
    }

    #[test]
    fn series_associative() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(43);
        for _ in 0..10 {
            let g1 = random_triple(2, 2, &mut rng);
            let g2 = random_triple(2, 2, &mut rng);
            let g3 = random_triple(2, 2, &mut rng);
            let left = series(&g3, &series(&g2, &g1).unwrap()).unwrap();
            let right = series(&series(&g3, &g2).unwrap(), &g1).unwrap();
            assert!(max_diff(&left, &right) <= 1e-11);
        }
    }

    #[test]
    fn series_output_is_valid() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(47);
        for _ in 0..10 {
            let g1 = random_triple(2, 2, &mut rng);
            let g2 = random_triple(2, 2, &mut rng);
            series(&g2, &g1).unwrap().validate(1e-10).unwrap();
        }
    }

    #[test]
    fn feedback_hadamard_reduces_to_unity() {
        let h = libm::sqrt(0.5);
        let hadamard = vec![
            vec![Operator::scalar(c(h, 0.0)), Operator::scalar(c(h, 0.0))],
            vec![Operator::scalar(c(h, 0.0)), Operator::scalar(c(-h, 0.0))],
        ];
        let g = SLHTriple::new(
            hadamard,
            vec![Operator::zeros(1), Operator::zeros(1)],
            Operator::zeros(1),
        )
        .unwrap();
        let red = feedback_reduce(&g, 1, 1).unwrap();
        assert_eq!(red.channels(), 1);
        // 1/sqrt(2) + 1/(2 + sqrt(2)) = 1 exactly
        assert!((red.s(0, 0).get(0, 0) - c(1.0, 0.0)).norm_sqr() < 1e-24);
        assert!(red.l(0).is_zero());
        assert!(red.h().max_abs() < 1e-15);
    }

    #[test]
    fn feedback_on_decoupled_loop_is_projection() {
        // block-diagonal S with a zero loop block: retained channel untouched
        let mut rng = rand::rngs::StdRng::seed_from_u64(53);
        let keep = random_triple(1, 2, &mut rng);
        let mut loop_part = random_triple(1, 2, &mut rng);
        // force the loop scattering block to zero, keeping everything else
        loop_part = SLHTriple::new(
            vec![vec![Operator::zeros(2)]],
            vec![loop_part.l(0).clone()],
            loop_part.h().clone(),
        )
        .unwrap();
        let n2 = SLHTriple::new(
            vec![
                vec![keep.s(0, 0).clone(), Operator::zeros(2)],
                vec![Operator::zeros(2), loop_part.s(0, 0).clone()],
            ],
            vec![keep.l(0).clone(), loop_part.l(0).clone()],
            keep.h().clone(),
        )
        .unwrap();
        let red = feedback_reduce(&n2, 1, 1).unwrap();
        assert!(red.s(0, 0).approx_eq(keep.s(0, 0), 1e-14));
        assert!(red.l(0).approx_eq(keep.l(0), 1e-14));
    }

    #[test]
    fn feedback_algebraic_loop_detected() {
        let g = SLHTriple::identity(2, 1);
        let err = feedback_reduce(&g, 1, 1).unwrap_err();
        assert!(matches!(err, Error::AlgebraicLoop { .. }));
    }

    #[test]
    fn feedback_preserves_unimodularity() {
        // |S_red| = 1 for scalar feedback of a 2×2 unitary with L = 0
        let mut rng = rand::rngs::StdRng::seed_from_u64(59);
        for _ in 0..50 {
            let g = random_triple(2, 1, &mut rng);
            let lossless = SLHTriple::new(
                vec![
                    vec![g.s(0, 0).clone(), g.s(0, 1).clone()],
                    vec![g.s(1, 0).clone(), g.s(1, 1).clone()],
                ],
                vec![Operator::zeros(1), Operator::zeros(1)],
                Operator::zeros(1),
            )
            .unwrap();
            match feedback_reduce(&lossless, 1, 1) {
                Ok(red) => {
                    let mag = libm::sqrt(red.s(0, 0).get(0, 0).norm_sqr());
                    assert!((mag - 1.0).abs() <= 1e-12, "|S_red| = {mag}");
                }
                Err(Error::AlgebraicLoop { .. }) => {} // legally singular draw
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn series_via_feedback() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(61);
        for _ in 0..5 {
            let g1 = random_triple(1, 2, &mut rng);
            let g2 = random_triple(1, 2, &mut rng);
            let cat = concatenate(&g1, &g2).unwrap();
            // connect g1's output (global 0) to g2's input (global 1)
            let red = feedback_reduce(&cat, 1, 0).unwrap();
            let (p1, p2) = promote_pair(&g1, &g2).unwrap();
            let ser = series(&p2, &p1).unwrap();
            assert!(max_diff(&red, &ser) <= 1e-10);
        }
    }

    #[test]
    fn reduce_single_edge_equals_series() {
        let g1 = cavity(2, 1.0, 0.4);
        let g2 = cavity(2, 0.7, -0.2);
        let spec = NetworkSpec::with_default_external(
            vec![
                (String::from("first"), g1.clone()),
                (String::from("second"), g2.clone()),
            ],
            vec![Edge {
                from: Port::new("first", 0),
                to: Port::new("second", 0),
            }],
        )
        .unwrap();
        let (reduced, trace) = reduce_network(&spec).unwrap();
        assert_eq!(trace.steps.len(), 1);
        assert_eq!(reduced.channels(), 1);
        let (p1, p2) = promote_pair(&g1, &g2).unwrap();
        let ser = series(&p2, &p1).unwrap();
        assert!(max_diff(&reduced, &ser) <= 1e-10);
    }

    #[test]
    fn reduce_without_edges_is_concatenation() {
        let g1 = cavity(2, 1.0, 0.4);
        let g2 = cavity(2, 0.7, -0.2);
        let spec = NetworkSpec::with_default_external(
            vec![
                (String::from("a"), g1.clone()),
                (String::from("b"), g2.clone()),
            ],
            vec![],
        )
        .unwrap();
        let (reduced, trace) = reduce_network(&spec).unwrap();
        assert!(trace.steps.is_empty());
        assert!(max_diff(&reduced, &concatenate(&g1, &g2).unwrap()) == 0.0);
    }

    #[test]
    fn reduce_phase_chain() {
        let phase =
            |theta: f64| scalar_triple(c(libm::cos(theta), libm::sin(theta)), c(0.0, 0.0), 0.0);
        let thetas = [0.3, 1.1, -0.5];
        let spec = NetworkSpec::with_default_external(
            vec![
                (String::from("p0"), phase(thetas[0])),
                (String::from("p1"), phase(thetas[1])),
                (String::from("p2"), phase(thetas[2])),
            ],
            vec![
                Edge {
                    from: Port::new("p0", 0),
                    to: Port::new("p1", 0),
                },
                Edge {
                    from: Port::new("p1", 0),
                    to: Port::new("p2", 0),
                },
            ],
        )
        .unwrap();
        let (reduced, trace) = reduce_network(&spec).unwrap();
        let counts: Vec<usize> = trace.steps.iter().map(|s| s.channels_after).collect();
        assert_eq!(counts, vec![2, 1]);
        let total: f64 = thetas.iter().sum();
        let want = c(libm::cos(total), libm::sin(total));
        assert!((reduced.s(0, 0).get(0, 0) - want).norm_sqr() < 1e-28);
    }

    #[test]
    fn reduce_order_independent() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(67);
        let comps = vec![
            (String::from("a"), random_triple(1, 2, &mut rng)),
            (String::from("b"), random_triple(1, 2, &mut rng)),
            (String::from("c"), random_triple(1, 2, &mut rng)),
        ];
        let e1 = Edge {
            from: Port::new("a", 0),
            to: Port::new("b", 0),
        };
        let e2 = Edge {
            from: Port::new("b", 0),
            to: Port::new("c", 0),
        };
        let spec_fwd =
            NetworkSpec::with_default_external(comps.clone(), vec![e1.clone(), e2.clone()])
                .unwrap();
        let spec_rev = NetworkSpec::with_default_external(comps, vec![e2, e1]).unwrap();
        let (t1, _) = reduce_network(&spec_fwd).unwrap();
        let (t2, _) = reduce_network(&spec_rev).unwrap();
        assert!(max_diff(&t1, &t2) <= 1e-9);
    }

    #[test]
    fn reduce_respects_declared_external_order() {
        let g = cavity(2, 1.0, 0.0);
        // two disconnected components; declare reversed external order
        let spec = NetworkSpec::new(
            vec![
                (String::from("a"), g.clone()),
                (String::from("b"), g.clone()),
            ],
            vec![],
            vec![Port::new("b", 0), Port::new("a", 0)],
            vec![Port::new("b", 0), Port::new("a", 0)],
        )
        .unwrap();
        let (reduced, _) = reduce_network(&spec).unwrap();
        let cat = concatenate(&g, &g).unwrap();
        // channel 0 of the result is component b, i.e. old channel 1
        assert!(reduced.l(0).approx_eq(cat.l(1), 0.0));
        assert!(reduced.l(1).approx_eq(cat.l(0), 0.0));
    }

    #[test]
    fn permute_identity_and_involution() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(71);
        let g = random_triple(2, 2, &mut rng);
        let id = permute_channels(&g, &[0, 1], &[0, 1]).unwrap();
        assert!(max_diff(&id, &g) == 0.0);
        let swapped = permute_channels(&g, &[1, 0], &[1, 0]).unwrap();
        let back = permute_channels(&swapped, &[1, 0], &[1, 0]).unwrap();
        assert!(max_diff(&back, &g) == 0.0);
    }

    #[test]
    fn permute_swaps_concatenation_blocks() {
        let g1 = scalar_triple(c(1.0, 0.0), c(2.0, 0.0), 0.0);
        let g2 = scalar_triple(c(0.0, 1.0), c(-1.0, 0.0), 0.0);
        let cat = concatenate(&g1, &g2).unwrap();
        let swapped = permute_channels(&cat, &[1, 0], &[1, 0]).unwrap();
        assert!((swapped.s(0, 0).get(0, 0) - c(0.0, 1.0)).norm_sqr() < 1e-30);
        assert!((swapped.l(0).get(0, 0) - c(-1.0, 0.0)).norm_sqr() < 1e-30);
    }

    #[test]
    fn permute_rejects_malformed() {
        let g = SLHTriple::identity(2, 1);
        assert!(matches!(
            permute_channels(&g, &[0, 0], &[0, 1]),
            Err(Error::InvalidPermutation { .. })
        ));
        assert!(matches!(
            permute_channels(&g, &[0], &[0, 1]),
            Err(Error::InvalidPermutation { .. })
        ));
    }

    #[test]
    fn network_spec_validation() {
        let g = SLHTriple::identity(1, 1);
        // unknown component
        let err = NetworkSpec::with_default_external(
            vec![(String::from("a"), g.clone())],
            vec![Edge {
                from: Port::new("ghost", 0),
                to: Port::new("a", 0),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Network { .. }));

        // port out of range
        let err = NetworkSpec::with_default_external(
            vec![
                (String::from("a"), g.clone()),
                (String::from("b"), g.clone()),
            ],
            vec![Edge {
                from: Port::new("a", 3),
                to: Port::new("b", 0),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Network { .. }));

        // double wiring of one input
        let err = NetworkSpec::with_default_external(
            vec![
                (String::from("a"), SLHTriple::identity(2, 1)),
                (String::from("b"), g.clone()),
            ],
            vec![
                Edge {
                    from: Port::new("a", 0),
                    to: Port::new("b", 0),
                },
                Edge {
                    from: Port::new("a", 1),
                    to: Port::new("b", 0),
                },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Network { .. }));

        // wrong external declaration
        let err = NetworkSpec::new(
            vec![(String::from("a"), g)],
            vec![],
            vec![],
            vec![Port::new("a", 0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Network { .. }));
    }

    #[test]
    fn reduce_self_loop_with_identity_scattering_errors() {
        let spec = NetworkSpec::with_default_external(
            vec![(String::from("a"), SLHTriple::identity(2, 1))],
            vec![Edge {
                from: Port::new("a", 0),
                to: Port::new("a", 0),
            }],
        )
        .unwrap();
        let err = reduce_network(&spec).unwrap_err();
        match err {
            Error::AlgebraicLoop { edge, .. } => {
                assert_eq!(edge.as_deref(), Some("a[0] -> a[0]"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn cavity_self_feedback_pulls_frequency() {
        // one-sided cavity, second port fed back through a phase phi:
        // H gains (kappa2/2)·cot(phi/2)·a†a from the loop's own term
        let dim = 3;
        let (k1, k2, phi) = (1.0, 0.6, 1.2_f64);
        let a = annihilator(dim);
        let number = &a.dagger() * &a;
        let phase = c(libm::cos(phi), libm::sin(phi));
        let g = SLHTriple::new(
            vec![
                vec![Operator::identity(dim), Operator::zeros(dim)],
                vec![Operator::zeros(dim), Operator::identity(dim).scale(phase)],
            ],
            vec![
                a.scale(c(libm::sqrt(k1), 0.0)),
                a.scale(c(libm::sqrt(k2), 0.0)),
            ],
            Operator::zeros(dim),
        )
        .unwrap();
        let red = feedback_reduce(&g, 1, 1).unwrap();
        let pull = 0.5 * k2 * libm::cos(phi / 2.0) / libm::sin(phi / 2.0);
        let want = number.scale(c(pull, 0.0));
        assert!(red.h().approx_eq(&want, 1e-12), "frequency pull mismatch");
    }
}
