//! Qubit channels: Kraus and Choi representations, CPTP validation, and the
//! anti-degradability decision.
//!
//! A qubit channel is anti-degradable exactly when its Choi state admits a
//! symmetric extension, so the extendibility machinery applies verbatim once
//! the channel is mapped to its Choi state (unit-trace convention, A the
//! input reference, B the output; the doubled subsystem is the output).

use serde::Deserialize;
use thiserror::Error;

use crate::criterion::{classify_with_tol, CriterionError, Verdict};
use crate::linalg::{cr, pauli_x, pauli_y, pauli_z, CMat, HermMat};
use crate::states::{partial_trace, DensityOp4, Marginal, StateError};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("Kraus set is not trace preserving: completeness residual {residual:.3e}")]
    NotTracePreserving { residual: f64 },
    #[error("Kraus set must contain 1..=4 operators, found {found}")]
    BadOperatorCount { found: usize },
    #[error("channel parameter out of range: {0}")]
    Range(String),
    #[error("unknown channel family: {0}")]
    UnknownFamily(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Criterion(#[from] CriterionError),
}

/// Kraus representation of a qubit channel: 1 to 4 operators with
/// Σ Kᵢ†Kᵢ = 𝕀 within 1e-9.
#[derive(Debug, Clone)]
pub struct KrausSet {
    operators: Vec<CMat<2>>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMat<2>>) -> Result<Self, ChannelError> {
        if operators.is_empty() || operators.len() > 4 {
            return Err(ChannelError::BadOperatorCount {
                found: operators.len(),
            });
        }
        let mut sum = CMat::<2>::zero();
        for k in &operators {
            sum = sum + k.adjoint() * *k;
        }
        let residual = sum.frobenius_dist(&CMat::identity());
        if residual > 1e-9 {
            return Err(ChannelError::NotTracePreserving { residual });
        }
        Ok(KrausSet { operators })
    }

    pub fn operators(&self) -> &[CMat<2>] {
        &self.operators
    }

    /// ρ ↦ Σ K ρ K†.
    pub fn apply(&self, rho: &CMat<2>) -> CMat<2> {
        let mut out = CMat::<2>::zero();
        for k in &self.operators {
            out = out + *k * *rho * k.adjoint();
        }
        out
    }
}

/// Choi state of a qubit channel: (id ⊗ N)(|φ⁺⟩⟨φ⁺|), unit trace, with the
/// trace-preservation invariant tr_B = 𝕀/2.
#[derive(Debug, Clone)]
pub struct ChoiState {
    m: DensityOp4,
}

impl ChoiState {
    pub fn new(m: DensityOp4) -> Result<Self, ChannelError> {
        // trace preservation of the channel pins the reference marginal to 𝕀/2
        let a_marginal = partial_trace(&m, Marginal::A);
        let residual = a_marginal
            .matrix()
            .frobenius_dist(&CMat::<2>::identity().scale(cr(0.5)));
        if residual > 1e-9 {
            return Err(ChannelError::NotTracePreserving { residual });
        }
        Ok(ChoiState { m })
    }

    pub fn state(&self) -> &DensityOp4 {
        &self.m
    }
}

/// Choi state of a Kraus set: entries ½·Σ_k K[a,i]·K̄[b,j] at ((i,a),(j,b))
/// in the A⊗B product basis.
pub fn kraus_to_choi(k: &KrausSet) -> Result<ChoiState, ChannelError> {
    let mut m = CMat::<4>::zero();
    for op in k.operators() {
        for i in 0..2 {
            for a in 0..2 {
                for j in 0..2 {
                    for b in 0..2 {
                        m[(2 * i + a, 2 * j + b)] += op[(a, i)] * op[(b, j)].conj() * cr(0.5);
                    }
                }
            }
        }
    }
    let rho = DensityOp4::new(HermMat::symmetrize(m))?;
    ChoiState::new(rho)
}

/// Anti-degradability via symmetric extendibility of the Choi state, with the
/// extension taken on the output (B) side.
pub fn is_antidegradable(k: &KrausSet, tol_f: f64) -> Result<Verdict, ChannelError> {
    let choi = kraus_to_choi(k)?;
    Ok(classify_with_tol(choi.state(), tol_f)?)
}

/// Named channel family with parameters, as parsed from channel-spec JSON.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum ChannelFamily {
    AmplitudeDamping(f64),
    Depolarizing(f64),
    PhaseDamping(f64),
    Pauli(f64, f64, f64),
}

impl ChannelFamily {
    /// The family's sweep parameter name, for reports.
    pub fn parameter_name(&self) -> &'static str {
        match self {
            ChannelFamily::AmplitudeDamping(_) => "gamma",
            ChannelFamily::Depolarizing(_) => "p",
            ChannelFamily::PhaseDamping(_) => "lambda",
            ChannelFamily::Pauli(..) => "px,py,pz",
        }
    }

    /// Same family at a different sweep parameter (Pauli sweeps scale the
    /// probability vector).
    pub fn with_parameter(&self, t: f64) -> ChannelFamily {
        match self {
            ChannelFamily::AmplitudeDamping(_) => ChannelFamily::AmplitudeDamping(t),
            ChannelFamily::Depolarizing(_) => ChannelFamily::Depolarizing(t),
            ChannelFamily::PhaseDamping(_) => ChannelFamily::PhaseDamping(t),
            ChannelFamily::Pauli(px, py, pz) => {
                let total = px + py + pz;
                if total <= 0.0 {
                    ChannelFamily::Pauli(t / 3.0, t / 3.0, t / 3.0)
                } else {
                    ChannelFamily::Pauli(t * px / total, t * py / total, t * pz / total)
                }
            }
        }
    }
}

/// Textbook Kraus sets for the named families; completeness is verified on
/// construction.
pub fn channel_families(family: &ChannelFamily) -> Result<KrausSet, ChannelError> {
    let in_unit = |v: f64, name: &str| -> Result<(), ChannelError> {
        if !(0.0..=1.0).contains(&v) {
            return Err(ChannelError::Range(format!("{name} = {v} outside [0, 1]")));
        }
        Ok(())
    };
    match family {
        ChannelFamily::AmplitudeDamping(g) => {
            in_unit(*g, "gamma")?;
            let k0 = CMat::from_rows([[cr(1.0), cr(0.0)], [cr(0.0), cr((1.0 - g).sqrt())]]);
            let k1 = CMat::from_rows([[cr(0.0), cr(g.sqrt())], [cr(0.0), cr(0.0)]]);
            KrausSet::new(vec![k0, k1])
        }
        ChannelFamily::PhaseDamping(l) => {
            in_unit(*l, "lambda")?;
            let k0 = CMat::diag([1.0, (1.0 - l).sqrt()]);
            let k1 = CMat::diag([0.0, l.sqrt()]);
            KrausSet::new(vec![k0, k1])
        }
        ChannelFamily::Depolarizing(p) => {
            in_unit(*p, "p")?;
            channel_families(&ChannelFamily::Pauli(p / 4.0, p / 4.0, p / 4.0))
        }
        ChannelFamily::Pauli(px, py, pz) => {
            for (v, name) in [(px, "px"), (py, "py"), (pz, "pz")] {
                if *v < 0.0 {
                    return Err(ChannelError::Range(format!("{name} = {v} negative")));
                }
            }
            let total = px + py + pz;
            if total > 1.0 + 1e-12 {
                return Err(ChannelError::Range(format!(
                    "Pauli probabilities sum to {total} > 1"
                )));
            }
            let p0 = (1.0 - total).max(0.0);
            let mut ops = vec![CMat::<2>::identity().scale(cr(p0.sqrt()))];
            for (w, sigma) in [(px, pauli_x()), (py, pauli_y()), (pz, pauli_z())] {
                ops.push(sigma.scale(cr(w.sqrt())));
            }
            KrausSet::new(ops)
        }
    }
}

/// The amplitude-damping Choi matrix from the closed-form entries
/// {1/2, √(1−γ)/2, γ/2, (1−γ)/2}; an independent fixture for cross-checks.
pub fn amplitude_damping_choi_fixture(gamma: f64) -> Result<DensityOp4, ChannelError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ChannelError::Range(format!("gamma = {gamma} outside [0, 1]")));
    }
    let mut m = CMat::<4>::diag([0.5, 0.0, gamma / 2.0, (1.0 - gamma) / 2.0]);
    m[(0, 3)] = cr((1.0 - gamma).sqrt() / 2.0);
    m[(3, 0)] = cr((1.0 - gamma).sqrt() / 2.0);
    Ok(DensityOp4::new(HermMat::symmetrize(m))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criterion::{f_value, StateClass, TOL_F};
    use crate::linalg::{outer, su2};
    use crate::states::bell_phi_plus;

    #[test]
    fn identity_channel_choi_is_maximally_entangled() {
        let id = KrausSet::new(vec![CMat::identity()]).unwrap();
        let choi = kraus_to_choi(&id).unwrap();
        let phi = outer(&bell_phi_plus(), &bell_phi_plus());
        assert!(choi.state().matrix().frobenius_dist(&phi) < 1e-14);
        let v = is_antidegradable(&id, TOL_F).unwrap();
        assert_eq!(v.class, StateClass::NonExtendible);
        assert!((v.f_value + 0.5).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_extremes() {
        let full = channel_families(&ChannelFamily::Depolarizing(1.0)).unwrap();
        let choi = kraus_to_choi(&full).unwrap();
        assert!(choi
            .state()
            .matrix()
            .frobenius_dist(&CMat::identity().scale(cr(0.25)))
            < 1e-14);
        let v = is_antidegradable(&full, TOL_F).unwrap();
        assert_eq!(v.class, StateClass::InteriorExtendible);
        let none = channel_families(&ChannelFamily::Pauli(0.0, 0.0, 0.0)).unwrap();
        let choi = kraus_to_choi(&none).unwrap();
        let phi = outer(&bell_phi_plus(), &bell_phi_plus());
        assert!(choi.state().matrix().frobenius_dist(&phi) < 1e-14);
    }

    #[test]
    fn amplitude_damping_matches_fixture() {
        for gamma in [0.0, 0.2, 0.5, 0.8, 1.0] {
            let k = channel_families(&ChannelFamily::AmplitudeDamping(gamma)).unwrap();
            let choi = kraus_to_choi(&k).unwrap();
            let fixture = amplitude_damping_choi_fixture(gamma).unwrap();
            assert!(
                choi.state().matrix().frobenius_dist(fixture.matrix()) < 1e-13,
                "gamma {gamma}"
            );
        }
        let k = channel_families(&ChannelFamily::AmplitudeDamping(0.0)).unwrap();
        let choi = kraus_to_choi(&k).unwrap();
        let phi = outer(&bell_phi_plus(), &bell_phi_plus());
        assert!(choi.state().matrix().frobenius_dist(&phi) < 1e-14);
    }

    #[test]
    fn amplitude_damping_f_is_gamma_minus_half() {
        for gamma in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let fixture = amplitude_damping_choi_fixture(gamma).unwrap();
            let f = f_value(&fixture).unwrap();
            assert!((f - (gamma - 0.5)).abs() < 1e-12, "gamma {gamma}: f {f}");
        }
    }

    #[test]
    fn kraus_unitary_mixing_freedom() {
        // mixing the Kraus operators by a unitary leaves the Choi state alone
        let k = channel_families(&ChannelFamily::AmplitudeDamping(0.3)).unwrap();
        let u = su2(0.7, 1.1, 2.3);
        let k0 = k.operators()[0];
        let k1 = k.operators()[1];
        let m0 = k0.scale(u[(0, 0)]) + k1.scale(u[(0, 1)]);
        let m1 = k0.scale(u[(1, 0)]) + k1.scale(u[(1, 1)]);
        let mixed = KrausSet::new(vec![m0, m1]).unwrap();
        let c1 = kraus_to_choi(&k).unwrap();
        let c2 = kraus_to_choi(&mixed).unwrap();
        assert!(c1.state().matrix().frobenius_dist(c2.state().matrix()) < 1e-12);
    }

    #[test]
    fn f_invariant_under_output_unitary() {
        let k = channel_families(&ChannelFamily::AmplitudeDamping(0.4)).unwrap();
        let v = su2(0.9, 0.2, 1.7);
        let post: Vec<CMat<2>> = k.operators().iter().map(|op| v * *op).collect();
        let rotated = KrausSet::new(post).unwrap();
        let f1 = f_value(kraus_to_choi(&k).unwrap().state()).unwrap();
        let f2 = f_value(kraus_to_choi(&rotated).unwrap().state()).unwrap();
        assert!((f1 - f2).abs() < 1e-10);
    }

    #[test]
    fn amplitude_damping_monotone_and_interval() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=50 {
            let gamma = k as f64 / 50.0;
            let f = f_value(&amplitude_damping_choi_fixture(gamma).unwrap()).unwrap();
            assert!(f >= prev - 1e-12, "monotone failure at {gamma}");
            prev = f;
        }
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let half = CMat::<2>::identity().scale(cr(0.5));
        assert!(matches!(
            KrausSet::new(vec![half]),
            Err(ChannelError::NotTracePreserving { .. })
        ));
        assert!(matches!(
            KrausSet::new(vec![]),
            Err(ChannelError::BadOperatorCount { .. })
        ));
    }

    #[test]
    fn family_spec_parses() {
        let f: ChannelFamily =
            serde_json::from_str(r#"{"family":"amplitude_damping","params":0.5}"#).unwrap();
        assert_eq!(f, ChannelFamily::AmplitudeDamping(0.5));
        let f: ChannelFamily =
            serde_json::from_str(r#"{"family":"pauli","params":[0.1,0.2,0.3]}"#).unwrap();
        assert_eq!(f, ChannelFamily::Pauli(0.1, 0.2, 0.3));
    }
}
