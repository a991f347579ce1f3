//! Execution-evidence side: outcome score, coverage weight and the composite.

use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::failure_mode::FailureMode;
use crate::scalar::{clamp, Scalar};

/// Upper bound on the coverage weight.
pub const ALPHA_MAX: f64 = 0.70;
/// Lower bound on the coverage weight whenever any probe is available.
pub const ALPHA_MIN: f64 = 0.10;

/// One execution probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Probe {
    /// Install success `I`.
    Install,
    /// Execution success `X`.
    Execution,
    /// Output determinism `Δ`.
    Determinism,
    /// Notebook execution rate `N`.
    NotebookRate,
    /// Import success rate `E′`.
    ImportRate,
    /// Test pass rate `T`.
    Tests,
}

impl Probe {
    pub const ALL: [Probe; 6] = [
        Probe::Install,
        Probe::Execution,
        Probe::Determinism,
        Probe::NotebookRate,
        Probe::ImportRate,
        Probe::Tests,
    ];

    /// Weight in whole percent. Kept integral so that coverage sums are exact.
    pub fn weight_percent(self) -> u32 {
        match self {
            Probe::Install => 30,
            Probe::Execution => 25,
            Probe::Determinism => 20,
            Probe::NotebookRate => 10,
            Probe::ImportRate => 10,
            Probe::Tests => 5,
        }
    }

    pub fn weight<T: Scalar>(self) -> T {
        T::lit(f64::from(self.weight_percent())) / T::hundred()
    }

    /// Key used in the evidence JSON document.
    pub fn key(self) -> &'static str {
        match self {
            Probe::Install => "I",
            Probe::Execution => "X",
            Probe::Determinism => "delta",
            Probe::NotebookRate => "N",
            Probe::ImportRate => "E_prime",
            Probe::Tests => "T",
        }
    }
}

/// Per-probe values in `[0, 100]`; `None` means the probe was not run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExecutionEvidence<T> {
    values: [Option<T>; 6],
}

impl<T: Scalar> ExecutionEvidence<T> {
    pub fn empty() -> Self {
        ExecutionEvidence { values: [None; 6] }
    }

    /// Builds evidence from `(probe, value)` pairs, rejecting values outside `[0, 100]`.
    pub fn from_components(components: impl IntoIterator<Item = (Probe, T)>) -> Result<Self, ScoringError> {
        let mut ev = Self::empty();
        for (p, v) in components {
            ev.set(p, Some(v))?;
        }
        Ok(ev)
    }

    pub fn set(&mut self, probe: Probe, value: Option<T>) -> Result<(), ScoringError> {
        if let Some(v) = value {
            if !(v >= T::zero() && v <= T::hundred()) {
                return Err(ScoringError::EvidenceOutOfRange { component: probe.key(), value: v.as_f64() });
            }
        }
        self.values[probe as usize] = value;
        Ok(())
    }

    pub fn get(&self, probe: Probe) -> Option<T> {
        self.values[probe as usize]
    }

    pub fn available(&self) -> impl Iterator<Item = (Probe, T)> + '_ {
        Probe::ALL.into_iter().filter_map(|p| self.get(p).map(|v| (p, v)))
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    /// Sum of the weights of the available probes, in whole percent.
    pub fn coverage_percent(&self) -> u32 {
        self.available().map(|(p, _)| p.weight_percent()).sum()
    }
}

/// Outcome score: weighted mean over the available probes, `None` without evidence.
pub fn compute_ros<T: Scalar>(evidence: &ExecutionEvidence<T>) -> Option<T> {
    let mass = evidence.coverage_percent();
    if mass == 0 {
        return None;
    }
    let num = evidence
        .available()
        .fold(T::zero(), |acc, (p, v)| acc + T::lit(f64::from(p.weight_percent())) * v);
    Some(clamp(num / T::lit(f64::from(mass)), T::zero(), T::hundred()))
}

/// Coverage weight `min(Σ v_j, 1) · 0.70`, floored at 0.10 once any probe is available.
pub fn compute_alpha<T: Scalar>(evidence: &ExecutionEvidence<T>) -> T {
    let mass = evidence.coverage_percent().min(100);
    if mass == 0 {
        return T::zero();
    }
    // mass% · 70% as an integer in units of 1e-4, divided once.
    let alpha = T::lit(f64::from(mass * 70)) / T::lit(10_000.0);
    let floor = T::lit(ALPHA_MIN);
    if alpha < floor {
        floor
    } else {
        alpha
    }
}

/// Composite `(1 − α)·RRS + α·ROS`, falling back to RRS when ROS is undefined.
pub fn compute_rcs<T: Scalar>(rrs: T, ros: Option<T>, alpha: T) -> T {
    match ros {
        None => rrs,
        Some(ros) => (T::one() - alpha) * rrs + alpha * ros,
    }
}

/// Proxy evidence from an execution failure-mode label and notebook counts.
///
/// `I` and `E′` are 100 unless the mode is the corresponding failure, `X` is
/// 100 only for success and `N` is the success fraction. `N` is omitted when
/// no notebook was executed; `Δ` and `T` are never derivable this way.
pub fn derive_proxy_evidence<T: Scalar>(
    mode: FailureMode,
    success_nb_count: u64,
    total_exec_count: u64,
) -> Result<ExecutionEvidence<T>, ScoringError> {
    if success_nb_count > total_exec_count {
        return Err(ScoringError::CountMismatch { success: success_nb_count, total: total_exec_count });
    }
    let flag = |b: bool| if b { T::hundred() } else { T::zero() };
    let mut ev = ExecutionEvidence::empty();
    ev.set(Probe::Install, Some(flag(mode != FailureMode::InstallDep)))?;
    ev.set(Probe::Execution, Some(flag(mode == FailureMode::Success)))?;
    ev.set(Probe::ImportRate, Some(flag(mode != FailureMode::MissingModule)))?;
    if total_exec_count > 0 {
        let n = T::hundred() * T::lit(success_nb_count as f64) / T::lit(total_exec_count as f64);
        ev.set(Probe::NotebookRate, Some(n))?;
    }
    Ok(ev)
}

/// Evidence JSON document: `{"components": {"I": .., "X": .., "delta": .., "N": .., "E_prime": .., "T": ..}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceDocument {
    #[serde(default)]
    pub components: EvidenceComponents,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceComponents {
    #[serde(rename = "I", default, skip_serializing_if = "Option::is_none")]
    pub install: Option<f64>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<f64>,
    #[serde(rename = "delta", default, skip_serializing_if = "Option::is_none")]
    pub determinism: Option<f64>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub notebook_rate: Option<f64>,
    #[serde(rename = "E_prime", default, skip_serializing_if = "Option::is_none")]
    pub import_rate: Option<f64>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub tests: Option<f64>,
}

impl EvidenceDocument {
    pub fn to_evidence(&self) -> Result<ExecutionEvidence<f64>, ScoringError> {
        let c = &self.components;
        let mut ev = ExecutionEvidence::empty();
        ev.set(Probe::Install, c.install)?;
        ev.set(Probe::Execution, c.execution)?;
        ev.set(Probe::Determinism, c.determinism)?;
        ev.set(Probe::NotebookRate, c.notebook_rate)?;
        ev.set(Probe::ImportRate, c.import_rate)?;
        ev.set(Probe::Tests, c.tests)?;
        Ok(ev)
    }

    pub fn from_evidence(ev: &ExecutionEvidence<f64>) -> Self {
        EvidenceDocument {
            components: EvidenceComponents {
                install: ev.get(Probe::Install),
                execution: ev.get(Probe::Execution),
                determinism: ev.get(Probe::Determinism),
                notebook_rate: ev.get(Probe::NotebookRate),
                import_rate: ev.get(Probe::ImportRate),
                tests: ev.get(Probe::Tests),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(pairs: &[(Probe, f64)]) -> ExecutionEvidence<f64> {
        ExecutionEvidence::from_components(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn ros_examples() {
        use Probe::*;
        let mm = ev(&[(Install, 100.0), (Execution, 0.0), (NotebookRate, 3.8), (ImportRate, 0.0)]);
        assert!((compute_ros(&mm).unwrap() - 30.38 / 0.75).abs() < 1e-12);
        assert!((compute_ros(&mm).unwrap() - 40.5).abs() < 0.05);
        let md = ev(&[(Install, 100.0), (Execution, 0.0), (NotebookRate, 8.6), (ImportRate, 100.0)]);
        assert!((compute_ros(&md).unwrap() - 54.5).abs() < 0.05);
        assert_eq!(compute_ros(&ExecutionEvidence::<f64>::empty()), None);
    }

    #[test]
    fn alpha_examples() {
        use Probe::*;
        let four = ev(&[(Install, 1.0), (Execution, 1.0), (NotebookRate, 1.0), (ImportRate, 1.0)]);
        assert_eq!(compute_alpha(&four), 0.525);
        let all = ev(&Probe::ALL.map(|p| (p, 50.0)));
        assert_eq!(compute_alpha(&all), 0.70);
        assert_eq!(compute_alpha(&ev(&[(Tests, 80.0)])), 0.10);
        assert_eq!(compute_alpha(&ExecutionEvidence::<f64>::empty()), 0.0);
    }

    #[test]
    fn rcs_examples() {
        assert!((compute_rcs(14.6, Some(100.0), 0.525) - 59.4_f64).abs() < 0.05);
        assert!((compute_rcs(26.8, Some(13.5), 0.525) - 19.8_f64).abs() < 0.05);
        assert_eq!(compute_rcs(42.0_f64, None, 0.0), 42.0);
    }

    #[test]
    fn proxy_evidence_examples() {
        let s = derive_proxy_evidence::<f64>(FailureMode::Success, 10, 10).unwrap();
        assert_eq!(
            s.available().collect::<Vec<_>>(),
            vec![(Probe::Install, 100.0), (Probe::Execution, 100.0), (Probe::NotebookRate, 100.0), (Probe::ImportRate, 100.0)]
        );
        let i = derive_proxy_evidence::<f64>(FailureMode::InstallDep, 0, 8).unwrap();
        assert_eq!(i.get(Probe::Install), Some(0.0));
        assert_eq!(i.get(Probe::NotebookRate), Some(0.0));
        assert_eq!(i.get(Probe::ImportRate), Some(100.0));
        let m = derive_proxy_evidence::<f64>(FailureMode::MissingModule, 1, 26).unwrap();
        assert!((m.get(Probe::NotebookRate).unwrap() - 3.846153846).abs() < 1e-8);
        assert_eq!(m.get(Probe::ImportRate), Some(0.0));
        assert_eq!(m.get(Probe::Determinism), None);
        assert_eq!(m.get(Probe::Tests), None);
        let z = derive_proxy_evidence::<f64>(FailureMode::CodeError, 0, 0).unwrap();
        assert_eq!(z.get(Probe::NotebookRate), None);
        assert!(derive_proxy_evidence::<f64>(FailureMode::CodeError, 3, 2).is_err());
    }

    #[test]
    fn evidence_document_validation() {
        let doc: EvidenceDocument = serde_json::from_str(r#"{"components": {"I": 150}}"#).unwrap();
        assert!(matches!(doc.to_evidence(), Err(ScoringError::EvidenceOutOfRange { component: "I", .. })));
        assert!(serde_json::from_str::<EvidenceDocument>(r#"{"components": {"Q": 1}}"#).is_err());
        let doc: EvidenceDocument = serde_json::from_str(r#"{"components": {"delta": 90, "E_prime": 10}}"#).unwrap();
        let e = doc.to_evidence().unwrap();
        assert_eq!(e.get(Probe::Determinism), Some(90.0));
        assert_eq!(EvidenceDocument::from_evidence(&e), doc);
        let empty: EvidenceDocument = serde_json::from_str("{}").unwrap();
        assert!(empty.to_evidence().unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn ros_of_constant_components_is_that_constant(
            c in 0.0f64..=100.0,
            mask in prop::array::uniform6(any::<bool>()),
        ) {
            prop_assume!(mask.iter().any(|b| *b));
            let e = ev(&Probe::ALL.iter().zip(mask).filter(|(_, m)| *m).map(|(p, _)| (*p, c)).collect::<Vec<_>>());
            prop_assert!((compute_ros(&e).unwrap() - c).abs() < 1e-9);
        }

        #[test]
        fn rcs_lies_between_rrs_and_ros(rrs in 0.0f64..=100.0, ros in 0.0f64..=100.0, alpha in 0.0f64..=0.7) {
            let r = compute_rcs(rrs, Some(ros), alpha);
            prop_assert!(r >= rrs.min(ros) - 1e-9 && r <= rrs.max(ros) + 1e-9);
        }
    }
}
