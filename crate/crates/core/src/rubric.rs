//! Versioned weighting and gate policies.
//!
//! A rubric document is YAML with a `name`, an opaque `version` string, a
//! `categories` map from category symbol to `{weight, tau, k}` and an optional
//! `submetrics` map from sub-metric id to within-category weight. Anything not
//! mentioned is inherited from [`RubricProfile::default_profile`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::category::{Category, PerCategory};
use crate::submetrics::{spec_of, SubMetricId, SubMetricRegistry};

/// Allowed deviation of a weight sum from 1.0.
pub const WEIGHT_SUM_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryPolicy {
    pub weight: f64,
    pub tau: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RubricProfile {
    pub name: String,
    pub version: String,
    pub categories: PerCategory<CategoryPolicy>,
    /// Within-category weight overrides; sub-metrics not listed keep their
    /// registry default.
    pub submetric_weights: BTreeMap<SubMetricId, f64>,
}

/// One failed validation check, addressed by document path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RubricViolation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for RubricViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RubricError {
    #[error("malformed rubric document: {0}")]
    Malformed(String),
    #[error("invalid rubric: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<RubricViolation>),
    #[error("cannot serialize rubric: {0}")]
    Serialize(String),
}

impl RubricError {
    pub fn violations(&self) -> &[RubricViolation] {
        match self {
            RubricError::Invalid(v) => v,
            _ => &[],
        }
    }
}

const DEFAULT_POLICIES: [CategoryPolicy; 5] = [
    CategoryPolicy { weight: 0.30, tau: 40.0, k: 1.5 },
    CategoryPolicy { weight: 0.25, tau: 30.0, k: 1.5 },
    CategoryPolicy { weight: 0.20, tau: 20.0, k: 1.2 },
    CategoryPolicy { weight: 0.15, tau: 25.0, k: 1.2 },
    CategoryPolicy { weight: 0.10, tau: 30.0, k: 1.2 },
];

impl Default for RubricProfile {
    fn default() -> Self {
        Self::default_profile()
    }
}

impl RubricProfile {
    /// The built-in profile: category weights, thresholds and exponents plus
    /// the registry's within-category weights.
    pub fn default_profile() -> Self {
        RubricProfile {
            name: "default".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            categories: PerCategory(DEFAULT_POLICIES),
            submetric_weights: BTreeMap::new(),
        }
    }

    pub fn policy(&self, category: Category) -> &CategoryPolicy {
        &self.categories[category]
    }

    pub fn weight(&self, category: Category) -> f64 {
        self.categories[category].weight
    }

    /// Effective within-category weight of a sub-metric.
    pub fn submetric_weight(&self, id: SubMetricId) -> f64 {
        self.submetric_weights
            .get(&id)
            .copied()
            .unwrap_or_else(|| spec_of(id).default_weight)
    }

    /// Returns a copy with the category weights replaced.
    pub fn with_weights(&self, weights: PerCategory<f64>) -> Self {
        let mut out = self.clone();
        for c in Category::ALL {
            out.categories[c].weight = weights[c];
        }
        out
    }

    /// Parses and validates a YAML rubric document.
    pub fn from_yaml(text: &str) -> Result<Self, RubricError> {
        let doc: RubricDocument =
            serde_yaml::from_str(text).map_err(|e| RubricError::Malformed(e.to_string()))?;
        let profile = doc.into_profile()?;
        let violations = profile.validate();
        if violations.is_empty() {
            Ok(profile)
        } else {
            Err(RubricError::Invalid(violations))
        }
    }

    /// Serializes the fully populated profile back to YAML.
    pub fn to_yaml(&self) -> Result<String, RubricError> {
        serde_yaml::to_string(&RubricDocument::from_profile(self))
            .map_err(|e| RubricError::Serialize(e.to_string()))
    }

    /// Checks every invariant and reports all violations.
    pub fn validate(&self) -> Vec<RubricViolation> {
        let mut out = Vec::new();
        let mut push = |field: String, message: String| out.push(RubricViolation { field, message });

        if self.name.trim().is_empty() {
            push("name".into(), "name must be non-empty".into());
        }
        if self.version.trim().is_empty() {
            push("version".into(), "version must be non-empty".into());
        }

        let mut sum = 0.0;
        for (c, p) in self.categories.iter() {
            let base = format!("categories.{c}");
            if !p.weight.is_finite() || p.weight < 0.0 {
                push(format!("{base}.weight"), format!("category weight must be a non-negative number (got {})", p.weight));
            }
            if !p.tau.is_finite() || p.tau <= 0.0 || p.tau > 100.0 {
                push(format!("{base}.tau"), format!("gate threshold must lie in (0, 100] (got {})", p.tau));
            }
            if !p.k.is_finite() || p.k < 1.0 {
                push(format!("{base}.k"), format!("gate exponent below 1 (got {})", p.k));
            }
            sum += p.weight;
        }
        if !sum.is_finite() || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            push(
                "categories".into(),
                format!("category weight sum out of tolerance: {sum:.4} (expected 1.0 ± {WEIGHT_SUM_TOLERANCE})"),
            );
        }

        let registry = SubMetricRegistry::default();
        for (id, w) in &self.submetric_weights {
            if !w.is_finite() || *w < 0.0 {
                push(format!("submetrics.{id}"), format!("sub-metric weight must be a non-negative number (got {w})"));
            }
        }
        for c in Category::ALL {
            let overridden = registry
                .in_category(c)
                .any(|s| self.submetric_weights.contains_key(&s.id));
            if !overridden {
                continue;
            }
            let sum: f64 = registry.in_category(c).map(|s| self.submetric_weight(s.id)).sum();
            if !sum.is_finite() || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                push(
                    format!("submetrics[{c}]"),
                    format!("sub-metric weight sum for category {c} out of tolerance: {sum:.4} (expected 1.0 ± {WEIGHT_SUM_TOLERANCE})"),
                );
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialPolicy {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RubricDocument {
    name: String,
    version: String,
    #[serde(default)]
    categories: BTreeMap<String, PartialPolicy>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    submetrics: BTreeMap<String, f64>,
}

impl RubricDocument {
    fn into_profile(self) -> Result<RubricProfile, RubricError> {
        let mut profile = RubricProfile {
            name: self.name,
            version: self.version,
            ..RubricProfile::default_profile()
        };
        let mut unknown = Vec::new();
        for (key, partial) in self.categories {
            let Ok(c) = key.parse::<Category>() else {
                unknown.push(RubricViolation {
                    field: format!("categories.{key}"),
                    message: "unknown category (expected one of E, A, D, C, S)".into(),
                });
                continue;
            };
            let p = &mut profile.categories[c];
            if let Some(w) = partial.weight {
                p.weight = w;
            }
            if let Some(t) = partial.tau {
                p.tau = t;
            }
            if let Some(k) = partial.k {
                p.k = k;
            }
        }
        for (key, w) in self.submetrics {
            match key.parse::<SubMetricId>() {
                Ok(id) => {
                    profile.submetric_weights.insert(id, w);
                }
                Err(_) => unknown.push(RubricViolation {
                    field: format!("submetrics.{key}"),
                    message: "unknown sub-metric id".into(),
                }),
            }
        }
        if unknown.is_empty() {
            Ok(profile)
        } else {
            Err(RubricError::Invalid(unknown))
        }
    }

    fn from_profile(p: &RubricProfile) -> Self {
        RubricDocument {
            name: p.name.clone(),
            version: p.version.clone(),
            categories: p
                .categories
                .iter()
                .map(|(c, pol)| {
                    (
                        c.symbol().to_string(),
                        PartialPolicy { weight: Some(pol.weight), tau: Some(pol.tau), k: Some(pol.k) },
                    )
                })
                .collect(),
            submetrics: p
                .submetric_weights
                .iter()
                .map(|(id, w)| (id.as_str().to_string(), *w))
                .collect(),
        }
    }
}

/// Serialized form used inside provenance records: the complete policy, so a
/// record can be rescored without access to the original YAML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RubricSnapshot {
    pub name: String,
    pub version: String,
    pub categories: BTreeMap<Category, CategoryPolicy>,
    pub submetric_weights: BTreeMap<SubMetricId, f64>,
}

impl From<&RubricProfile> for RubricSnapshot {
    fn from(p: &RubricProfile) -> Self {
        RubricSnapshot {
            name: p.name.clone(),
            version: p.version.clone(),
            categories: p.categories.iter().map(|(c, pol)| (c, *pol)).collect(),
            submetric_weights: SubMetricId::ALL.iter().map(|&id| (id, p.submetric_weight(id))).collect(),
        }
    }
}

impl TryFrom<&RubricSnapshot> for RubricProfile {
    type Error = RubricError;

    fn try_from(s: &RubricSnapshot) -> Result<Self, Self::Error> {
        let mut missing = Vec::new();
        let categories = PerCategory::from_fn(|c| match s.categories.get(&c) {
            Some(p) => *p,
            None => {
                missing.push(RubricViolation { field: format!("categories.{c}"), message: "missing category".into() });
                DEFAULT_POLICIES[c.index()]
            }
        });
        if !missing.is_empty() {
            return Err(RubricError::Invalid(missing));
        }
        let submetric_weights = s
            .submetric_weights
            .iter()
            .filter(|(id, w)| spec_of(**id).default_weight != **w)
            .map(|(id, w)| (*id, *w))
            .collect();
        let profile = RubricProfile {
            name: s.name.clone(),
            version: s.version.clone(),
            categories,
            submetric_weights,
        };
        let violations = profile.validate();
        if violations.is_empty() {
            Ok(profile)
        } else {
            Err(RubricError::Invalid(violations))
        }
    }
}

/// Rubric documents shipped with the crate, by name.
pub const BUILTIN_RUBRICS: [(&str, &str); 2] = [
    ("default", include_str!("../rubrics/default.yaml")),
    ("bioinformatics-v1", include_str!("../rubrics/bioinformatics-v1.yaml")),
];

/// A bundled rubric by name.
pub fn builtin(name: &str) -> Option<RubricProfile> {
    BUILTIN_RUBRICS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| RubricProfile::from_yaml(text).expect("bundled rubric is valid"))
}
