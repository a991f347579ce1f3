//! The diagnostics report: selected analyses over a labeled corpus, as JSON
//! or a fixed-width table.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::bootstrap::{bootstrap_auc_ci, BootstrapCi, DEFAULT_RESAMPLES};
use super::corpus::Corpus;
use super::correlation::{cohens_d, point_biserial, PointBiserial};
use super::multiple::benjamini_hochberg;
use super::rank::{auc_roc, kruskal_wallis, ks_statistic, mann_whitney, KruskalWallis};
use super::robustness::{grid_search_weights, loco_analysis, weight_perturbation, GridResult, LocoRow, PerturbationResult};
use super::{mean, StatsError};
use crate::category::Category;
use crate::failure_mode::FailureMode;
use crate::provenance::RubricRef;
use crate::rubric::RubricProfile;
use crate::submetrics::SubMetricId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    /// Kruskal-Wallis across failure modes, per category.
    Kw,
    /// Point-biserial correlation with the binary label, per category.
    Pb,
    /// Cohen's d, KS D and Mann-Whitney p for each failure-mode pair.
    Pairwise,
    /// Sub-metric point-biserial correlations with BH q-values.
    Submetrics,
    /// AUC of the RRS with a bootstrap CI.
    Auc,
    Perturbation,
    Loco,
    Grid,
    /// Per-mode mean RRS and proxy ROS/RCS.
    Modes,
}

impl Analysis {
    pub const ALL: [Analysis; 9] = [
        Analysis::Kw,
        Analysis::Pb,
        Analysis::Pairwise,
        Analysis::Submetrics,
        Analysis::Auc,
        Analysis::Perturbation,
        Analysis::Loco,
        Analysis::Grid,
        Analysis::Modes,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Kw => "kw",
            Analysis::Pb => "pb",
            Analysis::Pairwise => "pairwise",
            Analysis::Submetrics => "submetrics",
            Analysis::Auc => "auc",
            Analysis::Perturbation => "perturbation",
            Analysis::Loco => "loco",
            Analysis::Grid => "grid",
            Analysis::Modes => "modes",
        }
    }

    /// Parses a comma-separated list; `all` selects everything.
    pub fn parse_list(s: &str) -> Result<BTreeSet<Analysis>, String> {
        let mut out = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part == "all" {
                out.extend(Analysis::ALL);
            } else {
                out.insert(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err("no analyses selected".into());
        }
        Ok(out)
    }
}

impl FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Analysis::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Analysis::ALL.iter().map(|a| a.as_str()).collect();
            format!("unknown analysis `{s}` (expected one of: all, {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsOptions {
    pub analyses: BTreeSet<Analysis>,
    pub seed: u64,
    pub resamples: usize,
    pub level: f64,
    pub span: f64,
    pub steps: usize,
    pub grid_step: f64,
    pub grid_floor: f64,
    pub fdr: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            analyses: Analysis::ALL.into_iter().collect(),
            seed: 0,
            resamples: DEFAULT_RESAMPLES,
            level: 0.95,
            span: 0.5,
            steps: 20,
            grid_step: 0.1,
            grid_floor: 0.1,
            fdr: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeMean {
    pub failure_mode: FailureMode,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats {
    pub category: Category,
    pub weight: f64,
    pub means: Vec<ModeMean>,
    pub kruskal_wallis: Option<KruskalWallis<f64>>,
    pub point_biserial: Option<PointBiserial<f64>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseStats {
    pub category: Category,
    pub a: FailureMode,
    pub b: FailureMode,
    /// `mean(a) − mean(b)` over the pooled standard deviation.
    pub cohens_d: Option<f64>,
    pub ks_d: f64,
    pub mann_whitney_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmetricStats {
    pub id: SubMetricId,
    /// Records where the sub-metric applied.
    pub n: usize,
    /// `None` when the scores are constant or one class is missing.
    pub r: Option<f64>,
    pub p: f64,
    pub q: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AucReport {
    pub auc: f64,
    pub ci: BootstrapCi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub failure_mode: FailureMode,
    pub n: usize,
    pub rrs: f64,
    pub ros: Option<f64>,
    pub rcs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub n_records: usize,
    pub n_success: usize,
    pub rubric: RubricRef,
    pub analyses: Vec<Analysis>,
    pub unmatched_records: Vec<String>,
    pub unmatched_labels: Vec<String>,
    pub categories: Option<Vec<CategoryStats>>,
    pub pairwise: Option<Vec<PairwiseStats>>,
    pub submetrics: Option<Vec<SubmetricStats>>,
    pub auc: Option<AucReport>,
    pub perturbation: Option<Vec<PerturbationResult>>,
    pub loco: Option<Vec<LocoRow>>,
    pub grid: Option<GridResult>,
    pub modes: Option<Vec<ModeSummary>>,
}

fn category_stats(corpus: &Corpus, rubric: &RubricProfile, opts: &DiagnosticsOptions) -> Result<Vec<CategoryStats>, StatsError> {
    let labels = corpus.labels();
    Category::ALL
        .iter()
        .map(|&c| {
            let groups = corpus.by_mode(|r| r.raw(c));
            let means = groups.iter().map(|(m, v)| ModeMean { failure_mode: *m, n: v.len(), mean: mean(v) }).collect();
            let mut note = None;
            let kw = if opts.analyses.contains(&Analysis::Kw) {
                if groups.len() < 2 {
                    note = Some("fewer than two failure modes present".to_string());
                    None
                } else {
                    let g: Vec<Vec<f64>> = groups.into_iter().map(|(_, v)| v).collect();
                    Some(kruskal_wallis(&g)?)
                }
            } else {
                None
            };
            let pb = if opts.analyses.contains(&Analysis::Pb) {
                match point_biserial(&corpus.raws(c), &labels) {
                    Ok(pb) => Some(pb),
                    Err(StatsError::DegenerateDispersion) => {
                        note = Some("constant category scores".to_string());
                        None
                    }
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            Ok(CategoryStats { category: c, weight: rubric.weight(c), means, kruskal_wallis: kw, point_biserial: pb, note })
        })
        .collect()
}

fn pairwise_stats(corpus: &Corpus) -> Result<Vec<PairwiseStats>, StatsError> {
    let mut out = Vec::new();
    for c in Category::ALL {
        let groups = corpus.by_mode(|r| r.raw(c));
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let (ma, a) = &groups[i];
                let (mb, b) = &groups[j];
                let d = match cohens_d(a, b) {
                    Ok(d) => Some(d),
                    Err(StatsError::DegenerateDispersion) => None,
                    Err(e) => return Err(e),
                };
                out.push(PairwiseStats {
                    category: c,
                    a: *ma,
                    b: *mb,
                    cohens_d: d,
                    ks_d: ks_statistic(a, b)?,
                    mann_whitney_p: mann_whitney(a, b)?.p,
                });
            }
        }
    }
    Ok(out)
}

fn submetric_stats(corpus: &Corpus, fdr: f64) -> Result<Vec<SubmetricStats>, StatsError> {
    let mut rows = Vec::new();
    for id in SubMetricId::ALL {
        let (scores, labels): (Vec<f64>, Vec<bool>) = corpus
            .records
            .iter()
            .filter_map(|r| r.record.score_of(id).map(|s| (s, r.is_success())))
            .unzip();
        let (r, p) = match point_biserial(&scores, &labels) {
            Ok(pb) => (Some(pb.r), pb.p),
            Err(StatsError::DegenerateDispersion | StatsError::SingleClass | StatsError::TooFewObservations { .. }) => (None, 1.0),
            Err(e) => return Err(e),
        };
        rows.push((id, scores.len(), r, p));
    }
    let ps: Vec<f64> = rows.iter().map(|r| r.3).collect();
    let qs = benjamini_hochberg(&ps)?;
    Ok(rows
        .into_iter()
        .zip(qs)
        .map(|((id, n, r, p), q)| SubmetricStats { id, n, r, p, q, significant: q <= fdr })
        .collect())
}

fn mode_summaries(corpus: &Corpus) -> Vec<ModeSummary> {
    FailureMode::ALL
        .iter()
        .filter_map(|&m| {
            let rs: Vec<_> = corpus.records.iter().filter(|r| r.failure_mode() == m).collect();
            if rs.is_empty() {
                return None;
            }
            let ros: Vec<f64> = rs.iter().filter_map(|r| r.proxy_ros).collect();
            Some(ModeSummary {
                failure_mode: m,
                n: rs.len(),
                rrs: mean(&rs.iter().map(|r| r.rrs).collect::<Vec<_>>()),
                ros: (!ros.is_empty()).then(|| mean(&ros)),
                rcs: mean(&rs.iter().map(|r| r.proxy_rcs).collect::<Vec<_>>()),
            })
        })
        .collect()
}

/// Runs the selected analyses. Scores are rescored under `rubric`'s
/// category weights; sub-metric weights come from each record.
pub fn run_diagnostics(corpus: &Corpus, rubric: &RubricProfile, opts: &DiagnosticsOptions) -> Result<DiagnosticsReport, StatsError> {
    if corpus.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let has = |a: Analysis| opts.analyses.contains(&a);
    let auc = if has(Analysis::Auc) {
        let scores: Vec<f64> = corpus
            .records
            .iter()
            .map(|r| r.rescore(rubric).map_err(|e| StatsError::Rescore(e.to_string())))
            .collect::<Result<_, _>>()?;
        let labels = corpus.labels();
        Some(AucReport {
            auc: auc_roc(&scores, &labels)?,
            ci: bootstrap_auc_ci(&scores, &labels, opts.resamples, opts.level, opts.seed)?,
        })
    } else {
        None
    };
    Ok(DiagnosticsReport {
        n_records: corpus.len(),
        n_success: corpus.labels().iter().filter(|&&l| l).count(),
        rubric: RubricRef { name: rubric.name.clone(), version: rubric.version.clone() },
        analyses: opts.analyses.iter().copied().collect(),
        unmatched_records: corpus.unmatched_records.clone(),
        unmatched_labels: corpus.unmatched_labels.clone(),
        categories: if has(Analysis::Kw) || has(Analysis::Pb) { Some(category_stats(corpus, rubric, opts)?) } else { None },
        pairwise: if has(Analysis::Pairwise) { Some(pairwise_stats(corpus)?) } else { None },
        submetrics: if has(Analysis::Submetrics) { Some(submetric_stats(corpus, opts.fdr)?) } else { None },
        auc,
        perturbation: if has(Analysis::Perturbation) {
            Some(weight_perturbation(corpus, rubric, opts.span, opts.steps)?)
        } else {
            None
        },
        loco: if has(Analysis::Loco) { Some(loco_analysis(corpus, rubric)?) } else { None },
        grid: if has(Analysis::Grid) {
            Some(grid_search_weights(corpus, rubric, opts.grid_step, opts.grid_floor)?)
        } else {
            None
        },
        modes: if has(Analysis::Modes) { Some(mode_summaries(corpus)) } else { None },
    })
}

fn p_fmt(p: f64) -> String {
    if p < 0.001 {
        "<0.001".into()
    } else {
        format!("{p:.3}")
    }
}

fn opt3(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:+.3}"))
}

impl DiagnosticsReport {
    /// Human-readable table. Scores and H to one decimal; correlations,
    /// AUC and τ to three.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "corpus: {} records ({} success), rubric {} {}",
            self.n_records, self.n_success, self.rubric.name, self.rubric.version
        );
        if !self.unmatched_records.is_empty() || !self.unmatched_labels.is_empty() {
            let _ = writeln!(
                s,
                "unmatched: {} records without labels, {} labels without records",
                self.unmatched_records.len(),
                self.unmatched_labels.len()
            );
        }
        if let Some(cats) = &self.categories {
            let _ = writeln!(s, "\nCat  w     r_pb    p_pb    H       p_KW    means by mode");
            for c in cats {
                let (r, p) = c.point_biserial.map_or(("n/a".into(), "n/a".into()), |pb| (format!("{:+.3}", pb.r), p_fmt(pb.p)));
                let (h, pk) = c.kruskal_wallis.map_or(("n/a".into(), "n/a".into()), |k| (format!("{:.1}", k.h), p_fmt(k.p)));
                let means: Vec<String> = c.means.iter().map(|m| format!("{}={:.1}", m.failure_mode, m.mean)).collect();
                let _ = writeln!(s, "{:<4} {:<5.2} {:<7} {:<7} {:<7} {:<7} {}", c.category.symbol(), c.weight, r, p, h, pk, means.join(" "));
            }
        }
        if let Some(pw) = &self.pairwise {
            let _ = writeln!(s, "\nCat  pair                              d       KS     p_MW");
            for p in pw {
                let pair = format!("{} vs {}", p.a, p.b);
                let _ = writeln!(s, "{:<4} {:<33} {:<7} {:<6.3} {}", p.category.symbol(), pair, opt3(p.cohens_d), p.ks_d, p_fmt(p.mann_whitney_p));
            }
        }
        if let Some(sm) = &self.submetrics {
            let _ = writeln!(s, "\nsub-metric               n     r_pb    p       q");
            for m in sm {
                let flag = if m.significant { " *" } else { "" };
                let _ = writeln!(s, "{:<24} {:<5} {:<7} {:<7} {}{}", m.id.as_str(), m.n, opt3(m.r), p_fmt(m.p), p_fmt(m.q), flag);
            }
        }
        if let Some(a) = &self.auc {
            let _ = writeln!(
                s,
                "\nAUC {:.3} [{:.3}, {:.3}] ({:.0}% CI, {} resamples, seed {})",
                a.auc,
                a.ci.lo,
                a.ci.hi,
                a.ci.level * 100.0,
                a.ci.resamples,
                a.ci.seed
            );
        }
        if let Some(pr) = &self.perturbation {
            let _ = writeln!(s, "\nweight perturbation: min Kendall tau per category");
            for r in pr {
                let note = r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
                let _ = writeln!(s, "{:<4} {:.3}{}", r.category.symbol(), r.min_tau, note);
            }
        }
        if let Some(rows) = &self.loco {
            let _ = writeln!(s, "\nRemoved  AUC    dAUC");
            for r in rows {
                match r.removed {
                    None => {
                        let _ = writeln!(s, "{:<8} {:.3}  ---", "none", r.auc);
                    }
                    Some(c) => {
                        let _ = writeln!(s, "-{:<7} {:.3}  {:+.3}", c.symbol(), r.auc, r.delta);
                    }
                }
            }
        }
        if let Some(g) = &self.grid {
            let w: Vec<String> = g.best_weights.iter().map(|(c, w)| format!("{}={:.1}", c.symbol(), w)).collect();
            let _ = writeln!(
                s,
                "\ngrid: {} configs, best AUC {:.3} at {} (baseline {:.3})",
                g.n_configs,
                g.best_auc,
                w.join(" "),
                g.baseline_auc
            );
        }
        if let Some(ms) = &self.modes {
            let _ = writeln!(s, "\nmode             n     RRS    ROS    RCS");
            for m in ms {
                let ros = m.ros.map_or("n/a".into(), |r| format!("{r:.1}"));
                let _ = writeln!(s, "{:<16} {:<5} {:<6.1} {:<6} {:.1}", m.failure_mode.as_str(), m.n, m.rrs, ros, m.rcs);
            }
        }
        s
    }
}
