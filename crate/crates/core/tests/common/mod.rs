//! Fixture repositories and independent reference computations shared by
//! the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::Path;
use std::process::Command;

use readiness_core::assess::{assess_snapshot, Assessment};
use readiness_core::{Patterns, RepoSnapshot, RubricProfile};
use serde_json::{json, Value};
use tempfile::TempDir;

pub struct Fixture {
    pub name: String,
    dir: TempDir,
}

impl Fixture {
    pub fn new(name: &str) -> Self {
        let dir = tempfile::Builder::new().prefix(&format!("{name}-")).tempdir().expect("tempdir");
        Fixture { name: name.to_string(), dir }
    }

    pub fn file(self, rel: &str, content: &str) -> Self {
        let p = self.dir.path().join(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(p, content).unwrap();
        self
    }

    pub fn notebook(self, rel: &str, cells: Vec<Value>) -> Self {
        let text = notebook_json(cells);
        self.file(rel, &text)
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }

    /// Commits the tree with fixed identity and dates so the SHA is stable.
    pub fn commit(self) -> Self {
        let git = |args: &[&str]| {
            let out = Command::new("git")
                .args(["-c", "init.defaultBranch=main", "-c", "commit.gpgsign=false"])
                .args(args)
                .current_dir(self.dir.path())
                .env("GIT_AUTHOR_NAME", "Fixture")
                .env("GIT_AUTHOR_EMAIL", "fixture@example.org")
                .env("GIT_COMMITTER_NAME", "Fixture")
                .env("GIT_COMMITTER_EMAIL", "fixture@example.org")
                .env("GIT_AUTHOR_DATE", "2024-01-01T00:00:00Z")
                .env("GIT_COMMITTER_DATE", "2024-01-01T00:00:00Z")
                .output()
                .expect("git runs");
            assert!(out.status.success(), "git {args:?}: {}", String::from_utf8_lossy(&out.stderr));
        };
        git(&["init", "-q"]);
        git(&["add", "-A"]);
        git(&["commit", "-q", "-m", "fixture"]);
        self
    }

    pub fn snapshot(&self) -> RepoSnapshot {
        RepoSnapshot::from_directory(self.path(), "").expect("snapshot")
    }

    pub fn assess(&self, rubric: &RubricProfile) -> Assessment {
        assess_snapshot(&self.snapshot(), rubric, &Patterns::default()).expect("assessment")
    }
}

pub fn code_cell(source: &str, execution_count: Option<u32>, outputs: Vec<Value>) -> Value {
    json!({
        "cell_type": "code",
        "execution_count": execution_count,
        "metadata": {},
        "outputs": outputs,
        "source": source,
    })
}

pub fn markdown_cell(source: &str) -> Value {
    json!({"cell_type": "markdown", "metadata": {}, "source": source})
}

pub fn stream_output(text: &str) -> Value {
    json!({"output_type": "stream", "name": "stdout", "text": text})
}

pub fn notebook_json(cells: Vec<Value>) -> String {
    serde_json::to_string_pretty(&json!({
        "cells": cells,
        "metadata": {"kernelspec": {"name": "python3", "display_name": "Python 3", "language": "python"}},
        "nbformat": 4,
        "nbformat_minor": 5,
    }))
    .unwrap()
}

/// Notebook with the given execution counts, one code cell per count.
pub fn counted_notebook(counts: &[Option<u32>]) -> Vec<Value> {
    counts.iter().enumerate().map(|(i, c)| code_cell(&format!("x{i} = {i}"), *c, vec![])).collect()
}

const GOLD_README: &str = "# Gold standard analysis

Reproduces the figures of the accompanying article from raw measurements.

## Installation

```bash
conda env create -f environment.yml
```

## Usage

```bash
make all
```

## Data

The measurements are archived at https://doi.org/10.5281/zenodo.1234567 and are
described in detail in docs/data.md. Each file holds one plate reading with the
columns well, time, absorbance and temperature. Values are raw instrument output
without normalisation; the pipeline normalises them against the blank wells.
Download them with scripts/download_data.sh before running the analysis.

## Hardware

Runs on a laptop; training the optional model needs a single GPU with 8 GB memory.

## Citation

Please cite the article when using this code.
";

const DATA_DOC: &str = "# Data description

The dataset contains 96-well plate absorbance readings collected over ten days.
Every file corresponds to one plate and one day. Columns: well identifier, time
since start in minutes, absorbance at 600 nm and chamber temperature in Celsius.
Blank wells are A1 to A3. Readings were exported directly from the instrument
software without any processing, so the pipeline performs all normalisation and
filtering steps itself. The archive also holds the plate layouts and a checksum
file so downloads can be verified before the analysis starts running anything.
";

const GOLD_ANALYSIS: &str = r#""""Normalise plate readings and fit growth curves."""
import argparse

import numpy as np
import pandas as pd
import yaml

from growth import fit_curve


def load(path):
    """Read one plate file."""
    # plate files are plain CSV
    return pd.read_csv(path)


def main():
    """Command-line entry point."""
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="config.yaml")
    args = parser.parse_args()
    # fixed seed so bootstrap intervals are stable
    rng = np.random.default_rng(42)
    with open(args.config) as fh:
        cfg = yaml.safe_load(fh)
    # resample wells for the confidence band
    sample = rng.choice(cfg["wells"], size=10)
    return fit_curve(load(cfg["input"]), sample)


if __name__ == "__main__":
    main()
"#;

const GROWTH: &str = r#""""Growth-curve model."""
import numpy as np


def fit_curve(frame, wells):
    """Least-squares logistic fit."""
    # log-linear approximation of the logistic model
    return np.polyfit(frame["time"], np.log(frame["absorbance"]), 1)
"#;

pub fn gold() -> Fixture {
    Fixture::new("gold")
        .file("README.md", GOLD_README)
        .file("docs/data.md", DATA_DOC)
        .file("LICENSE", "MIT License\n")
        .file("CITATION.cff", "cff-version: 1.2.0\ntitle: Gold\n")
        .file(
            "environment.yml",
            "name: gold\nchannels: [conda-forge]\ndependencies:\n  - python=3.11\n  - numpy=1.26.4\n  - pandas=2.2.1\n  - pyyaml=6.0.1\n",
        )
        .file("conda-lock.yml", "version: 1\npackage: []\n")
        .file(
            "Dockerfile",
            "FROM python:3.11.8-slim\nCOPY environment.yml .\nRUN pip install numpy==1.26.4 pandas==2.2.1 pyyaml==6.0.1\n",
        )
        .file(".python-version", "3.11.8\n")
        .file(
            "Makefile",
            "all: data analysis\n\nsetup:\n\tconda env create -f environment.yml\n\ndata:\n\tbash scripts/download_data.sh\n\nanalysis:\n\tpython analysis.py --config config.yaml\n",
        )
        .file("Snakefile", "rule all:\n    input: 'results/curves.csv'\n")
        .file("scripts/download_data.sh", "#!/bin/sh\nwget https://zenodo.org/record/1234567/files/plates.zip\n")
        .file("config.yaml", "input: data/plate1.csv\nwells: [A1, A2]\n")
        .file("analysis.py", GOLD_ANALYSIS)
        .file("growth.py", GROWTH)
        .file("tests/test_growth.py", "from growth import fit_curve\n\n\ndef test_import():\n    assert fit_curve\n")
        .file("tests/test_analysis.py", "import analysis\n\n\ndef test_main():\n    assert analysis.main\n")
        .file(".github/workflows/ci.yml", "on: push\njobs:\n  test:\n    runs-on: ubuntu-latest\n")
        .file("results/curves.csv", "well,rate\nA1,0.1\n")
        .notebook(
            "notebooks/figures.ipynb",
            vec![
                markdown_cell("# Figures\nPlots the fitted growth rates for every plate."),
                code_cell("import pandas as pd\nrates = pd.read_csv('results/curves.csv')", Some(1), vec![]),
                markdown_cell("Rates per well, sorted."),
                code_cell("rates.sort_values('rate')", Some(2), vec![stream_output("A1 0.1\n")]),
            ],
        )
}

/// Explicit, pinned environment whose versions would conflict at install
/// time; otherwise sparse.
pub fn install_dep_like() -> Fixture {
    Fixture::new("install-dep")
        .file("README.md", "# Sequence tools\n\n## Installation\n\n```bash\npip install -r requirements.txt\n```\n")
        .file("requirements.txt", "numpy==1.19.5\npandas==2.2.1\nscipy==1.3.0\n")
        .file("Dockerfile", "FROM python:3.6\nRUN pip install -r requirements.txt\n")
        .file(
            "pipeline.py",
            "import numpy as np\nimport pandas as pd\nimport scipy.stats\n\n\ndef run():\n    frame = pd.read_csv('input.csv')\n    return scipy.stats.zscore(np.asarray(frame))\n",
        )
        .notebook(
            "explore.ipynb",
            vec![
                code_cell("import numpy as np\nimport pandas as pd", Some(1), vec![]),
                code_cell("frame = pd.read_csv('input.csv')", Some(2), vec![]),
            ],
        )
}

/// Third-party imports with no dependency manifest at all.
pub fn missing_module_like() -> Fixture {
    Fixture::new("missing-module")
        .file("README.md", "# Notebook experiments\n\nSome experiments.\n")
        .file(
            "model.py",
            "import numpy as np\nimport torch\nimport sklearn.metrics\nfrom transformers import AutoModel\n\n\ndef score(x):\n    return sklearn.metrics.accuracy_score(x, np.ones(len(x)))\n",
        )
        .notebook(
            "train.ipynb",
            vec![
                code_cell("import torch\nimport seaborn as sns", Some(3), vec![]),
                code_cell("weights = torch.randn(10)", Some(1), vec![]),
            ],
        )
}

/// Reads data from machine-specific paths with no pointer to where the data lives.
pub fn missing_data_like() -> Fixture {
    Fixture::new("missing-data")
        .file("README.md", "# Survey analysis\n\nRun the notebook to reproduce the tables.\n")
        .file("requirements.txt", "pandas\nmatplotlib\n")
        .file(
            "load.py",
            "import pandas as pd\n\n\ndef load():\n    return pd.read_csv('/home/alice/survey/raw_responses.csv')\n",
        )
        .notebook(
            "analysis.ipynb",
            vec![
                code_cell("import pandas as pd\nframe = pd.read_csv('/Users/alice/Desktop/survey.csv')", Some(1), vec![]),
                code_cell("frame.describe()", Some(2), vec![]),
            ],
        )
}

/// Reasonably documented and declared, but with swallowed exceptions and
/// stale notebook state.
pub fn code_error_like() -> Fixture {
    Fixture::new("code-error")
        .file(
            "README.md",
            "# Climate downscaling\n\n## Installation\n\n```bash\npip install -r requirements.txt\n```\n\n## Usage\n\n```bash\npython downscale.py\n```\n",
        )
        .file("requirements.txt", "numpy>=1.20\nxarray\n")
        .file(
            "downscale.py",
            "import numpy as np\nimport xarray as xr\n\n\ndef run(path):\n    try:\n        ds = xr.open_dataset(path)\n    except Exception:\n        pass\n    return np.mean(ds['tas'])\n",
        )
        .file("tests/test_downscale.py", "def test_placeholder():\n    assert True\n")
        .notebook(
            "check.ipynb",
            vec![
                code_cell("import numpy as np", Some(5), vec![]),
                code_cell("np.mean([1, 2])", Some(2), vec![stream_output("1.5\n")]),
            ],
        )
}

pub fn docs_only_like() -> Fixture {
    Fixture::new("docs-only")
        .file("README.md", "# Notes\n\n## Overview\n\nJust notes, no code.\n")
        .file("LICENSE", "MIT\n")
}

pub fn archetypes() -> Vec<Fixture> {
    vec![gold(), install_dep_like(), missing_module_like(), missing_data_like(), code_error_like()]
}

/// Ten assorted repositories: the five archetypes plus variants.
pub fn ten_fixtures() -> Vec<Fixture> {
    let mut out = archetypes();
    out.push(docs_only_like());
    out.push(
        Fixture::new("poetry")
            .file("pyproject.toml", "[tool.poetry]\nname = \"p\"\n\n[tool.poetry.dependencies]\npython = \"^3.10\"\nrequests = \"^2.31\"\n")
            .file("poetry.lock", "# lock\n")
            .file("src/p/__init__.py", "import requests\nimport random\n\nrandom.shuffle([1, 2])\n"),
    );
    out.push(
        Fixture::new("seeded-ml")
            .file("requirements.txt", "torch==2.2.0\nnumpy==1.26.4\n")
            .file("train.py", "import torch\n\ntorch.manual_seed(0)\nx = torch.randn(3)\n")
            .file("eval.py", "import numpy as np\n\nx = np.random.rand(3)\n")
            .file("config.json", "{\"lr\": 0.1}\n"),
    );
    out.push(
        Fixture::new("notebooks")
            .notebook("a.ipynb", counted_notebook(&[Some(1), Some(2), Some(3)]))
            .notebook("b.ipynb", counted_notebook(&[Some(2), Some(1)]))
            .notebook("c.ipynb", counted_notebook(&[None, None]))
            .file("README.md", "# Notebooks\n\nOpen them in Jupyter.\n"),
    );
    out.push(
        Fixture::new("creds")
            .file("requirements.txt", "boto3==1.34.0\n")
            .file("upload.py", "import boto3\n\nAWS_SECRET_ACCESS_KEY = \"wJalrXUtnFEMI/K7MDENG/bPxRfiCYEXAMPLEKEY\"\n")
            .file("Makefile", "install:\n\tpip install -r requirements.txt\n"),
    );
    out
}

// ---- synthetic corpora -------------------------------------------------

use readiness_core::assess::score_results;
use readiness_core::provenance::{record_for, RepositoryInfo};
use readiness_core::stats::{Corpus, LabelRow};
use readiness_core::{Category, FailureMode, ProvenanceRecord, SubMetricId, SubMetricResult};

/// Results where every sub-metric of category `c` scores `raws[c]` and the
/// seed sub-metric is not applicable, so each category raw equals the input.
pub fn uniform_results(raws: [f64; 5]) -> Vec<SubMetricResult> {
    SubMetricId::ALL
        .iter()
        .map(|&id| {
            let c = readiness_core::submetrics::spec_of(id).category;
            let score = if id == SubMetricId::SeedManagement { None } else { Some(raws[c.index()]) };
            SubMetricResult::new(id, score, vec![])
        })
        .collect()
}

pub fn synthetic_record(repo_id: &str, raws: [f64; 5], rubric: &RubricProfile) -> ProvenanceRecord {
    let a = score_results(uniform_results(raws), rubric, None).expect("scores");
    let repo = RepositoryInfo {
        source: format!("https://example.org/{repo_id}"),
        repo_id: repo_id.to_string(),
        commit_id: "0123456789abcdef0123456789abcdef01234567".into(),
        scan: Default::default(),
    };
    record_for(&a, repo, "2024-01-01T00:00:00Z".into())
}

pub fn label(repo_id: &str, mode: FailureMode) -> LabelRow {
    let (ok, total) = if mode == FailureMode::Success { (3, 3) } else { (1, 4) };
    LabelRow { repo_id: repo_id.into(), failure_mode: mode, success_nb_count: ok, total_exec_count: total }
}

/// Corpus from `(raws, mode)` pairs under the default rubric.
pub fn synthetic_corpus(rows: &[([f64; 5], FailureMode)]) -> Corpus {
    let rubric = RubricProfile::default_profile();
    let mut records = Vec::new();
    let mut labels = Vec::new();
    for (i, (raws, mode)) in rows.iter().enumerate() {
        let id = format!("org/repo{i:04}");
        records.push(synthetic_record(&id, *raws, &rubric));
        labels.push(label(&id, *mode));
    }
    Corpus::join(records, labels).expect("join")
}

pub fn category(i: usize) -> Category {
    Category::ALL[i]
}

// ---- reference computations -------------------------------------------

/// AUC as the fraction of (positive, negative) pairs ordered correctly,
/// ties counting one half.
pub fn auc_pairs(scores: &[f64], labels: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            den += 1.0;
            if scores[i] > scores[j] {
                num += 1.0;
            } else if scores[i] == scores[j] {
                num += 0.5;
            }
        }
    }
    num / den
}

/// Kendall tau-b by counting concordant, discordant and tied pairs.
pub fn kendall_pairs(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let da = if a[i] == a[j] { 0.0 } else { (a[i] - a[j]).signum() };
            let db = if b[i] == b[j] { 0.0 } else { (b[i] - b[j]).signum() };
            match (da == 0.0, db == 0.0) {
                (true, true) => {}
                (true, false) => tie_a += 1,
                (false, true) => tie_b += 1,
                (false, false) => {
                    if da == db {
                        conc += 1
                    } else {
                        disc += 1
                    }
                }
            }
        }
    }
    let n1 = (conc + disc + tie_a) as f64;
    let n2 = (conc + disc + tie_b) as f64;
    if n1 == 0.0 || n2 == 0.0 {
        return None;
    }
    Some((conc - disc) as f64 / (n1 * n2).sqrt())
}

/// Cohen's d with the pooled sample standard deviation.
pub fn cohens_d_direct(a: &[f64], b: &[f64]) -> f64 {
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let ss = |x: &[f64], m: f64| x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    let (ma, mb) = (mean(a), mean(b));
    let pooled = ((ss(a, ma) + ss(b, mb)) / (a.len() + b.len() - 2) as f64).sqrt();
    (ma - mb) / pooled
}

/// BH adjusted value of the p-value at sorted position `rank` (1-based):
/// min over j ≥ rank of m·p_(j)/j, capped at 1.
pub fn bh_direct(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
    let mut q = vec![0.0; m];
    for (r, &i) in order.iter().enumerate() {
        let best = order[r..]
            .iter()
            .enumerate()
            .map(|(off, &j)| p[j] * m as f64 / (r + off + 1) as f64)
            .fold(f64::INFINITY, f64::min);
        q[i] = best.min(1.0);
    }
    q
}
