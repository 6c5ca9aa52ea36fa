//! Command implementations behind the `cumdiff` binary.
//!
//! Screening computes the scalar statistics for many group pairs and
//! flags those whose `H / sigma` exceeds a threshold; graphing produces the
//! detailed plots for one pair. Every file is written to a temporary file
//! in the destination directory and then renamed into place.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{
    parse_dataset, perturb_scores, select_pair, uniform_weights, Dataset, ParseOptions,
    PerturbationPolicy,
};
use crate::pipeline::{compare, Comparison};
use crate::reliability::{diagram, BinStrategy, BinningSpec};
use crate::render::{emit_diagram, emit_series, render_cumulative, render_reliability, PlotSpec};
use crate::summary::SummaryStats;
use crate::synthgen::{generate, sample_responses, Example, SyntheticModel};

/// Default `H / sigma` screening threshold: the full height of the triangle.
pub const DEFAULT_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct InputOptions {
    pub input: PathBuf,
    pub parse: ParseOptions,
    pub perturbation: PerturbationPolicy,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationInfo {
    #[serde(flatten)]
    pub policy: PerturbationPolicy,
    /// Observations whose score was moved to break ties.
    pub jittered: usize,
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub data: Dataset,
    pub perturbation: PerturbationInfo,
}

pub fn load(opts: &InputOptions) -> Result<Loaded> {
    let file = File::open(&opts.input)?;
    let raw = parse_dataset(std::io::BufReader::new(file), &opts.parse)?;
    load_from(raw, &opts.perturbation)
}

pub fn load_from(raw: Dataset, policy: &PerturbationPolicy) -> Result<Loaded> {
    let data = perturb_scores(&raw, policy)?;
    let jittered = raw
        .observations()
        .iter()
        .zip(data.observations())
        .filter(|(a, b)| a.score != b.score)
        .count();
    Ok(Loaded {
        data,
        perturbation: PerturbationInfo {
            policy: *policy,
            jittered,
        },
    })
}

pub fn analyze_pair(data: &Dataset, first: &str, second: &str) -> Result<Comparison> {
    let (a, b) = select_pair(data, first, second)?;
    compare(&a, &b)
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub first: String,
    pub second: String,
    #[serde(flatten)]
    pub stats: SummaryStats,
    pub perturbation: PerturbationInfo,
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let s = &self.stats;
        let mut out = format!(
            "first: {}\nsecond: {}\nn: {}\nG: {}\nH: {}\nsigma: {}\nG/sigma: {}\nH/sigma: {}\nbernoulli_valid: {}\n",
            self.first, self.second, s.n, s.g, s.h, s.sigma, s.g_over_sigma, s.h_over_sigma, s.bernoulli_valid
        );
        if !s.bernoulli_valid {
            out.push_str("note: sigma is derived for 0/1 responses only (Bernoulli-only)\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let s = &self.stats;
        format!(
            "first,second,n,G,H,sigma,G/sigma,H/sigma,bernoulli_valid\n{},{},{},{},{},{},{},{},{}\n",
            self.first, self.second, s.n, s.g, s.h, s.sigma, s.g_over_sigma, s.h_over_sigma, s.bernoulli_valid
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn run_stats(loaded: &Loaded, first: &str, second: &str) -> Result<StatsReport> {
    let cmp = analyze_pair(&loaded.data, first, second)?;
    Ok(StatsReport {
        first: first.to_string(),
        second: second.to_string(),
        stats: cmp.stats,
        perturbation: loaded.perturbation.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct GraphOptions {
    pub out_dir: PathBuf,
    pub bins: Vec<usize>,
    /// Empty means width plus count (unweighted) or width plus ratio (weighted).
    pub strategies: Vec<BinStrategy>,
    /// Skip the SVG documents and write only the tables.
    pub tables_only: bool,
}

#[derive(Debug, Clone)]
pub struct GraphOutput {
    pub report: StatsReport,
    pub files: Vec<PathBuf>,
}

/// Replaces anything outside `[A-Za-z0-9_.-]` so labels are safe in file names.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn run_graph(
    loaded: &Loaded,
    first: &str,
    second: &str,
    opts: &GraphOptions,
) -> Result<GraphOutput> {
    let (a, b) = select_pair(&loaded.data, first, second)?;
    let cmp = compare(&a, &b)?;
    fs::create_dir_all(&opts.out_dir)?;
    let stem = format!("{}_vs_{}", file_stem(first), file_stem(second));
    let mut files = Vec::new();
    let mut emit = |name: String, contents: String| -> Result<()> {
        let path = opts.out_dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        files.push(path);
        Ok(())
    };

    let report = StatsReport {
        first: first.to_string(),
        second: second.to_string(),
        stats: cmp.stats,
        perturbation: loaded.perturbation.clone(),
    };
    if !opts.tables_only {
        let spec = PlotSpec::cumulative(&cmp.series);
        emit(
            format!("{stem}_cumulative.svg"),
            render_cumulative(&cmp.series, &cmp.triangle, &spec),
        )?;
    }
    emit(
        format!("{stem}_series.csv"),
        emit_series(&cmp.series, &cmp.stats),
    )?;
    emit(format!("{stem}_stats.json"), report.to_json()?)?;

    let weighted = !uniform_weights(&a) || !uniform_weights(&b) || a[0].weight != b[0].weight;
    let strategies = if !opts.strategies.is_empty() {
        opts.strategies.clone()
    } else if weighted {
        vec![BinStrategy::Width, BinStrategy::Ratio]
    } else {
        vec![BinStrategy::Width, BinStrategy::Count]
    };
    for &strategy in &strategies {
        for &bins in &opts.bins {
            let d = diagram(&a, &b, &BinningSpec::new(strategy, bins))?;
            let name = format!("{stem}_reliability_{strategy}_{bins}");
            if !opts.tables_only {
                emit(
                    format!("{name}.svg"),
                    render_reliability(&d, &PlotSpec::reliability(&d)),
                )?;
            }
            emit(format!("{name}.csv"), emit_diagram(&d, first, second)?)?;
        }
    }
    Ok(GraphOutput { report, files })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenEntry {
    pub first: String,
    pub second: String,
    #[serde(flatten)]
    pub stats: SummaryStats,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenFailure {
    pub first: String,
    pub second: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenReport {
    pub threshold: f64,
    /// Sorted by descending `H / sigma`.
    pub entries: Vec<ScreenEntry>,
    pub failures: Vec<ScreenFailure>,
}

impl ScreenReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "first,second,n,G,H,sigma,G/sigma,H/sigma,bernoulli_valid,flagged,error\n",
        );
        for e in &self.entries {
            let s = &e.stats;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},\n",
                e.first,
                e.second,
                s.n,
                s.g,
                s.h,
                s.sigma,
                s.g_over_sigma,
                s.h_over_sigma,
                s.bernoulli_valid,
                e.flagged
            ));
        }
        for f in &self.failures {
            out.push_str(&format!(
                "{},{},,,,,,,,,\"{}\"\n",
                f.first,
                f.second,
                f.error.replace('"', "'")
            ));
        }
        out
    }

    pub fn flagged(&self) -> impl Iterator<Item = &ScreenEntry> {
        self.entries.iter().filter(|e| e.flagged)
    }
}

/// Every unordered pair of labels, in label order.
pub fn all_pairs(labels: &[String]) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            pairs.push((a.clone(), b.clone()));
        }
    }
    pairs
}

/// Scores every pair independently; a failing pair is reported rather than
/// aborting the screen.
pub fn screen(data: &Dataset, pairs: &[(String, String)], threshold: f64) -> ScreenReport {
    let results: Vec<(usize, std::result::Result<SummaryStats, String>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            (
                i,
                analyze_pair(data, a, b)
                    .map(|c| c.stats)
                    .map_err(|e| e.to_string()),
            )
        })
        .collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (i, result) in results {
        let (first, second) = pairs[i].clone();
        match result {
            Ok(stats) => entries.push(ScreenEntry {
                flagged: stats.h_over_sigma > threshold,
                first,
                second,
                stats,
            }),
            Err(error) => failures.push(ScreenFailure {
                first,
                second,
                error,
            }),
        }
    }
    failures.sort_by(|x: &ScreenFailure, y: &ScreenFailure| {
        (&x.first, &x.second).cmp(&(&y.first, &y.second))
    });
    entries.sort_by(|x, y| {
        y.stats
            .h_over_sigma
            .total_cmp(&x.stats.h_over_sigma)
            .then_with(|| (&x.first, &x.second).cmp(&(&y.first, &y.second)))
    });
    ScreenReport {
        threshold,
        entries,
        failures,
    }
}

/// Screens the requested pairs (all pairs when `None`) and graphs each
/// flagged pair into `graph.out_dir`.
pub fn run_screen(
    loaded: &Loaded,
    pairs: Option<Vec<(String, String)>>,
    threshold: f64,
    graph: &GraphOptions,
) -> Result<(ScreenReport, Vec<GraphOutput>)> {
    if loaded.data.group_labels().len() < 2 {
        return Err(Error::TooFewGroups(loaded.data.group_labels().len()));
    }
    let pairs = pairs.unwrap_or_else(|| all_pairs(loaded.data.group_labels()));
    let report = screen(&loaded.data, &pairs, threshold);
    let flagged: Vec<&ScreenEntry> = report.flagged().collect();
    let graphs = flagged
        .par_iter()
        .map(|e| run_graph(loaded, &e.first, &e.second, graph))
        .collect::<Result<Vec<_>>>()?;
    Ok((report, graphs))
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub dataset: PathBuf,
    pub truth: PathBuf,
    pub rows: usize,
    pub seed: u64,
}

/// Writes `<example>_seed<seed>.csv` in the ingest format plus a companion
/// `<example>_seed<seed>_truth.csv` with the expected responses.
pub fn run_synth(model: &SyntheticModel, out_dir: &Path) -> Result<SynthOutput> {
    let truth = generate(model);
    let observations = sample_responses(&truth, model.seed.wrapping_add(1));
    fs::create_dir_all(out_dir)?;

    let mut data = csv::Writer::from_writer(Vec::new());
    data.write_record(["score", "response", "group"])?;
    for o in &observations {
        data.write_record([o.score.to_string(), o.response.to_string(), o.group.clone()])?;
    }
    let mut gt = csv::Writer::from_writer(Vec::new());
    gt.write_record(["score", "expected_response", "group"])?;
    for p in &truth.points {
        gt.write_record([
            p.score.to_string(),
            p.expected_response.to_string(),
            p.group.label().to_string(),
        ])?;
    }

    let stem = format!("{}_seed{}", model.example, model.seed);
    let dataset = out_dir.join(format!("{stem}.csv"));
    let truth_path = out_dir.join(format!("{stem}_truth.csv"));
    let finish = |w: csv::Writer<Vec<u8>>| w.into_inner().map_err(|e| Error::Io(e.into_error()));
    write_atomic(&dataset, &finish(data)?)?;
    write_atomic(&truth_path, &finish(gt)?)?;
    Ok(SynthOutput {
        dataset,
        truth: truth_path,
        rows: observations.len(),
        seed: model.seed,
    })
}

pub fn parse_example(name: &str) -> Result<Example> {
    name.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Observation;

    fn dataset() -> Dataset {
        let mut obs = Vec::new();
        for i in 0..60 {
            let s = i as f64 / 60.0;
            let group = ["a", "b", "c"][i % 3];
            let response = if group == "a" { 1.0 } else { (i % 2) as f64 };
            obs.push(Observation::new(s, response, group));
        }
        obs.push(Observation::new(2.0, 0.0, "lonely"));
        Dataset::new(obs).unwrap()
    }

    #[test]
    fn pairs_of_three_groups() {
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(all_pairs(&labels).len(), 3);
    }

    #[test]
    fn screen_isolates_failures_and_sorts() {
        let data = dataset();
        let pairs = all_pairs(data.group_labels());
        assert_eq!(pairs.len(), 6);
        let report = screen(&data, &pairs, 4.0);
        // every pair involving the single-observation group has < 3 blocks
        assert_eq!(report.failures.len(), 3);
        assert_eq!(report.entries.len(), 3);
        assert!(report
            .entries
            .windows(2)
            .all(|w| w[0].stats.h_over_sigma >= w[1].stats.h_over_sigma));
        for e in &report.entries {
            assert_eq!(e.flagged, e.stats.h_over_sigma > 4.0);
        }
        // ordering does not depend on the order pairs were given in
        let mut reversed = pairs.clone();
        reversed.reverse();
        let again = screen(&data, &reversed, 4.0);
        assert_eq!(again.entries, report.entries);
    }

    #[test]
    fn file_stems_are_sanitized() {
        assert_eq!(file_stem("a b/c"), "a_b_c");
        assert_eq!(file_stem("x-1.2"), "x-1.2");
    }
}
