use std::io::Write;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentResult;
use super::stats::{t_test, SignificanceResult};
use crate::selection::{RepresentationKind, SelectionConfig, Strategy};
use crate::similarity::Metric;

/// One line of the results table, with significance against both baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub target: String,
    pub strategy: Strategy,
    pub representation: Option<RepresentationKind>,
    pub metric: Option<Metric>,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub vs_rand: Option<SignificanceResult>,
    pub vs_all: Option<SignificanceResult>,
}

impl ResultRow {
    pub fn method_label(&self) -> String {
        match (self.representation, self.metric) {
            (Some(r), Some(m)) => format!("{}({},{})", self.strategy, r, m),
            _ => self.strategy.to_string(),
        }
    }
}

fn method_parts(config: &SelectionConfig) -> (Option<RepresentationKind>, Option<Metric>) {
    if config.strategy.is_similarity_guided() {
        (Some(config.representation), Some(config.metric))
    } else {
        (None, None)
    }
}

/// Tests `result` against the random and balanced baselines of the same
/// target. A baseline is not compared with itself.
pub fn compare(result: &ExperimentResult, rand: &ExperimentResult, all: &ExperimentResult) -> ResultRow {
    let test = |other: &ExperimentResult| {
        if other.selection.strategy == result.selection.strategy {
            None
        } else {
            t_test(&result.accuracies, &other.accuracies).ok()
        }
    };
    let (representation, metric) = method_parts(&result.selection);
    ResultRow {
        target: result.target.clone(),
        strategy: result.selection.strategy,
        representation,
        metric,
        runs: result.accuracies.len(),
        mean: result.mean,
        std: result.std,
        vs_rand: test(rand),
        vs_all: test(all),
    }
}

fn p_cell(s: &Option<SignificanceResult>) -> String {
    s.map(|s| format!("{:.6}", s.p_value)).unwrap_or_default()
}

/// Columns: target_domain, strategy, representation, metric, mean_acc, std,
/// p_vs_rand, p_vs_all, sig. `sig` holds `*` (better than rand) and `†`
/// (better than all) at p < 0.05.
pub fn write_results_tsv<W: Write>(mut out: W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "target_domain\tstrategy\trepresentation\tmetric\tmean_acc\tstd\tp_vs_rand\tp_vs_all\tsig")?;
    for r in rows {
        let sig = if r.runs < 2 {
            "insufficient runs".to_owned()
        } else {
            let mut s = String::new();
            if r.vs_rand.is_some_and(|t| t.better()) {
                s.push('*');
            }
            if r.vs_all.is_some_and(|t| t.better()) {
                s.push('†');
            }
            s
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{}\t{}",
            r.target,
            r.strategy,
            r.representation.map_or("-".to_owned(), |x| x.to_string()),
            r.metric.map_or("-".to_owned(), |x| x.to_string()),
            r.mean,
            r.std,
            p_cell(&r.vs_rand),
            p_cell(&r.vs_all),
            sig
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub method: String,
    pub mean: f64,
    pub std: f64,
}

/// Columns: n, strategy, mean_acc, std.
pub fn write_sweep_tsv<W: Write>(mut out: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(out, "n\tstrategy\tmean_acc\tstd")?;
    for r in rows {
        writeln!(out, "{}\t{}\t{:.6}\t{:.6}", r.n, r.method, r.mean, r.std)?;
    }
    Ok(())
}
