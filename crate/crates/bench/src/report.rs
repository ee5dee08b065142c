use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use brex_core::metrics::{aggregate, AggregateStat};
use serde::{Deserialize, Serialize};

use crate::experiment::ResultRecord;
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKey {
    Explainer,
    Family,
    Arity,
    Formula,
}

impl std::str::FromStr for GroupKey {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explainer" => Ok(GroupKey::Explainer),
            "family" => Ok(GroupKey::Family),
            "arity" => Ok(GroupKey::Arity),
            "formula" => Ok(GroupKey::Formula),
            other => Err(BenchError::Config(format!("unknown group key `{other}`"))),
        }
    }
}

pub const DEFAULT_GROUPING: [GroupKey; 3] = [GroupKey::Explainer, GroupKey::Family, GroupKey::Arity];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Jsd,
    TopK,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct GroupId {
    pub explainer: Option<String>,
    pub family: Option<String>,
    pub arity: Option<usize>,
    pub formula: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group: GroupId,
    pub jsd: AggregateStat,
    /// Fraction of perfect top-k overlaps, aggregated over 0/1 outcomes.
    pub topk: AggregateStat,
}

impl ReportRow {
    pub fn stat(&self, metric: Metric) -> &AggregateStat {
        match metric {
            Metric::Jsd => &self.jsd,
            Metric::TopK => &self.topk,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub group_by: Vec<GroupKey>,
    pub rows: Vec<ReportRow>,
}

/// Aggregates records per group with 95% confidence intervals.
pub fn report(records: &[ResultRecord], group_by: &[GroupKey]) -> Result<ReportTable, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyRecords);
    }
    let mut groups: BTreeMap<GroupId, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let mut id = GroupId::default();
        for key in group_by {
            match key {
                GroupKey::Explainer => id.explainer = Some(r.explainer_id.clone()),
                GroupKey::Family => id.family = Some(r.family.clone()),
                GroupKey::Arity => id.arity = Some(r.arity),
                GroupKey::Formula => id.formula = Some(r.formula_id.clone()),
            }
        }
        let entry = groups.entry(id).or_default();
        entry.0.push(r.jsd);
        entry.1.push(if r.topk_perfect { 1.0 } else { 0.0 });
    }
    let rows = groups
        .into_iter()
        .map(|(group, (j, t))| {
            Ok(ReportRow {
                group,
                jsd: aggregate(&j)?,
                topk: aggregate(&t)?,
            })
        })
        .collect::<Result<_, BenchError>>()?;
    Ok(ReportTable {
        group_by: group_by.to_vec(),
        rows,
    })
}

/// One line of `report_jsd.csv` / `report_topk.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCsvRow {
    pub explainer: Option<String>,
    pub family: Option<String>,
    pub arity: Option<usize>,
    pub formula: Option<String>,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub family: Option<String>,
    pub arity: Option<usize>,
    pub explainer: Option<String>,
    pub mean: f64,
    pub ci95: f64,
}

fn write_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| BenchError::Format(e.to_string()))
}

impl ReportTable {
    pub fn row(&self, explainer: &str, family: &str, arity: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.group.explainer.as_deref() == Some(explainer)
                && r.group.family.as_deref() == Some(family)
                && r.group.arity == Some(arity)
        })
    }

    pub fn csv_rows(&self, metric: Metric) -> Vec<ReportCsvRow> {
        self.rows
            .iter()
            .map(|r| {
                let s = r.stat(metric);
                ReportCsvRow {
                    explainer: r.group.explainer.clone(),
                    family: r.group.family.clone(),
                    arity: r.group.arity,
                    formula: r.group.formula.clone(),
                    n: s.n,
                    mean: s.mean,
                    std: s.std,
                    ci95: s.ci95_half_width,
                }
            })
            .collect()
    }

    pub fn to_csv(&self, metric: Metric) -> Result<String, BenchError> {
        write_csv(self.csv_rows(metric))
    }

    /// Explainer-by-arity tables, one per family, cells `mean ± ci95`.
    pub fn render_text(&self, metric: Metric) -> String {
        let title = match metric {
            Metric::Jsd => "JSD from ground truth",
            Metric::TopK => "Top-k accuracy",
        };
        let families: BTreeSet<Option<&str>> =
            self.rows.iter().map(|r| r.group.family.as_deref()).collect();
        let mut out = String::new();
        for family in families {
            let rows: Vec<&ReportRow> = self
                .rows
                .iter()
                .filter(|r| r.group.family.as_deref() == family)
                .collect();
            let arities: BTreeSet<Option<usize>> = rows.iter().map(|r| r.group.arity).collect();
            let explainers: BTreeSet<String> = rows.iter().map(|r| row_label(r)).collect();
            let _ = writeln!(out, "{title} ({})", family.unwrap_or("all families"));
            let header: Vec<String> = std::iter::once("explainer".to_string())
                .chain(arities.iter().map(|a| match a {
                    Some(a) => format!("arity {a}"),
                    None => "all arities".to_string(),
                }))
                .collect();
            let mut grid = vec![header];
            for label in &explainers {
                let mut line = vec![label.clone()];
                for arity in &arities {
                    let cell = rows
                        .iter()
                        .find(|r| r.group.arity == *arity && &row_label(r) == label)
                        .map(|r| {
                            let s = r.stat(metric);
                            format!("{:.3} ± {:.3}", s.mean, s.ci95_half_width)
                        })
                        .unwrap_or_else(|| "-".into());
                    line.push(cell);
                }
                grid.push(line);
            }
            let widths: Vec<usize> = (0..grid[0].len())
                .map(|c| grid.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
                .collect();
            for line in &grid {
                let cells: Vec<String> = line
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(c, (s, &w))| {
                        let pad = w - s.chars().count();
                        if c == 0 {
                            format!("{s}{}", " ".repeat(pad))
                        } else {
                            format!("{}{s}", " ".repeat(pad))
                        }
                    })
                    .collect();
                let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            }
            out.push('\n');
        }
        out
    }
}

fn row_label(r: &ReportRow) -> String {
    let e = r.group.explainer.as_deref().unwrap_or("all");
    match &r.group.formula {
        Some(f) => format!("{e} {f}"),
        None => e.to_string(),
    }
}

/// Parses a report CSV written by [`ReportTable::to_csv`].
pub fn parse_report_csv(text: &str) -> Result<Vec<ReportCsvRow>, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// JSD means and interval half-widths per (family, arity, explainer).
pub fn plot_rows(table: &ReportTable) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = table
        .rows
        .iter()
        .map(|r| PlotRow {
            family: r.group.family.clone(),
            arity: r.group.arity,
            explainer: r.group.explainer.clone(),
            mean: r.jsd.mean,
            ci95: r.jsd.ci95_half_width,
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.family, a.arity, &a.explainer).cmp(&(&b.family, b.arity, &b.explainer))
    });
    rows
}

pub fn emit_plot_data(table: &ReportTable) -> Result<String, BenchError> {
    write_csv(plot_rows(table))
}
