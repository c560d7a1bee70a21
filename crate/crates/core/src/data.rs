//! Multi-view samples and the per-view CSV table format.
//!
//! Both feature files and evidence files use one row per (sample, view):
//!
//! ```text
//! sample_id,view_id,label,v_1,...,v_D
//! ```
//!
//! The value columns are named `x_j` for features and `e_j` for evidence.
//! Rows of one sample share `sample_id`; samples keep the order in which
//! they first appear. A `view_id` of `global` marks the global view.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GLOBAL_VIEW_ID: &str = "global";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiViewSample {
    pub id: String,
    /// Local-view feature vectors.
    pub views: Vec<Vec<f64>>,
    pub global: Option<Vec<f64>>,
    pub label: usize,
}

impl MultiViewSample {
    /// Sets the global view to the concatenation of all local views.
    pub fn with_concat_global(mut self) -> Self {
        self.global = Some(self.views.concat());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiViewDataset {
    pub num_classes: usize,
    pub samples: Vec<MultiViewSample>,
}

impl MultiViewDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_views(&self) -> usize {
        self.samples.first().map_or(0, |s| s.views.len())
    }

    /// Deterministic split: the last `ceil(n · test_fraction)` samples form
    /// the test set.
    pub fn split(&self, test_fraction: f64) -> Result<(MultiViewDataset, MultiViewDataset)> {
        if !(0.0..1.0).contains(&test_fraction) {
            return Err(Error::InvalidParameter {
                name: "test_fraction",
                reason: format!("{test_fraction} outside [0, 1)"),
            });
        }
        let n_test = (self.len() as f64 * test_fraction).ceil() as usize;
        let cut = self.len() - n_test;
        let part = |s: &[MultiViewSample]| MultiViewDataset {
            num_classes: self.num_classes,
            samples: s.to_vec(),
        };
        Ok((part(&self.samples[..cut]), part(&self.samples[cut..])))
    }

    pub fn with_concat_global(self) -> Self {
        Self {
            num_classes: self.num_classes,
            samples: self
                .samples
                .into_iter()
                .map(MultiViewSample::with_concat_global)
                .collect(),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewRow {
    pub sample_id: String,
    pub view_id: String,
    pub label: Option<usize>,
    pub values: Vec<f64>,
}

/// Rows grouped by sample, in first-appearance order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRows {
    pub sample_id: String,
    pub label: Option<usize>,
    pub rows: Vec<ViewRow>,
}

pub fn read_view_table(reader: impl Read) -> Result<Vec<ViewRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let fixed = ["sample_id", "view_id", "label"];
    if header.len() < 4 || header.iter().take(3).ne(fixed.iter().copied()) {
        return Err(Error::Malformed(format!(
            "expected header `sample_id,view_id,label,<values>...`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let label = match rec[2].trim() {
            "" => None,
            s => Some(s.parse::<usize>().map_err(|_| {
                Error::Malformed(format!("row {}: label `{s}` is not a class index", line + 1))
            })?),
        };
        // Trailing empty cells pad rows narrower than the header.
        let cells: Vec<&str> = rec.iter().skip(3).map(str::trim).collect();
        let used = cells.iter().rposition(|c| !c.is_empty()).map_or(0, |i| i + 1);
        let values = cells[..used]
            .iter()
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    Error::Malformed(format!("row {}: `{v}` is not a number", line + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ViewRow {
            sample_id: rec[0].to_string(),
            view_id: rec[1].to_string(),
            label,
            values,
        });
    }
    Ok(rows)
}

pub fn group_by_sample(rows: Vec<ViewRow>) -> Result<Vec<SampleRows>> {
    let mut groups: Vec<SampleRows> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for row in rows {
        let slot = *index.entry(row.sample_id.clone()).or_insert_with(|| {
            groups.push(SampleRows {
                sample_id: row.sample_id.clone(),
                label: row.label,
                rows: Vec::new(),
            });
            groups.len() - 1
        });
        let g = &mut groups[slot];
        if g.label != row.label {
            return Err(Error::Malformed(format!(
                "sample `{}` has inconsistent labels",
                row.sample_id
            )));
        }
        g.rows.push(row);
    }
    Ok(groups)
}

/// Writes rows under a header as wide as the widest row. Shorter rows (a
/// global view of a different width, say) are padded with empty cells.
pub fn write_view_table<W: Write>(writer: W, prefix: &str, rows: &[ViewRow]) -> Result<()> {
    let width = rows.iter().map(|r| r.values.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["sample_id".to_string(), "view_id".into(), "label".into()];
    header.extend((1..=width).map(|j| format!("{prefix}_{j}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.sample_id.clone(),
            r.view_id.clone(),
            r.label.map(|l| l.to_string()).unwrap_or_default(),
        ];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        rec.resize(3 + width, String::new());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes local views as `view_1..view_K` and the global view as `global`.
pub fn write_features_csv<W: Write>(writer: W, ds: &MultiViewDataset) -> Result<()> {
    let mut rows = Vec::new();
    for s in &ds.samples {
        for (k, v) in s.views.iter().enumerate() {
            rows.push(ViewRow {
                sample_id: s.id.clone(),
                view_id: format!("view_{}", k + 1),
                label: Some(s.label),
                values: v.clone(),
            });
        }
        if let Some(g) = &s.global {
            rows.push(ViewRow {
                sample_id: s.id.clone(),
                view_id: GLOBAL_VIEW_ID.into(),
                label: Some(s.label),
                values: g.clone(),
            });
        }
    }
    write_view_table(writer, "x", &rows)
}

/// Reads a labelled feature table. Every sample must list its local views in
/// the same order as the first sample.
pub fn read_features_csv(reader: impl Read, num_classes: usize) -> Result<MultiViewDataset> {
    let groups = group_by_sample(read_view_table(reader)?)?;
    let mut expected_views: Option<Vec<String>> = None;
    let mut samples = Vec::with_capacity(groups.len());
    for g in groups {
        let label = g.label.ok_or_else(|| {
            Error::Malformed(format!("sample `{}` has no label", g.sample_id))
        })?;
        if label >= num_classes {
            return Err(Error::InvalidLabel(format!(
                "sample `{}`: class {label} with {num_classes} classes",
                g.sample_id
            )));
        }
        let mut views = Vec::new();
        let mut ids = Vec::new();
        let mut global = None;
        for r in g.rows {
            if r.view_id == GLOBAL_VIEW_ID {
                global = Some(r.values);
            } else {
                ids.push(r.view_id);
                views.push(r.values);
            }
        }
        match &expected_views {
            None => expected_views = Some(ids),
            Some(e) if *e != ids => {
                return Err(Error::Malformed(format!(
                    "sample `{}` lists views {ids:?}, expected {e:?}",
                    g.sample_id
                )))
            }
            _ => {}
        }
        samples.push(MultiViewSample {
            id: g.sample_id,
            views,
            global,
            label,
        });
    }
    Ok(MultiViewDataset {
        num_classes,
        samples,
    })
}
