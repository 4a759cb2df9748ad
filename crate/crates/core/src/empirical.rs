//! Weighted household wealth records: loading, merging, canonical scaling and
//! Lorenz ordinates.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lorenz::{gini, LorenzCurve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HouseholdRecord {
    pub weight: f64,
    pub networth: f64,
}

impl HouseholdRecord {
    pub fn new(weight: f64, networth: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::input(format!("household weight must be finite and nonnegative, got {weight}")));
        }
        if !networth.is_finite() {
            return Err(Error::input(format!("household networth must be finite, got {networth}")));
        }
        Ok(HouseholdRecord { weight, networth })
    }
}

/// Records sorted by networth. After [`EmpiricalDistribution::canonicalize`]
/// the weights are the population fractions p_j and Σ p_j·w_j = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    records: Vec<HouseholdRecord>,
    normalized: bool,
    /// Zero-weight rows discarded while loading.
    dropped: usize,
}

fn sort_records(records: &mut [HouseholdRecord]) {
    records.sort_by(|a, b| a.networth.total_cmp(&b.networth));
}

impl EmpiricalDistribution {
    /// Raw distribution from validated records; zero-weight records are dropped.
    pub fn from_records(records: Vec<HouseholdRecord>) -> Self {
        let before = records.len();
        let mut records: Vec<HouseholdRecord> = records.into_iter().filter(|r| r.weight > 0.0).collect();
        let dropped = before - records.len();
        sort_records(&mut records);
        EmpiricalDistribution {
            records,
            normalized: false,
            dropped,
        }
    }

    /// Raw distribution from (weight, networth) pairs.
    pub fn from_pairs<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> Result<Self> {
        let records = pairs
            .into_iter()
            .map(|(w, x)| HouseholdRecord::new(w, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_records(records))
    }

    pub fn records(&self) -> &[HouseholdRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn dropped_zero_weight(&self) -> usize {
        self.dropped
    }

    /// Concatenates two raw record sets. The caller is responsible for putting
    /// both on the same absolute weight scale; nothing is reweighted.
    pub fn merge(&self, extra: &EmpiricalDistribution) -> Result<EmpiricalDistribution> {
        if self.normalized || extra.normalized {
            return Err(Error::input("merge expects raw distributions, not canonicalized ones"));
        }
        let mut records = self.records.clone();
        records.extend_from_slice(&extra.records);
        sort_records(&mut records);
        Ok(EmpiricalDistribution {
            records,
            normalized: false,
            dropped: self.dropped + extra.dropped,
        })
    }

    /// p_j = weight_j/Σweight, wealth rescaled so that Σ p_j·w_j = 1.
    pub fn canonicalize(&self) -> Result<EmpiricalDistribution> {
        let total_weight: f64 = self.records.iter().map(|r| r.weight).sum();
        if !(total_weight > 0.0) {
            return Err(Error::Degenerate("total household weight is zero".into()));
        }
        let mean: f64 = self
            .records
            .iter()
            .map(|r| r.weight / total_weight * r.networth)
            .sum();
        if !(mean > 0.0) {
            return Err(Error::Degenerate(format!("total wealth must be positive, got mean {mean}")));
        }
        let records = self
            .records
            .iter()
            .map(|r| HouseholdRecord {
                weight: r.weight / total_weight,
                networth: r.networth / mean,
            })
            .collect();
        Ok(EmpiricalDistribution {
            records,
            normalized: true,
            dropped: self.dropped,
        })
    }

    /// Cumulative (f_j, ℓ_j) over ascending wealth, equal wealths merged into
    /// one ordinate, with (0, 0) prepended and the end pinned to (1, 1).
    pub fn lorenz_ordinates(&self) -> Result<LorenzCurve> {
        if !self.normalized {
            return Err(Error::input("Lorenz ordinates need a canonicalized distribution"));
        }
        let mut f = vec![0.0];
        let mut l = vec![0.0];
        let (mut cf, mut cl) = (0.0, 0.0);
        let mut i = 0;
        while i < self.records.len() {
            let w = self.records[i].networth;
            while i < self.records.len() && self.records[i].networth == w {
                cf += self.records[i].weight;
                cl += self.records[i].weight * w;
                i += 1;
            }
            f.push(cf);
            l.push(cl);
        }
        *f.last_mut().unwrap() = 1.0;
        *l.last_mut().unwrap() = 1.0;
        // rounding in the running sum can leave an interior ordinate a hair above 1
        for v in f.iter_mut() {
            *v = v.min(1.0);
        }
        LorenzCurve::new(f, l, false)
    }

    /// Gini coefficient of the piecewise-linear ordinate curve.
    pub fn gini(&self) -> Result<f64> {
        let canonical = if self.normalized { self.clone() } else { self.canonicalize()? };
        Ok(gini(&canonical.lorenz_ordinates()?))
    }

    /// Population fraction with negative net worth.
    pub fn fraction_below_zero(&self) -> f64 {
        let total: f64 = self.records.iter().map(|r| r.weight).sum();
        let below: f64 = self.records.iter().filter(|r| r.networth < 0.0).map(|r| r.weight).sum();
        if total > 0.0 {
            below / total
        } else {
            0.0
        }
    }
}

/// Parses a `weight,networth` CSV (header required; extra columns ignored).
pub fn load_households<R: Read>(source: R) -> Result<EmpiricalDistribution> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| {
        headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing '{name}' column in header"),
        })
    };
    let (wi, ni) = (column("weight")?, column("networth")?);

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().all(|c| c.is_empty()) {
            continue;
        }
        let field = |idx: usize, name: &str| -> Result<f64> {
            let text = row.get(idx).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing {name} field"),
            })?;
            text.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("{name} '{text}' is not a decimal number"),
            })
        };
        let weight = field(wi, "weight")?;
        let networth = field(ni, "networth")?;
        let record = HouseholdRecord::new(weight, networth).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::input("household file contains no data rows"));
    }
    let dist = EmpiricalDistribution::from_records(records);
    if dist.dropped > 0 {
        log::warn!("dropped {} zero-weight household rows", dist.dropped);
    }
    if dist.is_empty() {
        return Err(Error::input("every household row has zero weight"));
    }
    Ok(dist)
}

pub fn load_households_path(path: impl AsRef<Path>) -> Result<EmpiricalDistribution> {
    let file = std::fs::File::open(path.as_ref())?;
    load_households(std::io::BufReader::new(file))
}
