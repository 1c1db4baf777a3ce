use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{chip_level_ber, estimate_ber, LinkModel, Scheme};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["scheme", "K", "N_h", "N_s", "ber", "trials", "ci_half_width"];

/// Table key; the derived order is the file's row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BerKey {
    pub scheme: Scheme,
    pub k: u32,
    pub n_h: u32,
    pub n_s: u32,
}

impl BerKey {
    pub fn new(scheme: Scheme, k: u32, n_h: u32, n_s: u32) -> Self {
        BerKey { scheme, k, n_h, n_s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEntry {
    pub ber: f64,
    pub trials: u64,
    pub ci_half_width: f64,
}

/// Grid of table keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableGrid {
    pub schemes: Vec<Scheme>,
    pub n_h: Vec<u32>,
    pub n_s: Vec<u32>,
    pub k: Vec<u32>,
}

impl TableGrid {
    /// `N_h ∈ 1..=n_h_max`, `N_s ∈ 1..=n_s_max`, `K ∈ 0..=k_max`.
    pub fn full(schemes: &[Scheme], n_h_max: u32, n_s_max: u32, k_max: u32) -> Self {
        TableGrid {
            schemes: schemes.to_vec(),
            n_h: (1..=n_h_max).collect(),
            n_s: (1..=n_s_max).collect(),
            k: (0..=k_max).collect(),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = BerKey> + '_ {
        self.schemes.iter().flat_map(move |&s| {
            self.k.iter().flat_map(move |&k| {
                self.n_h
                    .iter()
                    .flat_map(move |&h| self.n_s.iter().map(move |&n| BerKey::new(s, k, h, n)))
            })
        })
    }

    fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() || self.n_h.is_empty() || self.n_s.is_empty() || self.k.is_empty() {
            return Err(Error::invalid("every BER table range must be non-empty"));
        }
        if self.n_h.contains(&0) || self.n_s.contains(&0) {
            return Err(Error::invalid("N_h and N_s start at 1"));
        }
        Ok(())
    }
}

/// How table entries are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableEstimator {
    /// Bit-counting Monte Carlo at every grid point.
    BitLevel { trials: u64 },
    /// Chip-level simulation per `(scheme, N_h, K)`, extended to every
    /// `N_s` analytically; the trial count recorded is the chip count.
    ChipLevel { chips: u64 },
}

/// Empirical BER surface keyed by `(scheme, K, N_h, N_s)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BerTable {
    entries: BTreeMap<BerKey, BerEntry>,
}

const BUNDLED: &str = include_str!("../../data/ber_table.csv");

impl BerTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// The table shipped with the crate (see `data/README.md` for the recipe).
    pub fn bundled() -> Self {
        Self::read_csv(BUNDLED.as_bytes()).expect("bundled BER table parses")
    }

    pub fn insert(&mut self, key: BerKey, entry: BerEntry) -> Result<()> {
        if !(0.0..=1.0).contains(&entry.ber) || entry.trials == 0 || !(entry.ci_half_width >= 0.0) {
            return Err(Error::invalid(format!("invalid BER entry {entry:?} for {key:?}")));
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn get(&self, scheme: Scheme, k: u32, n_h: u32, n_s: u32) -> Result<BerEntry> {
        self.entries
            .get(&BerKey::new(scheme, k, n_h, n_s))
            .copied()
            .ok_or(Error::TableGap {
                scheme: scheme.name(),
                k,
                n_h,
                n_s,
            })
    }

    pub fn ber(&self, scheme: Scheme, k: u32, n_h: u32, n_s: u32) -> Result<f64> {
        self.get(scheme, k, n_h, n_s).map(|e| e.ber)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BerKey, &BerEntry)> {
        self.entries.iter()
    }

    /// Keys of `grid` without an entry.
    pub fn missing(&self, grid: &TableGrid) -> Vec<BerKey> {
        grid.keys().filter(|k| !self.entries.contains_key(k)).collect()
    }

    /// Largest interferer count with an entry for every `(N_h, N_s)` in
    /// `1..=n_h_max × 1..=n_s_max`.
    pub fn max_covered_k(&self, scheme: Scheme, n_h_max: u32, n_s_max: u32) -> Option<u32> {
        let mut k = 0;
        loop {
            let grid = TableGrid {
                schemes: vec![scheme],
                n_h: (1..=n_h_max).collect(),
                n_s: (1..=n_s_max).collect(),
                k: vec![k],
            };
            if !self.missing(&grid).is_empty() {
                return k.checked_sub(1);
            }
            k += 1;
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for (key, e) in &self.entries {
            w.write_record([
                key.scheme.name().to_string(),
                key.k.to_string(),
                key.n_h.to_string(),
                key.n_s.to_string(),
                e.ber.to_string(),
                e.trials.to_string(),
                e.ci_half_width.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::invalid(format!("unexpected BER table header {header:?}")));
        }
        let mut table = BerTable::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::invalid(format!("BER table row {}: bad {what}", line + 2));
            let key = BerKey::new(
                rec[0].parse().map_err(|_| bad("scheme"))?,
                rec[1].parse().map_err(|_| bad("K"))?,
                rec[2].parse().map_err(|_| bad("N_h"))?,
                rec[3].parse().map_err(|_| bad("N_s"))?,
            );
            let entry = BerEntry {
                ber: rec[4].parse().map_err(|_| bad("ber"))?,
                trials: rec[5].parse().map_err(|_| bad("trials"))?,
                ci_half_width: rec[6].parse().map_err(|_| bad("ci_half_width"))?,
            };
            if table.entries.contains_key(&key) {
                return Err(bad("duplicate key"));
            }
            table.insert(key, entry)?;
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Estimate every key of `grid`.
pub fn build_ber_table(model: &LinkModel, grid: &TableGrid, estimator: TableEstimator, seed: u64) -> Result<BerTable> {
    grid.validate()?;
    let mut table = BerTable::new();
    match estimator {
        TableEstimator::BitLevel { trials } => {
            for key in grid.keys() {
                let e = estimate_ber(model, key.scheme, key.n_h, key.n_s, key.k, trials, seed)?;
                table.insert(
                    key,
                    BerEntry {
                        ber: e.ber,
                        trials,
                        ci_half_width: e.half_width,
                    },
                )?;
            }
        }
        TableEstimator::ChipLevel { chips } => {
            let n_max = *grid.n_s.iter().max().unwrap();
            for &scheme in &grid.schemes {
                for &k in &grid.k {
                    for &n_h in &grid.n_h {
                        let est = chip_level_ber(model, scheme, n_h, k, chips, seed)?;
                        let ber = est.ber_curve(n_max);
                        let hw = est.half_width_curve(n_max);
                        for &n_s in &grid.n_s {
                            let i = n_s as usize - 1;
                            table.insert(
                                BerKey::new(scheme, k, n_h, n_s),
                                BerEntry {
                                    ber: ber[i],
                                    trials: chips,
                                    ci_half_width: hw[i],
                                },
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(table)
}
