//! CQI ↔ MCS link-adaptation table.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest CQI index in the 4-bit table.
pub const MAX_CQI: u8 = 15;
/// Number of rows, including the "no transmission" row.
pub const TABLE_ROWS: usize = 16;

/// The table as shipped in `data/mcs_table.csv`.
pub const STANDARD_CSV: &str = include_str!("../../data/mcs_table.csv");

/// One CQI row of the link-adaptation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub cqi4g: u8,
    pub cqi5g: Option<u8>,
    /// Bits per modulation symbol: 2 (QPSK), 4 (16QAM), 6 (64QAM), 0 for row 0.
    pub modulation_order: u8,
    pub code_rate_x1024: u16,
    /// Minimum SINR (dB) at which this CQI is reported. `-inf` for row 0.
    pub sinr_threshold_db: f64,
    /// Information bits per resource element.
    pub efficiency: f64,
}

const fn row(
    cqi4g: u8,
    cqi5g: Option<u8>,
    modulation_order: u8,
    code_rate_x1024: u16,
    sinr_threshold_db: f64,
    efficiency: f64,
) -> McsEntry {
    McsEntry {
        cqi4g,
        cqi5g,
        modulation_order,
        code_rate_x1024,
        sinr_threshold_db,
        efficiency,
    }
}

/// 4G CQI table with 5G index cross-reference and SINR thresholds at 10% BLER.
pub const STANDARD_ENTRIES: [McsEntry; TABLE_ROWS] = [
    row(0, None, 0, 0, f64::NEG_INFINITY, 0.0),
    row(1, None, 2, 78, -9.478, 0.1523),
    row(2, Some(0), 2, 120, -6.658, 0.2344),
    row(3, Some(2), 2, 193, -4.098, 0.3770),
    row(4, Some(4), 2, 308, -1.798, 0.6016),
    row(5, Some(6), 2, 449, 0.399, 0.8770),
    row(6, Some(8), 2, 602, 2.424, 1.1758),
    row(7, Some(11), 4, 378, 4.489, 1.4766),
    row(8, Some(13), 4, 490, 6.367, 1.9141),
    row(9, Some(15), 4, 616, 8.456, 2.4063),
    row(10, Some(18), 6, 466, 10.266, 2.7305),
    row(11, Some(20), 6, 567, 12.218, 3.3223),
    row(12, Some(22), 6, 666, 14.122, 3.9023),
    row(13, Some(24), 6, 772, 15.849, 4.5234),
    row(14, Some(26), 6, 873, 17.786, 5.1152),
    row(15, Some(28), 6, 948, 19.809, 5.5547),
];

fn modulation_name(order: u8) -> &'static str {
    match order {
        2 => "QPSK",
        4 => "16QAM",
        6 => "64QAM",
        _ => "none",
    }
}

fn modulation_order(name: &str) -> Option<u8> {
    match name.trim() {
        "QPSK" => Some(2),
        "16QAM" => Some(4),
        "64QAM" => Some(6),
        "none" | "-" => Some(0),
        _ => None,
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    cqi4g: u8,
    cqi5g: String,
    modulation: String,
    code_rate_x1024: u16,
    sinr_threshold_db: String,
    efficiency: f64,
}

/// The 16-row CQI table, indexed by 4G CQI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl Default for McsTable {
    fn default() -> Self {
        Self::standard()
    }
}

impl McsTable {
    pub fn standard() -> Self {
        Self {
            entries: STANDARD_ENTRIES.to_vec(),
        }
    }

    /// Builds a table from explicit rows, checking the ordering invariants.
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        let table = Self { entries };
        table.validate()?;
        Ok(table)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries = Vec::with_capacity(TABLE_ROWS);
        for (line, record) in rdr.deserialize::<CsvRow>().enumerate() {
            let r = record?;
            let cqi5g = match r.cqi5g.as_str() {
                "-" | "" => None,
                s => Some(s.parse::<u8>().map_err(|e| {
                    Error::McsTable(format!("row {}: bad cqi5g `{s}`: {e}", line + 1))
                })?),
            };
            let order = modulation_order(&r.modulation).ok_or_else(|| {
                Error::McsTable(format!(
                    "row {}: unknown modulation `{}`",
                    line + 1,
                    r.modulation
                ))
            })?;
            let threshold = match r.sinr_threshold_db.as_str() {
                "-inf" | "-" => f64::NEG_INFINITY,
                s => s.parse::<f64>().map_err(|e| {
                    Error::McsTable(format!("row {}: bad threshold `{s}`: {e}", line + 1))
                })?,
            };
            entries.push(McsEntry {
                cqi4g: r.cqi4g,
                cqi5g,
                modulation_order: order,
                code_rate_x1024: r.code_rate_x1024,
                sinr_threshold_db: threshold,
                efficiency: r.efficiency,
            });
        }
        Self::new(entries)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFixture(path.to_path_buf()));
        }
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            wtr.serialize(CsvRow {
                cqi4g: e.cqi4g,
                cqi5g: e.cqi5g.map_or_else(|| "-".to_string(), |c| c.to_string()),
                modulation: modulation_name(e.modulation_order).to_string(),
                code_rate_x1024: e.code_rate_x1024,
                sinr_threshold_db: if e.sinr_threshold_db.is_finite() {
                    e.sinr_threshold_db.to_string()
                } else {
                    "-inf".to_string()
                },
                efficiency: e.efficiency,
            })?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    fn validate(&self) -> Result<()> {
        if self.entries.len() != TABLE_ROWS {
            return Err(Error::McsTable(format!(
                "expected {TABLE_ROWS} rows, found {}",
                self.entries.len()
            )));
        }
        for (i, e) in self.entries.iter().enumerate() {
            if usize::from(e.cqi4g) != i {
                return Err(Error::McsTable(format!("row {i} has cqi4g {}", e.cqi4g)));
            }
        }
        let zero = &self.entries[0];
        if zero.efficiency != 0.0 || zero.sinr_threshold_db != f64::NEG_INFINITY {
            return Err(Error::McsTable("row 0 must be `no transmission`".into()));
        }
        for w in self.entries[1..].windows(2) {
            if !(w[1].sinr_threshold_db > w[0].sinr_threshold_db) {
                return Err(Error::McsTable(format!(
                    "threshold not increasing at CQI {}",
                    w[1].cqi4g
                )));
            }
            if !(w[1].efficiency > w[0].efficiency) {
                return Err(Error::McsTable(format!(
                    "efficiency not increasing at CQI {}",
                    w[1].cqi4g
                )));
            }
        }
        if !self.entries[1].sinr_threshold_db.is_finite() || !(self.entries[1].efficiency > 0.0) {
            return Err(Error::McsTable("row 1 must have a finite threshold".into()));
        }
        Ok(())
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn entry(&self, cqi: u8) -> &McsEntry {
        &self.entries[usize::from(cqi)]
    }

    pub fn efficiency(&self, cqi: u8) -> f64 {
        self.entry(cqi).efficiency
    }

    pub fn threshold_db(&self, cqi: u8) -> f64 {
        self.entry(cqi).sinr_threshold_db
    }

    /// Largest CQI whose threshold does not exceed `sinr_db` (0 below CQI 1).
    pub fn sinr_to_cqi(&self, sinr_db: f64) -> u8 {
        self.entries[1..]
            .iter()
            .take_while(|e| e.sinr_threshold_db <= sinr_db)
            .last()
            .map_or(0, |e| e.cqi4g)
    }

    /// Efficiency at a fractional CQI in `[1, 15]`, piecewise-linear between rows.
    pub fn interpolated_efficiency(&self, q: f64) -> f64 {
        self.interpolate(q, |e| e.efficiency)
    }

    /// SINR threshold at a fractional CQI in `[1, 15]`, piecewise-linear between rows.
    pub fn interpolated_threshold_db(&self, q: f64) -> f64 {
        self.interpolate(q, |e| e.sinr_threshold_db)
    }

    fn interpolate(&self, q: f64, field: impl Fn(&McsEntry) -> f64) -> f64 {
        let q = q.clamp(1.0, f64::from(MAX_CQI));
        let lo = q.floor() as u8;
        if lo >= MAX_CQI {
            return field(self.entry(MAX_CQI));
        }
        let t = q - f64::from(lo);
        let a = field(self.entry(lo));
        let b = field(self.entry(lo + 1));
        a + t * (b - a)
    }
}

/// Largest CQI whose threshold does not exceed `sinr_db`; 0 means no transmission.
pub fn sinr_to_cqi(sinr_db: f64, table: &McsTable) -> u8 {
    table.sinr_to_cqi(sinr_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_csv_matches_constants() {
        let parsed = McsTable::from_csv_reader(STANDARD_CSV.as_bytes()).unwrap();
        assert_eq!(parsed, McsTable::standard());
    }

    #[test]
    fn worked_example_and_boundaries() {
        let t = McsTable::standard();
        assert_eq!(t.sinr_to_cqi(11.0), 10);
        assert_eq!(t.sinr_to_cqi(-20.0), 0);
        assert_eq!(t.sinr_to_cqi(19.809), 15);
        assert_eq!(t.sinr_to_cqi(19.808_999), 14);
        assert_eq!(t.sinr_to_cqi(-9.478), 1);
        assert_eq!(t.sinr_to_cqi(f64::INFINITY), 15);
    }

    #[test]
    fn csv_round_trip() {
        let t = McsTable::standard();
        let text = t.to_csv_string().unwrap();
        assert_eq!(McsTable::from_csv_reader(text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn corrupted_rows_are_rejected() {
        let bad = STANDARD_CSV.replace("10.266", "30.0");
        assert!(matches!(
            McsTable::from_csv_reader(bad.as_bytes()),
            Err(Error::McsTable(_))
        ));
        let short: String = STANDARD_CSV.lines().take(10).collect::<Vec<_>>().join("\n");
        assert!(McsTable::from_csv_reader(short.as_bytes()).is_err());
    }

    #[test]
    fn missing_fixture_is_explicit() {
        let err = McsTable::from_csv_path("/nonexistent/mcs.csv").unwrap_err();
        assert!(matches!(err, Error::MissingFixture(_)));
    }

    #[test]
    fn interpolation_hits_rows() {
        let t = McsTable::standard();
        for q in 1..=MAX_CQI {
            assert_eq!(t.interpolated_efficiency(f64::from(q)), t.efficiency(q));
        }
        let mid = t.interpolated_efficiency(9.5);
        assert!((mid - (2.4063 + 2.7305) / 2.0).abs() < 1e-12);
    }
}
