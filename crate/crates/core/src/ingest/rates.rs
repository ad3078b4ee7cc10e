use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::table::{self, Item};

pub const RATES_HEADER: [&str; 2] = ["symbol", "usd_rate"];

/// Token symbol to USD rate. Empty unless the user supplies a rates file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConversionTable {
    rates: BTreeMap<String, f64>,
}

impl ConversionTable {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, symbol: &str, usd_rate: f64) -> Result<()> {
        if !(usd_rate.is_finite() && usd_rate >= 0.0) {
            return Err(Error::parse(0, format!("invalid rate {usd_rate} for {symbol}")));
        }
        self.rates.insert(symbol.to_ascii_uppercase(), usd_rate);
        Ok(())
    }

    pub fn rate(&self, symbol: &str) -> Option<f64> {
        self.rates.get(&symbol.to_ascii_uppercase()).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

pub fn load_rates(source: &str) -> Result<ConversionTable> {
    let mut table = ConversionTable::empty();
    let mut header_seen = false;
    for (line, item) in table::items(source) {
        let rec = match item {
            Item::Pragma(_) => continue,
            Item::Section(_) => return Err(Error::parse(line, "sections are not allowed in a rates file")),
            Item::Record(rec) => rec,
        };
        if !header_seen {
            if rec.fields != RATES_HEADER {
                return Err(Error::parse(line, "expected header symbol|usd_rate"));
            }
            header_seen = true;
            continue;
        }
        let [symbol, rate] = rec.fields.as_slice() else {
            return Err(Error::parse(line, "expected symbol|usd_rate"));
        };
        let rate: f64 = rate
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid rate {rate:?}")))?;
        if table.rate(symbol).is_some() {
            return Err(Error::parse(line, format!("duplicate symbol {symbol}")));
        }
        table
            .insert(symbol, rate)
            .map_err(|_| Error::parse(line, format!("invalid rate {rate}")))?;
    }
    if !header_seen {
        return Err(Error::parse(0, "missing header row"));
    }
    Ok(table)
}
