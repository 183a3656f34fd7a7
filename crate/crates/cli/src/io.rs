//! Tick CSV ingestion and fixed-format CSV output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

pub const TICK_HEADER: [&str; 3] = ["day", "timestamp", "log_price"];

/// One day of (seconds-from-open, log-price) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    pub day: String,
    pub timestamps: Vec<f64>,
    pub log_prices: Vec<f64>,
}

impl TickSeries {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub series: Vec<TickSeries>,
    pub warnings: Vec<String>,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Orders day identifiers numerically when every one parses as an integer.
fn sort_days(days: &mut [String]) {
    if days.iter().all(|d| d.parse::<i64>().is_ok()) {
        days.sort_by_key(|d| d.parse::<i64>().unwrap_or_default());
    } else {
        days.sort();
    }
}

pub fn ingest_csv(path: &Path) -> Result<Ingested> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ingest_str(&text).with_context(|| format!("in {}", path.display()))
}

/// Parses tick CSV text. Lines starting with `#` are comments. Within a day, a repeated
/// timestamp replaces the earlier row (with a warning); a decreasing timestamp is an error.
pub fn ingest_str(text: &str) -> Result<Ingested> {
    let mut warnings = Vec::new();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = match records.next() {
        None => {
            warnings.push("input contains no rows".to_string());
            return Ok(Ingested { series: Vec::new(), warnings });
        }
        Some(h) => h.context("reading header")?,
    };
    if header.iter().ne(TICK_HEADER.iter().copied()) {
        bail!("expected header `{}`, found `{}`", TICK_HEADER.join(","), header.iter().collect::<Vec<_>>().join(","));
    }

    let mut days: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in records {
        let rec = rec.context("malformed CSV")?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            bail!("line {line}: expected 3 fields, found {}", rec.len());
        }
        let day = rec[0].to_string();
        if day.is_empty() {
            bail!("line {line}: empty day identifier");
        }
        let ts: f64 = rec[1].parse().map_err(|_| anyhow!("line {line}: bad timestamp {:?}", &rec[1]))?;
        let lp: f64 = rec[2].parse().map_err(|_| anyhow!("line {line}: bad log_price {:?}", &rec[2]))?;
        if !ts.is_finite() || !lp.is_finite() {
            bail!("line {line}: non-finite value");
        }
        let (t, p) = days.entry(day.clone()).or_default();
        match t.last() {
            Some(&last) if ts == last => {
                warnings.push(format!("line {line}: duplicate timestamp {ts} on day {day}; keeping the later row"));
                *p.last_mut().expect("parallel vectors") = lp;
            }
            Some(&last) if ts < last => {
                bail!("line {line}: timestamp {ts} precedes {last} on day {day}");
            }
            _ => {
                t.push(ts);
                p.push(lp);
            }
        }
    }
    if days.is_empty() {
        warnings.push("input contains a header but no rows".to_string());
    }
    let mut keys: Vec<String> = days.keys().cloned().collect();
    sort_days(&mut keys);
    let series = keys
        .into_iter()
        .map(|k| {
            let (timestamps, log_prices) = days.remove(&k).unwrap_or_default();
            TickSeries { day: k, timestamps, log_prices }
        })
        .collect();
    Ok(Ingested { series, warnings })
}

/// Writes ticks in the ingestion format.
pub fn write_ticks(path: &Path, series: &[TickSeries], units: &str) -> Result<()> {
    let mut w = CsvOut::create(path, units)?;
    w.row(&TICK_HEADER)?;
    for s in series {
        for (t, p) in s.timestamps.iter().zip(&s.log_prices) {
            w.row(&[s.day.as_str(), &fmt_f64(*t), &fmt_f64(*p)])?;
        }
    }
    w.finish()
}

/// A CSV file whose first line is a `# units:` comment.
pub struct CsvOut {
    inner: csv::Writer<BufWriter<fs::File>>,
    path: String,
}

impl CsvOut {
    pub fn create(path: &Path, units: &str) -> Result<Self> {
        let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut buf = BufWriter::new(f);
        writeln!(buf, "# units: {units}")?;
        Ok(Self { inner: csv::Writer::from_writer(buf), path: path.display().to_string() })
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> Result<()> {
        self.inner.write_record(fields).with_context(|| format!("writing {}", self.path))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().with_context(|| format!("writing {}", self.path))
    }
}
