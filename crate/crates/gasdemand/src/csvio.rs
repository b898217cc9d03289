//! CSV reading and writing for daily records and feature dumps.
//!
//! Daily records use the header `date,rgd,temp_forecast,temp_actual`;
//! `temp_actual` may be empty. Lines starting with `#` are comments. Dates
//! must be strict `YYYY-MM-DD`. Floats are written in shortest round-trip
//! form, so a write/read cycle is bit-exact.

use std::io::{Read, Write};

use gasdemand_core::calendar::CivilDate;
use gasdemand_core::features::{build_row, FeatureError, FEATURE_NAMES, N_FEATURES};
use gasdemand_core::{DailyRecord, Dataset, HolidayCalendar, TemperatureSource};

/// Header of the daily-record schema.
pub const DATASET_HEADER: [&str; 4] = ["date", "rgd", "temp_forecast", "temp_actual"];

/// CSV failures, with 1-based line numbers where known.
#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    /// Underlying CSV or IO failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// Header differs from the schema.
    #[error("unexpected header {found:?}, expected {expected:?}")]
    Header {
        /// Header found.
        found: Vec<String>,
        /// Header expected.
        expected: Vec<String>,
    },
    /// A field failed to parse.
    #[error("line {line}: {message}")]
    Field {
        /// Line number.
        line: u64,
        /// Description.
        message: String,
    },
    /// Records are inconsistent as a whole.
    #[error(transparent)]
    Dataset(#[from] FeatureError),
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), CsvError> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(CsvError::Header {
            found: found.iter().map(str::to_owned).collect(),
            expected: expected.iter().map(|s| (*s).to_owned()).collect(),
        });
    }
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_date(rec: &csv::StringRecord, i: usize) -> Result<CivilDate, CsvError> {
    let s = rec.get(i).unwrap_or("");
    s.parse().map_err(|e| CsvError::Field { line: line_of(rec), message: format!("date `{s}`: {e}") })
}

fn parse_f64(rec: &csv::StringRecord, i: usize, name: &str) -> Result<f64, CsvError> {
    let s = rec.get(i).unwrap_or("");
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CsvError::Field { line: line_of(rec), message: format!("{name} `{s}` is not a finite number") }),
    }
}

/// Parse daily records.
pub fn read_records<R: Read>(input: R) -> Result<Vec<DailyRecord>, CsvError> {
    let mut rdr = reader(input);
    let headers = rdr.headers()?;
    // The actual-temperature column may be left out entirely.
    if headers.len() == 3 {
        check_header(headers, &DATASET_HEADER[..3])?;
    } else {
        check_header(headers, &DATASET_HEADER)?;
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let temp_actual = match rec.get(3).unwrap_or("") {
            "" => None,
            _ => Some(parse_f64(&rec, 3, "temp_actual")?),
        };
        out.push(DailyRecord {
            date: parse_date(&rec, 0)?,
            rgd: parse_f64(&rec, 1, "rgd")?,
            temp_forecast: parse_f64(&rec, 2, "temp_forecast")?,
            temp_actual,
        });
    }
    Ok(out)
}

/// Parse and validate a dataset.
pub fn read_dataset<R: Read>(input: R) -> Result<Dataset, CsvError> {
    Ok(Dataset::new(read_records(input)?)?)
}

/// Write daily records, optionally preceded by comment lines.
pub fn write_records<W: Write>(output: W, records: &[DailyRecord], comments: &[String]) -> Result<(), CsvError> {
    let mut output = output;
    for c in comments {
        writeln!(output, "# {c}").map_err(csv::Error::from)?;
    }
    let mut w = csv::Writer::from_writer(output);
    w.write_record(DATASET_HEADER)?;
    for r in records {
        let actual = r.temp_actual.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([r.date.to_string(), r.rgd.to_string(), r.temp_forecast.to_string(), actual])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Raw feature rows as dumped by the CLI: date, the 21 covariates, demand.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDump {
    /// Row dates.
    pub dates: Vec<CivilDate>,
    /// Covariates in original units.
    pub rows: Vec<[f64; N_FEATURES]>,
    /// Demand.
    pub rgd: Vec<f64>,
}

impl FeatureDump {
    /// Feasible rows dated in `[from, to]`, in original units.
    pub fn build(
        dataset: &Dataset,
        from: CivilDate,
        to: CivilDate,
        source: TemperatureSource,
        calendar: &HolidayCalendar,
    ) -> Result<Self, FeatureError> {
        let mut dump = Self { dates: Vec::new(), rows: Vec::new(), rgd: Vec::new() };
        for rec in dataset.range(from, to) {
            match build_row(dataset, rec.date, source, calendar) {
                Ok(row) => {
                    dump.dates.push(rec.date);
                    dump.rows.push(row.0);
                    dump.rgd.push(rec.rgd);
                }
                Err(FeatureError::MissingLag { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(dump)
    }
}

fn feature_header() -> Vec<&'static str> {
    let mut h = vec!["date"];
    h.extend(FEATURE_NAMES);
    h.push("rgd");
    h
}

/// Write a feature dump.
pub fn write_features<W: Write>(output: W, dump: &FeatureDump) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(feature_header())?;
    for ((d, row), y) in dump.dates.iter().zip(&dump.rows).zip(&dump.rgd) {
        let mut fields = Vec::with_capacity(N_FEATURES + 2);
        fields.push(d.to_string());
        fields.extend(row.iter().map(f64::to_string));
        fields.push(y.to_string());
        w.write_record(&fields)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read a feature dump back.
pub fn read_features<R: Read>(input: R) -> Result<FeatureDump, CsvError> {
    let mut rdr = reader(input);
    check_header(rdr.headers()?, &feature_header())?;
    let mut dump = FeatureDump { dates: Vec::new(), rows: Vec::new(), rgd: Vec::new() };
    for rec in rdr.records() {
        let rec = rec?;
        dump.dates.push(parse_date(&rec, 0)?);
        let mut row = [0.0; N_FEATURES];
        for (j, v) in row.iter_mut().enumerate() {
            *v = parse_f64(&rec, j + 1, FEATURE_NAMES[j])?;
        }
        dump.rows.push(row);
        dump.rgd.push(parse_f64(&rec, N_FEATURES + 1, "rgd")?);
    }
    Ok(dump)
}
