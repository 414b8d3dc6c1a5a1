//! Reading meteoblue-style CSV exports.
//!
//! An export starts with a block of named header rows (`LAT`, `LON`, `ASL`,
//! `CITY`, `NAME`, `UNIT`, `UTC OFFSET`, ...), followed by a column-header row
//! beginning with `Year`, followed by one data row per hour:
//!
//! ```text
//! Year,Month,Day,Hour,Minute,Temperature (2 m above gnd),Total Precipitation ...,Wind Speed ...,Wind Direction ...
//! 2019,10,22,0,0,29.63,0.00,2.28,150.43
//! ```
//!
//! Only the temperature column feeds the model. The other columns are parsed
//! and range-checked so that a corrupted file is rejected early.

use std::fmt;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, Utc};

/// Physical sanity window for near-surface air temperature, °C.
pub const TEMPERATURE_RANGE: (f64, f64) = (-90.0, 60.0);

const DATETIME_COLUMNS: [&str; 5] = ["Year", "Month", "Day", "Hour", "Minute"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("failed to read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("missing column-header row (a row starting with `Year`)")]
    MissingColumnHeader,
    #[error("line {line}: unexpected column-header layout: {message}")]
    BadColumnHeader { line: u64, message: String },
    #[error("missing mandatory header row `{0}`")]
    MissingHeaderRow(&'static str),
    #[error("header row `{row}`: {message}")]
    InvalidMetadata { row: &'static str, message: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    CellCount { line: u64, expected: usize, found: usize },
    #[error("line {line}: malformed cell in column `{column}`: {value:?}")]
    MalformedCell { line: u64, column: String, value: String },
    #[error("line {line}: column `{column}` value {value} outside [{min}, {max}]")]
    OutOfRange { line: u64, column: String, value: f64, min: f64, max: f64 },
    #[error("line {line}: {year:04}-{month:02}-{day:02} {hour:02}:{minute:02} is not a valid date/time")]
    InvalidDateTime { line: u64, year: i32, month: u32, day: u32, hour: u32, minute: u32 },
    #[error("zero data rows")]
    NoData,
    #[error("timestamps not strictly increasing at index {index} ({previous} then {current})")]
    NonMonotone { index: usize, previous: NaiveDateTime, current: NaiveDateTime },
    #[error("gap at index {index}: {previous} then {current} ({hours} h apart, expected 1 h)")]
    Gap { index: usize, previous: NaiveDateTime, current: NaiveDateTime, hours: f64 },
}

/// Station and variable description taken from the header rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMetadata {
    pub latitude: f64,
    pub longitude: f64,
    /// Metres above sea level.
    pub altitude: f64,
    pub city: String,
    /// Whole hours east of UTC.
    pub utc_offset: i32,
    pub variable_name: String,
    pub unit: String,
}

impl SeriesMetadata {
    pub fn validate(&self) -> Result<(), IngestError> {
        check_metadata_range("LAT", self.latitude, -90.0, 90.0)?;
        check_metadata_range("LON", self.longitude, -180.0, 180.0)?;
        if !self.altitude.is_finite() {
            return Err(IngestError::InvalidMetadata {
                row: "ASL",
                message: format!("altitude {} is not finite", self.altitude),
            });
        }
        if !(-12..=14).contains(&self.utc_offset) {
            return Err(IngestError::InvalidMetadata {
                row: "UTC OFFSET",
                message: format!("offset {} outside [-12, 14]", self.utc_offset),
            });
        }
        Ok(())
    }
}

fn check_metadata_range(row: &'static str, value: f64, min: f64, max: f64) -> Result<(), IngestError> {
    if value.is_finite() && (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(IngestError::InvalidMetadata { row, message: format!("{value} outside [{min}, {max}]") })
    }
}

/// One data row of an export. Temperature-only exports leave the other
/// measurements empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub year: i32,
    pub month: u32,
    pub day: u32,
    pub hour: u32,
    pub minute: u32,
    pub temperature: f64,
    pub precipitation: Option<f64>,
    pub wind_speed: Option<f64>,
    pub wind_direction: Option<f64>,
}

impl RawRecord {
    /// Wall-clock time in the file's UTC offset.
    pub fn local_time(&self) -> Option<NaiveDateTime> {
        NaiveDate::from_ymd_opt(self.year, self.month, self.day)?.and_hms_opt(self.hour, self.minute, 0)
    }
}

/// Gap-free hourly temperature readings.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSeries {
    start: DateTime<Utc>,
    values: Vec<f64>,
    metadata: SeriesMetadata,
}

impl TemperatureSeries {
    /// Builds a series directly from values. Fails on an empty or
    /// non-finite input.
    pub fn new(start: DateTime<Utc>, values: Vec<f64>, metadata: SeriesMetadata) -> Result<Self, IngestError> {
        if values.is_empty() {
            return Err(IngestError::NoData);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(IngestError::MalformedCell {
                line: 0,
                column: format!("value[{i}]"),
                value: values[i].to_string(),
            });
        }
        metadata.validate()?;
        Ok(Self { start, values, metadata })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn metadata(&self) -> &SeriesMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Timestamp of reading `index`.
    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::hours(index as i64)
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.timestamp(self.values.len() - 1)
    }

    /// Writes the series as a temperature-only export that
    /// [`parse_meteoblue_csv`] reads back to identical values.
    pub fn to_meteoblue_csv(&self) -> String {
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let m = &self.metadata;
        let rows: [(&str, String); 7] = [
            ("LAT", m.latitude.to_string()),
            ("LON", m.longitude.to_string()),
            ("ASL", m.altitude.to_string()),
            ("CITY", m.city.clone()),
            ("NAME", m.variable_name.clone()),
            ("UNIT", m.unit.clone()),
            ("UTC OFFSET", m.utc_offset.to_string()),
        ];
        for (key, value) in &rows {
            wtr.write_record([*key, value.as_str()]).expect("write to Vec");
        }
        let temperature_header = format!("{} [{}]", m.variable_name, m.unit);
        let mut header: Vec<&str> = DATETIME_COLUMNS.to_vec();
        header.push(&temperature_header);
        wtr.write_record(&header).expect("write to Vec");

        let offset = Duration::hours(i64::from(m.utc_offset));
        for (i, v) in self.values.iter().enumerate() {
            let local = (self.timestamp(i) + offset).naive_utc();
            use chrono::{Datelike, Timelike};
            wtr.write_record([
                local.year().to_string(),
                local.month().to_string(),
                local.day().to_string(),
                local.hour().to_string(),
                local.minute().to_string(),
                v.to_string(),
            ])
            .expect("write to Vec");
        }
        String::from_utf8(wtr.into_inner().expect("flush to Vec")).expect("csv output is UTF-8")
    }
}

/// A break in hourly continuity between `records[index - 1]` and `records[index]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discontinuity {
    pub index: usize,
    pub previous: NaiveDateTime,
    pub current: NaiveDateTime,
}

impl Discontinuity {
    pub fn hours(&self) -> f64 {
        (self.current - self.previous).num_seconds() as f64 / 3600.0
    }

    pub fn is_backwards(&self) -> bool {
        self.current <= self.previous
    }

    fn into_error(self) -> IngestError {
        if self.is_backwards() {
            IngestError::NonMonotone { index: self.index, previous: self.previous, current: self.current }
        } else {
            IngestError::Gap { index: self.index, previous: self.previous, current: self.current, hours: self.hours() }
        }
    }
}

impl fmt::Display for Discontinuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "index {}: {} -> {} ({} h)", self.index, self.previous, self.current, self.hours())
    }
}

/// Every place where consecutive records are not exactly one hour apart.
pub fn find_discontinuities(records: &[RawRecord]) -> Vec<Discontinuity> {
    let times: Vec<NaiveDateTime> = records.iter().filter_map(RawRecord::local_time).collect();
    times
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] != Duration::hours(1))
        .map(|(i, w)| Discontinuity { index: i + 1, previous: w[0], current: w[1] })
        .collect()
}

fn detect_delimiter(header_line: &str) -> u8 {
    let semicolons = header_line.matches(';').count();
    let commas = header_line.matches(',').count();
    if semicolons > commas {
        b';'
    } else {
        b','
    }
}

fn is_column_header(line: &str) -> bool {
    let trimmed = line.trim_start().trim_start_matches('"');
    trimmed.len() >= 4 && trimmed[..4].eq_ignore_ascii_case("year")
}

#[derive(Default)]
struct HeaderRows {
    latitude: Option<String>,
    longitude: Option<String>,
    altitude: Option<String>,
    city: Option<String>,
    name: Option<String>,
    unit: Option<String>,
    utc_offset: Option<String>,
}

impl HeaderRows {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        match key {
            "LAT" => Some(&mut self.latitude),
            "LON" => Some(&mut self.longitude),
            "ASL" => Some(&mut self.altitude),
            "CITY" => Some(&mut self.city),
            "NAME" => Some(&mut self.name),
            "UNIT" => Some(&mut self.unit),
            "UTC OFFSET" => Some(&mut self.utc_offset),
            _ => None,
        }
    }

    fn into_metadata(self) -> Result<SeriesMetadata, IngestError> {
        fn need(v: Option<String>, row: &'static str) -> Result<String, IngestError> {
            v.ok_or(IngestError::MissingHeaderRow(row))
        }
        fn number(v: Option<String>, row: &'static str) -> Result<f64, IngestError> {
            let text = need(v, row)?;
            text.trim()
                .parse::<f64>()
                .map_err(|_| IngestError::InvalidMetadata { row, message: format!("not a number: {text:?}") })
        }
        let latitude = number(self.latitude, "LAT")?;
        let longitude = number(self.longitude, "LON")?;
        let altitude = number(self.altitude, "ASL")?;
        let city = need(self.city, "CITY")?;
        let variable_name = need(self.name, "NAME")?;
        let unit = need(self.unit, "UNIT")?;
        let offset = number(self.utc_offset, "UTC OFFSET")?;
        if offset.fract() != 0.0 {
            return Err(IngestError::InvalidMetadata {
                row: "UTC OFFSET",
                message: format!("{offset} is not a whole number of hours"),
            });
        }
        let metadata =
            SeriesMetadata { latitude, longitude, altitude, city, utc_offset: offset as i32, variable_name, unit };
        metadata.validate()?;
        Ok(metadata)
    }
}

/// Parses an export into its metadata and data rows, in file order.
///
/// The delimiter (`,` or `;`) is taken from the column-header row.
pub fn parse_meteoblue_csv(text: &str) -> Result<(SeriesMetadata, Vec<RawRecord>), IngestError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let header_line = text.lines().find(|l| is_column_header(l)).ok_or(IngestError::MissingColumnHeader)?;
    let delimiter = detect_delimiter(header_line);

    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).delimiter(delimiter).from_reader(text.as_bytes());

    let mut header_rows = HeaderRows::default();
    let mut columns: Option<Vec<String>> = None;
    let mut records = Vec::new();

    for row in reader.records() {
        let row =
            row.map_err(|e| IngestError::Csv { line: e.position().map_or(0, |p| p.line()), message: e.to_string() })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        match &columns {
            None => {
                let key = row.get(0).unwrap_or("").trim();
                if is_column_header(key) {
                    columns = Some(check_column_header(&row, line)?);
                } else if let Some(slot) = header_rows.slot(&key.to_ascii_uppercase()) {
                    *slot = Some(row.get(1).unwrap_or("").trim().to_string());
                }
            }
            Some(columns) => records.push(parse_data_row(&row, columns, line)?),
        }
    }

    let metadata = header_rows.into_metadata()?;
    if records.is_empty() {
        return Err(IngestError::NoData);
    }
    Ok((metadata, records))
}

fn check_column_header(row: &csv::StringRecord, line: u64) -> Result<Vec<String>, IngestError> {
    let cells: Vec<String> = row.iter().map(|c| c.trim().to_string()).collect();
    if cells.len() != 6 && cells.len() != 9 {
        return Err(IngestError::BadColumnHeader {
            line,
            message: format!("expected 6 or 9 columns, found {}", cells.len()),
        });
    }
    for (cell, expected) in cells.iter().zip(DATETIME_COLUMNS) {
        if !cell.eq_ignore_ascii_case(expected) {
            return Err(IngestError::BadColumnHeader {
                line,
                message: format!("expected `{expected}`, found `{cell}`"),
            });
        }
    }
    if !cells[5].to_ascii_lowercase().contains("temperature") {
        return Err(IngestError::BadColumnHeader {
            line,
            message: format!("sixth column must be temperature, found `{}`", cells[5]),
        });
    }
    Ok(cells)
}

fn parse_data_row(row: &csv::StringRecord, columns: &[String], line: u64) -> Result<RawRecord, IngestError> {
    if row.len() != columns.len() {
        return Err(IngestError::CellCount { line, expected: columns.len(), found: row.len() });
    }
    let cell = |i: usize| row.get(i).unwrap_or("").trim();
    let malformed =
        |i: usize| IngestError::MalformedCell { line, column: columns[i].clone(), value: cell(i).to_string() };
    let int = |i: usize| cell(i).parse::<i64>().map_err(|_| malformed(i));
    let real = |i: usize| cell(i).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| malformed(i));
    let bounded = |i: usize, min: f64, max: f64| {
        let v = real(i)?;
        if (min..=max).contains(&v) {
            Ok(v)
        } else {
            Err(IngestError::OutOfRange { line, column: columns[i].clone(), value: v, min, max })
        }
    };

    let year = int(0)?;
    let month = int(1)?;
    let day = int(2)?;
    let hour = int(3)?;
    let minute = int(4)?;
    let invalid = || IngestError::InvalidDateTime {
        line,
        year: year as i32,
        month: month as u32,
        day: day as u32,
        hour: hour as u32,
        minute: minute as u32,
    };
    let (Ok(year), Ok(month), Ok(day), Ok(hour), Ok(minute)) =
        (i32::try_from(year), u32::try_from(month), u32::try_from(day), u32::try_from(hour), u32::try_from(minute))
    else {
        return Err(invalid());
    };

    let (lo, hi) = TEMPERATURE_RANGE;
    let temperature = bounded(5, lo, hi)?;
    let (precipitation, wind_speed, wind_direction) = if columns.len() == 9 {
        (Some(bounded(6, 0.0, f64::MAX)?), Some(bounded(7, 0.0, f64::MAX)?), Some(bounded(8, 0.0, 360.0)?))
    } else {
        (None, None, None)
    };

    let record = RawRecord { year, month, day, hour, minute, temperature, precipitation, wind_speed, wind_direction };
    if record.local_time().is_none() {
        return Err(invalid());
    }
    Ok(record)
}

/// Pulls the temperature column out of gap-free, strictly increasing records.
pub fn extract_temperature_series(
    records: &[RawRecord],
    metadata: &SeriesMetadata,
) -> Result<TemperatureSeries, IngestError> {
    let first = records.first().ok_or(IngestError::NoData)?;
    if let Some(d) = find_discontinuities(records).into_iter().next() {
        return Err(d.into_error());
    }
    let local = first.local_time().ok_or(IngestError::InvalidDateTime {
        line: 0,
        year: first.year,
        month: first.month,
        day: first.day,
        hour: first.hour,
        minute: first.minute,
    })?;
    let start = (local - Duration::hours(i64::from(metadata.utc_offset))).and_utc();
    TemperatureSeries::new(start, records.iter().map(|r| r.temperature).collect(), metadata.clone())
}

/// Reads, parses, and extracts a series from a file on disk.
pub fn load_series(path: &Path) -> Result<TemperatureSeries, IngestError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| IngestError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let (metadata, records) = parse_meteoblue_csv(&text)?;
    extract_temperature_series(&records, &metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "LAT,10.7734,10.7734,10.7734,10.7734
LON,106.604,106.604,106.604,106.604
ASL,7.00000,7.00000,7.00000,7.00000
CITY,Phường Bến Thành,Phường Bến Thành,Phường Bến Thành,Phường Bến Thành
DOMAIN,NEMSAUTO,NEMSAUTO,NEMSAUTO,NEMSAUTO
LEVEL,2 m above gnd,sfc,10 m above gnd,10 m above gnd
NAME,Temperature,Total Precipitation (high-resolution),Wind Speed,Wind Direction
UNIT,°C,mm,km/h,-
AGGREGATION,,,,
UTC OFFSET,7,7,7,7
Year,Month,Day,Hour,Minute,Temperature (2 m above gnd),Total Precipitation (high-resolution) (mm),Wind Speed (10 m above gnd),Wind Direction (10 m above gnd)
";

    fn doc(rows: &str) -> String {
        format!("{HEADER}{rows}")
    }

    #[test]
    fn parses_first_table_row() {
        let (meta, records) = parse_meteoblue_csv(&doc("2019,10,22,0,0,29.63,0.00,2.28,150.43\n")).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!((r.year, r.month, r.day, r.hour, r.minute), (2019, 10, 22, 0, 0));
        assert_eq!(r.temperature, 29.63);
        assert_eq!(r.precipitation, Some(0.0));
        assert_eq!(r.wind_speed, Some(2.28));
        assert_eq!(r.wind_direction, Some(150.43));
        assert_eq!(meta.utc_offset, 7);
        assert_eq!(meta.latitude, 10.7734);
        assert_eq!(meta.city, "Phường Bến Thành");
        assert_eq!(meta.unit, "°C");
        assert_eq!(meta.variable_name, "Temperature");
    }

    #[test]
    fn headers_without_rows_is_zero_data() {
        assert_eq!(parse_meteoblue_csv(&doc("")), Err(IngestError::NoData));
    }

    #[test]
    fn malformed_temperature_names_column() {
        let err = parse_meteoblue_csv(&doc("2019,10,22,0,0,abc,0.00,2.28,150.43\n")).unwrap_err();
        match err {
            IngestError::MalformedCell { line, column, value } => {
                assert_eq!(line, 12);
                assert_eq!(column, "Temperature (2 m above gnd)");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_header_row() {
        let text = doc("2019,10,22,0,0,29.63,0.00,2.28,150.43\n").replace("UTC OFFSET,7,7,7,7\n", "");
        assert_eq!(parse_meteoblue_csv(&text), Err(IngestError::MissingHeaderRow("UTC OFFSET")));
        assert_eq!(parse_meteoblue_csv("LAT,1\n"), Err(IngestError::MissingColumnHeader));
    }

    #[test]
    fn semicolon_delimiter() {
        let text =
            doc("2019,10,22,0,0,29.63,0.00,2.28,150.43\n2019,10,22,1,0,25.38,0.00,2.16,90.00\n").replace(',', ";");
        let (_, records) = parse_meteoblue_csv(&text).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].temperature, 25.38);
    }

    #[test]
    fn rejects_out_of_range_and_bad_dates() {
        assert!(matches!(
            parse_meteoblue_csv(&doc("2019,10,22,0,0,75.0,0.00,2.28,150.43\n")),
            Err(IngestError::OutOfRange { .. })
        ));
        assert!(matches!(
            parse_meteoblue_csv(&doc("2019,2,30,0,0,25.0,0.00,2.28,150.43\n")),
            Err(IngestError::InvalidDateTime { .. })
        ));
        assert!(matches!(
            parse_meteoblue_csv(&doc("2019,10,22,0,0,25.0,-1.0,2.28,150.43\n")),
            Err(IngestError::OutOfRange { .. })
        ));
        assert!(matches!(
            parse_meteoblue_csv(&doc("2019,10,22,0,0,25.0,0.00\n")),
            Err(IngestError::CellCount { expected: 9, found: 7, .. })
        ));
    }

    #[test]
    fn two_consecutive_records() {
        let (meta, records) =
            parse_meteoblue_csv(&doc("2019,10,22,0,0,29.63,0.00,2.28,150.43\n2019,10,22,1,0,25.38,0.00,2.16,90.00\n"))
                .unwrap();
        let series = extract_temperature_series(&records, &meta).unwrap();
        assert_eq!(series.values(), &[29.63, 25.38]);
        // 00:00 at UTC+7 is 17:00 UTC the previous day.
        assert_eq!(series.start().to_rfc3339(), "2019-10-21T17:00:00+00:00");
        assert_eq!(series.timestamp(1).to_rfc3339(), "2019-10-21T18:00:00+00:00");
    }

    #[test]
    fn gap_reported_at_index_one() {
        let (meta, records) =
            parse_meteoblue_csv(&doc("2019,10,22,0,0,29.63,0.00,2.28,150.43\n2019,10,22,2,0,25.20,0.00,2.10,50.04\n"))
                .unwrap();
        match extract_temperature_series(&records, &meta) {
            Err(IngestError::Gap { index, hours, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(hours, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backwards_time_is_non_monotone() {
        let (meta, records) =
            parse_meteoblue_csv(&doc("2019,10,22,1,0,29.63,0.00,2.28,150.43\n2019,10,22,1,0,25.20,0.00,2.10,50.04\n"))
                .unwrap();
        assert!(matches!(extract_temperature_series(&records, &meta), Err(IngestError::NonMonotone { index: 1, .. })));
    }

    #[test]
    fn temperature_only_round_trip() {
        let (meta, records) = parse_meteoblue_csv(&doc(
            "2019,10,22,0,0,29.63,0.00,2.28,150.43\n2019,10,22,1,0,25.38,0.00,2.16,90.00\n2019,10,22,2,0,0.1,0.00,2.16,90.00\n",
        ))
        .unwrap();
        let series = extract_temperature_series(&records, &meta).unwrap();
        let text = series.to_meteoblue_csv();
        let (meta2, records2) = parse_meteoblue_csv(&text).unwrap();
        let again = extract_temperature_series(&records2, &meta2).unwrap();
        assert_eq!(again, series);
        assert_eq!(records2[0].precipitation, None);
    }

    #[test]
    fn metadata_bounds() {
        let mut meta = SeriesMetadata {
            latitude: 10.0,
            longitude: 106.0,
            altitude: 7.0,
            city: "x".into(),
            utc_offset: 7,
            variable_name: "Temperature".into(),
            unit: "°C".into(),
        };
        assert!(meta.validate().is_ok());
        meta.utc_offset = 15;
        assert!(meta.validate().is_err());
        meta.utc_offset = 0;
        meta.latitude = 91.0;
        assert!(meta.validate().is_err());
    }
}
