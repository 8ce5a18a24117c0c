//! CSV reading and writing.
//!
//! Input format: UTF-8, header `series_id,timestamp,kwh`, one reading per
//! line, timestamps exactly `YYYY-MM-DD HH:MM` (zero-padded, minute
//! resolution), `.` as the decimal point, no quoting. A UTF-8 BOM and CRLF
//! line endings are tolerated; everything else is rejected with a
//! line-numbered error.

use std::collections::BTreeMap;

use somkm_core::calendar::Timestamp;
use somkm_core::ingest::{Reading, ReadingTable};
use somkm_core::pipeline::Assignment;
use somkm_core::Error;

use crate::error::{CliError, Result};

/// The exact header every readings CSV must start with.
pub const READINGS_HEADER: &str = "series_id,timestamp,kwh";

fn parse_number(bytes: &[u8]) -> Option<u32> {
    let mut value = 0u32;
    for &b in bytes {
        if !b.is_ascii_digit() {
            return None;
        }
        value = value * 10 + u32::from(b - b'0');
    }
    Some(value)
}

/// Parses `YYYY-MM-DD HH:MM` exactly: fixed width, zero-padded fields,
/// and a real calendar instant.
fn parse_timestamp(value: &str) -> Option<Timestamp> {
    let b = value.as_bytes();
    if b.len() != 16 || b[4] != b'-' || b[7] != b'-' || b[10] != b' ' || b[13] != b':' {
        return None;
    }
    let year = parse_number(&b[0..4])? as i32;
    let month = parse_number(&b[5..7])? as u8;
    let day = parse_number(&b[8..10])? as u8;
    let hour = parse_number(&b[11..13])? as u8;
    let minute = parse_number(&b[14..16])? as u8;
    Timestamp::new(year, month, day, hour, minute)
}

/// Parses a readings CSV into a sorted, de-duplicated table.
///
/// `source` becomes the table's provenance tag (typically the file path).
/// Line numbers in errors are 1-based and count the header.
pub fn parse_readings(text: &str, source: &str) -> Result<ReadingTable> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));

    let header = lines.next().unwrap_or("");
    if header != READINGS_HEADER {
        return Err(CliError::BadHeader { found: header.to_string() });
    }

    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        let line_no = index + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::MalformedRow { line: line_no, found: fields.len() }.into());
        }
        let timestamp = parse_timestamp(fields[1]).ok_or(Error::BadTimestamp {
            line: line_no,
            value: fields[1].to_string(),
        })?;
        let kwh: f64 = fields[2].parse().map_err(|_| Error::NonFiniteValue {
            line: line_no,
            value: fields[2].to_string(),
        })?;
        if !kwh.is_finite() {
            return Err(Error::NonFiniteValue {
                line: line_no,
                value: fields[2].to_string(),
            }
            .into());
        }
        if kwh < 0.0 {
            return Err(Error::NegativeConsumption { line: line_no, kwh }.into());
        }
        rows.push(Reading { series_id: fields[0].to_string(), timestamp, kwh });
    }
    Ok(ReadingTable::from_readings(rows, source.to_string()))
}

/// Renders a table back to the input CSV format. Float readings print in
/// Rust's shortest round-trip form, so a parse of the output reproduces
/// the same values bit for bit.
pub fn readings_to_csv(table: &ReadingTable) -> String {
    let mut out = String::with_capacity(32 * (table.rows.len() + 1));
    out.push_str(READINGS_HEADER);
    out.push('\n');
    for reading in &table.rows {
        out.push_str(&format!(
            "{},{},{}\n",
            reading.series_id, reading.timestamp, reading.kwh
        ));
    }
    out
}

/// Renders generator truth labels as the sidecar CSV `series_id,archetype`.
pub fn truth_to_csv(truth: &BTreeMap<String, usize>) -> String {
    let mut out = String::from("series_id,archetype\n");
    for (series_id, archetype) in truth {
        out.push_str(&format!("{series_id},{archetype}\n"));
    }
    out
}

/// Renders final assignments as CSV with header `series_id,year,month,label`.
pub fn assignments_to_csv(assignments: &[Assignment]) -> String {
    let mut out = String::from("series_id,year,month,label\n");
    for a in assignments {
        out.push_str(&format!(
            "{},{},{},{}\n",
            a.series_id, a.month.year, a.month.month, a.label
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use somkm_core::calendar::MonthKey;

    #[test]
    fn single_well_formed_row() {
        let table =
            parse_readings("series_id,timestamp,kwh\nH1,2012-01-01 00:00,0.5\n", "t.csv").unwrap();
        assert_eq!(table.rows.len(), 1);
        let r = &table.rows[0];
        assert_eq!(r.series_id, "H1");
        assert_eq!(r.timestamp, Timestamp::new(2012, 1, 1, 0, 0).unwrap());
        assert_eq!(r.kwh, 0.5);
        assert_eq!(table.source, "t.csv");
        assert!(table.truth_labels.is_none());
    }

    #[test]
    fn header_only_gives_an_empty_table() {
        let table = parse_readings("series_id,timestamp,kwh\n", "t.csv").unwrap();
        assert!(table.rows.is_empty());
        assert!(table.warnings.is_empty());
    }

    #[test]
    fn bom_and_crlf_are_tolerated() {
        let text = "\u{feff}series_id,timestamp,kwh\r\nH1,2012-01-01 00:00,0.5\r\n";
        let table = parse_readings(text, "t.csv").unwrap();
        assert_eq!(table.rows.len(), 1);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = parse_readings("id,time,kwh\n", "t.csv").unwrap_err();
        assert!(matches!(err, CliError::BadHeader { .. }));
        let err = parse_readings("", "t.csv").unwrap_err();
        assert!(matches!(err, CliError::BadHeader { .. }));
    }

    #[test]
    fn negative_kwh_is_rejected_with_line_number() {
        let text = "series_id,timestamp,kwh\nH1,2012-01-01 00:00,-1.0\n";
        let err = parse_readings(text, "t.csv").unwrap_err();
        match err {
            CliError::Core(Error::NegativeConsumption { line, kwh }) => {
                assert_eq!(line, 2);
                assert_eq!(kwh, -1.0);
            }
            other => panic!("expected NegativeConsumption, got {other}"),
        }
    }

    #[test]
    fn non_finite_kwh_is_rejected() {
        for bad in ["abc", "NaN", "inf", "-inf", ""] {
            let text = format!("series_id,timestamp,kwh\nH1,2012-01-01 00:00,{bad}\n");
            let err = parse_readings(&text, "t.csv").unwrap_err();
            assert!(
                matches!(err, CliError::Core(Error::NonFiniteValue { line: 2, .. })),
                "{bad:?} should be NonFiniteValue, got {err}"
            );
        }
    }

    #[test]
    fn wrong_field_count_is_malformed() {
        let text = "series_id,timestamp,kwh\nH1,2012-01-01 00:00\n";
        let err = parse_readings(text, "t.csv").unwrap_err();
        assert!(matches!(err, CliError::Core(Error::MalformedRow { line: 2, found: 2 })));
        let text = "series_id,timestamp,kwh\nH1,2012-01-01 00:00,0.5,extra\n";
        let err = parse_readings(text, "t.csv").unwrap_err();
        assert!(matches!(err, CliError::Core(Error::MalformedRow { line: 2, found: 4 })));
        // A blank interior line is one empty field, not a silent skip.
        let text = "series_id,timestamp,kwh\n\nH1,2012-01-01 00:00,0.5\n";
        let err = parse_readings(text, "t.csv").unwrap_err();
        assert!(matches!(err, CliError::Core(Error::MalformedRow { line: 2, found: 1 })));
    }

    #[test]
    fn timestamps_must_match_the_format_exactly() {
        let bad = [
            "2012-1-01 00:00",   // month not zero-padded
            "2012-01-1 00:00",   // day not zero-padded
            "2012-01-01T00:00",  // wrong separator
            "2012-01-01 0:00",   // hour not zero-padded
            "2012-01-01 00:0",   // minute too short
            "2012-01-01 24:00",  // hour out of range
            "2012-01-01 00:60",  // minute out of range
            "2012-02-30 00:00",  // impossible date
            "2013-02-29 12:00",  // not a leap year
            "2012-01-01 00:00 ", // trailing junk
            "12-01-01 00:00",    // two-digit year
        ];
        for value in bad {
            let text = format!("series_id,timestamp,kwh\nH1,{value},0.5\n");
            let err = parse_readings(&text, "t.csv").unwrap_err();
            assert!(
                matches!(err, CliError::Core(Error::BadTimestamp { line: 2, .. })),
                "{value:?} should be BadTimestamp, got {err}"
            );
        }
        // The leap day itself is fine.
        let text = "series_id,timestamp,kwh\nH1,2012-02-29 23:30,0.5\n";
        assert!(parse_readings(text, "t.csv").is_ok());
    }

    #[test]
    fn duplicates_keep_first_and_warn() {
        let text = "series_id,timestamp,kwh\n\
                    H1,2012-01-01 00:00,0.5\n\
                    H1,2012-01-01 00:00,9.9\n";
        let table = parse_readings(text, "t.csv").unwrap();
        assert_eq!(table.rows.len(), 1);
        assert_eq!(table.rows[0].kwh, 0.5);
        assert_eq!(table.warnings.len(), 1);
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let text = "series_id,timestamp,kwh\n\
                    B2,2013-06-30 23:30,0.3333333333333333\n\
                    A1,2012-01-05 10:30,1.25\n";
        let table = parse_readings(text, "t.csv").unwrap();
        let rendered = readings_to_csv(&table);
        let reparsed = parse_readings(&rendered, "t.csv").unwrap();
        assert_eq!(table.rows, reparsed.rows);
        // Rendering is sorted, so a second round trip is byte-stable.
        assert_eq!(rendered, readings_to_csv(&reparsed));
    }

    #[test]
    fn truth_and_assignment_renderers_match_their_headers() {
        let mut truth = BTreeMap::new();
        truth.insert("s0".to_string(), 0usize);
        truth.insert("s1".to_string(), 1usize);
        assert_eq!(truth_to_csv(&truth), "series_id,archetype\ns0,0\ns1,1\n");

        let assignments = vec![Assignment {
            series_id: "H1".to_string(),
            month: MonthKey::new(2012, 3).unwrap(),
            label: 2,
        }];
        assert_eq!(
            assignments_to_csv(&assignments),
            "series_id,year,month,label\nH1,2012,3,2\n"
        );
    }
}
