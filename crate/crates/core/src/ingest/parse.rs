use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use super::panel::next_month;
use super::{IngestError, SeriesPanel};

/// Parses a FRED-MD vintage file.
///
/// Layout: a `sasdate,<id>,...` header, a `Transform:,<tcode>,...` row,
/// then one `M/D/YYYY,<value>,...` row per month. Blank cells are missing
/// values and trailing all-blank rows are ignored.
pub fn parse_fredmd(raw: &[u8]) -> Result<SeriesPanel, IngestError> {
    let text = std::str::from_utf8(raw).map_err(|_| IngestError::Encoding)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut lines = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .skip_while(|(_, l)| l.trim().is_empty());

    let (_, header) = lines.next().ok_or(IngestError::MissingHeader)?;
    let header = split_cells(header);
    if !header[0].eq_ignore_ascii_case("sasdate") {
        return Err(IngestError::MissingHeader);
    }
    let series_ids: Vec<String> = header[1..].iter().map(|s| s.to_string()).collect();
    if series_ids.is_empty() {
        return Err(IngestError::BadHeader("no series columns".into()));
    }
    for (i, id) in series_ids.iter().enumerate() {
        if id.is_empty() {
            return Err(IngestError::BadHeader(format!("column {} has an empty name", i + 2)));
        }
        if series_ids[..i].contains(id) {
            return Err(IngestError::BadHeader(format!("duplicate series id `{id}`")));
        }
    }
    let width = header.len();

    let (row, transform) = lines.next().ok_or(IngestError::MissingTransformRow)?;
    let transform = split_cells(transform);
    if !transform[0].to_ascii_lowercase().starts_with("transform") {
        return Err(IngestError::MissingTransformRow);
    }
    if transform.len() != width {
        return Err(IngestError::RaggedRow {
            row,
            expected: width,
            found: transform.len(),
        });
    }
    let tcodes = series_ids
        .iter()
        .zip(&transform[1..])
        .map(|(id, cell)| {
            parse_tcode(cell).ok_or_else(|| IngestError::BadTcode {
                series: id.clone(),
                value: cell.to_string(),
            })
        })
        .collect::<Result<Vec<u8>, _>>()?;

    let mut body: Vec<(usize, Vec<&str>)> = lines.map(|(n, l)| (n, split_cells(l))).collect();
    while body.last().is_some_and(|(_, cells)| cells.iter().all(|c| c.is_empty())) {
        body.pop();
    }

    let mut dates = Vec::with_capacity(body.len());
    let mut columns = vec![Vec::with_capacity(body.len()); series_ids.len()];
    for (row, cells) in &body {
        let row = *row;
        if cells.len() != width {
            return Err(IngestError::RaggedRow {
                row,
                expected: width,
                found: cells.len(),
            });
        }
        let date = parse_date(cells[0]).ok_or_else(|| IngestError::BadDate {
            row,
            value: cells[0].to_string(),
        })?;
        if let Some(prev) = dates.last() {
            if next_month(*prev) != Some(date) {
                return Err(IngestError::NonConsecutiveDates { row });
            }
        }
        dates.push(date);
        for (j, cell) in cells[1..].iter().enumerate() {
            let value = if cell.is_empty() {
                None
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        return Err(IngestError::BadNumber {
                            row,
                            column: j + 2,
                            value: cell.to_string(),
                        })
                    }
                }
            };
            columns[j].push(value);
        }
    }

    SeriesPanel::new(dates, series_ids, columns, tcodes)
}

/// Renders a panel back into the FRED-MD layout.
pub fn to_fredmd_csv(panel: &SeriesPanel) -> String {
    let mut out = String::from("sasdate");
    for id in panel.series_ids() {
        out.push(',');
        out.push_str(id);
    }
    out.push_str("\nTransform:");
    for t in panel.tcodes() {
        let _ = write!(out, ",{t}");
    }
    out.push('\n');
    for (i, date) in panel.dates().iter().enumerate() {
        let _ = write!(out, "{}/{}/{}", date.month(), date.day(), date.year());
        for col in panel.columns() {
            out.push(',');
            if let Some(v) = col[i] {
                let _ = write!(out, "{v:?}");
            }
        }
        out.push('\n');
    }
    out
}

fn split_cells(line: &str) -> Vec<&str> {
    line.split(',')
        .map(|c| {
            let c = c.trim();
            c.strip_prefix('"')
                .and_then(|c| c.strip_suffix('"'))
                .unwrap_or(c)
                .trim()
        })
        .collect()
}

fn parse_tcode(cell: &str) -> Option<u8> {
    let code = match cell.parse::<u8>() {
        Ok(c) => c,
        // Some exports write codes as floats, e.g. `5.0`.
        Err(_) => {
            let f = cell.parse::<f64>().ok()?;
            if f.fract() != 0.0 || !(1.0..=7.0).contains(&f) {
                return None;
            }
            f as u8
        }
    };
    (1..=7).contains(&code).then_some(code)
}

fn parse_date(cell: &str) -> Option<NaiveDate> {
    let date = NaiveDate::parse_from_str(cell, "%m/%d/%Y")
        .or_else(|_| NaiveDate::parse_from_str(cell, "%Y-%m-%d"))
        .ok()?;
    (date.day() == 1).then_some(date)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "sasdate,RPI,CPI\nTransform:,1,5\n1/1/2020,1.5,100\n2/1/2020,,110\n3/1/2020,2.5,121\n";

    #[test]
    fn parses_small_fixture() {
        let p = parse_fredmd(FIXTURE.as_bytes()).unwrap();
        assert_eq!(p.n_dates(), 3);
        assert_eq!(p.series_ids(), ["RPI", "CPI"]);
        assert_eq!(p.tcodes(), [1, 5]);
        assert_eq!(p.column(0), [Some(1.5), None, Some(2.5)]);
        assert_eq!(p.dates()[2], NaiveDate::from_ymd_opt(2020, 3, 1).unwrap());
    }

    #[test]
    fn accepts_crlf_and_trailing_blank_rows() {
        let text = FIXTURE.replace('\n', "\r\n") + ",,\r\n,,\r\n\r\n";
        let p = parse_fredmd(text.as_bytes()).unwrap();
        assert_eq!(p, parse_fredmd(FIXTURE.as_bytes()).unwrap());
    }

    #[test]
    fn bad_tcode() {
        let e = parse_fredmd(b"sasdate,A,B\nTransform:,1,9\n1/1/2020,1,2\n").unwrap_err();
        assert!(matches!(e, IngestError::BadTcode { ref series, .. } if series == "B"));
        let e = parse_fredmd(b"sasdate,A\nTransform:,x\n").unwrap_err();
        assert!(matches!(e, IngestError::BadTcode { .. }));
    }

    #[test]
    fn ragged_row_reports_line() {
        let e = parse_fredmd(b"sasdate,A,B,C\nTransform:,1,1,1\n1/1/2020,1,2,3\n2/1/2020,1,2\n").unwrap_err();
        assert_eq!(
            e,
            IngestError::RaggedRow {
                row: 4,
                expected: 4,
                found: 3
            }
        );
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_fredmd(b"").unwrap_err(), IngestError::MissingHeader);
        assert_eq!(parse_fredmd(b"date,A\n").unwrap_err(), IngestError::MissingHeader);
        assert_eq!(
            parse_fredmd(b"sasdate,A\n").unwrap_err(),
            IngestError::MissingTransformRow
        );
        assert_eq!(
            parse_fredmd(b"sasdate,A\n1/1/2020,3\n").unwrap_err(),
            IngestError::MissingTransformRow
        );
        assert_eq!(
            parse_fredmd(b"sasdate,A\nTransform:,1\n1/1/2020,abc\n").unwrap_err(),
            IngestError::BadNumber {
                row: 3,
                column: 2,
                value: "abc".into()
            }
        );
        assert_eq!(
            parse_fredmd(b"sasdate,A\nTransform:,1\n1/1/2020,1\n3/1/2020,2\n").unwrap_err(),
            IngestError::NonConsecutiveDates { row: 4 }
        );
        assert!(matches!(
            parse_fredmd(b"sasdate,A\nTransform:,1\n1/15/2020,1\n").unwrap_err(),
            IngestError::BadDate { row: 3, .. }
        ));
        assert!(matches!(
            parse_fredmd(b"sasdate,A\nTransform:,1\n1/1/2020,inf\n").unwrap_err(),
            IngestError::BadNumber { .. }
        ));
        assert_eq!(parse_fredmd(&[0xff, 0xfe]).unwrap_err(), IngestError::Encoding);
    }

    #[test]
    fn round_trips_through_csv() {
        let p = parse_fredmd(FIXTURE.as_bytes()).unwrap();
        let again = parse_fredmd(to_fredmd_csv(&p).as_bytes()).unwrap();
        assert_eq!(p, again);
    }
}
