use crate::config::Space;

use super::{IngestError, SeriesPanel, TransformedPanel};

/// Applies a FRED-MD transformation code to one series.
///
/// | code | transform |
/// |------|-----------|
/// | 1 | x |
/// | 2 | Δx |
/// | 3 | Δ²x |
/// | 4 | ln x |
/// | 5 | Δ ln x |
/// | 6 | Δ² ln x |
/// | 7 | Δ(x_t / x_{t-1} - 1) |
///
/// Any window touching a missing input yields a missing output. A ratio
/// with a zero denominator (code 7) is also reported as missing.
pub fn apply_tcode(x: &[Option<f64>], tcode: u8) -> Result<Vec<Option<f64>>, IngestError> {
    if matches!(tcode, 4..=6) && x.iter().flatten().any(|v| *v <= 0.0) {
        return Err(IngestError::NonPositiveForLog {
            series: String::new(),
            tcode,
        });
    }
    let logs = || x.iter().map(|v| v.map(f64::ln)).collect::<Vec<_>>();
    let out = match tcode {
        1 => x.to_vec(),
        2 => diff(x),
        3 => diff(&diff(x)),
        4 => logs(),
        5 => diff(&logs()),
        6 => diff(&diff(&logs())),
        7 => {
            let growth: Vec<Option<f64>> = std::iter::once(None)
                .chain(x.windows(2).map(|w| match (w[0], w[1]) {
                    (Some(prev), Some(cur)) => Some(cur / prev - 1.0),
                    _ => None,
                }))
                .collect();
            diff(&growth)
        }
        _ => {
            return Err(IngestError::BadTcode {
                series: String::new(),
                value: tcode.to_string(),
            })
        }
    };
    Ok(out.into_iter().map(|v| v.filter(|f| f.is_finite())).collect())
}

/// Leading missing values a code adds to a fully observed series.
pub fn leading_missing_added(tcode: u8) -> usize {
    match tcode {
        2 | 5 => 1,
        3 | 6 | 7 => 2,
        _ => 0,
    }
}

fn diff(x: &[Option<f64>]) -> Vec<Option<f64>> {
    if x.is_empty() {
        return Vec::new();
    }
    std::iter::once(None)
        .chain(x.windows(2).map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }))
        .collect()
}

/// Produces the panel the evaluation runs on.
pub fn build_transformed_panel(panel: &SeriesPanel, space: Space) -> Result<TransformedPanel, IngestError> {
    match space {
        Space::Raw => Ok(TransformedPanel {
            panel: panel.clone(),
            transform_applied: false,
        }),
        Space::Transformed => {
            let columns = panel
                .series_ids()
                .iter()
                .zip(panel.columns())
                .zip(panel.tcodes())
                .map(|((id, col), &tcode)| {
                    apply_tcode(col, tcode).map_err(|e| match e {
                        IngestError::NonPositiveForLog { tcode, .. } => IngestError::NonPositiveForLog {
                            series: id.clone(),
                            tcode,
                        },
                        other => other,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(TransformedPanel {
                panel: panel.with_columns(columns)?,
                transform_applied: true,
            })
        }
    }
}
