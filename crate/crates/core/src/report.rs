//! CSV helpers shared by the sweep, calibration and validation outputs.

use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::error_analysis::ErrorCurve;

/// Round-trip decimal with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

/// Builds a CSV document from a header and string rows.
pub fn csv_document<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())?;
    }
    w.into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()).into())
}

/// Columns `REF,N_h,E_h,rate`.
pub fn curve_csv(curve: &ErrorCurve) -> Result<Vec<u8>> {
    csv_document(
        &["REF", "N_h", "E_h", "rate"],
        curve.records.iter().map(|r| {
            vec![
                r.refinement_level.to_string(),
                r.n_h.to_string(),
                fmt_real(r.value),
                fmt_opt(r.observed_rate),
            ]
        }),
    )
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_analysis::{ErrorRecord, Estimator};

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-17, 123456.789, -7.0] {
            let s = fmt_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(
                s.split('e').next().unwrap().replace(['-', '.'], "").len(),
                17
            );
        }
    }

    #[test]
    fn curve_csv_layout() {
        let mut c = ErrorCurve::default();
        for (l, e) in [(1, 0.5), (2, 0.125)] {
            c.push(ErrorRecord {
                refinement_level: l,
                n_h: 3,
                value: e,
                estimator: Estimator::Exact,
                observed_rate: None,
            });
        }
        let s = String::from_utf8(curve_csv(&c).unwrap()).unwrap();
        let lines: Vec<&str> = s.split('\n').collect();
        assert_eq!(lines[0], "REF,N_h,E_h,rate");
        assert_eq!(lines[1], "1,3,5.0000000000000000e-1,");
        assert_eq!(lines[2], "2,3,1.2500000000000000e-1,2.0000000000000000e0");
        assert!(!s.contains('\r'));
    }
}
