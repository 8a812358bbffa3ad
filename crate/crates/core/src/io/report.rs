//! CSV and JSON report writers.
//!
//! | file | columns |
//! |------|---------|
//! | eval report | `snr_db, mse, ber_pre, ber_post, mse_pre` |
//! | constellation | `re, im, stage, snr_db` |
//! | learning curve | `epoch, train_mse, validation_mse` |

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::models::eval::EvalReport;
use crate::nn::LearningCurve;

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_eval_csv(report: &EvalReport, path: &Path) -> Result<()> {
    write_rows(path, &report.points)
}

pub fn write_constellation_csv(report: &EvalReport, path: &Path) -> Result<()> {
    write_rows(path, &report.constellation)
}

#[derive(Serialize)]
struct CurveRow {
    epoch: usize,
    train_mse: f64,
    validation_mse: Option<f64>,
}

/// Epoch 0 holds the training MSE before the first update.
pub fn write_curve_csv(curve: &LearningCurve, path: &Path) -> Result<()> {
    let first = CurveRow {
        epoch: 0,
        train_mse: curve.initial_train_mse,
        validation_mse: None,
    };
    let rest = curve
        .train_mse
        .iter()
        .zip(&curve.validation_mse)
        .enumerate()
        .map(|(i, (&t, &v))| CurveRow {
            epoch: i + 1,
            train_mse: t,
            validation_mse: Some(v),
        });
    write_rows(path, std::iter::once(first).chain(rest))
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::eval::{ConstellationPoint, SnrPoint};
    use crate::rx::Stage;

    #[test]
    fn csv_headers_are_stable() {
        let dir = tempfile::tempdir().unwrap();
        let report = EvalReport {
            points: vec![SnrPoint {
                snr_db: 20.0,
                mse: 0.5,
                ber_pre: 0.0,
                ber_post: 0.25,
                mse_pre: 1.0,
            }],
            constellation: vec![ConstellationPoint {
                re: 0.5,
                im: -0.5,
                stage: Stage::PostNn,
                snr_db: 20.0,
            }],
            learning_curve: None,
        };
        let e = dir.path().join("e.csv");
        let c = dir.path().join("c.csv");
        let l = dir.path().join("l.csv");
        write_eval_csv(&report, &e).unwrap();
        write_constellation_csv(&report, &c).unwrap();
        let curve = LearningCurve {
            initial_train_mse: 1.0,
            train_mse: vec![0.5],
            validation_mse: vec![0.6],
        };
        write_curve_csv(&curve, &l).unwrap();
        assert_eq!(
            fs::read_to_string(e).unwrap(),
            "snr_db,mse,ber_pre,ber_post,mse_pre\n20.0,0.5,0.0,0.25,1.0\n"
        );
        assert_eq!(fs::read_to_string(c).unwrap(), "re,im,stage,snr_db\n0.5,-0.5,post_nn,20.0\n");
        assert_eq!(
            fs::read_to_string(l).unwrap(),
            "epoch,train_mse,validation_mse\n0,1.0,\n1,0.5,0.6\n"
        );
    }
}
