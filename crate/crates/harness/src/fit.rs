//! Log-log rate fitting over study rows: least squares on per-x medians
//! with a seed-level bootstrap confidence interval.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::study::Row;
use crate::HarnessError;

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub points: usize,
}

/// Which row field supplies the abscissa of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Width,
    SampleCount,
}

fn axis_value(row: &Row, axis: Axis) -> usize {
    match axis {
        Axis::Width => row.m,
        Axis::SampleCount => row.n,
    }
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

fn fit_from_groups(groups: &BTreeMap<usize, Vec<f64>>) -> (f64, f64) {
    let points: Vec<(f64, f64)> = groups
        .iter()
        .map(|(x, ys)| ((*x as f64).ln(), median(&mut ys.clone()).ln()))
        .collect();
    least_squares(&points)
}

/// Fits `log median(value)` against `log x` and reports a 95% confidence
/// interval from 200 seed-level bootstrap resamples.
pub fn fit_rate(rows: &[Row], axis: Axis) -> Result<RateFit, HarnessError> {
    let ok_rows: Vec<&Row> = rows.iter().filter(|r| r.error.is_empty()).collect();
    let mut by_x: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in &ok_rows {
        if !(row.value > 0.0) {
            return Err(HarnessError::Config(format!(
                "rate fit needs positive metric values, got {}",
                row.value
            )));
        }
        by_x.entry(axis_value(row, axis)).or_default().push(row.value);
    }
    if by_x.len() < 3 {
        return Err(HarnessError::Config(
            "rate fit needs at least 3 distinct x values".into(),
        ));
    }
    let (slope, intercept) = fit_from_groups(&by_x);

    let seeds: Vec<u64> = {
        let mut s: Vec<u64> = ok_rows.iter().map(|r| r.seed).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut slopes = Vec::with_capacity(200);
    let mut rng = ritz_core::rng::stream(0xB007, "rate-bootstrap");
    for _ in 0..200 {
        let picked: Vec<u64> = (0..seeds.len())
            .map(|_| seeds[rng.gen_range(0..seeds.len())])
            .collect();
        let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for row in &ok_rows {
            let copies = picked.iter().filter(|&&s| s == row.seed).count();
            for _ in 0..copies {
                groups
                    .entry(axis_value(row, axis))
                    .or_default()
                    .push(row.value);
            }
        }
        if groups.len() == by_x.len() {
            slopes.push(fit_from_groups(&groups).0);
        }
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).expect("finite slope"));
    let (ci_lower, ci_upper) = if slopes.is_empty() {
        (slope, slope)
    } else {
        (
            slopes[(slopes.len() as f64 * 0.025) as usize],
            slopes[((slopes.len() as f64 * 0.975) as usize).min(slopes.len() - 1)],
        )
    };
    Ok(RateFit {
        slope,
        intercept,
        ci_lower,
        ci_upper,
        points: by_x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(m: usize, seed: u64, value: f64) -> Row {
        Row {
            label: "test".into(),
            d: 1,
            m,
            n: m,
            s: 0.0,
            seed,
            value,
            bound: 0.0,
            config_hash: 0,
            error: String::new(),
        }
    }

    #[test]
    fn noiseless_power_laws() {
        for (p, want) in [(-1.0 / 3.0, -1.0 / 3.0), (-0.5, -0.5)] {
            let rows: Vec<Row> = [8usize, 16, 32, 64]
                .iter()
                .flat_map(|&m| {
                    (0..3).map(move |seed| row(m, seed, 2.0 * (m as f64).powf(p)))
                })
                .collect();
            let fit = fit_rate(&rows, Axis::Width).unwrap();
            assert!((fit.slope - want).abs() < 1e-12);
            assert!((fit.intercept - 2.0f64.ln()).abs() < 1e-12);
            assert!(fit.ci_lower <= fit.slope && fit.slope <= fit.ci_upper);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        let rows = vec![row(8, 0, 1.0), row(16, 0, 0.5)];
        assert!(fit_rate(&rows, Axis::Width).is_err());
        let rows = vec![row(8, 0, -1.0), row(16, 0, 0.5), row(32, 0, 0.2)];
        assert!(fit_rate(&rows, Axis::Width).is_err());
    }

    #[test]
    fn failed_rows_are_skipped() {
        let mut rows: Vec<Row> = [8usize, 16, 32]
            .iter()
            .map(|&m| row(m, 0, (m as f64).powf(-0.5)))
            .collect();
        let mut bad = row(64, 0, 1.0);
        bad.error = "boom".into();
        rows.push(bad);
        let fit = fit_rate(&rows, Axis::Width).unwrap();
        assert_eq!(fit.points, 3);
        assert!((fit.slope + 0.5).abs() < 1e-12);
    }
}
