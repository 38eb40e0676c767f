use serde::{Deserialize, Serialize};

use super::FeatureMatrix;

/// Per-column range fitted on a training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxParams {
    pub fn width(&self) -> usize {
        self.min.len()
    }

    /// `(x - min) / (max - min)` clamped to `[0, 1]`; 0 for zero-range columns.
    pub fn scale(&self, col: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[col], self.max[col]);
        let range = hi - lo;
        if range <= 0.0 {
            0.0
        } else {
            ((x - lo) / range).clamp(0.0, 1.0)
        }
    }
}

pub fn fit_minmax(train: &FeatureMatrix) -> MinMaxParams {
    let width = train.width();
    let mut min = vec![f64::INFINITY; width];
    let mut max = vec![f64::NEG_INFINITY; width];
    for row in train.rows() {
        for (c, &x) in row.iter().enumerate() {
            min[c] = min[c].min(x);
            max[c] = max[c].max(x);
        }
    }
    if train.is_empty() {
        min.fill(0.0);
        max.fill(0.0);
    }
    MinMaxParams { min, max }
}

/// Scales `m` with fitted parameters. Widths must agree.
pub fn apply_minmax(params: &MinMaxParams, m: &FeatureMatrix) -> FeatureMatrix {
    assert_eq!(params.width(), m.width(), "min-max width mismatch");
    let mut out = m.clone();
    let width = m.width();
    for (i, x) in out.values_mut().iter_mut().enumerate() {
        *x = params.scale(i % width, *x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(
            (0..values.len()).map(|i| i.to_string()).collect(),
            vec!["x".into()],
            0,
            values.iter().map(|&v| vec![v]).collect(),
        )
    }

    #[test]
    fn endpoints_and_midpoint() {
        let m = column(&[0.0, 5.0, 10.0]);
        let p = fit_minmax(&m);
        assert_eq!(apply_minmax(&p, &m).values(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn out_of_range_test_value_is_clamped() {
        let p = fit_minmax(&column(&[0.0, 10.0]));
        assert_eq!(apply_minmax(&p, &column(&[12.0, -3.0])).values(), &[1.0, 0.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let m = column(&[3.0, 3.0, 3.0]);
        assert_eq!(apply_minmax(&fit_minmax(&m), &m).values(), &[0.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn training_output_spans_unit_interval(values in prop::collection::vec(-1e6f64..1e6, 2..40)) {
            let m = column(&values);
            let scaled = apply_minmax(&fit_minmax(&m), &m);
            let lo = scaled.values().iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = scaled.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let constant = values.iter().all(|&v| v == values[0]);
            if constant {
                prop_assert_eq!((lo, hi), (0.0, 0.0));
            } else {
                prop_assert_eq!((lo, hi), (0.0, 1.0));
            }
        }
    }
}
