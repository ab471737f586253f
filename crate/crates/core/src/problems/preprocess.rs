/*
Copyright 2026 The affine-l1 Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const PSEUDO_COUNT: f64 = 0.5;

/// Zero counts become 0.5, each row is divided by its total, then the
/// natural log is taken elementwise.
pub fn log_contrast_preprocess(counts: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(v) = counts.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidData(format!(
            "counts must be finite and nonnegative, found {v}"
        )));
    }
    let mut out = counts.map(|v| if v == 0.0 { PSEUDO_COUNT } else { v });
    for mut row in out.row_iter_mut() {
        let total: f64 = row.iter().sum();
        for v in row.iter_mut() {
            *v = (*v / total).ln();
        }
    }
    Ok(out)
}
