//! Tabulated asymptotic bound curves.

use anyhow::Result;

use hrpca_core::tailbound::asymptotic_bound;
use hrpca_core::{BoundQuery, Error};

use crate::record::BoundRow;
use crate::spec::BoundSpec;

/// One row per `(model, lambda)`. A trim level at or below the contamination
/// is reported as a zero bound rather than an error.
pub fn bound_rows(spec: &BoundSpec) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::with_capacity(spec.models.len() * spec.lambdas.len());
    for model in &spec.models {
        for &lambda in &spec.lambdas {
            let ratio = spec.trim.ratio_at(lambda).min(1.0);
            let bound = match asymptotic_bound(model, &BoundQuery::new(lambda, ratio)) {
                Ok(b) => b,
                Err(Error::TrimBelowContamination) => 0.0,
                Err(e) => return Err(e.into()),
            };
            rows.push(BoundRow {
                lambda,
                bound,
                model: model.name().into(),
                t_hat_ratio: ratio,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hrpca_core::tailbound::TrimLevel;

    #[test]
    fn default_curves_start_at_one_and_decrease() {
        let rows = bound_rows(&BoundSpec::default()).unwrap();
        for model in ["gaussian", "uniform"] {
            let curve: Vec<&BoundRow> = rows.iter().filter(|r| r.model == model).collect();
            assert_eq!(curve.len(), 50);
            assert_eq!(curve[0].lambda, 0.0);
            assert!((curve[0].bound - 1.0).abs() < 1e-3);
            for w in curve.windows(2) {
                assert!(w[1].bound <= w[0].bound + 1e-12);
            }
        }
    }

    #[test]
    fn breakdown_rows_are_zero() {
        let spec = BoundSpec {
            trim: TrimLevel::OfAuthentic(0.5),
            lambdas: vec![0.1, 0.4],
            ..BoundSpec::default()
        };
        let rows = bound_rows(&spec).unwrap();
        assert!(rows[0].bound > 0.0);
        assert_eq!(rows[1].bound, 0.0);
    }
}
