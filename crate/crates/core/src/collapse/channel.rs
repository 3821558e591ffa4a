use serde::Serialize;

use crate::error::{Error, Result};

/// `f(u) = u0 tanh(u / u0)`: linear near zero, saturating at `±u0`.
pub fn tanh_response(u: f64, u0: f64) -> f64 {
    u0 * (u / u0).tanh()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogOdds {
    pub u: Vec<f64>,
    /// `D(u) = ln(P / (1 - P))`.
    pub d: Vec<f64>,
    /// `J(u) = (D(u) - D(0)) / 4`.
    pub j: Vec<f64>,
}

/// Log-odds of sampled probabilities and the conjugate field relative to the
/// origin, which must be on the grid.
pub fn log_odds_statistic(probabilities: &[f64], u_grid: &[f64]) -> Result<LogOdds> {
    if probabilities.len() != u_grid.len() {
        return Err(Error::DimensionMismatch {
            expected: u_grid.len(),
            got: probabilities.len(),
        });
    }
    if let Some(&p) = probabilities.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::DegenerateProbability(p));
    }
    let origin = u_grid.iter().position(|&u| u == 0.0).ok_or(Error::MissingOrigin)?;
    let d: Vec<f64> = probabilities.iter().map(|&p| (p / (1.0 - p)).ln()).collect();
    let d0 = d[origin];
    let j = d.iter().map(|&x| (x - d0) / 4.0).collect();
    Ok(LogOdds {
        u: u_grid.to_vec(),
        d,
        j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn response_examples() {
        assert_eq!(tanh_response(0.0, 2.0), 0.0);
        assert!((tanh_response(1e3, 2.0) - 2.0).abs() < 1e-12);
        assert!((tanh_response(-1e3, 2.0) + 2.0).abs() < 1e-12);
        let u0 = 3.0;
        let f = tanh_response(0.1 * u0, u0);
        assert!((f / u0 - 0.099668).abs() < 1e-6);
        assert!((f - 0.1 * u0).abs() / (0.1 * u0) < 0.0034);
    }

    #[test]
    fn log_odds_examples() {
        let r = log_odds_statistic(&[0.5, E / (1.0 + E)], &[0.0, 1.0]).unwrap();
        assert_eq!(r.d[0], 0.0);
        assert!((r.d[1] - 1.0).abs() < 1e-15);
        assert_eq!(r.j[0], 0.0);
        assert!((r.j[1] - 0.25).abs() < 1e-15);
        let r = log_odds_statistic(&[0.3, 0.6], &[-1.0, 0.0]).unwrap();
        assert_eq!(r.j[1], 0.0);
        assert_eq!(log_odds_statistic(&[0.5, 1.0], &[0.0, 1.0]), Err(Error::DegenerateProbability(1.0)));
        assert_eq!(log_odds_statistic(&[0.5], &[1.0]), Err(Error::MissingOrigin));
    }

    proptest! {
        #[test]
        fn response_is_bounded_odd_and_monotone(u in -1e4f64..1e4, v in -1e4f64..1e4, u0 in 1e-3f64..100.0) {
            let f = tanh_response(u, u0);
            prop_assert!(f.abs() <= u0);
            prop_assert_eq!(tanh_response(-u, u0), -f);
            if u < v {
                prop_assert!(tanh_response(u, u0) <= tanh_response(v, u0));
            }
        }
    }
}
