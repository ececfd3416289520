use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceStats {
    pub median: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

/// Median (midpoint for even counts), mean and population standard deviation.
pub fn distance_stats(d: &[f64]) -> Result<DistanceStats> {
    if d.is_empty() {
        return Err(Error::InvalidArgument(
            "distance_stats needs at least one value".into(),
        ));
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("distances".into()));
    }
    let mut s = d.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    let mean = s.iter().sum::<f64>() / n as f64;
    let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    Ok(DistanceStats {
        median,
        mean,
        std: var.sqrt(),
        count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let s = distance_stats(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.median, s.mean, s.count), (2.0, 2.0, 3));
        assert!((s.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.std - 0.816497).abs() < 1e-6);
        let s = distance_stats(&[5.0]).unwrap();
        assert_eq!((s.median, s.mean, s.std), (5.0, 5.0, 0.0));
        assert_eq!(distance_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap().median, 2.5);
        assert!(distance_stats(&[]).is_err());
    }
}
