use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Separation {
    /// Cut point; `±∞` when one class is put entirely on one side.
    pub threshold: f64,
    /// Fraction of pooled points on the wrong side.
    pub error: f64,
    /// True when `same` is classified above the threshold.
    pub flipped: bool,
}

/// Best single-threshold classifier between two statistic samples.
///
/// Candidate thresholds are `−∞`, the midpoints between consecutive
/// distinct pooled values, and `+∞`; both orientations are tried. Ties go
/// to the smaller threshold, then to the unflipped orientation.
pub fn separation_error(z_same: &[f64], z_far: &[f64]) -> Result<Separation, HarnessError> {
    if z_same.is_empty() || z_far.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let mut pooled: Vec<(f64, bool)> = z_same
        .iter()
        .map(|&z| (z, true))
        .chain(z_far.iter().map(|&z| (z, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = pooled.len() as f64;
    let n_same = z_same.len();

    // At threshold −∞ everything is "above".
    let mut same_below = 0usize;
    let mut far_below = 0usize;
    let score = |same_below: usize, far_below: usize| {
        let straight = (n_same - same_below) + far_below;
        let flipped = same_below + (z_far.len() - far_below);
        (straight, flipped)
    };
    let (s, f) = score(0, 0);
    let mut best = if s <= f {
        (s, f64::NEG_INFINITY, false)
    } else {
        (f, f64::NEG_INFINITY, true)
    };

    let mut k = 0;
    while k < pooled.len() {
        let v = pooled[k].0;
        while k < pooled.len() && pooled[k].0 == v {
            if pooled[k].1 {
                same_below += 1;
            } else {
                far_below += 1;
            }
            k += 1;
        }
        let threshold = if k < pooled.len() {
            0.5 * (v + pooled[k].0)
        } else {
            f64::INFINITY
        };
        let (s, f) = score(same_below, far_below);
        if s < best.0 {
            best = (s, threshold, false);
        }
        if f < best.0 {
            best = (f, threshold, true);
        }
    }
    Ok(Separation {
        threshold: best.1,
        error: best.0 as f64 / total,
        flipped: best.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = separation_error(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!((s.threshold, s.error, s.flipped), (2.5, 0.0, false));

        let s = separation_error(&[1.0, 2.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.error, 0.5);

        let s = separation_error(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(s.error, 0.25);
        assert_eq!(s.threshold, 1.5);
    }

    #[test]
    fn flipped_orientation() {
        let s = separation_error(&[5.0, 6.0], &[1.0, 2.0]).unwrap();
        assert_eq!((s.threshold, s.error, s.flipped), (3.5, 0.0, true));
    }

    #[test]
    fn constant_statistics() {
        let s = separation_error(&[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!(s.error, 0.5);
        assert_eq!(s.threshold, f64::NEG_INFINITY);
    }

    #[test]
    fn empty_input() {
        assert!(matches!(
            separation_error(&[], &[1.0]),
            Err(HarnessError::EmptyInput)
        ));
        assert!(matches!(
            separation_error(&[1.0], &[]),
            Err(HarnessError::EmptyInput)
        ));
    }

    /// Direct evaluation of a threshold classifier, for cross-checking.
    fn misclassified(same: &[f64], far: &[f64], t: f64, flipped: bool) -> usize {
        let wrong_same = same.iter().filter(|&&z| (z > t) != flipped).count();
        let wrong_far = far.iter().filter(|&&z| (z <= t) != flipped).count();
        wrong_same + wrong_far
    }

    #[test]
    fn matches_brute_force_on_small_grids() {
        // All splits of values {0..5} with multiplicity into two classes of 3.
        let values = [0.0, 1.0, 1.0, 2.0, 3.0, 3.0];
        for mask in 0u32..64 {
            if mask.count_ones() != 3 {
                continue;
            }
            let same: Vec<f64> = (0..6)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| values[b])
                .collect();
            let far: Vec<f64> = (0..6)
                .filter(|b| mask >> b & 1 == 0)
                .map(|b| values[b])
                .collect();
            let got = separation_error(&same, &far).unwrap();
            let mut best = usize::MAX;
            for t in [-1.0, 0.5, 1.5, 2.5, 3.5] {
                for flip in [false, true] {
                    best = best.min(misclassified(&same, &far, t, flip));
                }
            }
            assert_eq!(got.error, best as f64 / 6.0, "{same:?} {far:?}");
            assert_eq!(misclassified(&same, &far, got.threshold, got.flipped), best);
        }
    }
}
