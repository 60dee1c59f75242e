//! Exact empirical risk minimization over a finite class.

use super::{ErmError, Sample};
use crate::risk::PointFn;

/// Index of the empirical logistic risk minimizer over `class` and its
/// empirical risk. Ties go to the lowest index.
pub fn erm_finite(class: &[PointFn], sample: &Sample) -> Result<(usize, f64), ErmError> {
    if class.is_empty() {
        return Err(ErmError::InvalidParameter("erm_finite needs a nonempty class".into()));
    }
    if sample.is_empty() {
        return Err(ErmError::InvalidParameter("erm_finite needs a nonempty sample".into()));
    }
    let mut best = (0, f64::INFINITY);
    for (i, f) in class.iter().enumerate() {
        let r = sample.empirical_risk(&|x| f(x));
        if r < best.1 {
            best = (i, r);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::erm::sample;
    use crate::risk::{target_function, DataDistribution};

    fn constant(c: f64) -> PointFn {
        Arc::new(move |_: &[f64]| c)
    }

    #[test]
    fn trivial_classes() {
        let p = DataDistribution::uniform(1, Arc::new(|_: &[f64]| 0.3));
        let s = sample(&p, 50, 0);
        assert_eq!(erm_finite(&[constant(0.7)], &s).unwrap().0, 0);
        assert_eq!(erm_finite(&[constant(0.7), constant(0.7)], &s).unwrap().0, 0);
        assert!(erm_finite(&[], &s).is_err());
    }

    #[test]
    fn picks_the_target_sign() {
        // Each seed gives f* unless more than half the 1000 labels are −1,
        // which for η = 0.9 has negligible probability.
        let p = DataDistribution::uniform(1, Arc::new(|_: &[f64]| 0.9));
        let fs = target_function(0.9);
        let class = [constant(fs), constant(-fs)];
        let hits = (0..200).filter(|&seed| erm_finite(&class, &sample(&p, 1000, seed)).unwrap().0 == 0).count();
        assert!(hits as f64 >= 0.99 * 200.0);
    }

    #[test]
    fn minimum_is_below_every_member() {
        let p = DataDistribution::uniform(1, Arc::new(|x: &[f64]| x[0]));
        let s = sample(&p, 400, 3);
        let class: Vec<PointFn> = (0..9).map(|k| Arc::new(move |x: &[f64]| (k as f64 - 4.0) * (x[0] - 0.5)) as PointFn).collect();
        let (i, r) = erm_finite(&class, &s).unwrap();
        assert!(class.iter().all(|f| r <= s.empirical_risk(&|x| f(x))));
        assert_eq!(r, s.empirical_risk(&|x| class[i](x)));
    }
}
