use super::StatsError;

/// Observations with their midranks (1-based; ties share the mean rank).
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSample {
    pub observations: Vec<f64>,
    pub ranks: Vec<f64>,
    /// Sizes of tie groups with at least two members, ascending by value.
    pub tie_groups: Vec<usize>,
}

impl RankedSample {
    /// Σ (t³ − t) over tie groups.
    pub fn tie_sum(&self) -> f64 {
        self.tie_groups
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum()
    }
}

pub fn midranks(values: &[f64]) -> Result<RankedSample, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(bad));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut tie_groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        // -0.0 and 0.0 tie
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        if end - start > 1 {
            tie_groups.push(end - start);
        }
        start = end;
    }
    Ok(RankedSample {
        observations: values.to_vec(),
        ranks,
        tie_groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distinct_values() {
        let r = midranks(&[10.0, 30.0, 20.0]).unwrap();
        assert_eq!(r.ranks, vec![1.0, 3.0, 2.0]);
        assert!(r.tie_groups.is_empty());
    }

    #[test]
    fn tie_group_gets_mean_rank() {
        let r = midranks(&[1.0, 2.0, 2.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.ranks, vec![1.0, 3.0, 3.0, 3.0, 5.0]);
        assert_eq!(r.tie_groups, vec![3]);
        assert_eq!(r.tie_sum(), 24.0);
    }

    #[test]
    fn all_equal() {
        let r = midranks(&[4.0; 4]).unwrap();
        assert_eq!(r.ranks, vec![2.5; 4]);
        assert_eq!(r.tie_groups, vec![4]);
    }

    #[test]
    fn rejects_nan_and_empty() {
        assert_eq!(midranks(&[]).unwrap_err(), StatsError::Empty);
        assert!(matches!(midranks(&[1.0, f64::NAN]), Err(StatsError::NonFinite(_))));
    }

    proptest! {
        #[test]
        fn rank_sum_invariant(xs in proptest::collection::vec(0i32..10, 1..60)) {
            let v: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
            let r = midranks(&v).unwrap();
            let n = v.len() as f64;
            prop_assert!((r.ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
            for i in 0..v.len() {
                let below = v.iter().filter(|&&y| y < v[i]).count() as f64;
                let equal = v.iter().filter(|&&y| y == v[i]).count() as f64;
                prop_assert_eq!(r.ranks[i], below + (equal + 1.0) / 2.0);
            }
        }
    }
}
