use super::gamma::chi_square_sf;
use super::ranks::midranks;
use super::StatsError;

/// Group size below which the chi-square approximation is flagged as rough.
pub const SMALL_GROUP: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct KwResult {
    /// Tie-corrected H statistic.
    pub h: f64,
    pub df: usize,
    pub p: f64,
    /// C = 1 − Σ(t³ − t)/(N³ − N). Zero only when every observation is tied,
    /// in which case H is defined as 0 and p as 1.
    pub tie_correction: f64,
    pub group_sizes: Vec<usize>,
}

impl KwResult {
    pub fn has_small_group(&self) -> bool {
        self.group_sizes.iter().any(|&n| n < SMALL_GROUP)
    }

    pub fn total(&self) -> usize {
        self.group_sizes.iter().sum()
    }
}

/// Kruskal-Wallis H test with tie correction and a chi-square p-value on k − 1
/// degrees of freedom.
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<KwResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    if let Some(i) = groups.iter().position(|g| g.as_ref().is_empty()) {
        return Err(StatsError::EmptyGroup(i));
    }
    let group_sizes: Vec<usize> = groups.iter().map(|g| g.as_ref().len()).collect();
    let total: usize = group_sizes.iter().sum();
    if total < 3 {
        return Err(StatsError::TooFewObservations(total));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    let ranked = midranks(&pooled)?;

    let n = total as f64;
    let mut offset = 0;
    let mut weighted = 0.0;
    for &size in &group_sizes {
        let rank_sum: f64 = ranked.ranks[offset..offset + size].iter().sum();
        weighted += rank_sum * rank_sum / size as f64;
        offset += size;
    }
    let uncorrected = 12.0 / (n * (n + 1.0)) * weighted - 3.0 * (n + 1.0);
    let tie_correction = 1.0 - ranked.tie_sum() / (n * n * n - n);
    let df = groups.len() - 1;

    if tie_correction <= 0.0 {
        return Ok(KwResult {
            h: 0.0,
            df,
            p: 1.0,
            tie_correction: 0.0,
            group_sizes,
        });
    }
    let h = (uncorrected / tie_correction).max(0.0);
    Ok(KwResult {
        h,
        df,
        p: chi_square_sf(h, df)?,
        tie_correction,
        group_sizes,
    })
}
