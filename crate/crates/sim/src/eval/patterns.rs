use std::collections::BTreeSet;

use brasp_core::protocol::BooleanRangeQuery;
use serde::{Deserialize, Serialize};

/// Access pattern `alpha` (query x object) and search pattern `sigma`
/// (query x query) of a query history.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternMatrix {
    pub alpha: Vec<Vec<u8>>,
    pub sigma: Vec<Vec<u8>>,
}

impl PatternMatrix {
    pub fn is_consistent(&self) -> bool {
        let t = self.sigma.len();
        self.alpha.len() == t
            && (0..t).all(|i| {
                self.sigma[i].len() == t
                    && self.sigma[i][i] == 1
                    && (0..t).all(|j| self.sigma[i][j] == self.sigma[j][i])
            })
    }
}

/// Rows of `alpha` come from `oracle`; `sigma[i][j]` is 1 when the two
/// queries are the same query.
pub fn pattern_matrices<F>(history: &[BooleanRangeQuery], n: usize, oracle: F) -> PatternMatrix
where
    F: Fn(&BooleanRangeQuery) -> BTreeSet<u32>,
{
    let alpha = history
        .iter()
        .map(|q| {
            let hits = oracle(q);
            (0..n).map(|j| u8::from(hits.contains(&(j as u32)))).collect()
        })
        .collect();
    let sigma = history
        .iter()
        .map(|a| history.iter().map(|b| u8::from(a == b)).collect())
        .collect();
    PatternMatrix { alpha, sigma }
}
