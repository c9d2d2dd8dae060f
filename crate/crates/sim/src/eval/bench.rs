//! Timing and byte measurements over synthetic workloads.
//!
//! Every row is one repetition of one phase. `bytes` counts what the phase
//! put on the wire: index-build messages for `build`, the search messages
//! (token, partials, result) for `search`, both token messages for `token`,
//! a full round for `shuffle` and both update-token messages for `update`.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use brasp_core::crypto::ShareIndex;
use brasp_core::index::SpatioTextualObject;
use brasp_core::protocol::{token_generation, BooleanRangeQuery};
use brasp_core::spatial::{GridSpec, HilbertValue, SpatialRange};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::deployment::{Cadence, Deployment, Options};
use crate::error::{SimError, SimResult};
use crate::eval::stats::{linear_fit, LinearFit};
use crate::message::Phase;
use crate::transcript::Transcript;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Build,
    Search,
    Token,
    Shuffle,
    Update,
    All,
}

impl FromStr for Suite {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        Ok(match s {
            "build" => Suite::Build,
            "search" => Suite::Search,
            "token" => Suite::Token,
            "shuffle" => Suite::Shuffle,
            "update" => Suite::Update,
            "all" => Suite::All,
            _ => return Err(SimError::Input(format!("unknown suite {s:?}"))),
        })
    }
}

/// Parameter grids. Each suite sweeps one axis and holds the rest at the
/// base values `n`, `m` and `mq`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub order: u8,
    pub paillier_bits: u64,
    pub seed: u64,
    pub reps: usize,
    pub n_grid: Vec<usize>,
    pub m_grid: Vec<usize>,
    pub mq_grid: Vec<usize>,
    pub wo_grid: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub mq: usize,
}

impl Workload {
    /// Sized for a laptop, at the 1024-bit timing key size.
    pub fn desk() -> Self {
        Self {
            order: 3,
            paillier_bits: 1024,
            seed: 1,
            reps: 10,
            n_grid: vec![200, 400, 600, 800, 1000],
            m_grid: vec![100, 200, 300, 400, 500],
            mq_grid: vec![1, 2, 4, 8],
            wo_grid: vec![10, 20, 40],
            n: 200,
            m: 100,
            mq: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub phase: String,
    pub n: usize,
    pub m: usize,
    pub mq: usize,
    pub wo: usize,
    pub rep: usize,
    pub millis: f64,
    pub bytes: usize,
    pub paillier_bits: u64,
    pub seed: u64,
}

/// Prefix entries per index at grid order `order`: every prefix of a
/// `2 * order`-bit value except the all-wildcard one.
pub fn prefix_entries(order: u8) -> usize {
    (1usize << (2 * order as usize + 1)) - 2
}

fn keyword(j: usize) -> String {
    format!("w{j}")
}

/// `n` objects over a vocabulary of exactly `m` keywords, each used at
/// least once.
pub fn synthetic_db(n: usize, m: usize, order: u8, seed: u64) -> SimResult<Vec<SpatioTextualObject>> {
    if n == 0 || m == 0 {
        return Err(SimError::Input("empty workload".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let cells = 1u64 << (2 * order as u32);
    (0..n)
        .map(|i| {
            let mut words: Vec<String> = (i..m).step_by(n).map(keyword).collect();
            words.push(keyword(rng.gen_range(0..m)));
            let loc = HilbertValue(rng.gen_range(0..cells));
            Ok(SpatioTextualObject::new(i as u32, loc, words)?)
        })
        .collect()
}

/// A query with a fixed two-element cover and keywords `w0..w{mq-1}`.
pub fn fixed_query(mq: usize, order: u8) -> SimResult<BooleanRangeQuery> {
    let bits = 2 * order;
    let hi = (1u64 << bits) - 1;
    let range = SpatialRange::new(bits, vec![(hi / 3 - 4, hi / 3)])?;
    Ok(BooleanRangeQuery::new(range, (0..mq).map(keyword))?)
}

fn deployment(w: &Workload, n: usize, m: usize, cadence: Cadence) -> SimResult<Deployment> {
    let grid = GridSpec::unit(w.order)?;
    let opts = Options::new(grid, w.paillier_bits, w.seed).with_cadence(cadence);
    let mut d = Deployment::new(opts)?;
    d.ingest(synthetic_db(n, m, w.order, w.seed)?)?;
    Ok(d)
}

fn bytes_since(t: &Transcript, seq: usize, keep: impl Fn(&str, Phase) -> bool) -> usize {
    t.envelopes[seq..]
        .iter()
        .filter(|e| keep(&e.message, e.phase))
        .map(|e| e.size)
        .sum()
}

fn timed<T>(f: impl FnOnce() -> SimResult<T>) -> SimResult<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64() * 1e3))
}

struct Row<'a> {
    w: &'a Workload,
    phase: &'static str,
    n: usize,
    m: usize,
    mq: usize,
    wo: usize,
}

impl Row<'_> {
    fn record(&self, rep: usize, millis: f64, bytes: usize) -> BenchRecord {
        BenchRecord {
            phase: self.phase.into(),
            n: self.n,
            m: self.m,
            mq: self.mq,
            wo: self.wo,
            rep,
            millis,
            bytes,
            paillier_bits: self.w.paillier_bits,
            seed: self.w.seed,
        }
    }
}

/// Repetitions run round-robin over the grid, so a slow stretch of the
/// machine lands on every point instead of skewing one.
fn bench_build(w: &Workload, out: &mut Vec<BenchRecord>) -> SimResult<()> {
    let mut rows: Vec<Vec<BenchRecord>> = vec![Vec::new(); w.m_grid.len()];
    for rep in 0..w.reps {
        for (i, &m) in w.m_grid.iter().enumerate() {
            let row = Row { w, phase: "build", n: w.n, m, mq: 0, wo: 0 };
            let mut d = deployment(w, w.n, m, Cadence::Manual)?;
            let seq = d.transcript().len();
            let ((), ms) = timed(|| d.build())?;
            let bytes = bytes_since(d.transcript(), seq, |name, _| name == "index_build");
            rows[i].push(row.record(rep, ms, bytes));
        }
    }
    out.extend(rows.into_iter().flatten());
    Ok(())
}

fn bench_search(w: &Workload, out: &mut Vec<BenchRecord>) -> SimResult<()> {
    let q = fixed_query(w.mq, w.order)?;
    for &n in &w.n_grid {
        let row = Row { w, phase: "search", n, m: w.m, mq: w.mq, wo: 0 };
        let mut d = deployment(w, n, w.m, Cadence::AfterSearch)?;
        d.build()?;
        for rep in 0..w.reps {
            let seq = d.transcript().len();
            let (_, ms) = timed(|| d.search(&q))?;
            let bytes = bytes_since(d.transcript(), seq, |_, p| p == Phase::Search);
            out.push(row.record(rep, ms, bytes));
        }
    }
    Ok(())
}

fn bench_token(w: &Workload, out: &mut Vec<BenchRecord>) -> SimResult<()> {
    let mut d = deployment(w, w.n, w.m, Cadence::AfterSearch)?;
    d.build()?;
    for &mq in &w.mq_grid {
        let q = fixed_query(mq, w.order)?;
        let row = Row { w, phase: "token", n: w.n, m: w.m, mq, wo: 0 };
        for rep in 0..w.reps {
            let (keys, states) = match (d.client().keys(), d.client().states()) {
                (Some(k), Some(s)) => (k, s),
                _ => return Err(SimError::Order("client not ready".into())),
            };
            let group = &d.config().group;
            let (_, ms) = timed(|| Ok(token_generation(&q, keys, states, group)))?;
            let seq = d.transcript().len();
            d.search(&q)?;
            let bytes = bytes_since(d.transcript(), seq, |name, _| name == "token");
            out.push(row.record(rep, ms, bytes));
        }
    }
    Ok(())
}

fn bench_shuffle(w: &Workload, out: &mut Vec<BenchRecord>) -> SimResult<()> {
    for &n in &w.n_grid {
        let row = Row { w, phase: "shuffle", n, m: w.m, mq: 0, wo: 0 };
        let mut d = deployment(w, n, w.m, Cadence::Manual)?;
        d.build()?;
        for rep in 0..w.reps {
            let seq = d.transcript().len();
            let ((), ms) = timed(|| d.shuffle())?;
            let bytes = bytes_since(d.transcript(), seq, |_, p| p == Phase::Shuffle);
            out.push(row.record(rep, ms, bytes));
        }
    }
    Ok(())
}

fn bench_update(w: &Workload, out: &mut Vec<BenchRecord>) -> SimResult<()> {
    let cells = 1u64 << (2 * w.order as u32);
    for &wo in &w.wo_grid {
        let row = Row { w, phase: "update", n: w.n, m: w.m, mq: 0, wo };
        let mut d = deployment(w, w.n, w.m, Cadence::Manual)?;
        d.build()?;
        for rep in 0..w.reps {
            // existing keywords only, so every token has the same shape
            let words: Vec<String> = (0..wo).map(|j| keyword((rep + j) % w.m)).collect();
            if words.len() > w.m {
                return Err(SimError::Input(format!("w_o = {wo} exceeds m = {}", w.m)));
            }
            let loc = HilbertValue((rep as u64 * 7919) % cells);
            let seq = d.transcript().len();
            let (_, ms) = timed(|| d.insert(loc, &words))?;
            let bytes = bytes_since(d.transcript(), seq, |name, _| name == "update_tokens");
            out.push(row.record(rep, ms, bytes));
        }
    }
    Ok(())
}

pub fn bench(suite: Suite, w: &Workload) -> SimResult<Vec<BenchRecord>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Build {
        bench_build(w, &mut out)?;
    }
    if all || suite == Suite::Token {
        bench_token(w, &mut out)?;
    }
    if all || suite == Suite::Search {
        bench_search(w, &mut out)?;
    }
    if all || suite == Suite::Shuffle {
        bench_shuffle(w, &mut out)?;
    }
    if all || suite == Suite::Update {
        bench_update(w, &mut out)?;
    }
    Ok(out)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> SimResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    for r in records {
        csv.serialize(r).map_err(|e| SimError::Input(e.to_string()))?;
    }
    csv.flush()?;
    Ok(())
}

/// Mean milliseconds and bytes of `phase` rows, grouped by `key`.
pub fn means_by(records: &[BenchRecord], phase: &str, key: impl Fn(&BenchRecord) -> usize) -> BTreeMap<usize, (f64, f64)> {
    let mut acc: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.phase == phase) {
        let e = acc.entry(key(r)).or_default();
        e.0 += r.millis;
        e.1 += r.bytes as f64;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(k, (ms, b, c))| (k, (ms / c as f64, b / c as f64)))
        .collect()
}

/// Least-squares fit of mean build time against `m + p`.
pub fn build_fit(records: &[BenchRecord], order: u8) -> LinearFit {
    let p = prefix_entries(order);
    let means = means_by(records, "build", |r| r.m);
    let xs: Vec<f64> = means.keys().map(|m| (m + p) as f64).collect();
    let ys: Vec<f64> = means.values().map(|v| v.0).collect();
    linear_fit(&xs, &ys)
}

/// Entries the first server holds, for reconciling counts with bytes.
pub fn entry_count(d: &Deployment) -> Option<usize> {
    d.server(ShareIndex::One).indexes().map(|i| i.entry_count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_db_uses_the_whole_vocabulary() {
        for (n, m) in [(10, 4), (4, 10), (7, 7)] {
            let db = synthetic_db(n, m, 3, 5).unwrap();
            assert_eq!(db.len(), n);
            let used: std::collections::BTreeSet<_> =
                db.iter().flat_map(|o| o.keywords.iter().cloned()).collect();
            assert_eq!(used.len(), m);
        }
    }

    #[test]
    fn prefix_entries_at_order_three() {
        assert_eq!(prefix_entries(3), 126);
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("shuffle".parse::<Suite>().unwrap(), Suite::Shuffle);
        assert!("nope".parse::<Suite>().is_err());
    }
}
