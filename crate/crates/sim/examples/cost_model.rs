//! Reconcile message counts in the transcript with the closed-form costs:
//! `2(m + p)` build entries, `2(m_q + h)` token labels and `2(w_o + p_obj)`
//! update tokens.

use brasp_core::spatial::{min_prefix_cover, HilbertValue};
use brasp_sim::eval::bench::prefix_entries;
use brasp_sim::fixtures::{sample_grid, sample_objects, sample_query, SAMPLE_ORDER};
use brasp_sim::{Deployment, Options, Transcript};

fn count(t: &Transcript, from: usize, message: &str) -> usize {
    t.envelopes[from..]
        .iter()
        .filter(|e| e.message == message)
        .map(|e| e.count as usize)
        .sum()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut d = Deployment::new(Options::new(sample_grid(), 512, 12))?;
    let db = sample_objects()?;
    let m = db.iter().flat_map(|o| &o.keywords).collect::<std::collections::BTreeSet<_>>().len();
    d.ingest(db)?;
    let p = prefix_entries(SAMPLE_ORDER);

    let s = d.transcript().len();
    d.build()?;
    let entries = count(d.transcript(), s, "index_build");
    println!("build: {entries} entries = 2({m} + {p})");
    assert_eq!(entries, 2 * (m + p));

    let q = sample_query()?;
    let h = min_prefix_cover(&q.range).indexable().elements.len();
    let s = d.transcript().len();
    d.search(&q)?;
    let labels = count(d.transcript(), s, "token");
    println!("token: {labels} labels = 2({} + {h})", q.keywords.len());
    assert_eq!(labels, 2 * (q.keywords.len() + h));

    let s = d.transcript().len();
    d.insert(HilbertValue(9), ["w1", "w2", "w3"])?;
    let tokens = count(d.transcript(), s, "update_tokens");
    let p_obj = 2 * SAMPLE_ORDER as usize;
    println!("update: {tokens} tokens = 2(3 + {p_obj})");
    assert_eq!(tokens, 2 * (3 + p_obj));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
