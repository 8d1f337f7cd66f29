//! Distribution of the exact worst unique-neighbor count per set size over
//! uniformly sampled (d,d)-biregular graphs.
//!
//! usage: gadget_census [n] [d] [samples] [max_t]

use std::collections::BTreeMap;

use forge_core::gadget::sample_biregular;
use forge_core::verify::expansion::{expansion_audit, AuditOptions, Threshold};
use forge_core::{seeds, Side};

fn arg(i: usize, default: usize) -> usize {
    std::env::args().nth(i).map_or(default, |s| s.parse().expect("numeric argument"))
}

fn main() {
    let (n, d, samples, max_t) = (arg(1, 24), arg(2, 6), arg(3, 200), arg(4, 4));
    let opts = AuditOptions::default();
    let mut census: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for i in 0..samples {
        let mut rng = seeds::stage_rng(0, "census", i as u64);
        let g = sample_biregular(n, n, d, d, &mut rng, 10_000_000).expect("sampler budget");
        let reports: Vec<_> = [Side::Left, Side::Right]
            .into_iter()
            .map(|side| expansion_audit(&g, side, max_t, Threshold::UniqueNeighborCount { min: 0 }, &opts))
            .collect();
        let key = (2..=max_t)
            .map(|t| reports.iter().map(|r| r.sizes[t - 1].worst_value).min().unwrap())
            .collect();
        *census.entry(key).or_default() += 1;
    }
    println!("worst UN for t = 2..={max_t} (min over sides) -> graphs");
    for (k, c) in census {
        println!("{k:?} {c}");
    }
}
