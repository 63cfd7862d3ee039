//! Deterministic fixtures shared by the criterion benches.

use hyperseg_core::cloud::{synth_blobs, PointCloud};
use hyperseg_core::SegmentationConfig;

/// Cloud sizes of the runtime comparison.
pub const SIZES: [usize; 4] = [400, 1400, 2400, 3400];

/// `n` points split evenly over `k` unit-spread blobs 20 spreads apart.
pub fn blob_fixture(n: usize, k: usize, seed: u64) -> PointCloud {
    let per = n.div_ceil(k);
    let cloud = synth_blobs(k, per, 20.0, 1.0, seed).expect("valid fixture parameters");
    if cloud.len() == n {
        cloud
    } else {
        let keep: Vec<usize> = (0..n).collect();
        cloud.select(&keep).expect("indices in range")
    }
}

/// Default configuration used by every bench.
pub fn bench_config(k: usize) -> SegmentationConfig {
    SegmentationConfig::new(k).with_seed(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_has_requested_size() {
        for n in [10, 401, 1400] {
            let c = blob_fixture(n, 3, 0);
            assert_eq!(c.len(), n);
            assert_eq!(c.labels().unwrap().len(), n);
        }
    }
}
