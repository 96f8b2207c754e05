fn main() {
    let g = decomp_core::gen::random_graph(64, 128, 11, None).unwrap();
    let t0 = std::time::Instant::now();
    let d = decomp_core::delay::compute_delays(&g, 2, decomp_core::delay::DelayConfig::default()).unwrap();
    println!("default profile n=64: {:?} clustered={} bitfixes={}", t0.elapsed(), d.clustered_total(), d.bit_fixes);
    let c = decomp_core::delay::extract_clustering(&g, &d).unwrap();
    println!("clusters={} count={}", c.clustering.clusters().len(), c.clustering.clustered_count());
    let t0 = std::time::Instant::now();
    let g = decomp_core::gen::random_graph(256, 1024, 11, None).unwrap();
    let d = decomp_core::delay::compute_delays(&g, 2, decomp_core::delay::DelayConfig::fast()).unwrap();
    println!("fast profile n=256: {:?} clustered={}", t0.elapsed(), d.clustered_total());
}
