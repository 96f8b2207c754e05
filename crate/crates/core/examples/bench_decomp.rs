use decomp_core::densify::{decompose, verify_decomposition, DecomposeConfig};

fn main() {
    for seed in [100u64, 101, 102] {
        let g = decomp_core::gen::random_graph(256, 1024, seed, None).unwrap();
        let t0 = std::time::Instant::now();
        match decompose(&g, DecomposeConfig::default()) {
            Ok(d) => {
                let r = verify_decomposition(&g, &d).unwrap();
                println!(
                    "seed {seed}: {:?} colors={} pass={} diam={:?}",
                    t0.elapsed(),
                    d.colors(),
                    r.pass,
                    r.diameters.iter().map(|&(a, _)| a).max()
                );
            }
            Err(e) => println!("seed {seed}: ERROR {e}"),
        }
    }
}
