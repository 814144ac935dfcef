//! Product counts and timings for the stationary solve and a single
//! pseudo-inverse column across doubling graph sizes.
//!
//! cargo run --release --example bench_table

use dpinv::bench::{run_bench, trend, write_csv, BenchConfig};

fn main() -> dpinv::Result<()> {
    let cfg = BenchConfig { sizes: vec![1024, 2048, 4096, 8192], ..BenchConfig::default() };
    let (rows, _) = run_bench(&cfg)?;
    write_csv(&rows, std::io::stdout().lock())?;
    let t = trend(&rows);
    eprintln!("time growth per doubling: pi {:.2?}, column {:.2?}", t.time_pi_growth, t.time_col_growth);
    Ok(())
}
