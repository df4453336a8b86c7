//! Regenerates the CSV fixtures in `fixtures/`:
//!
//! * `etf3.csv`: identity design with the rotated equiangular tight frame of
//!   three tasks as targets (`ŷ₁ ≈ (0.98, 0, 0.2)` and its 120° rotations).
//! * `three_task.csv`: 200 rows, six Gaussian features, three noisy targets
//!   with the same pairwise-negative geometry.
//!
//! Usage: `cargo run -p linmtl-cli --example gen_fixtures [DIR]`

use std::path::PathBuf;

use linmtl_cli::export::{fmt_f64, indexed_names, write_csv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const ANGLES_DEG: [f64; 3] = [0.0, 240.0, 120.0];
const RADIUS: f64 = 0.98;
const HEIGHT: f64 = 0.2;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir).expect("create fixture dir");

    let mut header = indexed_names("x", 3);
    header.extend(indexed_names("y", 3));
    let rows: Vec<Vec<String>> = (0..3)
        .map(|r| {
            let x = (0..3).map(|c| if r == c { 1.0 } else { 0.0 });
            let y = ANGLES_DEG.iter().map(|deg| {
                let th = deg.to_radians();
                [RADIUS * th.cos(), RADIUS * th.sin(), HEIGHT][r]
            });
            x.chain(y).map(fmt_f64).collect()
        })
        .collect();
    write_csv(&dir.join("etf3.csv"), &header, &rows).expect("write etf3.csv");

    let (n, p, noise) = (200, 6, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut header = indexed_names("x", p);
    header.extend(indexed_names("y", 3));
    let rows: Vec<Vec<String>> = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
            let y: Vec<f64> = ANGLES_DEG
                .iter()
                .map(|deg| {
                    let th = deg.to_radians();
                    RADIUS * (th.cos() * x[0] + th.sin() * x[1]) + HEIGHT * x[2] + 0.05 * x[3]
                })
                .collect();
            let y = y.into_iter().map(|s| s + noise * rng.sample::<f64, _>(StandardNormal));
            x.iter().copied().chain(y).map(fmt_f64).collect()
        })
        .collect();
    write_csv(&dir.join("three_task.csv"), &header, &rows).expect("write three_task.csv");
    println!("fixtures written to {}", dir.display());
}
