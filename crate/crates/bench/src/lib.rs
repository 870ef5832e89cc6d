//! Benchmark fixtures shared by the criterion targets.

use mmisq_core::{Generator, ModelSpec};

/// A `d`-state birth–death chain with alternating arrival rates.
pub fn birth_death_model(d: usize) -> ModelSpec {
    let mut rows = vec![vec![0.0; d]; d];
    for i in 0..d {
        if i + 1 < d {
            rows[i][i + 1] = 1.0 + i as f64 * 0.1;
            rows[i + 1][i] = 2.0;
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = -row.iter().sum::<f64>();
    }
    let g = Generator::from_rows(&rows).expect("birth-death chain is irreducible");
    let lambda = (0..d).map(|i| if i % 2 == 0 { 1.0 } else { 4.0 }).collect();
    ModelSpec::new(g, lambda, 1.0, 0.0).expect("valid model")
}
