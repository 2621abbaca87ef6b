//! Compares "dog bites man", "man bites dog" and "man bitten by dog" under
//! AVG and DCT pooling with seeded random word vectors.
//!
//! `cargo run --example word_order -- [seed] [dim]`

use dctsent::probe::synthetic::synthetic_table;
use dctsent::{embed_tokens, tokenize, Encoder64, PoolingMethod};

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let dim: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);

    let sentences = ["dog bites man", "man bites dog", "man bitten by dog"];
    let table = synthetic_table(["dog", "bites", "man", "bitten", "by"], dim, seed);

    for method in [PoolingMethod::Avg, PoolingMethod::Dct { k: 1 }, PoolingMethod::Dct { k: 2 }] {
        let encoder = Encoder64::new(method, 16)?;
        let emb: Vec<Vec<f64>> = sentences
            .iter()
            .map(|s| Ok(encoder.encode(&embed_tokens::<f64>(&table, &tokenize(s))?)?.values))
            .collect::<Result<_, Box<dyn std::error::Error>>>()?;
        println!("{method}");
        println!("  d(dog bites man, man bites dog)     = {:.4}", distance(&emb[0], &emb[1]));
        println!("  d(man bitten by dog, man bites dog) = {:.4}", distance(&emb[2], &emb[1]));
        println!("  d(man bitten by dog, dog bites man) = {:.4}", distance(&emb[2], &emb[0]));
    }
    Ok(())
}
