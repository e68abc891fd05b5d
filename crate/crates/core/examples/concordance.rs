//! Keyword-in-context listing over the fixture posts.
//!
//!     cargo run --example concordance -- price

use std::path::Path;

use robopinion::corpus::{concordance, concordance_tsv, normalize_inflection, Corpus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let term = std::env::args().nth(1).unwrap_or_else(|| "price".to_string());
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus");
    let corpus = Corpus::load_dir(&dir)?;
    println!("{} documents, {} distinct tokens", corpus.len(), corpus.vocabulary().len());

    for w in ["screens", "cameras", "drains", "boxes", "glass"] {
        println!("{w:>8} -> {}", normalize_inflection(w));
    }

    let lines = concordance(&term, corpus.docs())?;
    println!("\n{} hits for `{term}`", lines.len());
    print!("{}", concordance_tsv(&lines));
    Ok(())
}
