//! PMI semantic orientation and mean-SO classification on the fixture posts.

use std::path::Path;

use robopinion::corpus::{Corpus, Document};
use robopinion::lexicon::{ContextMode, CooccurrenceTable, Lexicon, ParadigmSets};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let corpus = Corpus::load_dir(&root.join("corpus"))?;
    let paradigms = ParadigmSets::parse(&std::fs::read_to_string(root.join("paradigms.txt"))?)?;
    let table = CooccurrenceTable::build(corpus.docs(), ContextMode::Document)?;
    println!("N = {} contexts, smoothing k = {}", table.contexts(), table.smoothing());

    let lexicon = Lexicon::new(table, paradigms);
    for term in ["camera", "design", "heat", "bloat", "battery", "price"] {
        let so = lexicon.table.semantic_orientation(&lexicon.paradigms, term)?;
        println!("SO({term:>7}) = {:+8.3} bits", so.value);
    }

    // same statistic, tighter context
    let windowed = CooccurrenceTable::build(corpus.docs(), ContextMode::Window(4))?;
    let so = windowed.semantic_orientation(&lexicon.paradigms, "camera")?;
    println!("SO(camera) with 4-token windows = {:+.3}", so.value);

    for text in ["excellent camera and nice design", "bad heat, nasty bloat"] {
        let c = lexicon.classify_mean_so(&Document::plain("q", text), 0.0)?;
        println!("{text:?}: {:?} (mean SO {:+.3} over {} terms)", c.label, c.score, c.terms_used);
    }
    Ok(())
}
