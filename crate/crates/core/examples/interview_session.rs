//! A scripted interview with worded answers oriented through the lexicon,
//! written to the session format and read back.

use std::path::Path;

use robopinion::corpus::Corpus;
use robopinion::interview::{
    parse_session, plum_level, run_session, write_session, ConceptSpec, ScriptedAnswers, SessionConfig,
};
use robopinion::lexicon::{ContextMode, CooccurrenceTable, Lexicon, ParadigmSets};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let read = |p: &str| std::fs::read_to_string(root.join(p));

    let spec = ConceptSpec::parse(&read("concept.txt")?)?;
    let corpus = Corpus::load_dir(&root.join("corpus"))?;
    let table = CooccurrenceTable::build(corpus.docs(), ContextMode::Document)?;
    let lexicon = Lexicon::new(table, ParadigmSets::parse(&read("paradigms.txt")?)?);

    let mut script = ScriptedAnswers::parse(&read("scripts/worded.txt")?);
    let record = run_session(&spec, &mut script, Some(&lexicon), &SessionConfig::default())?;

    for (entry, resp) in record.transcript.iter().skip(1).zip(&record.responses) {
        let plum = plum_level(resp.value())?;
        println!("{:<40} -> {} ({}, {:?})", entry.answer, resp.level, plum.as_str(), resp.source);
    }
    if !record.flagged().is_empty() {
        println!("unanswered: {:?}", record.flagged());
    }

    let text = write_session(&record);
    println!("\n{text}");
    assert_eq!(parse_session(&text)?, record.to_file());
    Ok(())
}
