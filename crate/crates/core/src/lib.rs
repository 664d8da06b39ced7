pub mod cli;
pub mod formula;
pub mod lexicon;
pub mod normalizer;
pub mod splitter;
pub mod tableset;
