//! Support code for the `randmix` command-line tool.

pub mod model_doc;

pub use model_doc::ModelDocument;
