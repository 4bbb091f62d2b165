//! Getting data in: text files, incompleteness masks and synthetic datasets.

mod io;
mod masking;
mod synth;

pub use io::{
    load_dataset, read_labels, read_mask, read_matrix, recode_labels, write_labels, write_mask,
    write_matrix, DatasetManifest, LabelMapping, ViewEntry,
};
pub use masking::generate_mask;
pub use synth::{synth_dataset, SynthSpec};
