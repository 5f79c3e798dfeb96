//! Normal algorithms over `|-/*ab`: interpreter, numbering, dovetailing.

mod dovetail;
mod numbering;
mod run;
mod scheme;

pub use dovetail::{dovetail, self_application, Dovetailer, HaltEvent, InputRule, DEFAULT_MAX_FUEL};
pub use numbering::{canonical_rank, canonical_unrank, Numbering, NUMBERING_VERSION};
pub use run::{run_machine, Outcome, Run};
pub use scheme::{constant_machine, Rule, Scheme};
