//! Kernel-entropy diversity scores for conditional generative models.
//!
//! Given paired embeddings of generated samples `x_i` and their prompts `t_i`,
//! the Vendi score of the samples factors into a Conditional-Vendi part
//! (diversity the model adds on its own) and an Information-Vendi part
//! (diversity inherited from the prompts):
//!
//! ```
//! use vendi_core::{ingest::{pair, EmbeddingSet}, scores::score_report};
//!
//! let x = EmbeddingSet::from_rows(&[[0.0, 0.0], [0.0, 5.0], [5.0, 0.0], [5.0, 5.0]]).unwrap();
//! let t = EmbeddingSet::from_rows(&[[0.0], [0.0], [9.0], [9.0]]).unwrap();
//! let report = score_report(&pair(x, t, None).unwrap(), 1.0, 1.0, 1.0).unwrap();
//! assert!((report.conditional_vendi * report.information_vendi - report.vendi_x).abs() < 1e-9);
//! ```

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod decompose;
pub mod error;
pub mod ingest;
pub mod kernel;
pub mod oracle;
pub mod par;
pub mod scores;
pub mod spectrum;

pub use error::{Result, VendiError};
pub use ingest::{EmbeddingSet, PairedDataset};
pub use kernel::KernelMatrix;
pub use scores::{score_report, ScoreReport};
pub use spectrum::{EigenSpectrum, EntropyValue};
