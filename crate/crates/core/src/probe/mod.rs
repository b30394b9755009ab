//! Empirical probe: can finite rings approximate `R` at all? Every search
//! here covers a finite slice of rings and embeddings, so the results are
//! evidence only.

mod report;
mod rings;
mod search;

pub use report::{probe_report, ProbeReport, ProbeRow, REPORT_HEADER};
pub use rings::{build_ring, enumerate_rings, irreducible, FiniteRing, RingFamily, RingSpec, MAX_RING_ORDER};
pub use search::{
    balanced_embedding, best_embedding_error, embedding_errors, is_grid, EmbeddingResult, ImageGrid, SearchConfig,
};
