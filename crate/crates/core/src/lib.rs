//! Regional knowledge-flow accounting.
//!
//! Publications are attributed to the region(s) they were produced in using
//! fractional author counting, citation links are turned into benefits and
//! gains between regions, and the resulting flow matrices feed the regional
//! balance of knowledge flows (RBKF) and the outflow/inflow specialization
//! indexes (KOSI/KISI).
//!
//! The pipeline is:
//!
//! 1. [`corpus`]: load publications, citations, gazetteer and subject-category map.
//! 2. [`attribution`]: fractional regional shares and the "made in" classification.
//! 3. [`flows`]: benefits, gains and flow matrices.
//! 4. [`balance`]: RBKF, maximum-flow edges, rank correlation.
//! 5. [`specialization`]: Balassa-based KOSI/KISI.
//!
//! [`synthkit`] generates synthetic corpora with planted structure and holds an
//! independent brute-force gain oracle.

pub mod attribution;
pub mod balance;
pub mod corpus;
pub mod error;
pub mod export;
pub mod flows;
pub mod specialization;
pub mod synthkit;
mod types;

pub use attribution::{
    attribute_corpus, classify_made_in, compute_shares, Classification, ExclusionReason, MadeIn,
    MadeInMap, RegionShares, Weight,
};
pub use balance::{
    max_flow_edges, rbkf_by_sc, rbkf_overall, rbkf_pairwise, spearman, EdgeStyle, MaxFlowEdge,
    MaxFlowReport, PairwiseEntry, RbkfEntry,
};
pub use corpus::{
    load_corpus, resolve_region, validate_corpus, Address, Author, CitationEdge, Corpus,
    CorpusPaths, Gazetteer, LoadOptions, Publication, Resolution, ScMap, ValidationReport,
};
pub use error::{Error, Result};
pub use flows::{
    citing_regions, compute_gains, compute_gains_parallel, flow_matrix, region_summary,
    row_percentages, sc_flow_matrices, DualGainWeight, FlowMatrix, Gain, RegionSummary,
};
pub use specialization::{
    balassa_ratio, field_extremes, spec_index, top_specializations, BalassaMode, BalassaRatio,
    GainScope, GainTensor, Orientation, SpecIndexValue,
};
pub use types::{PubId, Region, ScCode};
