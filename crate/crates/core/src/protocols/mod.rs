//! Discrimination protocols and their error probabilities.
//!
//! Every error here is the symmetric (equal-prior) error. A measurement
//! outcome is mapped to a hypothesis with whichever orientation gives the
//! smaller error.

pub mod adaptive;
pub mod helstrom;
pub mod qsp;
pub mod vote;

use alloc::vec::Vec;

use crate::qubit::PureState;
use crate::{Error, Result};

pub use adaptive::{adaptive_incoherent_error, adaptive_incoherent_error_exact};
pub use helstrom::{helstrom_error_noiseless, helstrom_error_noisy};
pub use qsp::{
    optimal_noiseless_error, qsp_error_mc, qsp_error_noiseless, qsp_unitary,
    simple_qsp_error_exact, simple_qsp_error_noisy,
};
pub use vote::{maj_error_small_delta, maj_protocol_error, majority_vote, transition_sigma};

/// An error probability with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolResult {
    pub error_prob: f64,
    pub std_error: f64,
    pub queries_used: usize,
}

impl ProtocolResult {
    pub fn exact(error_prob: f64, queries_used: usize) -> Self {
        ProtocolResult {
            error_prob,
            std_error: 0.0,
            queries_used,
        }
    }
}

/// QSP phases `φ₀ … φ_r` for an `r`-query segment.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAngleList(Vec<f64>);

impl PhaseAngleList {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidConfig("phase list needs at least one entry"));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("phases must be finite"));
        }
        Ok(PhaseAngleList(phases))
    }

    /// All-zero phases for `queries` channel calls.
    pub fn zeros(queries: usize) -> Self {
        PhaseAngleList(alloc::vec![0.0; queries + 1])
    }

    pub fn queries(&self) -> usize {
        self.0.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One coherent block: phases plus its preparation and measured projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub phases: PhaseAngleList,
    pub prep: PureState,
    pub meas: PureState,
}

impl Segment {
    pub fn queries(&self) -> usize {
        self.phases.queries()
    }
}

/// A sequence of coherent segments whose binary outcomes are majority-voted.
#[derive(Debug, Clone, PartialEq)]
pub struct QspProtocol {
    segments: Vec<Segment>,
}

impl QspProtocol {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyProtocol);
        }
        Ok(QspProtocol { segments })
    }

    pub fn single(segment: Segment) -> Self {
        QspProtocol {
            segments: alloc::vec![segment],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_queries(&self) -> usize {
        self.segments.iter().map(Segment::queries).sum()
    }

    /// Zero phases, |0⟩ in, measurement at the Helstrom angle for the
    /// accumulated rotation of `queries` calls.
    pub fn simple(rdg: &crate::RdgInstance, queries: usize) -> Self {
        QspProtocol::single(qsp::simple_segment(rdg, queries))
    }

    /// `queries` one-shot Helstrom measurements followed by a vote.
    pub fn incoherent(rdg: &crate::RdgInstance, queries: usize) -> Self {
        QspProtocol {
            segments: (0..queries).map(|_| qsp::simple_segment(rdg, 1)).collect(),
        }
    }

    /// `stages` simple segments of `coherence_length` queries each.
    pub fn hybrid(rdg: &crate::RdgInstance, coherence_length: usize, stages: usize) -> Self {
        QspProtocol {
            segments: (0..stages)
                .map(|_| qsp::simple_segment(rdg, coherence_length))
                .collect(),
        }
    }
}
