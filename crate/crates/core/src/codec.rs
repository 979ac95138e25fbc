//! Genie codec model.
//!
//! A block is treated as correctly decoded when hard-slicing its first `L_i`
//! symbols produces at most `t_c` bit errors; the decoder then returns the
//! transmitted block exactly. Otherwise it declines and the block is passed
//! through untouched. Blocks of inactive users never decode.

use crate::model::{demodulate, Correction, FrameInstance, Modulation};
use crate::C64;

/// What the genie compares against: the transmitted payload of one user.
#[derive(Debug, Clone, Copy)]
pub struct TruthBlock<'a> {
    pub bits: &'a [bool],
    /// Message length in symbols.
    pub len: usize,
    /// Transmitted `d`-symbol block (payload plus zero padding).
    pub symbols: &'a [C64],
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecodeOutcome {
    /// Decoding succeeded; carries the re-encoded block.
    Certified(Vec<C64>),
    /// Decoding failed; carries the number of bit errors seen.
    Passthrough { bit_errors: Option<usize> },
}

impl DecodeOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, DecodeOutcome::Certified(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecSpec {
    pub correction: Correction,
    pub modulation: Modulation,
}

impl CodecSpec {
    pub fn new(correction: Correction, modulation: Modulation) -> Self {
        Self {
            correction,
            modulation,
        }
    }

    /// Decodes one estimated block.
    pub fn decode(&self, estimate: &[C64], truth: Option<TruthBlock<'_>>) -> DecodeOutcome {
        let Some(truth) = truth else {
            return DecodeOutcome::Passthrough { bit_errors: None };
        };
        if self.correction == Correction::Never {
            return DecodeOutcome::Passthrough { bit_errors: None };
        }
        let errors = count_bit_errors(&estimate[..truth.len], truth.bits, self.modulation);
        if self.correction.accepts(errors) {
            DecodeOutcome::Certified(truth.symbols.to_vec())
        } else {
            DecodeOutcome::Passthrough {
                bit_errors: Some(errors),
            }
        }
    }
}

/// Bit errors of hard-sliced `symbols` against `bits`.
pub fn count_bit_errors(symbols: &[C64], bits: &[bool], modulation: Modulation) -> usize {
    let sliced = demodulate(symbols, modulation);
    debug_assert_eq!(sliced.len(), bits.len());
    sliced.iter().zip(bits).filter(|(a, b)| a != b).count()
}

/// A codec bound to the ground truth of one frame.
#[derive(Debug, Clone, Copy)]
pub struct Genie<'a> {
    pub spec: CodecSpec,
    pub frame: &'a FrameInstance,
}

impl<'a> Genie<'a> {
    pub fn new(spec: CodecSpec, frame: &'a FrameInstance) -> Self {
        Self { spec, frame }
    }

    pub fn truth(&self, j: usize) -> Option<TruthBlock<'a>> {
        self.frame.user(j).map(|u| TruthBlock {
            bits: &u.bits,
            len: u.len,
            symbols: self.frame.block(j),
        })
    }

    pub fn decode(&self, j: usize, estimate: &[C64]) -> DecodeOutcome {
        self.spec.decode(estimate, self.truth(j))
    }
}
