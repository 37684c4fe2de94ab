//! 16-bit reconstruction records: stability duration in the high byte, 8-bit
//! intensity in the low byte. Runs longer than 255 frames are split into
//! 255-frame words carrying the same intensity, remainder last.

use crate::error::{Error, Result};
use crate::reconstruct::SegmentEvent;
use crate::types::quantize;

pub const MAX_RECORD_DURATION: u64 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EncodedRecord {
    pub duration: u8,
    pub intensity: u8,
}

impl EncodedRecord {
    pub fn to_word(self) -> u16 {
        u16::from(self.duration) << 8 | u16::from(self.intensity)
    }

    pub fn from_word(word: u16) -> Result<Self> {
        let record = Self {
            duration: (word >> 8) as u8,
            intensity: word as u8,
        };
        if record.duration == 0 {
            return Err(Error::MalformedRecord(format!("word {word:#06x} has zero duration")));
        }
        Ok(record)
    }
}

/// Encodes one segment, splitting long durations.
pub fn encode(duration: u64, intensity: f64) -> Result<Vec<u16>> {
    let mut words = Vec::new();
    encode_into(duration, intensity, &mut words)?;
    Ok(words)
}

pub fn encode_into(duration: u64, intensity: f64, words: &mut Vec<u16>) -> Result<()> {
    if duration < 1 {
        return Err(Error::param("record duration must be at least 1 frame"));
    }
    if !(0.0..=255.0).contains(&intensity) {
        return Err(Error::param(format!("intensity {intensity} is outside [0, 255]")));
    }
    let level = quantize(intensity);
    let mut left = duration;
    while left > 0 {
        let d = left.min(MAX_RECORD_DURATION);
        words.push(
            EncodedRecord {
                duration: d as u8,
                intensity: level,
            }
            .to_word(),
        );
        left -= d;
    }
    Ok(())
}

/// Encodes a pixel's whole segment sequence.
pub fn encode_events(events: &[SegmentEvent]) -> Result<Vec<u16>> {
    let mut words = Vec::with_capacity(events.len());
    for e in events {
        encode_into(e.duration, e.intensity, &mut words)?;
    }
    Ok(words)
}

/// Expands words back to one 8-bit value per frame.
pub fn decode(words: &[u16]) -> Result<Vec<u8>> {
    let mut frames = Vec::new();
    for &w in words {
        let r = EncodedRecord::from_word(w)?;
        frames.extend(std::iter::repeat_n(r.intensity, r.duration as usize));
    }
    Ok(frames)
}
