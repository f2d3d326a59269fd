use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::IngestError;

/// A window of a fetched document. `char_span` is a half-open range of
/// character (Unicode scalar) offsets into the parent text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub source_url: String,
    pub chunk_index: u32,
    pub text: String,
    pub char_span: (usize, usize),
}

/// A chunk together with the search result it was fetched for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcedChunk {
    pub chunk_id: String,
    pub snippet_id: String,
    pub target_id: String,
    pub query: String,
    pub position: u32,
    pub retrieved_at: DateTime<Utc>,
    pub chunk: Chunk,
}

impl SourcedChunk {
    pub fn chunk_id_for(snippet_id: &str, index: u32) -> String {
        format!("{snippet_id}#c{index:03}")
    }
}

/// Split `text` into windows of at most `chunk_chars` characters, each
/// starting `chunk_chars - overlap_chars` after the previous one.
pub fn chunk_document(
    source_url: &str,
    text: &str,
    chunk_chars: usize,
    overlap_chars: usize,
) -> Result<Vec<Chunk>, IngestError> {
    if chunk_chars == 0 || overlap_chars >= chunk_chars {
        return Err(IngestError::InvalidInput(format!(
            "need 0 <= overlap ({overlap_chars}) < chunk size ({chunk_chars})"
        )));
    }
    let offsets: Vec<usize> = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len())).collect();
    let len = offsets.len() - 1;
    let stride = chunk_chars - overlap_chars;
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + chunk_chars).min(len);
        chunks.push(Chunk {
            source_url: source_url.to_string(),
            chunk_index: chunks.len() as u32,
            text: text[offsets[start]..offsets[end]].to_string(),
            char_span: (start, end),
        });
        if end == len {
            break;
        }
        start += stride;
    }
    Ok(chunks)
}

/// Concatenate chunks of one document with the overlapping prefixes removed.
pub fn reconstruct(chunks: &[Chunk]) -> String {
    let mut out = String::new();
    let mut covered = 0usize;
    for chunk in chunks {
        let (start, _) = chunk.char_span;
        let skip = covered.saturating_sub(start);
        out.extend(chunk.text.chars().skip(skip));
        covered = covered.max(chunk.char_span.1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spans(chunks: &[Chunk]) -> Vec<(usize, usize)> {
        chunks.iter().map(|c| c.char_span).collect()
    }

    #[test]
    fn single_chunk() {
        let c = chunk_document("u", "0123456789", 10, 0).unwrap();
        assert_eq!(spans(&c), vec![(0, 10)]);
    }

    #[test]
    fn stride_eight_windows() {
        let text: String = "abcdefghijklmnopqrstuvwxy".into();
        assert_eq!(text.chars().count(), 25);
        let c = chunk_document("u", &text, 10, 2).unwrap();
        assert_eq!(spans(&c), vec![(0, 10), (8, 18), (16, 25)]);
        assert_eq!(c[1].text, "ijklmnopqr");
        assert_eq!(c[2].chunk_index, 2);
    }

    #[test]
    fn empty_text_gives_no_chunks() {
        assert!(chunk_document("u", "", 10, 2).unwrap().is_empty());
    }

    #[test]
    fn bad_overlap_rejected() {
        assert!(chunk_document("u", "abc", 10, 10).is_err());
        assert!(chunk_document("u", "abc", 0, 0).is_err());
    }

    #[test]
    fn multibyte_offsets_are_characters() {
        let c = chunk_document("u", "华为为比亚迪供应电池", 4, 1).unwrap();
        assert_eq!(c[0].text, "华为为比");
        assert_eq!(c[1].text, "比亚迪供");
        assert_eq!(reconstruct(&c), "华为为比亚迪供应电池");
    }

    proptest! {
        #[test]
        fn reconstruction_round_trips(text in "\\PC{0,200}", chunk in 1usize..40, overlap_frac in 0.0f64..1.0) {
            let overlap = ((chunk as f64) * overlap_frac) as usize;
            let overlap = overlap.min(chunk - 1);
            let chunks = chunk_document("u", &text, chunk, overlap).unwrap();
            prop_assert_eq!(reconstruct(&chunks), text.clone());
            for w in chunks.windows(2) {
                prop_assert_eq!(w[0].char_span.1 - w[1].char_span.0, overlap);
            }
            for c in &chunks {
                prop_assert!(c.text.chars().count() <= chunk);
            }
        }
    }
}
