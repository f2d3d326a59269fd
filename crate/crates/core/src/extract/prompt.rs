use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ExtractError;
use crate::ingest::{SnippetRecord, SourcedChunk};

pub const DEFAULT_SYSTEM_PROMPT: &str = "You are a supply chain analyst. From the numbered search results \
below, extract every business relationship between the target company and another company. \
Return only a JSON array. Each element must be an object with the keys \
\"partner_name\" (the other company's name as written), \
\"relation_type\" (one of \"supplier\", \"customer\", \"partner\", \"unknown\", \
relative to the target company), \
\"product\" (the exchanged product or service, or an empty string) and \
\"evidence\" (an array of the item numbers that support the relationship). \
Return [] if there are no relationships.";

/// Evidence handed to the backend in one call.
#[derive(Debug, Clone, Copy)]
pub enum EvidenceInput<'a> {
    Snippets(&'a [SnippetRecord]),
    Chunks(&'a [SourcedChunk]),
}

impl EvidenceInput<'_> {
    pub fn len(&self) -> usize {
        match self {
            EvidenceInput::Snippets(s) => s.len(),
            EvidenceInput::Chunks(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptItem {
    /// 1-based, consecutive.
    pub index: u32,
    pub title: Option<String>,
    pub body: String,
}

/// The record behind a prompt item, kept out of the rendered text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSource {
    pub evidence_id: String,
    pub source_url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionPrompt {
    pub system_text: String,
    pub target_id: String,
    pub target_name: String,
    pub items: Vec<PromptItem>,
    pub sources: Vec<EvidenceSource>,
}

impl ExtractionPrompt {
    pub fn source(&self, index: u32) -> Option<&EvidenceSource> {
        (index as usize).checked_sub(1).and_then(|i| self.sources.get(i))
    }

    /// The user message: target line followed by the numbered items.
    pub fn user_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Target company: {}", self.target_name);
        for item in &self.items {
            out.push('\n');
            match &item.title {
                Some(title) => {
                    let _ = writeln!(out, "[{}] Title: {}", item.index, title);
                    let _ = writeln!(out, "{}", item.body);
                }
                None => {
                    let _ = writeln!(out, "[{}] {}", item.index, item.body);
                }
            }
        }
        out
    }

    /// System and user text joined, as counted for token accounting.
    pub fn render(&self) -> String {
        format!("{}\n\n{}", self.system_text, self.user_text())
    }
}

/// Number the records in order. Titles are kept for snippets and omitted for chunks.
pub fn assemble_prompt(
    target_id: &str,
    target_name: &str,
    records: EvidenceInput<'_>,
    system_text: &str,
) -> Result<ExtractionPrompt, ExtractError> {
    if records.is_empty() {
        return Err(ExtractError::InvalidInput("no evidence records for prompt".into()));
    }
    let (items, sources) = match records {
        EvidenceInput::Snippets(snippets) => snippets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    PromptItem {
                        index: i as u32 + 1,
                        title: Some(s.title.clone()),
                        body: s.snippet_text.clone(),
                    },
                    EvidenceSource {
                        evidence_id: s.snippet_id.clone(),
                        source_url: s.source_url.clone(),
                    },
                )
            })
            .unzip(),
        EvidenceInput::Chunks(chunks) => chunks
            .iter()
            .enumerate()
            .map(|(i, c)| {
                (
                    PromptItem {
                        index: i as u32 + 1,
                        title: None,
                        body: c.chunk.text.clone(),
                    },
                    EvidenceSource {
                        evidence_id: c.chunk_id.clone(),
                        source_url: c.chunk.source_url.clone(),
                    },
                )
            })
            .unzip(),
    };
    Ok(ExtractionPrompt {
        system_text: system_text.to_string(),
        target_id: target_id.to_string(),
        target_name: target_name.to_string(),
        items,
        sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Chunk;

    pub(crate) fn snippet(id: &str, title: &str, text: &str, url: &str) -> SnippetRecord {
        SnippetRecord {
            snippet_id: id.into(),
            target_id: "T1".into(),
            query: "q".into(),
            retrieved_at: "2024-05-01T00:00:00Z".parse().unwrap(),
            title: title.into(),
            snippet_text: text.into(),
            source_url: url.into(),
            published_at: None,
            page: 1,
            rank: 1,
            position: 1,
        }
    }

    #[test]
    fn numbers_items_in_order() {
        let recs = vec![
            snippet("a", "t1", "x", "https://a.com"),
            snippet("b", "t2", "y", "https://b.com"),
            snippet("c", "t3", "z", "https://c.com"),
        ];
        let p = assemble_prompt("T1", "乙", EvidenceInput::Snippets(&recs), DEFAULT_SYSTEM_PROMPT).unwrap();
        assert_eq!(p.items.iter().map(|i| i.index).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(p.source(2).unwrap().evidence_id, "b");
        assert!(p.source(0).is_none());
        assert!(p.source(4).is_none());
        let text = p.render();
        assert!(text.contains("[1] Title: t1\nx\n"));
        assert!(text.contains("[3] Title: t3\nz\n"));
        let again = assemble_prompt("T1", "乙", EvidenceInput::Snippets(&recs), DEFAULT_SYSTEM_PROMPT).unwrap();
        assert_eq!(again.render(), text);
    }

    #[test]
    fn chunk_body_passes_through_without_title() {
        let chunk = SourcedChunk {
            chunk_id: "s#c000".into(),
            snippet_id: "s".into(),
            target_id: "T1".into(),
            query: "q".into(),
            position: 1,
            retrieved_at: "2024-05-01T00:00:00Z".parse().unwrap(),
            chunk: Chunk {
                source_url: "https://a.com".into(),
                chunk_index: 0,
                text: "甲 为 乙 供应 芯片".into(),
                char_span: (0, 11),
            },
        };
        let chunks = [chunk];
        let p = assemble_prompt("T1", "乙", EvidenceInput::Chunks(&chunks), DEFAULT_SYSTEM_PROMPT).unwrap();
        assert_eq!(p.items.len(), 1);
        assert_eq!(p.items[0].body, "甲 为 乙 供应 芯片");
        assert_eq!(p.items[0].title, None);
    }

    #[test]
    fn empty_records_rejected() {
        assert!(assemble_prompt("T", "x", EvidenceInput::Snippets(&[]), "s").is_err());
    }
}
