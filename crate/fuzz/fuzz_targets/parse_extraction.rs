#![no_main]

use libfuzzer_sys::fuzz_target;
use sckg_core::extract::{parse_extraction, EvidenceSource, ExtractionPrompt, PromptItem, SynonymMap};

fuzz_target!(|data: &str| {
    let prompt = ExtractionPrompt {
        system_text: String::new(),
        target_id: "T1".into(),
        target_name: "华光电子".into(),
        items: (1..=3)
            .map(|i| PromptItem {
                index: i,
                title: None,
                body: format!("item {i}"),
            })
            .collect(),
        sources: (1..=3)
            .map(|i| EvidenceSource {
                evidence_id: format!("T1-q1-{i:03}"),
                source_url: format!("https://s{i}.example.com/"),
            })
            .collect(),
    };
    let out = parse_extraction(data, &prompt, &SynonymMap::default());
    for rel in &out.relations {
        assert!(!rel.partner_name.trim().is_empty());
        assert!(!rel.evidence_refs.is_empty());
    }
});
