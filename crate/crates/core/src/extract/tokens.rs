/// Counts prompt tokens for cost accounting.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> u64;
}

/// One token per CJK character plus `ceil(weight × words)` for the
/// whitespace-separated words left after removing CJK characters.
/// The weight is held in tenths so the ceiling is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicTokenCounter {
    pub word_weight_tenths: u64,
}

impl Default for HeuristicTokenCounter {
    fn default() -> Self {
        Self { word_weight_tenths: 13 }
    }
}

impl TokenCounter for HeuristicTokenCounter {
    fn count(&self, text: &str) -> u64 {
        let mut cjk = 0u64;
        let mut words = 0u64;
        let mut in_word = false;
        for c in text.chars() {
            if is_cjk(c) {
                cjk += 1;
                in_word = false;
            } else if c.is_whitespace() {
                in_word = false;
            } else if !in_word {
                words += 1;
                in_word = true;
            }
        }
        cjk + (words * self.word_weight_tenths).div_ceil(10)
    }
}

pub fn count_tokens(text: &str) -> u64 {
    HeuristicTokenCounter::default().count(text)
}

/// CJK ideographs, kana, hangul, CJK punctuation and full-width forms.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F
        | 0x3040..=0x30FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xAC00..=0xD7AF
        | 0xF900..=0xFAFF
        | 0xFF00..=0xFFEF
        | 0x20000..=0x2FA1F)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_is_zero() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("   \n"), 0);
    }

    #[test]
    fn three_latin_words() {
        // ceil(1.3 * 3) = ceil(3.9) = 4
        assert_eq!(count_tokens("a b c"), 4);
    }

    #[test]
    fn exact_ceiling_at_multiples_of_ten() {
        // 1.3 * 10 = 13 exactly; floating point would give 13.000000000000002
        assert_eq!(count_tokens(&["w"; 10].join(" ")), 13);
    }

    #[test]
    fn cjk_counts_per_character() {
        assert_eq!(count_tokens("华为"), 2);
        // 2 CJK + the word "abc" -> 2 + ceil(1.3) = 4
        assert_eq!(count_tokens("华为abc"), 4);
        // CJK splits latin runs: "a", "b" -> 1 + ceil(2.6) = 4
        assert_eq!(count_tokens("a中b"), 4);
    }

    #[test]
    fn published_tokens_per_relation_arithmetic() {
        assert_eq!((1_945_550f64 / 3_488f64).round(), 558.0);
    }

    proptest! {
        #[test]
        fn monotone_under_append(a in "\\PC{0,60}", b in "\\PC{0,60}") {
            let joined = format!("{a}{b}");
            prop_assert!(count_tokens(&joined) >= count_tokens(&a));
        }

        #[test]
        fn deterministic(a in "\\PC{0,60}") {
            prop_assert_eq!(count_tokens(&a), count_tokens(&a));
        }
    }
}
