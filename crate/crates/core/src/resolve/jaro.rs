/// Jaro similarity over Unicode scalar values.
///
/// Two empty strings are identical (1.0); an empty string against a
/// non-empty one scores 0.0.
pub fn jaro(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    jaro_chars(&a, &b)
}

fn jaro_chars(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut a_matched = vec![false; a.len()];
    let mut b_matched = vec![false; b.len()];
    let mut matches = 0usize;
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_matched[j] && b[j] == *ca {
                a_matched[i] = true;
                b_matched[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let mut half_transpositions = 0usize;
    let mut k = 0usize;
    for (i, ca) in a.iter().enumerate() {
        if !a_matched[i] {
            continue;
        }
        while !b_matched[k] {
            k += 1;
        }
        if *ca != b[k] {
            half_transpositions += 1;
        }
        k += 1;
    }
    let m = matches as f64;
    let t = half_transpositions as f64 / 2.0;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro–Winkler with prefix scale 0.1 and the common prefix capped at 4.
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let j = jaro_chars(&a, &b);
    let prefix = a.iter().zip(&b).take(4).take_while(|(x, y)| x == y).count();
    j + prefix as f64 * 0.1 * (1.0 - j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_disjoint() {
        assert_eq!(jaro_winkler("abc", "abc"), 1.0);
        assert_eq!(jaro_winkler("abc", "xyz"), 0.0);
        assert_eq!(jaro_winkler("", ""), 1.0);
        assert_eq!(jaro_winkler("", "a"), 0.0);
    }

    #[test]
    fn martha_marhta() {
        // J = (6/6 + 6/6 + 5/6) / 3 = 0.94444; prefix "mar" = 3
        assert!((jaro("martha", "marhta") - 0.944_444_444_444_444_4).abs() < 1e-12);
        assert!((jaro_winkler("martha", "marhta") - 0.961_111_111_111_111_1).abs() < 1e-12);
    }

    #[test]
    fn textbook_pairs() {
        // dwayne/duane: m=4, t=0 -> J = (4/6 + 4/5 + 1)/3 = 0.82222, l=1 -> 0.84
        assert!((jaro_winkler("dwayne", "duane") - 0.84).abs() < 1e-12);
        // dixon/dicksonx: m=4, t=0 -> J = (4/5 + 4/8 + 1)/3 = 0.76667, l=2 -> 0.81333
        assert!((jaro_winkler("dixon", "dicksonx") - 0.813_333_333_333_333_3).abs() < 1e-12);
    }

    #[test]
    fn multibyte_is_per_character() {
        assert_eq!(jaro_winkler("华为", "华为"), 1.0);
        assert!(jaro_winkler("华为技术", "华为科技") > 0.8);
    }
}
