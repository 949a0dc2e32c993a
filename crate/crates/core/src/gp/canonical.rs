//! Canonical token strings and token-level edit distance, used by
//! deterministic crowding to pick which parent a child competes against.

use crate::gp::tree::{Node, ProgramTree};

/// Prefix tokens with every constant written as `C`.
pub fn canonical_tokens(tree: &ProgramTree) -> Vec<String> {
    tree.nodes()
        .iter()
        .map(|n| match n {
            Node::Const(_) => "C".to_string(),
            other => other.to_string(),
        })
        .collect()
}

pub fn canonical_form(tree: &ProgramTree) -> String {
    canonical_tokens(tree).join(" ")
}

/// Levenshtein distance over token sequences.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_collapse() {
        let a: ProgramTree = "+ x0 0.5".parse().unwrap();
        let b: ProgramTree = "+ x0 -0.25".parse().unwrap();
        assert_eq!(canonical_form(&a), "+ x0 C");
        assert_eq!(edit_distance(&canonical_tokens(&a), &canonical_tokens(&b)), 0);
    }

    #[test]
    fn levenshtein_examples() {
        let t = |s: &str| s.chars().collect::<Vec<_>>();
        assert_eq!(edit_distance(&t("kitten"), &t("sitting")), 3);
        assert_eq!(edit_distance(&t(""), &t("abc")), 3);
        assert_eq!(edit_distance(&t("abc"), &t("abc")), 0);
        let a: ProgramTree = "+ x0 x1".parse().unwrap();
        let b: ProgramTree = "+ x0 sin x1".parse().unwrap();
        assert_eq!(edit_distance(&canonical_tokens(&a), &canonical_tokens(&b)), 1);
    }
}
