//! Permutation words indexed by lexicographic rank.

/// All permutations of `0..n` in lexicographic order; index = rank.
pub fn permutations_lex(n: usize) -> Vec<Vec<u8>> {
    let mut current: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

fn next_permutation(word: &mut [u8]) -> bool {
    let n = word.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && word[i - 1] >= word[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while word[j] <= word[i - 1] {
        j -= 1;
    }
    word.swap(i - 1, j);
    word[i..].reverse();
    true
}

/// Lexicographic rank of a permutation word of `0..n` (Lehmer code).
pub fn lex_rank(word: &[u8]) -> usize {
    let n = word.len();
    let mut rank = 0usize;
    for i in 0..n {
        let smaller_after = word[i + 1..].iter().filter(|&&v| v < word[i]).count();
        rank = rank * (n - i) + smaller_after;
    }
    rank
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_follow_enumeration_order() {
        let all = permutations_lex(4);
        assert_eq!(all.len(), 24);
        for (i, w) in all.iter().enumerate() {
            assert_eq!(lex_rank(w), i);
        }
        assert_eq!(all[0], vec![0, 1, 2, 3]);
        assert_eq!(all[23], vec![3, 2, 1, 0]);
    }
}
