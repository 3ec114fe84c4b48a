//! Small F₂ vector spaces packed into `u64` bitmasks; bit `i` is the
//! exponent of the `i`-th generator.

/// Reduced row echelon basis of the span of `vectors`. Pivots are the lowest
/// set bit of each row, and rows are sorted by pivot.
pub fn echelon_basis(vectors: &[u64]) -> Vec<u64> {
    let mut rows: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut x = v;
        for &r in &rows {
            let pivot = r & r.wrapping_neg();
            if x & pivot != 0 {
                x ^= r;
            }
        }
        if x == 0 {
            continue;
        }
        let pivot = x & x.wrapping_neg();
        for r in rows.iter_mut() {
            if *r & pivot != 0 {
                *r ^= x;
            }
        }
        rows.push(x);
    }
    rows.sort_by_key(|r| r.trailing_zeros());
    rows
}

pub fn rank(vectors: &[u64]) -> usize {
    echelon_basis(vectors).len()
}

/// All `2^k` elements of the span of `basis`, sorted.
pub fn span(basis: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64];
    for &b in basis {
        let extra: Vec<u64> = out.iter().map(|x| x ^ b).collect();
        out.extend(extra);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Whether a set of vectors (given sorted or not) is closed under addition
/// and contains zero.
pub fn is_subgroup(set: &[u64]) -> bool {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.binary_search(&0).is_err() {
        return false;
    }
    s.iter()
        .all(|&a| s.iter().all(|&b| s.binary_search(&(a ^ b)).is_ok()))
}

/// Applies the linear map sending bit `i` to `images[i]`.
pub fn apply(images: &[u64], v: u64) -> u64 {
    images
        .iter()
        .enumerate()
        .filter(|(i, _)| v >> i & 1 == 1)
        .fold(0, |acc, (_, &img)| acc ^ img)
}
