//! Enumeration and sampling of fixed-size subsets, split into independent
//! chunks for parallel evaluation.

use rand::seq::index;
use rand::Rng;

/// `C(n, t)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, t: usize) -> u128 {
    if t > n {
        return 0;
    }
    let t = t.min(n - t);
    let mut acc: u128 = 1;
    for i in 0..t {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `t`-subset of `0..n` in lexicographic order.
pub fn unrank(n: usize, t: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(t);
    let mut x = 0;
    for k in (1..=t).rev() {
        loop {
            let c = binomial(n - x - 1, k - 1);
            if rank < c {
                break;
            }
            rank -= c;
            x += 1;
        }
        out.push(x);
        x += 1;
    }
    out
}

/// Advances to the lexicographically next subset; false after the last.
pub fn next_combination(s: &mut [usize], n: usize) -> bool {
    let t = s.len();
    for i in (0..t).rev() {
        if s[i] < n - t + i {
            s[i] += 1;
            for j in i + 1..t {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` on every subset with rank in `[start, end)`.
pub fn for_each_in_range(n: usize, t: usize, start: u128, end: u128, mut f: impl FnMut(&[usize])) {
    if start >= end {
        return;
    }
    let mut s = unrank(n, t, start);
    let mut r = start;
    loop {
        f(&s);
        r += 1;
        if r >= end || !next_combination(&mut s, n) {
            break;
        }
    }
}

/// Uniform random `t`-subset of `0..n`, sorted.
pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize, t: usize) -> Vec<usize> {
    let mut v = index::sample(rng, n, t).into_vec();
    v.sort_unstable();
    v
}
