//! Index-tuple enumeration shared by the brute-force checkers.

/// All ordered tuples of the given length over `0..dim`.
pub fn cartesian(dim: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; len];
    if dim == 0 && len > 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < dim {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// All non-decreasing tuples of the given length over `0..dim`.
pub fn nondecreasing(dim: usize, len: usize) -> Vec<Vec<usize>> {
    cartesian(dim, len)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] <= w[1]))
        .collect()
}

/// All strictly increasing tuples of the given length over `0..dim`.
pub fn increasing(dim: usize, len: usize) -> Vec<Vec<usize>> {
    cartesian(dim, len)
        .into_iter()
        .filter(|t| t.windows(2).all(|w| w[0] < w[1]))
        .collect()
}

/// All multi-indices `m` of the given length with `sum(m) <= max_total`.
pub fn multi_indices(len: usize, max_total: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    fn rec(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            rec(cur, pos + 1, left - v, out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, max_total, &mut out);
    out
}

/// All multi-indices componentwise below `bound`, optionally capped in total.
pub fn sub_indices(bound: &[u32], max_total: Option<u32>) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; bound.len()];
    fn rec(
        cur: &mut Vec<u32>,
        pos: usize,
        bound: &[u32],
        left: Option<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        let hi = match left {
            Some(l) => bound[pos].min(l),
            None => bound[pos],
        };
        for v in 0..=hi {
            cur[pos] = v;
            rec(cur, pos + 1, bound, left.map(|l| l - v), out);
        }
        cur[pos] = 0;
    }
    rec(&mut cur, 0, bound, max_total, &mut out);
    out
}

/// All permutations of `0..len` in lexicographic order.
pub fn permutations(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..len).collect();
    loop {
        out.push(cur.clone());
        // Next permutation in lexicographic order.
        let Some(i) = (0..len.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..len).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}

/// Parity of the permutation that stably sorts `keys`; `false` for even.
/// Counts inversions, so equal keys do not contribute.
pub fn stable_sort_parity<T: Ord>(keys: &[T]) -> bool {
    let mut odd = false;
    for i in 0..keys.len() {
        for j in i + 1..keys.len() {
            if keys[i] > keys[j] {
                odd = !odd;
            }
        }
    }
    odd
}
