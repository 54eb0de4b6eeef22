//! Brute-force generator of small bipartite test graphs.

#![allow(dead_code)]

use std::collections::BTreeSet;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn connected(n: usize, rows: &[u64]) -> bool {
    let cols = rows.iter().fold(0, |a, r| a | r);
    if rows.contains(&0) || cols.count_ones() as usize != n {
        return false;
    }
    let (mut seen_rows, mut seen_cols) = (1u64, rows[0]);
    loop {
        let mut grown = seen_rows;
        for (i, &r) in rows.iter().enumerate() {
            if r & seen_cols != 0 {
                grown |= 1 << i;
            }
        }
        let cols_now = (0..n)
            .filter(|i| grown >> i & 1 == 1)
            .fold(0, |a, i| a | rows[i]);
        if grown == seen_rows && cols_now == seen_cols {
            break;
        }
        seen_rows = grown;
        seen_cols = cols_now;
    }
    seen_rows.count_ones() as usize == n
}

fn encode(n: usize, rows: &[u64]) -> String {
    rows.iter()
        .map(|r| {
            (0..n)
                .map(|c| if r >> c & 1 == 1 { '1' } else { '0' })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Connected `n × n` biadjacency matrices for `1 ≤ n ≤ max_n`, one per
/// class under row and column permutations, as `;`-separated encodings.
pub fn square_bipartite_graphs(max_n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let perms = permutations(n);
        let mut seen = BTreeSet::new();
        for bits in 0u64..1 << (n * n) {
            let rows: Vec<u64> = (0..n).map(|i| bits >> (i * n) & ((1 << n) - 1)).collect();
            if !connected(n, &rows) {
                continue;
            }
            let canon = perms
                .iter()
                .map(|p| {
                    let mut r: Vec<u64> = rows
                        .iter()
                        .map(|&m| {
                            (0..n)
                                .filter(|&c| m >> c & 1 == 1)
                                .fold(0, |a, c| a | 1 << p[c])
                        })
                        .collect();
                    r.sort_unstable_by(|a, b| b.cmp(a));
                    r
                })
                .min()
                .unwrap();
            if seen.insert(canon.clone()) {
                out.push(encode(n, &canon));
            }
        }
    }
    out
}

#[test]
fn generator_counts() {
    let g = square_bipartite_graphs(2);
    // 1x1 edge, then the 2+2 path and the 4-cycle.
    assert_eq!(g, vec!["1", "11;10", "11;11"]);
}
