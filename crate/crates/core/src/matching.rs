//! Bipartite matching engines shared by volume, distance, and enumeration
//! code.  Both solvers are deterministic: adjacency lists are scanned in
//! the order given, and ties resolve toward lower indices.

use std::collections::VecDeque;

const UNMATCHED: usize = usize::MAX;

/// Maximum-cardinality bipartite matching (Hopcroft–Karp).
///
/// `adj[l]` lists the right-side neighbors of left vertex `l`.  Returns the
/// matching size and, for each left vertex, its partner.
pub(crate) fn hopcroft_karp(
    n_left: usize,
    n_right: usize,
    adj: &[Vec<usize>],
) -> (usize, Vec<Option<usize>>) {
    assert_eq!(adj.len(), n_left);
    let mut match_l = vec![UNMATCHED; n_left];
    let mut match_r = vec![UNMATCHED; n_right];
    let mut dist = vec![0u32; n_left];
    let mut size = 0;

    loop {
        // BFS layering from unmatched left vertices.
        let mut queue = VecDeque::new();
        for l in 0..n_left {
            if match_l[l] == UNMATCHED {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = u32::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let l2 = match_r[r];
                if l2 == UNMATCHED {
                    found = true;
                } else if dist[l2] == u32::MAX {
                    dist[l2] = dist[l] + 1;
                    queue.push_back(l2);
                }
            }
        }
        if !found {
            break;
        }

        fn augment(
            l: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [u32],
        ) -> bool {
            for i in 0..adj[l].len() {
                let r = adj[l][i];
                let l2 = match_r[r];
                if l2 == UNMATCHED
                    || (dist[l2] == dist[l] + 1 && augment(l2, adj, match_l, match_r, dist))
                {
                    match_l[l] = r;
                    match_r[r] = l;
                    return true;
                }
            }
            dist[l] = u32::MAX;
            false
        }

        for l in 0..n_left {
            if match_l[l] == UNMATCHED && augment(l, adj, &mut match_l, &mut match_r, &mut dist) {
                size += 1;
            }
        }
    }

    let partners = match_l
        .iter()
        .map(|&r| if r == UNMATCHED { None } else { Some(r) })
        .collect();
    (size, partners)
}

/// Minimum-cost maximum-cardinality bipartite matching by successive
/// shortest augmenting paths with potentials.
///
/// `adj[l]` lists `(right, cost)` with nonnegative costs.  Returns the total
/// cost of a maximum matching of minimum cost and the left partners.
pub(crate) fn min_cost_max_matching(
    n_left: usize,
    n_right: usize,
    adj: &[Vec<(usize, u64)>],
) -> (u64, Vec<Option<usize>>) {
    assert_eq!(adj.len(), n_left);
    let mut match_l = vec![UNMATCHED; n_left];
    let mut match_r = vec![UNMATCHED; n_right];
    let mut pot_l = vec![0i64; n_left];
    let mut pot_r = vec![0i64; n_right];
    let mut total = 0u64;

    loop {
        // Dijkstra over the residual graph from all unmatched left vertices.
        const INF: i64 = i64::MAX / 4;
        let mut dist_l = vec![INF; n_left];
        let mut dist_r = vec![INF; n_right];
        let mut prev_r: Vec<usize> = vec![UNMATCHED; n_right]; // left used to reach r
        let mut heap = std::collections::BinaryHeap::new();
        for l in 0..n_left {
            if match_l[l] == UNMATCHED {
                dist_l[l] = 0;
                heap.push(std::cmp::Reverse((0i64, l)));
            }
        }
        let mut best: Option<(i64, usize)> = None;
        while let Some(std::cmp::Reverse((cost, l))) = heap.pop() {
            if cost > dist_l[l] {
                continue;
            }
            for &(r, w) in &adj[l] {
                let reduced = cost + w as i64 + pot_l[l] - pot_r[r];
                debug_assert!(reduced >= cost, "negative reduced cost");
                if reduced < dist_r[r] {
                    dist_r[r] = reduced;
                    prev_r[r] = l;
                    match match_r[r] {
                        UNMATCHED => {
                            if best.is_none_or(|(b, br)| (reduced, r) < (b, br)) {
                                best = Some((reduced, r));
                            }
                        }
                        l2 => {
                            if reduced < dist_l[l2] {
                                dist_l[l2] = reduced;
                                heap.push(std::cmp::Reverse((reduced, l2)));
                            }
                        }
                    }
                }
            }
        }

        let Some((path_len, mut r)) = best else { break };

        // Update potentials, capped at the path length, so every reduced
        // cost stays nonnegative for the next round.
        for l in 0..n_left {
            pot_l[l] += dist_l[l].min(path_len);
        }
        for r2 in 0..n_right {
            pot_r[r2] += dist_r[r2].min(path_len);
        }

        // Augment along the parent chain.
        loop {
            let l = prev_r[r];
            let prev_match = match_l[l];
            match_r[r] = l;
            match_l[l] = r;
            if prev_match == UNMATCHED {
                break;
            }
            r = prev_match;
        }
    }

    for (l, &r) in match_l.iter().enumerate() {
        if r != UNMATCHED {
            let w = adj[l]
                .iter()
                .find(|&&(rr, _)| rr == r)
                .map(|&(_, w)| w)
                .expect("matched along an existing edge");
            total += w;
        }
    }
    let partners = match_l
        .iter()
        .map(|&r| if r == UNMATCHED { None } else { Some(r) })
        .collect();
    (total, partners)
}
