use crate::error::{Error, Result};

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Greedily merges overlapping cliques.
///
/// A pair `(C_i, C_j)` qualifies when
/// `|C_i ∩ C_j| * md >= min(|C_i|, |C_j|) * (md - 1)`; the qualifying pair
/// with the largest overlap is merged first (lowest indices on ties) and the
/// scan restarts until no pair qualifies.
pub fn merge_cliques(cliques: &[Vec<usize>], md: usize) -> Result<Vec<Vec<usize>>> {
    if md < 2 {
        return Err(Error::InvalidInput(format!(
            "merge strength must be at least 2, got {md}"
        )));
    }
    let mut cur: Vec<Vec<usize>> = cliques
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            c
        })
        .collect();
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..cur.len() {
            for j in i + 1..cur.len() {
                let overlap = intersection_len(&cur[i], &cur[j]);
                if overlap == 0 {
                    continue;
                }
                let small = cur[i].len().min(cur[j].len());
                if overlap * md >= small * (md - 1) && best.is_none_or(|(_, _, o)| overlap > o) {
                    best = Some((i, j, overlap));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                let merged = union(&cur[i], &cur[j]);
                cur[i] = merged;
                cur.remove(j);
            }
            None => break,
        }
    }
    cur.sort();
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merges_overlapping_blocks_example() {
        let out = merge_cliques(&[vec![1, 2, 3, 4], vec![2, 3, 4, 5]], 3).unwrap();
        assert_eq!(out, vec![vec![1, 2, 3, 4, 5]]);
    }

    #[test]
    fn keeps_disjoint_and_weakly_overlapping() {
        let disjoint = vec![vec![1, 2], vec![3, 4]];
        assert_eq!(merge_cliques(&disjoint, 3).unwrap(), disjoint);
        let weak = vec![vec![1, 2], vec![2, 3]];
        assert_eq!(merge_cliques(&weak, 3).unwrap(), weak);
        // overlap 1 of min size 2 qualifies once md = 2: 1*2 >= 2*1
        assert_eq!(merge_cliques(&weak, 2).unwrap(), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn rejects_weak_strength() {
        assert!(merge_cliques(&[vec![1]], 1).is_err());
    }

    proptest! {
        #[test]
        fn merge_preserves_cover(
            cliques in prop::collection::vec(prop::collection::btree_set(0usize..10, 1..5), 0..6),
            md in 2usize..6,
        ) {
            let cliques: Vec<Vec<usize>> = cliques.into_iter().map(|s| s.into_iter().collect()).collect();
            let out = merge_cliques(&cliques, md).unwrap();
            let before: std::collections::BTreeSet<usize> = cliques.iter().flatten().copied().collect();
            let after: std::collections::BTreeSet<usize> = out.iter().flatten().copied().collect();
            prop_assert_eq!(before, after);
            // every input clique lives inside some output clique
            for c in &cliques {
                prop_assert!(out.iter().any(|o| c.iter().all(|v| o.contains(v))));
            }
            prop_assert_eq!(merge_cliques(&cliques, md).unwrap(), out);
        }
    }
}
