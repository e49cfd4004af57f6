//! AP cluster configurations: set partitions of the M access points into
//! exactly M̃ non-empty unlabeled blocks.
//!
//! Partitions are represented canonically as restricted growth strings
//! (AP 0 always sits in cluster 0; each new cluster index is one more than
//! the maximum of the previous ones), enumerated in lexicographic order.
//! The enumeration therefore has length S(M, M̃), the Stirling number of the
//! second kind, and indexing into it gives the discrete action space for the
//! clustering agent.

use crate::error::{Error, Result};

/// Refuse to enumerate action spaces larger than this by default; the DDQN
/// head size is the configuration count.
pub const DEFAULT_ACTION_SPACE_CAP: u64 = 4096;

/// A partition of `M` APs into `M̃` non-empty clusters, stored as a
/// restricted growth string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterConfig {
    /// `assignment[m]` is the cluster index of AP `m`, in `[0, M̃)`.
    assignment: Vec<usize>,
    num_clusters: usize,
}

impl ClusterConfig {
    /// Validates and canonicalizes an assignment vector. The assignment must
    /// already be a restricted growth string covering `0..num_clusters`.
    pub fn new(assignment: Vec<usize>, num_clusters: usize) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidConfig("empty cluster assignment".into()));
        }
        let mut max_seen: Option<usize> = None;
        for (m, &c) in assignment.iter().enumerate() {
            let limit = max_seen.map_or(0, |x| x + 1);
            if c > limit {
                return Err(Error::InvalidConfig(format!(
                    "assignment is not a restricted growth string at AP {m}"
                )));
            }
            max_seen = Some(max_seen.map_or(c, |x| x.max(c)));
        }
        let used = max_seen.unwrap() + 1;
        if used != num_clusters {
            return Err(Error::InvalidConfig(format!(
                "assignment uses {used} clusters, expected {num_clusters}"
            )));
        }
        Ok(ClusterConfig { assignment, num_clusters })
    }

    /// All-singleton partition: M̃ = M, the static network layout.
    pub fn singletons(num_aps: usize) -> Self {
        ClusterConfig { assignment: (0..num_aps).collect(), num_clusters: num_aps }
    }

    pub fn num_aps(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Cluster sizes 𝒩_m̃.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.num_clusters];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// AP indices grouped by cluster, preserving AP order inside each block.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_clusters];
        for (m, &c) in self.assignment.iter().enumerate() {
            blocks[c].push(m);
        }
        blocks
    }

    /// Canonical text form, e.g. `0,0,1,0,2`.
    pub fn to_text(&self) -> String {
        self.assignment
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let assignment: Vec<usize> = text
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("cluster string: {e}"))))
            .collect::<Result<_>>()?;
        let clusters = assignment.iter().copied().max().map_or(0, |x| x + 1);
        ClusterConfig::new(assignment, clusters)
    }
}

impl std::fmt::Display for ClusterConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Stirling number of the second kind S(n, k), saturating at u64::MAX.
pub fn stirling2(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    if k == 0 {
        return u64::from(n == 0);
    }
    // S(n, k) = k S(n-1, k) + S(n-1, k-1)
    let mut row = vec![0u64; k + 1];
    row[0] = 1; // S(0, 0)
    for _ in 1..=n {
        for j in (1..=k).rev() {
            row[j] = (j as u64).saturating_mul(row[j]).saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}

/// Number of ways to complete a restricted growth string with `remaining`
/// positions when `used` clusters are already open and exactly `target`
/// must be open at the end.
fn completions(remaining: usize, used: usize, target: usize) -> u64 {
    if used > target {
        return 0;
    }
    let need = target - used;
    if need > remaining {
        return 0;
    }
    // Completions(r, j) follows the Stirling recurrence in the open-block
    // count: place the next AP in an open block (j ways) or open a new one.
    let mut table = vec![vec![0u64; target + 1]; remaining + 1];
    for j in 0..=target {
        table[0][j] = u64::from(j == target);
    }
    for r in 1..=remaining {
        for j in 1..=target {
            let stay = (j as u64).saturating_mul(table[r - 1][j]);
            let open = if j < target { table[r - 1][j + 1] } else { 0 };
            table[r][j] = stay.saturating_add(open);
        }
    }
    table[remaining][used]
}

/// Enumerates every partition of `num_aps` APs into exactly `num_clusters`
/// non-empty clusters, in lexicographic restricted-growth-string order.
///
/// Refuses when the count exceeds `cap` (see
/// [`DEFAULT_ACTION_SPACE_CAP`]); pass a larger cap explicitly to override.
pub fn enumerate_configs_capped(
    num_aps: usize,
    num_clusters: usize,
    cap: u64,
) -> Result<Vec<ClusterConfig>> {
    check_dims(num_aps, num_clusters)?;
    let count = stirling2(num_aps, num_clusters);
    if count > cap {
        return Err(Error::BudgetExceeded { required: count, allowed: cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut assignment = vec![0usize; num_aps];
    rec_enumerate(num_aps, num_clusters, 1, 1, &mut assignment, &mut out);
    debug_assert_eq!(out.len() as u64, count);
    Ok(out)
}

/// [`enumerate_configs_capped`] with the default action-space cap.
pub fn enumerate_configs(num_aps: usize, num_clusters: usize) -> Result<Vec<ClusterConfig>> {
    enumerate_configs_capped(num_aps, num_clusters, DEFAULT_ACTION_SPACE_CAP)
}

fn rec_enumerate(
    num_aps: usize,
    target: usize,
    pos: usize,
    used: usize,
    assignment: &mut Vec<usize>,
    out: &mut Vec<ClusterConfig>,
) {
    if pos == num_aps {
        if used == target {
            out.push(ClusterConfig { assignment: assignment.clone(), num_clusters: target });
        }
        return;
    }
    // choose an existing cluster, or open cluster `used`, bounded so the
    // remaining positions can still reach `target` blocks
    for c in 0..=used.min(target - 1) {
        let new_used = used.max(c + 1);
        // prune: remaining positions must be able to reach `target` blocks
        if target - new_used <= num_aps - pos - 1 {
            assignment[pos] = c;
            rec_enumerate(num_aps, target, pos + 1, new_used, assignment, out);
        }
    }
}

fn check_dims(num_aps: usize, num_clusters: usize) -> Result<()> {
    if num_aps == 0 {
        return Err(Error::Domain("need at least one AP".into()));
    }
    if num_clusters == 0 || num_clusters > num_aps {
        return Err(Error::Domain(format!(
            "cluster count must satisfy 1 <= M~ <= M, got M~ = {num_clusters}, M = {num_aps}"
        )));
    }
    Ok(())
}

/// Returns the `n`-th configuration of the enumeration order without
/// materializing the full list. Bijective with [`enumerate_configs`].
pub fn config_by_index(num_aps: usize, num_clusters: usize, n: u64) -> Result<ClusterConfig> {
    check_dims(num_aps, num_clusters)?;
    let total = stirling2(num_aps, num_clusters);
    if n >= total {
        return Err(Error::Domain(format!(
            "configuration index {n} out of range, S({num_aps},{num_clusters}) = {total}"
        )));
    }
    let mut assignment = vec![0usize; num_aps];
    let mut used = 1usize;
    let mut rank = n;
    for pos in 1..num_aps {
        let remaining = num_aps - pos - 1;
        let mut chosen = None;
        for c in 0..=used.min(num_clusters - 1) {
            let new_used = used.max(c + 1);
            let below = completions(remaining, new_used, num_clusters);
            if rank < below {
                chosen = Some((c, new_used));
                break;
            }
            rank -= below;
        }
        let (c, new_used) =
            chosen.expect("rank exhausted before the enumeration did; count bug");
        assignment[pos] = c;
        used = new_used;
    }
    ClusterConfig::new(assignment, num_clusters)
}

/// Index of a configuration within the enumeration order.
pub fn index_of_config(config: &ClusterConfig) -> u64 {
    let num_aps = config.num_aps();
    let target = config.num_clusters();
    let mut used = 1usize;
    let mut rank = 0u64;
    for pos in 1..num_aps {
        let remaining = num_aps - pos - 1;
        let chosen = config.assignment[pos];
        for c in 0..chosen {
            if c <= used.min(target - 1) {
                rank += completions(remaining, used.max(c + 1), target);
            }
        }
        used = used.max(chosen + 1);
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn trivial_partition_counts() {
        assert_eq!(enumerate_configs(3, 3).unwrap().len(), 1);
        assert_eq!(enumerate_configs(5, 1).unwrap().len(), 1);
        assert_eq!(enumerate_configs(4, 2).unwrap().len(), 7);
        assert!(enumerate_configs(3, 4).is_err());
        assert!(enumerate_configs(0, 1).is_err());
    }

    /// Brute-force oracle: all labeled assignments, deduplicated by block
    /// structure, then filtered to exactly `mt` blocks.
    fn brute_force_count(m: usize, mt: usize) -> usize {
        let mut seen = HashSet::new();
        let total = (mt as u64).pow(m as u32);
        for code in 0..total {
            let mut labels = Vec::with_capacity(m);
            let mut c = code;
            for _ in 0..m {
                labels.push((c % mt as u64) as usize);
                c /= mt as u64;
            }
            // canonicalize to a restricted growth string
            let mut map: Vec<Option<usize>> = vec![None; mt];
            let mut next = 0usize;
            let mut canon = Vec::with_capacity(m);
            for &l in &labels {
                let id = *map[l].get_or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                });
                canon.push(id);
            }
            if next == mt {
                seen.insert(canon);
            }
        }
        seen.len()
    }

    #[test]
    fn enumeration_matches_brute_force_and_has_no_duplicates() {
        for m in 1..=8 {
            for mt in 1..=m {
                let configs = enumerate_configs_capped(m, mt, u64::MAX).unwrap();
                let unique: HashSet<_> = configs.iter().map(|c| c.assignment().to_vec()).collect();
                assert_eq!(unique.len(), configs.len(), "duplicates at ({m},{mt})");
                assert_eq!(configs.len(), brute_force_count(m, mt), "count at ({m},{mt})");
                for c in &configs {
                    assert!(c.cluster_sizes().iter().all(|&s| s >= 1 && s <= m - (mt - 1)));
                }
            }
        }
    }

    #[test]
    fn stirling_recurrence_holds() {
        for n in 2..=10 {
            for k in 1..=n {
                let lhs = stirling2(n, k);
                let rhs = (k as u64) * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
                assert_eq!(lhs, rhs, "S({n},{k})");
            }
        }
        assert_eq!(stirling2(4, 2), 7);
    }

    #[test]
    fn index_round_trips() {
        // (3,3,0) is the unique all-singleton config.
        let c = config_by_index(3, 3, 0).unwrap();
        assert_eq!(c.assignment(), &[0, 1, 2]);

        for (m, mt) in [(4, 2), (5, 3), (6, 2), (7, 4)] {
            let configs = enumerate_configs_capped(m, mt, u64::MAX).unwrap();
            for (i, c) in configs.iter().enumerate() {
                assert_eq!(&config_by_index(m, mt, i as u64).unwrap(), c);
                assert_eq!(index_of_config(c), i as u64);
            }
        }
        assert!(config_by_index(4, 2, 7).is_err());
    }

    #[test]
    fn action_space_cap_is_enforced() {
        let err = enumerate_configs_capped(16, 8, 4096).unwrap_err();
        match err {
            crate::Error::BudgetExceeded { required, allowed } => {
                assert_eq!(allowed, 4096);
                assert_eq!(required, stirling2(16, 8));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn text_round_trip() {
        let c = ClusterConfig::from_text("0,0,1,0,2").unwrap();
        assert_eq!(c.num_clusters(), 3);
        assert_eq!(c.to_text(), "0,0,1,0,2");
        assert_eq!(c.members(), vec![vec![0, 1, 3], vec![2], vec![4]]);
        assert!(ClusterConfig::from_text("0,2,1").is_err()); // not RGS
    }
}
