//! Network vocabulary: closure, components, core-periphery classification,
//! nested-split recognition, degree cells and DOT export.

use std::collections::BTreeMap;

use crate::econ::LinkProfile;

/// Undirected view of a directed link profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Undirected {
    n: usize,
    adj: Vec<bool>,
}

impl Undirected {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.is_edge(i, j)).count()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.is_edge(i, j)).collect()
    }
}

/// Replace each directed link by an undirected one: `ḡ_ij = max(g_ij, g_ji)`.
pub fn closure(g: &LinkProfile) -> Undirected {
    let n = g.n();
    let mut adj = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && (g.get(i, j) || g.get(j, i)) {
                adj[i * n + j] = true;
                adj[j * n + i] = true;
            }
        }
    }
    Undirected { n, adj }
}

/// Connected components of an undirected graph, each sorted, ordered by
/// smallest member. Singletons are included.
pub fn components(gbar: &Undirected) -> Vec<Vec<usize>> {
    let n = gbar.n();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut comp = Vec::new();
        seen[start] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for u in gbar.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Partition players by closure degree.
pub fn cells(gbar: &Undirected) -> BTreeMap<usize, Vec<usize>> {
    let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..gbar.n() {
        map.entry(gbar.degree(i)).or_default().push(i);
    }
    map
}

/// Why a graph fails the core-periphery definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpViolation {
    /// Two periphery players are linked.
    PeripheryPair(usize, usize),
    /// A core pair is not mutually linked.
    CoreNotReciprocated(usize, usize),
    /// A non-isolated periphery player sponsors no link into the core.
    PeripheryNotLinkedToCore(usize),
}

/// Structural classification of a link profile against a provision vector.
#[derive(Debug, Clone)]
pub struct StructureReport {
    pub core: Vec<usize>,
    pub periphery: Vec<usize>,
    pub isolated: Vec<usize>,
    /// Players whose provision sits within tolerance of the linking cost;
    /// their core membership is ambiguous and deserves manual review.
    pub borderline: Vec<usize>,
    pub is_core_periphery: bool,
    pub is_complete_core_periphery: bool,
    pub is_star: bool,
    pub is_nested_split: bool,
    pub cells: BTreeMap<usize, Vec<usize>>,
    pub cp_certificate: Option<CpViolation>,
    pub nested_certificate: Option<(usize, usize)>,
}

fn check_partition(g: &LinkProfile, core: &[bool], periphery: &[usize]) -> Option<CpViolation> {
    let n = g.n();
    for &i in periphery {
        for &j in periphery {
            if i < j && (g.get(i, j) || g.get(j, i)) {
                return Some(CpViolation::PeripheryPair(i, j));
            }
        }
    }
    for l in 0..n {
        for m in (l + 1)..n {
            if core[l] && core[m] && !(g.get(l, m) && g.get(m, l)) {
                return Some(CpViolation::CoreNotReciprocated(l, m));
            }
        }
    }
    for &i in periphery {
        if !(0..n).any(|l| core[l] && g.get(i, l)) {
            return Some(CpViolation::PeripheryNotLinkedToCore(i));
        }
    }
    None
}

/// Nestedness of periphery sponsor-neighborhoods: sorted by out-degree they
/// must form an inclusion chain. Returns the chain order or a certificate.
fn check_nested(g: &LinkProfile, periphery: &[usize]) -> Result<Vec<usize>, (usize, usize)> {
    let mut order: Vec<usize> = periphery.to_vec();
    order.sort_by_key(|&i| (g.out_degree(i), i));
    for w in order.windows(2) {
        let (small, large) = (w[0], w[1]);
        let sub = g
            .out_neighbors(small)
            .iter()
            .all(|&t| g.get(large, t));
        if !sub {
            return Err((small, large));
        }
    }
    Ok(order)
}

/// Classify a profile's network given provisions and the linking cost.
/// Core membership uses the strict rule `x_i > k + tol`; provisions within
/// `tol` of `k` are flagged as borderline.
pub fn classify_core_periphery(
    g: &LinkProfile,
    x: &[f64],
    k: f64,
    tol: f64,
) -> StructureReport {
    let n = g.n();
    assert_eq!(x.len(), n, "provision vector length must match the network");
    let gbar = closure(g);
    let core_mask: Vec<bool> = (0..n).map(|i| x[i] > k + tol).collect();
    let core: Vec<usize> = (0..n).filter(|&i| core_mask[i]).collect();
    let isolated: Vec<usize> =
        (0..n).filter(|&i| !core_mask[i] && gbar.degree(i) == 0).collect();
    let periphery: Vec<usize> =
        (0..n).filter(|&i| !core_mask[i] && gbar.degree(i) > 0).collect();
    let borderline: Vec<usize> = (0..n).filter(|&i| (x[i] - k).abs() <= tol).collect();

    let cp_certificate = check_partition(g, &core_mask, &periphery);
    let is_core_periphery = cp_certificate.is_none();
    let is_complete_core_periphery = is_core_periphery
        && isolated.is_empty()
        && periphery.iter().all(|&i| g.out_neighbors(i) == core);
    let is_star = is_core_periphery && core.len() == 1 && !periphery.is_empty();

    let (is_nested_split, nested_certificate) = if is_core_periphery {
        match check_nested(g, &periphery) {
            Ok(_) => (true, None),
            Err(pair) => (false, Some(pair)),
        }
    } else {
        (false, None)
    };

    StructureReport {
        core,
        periphery,
        isolated,
        borderline,
        is_core_periphery,
        is_complete_core_periphery,
        is_star,
        is_nested_split,
        cells: cells(&gbar),
        cp_certificate,
        nested_certificate,
    }
}

/// Nested-split recognition verdict for a bare network.
#[derive(Debug, Clone)]
pub struct NestedSplitVerdict {
    pub holds: bool,
    /// Periphery in chain order (smallest neighborhood first) when the
    /// verdict holds.
    pub order: Vec<usize>,
    /// The offending pair when it does not.
    pub certificate: Option<(usize, usize)>,
}

/// Candidate cores for partition search: the empty set, singletons, and all
/// cliques of the mutual-link graph (core pairs must reciprocate).
fn candidate_cores(g: &LinkProfile) -> Vec<Vec<usize>> {
    let n = g.n();
    let mutual = |i: usize, j: usize| g.get(i, j) && g.get(j, i);
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for i in 0..n {
        out.push(vec![i]);
    }
    // Grow cliques in lexicographic order; domain graphs have small cores so
    // the cap is a safety valve, not a practical limit.
    let cap = 200_000;
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(cur) = stack.pop() {
        if out.len() >= cap {
            break;
        }
        let last = *cur.last().unwrap();
        for j in (last + 1)..n {
            if cur.iter().all(|&i| mutual(i, j)) {
                let mut next = cur.clone();
                next.push(j);
                out.push(next.clone());
                stack.push(next);
            }
        }
    }
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out.dedup();
    out
}

/// Decide whether some partition of the players makes the network a nested
/// split graph.
pub fn is_nested_split(g: &LinkProfile) -> NestedSplitVerdict {
    let n = g.n();
    let gbar = closure(g);
    let mut fallback_cert: Option<(usize, usize)> = None;
    for core in candidate_cores(g) {
        let mut core_mask = vec![false; n];
        for &c in &core {
            core_mask[c] = true;
        }
        let periphery: Vec<usize> = (0..n)
            .filter(|&i| !core_mask[i] && gbar.degree(i) > 0)
            .collect();
        match check_partition(g, &core_mask, &periphery) {
            Some(_) => continue,
            None => match check_nested(g, &periphery) {
                Ok(order) => {
                    return NestedSplitVerdict { holds: true, order, certificate: None };
                }
                Err(pair) => {
                    fallback_cert.get_or_insert(pair);
                }
            },
        }
    }
    NestedSplitVerdict { holds: false, order: Vec::new(), certificate: fallback_cert }
}

/// Render the directed network as DOT. Core nodes are filled; labels carry
/// one annotation line per node when provided. Node names are 1-based.
pub fn export_dot(
    g: &LinkProfile,
    report: Option<&StructureReport>,
    annotations: Option<&[String]>,
) -> String {
    let n = g.n();
    let mut out = String::from("digraph spillnet {\n");
    out.push_str("  rankdir=LR;\n  node [shape=circle];\n");
    for i in 0..n {
        let mut attrs = Vec::new();
        let label = match annotations {
            Some(lines) if i < lines.len() && !lines[i].is_empty() => {
                format!("{}\\n{}", i + 1, lines[i])
            }
            _ => format!("{}", i + 1),
        };
        attrs.push(format!("label=\"{label}\""));
        if report.map_or(false, |r| r.core.contains(&i)) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=gray80".into());
        }
        out.push_str(&format!("  n{} [{}];\n", i + 1, attrs.join(", ")));
    }
    for (i, j) in g.edges() {
        out.push_str(&format!("  n{} -> n{};\n", i + 1, j + 1));
    }
    out.push_str("}\n");
    out
}

/// Edge list as CSV (`from,to`, 1-based).
pub fn to_edge_csv(g: &LinkProfile) -> String {
    let mut out = String::from("from,to\n");
    for (i, j) in g.edges() {
        out.push_str(&format!("{},{}\n", i + 1, j + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star_on_one(n: usize) -> LinkProfile {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i, 0)).collect();
        LinkProfile::from_edges(n, &edges).unwrap()
    }

    // Four players: 1-2 reciprocated, 3 links to 1 and 2, 4 links to 1.
    fn nested_four() -> LinkProfile {
        LinkProfile::from_edges(4, &[(0, 1), (1, 0), (2, 0), (2, 1), (3, 0)]).unwrap()
    }

    #[test]
    fn closure_of_star_is_undirected_star() {
        let g = star_on_one(3);
        let gbar = closure(&g);
        assert!(gbar.is_edge(0, 1) && gbar.is_edge(1, 0));
        assert!(gbar.is_edge(0, 2) && !gbar.is_edge(1, 2));
        assert_eq!(gbar.degree(0), 2);
    }

    #[test]
    fn closure_degrees_of_nested_four() {
        let gbar = closure(&nested_four());
        let degs: Vec<usize> = (0..4).map(|i| gbar.degree(i)).collect();
        assert_eq!(degs, vec![3, 2, 2, 1]);
    }

    #[test]
    fn empty_closure_is_empty() {
        let g = LinkProfile::empty(3);
        let gbar = closure(&g);
        assert_eq!((0..3).map(|i| gbar.degree(i)).sum::<usize>(), 0);
    }

    #[test]
    fn components_cases() {
        assert_eq!(components(&closure(&nested_four())).len(), 1);
        assert_eq!(components(&closure(&LinkProfile::empty(3))).len(), 3);
        // Two disjoint stars.
        let g = LinkProfile::from_edges(6, &[(1, 0), (2, 0), (4, 3), (5, 3)]).unwrap();
        let comps = components(&closure(&g));
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], vec![0, 1, 2]);
    }

    #[test]
    fn cells_cases() {
        let map = cells(&closure(&nested_four()));
        assert_eq!(map[&3], vec![0]);
        assert_eq!(map[&2], vec![1, 2]);
        assert_eq!(map[&1], vec![3]);
        let empty = cells(&closure(&LinkProfile::empty(3)));
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[&0], vec![0, 1, 2]);
    }

    #[test]
    fn classify_star() {
        let g = star_on_one(3);
        let r = classify_core_periphery(&g, &[4.0, 0.0, 0.0], 1.0, 1e-7);
        assert_eq!(r.core, vec![0]);
        assert!(r.is_core_periphery && r.is_star && r.is_complete_core_periphery);
        assert!(r.is_nested_split);
    }

    #[test]
    fn classify_two_core_incomplete() {
        // Cores 1 and 3 (0-based 0 and 2), player 4 reaches only one of them.
        let g =
            LinkProfile::from_edges(4, &[(0, 2), (2, 0), (1, 0), (1, 2), (3, 0)]).unwrap();
        let x = [3.6667, 0.8333, 1.6667, 0.0];
        let r = classify_core_periphery(&g, &x, 1.0, 1e-7);
        assert_eq!(r.core, vec![0, 2]);
        assert!(r.is_core_periphery);
        assert!(!r.is_complete_core_periphery);
        assert!(!r.is_star);
    }

    #[test]
    fn classify_clique() {
        let g = LinkProfile::from_edges(
            3,
            &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)],
        )
        .unwrap();
        let r = classify_core_periphery(&g, &[5.0, 5.0, 5.0], 1.0, 1e-7);
        assert_eq!(r.core, vec![0, 1, 2]);
        assert!(r.periphery.is_empty());
        assert!(r.is_core_periphery);
    }

    #[test]
    fn nested_split_cases() {
        assert!(is_nested_split(&nested_four()).holds);
        assert!(is_nested_split(&star_on_one(4)).holds);
        // Incomparable periphery neighborhoods over a reciprocated core.
        let g = LinkProfile::from_edges(4, &[(0, 1), (1, 0), (2, 0), (3, 1)]).unwrap();
        let v = is_nested_split(&g);
        assert!(!v.holds);
        assert_eq!(v.certificate, Some((2, 3)));
    }

    #[test]
    fn nested_split_order_is_chain() {
        let v = is_nested_split(&nested_four());
        assert_eq!(v.order, vec![3, 2]);
    }

    #[test]
    fn dot_output_shape() {
        let g = star_on_one(3);
        let r = classify_core_periphery(&g, &[4.0, 0.0, 0.0], 1.0, 1e-7);
        let labels = vec!["w=5 x=4 y=1".to_string(), "w=5 x=0 y=4".into(), "w=5 x=0 y=4".into()];
        let dot = export_dot(&g, Some(&r), Some(&labels));
        assert!(dot.contains("n2 -> n1;"));
        assert!(dot.contains("n3 -> n1;"));
        assert!(dot.contains("style=filled"));
        let empty = export_dot(&LinkProfile::empty(2), None, None);
        assert!(empty.contains("n1 [") && !empty.contains("->"));
    }

    #[test]
    fn edge_csv() {
        let csv = to_edge_csv(&star_on_one(3));
        assert_eq!(csv, "from,to\n2,1\n3,1\n");
    }
}
