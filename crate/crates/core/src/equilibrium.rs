//! Best responses, equilibrium verification, exhaustive enumeration at small
//! sizes, and the constructive core-growing solvers.
//!
//! The best-response search space is reduced from all link sets to pairs
//! (link count, top contributors): for a fixed number of links, utility is
//! increasing in received spillovers, so only the largest contributors
//! matter. Ties among equal contributors are enumerated as classes so that
//! strictness detection is exact.

use rayon::prelude::*;

use crate::econ::{consumption_report, validate_profile, Economy, LinkProfile, StrategyProfile};
use crate::error::{Error, Result};

/// Hard cap for exhaustive link-profile enumeration.
pub const MAX_ENUM_PLAYERS: usize = 5;
/// Hard cap for the heterogeneous core-candidate search.
const MAX_SEARCH_PLAYERS: usize = 16;
/// Absolute tolerance for grouping equal contributors into tie classes.
const TIE_TOL: f64 = 1e-9;
/// Cap on concretely listed optimal strategies (counts stay exact).
const MAX_LISTED: usize = 64;

const MAX_SWEEPS: usize = 100_000;

/// One optimal strategy for a single player: sponsored links plus her own
/// consumption choice.
#[derive(Debug, Clone)]
pub struct BrStrategy {
    pub links: Vec<usize>,
    pub x: f64,
    pub y: f64,
}

/// All utility-maximizing strategies of one player against a fixed profile.
#[derive(Debug, Clone)]
pub struct BestResponseSet {
    /// Utility attained by every listed strategy (within the indifference
    /// tolerance).
    pub utility: f64,
    pub strategies: Vec<BrStrategy>,
    /// Exact number of optimal strategies including tie relabelings.
    pub total_count: u128,
    /// True when the optimum is unique up to relabeling equal contributors.
    pub unique_up_to_ties: bool,
}

/// A failed check together with the profitable (or indifferent) deviation.
#[derive(Debug, Clone)]
pub struct DeviationWitness {
    pub player: usize,
    pub strategy: BrStrategy,
    pub utility_gain: f64,
}

#[derive(Debug, Clone)]
pub struct EquilibriumVerdict {
    pub is_nash: bool,
    pub is_sociable: bool,
    pub is_strict: bool,
    pub witness: Option<DeviationWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Nash,
    Sociable,
    Strict,
}

impl EquilibriumVerdict {
    pub fn passes(&self, refinement: Refinement) -> bool {
        match refinement {
            Refinement::Nash => self.is_nash,
            Refinement::Sociable => self.is_sociable,
            Refinement::Strict => self.is_strict,
        }
    }
}

/// Own consumption implied by a link choice: `eta` links yielding `spill`.
/// Returns `(x, y, xbar, utility)`, or `None` when the links are
/// unaffordable.
fn bundle_for(econ: &Economy, i: usize, eta: usize, spill: f64) -> Option<(f64, f64, f64, f64)> {
    let p = econ.player(i);
    let rest = p.wealth - eta as f64 * econ.k();
    if rest < -1e-12 {
        return None;
    }
    let rest = rest.max(0.0);
    let m = rest + spill;
    let demand = p.pref.demand_raw(p.price, m);
    let x = (demand - spill).max(0.0).min(rest);
    let y = ((rest - x) / p.price).max(0.0);
    let xbar = x + spill;
    Some((x, y, xbar, p.pref.utility_raw(xbar, y)))
}

fn binom(t: usize, r: usize) -> u128 {
    if r > t {
        return 0;
    }
    let r = r.min(t - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((t - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// One near-optimal link-count choice: the mandatory targets, the tie group
/// at the boundary, and how many of the group are used.
#[derive(Debug, Clone)]
struct EtaClass {
    eta: usize,
    utility: f64,
    x: f64,
    y: f64,
    must: Vec<usize>,
    tie_group: Vec<usize>,
    choose: usize,
    count: u128,
}

impl EtaClass {
    /// The link set when it is unique within the class.
    fn unique_set(&self) -> Option<Vec<usize>> {
        if self.count != 1 {
            return None;
        }
        let mut set = self.must.clone();
        if self.choose == self.tie_group.len() {
            set.extend_from_slice(&self.tie_group);
        }
        set.sort_unstable();
        Some(set)
    }

    /// Concrete link sets, capped.
    fn list_sets(&self, cap: usize) -> Vec<Vec<usize>> {
        let t = self.tie_group.len();
        let r = self.choose;
        let mut out = Vec::new();
        let mut combo: Vec<usize> = (0..r).collect();
        loop {
            let mut set = self.must.clone();
            set.extend(combo.iter().map(|&c| self.tie_group[c]));
            set.sort_unstable();
            out.push(set);
            if out.len() >= cap {
                break;
            }
            // next combination in lexicographic order
            let mut idx = r;
            loop {
                if idx == 0 {
                    return out;
                }
                idx -= 1;
                if combo[idx] != idx + t - r {
                    combo[idx] += 1;
                    for j in (idx + 1)..r {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
        out
    }
}

/// Scan all (link count, top-contributor) choices for player `i` whose
/// utility reaches `threshold`. `vals` holds the candidate targets and their
/// provisions.
fn scan_link_choices(
    econ: &Economy,
    i: usize,
    vals: &[(usize, f64)],
    threshold: f64,
) -> Vec<EtaClass> {
    let mut sorted: Vec<(usize, f64)> = vals.to_vec();
    sorted.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut prefix = vec![0.0];
    for &(_, v) in &sorted {
        prefix.push(prefix.last().unwrap() + v);
    }
    let mut out = Vec::new();
    for eta in 0..=sorted.len() {
        let spill = prefix[eta];
        let Some((x, y, _, u)) = bundle_for(econ, i, eta, spill) else { break };
        if u < threshold {
            continue;
        }
        let (must, tie_group, choose) = if eta == 0 {
            (Vec::new(), Vec::new(), 0)
        } else {
            let boundary = sorted[eta - 1].1;
            let must: Vec<usize> = sorted
                .iter()
                .filter(|(_, v)| *v > boundary + TIE_TOL)
                .map(|(j, _)| *j)
                .collect();
            let group: Vec<usize> = sorted
                .iter()
                .filter(|(_, v)| (*v - boundary).abs() <= TIE_TOL)
                .map(|(j, _)| *j)
                .collect();
            let choose = eta - must.len();
            (must, group, choose)
        };
        let count = binom(tie_group.len(), choose).max(1);
        out.push(EtaClass { eta, utility: u, x, y, must, tie_group, choose, count });
    }
    out
}

fn contributions_excluding(profile: &StrategyProfile, i: usize) -> Vec<(usize, f64)> {
    (0..profile.n()).filter(|&j| j != i).map(|j| (j, profile.x[j])).collect()
}

/// All utility-maximizing strategies of player `i` against `profile`.
pub fn best_response(econ: &Economy, profile: &StrategyProfile, i: usize) -> Result<BestResponseSet> {
    if i >= econ.n() || profile.n() != econ.n() {
        return Err(Error::InvalidInput("player index or profile size out of range".into()));
    }
    let tol = econ.tolerances().indifference;
    let vals = contributions_excluding(profile, i);
    let all = scan_link_choices(econ, i, &vals, f64::NEG_INFINITY);
    let best = all.iter().map(|c| c.utility).fold(f64::NEG_INFINITY, f64::max);
    // More links first among ties, matching the sociable convention.
    let mut qualifying: Vec<&EtaClass> = all.iter().filter(|c| c.utility >= best - tol).collect();
    qualifying.sort_by(|a, b| b.eta.cmp(&a.eta));
    let mut strategies = Vec::new();
    let mut total: u128 = 0;
    for class in &qualifying {
        total = total.saturating_add(class.count);
        if strategies.len() < MAX_LISTED {
            for set in class.list_sets(MAX_LISTED - strategies.len()) {
                let spill: f64 = set.iter().map(|&j| profile.x[j]).sum();
                let (x, y, _, _) =
                    bundle_for(econ, i, set.len(), spill).expect("listed set is affordable");
                strategies.push(BrStrategy { links: set, x, y });
            }
        }
    }
    Ok(BestResponseSet {
        utility: best,
        strategies,
        total_count: total.max(1),
        unique_up_to_ties: qualifying.len() == 1,
    })
}

/// Verify the Nash, sociable and strict conditions for a profile.
///
/// Nash: every player attains her best-response utility within the
/// indifference tolerance. Sociable: additionally no player has an
/// unestablished link whose addition (with re-optimized consumption) leaves
/// her utility unchanged. Strict: every alternative link set loses strictly.
pub fn check_equilibrium(econ: &Economy, profile: &StrategyProfile) -> Result<EquilibriumVerdict> {
    let feas = validate_profile(econ, profile);
    if !feas.is_ok() {
        return Err(Error::InvalidInput(format!(
            "profile is infeasible: {:?}",
            feas.violations[0]
        )));
    }
    let n = econ.n();
    let tol = econ.tolerances().indifference;
    let report = consumption_report(econ, profile)?;

    let mut is_nash = true;
    let mut is_sociable = true;
    let mut is_strict = true;
    let mut witness: Option<DeviationWitness> = None;

    for i in 0..n {
        let u_cur = report.utility[i];
        let vals = contributions_excluding(profile, i);
        let classes = scan_link_choices(econ, i, &vals, u_cur - tol);
        let best = scan_link_choices(econ, i, &vals, f64::NEG_INFINITY)
            .iter()
            .map(|c| c.utility)
            .fold(f64::NEG_INFINITY, f64::max);
        if best > u_cur + tol {
            is_nash = false;
            is_sociable = false;
            is_strict = false;
            if witness.is_none() {
                let top = scan_link_choices(econ, i, &vals, best - tol);
                let class = &top[0];
                let set = class.list_sets(1).remove(0);
                witness = Some(DeviationWitness {
                    player: i,
                    strategy: BrStrategy { links: set, x: class.x, y: class.y },
                    utility_gain: best - u_cur,
                });
            }
            continue;
        }

        // Strict: among all choices within tolerance of the current payoff
        // there must be exactly one link set, and it must be the current one.
        let mut current = profile.links.out_neighbors(i);
        current.sort_unstable();
        let total: u128 = classes.iter().map(|c| c.count).sum();
        let strict_here = if total == 1 && classes.len() == 1 {
            classes[0].unique_set().map_or(false, |set| set == current)
        } else {
            false
        };
        if !strict_here {
            is_strict = false;
            if witness.is_none() && !classes.is_empty() {
                let class = &classes[0];
                let set = class.list_sets(1).remove(0);
                if set != current {
                    witness = Some(DeviationWitness {
                        player: i,
                        strategy: BrStrategy { links: set, x: class.x, y: class.y },
                        utility_gain: class.utility - u_cur,
                    });
                }
            }
        }

        // Sociable: adding any single unestablished link must strictly hurt.
        let eta = profile.links.out_degree(i);
        for j in 0..n {
            if j == i || profile.links.get(i, j) {
                continue;
            }
            let spill = report.spillovers[i] + profile.x[j];
            if let Some((x, y, _, u_add)) = bundle_for(econ, i, eta + 1, spill) {
                if u_add >= u_cur - tol {
                    is_sociable = false;
                    is_strict = false;
                    if witness.is_none() {
                        let mut links = profile.links.out_neighbors(i);
                        links.push(j);
                        links.sort_unstable();
                        witness = Some(DeviationWitness {
                            player: i,
                            strategy: BrStrategy { links, x, y },
                            utility_gain: u_add - u_cur,
                        });
                    }
                }
            }
        }
    }

    Ok(EquilibriumVerdict { is_nash, is_sociable, is_strict, witness })
}

/// Everyone consumes her isolation bundle on the empty network.
pub fn empty_profile(econ: &Economy) -> StrategyProfile {
    let n = econ.n();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let (xi, yi) = econ.player(i).isolation_bundle();
        x.push(xi);
        y.push(yi);
    }
    StrategyProfile { x, y, links: LinkProfile::empty(n) }
}

fn residual(econ: &Economy, g: &LinkProfile, x: &[f64]) -> f64 {
    let n = econ.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        let p = econ.player(i);
        let c = p.wealth - g.out_degree(i) as f64 * econ.k();
        let s: f64 = (0..n).filter(|&j| g.get(i, j)).map(|j| x[j]).sum();
        let target = (p.pref.demand_raw(p.price, (c + s).max(0.0)) - s).max(0.0).min(c.max(0.0));
        worst = worst.max((target - x[i]).abs());
    }
    worst
}

/// Exact solve for economies whose Engel curves are all linear through the
/// origin: iterate on the active set, solving the linear system exactly.
fn fixed_point_linear(econ: &Economy, g: &LinkProfile) -> Option<Vec<f64>> {
    let n = econ.n();
    let mut slopes = Vec::with_capacity(n);
    for i in 0..n {
        let p = econ.player(i);
        slopes.push(p.pref.linear_engel_slope(p.price)?);
    }
    let c: Vec<f64> = (0..n)
        .map(|i| (econ.player(i).wealth - g.out_degree(i) as f64 * econ.k()).max(0.0))
        .collect();
    let mut active: Vec<bool> = vec![true; n];
    for _round in 0..(6 * n + 6) {
        let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
        let m = idx.len();
        let mut x = vec![0.0; n];
        if m > 0 {
            let mut mat = nalgebra::DMatrix::<f64>::identity(m, m);
            let mut rhs = nalgebra::DVector::<f64>::zeros(m);
            for (r, &i) in idx.iter().enumerate() {
                rhs[r] = slopes[i] * c[i];
                for (col, &j) in idx.iter().enumerate() {
                    if g.get(i, j) {
                        mat[(r, col)] -= slopes[i] - 1.0;
                    }
                }
            }
            let sol = mat.lu().solve(&rhs)?;
            for (r, &i) in idx.iter().enumerate() {
                x[i] = sol[r];
            }
        }
        // Drop newly negative providers, bring back profitable ones.
        let mut changed = false;
        for i in 0..n {
            if active[i] && x[i] < -1e-12 {
                active[i] = false;
                changed = true;
            }
        }
        if !changed {
            for i in 0..n {
                if !active[i] {
                    let s: f64 = (0..n).filter(|&j| g.get(i, j)).map(|j| x[j]).sum();
                    if slopes[i] * (c[i] + s) - s > 1e-12 {
                        active[i] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            for xi in x.iter_mut() {
                if *xi < 0.0 {
                    *xi = 0.0;
                }
            }
            return Some(x);
        }
    }
    None
}

/// Solve the provision system for a fixed network. Linear Engel curves get
/// an exact active-set solve; anything else runs a damped Jacobi iteration.
/// Jacobi keeps identical players identical, which pins down the symmetric
/// point when flat Engel curves admit a continuum of solutions.
pub fn consumption_fixed_point(econ: &Economy, g: &LinkProfile) -> Result<StrategyProfile> {
    let n = econ.n();
    if g.n() != n {
        return Err(Error::InvalidInput("network size does not match economy".into()));
    }
    for i in 0..n {
        if econ.player(i).wealth - g.out_degree(i) as f64 * econ.k() < -1e-12 {
            return Err(Error::InvalidInput(format!(
                "player {i} cannot afford {} links",
                g.out_degree(i)
            )));
        }
    }
    let tol = econ.tolerances().fixpoint;

    if let Some(x) = fixed_point_linear(econ, g) {
        if residual(econ, g, &x) <= tol.max(1e-9) {
            return Ok(finish_profile(econ, g, x));
        }
    }

    // Damped Jacobi with adaptive damping.
    let c: Vec<f64> = (0..n)
        .map(|i| (econ.player(i).wealth - g.out_degree(i) as f64 * econ.k()).max(0.0))
        .collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| econ.player(i).pref.demand_raw(econ.player(i).price, c[i]))
        .collect();
    let mut theta = 0.5;
    let mut prev = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        let mut target = vec![0.0; n];
        let mut r = 0.0f64;
        for i in 0..n {
            let p = econ.player(i);
            let s: f64 = (0..n).filter(|&j| g.get(i, j)).map(|j| x[j]).sum();
            let t = (p.pref.demand_raw(p.price, (c[i] + s).max(0.0)) - s).max(0.0).min(c[i]);
            target[i] = t;
            r = r.max((t - x[i]).abs());
        }
        if r <= tol {
            return Ok(finish_profile(econ, g, target));
        }
        if r > prev && theta > 0.01 {
            theta *= 0.5;
        }
        prev = r;
        for i in 0..n {
            x[i] = (1.0 - theta) * x[i] + theta * target[i];
        }
        if sweep == MAX_SWEEPS - 1 {
            return Err(Error::NonConvergence { residual: r, sweeps: MAX_SWEEPS });
        }
    }
    unreachable!()
}

fn finish_profile(econ: &Economy, g: &LinkProfile, x: Vec<f64>) -> StrategyProfile {
    let n = econ.n();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let p = econ.player(i);
            ((p.wealth - x[i] - g.out_degree(i) as f64 * econ.k()) / p.price).max(0.0)
        })
        .collect();
    StrategyProfile { x, y, links: g.clone() }
}

/// One equilibrium found by enumeration, with its verification verdict.
#[derive(Debug, Clone)]
pub struct FoundEquilibrium {
    pub profile: StrategyProfile,
    pub verdict: EquilibriumVerdict,
}

/// Equilibria plus their grouping into relabeling classes.
#[derive(Debug, Clone)]
pub struct EnumerationResult {
    pub equilibria: Vec<FoundEquilibrium>,
    /// Indices into `equilibria`; profiles in one class map onto each other
    /// under permutations of identical players.
    pub symmetry_classes: Vec<Vec<usize>>,
}

fn bit_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out.sort_unstable();
    out
}

fn canonical_key(profile: &StrategyProfile, perms: &[Vec<usize>]) -> (Vec<bool>, Vec<i64>) {
    let n = profile.n();
    let mut best: Option<(Vec<bool>, Vec<i64>)> = None;
    for perm in perms {
        let mut adj = vec![false; n * n];
        let mut xq = vec![0i64; n];
        for i in 0..n {
            xq[perm[i]] = (profile.x[i] * 1e6).round() as i64;
            for j in 0..n {
                if i != j && profile.links.get(i, j) {
                    adj[perm[i] * n + perm[j]] = true;
                }
            }
        }
        let key = (adj, xq);
        if best.as_ref().map_or(true, |b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap()
}

/// Solve every directed network on `n <= 5` players and keep the profiles
/// passing the requested refinement. Exact duplicates cannot arise (each
/// network is visited once); relabelings of identical players are kept and
/// reported in symmetry classes.
pub fn enumerate_equilibria(econ: &Economy, refinement: Refinement) -> Result<EnumerationResult> {
    let n = econ.n();
    if n > MAX_ENUM_PLAYERS {
        return Err(Error::SizeGuard { n, max: MAX_ENUM_PLAYERS });
    }
    let pairs = bit_pairs(n);
    let bits = pairs.len();
    let total: u64 = 1u64 << bits;

    let mut found: Vec<(u64, FoundEquilibrium)> = (0..total)
        .into_par_iter()
        .filter_map(|mask| {
            let mut g = LinkProfile::empty(n);
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    g.set(i, j, true).ok()?;
                }
            }
            for i in 0..n {
                if econ.player(i).wealth - g.out_degree(i) as f64 * econ.k() < 0.0 {
                    return None;
                }
            }
            let profile = consumption_fixed_point(econ, &g).ok()?;
            let verdict = check_equilibrium(econ, &profile).ok()?;
            if verdict.passes(refinement) {
                Some((mask, FoundEquilibrium { profile, verdict }))
            } else {
                None
            }
        })
        .collect();
    found.sort_by_key(|(mask, _)| *mask);
    let equilibria: Vec<FoundEquilibrium> = found.into_iter().map(|(_, f)| f).collect();

    // Group by canonical form under permutations that preserve player types.
    let type_of = |i: usize| {
        let p = econ.player(i);
        (p.pref.type_key(), p.wealth.to_bits(), p.price.to_bits())
    };
    let perms: Vec<Vec<usize>> = permutations(n)
        .into_iter()
        .filter(|perm| (0..n).all(|i| type_of(i) == type_of(perm[i])))
        .collect();
    let mut classes: Vec<((Vec<bool>, Vec<i64>), Vec<usize>)> = Vec::new();
    for (idx, eq) in equilibria.iter().enumerate() {
        let key = canonical_key(&eq.profile, &perms);
        match classes.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(idx),
            None => classes.push((key, vec![idx])),
        }
    }
    Ok(EnumerationResult {
        equilibria,
        symmetry_classes: classes.into_iter().map(|(_, m)| m).collect(),
    })
}

/// A reciprocated-core candidate: members, their common public consumption,
/// their provisions, and the assembled full profile.
#[derive(Debug, Clone)]
pub struct CoreCandidate {
    pub members: Vec<usize>,
    pub core_consumption: f64,
    /// Provisions aligned with `members`.
    pub provisions: Vec<f64>,
    pub profile: StrategyProfile,
}

/// Solve the aggregate core-consumption equation
/// `Σ_{i∈D} φ_i(x̄) + (1-|D|)·x̄ = Σ_{i∈D} w_i - |D|(|D|-1)k`
/// for `x̄`. The left side is strictly increasing, so bisection applies.
fn solve_core_consumption(econ: &Economy, members: &[usize]) -> Result<f64> {
    let d = members.len() as f64;
    let k = econ.k();
    let rhs: f64 = members.iter().map(|&i| econ.player(i).wealth).sum::<f64>() - d * (d - 1.0) * k;
    if members.len() == 1 {
        let p = econ.player(members[0]);
        return Ok(p.pref.demand_raw(p.price, p.wealth));
    }
    if rhs <= 0.0 {
        return Err(Error::NoCoreRoot);
    }
    let f = |xbar: f64| -> f64 {
        let mut acc = (1.0 - d) * xbar;
        for &i in members {
            let p = econ.player(i);
            match p.pref.engel_inverse(p.price, xbar) {
                Ok(phi) => acc += phi,
                Err(_) => return f64::INFINITY,
            }
        }
        acc
    };
    let mut lo = 0.0;
    let mut hi = rhs.max(1.0);
    if f(hi) < rhs {
        return Err(Error::NoCoreRoot);
    }
    for _ in 0..250 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xbar = 0.5 * (lo + hi);
    let fx = f(xbar);
    if !fx.is_finite() || (fx - rhs).abs() > 1e-6 * rhs.abs().max(1.0) {
        return Err(Error::NoCoreRoot);
    }
    Ok(xbar)
}

/// Best link choice for player `i` over the restricted target list. Ties
/// within the indifference tolerance resolve toward more links, mirroring
/// the sociable refinement.
fn attach_best(econ: &Economy, i: usize, targets: &[(usize, f64)]) -> BrStrategy {
    let classes = scan_link_choices(econ, i, targets, f64::NEG_INFINITY);
    let best = classes.iter().map(|c| c.utility).fold(f64::NEG_INFINITY, f64::max);
    let tol = econ.tolerances().indifference;
    let class = classes
        .iter()
        .filter(|c| c.utility >= best - tol)
        .max_by_key(|c| c.eta)
        .expect("link count zero is always feasible");
    let links = class.list_sets(1).remove(0);
    let spill: f64 = links
        .iter()
        .map(|&j| targets.iter().find(|(t, _)| *t == j).unwrap().1)
        .sum();
    let (x, y, _, _) = bundle_for(econ, i, links.len(), spill).unwrap();
    BrStrategy { links, x, y }
}

fn assemble_core_profile(econ: &Economy, members: &[usize], provisions: &[f64]) -> StrategyProfile {
    let n = econ.n();
    let mut g = LinkProfile::empty(n);
    for &i in members {
        for &j in members {
            if i != j {
                g.set(i, j, true).unwrap();
            }
        }
    }
    let mut x = vec![0.0; n];
    for (pos, &i) in members.iter().enumerate() {
        x[i] = provisions[pos];
    }
    let targets: Vec<(usize, f64)> =
        members.iter().enumerate().map(|(pos, &i)| (i, provisions[pos])).collect();
    for z in 0..n {
        if members.contains(&z) {
            continue;
        }
        let br = attach_best(econ, z, &targets);
        for &t in &br.links {
            g.set(z, t, true).unwrap();
        }
        x[z] = br.x;
    }
    finish_profile(econ, &g, x)
}

fn build_core_candidate(econ: &Economy, members: &[usize]) -> Result<CoreCandidate> {
    let n = econ.n();
    if members.is_empty() {
        return Err(Error::InvalidInput("core member set is empty".into()));
    }
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != members.len() || *sorted.last().unwrap() >= n {
        return Err(Error::InvalidInput("core member set has duplicates or bad indices".into()));
    }
    let d = sorted.len();
    let k = econ.k();
    let xbar = solve_core_consumption(econ, &sorted)?;
    let mut provisions = Vec::with_capacity(d);
    for &i in &sorted {
        let p = econ.player(i);
        let x_i = if d == 1 {
            xbar
        } else {
            let phi = p
                .pref
                .engel_inverse(p.price, xbar)
                .map_err(|_| Error::NoCoreRoot)?;
            xbar - phi + p.wealth - (d as f64 - 1.0) * k
        };
        if x_i < k - econ.tolerances().indifference {
            return Err(Error::CoreProvisionBelowCost { player: i, provision: x_i, cost: k });
        }
        provisions.push(x_i.max(0.0));
    }
    let profile = assemble_core_profile(econ, &sorted, &provisions);
    Ok(CoreCandidate { members: sorted, core_consumption: xbar, provisions, profile })
}

/// Build the equilibrium candidate with reciprocated core `members`:
/// solve the aggregate consumption equation, recover member provisions,
/// attach the remaining players by best response, and verify the result.
pub fn core_construction(econ: &Economy, members: &[usize]) -> Result<CoreCandidate> {
    let candidate = build_core_candidate(econ, members)?;
    let verdict = check_equilibrium(econ, &candidate.profile)?;
    if !verdict.is_nash {
        let w = verdict.witness.as_ref();
        return Err(Error::CandidateNotEquilibrium {
            player: w.map_or(0, |w| w.player),
            gain: w.map_or(0.0, |w| w.utility_gain),
        });
    }
    Ok(candidate)
}

/// Grow a core from the richest player downward, adding the richest
/// periphery player while her provision stays at or above the linking cost.
/// Requires identical preferences and prices.
pub fn recursive_construction(econ: &Economy) -> Result<StrategyProfile> {
    if !econ.is_homogeneous() {
        return Err(Error::Heterogeneous);
    }
    let n = econ.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        econ.player(b)
            .wealth
            .partial_cmp(&econ.player(a).wealth)
            .unwrap()
            .then(a.cmp(&b))
    });
    let richest = order[0];
    let tol = econ.tolerances().indifference;

    // Would anyone link to the richest player at her isolation provision?
    let x_top = econ.player(richest).isolation_bundle().0;
    let empty = empty_profile(econ);
    let anyone_links = (0..n).filter(|&z| z != richest).any(|z| {
        let u_aut = econ
            .player(z)
            .pref
            .utility_raw(empty.x[z] /* own isolation demand */ , empty.y[z]);
        match bundle_for(econ, z, 1, x_top) {
            Some((_, _, _, u_link)) => u_link >= u_aut - tol,
            None => false,
        }
    });
    if !anyone_links {
        let verdict = check_equilibrium(econ, &empty)?;
        if !verdict.is_nash {
            return Err(Error::ConstructionFailed(
                "empty network candidate failed verification".into(),
            ));
        }
        return Ok(empty);
    }

    let mut members = vec![richest];
    let candidate = loop {
        let candidate = build_core_candidate(econ, &members)?;
        // Richest periphery player still providing at least k joins the core.
        let joiner = order
            .iter()
            .copied()
            .filter(|z| !members.contains(z))
            .find(|&z| candidate.profile.x[z] >= econ.k() - 1e-9);
        match joiner {
            Some(z) if members.len() < n => {
                members.push(z);
                members.sort_unstable();
            }
            _ => break candidate,
        }
    };
    let verdict = check_equilibrium(econ, &candidate.profile)?;
    if !verdict.is_nash {
        let w = verdict.witness.as_ref();
        return Err(Error::CandidateNotEquilibrium {
            player: w.map_or(0, |w| w.player),
            gain: w.map_or(0.0, |w| w.utility_gain),
        });
    }
    Ok(candidate.profile)
}

/// Constructive equilibrium for any economy: the recursive core growth when
/// players are identical, otherwise a search over reciprocated-core
/// candidates ordered by size and total wealth.
pub fn solve_equilibrium(econ: &Economy) -> Result<StrategyProfile> {
    if econ.is_homogeneous() {
        return recursive_construction(econ);
    }
    let n = econ.n();
    if n > MAX_SEARCH_PLAYERS {
        return Err(Error::SizeGuard { n, max: MAX_SEARCH_PLAYERS });
    }
    let mut subsets: Vec<Vec<usize>> = (1u64..(1 << n)).map(|mask| {
        (0..n).filter(|&i| mask >> i & 1 == 1).collect()
    }).collect();
    let wealth_of = |s: &Vec<usize>| -> f64 { s.iter().map(|&i| econ.player(i).wealth).sum() };
    subsets.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then(wealth_of(b).partial_cmp(&wealth_of(a)).unwrap())
            .then(a.cmp(b))
    });
    for members in &subsets {
        if let Ok(candidate) = core_construction(econ, members) {
            return Ok(candidate.profile);
        }
    }
    let empty = empty_profile(econ);
    match check_equilibrium(econ, &empty) {
        Ok(v) if v.is_nash => Ok(empty),
        _ => Err(Error::ConstructionFailed(
            "no reciprocated-core candidate or empty network verified as an equilibrium".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{Player, Preference};

    fn econ(prefs: Vec<(f64, Preference)>, k: f64) -> Economy {
        let players = prefs
            .into_iter()
            .map(|(w, pref)| Player::new(w, 1.0, pref).unwrap())
            .collect();
        Economy::new(players, k).unwrap()
    }

    fn sqrt_triangle() -> Economy {
        // Saturating preferences with caps (4, 3, 3), equal wealth 5, k = 1.
        let b23 = 2.0 * 3.0f64.sqrt();
        econ(
            vec![
                (5.0, Preference::SqrtAdditive { b: 4.0 }),
                (5.0, Preference::SqrtAdditive { b: b23 }),
                (5.0, Preference::SqrtAdditive { b: b23 }),
            ],
            1.0,
        )
    }

    fn steep_triangle(k: f64) -> Economy {
        econ(
            vec![
                (10.0, Preference::CobbDouglas { a: 0.99 }),
                (8.0, Preference::CobbDouglas { a: 0.99 }),
                (8.0, Preference::CobbDouglas { a: 0.99 }),
            ],
            k,
        )
    }

    fn four_player() -> Economy {
        econ(
            vec![
                (10.0, Preference::CobbDouglas { a: 0.5 }),
                (9.0, Preference::CobbDouglas { a: 0.5 }),
                (8.0, Preference::CobbDouglas { a: 0.5 }),
                (4.0, Preference::CobbDouglas { a: 0.5 }),
            ],
            1.0,
        )
    }

    fn star_on(n: usize, hub: usize) -> LinkProfile {
        let edges: Vec<(usize, usize)> =
            (0..n).filter(|&i| i != hub).map(|i| (i, hub)).collect();
        LinkProfile::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn best_response_in_sqrt_star() {
        let econ = sqrt_triangle();
        let profile =
            consumption_fixed_point(&econ, &star_on(3, 0)).expect("fixed point");
        assert!((profile.x[0] - 4.0).abs() < 1e-9);
        let br = best_response(&econ, &profile, 1).unwrap();
        assert_eq!(br.total_count, 1);
        assert!(br.unique_up_to_ties);
        assert_eq!(br.strategies[0].links, vec![0]);
        assert!(br.strategies[0].x.abs() < 1e-9);
        assert!((br.strategies[0].y - 4.0).abs() < 1e-9);
    }

    #[test]
    fn best_response_isolates_when_links_unaffordable() {
        let e = econ(
            vec![
                (10.0, Preference::CobbDouglas { a: 0.5 }),
                (2.0, Preference::CobbDouglas { a: 0.5 }),
            ],
            3.0,
        );
        let profile = consumption_fixed_point(&e, &LinkProfile::empty(2)).unwrap();
        let br = best_response(&e, &profile, 1).unwrap();
        assert_eq!(br.strategies[0].links, Vec::<usize>::new());
        assert!((br.strategies[0].x - 1.0).abs() < 1e-9);
    }

    #[test]
    fn best_response_links_to_both_cores() {
        // Two-core profile of the steep triangle: player 3 free rides on both.
        let e = steep_triangle(3.95);
        let g = LinkProfile::from_edges(3, &[(0, 1), (1, 0), (2, 0), (2, 1)]).unwrap();
        let profile = consumption_fixed_point(&e, &g).unwrap();
        assert!((profile.x[0] - 5.95).abs() < 1e-6);
        assert!((profile.x[1] - 3.95).abs() < 1e-6);
        let br = best_response(&e, &profile, 2).unwrap();
        assert_eq!(br.strategies[0].links, vec![0, 1]);
        assert!(br.strategies[0].x.abs() < 1e-9);
        assert!((br.strategies[0].y - 0.1).abs() < 1e-6);
    }

    #[test]
    fn sqrt_star_is_strict() {
        let econ = sqrt_triangle();
        let profile = consumption_fixed_point(&econ, &star_on(3, 0)).unwrap();
        let v = check_equilibrium(&econ, &profile).unwrap();
        assert!(v.is_nash && v.is_sociable && v.is_strict);
    }

    #[test]
    fn steep_triangle_profiles_are_nash() {
        let e = steep_triangle(3.95);
        let nets = [
            star_on(3, 0),
            LinkProfile::from_edges(3, &[(0, 1), (1, 0), (2, 0), (2, 1)]).unwrap(),
            LinkProfile::from_edges(3, &[(1, 2), (2, 1), (0, 1), (0, 2)]).unwrap(),
        ];
        for g in nets {
            let profile = consumption_fixed_point(&e, &g).unwrap();
            let v = check_equilibrium(&e, &profile).unwrap();
            assert!(v.is_nash, "witness: {:?}", v.witness);
        }
    }

    #[test]
    fn empty_network_nash_when_cost_exceeds_all_demands() {
        let e = econ(
            vec![
                (4.0, Preference::CobbDouglas { a: 0.5 }),
                (4.0, Preference::CobbDouglas { a: 0.5 }),
            ],
            3.0,
        );
        let profile = empty_profile(&e);
        let v = check_equilibrium(&e, &profile).unwrap();
        assert!(v.is_nash);
    }

    #[test]
    fn fixed_point_four_player_core() {
        let e = four_player();
        let g =
            LinkProfile::from_edges(4, &[(0, 1), (1, 0), (2, 0), (2, 1), (3, 0)]).unwrap();
        let profile = consumption_fixed_point(&e, &g).unwrap();
        let expect = [10.0 / 3.0, 7.0 / 3.0, 1.0 / 6.0, 0.0];
        for (got, want) in profile.x.iter().zip(expect) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn fixed_point_empty_gives_isolation() {
        let e = four_player();
        let profile = consumption_fixed_point(&e, &LinkProfile::empty(4)).unwrap();
        for i in 0..4 {
            assert!((profile.x[i] - e.player(i).isolation_bundle().0).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_mutual_pair_with_sponsor() {
        let e = steep_triangle(3.95);
        let g = LinkProfile::from_edges(3, &[(1, 2), (2, 1), (0, 1), (0, 2)]).unwrap();
        let profile = consumption_fixed_point(&e, &g).unwrap();
        assert!((profile.x[0] - 2.0).abs() < 1e-2);
        assert!((profile.x[1] - 3.97).abs() < 1e-2);
        assert!((profile.x[2] - 3.97).abs() < 1e-2);
    }

    #[test]
    fn fixed_point_symmetric_on_flat_engel_pair() {
        // Saturating demands admit a continuum on a reciprocated pair; the
        // Jacobi path must settle on the symmetric split.
        let b23 = 2.0 * 3.0f64.sqrt();
        let e = econ(
            vec![
                (1.5, Preference::SqrtAdditive { b: 4.0 }),
                (5.0, Preference::SqrtAdditive { b: b23 }),
                (5.0, Preference::SqrtAdditive { b: b23 }),
            ],
            1.0,
        );
        let g = LinkProfile::from_edges(3, &[(0, 1), (1, 2), (2, 1)]).unwrap();
        let profile = consumption_fixed_point(&e, &g).unwrap();
        assert!((profile.x[0] - 0.5).abs() < 1e-8);
        assert!((profile.x[1] - 1.5).abs() < 1e-8);
        assert!((profile.x[2] - 1.5).abs() < 1e-8);
        assert!((profile.y[1] - 2.5).abs() < 1e-8);
    }

    #[test]
    fn enumeration_guard() {
        let e = econ(vec![(5.0, Preference::CobbDouglas { a: 0.5 }); 6], 1.0);
        assert!(matches!(
            enumerate_equilibria(&e, Refinement::Nash),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn steep_triangle_enumeration_matches_known_classes() {
        let e = steep_triangle(3.95);
        let res = enumerate_equilibria(&e, Refinement::Nash).unwrap();
        assert_eq!(res.symmetry_classes.len(), 3, "{:#?}", res.equilibria.len());
        // Lower costs collapse the set: first to the two-member core, then
        // to the complete core.
        let res = enumerate_equilibria(&steep_triangle(3.0), Refinement::Nash).unwrap();
        assert_eq!(res.symmetry_classes.len(), 1);
        let eq = &res.equilibria[0];
        assert_eq!(eq.profile.links.edges().len(), 4);
        let res = enumerate_equilibria(&steep_triangle(2.0), Refinement::Nash).unwrap();
        assert_eq!(res.symmetry_classes.len(), 1);
        assert_eq!(res.equilibria[0].profile.links.edges().len(), 6);
    }

    #[test]
    fn core_construction_values() {
        let e = four_player();
        let cand = core_construction(&e, &[0, 1]).unwrap();
        assert!((cand.core_consumption - 17.0 / 3.0).abs() < 1e-8);

        let e = steep_triangle(3.95);
        // Singleton core consumption is the isolation demand of the member.
        let single = core_construction(&e, &[0]).unwrap();
        assert!((single.core_consumption - 9.9).abs() < 1e-10);

        let cand = core_construction(&e, &[0, 1]).unwrap();
        assert!((cand.core_consumption - 9.9).abs() < 1e-8);
        assert!((cand.provisions[0] - 5.95).abs() < 1e-6);
        assert!((cand.provisions[1] - 3.95).abs() < 1e-6);
    }

    #[test]
    fn recursive_construction_four_player() {
        let e = four_player();
        let profile = recursive_construction(&e).unwrap();
        // Core stabilizes at the two richest players.
        let expect = [10.0 / 3.0, 7.0 / 3.0, 1.0 / 6.0, 0.0];
        for (got, want) in profile.x.iter().zip(expect) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!(profile.links.get(0, 1) && profile.links.get(1, 0));
        assert!(!profile.links.get(0, 2));
    }

    #[test]
    fn recursive_construction_empty_when_cost_too_high() {
        let e = econ(vec![(4.0, Preference::CobbDouglas { a: 0.5 }); 3], 2.5);
        let profile = recursive_construction(&e).unwrap();
        assert!(profile.links.is_empty());
    }

    #[test]
    fn recursive_rejects_heterogeneous() {
        let e = econ(
            vec![
                (5.0, Preference::CobbDouglas { a: 0.5 }),
                (5.0, Preference::CobbDouglas { a: 0.6 }),
            ],
            1.0,
        );
        assert!(matches!(recursive_construction(&e), Err(Error::Heterogeneous)));
    }

    #[test]
    fn solve_heterogeneous_sqrt_triangle() {
        let e = sqrt_triangle();
        let profile = solve_equilibrium(&e).unwrap();
        assert_eq!(profile.links.edges(), vec![(1, 0), (2, 0)]);
        assert!((profile.x[0] - 4.0).abs() < 1e-9);
        assert!((profile.y[0] - 1.0).abs() < 1e-9);
    }
}
