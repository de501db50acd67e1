//! Welfare accounting, the efficient allocation, redistribution instruments
//! (welfare-improving transfers, welfare-maximizing weights, personalized
//! prices), inequality diagnostics and the core-share scaling experiment.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::econ::{
    consumption_report, validate_profile, Economy, LinkProfile, Player, StrategyProfile,
};
use crate::equilibrium::{
    check_equilibrium, empty_profile, recursive_construction, solve_equilibrium,
};
use crate::error::{Error, Result};
use crate::graph::classify_core_periphery;

/// Social welfare: the sum of individual payoffs.
pub fn welfare(econ: &Economy, profile: &StrategyProfile) -> Result<f64> {
    Ok(consumption_report(econ, profile)?.total_welfare())
}

// ---------------------------------------------------------------------------
// Efficient allocation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EfficientShape {
    /// No links: every player consumes an individually assigned bundle.
    Empty,
    /// A star whose hub is the only active member; non-members are isolated.
    Star { hub: usize, members: Vec<usize>, isolated: Vec<usize> },
}

/// Planner optimum: per-player provisions and private consumption, the
/// shadow value of the pooled budget, and attained welfare.
#[derive(Debug, Clone)]
pub struct EfficientSolution {
    pub shape: EfficientShape,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub shadow_value: f64,
    pub welfare: f64,
}

impl EfficientSolution {
    pub fn hub_provision(&self) -> f64 {
        match &self.shape {
            EfficientShape::Star { hub, .. } => self.x[*hub],
            EfficientShape::Empty => 0.0,
        }
    }
}

/// Marginal value of one more unit of money for a participant of the
/// planner's allocation problem.
#[derive(Clone, Copy)]
enum Claim {
    /// A star member's private budget; public consumption is fixed at `x`.
    MemberY { i: usize, x: f64 },
    /// An isolated player's whole budget, spent at her own optimum.
    Isolated { i: usize },
    /// A spoke's whole budget: one link plus free riding on `x_hub`.
    Spoke { i: usize, x_hub: f64, k: f64 },
}

impl Claim {
    fn bundle(&self, econ: &Economy, m: f64) -> (f64, f64) {
        match *self {
            Claim::MemberY { i, x } => (x, m / econ.player(i).price),
            Claim::Isolated { i } => {
                let p = econ.player(i);
                let x = p.pref.demand_raw(p.price, m);
                (x, (m - x).max(0.0) / p.price)
            }
            Claim::Spoke { i, x_hub, k } => {
                let p = econ.player(i);
                let rest = (m - k).max(0.0);
                let d = p.pref.demand_raw(p.price, rest + x_hub);
                let own = (d - x_hub).max(0.0).min(rest);
                (x_hub + own, (rest - own).max(0.0) / p.price)
            }
        }
    }

    fn player(&self) -> usize {
        match *self {
            Claim::MemberY { i, .. } | Claim::Isolated { i } | Claim::Spoke { i, .. } => i,
        }
    }

    fn value(&self, econ: &Economy, m: f64) -> f64 {
        let i = self.player();
        let (xb, y) = self.bundle(econ, m);
        econ.player(i).pref.utility_raw(xb, y)
    }

    /// Envelope marginal: utility of the last unit of money.
    fn marginal(&self, econ: &Economy, m: f64) -> f64 {
        let i = self.player();
        let p = econ.player(i);
        let (xb, y) = self.bundle(econ, m);
        if y > 1e-12 {
            p.pref.du_dy(xb, y) / p.price
        } else {
            // All money flows into the public good at this corner.
            p.pref.du_dx(xb.max(1e-12), 0.0).min(1e18)
        }
    }
}

struct Capped {
    claim: Claim,
    lo: f64,
    hi: f64,
}

fn money_at_lambda(econ: &Economy, c: &Capped, lambda: f64, budget: f64) -> f64 {
    let hi = c.hi.min(budget);
    if hi <= c.lo {
        return c.lo;
    }
    if c.claim.marginal(econ, hi) >= lambda {
        return hi;
    }
    if c.claim.marginal(econ, c.lo.max(1e-12)) <= lambda {
        return c.lo;
    }
    let (mut lo, mut hi) = (c.lo, hi);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if c.claim.marginal(econ, mid) > lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Split `budget` across claims to equalize marginal utility of money,
/// respecting per-claim bounds. Returns the split and the water level.
fn allocate(econ: &Economy, claims: &[Capped], budget: f64) -> Option<(Vec<f64>, f64)> {
    let lo_sum: f64 = claims.iter().map(|c| c.lo).sum();
    let hi_sum: f64 = claims.iter().map(|c| c.hi.min(budget)).sum();
    if lo_sum > budget + 1e-9 || hi_sum < budget - 1e-9 {
        return None;
    }
    if claims.is_empty() {
        return if budget.abs() <= 1e-9 { Some((Vec::new(), 0.0)) } else { None };
    }
    let total_at = |lambda: f64| -> f64 {
        claims.iter().map(|c| money_at_lambda(econ, c, lambda, budget)).sum()
    };
    let mut lam_lo = 1e-12;
    let mut lam_hi = 1.0;
    let mut tries = 0;
    while total_at(lam_hi) > budget && tries < 200 {
        lam_hi *= 4.0;
        tries += 1;
    }
    while total_at(lam_lo) < budget && lam_lo > 1e-300 {
        lam_lo /= 4.0;
    }
    for _ in 0..120 {
        let mid = 0.5 * (lam_lo + lam_hi);
        if total_at(mid) > budget {
            lam_lo = mid;
        } else {
            lam_hi = mid;
        }
    }
    // Evaluate on the scarce side (total <= budget) and fill the remainder:
    // flat value curves jump across the water level, so spread the residual
    // equally over claims sitting at the level, then greedily.
    let lambda = lam_hi;
    let mut money: Vec<f64> = claims
        .iter()
        .map(|c| money_at_lambda(econ, c, lambda, budget))
        .collect();
    let mut residual = budget - money.iter().sum::<f64>();
    if residual > 1e-15 {
        let at_level: Vec<usize> = (0..claims.len())
            .filter(|&idx| {
                let c = &claims[idx];
                let slack = c.hi.min(budget) - money[idx];
                slack > 1e-12
                    && (c.claim.marginal(econ, money[idx].max(1e-9)) - lambda).abs()
                        < 1e-6 * lambda.max(1e-12)
            })
            .collect();
        if !at_level.is_empty() {
            let share = residual / at_level.len() as f64;
            for idx in at_level {
                let room = claims[idx].hi.min(budget) - money[idx];
                money[idx] += share.min(room);
            }
            residual = budget - money.iter().sum::<f64>();
        }
        let mut idx = 0;
        while residual > 1e-12 && idx < claims.len() {
            let room = claims[idx].hi.min(budget) - money[idx];
            let add = room.min(residual).max(0.0);
            money[idx] += add;
            residual -= add;
            idx += 1;
        }
    }
    Some((money, lambda))
}

fn maximize_1d(mut lo: f64, mut hi: f64, grid: usize, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let mut best_x = lo;
    let mut best_v = f64::NEG_INFINITY;
    for s in 0..=grid {
        let x = lo + (hi - lo) * s as f64 / grid as f64;
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_x = x;
        }
    }
    let step = (hi - lo) / grid as f64;
    lo = (best_x - step).max(lo);
    hi = (best_x + step).min(hi);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..90 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Welfare of the best allocation for a fixed star membership, along with
/// the full bundle assignment.
fn solve_member_set(econ: &Economy, members: &[usize]) -> Option<EfficientSolution> {
    let n = econ.n();
    let total = econ.total_wealth();
    let isolated: Vec<usize> = (0..n).filter(|i| !members.contains(i)).collect();
    let budget = if members.is_empty() {
        total
    } else {
        total - (members.len() as f64 - 1.0) * econ.k()
    };
    if budget <= 0.0 {
        return None;
    }

    let claims_for = |x: f64| -> Vec<Capped> {
        let mut claims = Vec::with_capacity(n);
        for &i in members {
            claims.push(Capped { claim: Claim::MemberY { i, x }, lo: 0.0, hi: f64::INFINITY });
        }
        for &j in &isolated {
            claims.push(Capped { claim: Claim::Isolated { i: j }, lo: 0.0, hi: f64::INFINITY });
        }
        claims
    };

    let eval = |x: f64| -> f64 {
        let claims = claims_for(x);
        match allocate(econ, &claims, budget - x) {
            Some((money, _)) => claims
                .iter()
                .zip(&money)
                .map(|(c, &m)| c.claim.value(econ, m))
                .sum(),
            None => f64::NEG_INFINITY,
        }
    };

    let (x_star, welfare) = if members.is_empty() {
        (0.0, eval(0.0))
    } else {
        let (mut x_star, mut welfare) = maximize_1d(0.0, budget, 64, &eval);
        // Value search stalls where the objective flattens; sharpen the
        // optimum on the planner first-order condition when it brackets.
        let foc = |x: f64| -> Option<f64> {
            let claims = claims_for(x);
            let (money, lambda) = allocate(econ, &claims, budget - x)?;
            let mut marginal_value = 0.0;
            for (c, &m) in claims.iter().zip(&money) {
                if let Claim::MemberY { i, .. } = c.claim {
                    let p = econ.player(i);
                    marginal_value += p.pref.du_dx(x.max(1e-12), (m / p.price).max(1e-12));
                }
            }
            Some(marginal_value - lambda)
        };
        let delta = 1e-3 * budget;
        let lo = (x_star - delta).max(1e-9);
        let hi = (x_star + delta).min(budget - 1e-9);
        match (foc(lo), foc(hi)) {
            (Some(dlo), Some(dhi)) if dlo > 0.0 && dhi < 0.0 => {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    match foc(mid) {
                        Some(d) if d > 0.0 => a = mid,
                        Some(_) => b = mid,
                        None => break,
                    }
                }
                let x_ref = 0.5 * (a + b);
                let w_ref = eval(x_ref);
                if w_ref >= welfare - 1e-9 {
                    x_star = x_ref;
                    welfare = w_ref;
                }
            }
            _ => {}
        }
        (x_star, welfare)
    };
    if !welfare.is_finite() {
        return None;
    }
    let claims = claims_for(x_star);
    let (money, lambda) = allocate(econ, &claims, budget - x_star)?;

    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for (c, &m) in claims.iter().zip(&money) {
        let i = c.claim.player();
        let (xb, yi) = c.claim.bundle(econ, m);
        y[i] = yi;
        if matches!(c.claim, Claim::Isolated { .. }) {
            x[i] = xb;
        }
    }
    let shape = if members.is_empty() {
        EfficientShape::Empty
    } else {
        // The allocation does not depend on which member provides; pick the
        // member with the highest marginal valuation of the public good.
        let hub = *members
            .iter()
            .max_by(|&&a, &&b| {
                let pa = econ.player(a);
                let pb = econ.player(b);
                pa.pref
                    .du_dx(x_star.max(1e-12), y[a].max(1e-12))
                    .partial_cmp(&pb.pref.du_dx(x_star.max(1e-12), y[b].max(1e-12)))
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        x[hub] = x_star;
        EfficientShape::Star { hub, members: members.to_vec(), isolated: isolated.clone() }
    };
    Some(EfficientSolution { shape, x, y, shadow_value: lambda, welfare })
}

/// The planner's optimum: either a star with a single active hub or the
/// empty network, over a pooled budget. Member sets are scanned exhaustively
/// for up to five players and by greedy removal beyond that.
pub fn efficient_solution(econ: &Economy) -> Result<EfficientSolution> {
    let n = econ.n();
    let mut best: Option<EfficientSolution> = None;
    let mut consider = |cand: Option<EfficientSolution>| {
        if let Some(c) = cand {
            let better = match &best {
                None => true,
                Some(b) => {
                    c.welfare > b.welfare + 1e-9
                        || ((c.welfare - b.welfare).abs() <= 1e-9
                            && member_count(&c.shape) > member_count(&b.shape))
                }
            };
            if better {
                best = Some(c);
            }
        }
    };

    if n <= 5 {
        for mask in 0..(1u32 << n) {
            let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            consider(solve_member_set(econ, &members));
        }
    } else {
        consider(solve_member_set(econ, &[]));
        let mut members: Vec<usize> = (0..n).collect();
        let mut current = solve_member_set(econ, &members);
        consider(current.clone());
        loop {
            let mut improved = false;
            let base = current.as_ref().map_or(f64::NEG_INFINITY, |c| c.welfare);
            let mut best_drop: Option<(usize, EfficientSolution)> = None;
            for (pos, _) in members.iter().enumerate() {
                let mut reduced = members.clone();
                reduced.remove(pos);
                if let Some(sol) = solve_member_set(econ, &reduced) {
                    if sol.welfare > base + 1e-9
                        && best_drop.as_ref().map_or(true, |(_, b)| sol.welfare > b.welfare)
                    {
                        best_drop = Some((pos, sol));
                    }
                }
            }
            if let Some((pos, sol)) = best_drop {
                members.remove(pos);
                current = Some(sol.clone());
                consider(Some(sol));
                improved = true;
            }
            if !improved || members.is_empty() {
                break;
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible("planner problem has no feasible allocation".into()))
}

fn member_count(shape: &EfficientShape) -> usize {
    match shape {
        EfficientShape::Empty => 0,
        EfficientShape::Star { members, .. } => members.len(),
    }
}

// ---------------------------------------------------------------------------
// Transfers
// ---------------------------------------------------------------------------

/// A budget-balanced redistribution together with the equilibrium it
/// induces. `weights` and `beta` are present for the welfare-maximizing
/// variants.
#[derive(Debug, Clone)]
pub struct TransferScheme {
    pub transfers: Vec<f64>,
    pub hub: Option<usize>,
    pub weights: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub induced_economy: Option<Economy>,
    pub induced_profile: Option<StrategyProfile>,
    pub welfare_before: Option<f64>,
    pub welfare_after: f64,
}

fn slope_positive_everywhere(econ: &Economy) -> bool {
    (0..econ.n()).all(|i| {
        let p = econ.player(i);
        p.pref.engel_slope(p.price, p.wealth) > 1e-9
    })
}

/// Own-consumption bundle when sponsoring `eta` links that yield `spill`.
fn bundle(econ: &Economy, i: usize, eta: usize, spill: f64) -> Option<(f64, f64, f64)> {
    let p = econ.player(i);
    let rest = p.wealth - eta as f64 * econ.k();
    if rest < -1e-12 {
        return None;
    }
    let rest = rest.max(0.0);
    let d = p.pref.demand_raw(p.price, rest + spill);
    let x = (d - spill).max(0.0).min(rest);
    let y = ((rest - x) / p.price).max(0.0);
    Some((x, y, p.pref.utility_raw(x + spill, y)))
}

/// Assemble the star on `hub` where every other player links iff linking
/// weakly beats staying out (ties resolve to linking).
fn induced_star(econ: &Economy, hub: usize, x_hub: f64) -> StrategyProfile {
    let n = econ.n();
    let tol = econ.tolerances().indifference;
    let mut g = LinkProfile::empty(n);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let ph = econ.player(hub);
    x[hub] = x_hub;
    y[hub] = ((ph.wealth - x_hub) / ph.price).max(0.0);
    for i in 0..n {
        if i == hub {
            continue;
        }
        let stay = bundle(econ, i, 0, 0.0).unwrap();
        match bundle(econ, i, 1, x_hub) {
            Some(link) if link.2 >= stay.2 - tol => {
                g.set(i, hub, true).unwrap();
                x[i] = link.0;
                y[i] = link.1;
            }
            _ => {
                x[i] = stay.0;
                y[i] = stay.1;
            }
        }
    }
    StrategyProfile { x, y, links: g }
}

/// Redistribute toward the most-linked player: remaining core members
/// surrender their provisions and saved link costs, periphery players their
/// saved link costs, and the receiver becomes the hub of a star.
pub fn improving_transfers(econ: &Economy, eq: &StrategyProfile) -> Result<TransferScheme> {
    let feas = validate_profile(econ, eq);
    if !feas.is_ok() {
        return Err(Error::InvalidInput(format!("input profile infeasible: {:?}", feas.violations[0])));
    }
    if eq.links.is_empty() {
        return Err(Error::PreconditionViolated(
            "improving transfers need a non-empty equilibrium".into(),
        ));
    }
    if !slope_positive_everywhere(econ) {
        return Err(Error::PreconditionViolated(
            "improving transfers require strictly normal public good demand".into(),
        ));
    }
    let verdict = check_equilibrium(econ, eq)?;
    if !verdict.is_sociable {
        return Err(Error::PreconditionViolated(
            "input profile is not a sociable equilibrium".into(),
        ));
    }
    let n = econ.n();
    let tol = econ.tolerances().indifference;
    let gbar = crate::graph::closure(&eq.links);
    let hub = (0..n)
        .max_by(|&a, &b| {
            gbar.degree(a)
                .cmp(&gbar.degree(b))
                .then(eq.x[a].partial_cmp(&eq.x[b]).unwrap())
                .then(b.cmp(&a))
        })
        .unwrap();
    let core: Vec<usize> = (0..n).filter(|&i| eq.x[i] > econ.k() + tol).collect();

    let mut t = vec![0.0; n];
    for i in 0..n {
        if i == hub {
            continue;
        }
        let links_not_to_hub =
            eq.links.out_neighbors(i).iter().filter(|&&j| j != hub).count() as f64;
        t[i] = -econ.k() * links_not_to_hub;
        if core.contains(&i) {
            t[i] -= eq.x[i];
        }
    }
    t[hub] = -t.iter().enumerate().filter(|&(i, _)| i != hub).map(|(_, v)| v).sum::<f64>();

    let before = consumption_report(econ, eq)?;
    let new_econ = econ.with_transfers(&t)?;
    let ph = new_econ.player(hub);
    let x_hub = ph.pref.demand_raw(ph.price, ph.wealth);
    let profile = induced_star(&new_econ, hub, x_hub);

    let v = check_equilibrium(&new_econ, &profile)?;
    if !v.is_nash {
        return Err(Error::PolicyCheckFailed(format!(
            "induced star failed the equilibrium check (witness {:?})",
            v.witness.map(|w| w.player)
        )));
    }
    let after = consumption_report(&new_econ, &profile)?;
    for i in 0..n {
        if after.public_consumption[i] < before.public_consumption[i] - 1e-9 {
            return Err(Error::PolicyCheckFailed(format!(
                "public consumption of player {i} fell ({:.6} -> {:.6})",
                before.public_consumption[i], after.public_consumption[i]
            )));
        }
    }
    let w_before = before.total_welfare();
    let w_after = after.total_welfare();
    if w_after < w_before - 1e-9 {
        return Err(Error::PolicyCheckFailed(format!(
            "welfare fell ({w_before:.6} -> {w_after:.6})"
        )));
    }
    Ok(TransferScheme {
        transfers: t,
        hub: Some(hub),
        weights: None,
        beta: None,
        induced_economy: Some(new_econ),
        induced_profile: Some(profile),
        welfare_before: Some(w_before),
        welfare_after: w_after,
    })
}

// ---------------------------------------------------------------------------
// Second best
// ---------------------------------------------------------------------------

struct HubSolution {
    money: Vec<f64>,
    isolated: Vec<usize>,
    welfare: f64,
}

/// Best wealth shares for a star on `hub` with the given isolated set.
fn optimize_hub(
    econ: &Economy,
    hub: usize,
    isolated: &[usize],
) -> Option<HubSolution> {
    let n = econ.n();
    let total = econ.total_wealth();
    let k = econ.k();
    let ph = econ.player(hub);
    let spokes: Vec<usize> =
        (0..n).filter(|&i| i != hub && !isolated.contains(&i)).collect();

    let hub_min = if n == 1 || k == 0.0 {
        0.0
    } else {
        match ph.pref.engel_inverse(ph.price, k) {
            Ok(m) => m,
            Err(_) => return None,
        }
    };
    let hub_max = total - k * spokes.len() as f64 - 1e-9 * total * isolated.len() as f64;
    if hub_min > hub_max {
        return None;
    }

    let claims_for = |x_hub: f64| -> Vec<Capped> {
        let mut claims = Vec::new();
        for &j in &spokes {
            let pj = econ.player(j);
            // Money cap enforcing that a spoke never provides more than k.
            let hi = match pj.pref.engel_inverse(pj.price, x_hub + k) {
                Ok(phi) => phi + k - x_hub,
                Err(_) => f64::INFINITY,
            };
            claims.push(Capped { claim: Claim::Spoke { i: j, x_hub, k }, lo: k, hi });
        }
        for &j in isolated {
            claims.push(Capped {
                claim: Claim::Isolated { i: j },
                lo: 1e-9 * total,
                hi: f64::INFINITY,
            });
        }
        claims
    };

    let eval = |m_hub: f64| -> f64 {
        let x_hub = ph.pref.demand_raw(ph.price, m_hub);
        let hub_value = ph.pref.utility_raw(x_hub, (m_hub - x_hub).max(0.0) / ph.price);
        let claims = claims_for(x_hub);
        match allocate(econ, &claims, total - m_hub) {
            Some((money, _)) => {
                hub_value
                    + claims
                        .iter()
                        .zip(&money)
                        .map(|(c, &m)| c.claim.value(econ, m))
                        .sum::<f64>()
            }
            None => f64::NEG_INFINITY,
        }
    };

    let (m_hub, w) = maximize_1d(hub_min, hub_max, 96, &eval);
    if !w.is_finite() {
        return None;
    }
    let x_hub = ph.pref.demand_raw(ph.price, m_hub);
    let claims = claims_for(x_hub);
    let (alloc, _) = allocate(econ, &claims, total - m_hub)?;
    let mut money = vec![0.0; n];
    money[hub] = m_hub;
    for (c, &m) in claims.iter().zip(&alloc) {
        money[c.claim.player()] = m;
    }
    Some(HubSolution { money, isolated: isolated.to_vec(), welfare: w })
}

/// Move spokes that would rather be isolated out of the star, then re-solve.
fn optimize_hub_with_participation(econ: &Economy, hub: usize) -> Option<HubSolution> {
    let tol = econ.tolerances().indifference;
    let k = econ.k();
    let ph = econ.player(hub);
    let mut isolated: Vec<usize> = Vec::new();
    for _ in 0..econ.n() {
        let sol = optimize_hub(econ, hub, &isolated)?;
        let x_hub = ph.pref.demand_raw(ph.price, sol.money[hub]);
        let mut defector = None;
        for i in 0..econ.n() {
            if i == hub || isolated.contains(&i) {
                continue;
            }
            let spoke = Claim::Spoke { i, x_hub, k };
            let alone = Claim::Isolated { i };
            if alone.value(econ, sol.money[i]) > spoke.value(econ, sol.money[i]) + tol {
                defector = Some(i);
                break;
            }
        }
        match defector {
            Some(i) => isolated.push(i),
            None => return Some(sol),
        }
    }
    None
}

/// Welfare-maximizing budget-balanced wealth shares that support a star,
/// searched over candidate hubs (or the given one).
pub fn second_best(econ: &Economy, hub: Option<usize>) -> Result<TransferScheme> {
    let n = econ.n();
    if let Some(h) = hub {
        if h >= n {
            return Err(Error::InvalidInput(format!("hub index {h} out of range")));
        }
    }
    if n == 1 {
        let profile = empty_profile(econ);
        let w = welfare(econ, &profile)?;
        return Ok(TransferScheme {
            transfers: vec![0.0],
            hub: Some(0),
            weights: Some(vec![1.0]),
            beta: None,
            induced_economy: Some(econ.clone()),
            induced_profile: Some(profile),
            welfare_before: Some(w),
            welfare_after: w,
        });
    }
    if !slope_positive_everywhere(econ) {
        return Err(Error::PreconditionViolated(
            "welfare-maximizing transfers require strictly normal demand".into(),
        ));
    }
    let candidates: Vec<usize> = match hub {
        Some(h) => vec![h],
        None => (0..n).collect(),
    };
    let solutions: Vec<(usize, HubSolution)> = candidates
        .par_iter()
        .filter_map(|&h| optimize_hub_with_participation(econ, h).map(|s| (h, s)))
        .collect();
    let (best_hub, best) = solutions
        .into_iter()
        .max_by(|(ha, a), (hb, b)| {
            a.welfare
                .partial_cmp(&b.welfare)
                .unwrap()
                .then(hb.cmp(ha))
        })
        .ok_or_else(|| {
            Error::Infeasible(
                "no hub supports a feasible star; recommend leaving the network empty".into(),
            )
        })?;

    let total = econ.total_wealth();
    let mut t: Vec<f64> = (0..n).map(|i| best.money[i] - econ.player(i).wealth).collect();
    // The hub absorbs the allocation residual so transfers balance exactly.
    t[best_hub] = -t.iter().enumerate().filter(|&(i, _)| i != best_hub).map(|(_, v)| v).sum::<f64>();
    let new_econ = econ.with_transfers(&t)?;
    let ph = new_econ.player(best_hub);
    let x_hub = ph.pref.demand_raw(ph.price, ph.wealth);
    let mut profile = induced_star(&new_econ, best_hub, x_hub);
    // Isolation decisions from the optimizer are authoritative.
    for &j in &best.isolated {
        if profile.links.get(j, best_hub) {
            profile.links.set(j, best_hub, false).unwrap();
            let (x, y) = new_econ.player(j).isolation_bundle();
            profile.x[j] = x;
            profile.y[j] = y;
        }
    }
    let verdict = check_equilibrium(&new_econ, &profile)?;
    if !verdict.is_nash {
        return Err(Error::PolicyCheckFailed(format!(
            "second-best star is not an equilibrium (witness {:?})",
            verdict.witness.map(|w| w.player)
        )));
    }
    let w_after = welfare(&new_econ, &profile)?;
    let before = solve_equilibrium(econ).ok().and_then(|p| welfare(econ, &p).ok());
    Ok(TransferScheme {
        transfers: t,
        hub: Some(best_hub),
        weights: Some(best.money.iter().map(|m| m / total).collect()),
        beta: None,
        induced_economy: Some(new_econ),
        induced_profile: Some(profile),
        welfare_before: before,
        welfare_after: w_after,
    })
}

/// One-dimensional second best for identical linear Engel curves: a share
/// `beta` of total wealth goes to the hub, the rest splits equally.
pub fn second_best_linear(econ: &Economy) -> Result<TransferScheme> {
    if !econ.is_homogeneous() {
        return Err(Error::Heterogeneous);
    }
    let n = econ.n();
    let p0 = econ.player(0);
    let alpha = p0
        .pref
        .linear_engel_slope(p0.price)
        .ok_or_else(|| Error::PreconditionViolated("linear Engel curve required".into()))?;
    let total = econ.total_wealth();
    let k = econ.k();
    let hub = (0..n)
        .max_by(|&a, &b| {
            econ.player(a)
                .wealth
                .partial_cmp(&econ.player(b).wealth)
                .unwrap()
                .then(b.cmp(&a))
        })
        .unwrap();
    let before = solve_equilibrium(econ).ok().and_then(|p| welfare(econ, &p).ok());

    if n == 1 {
        let profile = empty_profile(econ);
        let w = welfare(econ, &profile)?;
        return Ok(TransferScheme {
            transfers: vec![0.0],
            hub: Some(0),
            weights: Some(vec![1.0]),
            beta: Some(1.0),
            induced_economy: Some(econ.clone()),
            induced_profile: Some(profile),
            welfare_before: Some(w),
            welfare_after: w,
        });
    }

    // Indirect utility per unit of income (both linear families are
    // homogeneous of degree one).
    let d1 = p0.pref.demand_raw(p0.price, 1.0);
    let h_alpha = p0.pref.utility_raw(d1, (1.0 - d1) / p0.price);

    let nm1 = (n - 1) as f64;
    let beta = if alpha >= 1.0 - 1e-12 && n > 2 {
        1.0
    } else if alpha <= 1.0 / nm1 + 1e-12 && total < k * (alpha * nm1 + n as f64) / alpha {
        k / (alpha * total)
    } else {
        let beta_c1 = k / (alpha * total);
        let beta_hi = 1.0 - nm1 * k / total;
        if beta_c1 > beta_hi {
            return Err(Error::Infeasible(
                "no hub share satisfies both provision and affordability".into(),
            ));
        }
        // Smallest share at which spokes stop providing.
        let spoke_active = |beta: f64| -> f64 {
            let x_h = alpha * beta * total;
            let m_p = (1.0 - beta) * total / nm1 - k + x_h;
            alpha * m_p - x_h
        };
        let mut lo = beta_c1;
        let hi = beta_hi;
        if spoke_active(lo) > 0.0 {
            let (mut a, mut b) = (lo, hi);
            if spoke_active(b) > 0.0 {
                lo = hi;
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if spoke_active(mid) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                lo = 0.5 * (a + b);
            }
        }
        // First-order condition in the inactive-spoke regime; the derivative
        // is decreasing, so bisection applies.
        let deriv = |beta: f64| -> f64 {
            let x_h = alpha * beta * total;
            let y_p = (1.0 - beta) * total / nm1 - k;
            h_alpha + nm1 * alpha * p0.pref.du_dx(x_h.max(1e-12), y_p.max(1e-12))
                - p0.pref.du_dy(x_h.max(1e-12), y_p.max(1e-12))
        };
        if deriv(lo) <= 0.0 {
            lo
        } else if deriv(beta_hi) >= 0.0 {
            beta_hi
        } else {
            let (mut a, mut b) = (lo, beta_hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if deriv(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
    };

    let mut weights = vec![(1.0 - beta) / nm1; n];
    weights[hub] = beta;
    let mut t: Vec<f64> = (0..n).map(|i| weights[i] * total - econ.player(i).wealth).collect();
    t[hub] = -t.iter().enumerate().filter(|&(i, _)| i != hub).map(|(_, v)| v).sum::<f64>();

    // The all-to-hub corner leaves spokes without resources; report the
    // share without constructing the degenerate economy.
    if beta >= 1.0 - 1e-12 {
        return Ok(TransferScheme {
            transfers: t,
            hub: Some(hub),
            weights: Some(weights),
            beta: Some(beta),
            induced_economy: None,
            induced_profile: None,
            welfare_before: before,
            welfare_after: h_alpha * total,
        });
    }

    let new_econ = econ.with_transfers(&t)?;
    let ph = new_econ.player(hub);
    let x_hub = ph.pref.demand_raw(ph.price, ph.wealth);
    let profile = induced_star(&new_econ, hub, x_hub);
    let w_after = welfare(&new_econ, &profile)?;
    Ok(TransferScheme {
        transfers: t,
        hub: Some(hub),
        weights: Some(weights),
        beta: Some(beta),
        induced_economy: Some(new_econ),
        induced_profile: Some(profile),
        welfare_before: before,
        welfare_after: w_after,
    })
}

// ---------------------------------------------------------------------------
// Personalized prices
// ---------------------------------------------------------------------------

/// A subsidized public-good price for the hub plus lump-sum taxes that
/// decentralize the efficient allocation.
#[derive(Debug, Clone)]
pub struct PriceScheme {
    pub hub: usize,
    /// Public-good price faced by the hub, in (0, 1].
    pub public_price: f64,
    pub taxes: Vec<f64>,
    pub induced_profile: StrategyProfile,
    pub efficient: EfficientSolution,
}

pub fn personalized_prices(econ: &Economy) -> Result<PriceScheme> {
    let n = econ.n();
    for i in 0..n {
        let p = econ.player(i);
        let s = p.pref.engel_slope(p.price, p.wealth);
        if n > 1 && !(s > 1e-9 && s < 1.0 - 1e-9) {
            return Err(Error::PreconditionViolated(format!(
                "player {i} has Engel slope {s:.3} outside (0, 1)"
            )));
        }
    }
    if n > 1 {
        let eq = solve_equilibrium(econ)?;
        if eq.links.is_empty() {
            return Err(Error::PreconditionViolated(
                "no non-empty equilibrium exists to improve upon".into(),
            ));
        }
    }
    let fb = efficient_solution(econ)?;
    let (hub, members, isolated) = match &fb.shape {
        EfficientShape::Star { hub, members, isolated } => {
            (*hub, members.clone(), isolated.clone())
        }
        EfficientShape::Empty => {
            return Err(Error::PreconditionViolated(
                "efficient solution is the empty network; prices target a star hub".into(),
            ))
        }
    };
    let x_fb = fb.x[hub];
    let ph = econ.player(hub);
    let mrs = ph.price * ph.pref.du_dx(x_fb.max(1e-12), fb.y[hub].max(1e-12))
        / ph.pref.du_dy(x_fb.max(1e-12), fb.y[hub].max(1e-12));
    let spokes = members.len() - 1;
    if !(mrs > 0.0) || mrs > 1.0 + 1e-6 || (spokes > 0 && mrs >= 1.0 - 1e-9) {
        return Err(Error::PolicyCheckFailed(format!(
            "hub marginal rate of substitution {mrs:.6} outside the implementable range"
        )));
    }
    let p_x = mrs.min(1.0);

    let mut taxes = vec![0.0; n];
    for i in 0..n {
        let p = econ.player(i);
        taxes[i] = if i == hub {
            p.wealth - p_x * x_fb - p.price * fb.y[hub]
        } else if members.contains(&i) {
            p.wealth - p.price * fb.y[i] - econ.k()
        } else {
            p.wealth - fb.x[i] - p.price * fb.y[i]
        };
    }

    // Induced profile in quantity space: spokes link to the hub and provide
    // nothing, isolated players provide for themselves.
    let mut g = LinkProfile::empty(n);
    let mut x = vec![0.0; n];
    let y = fb.y.clone();
    x[hub] = x_fb;
    for &i in &members {
        if i != hub {
            g.set(i, hub, true).unwrap();
        }
    }
    for &j in &isolated {
        x[j] = fb.x[j];
    }
    let induced = StrategyProfile { x, y, links: g };

    verify_priced_star(econ, hub, p_x, &taxes, &induced)?;

    Ok(PriceScheme { hub, public_price: p_x, taxes, induced_profile: induced, efficient: fb })
}

/// Check that the priced star is an equilibrium: the hub's provision is
/// optimal at her subsidized price and no other player can deviate.
fn verify_priced_star(
    econ: &Economy,
    hub: usize,
    p_x: f64,
    taxes: &[f64],
    profile: &StrategyProfile,
) -> Result<()> {
    let n = econ.n();
    let tol = econ.tolerances().indifference;
    let ph = econ.player(hub);
    let hub_wealth = ph.wealth - taxes[hub];
    let spend = |x: f64| -> f64 {
        ph.pref.utility_raw(x, ((hub_wealth - p_x * x) / ph.price).max(0.0))
    };
    let (x_opt, u_opt) = maximize_1d(0.0, hub_wealth / p_x, 64, &spend);
    let u_cur = spend(profile.x[hub]);
    if u_opt > u_cur + tol {
        return Err(Error::PolicyCheckFailed(format!(
            "hub prefers provision {x_opt:.6} over the efficient {:.6}",
            profile.x[hub]
        )));
    }
    // Hub linking to another provider must not pay.
    for j in 0..n {
        if j == hub || profile.x[j] <= 0.0 {
            continue;
        }
        let rest = hub_wealth - econ.k();
        if rest <= 0.0 {
            continue;
        }
        let with_link = |x: f64| -> f64 {
            ph.pref.utility_raw(x + profile.x[j], ((rest - p_x * x) / ph.price).max(0.0))
        };
        let (_, u_link) = maximize_1d(0.0, rest / p_x, 64, &with_link);
        if u_link > u_cur + tol {
            return Err(Error::PolicyCheckFailed(format!(
                "hub profits from linking to player {j}"
            )));
        }
    }
    // Everyone else best-responds in the taxed economy at standard prices.
    let taxed = econ.with_transfers(&taxes.iter().map(|t| -t).collect::<Vec<_>>())?;
    let report = consumption_report(&taxed, profile)?;
    for i in 0..n {
        if i == hub {
            continue;
        }
        let br = crate::equilibrium::best_response(&taxed, profile, i)?;
        if br.utility > report.utility[i] + tol {
            return Err(Error::PolicyCheckFailed(format!(
                "player {i} deviates under the price scheme (gain {:.3e})",
                br.utility - report.utility[i]
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Inequality diagnostics
// ---------------------------------------------------------------------------

/// Gaps for one periphery pair, in the equilibrium versus autarky.
#[derive(Debug, Clone)]
pub struct PairGap {
    pub i: usize,
    pub j: usize,
    pub utility_gap_eq: f64,
    pub utility_gap_autarky: f64,
    pub social_income_gap: f64,
    pub wealth_gap: f64,
}

#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub pairs: Vec<PairGap>,
    /// Share of periphery pairs whose utility gap shrank relative to autarky.
    pub share_utility_gap_reduced: f64,
    /// Share of periphery pairs whose net-social-income gap exceeds their
    /// wealth gap.
    pub share_income_gap_increased: f64,
    pub wealth_spread: f64,
    /// Smallest wealth spread at which constructed periphery link sets
    /// diverge (homogeneous economies only).
    pub divergence_spread: Option<f64>,
}

pub fn inequality_report(econ: &Economy, eq: &StrategyProfile) -> Result<InequalityReport> {
    let feas = validate_profile(econ, eq);
    if !feas.is_ok() {
        return Err(Error::InvalidInput(format!("profile infeasible: {:?}", feas.violations[0])));
    }
    let tol = econ.tolerances().indifference;
    let report = consumption_report(econ, eq)?;
    let structure = classify_core_periphery(&eq.links, &eq.x, econ.k(), tol);
    let mut pairs = Vec::new();
    let peri = &structure.periphery;
    for a in 0..peri.len() {
        for b in (a + 1)..peri.len() {
            let (i, j) = (peri[a], peri[b]);
            let (xi, yi) = econ.player(i).isolation_bundle();
            let (xj, yj) = econ.player(j).isolation_bundle();
            let ui = econ.player(i).pref.utility_raw(xi, yi);
            let uj = econ.player(j).pref.utility_raw(xj, yj);
            pairs.push(PairGap {
                i,
                j,
                utility_gap_eq: (report.utility[i] - report.utility[j]).abs(),
                utility_gap_autarky: (ui - uj).abs(),
                social_income_gap: (report.net_social_income[i] - report.net_social_income[j])
                    .abs(),
                wealth_gap: (econ.player(i).wealth - econ.player(j).wealth).abs(),
            });
        }
    }
    let total = pairs.len().max(1) as f64;
    let reduced = pairs
        .iter()
        .filter(|p| p.utility_gap_eq <= p.utility_gap_autarky + 1e-12)
        .count() as f64;
    let increased = pairs
        .iter()
        .filter(|p| p.social_income_gap > p.wealth_gap + 1e-12)
        .count() as f64;
    let wmax = econ.players().iter().map(|p| p.wealth).fold(f64::MIN, f64::max);
    let wmin = econ.players().iter().map(|p| p.wealth).fold(f64::MAX, f64::min);
    Ok(InequalityReport {
        share_utility_gap_reduced: reduced / total,
        share_income_gap_increased: increased / total,
        wealth_spread: wmax - wmin,
        divergence_spread: divergence_spread(econ),
        pairs,
    })
}

/// Shrink the wealth spread toward the mean and bisect for the smallest
/// spread at which constructed periphery link sets first differ.
fn divergence_spread(econ: &Economy) -> Option<f64> {
    if !econ.is_homogeneous() || econ.n() < 3 {
        return None;
    }
    let w: Vec<f64> = econ.players().iter().map(|p| p.wealth).collect();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let spread =
        w.iter().fold(f64::MIN, |m, &v| m.max(v)) - w.iter().fold(f64::MAX, |m, &v| m.min(v));
    if spread <= 0.0 {
        return None;
    }
    let diverged_at = |t: f64| -> Option<bool> {
        let wt: Vec<f64> = w.iter().map(|&wi| mean + t * (wi - mean)).collect();
        if wt.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let scaled = econ.with_wealths(&wt).ok()?;
        let profile = recursive_construction(&scaled).ok()?;
        let structure =
            classify_core_periphery(&profile.links, &profile.x, scaled.k(), 1e-7);
        let peri = &structure.periphery;
        let sets: Vec<Vec<usize>> =
            peri.iter().map(|&i| profile.links.out_neighbors(i)).collect();
        Some(sets.windows(2).any(|w| w[0] != w[1]))
    };
    if !diverged_at(1.0)? {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        match diverged_at(mid) {
            Some(true) => hi = mid,
            _ => lo = mid,
        }
    }
    Some(hi * spread)
}

// ---------------------------------------------------------------------------
// Law-of-the-few experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum WealthDistribution {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl WealthDistribution {
    pub fn cap(&self) -> f64 {
        match *self {
            WealthDistribution::Constant(w) => w,
            WealthDistribution::Uniform { hi, .. } => hi,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            WealthDistribution::Constant(w) => w,
            WealthDistribution::Uniform { lo, hi } => rng.gen_range(lo..=hi),
        }
    }
}

/// The template's preferences and prices are cycled over the drawn roster;
/// wealths are i.i.d. from the bounded distribution.
#[derive(Debug, Clone)]
pub struct LawOfFewConfig {
    pub template: Economy,
    pub dist: WealthDistribution,
    pub sizes: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct LawOfFewRow {
    pub n: usize,
    pub seed: u64,
    pub core_size: Option<usize>,
    pub core_share: Option<f64>,
    pub welfare: Option<f64>,
}

/// Core share of the constructed equilibrium at each population size.
/// Deterministic: each cell draws from its own seeded stream. Failures are
/// recorded per cell, not fatal.
pub fn law_of_few_experiment(cfg: &LawOfFewConfig) -> Vec<LawOfFewRow> {
    cfg.sizes
        .par_iter()
        .map(|&n| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(n as u64);
            let row = |core: Option<usize>, w: Option<f64>| LawOfFewRow {
                n,
                seed: cfg.seed,
                core_size: core,
                core_share: core.map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 }),
                welfare: w,
            };
            let players: Option<Vec<Player>> = (0..n)
                .map(|i| {
                    let t = cfg.template.player(i % cfg.template.n());
                    Player::new(self::positive(cfg.dist.sample(&mut rng)), t.price, t.pref.clone())
                        .ok()
                })
                .collect();
            let Some(players) = players else { return row(None, None) };
            let Ok(econ) = Economy::with_tolerances(
                players,
                cfg.template.k(),
                cfg.template.tolerances(),
            ) else {
                return row(None, None);
            };
            let solved = if econ.is_homogeneous() {
                recursive_construction(&econ)
            } else {
                solve_equilibrium(&econ)
            };
            match solved {
                Ok(profile) => {
                    let structure = classify_core_periphery(
                        &profile.links,
                        &profile.x,
                        econ.k(),
                        econ.tolerances().indifference,
                    );
                    let w = welfare(&econ, &profile).ok();
                    row(Some(structure.core.len()), w)
                }
                Err(_) => row(None, None),
            }
        })
        .collect()
}

fn positive(w: f64) -> f64 {
    w.max(1e-9)
}

/// CSV rendering with the fixed column set `n,seed,core_size,core_share,welfare`.
pub fn law_of_few_csv(rows: &[LawOfFewRow]) -> String {
    let mut out = String::from("n,seed,core_size,core_share,welfare\n");
    for r in rows {
        let core = r.core_size.map_or(String::new(), |c| c.to_string());
        let share = r.core_share.map_or(String::new(), |s| format!("{s:.6}"));
        let w = r.welfare.map_or(String::new(), |w| format!("{w:.6}"));
        out.push_str(&format!("{},{},{},{},{}\n", r.n, r.seed, core, share, w));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{Player, Preference};

    fn cd_econ(spec: &[(f64, f64)], k: f64) -> Economy {
        let players = spec
            .iter()
            .map(|&(w, a)| Player::new(w, 1.0, Preference::CobbDouglas { a }).unwrap())
            .collect();
        Economy::new(players, k).unwrap()
    }

    fn mixed_taste_econ() -> Economy {
        cd_econ(&[(15.0, 0.5), (15.0, 0.5), (10.0, 0.5), (4.0, 0.8)], 2.0)
    }

    fn mixed_taste_equilibrium(econ: &Economy) -> StrategyProfile {
        let g = LinkProfile::from_edges(4, &[(0, 1), (1, 0), (2, 0), (2, 1), (3, 0)]).unwrap();
        crate::equilibrium::consumption_fixed_point(econ, &g).unwrap()
    }

    #[test]
    fn welfare_of_mixed_taste_equilibrium() {
        let econ = mixed_taste_econ();
        let eq = mixed_taste_equilibrium(&econ);
        let w = welfare(&econ, &eq).unwrap();
        assert!((w - 28.384).abs() < 1e-2, "got {w}");
    }

    #[test]
    fn efficient_four_player_homogeneous() {
        let econ = cd_econ(&[(10.0, 0.5), (9.0, 0.5), (8.0, 0.5), (4.0, 0.5)], 1.0);
        let sol = efficient_solution(&econ).unwrap();
        match &sol.shape {
            EfficientShape::Star { members, isolated, .. } => {
                assert_eq!(members.len(), 4);
                assert!(isolated.is_empty());
            }
            _ => panic!("expected a star"),
        }
        assert!((sol.hub_provision() - 14.0).abs() < 1e-6, "x = {}", sol.hub_provision());
        for &i in &[0usize, 1, 2, 3] {
            assert!((sol.y[i] - 3.5).abs() < 1e-6, "y_{i} = {}", sol.y[i]);
        }
    }

    #[test]
    fn efficient_empty_when_cost_dwarfs_value() {
        let econ = cd_econ(&[(1.0, 0.2), (1.0, 0.2)], 50.0);
        let sol = efficient_solution(&econ).unwrap();
        assert_eq!(sol.shape, EfficientShape::Empty);
    }

    #[test]
    fn efficient_homogeneous_members_share_private_consumption() {
        let econ = cd_econ(&[(12.0, 0.4), (7.0, 0.4), (5.0, 0.4)], 0.5);
        let sol = efficient_solution(&econ).unwrap();
        match &sol.shape {
            EfficientShape::Star { members, .. } => {
                let ys: Vec<f64> = members.iter().map(|&i| sol.y[i]).collect();
                for w in ys.windows(2) {
                    assert!((w[0] - w[1]).abs() < 1e-6, "{ys:?}");
                }
            }
            _ => panic!("expected a star"),
        }
    }

    #[test]
    fn improving_transfers_from_two_core_equilibrium() {
        let econ = mixed_taste_econ();
        let eq = mixed_taste_equilibrium(&econ);
        let scheme = improving_transfers(&econ, &eq).unwrap();
        assert_eq!(scheme.hub, Some(0));
        assert!(scheme.transfers.iter().sum::<f64>().abs() < 1e-9);
        assert!(scheme.welfare_after > 28.384);
        let star = scheme.induced_profile.as_ref().unwrap();
        for i in 1..4 {
            assert!(star.links.get(i, 0));
            assert!(star.x[i].abs() < 1e-9);
        }
    }

    #[test]
    fn improving_transfers_identity_on_star() {
        let econ = cd_econ(&[(20.0, 0.5), (19.0, 0.5), (18.0, 0.5)], 5.0);
        let eq = crate::equilibrium::solve_equilibrium(&econ).unwrap();
        // Already a star on the richest player.
        assert_eq!(eq.links.edges(), vec![(1, 0), (2, 0)]);
        let scheme = improving_transfers(&econ, &eq).unwrap();
        for t in &scheme.transfers {
            assert!(t.abs() < 1e-9);
        }
        assert!((scheme.welfare_after - scheme.welfare_before.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn improving_transfers_rejects_empty() {
        let econ = cd_econ(&[(4.0, 0.5), (4.0, 0.5)], 3.0);
        let eq = empty_profile(&econ);
        assert!(matches!(
            improving_transfers(&econ, &eq),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn second_best_single_player_is_degenerate() {
        let econ = cd_econ(&[(10.0, 0.5)], 1.0);
        let scheme = second_best(&econ, None).unwrap();
        assert_eq!(scheme.weights, Some(vec![1.0]));
        assert!(scheme.transfers[0].abs() < 1e-12);
    }

    #[test]
    fn second_best_linear_degenerate_all_public() {
        let econ = cd_econ(&[(10.0, 1.0), (8.0, 1.0), (6.0, 1.0)], 1.0);
        let scheme = second_best_linear(&econ).unwrap();
        assert_eq!(scheme.beta, Some(1.0));
    }

    #[test]
    fn second_best_linear_low_wealth_corner() {
        // Slope at the corner-case boundary with total wealth under the
        // threshold: the hub share just funds provision k.
        let econ = cd_econ(&[(5.0, 0.2); 6], 1.0);
        let total = 30.0;
        assert!(total < 1.0 * (0.2 * 5.0 + 6.0) / 0.2);
        let scheme = second_best_linear(&econ).unwrap();
        assert!((scheme.beta.unwrap() - 1.0 / (0.2 * total)).abs() < 1e-9);
    }

    #[test]
    fn second_best_linear_rejects_heterogeneous() {
        let econ = cd_econ(&[(10.0, 0.5), (8.0, 0.6)], 1.0);
        assert!(matches!(second_best_linear(&econ), Err(Error::Heterogeneous)));
    }

    #[test]
    fn personalized_prices_four_player() {
        let econ = cd_econ(&[(10.0, 0.5), (9.0, 0.5), (8.0, 0.5), (4.0, 0.5)], 1.0);
        let scheme = personalized_prices(&econ).unwrap();
        assert!((scheme.public_price - 0.25).abs() < 1e-6, "p_x = {}", scheme.public_price);
        let tau_sum: f64 = scheme.taxes.iter().sum();
        assert!((tau_sum - 0.75 * 14.0).abs() < 1e-6, "sum tau = {tau_sum}");
        for i in 0..4 {
            if i != scheme.hub {
                assert!(scheme.induced_profile.x[i].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn personalized_prices_single_player() {
        let econ = cd_econ(&[(10.0, 0.5)], 1.0);
        let scheme = personalized_prices(&econ).unwrap();
        assert!((scheme.public_price - 1.0).abs() < 1e-9);
        assert!(scheme.taxes[0].abs() < 1e-9);
    }

    #[test]
    fn inequality_identical_periphery_has_zero_gaps() {
        let econ = cd_econ(&[(10.0, 0.5), (6.0, 0.5), (6.0, 0.5), (6.0, 0.5)], 1.5);
        let eq = recursive_construction(&econ).unwrap();
        let rep = inequality_report(&econ, &eq).unwrap();
        for pair in &rep.pairs {
            assert!(pair.utility_gap_eq < 1e-9);
            assert!(pair.utility_gap_autarky < 1e-9);
        }
        assert_eq!(rep.share_utility_gap_reduced, 1.0);
    }

    #[test]
    fn inequality_unequal_links_widen_income_gap() {
        let econ = cd_econ(&[(10.0, 0.5), (9.0, 0.5), (8.0, 0.5), (4.0, 0.5)], 1.0);
        let g = LinkProfile::from_edges(4, &[(0, 1), (1, 0), (2, 0), (2, 1), (3, 0)]).unwrap();
        let eq = crate::equilibrium::consumption_fixed_point(&econ, &g).unwrap();
        let rep = inequality_report(&econ, &eq).unwrap();
        let pair = rep.pairs.iter().find(|p| p.i == 2 && p.j == 3).unwrap();
        assert!(pair.social_income_gap > pair.wealth_gap);
    }

    #[test]
    fn law_of_few_empty_above_demand_cap() {
        let template = cd_econ(&[(10.0, 0.5)], 6.0);
        let rows = law_of_few_experiment(&LawOfFewConfig {
            template,
            dist: WealthDistribution::Constant(10.0),
            sizes: vec![1, 4, 8],
            seed: 7,
        });
        for r in &rows {
            assert_eq!(r.core_size, Some(0), "n = {}", r.n);
        }
    }

    #[test]
    fn law_of_few_csv_shape() {
        let template = cd_econ(&[(10.0, 0.5)], 1.0);
        let rows = law_of_few_experiment(&LawOfFewConfig {
            template,
            dist: WealthDistribution::Constant(10.0),
            sizes: vec![4, 8],
            seed: 1,
        });
        let csv = law_of_few_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,seed,core_size,core_share,welfare"));
        assert_eq!(csv.lines().count(), 3);
    }
}
