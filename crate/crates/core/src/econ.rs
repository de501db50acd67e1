//! Economic primitives: preferences and their Engel curves, players,
//! economies, link profiles, strategy profiles and consumption accounting.
//!
//! Every quantity is a plain `f64`; all types are immutable values and all
//! functions are pure, so everything here is safe to share across threads.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Iterations of golden-section search used for black-box demand.
const GOLDEN_ITERS: usize = 200;
/// Iterations of bisection used for numeric Engel inverses.
const BISECT_ITERS: usize = 200;

/// A black-box utility evaluator for preferences outside the built-in
/// families. Must be twice differentiable, strictly concave and increasing
/// on the positive orthant.
#[derive(Clone)]
pub struct NumericUtility {
    label: &'static str,
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl NumericUtility {
    pub fn new(label: &'static str, eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label, eval: Arc::new(eval) }
    }

    pub fn eval(&self, xbar: f64, y: f64) -> f64 {
        (self.eval)(xbar, y)
    }
}

impl fmt::Debug for NumericUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericUtility").field("label", &self.label).finish()
    }
}

/// A utility family over public consumption `x̄` and private consumption `y`.
#[derive(Debug, Clone)]
pub enum Preference {
    /// `U(x̄, y) = x̄^a · y^(1-a)`. The Engel curve is linear: `γ(m) = a·m`.
    /// `a = 1` is permitted as the degenerate all-public case.
    CobbDouglas { a: f64 },
    /// `U(x̄, y) = √(b·√x̄ + y)`. Demand saturates: `γ(m) = min(b²p²/4, m)`.
    SqrtAdditive { b: f64 },
    /// `U(x̄, y) = (√x̄ + √y)²`. Linear Engel curve `γ(m) = p·m/(1+p)`.
    RootSum,
    /// Black-box utility; demand is found by golden-section search.
    Numeric(NumericUtility),
}

impl Preference {
    pub fn validate(&self) -> Result<()> {
        match self {
            Preference::CobbDouglas { a } => {
                if !(a.is_finite() && *a > 0.0 && *a <= 1.0) {
                    return Err(Error::InvalidInput(format!(
                        "CobbDouglas exponent must lie in (0, 1], got {a}"
                    )));
                }
            }
            Preference::SqrtAdditive { b } => {
                if !(b.is_finite() && *b > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "SqrtAdditive taste weight must be positive, got {b}"
                    )));
                }
            }
            Preference::RootSum | Preference::Numeric(_) => {}
        }
        Ok(())
    }

    /// Utility level at a consumption bundle. Negative inputs are rejected.
    pub fn utility(&self, xbar: f64, y: f64) -> Result<f64> {
        if xbar < 0.0 || y < 0.0 || !xbar.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!(
                "consumption bundle must be nonnegative, got ({xbar}, {y})"
            )));
        }
        Ok(self.utility_raw(xbar, y))
    }

    pub(crate) fn utility_raw(&self, xbar: f64, y: f64) -> f64 {
        match self {
            Preference::CobbDouglas { a } => xbar.powf(*a) * y.powf(1.0 - *a),
            Preference::SqrtAdditive { b } => (b * xbar.sqrt() + y).sqrt(),
            Preference::RootSum => {
                let s = xbar.sqrt() + y.sqrt();
                s * s
            }
            Preference::Numeric(u) => u.eval(xbar, y),
        }
    }

    /// Marginal utility of public consumption.
    pub fn du_dx(&self, xbar: f64, y: f64) -> f64 {
        match self {
            Preference::CobbDouglas { a } => a * xbar.powf(a - 1.0) * y.powf(1.0 - a),
            Preference::SqrtAdditive { b } => {
                b / (4.0 * xbar.sqrt() * (b * xbar.sqrt() + y).sqrt())
            }
            Preference::RootSum => 1.0 + (y / xbar).sqrt(),
            Preference::Numeric(_) => {
                let h = 1e-6 * xbar.max(1.0);
                let lo = (xbar - h).max(0.0);
                (self.utility_raw(xbar + h, y) - self.utility_raw(lo, y)) / (xbar + h - lo)
            }
        }
    }

    /// Marginal utility of private consumption.
    pub fn du_dy(&self, xbar: f64, y: f64) -> f64 {
        match self {
            Preference::CobbDouglas { a } => (1.0 - a) * xbar.powf(*a) * y.powf(-a),
            Preference::SqrtAdditive { b } => 0.5 / (b * xbar.sqrt() + y).sqrt(),
            Preference::RootSum => 1.0 + (xbar / y).sqrt(),
            Preference::Numeric(_) => {
                let h = 1e-6 * y.max(1.0);
                let lo = (y - h).max(0.0);
                (self.utility_raw(xbar, y + h) - self.utility_raw(xbar, lo)) / (y + h - lo)
            }
        }
    }

    /// Engel-curve demand `γ(m)`: the public-consumption component of the
    /// optimal bundle under the budget `x̄ + p·y = m`, clamped to `[0, m]`.
    pub fn demand(&self, p: f64, m: f64) -> Result<f64> {
        if m < 0.0 || !m.is_finite() {
            return Err(Error::InvalidInput(format!(
                "net social income must be nonnegative, got {m}"
            )));
        }
        Ok(self.demand_raw(p, m))
    }

    pub(crate) fn demand_raw(&self, p: f64, m: f64) -> f64 {
        match self {
            Preference::CobbDouglas { a } => (a * m).min(m),
            Preference::SqrtAdditive { b } => (b * b * p * p / 4.0).min(m),
            Preference::RootSum => p * m / (1.0 + p),
            Preference::Numeric(_) => self.demand_golden(p, m),
        }
    }

    fn demand_golden(&self, p: f64, m: f64) -> f64 {
        if m == 0.0 {
            return 0.0;
        }
        // Strict concavity makes U(x̄, (m - x̄)/p) unimodal on [0, m].
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let f = |x: f64| self.utility_raw(x, (m - x).max(0.0) / p);
        let (mut lo, mut hi) = (0.0, m);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let mut f1 = f(x1);
        let mut f2 = f(x2);
        for _ in 0..GOLDEN_ITERS {
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
        0.5 * (lo + hi)
    }

    /// Inverse Engel curve `φ(x̄)`: the income at which demand equals `x̄`.
    /// Fails where the Engel curve is flat.
    pub fn engel_inverse(&self, p: f64, xbar: f64) -> Result<f64> {
        if xbar < 0.0 || !xbar.is_finite() {
            return Err(Error::InvalidInput(format!(
                "public consumption must be nonnegative, got {xbar}"
            )));
        }
        match self {
            Preference::CobbDouglas { a } => Ok(xbar / a),
            Preference::SqrtAdditive { b } => {
                let cap = b * b * p * p / 4.0;
                if xbar >= cap {
                    Err(Error::NoInverse { xbar })
                } else {
                    Ok(xbar)
                }
            }
            Preference::RootSum => Ok(xbar * (1.0 + p) / p),
            Preference::Numeric(_) => self.engel_inverse_bisect(p, xbar),
        }
    }

    fn engel_inverse_bisect(&self, p: f64, xbar: f64) -> Result<f64> {
        if xbar == 0.0 {
            return Ok(0.0);
        }
        // demand(m) <= m, so the preimage lies in [xbar, hi] for some hi.
        let mut hi = xbar.max(1.0);
        let mut expansions = 0;
        while self.demand_raw(p, hi) < xbar {
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::NoInverse { xbar });
            }
        }
        let mut lo = xbar.min(hi);
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (lo + hi);
            if self.demand_raw(p, mid) < xbar {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let m = 0.5 * (lo + hi);
        if self.engel_slope(p, m).abs() < 1e-9 {
            return Err(Error::NoInverse { xbar });
        }
        Ok(m)
    }

    /// Engel slope `γ'(m)` by central finite differences.
    pub fn engel_slope(&self, p: f64, m: f64) -> f64 {
        let h = (1e-6f64).max(1e-6 * m);
        let lo = (m - h).max(0.0);
        let hi = m + h;
        (self.demand_raw(p, hi) - self.demand_raw(p, lo)) / (hi - lo)
    }

    /// Constant Engel slope for families whose demand is linear through the
    /// origin, used by the exact fixed-point path.
    pub(crate) fn linear_engel_slope(&self, p: f64) -> Option<f64> {
        match self {
            Preference::CobbDouglas { a } => Some(*a),
            Preference::RootSum => Some(p / (1.0 + p)),
            _ => None,
        }
    }

    /// Exact-equality key used to detect interchangeable players.
    pub(crate) fn type_key(&self) -> PrefKey {
        match self {
            Preference::CobbDouglas { a } => PrefKey::CobbDouglas(a.to_bits()),
            Preference::SqrtAdditive { b } => PrefKey::SqrtAdditive(b.to_bits()),
            Preference::RootSum => PrefKey::RootSum,
            Preference::Numeric(u) => PrefKey::Numeric(Arc::as_ptr(&u.eval) as *const () as usize),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum PrefKey {
    CobbDouglas(u64),
    SqrtAdditive(u64),
    RootSum,
    Numeric(usize),
}

/// One participant: wealth, private-good price and preference.
#[derive(Debug, Clone)]
pub struct Player {
    pub wealth: f64,
    pub price: f64,
    pub pref: Preference,
}

impl Player {
    pub fn new(wealth: f64, price: f64, pref: Preference) -> Result<Self> {
        if !(wealth.is_finite() && wealth > 0.0) {
            return Err(Error::InvalidInput(format!("wealth must be positive, got {wealth}")));
        }
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::InvalidInput(format!("price must be positive, got {price}")));
        }
        pref.validate()?;
        Ok(Self { wealth, price, pref })
    }

    /// Optimal consumption with no links and no spillovers.
    pub fn isolation_bundle(&self) -> (f64, f64) {
        let x = self.pref.demand_raw(self.price, self.wealth);
        let y = (self.wealth - x) / self.price;
        (x, y.max(0.0))
    }
}

/// Solver tolerances. `fixpoint` separates numerical noise from real
/// violations; `indifference` separates solver noise from economic ties.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub fixpoint: f64,
    pub indifference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { fixpoint: 1e-10, indifference: 1e-7 }
    }
}

/// Player roster plus the linking cost.
#[derive(Debug, Clone)]
pub struct Economy {
    players: Vec<Player>,
    k: f64,
    tol: Tolerances,
}

impl Economy {
    pub fn new(players: Vec<Player>, k: f64) -> Result<Self> {
        Self::with_tolerances(players, k, Tolerances::default())
    }

    pub fn with_tolerances(players: Vec<Player>, k: f64, tol: Tolerances) -> Result<Self> {
        if players.is_empty() {
            return Err(Error::InvalidInput("economy needs at least one player".into()));
        }
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::InvalidInput(format!("linking cost must be nonnegative, got {k}")));
        }
        Ok(Self { players, k, tol })
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn player(&self, i: usize) -> &Player {
        &self.players[i]
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn total_wealth(&self) -> f64 {
        self.players.iter().map(|p| p.wealth).sum()
    }

    /// True when every player shares one preference and one price.
    pub fn is_homogeneous(&self) -> bool {
        let key = self.players[0].pref.type_key();
        let price = self.players[0].price;
        self.players
            .iter()
            .all(|p| p.pref.type_key() == key && p.price == price)
    }

    /// Largest isolation demand across players. Above this linking cost the
    /// empty network is the unique equilibrium.
    pub fn max_isolation_demand(&self) -> f64 {
        self.players
            .iter()
            .map(|p| p.isolation_bundle().0)
            .fold(0.0, f64::max)
    }

    /// A copy of this economy with wealths shifted by `t` (prices,
    /// preferences and cost unchanged).
    pub fn with_transfers(&self, t: &[f64]) -> Result<Economy> {
        if t.len() != self.n() {
            return Err(Error::InvalidInput("transfer vector length mismatch".into()));
        }
        let players = self
            .players
            .iter()
            .zip(t)
            .map(|(p, ti)| Player::new(p.wealth + ti, p.price, p.pref.clone()))
            .collect::<Result<Vec<_>>>()?;
        Economy::with_tolerances(players, self.k, self.tol)
    }

    /// Same roster with replaced wealths.
    pub fn with_wealths(&self, w: &[f64]) -> Result<Economy> {
        if w.len() != self.n() {
            return Err(Error::InvalidInput("wealth vector length mismatch".into()));
        }
        let players = self
            .players
            .iter()
            .zip(w)
            .map(|(p, wi)| Player::new(*wi, p.price, p.pref.clone()))
            .collect::<Result<Vec<_>>>()?;
        Economy::with_tolerances(players, self.k, self.tol)
    }
}

/// Directed adjacency; entry `(i, j)` means `i` sponsors a link to `j` and
/// receives `j`'s provision as a spillover. The diagonal is forced to zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinkProfile {
    n: usize,
    adj: Vec<bool>,
}

impl LinkProfile {
    pub fn empty(n: usize) -> Self {
        Self { n, adj: vec![false; n * n] }
    }

    /// Build from sponsor -> target pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            g.set(i, j, true)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidInput(format!("link ({i}, {j}) out of range")));
        }
        if i == j && v {
            return Err(Error::InvalidInput(format!("self-link at player {i} rejected")));
        }
        self.adj[i * self.n + j] = v;
        Ok(())
    }

    /// Number of links `i` sponsors.
    pub fn out_degree(&self, i: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j)).count()
    }

    pub fn out_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(i, j)).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.adj.iter().all(|&b| !b)
    }
}

/// Full strategy profile: provisions, private consumption and links.
#[derive(Debug, Clone)]
pub struct StrategyProfile {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub links: LinkProfile,
}

impl StrategyProfile {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Spillovers received by each player: `Σ_j g_ij x_j`.
    pub fn spillovers(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).filter(|&j| self.links.get(i, j)).map(|j| self.x[j]).sum())
            .collect()
    }
}

/// Per-player consumption accounting for a profile.
#[derive(Debug, Clone)]
pub struct ConsumptionReport {
    /// Spillovers `x̄_{-i}` received through sponsored links.
    pub spillovers: Vec<f64>,
    /// Public consumption `x̄_i = x_i + x̄_{-i}`.
    pub public_consumption: Vec<f64>,
    /// Net social income `w̄_i = w_i - η_i k + x̄_{-i}`.
    pub net_social_income: Vec<f64>,
    pub utility: Vec<f64>,
}

impl ConsumptionReport {
    pub fn total_welfare(&self) -> f64 {
        self.utility.iter().sum()
    }
}

/// Compute spillovers, public consumption, net social income and utilities.
pub fn consumption_report(econ: &Economy, profile: &StrategyProfile) -> Result<ConsumptionReport> {
    let n = econ.n();
    if profile.n() != n || profile.y.len() != n || profile.links.n() != n {
        return Err(Error::InvalidInput("profile dimensions do not match economy".into()));
    }
    let spill = profile.spillovers();
    let mut xbar = Vec::with_capacity(n);
    let mut wbar = Vec::with_capacity(n);
    let mut util = Vec::with_capacity(n);
    for i in 0..n {
        let p = econ.player(i);
        let eta = profile.links.out_degree(i) as f64;
        xbar.push(profile.x[i] + spill[i]);
        wbar.push(p.wealth - eta * econ.k() + spill[i]);
        util.push(p.pref.utility(xbar[i].max(0.0), profile.y[i].max(0.0))?);
    }
    Ok(ConsumptionReport {
        spillovers: spill,
        public_consumption: xbar,
        net_social_income: wbar,
        utility: util,
    })
}

/// One feasibility violation found in a profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DimensionMismatch,
    NegativeProvision { player: usize, value: f64 },
    NegativeConsumption { player: usize, value: f64 },
    /// `x_i + p_i y_i + η_i k - w_i` outside tolerance.
    BudgetGap { player: usize, gap: f64 },
}

/// Feasibility report; an empty violation list means the profile is valid.
#[derive(Debug, Clone, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check nonnegativity and budget exactness at the economy's fixed-point
/// tolerance.
pub fn validate_profile(econ: &Economy, profile: &StrategyProfile) -> FeasibilityReport {
    validate_profile_with_tol(econ, profile, econ.tolerances().fixpoint)
}

/// Same as [`validate_profile`] with an explicit budget tolerance, for
/// profiles entered at printed precision.
pub fn validate_profile_with_tol(
    econ: &Economy,
    profile: &StrategyProfile,
    budget_tol: f64,
) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let n = econ.n();
    if profile.n() != n || profile.y.len() != n || profile.links.n() != n {
        report.violations.push(Violation::DimensionMismatch);
        return report;
    }
    for i in 0..n {
        if profile.x[i] < 0.0 {
            report.violations.push(Violation::NegativeProvision { player: i, value: profile.x[i] });
        }
        if profile.y[i] < 0.0 {
            report
                .violations
                .push(Violation::NegativeConsumption { player: i, value: profile.y[i] });
        }
        let p = econ.player(i);
        let eta = profile.links.out_degree(i) as f64;
        let gap = profile.x[i] + p.price * profile.y[i] + eta * econ.k() - p.wealth;
        if gap.abs() > budget_tol {
            report.violations.push(Violation::BudgetGap { player: i, gap });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cd(a: f64) -> Preference {
        Preference::CobbDouglas { a }
    }

    fn sqrt_add(b: f64) -> Preference {
        Preference::SqrtAdditive { b }
    }

    #[test]
    fn utility_closed_forms() {
        assert!((cd(0.5).utility(4.0, 4.0).unwrap() - 4.0).abs() < 1e-12);
        assert!((sqrt_add(4.0).utility(4.0, 1.0).unwrap() - 3.0).abs() < 1e-12);
        // Direct evaluation of the high-exponent case, checked against the
        // independent log-form expression.
        let direct = cd(0.99).utility(9.9, 0.1).unwrap();
        let oracle = (0.99 * 9.9f64.ln() + 0.01 * 0.1f64.ln()).exp();
        assert!((direct - oracle).abs() < 1e-12);
    }

    #[test]
    fn utility_rejects_negative_inputs() {
        assert!(cd(0.5).utility(-1.0, 2.0).is_err());
        assert!(cd(0.5).utility(2.0, -1.0).is_err());
    }

    #[test]
    fn demand_closed_forms() {
        assert!((cd(0.5).demand(1.0, 10.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((sqrt_add(4.0).demand(1.0, 5.0).unwrap() - 4.0).abs() < 1e-12);
        // Corner: income below the saturation point.
        assert!((sqrt_add(4.0).demand(1.0, 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(cd(0.5).demand(1.0, -1.0).is_err());
    }

    #[test]
    fn engel_inverse_closed_forms() {
        let x = 17.0 / 3.0;
        assert!((cd(0.5).engel_inverse(1.0, x).unwrap() - 34.0 / 3.0).abs() < 1e-12);
        assert!((cd(0.99).engel_inverse(1.0, 9.9).unwrap() - 10.0).abs() < 1e-12);
        // Flat region of the saturating family has no inverse.
        assert!(matches!(
            sqrt_add(4.0).engel_inverse(1.0, 4.0),
            Err(Error::NoInverse { .. })
        ));
    }

    #[test]
    fn engel_inverse_numeric_matches_closed_form() {
        let num = Preference::Numeric(NumericUtility::new("cobb_douglas_half", |x, y| {
            x.powf(0.5) * y.powf(0.5)
        }));
        let m = num.engel_inverse(1.0, 5.0).unwrap();
        assert!((m - 10.0).abs() < 1e-6, "got {m}");
    }

    #[test]
    fn numeric_demand_matches_closed_form() {
        let num = Preference::Numeric(NumericUtility::new("cobb_douglas_half", |x, y| {
            x.powf(0.5) * y.powf(0.5)
        }));
        // Value-based search resolves the optimum to roughly sqrt(eps).
        let d = num.demand(1.0, 10.0).unwrap();
        assert!((d - 5.0).abs() < 1e-6, "got {d}");
    }

    #[test]
    fn isolation_bundles() {
        let p = Player::new(10.0, 1.0, cd(0.5)).unwrap();
        assert_eq!(p.isolation_bundle(), (5.0, 5.0));
        let p = Player::new(5.0, 1.0, sqrt_add(4.0)).unwrap();
        let (x, y) = p.isolation_bundle();
        assert!((x - 4.0).abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
        let p = Player::new(10.0, 1.0, cd(0.99)).unwrap();
        let (x, y) = p.isolation_bundle();
        assert!((x - 9.9).abs() < 1e-12 && (y - 0.1).abs() < 1e-12);
    }

    #[test]
    fn invalid_players_rejected() {
        assert!(Player::new(-1.0, 1.0, cd(0.5)).is_err());
        assert!(Player::new(1.0, 0.0, cd(0.5)).is_err());
        assert!(Player::new(1.0, 1.0, cd(0.0)).is_err());
        assert!(Player::new(1.0, 1.0, cd(1.2)).is_err());
        assert!(Player::new(1.0, 1.0, sqrt_add(-2.0)).is_err());
    }

    #[test]
    fn self_links_rejected() {
        let mut g = LinkProfile::empty(3);
        assert!(g.set(1, 1, true).is_err());
        assert!(g.set(0, 1, true).is_ok());
        assert_eq!(g.out_degree(0), 1);
    }
}
