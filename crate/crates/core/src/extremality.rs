//! Sequential extremality, stationarity and transversality checks.
//!
//! Every "for any ε > 0" quantifier is truncated to the finite grid in
//! [`CheckParams::epsilons`], and every "there exist k, a" is a finite search
//! (k schedule × shift candidates) backed by the grid oracle of
//! [`crate::geometry`]. Verdicts are therefore grid- and budget-relative.

use crate::error::{check_dim, Error, Result};
use crate::expr::KExpr;
use crate::geometry::{intersection_empty, proj, Emptiness, EmptinessVerdict, Method, Point, Radius, SearchBudget, SetExpr};
use crate::linalg::solve;
use crate::norms::NormSpec;
use crate::Outcome;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sequences `{x_i^k}` (one per set) or a single sequence `{x^k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SequenceSpec {
    /// `maps[i][j]` is coordinate `j` of sequence `i` as an expression in `k`.
    ClosedForm {
        maps: Vec<Vec<KExpr>>,
        #[serde(default)]
        single: bool,
    },
    /// `points[i][k - 1]` is the `k`-th point of sequence `i`.
    Tabulated {
        points: Vec<Vec<Point>>,
        #[serde(default)]
        single: bool,
    },
}

impl SequenceSpec {
    pub fn closed_form(maps: &[&[&str]]) -> Result<Self> {
        let maps = maps.iter().map(|m| m.iter().map(|s| KExpr::parse(s)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(SequenceSpec::ClosedForm { maps, single: false })
    }

    pub fn single(coords: &[&str]) -> Result<Self> {
        let maps = vec![coords.iter().map(|s| KExpr::parse(s)).collect::<Result<Vec<_>>>()?];
        Ok(SequenceSpec::ClosedForm { maps, single: true })
    }

    pub fn is_single(&self) -> bool {
        match self {
            SequenceSpec::ClosedForm { single, .. } | SequenceSpec::Tabulated { single, .. } => *single,
        }
    }

    pub fn n_sets(&self) -> usize {
        match self {
            SequenceSpec::ClosedForm { maps, .. } => maps.len(),
            SequenceSpec::Tabulated { points, .. } => points.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            SequenceSpec::ClosedForm { maps, .. } => maps.first().map_or(0, |m| m.len()),
            SequenceSpec::Tabulated { points, .. } => points.first().and_then(|p| p.first()).map_or(0, |p| p.dim()),
        }
    }

    /// Largest admissible `k` (tabulated sequences are finite).
    pub fn k_max(&self) -> Option<u64> {
        match self {
            SequenceSpec::ClosedForm { .. } => None,
            SequenceSpec::Tabulated { points, .. } => points.iter().map(|p| p.len() as u64).min(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sets();
        if n == 0 {
            return Err(Error::InvalidInput("sequence has no point maps".into()));
        }
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidInput("sequence points have dimension 0".into()));
        }
        match self {
            SequenceSpec::ClosedForm { maps, .. } => {
                for m in maps {
                    check_dim(d, m.len())?;
                }
            }
            SequenceSpec::Tabulated { points, .. } => {
                for p in points.iter().flatten() {
                    check_dim(d, p.dim())?;
                }
            }
        }
        Ok(())
    }

    /// The `k`-th tuple `(x_1^k, ..., x_n^k)`.
    pub fn eval(&self, k: u64) -> Result<Vec<Point>> {
        if k == 0 {
            return Err(Error::InvalidInput("sequences are indexed from k = 1".into()));
        }
        match self {
            SequenceSpec::ClosedForm { maps, .. } => maps
                .iter()
                .map(|m| {
                    let c: Vec<f64> = m.iter().map(|e| e.eval(k as f64)).collect();
                    Point::new(c).map_err(|_| Error::InvalidInput(format!("sequence is not finite at k = {k}")))
                })
                .collect(),
            SequenceSpec::Tabulated { points, .. } => points
                .iter()
                .map(|p| {
                    p.get(k as usize - 1)
                        .cloned()
                        .ok_or_else(|| Error::InvalidInput(format!("tabulated sequence has no entry for k = {k}")))
                })
                .collect(),
        }
    }

    /// `diam{x_1^k, ..., x_n^k}` in the Euclidean norm.
    pub fn diam(&self, k: u64) -> Result<f64> {
        let pts = self.eval(k)?;
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(pts[i].dist2(&pts[j]));
            }
        }
        Ok(d)
    }

    /// Single sequence `sum_i w_i x_i^k`, e.g. the midpoint of a pair.
    pub fn affine_combination(&self, weights: &[f64]) -> Result<SequenceSpec> {
        check_dim(self.n_sets(), weights.len())?;
        match self {
            SequenceSpec::ClosedForm { maps, .. } => {
                let d = self.dim();
                let mut out = Vec::with_capacity(d);
                for j in 0..d {
                    let terms: Vec<String> =
                        maps.iter().zip(weights).map(|(m, w)| format!("({w})*({})", m[j].source())).collect();
                    out.push(KExpr::parse(&terms.join("+"))?);
                }
                Ok(SequenceSpec::ClosedForm { maps: vec![out], single: true })
            }
            SequenceSpec::Tabulated { points, .. } => {
                let len = self.k_max().unwrap_or(0) as usize;
                let mut seq = Vec::with_capacity(len);
                for k in 0..len {
                    let mut acc = Point::zeros(self.dim());
                    for (p, w) in points.iter().zip(weights) {
                        acc = acc + *w * &p[k];
                    }
                    seq.push(acc);
                }
                Ok(SequenceSpec::Tabulated { points: vec![seq], single: true })
            }
        }
    }
}

/// Registered shift tuple in the variables `k` and `eps` (the shift budget).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftHint {
    pub shifts: Vec<Vec<KExpr>>,
}

impl ShiftHint {
    pub fn new(shifts: &[&[&str]]) -> Result<Self> {
        let shifts =
            shifts.iter().map(|m| m.iter().map(|s| KExpr::parse(s)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(ShiftHint { shifts })
    }

    fn eval(&self, k: u64, budget: f64) -> Option<Vec<Point>> {
        self.shifts
            .iter()
            .map(|m| Point::new(m.iter().map(|e| e.eval_with(k as f64, budget)).collect()).ok())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftSearch {
    /// Directions for the axis stage; empty means the coordinate axes.
    pub axis: Vec<Point>,
    pub hints: Vec<ShiftHint>,
    pub random: usize,
    pub seed: u64,
}

impl Default for ShiftSearch {
    fn default() -> Self {
        ShiftSearch { axis: Vec::new(), hints: Vec::new(), random: 16, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckParams {
    /// Decreasing grid standing in for "for any ε > 0".
    pub epsilons: Vec<f64>,
    pub k_budget: u64,
    /// Extra radii tried by the stationarity-type checks (only those below ε
    /// are used there).
    pub rho_grid: Vec<f64>,
    pub shift_search: ShiftSearch,
    /// Oracle budget; carries the radius cap and the membership tolerance.
    pub search: SearchBudget,
    pub norm: NormSpec,
    /// Finest relative leaf width the shift-adapted oracle may use.
    pub min_resolution: f64,
    /// Tolerance of the vanishing-diameter precheck.
    pub diam_tol: f64,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            epsilons: vec![1.0, 0.1, 0.01, 0.001],
            k_budget: 10_000,
            rho_grid: vec![0.5, 1.0, 2.0],
            shift_search: ShiftSearch::default(),
            search: SearchBudget::default(),
            norm: NormSpec::default(),
            min_resolution: 1e-5,
            diam_tol: 1e-3,
        }
    }
}

impl CheckParams {
    pub fn with_hints(mut self, hints: Vec<ShiftHint>) -> Self {
        self.shift_search.hints = hints;
        self
    }

    pub fn with_epsilons(mut self, eps: &[f64]) -> Self {
        self.epsilons = eps.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidInput("epsilons must be positive and finite".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("epsilons must be strictly decreasing".into()));
        }
        if self.k_budget == 0 || self.rho_grid.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidInput("k_budget and rho_grid entries must be positive".into()));
        }
        if !(self.search.radius_cap > 0.0 && self.search.eta > 0.0 && self.min_resolution > 0.0) {
            return Err(Error::InvalidInput("radius cap, eta and min_resolution must be positive".into()));
        }
        self.norm.validate()
    }
}

/// Witness (or last obstruction) for one grid value of ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRecord {
    pub eps: f64,
    pub found: bool,
    pub k: Option<u64>,
    pub rho: Option<f64>,
    /// `x_i^k`, or the auxiliary points `x_i` for single-sequence properties.
    pub bases: Vec<Point>,
    pub shifts: Vec<Point>,
    /// Product norm of `shifts`, recomputed from the stored tuple.
    pub shift_norm: Option<f64>,
    /// Strict bound the shifts had to satisfy.
    pub shift_bound: Option<f64>,
    pub emptiness: Option<EmptinessVerdict>,
    /// Oracle calls that came back inconclusive for this ε.
    pub inconclusive_calls: usize,
    pub oracle_calls: usize,
    pub note: String,
}

impl EpsilonRecord {
    fn failed(eps: f64, note: impl Into<String>) -> Self {
        EpsilonRecord {
            eps,
            found: false,
            k: None,
            rho: None,
            bases: vec![],
            shifts: vec![],
            shift_norm: None,
            shift_bound: None,
            emptiness: None,
            inconclusive_calls: 0,
            oracle_calls: 0,
            note: note.into(),
        }
    }

    /// `x_i + a_i`, the translations handed to the oracle.
    pub fn translations(&self) -> Vec<Point> {
        self.bases.iter().zip(&self.shifts).map(|(x, a)| x + a).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub outcome: Outcome,
    pub per_epsilon: Vec<EpsilonRecord>,
    pub notes: Vec<String>,
}

impl PropertyVerdict {
    fn from_records(per_epsilon: Vec<EpsilonRecord>, mut notes: Vec<String>) -> Self {
        let outcome = if per_epsilon.iter().all(|r| r.found) {
            Outcome::Certified
        } else if per_epsilon.iter().any(|r| !r.found && r.inconclusive_calls == 0 && r.note.is_empty()) {
            Outcome::Falsified
        } else {
            Outcome::Inconclusive
        };
        if outcome == Outcome::Falsified {
            notes.push("falsified relative to the searched k values, shifts and oracle resolution".into());
        }
        PropertyVerdict { outcome, per_epsilon, notes }
    }
}

/// `k > 1/ε`, smallest first, doubling up to the budget.
pub fn k_schedule(eps: f64, k_budget: u64) -> Vec<u64> {
    let k0 = (1.0 / eps).floor() as u64 + 1;
    let mut out = Vec::new();
    let mut k = k0;
    while k <= k_budget {
        out.push(k);
        k = k.saturating_mul(2);
    }
    out
}

/// Outcome of the shift search at one `(k, ρ)`.
enum ShiftOutcome {
    Found(Vec<Point>, EmptinessVerdict),
    Exhausted { inconclusive: usize },
}

struct Searcher<'a> {
    sets: &'a [SetExpr],
    params: &'a CheckParams,
    calls: usize,
}

impl<'a> Searcher<'a> {
    fn new(sets: &'a [SetExpr], params: &'a CheckParams) -> Self {
        Searcher { sets, params, calls: 0 }
    }

    fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    /// Candidate shift tuples with product norm strictly below `budget`, in the
    /// order hints → zero → axis steps → random.
    fn candidates(&self, k: u64, budget: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<Point>> {
        let n = self.sets.len();
        let d = self.dim();
        let ns = &self.params.norm;
        let ok = |t: &[Point]| ns.product_norm(t).map_or(false, |v| v < budget);
        let mut out: Vec<Vec<Point>> = Vec::new();
        for h in &self.params.shift_search.hints {
            if let Some(t) = h.eval(k, budget) {
                if t.len() == n && t.iter().all(|p| p.dim() == d) && ok(&t) {
                    out.push(t);
                }
            }
        }
        out.push(vec![Point::zeros(d); n]);
        let dirs: Vec<Point> = if self.params.shift_search.axis.is_empty() {
            (0..d)
                .map(|j| {
                    let mut e = vec![0.0; d];
                    e[j] = 1.0;
                    Point::from(e)
                })
                .collect()
        } else {
            self.params.shift_search.axis.iter().filter(|v| v.dim() == d && !v.is_zero()).cloned().collect()
        };
        for frac in [0.5, 0.25, 0.125] {
            for i in 0..n {
                for dir in &dirs {
                    let unit = dir.scale(1.0 / ns.base_norm(dir));
                    for s in [-1.0, 1.0] {
                        let mut t = vec![Point::zeros(d); n];
                        t[i] = unit.scale(s * frac * budget);
                        if ok(&t) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        for _ in 0..self.params.shift_search.random {
            let t: Vec<Point> = (0..n).map(|_| Point::from((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())).collect();
            let m = ns.product_norm(&t).unwrap_or(0.0);
            if m > 0.0 {
                let scale = 0.9 * budget * rng.gen_range(0.1..1.0) / m;
                out.push(t.iter().map(|p| p.scale(scale)).collect());
            }
        }
        out
    }

    /// Oracle budget adapted to the shift scale: the leaf width must resolve
    /// the smallest shift, and the membership tolerance must stay below it.
    fn budget_for(&self, shifts: &[Point], radius: f64) -> SearchBudget {
        let mut b = self.params.search.clone();
        let smallest = shifts.iter().map(|a| self.params.norm.base_norm(a)).filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
        if smallest.is_finite() {
            b.resolution = (0.25 * smallest / radius).clamp(self.params.min_resolution.min(b.resolution), b.resolution);
            b.eta = b.eta.min(1e-2 * smallest);
        }
        b
    }

    fn oracle(&mut self, bases: &[Point], shifts: &[Point], radius: Radius) -> Result<EmptinessVerdict> {
        let r = radius.resolve(self.params.search.radius_cap).0;
        let translations: Vec<Point> = bases.iter().zip(shifts).map(|(x, a)| x + a).collect();
        let budget = self.budget_for(shifts, r);
        self.calls += 1;
        intersection_empty(self.sets, &translations, radius, Method::GridOracle, &budget)
    }

    fn search(&mut self, bases: &[Point], k: u64, budget: f64, radius: Radius, rng: &mut ChaCha8Rng) -> Result<ShiftOutcome> {
        let mut inconclusive = 0;
        for shifts in self.candidates(k, budget, rng) {
            let v = self.oracle(bases, &shifts, radius)?;
            match v.outcome {
                Emptiness::Empty => return Ok(ShiftOutcome::Found(shifts, v)),
                Emptiness::Inconclusive => inconclusive += 1,
                Emptiness::Nonempty => {}
            }
        }
        Ok(ShiftOutcome::Exhausted { inconclusive })
    }
}

fn check_sets(sets: &[SetExpr], seq: &SequenceSpec, single: bool) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::InvalidInput("no sets".into()));
    }
    seq.validate()?;
    let d = sets[0].dim();
    for s in sets {
        s.validate()?;
        check_dim(d, s.dim())?;
    }
    check_dim(d, seq.dim())?;
    if single {
        if seq.n_sets() != 1 {
            return Err(Error::InvalidInput("expected a single sequence".into()));
        }
    } else {
        check_dim(sets.len(), seq.n_sets())?;
    }
    Ok(())
}

fn rng_for(params: &CheckParams, eps: f64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(params.shift_search.seed ^ eps.to_bits())
}

fn ks_for(seq: &SequenceSpec, eps: f64, params: &CheckParams) -> Vec<u64> {
    let cap = seq.k_max().map_or(params.k_budget, |m| m.min(params.k_budget));
    k_schedule(eps, cap)
}

/// Checks `diam{x_1^k, ..., x_n^k} → 0` on `k = 1..=k_budget`.
pub fn check_diam_vanishes(seq: &SequenceSpec, k_budget: u64, tol: f64) -> Result<PropertyVerdict> {
    seq.validate()?;
    let cap = seq.k_max().map_or(k_budget, |m| m.min(k_budget)).max(1);
    // every k up to 10^4, log-spaced samples beyond
    let mut ks: Vec<u64> = (1..=cap.min(10_000)).collect();
    if cap > 10_000 {
        let steps = 2000;
        let (a, b) = ((10_000f64).ln(), (cap as f64).ln());
        for i in 1..=steps {
            ks.push((a + (b - a) * i as f64 / steps as f64).exp().round() as u64);
        }
        ks.dedup();
    }
    let tail = &ks[ks.len() / 2..];
    let mut tail_max: f64 = 0.0;
    let mut tail_min = f64::INFINITY;
    for &k in tail {
        let d = seq.diam(k)?;
        tail_max = tail_max.max(d);
        tail_min = tail_min.min(d);
    }
    let outcome = if tail_max < tol {
        Outcome::Certified
    } else if tail_min > 2.0 * tol {
        Outcome::Falsified
    } else {
        Outcome::Inconclusive
    };
    let notes = vec![format!("diameter over k in [{}, {}]: max {tail_max:.3e}, min {tail_min:.3e}", tail[0], cap)];
    Ok(PropertyVerdict { outcome, per_epsilon: vec![], notes })
}

/// Multi-sequence search shared by extremality and stationarity.
/// `radii(ε)` lists `(ρ, shift bound)` pairs to try.
fn multi_search(
    sets: &[SetExpr],
    seq: &SequenceSpec,
    params: &CheckParams,
    radii: &dyn Fn(f64) -> Vec<(Radius, f64)>,
) -> Result<PropertyVerdict> {
    check_sets(sets, seq, false)?;
    params.validate()?;
    let diam = check_diam_vanishes(seq, params.k_budget, params.diam_tol)?;
    if diam.outcome == Outcome::Falsified {
        let mut notes = diam.notes;
        notes.push("diameter of the sequences does not vanish".into());
        return Ok(PropertyVerdict { outcome: Outcome::Falsified, per_epsilon: vec![], notes });
    }
    let mut searcher = Searcher::new(sets, params);
    let mut records = Vec::new();
    for &eps in &params.epsilons {
        let mut rng = rng_for(params, eps);
        let ks = ks_for(seq, eps, params);
        if ks.is_empty() {
            records.push(EpsilonRecord::failed(eps, format!("k budget {} does not exceed 1/eps", params.k_budget)));
            continue;
        }
        let start = searcher.calls;
        let mut inconclusive = 0;
        let mut rec = None;
        'outer: for &k in &ks {
            let bases = seq.eval(k)?;
            for (radius, bound) in radii(eps) {
                match searcher.search(&bases, k, bound, radius, &mut rng)? {
                    ShiftOutcome::Found(shifts, v) => {
                        rec = Some(found_record(eps, k, radius, params, bases, shifts, bound, v)?);
                        break 'outer;
                    }
                    ShiftOutcome::Exhausted { inconclusive: c } => inconclusive += c,
                }
            }
        }
        let mut r = rec.unwrap_or_else(|| {
            let mut r = EpsilonRecord::failed(eps, "");
            r.k = ks.last().copied();
            r
        });
        r.inconclusive_calls = inconclusive;
        r.oracle_calls = searcher.calls - start;
        records.push(r);
    }
    Ok(PropertyVerdict::from_records(records, diam.notes))
}

#[allow(clippy::too_many_arguments)]
fn found_record(
    eps: f64,
    k: u64,
    radius: Radius,
    params: &CheckParams,
    bases: Vec<Point>,
    shifts: Vec<Point>,
    bound: f64,
    v: EmptinessVerdict,
) -> Result<EpsilonRecord> {
    let norm = params.norm.product_norm(&shifts)?;
    if norm >= bound {
        return Err(Error::ConstructionFailed(format!("shift norm {norm} is not below {bound}")));
    }
    Ok(EpsilonRecord {
        eps,
        found: true,
        k: Some(k),
        rho: match radius {
            Radius::Finite(r) => Some(r),
            Radius::Unbounded => None,
        },
        bases,
        shifts,
        shift_norm: Some(norm),
        shift_bound: Some(bound),
        emptiness: Some(v),
        inconclusive_calls: 0,
        oracle_calls: 0,
        note: String::new(),
    })
}

/// Extremality at the sequences `{x_i^k}` with the given `ρ`: for each grid ε,
/// some `k > 1/ε` and shifts with `⦀a⦀ < ε` make the shifted intersection miss
/// the `ρ`-ball.
pub fn check_extremal(sets: &[SetExpr], seq: &SequenceSpec, rho: Radius, params: &CheckParams) -> Result<PropertyVerdict> {
    if let Radius::Finite(r) = rho {
        if !(r > 0.0) {
            return Err(Error::InvalidInput("rho must be positive".into()));
        }
    }
    multi_search(sets, seq, params, &|eps| vec![(rho, eps)])
}

/// Radii `ρ ∈ (0, ε)` tried per ε: `ε/2` first, then the grid values below ε.
fn small_radii(eps: f64, params: &CheckParams) -> Vec<f64> {
    let mut out = vec![eps / 2.0];
    out.extend(params.rho_grid.iter().copied().filter(|r| *r < eps && *r != eps / 2.0));
    out
}

/// Stationarity at `{x_i^k}`: shifts bounded by `ερ` with `ρ ∈ (0, ε)`.
pub fn check_stationary(sets: &[SetExpr], seq: &SequenceSpec, params: &CheckParams) -> Result<PropertyVerdict> {
    multi_search(sets, seq, params, &|eps| {
        small_radii(eps, params).into_iter().map(|r| (Radius::Finite(r), eps * r)).collect()
    })
}

/// Auxiliary points `x_i ∈ Ω_i` with `⦀(x_i - x^k)⦀ < ε`: projections of `x^k`.
/// `Ok(None)` when some set is farther than ε.
fn auxiliary_points(sets: &[SetExpr], x: &Point, eps: f64, params: &CheckParams) -> Result<Vec<Vec<Point>>> {
    let tol = params.search.eta;
    let mut plain = Vec::with_capacity(sets.len());
    let mut edge = Vec::with_capacity(sets.len());
    for s in sets {
        if !s.holds(x.coords(), 0.0) {
            let p = Point::from(proj(s, x.coords(), tol)?);
            plain.push(p.clone());
            edge.push(p);
            continue;
        }
        plain.push(x.clone());
        // x inside the set: nearest boundary point reached from seeds that
        // leave the set, so that touching sets can be pulled apart
        let mut best: Option<(f64, Point)> = None;
        for f in [0.25, 0.5] {
            for j in 0..x.dim() {
                for sign in [-1.0, 1.0] {
                    let mut q = x.coords().to_vec();
                    q[j] += sign * f * eps;
                    if s.holds(&q, 0.0) {
                        continue;
                    }
                    let Ok(p) = proj(s, &q, tol) else { continue };
                    let p = Point::from(p);
                    let d = params.norm.base_norm(&(&p - x));
                    if best.as_ref().map_or(true, |(b, _)| d < *b) {
                        best = Some((d, p));
                    }
                }
            }
        }
        edge.push(best.map_or_else(|| x.clone(), |(_, p)| p));
    }
    let mut out = Vec::new();
    for tuple in [plain, edge] {
        let offs: Vec<Point> = tuple.iter().map(|p| p - x).collect();
        if params.norm.product_norm(&offs)? < eps && !out.contains(&tuple) {
            out.push(tuple);
        }
    }
    Ok(out)
}

/// Single-sequence search behind approximate (α-)stationarity.
/// `alpha = None` means the shift bound `ερ`, otherwise `αρ`.
fn approx_search(sets: &[SetExpr], seq: &SequenceSpec, alpha: Option<f64>, params: &CheckParams) -> Result<PropertyVerdict> {
    check_sets(sets, seq, true)?;
    params.validate()?;
    if let Some(a) = alpha {
        if !(a > 0.0) {
            return Err(Error::InvalidInput("alpha must be positive".into()));
        }
    }
    let mut searcher = Searcher::new(sets, params);
    let mut records = Vec::new();
    let exact = sets.iter().all(|s| s.capabilities().exact_projection);
    for &eps in &params.epsilons {
        let mut rng = rng_for(params, eps);
        let ks = ks_for(seq, eps, params);
        if ks.is_empty() {
            records.push(EpsilonRecord::failed(eps, format!("k budget {} does not exceed 1/eps", params.k_budget)));
            continue;
        }
        let start = searcher.calls;
        let mut inconclusive = 0;
        let mut rec = None;
        let mut missing_aux = 0;
        'outer: for &k in &ks {
            let x = seq.eval(k)?.remove(0);
            let tuples = auxiliary_points(sets, &x, eps, params)?;
            if tuples.is_empty() {
                missing_aux += 1;
                continue;
            }
            for aux in tuples {
                for rho in small_radii(eps, params) {
                    let bound = alpha.unwrap_or(eps) * rho;
                    match searcher.search(&aux, k, bound, Radius::Finite(rho), &mut rng)? {
                        ShiftOutcome::Found(shifts, v) => {
                            rec = Some(found_record(eps, k, Radius::Finite(rho), params, aux, shifts, bound, v)?);
                            break 'outer;
                        }
                        ShiftOutcome::Exhausted { inconclusive: c } => inconclusive += c,
                    }
                }
            }
        }
        let mut r = rec.unwrap_or_else(|| {
            let mut r = EpsilonRecord::failed(eps, "");
            r.k = ks.last().copied();
            if missing_aux > 0 && !exact {
                // iterative projections may miss nearby points
                r.note = format!("no auxiliary points found at {missing_aux} k values (iterative projection)");
            }
            r
        });
        r.inconclusive_calls = inconclusive;
        r.oracle_calls = searcher.calls - start;
        records.push(r);
    }
    Ok(PropertyVerdict::from_records(records, vec![]))
}

/// Approximate stationarity at a single sequence `{x^k}`.
pub fn check_approx_stationary(sets: &[SetExpr], seq: &SequenceSpec, params: &CheckParams) -> Result<PropertyVerdict> {
    approx_search(sets, seq, None, params)
}

/// Approximate α-stationarity: as approximate stationarity with the shift
/// bound `αρ`.
pub fn check_alpha_stationary(sets: &[SetExpr], seq: &SequenceSpec, alpha: f64, params: &CheckParams) -> Result<PropertyVerdict> {
    approx_search(sets, seq, Some(alpha), params)
}

/// Transversality at `{x^k}` (with constant α). Falsified when the α-stationary
/// search succeeds on the whole grid; Certified only by the catalog arguments
/// in [`analytic_transversal`]; Inconclusive otherwise.
pub fn check_transversal(sets: &[SetExpr], seq: &SequenceSpec, alpha: f64, params: &CheckParams) -> Result<PropertyVerdict> {
    let stat = check_alpha_stationary(sets, seq, alpha, params)?;
    if stat.outcome == Outcome::Certified {
        let mut notes = stat.notes.clone();
        notes.push("approximately alpha-stationary on the whole grid, hence not transversal".into());
        return Ok(PropertyVerdict { outcome: Outcome::Falsified, per_epsilon: stat.per_epsilon, notes });
    }
    let mut notes = stat.notes.clone();
    let outcome = match analytic_transversal(sets, alpha, &params.norm) {
        Some(note) => {
            notes.push(note);
            Outcome::Certified
        }
        None => {
            notes.push("no analytic transversality argument applies".into());
            Outcome::Inconclusive
        }
    };
    Ok(PropertyVerdict { outcome, per_epsilon: stat.per_epsilon, notes })
}

/// Catalog arguments showing that every `αρ`-shift of the sets, based at any
/// of their points, still meets the `ρ`-ball.
///
/// * one set: `-a_1` lies in `Ω_1 - x_1 - a_1` and `‖a_1‖ < αρ ≤ ρ`;
/// * halfspaces `⟨n_i, x⟩ ≤ b_i` with independent normals: with `N w = d`,
///   `d_i = ‖n_i‖_*`, the point `z = -αρ w` lies in every shifted set, so it
///   suffices that `α‖w‖ < 1`.
pub fn analytic_transversal(sets: &[SetExpr], alpha: f64, norm: &NormSpec) -> Option<String> {
    if sets.len() == 1 && alpha <= 1.0 {
        return Some("single set: the negated shift stays in the ball".into());
    }
    let normals: Vec<&Vec<f64>> = sets
        .iter()
        .map(|s| match s {
            SetExpr::Halfspace { a, .. } => Some(a),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let d = normals[0].len();
    let m = normals.len();
    if m > d {
        return None;
    }
    // least-norm solution w = N^T (N N^T)^{-1} dvec
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            gram[i * m + j] = normals[i].iter().zip(normals[j]).map(|(x, y)| x * y).sum();
        }
    }
    let dvec: Vec<f64> = normals.iter().map(|n| norm.base.dual_norm(n)).collect();
    let y = solve(&gram, &dvec, m)?;
    let mut w = vec![0.0; d];
    for (yi, n) in y.iter().zip(&normals) {
        for (wj, nj) in w.iter_mut().zip(n.iter()) {
            *wj += yi * nj;
        }
    }
    let gamma = norm.base.norm(&w);
    (alpha * gamma < 1.0).then(|| format!("halfspaces with independent normals: alpha * gamma = {:.3} < 1", alpha * gamma))
}

/// Nearest float `a` to `t - x` with `x + a == t` exactly, when one exists
/// within a few ulps.
fn exact_offset(t: f64, x: f64) -> Option<f64> {
    let mut a = t - x;
    for _ in 0..16 {
        let s = x + a;
        if s == t {
            return Some(a);
        }
        a = if s < t { a.next_up() } else { a.next_down() };
    }
    None
}

/// Moves per-ε witnesses from `{x_i^k}` to a nearby `{x_i'^k}`:
/// `a_i' = a_i + x_i^k - x_i'^k` keeps every translation `x_i + a_i`
/// unchanged, so emptiness carries over without re-solving. Shifts are
/// rounded so that the translations agree bit for bit.
///
/// A record whose transferred shift reaches ε (the original had no room for
/// the gap) is reported at `2ε`, which the identity always covers once the
/// gap is below ε.
pub fn transfer_witness(
    sets: &[SetExpr],
    verdict: &PropertyVerdict,
    seq: &SequenceSpec,
    seq_prime: &SequenceSpec,
    params: &CheckParams,
) -> Result<PropertyVerdict> {
    check_sets(sets, seq, false)?;
    check_sets(sets, seq_prime, false)?;
    if verdict.outcome != Outcome::Certified {
        return Err(Error::InvalidInput("only certified verdicts can be transferred".into()));
    }
    let gap_at = |k: u64| -> Result<f64> {
        let (a, b) = (seq.eval(k)?, seq_prime.eval(k)?);
        let d: Vec<Point> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        params.norm.product_norm(&d)
    };
    let smallest = verdict.per_epsilon.iter().map(|r| r.eps).fold(f64::INFINITY, f64::min);
    let tail = gap_at(params.k_budget)?;
    if !(tail < smallest / 2.0) {
        return Err(Error::GapTooLarge { gap: tail, needed: smallest / 2.0 });
    }
    let mut records = Vec::new();
    let mut notes = vec![format!("sequence gap at k = {}: {tail:.3e}", params.k_budget)];
    for r in &verdict.per_epsilon {
        let k = r.k.ok_or_else(|| Error::InvalidInput("record without k".into()))?;
        let gap = gap_at(k)?;
        let new_bases = seq_prime.eval(k)?;
        let translations = r.translations();
        let mut shifts = Vec::with_capacity(translations.len());
        for (t, x) in translations.iter().zip(&new_bases) {
            let mut a = Vec::with_capacity(t.dim());
            for (tj, xj) in t.coords().iter().zip(x.coords()) {
                a.push(exact_offset(*tj, *xj).ok_or_else(|| Error::ConstructionFailed("no exact offset".into()))?);
            }
            shifts.push(Point::from(a));
        }
        let norm = params.norm.product_norm(&shifts)?;
        let eps = if norm < r.eps {
            r.eps
        } else if gap < r.eps && norm < 2.0 * r.eps {
            notes.push(format!("witness for eps = {} transferred at 2 eps (gap {gap:.3e})", r.eps));
            2.0 * r.eps
        } else {
            return Err(Error::GapTooLarge { gap, needed: r.eps - r.shift_norm.unwrap_or(0.0) });
        };
        let mut out = r.clone();
        out.eps = eps;
        out.bases = new_bases;
        out.shifts = shifts;
        out.shift_norm = Some(norm);
        if eps != r.eps {
            out.shift_bound = Some(2.0 * r.shift_bound.unwrap_or(r.eps));
        }
        if out.translations() != translations {
            return Err(Error::ConstructionFailed("translation identity does not hold bitwise".into()));
        }
        records.push(out);
    }
    Ok(PropertyVerdict { outcome: Outcome::Certified, per_epsilon: records, notes })
}

/// Independent replay of a record through the grid oracle.
pub fn reverify_record(sets: &[SetExpr], rec: &EpsilonRecord, params: &CheckParams) -> Result<EmptinessVerdict> {
    let radius = rec.rho.map_or(Radius::Unbounded, Radius::Finite);
    let mut s = Searcher::new(sets, params);
    s.oracle(&rec.bases, &rec.shifts, radius)
}

/// Rescaling from the convex-case argument: if `x'` lies in
/// `⋂(Ω_i - x_i - a_i/t) ∩ ρB` then `t x'` lies in `⋂(Ω_i - x_i - a_i) ∩ tρB`.
/// Returns `t x'` and whether membership was confirmed.
pub fn rescale_witness(sets: &[SetExpr], bases: &[Point], shifts: &[Point], witness: &Point, t: f64, tol: f64) -> Result<(Point, bool)> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidInput("rescaling factor must lie in (0, 1]".into()));
    }
    let y = witness.scale(t);
    let mut ok = true;
    for ((s, x), a) in sets.iter().zip(bases).zip(shifts) {
        let p = &(&y + x) + a;
        ok &= s.contains(&p, tol)?;
    }
    Ok((y, ok))
}

/// One `(ε, ρ)` cell of the convex equivalence suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub eps: f64,
    pub rho: f64,
    /// Assertions (i) extremal at this ρ, (ii) extremal at the reference ρ,
    /// (iii) stationary, (iv) shift search at `(ε, ρ)` built from (iii) by
    /// rescaling or found directly.
    pub outcomes: [Outcome; 4],
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleCheck {
    pub t: f64,
    pub witness: Point,
    pub scaled: Point,
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub cells: Vec<SuiteCell>,
    pub agreement: bool,
    pub rescaling: Vec<RescaleCheck>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub epsilons: Vec<f64>,
    pub rhos: Vec<f64>,
    pub check: CheckParams,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams { epsilons: vec![1.0, 0.1], rhos: vec![1.0, 2.0], check: CheckParams::default() }
    }
}

fn single_eps(params: &CheckParams, eps: f64) -> CheckParams {
    let mut p = params.clone();
    p.epsilons = vec![eps];
    p
}

/// Evaluates the four equivalent assertions of the convex case on every
/// `(ε, ρ)` cell and reports whether they agree.
///
/// Stationarity at a cell uses `ε' = min(ε, ε/ρ)` and `ρ' = ε'/2`; a witness
/// there is mapped back to radius ρ by the rescaling `t = ρ'/ρ`, which is how
/// the argument derives (iv) from (iii).
pub fn convex_equivalence_suite(sets: &[SetExpr], seq: &SequenceSpec, params: &SuiteParams) -> Result<SuiteReport> {
    for (i, s) in sets.iter().enumerate() {
        if !s.is_convex() {
            return Err(Error::NonConvexInput { index: i });
        }
    }
    check_sets(sets, seq, false)?;
    if params.epsilons.is_empty() || params.rhos.is_empty() {
        return Err(Error::InvalidInput("suite needs nonempty epsilon and rho grids".into()));
    }
    let rho_ref = params.rhos.iter().copied().fold(0.0, f64::max);
    let mut cells = Vec::new();
    let mut rescaling = Vec::new();
    let mut notes = Vec::new();
    for &eps in &params.epsilons {
        let p = single_eps(&params.check, eps);
        for &rho in &params.rhos {
            let i = check_extremal(sets, seq, Radius::Finite(rho), &p)?;
            let ii = check_extremal(sets, seq, Radius::Finite(rho_ref), &p)?;
            let eps_s = eps.min(eps / rho);
            let rho_s = eps_s / 2.0;
            let iii = multi_search(sets, seq, &single_eps(&params.check, eps_s), &|e| vec![(Radius::Finite(rho_s), e * rho_s)])?;
            let iv = match iii.per_epsilon.first() {
                Some(r) if r.found => {
                    // a'/t with t = ρ'/ρ keeps ⦀a'/t⦀ < ε'ρ ≤ ε at radius ρ
                    let t = rho_s / rho;
                    let mut scaled = r.clone();
                    scaled.shifts = r.shifts.iter().map(|a| a.scale(1.0 / t)).collect();
                    scaled.rho = Some(rho);
                    let v = reverify_record(sets, &scaled, &p)?;
                    let norm = params.check.norm.product_norm(&scaled.shifts)?;
                    if v.is_empty() && norm < eps {
                        Outcome::Certified
                    } else {
                        notes.push(format!("rescaled stationarity witness not confirmed at eps {eps}, rho {rho}"));
                        check_extremal(sets, seq, Radius::Finite(rho), &p)?.outcome
                    }
                }
                _ => check_extremal(sets, seq, Radius::Finite(rho), &p)?.outcome,
            };
            // exercise the rescaling map on nonempty configurations
            if let Some(r) = i.per_epsilon.first() {
                if !r.found {
                    if let Some(k) = r.k {
                        let bases = seq.eval(k)?;
                        let zero = vec![Point::zeros(bases[0].dim()); bases.len()];
                        let v = intersection_empty(sets, &bases, Radius::Finite(rho), Method::GridOracle, &p.search)?;
                        if let Some(w) = v.witness {
                            let (scaled, member) = rescale_witness(sets, &bases, &zero, &w, 0.5, 1e-6)?;
                            rescaling.push(RescaleCheck { t: 0.5, witness: w, scaled, member });
                        }
                    }
                }
            }
            let outcomes = [i.outcome, ii.outcome, iii.outcome, iv];
            let agree = outcomes.iter().all(|o| *o == outcomes[0]);
            cells.push(SuiteCell { eps, rho, outcomes, agree });
        }
    }
    let agreement = cells.iter().all(|c| c.agree) && rescaling.iter().all(|r| r.member);
    Ok(SuiteReport { cells, agreement, rescaling, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, Relation};
    use crate::optimization::ScalarFunction;

    fn e15() -> Vec<SetExpr> {
        vec![
            SetExpr::hyperbolic(Relation::Ge, 1.0, vec![Face::strict(vec![-1.0, 0.0], 0.0)]),
            SetExpr::halfspace(vec![0.0, 1.0], 0.0),
        ]
    }

    fn e15_seq() -> SequenceSpec {
        SequenceSpec::closed_form(&[&["k", "1/k"], &["k", "0"]]).unwrap()
    }

    fn e15_hint() -> ShiftHint {
        ShiftHint::new(&[&["0", "-(1/k+eps)/2"], &["0", "0"]]).unwrap()
    }

    fn params(eps: &[f64]) -> CheckParams {
        CheckParams::default().with_epsilons(eps).with_hints(vec![e15_hint()])
    }

    #[test]
    fn k_schedule_starts_above_inverse_eps() {
        assert_eq!(k_schedule(0.1, 100), vec![11, 22, 44, 88]);
        assert_eq!(k_schedule(1.0, 1), Vec::<u64>::new());
    }

    #[test]
    fn diam_examples() {
        let v = check_diam_vanishes(&e15_seq(), 10_000, 1e-3).unwrap();
        assert_eq!(v.outcome, Outcome::Certified);
        let c = SequenceSpec::closed_form(&[&["2", "3"], &["2", "3"]]).unwrap();
        assert_eq!(check_diam_vanishes(&c, 100, 1e-3).unwrap().outcome, Outcome::Certified);
        let f = SequenceSpec::closed_form(&[&["k", "1"], &["k", "0"]]).unwrap();
        assert_eq!(check_diam_vanishes(&f, 100, 1e-3).unwrap().outcome, Outcome::Falsified);
    }

    #[test]
    fn e15_extremal_with_hint() {
        let v = check_extremal(&e15(), &e15_seq(), Radius::Finite(1.0), &params(&[1.0, 0.1, 0.01, 0.001])).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:#?}");
        for r in &v.per_epsilon {
            assert!(r.k.unwrap() as f64 > 1.0 / r.eps);
            assert!(r.shift_norm.unwrap() < r.eps);
        }
    }

    #[test]
    fn same_halfspace_twice_is_not_extremal() {
        let h = SetExpr::halfspace(vec![0.0, 1.0], 0.0);
        let seq = SequenceSpec::closed_form(&[&["0", "0"], &["0", "0"]]).unwrap();
        let p = CheckParams::default().with_epsilons(&[0.5, 0.1]);
        let v = check_extremal(&[h.clone(), h.clone()], &seq, Radius::Finite(1.0), &p).unwrap();
        assert_eq!(v.outcome, Outcome::Falsified);
        let s = check_stationary(&[h.clone(), h], &seq, &p).unwrap();
        assert_eq!(s.outcome, Outcome::Falsified);
    }

    #[test]
    fn exp_epigraph_pair_is_stationary() {
        let sets = vec![
            SetExpr::Epigraph { f: ScalarFunction::Exp { scale: 1.0, rate: -1.0 } },
            SetExpr::halfspace(vec![0.0, 1.0], 0.0),
        ];
        let seq = SequenceSpec::closed_form(&[&["k", "exp(-k)"], &["k", "0"]]).unwrap();
        let hint = ShiftHint::new(&[&["0", "-(exp(-k)+eps)/2"], &["0", "0"]]).unwrap();
        let p = CheckParams::default().with_epsilons(&[1.0, 0.1, 0.01]).with_hints(vec![hint]);
        let v = check_stationary(&sets, &seq, &p).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:#?}");
    }

    #[test]
    fn approx_stationary_midpoint_and_far_sequence() {
        let mid = e15_seq().affine_combination(&[0.5, 0.5]).unwrap();
        let p = CheckParams::default().with_epsilons(&[1.0, 0.1]);
        let v = check_approx_stationary(&e15(), &mid, &p).unwrap();
        assert_eq!(v.outcome, Outcome::Certified, "{v:#?}");

        let far = SequenceSpec::single(&["0", "5"]).unwrap();
        let sets = vec![SetExpr::halfspace(vec![0.0, 1.0], 0.0), SetExpr::halfspace(vec![1.0, 0.0], 0.0)];
        let v = check_approx_stationary(&sets, &far, &CheckParams::default().with_epsilons(&[0.5])).unwrap();
        assert_eq!(v.outcome, Outcome::Falsified);

        let inner = SequenceSpec::single(&["-1", "-1"]).unwrap();
        let v = check_approx_stationary(&sets, &inner, &CheckParams::default().with_epsilons(&[0.5, 0.1])).unwrap();
        assert_eq!(v.outcome, Outcome::Falsified);
    }

    #[test]
    fn alpha_stationarity_and_transversality() {
        let crossing = vec![SetExpr::halfspace(vec![1.0, 0.0], 0.0), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let at0 = SequenceSpec::single(&["1/k", "-1/k"]).unwrap();
        let p = CheckParams::default().with_epsilons(&[0.5, 0.1]);
        assert_eq!(check_alpha_stationary(&crossing, &at0, 0.1, &p).unwrap().outcome, Outcome::Falsified);
        assert_eq!(check_transversal(&crossing, &at0, 0.1, &p).unwrap().outcome, Outcome::Certified);

        let mid = e15_seq().affine_combination(&[0.5, 0.5]).unwrap();
        let p = CheckParams::default().with_epsilons(&[1.0, 0.1]);
        assert_eq!(check_alpha_stationary(&e15(), &mid, 1.0, &p).unwrap().outcome, Outcome::Certified);
        assert_eq!(check_transversal(&e15(), &mid, 1.0, &p).unwrap().outcome, Outcome::Falsified);

        let one = vec![SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let own = SequenceSpec::single(&["k", "0"]).unwrap();
        assert_eq!(check_transversal(&one, &own, 0.5, &p).unwrap().outcome, Outcome::Certified);
    }

    #[test]
    fn transfer_keeps_translations() {
        let p = params(&[1.0, 0.1, 0.01]);
        let v = check_extremal(&e15(), &e15_seq(), Radius::Finite(1.0), &p).unwrap();
        let same = transfer_witness(&e15(), &v, &e15_seq(), &e15_seq(), &p).unwrap();
        assert_eq!(same.per_epsilon, v.per_epsilon);

        let near = SequenceSpec::closed_form(&[&["k+1/k^2", "1/(k+1/k^2)"], &["k+1/k^2", "0"]]).unwrap();
        let t = transfer_witness(&e15(), &v, &e15_seq(), &near, &p).unwrap();
        for (a, b) in t.per_epsilon.iter().zip(&v.per_epsilon) {
            assert_eq!(a.translations(), b.translations());
            assert!(reverify_record(&e15(), a, &p).unwrap().is_empty());
        }

        let far = SequenceSpec::closed_form(&[&["k", "1/k+1"], &["k", "1"]]).unwrap();
        assert!(matches!(transfer_witness(&e15(), &v, &e15_seq(), &far, &p), Err(Error::GapTooLarge { .. })));
    }

    #[test]
    fn rescaling_halves_witness() {
        let sets = vec![SetExpr::halfspace(vec![1.0, 0.0], 0.0), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let bases = vec![Point::zeros(2), Point::zeros(2)];
        let shifts = vec![Point::from([0.1, 0.0]), Point::from([0.0, 0.1])];
        // x' in (Ω_i - a_i/t) with t = 0.5
        let w = Point::from([-0.3, -0.4]);
        let (y, ok) = rescale_witness(&sets, &bases, &shifts, &w, 0.5, 0.0).unwrap();
        assert_eq!(y, Point::from([-0.15, -0.2]));
        assert!(ok);
    }

    #[test]
    fn suite_rejects_nonconvex() {
        let sets = vec![SetExpr::hyperbolic(Relation::Le, 0.0, vec![]), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let seq = SequenceSpec::closed_form(&[&["0", "0"], &["0", "0"]]).unwrap();
        assert!(matches!(
            convex_equivalence_suite(&sets, &seq, &SuiteParams::default()),
            Err(Error::NonConvexInput { index: 0 })
        ));
    }

    #[test]
    fn suite_agrees_on_crossing_and_touching() {
        let crossing = vec![SetExpr::halfspace(vec![1.0, 0.0], 0.0), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let z = SequenceSpec::closed_form(&[&["0", "0"], &["0", "0"]]).unwrap();
        let r = convex_equivalence_suite(&crossing, &z, &SuiteParams::default()).unwrap();
        assert!(r.agreement, "{r:#?}");
        assert!(r.cells.iter().all(|c| c.outcomes[0] == Outcome::Falsified));
        assert!(!r.rescaling.is_empty());

        let touching = vec![SetExpr::halfspace(vec![0.0, -1.0], 0.0), SetExpr::halfspace(vec![0.0, 1.0], 0.0)];
        let r = convex_equivalence_suite(&touching, &z, &SuiteParams::default()).unwrap();
        assert!(r.agreement, "{r:#?}");
        assert!(r.cells.iter().all(|c| c.outcomes[0] == Outcome::Certified));
    }
}
