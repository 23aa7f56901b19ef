//! Conjugating a toral subalgebra into the standard Cartan subalgebra of e8
//! by greedy search over the inner automorphisms `exp(±ad e_γ)`.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chevgroup::EmbeddedF4;
use crate::error::{Error, Result};
use crate::gf::{FieldScalar, Matrix};
use crate::liealg::LieAlgebra;

/// One generator `x_γ(s)`, `s = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub root: usize,
    pub sign: i8,
}

impl Move {
    pub fn index(self) -> usize {
        2 * self.root + usize::from(self.sign < 0)
    }

    pub fn from_index(i: usize) -> Self {
        Move { root: i / 2, sign: if i.is_multiple_of(2) { 1 } else { -1 } }
    }

    pub fn inverse(self) -> Self {
        Move { root: self.root, sign: -self.sign }
    }

    pub fn label<F: FieldScalar>(self, e8: &LieAlgebra<F>) -> String {
        format!("x({},{:+})", e8.root_system().root(self.root).label(), self.sign)
    }

    pub fn parse<F: FieldScalar>(e8: &LieAlgebra<F>, s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad move {s:?}"));
        let inner = s.strip_prefix("x(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (root, sign) = inner.split_once(',').ok_or_else(bad)?;
        let sign = match sign {
            "+1" => 1,
            "-1" => -1,
            _ => return Err(bad()),
        };
        Ok(Move { root: e8.root_system().index_of_label(root)?, sign })
    }

    fn scalar<F: FieldScalar>(self) -> F {
        if self.sign > 0 {
            F::one()
        } else {
            -F::one()
        }
    }
}

/// All `2 × 240` generators, in index order.
pub fn generators<F: FieldScalar>(e8: &LieAlgebra<F>) -> Vec<Move> {
    (0..2 * e8.num_roots()).map(Move::from_index).collect()
}

/// The 248×248 matrix of `exp(s ad e_γ)`.
pub fn inner_automorphism<F: FieldScalar>(g: &EmbeddedF4<F>, mv: Move) -> Matrix<F> {
    g.exp_root(mv.root, mv.scalar()).into_matrix()
}

pub fn apply_move<F: FieldScalar>(g: &EmbeddedF4<F>, mv: Move, v: &mut [F]) {
    g.exp_root_apply(mv.root, mv.scalar(), v);
}

/// Number of zero root-space coordinates.
pub fn zero_roots<F: FieldScalar>(e8: &LieAlgebra<F>, v: &[F]) -> usize {
    v[..e8.num_roots()].iter().filter(|c| c.is_zero()).count()
}

pub fn is_aligned<F: FieldScalar>(e8: &LieAlgebra<F>, v: &[F]) -> bool {
    zero_roots(e8, v) == e8.num_roots()
}

/// Checks that the elements commute pairwise and that each `ad x`
/// satisfies `(ad x)^9 = ad x`, i.e. is diagonalizable over GF(9).
pub fn check_toral<F: FieldScalar>(e8: &LieAlgebra<F>, xs: &[Vec<F>]) -> Result<()> {
    for (i, x) in xs.iter().enumerate() {
        for y in &xs[i + 1..] {
            if e8.bracket_vec(x, y).iter().any(|c| !c.is_zero()) {
                return Err(Error::NotToral(format!("target {i} does not commute with the others")));
            }
        }
        let ad = e8.ad_matrix_vec(x);
        if ad.pow(9) != ad {
            return Err(Error::NotToral(format!("ad of target {i} is not diagonalizable over GF(9)")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClimbConfig {
    pub kick_interval: usize,
    /// Steps, counting greedy moves, backtracks and kicks.
    pub budget: usize,
    pub seed: u64,
}

impl Default for ClimbConfig {
    fn default() -> Self {
        ClimbConfig { kick_interval: 100, budget: 6000, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClimbState<F> {
    pub targets: Vec<Vec<F>>,
    /// Moves taking the initial targets to `targets`.
    pub history: Vec<String>,
    /// Total zero root coordinates over all targets.
    pub objective: usize,
    pub rng_seed: u64,
}

impl<F: FieldScalar> ClimbState<F> {
    pub fn new(e8: &LieAlgebra<F>, targets: Vec<Vec<F>>, rng_seed: u64) -> Self {
        let objective = targets.iter().map(|t| zero_roots(e8, t)).sum();
        ClimbState { targets, history: Vec::new(), objective, rng_seed }
    }

    pub fn max_objective(&self, e8: &LieAlgebra<F>) -> usize {
        self.targets.len() * e8.num_roots()
    }

    pub fn aligned(&self, e8: &LieAlgebra<F>) -> Vec<bool> {
        self.targets.iter().map(|t| is_aligned(e8, t)).collect()
    }

    fn apply(&mut self, g: &EmbeddedF4<F>, mv: Move) {
        for t in &mut self.targets {
            apply_move(g, mv, t);
        }
        self.history.push(mv.label(g.e8()));
        self.objective = self.targets.iter().map(|t| zero_roots(g.e8(), t)).sum();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Greedy,
    Backtrack,
    Kick,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub phase: u8,
    pub kind: StepKind,
    #[serde(rename = "move")]
    pub mv: String,
    /// Zero root coordinates of the targets the phase scores.
    pub score: usize,
    pub objective: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClimbOutcome<F> {
    /// Best state reached (highest score, earliest on ties).
    pub best: ClimbState<F>,
    pub steps: usize,
    pub trace: Vec<TraceEntry>,
}

impl<F: FieldScalar> ClimbOutcome<F> {
    pub fn solved(&self, e8: &LieAlgebra<F>) -> bool {
        self.best.objective == self.best.max_objective(e8)
    }
}

/// A state we moved away from greedily, with its candidates ranked best
/// first; `next` is the first one not yet tried.
struct Frame<F> {
    state: ClimbState<F>,
    ranked: Vec<Move>,
    next: usize,
}

fn fingerprint<F: Hash>(targets: &[Vec<F>]) -> u64 {
    let mut h = DefaultHasher::new();
    targets.hash(&mut h);
    h.finish()
}

struct Phase<'a, F: FieldScalar> {
    g: &'a EmbeddedF4<F>,
    gens: Vec<Move>,
    /// Targets counted by the score.
    focus: Vec<usize>,
    /// Only moves keeping already aligned targets aligned.
    protect: bool,
    id: u8,
}

impl<F: FieldScalar> Phase<'_, F> {
    fn score(&self, targets: &[Vec<F>]) -> usize {
        self.focus.iter().map(|&i| zero_roots(self.g.e8(), &targets[i])).sum()
    }

    fn full(&self) -> usize {
        self.focus.len() * self.g.e8().num_roots()
    }

    fn allowed(&self, state: &ClimbState<F>, mv: Move) -> bool {
        if !self.protect {
            return true;
        }
        let e8 = self.g.e8();
        state.targets.iter().all(|t| {
            if !is_aligned(e8, t) {
                return true;
            }
            let mut v = t.clone();
            apply_move(self.g, mv, &mut v);
            is_aligned(e8, &v)
        })
    }

    /// Allowed unvisited moves ranked by resulting score, descending, then
    /// by generator index.
    fn rank(&self, state: &ClimbState<F>, visited: &HashSet<u64>) -> Vec<(Move, usize)> {
        let mut out = Vec::new();
        for &mv in &self.gens {
            if !self.allowed(state, mv) {
                continue;
            }
            let mut ts = state.targets.clone();
            for t in &mut ts {
                apply_move(self.g, mv, t);
            }
            if visited.contains(&fingerprint(&ts)) {
                continue;
            }
            out.push((mv, self.score(&ts)));
        }
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.index().cmp(&b.0.index())));
        out
    }

    fn run(
        &self,
        start: ClimbState<F>,
        config: &ClimbConfig,
        rng: &mut ChaCha8Rng,
        step0: usize,
        trace: &mut Vec<TraceEntry>,
    ) -> (ClimbState<F>, usize) {
        let mut state = start;
        let mut best = state.clone();
        let mut best_score = self.score(&best.targets);
        let mut visited = HashSet::from([fingerprint(&state.targets)]);
        let mut stack: Vec<Frame<F>> = Vec::new();
        let mut step = step0;
        while step < config.budget && best_score < self.full() {
            step += 1;
            let current = self.score(&state.targets);
            let kind;
            if config.kick_interval > 0 && step.is_multiple_of(config.kick_interval) {
                let pool: Vec<Move> = self.gens.iter().copied().filter(|&m| self.allowed(&state, m)).collect();
                if pool.is_empty() {
                    break;
                }
                state.apply(self.g, pool[rng.gen_range(0..pool.len())]);
                stack.clear();
                kind = StepKind::Kick;
            } else {
                let ranked = self.rank(&state, &visited);
                match ranked.first() {
                    Some(&(mv, s)) if s > current => {
                        let before = state.clone();
                        state.apply(self.g, mv);
                        stack.push(Frame { state: before, ranked: ranked.iter().map(|r| r.0).collect(), next: 1 });
                        kind = StepKind::Greedy;
                    }
                    _ => {
                        // Back to the latest state with an untried candidate
                        // leading somewhere new.
                        let mut moved = false;
                        while let Some(top) = stack.last_mut() {
                            while top.next < top.ranked.len() {
                                let mv = top.ranked[top.next];
                                top.next += 1;
                                let mut cand = top.state.clone();
                                cand.apply(self.g, mv);
                                if !visited.contains(&fingerprint(&cand.targets)) {
                                    state = cand;
                                    moved = true;
                                    break;
                                }
                            }
                            if moved {
                                break;
                            }
                            stack.pop();
                        }
                        if !moved {
                            // Nothing left to try: take the best sideways move.
                            let Some(&(mv, _)) = ranked.first() else { break };
                            state.apply(self.g, mv);
                        }
                        kind = StepKind::Backtrack;
                    }
                }
            }
            visited.insert(fingerprint(&state.targets));
            let s = self.score(&state.targets);
            trace.push(TraceEntry {
                step,
                phase: self.id,
                kind,
                mv: state.history.last().cloned().unwrap_or_default(),
                score: s,
                objective: state.objective,
            });
            if s > best_score {
                best_score = s;
                best = state.clone();
            }
        }
        (best, step)
    }
}

/// Greedy climb on the first target alone, then [`phase_two`] on all of
/// them. Returns the best state found within the budget.
pub fn climb<F: FieldScalar>(
    g: &EmbeddedF4<F>,
    initial: &[Vec<F>],
    config: &ClimbConfig,
) -> Result<ClimbOutcome<F>> {
    if initial.is_empty() {
        return Err(Error::NotToral("no targets".into()));
    }
    check_toral(g.e8(), initial)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let state = ClimbState::new(g.e8(), initial.to_vec(), config.seed);
    let mut trace = Vec::new();
    let one = Phase { g, gens: generators(g.e8()), focus: vec![0], protect: false, id: 1 };
    let (best, steps) = one.run(state, config, &mut rng, 0, &mut trace);
    if !is_aligned(g.e8(), &best.targets[0]) {
        return Ok(ClimbOutcome { best, steps, trace });
    }
    phase_two_inner(g, best, config, &mut rng, steps, trace)
}

/// Climbs on the joint objective using only moves that keep the aligned
/// targets aligned. The state's first target must already be aligned.
pub fn phase_two<F: FieldScalar>(
    g: &EmbeddedF4<F>,
    state: ClimbState<F>,
    config: &ClimbConfig,
) -> Result<ClimbOutcome<F>> {
    if !state.targets.first().is_some_and(|t| is_aligned(g.e8(), t)) {
        return Err(Error::NotToral("first target is not in the Cartan subalgebra".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(state.rng_seed);
    rng.set_stream(2);
    phase_two_inner(g, state, config, &mut rng, 0, Vec::new())
}

fn phase_two_inner<F: FieldScalar>(
    g: &EmbeddedF4<F>,
    state: ClimbState<F>,
    config: &ClimbConfig,
    rng: &mut ChaCha8Rng,
    step0: usize,
    mut trace: Vec<TraceEntry>,
) -> Result<ClimbOutcome<F>> {
    let two = Phase { g, gens: generators(g.e8()), focus: (0..state.targets.len()).collect(), protect: true, id: 2 };
    let (best, steps) = two.run(state, config, rng, step0, &mut trace);
    Ok(ClimbOutcome { best, steps, trace })
}

/// Applies a history of move labels to the initial targets.
pub fn replay<F: FieldScalar>(g: &EmbeddedF4<F>, initial: &[Vec<F>], history: &[String]) -> Result<Vec<Vec<F>>> {
    let mut ts = initial.to_vec();
    for label in history {
        let mv = Move::parse(g.e8(), label)?;
        for t in &mut ts {
            apply_move(g, mv, t);
        }
    }
    Ok(ts)
}

/// The Cartan subalgebra basis `h_1..h_4` of the embedded f4.
pub fn f4_toral_basis<F: FieldScalar>(g: &EmbeddedF4<F>) -> Vec<Vec<F>> {
    (0..4).map(|i| g.basis().h(i).coeffs().to_vec()).collect()
}

/// A seeded random word of `steps` generators and the targets it produces.
pub fn scramble<F: FieldScalar>(g: &EmbeddedF4<F>, targets: &[Vec<F>], seed: u64, steps: usize) -> (Vec<Vec<F>>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let n = 2 * g.e8().num_roots();
    let word: Vec<Move> = (0..steps).map(|_| Move::from_index(rng.gen_range(0..n))).collect();
    let labels = word.iter().map(|m| m.label(g.e8())).collect();
    let mut ts = targets.to_vec();
    for &mv in &word {
        for t in &mut ts {
            apply_move(g, mv, t);
        }
    }
    (ts, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Gf3;
    use num_traits::Zero;

    fn cfg(budget: usize, seed: u64) -> ClimbConfig {
        ClimbConfig { kick_interval: 100, budget, seed }
    }

    #[test]
    fn generator_count_and_labels() {
        let e8 = LieAlgebra::<Gf3>::e8();
        let gens = generators(&e8);
        assert_eq!(gens.len(), 480);
        for (i, &m) in gens.iter().enumerate() {
            assert_eq!(m.index(), i);
            assert_eq!(Move::parse(&e8, &m.label(&e8)).unwrap(), m);
        }
        assert!(Move::parse(&e8, "x(00010000,2)").is_err());
        assert!(Move::parse(&e8, "y(00010000,+1)").is_err());
    }

    #[test]
    fn inverse_pair_is_identity() {
        let g = EmbeddedF4::<Gf3>::standard();
        for i in [0, 7, 241, 479] {
            let m = Move::from_index(i);
            let p = inner_automorphism(&g, m).mul(&inner_automorphism(&g, m.inverse()));
            assert!(p.is_identity());
        }
    }

    #[test]
    fn action_on_cartan() {
        // exp(ad e_γ) h = h − γ(h) e_γ
        let g = EmbeddedF4::<Gf3>::standard();
        let e8 = g.e8();
        let rs = e8.root_system();
        let a = rs.index_of_label("00010000").unwrap();
        let h = e8.h(3).coeffs().to_vec();
        let mut v = h.clone();
        apply_move(&g, Move { root: a, sign: 1 }, &mut v);
        assert_ne!(v, h);
        assert_eq!(zero_roots(e8, &v), 239);
        // orthogonal simple root: γ(h) = 0
        let b = rs.index_of_label("10000000").unwrap();
        let mut w = h.clone();
        apply_move(&g, Move { root: b, sign: -1 }, &mut w);
        assert_eq!(w, h);
    }

    #[test]
    fn toral_check() {
        let g = EmbeddedF4::<Gf3>::standard();
        let e8 = g.e8();
        assert!(check_toral(e8, &f4_toral_basis(&g)).is_ok());
        let e = e8.e(0).coeffs().to_vec();
        assert!(matches!(check_toral(e8, &[e]), Err(Error::NotToral(_))));
        let h = e8.h(0).coeffs().to_vec();
        let mut x = h.clone();
        apply_move(&g, Move { root: 5, sign: 1 }, &mut x);
        // toral but not commuting with h unless the root pairs trivially with it
        let r = check_toral(e8, &[h.clone(), x.clone()]);
        assert_eq!(r.is_ok(), e8.bracket_vec(&h, &x).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn aligned_start_returns_immediately() {
        let g = EmbeddedF4::<Gf3>::standard();
        let out = climb(&g, &f4_toral_basis(&g), &cfg(100, 1)).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.best.objective, 960);
        assert!(out.solved(g.e8()));
        assert!(out.best.history.is_empty());
    }

    #[test]
    fn single_cartan_target() {
        let g = EmbeddedF4::<Gf3>::standard();
        let st = ClimbState::new(g.e8(), vec![g.e8().h(3).coeffs().to_vec()], 0);
        assert_eq!(st.objective, 240);
        assert_eq!(st.max_objective(g.e8()), 240);
    }

    #[test]
    fn aligned_targets_are_diagonal() {
        let g = EmbeddedF4::<Gf3>::standard();
        for t in f4_toral_basis(&g) {
            assert!(is_aligned(g.e8(), &t));
            assert!(g.e8().ad_matrix_vec(&t).is_diagonal());
        }
    }

    #[test]
    fn short_scramble_is_undone_and_replays() {
        let g = EmbeddedF4::<Gf3>::standard();
        let (s, word) = scramble(&g, &f4_toral_basis(&g), 3, 4);
        assert_eq!(word.len(), 4);
        let c = cfg(2000, 3);
        let out = climb(&g, &s, &c).unwrap();
        assert!(out.solved(g.e8()));
        assert_eq!(replay(&g, &s, &out.best.history).unwrap(), out.best.targets);
        let again = climb(&g, &s, &c).unwrap();
        assert_eq!(again.best, out.best);
        assert_eq!(again.trace, out.trace);
    }

    #[test]
    fn greedy_steps_increase_the_score() {
        let g = EmbeddedF4::<Gf3>::standard();
        let (s, _) = scramble(&g, &f4_toral_basis(&g), 5, 30);
        let out = climb(&g, &s, &cfg(300, 5)).unwrap();
        let mut prev: Option<&TraceEntry> = None;
        for e in &out.trace {
            if let Some(p) = prev {
                if e.kind == StepKind::Greedy && e.phase == p.phase {
                    assert!(e.score > p.score, "step {}", e.step);
                }
            }
            prev = Some(e);
        }
    }

    #[test]
    fn phase_two_preserves_alignment() {
        let g = EmbeddedF4::<Gf3>::standard();
        let mut ts = f4_toral_basis(&g);
        // scramble everything but keep t_1 in the Cartan
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut moved = 0;
        while moved < 6 {
            let m = Move::from_index(rng.gen_range(0..480));
            let mut v = ts[0].clone();
            apply_move(&g, m, &mut v);
            if v == ts[0] {
                for t in &mut ts[1..] {
                    apply_move(&g, m, t);
                }
                moved += 1;
            }
        }
        let st = ClimbState::new(g.e8(), ts, 9);
        let out = phase_two(&g, st.clone(), &cfg(500, 9)).unwrap();
        assert!(is_aligned(g.e8(), &out.best.targets[0]));
        assert!(out.best.objective >= st.objective);
        assert!(out.trace.iter().all(|e| e.phase == 2));

        let done = ClimbState::new(g.e8(), f4_toral_basis(&g), 1);
        let out = phase_two(&g, done.clone(), &cfg(500, 1)).unwrap();
        assert_eq!(out.best, done);
        assert_eq!(out.steps, 0);
    }
}
