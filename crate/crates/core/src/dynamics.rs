//! Deterministic dynamics on finite spaces.
//!
//! A total self-map `T` acts on measures by preimage: the pushforward
//! `m∘T⁻¹` of a point mass at `x` is the point mass at `T(x)`. Every orbit of
//! a finite map is eventually periodic, which makes two things computable in
//! closed form that are limits in general: the Cesàro averages
//! `Pₙ = (1/n) Σ_{t<n} P∘T⁻ᵗ` for arbitrary `n`, and their limit, the
//! stationary mean `P̄`, obtained by spreading each point's mass uniformly
//! over the cycle its orbit falls into. The invariant σ-algebra is generated
//! by the weakly connected components of the functional graph `x → T(x)`;
//! those components are the atoms of the ergodic decomposition.

use crate::measure::{ProbabilityMeasure, SignedMeasure};
use crate::numeric::Scalar;
use crate::space::{Event, FiniteSpace, MAX_BRUTE_FORCE_POINTS};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DynamicsError {
    #[error("map image count {got} does not match space size {expected}")]
    ImageCount { expected: usize, got: usize },
    #[error("map sends point {point} to index {target}, outside the space")]
    ImageOutOfRange { point: String, target: usize },
    #[error("map and measure live on different spaces")]
    SpaceMismatch,
}

/// A total measurable self-map of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct EndoMap {
    space: Arc<FiniteSpace>,
    next: Vec<usize>,
}

impl EndoMap {
    pub fn new(space: Arc<FiniteSpace>, next: Vec<usize>) -> Result<Self, DynamicsError> {
        if next.len() != space.len() {
            return Err(DynamicsError::ImageCount {
                expected: space.len(),
                got: next.len(),
            });
        }
        for (i, &target) in next.iter().enumerate() {
            if target >= space.len() {
                return Err(DynamicsError::ImageOutOfRange {
                    point: space.label(i).to_string(),
                    target,
                });
            }
        }
        Ok(EndoMap { space, next })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn next(&self, index: usize) -> usize {
        self.next[index]
    }

    pub fn images(&self) -> &[usize] {
        &self.next
    }

    /// `T⁻¹B = {x : T(x) ∈ B}`.
    pub fn preimage(&self, event: &Event) -> Event {
        Event::from_indices(
            self.space.len(),
            (0..self.space.len()).filter(|&x| event.contains(self.next[x])),
        )
    }

    /// Preimage lists per point: `preimages()[y] = {x : T(x) = y}`.
    pub fn preimage_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.space.len()];
        for (x, &y) in self.next.iter().enumerate() {
            lists[y].push(x);
        }
        lists
    }

    /// `m∘T⁻ⁿ`, computed by accumulating mass along `n` map applications.
    pub fn pushforward_signed<S: Scalar>(
        &self,
        m: &SignedMeasure<S>,
        n: u64,
    ) -> SignedMeasure<S> {
        assert_eq!(m.space(), &self.space, "space mismatch");
        let size = self.space.len();
        let mut current = m.weights().to_vec();
        for _ in 0..n {
            let mut step = vec![S::zero(); size];
            for (x, w) in current.iter().enumerate() {
                let y = self.next[x];
                step[y] = step[y].clone() + w.clone();
            }
            current = step;
        }
        SignedMeasure::new(self.space.clone(), current).expect("weights preserved")
    }

    pub fn pushforward<S: Scalar>(
        &self,
        p: &ProbabilityMeasure<S>,
        n: u64,
    ) -> ProbabilityMeasure<S> {
        ProbabilityMeasure::new_unchecked(self.pushforward_signed(p.signed(), n))
    }

    /// The eventually periodic pushforward sequence `m, m∘T⁻¹, m∘T⁻², …`
    /// together with its preperiod and period: the returned list holds
    /// `preperiod + period` measures and `m∘T⁻ᵗ` equals entry
    /// `preperiod + (t − preperiod) mod period` for `t ≥ preperiod`.
    pub fn pushforward_cycle<S: Scalar>(&self, m: &SignedMeasure<S>) -> PushforwardCycle<S> {
        let mut seen: Vec<SignedMeasure<S>> = vec![m.clone()];
        loop {
            let next = self.pushforward_signed(seen.last().unwrap(), 1);
            if let Some(k) = seen.iter().position(|prev| prev.approx_eq(&next)) {
                let period = seen.len() - k;
                return PushforwardCycle {
                    entries: seen,
                    preperiod: k,
                    period,
                };
            }
            seen.push(next);
        }
    }

    /// `Pₙ = (1/n) Σ_{t=0}^{n−1} p∘T⁻ᵗ`, exact for any `n ≥ 1`.
    ///
    /// Small `n` is summed directly; large `n` splits the sum at the
    /// preperiod and counts whole periods, so the cost never depends on `n`.
    pub fn cesaro_average<S: Scalar>(
        &self,
        p: &ProbabilityMeasure<S>,
        n: u64,
    ) -> ProbabilityMeasure<S> {
        assert!(n >= 1, "Cesàro average needs n >= 1");
        let sum = self.cesaro_sum(p.signed(), n);
        let scale = S::one() / S::from_int(n as i64);
        ProbabilityMeasure::new_unchecked(sum.scaled(&scale))
    }

    fn cesaro_sum<S: Scalar>(&self, m: &SignedMeasure<S>, n: u64) -> SignedMeasure<S> {
        let cycle = self.pushforward_cycle(m);
        let (k, l) = (cycle.preperiod as u64, cycle.period as u64);
        if n <= k + l {
            let mut acc = SignedMeasure::zero(self.space.clone());
            for t in 0..n {
                acc = &acc + cycle.at(t);
            }
            return acc;
        }
        let mut acc = SignedMeasure::zero(self.space.clone());
        for t in 0..k {
            acc = &acc + cycle.at(t);
        }
        let mut period_sum = SignedMeasure::zero(self.space.clone());
        for i in 0..l {
            period_sum = &period_sum + cycle.at(k + i);
        }
        let whole = (n - k) / l;
        let partial = (n - k) % l;
        acc = &acc + &period_sum.scaled(&S::from_int(whole as i64));
        for i in 0..partial {
            acc = &acc + cycle.at(k + i);
        }
        acc
    }

    /// The linear Cesàro limit of `m∘T⁻ᵗ`: each point's weight is spread
    /// uniformly over the cycle its orbit reaches.
    pub fn stationary_mean_signed<S: Scalar>(&self, m: &SignedMeasure<S>) -> SignedMeasure<S> {
        assert_eq!(m.space(), &self.space, "space mismatch");
        let orbits = self.orbit_structure();
        let mut weights = vec![S::zero(); self.space.len()];
        for (x, w) in m.weights().iter().enumerate() {
            if w.approx_zero() {
                continue;
            }
            let cycle = &orbits.cycles[orbits.cycle_of[x]];
            let share = w.clone() / S::from_int(cycle.len() as i64);
            for &c in cycle {
                weights[c] = weights[c].clone() + share.clone();
            }
        }
        SignedMeasure::new(self.space.clone(), weights).expect("weights preserved")
    }

    /// The stationary mean `P̄`: the exact Cesàro limit, a fixed point of the
    /// pushforward.
    pub fn stationary_mean<S: Scalar>(&self, p: &ProbabilityMeasure<S>) -> ProbabilityMeasure<S> {
        ProbabilityMeasure::new_unchecked(self.stationary_mean_signed(p.signed()))
    }

    /// `p = p∘T⁻¹` pointwise (exact, or within the float tolerance).
    pub fn is_stationary<S: Scalar>(&self, p: &ProbabilityMeasure<S>) -> bool {
        self.pushforward(p, 1).approx_eq(p)
    }

    /// Whether the Cesàro average at `n = horizon` is within `epsilon` of the
    /// stationary mean, uniformly over events. On a finite space this holds
    /// for every measure once the horizon is large enough.
    pub fn is_ams<S: Scalar>(&self, p: &ProbabilityMeasure<S>, epsilon: &S, horizon: u64) -> bool {
        assert!(horizon >= 1 && epsilon > &S::zero());
        let mean = self.stationary_mean(p);
        let avg = self.cesaro_average(p, horizon);
        let dev = crate::measure::event_sup_deviation(&avg, &mean).expect("same space");
        dev < *epsilon
    }

    /// Orbit-derived constant `K = Σ_x p(x)(tail(x) + |cycle(x)|)` with
    /// `n · sup_B |Pₙ(B) − P̄(B)| ≤ K` for all `n ≥ 1`.
    pub fn deviation_bound<S: Scalar>(&self, p: &ProbabilityMeasure<S>) -> S {
        let orbits = self.orbit_structure();
        p.weights()
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (x, w)| {
                let span = orbits.tail_length[x] + orbits.cycles[orbits.cycle_of[x]].len();
                acc + w.clone() * S::from_int(span as i64)
            })
    }

    /// Tail lengths, cycle membership and the cycles themselves.
    pub fn orbit_structure(&self) -> OrbitStructure {
        let size = self.space.len();
        // next^size(x) always lands on a cycle.
        let mut deep: Vec<usize> = (0..size).collect();
        for _ in 0..size {
            for entry in deep.iter_mut() {
                *entry = self.next[*entry];
            }
        }
        let mut cycle_id = vec![usize::MAX; size];
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for &anchor in &deep {
            if cycle_id[anchor] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cycle = vec![anchor];
            cycle_id[anchor] = id;
            let mut y = self.next[anchor];
            while y != anchor {
                cycle_id[y] = id;
                cycle.push(y);
                y = self.next[y];
            }
            cycles.push(cycle);
        }
        let mut tail_length = vec![0usize; size];
        let mut cycle_of = vec![0usize; size];
        for x in 0..size {
            let mut steps = 0;
            let mut y = x;
            while cycle_id[y] == usize::MAX {
                steps += 1;
                y = self.next[y];
            }
            tail_length[x] = steps;
            cycle_of[x] = cycle_id[y];
        }
        OrbitStructure {
            tail_length,
            cycle_of,
            cycles,
        }
    }

    /// The atoms of the invariant σ-algebra: weakly connected components of
    /// the functional graph. An event satisfies `T⁻¹B = B` exactly when it is
    /// a union of these atoms.
    pub fn invariant_atoms(&self) -> InvariantPartition {
        let size = self.space.len();
        let mut uf = UnionFind::new(size);
        for x in 0..size {
            uf.union(x, self.next[x]);
        }
        let mut atom_index = vec![usize::MAX; size];
        let mut atoms: Vec<Event> = Vec::new();
        for x in 0..size {
            let root = uf.find(x);
            if atom_index[root] == usize::MAX {
                atom_index[root] = atoms.len();
                atoms.push(Event::empty(size));
            }
            atoms[atom_index[root]].insert(x);
        }
        InvariantPartition { atoms }
    }

    /// `T⁻¹B = B`.
    pub fn is_invariant_event(&self, event: &Event) -> bool {
        self.preimage(event) == *event
    }
}

/// Stored prefix of an eventually periodic pushforward sequence.
pub struct PushforwardCycle<S: Scalar> {
    entries: Vec<SignedMeasure<S>>,
    preperiod: usize,
    period: usize,
}

impl<S: Scalar> PushforwardCycle<S> {
    pub fn preperiod(&self) -> usize {
        self.preperiod
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// `m∘T⁻ᵗ` for arbitrary `t`.
    pub fn at(&self, t: u64) -> &SignedMeasure<S> {
        let k = self.preperiod as u64;
        if t < k + self.period as u64 {
            &self.entries[t as usize]
        } else {
            let offset = (t - k) % self.period as u64;
            &self.entries[self.preperiod + offset as usize]
        }
    }
}

/// Tail and cycle data of every orbit of a finite map.
#[derive(Debug, Clone)]
pub struct OrbitStructure {
    /// Steps from each point until its orbit enters a cycle.
    pub tail_length: Vec<usize>,
    /// Index into `cycles` for the cycle each orbit reaches.
    pub cycle_of: Vec<usize>,
    /// The directed cycles, each listed in orbit order.
    pub cycles: Vec<Vec<usize>>,
}

impl OrbitStructure {
    /// All points lying on some cycle.
    pub fn cyclic_points(&self, universe: usize) -> Event {
        Event::from_indices(universe, self.cycles.iter().flatten().copied())
    }

    pub fn cycle_event(&self, id: usize, universe: usize) -> Event {
        Event::from_indices(universe, self.cycles[id].iter().copied())
    }
}

/// The minimal invariant events, covering the space disjointly.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantPartition {
    atoms: Vec<Event>,
}

impl InvariantPartition {
    pub fn atoms(&self) -> &[Event] {
        &self.atoms
    }

    pub fn atom_containing(&self, point: usize) -> usize {
        self.atoms
            .iter()
            .position(|a| a.contains(point))
            .expect("atoms cover the space")
    }

    /// Whether a function (as a value per point) is measurable w.r.t. the
    /// invariant σ-algebra, i.e. constant on every atom.
    pub fn is_invariant_function<S: Scalar>(&self, g: &[S]) -> bool {
        self.atoms.iter().all(|atom| {
            let mut members = atom.iter();
            match members.next() {
                None => true,
                Some(first) => members.all(|i| g[i].approx_eq(&g[first])),
            }
        })
    }

    /// All unions of atoms — exactly the invariant events. Gated like other
    /// brute-force loops.
    pub fn invariant_events(&self, universe: usize) -> Vec<Event> {
        assert!(
            self.atoms.len() <= MAX_BRUTE_FORCE_POINTS,
            "too many atoms for exhaustive invariant-event enumeration"
        );
        let mut events = Vec::with_capacity(1 << self.atoms.len());
        for mask in 0u64..(1u64 << self.atoms.len()) {
            let mut e = Event::empty(universe);
            for (i, atom) in self.atoms.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    e = e.union(atom);
                }
            }
            events.push(e);
        }
        events
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(size: usize) -> Self {
        UnionFind {
            parent: (0..size).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut walk = x;
        while self.parent[walk] != root {
            let up = self.parent[walk];
            self.parent[walk] = root;
            walk = up;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::event_sup_deviation;
    use num_rational::BigRational;

    fn r(num: i64, den: i64) -> BigRational {
        BigRational::from_ratio(num, den)
    }

    /// Reference system: four points, a 2-cycle {0,1}, 2 → 3 with 3 fixed,
    /// uniform start measure.
    fn s1() -> (EndoMap, ProbabilityMeasure<BigRational>) {
        let space = FiniteSpace::indexed(4);
        let map = EndoMap::new(space.clone(), vec![1, 0, 3, 3]).unwrap();
        let p = ProbabilityMeasure::uniform(space);
        (map, p)
    }

    /// Oracle: pushforward by preimage enumeration over all events.
    fn pushforward_oracle(
        map: &EndoMap,
        m: &SignedMeasure<BigRational>,
        n: u64,
    ) -> Vec<(Event, BigRational)> {
        Event::all_events(map.space().len())
            .map(|b| {
                let mut pre = b;
                for _ in 0..n {
                    pre = map.preimage(&pre);
                }
                (b, m.mass_of(&pre))
            })
            .collect()
    }

    #[test]
    fn preimage_examples() {
        let (map, _) = s1();
        assert_eq!(
            map.preimage(&Event::singleton(4, 3)),
            Event::from_indices(4, [2, 3])
        );
        assert_eq!(map.preimage(&Event::full(4)), Event::full(4));
        assert_eq!(map.preimage(&Event::singleton(4, 2)), Event::empty(4));
    }

    #[test]
    fn pushforward_matches_preimage_oracle() {
        let (map, p) = s1();
        for n in [0u64, 1, 2, 5] {
            let pushed = map.pushforward_signed(p.signed(), n);
            for (event, expected) in pushforward_oracle(&map, p.signed(), n) {
                assert_eq!(pushed.mass_of(&event), expected, "n={n} event={event:?}");
            }
        }
        assert_eq!(
            map.pushforward(&p, 1).weights(),
            &[r(1, 4), r(1, 4), r(0, 1), r(1, 2)]
        );
        assert_eq!(
            map.pushforward(&p, 2).weights(),
            &[r(1, 4), r(1, 4), r(0, 1), r(1, 2)]
        );
        assert!(map.pushforward(&p, 0).approx_eq(&p));
    }

    #[test]
    fn cesaro_examples() {
        let (map, p) = s1();
        assert!(map.cesaro_average(&p, 1).approx_eq(&p));
        assert_eq!(
            map.cesaro_average(&p, 2).weights(),
            &[r(1, 4), r(1, 4), r(1, 8), r(3, 8)]
        );
        assert_eq!(
            map.cesaro_average(&p, 4).weights(),
            &[r(1, 4), r(1, 4), r(1, 16), r(7, 16)]
        );
    }

    #[test]
    fn cesaro_closed_form_matches_direct_sum() {
        let (map, p) = s1();
        // Direct-route oracle: average the pushforwards one by one.
        for n in [1u64, 2, 3, 5, 8, 13, 64, 1000] {
            let mut acc = SignedMeasure::zero(map.space().clone());
            for t in 0..n {
                acc = &acc + &map.pushforward_signed(p.signed(), t);
            }
            let direct = acc.scaled(&r(1, n as i64));
            assert!(map.cesaro_average(&p, n).signed().approx_eq(&direct), "n={n}");
        }
    }

    #[test]
    fn stationary_mean_examples() {
        let (map, p) = s1();
        let mean = map.stationary_mean(&p);
        assert_eq!(mean.weights(), &[r(1, 4), r(1, 4), r(0, 1), r(1, 2)]);
        assert!(map.is_stationary(&mean));
        assert!(map.stationary_mean(&mean).approx_eq(&mean));

        let delta2 = ProbabilityMeasure::<BigRational>::point_mass(map.space().clone(), 2);
        assert_eq!(
            map.stationary_mean(&delta2).weights(),
            &[r(0, 1), r(0, 1), r(0, 1), r(1, 1)]
        );
    }

    #[test]
    fn stationarity_and_ams_predicates() {
        let (map, p) = s1();
        let mean = map.stationary_mean(&p);
        assert!(map.is_stationary(&mean));
        assert!(!map.is_stationary(&p));
        assert!(map.is_ams(&p, &r(1, 1000), 512));
        let delta2 = ProbabilityMeasure::<BigRational>::point_mass(map.space().clone(), 2);
        assert!(!map.is_stationary(&delta2));
    }

    #[test]
    fn s1_deviation_profile_is_one_over_4n() {
        let (map, p) = s1();
        let mean = map.stationary_mean(&p);
        for n in [1u64, 2, 4, 8, 16, 512] {
            let avg = map.cesaro_average(&p, n);
            let dev = event_sup_deviation(&avg, &mean).unwrap();
            assert_eq!(dev, r(1, 4 * n as i64), "n={n}");
        }
    }

    #[test]
    fn s1_difference_measures() {
        let (map, p) = s1();
        let mean = map.stationary_mean(&p);
        // P∘T⁻¹ already equals the stationary mean.
        let diff = &map.pushforward_signed(p.signed(), 1) - mean.signed();
        assert_eq!(diff.tv_norm(), r(0, 1));
        assert!(diff.jordan_decompose().positive.approx_eq(&diff.jordan_decompose().negative));
        // ‖P₄ − P̄‖_TV = 2·(1/16).
        let diff4 = map.cesaro_average(&p, 4).signed() - mean.signed();
        assert_eq!(diff4.tv_norm(), r(1, 8));
    }

    #[test]
    fn deviation_bound_holds_along_schedule() {
        let (map, p) = s1();
        let mean = map.stationary_mean(&p);
        let bound = map.deviation_bound(&p);
        let mut n = 1u64;
        while n <= 1024 {
            let dev = event_sup_deviation(&map.cesaro_average(&p, n), &mean).unwrap();
            assert!(dev * r(n as i64, 1) <= bound, "n={n}");
            n *= 2;
        }
    }

    #[test]
    fn orbit_structure_of_s1() {
        let (map, _) = s1();
        let orbits = map.orbit_structure();
        assert_eq!(orbits.tail_length, vec![0, 0, 1, 0]);
        assert_eq!(orbits.cycles.len(), 2);
        let mut sizes: Vec<usize> = orbits.cycles.iter().map(|c| c.len()).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        assert_eq!(orbits.cycle_of[2], orbits.cycle_of[3]);
        assert_eq!(orbits.cycle_of[0], orbits.cycle_of[1]);
        assert_ne!(orbits.cycle_of[0], orbits.cycle_of[2]);
        assert_eq!(orbits.cyclic_points(4), Event::from_indices(4, [0, 1, 3]));
    }

    #[test]
    fn invariant_atoms_examples() {
        let (map, _) = s1();
        let partition = map.invariant_atoms();
        assert_eq!(
            partition.atoms(),
            &[Event::from_indices(4, [0, 1]), Event::from_indices(4, [2, 3])]
        );

        let id3 = EndoMap::new(FiniteSpace::indexed(3), vec![0, 1, 2]).unwrap();
        assert_eq!(id3.invariant_atoms().atoms().len(), 3);

        let cycle5 = EndoMap::new(FiniteSpace::indexed(5), vec![1, 2, 3, 4, 0]).unwrap();
        assert_eq!(cycle5.invariant_atoms().atoms(), &[Event::full(5)]);
    }

    #[test]
    fn invariant_events_are_exactly_atom_unions() {
        for next in [vec![1, 0, 3, 3], vec![0, 0, 1, 2], vec![2, 2, 2, 2]] {
            let map = EndoMap::new(FiniteSpace::indexed(4), next).unwrap();
            let partition = map.invariant_atoms();
            let unions = partition.invariant_events(4);
            for event in Event::all_events(4) {
                let invariant = map.is_invariant_event(&event);
                assert_eq!(invariant, unions.contains(&event), "event={event:?}");
            }
        }
    }

    #[test]
    fn invariant_integrals_agree() {
        // For g constant on atoms, integrating against p, p∘T⁻ⁿ, Pₙ, P̄ all
        // give the same value.
        let (map, p) = s1();
        let g = vec![r(5, 1), r(5, 1), r(-2, 1), r(-2, 1)];
        assert!(map.invariant_atoms().is_invariant_function(&g));
        let base = p.signed().integrate(&g);
        for n in 1..=16u64 {
            assert_eq!(map.pushforward_signed(p.signed(), n).integrate(&g), base);
            assert_eq!(map.cesaro_average(&p, n).signed().integrate(&g), base);
        }
        assert_eq!(map.stationary_mean(&p).signed().integrate(&g), base);
    }

    #[test]
    fn constructor_rejects_bad_maps() {
        let space = FiniteSpace::indexed(3);
        assert!(matches!(
            EndoMap::new(space.clone(), vec![0, 1]),
            Err(DynamicsError::ImageCount { .. })
        ));
        assert!(matches!(
            EndoMap::new(space, vec![0, 1, 7]),
            Err(DynamicsError::ImageOutOfRange { .. })
        ));
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        fn system() -> impl Strategy<Value = (EndoMap, ProbabilityMeasure<BigRational>)> {
            (2usize..=8).prop_flat_map(|n| {
                let map = prop::collection::vec(0..n, n);
                let weights = prop::collection::vec(0u32..=6, n);
                (map, weights).prop_filter_map("zero mass", move |(next, raw)| {
                    let total: u32 = raw.iter().sum();
                    if total == 0 {
                        return None;
                    }
                    let space = FiniteSpace::indexed(n);
                    let map = EndoMap::new(space.clone(), next).unwrap();
                    let weights = raw
                        .iter()
                        .map(|&w| BigRational::from_ratio(w as i64, total as i64))
                        .collect();
                    let p = ProbabilityMeasure::from_weights(space, weights).unwrap();
                    Some((map, p))
                })
            })
        }

        proptest! {
            #[test]
            fn pushforward_contracts_tv_eventwise((map, p) in system()) {
                // |m∘T⁻¹|(B) ≤ |m|(T⁻¹B) for every event.
                let shift = map.pushforward_signed(p.signed(), 1);
                let m = p.signed() - &shift;
                let pushed = map.pushforward_signed(&m, 1);
                let pushed_tv = pushed.jordan_decompose().total_variation;
                let tv = m.jordan_decompose().total_variation;
                for event in Event::all_events(map.space().len()) {
                    prop_assert!(pushed_tv.mass_of(&event) <= tv.mass_of(&map.preimage(&event)));
                }
                prop_assert!(pushed.tv_norm() <= m.tv_norm());
            }

            #[test]
            fn stationary_mean_is_pushforward_fixed_point((map, p) in system()) {
                let mean = map.stationary_mean(&p);
                prop_assert!(map.pushforward(&mean, 1).approx_eq(&mean));
                prop_assert!(map.stationary_mean(&mean).approx_eq(&mean));
            }

            #[test]
            fn cesaro_converges_with_orbit_bound((map, p) in system()) {
                let mean = map.stationary_mean(&p);
                let bound = map.deviation_bound(&p);
                let mut n = 1u64;
                while n <= 1024 {
                    let dev = event_sup_deviation(&map.cesaro_average(&p, n), &mean).unwrap();
                    prop_assert!(dev * BigRational::from_int(n as i64) <= bound);
                    n *= 4;
                }
            }

            #[test]
            fn atoms_partition_and_are_invariant((map, _) in system()) {
                let partition = map.invariant_atoms();
                let mut covered = Event::empty(map.space().len());
                for atom in partition.atoms() {
                    prop_assert!(map.is_invariant_event(atom));
                    prop_assert!(covered.is_disjoint_from(atom));
                    covered = covered.union(atom);
                }
                prop_assert_eq!(covered, Event::full(map.space().len()));
            }
        }
    }
}
