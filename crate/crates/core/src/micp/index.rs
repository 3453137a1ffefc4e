use serde::Serialize;

use crate::network::NetworkCase;

/// Named model quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Quantity {
    /// Generator active output.
    Pg,
    /// Generator reactive output.
    Qg,
    /// Receiving-end active flow.
    Pr,
    /// Receiving-end reactive flow.
    Qr,
    /// Active loss.
    Pl,
    /// Reactive loss.
    Ql,
    /// Active-loss auxiliary of the rotated loss cone.
    PlAux,
    /// Squared voltage magnitude.
    W,
    /// Upper slack of the voltage-deviation linearization.
    S1,
    /// Lower slack of the voltage-deviation linearization.
    S2,
    /// SVC reactive injection (candidates only).
    Qv,
    /// Siting-gated squared voltage (candidates only).
    Z,
    /// Reactive-loss auxiliary, zero-resistance branches only.
    QlAux,
    /// Siting binary (candidates only, scenario independent).
    Delta,
}

impl Quantity {
    pub const ALL: [Quantity; 14] = [
        Quantity::Pg,
        Quantity::Qg,
        Quantity::Pr,
        Quantity::Qr,
        Quantity::Pl,
        Quantity::Ql,
        Quantity::PlAux,
        Quantity::W,
        Quantity::S1,
        Quantity::S2,
        Quantity::Qv,
        Quantity::Z,
        Quantity::QlAux,
        Quantity::Delta,
    ];
}

/// A model quantity for one entity and scenario.
///
/// `entity` is the storage position of the generator, branch or bus; for
/// [`Quantity::Qv`], [`Quantity::Z`] and [`Quantity::Delta`] it is the
/// position in the candidate list. `scenario` is `None` only for `Delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarKey {
    pub quantity: Quantity,
    pub entity: usize,
    pub scenario: Option<usize>,
}

/// Bijection between named model quantities and flat variable positions.
///
/// Each scenario owns one contiguous block laid out as
/// `Pg Qg | Pr Qr Pl Ql PlAux | W S1 S2 | Qv Z | QlAux`; the siting binaries
/// follow the last scenario block.
#[derive(Debug, Clone, PartialEq)]
pub struct MicpIndex {
    n_gen: usize,
    n_branch: usize,
    n_bus: usize,
    candidates: Vec<usize>,
    candidate_pos: Vec<usize>,
    lossless: Vec<usize>,
    lossless_slot: Vec<Option<usize>>,
    n_scenarios: usize,
    block: usize,
}

impl MicpIndex {
    /// Allocates positions for `case` over `n_scenarios` with the given
    /// candidate bus ids.
    pub fn allocate(case: &NetworkCase, n_scenarios: usize, candidates: &[usize]) -> Self {
        let n_gen = case.generators().len();
        let n_branch = case.branches().len();
        let n_bus = case.buses().len();
        let lossless: Vec<usize> =
            case.branches().iter().enumerate().filter(|(_, b)| b.r == 0.0).map(|(k, _)| k).collect();
        let mut lossless_slot = vec![None; n_branch];
        for (slot, &k) in lossless.iter().enumerate() {
            lossless_slot[k] = Some(slot);
        }
        let candidate_pos = candidates.iter().map(|&id| case.pos(id)).collect();
        let block = 2 * n_gen + 5 * n_branch + 3 * n_bus + 2 * candidates.len() + lossless.len();
        Self {
            n_gen,
            n_branch,
            n_bus,
            candidates: candidates.to_vec(),
            candidate_pos,
            lossless,
            lossless_slot,
            n_scenarios,
            block,
        }
    }

    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn n_branch(&self) -> usize {
        self.n_branch
    }

    pub fn n_bus(&self) -> usize {
        self.n_bus
    }

    pub fn n_vars(&self) -> usize {
        self.n_scenarios * self.block + self.candidates.len()
    }

    pub fn scenario_block_len(&self) -> usize {
        self.block
    }

    /// Candidate bus ids, ascending.
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    /// Bus storage position of each candidate.
    pub fn candidate_positions(&self) -> &[usize] {
        &self.candidate_pos
    }

    /// Branches with zero resistance, which carry a reactive-loss auxiliary.
    pub fn lossless_branches(&self) -> &[usize] {
        &self.lossless
    }

    fn count(&self, q: Quantity) -> usize {
        use Quantity::*;
        match q {
            Pg | Qg => self.n_gen,
            Pr | Qr | Pl | Ql | PlAux => self.n_branch,
            W | S1 | S2 => self.n_bus,
            Qv | Z | Delta => self.candidates.len(),
            QlAux => self.n_branch,
        }
    }

    fn offset(&self, q: Quantity) -> usize {
        use Quantity::*;
        let (g, k, b, c) = (self.n_gen, self.n_branch, self.n_bus, self.candidates.len());
        match q {
            Pg => 0,
            Qg => g,
            Pr => 2 * g,
            Qr => 2 * g + k,
            Pl => 2 * g + 2 * k,
            Ql => 2 * g + 3 * k,
            PlAux => 2 * g + 4 * k,
            W => 2 * g + 5 * k,
            S1 => 2 * g + 5 * k + b,
            S2 => 2 * g + 5 * k + 2 * b,
            Qv => 2 * g + 5 * k + 3 * b,
            Z => 2 * g + 5 * k + 3 * b + c,
            QlAux => 2 * g + 5 * k + 3 * b + 2 * c,
            Delta => 0,
        }
    }

    /// Position of a key, if it names an allocated variable.
    pub fn position(&self, key: VarKey) -> Option<usize> {
        if key.entity >= self.count(key.quantity) {
            return None;
        }
        match (key.quantity, key.scenario) {
            (Quantity::Delta, None) => Some(self.n_scenarios * self.block + key.entity),
            (Quantity::Delta, Some(_)) | (_, None) => None,
            (_, Some(s)) if s >= self.n_scenarios => None,
            (Quantity::QlAux, Some(s)) => {
                self.lossless_slot[key.entity].map(|slot| s * self.block + self.offset(Quantity::QlAux) + slot)
            }
            (q, Some(s)) => Some(s * self.block + self.offset(q) + key.entity),
        }
    }

    /// Inverse of [`position`](Self::position).
    pub fn key(&self, pos: usize) -> Option<VarKey> {
        let delta_start = self.n_scenarios * self.block;
        if pos >= self.n_vars() {
            return None;
        }
        if pos >= delta_start {
            return Some(VarKey { quantity: Quantity::Delta, entity: pos - delta_start, scenario: None });
        }
        let (s, local) = (pos / self.block, pos % self.block);
        let quantity =
            Quantity::ALL[..13].iter().rev().copied().find(|&q| local >= self.offset(q)).expect("offset of Pg is zero");
        let mut entity = local - self.offset(quantity);
        if quantity == Quantity::QlAux {
            entity = self.lossless[entity];
        }
        Some(VarKey { quantity, entity, scenario: Some(s) })
    }

    fn at(&self, quantity: Quantity, entity: usize, s: usize) -> usize {
        self.position(VarKey { quantity, entity, scenario: Some(s) })
            .unwrap_or_else(|| panic!("no {quantity:?} variable for entity {entity} in scenario {s}"))
    }

    pub fn pg(&self, gen: usize, s: usize) -> usize {
        self.at(Quantity::Pg, gen, s)
    }
    pub fn qg(&self, gen: usize, s: usize) -> usize {
        self.at(Quantity::Qg, gen, s)
    }
    pub fn pr(&self, k: usize, s: usize) -> usize {
        self.at(Quantity::Pr, k, s)
    }
    pub fn qr(&self, k: usize, s: usize) -> usize {
        self.at(Quantity::Qr, k, s)
    }
    pub fn pl(&self, k: usize, s: usize) -> usize {
        self.at(Quantity::Pl, k, s)
    }
    pub fn ql(&self, k: usize, s: usize) -> usize {
        self.at(Quantity::Ql, k, s)
    }
    pub fn pl_aux(&self, k: usize, s: usize) -> usize {
        self.at(Quantity::PlAux, k, s)
    }
    pub fn ql_aux(&self, k: usize, s: usize) -> Option<usize> {
        self.position(VarKey { quantity: Quantity::QlAux, entity: k, scenario: Some(s) })
    }
    pub fn w(&self, bus: usize, s: usize) -> usize {
        self.at(Quantity::W, bus, s)
    }
    pub fn s1(&self, bus: usize, s: usize) -> usize {
        self.at(Quantity::S1, bus, s)
    }
    pub fn s2(&self, bus: usize, s: usize) -> usize {
        self.at(Quantity::S2, bus, s)
    }
    pub fn qv(&self, cand: usize, s: usize) -> usize {
        self.at(Quantity::Qv, cand, s)
    }
    pub fn z(&self, cand: usize, s: usize) -> usize {
        self.at(Quantity::Z, cand, s)
    }
    pub fn delta(&self, cand: usize) -> usize {
        self.n_scenarios * self.block + cand
    }

    /// Positions of the siting binaries.
    pub fn delta_range(&self) -> std::ops::Range<usize> {
        let start = self.n_scenarios * self.block;
        start..start + self.candidates.len()
    }

    /// The loss-cone auxiliary that carries branch `k`'s rotated cone.
    pub fn cone_aux(&self, k: usize, s: usize) -> usize {
        self.ql_aux(k, s).unwrap_or_else(|| self.pl_aux(k, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{ieee30, two_bus};
    use rand::{Rng, SeedableRng};

    #[test]
    fn ieee30_sizes() {
        let case = ieee30();
        let cands = case.candidate_buses();
        let index = MicpIndex::allocate(&case, 15, &cands);
        assert_eq!(index.delta_range().len(), 24);
        // six zero-resistance transformers and ties carry a reactive-loss auxiliary
        assert_eq!(index.lossless_branches().len(), 7);
        let per_scenario = 2 * 6 + 5 * 41 + 3 * 30 + 2 * 24 + 7;
        assert_eq!(index.n_vars(), 15 * per_scenario + 24);
    }

    #[test]
    fn two_bus_single_candidate() {
        let case = two_bus();
        let index = MicpIndex::allocate(&case, 1, &case.candidate_buses());
        assert_eq!(index.delta_range().len(), 1);
        assert_eq!(index.n_vars(), 2 + 5 + 6 + 2 + 1);
    }

    #[test]
    fn every_position_round_trips() {
        let case = ieee30();
        let index = MicpIndex::allocate(&case, 3, &case.candidate_buses());
        for pos in 0..index.n_vars() {
            let key = index.key(pos).unwrap();
            assert_eq!(index.position(key), Some(pos), "{key:?}");
        }
        assert_eq!(index.key(index.n_vars()), None);
    }

    #[test]
    fn random_keys_round_trip() {
        let case = ieee30();
        let index = MicpIndex::allocate(&case, 15, &case.candidate_buses());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut probes = 0;
        while probes < 1000 {
            let quantity = Quantity::ALL[rng.gen_range(0..Quantity::ALL.len())];
            let scenario = if quantity == Quantity::Delta { None } else { Some(rng.gen_range(0..15)) };
            let key = VarKey { quantity, entity: rng.gen_range(0..41), scenario };
            if let Some(pos) = index.position(key) {
                assert_eq!(index.key(pos), Some(key));
                probes += 1;
            }
        }
    }

    #[test]
    fn rejects_out_of_range_keys() {
        let case = two_bus();
        let index = MicpIndex::allocate(&case, 1, &[2]);
        let k = |quantity, entity, scenario| VarKey { quantity, entity, scenario };
        assert_eq!(index.position(k(Quantity::Pr, 1, Some(0))), None);
        assert_eq!(index.position(k(Quantity::Pr, 0, Some(1))), None);
        assert_eq!(index.position(k(Quantity::Delta, 0, Some(0))), None);
        assert_eq!(index.position(k(Quantity::W, 0, None)), None);
        assert_eq!(index.position(k(Quantity::QlAux, 0, Some(0))), None);
    }
}
