use crate::network::NetworkCase;

/// Bus-by-branch incidence for receiving-end flows (`m_f`) and losses (`m_l`).
///
/// `m_f(i, k)` is +1 at the sending bus of branch `k` and -1 at its receiving
/// bus; `m_l(i, k)` is 1 at the sending bus only. Rows are bus storage
/// positions, columns branch positions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowIncidence {
    n_bus: usize,
    from: Vec<usize>,
    to: Vec<usize>,
}

impl FlowIncidence {
    pub fn n_bus(&self) -> usize {
        self.n_bus
    }

    pub fn n_branch(&self) -> usize {
        self.from.len()
    }

    pub fn m_f(&self, bus: usize, k: usize) -> i8 {
        if self.from[k] == bus {
            1
        } else if self.to[k] == bus {
            -1
        } else {
            0
        }
    }

    pub fn m_l(&self, bus: usize, k: usize) -> i8 {
        i8::from(self.from[k] == bus)
    }

    /// Nonzero `(bus, branch, value)` entries of `m_f`, column-major.
    pub fn m_f_entries(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.n_branch()).flat_map(move |k| [(self.from[k], k, 1), (self.to[k], k, -1)])
    }

    /// Nonzero entries of `m_l`, column-major.
    pub fn m_l_entries(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.n_branch()).map(move |k| (self.from[k], k, 1))
    }

    pub fn sending(&self, k: usize) -> usize {
        self.from[k]
    }

    pub fn receiving(&self, k: usize) -> usize {
        self.to[k]
    }
}

pub fn build_incidence(case: &NetworkCase) -> FlowIncidence {
    let (from, to) = case.branches().iter().map(|b| (case.pos(b.from_bus), case.pos(b.to_bus))).unzip();
    FlowIncidence { n_bus: case.buses().len(), from, to }
}
