//! Dense indexed set over `0..cap` with O(1) insert, remove, membership and
//! uniform random choice. Used for unmatched configuration points and for the
//! per-type vertex buckets of the greedy algorithms.

use rand::Rng as _;

use crate::rng::Rng;

#[derive(Clone, Debug)]
pub(crate) struct IndexedSet {
    members: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl IndexedSet {
    pub fn with_capacity(cap: usize) -> Self {
        IndexedSet {
            members: Vec::new(),
            pos: vec![ABSENT; cap],
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.pos[id] != ABSENT
    }

    /// Inserts `id`; no-op if present.
    pub fn insert(&mut self, id: usize) {
        if !self.contains(id) {
            self.pos[id] = self.members.len() as u32;
            self.members.push(id as u32);
        }
    }

    /// Removes `id` by swapping with the last member; no-op if absent.
    pub fn remove(&mut self, id: usize) {
        let p = self.pos[id];
        if p == ABSENT {
            return;
        }
        let last = *self.members.last().unwrap();
        self.members[p as usize] = last;
        self.pos[last as usize] = p;
        self.members.pop();
        self.pos[id] = ABSENT;
    }

    /// Uniformly random member, None when empty.
    pub fn pick(&self, rng: &mut Rng) -> Option<usize> {
        if self.members.is_empty() {
            None
        } else {
            Some(self.members[rng.gen_range(0..self.members.len())] as usize)
        }
    }

}
