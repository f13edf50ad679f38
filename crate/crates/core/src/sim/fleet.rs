//! Leased containers, their lifecycle and the level-0 partition ring.
//!
//! Containers are paid for in whole quanta. Shrinking a level only flags the
//! surplus as pending-delete: such a container finishes what it was given and
//! is released at the end of its paid quantum, unless a later grow takes it back.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ContainerLayout;
use crate::placement::{MoveReport, PartitionRing};
use crate::scheduler::{ContainerId, ContainerState};

/// What a layout change did to the fleet.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LayoutChange {
    /// Newly leased containers, each starting a fresh quantum.
    pub fresh: Vec<ContainerId>,
    /// Pending-delete containers taken back into service.
    pub reused: Vec<ContainerId>,
    /// Containers flagged pending-delete.
    pub retired: Vec<ContainerId>,
    /// Partition movement on the data level.
    pub moves: MoveReport,
    pub data_level_before: u32,
    pub data_level_after: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeaseOutcome {
    /// Idle and pending-delete: gone.
    Released,
    /// Paid for another quantum, ending at the given time.
    Renewed(f64),
    /// Not a live container.
    Unknown,
}

#[derive(Debug, Clone)]
pub struct Fleet {
    /// Sorted by id.
    containers: Vec<ContainerState>,
    ring: PartitionRing,
    height: usize,
    quantum: f64,
    next_id: ContainerId,
}

impl Fleet {
    /// Leases `layout` at time `now`. Data-level containers get ids `0..layout[0]`.
    pub fn new(layout: &ContainerLayout, ring: PartitionRing, quantum: f64, now: f64) -> Result<Self> {
        if ring.len() as u32 != layout.get(0) || !(0..layout.get(0)).all(|id| ring.contains(id)) {
            return Err(Error::Config(format!(
                "ring must hold exactly the {} data-level containers",
                layout.get(0)
            )));
        }
        let mut fleet = Fleet {
            containers: Vec::with_capacity(layout.total() as usize),
            ring,
            height: layout.height(),
            quantum,
            next_id: 0,
        };
        for (level, &count) in layout.levels().iter().enumerate() {
            for _ in 0..count {
                fleet.lease(level, now);
            }
        }
        Ok(fleet)
    }

    fn lease(&mut self, level: usize, now: f64) -> ContainerId {
        let id = self.next_id;
        self.next_id += 1;
        self.containers.push(ContainerState::new(id, level, now + self.quantum));
        id
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ring(&self) -> &PartitionRing {
        &self.ring
    }

    pub fn containers(&self) -> &[ContainerState] {
        &self.containers
    }

    pub fn containers_mut(&mut self) -> &mut [ContainerState] {
        &mut self.containers
    }

    pub fn get(&self, id: ContainerId) -> Option<&ContainerState> {
        self.containers
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.containers[i])
    }

    pub fn get_mut(&mut self, id: ContainerId) -> Option<&mut ContainerState> {
        self.containers
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(move |i| &mut self.containers[i])
    }

    /// Containers accepting new work, per level.
    pub fn active_per_level(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.height];
        for c in self.containers.iter().filter(|c| !c.pending_delete) {
            counts[c.level] += 1;
        }
        counts
    }

    /// Containers being paid for (active or pending-delete), per level.
    pub fn leased_per_level(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.height];
        for c in &self.containers {
            counts[c.level] += 1;
        }
        counts
    }

    /// Moves the active layout to `target`.
    ///
    /// Shrinking flags the active containers whose leases end soonest
    /// (lowest id first on ties). Growing first takes back pending-delete
    /// containers with the most paid time left, then leases fresh ones.
    /// Data-level changes go through the ring one container at a time.
    pub fn apply_layout(&mut self, target: &ContainerLayout, now: f64) -> Result<LayoutChange> {
        if target.height() != self.height {
            return Err(Error::Config(format!(
                "target layout has {} levels, fleet has {}",
                target.height(),
                self.height
            )));
        }
        let before_ring = self.ring.clone();
        let mut change = LayoutChange {
            data_level_before: self.active_per_level()[0],
            ..Default::default()
        };

        for level in 0..self.height {
            let want = target.get(level) as usize;
            let mut active: Vec<usize> = (0..self.containers.len())
                .filter(|&i| self.containers[i].level == level && !self.containers[i].pending_delete)
                .collect();
            if want < active.len() {
                active.sort_by(|&a, &b| {
                    let (a, b) = (&self.containers[a], &self.containers[b]);
                    a.lease_end.total_cmp(&b.lease_end).then(a.id.cmp(&b.id))
                });
                for &i in &active[..active.len() - want] {
                    self.containers[i].pending_delete = true;
                    change.retired.push(self.containers[i].id);
                }
            } else if want > active.len() {
                let mut missing = want - active.len();
                let mut pending: Vec<usize> = (0..self.containers.len())
                    .filter(|&i| self.containers[i].level == level && self.containers[i].pending_delete)
                    .collect();
                pending.sort_by(|&a, &b| {
                    let (a, b) = (&self.containers[a], &self.containers[b]);
                    b.lease_end.total_cmp(&a.lease_end).then(a.id.cmp(&b.id))
                });
                for &i in pending.iter().take(missing) {
                    self.containers[i].pending_delete = false;
                    change.reused.push(self.containers[i].id);
                }
                missing -= missing.min(pending.len());
                for _ in 0..missing {
                    let id = self.lease(level, now);
                    change.fresh.push(id);
                }
            }
        }

        for id in &change.retired {
            if self.get(*id).is_some_and(|c| c.level == 0) {
                self.ring.remove_container(*id)?;
            }
        }
        for id in change.reused.iter().chain(&change.fresh) {
            if self.get(*id).is_some_and(|c| c.level == 0) {
                self.ring.insert_container(*id)?;
            }
        }
        change.data_level_after = self.active_per_level()[0];
        change.moves = before_ring.moves_to(&self.ring);
        Ok(change)
    }

    /// Flags every container pending-delete (end of the run).
    pub fn retire_all(&mut self) {
        for c in &mut self.containers {
            c.pending_delete = true;
        }
    }

    /// Handles the end of container `id`'s paid quantum at `now`.
    pub fn lease_ended(&mut self, id: ContainerId, now: f64) -> LeaseOutcome {
        let Ok(i) = self.containers.binary_search_by_key(&id, |c| c.id) else {
            return LeaseOutcome::Unknown;
        };
        let c = &mut self.containers[i];
        if c.pending_delete && c.load == 0 {
            self.containers.remove(i);
            return LeaseOutcome::Released;
        }
        c.lease_end = now + self.quantum;
        LeaseOutcome::Renewed(c.lease_end)
    }
}
