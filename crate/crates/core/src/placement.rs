//! Partition placement on level-0 containers.
//!
//! Tables are over-partitioned and every partition is written `replication`
//! times, in adjacent slots, onto an inner circle of `partitions *
//! replication` slots. The order of partitions around the circle comes from a
//! seeded 64-bit hash. Level-0 containers sit on an outer circle and each owns
//! one contiguous arc of slots. A container that ends up holding several
//! replicas of the same partition keeps a single copy.
//!
//! Growing the ring places the new container right after the container with
//! the most slots (lowest id on ties). The `arc + 1` containers around the
//! insertion point then split their combined slots evenly, so the reshuffle
//! stays local while the load stays balanced. Shrinking is the mirror image:
//! the removed container's arc is spread over its `arc` neighbours.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::splitmix64;

/// How partitions are ordered around the inner circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotOrder {
    /// Sorted by a seeded hash of the partition number.
    Hashed,
    /// Partition `p` occupies slots `p * r .. (p + 1) * r`. For exact small tests.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingMember {
    pub id: u32,
    /// First slot of this container's arc.
    pub start: u32,
    /// Number of consecutive slots owned, wrapping around the circle.
    pub len: u32,
}

/// Consistent-hash assignment of partition replicas to level-0 containers.
///
/// Serialized form (JSON or TOML via serde):
///
/// | field            | meaning                                              |
/// |------------------|------------------------------------------------------|
/// | `num_partitions` | distinct partitions                                  |
/// | `replication`    | copies of each partition on the inner circle         |
/// | `arc`            | neighbours involved in a local rebalance             |
/// | `seed`           | hash seed for the slot order                         |
/// | `data_size`      | bytes of all partition replicas together             |
/// | `slots`          | partition number stored in each inner-circle slot    |
/// | `members`        | containers clockwise, each `{id, start, len}`        |
/// | `next_id`        | id given to the next auto-numbered container         |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRing {
    num_partitions: u32,
    replication: u32,
    arc: u32,
    seed: u64,
    data_size: f64,
    slots: Vec<u32>,
    members: Vec<RingMember>,
    next_id: u32,
}

/// Data movement caused by a resize.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MoveReport {
    /// Partition copies that a container must fetch because it did not hold them before.
    pub moved_partitions: u32,
    /// `moved_partitions` over the number of (deduplicated) copies after the resize.
    pub moved_fraction: f64,
    pub bytes_to_fetch: f64,
}

pub const DEFAULT_ARC: u32 = 4;

/// Builds a ring with `containers` members, numbered `0..containers`, by
/// inserting them one at a time into a ring whose first member owns everything.
pub fn build_ring(num_partitions: u32, replication: u32, containers: u32, arc: u32, seed: u64) -> Result<PartitionRing> {
    PartitionRing::build(num_partitions, replication, containers, arc, seed, SlotOrder::Hashed)
}

/// Resizes a copy of `ring` to `new_count` containers and reports the net data movement.
pub fn resize(ring: &PartitionRing, new_count: u32) -> Result<(PartitionRing, MoveReport)> {
    let mut next = ring.clone();
    next.resize_to(new_count)?;
    let report = ring.moves_to(&next);
    Ok((next, report))
}

/// Fraction of the data that changes owner when going from `x` to `y`
/// containers: `1 - min(x / y, y / x)`. Real-valued for the relaxed optimizer.
#[inline]
pub fn move_model_fraction(x: f64, y: f64) -> f64 {
    1.0 - (x / y).min(y / x)
}

/// Bytes predicted to move when resizing level 0 from `x` to `y` containers.
pub fn predicted_move_size(x: u32, y: u32, data_size: f64) -> Result<f64> {
    if x == 0 || y == 0 {
        return Err(Error::Domain(format!("container counts must be >= 1, got {x} and {y}")));
    }
    if !(data_size >= 0.0) {
        return Err(Error::Domain(format!("data size must be >= 0, got {data_size}")));
    }
    Ok(move_model_fraction(f64::from(x), f64::from(y)) * data_size)
}

/// Distinct partitions per container.
pub fn ownership(ring: &PartitionRing) -> BTreeMap<u32, Vec<u32>> {
    ring.members
        .iter()
        .map(|m| (m.id, ring.partitions_of(m)))
        .collect()
}

/// Measured and predicted movement of one resize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovementSample {
    pub from: u32,
    pub to: u32,
    pub simulated: f64,
    pub model: f64,
}

impl MovementSample {
    pub fn abs_error(&self) -> f64 {
        (self.simulated - self.model).abs()
    }
}

/// Resizes a ring of every size in `from` to every size in `to(x)` and
/// compares the moved fraction with the model. Sorted by `(from, to)`.
pub fn movement_samples<I, F>(
    num_partitions: u32,
    replication: u32,
    arc: u32,
    seed: u64,
    from: I,
    to: F,
) -> Result<Vec<MovementSample>>
where
    I: IntoIterator<Item = u32>,
    F: Fn(u32) -> RangeInclusive<u32>,
{
    let mut out = Vec::new();
    for x in from {
        let base = build_ring(num_partitions, replication, x, arc, seed)?;
        let targets = to(x);
        let (lo, hi) = (*targets.start(), *targets.end());
        if lo == 0 {
            return Err(Error::Domain("target container counts must be >= 1".into()));
        }
        let sample = |y: u32, ring: &PartitionRing| MovementSample {
            from: x,
            to: y,
            simulated: base.moves_to(ring).moved_fraction,
            model: move_model_fraction(f64::from(x), f64::from(y)),
        };
        if (lo..=hi).contains(&x) {
            out.push(sample(x, &base));
        }
        let mut up = base.clone();
        for y in x + 1..=hi {
            up.insert_next()?;
            if y >= lo {
                out.push(sample(y, &up));
            }
        }
        let mut down = base.clone();
        for y in (lo..x).rev() {
            down.remove_lightest()?;
            if y <= hi {
                out.push(sample(y, &down));
            }
        }
    }
    out.sort_by_key(|s| (s.from, s.to));
    Ok(out)
}

impl PartitionRing {
    pub fn build(
        num_partitions: u32,
        replication: u32,
        containers: u32,
        arc: u32,
        seed: u64,
        order: SlotOrder,
    ) -> Result<Self> {
        if num_partitions == 0 || replication == 0 {
            return Err(Error::invalid("ring", "needs at least one partition and one replica"));
        }
        if containers == 0 {
            return Err(Error::invalid("ring", "needs at least one container"));
        }
        let slot_count = num_partitions
            .checked_mul(replication)
            .ok_or_else(|| Error::invalid("ring", "partitions * replication overflows"))?;

        let mut order_of: Vec<u32> = (0..num_partitions).collect();
        if order == SlotOrder::Hashed {
            order_of.sort_by_key(|&p| (splitmix64(seed ^ splitmix64(u64::from(p))), p));
        }
        let slots = order_of
            .iter()
            .flat_map(|&p| std::iter::repeat_n(p, replication as usize))
            .collect();

        let mut ring = PartitionRing {
            num_partitions,
            replication,
            arc,
            seed,
            data_size: 0.0,
            slots,
            members: vec![RingMember {
                id: 0,
                start: 0,
                len: slot_count,
            }],
            next_id: 1,
        };
        for _ in 1..containers {
            ring.insert_next()?;
        }
        Ok(ring)
    }

    /// Sets the total bytes of all replicas, used to price moves in bytes.
    pub fn with_data_size(mut self, data_size: f64) -> Self {
        self.data_size = data_size;
        self
    }

    pub fn num_partitions(&self) -> u32 {
        self.num_partitions
    }

    pub fn replication(&self) -> u32 {
        self.replication
    }

    pub fn arc(&self) -> u32 {
        self.arc
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn data_size(&self) -> f64 {
        self.data_size
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Containers in clockwise order.
    pub fn members(&self) -> &[RingMember] {
        &self.members
    }

    pub fn container_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().map(|m| m.id)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.iter().any(|m| m.id == id)
    }

    fn slot_count(&self) -> u32 {
        self.slots.len() as u32
    }

    fn partitions_of(&self, m: &RingMember) -> Vec<u32> {
        let s = self.slot_count();
        let mut parts: Vec<u32> = (0..m.len)
            .map(|k| self.slots[((m.start + k) % s) as usize])
            .collect();
        parts.sort_unstable();
        parts.dedup();
        parts
    }

    /// Inserts a container with the next free id.
    pub fn insert_next(&mut self) -> Result<u32> {
        let id = self.next_id;
        self.insert_container(id)?;
        Ok(id)
    }

    /// Inserts container `id` next to the most loaded container and rebalances its neighbourhood.
    pub fn insert_container(&mut self, id: u32) -> Result<()> {
        if self.contains(id) {
            return Err(Error::invalid("ring", format!("container {id} is already a member")));
        }
        self.next_id = self.next_id.max(id + 1);

        let largest = self
            .members
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.len.cmp(&b.len).then(b.id.cmp(&a.id)))
            .map(|(i, _)| i)
            .expect("ring always has a member");
        let s = self.slot_count();
        let host = &self.members[largest];
        let at = largest + 1;
        let new = RingMember {
            id,
            start: (host.start + host.len) % s,
            len: 0,
        };
        self.members.insert(at, new);

        let n = self.members.len();
        let window = self.arc as usize + 1;
        if n <= window {
            self.rebalance(0, n, self.members[0].start, 0);
        } else {
            // ceil(arc / 2) containers before the newcomer (the host among them), the rest after.
            let before = (self.arc as usize).div_ceil(2);
            let first = (at + n - before) % n;
            self.rebalance(first, window, self.members[first].start, 0);
        }
        Ok(())
    }

    /// Removes container `id`, spreading its arc over the `arc` neighbours around it.
    pub fn remove_container(&mut self, id: u32) -> Result<()> {
        let idx = self
            .members
            .iter()
            .position(|m| m.id == id)
            .ok_or_else(|| Error::invalid("ring", format!("container {id} is not a member")))?;
        let n = self.members.len();
        if n == 1 {
            return Err(Error::Domain("cannot remove the last container".into()));
        }
        let window = self.arc as usize + 1;
        let freed = self.members[idx].len;
        if n <= window {
            let start = self.members[0].start;
            self.members.remove(idx);
            self.rebalance(0, n - 1, start, freed);
        } else {
            let before = (self.arc as usize).div_ceil(2);
            let first = (idx + n - before) % n;
            let start = self.members[first].start;
            self.members.remove(idx);
            // Window members that sat after the removed index shifted left by one.
            let first = if first > idx { first - 1 } else { first };
            self.rebalance(first, window - 1, start, freed);
        }
        Ok(())
    }

    /// Removes the container with the fewest slots, the newest one on ties.
    pub fn remove_lightest(&mut self) -> Result<u32> {
        let id = self
            .members
            .iter()
            .min_by(|a, b| a.len.cmp(&b.len).then(b.id.cmp(&a.id)))
            .map(|m| m.id)
            .expect("ring always has a member");
        self.remove_container(id)?;
        Ok(id)
    }

    /// Adds or removes containers one at a time until the ring has `new_count` members.
    pub fn resize_to(&mut self, new_count: u32) -> Result<()> {
        if new_count == 0 {
            return Err(Error::Domain("a ring needs at least one container".into()));
        }
        while (self.members.len() as u32) < new_count {
            self.insert_next()?;
        }
        while (self.members.len() as u32) > new_count {
            self.remove_lightest()?;
        }
        Ok(())
    }

    /// Redistributes the slots of `count` consecutive members, plus `freed`
    /// orphaned slots, starting at member index `first` and slot `start`, as
    /// evenly as possible. Leftover slots go to the members that held the
    /// fewest slots before.
    fn rebalance(&mut self, first: usize, count: usize, start: u32, freed: u32) {
        let n = self.members.len();
        let idx: Vec<usize> = (0..count).map(|k| (first + k) % n).collect();
        let total: u32 = idx.iter().map(|&i| self.members[i].len).sum::<u32>() + freed;
        let share = total / count as u32;
        let extra = (total % count as u32) as usize;

        let mut by_load: Vec<usize> = (0..count).collect();
        by_load.sort_by_key(|&k| (self.members[idx[k]].len, k));
        let mut lens = vec![share; count];
        for &k in by_load.iter().take(extra) {
            lens[k] += 1;
        }

        let s = self.slot_count();
        let mut cursor = start;
        for (k, &i) in idx.iter().enumerate() {
            self.members[i].start = cursor;
            self.members[i].len = lens[k];
            cursor = (cursor + lens[k]) % s;
        }
    }

    /// Net data movement from `self` to `after`: every (partition, container)
    /// copy present in `after` but not in `self`.
    pub fn moves_to(&self, after: &PartitionRing) -> MoveReport {
        let before = ownership(self);
        let mut moved = 0u32;
        let mut total = 0u32;
        for m in &after.members {
            let now = after.partitions_of(m);
            total += now.len() as u32;
            moved += match before.get(&m.id) {
                Some(old) => count_missing(&now, old),
                None => now.len() as u32,
            };
        }
        let per_copy = after.data_size / f64::from(after.slot_count());
        MoveReport {
            moved_partitions: moved,
            moved_fraction: if total == 0 { 0.0 } else { f64::from(moved) / f64::from(total) },
            bytes_to_fetch: f64::from(moved) * per_copy,
        }
    }
}

/// Elements of sorted `a` absent from sorted `b`.
fn count_missing(a: &[u32], b: &[u32]) -> u32 {
    let (mut i, mut j, mut missing) = (0, 0, 0);
    while i < a.len() {
        if j >= b.len() || a[i] < b[j] {
            missing += 1;
            i += 1;
        } else if a[i] == b[j] {
            i += 1;
            j += 1;
        } else {
            j += 1;
        }
    }
    missing
}
