//! Virtual-clock list scheduler.
//!
//! A command is ready once every event in its wait list has ended and its
//! queue predecessor has ended. Distinct queues run concurrently without
//! limit, so each command starts exactly at its ready time. Ties between
//! commands ready at the same instant are broken by (queued, queue, sequence),
//! which fixes the order in which command side effects are applied.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandSpec {
    pub queue: usize,
    pub queued: u64,
    pub duration: u64,
    /// Indices of other commands in the same batch that must end first.
    pub deps: Vec<usize>,
    /// Lower bound from work completed outside this batch.
    pub not_before: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub slots: Vec<Slot>,
    /// Command indices in start order; a valid topological order.
    pub order: Vec<usize>,
}

pub fn schedule(cmds: &[CommandSpec]) -> Result<Schedule> {
    let n = cmds.len();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut blockers = vec![0usize; n];
    let mut last_on_queue: Vec<Option<usize>> = Vec::new();

    for (i, c) in cmds.iter().enumerate() {
        for &d in &c.deps {
            if d >= n || d == i {
                return Err(Error::DependencyCycle);
            }
            dependents[d].push(i);
            blockers[i] += 1;
        }
        if c.queue >= last_on_queue.len() {
            last_on_queue.resize(c.queue + 1, None);
        }
        if let Some(prev) = last_on_queue[c.queue].replace(i) {
            dependents[prev].push(i);
            blockers[i] += 1;
        }
    }

    let mut ready_at: Vec<u64> = cmds.iter().map(|c| c.queued.max(c.not_before)).collect();
    let mut heap = BinaryHeap::new();
    for (i, c) in cmds.iter().enumerate() {
        if blockers[i] == 0 {
            heap.push(Reverse((ready_at[i], c.queued, c.queue, i)));
        }
    }

    let mut slots = vec![Slot { start: 0, end: 0 }; n];
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((start, _, _, i))) = heap.pop() {
        let end = start + cmds[i].duration;
        slots[i] = Slot { start, end };
        order.push(i);
        for &j in &dependents[i] {
            ready_at[j] = ready_at[j].max(end);
            blockers[j] -= 1;
            if blockers[j] == 0 {
                heap.push(Reverse((ready_at[j], cmds[j].queued, cmds[j].queue, j)));
            }
        }
    }

    if order.len() != n {
        return Err(Error::DependencyCycle);
    }
    Ok(Schedule { slots, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cmd(queue: usize, queued: u64, duration: u64, deps: &[usize]) -> CommandSpec {
        CommandSpec { queue, queued, duration, deps: deps.to_vec(), not_before: 0 }
    }

    #[test]
    fn independent_queues_run_concurrently() {
        let s = schedule(&[cmd(0, 0, 100, &[]), cmd(1, 0, 100, &[])]).unwrap();
        assert_eq!(s.slots, [Slot { start: 0, end: 100 }, Slot { start: 0, end: 100 }]);
    }

    #[test]
    fn wait_list_delays_start() {
        let s = schedule(&[cmd(0, 0, 50, &[]), cmd(1, 1, 10, &[0])]).unwrap();
        assert_eq!(s.slots[1].start, 50);
    }

    #[test]
    fn same_queue_serializes() {
        let s = schedule(&[cmd(0, 0, 30, &[]), cmd(0, 1, 30, &[])]).unwrap();
        assert_eq!(s.slots[1], Slot { start: 30, end: 60 });
    }

    #[test]
    fn cycle_detected() {
        let cmds = [cmd(0, 0, 1, &[1]), cmd(1, 0, 1, &[0])];
        assert!(matches!(schedule(&cmds), Err(Error::DependencyCycle)));
        assert!(matches!(schedule(&[cmd(0, 0, 1, &[0])]), Err(Error::DependencyCycle)));
    }

    #[test]
    fn tie_break_by_queued_then_queue() {
        let s = schedule(&[cmd(1, 5, 0, &[]), cmd(0, 5, 0, &[]), cmd(2, 3, 2, &[])]).unwrap();
        // all ready at their queued instant; 2 at t=3 first, then queue 0 before queue 1
        assert_eq!(s.order, [2, 1, 0]);
    }

    #[test]
    fn not_before_is_respected() {
        let mut c = cmd(0, 0, 5, &[]);
        c.not_before = 42;
        assert_eq!(schedule(&[c]).unwrap().slots[0], Slot { start: 42, end: 47 });
    }

    /// Fixed-point oracle: with deps pointing only backwards, a single pass in
    /// index order settles every start time.
    fn oracle(cmds: &[CommandSpec]) -> Vec<Slot> {
        let mut out: Vec<Slot> = Vec::new();
        for (i, c) in cmds.iter().enumerate() {
            let mut start = c.queued.max(c.not_before);
            for &d in &c.deps {
                start = start.max(out[d].end);
            }
            if let Some(p) = (0..i).rev().find(|&p| cmds[p].queue == c.queue) {
                start = start.max(out[p].end);
            }
            out.push(Slot { start, end: start + c.duration });
        }
        out
    }

    fn arb_cmds() -> impl Strategy<Value = Vec<CommandSpec>> {
        proptest::collection::vec((0..3usize, 0..200u64, proptest::collection::vec(any::<prop::sample::Index>(), 0..3)), 1..30)
            .prop_map(|raw| {
                raw.into_iter()
                    .enumerate()
                    .map(|(i, (q, dur, deps))| {
                        let deps = if i == 0 { vec![] } else { deps.iter().map(|d| d.index(i)).collect() };
                        CommandSpec { queue: q, queued: i as u64, duration: dur, deps, not_before: 0 }
                    })
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn matches_fixed_point_oracle(cmds in arb_cmds()) {
            let s = schedule(&cmds).unwrap();
            prop_assert_eq!(&s.slots, &oracle(&cmds));
            let mut pos = vec![0; cmds.len()];
            for (k, &i) in s.order.iter().enumerate() {
                pos[i] = k;
            }
            for (i, c) in cmds.iter().enumerate() {
                for &d in &c.deps {
                    prop_assert!(pos[d] < pos[i]);
                    prop_assert!(s.slots[i].start >= s.slots[d].end);
                }
            }
        }
    }
}
