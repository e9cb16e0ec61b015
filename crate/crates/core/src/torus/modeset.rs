//! Symmetric lattice sets and the saturation closure.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::basis::{in_half_lattice, ModeIndex, Parity};
use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::ndjson;

/// Finite symmetric `K` in `Z^2` containing the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet {
    members: HashSet<(i32, i32)>,
}

impl ModeSet {
    /// Errors unless the set is symmetric and contains `(0, 0)`.
    pub fn new<I: IntoIterator<Item = (i32, i32)>>(sites: I) -> Result<ModeSet> {
        let members: HashSet<(i32, i32)> = sites.into_iter().collect();
        if !members.contains(&(0, 0)) {
            return domain("mode set must contain (0, 0)");
        }
        if let Some(m) = members.iter().find(|m| !members.contains(&(-m.0, -m.1))) {
            return domain(format!("mode set not symmetric: ({}, {}) without its negative", m.0, m.1));
        }
        Ok(ModeSet { members })
    }

    /// Closes `sites` under negation and adds the origin.
    pub fn symmetrized<I: IntoIterator<Item = (i32, i32)>>(sites: I) -> ModeSet {
        let mut members: HashSet<(i32, i32)> = HashSet::new();
        members.insert((0, 0));
        for (a, b) in sites {
            members.insert((a, b));
            members.insert((-a, -b));
        }
        ModeSet { members }
    }

    /// `{(0,0), +-(1,0), +-(0,1), +-(1,1), +-(1,-1)}`
    pub fn standard_generator() -> ModeSet {
        ModeSet::symmetrized([(1, 0), (0, 1), (1, 1), (1, -1)])
    }

    pub fn contains(&self, site: (i32, i32)) -> bool {
        self.members.contains(&site)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sorted(&self) -> Vec<(i32, i32)> {
        let mut v: Vec<(i32, i32)> = self.members.iter().copied().collect();
        v.sort_unstable();
        v
    }

    /// Sites of `K` on the half lattice, sorted.
    pub fn half_lattice_sites(&self) -> Vec<(i32, i32)> {
        self.sorted().into_iter().filter(|&(a, b)| in_half_lattice(a, b)).collect()
    }

    /// Real oscillatory modes spanned by `K` (sin and cos per half-lattice site).
    pub fn modes(&self) -> Vec<ModeIndex> {
        self.half_lattice_sites()
            .into_iter()
            .flat_map(|(a, b)| {
                [Parity::Sin, Parity::Cos].map(|parity| ModeIndex { j1: a, j2: b, parity })
            })
            .collect()
    }

    pub fn max_norm(&self) -> i32 {
        self.members.iter().map(|&(a, b)| a.abs().max(b.abs())).max().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j1,j2")?;
        for (a, b) in self.sorted() {
            writeln!(w, "{a},{b}")?;
        }
        Ok(())
    }

    pub fn read_csv(text: &str) -> Result<ModeSet> {
        let mut sites = Vec::new();
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let mut it = line.split(',').map(|s| s.trim().parse::<i32>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => sites.push((a, b)),
                _ => return domain(format!("bad mode-set row {line:?}")),
            }
        }
        ModeSet::new(sites)
    }
}

fn wedge(m: (i32, i32), n: (i32, i32)) -> i64 {
    m.0 as i64 * n.1 as i64 - m.1 as i64 * n.0 as i64
}

fn norm_sq(m: (i32, i32)) -> i64 {
    m.0 as i64 * m.0 as i64 + m.1 as i64 * m.1 as i64
}

/// `K u {m + n : m, n in K, |m| != |n|, m ^ n != 0}`
pub fn saturate_step(k: &ModeSet) -> ModeSet {
    saturate_step_with(k, Exec::Sequential)
}

pub fn saturate_step_with(k: &ModeSet, exec: Exec) -> ModeSet {
    let sites = k.sorted();
    let found: Vec<Vec<(i32, i32)>> = exec.map(sites.len(), |i| {
        let m = sites[i];
        sites
            .iter()
            .filter(|&&n| norm_sq(m) != norm_sq(n) && wedge(m, n) != 0)
            .map(|&n| (m.0 + n.0, m.1 + n.1))
            .filter(|s| !k.contains(*s))
            .collect()
    });
    let mut members = k.members.clone();
    members.extend(found.into_iter().flatten());
    ModeSet { members }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationIteration {
    pub i: usize,
    pub size: usize,
    pub newly_added: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub radius: i32,
    pub covered: bool,
    /// Steps taken; zero when `K` already covers the window.
    pub iterations: usize,
    /// Window sites not reached, sorted.
    pub missing: Vec<(i32, i32)>,
    /// The closure stopped growing before covering the window.
    pub fixpoint: bool,
    pub history: Vec<SaturationIteration>,
}

impl SaturationReport {
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        ndjson::write_all(&mut w, &self.history)
    }
}

pub const DEFAULT_MAX_ITERS: usize = 32;

fn window_missing(k: &ModeSet, radius: i32) -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            if !k.contains((a, b)) {
                v.push((a, b));
            }
        }
    }
    v
}

/// Iterates [`saturate_step`] until `{|l|_inf <= radius}` is covered, the set
/// stops growing, or `max_iters` steps have been taken.
pub fn is_saturating_up_to(k: &ModeSet, radius: i32, max_iters: usize) -> Result<SaturationReport> {
    if radius < 1 {
        return domain(format!("radius {radius} must be at least 1"));
    }
    let mut current = k.clone();
    let mut history = vec![SaturationIteration { i: 0, size: current.len(), newly_added: 0 }];
    let mut missing = window_missing(&current, radius);
    let mut fixpoint = false;
    let mut iterations = 0;
    while !missing.is_empty() && iterations < max_iters {
        let next = saturate_step_with(&current, Exec::Parallel);
        iterations += 1;
        let added = next.len() - current.len();
        history.push(SaturationIteration { i: iterations, size: next.len(), newly_added: added });
        current = next;
        missing = window_missing(&current, radius);
        if added == 0 {
            fixpoint = true;
            break;
        }
    }
    Ok(SaturationReport { radius, covered: missing.is_empty(), iterations, missing, fixpoint, history })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_closure(gen: &[(i32, i32)], steps: usize) -> HashSet<(i32, i32)> {
        let mut k: Vec<(i32, i32)> = gen.to_vec();
        for _ in 0..steps {
            let mut next = k.clone();
            for &m in &k {
                for &n in &k {
                    let nm = m.0 * m.0 + m.1 * m.1;
                    let nn = n.0 * n.0 + n.1 * n.1;
                    let w = m.0 * n.1 - m.1 * n.0;
                    let s = (m.0 + n.0, m.1 + n.1);
                    if nm != nn && w != 0 && !next.contains(&s) {
                        next.push(s);
                    }
                }
            }
            k = next;
        }
        k.into_iter().collect()
    }

    #[test]
    fn validation_and_csv() {
        assert!(ModeSet::new([(1, 0), (-1, 0)]).is_err());
        assert!(ModeSet::new([(0, 0), (1, 0)]).is_err());
        let k = ModeSet::standard_generator();
        assert_eq!(k.len(), 9);
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("j1,j2\n-1,-1\n-1,0\n"));
        assert_eq!(ModeSet::read_csv(&text).unwrap(), k);
        assert_eq!(k.modes().len(), 8);
    }

    #[test]
    fn trivial_steps() {
        let origin = ModeSet::new([(0, 0)]).unwrap();
        assert_eq!(saturate_step(&origin), origin);
        let axes = ModeSet::symmetrized([(1, 0), (0, 1)]);
        let next = saturate_step(&axes);
        // (1,0)+(0,1) is excluded since |m| = |n|; only pairs with the origin qualify, and they have zero wedge
        assert_eq!(next, axes);
    }

    #[test]
    fn matches_brute_force() {
        let gen = ModeSet::standard_generator();
        let mut k = gen.clone();
        for step in 1..=3 {
            k = saturate_step(&k);
            let oracle = brute_closure(&gen.sorted(), step);
            assert_eq!(k.members, oracle, "step {step}");
            assert!(k.members.iter().all(|m| k.contains((-m.0, -m.1))));
        }
        let r = is_saturating_up_to(&gen, 3, DEFAULT_MAX_ITERS).unwrap();
        assert!(r.covered);
        let oracle = brute_closure(&gen.sorted(), r.iterations);
        assert!((-3..=3).all(|a| (-3..=3).all(|b| oracle.contains(&(a, b)))));
    }

    #[test]
    fn standard_generator_saturates_window() {
        let gen = ModeSet::standard_generator();
        let r8 = is_saturating_up_to(&gen, 8, DEFAULT_MAX_ITERS).unwrap();
        assert!(r8.covered && r8.missing.is_empty());
        for radius in 1..8 {
            let r = is_saturating_up_to(&gen, radius, DEFAULT_MAX_ITERS).unwrap();
            assert!(r.covered && r.iterations <= r8.iterations);
        }
        let mut buf = Vec::new();
        r8.write_ndjson(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), r8.iterations + 1);
    }

    #[test]
    fn collinear_generator_stays_on_axis() {
        let k = ModeSet::symmetrized([(1, 0), (2, 0)]);
        let r = is_saturating_up_to(&k, 2, DEFAULT_MAX_ITERS).unwrap();
        assert!(!r.covered && r.fixpoint);
        assert!(r.missing.contains(&(0, 1)));
        assert_eq!(saturate_step(&k), k);
    }

    #[test]
    fn monotone_and_idempotent_at_fixpoint() {
        let k = ModeSet::symmetrized([(1, 0), (2, 1)]);
        let next = saturate_step(&k);
        assert!(k.sorted().iter().all(|m| next.contains(*m)));
        let fixed = ModeSet::symmetrized([(3, 0)]);
        assert_eq!(saturate_step(&saturate_step(&fixed)), fixed);
        assert_eq!(saturate_step_with(&next, Exec::Parallel), saturate_step(&next));
    }
}
