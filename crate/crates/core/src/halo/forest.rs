//! Merger forest: every halo across all timesteps, linked to its descendant.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorKind, Result};

pub type HaloId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaloRecord {
    pub halo_id: HaloId,
    pub timestep: u32,
    /// `None` when the halo dissolves or lives at the final timestep.
    pub descendant_id: Option<HaloId>,
    pub fof_group_id: u64,
    pub is_master: bool,
    pub center: [f64; 3],
    pub radius: f64,
    pub mass: f64,
    pub dispersion: f64,
    pub density: f64,
}

/// One invariant violation found by [`validate_forest`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ErrorKind,
    pub halos: Vec<HaloId>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (halos {:?})", self.kind, self.message, self.halos)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MergerForest {
    halos: Vec<HaloRecord>,
    index_by_id: HashMap<HaloId, usize>,
    by_timestep: Vec<Vec<usize>>,
    /// Per halo index: progenitor indices, descending mass then ascending id.
    progenitors: Vec<Vec<usize>>,
    /// Per halo index: descendant index when the link resolves.
    descendant: Vec<Option<usize>>,
    duplicates: Vec<HaloId>,
}

/// Descending mass, ties by ascending id.
pub fn progenitor_order(a: &HaloRecord, b: &HaloRecord) -> std::cmp::Ordering {
    b.mass
        .total_cmp(&a.mass)
        .then_with(|| a.halo_id.cmp(&b.halo_id))
}

impl MergerForest {
    /// Builds all indices without checking invariants. Duplicate ids keep
    /// their first record in the id index and are reported by
    /// [`validate_forest`]; dangling links are left unresolved.
    pub fn from_records(halos: Vec<HaloRecord>) -> MergerForest {
        let mut index_by_id = HashMap::with_capacity(halos.len());
        let mut duplicates = Vec::new();
        for (i, h) in halos.iter().enumerate() {
            if index_by_id.insert(h.halo_id, i).is_some() {
                duplicates.push(h.halo_id);
                // keep the first occurrence
                let first = halos.iter().position(|o| o.halo_id == h.halo_id).unwrap();
                index_by_id.insert(h.halo_id, first);
            }
        }
        let steps = halos.iter().map(|h| h.timestep as usize + 1).max().unwrap_or(0);
        let mut by_timestep = vec![Vec::new(); steps];
        for (i, h) in halos.iter().enumerate() {
            by_timestep[h.timestep as usize].push(i);
        }
        let descendant: Vec<Option<usize>> = halos
            .iter()
            .map(|h| h.descendant_id.and_then(|d| index_by_id.get(&d).copied()))
            .collect();
        let mut progenitors = vec![Vec::new(); halos.len()];
        for (i, d) in descendant.iter().enumerate() {
            if let Some(d) = d {
                if index_by_id.get(&halos[i].halo_id) == Some(&i) {
                    progenitors[*d].push(i);
                }
            }
        }
        for list in &mut progenitors {
            list.sort_by(|&a, &b| progenitor_order(&halos[a], &halos[b]));
        }
        MergerForest {
            halos,
            index_by_id,
            by_timestep,
            progenitors,
            descendant,
            duplicates,
        }
    }

    /// Builds the forest and fails on the first invariant violation.
    pub fn load(halos: Vec<HaloRecord>) -> Result<MergerForest> {
        let forest = MergerForest::from_records(halos);
        if let Some(v) = validate_forest(&forest).into_iter().next() {
            return Err(forest.violation_error(v));
        }
        Ok(forest)
    }

    fn violation_error(&self, v: Violation) -> Error {
        let rec = |id: HaloId| self.get(id);
        match v.kind {
            ErrorKind::DuplicateId => Error::DuplicateId(v.halos[0]),
            ErrorKind::BrokenLink => Error::BrokenLink {
                halo: v.halos[0],
                descendant: v.halos[1],
            },
            ErrorKind::BadLink => Error::BadLink {
                halo: v.halos[0],
                timestep: rec(v.halos[0]).map_or(0, |h| h.timestep),
                descendant: v.halos[1],
                descendant_timestep: rec(v.halos[1]).map_or(0, |h| h.timestep),
            },
            ErrorKind::FofViolation => {
                let h = rec(v.halos[0]);
                Error::FofViolation {
                    timestep: h.map_or(0, |h| h.timestep),
                    group: h.map_or(0, |h| h.fof_group_id),
                    halos: v.halos,
                    reason: v.message,
                }
            }
            ErrorKind::Cycle => Error::Cycle(v.halos),
            _ => Error::Format(v.message),
        }
    }

    pub fn len(&self) -> usize {
        self.halos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halos.is_empty()
    }

    pub fn halos(&self) -> &[HaloRecord] {
        &self.halos
    }

    pub fn timestep_count(&self) -> usize {
        self.by_timestep.len()
    }

    pub fn index_of(&self, id: HaloId) -> Option<usize> {
        self.index_by_id.get(&id).copied()
    }

    pub fn get(&self, id: HaloId) -> Option<&HaloRecord> {
        self.index_of(id).map(|i| &self.halos[i])
    }

    pub fn require(&self, id: HaloId) -> Result<&HaloRecord> {
        self.get(id).ok_or(Error::NoSuchHalo(id))
    }

    pub fn at_timestep(&self, t: u32) -> impl Iterator<Item = &HaloRecord> {
        self.by_timestep
            .get(t as usize)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.halos[i])
    }

    /// Progenitor ids of a halo in descending-mass order.
    pub fn progenitors(&self, id: HaloId) -> Vec<HaloId> {
        self.index_of(id)
            .map(|i| self.progenitors[i].iter().map(|&p| self.halos[p].halo_id).collect())
            .unwrap_or_default()
    }

    pub(crate) fn progenitor_indices(&self, index: usize) -> &[usize] {
        &self.progenitors[index]
    }

    pub(crate) fn halo_at(&self, index: usize) -> &HaloRecord {
        &self.halos[index]
    }
}

/// Every invariant violation, in a fixed order: duplicate ids, broken links,
/// bad links, FOF group violations, cycles.
pub fn validate_forest(forest: &MergerForest) -> Vec<Violation> {
    let mut out = Vec::new();
    let halos = &forest.halos;

    for &id in &forest.duplicates {
        out.push(Violation {
            kind: ErrorKind::DuplicateId,
            halos: vec![id],
            message: format!("halo id {id} appears more than once"),
        });
    }

    for (i, h) in halos.iter().enumerate() {
        let Some(d) = h.descendant_id else { continue };
        match forest.descendant[i] {
            None => out.push(Violation {
                kind: ErrorKind::BrokenLink,
                halos: vec![h.halo_id, d],
                message: format!("descendant {d} of halo {} does not exist", h.halo_id),
            }),
            Some(di) if halos[di].timestep != h.timestep + 1 => out.push(Violation {
                kind: ErrorKind::BadLink,
                halos: vec![h.halo_id, d],
                message: format!(
                    "halo {} at t={} links to {d} at t={}",
                    h.halo_id, h.timestep, halos[di].timestep
                ),
            }),
            Some(_) => {}
        }
    }

    let mut groups: BTreeMap<(u32, u64), Vec<usize>> = BTreeMap::new();
    for (i, h) in halos.iter().enumerate() {
        groups.entry((h.timestep, h.fof_group_id)).or_default().push(i);
    }
    for ((t, g), members) in &groups {
        let masters: Vec<usize> = members.iter().copied().filter(|&i| halos[i].is_master).collect();
        let ids = |v: &[usize]| v.iter().map(|&i| halos[i].halo_id).collect::<Vec<_>>();
        match masters.as_slice() {
            [] => out.push(Violation {
                kind: ErrorKind::FofViolation,
                halos: ids(members),
                message: format!("fof group {g} at t={t} has no master halo"),
            }),
            [m] => {
                let master = &halos[*m];
                for &s in members {
                    if halos[s].mass > master.mass {
                        out.push(Violation {
                            kind: ErrorKind::FofViolation,
                            halos: vec![master.halo_id, halos[s].halo_id],
                            message: format!(
                                "satellite {} outweighs master {} in fof group {g} at t={t}",
                                halos[s].halo_id, master.halo_id
                            ),
                        });
                    }
                }
            }
            many => out.push(Violation {
                kind: ErrorKind::FofViolation,
                halos: ids(many),
                message: format!("fof group {g} at t={t} has {} master halos", many.len()),
            }),
        }
    }

    // Cycle detection over resolved descendant links, independent of
    // timesteps: iterative colouring walk.
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut colour = vec![WHITE; halos.len()];
    let mut path = Vec::new();
    for start in 0..halos.len() {
        if colour[start] != WHITE {
            continue;
        }
        path.clear();
        let mut cur = Some(start);
        while let Some(i) = cur {
            match colour[i] {
                WHITE => {
                    colour[i] = GREY;
                    path.push(i);
                    cur = forest.descendant[i];
                }
                GREY => {
                    let from = path.iter().position(|&p| p == i).unwrap();
                    out.push(Violation {
                        kind: ErrorKind::Cycle,
                        halos: path[from..].iter().map(|&p| halos[p].halo_id).collect(),
                        message: "descendant links form a cycle".into(),
                    });
                    break;
                }
                _ => break,
            }
        }
        for &p in &path {
            colour[p] = BLACK;
        }
    }
    out
}
