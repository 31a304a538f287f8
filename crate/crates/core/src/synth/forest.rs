//! Large random merger forests with trees of prescribed sizes, for load and
//! query benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::halo::{HaloId, HaloRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestSpec {
    pub total_halos: usize,
    pub timesteps: u32,
    /// Exact node counts of the marked trees, each rooted at the last step.
    pub tree_sizes: Vec<usize>,
    /// Largest filler tree.
    pub max_filler_tree: usize,
    /// Fraction of filler halos turned into satellites of a heavier halo.
    pub satellite_fraction: f64,
    pub box_size: f64,
}

impl Default for ForestSpec {
    fn default() -> Self {
        ForestSpec {
            total_halos: 536_048,
            timesteps: 64,
            tree_sizes: vec![46, 188, 2083, 7873],
            max_filler_tree: 300,
            satellite_fraction: 0.1,
            box_size: 100.0,
        }
    }
}

pub struct GeneratedForest {
    pub halos: Vec<HaloRecord>,
    /// Root of each prescribed tree, in `tree_sizes` order.
    pub roots: Vec<HaloId>,
}

struct Grower<'a> {
    rng: &'a mut ChaCha8Rng,
    halos: Vec<HaloRecord>,
    box_size: f64,
}

impl Grower<'_> {
    fn node(&mut self, t: u32, descendant: Option<usize>) -> usize {
        let id = self.halos.len() as HaloId + 1;
        let center = std::array::from_fn(|_| self.rng.random_range(0.0..self.box_size));
        self.halos.push(HaloRecord {
            halo_id: id,
            timestep: t,
            descendant_id: descendant.map(|d| self.halos[d].halo_id),
            fof_group_id: id,
            is_master: true,
            center,
            radius: 1.0,
            mass: 0.0,
            dispersion: 0.0,
            density: 0.0,
        });
        self.halos.len() - 1
    }

    /// Grows a tree of exactly `size` nodes rooted at `root_t` by attaching
    /// each new progenitor to a random node that can still have one.
    fn tree(&mut self, size: usize, root_t: u32) -> Result<usize> {
        let first = self.halos.len();
        let root = self.node(root_t, None);
        let mut open: Vec<usize> = if root_t > 0 { vec![root] } else { vec![] };
        for _ in 1..size {
            if open.is_empty() {
                return Err(Error::InvalidSpec(format!(
                    "a tree of {size} halos does not fit below timestep {root_t}"
                )));
            }
            let parent = open[self.rng.random_range(0..open.len())];
            let t = self.halos[parent].timestep - 1;
            let child = self.node(t, Some(parent));
            if t > 0 {
                open.push(child);
            }
        }
        // masses grow toward the root: visit children before their parents
        let mut mass = vec![0.0; self.halos.len() - first];
        for i in (first..self.halos.len()).rev() {
            let own = self.rng.random_range(1.0..10.0);
            let m = mass[i - first] + own;
            self.halos[i].mass = m;
            self.halos[i].radius = 0.1 * m.cbrt();
            self.halos[i].dispersion = self.rng.random_range(0.5..1.5) * m.sqrt();
            self.halos[i].density = m / self.halos[i].radius.powi(3);
            if let Some(d) = self.halos[i].descendant_id {
                mass[(d - 1) as usize - first] += m;
            }
        }
        Ok(root)
    }
}

pub fn generate_forest(spec: &ForestSpec, seed: u64) -> Result<GeneratedForest> {
    let fixed: usize = spec.tree_sizes.iter().sum();
    if spec.timesteps == 0 || fixed > spec.total_halos || spec.tree_sizes.contains(&0) || spec.max_filler_tree == 0 {
        return Err(Error::InvalidSpec("tree sizes must be positive and fit in total_halos".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Grower {
        rng: &mut rng,
        halos: Vec::with_capacity(spec.total_halos),
        box_size: spec.box_size,
    };
    let last = spec.timesteps - 1;
    let roots = spec
        .tree_sizes
        .iter()
        .map(|&s| g.tree(s, last).map(|i| i as HaloId + 1))
        .collect::<Result<Vec<_>>>()?;
    let filler_start = g.halos.len();
    while g.halos.len() < spec.total_halos {
        let left = spec.total_halos - g.halos.len();
        let size = g.rng.random_range(1..=spec.max_filler_tree).min(left);
        let root_t = g.rng.random_range(0..spec.timesteps);
        // a tree deeper than its root allows just gets a later root
        let root_t = if root_t == 0 && size > 1 { last } else { root_t };
        g.tree(size, root_t)?;
    }
    let mut halos = g.halos;

    // Pair up filler halos at the same timestep: the lighter one becomes a
    // satellite in the heavier one's FOF group.
    let mut by_t: Vec<Vec<usize>> = vec![Vec::new(); spec.timesteps as usize];
    for i in filler_start..halos.len() {
        by_t[halos[i].timestep as usize].push(i);
    }
    for group in &mut by_t {
        group.shuffle(&mut rng);
        let pairs = ((group.len() as f64 * spec.satellite_fraction) as usize).min(group.len() / 2);
        for p in 0..pairs {
            let (a, b) = (group[2 * p], group[2 * p + 1]);
            let (master, sat) = if halos[a].mass >= halos[b].mass { (a, b) } else { (b, a) };
            halos[sat].fof_group_id = halos[master].fof_group_id;
            halos[sat].is_master = false;
        }
    }
    Ok(GeneratedForest { halos, roots })
}
