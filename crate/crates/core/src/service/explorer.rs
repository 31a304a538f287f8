//! The exploration state machine behind the HTTP API: datasets, sessions,
//! selections and the per-dataset tree cache.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DatasetDescriptor, DESCRIPTOR_FILE};
use crate::error::{Error, Result};
use crate::halo::{extract_subtree, halos_in_selection, trace_halo, HaloId, ParticleTracer, TracePath, TraceSubject, TraceTarget};
use crate::layout::{layout_halos, layout_merger_tree, time_colormap, DiscStyle, Layout2D, Rgb, TreeLayout, TreeSpacing};
use crate::selection::{
    wysiwyg_select_cancellable, CameraPose, ClusterId, LassoRegion, SelectionParams, SelectionResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorerConfig {
    /// Default grid resolution for selections that do not set one.
    pub grid_n: u32,
    pub disc_style: DiscStyle,
    pub tree_spacing: TreeSpacing,
    /// Canvas of the MDS halo scatter, pixels.
    pub scatter_size: [f64; 2],
}

impl Default for ExplorerConfig {
    fn default() -> Self {
        ExplorerConfig {
            grid_n: SelectionParams::default().grid_n,
            disc_style: DiscStyle::default(),
            tree_spacing: TreeSpacing::default(),
            scatter_size: [800.0, 600.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectRequest {
    pub camera: CameraPose,
    pub lasso: LassoRegion,
    /// Missing fields take their defaults, with `grid_n` from the server.
    #[serde(default)]
    pub params: Option<serde_json::Value>,
    /// Defaults to the session's active timestep.
    #[serde(default)]
    pub timestep: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: ClusterId,
    pub particle_count: usize,
    pub pixel_count: u64,
    pub voxel_count: usize,
    /// Member particle ids, only on request.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub timestep: u32,
    pub threshold: f64,
    pub cluster_count: usize,
    pub primary_cluster_id: Option<ClusterId>,
    pub clusters: Vec<ClusterSummary>,
    /// Master halos inside the primary cluster, heaviest first.
    pub halos: Vec<HaloId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoredVertex {
    pub timestep: u32,
    pub position: [f64; 3],
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoredTrace {
    pub subject: TraceTarget,
    pub segments: Vec<Vec<ColoredVertex>>,
}

#[derive(Debug, Clone)]
struct Cached {
    timestep: u32,
    camera: CameraPose,
    result: Arc<SelectionResult>,
    halos: Vec<HaloId>,
}

#[derive(Debug, Default)]
struct SessionState {
    timestep: u32,
    selection: Option<Cached>,
    selected_halo: Option<HaloId>,
}

#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub dataset: Arc<Dataset>,
    generation: AtomicU64,
    state: Mutex<SessionState>,
}

impl Session {
    pub fn active_timestep(&self) -> u32 {
        self.state.lock().unwrap().timestep
    }

    pub fn selected_halo(&self) -> Option<HaloId> {
        self.state.lock().unwrap().selected_halo
    }

    /// Starts a new selection-changing request; anything older still
    /// running sees itself cancelled.
    fn begin(&self) -> u64 {
        self.generation.fetch_add(1, Ordering::SeqCst) + 1
    }

    fn is_current(&self, generation: u64) -> bool {
        self.generation.load(Ordering::SeqCst) == generation
    }
}

#[derive(Debug, Default)]
pub struct Explorer {
    pub config: ExplorerConfig,
    datasets: RwLock<BTreeMap<String, Arc<Dataset>>>,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
    trees: Mutex<HashMap<(String, HaloId), Arc<TreeLayout>>>,
}

impl Explorer {
    pub fn new(config: ExplorerConfig) -> Explorer {
        Explorer {
            config,
            ..Default::default()
        }
    }

    pub fn open_dataset(&self, dir: &Path) -> Result<DatasetDescriptor> {
        let ds = Dataset::open(dir)?;
        let desc = ds.descriptor.clone();
        let name = desc.name.clone();
        self.trees.lock().unwrap().retain(|(d, _), _| *d != name);
        self.datasets.write().unwrap().insert(name, Arc::new(ds));
        Ok(desc)
    }

    /// Opens `dir` itself if it is a dataset, otherwise every immediate
    /// subdirectory that is one.
    pub fn open_data_dir(&self, dir: &Path) -> Result<Vec<DatasetDescriptor>> {
        if dir.join(DESCRIPTOR_FILE).is_file() {
            return Ok(vec![self.open_dataset(dir)?]);
        }
        let mut dirs: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(DESCRIPTOR_FILE).is_file())
            .collect();
        dirs.sort();
        dirs.iter().map(|d| self.open_dataset(d)).collect()
    }

    pub fn close_dataset(&self, name: &str) -> Result<()> {
        self.datasets
            .write()
            .unwrap()
            .remove(name)
            .ok_or_else(|| Error::NoSuchDataset(name.into()))?;
        self.trees.lock().unwrap().retain(|(d, _), _| d != name);
        self.sessions.write().unwrap().retain(|_, s| s.dataset.name() != name);
        Ok(())
    }

    pub fn datasets(&self) -> Vec<DatasetDescriptor> {
        self.datasets.read().unwrap().values().map(|d| d.descriptor.clone()).collect()
    }

    pub fn dataset(&self, name: &str) -> Result<Arc<Dataset>> {
        self.datasets
            .read()
            .unwrap()
            .get(name)
            .cloned()
            .ok_or_else(|| Error::NoSuchDataset(name.into()))
    }

    /// The named dataset, or the only one open when no name is given.
    pub fn resolve_dataset(&self, name: Option<&str>) -> Result<Arc<Dataset>> {
        match name {
            Some(n) => self.dataset(n),
            None => {
                let all = self.datasets.read().unwrap();
                match all.len() {
                    1 => Ok(Arc::clone(all.values().next().unwrap())),
                    0 => Err(Error::NoSuchDataset("(none open)".into())),
                    _ => Err(Error::InvalidParams("several datasets are open; name one".into())),
                }
            }
        }
    }

    /// New session on the named dataset, or on the only one open.
    pub fn create_session(&self, dataset: Option<&str>) -> Result<String> {
        let dataset = self.resolve_dataset(dataset)?;
        let id = uuid::Uuid::new_v4().to_string();
        let session = Arc::new(Session {
            id: id.clone(),
            dataset,
            generation: AtomicU64::new(0),
            state: Mutex::new(SessionState::default()),
        });
        self.sessions.write().unwrap().insert(id.clone(), session);
        Ok(id)
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NoSuchSession(id.into()))
    }

    /// HSNP bytes of timestep `t`; also makes `t` the session's active
    /// timestep.
    pub fn points(&self, session: &str, t: u32) -> Result<Vec<u8>> {
        let s = self.session(session)?;
        let snap = s.dataset.snapshot(t)?;
        s.state.lock().unwrap().timestep = t;
        Ok(snap.to_hsnp_bytes())
    }

    fn selection_params(&self, raw: Option<&serde_json::Value>) -> Result<SelectionParams> {
        let mut obj = match raw {
            Some(serde_json::Value::Object(m)) => m.clone(),
            None | Some(serde_json::Value::Null) => serde_json::Map::new(),
            Some(other) => return Err(Error::InvalidParams(format!("params must be an object, got {other}"))),
        };
        obj.entry("grid_n").or_insert(self.config.grid_n.into());
        serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| Error::InvalidParams(e.to_string()))
    }

    /// Runs a selection. A newer select or threshold request on the same
    /// session cancels this one, which then fails with `Superseded` and
    /// leaves the cache alone.
    pub fn select(&self, session: &str, req: &SelectRequest, members: bool) -> Result<SelectionSummary> {
        let s = self.session(session)?;
        let generation = s.begin();
        let params = self.selection_params(req.params.as_ref())?;
        let t = req.timestep.unwrap_or_else(|| s.active_timestep());
        let snap = s.dataset.snapshot(t)?;
        let cancelled = || !s.is_current(generation);
        let result = wysiwyg_select_cancellable(&snap, &req.camera, &req.lasso, &params, &cancelled);
        let mut state = s.state.lock().unwrap();
        if !s.is_current(generation) {
            return Err(Error::Superseded);
        }
        let result = match result {
            Ok(r) => r,
            Err(e) => {
                if e.kind() == crate::ErrorKind::EmptySelection {
                    state.selection = None;
                }
                return Err(e);
            }
        };
        let halos = primary_halos(&s.dataset, t, &result)?;
        let cached = Cached {
            timestep: t,
            camera: req.camera,
            result: Arc::new(result),
            halos,
        };
        state.timestep = t;
        let summary = summarize(&cached, &snap, members);
        state.selection = Some(cached);
        Ok(summary)
    }

    /// Re-thresholds the cached selection on its cached grid.
    pub fn update_threshold(&self, session: &str, rho0: f64, members: bool) -> Result<SelectionSummary> {
        let s = self.session(session)?;
        let generation = s.begin();
        let cached = s
            .state
            .lock()
            .unwrap()
            .selection
            .clone()
            .ok_or(Error::NoActiveSelection)?;
        let result = cached.result.rethreshold(rho0, &cached.camera)?;
        let halos = primary_halos(&s.dataset, cached.timestep, &result)?;
        let snap = s.dataset.snapshot(cached.timestep)?;
        let mut state = s.state.lock().unwrap();
        if !s.is_current(generation) {
            return Err(Error::Superseded);
        }
        let cached = Cached {
            result: Arc::new(result),
            halos,
            ..cached
        };
        let summary = summarize(&cached, &snap, members);
        state.selection = Some(cached);
        Ok(summary)
    }

    pub fn current_selection(&self, session: &str) -> Result<Arc<SelectionResult>> {
        let s = self.session(session)?;
        let state = s.state.lock().unwrap();
        state
            .selection
            .as_ref()
            .map(|c| Arc::clone(&c.result))
            .ok_or(Error::NoActiveSelection)
    }

    /// MDS disc layout of the master halos in the primary cluster.
    pub fn halo_layout(&self, session: &str) -> Result<Layout2D> {
        let s = self.session(session)?;
        let ids = {
            let state = s.state.lock().unwrap();
            state.selection.as_ref().ok_or(Error::NoActiveSelection)?.halos.clone()
        };
        let forest = &s.dataset.forest;
        let records: Vec<_> = ids.iter().map(|&id| forest.require(id).cloned()).collect::<Result<_>>()?;
        let [w, h] = self.config.scatter_size;
        layout_halos(&records, &self.config.disc_style, w, h)
    }

    pub fn select_halo(&self, session: &str, halo: HaloId) -> Result<()> {
        let s = self.session(session)?;
        s.dataset.forest.require(halo)?;
        s.state.lock().unwrap().selected_halo = Some(halo);
        Ok(())
    }

    /// Merger tree layout of `halo`, cached per (dataset, halo).
    pub fn halo_tree(&self, dataset: Option<&str>, halo: HaloId) -> Result<Arc<TreeLayout>> {
        let ds = self.resolve_dataset(dataset)?;
        let key = (ds.name().to_string(), halo);
        if let Some(t) = self.trees.lock().unwrap().get(&key) {
            return Ok(Arc::clone(t));
        }
        let subtree = extract_subtree(&ds.forest, halo)?;
        let layout = Arc::new(layout_merger_tree(&subtree, &self.config.disc_style, &self.config.tree_spacing));
        self.trees.lock().unwrap().insert(key, Arc::clone(&layout));
        Ok(layout)
    }

    pub fn cached_tree_count(&self) -> usize {
        self.trees.lock().unwrap().len()
    }

    /// Trace paths with each vertex colored by its normalized timestep.
    pub fn trace(&self, session: &str, subject: &TraceSubject) -> Result<Vec<ColoredTrace>> {
        let s = self.session(session)?;
        let ds = &s.dataset;
        let paths = match subject {
            TraceSubject::Halo(id) => vec![trace_halo(&ds.forest, *id)?],
            TraceSubject::Particles(ids) => {
                if ids.is_empty() {
                    return Err(Error::EmptyTrace);
                }
                let mut tracer = ParticleTracer::new(ids);
                for t in 0..ds.timestep_count() {
                    tracer.visit(&ds.load_snapshot(t)?);
                }
                tracer.finish()?
            }
        };
        let last = ds.timestep_count().saturating_sub(1).max(1) as f64;
        Ok(paths.into_iter().map(|p| color_trace(p, last)).collect())
    }
}

fn color_trace(path: TracePath, last: f64) -> ColoredTrace {
    ColoredTrace {
        subject: path.subject,
        segments: path
            .segments
            .into_iter()
            .map(|seg| {
                seg.into_iter()
                    .map(|v| ColoredVertex {
                        timestep: v.timestep,
                        position: v.position,
                        color: time_colormap(v.timestep as f64 / last),
                    })
                    .collect()
            })
            .collect(),
    }
}

fn primary_halos(ds: &Dataset, t: u32, result: &SelectionResult) -> Result<Vec<HaloId>> {
    match result.primary_cluster_id {
        Some(id) => halos_in_selection(&ds.forest, t, result, id),
        None => Ok(Vec::new()),
    }
}

fn summarize(c: &Cached, snap: &crate::ParticleSnapshot, members: bool) -> SelectionSummary {
    let r = &c.result;
    SelectionSummary {
        timestep: c.timestep,
        threshold: r.threshold(),
        cluster_count: r.clusters.len(),
        primary_cluster_id: r.primary_cluster_id,
        clusters: r
            .clusters
            .clusters
            .iter()
            .zip(&r.projected_pixel_counts)
            .map(|(cl, &px)| ClusterSummary {
                cluster_id: cl.cluster_id,
                particle_count: cl.members.len(),
                pixel_count: px,
                voxel_count: cl.voxels.len(),
                members: members.then(|| cl.members.iter().map(|&i| snap.particles[i].id).collect()),
            })
            .collect(),
        halos: c.halos.clone(),
    }
}

/// Parses `halo:ID` or `particles:ID,ID,...`.
pub fn parse_subject(raw: &str) -> Result<TraceSubject> {
    let bad = || Error::InvalidParams(format!("subject must be halo:ID or particles:ID,ID,... (got {raw:?})"));
    let (kind, rest) = raw.split_once(':').ok_or_else(bad)?;
    match kind {
        "halo" => rest.trim().parse().map(TraceSubject::Halo).map_err(|_| bad()),
        "particles" | "particle" => rest
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<u64>>>()
            .map(TraceSubject::Particles),
        _ => Err(bad()),
    }
}
