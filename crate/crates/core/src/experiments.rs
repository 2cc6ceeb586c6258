//! Seeded ensemble experiments: single runs to consensus, consensus-time
//! sweeps over α, averaged time series, the block-pattern experiment and
//! the cross-topology comparison.
//!
//! Every realization owns a private random stream derived from the master
//! seed (see [`stream_rng`]), so results do not depend on the worker count
//! or on scheduling. Reductions always walk realizations in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{init_block, init_random, Alpha, OpinionState, SyncStepper};
use crate::error::{Error, Result};
use crate::graph::{degree_stats, Graph, TopologySpec};
use crate::meanfield;
use crate::observables::{eta_from_plus, opinion_clusters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Run,
    Sweep,
    Series,
    Pattern,
    MeanField,
    Networks,
}

/// Fully resolved experiment description. Everything an experiment
/// produces is a pure function of this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Exactly one, except for `networks` which compares several.
    pub topologies: Vec<TopologySpec>,
    pub alphas: Vec<Alpha>,
    /// Dynamics runs per graph realization.
    pub runs: usize,
    /// Independent graph realizations for random topologies; lattices are
    /// deterministic and always use a single graph.
    pub graphs: usize,
    pub seed: u64,
    pub max_steps: u64,
    pub record_every: u64,
    /// Side of the centred `+1` square for `pattern`.
    pub block: usize,
    /// Times at which `pattern` keeps full-state snapshots.
    pub snapshots: Vec<u64>,
    pub rho0: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Starting configuration for `run`.
    pub initial: InitialState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Random,
    /// Centred `block × block` square of `+1` on a lattice.
    Block,
    /// Two vertical bands on a lattice, frozen in the majority limit.
    Stripes,
}

pub const DEFAULT_MAX_STEPS: u64 = 100_000;

impl ExperimentConfig {
    /// Defaults for everything except kind, topology, α grid and seed.
    pub fn new(kind: ExperimentKind, topologies: Vec<TopologySpec>, alphas: Vec<Alpha>, seed: u64) -> Self {
        let pattern = kind == ExperimentKind::Pattern;
        ExperimentConfig {
            kind,
            topologies,
            alphas,
            runs: 100,
            graphs: 1,
            seed,
            max_steps: if pattern { 700 } else { DEFAULT_MAX_STEPS },
            record_every: 1,
            block: 30,
            snapshots: if pattern { vec![0, 200, 500, 700] } else { Vec::new() },
            rho0: 0.6,
            dt: meanfield::DEFAULT_DT,
            t_max: meanfield::DEFAULT_T_MAX,
            initial: InitialState::Random,
        }
    }

    /// Total realizations per α: `graphs × runs` on random topologies, `runs` on lattices.
    pub fn realizations(&self, topology: &TopologySpec) -> usize {
        if topology.is_random() {
            self.graphs * self.runs
        } else {
            self.runs
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.kind != ExperimentKind::MeanField && self.topologies.is_empty() {
            return bad("a topology is required".into());
        }
        if !matches!(self.kind, ExperimentKind::Networks | ExperimentKind::MeanField) && self.topologies.len() != 1 {
            return bad(format!("{:?} takes exactly one topology", self.kind));
        }
        if self.alphas.is_empty() {
            return bad("alpha grid is empty".into());
        }
        if self.runs == 0 || self.graphs == 0 {
            return bad("runs and graphs must be at least 1".into());
        }
        if self.runs > u32::MAX as usize
            || self.graphs * self.runs > u32::MAX as usize
            || self.alphas.len() > u32::MAX as usize
        {
            return bad("realization or grid index exceeds the 32-bit stream space".into());
        }
        if self.max_steps == 0 || self.record_every == 0 {
            return bad("max_steps and record_every must be at least 1".into());
        }
        match self.kind {
            ExperimentKind::Pattern => {
                let Some(TopologySpec::Lattice { side }) = self.topologies.first().copied() else {
                    return bad("pattern requires a lattice topology".into());
                };
                if self.block > side {
                    return bad(format!("block {} larger than lattice side {side}", self.block));
                }
                if let Some(&t) = self.snapshots.iter().find(|&&t| t > self.max_steps) {
                    return bad(format!("snapshot time {t} beyond max_steps {}", self.max_steps));
                }
            }
            ExperimentKind::Run if self.initial != InitialState::Random => {
                let Some(TopologySpec::Lattice { side }) = self.topologies.first().copied() else {
                    return bad(format!("{:?} start requires a lattice topology", self.initial));
                };
                if self.initial == InitialState::Block && self.block > side {
                    return bad(format!("block {} larger than lattice side {side}", self.block));
                }
                if self.initial == InitialState::Stripes && side < 4 {
                    return bad("stripes need a lattice side of at least 4".into());
                }
            }
            ExperimentKind::MeanField => {
                if self.alphas.contains(&Alpha::Infinity) {
                    return bad("mean-field integration needs finite alpha".into());
                }
                if !(0.0..=1.0).contains(&self.rho0) {
                    return bad(format!("rho0 {} outside [0, 1]", self.rho0));
                }
                if !(self.dt > 0.0 && self.dt.is_finite()) {
                    return bad(format!("dt must be positive, got {}", self.dt));
                }
                if !(self.t_max >= self.dt && self.t_max.is_finite()) {
                    return bad(format!("t_max {} must be at least dt {}", self.t_max, self.dt));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Which family a random stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    /// Graph sampling for the topology at this position in the config.
    Graph(u32),
    /// Opinion dynamics (initial state and updates) on that topology.
    Dynamics(u32),
    Pattern,
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Graph(t) => (1 << 32) | t as u64,
            StreamTag::Dynamics(t) => (2 << 32) | t as u64,
            StreamTag::Pattern => 3 << 32,
        }
    }
}

/// Random stream for one work unit.
///
/// The ChaCha8 key is `master_seed` (little-endian bytes 0..8) followed by
/// the tag code (bytes 8..16, zero padded); the 64-bit stream id is
/// `grid_index << 32 | realization`. The map from
/// `(master_seed, tag, grid_index, realization)` to `(key, stream)` is
/// injective, so distinct work units never share a stream.
pub fn stream_rng(master_seed: u64, tag: StreamTag, grid_index: u32, realization: u32) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.code().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(((grid_index as u64) << 32) | realization as u64);
    rng
}

/// Fixed-size worker pool. Output order always follows the index order.
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    /// `threads = 0` lets the pool pick the available parallelism.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Executor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: u64,
    pub eta: f64,
    pub rho_plus: f64,
    pub n_clusters: usize,
    pub s1: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub max_steps: u64,
    /// Record observables every this many steps (plus the final step).
    pub record_every: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// `None` when the run hit `max_steps` first.
    pub consensus_time: Option<u64>,
    pub steps: u64,
    pub final_eta: f64,
    pub final_state: OpinionState,
    pub series: Vec<SeriesPoint>,
}

impl RunResult {
    pub fn is_censored(&self) -> bool {
        self.consensus_time.is_none()
    }
}

fn observe(state: &OpinionState, plus: usize, g: &Graph) -> Result<SeriesPoint> {
    let n = state.len();
    let census = opinion_clusters(state, g)?;
    Ok(SeriesPoint {
        t: state.time_step,
        eta: eta_from_plus(plus, n),
        rho_plus: plus as f64 / n as f64,
        n_clusters: census.cluster_count,
        s1: census.largest_fraction,
    })
}

/// Steps `initial` until consensus or `max_steps`, whichever comes first.
pub fn run_to_consensus<R: Rng + ?Sized>(
    g: &Graph,
    alpha: Alpha,
    initial: OpinionState,
    rng: &mut R,
    opts: RunOptions,
) -> Result<RunResult> {
    let n = g.node_count();
    if initial.len() != n {
        return Err(Error::LengthMismatch { state: initial.len(), graph: n });
    }
    let mut state = initial;
    let mut plus = state.plus_count();
    let mut stepper = SyncStepper::new(g, alpha);
    let mut series = Vec::new();
    let cadence = opts.record_every.filter(|&c| c > 0);
    if cadence.is_some_and(|c| state.time_step.is_multiple_of(c)) {
        series.push(observe(&state, plus, g)?);
    }
    let consensus_time = loop {
        if plus == 0 || plus == n {
            break Some(state.time_step);
        }
        if state.time_step >= opts.max_steps {
            break None;
        }
        plus = stepper.step(&mut state, rng)?;
        if let Some(c) = cadence {
            if state.time_step.is_multiple_of(c) {
                series.push(observe(&state, plus, g)?);
            }
        }
    };
    if cadence.is_some() && series.last().map(|p| p.t) != Some(state.time_step) {
        series.push(observe(&state, plus, g)?);
    }
    Ok(RunResult {
        consensus_time,
        steps: state.time_step,
        final_eta: eta_from_plus(plus, n),
        final_state: state,
        series,
    })
}

/// Random initial state followed by [`run_to_consensus`], all from one stream.
pub fn run_realization<R: Rng + ?Sized>(g: &Graph, alpha: Alpha, rng: &mut R, opts: RunOptions) -> Result<RunResult> {
    let initial = init_random(g.node_count(), rng);
    run_to_consensus(g, alpha, initial, rng, opts)
}

/// Aggregated consensus times for one α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: Alpha,
    /// Mean over runs that reached consensus; `None` if all were censored.
    pub mean_tc: Option<f64>,
    /// Standard error of `mean_tc` (0 with fewer than two finished runs).
    pub se_tc: f64,
    pub censored_fraction: f64,
    pub runs: usize,
    /// Mean of `min(T_c, max_steps)` over all runs; equals `mean_tc` without censoring.
    pub restricted_mean_tc: f64,
    pub restricted_se_tc: f64,
}

impl SweepRow {
    pub fn from_times(alpha: Alpha, times: &[Option<u64>], max_steps: u64) -> SweepRow {
        let runs = times.len();
        let done: Vec<u128> = times.iter().flatten().map(|&t| t as u128).collect();
        let k = done.len() as u128;
        let sum: u128 = done.iter().sum();
        let sum_sq: u128 = done.iter().map(|t| t * t).sum();
        let censored = (runs - done.len()) as u128;
        let cap = max_steps as u128;
        let r_sum = sum + censored * cap;
        let r_sum_sq = sum_sq + censored * cap * cap;
        SweepRow {
            alpha,
            mean_tc: (k > 0).then(|| sum as f64 / k as f64),
            se_tc: standard_error(k, sum, sum_sq),
            censored_fraction: if runs == 0 { 0.0 } else { censored as f64 / runs as f64 },
            runs,
            restricted_mean_tc: if runs == 0 { 0.0 } else { r_sum as f64 / runs as f64 },
            restricted_se_tc: standard_error(runs as u128, r_sum, r_sum_sq),
        }
    }
}

/// Standard error of the mean from exact integer moments; 0 below two samples.
fn standard_error(k: u128, sum: u128, sum_sq: u128) -> f64 {
    if k < 2 {
        return 0.0;
    }
    // k Σt² − (Σt)² is exact in integers
    let var = (k * sum_sq - sum * sum) as f64 / (k * (k - 1)) as f64;
    (var / k as f64).sqrt()
}

/// Graph realizations for one topology. Lattices yield a single graph.
pub fn build_graphs(cfg: &ExperimentConfig, topology_index: usize, exec: &Executor) -> Result<Vec<Graph>> {
    let spec = cfg.topologies[topology_index];
    let count = if spec.is_random() { cfg.graphs } else { 1 };
    exec.map(count, |g| {
        let mut rng = stream_rng(cfg.seed, StreamTag::Graph(topology_index as u32), 0, g as u32);
        spec.build(&mut rng)
    })
    .into_iter()
    .collect()
}

fn graph_for<'a>(graphs: &'a [Graph], cfg: &ExperimentConfig, realization: usize) -> &'a Graph {
    if graphs.len() == 1 {
        &graphs[0]
    } else {
        &graphs[realization / cfg.runs]
    }
}

/// Consensus-time statistics for `cfg.alphas[alpha_index]` on the given graphs.
pub fn ensemble_consensus_time(
    cfg: &ExperimentConfig,
    topology_index: usize,
    graphs: &[Graph],
    alpha_index: usize,
    exec: &Executor,
) -> Result<SweepRow> {
    let alpha = cfg.alphas[alpha_index];
    let count = cfg.realizations(&cfg.topologies[topology_index]);
    let opts = RunOptions { max_steps: cfg.max_steps, record_every: None };
    let times = exec
        .map(count, |r| {
            let mut rng =
                stream_rng(cfg.seed, StreamTag::Dynamics(topology_index as u32), alpha_index as u32, r as u32);
            run_realization(graph_for(graphs, cfg, r), alpha, &mut rng, opts).map(|res| res.consensus_time)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepRow::from_times(alpha, &times, cfg.max_steps))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub topology: TopologySpec,
    pub rows: Vec<SweepRow>,
    /// Row index of the α with the smallest restricted mean consensus time.
    pub argmin: Option<usize>,
    /// ⟨k⟩ averaged over the graph realizations.
    pub mean_degree: f64,
    pub mean_nodes: f64,
}

impl SweepTable {
    pub fn alpha_opt(&self) -> Option<Alpha> {
        self.argmin.map(|i| self.rows[i].alpha)
    }
}

/// Index of the smallest restricted mean. Censored runs count as lasting
/// `max_steps`, so heavily censored α values cannot win on a handful of
/// lucky finishers. First minimum wins on ties.
pub fn argmin_row(rows: &[SweepRow]) -> Option<usize> {
    rows.iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, row)| match best {
            Some((_, v)) if v <= row.restricted_mean_tc => best,
            _ => Some((i, row.restricted_mean_tc)),
        })
        .map(|(i, _)| i)
}

fn sweep_on(cfg: &ExperimentConfig, topology_index: usize, exec: &Executor) -> Result<SweepTable> {
    let graphs = build_graphs(cfg, topology_index, exec)?;
    let rows = (0..cfg.alphas.len())
        .map(|a| ensemble_consensus_time(cfg, topology_index, &graphs, a, exec))
        .collect::<Result<Vec<_>>>()?;
    let mean_degree = graphs.iter().map(|g| degree_stats(g).mean_degree).sum::<f64>() / graphs.len() as f64;
    let mean_nodes = graphs.iter().map(|g| g.node_count() as f64).sum::<f64>() / graphs.len() as f64;
    Ok(SweepTable {
        topology: cfg.topologies[topology_index],
        argmin: argmin_row(&rows),
        rows,
        mean_degree,
        mean_nodes,
    })
}

/// One [`SweepRow`] per α of the (single) configured topology.
pub fn sweep_alpha(cfg: &ExperimentConfig, exec: &Executor) -> Result<SweepTable> {
    cfg.validate()?;
    sweep_on(cfg, 0, exec)
}

/// [`sweep_alpha`] for every configured topology.
pub fn network_comparison(cfg: &ExperimentConfig, exec: &Executor) -> Result<Vec<SweepTable>> {
    cfg.validate()?;
    (0..cfg.topologies.len()).map(|t| sweep_on(cfg, t, exec)).collect()
}

/// Pointwise ensemble means on the grid `0, c, 2c, …` (plus the last
/// finishing time). Runs that already reached consensus contribute their
/// absorbed values: η = 1, N_cl = 1, S₁ = 1, ρ₊ frozen at 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragedSeries {
    pub alpha: Alpha,
    pub times: Vec<u64>,
    pub eta: Vec<f64>,
    pub rho_plus: Vec<f64>,
    pub n_clusters: Vec<f64>,
    pub s1: Vec<f64>,
    pub consensus: SweepRow,
}

impl AveragedSeries {
    pub fn at(&self, t: u64) -> Option<usize> {
        self.times.binary_search(&t).ok()
    }
}

pub fn time_series_ensemble(cfg: &ExperimentConfig, alpha_index: usize, exec: &Executor) -> Result<AveragedSeries> {
    cfg.validate()?;
    let graphs = build_graphs(cfg, 0, exec)?;
    time_series_on(cfg, &graphs, alpha_index, exec)
}

pub fn time_series_on(
    cfg: &ExperimentConfig,
    graphs: &[Graph],
    alpha_index: usize,
    exec: &Executor,
) -> Result<AveragedSeries> {
    let alpha = cfg.alphas[alpha_index];
    let count = cfg.realizations(&cfg.topologies[0]);
    let cadence = cfg.record_every;
    let opts = RunOptions { max_steps: cfg.max_steps, record_every: Some(cadence) };
    let results = exec
        .map(count, |r| {
            let mut rng = stream_rng(cfg.seed, StreamTag::Dynamics(0), alpha_index as u32, r as u32);
            run_realization(graph_for(graphs, cfg, r), alpha, &mut rng, opts)
                .map(|res| (res.consensus_time, res.series))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let t_end = results.iter().map(|(_, s)| s.last().map_or(0, |p| p.t)).max().unwrap_or(0);
    let mut times: Vec<u64> = (0..=t_end / cadence).map(|k| k * cadence).collect();
    if *times.last().unwrap() != t_end {
        times.push(t_end);
    }
    let len = times.len();
    let mut acc = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (_, series) in &results {
        let last = series.last().expect("recorded runs hold the initial point");
        for (k, &t) in times.iter().enumerate() {
            // records sit at multiples of the cadence, then the final step
            let p = if t <= last.t {
                if t == last.t {
                    *last
                } else {
                    series[(t / cadence) as usize]
                }
            } else {
                SeriesPoint { t, eta: 1.0, rho_plus: last.rho_plus, n_clusters: 1, s1: 1.0 }
            };
            acc[0][k] += p.eta;
            acc[1][k] += p.rho_plus;
            acc[2][k] += p.n_clusters as f64;
            acc[3][k] += p.s1;
        }
    }
    let scale = 1.0 / count as f64;
    let [eta, rho_plus, n_clusters, s1] = acc.map(|v| v.into_iter().map(|x| x * scale).collect::<Vec<_>>());
    let tcs: Vec<Option<u64>> = results.iter().map(|(t, _)| *t).collect();
    Ok(AveragedSeries {
        alpha,
        times,
        eta,
        rho_plus,
        n_clusters,
        s1,
        consensus: SweepRow::from_times(alpha, &tcs, cfg.max_steps),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternResult {
    pub alpha: Alpha,
    pub side: usize,
    /// Index `t` holds the ensemble mean of ρ₊ after `t` steps.
    pub rho_mean: Vec<f64>,
    pub rho_se: Vec<f64>,
    /// Full states of realization 0 at the requested times.
    pub snapshots: Vec<OpinionState>,
}

/// Centred-block start on a lattice; tracks ρ₊ every step up to `max_steps`.
pub fn pattern_experiment(cfg: &ExperimentConfig, alpha_index: usize, exec: &Executor) -> Result<PatternResult> {
    cfg.validate()?;
    let side = match cfg.topologies.first() {
        Some(TopologySpec::Lattice { side }) => *side,
        _ => return Err(Error::Config("pattern requires a lattice topology".into())),
    };
    let g = crate::graph::make_lattice(side)?;
    let initial = init_block(side, cfg.block)?;
    let alpha = cfg.alphas[alpha_index];
    let horizon = cfg.max_steps;
    let n = g.node_count() as f64;
    let per_run = exec
        .map(cfg.runs, |r| -> Result<(Vec<u32>, Vec<OpinionState>)> {
            let mut rng = stream_rng(cfg.seed, StreamTag::Pattern, alpha_index as u32, r as u32);
            let mut stepper = SyncStepper::new(&g, alpha);
            let mut state = initial.clone();
            let mut plus = Vec::with_capacity(horizon as usize + 1);
            plus.push(state.plus_count() as u32);
            let mut snaps = Vec::new();
            let keep = |s: &OpinionState, snaps: &mut Vec<OpinionState>| {
                if r == 0 && cfg.snapshots.contains(&s.time_step) {
                    snaps.push(s.clone());
                }
            };
            keep(&state, &mut snaps);
            while state.time_step < horizon {
                plus.push(stepper.step(&mut state, &mut rng)? as u32);
                keep(&state, &mut snaps);
            }
            Ok((plus, snaps))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let runs = per_run.len() as u128;
    let len = horizon as usize + 1;
    let mut rho_mean = vec![0.0; len];
    let mut rho_se = vec![0.0; len];
    for t in 0..len {
        // exact integer moments of the +1 counts
        let sum: u128 = per_run.iter().map(|(p, _)| p[t] as u128).sum();
        let sum_sq: u128 = per_run.iter().map(|(p, _)| (p[t] as u128).pow(2)).sum();
        rho_mean[t] = sum as f64 / (runs as f64 * n);
        rho_se[t] = standard_error(runs, sum, sum_sq) / n;
    }
    let snapshots = per_run.into_iter().next().map(|(_, s)| s).unwrap_or_default();
    Ok(PatternResult { alpha, side, rho_mean, rho_se, snapshots })
}

/// ρ₊ trajectories of the rate equation, one per α.
pub fn meanfield_experiment(cfg: &ExperimentConfig) -> Result<Vec<meanfield::MfTrajectory>> {
    cfg.validate()?;
    cfg.alphas.iter().map(|a| meanfield::mf_integrate(cfg.rho0, a.as_f64(), cfg.dt, cfg.t_max)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{init_stripes, Opinion};
    use crate::graph::make_lattice;
    use crate::observables::is_consensus;
    use std::collections::HashSet;

    fn lattice_cfg(kind: ExperimentKind, side: usize, alphas: &[f64], runs: usize, max_steps: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            kind,
            vec![TopologySpec::Lattice { side }],
            alphas.iter().map(|&a| Alpha::new(a).unwrap()).collect(),
            42,
        );
        cfg.runs = runs;
        cfg.max_steps = max_steps;
        cfg
    }

    #[test]
    fn consensus_start_is_time_zero() {
        let g = make_lattice(5).unwrap();
        let mut rng = stream_rng(1, StreamTag::Dynamics(0), 0, 0);
        let opts = RunOptions { max_steps: 10, record_every: Some(1) };
        let res =
            run_to_consensus(&g, Alpha::Finite(2.0), OpinionState::uniform(25, Opinion::Plus), &mut rng, opts).unwrap();
        assert_eq!(res.consensus_time, Some(0));
        assert_eq!(res.series.len(), 1);
        assert_eq!((res.series[0].eta, res.series[0].n_clusters, res.series[0].s1), (1.0, 1, 1.0));
    }

    #[test]
    fn stripes_censored_and_unchanged() {
        let g = make_lattice(20).unwrap();
        let start = init_stripes(20).unwrap();
        let mut rng = stream_rng(1, StreamTag::Dynamics(0), 0, 0);
        let opts = RunOptions { max_steps: 1000, record_every: None };
        let res = run_to_consensus(&g, Alpha::Infinity, start.clone(), &mut rng, opts).unwrap();
        assert!(res.is_censored());
        assert_eq!(res.steps, 1000);
        assert_eq!(res.final_state.opinions, start.opinions);
        assert_eq!(res.final_eta, 0.0);
    }

    #[test]
    fn recorded_run_ends_in_consensus() {
        let g = make_lattice(10).unwrap();
        let mut rng = stream_rng(5, StreamTag::Dynamics(0), 0, 0);
        let opts = RunOptions { max_steps: 100_000, record_every: Some(7) };
        let res = run_realization(&g, Alpha::Finite(1.1), &mut rng, opts).unwrap();
        let t = res.consensus_time.expect("10x10 lattice at alpha 1.1 reaches consensus");
        let last = res.series.last().unwrap();
        assert_eq!((last.t, last.eta, last.n_clusters), (t, 1.0, 1));
        assert!(is_consensus(&res.final_state));
        assert!(res.series[..res.series.len() - 1].iter().all(|p| p.t % 7 == 0));
    }

    #[test]
    fn censoring_sound() {
        let g = make_lattice(10).unwrap();
        for r in 0..20 {
            let mut rng = stream_rng(3, StreamTag::Dynamics(0), 0, r);
            let opts = RunOptions { max_steps: 50, record_every: None };
            let res = run_realization(&g, Alpha::Finite(0.9), &mut rng, opts).unwrap();
            match res.consensus_time {
                Some(t) => assert!(t <= 50),
                None => {
                    assert_eq!(res.steps, 50);
                    assert!(res.final_eta < 1.0);
                }
            }
        }
    }

    #[test]
    fn sweep_row_statistics() {
        let row = SweepRow::from_times(Alpha::Finite(1.0), &[Some(10), Some(20), None, Some(30)], 100);
        assert_eq!(row.mean_tc, Some(20.0));
        assert!((row.se_tc - (100.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(row.censored_fraction, 0.25);
        assert_eq!(row.restricted_mean_tc, 40.0);
        // {10, 20, 100, 30}: sample variance 5000 / 3
        assert!((row.restricted_se_tc - (5000.0f64 / 12.0).sqrt()).abs() < 1e-12);
        let all = SweepRow::from_times(Alpha::Finite(0.0), &[None, None], 5);
        assert_eq!((all.mean_tc, all.censored_fraction, all.se_tc), (None, 1.0, 0.0));
    }

    #[test]
    fn argmin_prefers_uncensored() {
        let rows = vec![
            SweepRow::from_times(Alpha::Finite(0.9), &[Some(1), None, None], 1000),
            SweepRow::from_times(Alpha::Finite(1.1), &[Some(300), Some(400), Some(350)], 1000),
            SweepRow::from_times(Alpha::Finite(2.0), &[Some(600), Some(700), Some(650)], 1000),
        ];
        assert_eq!(argmin_row(&rows), Some(1));
        assert_eq!(argmin_row(&rows[2..]), Some(0));
        assert_eq!(argmin_row(&[]), None);
    }

    #[test]
    fn streams_are_distinct() {
        let mut seen = HashSet::new();
        for tag in [StreamTag::Graph(0), StreamTag::Dynamics(0), StreamTag::Dynamics(1), StreamTag::Pattern] {
            for a in 0..4 {
                for r in 0..8 {
                    let mut rng = stream_rng(7, tag, a, r);
                    let first: [u64; 2] = [rng.random(), rng.random()];
                    assert!(seen.insert(first), "collision at {tag:?} {a} {r}");
                }
            }
        }
        let mut a = stream_rng(7, StreamTag::Pattern, 1, 2);
        let mut b = stream_rng(7, StreamTag::Pattern, 1, 2);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn alpha_zero_mostly_censored() {
        let cfg = lattice_cfg(ExperimentKind::Sweep, 4, &[0.0], 50, 200);
        let table = sweep_alpha(&cfg, &Executor::new(1).unwrap()).unwrap();
        // each step hits consensus with probability 2^(1-16)
        assert!(table.rows[0].censored_fraction > 0.9);
    }

    #[test]
    fn sweep_deterministic_across_threads() {
        let cfg = lattice_cfg(ExperimentKind::Sweep, 6, &[1.0, 2.0, f64::INFINITY], 12, 2000);
        let a = sweep_alpha(&cfg, &Executor::new(1).unwrap()).unwrap();
        let b = sweep_alpha(&cfg, &Executor::new(3).unwrap()).unwrap();
        let c = sweep_alpha(&cfg, &Executor::new(1).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.rows.len(), 3);
        assert_eq!(a.mean_degree, 4.0);
    }

    #[test]
    fn single_point_grid_is_argmin() {
        let cfg = lattice_cfg(ExperimentKind::Sweep, 5, &[1.5], 5, 10_000);
        let table = sweep_alpha(&cfg, &Executor::new(1).unwrap()).unwrap();
        assert_eq!(table.alpha_opt(), Some(Alpha::Finite(1.5)));
    }

    #[test]
    fn series_padding_and_start() {
        let mut cfg = lattice_cfg(ExperimentKind::Series, 8, &[1.5], 16, 50_000);
        cfg.record_every = 3;
        let s = time_series_ensemble(&cfg, 0, &Executor::new(2).unwrap()).unwrap();
        assert_eq!(s.consensus.censored_fraction, 0.0);
        assert_eq!(s.times[0], 0);
        assert!(s.times.windows(2).all(|w| w[0] < w[1]));
        assert!(s.times[..s.times.len() - 1].iter().all(|t| t % 3 == 0));
        let k = s.times.len() - 1;
        assert_eq!((s.eta[k], s.n_clusters[k], s.s1[k]), (1.0, 1.0, 1.0));
        assert!(s.eta.iter().all(|&e| (0.0..=1.0).contains(&e)));
        assert!(s.eta[0] < 1.0);
    }

    #[test]
    fn pattern_initial_block() {
        let mut cfg = lattice_cfg(ExperimentKind::Pattern, 50, &[1.1], 3, 5);
        cfg.snapshots = vec![0, 5];
        let res = pattern_experiment(&cfg, 0, &Executor::new(1).unwrap()).unwrap();
        assert_eq!(res.rho_mean[0], 0.36);
        assert_eq!(res.rho_se[0], 0.0);
        assert_eq!(res.rho_mean.len(), 6);
        assert_eq!(res.snapshots.len(), 2);
        assert_eq!(res.snapshots[0], init_block(50, 30).unwrap());
        assert_eq!(res.snapshots[1].time_step, 5);
    }

    #[test]
    fn pattern_rejects_network() {
        let mut cfg = lattice_cfg(ExperimentKind::Pattern, 50, &[1.1], 3, 5);
        cfg.topologies = vec![TopologySpec::Ba { n: 1000, m: 2 }];
        assert!(pattern_experiment(&cfg, 0, &Executor::new(1).unwrap()).is_err());
    }

    #[test]
    fn random_topology_uses_graph_realizations() {
        let mut cfg = ExperimentConfig::new(
            ExperimentKind::Networks,
            vec![TopologySpec::Ba { n: 200, m: 2 }, TopologySpec::Er { n: 200, k_avg: 4.0 }],
            vec![Alpha::Finite(1.5)],
            9,
        );
        cfg.graphs = 3;
        cfg.runs = 2;
        let exec = Executor::new(2).unwrap();
        let graphs = build_graphs(&cfg, 0, &exec).unwrap();
        assert_eq!(graphs.len(), 3);
        assert_ne!(graphs[0], graphs[1]);
        let tables = network_comparison(&cfg, &exec).unwrap();
        assert_eq!(tables.len(), 2);
        assert_eq!(tables[0].rows[0].runs, 6);
        assert!(tables[1].mean_nodes <= 200.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = lattice_cfg(ExperimentKind::Sweep, 10, &[1.0], 1, 10);
        assert!(cfg.validate().is_ok());
        cfg.alphas.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = lattice_cfg(ExperimentKind::Sweep, 10, &[1.0], 0, 10);
        assert!(cfg.validate().is_err());
        cfg.runs = 1;
        cfg.topologies.push(TopologySpec::Lattice { side: 5 });
        assert!(cfg.validate().is_err());
    }
}
