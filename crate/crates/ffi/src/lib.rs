//! C ABI over the `nlvoter` engine.
//!
//! Graphs and simulations are opaque heap handles released with their
//! `*_free` function. Every fallible call returns an [`NlvStatus`]; on
//! failure a message is available from [`nlv_last_error_message`] on the
//! same thread until the next failing call. Panics never cross the
//! boundary and are reported as `NLV_STATUS_PANIC`.
//!
//! Pointer arguments are checked for null; beyond that their validity is the
//! C caller's contract, as usual for an exported C function.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use nlvoter::dynamics::{init_random, select_prob, NeighborhoodCount, OpinionState, SyncStepper};
use nlvoter::experiments::{run_to_consensus, stream_rng, RunOptions, StreamTag};
use nlvoter::graph::{degree_stats, make_ba, make_er, make_lattice, make_nw, Graph, TopologySpec};
use nlvoter::observables::{is_consensus, opinion_clusters, order_parameter, rho_plus};
use nlvoter::{meanfield, Alpha, Error};
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GraphParams = 3,
    AlphaRange = 4,
    LengthMismatch = 5,
    InvalidState = 6,
    BufferTooSmall = 7,
    MeanField = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NlvDegreeStats {
    pub mean_degree: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub component_count: usize,
}

/// Immutable graph. Simulations share it, so it may be freed while they live.
pub struct NlvGraph {
    inner: Arc<Graph>,
}

/// One opinion configuration evolving on a graph with its own random stream.
pub struct NlvSim {
    graph: Arc<Graph>,
    alpha: Alpha,
    state: OpinionState,
    rng: ChaCha8Rng,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: NlvStatus, msg: impl Into<String>) -> NlvStatus {
    set_error(msg);
    status
}

fn status_of(err: &Error) -> NlvStatus {
    match err {
        Error::GraphParams(_) | Error::GraphInvariant(_) => NlvStatus::GraphParams,
        Error::AlphaRange(_) => NlvStatus::AlphaRange,
        Error::LengthMismatch { .. } => NlvStatus::LengthMismatch,
        Error::State(_) => NlvStatus::InvalidState,
        Error::MeanField(_) => NlvStatus::MeanField,
        Error::Config(_) | Error::Io { .. } => NlvStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), NlvStatus>) -> NlvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlvStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(NlvStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, NlvStatus>;
}

impl<T> OrStatus<T> for nlvoter::Result<T> {
    fn or_status(self) -> Result<T, NlvStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, NlvStatus> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| fail(NlvStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NlvStatus> {
    // SAFETY: as above, and the caller guarantees exclusive access.
    unsafe { p.as_mut() }.ok_or_else(|| fail(NlvStatus::NullPointer, format!("{what} is null")))
}

fn alpha_of(alpha: f64) -> Result<Alpha, NlvStatus> {
    Alpha::new(alpha).or_status()
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nlv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

fn emit_graph(g: Graph, out: *mut *mut NlvGraph) -> Result<(), NlvStatus> {
    let slot = non_null_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(NlvGraph { inner: Arc::new(g) }));
    Ok(())
}

fn graph_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, StreamTag::Graph(0), 0, 0)
}

/// Periodic `side × side` square lattice.
#[no_mangle]
pub extern "C" fn nlv_graph_lattice(side: usize, out: *mut *mut NlvGraph) -> NlvStatus {
    guard(|| emit_graph(make_lattice(side).or_status()?, out))
}

/// Giant component of G(n, k_avg / (n − 1)).
#[no_mangle]
pub extern "C" fn nlv_graph_er(n: usize, k_avg: f64, seed: u64, out: *mut *mut NlvGraph) -> NlvStatus {
    guard(|| emit_graph(make_er(n, k_avg, &mut graph_rng(seed)).or_status()?, out))
}

/// Ring of even degree `ring_degree` plus shortcuts added with probability
/// `shortcut_prob` per ring edge.
#[no_mangle]
pub extern "C" fn nlv_graph_nw(
    n: usize,
    ring_degree: usize,
    shortcut_prob: f64,
    seed: u64,
    out: *mut *mut NlvGraph,
) -> NlvStatus {
    guard(|| emit_graph(make_nw(n, ring_degree, shortcut_prob, &mut graph_rng(seed)).or_status()?, out))
}

/// Preferential attachment with `m` links per new node.
#[no_mangle]
pub extern "C" fn nlv_graph_ba(n: usize, m: usize, seed: u64, out: *mut *mut NlvGraph) -> NlvStatus {
    guard(|| emit_graph(make_ba(n, m, &mut graph_rng(seed)).or_status()?, out))
}

/// Builds from a topology string such as `"er:N=1000,k=4"`. With the same
/// seed this is the first graph a CLI sweep would sample.
#[no_mangle]
pub extern "C" fn nlv_graph_from_spec(spec: *const c_char, seed: u64, out: *mut *mut NlvGraph) -> NlvStatus {
    guard(|| {
        if spec.is_null() {
            return Err(fail(NlvStatus::NullPointer, "spec is null"));
        }
        // SAFETY: non-null and NUL terminated per the contract.
        let text = unsafe { CStr::from_ptr(spec) }
            .to_str()
            .map_err(|_| fail(NlvStatus::InvalidArgument, "spec is not UTF-8"))?;
        let topology: TopologySpec = text.parse().or_status()?;
        emit_graph(topology.build(&mut graph_rng(seed)).or_status()?, out)
    })
}

/// Node count, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn nlv_graph_node_count(graph: *const NlvGraph) -> usize {
    // SAFETY: null or a live handle.
    unsafe { graph.as_ref() }.map_or(0, |g| g.inner.node_count())
}

#[no_mangle]
pub extern "C" fn nlv_graph_degree_stats(graph: *const NlvGraph, out: *mut NlvDegreeStats) -> NlvStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        let slot = non_null_mut(out, "out")?;
        let s = degree_stats(&g.inner);
        *slot = NlvDegreeStats {
            mean_degree: s.mean_degree,
            min_degree: s.min_degree,
            max_degree: s.max_degree,
            component_count: s.component_count,
        };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn nlv_graph_free(graph: *mut NlvGraph) {
    if !graph.is_null() {
        // SAFETY: produced by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// Probability of adopting `+1` given the neighbourhood counts (agent
/// included). `alpha = +INFINITY` selects the majority rule.
#[no_mangle]
pub extern "C" fn nlv_select_prob(n_plus: u32, n_minus: u32, alpha: f64, out: *mut f64) -> NlvStatus {
    guard(|| {
        let counts = NeighborhoodCount::new(n_plus, n_minus).or_status()?;
        let alpha = alpha_of(alpha)?;
        *non_null_mut(out, "out")? = select_prob(counts, alpha);
        Ok(())
    })
}

/// New simulation with a uniformly random initial state. The dynamics
/// stream matches the CLI `run` subcommand for the same seed.
#[no_mangle]
pub extern "C" fn nlv_sim_new(graph: *const NlvGraph, alpha: f64, seed: u64, out: *mut *mut NlvSim) -> NlvStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        let alpha = alpha_of(alpha)?;
        let slot = non_null_mut(out, "out")?;
        let mut rng = stream_rng(seed, StreamTag::Dynamics(0), 0, 0);
        let state = init_random(g.inner.node_count(), &mut rng);
        *slot = Box::into_raw(Box::new(NlvSim { graph: Arc::clone(&g.inner), alpha, state, rng }));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn nlv_sim_node_count(sim: *const NlvSim) -> usize {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.map_or(0, |s| s.state.len())
}

/// Completed synchronous steps, or 0 for a null handle.
#[no_mangle]
pub extern "C" fn nlv_sim_time_step(sim: *const NlvSim) -> u64 {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.map_or(0, |s| s.state.time_step)
}

/// Advances by `steps` synchronous updates.
#[no_mangle]
pub extern "C" fn nlv_sim_step(sim: *mut NlvSim, steps: u64) -> NlvStatus {
    guard(|| {
        let s = non_null_mut(sim, "sim")?;
        let mut stepper = SyncStepper::new(&s.graph, s.alpha);
        for _ in 0..steps {
            stepper.step(&mut s.state, &mut s.rng).or_status()?;
        }
        Ok(())
    })
}

/// Copies the opinions (+1 / −1) into `buf`, which must hold at least
/// `nlv_sim_node_count` entries.
#[no_mangle]
pub extern "C" fn nlv_sim_opinions(sim: *const NlvSim, buf: *mut i8, len: usize) -> NlvStatus {
    guard(|| {
        let s = non_null(sim, "sim")?;
        let n = s.state.len();
        if buf.is_null() {
            return Err(fail(NlvStatus::NullPointer, "buf is null"));
        }
        if len < n {
            return Err(fail(NlvStatus::BufferTooSmall, format!("need {n} entries, got {len}")));
        }
        // SAFETY: buf is valid for len >= n writes.
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, n) };
        for (d, o) in dst.iter_mut().zip(&s.state.opinions) {
            *d = o.value();
        }
        Ok(())
    })
}

/// Replaces the state with `len` values of +1 / −1 and resets the clock.
/// The random stream carries on from where it was.
#[no_mangle]
pub extern "C" fn nlv_sim_set_opinions(sim: *mut NlvSim, values: *const i8, len: usize) -> NlvStatus {
    guard(|| {
        let s = non_null_mut(sim, "sim")?;
        if values.is_null() {
            return Err(fail(NlvStatus::NullPointer, "values is null"));
        }
        // SAFETY: values is valid for len reads.
        let src = unsafe { std::slice::from_raw_parts(values, len) };
        let state = OpinionState::from_values(src).or_status()?;
        if state.len() != s.graph.node_count() {
            return Err(fail(
                NlvStatus::LengthMismatch,
                format!("state has {len} agents, graph has {}", s.graph.node_count()),
            ));
        }
        s.state = state;
        Ok(())
    })
}

/// Order parameter |Σσ| / N; NaN for a null handle.
#[no_mangle]
pub extern "C" fn nlv_sim_eta(sim: *const NlvSim) -> f64 {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.map_or(f64::NAN, |s| order_parameter(&s.state))
}

/// Fraction of `+1` agents; NaN for a null handle.
#[no_mangle]
pub extern "C" fn nlv_sim_rho_plus(sim: *const NlvSim) -> f64 {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.map_or(f64::NAN, |s| rho_plus(&s.state))
}

#[no_mangle]
pub extern "C" fn nlv_sim_is_consensus(sim: *const NlvSim) -> bool {
    // SAFETY: null or a live handle.
    unsafe { sim.as_ref() }.is_some_and(|s| is_consensus(&s.state))
}

/// Number of same-opinion clusters and the largest one's share of the nodes.
#[no_mangle]
pub extern "C" fn nlv_sim_clusters(sim: *const NlvSim, count: *mut usize, largest_fraction: *mut f64) -> NlvStatus {
    guard(|| {
        let s = non_null(sim, "sim")?;
        let census = opinion_clusters(&s.state, &s.graph).or_status()?;
        *non_null_mut(count, "count")? = census.cluster_count;
        *non_null_mut(largest_fraction, "largest_fraction")? = census.largest_fraction;
        Ok(())
    })
}

/// Steps until consensus or until `max_steps` more steps have run.
/// `reached` tells which; `time` receives the clock value at exit.
#[no_mangle]
pub extern "C" fn nlv_sim_run_to_consensus(
    sim: *mut NlvSim,
    max_steps: u64,
    time: *mut u64,
    reached: *mut bool,
) -> NlvStatus {
    guard(|| {
        let s = non_null_mut(sim, "sim")?;
        let time = non_null_mut(time, "time")?;
        let reached = non_null_mut(reached, "reached")?;
        let opts = RunOptions { max_steps: s.state.time_step.saturating_add(max_steps), record_every: None };
        let initial = std::mem::replace(&mut s.state, OpinionState::new(Vec::new()));
        let result = run_to_consensus(&s.graph, s.alpha, initial.clone(), &mut s.rng, opts);
        match result {
            Ok(r) => {
                *time = r.steps;
                *reached = r.consensus_time.is_some();
                s.state = r.final_state;
                Ok(())
            }
            Err(e) => {
                s.state = initial;
                Err(fail(status_of(&e), e.to_string()))
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn nlv_sim_free(sim: *mut NlvSim) {
    if !sim.is_null() {
        // SAFETY: produced by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// Mean-field rate dρ/dt at `rho`.
#[no_mangle]
pub extern "C" fn nlv_mf_rhs(rho: f64, alpha: f64, out: *mut f64) -> NlvStatus {
    guard(|| {
        *non_null_mut(out, "out")? = meanfield::mf_rhs(rho, alpha).or_status()?;
        Ok(())
    })
}

/// RK4 trajectory sampled at `i · dt`. `written` always receives the number
/// of samples; if `len` is smaller nothing is copied and
/// `NLV_STATUS_BUFFER_TOO_SMALL` is returned.
#[no_mangle]
pub extern "C" fn nlv_mf_integrate(
    rho0: f64,
    alpha: f64,
    dt: f64,
    t_max: f64,
    rho: *mut f64,
    len: usize,
    written: *mut usize,
) -> NlvStatus {
    guard(|| {
        let written = non_null_mut(written, "written")?;
        let traj = meanfield::mf_integrate(rho0, alpha, dt, t_max).or_status()?;
        let n = traj.rho_values.len();
        *written = n;
        if len < n {
            return Err(fail(NlvStatus::BufferTooSmall, format!("need {n} entries, got {len}")));
        }
        if rho.is_null() {
            return Err(fail(NlvStatus::NullPointer, "rho is null"));
        }
        // SAFETY: rho is valid for len >= n writes.
        unsafe { std::slice::from_raw_parts_mut(rho, n) }.copy_from_slice(&traj.rho_values);
        Ok(())
    })
}
