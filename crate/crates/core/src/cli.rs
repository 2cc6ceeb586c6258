//! Command-line front end: flag parsing, config resolution and the output
//! files each subcommand writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dynamics::{init_block, init_random, init_stripes, Alpha};
use crate::error::{Error, Result};
use crate::experiments::{
    self, build_graphs, stream_rng, Executor, ExperimentConfig, ExperimentKind, InitialState, RunOptions, StreamTag,
};
use crate::graph::{degree_stats, TopologySpec};
use crate::io::config::{self, parse_alpha_grid, parse_u64_list, PartialConfig};
use crate::io::{csv, pbm};
use crate::meanfield::{self, Stability};

#[derive(Debug, Parser)]
#[command(name = "nlvoter", version, about = "Nonlinear voter model simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single realization with recorded observables.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Starting configuration: random, block or stripes.
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        block: Option<usize>,
    },
    /// Consensus time as a function of alpha.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Ensemble-averaged eta, rho+, cluster count and largest cluster over time.
    Series {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Centred block start on a lattice: rho+ tracking and PBM snapshots.
    Pattern {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        block: Option<usize>,
        /// Comma separated snapshot times.
        #[arg(long)]
        snapshots: Option<String>,
    },
    /// Integrate the mean-field rate equation and classify its fixed points.
    Meanfield {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        rho0: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-max")]
        t_max: Option<f64>,
    },
    /// Alpha sweeps on several topologies with per-topology optimum.
    Networks {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Degree statistics of a generated graph.
    Graphinfo {
        #[arg(long)]
        topology: TopologySpec,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset (series, sweep, stripes, block, networks, meanfield); flags override its fields.
    #[arg(long)]
    pub preset: Option<String>,
    /// Topology such as lattice:L=50 or ba:N=3000,m=2 (repeat for networks).
    #[arg(long)]
    pub topology: Vec<TopologySpec>,
    /// Alpha grid: start:end:step or a comma list (inf allowed).
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Graph realizations for random topologies.
    #[arg(long)]
    pub graphs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "max-steps")]
    pub max_steps: Option<u64>,
    #[arg(long = "record-every")]
    pub record_every: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

/// A validated command ready to execute.
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Experiment { config: ExperimentConfig, out: PathBuf, threads: usize },
    GraphInfo { topology: TopologySpec, seed: u64 },
}

fn layered(common: &CommonArgs, extra: PartialConfig) -> Result<PartialConfig> {
    let mut base = PartialConfig::default();
    if let Some(name) = &common.preset {
        base = base.overlay(config::preset(name)?);
    }
    if let Some(path) = &common.config {
        base = base.overlay(PartialConfig::from_file(path)?);
    }
    let flags = PartialConfig {
        topologies: (!common.topology.is_empty()).then(|| common.topology.clone()),
        alphas: common.alpha.as_deref().map(parse_alpha_grid).transpose()?,
        runs: common.runs,
        graphs: common.graphs,
        seed: common.seed,
        max_steps: common.max_steps,
        record_every: common.record_every,
        ..Default::default()
    };
    Ok(base.overlay(flags).overlay(extra))
}

/// Resolves parsed flags into a validated invocation.
pub fn resolve(cli: Cli) -> Result<Invocation> {
    let (kind, common, extra) = match cli.command {
        Command::Graphinfo { topology, seed } => return Ok(Invocation::GraphInfo { topology, seed }),
        Command::Run { common, init, block } => {
            let initial = init
                .map(|s| match s.as_str() {
                    "random" => Ok(InitialState::Random),
                    "block" => Ok(InitialState::Block),
                    "stripes" => Ok(InitialState::Stripes),
                    other => Err(Error::Config(format!("unknown --init `{other}` (random, block, stripes)"))),
                })
                .transpose()?;
            (ExperimentKind::Run, common, PartialConfig { initial, block, ..Default::default() })
        }
        Command::Sweep { common } => (ExperimentKind::Sweep, common, PartialConfig::default()),
        Command::Series { common } => (ExperimentKind::Series, common, PartialConfig::default()),
        Command::Networks { common } => (ExperimentKind::Networks, common, PartialConfig::default()),
        Command::Pattern { common, block, snapshots } => {
            let snapshots = snapshots.as_deref().map(parse_u64_list).transpose()?;
            (ExperimentKind::Pattern, common, PartialConfig { block, snapshots, ..Default::default() })
        }
        Command::Meanfield { common, rho0, dt, t_max } => {
            (ExperimentKind::MeanField, common, PartialConfig { rho0, dt, t_max, ..Default::default() })
        }
    };
    let config = layered(&common, extra)?.resolve(kind)?;
    Ok(Invocation::Experiment { config, out: common.out, threads: common.threads })
}

/// Parses an argument vector (program name first) into an invocation.
pub fn parse_config<I, T>(args: I) -> Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    resolve(cli)
}

fn alpha_tag(a: Alpha) -> String {
    format!("alpha_{a}")
}

/// Runs an invocation, writing results under its output directory.
/// Human-readable summaries go to `report`.
pub fn execute(inv: &Invocation, report: &mut dyn Write) -> Result<()> {
    let io_err = |source| Error::Io { path: PathBuf::from("<report>"), source };
    match inv {
        Invocation::GraphInfo { topology, seed } => {
            // same stream as the first graph of a sweep with this seed
            let mut rng = stream_rng(*seed, StreamTag::Graph(0), 0, 0);
            let g = topology.build(&mut rng)?;
            g.validate()?;
            let s = degree_stats(&g);
            writeln!(
                report,
                "topology={topology} nodes={} edges={} mean_degree={} min_degree={} max_degree={} components={}",
                g.node_count(),
                g.edge_count(),
                csv::format_real(s.mean_degree),
                s.min_degree,
                s.max_degree,
                s.component_count
            )
            .map_err(io_err)?;
            Ok(())
        }
        Invocation::Experiment { config: cfg, out, threads } => {
            let exec = Executor::new(*threads)?;
            run_experiment(cfg, out, &exec, report)
        }
    }
}

fn run_experiment(cfg: &ExperimentConfig, out: &Path, exec: &Executor, report: &mut dyn Write) -> Result<()> {
    let io_err = |source| Error::Io { path: PathBuf::from("<report>"), source };
    match cfg.kind {
        ExperimentKind::Run => {
            let graphs = build_graphs(cfg, 0, exec)?;
            let g = &graphs[0];
            let alpha = cfg.alphas[0];
            let mut rng = stream_rng(cfg.seed, StreamTag::Dynamics(0), 0, 0);
            let initial = match cfg.initial {
                InitialState::Random => init_random(g.node_count(), &mut rng),
                InitialState::Block => init_block(g.lattice_side().unwrap_or(0), cfg.block)?,
                InitialState::Stripes => init_stripes(g.lattice_side().unwrap_or(0))?,
            };
            let opts = RunOptions { max_steps: cfg.max_steps, record_every: Some(cfg.record_every) };
            let res = experiments::run_to_consensus(g, alpha, initial, &mut rng, opts)?;
            csv::write_csv(&out.join("run.csv"), &csv::render_run(&res.series))?;
            if let Some(side) = g.lattice_side() {
                pbm::write_pbm(&out.join("final.pbm"), &res.final_state, side)?;
            }
            match res.consensus_time {
                Some(t) => writeln!(report, "alpha={alpha} consensus_time={t}"),
                None => writeln!(
                    report,
                    "alpha={alpha} censored at {} steps, eta={}",
                    res.steps,
                    csv::format_real(res.final_eta)
                ),
            }
            .map_err(io_err)?;
        }
        ExperimentKind::Sweep => {
            let table = experiments::sweep_alpha(cfg, exec)?;
            csv::write_csv(&out.join("sweep.csv"), &csv::render_sweep(&table.rows))?;
            let opt = table.alpha_opt().map_or_else(|| "NA".into(), |a| a.to_string());
            writeln!(report, "topology={} alpha_opt={opt}", table.topology).map_err(io_err)?;
        }
        ExperimentKind::Series => {
            let graphs = build_graphs(cfg, 0, exec)?;
            for (i, a) in cfg.alphas.iter().enumerate() {
                let s = experiments::time_series_on(cfg, &graphs, i, exec)?;
                csv::write_csv(&out.join(format!("series_{}.csv", alpha_tag(*a))), &csv::render_series(&s))?;
            }
        }
        ExperimentKind::Pattern => {
            for (i, a) in cfg.alphas.iter().enumerate() {
                let p = experiments::pattern_experiment(cfg, i, exec)?;
                let tag = alpha_tag(*a);
                csv::write_csv(&out.join(format!("pattern_{tag}.csv")), &csv::render_pattern(&p))?;
                for snap in &p.snapshots {
                    pbm::write_pbm(&out.join(format!("pattern_{tag}_t{}.pbm", snap.time_step)), snap, p.side)?;
                }
            }
        }
        ExperimentKind::MeanField => {
            let mut stability = String::from("alpha,rho,stability\n");
            for traj in experiments::meanfield_experiment(cfg)? {
                let a = Alpha::new(traj.alpha)?;
                csv::write_csv(&out.join(format!("meanfield_{}.csv", alpha_tag(a))), &csv::render_meanfield(&traj))?;
                match meanfield::mf_fixed_point_stability(traj.alpha) {
                    Ok(r) => {
                        for p in r.points {
                            let label = if p.stability == Stability::Stable { "stable" } else { "unstable" };
                            stability.push_str(&format!(
                                "{},{},{label}\n",
                                csv::format_alpha(a),
                                csv::format_real(p.rho)
                            ));
                        }
                    }
                    Err(_) => stability.push_str(&format!("{},NA,degenerate\n", csv::format_alpha(a))),
                }
            }
            csv::write_csv(&out.join("meanfield_stability.csv"), &stability)?;
        }
        ExperimentKind::Networks => {
            let tables = experiments::network_comparison(cfg, exec)?;
            for t in &tables {
                csv::write_csv(&out.join(format!("sweep_{}.csv", t.topology.label())), &csv::render_sweep(&t.rows))?;
                let opt = t.alpha_opt().map_or_else(|| "NA".into(), |a| a.to_string());
                writeln!(
                    report,
                    "topology={} mean_degree={} alpha_opt={opt}",
                    t.topology,
                    csv::format_real(t.mean_degree)
                )
                .map_err(io_err)?;
            }
            csv::write_csv(&out.join("networks.csv"), &csv::render_networks(&tables))?;
        }
    }
    Ok(())
}

/// Reproducibility header echoed before any computation.
pub fn config_header(inv: &Invocation) -> String {
    match inv {
        Invocation::Experiment { config, threads, .. } => {
            format!("# config: {}\n# threads: {threads}\n", config::to_json(config))
        }
        Invocation::GraphInfo { topology, seed } => format!("# graphinfo: topology={topology} seed={seed}\n"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("nlvoter".to_string()).chain(s.split_whitespace().map(String::from)).collect()
    }

    #[test]
    fn sweep_range_config() {
        let inv = parse_config(args("sweep --topology lattice:L=50 --alpha 0.9:5.0:0.1 --runs 200 --seed 42")).unwrap();
        let Invocation::Experiment { config, .. } = inv else { panic!() };
        assert_eq!(config.alphas.len(), 42);
        assert_eq!((config.runs, config.seed), (200, 42));
        assert_eq!(config.kind, ExperimentKind::Sweep);
    }

    #[test]
    fn missing_seed_is_an_error() {
        assert!(parse_config(args("sweep --topology lattice:L=50 --alpha 1.0")).is_err());
    }

    #[test]
    fn pattern_needs_lattice() {
        let err = parse_config(args("pattern --topology ba:N=1000,m=2 --alpha 1.1 --seed 1")).unwrap_err();
        assert!(err.to_string().contains("lattice"), "{err}");
    }

    #[test]
    fn unknown_flag_rejected() {
        assert!(parse_config(args("sweep --topology lattice:L=5 --alpha 1 --seed 1 --bogus 3")).is_err());
    }

    #[test]
    fn preset_with_overrides() {
        let inv = parse_config(args("sweep --preset sweep --seed 5 --runs 10 --topology lattice:L=20")).unwrap();
        let Invocation::Experiment { config, .. } = inv else { panic!() };
        assert_eq!(config.runs, 10);
        assert_eq!(config.topologies, vec![TopologySpec::Lattice { side: 20 }]);
        assert_eq!(config.max_steps, 100_000);
    }

    #[test]
    fn preset_kind_must_match() {
        assert!(parse_config(args("series --preset sweep --seed 5")).is_err());
    }

    #[test]
    fn networks_take_several_topologies() {
        let inv = parse_config(args(
            "networks --topology er:N=100,k=4 --topology ba:N=100,m=2 --alpha 1,2 --seed 3 --graphs 2 --runs 2",
        ))
        .unwrap();
        let Invocation::Experiment { config, .. } = inv else { panic!() };
        assert_eq!(config.topologies.len(), 2);
        assert_eq!(config.realizations(&config.topologies[0]), 4);
    }
}
