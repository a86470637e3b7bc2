//! Experiment runner: instance specs, certificates on disk and per-seed
//! run reports. Every reported success has been written, read back and
//! re-verified.

use crate::algebraic::triangle_decompose_algebraic;
use crate::barriers::exact_max_matching;
use crate::codegree::perfect_matching_codegree;
use crate::design::{steiner_auxiliary, DesignParams};
use crate::error::{Error, Failure, Result};
use crate::exact::exact_triangle_decomposition;
use crate::generators::{generate_codegree_3graph, generate_dense_graph, make_tridivisible};
use crate::graph::SimpleGraph;
use crate::hypergraph::{
    pair, triangle_edges, Hypergraph, Matching, Triangle, TriangleDecomposition, Vertex,
};
use crate::iterative::{triangle_decompose_iterative, IterativeParams};
use crate::nibble::{rodl_nibble, NibbleParams};
use crate::octahedron::FlipStats;
use crate::relaxations::{
    fractional_pm, fractional_triangle_decomposition, FractionalOutcome, FractionalSolution,
};
use crate::verify::{is_matching_in, verify_perfect_matching, verify_triangle_decomposition};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// Environment variable capping the runner's worker threads.
pub const THREADS_ENV: &str = "DECOMP_FORGE_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Nibble,
    CodegreePm,
    Iterative,
    Algebraic,
    Exact,
    Lp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Nibble => "nibble",
            Method::CodegreePm => "codegree-pm",
            Method::Iterative => "iterative",
            Method::Algebraic => "algebraic",
            Method::Exact => "exact",
            Method::Lp => "lp",
        }
    }
}

/// Where an instance comes from. Generated instances are deterministic in
/// their parameters, including the generator seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case")]
pub enum InstanceSpec {
    Complete {
        n: usize,
    },
    Dense {
        n: usize,
        min_degree_fraction: f64,
        seed: u64,
        /// Repair to even degrees and `3 | e` after generating.
        #[serde(default)]
        tridivisible: bool,
    },
    Codegree {
        n: usize,
        codegree_fraction: f64,
        seed: u64,
    },
    CompleteHypergraph {
        n: usize,
        r: usize,
    },
    SteinerAuxiliary {
        n: u64,
        q: u64,
        r: u64,
    },
    File {
        path: PathBuf,
    },
}

impl InstanceSpec {
    /// Graphs come back as 2-graphs.
    pub fn build(&self) -> Result<Hypergraph> {
        Ok(match self {
            InstanceSpec::Complete { n } => SimpleGraph::complete(*n).to_hypergraph(),
            InstanceSpec::Dense {
                n,
                min_degree_fraction,
                seed,
                tridivisible,
            } => {
                let g = generate_dense_graph(*n, *min_degree_fraction, *seed)?;
                if *tridivisible {
                    make_tridivisible(&g)?.0.to_hypergraph()
                } else {
                    g.to_hypergraph()
                }
            }
            InstanceSpec::Codegree {
                n,
                codegree_fraction,
                seed,
            } => generate_codegree_3graph(*n, *codegree_fraction, *seed)?,
            InstanceSpec::CompleteHypergraph { n, r } => Hypergraph::complete(*n, *r),
            InstanceSpec::SteinerAuxiliary { n, q, r } => {
                steiner_auxiliary(&DesignParams::new(*n, *q, *r, 1)?)?.hypergraph
            }
            InstanceSpec::File { path } => read_instance(path)?,
        })
    }
}

pub fn read_instance(path: &Path) -> Result<Hypergraph> {
    Hypergraph::from_json(&std::fs::read_to_string(path)?)
}

/// Hex SHA-256 of the canonical JSON of `h`.
pub fn instance_digest(h: &Hypergraph) -> String {
    hex::encode(Sha256::digest(h.to_json().as_bytes()))
}

fn default_codegree_c() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub instance: InstanceSpec,
    pub seeds: Vec<u64>,
    /// Directory for certificates and reports.
    pub output: PathBuf,
    /// Slack constant handed to the codegree pipeline.
    #[serde(default = "default_codegree_c")]
    pub codegree_c: f64,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        Ok(())
    }
}

/// A certificate file. Fractional weights are exact rationals written as
/// `"p/q"` strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Triangles {
        n: usize,
        triangles: Vec<Triangle>,
    },
    Matching {
        n: usize,
        r: usize,
        perfect: bool,
        edges: Vec<Vec<Vertex>>,
    },
    /// Weights on triangles summing to 1 on every edge of a graph
    /// (`r = 2`), or on edges summing to 1 at every vertex.
    Fractional {
        n: usize,
        r: usize,
        weights: Vec<(Vec<Vertex>, String)>,
    },
}

impl Certificate {
    pub fn from_decomposition(n: usize, d: &TriangleDecomposition) -> Self {
        Certificate::Triangles {
            n,
            triangles: d.triangles().to_vec(),
        }
    }

    pub fn from_matching(h: &Hypergraph, m: &Matching, perfect: bool) -> Self {
        Certificate::Matching {
            n: h.n(),
            r: h.r(),
            perfect,
            edges: m.edges().to_vec(),
        }
    }

    pub fn from_fractional(h: &Hypergraph, s: &FractionalSolution) -> Self {
        Certificate::Fractional {
            n: h.n(),
            r: h.r(),
            weights: s
                .weights
                .iter()
                .map(|(k, w)| (k.clone(), w.to_string()))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificates serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Checks a certificate against its instance. Total: any mismatch is a
/// rejection with a reason.
pub fn verify_certificate(h: &Hypergraph, cert: &Certificate) -> std::result::Result<(), String> {
    match cert {
        Certificate::Triangles { n, triangles } => {
            if *n != h.n() {
                return Err(format!(
                    "certificate is for {n} vertices, instance has {}",
                    h.n()
                ));
            }
            let check = verify_triangle_decomposition(
                h,
                &TriangleDecomposition::new(triangles.iter().copied()),
            );
            if check.accepted {
                Ok(())
            } else {
                Err(format!("decomposition rejected: {check:?}"))
            }
        }
        Certificate::Matching {
            n,
            r,
            perfect,
            edges,
        } => {
            if (*n, *r) != (h.n(), h.r()) {
                return Err("certificate shape does not match the instance".into());
            }
            let m = Matching::new(edges.clone());
            if *perfect {
                let check = verify_perfect_matching(h, &m);
                if check.accepted {
                    Ok(())
                } else {
                    Err(format!("perfect matching rejected: {check:?}"))
                }
            } else if is_matching_in(h, &m) {
                Ok(())
            } else {
                Err("edges are not a matching of the instance".into())
            }
        }
        Certificate::Fractional { n, r, weights } => {
            if (*n, *r) != (h.n(), h.r()) {
                return Err("certificate shape does not match the instance".into());
            }
            verify_fractional(h, weights)
        }
    }
}

fn verify_fractional(
    h: &Hypergraph,
    weights: &[(Vec<Vertex>, String)],
) -> std::result::Result<(), String> {
    let mut sums: BTreeMap<Vec<Vertex>, BigRational> = BTreeMap::new();
    let triangles = h.r() == 2;
    let g = if triangles {
        Some(SimpleGraph::from_hypergraph(h).map_err(|e| e.to_string())?)
    } else {
        None
    };
    for (key, w) in weights {
        let w = BigRational::from_str(w).map_err(|e| format!("bad weight {w:?}: {e}"))?;
        if w < BigRational::zero() {
            return Err(format!("negative weight on {key:?}"));
        }
        if let Some(g) = &g {
            let [a, b, c] = key[..] else {
                return Err(format!("{key:?} is not a triangle"));
            };
            let t = [a, b, c];
            if !(a < b && b < c && c < h.n()) || !g.has_triangle(&t) {
                return Err(format!("{key:?} is not a triangle of the graph"));
            }
            for (u, v) in triangle_edges(&t) {
                *sums.entry(vec![u, v]).or_insert_with(BigRational::zero) += &w;
            }
        } else {
            if !h.contains_edge(key) {
                return Err(format!("{key:?} is not an edge of the instance"));
            }
            for &v in key {
                *sums.entry(vec![v]).or_insert_with(BigRational::zero) += &w;
            }
        }
    }
    let targets: Vec<Vec<Vertex>> = if triangles {
        h.edges()
            .iter()
            .map(|e| {
                let (u, v) = pair(e[0], e[1]);
                vec![u, v]
            })
            .collect()
    } else {
        (0..h.n()).map(|v| vec![v]).collect()
    };
    let one = BigRational::one();
    for t in &targets {
        let s = sums.remove(t).unwrap_or_else(BigRational::zero);
        if s != one {
            return Err(format!("total weight {s} at {t:?}"));
        }
    }
    match sums.keys().next() {
        Some(k) => Err(format!("weight outside the instance at {k:?}")),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    Failed,
    Infeasible,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub status: Status,
    pub stage: Option<String>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub leave_size: Option<usize>,
    pub spill_size: Option<usize>,
    pub retries: Option<usize>,
    pub flips: Option<FlipStats>,
    pub hole_checks: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub instance_digest: String,
    pub method: Method,
    pub seed: u64,
    pub outcome: Outcome,
    pub certificate: Option<PathBuf>,
    pub wall_ms: f64,
    pub stats: RunStats,
}

/// What a method produced before anything touches the disk.
pub struct MethodRun {
    pub outcome: Outcome,
    pub certificate: Option<Certificate>,
    pub stats: RunStats,
}

fn as_graph(h: &Hypergraph, m: Method) -> Result<SimpleGraph> {
    SimpleGraph::from_hypergraph(h)
        .map_err(|_| Error::InvalidInstance(format!("method {} needs a graph instance", m.name())))
}

fn success(cert: Certificate, stats: RunStats) -> MethodRun {
    MethodRun {
        outcome: Outcome {
            status: Status::Success,
            stage: None,
            detail: None,
        },
        certificate: Some(cert),
        stats,
    }
}

fn infeasible(detail: &str) -> MethodRun {
    MethodRun {
        outcome: Outcome {
            status: Status::Infeasible,
            stage: None,
            detail: Some(detail.into()),
        },
        certificate: None,
        stats: RunStats::default(),
    }
}

/// Runs one method on one instance; pipeline failures come back as
/// outcomes, everything else as errors.
pub fn run_method(h: &Hypergraph, method: Method, seed: u64, codegree_c: f64) -> Result<MethodRun> {
    let res = run_method_inner(h, method, seed, codegree_c);
    match res {
        Err(Error::Failed(f)) => Ok(MethodRun {
            outcome: Outcome {
                status: Status::Failed,
                stage: Some(f.stage.clone()),
                detail: Some(f.to_string()),
            },
            certificate: None,
            stats: RunStats::default(),
        }),
        Err(e @ (Error::InvalidInstance(_) | Error::InvalidInput(_) | Error::TooLarge(_))) => {
            Ok(MethodRun {
                outcome: Outcome {
                    status: Status::Invalid,
                    stage: None,
                    detail: Some(e.to_string()),
                },
                certificate: None,
                stats: RunStats::default(),
            })
        }
        other => other,
    }
}

fn run_method_inner(
    h: &Hypergraph,
    method: Method,
    seed: u64,
    codegree_c: f64,
) -> Result<MethodRun> {
    Ok(match method {
        Method::Exact => {
            if h.r() == 2 {
                match exact_triangle_decomposition(&as_graph(h, method)?)? {
                    Some(d) => success(
                        Certificate::from_decomposition(h.n(), &d),
                        RunStats::default(),
                    ),
                    None => infeasible("no triangle decomposition exists"),
                }
            } else {
                let m = exact_max_matching(h)?;
                if m.len() * h.r() == h.n() {
                    success(Certificate::from_matching(h, &m, true), RunStats::default())
                } else {
                    infeasible(&format!("maximum matching has {} edges", m.len()))
                }
            }
        }
        Method::Iterative => {
            let rep = triangle_decompose_iterative(
                &as_graph(h, method)?,
                &IterativeParams::default(),
                seed,
            )?;
            let stats = RunStats {
                leave_size: Some(rep.absorbed.s.len()),
                retries: Some(rep.attempts - 1),
                ..Default::default()
            };
            success(
                Certificate::from_decomposition(h.n(), &rep.decomposition),
                stats,
            )
        }
        Method::Algebraic => {
            let rep = triangle_decompose_algebraic(&as_graph(h, method)?, seed)?;
            let last = rep.attempts.last();
            let stats = RunStats {
                leave_size: last.map(|t| t.leave_edges),
                spill_size: last.map(|t| t.spill_edges),
                retries: Some(rep.attempts.len() - 1),
                flips: Some(rep.flips),
                hole_checks: Some(rep.hole_checks),
            };
            success(
                Certificate::from_decomposition(h.n(), &rep.decomposition),
                stats,
            )
        }
        Method::Nibble => {
            let out = rodl_nibble(h, &NibbleParams::with_seed(seed))?;
            let perfect = out.leave.is_empty();
            let stats = RunStats {
                leave_size: Some(out.leave.len()),
                ..Default::default()
            };
            success(Certificate::from_matching(h, &out.matching, perfect), stats)
        }
        Method::CodegreePm => {
            let rep = perfect_matching_codegree(h, codegree_c, seed)?;
            let stats = RunStats {
                leave_size: Some(0),
                ..Default::default()
            };
            success(Certificate::from_matching(h, &rep.matching, true), stats)
        }
        Method::Lp => {
            let out = if h.r() == 2 {
                fractional_triangle_decomposition(&as_graph(h, method)?)?
            } else {
                fractional_pm(h)?
            };
            match out {
                FractionalOutcome::Feasible(s) => {
                    success(Certificate::from_fractional(h, &s), RunStats::default())
                }
                FractionalOutcome::Infeasible => infeasible("the relaxation is infeasible"),
            }
        }
    })
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the certificate, reads it back and re-verifies it against the
/// instance. A certificate that does not survive the round trip is an
/// internal error, never a success.
pub fn persist_certificate(h: &Hypergraph, cert: &Certificate, path: &Path) -> Result<()> {
    write_atomic(path, &cert.to_json())?;
    let back = Certificate::from_json(&std::fs::read_to_string(path)?)?;
    verify_certificate(h, &back).map_err(|why| {
        Error::ImpossibleState(format!(
            "certificate {} fails re-verification: {why}",
            path.display()
        ))
    })
}

fn run_cell(h: &Hypergraph, digest: &str, cfg: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    let start = Instant::now();
    let run = run_method(h, cfg.method, seed, cfg.codegree_c)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let stem = format!("{}-{}-seed{seed}", &digest[..12], cfg.method.name());
    let certificate = match &run.certificate {
        Some(cert) => {
            let path = cfg.output.join(format!("{stem}.cert.json"));
            persist_certificate(h, cert, &path)?;
            Some(path)
        }
        None => None,
    };
    let report = RunReport {
        instance_digest: digest.to_string(),
        method: cfg.method,
        seed,
        outcome: run.outcome,
        certificate,
        wall_ms,
        stats: run.stats,
    };
    write_atomic(
        &cfg.output.join(format!("{stem}.report.json")),
        &serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

/// Thread count from `DECOMP_FORGE_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&k: &usize| k > 0)
}

/// Runs every seed of the experiment (in parallel, one cell per seed) and
/// writes one report per cell plus `reports.json` with all of them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunReport>> {
    cfg.validate()?;
    let h = cfg.instance.build().map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("instance: {io}")),
        Error::Json(js) => Error::Config(format!("instance: {js}")),
        other => other,
    })?;
    let digest = instance_digest(&h);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_cap() {
        builder = builder.num_threads(k);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let reports: Vec<RunReport> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&s| run_cell(&h, &digest, cfg, s))
            .collect::<Result<Vec<_>>>()
    })?;
    write_atomic(
        &cfg.output.join("reports.json"),
        &serde_json::to_string_pretty(&reports)?,
    )?;
    Ok(reports)
}

/// Failure diagnostics of a report, if it failed.
pub fn failure_of(r: &RunReport) -> Option<Failure> {
    (r.outcome.status == Status::Failed).then(|| {
        Failure::new(
            r.outcome.stage.clone().unwrap_or_default(),
            r.outcome.detail.clone().unwrap_or_default(),
        )
    })
}
