//! Command-line entry points: config ingestion, dispatch, deterministic
//! JSON emission, and the batch acceptance-suite runner.

pub mod acceptance;
pub mod jsonout;

use std::fs;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use sha2::{Digest, Sha256};

use unitheta_core::green::{
    apply_weil_to_blocks, coset_reps, green_bruinier_closed, hejhal_poincare, theta_psi,
    xi_kudla, CoeffArray, DomainPoint, GreenValue, KudlaFlags, LatticeEmbedding, PolyTable,
};
use unitheta_core::lattice::{
    enumerate_vectors_sharded, HermitianLattice, LatticeConfig, Sl2Gen, WeilRepFinite,
};
use unitheta_core::schrodinger::compute_p;
use unitheta_core::special::PrecisionPolicy;
use unitheta_core::weil::{
    build_phi_km, build_phi_km_reduced, build_psi, build_psi_reduced, verify_k_invariance,
    verify_main_identity, verify_weights, IdentityReport,
};
use unitheta_core::{LatticeError, NumericError, SymbolicError};

use jsonout::J;

/// A dispatch-level error with its machine-readable kind and exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub detail: String,
    pub code: i32,
}

impl CliError {
    fn validation(detail: impl Into<String>) -> Self {
        CliError {
            kind: "validation",
            detail: detail.into(),
            code: 3,
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<SymbolicError> for CliError {
    fn from(e: SymbolicError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::NoConvergence { .. } => CliError {
                kind: "no_convergence",
                detail: e.to_string(),
                code: 4,
            },
            other => CliError::validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            kind: "io",
            detail: e.to_string(),
            code: 3,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::validation(format!("config parse: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "unitheta", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the exact symbolic identities over a (p, q) sweep.
    VerifySymbolic {
        #[arg(long, default_value_t = 2)]
        p_max: u32,
        #[arg(long, default_value_t = 2)]
        q_max: u32,
        /// One of: all, main, kinv, weights.
        #[arg(long, default_value = "all")]
        identity: String,
    },
    /// Print a symbolic form or coefficient polynomial in canonical text.
    Poly {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        q: u32,
        /// One of: phi, psi, phi-reduced, psi-reduced, p-poly.
        #[arg(long, default_value = "psi")]
        which: String,
        /// Comma-separated multi-index (p-poly only); empty for q = 1.
        #[arg(long, default_value = "")]
        alphas: String,
        #[arg(long, default_value = "")]
        betas: String,
    },
    /// Validate a lattice config and print its invariants.
    LatticeInfo { config: String },
    /// Enumerate lattice vectors of a given norm below a majorant bound.
    Enumerate {
        config: String,
        #[arg(long)]
        two_m: String,
        #[arg(long, default_value_t = 20.0)]
        bound: f64,
        #[arg(long, default_value_t = 0)]
        coset: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0.0)]
        geodesic_t: f64,
    },
    /// Evaluate the companion theta series at tau.
    Theta {
        config: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau_re: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_im: f64,
        #[arg(long, default_value_t = 20.0)]
        bound: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0.0)]
        geodesic_t: f64,
    },
    /// Evaluate the Kudla-type Green form.
    GreenKudla {
        config: String,
        #[arg(long)]
        two_m: String,
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = 20.0)]
        bound: f64,
        #[arg(long, default_value_t = 0)]
        coset: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0.0)]
        geodesic_t: f64,
        #[arg(long)]
        exp_factor: bool,
        #[arg(long)]
        log_term: bool,
    },
    /// Evaluate the Bruinier-type Green form by the closed formula.
    GreenBruinier {
        config: String,
        #[arg(long)]
        two_m: String,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 30.0)]
        bound: f64,
        #[arg(long, default_value_t = 0)]
        coset: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0.0)]
        geodesic_t: f64,
    },
    /// Check T- and S-modularity defects of the companion theta series.
    Modularity {
        config: String,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        tau_re: f64,
        #[arg(long, default_value_t = 0.8)]
        tau_im: f64,
        #[arg(long, default_value_t = 20.0)]
        bound: f64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0.0)]
        geodesic_t: f64,
    },
    /// Evaluate the Hejhal Poincare series over the finite Weil
    /// representation.
    Poincare {
        config: String,
        #[arg(long, allow_negative_numbers = true)]
        m: f64,
        #[arg(long, default_value_t = 0)]
        h_index: usize,
        #[arg(long, default_value_t = 1.6)]
        s: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau_re: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_im: f64,
        #[arg(long, default_value_t = 20)]
        c_max: u32,
    },
    /// Run the acceptance suite.
    Accept {
        /// One of: all, symbolic, numeric.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 60.0)]
        bound: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Entry point: parse, dispatch, print, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                print!("{e}");
                return 0;
            }
            let obj = J::obj(vec![(
                "error",
                J::obj(vec![
                    ("kind", J::s("usage")),
                    ("detail", J::s(e.to_string())),
                ]),
            )]);
            println!("{}", obj.render());
            return 2;
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            let obj = J::obj(vec![(
                "error",
                J::obj(vec![("kind", J::s(e.kind)), ("detail", J::s(e.detail))]),
            )]);
            println!("{}", obj.render());
            e.code
        }
    }
}

fn policy() -> Result<PrecisionPolicy, CliError> {
    Ok(PrecisionPolicy::from_env()?)
}

fn manifest(command: &str, params: J, digest: Option<String>, policy: &PrecisionPolicy) -> J {
    let wall_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as i64)
        .unwrap_or(0);
    J::obj(vec![
        ("command", J::s(command)),
        ("params", params),
        (
            "config_digest",
            digest.map(J::s).unwrap_or(J::Null),
        ),
        ("version", J::s(env!("CARGO_PKG_VERSION"))),
        ("wall_ms", J::I(wall_ms)),
        (
            "precision",
            J::obj(vec![
                ("eps", J::F(policy.eps)),
                ("max_terms", J::I(policy.max_terms as i64)),
                ("precision_bits", J::I(policy.precision_bits as i64)),
            ]),
        ),
    ])
}

fn load_lattice(path: &str) -> Result<(HermitianLattice, String), CliError> {
    let text = fs::read_to_string(path)?;
    let cfg: LatticeConfig = serde_json::from_str(&text)?;
    let lat = HermitianLattice::from_config(&cfg)?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    Ok((lat, digest))
}

mod hex {
    pub fn encode(bytes: impl AsRef<[u8]>) -> String {
        bytes
            .as_ref()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    s.parse::<BigRational>()
        .map_err(|e| CliError::validation(format!("cannot parse rational {s:?}: {e}")))
}

fn parse_indices(s: &str) -> Result<Vec<u32>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| CliError::validation(format!("bad index {t:?}: {e}")))
        })
        .collect()
}

fn coeffs_json(c: &CoeffArray) -> J {
    J::O(c
        .iter()
        .map(|((a, b), v)| {
            let key = format!(
                "{};{}",
                a.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                b.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            );
            (key, J::A(vec![J::F(v.re), J::F(v.im)]))
        })
        .collect())
}

fn truncation_json(g: &GreenValue) -> J {
    J::obj(vec![
        ("bound", J::F(g.truncation_bound)),
        ("tail_estimate", J::F(g.tail_estimate)),
        ("terms", J::I(g.lattice_vector_count as i64)),
    ])
}

fn coset_rep(
    lat: &HermitianLattice,
    group: &unitheta_core::lattice::DiscriminantGroup,
    idx: usize,
) -> Result<Vec<BigRational>, CliError> {
    let _ = lat;
    group
        .representatives
        .get(idx)
        .cloned()
        .ok_or_else(|| {
            CliError::validation(format!(
                "coset index {idx} out of range (order {})",
                group.order
            ))
        })
}

fn identity_line(p: u32, q: u32, name: &str, r: &IdentityReport) -> (String, bool) {
    let status = if r.holds { "OK" } else { "FAIL" };
    (
        format!(
            "({p},{q}) identity={name} status={status} terms_lhs={} terms_rhs={}",
            r.lhs_terms, r.rhs_terms
        ),
        r.holds,
    )
}

fn dispatch(cmd: Cmd) -> Result<i32, CliError> {
    match cmd {
        Cmd::VerifySymbolic {
            p_max,
            q_max,
            identity,
        } => {
            let pol = policy()?;
            let families: Vec<&str> = match identity.as_str() {
                "all" => vec!["main", "kinv", "weights"],
                "main" | "kinv" | "weights" => vec![identity.as_str()],
                other => {
                    return Err(CliError::validation(format!(
                        "unknown identity family {other:?} (expected all|main|kinv|weights)"
                    )))
                }
            };
            let params = J::obj(vec![
                ("p_max", J::I(p_max as i64)),
                ("q_max", J::I(q_max as i64)),
                ("identity", J::s(identity.clone())),
            ]);
            println!(
                "{}",
                J::obj(vec![("manifest", manifest("verify-symbolic", params, None, &pol))])
                    .render()
            );
            let mut all_ok = true;
            for p in 1..=p_max {
                for q in 1..=q_max {
                    for fam in &families {
                        let report = match *fam {
                            "main" => verify_main_identity(p, q)?,
                            "kinv" => verify_k_invariance(p, q)?,
                            _ => verify_weights(p, q)?,
                        };
                        let (line, ok) = identity_line(p, q, fam, &report);
                        println!("{line}");
                        all_ok &= ok;
                    }
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        Cmd::Poly {
            p,
            q,
            which,
            alphas,
            betas,
        } => {
            let pol = policy()?;
            let params = J::obj(vec![
                ("p", J::I(p as i64)),
                ("q", J::I(q as i64)),
                ("which", J::s(which.clone())),
                ("alphas", J::s(alphas.clone())),
                ("betas", J::s(betas.clone())),
            ]);
            let (text, terms) = match which.as_str() {
                "phi" => {
                    let f = build_phi_km(p, q)?;
                    (f.to_string(), f.num_terms())
                }
                "psi" => {
                    let f = build_psi(p, q)?;
                    (f.to_string(), f.num_terms())
                }
                "phi-reduced" => {
                    let f = build_phi_km_reduced(p, q)?;
                    (f.to_string(), f.num_terms())
                }
                "psi-reduced" => {
                    let f = build_psi_reduced(p, q)?;
                    (f.to_string(), f.num_terms())
                }
                "p-poly" => {
                    let a = parse_indices(&alphas)?;
                    let b = parse_indices(&betas)?;
                    let poly = compute_p(p, q, &a, &b)?;
                    let n = poly.num_terms();
                    (poly.to_string(), n)
                }
                other => {
                    return Err(CliError::validation(format!(
                        "unknown form {other:?} (expected phi|psi|phi-reduced|psi-reduced|p-poly)"
                    )))
                }
            };
            let obj = J::obj(vec![
                ("manifest", manifest("poly", params, None, &pol)),
                ("text", J::s(text)),
                ("terms", J::I(terms as i64)),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::LatticeInfo { config } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let params = J::obj(vec![("config", J::s(config.clone()))]);
            let obj = J::obj(vec![
                (
                    "manifest",
                    manifest("lattice-info", params, Some(digest), &pol),
                ),
                (
                    "value",
                    J::obj(vec![
                        ("field_disc", J::I(lat.field.disc)),
                        (
                            "signature",
                            J::A(vec![
                                J::I(lat.signature.0 as i64),
                                J::I(lat.signature.1 as i64),
                            ]),
                        ),
                        ("rank", J::I(lat.gram.len() as i64)),
                        ("real_rank", J::I(lat.real_rank() as i64)),
                        ("discriminant_group_order", J::I(group.order as i64)),
                        (
                            "elementary_divisors",
                            J::A(group
                                .elementary_divisors
                                .iter()
                                .map(|d| J::I(*d as i64))
                                .collect()),
                        ),
                        (
                            "coset_norms",
                            J::A(group.norms.iter().map(|n| J::s(n.to_string())).collect()),
                        ),
                    ]),
                ),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::Enumerate {
            config,
            two_m,
            bound,
            coset,
            workers,
            geodesic_t,
        } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let h = coset_rep(&lat, &group, coset)?;
            let tm = parse_rational(&two_m)?;
            let (p, q) = lat.signature;
            let z = DomainPoint::geodesic(p, q, geodesic_t);
            let emb = LatticeEmbedding::new(&lat)?;
            let maj = emb.realified_majorant(&lat, &z);
            let vectors = enumerate_vectors_sharded(&lat, &h, &tm, &maj, bound, workers)?;
            let params = J::obj(vec![
                ("config", J::s(config.clone())),
                ("two_m", J::s(two_m.clone())),
                ("bound", J::F(bound)),
                ("coset", J::I(coset as i64)),
                ("geodesic_t", J::F(geodesic_t)),
            ]);
            let obj = J::obj(vec![
                ("manifest", manifest("enumerate", params, Some(digest), &pol)),
                (
                    "value",
                    J::A(vectors
                        .iter()
                        .map(|v| {
                            J::obj(vec![
                                (
                                    "coords_int",
                                    J::A(v.coords_int.iter().map(|c| J::I(*c)).collect()),
                                ),
                                ("norm", J::s(v.norm.to_string())),
                                ("majorant", J::F(v.majorant_value)),
                            ])
                        })
                        .collect()),
                ),
                (
                    "truncation",
                    J::obj(vec![
                        ("bound", J::F(bound)),
                        ("tail_estimate", J::F(0.0)),
                        ("terms", J::I(vectors.len() as i64)),
                    ]),
                ),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::Theta {
            config,
            tau_re,
            tau_im,
            bound,
            workers,
            geodesic_t,
        } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let (p, q) = lat.signature;
            let table = PolyTable::new(p, q)?;
            let emb = LatticeEmbedding::new(&lat)?;
            let z = DomainPoint::geodesic(p, q, geodesic_t);
            let th = theta_psi(
                &lat,
                &emb,
                &table,
                &group,
                (tau_re, tau_im),
                &z,
                bound,
                workers,
                &pol,
            )?;
            let params = J::obj(vec![
                ("config", J::s(config.clone())),
                ("tau", J::A(vec![J::F(tau_re), J::F(tau_im)])),
                ("bound", J::F(bound)),
                ("geodesic_t", J::F(geodesic_t)),
            ]);
            let obj = J::obj(vec![
                ("manifest", manifest("theta", params, Some(digest), &pol)),
                (
                    "value",
                    J::A(th
                        .blocks
                        .iter()
                        .enumerate()
                        .map(|(i, b)| {
                            J::obj(vec![("coset", J::I(i as i64)), ("coeffs", coeffs_json(b))])
                        })
                        .collect()),
                ),
                ("weight", J::I(th.weight)),
                (
                    "truncation",
                    J::obj(vec![
                        ("bound", J::F(th.truncation_bound)),
                        ("tail_estimate", J::F(th.tail_estimate)),
                        ("terms", J::I(th.terms as i64)),
                    ]),
                ),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::GreenKudla {
            config,
            two_m,
            w,
            bound,
            coset,
            workers,
            geodesic_t,
            exp_factor,
            log_term,
        } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let h = coset_rep(&lat, &group, coset)?;
            let tm = parse_rational(&two_m)?;
            let (p, q) = lat.signature;
            let table = PolyTable::new(p, q)?;
            let emb = LatticeEmbedding::new(&lat)?;
            let z = DomainPoint::geodesic(p, q, geodesic_t);
            let val = xi_kudla(
                &lat,
                &emb,
                &table,
                &h,
                &tm,
                w,
                &z,
                bound,
                workers,
                KudlaFlags {
                    exp_factor,
                    log_term,
                },
                &pol,
            )?;
            let params = J::obj(vec![
                ("config", J::s(config.clone())),
                ("two_m", J::s(two_m.clone())),
                ("w", J::F(w)),
                ("bound", J::F(bound)),
                ("coset", J::I(coset as i64)),
                ("geodesic_t", J::F(geodesic_t)),
                ("exp_factor", J::B(exp_factor)),
                ("log_term", J::B(log_term)),
            ]);
            let obj = J::obj(vec![
                (
                    "manifest",
                    manifest("green-kudla", params, Some(digest), &pol),
                ),
                ("value", coeffs_json(&val.coeffs)),
                ("truncation", truncation_json(&val)),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::GreenBruinier {
            config,
            two_m,
            s,
            bound,
            coset,
            workers,
            geodesic_t,
        } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let h = coset_rep(&lat, &group, coset)?;
            let tm = parse_rational(&two_m)?;
            let (p, q) = lat.signature;
            let table = PolyTable::new(p, q)?;
            let emb = LatticeEmbedding::new(&lat)?;
            let z = DomainPoint::geodesic(p, q, geodesic_t);
            let val = green_bruinier_closed(
                &lat, &emb, &table, &h, &tm, s, &z, bound, workers, &pol,
            )?;
            let params = J::obj(vec![
                ("config", J::s(config.clone())),
                ("two_m", J::s(two_m.clone())),
                ("s", J::F(s)),
                ("bound", J::F(bound)),
                ("coset", J::I(coset as i64)),
                ("geodesic_t", J::F(geodesic_t)),
            ]);
            let obj = J::obj(vec![
                (
                    "manifest",
                    manifest("green-bruinier", params, Some(digest), &pol),
                ),
                ("value", coeffs_json(&val.coeffs)),
                ("truncation", truncation_json(&val)),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::Modularity {
            config,
            tau_re,
            tau_im,
            bound,
            workers,
            geodesic_t,
        } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let (p, q) = lat.signature;
            let table = PolyTable::new(p, q)?;
            let emb = LatticeEmbedding::new(&lat)?;
            let z = DomainPoint::geodesic(p, q, geodesic_t);
            let report = modularity_defects(
                &lat, &emb, &table, &group, (tau_re, tau_im), &z, bound, workers, &pol,
            )?;
            let params = J::obj(vec![
                ("config", J::s(config.clone())),
                ("tau", J::A(vec![J::F(tau_re), J::F(tau_im)])),
                ("bound", J::F(bound)),
                ("geodesic_t", J::F(geodesic_t)),
            ]);
            let obj = J::obj(vec![
                (
                    "manifest",
                    manifest("modularity", params, Some(digest), &pol),
                ),
                (
                    "value",
                    J::obj(vec![
                        ("t_defect", J::F(report.t_defect)),
                        ("s_defect", J::F(report.s_defect)),
                        ("weight", J::I(report.weight)),
                        ("scale", J::F(report.scale)),
                    ]),
                ),
                (
                    "truncation",
                    J::obj(vec![
                        ("bound", J::F(bound)),
                        ("tail_estimate", J::F(report.tail_estimate)),
                        ("terms", J::I(report.terms as i64)),
                    ]),
                ),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::Poincare {
            config,
            m,
            h_index,
            s,
            tau_re,
            tau_im,
            c_max,
        } => {
            let pol = policy()?;
            let (lat, digest) = load_lattice(&config)?;
            let group = lat.discriminant_group()?;
            let weil = WeilRepFinite::new(&lat, &group, true)?;
            let k = 2 - (lat.signature.0 + lat.signature.1) as i64;
            let reps = coset_reps(c_max);
            let val = hejhal_poincare(
                &weil,
                &group,
                k,
                m,
                h_index,
                s,
                (tau_re, tau_im),
                &reps,
                &pol,
            )?;
            let params = J::obj(vec![
                ("config", J::s(config.clone())),
                ("m", J::F(m)),
                ("h_index", J::I(h_index as i64)),
                ("s", J::F(s)),
                ("tau", J::A(vec![J::F(tau_re), J::F(tau_im)])),
                ("c_max", J::I(c_max as i64)),
            ]);
            let obj = J::obj(vec![
                ("manifest", manifest("poincare", params, Some(digest), &pol)),
                (
                    "value",
                    J::A(val
                        .coeffs
                        .iter()
                        .map(|c| J::A(vec![J::F(c.re), J::F(c.im)]))
                        .collect()),
                ),
                ("weight", J::I(k)),
                (
                    "truncation",
                    J::obj(vec![
                        ("bound", J::F(c_max as f64)),
                        ("tail_estimate", J::F(val.tail_estimate)),
                        ("terms", J::I(val.reps_used as i64)),
                    ]),
                ),
            ]);
            println!("{}", obj.render());
            Ok(0)
        }
        Cmd::Accept { suite, bound, seed } => {
            let pol = policy()?;
            let params = J::obj(vec![
                ("suite", J::s(suite.clone())),
                ("bound", J::F(bound)),
                ("seed", J::I(seed as i64)),
            ]);
            println!(
                "{}",
                J::obj(vec![("manifest", manifest("accept", params, None, &pol))]).render()
            );
            let which = match suite.as_str() {
                "all" => acceptance::Suite::All,
                "symbolic" => acceptance::Suite::Symbolic,
                "numeric" => acceptance::Suite::Numeric,
                other => {
                    return Err(CliError::validation(format!(
                        "unknown suite {other:?} (expected all|symbolic|numeric)"
                    )))
                }
            };
            let bin = std::env::current_exe().ok();
            let results = acceptance::run_suite(which, bound, seed, bin.as_deref());
            let mut all_ok = true;
            for r in &results {
                all_ok &= r.pass;
                let obj = J::obj(vec![
                    ("criterion", J::I(r.id as i64)),
                    ("name", J::s(r.name)),
                    ("pass", J::B(r.pass)),
                    ("seconds", J::F(r.seconds)),
                    ("detail", J::s(r.detail.clone())),
                ]);
                println!("{}", obj.render());
            }
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

/// Modularity defect report for the companion theta series.
pub struct ModularityReport {
    pub t_defect: f64,
    pub s_defect: f64,
    pub weight: i64,
    pub scale: f64,
    pub tail_estimate: f64,
    pub terms: usize,
}

/// Compute relative T- and S-modularity defects of the theta series at tau.
#[allow(clippy::too_many_arguments)]
pub fn modularity_defects(
    lat: &HermitianLattice,
    emb: &LatticeEmbedding,
    table: &PolyTable,
    group: &unitheta_core::lattice::DiscriminantGroup,
    tau: (f64, f64),
    z: &DomainPoint,
    bound: f64,
    workers: usize,
    pol: &PrecisionPolicy,
) -> Result<ModularityReport, CliError> {
    use num_complex::Complex64;
    use unitheta_core::exact::rational_to_f64;

    let (u, v) = tau;
    let th = theta_psi(lat, emb, table, group, tau, z, bound, workers, pol)?;
    let th_t = theta_psi(lat, emb, table, group, (u + 1.0, v), z, bound, workers, pol)?;
    let n2 = u * u + v * v;
    let th_s = theta_psi(
        lat,
        emb,
        table,
        group,
        (-u / n2, v / n2),
        z,
        bound,
        workers,
        pol,
    )?;
    let weil = WeilRepFinite::new(lat, group, false)?;
    let rhs = apply_weil_to_blocks(&weil, Sl2Gen::S, &th.blocks)?;
    let kappa = th.weight;
    let tau_c = Complex64::new(u, v);
    let autom = tau_c.powi(kappa as i32);
    let scale: f64 = th
        .blocks
        .iter()
        .map(unitheta_core::green::coeff_norm)
        .fold(1e-300, f64::max);
    let mut t_defect: f64 = 0.0;
    let mut s_defect: f64 = 0.0;
    for (i, norm) in group.norms.iter().enumerate() {
        let phase = Complex64::new(
            0.0,
            2.0 * std::f64::consts::PI * rational_to_f64(norm),
        )
        .exp();
        for (key, val) in &th.blocks[i] {
            let got = th_t.blocks[i]
                .get(key)
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            t_defect = t_defect.max((got - phase * val).norm());
        }
        for (key, val) in &rhs[i] {
            let got = th_s.blocks[i]
                .get(key)
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0));
            s_defect = s_defect.max((got - autom * val).norm());
        }
    }
    Ok(ModularityReport {
        t_defect: t_defect / scale,
        s_defect: s_defect / scale,
        weight: kappa,
        scale,
        tail_estimate: th.tail_estimate,
        terms: th.terms,
    })
}
