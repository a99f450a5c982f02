use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cluster_cone::cones::{self, Certificate, SubtractionFree, Verdict};
use cluster_cone::finite_type::{catalog_seed_with_frozen, BipartiteBelt, DynkinType};
use cluster_cone::grassmannian::{self as gr, GrassmannianBelt, GrassmannianSpec};
use cluster_cone::seeds::{ExchangeData, QuiverFile};
use cluster_cone::uvars::{self, render_ratio, UVariable, WeightFunctional};
use cluster_cone::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "cluster-cone", version, about = "Bounded ratios of cluster variables in finite type")]
struct Cli {
    /// Output format; text on a terminal, JSON otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Number of random positive points for sampling checks.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Seed for the sampling points.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLE_SEED)]
    sample_seed: u64,
    /// Worker threads for sampling.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

const DEFAULT_SAMPLE_SEED: u64 = 20240601;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone, Default)]
struct SourceArgs {
    /// Dynkin type of the catalog seed, e.g. A3, C2, E8.
    #[arg(long = "type", value_name = "TYPE")]
    dynkin: Option<String>,
    /// Number of frozen nodes attached to the catalog seed.
    #[arg(long, default_value_t = 0)]
    frozen: usize,
    /// Grassmannian Gr(k, n) with its grid seed.
    #[arg(long, num_args = 2, value_names = ["K", "N"])]
    gr: Option<Vec<usize>>,
    /// Seed file in the quiver JSON format.
    #[arg(long, value_name = "FILE")]
    seed: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every cluster variable of the belt.
    Enumerate(SourceArgs),
    /// List the u-variables.
    Uvars(SourceArgs),
    /// Decide boundedness of a ratio and print its certificate.
    Check {
        #[command(flatten)]
        source: SourceArgs,
        /// Ratio of cluster variables, e.g. "x1*x3/(x2*x4)"
        #[arg(long)]
        ratio: String,
        /// Also write the certificate to this file.
        #[arg(long, value_name = "FILE")]
        certificate_out: Option<PathBuf>,
    },
    /// Extreme rays of a subset cone of a Grassmannian.
    Cone {
        #[arg(long, num_args = 2, value_names = ["K", "N"], required = true)]
        gr: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Subset::Pluecker)]
        subset: Subset,
    },
    /// Factor a bounded Plücker ratio into primitive ratios.
    Factor {
        #[arg(long, num_args = 2, value_names = ["K", "N"], required = true)]
        gr: Vec<usize>,
        /// Ratio of Plücker coordinates, e.g. "p[135]*p[234]/(p[235]*p[134])"
        #[arg(long)]
        ratio: String,
    },
    /// Run a golden suite or replay a certificate.
    Verify {
        #[arg(long, value_enum, conflicts_with = "certificate", required_unless_present = "certificate")]
        suite: Option<Suite>,
        #[arg(long, value_name = "FILE")]
        certificate: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Subset {
    Pluecker,
    Deg2,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Gr48,
    UEquations,
    Appendix,
}

/// What a run produced: a JSON report, its text rendering, and whether the
/// answer was a mathematical negative.
struct Outcome {
    json: Value,
    text: String,
    negative: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let format = cli.format.unwrap_or(if std::io::stdout().is_terminal() { Format::Text } else { Format::Json });
    match run(&cli) {
        Ok(out) => {
            let body = match format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("reports serialize") + "\n",
                Format::Text => out.text,
            };
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(if out.negative { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Internal(_) => 3,
                _ => 2,
            })
        }
    }
}

/// The serializable description of an algebra, enough to rebuild it.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", tag = "kind")]
enum Source {
    Type { dynkin: String, frozen: usize },
    Grassmannian { k: usize, n: usize },
    SeedFile { path: String, sha256: String },
}

enum Algebra {
    Plain { belt: BipartiteBelt, aliases: Vec<String> },
    Gr(Box<GrassmannianBelt>),
}

impl Algebra {
    fn build(source: &Source) -> Result<Algebra> {
        match source {
            Source::Type { dynkin, frozen } => {
                let t: DynkinType = dynkin.parse()?;
                plain(&catalog_seed_with_frozen(t, *frozen)?)
            }
            Source::Grassmannian { k, n } => {
                Ok(Algebra::Gr(Box::new(GrassmannianBelt::new(GrassmannianSpec::new(*k, *n)?)?)))
            }
            Source::SeedFile { path, sha256 } => {
                let text = std::fs::read_to_string(path)?;
                if !sha256.is_empty() && hash_hex(text.as_bytes()) != *sha256 {
                    return Err(Error::Contract(format!("{path} changed since the certificate was written")));
                }
                plain(&ExchangeData::from_quiver(&QuiverFile::from_json(&text)?)?)
            }
        }
    }

    fn belt(&self) -> &BipartiteBelt {
        match self {
            Algebra::Plain { belt, .. } => belt,
            Algebra::Gr(gb) => &gb.belt,
        }
    }

    fn names(&self) -> Vec<String> {
        match self {
            Algebra::Plain { belt, .. } => belt.names.clone(),
            Algebra::Gr(gb) => gb.names(),
        }
    }

    fn resolve(&self, s: &str) -> Option<usize> {
        match self {
            Algebra::Plain { belt, aliases } => {
                belt.names.iter().position(|n| n == s).or_else(|| aliases.iter().position(|n| n == s))
            }
            Algebra::Gr(gb) => gb.resolve(s),
        }
    }

    fn parse(&self, text: &str) -> Result<Vec<i64>> {
        Ok(cluster_cone::expr::parse_ratio(text, self.belt().len(), &|s| self.resolve(s))?.vector)
    }

    /// Registry legend: id, name and alias.
    fn legend(&self) -> Value {
        let names = self.names();
        let aliases: Vec<String> = match self {
            Algebra::Plain { aliases, .. } => aliases.clone(),
            Algebra::Gr(gb) => gb.belt.names.clone(),
        };
        Value::Array(
            names
                .iter()
                .zip(&aliases)
                .enumerate()
                .map(|(id, (n, a))| json!({"id": id, "name": n, "alias": a}))
                .collect(),
        )
    }
}

/// `x<j>` for the j-th mutable variable in registry order, frozen variables
/// keep their seed names.
fn plain(e: &ExchangeData) -> Result<Algebra> {
    let belt = BipartiteBelt::from_exchange(e)?;
    let aliases = (0..belt.len())
        .map(|id| if belt.is_frozen_id(id) { belt.names[id].clone() } else { format!("x{}", id + 1) })
        .collect();
    Ok(Algebra::Plain { belt, aliases })
}

fn hash_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn source_of(args: &SourceArgs) -> Result<Source> {
    let given = usize::from(args.dynkin.is_some()) + usize::from(args.gr.is_some()) + usize::from(args.seed.is_some());
    if given != 1 {
        return Err(Error::Contract("give exactly one of --type, --gr, --seed".into()));
    }
    if let Some(t) = &args.dynkin {
        return Ok(Source::Type { dynkin: t.clone(), frozen: args.frozen });
    }
    if args.frozen != 0 {
        return Err(Error::Contract("--frozen only applies to --type".into()));
    }
    if let Some(g) = &args.gr {
        return Ok(Source::Grassmannian { k: g[0], n: g[1] });
    }
    let path = args.seed.as_ref().expect("one source is present");
    let text = std::fs::read_to_string(path)?;
    Ok(Source::SeedFile { path: path.display().to_string(), sha256: hash_hex(text.as_bytes()) })
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Enumerate(args) => enumerate(&source_of(args)?),
        Command::Uvars(args) => list_uvars(&source_of(args)?),
        Command::Check { source, ratio, certificate_out } => {
            check(&source_of(source)?, ratio, certificate_out.as_deref())
        }
        Command::Cone { gr, subset } => cone(gr[0], gr[1], *subset),
        Command::Factor { gr, ratio } => factor(gr[0], gr[1], ratio),
        Command::Verify { suite: Some(s), .. } => verify_suite(*s, cli),
        Command::Verify { certificate: Some(path), .. } => replay(path),
        Command::Verify { .. } => Err(Error::Contract("give --suite or --certificate".into())),
    }
}

fn enumerate(source: &Source) -> Result<Outcome> {
    let alg = Algebra::build(source)?;
    let belt = alg.belt();
    let names = alg.names();
    let forms = belt.laurent.as_ref();
    let var_names: Vec<String> = forms
        .map(|f| (0..f[0].nvars()).map(|i| names[belt.ids[0][i]].clone()).collect())
        .unwrap_or_default();
    let mut text = format!(
        "type {}: {} mutable and {} frozen variables, {} belt seeds\n",
        belt.dynkin,
        belt.num_mutable(),
        belt.m(),
        belt.period()
    );
    let mut vars = Vec::new();
    for id in 0..belt.len() {
        let root = (!belt.is_frozen_id(id)).then(|| belt.roots[id].clone());
        let form = forms.map(|f| f[id].display_with(&var_names));
        let mut entry = json!({"id": id, "name": names[id], "belt_name": belt.names[id], "root": root, "laurent": form});
        if let Algebra::Gr(gb) = &alg {
            entry["degree"] = json!(gb.tags[id].degree);
            entry["content"] = json!(gb.tags[id].content);
        }
        text.push_str(&format!("  {:>3}  {:<16} {}\n", id, names[id], form.unwrap_or_default()));
        vars.push(entry);
    }
    let seeds: Vec<Vec<usize>> = (0..belt.period()).map(|t| belt.cluster_ids(t)).collect();
    Ok(Outcome {
        json: json!({"source": source, "type": belt.dynkin.to_string(), "seeds": seeds, "variables": vars, "legend": alg.legend()}),
        text,
        negative: false,
    })
}

fn list_uvars(source: &Source) -> Result<Outcome> {
    let alg = Algebra::build(source)?;
    let belt = alg.belt();
    let names = alg.names();
    let us = uvars::u_variables(belt)?;
    let mut text = String::new();
    let mut list = Vec::new();
    for u in &us {
        let r = render_ratio(&u.ratio, &names);
        text.push_str(&format!("v_{} = {}\n", names[u.gamma], r));
        list.push(json!({"gamma": u.gamma, "name": names[u.gamma], "partner": names[u.partner], "ratio": r, "vector": u.ratio, "root": u.root}));
    }
    if !belt.input.is_full_rank() {
        text.push_str("note: the extended exchange matrix is not of full rank; generators may not span\n");
    }
    Ok(Outcome {
        json: json!({"source": source, "full_rank": belt.input.is_full_rank(), "uvars": list, "legend": alg.legend()}),
        text,
        negative: false,
    })
}

/// Certificate file contents: the certificate plus what is needed to rebuild
/// the algebra.
#[derive(Serialize, Deserialize)]
struct CertificateFile {
    source: Source,
    ratio: String,
    #[serde(flatten)]
    certificate: Certificate,
}

struct Engine {
    alg: Algebra,
    us: Vec<UVariable>,
    u: cones::UMatrix,
    tables: Vec<WeightFunctional>,
}

impl Engine {
    fn new(source: &Source) -> Result<Engine> {
        let alg = Algebra::build(source)?;
        let us = uvars::u_variables(alg.belt())?;
        let u = cones::build_u_matrix(alg.belt(), &us)?;
        let tables = match &alg {
            Algebra::Gr(gb) => gb.columns.clone(),
            Algebra::Plain { belt, .. } => uvars::kernel_weights(belt)?,
        };
        Ok(Engine { alg, us, u, tables })
    }
}

fn check(source: &Source, ratio: &str, out: Option<&Path>) -> Result<Outcome> {
    let eng = Engine::new(source)?;
    let names = eng.alg.names();
    let v = eng.alg.parse(ratio)?;
    let mut cert = cones::membership(&v, &eng.u, &eng.tables, eng.alg.belt())?;
    let mut text = format!("{}: {}\n", render_ratio(&v, &names), verdict_word(cert.verdict));
    let mut sf_json = Value::Null;
    if let Some(l) = &cert.lambda {
        let mut line = String::new();
        for (x, u) in l.iter().zip(&eng.us).filter(|(x, _)| x.as_str() != "0") {
            let (sign, mag) = match x.strip_prefix('-') {
                Some(m) => ("- ", m),
                None => ("+ ", x.as_str()),
            };
            if line.is_empty() {
                line.push_str(if sign == "- " { "-" } else { "" });
            } else {
                line.push(' ');
                line.push_str(sign);
            }
            line.push_str(&format!("{}·v_{}", mag, names[u.gamma]));
        }
        text.push_str(&format!("  lambda: {}\n", line));
    }
    if let Some(a) = &cert.alpha {
        text.push_str(&format!("  alpha = ({}), weight {}\n", a.join(", "), cert.weight.clone().unwrap_or_default()));
    }
    if let Some(r) = &cert.ray {
        text.push_str(&format!(
            "  degeneration along beta = ({}) at belt seed {}: v_{} decays {}, others bounded {}\n",
            r.beta.join(", "),
            r.seed,
            names[r.gamma],
            r.decays,
            r.others_bounded
        ));
    }
    if cert.verdict == Verdict::Bounded {
        match cones::subtraction_free_check(&cert, eng.alg.belt(), &eng.us) {
            Ok(SubtractionFree::ProofChain { steps }) => {
                text.push_str("  subtraction-free: true (proof chain)\n");
                for s in &steps {
                    text.push_str(&format!("    {s}\n"));
                }
                sf_json = json!({"subtraction_free": true, "proof_chain": steps});
                cert.proof_chain = Some(steps);
            }
            Ok(SubtractionFree::Expansion { difference, nonnegative, positive_terms, negative_terms }) => {
                text.push_str(&format!(
                    "  subtraction-free: {nonnegative} (denominator - numerator has {positive_terms} positive and {negative_terms} negative terms)\n    {difference}\n"
                ));
                sf_json = json!({"subtraction_free": nonnegative, "difference": difference,
                    "positive_terms": positive_terms, "negative_terms": negative_terms});
            }
            Err(Error::Unsupported(msg)) => {
                text.push_str(&format!("  subtraction-free: undecided ({msg})\n"));
                sf_json = json!({"subtraction_free": Value::Null, "reason": msg});
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(note) = &cert.note {
        text.push_str(&format!("  note: {note}\n"));
    }
    let file = CertificateFile { source: source.clone(), ratio: ratio.to_string(), certificate: cert.clone() };
    if let Some(path) = out {
        std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    }
    let mut json = serde_json::to_value(&file)?;
    json["subtraction_free"] = sf_json;
    json["legend"] = eng.alg.legend();
    Ok(Outcome { json, text, negative: cert.verdict != Verdict::Bounded })
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Bounded => "bounded",
        Verdict::Unbounded => "unbounded",
        Verdict::NotWeightZero => "not weight zero (unbounded)",
    }
}

fn replay(path: &Path) -> Result<Outcome> {
    let file: CertificateFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let eng = Engine::new(&file.source)?;
    let v = eng.alg.parse(&file.ratio)?;
    if v != file.certificate.vector {
        return Err(Error::Contract("the ratio does not match the certificate vector".into()));
    }
    let ok = cones::replay_certificate(&file.certificate, &eng.u, &eng.tables, eng.alg.belt())?;
    let text = format!(
        "certificate for {} ({}): {}\n",
        file.ratio,
        verdict_word(file.certificate.verdict),
        if ok { "replayed" } else { "REJECTED" }
    );
    Ok(Outcome { json: json!({"ratio": file.ratio, "verdict": file.certificate.verdict, "replayed": ok}), text, negative: !ok })
}

fn cone(k: usize, n: usize, subset: Subset) -> Result<Outcome> {
    let key = format!("cone-{k}-{n}-{subset:?}");
    let seed_hash = hash_hex(serde_json::to_string(&gr::grid_seed(k, n)?.to_quiver())?.as_bytes());
    let cache = std::env::var_os("CLUSTER_CONE_CACHE").map(PathBuf::from);
    let cache_file = cache.as_ref().map(|d| d.join(format!("{key}-{}.json", &seed_hash[..16])));
    if let Some(f) = cache_file.as_ref().filter(|f| f.exists()) {
        if let Ok(cached) = serde_json::from_str::<Value>(&std::fs::read_to_string(f)?) {
            let text = cached["text"].as_str().unwrap_or_default().to_string();
            return Ok(Outcome { json: cached["json"].clone(), text, negative: false });
        }
    }
    let eng = Engine::new(&Source::Grassmannian { k, n })?;
    let Algebra::Gr(gb) = &eng.alg else { unreachable!("built from a Grassmannian source") };
    let oc = match subset {
        Subset::Pluecker => gr::pluecker_cone(gb, &eng.u)?,
        Subset::Deg2 => gr::degree_filtered_cone(gb, &eng.u, 2)?,
        Subset::All => gr::degree_filtered_cone(gb, &eng.u, usize::MAX)?,
    };
    let names = gb.names();
    let mut text = format!("Gr({k},{n}) {subset:?} cone: {} extreme rays in {} rotation orbits\n", oc.cone.rays.len(), oc.orbits.len());
    let mut orbits = Vec::new();
    for (o, members) in oc.orbits.iter().enumerate() {
        let rep = &oc.cone.rays[members[0]];
        let factors: Vec<String> = rep
            .lambda
            .iter()
            .zip(&eng.us)
            .filter(|(x, _)| x.as_str() != "0")
            .map(|(x, u)| if x == "1" { format!("v_{}", names[u.gamma]) } else { format!("v_{}^{}", names[u.gamma], x) })
            .collect();
        text.push_str(&format!("  orbit {o} ({}): {} = {}\n", members.len(), render_ratio(&rep.vector, &names), factors.join(" ")));
        orbits.push(json!({"size": members.len(), "members": members, "representative": render_ratio(&rep.vector, &names), "factors": factors}));
    }
    let rays: Vec<Value> = oc
        .cone
        .rays
        .iter()
        .map(|r| json!({"ratio": render_ratio(&r.vector, &names), "vector": r.vector, "lambda": r.lambda}))
        .collect();
    let json = json!({"gr": [k, n], "subset": format!("{subset:?}").to_lowercase(), "rays": rays, "orbits": orbits,
        "all_primitive": oc.all_primitive, "legend": eng.alg.legend()});
    if let (Some(dir), Some(f)) = (cache, cache_file) {
        std::fs::create_dir_all(dir)?;
        std::fs::write(f, serde_json::to_string(&json!({"json": json, "text": text}))?)?;
    }
    Ok(Outcome { json, text, negative: false })
}

fn factor(k: usize, n: usize, ratio: &str) -> Result<Outcome> {
    let eng = Engine::new(&Source::Grassmannian { k, n })?;
    let Algebra::Gr(gb) = &eng.alg else { unreachable!("built from a Grassmannian source") };
    let v = gb.parse(ratio)?.vector;
    let prims = gb.primitive_ratios()?;
    let names = gb.names();
    Ok(match gr::factor_into_primitives(gb, &eng.u, &eng.tables, &v)? {
        gr::Factorization::Primitives { terms } => {
            let parts: Vec<Value> = terms
                .iter()
                .map(|&(i, c)| json!({"primitive": render_ratio(&prims[i], &names), "multiplicity": c}))
                .collect();
            let mut text = format!("{} = product of {} primitive ratios\n", render_ratio(&v, &names), terms.iter().map(|t| t.1).sum::<i64>());
            for &(i, c) in &terms {
                text.push_str(&format!("  ({})^{}\n", render_ratio(&prims[i], &names), c));
            }
            Outcome { json: json!({"ratio": ratio, "bounded": true, "factors": parts}), text, negative: false }
        }
        gr::Factorization::Unbounded { certificate } => Outcome {
            text: format!("{}: {}, no factorization\n", render_ratio(&v, &names), verdict_word(certificate.verdict)),
            json: json!({"ratio": ratio, "bounded": false, "certificate": certificate}),
            negative: true,
        },
        gr::Factorization::Stuck { remainder } => Outcome {
            text: format!("no primitive factorization found; remainder {}\n", render_ratio(&remainder, &names)),
            json: json!({"ratio": ratio, "bounded": true, "factors": Value::Null, "remainder": remainder}),
            negative: true,
        },
    })
}

fn verify_suite(suite: Suite, cli: &Cli) -> Result<Outcome> {
    match suite {
        Suite::Gr48 => {
            let r = gr::verify_gr48_table(cli.samples.unwrap_or(1000), cli.sample_seed, cli.jobs)?;
            let ok = r.weight_zero && r.below_one && r.violations == 0;
            let text = format!(
                "Gr(4,8): {} stored ratios, {} dihedral/duality images, {} points each; weight zero {}, max {} ({:.6}): {}\n",
                r.ratios,
                r.images,
                r.samples,
                r.weight_zero,
                r.max,
                r.max_approx,
                if ok { "pass" } else { "FAIL" }
            );
            Ok(Outcome { json: serde_json::to_value(&r)?, text, negative: !ok })
        }
        Suite::UEquations => {
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut ok = true;
            for (t, m) in [("A1", 1), ("A2", 0), ("A3", 0), ("C2", 0), ("D4", 0)] {
                let Algebra::Plain { belt, .. } = Algebra::build(&Source::Type { dynkin: t.into(), frozen: m })? else {
                    unreachable!("catalog types are plain")
                };
                let us = uvars::u_variables(&belt)?;
                let failed = uvars::verify_u_equations(&belt, &us)?;
                ok &= failed.is_empty();
                text.push_str(&format!("{t}: {} equations, failures {:?}\n", us.len(), failed));
                rows.push(json!({"type": t, "equations": us.len(), "failed": failed}));
            }
            Ok(Outcome { json: json!({"suite": "u-equations", "results": rows, "passed": ok}), text, negative: !ok })
        }
        Suite::Appendix => {
            let entries = gr::parse_golden(gr::REPRESENTATIVES)?;
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut ok = true;
            for (k, n) in [(3, 6), (3, 7), (3, 8)] {
                let eng = Engine::new(&Source::Grassmannian { k, n })?;
                let Algebra::Gr(gb) = &eng.alg else { unreachable!("built from a Grassmannian source") };
                let prefix = format!("gr{k}{n}-");
                let mut cones_by_section = std::collections::HashMap::new();
                for e in entries.iter().filter(|e| e.section.starts_with(&prefix)) {
                    if !cones_by_section.contains_key(&e.section) {
                        let rays: Vec<Vec<i64>> = if e.section.ends_with("full") {
                            eng.us.iter().map(|u| u.ratio.clone()).collect()
                        } else {
                            let oc = if e.section.ends_with("deg2") {
                                gr::degree_filtered_cone(gb, &eng.u, 2)?
                            } else {
                                gr::pluecker_cone(gb, &eng.u)?
                            };
                            oc.cone.rays.into_iter().map(|r| r.vector).collect()
                        };
                        cones_by_section.insert(e.section.clone(), rays);
                    }
                    let c = gr::check_golden(gb, &eng.u, &cones_by_section[&e.section], e)?;
                    ok &= c.passed();
                    text.push_str(&format!("{:<14} {} : {}\n", e.section, e.ratio, if c.passed() { "pass" } else { "FAIL" }));
                    rows.push(serde_json::to_value(&c)?);
                }
            }
            Ok(Outcome { json: json!({"suite": "appendix", "results": rows, "passed": ok}), text, negative: !ok })
        }
    }
}
