mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riccflat::ode::{phi_from_q, scan_q0, solve_q, Termination, TheoremParams};
use riccflat::phi::{convexity_check, BuiltinPhi, ConvexityReport};
use riccflat::verify::{
    scenario_catalog, verify_ricci_flat, xcheck, ConditionReport, FormSpec, MetricSpec, PointReport, Role,
    XcheckReport, SCHEMA_VERSION,
};
use riccflat::ErrorKind;
use serde::Serialize;

use config::{CommandName, ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "riccflat", version, about = "Curvature of (alpha, beta)-metrics and Ricci-flat profile verification")]
struct Cli {
    /// Cap on worker threads for sample evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List scenarios and builtin profiles.
    Catalog {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Curvature quantities at one point and direction.
    Compute(RunArgs),
    /// Integrate the Ricci-flat equation for Q and reconstruct phi.
    SolvePhi(SolveArgs),
    /// Check the theorem's hypotheses and conclusion on random samples.
    Verify(RunArgs),
    /// Cross-validate spray formulas, H-trace routes and jets.
    Xcheck(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// TOML or JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<f64>,
    /// riemannian, randers, quadratic or ode
    #[arg(long)]
    phi: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    b2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q0: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta_s: Option<f64>,
    /// Comma-separated chart coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Comma-separated tangent vector components.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    direction: Option<Vec<f64>>,
    /// Write the JSON report here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print JSON instead of the text summary.
    #[arg(long)]
    json: bool,
    /// Print the effective configuration (file merged with flags) and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Write the solution grid here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Solve for each listed Q(0) and tabulate interval and convexity.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    scan_q0: Option<Vec<f64>>,
}

impl RunArgs {
    fn config(&self, running: CommandName, csv: Option<PathBuf>) -> Result<RunConfig, Failure> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        file.check_command(running)?;
        let flags = RunConfig {
            command: None,
            scenario: self.scenario.clone(),
            scenario_spec: None,
            eps: self.eps,
            phi: self.phi.clone(),
            c1: self.c1,
            c2: self.c2,
            tau: self.tau,
            n: self.n,
            b2: self.b2,
            q0: self.q0,
            delta: self.delta,
            tol: self.tol,
            samples: self.samples,
            seed: self.seed,
            delta_s: self.delta_s,
            point: self.point.clone(),
            direction: self.direction.clone(),
            output: self.output.clone(),
            csv,
        };
        Ok(file.merge(flags))
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Degeneracy(String),
    Solver(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Degeneracy(_) => 3,
            Failure::Solver(_) => 4,
            Failure::Verification(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m)
            | Failure::Degeneracy(m)
            | Failure::Solver(m)
            | Failure::Verification(m)
            | Failure::Io(m) => m,
        }
    }
}

impl From<riccflat::Error> for Failure {
    fn from(e: riccflat::Error) -> Self {
        let m = e.to_string();
        match e.kind() {
            ErrorKind::Config => Failure::Config(m),
            ErrorKind::Degeneracy => Failure::Degeneracy(m),
            ErrorKind::Solver => Failure::Solver(m),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_catalog(format: Format) -> Result<String, Failure> {
    #[derive(Serialize)]
    struct Model {
        key: &'static str,
        formula: &'static str,
    }
    #[derive(Serialize)]
    struct Catalog {
        schema_version: u32,
        scenarios: Vec<riccflat::verify::Scenario>,
        phi_models: Vec<Model>,
    }
    let scenarios = scenario_catalog();
    let mut phi_models: Vec<Model> = BuiltinPhi::ALL.iter().map(|m| Model { key: m.key(), formula: m.formula() }).collect();
    phi_models.push(Model { key: "ode", formula: "numerical solution of the Ricci-flat equation with Q(0) = q0" });
    if format == Format::Json {
        return Ok(to_json(&Catalog { schema_version: SCHEMA_VERSION, scenarios, phi_models }));
    }
    let mut out = String::from("scenarios:\n");
    for sc in &scenarios {
        let metric = match &sc.metric {
            MetricSpec::Euclidean { n } => format!("euclidean n={n}"),
            MetricSpec::Sphere { n, radius } => format!("sphere n={n} r={radius}"),
        };
        let form = match &sc.form {
            FormSpec::Constant { b } => format!("constant b={b:?}"),
            FormSpec::Hopf { eps } => format!("hopf eps={eps}"),
            FormSpec::PerturbedHopf { eps, eta } => format!("perturbed hopf eps={eps} eta={eta}"),
        };
        let p = &sc.params;
        let role = match sc.role {
            Role::Positive => "positive",
            Role::NegativeControl => "negative control",
        };
        writeln!(out, "  {:<24} {role}", sc.name).unwrap();
        writeln!(
            out,
            "      {metric}; {form}; phi {}; c1={} c2={} tau={} b2={}",
            sc.phi.label(),
            p.c1,
            p.c2,
            p.tau,
            p.b2
        )
        .unwrap();
        writeln!(out, "      {}", sc.description).unwrap();
    }
    out.push_str("phi models:\n");
    for m in &phi_models {
        writeln!(out, "  {:<12} {}", m.key, m.formula).unwrap();
    }
    Ok(out)
}

#[derive(Serialize)]
struct ComputeReport {
    schema_version: u32,
    scenario: String,
    phi: String,
    point: PointReport,
}

fn cmd_compute(args: &RunArgs) -> Result<String, Failure> {
    let cfg = args.config(CommandName::Compute, None)?;
    let sc = cfg.resolve_scenario()?;
    let n = sc.dim();
    let x = cfg.point.clone().unwrap_or_else(|| vec![0.0; n]);
    let y = cfg.direction.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    });
    for (what, v) in [("point", &x), ("direction", &y)] {
        if v.len() != n {
            return Err(Failure::Config(format!("{what} has {} components, the scenario needs {n}", v.len())));
        }
    }
    let prep = sc.prepare()?;
    let pt = prep.curvature_at(&x, &y)?;
    let rep = ComputeReport { schema_version: SCHEMA_VERSION, scenario: sc.name.clone(), phi: prep.phi.name(), point: pt };
    if let Some(path) = &cfg.output {
        write_file(path, &to_json(&rep))?;
    }
    if args.json {
        return Ok(to_json(&rep));
    }
    let p = &rep.point;
    let c = &p.curvature;
    let mut out = String::new();
    writeln!(out, "scenario {}  phi {}", rep.scenario, rep.phi).unwrap();
    writeln!(out, "x = {:?}", p.x).unwrap();
    writeln!(out, "y = {:?}", p.y).unwrap();
    writeln!(out, "alpha = {}", p.alpha).unwrap();
    writeln!(out, "beta = {}", p.beta).unwrap();
    writeln!(out, "s = {}", p.s).unwrap();
    writeln!(out, "b2 = {}", p.b2).unwrap();
    writeln!(out, "F = {}", p.f).unwrap();
    writeln!(out, "G^i = {:?}", p.g).unwrap();
    writeln!(out, "G_alpha^i = {:?}", p.g_alpha).unwrap();
    writeln!(out, "Ric = {}", c.ric).unwrap();
    writeln!(out, "Ric_alpha = {}", c.ric_alpha).unwrap();
    writeln!(out, "H^i_i = {}", c.h_trace).unwrap();
    writeln!(out, "Gamma = {}", c.gamma_factor).unwrap();
    Ok(out)
}

#[derive(Serialize)]
struct SolveSummary {
    schema_version: u32,
    params: TheoremParams,
    q0: f64,
    delta: f64,
    tol: f64,
    interval: (f64, f64),
    terminations: [Termination; 2],
    accepted_steps: usize,
    rejected_steps: usize,
    dq0: f64,
    node_residual: f64,
    convexity: ConvexityReport,
}

fn cmd_solve_phi(args: &SolveArgs) -> Result<(String, Option<Failure>), Failure> {
    let cfg = args.run.config(CommandName::SolvePhi, args.csv.clone())?;
    if cfg.scenario.is_some() || cfg.scenario_spec.is_some() || cfg.phi.is_some() {
        return Err(Failure::Config("solve-phi takes c1, c2, n, b2 (or eps), q0, delta and tol; not a scenario".into()));
    }
    let params = cfg.ode_params();
    params.validate_ode()?;
    let q0 = cfg.q0.unwrap_or(1.0);
    let delta = cfg.delta.unwrap_or(0.01);
    let tol = cfg.tol.unwrap_or(riccflat::ode::DEFAULT_TOL);

    if let Some(q0s) = &args.scan_q0 {
        let entries = scan_q0(&params, q0s, delta, tol);
        let out = if args.run.json {
            to_json(&entries)
        } else {
            let mut out = String::from("q0            interval                  reached  covered  margin\n");
            for e in &entries {
                match (&e.interval, &e.convexity) {
                    (Some((lo, hi)), Some(c)) => writeln!(
                        out,
                        "{:<13} [{lo:.6}, {hi:.6}]  {:<7}  {:<7}  {:.3e}",
                        e.q0, e.reached, c.covered, c.worst_margin
                    )
                    .unwrap(),
                    _ => writeln!(out, "{:<13} error: {}", e.q0, e.error.as_deref().unwrap_or("unknown")).unwrap(),
                }
            }
            out
        };
        if let Some(path) = &cfg.output {
            write_file(path, &to_json(&entries))?;
        }
        return Ok((out, None));
    }

    let sol = solve_q(&params, q0, delta, tol)?;
    let phi = phi_from_q(sol.clone())?;
    let csv = phi.csv()?;
    let convexity = convexity_check(&phi, params.b(), 401)?;
    let dq0 = sol.nodes.iter().find(|n| n.s == 0.0).map(|n| n.dq).unwrap_or(f64::NAN);
    let summary = SolveSummary {
        schema_version: SCHEMA_VERSION,
        params,
        q0,
        delta,
        tol,
        interval: sol.interval,
        terminations: sol.terminations,
        accepted_steps: sol.accepted_steps,
        rejected_steps: sol.rejected_steps,
        dq0,
        node_residual: sol.node_residual(&params),
        convexity,
    };
    if let Some(path) = &cfg.output {
        write_file(path, &to_json(&summary))?;
    }
    let text = if args.run.json {
        to_json(&summary)
    } else {
        let mut out = String::new();
        let c = &summary.convexity;
        writeln!(out, "interval [{}, {}]", summary.interval.0, summary.interval.1).unwrap();
        for (side, t) in ["backward", "forward"].iter().zip(&summary.terminations) {
            writeln!(out, "{side}: {t:?}").unwrap();
        }
        writeln!(out, "steps accepted {} rejected {}", summary.accepted_steps, summary.rejected_steps).unwrap();
        writeln!(out, "Q(0) = {}  Q'(0) = {}", q0, dq0).unwrap();
        writeln!(out, "node residual {:e}", summary.node_residual).unwrap();
        let verdict = if c.ok {
            "ok".to_string()
        } else if !c.covered {
            format!("not established: solution covers [{}, {}], not all of [-b, b]", c.scanned.0, c.scanned.1)
        } else {
            "fails".to_string()
        };
        writeln!(
            out,
            "convexity {verdict}; worst margin {:e} at s = {}, rho = {}",
            c.worst_margin, c.worst_s, c.worst_rho
        )
        .unwrap();
        out
    };
    let failure = (!sol.reached_both()).then(|| {
        let t = sol.terminations.iter().find(|t| !t.reached()).expect("a leg stopped early");
        Failure::Solver(format!("integration stopped early: {t:?}"))
    });
    match &cfg.csv {
        Some(path) => {
            write_file(path, &csv)?;
            Ok((text, failure))
        }
        None => {
            eprint!("{text}");
            Ok((csv, failure))
        }
    }
}

fn verify_text(rep: &ConditionReport) -> String {
    let mut out = String::new();
    writeln!(out, "scenario {}  phi {}  samples {}  seed {}", rep.scenario, rep.phi, rep.samples, rep.seed).unwrap();
    let p = &rep.params;
    writeln!(out, "c1 = {} c2 = {} n = {} b2 = {} tau = {}", p.c1, p.c2, p.n, p.b2, p.tau).unwrap();
    writeln!(out, "|s| <= {}", rep.s_limit).unwrap();
    let c = &rep.conditions;
    for (label, r) in [
        ("(a) alpha Ricci", c.a),
        ("(b) r_ij", c.b),
        ("(c) s_j", c.c),
        ("(d) t_ij", c.d),
        ("(e) phi equation", c.e),
        ("divergence identity", c.divergence),
        ("Ric = 0", c.ricci_flat),
    ] {
        let state = if r.enabled { pass_word(r.pass) } else { "off" };
        writeln!(out, "  {label:<20} {:>11.3e}  tol {:.0e}  {state}", r.residual, r.tolerance).unwrap();
    }
    let a = &rep.audits;
    writeln!(out, "audits:").unwrap();
    writeln!(out, "  spray equivalence   {:.3e}", a.spray_equivalence).unwrap();
    writeln!(out, "  decomposition       {:.3e}", a.decomposition).unwrap();
    writeln!(out, "  ricci identity      {:.3e}", a.ricci_identity).unwrap();
    writeln!(out, "  final display       {:.3e}", a.final_display).unwrap();
    if let Some(h) = a.h_formula {
        writeln!(out, "  h formula           {h:.3e}").unwrap();
    }
    writeln!(out, "hypotheses hold: {}; implication holds: {}", rep.hypotheses_hold, rep.implication_holds).unwrap();
    for d in &rep.diagnostics {
        writeln!(out, "note: {d}").unwrap();
    }
    writeln!(out, "result: {}", pass_word(rep.passed)).unwrap();
    out
}

fn cmd_verify(args: &RunArgs) -> Result<(String, Option<Failure>), Failure> {
    let cfg = args.config(CommandName::Verify, None)?;
    let prep = cfg.resolve_scenario()?.prepare()?;
    let rep = verify_ricci_flat(&prep, &cfg.verify_options())?;
    if let Some(path) = &cfg.output {
        write_file(path, &to_json(&rep))?;
    }
    let text = if args.json { to_json(&rep) } else { verify_text(&rep) };
    let failure = (!rep.passed).then(|| Failure::Verification("verification failed".into()));
    Ok((text, failure))
}

fn xcheck_text(rep: &XcheckReport) -> String {
    let t = &rep.tolerances;
    let mut out = String::new();
    writeln!(out, "scenario {}  phi {}  samples {}  seed {}", rep.scenario, rep.phi, rep.samples, rep.seed).unwrap();
    writeln!(out, "  spray direct vs closed form  {:.3e}  tol {:.0e}", rep.spray, t.spray).unwrap();
    writeln!(out, "  Ric - Ric_alpha - H          {:.3e}  tol {:.0e}", rep.h_tensor, t.h).unwrap();
    match rep.h_formula {
        Some(h) => writeln!(out, "  H formula vs tensor          {h:.3e}  tol {:.0e}", t.h).unwrap(),
        None => writeln!(out, "  H formula vs tensor          skipped").unwrap(),
    }
    writeln!(out, "  metric jets vs FD            {:.3e}  tol {:.0e}", rep.fd_metric, t.fd).unwrap();
    writeln!(out, "  form jets vs FD              {:.3e}  tol {:.0e}", rep.fd_form, t.fd).unwrap();
    writeln!(out, "  g_ij vs FD Hessian           {:.3e}  tol {:.0e}", rep.fd_fundamental, t.fd).unwrap();
    writeln!(out, "result: {}", pass_word(rep.passed)).unwrap();
    out
}

fn cmd_xcheck(args: &RunArgs) -> Result<(String, Option<Failure>), Failure> {
    let cfg = args.config(CommandName::Xcheck, None)?;
    let prep = cfg.resolve_scenario()?.prepare()?;
    let rep = xcheck(&prep, &cfg.verify_options())?;
    if let Some(path) = &cfg.output {
        write_file(path, &to_json(&rep))?;
    }
    let text = if args.json { to_json(&rep) } else { xcheck_text(&rep) };
    let failure = (!rep.passed).then(|| Failure::Verification("cross-check deviation above tolerance".into()));
    Ok((text, failure))
}

fn run(cli: Cli) -> Result<(String, Option<Failure>), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads {n}: {e}")))?;
    }
    let effective = |a: &RunArgs, name, csv| -> Result<(String, Option<Failure>), Failure> {
        let cfg = RunConfig { command: Some(name), ..a.config(name, csv)? };
        Ok((if a.json { cfg.to_json() + "\n" } else { cfg.to_toml() }, None))
    };
    match &cli.command {
        Command::Compute(a) | Command::Verify(a) | Command::Xcheck(a) if a.print_config => {
            let name = match cli.command {
                Command::Compute(_) => CommandName::Compute,
                Command::Verify(_) => CommandName::Verify,
                _ => CommandName::Xcheck,
            };
            return effective(a, name, None);
        }
        Command::SolvePhi(a) if a.run.print_config => return effective(&a.run, CommandName::SolvePhi, a.csv.clone()),
        _ => {}
    }
    match &cli.command {
        Command::Catalog { format } => cmd_catalog(*format).map(|s| (s, None)),
        Command::Compute(a) => cmd_compute(a).map(|s| (s, None)),
        Command::SolvePhi(a) => cmd_solve_phi(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Xcheck(a) => cmd_xcheck(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, failure)) => {
            print!("{text}");
            match failure {
                None => ExitCode::SUCCESS,
                Some(f) => {
                    eprintln!("riccflat: {}", f.message());
                    ExitCode::from(f.code())
                }
            }
        }
        Err(f) => {
            eprintln!("riccflat: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
