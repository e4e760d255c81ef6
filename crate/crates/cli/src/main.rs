//! Batch front-end: compute exact tables, run verification suites, emit
//! machine-readable reports.
//!
//! Exit codes: 0 = all checks pass / computation done, 1 = a verification
//! failed (the report names the first failure), 2 = invalid input.

use clap::{Parser, Subcommand, ValueEnum};
use cutjoin_core::bosonfermion::{
    boson_to_fermion, decomposable_to_coords, hurwitz_wedge_factors, table_check,
};
use cutjoin_core::diffop::OpSpec;
use cutjoin_core::elsv::{
    assemble_pre_hodge, build_g, elsv_solve, magic_cancellation_check, solve_sectors,
    witten_potential,
};
use cutjoin_core::faber::{
    faber_check, ftop_build, ftop_residual, gtilde_evolution_residual, gtilde_from_g, op_a, p_md,
    psi_from_g, psi_pde_residual, psi_v0_as_ftop, reduction_correlators, seed_constants,
    t_subscript_sum, w_reduce,
};
use cutjoin_core::hurwitz::{
    connected_cached, enumerate_profiles, hurwitz_number, hurwitz_tau, oracle_hurwitz_number,
};
use cutjoin_core::kp::{
    kp_residuals, newcaj_check, odd_q_to_t, t_to_odd_p, t_to_odd_q, virasoro_check, KpReport,
};
use cutjoin_core::rat::Rat;
use cutjoin_core::series::{Caps, Monomial, Param, Series, Var};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cutjoin",
    version,
    about = "Exact Hurwitz / Hodge / KP verification suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for table-producing commands.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Size of the worker pool (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Connected single Hurwitz numbers, optionally cross-checked against
    /// the transposition-factorization oracle.
    Hurwitz {
        #[arg(long)]
        max_parts_sum: u32,
        #[arg(long)]
        max_transpositions: u32,
        #[arg(long)]
        oracle: bool,
    },
    /// Intersection numbers <tau_{d_1}..tau_{d_n}>_g of psi classes.
    Intersect {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        points: u32,
    },
    /// The full Hodge correlator table of one (genus, points) sector.
    Hodge {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        points: u32,
    },
    /// Run a verification suite; exit 0 iff everything passes.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 8)]
        max_weight: u32,
        #[arg(long, default_value_t = 6)]
        beta_order: u32,
        #[arg(long, default_value_t = 8)]
        energy_cap: u32,
        /// u-exponent window for the transformed cut-and-join suite, as LO,HI.
        #[arg(long, value_parser = parse_window)]
        u_window: Option<(i32, i32)>,
    },
    /// Emit a generating series in canonical text form.
    Series {
        #[arg(value_enum)]
        which: WhichSeries,
        #[arg(long, default_value_t = true)]
        emit: bool,
        #[arg(long, default_value_t = 6)]
        max_weight: u32,
        #[arg(long, default_value_t = 6)]
        beta_order: u32,
    },
}

#[derive(Clone, Copy, ValueEnum, Debug)]
enum Suite {
    Kp,
    Kdv,
    Virasoro,
    Newcaj,
    Theorem4,
    LambdaG,
    Bosonfermion,
    Reduction,
    All,
}

fn parse_window(s: &str) -> Result<(i32, i32), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: i32 = lo.trim().parse().map_err(|_| "bad lower end")?;
    let hi: i32 = hi.trim().parse().map_err(|_| "bad upper end")?;
    if lo > hi {
        return Err(format!("empty window [{lo}, {hi}]"));
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichSeries {
    H,
    G,
    Ftop,
}

#[derive(Serialize)]
struct KeyValue {
    key: String,
    value: String,
}

/// The stable report schema: exact values survive as strings.
#[derive(Serialize)]
struct Report {
    kind: String,
    params: BTreeMap<String, serde_json::Value>,
    results: Vec<KeyValue>,
    verified: bool,
    failures: Vec<String>,
}

impl Report {
    fn new(kind: &str) -> Self {
        Report {
            kind: kind.to_string(),
            params: BTreeMap::new(),
            results: Vec::new(),
            verified: true,
            failures: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.results.push(KeyValue {
            key: key.into(),
            value: value.to_string(),
        });
    }

    fn fail(&mut self, what: impl Into<String>) {
        self.verified = false;
        self.failures.push(what.into());
    }

    fn absorb(&mut self, label: &str, reports: &[KpReport]) {
        for r in reports {
            self.push(
                format!("{label}:{}", r.id),
                if r.passed { "pass" } else { "fail" },
            );
            if !r.passed {
                self.fail(format!(
                    "{label}:{} first offender {}",
                    r.id,
                    r.first_offender().unwrap_or_default()
                ));
            }
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // a later init error only means a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    match &cli.command {
        Command::Hurwitz {
            max_parts_sum,
            max_transpositions,
            oracle,
        } => cmd_hurwitz(cli, *max_parts_sum, *max_transpositions, *oracle),
        Command::Intersect { genus, points } => cmd_intersect(cli, *genus, *points),
        Command::Hodge { genus, points } => cmd_hodge(cli, *genus, *points),
        Command::Verify {
            suite,
            max_weight,
            beta_order,
            energy_cap,
            u_window,
        } => cmd_verify(
            cli,
            *suite,
            *max_weight,
            *beta_order,
            *energy_cap,
            *u_window,
        ),
        Command::Series {
            which,
            emit: _,
            max_weight,
            beta_order,
        } => cmd_series(cli, *which, *max_weight, *beta_order),
    }
}

fn cmd_hurwitz(cli: &Cli, max_b: u32, max_m: u32, oracle: bool) -> Result<bool, String> {
    if oracle && max_b > 8 {
        return Err("the oracle is limited to part sums <= 8".into());
    }
    let conn = connected_cached(max_b, max_m);
    let profiles = enumerate_profiles(max_b, max_m);
    let mut rows = Vec::new();
    let mut verified = true;
    for p in &profiles {
        let value = hurwitz_number(&conn, p).map_err(|e| e.to_string())?;
        let oracle_value = if oracle {
            let v = oracle_hurwitz_number(p).map_err(|e| e.to_string())?;
            if v != value {
                verified = false;
            }
            Some(v)
        } else {
            None
        };
        rows.push((p.clone(), value, oracle_value));
    }
    let text = match cli.format {
        Format::Csv => {
            let mut s = String::from(if oracle {
                "genus,parts,m,value,oracle\n"
            } else {
                "genus,parts,m,value\n"
            });
            for (p, v, o) in &rows {
                let parts: Vec<String> = p.parts.iter().map(|b| b.to_string()).collect();
                s.push_str(&format!(
                    "{},{},{},{}",
                    p.genus,
                    parts.join("+"),
                    p.transpositions(),
                    v
                ));
                if let Some(o) = o {
                    s.push_str(&format!(",{o}"));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut report = Report::new("hurwitz");
            report.param("max_parts_sum", max_b);
            report.param("max_transpositions", max_m);
            report.param("oracle", oracle);
            for (p, v, o) in &rows {
                let parts: Vec<String> = p.parts.iter().map(|b| b.to_string()).collect();
                let key = format!("h[g={};{}]", p.genus, parts.join(","));
                report.push(key.clone(), v);
                if let Some(o) = o {
                    if o != v {
                        report.fail(format!("{key}: flow {v} oracle {o}"));
                    }
                }
            }
            report.verified = verified;
            serde_json::to_string_pretty(&report).unwrap() + "\n"
        }
    };
    emit(&cli.out, &text).map_err(|e| e.to_string())?;
    Ok(verified)
}

/// Connected-series caps large enough to reach full rank for one sector.
fn caps_for_sector(g: u32, n: u32) -> (u32, u32) {
    let dim = 3 * g + n;
    let weight = (3 * dim / 2 + n + 2).clamp(8, 18);
    let beta = 2 * g + n + weight;
    (weight, beta)
}

fn cmd_intersect(cli: &Cli, g: u32, n: u32) -> Result<bool, String> {
    let (w, b) = caps_for_sector(g, n);
    let conn = connected_cached(w, b);
    let table = elsv_solve(g, n, &conn).map_err(|e| e.to_string())?;
    let mut report = Report::new("intersect");
    report.param("genus", g);
    report.param("points", n);
    for ((j, ks, genus), v) in table.iter() {
        if *j != 0 || *genus != g {
            continue;
        }
        let ds: Vec<String> = ks.iter().map(|d| d.to_string()).collect();
        report.push(format!("tau[{}]", ds.join(",")), v);
    }
    let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
    emit(&cli.out, &text).map_err(|e| e.to_string())?;
    Ok(true)
}

fn cmd_hodge(cli: &Cli, g: u32, n: u32) -> Result<bool, String> {
    let (w, b) = caps_for_sector(g, n);
    let conn = connected_cached(w, b);
    let table = elsv_solve(g, n, &conn).map_err(|e| e.to_string())?;
    let text = serde_json::to_string_pretty(&table.rows()).unwrap() + "\n";
    emit(&cli.out, &text).map_err(|e| e.to_string())?;
    Ok(true)
}

fn cmd_series(cli: &Cli, which: WhichSeries, w: u32, b: u32) -> Result<bool, String> {
    let text = match which {
        WhichSeries::H => connected_cached(w, b).to_string() + "\n",
        WhichSeries::G => {
            let beta = (5 * w + 2) / 3 + 1;
            let conn = connected_cached(w, beta);
            let g = build_g(w, w as i32, &conn).map_err(|e| e.to_string())?;
            let g = magic_cancellation_check(&g).map_err(|e| e.to_string())?;
            g.to_string() + "\n"
        }
        WhichSeries::Ftop => {
            let conn = connected_cached(8, 13);
            let mut table = elsv_solve(1, 1, &conn).map_err(|e| e.to_string())?;
            table.merge(elsv_solve(2, 1, &conn).map_err(|e| e.to_string())?);
            let seeds = seed_constants(&table, 2).map_err(|e| e.to_string())?;
            ftop_build(w.min(8), &seeds).series().to_string() + "\n"
        }
    };
    emit(&cli.out, &text).map_err(|e| e.to_string())?;
    Ok(true)
}

fn cmd_verify(
    cli: &Cli,
    suite: Suite,
    w: u32,
    b: u32,
    e: u32,
    u_window: Option<(i32, i32)>,
) -> Result<bool, String> {
    let mut report = Report::new("verify");
    report.param("suite", format!("{suite:?}").to_lowercase());
    report.param("max_weight", w);
    report.param("beta_order", b);
    report.param("energy_cap", e);
    if let Some((lo, hi)) = u_window {
        report.param("u_window", format!("[{lo},{hi}]"));
    }
    let verbose = std::env::var("CUTJOIN_LOG").is_ok();
    let timed = |label: &str,
                 f: &mut dyn FnMut(&mut Report) -> Result<(), String>,
                 report: &mut Report|
     -> Result<(), String> {
        let started = std::time::Instant::now();
        f(report)?;
        if verbose {
            eprintln!("[cutjoin] {label}: {:?}", started.elapsed());
        }
        Ok(())
    };
    let run_one = |suite: Suite, report: &mut Report| -> Result<(), String> {
        match suite {
            Suite::Kp => timed("kp", &mut |r| verify_kp(r, w, b), report),
            Suite::Kdv => timed("kdv", &mut |r| verify_kdv(r, w), report),
            Suite::Virasoro => timed("virasoro", &mut |r| verify_virasoro(r, w), report),
            Suite::Newcaj => timed("newcaj", &mut |r| verify_newcaj(r, w, u_window), report),
            Suite::Theorem4 => timed("theorem4", &mut |r| verify_theorem4(r, w), report),
            Suite::LambdaG => timed("lambda-g", &mut |r| verify_lambda_g(r), report),
            Suite::Bosonfermion => timed(
                "bosonfermion",
                &mut |r| verify_bosonfermion(r, e, b),
                report,
            ),
            Suite::Reduction => timed("reduction", &mut |r| verify_reduction(r), report),
            Suite::All => unreachable!(),
        }
    };
    match suite {
        Suite::All => {
            for s in [
                Suite::Kp,
                Suite::Kdv,
                Suite::Virasoro,
                Suite::Newcaj,
                Suite::Theorem4,
                Suite::LambdaG,
                Suite::Bosonfermion,
                Suite::Reduction,
            ] {
                run_one(s, &mut report)?;
            }
        }
        other => run_one(other, &mut report)?,
    }
    let text = serde_json::to_string_pretty(&report).unwrap() + "\n";
    emit(&cli.out, &text).map_err(|e| e.to_string())?;
    Ok(report.verified)
}

fn verify_kp(report: &mut Report, w: u32, b: u32) -> Result<(), String> {
    // the Schur fixture tau = 1 + s_3, residuals trusted to weight w
    let caps = Caps::weight_only(w + 6);
    let s3 =
        cutjoin_core::bosonfermion::schur(&cutjoin_core::bosonfermion::Partition::new(vec![3]))
            .with_trusted_caps(caps.clone());
    let f = Series::one(caps)
        .add(&s3)
        .log()
        .map_err(|e| e.to_string())?;
    report.absorb("kp:schur-fixture", &kp_residuals(&f));
    // the Hurwitz series, residuals trusted to weight w in every beta order
    let conn = connected_cached(w + 6, b);
    report.absorb("kp:hurwitz", &kp_residuals(&conn));
    Ok(())
}

fn verify_kdv(report: &mut Report, w: u32) -> Result<(), String> {
    let deep = w.max(6) + 6;
    let beta = (4 * deep + 2) / 3 + 1;
    let conn = connected_cached(deep, beta);
    let g = magic_cancellation_check(&build_g(deep, 0, &conn).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let g0 = g.filter_terms(|m| m.param_exp(Param::U) == 0);
    let f_t = odd_q_to_t(&g0).map_err(|e| e.to_string())?;
    report.absorb("kdv", &kp_residuals(&t_to_odd_q(&f_t)));
    let tau03 = g0
        .coefficient_unchecked(&Monomial::var(Var::q(1), 3))
        .to_string();
    report.push("kdv:<tau_0^3>/3!", &tau03);
    if tau03 != "1/6" {
        report.fail(format!("<tau_0^3>/3! = {tau03}, expected 1/6"));
    }
    let tau1 = g0
        .coefficient_unchecked(&Monomial::var(Var::q(3), 1))
        .to_string();
    report.push("kdv:<tau_1>", &tau1);
    if tau1 != "1/24" {
        report.fail(format!("<tau_1> = {tau1}, expected 1/24"));
    }
    Ok(())
}

fn verify_virasoro(report: &mut Report, w: u32) -> Result<(), String> {
    let deep = w + 7;
    let conn = connected_cached(deep, 2 * deep);
    let table = solve_sectors(deep, 0, &conn).map_err(|e| e.to_string())?;
    let f = t_to_odd_p(&witten_potential(&table, deep).map_err(|e| e.to_string())?);
    for m in -1..=2i64 {
        let r = virasoro_check(&f, m).map_err(|e| e.to_string())?;
        report.absorb("virasoro", &[r]);
    }
    Ok(())
}

fn verify_newcaj(report: &mut Report, w: u32, u_window: Option<(i32, i32)>) -> Result<(), String> {
    let w = w.min(8);
    let u_cap = match u_window {
        Some((lo, hi)) => {
            if lo > 0 {
                return Err("the u-window must contain 0".into());
            }
            hi.max(1)
        }
        None => 2 * w as i32,
    };
    let beta = (u_cap as u32 + 4 * w + 2) / 3 + 1;
    let conn = connected_cached(w, beta);
    let g = magic_cancellation_check(&build_g(w, u_cap, &conn).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let r = newcaj_check(&g).map_err(|e| e.to_string())?;
    report.absorb("newcaj", &[r]);
    Ok(())
}

fn verify_theorem4(report: &mut Report, w: u32) -> Result<(), String> {
    let w = w.min(10);
    // solving the correlator shells needs more part tuples than the
    // comparison weight itself admits
    let conn = connected_cached(w + 4, 2 * (w + 4));
    let g = magic_cancellation_check(&build_g(w, w as i32, &conn).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let table = solve_sectors(w, w as i32, &conn).map_err(|e| e.to_string())?;
    let assembled = assemble_pre_hodge(&table, w, w as i32).map_err(|e| e.to_string())?;
    let g_trunc = g.truncated(assembled.caps()).map_err(|e| e.to_string())?;
    let equal = g_trunc == assembled;
    report.push(
        "theorem4:series-equality",
        if equal { "pass" } else { "fail" },
    );
    report.push("theorem4:terms-compared", assembled.len());
    if !equal {
        let diff = g_trunc.sub(&assembled);
        report.fail(format!(
            "build_G != assembled series, first mismatch {}",
            diff.first_term()
                .map(|(m, c)| format!("{c}*{m}"))
                .unwrap_or_default()
        ));
    }
    Ok(())
}

fn verify_lambda_g(report: &mut Report) -> Result<(), String> {
    let conn = connected_cached(9, 16);
    let mut table = solve_sectors(6, 6, &conn).map_err(|e| e.to_string())?;
    for (g, n) in [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)] {
        table.merge(elsv_solve(g, n, &conn).map_err(|e| e.to_string())?);
    }
    let seeds = seed_constants(&table, 2).map_err(|e| e.to_string())?;
    let ftop = ftop_build(6, &seeds);
    let residual = ftop_residual(&ftop);
    report.push(
        "lambda-g:ftop-equation",
        if residual.is_zero() { "pass" } else { "fail" },
    );
    if !residual.is_zero() {
        report.fail("F^top equation residual nonzero".to_string());
    }
    let mut ap_ok = true;
    for m in 1..=4u32 {
        for d in 0..=4u32 {
            let lhs = op_a(&p_md(m, d, 30));
            let rhs = p_md(m + 1, d + 1, 30).scale(&Rat::from_int(m as i64));
            ap_ok &= lhs.same_terms(&rhs);
        }
    }
    report.push("lambda-g:AP-identity", if ap_ok { "pass" } else { "fail" });
    if !ap_ok {
        report.fail("A P_{m,d} = m P_{m+1,d+1} fails".to_string());
    }
    for (g, n) in [(1u32, 1u32), (1, 2), (1, 3), (2, 1), (2, 2)] {
        let ok = faber_check(g, n, &table).map_err(|e| e.to_string())?;
        report.push(
            format!("lambda-g:faber({g},{n})"),
            if ok { "pass" } else { "fail" },
        );
        if !ok {
            report.fail(format!("Faber closed form fails at ({g},{n})"));
        }
    }
    let g9 = magic_cancellation_check(&build_g(9, 7, &conn).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let gt = gtilde_from_g(&g9, 3).map_err(|e| e.to_string())?;
    let evo = gtilde_evolution_residual(&gt).map_err(|e| e.to_string())?;
    let evo_trusted = evo
        .residual
        .filter_terms(|m| m.weight() <= 3 && m.param_exp(Param::V) <= 1);
    report.push(
        "lambda-g:gtilde-evolution",
        if evo_trusted.is_zero() {
            "pass"
        } else {
            "fail"
        },
    );
    if !evo_trusted.is_zero() {
        report.fail("G~ evolution residual nonzero".to_string());
    }
    let psi = psi_from_g(&g9, 2).map_err(|e| e.to_string())?;
    let pde = psi_pde_residual(&psi, 2);
    report.push(
        "lambda-g:psi-pde",
        if pde.residual.is_zero() {
            "pass"
        } else {
            "fail"
        },
    );
    if !pde.residual.is_zero() {
        report.fail("Psi equation residual nonzero".to_string());
    }
    let v0 = psi_v0_as_ftop(&psi).filter_terms(|m| t_subscript_sum(m) <= 2 && m.degree() <= 6);
    let fslice = ftop
        .series()
        .filter_terms(|m| t_subscript_sum(m) <= 2 && m.degree() <= 6);
    let equal = v0.same_terms(&fslice);
    report.push(
        "lambda-g:psi-v0-vs-ftop",
        if equal { "pass" } else { "fail" },
    );
    if !equal {
        report.fail("Psi|_{v=0} differs from F^top".to_string());
    }
    Ok(())
}

fn verify_bosonfermion(report: &mut Report, e: u32, b: u32) -> Result<(), String> {
    let cap = e.min(6);
    for k in [-3i64, -2, -1, 1, 2, 3] {
        let ok = table_check(&OpSpec::A(k), cap);
        report.push(
            format!("bosonfermion:table-a({k})"),
            if ok { "pass" } else { "fail" },
        );
        if !ok {
            report.fail(format!("table row a_{k}"));
        }
    }
    for m in [-2i64, -1, 0, 1, 2] {
        let ok = table_check(&OpSpec::Lambda(m), cap);
        report.push(
            format!("bosonfermion:table-lambda({m})"),
            if ok { "pass" } else { "fail" },
        );
        if !ok {
            report.fail(format!("table row Lambda_{m}"));
        }
    }
    for m in [-1i64, 0, 1] {
        let ok = table_check(&OpSpec::M(m), cap);
        report.push(
            format!("bosonfermion:table-m({m})"),
            if ok { "pass" } else { "fail" },
        );
        if !ok {
            report.fail(format!("table row M_{m}"));
        }
    }
    let beta = b.min(4) as i32;
    let factors = hurwitz_wedge_factors(e as usize, beta, e as i64);
    let minors = decomposable_to_coords(&factors, e).map_err(|err| err.to_string())?;
    let coords = boson_to_fermion(&hurwitz_tau(e, beta as u32), e);
    let equal = minors.same_coords(&coords);
    report.push(
        "bosonfermion:wedge-vs-tau",
        if equal { "pass" } else { "fail" },
    );
    report.push("bosonfermion:partitions-compared", minors.coords().len());
    if !equal {
        report.fail("Pluecker minors differ from the coordinates of e^H".to_string());
    }
    Ok(())
}

fn verify_reduction(report: &mut Report) -> Result<(), String> {
    let conn = connected_cached(16, 24);
    let mut table = solve_sectors(15, 0, &conn).map_err(|e| e.to_string())?;
    table.merge(solve_sectors(8, 8, &conn).map_err(|e| e.to_string())?);
    let f = witten_potential(&table, 15).map_err(|e| e.to_string())?;
    let fcal = w_reduce(&f, 4).map_err(|e| e.to_string())?;
    let reduced = reduction_correlators(&fcal, 15);
    let mut compared = 0usize;
    for ((j, ks, g), expect) in table.iter() {
        if 3 * (*g as i64) - 3 + ks.len() as i64 > 4 {
            continue;
        }
        match reduced.get(*j, ks, *g) {
            Some(v) if v == expect => compared += 1,
            other => {
                report.fail(format!(
                    "<lambda_{j} tau_{ks:?}>_{g}: reduction {:?}, elsv {expect}",
                    other.map(|v| v.to_string())
                ));
            }
        }
    }
    report.push("reduction:correlators-compared", compared);
    report.push(
        "reduction:agreement",
        if report.failures.is_empty() {
            "pass"
        } else {
            "fail"
        },
    );
    Ok(())
}
