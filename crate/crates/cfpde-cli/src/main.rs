use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use cfpde::cadm::{adomian_polynomials_formal, cadm_solve};
use cfpde::crdtm::{crdtm_solve, residual_coeffs};
use cfpde::parse::parse_operator;
use cfpde::problem::{builtin_with, parse_problem_source, ProblemSpec};
use cfpde::rational::{parse_rat, rat, Rat};
use cfpde::Error;

use cfpde_cli::report::{self, Method};
use cfpde_cli::GridSpec;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_CHECK: u8 = 4;

const USAGE: &str = "\
cfpde - series solvers for conformable fractional PDEs

USAGE:
    cfpde <COMMAND> [FLAGS]

COMMANDS:
    solve      evaluate the truncated series on a grid, emit CSV
    terms      print the decomposition terms u_n / spectra U_n
    adomian    print Adomian polynomials for a nonlinearity string
    check      verify the residual vanishes at every computed grade
    compare    tabulate both methods against the exact solution, emit CSV

FLAGS:
    --problem <file|name>        problem file or built-in (diffusion, gas, advection)
    --method <cadm|crdtm|both>   which solver(s) to run (default: both)
    --order <n>                  truncation order m (default: 7)
    --alpha <p/q>                override the time order
    --beta <p/q>                 override the space order
    --grid x=a:b:n,t=c:d:n       evaluation grid (default: x=0.1:2:50,t=0:1:50)
    --out <path>                 write CSV to a file instead of stdout
    --format csv                 output format (csv is the only format)
    --nonlinearity <expr>        nonlinearity for `adomian`, e.g. \"u*Db(u)+u^2\"
    --assert-equal               compare: fail unless the methods agree pointwise

EXIT CODES:
    0 success, 1 usage, 2 parse error, 3 solver error, 4 check failed
";

struct Options {
    command: String,
    problem: Option<String>,
    method: Method,
    order: usize,
    alpha: Option<Rat>,
    beta: Option<Rat>,
    grid: GridSpec,
    out: Option<String>,
    nonlinearity: Option<String>,
    assert_equal: bool,
}

fn usage_error(msg: &str) -> u8 {
    eprintln!("error: {msg}\n");
    eprint!("{USAGE}");
    EXIT_USAGE
}

fn parse_args(args: &[String]) -> Result<Options, String> {
    let mut opts = Options {
        command: String::new(),
        problem: None,
        method: Method::Both,
        order: 7,
        alpha: None,
        beta: None,
        grid: GridSpec::default(),
        out: None,
        nonlinearity: None,
        assert_equal: false,
    };
    let Some(command) = args.first() else {
        return Err("missing command".to_string());
    };
    opts.command = command.clone();
    let mut i = 1;
    let value = |i: &mut usize, flag: &str| -> Result<String, String> {
        *i += 1;
        args.get(*i)
            .cloned()
            .ok_or_else(|| format!("flag {flag} needs a value"))
    };
    while i < args.len() {
        match args[i].as_str() {
            "--problem" => opts.problem = Some(value(&mut i, "--problem")?),
            "--method" => opts.method = Method::parse(&value(&mut i, "--method")?)?,
            "--order" => {
                let v = value(&mut i, "--order")?;
                opts.order = v
                    .parse()
                    .map_err(|_| format!("bad order `{v}` (expected a non-negative integer)"))?;
            }
            "--alpha" => {
                let v = value(&mut i, "--alpha")?;
                opts.alpha = Some(parse_rat(&v)?);
            }
            "--beta" => {
                let v = value(&mut i, "--beta")?;
                opts.beta = Some(parse_rat(&v)?);
            }
            "--grid" => {
                let v = value(&mut i, "--grid")?;
                opts.grid = GridSpec::parse(&v)?;
            }
            "--out" => opts.out = Some(value(&mut i, "--out")?),
            "--format" => {
                let v = value(&mut i, "--format")?;
                if v != "csv" {
                    return Err(format!("unsupported format `{v}` (csv only)"));
                }
            }
            "--nonlinearity" => opts.nonlinearity = Some(value(&mut i, "--nonlinearity")?),
            "--assert-equal" => opts.assert_equal = true,
            "--help" | "-h" => return Err("help".to_string()),
            other => return Err(format!("unknown flag `{other}`")),
        }
        i += 1;
    }
    Ok(opts)
}

/// Loads `--problem`: an existing path parses as a file, otherwise the name
/// must be a built-in.
fn load_problem(opts: &Options) -> Result<(ProblemSpec, String), (u8, String)> {
    let Some(spec) = &opts.problem else {
        return Err((EXIT_USAGE, "missing --problem".to_string()));
    };
    if Path::new(spec).exists() {
        let text = fs::read_to_string(spec)
            .map_err(|e| (EXIT_PARSE, format!("{spec}: cannot read: {e}")))?;
        let source =
            parse_problem_source(&text).map_err(|e| (EXIT_PARSE, format!("{spec}:{e}")))?;
        let p = source
            .resolve(opts.alpha.as_ref(), opts.beta.as_ref())
            .map_err(|e| (EXIT_PARSE, format!("{spec}:{e}")))?;
        Ok((p, spec.clone()))
    } else {
        let p = builtin_with(spec, opts.alpha.clone(), opts.beta.clone())
            .map_err(|e| (EXIT_PARSE, format!("{spec}: {e}")))?;
        Ok((p, format!("builtin:{spec}")))
    }
}

fn solver_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => EXIT_PARSE,
        _ => EXIT_SOLVER,
    }
}

fn with_output<F>(out: &Option<String>, f: F) -> Result<(), (u8, String)>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)
                .map_err(|e| (EXIT_SOLVER, format!("{path}: cannot create: {e}")))?;
            f(&mut file).map_err(|e| (EXIT_SOLVER, format!("{path}: write failed: {e}")))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| (EXIT_SOLVER, format!("stdout: write failed: {e}")))
        }
    }
}

fn cmd_solve(opts: &Options) -> Result<u8, (u8, String)> {
    let (p, locus) = load_problem(opts)?;
    let rows = report::solve_table(&p, opts.order, &opts.grid, opts.method)
        .map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
    with_output(&opts.out, |w| report::write_csv(w, &rows))?;
    Ok(EXIT_OK)
}

fn cmd_terms(opts: &Options) -> Result<u8, (u8, String)> {
    let (p, locus) = load_problem(opts)?;
    let mut out = String::new();
    out.push_str(&format!(
        "# problem `{}`  alpha = {}  beta = {}  order = {}\n",
        p.name, p.alpha, p.beta, opts.order
    ));
    if opts.method.wants_cadm() {
        let sol =
            cadm_solve(&p, opts.order).map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
        for (n, term) in sol.terms.iter().enumerate() {
            out.push_str(&format!("u_{n} = {term}\n"));
        }
    }
    if opts.method.wants_crdtm() {
        let s =
            crdtm_solve(&p, opts.order).map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
        for (k, c) in s.coeffs().iter().enumerate() {
            out.push_str(&format!("U_{k} = {c}\n"));
        }
    }
    print!("{out}");
    Ok(EXIT_OK)
}

fn cmd_adomian(opts: &Options) -> Result<u8, (u8, String)> {
    let Some(src) = &opts.nonlinearity else {
        return Err((EXIT_USAGE, "missing --nonlinearity".to_string()));
    };
    let alpha = opts.alpha.clone().unwrap_or_else(|| rat(1, 2));
    let beta = opts.beta.clone().unwrap_or_else(|| alpha.clone());
    let op = parse_operator(src, &alpha, &beta)
        .map_err(|e| (EXIT_PARSE, format!("--nonlinearity: {e}")))?;
    let polys = adomian_polynomials_formal(&op, opts.order, &beta)
        .map_err(|e| (solver_code(&e), e.to_string()))?;
    for (n, a) in polys.iter().enumerate() {
        println!("A_{n} = {a}");
    }
    Ok(EXIT_OK)
}

fn cmd_check(opts: &Options) -> Result<u8, (u8, String)> {
    let (p, locus) = load_problem(opts)?;
    let m = opts.order;
    let mut failed = false;
    let mut run = |label: &str, series: &cfpde::TSeries| -> Result<(), (u8, String)> {
        let residuals = residual_coeffs(&p, series, m)
            .map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
        let bad: Vec<usize> = residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_zero())
            .map(|(k, _)| k)
            .collect();
        if bad.is_empty() {
            println!(
                "{label}: residual vanishes at grades 0..{m} of `{}`",
                p.name
            );
        } else {
            failed = true;
            println!(
                "{label}: residual NONZERO at grades {bad:?} of `{}`",
                p.name
            );
        }
        Ok(())
    };
    if opts.method.wants_cadm() {
        let sol = cadm_solve(&p, m).map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
        run("cadm", &sol.series)?;
    }
    if opts.method.wants_crdtm() {
        let s = crdtm_solve(&p, m).map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
        run("crdtm", &s)?;
    }
    Ok(if failed { EXIT_CHECK } else { EXIT_OK })
}

fn cmd_compare(opts: &Options) -> Result<u8, (u8, String)> {
    let (p, locus) = load_problem(opts)?;
    let report = report::error_table(&p, opts.order, &opts.grid)
        .map_err(|e| (solver_code(&e), format!("{locus}: {e}")))?;
    with_output(&opts.out, |w| report::write_csv(w, &report.rows))?;
    match (report.max_err_cadm, report.max_err_crdtm) {
        (Some(a), Some(r)) => {
            eprintln!("max |cadm - exact|  = {}", report::fmt_float(a));
            eprintln!("max |crdtm - exact| = {}", report::fmt_float(r));
        }
        _ => eprintln!("no exact solution declared; error columns left empty"),
    }
    eprintln!(
        "max relative |cadm - crdtm| = {}",
        report::fmt_float(report.max_method_gap)
    );
    if opts.assert_equal && report.max_method_gap > 1e-12 {
        eprintln!("method equivalence check failed (gap above 1e-12)");
        return Ok(EXIT_CHECK);
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let opts = match parse_args(&args) {
        Ok(o) => o,
        Err(msg) if msg == "help" => {
            print!("{USAGE}");
            return ExitCode::from(EXIT_OK);
        }
        Err(msg) => return ExitCode::from(usage_error(&msg)),
    };
    let result = match opts.command.as_str() {
        "solve" => cmd_solve(&opts),
        "terms" => cmd_terms(&opts),
        "adomian" => cmd_adomian(&opts),
        "check" => cmd_check(&opts),
        "compare" => cmd_compare(&opts),
        other => return ExitCode::from(usage_error(&format!("unknown command `{other}`"))),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err((EXIT_USAGE, msg)) => ExitCode::from(usage_error(&msg)),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
