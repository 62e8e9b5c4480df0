//! Checks on the shipped problem files and their exact solutions.
//!
//! The headline check rewrites each equation classically via
//! `T_a f = x^(1-a) f'` and verifies by nested central differences that the
//! declared closed form actually solves it: the numeric residual of
//! `t^(1-a) u_t + R(u) + N(u) - g` stays below 1e-5 on a 10x10 grid in
//! (0.5, 2) x (0.1, 1).

use std::fs;
use std::path::PathBuf;
use std::rc::Rc;

use cfpde::operator::OperatorExpr;
use cfpde::problem::{builtin, parse_problem, ProblemSpec};
use cfpde::rational::{rat_f64, rat_int};

type Fx = Rc<dyn Fn(f64) -> f64>;

const H: f64 = 1e-4;

/// One numeric application of the spatial conformable derivative.
fn conf_fd(f: Fx, beta: f64) -> Fx {
    Rc::new(move |x| x.powf(1.0 - beta) * (f(x + H) - f(x - H)) / (2.0 * H))
}

/// Evaluates an operator tree as a function of x, with the unknown bound to
/// a concrete profile; an oracle fully independent of the symbolic path.
fn numeric_operator(op: &OperatorExpr, u: &Fx, beta: f64) -> Fx {
    match op {
        OperatorExpr::Unknown => u.clone(),
        OperatorExpr::Const(e) => {
            let e = e.clone();
            Rc::new(move |x| e.eval_at(x).unwrap())
        }
        OperatorExpr::Scale(q, arg) => {
            let q = rat_f64(q);
            let inner = numeric_operator(arg, u, beta);
            Rc::new(move |x| q * inner(x))
        }
        OperatorExpr::SpaceDeriv { reps, arg } => {
            let mut f = numeric_operator(arg, u, beta);
            for _ in 0..*reps {
                f = conf_fd(f, beta);
            }
            f
        }
        OperatorExpr::Add(cs) => {
            let fs: Vec<Fx> = cs.iter().map(|c| numeric_operator(c, u, beta)).collect();
            Rc::new(move |x| fs.iter().map(|f| f(x)).sum())
        }
        OperatorExpr::Mul(cs) => {
            let fs: Vec<Fx> = cs.iter().map(|c| numeric_operator(c, u, beta)).collect();
            Rc::new(move |x| fs.iter().map(|f| f(x)).product())
        }
    }
}

/// `t^(1-a) u_t + R(u) + N(u) - g` at one grid point, everything numeric.
fn classical_residual(p: &ProblemSpec, x: f64, t: f64) -> f64 {
    let alpha = rat_f64(&p.alpha);
    let beta = rat_f64(&p.beta);
    let u_t = (p.exact_eval(x, t + H).unwrap() - p.exact_eval(x, t - H).unwrap()) / (2.0 * H);
    let profile: Fx = {
        let p = p.clone();
        Rc::new(move |xx| p.exact_eval(xx, t).unwrap())
    };
    let mut res = t.powf(1.0 - alpha) * u_t;
    res += numeric_operator(&p.linear, &profile, beta)(x);
    if let Some(n) = &p.nonlinear {
        res += numeric_operator(n, &profile, beta)(x);
    }
    res - p.source.eval(x, t).unwrap()
}

#[test]
fn exact_solutions_satisfy_their_equations() {
    for name in ["diffusion", "gas", "advection"] {
        let p = builtin(name).unwrap();
        let mut worst = 0.0f64;
        for i in 0..10 {
            for j in 0..10 {
                let x = 0.5 + 1.5 * (i as f64) / 9.0;
                let t = 0.1 + 0.9 * (j as f64) / 9.0;
                worst = worst.max(classical_residual(&p, x, t).abs());
            }
        }
        assert!(worst < 1e-5, "{name}: max residual {worst:e}");
    }
}

#[test]
fn exact_solutions_satisfy_classical_reductions_too() {
    let one = rat_int(1);
    for name in ["diffusion", "gas", "advection"] {
        let p = cfpde::problem::builtin_with(name, Some(one.clone()), Some(one.clone())).unwrap();
        let mut worst = 0.0f64;
        for i in 0..10 {
            for j in 0..10 {
                let x = 0.5 + 1.5 * (i as f64) / 9.0;
                let t = 0.1 + 0.9 * (j as f64) / 9.0;
                worst = worst.max(classical_residual(&p, x, t).abs());
            }
        }
        assert!(
            worst < 1e-5,
            "{name} at unit orders: max residual {worst:e}"
        );
    }
}

fn problems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

#[test]
fn shipped_files_match_builtins() {
    for name in ["diffusion", "gas", "advection"] {
        let path = problems_dir().join(format!("{name}.fpde"));
        let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
        let from_file = parse_problem(&text).unwrap();
        let from_builtin = builtin(name).unwrap();
        assert_eq!(from_file, from_builtin, "{name}.fpde drifted from builtin");
    }
}
