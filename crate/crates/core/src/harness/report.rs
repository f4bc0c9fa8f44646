//! Report rows and their CSV form.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::solver::SolverConfig;

/// Parameters identifying a row; `None` where a field does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamTuple {
    pub gamma: f64,
    pub alpha: f64,
    pub p: f64,
    pub max_mode: Option<usize>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
}

impl ParamTuple {
    pub fn from_solver(cfg: &SolverConfig) -> Self {
        let r = cfg.regularity;
        Self { gamma: r.gamma, alpha: r.alpha, p: r.p, ..Self::default() }
    }

    pub fn modes(mut self, n: usize) -> Self {
        self.max_mode = Some(n);
        self
    }

    pub fn steps(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        let f = |a: f64, b: f64| a.total_cmp(&b);
        let of = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (a, b) => a.is_some().cmp(&b.is_some()),
        };
        f(self.gamma, other.gamma)
            .then(f(self.alpha, other.alpha))
            .then(f(self.p, other.p))
            .then(self.max_mode.cmp(&other.max_mode))
            .then(self.n.cmp(&other.n))
            .then(of(self.dt, other.dt))
            .then(self.seed.cmp(&other.seed))
    }
}

/// One measured quantity; rows with a `target` are checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub study: String,
    pub quantity: String,
    pub params: ParamTuple,
    pub value: f64,
    pub target: Option<String>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<Row>,
}

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "NA".into(), |v| v.to_string())
}

impl Report {
    pub fn measure(&mut self, study: &str, quantity: impl Into<String>, params: ParamTuple, value: f64) {
        self.rows.push(Row { study: study.into(), quantity: quantity.into(), params, value, target: None, pass: None });
    }

    pub fn check(
        &mut self,
        study: &str,
        quantity: impl Into<String>,
        params: ParamTuple,
        value: f64,
        target: impl Into<String>,
        pass: bool,
    ) {
        self.rows.push(Row {
            study: study.into(),
            quantity: quantity.into(),
            params,
            value,
            target: Some(target.into()),
            pass: Some(pass),
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn checks(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.pass.is_some())
    }

    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.checks().all(|r| r.pass == Some(true))
    }

    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.study.cmp(&b.study).then(a.quantity.cmp(&b.quantity)).then(a.params.cmp_key(&b.params))
        });
    }

    /// Sorted CSV with header
    /// `study,quantity,gamma,alpha,p,N,n,dt,seed,value,target,pass`.
    pub fn to_csv(&self) -> String {
        let mut sorted = self.clone();
        sorted.sort();
        let mut out = String::from("study,quantity,gamma,alpha,p,N,n,dt,seed,value,target,pass\n");
        for r in &sorted.rows {
            let q = &r.params;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:e},{},{}",
                r.study,
                r.quantity,
                q.gamma,
                q.alpha,
                q.p,
                opt(q.max_mode),
                opt(q.n),
                opt(q.dt),
                opt(q.seed),
                r.value,
                r.target.as_deref().unwrap_or(""),
                r.pass.map_or("", |p| if p { "pass" } else { "fail" }),
            );
        }
        out
    }
}
