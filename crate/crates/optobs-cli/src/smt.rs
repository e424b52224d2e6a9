//! External SMT solver sessions: one child process per session speaking
//! SMT-LIB 2.6 on its standard streams, with incremental assertion,
//! push/pop, driver-enforced timeouts and exact model extraction.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use optobs_core::rational::{parse_rat, Rat};
use optobs_core::script::ConstraintScript;

/// Environment variable overriding the solver command line.
pub const SOLVER_CMD_ENV: &str = "OOP_SOLVER_CMD";

/// How to launch and drive the solver process.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Program and arguments; the process must keep reading SMT-LIB
    /// commands from stdin.
    pub command: Vec<String>,
    /// Per-query wall-clock limit, enforced by killing the process.
    pub timeout: Duration,
    /// Options passed as `(set-option :key value)` at session start.
    pub options: Vec<(String, String)>,
}

impl SolverConfig {
    pub fn new(command: Vec<String>) -> SolverConfig {
        SolverConfig {
            command,
            timeout: Duration::from_secs(180),
            options: Vec::new(),
        }
    }

    /// Resolves the solver command: the `OOP_SOLVER_CMD` environment
    /// variable, then a `z3` binary on the path, then the repository's
    /// Node-based REPL.
    pub fn resolve() -> Option<SolverConfig> {
        if let Ok(cmd) = std::env::var(SOLVER_CMD_ENV) {
            let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if !parts.is_empty() {
                return Some(SolverConfig::new(parts));
            }
        }
        if Command::new("z3")
            .arg("-version")
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map(|s| s.success())
            .unwrap_or(false)
        {
            return Some(SolverConfig::new(vec![
                "z3".to_string(),
                "-in".to_string(),
            ]));
        }
        for root in [
            option_env!("CARGO_MANIFEST_DIR").map(|d| Path::new(d).join("../..")),
            std::env::current_exe()
                .ok()
                .and_then(|p| p.parent().map(|d| d.join("../.."))),
        ]
        .into_iter()
        .flatten()
        {
            let repl = root.join("tools/z3-repl/main.mjs");
            let deps: PathBuf = root.join("tools/z3-repl/node_modules/z3-solver");
            if repl.exists() && deps.exists() {
                return Some(SolverConfig::new(vec![
                    "node".to_string(),
                    repl.display().to_string(),
                ]));
            }
        }
        None
    }
}

/// Verdict of one `check-sat`, with the model on `sat`.
#[derive(Debug, Clone)]
pub struct SolverVerdict {
    pub status: SmtStatus,
    pub model: Option<BTreeMap<String, ModelValue>>,
    pub wall: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmtStatus {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

/// Exact model value: solver rationals parse losslessly.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelValue {
    Bool(bool),
    Rational(Rat),
}

impl ModelValue {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ModelValue::Bool(b) => Some(*b),
            ModelValue::Rational(q) => Some(!num_traits::Zero::is_zero(q)),
        }
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        match self {
            ModelValue::Rational(q) => Some(q),
            ModelValue::Bool(_) => None,
        }
    }
}

/// Failures of the solver driver.
#[derive(Debug, thiserror::Error)]
pub enum SmtError {
    #[error("failed to spawn solver `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("io error talking to the solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver process died; stderr: {diagnostics}")]
    Died { diagnostics: String },
    #[error("solver reported an error: {0}")]
    Solver(String),
    #[error("cannot parse model token `{0}`")]
    BadModel(String),
    #[error("session is no longer usable (killed after a timeout)")]
    Dead,
    #[error("no solver configured; set {SOLVER_CMD_ENV} or install z3")]
    NoSolver,
}

/// One exclusive solver session.
pub struct SmtSession {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    stderr: Arc<Mutex<String>>,
    timeout: Duration,
    options: Vec<(String, String)>,
    marker: u64,
    dead: bool,
}

impl SmtSession {
    /// Spawns the solver, applies the session options, and asserts the
    /// header of every script (logic + model production).
    pub fn open(cfg: &SolverConfig) -> Result<SmtSession, SmtError> {
        let (program, args) = cfg
            .command
            .split_first()
            .ok_or(SmtError::NoSolver)?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SmtError::Spawn {
                command: cfg.command.join(" "),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let stderr_pipe = child.stderr.take().expect("piped stderr");

        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let stderr_clone = Arc::clone(&stderr);
        std::thread::spawn(move || {
            let mut buf = String::new();
            let mut reader = BufReader::new(stderr_pipe);
            let _ = reader.read_to_string(&mut buf);
            if let Ok(mut sink) = stderr_clone.lock() {
                sink.push_str(&buf);
            }
        });

        let mut session = SmtSession {
            child,
            stdin,
            lines: rx,
            stderr,
            timeout: cfg.timeout,
            options: cfg.options.clone(),
            marker: 0,
            dead: false,
        };
        // soft solver-side limit in addition to the driver-side kill
        let ms = cfg.timeout.as_millis();
        session.send(&format!("(set-option :timeout {ms})\n"))?;
        for (key, value) in &cfg.options {
            session.send(&format!("(set-option :{key} {value})\n"))?;
        }
        // swallow any "unsupported option" chatter
        let _ = session.sync(Duration::from_secs(10))?;
        Ok(session)
    }

    fn send(&mut self, text: &str) -> Result<(), SmtError> {
        if self.dead {
            return Err(SmtError::Dead);
        }
        self.stdin.write_all(text.as_bytes())?;
        self.stdin.flush()?;
        Ok(())
    }

    fn diagnostics(&self) -> String {
        self.stderr
            .lock()
            .map(|s| s.clone())
            .unwrap_or_default()
    }

    /// Writes an echo marker and collects every output line up to it.
    /// Returns `None` on deadline expiry (the process is killed).
    fn sync_with_deadline(&mut self, limit: Duration) -> Result<Option<Vec<String>>, SmtError> {
        self.marker += 1;
        let marker = format!("::sync-{}::", self.marker);
        self.send(&format!("(echo \"{marker}\")\n"))?;
        let deadline = Instant::now() + limit;
        let mut collected = Vec::new();
        loop {
            let now = Instant::now();
            if now >= deadline {
                self.kill();
                return Ok(None);
            }
            match self.lines.recv_timeout(deadline - now) {
                Ok(Ok(line)) => {
                    if line.trim() == marker {
                        return Ok(Some(collected));
                    }
                    collected.push(line);
                }
                Ok(Err(e)) => return Err(SmtError::Io(e)),
                Err(RecvTimeoutError::Timeout) => {
                    self.kill();
                    return Ok(None);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.dead = true;
                    return Err(SmtError::Died {
                        diagnostics: self.diagnostics(),
                    });
                }
            }
        }
    }

    fn sync(&mut self, limit: Duration) -> Result<Vec<String>, SmtError> {
        match self.sync_with_deadline(limit)? {
            Some(lines) => Ok(lines),
            None => Err(SmtError::Died {
                diagnostics: format!("no response within {limit:?}; killed"),
            }),
        }
    }

    /// Sends raw SMT-LIB text and fails on any `(error ...)` response.
    pub fn assert_raw(&mut self, text: &str) -> Result<(), SmtError> {
        self.send(text)?;
        let lines = self.sync(self.timeout)?;
        for line in lines {
            if line.trim_start().starts_with("(error") {
                return Err(SmtError::Solver(line));
            }
        }
        Ok(())
    }

    /// Asserts a rendered constraint script (header included).
    pub fn assert_script(&mut self, script: &ConstraintScript) -> Result<(), SmtError> {
        self.assert_raw(&script.render())
    }

    pub fn push(&mut self) -> Result<(), SmtError> {
        self.assert_raw("(push 1)\n")
    }

    pub fn pop(&mut self) -> Result<(), SmtError> {
        self.assert_raw("(pop 1)\n")
    }

    /// Clears all assertions, declarations and the logic, then re-applies
    /// the session options. Queries separated by `reset` keep the solver in
    /// its one-shot mode, which matters for nonlinear arithmetic: scopes
    /// pushed after `set-logic` switch Z3 to the incremental core, which is
    /// drastically slower on these encodings.
    pub fn reset(&mut self) -> Result<(), SmtError> {
        self.send("(reset)\n")?;
        let ms = self.timeout.as_millis();
        self.send(&format!("(set-option :timeout {ms})\n"))?;
        for (key, value) in self.options.clone() {
            self.send(&format!("(set-option :{key} {value})\n"))?;
        }
        let _ = self.sync(Duration::from_secs(10))?;
        Ok(())
    }

    /// `check-sat` with the driver-enforced timeout. On expiry the process
    /// is killed and the verdict is `Timeout`.
    pub fn check(&mut self) -> Result<SolverVerdict, SmtError> {
        let start = Instant::now();
        self.send("(check-sat)\n")?;
        let lines = match self.sync_with_deadline(self.timeout)? {
            Some(lines) => lines,
            None => {
                return Ok(SolverVerdict {
                    status: SmtStatus::Timeout,
                    model: None,
                    wall: start.elapsed(),
                })
            }
        };
        let mut status = None;
        for line in &lines {
            match line.trim() {
                "sat" => status = Some(SmtStatus::Sat),
                "unsat" => status = Some(SmtStatus::Unsat),
                "unknown" | "timeout" => status = Some(SmtStatus::Unknown),
                other if other.starts_with("(error") => {
                    return Err(SmtError::Solver(other.to_string()))
                }
                _ => {}
            }
        }
        let status = status.ok_or_else(|| SmtError::Died {
            diagnostics: format!("no verdict in {lines:?}; stderr: {}", self.diagnostics()),
        })?;
        Ok(SolverVerdict {
            status,
            model: None,
            wall: start.elapsed(),
        })
    }

    /// Retrieves values for the given names; the last `check` must have
    /// been `sat`.
    pub fn get_values(
        &mut self,
        names: &[String],
    ) -> Result<BTreeMap<String, ModelValue>, SmtError> {
        if names.is_empty() {
            return Ok(BTreeMap::new());
        }
        let mut cmd = String::from("(get-value (");
        for (i, n) in names.iter().enumerate() {
            if i > 0 {
                cmd.push(' ');
            }
            cmd.push_str(n);
        }
        cmd.push_str("))\n");
        self.send(&cmd)?;
        let lines = self.sync(self.timeout)?;
        let mut text = lines.join(" ");
        if text.trim_start().starts_with("(error") {
            return Err(SmtError::Solver(text));
        }
        if text.contains("root-obj") {
            // algebraic values: re-print rounded decimals (marked `?`)
            self.assert_raw("(set-option :pp.decimal true)(set-option :pp.decimal_precision 25)\n")?;
            self.send(&cmd)?;
            let lines = self.sync(self.timeout)?;
            self.assert_raw("(set-option :pp.decimal false)\n")?;
            text = lines.join(" ");
        }
        parse_model(&text)
    }

    /// `check-sat` followed by model extraction of `names` on sat.
    pub fn check_with_model(&mut self, names: &[String]) -> Result<SolverVerdict, SmtError> {
        let mut verdict = self.check()?;
        if verdict.status == SmtStatus::Sat {
            verdict.model = Some(self.get_values(names)?);
        }
        Ok(verdict)
    }

    fn kill(&mut self) {
        self.dead = true;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// Ends the session, terminating the process.
    pub fn close(mut self) {
        let _ = self.send("(exit)\n");
        let _ = self.child.wait();
    }
}

impl Drop for SmtSession {
    fn drop(&mut self) {
        let _ = self.send("(exit)\n");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Two-stage relax-and-repair: check the script without its budget
/// assertions; if satisfiable, push the budget onto the solver stack and
/// re-check. An unsatisfiable relaxation decides immediately, since dropping
/// the budget over-approximates the feasible set.
pub fn relax_repair_solve(
    session: &mut SmtSession,
    script: &ConstraintScript,
) -> Result<SolverVerdict, SmtError> {
    session.assert_raw(&script.render_without_budget())?;
    let names = script.var_names();
    let relaxed = session.check()?;
    match relaxed.status {
        SmtStatus::Unsat | SmtStatus::Unknown | SmtStatus::Timeout => Ok(relaxed),
        SmtStatus::Sat => {
            session.push()?;
            let budget = script.render_budget_only();
            if !budget.is_empty() {
                session.assert_raw(&budget)?;
            }
            let mut verdict = session.check()?;
            if verdict.status == SmtStatus::Sat {
                verdict.model = Some(session.get_values(&names)?);
            }
            verdict.wall += relaxed.wall;
            Ok(verdict)
        }
    }
}

#[derive(Debug, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp, SmtError> {
    if *pos >= tokens.len() {
        return Err(SmtError::BadModel("<eof>".to_string()));
    }
    let tok = &tokens[*pos];
    *pos += 1;
    if tok == "(" {
        let mut items = Vec::new();
        while *pos < tokens.len() && tokens[*pos] != ")" {
            items.push(parse_sexp(tokens, pos)?);
        }
        if *pos >= tokens.len() {
            return Err(SmtError::BadModel("unbalanced parentheses".to_string()));
        }
        *pos += 1; // consume ')'
        Ok(Sexp::List(items))
    } else if tok == ")" {
        Err(SmtError::BadModel(")".to_string()))
    } else {
        Ok(Sexp::Atom(tok.clone()))
    }
}

/// Parses a numeric or boolean solver value. Rational literals of the forms
/// `n`, `(- n)`, `(/ a b)`, `(- (/ a b))` and decimals parse exactly.
fn parse_value(sexp: &Sexp) -> Result<ModelValue, SmtError> {
    match sexp {
        Sexp::Atom(a) => match a.as_str() {
            "true" => Ok(ModelValue::Bool(true)),
            "false" => Ok(ModelValue::Bool(false)),
            // a trailing `?` marks a decimal rounded from an algebraic value
            lit => parse_rat(lit.trim_end_matches('?'))
                .map(ModelValue::Rational)
                .map_err(|_| SmtError::BadModel(lit.to_string())),
        },
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), inner] if op == "-" => match parse_value(inner)? {
                ModelValue::Rational(q) => Ok(ModelValue::Rational(-q)),
                ModelValue::Bool(_) => Err(SmtError::BadModel("- bool".to_string())),
            },
            [Sexp::Atom(op), a, b] if op == "/" => {
                let num = match parse_value(a)? {
                    ModelValue::Rational(q) => q,
                    _ => return Err(SmtError::BadModel("/ bool".to_string())),
                };
                let den = match parse_value(b)? {
                    ModelValue::Rational(q) => q,
                    _ => return Err(SmtError::BadModel("/ bool".to_string())),
                };
                if num_traits::Zero::is_zero(&den) {
                    return Err(SmtError::BadModel("division by zero".to_string()));
                }
                Ok(ModelValue::Rational(num / den))
            }
            _ => Err(SmtError::BadModel(format!("{sexp:?}"))),
        },
    }
}

/// Parses a `get-value` response: `((name value) (name value) ...)`.
fn parse_model(text: &str) -> Result<BTreeMap<String, ModelValue>, SmtError> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let sexp = parse_sexp(&tokens, &mut pos)?;
    let Sexp::List(pairs) = sexp else {
        return Err(SmtError::BadModel(text.to_string()));
    };
    let mut model = BTreeMap::new();
    for pair in pairs {
        let Sexp::List(kv) = pair else {
            return Err(SmtError::BadModel(format!("{pair:?}")));
        };
        if kv.len() != 2 {
            return Err(SmtError::BadModel(format!("{kv:?}")));
        }
        let Sexp::Atom(name) = &kv[0] else {
            return Err(SmtError::BadModel(format!("{kv:?}")));
        };
        model.insert(name.clone(), parse_value(&kv[1])?);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use optobs_core::rational::ratio;

    #[test]
    fn model_parsing_handles_all_rational_forms() {
        let model = parse_model(
            "((a 3) (b (- 3)) (c (/ 1 3)) (d (- (/ 7 2))) (e 2.5) (f (/ 1.0 3.0)) (g true) (h false))",
        )
        .unwrap();
        assert_eq!(model["a"], ModelValue::Rational(ratio(3, 1)));
        assert_eq!(model["b"], ModelValue::Rational(ratio(-3, 1)));
        assert_eq!(model["c"], ModelValue::Rational(ratio(1, 3)));
        assert_eq!(model["d"], ModelValue::Rational(ratio(-7, 2)));
        assert_eq!(model["e"], ModelValue::Rational(ratio(5, 2)));
        assert_eq!(model["f"], ModelValue::Rational(ratio(1, 3)));
        assert_eq!(model["g"], ModelValue::Bool(true));
        assert_eq!(model["h"], ModelValue::Bool(false));
    }

    #[test]
    fn bad_tokens_are_reported() {
        assert!(parse_model("((a what))").is_err());
        assert!(parse_model("((a 1)").is_err());
    }
}
