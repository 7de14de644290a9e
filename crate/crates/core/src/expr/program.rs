use std::sync::Arc;

use smallvec::smallvec;

use super::{Exponent, Expr, ExprError, Tower, Val};

/// Porting data plus supplementary-variable bindings.
///
/// Binding `j` is a base-level expression over the inputs and bindings `< j`; it is
/// addressed as variable `arity + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpretation {
    tower: Arc<Tower>,
    supplementary: Vec<Expr>,
}

impl Interpretation {
    pub fn new(tower: Arc<Tower>) -> Self {
        Interpretation { tower, supplementary: Vec::new() }
    }

    pub fn with_bindings(tower: Arc<Tower>, supplementary: Vec<Expr>) -> Self {
        Interpretation { tower, supplementary }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn supplementary(&self) -> &[Expr] {
        &self.supplementary
    }
}

struct Ctx<'a> {
    tower: &'a Tower,
    base: Vec<u64>,
    ported: Vec<Vec<Option<Val>>>,
}

impl<'a> Ctx<'a> {
    fn new(tower: &'a Tower, inputs: &[u64], total: usize) -> Self {
        let mut base = Vec::with_capacity(total);
        base.extend_from_slice(inputs);
        let ported = (1..tower.depth()).map(|_| vec![None; total]).collect();
        Ctx { tower, base, ported }
    }

    fn var(&mut self, i: usize, level: usize) -> Result<Val, ExprError> {
        if i >= self.base.len() {
            return Err(ExprError::UnboundVar { index: i, count: self.base.len() });
        }
        if level == 0 {
            return Ok(smallvec![self.base[i]]);
        }
        if let Some(v) = &self.ported[level - 1][i] {
            return Ok(v.clone());
        }
        let below = self.var(i, level - 1)?;
        let v = self.tower.port(level - 1, &below)?;
        self.ported[level - 1][i] = Some(v.clone());
        Ok(v)
    }

    fn eval(&mut self, e: &Expr) -> Result<Val, ExprError> {
        let level = e.level();
        match e {
            Expr::Const { value, .. } => Ok(value.clone()),
            Expr::Var { index, .. } => self.var(*index as usize, level),
            Expr::Add { terms, .. } => {
                let mut acc = self.eval(&terms[0])?;
                for t in &terms[1..] {
                    let v = self.eval(t)?;
                    acc = self.tower.add(level, &acc, &v);
                }
                Ok(acc)
            }
            Expr::Mul { factors, .. } => {
                let mut acc = self.eval(&factors[0])?;
                for t in &factors[1..] {
                    let v = self.eval(t)?;
                    acc = self.tower.mul(level, &acc, &v);
                }
                Ok(acc)
            }
            Expr::Pow { base, exp, .. } => {
                let b = self.eval(base)?;
                match exp {
                    Exponent::Int(k) => Ok(self.tower.pow_int(level, &b, *k)),
                    Exponent::Expr(x) => {
                        let k = self.eval(x)?;
                        self.tower.pow_val(level, &b, &k)
                    }
                }
            }
        }
    }
}

fn with_assignment(e: ExprError, inputs: &[u64]) -> ExprError {
    match e {
        ExprError::InvertibilityViolation { .. } => {
            ExprError::InvertibilityViolation { assignment: inputs.to_vec() }
        }
        other => other,
    }
}

/// Evaluate a single expression under `interp`, with `assignment` covering the inputs.
pub fn expr_eval(e: &Expr, assignment: &[u64], interp: &Interpretation) -> Result<Val, ExprError> {
    let total = assignment.len() + interp.supplementary.len();
    let mut ctx = Ctx::new(&interp.tower, assignment, total);
    let run = |ctx: &mut Ctx| {
        for b in &interp.supplementary {
            let v = ctx.eval(b)?;
            ctx.base.push(v[0]);
        }
        ctx.eval(e)
    };
    run(&mut ctx).map_err(|err| with_assignment(err, assignment))
}

/// Port a base value `level` times.
pub fn port_value(v: u64, level: usize, interp: &Interpretation) -> Result<Val, ExprError> {
    let mut cur: Val = smallvec![v];
    for k in 0..level {
        cur = interp.tower.port(k, &cur)?;
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureReport {
    pub points_checked: usize,
    pub violation: Option<Vec<u64>>,
}

impl ClosureReport {
    pub fn is_ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Scan `sample` and report the first assignment at which some power node with a
/// non-constant exponent meets a non-invertible base.
pub fn expr_check_closure(
    e: &Expr,
    interp: &Interpretation,
    sample: impl IntoIterator<Item = Vec<u64>>,
) -> ClosureReport {
    let mut n = 0;
    for point in sample {
        n += 1;
        if let Err(ExprError::InvertibilityViolation { assignment }) = expr_eval(e, &point, interp) {
            return ClosureReport { points_checked: n, violation: Some(assignment) };
        }
    }
    ClosureReport { points_checked: n, violation: None }
}

/// A straight-line map `R^arity → R^outputs` built from expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    interp: Interpretation,
    arity: usize,
    outputs: Vec<Expr>,
}

impl Program {
    pub fn new(
        tower: Arc<Tower>,
        arity: usize,
        bindings: Vec<Expr>,
        outputs: Vec<Expr>,
    ) -> Result<Program, ExprError> {
        for (j, b) in bindings.iter().enumerate() {
            if b.level() != 0 {
                return Err(ExprError::Structure("binding above base level".into()));
            }
            b.check(&tower, arity + j)?;
        }
        let total = arity + bindings.len();
        for o in &outputs {
            o.check(&tower, total)?;
        }
        Ok(Program { interp: Interpretation::with_bindings(tower, bindings), arity, outputs })
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.interp.tower
    }

    pub fn interpretation(&self) -> &Interpretation {
        &self.interp
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bindings(&self) -> &[Expr] {
        &self.interp.supplementary
    }

    pub fn outputs(&self) -> &[Expr] {
        &self.outputs
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluate all outputs as raw level values.
    pub fn eval_vals(&self, inputs: &[u64]) -> Result<Vec<Val>, ExprError> {
        if inputs.len() != self.arity {
            return Err(ExprError::Arity { expected: self.arity, got: inputs.len() });
        }
        let total = self.arity + self.interp.supplementary.len();
        let mut ctx = Ctx::new(&self.interp.tower, inputs, total);
        let run = |ctx: &mut Ctx| {
            for b in &self.interp.supplementary {
                let v = ctx.eval(b)?;
                ctx.base.push(v[0]);
            }
            self.outputs.iter().map(|o| ctx.eval(o)).collect::<Result<Vec<Val>, ExprError>>()
        };
        run(&mut ctx).map_err(|err| with_assignment(err, inputs))
    }

    /// Evaluate base-level outputs.
    pub fn eval(&self, inputs: &[u64]) -> Result<Vec<u64>, ExprError> {
        Ok(self.eval_vals(inputs)?.into_iter().map(|v| v[0]).collect())
    }

    /// Keep only the listed outputs, in the given order.
    pub fn select(&self, which: &[usize]) -> Program {
        Program {
            interp: self.interp.clone(),
            arity: self.arity,
            outputs: which.iter().map(|&i| self.outputs[i].clone()).collect(),
        }
    }

    pub fn has_tower(&self) -> bool {
        self.bindings().iter().chain(&self.outputs).any(Expr::has_tower)
    }

    pub fn identity(tower: Arc<Tower>, arity: usize) -> Program {
        let outputs = (0..arity).map(Expr::var).collect();
        Program::new(tower, arity, Vec::new(), outputs).expect("identity is well formed")
    }
}

/// Incremental construction of a [`Program`] by binding intermediate results.
#[derive(Clone, Debug)]
pub struct ProgramBuilder {
    tower: Arc<Tower>,
    arity: usize,
    bindings: Vec<Expr>,
}

impl ProgramBuilder {
    pub fn new(tower: Arc<Tower>, arity: usize) -> Self {
        ProgramBuilder { tower, arity, bindings: Vec::new() }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn inputs(&self) -> Vec<usize> {
        (0..self.arity).collect()
    }

    /// Bind a base-level expression and return its variable index.
    pub fn bind(&mut self, e: Expr) -> usize {
        if let Expr::Var { level: 0, index } = e {
            return index as usize;
        }
        self.bindings.push(e);
        self.arity + self.bindings.len() - 1
    }

    pub fn bind_all(&mut self, es: Vec<Expr>) -> Vec<usize> {
        es.into_iter().map(|e| self.bind(e)).collect()
    }

    /// Splice `p` in with its inputs wired to the variables `args`.
    pub fn inline(&mut self, p: &Program, args: &[usize]) -> Vec<Expr> {
        assert_eq!(args.len(), p.arity(), "inline arity mismatch");
        let mut map = args.to_vec();
        for b in p.bindings() {
            let id = self.bind(b.rename(&map));
            map.push(id);
        }
        p.outputs().iter().map(|o| o.rename(&map)).collect()
    }

    /// Inline and bind each output, returning the output variables.
    pub fn inline_bound(&mut self, p: &Program, args: &[usize]) -> Vec<usize> {
        let outs = self.inline(p, args);
        self.bind_all(outs)
    }

    pub fn finish(self, outputs: Vec<Expr>) -> Result<Program, ExprError> {
        Program::new(self.tower, self.arity, self.bindings, outputs)
    }

    pub fn finish_vars(self, outputs: &[usize]) -> Result<Program, ExprError> {
        let outs = outputs.iter().map(|&v| Expr::var(v)).collect();
        self.finish(outs)
    }
}
