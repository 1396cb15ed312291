//! A modular recurrent network that runs an automaton.
//!
//! Layers:
//!
//! * MCL: two ramp units holding `(y1, y2)`.
//! * BSL: Heaviside units. Threshold units compare each coordinate with the
//!   strip boundaries, one select unit per cell fires when the point is in
//!   that cell, and one latch unit per cell keeps the thresholds quiet while
//!   the new point is written back.
//! * LTL: two ramp units per cell computing `a + λ·y`, gated by the cell's
//!   select unit.
//!
//! One macro step takes four synchronous micro steps:
//! thresholds fire, one select unit fires, the gated LTL pair computes the
//! image while the MCL is cleared, the MCL collects the image.

use std::io::Write;
use std::ops::Range;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::nda::{nda_orbit, Nda, PhasePoint};

pub const MICRO_STEPS_PER_MACRO: usize = 4;

/// Gain used to silence threshold units and clear the MCL.
const GAIN: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    /// `Θ(s) = 1` iff `s ≥ 0`.
    Heaviside,
    /// `s` clamped to `[0, 1]`.
    Ramp,
}

impl Activation {
    pub fn apply(self, s: f64) -> f64 {
        match self {
            Activation::Heaviside => {
                if s >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Ramp => s.clamp(0.0, 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Mcl,
    Bsl,
    Ltl,
}

/// What a unit does. `coord` is 0 for `y1` (input) and 1 for `y2` (stack).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitRole {
    Mcl { coord: usize },
    Threshold { coord: usize, k: usize },
    Select { cell: usize },
    Latch { cell: usize },
    Ltl { cell: usize, coord: usize },
    /// Units of a hand-assembled network.
    Unassigned,
}

impl UnitRole {
    pub fn layer(self) -> Option<Layer> {
        match self {
            UnitRole::Mcl { .. } => Some(Layer::Mcl),
            UnitRole::Threshold { .. } | UnitRole::Select { .. } | UnitRole::Latch { .. } => Some(Layer::Bsl),
            UnitRole::Ltl { .. } => Some(Layer::Ltl),
            UnitRole::Unassigned => None,
        }
    }
}

impl std::fmt::Display for UnitRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnitRole::Mcl { coord } => write!(f, "mcl y{}", coord + 1),
            UnitRole::Threshold { coord, k } => write!(f, "threshold y{} k={k}", coord + 1),
            UnitRole::Select { cell } => write!(f, "select cell {cell}"),
            UnitRole::Latch { cell } => write!(f, "latch cell {cell}"),
            UnitRole::Ltl { cell, coord } => write!(f, "ltl cell {cell} y{}", coord + 1),
            UnitRole::Unassigned => f.write_str("unassigned"),
        }
    }
}

/// Weights, biases and activations of a network, plus the unit roles.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    n: usize,
    /// Row-major `n × n`; row `i` holds the weights into unit `i`.
    weights: Vec<f64>,
    biases: Vec<f64>,
    activations: Vec<Activation>,
    roles: Vec<UnitRole>,
    micro_steps_per_macro: usize,
    strips: [usize; 2],
}

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    /// Margin added to every boundary test.
    pub eps_b: f64,
    pub unit_budget: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            eps_b: 1e-12,
            unit_budget: 1 << 16,
        }
    }
}

impl NetworkSpec {
    /// A network without layer structure, mostly for testing the update rule.
    pub fn from_parts(weights: Vec<f64>, biases: Vec<f64>, activations: Vec<Activation>) -> Result<Self> {
        let n = biases.len();
        if weights.len() != n * n || activations.len() != n {
            return Err(crate::error::domain("weights must be n×n and activations n long"));
        }
        Ok(NetworkSpec {
            n,
            weights,
            biases,
            activations,
            roles: vec![UnitRole::Unassigned; n],
            micro_steps_per_macro: 1,
            strips: [1, 1],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, to: usize, from: usize) -> f64 {
        self.weights[to * self.n + from]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn roles(&self) -> &[UnitRole] {
        &self.roles
    }

    pub fn micro_steps_per_macro(&self) -> usize {
        self.micro_steps_per_macro
    }

    pub fn units_in(&self, layer: Layer) -> Vec<usize> {
        (0..self.n).filter(|&u| self.roles[u].layer() == Some(layer)).collect()
    }

    /// Unit range of the per-cell select units.
    pub fn select_units(&self) -> Range<usize> {
        let cells = self.strips[0] * self.strips[1];
        let start = 2 + self.strips[0] + 1 + self.strips[1] + 1;
        start..start + cells
    }

    /// Select units at 1 in `x`.
    pub fn active_select_units(&self, x: &NeuralState) -> Vec<usize> {
        self.select_units().filter(|&u| x.x[u] == 1.0).collect()
    }

    /// Counts per role kind, for the export.
    pub fn decomposition(&self) -> Vec<(&'static str, usize)> {
        let count = |f: fn(&UnitRole) -> bool| self.roles.iter().filter(|r| f(r)).count();
        vec![
            ("mcl", count(|r| matches!(r, UnitRole::Mcl { .. }))),
            ("bsl threshold", count(|r| matches!(r, UnitRole::Threshold { .. }))),
            ("bsl select", count(|r| matches!(r, UnitRole::Select { .. }))),
            ("bsl latch", count(|r| matches!(r, UnitRole::Latch { .. }))),
            ("ltl", count(|r| matches!(r, UnitRole::Ltl { .. }))),
        ]
    }

    /// Checks the wiring rules: MCL units are ramps, BSL units Heaviside,
    /// LTL units feed only the MCL, each select unit gates the LTL pair of
    /// its own cell and no other LTL unit.
    pub fn check_structure(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Consistency(msg));
        for u in 0..self.n {
            let role = self.roles[u];
            let want = match role.layer() {
                Some(Layer::Bsl) => Activation::Heaviside,
                Some(_) => Activation::Ramp,
                None => return bad(format!("unit {u} has no layer")),
            };
            if self.activations[u] != want {
                return bad(format!("unit {u} ({role}) has activation {:?}", self.activations[u]));
            }
            for v in 0..self.n {
                let w = self.weight(v, u);
                if w == 0.0 {
                    continue;
                }
                match (role, self.roles[v]) {
                    (UnitRole::Ltl { .. }, target) if target.layer() != Some(Layer::Mcl) => {
                        return bad(format!("ltl unit {u} feeds {target}"));
                    }
                    (UnitRole::Select { cell }, UnitRole::Ltl { cell: c, .. }) if c != cell => {
                        return bad(format!("select unit {u} gates ltl unit {v} of cell {c}"));
                    }
                    (UnitRole::Threshold { .. } | UnitRole::Latch { .. }, UnitRole::Ltl { .. }) => {
                        return bad(format!("unit {u} ({role}) feeds ltl unit {v}"));
                    }
                    _ => {}
                }
            }
        }
        for cell in 0..self.strips[0] * self.strips[1] {
            let select = self.select_units().start + cell;
            let gated = (0..self.n)
                .filter(|&v| matches!(self.roles[v], UnitRole::Ltl { .. }) && self.weight(v, select) != 0.0)
                .count();
            if gated != 2 {
                return bad(format!("select unit of cell {cell} gates {gated} ltl units"));
            }
        }
        Ok(())
    }

    /// Unit table as CSV: unit, layer, role, activation, bias.
    pub fn write_units_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["unit", "layer", "role", "activation", "bias"])?;
        for u in 0..self.n {
            let layer = match self.roles[u].layer() {
                Some(Layer::Mcl) => "MCL",
                Some(Layer::Bsl) => "BSL",
                Some(Layer::Ltl) => "LTL",
                None => "",
            };
            let act = match self.activations[u] {
                Activation::Heaviside => "heaviside",
                Activation::Ramp => "ramp",
            };
            w.write_record([
                u.to_string(),
                layer.to_string(),
                self.roles[u].to_string(),
                act.to_string(),
                self.biases[u].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Non-zero weights as CSV: to, from, weight.
    pub fn write_weights_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["to", "from", "weight"])?;
        for to in 0..self.n {
            for from in 0..self.n {
                let x = self.weight(to, from);
                if x != 0.0 {
                    w.write_record([to.to_string(), from.to_string(), x.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// [`synthesize_with`] under default options.
pub fn synthesize(nda: &Nda) -> Result<NetworkSpec> {
    synthesize_with(nda, &SynthesisOptions::default())
}

fn to_f64(q: &num_rational::BigRational) -> Result<f64> {
    q.to_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Numeric(format!("{q} has no finite f64 value")))
}

/// Builds the network of `nda`.
pub fn synthesize_with(nda: &Nda, opts: &SynthesisOptions) -> Result<NetworkSpec> {
    let strips = [nda.input_strips(), nda.stack_strips()];
    let cells = strips[0] * strips[1];
    let n = 4 + strips[0] + strips[1] + 4 * cells;
    if n > opts.unit_budget {
        return Err(Error::MachineConstruction(format!(
            "network needs {n} units, the budget is {}",
            opts.unit_budget
        )));
    }
    if !(opts.eps_b > 0.0) {
        return Err(Error::Numeric("boundary margin must be positive".into()));
    }

    let threshold = |coord: usize, k: usize| 2 + if coord == 0 { k } else { strips[0] + 1 + k };
    let select0 = 2 + strips[0] + 1 + strips[1] + 1;
    let select = |c: usize| select0 + c;
    let latch = |c: usize| select0 + cells + c;
    let ltl = |c: usize, d: usize| select0 + 2 * cells + 2 * c + d;

    let mut weights = vec![0.0; n * n];
    let mut biases = vec![0.0; n];
    let mut activations = vec![Activation::Heaviside; n];
    let mut roles = vec![UnitRole::Unassigned; n];
    let mut set = |to: usize, from: usize, w: f64| weights[to * n + from] = w;

    for d in 0..2 {
        roles[d] = UnitRole::Mcl { coord: d };
        activations[d] = Activation::Ramp;
        set(d, d, 1.0);
        for c in 0..cells {
            set(d, ltl(c, d), 1.0);
            set(d, select(c), -GAIN);
        }
        for k in 0..=strips[d] {
            let u = threshold(d, k);
            roles[u] = UnitRole::Threshold { coord: d, k };
            set(u, d, 1.0);
            set(u, threshold(0, 0), -GAIN);
            for c in 0..cells {
                set(u, select(c), -GAIN);
                set(u, latch(c), -GAIN);
            }
            biases[u] = -(k as f64) / strips[d] as f64 + opts.eps_b;
        }
    }
    for c in 0..cells {
        let (i, j) = (c / strips[1], c % strips[1]);
        let cell = nda.cell(i, j);
        let s = select(c);
        roles[s] = UnitRole::Select { cell: c };
        set(s, threshold(0, i), 1.0);
        set(s, threshold(0, i + 1), -1.0);
        set(s, threshold(1, j), 1.0);
        set(s, threshold(1, j + 1), -1.0);
        biases[s] = -1.5;

        roles[latch(c)] = UnitRole::Latch { cell: c };
        set(latch(c), s, 1.0);
        biases[latch(c)] = -0.5;

        for d in 0..2 {
            let u = ltl(c, d);
            let (a, lambda) = (to_f64(&cell.a[d])?, to_f64(&cell.lambda[d])?);
            let gate = (a.abs() + lambda.abs()).ceil() + 1.0;
            roles[u] = UnitRole::Ltl { cell: c, coord: d };
            activations[u] = Activation::Ramp;
            set(u, d, lambda);
            set(u, s, gate);
            biases[u] = a - gate;
        }
    }

    let spec = NetworkSpec {
        n,
        weights,
        biases,
        activations,
        roles,
        micro_steps_per_macro: MICRO_STEPS_PER_MACRO,
        strips,
    };
    validate_margin(&spec, nda, opts.eps_b)?;
    Ok(spec)
}

/// Compares the threshold units' strip decision with the exact one on a grid
/// three digits finer than the strips.
fn validate_margin(spec: &NetworkSpec, nda: &Nda, eps_b: f64) -> Result<()> {
    let ms = [nda.orderings().m_in(), nda.orderings().m_st()];
    for d in 0..2 {
        let strips = spec.strips[d];
        let fine = strips * ms[d].pow(3);
        for g in 0..fine {
            let y = g as f64 / fine as f64;
            let fired = (1..=strips)
                .filter(|&k| y - k as f64 / strips as f64 + eps_b >= 0.0)
                .count();
            if fired != g * strips / fine {
                return Err(Error::Numeric(format!(
                    "boundary margin {eps_b} misplaces y{} = {g}/{fine}",
                    d + 1
                )));
            }
        }
    }
    Ok(())
}

/// A network state: activations and a micro-step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct NeuralState {
    pub x: Vec<f64>,
    pub t: usize,
}

impl NeuralState {
    pub fn zeros(n: usize) -> Self {
        NeuralState { x: vec![0.0; n], t: 0 }
    }

    /// MCL set to `p`, everything else at rest.
    pub fn embed(spec: &NetworkSpec, p: &PhasePoint) -> Self {
        let mut s = Self::zeros(spec.n());
        let [y1, y2] = p.to_f64();
        s.x[0] = y1;
        s.x[1] = y2;
        s
    }
}

/// `x' = F(W·x + b)`.
pub fn na_micro_step(spec: &NetworkSpec, x: &NeuralState) -> Result<NeuralState> {
    if x.x.len() != spec.n {
        return Err(crate::error::domain(format!(
            "state has {} components, the network {}",
            x.x.len(),
            spec.n
        )));
    }
    let mut next = Vec::with_capacity(spec.n);
    for u in 0..spec.n {
        let row = &spec.weights[u * spec.n..(u + 1) * spec.n];
        let s = compensated_sum(row.iter().zip(&x.x).map(|(w, v)| w * v).chain([spec.biases[u]]));
        if !s.is_finite() {
            return Err(Error::Numeric(format!("unit {u} received {s}")));
        }
        next.push(spec.activations[u].apply(s));
    }
    Ok(NeuralState { x: next, t: x.t + 1 })
}

/// Neumaier summation, so that large gate terms cancel without eating the
/// low bits of the affine part.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let next = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - next) + t;
        } else {
            c += (t - next) + sum;
        }
        sum = next;
    }
    sum + c
}

/// All micro states of a run. Every `micro_steps_per_macro`-th state is a
/// macro boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct NaTrajectory {
    pub states: Vec<NeuralState>,
    pub micro_steps_per_macro: usize,
}

impl NaTrajectory {
    pub fn is_macro_boundary(&self, index: usize) -> bool {
        index % self.micro_steps_per_macro == 0
    }

    /// States at macro boundaries, starting with the initial state.
    pub fn macro_states(&self) -> impl Iterator<Item = &NeuralState> {
        self.states.iter().step_by(self.micro_steps_per_macro)
    }

    /// States right after the select units fire.
    pub fn bsl_phase_states(&self) -> impl Iterator<Item = &NeuralState> {
        self.states.iter().skip(2).step_by(self.micro_steps_per_macro)
    }

    /// CSV with columns t (macro step), micro, x1..xn.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.states.first().map_or(0, |s| s.x.len());
        let mut header = vec!["t".to_string(), "micro".to_string()];
        header.extend((1..=n).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for (k, s) in self.states.iter().enumerate() {
            let mut row = vec![
                (k / self.micro_steps_per_macro).to_string(),
                (k % self.micro_steps_per_macro).to_string(),
            ];
            row.extend(s.x.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs `macro_steps` macro steps from `x0`.
pub fn na_run(spec: &NetworkSpec, x0: &NeuralState, macro_steps: usize) -> Result<NaTrajectory> {
    let mut states = vec![x0.clone()];
    for _ in 0..macro_steps * spec.micro_steps_per_macro {
        let next = na_micro_step(spec, states.last().expect("non-empty"))?;
        states.push(next);
    }
    Ok(NaTrajectory {
        states,
        micro_steps_per_macro: spec.micro_steps_per_macro,
    })
}

/// The MCL pair `(y1, y2)`.
pub fn mcl_projection(x: &NeuralState) -> [f64; 2] {
    [x.x[0], x.x[1]]
}

/// Outcome of checking a run against the exact automaton.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub nda_orbit: Vec<PhasePoint>,
    /// Per macro step, the larger coordinate deviation.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// First macro step whose deviation exceeds the tolerance.
    pub first_divergence: Option<usize>,
}

impl OracleComparison {
    pub fn diverged(&self) -> bool {
        self.first_divergence.is_some()
    }
}

/// A network together with the automaton it was built from.
#[derive(Clone, Debug)]
pub struct NeuralAutomaton {
    pub spec: NetworkSpec,
    pub nda: Nda,
}

/// A run plus its comparison with the exact orbit.
#[derive(Clone, Debug)]
pub struct NaRun {
    pub trajectory: NaTrajectory,
    pub comparison: OracleComparison,
}

impl NeuralAutomaton {
    pub fn new(nda: Nda) -> Result<Self> {
        Ok(NeuralAutomaton {
            spec: synthesize(&nda)?,
            nda,
        })
    }

    /// Runs from `p0` and compares every macro boundary with the exact orbit.
    pub fn run(&self, p0: &PhasePoint, macro_steps: usize, tolerance: f64) -> Result<NaRun> {
        let trajectory = na_run(&self.spec, &NeuralState::embed(&self.spec, p0), macro_steps)?;
        let comparison = compare_with_nda(&self.nda, &trajectory, p0, tolerance)?;
        Ok(NaRun { trajectory, comparison })
    }
}

/// Measures how far the macro boundaries of `trajectory` stray from the
/// exact orbit of `p0`.
pub fn compare_with_nda(nda: &Nda, trajectory: &NaTrajectory, p0: &PhasePoint, tolerance: f64) -> Result<OracleComparison> {
    let macros: Vec<&NeuralState> = trajectory.macro_states().collect();
    let orbit = nda_orbit(nda, p0, macros.len() - 1)?;
    let deviations: Vec<f64> = macros
        .iter()
        .zip(&orbit)
        .map(|(x, p)| {
            let [a, b] = mcl_projection(x);
            let [c, d] = p.to_f64();
            (a - c).abs().max((b - d).abs())
        })
        .collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let first_divergence = deviations.iter().position(|&d| !(d <= tolerance));
    Ok(OracleComparison {
        nda_orbit: orbit,
        deviations,
        max_deviation,
        tolerance,
        first_divergence,
    })
}
