//! Adaptive Dormand–Prince 5(4) integration with dense output and event
//! location, generic over the state dimension.
//!
//! Events are located by bisection on the continuous extension, so guards
//! need no derivatives. Integration ends on a terminal event, at the end of
//! the span, when the step size collapses (`StepUnderflow`), when a
//! coordinate exceeds the overflow bound (`StateOverflow`) or when the step
//! budget is exhausted; these are reported in [`Trajectory::termination`]
//! rather than as errors, because the classifiers interpret them.

use serde::{Deserialize, Serialize};

use crate::config::IntegratorConfig;
use crate::dynsys::ChartId;
use crate::error::{Error, Result};
use crate::exponents::ParamTriple;

/// Right-hand side `dy/dt = f(t, y)`.
pub trait VectorField<const D: usize> {
    fn eval(&self, t: f64, y: &[f64; D]) -> [f64; D];
}

impl<const D: usize, F> VectorField<D> for F
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
{
    fn eval(&self, t: f64, y: &[f64; D]) -> [f64; D] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Rising,
    Falling,
    Any,
}

type Guard<'a, const D: usize> = Box<dyn Fn(f64, &[f64; D]) -> f64 + 'a>;

/// A scalar guard whose sign changes mark events.
pub struct EventSpec<'a, const D: usize> {
    pub name: String,
    pub guard: Guard<'a, D>,
    pub direction: Direction,
    pub terminal: bool,
}

impl<'a, const D: usize> EventSpec<'a, D> {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        terminal: bool,
        guard: impl Fn(f64, &[f64; D]) -> f64 + 'a,
    ) -> Self {
        Self { name: name.into(), guard: Box::new(guard), direction, terminal }
    }

    fn fires(&self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self.direction {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Any => rising || falling,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord<const D: usize> {
    pub name: String,
    pub eta: f64,
    pub state: [f64; D],
    /// Guard value at the recorded point.
    pub guard: f64,
    /// Whether the guard went from negative to non-negative.
    pub rising: bool,
}

/// A guard that came within the near-miss tolerance of zero without
/// changing sign at a step end.
#[derive(Debug, Clone, PartialEq)]
pub struct NearMiss {
    pub name: String,
    pub eta: f64,
    pub guard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    EventTerminal,
    SpanEnd,
    StepUnderflow,
    StateOverflow,
    StepBudget,
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, PartialEq)]
struct DenseStep<const D: usize> {
    h: f64,
    coeffs: [[f64; D]; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<const D: usize> {
    pub eta: f64,
    pub state: [f64; D],
    pub deriv: [f64; D],
    step: usize,
    dense: Option<DenseStep<D>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// An event-annotated numerical orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    /// Chart and parameters, when the orbit belongs to a phase chart.
    pub chart: Option<ChartId>,
    pub params: Option<ParamTriple>,
    pub samples: Vec<Sample<D>>,
    pub events: Vec<EventRecord<D>>,
    pub near_misses: Vec<NearMiss>,
    pub termination: Termination,
    pub stats: Stats,
    /// Current thinning stride: every `stride`-th step is stored.
    pub stride: usize,
}

impl<const D: usize> Trajectory<D> {
    pub fn with_chart(mut self, chart: ChartId, params: ParamTriple) -> Self {
        self.chart = Some(chart);
        self.params = Some(params);
        self
    }

    pub fn start(&self) -> f64 {
        self.samples[0].eta
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].eta
    }

    pub fn last_state(&self) -> [f64; D] {
        self.samples[self.samples.len() - 1].state
    }

    pub fn events_named<'s>(&'s self, name: &'s str) -> impl Iterator<Item = &'s EventRecord<D>> + 's {
        self.events.iter().filter(move |e| e.name == name)
    }

    /// Iterator over `(η, state)` of the stored samples.
    pub fn points(&self) -> impl Iterator<Item = (f64, [f64; D])> + '_ {
        self.samples.iter().map(|s| (s.eta, s.state))
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const UNDERFLOW_RATIO: f64 = 1e-14;
const MAX_BISECTIONS: usize = 300;

fn lin<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

struct StepResult<const D: usize> {
    y: [f64; D],
    k7: [f64; D],
    err: [f64; D],
    k: [[f64; D]; 6],
}

fn dp_step<const D: usize, F: VectorField<D>>(f: &F, t: f64, y: &[f64; D], k1: &[f64; D], h: f64) -> StepResult<D> {
    let k2 = f.eval(t + C2 * h, &lin(y, h, &[(A21, k1)]));
    let k3 = f.eval(t + C3 * h, &lin(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f.eval(t + C4 * h, &lin(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f.eval(t + C5 * h, &lin(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f.eval(t + h, &lin(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = lin(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f.eval(t + h, &y_new);
    let mut err = [0.0; D];
    for i in 0..D {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    StepResult { y: y_new, k7, err, k: [*k1, k2, k3, k4, k5, k6] }
}

fn dense_coeffs<const D: usize>(y0: &[f64; D], s: &StepResult<D>, h: f64) -> [[f64; D]; 5] {
    let [k1, _, k3, k4, k5, k6] = &s.k;
    let k7 = &s.k7;
    let mut c = [[0.0; D]; 5];
    for i in 0..D {
        let dy = s.y[i] - y0[i];
        let bspl = h * k1[i] - dy;
        c[0][i] = y0[i];
        c[1][i] = dy;
        c[2][i] = bspl;
        c[3][i] = dy - h * k7[i] - bspl;
        c[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    c
}

fn dense_at<const D: usize>(c: &[[f64; D]; 5], theta: f64) -> [f64; D] {
    let t1 = 1.0 - theta;
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = c[0][i] + theta * (c[1][i] + t1 * (c[2][i] + theta * (c[3][i] + t1 * c[4][i])));
    }
    out
}

fn hermite<const D: usize>(a: &Sample<D>, b: &Sample<D>, eta: f64) -> [f64; D] {
    let h = b.eta - a.eta;
    let s = (eta - a.eta) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    std::array::from_fn(|i| h00 * a.state[i] + h10 * h * a.deriv[i] + h01 * b.state[i] + h11 * h * b.deriv[i])
}

fn error_norm<const D: usize>(y0: &[f64; D], y1: &[f64; D], err: &[f64; D], cfg: &IntegratorConfig) -> f64 {
    let mut acc = 0.0;
    for i in 0..D {
        let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / D as f64).sqrt()
}

fn initial_step<const D: usize, F: VectorField<D>>(
    f: &F,
    t: f64,
    y: &[f64; D],
    k1: &[f64; D],
    span: f64,
    cfg: &IntegratorConfig,
) -> f64 {
    let scale: Vec<f64> = y.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.abs()).collect();
    let norm = |v: &[f64; D]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / D as f64).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = lin(y, h0, &[(1.0, k1)]);
    let k2 = f.eval(t + h0, &y1);
    let mut diff = [0.0; D];
    for i in 0..D {
        diff[i] = k2[i] - k1[i];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}

/// Locates the crossing of `ev` inside a step by bisection on the dense
/// output. Returns `(η, state, guard)` on the post-crossing side, so a
/// restart from the event state does not fire the same event again.
fn locate<const D: usize>(
    ev: &EventSpec<'_, D>,
    t0: f64,
    h: f64,
    coeffs: &[[f64; D]; 5],
    g_before: f64,
    g_after: f64,
    tol: f64,
) -> (f64, [f64; D], f64) {
    let scale = g_before.abs().max(g_after.abs()).max(f64::MIN_POSITIVE);
    let before_negative = g_before < 0.0;
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    let mut gb = g_after;
    let mut yb = dense_at(coeffs, 1.0);
    for _ in 0..MAX_BISECTIONS {
        if gb.abs() <= tol * scale || (b - a) * h.abs() <= 4.0 * f64::EPSILON * (t0 + b * h).abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        let ym = dense_at(coeffs, mid);
        let gm = (ev.guard)(t0 + mid * h, &ym);
        let still_before = if before_negative { gm < 0.0 } else { gm > 0.0 };
        if still_before {
            a = mid;
        } else {
            b = mid;
            gb = gm;
            yb = ym;
        }
    }
    (t0 + b * h, yb, gb)
}

/// Integrates `dy/dη = f(η, y)` over `span = (η₀, η₁)` with `η₀ < η₁`.
pub fn integrate<const D: usize, F: VectorField<D>>(
    f: &F,
    initial: [f64; D],
    span: (f64, f64),
    events: &[EventSpec<'_, D>],
    cfg: &IntegratorConfig,
) -> Result<Trajectory<D>> {
    let (t0, t1) = span;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::Precondition(format!("span ({t0}, {t1}) must be finite and increasing")));
    }
    if !(cfg.rel_tol > 0.0 && cfg.abs_tol > 0.0) {
        return Err(Error::Precondition("tolerances must be positive".into()));
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition(format!("non-finite initial state {initial:?}")));
    }
    let length = t1 - t0;
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = initial;
    let mut k1 = f.eval(t, &y);
    stats.evaluations += 1;
    let mut samples = vec![Sample { eta: t, state: y, deriv: k1, step: 0, dense: None }];
    let mut recorded: Vec<EventRecord<D>> = Vec::new();
    let mut near_misses: Vec<NearMiss> = Vec::new();
    let mut near_open = vec![false; events.len()];
    let mut g_prev: Vec<f64> = events.iter().map(|e| (e.guard)(t, &y)).collect();
    let mut stride = 1usize;
    let mut step_index = 0usize;

    let mut h = match cfg.fixed_step {
        Some(hf) if hf > 0.0 => hf,
        Some(hf) => return Err(Error::Precondition(format!("fixed step {hf} must be positive"))),
        None => {
            stats.evaluations += 1;
            initial_step(f, t, &y, &k1, length, cfg)
        }
    };
    let mut last_rejected = false;

    let finish = |samples, recorded, near_misses, termination, stats, stride| {
        Ok(Trajectory { chart: None, params: None, samples, events: recorded, near_misses, termination, stats, stride })
    };

    loop {
        if t >= t1 {
            return finish(samples, recorded, near_misses, Termination::SpanEnd, stats, stride);
        }
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return finish(samples, recorded, near_misses, Termination::StepBudget, stats, stride);
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        } else if h < UNDERFLOW_RATIO * length {
            return finish(samples, recorded, near_misses, Termination::StepUnderflow, stats, stride);
        }
        let step = dp_step(f, t, &y, &k1, h);
        stats.evaluations += 6;
        let finite = step.y.iter().chain(step.k7.iter()).all(|v| v.is_finite());
        let err = if finite { error_norm(&y, &step.y, &step.err, cfg) } else { f64::INFINITY };
        let accept = cfg.fixed_step.is_some() && finite || err <= 1.0;
        if !accept {
            stats.rejected += 1;
            let fac = if err.is_finite() { (SAFETY * err.powf(-0.2)).max(FAC_MIN) } else { 0.25 };
            h *= fac.min(1.0);
            last_rejected = true;
            if cfg.fixed_step.is_some() {
                return finish(samples, recorded, near_misses, Termination::StepUnderflow, stats, stride);
            }
            continue;
        }
        stats.accepted += 1;
        step_index += 1;
        let coeffs = dense_coeffs(&y, &step, h);
        let t_new = if last { t1 } else { t + h };

        // Attach the continuous extension to the step's start sample when it
        // is stored.
        if let Some(s) = samples.last_mut() {
            if s.step + 1 == step_index {
                s.dense = Some(DenseStep { h, coeffs });
            }
        }

        // Events inside (t, t_new].
        let g_new: Vec<f64> = events.iter().map(|e| (e.guard)(t_new, &step.y)).collect();
        let mut hits: Vec<(usize, f64, [f64; D], f64)> = Vec::new();
        for (i, ev) in events.iter().enumerate() {
            if ev.fires(g_prev[i], g_new[i]) {
                let (te, ye, ge) = locate(ev, t, h, &coeffs, g_prev[i], g_new[i], cfg.event_tol);
                hits.push((i, te, ye, ge));
            } else if g_new[i].abs() <= cfg.near_miss_tol && g_new[i].signum() == g_prev[i].signum() {
                if !near_open[i] {
                    near_misses.push(NearMiss { name: ev.name.clone(), eta: t_new, guard: g_new[i] });
                }
                near_open[i] = true;
                continue;
            }
            near_open[i] = false;
        }
        hits.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (i, te, ye, ge) in hits {
            let ev = &events[i];
            recorded.push(EventRecord { name: ev.name.clone(), eta: te, state: ye, guard: ge, rising: g_prev[i] < 0.0 });
            if ev.terminal {
                let deriv = f.eval(te, &ye);
                stats.evaluations += 1;
                samples.push(Sample { eta: te, state: ye, deriv, step: step_index, dense: None });
                return finish(samples, recorded, near_misses, Termination::EventTerminal, stats, stride);
            }
        }

        let overflow = step.y.iter().any(|v| v.abs() > cfg.overflow_bound);
        t = t_new;
        y = step.y;
        k1 = step.k7;
        g_prev = g_new;
        if overflow || last || step_index.is_multiple_of(stride) {
            samples.push(Sample { eta: t, state: y, deriv: k1, step: step_index, dense: None });
            if samples.len() > cfg.max_samples.max(4) {
                thin(&mut samples);
                stride *= 2;
            }
        }
        if overflow {
            return finish(samples, recorded, near_misses, Termination::StateOverflow, stats, stride);
        }

        if cfg.fixed_step.is_none() {
            let fac_max = if last_rejected { 1.0 } else { FAC_MAX };
            let fac = if err > 0.0 { SAFETY * err.powf(-0.2) } else { fac_max };
            h *= fac.clamp(FAC_MIN, fac_max);
        }
        last_rejected = false;
    }
}

/// Keeps every other sample, always keeping the first and the last.
fn thin<const D: usize>(samples: &mut Vec<Sample<D>>) {
    let n = samples.len();
    let mut idx = 0;
    samples.retain(|_| {
        let keep = idx % 2 == 0 || idx + 1 == n;
        idx += 1;
        keep
    });
}

/// Evaluates the trajectory at `eta` using the step's continuous extension
/// where available and cubic Hermite interpolation across thinned gaps.
pub fn dense_eval<const D: usize>(traj: &Trajectory<D>, eta: f64) -> Result<[f64; D]> {
    let (start, end) = (traj.start(), traj.end());
    if !(eta >= start && eta <= end) {
        return Err(Error::OutOfSpan { eta, start, end });
    }
    let s = &traj.samples;
    let i = s.partition_point(|x| x.eta <= eta).saturating_sub(1);
    if s[i].eta == eta || i + 1 == s.len() {
        return Ok(s[i].state);
    }
    let (a, b) = (&s[i], &s[i + 1]);
    match &a.dense {
        Some(d) if b.step == a.step + 1 => Ok(dense_at(&d.coeffs, (eta - a.eta) / d.h)),
        _ => Ok(hermite(a, b, eta)),
    }
}
