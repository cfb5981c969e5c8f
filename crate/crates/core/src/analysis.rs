//! Parameter sweeps, sudden-death detection and peak finding.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockfield::{Injection, SqueezedFieldSpec, DEFAULT_WEIGHT_TOLERANCE};
use crate::reduced_state::{
    evaluate, global_negativity, reduce, Family, InitialState, NegativityReport, Qubit,
};

/// τ resolution of bisection and golden-section refinement.
pub const REFINE_RESOLUTION: f64 = 1e-3;

pub const S_RANGE: (f64, f64) = (0.0, 1.2);
pub const TAU_RANGE: (f64, f64) = (0.0, 30.0);
pub const ALPHA_RANGE: (f64, f64) = (0.0, 1.0);

pub const DEFAULT_TAU_STEP: f64 = 0.05;
pub const DEFAULT_S_STEP: f64 = 0.01;
pub const DEFAULT_ALPHA_STEP: f64 = 0.01;
pub const DEFAULT_TAU_MAX: f64 = 16.0;
pub const DEFAULT_S_MAX: f64 = 1.0;

/// Environment variable capping the sweep thread count.
pub const THREADS_ENV: &str = "SQUEEZELINK_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    S,
    Tau,
    Alpha,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::S => "s",
            Param::Tau => "tau",
            Param::Alpha => "alpha",
        }
    }

    pub fn range(self) -> (f64, f64) {
        match self {
            Param::S => S_RANGE,
            Param::Tau => TAU_RANGE,
            Param::Alpha => ALPHA_RANGE,
        }
    }

    pub fn default_step(self) -> f64 {
        match self {
            Param::S => DEFAULT_S_STEP,
            Param::Tau => DEFAULT_TAU_STEP,
            Param::Alpha => DEFAULT_ALPHA_STEP,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" => Ok(Param::S),
            "tau" => Ok(Param::Tau),
            "alpha" => Ok(Param::Alpha),
            other => Err(Error::Parse(format!("unknown axis parameter '{other}'"))),
        }
    }
}

fn snap(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// One sampled sweep axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Axis {
    /// Uniform samples from `min` to `max` inclusive.
    ///
    /// Values are computed as `min + i * step` and rounded to 12 significant
    /// digits, so that they survive a CSV round trip unchanged; the final
    /// sample is pinned to `max` when the span is a whole number of steps.
    pub fn range(param: Param, min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::domain(format!("{param} axis bounds must be finite")));
        }
        if max < min {
            return Err(Error::domain(format!("{param} axis has max {max} < min {min}")));
        }
        if step <= 0.0 {
            return Err(Error::domain(format!("{param} axis step must be > 0, got {step}")));
        }
        let span = (max - min) / step;
        let whole = span.round();
        let count = if (span - whole).abs() < 1e-9 { whole as usize } else { span.floor() as usize };
        let mut values: Vec<f64> = (0..=count).map(|i| snap(min + i as f64 * step)).collect();
        if (span - whole).abs() < 1e-9 {
            if let Some(last) = values.last_mut() {
                *last = max;
            }
        }
        Self::from_values(param, values)
    }

    pub fn single(param: Param, value: f64) -> Result<Self> {
        Self::from_values(param, vec![value])
    }

    pub fn from_values(param: Param, values: Vec<f64>) -> Result<Self> {
        let axis = Self { param, values };
        axis.validate()?;
        Ok(axis)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::domain(format!("{} axis has no samples", self.param)));
        }
        let (lo, hi) = self.param.range();
        for &v in &self.values {
            if !(v.is_finite() && v >= lo && v <= hi) {
                return Err(Error::domain(format!(
                    "{} = {v} outside the sweep range [{lo}, {hi}]",
                    self.param
                )));
            }
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(format!("{} axis must be strictly increasing", self.param)));
        }
        Ok(())
    }
}

/// Everything needed to reproduce a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub family: Family,
    pub x: Axis,
    pub y: Axis,
    /// Values of the parameters not swept. Unused entries are ignored.
    pub s: f64,
    pub tau: f64,
    pub alpha: f64,
    pub injection: Injection,
    pub n_max: Option<usize>,
    pub weight_tolerance: f64,
    /// Negativity tracked in the row annotations.
    pub annotate: Qubit,
}

impl GridSpec {
    pub fn new(family: Family, x: Axis, y: Axis) -> Self {
        Self {
            family,
            x,
            y,
            s: 0.0,
            tau: 0.0,
            alpha: 1.0,
            injection: Injection::Full,
            n_max: None,
            weight_tolerance: DEFAULT_WEIGHT_TOLERANCE,
            annotate: Qubit::B,
        }
    }

    /// A single τ curve at fixed s (and α for the alpha family).
    pub fn curve(initial: &InitialState, s: f64, tau: Axis) -> Result<Self> {
        let mut spec = Self::new(initial.family(), tau, Axis::single(Param::S, s)?);
        if let Some(a) = initial.alpha() {
            spec.alpha = a;
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        if self.x.param == self.y.param {
            return Err(Error::domain(format!("both axes sweep {}", self.x.param)));
        }
        if self.family == Family::Phi2 && (self.x.param == Param::Alpha || self.y.param == Param::Alpha) {
            return Err(Error::domain("the phi2 family has no alpha parameter to sweep"));
        }
        for param in [Param::S, Param::Tau, Param::Alpha] {
            if self.x.param == param || self.y.param == param {
                continue;
            }
            if param == Param::Alpha && self.family == Family::Phi2 {
                continue;
            }
            let v = self.fixed(param);
            let (lo, hi) = param.range();
            if !(v.is_finite() && v >= lo && v <= hi) {
                return Err(Error::domain(format!("fixed {param} = {v} outside [{lo}, {hi}]")));
            }
        }
        if !(self.weight_tolerance > 0.0 && self.weight_tolerance < 1.0) {
            return Err(Error::domain(format!(
                "weight tolerance must lie in (0, 1), got {}",
                self.weight_tolerance
            )));
        }
        Ok(())
    }

    /// The negativity tracked by the annotations, read from a report.
    pub fn annotate_value(&self, r: &NegativityReport) -> f64 {
        annotated_value(r, self.annotate)
    }

    fn fixed(&self, param: Param) -> f64 {
        match param {
            Param::S => self.s,
            Param::Tau => self.tau,
            Param::Alpha => self.alpha,
        }
    }

    /// Parameters at cell (xi, yi) as (s, tau, alpha).
    fn coordinates(&self, xi: usize, yi: usize) -> (f64, f64, f64) {
        let mut p = [self.s, self.tau, self.alpha];
        for (axis, i) in [(&self.x, xi), (&self.y, yi)] {
            let slot = match axis.param {
                Param::S => 0,
                Param::Tau => 1,
                Param::Alpha => 2,
            };
            p[slot] = axis.values[i];
        }
        (p[0], p[1], p[2])
    }

    fn initial(&self, alpha: f64) -> Result<InitialState> {
        match self.family {
            Family::Alpha => InitialState::new(Family::Alpha, Some(alpha)),
            Family::Phi2 => InitialState::new(Family::Phi2, None),
        }
    }

    fn field(&self, s: f64) -> Result<SqueezedFieldSpec> {
        let field = SqueezedFieldSpec::with_tolerance(s, self.injection, self.weight_tolerance)?;
        match self.n_max {
            Some(n) => field.with_n_max(n),
            None => Ok(field),
        }
    }

    fn evaluate_cell(&self, xi: usize, yi: usize) -> Result<NegativityReport> {
        let (s, tau, alpha) = self.coordinates(xi, yi);
        let run = || -> Result<NegativityReport> {
            let field = self.field(s)?;
            field.check_truncation()?;
            evaluate(&self.initial(alpha)?, &field, tau)
        };
        run().map_err(|e| Error::Cell {
            x: self.x.values[xi],
            y: self.y.values[yi],
            source: Box::new(e),
        })
    }

    /// Negativity of the annotated qubit at an arbitrary τ with the other
    /// parameters taken from a cell.
    fn annotated_negativity(&self, s: f64, alpha: f64, tau: f64) -> Result<f64> {
        let field = self.field(s)?;
        field.check_truncation()?;
        let rho = reduce(&self.initial(alpha)?, &field, tau)?;
        Ok(global_negativity(&rho.comp8(), self.annotate))
    }
}

/// One interval of vanishing negativity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsdInterval {
    pub death: f64,
    /// `None` when the curve ends before entanglement returns.
    pub revival: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub tau: f64,
    pub value: f64,
}

/// Features of one line of the grid taken along τ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineAnnotation {
    /// Value of the non-τ axis parameter on this line.
    pub at: f64,
    pub intervals: Vec<EsdInterval>,
    pub peak: Peak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub spec: GridSpec,
    /// Row-major: index `yi * nx + xi`.
    pub cells: Vec<NegativityReport>,
    /// Present when one axis is τ; one entry per value of the other axis.
    pub annotations: Vec<LineAnnotation>,
}

impl SweepGrid {
    pub fn nx(&self) -> usize {
        self.spec.x.len()
    }

    pub fn ny(&self) -> usize {
        self.spec.y.len()
    }

    pub fn cell(&self, xi: usize, yi: usize) -> &NegativityReport {
        &self.cells[yi * self.nx() + xi]
    }

    pub fn row(&self, yi: usize) -> &[NegativityReport] {
        let nx = self.nx();
        &self.cells[yi * nx..(yi + 1) * nx]
    }

    /// Curve of the annotated negativity along τ for each line of the grid.
    pub fn tau_curves(&self) -> Vec<Vec<(f64, f64)>> {
        let q = self.spec.annotate;
        let pick = |r: &NegativityReport| (r.tau, annotated_value(r, q));
        if self.spec.x.param == Param::Tau {
            (0..self.ny()).map(|yi| self.row(yi).iter().map(pick).collect()).collect()
        } else if self.spec.y.param == Param::Tau {
            (0..self.nx())
                .map(|xi| (0..self.ny()).map(|yi| pick(self.cell(xi, yi))).collect())
                .collect()
        } else {
            Vec::new()
        }
    }

    pub fn max_cell(&self) -> &NegativityReport {
        let q = self.spec.annotate;
        let mut best = &self.cells[0];
        for c in &self.cells[1..] {
            if annotated_value(c, q) > annotated_value(best, q) {
                best = c;
            }
        }
        best
    }
}

fn annotated_value(r: &NegativityReport, q: Qubit) -> f64 {
    match q {
        Qubit::B => r.ng_b,
        // A1 and A2 coincide for every state reachable here.
        Qubit::A1 | Qubit::A2 => r.ng_a1,
    }
}

/// Thread count from an explicit request and the environment cap.
pub fn thread_count(requested: Option<usize>) -> usize {
    let env_cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let base = requested.filter(|&n| n > 0).unwrap_or_else(rayon::current_num_threads);
    match env_cap {
        Some(cap) => base.min(cap),
        None => base,
    }
}

/// Evaluate every cell of the grid, then annotate each τ line.
pub fn sweep(spec: &GridSpec, threads: Option<usize>) -> Result<SweepGrid> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(threads))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    let (nx, ny) = (spec.x.len(), spec.y.len());
    pool.install(|| {
        let cells = (0..nx * ny)
            .into_par_iter()
            .map(|i| spec.evaluate_cell(i % nx, i / nx))
            .collect::<Result<Vec<_>>>()?;
        let mut grid = SweepGrid { spec: spec.clone(), cells, annotations: Vec::new() };
        grid.annotations = annotate(&grid)?;
        Ok(grid)
    })
}

fn annotate(grid: &SweepGrid) -> Result<Vec<LineAnnotation>> {
    let spec = &grid.spec;
    let other = if spec.x.param == Param::Tau {
        &spec.y
    } else if spec.y.param == Param::Tau {
        &spec.x
    } else {
        return Ok(Vec::new());
    };
    let curves = grid.tau_curves();
    if curves.first().is_none_or(|c| c.len() < 3) {
        return Ok(Vec::new());
    }
    curves
        .par_iter()
        .enumerate()
        .map(|(li, curve)| {
            let at = other.values[li];
            let (s, alpha) = match other.param {
                Param::S => (at, spec.alpha),
                Param::Alpha => (spec.s, at),
                Param::Tau => unreachable!(),
            };
            let eval = |tau: f64| spec.annotated_negativity(s, alpha, tau);
            Ok(LineAnnotation {
                at,
                intervals: detect_esd_refined(curve, eval)?,
                peak: find_peak_refined(curve, eval)?,
            })
        })
        .collect()
}

/// Sample a τ curve of one negativity at fixed field and state.
pub fn negativity_curve(
    initial: &InitialState,
    field: &SqueezedFieldSpec,
    taus: &[f64],
    qubit: Qubit,
) -> Result<Vec<(f64, f64)>> {
    taus.par_iter()
        .map(|&tau| {
            let rho = reduce(initial, field, tau)?;
            Ok((tau, global_negativity(&rho.comp8(), qubit)))
        })
        .collect()
}

fn check_curve(curve: &[(f64, f64)]) -> Result<()> {
    if curve.len() < 3 {
        return Err(Error::domain(format!("curve needs at least 3 samples, got {}", curve.len())));
    }
    if curve.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::domain("curve tau values must be strictly increasing"));
    }
    if curve.iter().any(|&(_, v)| !(v >= 0.0)) {
        return Err(Error::domain("curve values must be non-negative"));
    }
    Ok(())
}

/// Index pairs (last positive, first zero) and (last zero, first positive)
/// bounding each interval of zeros that follows a positive sample.
fn zero_runs(curve: &[(f64, f64)]) -> Vec<(usize, Option<usize>)> {
    let mut runs = Vec::new();
    let mut i = 0;
    // A curve that starts at zero (e.g. τ = 0) has not died yet.
    while i < curve.len() && curve[i].1 == 0.0 {
        i += 1;
    }
    while i + 1 < curve.len() {
        if curve[i].1 > 0.0 && curve[i + 1].1 == 0.0 {
            let mut j = i + 1;
            while j + 1 < curve.len() && curve[j + 1].1 == 0.0 {
                j += 1;
            }
            let revived = j + 1 < curve.len();
            runs.push((i, revived.then_some(j)));
            i = j + 1;
        } else {
            i += 1;
        }
    }
    runs
}

/// Sudden-death intervals located to the sampling resolution.
///
/// Death is the first zero sample and revival the first positive one after it.
pub fn detect_esd(curve: &[(f64, f64)]) -> Result<Vec<EsdInterval>> {
    check_curve(curve)?;
    Ok(zero_runs(curve)
        .into_iter()
        .map(|(i, j)| EsdInterval {
            death: curve[i + 1].0,
            revival: j.map(|j| curve[j + 1].0),
        })
        .collect())
}

/// Bisect between a τ where `positive_at_lo` holds and one where it does not.
fn bisect<F>(mut lo: f64, mut hi: f64, eval: &F, positive_at_lo: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    while hi - lo > REFINE_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if (eval(mid)? > 0.0) == positive_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sudden-death intervals with boundaries bisected on `eval` to 1e-3.
pub fn detect_esd_refined<F>(curve: &[(f64, f64)], eval: F) -> Result<Vec<EsdInterval>>
where
    F: Fn(f64) -> Result<f64>,
{
    check_curve(curve)?;
    zero_runs(curve)
        .into_iter()
        .map(|(i, j)| {
            let death = bisect(curve[i].0, curve[i + 1].0, &eval, true)?;
            let revival = match j {
                Some(j) => Some(bisect(curve[j].0, curve[j + 1].0, &eval, false)?),
                None => None,
            };
            Ok(EsdInterval { death, revival })
        })
        .collect()
}

fn argmax(curve: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, &(_, v)) in curve.iter().enumerate().skip(1) {
        if v > curve[best].1 {
            best = i;
        }
    }
    best
}

/// Global maximum over the samples, ties going to the smaller τ.
pub fn find_peak(curve: &[(f64, f64)]) -> Result<Peak> {
    check_curve(curve)?;
    let i = argmax(curve);
    Ok(Peak { tau: curve[i].0, value: curve[i].1 })
}

/// Sampled maximum refined by golden-section search on `eval` over the
/// neighbouring sample interval. Never reports less than the sampled value.
pub fn find_peak_refined<F>(curve: &[(f64, f64)], eval: F) -> Result<Peak>
where
    F: Fn(f64) -> Result<f64>,
{
    let sampled = find_peak(curve)?;
    if sampled.value == 0.0 {
        return Ok(sampled);
    }
    let i = argmax(curve);
    let mut a = curve[i.saturating_sub(1)].0;
    let mut b = curve[(i + 1).min(curve.len() - 1)].0;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > REFINE_RESOLUTION {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d)?;
        }
    }
    let (tau, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    if value > sampled.value {
        Ok(Peak { tau, value })
    } else {
        Ok(sampled)
    }
}

/// Peak and ESD intervals of one τ curve, refined on the model.
pub fn curve_features(
    initial: &InitialState,
    field: &SqueezedFieldSpec,
    taus: &[f64],
    qubit: Qubit,
) -> Result<(Peak, Vec<EsdInterval>)> {
    let curve = negativity_curve(initial, field, taus, qubit)?;
    let eval = |tau: f64| -> Result<f64> {
        let rho = reduce(initial, field, tau)?;
        Ok(global_negativity(&rho.comp8(), qubit))
    };
    Ok((find_peak_refined(&curve, eval)?, detect_esd_refined(&curve, eval)?))
}

/// Default τ samples over [0, 16] at step 0.05.
pub fn default_taus() -> Vec<f64> {
    Axis::range(Param::Tau, 0.0, DEFAULT_TAU_MAX, DEFAULT_TAU_STEP)
        .map(|a| a.values)
        .unwrap_or_default()
}

/// Grids reproducing the published figures.
pub mod figures {
    use super::*;

    pub const FIGURE_IDS: std::ops::RangeInclusive<u8> = 1..=7;

    fn tau_axis() -> Result<Axis> {
        Axis::range(Param::Tau, 0.0, DEFAULT_TAU_MAX, DEFAULT_TAU_STEP)
    }

    fn s_axis() -> Result<Axis> {
        Axis::range(Param::S, 0.0, DEFAULT_S_MAX, DEFAULT_S_STEP)
    }

    fn alpha_axis() -> Result<Axis> {
        Axis::range(Param::Alpha, 0.0, 1.0, DEFAULT_ALPHA_STEP)
    }

    fn curves_at(s: f64) -> Result<Vec<GridSpec>> {
        let phi2 = GridSpec::curve(&InitialState::Phi2, s, tau_axis()?)?;
        let alpha = GridSpec::curve(&InitialState::Alpha(1.0), s, tau_axis()?)?;
        Ok(vec![phi2, alpha])
    }

    /// Grid specifications for figure `id`, emitted in order.
    pub fn figure_specs(id: u8) -> Result<Vec<GridSpec>> {
        let specs = match id {
            1 => {
                let mut g = GridSpec::new(Family::Alpha, tau_axis()?, s_axis()?);
                g.alpha = 1.0;
                vec![g]
            }
            2 => {
                let mut g = GridSpec::new(Family::Alpha, tau_axis()?, alpha_axis()?);
                g.s = 0.64;
                vec![g]
            }
            3 => {
                let mut g = GridSpec::new(Family::Alpha, tau_axis()?, s_axis()?);
                g.alpha = 0.5;
                vec![g]
            }
            4 => {
                let mut g = GridSpec::new(Family::Phi2, tau_axis()?, s_axis()?);
                g.annotate = Qubit::A1;
                vec![g]
            }
            5 => vec![GridSpec::new(Family::Phi2, tau_axis()?, s_axis()?)],
            6 => curves_at(0.64)?,
            7 => curves_at(0.4)?,
            other => return Err(Error::domain(format!("figure id must be in 1..=7, got {other}"))),
        };
        Ok(specs)
    }
}
