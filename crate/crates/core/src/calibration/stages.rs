use alloc::vec::Vec;

use crate::dilation::{dilation_field, ContactSet};
use crate::error::{Error, Result};
use crate::geometry::Sdf;
use crate::hydroshear::{HydroShear, TrackerOptions, TrackerState};
use crate::scene::Scene;
use crate::types::{HydroParams, MarkerField, PixelScale, Pose, TactileGrid};

use super::solver::{minimize_scalar, Bracket, Degeneracy, ScalarSolution, SolverOptions};

/// Friction used while the friction clip should stay inactive.
pub const SURROGATE_FRICTION: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleKind {
    Dilation,
    Shear,
    Twist,
    Roll,
    Slip,
}

impl SampleKind {
    pub const ALL: [SampleKind; 5] = [
        SampleKind::Dilation,
        SampleKind::Shear,
        SampleKind::Twist,
        SampleKind::Roll,
        SampleKind::Slip,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            SampleKind::Dilation => "dilation",
            SampleKind::Shear => "shear",
            SampleKind::Twist => "twist",
            SampleKind::Roll => "roll",
            SampleKind::Slip => "slip",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

/// A recorded trajectory and the field observed at its last pose.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    pub kind: SampleKind,
    /// `(time in seconds, indenter pose)`, strictly increasing in time.
    pub trajectory: Vec<(f64, Pose)>,
    pub observed: MarkerField,
    pub indenter: Sdf,
}

impl CalibrationSample {
    pub fn new(kind: SampleKind, trajectory: Vec<(f64, Pose)>, observed: MarkerField, indenter: Sdf) -> Result<Self> {
        let s = Self {
            kind,
            trajectory,
            observed,
            indenter,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trajectory.is_empty() {
            return Err(Error::Configuration("empty trajectory"));
        }
        if self.trajectory.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Configuration("trajectory times must be strictly increasing"));
        }
        self.indenter.validate()
    }

    pub fn final_pose(&self) -> Pose {
        self.trajectory[self.trajectory.len() - 1].1
    }

    pub fn poses(&self) -> impl Iterator<Item = &Pose> {
        self.trajectory.iter().map(|(_, p)| p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brackets {
    pub lambda_d: Bracket,
    pub lambda_s: Bracket,
    pub stiffness: Bracket,
    pub friction: Bracket,
}

impl Default for Brackets {
    fn default() -> Self {
        Self {
            lambda_d: Bracket::LAMBDA,
            lambda_s: Bracket::LAMBDA,
            stiffness: Bracket::STIFFNESS,
            friction: Bracket::FRICTION,
        }
    }
}

/// Everything the stages need besides the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSetup {
    pub grid: TactileGrid,
    pub pixel_scale: PixelScale,
    /// Surface samples per indenter and the seed they are drawn with.
    pub sample_count: usize,
    pub seed: u64,
    pub brackets: Brackets,
    pub solver: SolverOptions,
    pub tracker: TrackerOptions,
    /// Kinds used by the `lambda_s` and `K` stages. Their motions should
    /// stick wherever a point carries load, since these stages run with the
    /// friction clip disabled.
    pub shear_kinds: Vec<SampleKind>,
    /// Kinds used by the `mu` stage.
    pub slip_kinds: Vec<SampleKind>,
    /// Optional `(half-width in decades, points per axis)` grid over
    /// `(lambda_s, K)` around the staged optimum.
    pub joint_refinement: Option<(f64, usize)>,
}

impl Default for CalibrationSetup {
    fn default() -> Self {
        Self {
            grid: TactileGrid::default(),
            pixel_scale: PixelScale::default(),
            sample_count: crate::geometry::DEFAULT_SAMPLE_COUNT,
            seed: 0,
            brackets: Brackets::default(),
            solver: SolverOptions::default(),
            tracker: TrackerOptions::default(),
            shear_kinds: alloc::vec![SampleKind::Shear],
            slip_kinds: alloc::vec![SampleKind::Slip],
            joint_refinement: None,
        }
    }
}

/// Outcome of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub name: &'static str,
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub degeneracy: Option<Degeneracy>,
    pub history: Vec<f64>,
}

impl StageReport {
    fn from_solution(name: &'static str, s: ScalarSolution) -> Self {
        Self {
            name,
            value: s.x,
            residual: s.residual,
            iterations: s.iterations,
            evaluations: s.evaluations,
            degeneracy: s.degeneracy,
            history: s.history,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointRefinement {
    pub lambda_s: f64,
    pub stiffness: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub params: HydroParams,
    /// `lambda_d`, `lambda_s`, `K`, `mu` in that order.
    pub stages: [StageReport; 4],
    /// Per shear sample observation rescaling at the `lambda_s` optimum.
    pub rescale: Vec<f64>,
    /// Some point was clipped while the surrogate friction was in use.
    pub surrogate_clipped: bool,
    /// Some point was clipped at the fitted friction.
    pub friction_identifiable: bool,
    pub refinement: Option<JointRefinement>,
}

impl CalibrationResult {
    pub fn residuals(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.stages[i].residual)
    }

    pub fn iterations(&self) -> [usize; 4] {
        [0, 1, 2, 3].map(|i| self.stages[i].iterations)
    }

    pub fn degenerate(&self) -> bool {
        self.stages.iter().any(|s| s.degeneracy.is_some()) || !self.friction_identifiable
    }
}

/// Dilation and shear at the last pose of a trajectory, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSample {
    pub dilation: MarkerField,
    pub shear: MarkerField,
    pub state: TrackerState,
}

impl SimulatedSample {
    pub fn total(&self) -> Result<MarkerField> {
        self.dilation.add(&self.shear)
    }
}

pub fn simulate_trajectory<'p>(
    scene: &Scene,
    params: &HydroParams,
    options: &TrackerOptions,
    poses: impl IntoIterator<Item = &'p Pose>,
) -> Result<SimulatedSample> {
    let model = HydroShear::new(scene, *params).with_options(*options);
    let mut state = model.new_state();
    let mut last = None;
    for p in poses {
        model.step(&mut state, p)?;
        last = Some(*p);
    }
    let pose = last.ok_or(Error::Configuration("empty trajectory"))?;
    Ok(SimulatedSample {
        dilation: model.dilation(&pose)?,
        shear: model.shear(&state, &pose)?,
        state,
    })
}

fn sq_diff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let mut s = crate::numeric::KahanSum::new();
    for (u, v) in a.iter().zip(b) {
        let (dx, dy) = (u[0] - v[0], u[1] - v[1]);
        s.add(dx * dx + dy * dy);
    }
    s.value()
}

fn mean_norm(v: &[[f64; 2]], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let s: f64 = idx.iter().map(|&i| crate::numeric::norm2(v[i])).sum();
    s / idx.len() as f64
}

/// Runs the stages over a dataset.
#[derive(Debug)]
pub struct Calibrator<'a> {
    setup: &'a CalibrationSetup,
    samples: &'a [CalibrationSample],
    scenes: Vec<Scene>,
    scene_of: Vec<usize>,
    observed: Vec<MarkerField>,
    contacts: Vec<ContactSet>,
    area: f64,
}

impl<'a> Calibrator<'a> {
    /// Samples the surface of every distinct indenter once.
    pub fn new(setup: &'a CalibrationSetup, samples: &'a [CalibrationSample]) -> Result<Self> {
        setup.grid.validate()?;
        let mut scenes: Vec<Scene> = Vec::new();
        let mut scene_of = Vec::with_capacity(samples.len());
        let mut observed = Vec::with_capacity(samples.len());
        let mut contacts = Vec::with_capacity(samples.len());
        for s in samples {
            s.validate()?;
            if s.observed.grid != setup.grid {
                return Err(Error::GridMismatch);
            }
            let k = match scenes.iter().position(|sc| sc.indenter == s.indenter) {
                Some(k) => k,
                None => {
                    scenes.push(Scene::sampled(setup.grid, s.indenter.clone(), setup.sample_count, setup.seed)?);
                    scenes.len() - 1
                }
            };
            contacts.push(scenes[k].contacts(&s.final_pose())?);
            scene_of.push(k);
            observed.push(s.observed.to_pixels(setup.pixel_scale));
        }
        let area = scenes.first().map(Scene::mean_area).unwrap_or(1.0);
        Ok(Self {
            setup,
            samples,
            scenes,
            scene_of,
            observed,
            contacts,
            area,
        })
    }

    fn indices(&self, kinds: &[SampleKind]) -> Vec<usize> {
        (0..self.samples.len())
            .filter(|&i| kinds.contains(&self.samples[i].kind))
            .collect()
    }

    fn require(&self, kinds: &[SampleKind], stage: &'static str, reason: &'static str) -> Result<Vec<usize>> {
        let idx = self.indices(kinds);
        if idx.is_empty() {
            return Err(Error::EmptyDataset { stage, reason });
        }
        Ok(idx)
    }

    fn params(&self, lambda_d: f64, lambda_s: f64, stiffness: f64, friction: f64) -> HydroParams {
        HydroParams::single_tracker(lambda_d, lambda_s, stiffness, friction, self.area)
    }

    fn px(&self, f: &MarkerField) -> MarkerField {
        f.to_pixels(self.setup.pixel_scale)
    }

    fn simulate(&self, i: usize, params: &HydroParams) -> Result<SimulatedSample> {
        simulate_trajectory(
            &self.scenes[self.scene_of[i]],
            params,
            &self.setup.tracker,
            self.samples[i].poses(),
        )
    }

    fn dilation_px(&self, i: usize, lambda_d: f64) -> MarkerField {
        self.px(&dilation_field(&self.setup.grid, &self.contacts[i], lambda_d))
    }

    /// `Σ |Y - M^d(lambda_d)|²` over the dilation samples, in px².
    pub fn lambda_d_objective(&self, lambda_d: f64) -> Result<f64> {
        let idx = self.require(&[SampleKind::Dilation], "lambda_d", "no dilation samples")?;
        Ok(idx
            .iter()
            .map(|&i| sq_diff(&self.dilation_px(i, lambda_d).vectors, &self.observed[i].vectors))
            .sum())
    }

    /// Tracks every shear sample once at unit stiffness and the surrogate
    /// friction; the resulting objective only recomputes the Gaussian sums.
    pub fn lambda_s_objective(&self, lambda_d: f64) -> Result<LambdaSObjective<'_, 'a>> {
        let idx = self.require(&self.setup.shear_kinds, "lambda_s", "no shear samples")?;
        if idx.iter().all(|&i| self.contacts[i].is_empty()) {
            return Err(Error::EmptyDataset {
                stage: "lambda_s",
                reason: "no in-contact taxels",
            });
        }
        let params = self.params(lambda_d, 1.0, 1.0, SURROGATE_FRICTION);
        let mut states = Vec::with_capacity(idx.len());
        let mut residual_obs = Vec::with_capacity(idx.len());
        let mut clipped = false;
        for &i in &idx {
            let sim = self.simulate(i, &params)?;
            clipped |= sim.state.any_clipped();
            let d = self.dilation_px(i, lambda_d);
            let r: Vec<[f64; 2]> = self.observed[i]
                .vectors
                .iter()
                .zip(&d.vectors)
                .map(|(y, d)| [y[0] - d[0], y[1] - d[1]])
                .collect();
            states.push(sim.state);
            residual_obs.push(r);
        }
        Ok(LambdaSObjective {
            calibrator: self,
            idx,
            states,
            shear_obs: residual_obs,
            surrogate_clipped: clipped,
        })
    }

    /// `Σ |Y - M(lambda_d, lambda_s, K)|²` over the shear samples at the
    /// surrogate friction, in px². Also reports whether anything clipped.
    pub fn stiffness_objective(&self, lambda_d: f64, lambda_s: f64, stiffness: f64) -> Result<(f64, bool)> {
        let idx = self.require(&self.setup.shear_kinds, "stiffness", "no shear samples")?;
        self.full_objective(&idx, &self.params(lambda_d, lambda_s, stiffness, SURROGATE_FRICTION))
    }

    /// `Σ |Y - M(lambda_d, lambda_s, K, mu)|²` over the slip samples, in px².
    pub fn friction_objective(&self, lambda_d: f64, lambda_s: f64, stiffness: f64, friction: f64) -> Result<(f64, bool)> {
        let idx = self.require(&self.setup.slip_kinds, "friction", "no slip samples")?;
        self.full_objective(&idx, &self.params(lambda_d, lambda_s, stiffness, friction))
    }

    fn full_objective(&self, idx: &[usize], params: &HydroParams) -> Result<(f64, bool)> {
        let mut total = 0.0;
        let mut clipped = false;
        for &i in idx {
            let sim = self.simulate(i, params)?;
            clipped |= sim.state.force_clipped.iter().any(|c| *c);
            let m = self.px(&sim.total()?);
            total += sq_diff(&m.vectors, &self.observed[i].vectors);
        }
        Ok((total, clipped))
    }

    pub fn calibrate_lambda_d(&self) -> Result<StageReport> {
        let s = minimize_scalar(
            |x| self.lambda_d_objective(x),
            self.setup.brackets.lambda_d,
            &self.setup.solver,
            "lambda_d",
        )?;
        Ok(StageReport::from_solution("lambda_d", s))
    }

    /// Returns the stage report, the per-sample rescaling factors at the
    /// optimum and whether the surrogate friction clipped anything.
    pub fn calibrate_lambda_s(&self, lambda_d: f64) -> Result<(StageReport, Vec<f64>, bool)> {
        let obj = self.lambda_s_objective(lambda_d)?;
        let s = minimize_scalar(|x| obj.eval(x), self.setup.brackets.lambda_s, &self.setup.solver, "lambda_s")?;
        let factors = obj.rescale_factors(s.x)?;
        Ok((StageReport::from_solution("lambda_s", s), factors, obj.surrogate_clipped))
    }

    pub fn calibrate_stiffness(&self, lambda_d: f64, lambda_s: f64) -> Result<(StageReport, bool)> {
        let mut clipped = false;
        let s = minimize_scalar(
            |k| {
                let (r, c) = self.stiffness_objective(lambda_d, lambda_s, k)?;
                clipped |= c;
                Ok(r)
            },
            self.setup.brackets.stiffness,
            &self.setup.solver,
            "stiffness",
        )?;
        Ok((StageReport::from_solution("stiffness", s), clipped))
    }

    /// Returns the report and whether any point slips at the fitted friction.
    pub fn calibrate_friction(&self, lambda_d: f64, lambda_s: f64, stiffness: f64) -> Result<(StageReport, bool)> {
        let s = minimize_scalar(
            |mu| Ok(self.friction_objective(lambda_d, lambda_s, stiffness, mu)?.0),
            self.setup.brackets.friction,
            &self.setup.solver,
            "friction",
        )?;
        let (_, identifiable) = self.friction_objective(lambda_d, lambda_s, stiffness, s.x)?;
        Ok((StageReport::from_solution("friction", s), identifiable))
    }

    /// Log-spaced grid over `(lambda_s, K)` around a staged optimum, scored
    /// with the raw stiffness objective.
    pub fn refine_joint(&self, lambda_d: f64, lambda_s: f64, stiffness: f64, decades: f64, n: usize) -> Result<JointRefinement> {
        let n = n.max(2);
        let span = |c: f64| Bracket {
            lo: c * libm::pow(10.0, -decades),
            hi: c * libm::pow(10.0, decades),
        };
        let mut best = JointRefinement {
            lambda_s,
            stiffness,
            residual: self.stiffness_objective(lambda_d, lambda_s, stiffness)?.0,
        };
        for ls in span(lambda_s).log_points(n) {
            for k in span(stiffness).log_points(n) {
                let (r, _) = self.stiffness_objective(lambda_d, ls, k)?;
                if r < best.residual {
                    best = JointRefinement {
                        lambda_s: ls,
                        stiffness: k,
                        residual: r,
                    };
                }
            }
        }
        Ok(best)
    }

    /// All four stages in order.
    pub fn run(&self) -> Result<CalibrationResult> {
        let d = self.calibrate_lambda_d()?;
        let (s, rescale, clipped_s) = self.calibrate_lambda_s(d.value)?;
        let (k, clipped_k) = self.calibrate_stiffness(d.value, s.value)?;
        let (mut lambda_s, mut stiffness) = (s.value, k.value);
        let refinement = match self.setup.joint_refinement {
            Some((decades, n)) => {
                let r = self.refine_joint(d.value, s.value, k.value, decades, n)?;
                lambda_s = r.lambda_s;
                stiffness = r.stiffness;
                Some(r)
            }
            None => None,
        };
        let (mu, identifiable) = self.calibrate_friction(d.value, lambda_s, stiffness)?;
        let params = self.params(d.value, lambda_s, stiffness, mu.value);
        Ok(CalibrationResult {
            params,
            stages: [d, s, k, mu],
            rescale,
            surrogate_clipped: clipped_s || clipped_k,
            friction_identifiable: identifiable,
            refinement,
        })
    }
}

/// The `lambda_s` stage objective with the trackers already run.
///
/// For each sample the shear part of the observation, `Y - M^d`, and the
/// simulated shear `S` are compared after scaling `S` by the ratio of their
/// mean in-contact magnitudes. This is the same as scaling the observation to
/// the simulated magnitude range and then measuring the misfit in observed
/// units.
#[derive(Debug)]
pub struct LambdaSObjective<'c, 'a> {
    calibrator: &'c Calibrator<'a>,
    idx: Vec<usize>,
    states: Vec<TrackerState>,
    shear_obs: Vec<Vec<[f64; 2]>>,
    pub surrogate_clipped: bool,
}

impl LambdaSObjective<'_, '_> {
    fn shear_px(&self, n: usize, lambda_s: f64) -> Result<MarkerField> {
        let c = self.calibrator;
        let i = self.idx[n];
        let scene = &c.scenes[c.scene_of[i]];
        let field = crate::hydroshear::shear_field(
            &self.states[n],
            &c.samples[i].final_pose(),
            &scene.surface,
            &scene.elastomer,
            &scene.grid,
            lambda_s,
        )?;
        Ok(c.px(&field))
    }

    /// Observed over simulated mean in-contact shear magnitude, per sample.
    /// `1 / factor` is the scaling applied to the observation.
    fn ratios(&self, lambda_s: f64) -> Result<Vec<(f64, MarkerField)>> {
        (0..self.idx.len())
            .map(|n| {
                let s = self.shear_px(n, lambda_s)?;
                let taxels = &self.calibrator.contacts[self.idx[n]].indices;
                let (m_obs, m_sim) = (mean_norm(&self.shear_obs[n], taxels), mean_norm(&s.vectors, taxels));
                let r = if m_sim > 0.0 { m_obs / m_sim } else { 0.0 };
                Ok((r, s))
            })
            .collect()
    }

    pub fn eval(&self, lambda_s: f64) -> Result<f64> {
        let mut total = 0.0;
        for (n, (r, s)) in self.ratios(lambda_s)?.into_iter().enumerate() {
            let scaled: Vec<[f64; 2]> = s.vectors.iter().map(|v| [v[0] * r, v[1] * r]).collect();
            total += sq_diff(&scaled, &self.shear_obs[n]);
        }
        Ok(total)
    }

    /// Factors `c` with `Y_hat = M^d + c (Y - M^d)` per sample.
    pub fn rescale_factors(&self, lambda_s: f64) -> Result<Vec<f64>> {
        Ok(self
            .ratios(lambda_s)?
            .into_iter()
            .map(|(r, _)| if r > 0.0 { 1.0 / r } else { 1.0 })
            .collect())
    }
}
