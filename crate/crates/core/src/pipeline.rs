//! Stage cascade: sequential conversion and the clocked pipeline.
//!
//! The clocked model advances in half clock periods. On half-cycle `h`,
//! stages whose index has the parity of `h` sample their input and decide
//! their bit, while the others hold their latched residue for the next
//! stage to sample. A sample accepted on half-cycle `h0` therefore reaches
//! stage `k` on `h0 + k`, and its code is complete on `h0 + N - 1`.

use std::collections::VecDeque;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::config::AdcConfig;
use crate::error::{AdcError, Result};
use crate::impairments::{NOISE_TEMPERATURE_K, StageModel};
use crate::noise::NoiseStream;
use crate::stage::{compare, stage_transfer, ReferencePair};

/// MSB-first bits to an integer code.
pub fn assemble_code(bits: &[u8], resolution: u32) -> Result<u32> {
    if bits.len() != resolution as usize {
        return Err(AdcError::domain(format!(
            "expected {resolution} bits, got {}",
            bits.len()
        )));
    }
    bits.iter().try_fold(0u32, |code, &b| {
        if b > 1 {
            return Err(AdcError::domain(format!("bit must be 0 or 1, got {b}")));
        }
        Ok((code << 1) | u32::from(b))
    })
}

/// A configured converter with its stage models resolved.
#[derive(Clone, Debug)]
pub struct Converter {
    resolution: u32,
    refs: ReferencePair,
    models: Vec<StageModel>,
    noise: NoiseStream,
}

impl Converter {
    pub fn new(cfg: &AdcConfig) -> Result<Self> {
        cfg.validate()?;
        let settle = cfg.settle_time_s();
        let models = cfg
            .stages
            .iter()
            .map(|s| s.model(settle, NOISE_TEMPERATURE_K))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            resolution: cfg.resolution,
            refs: cfg.refs,
            models,
            noise: NoiseStream::new(cfg.seed),
        })
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn refs(&self) -> &ReferencePair {
        &self.refs
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.resolution) - 1
    }

    /// Decide one stage for a given sample. The last stage only compares.
    fn stage_step(&self, stage: usize, vin: f64, sample: u64) -> Result<(u8, f64)> {
        let model = &self.models[stage];
        if stage + 1 == self.models.len() {
            let bit = compare(vin, self.refs.threshold(), model.offset)?;
            return Ok((bit, f64::NAN));
        }
        let d = stage_transfer(vin, model, &self.refs, &mut self.noise.stage(sample, stage))?;
        Ok((d.bit, d.residue))
    }

    /// Convert one sample by running the stages back to back.
    /// `sample` selects the noise streams for this conversion.
    pub fn convert_sample(&self, vin: f64, sample: u64) -> Result<u32> {
        if !vin.is_finite() {
            return Err(AdcError::domain(format!("input must be finite, got {vin}")));
        }
        let mut v = vin;
        let mut code = 0u32;
        for stage in 0..self.models.len() {
            let (bit, residue) = self.stage_step(stage, v, sample)?;
            code = (code << 1) | u32::from(bit);
            v = residue;
        }
        Ok(code)
    }

    pub fn convert_all(&self, samples: &[f64]) -> Result<Vec<u32>> {
        samples
            .iter()
            .enumerate()
            .map(|(i, &v)| self.convert_sample(v, i as u64))
            .collect()
    }
}

/// Clock-management state machine driving the stage address decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Controller {
    Idle,
    Running { address: u32 },
    Stopped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlEvent {
    Start,
    Clock,
    Stop,
}

/// Result of one controller step; `wrapped` marks the end of an address cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ControllerStep {
    pub state: Controller,
    pub wrapped: bool,
}

pub fn controller_step(state: Controller, event: ControlEvent, stages: u32) -> ControllerStep {
    let next = |state| ControllerStep { state, wrapped: false };
    match (state, event) {
        (Controller::Idle | Controller::Stopped, ControlEvent::Start) => next(Controller::Running { address: 0 }),
        (Controller::Running { address }, ControlEvent::Clock) => {
            let a = (address + 1) % stages.max(1);
            ControllerStep {
                state: Controller::Running { address: a },
                wrapped: a == 0,
            }
        }
        (Controller::Running { .. }, ControlEvent::Stop) => next(Controller::Stopped),
        (s, e) => {
            debug!("controller ignored {e:?} in state {s:?}");
            next(s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Latched {
    sample: u64,
    residue: f64,
}

/// Mutable state of the clocked pipeline.
#[derive(Clone, Debug)]
pub struct PipelineState {
    /// Residue held by each stage after its most recent sampling phase.
    latches: Vec<Option<Latched>>,
    /// Delay line per stage; stage `k` holds `N - 1 - k` half-cycles of bits.
    align: Vec<VecDeque<Option<(u64, u8)>>>,
    pub controller: Controller,
    /// Half-cycle counter.
    pub tick: u64,
    next_sample: u64,
}

impl PipelineState {
    pub fn new(stages: usize) -> Self {
        Self {
            latches: vec![None; stages],
            align: (0..stages).map(|k| VecDeque::with_capacity(stages - k)).collect(),
            controller: Controller::Idle,
            tick: 0,
            next_sample: 0,
        }
    }

    /// Pending entries in each stage's alignment register.
    pub fn alignment_depths(&self) -> Vec<usize> {
        self.align.iter().map(VecDeque::len).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.latches.iter().all(Option::is_none) && self.align.iter().all(|q| q.iter().all(Option::is_none))
    }
}

/// An emitted conversion result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Emitted {
    pub sample: u64,
    pub code: u32,
}

/// Half-cycle clocked pipeline around a [`Converter`].
#[derive(Clone, Debug)]
pub struct Pipeline {
    conv: Converter,
    state: PipelineState,
}

impl Pipeline {
    pub fn new(cfg: &AdcConfig) -> Result<Self> {
        let conv = Converter::new(cfg)?;
        let state = PipelineState::new(conv.models.len());
        Ok(Self { conv, state })
    }

    pub fn state(&self) -> &PipelineState {
        &self.state
    }

    /// Half-cycles from accepting a sample to emitting its code.
    pub fn latency_half_cycles(&self) -> u64 {
        self.conv.models.len() as u64 - 1
    }

    /// Latency rounded up to whole clock periods.
    pub fn latency_cycles(&self) -> u64 {
        self.latency_half_cycles().div_ceil(2)
    }

    /// True on half-cycles where stage 0 samples (phase 1).
    pub fn accepts_input(&self) -> bool {
        self.state.tick % 2 == 0
    }

    pub fn control(&mut self, event: ControlEvent) -> ControllerStep {
        let step = controller_step(self.state.controller, event, self.conv.resolution);
        self.state.controller = step.state;
        step
    }

    /// Advance one half clock period, optionally offering a new sample.
    pub fn tick(&mut self, sample: Option<f64>) -> Result<Option<Emitted>> {
        let n = self.conv.models.len();
        let parity = (self.state.tick % 2) as usize;
        if sample.is_some() {
            if !matches!(self.state.controller, Controller::Running { .. }) {
                return Err(AdcError::NotReady("controller is not running"));
            }
            if parity != 0 {
                return Err(AdcError::NotReady("input is only sampled on phase 1"));
            }
        }

        // Stages of this tick's parity sample; the others hold. Inputs come
        // only from opposite-parity stages, so update order does not matter.
        let mut decided: Vec<Option<(u64, u8)>> = vec![None; n];
        for k in (parity..n).step_by(2) {
            let input = if k == 0 {
                sample.map(|v| {
                    let id = self.state.next_sample;
                    self.state.next_sample += 1;
                    (id, v)
                })
            } else {
                self.state.latches[k - 1].map(|l| (l.sample, l.residue))
            };
            self.state.latches[k] = match input {
                Some((id, v)) => {
                    let (bit, residue) = self.conv.stage_step(k, v, id)?;
                    decided[k] = Some((id, bit));
                    Some(Latched { sample: id, residue })
                }
                None => None,
            };
        }

        let mut outputs: Vec<Option<(u64, u8)>> = Vec::with_capacity(n);
        for (k, line) in self.state.align.iter_mut().enumerate() {
            line.push_back(decided[k]);
            outputs.push(if line.len() > n - 1 - k { line.pop_front().flatten() } else { None });
        }

        if parity == 0 {
            if let Controller::Running { .. } = self.state.controller {
                self.state.controller = controller_step(self.state.controller, ControlEvent::Clock, self.conv.resolution).state;
            }
        }
        self.state.tick += 1;

        if outputs[n - 1].is_none() {
            return Ok(None);
        }
        let id = outputs[n - 1].map(|(id, _)| id).unwrap_or_default();
        let mut bits = Vec::with_capacity(n);
        for out in &outputs {
            match out {
                Some((s, b)) if *s == id => bits.push(*b),
                other => {
                    return Err(AdcError::domain(format!(
                        "bit alignment lost for sample {id}: found {other:?}"
                    )))
                }
            }
        }
        let code = assemble_code(&bits, self.conv.resolution)?;
        Ok(Some(Emitted { sample: id, code }))
    }
}

/// Codes from a streamed run, in input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeStream {
    pub codes: Vec<u32>,
    /// Fill latency in whole clock periods.
    pub latency_cycles: u64,
    pub latency_half_cycles: u64,
    /// Half-cycle index on which each code was emitted.
    #[serde(skip)]
    pub emit_ticks: Vec<u64>,
}

/// Stream samples through the clocked pipeline, one per clock period.
pub fn run_stream(samples: &[f64], cfg: &AdcConfig) -> Result<CodeStream> {
    if samples.is_empty() {
        return Err(AdcError::domain("run_stream needs at least one sample"));
    }
    let mut pipe = Pipeline::new(cfg)?;
    pipe.control(ControlEvent::Start);
    let mut codes = Vec::with_capacity(samples.len());
    let mut emit_ticks = Vec::with_capacity(samples.len());
    let mut pending = samples.iter();
    while codes.len() < samples.len() {
        let offer = if pipe.accepts_input() { pending.next().copied() } else { None };
        let tick = pipe.state.tick;
        if let Some(e) = pipe.tick(offer)? {
            debug_assert_eq!(e.sample as usize, codes.len());
            codes.push(e.code);
            emit_ticks.push(tick);
        }
    }
    pipe.control(ControlEvent::Stop);
    Ok(CodeStream {
        codes,
        latency_cycles: pipe.latency_cycles(),
        latency_half_cycles: pipe.latency_half_cycles(),
        emit_ticks,
    })
}
