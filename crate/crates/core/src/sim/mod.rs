//! The discrete-step market simulation loop.
//!
//! Within a step: expiries, fundamental and reflexive updates, momentum
//! update, traders in index order (all seeing the previous step's top of
//! book), the execution agent last, then the end-of-step snapshot.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agents::{
    demand_to_intents, exponential_duration, fundamental_demand, zi_step, ChiarellaParams, EmpiricalOrderDistribution, FundamentalState,
    MomentumState, Population, RateProfile, TraderKind, ZiCancelMode, ZiIntent, ZiParams,
};
use crate::calibration::ImpactModel;
use crate::error::{Error, Result};
use crate::execution::{ExecutionAgent, ExecutionRecord, ExecutionSchedule};
use crate::lob::{AgentId, Event, Order, OrderBook, OrderId, Price, Qty, Side, Step, SubmitStatus, TopOfBook, Trade};
use crate::rng::{DrawStream, SeedSet, StreamId};
use crate::session::SessionCalendar;

/// Agent id used for the orders that seed the opening book.
pub const BOOK_SEED_AGENT_ID: AgentId = AgentId::MAX - 1;

/// Statistics should skip this many steps after the open.
pub const WARMUP_STEPS: Step = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookLevel {
    pub side: Side,
    pub price: Price,
    pub quantity: Qty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSpec {
    /// Starting value in ticks; the opening mid when absent.
    pub initial: Option<f64>,
    /// Drift per step.
    pub drift: f64,
    /// Volatility per step.
    pub volatility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TraderSetup {
    Chiarella { params: ChiarellaParams, population: Population },
    Zi { params: ZiParams, count: u32, cancel: ZiCancelMode },
}

/// Everything a run needs apart from seeds and the execution schedule.
#[derive(Debug, Clone)]
pub struct MarketModel {
    pub calendar: SessionCalendar,
    /// Per-step arrival probabilities by minute of day.
    pub rates: RateProfile,
    /// Placement sampler; required by the fundamental/momentum/noise traders.
    pub placement: Option<Arc<EmpiricalOrderDistribution>>,
    pub impact: ImpactModel,
    pub fundamental: FundamentalSpec,
    pub traders: TraderSetup,
    pub opening_book: Vec<BookLevel>,
}

impl MarketModel {
    /// ZI market with flat per-step rates taken from `params`.
    pub fn zi(calendar: SessionCalendar, params: ZiParams, count: u32, cancel: ZiCancelMode, opening_book: Vec<BookLevel>) -> Self {
        let rates = RateProfile::flat(&calendar, params.alpha, params.mu);
        MarketModel {
            calendar,
            rates,
            placement: None,
            impact: ImpactModel::new(0.0, 0.5),
            fundamental: FundamentalSpec { initial: None, drift: 0.0, volatility: 0.0 },
            traders: TraderSetup::Zi { params, count, cancel },
            opening_book,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.opening_book.is_empty() {
            return Err(Error::MissingArtifact("opening book".into()));
        }
        if !self.opening_book.iter().any(|l| l.side == Side::Buy) || !self.opening_book.iter().any(|l| l.side == Side::Sell) {
            return Err(Error::Config("opening book must have both sides".into()));
        }
        if self.opening_book.iter().any(|l| l.price <= 0 || l.quantity == 0) {
            return Err(Error::Config("opening book levels need positive prices and quantities".into()));
        }
        if !(self.fundamental.volatility >= 0.0) {
            return Err(Error::Config("fundamental volatility must be non-negative".into()));
        }
        match &self.traders {
            TraderSetup::Chiarella { params, .. } => {
                params.validate()?;
                if self.placement.is_none() {
                    return Err(Error::MissingArtifact("placement distribution".into()));
                }
            }
            TraderSetup::Zi { params, .. } => params.validate()?,
        }
        Ok(())
    }

    pub fn with_chiarella(&self, params: ChiarellaParams) -> Self {
        let mut m = self.clone();
        if let TraderSetup::Chiarella { population, .. } = &self.traders {
            m.traders = TraderSetup::Chiarella { params, population: *population };
        }
        m
    }

    pub fn chiarella_params(&self) -> Option<&ChiarellaParams> {
        match &self.traders {
            TraderSetup::Chiarella { params, .. } => Some(params),
            TraderSetup::Zi { .. } => None,
        }
    }
}

/// What a run keeps besides the end-of-step mids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Recording {
    pub trades: bool,
    pub events: bool,
    /// Spreads, excess demand, arrival counts and order signs.
    pub series: bool,
    pub fundamental: bool,
    /// Unrounded depths of ZI limit orders.
    pub zi_depths: bool,
    /// Sample total resting volume every this many steps (0 disables).
    pub depth_every: Step,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathRecord {
    pub steps: Step,
    /// Mid after seeding the opening book.
    pub open_mid: f64,
    /// End-of-step mid, carried over one-sided books.
    pub mids: Vec<f64>,
    pub spreads: Vec<Price>,
    pub excess_demand: Vec<f64>,
    /// (V, X) after each step's update.
    pub fundamental: Vec<(f64, f64)>,
    /// Per session minute (counted from the first simulated step): orders
    /// that rested on the book, and orders that traded on arrival.
    pub limit_arrivals: Vec<u32>,
    pub market_arrivals: Vec<u32>,
    /// Side of each order that traded on arrival, in order.
    pub order_signs: Vec<i8>,
    pub trades: Vec<Trade>,
    pub events: Vec<Event>,
    pub zi_depths: Vec<f64>,
    pub depth_samples: Vec<Qty>,
    pub carried_steps: u64,
    pub execution: Option<ExecutionRecord>,
}

struct Arrivals<'a> {
    on: bool,
    minute_index: usize,
    rec: &'a mut PathRecord,
}

impl Arrivals<'_> {
    #[inline]
    fn note(&mut self, side: Side, status: SubmitStatus) {
        if !self.on {
            return;
        }
        if let SubmitStatus::Accepted { filled, queued, .. } = status {
            if queued > 0 {
                self.rec.limit_arrivals[self.minute_index] += 1;
            }
            if filled > 0 {
                self.rec.market_arrivals[self.minute_index] += 1;
                self.rec.order_signs.push(side.sign() as i8);
            }
        }
    }
}

fn total_depth(book: &OrderBook) -> Qty {
    book.bids().levels().map(|(_, q)| q).sum::<Qty>() + book.asks().levels().map(|(_, q)| q).sum::<Qty>()
}

/// Runs the market for `steps` steps. Deterministic in `(model, seeds,
/// schedule)`; a baseline and its counterfactual share `seeds`.
pub fn simulate(
    model: &MarketModel,
    seeds: &SeedSet,
    steps: Step,
    recording: &Recording,
    schedule: Option<&ExecutionSchedule>,
) -> Result<PathRecord> {
    model.validate()?;
    let cal = &model.calendar;
    let spm = cal.steps_per_minute();
    let mut rec = PathRecord { steps, mids: Vec::with_capacity(steps as usize), ..Default::default() };
    if recording.series {
        let minutes = steps.div_ceil(spm) as usize;
        rec.limit_arrivals = vec![0; minutes];
        rec.market_arrivals = vec![0; minutes];
        rec.spreads.reserve(steps as usize);
        rec.excess_demand.reserve(steps as usize);
    }

    let mut book = if recording.events { OrderBook::new().with_event_log() } else { OrderBook::new() };
    let mut next_id: OrderId = 1;
    let mut trades: Vec<Trade> = Vec::with_capacity(64);

    // opening book with sampled lifetimes
    let mut seed_stream = seeds.stream(StreamId::BookSeed);
    let mut seeded: Vec<OrderId> = Vec::new();
    let open_minute = cal.minute_of_day(0);
    let open_bid = model.opening_book.iter().filter(|l| l.side == Side::Buy).map(|l| l.price).max();
    let open_ask = model.opening_book.iter().filter(|l| l.side == Side::Sell).map(|l| l.price).min();
    let open_spread = match (open_bid, open_ask) {
        (Some(b), Some(a)) => (a - b).max(1),
        _ => 1,
    };
    for lvl in &model.opening_book {
        let u = seed_stream.uniform();
        let duration = match &model.traders {
            TraderSetup::Zi { cancel: ZiCancelMode::PerStep, .. } => None,
            TraderSetup::Zi { params, .. } => Some(exponential_duration(-(1.0 - u).ln() / params.delta)),
            TraderSetup::Chiarella { .. } => {
                model.placement.as_ref().map(|d| d.sample_limit_tuple(open_spread, open_minute, u).duration.max(1))
            }
        };
        let order = Order::limit(next_id, BOOK_SEED_AGENT_ID, lvl.side, lvl.price, lvl.quantity, 0, duration);
        if duration.is_none() {
            seeded.push(next_id);
        }
        next_id += 1;
        book.submit_into(order, &mut trades);
    }
    trades.clear();
    let (mut prev_top, _) = book.observe_top();
    let open_mid = prev_top.mid.ok_or_else(|| Error::Config("opening book does not produce a mid price".into()))?;
    rec.open_mid = open_mid;

    let mut fund = FundamentalState::new(model.fundamental.initial.unwrap_or(open_mid), model.fundamental.drift, model.fundamental.volatility);
    let mut fund_stream = seeds.stream(StreamId::Fundamental);
    let mut mom_h = MomentumState::default();
    let mut mom_l = MomentumState::default();
    let mut last_mid = open_mid;
    let mut before_last_mid = open_mid;
    let mut q_prev = 0.0;

    let (kinds, chiarella, zi): (Vec<TraderKind>, Option<ChiarellaParams>, Option<(ZiParams, ZiCancelMode)>) = match &model.traders {
        TraderSetup::Chiarella { params, population } => (population.kinds(), Some(*params), None),
        TraderSetup::Zi { params, count, cancel } => (vec![TraderKind::Zi; *count as usize], None, Some((*params, *cancel))),
    };
    let mut streams: Vec<DrawStream> = (0..kinds.len() as u32).map(|i| seeds.stream(StreamId::Agent(i))).collect();
    let mut cancel_stream = seeds.stream(StreamId::Aux(0));
    let mut zi_live: Vec<OrderId> = if matches!(zi, Some((_, ZiCancelMode::PerStep))) { seeded } else { Vec::new() };
    let placement = model.placement.as_deref();

    let mut exec = schedule.map(ExecutionAgent::new);
    let mut minute = open_minute;

    for step in 0..steps {
        if step % spm == 0 {
            minute = cal.minute_of_day(step);
        }
        book.expire_orders(step);
        if let Some((params, ZiCancelMode::PerStep)) = zi {
            zi_live.retain(|&id| {
                if !book.is_resting(id) {
                    return false;
                }
                if cancel_stream.uniform() < params.delta {
                    book.cancel(id, step);
                    return false;
                }
                true
            });
        }

        fund.update_fundamental(fund_stream.normal());
        fund.update_reflexive(q_prev, &model.impact);
        if let Some(p) = &chiarella {
            mom_h.update(before_last_mid, last_mid, p.eta_h);
            mom_l.update(before_last_mid, last_mid, p.eta_l);
        }

        let bests = match (prev_top.best_bid, prev_top.best_ask) {
            (Some(b), Some(a)) => Some((b, a)),
            _ => None,
        };
        let spread = prev_top.spread.unwrap_or(1).max(1);
        let alpha = model.rates.alpha(minute);
        let mu = model.rates.mu(minute);
        trades.clear();
        let mut arrivals = Arrivals { on: recording.series, minute_index: (step / spm) as usize, rec: &mut rec };

        for (i, kind) in kinds.iter().enumerate() {
            let s = &mut streams[i];
            let agent_id = i as AgentId;
            if let Some((params, mode)) = zi {
                let p = ZiParams { alpha, mu, ..params };
                let (limit, market) = zi_step(last_mid, &p, mode, s);
                if let Some(ZiIntent::Limit { side, price, quantity, duration, depth }) = limit {
                    if recording.zi_depths {
                        arrivals.rec.zi_depths.push(depth);
                    }
                    if price > 0 {
                        let id = next_id;
                        next_id += 1;
                        let order = Order::limit(id, agent_id, side, price, quantity, step, duration.map(|d| step + d));
                        let status = book.submit_into(order, &mut trades);
                        arrivals.note(side, status);
                        if mode == ZiCancelMode::PerStep && matches!(status, SubmitStatus::Accepted { queued, .. } if queued > 0) {
                            zi_live.push(id);
                        }
                    }
                }
                if let Some(ZiIntent::Market { side, quantity }) = market {
                    let order = Order::market(next_id, agent_id, side, quantity, step);
                    next_id += 1;
                    let status = book.submit_into(order, &mut trades);
                    arrivals.note(side, status);
                }
                continue;
            }

            // fixed draw count per step for common random numbers
            let z = s.normal();
            let u_limit = s.uniform();
            let u_market = s.uniform();
            let u_place = s.uniform();
            let u_volume = s.uniform();
            let (Some(p), Some(dist), Some((bb, ba))) = (&chiarella, placement, bests) else {
                continue;
            };
            let demand = match kind {
                TraderKind::Fundamental => fundamental_demand(&fund, bb, ba, p.kappa),
                TraderKind::MomentumHf => mom_h.demand(p.beta_h, p.gamma_h),
                TraderKind::MomentumLf => mom_l.demand(p.beta_l, p.gamma_l),
                TraderKind::Noise => p.sigma * z,
                TraderKind::Zi => 0.0,
            };
            let intents = demand_to_intents(demand, alpha, mu, u_limit, u_market);
            if let Some(side) = intents.limit {
                let pl = dist.sample_placement(spread, minute, side, bb, ba, u_place);
                if pl.price > 0 && pl.volume > 0 {
                    let order = Order::limit(next_id, agent_id, side, pl.price, pl.volume, step, Some(step + pl.duration.max(1)));
                    next_id += 1;
                    let status = book.submit_into(order, &mut trades);
                    arrivals.note(side, status);
                }
            }
            if let Some(side) = intents.market {
                let volume = dist.sample_market_volume(spread, minute, u_volume);
                if volume > 0 {
                    let order = Order::market(next_id, agent_id, side, volume, step);
                    next_id += 1;
                    let status = book.submit_into(order, &mut trades);
                    arrivals.note(side, status);
                }
            }
        }

        if let Some(agent) = exec.as_mut() {
            agent.act(step, Some(last_mid), &mut book, &mut next_id, &mut trades);
        }

        // signed excess demand against the mid at the start of the step
        let q: f64 = trades
            .iter()
            .map(|t| {
                let px = t.price as f64;
                let sign = if px > last_mid {
                    1.0
                } else if px < last_mid {
                    -1.0
                } else {
                    t.aggressor_side.sign() as f64
                };
                sign * t.quantity as f64
            })
            .sum();

        let (top, carried): (TopOfBook, bool) = book.observe_top();
        let mid = top.mid.unwrap_or(last_mid);
        if carried {
            rec.carried_steps += 1;
        }
        rec.mids.push(mid);
        if recording.series {
            rec.spreads.push(top.spread.unwrap_or(spread));
            rec.excess_demand.push(q);
        }
        if recording.fundamental {
            rec.fundamental.push((fund.value, fund.reflexive));
        }
        if recording.trades {
            rec.trades.extend_from_slice(&trades);
        }
        if recording.depth_every > 0 && step % recording.depth_every == 0 {
            rec.depth_samples.push(total_depth(&book));
        }
        before_last_mid = last_mid;
        last_mid = mid;
        prev_top = top;
        q_prev = q;
    }

    if recording.events {
        rec.events = book.take_events();
    }
    rec.execution = exec.map(ExecutionAgent::into_record);
    Ok(rec)
}
