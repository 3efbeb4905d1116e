use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::json;

use liqsim::calibration::{calibrate_day, estimate_rates_from, build_distributions, CalibrationBundle, PipelineSettings, RateEstimate};
use liqsim::lob::{write_event_log, Step};
use liqsim::market_data::{
    export_ticks, parse_tick_file, parse_trade_file, rebuild_book, write_l2_csv, write_limit_orders, write_market_orders, write_ticks,
    write_trades, Parsed, Reconstruction,
};
use liqsim::risk::output::{
    write_costs, write_fills, write_frontier, write_frontier_choices, write_impact_curves, write_seed_line, write_surface,
};
use liqsim::risk::{
    build_surface, efficient_frontier, mean_impact_curve, monte_carlo, run_paired, thread_pool, BloombergTcParams, FrontierPoint, SurfaceSpec,
};
use liqsim::rng::SeedSet;
use liqsim::session::SessionCalendar;
use liqsim::sim::{simulate, MarketModel, PathRecord, Recording};

use crate::config::{parse_side, seconds_to_steps, RunConfig, EXAMPLE};
use crate::manifest::{sha256_hex, Manifest};
use crate::{Cli, Command};

struct Ctx {
    cfg: RunConfig,
    config_path: Option<PathBuf>,
    config_sha256: String,
    out: PathBuf,
    pool: rayon::ThreadPool,
    outputs: Vec<PathBuf>,
    summary: BTreeMap<String, serde_json::Value>,
}

impl Ctx {
    fn create(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.out.join(name);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
        body(&mut w).and_then(|_| w.flush()).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(path);
        Ok(())
    }

    fn note(&mut self, key: &str, value: serde_json::Value) {
        self.summary.insert(key.to_string(), value);
    }

    fn seed(&self) -> u64 {
        self.cfg.master_seed
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Command::Config { example } = cli.command {
        if !example {
            bail!("nothing to do; pass --example to print a commented configuration");
        }
        print!("{EXAMPLE}");
        return Ok(());
    }
    let (mut cfg, config_sha256) = match &cli.config {
        Some(p) => {
            let (cfg, bytes) = RunConfig::load(p)?;
            (cfg, sha256_hex(&bytes))
        }
        None => {
            let cfg = RunConfig::default();
            let text = toml::to_string(&cfg).context("cannot serialize the default config")?;
            (cfg, sha256_hex(text.as_bytes()))
        }
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(o) = cli.out {
        cfg.output_dir = o;
    }
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).with_context(|| format!("cannot create output directory {}", out.display()))?;
    let pool = thread_pool(cfg.threads)?;
    let mut ctx = Ctx { cfg, config_path: cli.config, config_sha256, out, pool, outputs: Vec::new(), summary: BTreeMap::new() };

    let started = Instant::now();
    let name = match cli.command {
        Command::Ingest => {
            ingest(&mut ctx)?;
            "ingest"
        }
        Command::Calibrate => {
            calibrate(&mut ctx)?;
            "calibrate"
        }
        Command::Simulate => {
            simulate_cmd(&mut ctx)?;
            "simulate"
        }
        Command::Impact => {
            impact(&mut ctx)?;
            "impact"
        }
        Command::Surface => {
            surface(&mut ctx)?;
            "surface"
        }
        Command::Frontier => {
            frontier(&mut ctx)?;
            "frontier"
        }
        Command::Config { .. } => unreachable!("handled above"),
    };
    let manifest = Manifest {
        command: name.to_string(),
        config_path: ctx.config_path.clone(),
        config_sha256: ctx.config_sha256.clone(),
        master_seed: ctx.seed(),
        threads: ctx.pool.current_num_threads(),
        liqsim_version: liqsim::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs: ctx.outputs.clone(),
        summary: ctx.summary.clone(),
    };
    let path = manifest.write(&ctx.out)?;
    log::info!("{name} finished in {:.1} s; manifest {}", manifest.wall_time_s, path.display());
    Ok(())
}

/// The bundle market when configured, otherwise the synthetic one on the
/// configured session.
fn load_market(cfg: &RunConfig) -> Result<MarketModel> {
    match &cfg.market.bundle {
        Some(dir) => {
            let bundle = CalibrationBundle::load(dir).with_context(|| format!("cannot load bundle {}", dir.display()))?;
            if bundle.calendar != cfg.session.calendar()? {
                log::warn!("the bundle's session differs from [session]; using the bundle's");
            }
            Ok(bundle.to_model()?)
        }
        None => {
            let mut spec = cfg.market.synthetic.clone();
            spec.windows = cfg.session.windows.clone();
            spec.step_ms = cfg.session.step_ms;
            Ok(spec.model()?)
        }
    }
}

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref().with_context(|| format!("data.{key} must name a tick file"))
}

fn report_skipped<T>(path: &Path, parsed: &Parsed<T>) {
    if parsed.skipped() > 0 {
        log::warn!("{}: skipped {} malformed rows", path.display(), parsed.skipped());
    }
}

fn load_day(ctx: &mut Ctx) -> Result<(Reconstruction, SessionCalendar)> {
    let calendar = ctx.cfg.session.calendar()?;
    let orders_path = required(&ctx.cfg.data.orders, "orders")?.to_path_buf();
    let trades_path = required(&ctx.cfg.data.trades, "trades")?.to_path_buf();
    let ops = parse_tick_file(&orders_path)?;
    let trades = parse_trade_file(&trades_path)?;
    report_skipped(&orders_path, &ops);
    report_skipped(&trades_path, &trades);
    let rec = rebuild_book(&ops.records, &trades.records, &calendar)?;
    ctx.create("skipped_rows.csv", |w| {
        writeln!(w, "file,line,message")?;
        for (path, errors) in [(&orders_path, &ops.errors), (&trades_path, &trades.errors)] {
            for e in errors {
                writeln!(w, "{},{},\"{}\"", path.display(), e.line, e.message.replace('"', "'"))?;
            }
        }
        Ok(())
    })?;
    ctx.note("operations", json!(ops.records.len()));
    ctx.note("trades", json!(trades.records.len()));
    ctx.note("skipped_order_rows", json!(ops.skipped()));
    ctx.note("skipped_trade_rows", json!(trades.skipped()));
    ctx.note("limit_orders", json!(rec.limit_orders.len()));
    ctx.note("market_orders", json!(rec.market_orders.len()));
    ctx.note("unannotated_trades", json!(rec.unannotated));
    Ok((rec, calendar))
}

fn hhmm(minute: u32) -> String {
    format!("{:02}:{:02}", minute / 60, minute % 60)
}

fn write_rates(ctx: &mut Ctx, rates: &RateEstimate) -> Result<()> {
    ctx.create("rates.csv", |w| {
        writeln!(w, "minute,alpha,mu,alpha_se,mu_se")?;
        for (m, (a_se, m_se)) in &rates.standard_errors {
            writeln!(w, "{},{},{},{},{}", hhmm(*m), rates.profile.alpha(*m), rates.profile.mu(*m), a_se, m_se)?;
        }
        Ok(())
    })
}

fn ingest(ctx: &mut Ctx) -> Result<()> {
    let (rec, calendar) = load_day(ctx)?;
    ctx.create("l2.csv", |w| write_l2_csv(w, &rec.l2))?;
    ctx.create("limit_orders.csv", |w| write_limit_orders(w, &rec.limit_orders))?;
    ctx.create("market_orders.csv", |w| write_market_orders(w, &rec.market_orders))?;
    let (_, occupancy) = build_distributions(&rec.limit_orders, &rec.market_orders, &calendar, ctx.cfg.calibration.bucket_minutes)?;
    ctx.create("occupancy.csv", |w| occupancy.write_csv(w))?;
    let rates = estimate_rates_from(&rec, &calendar)?;
    write_rates(ctx, &rates)
}

fn calibrate(ctx: &mut Ctx) -> Result<()> {
    let (rec, calendar) = load_day(ctx)?;
    let settings = PipelineSettings {
        bucket_minutes: ctx.cfg.calibration.bucket_minutes,
        population: ctx.cfg.market.synthetic.population,
        chiarella: ctx.cfg.market.synthetic.chiarella,
        bounds: ctx.cfg.calibration.bounds,
        calibration: ctx.cfg.calibration_settings(),
    };
    let out = ctx.pool.install(|| calibrate_day(&rec, &calendar, &settings))?;
    let dir = ctx.out.join("bundle");
    out.bundle.save(&dir)?;
    ctx.outputs.push(dir);
    ctx.create("occupancy.csv", |w| out.occupancy.write_csv(w))?;
    write_rates(ctx, &out.rates)?;
    let b = &out.behaviour;
    ctx.note("lambda_mi", json!(out.bundle.impact.lambda));
    ctx.note("gamma_mi", json!(out.bundle.impact.gamma));
    ctx.note("impact_r_squared", json!(out.bundle.impact_r_squared));
    ctx.note("sigma_v_step", json!(out.bundle.fundamental.volatility));
    ctx.note("distance", json!(b.distance));
    ctx.note("evaluations", json!(b.log.len()));
    ctx.note("repeats", json!(b.repeats));
    ctx.note("warnings", json!(b.warnings));
    ctx.note("degenerate_facts", json!(out.target_facts.degenerate));
    Ok(())
}

fn write_path(w: &mut impl Write, seed: u64, every: Step, base: &PathRecord, cf: Option<&PathRecord>) -> std::io::Result<()> {
    write_seed_line(w, seed)?;
    match cf {
        Some(_) => writeln!(w, "step,mid_baseline,spread_baseline,mid_counterfactual,spread_counterfactual")?,
        None => writeln!(w, "step,mid,spread")?,
    }
    let every = every.max(1) as usize;
    for i in (0..base.mids.len()).step_by(every) {
        write!(w, "{},{},{}", i, base.mids[i], base.spreads.get(i).map_or(String::new(), |s| s.to_string()))?;
        if let Some(c) = cf {
            write!(w, ",{},{}", c.mids[i], c.spreads.get(i).map_or(String::new(), |s| s.to_string()))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn export_days(ctx: &mut Ctx, path: &PathRecord, calendar: &SessionCalendar, days: u64) -> Result<()> {
    for day in 0..days {
        let ticks = export_ticks(&path.events, calendar, day);
        let suffix = if days > 1 { format!("_day{day}") } else { String::new() };
        ctx.create(&format!("orders{suffix}.csv"), |w| write_ticks(w, &ticks.ops))?;
        ctx.create(&format!("trades{suffix}.csv"), |w| write_trades(w, &ticks.trades))?;
    }
    Ok(())
}

fn simulate_cmd(ctx: &mut Ctx) -> Result<()> {
    let model = load_market(&ctx.cfg)?;
    let sc = ctx.cfg.simulate.clone();
    if sc.days == 0 {
        bail!("simulate.days must be at least 1");
    }
    let steps = sc.days * model.calendar.steps_per_day();
    let recording = Recording { series: true, trades: true, events: sc.event_log || sc.export_ticks, ..Default::default() };
    let seeds = SeedSet::new(ctx.seed(), 0);
    let seed = ctx.seed();
    match &sc.strategy {
        None => {
            let path = simulate(&model, &seeds, steps, &recording, None)?;
            ctx.create("path.csv", |w| write_path(w, seed, sc.sample_every, &path, None))?;
            if sc.event_log {
                ctx.create("events.csv", |w| write_event_log(w, &path.events))?;
            }
            if sc.export_ticks {
                export_days(ctx, &path, &model.calendar, sc.days)?;
            }
            ctx.note("trades", json!(path.trades.len()));
            ctx.note("final_mid", json!(path.mids.last()));
        }
        Some(id) => {
            let schedule = ctx.cfg.strategy(id)?.schedule(&model)?;
            if schedule.end_step() > steps {
                bail!("strategy `{id}` ends after the simulated {} days", sc.days);
            }
            let run = run_paired(&model, &seeds, steps, &schedule, &recording)?;
            ctx.create("path.csv", |w| write_path(w, seed, sc.sample_every, &run.baseline, Some(&run.counterfactual)))?;
            if sc.event_log {
                ctx.create("events.csv", |w| write_event_log(w, &run.baseline.events))?;
                ctx.create("events_counterfactual.csv", |w| write_event_log(w, &run.counterfactual.events))?;
            }
            if sc.export_ticks {
                export_days(ctx, &run.baseline, &model.calendar, sc.days)?;
            }
            let exec = run.counterfactual.execution.as_ref().expect("paired runs carry an execution record");
            ctx.create("fills.csv", |w| write_fills(w, seed, &[(0, exec)]))?;
            ctx.create("costs.csv", |w| write_costs(w, seed, &[(id.as_str(), &run.cost)]))?;
            ctx.note("cost_total_bps", json!(run.cost.total_bps()));
            ctx.note("cost_market_impact_bps", json!(run.cost.market_impact_bps()));
            ctx.note("executed_fraction", json!(run.cost.executed_fraction));
        }
    }
    Ok(())
}

fn impact(ctx: &mut Ctx) -> Result<()> {
    let model = load_market(&ctx.cfg)?;
    let ic = ctx.cfg.impact.clone();
    let tail = seconds_to_steps(ic.tail_s, &model.calendar)?;
    let mut curves = Vec::new();
    let mut costs = Vec::new();
    for s in ctx.cfg.select(&ic.strategies)? {
        let schedule = s.schedule(&model)?;
        let steps = schedule.end_step() + tail;
        let runs = monte_carlo(&ctx.pool, &model, &schedule, steps, ctx.cfg.master_seed, ic.n_runs, steps - schedule.start_step)?;
        curves.push(mean_impact_curve(&s.id, schedule.start_step, &runs));
        costs.extend(runs.into_iter().map(|r| (s.id.clone(), r.cost)));
    }
    let seed = ctx.seed();
    ctx.create("impact.csv", |w| write_impact_curves(w, seed, &curves))?;
    let rows: Vec<(&str, _)> = costs.iter().map(|(id, c)| (id.as_str(), c)).collect();
    ctx.create("costs.csv", |w| write_costs(w, seed, &rows))?;
    ctx.note("strategies", json!(curves.iter().map(|c| c.strategy_id.clone()).collect::<Vec<_>>()));
    ctx.note("n_runs", json!(ic.n_runs));
    Ok(())
}

fn surface(ctx: &mut Ctx) -> Result<()> {
    let model = load_market(&ctx.cfg)?;
    let sc = ctx.cfg.surface.clone();
    let cal = &model.calendar;
    let tick = ctx.cfg.session.tick_size;
    let spec = SurfaceSpec {
        horizons: sc.horizons_s.iter().map(|&h| seconds_to_steps(h, cal)).collect::<Result<_>>()?,
        sizes: sc.sizes.clone(),
        side: parse_side(&sc.side)?,
        interval_steps: seconds_to_steps(sc.interval_s, cal)?.max(1),
        start_step: seconds_to_steps(sc.start_s, cal)?,
        tail_steps: seconds_to_steps(sc.tail_s, cal)?,
        n_runs: sc.n_runs,
        master_seed: ctx.seed(),
        // the simulator prices in ticks
        bloomberg: sc.bloomberg.as_ref().map(|b| BloombergTcParams::standard(b.sigma_daily / tick, b.adv, b.spread / tick)),
    };
    let surface = build_surface(&ctx.pool, &model, &spec)?;
    ctx.create("surface.csv", |w| write_surface(w, &surface))?;
    ctx.note("cells", json!(surface.cells.len()));
    ctx.note("extrapolated_cells", json!(surface.cells.iter().filter(|c| c.extrapolated).count()));
    Ok(())
}

fn frontier(ctx: &mut Ctx) -> Result<()> {
    let model = load_market(&ctx.cfg)?;
    let fc = ctx.cfg.frontier.clone();
    let mut points = Vec::new();
    let mut costs = Vec::new();
    for s in ctx.cfg.select(&fc.strategies)? {
        let schedule = s.schedule(&model)?;
        let runs = monte_carlo(&ctx.pool, &model, &schedule, schedule.end_step(), ctx.cfg.master_seed, fc.n_runs, 0)?;
        let c: Vec<_> = runs.into_iter().map(|r| r.cost).collect();
        points.push(FrontierPoint::from_costs(&s.id, &c));
        costs.extend(c.into_iter().map(|c| (s.id.clone(), c)));
    }
    let frontier = efficient_frontier(points, &fc.lambdas);
    let seed = ctx.seed();
    ctx.create("frontier.csv", |w| write_frontier(w, seed, &frontier))?;
    ctx.create("frontier_choices.csv", |w| write_frontier_choices(w, seed, &frontier))?;
    let rows: Vec<(&str, _)> = costs.iter().map(|(id, c)| (id.as_str(), c)).collect();
    ctx.create("costs.csv", |w| write_costs(w, seed, &rows))?;
    ctx.note("strategies", json!(frontier.points.iter().map(|p| p.strategy_id.clone()).collect::<Vec<_>>()));
    Ok(())
}
