//! Validation suites with pass/fail gates, and grid-convergence studies.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amr::{advance_hierarchy, build_hierarchy, stable_hierarchy_dt, AmrParams, StaticRegion};
use crate::bathymetry::BathySource;
use crate::config::RunConfig;
use crate::dispersive::{manufactured_error, solve_tridiagonal, TridiagonalSystem};
use crate::driver::Simulation;
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Domain, Hierarchy, Patch};
use crate::oracle;
use crate::params::SolverParams;
use crate::state::CellState;

pub const SUITES: [&str; 9] = [
    "balance",
    "mass",
    "dambreak",
    "dispersion",
    "elliptic",
    "amr",
    "degeneracy",
    "signature",
    "stability",
];

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub lines: Vec<String>,
    pub seconds: f64,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport {
            name: name.into(),
            passed: true,
            lines: Vec::new(),
            seconds: 0.0,
        }
    }

    /// Record one gated check.
    fn check(&mut self, ok: bool, text: String) {
        self.passed &= ok;
        self.lines.push(format!("[{}] {text}", if ok { "PASS" } else { "FAIL" }));
    }

    fn note(&mut self, text: String) {
        self.lines.push(format!("       {text}"));
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            "{} {} ({:.2} s)\n",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds
        );
        for l in &self.lines {
            s.push_str("  ");
            s.push_str(l);
            s.push('\n');
        }
        s
    }
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rep = match name {
        "balance" => balance_suite()?,
        "mass" => mass_suite()?,
        "dambreak" => dambreak_suite()?,
        "dispersion" => dispersion_suite()?,
        "elliptic" => elliptic_suite()?,
        "amr" => amr_suite()?,
        "degeneracy" => degeneracy_suite()?,
        "signature" => signature_suite()?,
        "stability" => stability_suite()?,
        other => return Err(Error::config("suite", format!("unknown suite {other:?}"))),
    };
    rep.seconds = start.elapsed().as_secs_f64();
    Ok(rep)
}

fn config(scenario: &str, overrides: &str) -> Result<RunConfig> {
    RunConfig::parse(&format!("scenario = {scenario}\n{overrides}"))
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

// ---------------------------------------------------------------- balance

#[derive(Debug, Clone, Copy)]
pub struct BalanceResult {
    pub max_hu: f64,
    pub max_psi: f64,
    pub seconds: f64,
}

/// Lake at rest over the bumpy bed for `steps` coarse steps.
pub fn lake_at_rest(levels: usize, steps: usize) -> Result<BalanceResult> {
    let start = Instant::now();
    let cfg = config("lake_at_rest_bumpy", &format!("max_levels = {levels}\n"))?;
    let mut sim = Simulation::new(cfg)?;
    let mut max_hu: f64 = 0.0;
    let mut max_psi: f64 = 0.0;
    for _ in 0..steps {
        sim.step(f64::INFINITY)?;
        max_hu = max_hu.max(sim.hierarchy.max_abs_hu());
        max_psi = max_psi.max(sim.hierarchy.max_abs_psi());
    }
    Ok(BalanceResult {
        max_hu,
        max_psi,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn balance_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("balance");
    for levels in [1, 3] {
        let r = lake_at_rest(levels, 1000)?;
        rep.check(
            r.max_hu <= 1e-11 && r.max_psi <= 1e-12 && r.seconds < 10.0,
            format!(
                "{levels} level(s), 1000 steps: max|hu| = {} (<= 1e-11), max|psi| = {} (<= 1e-12), {:.2} s (< 10 s)",
                sci(r.max_hu),
                sci(r.max_psi),
                r.seconds
            ),
        );
    }
    Ok(rep)
}

// ---------------------------------------------------------------- mass

/// Relative mass change of each built-in scenario (all on closed or
/// periodic domains) over a short multi-level run.
pub fn mass_runs() -> Result<Vec<(String, f64)>> {
    let runs = [
        ("lake_at_rest_bumpy", "max_levels = 3\nt_final = 1000\n"),
        ("dam_break", "max_levels = 2\ngradient_tol = 0.02\n"),
        ("periodic_linear_wave", "max_levels = 2\namplitude_tol = 0.2\n"),
        ("sloping_beach_crater", "t_final = 400\n"),
    ];
    let mut out = Vec::new();
    for (name, extra) in runs {
        let mut sim = Simulation::new(config(name, extra)?)?;
        let m = sim.run(None)?;
        out.push((name.to_string(), m.mass_relative_change));
    }
    Ok(out)
}

fn mass_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("mass");
    for (name, change) in mass_runs()? {
        rep.check(change <= 1e-12, format!("{name}: relative mass change {} (<= 1e-12)", sci(change)));
    }
    Ok(rep)
}

// ---------------------------------------------------------------- dam break

/// L1(h) error of the dam break at t = 0.25 against the exact solution.
pub fn dambreak_error(cells: usize) -> Result<f64> {
    let cfg = config("dam_break", &format!("base_cells = {cells}\n"))?;
    let mut sim = Simulation::new(cfg.clone())?;
    sim.run(None)?;
    let p = &sim.hierarchy.levels[0][0];
    let s = &cfg.shape;
    let t = sim.t();
    let err: f64 = p
        .interior()
        .map(|j| {
            let x = p.x_center(j);
            let (h, _) = oracle::exact_dambreak(
                s.dam_left_depth,
                s.dam_right_depth,
                cfg.solver.g,
                (x - s.dam_position) / t,
            );
            (p.cells[j].h - h).abs()
        })
        .sum();
    Ok(err * p.dx)
}

/// Least-squares slope of log(error) against log(1/cells).
pub fn fitted_order(cells: &[usize], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = cells.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -num / den
}

fn dambreak_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("dambreak");
    let start = Instant::now();
    let cells = [1000, 2000, 4000];
    let errors: Vec<f64> = cells.iter().map(|&n| dambreak_error(n)).collect::<Result<_>>()?;
    let secs = start.elapsed().as_secs_f64();
    for (n, e) in cells.iter().zip(&errors) {
        rep.note(format!("{n} cells: L1(h) = {}", sci(*e)));
    }
    let order = fitted_order(&cells, &errors);
    rep.check(errors[2] < 1e-3, format!("L1(h) at 4000 cells = {} (< 1e-3)", sci(errors[2])));
    rep.check(order >= 0.8, format!("observed order {order:.3} (>= 0.8)"));
    rep.check(secs < 30.0, format!("runtime {secs:.2} s (< 30 s)"));
    Ok(rep)
}

// ---------------------------------------------------------------- dispersion

#[derive(Debug, Clone, Copy)]
pub struct PhaseSpeed {
    pub kh0: f64,
    pub measured: f64,
    pub oracle: f64,
    pub shallow: f64,
}

/// Phase of the fundamental Fourier mode of eta on a one-wavelength
/// periodic patch; its change over time locates the peak of the
/// cross-correlation between the two profiles.
fn fundamental_phase(p: &Patch, k: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for j in p.interior() {
        let x = p.x_center(j) - p.x_origin;
        let e = p.eta(j);
        re += e * (k * x).cos();
        im -= e * (k * x).sin();
    }
    im.atan2(re)
}

/// Measured phase speed of the periodic linear wave after one period.
pub fn phase_speed(kh0: f64, cells_per_wavelength: usize, dispersion: bool) -> Result<PhaseSpeed> {
    let cfg = config(
        "periodic_linear_wave",
        &format!("wave_kh0 = {kh0}\nbase_cells = {cells_per_wavelength}\ndispersion = {dispersion}\n"),
    )?;
    let depth = cfg.shape.wave_depth;
    let g = cfg.solver.g;
    let k = kh0 / depth;
    let oracle_c = oracle::ms_dispersion(k, depth, g, cfg.solver.b1);
    let mut sim = Simulation::new(cfg)?;
    let p0 = fundamental_phase(&sim.hierarchy.levels[0][0], k);
    sim.run(None)?;
    let p1 = fundamental_phase(&sim.hierarchy.levels[0][0], k);
    let t = sim.t();
    let wavelength = 2.0 * PI / k;
    // A rightward shift by s lowers the phase by k s; the wave is expected
    // to travel about one wavelength.
    let mut d = p0 - p1;
    d -= 2.0 * PI * (d / (2.0 * PI)).round();
    let shift = wavelength + d / k;
    Ok(PhaseSpeed {
        kh0,
        measured: shift / t,
        oracle: oracle_c,
        shallow: (g * depth).sqrt(),
    })
}

fn dispersion_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("dispersion");
    let start = Instant::now();
    rep.note("kh0      measured c   oracle c     sqrt(g h0)   rel. error".into());
    for kh0 in [0.25, 0.5, 1.0] {
        let r = phase_speed(kh0, 64, true)?;
        let rel = (r.measured - r.oracle).abs() / r.oracle;
        rep.check(
            rel <= 0.01,
            format!(
                "{:<8} {:<12.5} {:<12.5} {:<12.5} {:.3e} (<= 1e-2)",
                kh0, r.measured, r.oracle, r.shallow, rel
            ),
        );
        if kh0 == 1.0 {
            let gap = (r.measured - r.shallow).abs() / r.shallow;
            rep.check(gap > 0.05, format!("kh0 = 1: departure from sqrt(g h0) {gap:.3} (> 0.05)"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.check(secs < 60.0, format!("runtime {secs:.2} s (< 60 s)"));
    Ok(rep)
}

// ---------------------------------------------------------------- elliptic

/// Random strictly diagonally dominant tridiagonal system.
pub fn random_dominant_system(rng: &mut impl Rng, n: usize, periodic: bool) -> TridiagonalSystem {
    let mut sub: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut sup: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if !periodic {
        sub[0] = 0.0;
        sup[n - 1] = 0.0;
    }
    let diag = (0..n)
        .map(|i| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sign * (sub[i].abs() + sup[i].abs() + rng.gen_range(0.1..2.0))
        })
        .collect();
    let rhs = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    TridiagonalSystem {
        sub,
        diag,
        sup,
        rhs,
        periodic,
    }
}

/// Largest |x_tridiagonal - x_dense| over `count` random systems.
pub fn random_system_agreement(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for trial in 0..count {
        let n = rng.gen_range(2..64);
        let sys = random_dominant_system(&mut rng, n, trial % 5 == 4);
        let x = solve_tridiagonal(&sys)?;
        let y = oracle::dense_solve(&sys.to_dense(), &sys.rhs)?;
        for (a, b) in x.iter().zip(&y) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn elliptic_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("elliptic");
    let b1 = SolverParams::default().b1;
    for eps in [0.0, 0.3] {
        let cells = [40, 80, 160];
        let e: Vec<f64> = cells.iter().map(|&n| manufactured_error(n, eps, b1)).collect::<Result<_>>()?;
        for w in 0..2 {
            let order = (e[w] / e[w + 1]).log2();
            rep.check(
                (order - 2.0).abs() <= 0.2,
                format!(
                    "depth variation {eps}: {} -> {} cells, L_inf {} -> {}, order {order:.3} (2 +- 0.2)",
                    cells[w],
                    cells[w + 1],
                    sci(e[w]),
                    sci(e[w + 1])
                ),
            );
        }
    }
    let worst = random_system_agreement(50, 2024)?;
    rep.check(worst <= 1e-12, format!("50 random systems vs dense elimination: max diff {} (<= 1e-12)", sci(worst)));
    Ok(rep)
}

// ---------------------------------------------------------------- amr

/// Setup of the pulse-through-patch comparisons: flat bed, walls, a
/// Gaussian hump moving right.
#[derive(Debug, Clone, Copy)]
pub struct PulseSetup {
    pub length: f64,
    pub depth: f64,
    pub amplitude: f64,
    pub width: f64,
    pub start: f64,
    pub base_cells: usize,
    pub t_final: f64,
}

impl Default for PulseSetup {
    fn default() -> Self {
        PulseSetup {
            length: 200_000.0,
            depth: 1000.0,
            amplitude: 1.0,
            width: 5000.0,
            start: 50_000.0,
            base_cells: 400,
            t_final: 900.0,
        }
    }
}

impl PulseSetup {
    fn domain(&self, cells: usize) -> Domain {
        Domain {
            x_lo: 0.0,
            x_hi: self.length,
            base_cells: cells,
            left: BoundaryKind::Wall,
            right: BoundaryKind::Wall,
        }
    }

    pub fn build(&self, cells: usize, amr: &AmrParams, params: &SolverParams) -> Result<Hierarchy> {
        let s = *self;
        let c = (params.g * s.depth).sqrt();
        let init = move |x: f64, b: f64| {
            let z = (x - s.start) / s.width;
            let eta = s.amplitude * (-z * z).exp();
            CellState::new(eta - b, c * eta, 0.0)
        };
        build_hierarchy(self.domain(cells), BathySource::Flat(-s.depth), amr, params, &init)
    }
}

/// Advance to `t_final` with stable coarse steps; returns the step count.
pub fn advance_until(h: &mut Hierarchy, t_final: f64, params: &SolverParams, amr: Option<&AmrParams>) -> Result<usize> {
    let mut steps = 0;
    while h.t < t_final * (1.0 - 1e-14) {
        if let Some(a) = amr {
            if steps > 0 && a.regrid_interval > 0 && steps % a.regrid_interval == 0 {
                crate::amr::regrid(h, a, params)?;
            }
        }
        let dt = stable_hierarchy_dt(h, params).unwrap_or(f64::INFINITY).min(t_final - h.t);
        let rep = advance_hierarchy(h, dt, params)?;
        if rep.dt == t_final - (h.t - rep.dt) {
            h.t = t_final;
        }
        steps += 1;
    }
    Ok(steps)
}

/// Finest available eta at each x.
pub fn composite_eta(h: &Hierarchy, xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| h.finest_at(x).map_or(0.0, |(p, j)| p.eta(j)))
        .collect()
}

/// Level-1 eta, which carries the averaged-down fine data where refined.
pub fn level_one_eta(h: &Hierarchy) -> Vec<f64> {
    let p = &h.levels[0][0];
    p.interior().map(|j| p.eta(j)).collect()
}

/// Relative L1 difference sum|a - b| / sum|b|.
pub fn relative_l1(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    let den: f64 = b.iter().map(|y| y.abs()).sum();
    num / den
}

#[derive(Debug, Clone)]
pub struct PatchComparison {
    pub relative_l1: f64,
    pub max_diff_over_amplitude: f64,
    pub coarse_steps: usize,
    pub coarse_solves: u64,
    /// The same measure for a uniform run at the coarse resolution.
    pub uniform_coarse_l1: f64,
}

/// Pulse through a static ratio-2 patch over the middle fifth of the
/// domain, against a uniform run at the fine resolution. Both are compared
/// as cell averages on the coarse grid.
pub fn static_patch_comparison(setup: &PulseSetup) -> Result<PatchComparison> {
    let params = SolverParams::default();
    let amr = AmrParams {
        ratios: vec![2],
        regrid_interval: 0,
        amplitude_tol: f64::INFINITY,
        gradient_tol: f64::INFINITY,
        flag_buffer: 0,
        static_regions: vec![StaticRegion {
            x_lo: 0.4 * setup.length,
            x_hi: 0.6 * setup.length,
            min_level: 2,
            max_level: 2,
        }],
    };
    let mut h = setup.build(setup.base_cells, &amr, &params)?;
    let steps = advance_until(&mut h, setup.t_final, &params, None)?;
    let mut fine = setup.build(2 * setup.base_cells, &AmrParams::default(), &params)?;
    advance_until(&mut fine, setup.t_final, &params, None)?;
    let mut coarse = setup.build(setup.base_cells, &AmrParams::default(), &params)?;
    advance_until(&mut coarse, setup.t_final, &params, None)?;
    let a = level_one_eta(&h);
    let b = restrict(&level_one_eta(&fine), setup.base_cells);
    let max = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(PatchComparison {
        relative_l1: relative_l1(&a, &b),
        max_diff_over_amplitude: max / setup.amplitude,
        coarse_steps: steps,
        coarse_solves: h.elliptic_solves[0],
        uniform_coarse_l1: relative_l1(&level_one_eta(&coarse), &b),
    })
}

fn amr_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("amr");
    let r = static_patch_comparison(&PulseSetup::default())?;
    rep.check(
        r.relative_l1 < 0.02,
        format!(
            "pulse through static ratio-2 patch vs uniform fine: L1(eta) difference {:.3}% of the reference pulse L1 (< 2%)",
            100.0 * r.relative_l1,
        ),
    );
    rep.note(format!(
        "max difference {:.3}% of amplitude; uniform coarse run differs by {:.3}% in the same norm",
        100.0 * r.max_diff_over_amplitude,
        100.0 * r.uniform_coarse_l1
    ));
    rep.check(
        r.coarse_solves == 2 * r.coarse_steps as u64,
        format!("coarse elliptic solves {} over {} coarse steps (exactly 2 per step)", r.coarse_solves, r.coarse_steps),
    );
    Ok(rep)
}

// ---------------------------------------------------------------- degeneracy

fn bitwise_equal(a: &[CellState], b: &[CellState]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.h.to_bits() == y.h.to_bits() && x.hu.to_bits() == y.hu.to_bits())
}

fn hierarchies_bitwise_equal(a: &Hierarchy, b: &Hierarchy) -> bool {
    a.levels.len() == b.levels.len()
        && a.levels.iter().zip(&b.levels).all(|(la, lb)| {
            la.len() == lb.len()
                && la
                    .iter()
                    .zip(lb)
                    .all(|(pa, pb)| pa.i_lo == pb.i_lo && bitwise_equal(&pa.cells, &pb.cells))
        })
}

/// Crater run with every cell below the Boussinesq switch depth, against
/// the same run with dispersion off.
pub fn inactive_mask_identity(steps: usize) -> Result<bool> {
    let base = "t_final = 1e9\n";
    let mut a = Simulation::new(config("sloping_beach_crater", &format!("{base}switch_depth = 1e6\n"))?)?;
    let mut b = Simulation::new(config("sloping_beach_crater", &format!("{base}dispersion = false\n"))?)?;
    for _ in 0..steps {
        let da = a.stable_dt();
        let db = b.stable_dt();
        if da.to_bits() != db.to_bits() {
            return Ok(false);
        }
        a.step(f64::INFINITY)?;
        b.step(f64::INFINITY)?;
    }
    Ok(hierarchies_bitwise_equal(&a.hierarchy, &b.hierarchy))
}

/// Ratio-1 two-level runs against the single grid: (full cover with
/// dispersion bit-identical, partial cover without dispersion bit-identical
/// on the covered cells, partial cover with dispersion max |eta| gap).
pub fn ratio_one_identity(steps: usize) -> Result<(bool, bool, f64)> {
    let setup = PulseSetup::default();
    let mut out = (false, false, 0.0);
    for (case, cover, dispersion) in [(0, (-1.0, 1e9), true), (1, (60_000.0, 140_000.0), false), (2, (60_000.0, 140_000.0), true)] {
        let params = SolverParams {
            dispersion,
            ..SolverParams::default()
        };
        let amr = AmrParams {
            ratios: vec![1],
            regrid_interval: 0,
            amplitude_tol: f64::INFINITY,
            flag_buffer: 0,
            static_regions: vec![StaticRegion {
                x_lo: cover.0,
                x_hi: cover.1,
                min_level: 2,
                max_level: 2,
            }],
            ..AmrParams::default()
        };
        let mut two = setup.build(setup.base_cells, &amr, &params)?;
        let mut one = setup.build(setup.base_cells, &AmrParams::default(), &params)?;
        for _ in 0..steps {
            let dt = stable_hierarchy_dt(&one, &params).unwrap();
            advance_hierarchy(&mut two, dt, &params)?;
            advance_hierarchy(&mut one, dt, &params)?;
        }
        let single = &one.levels[0][0];
        let mut same = !two.levels[1].is_empty();
        let mut gap: f64 = 0.0;
        for p in &two.levels[1] {
            for j in p.interior() {
                let s = single.slot(p.global_index(j)).unwrap();
                let (x, y) = (p.cells[j], single.cells[s]);
                same &= x.h.to_bits() == y.h.to_bits() && x.hu.to_bits() == y.hu.to_bits();
                gap = gap.max((x.h - y.h).abs());
            }
        }
        match case {
            0 => out.0 = same,
            1 => out.1 = same,
            _ => out.2 = gap,
        }
    }
    Ok(out)
}

fn degeneracy_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("degeneracy");
    let same = inactive_mask_identity(100)?;
    rep.check(same, "all-inactive Boussinesq mask vs pure shallow water, 3 levels, 100 steps: bit-identical".into());
    let (full, partial, gap) = ratio_one_identity(200)?;
    rep.check(full, "ratio-1 patch over the whole domain vs single grid, dispersion on: bit-identical".into());
    rep.check(partial, "ratio-1 partial patch vs single grid, shallow water: bit-identical on covered cells".into());
    rep.note(format!("ratio-1 partial patch with dispersion: max |h| gap {} m (reported)", sci(gap)));
    Ok(rep)
}

// ---------------------------------------------------------------- signature

/// Sign changes of eta on level 1 over x < x_max, ignoring values below
/// `rel_threshold` times the largest |eta| there.
pub fn zero_crossings(h: &Hierarchy, x_max: f64, rel_threshold: f64, dry_tol: f64) -> usize {
    let p = &h.levels[0][0];
    let values: Vec<f64> = p
        .interior()
        .filter(|&j| p.x_center(j) < x_max && p.cells[j].h > dry_tol)
        .map(|j| p.eta(j))
        .collect();
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut count = 0;
    let mut last = 0.0f64;
    for v in values {
        if v.abs() < rel_threshold * peak {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

pub const SIGNATURE_TIME: f64 = 300.0;
pub const SHELF_EDGE: f64 = 150_000.0;

/// Zero crossings seaward of the shelf for (Boussinesq, shallow water).
pub fn crater_crossings() -> Result<(usize, usize, f64)> {
    let start = Instant::now();
    let mut counts = [0; 2];
    for (k, dispersion) in [true, false].into_iter().enumerate() {
        let cfg = config(
            "sloping_beach_crater",
            &format!("t_final = {SIGNATURE_TIME}\ndispersion = {dispersion}\n"),
        )?;
        let dry = cfg.solver.dry_tolerance;
        let mut sim = Simulation::new(cfg)?;
        sim.run(None)?;
        counts[k] = zero_crossings(&sim.hierarchy, SHELF_EDGE, 1e-3, dry);
    }
    Ok((counts[0], counts[1], start.elapsed().as_secs_f64()))
}

fn signature_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("signature");
    let (bous, swe, secs) = crater_crossings()?;
    rep.check(
        bous >= 3 * swe.max(1),
        format!("zero crossings of eta for x < 150 km at t = {SIGNATURE_TIME} s: Boussinesq {bous}, shallow water {swe} (ratio >= 3)"),
    );
    rep.check(secs < 300.0, format!("runtime {secs:.2} s (< 300 s)"));
    Ok(rep)
}

// ---------------------------------------------------------------- stability

#[derive(Debug, Clone, Copy)]
pub struct GrowthResult {
    pub initial_max_eta: f64,
    pub max_eta: f64,
    pub steps: usize,
    pub failed: bool,
}

/// Crater run with three levels of the given ratio for `steps` coarse
/// steps, tracking the largest |eta| over wet cells.
pub fn crater_growth(ratio: usize, steps: usize) -> Result<GrowthResult> {
    let cfg = config(
        "sloping_beach_crater",
        &format!("max_levels = 3\nratios = {ratio}, {ratio}\nt_final = 1e9\nmax_steps = {steps}\n"),
    )?;
    let dry = cfg.solver.dry_tolerance;
    let mut sim = Simulation::new(cfg)?;
    let initial = sim.hierarchy.max_abs_eta(dry);
    let mut max_eta: f64 = 0.0;
    let mut failed = false;
    for _ in 0..steps {
        if sim.step(f64::INFINITY).is_err() {
            failed = true;
            break;
        }
        max_eta = max_eta.max(sim.hierarchy.max_abs_eta(dry));
    }
    Ok(GrowthResult {
        initial_max_eta: initial,
        max_eta,
        steps: sim.steps,
        failed,
    })
}

fn stability_suite() -> Result<SuiteReport> {
    let mut rep = SuiteReport::new("stability");
    let r = crater_growth(2, 2000)?;
    rep.check(
        !r.failed && r.max_eta <= 2.0 * r.initial_max_eta,
        format!(
            "ratio 2, 3 levels, {} coarse steps: max|eta| {:.2} m vs initial {:.2} m (<= 2x){}",
            r.steps,
            r.max_eta,
            r.initial_max_eta,
            if r.failed { ", run aborted" } else { "" }
        ),
    );
    let r4 = crater_growth(4, 2000)?;
    rep.note(format!(
        "ratio 4, 3 levels, {} coarse steps: max|eta| {:.2} m vs initial {:.2} m, growth {:.3}{} (reported only)",
        r4.steps,
        r4.max_eta,
        r4.initial_max_eta,
        r4.max_eta / r4.initial_max_eta,
        if r4.failed { ", run aborted" } else { "" }
    ));
    Ok(rep)
}

// ---------------------------------------------------------------- convergence

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub cells: Vec<usize>,
    /// L1(eta) difference between successive resolutions.
    pub differences: Vec<f64>,
    /// Observed orders from consecutive differences.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn render(&self) -> String {
        let mut s = format!("convergence of {}\n", self.scenario);
        for (k, d) in self.differences.iter().enumerate() {
            s.push_str(&format!(
                "  {:>6} vs {:>6} cells: L1(eta) difference {}\n",
                self.cells[k],
                self.cells[k + 1],
                sci(*d)
            ));
        }
        for o in &self.orders {
            s.push_str(&format!("  observed order {o:.3}\n"));
        }
        s
    }
}

/// Level-1 eta averaged onto `n` equal cells.
pub fn restrict(eta: &[f64], n: usize) -> Vec<f64> {
    let r = eta.len() / n;
    eta.chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect()
}

/// Run `scenario` at each base resolution (single level) to its t_final
/// and estimate the order from L1 differences of successive solutions
/// restricted to the coarsest grid. Resolutions must be successive
/// doublings.
pub fn convergence(scenario: &str, cells: &[usize], overrides: &str) -> Result<ConvergenceReport> {
    if cells.len() < 3 || cells.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::config("resolutions", "need at least three successive doublings"));
    }
    let mut solutions = Vec::new();
    let mut length = 0.0;
    for &n in cells {
        let cfg = config(scenario, &format!("{overrides}max_levels = 1\nbase_cells = {n}\n"))?;
        length = cfg.x_hi - cfg.x_lo;
        let mut sim = Simulation::new(cfg)?;
        sim.run(None)?;
        let p = &sim.hierarchy.levels[0][0];
        let eta: Vec<f64> = p.interior().map(|j| p.eta(j)).collect();
        solutions.push(restrict(&eta, cells[0]));
    }
    let dx = length / cells[0] as f64;
    let differences: Vec<f64> = solutions
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<f64>() * dx)
        .collect();
    let orders = differences.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(ConvergenceReport {
        scenario: scenario.into(),
        cells: cells.to_vec(),
        differences,
        orders,
    })
}
