//! Command dispatch, artifact writing and run manifests.

use crate::config::{ParamFile, RunParams};
use crate::design::{
    laser_power, laser_power_exact, optical_cycle_ledger, oscillator_response, sweep_grid, sweep_spectrum, torque_at,
    Pathway, Polarization, TorqueSource,
};
use crate::error::{Error, Result};
use crate::phonon::{bose_integrand, gamma_sp2_res, lambda_factor, phonon_channel, theta_r_integrals};
use crate::rates::{d2sq_average, gamma_sr, steady_state_with_exchange, torque_vs_pump, LEVELS};
use crate::rotor::{
    fit_lz, predicted_plateau_m, run_ensemble, thermal_initial_state, thermal_sigma, RotorLatticeState,
    TrajectoryConfig,
};
use crate::verify::run_checks;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Rotor trajectory ensembles, one per Γ_L value.
    Simulate,
    /// Spin-rotation rate, steady state and torque versus pumping.
    Rates,
    /// Spin-phonon relaxation channels across crystal volumes.
    Phonon,
    /// Torque spectrum across the hyperfine-resolved field sweep.
    Sweep,
    /// Laser, torque and oscillator budget for one configuration.
    Design,
    /// Built-in invariant suite.
    Verify,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Command::Simulate => "simulate",
            Command::Rates => "rates",
            Command::Phonon => "phonon",
            Command::Sweep => "sweep",
            Command::Design => "design",
            Command::Verify => "verify",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: PathBuf,
    pub out: PathBuf,
    /// Overrides the file's `seed`.
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    pub threads: Option<usize>,
    /// `key=value` assignments applied after the file.
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: Command,
    pub seed: u64,
    pub config_sha256: String,
    /// Canonical parameter text; re-running it reproduces every output.
    pub config_text: String,
    pub version: String,
    pub threads: usize,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
}

/// Single writer for one output directory.
struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.push(OutputFile { name: name.to_string(), sha256: hex::encode(Sha256::digest(bytes)) });
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// CSV text: header row, then rows of `{:e}` numbers (shortest round-trip form).
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Two-column plot block with `#` comment header lines.
pub fn plot_data(comments: &[String], xy: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    for (x, y) in xy {
        let _ = writeln!(s, "{x:e} {y:e}");
    }
    s
}

/// Thread count from the flag, then the environment, then the machine.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("ROTOPUMP_THREADS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("ROTOPUMP_THREADS=`{v}` is not a thread count")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, usize::from),
        },
    };
    if n == 0 {
        return Err(Error::Config("thread count must be >= 1".into()));
    }
    Ok(n)
}

/// Load the parameter file and apply the seed and `--set` overrides.
pub fn load_params(cfg: &RunConfig) -> Result<ParamFile> {
    let mut file = ParamFile::load(&cfg.params)?;
    for o in &cfg.overrides {
        file.set(o)?;
    }
    if let Some(seed) = cfg.seed {
        file.set(&format!("seed={seed}"))?;
    }
    Ok(file)
}

/// Run one command and write its artifacts plus `manifest.json`.
pub fn execute(cfg: &RunConfig) -> Result<Manifest> {
    let start = Instant::now();
    let file = load_params(cfg)?;
    let params = RunParams::from_file(&file)?;
    let threads = resolve_threads(cfg.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::ResourceLimit(format!("cannot start {threads} worker threads: {e}")))?;
    let mut out = Outputs::new(&cfg.out)?;
    let outcome = pool.install(|| match cfg.command {
        Command::Simulate => simulate(&params, &mut out),
        Command::Rates => rates(&params, &mut out),
        Command::Phonon => phonon(&params, &mut out),
        Command::Sweep => sweep(&params, &mut out),
        Command::Design => design(&params, &mut out),
        Command::Verify => verify(&mut out),
    });
    let manifest = Manifest {
        command: cfg.command,
        seed: params.seed,
        config_sha256: file.sha256(),
        config_text: file.canonical_text(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs: out.files.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(cfg.out.join("manifest.json"), text)?;
    outcome.map(|()| manifest)
}

fn simulate(p: &RunParams, out: &mut Outputs) -> Result<()> {
    let sim = &p.simulation;
    let inertia = p.consts.hbar / (2.0 * sim.rotor_constant);
    let mut summary = Vec::new();
    for (i, &gamma_l) in p.gamma_l_values.iter().enumerate() {
        let rates = crate::params::RateSet { gamma_l, ..p.rates };
        let mut config = TrajectoryConfig::new(sim.dt, sim.t_total, p.seed, rates);
        config.snapshot_stride = sim.snapshot_stride;
        config.hop_factor = sim.hop_factor;
        config.max_sites = sim.max_sites;
        config.jump_scheme = sim.jump_scheme;
        config.record_distributions = sim.record_distributions;
        let initial = if sim.init_sigma == 0.0 {
            RotorLatticeState::localized(0, (-8, 8), sim.rotor_constant, sim.detuning)?
        } else {
            let t_init = (sim.init_sigma * p.consts.hbar).powi(2) / (inertia * p.consts.k_b);
            debug_assert!((thermal_sigma(t_init, inertia, &p.consts) - sim.init_sigma).abs() < 1e-9 * sim.init_sigma);
            thermal_initial_state(t_init, inertia, &p.consts, None, sim.detuning)?
        };
        let series = run_ensemble(&config, &initial, sim.trajectories, p.consts.hbar)?;
        let variance = series.variance();
        out.write(
            &format!("series_{i}.csv"),
            csv(
                &["t_s", "mean_lz_hbar", "var_lz_hbar2", "e_rot_J"],
                (0..series.len())
                    .map(|k| vec![series.times[k], series.mean_lz[k], variance[k], series.rotational_energy[k]]),
            )
            .as_bytes(),
        )?;
        if sim.record_distributions {
            out.json(
                &format!("distributions_{i}.json"),
                &json!({ "gamma_l_hz": gamma_l, "times_s": series.times, "distributions": series.distributions }),
            )?;
        }
        out.write(
            &format!("lz_gamma_l_{i}.dat"),
            plot_data(
                &[
                    "ensemble-mean <L_z>/hbar against time".into(),
                    format!("gamma_l_hz = {gamma_l:e}, gamma_d_hz = {:e}, gamma_o_hz = {:e}", rates.gamma_d, rates.gamma_o),
                    "columns: t_s mean_lz".into(),
                ],
                series.times.iter().copied().zip(series.mean_lz.iter().copied()),
            )
            .as_bytes(),
        )?;
        let fit = match sim.fit_window {
            Some((t0, t1)) => {
                let f = fit_lz(&series, t0, t1)?;
                json!({ "slope_per_s": f.slope, "intercept": f.intercept, "r_squared": f.r_squared })
            }
            None => serde_json::Value::Null,
        };
        summary.push(json!({
            "gamma_l_hz": gamma_l,
            "final_mean_lz": series.mean_lz.last(),
            "fit": fit,
        }));
    }
    out.json(
        "simulate.json",
        &json!({
            "rotor_constant_rad_s": sim.rotor_constant,
            "predicted_plateau_m": predicted_plateau_m(p.rates.gamma_d, sim.rotor_constant),
            "trajectories": sim.trajectories,
            "runs": summary,
        }),
    )
}

fn rates(p: &RunParams, out: &mut Outputs) -> Result<()> {
    let c = &p.crystal;
    let (alpha, hbar) = (p.consts.alpha_omega(), p.consts.hbar);
    let report = gamma_sr(&p.rates, c.eta, c.r_min, c.r_max, alpha, hbar)?;
    let ss = steady_state_with_exchange(&p.rates, report.gamma_sr)?;
    let levels: Vec<_> = LEVELS
        .iter()
        .zip(ss.populations)
        .map(|(&(m_s, two_m_i), n)| json!({ "m_s": m_s, "m_i_twice": two_m_i, "population": n }))
        .collect();
    out.json(
        "rates.json",
        &json!({
            "rates_hz": p.rates,
            "gamma_d_from_ensemble": p.gamma_d_from_ensemble,
            "eta_m3": c.eta,
            "r_min_m": c.r_min,
            "r_max_m": c.r_max,
            "volume_m3": c.volume,
            "report": report,
            "torque_nm": report.torque_per_volume * c.volume,
            "steady_state": { "levels": levels, "residual": ss.residual, "converged": ss.converged },
        }),
    )?;
    let mut rows = Vec::new();
    for (i, &gamma_l) in p.gamma_l_values.iter().enumerate() {
        let base = crate::params::RateSet { gamma_l, ..p.rates };
        let curve = torque_vs_pump(&base, &p.gamma_o_grid, c.eta, c.r_min, c.r_max, alpha, hbar)?;
        let peak = curve.iter().map(|t| t.torque_per_volume.abs()).fold(0.0, f64::max);
        out.write(
            &format!("torque_vs_pump_gamma_l_{i}.dat"),
            plot_data(
                &[
                    "torque per volume against optical pumping rate, normalized to the curve maximum".into(),
                    format!("gamma_l_hz = {gamma_l:e}, peak torque_per_volume_n_m2 = {peak:e}"),
                    "columns: gamma_o_hz normalized_torque".into(),
                ],
                curve
                    .iter()
                    .map(|t| (t.gamma_o, if peak > 0.0 { t.torque_per_volume / peak } else { 0.0 })),
            )
            .as_bytes(),
        )?;
        rows.extend(
            curve
                .iter()
                .map(|t| vec![t.gamma_o, gamma_l, t.gamma_sr, t.delta_n23, t.torque_per_volume]),
        );
    }
    out.write(
        "torque_vs_pump.csv",
        csv(&["gamma_o_hz", "gamma_l_hz", "gamma_sr_hz", "delta_n23", "torque_per_volume_n_m2"], rows).as_bytes(),
    )
}

fn phonon(p: &RunParams, out: &mut Outputs) -> Result<()> {
    let omega0 = p.field.omega0;
    let gd = p.phonon_gamma_d;
    let mut rows = Vec::new();
    let mut cutoff = 0.0;
    for &v in &p.volume_grid {
        let crystal = p.crystal.with_volume(v)?;
        let rep = phonon_channel(&crystal, omega0, gd, p.wavelength, &p.consts)?;
        cutoff = gamma_sp2_res(&crystal, omega0, p.wavelength, &p.consts)?.cutoff_volume;
        rows.push(vec![v, rep.gamma_sp2_res, rep.gamma_sp2_nonres, if rep.quenched { 1.0 } else { 0.0 }]);
    }
    out.write(
        "phonon.csv",
        csv(&["volume_m3", "gamma_res_hz", "gamma_nonres_hz", "quenched"], rows.iter().cloned()).as_bytes(),
    )?;
    out.write(
        "gamma_res_vs_volume.dat",
        plot_data(
            &[
                "resonant spin-phonon rate against crystal volume".into(),
                format!("quench boundary: volume_m3 = lambda0^3 = {cutoff:e}; rate is zero below it"),
                "columns: volume_m3 gamma_res_hz".into(),
            ],
            rows.iter().map(|r| (r[0], r[1])),
        )
        .as_bytes(),
    )?;

    let c = &p.crystal;
    let nu0 = p.consts.nu0(c.temperature, omega0);
    let nu1 = p.consts.nu1(c.temperature, gd);
    out.write(
        "bose_integrand.dat",
        plot_data(
            &[
                "Bose-weighted resonance integrand against reduced phonon energy".into(),
                format!("nu0 = {nu0:e}, nu1 = {nu1:e}"),
                "columns: nu integrand".into(),
            ],
            (0..=400).map(|i| {
                let nu = nu0 * 10f64.powf(-2.0 + 4.0 * i as f64 / 400.0);
                (nu, bose_integrand(nu, nu0, nu1))
            }),
        )
        .as_bytes(),
    )?;

    let rep = phonon_channel(c, omega0, gd, p.wavelength, &p.consts)?;
    let res = gamma_sp2_res(c, omega0, p.wavelength, &p.consts)?;
    out.json(
        "phonon.json",
        &json!({
            "volume_m3": c.volume,
            "temperature_k": c.temperature,
            "omega0_rad_s": omega0,
            "gamma_d_hz": gd,
            "nu0": nu0,
            "nu1": nu1,
            "channel": rep,
            "resonant": res,
            "lambda": lambda_factor(c.eta, c.r_min, c.r_max, p.consts.alpha_energy())?,
            "theta_integrals": theta_r_integrals()?,
        }),
    )
}

fn torque_source(p: &RunParams) -> TorqueSource {
    let c = &p.crystal;
    TorqueSource { rates: p.rates, eta: c.eta, r_min: c.r_min, r_max: c.r_max, volume: p.illuminated_volume() }
}

fn sweep(p: &RunParams, out: &mut Outputs) -> Result<()> {
    let fields = sweep_grid(&p.hyperfine, p.sweep_margin, p.sweep_points, &p.consts)?;
    let spec = sweep_spectrum(&fields, &torque_source(p), &p.hyperfine, &p.oscillator, &p.consts)?;
    out.write(
        "spectrum.csv",
        csv(
            &["b_tesla", "torque_nm", "amplitude_rad", "snr"],
            spec.points.iter().map(|s| vec![s.b_tesla, s.torque, s.amplitude, s.snr]),
        )
        .as_bytes(),
    )?;
    out.json("lines.json", &json!({ "lines": spec.lines, "peak_indices": spec.peak_indices() }))?;
    out.write(
        "spectrum.dat",
        plot_data(
            &[
                "torque against static field across the hyperfine-resolved matching lines".into(),
                "columns: b_tesla torque_nm".into(),
            ],
            spec.points.iter().map(|s| (s.b_tesla, s.torque)),
        )
        .as_bytes(),
    )
}

fn design(p: &RunParams, out: &mut Outputs) -> Result<()> {
    let source = torque_source(p);
    let c = &p.crystal;
    let tau = torque_at(&source, 1.0, &p.consts)?;
    let response = oscillator_response(tau, &p.oscillator)?;
    let power = |f: fn(f64, f64, f64, f64) -> Result<f64>| {
        f(p.rates.gamma_o, p.spot_radius, p.y_sat, p.gamma_o_sat).ok()
    };
    let mut ledger = Vec::new();
    for pathway in [Pathway::A, Pathway::B, Pathway::C, Pathway::D] {
        for pol in [Polarization::Lcp, Polarization::Rcp, Polarization::Linear] {
            ledger.push(json!({
                "pathway": pathway.to_string(),
                "polarization": pol,
                "phonon_lz_hbar": optical_cycle_ledger(pathway, pol),
            }));
        }
    }
    out.json(
        "design.json",
        &json!({
            "rates_hz": p.rates,
            "eta_m3": c.eta,
            "r_min_m": c.r_min,
            "r_max_m": c.r_max,
            "spot_radius_m": p.spot_radius,
            "thickness_m": p.thickness,
            "illuminated_volume_m3": source.volume,
            "d2sq_avg": d2sq_average(c.eta, c.r_min, c.r_max, p.consts.alpha_omega())?,
            "laser_power_w": power(laser_power),
            "laser_power_exact_w": power(laser_power_exact),
            "torque_nm": tau,
            "oscillator": p.oscillator,
            "response": response,
            "feasible": response.snr >= 1.0,
            "optical_ledger": ledger,
        }),
    )
}

fn verify(out: &mut Outputs) -> Result<()> {
    let checks = run_checks()?;
    let mut s = String::from("name,value,tolerance,pass\n");
    for c in &checks {
        let _ = writeln!(s, "\"{}\",{:e},{:e},{}", c.name, c.value, c.tolerance, c.pass);
    }
    out.write("verify.csv", s.as_bytes())?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Accuracy(format!("failed checks: {}", failed.join("; "))))
    }
}

/// Human-readable pass/fail table for `verify.csv`.
pub fn verify_table(dir: &Path) -> Result<String> {
    let text = std::fs::read_to_string(dir.join("verify.csv"))?;
    let mut s = String::new();
    for line in text.lines().skip(1) {
        if let Some((name, rest)) = line.rsplit_once("\",") {
            let cols: Vec<&str> = rest.split(',').collect();
            let verdict = if cols.get(2) == Some(&"true") { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{verdict}  {:<48} {} (tol {})", name.trim_start_matches('"'), cols[0], cols[1]);
        }
    }
    Ok(s)
}
