//! The five subcommands: each writes its data files and a manifest into a
//! fresh run directory and returns the verdicts.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};
use zvonkin_core::drift::regularity_certificate;
use zvonkin_core::io::{write_ensemble, write_field, write_marginal_csv};
use zvonkin_core::sde::{simulate_x_direct, simulate_y, Storage};
use zvonkin_core::{Check, VerificationReport};

use crate::checks;
use crate::config::RunConfig;
use crate::lab::{member_label, Lab, Member};
use crate::run::RunDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Fp,
    Bracket,
    Mf,
    Chainrule,
    Kolmogorov,
    LemmaLl,
    Bony,
    Gradient,
    Inversion,
    ZeroDrift,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Fp => "fp",
            Which::Bracket => "bracket",
            Which::Mf => "mf",
            Which::Chainrule => "chainrule",
            Which::Kolmogorov => "kolmogorov",
            Which::LemmaLl => "lemma-ll",
            Which::Bony => "bony",
            Which::Gradient => "gradient",
            Which::Inversion => "inversion",
            Which::ZeroDrift => "zero-drift",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    SynthDrift,
    Solve,
    Simulate,
    Verify(Which),
    Converge,
}

impl Command {
    pub fn tag(self) -> String {
        match self {
            Command::SynthDrift => "synth-drift".into(),
            Command::Solve => "solve".into(),
            Command::Simulate => "simulate".into(),
            Command::Verify(w) => format!("verify:{}", w.name()),
            Command::Converge => "converge".into(),
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub report: VerificationReport,
}

/// Runs `cmd` under `cfg`, reusing the artifacts already built in `lab` if given.
pub fn execute(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    let mut lab = Lab::new(cfg.clone())?;
    let mut dir = RunDir::create(cfg, &cmd.tag())?;
    let (report, telemetry) = match cmd {
        Command::SynthDrift => synth_drift(&mut lab, &mut dir)?,
        Command::Solve => solve(&mut lab, &mut dir)?,
        Command::Simulate => simulate(&mut lab, &mut dir)?,
        Command::Verify(w) => (verify(&mut lab, w)?, Value::Null),
        Command::Converge => (checks::convergence(&mut lab)?, Value::Null),
    };
    let path = dir.path.clone();
    let manifest = dir.finish(cfg, &report, telemetry)?;
    Ok(Outcome { dir: path, manifest, report })
}

fn drift_meta(cfg: &RunConfig) -> Value {
    json!({ "kind": "drift", "spec": cfg.drift })
}

fn synth_drift(lab: &mut Lab, dir: &mut RunDir) -> Result<(VerificationReport, Value)> {
    let b = lab.drift()?.clone();
    write_field(&dir.file("drift.fld"), &b, drift_meta(&lab.cfg))?;
    dir.record("drift.fld")?;
    let cert = regularity_certificate(&lab.cfg.drift, lab.grid()).context("regularity certificate")?;
    std::fs::write(dir.file("certificate.json"), serde_json::to_string_pretty(&cert)? + "\n")?;
    dir.record("certificate.json")?;
    let lo = cert.low_norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cert.low_norms.iter().cloned().fold(0.0, f64::max);
    let spread = if lo > 0.0 { hi / lo } else { 1.0 };
    let mut r = VerificationReport::new();
    r.push(
        Check::new("regularity-certificate", spread, 1.2, cert.passed)
            .seeds(&[lab.cfg.drift.seed])
            .note("low-index norm spread across resolutions; high-index norms must grow"),
    );
    Ok((r, json!({ "sup_norm": b.sup_norm() })))
}

fn solve(lab: &mut Lab, dir: &mut RunDir) -> Result<(VerificationReport, Value)> {
    for m in lab.members() {
        let map = lab.map(m)?;
        let name = format!("u_{}.fld", member_label(m));
        let meta = json!({ "kind": "resolvent", "member": member_label(m), "lambda": map.lambda() });
        write_field(&dir.file(&name), map.u(), meta)?;
        dir.record(&name)?;
    }
    let report = checks::gradient_bound(lab)?;
    let sel = lab.selection()?;
    let telemetry = json!({
        "lambda": sel.lambda,
        "ladder": sel.history,
        "members": lab.telemetry()?,
    });
    Ok((report, telemetry))
}

fn simulate(lab: &mut Lab, dir: &mut RunDir) -> Result<(VerificationReport, Value)> {
    let law = lab.law();
    let map = lab.map(Member::Full)?;
    let params = lab.sim_params(Storage { x: true, y: true, dw: true });
    let zv = simulate_y(&map, &law, &params)?;
    write_ensemble(&dir.file("zvonkin.ens"), &zv, json!({ "kind": "transformed", "lambda": map.lambda() }))?;
    dir.record("zvonkin.ens")?;
    let mut csv = std::io::BufWriter::new(std::fs::File::create(dir.file("marginal_T.csv"))?);
    write_marginal_csv(&mut csv, &zv, zv.steps)?;
    drop(csv);
    dir.record("marginal_T.csv")?;

    let s = [lab.cfg.drift.seed, lab.cfg.sde.seed];
    let mut coupled = true;
    let mut boundary = zv.boundary_fraction;
    let mut brownian = zv.increments_look_brownian()?;
    let direct_params = lab.sim_params(Storage { x: true, y: false, dw: true });
    for n in lab.cfg.analysis.n_list.clone() {
        let b = lab.member(Member::Mollified(n))?;
        let ens = simulate_x_direct(&b, &law, &direct_params)?;
        coupled &= ens.dw == zv.dw;
        boundary = boundary.max(ens.boundary_fraction);
        brownian &= ens.increments_look_brownian()?;
        let name = format!("direct_{}.ens", member_label(Member::Mollified(n)));
        write_ensemble(&dir.file(&name), &ens, json!({ "kind": "mollified", "n": n }))?;
        dir.record(&name)?;
    }
    let mut r = VerificationReport::new();
    r.push(Check::new("increments", brownian as u8 as f64, 1.0, brownian).seeds(&s));
    r.push(Check::new("coupling", coupled as u8 as f64, 1.0, coupled).seeds(&s));
    r.push(Check::at_most("boundary", boundary, 0.01).seeds(&s));
    Ok((r, json!({ "lambda": map.lambda(), "boundary_fraction": boundary })))
}

pub fn verify(lab: &mut Lab, which: Which) -> Result<VerificationReport> {
    match which {
        Which::Fp => checks::fokker_planck(lab),
        Which::Bracket => {
            let mut r = checks::brownian_bracket(lab)?;
            r.merge(checks::covariation(lab)?);
            Ok(r)
        }
        Which::Mf => checks::martingale(lab),
        Which::Chainrule => checks::chain_rule(lab),
        Which::Kolmogorov => checks::kolmogorov(lab),
        Which::LemmaLl => checks::lemma_ll(&lab.cfg),
        Which::Bony => checks::bony_constant(&lab.cfg),
        Which::Gradient => checks::gradient_bound(lab),
        Which::Inversion => checks::inversion(lab),
        Which::ZeroDrift => checks::zero_drift_law(&lab.cfg),
    }
}
