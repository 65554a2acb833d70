//! Lazily built artifacts shared by the pipelines and checks of one run.

use anyhow::{Context, Result};
use serde::Serialize;
use zvonkin_core::drift::{smoothing_family, synthesize_drift};
use zvonkin_core::pde::{select_lambda, solve_u, ResolventSolution, RungOutcome};
use zvonkin_core::sde::{InitialLaw, SimParams, Storage};
use zvonkin_core::{TimeField, TorusGrid, ZvonkinMap};

use crate::config::RunConfig;

/// Member of the drift family: the synthesized drift or one mollification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Member {
    Full,
    Mollified(u32),
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberTelemetry {
    pub member: String,
    pub iterations: usize,
    pub contraction_ratio: f64,
    pub final_difference: f64,
    pub ratios: Vec<f64>,
    pub grad_sup: f64,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub lambda: f64,
    /// Same order as [`Lab::members`].
    pub solutions: Vec<ResolventSolution>,
    pub history: Vec<RungOutcome>,
}

pub struct Lab {
    pub cfg: RunConfig,
    grid: TorusGrid,
    drift: Option<TimeField>,
    ladder: Option<Vec<TimeField>>,
    selection: Option<Selection>,
}

impl Lab {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid();
        Ok(Self { cfg, grid, drift: None, ladder: None, selection: None })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn law(&self) -> InitialLaw {
        self.cfg.law()
    }

    pub fn sim_params(&self, storage: Storage) -> SimParams {
        let mut p = SimParams::new(self.cfg.sde.paths, self.grid.steps, self.cfg.sde.seed);
        p.substeps = self.cfg.sde.substeps;
        p.storage = storage;
        p
    }

    pub fn drift(&mut self) -> Result<&TimeField> {
        if self.drift.is_none() {
            self.drift = Some(synthesize_drift(&self.cfg.drift, self.grid).context("synthesizing drift")?);
        }
        Ok(self.drift.as_ref().expect("just built"))
    }

    /// `b^n` for every `n` of the configured ladder.
    pub fn ladder(&mut self) -> Result<&[TimeField]> {
        if self.ladder.is_none() {
            let ns = self.cfg.analysis.n_list.clone();
            let fam = smoothing_family(self.drift()?, &ns)?;
            self.ladder = Some(fam);
        }
        Ok(self.ladder.as_deref().expect("just built"))
    }

    pub fn member(&mut self, m: Member) -> Result<TimeField> {
        match m {
            Member::Full => Ok(self.drift()?.clone()),
            Member::Mollified(n) => {
                if let Some(i) = self.cfg.analysis.n_list.iter().position(|&k| k == n) {
                    return Ok(self.ladder()?[i].clone());
                }
                Ok(smoothing_family(self.drift()?, &[n])?.remove(0))
            }
        }
    }

    pub fn members(&self) -> Vec<Member> {
        std::iter::once(Member::Full)
            .chain(self.cfg.analysis.n_list.iter().map(|&n| Member::Mollified(n)))
            .collect()
    }

    /// One resolvent parameter for the drift and its whole ladder.
    pub fn selection(&mut self) -> Result<&Selection> {
        if self.selection.is_none() {
            let mut family = vec![self.drift()?.clone()];
            family.extend(self.ladder()?.iter().cloned());
            let params = self.cfg.pde.solver;
            let sel = match self.cfg.pde.lambda {
                Some(lambda) => Selection {
                    lambda,
                    solutions: family
                        .iter()
                        .map(|b| solve_u(b, lambda, &params))
                        .collect::<zvonkin_core::Result<_>>()
                        .context("resolvent solve at the configured lambda")?,
                    history: Vec::new(),
                },
                None => {
                    let s = select_lambda(&family, &params).context("selecting lambda")?;
                    Selection { lambda: s.lambda, solutions: s.solutions, history: s.history }
                }
            };
            self.selection = Some(sel);
        }
        Ok(self.selection.as_ref().expect("just built"))
    }

    fn member_index(&self, m: Member) -> Result<usize> {
        self.members()
            .iter()
            .position(|&k| k == m)
            .with_context(|| format!("{m:?} is not on the configured ladder"))
    }

    pub fn map(&mut self, m: Member) -> Result<ZvonkinMap> {
        let i = self.member_index(m)?;
        let sel = self.selection()?;
        let (u, lambda) = (sel.solutions[i].u.clone(), sel.lambda);
        Ok(ZvonkinMap::build(u, lambda)?)
    }

    pub fn telemetry(&mut self) -> Result<Vec<MemberTelemetry>> {
        let names: Vec<String> = self.members().iter().map(|m| member_label(*m)).collect();
        let sel = self.selection()?;
        Ok(sel
            .solutions
            .iter()
            .zip(names)
            .map(|(s, member)| MemberTelemetry {
                member,
                iterations: s.stats.iterations,
                contraction_ratio: s.stats.contraction_ratio,
                final_difference: s.stats.increments.last().copied().unwrap_or(0.0),
                ratios: s.stats.ratios.clone(),
                grad_sup: s.grad_sup,
            })
            .collect())
    }
}

pub fn member_label(m: Member) -> String {
    match m {
        Member::Full => "b".to_string(),
        Member::Mollified(n) => format!("b_n{n}"),
    }
}
