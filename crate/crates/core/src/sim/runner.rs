use rayon::prelude::*;

use super::config::SimConfig;
use super::generate::gen_sim;
use super::stats::{InteractionRanks, InteractionSummary, MarginalRanks, MarginalSummary};
use crate::baselines::{dcsis_screen, sirs_screen};
use crate::error::{Error, Result};
use crate::moments::{build_moment_cache, DEFAULT_VAR_TOLERANCE};
use crate::norm::NormSpec;
use crate::report::{rank_of, Method};
use crate::screen::{interaction_ranks, screen_marginal_multi};

/// Raw per-replicate statistics for one method.
#[derive(Debug, Clone, PartialEq)]
pub enum RepStats {
    Marginal(Vec<MarginalRanks>),
    Interaction(Vec<InteractionRanks>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Summary {
    Marginal(MarginalSummary),
    Interaction(InteractionSummary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub reps: RepStats,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config_id: String,
    pub reps: usize,
    pub base_seed: u64,
    /// Replicate draws discarded because an exp-link response overflowed.
    pub regenerations: u64,
    pub methods: Vec<MethodResult>,
}

impl SimResult {
    pub fn method(&self, method: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn marginal_summary(&self, method: Method) -> Option<&MarginalSummary> {
        match &self.method(method)?.summary {
            Summary::Marginal(s) => Some(s),
            _ => None,
        }
    }

    pub fn interaction_summary(&self, method: Method) -> Option<&InteractionSummary> {
        match &self.method(method)?.summary {
            Summary::Interaction(s) => Some(s),
            _ => None,
        }
    }
}

/// Parses `gencorr-T`, `gencorr-F`, `sirs`, `dcsis` (case-insensitive).
pub fn parse_method(s: &str) -> Result<Method> {
    match s.trim().to_ascii_lowercase().as_str() {
        "gencorr-t" | "gencorr-taxicab" => Ok(Method::GenCorr(NormSpec::TAXICAB)),
        "gencorr-f" | "gencorr-frobenius" => Ok(Method::GenCorr(NormSpec::FROBENIUS)),
        "sirs" => Ok(Method::Sirs),
        "dcsis" | "dc-sis" => Ok(Method::DcSis),
        other => Err(Error::Config(format!("unknown method '{other}'"))),
    }
}

enum RepOutcome {
    Marginal(Vec<MarginalRanks>),
    Interaction(Vec<InteractionRanks>),
}

fn run_one(config: &SimConfig, methods: &[Method], rep: usize) -> Result<(RepOutcome, u64)> {
    let draw = gen_sim(config, rep)?;
    let order = config.truth.order();
    let norms: Vec<NormSpec> = methods
        .iter()
        .filter_map(|m| match m {
            Method::GenCorr(n) => Some(*n),
            _ => None,
        })
        .collect();

    if order == 1 {
        let truth: Vec<usize> = draw.truth.iter().map(|t| t[0]).collect();
        let gencorr = if norms.is_empty() {
            Vec::new()
        } else {
            let cache = build_moment_cache(&draw.data, DEFAULT_VAR_TOLERANCE)?;
            screen_marginal_multi(&cache, &norms)?
        };
        let mut out = Vec::with_capacity(methods.len());
        let mut next_gencorr = gencorr.into_iter();
        for m in methods {
            let report = match m {
                Method::GenCorr(_) => next_gencorr.next().expect("one report per norm"),
                Method::Sirs => sirs_screen(&draw.data)?,
                Method::DcSis => dcsis_screen(&draw.data)?,
            };
            let ranks = truth
                .iter()
                .map(|&j| rank_of(&report, &[j]))
                .collect::<Result<Vec<_>>>()?;
            out.push(MarginalRanks::from_ranks(&ranks)?);
        }
        Ok((RepOutcome::Marginal(out), draw.regenerations))
    } else {
        let cache = build_moment_cache(&draw.data, DEFAULT_VAR_TOLERANCE)?;
        let ranks = interaction_ranks(&cache, order, &norms, &draw.truth)?;
        let out = ranks
            .into_iter()
            .map(|r| InteractionRanks {
                ranks: r.into_iter().map(|v| v as usize).collect(),
            })
            .collect();
        Ok((RepOutcome::Interaction(out), draw.regenerations))
    }
}

/// Runs `config.reps` replicates in parallel and aggregates rank
/// statistics per method. Output does not depend on the worker count.
pub fn run_replications(config: &SimConfig, methods: &[Method]) -> Result<SimResult> {
    config.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }
    if config.reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if config.truth.order() > 1 {
        if let Some(m) = methods.iter().find(|m| !matches!(m, Method::GenCorr(_))) {
            return Err(Error::Config(format!("{m} cannot screen interactions")));
        }
    }

    let outcomes: Vec<(RepOutcome, u64)> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            run_one(config, methods, rep).map_err(|e| Error::Replicate {
                rep,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let regenerations = outcomes.iter().map(|(_, r)| r).sum();
    let results = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            if config.truth.order() == 1 {
                let reps: Vec<MarginalRanks> = outcomes
                    .iter()
                    .map(|(o, _)| match o {
                        RepOutcome::Marginal(v) => v[k],
                        RepOutcome::Interaction(_) => unreachable!(),
                    })
                    .collect();
                MethodResult {
                    method,
                    summary: Summary::Marginal(MarginalSummary::from_reps(&reps)),
                    reps: RepStats::Marginal(reps),
                }
            } else {
                let reps: Vec<InteractionRanks> = outcomes
                    .iter()
                    .map(|(o, _)| match o {
                        RepOutcome::Interaction(v) => v[k].clone(),
                        RepOutcome::Marginal(_) => unreachable!(),
                    })
                    .collect();
                MethodResult {
                    method,
                    summary: Summary::Interaction(InteractionSummary::from_reps(&reps)),
                    reps: RepStats::Interaction(reps),
                }
            }
        })
        .collect();

    Ok(SimResult {
        config_id: config.id.clone(),
        reps: config.reps,
        base_seed: config.base_seed,
        regenerations,
        methods: results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screen::screen_marginal;
    use crate::sim::stats::rank_stats_marginal;

    #[test]
    fn single_rep_equals_direct_rank_stats() {
        let mut c = SimConfig::named("1C").unwrap().with_reps(1).with_seed(9);
        c.p = 200;
        let m = Method::GenCorr(NormSpec::FROBENIUS);
        let res = run_replications(&c, &[m]).unwrap();
        let draw = gen_sim(&c, 0).unwrap();
        let direct = rank_stats_marginal(&screen_marginal(&draw.data, NormSpec::FROBENIUS).unwrap(), &[0, 1, 2]).unwrap();
        match &res.methods[0].reps {
            RepStats::Marginal(v) => assert_eq!(v, &vec![direct]),
            _ => panic!("expected marginal stats"),
        }
    }

    #[test]
    fn interaction_sims_reject_baselines() {
        let c = SimConfig::named("5A").unwrap().with_reps(1);
        assert!(run_replications(&c, &[Method::Sirs]).is_err());
    }

    #[test]
    fn methods_parse() {
        assert_eq!(parse_method("GenCorr-F").unwrap(), Method::GenCorr(NormSpec::FROBENIUS));
        assert_eq!(parse_method("dcsis").unwrap(), Method::DcSis);
        assert!(parse_method("lasso").is_err());
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = SimConfig::named("5B").unwrap().with_reps(4).with_seed(3);
        c.p = 60;
        let methods = [Method::GenCorr(NormSpec::TAXICAB), Method::GenCorr(NormSpec::FROBENIUS)];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_replications(&c, &methods).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
