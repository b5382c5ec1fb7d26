use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use walsh_recon::compression::{
    compress_plan, plan_indices, plan_spectrum, CompressionMethod, CompressionPlan, CompressionReport, SubDegreeRule,
    MSQE_MIN_LEVEL,
};
use walsh_recon::filter::{evaluate_filter, rank_by_chi, NoiseSpectrum, SpectrumShape};
use walsh_recon::negligibility::negligibility;
use walsh_recon::sensor::{run_protocol, Acquisition, SensorConfig, ShotMode, VisibilityModel};
use walsh_recon::stats::{total_error_report, ReconstructionEnvelope, TotalErrorReport};
use walsh_recon::walsh::{degree, CoefficientQuadrature, FieldProfile, WalshIndex, WalshSpectrum};
use walsh_recon::Error;

use crate::output::{write_csv, write_json};
use crate::{
    Cli, Command, CompressArgs, DdfilterArgs, Method, NoiseKind, Ordering, Outcome, PlanArgs, ProfileArgs, SenseArgs,
    TransformArgs,
};

const DEFAULT_ORDER: u32 = 5;
const MAX_LIST_LEN: u64 = 1 << 20;

fn invalid(name: &'static str, reason: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
    .into()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let run_config = serde_json::to_value(cli)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let ctx = Runner {
        cli,
        run_config: &run_config,
    };
    match &cli.command {
        Command::Transform(args) => ctx.transform(args),
        Command::Compress(args) => ctx.compress(args),
        Command::Sense(args) => ctx.sense(args),
        Command::Ddfilter(args) => ctx.ddfilter(args),
    }
}

struct Runner<'a> {
    cli: &'a Cli,
    run_config: &'a Value,
}

impl Runner<'_> {
    fn json(&self, name: &str, body: &impl Serialize) -> Result<()> {
        write_json(&self.cli.out, name, self.run_config, body)
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
        write_csv(&self.cli.out, name, self.run_config, &header, rows)
    }

    fn transform(&self, args: &TransformArgs) -> Result<Outcome> {
        let f = load_profile(&args.profile)?;
        let quad = CoefficientQuadrature::default();
        let spectrum = match &args.indices {
            Some(list) => {
                let paley = to_paley(&parse_indices(list)?, args.ordering);
                WalshSpectrum::exact_for(&f, &paley, &quad)
            }
            None => WalshSpectrum::exact(&f, args.order.unwrap_or(DEFAULT_ORDER), &quad)?,
        };
        self.json("spectrum.json", &spectrum)?;
        let rows: Vec<Vec<f64>> = spectrum
            .coefficients()
            .iter()
            .map(|(&m, &c)| {
                vec![
                    m as f64,
                    WalshIndex::paley(m).sequency_index() as f64,
                    c,
                    c.abs(),
                    f64::from(negligibility(m)),
                ]
            })
            .collect();
        self.csv(
            "coefficients.csv",
            &["paley", "sequency", "coefficient", "abs", "negligibility"],
            &rows,
        )?;
        println!("{} coefficients written to {}", rows.len(), self.cli.out.display());
        Ok(Outcome::Done)
    }

    fn compress(&self, args: &CompressArgs) -> Result<Outcome> {
        let f = load_profile(&args.profile)?;
        let plan = build_plan(&args.plan)?;
        let quad = CoefficientQuadrature::default();
        let spectrum = plan_spectrum(&f, &plan, &quad)?;
        let report: CompressionReport = compress_plan(&f, plan.clone(), &quad)?;
        self.json("compression.json", &report)?;

        let level = plan.level().max(MSQE_MIN_LEVEL).max(f.sample_level().unwrap_or(0));
        let cells = spectrum.cell_values(level)?;
        let width = f.duration() / cells.len() as f64;
        let rows: Vec<Vec<f64>> = cells
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                let t = (c as f64 + 0.5) * width;
                vec![t, f.value(t), v]
            })
            .collect();
        self.csv("reconstruction.csv", &["t", "field", "reconstruction"], &rows)?;
        println!(
            "{}: {} indices, {} pulses, msqe {:.6e}",
            report.method,
            report.selected_indices.len(),
            report.pulse_count,
            report.msqe
        );
        Ok(Outcome::Done)
    }

    fn sense(&self, args: &SenseArgs) -> Result<Outcome> {
        let f = load_profile(&args.profile)?;
        let plan = build_plan(&args.plan)?;
        let cfg = SensorConfig::new(args.gamma, f.duration())?;
        let vis = match args.t2 {
            Some(t2) => VisibilityModel::new(t2, args.stretch, args.pulse_exponent)?,
            None => VisibilityModel::ideal(),
        };
        let mode = if args.noiseless {
            ShotMode::Noiseless
        } else {
            ShotMode::Sampled
        };
        let acq = run_protocol(&f, &cfg, &plan, &vis, args.shots, self.cli.seed, mode)?;
        let envelope = ReconstructionEnvelope::new(acq.spectrum.clone(), args.shots, &cfg, &vis, args.inflation)?;
        let total = total_error_report(plan.level(), &envelope, f.derivative_sup(1));

        #[derive(Serialize)]
        struct SenseOutput<'a> {
            acquisition: &'a Acquisition,
            inflation: f64,
            envelope_variance: f64,
            envelope_sigma: f64,
            total_error: TotalErrorReport,
        }
        self.json(
            "acquisition.json",
            &SenseOutput {
                acquisition: &acq,
                inflation: args.inflation,
                envelope_variance: envelope.variance(),
                envelope_sigma: envelope.sigma(),
                total_error: total,
            },
        )?;
        let rows: Vec<Vec<f64>> = envelope
            .rows(args.points)?
            .into_iter()
            .map(|r| vec![r.t, r.mean, r.mean_minus_sigma, r.mean_plus_sigma])
            .collect();
        self.csv("envelope.csv", &["t", "mean", "mean_minus_sigma", "mean_plus_sigma"], &rows)?;

        println!(
            "{} coefficients, variance {:.6e}, sigma {:.6e}",
            acq.records.len(),
            envelope.variance(),
            envelope.sigma()
        );
        if acq.has_range_problems() {
            eprintln!(
                "warning: dynamic range exceeded; saturated {:?}, out of range {:?}",
                acq.saturated, acq.out_of_range
            );
            if args.strict {
                return Ok(Outcome::Saturated);
            }
        }
        Ok(Outcome::Done)
    }

    fn ddfilter(&self, args: &DdfilterArgs) -> Result<Outcome> {
        let indices = to_paley(&parse_indices(&args.indices)?, args.ordering);
        let finest = indices.iter().map(|&m| degree(m)).max().unwrap_or(0);
        let n = args.order.unwrap_or(finest);
        if n < finest {
            return Err(invalid("order", format!("{n} is below the largest degree requested ({finest})")));
        }
        if args.points < 2 || !(args.omega_t_max > 0.0 && args.omega_t_max.is_finite()) {
            return Err(invalid("points", "need at least 2 points and a positive finite --omega-t-max"));
        }
        let step = args.omega_t_max / (args.points - 1) as f64;
        let grid: Vec<f64> = (0..args.points).map(|i| i as f64 * step).collect();
        let evaluations = indices
            .iter()
            .map(|&m| evaluate_filter(m, n, &grid))
            .collect::<walsh_recon::Result<Vec<_>>>()?;

        let mut header = vec!["omegaT".to_string()];
        header.extend(indices.iter().map(|m| format!("F_{m}")));
        let rows: Vec<Vec<f64>> = grid
            .iter()
            .enumerate()
            .map(|(i, &x)| std::iter::once(x).chain(evaluations.iter().map(|e| e.values[i])).collect())
            .collect();
        write_csv(&self.cli.out, "filter.csv", self.run_config, &header, &rows)?;

        if let Some(kind) = args.noise {
            let shape = match kind {
                NoiseKind::Flat => SpectrumShape::PowerLaw {
                    amplitude: args.noise_amplitude,
                    exponent: 0.0,
                },
                NoiseKind::Powerlaw => SpectrumShape::PowerLaw {
                    amplitude: args.noise_amplitude,
                    exponent: args.noise_exponent,
                },
                NoiseKind::Lorentzian => SpectrumShape::Lorentzian {
                    amplitude: args.noise_amplitude,
                    cutoff: args.noise_cutoff,
                },
            };
            let spectrum = NoiseSpectrum::new(shape, args.omega_min, args.omega_max)?;
            let ranking = rank_by_chi(&indices, n, args.duration, &spectrum)?;

            #[derive(Serialize)]
            struct ChiOutput<'a> {
                n: u32,
                duration: f64,
                spectrum: &'a NoiseSpectrum,
                ranking: &'a [walsh_recon::filter::ChiEntry],
            }
            self.json(
                "chi.json",
                &ChiOutput {
                    n,
                    duration: args.duration,
                    spectrum: &spectrum,
                    ranking: &ranking,
                },
            )?;
            for e in &ranking {
                println!("m={:<6} p={:<3} chi={:.6e} W={:.6}", e.index, e.negligibility, e.chi, e.coherence);
            }
        }
        Ok(Outcome::Done)
    }
}

fn load_profile(args: &ProfileArgs) -> Result<FieldProfile> {
    Ok(FieldProfile::from_spec(&args.profile, args.duration)?)
}

fn build_plan(args: &PlanArgs) -> Result<CompressionPlan> {
    if let Some(list) = &args.indices {
        return Ok(CompressionPlan::custom(parse_indices(list)?));
    }
    let method = match args.method {
        None => CompressionMethod::Full {
            order: args.order.unwrap_or(DEFAULT_ORDER),
        },
        Some(Method::Threshold) => CompressionMethod::Threshold {
            p0: args.p0.ok_or_else(|| invalid("p0", "required by --method threshold"))?,
        },
        Some(Method::Cpmgpdd) => CompressionMethod::CpmgPdd {
            m: args.order.ok_or_else(|| invalid("order", "required by --method cpmgpdd"))?,
        },
        Some(Method::Subdegree) => CompressionMethod::SubDegree {
            max_degree: args.order.ok_or_else(|| invalid("order", "required by --method subdegree"))?,
            rule: SubDegreeRule {
                offset: args.subdegree_offset,
                ..SubDegreeRule::default()
            },
        },
    };
    Ok(plan_indices(method)?)
}

fn to_paley(indices: &[u64], ordering: Ordering) -> Vec<u64> {
    match ordering {
        Ordering::Paley => indices.to_vec(),
        Ordering::Sequency => indices.iter().map(|&m| WalshIndex::sequency(m).paley_index()).collect(),
    }
}

/// Parses `0,3,8-15` into a list, keeping the given order and dropping
/// repeats.
fn parse_indices(text: &str) -> Result<Vec<u64>> {
    let bad = |part: &str| invalid("indices", format!("cannot parse `{part}`"));
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (
                a.trim().parse::<u64>().map_err(|_| bad(part))?,
                b.trim().parse::<u64>().map_err(|_| bad(part))?,
            ),
            None => {
                let v = part.parse::<u64>().map_err(|_| bad(part))?;
                (v, v)
            }
        };
        if hi < lo || hi - lo >= MAX_LIST_LEN || out.len() as u64 + (hi - lo) >= MAX_LIST_LEN {
            return Err(invalid("indices", format!("range `{part}` is empty or too long")));
        }
        out.extend((lo..=hi).filter(|&m| seen.insert(m)));
    }
    if out.is_empty() {
        return Err(invalid("indices", "no indices given"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_lists() {
        assert_eq!(parse_indices("0,3,8-11").unwrap(), vec![0, 3, 8, 9, 10, 11]);
        assert_eq!(parse_indices(" 5 , 2,5 ").unwrap(), vec![5, 2]);
        assert!(parse_indices("").is_err());
        assert!(parse_indices("4-2").is_err());
        assert!(parse_indices("x").is_err());
    }

    #[test]
    fn sequency_lists_convert() {
        assert_eq!(to_paley(&[0, 1, 2, 3], Ordering::Sequency), vec![0, 1, 3, 2]);
        assert_eq!(to_paley(&[2, 3], Ordering::Paley), vec![2, 3]);
    }
}
