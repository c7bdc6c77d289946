use std::fs;

use needle_core::distribution::{cdf_snapshots, dyadic_table, dyadic_table_csv, gap_stats};
use needle_core::dynamics::{self, flow_to_equilibrium, half_needle_start, shifted_start};
use needle_core::equilibrium::{self, default_tolerance, solve_default};
use needle_core::field::{
    field_map, nearest_charge_ratios, net_force_sum, partial_force_sum, FieldSource, Grid,
};
use needle_core::text::format_g17;
use needle_core::{ChargeConfiguration, ClosedSimplexPoint, DyadicTarget, DynamicsSpec, EmpiricalCdf, Error, System};

use crate::error::CliError;
use crate::output::Run;
use crate::{FieldmapArgs, InitArg, MethodArg, SimulateArgs, SolveArgs, SourceArg, SystemArg, TableArgs, TableKind};

/// Map budget of the fixed-point method; it stalls well before this for
/// all but the smallest sizes.
const FIXED_POINT_MAX_ITER: usize = 100_000;

fn params<T: serde::Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn row(values: &[f64]) -> String {
    let cells: Vec<String> = values.iter().map(|&v| format_g17(v)).collect();
    cells.join(",") + "\n"
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let n = args.n;
    if n < 3 {
        return Err(Error::InvalidCount(n).into());
    }
    let tol = args.tol.unwrap_or_else(|| default_tolerance(n));
    let start = ChargeConfiguration::equispaced(n)?;
    let report = match args.method {
        MethodArg::Hybrid => equilibrium::solve(n, tol)?,
        MethodArg::GradientDescent => equilibrium::solve_gradient_descent(&start.interior(), tol)?,
        MethodArg::FixedPoint => {
            equilibrium::solve_fixed_point(&ClosedSimplexPoint::from(&start), FIXED_POINT_MAX_ITER, tol)?
        }
        MethodArg::GradientFlow => flow_to_equilibrium(&start, tol)?,
    };
    let mut run = Run::new(args.out.as_deref())?;
    let stem = format!("solve_n{n}");
    run.write(&format!("{stem}.json"), &(report.to_json() + "\n"))?;
    run.write(&format!("{stem}_positions.txt"), &report.configuration.to_text())?;
    run.finish("solve", &stem, params(args))?;
    Ok(())
}

fn initial_configuration(args: &SimulateArgs) -> Result<ChargeConfiguration, CliError> {
    if let InitArg::File = args.init {
        let path = args.init_file.as_ref().ok_or_else(|| CliError::Usage("--init file needs --init-file".into()))?;
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = ChargeConfiguration::from_text(&text)?;
        if let Some(n) = args.n.filter(|&n| n != config.n()) {
            return Err(CliError::Usage(format!("--n {n} but the file holds {} positions", config.n())));
        }
        return Ok(config);
    }
    let n = args.n.ok_or_else(|| CliError::Usage("--n is required unless --init file".into()))?;
    Ok(match args.init {
        InitArg::Equispaced => ChargeConfiguration::equispaced(n)?,
        InitArg::HalfNeedle => half_needle_start(n)?,
        InitArg::Shifted => shifted_start(n)?,
        InitArg::File => unreachable!("handled above"),
    })
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let start = initial_configuration(args)?;
    let n = start.n();
    let (system, label) = match args.system {
        SystemArg::Newton => (System::Newtonian, "newton"),
        SystemArg::Flow => (System::GradientFlow, "flow"),
    };
    let spec = DynamicsSpec::new(system, start, args.horizon, args.step)?;
    let traj = dynamics::simulate(&spec)?;
    let snapshots = cdf_snapshots(&traj, &args.cdf_snapshots)?;

    let mut run = Run::new(args.out.as_deref())?;
    let stem = format!("simulate_{label}_n{n}");
    run.write(&format!("{stem}.csv"), &traj.to_csv())?;
    for (t, cdf) in args.cdf_snapshots.iter().zip(&snapshots) {
        run.write(&format!("{stem}_cdf_t{t}.csv"), &cdf.to_csv())?;
    }
    run.finish("simulate", &stem, params(args))?;
    Ok(())
}

/// Parses `5,9,17` and inclusive ranges `2..8`, in any mix.
fn parse_list(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = |item: &str| CliError::Usage(format!("cannot read {item:?} as a number or an a..b range"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad(item))?;
            let b: u64 = b.trim().parse().map_err(|_| bad(item))?;
            if a > b {
                return Err(bad(item));
            }
            out.extend(a..=b);
        } else {
            out.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("empty list".into()));
    }
    Ok(out)
}

fn dyadic_sizes(args: &TableArgs) -> Result<Vec<u32>, CliError> {
    if args.min_k < 1 || args.min_k > args.max_k || args.max_k > 20 {
        return Err(CliError::Usage(format!("need 1 <= min-k <= max-k <= 20, got {}..{}", args.min_k, args.max_k)));
    }
    Ok((args.min_k..=args.max_k).collect())
}

pub fn table(args: &TableArgs) -> Result<(), CliError> {
    let (name, csv) = match args.kind {
        TableKind::Dyadic => {
            let targets = args.gammas.iter().map(|g| g.parse::<DyadicTarget>()).collect::<Result<Vec<_>, _>>()?;
            ("dyadic", dyadic_table_csv(&dyadic_table(&dyadic_sizes(args)?, &targets)?))
        }
        TableKind::Ratio => {
            let ns = parse_list(args.ns.as_deref().unwrap_or("5,9,17,33"))?;
            let mut csv = String::from("n,x_n_2,x_2n_minus_1_2,ratio\n");
            for n in ns {
                let n = n as usize;
                if n < 3 {
                    return Err(Error::InvalidCount(n).into());
                }
                let small = solve_default(n)?.configuration.positions()[1];
                let large = solve_default(2 * n - 1)?.configuration.positions()[1];
                csv.push_str(&format!("{n},{}", row(&[small, large, small / large])));
            }
            ("ratio", csv)
        }
        TableKind::Gaps => {
            let mut csv = String::from("k,n,min_gap,max_gap,ratio,sup_distance\n");
            for k in dyadic_sizes(args)? {
                let n = (1usize << k) + 1;
                let c = solve_default(n)?.configuration;
                let g = gap_stats(&c);
                let d = EmpiricalCdf::from_configuration(&c).sup_distance_to_uniform();
                csv.push_str(&format!("{k},{n},{}", row(&[g.min_gap, g.max_gap, g.ratio, d])));
            }
            ("gaps", csv)
        }
        TableKind::Qfactors => {
            let default = format!("{}..10", args.s + 1);
            let ns = parse_list(args.ns.as_deref().unwrap_or(&default))?;
            let mut csv = String::from(
                "n,q_minus_sum,q_minus_closed,q_plus_sum,q_plus_closed,partial_sum,partial_closed,net_sum,net_closed\n",
            );
            for n in ns {
                let n = u32::try_from(n).map_err(|_| CliError::Usage(format!("level {n} is too large")))?;
                let r = nearest_charge_ratios(args.q, args.s, n)?;
                let p = partial_force_sum(args.q, args.s, n)?;
                let f = net_force_sum(args.q, args.s, n)?;
                csv.push_str(&format!(
                    "{n},{}",
                    row(&[
                        r.q_minus.finite_sum,
                        r.q_minus.closed_form,
                        r.q_plus.finite_sum,
                        r.q_plus.closed_form,
                        p.finite_sum,
                        p.closed_form,
                        f.finite_sum,
                        f.closed_form,
                    ])
                ));
            }
            ("qfactors", csv)
        }
    };
    let mut run = Run::new(args.out.as_deref())?;
    let stem = format!("table_{name}");
    run.write(&format!("{stem}.csv"), &csv)?;
    run.finish("table", &stem, params(args))?;
    Ok(())
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("cannot read {text:?} as lo:hi"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn parse_grid(region: &str, res: &str) -> Result<Grid, CliError> {
    let (xs, ys) = region
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("region {region:?} must look like x0:x1,y0:y1")))?;
    let bad_res = || CliError::Usage(format!("resolution {res:?} must look like 40x20"));
    let (nx, ny) = res.split_once('x').ok_or_else(bad_res)?;
    let nx: usize = nx.trim().parse().map_err(|_| bad_res())?;
    let ny: usize = ny.trim().parse().map_err(|_| bad_res())?;
    Ok(Grid::new(parse_range(xs)?, parse_range(ys)?, nx, ny)?)
}

pub fn fieldmap(args: &FieldmapArgs) -> Result<(), CliError> {
    let grid = parse_grid(&args.region, &args.res)?;
    let need_n = || args.n.ok_or_else(|| CliError::Usage("--n is required for discrete sources".into()));
    let (source, stem) = match args.source {
        SourceArg::Continuous => (FieldSource::Continuous, "fieldmap_continuous".to_string()),
        SourceArg::DiscreteEquilibrium => {
            let n = need_n()?;
            (FieldSource::Discrete(solve_default(n)?.configuration), format!("fieldmap_discrete_equilibrium_n{n}"))
        }
        SourceArg::DiscreteUniform => {
            let n = need_n()?;
            (FieldSource::Discrete(ChargeConfiguration::equispaced(n)?), format!("fieldmap_discrete_uniform_n{n}"))
        }
    };
    let map = field_map(&source, &grid);
    let mut run = Run::new(args.out.as_deref())?;
    if map.skipped > 0 {
        run.warnings.push(format!("{} grid points skipped: field undefined on the needle or on a charge", map.skipped));
    }
    run.skipped_points = Some(map.skipped);
    run.write(&format!("{stem}.csv"), &map.to_csv())?;
    run.finish("fieldmap", &stem, params(args))?;
    Ok(())
}
