use std::path::Path;

use num_complex::{Complex, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{
    AssembleArgs, Cli, Command, CoordsArgs, CountArgs, EtadetArgs, Format, LatticeArgs, MirrorArgs,
    QseriesArgs, ReduceArgs, RootsArgs, SeriesKind, ShellError, StrategyArg, TubeArgs,
};
use crate::counting::{
    count_roots_with_degree, count_roots_with_strategy, euler_product, lambert_coefficients,
    log_derivative_series, product_expansion, CountError, CountProfile, CountStrategy, PowerSeries,
};
use crate::lattice::{enumerate_roots, make_lattice, Lattice, LatticeVector, RootConstraint};
use crate::mirror::{mirror_swap, MarkedPair};
use crate::orbit::{
    canonicalize_root_with_budget, random_isometry, random_root, ReductionCertificate,
};
use crate::period::{
    factor_of_automorphy, gram_det, hermitian_pairing, random_point, tube_embed, Frame,
    PeriodPoint, TubeForm,
};
use crate::rational::{
    format_rational, parse_rational, rational_from_json, rational_to_json, rationals_from_json,
    Rational,
};
use crate::spectral::{k3_det_assembly, torus_det, TorusModulus};

type Out = Result<String, ShellError>;

pub(super) fn dispatch(cli: &Cli) -> Out {
    match &cli.command {
        Command::Lattice(a) => lattice(cli, a),
        Command::Roots(a) => roots(cli, a),
        Command::Reduce(a) => reduce(cli, a),
        Command::Coords(a) => coords(cli, a),
        Command::Tube(a) => tube(cli, a),
        Command::Mirror(a) => mirror(cli, a),
        Command::Count(a) => count(cli, a),
        Command::Qseries(a) => qseries(cli, a),
        Command::Etadet(a) => etadet(cli, a),
        Command::Assemble(a) => assemble(cli, a),
    }
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn parse_json(flag: &str, text: &str) -> Result<Value, ShellError> {
    serde_json::from_str(text).map_err(|e| ShellError::Usage(format!("--{flag} {text:?}: {e}")))
}

fn parse_vector(lat: &Lattice, flag: &str, text: &str) -> Result<LatticeVector, ShellError> {
    let coords = rationals_from_json(&parse_json(flag, text)?).ok_or_else(|| {
        ShellError::Usage(format!(
            "--{flag} {text:?}: expected an array of integers or \"p/q\""
        ))
    })?;
    Ok(lat.vector(coords)?)
}

fn parse_complex(flag: &str, text: &str) -> Result<Vec<Complex<Rational>>, ShellError> {
    let bad = || {
        ShellError::Usage(format!(
            "--{flag} {text:?}: expected an array of [re, im] pairs"
        ))
    };
    parse_json(flag, text)?
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|z| {
            let pair = z.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let re = rational_from_json(&pair[0]).ok_or_else(bad)?;
            let im = rational_from_json(&pair[1]).ok_or_else(bad)?;
            Ok(Complex::new(re, im))
        })
        .collect()
}

fn read_file(path: &Path) -> Result<String, ShellError> {
    std::fs::read_to_string(path)
        .map_err(|e| ShellError::domain("Io", format!("{}: {e}", path.display())))
}

fn coords_json(v: &LatticeVector) -> Value {
    Value::Array(v.coords().iter().map(rational_to_json).collect())
}

fn coords_text(v: &LatticeVector) -> String {
    serde_json::to_string(&coords_json(v)).expect("values serialize")
}

fn lattice(cli: &Cli, a: &LatticeArgs) -> Out {
    let lat = make_lattice(&a.lattice)?;
    let (p, q) = lat.signature();
    Ok(match cli.format {
        Format::Text => format!(
            "label {}\nrank {}\nsignature {p} {q}\ndet {}\nunimodular {}\ngram\n{}\n",
            lat.label(),
            lat.rank(),
            lat.det(),
            lat.is_unimodular(),
            lat.gram_text()
        ),
        Format::Json => json_text(&json!({
            "label": lat.label(),
            "rank": lat.rank(),
            "signature": [p, q],
            "det": lat.det().to_string(),
            "unimodular": lat.is_unimodular(),
            "gram": lat.gram(),
        })),
        Format::Csv => lat.gram_text().replace(' ', ",") + "\n",
    })
}

fn roots(cli: &Cli, a: &RootsArgs) -> Out {
    let lat = make_lattice(&a.lattice)?;
    let mut c = RootConstraint::roots();
    c.norm = a.norm;
    if let Some(p) = &a.pair {
        c = c.with_pairing(parse_vector(&lat, "pair", p)?, a.value);
    }
    if let Some(b) = a.bound {
        c = c.with_bound(b);
    }
    let found = enumerate_roots(&lat, &c)?;
    Ok(match cli.format {
        Format::Text => found.iter().map(|v| coords_text(v) + "\n").collect(),
        Format::Json => json_text(&json!({
            "lattice": lat.label(),
            "count": found.len(),
            "vectors": found.iter().map(coords_json).collect::<Vec<_>>(),
        })),
        Format::Csv => found
            .iter()
            .map(|v| {
                v.coords()
                    .iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(",")
                    + "\n"
            })
            .collect(),
    })
}

fn certificates_from(v: &Value) -> Result<Vec<ReductionCertificate>, ShellError> {
    match v {
        Value::Array(items) => items
            .iter()
            .map(|c| Ok(ReductionCertificate::from_json(c)?))
            .collect(),
        other => Ok(vec![ReductionCertificate::from_json(other)?]),
    }
}

fn reduce(cli: &Cli, a: &ReduceArgs) -> Out {
    if let Some(path) = &a.replay {
        let text = read_file(path)?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| ShellError::domain("BadJson", format!("{}: {e}", path.display())))?;
        let certs = certificates_from(&v)?;
        for (i, c) in certs.iter().enumerate() {
            if !c.replays() {
                return Err(ShellError::domain(
                    "ReplayMismatch",
                    format!("certificate {i} does not replay"),
                ));
            }
        }
        return Ok(match cli.format {
            Format::Json => json_text(&json!({ "replayed": certs.len(), "ok": true })),
            _ => format!("replay ok {}\n", certs.len()),
        });
    }
    let lat = make_lattice(&a.lattice)?;
    let (certs, single) = match (&a.root, a.random) {
        (Some(r), _) => {
            let v = parse_vector(&lat, "root", r)?;
            (vec![canonicalize_root_with_budget(&v, a.budget)?], true)
        }
        (None, Some(k)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut out = Vec::with_capacity(k);
            for _ in 0..k {
                let r = random_root(&lat, &mut rng, a.size)?;
                out.push(canonicalize_root_with_budget(&r, a.budget)?);
            }
            (out, false)
        }
        (None, None) => {
            return Err(ShellError::Usage(
                "reduce needs --root, --random or --replay".into(),
            ))
        }
    };
    Ok(match cli.format {
        Format::Json if single => json_text(&certs[0].to_json()),
        Format::Json => json_text(&Value::Array(
            certs.iter().map(ReductionCertificate::to_json).collect(),
        )),
        Format::Text => certs
            .iter()
            .map(|c| {
                format!(
                    "{} -> {} steps {} word {} replay {}\n",
                    coords_text(&c.input),
                    coords_text(&c.output),
                    c.steps,
                    c.word.len(),
                    if c.replays() { "ok" } else { "FAILED" }
                )
            })
            .collect(),
        Format::Csv => {
            let mut s = String::from("index,steps,word_length,replays\n");
            for (i, c) in certs.iter().enumerate() {
                s.push_str(&format!(
                    "{i},{},{},{}\n",
                    c.steps,
                    c.word.len(),
                    c.replays()
                ));
            }
            s
        }
    })
}

fn load_point(
    path: &Option<std::path::PathBuf>,
    rng: &mut ChaCha8Rng,
    p: usize,
    q: usize,
) -> Result<PeriodPoint, ShellError> {
    match path {
        Some(path) => Ok(PeriodPoint::from_text(&read_file(path)?)?),
        None => Ok(random_point(rng, p, q, 0.5)?),
    }
}

fn coords(cli: &Cli, a: &CoordsArgs) -> Out {
    if cli.format == Format::Csv {
        return Err(ShellError::UnsupportedFormat("csv"));
    }
    let lat = make_lattice(&a.lattice)?;
    let (p, q) = lat.signature();
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let pt = load_point(&a.point, &mut rng, p, q)?;
    let frame = Frame::new(&lat);
    let gamma = random_isometry(&lat, &mut rng, a.word_length)?.matrix();
    let (mu, image) = factor_of_automorphy(&frame, &gamma, &pt)?;
    let g = gram_det(&pt);
    let dm = mu.determinant();
    let residual = (gram_det(&image) * dm * dm - g).abs() / g.abs();
    Ok(match cli.format {
        Format::Json => json_text(&json!({
            "signature": [p, q],
            "gram_det": sci(g),
            "automorphy_residual": sci(residual),
            "tau": pt.to_text().lines().skip(1).map(String::from).collect::<Vec<_>>(),
        })),
        _ => format!(
            "gram_det {}\nautomorphy_residual {}\ntau\n{}",
            sci(g),
            sci(residual),
            pt.to_text()
        ),
    })
}

fn complex_text(z: &Complex<Rational>) -> String {
    format!("{} {}", format_rational(&z.re), format_rational(&z.im))
}

fn tube(cli: &Cli, a: &TubeArgs) -> Out {
    if cli.format == Format::Csv {
        return Err(ShellError::UnsupportedFormat("csv"));
    }
    let lat = make_lattice(&a.lattice)?;
    let form = TubeForm::new(&lat)?;
    let w = parse_complex("w", &a.w)?;
    let psi = tube_embed(&form, &w)?;
    let norm = form.ambient_pair(&psi, &psi);
    let herm = hermitian_pairing(&form, &psi, &psi);
    Ok(match cli.format {
        Format::Json => json_text(&json!({
            "psi": psi.iter().map(|z| [format_rational(&z.re), format_rational(&z.im)]).collect::<Vec<_>>(),
            "norm": [format_rational(&norm.re), format_rational(&norm.im)],
            "hermitian": format_rational(&herm.re),
        })),
        _ => {
            let mut s = String::from("psi\n");
            for z in &psi {
                s.push_str(&complex_text(z));
                s.push('\n');
            }
            s.push_str(&format!(
                "norm {}\nhermitian {}\n",
                complex_text(&norm),
                format_rational(&herm.re)
            ));
            s
        }
    })
}

fn describe(tag: &str, d: &MarkedPair) -> String {
    let m = d
        .picard()
        .map(|l| l.label().to_string())
        .unwrap_or_else(|| "0".into());
    format!(
        "{tag} picard {m} rank {}\n{tag} transcendental {} rank {}\n",
        d.picard_rank(),
        d.transcendental().label(),
        d.transcendental().rank()
    )
}

fn mirror(cli: &Cli, a: &MirrorArgs) -> Out {
    if cli.format == Format::Csv {
        return Err(ShellError::UnsupportedFormat("csv"));
    }
    let ambient = make_lattice(&a.ambient)?;
    let picard: Vec<usize> = serde_json::from_value(parse_json("picard", &a.picard)?)
        .map_err(|e| ShellError::Usage(format!("--picard {:?}: {e}", a.picard)))?;
    let data = MarkedPair::new(&ambient, picard, a.u)?;
    let once = mirror_swap(&data);
    let law = once.picard_rank() + data.picard_rank() == 20;
    Ok(match cli.format {
        Format::Json => json_text(&json!({
            "input": data.to_json(),
            "mirror": once.to_json(),
            "rank_law": law,
        })),
        _ => format!(
            "{}{}rank_law {law}\n",
            describe("input", &data),
            describe("mirror", &once)
        ),
    })
}

fn strategy_profile(
    lat: &Lattice,
    l: &LatticeVector,
    n: usize,
    s: StrategyArg,
) -> Result<CountProfile, CountError> {
    match s {
        StrategyArg::Auto => count_roots_with_degree(lat, l, n),
        StrategyArg::Theta => count_roots_with_strategy(lat, l, n, CountStrategy::Theta),
        StrategyArg::ShortVectors => {
            count_roots_with_strategy(lat, l, n, CountStrategy::ShortVectors)
        }
        StrategyArg::Direct => count_roots_with_strategy(lat, l, n, CountStrategy::Direct),
    }
}

fn count(cli: &Cli, a: &CountArgs) -> Out {
    let lat = make_lattice(&a.lattice)?;
    let l = parse_vector(&lat, "l", &a.l)?;
    let p = strategy_profile(&lat, &l, a.max_n, a.strategy)?;
    Ok(match cli.format {
        Format::Json => {
            let mut v = p.to_json();
            let c = lambert_coefficients(p.counts());
            v["c"] = json!(c[1..].iter().map(|x| x.to_string()).collect::<Vec<_>>());
            json_text(&v)
        }
        _ => p.to_csv(),
    })
}

fn series_out(cli: &Cli, s: &PowerSeries) -> String {
    match cli.format {
        Format::Json => json_text(&json!({
            "offset": format_rational(s.offset()),
            "order": s.order(),
            "coefficients": s.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })),
        _ => s.to_csv(),
    }
}

fn qseries(cli: &Cli, a: &QseriesArgs) -> Out {
    if a.order < 0 {
        return Err(CountError::NegativeTruncation(a.order).into());
    }
    if a.kind == SeriesKind::Euler {
        return Ok(series_out(cli, &euler_product(a.order)?));
    }
    let (Some(desc), Some(lt)) = (&a.lattice, &a.l) else {
        return Err(ShellError::Usage(
            "--kind product and log-derivative need --lattice and --l".into(),
        ));
    };
    let lat = make_lattice(desc)?;
    let l = parse_vector(&lat, "l", lt)?;
    let profile = count_roots_with_degree(&lat, &l, a.order as usize)?;
    let s = match a.kind {
        SeriesKind::Product => {
            let w = parse_rational(&a.weyl)
                .ok_or_else(|| ShellError::Usage(format!("--weyl {:?}", a.weyl)))?;
            product_expansion(&profile, &w)
        }
        _ => log_derivative_series(&profile),
    };
    Ok(series_out(cli, &s))
}

fn etadet(cli: &Cli, a: &EtadetArgs) -> Out {
    if cli.format == Format::Csv {
        return Err(ShellError::UnsupportedFormat("csv"));
    }
    let m = TorusModulus::new(Complex64::new(a.re, a.im))?;
    let r = torus_det(&m, cli.tol)?;
    Ok(match cli.format {
        Format::Json => json_text(&r.to_json()),
        _ => r.to_text(),
    })
}

fn assemble(cli: &Cli, a: &AssembleArgs) -> Out {
    if cli.format == Format::Csv {
        return Err(ShellError::UnsupportedFormat("csv"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let pt = load_point(&a.point, &mut rng, 3, 19)?;
    let phi = Complex64::new(a.phi_re, a.phi_im);
    let v = k3_det_assembly(&pt, |_| phi, a.constant)?;
    Ok(match cli.format {
        Format::Json => json_text(&json!({ "gram_det": sci(gram_det(&pt)), "value": sci(v) })),
        _ => format!("gram_det {}\nvalue {}\n", sci(gram_det(&pt)), sci(v)),
    })
}

#[cfg(test)]
mod tests {
    use super::super::run;

    fn ok(args: &[&str]) -> String {
        let mut full = vec!["k3kit"];
        full.extend_from_slice(args);
        let o = run(full);
        assert_eq!(o.code, 0, "{args:?}: {}", o.stderr);
        o.stdout
    }

    fn fails(args: &[&str]) -> (i32, String) {
        let mut full = vec!["k3kit"];
        full.extend_from_slice(args);
        let o = run(full);
        (o.code, o.stderr)
    }

    #[test]
    fn lattice_and_roots() {
        assert!(ok(&["lattice", "--lattice", "U+E8(-1)"]).contains("signature 1 9"));
        assert_eq!(
            ok(&["roots", "--lattice", "E8(-1)", "--norm", "-2"])
                .lines()
                .count(),
            240
        );
        assert_eq!(
            ok(&["roots", "--lattice", "U", "--bound", "3"])
                .lines()
                .count(),
            2
        );
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(fails(&["frobnicate"]).0, 2);
        assert_eq!(fails(&["roots", "--lattice", "U", "--bogus"]).0, 2);
        let (code, err) = fails(&["roots", "--lattice", "U", "--pair", "[1,"]);
        assert_eq!(code, 2);
        assert!(err.contains("--pair"));
    }

    #[test]
    fn domain_errors_exit_three() {
        let (code, err) = fails(&["lattice", "--lattice", "Q7"]);
        assert_eq!(code, 3);
        assert!(err.starts_with("ERROR MalformedDescriptor: "));
        let (code, err) = fails(&["etadet", "--im", "1", "--format", "csv"]);
        assert_eq!(code, 3);
        assert!(err.starts_with("ERROR UnsupportedFormat: "));
        let (code, err) = fails(&["etadet", "--im", "0"]);
        assert_eq!(code, 3);
        assert!(err.starts_with("ERROR LowerHalfPlane: "));
        let (code, err) = fails(&["qseries", "--order", "-1"]);
        assert_eq!(code, 3);
        assert!(err.starts_with("ERROR NegativeTruncation: "));
    }

    #[test]
    fn count_csv_header() {
        let out = ok(&[
            "count",
            "--lattice",
            "U+E8(-1)",
            "--l",
            "[1,1,0,0,0,0,0,0,0,0]",
            "--max-n",
            "3",
        ]);
        assert_eq!(out, "n,a_n,c_n\n1,480,480\n2,2640,5760\n3,13920,42240\n");
    }

    #[test]
    fn euler_series() {
        let out = ok(&["qseries", "--order", "7"]);
        assert_eq!(
            out,
            "exponent,coefficient\n1/24,1\n25/24,-1\n49/24,-1\n121/24,1\n169/24,1\n"
        );
    }

    #[test]
    fn mirror_and_tube() {
        let out = ok(&["mirror", "--picard", "[0,3]", "--u", "2"]);
        assert!(out.contains("mirror picard U+E8(-1) rank 10"));
        assert!(out.contains("rank_law true"));
        let out = ok(&["tube", "--lattice", "U", "--w", "[[0,1],[0,2]]"]);
        assert!(out.contains("norm 0 0"));
        assert!(out.contains("hermitian 8"));
    }
}
