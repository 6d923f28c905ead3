use std::fmt::Write as _;

use simop::verify::SpectrumReport;
use simop::weighted::WeightSequence;

use crate::error::CliError;

/// A named output file and its contents.
pub type Artifact = (String, String);

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Invariant(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Invariant(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invariant(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn spectrum_csv(r: &SpectrumReport) -> Result<Artifact, CliError> {
    let header = [
        "n",
        "slot",
        "lambda_re",
        "lambda_im",
        "estimate_re",
        "estimate_im",
        "oracle_re",
        "oracle_im",
        "b_re",
        "b_im",
        "residual",
        "ambiguous",
    ];
    let rows = r.rows.iter().map(|x| {
        vec![
            x.n.to_string(),
            x.slot.to_string(),
            x.lambda.re.to_string(),
            x.lambda.im.to_string(),
            x.estimate.re.to_string(),
            x.estimate.im.to_string(),
            x.oracle.re.to_string(),
            x.oracle.im.to_string(),
            x.b.re.to_string(),
            x.b.im.to_string(),
            x.residual.to_string(),
            x.ambiguous.to_string(),
        ]
    });
    Ok(("spectrum.csv".into(), csv_text(&header, rows)?))
}

/// `|b_n|` and, where the asymptotic terms are known, `|b_n - p_n - q_n|`.
pub fn b_decay_csv(r: &SpectrumReport) -> Result<Artifact, CliError> {
    let rows = r.rows.iter().filter(|x| x.slot == 0).map(|x| {
        let rest = match (x.p, x.q) {
            (Some(p), Some(q)) => (x.b - p - q).norm().to_string(),
            _ => String::new(),
        };
        vec![x.n.to_string(), x.b.norm().to_string(), rest]
    });
    Ok(("b_decay.csv".into(), csv_text(&["n", "b_abs", "remainder_abs"], rows)?))
}

/// One row per label with the raw row and column tails next to `alpha`.
pub fn alpha_csv(w: &WeightSequence) -> Result<Artifact, CliError> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let (row_tails, col_tails) = w.tails();
    let rows = w.rows().into_iter().map(|r| {
        let a = r.n.abs();
        vec![
            r.n.to_string(),
            r.alpha.to_string(),
            opt(r.alpha_prime),
            opt(r.alpha_tilde),
            opt(row_tails.get(&a).copied()),
            opt(col_tails.get(&a).copied()),
        ]
    });
    let header = ["n", "alpha", "alpha_prime", "alpha_tilde", "row_tail", "col_tail"];
    Ok(("alpha_decay.csv".into(), csv_text(&header, rows)?))
}

/// Free eigenvalues as open circles, oracle eigenvalues as filled dots.
pub fn spectrum_svg(r: &SpectrumReport) -> Artifact {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let pts: Vec<_> = r.rows.iter().flat_map(|x| [x.lambda, x.oracle]).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for z in &pts {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = |a: f64, b: f64| if b - a > 0.0 { b - a } else { 1.0 };
    let (sx, sy) = ((w - 2.0 * pad) / span(x0, x1), (h - 2.0 * pad) / span(y0, y1));
    let px = |re: f64| pad + (re - x0) * sx;
    let py = |im: f64| h - pad - (im - y0) * sy;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for x in &r.rows {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="none" stroke="gray"/>"#,
            px(x.lambda.re),
            py(x.lambda.im)
        );
        let _ =
            writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="2" fill="crimson"/>"#, px(x.oracle.re), py(x.oracle.im));
    }
    let _ = writeln!(
        s,
        r#"<text x="{pad}" y="20" font-size="12">Re / Im of free (circles) and computed (dots) eigenvalues</text>"#
    );
    s.push_str("</svg>\n");
    ("spectrum.svg".into(), s)
}
