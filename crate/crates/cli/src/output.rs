use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use cmcrot_core::TracedCurve;
use serde::Serialize;

pub const CSV_HEADER: &str = "t,x,y,theta,lambda1,lambda2,lambda3,residual";

/// Opens `path` for writing, or stdout for `None` and `-`.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    match path {
        Some(p) if p != Path::new("-") => Ok(Box::new(BufWriter::new(File::create(p)?))),
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Writes the samples with 17 significant digits, so parsing the file back
/// reproduces every value exactly. `theta` is the unreduced angle.
pub fn write_csv(curve: &TracedCurve, out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for s in &curve.samples {
        let row = [
            s.t,
            s.state.x,
            s.state.y,
            s.state.theta,
            s.curvatures.lambda1,
            s.curvatures.lambda2,
            s.curvatures.lambda3,
            s.residual,
        ];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()
}

pub fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmcrot_core::{
        CurveSample, Direction, Params, PrincipalCurvatures, ProfileState, Provenance,
    };

    #[test]
    fn csv_round_trips_exactly() {
        let par = Params::new(2, 3, 1.0).unwrap();
        let mut c = TracedCurve::new(par, Provenance::Composed, Direction::Forward);
        for i in 0..50 {
            let t = f64::from(i) * 0.1 + 1.0 / 3.0;
            c.samples.push(CurveSample {
                t,
                state: ProfileState::new(t.sin().abs() + 1e-300, t.exp(), -7.0 * t),
                curvatures: PrincipalCurvatures {
                    lambda1: 1.0 / t,
                    lambda2: -t.sqrt(),
                    lambda3: f64::MIN_POSITIVE,
                },
                residual: -1e-17 * t,
            });
        }
        let mut buf = Vec::new();
        write_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for (line, s) in lines.zip(&c.samples) {
            let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            let want = [
                s.t,
                s.state.x,
                s.state.y,
                s.state.theta,
                s.curvatures.lambda1,
                s.curvatures.lambda2,
                s.curvatures.lambda3,
                s.residual,
            ];
            for (a, b) in v.iter().zip(want) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
