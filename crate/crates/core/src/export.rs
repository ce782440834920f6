//! CSV writers for sweep results and pathloss distribution datasets.
//!
//! Output stays plain and diff-friendly: one header line, LF endings,
//! floats printed with six significant digits (positional for moderate
//! magnitudes, compact scientific otherwise), missing ratios as `na`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::kpi::{CdfDataset, PrrReport};
use crate::sweep::SweepOutput;

/// File name of the sweep result table inside the output directory.
pub const PRR_CSV_NAME: &str = "prr_results.csv";

/// Formats a float with six significant digits: positional notation while
/// the exponent stays in `[-4, 6)`, otherwise compact scientific
/// (`5e6`, `1.5e-7`); trailing zeros are trimmed either way.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponential form");
    let exp: i32 = exp.parse().expect("numeric exponent");
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 6);
    let mut out = String::new();
    if mant.starts_with('-') {
        out.push('-');
    }
    if (-4..6).contains(&exp) {
        if exp >= 0 {
            let point = exp as usize + 1;
            out.push_str(&digits[..point]);
            let frac = digits[point..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        } else {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits.trim_end_matches('0'));
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push_str(&exp.to_string());
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_g6).unwrap_or_else(|| "na".to_string())
}

/// Writes the sweep result table as `prr_results.csv` under `out_dir`
/// (created if needed). One row per sweep cell, in sweep order; an
/// infeasible cell carries `mcs_index` -1.
pub fn write_prr_csv(out_dir: &Path, reports: &[PrrReport]) -> io::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(PRR_CSV_NAME);
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(
        w,
        "model,bandwidth_hz,ivd_m,mcs_index,required_se,prr,per_tx_prr,n_drops,seed"
    )?;
    for r in reports {
        let mcs_index = r.mcs.map(|m| i64::from(m.index)).unwrap_or(-1);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.model.tag(),
            fmt_g6(r.bandwidth_hz),
            fmt_g6(r.ivd_m),
            mcs_index,
            fmt_g6(r.required_se),
            fmt_opt(r.prr),
            fmt_opt(r.per_tx_prr),
            r.n_drops,
            r.seed
        )?;
    }
    w.flush()?;
    Ok(path)
}

/// Base file name (without extension) for one CDF dataset:
/// `cdf_<model>_<shadow|noshadow>`.
pub fn cdf_basename(ds: &CdfDataset) -> String {
    format!(
        "cdf_{}_{}",
        ds.spec.model.tag(),
        if ds.spec.shadowing {
            "shadow"
        } else {
            "noshadow"
        }
    )
}

/// Writes one dataset as two files under `out_dir`: `<base>.csv` with the
/// grid-order samples (`distance_m,loss_db`) and `<base>_points.csv` with
/// the sorted distribution (`loss_db,probability`). Returns both paths.
pub fn write_cdf_csv(out_dir: &Path, ds: &CdfDataset) -> io::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir)?;
    let base = cdf_basename(ds);

    let samples_path = out_dir.join(format!("{base}.csv"));
    let mut w = BufWriter::new(fs::File::create(&samples_path)?);
    writeln!(w, "distance_m,loss_db")?;
    for s in &ds.samples {
        writeln!(w, "{},{}", fmt_g6(s.distance_m), fmt_g6(s.loss_db))?;
    }
    w.flush()?;

    let points_path = out_dir.join(format!("{base}_points.csv"));
    let mut w = BufWriter::new(fs::File::create(&points_path)?);
    writeln!(w, "loss_db,probability")?;
    for p in &ds.points {
        writeln!(w, "{},{}", fmt_g6(p.loss_db), fmt_g6(p.probability))?;
    }
    w.flush()?;

    Ok((samples_path, points_path))
}

/// Writes everything a run produced: the PRR table (when any report
/// exists) and both files of every CDF dataset. Returns the created paths
/// in write order.
pub fn write_all(out_dir: &Path, output: &SweepOutput) -> io::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    if !output.reports.is_empty() {
        paths.push(write_prr_csv(out_dir, &output.reports)?);
    }
    for ds in &output.datasets {
        let (samples, points) = write_cdf_csv(out_dir, ds)?;
        paths.push(samples);
        paths.push(points);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelModelKind, LosState};
    use crate::kpi::{CdfPoint, CdfSample, CdfSpec, GridSpacing};
    use crate::phy::McsEntry;

    #[test]
    fn six_significant_digits_positional_and_scientific() {
        for (v, want) in [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1000.0, "1000"),
            (0.1696, "0.1696"),
            (3.0528, "3.0528"),
            (5e6, "5e6"),
            (6e6, "6e6"),
            (8e6, "8e6"),
            (10e6, "1e7"),
            (1e-5, "1e-5"),
            (-1.5e-7, "-1.5e-7"),
            (0.00012345, "0.00012345"),
            (87.864_823_454_726_26, "87.8648"),
            (-98.010_299_956_639_81, "-98.0103"),
            (123456.7, "123457"),
            (999999.0, "999999"),
            (0.5, "0.5"),
            (112.956_349_637_772_75, "112.956"),
        ] {
            assert_eq!(fmt_g6(v), want, "formatting {v}");
        }
    }

    #[test]
    fn non_finite_values_have_stable_spellings() {
        assert_eq!(fmt_g6(f64::NAN), "nan");
        assert_eq!(fmt_g6(f64::INFINITY), "inf");
        assert_eq!(fmt_g6(f64::NEG_INFINITY), "-inf");
    }

    fn report(prr: Option<f64>, mcs: Option<McsEntry>) -> PrrReport {
        PrrReport {
            model: ChannelModelKind::TwoRay,
            bandwidth_hz: 5e6,
            ivd_m: 10.0,
            n_ues: 1800,
            required_se: 6.1056,
            mcs,
            prr,
            per_tx_prr: prr,
            per_drop_prr: Vec::new(),
            n_drops: 100,
            seed: 1,
            clamped_links: 0,
        }
    }

    #[test]
    fn prr_rows_match_the_documented_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mcs = McsEntry {
            index: 4,
            se_bps_hz: 2.41,
            sinr_threshold_db: 9.4,
        };
        let reports = vec![
            report(Some(0.75), Some(mcs)),
            report(None, Some(mcs)),
            report(Some(0.0), None), // infeasible cell
        ];
        let path = write_prr_csv(dir.path(), &reports).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "model,bandwidth_hz,ivd_m,mcs_index,required_se,prr,per_tx_prr,n_drops,seed"
        );
        assert_eq!(lines[1], "two_ray,5e6,10,4,6.1056,0.75,0.75,100,1");
        assert_eq!(lines[2], "two_ray,5e6,10,4,6.1056,na,na,100,1");
        assert_eq!(lines[3], "two_ray,5e6,10,-1,6.1056,0,0,100,1");
        assert!(!text.contains('\r'), "line endings must be LF");
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn cdf_files_carry_samples_and_sorted_points() {
        let dir = tempfile::tempdir().unwrap();
        let ds = CdfDataset {
            spec: CdfSpec {
                model: ChannelModelKind::WinnerD1,
                los_state: LosState::Nlos,
                d_min_m: 1.0,
                d_max_m: 2.0,
                n_samples: 2,
                spacing: GridSpacing::Linear,
                shadowing: true,
                seed: 1,
            },
            samples: vec![
                CdfSample {
                    distance_m: 1.0,
                    loss_db: 101.25,
                },
                CdfSample {
                    distance_m: 2.0,
                    loss_db: 99.5,
                },
            ],
            points: vec![
                CdfPoint {
                    loss_db: 99.5,
                    probability: 0.5,
                },
                CdfPoint {
                    loss_db: 101.25,
                    probability: 1.0,
                },
            ],
            clamped: 2,
        };
        let (samples, points) = write_cdf_csv(dir.path(), &ds).unwrap();
        assert!(samples.ends_with("cdf_winner_d1_shadow.csv"));
        assert!(points.ends_with("cdf_winner_d1_shadow_points.csv"));
        let text = std::fs::read_to_string(&samples).unwrap();
        assert_eq!(text, "distance_m,loss_db\n1,101.25\n2,99.5\n");
        let text = std::fs::read_to_string(&points).unwrap();
        assert_eq!(text, "loss_db,probability\n99.5,0.5\n101.25,1\n");
    }

    #[test]
    fn writer_creates_missing_output_directories() {
        let dir = tempfile::tempdir().unwrap();
        let nested = dir.path().join("a").join("b");
        let path = write_prr_csv(&nested, &[]).unwrap();
        assert!(path.exists());
    }
}
