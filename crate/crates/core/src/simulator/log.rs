use std::io::{self, Write};

use crate::estimator::FrameOutput;
use crate::geometry::Quality;

pub const LOG_HEADER: &str = "t,v_ref_x,v_ref_y,vx_true,vy_true,vx_est,vy_est,h_true,h_est,flow_x,flow_y,div_x,div_y,n_x,n_y,quality";

/// Ground truth paired with one frame. NaN where unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truth {
    pub v_ref: (f64, f64),
    pub velocity: (f64, f64),
    pub height: f64,
}

impl Truth {
    pub const UNKNOWN: Truth = Truth {
        v_ref: (f64::NAN, f64::NAN),
        velocity: (f64::NAN, f64::NAN),
        height: f64::NAN,
    };
}

/// One tick of a simulation or replay log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub truth: Truth,
    pub v_est: (f64, f64),
    pub h_est: f64,
    pub flow: (f64, f64),
    pub divergence: (f64, f64),
    pub horizon: (usize, usize),
    pub quality: Quality,
}

impl LogRow {
    pub fn new(t: f64, truth: Truth, out: &FrameOutput) -> Self {
        Self {
            t,
            truth,
            v_est: (out.velocity.v_x, out.velocity.v_y),
            h_est: out.velocity.height,
            flow: (out.flow.flow_x, out.flow.flow_y),
            divergence: (out.flow.divergence_x, out.flow.divergence_y),
            horizon: (out.flow.horizon_x, out.flow.horizon_y),
            quality: out.velocity.quality,
        }
    }

    pub fn to_csv(&self) -> String {
        let f = [
            self.t,
            self.truth.v_ref.0,
            self.truth.v_ref.1,
            self.truth.velocity.0,
            self.truth.velocity.1,
            self.v_est.0,
            self.v_est.1,
            self.truth.height,
            self.h_est,
            self.flow.0,
            self.flow.1,
            self.divergence.0,
            self.divergence.1,
        ];
        let mut s: Vec<String> = f.iter().map(|&v| format_sig6(v)).collect();
        s.push(self.horizon.0.to_string());
        s.push(self.horizon.1.to_string());
        s.push(self.quality.to_string());
        s.join(",")
    }
}

pub fn write_log<W: Write>(mut out: W, rows: &[LogRow]) -> io::Result<()> {
    writeln!(out, "{LOG_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv())?;
    }
    out.flush()
}

/// Six significant digits, shortest form, like C's `%g`.
pub fn format_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_like_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1957, "0.1957"),
            (1.0 / 3.0, "0.333333"),
            (123456.7, "123457"),
            (1234567.0, "1.23457e6"),
            (0.000012345678, "1.23457e-5"),
            (0.00012345678, "0.000123457"),
            (-0.0, "0"),
            (f64::NAN, "nan"),
            (f64::NEG_INFINITY, "-inf"),
            (999999.6, "1e6"),
        ];
        for (v, want) in cases {
            assert_eq!(format_sig6(v), want, "{v}");
        }
    }

    #[test]
    fn header_has_sixteen_columns() {
        assert_eq!(LOG_HEADER.split(',').count(), 16);
    }
}
