//! Canonical text form of a series.
//!
//! Each term is `coeff*z1^a*z2^b*zb1^c*zb2^d*t^k` with zero exponents omitted
//! and `^1` dropped; terms are joined by `" + "` in storage order. Exact
//! coefficients print as `(p/q+r/t*i)` with `/1` omitted.

use super::series::{TVar, TruncatedSeries};

pub fn t_name(t: TVar) -> &'static str {
    match t {
        TVar::S => "s",
        TVar::W => "w",
        TVar::Tau => "wb",
    }
}

pub fn to_text(f: &TruncatedSeries) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let names = ["z1", "z2", "zb1", "zb2", t_name(f.tvar())];
    let mut parts = Vec::with_capacity(f.len());
    for (m, c) in f.terms() {
        let mut s = c.to_string();
        for (i, e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => {
                    s.push('*');
                    s.push_str(names[i]);
                }
                k => {
                    s.push('*');
                    s.push_str(names[i]);
                    s.push('^');
                    s.push_str(&k.to_string());
                }
            }
        }
        parts.push(s);
    }
    parts.join(" + ")
}
