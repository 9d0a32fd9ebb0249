use std::fmt::Write as _;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shortest representation that parses back to the same bits.
pub(crate) fn push_f64(out: &mut String, x: f64) {
    write!(out, "{x:?}").unwrap();
}

pub(crate) fn join_f64(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        push_f64(&mut out, v);
    }
    out
}

pub(crate) fn parse_f64s<'a>(
    fields: impl Iterator<Item = &'a str>,
    source: &str,
    line: usize,
) -> crate::Result<Vec<f64>> {
    fields
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| crate::Error::format(source, line, format!("invalid number {f:?}")))
        })
        .collect()
}
