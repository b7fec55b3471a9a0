//! Small helpers shared by the Graphviz exporters.

/// Quotes a string as a DOT identifier.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

const SHADES: [&str; 8] = [
    "gray90", "gray80", "gray70", "gray60", "lightblue", "lightpink", "palegreen", "khaki",
];

/// Fill colour for a membrane, so co-located nodes share a shade.
pub fn locality_color(membrane: usize) -> &'static str {
    SHADES[membrane.saturating_sub(1) % SHADES.len()]
}
