/// Output equality after stripping trailing whitespace from each line and
/// dropping trailing blank lines on both sides.
pub fn compare_output(expected: &str, actual: &str) -> bool {
    normalize(expected).eq(normalize(actual))
}

fn normalize(text: &str) -> impl Iterator<Item = &str> {
    let lines: Vec<&str> = text.lines().map(str::trim_end).collect();
    let keep = lines.iter().rposition(|l| !l.is_empty()).map_or(0, |i| i + 1);
    lines.into_iter().take(keep)
}
