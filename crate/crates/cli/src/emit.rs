use std::path::Path;

use crate::error::CmdError;

/// 17 significant digits: enough for a bit-exact f64 round trip.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// Write a finished artifact, refusing to clobber unless asked.
pub fn write_artifact(path: &Path, content: &str, overwrite: bool) -> Result<(), CmdError> {
    if path.exists() && !overwrite {
        return Err(CmdError::Config(format!(
            "{} exists; pass --overwrite to replace it",
            path.display()
        )));
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| CmdError::Resource(format!("mkdir {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CmdError::Resource(format!("write {}: {e}", path.display())))
}

/// Assemble a CSV: `#`-prefixed header comments, a column row, data rows.
pub fn csv(comments: &[&str], columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in comments {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 485165195.40979028, 1e-300] {
            let s = fmt_f(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_shape() {
        let text = csv(
            &["one comment"],
            &["a", "b"],
            &[vec!["1".into(), "2".into()]],
        );
        assert_eq!(text, "# one comment\na,b\n1,2\n");
    }
}
