use std::fmt::Display;

/// Ordered key/value lines plus free-form blocks, rendered either as
/// `key=value` (porcelain) or as an aligned human-readable listing.
#[derive(Debug, Default)]
pub struct Report {
    entries: Vec<Entry>,
}

#[derive(Debug)]
enum Entry {
    Field(String, String),
    Block(String, String),
}

impl Report {
    pub fn field(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.entries.push(Entry::Field(key.into(), value.to_string()));
        self
    }

    /// A multi-line block printed verbatim under a `[title]` header.
    pub fn block(&mut self, title: impl Into<String>, body: impl Into<String>) -> &mut Self {
        self.entries.push(Entry::Block(title.into(), body.into()));
        self
    }

    pub fn render(&self, porcelain: bool) -> String {
        let width = self
            .entries
            .iter()
            .filter_map(|e| match e {
                Entry::Field(k, _) => Some(k.len()),
                Entry::Block(..) => None,
            })
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for entry in &self.entries {
            match entry {
                Entry::Field(k, v) if porcelain => out.push_str(&format!("{k}={v}\n")),
                Entry::Field(k, v) => out.push_str(&format!("{k:<width$}  {v}\n")),
                Entry::Block(title, body) => {
                    out.push_str(&format!("[{title}]\n"));
                    out.push_str(body);
                    if !body.is_empty() && !body.ends_with('\n') {
                        out.push('\n');
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_both_forms() {
        let mut r = Report::default();
        r.field("n", 4).field("classification", "achievable").block("scenario", "f=1");
        assert_eq!(r.render(true), "n=4\nclassification=achievable\n[scenario]\nf=1\n");
        assert_eq!(
            r.render(false),
            "n               4\nclassification  achievable\n[scenario]\nf=1\n"
        );
    }
}
