use std::fmt;
use std::process::ExitCode;

/// Failure category, mapped to a distinct process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Io,
    Codec,
    Solver,
}

impl Category {
    pub fn code(self) -> u8 {
        match self {
            Self::Usage => 2,
            Self::Io => 3,
            Self::Codec => 4,
            Self::Solver => 5,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub category: Category,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // library errors often embed their source in their own message
        let mut text = String::new();
        for cause in self.error.chain() {
            let msg = cause.to_string();
            if !text.contains(&msg) {
                if !text.is_empty() {
                    text.push_str(": ");
                }
                text.push_str(&msg);
            }
        }
        f.write_str(&text)
    }
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Self {
            category: Category::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.category.code())
    }
}

pub trait Categorize<T> {
    fn or_fail(self, category: Category) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Categorize<T> for Result<T, E> {
    fn or_fail(self, category: Category) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            category,
            error: e.into(),
        })
    }
}
