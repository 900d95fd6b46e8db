use serde::Serialize;

/// Top-level CLI failure, carrying the exit-code category and the message
/// emitted in the machine-readable error document.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or command usage.
    Config(String),
    /// Filesystem problem while reading configs or writing outputs.
    Io(String),
    /// Numerical failure: singular parameters, solver breakdown, blow-up.
    Numeric(String),
    /// A verification subcommand found a mismatch beyond tolerance.
    Verification(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Numeric(_) => "numeric",
            CliError::Verification(_) => "verification",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Io(m)
            | CliError::Numeric(m)
            | CliError::Verification(m) => m,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    /// One-line JSON document describing the failure, written to stderr.
    pub fn document(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            error: Body<'a>,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: &'a str,
        }
        serde_json::to_string(&Doc {
            error: Body {
                kind: self.kind(),
                message: self.message(),
            },
        })
        .expect("error document serialization cannot fail")
    }
}

impl From<ncphase::Error> for CliError {
    fn from(err: ncphase::Error) -> Self {
        match err {
            ncphase::Error::SingularParameters(_)
            | ncphase::Error::ImplicitSolveFailed { .. }
            | ncphase::Error::NonFiniteValue { .. } => CliError::Numeric(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_category() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 1);
        assert_eq!(CliError::Io("x".into()).exit_code(), 1);
        assert_eq!(CliError::Numeric("x".into()).exit_code(), 2);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 3);
    }

    #[test]
    fn document_is_json_with_kind_and_message() {
        let doc = CliError::Numeric("bad value".into()).document();
        let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(parsed["error"]["kind"], "numeric");
        assert_eq!(parsed["error"]["message"], "bad value");
    }

    #[test]
    fn singular_parameters_map_to_numeric() {
        let err = CliError::from(ncphase::Error::SingularParameters(0.0));
        assert_eq!(err.kind(), "numeric");
    }

    #[test]
    fn domain_validation_maps_to_config() {
        let err = CliError::from(ncphase::Error::InvalidMass(-1.0));
        assert_eq!(err.kind(), "config");
    }
}
