use std::path::Path;

use needle_core::Error;
use serde_json::json;

pub enum CliError {
    Core(Error),
    Usage(String),
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 2 for invalid input, 3 for a solver or integrator that gave up,
    /// 4 for file system trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                Error::NotConverged(_)
                | Error::StepUnderflow(_)
                | Error::DegenerateIterate { .. }
                | Error::OrderingBreached { .. }
                | Error::QuadratureFailed { .. } => 3,
                _ => 2,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Io { .. } => "Io",
            CliError::Core(e) => match e {
                Error::InvalidCount(_) => "InvalidCount",
                Error::EndpointNotPinned { .. } => "EndpointNotPinned",
                Error::OutOfRange { .. } => "OutOfRange",
                Error::OrderViolation { .. } => "OrderViolation",
                Error::IndexOutOfRange { .. } => "IndexOutOfRange",
                Error::NotConverged(_) => "NotConverged",
                Error::StepUnderflow(_) => "StepUnderflow",
                Error::DegenerateIterate { .. } => "DegenerateIterate",
                Error::OrderingBreached { .. } => "OrderingBreached",
                Error::InvalidSpec(_) => "InvalidSpec",
                Error::InsufficientSamples(_) => "InsufficientSamples",
                Error::CountNotDyadic { .. } => "CountNotDyadic",
                Error::ResolutionTooCoarse { .. } => "ResolutionTooCoarse",
                Error::InvalidDyadic { .. } => "InvalidDyadic",
                Error::PointOnCharge { .. } => "PointOnCharge",
                Error::PointOnNeedle => "PointOnNeedle",
                Error::Endpoint(_) => "Endpoint",
                Error::DomainViolation(_) => "DomainViolation",
                Error::NonpositiveArgument(_) => "NonpositiveArgument",
                Error::QuadratureFailed { .. } => "QuadratureFailed",
                Error::Parse(_) => "Parse",
            },
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> String {
        let message = match self {
            CliError::Core(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
            CliError::Io { path, source } => format!("{path}: {source}"),
        };
        let mut value = json!({ "error": self.kind(), "message": message, "exit_code": self.exit_code() });
        if let CliError::Core(Error::NotConverged(r) | Error::StepUnderflow(r)) = self {
            value["residual"] = json!(r.residual);
            value["iterations"] = json!(r.iterations);
        }
        value.to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
