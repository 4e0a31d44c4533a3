use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Input(String),

    #[error("graph is disconnected: {0} cannot reach {1}")]
    Disconnected(String, String),

    #[error("graph splits into {} components: {}", .0.len(), list_components(.0))]
    Components(Vec<Vec<String>>),

    #[error("unknown point id `{0}`")]
    UnknownPoint(String),

    #[error("empty subset")]
    EmptySubset,

    #[error("{what}: {n} points exceeds the exact-solver cap of {cap}; use greedy/heuristic mode")]
    OverCap { what: &'static str, n: usize, cap: usize },

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("missing measure on space `{0}`")]
    MissingMeasure(String),

    #[error("missing basepoint on space `{0}`")]
    MissingBasepoint(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn list_components(comps: &[Vec<String>]) -> String {
    comps
        .iter()
        .map(|c| {
            let head: Vec<&str> = c.iter().take(4).map(String::as_str).collect();
            let more = if c.len() > 4 { format!(", … ({} total)", c.len()) } else { String::new() };
            format!("[{}{more}]", head.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}
