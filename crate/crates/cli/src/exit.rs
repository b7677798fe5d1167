use rdfmem::{DatasetError, EntailError, ModelError, NormalizeError, RdfError};

pub const PARSE: u8 = 2;
pub const TRUNCATED: u8 = 3;
pub const CAPACITY: u8 = 4;
pub const OTHER: u8 = 1;

/// Exit status for the first recognised cause in the error chain.
pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<RdfError>() {
            if matches!(e, RdfError::Malformed(_)) {
                return PARSE;
            }
        }
        if cause.downcast_ref::<EntailError>().is_some() {
            return TRUNCATED;
        }
        if let Some(e) = cause.downcast_ref::<NormalizeError>() {
            if matches!(e, NormalizeError::VocabularyOverflow { .. }) {
                return CAPACITY;
            }
        }
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            if matches!(e, ModelError::CapacityExceeded { .. }) {
                return CAPACITY;
            }
        }
        if let Some(e) = cause.downcast_ref::<DatasetError>() {
            match e {
                DatasetError::Corrupt { .. } => return PARSE,
                DatasetError::Entail(_) => return TRUNCATED,
                DatasetError::Normalize(NormalizeError::VocabularyOverflow { .. }) => return CAPACITY,
                _ => {}
            }
        }
    }
    OTHER
}
