use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported security level: {0} bits")]
    UnsupportedSecurity(u32),
    #[error("invalid group parameters: {0}")]
    InvalidGroup(&'static str),
    #[error("invalid group element")]
    InvalidGroupElement,
    #[error("scalar must be nonzero modulo the group order")]
    ZeroScalar,
    #[error("prime generation failed after {0} candidates")]
    PrimeGeneration(usize),
    #[error("plaintext does not fit below the Paillier modulus")]
    PlaintextOutOfRange,
    #[error("invalid Paillier ciphertext")]
    InvalidCiphertext,
    #[error("partial decryption keys must come from different shares")]
    MatchingShareIndex,
    #[error("partial decryption does not complete to a valid plaintext")]
    InvalidPartial,
    #[error("object authentication failed")]
    AuthenticationFailed,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("point ({x}, {y}) lies outside the grid bounding box")]
    OutsideBox { x: f64, y: f64 },
    #[error("value {value} out of range for {bits}-bit grid")]
    OutOfRange { value: u64, bits: u8 },
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("malformed prefix string {0:?}")]
    MalformedPrefix(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid packing: {0}")]
    InvalidPacking(&'static str),
    #[error("slot overflow while decoding chunk {chunk}; index redistribution required")]
    SlotOverflow { chunk: usize },
    #[error("duplicate label in encrypted index")]
    DuplicateLabel,
    #[error("prefix universe of {0} bits is too large to index")]
    UniverseTooLarge(u8),
    #[error("invalid object: {0}")]
    InvalidObject(String),
    #[error("update token addresses position absent from the masked view")]
    UnmatchedAddress,
    #[error("redistribution references term {0} which has no resolved entry")]
    UnresolvedTerm(usize),
    #[error("epoch mismatch: expected {expected}, got {got}")]
    EpochMismatch { expected: u64, got: u64 },
    #[error("wire decode error: {0}")]
    Decode(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
