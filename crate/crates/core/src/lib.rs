pub mod analysis;
pub mod crypto;
pub mod ecqv;
pub mod protocol;
pub mod transport;
