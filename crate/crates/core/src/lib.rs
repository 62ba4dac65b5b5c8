pub mod bench;
pub mod cdcl;
pub mod cutting_planes;
pub mod logging;
pub mod pb;
pub mod proof_io;
pub mod propagation;
pub mod redundancy;
pub mod verifier;
pub mod xor;
