//! Core of a multimodal quantum NLP pipeline.
//!
//! Sentences are parsed with a small lexicon-driven SVO grammar and turned into
//! monoidal string diagrams under one of five compositional readers. Image
//! feature vectors enter the same diagram as fixed-parameter state boxes, and a
//! trainable comparison box merges everything into a single measured qubit.
//! Diagrams compile to parameterized circuits that are simulated on a dense
//! statevector and trained with SPSA against binary cross-entropy.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel batch
//! evaluation and the command line live in the companion `mqnlp` crate.

#![no_std]

extern crate alloc;

pub mod circuit;
pub mod data;
pub mod diagram;
pub mod multimodal;
pub mod readers;
pub mod sim;
pub mod training;

pub(crate) mod math {
    //! Thin wrappers so call sites read like `std` float methods.

    #[inline]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
}
