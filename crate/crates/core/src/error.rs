// Copyright 2026 The lcsim Developers
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Register size outside the supported range.
    #[error("size error: {0}")]
    Size(String),
    /// A gate or operator failed a structural check (unitarity, distinct targets).
    #[error("validity error: {0}")]
    Validity(String),
    /// Lengths or dimensions disagree.
    #[error("shape error: {0}")]
    Shape(String),
    /// Value outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index error: {0}")]
    Index(String),
    /// A confusion matrix is singular or too close to it.
    #[error("conditioning error: {0}")]
    Conditioning(String),
    /// Mixture weights do not sum to one.
    #[error("normalization error: {0}")]
    Normalization(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("integration error: {0}")]
    Integration(String),
    #[error("optimization error: {0}")]
    Optimization(String),
    #[error("tomography error: {0}")]
    Tomography(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable numeric code, shared with the C ABI.
    pub fn code(&self) -> i32 {
        match self {
            Error::Size(_) => 1,
            Error::Validity(_) => 2,
            Error::Shape(_) => 3,
            Error::Domain(_) => 4,
            Error::Index(_) => 5,
            Error::Conditioning(_) => 6,
            Error::Normalization(_) => 7,
            Error::Parse(_) => 8,
            Error::Integration(_) => 9,
            Error::Optimization(_) => 10,
            Error::Tomography(_) => 11,
            Error::Io(_) | Error::Csv(_) => 12,
        }
    }
}
