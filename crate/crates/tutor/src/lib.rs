//! Exercise files, tutoring sessions, the event log and the HTTP service
//! built on `logic-tutor-core`.

pub mod cli;
pub mod config;
pub mod engine;
pub mod exercise;
pub mod latex;
pub mod log;
pub mod messages;
pub mod service;
pub mod session;
pub mod stats;
