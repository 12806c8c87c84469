//! File formats, configuration, reports and the command-line front end for
//! [`gridcheck_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod edgelist;
pub mod report;
