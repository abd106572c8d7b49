pub mod aspif;
pub mod assumption;
pub mod cli;
pub mod constraint;
pub mod egraph;
pub mod node;
pub mod oracle;
pub mod pipeline;
pub mod program;
pub mod render;
pub mod support;
