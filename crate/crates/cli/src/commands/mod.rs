pub mod evaluate;
pub mod gradcheck;
pub mod ingest;
pub mod predict;
pub mod report;
pub mod train;
