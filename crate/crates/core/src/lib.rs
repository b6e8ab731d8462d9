pub mod ablation;
pub mod corpus;
pub mod finetune;
pub mod http;
pub mod metrics;
pub mod mtclient;
mod pool;
pub mod report;
pub mod synthetic;
pub mod zeroshot;
