pub mod adapters;
pub mod corpus;
pub mod evaluation;
pub mod llm_gateway;
pub mod readability;
pub mod stats;
