pub(crate) mod account;
pub(crate) mod evals;
pub(crate) mod research;
pub(crate) mod users;
