pub mod quad;
pub mod special;
pub(crate) mod linalg;
