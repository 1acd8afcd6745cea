//! Dense double-precision tensors with a reverse-mode tape and Adam.

mod adam;
mod container;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamState, Parameter};
pub use container::{read_tensors, write_tensors, MAGIC};
pub use tape::{Grads, Groups, Tape, Var};
pub use tensor::Tensor;
