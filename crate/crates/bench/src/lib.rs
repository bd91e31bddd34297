pub use spin_toolkit as core;
