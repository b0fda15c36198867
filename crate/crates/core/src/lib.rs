pub mod dl;
pub mod encode;
pub mod error;
pub mod gen;
pub mod instance;
pub mod model;
pub mod objective;
pub mod preprocess;
pub mod search;
pub mod solution;
pub mod term;
pub mod validator;

pub use error::{DiffError, EncodeError, OracleError, ParseError, PreprocessError, SolutionError};
pub use instance::{
    parse_instance, serialize_instance, validate_instance, CollisionFreePoint, Connection, Edge,
    Instance, Network, Node, ObjectiveData, ResourceId, Threshold, TrainId, TrainLine, Violation,
};
pub use term::Term;
