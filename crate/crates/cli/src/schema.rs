pub const FIT: &str = include_str!("../schemas/fit.schema.json");
pub const DOF: &str = include_str!("../schemas/dof.schema.json");
pub const SELECT: &str = include_str!("../schemas/select.schema.json");
pub const COMPARE: &str = include_str!("../schemas/compare.schema.json");
pub const SIMULATE: &str = include_str!("../schemas/simulate.schema.json");
