//! Bundled test networks. The same files live under `cases/` in the
//! repository root for use with the command-line tool.

use crate::{parse_case, Network};

pub const TWO_BUS: &str = include_str!("../../../cases/two_bus.case");
pub const FIVE_BUS_TWO_REGION: &str = include_str!("../../../cases/five_bus_two_region.case");
pub const FIFTEEN_BUS_THREE_REGION: &str = include_str!("../../../cases/fifteen_bus_three_region.case");
pub const AC_DC_TWO_REGION: &str = include_str!("../../../cases/ac_dc_two_region.case");
pub const NINE_BUS: &str = include_str!("../../../cases/nine_bus.case");

fn load(text: &str) -> Network {
    parse_case(text).expect("bundled case file is valid")
}

pub fn two_bus() -> Network {
    load(TWO_BUS)
}

pub fn five_bus_two_region() -> Network {
    load(FIVE_BUS_TWO_REGION)
}

pub fn fifteen_bus_three_region() -> Network {
    load(FIFTEEN_BUS_THREE_REGION)
}

pub fn ac_dc_two_region() -> Network {
    load(AC_DC_TWO_REGION)
}

pub fn nine_bus() -> Network {
    load(NINE_BUS)
}
