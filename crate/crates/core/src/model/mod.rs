//! Event data model: dimension hierarchies, events, event databases and the
//! operations that project them onto fixed spatio-temporal scales.

mod database;
mod geo;
mod hierarchy;
mod scale;
mod temporal;

pub use database::{
    read_event_records, DomainValue, Event, EventDatabase, EventRecord, Hierarchies, Level, Report,
};
pub(crate) use database::{parse_iso_day_interval, sort_reports};
pub use geo::{geo_distance, haversine_km, Centroid, EARTH_RADIUS_KM};
pub use hierarchy::{AdminLevel, Dimension, Hierarchy, Node, NodeId, NodeSpec};
pub use scale::{
    fix_scale, Filter, ScaledEventDatabase, Selection, SpatialLevel, Transaction,
};
pub use temporal::{DayInterval, TemporalScale, TimeInterval};
