pub mod colmez;
pub mod digitsum;
pub mod fermat;
pub mod report;
pub mod series;
pub mod tower;
pub mod valuation;
