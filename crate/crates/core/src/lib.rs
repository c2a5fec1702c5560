pub mod channels;
pub mod report;
pub mod specfun;
pub mod spectra;
