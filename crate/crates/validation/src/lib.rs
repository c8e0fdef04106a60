//! Holds the `acceptance` test target, which runs the end-to-end checks
//! after the other workspace packages have been tested.
