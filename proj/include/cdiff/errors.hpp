#ifndef CDIFF_ERRORS_HPP
#define CDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cdiff {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Evaluation point outside the model or transform domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid or out-of-range parameter vector.
class ParamError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public Error {
public:
    using Error::Error;
};

/// Stationarity normalizer diverges for the given parameters.
class NonStationaryError : public Error {
public:
    using Error::Error;
};

/// Root finding or quantile inversion exceeded its iteration cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Bessel evaluation left the representable range even in log space.
class BesselOverflowError : public Error {
public:
    using Error::Error;
};

/// A derivative of the transformation is not available for its provenance.
class DerivativeError : public Error {
public:
    using Error::Error;
};

/// Nonpositive or otherwise unusable bandwidth.
class BandwidthError : public Error {
public:
    using Error::Error;
};

/// Sample has zero variance or is otherwise degenerate.
class DegenerateSampleError : public Error {
public:
    using Error::Error;
};

/// Optimizer failed across all restarts.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// Likelihood evaluated to a non-finite value at a data point.
class NonFiniteLikelihoodError : public Error {
public:
    explicit NonFiniteLikelihoodError(const std::string& msg, long index = -1)
        : Error(msg), offending_index(index) {}
    long offending_index;
};

/// Numerical Hessian is singular; no sandwich standard errors.
class SingularHessianError : public Error {
public:
    using Error::Error;
};

/// Candidate parametric transform is non-monotone on the data range.
class MonotonicityError : public Error {
public:
    using Error::Error;
};

/// Euler simulation reflected at the domain boundary too often.
class DomainEscapeError : public Error {
public:
    using Error::Error;
};

/// Malformed input data (CSV parse and similar).
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace cdiff

#endif  // CDIFF_ERRORS_HPP
