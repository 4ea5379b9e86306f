#ifndef PAIRWISE_EM_ERRORS_HPP
#define PAIRWISE_EM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pairwise_em {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A vector or matrix has the wrong size (d < 2, mismatched lengths, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A scalar parameter is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// An input violates a structural invariant (asymmetric matrix, vector off the hyperplane).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// The noise level is too small for the tanh-weighted operators; use the sign-based AM step.
class SigmaTooSmall : public Error {
public:
    using Error::Error;
};

/// The leading eigenvalue of the double-centred distance matrix is not positive.
class SpectralDegenerate : public Error {
public:
    using Error::Error;
};

/// File or stream failure, message carries the path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace pairwise_em

#endif // PAIRWISE_EM_ERRORS_HPP
