#pragma once

#include <stdexcept>

namespace mspline {

// Malformed or inconsistent input data (files, manifests, shape mismatches
// discovered while reading).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure could not complete (singular system, failed
// factorization, ill-conditioned operator).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mspline
