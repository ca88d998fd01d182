#ifndef TDLM_BASE_HPP_
#define TDLM_BASE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

// The core library is built at two precisions. The default build stores
// parameters and activations as 32-bit floats; the TDLM_REAL_DOUBLE build
// exists for gradient verification. Each precision lives in its own inline
// namespace so both can be linked into one test binary.
#ifdef TDLM_REAL_DOUBLE
#define TDLM_PRECISION_NS f64
#else
#define TDLM_PRECISION_NS f32
#endif

#define TDLM_NAMESPACE_BEGIN \
  namespace tdlm {           \
  inline namespace TDLM_PRECISION_NS {
#define TDLM_NAMESPACE_END \
  }                        \
  }

TDLM_NAMESPACE_BEGIN

#ifdef TDLM_REAL_DOUBLE
using Real = double;
#else
using Real = float;
#endif

using TokenId = std::int32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

// Raised when a training loss becomes non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

TDLM_NAMESPACE_END

#endif  // TDLM_BASE_HPP_
