#ifndef TDLM_TESTS_ACCEPTANCE_OUTCOME_HPP_
#define TDLM_TESTS_ACCEPTANCE_OUTCOME_HPP_

#include <cstdarg>
#include <cstdio>
#include <string>

// Precision-neutral: included by both the float and the double translation
// units of the acceptance binary.
namespace acceptance {

struct Outcome {
  bool passed = false;
  std::string detail;
};

inline std::string strf(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

// Defined in the double-precision translation unit.
Outcome gradient_integrity();

}  // namespace acceptance

#endif  // TDLM_TESTS_ACCEPTANCE_OUTCOME_HPP_
