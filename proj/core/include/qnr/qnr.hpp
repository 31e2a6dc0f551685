#pragma once

#include "qnr/empirical.hpp"
#include "qnr/errors.hpp"
#include "qnr/pattern_search.hpp"
#include "qnr/primes.hpp"
#include "qnr/quadratic.hpp"
#include "qnr/series.hpp"

namespace qnr {

#ifdef QNR_VERSION_STRING
inline constexpr const char* kVersion = QNR_VERSION_STRING;
#else
inline constexpr const char* kVersion = "unknown";
#endif

} // namespace qnr
