#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace dr {

using Timestamp = std::chrono::sys_seconds;
using Clock = std::function<Timestamp()>;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_rfc3339(Timestamp t);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional "Z" or a
/// "+HH:MM"/"-HH:MM" offset. Throws dr::Error(kParse) otherwise.
Timestamp parse_rfc3339(std::string_view s);

int year_of(Timestamp t);

Clock system_clock();
Clock fixed_clock(Timestamp t);

}  // namespace dr
