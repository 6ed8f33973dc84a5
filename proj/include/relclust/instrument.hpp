#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

namespace relclust {

// Run-wide instrumentation.  `tuples_touched` counts base-relation tuple
// accesses (rows examined by filters, counting passes and sample descents);
// it is the witness that no operation ever does join-result-sized work.
struct Counters {
    std::uint64_t tuples_touched = 0;
    std::uint64_t rect_queries = 0;
    std::uint64_t counting_passes = 0;
    std::uint64_t samples_drawn = 0;

    void reset() { *this = Counters{}; }
};

// Minimal stderr logger gated by the RELCLUST_LOG env var (off|info|debug).
enum class LogLevel { Off = 0, Info = 1, Debug = 2 };

inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* v = std::getenv("RELCLUST_LOG");
        if (!v) return LogLevel::Off;
        std::string s(v);
        if (s == "debug") return LogLevel::Debug;
        if (s == "info") return LogLevel::Info;
        return LogLevel::Off;
    }();
    return lvl;
}

#define RELCLUST_LOG_AT(lvl, tag, expr)                                   \
    do {                                                                  \
        if (static_cast<int>(::relclust::log_level()) >=                  \
            static_cast<int>(lvl)) {                                      \
            std::ostringstream os_;                                       \
            os_ << "[" tag "] " << expr << "\n";                          \
            std::cerr << os_.str();                                       \
        }                                                                 \
    } while (0)

#define RELCLUST_INFO(tag, expr) RELCLUST_LOG_AT(::relclust::LogLevel::Info, tag, expr)
#define RELCLUST_DEBUG(tag, expr) RELCLUST_LOG_AT(::relclust::LogLevel::Debug, tag, expr)

}  // namespace relclust
