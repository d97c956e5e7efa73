#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace temsa {

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Three-way sentiment. The enumerator value doubles as the class index used
/// by the models and as the row/column order of confusion matrices.
enum class Sentiment : int { positive = 0, negative = 1, neutral = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Sentiment, 3> kAllSentiments{
    Sentiment::positive, Sentiment::negative, Sentiment::neutral};

std::string_view to_string(Sentiment s);

/// Parses `positive|negative|neutral`; the empty string maps to nullopt.
/// Anything else throws Error("unknown label '<value>'").
std::optional<Sentiment> parse_label(std::string_view text);

inline int class_index(Sentiment s) { return static_cast<int>(s); }
Sentiment sentiment_from_index(int index);

/// Ordinal coding fed to the signed-rank test: negative=0, neutral=1, positive=2.
int ordinal_code(Sentiment s);

inline bool is_polar(Sentiment s) { return s != Sentiment::neutral; }

// Logging goes to stderr; the level is process-wide.
enum class LogLevel { quiet = 0, warn = 1, info = 2, debug = 3 };
void set_log_level(LogLevel level);
LogLevel log_level();
void log_warn(std::string_view msg);
void log_info(std::string_view msg);
void log_debug(std::string_view msg);

/// 64-bit FNV-1a. Used for artifact fingerprints and vocabulary ids.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Fingerprint of a file's bytes, or "missing" if it cannot be read.
std::string file_fingerprint(const std::string& path);

}  // namespace temsa
