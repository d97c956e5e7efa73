#include "temsa/common.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>

namespace temsa {

std::string_view to_string(Sentiment s) {
    switch (s) {
        case Sentiment::positive: return "positive";
        case Sentiment::negative: return "negative";
        case Sentiment::neutral: return "neutral";
    }
    return "?";
}

std::optional<Sentiment> parse_label(std::string_view text) {
    if (text.empty()) return std::nullopt;
    if (text == "positive") return Sentiment::positive;
    if (text == "negative") return Sentiment::negative;
    if (text == "neutral") return Sentiment::neutral;
    throw Error("unknown label '" + std::string(text) + "'");
}

Sentiment sentiment_from_index(int index) {
    if (index < 0 || index >= kNumClasses)
        throw Error("class index out of range: " + std::to_string(index));
    return static_cast<Sentiment>(index);
}

int ordinal_code(Sentiment s) {
    switch (s) {
        case Sentiment::negative: return 0;
        case Sentiment::neutral: return 1;
        case Sentiment::positive: return 2;
    }
    return -1;
}

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::warn)};
std::mutex g_log_mutex;

void emit(LogLevel level, std::string_view tag, std::string_view msg) {
    if (static_cast<int>(level) > g_level.load()) return;
    std::lock_guard lock(g_log_mutex);
    std::cerr << "[temsa " << tag << "] " << msg << '\n';
}
}  // namespace

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }
void log_warn(std::string_view msg) { emit(LogLevel::warn, "warn", msg); }
void log_info(std::string_view msg) { emit(LogLevel::info, "info", msg); }
void log_debug(std::string_view msg) { emit(LogLevel::debug, "debug", msg); }

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a(bytes));
}

}  // namespace temsa
