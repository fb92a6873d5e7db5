#ifndef SOLICIT_UTIL_H_
#define SOLICIT_UTIL_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace solicit {

// UTC seconds since the epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;

// Numerically stable logistic function.
inline double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// 0 = Sunday ... 6 = Saturday.
int UtcWeekday(Timestamp t);
int UtcHour(Timestamp t);

std::string ToLower(std::string_view s);

// 64-bit FNV-1a. Stable across platforms, used for digests and for deriving
// independent random streams from a seed.
std::uint64_t Fnv1a64(std::string_view data,
                      std::uint64_t basis = 14695981039346656037ULL);
std::string HexDigest(std::uint64_t v);
std::string FileDigest(const std::string& path);

// SplitMix64 finalizer; mixes seeds and stream ids into a well-spread seed.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);
std::vector<std::string> ReadLines(const std::string& path);

// Shortest round-trippable decimal form of a double.
std::string FormatDouble(double v);

}  // namespace solicit

#endif  // SOLICIT_UTIL_H_
