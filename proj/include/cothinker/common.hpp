#pragma once

#include <cctype>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cothinker {

enum class Errc {
  InvalidConfig,
  EmptyText,
  EmptyStyle,
  BackendUnavailable,
  MalformedResponse,
  DimensionMismatch,
  MixedRounds,
  InvalidN,
  MalformedRefSet,
  MissingSection,
  RefCountMismatch,
  SelfReference,
  ReplayDivergence,
  MalformedTranscript,
  FileNotFound,
  UnknownStrategy,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// FNV-1a 64-bit over raw bytes.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline void append_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Hash of (round, agent_id) as two little-endian u64 words.
inline std::uint64_t fnv1a64_pair(std::uint64_t a, std::uint64_t b) {
  std::string buf;
  buf.reserve(16);
  append_u64_le(buf, a);
  append_u64_le(buf, b);
  return fnv1a64(buf);
}

inline std::string to_hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf, 16);
}

// Canonical decimal rendering used for hashing and config echo.
inline std::string fmt_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Deterministic, portable PRNG (splitmix64). std:: distributions are
// implementation-defined, so all randomness goes through this.
struct Rng {
  std::uint64_t state = 0;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). Modulo bias is negligible for the small n used here.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

  // Standard normal via Box-Muller.
  double next_gauss() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

// Per-agent, per-round RNG stream: seed ^ fnv1a64(round, agent_id).
inline Rng agent_round_rng(std::uint64_t seed, std::uint64_t round, std::uint64_t agent_id) {
  return Rng(seed ^ fnv1a64_pair(round, agent_id));
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Truncates text after at most `max_sentences` sentence terminators (., !, ?).
inline std::string truncate_sentences(std::string_view text, int max_sentences) {
  int count = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.' || c == '!' || c == '?') {
      // Treat runs of terminators ("?!", "...") as one sentence end.
      while (i + 1 < text.size() &&
             (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?'))
        ++i;
      if (++count == max_sentences) return std::string(text.substr(0, i + 1));
    }
  }
  return std::string(text);
}

}  // namespace cothinker
