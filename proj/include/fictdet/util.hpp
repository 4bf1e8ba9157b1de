#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace fictdet {

std::string_view version();

// Seeded generator used by every stochastic stage. std::mt19937_64 has a
// fully specified output sequence; the bounded draws below avoid the
// implementation-defined std::uniform_*_distribution so runs reproduce across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  // Uniform real in [0, 1) with 53 random bits.
  double unit();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Combine a base seed with a stream index (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
bool file_exists(const std::string& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

// Shortest round-trip decimal representation for doubles ("%.17g").
std::string format_double(double value);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);

// Number of whitespace-delimited units.
std::size_t count_words(std::string_view text);

std::string utc_timestamp();

}  // namespace fictdet
